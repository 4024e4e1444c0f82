//! One binary over the whole pipeline: eigenvalue search, orbit patches,
//! tiling renders, symbol alphabets, block lifting, surface-group word
//! reduction, Cayley balls, and patch solving. Subcommands speak the JSON
//! formats of the owning library modules; outputs are byte-deterministic
//! for fixed inputs and flags.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use orbitile::geometry::{layout_tiling, render_svg, validate_tiling, SvgStyle};
use orbitile::lift::{paste_blocks, PastedGraphSpec};
use orbitile::orbit::{
    grow_orbit_patch_from_word, orbit_graph_of, validate_orbit, OrbitPatchSpec,
};
use orbitile::solver::{
    orbit_instance, outcome_spec, semi_decide, solve, ForbiddenPattern, PatchInstance,
    SemiVerdict, SolveResult,
};
use orbitile::substitution::{
    expand_word, find_expansion, normalize_expansion, FirstRule, RuleChooser, SeededChooser,
    Substitution, SubstitutionSpec,
};
use orbitile::superposition::{build_witness, check_witness, enumerate_alphabet};
use orbitile::surface::complex::grow_ball;
use orbitile::surface::dehn::{dehn_reduce, is_trivial};
use orbitile::surface::direction::{build_direction_patch, DirectionPatchSpec};
use orbitile::surface::transport::{transport_forbidden, SupportPattern};
use orbitile::surface::{format_word, parse_word};
use orbitile::{Config, Error};

#[derive(Parser)]
#[command(name = "orbitile", version, about = "Substitution tilings, orbit graphs, and patch solving")]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct GrowArgs {
    /// Substitution JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Seed row, written in the substitution's letters.
    #[arg(long, default_value = "")]
    word: String,
    /// Number of substitution steps to grow.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Seed for random rule choices; omitted means first-rule.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Finds the expanding eigenvalue and letter widths of a substitution.
    Eig {
        #[arg(long)]
        input: PathBuf,
        /// Relative tolerance for the expansion defect.
        #[arg(long)]
        tol: Option<f64>,
        /// Writes the substitution back with the expansion attached.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Applies the substitution to a word and prints the result.
    Expand {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Grows an orbit patch; writes row JSON and optionally a DOT graph.
    Orbit {
        #[command(flatten)]
        grow: GrowArgs,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Lays out an orbit patch as tiles and writes an SVG.
    Render {
        #[command(flatten)]
        grow: GrowArgs,
        #[arg(long)]
        output: PathBuf,
        /// Pixels per tiling unit.
        #[arg(long, default_value_t = 64.0)]
        scale: f64,
    },
    /// Enumerates the superposition symbol alphabet over offset grids.
    Alphabet {
        #[arg(long)]
        input: PathBuf,
        /// Base grid resolution per axis.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Colors a patch by displaced-grid symbols and pastes their blocks.
    Lift {
        #[command(flatten)]
        grow: GrowArgs,
        /// Horizontal displacement of the overlay grid.
        #[arg(long, default_value_t = 0.0)]
        dx: f64,
        /// Vertical displacement of the overlay grid.
        #[arg(long, default_value_t = 0.0)]
        dy: f64,
        /// Fail on attachments that leave the patch instead of skipping.
        #[arg(long)]
        closed: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reduces a surface-group word, or transports a forbidden-pattern
    /// set from row supports onto the Cayley annulus.
    #[command(group(clap::ArgGroup::new("mode").required(true).args(["word", "input"])))]
    ReduceSurface {
        /// Word to rewrite greedily along the relator.
        #[arg(long)]
        word: Option<String>,
        /// Pattern-set JSON (row supports plus symbols) to transport.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Annulus radius used for transport.
        #[arg(long, default_value_t = 3)]
        radius: usize,
        /// Writes the transported cell patterns.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Grows the Cayley ball of the octagon complex.
    Ball {
        #[arg(long)]
        radius: usize,
        /// Prints ring sizes.
        #[arg(long)]
        stats: bool,
        /// Exports the orange-free annulus instead of the rooted patch.
        #[arg(long)]
        annulus: bool,
        /// Writes the direction patch JSON.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Writes the cell graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Solves a patch instance, or a nested family when --radius is given.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Node-expansion budget per solve call.
        #[arg(long)]
        budget: Option<u64>,
        /// Treat the input as a family and semi-decide radii 0..=radius.
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Family input for `solve --radius`: orbit graphs of a substitution,
/// grown from a seed letter, colored over the given alphabet.
#[derive(Serialize, Deserialize)]
struct SolveFamilySpec {
    substitution: SubstitutionSpec,
    seed: String,
    alphabet: Vec<String>,
    forbidden: Vec<ForbiddenPattern>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::bad_input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::bad_input(format!("cannot parse {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text)
        .map_err(|e| Error::bad_input(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn load_substitution(path: &Path) -> Result<(Substitution, Option<orbitile::substitution::ExpansionData>), Error> {
    read_json::<SubstitutionSpec>(path)?.build()
}

fn expansion_or_search(
    sub: &Substitution,
    stored: Option<orbitile::substitution::ExpansionData>,
    cfg: &Config,
) -> Result<orbitile::substitution::ExpansionData, Error> {
    match stored {
        Some(e) => Ok(e),
        None => find_expansion(sub, cfg),
    }
}

fn chooser_for(seed: Option<u64>) -> Box<dyn RuleChooser> {
    match seed {
        Some(s) => Box::new(SeededChooser::new(s)),
        None => Box::new(FirstRule),
    }
}

fn grow(
    grow: &GrowArgs,
) -> Result<
    (
        Substitution,
        Option<orbitile::substitution::ExpansionData>,
        orbitile::orbit::OrbitPatch,
    ),
    Error,
> {
    let (sub, exp) = load_substitution(&grow.input)?;
    let word = if grow.word.is_empty() {
        vec![orbitile::substitution::Letter(0)]
    } else {
        sub.parse_word(&grow.word)?
    };
    let mut chooser = chooser_for(grow.seed);
    let patch = grow_orbit_patch_from_word(&sub, &word, grow.depth, chooser.as_mut())?;
    validate_orbit(&sub, &patch)?;
    Ok((sub, exp, patch))
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(jobs) = cli.jobs {
        // best effort: tests may run several commands in one process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match cli.cmd {
        Cmd::Eig { input, tol, output } => {
            let (sub, _) = load_substitution(&input)?;
            let mut cfg = Config::default();
            if let Some(t) = tol {
                cfg.eps_expand = t;
            }
            let exp = find_expansion(&sub, &cfg)?;
            println!("lambda = {:.12}", exp.lambda);
            for l in sub.letters() {
                println!("v({}) = {:.12}", sub.name(l), exp.v[l.0]);
            }
            if let Some(path) = output {
                write_json(&path, &SubstitutionSpec::from_parts(&sub, Some(&exp)))?;
            }
            Ok(())
        }
        Cmd::Expand {
            input,
            word,
            steps,
            seed,
        } => {
            let (sub, _) = load_substitution(&input)?;
            let start = sub.parse_word(&word)?;
            let mut chooser = chooser_for(seed);
            let out = expand_word(&sub, &start, steps, chooser.as_mut());
            println!("{}", sub.word_to_string(&out));
            Ok(())
        }
        Cmd::Orbit { grow: g, output, dot } => {
            let (sub, _, patch) = grow(&g)?;
            println!(
                "rows: {}",
                patch
                    .rows
                    .iter()
                    .map(|r| r.word.len().to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            if let Some(path) = output {
                write_json(&path, &OrbitPatchSpec::from_patch(&sub, &patch))?;
            }
            if let Some(path) = dot {
                let graph = orbit_graph_of(&sub, &patch);
                write_text(&path, &graph.to_dot(&sub))?;
            }
            Ok(())
        }
        Cmd::Render { grow: g, output, scale } => {
            let (sub, exp, patch) = grow(&g)?;
            let cfg = Config::default();
            let exp = expansion_or_search(&sub, exp, &cfg)?;
            let graph = orbit_graph_of(&sub, &patch);
            let tiling = layout_tiling(&exp, &graph)?;
            validate_tiling(&graph, &tiling, cfg.eps_geom)?;
            let style = SvgStyle {
                scale,
                ..SvgStyle::default()
            };
            write_text(&output, &render_svg(&tiling, sub.names(), &style))?;
            println!("tiles: {}", tiling.tiles.len());
            Ok(())
        }
        Cmd::Alphabet { input, grid, output } => {
            let (sub, exp) = load_substitution(&input)?;
            let mut cfg = Config::default();
            if let Some(g) = grid {
                cfg.grid_n = g;
            }
            let exp = expansion_or_search(&sub, exp, &cfg)?;
            let exp = normalize_expansion(&exp, cfg.v_floor, cfg.v_floor_delta);
            let result = enumerate_alphabet(&sub, &exp, &cfg)?;
            println!(
                "symbols: {} (stable at grid {})",
                result.symbols.len(),
                result.grid
            );
            if let Some(path) = output {
                let list: Vec<_> = result.symbols.iter().collect();
                write_json(&path, &list)?;
            }
            Ok(())
        }
        Cmd::Lift {
            grow: g,
            dx,
            dy,
            closed,
            output,
        } => {
            let (sub, exp, patch) = grow(&g)?;
            let cfg = Config::default();
            let exp = expansion_or_search(&sub, exp, &cfg)?;
            let exp = normalize_expansion(&exp, cfg.v_floor, cfg.v_floor_delta);
            let graph = orbit_graph_of(&sub, &patch);
            let tiling = layout_tiling(&exp, &graph)?;
            let witness = build_witness(&sub, &exp, &graph, &tiling, dx, dy)?;
            check_witness(&sub, &graph, &witness)?;
            let pasted = paste_blocks(&sub, &graph, &witness.symbols, closed)?;
            println!(
                "blocks: {}  cells: {}  edges: {}",
                witness.symbols.len(),
                pasted.cells.len(),
                pasted.edges.len()
            );
            if let Some(path) = output {
                write_json(&path, &PastedGraphSpec::from_graph(&pasted))?;
            }
            Ok(())
        }
        Cmd::ReduceSurface {
            word,
            input,
            radius,
            output,
        } => {
            if let Some(word) = word {
                let w = parse_word(&word)?;
                let reduced = dehn_reduce(&w);
                println!("{}", format_word(&reduced));
                println!(
                    "{}",
                    if is_trivial(&w) { "trivial" } else { "nontrivial" }
                );
                return Ok(());
            }
            let path = input.expect("the argument group admits exactly one mode");
            let patterns: Vec<SupportPattern> = read_json(&path)?;
            let patch = build_direction_patch(grow_ball(radius), false);
            let orbit = patch.annulus_orbit()?;
            let set = transport_forbidden(&patch, &orbit, &patterns)?;
            println!(
                "transported: {}  skipped: {}",
                set.transported.len(),
                set.skipped.len()
            );
            if let Some(path) = output {
                write_json(&path, &set)?;
            }
            Ok(())
        }
        Cmd::Ball {
            radius,
            stats,
            annulus,
            output,
            dot,
        } => {
            let ball = grow_ball(radius);
            if stats {
                let line = (1..ball.rings.len())
                    .map(|i| format!("|C_{i}|={}", ball.rings[i].len()))
                    .collect::<Vec<_>>()
                    .join(", ");
                println!("{line}");
                println!("cells={}", ball.cell_count());
            }
            if let Some(path) = dot {
                write_text(&path, &ball.to_dot())?;
            }
            if let Some(path) = output {
                let patch = build_direction_patch(ball, !annulus);
                let report = patch.check();
                if !report.violations.is_empty() {
                    return Err(Error::Validation(report.violations));
                }
                write_json(&path, &DirectionPatchSpec::from_patch(&patch))?;
            }
            Ok(())
        }
        Cmd::Solve {
            input,
            budget,
            radius,
            output,
        } => {
            let budget = budget.unwrap_or(Config::default().solver_budget);
            match radius {
                None => {
                    let inst: PatchInstance = read_json(&input)?;
                    let result = solve(&inst, budget)?;
                    match &result {
                        SolveResult::Sat(_) => println!("SAT"),
                        SolveResult::Unsat => println!("UNSAT"),
                        SolveResult::Budget(stats) => {
                            println!("BUDGET after {} expansions", stats.expansions)
                        }
                    }
                    if let Some(path) = output {
                        write_json(&path, &outcome_spec(&inst, &result))?;
                    }
                    Ok(())
                }
                Some(max_radius) => {
                    let family: SolveFamilySpec = read_json(&input)?;
                    let (sub, _) = family.substitution.build()?;
                    let seed = sub
                        .letter_by_name(&family.seed)
                        .ok_or_else(|| Error::bad_input(format!("unknown seed letter {:?}", family.seed)))?;
                    let mut make = |r: usize| {
                        let patch =
                            grow_orbit_patch_from_word(&sub, &[seed], r, &mut FirstRule)?;
                        let graph = orbit_graph_of(&sub, &patch);
                        Ok(orbit_instance(
                            &graph,
                            family.alphabet.clone(),
                            family.forbidden.clone(),
                        )
                        .0)
                    };
                    let report = semi_decide(&mut make, max_radius, budget)?;
                    for (r, result) in &report.outcomes {
                        let label = match result {
                            SolveResult::Sat(_) => "SAT".to_string(),
                            SolveResult::Unsat => "UNSAT".to_string(),
                            SolveResult::Budget(s) => {
                                format!("BUDGET after {} expansions", s.expansions)
                            }
                        };
                        println!("radius {r}: {label}");
                    }
                    match report.verdict {
                        SemiVerdict::Unsat { radius } => {
                            println!("UNSAT at radius {radius}: the whole family is empty")
                        }
                        SemiVerdict::Inconclusive { checked } => println!(
                            "SAT at all {checked} radii checked: inconclusive for the infinite problem"
                        ),
                        SemiVerdict::Budget { radius, stats } => println!(
                            "BUDGET at radius {radius} after {} expansions",
                            stats.expansions
                        ),
                    }
                    if let Some(path) = output {
                        let summary: Vec<BTreeMap<String, serde_json::Value>> = report
                            .outcomes
                            .iter()
                            .map(|(r, res)| {
                                let mut m = BTreeMap::new();
                                m.insert("radius".into(), serde_json::json!(r));
                                m.insert(
                                    "status".into(),
                                    serde_json::json!(match res {
                                        SolveResult::Sat(_) => "sat",
                                        SolveResult::Unsat => "unsat",
                                        SolveResult::Budget(_) => "budget",
                                    }),
                                );
                                m
                            })
                            .collect();
                        write_json(&path, &summary)?;
                    }
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
