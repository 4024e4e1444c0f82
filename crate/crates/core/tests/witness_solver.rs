//! End-to-end bridge: a displaced-grid witness coloring of an orbit patch
//! is replayed through the generic patch solver and found clean, and the
//! solver independently finds some clean coloring of the same instance.

use std::collections::BTreeMap;

use orbitile::geometry::layout_tiling;
use orbitile::orbit::{grow_orbit_patch, orbit_graph_of, OrbitPatch};
use orbitile::solver::{
    orbit_instance, solve, verify, ForbiddenPattern, InstanceEdge, SolveResult,
};
use orbitile::substitution::{find_expansion, FirstRule, Letter, Rule, Substitution};
use orbitile::superposition::{build_witness, check_witness, triple_allowed, SuperSymbol};
use orbitile::Config;

fn quad() -> Substitution {
    Substitution::new(
        vec!["q".into()],
        vec![Rule {
            lhs: Letter(0),
            rhs: vec![Letter(0); 4],
        }],
    )
    .unwrap()
}

#[test]
fn witness_coloring_passes_the_patch_solver() {
    let sub = quad();
    let exp = find_expansion(&sub, &Config::default()).unwrap();
    let patch = grow_orbit_patch(&sub, Letter(0), 3, &mut FirstRule).unwrap();
    let graph = orbit_graph_of(&sub, &patch);
    let tiling = layout_tiling(&exp, &graph).unwrap();
    let witness = build_witness(&sub, &exp, &graph, &tiling, 0.31, 0.17).unwrap();
    check_witness(&sub, &graph, &witness).unwrap();

    // instance over the rows that carry symbols (all but the last)
    let trimmed = OrbitPatch {
        rows: patch.rows[..3].to_vec(),
        links: patch.links[..2].to_vec(),
    };
    let tgraph = orbit_graph_of(&sub, &trimmed);

    let mut name_of: BTreeMap<SuperSymbol, String> = BTreeMap::new();
    for ((row, _), sym) in &witness.symbols {
        if *row < 3 {
            let next = format!("s{}", name_of.len());
            name_of.entry(sym.clone()).or_insert(next);
        }
    }
    let alphabet: Vec<String> = name_of.values().cloned().collect();
    let symbols: Vec<&SuperSymbol> = name_of.keys().collect();

    // forbidden patterns mirror the triple rules: child-only parts on
    // two-vertex supports, right-neighbor parts on three-vertex supports
    let max_arity = 4usize;
    let mut forbidden = Vec::new();
    for ell in 0..max_arity {
        for &su in &symbols {
            for &sw in &symbols {
                if !triple_allowed(&sub, su, None, sw, ell) {
                    forbidden.push(ForbiddenPattern {
                        symbols: vec![name_of[su].clone(), name_of[sw].clone()],
                        edges: vec![InstanceEdge {
                            from: 0,
                            to: 1,
                            tag: format!("child:{ell}"),
                        }],
                    });
                    continue;
                }
                for &sv in &symbols {
                    if !triple_allowed(&sub, su, Some(sv), sw, ell) {
                        forbidden.push(ForbiddenPattern {
                            symbols: vec![
                                name_of[su].clone(),
                                name_of[sv].clone(),
                                name_of[sw].clone(),
                            ],
                            edges: vec![
                                InstanceEdge {
                                    from: 0,
                                    to: 1,
                                    tag: "next".into(),
                                },
                                InstanceEdge {
                                    from: 0,
                                    to: 2,
                                    tag: format!("child:{ell}"),
                                },
                            ],
                        });
                    }
                }
            }
        }
    }
    assert!(!forbidden.is_empty(), "the triple rules do forbid something");

    let (inst, index) = orbit_instance(&tgraph, alphabet.clone(), forbidden);
    let coloring: Vec<usize> = index
        .iter()
        .map(|v| {
            let sym = &witness.symbols[&(v.row, v.col)];
            inst.alphabet
                .iter()
                .position(|n| n == &name_of[sym])
                .unwrap()
        })
        .collect();
    let violations = verify(&inst, &coloring).unwrap();
    assert!(violations.is_empty(), "witness violates: {violations:?}");

    match solve(&inst, 5_000_000).unwrap() {
        SolveResult::Sat(found) => {
            assert!(verify(&inst, &found).unwrap().is_empty());
        }
        other => panic!("expected a satisfiable instance, got {other:?}"),
    }

    // forbidding the symbol used at an interior vertex flags the witness
    let mut poisoned = inst.clone();
    let interior = index
        .iter()
        .position(|&v| tgraph.is_interior(v))
        .expect("depth-2 graphs have interior vertices");
    poisoned.forbidden.push(ForbiddenPattern {
        symbols: vec![inst.alphabet[coloring[interior]].clone()],
        edges: vec![],
    });
    assert!(!verify(&poisoned, &coloring).unwrap().is_empty());
}
