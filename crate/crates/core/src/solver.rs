//! Finite-patch satisfiability for labeled-graph subshifts.
//!
//! An instance is a finite directed graph with tagged edges, an opaque
//! alphabet, and a list of forbidden patterns: connected supports of at
//! most eight vertices, each carrying a symbol. A pattern occurs at an
//! injective image that preserves symbols and matches edge tags exactly,
//! presence and absence alike. Occurrences lying entirely on
//! boundary-flagged vertices are ignored, since their neighborhoods are
//! truncated by the patch edge.
//!
//! `solve` runs deterministic backtracking with forward checking: after
//! every decision, each occurrence that is complete except for one open
//! vertex prunes that vertex's domain, and forced singletons are applied
//! to fixpoint. An unsatisfiable patch is a finite obstruction: any
//! larger patch the instance embeds into is unsatisfiable too, which is
//! what `semi_decide` exploits over a nested family.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::orbit::{OrbitGraphPatch, Vertex};

pub const MAX_SUPPORT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceEdge {
    pub from: usize,
    pub to: usize,
    pub tag: String,
}

/// A forbidden pattern: `symbols[i]` colors support vertex `i`, edges are
/// within the support. The support must be connected and small.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenPattern {
    pub symbols: Vec<String>,
    pub edges: Vec<InstanceEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchInstance {
    pub vertex_count: usize,
    /// Truncated-neighborhood flags; patterns supported only on flagged
    /// vertices are not counted.
    pub boundary: Vec<bool>,
    pub edges: Vec<InstanceEdge>,
    pub alphabet: Vec<String>,
    pub forbidden: Vec<ForbiddenPattern>,
}

impl PatchInstance {
    pub fn validate(&self) -> Result<()> {
        let mut diags = Vec::new();
        if self.boundary.len() != self.vertex_count {
            diags.push(Diagnostic {
                at: "boundary".into(),
                message: format!(
                    "{} flags for {} vertices",
                    self.boundary.len(),
                    self.vertex_count
                ),
            });
        }
        if self.alphabet.is_empty() {
            diags.push(Diagnostic {
                at: "alphabet".into(),
                message: "empty alphabet".into(),
            });
        }
        let mut seen = BTreeSet::new();
        for s in &self.alphabet {
            if !seen.insert(s) {
                diags.push(Diagnostic {
                    at: "alphabet".into(),
                    message: format!("duplicate symbol {s:?}"),
                });
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.from >= self.vertex_count || e.to >= self.vertex_count {
                diags.push(Diagnostic {
                    at: format!("edge {i}"),
                    message: "endpoint outside the vertex range".into(),
                });
            }
        }
        for (p, pat) in self.forbidden.iter().enumerate() {
            let m = pat.symbols.len();
            if m == 0 || m > MAX_SUPPORT {
                diags.push(Diagnostic {
                    at: format!("pattern {p}"),
                    message: format!("support size {m} outside 1..={MAX_SUPPORT}"),
                });
                continue;
            }
            if pat
                .symbols
                .iter()
                .any(|s| !self.alphabet.iter().any(|a| a == s))
            {
                diags.push(Diagnostic {
                    at: format!("pattern {p}"),
                    message: "symbol outside the alphabet".into(),
                });
            }
            if pat.edges.iter().any(|e| e.from >= m || e.to >= m) {
                diags.push(Diagnostic {
                    at: format!("pattern {p}"),
                    message: "edge endpoint outside the support".into(),
                });
                continue;
            }
            // connectivity over undirected reachability
            let mut reach = vec![false; m];
            reach[0] = true;
            loop {
                let mut grew = false;
                for e in &pat.edges {
                    if reach[e.from] != reach[e.to] {
                        reach[e.from] = true;
                        reach[e.to] = true;
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
            }
            if reach.iter().any(|r| !r) {
                diags.push(Diagnostic {
                    at: format!("pattern {p}"),
                    message: "support is not connected".into(),
                });
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(diags))
        }
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| s == name)
    }
}

/// Total coloring as symbol indices into the instance alphabet.
pub type Assignment = Vec<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub pattern: usize,
    pub root: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub expansions: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat,
    Budget(SolveStats),
}

// ---------------------------------------------------------------------------
// Compilation: intern tags, index adjacency, enumerate pattern occurrences
// structurally once so search and verification share one ground truth.

struct Occurrence {
    pattern: usize,
    /// `image[i]` is the instance vertex playing support vertex `i`.
    image: Vec<usize>,
}

struct Compiled {
    n: usize,
    degree: Vec<usize>,
    /// Symbol index per support position, aligned with `Occurrence.image`.
    pattern_symbols: Vec<Vec<usize>>,
    occurrences: Vec<Occurrence>,
}

fn compile(inst: &PatchInstance) -> Result<Compiled> {
    inst.validate()?;
    let n = inst.vertex_count;
    let mut tags: BTreeMap<&str, u32> = BTreeMap::new();
    for e in inst.edges.iter() {
        let next = tags.len() as u32;
        tags.entry(e.tag.as_str()).or_insert(next);
    }
    let mut out: Vec<Vec<(u32, usize)>> = vec![Vec::new(); n];
    let mut incoming: Vec<Vec<(u32, usize)>> = vec![Vec::new(); n];
    let mut pair_tags: BTreeMap<(usize, usize), BTreeSet<u32>> = BTreeMap::new();
    let mut degree = vec![0usize; n];
    for e in &inst.edges {
        let t = tags[e.tag.as_str()];
        out[e.from].push((t, e.to));
        incoming[e.to].push((t, e.from));
        degree[e.from] += 1;
        degree[e.to] += 1;
        pair_tags.entry((e.from, e.to)).or_default().insert(t);
    }
    for v in 0..n {
        out[v].sort_unstable();
        out[v].dedup();
        incoming[v].sort_unstable();
        incoming[v].dedup();
    }

    let mut pattern_symbols = Vec::with_capacity(inst.forbidden.len());
    let mut occurrences = Vec::new();
    for (p, pat) in inst.forbidden.iter().enumerate() {
        let syms: Vec<usize> = pat
            .symbols
            .iter()
            .map(|s| inst.symbol_index(s).expect("validated symbols"))
            .collect();
        let m = syms.len();
        // tag sets per ordered support pair; unknown tags cannot occur
        let mut pat_pairs: BTreeMap<(usize, usize), BTreeSet<u32>> = BTreeMap::new();
        let mut matchable = true;
        for e in &pat.edges {
            match tags.get(e.tag.as_str()) {
                Some(&t) => {
                    pat_pairs.entry((e.from, e.to)).or_default().insert(t);
                }
                None => matchable = false,
            }
        }
        pattern_symbols.push(syms);
        if !matchable {
            continue;
        }
        // search order: vertex 0, then vertices adjacent to a placed one
        let mut order = vec![0usize];
        let mut anchors: Vec<(usize, bool, u32)> = vec![(0, true, 0)]; // unused for the root
        while order.len() < m {
            let mut found = None;
            'scan: for (&(a, b), ts) in &pat_pairs {
                let (placed, fresh, fwd) = if order.contains(&a) && !order.contains(&b) {
                    (a, b, true)
                } else if order.contains(&b) && !order.contains(&a) {
                    (b, a, false)
                } else {
                    continue;
                };
                let t = *ts.iter().next().expect("nonempty tag set");
                found = Some((placed, fresh, fwd, t));
                break 'scan;
            }
            let (placed, fresh, fwd, t) = found.expect("validated connectivity");
            order.push(fresh);
            let placed_pos = order.iter().position(|&q| q == placed).unwrap();
            anchors.push((placed_pos, fwd, t));
        }

        // depth-first structural enumeration
        let mut image = vec![usize::MAX; m];
        let mut stack: Vec<(usize, Vec<usize>)> = (0..n).rev().map(|v| (0, vec![v])).collect();
        while let Some((depth, partial)) = stack.pop() {
            image[..=depth].copy_from_slice(&partial[..=depth]);
            if depth + 1 == m {
                // full induced check: tag sets agree on every support pair
                let ok = (0..m).all(|i| {
                    (0..m).all(|j| {
                        if i == j {
                            return true;
                        }
                        let (u, v) = (order[i], order[j]);
                        let want = pat_pairs.get(&(u, v));
                        let got = pair_tags.get(&(image[i], image[j]));
                        match (want, got) {
                            (None, None) => true,
                            (Some(a), Some(b)) => a == b,
                            _ => false,
                        }
                    })
                });
                let touches_interior = image.iter().any(|&v| !inst.boundary[v]);
                if ok && touches_interior {
                    let mut by_support = vec![usize::MAX; m];
                    for (pos, &sv) in order.iter().enumerate() {
                        by_support[sv] = image[pos];
                    }
                    occurrences.push(Occurrence {
                        pattern: p,
                        image: by_support,
                    });
                }
                continue;
            }
            let (placed_pos, fwd, t) = anchors[depth + 1];
            let host = partial[placed_pos];
            let nbrs = if fwd { &out[host] } else { &incoming[host] };
            for &(tag, w) in nbrs {
                if tag == t && !partial[..=depth].contains(&w) {
                    let mut next = partial.clone();
                    if next.len() == depth + 1 {
                        next.push(w);
                    } else {
                        next[depth + 1] = w;
                    }
                    next.truncate(depth + 2);
                    stack.push((depth + 1, next));
                }
            }
        }
    }
    occurrences.sort_by(|a, b| (a.pattern, &a.image).cmp(&(b.pattern, &b.image)));
    Ok(Compiled {
        n,
        degree,
        pattern_symbols,
        occurrences,
    })
}

/// Lists every forbidden occurrence under a total coloring, as the
/// pattern index and the image of its support vertex 0.
pub fn verify(inst: &PatchInstance, asg: &Assignment) -> Result<Vec<Violation>> {
    let compiled = compile(inst)?;
    if asg.len() != inst.vertex_count {
        return Err(Error::bad_input(format!(
            "coloring covers {} of {} vertices",
            asg.len(),
            inst.vertex_count
        )));
    }
    if let Some(&bad) = asg.iter().find(|&&s| s >= inst.alphabet.len()) {
        return Err(Error::bad_input(format!("symbol index {bad} out of range")));
    }
    Ok(compiled
        .occurrences
        .iter()
        .filter(|occ| {
            let syms = &compiled.pattern_symbols[occ.pattern];
            occ.image.iter().zip(syms).all(|(&v, &s)| asg[v] == s)
        })
        .map(|occ| Violation {
            pattern: occ.pattern,
            root: occ.image[0],
        })
        .collect())
}

struct SearchState {
    /// Bitset per vertex over symbol indices.
    domains: Vec<Vec<u64>>,
    assign: Vec<Option<usize>>,
}

fn dom_has(domain: &[u64], s: usize) -> bool {
    domain[s / 64] & (1 << (s % 64)) != 0
}

fn dom_remove(domain: &mut [u64], s: usize) {
    domain[s / 64] &= !(1 << (s % 64));
}

fn dom_count(domain: &[u64]) -> u32 {
    domain.iter().map(|w| w.count_ones()).sum()
}

fn dom_single(domain: &[u64]) -> Option<usize> {
    if dom_count(domain) != 1 {
        return None;
    }
    for (i, w) in domain.iter().enumerate() {
        if *w != 0 {
            return Some(i * 64 + w.trailing_zeros() as usize);
        }
    }
    None
}

/// Forward checking to fixpoint: an occurrence matched everywhere except
/// one open vertex prunes that vertex; forced singletons are assigned.
/// Returns false when a domain empties or a full occurrence appears.
fn propagate(compiled: &Compiled, state: &mut SearchState) -> bool {
    loop {
        let mut changed = false;
        for occ in &compiled.occurrences {
            let syms = &compiled.pattern_symbols[occ.pattern];
            let mut open: Option<(usize, usize)> = None;
            let mut dead = false;
            for (&v, &s) in occ.image.iter().zip(syms) {
                match state.assign[v] {
                    Some(a) if a == s => {}
                    Some(_) => {
                        dead = true;
                        break;
                    }
                    None if !dom_has(&state.domains[v], s) => {
                        dead = true;
                        break;
                    }
                    None => {
                        if open.replace((v, s)).is_some() {
                            // two or more open vertices: nothing to prune
                            dead = true;
                            break;
                        }
                    }
                }
            }
            if dead {
                continue;
            }
            match open {
                None => return false, // forbidden occurrence fully assigned
                Some((v, s)) => {
                    dom_remove(&mut state.domains[v], s);
                    match dom_single(&state.domains[v]) {
                        _ if dom_count(&state.domains[v]) == 0 => return false,
                        Some(forced) => {
                            state.assign[v] = Some(forced);
                        }
                        None => {}
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

/// Deterministic backtracking search. `budget` bounds the number of
/// decision expansions; exceeding it yields `Budget` with the count.
pub fn solve(inst: &PatchInstance, budget: u64) -> Result<SolveResult> {
    if budget == 0 {
        return Err(Error::bad_input("budget must be positive"));
    }
    let compiled = compile(inst)?;
    let words = inst.alphabet.len().div_ceil(64);
    let mut full = vec![u64::MAX; words];
    if inst.alphabet.len() % 64 != 0 {
        *full.last_mut().unwrap() = (1u64 << (inst.alphabet.len() % 64)) - 1;
    }
    let mut state = SearchState {
        domains: vec![full; compiled.n],
        assign: vec![None; compiled.n],
    };
    let mut stats = SolveStats::default();
    if !propagate(&compiled, &mut state) {
        return Ok(SolveResult::Unsat);
    }
    let result = search(inst, &compiled, state, budget, &mut stats)?;
    if let SolveResult::Sat(ref asg) = result {
        let violations = verify(inst, asg)?;
        assert!(violations.is_empty(), "witnesses are verified before return");
    }
    Ok(result)
}

fn search(
    inst: &PatchInstance,
    compiled: &Compiled,
    state: SearchState,
    budget: u64,
    stats: &mut SolveStats,
) -> Result<SolveResult> {
    // smallest domain first, then higher degree, then lower id
    let pick = (0..compiled.n)
        .filter(|&v| state.assign[v].is_none())
        .min_by_key(|&v| {
            (
                dom_count(&state.domains[v]),
                usize::MAX - compiled.degree[v],
                v,
            )
        });
    let Some(v) = pick else {
        let asg: Assignment = state.assign.iter().map(|a| a.unwrap()).collect();
        return Ok(SolveResult::Sat(asg));
    };
    for s in 0..inst.alphabet.len() {
        if !dom_has(&state.domains[v], s) {
            continue;
        }
        stats.expansions += 1;
        if stats.expansions > budget {
            return Ok(SolveResult::Budget(*stats));
        }
        let mut next = SearchState {
            domains: state.domains.clone(),
            assign: state.assign.clone(),
        };
        next.assign[v] = Some(s);
        for w in next.domains[v].iter_mut() {
            *w = 0;
        }
        next.domains[v][s / 64] = 1 << (s % 64);
        if propagate(compiled, &mut next) {
            match search(inst, compiled, next, budget, stats)? {
                SolveResult::Unsat => {}
                done => return Ok(done),
            }
        }
    }
    Ok(SolveResult::Unsat)
}

/// Exhaustive reference search, capped so it stays a test oracle.
pub fn brute_force(inst: &PatchInstance) -> Result<Option<Assignment>> {
    if inst.vertex_count > 12 {
        return Err(Error::CapExceeded {
            what: "brute force vertices".into(),
            cap: 12,
        });
    }
    if inst.alphabet.len() > 3 {
        return Err(Error::CapExceeded {
            what: "brute force alphabet".into(),
            cap: 3,
        });
    }
    let compiled = compile(inst)?;
    let a = inst.alphabet.len();
    let mut asg = vec![0usize; inst.vertex_count];
    loop {
        let clean = compiled.occurrences.iter().all(|occ| {
            let syms = &compiled.pattern_symbols[occ.pattern];
            occ.image.iter().zip(syms).any(|(&v, &s)| asg[v] != s)
        });
        if clean {
            return Ok(Some(asg));
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == asg.len() {
                return Ok(None);
            }
            asg[i] += 1;
            if asg[i] < a {
                break;
            }
            asg[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Instances over orbit graphs

/// Wraps an orbit graph patch as a solver instance: vertices in row-major
/// order, `next` and `child:k` edge tags, boundary from interiority.
pub fn orbit_instance(
    graph: &OrbitGraphPatch,
    alphabet: Vec<String>,
    forbidden: Vec<ForbiddenPattern>,
) -> (PatchInstance, Vec<Vertex>) {
    let index: Vec<Vertex> = graph.vertices().collect();
    let lookup: BTreeMap<Vertex, usize> =
        index.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edges = Vec::new();
    for (i, &v) in index.iter().enumerate() {
        if let Some(w) = graph.next(v) {
            edges.push(InstanceEdge {
                from: i,
                to: lookup[&w],
                tag: "next".into(),
            });
        }
        for (k, w) in graph.children(v) {
            edges.push(InstanceEdge {
                from: i,
                to: lookup[&w],
                tag: format!("child:{k}"),
            });
        }
    }
    let boundary = index.iter().map(|&v| !graph.is_interior(v)).collect();
    (
        PatchInstance {
            vertex_count: index.len(),
            boundary,
            edges,
            alphabet,
            forbidden,
        },
        index,
    )
}

// ---------------------------------------------------------------------------
// Semi-decision over nested patches

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SemiVerdict {
    /// A finite obstruction: every larger patch in the family is
    /// unsatisfiable too.
    Unsat { radius: usize },
    /// Satisfiable at every checked radius; says nothing about the
    /// infinite problem.
    Inconclusive { checked: usize },
    Budget { radius: usize, stats: SolveStats },
}

#[derive(Debug)]
pub struct SemiReport {
    pub verdict: SemiVerdict,
    pub outcomes: Vec<(usize, SolveResult)>,
}

/// Solves a nested family radius by radius: the first refuted patch
/// settles the whole family, anything else stays inconclusive.
pub fn semi_decide(
    family: &mut dyn FnMut(usize) -> Result<PatchInstance>,
    max_radius: usize,
    budget: u64,
) -> Result<SemiReport> {
    let mut outcomes = Vec::new();
    for r in 0..=max_radius {
        let inst = family(r)?;
        let result = solve(&inst, budget)?;
        let stop = !matches!(result, SolveResult::Sat(_));
        outcomes.push((r, result));
        if stop {
            let verdict = match outcomes.last().unwrap().1 {
                SolveResult::Unsat => SemiVerdict::Unsat { radius: r },
                SolveResult::Budget(stats) => SemiVerdict::Budget { radius: r, stats },
                SolveResult::Sat(_) => unreachable!(),
            };
            return Ok(SemiReport { verdict, outcomes });
        }
    }
    Ok(SemiReport {
        verdict: SemiVerdict::Inconclusive {
            checked: max_radius + 1,
        },
        outcomes,
    })
}

// ---------------------------------------------------------------------------
// JSON interface

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SolveOutcomeSpec {
    pub status: String,
    /// Symbol names per vertex for satisfiable instances.
    pub witness: Option<Vec<String>>,
    pub expansions: Option<u64>,
}

pub fn outcome_spec(inst: &PatchInstance, result: &SolveResult) -> SolveOutcomeSpec {
    match result {
        SolveResult::Sat(asg) => SolveOutcomeSpec {
            status: "sat".into(),
            witness: Some(asg.iter().map(|&s| inst.alphabet[s].clone()).collect()),
            expansions: None,
        },
        SolveResult::Unsat => SolveOutcomeSpec {
            status: "unsat".into(),
            witness: None,
            expansions: None,
        },
        SolveResult::Budget(stats) => SolveOutcomeSpec {
            status: "budget".into(),
            witness: None,
            expansions: Some(stats.expansions),
        },
    }
}
