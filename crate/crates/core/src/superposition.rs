//! Symbols read off a hierarchical tile from the doubling reference grid.
//!
//! The reference grid is the two-letter doubling tiling: level `i` is the
//! horizontal strip between `-(i+1) ln 2` and `-i ln 2`, cut into tiles of
//! width `2^(1-i)`. Overlaying a tile of an expansion-`lambda` tiling on
//! this grid and recording where the grid lines fall produces a finite
//! symbol per tile once the offsets are reduced modulo the grid's
//! self-similarity. The symbol of a tile with rule `(a, w)`, normalized
//! horizontal offset `u` in `[0, 1)` and vertical offset `y_off` in
//! `[0, ln 2)` (with `tau = exp(-y_off)`) is:
//!
//! * `h = floor((ln lambda + y_off) / ln 2)`, the number of grid levels the
//!   tile spans; requires `lambda > 2` so `h >= 1`.
//! * `t = floor(u + v(a)/2 * tau)`, the number of grid columns the tile
//!   covers at its own level.
//! * per child `i`, with `S_i = v(w_0) + .. + v(w_{i-1})`: the pair
//!   `b_i = floor(2^(h-1) z_i)`, `s_i = floor(2^h z_i) mod 2` where
//!   `z_i = u + S_i tau / (2 lambda)` locates the child's left edge in
//!   half-columns of the bottom grid level.
//!
//! Adjacent symbols are constrained by four local rules
//! ([`triple_allowed`]); colorings obeying them exist for every offset
//! ([`build_witness`]).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Diagnostic, Error, Result};
use crate::geometry::Tiling;
use crate::orbit::OrbitGraphPatch;
use crate::orbit::Vertex;
use crate::substitution::{ExpansionData, Substitution};

pub const LN2: f64 = std::f64::consts::LN_2;

/// Offsets of a tile against the reference grid, reduced modulo the grid's
/// self-similarity: `u` in `[0, 1)`, `y_off` in `[0, ln 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetParams {
    pub u: f64,
    pub y_off: f64,
}

impl OffsetParams {
    pub fn new(u: f64, y_off: f64) -> Result<OffsetParams> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::bad_input(format!("u = {u} outside [0, 1)")));
        }
        if !(0.0..LN2).contains(&y_off) {
            return Err(Error::bad_input(format!("y_off = {y_off} outside [0, ln 2)")));
        }
        Ok(OffsetParams { u, y_off })
    }

    /// `exp(-y_off)`, in `(1/2, 1]`.
    pub fn tau(&self) -> f64 {
        (-self.y_off).exp()
    }
}

/// Grid-column anchor of one child edge: column pair index `b` and parity
/// bit `s` selecting the half-column.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Anchor {
    pub b: i64,
    pub s: u8,
}

/// Symbol of a tile: the rule it refines by, the level span `h`, the column
/// count `t`, and one anchor per child.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SuperSymbol {
    pub rule: usize,
    pub h: i64,
    pub t: i64,
    pub anchors: Vec<Anchor>,
}

/// Computes the symbol of a tile with the given rule at the given offsets.
pub fn symbol_from_offsets(
    sub: &Substitution,
    exp: &ExpansionData,
    rule: usize,
    off: &OffsetParams,
) -> Result<SuperSymbol> {
    let r = sub
        .rules()
        .get(rule)
        .ok_or_else(|| Error::bad_input(format!("rule index {rule} out of range")))?;
    let lambda = exp.lambda;
    if lambda <= 1.0 {
        return Err(Error::Geometry(format!("expansion factor {lambda} not > 1")));
    }
    let tau = off.tau();
    let h = ((lambda.ln() + off.y_off) / LN2).floor() as i64;
    if h < 1 {
        return Err(Error::Geometry(format!(
            "tile spans {h} grid levels; the expansion factor must exceed 2 \
             (raise the substitution to a power first)"
        )));
    }
    let va = exp.width(r.lhs);
    let t = (off.u + 0.5 * va * tau).floor() as i64;
    let p_half = 2f64.powi(h as i32 - 1);
    let p_full = 2.0 * p_half;
    let mut anchors = Vec::with_capacity(r.rhs.len());
    let mut s_acc = 0.0;
    for &w in &r.rhs {
        let z = off.u + s_acc * tau / (2.0 * lambda);
        let b = (p_half * z).floor() as i64;
        let s = ((p_full * z).floor() as i64).rem_euclid(2) as u8;
        anchors.push(Anchor { b, s });
        s_acc += exp.width(w);
    }
    Ok(SuperSymbol {
        rule,
        h,
        t,
        anchors,
    })
}

/// Reduces an absolute tile position (left edge `x`, top edge `y`) to grid
/// offsets. Returns the offsets together with the reference level and
/// column that absorb the integer parts.
pub fn offsets_from_point(x: f64, y: f64) -> (OffsetParams, i64, i64) {
    let mut i_star = (-y / LN2).floor() as i64;
    let mut y_off = -(i_star as f64) * LN2 - y;
    // guard against landing exactly on a level line from below
    if y_off >= LN2 {
        i_star += 1;
        y_off -= LN2;
    }
    if y_off < 0.0 {
        y_off = 0.0;
    }
    let col_width = 2.0 * 2f64.powi(-i_star as i32);
    let pos = x / col_width;
    let mut j_star = pos.floor() as i64;
    let mut u = pos - j_star as f64;
    if u >= 1.0 {
        j_star += 1;
        u = 0.0;
    }
    (OffsetParams { u, y_off }, i_star, j_star)
}

/// Symbol of a tile placed at an absolute position.
pub fn symbol_from_point(
    sub: &Substitution,
    exp: &ExpansionData,
    rule: usize,
    x: f64,
    y: f64,
) -> Result<SuperSymbol> {
    let (off, _, _) = offsets_from_point(x, y);
    symbol_from_offsets(sub, exp, rule, &off)
}

/// Union of symbols over an `n x n` grid of offset cell centers, for all
/// rules. Deterministic: the result is a set, independent of sweep order.
pub fn alphabet_at_grid(
    sub: &Substitution,
    exp: &ExpansionData,
    n: usize,
) -> Result<BTreeSet<SuperSymbol>> {
    let n = n.max(1);
    let step_u = 1.0 / n as f64;
    let step_y = LN2 / n as f64;
    let n_rules = sub.rules().len();
    (0..n)
        .into_par_iter()
        .map(|k| {
            let u = (k as f64 + 0.5) * step_u;
            let mut local = BTreeSet::new();
            for m in 0..n {
                let off = OffsetParams {
                    u,
                    y_off: (m as f64 + 0.5) * step_y,
                };
                for rule in 0..n_rules {
                    local.insert(symbol_from_offsets(sub, exp, rule, &off)?);
                }
            }
            Ok(local)
        })
        .try_reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            Ok(a)
        })
}

#[derive(Debug, Clone)]
pub struct AlphabetResult {
    pub symbols: BTreeSet<SuperSymbol>,
    /// Final grid resolution at which the set was confirmed stable.
    pub grid: usize,
    /// Number of doublings performed.
    pub refinements: usize,
}

/// Enumerates the symbol alphabet by sweeping offset grids, doubling the
/// resolution until two successive doublings produce no new symbols.
pub fn enumerate_alphabet(
    sub: &Substitution,
    exp: &ExpansionData,
    cfg: &Config,
) -> Result<AlphabetResult> {
    let mut grid = cfg.effective_grid();
    let mut current = alphabet_at_grid(sub, exp, grid)?;
    let mut stable = 0usize;
    for round in 1..=cfg.max_refinements {
        let next_grid = grid * 2;
        let next = alphabet_at_grid(sub, exp, next_grid)?;
        if next == current {
            stable += 1;
            if stable == 2 {
                return Ok(AlphabetResult {
                    symbols: next,
                    grid: next_grid,
                    refinements: round,
                });
            }
        } else {
            stable = 0;
        }
        current = next;
        grid = next_grid;
    }
    Err(Error::NotStabilized {
        refinements: cfg.max_refinements,
        grid,
    })
}

/// Local admissibility of the symbol triple around a vertex `x`: `sv` is
/// the symbol of `x`'s right neighbor (when inside the patch) and `sw` the
/// symbol of `x`'s child along edge `ell`. The triple is allowed when all
/// of the following hold:
///
/// 1. `sw`'s tile letter is the `ell`-th letter of `su`'s rule body.
/// 2. `su` and `sv` span the same number of grid levels.
/// 3. For a non-final child, the anchor gap to the next child matches the
///    child's column count: `2 (b_{ell+1} - b_ell) + s_{ell+1} - s_ell = t_w`.
/// 4. For the final child the gap closes through the right neighbor's
///    first anchor: `2 (2^(h-1) t_u + b^v_0 - b^u_ell) + s^v_0 - s^u_ell = t_w`.
pub fn triple_allowed(
    sub: &Substitution,
    su: &SuperSymbol,
    sv: Option<&SuperSymbol>,
    sw: &SuperSymbol,
    ell: usize,
) -> bool {
    let ru = sub.rule(su.rule);
    let Some(&expected) = ru.rhs.get(ell) else {
        return false;
    };
    if sub.rule(sw.rule).lhs != expected {
        return false;
    }
    if let Some(sv) = sv {
        if su.h != sv.h {
            return false;
        }
    }
    if su.anchors.len() != ru.rhs.len() {
        return false;
    }
    let last = ru.rhs.len() - 1;
    if ell < last {
        let a0 = su.anchors[ell];
        let a1 = su.anchors[ell + 1];
        2 * (a1.b - a0.b) + (a1.s as i64 - a0.s as i64) == sw.t
    } else {
        let Some(sv) = sv else {
            // no right neighbor in the patch: the closing rule cannot fire
            return true;
        };
        if sv.anchors.is_empty() {
            return false;
        }
        let a0 = su.anchors[last];
        let v0 = sv.anchors[0];
        let p_half = 1i64 << (su.h - 1);
        2 * (p_half * su.t + v0.b - a0.b) + (v0.s as i64 - a0.s as i64) == sw.t
    }
}

/// Symbol coloring of an orbit patch obtained by overlaying its tiling,
/// displaced by `(dx, dy)`, on the reference grid.
#[derive(Debug, Clone)]
pub struct Witness {
    pub dx: f64,
    pub dy: f64,
    /// Symbols keyed by `(row, col)`; rows without a chosen rule (the
    /// bottom row of the patch) carry no symbol.
    pub symbols: BTreeMap<(usize, i64), SuperSymbol>,
}

pub fn build_witness(
    sub: &Substitution,
    exp: &ExpansionData,
    graph: &OrbitGraphPatch,
    tiling: &Tiling,
    dx: f64,
    dy: f64,
) -> Result<Witness> {
    // Raising a tiling by dy in the log-height model rescales widths by
    // exp(dy): a tile's width must stay v(letter) * exp(its top height).
    let c = dy.exp();
    let mut symbols = BTreeMap::new();
    for tile in &tiling.tiles {
        if tile.row >= graph.links.len() {
            continue;
        }
        let link = &graph.links[tile.row];
        let k = tile.col - graph.rows[tile.row].offset;
        let rule = link.choices[k as usize];
        let sym = symbol_from_point(sub, exp, rule, c * tile.x + dx, tile.y + dy)?;
        symbols.insert((tile.row, tile.col), sym);
    }
    Ok(Witness { dx, dy, symbols })
}

/// Verifies that a witness coloring violates no triple rule anywhere the
/// three participating symbols exist.
pub fn check_witness(sub: &Substitution, graph: &OrbitGraphPatch, w: &Witness) -> Result<()> {
    let mut diags = Vec::new();
    for (&(row, col), su) in &w.symbols {
        let v = Vertex { row, col };
        let sv = graph
            .next(v)
            .and_then(|n| w.symbols.get(&(n.row, n.col)));
        for (ell, child) in graph.children(v) {
            let Some(sw) = w.symbols.get(&(child.row, child.col)) else {
                continue;
            };
            if !triple_allowed(sub, su, sv, sw, ell as usize) {
                diags.push(Diagnostic {
                    at: format!("vertex ({row}, {col}), child edge {ell}"),
                    message: "forbidden symbol triple".into(),
                });
            }
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(diags))
    }
}

/// Largest feasibility slack of the linear program describing the offsets
/// that realize `sym`, over the closed offset region. Negative values mean
/// the symbol is unrealizable; `None` means it is structurally malformed
/// (bad rule index, wrong anchor count, empty level interval).
pub fn lp_slack(sub: &Substitution, exp: &ExpansionData, sym: &SuperSymbol) -> Option<f64> {
    let r = sub.rules().get(sym.rule)?;
    if sym.anchors.len() != r.rhs.len() || sym.h < 1 {
        return None;
    }
    let lambda = exp.lambda;
    let p_full = 2f64.powi(sym.h as i32);
    let tau_lo = 0.5f64.max(lambda / (2.0 * p_full));
    let tau_hi = 1.0f64.min(lambda / p_full);
    if tau_hi <= tau_lo {
        return None;
    }
    let va = exp.width(r.lhs);
    // constraint lines u = p + q * tau; lower bounds and upper bounds
    let mut lowers: Vec<(f64, f64)> = vec![(0.0, 0.0), (sym.t as f64, -va / 2.0)];
    let mut uppers: Vec<(f64, f64)> = vec![(1.0, 0.0), (sym.t as f64 + 1.0, -va / 2.0)];
    let mut s_acc = 0.0;
    for (i, &w) in r.rhs.iter().enumerate() {
        let a = sym.anchors[i];
        let m = (2 * a.b + a.s as i64) as f64;
        let q = -s_acc / (2.0 * lambda);
        lowers.push((m / p_full, q));
        uppers.push(((m + 1.0) / p_full, q));
        s_acc += exp.width(w);
    }
    // slack(tau) = min(uppers) - max(lowers) is concave piecewise linear in
    // tau; its maximum sits at an interval end or a crossing of two lines.
    let mut cands = vec![tau_lo, tau_hi];
    let all: Vec<(f64, f64)> = lowers.iter().chain(uppers.iter()).copied().collect();
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            let (p1, q1) = all[i];
            let (p2, q2) = all[j];
            if (q1 - q2).abs() > 1e-15 {
                let tau = (p2 - p1) / (q1 - q2);
                if tau > tau_lo && tau < tau_hi {
                    cands.push(tau);
                }
            }
        }
    }
    let slack = cands
        .iter()
        .map(|&tau| {
            let lo = lowers
                .iter()
                .map(|(p, q)| p + q * tau)
                .fold(f64::NEG_INFINITY, f64::max);
            let hi = uppers
                .iter()
                .map(|(p, q)| p + q * tau)
                .fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Some(slack)
}

/// Exhaustively enumerates candidate symbols within the structural bounds
/// and keeps those with positive feasibility slack. Intended as an
/// independent cross-check for small substitutions; the candidate count is
/// capped.
pub fn enumerate_by_lp(
    sub: &Substitution,
    exp: &ExpansionData,
    cap: usize,
) -> Result<BTreeSet<SuperSymbol>> {
    let lambda = exp.lambda;
    let h0 = (lambda.ln() / LN2).floor() as i64;
    let mut out = BTreeSet::new();
    let mut budget = cap;
    for (ri, r) in sub.rules().iter().enumerate() {
        let va = exp.width(r.lhs);
        let prefix: Vec<f64> = {
            let mut acc = 0.0;
            r.rhs
                .iter()
                .map(|&w| {
                    let s = acc;
                    acc += exp.width(w);
                    s
                })
                .collect()
        };
        for h in [h0, h0 + 1] {
            if h < 1 {
                continue;
            }
            let p_full = 2f64.powi(h as i32);
            let tau_lo = 0.5f64.max(lambda / (2.0 * p_full));
            let tau_hi = 1.0f64.min(lambda / p_full);
            if tau_hi <= tau_lo {
                continue;
            }
            let t_lo = ((0.5 * va * tau_lo).floor() as i64 - 1).max(0);
            let t_hi = (0.5 * va * tau_hi).floor() as i64 + 1;
            for t in t_lo..=t_hi {
                // depth-first sweep over non-decreasing anchor codes m_i
                let m_bounds: Vec<(i64, i64)> = prefix
                    .iter()
                    .map(|&s| {
                        let lo = ((p_full * s * tau_lo / (2.0 * lambda)).floor() as i64 - 1)
                            .max(0);
                        let hi = (p_full * (1.0 + s * tau_hi / (2.0 * lambda))).floor() as i64;
                        (lo, hi)
                    })
                    .collect();
                let mut stack: Vec<i64> = Vec::with_capacity(r.rhs.len());
                let mut cursor: Vec<i64> = vec![m_bounds[0].0];
                loop {
                    let depth = cursor.len() - 1;
                    let m = cursor[depth];
                    let (_, hi) = m_bounds[depth];
                    if m > hi {
                        // exhausted this level: pop
                        cursor.pop();
                        if cursor.is_empty() {
                            break;
                        }
                        stack.pop();
                        let d = cursor.len() - 1;
                        cursor[d] += 1;
                        continue;
                    }
                    budget = budget.checked_sub(1).ok_or(Error::CapExceeded {
                        what: "symbol candidates".into(),
                        cap,
                    })?;
                    if budget == 0 {
                        return Err(Error::CapExceeded {
                            what: "symbol candidates".into(),
                            cap,
                        });
                    }
                    stack.push(m);
                    if stack.len() == r.rhs.len() {
                        let anchors: Vec<Anchor> = stack
                            .iter()
                            .map(|&m| Anchor {
                                b: m.div_euclid(2),
                                s: m.rem_euclid(2) as u8,
                            })
                            .collect();
                        let sym = SuperSymbol {
                            rule: ri,
                            h,
                            t,
                            anchors,
                        };
                        if lp_slack(sub, exp, &sym).map(|s| s > 1e-9).unwrap_or(false) {
                            out.insert(sym);
                        }
                        stack.pop();
                        cursor[depth] += 1;
                    } else {
                        // anchors are non-decreasing: start at max(lo, m)
                        let next_lo = m_bounds[stack.len()].0.max(m);
                        cursor.push(next_lo);
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// JSON interface

#[derive(Debug, Serialize, Deserialize)]
pub struct AlphabetSpec {
    pub grid: usize,
    pub refinements: usize,
    pub symbols: Vec<SuperSymbol>,
}

impl AlphabetSpec {
    pub fn from_result(r: &AlphabetResult) -> Self {
        AlphabetSpec {
            grid: r.grid,
            refinements: r.refinements,
            symbols: r.symbols.iter().cloned().collect(),
        }
    }
}

/// Symbol lookup by `(row, col)` pairs for serialized witnesses.
#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub dx: f64,
    pub dy: f64,
    pub cells: Vec<WitnessCell>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessCell {
    pub row: usize,
    pub col: i64,
    pub symbol: SuperSymbol,
}

impl WitnessSpec {
    pub fn from_witness(w: &Witness) -> Self {
        WitnessSpec {
            dx: w.dx,
            dy: w.dy,
            cells: w
                .symbols
                .iter()
                .map(|(&(row, col), s)| WitnessCell {
                    row,
                    col,
                    symbol: s.clone(),
                })
                .collect(),
        }
    }
}

/// Builds a `(row, col) -> tile` index for witness-related lookups.
pub fn tile_index(tiling: &Tiling) -> HashMap<(usize, i64), usize> {
    tiling
        .tiles
        .iter()
        .enumerate()
        .map(|(k, t)| ((t.row, t.col), k))
        .collect()
}
