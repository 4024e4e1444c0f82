//! Pasting doubling-grid blocks along an orbit graph, and the power
//! reduction that makes the construction available below expansion 2.
//!
//! A symbol `(rule, h, t, anchors)` describes a block of the doubling grid:
//! `h` rows, the top one `t` cells wide, each row twice the one above. The
//! blocks of neighboring orbit vertices glue along two rules:
//!
//! 1. a `next` edge glues the blocks side by side, one edge per row;
//! 2. a child edge `ell` hangs the child's top row under the parent's
//!    bottom row starting at the anchor `(b, s)`: top cell `j` becomes the
//!    `(s + j) mod 2`-nd child of bottom cell `b + (s + j) / 2`. Cells past
//!    the parent's right edge borrow from the right neighbor's block.
//!
//! For an expansion factor in `(1, 2]` the block picture degenerates, so
//! the substitution is raised to the smallest power with factor above 2;
//! orbit rows are subsampled accordingly and constraints are re-expressed
//! on the original graph through fixed-shape support chains.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::orbit::{OrbitGraphPatch, OrbitPatch, OrbitRow, RowLink, Vertex};
use crate::orbit::AccumulationTable;
use crate::substitution::{Letter, Substitution};
use crate::superposition::{triple_allowed, SuperSymbol};

/// Smallest `n` with `lambda^n > 2`.
pub fn minimal_power(lambda: f64) -> Result<u32> {
    if lambda <= 1.0 {
        return Err(Error::bad_input(format!(
            "expansion factor {lambda} is not greater than 1"
        )));
    }
    let mut acc = lambda;
    let mut n = 1u32;
    while acc <= 2.0 {
        acc *= lambda;
        n += 1;
        if n > 1_000_000 {
            return Err(Error::CapExceeded {
                what: "power search".into(),
                cap: 1_000_000,
            });
        }
    }
    Ok(n)
}

/// Shape of a block: `h` rows, top row `t` wide, row `i` holding `t * 2^i`
/// cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockShape {
    pub h: i64,
    pub t: i64,
}

impl BlockShape {
    pub fn of(sym: &SuperSymbol) -> Result<BlockShape> {
        if sym.h < 1 || sym.h > 32 {
            return Err(Error::bad_input(format!("block height {} out of range", sym.h)));
        }
        if sym.t < 1 {
            return Err(Error::bad_input(format!("block width {} out of range", sym.t)));
        }
        Ok(BlockShape { h: sym.h, t: sym.t })
    }

    pub fn row_len(&self, row: i64) -> i64 {
        self.t << row
    }

    pub fn cell_count(&self) -> i64 {
        self.t * ((1i64 << self.h) - 1)
    }

    pub fn contains(&self, row: i64, col: i64) -> bool {
        (0..self.h).contains(&row) && (0..self.row_len(row)).contains(&col)
    }

    /// Row-major cell index.
    pub fn cell_index(&self, row: i64, col: i64) -> usize {
        (self.t * ((1i64 << row) - 1) + col) as usize
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.h).flat_map(move |r| (0..self.row_len(r)).map(move |c| (r, c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PasteLabel {
    Next,
    Child(u8),
}

/// Cell of a pasted graph: a block cell tagged by its orbit vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PastedCell {
    pub vertex: (usize, i64),
    pub row: i64,
    pub col: i64,
}

#[derive(Debug, Clone)]
pub struct PastedGraph {
    pub cells: Vec<PastedCell>,
    pub edges: Vec<(usize, usize, PasteLabel)>,
    index: HashMap<PastedCell, usize>,
}

impl PastedGraph {
    pub fn cell_id(&self, c: &PastedCell) -> Option<usize> {
        self.index.get(c).copied()
    }
}

/// Glues the blocks of a symbol coloring along the orbit graph's edges.
///
/// With `closed` set, an attachment that cannot find its host cell (the
/// right neighbor is missing, uncolored, or too narrow) is an error naming
/// pasting rule 2; otherwise such boundary attachments are skipped.
pub fn paste_blocks(
    sub: &Substitution,
    graph: &OrbitGraphPatch,
    symbols: &BTreeMap<(usize, i64), SuperSymbol>,
    closed: bool,
) -> Result<PastedGraph> {
    let mut cells = Vec::new();
    let mut index = HashMap::new();
    for (&vx, sym) in symbols {
        let shape = BlockShape::of(sym)?;
        for (r, c) in shape.cells() {
            let cell = PastedCell {
                vertex: vx,
                row: r,
                col: c,
            };
            index.insert(cell, cells.len());
            cells.push(cell);
        }
    }
    let id = |vx: (usize, i64), row: i64, col: i64| -> usize {
        index[&PastedCell {
            vertex: vx,
            row,
            col,
        }]
    };
    let mut edges = Vec::new();
    for (&vx, sym) in symbols {
        let shape = BlockShape::of(sym)?;
        // interior of the block
        for (r, c) in shape.cells() {
            if c + 1 < shape.row_len(r) {
                edges.push((id(vx, r, c), id(vx, r, c + 1), PasteLabel::Next));
            }
            if r + 1 < shape.h {
                edges.push((id(vx, r, c), id(vx, r + 1, 2 * c), PasteLabel::Child(0)));
                edges.push((id(vx, r, c), id(vx, r + 1, 2 * c + 1), PasteLabel::Child(1)));
            }
        }
        let u = Vertex {
            row: vx.0,
            col: vx.1,
        };
        // rule 1: row seams toward the right neighbor
        let next_sym = graph
            .next(u)
            .and_then(|v| symbols.get(&(v.row, v.col)).map(|s| (v, s)));
        if let Some((v, sv)) = next_sym {
            if sv.h != sym.h {
                return Err(Error::Paste(format!(
                    "pasting rule 1: level mismatch {} vs {} between ({}, {}) and ({}, {})",
                    sym.h, sv.h, vx.0, vx.1, v.row, v.col
                )));
            }
            for r in 0..shape.h {
                edges.push((
                    id(vx, r, shape.row_len(r) - 1),
                    id((v.row, v.col), r, 0),
                    PasteLabel::Next,
                ));
            }
        }
        // rule 2: child block attachments
        let rule = sub.rule(sym.rule);
        for (ell, w) in graph.children(u) {
            let Some(sw) = symbols.get(&(w.row, w.col)) else {
                continue;
            };
            let Some(&a) = sym.anchors.get(ell as usize) else {
                return Err(Error::Paste(format!(
                    "pasting rule 2: symbol at ({}, {}) has {} anchors but the rule body \
                     needs index {}",
                    vx.0,
                    vx.1,
                    sym.anchors.len(),
                    ell
                )));
            };
            if rule.rhs.len() != sym.anchors.len() {
                return Err(Error::Paste(format!(
                    "pasting rule 2: anchor count {} does not match rule arity {} at ({}, {})",
                    sym.anchors.len(),
                    rule.rhs.len(),
                    vx.0,
                    vx.1
                )));
            }
            let bottom = shape.row_len(shape.h - 1);
            for j in 0..sw.t {
                let m = a.s as i64 + j;
                let idx = a.b + m / 2;
                let lab = (m % 2) as u8;
                let host = if idx < bottom {
                    Some((vx, idx))
                } else {
                    next_sym.and_then(|(v, sv)| {
                        let idx2 = idx - bottom;
                        let v_shape = BlockShape { h: sv.h, t: sv.t };
                        (idx2 < v_shape.row_len(v_shape.h - 1))
                            .then_some(((v.row, v.col), idx2))
                    })
                };
                match host {
                    Some((hv, hc)) => edges.push((
                        id(hv, shape.h - 1, hc),
                        id((w.row, w.col), 0, j),
                        PasteLabel::Child(lab),
                    )),
                    None if closed => {
                        return Err(Error::Paste(format!(
                            "pasting rule 2: attachment {j} of child ({}, {}) dangles past \
                             the right edge of ({}, {})",
                            w.row, w.col, vx.0, vx.1
                        )));
                    }
                    None => {}
                }
            }
        }
    }
    Ok(PastedGraph {
        cells,
        edges,
        index,
    })
}

// ---------------------------------------------------------------------------
// Lifted alphabet: symbols decorated with letters of a second tiling problem

/// Nearest-neighbor forbidden pairs on the doubling grid: `next` pairs along
/// rows and labeled `child` pairs across rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NNForbidden {
    pub next: BTreeSet<(usize, usize)>,
    pub child: BTreeSet<(usize, u8, usize)>,
}

impl NNForbidden {
    pub fn allows_next(&self, a: usize, b: usize) -> bool {
        !self.next.contains(&(a, b))
    }

    pub fn allows_child(&self, a: usize, lab: u8, b: usize) -> bool {
        !self.child.contains(&(a, lab, b))
    }
}

/// A block symbol together with a letter of the second alphabet on each of
/// its cells, in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecoratedSymbol {
    pub base: SuperSymbol,
    pub cells: Vec<usize>,
}

impl DecoratedSymbol {
    pub fn shape(&self) -> Result<BlockShape> {
        let shape = BlockShape::of(&self.base)?;
        if self.cells.len() != shape.cell_count() as usize {
            return Err(Error::bad_input(format!(
                "decoration has {} cells, block needs {}",
                self.cells.len(),
                shape.cell_count()
            )));
        }
        Ok(shape)
    }

    pub fn cell(&self, shape: &BlockShape, row: i64, col: i64) -> usize {
        self.cells[shape.cell_index(row, col)]
    }
}

/// No forbidden pair inside the block itself.
pub fn decoration_valid(f: &NNForbidden, d: &DecoratedSymbol) -> bool {
    let Ok(shape) = d.shape() else {
        return false;
    };
    for (r, c) in shape.cells() {
        let a = d.cell(&shape, r, c);
        if c + 1 < shape.row_len(r) && !f.allows_next(a, d.cell(&shape, r, c + 1)) {
            return false;
        }
        if r + 1 < shape.h {
            if !f.allows_child(a, 0, d.cell(&shape, r + 1, 2 * c)) {
                return false;
            }
            if !f.allows_child(a, 1, d.cell(&shape, r + 1, 2 * c + 1)) {
                return false;
            }
        }
    }
    true
}

/// Triple admissibility for decorated symbols: the base triple must be
/// allowed, every block must be internally valid, and no forbidden pair may
/// appear on a seam or attachment edge. Attachments whose host falls past
/// an absent right neighbor are left unchecked.
pub fn lifted_triple_allowed(
    sub: &Substitution,
    f: &NNForbidden,
    du: &DecoratedSymbol,
    dv: Option<&DecoratedSymbol>,
    dw: &DecoratedSymbol,
    ell: usize,
) -> bool {
    if !triple_allowed(sub, &du.base, dv.map(|d| &d.base), &dw.base, ell) {
        return false;
    }
    if !decoration_valid(f, du) || !decoration_valid(f, dw) {
        return false;
    }
    if let Some(dv) = dv {
        if !decoration_valid(f, dv) {
            return false;
        }
    }
    let Ok(u_shape) = du.shape() else {
        return false;
    };
    let Ok(w_shape) = dw.shape() else {
        return false;
    };
    // rule 1 seams
    if let Some(dv) = dv {
        let Ok(v_shape) = dv.shape() else {
            return false;
        };
        for r in 0..u_shape.h {
            let a = du.cell(&u_shape, r, u_shape.row_len(r) - 1);
            let b = dv.cell(&v_shape, r, 0);
            if !f.allows_next(a, b) {
                return false;
            }
        }
    }
    // rule 2 attachments
    let Some(&anchor) = du.base.anchors.get(ell) else {
        return false;
    };
    let bottom = u_shape.row_len(u_shape.h - 1);
    for j in 0..w_shape.t {
        let m = anchor.s as i64 + j;
        let idx = anchor.b + m / 2;
        let lab = (m % 2) as u8;
        let host = if idx < bottom {
            Some(du.cell(&u_shape, u_shape.h - 1, idx))
        } else {
            dv.and_then(|dv| {
                let v_shape = dv.shape().ok()?;
                let idx2 = idx - bottom;
                (idx2 < v_shape.row_len(v_shape.h - 1))
                    .then(|| dv.cell(&v_shape, v_shape.h - 1, idx2))
            })
        };
        if let Some(a) = host {
            if !f.allows_child(a, lab, dw.cell(&w_shape, 0, j)) {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Power reduction: subsampled orbits and support-chain constraint scanning

/// Extracts rows `k, k + n, k + 2n, ..` of a patch as a patch of the `n`-th
/// power substitution, composing the parent links in between.
pub fn subsampled_orbit(
    base_patch: &OrbitPatch,
    power: &Substitution,
    n: usize,
    k: usize,
) -> Result<OrbitPatch> {
    if n == 0 {
        return Err(Error::bad_input("subsample step must be positive"));
    }
    if k >= base_patch.rows.len() {
        return Err(Error::bad_input(format!(
            "subsample start {k} beyond the last row"
        )));
    }
    let mut lookup: HashMap<(Letter, &[Letter]), usize> = HashMap::new();
    for (i, r) in power.rules().iter().enumerate() {
        lookup.insert((r.lhs, r.rhs.as_slice()), i);
    }
    let mut rows: Vec<OrbitRow> = vec![base_patch.rows[k].clone()];
    let mut links: Vec<RowLink> = Vec::new();
    let mut top = k;
    while top + n < base_patch.rows.len() {
        let parent = &base_patch.rows[top];
        let child = &base_patch.rows[top + n];
        let (lo, hi) = parent.window();
        let mut choices = Vec::with_capacity(parent.word.len());
        let mut counts = Vec::with_capacity(parent.word.len());
        for j in lo..=hi {
            // interval of n-step descendants of (top, j)
            let (mut a, mut b) = (j, j);
            for step in 0..n {
                let acc = &base_patch.links[top + step].acc;
                a = acc.delta(a).ok_or_else(|| {
                    Error::bad_input("subsample interval escapes the patch")
                })?;
                b = acc.delta(b + 1).ok_or_else(|| {
                    Error::bad_input("subsample interval escapes the patch")
                })? - 1;
            }
            let body: Vec<Letter> = (a..=b)
                .map(|c| child.letter(c).expect("descendant interval in window"))
                .collect();
            let lhs = parent.letter(j).expect("in window");
            let rule = lookup
                .get(&(lhs, body.as_slice()))
                .copied()
                .ok_or_else(|| {
                    Error::bad_input(format!(
                        "composite body at row {top}, position {j} is not a rule of the \
                         power substitution"
                    ))
                })?;
            choices.push(rule);
            counts.push((b - a + 1) as i64);
        }
        links.push(RowLink {
            choices,
            acc: AccumulationTable::new(parent.offset, &counts)?,
        });
        rows.push(child.clone());
        top += n;
    }
    Ok(OrbitPatch { rows, links })
}

/// Checks a coloring of a base orbit graph by power-substitution symbols:
/// every vertex whose `n`-step descendant interval lies inside the patch
/// must satisfy the triple rules against the symbols at that interval, with
/// the right neighbor supplying the closing rule. The support of each
/// constraint is a chain of `n` leftmost child edges followed by `ell`
/// `next` edges.
pub fn check_power_coloring(
    power: &Substitution,
    graph: &OrbitGraphPatch,
    n: usize,
    symbols: &BTreeMap<(usize, i64), SuperSymbol>,
) -> Result<()> {
    if n == 0 {
        return Err(Error::bad_input("subsample step must be positive"));
    }
    let mut diags = Vec::new();
    for (&(row, col), su) in symbols {
        if row + n > graph.links.len() {
            continue;
        }
        let (mut a, mut b) = (col, col);
        let mut inside = true;
        for step in 0..n {
            let acc = &graph.links[row + step].acc;
            match (acc.delta(a), acc.delta(b + 1)) {
                (Some(lo), Some(hi)) => {
                    a = lo;
                    b = hi - 1;
                }
                _ => {
                    inside = false;
                    break;
                }
            }
        }
        if !inside {
            continue;
        }
        let arity = power.rule(su.rule).rhs.len() as i64;
        if arity != b - a + 1 {
            diags.push(Diagnostic {
                at: format!("vertex ({row}, {col})"),
                message: format!(
                    "symbol rule arity {arity} differs from the {}-cell descendant interval",
                    b - a + 1
                ),
            });
            continue;
        }
        let sv = symbols.get(&(row, col + 1));
        for ell in 0..arity {
            let Some(sw) = symbols.get(&(row + n, a + ell)) else {
                continue;
            };
            if !triple_allowed(power, su, sv, sw, ell as usize) {
                diags.push(Diagnostic {
                    at: format!(
                        "support chain from ({row}, {col}): {n} leftmost child edges, \
                         then {ell} step(s) right"
                    ),
                    message: "forbidden power-symbol triple".into(),
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

// ---------------------------------------------------------------------------
// JSON interface

#[derive(Debug, Serialize, Deserialize)]
pub struct NNForbiddenSpec {
    pub letters: Vec<String>,
    #[serde(default)]
    pub next: Vec<(String, String)>,
    #[serde(default)]
    pub child: Vec<(String, u8, String)>,
}

impl NNForbiddenSpec {
    pub fn build(&self) -> Result<(Vec<String>, NNForbidden)> {
        let mut ix = HashMap::new();
        for (i, l) in self.letters.iter().enumerate() {
            if ix.insert(l.as_str(), i).is_some() {
                return Err(Error::bad_input(format!("duplicate letter {l}")));
            }
        }
        let get = |l: &str| -> Result<usize> {
            ix.get(l)
                .copied()
                .ok_or_else(|| Error::bad_input(format!("unknown letter {l}")))
        };
        let mut f = NNForbidden::default();
        for (a, b) in &self.next {
            f.next.insert((get(a)?, get(b)?));
        }
        for (a, lab, b) in &self.child {
            if *lab > 1 {
                return Err(Error::bad_input(format!("child edge label {lab} not 0 or 1")));
            }
            f.child.insert((get(a)?, *lab, get(b)?));
        }
        Ok((self.letters.clone(), f))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PastedGraphSpec {
    pub cells: Vec<PastedCellSpec>,
    pub edges: Vec<PastedEdgeSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PastedCellSpec {
    pub vertex: (usize, i64),
    pub cell: (i64, i64),
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PastedEdgeSpec {
    pub from: usize,
    pub to: usize,
    pub label: PasteLabel,
}

impl PastedGraphSpec {
    pub fn from_graph(g: &PastedGraph) -> Self {
        PastedGraphSpec {
            cells: g
                .cells
                .iter()
                .map(|c| PastedCellSpec {
                    vertex: c.vertex,
                    cell: (c.row, c.col),
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|&(from, to, label)| PastedEdgeSpec { from, to, label })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::geometry::layout_tiling;
    use crate::orbit::{grow_orbit_patch, orbit_graph_of};
    use crate::substitution::{power_substitution, ExpansionData, FirstRule, Substitution};
    use crate::superposition::{build_witness, offsets_from_point, Anchor};

    fn quad() -> (Substitution, ExpansionData) {
        let sub = power_substitution(&Substitution::binary_doubling(), 2, 10_000).unwrap();
        let exp = ExpansionData {
            lambda: 4.0,
            v: vec![5.0],
        };
        (sub, exp)
    }

    #[test]
    fn minimal_power_values() {
        assert_eq!(minimal_power(2.0).unwrap(), 2);
        assert_eq!(minimal_power(4.0).unwrap(), 1);
        assert_eq!(minimal_power(2.618).unwrap(), 1);
        assert_eq!(minimal_power(1.2).unwrap(), 4);
        assert!(minimal_power(0.9).is_err());
    }

    #[test]
    fn block_shape_counts() {
        let s = BlockShape { h: 3, t: 3 };
        assert_eq!(s.cell_count(), 21);
        assert_eq!(
            (0..3).map(|r| s.row_len(r)).collect::<Vec<_>>(),
            vec![3, 6, 12]
        );
        assert_eq!(s.cell_index(0, 0), 0);
        assert_eq!(s.cell_index(1, 0), 3);
        assert_eq!(s.cell_index(2, 11), 20);
    }

    /// Pasting a witness coloring must reproduce doubling-grid adjacency:
    /// with `(i*, j*)` the grid cell holding a tile's top-left corner,
    /// mapping block cell `(i, j)` to grid cell `(i* + i, j* * 2^i + j)`
    /// sends seam edges to `next` pairs and attachments to labeled child
    /// pairs, injectively. Equivalently, `j*` advances by `t` along a row
    /// and a child's `j*` is `2^h * j* + 2b + s` at its anchor.
    fn assert_paste_embeds(dx: f64, dy: f64) {
        let (sub, exp) = quad();
        let patch = grow_orbit_patch(&sub, Letter(0), 3, &mut FirstRule).unwrap();
        let graph = orbit_graph_of(&sub, &patch);
        let tiling = layout_tiling(&exp, &graph).unwrap();
        let w = build_witness(&sub, &exp, &graph, &tiling, dx, dy).unwrap();
        let pasted = paste_blocks(&sub, &graph, &w.symbols, false).unwrap();

        // reference position of each colored vertex
        let c = dy.exp();
        let mut origin: HashMap<(usize, i64), (i64, i64)> = HashMap::new();
        for t in &tiling.tiles {
            if !w.symbols.contains_key(&(t.row, t.col)) {
                continue;
            }
            let (_, i_star, j_star) = offsets_from_point(c * t.x + dx, t.y + dy);
            origin.insert((t.row, t.col), (i_star, j_star));
        }
        let emb = |cell: &PastedCell| -> (i64, i64) {
            let (i_star, a) = origin[&cell.vertex];
            (i_star + cell.row, (a << cell.row) + cell.col)
        };
        // anchors agree with the geometric origins
        for (&vx, sym) in &w.symbols {
            let (iu, au) = origin[&vx];
            let u = Vertex {
                row: vx.0,
                col: vx.1,
            };
            if let Some(v) = graph.next(u) {
                if let Some((iv, av)) = origin.get(&(v.row, v.col)) {
                    assert_eq!(*iv, iu);
                    assert_eq!(*av, au + sym.t);
                }
            }
            for (ell, ch) in graph.children(u) {
                if let Some((iw, aw)) = origin.get(&(ch.row, ch.col)) {
                    let m = 2 * sym.anchors[ell as usize].b
                        + sym.anchors[ell as usize].s as i64;
                    assert_eq!(*iw, iu + sym.h);
                    assert_eq!(*aw, (au << sym.h) + m);
                }
            }
        }
        // edges map to grid adjacency; the embedding is injective
        let mut seen = HashSet::new();
        for cell in &pasted.cells {
            assert!(seen.insert(emb(cell)), "blocks overlap at {:?}", emb(cell));
        }
        for &(f, t, lab) in &pasted.edges {
            let (lf, cf) = emb(&pasted.cells[f]);
            let (lt, ct) = emb(&pasted.cells[t]);
            match lab {
                PasteLabel::Next => {
                    assert_eq!(lt, lf);
                    assert_eq!(ct, cf + 1);
                }
                PasteLabel::Child(b) => {
                    assert_eq!(lt, lf + 1);
                    assert_eq!(ct, 2 * cf + b as i64);
                }
            }
        }
    }

    #[test]
    fn pasted_witness_embeds_in_the_doubling_grid() {
        assert_paste_embeds(0.0, 0.0);
        assert_paste_embeds(0.3, 0.2);
        assert_paste_embeds(1.7, 0.45);
    }

    #[test]
    fn closed_paste_reports_dangling_attachments() {
        let (sub, exp) = quad();
        let patch = grow_orbit_patch(&sub, Letter(0), 2, &mut FirstRule).unwrap();
        let graph = orbit_graph_of(&sub, &patch);
        let tiling = layout_tiling(&exp, &graph).unwrap();
        let w = build_witness(&sub, &exp, &graph, &tiling, 0.0, 0.0).unwrap();
        let err = paste_blocks(&sub, &graph, &w.symbols, true).unwrap_err();
        assert!(err.to_string().contains("rule 2"), "{err}");
    }

    #[test]
    fn seam_level_mismatch_is_rejected() {
        let (sub, exp) = quad();
        let patch = grow_orbit_patch(&sub, Letter(0), 2, &mut FirstRule).unwrap();
        let graph = orbit_graph_of(&sub, &patch);
        let tiling = layout_tiling(&exp, &graph).unwrap();
        let mut w = build_witness(&sub, &exp, &graph, &tiling, 0.0, 0.0).unwrap();
        let s = w.symbols.get_mut(&(1, 1)).unwrap();
        s.h += 1;
        let err = paste_blocks(&sub, &graph, &w.symbols, false).unwrap_err();
        assert!(err.to_string().contains("rule 1"), "{err}");
    }

    #[test]
    fn decorations_catch_internal_and_seam_violations() {
        let (sub, _) = quad();
        let base = SuperSymbol {
            rule: 0,
            h: 2,
            t: 2,
            anchors: vec![
                Anchor { b: 0, s: 0 },
                Anchor { b: 1, s: 0 },
                Anchor { b: 2, s: 1 },
                Anchor { b: 3, s: 1 },
            ],
        };
        let mut f = NNForbidden::default();
        f.next.insert((0, 0));
        // row-major cells: row 0 has 2, row 1 has 4
        let alternating = DecoratedSymbol {
            base: base.clone(),
            cells: vec![0, 1, 0, 1, 0, 1],
        };
        let uniform = DecoratedSymbol {
            base: base.clone(),
            cells: vec![0, 0, 0, 0, 0, 0],
        };
        assert!(decoration_valid(&f, &alternating));
        assert!(!decoration_valid(&f, &uniform));

        // seam check: ends-with-0 against starts-with-0
        let child = DecoratedSymbol {
            base: base.clone(),
            cells: vec![1, 1, 1, 1, 1, 1],
        };
        let starts_zero = DecoratedSymbol {
            base: base.clone(),
            cells: vec![0, 1, 0, 1, 0, 1],
        };
        let ends_zero = DecoratedSymbol {
            base: base.clone(),
            cells: vec![1, 0, 1, 0, 1, 0],
        };
        // rows of ends_zero start with 1, so the seam pairs are (0, 1)
        assert!(lifted_triple_allowed(
            &sub,
            &f,
            &ends_zero,
            Some(&ends_zero),
            &child,
            0
        ));
        // an ends-with-0 next to a starts-with-0 puts (0, 0) on a seam
        assert!(!lifted_triple_allowed(
            &sub,
            &f,
            &ends_zero,
            Some(&starts_zero),
            &child,
            0
        ));
    }

    #[test]
    fn attachment_letters_are_constrained() {
        let (sub, _) = quad();
        let base = SuperSymbol {
            rule: 0,
            h: 2,
            t: 2,
            anchors: vec![
                Anchor { b: 0, s: 0 },
                Anchor { b: 1, s: 0 },
                Anchor { b: 2, s: 1 },
                Anchor { b: 3, s: 1 },
            ],
        };
        let mut f = NNForbidden::default();
        f.child.insert((0, 0, 1));
        let du = DecoratedSymbol {
            base: base.clone(),
            cells: vec![1, 1, 0, 1, 1, 1],
        };
        let dw_bad = DecoratedSymbol {
            base: base.clone(),
            cells: vec![1, 1, 1, 1, 1, 1],
        };
        let dw_ok = DecoratedSymbol {
            base: base.clone(),
            cells: vec![0, 1, 0, 1, 1, 1],
        };
        // child edge 0 anchors at (b=0, s=0): top cell 0 of the child hangs
        // under bottom cell 0 of du with label 0, letters (0, 0, 1) vs rule
        assert!(!lifted_triple_allowed(&sub, &f, &du, None, &dw_bad, 0));
        assert!(lifted_triple_allowed(&sub, &f, &du, None, &dw_ok, 0));
    }

    #[test]
    fn subsampled_binary_orbit_is_a_quad_orbit() {
        let base = Substitution::binary_doubling();
        let (power, _) = quad();
        let patch = grow_orbit_patch(&base, Letter(0), 5, &mut FirstRule).unwrap();
        for k in [0usize, 1] {
            let sampled = subsampled_orbit(&patch, &power, 2, k).unwrap();
            crate::orbit::validate_orbit(&power, &sampled).unwrap();
            let lens: Vec<usize> = sampled.rows.iter().map(|r| r.word.len()).collect();
            let expect: Vec<usize> = (0..sampled.rows.len())
                .map(|i| 1usize << (k + 2 * i))
                .collect();
            assert_eq!(lens, expect);
        }
    }

    #[test]
    fn interleaved_power_witnesses_pass_the_support_scan() {
        let base = Substitution::binary_doubling();
        let (power, exp) = quad();
        let patch = grow_orbit_patch(&base, Letter(0), 5, &mut FirstRule).unwrap();
        let graph = orbit_graph_of(&base, &patch);
        let mut symbols = BTreeMap::new();
        for (k, dy) in [(0usize, 0.1), (1usize, 0.4)] {
            let sampled = subsampled_orbit(&patch, &power, 2, k).unwrap();
            let sgraph = orbit_graph_of(&power, &sampled);
            let tiling = layout_tiling(&exp, &sgraph).unwrap();
            let w = build_witness(&power, &exp, &sgraph, &tiling, 0.05, dy).unwrap();
            for ((row, col), sym) in w.symbols {
                symbols.insert((k + 2 * row, col), sym);
            }
        }
        check_power_coloring(&power, &graph, 2, &symbols).unwrap();

        // corrupt one symbol: the scan must point at a support chain
        let key = *symbols.keys().find(|&&(r, _)| r == 1).unwrap();
        symbols.get_mut(&key).unwrap().t += 1;
        let err = check_power_coloring(&power, &graph, 2, &symbols).unwrap_err();
        assert!(err.to_string().contains("support chain"), "{err}");
    }

    #[test]
    fn forbidden_set_json_round_trip() {
        let spec: NNForbiddenSpec = serde_json::from_str(
            r#"{"letters": ["x", "y"], "next": [["x", "x"]], "child": [["x", 0, "y"]]}"#,
        )
        .unwrap();
        let (letters, f) = spec.build().unwrap();
        assert_eq!(letters, vec!["x", "y"]);
        assert!(!f.allows_next(0, 0));
        assert!(f.allows_next(0, 1));
        assert!(!f.allows_child(0, 0, 1));
        assert!(f.allows_child(0, 1, 1));
    }

    #[test]
    fn pasted_graph_spec_round_trips() {
        let (sub, exp) = quad();
        let patch = grow_orbit_patch(&sub, Letter(0), 2, &mut FirstRule).unwrap();
        let graph = orbit_graph_of(&sub, &patch);
        let tiling = layout_tiling(&exp, &graph).unwrap();
        let w = build_witness(&sub, &exp, &graph, &tiling, 0.0, 0.0).unwrap();
        let pasted = paste_blocks(&sub, &graph, &w.symbols, false).unwrap();
        let spec = PastedGraphSpec::from_graph(&pasted);
        let text = serde_json::to_string(&spec).unwrap();
        let spec2: PastedGraphSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec2.cells.len(), pasted.cells.len());
        assert_eq!(spec2.edges.len(), pasted.edges.len());
    }
}
