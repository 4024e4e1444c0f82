//! The Cayley complex of the surface group, grown octagon by octagon.
//!
//! Cells are group elements. Ring `i` holds the cells at octagon distance
//! `i` from the origin; each ring is a closed cycle in the word metric,
//! and every ring cell is either black (one neighbor a ring up) or white
//! (none). Growing ring `i+1` below ring `i` walks the outside octagons in
//! rotational order: an octagon either hangs below a single ring cell
//! (contributing a black and five whites) or straddles two consecutive
//! ring cells (a black and four whites). Reading the new cells in creation
//! order therefore spells the letterwise image of the old ring under the
//! ring substitution, aligned so that position 0 of every ring is the
//! slot-0 child of position 0 a ring up.
//!
//! Cell identity is positional: cells are created once and referenced by
//! index. Group words are carried only as witness paths for the oracles.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{inv, succ, turn, Gen, GroupWord};
use crate::substitution::Letter;

pub type CellId = usize;

pub const ORIGIN: CellId = 0;
const NO_CELL: CellId = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum CellColor {
    Black,
    White,
    Orange,
}

#[derive(Debug, Clone)]
pub struct CellData {
    pub ring: u32,
    pub color: CellColor,
    /// Neighbor by generator end; `NO_CELL` where not yet materialized.
    ends: [CellId; 8],
    /// Cell one ring up reached by the up edge. Blacks only.
    pub parent: CellId,
    /// Index of this cell among its parent's down children. Blacks only.
    pub slot: u8,
    /// Cell a ring up whose down walk created this cell (equals `parent`
    /// for blacks). Drives lazy materialization and the orbit intervals.
    pub anchor: CellId,
    pub left: CellId,
    pub right: CellId,
    /// Down children in slot order, complete once `children_done`.
    pub children: Vec<CellId>,
    pub children_done: bool,
    /// A witness path from the origin, not necessarily geodesic.
    pub word: GroupWord,
}

impl CellData {
    pub fn end(&self, g: Gen) -> Option<CellId> {
        let c = self.ends[g as usize];
        (c != NO_CELL).then_some(c)
    }

    pub fn parent_opt(&self) -> Option<CellId> {
        (self.parent != NO_CELL).then_some(self.parent)
    }

    pub fn left_opt(&self) -> Option<CellId> {
        (self.left != NO_CELL).then_some(self.left)
    }

    pub fn right_opt(&self) -> Option<CellId> {
        (self.right != NO_CELL).then_some(self.right)
    }

    pub fn letter(&self) -> Letter {
        match self.color {
            CellColor::Black => Letter(0),
            CellColor::White => Letter(1),
            CellColor::Orange => panic!("origin has no ring letter"),
        }
    }
}

pub struct Complex {
    cells: Vec<CellData>,
}

impl Default for Complex {
    fn default() -> Self {
        Self::new()
    }
}

impl Complex {
    pub fn new() -> Self {
        let origin = CellData {
            ring: 0,
            color: CellColor::Orange,
            ends: [NO_CELL; 8],
            parent: NO_CELL,
            slot: 0,
            anchor: NO_CELL,
            left: NO_CELL,
            right: NO_CELL,
            children: Vec::new(),
            children_done: false,
            word: Vec::new(),
        };
        Complex { cells: vec![origin] }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell(&self, id: CellId) -> &CellData {
        &self.cells[id]
    }

    /// Generator labeling the edge from `from` to `to`, if linked.
    pub fn end_toward(&self, from: CellId, to: CellId) -> Option<Gen> {
        (0u8..8).find(|&g| self.cells[from].ends[g as usize] == to)
    }

    fn alloc(&mut self, ring: u32, color: CellColor, anchor: CellId, word: GroupWord) -> CellId {
        let id = self.cells.len();
        self.cells.push(CellData {
            ring,
            color,
            ends: [NO_CELL; 8],
            parent: NO_CELL,
            slot: 0,
            anchor,
            left: NO_CELL,
            right: NO_CELL,
            children: Vec::new(),
            children_done: false,
            word,
        });
        id
    }

    /// Records the edge `u --g--> v` (and its reverse). Idempotent; panics
    /// if it contradicts an existing link.
    fn link(&mut self, u: CellId, g: Gen, v: CellId) {
        let slot = &mut self.cells[u].ends[g as usize];
        assert!(*slot == NO_CELL || *slot == v, "edge relink mismatch");
        *slot = v;
        let back = &mut self.cells[v].ends[inv(g) as usize];
        assert!(*back == NO_CELL || *back == u, "edge backlink mismatch");
        *back = u;
    }

    fn set_ring_pair(&mut self, l: CellId, r: CellId) {
        let lr = &mut self.cells[l].right;
        assert!(*lr == NO_CELL || *lr == r, "ring right mismatch");
        *lr = r;
        let rl = &mut self.cells[r].left;
        assert!(*rl == NO_CELL || *rl == l, "ring left mismatch");
        *rl = l;
    }

    /// Materializes the left ring neighbor. Only a slot-0 black can lack
    /// one; it appears when the aunt cell's down walk runs.
    pub fn ensure_left(&mut self, c: CellId) -> CellId {
        if self.cells[c].left != NO_CELL {
            return self.cells[c].left;
        }
        assert_ne!(c, ORIGIN, "the origin has no ring neighbors");
        let p = self.cells[c].parent;
        assert_ne!(p, NO_CELL, "only slot-0 blacks can lack a left link");
        assert_eq!(self.cells[c].slot, 0);
        let aunt = self.ensure_left(p);
        self.ensure_children(aunt);
        let l = self.cells[c].left;
        assert_ne!(l, NO_CELL, "aunt walk must close the straddling octagon");
        l
    }

    /// Materializes the right ring neighbor via the anchor's down walk.
    pub fn ensure_right(&mut self, c: CellId) -> CellId {
        if self.cells[c].right != NO_CELL {
            return self.cells[c].right;
        }
        assert_ne!(c, ORIGIN, "the origin has no ring neighbors");
        let anchor = self.cells[c].anchor;
        self.ensure_children(anchor);
        let r = self.cells[c].right;
        assert_ne!(r, NO_CELL, "anchor walk must fill interval rights");
        r
    }

    /// Lazily fetches the down child at `slot`.
    pub fn child(&mut self, c: CellId, slot: usize) -> Option<CellId> {
        self.ensure_children(c);
        self.cells[c].children.get(slot).copied()
    }

    /// Walks the outside octagons anchored at `c`, creating all of its
    /// down children, the whites between them, and the slot-0 child of the
    /// right neighbor. Idempotent.
    pub fn ensure_children(&mut self, c: CellId) {
        if self.cells[c].children_done {
            return;
        }
        let is_origin = c == ORIGIN;
        let (g_start, next_end) = if is_origin {
            (0u8, None)
        } else {
            self.ensure_left(c);
            let r = self.ensure_right(c);
            let prev_end = self
                .end_toward(c, self.cells[c].left)
                .expect("left neighbor is linked");
            let ne = self.end_toward(c, r).expect("right neighbor is linked");
            (succ(prev_end), Some(ne))
        };

        let child_ring = self.cells[c].ring + 1;
        let mut g1 = g_start;
        let mut pending = match self.cells[c].end(g1) {
            Some(b) => b,
            None => {
                let mut word = self.cells[c].word.clone();
                word.push(g1);
                let b = self.alloc(child_ring, CellColor::Black, c, word);
                self.cells[b].parent = c;
                self.cells[b].slot = 0;
                self.link(c, g1, b);
                assert!(self.cells[c].children.is_empty());
                self.cells[c].children.push(b);
                b
            }
        };
        let first_black = pending;

        loop {
            let closing = succ(g1);
            let is_case2 = Some(closing) == next_end;
            let wrapped = is_origin && closing == g_start;
            let white_count = if is_case2 { 4 } else { 5 };

            let mut lab = g1;
            let mut cur = pending;
            for _ in 0..white_count {
                lab = turn(lab);
                let mut word = self.cells[cur].word.clone();
                word.push(lab);
                let w = self.alloc(child_ring, CellColor::White, c, word);
                self.link(cur, lab, w);
                self.set_ring_pair(cur, w);
                cur = w;
            }
            let close_lab = turn(lab);
            let up_lab = turn(close_lab);

            let (host, host_end) = if is_case2 {
                let host = self.cells[c].right;
                // the straddling octagon ends with the existing ring edge
                let ring_lab = turn(up_lab);
                assert_eq!(turn(ring_lab), g1, "octagon closes in eight turns");
                assert_eq!(self.cells[host].ends[ring_lab as usize], c);
                (host, inv(up_lab))
            } else {
                assert_eq!(inv(up_lab), closing, "up edge lands on the closing end");
                (c, closing)
            };

            let q = match self.cells[host].end(host_end) {
                Some(q) => {
                    assert_eq!(self.cells[q].parent, host);
                    assert_eq!(self.cells[q].slot, 0, "only slot-0 blacks preexist");
                    self.link(cur, close_lab, q);
                    self.set_ring_pair(cur, q);
                    q
                }
                None => {
                    // anchor the witness at the host, not the walk: chained
                    // words would grow with ring position, not ring index
                    let mut word = self.cells[host].word.clone();
                    word.push(host_end);
                    let q = self.alloc(child_ring, CellColor::Black, host, word);
                    self.cells[q].parent = host;
                    let slot = self.cells[host].children.len();
                    if is_case2 {
                        assert_eq!(slot, 0, "straddling octagon creates a slot-0 child");
                    }
                    self.cells[q].slot = slot as u8;
                    self.cells[host].children.push(q);
                    self.link(cur, close_lab, q);
                    self.set_ring_pair(cur, q);
                    self.link(host, host_end, q);
                    q
                }
            };

            if wrapped {
                assert_eq!(q, first_black, "origin fan closes on its first child");
                break;
            }
            if is_case2 {
                break;
            }
            g1 = closing;
            pending = q;
        }
        self.cells[c].children_done = true;
    }
}

/// An eagerly grown ball: the origin plus `radius` full rings, with every
/// ring stored in cyclic order starting at the spine (the chain of slot-0
/// children below the origin's first child).
pub struct CayleyBallPatch {
    pub complex: Complex,
    pub rings: Vec<Vec<CellId>>,
    pos: HashMap<CellId, (usize, usize)>,
}

pub fn grow_ball(radius: usize) -> CayleyBallPatch {
    let mut complex = Complex::new();
    let mut rings: Vec<Vec<CellId>> = vec![vec![ORIGIN]];
    for i in 0..radius {
        let ring = rings[i].clone();
        for &c in &ring {
            complex.ensure_children(c);
        }
        let start = complex.cell(ring[0]).children[0];
        let mut next = vec![start];
        let mut cur = complex.cell(start).right;
        while cur != start {
            assert_ne!(cur, NO_CELL, "grown ring is a closed cycle");
            next.push(cur);
            cur = complex.cell(cur).right;
        }
        rings.push(next);
    }
    let mut pos = HashMap::new();
    for (i, ring) in rings.iter().enumerate() {
        for (j, &c) in ring.iter().enumerate() {
            pos.insert(c, (i, j));
        }
    }
    CayleyBallPatch { complex, rings, pos }
}

impl CayleyBallPatch {
    pub fn radius(&self) -> usize {
        self.rings.len() - 1
    }

    /// `(ring, position)` of a cell that lies on a stored ring.
    pub fn position(&self, c: CellId) -> Option<(usize, usize)> {
        self.pos.get(&c).copied()
    }

    /// Ring letters in cyclic order (black = `a` = 0, white = `b` = 1).
    pub fn type_word(&self, ring: usize) -> Vec<Letter> {
        assert!(ring >= 1, "ring letters start at ring 1");
        self.rings[ring]
            .iter()
            .map(|&c| self.complex.cell(c).letter())
            .collect()
    }

    pub fn black_count(&self, ring: usize) -> usize {
        self.rings[ring]
            .iter()
            .filter(|&&c| self.complex.cell(c).color == CellColor::Black)
            .count()
    }

    pub fn cell_count(&self) -> usize {
        self.rings.iter().map(Vec::len).sum()
    }

    /// DOT rendering with ring and color annotations. Edges are emitted
    /// once, from the endpoint where the generator index is even.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("digraph ball {\n  rankdir=TB;\n");
        for (i, ring) in self.rings.iter().enumerate() {
            for (j, &c) in ring.iter().enumerate() {
                let cell = self.complex.cell(c);
                let (fill, shape) = match cell.color {
                    CellColor::Black => ("gray25", "box"),
                    CellColor::White => ("white", "box"),
                    CellColor::Orange => ("orange", "doublecircle"),
                };
                let _ = writeln!(
                    out,
                    "  n{c} [label=\"{i}.{j}\", shape={shape}, style=filled, fillcolor={fill}];"
                );
            }
        }
        for ring in &self.rings {
            for &c in ring {
                for g in (0u8..8).step_by(2) {
                    if let Some(v) = self.complex.cell(c).end(g) {
                        if self.pos.contains_key(&v) {
                            let _ = writeln!(
                                out,
                                "  n{c} -> n{v} [label=\"{}\"];",
                                super::GEN_NAMES[g as usize]
                            );
                        }
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
