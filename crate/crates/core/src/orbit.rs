//! Orbit rows of a substitution and the labeled graph they span.
//!
//! A patch is a stack of rows; consecutive rows are linked by the rule
//! chosen at every position. The accumulation table of a row of child
//! counts `u` anchors index arithmetic: `delta(0) = 0`,
//! `delta(i) = u_0 + .. + u_{i-1}` going right and
//! `delta(i) = -(u_i + .. + u_{-1})` going left, so position `j` owns the
//! child interval `[delta(j), delta(j+1) - 1]` and those intervals
//! partition the child row.

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::substitution::{Letter, RuleChooser, Substitution};

/// Accumulated child counts over a contiguous index window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccumulationTable {
    j_lo: i64,
    /// `delta[k] = Delta(j_lo + k)`; one entry more than there are counts.
    delta: Vec<i64>,
}

impl AccumulationTable {
    /// Builds the table for counts `u_{j_lo}, u_{j_lo+1}, ..`. The window
    /// must cover the anchor index 0 so the three-branch definition applies.
    pub fn new(j_lo: i64, counts: &[i64]) -> Result<AccumulationTable> {
        let j_hi = j_lo + counts.len() as i64;
        if j_lo > 0 || j_hi < 0 {
            return Err(Error::bad_input(format!(
                "accumulation window [{j_lo}, {}] does not cover the anchor 0",
                j_hi - 1
            )));
        }
        if let Some(k) = counts.iter().position(|&u| u < 0) {
            return Err(Error::bad_input(format!(
                "negative child count at index {}",
                j_lo + k as i64
            )));
        }
        // Delta at the left end, then prefix sums rightwards.
        let head: i64 = counts[..(-j_lo) as usize].iter().sum();
        let mut delta = Vec::with_capacity(counts.len() + 1);
        let mut acc = -head;
        delta.push(acc);
        for &u in counts {
            acc += u;
            delta.push(acc);
        }
        Ok(AccumulationTable { j_lo, delta })
    }

    pub fn window(&self) -> (i64, i64) {
        (self.j_lo, self.j_lo + self.delta.len() as i64 - 2)
    }

    pub fn delta(&self, j: i64) -> Option<i64> {
        let k = j.checked_sub(self.j_lo)?;
        if k < 0 {
            return None;
        }
        self.delta.get(k as usize).copied()
    }

    /// Child interval `[Delta(j), Delta(j+1) - 1]` of position `j`.
    pub fn interval(&self, j: i64) -> Option<(i64, i64)> {
        Some((self.delta(j)?, self.delta(j + 1)? - 1))
    }

    /// Parent of child index `k`, by scanning the owning interval.
    pub fn parent_of(&self, k: i64) -> Option<i64> {
        let (lo, hi) = self.window();
        for j in lo..=hi {
            let (a, b) = self.interval(j)?;
            if (a..=b).contains(&k) {
                return Some(j);
            }
        }
        None
    }
}

/// One row of an orbit patch. `offset` is the index of `word[0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRow {
    pub offset: i64,
    pub word: Vec<Letter>,
}

impl OrbitRow {
    pub fn letter(&self, j: i64) -> Option<Letter> {
        let k = j.checked_sub(self.offset)?;
        if k < 0 {
            return None;
        }
        self.word.get(k as usize).copied()
    }

    pub fn window(&self) -> (i64, i64) {
        (self.offset, self.offset + self.word.len() as i64 - 1)
    }
}

/// Link between consecutive rows: the rule chosen at every position plus
/// the accumulation table of the resulting child counts.
#[derive(Debug, Clone)]
pub struct RowLink {
    /// Rule index (into the substitution's rule list) per position, aligned
    /// with the parent row's word.
    pub choices: Vec<usize>,
    pub acc: AccumulationTable,
}

#[derive(Debug, Clone)]
pub struct OrbitPatch {
    pub rows: Vec<OrbitRow>,
    pub links: Vec<RowLink>,
}

impl OrbitPatch {
    pub fn depth(&self) -> usize {
        self.links.len()
    }

    /// Chosen rule index at `(i, j)`; rows below the last link have none.
    pub fn choice_at(&self, i: usize, j: i64) -> Option<usize> {
        let link = self.links.get(i)?;
        let k = j.checked_sub(self.rows[i].offset)?;
        link.choices.get(k as usize).copied()
    }
}

/// Grows `depth` rows from a seed word placed at offset 0.
pub fn grow_orbit_patch_from_word(
    sub: &Substitution,
    seed: &[Letter],
    depth: usize,
    chooser: &mut dyn RuleChooser,
) -> Result<OrbitPatch> {
    if seed.is_empty() {
        return Err(Error::bad_input("empty seed word"));
    }
    let mut rows = vec![OrbitRow {
        offset: 0,
        word: seed.to_vec(),
    }];
    let mut links = Vec::new();
    for i in 0..depth {
        let parent = rows[i].clone();
        let mut choices = Vec::with_capacity(parent.word.len());
        let mut counts = Vec::with_capacity(parent.word.len());
        let mut child = Vec::new();
        for (k, &l) in parent.word.iter().enumerate() {
            let options = sub.rules_for(l);
            let c = chooser.choose(i, parent.offset + k as i64, l, options.len());
            let rule = sub.rule(options[c]);
            choices.push(options[c]);
            counts.push(rule.rhs.len() as i64);
            child.extend_from_slice(&rule.rhs);
        }
        // Child row offset: the leftmost child of the row origin sits at 0,
        // so the row starts at Delta(parent offset).
        let acc = AccumulationTable::new(parent.offset, &counts)?;
        let child_offset = acc.delta(parent.offset).expect("window start");
        rows.push(OrbitRow {
            offset: child_offset,
            word: child,
        });
        links.push(RowLink { choices, acc });
    }
    Ok(OrbitPatch { rows, links })
}

/// Grows a patch from a single seed letter at `(0, 0)`.
pub fn grow_orbit_patch(
    sub: &Substitution,
    seed: Letter,
    depth: usize,
    chooser: &mut dyn RuleChooser,
) -> Result<OrbitPatch> {
    grow_orbit_patch_from_word(sub, &[seed], depth, chooser)
}

/// Re-checks a patch against its substitution: counts match the chosen
/// rules, child subwords equal the rhs, windows line up.
pub fn validate_orbit(sub: &Substitution, patch: &OrbitPatch) -> Result<()> {
    let mut diags = Vec::new();
    if patch.rows.len() != patch.links.len() + 1 {
        diags.push(Diagnostic {
            at: "patch".into(),
            message: format!(
                "{} rows with {} links",
                patch.rows.len(),
                patch.links.len()
            ),
        });
    }
    for (i, link) in patch.links.iter().enumerate() {
        let parent = &patch.rows[i];
        let child = &patch.rows[i + 1];
        if link.choices.len() != parent.word.len() {
            diags.push(Diagnostic {
                at: format!("row {i}"),
                message: "choice count differs from row length".into(),
            });
            continue;
        }
        let (w_lo, w_hi) = link.acc.window();
        if (w_lo, w_hi) != parent.window() {
            diags.push(Diagnostic {
                at: format!("row {i}"),
                message: "accumulation window differs from row window".into(),
            });
            continue;
        }
        match (link.acc.delta(w_lo), link.acc.delta(w_hi + 1)) {
            (Some(lo), Some(hi)) => {
                if (lo, hi - 1) != child.window() {
                    diags.push(Diagnostic {
                        at: format!("row {}", i + 1),
                        message: "child window does not match accumulated counts".into(),
                    });
                    continue;
                }
            }
            _ => continue,
        }
        for (k, &c) in link.choices.iter().enumerate() {
            let j = parent.offset + k as i64;
            let rule = sub.rule(c);
            if Some(rule.lhs) != parent.letter(j) {
                diags.push(Diagnostic {
                    at: format!("row {i}, position {j}"),
                    message: "chosen rule does not produce from the row letter".into(),
                });
                continue;
            }
            let (a, b) = link.acc.interval(j).expect("in window");
            if (b - a + 1) as usize != rule.rhs.len() {
                diags.push(Diagnostic {
                    at: format!("row {i}, position {j}"),
                    message: "child interval length differs from rhs".into(),
                });
                continue;
            }
            for (t, &want) in rule.rhs.iter().enumerate() {
                if child.letter(a + t as i64) != Some(want) {
                    diags.push(Diagnostic {
                        at: format!("row {}, position {}", i + 1, a + t as i64),
                        message: format!(
                            "expected {} from the rule applied at row {i}, position {j}",
                            sub.name(want)
                        ),
                    });
                }
            }
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(diags))
    }
}

/// Vertex of an orbit graph patch: row index and absolute column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub row: usize,
    pub col: i64,
}

/// Edge label: right neighbor within a row, or the `k`-th child.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeLabel {
    Next,
    Child(i64),
}

/// Graph view of a patch: `next` edges along rows, child edges labeled by
/// the offset into the parent's child interval. `max_arity` is the largest
/// rhs length of the substitution so label ranges are bounded uniformly.
#[derive(Debug, Clone)]
pub struct OrbitGraphPatch {
    pub rows: Vec<OrbitRow>,
    pub links: Vec<RowLink>,
    pub max_arity: i64,
}

pub fn orbit_graph_of(sub: &Substitution, patch: &OrbitPatch) -> OrbitGraphPatch {
    let max_arity = sub
        .rules()
        .iter()
        .map(|r| r.rhs.len() as i64)
        .max()
        .unwrap_or(0);
    OrbitGraphPatch {
        rows: patch.rows.clone(),
        links: patch.links.clone(),
        max_arity,
    }
}

impl OrbitGraphPatch {
    pub fn contains(&self, v: Vertex) -> bool {
        self.rows
            .get(v.row)
            .map(|r| r.letter(v.col).is_some())
            .unwrap_or(false)
    }

    pub fn letter(&self, v: Vertex) -> Option<Letter> {
        self.rows.get(v.row)?.letter(v.col)
    }

    pub fn next(&self, v: Vertex) -> Option<Vertex> {
        let w = Vertex {
            row: v.row,
            col: v.col + 1,
        };
        self.contains(w).then_some(w)
    }

    pub fn prev(&self, v: Vertex) -> Option<Vertex> {
        let w = Vertex {
            row: v.row,
            col: v.col - 1,
        };
        self.contains(w).then_some(w)
    }

    /// Child vertex under `v` with edge label `k`, when present.
    pub fn child(&self, v: Vertex, k: i64) -> Option<Vertex> {
        let link = self.links.get(v.row)?;
        let (a, b) = link.acc.interval(v.col)?;
        if k < 0 || a + k > b {
            return None;
        }
        let w = Vertex {
            row: v.row + 1,
            col: a + k,
        };
        self.contains(w).then_some(w)
    }

    /// All child edges from `v` in label order.
    pub fn children(&self, v: Vertex) -> Vec<(i64, Vertex)> {
        let Some(link) = self.links.get(v.row) else {
            return Vec::new();
        };
        let Some((a, b)) = link.acc.interval(v.col) else {
            return Vec::new();
        };
        (a..=b)
            .map(|c| {
                (
                    c - a,
                    Vertex {
                        row: v.row + 1,
                        col: c,
                    },
                )
            })
            .collect()
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        if v.row == 0 {
            return None;
        }
        let link = &self.links[v.row - 1];
        let col = link.acc.parent_of(v.col)?;
        Some(Vertex {
            row: v.row - 1,
            col,
        })
    }

    /// Interior vertices have both row neighbors, a parent, and a full set
    /// of children inside the patch. Everything else is boundary and is
    /// excluded as a pattern root by scanners.
    pub fn is_interior(&self, v: Vertex) -> bool {
        self.contains(v)
            && v.row > 0
            && v.row < self.links.len()
            && self.prev(v).is_some()
            && self.next(v).is_some()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| {
            let (lo, hi) = r.window();
            (lo..=hi).map(move |c| Vertex { row: i, col: c })
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.rows.iter().map(|r| r.word.len()).sum()
    }

    pub fn to_dot(&self, sub: &Substitution) -> String {
        let mut s = String::from("digraph orbit {\n  rankdir=TB;\n");
        for v in self.vertices() {
            let l = self.letter(v).unwrap();
            s.push_str(&format!(
                "  \"{},{}\" [label=\"{},{} {}\"];\n",
                v.row,
                v.col,
                v.row,
                v.col,
                sub.name(l)
            ));
        }
        for v in self.vertices() {
            if let Some(w) = self.next(v) {
                s.push_str(&format!(
                    "  \"{},{}\" -> \"{},{}\" [label=\"next\"];\n",
                    v.row, v.col, w.row, w.col
                ));
            }
            for (k, w) in self.children(v) {
                s.push_str(&format!(
                    "  \"{},{}\" -> \"{},{}\" [label=\"{}\"];\n",
                    v.row, v.col, w.row, w.col, k
                ));
            }
        }
        s.push_str("}\n");
        s
    }
}

// ---------------------------------------------------------------------------
// JSON interface

#[derive(Debug, Serialize, Deserialize)]
pub struct OrbitPatchSpec {
    pub rows: Vec<OrbitRowSpec>,
    pub parents: Vec<ParentRowSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OrbitRowSpec {
    pub i: usize,
    pub offset: i64,
    pub word: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ParentRowSpec {
    pub row: usize,
    pub choices: Vec<usize>,
}

impl OrbitPatchSpec {
    pub fn from_patch(sub: &Substitution, patch: &OrbitPatch) -> Self {
        OrbitPatchSpec {
            rows: patch
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| OrbitRowSpec {
                    i,
                    offset: r.offset,
                    word: sub.word_to_string(&r.word),
                })
                .collect(),
            parents: patch
                .links
                .iter()
                .enumerate()
                .map(|(i, l)| ParentRowSpec {
                    row: i,
                    choices: l.choices.clone(),
                })
                .collect(),
        }
    }

    pub fn build(&self, sub: &Substitution) -> Result<OrbitPatch> {
        let mut rows = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            if r.i != i {
                return Err(Error::bad_input(format!("row index {} out of order", r.i)));
            }
            rows.push(OrbitRow {
                offset: r.offset,
                word: sub.parse_word(&r.word)?,
            });
        }
        let mut links = Vec::new();
        for (i, p) in self.parents.iter().enumerate() {
            if p.row != i {
                return Err(Error::bad_input(format!(
                    "parent row index {} out of order",
                    p.row
                )));
            }
            let row = rows
                .get(i)
                .ok_or_else(|| Error::bad_input("parent row without a word row"))?;
            let counts: Vec<i64> = p
                .choices
                .iter()
                .map(|&c| {
                    sub.rules()
                        .get(c)
                        .map(|r| r.rhs.len() as i64)
                        .ok_or_else(|| Error::bad_input(format!("rule index {c} out of range")))
                })
                .collect::<Result<_>>()?;
            links.push(RowLink {
                choices: p.choices.clone(),
                acc: AccumulationTable::new(row.offset, &counts)?,
            });
        }
        let patch = OrbitPatch { rows, links };
        validate_orbit(sub, &patch)?;
        Ok(patch)
    }
}
