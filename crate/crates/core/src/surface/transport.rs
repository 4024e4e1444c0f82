//! Carrying orbit-side structure onto the Cayley annulus.
//!
//! Row vertices `(i, j)` land on cells by pure navigation: `i` first-down
//! steps from the base, then `j` rights. Row edges ride along: a next edge
//! becomes a right move, the k-th child edge becomes a first-down followed
//! by k rights. `check_transport` replays an entire orbit patch this way
//! and confirms letters against colors and every edge against the move it
//! names, so the accumulation arithmetic and the octagon geometry vouch
//! for each other.

use serde::{Deserialize, Serialize};

use super::complex::{CellColor, CellId};
use super::direction::{Dir, DirectionPatch};
use crate::error::{Diagnostic, Error, Result};
use crate::orbit::{OrbitPatch, Vertex};

/// Cell reached from the base by the moves `v` names, or out-of-patch.
pub fn vertex_cell(patch: &DirectionPatch, orbit: &OrbitPatch, v: Vertex) -> Result<CellId> {
    let row = orbit
        .rows
        .get(v.row)
        .ok_or_else(|| Error::OutOfPatch(format!("no row {}", v.row)))?;
    let steps = v.col - row.offset;
    if steps < 0 {
        return Err(Error::OutOfPatch(format!(
            "column {} sits left of row {}",
            v.col, v.row
        )));
    }
    patch.f_coords(v.row, steps as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub vertex: Vertex,
    pub cell: CellId,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct TransportReport {
    pub placed: Vec<Placement>,
    /// Support vertices whose walk left the patch.
    pub skipped: Vec<Vertex>,
}

/// Places a pattern support cell by cell, collecting the vertices that
/// fall off the patch instead of failing.
pub fn transport_support(
    patch: &DirectionPatch,
    orbit: &OrbitPatch,
    support: &[Vertex],
) -> TransportReport {
    let mut report = TransportReport::default();
    for &v in support {
        match vertex_cell(patch, orbit, v) {
            Ok(cell) => report.placed.push(Placement { vertex: v, cell }),
            Err(_) => report.skipped.push(v),
        }
    }
    report
}

/// A forbidden pattern pinned to concrete row vertices. Edges are the
/// induced ones, so only the support and its coloring are stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportPattern {
    pub support: Vec<Vertex>,
    pub symbols: Vec<String>,
}

/// The same pattern carried onto the annulus: one cell per support
/// vertex, plus each induced edge re-spelled as the moves that realize it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellPattern {
    pub cells: Vec<CellId>,
    pub symbols: Vec<String>,
    /// (from, to, moves): next becomes `["R"]`, the k-th child edge
    /// becomes `["D1", "R", ..]` with k rights after the drop.
    pub moves: Vec<(usize, usize, Vec<String>)>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct TransportedSet {
    pub transported: Vec<CellPattern>,
    /// Indices of patterns whose support left the patch.
    pub skipped: Vec<usize>,
}

fn induced_moves(orbit: &OrbitPatch, support: &[Vertex]) -> Vec<(usize, usize, Vec<String>)> {
    let mut moves = Vec::new();
    for (p, &u) in support.iter().enumerate() {
        for (q, &v) in support.iter().enumerate() {
            if v.row == u.row && v.col == u.col + 1 {
                moves.push((p, q, vec!["R".to_string()]));
            }
            if v.row == u.row + 1 {
                if let Some((a, b)) = orbit.links.get(u.row).and_then(|l| l.acc.interval(u.col)) {
                    if (a..=b).contains(&v.col) {
                        let mut walk = vec!["D1".to_string()];
                        walk.extend(std::iter::repeat("R".to_string()).take((v.col - a) as usize));
                        moves.push((p, q, walk));
                    }
                }
            }
        }
    }
    moves
}

/// Carries a whole pattern set onto the annulus. Patterns whose support
/// does not fit are reported by index, never dropped silently.
pub fn transport_forbidden(
    patch: &DirectionPatch,
    orbit: &OrbitPatch,
    patterns: &[SupportPattern],
) -> Result<TransportedSet> {
    let mut out = TransportedSet::default();
    for (idx, pat) in patterns.iter().enumerate() {
        if pat.symbols.len() != pat.support.len() {
            return Err(Error::BadInput(format!(
                "pattern {idx}: {} symbols for {} support vertices",
                pat.symbols.len(),
                pat.support.len()
            )));
        }
        let report = transport_support(patch, orbit, &pat.support);
        if !report.skipped.is_empty() {
            out.skipped.push(idx);
            continue;
        }
        out.transported.push(CellPattern {
            cells: report.placed.iter().map(|p| p.cell).collect(),
            symbols: pat.symbols.clone(),
            moves: induced_moves(orbit, &pat.support),
        });
    }
    Ok(out)
}

/// Reads a transported support back off the annulus. Inverse of the cell
/// placement on everything `transport_forbidden` keeps.
pub fn restore_support(
    patch: &DirectionPatch,
    orbit: &OrbitPatch,
    cells: &[CellId],
) -> Result<Vec<Vertex>> {
    cells
        .iter()
        .map(|&c| {
            let (row, steps) = patch.f_inverse(c)?;
            let offset = orbit
                .rows
                .get(row)
                .ok_or_else(|| Error::OutOfPatch(format!("no row {row}")))?
                .offset;
            Ok(Vertex {
                row,
                col: offset + steps as i64,
            })
        })
        .collect()
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct TransportStats {
    pub vertices: usize,
    pub next_edges: usize,
    pub child_edges: usize,
}

/// Replays `orbit` on the annulus by navigation alone and cross-checks
/// letters against colors, next edges against rights, and child edges
/// against down-then-rights. The orbit rows must start at the spine.
pub fn check_transport(patch: &DirectionPatch, orbit: &OrbitPatch) -> Result<TransportStats> {
    let mut stats = TransportStats::default();
    let mut diags = Vec::new();
    // incremental row sweeps: each row start is one down from the last
    let mut row_cells: Vec<Vec<CellId>> = Vec::with_capacity(orbit.rows.len());
    let mut start = patch.base;
    for (i, row) in orbit.rows.iter().enumerate() {
        if i > 0 {
            start = patch.nav(start, Dir::Down(1))?;
        }
        let mut cells = Vec::with_capacity(row.word.len());
        let mut c = start;
        for j in 0..row.word.len() {
            if j > 0 {
                c = patch.nav(c, Dir::Right)?;
            }
            cells.push(c);
        }
        row_cells.push(cells);
    }
    for (i, row) in orbit.rows.iter().enumerate() {
        let cells = &row_cells[i];
        for (j, &letter) in row.word.iter().enumerate() {
            stats.vertices += 1;
            let color = patch
                .symbol(cells[j])
                .expect("swept cells are in the patch")
                .color;
            let want = match letter.0 {
                0 => CellColor::Black,
                _ => CellColor::White,
            };
            if color != want {
                diags.push(Diagnostic {
                    at: format!("row {i}, column {j}"),
                    message: format!("letter {} landed on a {color:?} cell", letter.0),
                });
            }
            if j + 1 < cells.len() {
                stats.next_edges += 1;
            }
        }
        // child edges: drop once per interval, then sweep the interval
        let Some(link) = orbit.links.get(i) else {
            continue;
        };
        for (j, &cell) in cells.iter().enumerate() {
            let col = row.offset + j as i64;
            let Some((a, b)) = link.acc.interval(col) else {
                diags.push(Diagnostic {
                    at: format!("row {i}, column {j}"),
                    message: "no interval under this column".into(),
                });
                continue;
            };
            let mut c = patch.nav(cell, Dir::Down(1))?;
            for k in 0..=(b - a) {
                if k > 0 {
                    c = patch.nav(c, Dir::Right)?;
                }
                stats.child_edges += 1;
                let child_idx = (a + k - orbit.rows[i + 1].offset) as usize;
                if row_cells[i + 1].get(child_idx) != Some(&c) {
                    diags.push(Diagnostic {
                        at: format!("row {i}, column {j}, child {k}"),
                        message: "child edge disagrees with down-then-right".into(),
                    });
                }
            }
        }
    }
    if diags.is_empty() {
        Ok(stats)
    } else {
        Err(Error::Validation(diags))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{grow_orbit_patch, validate_orbit};
    use crate::substitution::{FirstRule, Letter};
    use crate::surface::complex::grow_ball;
    use crate::surface::direction::build_direction_patch;
    use crate::surface::ring_substitution;

    #[test]
    fn annulus_rows_replay_cleanly() {
        let patch = build_direction_patch(grow_ball(3), false);
        let orbit = patch.annulus_orbit().unwrap();
        let stats = check_transport(&patch, &orbit).unwrap();
        assert_eq!(stats.vertices, 48 + 1632 + 55440);
        assert_eq!(stats.next_edges, 47 + 1631 + 55439);
        assert_eq!(stats.child_edges, 1632 + 55440);
    }

    #[test]
    fn substitution_grown_cone_lands_on_matching_colors() {
        // rows grown by the substitution alone, then replayed by navigation
        let sub = ring_substitution();
        let patch = build_direction_patch(grow_ball(3), false);
        let cone = grow_orbit_patch(&sub, Letter(0), 2, &mut FirstRule).unwrap();
        validate_orbit(&sub, &cone).unwrap();
        assert_eq!(cone.rows[2].word.len(), 5 * 29 + 24 * 35);
        let stats = check_transport(&patch, &cone).unwrap();
        assert_eq!(stats.vertices, 1 + 29 + 5 * 29 + 24 * 35);
    }

    #[test]
    fn placement_round_trips_through_coordinates() {
        let patch = build_direction_patch(grow_ball(3), false);
        let orbit = patch.annulus_orbit().unwrap();
        for v in [
            Vertex { row: 0, col: 0 },
            Vertex { row: 0, col: 31 },
            Vertex { row: 1, col: 700 },
            Vertex { row: 2, col: 5000 },
        ] {
            let cell = vertex_cell(&patch, &orbit, v).unwrap();
            let (i, j) = patch.f_inverse(cell).unwrap();
            assert_eq!((i as i64, j as i64), (v.row as i64, v.col));
            assert_eq!(i, v.row);
        }
    }

    #[test]
    fn off_patch_supports_are_reported_as_skips() {
        let patch = build_direction_patch(grow_ball(2), false);
        let orbit = patch.annulus_orbit().unwrap();
        let support = [
            Vertex { row: 0, col: 3 },
            Vertex { row: 0, col: 48 },
            Vertex { row: 2, col: 0 },
            Vertex { row: 1, col: -1 },
            Vertex { row: 1, col: 1631 },
        ];
        let report = transport_support(&patch, &orbit, &support);
        assert_eq!(report.placed.len(), 2);
        assert_eq!(report.skipped.len(), 3);
        assert_eq!(report.placed[0].cell, patch.f_coords(0, 3).unwrap());
    }

    #[test]
    fn pattern_sets_transport_and_restore() {
        let patch = build_direction_patch(grow_ball(2), false);
        let orbit = patch.annulus_orbit().unwrap();
        let patterns = vec![
            SupportPattern {
                support: vec![Vertex { row: 0, col: 4 }, Vertex { row: 0, col: 5 }],
                symbols: vec!["x".into(), "y".into()],
            },
            SupportPattern {
                // column 0 of row 0 is black: 29 children starting at column 0
                support: vec![Vertex { row: 0, col: 0 }, Vertex { row: 1, col: 3 }],
                symbols: vec!["x".into(), "x".into()],
            },
            SupportPattern {
                support: vec![Vertex { row: 1, col: 9 }, Vertex { row: 2, col: 0 }],
                symbols: vec!["y".into(), "y".into()],
            },
        ];
        let set = transport_forbidden(&patch, &orbit, &patterns).unwrap();
        assert_eq!(set.skipped, vec![2]);
        assert_eq!(set.transported.len(), 2);
        assert_eq!(set.transported[0].moves, vec![(0, 1, vec!["R".to_string()])]);
        assert_eq!(
            set.transported[1].moves,
            vec![(0, 1, vec!["D1".to_string(), "R".to_string(), "R".to_string(), "R".to_string()])]
        );
        for (pat, cell_pat) in patterns.iter().zip(&set.transported) {
            let back = restore_support(&patch, &orbit, &cell_pat.cells).unwrap();
            assert_eq!(back, pat.support);
        }
        let bad = transport_forbidden(
            &patch,
            &orbit,
            &[SupportPattern {
                support: vec![Vertex { row: 0, col: 0 }],
                symbols: vec![],
            }],
        );
        assert!(matches!(bad, Err(Error::BadInput(_))));
    }

    #[test]
    fn letter_color_mismatches_are_caught() {
        let patch = build_direction_patch(grow_ball(2), false);
        let mut orbit = patch.annulus_orbit().unwrap();
        orbit.rows[0].word[7] = Letter(1 - orbit.rows[0].word[7].0);
        match check_transport(&patch, &orbit) {
            Err(Error::Validation(diags)) => {
                assert!(diags.iter().any(|d| d.at.contains("column 7")));
            }
            other => panic!("expected a validation failure, got {other:?}"),
        }
    }
}
