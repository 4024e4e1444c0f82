//! Direction labels over the Cayley complex.
//!
//! A symbol colors a cell and names each of its eight edges: left and
//! right along the ring, up toward the parent (blacks only), and indexed
//! down edges. The origin takes the one orange symbol, whose eight downs
//! follow the generator order `a, a', b, b', c, c', d, d'`. Two families
//! of local constraints make the labeling tight: every octagon must match
//! one of sixteen oriented templates, and along every edge the two ends
//! must name each other coherently (left/right and up/down pair up).
//!
//! On orange-free patches the labels induce row coordinates: `f(i, j)`
//! walks `i` first-down edges from the base cell and then `j` rights. The
//! annulus patch (the rooted ball minus its origin, cut along the spine)
//! realizes the rows of the ring substitution, which is what the pattern
//! transport in this crate's orbit picture relies on.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::complex::{CayleyBallPatch, CellColor, CellId, Complex, ORIGIN};
use super::dehn::is_trivial;
use super::{inv, succ, turn, Gen, GroupWord};
use crate::error::{Diagnostic, Error, Result};
use crate::orbit::{AccumulationTable, OrbitPatch, OrbitRow, RowLink};

/// An edge tag as seen from one cell. `Down` indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    Left,
    Right,
    Up,
    Down(u8),
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dir::Left => write!(f, "L"),
            Dir::Right => write!(f, "R"),
            Dir::Up => write!(f, "U"),
            Dir::Down(i) => write!(f, "D{i}"),
        }
    }
}

impl std::str::FromStr for Dir {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(Dir::Left),
            "R" => Ok(Dir::Right),
            "U" => Ok(Dir::Up),
            _ => match s.strip_prefix('D').and_then(|n| n.parse::<u8>().ok()) {
                Some(i) if (1..=8).contains(&i) => Ok(Dir::Down(i)),
                _ => Err(Error::bad_input(format!("unknown direction tag {s:?}"))),
            },
        }
    }
}

/// A cell color plus a direction tag for each generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionSymbol {
    pub color: CellColor,
    dirs: [Dir; 8],
}

impl DirectionSymbol {
    /// Validates the tag multiset: blacks carry left, right, up and downs
    /// 1..=5; whites left, right and downs 1..=6; orange downs 1..=8.
    pub fn new(color: CellColor, dirs: [Dir; 8]) -> Result<Self> {
        let mut expected: Vec<Dir> = match color {
            CellColor::Black => {
                let mut v = vec![Dir::Left, Dir::Right, Dir::Up];
                v.extend((1..=5).map(Dir::Down));
                v
            }
            CellColor::White => {
                let mut v = vec![Dir::Left, Dir::Right];
                v.extend((1..=6).map(Dir::Down));
                v
            }
            CellColor::Orange => (1..=8).map(Dir::Down).collect(),
        };
        let mut got = dirs.to_vec();
        let key = |d: &Dir| match *d {
            Dir::Left => 0u8,
            Dir::Right => 1,
            Dir::Up => 2,
            Dir::Down(i) => 2 + i,
        };
        expected.sort_by_key(key);
        got.sort_by_key(key);
        if expected != got {
            return Err(Error::bad_input(format!(
                "direction tags {dirs:?} do not fit a {color:?} cell"
            )));
        }
        Ok(DirectionSymbol { color, dirs })
    }

    /// The unique symbol of the origin.
    pub fn orange() -> Self {
        let mut dirs = [Dir::Down(1); 8];
        for (g, d) in dirs.iter_mut().enumerate() {
            *d = Dir::Down(g as u8 + 1);
        }
        DirectionSymbol {
            color: CellColor::Orange,
            dirs,
        }
    }

    pub fn dir(&self, g: Gen) -> Dir {
        self.dirs[g as usize]
    }

    /// Generator carrying the given tag, if present on this color.
    pub fn gen_for(&self, d: Dir) -> Option<Gen> {
        (0u8..8).find(|&g| self.dirs[g as usize] == d)
    }

    pub fn down_count(&self) -> u8 {
        match self.color {
            CellColor::Black => 5,
            CellColor::White => 6,
            CellColor::Orange => 8,
        }
    }
}

/// Builds the symbol of a ring cell from its star: downs are the ends
/// strictly between the left end and the right end in rotation order.
fn derived_symbol(
    color: CellColor,
    prev_end: Gen,
    next_end: Gen,
    up_end: Option<Gen>,
) -> DirectionSymbol {
    let mut dirs = [Dir::Left; 8];
    dirs[prev_end as usize] = Dir::Left;
    dirs[next_end as usize] = Dir::Right;
    if let Some(u) = up_end {
        dirs[u as usize] = Dir::Up;
    }
    let mut e = succ(prev_end);
    let mut k = 1u8;
    while e != next_end {
        assert!(Some(e) != up_end, "up edge sits outside the down arc");
        dirs[e as usize] = Dir::Down(k);
        k += 1;
        e = succ(e);
    }
    let expected = match color {
        CellColor::Black => 6,
        CellColor::White => 7,
        CellColor::Orange => unreachable!("origin symbols are fixed"),
    };
    assert_eq!(k, expected, "down arity must match the color");
    DirectionSymbol::new(color, dirs).expect("derived stars are well-formed")
}

/// Symbol of any cell, materializing ring neighbors as needed.
pub fn lazy_symbol(cx: &mut Complex, c: CellId) -> DirectionSymbol {
    if c == ORIGIN {
        return DirectionSymbol::orange();
    }
    let l = cx.ensure_left(c);
    let r = cx.ensure_right(c);
    let prev_end = cx.end_toward(c, l).expect("left is linked");
    let next_end = cx.end_toward(c, r).expect("right is linked");
    let up_end = cx
        .cell(c)
        .parent_opt()
        .map(|p| cx.end_toward(c, p).expect("parent is linked"));
    derived_symbol(cx.cell(c).color, prev_end, next_end, up_end)
}

/// A ball with its direction labeling. `rooted` keeps the orange origin;
/// otherwise the patch is the annulus of rings `1..=radius`, cut along the
/// spine: the ring-closing edges are severed so rows read as lines.
pub struct DirectionPatch {
    pub ball: CayleyBallPatch,
    symbols: Vec<Option<DirectionSymbol>>,
    severed: HashSet<(CellId, CellId)>,
    pub base: CellId,
    pub rooted: bool,
}

pub fn build_direction_patch(ball: CayleyBallPatch, rooted: bool) -> DirectionPatch {
    let mut symbols: Vec<Option<DirectionSymbol>> = vec![None; ball.complex.len()];
    if rooted {
        symbols[ORIGIN] = Some(DirectionSymbol::orange());
    }
    for ring in 1..ball.rings.len() {
        let cells = &ball.rings[ring];
        let m = cells.len();
        for (j, &c) in cells.iter().enumerate() {
            let cell = ball.complex.cell(c);
            let prev = cells[(j + m - 1) % m];
            let next = cells[(j + 1) % m];
            let prev_end = ball.complex.end_toward(c, prev).expect("ring is linked");
            let next_end = ball.complex.end_toward(c, next).expect("ring is linked");
            let up_end = cell
                .parent_opt()
                .map(|p| ball.complex.end_toward(c, p).expect("parent is linked"));
            symbols[c] = Some(derived_symbol(cell.color, prev_end, next_end, up_end));
        }
    }
    let mut severed = HashSet::new();
    let base = if rooted {
        ORIGIN
    } else {
        for ring in 1..ball.rings.len() {
            let cells = &ball.rings[ring];
            let last = *cells.last().expect("rings are nonempty");
            severed.insert((last, cells[0]));
            severed.insert((cells[0], last));
        }
        ball.rings[1][0]
    };
    DirectionPatch {
        ball,
        symbols,
        severed,
        base,
        rooted,
    }
}

impl DirectionPatch {
    pub fn contains(&self, c: CellId) -> bool {
        self.symbols.get(c).is_some_and(Option::is_some)
    }

    pub fn symbol(&self, c: CellId) -> Option<&DirectionSymbol> {
        self.symbols.get(c)?.as_ref()
    }

    pub fn cells(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.symbols.len()).filter(|&c| self.symbols[c].is_some())
    }

    fn edge_in_patch(&self, u: CellId, v: CellId) -> bool {
        self.contains(u) && self.contains(v) && !self.severed.contains(&(u, v))
    }

    /// One step in the named direction; boundary exits and severed seam
    /// edges both surface as out-of-patch.
    pub fn nav(&self, c: CellId, m: Dir) -> Result<CellId> {
        let sym = self
            .symbol(c)
            .ok_or_else(|| Error::OutOfPatch(format!("cell {c} is outside the patch")))?;
        let g = sym.gen_for(m).ok_or_else(|| {
            Error::bad_input(format!("{:?} cells have no {m} direction", sym.color))
        })?;
        match self.ball.complex.cell(c).end(g) {
            Some(v) if self.edge_in_patch(c, v) => Ok(v),
            _ => Err(Error::OutOfPatch(format!(
                "no {m} neighbor inside the patch at cell {c}"
            ))),
        }
    }

    /// Row coordinates: `i` first-down steps from the base, then `j`
    /// rights. Defined on the annulus patch.
    pub fn f_coords(&self, i: usize, j: usize) -> Result<CellId> {
        if self.rooted {
            return Err(Error::bad_input(
                "row coordinates need the orange-free annulus patch",
            ));
        }
        let mut c = self.base;
        for _ in 0..i {
            c = self.nav(c, Dir::Down(1))?;
        }
        for _ in 0..j {
            c = self.nav(c, Dir::Right)?;
        }
        Ok(c)
    }

    /// Inverse of `f_coords` on its image.
    pub fn f_inverse(&self, c: CellId) -> Result<(usize, usize)> {
        if self.rooted {
            return Err(Error::bad_input(
                "row coordinates need the orange-free annulus patch",
            ));
        }
        if !self.contains(c) {
            return Err(Error::OutOfPatch(format!("cell {c} is outside the patch")));
        }
        let (ring, idx) = self
            .ball
            .position(c)
            .expect("patch cells lie on stored rings");
        Ok((ring - 1, idx))
    }

    /// All octagons whose eight edges lie inside the patch, each as the
    /// cells and boundary labels in trace order.
    pub fn octagons(&self) -> Vec<([CellId; 8], [Gen; 8])> {
        let mut seen: HashSet<[CellId; 8]> = HashSet::new();
        let mut out = Vec::new();
        for c in self.cells() {
            'starts: for g0 in 0u8..8 {
                let mut cells = [0 as CellId; 8];
                let mut labels = [0 as Gen; 8];
                let mut cur = c;
                let mut lab = g0;
                for i in 0..8 {
                    cells[i] = cur;
                    labels[i] = lab;
                    let next = match self.ball.complex.cell(cur).end(lab) {
                        Some(n) if self.edge_in_patch(cur, n) => n,
                        _ => continue 'starts,
                    };
                    cur = next;
                    lab = turn(lab);
                }
                if cur != c {
                    continue;
                }
                let mut key = cells;
                key.sort_unstable();
                if seen.insert(key) {
                    out.push((cells, labels));
                }
            }
        }
        out
    }

    /// Full local check: templates on every octagon, end coherence on
    /// every edge.
    pub fn check(&self) -> PatchReport {
        let templates = templates();
        let mut report = PatchReport::default();
        for (cells, labels) in self.octagons() {
            report.octagons_checked += 1;
            let ok = templates.iter().any(|t| t.matches(self, &cells, &labels));
            if !ok {
                report.violations.push(Diagnostic {
                    at: format!("octagon at cell {}", cells[0]),
                    message: "octagon coloring matches no template".into(),
                });
            }
        }
        for u in self.cells() {
            for g in 0u8..8 {
                let Some(v) = self.ball.complex.cell(u).end(g) else {
                    continue;
                };
                if !self.edge_in_patch(u, v) || u > v {
                    continue;
                }
                report.edges_checked += 1;
                for (a, b, ga) in [(u, v, g), (v, u, inv(g))] {
                    let da = self.symbol(a).unwrap().dir(ga);
                    let db = self.symbol(b).unwrap().dir(inv(ga));
                    let ok = match da {
                        Dir::Left => db == Dir::Right,
                        Dir::Right => db == Dir::Left,
                        Dir::Up => matches!(db, Dir::Down(_)),
                        Dir::Down(_) => db == Dir::Up,
                    };
                    if !ok {
                        report.violations.push(Diagnostic {
                            at: format!("edge {a} -> {b}"),
                            message: format!("{da} is answered by {db}"),
                        });
                    }
                }
            }
        }
        report
    }

    /// The rows of the annulus as an orbit patch of the ring substitution:
    /// ring `1+i` is row `i`, columns count from the spine.
    pub fn annulus_orbit(&self) -> Result<OrbitPatch> {
        if self.rooted {
            return Err(Error::bad_input("row structure needs the annulus patch"));
        }
        let mut rows = Vec::new();
        let mut links = Vec::new();
        for ring in 1..self.ball.rings.len() {
            let word: Vec<_> = self.ball.rings[ring]
                .iter()
                .map(|&c| self.ball.complex.cell(c).letter())
                .collect();
            if ring + 1 < self.ball.rings.len() {
                let choices: Vec<usize> = word.iter().map(|l| l.0).collect();
                let counts: Vec<i64> = word
                    .iter()
                    .map(|l| if l.0 == 0 { 29 } else { 35 })
                    .collect();
                links.push(RowLink {
                    choices,
                    acc: AccumulationTable::new(0, &counts)?,
                });
            }
            rows.push(OrbitRow { offset: 0, word });
        }
        Ok(OrbitPatch { rows, links })
    }

    /// Corrupts one cell for negative tests.
    #[cfg(test)]
    pub(crate) fn override_symbol(&mut self, c: CellId, sym: DirectionSymbol) {
        self.symbols[c] = Some(sym);
    }
}

#[derive(Debug, Default)]
pub struct PatchReport {
    pub octagons_checked: usize,
    pub edges_checked: usize,
    pub violations: Vec<Diagnostic>,
}

impl PatchReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Direction requirements at one octagon position, relative to the
/// anchored traversal: `enter` constrains the tag on the reversed incoming
/// edge, `leave` the tag on the outgoing edge.
#[derive(Debug, Clone, Copy)]
pub struct TemplateCell {
    pub color: Option<CellColor>,
    pub enter: Option<DirKind>,
    pub leave: Option<DirKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirKind {
    Left,
    Right,
    Up,
    Down,
}

fn kind(d: Dir) -> DirKind {
    match d {
        Dir::Left => DirKind::Left,
        Dir::Right => DirKind::Right,
        Dir::Up => DirKind::Up,
        Dir::Down(_) => DirKind::Down,
    }
}

/// One oriented template: cell constraints starting at the anchor corner.
#[derive(Debug, Clone)]
pub struct Template {
    pub anchor: usize,
    pub cells: [TemplateCell; 8],
}

impl Template {
    fn matches(&self, patch: &DirectionPatch, cells: &[CellId; 8], labels: &[Gen; 8]) -> bool {
        for p in 0..8 {
            let at = (self.anchor + p) % 8;
            let want = &self.cells[p];
            let sym = patch.symbol(cells[at]).expect("octagon lies in the patch");
            if let Some(color) = want.color {
                if sym.color != color {
                    return false;
                }
            }
            if let Some(k) = want.enter {
                let incoming = labels[(at + 7) % 8];
                if kind(sym.dir(inv(incoming))) != k {
                    return false;
                }
            }
            if let Some(k) = want.leave {
                if kind(sym.dir(labels[at])) != k {
                    return false;
                }
            }
        }
        true
    }
}

/// The sixteen oriented octagon templates: two cases, each anchored at any
/// of the eight corners. Position 0 is the cell the first edge leaves.
pub fn templates() -> Vec<Template> {
    const FREE: TemplateCell = TemplateCell {
        color: None,
        enter: None,
        leave: None,
    };
    fn cell(color: CellColor, enter: DirKind, leave: DirKind) -> TemplateCell {
        TemplateCell {
            color: Some(color),
            enter: Some(enter),
            leave: Some(leave),
        }
    }
    let white = cell(CellColor::White, DirKind::Left, DirKind::Right);
    // one parent: the trailing black climbs back to the cell both blacks
    // hang from
    let case_one: [TemplateCell; 8] = [
        FREE,
        cell(CellColor::Black, DirKind::Up, DirKind::Right),
        white,
        white,
        white,
        white,
        white,
        cell(CellColor::Black, DirKind::Left, DirKind::Up),
    ];
    // two parents: the octagon straddles a ring edge between two free cells
    let case_two: [TemplateCell; 8] = [
        FREE,
        cell(CellColor::Black, DirKind::Up, DirKind::Right),
        white,
        white,
        white,
        white,
        cell(CellColor::Black, DirKind::Left, DirKind::Up),
        FREE,
    ];
    let mut out = Vec::with_capacity(16);
    for case in [case_one, case_two] {
        for anchor in 0..8 {
            out.push(Template {
                anchor,
                cells: case,
            });
        }
    }
    out
}

/// Cell at the end of `depth` first-down steps below the origin.
pub fn spine_cell(cx: &mut Complex, depth: usize) -> CellId {
    let mut c = ORIGIN;
    for _ in 0..depth {
        c = cx.child(c, 0).expect("slot 0 always exists");
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleBalance {
    pub ups: usize,
    pub downs: usize,
}

impl CycleBalance {
    pub fn balanced(&self) -> bool {
        self.ups == self.downs
    }
}

/// Executes a closed direction walk on the lazy complex and counts its up
/// and down moves. Errors if the walk does not return to its start; a
/// closed walk always spells a relation, which is asserted against the
/// word reducer.
pub fn check_cycle_balance(
    cx: &mut Complex,
    start: CellId,
    moves: &[Dir],
) -> Result<CycleBalance> {
    let mut c = start;
    let mut word: GroupWord = Vec::with_capacity(moves.len());
    let mut bal = CycleBalance { ups: 0, downs: 0 };
    for &m in moves {
        let sym = lazy_symbol(cx, c);
        let g = sym.gen_for(m).ok_or_else(|| {
            Error::bad_input(format!("{:?} cells have no {m} direction", sym.color))
        })?;
        word.push(g);
        c = match m {
            Dir::Up => {
                bal.ups += 1;
                cx.cell(c).parent_opt().expect("blacks have parents")
            }
            Dir::Down(_) => {
                bal.downs += 1;
                cx.ensure_children(c);
                cx.cell(c).end(g).expect("downs exist after the walk")
            }
            Dir::Left => cx.ensure_left(c),
            Dir::Right => cx.ensure_right(c),
        };
    }
    if c != start {
        return Err(Error::bad_input(format!(
            "walk of {} moves is not closed",
            moves.len()
        )));
    }
    assert!(
        is_trivial(&word),
        "a positionally closed walk must spell a relation"
    );
    Ok(bal)
}

// ---------------------------------------------------------------------------
// JSON interface

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DirectionPatchSpec {
    pub rooted: bool,
    /// Outer index: ring number starting at 1. Inner: cells in ring order.
    pub rings: Vec<Vec<DirectionCellSpec>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DirectionCellSpec {
    pub color: CellColor,
    /// Direction tag per generator in index order.
    pub dirs: [String; 8],
}

impl DirectionPatchSpec {
    pub fn from_patch(patch: &DirectionPatch) -> Self {
        let rings = (1..patch.ball.rings.len())
            .map(|ring| {
                patch.ball.rings[ring]
                    .iter()
                    .map(|&c| {
                        let sym = patch.symbol(c).expect("ring cells carry symbols");
                        let dirs: [String; 8] =
                            std::array::from_fn(|g| sym.dir(g as Gen).to_string());
                        DirectionCellSpec {
                            color: sym.color,
                            dirs,
                        }
                    })
                    .collect()
            })
            .collect();
        DirectionPatchSpec {
            rooted: patch.rooted,
            rings,
        }
    }

    /// Structural validation of an exported patch: tag multisets fit the
    /// colors and ring lengths follow the substitution row growth.
    pub fn validate(&self) -> Result<()> {
        let mut diags = Vec::new();
        for (i, ring) in self.rings.iter().enumerate() {
            let mut blacks = 0usize;
            let mut whites = 0usize;
            for (j, cell) in ring.iter().enumerate() {
                match cell.color {
                    CellColor::Black => blacks += 1,
                    CellColor::White => whites += 1,
                    CellColor::Orange => diags.push(Diagnostic {
                        at: format!("ring {}, cell {j}", i + 1),
                        message: "orange off the origin".into(),
                    }),
                }
                let mut dirs = [Dir::Left; 8];
                let mut ok = true;
                for (g, tag) in cell.dirs.iter().enumerate() {
                    match tag.parse::<Dir>() {
                        Ok(d) => dirs[g] = d,
                        Err(_) => {
                            ok = false;
                            diags.push(Diagnostic {
                                at: format!("ring {}, cell {j}, generator {g}", i + 1),
                                message: format!("unknown tag {tag:?}"),
                            });
                        }
                    }
                }
                if ok {
                    if let Err(e) = DirectionSymbol::new(cell.color, dirs) {
                        diags.push(Diagnostic {
                            at: format!("ring {}, cell {j}", i + 1),
                            message: e.to_string(),
                        });
                    }
                }
            }
            if i + 1 < self.rings.len() {
                let expect = blacks * 29 + whites * 35;
                if self.rings[i + 1].len() != expect {
                    diags.push(Diagnostic {
                        at: format!("ring {}", i + 2),
                        message: format!(
                            "length {} does not continue ring {} ({} expected)",
                            self.rings[i + 1].len(),
                            i + 1,
                            expect
                        ),
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
}
