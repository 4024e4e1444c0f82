//! Planar realization of orbit patches as rows of rectangles.
//!
//! Row `i` occupies the horizontal strip between `y = -(i+1) * ln(lambda)`
//! and `y = -i * ln(lambda)`; the tile of `(i, j)` has width
//! `v(letter) * exp(y_i)`. Widths are conserved under refinement: the
//! children of a tile exactly fill its footprint, which is the geometric
//! form of the eigenvalue equation. The tile of `(0, 0)` has its top-left
//! corner at the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbit::{OrbitGraphPatch, Vertex};
use crate::substitution::ExpansionData;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    pub row: usize,
    pub col: i64,
    pub letter: usize,
    /// Top-left corner.
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    /// Interior child boundaries along the bottom edge, absolute x.
    pub cuts: Vec<f64>,
}

impl Tile {
    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y - self.height
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tiling {
    pub tiles: Vec<Tile>,
}

impl Tiling {
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut x0 = f64::INFINITY;
        let mut y0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        for t in &self.tiles {
            x0 = x0.min(t.x);
            y0 = y0.min(t.bottom());
            x1 = x1.max(t.right());
            y1 = y1.max(t.y);
        }
        (x0, y0, x1, y1)
    }

    pub fn tile(&self, row: usize, col: i64) -> Option<&Tile> {
        self.tiles.iter().find(|t| t.row == row && t.col == col)
    }
}

/// Lays out a patch with the expansion widths, anchored so the tile of
/// `(0, 0)` has its top-left corner at the origin.
pub fn layout_tiling(exp: &ExpansionData, graph: &OrbitGraphPatch) -> Result<Tiling> {
    if exp.lambda <= 1.0 {
        return Err(Error::Geometry(format!(
            "expansion factor {} is not greater than 1",
            exp.lambda
        )));
    }
    let log_lambda = exp.lambda.ln();
    let n_rows = graph.rows.len();
    // x coordinate of the left edge per row, keyed from the row window.
    let mut left_x: Vec<f64> = Vec::with_capacity(n_rows);
    // Row 0: walk left from column 0 (the anchor) at unit scale.
    {
        let (lo, _) = graph.rows[0].window();
        let mut x = 0.0;
        for j in (lo..0).rev() {
            let l = graph.rows[0].letter(j).expect("in window");
            x -= exp.width(l);
        }
        left_x.push(x);
    }
    // Deeper rows: each row starts with the first child of the parent
    // row's leftmost column, which shares the parent's left edge.
    for i in 1..n_rows {
        let link = &graph.links[i - 1];
        let (p_lo, _) = graph.rows[i - 1].window();
        let (c_first, _) = link
            .acc
            .interval(p_lo)
            .ok_or_else(|| Error::Geometry("empty parent interval".into()))?;
        let (lo, _) = graph.rows[i].window();
        if c_first != lo {
            return Err(Error::Geometry(format!(
                "row {i} window starts at {lo} but the first child sits at {c_first}"
            )));
        }
        left_x.push(left_x[i - 1]);
    }

    let mut tiles = Vec::with_capacity(graph.vertex_count());
    for i in 0..n_rows {
        let scale = (-(i as f64) * log_lambda).exp();
        let y_top = -(i as f64) * log_lambda;
        let (lo, hi) = graph.rows[i].window();
        let mut x = left_x[i];
        for j in lo..=hi {
            let l = graph.rows[i].letter(j).expect("in window");
            let w = exp.width(l) * scale;
            let mut cuts = Vec::new();
            if i < graph.links.len() {
                let v = Vertex { row: i, col: j };
                let kids = graph.children(v);
                let child_scale = (-(i as f64 + 1.0) * log_lambda).exp();
                let mut cx = x;
                for (k, child) in kids.iter().take(kids.len().saturating_sub(1)).enumerate() {
                    let _ = k;
                    let cl = graph.letter(child.1).expect("child in patch");
                    cx += exp.width(cl) * child_scale;
                    cuts.push(cx);
                }
            }
            tiles.push(Tile {
                row: i,
                col: j,
                letter: l.0,
                x,
                y: y_top,
                width: w,
                height: log_lambda,
                cuts,
            });
            x += w;
        }
    }
    Ok(Tiling { tiles })
}

/// Checks width conservation: in every row, each tile's children exactly
/// fill its footprint up to `eps` (relative to the tile width).
pub fn validate_tiling(graph: &OrbitGraphPatch, tiling: &Tiling, eps: f64) -> Result<()> {
    for t in &tiling.tiles {
        if t.row >= graph.links.len() {
            continue;
        }
        let v = Vertex {
            row: t.row,
            col: t.col,
        };
        let kids = graph.children(v);
        if kids.is_empty() {
            return Err(Error::Geometry(format!(
                "tile ({}, {}) has no children despite a deeper row",
                t.row, t.col
            )));
        }
        let first = tiling
            .tile(t.row + 1, kids[0].1.col)
            .ok_or_else(|| Error::Geometry("missing child tile".into()))?;
        let last = tiling
            .tile(t.row + 1, kids[kids.len() - 1].1.col)
            .ok_or_else(|| Error::Geometry("missing child tile".into()))?;
        let tol = eps * t.width.max(1.0);
        if (first.x - t.x).abs() > tol || (last.right() - t.right()).abs() > tol {
            return Err(Error::Geometry(format!(
                "children of ({}, {}) span [{}, {}] but the tile spans [{}, {}]",
                t.row,
                t.col,
                first.x,
                last.right(),
                t.x,
                t.right()
            )));
        }
    }
    Ok(())
}

/// Rectangular block of the width-2 doubling tiling: `h` rows, the top row
/// `t` tiles wide, each row doubling the count. The top row has unit scale
/// (tile width 2, row height ln 2) and the block's top-left corner is the
/// origin.
pub fn block_layout(h: u32, t: u32) -> Result<Tiling> {
    if h == 0 || t == 0 {
        return Err(Error::bad_input("block parameters must be positive"));
    }
    let log2 = std::f64::consts::LN_2;
    let mut tiles = Vec::new();
    for i in 0..h {
        let scale = 0.5f64.powi(i as i32);
        let w = 2.0 * scale;
        let y_top = -(i as f64) * log2;
        let count = t as i64 * (1i64 << i);
        for j in 0..count {
            let x = j as f64 * w;
            let cuts = if i + 1 < h {
                vec![x + w / 2.0]
            } else {
                Vec::new()
            };
            tiles.push(Tile {
                row: i as usize,
                col: j,
                letter: 0,
                x,
                y: y_top,
                width: w,
                height: log2,
                cuts,
            });
        }
    }
    Ok(Tiling { tiles })
}

#[derive(Debug, Clone)]
pub struct SvgStyle {
    pub scale: f64,
    pub stroke_width: f64,
    pub show_cuts: bool,
    pub show_labels: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            scale: 64.0,
            stroke_width: 1.0,
            show_cuts: true,
            show_labels: false,
        }
    }
}

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2", "#edc948", "#9c755f",
];

fn fmt(v: f64) -> String {
    // canonical fixed-point output so renders are byte-stable
    let s = format!("{:.6}", v);
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Renders a tiling to SVG. Output is deterministic for equal inputs.
pub fn render_svg(tiling: &Tiling, names: &[String], style: &SvgStyle) -> String {
    let (x0, y0, x1, y1) = tiling.bounds();
    let m = 0.25; // margin in tiling units
    let w = (x1 - x0 + 2.0 * m) * style.scale;
    let h = (y1 - y0 + 2.0 * m) * style.scale;
    let px = |x: f64| (x - x0 + m) * style.scale;
    let py = |y: f64| (y1 - y + m) * style.scale;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        fmt(w), fmt(h), fmt(w), fmt(h)
    ));
    for t in &tiling.tiles {
        let fill = PALETTE[t.letter % PALETTE.len()];
        out.push_str(&format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#222222\" stroke-width=\"{}\"/>\n",
            fmt(px(t.x)),
            fmt(py(t.y)),
            fmt(t.width * style.scale),
            fmt(t.height * style.scale),
            fill,
            fmt(style.stroke_width)
        ));
    }
    if style.show_cuts {
        for t in &tiling.tiles {
            for &c in &t.cuts {
                out.push_str(&format!(
                    "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#222222\" stroke-width=\"{}\" stroke-dasharray=\"2,2\"/>\n",
                    fmt(px(c)),
                    fmt(py(t.bottom()) - 0.3 * t.height * style.scale),
                    fmt(px(c)),
                    fmt(py(t.bottom())),
                    fmt(style.stroke_width * 0.75)
                ));
            }
        }
    }
    if style.show_labels {
        for t in &tiling.tiles {
            let name = names.get(t.letter).map(|s| s.as_str()).unwrap_or("?");
            out.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"middle\" fill=\"#111111\">{}</text>\n",
                fmt(px(t.x + t.width / 2.0)),
                fmt(py(t.y - t.height / 2.0)),
                fmt(0.3 * t.height * style.scale),
                name
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::orbit::{grow_orbit_patch, orbit_graph_of};
    use crate::substitution::{find_expansion, FirstRule, Letter, Rule, Substitution};
    use approx::assert_abs_diff_eq;

    fn binary_graph(depth: usize) -> (Substitution, ExpansionData, OrbitGraphPatch) {
        let sub = Substitution::binary_doubling();
        let exp = find_expansion(&sub, &Config::default()).unwrap();
        let patch = grow_orbit_patch(&sub, Letter(0), depth, &mut FirstRule).unwrap();
        let graph = orbit_graph_of(&sub, &patch);
        (sub, exp, graph)
    }

    #[test]
    fn binary_layout_is_anchored_and_conserved() {
        let (_sub, exp, graph) = binary_graph(3);
        let tiling = layout_tiling(&exp, &graph).unwrap();
        validate_tiling(&graph, &tiling, 1e-9).unwrap();
        let root = tiling.tile(0, 0).unwrap();
        assert_abs_diff_eq!(root.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(root.y, 0.0, epsilon = 1e-12);
        // lambda = 2, v = 1: row widths halve
        let t10 = tiling.tile(1, 0).unwrap();
        assert_abs_diff_eq!(t10.width, root.width / 2.0, epsilon = 1e-12);
        assert_eq!(root.cuts.len(), 1);
        assert_abs_diff_eq!(root.cuts[0], root.width / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn two_letter_layout_conserves_widths() {
        let sub = Substitution::new(
            vec!["a".into(), "b".into()],
            vec![
                Rule {
                    lhs: Letter(0),
                    rhs: vec![Letter(0), Letter(1)],
                },
                Rule {
                    lhs: Letter(1),
                    rhs: vec![Letter(0)],
                },
            ],
        )
        .unwrap();
        let exp = find_expansion(&sub, &Config::default()).unwrap();
        let patch = grow_orbit_patch(&sub, Letter(0), 5, &mut FirstRule).unwrap();
        let graph = orbit_graph_of(&sub, &patch);
        let tiling = layout_tiling(&exp, &graph).unwrap();
        validate_tiling(&graph, &tiling, 1e-9).unwrap();
    }

    #[test]
    fn block_counts_and_extent() {
        let t = block_layout(3, 3).unwrap();
        assert_eq!(t.tiles.len(), 21);
        let rows: Vec<usize> = (0..3)
            .map(|i| t.tiles.iter().filter(|x| x.row == i).count())
            .collect();
        assert_eq!(rows, vec![3, 6, 12]);
        let (x0, y0, x1, y1) = t.bounds();
        assert_abs_diff_eq!(x1 - x0, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y1 - y0, 3.0 * std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn svg_is_deterministic() {
        let (sub, exp, graph) = binary_graph(2);
        let tiling = layout_tiling(&exp, &graph).unwrap();
        let names: Vec<String> = sub.names().to_vec();
        let a = render_svg(&tiling, &names, &SvgStyle::default());
        let b = render_svg(&tiling, &names, &SvgStyle::default());
        assert_eq!(a, b);
        assert_eq!(a.matches("<rect").count(), tiling.tiles.len());
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
    }
}
