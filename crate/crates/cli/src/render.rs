//! Static SVG figures: curve schematic, tree pair and barcode.
//!
//! Coordinates are presentation only. They are computed in `f64` and printed rounded to
//! six decimals, so a fixed input always gives the same bytes.

use std::collections::BTreeSet;
use std::fmt::Write;

use cyl_floer::analysis::Analysis;
use cyl_floer::arrangement::{Arrangement, Side, TreeView};
use cyl_floer::instance::point_name;
use cyl_floer::rational::Rational;
use cyl_floer::surgery::leaves_of;

const MARGIN: f64 = 24.0;
const STEP: f64 = 44.0;
const NODE_R: f64 = 15.0;
const LEVEL: f64 = 64.0;
const ROW: f64 = 18.0;
const LEAF_FILL: &str = "#f4a3a3";
const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";

/// Fixed-point rendering of a coordinate.
pub fn num(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    let s = format!("{r:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Panel {
    width: f64,
    height: f64,
    body: String,
}

fn document(panels: &[Panel]) -> String {
    let width = panels.iter().map(|p| p.width).fold(0.0, f64::max);
    let height: f64 = panels.iter().map(|p| p.height).sum();
    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = num(width),
        h = num(height)
    )
    .unwrap();
    out.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"7\" \
         markerHeight=\"7\" orient=\"auto-start-reverse\"><path d=\"M0 0L10 5L0 10z\" fill=\"#333\"/></marker></defs>\n",
    );
    writeln!(
        out,
        "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>",
        num(width),
        num(height)
    )
    .unwrap();
    let mut y = 0.0;
    for p in panels {
        writeln!(out, "<g transform=\"translate(0 {})\">", num(y)).unwrap();
        out.push_str(&p.body);
        out.push_str("</g>\n");
        y += p.height;
    }
    out.push_str("</svg>\n");
    out
}

fn title(body: &mut String, text: &str) {
    writeln!(
        body,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" font-weight=\"bold\">{}</text>",
        num(MARGIN),
        num(MARGIN - 6.0),
        esc(text)
    )
    .unwrap();
}

/// L0 as a horizontal line whose ends are identified; arcs of L as semicircles above and
/// below it, leaves filled.
fn curve_panel(arr: &Arrangement, leaf_faces: &BTreeSet<usize>) -> Panel {
    let m = arr.points();
    let longest = arr.arcs.iter().map(|a| a.len(m)).max().unwrap_or(1) as f64;
    let r_max = longest * STEP / 2.0;
    let width = 2.0 * MARGIN + m as f64 * STEP;
    let base_y = MARGIN + 12.0 + r_max;
    let height = base_y + r_max + MARGIN + 12.0;
    let x = |i: f64| MARGIN + i * STEP;
    let mut b = String::new();
    title(&mut b, "curve");
    writeln!(
        b,
        "<clipPath id=\"band\"><rect x=\"{}\" y=\"0\" width=\"{}\" height=\"{}\"/></clipPath>",
        num(x(0.0)),
        num(m as f64 * STEP),
        num(height)
    )
    .unwrap();
    b.push_str("<g clip-path=\"url(#band)\">\n");
    for arc in &arr.arcs {
        let len = arc.len(m) as f64;
        let r = len * STEP / 2.0;
        let sweep = match arc.side {
            Side::Up => 1,
            Side::Down => 0,
        };
        let leaf = len == 1.0 && leaf_faces.contains(&arc.inner);
        // A wrapping arc is drawn twice, one copy shifted by a full turn.
        for shift in [0.0, -(m as f64)] {
            let (x1, x2) = (x(arc.start as f64 + shift), x(arc.start as f64 + len + shift));
            if x2 <= x(0.0) {
                continue;
            }
            let d = format!(
                "M{} {} A{} {} 0 0 {sweep} {} {}",
                num(x1),
                num(base_y),
                num(r),
                num(r),
                num(x2),
                num(base_y)
            );
            if leaf {
                writeln!(
                    b,
                    "<path d=\"{d}Z\" fill=\"{LEAF_FILL}\" stroke=\"#c00\" stroke-width=\"1.5\"/>"
                )
                .unwrap();
            } else {
                writeln!(
                    b,
                    "<path d=\"{d}\" fill=\"none\" stroke=\"#c00\" stroke-width=\"1.5\"/>"
                )
                .unwrap();
            }
            if shift == 0.0 && arc.start as f64 + len <= m as f64 {
                break;
            }
        }
    }
    b.push_str("</g>\n");
    writeln!(
        b,
        "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"black\" stroke-width=\"1.5\"/>",
        num(x(0.0)),
        num(x(m as f64)),
        y = num(base_y)
    )
    .unwrap();
    for end in [0.0, m as f64] {
        writeln!(
            b,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\" stroke-dasharray=\"3 2\"/>",
            num(base_y - 8.0),
            num(base_y + 8.0),
            x = num(x(end))
        )
        .unwrap();
    }
    for i in 0..m {
        writeln!(
            b,
            "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"black\"/><text x=\"{}\" y=\"{}\" {FONT}>{}</text>",
            num(x(i as f64)),
            num(base_y),
            num(x(i as f64) + 3.0),
            num(base_y + 13.0),
            point_name(i)
        )
        .unwrap();
    }
    for &f in leaf_faces {
        let Some(arc) = arr.arcs.iter().find(|a| a.inner == f && a.len(m) == 1) else {
            continue;
        };
        let dy = match arc.side {
            Side::Up => -STEP / 4.0,
            Side::Down => STEP / 4.0 + 8.0,
        };
        writeln!(
            b,
            "<text x=\"{}\" y=\"{}\" {FONT} text-anchor=\"middle\">{}</text>",
            num(x(arc.start as f64 + 0.5)),
            num(base_y + dy),
            esc(&arr.faces()[f].id)
        )
        .unwrap();
    }
    Panel { width, height, body: b }
}

/// Leaf slots in depth-first order, children by edge label; parents centred over children.
fn tree_layout(view: &TreeView, root: usize, nf: usize) -> (Vec<(f64, f64)>, f64, usize) {
    let mut children = vec![Vec::new(); nf];
    for f in 0..nf {
        if let Some((p, t)) = view.parent[f] {
            children[p].push((t, f));
        }
    }
    for c in &mut children {
        c.sort();
    }
    let mut pos = vec![(0.0, 0.0); nf];
    let mut next = 0.0;
    let mut deepest = 0;
    fn place(
        f: usize,
        depth: usize,
        children: &[Vec<(usize, usize)>],
        pos: &mut [(f64, f64)],
        next: &mut f64,
        deepest: &mut usize,
    ) -> f64 {
        *deepest = (*deepest).max(depth);
        let xs: Vec<f64> = children[f]
            .iter()
            .map(|&(_, c)| place(c, depth + 1, children, pos, next, deepest))
            .collect();
        let x = if xs.is_empty() {
            *next += 1.0;
            *next - 1.0
        } else {
            (xs[0] + xs[xs.len() - 1]) / 2.0
        };
        pos[f] = (x, depth as f64);
        x
    }
    place(root, 0, &children, &mut pos, &mut next, &mut deepest);
    (pos, next, deepest)
}

fn trees_panel(arr: &Arrangement, view: &TreeView, leaf_faces: &BTreeSet<usize>) -> Panel {
    let sk = &arr.skeleton;
    let nf = sk.faces.len();
    let slot = 2.0 * NODE_R + 26.0;
    let mut b = String::new();
    title(&mut b, "trees");
    let mut x_off = MARGIN;
    let mut height: f64 = 0.0;
    for (name, root) in [("top", sk.top_root), ("bottom", sk.bottom_root)] {
        let (pos, slots, deepest) = tree_layout(view, root, nf);
        let members: Vec<usize> = (0..nf).filter(|&f| sk.faces[f].tree == sk.faces[root].tree).collect();
        let at = |f: usize| {
            let (sx, d) = pos[f];
            (x_off + NODE_R + sx * slot, MARGIN + 32.0 + d * LEVEL)
        };
        writeln!(
            b,
            "<text x=\"{}\" y=\"{}\" {FONT} font-style=\"italic\">{name}</text>",
            num(x_off),
            num(MARGIN + 8.0)
        )
        .unwrap();
        for (t, seg) in sk.segments.iter().enumerate() {
            if sk.faces[seg.up].tree != sk.faces[root].tree {
                continue;
            }
            let ((x1, y1), (x2, y2)) = (at(seg.up), at(seg.down));
            let len = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt();
            let (ux, uy) = ((x2 - x1) / len, (y2 - y1) / len);
            writeln!(
                b,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\" marker-end=\"url(#arrow)\"/>",
                num(x1 + ux * NODE_R),
                num(y1 + uy * NODE_R),
                num(x2 - ux * NODE_R),
                num(y2 - uy * NODE_R)
            )
            .unwrap();
            writeln!(
                b,
                "<text x=\"{}\" y=\"{}\" {FONT} fill=\"#036\">{}</text>",
                num((x1 + x2) / 2.0 + 4.0),
                num((y1 + y2) / 2.0),
                t + 1
            )
            .unwrap();
        }
        for &f in &members {
            let (cx, cy) = at(f);
            let face = &sk.faces[f];
            let fill = if leaf_faces.contains(&f) { LEAF_FILL } else { "white" };
            let stroke_w = if face.is_root { 2.5 } else { 1.0 };
            writeln!(
                b,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"{stroke_w}\"/>",
                num(cx),
                num(cy),
                num(NODE_R)
            )
            .unwrap();
            writeln!(
                b,
                "<text x=\"{}\" y=\"{}\" {FONT} text-anchor=\"middle\">{}</text>",
                num(cx),
                num(cy + 4.0),
                esc(&face.id)
            )
            .unwrap();
            writeln!(
                b,
                "<text x=\"{}\" y=\"{}\" {FONT} text-anchor=\"middle\" fill=\"#555\">{}</text>",
                num(cx),
                num(cy + NODE_R + 12.0),
                esc(&face.weight.to_string())
            )
            .unwrap();
        }
        x_off += slots * slot + 2.0 * MARGIN;
        height = height.max(MARGIN + 32.0 + deepest as f64 * LEVEL + NODE_R + 20.0);
    }
    Panel {
        width: x_off,
        height: height + MARGIN,
        body: b,
    }
}

/// Bars on the action axis, sorted by birth; infinite bars run off the right edge.
fn barcode_panel(intervals: &[(Rational, Option<Rational>)]) -> Panel {
    let width = 2.0 * MARGIN + 480.0;
    let (axis_x0, axis_x1) = (MARGIN + 8.0, width - MARGIN - 100.0);
    let mut ends: Vec<&Rational> = intervals
        .iter()
        .flat_map(|(b, d)| std::iter::once(b).chain(d))
        .collect();
    ends.sort();
    ends.dedup();
    let (lo, hi) = match (ends.first(), ends.last()) {
        (Some(a), Some(b)) if a < b => (a.to_f64(), b.to_f64()),
        (Some(a), _) => (a.to_f64() - 1.0, a.to_f64() + 1.0),
        _ => (0.0, 1.0),
    };
    let span = axis_x1 - axis_x0 - 40.0;
    let ax = |v: f64| axis_x0 + (v - lo) / (hi - lo) * span;
    let top = MARGIN + 8.0;
    let axis_y = top + intervals.len() as f64 * ROW + 8.0;
    let mut b = String::new();
    title(&mut b, "barcode");
    for (i, (birth, death)) in intervals.iter().enumerate() {
        let y = top + i as f64 * ROW + ROW / 2.0;
        let x1 = ax(birth.to_f64());
        let (x2, label) = match death {
            Some(d) => (ax(d.to_f64()), format!("[{birth}, {d})")),
            None => (axis_x1, format!("[{birth}, ∞)")),
        };
        let marker = if death.is_none() {
            " marker-end=\"url(#arrow)\""
        } else {
            ""
        };
        writeln!(
            b,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#25a\" stroke-width=\"4\"{marker}/>",
            num(x1),
            num(x2),
            y = num(y)
        )
        .unwrap();
        writeln!(
            b,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#25a\"/><text x=\"{}\" y=\"{}\" {FONT}>{}</text>",
            num(x1),
            num(y),
            num(axis_x1 + 8.0),
            num(y + 4.0),
            esc(&label)
        )
        .unwrap();
    }
    writeln!(
        b,
        "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"black\"/>",
        num(axis_x0),
        num(axis_x1),
        y = num(axis_y)
    )
    .unwrap();
    for v in &ends {
        let x = ax(v.to_f64());
        writeln!(
            b,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/><text x=\"{x}\" y=\"{}\" {FONT} text-anchor=\"middle\">{}</text>",
            num(axis_y - 3.0),
            num(axis_y + 3.0),
            num(axis_y + 15.0),
            esc(&v.to_string()),
            x = num(x)
        )
        .unwrap();
    }
    Panel {
        width,
        height: axis_y + 20.0 + MARGIN,
        body: b,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Panels {
    All,
    Curve,
    Trees,
    Barcode,
}

pub fn render_analysis(a: &Analysis, which: Panels) -> String {
    let leaf_faces: BTreeSet<usize> = leaves_of(&a.arrangement, &a.view)
        .iter()
        .filter_map(|l| a.arrangement.skeleton.face(&l.face))
        .collect();
    let mut panels = Vec::new();
    if matches!(which, Panels::All | Panels::Curve) {
        panels.push(curve_panel(&a.arrangement, &leaf_faces));
    }
    if matches!(which, Panels::All | Panels::Trees) {
        panels.push(trees_panel(&a.arrangement, &a.view, &leaf_faces));
    }
    if matches!(which, Panels::All | Panels::Barcode) {
        panels.push(barcode_panel(&a.barcode.intervals()));
    }
    document(&panels)
}

pub fn render_barcode(intervals: &[(Rational, Option<Rational>)]) -> String {
    document(&[barcode_panel(intervals)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use cyl_floer::fixtures;

    #[test]
    fn quantized() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.0000001), "0");
        assert_eq!(num(2.5), "2.5");
        assert_eq!(num(1.0 / 3.0), "0.333333");
    }

    #[test]
    fn leaves_are_highlighted() {
        let a = Analysis::new(&fixtures::three_leaves(), 3).unwrap();
        let svg = render_analysis(&a, Panels::Trees);
        assert_eq!(svg.matches(&format!("fill=\"{LEAF_FILL}\"")).count(), 3);
    }

    #[test]
    fn base_has_two_infinite_bars() {
        let a = Analysis::new(&fixtures::base(Rational::one()), 3).unwrap();
        let svg = render_analysis(&a, Panels::Barcode);
        assert_eq!(svg.matches("marker-end=\"url(#arrow)\"").count(), 2);
    }

    #[test]
    fn zigzag_bar_labels() {
        let a = Analysis::new(&fixtures::zigzag(), 3).unwrap();
        let svg = render_analysis(&a, Panels::All);
        for label in ["[-1, ∞)", "[0, 1)", "[2, ∞)"] {
            assert!(svg.contains(label), "{label}");
        }
        assert_eq!(svg, render_analysis(&a, Panels::All));
    }
}
