//! Small named instances used by tests, examples and the CLI.

use crate::instance::{Edge, Instance, Tree, Vertex, Weight};
use crate::rational::Rational;

fn vertex(id: &str, area: Weight) -> Vertex {
    Vertex {
        id: id.to_string(),
        area,
    }
}

fn fin(r: Rational) -> Weight {
    Weight::Finite(r)
}

fn int(n: i64) -> Weight {
    Weight::Finite(Rational::from_int(n))
}

fn edge(label: usize, up: &str, down: &str) -> Edge {
    Edge {
        label,
        up: up.to_string(),
        down: down.to_string(),
    }
}

/// Two points: the lens `B` under segment 1 and the lens `A` over segment 2.
/// Only equal areas give an exact curve.
pub fn base_with(top_lens: Rational, bottom_lens: Rational) -> Instance {
    Instance::new(
        1,
        Tree {
            root: "R1".into(),
            vertices: vec![vertex("R1", Weight::Unbounded), vertex("B", fin(top_lens))],
            edges: vec![edge(1, "R1", "B")],
        },
        Tree {
            root: "R2".into(),
            vertices: vec![vertex("R2", Weight::Unbounded), vertex("A", fin(bottom_lens))],
            edges: vec![edge(2, "A", "R2")],
        },
    )
}

pub fn base(area: Rational) -> Instance {
    base_with(area.clone(), area)
}

/// Four lenses alternating below and above L0, with areas B1, B2, A1, A2.
pub fn zigzag_with(b1: Rational, b2: Rational, a1: Rational, a2: Rational) -> Instance {
    Instance::new(
        2,
        Tree {
            root: "R1".into(),
            vertices: vec![
                vertex("R1", Weight::Unbounded),
                vertex("B1", fin(b1)),
                vertex("B2", fin(b2)),
            ],
            edges: vec![edge(1, "R1", "B1"), edge(3, "R1", "B2")],
        },
        Tree {
            root: "R2".into(),
            vertices: vec![
                vertex("R2", Weight::Unbounded),
                vertex("A1", fin(a1)),
                vertex("A2", fin(a2)),
            ],
            edges: vec![edge(2, "A1", "R2"), edge(4, "A2", "R2")],
        },
    )
}

pub fn zigzag() -> Instance {
    zigzag_with(
        Rational::from_int(1),
        Rational::from_int(3),
        Rational::from_int(2),
        Rational::from_int(2),
    )
}

/// The eight-point curve with three leaves (`a4`, `a2`, `b4`).
pub fn three_leaves() -> Instance {
    Instance::new(
        4,
        Tree {
            root: "a0".into(),
            vertices: vec![
                vertex("a0", Weight::Unbounded),
                vertex("a1", int(5)),
                vertex("a2", int(3)),
                vertex("a3", int(2)),
                vertex("a4", int(1)),
            ],
            edges: vec![
                edge(1, "a0", "a1"),
                edge(3, "a3", "a4"),
                edge(5, "a2", "a1"),
                edge(7, "a3", "a1"),
            ],
        },
        Tree {
            root: "b0".into(),
            vertices: vec![
                vertex("b0", Weight::Unbounded),
                vertex("b1", int(4)),
                vertex("b2", fin(Rational::new(7, 2))),
                vertex("b3", int(2)),
                vertex("b4", fin(Rational::new(1, 2))),
            ],
            edges: vec![
                edge(2, "b1", "b2"),
                edge(4, "b3", "b2"),
                edge(6, "b3", "b4"),
                edge(8, "b1", "b0"),
            ],
        },
    )
}
