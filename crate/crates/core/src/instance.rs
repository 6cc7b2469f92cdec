//! Weighted tree-pair encoding of an equator and its JSON file format.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub const FORMAT_TAG: &str = "cyl-floer/1";

pub type FaceId = String;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Weight {
    Finite(Rational),
    Unbounded,
}

impl Weight {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Weight::Finite(r) => Some(r),
            Weight::Unbounded => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Weight::Unbounded)
    }

    /// Adds `delta` to a finite weight; unbounded weights absorb it.
    pub fn shifted(&self, delta: &Rational) -> Weight {
        match self {
            Weight::Finite(r) => Weight::Finite(r + delta),
            Weight::Unbounded => Weight::Unbounded,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(r) => write!(f, "{r}"),
            Weight::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.trim() == "unbounded" {
            Ok(Weight::Unbounded)
        } else {
            s.parse().map(Weight::Finite).map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: FaceId,
    pub area: Weight,
}

/// A base-curve segment `[s_label, s_label+1]` seen as a tree edge, oriented up → down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub label: usize,
    pub up: FaceId,
    pub down: FaceId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tree {
    pub root: FaceId,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeSide {
    Top,
    Bottom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trees {
    pub top: Tree,
    pub bottom: Tree,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub format: String,
    pub n: usize,
    pub trees: Trees,
}

impl Tree {
    pub fn vertex(&self, id: &str) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    fn normalize(&mut self) {
        let root = self.root.clone();
        self.vertices.sort_by(|a, b| {
            (a.id != root)
                .cmp(&(b.id != root))
                .then_with(|| natural_cmp(&a.id, &b.id))
        });
        self.edges.sort_by_key(|e| e.label);
    }
}

impl Instance {
    /// Builds an instance with vertices and edges in canonical order.
    pub fn new(n: usize, top: Tree, bottom: Tree) -> Instance {
        let mut inst = Instance {
            format: FORMAT_TAG.to_string(),
            n,
            trees: Trees { top, bottom },
        };
        inst.normalize();
        inst
    }

    pub fn normalize(&mut self) {
        self.trees.top.normalize();
        self.trees.bottom.normalize();
    }

    pub fn tree(&self, side: TreeSide) -> &Tree {
        match side {
            TreeSide::Top => &self.trees.top,
            TreeSide::Bottom => &self.trees.bottom,
        }
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let mut inst: Instance = serde_json::from_str(text)?;
        if inst.format != FORMAT_TAG {
            return Err(Error::Invalid(format!(
                "unsupported format tag {:?} (expected {FORMAT_TAG:?})",
                inst.format
            )));
        }
        inst.normalize();
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// All vertex ids across both trees.
    pub fn face_ids(&self) -> impl Iterator<Item = &FaceId> {
        self.trees
            .top
            .vertices
            .iter()
            .chain(self.trees.bottom.vertices.iter())
            .map(|v| &v.id)
    }
}

/// Orders ids like `f2` before `f10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u128>) {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, digits) = s.split_at(cut);
        (head, digits.parse().ok())
    }
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(hb).then(na.cmp(&nb)).then_with(|| a.cmp(b))
}

/// Name of the 0-based point index `i` as used in files and output (`s1`, `s2`, …).
pub fn point_name(i: usize) -> String {
    format!("s{}", i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
      "format": "cyl-floer/1",
      "n": 1,
      "trees": {
        "top": {"root": "R1", "vertices": [{"id": "B", "area": "1"}, {"id": "R1", "area": "unbounded"}],
                "edges": [{"label": 1, "up": "R1", "down": "B"}]},
        "bottom": {"root": "R2", "vertices": [{"id": "R2", "area": "unbounded"}, {"id": "A", "area": "2/2"}],
                   "edges": [{"label": 2, "up": "A", "down": "R2"}]}
      }
    }"#;

    #[test]
    fn parse_and_normalize() {
        let inst = Instance::from_json(BASE).unwrap();
        assert_eq!(inst.n, 1);
        assert_eq!(inst.trees.top.vertices[0].id, "R1");
        assert_eq!(inst.trees.bottom.vertices[1].area, Weight::Finite(Rational::one()));
        let again = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn rejects_unknown_fields_and_tags() {
        let extra = BASE.replacen("\"n\": 1,", "\"n\": 1, \"color\": 3,", 1);
        assert!(Instance::from_json(&extra).is_err());
        let tag = BASE.replacen("cyl-floer/1", "cyl-floer/2", 1);
        assert!(matches!(Instance::from_json(&tag), Err(Error::Invalid(_))));
        let bad_area = BASE.replacen("\"2/2\"", "\"two\"", 1);
        assert!(Instance::from_json(&bad_area).is_err());
    }

    #[test]
    fn natural_order() {
        let mut ids = vec!["f10", "f2", "b", "f1", "a3"];
        ids.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(ids, ["a3", "b", "f1", "f2", "f10"]);
    }
}
