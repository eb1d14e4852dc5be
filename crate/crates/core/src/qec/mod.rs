//! Check-operator graphs of three QEC code families and their embedding cost on
//! a 2D nearest-neighbour grid versus the modular architecture.
//!
//! A [`QecGraph`] is bipartite: data nodes on one side, one ancilla per check on
//! the other. Node indices run data first (`0..n_data`), then checks.

mod codes;
mod embed;
mod gf2;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use codes::{hypergraph_product_graph, steane_concat_graph, surface_code_graph, STEANE_SUPPORTS};
pub use embed::{
    embed_on_grid, embed_on_modular, random_placement_ensemble, swaps_for_distance, CheckRoute, EmbeddingReport, Hop,
    Host, Partition, Placement,
};
pub use gf2::{rank, rank_of_supports, BinaryMatrix};

use crate::error::{Error, Result};

pub const QEC_SCHEMA: &str = "ionfab-qec/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckKind {
    X,
    Z,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub kind: CheckKind,
    /// Sorted, distinct data indices.
    pub data: Vec<usize>,
}

impl Check {
    pub fn weight(&self) -> usize {
        self.data.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CodeFamily {
    Surface { distance: usize },
    SteaneConcatenated { levels: u32 },
    HypergraphProduct { m1: usize, n1: usize, m2: usize, n2: usize },
    Custom,
}

/// Planar drawing: one integer coordinate per data node and per check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub data: Vec<(i64, i64)>,
    pub checks: Vec<(i64, i64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QecGraph {
    pub family: CodeFamily,
    pub n_data: usize,
    pub checks: Vec<Check>,
    /// k, when computed.
    pub logical_qubits: Option<usize>,
    /// Logical error threshold quoted for the family; informational only.
    pub threshold: Option<f64>,
    pub layout: Option<Layout>,
}

impl QecGraph {
    /// Validates bipartiteness and per-check support.
    pub fn new(family: CodeFamily, n_data: usize, mut checks: Vec<Check>) -> Result<Self> {
        for (i, c) in checks.iter_mut().enumerate() {
            c.data.sort_unstable();
            c.data.dedup();
            if c.data.is_empty() {
                return Err(Error::Code(format!("check {i} touches no data qubit")));
            }
            if let Some(&d) = c.data.last() {
                if d >= n_data {
                    return Err(Error::Code(format!("check {i} references data {d} of {n_data}")));
                }
            }
        }
        Ok(Self {
            family,
            n_data,
            checks,
            logical_qubits: None,
            threshold: None,
            layout: None,
        })
    }

    pub fn n_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_data + self.checks.len()
    }

    pub fn count(&self, kind: CheckKind) -> usize {
        self.checks.iter().filter(|c| c.kind == kind).count()
    }

    pub fn weights(&self) -> Vec<usize> {
        self.checks.iter().map(Check::weight).collect()
    }

    pub fn max_weight(&self) -> usize {
        self.weights().into_iter().max().unwrap_or(0)
    }

    /// k/n when k is known.
    pub fn rate(&self) -> Option<f64> {
        self.logical_qubits.map(|k| k as f64 / self.n_data as f64)
    }

    pub fn supports(&self, kind: CheckKind) -> Vec<Vec<usize>> {
        self.checks
            .iter()
            .filter(|c| c.kind == kind)
            .map(|c| c.data.clone())
            .collect()
    }

    /// k = n − rank(H_X) − rank(H_Z).
    pub fn compute_logical_qubits(&self) -> usize {
        let rx = rank_of_supports(&self.supports(CheckKind::X), self.n_data);
        let rz = rank_of_supports(&self.supports(CheckKind::Z), self.n_data);
        self.n_data - rx - rz
    }

    /// Every X check overlaps every Z check on an even number of data nodes.
    pub fn css_commutes(&self) -> bool {
        let xs = self.supports(CheckKind::X);
        let zs = self.supports(CheckKind::Z);
        xs.iter()
            .all(|x| zs.iter().all(|z| sorted_overlap(x, z).is_multiple_of(2)))
    }

    /// Edges as (data, check) index pairs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.checks
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| c.data.iter().map(move |&d| (d, ci)))
    }

    /// True when the stored layout draws every edge as a straight segment with
    /// no two segments crossing except at shared endpoints.
    pub fn layout_is_planar(&self) -> bool {
        let Some(layout) = &self.layout else {
            return false;
        };
        let mut seen = std::collections::BTreeSet::new();
        if !layout.data.iter().chain(&layout.checks).all(|p| seen.insert(*p)) {
            return false;
        }
        let segments: Vec<((i64, i64), (i64, i64))> =
            self.edges().map(|(d, c)| (layout.data[d], layout.checks[c])).collect();
        for (i, s) in segments.iter().enumerate() {
            for t in &segments[i + 1..] {
                if segments_cross(*s, *t) {
                    return false;
                }
            }
        }
        true
    }
}

fn sorted_overlap(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

type Point = (i64, i64);

fn orient(a: Point, b: Point, c: Point) -> i64 {
    ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).signum()
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Proper or touching intersection, ignoring contact at a shared endpoint.
fn segments_cross(s: (Point, Point), t: (Point, Point)) -> bool {
    let shared = [s.0, s.1].iter().filter(|p| **p == t.0 || **p == t.1).count();
    if shared > 0 {
        // collinear overlap beyond the shared endpoint still counts
        let o1 = orient(s.0, s.1, t.0);
        let o2 = orient(s.0, s.1, t.1);
        if o1 != 0 || o2 != 0 || shared == 2 {
            return shared == 2;
        }
        let other = if t.0 == s.0 || t.0 == s.1 { t.1 } else { t.0 };
        let mine = if s.0 == t.0 || s.0 == t.1 { s.1 } else { s.0 };
        return on_segment(s.0, s.1, other) || on_segment(t.0, t.1, mine);
    }
    let o1 = orient(s.0, s.1, t.0);
    let o2 = orient(s.0, s.1, t.1);
    let o3 = orient(t.0, t.1, s.0);
    let o4 = orient(t.0, t.1, s.1);
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(s.0, s.1, t.0))
        || (o2 == 0 && on_segment(s.0, s.1, t.1))
        || (o3 == 0 && on_segment(t.0, t.1, s.0))
        || (o4 == 0 && on_segment(t.0, t.1, s.1))
}

#[derive(Serialize)]
struct QecFile {
    schema: String,
    #[serde(flatten)]
    graph: QecGraph,
}

impl QecGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&QecFile {
            schema: QEC_SCHEMA.into(),
            graph: self.clone(),
        })
        .expect("QEC graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        match v.get("schema").and_then(|s| s.as_str()) {
            Some(QEC_SCHEMA) => {}
            other => {
                return Err(Error::Schema(format!(
                    "expected schema `{QEC_SCHEMA}`, found {other:?}"
                )))
            }
        }
        let mut v = v;
        v.as_object_mut().unwrap().remove("schema");
        let g: QecGraph = serde_json::from_value(v).map_err(|e| Error::Schema(e.to_string()))?;
        let rebuilt = QecGraph::new(g.family.clone(), g.n_data, g.checks.clone())?;
        Ok(QecGraph {
            logical_qubits: g.logical_qubits,
            threshold: g.threshold,
            layout: g.layout,
            ..rebuilt
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_detection() {
        assert!(segments_cross(((0, 0), (2, 2)), ((0, 2), (2, 0))));
        assert!(!segments_cross(((0, 0), (1, 1)), ((1, 1), (2, 0))));
        assert!(!segments_cross(((0, 0), (1, 1)), ((2, 2), (3, 3))));
        assert!(segments_cross(((0, 0), (2, 2)), ((1, 1), (3, 3))));
        assert!(segments_cross(((0, 0), (2, 0)), ((1, -1), (1, 1))));
    }

    #[test]
    fn rejects_empty_and_out_of_range_checks() {
        let empty = Check {
            kind: CheckKind::X,
            data: vec![],
        };
        assert!(QecGraph::new(CodeFamily::Custom, 3, vec![empty]).is_err());
        let far = Check {
            kind: CheckKind::Z,
            data: vec![0, 3],
        };
        assert!(QecGraph::new(CodeFamily::Custom, 3, vec![far]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = surface_code_graph(3).unwrap();
        let back = QecGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert!(QecGraph::from_json("{\"n_data\": 1}").is_err());
    }
}
