//! Multi-tier qubit interaction graph of a modular machine.
//!
//! Inside an ELU every pair of ions shares a COLLECTIVE edge (the chain is a
//! complete graph through its shared motion); pairs within the fast-gate
//! distance additionally share a FAST edge. PHOTONIC edges join communication
//! ions of different ELUs and are added on demand.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::arch::ArchitectureSpec;
use crate::error::{Error, Result};
use crate::rates::{gate_times, mean_connection_rate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Memory,
    Communication,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitNode {
    /// Index into `ArchitectureSpec::elus`.
    pub elu: usize,
    pub elu_id: String,
    pub position: usize,
    pub role: Role,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeKind {
    Fast,
    Collective,
    Photonic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    /// s
    pub time_cost: f64,
    pub fidelity: f64,
}

/// Which edges a traversal may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Fast,
    Collective,
    FastPhotonic,
}

impl Tier {
    fn admits(self, kind: EdgeKind) -> bool {
        match self {
            Tier::Fast => kind == EdgeKind::Fast,
            Tier::Collective => kind == EdgeKind::Collective,
            Tier::FastPhotonic => matches!(kind, EdgeKind::Fast | EdgeKind::Photonic),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub nodes: Vec<QubitNode>,
    pub edges: Vec<Edge>,
    photonic_time_cost: f64,
    photonic_fidelity: f64,
}

impl InteractionGraph {
    pub fn node_index(&self, elu: usize, position: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.elu == elu && n.position == position)
    }

    pub fn edges_of(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges_of(kind).count()
    }

    pub fn has_edge(&self, a: usize, b: usize, kind: EdgeKind) -> bool {
        let (a, b) = (a.min(b), a.max(b));
        self.edges.iter().any(|e| e.kind == kind && e.a == a && e.b == b)
    }

    /// Adds a PHOTONIC edge between two communication ions of different ELUs.
    pub fn add_photonic_link(&mut self, a: usize, b: usize) -> Result<()> {
        let (na, nb) = match (self.nodes.get(a), self.nodes.get(b)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Error::Domain(format!("no such qubit node {a} or {b}"))),
        };
        if na.role != Role::Communication || nb.role != Role::Communication {
            return Err(Error::Domain("photonic links join communication ions only".into()));
        }
        if na.elu == nb.elu {
            return Err(Error::Domain("photonic links join ions of distinct ELUs".into()));
        }
        if !self.has_edge(a, b, EdgeKind::Photonic) {
            self.edges.push(Edge {
                a: a.min(b),
                b: a.max(b),
                kind: EdgeKind::Photonic,
                time_cost: self.photonic_time_cost,
                fidelity: self.photonic_fidelity,
            });
        }
        Ok(())
    }

    fn adjacency(&self, tier: Tier) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in self.edges.iter().filter(|e| tier.admits(e.kind)) {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj
    }

    /// Hop counts from `source` over `tier`; `None` marks unreachable nodes.
    pub fn bfs(&self, source: usize, tier: Tier) -> Vec<Option<usize>> {
        bfs(&self.adjacency(tier), source)
    }

    /// Graphviz text for the edges admitted by `tier`.
    pub fn to_dot(&self, tier: Tier) -> String {
        let mut out = String::from("graph ionfab {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = match n.role {
                Role::Memory => "circle",
                Role::Communication => "doublecircle",
            };
            let _ = writeln!(out, "  q{i} [label=\"{}:{}\", shape={shape}];", n.elu_id, n.position);
        }
        for e in self.edges.iter().filter(|e| tier.admits(e.kind)) {
            let color = match e.kind {
                EdgeKind::Fast => "red",
                EdgeKind::Collective => "gray",
                EdgeKind::Photonic => "blue",
            };
            let _ = writeln!(out, "  q{} -- q{} [color={color}];", e.a, e.b);
        }
        out.push_str("}\n");
        out
    }

    /// Copy holding only the edges admitted by `tier`, for export.
    pub fn restricted(&self, tier: Tier) -> InteractionGraph {
        InteractionGraph {
            nodes: self.nodes.clone(),
            edges: self.edges.iter().filter(|e| tier.admits(e.kind)).cloned().collect(),
            ..self.clone()
        }
    }
}

fn bfs(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Builds the intra-ELU tiers. No PHOTONIC edges are present yet.
pub fn build_interaction_graph(spec: &ArchitectureSpec) -> Result<InteractionGraph> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let fidelity = spec.costs.two_qubit_gate_fidelity;
    for (ei, elu) in spec.elus.iter().enumerate() {
        let times = gate_times(spec, elu)?;
        let base = nodes.len();
        for p in 0..elu.n_ions {
            nodes.push(QubitNode {
                elu: ei,
                elu_id: elu.id.clone(),
                position: p,
                role: if elu.is_comm(p) {
                    Role::Communication
                } else {
                    Role::Memory
                },
            });
        }
        for i in 0..elu.n_ions {
            for j in i + 1..elu.n_ions {
                edges.push(Edge {
                    a: base + i,
                    b: base + j,
                    kind: EdgeKind::Collective,
                    time_cost: times.slow,
                    fidelity,
                });
                if j - i <= elu.fast_gate_distance {
                    edges.push(Edge {
                        a: base + i,
                        b: base + j,
                        kind: EdgeKind::Fast,
                        time_cost: times.fast,
                        fidelity,
                    });
                }
            }
        }
    }
    let link = &spec.link;
    let rate = mean_connection_rate(link.attempt_rate, link.collection_fraction, link.detector_efficiency)?;
    Ok(InteractionGraph {
        nodes,
        edges,
        photonic_time_cost: 1.0 / rate + spec.costs.teleport_overhead_time + spec.costs.classical_latency,
        photonic_fidelity: fidelity * fidelity,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceProfile {
    /// hop count → number of unordered qubit pairs
    pub histogram: BTreeMap<usize, usize>,
    pub unreachable_pairs: usize,
    pub max_distance: usize,
}

/// Histogram of shortest-path hop counts over all unordered qubit pairs.
pub fn graph_distance_profile(g: &InteractionGraph, tier: Tier) -> DistanceProfile {
    let adj = g.adjacency(tier);
    let mut profile = DistanceProfile::default();
    for s in 0..adj.len() {
        let dist = bfs(&adj, s);
        for d in dist.iter().skip(s + 1) {
            match d {
                Some(h) => {
                    *profile.histogram.entry(*h).or_default() += 1;
                    profile.max_distance = profile.max_distance.max(*h);
                }
                None => profile.unreachable_pairs += 1,
            }
        }
    }
    profile
}
