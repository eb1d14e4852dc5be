//! Embedding a QEC graph onto host hardware: a 2D nearest-neighbour grid or the
//! modular ELU architecture.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::QecGraph;
use crate::arch::ArchitectureSpec;
use crate::error::{Error, Result};

/// How QEC nodes (data first, then checks) are laid onto grid cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Placement {
    RowMajor,
    Random {
        seed: u64,
    },
    /// The code's own planar layout, rotated 45° onto the grid axes.
    Native,
    /// One `(column, row)` cell per node on a `side`×`side` grid.
    Explicit {
        side: usize,
        cells: Vec<(usize, usize)>,
    },
}

/// How QEC nodes are distributed over ELUs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Partition {
    GreedyCut,
    RoundRobin,
    /// ELU id per node.
    UserMap {
        elus: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Host {
    Grid { side: usize },
    Modular { elus: Vec<String>, capacity: Vec<usize> },
}

/// One check-to-data arm of a syndrome-extraction route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    pub data: usize,
    pub length: usize,
    /// Crosses an ELU boundary (modular host only).
    pub remote: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRoute {
    pub check: usize,
    pub arms: Vec<Hop>,
    pub route_length: usize,
    pub swaps: usize,
    /// Longest arm.
    pub span: usize,
    /// Distinct ELUs other than the ancilla's own that the check touches.
    pub remote_elus: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub host: Host,
    /// Grid cell index (row·side + column) or ELU index per node.
    pub assignment: Vec<usize>,
    pub routes: Vec<CheckRoute>,
    pub swap_count: usize,
    pub max_check_span: usize,
    pub total_route_length: usize,
    pub mean_route_length: f64,
    /// Entangled pairs consumed per syndrome-extraction round.
    pub pairs_per_round: usize,
    /// Longest arm that stays inside one ELU (or any arm, on a grid).
    pub max_intra_hop: usize,
}

impl EmbeddingReport {
    fn from_routes(host: Host, assignment: Vec<usize>, routes: Vec<CheckRoute>) -> Self {
        let total_route_length: usize = routes.iter().map(|r| r.route_length).sum();
        let mean_route_length = if routes.is_empty() {
            0.0
        } else {
            total_route_length as f64 / routes.len() as f64
        };
        Self {
            host,
            assignment,
            swap_count: routes.iter().map(|r| r.swaps).sum(),
            max_check_span: routes.iter().map(|r| r.span).max().unwrap_or(0),
            pairs_per_round: routes.iter().map(|r| r.remote_elus).sum(),
            max_intra_hop: routes
                .iter()
                .flat_map(|r| r.arms.iter().filter(|a| !a.remote).map(|a| a.length))
                .max()
                .unwrap_or(0),
            total_route_length,
            mean_route_length,
            routes,
        }
    }
}

/// Swaps needed to bring a data qubit adjacent to its ancilla and back.
pub fn swaps_for_distance(distance: usize) -> usize {
    2 * distance.saturating_sub(1)
}

fn smallest_square(n: usize) -> usize {
    let mut side = (n as f64).sqrt() as usize;
    while side * side < n {
        side += 1;
    }
    side.max(1)
}

fn grid_cells(code: &QecGraph, placement: &Placement) -> Result<(usize, Vec<(usize, usize)>)> {
    let n = code.n_nodes();
    match placement {
        Placement::RowMajor => {
            let side = smallest_square(n);
            Ok((side, (0..n).map(|i| (i % side, i / side)).collect()))
        }
        Placement::Random { seed } => {
            let side = smallest_square(n);
            let mut cells: Vec<usize> = (0..side * side).collect();
            cells.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
            Ok((side, cells[..n].iter().map(|c| (c % side, c / side)).collect()))
        }
        Placement::Native => {
            let layout = code
                .layout
                .as_ref()
                .ok_or_else(|| Error::Embedding("code has no native layout".into()))?;
            let rotated: Vec<(i64, i64)> = layout
                .data
                .iter()
                .chain(&layout.checks)
                .map(|&(x, y)| ((x + y).div_euclid(2), (x - y).div_euclid(2)))
                .collect();
            let min_u = rotated.iter().map(|p| p.0).min().unwrap_or(0);
            let min_v = rotated.iter().map(|p| p.1).min().unwrap_or(0);
            let cells: Vec<(usize, usize)> = rotated
                .iter()
                .map(|&(u, v)| ((u - min_u) as usize, (v - min_v) as usize))
                .collect();
            let side = cells.iter().map(|&(c, r)| c.max(r) + 1).max().unwrap_or(1);
            Ok((side, cells))
        }
        Placement::Explicit { side, cells } => {
            if cells.len() != n {
                return Err(Error::Embedding(format!(
                    "explicit placement has {} cells for {n} nodes",
                    cells.len()
                )));
            }
            Ok((*side, cells.clone()))
        }
    }
}

/// Place every node on a distinct grid cell and route each check to its data
/// along Manhattan paths.
pub fn embed_on_grid(code: &QecGraph, placement: &Placement) -> Result<EmbeddingReport> {
    let (side, cells) = grid_cells(code, placement)?;
    if code.n_nodes() > side * side {
        return Err(Error::Embedding(format!(
            "{} nodes overflow a {side}x{side} grid",
            code.n_nodes()
        )));
    }
    let mut used = BTreeSet::new();
    for (node, &(c, r)) in cells.iter().enumerate() {
        if c >= side || r >= side {
            return Err(Error::Embedding(format!(
                "node {node} placed off the {side}x{side} grid"
            )));
        }
        if !used.insert((c, r)) {
            return Err(Error::Embedding(format!("cell ({c},{r}) holds two nodes")));
        }
    }
    let routes = code
        .checks
        .iter()
        .enumerate()
        .map(|(ci, check)| {
            let at = cells[code.n_data + ci];
            let arms: Vec<Hop> = check
                .data
                .iter()
                .map(|&d| Hop {
                    data: d,
                    length: at.0.abs_diff(cells[d].0) + at.1.abs_diff(cells[d].1),
                    remote: false,
                })
                .collect();
            CheckRoute {
                check: ci,
                route_length: arms.iter().map(|a| a.length).sum(),
                swaps: arms.iter().map(|a| swaps_for_distance(a.length)).sum(),
                span: arms.iter().map(|a| a.length).max().unwrap_or(0),
                remote_elus: 0,
                arms,
            }
        })
        .collect();
    let assignment = cells.iter().map(|&(c, r)| r * side + c).collect();
    Ok(EmbeddingReport::from_routes(Host::Grid { side }, assignment, routes))
}

/// Runs `trials` random grid placements in parallel; trial `t` uses seed `base_seed + t`.
pub fn random_placement_ensemble(code: &QecGraph, base_seed: u64, trials: u64) -> Result<Vec<EmbeddingReport>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            embed_on_grid(
                code,
                &Placement::Random {
                    seed: base_seed.wrapping_add(t),
                },
            )
        })
        .collect()
}

/// Partition nodes over the ELUs of `spec` and cost syndrome extraction.
///
/// Intra-ELU arms are one collective-tier hop. Each distinct remote ELU a check
/// touches costs one entangled pair plus a teleported gate, counted as one hop.
pub fn embed_on_modular(code: &QecGraph, spec: &ArchitectureSpec, partition: &Partition) -> Result<EmbeddingReport> {
    let capacity: Vec<usize> = spec.elus.iter().map(|e| e.n_ions).collect();
    let n = code.n_nodes();
    if n > capacity.iter().sum::<usize>() {
        return Err(Error::Embedding(format!(
            "{n} nodes exceed the {} ions of the architecture",
            capacity.iter().sum::<usize>()
        )));
    }
    let assignment = match partition {
        Partition::RoundRobin => round_robin(n, &capacity),
        Partition::GreedyCut => greedy_cut(code, &capacity),
        Partition::UserMap { elus } => {
            if elus.len() != n {
                return Err(Error::Embedding(format!("user map covers {} of {n} nodes", elus.len())));
            }
            let a = elus
                .iter()
                .map(|id| spec.elu_index(id).ok_or_else(|| Error::UnknownElu(id.clone())))
                .collect::<Result<Vec<_>>>()?;
            let mut load = vec![0; capacity.len()];
            for &e in &a {
                load[e] += 1;
            }
            if let Some(e) = (0..capacity.len()).find(|&e| load[e] > capacity[e]) {
                return Err(Error::Embedding(format!(
                    "ELU {} holds {} nodes but has {} ions",
                    spec.elus[e].id, load[e], capacity[e]
                )));
            }
            a
        }
    };
    let routes = code
        .checks
        .iter()
        .enumerate()
        .map(|(ci, check)| {
            let home = assignment[code.n_data + ci];
            let arms: Vec<Hop> = check
                .data
                .iter()
                .map(|&d| Hop {
                    data: d,
                    length: 1,
                    remote: assignment[d] != home,
                })
                .collect();
            CheckRoute {
                check: ci,
                route_length: arms.len(),
                swaps: 0,
                span: 1,
                remote_elus: check_pairs(check.data.iter().map(|&d| assignment[d]), home),
                arms,
            }
        })
        .collect();
    let host = Host::Modular {
        elus: spec.elus.iter().map(|e| e.id.clone()).collect(),
        capacity,
    };
    Ok(EmbeddingReport::from_routes(host, assignment, routes))
}

fn check_pairs(data_elus: impl Iterator<Item = usize>, home: usize) -> usize {
    data_elus.filter(|&e| e != home).collect::<BTreeSet<_>>().len()
}

fn round_robin(n: usize, capacity: &[usize]) -> Vec<usize> {
    let mut load = vec![0; capacity.len()];
    let mut out = Vec::with_capacity(n);
    let mut e = 0;
    for _ in 0..n {
        while load[e] >= capacity[e] {
            e = (e + 1) % capacity.len();
        }
        out.push(e);
        load[e] += 1;
        e = (e + 1) % capacity.len();
    }
    out
}

/// Node-to-check incidence used by the partitioner: for data nodes, the checks
/// containing them; for check nodes, the check itself.
fn incident_checks(code: &QecGraph) -> Vec<Vec<usize>> {
    let mut inc = vec![Vec::new(); code.n_nodes()];
    for (ci, c) in code.checks.iter().enumerate() {
        inc[code.n_data + ci].push(ci);
        for &d in &c.data {
            inc[d].push(ci);
        }
    }
    inc
}

fn partition_cost(code: &QecGraph, assignment: &[usize]) -> usize {
    (0..code.n_checks()).map(|ci| check_cost(code, assignment, ci)).sum()
}

fn check_cost(code: &QecGraph, assignment: &[usize], ci: usize) -> usize {
    let home = assignment[code.n_data + ci];
    check_pairs(code.checks[ci].data.iter().map(|&d| assignment[d]), home)
}

/// Multi-start local search: one start grows ELUs greedily around unassigned
/// seeds, the other is round-robin; both are refined by moves and swaps that
/// strictly lower pair consumption and the cheaper result wins.
fn greedy_cut(code: &QecGraph, capacity: &[usize]) -> Vec<usize> {
    let inc = incident_checks(code);
    let neighbours = node_neighbours(code);
    let starts = [grow(code, &neighbours, capacity), round_robin(code.n_nodes(), capacity)];
    starts
        .into_iter()
        .map(|s| {
            let refined = refine(code, &inc, capacity, s);
            (partition_cost(code, &refined), refined)
        })
        .min_by_key(|(cost, _)| *cost)
        .map(|(_, a)| a)
        .expect("two starts")
}

fn node_neighbours(code: &QecGraph) -> Vec<Vec<usize>> {
    let mut nb = vec![Vec::new(); code.n_nodes()];
    for (d, ci) in code.edges() {
        let c = code.n_data + ci;
        nb[d].push(c);
        nb[c].push(d);
    }
    nb
}

fn grow(code: &QecGraph, neighbours: &[Vec<usize>], capacity: &[usize]) -> Vec<usize> {
    let n = code.n_nodes();
    let mut assignment = vec![usize::MAX; n];
    let mut remaining = n;
    for (e, &cap) in capacity.iter().enumerate() {
        let mut gain = vec![0usize; n];
        let mut placed = 0;
        while placed < cap && remaining > 0 {
            // most-connected unassigned node, lowest index on ties; a fresh
            // seed when nothing connects
            let next = (0..n)
                .filter(|&v| assignment[v] == usize::MAX)
                .max_by_key(|&v| (gain[v], std::cmp::Reverse(v)))
                .expect("remaining > 0");
            assignment[next] = e;
            for &w in &neighbours[next] {
                gain[w] += 1;
            }
            placed += 1;
            remaining -= 1;
        }
    }
    assignment
}

fn refine(code: &QecGraph, inc: &[Vec<usize>], capacity: &[usize], mut a: Vec<usize>) -> Vec<usize> {
    let n = a.len();
    let mut load = vec![0; capacity.len()];
    for &e in &a {
        load[e] += 1;
    }
    let local = |a: &[usize], nodes: &[usize]| -> usize {
        let checks: BTreeSet<usize> = nodes.iter().flat_map(|&v| inc[v].iter().copied()).collect();
        checks.iter().map(|&ci| check_cost(code, a, ci)).sum()
    };
    for _ in 0..50 {
        let mut improved = false;
        for v in 0..n {
            for e in 0..capacity.len() {
                if e == a[v] || load[e] >= capacity[e] {
                    continue;
                }
                let before = local(&a, &[v]);
                let old = a[v];
                a[v] = e;
                if local(&a, &[v]) < before {
                    load[old] -= 1;
                    load[e] += 1;
                    improved = true;
                } else {
                    a[v] = old;
                }
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                if a[u] == a[v] {
                    continue;
                }
                let before = local(&a, &[u, v]);
                a.swap(u, v);
                if local(&a, &[u, v]) < before {
                    improved = true;
                } else {
                    a.swap(u, v);
                }
            }
        }
        if !improved {
            break;
        }
    }
    a
}
