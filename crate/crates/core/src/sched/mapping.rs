//! Program-qubit placement onto memory ions.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, GateKind};
use crate::arch::ArchitectureSpec;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IonSite {
    pub elu: String,
    pub position: usize,
}

/// Program qubit `q` lives at `sites[q]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitMap {
    pub sites: Vec<IonSite>,
}

impl QubitMap {
    /// Checks injectivity, known ELUs and memory-ion positions.
    pub fn validate(&self, spec: &ArchitectureSpec) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (q, s) in self.sites.iter().enumerate() {
            let elu = spec.elu(&s.elu).ok_or_else(|| Error::UnknownElu(s.elu.clone()))?;
            if s.position >= elu.n_ions || elu.is_comm(s.position) {
                return Err(Error::Mapping(format!(
                    "q{q} mapped to {}:{}, which is not a memory ion",
                    s.elu, s.position
                )));
            }
            if !seen.insert(s) {
                return Err(Error::Mapping(format!(
                    "q{q} shares ion {}:{} with another qubit",
                    s.elu, s.position
                )));
            }
        }
        Ok(())
    }

    pub fn elu_indices(&self, spec: &ArchitectureSpec) -> Vec<usize> {
        self.sites
            .iter()
            .map(|s| spec.elu_index(&s.elu).expect("validated map"))
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapStrategy {
    RoundRobin,
    GreedyInteractionCut,
    User { map: QubitMap },
}

fn capacities(spec: &ArchitectureSpec) -> Vec<usize> {
    spec.elus.iter().map(|e| e.memory_positions().len()).collect()
}

/// Two-qubit ops whose operands sit in different ELUs under `elu_of`.
pub fn crossing_count(circuit: &Circuit, elu_of: &[usize]) -> usize {
    circuit
        .interaction_pairs()
        .filter(|&(a, b)| elu_of[a] != elu_of[b])
        .count()
}

/// Turns an ELU-per-qubit assignment into ion sites: within each ELU, qubits
/// take memory positions in order of first use in the circuit.
pub fn sites_for(circuit: &Circuit, spec: &ArchitectureSpec, elu_of: &[usize]) -> QubitMap {
    let mut first_use = vec![usize::MAX; circuit.n_qubits];
    for (i, op) in circuit.ops.iter().enumerate() {
        for &q in &op.qubits {
            first_use[q] = first_use[q].min(i);
        }
    }
    let mut order: Vec<usize> = (0..circuit.n_qubits).collect();
    order.sort_by_key(|&q| (first_use[q], q));
    let free: Vec<Vec<usize>> = spec.elus.iter().map(|e| e.memory_positions()).collect();
    let mut used = vec![0; spec.elus.len()];
    let mut sites = vec![None; circuit.n_qubits];
    for q in order {
        let e = elu_of[q];
        sites[q] = Some(IonSite {
            elu: spec.elus[e].id.clone(),
            position: free[e][used[e]],
        });
        used[e] += 1;
    }
    QubitMap {
        sites: sites.into_iter().map(|s| s.expect("every qubit placed")).collect(),
    }
}

pub fn assign_qubits(circuit: &Circuit, spec: &ArchitectureSpec, strategy: &MapStrategy) -> Result<QubitMap> {
    let cap = capacities(spec);
    let total: usize = cap.iter().sum();
    if circuit.n_qubits > total {
        return Err(Error::Mapping(format!(
            "{} qubits exceed the {total} memory ions",
            circuit.n_qubits
        )));
    }
    let map = match strategy {
        MapStrategy::RoundRobin => sites_for(circuit, spec, &round_robin(circuit.n_qubits, &cap)),
        MapStrategy::GreedyInteractionCut => sites_for(circuit, spec, &greedy_cut(circuit, &cap)),
        MapStrategy::User { map } => {
            if map.sites.len() != circuit.n_qubits {
                return Err(Error::Mapping(format!(
                    "user map places {} of {} qubits",
                    map.sites.len(),
                    circuit.n_qubits
                )));
            }
            map.clone()
        }
    };
    map.validate(spec)?;
    Ok(map)
}

fn round_robin(n: usize, cap: &[usize]) -> Vec<usize> {
    let mut load = vec![0; cap.len()];
    let mut e = 0;
    (0..n)
        .map(|_| {
            while load[e] >= cap[e] {
                e = (e + 1) % cap.len();
            }
            let here = e;
            load[e] += 1;
            e = (e + 1) % cap.len();
            here
        })
        .collect()
}

/// Symmetric interaction weights. GLOBAL_MS operands must share an ELU, so
/// they are tied with a weight that dominates any count of ordinary gates.
fn weights(circuit: &Circuit) -> Vec<Vec<u64>> {
    let n = circuit.n_qubits;
    let heavy = 1 + circuit.ops.len() as u64;
    let mut w = vec![vec![0u64; n]; n];
    for op in &circuit.ops {
        let add = match op.kind {
            k if k.is_two_qubit() => 1,
            GateKind::GlobalMs => heavy,
            _ => continue,
        };
        for (i, &a) in op.qubits.iter().enumerate() {
            for &b in &op.qubits[i + 1..] {
                w[a][b] += add;
                w[b][a] += add;
            }
        }
    }
    w
}

fn cut_weight(w: &[Vec<u64>], elu_of: &[usize]) -> u64 {
    let n = elu_of.len();
    let mut total = 0;
    for a in 0..n {
        for b in a + 1..n {
            if elu_of[a] != elu_of[b] {
                total += w[a][b];
            }
        }
    }
    total
}

/// Greedy graph growing (each ELU in turn absorbs the unplaced qubit most
/// strongly tied to it) followed by improving moves and swaps; the
/// round-robin layout is refined the same way and the lighter cut is kept.
fn greedy_cut(circuit: &Circuit, cap: &[usize]) -> Vec<usize> {
    let n = circuit.n_qubits;
    let w = weights(circuit);
    let mut grown = vec![usize::MAX; n];
    let mut placed = 0;
    for (e, &c) in cap.iter().enumerate() {
        let mut gain = vec![0u64; n];
        for _ in 0..c {
            if placed == n {
                break;
            }
            let q = (0..n)
                .filter(|&q| grown[q] == usize::MAX)
                .max_by_key(|&q| (gain[q], std::cmp::Reverse(q)))
                .expect("unplaced qubit");
            grown[q] = e;
            placed += 1;
            for (r, g) in gain.iter_mut().enumerate() {
                *g += w[q][r];
            }
        }
    }
    let starts = [grown, round_robin(n, cap)];
    starts
        .into_iter()
        .map(|s| refine(&w, cap, s))
        .min_by_key(|a| cut_weight(&w, a))
        .expect("two starts")
}

fn refine(w: &[Vec<u64>], cap: &[usize], mut a: Vec<usize>) -> Vec<usize> {
    let n = a.len();
    let mut load = vec![0; cap.len()];
    for &e in &a {
        load[e] += 1;
    }
    // external minus internal weight of q if it sat in ELU e
    let tie = |a: &[usize], q: usize, e: usize| -> i64 {
        (0..n)
            .filter(|&r| r != q)
            .map(|r| if a[r] == e { w[q][r] as i64 } else { 0 })
            .sum()
    };
    loop {
        let mut improved = false;
        for q in 0..n {
            for e in 0..cap.len() {
                if e != a[q] && load[e] < cap[e] && tie(&a, q, e) > tie(&a, q, a[q]) {
                    load[a[q]] -= 1;
                    load[e] += 1;
                    a[q] = e;
                    improved = true;
                }
            }
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p] == a[q] {
                    continue;
                }
                let before = cut_weight(w, &a);
                a.swap(p, q);
                if cut_weight(w, &a) < before {
                    improved = true;
                } else {
                    a.swap(p, q);
                }
            }
        }
        if !improved {
            return a;
        }
    }
}

pub const BRUTE_FORCE_MAX_QUBITS: usize = 8;
pub const BRUTE_FORCE_MAX_ELUS: usize = 3;

/// Exhaustive minimum-crossing assignment. Among optimal assignments the
/// lexicographically smallest ELU-index vector wins.
pub fn brute_force_best_map(circuit: &Circuit, spec: &ArchitectureSpec) -> Result<(QubitMap, usize)> {
    let n = circuit.n_qubits;
    let k = spec.elus.len();
    if n > BRUTE_FORCE_MAX_QUBITS || k > BRUTE_FORCE_MAX_ELUS {
        return Err(Error::TooLarge(format!(
            "brute-force mapping supports ≤ {BRUTE_FORCE_MAX_QUBITS} qubits and ≤ {BRUTE_FORCE_MAX_ELUS} ELUs, got {n} and {k}"
        )));
    }
    let cap = capacities(spec);
    if n > cap.iter().sum() {
        return Err(Error::Mapping(format!("{n} qubits exceed the memory ions")));
    }
    let global_sets: Vec<&Vec<usize>> = circuit
        .ops
        .iter()
        .filter(|op| op.kind == GateKind::GlobalMs)
        .map(|op| &op.qubits)
        .collect();
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut a = vec![0usize; n];
    // odometer in lexicographic order, most significant digit first
    loop {
        let mut load = vec![0; k];
        for &e in &a {
            load[e] += 1;
        }
        let fits = (0..k).all(|e| load[e] <= cap[e]);
        let global_ok = global_sets.iter().all(|s| s.iter().all(|&q| a[q] == a[s[0]]));
        if fits && global_ok {
            let c = crossing_count(circuit, &a);
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, a.clone()));
            }
        }
        let Some(i) = (0..n).rev().find(|&i| a[i] + 1 < k) else {
            break;
        };
        a[i] += 1;
        for d in &mut a[i + 1..] {
            *d = 0;
        }
    }
    let (c, a) =
        best.ok_or_else(|| Error::Mapping("no assignment satisfies capacity and GLOBAL_MS grouping".into()))?;
    Ok((sites_for(circuit, spec, &a), c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::EluSpec;
    use crate::sched::parse_circuit;

    /// ELUs with `memory` memory ions each (two comm ions at the ends).
    pub(crate) fn arch_with_memory(memory: &[usize]) -> ArchitectureSpec {
        let mut spec = ArchitectureSpec::reference(memory.len());
        for (elu, &m) in spec.elus.iter_mut().zip(memory) {
            elu.n_ions = m + 2;
            elu.comm_ion_indices = EluSpec::end_comm_indices(m + 2, 2);
            elu.fast_gate_distance = 1;
        }
        spec
    }

    fn ring4() -> Circuit {
        parse_circuit("qubits 4\nCNOT q0 q1\nCNOT q1 q2\nCNOT q2 q3\nCNOT q3 q0\n").unwrap()
    }

    #[test]
    fn one_elu_has_no_crossings() {
        let spec = arch_with_memory(&[6]);
        let c = ring4();
        let m = assign_qubits(&c, &spec, &MapStrategy::GreedyInteractionCut).unwrap();
        assert_eq!(crossing_count(&c, &m.elu_indices(&spec)), 0);
        assert_eq!(brute_force_best_map(&c, &spec).unwrap().1, 0);
    }

    #[test]
    fn ring_on_two_by_two() {
        let spec = arch_with_memory(&[2, 2]);
        let (map, crossing) = brute_force_best_map(&ring4(), &spec).unwrap();
        assert_eq!(crossing, 2);
        // lexicographic tie-break: q0 q1 in A
        assert_eq!(map.elu_indices(&spec), vec![0, 0, 1, 1]);
    }

    #[test]
    fn greedy_between_oracle_and_round_robin() {
        let spec = arch_with_memory(&[3, 3]);
        let c = parse_circuit(
            "qubits 6\nCNOT q0 q3\nCNOT q3 q0\nMS q1 q4\nCNOT q2 q5\nCNOT q0 q1\nCNOT q4 q5\nCNOT q0 q3\n",
        )
        .unwrap();
        let greedy = assign_qubits(&c, &spec, &MapStrategy::GreedyInteractionCut).unwrap();
        let rr = assign_qubits(&c, &spec, &MapStrategy::RoundRobin).unwrap();
        let (_, best) = brute_force_best_map(&c, &spec).unwrap();
        let g = crossing_count(&c, &greedy.elu_indices(&spec));
        let r = crossing_count(&c, &rr.elu_indices(&spec));
        assert!(best <= g && g <= r, "{best} {g} {r}");
    }

    #[test]
    fn user_map_errors() {
        let spec = arch_with_memory(&[3, 3]);
        let c = ring4();
        let site = |e: &str, p| IonSite {
            elu: e.into(),
            position: p,
        };
        let dup = QubitMap {
            sites: vec![site("A", 1), site("A", 1), site("B", 1), site("B", 2)],
        };
        assert!(assign_qubits(&c, &spec, &MapStrategy::User { map: dup }).is_err());
        let comm = QubitMap {
            sites: vec![site("A", 0), site("A", 1), site("B", 1), site("B", 2)],
        };
        assert!(assign_qubits(&c, &spec, &MapStrategy::User { map: comm }).is_err());
        let short = QubitMap {
            sites: vec![site("A", 1)],
        };
        assert!(assign_qubits(&c, &spec, &MapStrategy::User { map: short }).is_err());
        let unknown = QubitMap {
            sites: vec![site("A", 1), site("A", 2), site("Z", 1), site("B", 2)],
        };
        assert!(matches!(
            assign_qubits(&c, &spec, &MapStrategy::User { map: unknown }),
            Err(Error::UnknownElu(_))
        ));
    }

    #[test]
    fn capacity_and_size_guards() {
        let spec = arch_with_memory(&[1, 1]);
        assert!(assign_qubits(&ring4(), &spec, &MapStrategy::RoundRobin).is_err());
        let big = parse_circuit("qubits 9\nX q0\n").unwrap();
        assert!(matches!(
            brute_force_best_map(&big, &arch_with_memory(&[9])),
            Err(Error::TooLarge(_))
        ));
        assert!(brute_force_best_map(&ring4(), &arch_with_memory(&[1, 1, 1, 1])).is_err());
    }

    #[test]
    fn global_ms_kept_together() {
        let spec = arch_with_memory(&[3, 3]);
        let c = parse_circuit("qubits 4\nGLOBAL_MS q0 q2 q3\nCNOT q0 q1\nCNOT q1 q2\n").unwrap();
        let m = assign_qubits(&c, &spec, &MapStrategy::GreedyInteractionCut).unwrap();
        let e = m.elu_indices(&spec);
        assert!(e[0] == e[2] && e[2] == e[3]);
        let (bm, _) = brute_force_best_map(&c, &spec).unwrap();
        let e = bm.elu_indices(&spec);
        assert!(e[0] == e[2] && e[2] == e[3]);
    }
}
