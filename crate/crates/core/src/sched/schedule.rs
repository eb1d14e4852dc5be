//! ASAP list scheduling of a mapped circuit.
//!
//! Every op waits for the previous op on each of its ions and then starts.
//! Remote two-qubit gates additionally wait for an entangled pair between the
//! two ELUs: immediately in [`PairSupply::Ideal`], or when the photonic
//! simulator delivers one in [`PairSupply::Buffered`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, GateKind};
use super::mapping::{IonSite, QubitMap};
use crate::arch::{validate_architecture, ArchitectureSpec};
use crate::error::{Error, Result};
use crate::netsim::{Link, Port, ScheduleEntry, SimOptions, Simulator, SwitchConfig};
use crate::rates::{gate_times, GateTimes};

pub const SCHEDULE_SCHEMA: &str = "ionfab-schedule/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSupply {
    /// A pair is on hand whenever a remote gate becomes ready.
    Ideal,
    /// Pairs come from a co-simulated photonic network with the given seed.
    Buffered { seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleOptions {
    pub pairs: PairSupply,
    /// Forbid two-qubit gates beyond the fast-gate distance and route with
    /// swaps instead. GLOBAL_MS is rejected in this mode.
    pub strict_proximity: bool,
    /// Charge `shuttle_cost_time` on a measurement while other qubits in the
    /// same ELU still have gates ahead of them.
    pub measurement_isolation: bool,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            pairs: PairSupply::Ideal,
            strict_proximity: false,
            measurement_isolation: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub start: f64,
    pub duration: f64,
    pub gate: String,
    /// Program qubits. For a swap, the qubits that moved.
    pub operands: Vec<usize>,
    pub ions: Vec<IonSite>,
    pub elus: Vec<String>,
    /// `local`, `shuttle` or `pair:A-B`.
    pub resource: String,
    /// Time spent waiting for an entangled pair.
    pub wait: f64,
    pub fidelity: f64,
}

impl TimelineEntry {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityBreakdown {
    pub gates: f64,
    pub idle: f64,
    pub total: f64,
}

impl FidelityBreakdown {
    /// Π gate fidelities × Π exp(−idle/T2).
    pub fn from_terms(gate_fidelities: impl IntoIterator<Item = f64>, idle_times: &[f64], t2: f64) -> Self {
        let gates: f64 = gate_fidelities.into_iter().product();
        let idle = (-idle_times.iter().sum::<f64>() / t2).exp();
        Self {
            gates,
            idle,
            total: gates * idle,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub schema: String,
    pub pair_supply: PairSupply,
    pub makespan: f64,
    pub remote_ops: usize,
    pub pairs_consumed: usize,
    pub swaps_inserted: usize,
    pub timeline: Vec<TimelineEntry>,
    /// Per program qubit: makespan minus time spent in gates.
    pub idle: Vec<f64>,
    pub fidelity: FidelityBreakdown,
}

impl ScheduleResult {
    /// Pairs of timeline indices whose intervals overlap on a shared ion.
    pub fn ion_conflicts(&self) -> Vec<(usize, usize)> {
        let mut by_ion: BTreeMap<&IonSite, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.timeline.iter().enumerate() {
            for ion in &e.ions {
                by_ion.entry(ion).or_default().push(i);
            }
        }
        let mut out = Vec::new();
        for ops in by_ion.values_mut() {
            ops.sort_by(|&a, &b| self.timeline[a].start.total_cmp(&self.timeline[b].start));
            for w in ops.windows(2) {
                if self.timeline[w[1]].start < self.timeline[w[0]].end() {
                    out.push((w[0], w[1]));
                }
            }
        }
        out
    }

    /// Timeline as CSV with header `start_s,dur_s,gate,operands,elus,resource`.
    pub fn timeline_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["start_s", "dur_s", "gate", "operands", "elus", "resource"])
            .expect("in-memory write");
        for e in &self.timeline {
            let operands: Vec<String> = e.operands.iter().map(|q| format!("q{q}")).collect();
            w.write_record([
                e.start.to_string(),
                e.duration.to_string(),
                e.gate.clone(),
                operands.join(" "),
                e.elus.join(" "),
                e.resource.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}

/// Recomputes the fidelity estimate from a result's timeline and idle times.
pub fn fidelity_estimate(result: &ScheduleResult, spec: &ArchitectureSpec) -> FidelityBreakdown {
    FidelityBreakdown::from_terms(
        result.timeline.iter().map(|e| e.fidelity),
        &result.idle,
        spec.species.qubit_coherence_time,
    )
}

#[derive(Clone, Debug)]
enum OpKind {
    Local { duration: f64 },
    Remote { elus: (usize, usize), overhead: f64 },
}

#[derive(Clone, Debug)]
struct PhysOp {
    gate: String,
    operands: Vec<usize>,
    ions: Vec<(usize, usize)>,
    kind: OpKind,
    resource: String,
    fidelity: f64,
}

struct Planner<'a> {
    spec: &'a ArchitectureSpec,
    times: Vec<GateTimes>,
    /// (elu, position) → program qubit
    occupant: BTreeMap<(usize, usize), usize>,
    site: Vec<(usize, usize)>,
    ops: Vec<PhysOp>,
    swaps: usize,
}

impl Planner<'_> {
    fn two_qubit_time(&self, elu: usize, pa: usize, pb: usize) -> f64 {
        if pa.abs_diff(pb) <= self.spec.elus[elu].fast_gate_distance {
            self.times[elu].fast
        } else {
            self.times[elu].slow
        }
    }

    fn elu_id(&self, e: usize) -> String {
        self.spec.elus[e].id.clone()
    }

    /// Moves qubit `q` toward position `toward` until it is within the
    /// fast-gate distance, one fast swap per hop.
    fn route(&mut self, q: usize, toward: usize) -> Result<()> {
        let (e, _) = self.site[q];
        let elu = &self.spec.elus[e];
        let d = elu.fast_gate_distance;
        loop {
            let p = self.site[q].1;
            if p.abs_diff(toward) <= d {
                return Ok(());
            }
            let reach: Vec<usize> = if p < toward {
                (p + 1..=p + d).rev().collect()
            } else {
                (p.saturating_sub(d)..p).collect()
            };
            let target = reach
                .into_iter()
                .find(|&t| !elu.is_comm(t))
                .ok_or_else(|| Error::Schedule(format!("no memory ion within reach of {}:{p}", elu.id)))?;
            let other = self.occupant.remove(&(e, target));
            self.occupant.remove(&(e, p));
            self.occupant.insert((e, target), q);
            self.site[q] = (e, target);
            let mut operands = vec![q];
            if let Some(o) = other {
                self.occupant.insert((e, p), o);
                self.site[o] = (e, p);
                operands.push(o);
            }
            let f2 = self.spec.costs.two_qubit_gate_fidelity;
            self.ops.push(PhysOp {
                gate: "SWAP".into(),
                operands,
                ions: vec![(e, p), (e, target)],
                kind: OpKind::Local {
                    duration: 3.0 * self.times[e].fast,
                },
                resource: "local".into(),
                fidelity: f2.powi(3),
            });
            self.swaps += 1;
        }
    }
}

/// Turns the circuit into physical ops, inserting swaps in strict mode.
fn plan<'a>(
    circuit: &Circuit,
    map: &QubitMap,
    spec: &'a ArchitectureSpec,
    opts: &ScheduleOptions,
) -> Result<Planner<'a>> {
    let times = spec
        .elus
        .iter()
        .map(|e| gate_times(spec, e))
        .collect::<Result<Vec<_>>>()?;
    let site: Vec<(usize, usize)> = map
        .sites
        .iter()
        .map(|s| (spec.elu_index(&s.elu).expect("validated map"), s.position))
        .collect();
    let mut p = Planner {
        spec,
        times,
        occupant: site.iter().enumerate().map(|(q, &s)| (s, q)).collect(),
        site,
        ops: Vec::new(),
        swaps: 0,
    };
    // last program-order op index per qubit, for the static isolation rule
    let mut last_use = vec![0usize; circuit.n_qubits];
    for (i, op) in circuit.ops.iter().enumerate() {
        for &q in &op.qubits {
            last_use[q] = i;
        }
    }
    let f1 = spec.costs.single_qubit_gate_fidelity;
    let f2 = spec.costs.two_qubit_gate_fidelity;
    for (i, op) in circuit.ops.iter().enumerate() {
        let elus: Vec<usize> = op.qubits.iter().map(|&q| p.site[q].0).collect();
        let gate = op.kind.name().to_string();
        match op.kind {
            GateKind::X | GateKind::H | GateKind::Rz => {
                let q = op.qubits[0];
                let e = elus[0];
                p.ops.push(PhysOp {
                    gate,
                    operands: vec![q],
                    ions: vec![p.site[q]],
                    kind: OpKind::Local {
                        duration: spec.elus[e].single_qubit_gate_time,
                    },
                    resource: "local".into(),
                    fidelity: f1,
                });
            }
            GateKind::Measure => {
                let q = op.qubits[0];
                let e = elus[0];
                let busy_neighbour = opts.measurement_isolation
                    && (0..circuit.n_qubits).any(|r| r != q && p.site[r].0 == e && last_use[r] > i);
                let mut duration = spec.species.detection_time;
                if busy_neighbour {
                    duration += spec.elus[e].shuttle_cost_time;
                }
                p.ops.push(PhysOp {
                    gate,
                    operands: vec![q],
                    ions: vec![p.site[q]],
                    kind: OpKind::Local { duration },
                    resource: if busy_neighbour { "shuttle" } else { "local" }.into(),
                    fidelity: 1.0,
                });
            }
            GateKind::Ms | GateKind::Cnot => {
                let (a, b) = (op.qubits[0], op.qubits[1]);
                if elus[0] == elus[1] {
                    let e = elus[0];
                    if opts.strict_proximity {
                        let toward = p.site[b].1;
                        p.route(a, toward)?;
                    }
                    let duration = p.two_qubit_time(e, p.site[a].1, p.site[b].1);
                    p.ops.push(PhysOp {
                        gate,
                        operands: vec![a, b],
                        ions: vec![p.site[a], p.site[b]],
                        kind: OpKind::Local { duration },
                        resource: "local".into(),
                        fidelity: f2,
                    });
                } else {
                    let (ea, eb) = (elus[0], elus[1]);
                    let overhead = spec.costs.teleport_overhead_time
                        + spec.costs.classical_latency
                        + spec.elus[eb].single_qubit_gate_time;
                    let (lo, hi) = (ea.min(eb), ea.max(eb));
                    p.ops.push(PhysOp {
                        gate,
                        operands: vec![a, b],
                        ions: vec![p.site[a], p.site[b]],
                        kind: OpKind::Remote {
                            elus: (lo, hi),
                            overhead,
                        },
                        resource: format!("pair:{}-{}", p.elu_id(lo), p.elu_id(hi)),
                        fidelity: f2 * f2,
                    });
                }
            }
            GateKind::GlobalMs => {
                if opts.strict_proximity {
                    return Err(Error::Schedule(format!(
                        "GLOBAL_MS (op {i}) is not available in strict-proximity mode"
                    )));
                }
                if elus.iter().any(|&e| e != elus[0]) {
                    return Err(Error::Schedule(format!("GLOBAL_MS (op {i}) spans several ELUs")));
                }
                let e = elus[0];
                p.ops.push(PhysOp {
                    gate,
                    operands: op.qubits.clone(),
                    ions: op.qubits.iter().map(|&q| p.site[q]).collect(),
                    kind: OpKind::Local {
                        duration: p.times[e].slow,
                    },
                    resource: "local".into(),
                    fidelity: f2.powi(op.qubits.len() as i32 - 1),
                });
            }
        }
    }
    Ok(p)
}

#[derive(PartialEq)]
struct Ready {
    time: f64,
    op: usize,
}

impl Eq for Ready {}

impl Ord for Ready {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.op.cmp(&self.op))
    }
}

impl PartialOrd for Ready {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One static link per ELU pair that remote gates need, each on a fresh
/// communication ion at both ends.
fn static_switch(spec: &ArchitectureSpec, pairs: &[(usize, usize)]) -> Result<SwitchConfig> {
    let mut next = vec![0usize; spec.elus.len()];
    let mut take = |e: usize| -> Result<Port> {
        let elu = &spec.elus[e];
        let ion = *elu.comm_ion_indices.get(next[e]).ok_or_else(|| {
            Error::Schedule(format!(
                "ELU {} has too few communication ions for its remote partners",
                elu.id
            ))
        })?;
        next[e] += 1;
        Ok(Port::new(elu.id.clone(), ion))
    };
    let mut links = Vec::new();
    for &(a, b) in pairs {
        links.push(Link::new(take(a)?, take(b)?)?);
    }
    SwitchConfig::new(links)
}

pub fn schedule(
    circuit: &Circuit,
    map: &QubitMap,
    spec: &ArchitectureSpec,
    options: &ScheduleOptions,
) -> Result<ScheduleResult> {
    let report = validate_architecture(spec);
    if !report.is_ok() {
        return Err(Error::Validation(report));
    }
    if map.sites.len() != circuit.n_qubits {
        return Err(Error::Schedule(format!(
            "map covers {} of {} qubits",
            map.sites.len(),
            circuit.n_qubits
        )));
    }
    map.validate(spec)?;
    let planner = plan(circuit, map, spec, options)?;
    let ops = planner.ops;
    let n = ops.len();

    // predecessor counts and successor lists keyed by ion
    let mut last_on_ion: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut preds = vec![0usize; n];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, op) in ops.iter().enumerate() {
        for ion in &op.ions {
            if let Some(&j) = last_on_ion.get(ion) {
                if !succs[j].contains(&i) {
                    succs[j].push(i);
                    preds[i] += 1;
                }
            }
            last_on_ion.insert(*ion, i);
        }
    }

    let remote_pairs: Vec<(usize, usize)> = {
        let mut v: Vec<_> = ops
            .iter()
            .filter_map(|o| match o.kind {
                OpKind::Remote { elus, .. } => Some(elus),
                OpKind::Local { .. } => None,
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut sim = match options.pairs {
        PairSupply::Buffered { seed } if !remote_pairs.is_empty() => {
            let links = static_switch(spec, &remote_pairs)?;
            let entry = ScheduleEntry { time: 0.0, links };
            let sim_opts = SimOptions {
                occupancy_series: false,
                ..SimOptions::default()
            };
            Some(Simulator::new(spec, &[entry], f64::INFINITY, seed, sim_opts)?)
        }
        _ => None,
    };

    let mut ready_at = vec![0.0f64; n];
    let mut start = vec![f64::NAN; n];
    let mut end = vec![f64::NAN; n];
    let mut wait = vec![0.0f64; n];
    let mut dur = vec![0.0f64; n];
    let mut heap: BinaryHeap<Ready> = (0..n)
        .filter(|&i| preds[i] == 0)
        .map(|i| Ready { time: 0.0, op: i })
        .collect();
    let mut waiting: BTreeMap<usize, usize> = BTreeMap::new();
    let mut pairs_consumed = 0;

    let release = |i: usize, t: f64, preds: &mut [usize], ready_at: &mut [f64], heap: &mut BinaryHeap<Ready>| {
        for &s in &succs[i] {
            ready_at[s] = ready_at[s].max(t);
            preds[s] -= 1;
            if preds[s] == 0 {
                heap.push(Ready {
                    time: ready_at[s],
                    op: s,
                });
            }
        }
    };

    loop {
        let next_ready = heap.peek().map(|r| r.time);
        if let Some(sim) = sim.as_mut().filter(|_| !waiting.is_empty()) {
            let t_sim = sim.next_event_time();
            if t_sim.is_none() {
                return Err(Error::Schedule("pair supply starved: the link never succeeds".into()));
            }
            if next_ready.is_none_or(|t| t_sim.expect("checked") <= t) {
                for d in sim.step().expect("event available") {
                    let i = waiting.remove(&d.request).expect("request issued by the scheduler");
                    let OpKind::Remote { overhead, .. } = ops[i].kind else {
                        unreachable!("only remote ops request pairs")
                    };
                    pairs_consumed += 1;
                    wait[i] = d.delivered - start[i];
                    dur[i] = wait[i] + overhead;
                    end[i] = start[i] + dur[i];
                    release(i, end[i], &mut preds, &mut ready_at, &mut heap);
                }
                continue;
            }
        }
        let Some(Ready { time: t, op: i }) = heap.pop() else {
            break;
        };
        start[i] = t;
        match ops[i].kind {
            OpKind::Local { duration } => {
                dur[i] = duration;
                end[i] = t + duration;
                release(i, end[i], &mut preds, &mut ready_at, &mut heap);
            }
            OpKind::Remote { elus, overhead } => match sim.as_mut() {
                Some(sim) => {
                    sim.run_until(t);
                    let id = sim.request_indices(t, elus.0, elus.1)?;
                    waiting.insert(id, i);
                }
                None => {
                    pairs_consumed += 1;
                    dur[i] = overhead;
                    end[i] = t + overhead;
                    release(i, end[i], &mut preds, &mut ready_at, &mut heap);
                }
            },
        }
    }
    debug_assert!(end.iter().all(|e| e.is_finite()));

    let makespan = end.iter().copied().fold(0.0, f64::max);
    let mut busy = vec![0.0; circuit.n_qubits];
    let timeline: Vec<TimelineEntry> = ops
        .iter()
        .enumerate()
        .map(|(i, op)| {
            let duration = dur[i];
            for &q in &op.operands {
                busy[q] += duration - wait[i];
            }
            let mut elus: Vec<String> = op.ions.iter().map(|&(e, _)| spec.elus[e].id.clone()).collect();
            elus.dedup();
            TimelineEntry {
                start: start[i],
                duration,
                gate: op.gate.clone(),
                operands: op.operands.clone(),
                ions: op
                    .ions
                    .iter()
                    .map(|&(e, position)| IonSite {
                        elu: spec.elus[e].id.clone(),
                        position,
                    })
                    .collect(),
                elus,
                resource: op.resource.clone(),
                wait: wait[i],
                fidelity: op.fidelity,
            }
        })
        .collect();
    let idle: Vec<f64> = busy.iter().map(|b| (makespan - b).max(0.0)).collect();
    let fidelity = FidelityBreakdown::from_terms(
        timeline.iter().map(|e| e.fidelity),
        &idle,
        spec.species.qubit_coherence_time,
    );
    Ok(ScheduleResult {
        schema: SCHEDULE_SCHEMA.into(),
        pair_supply: options.pairs,
        makespan,
        remote_ops: ops.iter().filter(|o| matches!(o.kind, OpKind::Remote { .. })).count(),
        pairs_consumed,
        swaps_inserted: planner.swaps,
        timeline,
        idle,
        fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::EluSpec;
    use crate::sched::{assign_qubits, parse_circuit, MapStrategy};

    fn site(e: &str, p: usize) -> IonSite {
        IonSite {
            elu: e.into(),
            position: p,
        }
    }

    fn ideal() -> ScheduleOptions {
        ScheduleOptions::default()
    }

    #[test]
    fn adjacent_cnot_takes_fast_time() {
        let spec = ArchitectureSpec::reference(1);
        let c = parse_circuit("qubits 2\nCNOT q0 q1").unwrap();
        let map = QubitMap {
            sites: vec![site("A", 2), site("A", 3)],
        };
        let r = schedule(&c, &map, &spec, &ideal()).unwrap();
        let tau = gate_times(&spec, &spec.elus[0]).unwrap();
        assert_eq!(r.makespan, tau.fast);
        assert_eq!(r.pairs_consumed, 0);
        let far = QubitMap {
            sites: vec![site("A", 2), site("A", 17)],
        };
        assert_eq!(schedule(&c, &far, &spec, &ideal()).unwrap().makespan, tau.slow);
    }

    #[test]
    fn remote_cnot_ideal_is_contract_arithmetic() {
        let spec = ArchitectureSpec::reference(2);
        let c = parse_circuit("qubits 2\nCNOT q0 q1").unwrap();
        let map = QubitMap {
            sites: vec![site("A", 2), site("B", 2)],
        };
        let r = schedule(&c, &map, &spec, &ideal()).unwrap();
        let expected =
            spec.costs.teleport_overhead_time + spec.costs.classical_latency + spec.elus[1].single_qubit_gate_time;
        assert_eq!(r.makespan, expected);
        assert_eq!(r.pairs_consumed, 1);
        assert_eq!(r.timeline[0].resource, "pair:A-B");
        assert!((r.fidelity.gates - 0.999f64.powi(2)).abs() < 1e-15);
    }

    fn wide(n_ions: usize) -> ArchitectureSpec {
        let mut spec = ArchitectureSpec::reference(2);
        for e in &mut spec.elus {
            e.n_ions = n_ions;
            e.comm_ion_indices = EluSpec::end_comm_indices(n_ions, 4);
        }
        spec
    }

    fn parallel_remote(k: usize) -> (Circuit, QubitMap) {
        let mut text = format!("qubits {}\n", 2 * k);
        for i in 0..k {
            text.push_str(&format!("CNOT q{i} q{}\n", k + i));
        }
        let c = parse_circuit(&text).unwrap();
        let sites = (0..k)
            .map(|i| site("A", i + 2))
            .chain((0..k).map(|i| site("B", i + 2)))
            .collect();
        (c, QubitMap { sites })
    }

    #[test]
    fn hundred_remote_cnots_are_pair_bound() {
        let spec = wide(104);
        let (c, map) = parallel_remote(100);
        let opts = ScheduleOptions {
            pairs: PairSupply::Buffered { seed: 7 },
            ..ideal()
        };
        let r = schedule(&c, &map, &spec, &opts).unwrap();
        // 100th arrival of a 100 Hz process: mean 1 s, σ 0.1 s
        assert!((r.makespan - 1.0).abs() < 0.3, "{}", r.makespan);
        assert_eq!(r.pairs_consumed, 100);
        assert_eq!(r.remote_ops, 100);
        assert!(r.ion_conflicts().is_empty());
        let again = schedule(&c, &map, &spec, &opts).unwrap();
        assert_eq!(r, again);
        let ideal_r = schedule(&c, &map, &spec, &ideal()).unwrap();
        assert!(ideal_r.makespan <= r.makespan);
    }

    #[test]
    fn dependencies_and_exclusivity_hold() {
        let spec = ArchitectureSpec::reference(3);
        let c = parse_circuit(
            "qubits 6\nH q0\nCNOT q0 q1\nCNOT q1 q4\nMS q2 q3 0.5\nGLOBAL_MS q0 q1 q2\nCNOT q5 q3\nMEASURE q0\nRZ q4 0.1\nCNOT q4 q0\n",
        )
        .unwrap();
        let map = assign_qubits(&c, &spec, &MapStrategy::RoundRobin).unwrap();
        assert!(
            schedule(&c, &map, &spec, &ideal()).is_err(),
            "round robin splits the GLOBAL_MS set"
        );
        let map = assign_qubits(&c, &spec, &MapStrategy::GreedyInteractionCut).unwrap();
        for seed in 0..5 {
            let r = schedule(
                &c,
                &map,
                &spec,
                &ScheduleOptions {
                    pairs: PairSupply::Buffered { seed },
                    ..ideal()
                },
            )
            .unwrap();
            assert!(r.ion_conflicts().is_empty());
            assert_eq!(r.pairs_consumed, r.remote_ops);
            for q in 0..c.n_qubits {
                let starts: Vec<f64> = r
                    .timeline
                    .iter()
                    .filter(|e| e.operands.contains(&q))
                    .map(|e| e.start)
                    .collect();
                assert!(starts.windows(2).all(|w| w[0] <= w[1]));
            }
            assert!(r.fidelity.total > 0.0 && r.fidelity.total <= 1.0);
        }
    }

    #[test]
    fn strict_proximity_inserts_swaps() {
        let spec = ArchitectureSpec::reference(1);
        let c = parse_circuit("qubits 3\nCNOT q0 q1\nX q2\n").unwrap();
        let map = QubitMap {
            sites: vec![site("A", 2), site("A", 15), site("A", 6)],
        };
        let opts = ScheduleOptions {
            strict_proximity: true,
            ..ideal()
        };
        let r = schedule(&c, &map, &spec, &opts).unwrap();
        assert!(r.swaps_inserted >= 2);
        let tau = gate_times(&spec, &spec.elus[0]).unwrap();
        assert_eq!(r.timeline.last().unwrap().duration, spec.elus[0].single_qubit_gate_time);
        let cnot = r.timeline.iter().find(|e| e.gate == "CNOT").unwrap();
        assert_eq!(cnot.duration, tau.fast);
        assert!(r.ion_conflicts().is_empty());
        let g = parse_circuit("qubits 2\nGLOBAL_MS q0 q1\n").unwrap();
        assert!(schedule(
            &g,
            &QubitMap {
                sites: vec![site("A", 2), site("A", 3)]
            },
            &spec,
            &opts
        )
        .is_err());
    }

    #[test]
    fn measurement_isolation_is_toggleable() {
        let spec = ArchitectureSpec::reference(1);
        let c = parse_circuit("qubits 2\nMEASURE q0\nX q1\n").unwrap();
        let map = QubitMap {
            sites: vec![site("A", 2), site("A", 3)],
        };
        let on = schedule(&c, &map, &spec, &ideal()).unwrap();
        let off = schedule(
            &c,
            &map,
            &spec,
            &ScheduleOptions {
                measurement_isolation: false,
                ..ideal()
            },
        )
        .unwrap();
        assert_eq!(off.timeline[0].duration, spec.species.detection_time);
        assert_eq!(
            on.timeline[0].duration,
            spec.species.detection_time + spec.elus[0].shuttle_cost_time
        );
        assert_eq!(on.timeline[0].resource, "shuttle");
    }

    #[test]
    fn fidelity_formula() {
        let empty = parse_circuit("qubits 0\n").unwrap();
        let spec = ArchitectureSpec::reference(1);
        let r = schedule(&empty, &QubitMap { sites: vec![] }, &spec, &ideal()).unwrap();
        assert_eq!(r.fidelity.total, 1.0);
        assert_eq!(r.makespan, 0.0);
        let ten = FidelityBreakdown::from_terms(std::iter::repeat_n(0.999, 10), &[0.0], 1.0);
        assert!((ten.total - 0.990044880209).abs() < 1e-11);
        let t2 = 2.5;
        let one = FidelityBreakdown::from_terms([], &[t2, 0.0], t2);
        assert!((one.idle - (-1.0f64).exp()).abs() < 1e-15);
        let r = schedule(
            &parse_circuit("qubits 2\nCNOT q0 q1\nX q0\n").unwrap(),
            &QubitMap {
                sites: vec![site("A", 2), site("A", 3)],
            },
            &spec,
            &ideal(),
        )
        .unwrap();
        assert_eq!(fidelity_estimate(&r, &spec), r.fidelity);
    }

    #[test]
    fn timeline_csv_header() {
        let spec = ArchitectureSpec::reference(2);
        let c = parse_circuit("qubits 2\nCNOT q0 q1").unwrap();
        let r = schedule(
            &c,
            &QubitMap {
                sites: vec![site("A", 2), site("B", 2)],
            },
            &spec,
            &ideal(),
        )
        .unwrap();
        let csv = r.timeline_csv();
        assert!(csv.starts_with("start_s,dur_s,gate,operands,elus,resource\n"));
        assert!(csv.contains("CNOT,q0 q1,A B,pair:A-B"));
    }

    #[test]
    fn starved_supply_is_an_error() {
        let mut spec = ArchitectureSpec::reference(2);
        spec.link.detector_efficiency = 0.0;
        let c = parse_circuit("qubits 2\nCNOT q0 q1").unwrap();
        let map = QubitMap {
            sites: vec![site("A", 2), site("B", 2)],
        };
        let opts = ScheduleOptions {
            pairs: PairSupply::Buffered { seed: 1 },
            ..ideal()
        };
        assert!(schedule(&c, &map, &spec, &opts).is_err());
    }
}
