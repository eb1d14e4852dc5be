//! Exact and heuristic solvers for [`IsingInstance`]s: Gray-code brute force,
//! dense-statevector adiabatic evolution in a transverse field, and classical
//! Metropolis annealing.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingInstance;

pub const BRUTE_FORCE_MAX_SPINS: usize = 24;
pub const ADIABATIC_MAX_SPINS: usize = 12;
pub const ANNEAL_MAX_SPINS: usize = 10_000;
/// Configurations within this absolute energy of the minimum count as optimal.
pub const ENERGY_TOLERANCE: f64 = 1e-9;
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Spins of ±1. Bit `i` of [`SpinConfig::bits`] is set when spin `i` is −1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinConfig {
    spins: Vec<i8>,
}

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(s) = spins.iter().find(|s| s.abs() != 1) {
            return Err(Error::Domain(format!("spin value {s} is not ±1")));
        }
        Ok(Self { spins })
    }

    pub fn all_up(n: usize) -> Self {
        Self { spins: vec![1; n] }
    }

    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self {
            spins: (0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect(),
        }
    }

    pub fn bits(&self) -> u64 {
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, s)| **s < 0)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn flip(&mut self, i: usize) {
        self.spins[i] = -self.spins[i];
    }

    pub fn flipped_all(&self) -> Self {
        Self {
            spins: self.spins.iter().map(|s| -s).collect(),
        }
    }
}

/// `Σ_{i<j} J_ij s_i s_j + Σ_i B_i s_i`.
pub fn energy(instance: &IsingInstance, config: &SpinConfig) -> Result<f64> {
    if config.len() != instance.n_spins {
        return Err(Error::Domain(format!(
            "config has {} spins, instance has {}",
            config.len(),
            instance.n_spins
        )));
    }
    Ok(energy_unchecked(instance, config.spins()))
}

fn energy_unchecked(instance: &IsingInstance, s: &[i8]) -> f64 {
    let pair: f64 = instance
        .couplings
        .iter()
        .map(|(&(i, j), &v)| v * f64::from(s[i] * s[j]))
        .sum();
    let field: f64 = instance
        .local_fields
        .iter()
        .zip(s)
        .map(|(b, &si)| b * f64::from(si))
        .sum();
    pair + field
}

fn energy_of_bits(instance: &IsingInstance, bits: u64) -> f64 {
    let s: Vec<i8> = (0..instance.n_spins)
        .map(|i| if bits >> i & 1 == 1 { -1 } else { 1 })
        .collect();
    energy_unchecked(instance, &s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub energy: f64,
    /// Optimal configurations in ascending bit order, at most `cap` of them.
    pub configs: Vec<SpinConfig>,
    /// Total number of optimal configurations found.
    pub degeneracy: u64,
    pub truncated: bool,
}

pub const DEFAULT_GROUND_CAP: usize = 1024;

pub fn brute_force_ground_state(instance: &IsingInstance) -> Result<GroundState> {
    brute_force_ground_state_capped(instance, DEFAULT_GROUND_CAP)
}

/// Exhaustive search. The configuration space is cut into chunks by the top
/// spins; each chunk walks its lower spins in Gray-code order, updating the
/// energy by single flips, and candidate optima are re-scored from scratch.
pub fn brute_force_ground_state_capped(instance: &IsingInstance, cap: usize) -> Result<GroundState> {
    let n = instance.n_spins;
    if n > BRUTE_FORCE_MAX_SPINS {
        return Err(Error::TooLarge(format!(
            "brute force supports at most {BRUTE_FORCE_MAX_SPINS} spins, got {n}"
        )));
    }
    if n == 0 {
        return Ok(GroundState {
            energy: 0.0,
            configs: vec![SpinConfig::new(vec![])?],
            degeneracy: 1,
            truncated: false,
        });
    }
    let dense = instance.dense();
    let high = n.saturating_sub(12).min(8);
    let low = n - high;
    let chunks: Vec<Candidates> = (0u64..1 << high)
        .into_par_iter()
        .map(|prefix| scan_chunk(instance, &dense, prefix << low, low))
        .collect();
    let merged = chunks.into_iter().fold(Candidates::default(), Candidates::merge);
    let mut bits: Vec<u64> = merged.found.iter().map(|(b, _)| *b).collect();
    bits.sort_unstable();
    let degeneracy = bits.len() as u64;
    let truncated = bits.len() > cap;
    bits.truncate(cap);
    Ok(GroundState {
        energy: merged.energy,
        configs: bits.into_iter().map(|b| SpinConfig::from_bits(n, b)).collect(),
        degeneracy,
        truncated,
    })
}

#[derive(Default)]
struct Candidates {
    energy: f64,
    found: Vec<(u64, f64)>,
}

impl Candidates {
    fn offer(&mut self, bits: u64, e: f64) {
        if self.found.is_empty() || e < self.energy - ENERGY_TOLERANCE {
            self.energy = e;
            self.found.clear();
            self.found.push((bits, e));
        } else if e <= self.energy + ENERGY_TOLERANCE {
            self.energy = self.energy.min(e);
            self.found.push((bits, e));
        }
    }

    fn merge(mut self, other: Candidates) -> Candidates {
        for (b, e) in other.found {
            self.offer(b, e);
        }
        let floor = self.energy + ENERGY_TOLERANCE;
        self.found.retain(|(_, e)| *e <= floor);
        self
    }
}

fn scan_chunk(instance: &IsingInstance, dense: &[Vec<f64>], base: u64, low: usize) -> Candidates {
    let n = instance.n_spins;
    let mut s: Vec<i8> = (0..n).map(|i| if base >> i & 1 == 1 { -1 } else { 1 }).collect();
    let mut e = energy_unchecked(instance, &s);
    // local[k] = Σ_j J_kj s_j + B_k, so flipping k changes E by −2 s_k local[k]
    let mut local: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|j| dense[k][j] * f64::from(s[j])).sum::<f64>() + instance.local_fields[k])
        .collect();
    let mut bits = base;
    let mut out = Candidates::default();
    // drift guard: candidates are re-scored exactly
    let slack = 1e-6;
    let mut best_seen = f64::INFINITY;
    let mut consider = |bits: u64, approx: f64, out: &mut Candidates| {
        if approx <= best_seen + slack {
            let exact = energy_of_bits(instance, bits);
            out.offer(bits, exact);
            best_seen = best_seen.min(exact);
        }
    };
    consider(bits, e, &mut out);
    for step in 1u64..1 << low {
        let k = step.trailing_zeros() as usize;
        e -= 2.0 * f64::from(s[k]) * local[k];
        s[k] = -s[k];
        let sk = 2.0 * f64::from(s[k]);
        for (j, l) in local.iter_mut().enumerate() {
            *l += dense[j][k] * sk;
        }
        bits ^= 1 << k;
        consider(bits, e, &mut out);
    }
    let floor = out.energy + ENERGY_TOLERANCE;
    out.found.retain(|(_, e)| *e <= floor);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub s: f64,
    /// ⟨ψ|H(s)|ψ⟩ after the step.
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticRun {
    pub n_spins: usize,
    pub total_time: f64,
    pub steps: usize,
    /// Probability mass on the brute-force ground space at the end.
    pub overlap: f64,
    /// ⟨H_Ising⟩ in the final state.
    pub final_energy: f64,
    pub ground_energy: f64,
    pub max_norm_error: f64,
    pub energy_trace: Vec<TracePoint>,
}

/// Trace points recorded per run (plus the final step).
pub const TRACE_POINTS: usize = 100;

/// Evolves `|+⟩^n` under `H(s) = −(1−s)ΣX + s·H_Ising`, `s = t/total_time`,
/// with first-order Trotter steps evaluated at the step midpoint.
pub fn adiabatic_evolve(instance: &IsingInstance, total_time: f64, steps: usize) -> Result<AdiabaticRun> {
    let n = instance.n_spins;
    if n > ADIABATIC_MAX_SPINS {
        return Err(Error::TooLarge(format!(
            "statevector evolution supports at most {ADIABATIC_MAX_SPINS} spins, got {n}"
        )));
    }
    if !(total_time.is_finite() && total_time > 0.0) {
        return Err(Error::Domain(format!(
            "total_time must be positive and finite, got {total_time}"
        )));
    }
    if steps < 10 {
        return Err(Error::Domain(format!("need at least 10 steps, got {steps}")));
    }
    if instance
        .couplings
        .values()
        .chain(&instance.local_fields)
        .any(|v| !v.is_finite())
    {
        return Err(Error::Domain("instance has non-finite coefficients".into()));
    }
    let dim = 1usize << n;
    let diag: Vec<f64> = (0..dim as u64).map(|b| energy_of_bits(instance, b)).collect();
    let ground_energy = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let amp = 1.0 / (dim as f64).sqrt();
    let mut psi = vec![Complex64::new(amp, 0.0); dim];
    let dt = total_time / steps as f64;
    let stride = (steps / TRACE_POINTS).max(1);
    let mut trace = Vec::with_capacity(TRACE_POINTS + 1);
    let mut max_norm_error: f64 = 0.0;

    for k in 0..steps {
        let s = (k as f64 + 0.5) / steps as f64;
        // exp(+i dt (1−s) X) on every qubit
        let theta = dt * (1.0 - s);
        let (c, sn) = (theta.cos(), theta.sin());
        let isn = Complex64::new(0.0, sn);
        for q in 0..n {
            let bit = 1usize << q;
            for b in 0..dim {
                if b & bit == 0 {
                    let (x, y) = (psi[b], psi[b | bit]);
                    psi[b] = x * c + y * isn;
                    psi[b | bit] = y * c + x * isn;
                }
            }
        }
        for (p, e) in psi.iter_mut().zip(&diag) {
            *p *= Complex64::from_polar(1.0, -dt * s * e);
        }
        let norm: f64 = psi.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt();
        let err = (norm - 1.0).abs();
        max_norm_error = max_norm_error.max(err);
        if err > NORM_TOLERANCE {
            return Err(Error::Simulation(format!("norm drifted to {norm} at step {k}")));
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            let s_end = (k + 1) as f64 / steps as f64;
            trace.push(TracePoint {
                s: s_end,
                energy: hamiltonian_expectation(&psi, &diag, n, s_end),
            });
        }
    }
    let overlap = psi
        .iter()
        .zip(&diag)
        .filter(|(_, e)| **e <= ground_energy + ENERGY_TOLERANCE)
        .map(|(p, _)| p.norm_sqr())
        .sum::<f64>()
        .min(1.0);
    let final_energy = psi.iter().zip(&diag).map(|(p, e)| p.norm_sqr() * e).sum();
    Ok(AdiabaticRun {
        n_spins: n,
        total_time,
        steps,
        overlap,
        final_energy,
        ground_energy,
        max_norm_error,
        energy_trace: trace,
    })
}

fn hamiltonian_expectation(psi: &[Complex64], diag: &[f64], n: usize, s: f64) -> f64 {
    let ising: f64 = psi.iter().zip(diag).map(|(p, e)| p.norm_sqr() * e).sum();
    let mut x = 0.0;
    for q in 0..n {
        let bit = 1usize << q;
        x += psi
            .iter()
            .enumerate()
            .map(|(b, p)| (p.conj() * psi[b ^ bit]).re)
            .sum::<f64>();
    }
    -(1.0 - s) * x + s * ising
}

/// Geometric temperature ladder from `t_initial` down to `t_final` over
/// `sweeps` sweeps (one sweep = n single-spin proposals).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t_initial: f64,
    pub t_final: f64,
    pub sweeps: usize,
}

impl AnnealSchedule {
    pub fn zero_temperature(sweeps: usize) -> Self {
        Self {
            t_initial: 0.0,
            t_final: 0.0,
            sweeps,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.sweeps >= 1
            && self.t_initial.is_finite()
            && self.t_final.is_finite()
            && self.t_final >= 0.0
            && self.t_initial >= self.t_final
            && (self.t_final > 0.0 || self.t_initial == 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "invalid anneal schedule {self:?}: need sweeps ≥ 1 and t_initial ≥ t_final > 0 (or both 0)"
            )))
        }
    }

    pub fn temperature(&self, sweep: usize) -> f64 {
        if self.t_initial == 0.0 {
            return 0.0;
        }
        if self.sweeps == 1 {
            return self.t_final;
        }
        let frac = sweep as f64 / (self.sweeps - 1) as f64;
        self.t_initial * (self.t_final / self.t_initial).powf(frac)
    }
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            t_initial: 5.0,
            t_final: 0.01,
            sweeps: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub config: SpinConfig,
    pub energy: f64,
    pub accepted: u64,
    pub proposed: u64,
}

pub fn anneal_classical(instance: &IsingInstance, schedule: &AnnealSchedule, seed: u64) -> Result<AnnealResult> {
    anneal_from(instance, schedule, seed, None)
}

/// Single-spin-flip Metropolis; returns the best configuration seen. At zero
/// temperature only strictly downhill flips are taken.
pub fn anneal_from(
    instance: &IsingInstance,
    schedule: &AnnealSchedule,
    seed: u64,
    initial: Option<SpinConfig>,
) -> Result<AnnealResult> {
    schedule.validate()?;
    let n = instance.n_spins;
    if n > ANNEAL_MAX_SPINS {
        return Err(Error::TooLarge(format!(
            "annealing supports at most {ANNEAL_MAX_SPINS} spins, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut config = match initial {
        Some(c) if c.len() == n => c,
        Some(c) => {
            return Err(Error::Domain(format!(
                "initial config has {} spins, instance has {n}",
                c.len()
            )))
        }
        None => SpinConfig {
            spins: (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect(),
        },
    };
    let mut adjacency = vec![Vec::new(); n];
    for (&(i, j), &v) in &instance.couplings {
        adjacency[i].push((j, v));
        adjacency[j].push((i, v));
    }
    let s = &mut config.spins;
    let mut local: Vec<f64> = (0..n)
        .map(|k| adjacency[k].iter().map(|&(j, v)| v * f64::from(s[j])).sum::<f64>() + instance.local_fields[k])
        .collect();
    let mut e = energy_unchecked(instance, s);
    let mut best = (e, s.clone());
    let (mut accepted, mut proposed) = (0, 0);
    for sweep in 0..schedule.sweeps {
        let t = schedule.temperature(sweep);
        for _ in 0..n {
            let k = rng.gen_range(0..n);
            let delta = -2.0 * f64::from(s[k]) * local[k];
            proposed += 1;
            let take = if t == 0.0 {
                delta < 0.0
            } else {
                delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp()
            };
            if take {
                accepted += 1;
                s[k] = -s[k];
                let sk = 2.0 * f64::from(s[k]);
                for &(j, v) in &adjacency[k] {
                    local[j] += v * sk;
                }
                e += delta;
                if e < best.0 - ENERGY_TOLERANCE {
                    best = (e, s.clone());
                }
            }
        }
    }
    let config = SpinConfig { spins: best.1 };
    let energy = energy_unchecked(instance, config.spins());
    Ok(AnnealResult {
        config,
        energy,
        accepted,
        proposed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{power_law_couplings, random_instance};

    /// Independent oracle: direct enumeration in integer order.
    fn naive_ground(inst: &IsingInstance) -> (f64, Vec<u64>) {
        let n = inst.n_spins;
        let mut best = f64::INFINITY;
        let mut all = Vec::new();
        for b in 0u64..1 << n {
            let mut e = 0.0;
            let spin = |i: usize| if b >> i & 1 == 1 { -1.0 } else { 1.0 };
            for i in 0..n {
                e += inst.local_fields[i] * spin(i);
                for j in i + 1..n {
                    e += inst.coupling(i, j) * spin(i) * spin(j);
                }
            }
            all.push((b, e));
            best = best.min(e);
        }
        let opt = all
            .iter()
            .filter(|(_, e)| *e <= best + ENERGY_TOLERANCE)
            .map(|(b, _)| *b)
            .collect();
        (best, opt)
    }

    #[test]
    fn energy_examples() {
        let ferro = IsingInstance::uniform(4, -1.0);
        assert_eq!(energy(&ferro, &SpinConfig::all_up(4)).unwrap(), -6.0);
        assert!(energy(&ferro, &SpinConfig::all_up(3)).is_err());
        let c = SpinConfig::from_bits(4, 0b0101);
        assert_eq!(energy(&ferro, &c).unwrap(), energy(&ferro, &c.flipped_all()).unwrap());
        assert!(SpinConfig::new(vec![1, 0]).is_err());
        assert_eq!(SpinConfig::from_bits(5, 19).bits(), 19);
    }

    #[test]
    fn frustrated_triangle() {
        let tri = IsingInstance::uniform(3, 1.0);
        let gs = brute_force_ground_state(&tri).unwrap();
        assert_eq!(gs.energy, -1.0);
        assert_eq!(gs.degeneracy, 6);
    }

    #[test]
    fn ferromagnet_has_two_aligned_ground_states() {
        let gs = brute_force_ground_state(&IsingInstance::uniform(8, -1.0)).unwrap();
        assert_eq!(gs.configs, vec![SpinConfig::all_up(8), SpinConfig::from_bits(8, 0xff)]);
        let alpha0 = power_law_couplings(8, 0.0, -1.0).unwrap();
        assert_eq!(brute_force_ground_state(&alpha0).unwrap().configs, gs.configs);
    }

    #[test]
    fn matches_naive_enumeration() {
        for seed in 0..20 {
            let inst = random_instance(9, seed);
            let gs = brute_force_ground_state(&inst).unwrap();
            let (e, bits) = naive_ground(&inst);
            assert!((gs.energy - e).abs() < 1e-12);
            assert_eq!(gs.configs.iter().map(SpinConfig::bits).collect::<Vec<_>>(), bits);
        }
    }

    #[test]
    fn chunked_scan_matches_at_larger_n() {
        let inst = random_instance(15, 3);
        let gs = brute_force_ground_state(&inst).unwrap();
        let (e, bits) = naive_ground(&inst);
        assert!((gs.energy - e).abs() < 1e-12);
        assert_eq!(gs.configs.iter().map(SpinConfig::bits).collect::<Vec<_>>(), bits);
    }

    #[test]
    fn zero_fields_ground_set_is_flip_closed() {
        let mut inst = random_instance(8, 5);
        inst.local_fields = vec![0.0; 8];
        let gs = brute_force_ground_state(&inst).unwrap();
        for c in &gs.configs {
            assert!(gs.configs.contains(&c.flipped_all()));
        }
    }

    #[test]
    fn cap_truncates() {
        let free = IsingInstance::empty(6);
        let gs = brute_force_ground_state_capped(&free, 10).unwrap();
        assert_eq!(gs.degeneracy, 64);
        assert!(gs.truncated);
        assert_eq!(gs.configs.len(), 10);
        assert!(brute_force_ground_state(&IsingInstance::empty(25)).is_err());
    }

    #[test]
    fn sudden_limit_overlap() {
        let run = adiabatic_evolve(&IsingInstance::uniform(4, -1.0), 1e-9, 10).unwrap();
        assert!((run.overlap - 2.0 / 16.0).abs() < 1e-9);
    }

    #[test]
    fn two_spin_ferromagnet_converges() {
        let inst = IsingInstance::uniform(2, -1.0);
        let mut prev = 0.0;
        for t in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let run = adiabatic_evolve(&inst, t, 2000).unwrap();
            assert!(run.overlap >= prev - 1e-3, "t={t}");
            assert!(run.max_norm_error < NORM_TOLERANCE);
            assert!(run.final_energy >= run.ground_energy - 1e-12);
            prev = run.overlap;
        }
        assert!(prev > 0.99);
    }

    #[test]
    fn adiabatic_preconditions() {
        let inst = IsingInstance::uniform(3, -1.0);
        assert!(adiabatic_evolve(&inst, 1.0, 9).is_err());
        assert!(adiabatic_evolve(&inst, 0.0, 10).is_err());
        assert!(adiabatic_evolve(&inst, f64::NAN, 10).is_err());
        assert!(adiabatic_evolve(&IsingInstance::empty(13), 1.0, 10).is_err());
    }

    #[test]
    fn zero_temperature_stays_at_optimum() {
        let inst = random_instance(10, 2);
        let gs = brute_force_ground_state(&inst).unwrap();
        let start = gs.configs[0].clone();
        let r = anneal_from(&inst, &AnnealSchedule::zero_temperature(50), 1, Some(start.clone())).unwrap();
        assert_eq!(r.config, start);
        assert_eq!(r.accepted, 0);
    }

    #[test]
    fn anneal_never_beats_brute_force() {
        for seed in 0..10 {
            let inst = random_instance(10, seed);
            let gs = brute_force_ground_state(&inst).unwrap();
            let r = anneal_classical(&inst, &AnnealSchedule::default(), seed).unwrap();
            assert!(r.energy >= gs.energy - 1e-9);
        }
        let tri = IsingInstance::uniform(3, 1.0);
        assert_eq!(
            anneal_classical(&tri, &AnnealSchedule::default(), 0).unwrap().energy,
            -1.0
        );
    }

    #[test]
    fn slow_anneal_solves_ferromagnet() {
        let inst = IsingInstance::uniform(20, -1.0);
        let hits = (0..100)
            .filter(|&seed| {
                let sched = AnnealSchedule {
                    t_initial: 10.0,
                    t_final: 0.05,
                    sweeps: 200,
                };
                anneal_classical(&inst, &sched, seed).unwrap().energy == -190.0
            })
            .count();
        assert!(hits >= 95, "{hits}");
    }

    #[test]
    fn schedule_validation() {
        let inst = IsingInstance::uniform(3, -1.0);
        for bad in [
            AnnealSchedule {
                t_initial: 1.0,
                t_final: 0.0,
                sweeps: 10,
            },
            AnnealSchedule {
                t_initial: 0.5,
                t_final: 1.0,
                sweeps: 10,
            },
            AnnealSchedule {
                t_initial: 1.0,
                t_final: 0.1,
                sweeps: 0,
            },
        ] {
            assert!(anneal_classical(&inst, &bad, 0).is_err());
        }
    }
}
