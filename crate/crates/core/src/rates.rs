//! Closed-form physical rates of the Coulomb and photonic links.
//!
//! Angular quantities are in rad/s unless a name says `_hz`. The gate duration
//! used downstream is one characteristic period, τ_slow = 2π / R_gate.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::arch::{ArchitectureSpec, EluSpec};
use crate::error::{ensure_positive, ensure_unit_interval, Error, Result};
use crate::units::HBAR;

/// Above this Lamb-Dicke parameter the single-gradient force picture is flagged.
pub const LAMB_DICKE_WARNING: f64 = 0.3;

/// Ω = μE₀/ħ.
pub fn rabi_frequency(mu: f64, e0: f64) -> Result<f64> {
    ensure_positive("dipole coupling", mu)?;
    ensure_positive("field amplitude", e0)?;
    Ok(mu * e0 / HBAR)
}

/// Magnitude of the qubit-state-dependent force ħkΩ for plane-wave drive.
pub fn state_dependent_force(k: f64, omega_rabi: f64) -> Result<f64> {
    ensure_positive("wavevector", k)?;
    ensure_positive("Rabi frequency", omega_rabi)?;
    Ok(HBAR * k * omega_rabi)
}

/// ω_R = ħk²/(2Nm) for an N-ion crystal.
pub fn recoil_frequency(k: f64, mass: f64, n_ions: usize) -> Result<f64> {
    ensure_positive("wavevector", k)?;
    ensure_positive("mass", mass)?;
    if n_ions == 0 {
        return Err(Error::Domain("n_ions must be at least 1".into()));
    }
    Ok(HBAR * k * k / (2.0 * n_ions as f64 * mass))
}

/// R_gate = Ω√(ω_R/ω), in rad/s.
pub fn gate_rate(omega_rabi: f64, recoil: f64, trap_freq: f64) -> Result<f64> {
    ensure_positive("Rabi frequency", omega_rabi)?;
    ensure_positive("recoil frequency", recoil)?;
    ensure_positive("trap frequency", trap_freq)?;
    Ok(omega_rabi * (recoil / trap_freq).sqrt())
}

/// Heralding probability per attempt, p = (Fη_D)²/2. Never exceeds 1/2.
pub fn link_success_probability(f: f64, eta_d: f64) -> Result<f64> {
    ensure_unit_interval("collection fraction", f)?;
    ensure_unit_interval("detector efficiency", eta_d)?;
    let x = f * eta_d;
    Ok(x * x / 2.0)
}

/// R·(Fη_D)²/2 in 1/s.
pub fn mean_connection_rate(attempt_rate: f64, f: f64, eta_d: f64) -> Result<f64> {
    ensure_positive("attempt rate", attempt_rate)?;
    Ok(attempt_rate * link_success_probability(f, eta_d)?)
}

/// η = k·√(ħ/(2Nmω)).
pub fn lamb_dicke_parameter(k: f64, mass: f64, n_ions: usize, trap_freq: f64) -> f64 {
    k * (HBAR / (2.0 * n_ions as f64 * mass * trap_freq)).sqrt()
}

/// Per-ELU rate summary. Serialized keys are the field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub elu: String,
    pub n_ions: usize,
    /// ω_R in rad/s
    pub recoil_frequency: f64,
    /// R_gate/2π in Hz
    pub gate_rate: f64,
    /// R_gate in rad/s
    pub gate_rate_angular: f64,
    /// ħkΩ in N
    pub state_dependent_force: f64,
    pub link_success_probability: f64,
    /// 1/s
    pub mean_connection_rate: f64,
    pub lamb_dicke_parameter: f64,
}

/// Gate-time conventions for one ELU.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateTimes {
    /// 2π / R_gate
    pub slow: f64,
    /// slow / κ
    pub fast: f64,
}

fn elu_gate_rate(spec: &ArchitectureSpec, elu: &EluSpec) -> Result<(f64, f64)> {
    let recoil = recoil_frequency(spec.drive.effective_wavevector, spec.species.mass, elu.n_ions)?;
    let rate = gate_rate(
        spec.drive.rabi_frequency.rad_per_s(),
        recoil,
        elu.trap_frequency.rad_per_s(),
    )?;
    Ok((recoil, rate))
}

pub fn gate_times(spec: &ArchitectureSpec, elu: &EluSpec) -> Result<GateTimes> {
    let (_, rate) = elu_gate_rate(spec, elu)?;
    let slow = TAU / rate;
    Ok(GateTimes {
        slow,
        fast: slow / spec.costs.fast_gate_speedup,
    })
}

pub fn rate_report(spec: &ArchitectureSpec, elu_id: &str) -> Result<RateReport> {
    let elu = spec.elu(elu_id).ok_or_else(|| Error::UnknownElu(elu_id.to_string()))?;
    let (recoil, rate) = elu_gate_rate(spec, elu)?;
    let k = spec.drive.effective_wavevector;
    let eta_ld = lamb_dicke_parameter(k, spec.species.mass, elu.n_ions, elu.trap_frequency.rad_per_s());
    if eta_ld > LAMB_DICKE_WARNING {
        log::warn!(
            "ELU {}: Lamb-Dicke parameter {eta_ld:.3} exceeds {LAMB_DICKE_WARNING}; \
             higher-order field gradients are not modeled",
            elu.id
        );
    }
    let link = &spec.link;
    Ok(RateReport {
        elu: elu.id.clone(),
        n_ions: elu.n_ions,
        recoil_frequency: recoil,
        gate_rate: rate / TAU,
        gate_rate_angular: rate,
        state_dependent_force: state_dependent_force(k, spec.drive.rabi_frequency.rad_per_s())?,
        link_success_probability: link_success_probability(link.collection_fraction, link.detector_efficiency)?,
        mean_connection_rate: mean_connection_rate(
            link.attempt_rate,
            link.collection_fraction,
            link.detector_efficiency,
        )?,
        lamb_dicke_parameter: eta_ld,
    })
}

/// Reports for every ELU in spec order.
pub fn rate_reports(spec: &ArchitectureSpec) -> Result<Vec<RateReport>> {
    spec.elus.iter().map(|e| rate_report(spec, &e.id)).collect()
}
