//! Architecture model: species, drive, ELU and link parameters, plus validation.
//!
//! Everything is SI. Angular frequencies use [`AngularFrequency`]; plain rates
//! (attempt rate, collision rate) are in 1/s.

mod file;
mod species;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use file::{load_architecture, parse_architecture, save_architecture, to_json, ARCH_SCHEMA};
pub use species::{default_species, known_species};

use crate::units::{AngularFrequency, HBAR};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// ν_HF in Hz
    pub hyperfine_splitting: f64,
    /// γ, the excited-state radiative linewidth
    pub linewidth: AngularFrequency,
    /// s
    pub detection_time: f64,
    /// T2 memory time in s
    pub qubit_coherence_time: f64,
}

/// Field-qubit coupling. The Rabi frequency is always present; when the dipole
/// coupling and field amplitude are supplied it must equal μE₀/ħ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveField {
    /// μ in J·m/V
    pub dipole_coupling: Option<f64>,
    /// E₀ in V/m
    pub field_amplitude: Option<f64>,
    /// k in rad/m
    pub effective_wavevector: f64,
    pub rabi_frequency: AngularFrequency,
}

impl DriveField {
    pub fn from_rabi(effective_wavevector: f64, rabi_frequency: AngularFrequency) -> Self {
        Self {
            dipole_coupling: None,
            field_amplitude: None,
            effective_wavevector,
            rabi_frequency,
        }
    }

    /// Derives Ω = μE₀/ħ.
    pub fn from_dipole(dipole_coupling: f64, field_amplitude: f64, effective_wavevector: f64) -> Self {
        Self {
            dipole_coupling: Some(dipole_coupling),
            field_amplitude: Some(field_amplitude),
            effective_wavevector,
            rabi_frequency: AngularFrequency::from_rad_per_s(dipole_coupling * field_amplitude / HBAR),
        }
    }

    /// Counter-propagating Raman beams at `wavelength`: k = 2·2π/λ.
    pub fn raman_wavevector(wavelength: f64) -> f64 {
        2.0 * std::f64::consts::TAU / wavelength
    }
}

/// One elementary logic unit: a single ion chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EluSpec {
    pub id: String,
    pub n_ions: usize,
    /// Chain positions of the communication ions.
    pub comm_ion_indices: Vec<usize>,
    /// In ion spacings.
    pub fast_gate_distance: usize,
    /// ω, collective-mode frequency
    pub trap_frequency: AngularFrequency,
    pub single_qubit_gate_time: f64,
    /// Background-gas collisions per ion per second. Zero disables them.
    pub collision_rate_per_ion: f64,
    pub reload_time: f64,
    pub shuttle_cost_time: f64,
}

impl EluSpec {
    pub fn is_comm(&self, position: usize) -> bool {
        self.comm_ion_indices.contains(&position)
    }

    /// Chain positions available for program qubits, ascending.
    pub fn memory_positions(&self) -> Vec<usize> {
        (0..self.n_ions).filter(|p| !self.is_comm(*p)).collect()
    }

    /// `count` communication ions split between the two chain ends, front first.
    pub fn end_comm_indices(n_ions: usize, count: usize) -> Vec<usize> {
        let count = count.min(n_ions);
        let front = count.div_ceil(2);
        let mut idx: Vec<usize> = (0..front).collect();
        idx.extend(n_ions - (count - front)..n_ions);
        idx
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchSpec {
    /// Number of optical ports on the crossconnect.
    pub ports: usize,
    pub reconfiguration_time: f64,
}

/// Photonic link parameters shared by every ELU pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    /// R, excitation attempts per second.
    pub attempt_rate: f64,
    /// F
    pub collection_fraction: f64,
    /// η_D
    pub detector_efficiency: f64,
    /// Pairs held per ELU pair.
    pub buffer_capacity: usize,
    /// `None` means pairs never expire.
    pub pair_lifetime: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub two_qubit_gate_fidelity: f64,
    pub single_qubit_gate_fidelity: f64,
    /// Local gates and measurements of one teleported remote gate.
    pub teleport_overhead_time: f64,
    pub classical_latency: f64,
    /// κ: a FAST-edge gate takes τ_slow/κ.
    pub fast_gate_speedup: f64,
    /// Communication ions are a second species. Metadata only.
    pub two_species_comm: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub species: IonSpecies,
    pub drive: DriveField,
    pub elus: Vec<EluSpec>,
    pub switch: SwitchSpec,
    pub link: LinkSpec,
    pub costs: CostSpec,
}

impl ArchitectureSpec {
    /// Reference machine: Yb171, `n_elus` chains of 20 ions with four
    /// communication ions at the chain ends and a fast-gate distance of 4.
    pub fn reference(n_elus: usize) -> Self {
        let elus = (0..n_elus)
            .map(|i| EluSpec {
                id: elu_label(i),
                n_ions: 20,
                comm_ion_indices: EluSpec::end_comm_indices(20, 4),
                fast_gate_distance: 4,
                trap_frequency: AngularFrequency::from_hz(3e6),
                single_qubit_gate_time: 10e-6,
                collision_rate_per_ion: 0.0,
                reload_time: 1.0,
                shuttle_cost_time: 100e-6,
            })
            .collect();
        Self {
            species: default_species("Yb171").expect("Yb171 is in the species table"),
            drive: DriveField::from_rabi(DriveField::raman_wavevector(355e-9), AngularFrequency::from_hz(1e6)),
            elus,
            switch: SwitchSpec {
                ports: 64,
                reconfiguration_time: 1e-3,
            },
            link: LinkSpec {
                attempt_rate: 5e5,
                collection_fraction: 0.1,
                detector_efficiency: 0.2,
                buffer_capacity: 16,
                pair_lifetime: None,
            },
            costs: CostSpec {
                two_qubit_gate_fidelity: 0.999,
                single_qubit_gate_fidelity: 1.0,
                teleport_overhead_time: 125e-6,
                classical_latency: 1e-6,
                fast_gate_speedup: 5.0,
                two_species_comm: false,
            },
        }
    }

    pub fn elu_index(&self, id: &str) -> Option<usize> {
        self.elus.iter().position(|e| e.id == id)
    }

    pub fn elu(&self, id: &str) -> Option<&EluSpec> {
        self.elus.iter().find(|e| e.id == id)
    }

    pub fn total_ions(&self) -> usize {
        self.elus.iter().map(|e| e.n_ions).sum()
    }

    pub fn total_memory_ions(&self) -> usize {
        self.elus.iter().map(|e| e.memory_positions().len()).sum()
    }
}

/// "A", "B", ..., "Z", "AA", ...
pub fn elu_label(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'A' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

/// Outcome of [`validate_architecture`]. Empty means the spec passed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.message.contains(needle) || v.path.contains(needle))
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    fn positive(&mut self, path: &str, value: f64) {
        if !(value.is_finite() && value > 0.0) {
            self.push(path, format!("{path} must be positive and finite (got {value})"));
        }
    }

    fn non_negative(&mut self, path: &str, value: f64) {
        if !(value.is_finite() && value >= 0.0) {
            self.push(path, format!("{path} must be non-negative and finite (got {value})"));
        }
    }

    fn unit_interval(&mut self, path: &str, field: &str, value: f64) {
        if !(value.is_finite() && value > 0.0 && value <= 1.0) {
            self.push(path, format!("{field} out of (0,1] (got {value})"));
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

/// Checks every invariant of the spec and collects all violations. Never panics,
/// including on NaN or infinite inputs.
pub fn validate_architecture(spec: &ArchitectureSpec) -> ValidationReport {
    let mut r = ValidationReport::default();

    let s = &spec.species;
    if s.name.trim().is_empty() {
        r.push("species.name", "species name is empty");
    }
    r.positive("species.mass", s.mass);
    r.non_negative("species.hyperfine_splitting", s.hyperfine_splitting);
    r.positive("species.linewidth", s.linewidth.hz());
    r.positive("species.detection_time", s.detection_time);
    r.positive("species.qubit_coherence_time", s.qubit_coherence_time);

    let d = &spec.drive;
    r.positive("drive.effective_wavevector", d.effective_wavevector);
    r.positive("drive.rabi_frequency", d.rabi_frequency.hz());
    match (d.dipole_coupling, d.field_amplitude) {
        (Some(mu), Some(e0)) => {
            r.positive("drive.dipole_coupling", mu);
            r.positive("drive.field_amplitude", e0);
            let derived = mu * e0 / HBAR;
            let given = d.rabi_frequency.rad_per_s();
            if derived.is_finite() && given.is_finite() {
                let rel = (derived - given).abs() / derived.abs().max(f64::MIN_POSITIVE);
                if rel > 1e-12 {
                    r.push(
                        "drive.rabi_frequency",
                        format!("rabi_frequency disagrees with μE₀/ħ (relative error {rel:e})"),
                    );
                }
            }
        }
        (None, None) => {}
        _ => r.push("drive", "dipole_coupling and field_amplitude must be given together"),
    }

    if spec.elus.is_empty() {
        r.push("elus", "at least one ELU is required");
    }
    let mut ids = BTreeSet::new();
    for (i, e) in spec.elus.iter().enumerate() {
        let p = |f: &str| format!("elus[{i}].{f}");
        if e.id.trim().is_empty() {
            r.push(p("id"), "ELU id is empty");
        } else if !ids.insert(e.id.as_str()) {
            r.push(p("id"), format!("duplicate ELU id `{}`", e.id));
        }
        if e.n_ions == 0 {
            r.push(p("n_ions"), "n_ions must be at least 1");
        }
        let mut seen = BTreeSet::new();
        for &c in &e.comm_ion_indices {
            if c >= e.n_ions {
                r.push(
                    p("comm_ion_indices"),
                    format!("communication ion {c} outside chain of {}", e.n_ions),
                );
            }
            if !seen.insert(c) {
                r.push(p("comm_ion_indices"), format!("duplicate communication ion {c}"));
            }
        }
        let fast_ok = e.fast_gate_distance >= 1 && (e.fast_gate_distance < e.n_ions || e.n_ions == 1);
        if !fast_ok {
            r.push(
                p("fast_gate_distance"),
                format!(
                    "fast_gate_distance must satisfy 1 <= d < n_ions (got d={}, n_ions={})",
                    e.fast_gate_distance, e.n_ions
                ),
            );
        }
        r.positive(&p("trap_frequency"), e.trap_frequency.hz());
        r.non_negative(&p("single_qubit_gate_time"), e.single_qubit_gate_time);
        r.non_negative(&p("collision_rate_per_ion"), e.collision_rate_per_ion);
        r.non_negative(&p("reload_time"), e.reload_time);
        r.non_negative(&p("shuttle_cost_time"), e.shuttle_cost_time);
    }

    r.non_negative("switch.reconfiguration_time", spec.switch.reconfiguration_time);

    let l = &spec.link;
    r.unit_interval("link.collection_fraction", "collection_fraction", l.collection_fraction);
    r.unit_interval("link.detector_efficiency", "detector_efficiency", l.detector_efficiency);
    r.positive("link.attempt_rate", l.attempt_rate);
    let emission_limit = s.linewidth.hz();
    if l.attempt_rate.is_finite() && emission_limit.is_finite() && l.attempt_rate > emission_limit {
        r.push(
            "link.attempt_rate",
            format!(
                "attempt_rate {} Hz exceeds the emission-rate limit γ/2π = {} Hz",
                l.attempt_rate, emission_limit
            ),
        );
    }
    if l.buffer_capacity == 0 {
        r.push("link.buffer_capacity", "buffer_capacity must be at least 1");
    }
    if let Some(t) = l.pair_lifetime {
        r.positive("link.pair_lifetime", t);
    }

    let c = &spec.costs;
    r.unit_interval(
        "costs.two_qubit_gate_fidelity",
        "two_qubit_gate_fidelity",
        c.two_qubit_gate_fidelity,
    );
    r.unit_interval(
        "costs.single_qubit_gate_fidelity",
        "single_qubit_gate_fidelity",
        c.single_qubit_gate_fidelity,
    );
    r.non_negative("costs.teleport_overhead_time", c.teleport_overhead_time);
    r.non_negative("costs.classical_latency", c.classical_latency);
    if !(c.fast_gate_speedup.is_finite() && c.fast_gate_speedup >= 1.0) {
        r.push(
            "costs.fast_gate_speedup",
            format!("fast_gate_speedup must be >= 1 (got {})", c.fast_gate_speedup),
        );
    }

    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_spec_passes() {
        let report = validate_architecture(&ArchitectureSpec::reference(2));
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn collection_fraction_above_one() {
        let mut spec = ArchitectureSpec::reference(2);
        spec.link.collection_fraction = 1.5;
        let report = validate_architecture(&spec);
        assert!(report.mentions("collection_fraction out of (0,1]"), "{report}");
    }

    #[test]
    fn duplicate_comm_ion() {
        let mut spec = ArchitectureSpec::reference(1);
        spec.elus[0].comm_ion_indices = vec![0, 0];
        assert!(validate_architecture(&spec).mentions("duplicate communication ion"));
    }

    #[test]
    fn reports_every_violation_at_once() {
        let mut spec = ArchitectureSpec::reference(1);
        spec.link.detector_efficiency = 0.0;
        spec.elus[0].trap_frequency = AngularFrequency::from_hz(f64::NAN);
        spec.elus[0].fast_gate_distance = 20;
        spec.link.attempt_rate = 2e7;
        let report = validate_architecture(&spec);
        assert_eq!(report.violations.len(), 4, "{report}");
        assert!(report.mentions("elus[0].trap_frequency"));
        assert!(report.mentions("emission-rate limit"));
    }

    #[test]
    fn single_ion_elu_is_valid() {
        let mut spec = ArchitectureSpec::reference(1);
        spec.elus[0].n_ions = 1;
        spec.elus[0].comm_ion_indices = vec![0];
        spec.elus[0].fast_gate_distance = 1;
        assert!(validate_architecture(&spec).is_ok());
    }

    #[test]
    fn dipole_drive_must_match_rabi() {
        let mut spec = ArchitectureSpec::reference(1);
        spec.drive = DriveField::from_dipole(2.0 * HBAR, 3.0, 1.0);
        assert!(validate_architecture(&spec).is_ok());
        spec.drive.rabi_frequency = AngularFrequency::from_hz(spec.drive.rabi_frequency.hz() * 1.01);
        assert!(validate_architecture(&spec).mentions("μE₀/ħ"));
        spec.drive.field_amplitude = None;
        assert!(validate_architecture(&spec).mentions("given together"));
    }

    #[test]
    fn end_placement() {
        assert_eq!(EluSpec::end_comm_indices(20, 4), vec![0, 1, 18, 19]);
        assert_eq!(EluSpec::end_comm_indices(5, 1), vec![0]);
        assert_eq!(EluSpec::end_comm_indices(5, 3), vec![0, 1, 4]);
    }

    #[test]
    fn labels() {
        assert_eq!(elu_label(0), "A");
        assert_eq!(elu_label(25), "Z");
        assert_eq!(elu_label(26), "AA");
    }

    fn any_f64() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>(),
            Just(f64::NAN),
            Just(f64::INFINITY),
            Just(-0.0),
            -10.0..10.0f64
        ]
    }

    proptest! {
        #[test]
        fn validation_is_total(
            f in any_f64(), eta in any_f64(), rate in any_f64(), k in any_f64(),
            fid in any_f64(), mass in any_f64(), trap in any_f64(), life in any_f64(),
            n in 0usize..8, d in 0usize..9,
        ) {
            let mut spec = ArchitectureSpec::reference(2);
            spec.link.collection_fraction = f;
            spec.link.detector_efficiency = eta;
            spec.link.attempt_rate = rate;
            spec.link.pair_lifetime = Some(life);
            spec.drive.effective_wavevector = k;
            spec.costs.two_qubit_gate_fidelity = fid;
            spec.species.mass = mass;
            spec.elus[1].trap_frequency = AngularFrequency::from_hz(trap);
            spec.elus[1].n_ions = n;
            spec.elus[1].fast_gate_distance = d;
            let report = validate_architecture(&spec);
            if !f.is_finite() || f <= 0.0 || f > 1.0 {
                prop_assert!(report.mentions("collection_fraction"));
            }
            if !mass.is_finite() || mass <= 0.0 {
                prop_assert!(report.mentions("species.mass"));
            }
        }
    }
}
