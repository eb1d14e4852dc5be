//! The `ionfab-arch/1` JSON file format.
//!
//! Times are in seconds (`*_s`), frequencies and rates in Hz (`*_hz`).
//! Unknown keys are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    default_species, validate_architecture, ArchitectureSpec, CostSpec, DriveField, EluSpec, IonSpecies, LinkSpec,
    SwitchSpec,
};
use crate::error::{Error, Result};
use crate::units::AngularFrequency;

pub const ARCH_SCHEMA: &str = "ionfab-arch/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArchFile {
    schema: String,
    species: SpeciesFile,
    drive: DriveFile,
    elus: Vec<EluFile>,
    switch: SwitchFile,
    link: LinkFile,
    costs: CostsFile,
}

/// A named species from the table, with optional per-field overrides. Unknown
/// names must provide every field.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesFile {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_kg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hyperfine_splitting_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linewidth_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detection_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    qubit_coherence_time_s: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveFile {
    effective_wavevector: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rabi_frequency_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dipole_coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    field_amplitude: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EluFile {
    id: String,
    n_ions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    comm_ion_indices: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    comm_ion_count: Option<usize>,
    fast_gate_distance: usize,
    trap_frequency_hz: f64,
    single_qubit_gate_time_s: f64,
    #[serde(default)]
    collision_rate_per_ion_hz: f64,
    #[serde(default)]
    reload_time_s: f64,
    #[serde(default)]
    shuttle_cost_time_s: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwitchFile {
    ports: usize,
    reconfiguration_time_s: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    attempt_rate_hz: f64,
    collection_fraction: f64,
    detector_efficiency: f64,
    buffer_capacity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pair_lifetime_s: Option<f64>,
}

fn default_single_fidelity() -> f64 {
    1.0
}
fn default_latency() -> f64 {
    1e-6
}
fn default_speedup() -> f64 {
    5.0
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostsFile {
    two_qubit_gate_fidelity: f64,
    #[serde(default = "default_single_fidelity")]
    single_qubit_gate_fidelity: f64,
    teleport_overhead_time_s: f64,
    #[serde(default = "default_latency")]
    classical_latency_s: f64,
    #[serde(default = "default_speedup")]
    fast_gate_speedup: f64,
    #[serde(default)]
    two_species_comm: bool,
}

fn species_from_file(f: SpeciesFile) -> Result<IonSpecies> {
    let base = default_species(&f.name).ok();
    let missing = |field: &str| {
        Error::Schema(format!(
            "species `{}` is not in the species table; field `species.{field}` is required",
            f.name
        ))
    };
    Ok(IonSpecies {
        mass: match (f.mass_kg, &base) {
            (Some(m), _) => m,
            (None, Some(b)) => b.mass,
            (None, None) => return Err(missing("mass_kg")),
        },
        hyperfine_splitting: match (f.hyperfine_splitting_hz, &base) {
            (Some(v), _) => v,
            (None, Some(b)) => b.hyperfine_splitting,
            (None, None) => return Err(missing("hyperfine_splitting_hz")),
        },
        linewidth: match (f.linewidth_hz, &base) {
            (Some(v), _) => AngularFrequency::from_hz(v),
            (None, Some(b)) => b.linewidth,
            (None, None) => return Err(missing("linewidth_hz")),
        },
        detection_time: match (f.detection_time_s, &base) {
            (Some(v), _) => v,
            (None, Some(b)) => b.detection_time,
            (None, None) => return Err(missing("detection_time_s")),
        },
        qubit_coherence_time: match (f.qubit_coherence_time_s, &base) {
            (Some(v), _) => v,
            (None, Some(b)) => b.qubit_coherence_time,
            (None, None) => return Err(missing("qubit_coherence_time_s")),
        },
        name: f.name,
    })
}

fn from_file(f: ArchFile) -> Result<ArchitectureSpec> {
    if f.schema != ARCH_SCHEMA {
        return Err(Error::Schema(format!(
            "unsupported schema `{}`, expected `{ARCH_SCHEMA}`",
            f.schema
        )));
    }
    let drive = match (
        f.drive.rabi_frequency_hz,
        f.drive.dipole_coupling,
        f.drive.field_amplitude,
    ) {
        (Some(hz), mu, e0) => DriveField {
            dipole_coupling: mu,
            field_amplitude: e0,
            effective_wavevector: f.drive.effective_wavevector,
            rabi_frequency: AngularFrequency::from_hz(hz),
        },
        (None, Some(mu), Some(e0)) => DriveField::from_dipole(mu, e0, f.drive.effective_wavevector),
        _ => {
            return Err(Error::Schema(
                "drive needs `rabi_frequency_hz` or both `dipole_coupling` and `field_amplitude`".into(),
            ))
        }
    };
    let mut elus = Vec::with_capacity(f.elus.len());
    for (i, e) in f.elus.into_iter().enumerate() {
        let comm_ion_indices = match (e.comm_ion_indices, e.comm_ion_count) {
            (Some(_), Some(_)) => {
                return Err(Error::Schema(format!(
                    "elus[{i}]: give either `comm_ion_indices` or `comm_ion_count`, not both"
                )))
            }
            (Some(idx), None) => idx,
            (None, count) => EluSpec::end_comm_indices(e.n_ions, count.unwrap_or(2)),
        };
        elus.push(EluSpec {
            id: e.id,
            n_ions: e.n_ions,
            comm_ion_indices,
            fast_gate_distance: e.fast_gate_distance,
            trap_frequency: AngularFrequency::from_hz(e.trap_frequency_hz),
            single_qubit_gate_time: e.single_qubit_gate_time_s,
            collision_rate_per_ion: e.collision_rate_per_ion_hz,
            reload_time: e.reload_time_s,
            shuttle_cost_time: e.shuttle_cost_time_s,
        });
    }
    Ok(ArchitectureSpec {
        species: species_from_file(f.species)?,
        drive,
        elus,
        switch: SwitchSpec {
            ports: f.switch.ports,
            reconfiguration_time: f.switch.reconfiguration_time_s,
        },
        link: LinkSpec {
            attempt_rate: f.link.attempt_rate_hz,
            collection_fraction: f.link.collection_fraction,
            detector_efficiency: f.link.detector_efficiency,
            buffer_capacity: f.link.buffer_capacity,
            pair_lifetime: f.link.pair_lifetime_s,
        },
        costs: CostSpec {
            two_qubit_gate_fidelity: f.costs.two_qubit_gate_fidelity,
            single_qubit_gate_fidelity: f.costs.single_qubit_gate_fidelity,
            teleport_overhead_time: f.costs.teleport_overhead_time_s,
            classical_latency: f.costs.classical_latency_s,
            fast_gate_speedup: f.costs.fast_gate_speedup,
            two_species_comm: f.costs.two_species_comm,
        },
    })
}

fn to_file(spec: &ArchitectureSpec) -> ArchFile {
    let s = &spec.species;
    ArchFile {
        schema: ARCH_SCHEMA.to_string(),
        species: SpeciesFile {
            name: s.name.clone(),
            mass_kg: Some(s.mass),
            hyperfine_splitting_hz: Some(s.hyperfine_splitting),
            linewidth_hz: Some(s.linewidth.hz()),
            detection_time_s: Some(s.detection_time),
            qubit_coherence_time_s: Some(s.qubit_coherence_time),
        },
        drive: DriveFile {
            effective_wavevector: spec.drive.effective_wavevector,
            rabi_frequency_hz: Some(spec.drive.rabi_frequency.hz()),
            dipole_coupling: spec.drive.dipole_coupling,
            field_amplitude: spec.drive.field_amplitude,
        },
        elus: spec
            .elus
            .iter()
            .map(|e| EluFile {
                id: e.id.clone(),
                n_ions: e.n_ions,
                comm_ion_indices: Some(e.comm_ion_indices.clone()),
                comm_ion_count: None,
                fast_gate_distance: e.fast_gate_distance,
                trap_frequency_hz: e.trap_frequency.hz(),
                single_qubit_gate_time_s: e.single_qubit_gate_time,
                collision_rate_per_ion_hz: e.collision_rate_per_ion,
                reload_time_s: e.reload_time,
                shuttle_cost_time_s: e.shuttle_cost_time,
            })
            .collect(),
        switch: SwitchFile {
            ports: spec.switch.ports,
            reconfiguration_time_s: spec.switch.reconfiguration_time,
        },
        link: LinkFile {
            attempt_rate_hz: spec.link.attempt_rate,
            collection_fraction: spec.link.collection_fraction,
            detector_efficiency: spec.link.detector_efficiency,
            buffer_capacity: spec.link.buffer_capacity,
            pair_lifetime_s: spec.link.pair_lifetime,
        },
        costs: CostsFile {
            two_qubit_gate_fidelity: spec.costs.two_qubit_gate_fidelity,
            single_qubit_gate_fidelity: spec.costs.single_qubit_gate_fidelity,
            teleport_overhead_time_s: spec.costs.teleport_overhead_time,
            classical_latency_s: spec.costs.classical_latency,
            fast_gate_speedup: spec.costs.fast_gate_speedup,
            two_species_comm: spec.costs.two_species_comm,
        },
    }
}

/// Parses and validates an `ionfab-arch/1` document.
pub fn parse_architecture(text: &str) -> Result<ArchitectureSpec> {
    let file: ArchFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let spec = from_file(file)?;
    let report = validate_architecture(&spec);
    if report.is_ok() {
        Ok(spec)
    } else {
        Err(Error::Validation(report))
    }
}

pub fn load_architecture(path: impl AsRef<Path>) -> Result<ArchitectureSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_architecture(&text)
}

/// Serializes a spec as pretty JSON in the `ionfab-arch/1` format.
pub fn to_json(spec: &ArchitectureSpec) -> String {
    serde_json::to_string_pretty(&to_file(spec)).expect("architecture serializes")
}

pub fn save_architecture(spec: &ArchitectureSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(spec) + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::HBAR;
    use proptest::prelude::*;

    #[test]
    fn empty_document_is_a_schema_error() {
        assert!(matches!(parse_architecture(""), Err(Error::Schema(_))));
    }

    #[test]
    fn missing_drive_names_the_field() {
        let mut v: serde_json::Value = serde_json::from_str(&to_json(&ArchitectureSpec::reference(2))).unwrap();
        v.as_object_mut().unwrap().remove("drive");
        match parse_architecture(&v.to_string()) {
            Err(Error::Schema(msg)) => assert!(msg.contains("drive"), "{msg}"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&to_json(&ArchitectureSpec::reference(1))).unwrap();
        v["link"]["attempt_rate"] = serde_json::json!(1.0);
        match parse_architecture(&v.to_string()) {
            Err(Error::Schema(msg)) => assert!(msg.contains("attempt_rate"), "{msg}"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_schema_tag() {
        let text = to_json(&ArchitectureSpec::reference(1)).replace(ARCH_SCHEMA, "ionfab-arch/9");
        assert!(matches!(parse_architecture(&text), Err(Error::Schema(_))));
    }

    #[test]
    fn invalid_values_surface_as_validation_errors() {
        let mut spec = ArchitectureSpec::reference(1);
        spec.link.collection_fraction = 1.5;
        match parse_architecture(&to_json(&spec)) {
            Err(Error::Validation(r)) => assert!(r.mentions("collection_fraction")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn named_species_fills_defaults() {
        let text = r#"{
          "schema": "ionfab-arch/1",
          "species": {"name": "Yb171"},
          "drive": {"effective_wavevector": 3.5e7, "dipole_coupling": 1e-30, "field_amplitude": 100.0},
          "elus": [{"id": "A", "n_ions": 6, "comm_ion_count": 2, "fast_gate_distance": 2,
                    "trap_frequency_hz": 3e6, "single_qubit_gate_time_s": 1e-5}],
          "switch": {"ports": 4, "reconfiguration_time_s": 0.0},
          "link": {"attempt_rate_hz": 5e5, "collection_fraction": 0.1,
                   "detector_efficiency": 0.2, "buffer_capacity": 4},
          "costs": {"two_qubit_gate_fidelity": 0.999, "teleport_overhead_time_s": 1e-4}
        }"#;
        let spec = parse_architecture(text).unwrap();
        assert_eq!(spec.species, default_species("Yb171").unwrap());
        assert_eq!(spec.elus[0].comm_ion_indices, vec![0, 5]);
        let omega = spec.drive.rabi_frequency.rad_per_s();
        assert!((omega - 1e-30 * 100.0 / HBAR).abs() / omega < 1e-12);
        assert_eq!(spec.costs.classical_latency, 1e-6);
    }

    #[test]
    fn unknown_species_needs_every_field() {
        let text = to_json(&ArchitectureSpec::reference(1)).replace("Yb171", "Ba138");
        assert_eq!(parse_architecture(&text).unwrap().species.name, "Ba138");
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["species"].as_object_mut().unwrap().remove("mass_kg");
        assert!(matches!(parse_architecture(&v.to_string()), Err(Error::Schema(m)) if m.contains("mass_kg")));
    }

    proptest! {
        #[test]
        fn save_then_load_is_identity(
            n in 2usize..60, d in 1usize..8, comm in 0usize..5, elus in 1usize..4,
            f in 0.001f64..1.0, eta in 0.001f64..1.0, rate in 1.0f64..1e7,
            trap in 1e5f64..1e7, rabi in 1e3f64..1e7, lifetime in proptest::option::of(1e-3f64..10.0),
            with_dipole in any::<bool>(),
        ) {
            let mut spec = ArchitectureSpec::reference(elus);
            for e in &mut spec.elus {
                e.n_ions = n;
                e.fast_gate_distance = d.min(n - 1);
                e.comm_ion_indices = EluSpec::end_comm_indices(n, comm);
                e.trap_frequency = AngularFrequency::from_hz(trap);
            }
            spec.link.collection_fraction = f;
            spec.link.detector_efficiency = eta;
            spec.link.attempt_rate = rate;
            spec.link.pair_lifetime = lifetime;
            spec.drive = if with_dipole {
                DriveField::from_dipole(rabi * HBAR, 7.0, spec.drive.effective_wavevector)
            } else {
                DriveField::from_rabi(spec.drive.effective_wavevector, AngularFrequency::from_hz(rabi))
            };
            prop_assume!(validate_architecture(&spec).is_ok());
            let back = parse_architecture(&to_json(&spec)).unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
