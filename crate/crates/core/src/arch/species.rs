use serde::Deserialize;

use super::IonSpecies;
use crate::error::{Error, Result};
use crate::units::{AngularFrequency, ATOMIC_MASS_UNIT};

const TABLE: &str = include_str!("species.json");

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    name: String,
    mass_amu: f64,
    hyperfine_splitting_hz: f64,
    linewidth_hz: f64,
    detection_time_s: f64,
    qubit_coherence_time_s: f64,
}

fn rows() -> Vec<Row> {
    serde_json::from_str(TABLE).expect("embedded species table is valid JSON")
}

/// Names of every species in the embedded table.
pub fn known_species() -> Vec<String> {
    rows().into_iter().map(|r| r.name).collect()
}

/// Looks up an ion species by name in the embedded constants table.
pub fn default_species(name: &str) -> Result<IonSpecies> {
    rows()
        .into_iter()
        .find(|r| r.name == name)
        .map(|r| IonSpecies {
            name: r.name,
            mass: r.mass_amu * ATOMIC_MASS_UNIT,
            hyperfine_splitting: r.hyperfine_splitting_hz,
            linewidth: AngularFrequency::from_hz(r.linewidth_hz),
            detection_time: r.detection_time_s,
            qubit_coherence_time: r.qubit_coherence_time_s,
        })
        .ok_or_else(|| Error::UnknownSpecies(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn yb171_constants() {
        let yb = default_species("Yb171").unwrap();
        assert_eq!(yb.hyperfine_splitting, 12.642812e9);
        assert_eq!(yb.linewidth.rad_per_s(), TAU * 10e6);
        assert_eq!(yb.detection_time, 20e-6);
        assert!(yb.qubit_coherence_time >= 1000.0);
        assert!((yb.mass / ATOMIC_MASS_UNIT - 170.936).abs() < 1e-3);
    }

    #[test]
    fn unknown_species_is_an_error() {
        assert!(matches!(
            default_species("Xx999"),
            Err(Error::UnknownSpecies(name)) if name == "Xx999"
        ));
    }
}
