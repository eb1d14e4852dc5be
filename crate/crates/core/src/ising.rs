//! Ising coupling instances realizable on an ion chain.
//!
//! Energy convention used throughout the crate:
//! `H = Σ_{i<j} J_ij s_i s_j + Σ_i B_i s_i`, so a ferromagnet has `J < 0`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ISING_SCHEMA: &str = "ionfab-ising/1";

#[derive(Clone, Debug, PartialEq)]
pub struct IsingInstance {
    pub n_spins: usize,
    /// Keys are `(i, j)` with `i < j`. A present key with a zero value is part
    /// of the coupling support.
    pub couplings: BTreeMap<(usize, usize), f64>,
    pub local_fields: Vec<f64>,
    pub alpha: Option<f64>,
    pub j0: f64,
}

impl IsingInstance {
    /// An instance with no couplings and zero fields.
    pub fn empty(n_spins: usize) -> Self {
        Self {
            n_spins,
            couplings: BTreeMap::new(),
            local_fields: vec![0.0; n_spins],
            alpha: None,
            j0: 1.0,
        }
    }

    /// Uniform all-to-all coupling `j` (ferromagnetic when `j < 0`).
    pub fn uniform(n_spins: usize, j: f64) -> Self {
        let mut inst = Self::empty(n_spins);
        for a in 0..n_spins {
            for b in a + 1..n_spins {
                inst.couplings.insert((a, b), j);
            }
        }
        inst.j0 = j;
        inst
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i == j || i >= self.n_spins || j >= self.n_spins {
            return Err(Error::Domain(format!(
                "coupling ({i},{j}) invalid for {} spins",
                self.n_spins
            )));
        }
        self.couplings.insert((i.min(j), i.max(j)), value);
        Ok(())
    }

    /// J_ij with symmetric lookup; zero when absent or on the diagonal.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.couplings.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    pub fn support_edges(&self) -> usize {
        self.couplings.len()
    }

    /// Dense symmetric matrix with zero diagonal.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n_spins]; self.n_spins];
        for (&(i, j), &v) in &self.couplings {
            m[i][j] = v;
            m[j][i] = v;
        }
        m
    }
}

/// J_ij = j0/|i−j|^α on a unit-spaced chain, B = 0. `alpha` must lie in [0, 3].
pub fn power_law_couplings(n: usize, alpha: f64, j0: f64) -> Result<IsingInstance> {
    if !(0.0..=3.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "alpha {alpha} outside [0, 3]; use power_law_couplings_unrestricted to override"
        )));
    }
    power_law_couplings_unrestricted(n, alpha, j0)
}

/// As [`power_law_couplings`] without the [0, 3] range check.
pub fn power_law_couplings_unrestricted(n: usize, alpha: f64, j0: f64) -> Result<IsingInstance> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 spins, got {n}")));
    }
    if !alpha.is_finite() || !j0.is_finite() {
        return Err(Error::Domain("alpha and j0 must be finite".into()));
    }
    let mut inst = IsingInstance::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            let r = (j - i) as f64;
            inst.couplings.insert((i, j), j0 / r.powf(alpha));
        }
    }
    inst.alpha = Some(alpha);
    inst.j0 = j0;
    Ok(inst)
}

/// Coupling support of a layered Boltzmann machine. The reduced machine couples
/// adjacent layers only; the full machine couples every pair. All J start at 0.
pub fn boltzmann_topology(layer_sizes: &[usize], full: bool) -> Result<IsingInstance> {
    if layer_sizes.is_empty() {
        return Err(Error::Domain("at least one layer is required".into()));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Domain("every layer needs at least one spin".into()));
    }
    let n: usize = layer_sizes.iter().sum();
    let mut inst = IsingInstance::empty(n);
    inst.j0 = 0.0;
    if full {
        for i in 0..n {
            for j in i + 1..n {
                inst.couplings.insert((i, j), 0.0);
            }
        }
    } else {
        let mut start = 0;
        for w in layer_sizes.windows(2) {
            let next = start + w[0];
            for i in start..next {
                for j in next..next + w[1] {
                    inst.couplings.insert((i, j), 0.0);
                }
            }
            start = next;
        }
    }
    Ok(inst)
}

/// All-to-all couplings and fields drawn uniformly from [−1, 1] (ChaCha8, `seed`).
pub fn random_instance(n: usize, seed: u64) -> IsingInstance {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut inst = IsingInstance::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            inst.couplings.insert((i, j), rng.gen_range(-1.0..=1.0));
        }
    }
    for b in &mut inst.local_fields {
        *b = rng.gen_range(-1.0..=1.0);
    }
    inst
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IsingFile {
    #[serde(default = "default_schema")]
    schema: String,
    n: usize,
    alpha: Option<f64>,
    j0: f64,
    couplings: Vec<(usize, usize, f64)>,
    fields: Vec<(usize, f64)>,
}

fn default_schema() -> String {
    ISING_SCHEMA.to_string()
}

impl Serialize for IsingInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IsingFile {
            schema: ISING_SCHEMA.to_string(),
            n: self.n_spins,
            alpha: self.alpha,
            j0: self.j0,
            couplings: self.couplings.iter().map(|(&(i, j), &v)| (i, j, v)).collect(),
            fields: self
                .local_fields
                .iter()
                .enumerate()
                .filter(|(_, b)| **b != 0.0)
                .map(|(i, &b)| (i, b))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IsingInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = IsingFile::deserialize(d)?;
        if f.schema != ISING_SCHEMA {
            return Err(D::Error::custom(format!("unsupported schema `{}`", f.schema)));
        }
        let mut inst = IsingInstance::empty(f.n);
        inst.alpha = f.alpha;
        inst.j0 = f.j0;
        for (i, j, v) in f.couplings {
            if i == j || i >= f.n || j >= f.n {
                return Err(D::Error::custom(format!("invalid coupling index ({i},{j})")));
            }
            if inst.couplings.insert((i.min(j), i.max(j)), v).is_some() {
                return Err(D::Error::custom(format!("coupling ({i},{j}) given twice")));
            }
        }
        for (i, b) in f.fields {
            if i >= f.n {
                return Err(D::Error::custom(format!("field index {i} out of range")));
            }
            inst.local_fields[i] = b;
        }
        Ok(inst)
    }
}

pub fn load_ising(path: impl AsRef<Path>) -> Result<IsingInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alpha_zero_is_uniform() {
        let inst = power_law_couplings(6, 0.0, -1.0).unwrap();
        assert!(inst.couplings.values().all(|&j| j == -1.0));
        assert_eq!(inst.support_edges(), 15);
        assert!(inst.local_fields.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn alpha_three_next_nearest() {
        let inst = power_law_couplings(3, 3.0, 1.0).unwrap();
        assert_eq!(inst.coupling(0, 2), 1.0 / 8.0);
        assert_eq!(inst.coupling(2, 0), 1.0 / 8.0);
    }

    #[test]
    fn alpha_one_matches_table() {
        let inst = power_law_couplings(4, 1.0, 2.0).unwrap();
        let table = [
            [0.0, 2.0, 1.0, 2.0 / 3.0],
            [2.0, 0.0, 2.0, 1.0],
            [1.0, 2.0, 0.0, 2.0],
            [2.0 / 3.0, 1.0, 2.0, 0.0],
        ];
        let dense = inst.dense();
        for i in 0..4 {
            for j in 0..4 {
                assert!((dense[i][j] - table[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn alpha_range_enforced() {
        assert!(power_law_couplings(4, 3.5, 1.0).is_err());
        assert!(power_law_couplings(4, -0.1, 1.0).is_err());
        assert!(power_law_couplings_unrestricted(4, 3.5, 1.0).is_ok());
        assert!(power_law_couplings(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn boltzmann_support_counts() {
        assert_eq!(boltzmann_topology(&[2, 3], false).unwrap().support_edges(), 6);
        assert_eq!(boltzmann_topology(&[2, 3], true).unwrap().support_edges(), 10);
        let deep = boltzmann_topology(&[4, 4, 2], false).unwrap();
        let mut oracle = 0;
        for (a, b) in [(0..4, 4..8), (4..8, 8..10)] {
            for i in a.clone() {
                for j in b.clone() {
                    assert!(deep.couplings.contains_key(&(i, j)));
                    oracle += 1;
                }
            }
        }
        assert_eq!(oracle, 24);
        assert_eq!(deep.support_edges(), 24);
        assert!(boltzmann_topology(&[], false).is_err());
        assert!(boltzmann_topology(&[3, 0], false).is_err());
    }

    #[test]
    fn reduced_machine_blocks_are_two_colorable() {
        let sizes = [3, 5, 2, 4];
        let inst = boltzmann_topology(&sizes, false).unwrap();
        let layer_of: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(l, &s)| std::iter::repeat_n(l, s))
            .collect();
        // each support edge joins adjacent layers; color by layer parity
        for &(i, j) in inst.couplings.keys() {
            assert_eq!(layer_of[j], layer_of[i] + 1);
            assert_ne!(layer_of[i] % 2, layer_of[j] % 2);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut inst = power_law_couplings(5, 1.3, 0.7).unwrap();
        inst.local_fields[2] = -0.25;
        let text = serde_json::to_string(&inst).unwrap();
        assert!(text.contains("\"schema\":\"ionfab-ising/1\""));
        let back: IsingInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
        let bad = r#"{"n":2,"alpha":null,"j0":1,"couplings":[[0,0,1.0]],"fields":[]}"#;
        assert!(serde_json::from_str::<IsingInstance>(bad).is_err());
    }

    proptest! {
        #[test]
        fn couplings_decrease_with_alpha(n in 2usize..12, a1 in 0.0f64..3.0, a2 in 0.0f64..3.0, j0 in 0.01f64..10.0) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let weak = power_law_couplings(n, hi, j0).unwrap();
            let strong = power_law_couplings(n, lo, j0).unwrap();
            for (k, v) in &strong.couplings {
                prop_assert!(*v >= weak.couplings[k]);
            }
        }

        #[test]
        fn symmetric_zero_diagonal(n in 2usize..10, alpha in 0.0f64..3.0) {
            let m = power_law_couplings(n, alpha, 1.0).unwrap().dense();
            for (i, row) in m.iter().enumerate() {
                prop_assert_eq!(row[i], 0.0);
                for (j, &v) in row.iter().enumerate() {
                    prop_assert_eq!(v, m[j][i]);
                }
            }
        }
    }
}
