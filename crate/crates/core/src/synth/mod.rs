//! Synthetic data: per-group Gaussian dictionaries, k-sparse per-group
//! signals, unit-normalized mixtures, optional noise and observation
//! masks. Everything is a pure function of (spec, trial index); see
//! [`rng`] for the pinned generator contract.

pub mod rng;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CodingProblem, CoefficientMatrix, Dictionary, GroupPartition};
use rng::{Stream, DICTIONARY_STREAM};

/// Configuration of one synthetic setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub num_groups: usize,
    pub atoms_per_group: usize,
    pub signal_dim: usize,
    /// Nonzeros per active group, per signal.
    pub k: usize,
    pub num_active_groups: usize,
    /// Signals per trial.
    pub n: usize,
    /// Noise standard deviation.
    pub sigma: f64,
    /// Probability that an entry is unobserved; 0 disables masks.
    pub missing_fraction: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            num_groups: 8,
            atoms_per_group: 64,
            signal_dim: 64,
            k: 8,
            num_active_groups: 2,
            n: 200,
            sigma: 0.0,
            missing_fraction: 0.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_groups < 2 {
            return Err(Error::value("num_groups must be at least 2"));
        }
        if self.atoms_per_group == 0 || self.signal_dim == 0 {
            return Err(Error::value("atoms_per_group and signal_dim must be positive"));
        }
        if self.k == 0 {
            return Err(Error::value("k must be positive"));
        }
        if self.k > self.atoms_per_group {
            return Err(Error::value("k exceeds atoms_per_group"));
        }
        if self.num_active_groups == 0 || self.num_active_groups > self.num_groups {
            return Err(Error::value("num_active_groups must be in 1..=num_groups"));
        }
        if self.n == 0 {
            return Err(Error::value("n must be positive"));
        }
        if self.sigma < 0.0 || self.sigma.is_nan() {
            return Err(Error::value("sigma must be nonnegative"));
        }
        if !(0.0..1.0).contains(&self.missing_fraction) {
            return Err(Error::value("missing_fraction must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn atom_count(&self) -> usize {
        self.num_groups * self.atoms_per_group
    }
}

/// What the generator knows about a trial: the true coefficients, the
/// active group set (0-based positions into the partition) and the
/// per-source unit-normalized components whose sum is the noiseless
/// mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub coefficients: CoefficientMatrix,
    pub active_groups: Vec<usize>,
    pub per_source_components: Vec<Array2<f64>>,
}

/// Draws the dictionary for `spec`: i.i.d. standard-normal entries,
/// every column rescaled to unit norm, groups as contiguous blocks of
/// `atoms_per_group` atoms. Entries are drawn column by column from the
/// dictionary stream.
pub fn gen_dictionary(spec: &SynthSpec) -> Result<Dictionary> {
    spec.validate()?;
    let m = spec.signal_dim;
    let p = spec.atom_count();
    let mut stream = Stream::new(spec.seed, DICTIONARY_STREAM);
    let mut atoms = Array2::zeros((m, p));
    for j in 0..p {
        let mut sq = 0.0;
        for i in 0..m {
            let v = stream.standard_normal();
            atoms[[i, j]] = v;
            sq += v * v;
        }
        let norm = sq.sqrt();
        if norm > 0.0 {
            for i in 0..m {
                atoms[[i, j]] /= norm;
            }
        }
    }
    let groups = GroupPartition::contiguous(spec.num_groups, spec.atoms_per_group)?;
    Dictionary::new(atoms, groups)
}

/// Draws one trial against `dict`.
///
/// Draw order within the trial stream: the active group set; then per
/// active group (ascending) and per signal the k atom offsets and their
/// standard-normal coefficients; then (if `sigma > 0`) per signal the m
/// noise entries; then (if `missing_fraction > 0`) the mask entries
/// column-major, redrawing any fully unobserved column.
///
/// Each per-source component `x_j^i = D_i a_j^i` is rescaled to unit
/// norm together with its coefficients, so the returned ground truth
/// satisfies the reconstruction identity exactly.
pub fn gen_trial(spec: &SynthSpec, dict: &Dictionary, trial: u64) -> Result<(CodingProblem, GroundTruth)> {
    spec.validate()?;
    let m = spec.signal_dim;
    let p = spec.atom_count();
    if dict.signal_dim() != m || dict.atom_count() != p {
        return Err(Error::shape(format!(
            "dictionary is {}x{} but spec requires {}x{}",
            dict.signal_dim(),
            dict.atom_count(),
            m,
            p
        )));
    }
    let n = spec.n;
    let mut stream = Stream::new(spec.seed, trial);

    let active_groups = stream.sample_distinct(spec.num_groups, spec.num_active_groups);

    let mut coefficients = Array2::zeros((p, n));
    let mut components = Vec::with_capacity(active_groups.len());
    for &g in &active_groups {
        let base = g * spec.atoms_per_group;
        let mut component = Array2::<f64>::zeros((m, n));
        for j in 0..n {
            let offsets = stream.sample_distinct(spec.atoms_per_group, spec.k);
            let mut col = component.column_mut(j);
            let mut local = Vec::with_capacity(spec.k);
            for &off in &offsets {
                let coeff = stream.standard_normal();
                local.push((base + off, coeff));
                let atom = dict.atoms().column(base + off);
                for i in 0..m {
                    col[i] += coeff * atom[i];
                }
            }
            let norm = col.dot(&col).sqrt();
            if norm > 0.0 {
                col.mapv_inplace(|v| v / norm);
                for (idx, coeff) in local {
                    coefficients[[idx, j]] = coeff / norm;
                }
            } else {
                for (idx, coeff) in local {
                    coefficients[[idx, j]] = coeff;
                }
            }
        }
        components.push(component);
    }

    let mut signals = Array2::zeros((m, n));
    for component in &components {
        signals += component;
    }
    if spec.sigma > 0.0 {
        for j in 0..n {
            for i in 0..m {
                signals[[i, j]] += spec.sigma * stream.standard_normal();
            }
        }
    }

    let masks = if spec.missing_fraction > 0.0 {
        let mut masks = Array2::from_elem((m, n), true);
        for j in 0..n {
            loop {
                let mut any = false;
                for i in 0..m {
                    let observed = stream.uniform() >= spec.missing_fraction;
                    masks[[i, j]] = observed;
                    any |= observed;
                }
                if any {
                    break;
                }
            }
        }
        Some(masks)
    } else {
        None
    };

    let problem = CodingProblem::new(signals, dict.clone(), 0.0, 0.0, masks)?;
    let truth = GroundTruth {
        coefficients: CoefficientMatrix::new(coefficients),
        active_groups,
        per_source_components: components,
    };
    Ok((problem, truth))
}
