//! Evaluation metrics for recovered codes and coherence analysis of
//! dictionaries.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::model::{CoefficientMatrix, Dictionary, GroupPartition};

/// Default relative support threshold: an entry counts as active when
/// its magnitude exceeds `tau` times the largest magnitude in its
/// column. Separates solver tolerance (1e-6) from modeling zeros.
pub const DEFAULT_SUPPORT_TAU: f64 = 1e-4;

/// The per-run metric bundle. `mse_scaled` is the mean squared
/// coefficient error over all entries, times 1e3; `mse_support_scaled`
/// restricts the mean to the true support. `separation_error` is absent
/// when no per-source components are available.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub mse_scaled: f64,
    pub mse_support_scaled: f64,
    pub hamming: f64,
    pub separation_error: Option<f64>,
    pub group_hamming: f64,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str =
        "trial,model,sigma,k,groups,mse_scaled,hamming,separation_error,group_hamming";

    /// One CSV row under [`Self::CSV_HEADER`].
    pub fn csv_row(&self, trial: usize, model: &str, sigma: f64, k: usize, groups: usize) -> String {
        let sep = self
            .separation_error
            .map(|v| v.to_string())
            .unwrap_or_default();
        format!(
            "{trial},{model},{sigma},{k},{groups},{},{},{sep},{}",
            self.mse_scaled, self.hamming, self.group_hamming
        )
    }
}

fn check_same_shape(est: &CoefficientMatrix, truth: &CoefficientMatrix) -> Result<()> {
    if est.values().dim() != truth.values().dim() {
        return Err(Error::shape(format!(
            "coefficient shapes differ: {:?} vs {:?}",
            est.values().dim(),
            truth.values().dim()
        )));
    }
    Ok(())
}

/// Mean squared error over all p*n entries, times 1e3.
pub fn coeff_mse(est: &CoefficientMatrix, truth: &CoefficientMatrix) -> Result<f64> {
    check_same_shape(est, truth)?;
    let diff_sq: f64 = est
        .values()
        .iter()
        .zip(truth.values().iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let (p, n) = est.values().dim();
    Ok(1e3 * diff_sq / (p * n) as f64)
}

/// Mean squared error restricted to the exact nonzeros of `truth`,
/// times 1e3 (0 when the truth is identically zero).
pub fn coeff_mse_support(est: &CoefficientMatrix, truth: &CoefficientMatrix) -> Result<f64> {
    check_same_shape(est, truth)?;
    let mut diff_sq = 0.0;
    let mut count = 0usize;
    for (a, b) in est.values().iter().zip(truth.values().iter()) {
        if *b != 0.0 {
            diff_sq += (a - b) * (a - b);
            count += 1;
        }
    }
    if count == 0 {
        return Ok(0.0);
    }
    Ok(1e3 * diff_sq / count as f64)
}

/// The support of one column under the relative threshold `tau`:
/// indices with `|a_i| > tau * max_i |a_i|`. A zero column has empty
/// support.
fn column_support(col: ndarray::ArrayView1<'_, f64>, tau: f64) -> Vec<bool> {
    let max = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return vec![false; col.len()];
    }
    let cut = tau * max;
    col.iter().map(|v| v.abs() > cut).collect()
}

/// Mean over signals of the symmetric-difference cardinality between
/// the thresholded supports of `est` and `truth`.
pub fn support_hamming(est: &CoefficientMatrix, truth: &CoefficientMatrix, tau: f64) -> Result<f64> {
    check_same_shape(est, truth)?;
    if tau <= 0.0 || tau.is_nan() {
        return Err(Error::value("tau must be positive"));
    }
    let n = est.num_signals();
    let mut total = 0usize;
    for j in 0..n {
        let se = column_support(est.column(j), tau);
        let st = column_support(truth.column(j), tau);
        total += se.iter().zip(st.iter()).filter(|(a, b)| a != b).count();
    }
    Ok(total as f64 / n as f64)
}

/// Mean squared separation error
/// `1/(N R) sum_i sum_j || x_j^i - xhat_j^i ||^2` over R sources and N
/// signals.
pub fn separation_error(components_true: &[Array2<f64>], components_est: &[Array2<f64>]) -> Result<f64> {
    if components_true.len() != components_est.len() {
        return Err(Error::shape(format!(
            "source counts differ: {} vs {}",
            components_true.len(),
            components_est.len()
        )));
    }
    if components_true.is_empty() {
        return Err(Error::shape("no sources given"));
    }
    let n = components_true[0].ncols();
    let mut total = 0.0;
    for (t, e) in components_true.iter().zip(components_est.iter()) {
        if t.dim() != e.dim() {
            return Err(Error::shape(format!(
                "component shapes differ: {:?} vs {:?}",
                t.dim(),
                e.dim()
            )));
        }
        total += t
            .iter()
            .zip(e.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(total / (n * components_true.len()) as f64)
}

/// Group-restricted reconstructions `xhat_j^i = D_{g_i} a_{j, g_i}`,
/// one `m x n` matrix per listed group.
pub fn reconstruct_components(
    dict: &Dictionary,
    coeffs: &CoefficientMatrix,
    groups_of_interest: &[usize],
) -> Result<Vec<Array2<f64>>> {
    if coeffs.atom_count() != dict.atom_count() {
        return Err(Error::shape(format!(
            "coefficient rows {} do not match atom count {}",
            coeffs.atom_count(),
            dict.atom_count()
        )));
    }
    let (m, n) = (dict.signal_dim(), coeffs.num_signals());
    let mut out = Vec::with_capacity(groups_of_interest.len());
    for &g in groups_of_interest {
        if g >= dict.groups().num_groups() {
            return Err(Error::value(format!("group index {g} out of range")));
        }
        let mut comp = Array2::zeros((m, n));
        for &atom_idx in dict.groups().group(g) {
            let atom = dict.atoms().column(atom_idx);
            for j in 0..n {
                let coeff = coeffs.values()[[atom_idx, j]];
                if coeff != 0.0 {
                    for i in 0..m {
                        comp[[i, j]] += coeff * atom[i];
                    }
                }
            }
        }
        out.push(comp);
    }
    Ok(out)
}

/// The set of active groups of one column: a group is active when any
/// of its coefficients passes the column-relative `tau` test.
fn column_active_groups(col: ndarray::ArrayView1<'_, f64>, groups: &GroupPartition, tau: f64) -> Vec<bool> {
    let support = column_support(col, tau);
    groups
        .iter()
        .map(|g| g.iter().any(|&i| support[i]))
        .collect()
}

/// Mean over signals of the active-group symmetric-difference
/// cardinality, divided by the group count (a fraction comparable
/// across partition sizes).
pub fn group_hamming(
    est: &CoefficientMatrix,
    truth: &CoefficientMatrix,
    groups: &GroupPartition,
    tau: f64,
) -> Result<f64> {
    check_same_shape(est, truth)?;
    if tau <= 0.0 || tau.is_nan() {
        return Err(Error::value("tau must be positive"));
    }
    if groups.atom_count() != est.atom_count() {
        return Err(Error::shape(format!(
            "partition covers {} atoms but coefficients have {}",
            groups.atom_count(),
            est.atom_count()
        )));
    }
    let n = est.num_signals();
    let mut total = 0usize;
    for j in 0..n {
        let ge = column_active_groups(est.column(j), groups, tau);
        let gt = column_active_groups(truth.column(j), groups, tau);
        total += ge.iter().zip(gt.iter()).filter(|(a, b)| a != b).count();
    }
    Ok(total as f64 / (n * groups.num_groups()) as f64)
}

/// Sequentially accumulated column inner product (deterministic
/// regardless of layout or vectorization).
fn column_dot(a: ArrayView2<'_, f64>, i: usize, b: ArrayView2<'_, f64>, j: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..a.nrows() {
        acc += a[[k, i]] * b[[k, j]];
    }
    acc
}

/// `max_{i != j} |d_i . d_j|` over the columns of `d` (assumed unit
/// norm); 0 for a single column.
pub fn mutual_coherence(d: ArrayView2<'_, f64>) -> f64 {
    let p = d.ncols();
    let mut max = 0.0f64;
    for i in 0..p {
        for j in (i + 1)..p {
            max = max.max(column_dot(d, i, d, j).abs());
        }
    }
    max
}

/// `max |d_i . e_j|` over all pairs across the two blocks (columns
/// assumed unit norm).
pub fn cross_coherence(d1: ArrayView2<'_, f64>, d2: ArrayView2<'_, f64>) -> Result<f64> {
    if d1.nrows() != d2.nrows() {
        return Err(Error::shape(format!(
            "blocks have different signal dimensions: {} vs {}",
            d1.nrows(),
            d2.nrows()
        )));
    }
    let mut max = 0.0f64;
    for i in 0..d1.ncols() {
        for j in 0..d2.ncols() {
            max = max.max(column_dot(d1, i, d2, j).abs());
        }
    }
    Ok(max)
}

/// Two-block separation uniqueness test:
///
/// ```text
/// (2 k1 - 1) mu1 + 2 cross_k1 mu12 < 1
/// (2 k2 - 1) mu2 + 2 cross_k2 mu12 < 1
/// ```
///
/// The cross-term sparsity multipliers are explicit arguments so either
/// reading of the bound is computable; [`uniqueness_check_symmetric`]
/// pairs each inequality with the other block's sparsity.
pub fn uniqueness_check(
    k1: usize,
    k2: usize,
    mu1: f64,
    mu2: f64,
    mu12: f64,
    cross_k1: usize,
    cross_k2: usize,
) -> bool {
    let first = (2.0 * k1 as f64 - 1.0) * mu1 + 2.0 * cross_k1 as f64 * mu12;
    let second = (2.0 * k2 as f64 - 1.0) * mu2 + 2.0 * cross_k2 as f64 * mu12;
    first < 1.0 && second < 1.0
}

/// [`uniqueness_check`] with `cross_k1 = k2` and `cross_k2 = k1`.
pub fn uniqueness_check_symmetric(k1: usize, k2: usize, mu1: f64, mu2: f64, mu12: f64) -> bool {
    uniqueness_check(k1, k2, mu1, mu2, mu12, k2, k1)
}
