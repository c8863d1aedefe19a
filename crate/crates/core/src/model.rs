//! Domain types shared by all solvers: dictionaries, group partitions,
//! coding problems, coefficient matrices and solver configuration.
//!
//! Conventions: signals are the columns of an `m x n` matrix `X`, the
//! dictionary is `m x p` with one atom per column, and a coefficient
//! matrix is `p x n` (column `j` codes signal `j`). Atom indices are
//! 0-based everywhere in this API; the JSON interchange format uses
//! 1-based indices (see the `io` module).

use ndarray::{Array2, ArrayView1, Axis};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, PartitionViolation, Result};

/// The four sparse-coding models.
///
/// For a single signal `x` with code `a`:
///
/// ```text
/// lasso:    1/2 ||x - D a||^2 + l1 * ||a||_1
/// glasso:   1/2 ||x - D a||^2 + l2 * sum_g ||a_g||_2
/// hilasso:  1/2 ||x - D a||^2 + l2 * sum_g ||a_g||_2 + l1 * ||a||_1
/// ```
///
/// For a matrix of signals `X` with codes `A`, `lasso` and `hilasso`
/// penalties apply per column, while `glasso` and `chilasso` use the
/// collaborative group penalty `sum_g ||A_g||_F` over the whole row
/// block of each group:
///
/// ```text
/// chilasso: 1/2 ||X - D A||_F^2 + l2 * sum_g ||A_g||_F + l1 * sum_j ||a_j||_1
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Model {
    Lasso,
    GroupLasso,
    HiLasso,
    CHiLasso,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Lasso, Model::GroupLasso, Model::HiLasso, Model::CHiLasso];

    pub fn name(&self) -> &'static str {
        match self {
            Model::Lasso => "lasso",
            Model::GroupLasso => "glasso",
            Model::HiLasso => "hilasso",
            Model::CHiLasso => "chilasso",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lasso" => Ok(Model::Lasso),
            "glasso" => Ok(Model::GroupLasso),
            "hilasso" => Ok(Model::HiLasso),
            "chilasso" => Ok(Model::CHiLasso),
            other => Err(Error::value(format!(
                "unknown model `{other}` (expected lasso, glasso, hilasso or chilasso)"
            ))),
        }
    }
}

/// Checks that `groups` (0-based atom indices) is a partition of `0..p`:
/// non-empty groups, no index out of range, no overlaps, no gaps.
/// Returns the first violation found.
pub fn validate_partition(groups: &[Vec<usize>], p: usize) -> std::result::Result<(), PartitionViolation> {
    let mut seen = vec![false; p];
    for (gi, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(PartitionViolation::EmptyGroup { group: gi });
        }
        for &idx in g {
            if idx >= p {
                return Err(PartitionViolation::OutOfRange { group: gi, index: idx, p });
            }
            if seen[idx] {
                return Err(PartitionViolation::Overlap { group: gi, index: idx });
            }
            seen[idx] = true;
        }
    }
    if let Some(idx) = seen.iter().position(|&s| !s) {
        return Err(PartitionViolation::Gap { index: idx });
    }
    Ok(())
}

/// An ordered partition of the atom indices `0..p` into disjoint groups.
///
/// Groups are stored as explicit sorted index lists so arbitrary
/// partitions work; the synthetic generator emits contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    groups: Vec<Vec<usize>>,
    p: usize,
}

impl GroupPartition {
    /// Builds a partition of `0..p`. Indices within each group are
    /// sorted; the first invariant violation is reported as an error.
    pub fn new(groups: Vec<Vec<usize>>, p: usize) -> Result<Self> {
        let mut groups = groups;
        for g in &mut groups {
            g.sort_unstable();
        }
        validate_partition(&groups, p)?;
        Ok(GroupPartition { groups, p })
    }

    /// `num_groups` contiguous blocks of `block_len` consecutive atoms.
    pub fn contiguous(num_groups: usize, block_len: usize) -> Result<Self> {
        if num_groups == 0 || block_len == 0 {
            return Err(Error::value("contiguous partition needs num_groups >= 1 and block_len >= 1"));
        }
        let groups = (0..num_groups)
            .map(|g| (g * block_len..(g + 1) * block_len).collect())
            .collect();
        GroupPartition::new(groups, num_groups * block_len)
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn atom_count(&self) -> usize {
        self.p
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, g: usize) -> &[usize] {
        &self.groups[g]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.groups.iter()
    }
}

/// A dictionary of `p` atoms of dimension `m`, with its group partition.
///
/// `normalized` is derived at construction: true iff every column has
/// unit Euclidean norm within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: Array2<f64>,
    groups: GroupPartition,
    normalized: bool,
}

pub const UNIT_NORM_TOL: f64 = 1e-12;

impl Dictionary {
    pub fn new(atoms: Array2<f64>, groups: GroupPartition) -> Result<Self> {
        let (m, p) = atoms.dim();
        if m < 1 || p < 1 {
            return Err(Error::shape(format!("dictionary must be at least 1x1, got {m}x{p}")));
        }
        if groups.atom_count() != p {
            return Err(Error::shape(format!(
                "partition covers {} atoms but dictionary has {p}",
                groups.atom_count()
            )));
        }
        if !atoms.iter().all(|v| v.is_finite()) {
            return Err(Error::value("dictionary atoms must be finite"));
        }
        let normalized = atoms
            .axis_iter(Axis(1))
            .all(|col| (col.dot(&col).sqrt() - 1.0).abs() <= UNIT_NORM_TOL);
        Ok(Dictionary { atoms, groups, normalized })
    }

    /// Signal dimension `m`.
    pub fn signal_dim(&self) -> usize {
        self.atoms.nrows()
    }

    /// Atom count `p`.
    pub fn atom_count(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn atoms(&self) -> &Array2<f64> {
        &self.atoms
    }

    pub fn groups(&self) -> &GroupPartition {
        &self.groups
    }

    /// True iff every column had unit norm (within 1e-12) at construction.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// A copy with every column rescaled to unit norm (zero columns kept).
    pub fn normalized_copy(&self) -> Dictionary {
        let mut atoms = self.atoms.clone();
        for mut col in atoms.axis_iter_mut(Axis(1)) {
            let norm = col.dot(&col).sqrt();
            if norm > 0.0 {
                col.mapv_inplace(|v| v / norm);
            }
        }
        Dictionary::new(atoms, self.groups.clone()).expect("rescaling preserves validity")
    }

    /// The `m x |g|` sub-dictionary of group `g`.
    pub fn group_atoms(&self, g: usize) -> Array2<f64> {
        let idx = self.groups.group(g);
        let mut out = Array2::zeros((self.signal_dim(), idx.len()));
        for (k, &j) in idx.iter().enumerate() {
            out.column_mut(k).assign(&self.atoms.column(j));
        }
        out
    }
}

/// A batch coding problem: signals, a dictionary, the two regularization
/// weights and an optional observation mask (`true` = observed).
#[derive(Debug, Clone, PartialEq)]
pub struct CodingProblem {
    signals: Array2<f64>,
    dictionary: Dictionary,
    lambda1: f64,
    lambda2: f64,
    masks: Option<Array2<bool>>,
}

impl CodingProblem {
    pub fn new(
        signals: Array2<f64>,
        dictionary: Dictionary,
        lambda1: f64,
        lambda2: f64,
        masks: Option<Array2<bool>>,
    ) -> Result<Self> {
        let (m, n) = signals.dim();
        if m != dictionary.signal_dim() {
            return Err(Error::shape(format!(
                "signal dimension {m} does not match dictionary row count {}",
                dictionary.signal_dim()
            )));
        }
        if n < 1 {
            return Err(Error::shape("at least one signal required"));
        }
        if lambda1 < 0.0 || lambda1.is_nan() || lambda2 < 0.0 || lambda2.is_nan() {
            return Err(Error::value("lambda1 and lambda2 must be nonnegative"));
        }
        if let Some(masks) = &masks {
            if masks.dim() != signals.dim() {
                return Err(Error::shape(format!(
                    "mask shape {:?} does not match signals {:?}",
                    masks.dim(),
                    signals.dim()
                )));
            }
            for (j, col) in masks.axis_iter(Axis(1)).enumerate() {
                if !col.iter().any(|&o| o) {
                    return Err(Error::value(format!("mask column {j} has no observed entries")));
                }
            }
        }
        Ok(CodingProblem { signals, dictionary, lambda1, lambda2, masks })
    }

    pub fn signals(&self) -> &Array2<f64> {
        &self.signals
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn masks(&self) -> Option<&Array2<bool>> {
        self.masks.as_ref()
    }

    pub fn num_signals(&self) -> usize {
        self.signals.ncols()
    }

    /// A copy with different regularization weights.
    pub fn with_lambdas(&self, lambda1: f64, lambda2: f64) -> Result<Self> {
        CodingProblem::new(
            self.signals.clone(),
            self.dictionary.clone(),
            lambda1,
            lambda2,
            self.masks.clone(),
        )
    }

    /// The problem restricted to signal column `j` (mask column kept).
    pub fn column(&self, j: usize) -> Result<Self> {
        let signals = self.signals.column(j).insert_axis(Axis(1)).to_owned();
        let masks = self.masks.as_ref().map(|m| m.column(j).insert_axis(Axis(1)).to_owned());
        CodingProblem::new(signals, self.dictionary.clone(), self.lambda1, self.lambda2, masks)
    }
}

/// A `p x n` coefficient matrix; column `j` is the code of signal `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    values: Array2<f64>,
}

impl CoefficientMatrix {
    pub fn new(values: Array2<f64>) -> Self {
        CoefficientMatrix { values }
    }

    pub fn zeros(p: usize, n: usize) -> Self {
        CoefficientMatrix { values: Array2::zeros((p, n)) }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn atom_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_signals(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }
}

/// Solver configuration. Defaults: `tol = 1e-6`, `max_outer_iter = 1000`,
/// `max_inner_iter = 200`, `admm_c = 1.0`, `alpha_min = 1e-30`,
/// `alpha_max = 1e30`, `eta = 2.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Relative-change stopping threshold.
    pub tol: f64,
    pub max_outer_iter: usize,
    pub max_inner_iter: usize,
    /// The fixed augmented-Lagrangian constant `c` used by both the
    /// inner proximal splitting and the collaborative outer splitting.
    pub admm_c: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Step-growth factor for the backtracking retry (`> 1`).
    pub eta: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-6,
            max_outer_iter: 1000,
            max_inner_iter: 200,
            admm_c: 1.0,
            alpha_min: 1e-30,
            alpha_max: 1e30,
            eta: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tol <= 0.0 || self.tol.is_nan() {
            return Err(Error::value("tol must be positive"));
        }
        if self.max_outer_iter == 0 || self.max_inner_iter == 0 {
            return Err(Error::value("iteration limits must be positive"));
        }
        if self.admm_c <= 0.0 || self.admm_c.is_nan() {
            return Err(Error::value("admm_c must be positive"));
        }
        if self.alpha_min <= 0.0
            || self.alpha_min.is_nan()
            || self.alpha_max <= self.alpha_min
            || self.alpha_max.is_nan()
        {
            return Err(Error::value("need 0 < alpha_min < alpha_max"));
        }
        if self.eta <= 1.0 || self.eta.is_nan() {
            return Err(Error::value("eta must be > 1"));
        }
        Ok(())
    }
}

/// Outcome of a solver run.
///
/// `objective_trace` holds the initial objective followed by the
/// objective after each accepted outer step; it is non-increasing.
/// For the collaborative solver the trace records improving iterates
/// only (multiplier steps make raw per-iterate objectives oscillate),
/// and `primal_residual_trace` carries the raw `||A - B||_F` history.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub coefficients: CoefficientMatrix,
    pub objective_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
    pub primal_residual_trace: Option<Vec<f64>>,
}

impl SolverReport {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace never empty")
    }
}

/// Evaluates the model objective at `coeffs`.
///
/// The data term is `1/2 ||X - D A||_F^2`, restricted to observed
/// entries when the problem carries masks. Each model uses only the
/// weights that appear in it: `lasso` ignores `lambda2`, `glasso`
/// ignores `lambda1`.
pub fn evaluate_objective(problem: &CodingProblem, coeffs: &CoefficientMatrix, model: Model) -> Result<f64> {
    let a = coeffs.values();
    if a.nrows() != problem.dictionary().atom_count() {
        return Err(Error::shape(format!(
            "coefficient rows {} do not match atom count {}",
            a.nrows(),
            problem.dictionary().atom_count()
        )));
    }
    if a.ncols() != problem.num_signals() {
        return Err(Error::shape(format!(
            "coefficient columns {} do not match signal count {}",
            a.ncols(),
            problem.num_signals()
        )));
    }
    let mut residual = problem.dictionary().atoms().dot(a) - problem.signals();
    if let Some(masks) = problem.masks() {
        ndarray::Zip::from(&mut residual).and(masks).for_each(|r, &obs| {
            if !obs {
                *r = 0.0;
            }
        });
    }
    let data_term = 0.5 * residual.iter().map(|v| v * v).sum::<f64>();

    let groups = problem.dictionary().groups();
    let l1_term = || a.iter().map(|v| v.abs()).sum::<f64>();
    // Per-column group penalty: sum_j sum_g ||a_{g,j}||_2.
    let group_cols = || {
        let mut s = 0.0;
        for col in a.axis_iter(Axis(1)) {
            for g in groups.iter() {
                s += g.iter().map(|&i| col[i] * col[i]).sum::<f64>().sqrt();
            }
        }
        s
    };
    // Collaborative group penalty: sum_g ||A_g||_F over whole row blocks.
    let group_frob = || {
        let mut s = 0.0;
        for g in groups.iter() {
            let mut sq = 0.0;
            for &i in g {
                sq += a.row(i).iter().map(|v| v * v).sum::<f64>();
            }
            s += sq.sqrt();
        }
        s
    };

    let penalty = match model {
        Model::Lasso => problem.lambda1() * l1_term(),
        Model::GroupLasso => problem.lambda2() * group_frob(),
        Model::HiLasso => problem.lambda2() * group_cols() + problem.lambda1() * l1_term(),
        Model::CHiLasso => problem.lambda2() * group_frob() + problem.lambda1() * l1_term(),
    };
    Ok(data_term + penalty)
}
