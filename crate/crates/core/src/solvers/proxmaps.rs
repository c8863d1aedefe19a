//! The separable regularizers used by the solvers, as prox objects for
//! the engine in `sparsa`.

use ndarray::{Array1, Array2};

use crate::model::GroupPartition;
use crate::prox::{
    group_is_inactive, prox_l1_l2_inplace, soft_threshold_scalar, ProxParams, ProxState,
};
use crate::solvers::sparsa::SeparableProx;

/// `psi(X) = lambda1 * sum_ij |x_ij|`; prox is elementwise
/// soft-thresholding. Covers the Lasso (per column) and the l1 part of
/// the collaborative splitting.
#[derive(Debug, Clone)]
pub struct ElementwiseL1 {
    pub lambda1: f64,
}

impl SeparableProx for ElementwiseL1 {
    fn prox(&mut self, u: &Array2<f64>, alpha: f64) -> Array2<f64> {
        let lam = self.lambda1 / alpha;
        u.mapv(|v| soft_threshold_scalar(v, lam))
    }

    fn penalty(&self, x: &Array2<f64>) -> f64 {
        self.lambda1 * x.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// `psi(X) = lambda2 * sum_j sum_g ||x_{g,j}||_2`; prox is vector
/// shrinkage per column and group (the group-Lasso regularizer applied
/// to each signal).
#[derive(Debug, Clone)]
pub struct ColumnGroupL2 {
    pub lambda2: f64,
    groups: GroupPartition,
}

impl ColumnGroupL2 {
    pub fn new(lambda2: f64, groups: GroupPartition) -> Self {
        ColumnGroupL2 { lambda2, groups }
    }
}

impl SeparableProx for ColumnGroupL2 {
    fn prox(&mut self, u: &Array2<f64>, alpha: f64) -> Array2<f64> {
        let lam = self.lambda2 / alpha;
        let mut z = u.clone();
        for j in 0..u.ncols() {
            for g in self.groups.iter() {
                let norm = g.iter().map(|&i| u[[i, j]] * u[[i, j]]).sum::<f64>().sqrt();
                let factor = if norm > lam { 1.0 - lam / norm } else { 0.0 };
                for &i in g {
                    z[[i, j]] *= factor;
                }
            }
        }
        z
    }

    fn penalty(&self, x: &Array2<f64>) -> f64 {
        let mut s = 0.0;
        for j in 0..x.ncols() {
            for g in self.groups.iter() {
                s += g.iter().map(|&i| x[[i, j]] * x[[i, j]]).sum::<f64>().sqrt();
            }
        }
        self.lambda2 * s
    }
}

/// The hierarchical regularizer
/// `psi(X) = sum_j [ lambda2 * sum_g ||x_{g,j}||_2 + lambda1 * ||x_j||_1 ]`.
///
/// The prox has no closed form; each (column, group) subproblem is
/// solved by the splitting in [`crate::prox::prox_l1_l2_inplace`],
/// warm-started from the previous outer iteration, after an exact
/// inactivity test that zeroes whole groups without iterating.
#[derive(Debug, Clone)]
pub struct ColumnHierarchical {
    pub lambda1: f64,
    pub lambda2: f64,
    groups: GroupPartition,
    c: f64,
    inner_tol: f64,
    max_inner_iter: usize,
    /// Warm states indexed by `column * num_groups + group`.
    warm: Vec<ProxState>,
    /// Total splitting sweeps across all prox calls.
    pub inner_iterations: usize,
    /// False if any subproblem hit its sweep limit before its tolerance.
    pub inner_converged: bool,
}

impl ColumnHierarchical {
    pub fn new(
        lambda1: f64,
        lambda2: f64,
        groups: GroupPartition,
        num_signals: usize,
        c: f64,
        inner_tol: f64,
        max_inner_iter: usize,
    ) -> Self {
        let warm = (0..num_signals * groups.num_groups())
            .map(|k| ProxState::zeros(groups.group(k % groups.num_groups()).len()))
            .collect();
        ColumnHierarchical {
            lambda1,
            lambda2,
            groups,
            c,
            inner_tol,
            max_inner_iter,
            warm,
            inner_iterations: 0,
            inner_converged: true,
        }
    }
}

impl SeparableProx for ColumnHierarchical {
    fn prox(&mut self, u: &Array2<f64>, alpha: f64) -> Array2<f64> {
        let params_for = |l1t: f64, l2t: f64| ProxParams {
            lambda1_tilde: l1t,
            lambda2_tilde: l2t,
            c: self.c,
            tol: self.inner_tol,
            max_iter: self.max_inner_iter,
        };
        let l1t = self.lambda1 / alpha;
        let l2t = self.lambda2 / alpha;
        let params = params_for(l1t, l2t);
        let num_groups = self.groups.num_groups();
        let mut z = Array2::zeros(u.dim());
        let mut w = Array1::zeros(0);
        for j in 0..u.ncols() {
            for (gi, g) in self.groups.iter().enumerate() {
                if w.len() != g.len() {
                    w = Array1::zeros(g.len());
                }
                for (k, &i) in g.iter().enumerate() {
                    w[k] = u[[i, j]];
                }
                let state = &mut self.warm[j * num_groups + gi];
                if group_is_inactive(w.view(), l1t, l2t) {
                    state.reset();
                    // z entries already zero
                    continue;
                }
                let (iters, converged) = prox_l1_l2_inplace(w.view(), &params, state);
                self.inner_iterations += iters;
                self.inner_converged &= converged;
                for (k, &i) in g.iter().enumerate() {
                    z[[i, j]] = state.b[k];
                }
            }
        }
        z
    }

    fn penalty(&self, x: &Array2<f64>) -> f64 {
        let mut group_term = 0.0;
        for j in 0..x.ncols() {
            for g in self.groups.iter() {
                group_term += g.iter().map(|&i| x[[i, j]] * x[[i, j]]).sum::<f64>().sqrt();
            }
        }
        let l1_term = x.iter().map(|v| v.abs()).sum::<f64>();
        self.lambda2 * group_term + self.lambda1 * l1_term
    }
}
