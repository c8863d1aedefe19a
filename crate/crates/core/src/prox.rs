//! Shrinkage operators and the splitting solver for the per-group
//! l1 + l2 proximal subproblem
//!
//! ```text
//! min_b 1/2 ||b - w||^2 + l2t * ||b||_2 + l1t * ||b||_1
//! ```
//!
//! solved by alternating closed-form updates on the constrained form
//! `b = beta` of the same objective:
//!
//! ```text
//! b    = 1/(c+1) * S(w + c*beta - p, l1t)
//! beta = 1/c     * Sv(p + c*b, l2t)
//! p    = p + c*(b - beta)
//! ```
//!
//! where `S` is scalar soft-thresholding and `Sv` vector shrinkage.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};

/// Scalar soft-thresholding `sgn(w) * max(0, |w| - lam)`.
#[inline]
pub fn soft_threshold_scalar(w: f64, lam: f64) -> f64 {
    if w > lam {
        w - lam
    } else if w < -lam {
        w + lam
    } else {
        0.0
    }
}

/// Elementwise soft-thresholding of a vector.
pub fn soft_threshold(w: ArrayView1<'_, f64>, lam: f64) -> Array1<f64> {
    w.mapv(|v| soft_threshold_scalar(v, lam))
}

/// Vector shrinkage `[1 - lam/||b||_2]_+ * b`; returns the zero vector
/// when `||b||_2 <= lam` (including `b = 0`).
pub fn vector_shrink(b: ArrayView1<'_, f64>, lam: f64) -> Array1<f64> {
    let norm = b.dot(&b).sqrt();
    if norm <= lam || norm == 0.0 {
        Array1::zeros(b.len())
    } else {
        let factor = 1.0 - lam / norm;
        b.mapv(|v| factor * v)
    }
}

/// Parameters of the l1 + l2 proximal subproblem: the scaled weights
/// `l1t = lambda1/alpha`, `l2t = lambda2/alpha`, the splitting constant
/// `c` and the inner stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxParams {
    pub lambda1_tilde: f64,
    pub lambda2_tilde: f64,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl ProxParams {
    pub const DEFAULT_TOL: f64 = 1e-8;
    pub const DEFAULT_MAX_ITER: usize = 200;

    pub fn new(lambda1_tilde: f64, lambda2_tilde: f64) -> Self {
        ProxParams {
            lambda1_tilde,
            lambda2_tilde,
            c: 1.0,
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda1_tilde < 0.0 || self.lambda1_tilde.is_nan() || self.lambda2_tilde < 0.0 || self.lambda2_tilde.is_nan() {
            return Err(Error::value("scaled weights must be nonnegative"));
        }
        if self.c <= 0.0 || self.c.is_nan() {
            return Err(Error::value("c must be positive"));
        }
        if self.tol <= 0.0 || self.tol.is_nan() || self.max_iter == 0 {
            return Err(Error::value("tol must be positive and max_iter >= 1"));
        }
        Ok(())
    }
}

/// Iterate state of the splitting: primal `b`, split copy `beta` and the
/// multipliers `p`. A zero state is the cold start; passing the state
/// left by a previous call warm-starts the next one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxState {
    pub b: Array1<f64>,
    pub beta: Array1<f64>,
    pub multipliers: Array1<f64>,
}

impl ProxState {
    pub fn zeros(len: usize) -> Self {
        ProxState {
            b: Array1::zeros(len),
            beta: Array1::zeros(len),
            multipliers: Array1::zeros(len),
        }
    }

    pub fn reset(&mut self) {
        self.b.fill(0.0);
        self.beta.fill(0.0);
        self.multipliers.fill(0.0);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxSolution {
    pub state: ProxState,
    pub iterations: usize,
    pub converged: bool,
}

impl ProxSolution {
    /// The computed minimizer (the `b` iterate).
    pub fn value(&self) -> &Array1<f64> {
        &self.state.b
    }
}

/// Runs the splitting iterations on `state` in place. Returns the sweep
/// count and whether `max(||b - beta||_inf, ||beta - beta_prev||_inf)`
/// dropped to `params.tol` within `params.max_iter` sweeps.
pub fn prox_l1_l2_inplace(w: ArrayView1<'_, f64>, params: &ProxParams, state: &mut ProxState) -> (usize, bool) {
    debug_assert_eq!(w.len(), state.b.len());
    let c = params.c;
    let l1t = params.lambda1_tilde;
    let l2t = params.lambda2_tilde;
    let inv_c1 = 1.0 / (c + 1.0);

    for iter in 1..=params.max_iter {
        // b = 1/(c+1) * S(w + c*beta - p, l1t)
        for ((b, &wi), (&beta, &p)) in state
            .b
            .iter_mut()
            .zip(w.iter())
            .zip(state.beta.iter().zip(state.multipliers.iter()))
        {
            *b = inv_c1 * soft_threshold_scalar(wi + c * beta - p, l1t);
        }
        // beta = 1/c * Sv(p + c*b, l2t)
        let mut sq = 0.0;
        for (&p, &b) in state.multipliers.iter().zip(state.b.iter()) {
            let v = p + c * b;
            sq += v * v;
        }
        let norm = sq.sqrt();
        let factor = if norm > l2t { (1.0 - l2t / norm) / c } else { 0.0 };
        let mut dual_change: f64 = 0.0;
        for (beta, (&p, &b)) in state
            .beta
            .iter_mut()
            .zip(state.multipliers.iter().zip(state.b.iter()))
        {
            let new = factor * (p + c * b);
            dual_change = dual_change.max((new - *beta).abs());
            *beta = new;
        }
        // p = p + c*(b - beta)
        let mut primal: f64 = 0.0;
        for (p, (&b, &beta)) in state
            .multipliers
            .iter_mut()
            .zip(state.b.iter().zip(state.beta.iter()))
        {
            let r = b - beta;
            primal = primal.max(r.abs());
            *p += c * r;
        }
        if primal.max(dual_change) <= params.tol {
            return (iter, true);
        }
    }
    (params.max_iter, false)
}

/// Minimizes `1/2 ||b - w||^2 + l2t ||b||_2 + l1t ||b||_1`.
///
/// Cold-starts from zero unless `warm` is given. A cheap exact test
/// first decides whether the whole vector is inactive, in which case
/// the zero solution is returned without iterating.
pub fn prox_l1_l2(w: ArrayView1<'_, f64>, params: &ProxParams, warm: Option<&ProxState>) -> ProxSolution {
    if group_is_inactive(w, params.lambda1_tilde, params.lambda2_tilde) {
        return ProxSolution {
            state: ProxState::zeros(w.len()),
            iterations: 0,
            converged: true,
        };
    }
    let mut state = match warm {
        Some(s) => s.clone(),
        None => ProxState::zeros(w.len()),
    };
    let (iterations, converged) = prox_l1_l2_inplace(w, params, &mut state);
    ProxSolution { state, iterations, converged }
}

/// Exact inactivity test: `0` minimizes the l1 + l2 subproblem at `w`
/// iff `|| S(w, l1t) ||_2 <= l2t`, i.e. the distance from `w` to the
/// l1t-radius sup-norm ball is within the shrink weight.
pub fn group_is_inactive(w: ArrayView1<'_, f64>, lambda1_tilde: f64, lambda2_tilde: f64) -> bool {
    let mut sq = 0.0;
    for &wi in w.iter() {
        let s = soft_threshold_scalar(wi, lambda1_tilde);
        sq += s * s;
    }
    sq.sqrt() <= lambda2_tilde
}
