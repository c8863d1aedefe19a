//! Proximal-gradient engine with spectral step sizes.
//!
//! Minimizes `f(X) + psi(X)` for smooth convex `f` and a separable
//! regularizer `psi` by iterating
//!
//! ```text
//! U = X - grad f(X) / alpha
//! X' = argmin_Z 1/2 ||Z - U||^2 + psi(Z)/alpha
//! ```
//!
//! with `alpha` chosen by the Barzilai-Borwein rule and grown by `eta`
//! until the step decreases the objective. Iterates are `p x n`
//! matrices; a single-signal problem is the `n = 1` case.

use ndarray::Array2;

use crate::error::Result;
use crate::model::{CoefficientMatrix, SolverConfig, SolverReport};

/// The separable regularizer of a solver: its proximal map and its value.
pub trait SeparableProx {
    /// `argmin_Z 1/2 ||Z - U||_F^2 + psi(Z)/alpha`. Implementations may
    /// keep warm-start state between calls.
    fn prox(&mut self, u: &Array2<f64>, alpha: f64) -> Array2<f64>;

    /// `psi(X)`.
    fn penalty(&self, x: &Array2<f64>) -> f64;
}

/// One iterate of the engine: the point, the accepted step scale, the
/// smooth gradient there and the full objective value.
#[derive(Debug, Clone)]
pub struct SparsaState {
    pub iterate: Array2<f64>,
    pub alpha: f64,
    pub gradient: Array2<f64>,
    pub objective: f64,
}

pub(crate) fn frob_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

pub(crate) fn mat_dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Runs the engine from `x0` until the relative change of an accepted
/// iterate drops to `config.tol` or `config.max_outer_iter` accepted
/// steps have been taken.
///
/// `smooth` returns `(f(X), grad f(X))`. The objective trace holds the
/// initial objective followed by one entry per accepted step and is
/// non-increasing by construction (a trial step is only accepted when
/// it does not increase `f + psi`; otherwise `alpha` is multiplied by
/// `eta` and the step retried).
pub fn sparsa_minimize<F, P>(
    mut smooth: F,
    prox: &mut P,
    x0: Array2<f64>,
    config: &SolverConfig,
) -> Result<SolverReport>
where
    F: FnMut(&Array2<f64>) -> (f64, Array2<f64>),
    P: SeparableProx + ?Sized,
{
    config.validate()?;
    let (f0, g0) = smooth(&x0);
    let mut state = SparsaState {
        objective: f0 + prox.penalty(&x0),
        gradient: g0,
        iterate: x0,
        alpha: 1.0,
    };
    let mut trace = vec![state.objective];
    let mut converged = false;
    let mut accepted = 0usize;
    let mut alpha_bb = 1.0f64;

    'outer: for _ in 0..config.max_outer_iter {
        let mut alpha = alpha_bb.clamp(config.alpha_min, config.alpha_max);
        let (z, gz, obj_z) = loop {
            let u = &state.iterate - &(&state.gradient / alpha);
            let z = prox.prox(&u, alpha);
            let (fz, gz) = smooth(&z);
            let obj_z = fz + prox.penalty(&z);
            if obj_z <= state.objective {
                break (z, gz, obj_z);
            }
            alpha *= config.eta;
            if alpha > config.alpha_max {
                // No decrease even with a vanishing step: numerical stall.
                break 'outer;
            }
        };
        let step = &z - &state.iterate;
        let step_sq = frob_sq(&step);
        let curvature = mat_dot(&(&gz - &state.gradient), &step);
        let prev_norm = frob_sq(&state.iterate).sqrt();

        state.iterate = z;
        state.gradient = gz;
        state.objective = obj_z;
        state.alpha = alpha;
        trace.push(obj_z);
        accepted += 1;

        if step_sq.sqrt() / prev_norm.max(1.0) <= config.tol {
            converged = true;
            break;
        }
        alpha_bb = if step_sq > 0.0 && curvature > 0.0 {
            curvature / step_sq
        } else {
            1.0
        };
    }

    Ok(SolverReport {
        coefficients: CoefficientMatrix::new(state.iterate),
        objective_trace: trace,
        outer_iterations: accepted,
        converged,
        primal_residual_trace: None,
    })
}
