//! The proximal-gradient engine and the four model solvers.

mod collab;
mod proxmaps;
mod sparsa;

pub use collab::{solve_chilasso, CollabState};
pub use proxmaps::{ColumnGroupL2, ColumnHierarchical, ElementwiseL1};
pub use sparsa::{sparsa_minimize, SeparableProx, SparsaState};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{CodingProblem, Model, SolverConfig, SolverReport};

/// The (optionally masked) quadratic data term of a coding problem:
/// `f(A) = 1/2 || M .* (D A - X) ||_F^2` with gradient
/// `D^T (M .* (D A - X))`. Unobserved residual entries are zeroed in
/// both; the dictionary itself is untouched.
pub(crate) struct DataTerm<'a> {
    dict: &'a Array2<f64>,
    signals: &'a Array2<f64>,
    masks: Option<&'a Array2<bool>>,
}

impl<'a> DataTerm<'a> {
    pub(crate) fn new(problem: &'a CodingProblem) -> Self {
        DataTerm {
            dict: problem.dictionary().atoms(),
            signals: problem.signals(),
            masks: problem.masks(),
        }
    }

    pub(crate) fn eval(&self, a: &Array2<f64>) -> (f64, Array2<f64>) {
        let mut residual = self.dict.dot(a);
        residual -= self.signals;
        if let Some(masks) = self.masks {
            ndarray::Zip::from(&mut residual).and(masks).for_each(|r, &obs| {
                if !obs {
                    *r = 0.0;
                }
            });
        }
        let value = 0.5 * sparsa::frob_sq(&residual);
        let grad = self.dict.t().dot(&residual);
        (value, grad)
    }
}

/// The data-fit value and gradient at `a` (the smooth part every solver
/// minimizes); public for verification against finite differences.
pub fn data_term(problem: &CodingProblem, a: &Array2<f64>) -> (f64, Array2<f64>) {
    DataTerm::new(problem).eval(a)
}

fn require_single_signal(problem: &CodingProblem, what: &str) -> Result<()> {
    if problem.num_signals() != 1 {
        return Err(Error::shape(format!(
            "{what} takes a single-signal problem (n = 1), got n = {}",
            problem.num_signals()
        )));
    }
    Ok(())
}

/// Joint per-column minimization of the data term plus `penalty`,
/// starting from zero coefficients.
fn minimize_separable<P: SeparableProx>(
    problem: &CodingProblem,
    penalty: &mut P,
    config: &SolverConfig,
) -> Result<SolverReport> {
    let data = DataTerm::new(problem);
    let x0 = Array2::zeros((problem.dictionary().atom_count(), problem.num_signals()));
    sparsa_minimize(|a| data.eval(a), penalty, x0, config)
}

/// Solves `min_a 1/2 ||x - D a||^2 + lambda1 ||a||_1` for one signal.
pub fn solve_lasso(problem: &CodingProblem, config: &SolverConfig) -> Result<SolverReport> {
    require_single_signal(problem, "solve_lasso")?;
    minimize_separable(problem, &mut ElementwiseL1 { lambda1: problem.lambda1() }, config)
}

/// Solves `min_a 1/2 ||x - D a||^2 + lambda2 sum_g ||a_g||_2` for one signal.
pub fn solve_group_lasso(problem: &CodingProblem, config: &SolverConfig) -> Result<SolverReport> {
    require_single_signal(problem, "solve_group_lasso")?;
    let mut penalty = ColumnGroupL2::new(problem.lambda2(), problem.dictionary().groups().clone());
    minimize_separable(problem, &mut penalty, config)
}

/// Solves the single-signal hierarchical model
/// `min_a 1/2 ||x - D a||^2 + lambda2 sum_g ||a_g||_2 + lambda1 ||a||_1`.
pub fn solve_hilasso(problem: &CodingProblem, config: &SolverConfig) -> Result<SolverReport> {
    require_single_signal(problem, "solve_hilasso")?;
    minimize_hierarchical(problem, config)
}

fn minimize_hierarchical(problem: &CodingProblem, config: &SolverConfig) -> Result<SolverReport> {
    let inner_tol = (config.tol * 1e-2).min(1e-8);
    let mut penalty = ColumnHierarchical::new(
        problem.lambda1(),
        problem.lambda2(),
        problem.dictionary().groups().clone(),
        problem.num_signals(),
        config.admm_c,
        inner_tol,
        config.max_inner_iter,
    );
    minimize_separable(problem, &mut penalty, config)
}

/// Solves `problem` under `model`.
///
/// `lasso` and `hilasso` penalties are per-column, so a multi-signal
/// problem is the n independent single-signal problems minimized
/// jointly. `glasso` on a single signal is the classic group Lasso;
/// on a matrix it is the collaborative group penalty, handled by the
/// collaborative solver with the l1 weight forced to zero. `chilasso`
/// always goes through the collaborative solver.
pub fn solve(problem: &CodingProblem, model: Model, config: &SolverConfig) -> Result<SolverReport> {
    match model {
        Model::Lasso => {
            minimize_separable(problem, &mut ElementwiseL1 { lambda1: problem.lambda1() }, config)
        }
        Model::GroupLasso => {
            if problem.num_signals() == 1 {
                let mut penalty =
                    ColumnGroupL2::new(problem.lambda2(), problem.dictionary().groups().clone());
                minimize_separable(problem, &mut penalty, config)
            } else {
                let glasso = problem.with_lambdas(0.0, problem.lambda2())?;
                solve_chilasso(&glasso, config)
            }
        }
        Model::HiLasso => minimize_hierarchical(problem, config),
        Model::CHiLasso => solve_chilasso(problem, config),
    }
}
