//! Shared fixtures and independent oracles for the solver tests. The
//! oracles deliberately avoid the library's solver paths: coordinate
//! descent for the l1 model, plain subgradient descent for the
//! hierarchical one.

use chilasso::model::{CodingProblem, Dictionary, GroupPartition};
use chilasso::synth::rng::Stream;
use ndarray::{Array1, Array2, Axis};

/// Gaussian dictionary with unit-norm columns and contiguous groups.
pub fn random_dictionary(rng: &mut Stream, m: usize, num_groups: usize, group_len: usize) -> Dictionary {
    let p = num_groups * group_len;
    let mut atoms = Array2::zeros((m, p));
    for j in 0..p {
        for i in 0..m {
            atoms[[i, j]] = rng.standard_normal();
        }
    }
    for mut col in atoms.axis_iter_mut(Axis(1)) {
        let n = col.dot(&col).sqrt();
        col.mapv_inplace(|v| v / n);
    }
    Dictionary::new(atoms, GroupPartition::contiguous(num_groups, group_len).unwrap()).unwrap()
}

/// A signal built from a few atoms plus Gaussian noise.
pub fn random_signal(rng: &mut Stream, dict: &Dictionary, nnz: usize, noise: f64) -> Array1<f64> {
    let m = dict.signal_dim();
    let p = dict.atom_count();
    let mut x = Array1::zeros(m);
    for _ in 0..nnz {
        let atom = rng.uniform_below(p as u64) as usize;
        let coef = rng.standard_normal();
        for i in 0..m {
            x[i] += coef * dict.atoms()[[i, atom]];
        }
    }
    for i in 0..m {
        x[i] += noise * rng.standard_normal();
    }
    x
}

pub fn single_signal_problem(dict: &Dictionary, x: &Array1<f64>, l1: f64, l2: f64) -> CodingProblem {
    CodingProblem::new(
        x.clone().insert_axis(Axis(1)),
        dict.clone(),
        l1,
        l2,
        None,
    )
    .unwrap()
}

/// Largest eigenvalue of `D^T D` by power iteration.
pub fn largest_eigenvalue(d: &Array2<f64>) -> f64 {
    let p = d.ncols();
    let gram = d.t().dot(d);
    let mut v = Array1::from_elem(p, 1.0 / (p as f64).sqrt());
    let mut lmax = 1.0;
    for _ in 0..300 {
        let w = gram.dot(&v);
        lmax = w.dot(&v);
        let n = w.dot(&w).sqrt();
        if n > 0.0 {
            v = w / n;
        }
    }
    lmax
}

pub fn hilasso_objective(
    d: &Array2<f64>,
    x: &Array1<f64>,
    groups: &[Vec<usize>],
    l1: f64,
    l2: f64,
    a: &Array1<f64>,
) -> f64 {
    let r = d.dot(a) - x;
    let grp: f64 = groups
        .iter()
        .map(|g| g.iter().map(|&i| a[i] * a[i]).sum::<f64>().sqrt())
        .sum();
    let l1n: f64 = a.iter().map(|v| v.abs()).sum();
    0.5 * r.dot(&r) + l2 * grp + l1 * l1n
}

/// Independent slow check for the hierarchical objective: plain
/// subgradient descent with a staged geometric step decay, tracking the
/// best objective seen. `total_iters` subgradient steps in 100 stages,
/// step shrinking by 0.85 per stage from 1/lambda_max(D^T D).
pub fn subgradient_hilasso_best(
    d: &Array2<f64>,
    x: &Array1<f64>,
    groups: &[Vec<usize>],
    l1: f64,
    l2: f64,
    total_iters: usize,
) -> f64 {
    let p = d.ncols();
    let mut a = Array1::<f64>::zeros(p);
    let mut best = hilasso_objective(d, x, groups, l1, l2, &a);
    let stages = 100;
    let per_stage = total_iters / stages;
    let mut step = 1.0 / largest_eigenvalue(d).max(1e-12);
    for _ in 0..stages {
        for _ in 0..per_stage {
            let r = d.dot(&a) - x;
            let mut g = d.t().dot(&r);
            for grp in groups {
                let norm = grp.iter().map(|&i| a[i] * a[i]).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for &i in grp {
                        g[i] += l2 * a[i] / norm;
                    }
                }
            }
            for (gi, &ai) in g.iter_mut().zip(a.iter()) {
                if ai != 0.0 {
                    *gi += l1 * ai.signum();
                }
            }
            a.scaled_add(-step, &g);
            let obj = hilasso_objective(d, x, groups, l1, l2, &a);
            if obj < best {
                best = obj;
            }
        }
        step *= 0.85;
    }
    best
}

/// Independent cyclic coordinate-descent solver for
/// `1/2 ||x - D a||^2 + l1 ||a||_1`. Returns the final objective.
pub fn coordinate_descent_lasso(d: &Array2<f64>, x: &Array1<f64>, l1: f64, sweeps: usize) -> f64 {
    let (m, p) = d.dim();
    let mut a = Array1::<f64>::zeros(p);
    let mut residual = x.clone(); // x - D a
    let col_sq: Vec<f64> = (0..p).map(|j| d.column(j).dot(&d.column(j))).collect();
    for _ in 0..sweeps {
        let mut max_change = 0.0f64;
        for j in 0..p {
            if col_sq[j] == 0.0 {
                continue;
            }
            let old = a[j];
            let rho = d.column(j).dot(&residual) + col_sq[j] * old;
            let new = soft(rho, l1) / col_sq[j];
            if new != old {
                let delta = new - old;
                for i in 0..m {
                    residual[i] -= delta * d[[i, j]];
                }
                a[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < 1e-13 {
            break;
        }
    }
    let l1n: f64 = a.iter().map(|v| v.abs()).sum();
    0.5 * residual.dot(&residual) + l1 * l1n
}

fn soft(v: f64, lam: f64) -> f64 {
    if v > lam {
        v - lam
    } else if v < -lam {
        v + lam
    } else {
        0.0
    }
}
