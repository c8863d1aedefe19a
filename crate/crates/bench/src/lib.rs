//! Shared fixtures for the solver benchmarks.

use chilasso::model::CodingProblem;
use chilasso::{gen_dictionary, gen_trial, SynthSpec};

/// A solvable synthetic problem at the given scale.
pub fn fixture(num_groups: usize, atoms_per_group: usize, signal_dim: usize, n: usize, l1: f64, l2: f64) -> CodingProblem {
    let spec = SynthSpec {
        num_groups,
        atoms_per_group,
        signal_dim,
        k: (atoms_per_group / 4).max(1),
        num_active_groups: 2.min(num_groups),
        n,
        sigma: 0.05,
        missing_fraction: 0.0,
        seed: 1234,
    };
    let dict = gen_dictionary(&spec).expect("valid spec");
    let (problem, _) = gen_trial(&spec, &dict, 0).expect("valid trial");
    problem.with_lambdas(l1, l2).expect("valid lambdas")
}
