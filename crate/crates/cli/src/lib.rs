//! Library surface of the command-line front end; `main` is a thin
//! argument-parsing wrapper over [`commands`].

pub mod commands;
pub mod spec;

pub use commands::{
    coherence_report, exit_code, run_coherence, run_experiment, run_experiment_spec, run_gen,
    run_solve, CoherenceReport, ExperimentOutcome, SolveOverrides, EXIT_INVALID, EXIT_MAX_ITER,
    EXPERIMENT_CSV_HEADER, SUMMARY_CSV_HEADER,
};
pub use spec::{
    load_experiment_spec, load_synth_spec, save_experiment_spec, save_synth_spec, Axis,
    ExperimentSpec,
};
