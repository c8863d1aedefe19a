//! The four commands behind the binary: data generation, solving,
//! experiment sweeps and coherence analysis. Everything here is
//! deterministic given its input files and flags.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;

use chilasso::error::{Error, Result};
use chilasso::io::{self, Artifact, ProblemData};
use chilasso::metrics::{
    coeff_mse, coeff_mse_support, cross_coherence, group_hamming, mutual_coherence,
    reconstruct_components, separation_error, support_hamming, uniqueness_check_symmetric,
    MetricReport, DEFAULT_SUPPORT_TAU,
};
use chilasso::model::{CodingProblem, Dictionary, Model, SolverConfig};
use chilasso::synth::GroundTruth;
use chilasso::{gen_dictionary, gen_trial, solve};

use crate::spec::{load_experiment_spec, load_synth_spec, ExperimentSpec};

/// Exit code for input/validation failures.
pub const EXIT_INVALID: i32 = 2;
/// Exit code for solver runs that stopped on the iteration cap.
pub const EXIT_MAX_ITER: i32 = 3;

/// Maps an error to the process exit code: 1 for I/O problems, 2 for
/// anything the user can fix in their inputs.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 1,
        _ => EXIT_INVALID,
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// `gen`: draw the dictionary and one trial for a synthetic spec and
/// write `dictionary.json`, `problem.json`, `ground_truth.json` under
/// `out_dir`. Returns the three paths.
pub fn run_gen(spec_path: &Path, out_dir: &Path, seed_override: Option<u64>) -> Result<[PathBuf; 3]> {
    let mut spec = load_synth_spec(spec_path)?;
    if let Some(seed) = seed_override {
        spec.seed = seed;
    }
    let dict = gen_dictionary(&spec)?;
    let (problem, truth) = gen_trial(&spec, &dict, 0)?;

    std::fs::create_dir_all(out_dir)?;
    let dict_path = out_dir.join("dictionary.json");
    let problem_path = out_dir.join("problem.json");
    let truth_path = out_dir.join("ground_truth.json");

    io::store(&Artifact::Dictionary(dict), &dict_path)?;
    io::store(
        &Artifact::Problem(ProblemData {
            signals: problem.signals().clone(),
            lambda1: problem.lambda1(),
            lambda2: problem.lambda2(),
            masks: problem.masks().cloned(),
        }),
        &problem_path,
    )?;
    io::store(&Artifact::GroundTruth(truth), &truth_path)?;
    Ok([dict_path, problem_path, truth_path])
}

#[derive(Debug, Clone, Default)]
pub struct SolveOverrides {
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

fn config_with(tol: Option<f64>, max_iter: Option<usize>) -> Result<SolverConfig> {
    let mut config = SolverConfig::default();
    if let Some(tol) = tol {
        config.tol = tol;
    }
    if let Some(max_iter) = max_iter {
        config.max_outer_iter = max_iter;
    }
    config.validate()?;
    Ok(config)
}

/// `solve`: load a dictionary and a signal file, solve under `model`
/// and write the report. Returns the report's convergence flag.
pub fn run_solve(
    model: Model,
    dict_path: &Path,
    signals_path: &Path,
    overrides: &SolveOverrides,
    out_path: &Path,
) -> Result<bool> {
    let dict = io::load_dictionary(dict_path)?;
    let data = io::load_problem(signals_path)?;
    let problem = CodingProblem::new(
        data.signals,
        dict,
        overrides.lambda1.unwrap_or(data.lambda1),
        overrides.lambda2.unwrap_or(data.lambda2),
        data.masks,
    )?;
    let config = config_with(overrides.tol, overrides.max_iter)?;
    let report = solve(&problem, model, &config)?;
    let converged = report.converged;
    io::store(&Artifact::Report(report), out_path)?;
    Ok(converged)
}

pub const EXPERIMENT_CSV_HEADER: &str = "trial,model,axis,axis_value,lambda1,lambda2,mse_scaled,mse_support_scaled,hamming,separation_error,group_hamming,converged,outer_iterations";
pub const SUMMARY_CSV_HEADER: &str = "model,axis,axis_value,metric,lambda1,lambda2,mean_value";

/// The metric columns the summary aggregates, in output order.
const SUMMARY_METRICS: [&str; 5] = [
    "mse_scaled",
    "mse_support_scaled",
    "hamming",
    "separation_error",
    "group_hamming",
];

#[derive(Debug, Clone)]
struct Row {
    trial: usize,
    model: Model,
    axis_idx: usize,
    axis_value: f64,
    lambda_idx: usize,
    lambda1: f64,
    lambda2: f64,
    metrics: MetricReport,
    converged: bool,
    outer_iterations: usize,
}

impl Row {
    fn render(&self, axis: &str) -> String {
        let sep = self
            .metrics
            .separation_error
            .map(|v| v.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{axis},{},{},{},{},{},{},{sep},{},{},{}",
            self.trial,
            self.model,
            self.axis_value,
            self.lambda1,
            self.lambda2,
            self.metrics.mse_scaled,
            self.metrics.mse_support_scaled,
            self.metrics.hamming,
            self.metrics.group_hamming,
            self.converged,
            self.outer_iterations
        )
    }

    fn metric(&self, name: &str) -> f64 {
        match name {
            "mse_scaled" => self.metrics.mse_scaled,
            "mse_support_scaled" => self.metrics.mse_support_scaled,
            "hamming" => self.metrics.hamming,
            "separation_error" => self.metrics.separation_error.unwrap_or(f64::INFINITY),
            "group_hamming" => self.metrics.group_hamming,
            _ => unreachable!("unknown metric {name}"),
        }
    }
}

fn compute_metrics(dict: &Dictionary, truth: &GroundTruth, est: &chilasso::CoefficientMatrix) -> Result<MetricReport> {
    let tau = DEFAULT_SUPPORT_TAU;
    let est_components = reconstruct_components(dict, est, &truth.active_groups)?;
    Ok(MetricReport {
        mse_scaled: coeff_mse(est, &truth.coefficients)?,
        mse_support_scaled: coeff_mse_support(est, &truth.coefficients)?,
        hamming: support_hamming(est, &truth.coefficients, tau)?,
        separation_error: Some(separation_error(&truth.per_source_components, &est_components)?),
        group_hamming: group_hamming(est, &truth.coefficients, dict.groups(), tau)?,
    })
}

/// Canonical cache key: models that ignore a weight collapse it, so a
/// lambda sweep solves each distinct effective pair once.
fn effective_lambda_key(model: Model, l1: f64, l2: f64) -> (u64, u64) {
    match model {
        Model::Lasso => (l1.to_bits(), 0),
        Model::GroupLasso => (0, l2.to_bits()),
        Model::HiLasso | Model::CHiLasso => (l1.to_bits(), l2.to_bits()),
    }
}

#[derive(Clone)]
struct SolveOutcome {
    metrics: MetricReport,
    converged: bool,
    outer_iterations: usize,
}

fn run_task(
    spec: &ExperimentSpec,
    dict: &Dictionary,
    axis_idx: usize,
    trial: usize,
    config: &SolverConfig,
) -> Result<Vec<Row>> {
    let axis_value = spec.axis_values[axis_idx];
    let synth = spec.spec_at(axis_value)?;
    let (problem, truth) = gen_trial(&synth, dict, trial as u64)?;
    let mut rows = Vec::with_capacity(spec.models.len() * spec.lambda_grid.len());
    for &model in &spec.models {
        let mut cache: HashMap<(u64, u64), SolveOutcome> = HashMap::new();
        for (lambda_idx, &(l1, l2)) in spec.lambda_grid.iter().enumerate() {
            let key = effective_lambda_key(model, l1, l2);
            let outcome = match cache.get(&key) {
                Some(hit) => hit.clone(),
                None => {
                    let report = solve(&problem.with_lambdas(l1, l2)?, model, config)?;
                    let outcome = SolveOutcome {
                        metrics: compute_metrics(dict, &truth, &report.coefficients)?,
                        converged: report.converged,
                        outer_iterations: report.outer_iterations,
                    };
                    cache.insert(key, outcome.clone());
                    outcome
                }
            };
            rows.push(Row {
                trial,
                model,
                axis_idx,
                axis_value,
                lambda_idx,
                lambda1: l1,
                lambda2: l2,
                metrics: outcome.metrics,
                converged: outcome.converged,
                outer_iterations: outcome.outer_iterations,
            });
        }
    }
    Ok(rows)
}

fn summarize(spec: &ExperimentSpec, rows: &[Row]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for &model in &spec.models {
        for (axis_idx, &axis_value) in spec.axis_values.iter().enumerate() {
            for metric in SUMMARY_METRICS {
                // mean over trials per lambda pair, then the best mean
                let mut best: Option<(usize, f64)> = None;
                for lambda_idx in 0..spec.lambda_grid.len() {
                    let values: Vec<f64> = rows
                        .iter()
                        .filter(|r| r.model == model && r.axis_idx == axis_idx && r.lambda_idx == lambda_idx)
                        .map(|r| r.metric(metric))
                        .collect();
                    if values.is_empty() {
                        continue;
                    }
                    let mean = values.iter().sum::<f64>() / values.len() as f64;
                    let better = match best {
                        None => true,
                        Some((_, incumbent)) => mean < incumbent,
                    };
                    if better {
                        best = Some((lambda_idx, mean));
                    }
                }
                if let Some((lambda_idx, mean)) = best {
                    let (l1, l2) = spec.lambda_grid[lambda_idx];
                    out.push_str(&format!(
                        "{model},{},{axis_value},{metric},{l1},{l2},{mean}\n",
                        spec.axis.name()
                    ));
                }
            }
        }
    }
    out
}

/// Result of an experiment run: where the per-row and summary tables
/// were written and how many data rows were produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub rows_path: PathBuf,
    pub summary_path: PathBuf,
    pub rows: usize,
}

/// Derives the summary table path from the row table path
/// (`results.csv` -> `results_summary.csv`).
pub fn summary_path_for(out_csv: &Path) -> PathBuf {
    let stem = out_csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".to_string());
    let ext = out_csv
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    out_csv.with_file_name(format!("{stem}_summary.{ext}"))
}

/// `experiment`: run the full sweep described by the spec file and
/// write one CSV row per (trial, model, axis value, lambda pair) plus a
/// summary CSV of per-model best means. Trials run concurrently; the
/// row order is canonical (trial, model, axis, lambda), so reruns are
/// byte-identical.
pub fn run_experiment(
    spec_path: &Path,
    out_csv: &Path,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> Result<ExperimentOutcome> {
    let spec = load_experiment_spec(spec_path)?;
    run_experiment_spec(&spec, out_csv, tol, max_iter)
}

/// [`run_experiment`] on an already-parsed spec.
pub fn run_experiment_spec(
    spec: &ExperimentSpec,
    out_csv: &Path,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let config = config_with(tol, max_iter)?;

    // One dictionary per axis value (the generator is deterministic in
    // the spec, so sigma sweeps share one dictionary).
    let dicts: Vec<Dictionary> = spec
        .axis_values
        .iter()
        .map(|&v| gen_dictionary(&spec.spec_at(v)?))
        .collect::<Result<_>>()?;

    let tasks: Vec<(usize, usize)> = (0..spec.axis_values.len())
        .flat_map(|axis_idx| (0..spec.trials).map(move |trial| (axis_idx, trial)))
        .collect();

    let mut rows: Vec<Row> = tasks
        .par_iter()
        .map(|&(axis_idx, trial)| run_task(spec, &dicts[axis_idx], axis_idx, trial, &config))
        .collect::<Result<Vec<Vec<Row>>>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| {
        (a.trial, a.model, a.axis_idx, a.lambda_idx).cmp(&(b.trial, b.model, b.axis_idx, b.lambda_idx))
    });

    let mut table = String::from(EXPERIMENT_CSV_HEADER);
    table.push('\n');
    for row in &rows {
        table.push_str(&row.render(spec.axis.name()));
        table.push('\n');
    }
    atomic_write(out_csv, table.as_bytes())?;

    let summary = summarize(spec, &rows);
    let summary_path = summary_path_for(out_csv);
    atomic_write(&summary_path, summary.as_bytes())?;

    Ok(ExperimentOutcome {
        rows_path: out_csv.to_path_buf(),
        summary_path,
        rows: rows.len(),
    })
}

/// Coherence analysis of a dictionary: per-group internal coherence,
/// pairwise cross-coherence and the two-block uniqueness verdicts at
/// the given sparsity levels.
#[derive(Debug, Clone)]
pub struct CoherenceReport {
    pub normalized_copy_used: bool,
    pub internal: Vec<f64>,
    pub cross: Vec<(usize, usize, f64)>,
    pub verdicts: Vec<(usize, usize, bool)>,
}

pub fn coherence_report(dict: &Dictionary, k1: usize, k2: usize) -> CoherenceReport {
    let normalized_copy_used = !dict.is_normalized();
    let work = if normalized_copy_used {
        dict.normalized_copy()
    } else {
        dict.clone()
    };
    let num_groups = work.groups().num_groups();
    let blocks: Vec<Array2<f64>> = (0..num_groups).map(|g| work.group_atoms(g)).collect();
    let internal: Vec<f64> = blocks.iter().map(|b| mutual_coherence(b.view())).collect();
    let mut cross = Vec::new();
    let mut verdicts = Vec::new();
    for i in 0..num_groups {
        for j in (i + 1)..num_groups {
            let mu12 = cross_coherence(blocks[i].view(), blocks[j].view()).expect("same signal dim");
            cross.push((i, j, mu12));
            verdicts.push((
                i,
                j,
                uniqueness_check_symmetric(k1, k2, internal[i], internal[j], mu12),
            ));
        }
    }
    CoherenceReport {
        normalized_copy_used,
        internal,
        cross,
        verdicts,
    }
}

/// `coherence`: print the analysis for a dictionary file.
pub fn run_coherence(dict_path: &Path, k1: usize, k2: usize) -> Result<CoherenceReport> {
    let dict = io::load_dictionary(dict_path)?;
    let report = coherence_report(&dict, k1, k2);
    if report.normalized_copy_used {
        eprintln!("warning: dictionary columns are not unit-norm; analyzing a normalized copy");
    }
    for (g, mu) in report.internal.iter().enumerate() {
        println!("group {g}: internal coherence {mu}");
    }
    for &(i, j, mu) in &report.cross {
        println!("cross({i},{j}): {mu}");
    }
    for &(i, j, ok) in &report.verdicts {
        println!(
            "uniqueness(k1={k1},k2={k2}) groups ({i},{j}): {}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    Ok(report)
}
