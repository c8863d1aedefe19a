//! End-to-end behavior of the command-line surface: exit codes, file
//! outputs and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use chilasso::io;
use chilasso::model::{GroupPartition, Dictionary};
use ndarray::Array2;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chilasso"))
}

fn write_synth_spec(path: &Path, body: &str) {
    fs::write(path, body).unwrap();
}

const VALID_SPEC: &str = r#"{"format_version":1,"kind":"synth_spec","num_groups":4,"atoms_per_group":8,"signal_dim":10,"k":3,"num_active_groups":2,"n":4,"sigma":0.1,"missing_fraction":0.0,"seed":42}"#;

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn gen_writes_artifacts_that_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write_synth_spec(&spec, VALID_SPEC);
    let out = dir.path().join("data");
    let result = run(bin().args(["gen", "--spec"]).arg(&spec).arg("--out").arg(&out));
    assert!(result.status.success(), "{result:?}");
    let stdout = String::from_utf8(result.stdout).unwrap();
    for name in ["dictionary.json", "problem.json", "ground_truth.json"] {
        let path = out.join(name);
        assert!(stdout.contains(name));
        assert!(path.exists());
        io::load(&path).unwrap();
    }
}

#[test]
fn gen_rejects_oversparse_spec_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write_synth_spec(
        &spec,
        r#"{"format_version":1,"kind":"synth_spec","num_groups":4,"atoms_per_group":8,"signal_dim":10,"k":9,"num_active_groups":2,"n":4,"sigma":0.1,"missing_fraction":0.0,"seed":42}"#,
    );
    let out = dir.path().join("data");
    let result = run(bin().args(["gen", "--spec"]).arg(&spec).arg("--out").arg(&out));
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("k exceeds atoms_per_group"), "{stderr}");
    assert!(!out.exists(), "no partial outputs on validation failure");
}

#[test]
fn gen_parse_failure_names_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write_synth_spec(
        &spec,
        r#"{"format_version":1,"kind":"synth_spec","num_groups":4,"atoms_per_group":8,"signal_dim":10,"k":3,"num_active_groups":2,"n":4,"sigma":0.1,"missing_fraction":0.0,"sead":42}"#,
    );
    let result = run(bin()
        .args(["gen", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(dir.path().join("data")));
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("sead") || stderr.contains("seed"), "{stderr}");
}

#[test]
fn gen_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write_synth_spec(&spec, VALID_SPEC);
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    assert!(run(bin().args(["gen", "--spec"]).arg(&spec).arg("--out").arg(&out1)).status.success());
    assert!(run(bin().args(["gen", "--spec"]).arg(&spec).arg("--out").arg(&out2)).status.success());
    for name in ["dictionary.json", "problem.json", "ground_truth.json"] {
        assert_eq!(
            fs::read(out1.join(name)).unwrap(),
            fs::read(out2.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn solve_reductions_via_two_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write_synth_spec(&spec, VALID_SPEC);
    let data = dir.path().join("data");
    assert!(run(bin().args(["gen", "--spec"]).arg(&spec).arg("--out").arg(&data)).status.success());

    // chilasso with lambda2 = 0 is per-column lasso
    let chi_out = dir.path().join("chi.json");
    let lasso_out = dir.path().join("lasso.json");
    for (model, out) in [("chilasso", &chi_out), ("lasso", &lasso_out)] {
        let result = run(bin()
            .args(["solve", "--model", model, "--dict"])
            .arg(data.join("dictionary.json"))
            .arg("--signals")
            .arg(data.join("problem.json"))
            .args(["--lambda1", "0.2", "--lambda2", "0.0", "--out"])
            .arg(out));
        assert!(result.status.success(), "{model}: {result:?}");
    }
    let chi = io::load_report(&chi_out).unwrap();
    let lasso = io::load_report(&lasso_out).unwrap();
    for (a, b) in chi
        .coefficients
        .values()
        .iter()
        .zip(lasso.coefficients.values().iter())
    {
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }
    assert!(!chi.objective_trace.is_empty());
}

#[test]
fn solve_single_signal_chilasso_matches_hilasso() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write_synth_spec(
        &spec,
        r#"{"format_version":1,"kind":"synth_spec","num_groups":4,"atoms_per_group":8,"signal_dim":10,"k":3,"num_active_groups":2,"n":1,"sigma":0.1,"missing_fraction":0.0,"seed":5}"#,
    );
    let data = dir.path().join("data");
    assert!(run(bin().args(["gen", "--spec"]).arg(&spec).arg("--out").arg(&data)).status.success());
    let mut objectives = Vec::new();
    for model in ["chilasso", "hilasso"] {
        let out = dir.path().join(format!("{model}.json"));
        let result = run(bin()
            .args(["solve", "--model", model, "--dict"])
            .arg(data.join("dictionary.json"))
            .arg("--signals")
            .arg(data.join("problem.json"))
            .args(["--lambda1", "0.1", "--lambda2", "0.2", "--out"])
            .arg(&out));
        assert!(result.status.success());
        objectives.push(*io::load_report(&out).unwrap().objective_trace.last().unwrap());
    }
    let rel = (objectives[0] - objectives[1]).abs() / objectives[1].abs().max(1e-12);
    assert!(rel < 1e-4, "{objectives:?}");
}

#[test]
fn solve_accepts_masked_signals() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write_synth_spec(
        &spec,
        r#"{"format_version":1,"kind":"synth_spec","num_groups":4,"atoms_per_group":8,"signal_dim":10,"k":3,"num_active_groups":2,"n":6,"sigma":0.0,"missing_fraction":0.6,"seed":11}"#,
    );
    let data = dir.path().join("data");
    assert!(run(bin().args(["gen", "--spec"]).arg(&spec).arg("--out").arg(&data)).status.success());
    let problem_text = fs::read_to_string(data.join("problem.json")).unwrap();
    assert!(problem_text.contains("\"masks\""));
    let out = dir.path().join("report.json");
    let result = run(bin()
        .args(["solve", "--model", "chilasso", "--dict"])
        .arg(data.join("dictionary.json"))
        .arg("--signals")
        .arg(data.join("problem.json"))
        .args(["--lambda1", "0.05", "--lambda2", "0.5", "--out"])
        .arg(&out));
    assert!(result.status.success(), "{result:?}");
    io::load_report(&out).unwrap();
}

#[test]
fn solve_dimension_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec_a = dir.path().join("a.json");
    write_synth_spec(&spec_a, VALID_SPEC);
    let spec_b = dir.path().join("b.json");
    write_synth_spec(
        &spec_b,
        r#"{"format_version":1,"kind":"synth_spec","num_groups":4,"atoms_per_group":8,"signal_dim":12,"k":3,"num_active_groups":2,"n":4,"sigma":0.1,"missing_fraction":0.0,"seed":42}"#,
    );
    let data_a = dir.path().join("data_a");
    let data_b = dir.path().join("data_b");
    assert!(run(bin().args(["gen", "--spec"]).arg(&spec_a).arg("--out").arg(&data_a)).status.success());
    assert!(run(bin().args(["gen", "--spec"]).arg(&spec_b).arg("--out").arg(&data_b)).status.success());
    let result = run(bin()
        .args(["solve", "--model", "lasso", "--dict"])
        .arg(data_a.join("dictionary.json"))
        .arg("--signals")
        .arg(data_b.join("problem.json"))
        .args(["--lambda1", "0.1", "--out"])
        .arg(dir.path().join("report.json")));
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn solve_exits_3_on_iteration_cap() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write_synth_spec(&spec, VALID_SPEC);
    let data = dir.path().join("data");
    assert!(run(bin().args(["gen", "--spec"]).arg(&spec).arg("--out").arg(&data)).status.success());
    let out = dir.path().join("report.json");
    let result = run(bin()
        .args(["solve", "--model", "chilasso", "--dict"])
        .arg(data.join("dictionary.json"))
        .arg("--signals")
        .arg(data.join("problem.json"))
        .args(["--lambda1", "0.05", "--lambda2", "0.3", "--tol", "1e-12", "--max-iter", "2", "--out"])
        .arg(&out));
    assert_eq!(result.status.code(), Some(3));
    assert!(!io::load_report(&out).unwrap().converged);
}

fn store_dictionary(path: &Path, atoms: Array2<f64>, groups: Vec<Vec<usize>>) {
    let p = atoms.ncols();
    let dict = Dictionary::new(atoms, GroupPartition::new(groups, p).unwrap()).unwrap();
    io::store(&io::Artifact::Dictionary(dict), path).unwrap();
}

#[test]
fn coherence_orthonormal_passes_and_duplicate_fails() {
    let dir = tempfile::tempdir().unwrap();

    let ortho = dir.path().join("ortho.json");
    store_dictionary(&ortho, Array2::eye(4), vec![vec![0, 1], vec![2, 3]]);
    let result = run(bin().args(["coherence", "--dict"]).arg(&ortho).args(["--k1", "2", "--k2", "2"]));
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("group 0: internal coherence 0"), "{stdout}");
    assert!(stdout.contains("cross(0,1): 0"), "{stdout}");
    assert!(stdout.contains("PASS"), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");

    // the same atom in both groups: cross-coherence 1, verdict FAIL
    let mut atoms = Array2::zeros((4, 4));
    atoms[[0, 0]] = 1.0;
    atoms[[1, 1]] = 1.0;
    atoms[[0, 2]] = 1.0;
    atoms[[2, 3]] = 1.0;
    let dup = dir.path().join("dup.json");
    store_dictionary(&dup, atoms, vec![vec![0, 1], vec![2, 3]]);
    let result = run(bin().args(["coherence", "--dict"]).arg(&dup).args(["--k1", "1", "--k2", "1"]));
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("cross(0,1): 1"), "{stdout}");
    assert!(stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn coherence_warns_on_unnormalized_dictionary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scaled.json");
    store_dictionary(&path, Array2::eye(3) * 3.0, vec![vec![0, 1], vec![2]]);
    let result = run(bin().args(["coherence", "--dict"]).arg(&path));
    assert!(result.status.success());
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("normalized copy"), "{stderr}");
}

#[test]
fn experiment_sigma_sweep_covers_all_models() {
    // three noise levels, all four models: the Table-1-style block shape
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("exp.json");
    fs::write(
        &spec,
        r#"{"format_version":1,"kind":"experiment","axis":"sigma","axis_values":[0.1,0.2,0.4],"trials":2,"base":{"num_groups":4,"atoms_per_group":8,"signal_dim":10,"k":3,"num_active_groups":2,"n":4,"sigma":0.0,"missing_fraction":0.0,"seed":3},"lambda_grid":[[0.05,0.3]],"models":["lasso","glasso","hilasso","chilasso"]}"#,
    )
    .unwrap();
    let out = dir.path().join("sigma.csv");
    let result = run(bin().args(["experiment", "--spec"]).arg(&spec).arg("--out").arg(&out));
    assert!(result.status.success(), "{result:?}");
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 4);
    for model in ["lasso", "glasso", "hilasso", "chilasso"] {
        for sigma in ["0.1", "0.2", "0.4"] {
            assert!(
                text.lines().any(|l| l.contains(&format!(",{model},sigma,{sigma},"))),
                "missing rows for {model} at sigma {sigma}"
            );
        }
    }
    let summary = fs::read_to_string(dir.path().join("sigma_summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), chilasso_cli::SUMMARY_CSV_HEADER);
    // 4 models x 3 axis values x 5 metrics
    assert_eq!(summary.lines().count(), 1 + 4 * 3 * 5);
}

#[test]
fn experiment_groups_axis_changes_dictionary_size() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("exp.json");
    fs::write(
        &spec,
        r#"{"format_version":1,"kind":"experiment","axis":"groups","axis_values":[4,8],"trials":1,"base":{"num_groups":4,"atoms_per_group":8,"signal_dim":10,"k":3,"num_active_groups":2,"n":4,"sigma":0.0,"missing_fraction":0.0,"seed":3},"lambda_grid":[[0.05,0.3]],"models":["chilasso"]}"#,
    )
    .unwrap();
    let out = dir.path().join("groups.csv");
    let result = run(bin().args(["experiment", "--spec"]).arg(&spec).arg("--out").arg(&out));
    assert!(result.status.success(), "{result:?}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l.contains(",chilasso,groups,4,")));
    assert!(text.lines().any(|l| l.contains(",chilasso,groups,8,")));
}

const TINY_EXPERIMENT: &str = r#"{"format_version":1,"kind":"experiment","axis":"k","axis_values":[2,3],"trials":1,"base":{"num_groups":4,"atoms_per_group":8,"signal_dim":10,"k":3,"num_active_groups":2,"n":4,"sigma":0.05,"missing_fraction":0.0,"seed":9},"lambda_grid":[[0.05,0.2]],"models":["lasso","glasso","hilasso","chilasso"]}"#;

#[test]
fn experiment_row_count_and_rerun_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("exp.json");
    fs::write(&spec, TINY_EXPERIMENT).unwrap();
    let out1 = dir.path().join("r1.csv");
    let out2 = dir.path().join("r2.csv");
    for out in [&out1, &out2] {
        let result = run(bin().args(["experiment", "--spec"]).arg(&spec).arg("--out").arg(out));
        assert!(result.status.success(), "{result:?}");
    }
    let text = fs::read_to_string(&out1).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), chilasso_cli::EXPERIMENT_CSV_HEADER);
    // trials=1, single lambda pair: rows = |axis_values| * |models|
    assert_eq!(lines.count(), 2 * 4);
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out2).unwrap());
    assert_eq!(
        fs::read(dir.path().join("r1_summary.csv")).unwrap(),
        fs::read(dir.path().join("r2_summary.csv")).unwrap()
    );
}
