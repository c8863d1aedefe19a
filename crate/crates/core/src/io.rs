//! Load/store of the JSON artifact formats and atomic file writes.
//!
//! Every artifact file carries `format_version` (currently 1) and a
//! `kind` tag. Matrices are stored as arrays of column arrays; floats
//! use the shortest decimal that round-trips, so store/load is
//! bit-exact. Atom indices inside `groups` are 1-based in the files
//! (the in-memory API is 0-based); `active_groups` holds 0-based
//! positions into the `groups` array.
//!
//! Schema violations are reported with the JSON path of the offending
//! field (for example `groups[1]`).

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, PartitionViolation, Result};
use crate::model::{CoefficientMatrix, Dictionary, GroupPartition, SolverReport};
use crate::synth::GroundTruth;

pub const FORMAT_VERSION: u64 = 1;

/// Artifact kinds, as spelled in the `kind` field.
pub const KIND_DICTIONARY: &str = "dictionary";
pub const KIND_PROBLEM: &str = "problem";
pub const KIND_GROUND_TRUTH: &str = "ground_truth";
pub const KIND_REPORT: &str = "report";

/// The signal side of a coding problem as stored on disk; the
/// dictionary travels in its own file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub signals: Array2<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub masks: Option<Array2<bool>>,
}

/// Any artifact the toolkit reads or writes.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Dictionary(Dictionary),
    Problem(ProblemData),
    GroundTruth(GroundTruth),
    Report(SolverReport),
}

impl Artifact {
    pub fn kind(&self) -> &'static str {
        match self {
            Artifact::Dictionary(_) => KIND_DICTIONARY,
            Artifact::Problem(_) => KIND_PROBLEM,
            Artifact::GroundTruth(_) => KIND_GROUND_TRUTH,
            Artifact::Report(_) => KIND_REPORT,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DictionaryDto {
    format_version: u64,
    kind: String,
    m: usize,
    p: usize,
    atoms: Vec<Vec<f64>>,
    groups: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDto {
    format_version: u64,
    kind: String,
    m: usize,
    n: usize,
    signals: Vec<Vec<f64>>,
    lambda1: f64,
    lambda2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    masks: Option<Vec<Vec<bool>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroundTruthDto {
    format_version: u64,
    kind: String,
    m: usize,
    p: usize,
    n: usize,
    coefficients: Vec<Vec<f64>>,
    active_groups: Vec<usize>,
    components: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportDto {
    format_version: u64,
    kind: String,
    p: usize,
    n: usize,
    coefficients: Vec<Vec<f64>>,
    objective_trace: Vec<f64>,
    outer_iterations: usize,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    primal_residual_trace: Option<Vec<f64>>,
}

fn matrix_to_columns(a: &Array2<f64>) -> Vec<Vec<f64>> {
    (0..a.ncols()).map(|j| a.column(j).to_vec()).collect()
}

fn mask_to_columns(a: &Array2<bool>) -> Vec<Vec<bool>> {
    (0..a.ncols()).map(|j| a.column(j).to_vec()).collect()
}

fn columns_to_matrix(cols: &[Vec<f64>], rows: usize, ncols: usize, field: &str) -> Result<Array2<f64>> {
    if cols.len() != ncols {
        return Err(Error::schema(field, format!("expected {ncols} columns, found {}", cols.len())));
    }
    let mut out = Array2::zeros((rows, ncols));
    for (j, col) in cols.iter().enumerate() {
        if col.len() != rows {
            return Err(Error::schema(
                format!("{field}[{j}]"),
                format!("expected {rows} entries, found {}", col.len()),
            ));
        }
        for (i, &v) in col.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::schema(format!("{field}[{j}][{i}]"), "entry is not finite"));
            }
            out[[i, j]] = v;
        }
    }
    Ok(out)
}

fn columns_to_mask(cols: &[Vec<bool>], rows: usize, ncols: usize, field: &str) -> Result<Array2<bool>> {
    if cols.len() != ncols {
        return Err(Error::schema(field, format!("expected {ncols} columns, found {}", cols.len())));
    }
    let mut out = Array2::from_elem((rows, ncols), false);
    for (j, col) in cols.iter().enumerate() {
        if col.len() != rows {
            return Err(Error::schema(
                format!("{field}[{j}]"),
                format!("expected {rows} entries, found {}", col.len()),
            ));
        }
        for (i, &v) in col.iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    Ok(out)
}

/// Maps a partition violation to the JSON path of the offending group.
fn partition_schema_error(v: PartitionViolation) -> Error {
    let (group, message) = match &v {
        PartitionViolation::EmptyGroup { group } => (*group, "group is empty".to_string()),
        PartitionViolation::OutOfRange { group, index, p } => {
            (*group, format!("atom index {} out of range 1..={p}", index + 1))
        }
        PartitionViolation::Overlap { group, index } => {
            (*group, format!("atom index {} already assigned to another group", index + 1))
        }
        PartitionViolation::Gap { index } => {
            return Error::schema("groups", format!("atom index {} is not assigned to any group", index + 1));
        }
    };
    Error::schema(format!("groups[{group}]"), message)
}

fn serialize_dictionary(dict: &Dictionary) -> DictionaryDto {
    DictionaryDto {
        format_version: FORMAT_VERSION,
        kind: KIND_DICTIONARY.to_string(),
        m: dict.signal_dim(),
        p: dict.atom_count(),
        atoms: matrix_to_columns(dict.atoms()),
        // 1-based in the interchange format
        groups: dict
            .groups()
            .iter()
            .map(|g| g.iter().map(|&i| i + 1).collect())
            .collect(),
    }
}

fn deserialize_dictionary(dto: DictionaryDto) -> Result<Dictionary> {
    let atoms = columns_to_matrix(&dto.atoms, dto.m, dto.p, "atoms")?;
    let mut groups = Vec::with_capacity(dto.groups.len());
    for (gi, g) in dto.groups.iter().enumerate() {
        let mut converted = Vec::with_capacity(g.len());
        for &idx in g {
            if idx == 0 {
                return Err(Error::schema(format!("groups[{gi}]"), "atom indices are 1-based; found 0"));
            }
            converted.push(idx - 1);
        }
        groups.push(converted);
    }
    let partition = GroupPartition::new(groups, dto.p).map_err(|e| match e {
        Error::InvalidPartition(v) => partition_schema_error(v),
        other => other,
    })?;
    Dictionary::new(atoms, partition)
}

fn serialize_problem(data: &ProblemData) -> ProblemDto {
    ProblemDto {
        format_version: FORMAT_VERSION,
        kind: KIND_PROBLEM.to_string(),
        m: data.signals.nrows(),
        n: data.signals.ncols(),
        signals: matrix_to_columns(&data.signals),
        lambda1: data.lambda1,
        lambda2: data.lambda2,
        masks: data.masks.as_ref().map(mask_to_columns),
    }
}

fn deserialize_problem(dto: ProblemDto) -> Result<ProblemData> {
    let signals = columns_to_matrix(&dto.signals, dto.m, dto.n, "signals")?;
    if dto.lambda1 < 0.0 || dto.lambda1.is_nan() {
        return Err(Error::schema("lambda1", "must be nonnegative"));
    }
    if dto.lambda2 < 0.0 || dto.lambda2.is_nan() {
        return Err(Error::schema("lambda2", "must be nonnegative"));
    }
    let masks = match &dto.masks {
        Some(cols) => {
            let m = columns_to_mask(cols, dto.m, dto.n, "masks")?;
            for (j, col) in m.columns().into_iter().enumerate() {
                if !col.iter().any(|&o| o) {
                    return Err(Error::schema(format!("masks[{j}]"), "column has no observed entries"));
                }
            }
            Some(m)
        }
        None => None,
    };
    Ok(ProblemData { signals, lambda1: dto.lambda1, lambda2: dto.lambda2, masks })
}

fn serialize_ground_truth(truth: &GroundTruth) -> GroundTruthDto {
    let m = truth
        .per_source_components
        .first()
        .map(|c| c.nrows())
        .unwrap_or(0);
    GroundTruthDto {
        format_version: FORMAT_VERSION,
        kind: KIND_GROUND_TRUTH.to_string(),
        m,
        p: truth.coefficients.atom_count(),
        n: truth.coefficients.num_signals(),
        coefficients: matrix_to_columns(truth.coefficients.values()),
        active_groups: truth.active_groups.clone(),
        components: truth.per_source_components.iter().map(matrix_to_columns).collect(),
    }
}

fn deserialize_ground_truth(dto: GroundTruthDto) -> Result<GroundTruth> {
    let coefficients = columns_to_matrix(&dto.coefficients, dto.p, dto.n, "coefficients")?;
    let mut components = Vec::with_capacity(dto.components.len());
    for (i, comp) in dto.components.iter().enumerate() {
        components.push(columns_to_matrix(comp, dto.m, dto.n, &format!("components[{i}]"))?);
    }
    if dto.active_groups.len() != components.len() {
        return Err(Error::schema(
            "active_groups",
            format!(
                "{} active groups but {} components",
                dto.active_groups.len(),
                components.len()
            ),
        ));
    }
    Ok(GroundTruth {
        coefficients: CoefficientMatrix::new(coefficients),
        active_groups: dto.active_groups,
        per_source_components: components,
    })
}

fn serialize_report(report: &SolverReport) -> ReportDto {
    ReportDto {
        format_version: FORMAT_VERSION,
        kind: KIND_REPORT.to_string(),
        p: report.coefficients.atom_count(),
        n: report.coefficients.num_signals(),
        coefficients: matrix_to_columns(report.coefficients.values()),
        objective_trace: report.objective_trace.clone(),
        outer_iterations: report.outer_iterations,
        converged: report.converged,
        primal_residual_trace: report.primal_residual_trace.clone(),
    }
}

fn deserialize_report(dto: ReportDto) -> Result<SolverReport> {
    let coefficients = columns_to_matrix(&dto.coefficients, dto.p, dto.n, "coefficients")?;
    for (i, v) in dto.objective_trace.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::schema(format!("objective_trace[{i}]"), "entry is not finite"));
        }
    }
    Ok(SolverReport {
        coefficients: CoefficientMatrix::new(coefficients),
        objective_trace: dto.objective_trace,
        outer_iterations: dto.outer_iterations,
        converged: dto.converged,
        primal_residual_trace: dto.primal_residual_trace,
    })
}

fn check_header(value: &Value) -> Result<String> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::schema("$", "expected a JSON object"))?;
    let version = obj
        .get("format_version")
        .ok_or_else(|| Error::schema("format_version", "missing"))?
        .as_u64()
        .ok_or_else(|| Error::schema("format_version", "must be an unsigned integer"))?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let kind = obj
        .get("kind")
        .ok_or_else(|| Error::schema("kind", "missing"))?
        .as_str()
        .ok_or_else(|| Error::schema("kind", "must be a string"))?;
    Ok(kind.to_string())
}

/// Canonical byte serialization of an artifact (compact JSON plus a
/// trailing newline).
pub fn to_canonical_string(artifact: &Artifact) -> Result<String> {
    let mut s = match artifact {
        Artifact::Dictionary(d) => serde_json::to_string(&serialize_dictionary(d))?,
        Artifact::Problem(p) => serde_json::to_string(&serialize_problem(p))?,
        Artifact::GroundTruth(t) => serde_json::to_string(&serialize_ground_truth(t))?,
        Artifact::Report(r) => serde_json::to_string(&serialize_report(r))?,
    };
    s.push('\n');
    Ok(s)
}

/// Writes an artifact atomically (temp file in the same directory, then
/// rename).
pub fn store(artifact: &Artifact, path: &Path) -> Result<()> {
    let bytes = to_canonical_string(artifact)?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Loads any artifact, dispatching on its `kind` field.
pub fn load(path: &Path) -> Result<Artifact> {
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)?;
    let kind = check_header(&value)?;
    match kind.as_str() {
        KIND_DICTIONARY => Ok(Artifact::Dictionary(deserialize_dictionary(serde_json::from_value(value)?)?)),
        KIND_PROBLEM => Ok(Artifact::Problem(deserialize_problem(serde_json::from_value(value)?)?)),
        KIND_GROUND_TRUTH => {
            Ok(Artifact::GroundTruth(deserialize_ground_truth(serde_json::from_value(value)?)?))
        }
        KIND_REPORT => Ok(Artifact::Report(deserialize_report(serde_json::from_value(value)?)?)),
        other => Err(Error::schema("kind", format!("unknown artifact kind `{other}`"))),
    }
}

pub fn load_dictionary(path: &Path) -> Result<Dictionary> {
    match load(path)? {
        Artifact::Dictionary(d) => Ok(d),
        other => Err(Error::WrongKind {
            expected: KIND_DICTIONARY.to_string(),
            found: other.kind().to_string(),
        }),
    }
}

pub fn load_problem(path: &Path) -> Result<ProblemData> {
    match load(path)? {
        Artifact::Problem(p) => Ok(p),
        other => Err(Error::WrongKind {
            expected: KIND_PROBLEM.to_string(),
            found: other.kind().to_string(),
        }),
    }
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    match load(path)? {
        Artifact::GroundTruth(t) => Ok(t),
        other => Err(Error::WrongKind {
            expected: KIND_GROUND_TRUTH.to_string(),
            found: other.kind().to_string(),
        }),
    }
}

pub fn load_report(path: &Path) -> Result<SolverReport> {
    match load(path)? {
        Artifact::Report(r) => Ok(r),
        other => Err(Error::WrongKind {
            expected: KIND_REPORT.to_string(),
            found: other.kind().to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn dictionary_round_trip_is_byte_identical() {
        let dict = Dictionary::new(
            array![[1.0, 0.0, 0.25], [0.0, 1.0, -0.125]],
            GroupPartition::new(vec![vec![0, 1], vec![2]], 3).unwrap(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dict.json");
        store(&Artifact::Dictionary(dict.clone()), &path).unwrap();
        let text1 = fs::read_to_string(&path).unwrap();
        let loaded = load_dictionary(&path).unwrap();
        assert_eq!(loaded, dict);
        store(&Artifact::Dictionary(loaded), &path).unwrap();
        let text2 = fs::read_to_string(&path).unwrap();
        assert_eq!(text1, text2);
    }

    #[test]
    fn overlapping_groups_error_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(
            &path,
            r#"{"format_version":1,"kind":"dictionary","m":1,"p":3,"atoms":[[1.0],[1.0],[1.0]],"groups":[[1,2],[2,3]]}"#,
        )
        .unwrap();
        let err = load(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("groups[1]"), "{msg}");
    }

    #[test]
    fn unknown_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v9.json");
        fs::write(&path, r#"{"format_version":9,"kind":"dictionary"}"#).unwrap();
        match load(&path) {
            Err(Error::UnsupportedVersion(9)) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_kind_reported() {
        let dict = Dictionary::new(
            array![[1.0]],
            GroupPartition::new(vec![vec![0]], 1).unwrap(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dict.json");
        store(&Artifact::Dictionary(dict), &path).unwrap();
        assert!(matches!(load_problem(&path), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn problem_with_masks_round_trips() {
        let data = ProblemData {
            signals: array![[1.0, 2.0], [3.0, 4.0]],
            lambda1: 0.1,
            lambda2: 0.2,
            masks: Some(array![[true, false], [false, true]]),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("problem.json");
        store(&Artifact::Problem(data.clone()), &path).unwrap();
        assert_eq!(load_problem(&path).unwrap(), data);
    }

    #[test]
    fn ragged_matrix_error_names_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.json");
        fs::write(
            &path,
            r#"{"format_version":1,"kind":"problem","m":2,"n":2,"signals":[[1.0,2.0],[3.0]],"lambda1":0.0,"lambda2":0.0}"#,
        )
        .unwrap();
        let msg = load(&path).unwrap_err().to_string();
        assert!(msg.contains("signals[1]"), "{msg}");
    }
}
