//! CSV ingestion and the ad-hoc single-test pipeline.
//!
//! Input files need a header row; categorical columns hold arbitrary
//! string labels. Labels are encoded to integer codes in lexicographic
//! order of the distinct labels, so tables and degrees of freedom are
//! deterministic for a given file.

use crate::CliError;
use catind_core::{
    asymptotic_test, build_stratified, permutation_pvalue, CategoryVector, Method,
    PermutationPlan, PvalueMode,
};
use serde::Serialize;
use std::collections::BTreeSet;
use std::path::Path;

/// Raw CSV content: header names plus column-major string values.
pub struct CsvColumns {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<String>>,
}

pub fn load_csv(path: &Path) -> Result<CsvColumns, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Input(format!("cannot parse header of {}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut columns: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::Input(format!("malformed CSV record: {e}")))?;
        if record.len() != headers.len() {
            return Err(CliError::Input(format!(
                "record has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        for (c, field) in record.iter().enumerate() {
            columns[c].push(field.to_string());
        }
    }
    if columns.first().is_none_or(|c| c.is_empty()) {
        return Err(CliError::Input("CSV contains no data rows".into()));
    }
    Ok(CsvColumns { headers, columns })
}

/// Encode string labels to codes in lexicographic label order.
pub fn encode_labels(values: &[String]) -> (CategoryVector, Vec<String>) {
    let labels: Vec<String> = values
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect();
    let codes: Vec<u16> = values
        .iter()
        .map(|v| labels.binary_search(v).expect("label is present") as u16)
        .collect();
    (
        CategoryVector::new(codes, labels.len()).expect("non-empty validated upstream"),
        labels,
    )
}

fn find_column<'a>(csv: &'a CsvColumns, name: &str) -> Result<&'a [String], CliError> {
    let idx = csv
        .headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Input(format!("unknown column '{name}'")))?;
    Ok(&csv.columns[idx])
}

#[derive(Debug, Clone)]
pub struct SingleTestRequest {
    pub x_column: String,
    pub y_column: String,
    pub z_columns: Vec<String>,
    pub method: Method,
    pub n_permutations: usize,
    pub raw_proportion: bool,
    pub seed: u64,
}

/// Machine-readable single-test outcome printed by the `test` subcommand.
#[derive(Debug, Serialize)]
pub struct SingleTestReport {
    pub method: String,
    pub statistic: Option<f64>,
    pub dof: usize,
    pub p_value: Option<f64>,
    pub computable: bool,
    pub n: usize,
    pub card_x: usize,
    pub card_y: usize,
    pub n_strata: usize,
}

pub fn run_single_test(
    path: &Path,
    req: &SingleTestRequest,
) -> Result<SingleTestReport, CliError> {
    let csv = load_csv(path)?;

    let encode_test_column = |name: &str| -> Result<CategoryVector, CliError> {
        let (vector, labels) = encode_labels(find_column(&csv, name)?);
        if labels.len() < 2 {
            return Err(CliError::Input(format!(
                "column '{name}' has a single distinct value; nothing to test"
            )));
        }
        Ok(vector)
    };

    let x = encode_test_column(&req.x_column)?;
    let y = encode_test_column(&req.y_column)?;
    // Conditioning columns may be constant (one stratum).
    let z: Vec<CategoryVector> = req
        .z_columns
        .iter()
        .map(|name| Ok(encode_labels(find_column(&csv, name)?).0))
        .collect::<Result<_, CliError>>()?;

    let result = if req.method.is_permutation() {
        let plan = PermutationPlan {
            n_permutations: req.n_permutations,
            seed: req.seed,
            kind: req.method.stat_kind(),
            mode: if req.raw_proportion {
                PvalueMode::RawProportion
            } else {
                PvalueMode::AddOne
            },
        };
        permutation_pvalue(&x, &y, &z, &plan)?
    } else {
        let s = build_stratified(&x, &y, &z)?;
        asymptotic_test(&s, req.method.stat_kind())?
    };

    let n_strata = catind_core::stratify(&z, x.len())?.n_strata();
    Ok(SingleTestReport {
        method: result.method.to_string(),
        statistic: result.statistic,
        dof: result.dof,
        p_value: result.p_value,
        computable: result.computable(),
        n: x.len(),
        card_x: x.cardinality(),
        card_y: y.cardinality(),
        n_strata,
    })
}
