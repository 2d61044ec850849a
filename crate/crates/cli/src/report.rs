//! Report rows and their CSV rendering.
//!
//! Rendering is fully deterministic: fixed column sets, fixed decimal
//! counts (times 6, rates 4), `NA` for absent values, `\n` line endings.

use catind_core::Method;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffRow {
    pub n: usize,
    pub card: usize,
    pub n_cond: usize,
    pub mean_diff: Option<f64>,
    pub n_pairs_computable: usize,
    pub n_pairs_incomputable: usize,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Type1Row {
    pub n: usize,
    pub card: usize,
    pub n_cond: usize,
    pub method: Method,
    pub rejection_rate: Option<f64>,
    pub size_correct: bool,
    pub n_incomputable: usize,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub n: usize,
    pub card: usize,
    pub b: i32,
    pub method: Method,
    pub power: Option<f64>,
    pub replications: usize,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub card: usize,
    pub method: Method,
    pub seconds: f64,
    pub ratio_vs_x2: f64,
    pub seed: u64,
    pub config_hash: String,
}

fn fmt_opt(v: Option<f64>, decimals: usize) -> String {
    match v {
        Some(x) => format!("{x:.decimals$}"),
        None => "NA".to_string(),
    }
}

pub fn render_diff(rows: &[DiffRow]) -> String {
    let mut out = String::from(
        "n,card,n_cond,mean_diff,n_pairs_computable,n_pairs_incomputable,seed,config_hash\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.card,
            r.n_cond,
            fmt_opt(r.mean_diff, 6),
            r.n_pairs_computable,
            r.n_pairs_incomputable,
            r.seed,
            r.config_hash
        );
    }
    out
}

pub fn render_type1(rows: &[Type1Row]) -> String {
    let mut out = String::from(
        "n,card,n_cond,method,rejection_rate,size_correct,n_incomputable,seed,config_hash\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.card,
            r.n_cond,
            r.method,
            fmt_opt(r.rejection_rate, 4),
            r.size_correct,
            r.n_incomputable,
            r.seed,
            r.config_hash
        );
    }
    out
}

pub fn render_power(rows: &[PowerRow]) -> String {
    let mut out = String::from("n,card,b,method,power,replications,seed,config_hash\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.card,
            r.b,
            r.method,
            fmt_opt(r.power, 4),
            r.replications,
            r.seed,
            r.config_hash
        );
    }
    out
}

pub fn render_bench(rows: &[BenchRow]) -> String {
    let mut out = String::from("n,card,method,seconds,ratio_vs_x2,seed,config_hash\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.4},{},{}",
            r.n, r.card, r.method, r.seconds, r.ratio_vs_x2, r.seed, r.config_hash
        );
    }
    out
}
