//! Experiment configurations, default grids and the size-correct band.

use crate::CliError;
use catind_core::{Method, NullDistribution};
use sha2::{Digest, Sha256};

pub const DEFAULT_COLUMNS: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_PERMUTATIONS: usize = 999;
pub const DEFAULT_BAND_WIDEN: f64 = 1.5;
pub const DEFAULT_REPLICATIONS: usize = 1000;
pub const DEFAULT_BENCH_REPETITIONS: usize = 5;

/// Small-regime sample sizes: 40 to 1,000 in steps of 20.
pub fn small_grid() -> Vec<usize> {
    (40..=1000).step_by(20).collect()
}

/// Large-regime sample sizes: 1,000 to 10,000 in steps of 1,000.
pub fn large_grid() -> Vec<usize> {
    (1000..=10_000).step_by(1000).collect()
}

/// Both regimes concatenated (1,000 appears once).
pub fn full_grid() -> Vec<usize> {
    let mut g = small_grid();
    g.extend(large_grid().into_iter().skip(1));
    g
}

pub fn validate_sizes(sizes: &[usize]) -> Result<(), CliError> {
    if sizes.is_empty() {
        return Err(CliError::Config("sample-size grid is empty".into()));
    }
    if sizes[0] == 0 {
        return Err(CliError::Config("sample sizes must be positive".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(
            "sample-size grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

pub fn validate_cards(cards: &[usize]) -> Result<(), CliError> {
    if cards.is_empty() {
        return Err(CliError::Config("cardinality list is empty".into()));
    }
    if cards.iter().any(|&c| c < 2) {
        return Err(CliError::Config("cardinalities must be at least 2".into()));
    }
    Ok(())
}

pub fn validate_alpha(alpha: f64) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Config(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// The band inside which an estimated rejection rate counts as
/// size-correct: `alpha +- 3 * widen * sqrt(alpha (1 - alpha) / n_tests)`.
/// The widening factor absorbs the dependence between tests that share a
/// column.
pub fn size_correct_band(alpha: f64, n_tests: usize, widen: f64) -> (f64, f64) {
    let se = (alpha * (1.0 - alpha) / n_tests as f64).sqrt() * widen;
    (alpha - 3.0 * se, alpha + 3.0 * se)
}

fn dist_name(d: NullDistribution) -> &'static str {
    match d {
        NullDistribution::DiscreteUniform => "uniform",
        NullDistribution::Binomial => "binomial",
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn hash_of(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Statistic-difference experiment configuration.
#[derive(Debug, Clone)]
pub struct DiffConfig {
    pub sizes: Vec<usize>,
    pub cards: Vec<usize>,
    pub n_conditioning: usize,
    pub distribution: NullDistribution,
    pub n_columns: usize,
    pub seed: u64,
}

impl DiffConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        validate_sizes(&self.sizes)?;
        validate_cards(&self.cards)?;
        validate_conditioning(self.n_conditioning)?;
        validate_columns(self.n_columns)
    }

    pub fn config_hash(&self) -> String {
        hash_of(&format!(
            "diff|sizes={}|cards={}|zvars={}|dist={}|cols={}|seed={}",
            join(&self.sizes),
            join(&self.cards),
            self.n_conditioning,
            dist_name(self.distribution),
            self.n_columns,
            self.seed
        ))
    }
}

/// Type I error experiment configuration.
#[derive(Debug, Clone)]
pub struct Type1Config {
    pub sizes: Vec<usize>,
    pub cards: Vec<usize>,
    pub n_conditioning: usize,
    pub distribution: NullDistribution,
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub n_permutations: usize,
    pub raw_proportion: bool,
    pub band_widen: f64,
    pub n_columns: usize,
    pub seed: u64,
}

impl Type1Config {
    pub fn validate(&self) -> Result<(), CliError> {
        validate_sizes(&self.sizes)?;
        validate_cards(&self.cards)?;
        validate_conditioning(self.n_conditioning)?;
        validate_alpha(self.alpha)?;
        validate_methods(&self.methods)?;
        validate_permutations(self.n_permutations)?;
        validate_columns(self.n_columns)
    }

    pub fn config_hash(&self) -> String {
        hash_of(&format!(
            "type1|sizes={}|cards={}|zvars={}|dist={}|methods={}|alpha={}|perms={}|raw={}|widen={}|cols={}|seed={}",
            join(&self.sizes),
            join(&self.cards),
            self.n_conditioning,
            dist_name(self.distribution),
            join(&self.methods),
            self.alpha,
            self.n_permutations,
            self.raw_proportion,
            self.band_widen,
            self.n_columns,
            self.seed
        ))
    }
}

/// Power experiment configuration (logistic-link alternative).
#[derive(Debug, Clone)]
pub struct PowerConfig {
    pub sizes: Vec<usize>,
    pub cards: Vec<usize>,
    pub b_min: i32,
    pub b_max: i32,
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub n_permutations: usize,
    pub raw_proportion: bool,
    pub replications: usize,
    pub seed: u64,
}

impl PowerConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        validate_sizes(&self.sizes)?;
        validate_cards(&self.cards)?;
        validate_alpha(self.alpha)?;
        validate_methods(&self.methods)?;
        validate_permutations(self.n_permutations)?;
        if self.b_min > self.b_max {
            return Err(CliError::Config("b range is empty".into()));
        }
        if self.replications == 0 {
            return Err(CliError::Config("replications must be positive".into()));
        }
        Ok(())
    }

    pub fn config_hash(&self) -> String {
        hash_of(&format!(
            "power|sizes={}|cards={}|b={}..{}|methods={}|alpha={}|perms={}|raw={}|reps={}|seed={}",
            join(&self.sizes),
            join(&self.cards),
            self.b_min,
            self.b_max,
            join(&self.methods),
            self.alpha,
            self.n_permutations,
            self.raw_proportion,
            self.replications,
            self.seed
        ))
    }
}

/// Timing benchmark configuration.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub cards: Vec<usize>,
    pub n_permutations: usize,
    pub repetitions: usize,
    pub n_columns: usize,
    pub seed: u64,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        validate_sizes(&self.sizes)?;
        validate_cards(&self.cards)?;
        validate_permutations(self.n_permutations)?;
        if self.repetitions == 0 {
            return Err(CliError::Config("repetitions must be positive".into()));
        }
        validate_columns(self.n_columns)
    }

    pub fn config_hash(&self) -> String {
        hash_of(&format!(
            "bench|sizes={}|cards={}|perms={}|reps={}|cols={}|seed={}",
            join(&self.sizes),
            join(&self.cards),
            self.n_permutations,
            self.repetitions,
            self.n_columns,
            self.seed
        ))
    }
}

fn validate_conditioning(n: usize) -> Result<(), CliError> {
    if n > 2 {
        return Err(CliError::Config(
            "number of conditioning variables must be 0, 1 or 2".into(),
        ));
    }
    Ok(())
}

fn validate_columns(n: usize) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Config(
            "need at least two data columns".into(),
        ));
    }
    Ok(())
}

fn validate_methods(methods: &[Method]) -> Result<(), CliError> {
    if methods.is_empty() {
        return Err(CliError::Config("method list is empty".into()));
    }
    Ok(())
}

fn validate_permutations(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Config("permutation count must be positive".into()));
    }
    Ok(())
}
