//! Independence tests for categorical data.
//!
//! Builds contingency tables (unconditional and stratified), evaluates the
//! Pearson X² and likelihood-ratio G² statistics with asymptotic
//! chi-square p-values, and computes permutation p-values that hold every
//! stratum's row and column totals fixed. A brute-force exact enumerator
//! validates the permutation machinery on tiny instances, and batch/data
//! generation utilities support Monte Carlo type I error, power and timing
//! studies over many column pairs.
//!
//! All data types are immutable after construction and every operation is
//! a pure function, so the API is safe to drive from many threads.

pub mod batch;
pub mod contingency;
pub mod datagen;
pub mod error;
pub mod exact;
pub mod permutation;
pub mod special;
pub mod stats;

pub use batch::{all_pairs, pair_seed, rejection_rate, DataMatrix, PairResult, PairResultSet, RejectionSummary};
pub use contingency::{
    build_stratified, build_table, stratify, CategoryVector, ContingencyTable, Stratification,
    StratifiedTable,
};
pub use datagen::{
    derive_seed, gen_alternative, gen_null_matrix, logistic_link, rng_stream, AlternativeSpec,
    GenSpec, NullDistribution,
};
pub use error::{Error, Result};
pub use exact::{exact_distribution, exact_pvalue, fisher_2x2_pvalue, ExactDistribution};
pub use permutation::{permute_within_strata, permutation_pvalue, PermutationPlan, PvalueMode};
pub use stats::{
    asymptotic_test, chi_square_cdf, chi_square_sf, conditional_statistic, degrees_of_freedom,
    g2_statistic, x2_statistic, Method, StatKind, TestResult,
};
