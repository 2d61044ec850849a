//! All-pairs testing over the columns of a data matrix.
//!
//! Columns are encoded once; every pair re-tabulates from the codes in
//! O(n), so no per-pair copies of the data are made. Pairs are fanned out
//! with rayon; each pair derives its own RNG seed from `(seed, i, j)`, so
//! the result set is identical for any worker count.

use crate::contingency::{build_stratified, CategoryVector};
use crate::datagen::derive_seed;
use crate::error::{Error, Result};
use crate::permutation::{permutation_pvalue, PermutationPlan};
use crate::stats::{asymptotic_test, Method, TestResult};
use rayon::prelude::*;

/// Column-encoded data matrix: `p` categorical columns of equal length.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    columns: Vec<CategoryVector>,
    n_rows: usize,
}

impl DataMatrix {
    pub fn new(columns: Vec<CategoryVector>) -> Result<Self> {
        let first = columns.first().ok_or(Error::EmptyInput)?;
        let n_rows = first.len();
        if let Some(bad) = columns.iter().find(|c| c.len() != n_rows) {
            return Err(Error::LengthMismatch {
                left: n_rows,
                right: bad.len(),
            });
        }
        Ok(Self { columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, index: usize) -> &CategoryVector {
        &self.columns[index]
    }

    pub fn columns(&self) -> &[CategoryVector] {
        &self.columns
    }
}

/// Result of testing one unordered column pair.
#[derive(Debug, Clone)]
pub struct PairResult {
    pub i: usize,
    pub j: usize,
    pub result: TestResult,
}

/// Results for all tested pairs, in lexicographic pair order.
#[derive(Debug, Clone)]
pub struct PairResultSet {
    results: Vec<PairResult>,
}

impl PairResultSet {
    pub fn results(&self) -> &[PairResult] {
        &self.results
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }
}

/// Per-pair RNG seed, mixed from the plan seed and the column indices.
pub fn pair_seed(base: u64, i: usize, j: usize) -> u64 {
    derive_seed(base, &[0x5041, i as u64, j as u64])
}

/// Run the chosen test on every unordered pair of non-conditioning
/// columns, conditioning each test on `z_columns`.
///
/// Permutation methods require `plan`; its statistic kind is overridden by
/// `method` and its seed is re-derived per pair via [`pair_seed`], so each
/// pair's result equals a standalone [`permutation_pvalue`] call with that
/// derived seed.
pub fn all_pairs(
    m: &DataMatrix,
    method: Method,
    z_columns: &[usize],
    plan: Option<&PermutationPlan>,
) -> Result<PairResultSet> {
    for &c in z_columns {
        if c >= m.n_columns() {
            return Err(Error::ColumnOutOfRange {
                index: c,
                columns: m.n_columns(),
            });
        }
    }
    let tested: Vec<usize> = (0..m.n_columns())
        .filter(|c| !z_columns.contains(c))
        .collect();
    if tested.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two non-conditioning columns".into(),
        ));
    }
    if method.is_permutation() && plan.is_none() {
        return Err(Error::InvalidArgument(
            "permutation methods require a permutation plan".into(),
        ));
    }

    let z_vecs: Vec<CategoryVector> = z_columns.iter().map(|&c| m.column(c).clone()).collect();
    let mut pairs = Vec::with_capacity(tested.len() * (tested.len() - 1) / 2);
    for (a, &i) in tested.iter().enumerate() {
        for &j in &tested[a + 1..] {
            pairs.push((i, j));
        }
    }

    let results: Result<Vec<PairResult>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let x = m.column(i);
            let y = m.column(j);
            let result = if method.is_permutation() {
                let base = plan.expect("checked above");
                let pair_plan = PermutationPlan {
                    n_permutations: base.n_permutations,
                    seed: pair_seed(base.seed, i, j),
                    kind: method.stat_kind(),
                    mode: base.mode,
                };
                permutation_pvalue(x, y, &z_vecs, &pair_plan)?
            } else {
                let s = build_stratified(x, y, &z_vecs)?;
                asymptotic_test(&s, method.stat_kind())?
            };
            Ok(PairResult { i, j, result })
        })
        .collect();
    Ok(PairResultSet { results: results? })
}

/// Rejection summary at level `alpha`. Incomputable results are counted
/// separately and never as rejections; with no computable result the rate
/// is absent.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionSummary {
    pub rate: Option<f64>,
    pub n_computable: usize,
    pub n_incomputable: usize,
}

pub fn rejection_rate(set: &PairResultSet, alpha: f64) -> Result<RejectionSummary> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    let mut n_computable = 0usize;
    let mut n_incomputable = 0usize;
    let mut n_reject = 0usize;
    for pr in set.results() {
        match pr.result.p_value {
            Some(p) => {
                n_computable += 1;
                if p <= alpha {
                    n_reject += 1;
                }
            }
            None => n_incomputable += 1,
        }
    }
    let rate = (n_computable > 0).then(|| n_reject as f64 / n_computable as f64);
    Ok(RejectionSummary {
        rate,
        n_computable,
        n_incomputable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_null_matrix, GenSpec, NullDistribution};
    use crate::stats::StatKind;

    fn small_matrix(p: usize, n: usize, seed: u64) -> DataMatrix {
        gen_null_matrix(&GenSpec {
            distribution: NullDistribution::Binomial,
            value_param: 1,
            n_rows: n,
            n_columns: p,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn three_columns_three_pairs_match_single_calls() {
        let m = small_matrix(3, 60, 5);
        let set = all_pairs(&m, Method::X2, &[], None).unwrap();
        assert_eq!(set.len(), 3);
        for pr in set.results() {
            let s = build_stratified(m.column(pr.i), m.column(pr.j), &[]).unwrap();
            let single = asymptotic_test(&s, StatKind::X2).unwrap();
            assert_eq!(pr.result, single);
        }
    }

    #[test]
    fn hundred_columns_yield_4950_pairs() {
        let m = small_matrix(100, 20, 8);
        let set = all_pairs(&m, Method::G2, &[], None).unwrap();
        assert_eq!(set.len(), 100 * 99 / 2);
    }

    #[test]
    fn permutation_batch_is_deterministic_and_matches_single() {
        let m = small_matrix(6, 40, 21);
        let plan = PermutationPlan {
            n_permutations: 199,
            ..PermutationPlan::new(StatKind::G2, 77)
        };
        let a = all_pairs(&m, Method::PermG2, &[5], Some(&plan)).unwrap();
        let b = all_pairs(&m, Method::PermG2, &[5], Some(&plan)).unwrap();
        assert_eq!(a.len(), 10);
        for (ra, rb) in a.results().iter().zip(b.results()) {
            assert_eq!(ra.result, rb.result);
        }
        // Bit-exact match with the standalone single-pair pipeline.
        let pr = &a.results()[3];
        let single_plan = PermutationPlan {
            n_permutations: 199,
            seed: pair_seed(77, pr.i, pr.j),
            kind: StatKind::G2,
            mode: crate::permutation::PvalueMode::AddOne,
        };
        let z = vec![m.column(5).clone()];
        let single = permutation_pvalue(m.column(pr.i), m.column(pr.j), &z, &single_plan).unwrap();
        assert_eq!(pr.result, single);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let m = small_matrix(8, 50, 33);
        let plan = PermutationPlan {
            n_permutations: 99,
            ..PermutationPlan::new(StatKind::G2, 3)
        };
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| all_pairs(&m, Method::PermG2, &[], Some(&plan)).unwrap());
        let wide = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| all_pairs(&m, Method::PermG2, &[], Some(&plan)).unwrap());
        for (a, b) in serial.results().iter().zip(wide.results()) {
            assert_eq!(a.result, b.result);
        }
    }

    #[test]
    fn z_column_validation() {
        let m = small_matrix(4, 30, 2);
        assert!(matches!(
            all_pairs(&m, Method::X2, &[9], None),
            Err(Error::ColumnOutOfRange { .. })
        ));
        assert!(all_pairs(&m, Method::PermG2, &[], None).is_err());
    }

    #[test]
    fn rejection_rate_counts() {
        let m = small_matrix(3, 40, 4);
        let mut set = all_pairs(&m, Method::G2, &[], None).unwrap();
        // Overwrite p-values to a known pattern.
        set.results[0].result.p_value = Some(0.01);
        set.results[1].result.p_value = Some(0.99);
        set.results[2].result.p_value = None;
        set.results[2].result.statistic = None;
        let s = rejection_rate(&set, 0.05).unwrap();
        assert_eq!(s.rate, Some(0.5));
        assert_eq!(s.n_computable, 2);
        assert_eq!(s.n_incomputable, 1);

        assert!(rejection_rate(&set, 0.0).is_err());
        assert!(rejection_rate(&set, 1.0).is_err());
    }

    #[test]
    fn rejection_rate_all_ones_is_zero() {
        let m = small_matrix(3, 40, 4);
        let mut set = all_pairs(&m, Method::G2, &[], None).unwrap();
        for pr in &mut set.results {
            pr.result.p_value = Some(1.0);
        }
        assert_eq!(rejection_rate(&set, 0.05).unwrap().rate, Some(0.0));
    }

    #[test]
    fn rejection_rate_monotone_in_alpha() {
        let m = small_matrix(12, 80, 6);
        let set = all_pairs(&m, Method::X2, &[], None).unwrap();
        let mut prev = 0.0;
        for alpha in [0.01, 0.05, 0.1, 0.3, 0.7] {
            let r = rejection_rate(&set, alpha).unwrap().rate.unwrap();
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn degenerate_all_incomputable() {
        let mut set = {
            let m = small_matrix(3, 40, 4);
            all_pairs(&m, Method::X2, &[], None).unwrap()
        };
        for pr in &mut set.results {
            pr.result.p_value = None;
            pr.result.statistic = None;
        }
        let s = rejection_rate(&set, 0.05).unwrap();
        assert_eq!(s.rate, None);
        assert_eq!(s.n_incomputable, 3);
    }
}
