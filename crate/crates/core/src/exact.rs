//! Brute-force ground truth for tiny instances.
//!
//! Enumerates every distinct within-stratum arrangement of `y` (multiset
//! permutations, all equally likely under uniform shuffling) to produce the
//! exact distribution of a test statistic with margins held fixed. This is
//! the R -> infinity limit of the permutation test and exists to validate
//! it; it is not a production test path.

use crate::contingency::{build_stratified, CategoryVector, ContingencyTable};
use crate::error::{Error, Result};
use crate::stats::{conditional_statistic, g2_cells, x2_cells, StatKind, STAT_TIE_TOL};

/// Enumeration guard: factorial blow-up is bounded per stratum.
pub const MAX_STRATUM_SIZE: usize = 10;

/// Exact distribution of a statistic over margin-preserving arrangements:
/// support points with their probability masses.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    support: Vec<(f64, f64)>, // (statistic, mass), ascending in statistic
}

impl ExactDistribution {
    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn total_mass(&self) -> f64 {
        self.support.iter().map(|&(_, m)| m).sum()
    }

    /// Probability mass at or above `t`, with the shared tie tolerance.
    pub fn upper_tail(&self, t: f64) -> f64 {
        self.support
            .iter()
            .filter(|&&(v, _)| v >= t - STAT_TIE_TOL)
            .map(|&(_, m)| m)
            .sum::<f64>()
            .min(1.0)
    }
}

fn merge_support(mut points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for (v, m) in points {
        match merged.last_mut() {
            Some(last) if (v - last.0).abs() <= STAT_TIE_TOL => last.1 += m,
            _ => merged.push((v, m)),
        }
    }
    merged
}

// Distribution of the statistic within one stratum: enumerate distinct
// arrangements of the y-multiset against the fixed x sequence.
fn stratum_distribution(
    xs: &[u16],
    ys: &[u16],
    r: usize,
    c: usize,
    kind: StatKind,
) -> Result<Vec<(f64, f64)>> {
    let n = xs.len();
    if n > MAX_STRATUM_SIZE {
        return Err(Error::InstanceTooLarge {
            got: n,
            limit: MAX_STRATUM_SIZE,
        });
    }

    let mut remaining = vec![0u32; c];
    for &y in ys {
        remaining[y as usize] += 1;
    }

    // Margins are shared by all arrangements.
    let mut counts = vec![0u64; r * c];
    for (&x, &y) in xs.iter().zip(ys) {
        counts[x as usize * c + y as usize] += 1;
    }
    let table = ContingencyTable::from_flat(counts, r, c);
    if kind == StatKind::X2 && table.has_zero_margin() {
        return Err(Error::InvalidArgument(
            "X2 is not computable for this margin configuration".into(),
        ));
    }
    let expected = table.expected_frequencies()?;

    // Number of distinct arrangements: n! / prod(multiplicity!).
    let factorial = |k: u32| -> f64 { (1..=k as u64).map(|v| v as f64).product() };
    let n_arrangements =
        factorial(n as u32) / remaining.iter().map(|&m| factorial(m)).product::<f64>();
    let weight = 1.0 / n_arrangements;

    let mut support = Vec::new();
    let mut scratch = vec![0u64; r * c];
    enumerate(
        xs,
        0,
        &mut remaining,
        &mut scratch,
        c,
        &expected,
        kind,
        weight,
        &mut support,
    );
    Ok(merge_support(support))
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    xs: &[u16],
    pos: usize,
    remaining: &mut Vec<u32>,
    counts: &mut Vec<u64>,
    c: usize,
    expected: &[f64],
    kind: StatKind,
    weight: f64,
    out: &mut Vec<(f64, f64)>,
) {
    if pos == xs.len() {
        let stat = match kind {
            StatKind::X2 => x2_cells(counts, expected),
            StatKind::G2 => g2_cells(counts, expected),
        };
        out.push((stat, weight));
        return;
    }
    let row = xs[pos] as usize;
    for v in 0..remaining.len() {
        if remaining[v] == 0 {
            continue;
        }
        remaining[v] -= 1;
        counts[row * c + v] += 1;
        enumerate(xs, pos + 1, remaining, counts, c, expected, kind, weight, out);
        counts[row * c + v] -= 1;
        remaining[v] += 1;
    }
}

/// Exact distribution of the conditional statistic: per-stratum exact
/// distributions convolved across strata.
pub fn exact_distribution(
    x: &CategoryVector,
    y: &CategoryVector,
    z: &[CategoryVector],
    kind: StatKind,
) -> Result<ExactDistribution> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let strat = crate::contingency::stratify(z, x.len())?;
    let r = x.cardinality();
    let c = y.cardinality();
    let mut per_stratum: Vec<(Vec<u16>, Vec<u16>)> = vec![(Vec::new(), Vec::new()); strat.n_strata()];
    for (t, (&xi, &yi)) in x.codes().iter().zip(y.codes()).enumerate() {
        let slot = &mut per_stratum[strat.ids()[t]];
        slot.0.push(xi);
        slot.1.push(yi);
    }

    let mut acc: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for (xs, ys) in &per_stratum {
        let dist = stratum_distribution(xs, ys, r, c, kind)?;
        let mut next = Vec::with_capacity(acc.len() * dist.len());
        for &(a, pa) in &acc {
            for &(b, pb) in &dist {
                next.push((a + b, pa * pb));
            }
        }
        acc = merge_support(next);
    }
    Ok(ExactDistribution { support: acc })
}

/// Exact p-value: mass of arrangements whose statistic is at least the
/// observed one.
pub fn exact_pvalue(
    x: &CategoryVector,
    y: &CategoryVector,
    z: &[CategoryVector],
    kind: StatKind,
) -> Result<f64> {
    let dist = exact_distribution(x, y, z, kind)?;
    let s = build_stratified(x, y, z)?;
    let observed = conditional_statistic(&s, kind)?.ok_or_else(|| {
        Error::InvalidArgument("X2 is not computable for this margin configuration".into())
    })?;
    Ok(dist.upper_tail(observed))
}

/// Two-sided Fisher exact test for a 2x2 table: the sum of hypergeometric
/// point probabilities no larger than the observed table's.
pub fn fisher_2x2_pvalue(t: &ContingencyTable) -> Result<f64> {
    if t.n_rows() != 2 || t.n_cols() != 2 {
        return Err(Error::NotTwoByTwo {
            rows: t.n_rows(),
            cols: t.n_cols(),
        });
    }
    if t.grand_total() == 0 {
        return Err(Error::EmptyTable);
    }
    let r1 = t.row_totals()[0];
    let r2 = t.row_totals()[1];
    let c1 = t.col_totals()[0];
    let n = t.grand_total();

    let ln_fact = |m: u64| crate::special::ln_gamma(m as f64 + 1.0);
    let ln_choose = |a: u64, b: u64| ln_fact(a) - ln_fact(b) - ln_fact(a - b);
    // P(k) for the count in cell (0, 0) with all margins fixed.
    let point_prob =
        |k: u64| (ln_choose(r1, k) + ln_choose(r2, c1 - k) - ln_choose(n, c1)).exp();

    let k_min = c1.saturating_sub(r2);
    let k_max = r1.min(c1);
    let p_obs = point_prob(t.count(0, 0));
    let mut p = 0.0;
    for k in k_min..=k_max {
        let pk = point_prob(k);
        if pk <= p_obs + 1e-12 {
            p += pk;
        }
    }
    Ok(p.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutation::{permutation_pvalue, PermutationPlan, PvalueMode};

    fn cv(codes: &[u16], card: usize) -> CategoryVector {
        CategoryVector::new(codes.to_vec(), card).unwrap()
    }

    #[test]
    fn aligned_2x2_pvalue_is_one_third() {
        // 4!/(2!2!) = 6 arrangements; the two aligned ones maximize G².
        let x = cv(&[0, 0, 1, 1], 2);
        let y = cv(&[0, 0, 1, 1], 2);
        let p = exact_pvalue(&x, &y, &[], StatKind::G2).unwrap();
        assert!((p - 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn constant_y_pvalue_one() {
        let x = cv(&[0, 1, 0, 1], 2);
        let y = cv(&[1, 1, 1, 1], 2);
        let p = exact_pvalue(&x, &y, &[], StatKind::G2).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn zero_statistic_pvalue_one() {
        let x = cv(&[0, 0, 1, 1], 2);
        let y = cv(&[0, 1, 0, 1], 2);
        for kind in [StatKind::G2, StatKind::X2] {
            assert_eq!(exact_pvalue(&x, &y, &[], kind).unwrap(), 1.0);
        }
    }

    #[test]
    fn aligned_20_observations_matches_hypergeometric() {
        // p = 2/C(20,10): only the two perfectly aligned arrangements reach
        // the maximal statistic.
        let codes: Vec<u16> = (0..20).map(|i| (i >= 10) as u16).collect();
        let x = cv(&codes, 2);
        // Exceeds the per-stratum guard.
        assert!(matches!(
            exact_pvalue(&x, &x, &[], StatKind::G2),
            Err(Error::InstanceTooLarge { .. })
        ));

        // n = 6 version is exactly 2/C(6,3) + ties: enumerate by hand.
        let codes: Vec<u16> = (0..6).map(|i| (i >= 3) as u16).collect();
        let x = cv(&codes, 2);
        let p = exact_pvalue(&x, &x, &[], StatKind::G2).unwrap();
        assert!((p - 0.1).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn masses_sum_to_one() {
        let x = cv(&[0, 1, 2, 0, 1, 2, 1, 0], 3);
        let y = cv(&[1, 0, 1, 1, 0, 0, 1, 0], 2);
        let z = cv(&[0, 1, 0, 1, 0, 1, 0, 1], 2);
        for kind in [StatKind::G2, StatKind::X2] {
            let d = exact_distribution(&x, &y, std::slice::from_ref(&z), kind).unwrap();
            assert!((d.total_mass() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn stratified_guard_is_per_stratum() {
        // 14 observations but 7 per stratum: within the guard.
        let x = cv(&[0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1], 2);
        let y = cv(&[1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 0, 0, 1], 2);
        let z = cv(&[0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1], 2);
        let d = exact_distribution(&x, &y, &[z], StatKind::G2).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn permutation_converges_to_exact() {
        // Smoke version of the oracle-equivalence check: one instance,
        // raw-proportion p with a large replicate count.
        let x = cv(&[0, 1, 0, 1, 1, 0, 1, 0], 2);
        let y = cv(&[1, 1, 0, 0, 1, 0, 1, 0], 2);
        let exact = exact_pvalue(&x, &y, &[], StatKind::G2).unwrap();
        let reps = 20_000;
        let plan = PermutationPlan {
            n_permutations: reps,
            seed: 12345,
            kind: StatKind::G2,
            mode: PvalueMode::RawProportion,
        };
        let approx = permutation_pvalue(&x, &y, &[], &plan)
            .unwrap()
            .p_value
            .unwrap();
        let se = (exact * (1.0 - exact) / reps as f64).sqrt();
        assert!(
            (approx - exact).abs() <= 3.0 * se + 1e-12,
            "approx {approx} vs exact {exact} (se {se})"
        );
    }

    #[test]
    fn fisher_diagonal_table() {
        let t = ContingencyTable::from_counts(&[vec![5, 0], vec![0, 5]]).unwrap();
        let p = fisher_2x2_pvalue(&t).unwrap();
        // 2 / C(10,5) by hypergeometric enumeration.
        assert!((p - 2.0 / 252.0).abs() < 1e-9);
    }

    #[test]
    fn fisher_modal_table() {
        let t = ContingencyTable::from_counts(&[vec![5, 5], vec![5, 5]]).unwrap();
        assert!((fisher_2x2_pvalue(&t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fisher_anti_diagonal_heavy() {
        let t = ContingencyTable::from_counts(&[vec![1, 9], vec![9, 1]]).unwrap();
        let p = fisher_2x2_pvalue(&t).unwrap();
        // (1 + 100 + 100 + 1) / C(20,10) by hypergeometric enumeration.
        assert!((p - 202.0 / 184756.0).abs() < 1e-9, "p = {p}");
    }

    #[test]
    fn fisher_p_decreases_with_extremeness() {
        // Fixed margins (10,10)/(10,10): moving mass off the modal table
        // never increases the two-sided p-value.
        let mut prev = f64::INFINITY;
        for k in (0..=5u64).rev() {
            let t = ContingencyTable::from_counts(&[vec![k, 10 - k], vec![10 - k, k]]).unwrap();
            let p = fisher_2x2_pvalue(&t).unwrap();
            assert!(p <= prev + 1e-12, "k={k}: p={p} > previous {prev}");
            prev = p;
        }
    }

    #[test]
    fn fisher_rejects_bad_shapes() {
        let t = ContingencyTable::from_counts(&[vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        assert!(matches!(
            fisher_2x2_pvalue(&t),
            Err(Error::NotTwoByTwo { .. })
        ));
    }

    #[test]
    fn g2_ordering_and_fisher_stay_valid_pvalues() {
        // Both are p-values in [0, 1] on a spread of tiny 2x2 instances
        // (orderings may legitimately differ).
        let instances: [([u16; 8], [u16; 8]); 3] = [
            ([0, 0, 0, 0, 1, 1, 1, 1], [0, 0, 1, 1, 0, 0, 1, 1]),
            ([0, 0, 0, 1, 1, 1, 1, 1], [1, 0, 1, 1, 0, 0, 1, 0]),
            ([0, 1, 0, 1, 0, 1, 0, 1], [1, 1, 1, 1, 0, 0, 0, 0]),
        ];
        for (xs, ys) in instances {
            let x = cv(&xs, 2);
            let y = cv(&ys, 2);
            let pe = exact_pvalue(&x, &y, &[], StatKind::G2).unwrap();
            let t = crate::contingency::build_table(&x, &y).unwrap();
            let pf = fisher_2x2_pvalue(&t).unwrap();
            assert!((0.0..=1.0).contains(&pe));
            assert!((0.0..=1.0).contains(&pf));
        }
    }
}
