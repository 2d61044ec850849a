//! Property tests for the table, statistic and permutation invariants.

use catind_core::contingency::{build_stratified, build_table, stratify, CategoryVector, ContingencyTable};
use catind_core::permutation::{permutation_pvalue, permute_within_strata, PermutationPlan};
use catind_core::stats::{
    asymptotic_test, chi_square_sf, degrees_of_freedom, g2_statistic, x2_statistic, StatKind,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_counts() -> impl Strategy<Value = Vec<Vec<u64>>> {
    (2usize..=4, 2usize..=4).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(0u64..=20, c), r)
    })
}

fn arb_vector(card: usize, n: usize) -> impl Strategy<Value = CategoryVector> {
    proptest::collection::vec(0u16..card as u16, n)
        .prop_map(move |codes| CategoryVector::new(codes, card).unwrap())
}

fn arb_instance() -> impl Strategy<Value = (CategoryVector, CategoryVector, CategoryVector)> {
    (2usize..=3, 2usize..=3, 4usize..=24).prop_flat_map(|(cx, cy, n)| {
        (arb_vector(cx, n), arb_vector(cy, n), arb_vector(2, n))
    })
}

fn table_of(rows: &[Vec<u64>]) -> ContingencyTable {
    ContingencyTable::from_counts(rows).unwrap()
}

proptest! {
    #[test]
    fn margins_are_consistent(rows in arb_counts()) {
        let t = table_of(&rows);
        prop_assert_eq!(t.row_totals().iter().sum::<u64>(), t.grand_total());
        prop_assert_eq!(t.col_totals().iter().sum::<u64>(), t.grand_total());
        for i in 0..t.n_rows() {
            let s: u64 = (0..t.n_cols()).map(|j| t.count(i, j)).sum();
            prop_assert_eq!(s, t.row_totals()[i]);
        }
    }

    #[test]
    fn expected_preserves_margins(rows in arb_counts()) {
        let t = table_of(&rows);
        prop_assume!(t.grand_total() > 0);
        let e = t.expected_frequencies().unwrap();
        let c = t.n_cols();
        let total: f64 = e.iter().sum();
        prop_assert!((total - t.grand_total() as f64).abs() <= 1e-9 * t.grand_total() as f64);
        for i in 0..t.n_rows() {
            let row_sum: f64 = e[i * c..(i + 1) * c].iter().sum();
            let want = t.row_totals()[i] as f64;
            prop_assert!((row_sum - want).abs() <= 1e-9 * want.max(1.0));
        }
        for j in 0..c {
            let col_sum: f64 = (0..t.n_rows()).map(|i| e[i * c + j]).sum();
            let want = t.col_totals()[j] as f64;
            prop_assert!((col_sum - want).abs() <= 1e-9 * want.max(1.0));
        }
    }

    #[test]
    fn tabulation_is_permutation_equivariant((x, y, z) in arb_instance(), seed in 0u64..1000) {
        let before = build_stratified(&x, &y, std::slice::from_ref(&z)).unwrap();
        // Jointly permute the observations with a seeded shuffle.
        let n = x.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        let reorder = |v: &CategoryVector| {
            let codes: Vec<u16> = order.iter().map(|&t| v.codes()[t]).collect();
            CategoryVector::new(codes, v.cardinality()).unwrap()
        };
        let after = build_stratified(&reorder(&x), &reorder(&y), &[reorder(&z)]).unwrap();
        // Stratum discovery order may differ; match strata by key.
        prop_assert_eq!(before.n_strata(), after.n_strata());
        for (key, t) in before.stratum_keys().iter().zip(before.strata()) {
            let pos = after.stratum_keys().iter().position(|k| k == key).unwrap();
            prop_assert_eq!(t.counts(), after.strata()[pos].counts());
        }
    }

    #[test]
    fn constant_conditioning_equals_unconditional((x, y, _z) in arb_instance()) {
        let z = CategoryVector::new(vec![0; x.len()], 3).unwrap();
        let s = build_stratified(&x, &y, &[z]).unwrap();
        prop_assert_eq!(s.n_strata(), 1);
        let unconditional = build_table(&x, &y).unwrap();
        prop_assert_eq!(s.strata()[0].counts(), unconditional.counts());
    }

    #[test]
    fn statistics_invariant_under_transpose_and_relabel(rows in arb_counts(), seed in 0u64..1000) {
        let t = table_of(&rows);
        prop_assume!(t.grand_total() > 0);
        let r = t.n_rows();
        let c = t.n_cols();

        // Transpose.
        let transposed: Vec<Vec<u64>> =
            (0..c).map(|j| (0..r).map(|i| t.count(i, j)).collect()).collect();
        let tt = table_of(&transposed);

        // Relabel rows and columns with seeded permutations.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        let mut rp: Vec<usize> = (0..r).collect();
        let mut cp: Vec<usize> = (0..c).collect();
        rp.shuffle(&mut rng);
        cp.shuffle(&mut rng);
        let relabeled: Vec<Vec<u64>> = rp
            .iter()
            .map(|&i| cp.iter().map(|&j| t.count(i, j)).collect())
            .collect();
        let tr = table_of(&relabeled);

        match x2_statistic(&t).unwrap() {
            Some(v) => {
                let vt = x2_statistic(&tt).unwrap().unwrap();
                let vr = x2_statistic(&tr).unwrap().unwrap();
                prop_assert!((v - vt).abs() <= 1e-9 * v.max(1.0));
                prop_assert!((v - vr).abs() <= 1e-9 * v.max(1.0));
            }
            None => {
                prop_assert!(x2_statistic(&tt).unwrap().is_none());
                prop_assert!(x2_statistic(&tr).unwrap().is_none());
            }
        }
        let g = g2_statistic(&t).unwrap();
        prop_assert!((g - g2_statistic(&tt).unwrap()).abs() <= 1e-9 * g.max(1.0));
        prop_assert!((g - g2_statistic(&tr).unwrap()).abs() <= 1e-9 * g.max(1.0));
    }

    #[test]
    fn zero_statistic_means_observed_equals_expected(rows in arb_counts()) {
        let t = table_of(&rows);
        prop_assume!(t.grand_total() > 0);
        let e = t.expected_frequencies().unwrap();
        let max_dev = t
            .counts()
            .iter()
            .zip(&e)
            .map(|(&o, &ev)| (o as f64 - ev).abs())
            .fold(0.0f64, f64::max);
        let g = g2_statistic(&t).unwrap();
        prop_assert!(g >= -1e-12);
        if g.abs() <= 1e-9 {
            prop_assert!(max_dev <= 1e-6, "G2 ~ 0 but max |O-E| = {max_dev}");
        }
        if let Some(x) = x2_statistic(&t).unwrap() {
            prop_assert!(x >= -1e-12);
            if x.abs() <= 1e-9 {
                prop_assert!(max_dev <= 1e-6);
            }
            if max_dev <= 1e-9 {
                prop_assert!(x.abs() <= 1e-9 && g.abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn outer_product_tables_score_zero(a in proptest::collection::vec(1u64..=5, 2..=4),
                                       b in proptest::collection::vec(1u64..=5, 2..=4)) {
        let rows: Vec<Vec<u64>> = a.iter().map(|&ai| b.iter().map(|&bj| ai * bj).collect()).collect();
        let t = table_of(&rows);
        prop_assert!(x2_statistic(&t).unwrap().unwrap().abs() <= 1e-9);
        prop_assert!(g2_statistic(&t).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn sf_is_monotone_non_increasing(dof in 1usize..=50, x0 in 0.0f64..100.0, dx in 0.0f64..50.0) {
        let lo = chi_square_sf(x0 + dx, dof).unwrap();
        let hi = chi_square_sf(x0, dof).unwrap();
        prop_assert!(lo <= hi + 1e-12);
        prop_assert!((0.0..=1.0).contains(&lo));
    }

    #[test]
    fn stratified_dof_is_sum_of_per_stratum_dofs((x, y, z) in arb_instance()) {
        let s = build_stratified(&x, &y, &[z]).unwrap();
        let result = asymptotic_test(&s, StatKind::G2).unwrap();
        let per_stratum: usize = s
            .strata()
            .iter()
            .filter(|t| t.grand_total() > 0)
            .map(|_| degrees_of_freedom(s.n_rows(), s.n_cols(), 1).unwrap())
            .sum();
        prop_assert_eq!(result.dof, per_stratum);
    }

    #[test]
    fn permutation_preserves_all_margins((x, y, z) in arb_instance(), seed in 0u64..500) {
        let strat = stratify(std::slice::from_ref(&z), x.len()).unwrap();
        let before = build_stratified(&x, &y, std::slice::from_ref(&z)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let yp = permute_within_strata(&y, strat.ids(), &mut rng).unwrap();
        let after = build_stratified(&x, &yp, std::slice::from_ref(&z)).unwrap();
        for (a, b) in before.strata().iter().zip(after.strata()) {
            prop_assert_eq!(a.row_totals(), b.row_totals());
            prop_assert_eq!(a.col_totals(), b.col_totals());
        }
    }

    #[test]
    fn permutation_pvalue_range_and_relabel_invariance((x, y, z) in arb_instance(), seed in 0u64..200) {
        let reps = 99usize;
        let plan = PermutationPlan {
            n_permutations: reps,
            ..PermutationPlan::new(StatKind::G2, seed)
        };
        let r = permutation_pvalue(&x, &y, std::slice::from_ref(&z), &plan).unwrap();
        let p = r.p_value.unwrap();
        prop_assert!(p >= 1.0 / (reps as f64 + 1.0) - 1e-12);
        prop_assert!(p <= 1.0 + 1e-12);

        // Relabeling the categories of x must not move the p-value.
        let cx = x.cardinality();
        let relabeled: Vec<u16> = x.codes().iter().map(|&v| (cx as u16 - 1) - v).collect();
        let xr = CategoryVector::new(relabeled, cx).unwrap();
        let rr = permutation_pvalue(&xr, &y, std::slice::from_ref(&z), &plan).unwrap();
        prop_assert_eq!(r.p_value, rr.p_value);
    }
}
