//! Permutation p-values that keep every stratum's row and column totals
//! fixed.
//!
//! Only `y` is rearranged, independently within each conditioning stratum;
//! `x` and the conditioning variables stay put. Re-tabulating a permuted
//! `y` therefore reproduces the original margins exactly, which also means
//! the expected frequencies — and the computability of X² — are identical
//! across replicates.
//!
//! Each p-value computation owns one deterministic ChaCha stream derived
//! from the plan seed, so results do not depend on thread count or
//! scheduling when computations are fanned out across workers.

use crate::contingency::{stratify, CategoryVector};
use crate::error::{Error, Result};
use crate::stats::{
    degrees_of_freedom, g2_cells, x2_cells, Method, StatKind, TestResult, STAT_TIE_TOL,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Denominator convention for the permutation p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvalueMode {
    /// `(1 + b) / (R + 1)`: counts the observed statistic as one more
    /// replicate; never anti-conservative and never zero. The default.
    AddOne,
    /// `b / R`: the plain proportion of replicates at or above the
    /// observed statistic.
    RawProportion,
}

/// Resampling plan: replicate count, seed, statistic and denominator
/// convention.
#[derive(Debug, Clone)]
pub struct PermutationPlan {
    pub n_permutations: usize,
    pub seed: u64,
    pub kind: StatKind,
    pub mode: PvalueMode,
}

impl PermutationPlan {
    /// 999 permutations, add-one p-values.
    pub fn new(kind: StatKind, seed: u64) -> Self {
        Self {
            n_permutations: 999,
            seed,
            kind,
            mode: PvalueMode::AddOne,
        }
    }
}

/// Uniformly shuffle the values of `y` within each stratum, leaving the
/// per-stratum multisets (hence all margins after re-tabulation) intact.
pub fn permute_within_strata<R: Rng + ?Sized>(
    y: &CategoryVector,
    strata_assignment: &[usize],
    rng: &mut R,
) -> Result<CategoryVector> {
    if y.len() != strata_assignment.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: strata_assignment.len(),
        });
    }
    let n_strata = strata_assignment.iter().max().map_or(0, |&m| m + 1);
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); n_strata];
    for (t, &s) in strata_assignment.iter().enumerate() {
        positions[s].push(t);
    }
    let mut codes = y.codes().to_vec();
    for pos in &positions {
        // Fisher-Yates over the subsequence occupied by this stratum.
        for k in (1..pos.len()).rev() {
            let j = rng.random_range(0..=k);
            codes.swap(pos[k], pos[j]);
        }
    }
    CategoryVector::new(codes, y.cardinality())
}

struct Stratum {
    xs: Vec<u16>,
    ys: Vec<u16>,
    expected: Vec<f64>,
    counts: Vec<u64>,
    has_zero_margin: bool,
}

struct Engine {
    strata: Vec<Stratum>,
    n_cols: usize,
    kind: StatKind,
}

impl Engine {
    fn build(
        x: &CategoryVector,
        y: &CategoryVector,
        z: &[CategoryVector],
        kind: StatKind,
    ) -> Result<(Self, usize)> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        let strat = stratify(z, x.len())?;
        let r = x.cardinality();
        let c = y.cardinality();
        let k = strat.n_strata();
        let dof = degrees_of_freedom(r, c, k)?;

        let mut strata: Vec<Stratum> = (0..k)
            .map(|_| Stratum {
                xs: Vec::new(),
                ys: Vec::new(),
                expected: Vec::new(),
                counts: vec![0u64; r * c],
                has_zero_margin: false,
            })
            .collect();
        for (t, (&xi, &yi)) in x.codes().iter().zip(y.codes()).enumerate() {
            let s = &mut strata[strat.ids()[t]];
            s.xs.push(xi);
            s.ys.push(yi);
        }
        for s in &mut strata {
            // Margins are fixed across replicates, so the expected counts
            // are computed once.
            let mut row = vec![0u64; r];
            let mut col = vec![0u64; c];
            for (&xi, &yi) in s.xs.iter().zip(&s.ys) {
                row[xi as usize] += 1;
                col[yi as usize] += 1;
            }
            s.has_zero_margin = row.contains(&0) || col.contains(&0);
            let n_k = s.xs.len() as f64;
            s.expected = Vec::with_capacity(r * c);
            for &ri in &row {
                for &cj in &col {
                    s.expected.push(ri as f64 * cj as f64 / n_k);
                }
            }
        }
        Ok((
            Self {
                strata,
                n_cols: c,
                kind,
            },
            dof,
        ))
    }

    /// Statistic over current per-stratum `ys` arrangements.
    fn statistic(&mut self) -> f64 {
        let c = self.n_cols;
        let mut total = 0.0;
        for s in &mut self.strata {
            for (&xi, &yi) in s.xs.iter().zip(&s.ys) {
                s.counts[xi as usize * c + yi as usize] += 1;
            }
            total += match self.kind {
                StatKind::X2 => x2_cells(&s.counts, &s.expected),
                StatKind::G2 => g2_cells(&s.counts, &s.expected),
            };
            s.counts.fill(0);
        }
        total
    }

    fn shuffle(&mut self, rng: &mut ChaCha8Rng) {
        for s in &mut self.strata {
            s.ys.shuffle(rng);
        }
    }
}

/// Permutation test of (conditional) independence.
///
/// The observed statistic `T_obs` is compared against `n_permutations`
/// within-stratum rearrangements of `y`; ties count toward the null (the
/// comparison is `T_b >= T_obs` with a small absolute tolerance to absorb
/// floating-point noise between algebraically equal tables).
///
/// With the X² statistic and a zero margin anywhere the observed statistic
/// is not computable and neither is any replicate (margins are preserved),
/// so the result is flagged not computable.
pub fn permutation_pvalue(
    x: &CategoryVector,
    y: &CategoryVector,
    z: &[CategoryVector],
    plan: &PermutationPlan,
) -> Result<TestResult> {
    if plan.n_permutations == 0 {
        return Err(Error::InvalidArgument(
            "at least one permutation is required".into(),
        ));
    }
    let method = match plan.kind {
        StatKind::G2 => Method::PermG2,
        StatKind::X2 => Method::PermX2,
    };
    let (mut engine, dof) = Engine::build(x, y, z, plan.kind)?;

    if plan.kind == StatKind::X2 && engine.strata.iter().any(|s| s.has_zero_margin) {
        return Ok(TestResult::not_computable(method, dof));
    }

    let t_obs = engine.statistic();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut exceed = 0usize;
    for _ in 0..plan.n_permutations {
        engine.shuffle(&mut rng);
        if engine.statistic() >= t_obs - STAT_TIE_TOL {
            exceed += 1;
        }
    }
    let r = plan.n_permutations as f64;
    let p = match plan.mode {
        PvalueMode::AddOne => (1.0 + exceed as f64) / (r + 1.0),
        PvalueMode::RawProportion => exceed as f64 / r,
    };
    Ok(TestResult {
        method,
        dof,
        statistic: Some(t_obs),
        p_value: Some(p),
    })
}
