//! X² and G² statistics for unconditional and conditional independence,
//! with degrees of freedom and asymptotic p-values.
//!
//! The X² statistic divides each squared deviation by the expected count.
//! When any row or column total is zero the expected counts in that line
//! are zero and X² is reported as *not computable* — a first-class outcome
//! carried by [`TestResult`], never an error, because simulations need to
//! count how often it happens. G² is always finite thanks to the
//! `0·log(0) = 0` convention.

use crate::contingency::{ContingencyTable, StratifiedTable};
use crate::error::{Error, Result};
use std::fmt;

pub use crate::special::{chi_square_cdf, chi_square_sf};

/// Absolute tolerance used when comparing statistic values for ties, both
/// in permutation counting and exact enumeration. Algebraically equal
/// tables can differ by a few ulps depending on summation order.
pub(crate) const STAT_TIE_TOL: f64 = 1e-12;

/// Which quadratic-form statistic to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatKind {
    X2,
    G2,
}

/// Testing procedure tag carried by results and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    X2,
    G2,
    PermG2,
    PermX2,
}

impl Method {
    pub fn stat_kind(self) -> StatKind {
        match self {
            Method::X2 | Method::PermX2 => StatKind::X2,
            Method::G2 | Method::PermG2 => StatKind::G2,
        }
    }

    pub fn is_permutation(self) -> bool {
        matches!(self, Method::PermG2 | Method::PermX2)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::X2 => "X2",
            Method::G2 => "G2",
            Method::PermG2 => "PermG2",
            Method::PermX2 => "PermX2",
        })
    }
}

/// Outcome of one independence test.
///
/// `statistic` and `p_value` are `None` exactly when the procedure was not
/// computable on the given data (an X² variant that met a zero margin).
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub method: Method,
    pub dof: usize,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
}

impl TestResult {
    pub fn computable(&self) -> bool {
        self.statistic.is_some() && self.p_value.is_some()
    }

    pub(crate) fn not_computable(method: Method, dof: usize) -> Self {
        Self {
            method,
            dof,
            statistic: None,
            p_value: None,
        }
    }
}

/// Pearson cell sum over one table: sum (O - E)^2 / E over cells with E > 0.
/// Caller guarantees no zero margin, so E = 0 implies O = 0.
pub(crate) fn x2_cells(counts: &[u64], expected: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&o, &e) in counts.iter().zip(expected) {
        if e > 0.0 {
            let d = o as f64 - e;
            acc += d * d / e;
        }
    }
    acc
}

/// Likelihood-ratio cell sum over one table: 2 * sum O * ln(O / E), with
/// zero-count cells contributing zero.
pub(crate) fn g2_cells(counts: &[u64], expected: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&o, &e) in counts.iter().zip(expected) {
        if o > 0 {
            let of = o as f64;
            acc += of * (of / e).ln();
        }
    }
    2.0 * acc
}

/// X² statistic of one table. `Ok(None)` means not computable because a
/// row or column total is zero.
pub fn x2_statistic(t: &ContingencyTable) -> Result<Option<f64>> {
    if t.grand_total() == 0 {
        return Err(Error::EmptyTable);
    }
    if t.has_zero_margin() {
        return Ok(None);
    }
    let expected = t.expected_frequencies()?;
    Ok(Some(x2_cells(t.counts(), &expected)))
}

/// G² statistic of one table; finite for every table with observations.
pub fn g2_statistic(t: &ContingencyTable) -> Result<f64> {
    if t.grand_total() == 0 {
        return Err(Error::EmptyTable);
    }
    let expected = t.expected_frequencies()?;
    Ok(g2_cells(t.counts(), &expected))
}

/// Sum of per-stratum statistics over the nonempty strata. The X² variant
/// is not computable when any contributing stratum has a zero margin.
pub fn conditional_statistic(s: &StratifiedTable, kind: StatKind) -> Result<Option<f64>> {
    if s.strata().iter().all(|t| t.grand_total() == 0) {
        return Err(Error::AllStrataEmpty);
    }
    let mut total = 0.0;
    for t in s.strata() {
        if t.grand_total() == 0 {
            continue;
        }
        match kind {
            StatKind::X2 => match x2_statistic(t)? {
                Some(v) => total += v,
                None => return Ok(None),
            },
            StatKind::G2 => total += g2_statistic(t)?,
        }
    }
    Ok(Some(total))
}

/// Degrees of freedom `(card_x - 1) * (card_y - 1) * n_strata`;
/// `n_strata = 1` encodes the unconditional case.
pub fn degrees_of_freedom(card_x: usize, card_y: usize, n_strata: usize) -> Result<usize> {
    if card_x < 2 {
        return Err(Error::CardinalityTooSmall { got: card_x, min: 2 });
    }
    if card_y < 2 {
        return Err(Error::CardinalityTooSmall { got: card_y, min: 2 });
    }
    if n_strata == 0 {
        return Err(Error::InvalidArgument(
            "degrees of freedom need at least one stratum".into(),
        ));
    }
    Ok((card_x - 1) * (card_y - 1) * n_strata)
}

/// Full asymptotic test: statistic, dof over the nonempty strata, and the
/// chi-square upper-tail p-value. Propagates X² incomputability.
pub fn asymptotic_test(s: &StratifiedTable, kind: StatKind) -> Result<TestResult> {
    let method = match kind {
        StatKind::X2 => Method::X2,
        StatKind::G2 => Method::G2,
    };
    let dof = degrees_of_freedom(s.n_rows(), s.n_cols(), s.n_nonempty_strata())?;
    match conditional_statistic(s, kind)? {
        Some(stat) => {
            let p = chi_square_sf(stat, dof)?;
            Ok(TestResult {
                method,
                dof,
                statistic: Some(stat),
                p_value: Some(p),
            })
        }
        None => Ok(TestResult::not_computable(method, dof)),
    }
}
