//! Contingency tables for coded categorical data.
//!
//! Variables are represented as [`CategoryVector`]s: integer codes in
//! `[0, cardinality)` with the cardinality declared up front. Tables are
//! dimensioned by the declared cardinalities, not by the observed support,
//! so rows and columns that happen to be empty stay in the table and flow
//! into the statistics.
//!
//! Everything here is immutable after construction; all functions are pure.

use crate::error::{Error, Result};

/// A categorical variable as a sequence of integer codes with a declared
/// cardinality. Every code must lie in `[0, cardinality)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryVector {
    codes: Vec<u16>,
    cardinality: usize,
}

impl CategoryVector {
    pub fn new(codes: Vec<u16>, cardinality: usize) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::EmptyInput);
        }
        if cardinality == 0 {
            return Err(Error::CardinalityTooSmall { got: 0, min: 1 });
        }
        if let Some(&bad) = codes.iter().find(|&&c| (c as usize) >= cardinality) {
            return Err(Error::CodeOutOfRange {
                code: bad as usize,
                cardinality,
            });
        }
        Ok(Self { codes, cardinality })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[u16] {
        &self.codes
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }
}

/// An r×c table of observed counts with cached marginal totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<u64>, // row-major, n_rows * n_cols
    n_rows: usize,
    n_cols: usize,
    row_totals: Vec<u64>,
    col_totals: Vec<u64>,
    grand_total: u64,
}

impl ContingencyTable {
    /// Build a table from explicit rows of counts. Rows must be nonempty and
    /// of equal length.
    pub fn from_counts(rows: &[Vec<u64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyInput);
        }
        let n_cols = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::LengthMismatch {
                left: n_cols,
                right: bad.len(),
            });
        }
        let counts: Vec<u64> = rows.iter().flatten().copied().collect();
        Ok(Self::from_flat(counts, rows.len(), n_cols))
    }

    pub(crate) fn from_flat(counts: Vec<u64>, n_rows: usize, n_cols: usize) -> Self {
        debug_assert_eq!(counts.len(), n_rows * n_cols);
        let mut row_totals = vec![0u64; n_rows];
        let mut col_totals = vec![0u64; n_cols];
        let mut grand_total = 0u64;
        for i in 0..n_rows {
            for j in 0..n_cols {
                let v = counts[i * n_cols + j];
                row_totals[i] += v;
                col_totals[j] += v;
                grand_total += v;
            }
        }
        Self {
            counts,
            n_rows,
            n_cols,
            row_totals,
            col_totals,
            grand_total,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.n_cols + col]
    }

    /// Row-major flat view of the counts.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn row_totals(&self) -> &[u64] {
        &self.row_totals
    }

    pub fn col_totals(&self) -> &[u64] {
        &self.col_totals
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    /// True when some row total or column total is zero. Such tables make
    /// the X² statistic incomputable.
    pub fn has_zero_margin(&self) -> bool {
        self.row_totals.contains(&0) || self.col_totals.contains(&0)
    }

    /// Expected frequencies under independence with the observed margins:
    /// `E[i][j] = row_total[i] * col_total[j] / grand_total`, returned
    /// row-major. Errs on an empty table (the empty-stratum signal).
    pub fn expected_frequencies(&self) -> Result<Vec<f64>> {
        if self.grand_total == 0 {
            return Err(Error::EmptyTable);
        }
        let n = self.grand_total as f64;
        let mut expected = Vec::with_capacity(self.counts.len());
        for i in 0..self.n_rows {
            let r = self.row_totals[i] as f64;
            for j in 0..self.n_cols {
                expected.push(r * self.col_totals[j] as f64 / n);
            }
        }
        Ok(expected)
    }
}

/// Cross-tabulate two coded vectors. The table is `x.cardinality()` by
/// `y.cardinality()` regardless of which codes actually occur.
pub fn build_table(x: &CategoryVector, y: &CategoryVector) -> Result<ContingencyTable> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let r = x.cardinality();
    let c = y.cardinality();
    let mut counts = vec![0u64; r * c];
    for (&xi, &yi) in x.codes().iter().zip(y.codes()) {
        counts[xi as usize * c + yi as usize] += 1;
    }
    Ok(ContingencyTable::from_flat(counts, r, c))
}

/// Partition of observations by the joint value of the conditioning
/// variables. Stratum indices follow the insertion order of first
/// occurrence; no test result depends on that order.
#[derive(Debug, Clone)]
pub struct Stratification {
    /// Stratum index per observation.
    ids: Vec<usize>,
    /// The joint Z-value identifying each stratum (one code per
    /// conditioning variable, empty when conditioning on nothing).
    keys: Vec<Vec<u16>>,
}

impl Stratification {
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn keys(&self) -> &[Vec<u16>] {
        &self.keys
    }

    pub fn n_strata(&self) -> usize {
        self.keys.len()
    }
}

/// Assign each of `n` observations to a stratum keyed by its joint value of
/// `z`. With `z` empty there is a single stratum covering every observation.
pub fn stratify(z: &[CategoryVector], n: usize) -> Result<Stratification> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    for v in z {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: v.len(),
            });
        }
    }
    if z.is_empty() {
        return Ok(Stratification {
            ids: vec![0; n],
            keys: vec![Vec::new()],
        });
    }

    // Dense joint code; cardinalities here are small so the product stays
    // modest, but fall back to search if it would not.
    let joint_card: u128 = z.iter().map(|v| v.cardinality() as u128).product();
    let dense_limit: u128 = 1 << 22;
    let mut ids = Vec::with_capacity(n);
    let mut keys: Vec<Vec<u16>> = Vec::new();

    if joint_card <= dense_limit {
        let mut lookup = vec![usize::MAX; joint_card as usize];
        for t in 0..n {
            let mut code = 0usize;
            for v in z {
                code = code * v.cardinality() + v.codes()[t] as usize;
            }
            let slot = &mut lookup[code];
            if *slot == usize::MAX {
                *slot = keys.len();
                keys.push(z.iter().map(|v| v.codes()[t]).collect());
            }
            ids.push(*slot);
        }
    } else {
        let mut seen: std::collections::HashMap<Vec<u16>, usize> = std::collections::HashMap::new();
        for t in 0..n {
            let key: Vec<u16> = z.iter().map(|v| v.codes()[t]).collect();
            let next = keys.len();
            let idx = *seen.entry(key.clone()).or_insert_with(|| {
                keys.push(key);
                next
            });
            ids.push(idx);
        }
    }

    Ok(Stratification { ids, keys })
}

/// One contingency table per observed joint value of the conditioning
/// variables. All strata share the dimensions declared by `x` and `y`;
/// unobserved joint Z-values contribute no stratum.
#[derive(Debug, Clone)]
pub struct StratifiedTable {
    strata: Vec<ContingencyTable>,
    keys: Vec<Vec<u16>>,
    n_rows: usize,
    n_cols: usize,
}

impl StratifiedTable {
    pub fn strata(&self) -> &[ContingencyTable] {
        &self.strata
    }

    pub fn stratum_keys(&self) -> &[Vec<u16>] {
        &self.keys
    }

    pub fn n_strata(&self) -> usize {
        self.strata.len()
    }

    /// Strata with at least one observation. Builders only emit such
    /// strata, but hand-assembled tables may differ.
    pub fn n_nonempty_strata(&self) -> usize {
        self.strata.iter().filter(|t| t.grand_total() > 0).count()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn total_observations(&self) -> u64 {
        self.strata.iter().map(|t| t.grand_total()).sum()
    }

    /// Wrap a single table as an unconditional (one-stratum) instance.
    pub fn from_single(table: ContingencyTable) -> Self {
        let n_rows = table.n_rows();
        let n_cols = table.n_cols();
        Self {
            strata: vec![table],
            keys: vec![Vec::new()],
            n_rows,
            n_cols,
        }
    }

    /// Assemble from explicit strata, which must share dimensions.
    pub fn from_strata(strata: Vec<ContingencyTable>, keys: Vec<Vec<u16>>) -> Result<Self> {
        if strata.is_empty() {
            return Err(Error::EmptyInput);
        }
        if strata.len() != keys.len() {
            return Err(Error::LengthMismatch {
                left: strata.len(),
                right: keys.len(),
            });
        }
        let n_rows = strata[0].n_rows();
        let n_cols = strata[0].n_cols();
        if strata
            .iter()
            .any(|t| t.n_rows() != n_rows || t.n_cols() != n_cols)
        {
            return Err(Error::InvalidArgument(
                "strata must share table dimensions".into(),
            ));
        }
        Ok(Self {
            strata,
            keys,
            n_rows,
            n_cols,
        })
    }
}

/// Cross-tabulate `x` and `y` within each stratum defined by the joint
/// values of `z`. With `z` empty this is [`build_table`] in a one-stratum
/// wrapper.
pub fn build_stratified(
    x: &CategoryVector,
    y: &CategoryVector,
    z: &[CategoryVector],
) -> Result<StratifiedTable> {
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
    let mut counts = vec![0u64; r * c * k];
    for (t, (&xi, &yi)) in x.codes().iter().zip(y.codes()).enumerate() {
        counts[strat.ids()[t] * r * c + xi as usize * c + yi as usize] += 1;
    }
    let strata: Vec<ContingencyTable> = (0..k)
        .map(|s| ContingencyTable::from_flat(counts[s * r * c..(s + 1) * r * c].to_vec(), r, c))
        .collect();
    Ok(StratifiedTable {
        strata,
        keys: strat.keys().to_vec(),
        n_rows: r,
        n_cols: c,
    })
}
