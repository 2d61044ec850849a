//! Experiment drivers: statistic differences, type I error, power, timing.
//!
//! Every grid point derives its data and resampling seeds from the master
//! seed with distinct integer tags, so reports are reproducible bit for bit
//! for a given configuration and independent of the worker count.

use crate::config::{size_correct_band, BenchConfig, DiffConfig, PowerConfig, Type1Config};
use crate::report::{BenchRow, DiffRow, PowerRow, Type1Row};
use crate::CliError;
use catind_core::{
    all_pairs, asymptotic_test, build_stratified, derive_seed, gen_alternative, gen_null_matrix,
    permutation_pvalue, rejection_rate, AlternativeSpec, DataMatrix, GenSpec, Method,
    PermutationPlan, PvalueMode, TestResult,
};
use rayon::prelude::*;
use std::time::Instant;

const TAG_DIFF: u64 = 1;
const TAG_TYPE1: u64 = 2;
const TAG_POWER: u64 = 3;
const TAG_BENCH: u64 = 4;
const TAG_DATA: u64 = 0xDA;
const TAG_PERM: u64 = 0x9E;

fn null_matrix(
    cfg_distribution: catind_core::NullDistribution,
    card: usize,
    n: usize,
    n_columns: usize,
    n_conditioning: usize,
    seed: u64,
) -> Result<(DataMatrix, Vec<usize>), CliError> {
    let m = gen_null_matrix(&GenSpec {
        distribution: cfg_distribution,
        value_param: card - 1,
        n_rows: n,
        n_columns: n_columns + n_conditioning,
        seed,
    })?;
    let z: Vec<usize> = (n_columns..n_columns + n_conditioning).collect();
    Ok((m, z))
}

fn plan_for(method: Method, seed: u64, n_permutations: usize, raw: bool) -> PermutationPlan {
    PermutationPlan {
        n_permutations,
        seed,
        kind: method.stat_kind(),
        mode: if raw {
            PvalueMode::RawProportion
        } else {
            PvalueMode::AddOne
        },
    }
}

/// Mean G² − X² over all pairs where X² is computable, per grid point.
pub fn run_diff(cfg: &DiffConfig) -> Result<Vec<DiffRow>, CliError> {
    cfg.validate()?;
    let hash = cfg.config_hash();
    let mut rows = Vec::new();
    for &card in &cfg.cards {
        for &n in &cfg.sizes {
            let data_seed = derive_seed(
                cfg.seed,
                &[TAG_DIFF, TAG_DATA, card as u64, n as u64, cfg.n_conditioning as u64],
            );
            let (m, z) = null_matrix(
                cfg.distribution,
                card,
                n,
                cfg.n_columns,
                cfg.n_conditioning,
                data_seed,
            )?;
            let x2 = all_pairs(&m, Method::X2, &z, None)?;
            let g2 = all_pairs(&m, Method::G2, &z, None)?;
            let mut sum = 0.0;
            let mut n_computable = 0usize;
            let mut n_incomputable = 0usize;
            for (a, b) in x2.results().iter().zip(g2.results()) {
                match a.result.statistic {
                    Some(x2_stat) => {
                        sum += b.result.statistic.expect("G2 is always computable") - x2_stat;
                        n_computable += 1;
                    }
                    None => n_incomputable += 1,
                }
            }
            rows.push(DiffRow {
                n,
                card,
                n_cond: cfg.n_conditioning,
                mean_diff: (n_computable > 0).then(|| sum / n_computable as f64),
                n_pairs_computable: n_computable,
                n_pairs_incomputable: n_incomputable,
                seed: cfg.seed,
                config_hash: hash.clone(),
            });
        }
    }
    Ok(rows)
}

/// Rejection rate of every configured method over all column pairs, per
/// grid point, with the size-correct flag.
pub fn run_type1(cfg: &Type1Config) -> Result<Vec<Type1Row>, CliError> {
    cfg.validate()?;
    let hash = cfg.config_hash();
    let n_tests = cfg.n_columns * (cfg.n_columns - 1) / 2;
    let (band_lo, band_hi) = size_correct_band(cfg.alpha, n_tests, cfg.band_widen);
    let mut rows = Vec::new();
    for &card in &cfg.cards {
        for &n in &cfg.sizes {
            let data_seed = derive_seed(
                cfg.seed,
                &[TAG_TYPE1, TAG_DATA, card as u64, n as u64, cfg.n_conditioning as u64],
            );
            let (m, z) = null_matrix(
                cfg.distribution,
                card,
                n,
                cfg.n_columns,
                cfg.n_conditioning,
                data_seed,
            )?;
            for &method in &cfg.methods {
                let plan = method.is_permutation().then(|| {
                    let perm_seed = derive_seed(
                        cfg.seed,
                        &[TAG_TYPE1, TAG_PERM, card as u64, n as u64, cfg.n_conditioning as u64],
                    );
                    plan_for(method, perm_seed, cfg.n_permutations, cfg.raw_proportion)
                });
                let set = all_pairs(&m, method, &z, plan.as_ref())?;
                let summary = rejection_rate(&set, cfg.alpha)?;
                rows.push(Type1Row {
                    n,
                    card,
                    n_cond: cfg.n_conditioning,
                    method,
                    rejection_rate: summary.rate,
                    size_correct: summary
                        .rate
                        .is_some_and(|r| r >= band_lo && r <= band_hi),
                    n_incomputable: summary.n_incomputable,
                    seed: cfg.seed,
                    config_hash: hash.clone(),
                });
            }
        }
    }
    Ok(rows)
}

fn single_test(
    x: &catind_core::CategoryVector,
    y: &catind_core::CategoryVector,
    method: Method,
    perm_seed: u64,
    n_permutations: usize,
    raw: bool,
) -> Result<TestResult, CliError> {
    if method.is_permutation() {
        let plan = plan_for(method, perm_seed, n_permutations, raw);
        Ok(permutation_pvalue(x, y, &[], &plan)?)
    } else {
        let s = build_stratified(x, y, &[])?;
        Ok(asymptotic_test(&s, method.stat_kind())?)
    }
}

/// Rejection proportion under the logistic alternative, per
/// (cardinality, sample size, effect, method).
///
/// The denominator counts computable replicates; an incomputable X² can
/// never reject.
pub fn run_power(cfg: &PowerConfig) -> Result<Vec<PowerRow>, CliError> {
    cfg.validate()?;
    let hash = cfg.config_hash();
    let mut rows = Vec::new();
    for &card in &cfg.cards {
        for &n in &cfg.sizes {
            for b in cfg.b_min..=cfg.b_max {
                let b_tag = b as i64 as u64;
                let gen_seed = derive_seed(
                    cfg.seed,
                    &[TAG_POWER, TAG_DATA, card as u64, n as u64, b_tag],
                );
                let spec = AlternativeSpec {
                    b,
                    cardinality: card,
                    n,
                    seed: gen_seed,
                    replications: cfg.replications,
                };
                // Per replicate and method: (computable, rejected).
                let outcomes: Result<Vec<Vec<(bool, bool)>>, CliError> = (0..cfg.replications)
                    .into_par_iter()
                    .map(|rep| {
                        let (x, y) = gen_alternative(&spec, rep as u64)?;
                        cfg.methods
                            .iter()
                            .map(|&method| {
                                let perm_seed = derive_seed(
                                    cfg.seed,
                                    &[TAG_POWER, TAG_PERM, card as u64, n as u64, b_tag, rep as u64],
                                );
                                let r = single_test(
                                    &x,
                                    &y,
                                    method,
                                    perm_seed,
                                    cfg.n_permutations,
                                    cfg.raw_proportion,
                                )?;
                                Ok(match r.p_value {
                                    Some(p) => (true, p <= cfg.alpha),
                                    None => (false, false),
                                })
                            })
                            .collect()
                    })
                    .collect();
                let outcomes = outcomes?;
                for (mi, &method) in cfg.methods.iter().enumerate() {
                    let n_computable = outcomes.iter().filter(|o| o[mi].0).count();
                    let n_reject = outcomes.iter().filter(|o| o[mi].1).count();
                    rows.push(PowerRow {
                        n,
                        card,
                        b,
                        method,
                        power: (n_computable > 0)
                            .then(|| n_reject as f64 / n_computable as f64),
                        replications: cfg.replications,
                        seed: cfg.seed,
                        config_hash: hash.clone(),
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    }
}

/// Wall-clock seconds per all-pairs batch for X², G² and permutation G².
///
/// Each method gets one warm-up run (used to pick an inner iteration count
/// that keeps a repetition above ~50 ms), then `repetitions` timed samples
/// taken round-robin across methods so ambient load biases them equally.
/// The reported figure is the median sample.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, CliError> {
    cfg.validate()?;
    let hash = cfg.config_hash();
    let methods = [Method::X2, Method::G2, Method::PermG2];
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        for &card in &cfg.cards {
            let data_seed =
                derive_seed(cfg.seed, &[TAG_BENCH, TAG_DATA, card as u64, n as u64]);
            let (m, z) = null_matrix(
                catind_core::NullDistribution::Binomial,
                card,
                n,
                cfg.n_columns,
                0,
                data_seed,
            )?;
            let perm_seed =
                derive_seed(cfg.seed, &[TAG_BENCH, TAG_PERM, card as u64, n as u64]);

            let mut iters = [1usize; 3];
            for (mi, &method) in methods.iter().enumerate() {
                let plan = method
                    .is_permutation()
                    .then(|| plan_for(method, perm_seed, cfg.n_permutations, false));
                // Warm-up, also used to calibrate the inner loop.
                let start = Instant::now();
                all_pairs(&m, method, &z, plan.as_ref())?;
                let once = start.elapsed().as_secs_f64();
                iters[mi] = ((0.05 / once.max(1e-9)).ceil() as usize).clamp(1, 10_000);
            }

            let mut samples: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
            for _ in 0..cfg.repetitions {
                for (mi, &method) in methods.iter().enumerate() {
                    let plan = method
                        .is_permutation()
                        .then(|| plan_for(method, perm_seed, cfg.n_permutations, false));
                    let start = Instant::now();
                    for _ in 0..iters[mi] {
                        all_pairs(&m, method, &z, plan.as_ref())?;
                    }
                    samples[mi].push(start.elapsed().as_secs_f64() / iters[mi] as f64);
                }
            }

            let seconds: Vec<f64> = samples.iter_mut().map(|s| median(s)).collect();
            let x2_seconds = seconds[0];
            for (mi, &method) in methods.iter().enumerate() {
                rows.push(BenchRow {
                    n,
                    card,
                    method,
                    seconds: seconds[mi],
                    ratio_vs_x2: seconds[mi] / x2_seconds,
                    seed: cfg.seed,
                    config_hash: hash.clone(),
                });
            }
        }
    }
    Ok(rows)
}
