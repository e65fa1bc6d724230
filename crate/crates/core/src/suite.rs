//! The acceptance battery. Each criterion is a standalone function returning
//! a [`CriterionResult`] with the measured values it was judged on.
//!
//! Wall-clock time is reported next to each result but kept out of the JSON
//! summary, so two runs with the same seed serialize identically.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng as _, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::mixing::{self, SubsetSpec};
use crate::modular::next_prime;
use crate::qform::{self, D_GRID};
use crate::rho_walk::{self, default_budget, make_partition, GroupSpec, StartMode};
use crate::seeding;
use crate::spectral::{self, RhoGraph, DEFAULT_TOL, GAP_RESOLUTION};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Largest `n` for which the spectral sweep is also checked against the
/// dense SVD.
pub const DENSE_CHECK_MAX_N: u64 = 512;
pub const DENSE_AGREEMENT: f64 = 1e-8;
/// The form-norm fast path is compared with a dense eigensolve up to here.
pub const QFORM_DENSE_MAX_N: u64 = 301;
pub const QFORM_AGREEMENT: f64 = 1e-9;
pub const QFORM_MAX_N: u64 = 2001;
pub const TAIL_TOLERANCE: f64 = 0.05;
pub const SCALING_BAND: f64 = 0.25;
pub const MIN_NO_SQUARING_EXPONENT: f64 = 1.5;
pub const MIXING_EPS: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criterion {
    DlogCorrectness = 1,
    SpectralGap = 2,
    QuadraticForm = 3,
    MixingLemma = 4,
    SquaringEssential = 5,
    SpacedSamples = 6,
    CollisionScaling = 7,
    Generalizations = 8,
}

impl Criterion {
    pub const ALL: [Criterion; 8] = [
        Criterion::DlogCorrectness,
        Criterion::SpectralGap,
        Criterion::QuadraticForm,
        Criterion::MixingLemma,
        Criterion::SquaringEssential,
        Criterion::SpacedSamples,
        Criterion::CollisionScaling,
        Criterion::Generalizations,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Criterion> {
        Criterion::ALL.into_iter().find(|c| c.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::DlogCorrectness => "end-to-end dlog correctness",
            Criterion::SpectralGap => "spectral gap on L0",
            Criterion::QuadraticForm => "quadratic form bound",
            Criterion::MixingLemma => "mixing lemma path counts",
            Criterion::SquaringEssential => "squaring is essential for fast mixing",
            Criterion::SpacedSamples => "spaced-sample hits",
            Criterion::CollisionScaling => "collision-time scaling",
            Criterion::Generalizations => "cubing and extra multiplier",
        }
    }

    pub fn time_limit(self) -> Duration {
        let minutes = match self {
            Criterion::DlogCorrectness => 2,
            Criterion::SpectralGap => 5,
            Criterion::QuadraticForm => 3,
            Criterion::MixingLemma => 2,
            Criterion::SquaringEssential => 5,
            Criterion::SpacedSamples => 3,
            Criterion::CollisionScaling => 5,
            Criterion::Generalizations => 1,
        };
        Duration::from_secs(60 * minutes)
    }

    pub fn run(self, seed: u64) -> Result<CriterionResult> {
        let stream = seeding::derive_seed(seed, self.id() as u64);
        let start = Instant::now();
        let (passed, checks, measured) = match self {
            Criterion::DlogCorrectness => dlog_correctness(stream)?,
            Criterion::SpectralGap => spectral_gap(stream)?,
            Criterion::QuadraticForm => quadratic_form()?,
            Criterion::MixingLemma => mixing_lemma(stream)?,
            Criterion::SquaringEssential => squaring_essential(stream)?,
            Criterion::SpacedSamples => spaced_samples(stream)?,
            Criterion::CollisionScaling => collision_scaling(stream)?,
            Criterion::Generalizations => generalizations(stream)?,
        };
        Ok(CriterionResult {
            id: self.id(),
            name: self.name().to_string(),
            passed,
            checks,
            measured,
            elapsed: start.elapsed(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    /// Each individual check and whether it held.
    pub checks: BTreeMap<String, bool>,
    pub measured: Value,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn within_time(&self) -> bool {
        Criterion::from_id(self.id).is_some_and(|c| self.elapsed <= c.time_limit())
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, &ok)| !ok)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    /// `"criterion 3 (quadratic form bound): PASS in 1.2s"`.
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "criterion {} ({}): {} in {:.1}s",
            self.id,
            self.name,
            verdict,
            self.elapsed.as_secs_f64()
        );
        let failed = self.failed_checks();
        if !failed.is_empty() {
            s.push_str(&format!(" [failed: {}]", failed.join(", ")));
        }
        if !self.within_time() {
            s.push_str(" [over time limit]");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub all_passed: bool,
    pub criteria: Vec<CriterionResult>,
}

pub fn run_suite(seed: u64, which: &[Criterion]) -> Result<SuiteReport> {
    let criteria = which
        .iter()
        .map(|c| c.run(seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        seed,
        all_passed: criteria.iter().all(|c| c.passed),
        criteria,
    })
}

type Outcome = (bool, BTreeMap<String, bool>, Value);

fn outcome(checks: &[(&str, bool)], measured: Value) -> Outcome {
    let map: BTreeMap<String, bool> = checks.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    (map.values().all(|&v| v), map, measured)
}

fn dlog_correctness(seed: u64) -> Result<Outcome> {
    const INSTANCES: u64 = 100;
    let rows = (0..INSTANCES)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeding::rng_for(seed, i);
            let n = next_prime(rng.gen_range(1_000..=999_000));
            let y = rng.gen_range(1..n);
            let grp = GroupSpec::multiplicative(n, y)?;
            let part = make_partition(rng.next_u64());
            let budget = default_budget(n);
            let sol =
                rho_walk::solve_with_restarts(&grp, &part, StartMode::Random, &mut rng, budget)?;
            Ok((n, y, sol.y, sol.steps, budget, sol.restarts))
        })
        .collect::<Result<Vec<_>>>()?;
    let correct = rows.iter().filter(|r| r.1 == r.2).count();
    let within = rows.iter().filter(|r| r.3 <= r.4).count();
    let worst_budget_fraction = rows
        .iter()
        .map(|r| r.3 as f64 / r.4 as f64)
        .fold(0.0, f64::max);
    let restarts: u32 = rows.iter().map(|r| r.5).sum();
    Ok(outcome(
        &[
            ("all instances solved", correct == rows.len()),
            ("all within step budget", within == rows.len()),
        ],
        json!({
            "instances": rows.len(),
            "correct": correct,
            "within_budget": within,
            "smallest_n": rows.iter().map(|r| r.0).min(),
            "largest_n": rows.iter().map(|r| r.0).max(),
            "worst_budget_fraction": worst_budget_fraction,
            "degenerate_restarts": restarts,
        }),
    ))
}

pub const SPECTRAL_PRIMES: [u64; 5] = [101, 499, 1009, 4999, 10007];

fn spectral_gap(seed: u64) -> Result<Outcome> {
    let scan = spectral::gap_sweep(&SPECTRAL_PRIMES, 5, seed)?;
    let dense_rows: Vec<(u64, u64, f64)> = scan
        .rows
        .par_iter()
        .filter(|r| r.n <= DENSE_CHECK_MAX_N)
        .map(|r| {
            let y = r.y.expect("rho graph rows carry y");
            let dense = spectral::dense_norm_l0(&RhoGraph::new(r.n, y)?)?;
            Ok((r.n, y, (dense - r.mu).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_dense = dense_rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let max_mu = scan.rows.iter().map(|r| r.mu).fold(0.0, f64::max);
    let per_n: Vec<Value> = SPECTRAL_PRIMES
        .iter()
        .map(|&n| {
            let rows: Vec<_> = scan.rows.iter().filter(|r| r.n == n).collect();
            json!({
                "n": n,
                "y": rows.iter().map(|r| r.y).collect::<Vec<_>>(),
                "mu": rows.iter().map(|r| r.mu).collect::<Vec<_>>(),
                "min_fitted_c": rows.iter().map(|r| r.fitted_c).fold(f64::INFINITY, f64::min),
            })
        })
        .collect();
    Ok(outcome(
        &[
            (
                "mu < 3 everywhere",
                scan.rows.iter().all(|r| r.gap > GAP_RESOLUTION),
            ),
            ("min (3 - mu)(ln n)^2 > 0", scan.min_fitted_c > 0.0),
            ("dense agreement", worst_dense <= DENSE_AGREEMENT),
        ],
        json!({
            "max_mu": max_mu,
            "min_fitted_c": scan.min_fitted_c,
            "dense_checked": dense_rows.len(),
            "worst_dense_difference": worst_dense,
            "per_n": per_n,
        }),
    ))
}

fn quadratic_form() -> Result<Outcome> {
    let ns: Vec<u64> = (3..=QFORM_MAX_N).step_by(2).collect();
    let rows = ns
        .par_iter()
        .map(|&n| qform::sweep_row(n, &D_GRID))
        .collect::<Result<Vec<_>>>()?;
    let dense_diffs = ns
        .par_iter()
        .filter(|&&n| n <= QFORM_DENSE_MAX_N)
        .map(|&n| Ok((qform::q_norm(n)? - qform::q_norm_dense(n)?).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let worst_dense = dense_diffs.iter().copied().fold(0.0, f64::max);
    let max_q = rows.iter().map(|r| r.q_norm).fold(0.0, f64::max);
    let (min_gap_n, min_scaled_gap) = rows
        .iter()
        .map(|r| (r.n, r.scaled_gap))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let uncertified: Vec<u64> = rows
        .iter()
        .filter(|r| r.chosen_d.is_none())
        .map(|r| r.n)
        .collect();
    let not_dominating: Vec<u64> = rows
        .iter()
        .filter(|r| !r.certificate_dominates)
        .map(|r| r.n)
        .collect();
    let min_certified_c = rows
        .iter()
        .filter_map(|r| r.certified_c)
        .fold(f64::INFINITY, f64::min);
    let mut d_histogram: BTreeMap<String, usize> = BTreeMap::new();
    for r in &rows {
        let key = r.chosen_d.map_or("none".to_string(), |d| format!("{d}"));
        *d_histogram.entry(key).or_default() += 1;
    }
    Ok(outcome(
        &[
            ("max |Q| < 1", rows.iter().all(|r| r.q_norm < 1.0)),
            ("(1 - max|Q|)(ln n)^2 > 0", min_scaled_gap > 0.0),
            ("certificate passes for some d", uncertified.is_empty()),
            ("certificate dominates oracle", not_dominating.is_empty()),
            (
                "fast norm matches dense eigensolve",
                worst_dense <= QFORM_AGREEMENT,
            ),
        ],
        json!({
            "odd_n_tested": rows.len(),
            "max_q_norm": max_q,
            "min_scaled_gap": min_scaled_gap,
            "min_scaled_gap_at": min_gap_n,
            "min_certified_c": min_certified_c,
            "chosen_d_counts": d_histogram,
            "uncertified_n": uncertified,
            "non_dominating_n": not_dominating,
            "dense_checked": dense_diffs.len(),
            "worst_dense_difference": worst_dense,
        }),
    ))
}

pub const MIXLEM_PRIMES: [u64; 2] = [101, 499];

fn mixing_lemma(seed: u64) -> Result<Outcome> {
    let mut per_n = Vec::new();
    let mut violations = 0;
    for (i, &n) in MIXLEM_PRIMES.iter().enumerate() {
        let y = seeding::rng_for(seed, n).gen_range(2..n);
        let mu = spectral::operator_norm_L0(&RhoGraph::new(n, y)?, DEFAULT_TOL)?.mu;
        let spec = SubsetSpec {
            count: 50,
            min_size: 5,
            max_size: 20,
            seed: seeding::derive_seed(seed, 1000 + i as u64),
        };
        let report = mixing::verify_mixlem(n, y, mu, &spec)?;
        violations += report.violations.len();
        per_n.push(json!({
            "n": n,
            "y": y,
            "mu": mu,
            "r": report.r,
            "checks": report.checks,
            "min_ratio": report.min_ratio,
            "max_ratio": report.max_ratio,
            "max_sharp_ratio": report.max_sharp_ratio,
            "violations": report.violations.len(),
        }));
    }
    Ok(outcome(
        &[("zero violations", violations == 0)],
        json!({ "per_n": per_n }),
    ))
}

pub const RHO_MIXING_PRIMES: [u64; 3] = [101, 499, 1009];
pub const NO_SQUARING_PRIMES: [u64; 4] = [53, 101, 199, 401];

fn squaring_essential(seed: u64) -> Result<Outcome> {
    let sep = mixing::mixing_separation(&RHO_MIXING_PRIMES, &NO_SQUARING_PRIMES, MIXING_EPS, seed)?;
    let exponent = sep.no_squaring_exponent;
    Ok(outcome(
        &[
            (
                "rho graph mixes within (ln n)^3",
                sep.rho_constant.is_some(),
            ),
            (
                "no-squaring exponent >= 1.5",
                exponent.is_some_and(|e| e >= MIN_NO_SQUARING_EXPONENT),
            ),
        ],
        serde_json::to_value(&sep).expect("report serializes"),
    ))
}

pub const SPACED_SAMPLE_N: u64 = 10007;
pub const SPACED_SAMPLE_TRIALS: usize = 500;

fn spaced_samples(seed: u64) -> Result<Outcome> {
    let report =
        mixing::collision_bound_experiment(SPACED_SAMPLE_N, SPACED_SAMPLE_TRIALS, seed, 3)?;
    let tail_ok = |b: u32| {
        report
            .tail
            .iter()
            .find(|row| row.b == b)
            .is_some_and(|row| (row.no_hit_fraction - row.exp_minus_b).abs() <= TAIL_TOLERANCE)
    };
    // The same tail measured after b t samples instead of 3 b t.
    let t = report.t;
    let short_tail: Vec<Value> = (1..=3u32)
        .map(|b| {
            let k = b as usize * t;
            let live: Vec<_> = report
                .runs
                .iter()
                .filter(|r| !r.immediate_collision)
                .collect();
            let none = live
                .iter()
                .filter(|r| r.first_hit.is_none_or(|j| j > k))
                .count();
            json!({
                "b": b,
                "samples": k,
                "no_hit_fraction": none as f64 / live.len().max(1) as f64,
                "exp_minus_b": (-(b as f64)).exp(),
            })
        })
        .collect();
    Ok(outcome(
        &[
            (
                "mean hit frequency >= 1/(3t)",
                report.mean_hit_frequency >= report.lower_bound,
            ),
            ("no-hit fraction within 0.05 of e^-1 at b = 1", tail_ok(1)),
            ("no-hit fraction within 0.05 of e^-2 at b = 2", tail_ok(2)),
        ],
        json!({
            "n": report.n,
            "t": report.t,
            "r": report.r,
            "trials": report.trials,
            "immediate_collisions": report.immediate_collisions,
            "mean_hit_frequency": report.mean_hit_frequency,
            "lower_bound": report.lower_bound,
            "half_density_bound": report.half_density_bound,
            "uniform_density": report.uniform_density,
            "lag1_autocorrelation": report.lag1_autocorrelation,
            "tail": report.tail,
            "tail_after_bt_samples": short_tail,
        }),
    ))
}

pub const SCALING_PRIMES: [u64; 3] = [10007, 40009, 160001];

fn collision_scaling(seed: u64) -> Result<Outcome> {
    let mut medians = Vec::new();
    let mut per_n = Vec::new();
    for (i, &n) in SCALING_PRIMES.iter().enumerate() {
        let exp = rho_walk::collision_experiment(n, 200, seeding::derive_seed(seed, i as u64))?;
        medians.push(exp.summary.normalized.median);
        per_n.push(json!({
            "n": n,
            "median_t_over_sqrt_n": exp.summary.normalized.median,
            "mean_t_over_sqrt_n": exp.summary.normalized.mean,
            "median_floyd_k_over_sqrt_n": exp.summary.floyd_k.median / (n as f64).sqrt(),
            "degenerate_restarts": exp.summary.total_degenerate_restarts,
        }));
    }
    let centre = medians.iter().sum::<f64>() / medians.len() as f64;
    let worst = medians
        .iter()
        .map(|m| (m - centre).abs() / centre)
        .fold(0.0, f64::max);
    Ok(outcome(
        &[("medians within 25% of their mean", worst <= SCALING_BAND)],
        json!({
            "per_n": per_n,
            "mean_of_medians": centre,
            "worst_relative_deviation": worst,
        }),
    ))
}

pub const GENERALIZATION_PRIMES: [u64; 2] = [101, 499];

fn generalizations(seed: u64) -> Result<Outcome> {
    let mut rows = Vec::new();
    for &n in &GENERALIZATION_PRIMES {
        let mut rng = seeding::rng_for(seed, n);
        let y = rng.gen_range(2..n);
        let z = loop {
            let z = rng.gen_range(2..n);
            if z != y {
                break z;
            }
        };
        let cubing = spectral::generalized_operator(n, &[1, y], &[3])?;
        let extra = spectral::generalized_operator(n, &[1, y, z], &[2])?;
        rows.push((n, y, z, cubing, extra));
    }
    let below = rows
        .iter()
        .all(|r| r.3.gap > GAP_RESOLUTION && r.4.gap > GAP_RESOLUTION);
    let per_n: Vec<Value> = rows
        .iter()
        .map(|(n, y, z, c, e)| {
            json!({
                "n": n,
                "y": y,
                "z": z,
                "cubing_mu": c.mu,
                "cubing_degree": c.degree,
                "extra_multiplier_mu": e.mu,
                "extra_multiplier_degree": e.degree,
            })
        })
        .collect();
    Ok(outcome(
        &[("norm below degree", below)],
        json!({ "per_n": per_n }),
    ))
}
