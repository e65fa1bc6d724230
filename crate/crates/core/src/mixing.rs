//! Exact path counts, total-variation mixing, and the spaced-sample
//! experiment behind the collision-time argument.
//!
//! Everything except [`collision_bound_check`] evolves exact distributions
//! on the vertex set; no sampling noise enters the path-count or
//! mixing-time numbers.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng as _, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rho_walk::{make_partition, step, GroupSpec, WalkState};
use crate::seeding::{self, Rng};
use crate::spectral::{RhoGraph, DENSE_CEILING};
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `x -> x + 1`, `x -> x + y`, `x -> 2x`.
    Rho,
    /// `x -> x + 1`, `x -> x + y`: the rho graph without squaring.
    NoSquaring,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Rho => "rho",
            Variant::NoSquaring => "no-squaring",
        })
    }
}

/// The simple random walk on a regular directed graph: each out-edge is
/// taken with probability `1 / degree`.
#[derive(Clone, Debug)]
pub struct TransitionOperator {
    graph: RhoGraph,
    variant: Variant,
    succ: Vec<u32>,
}

impl TransitionOperator {
    pub fn new(n: u64, y: u64, variant: Variant) -> Result<Self> {
        let graph = match variant {
            Variant::Rho => RhoGraph::new(n, y)?,
            Variant::NoSquaring => {
                if y.is_multiple_of(n) || y % n == 1 {
                    return Err(Error::InvalidParameter(format!(
                        "y must not be 0 or 1 modulo n (got {})",
                        y % n
                    )));
                }
                RhoGraph::cayley(n, &[1, y])?
            }
        };
        if n > DENSE_CEILING {
            return Err(Error::TooLarge {
                n,
                ceiling: DENSE_CEILING,
            });
        }
        let succ = graph.successor_table();
        Ok(TransitionOperator {
            graph,
            variant,
            succ,
        })
    }

    pub fn graph(&self) -> &RhoGraph {
        &self.graph
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n(&self) -> usize {
        self.graph.order()
    }

    pub fn degree(&self) -> usize {
        self.graph.degree()
    }

    /// Translations act transitively on a Cayley graph, so one start
    /// represents all of them.
    pub fn is_vertex_transitive(&self) -> bool {
        self.graph.powers().is_empty()
    }

    #[inline]
    fn successors(&self, v: usize) -> &[u32] {
        let d = self.degree();
        &self.succ[v * d..(v + 1) * d]
    }

    /// One step of the walk: `out = p P`.
    pub fn push_forward(&self, p: &[f64], out: &mut [f64]) {
        let w = 1.0 / self.degree() as f64;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (v, &mass) in p.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &s in self.successors(v) {
                out[s as usize] += mass * w;
            }
        }
    }

    /// Path counts one step further: `out[w] = sum over v -> w of c[v]`.
    fn push_counts(&self, c: &[u128], out: &mut [u128]) {
        out.iter_mut().for_each(|o| *o = 0);
        for (v, &count) in c.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for &s in self.successors(v) {
                out[s as usize] += count;
            }
        }
    }

    /// Distribution after `r` steps from `start`.
    pub fn evolve(&self, start: usize, r: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.n()];
        let mut q = vec![0.0; self.n()];
        p[start] = 1.0;
        for _ in 0..r {
            self.push_forward(&p, &mut q);
            std::mem::swap(&mut p, &mut q);
        }
        p
    }

    /// `(A f)(v) = sum over v -> w of f(w)`, unnormalized.
    pub fn adjacency_apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|v| self.successors(v).iter().map(|&w| f[w as usize]).sum())
            .collect()
    }
}

pub fn total_variation_to_uniform(p: &[f64]) -> f64 {
    let u = 1.0 / p.len() as f64;
    0.5 * p.iter().map(|x| (x - u).abs()).sum::<f64>()
}

/// Paths of length `r` from `start` that end in `subset`, on the rho graph
/// with parameter `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathCountQuery {
    pub n: u64,
    pub y: u64,
    pub start: u64,
    pub subset: Vec<u64>,
    pub r: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathCount {
    /// Number of paths, `3^r` times `probability`.
    pub count: f64,
    /// Exact count when `k^r` fits in 128 bits.
    pub exact: Option<u128>,
    /// Probability that the random walk ends in the subset.
    pub probability: f64,
}

pub fn count_paths(q: &PathCountQuery) -> Result<PathCount> {
    let op = TransitionOperator::new(q.n, q.y, Variant::Rho)?;
    validate_subset(q.n, q.start, &q.subset)?;
    count_paths_with(&op, q.start as usize, &q.subset, q.r)
}

fn validate_subset(n: u64, start: u64, subset: &[u64]) -> Result<()> {
    if start >= n {
        return Err(Error::InvalidParameter(format!(
            "start {start} is not a vertex"
        )));
    }
    if subset.is_empty() {
        return Err(Error::InvalidParameter(
            "target set must be non-empty".into(),
        ));
    }
    if let Some(&v) = subset.iter().find(|&&v| v >= n) {
        return Err(Error::InvalidParameter(format!("{v} is not a vertex")));
    }
    let distinct: HashSet<u64> = subset.iter().copied().collect();
    if distinct.len() != subset.len() {
        return Err(Error::InvalidParameter(
            "target set has repeated vertices".into(),
        ));
    }
    Ok(())
}

pub fn count_paths_with(
    op: &TransitionOperator,
    start: usize,
    subset: &[u64],
    r: usize,
) -> Result<PathCount> {
    let deg = op.degree() as f64;
    if (r as f64) * deg.log2() < 127.0 {
        let mut c = vec![0u128; op.n()];
        let mut next = vec![0u128; op.n()];
        c[start] = 1;
        for _ in 0..r {
            op.push_counts(&c, &mut next);
            std::mem::swap(&mut c, &mut next);
        }
        let exact: u128 = subset.iter().map(|&v| c[v as usize]).sum();
        let total = deg.powi(r as i32);
        return Ok(PathCount {
            count: exact as f64,
            exact: Some(exact),
            probability: exact as f64 / total,
        });
    }
    let p = op.evolve(start, r);
    let probability: f64 = subset.iter().map(|&v| p[v as usize]).sum();
    Ok(PathCount {
        count: probability * deg.powi(r as i32),
        exact: None,
        probability,
    })
}

/// Quantities from the orthogonal-splitting argument for one start and set:
/// `chi_S = (|S|/n) 1 + w`, `chi_start = (1/n) 1 + u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitQuantities {
    pub w_norm: f64,
    pub u_norm: f64,
    /// `||A^r u||`, computed by applying the adjacency `r` times.
    pub ar_u_norm: f64,
    /// `<w, A^r u>`.
    pub cross_term: f64,
    /// `(|S|/n) k^r`.
    pub main_term: f64,
    /// `<chi_S, A^r chi_start>` evaluated directly.
    pub inner_product: f64,
}

/// Evaluates the splitting on the graph's adjacency operator. Counts grow
/// like `k^r`, so keep `r` moderate.
pub fn split_quantities(
    op: &TransitionOperator,
    start: usize,
    subset: &[u64],
    r: usize,
) -> SplitQuantities {
    let n = op.n();
    let s_frac = subset.len() as f64 / n as f64;
    let mut chi_s = vec![0.0; n];
    for &v in subset {
        chi_s[v as usize] = 1.0;
    }
    let w: Vec<f64> = chi_s.iter().map(|x| x - s_frac).collect();
    let mut u = vec![-1.0 / n as f64; n];
    u[start] += 1.0;
    let mut chi_y = vec![0.0; n];
    chi_y[start] = 1.0;

    let mut ar_u = u.clone();
    let mut ar_chi = chi_y;
    for _ in 0..r {
        ar_u = op.adjacency_apply(&ar_u);
        ar_chi = op.adjacency_apply(&ar_chi);
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let norm = |a: &[f64]| dot(a, a).sqrt();
    SplitQuantities {
        w_norm: norm(&w),
        u_norm: norm(&u),
        ar_u_norm: norm(&ar_u),
        cross_term: dot(&w, &ar_u),
        main_term: s_frac * (op.degree() as f64).powi(r as i32),
        inner_product: dot(&chi_s, &ar_chi),
    }
}

/// How random target sets are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetSpec {
    pub count: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub seed: u64,
}

impl Default for SubsetSpec {
    fn default() -> Self {
        SubsetSpec {
            count: 50,
            min_size: 5,
            max_size: 20,
            seed: 1,
        }
    }
}

pub fn random_subsets(n: usize, spec: &SubsetSpec) -> Vec<Vec<u64>> {
    let mut rng = seeding::rng_for(spec.seed, n as u64);
    (0..spec.count)
        .map(|_| {
            let size = rng.gen_range(spec.min_size..=spec.max_size).min(n);
            let mut s: Vec<u64> = sample(&mut rng, n, size)
                .into_iter()
                .map(|v| v as u64)
                .collect();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Smallest `r` with `r >= ln(2n) / ln(k / mu)`.
pub fn mixlem_length(n: u64, degree: usize, mu: f64) -> usize {
    ((2.0 * n as f64).ln() / (degree as f64 / mu).ln()).ceil() as usize
}

/// One audit row: a start vertex against one target set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixlemRow {
    pub start: u64,
    pub subset_id: usize,
    pub count: f64,
    pub expected: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixlemViolation {
    pub start: u64,
    pub subset_id: usize,
    pub ratio: f64,
    /// `|count - expected| / (mu^r sqrt|S|)`; above 1 breaks the sharp bound.
    pub sharp_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixlemReport {
    pub n: u64,
    pub y: u64,
    pub mu: f64,
    pub r: usize,
    pub subsets: usize,
    pub checks: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Largest `|count - expected| / (mu^r sqrt|S|)` seen.
    pub max_sharp_ratio: f64,
    pub violations: Vec<MixlemViolation>,
    #[serde(skip)]
    pub rows: Vec<MixlemRow>,
}

impl MixlemReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Turns the first violation, if any, into an error.
    pub fn check(&self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::MixingBoundViolated {
                start: v.start,
                subset: v.subset_id,
                ratio: v.ratio,
            }),
        }
    }
}

/// Checks, for every start vertex and every sampled set `S`, that the number
/// of length-`r` paths ending in `S` lies within `[1/2, 3/2] k^r |S| / n`
/// and within `mu^r sqrt|S|` of `k^r |S| / n`, at
/// `r = ceil(ln(2n) / ln(k / mu))`.
///
/// Counts are handled as probabilities (`count / k^r`), which keeps every
/// quantity in floating-point range for any `r`.
pub fn verify_mixlem(n: u64, y: u64, mu: f64, subsets: &SubsetSpec) -> Result<MixlemReport> {
    let op = TransitionOperator::new(n, y, Variant::Rho)?;
    let k = op.degree() as f64;
    if !(mu > 0.0 && mu < k) {
        return Err(Error::InvalidParameter(format!(
            "mu = {mu} must lie in (0, {k})"
        )));
    }
    let r = mixlem_length(n, op.degree(), mu);
    let sets = random_subsets(op.n(), subsets);
    let scale = k.powi(r as i32);
    // (mu / k)^r, the per-path-count error budget divided by k^r.
    let contraction = (mu / k).powi(r as i32);

    let per_start: Vec<(Vec<MixlemRow>, Vec<MixlemViolation>, f64)> = (0..op.n())
        .into_par_iter()
        .map(|start| {
            let p = op.evolve(start, r);
            let mut rows = Vec::with_capacity(sets.len());
            let mut violations = Vec::new();
            let mut worst_sharp: f64 = 0.0;
            for (id, s) in sets.iter().enumerate() {
                let prob: f64 = s.iter().map(|&v| p[v as usize]).sum();
                let expected_prob = s.len() as f64 / n as f64;
                let ratio = prob / expected_prob;
                let sharp = (prob - expected_prob).abs() / (contraction * (s.len() as f64).sqrt());
                worst_sharp = worst_sharp.max(sharp);
                if !(0.5..=1.5).contains(&ratio) || sharp > 1.0 {
                    violations.push(MixlemViolation {
                        start: start as u64,
                        subset_id: id,
                        ratio,
                        sharp_ratio: sharp,
                    });
                }
                rows.push(MixlemRow {
                    start: start as u64,
                    subset_id: id,
                    count: prob * scale,
                    expected: expected_prob * scale,
                    ratio,
                });
            }
            (rows, violations, worst_sharp)
        })
        .collect();

    let mut rows = Vec::with_capacity(op.n() * sets.len());
    let mut violations = Vec::new();
    let mut max_sharp_ratio: f64 = 0.0;
    for (r_rows, r_viol, sharp) in per_start {
        rows.extend(r_rows);
        violations.extend(r_viol);
        max_sharp_ratio = max_sharp_ratio.max(sharp);
    }
    let ratios = rows.iter().map(|row| row.ratio);
    let min_ratio = ratios.clone().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.fold(f64::NEG_INFINITY, f64::max);
    Ok(MixlemReport {
        n,
        y,
        mu,
        r,
        subsets: sets.len(),
        checks: rows.len(),
        min_ratio,
        max_ratio,
        max_sharp_ratio,
        violations,
        rows,
    })
}

/// One CSV row of a TV curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvRow {
    pub n: u64,
    pub variant: Variant,
    pub r: usize,
    pub max_tv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub n: u64,
    pub y: u64,
    pub variant: Variant,
    pub eps: f64,
    pub r_budget: usize,
    /// `max_tv[r]` is the worst total-variation distance to uniform over
    /// all start vertices after `r` steps.
    pub max_tv: Vec<f64>,
    /// Least `r <= r_budget` with `max_tv[r] <= eps`, if reached.
    pub tau: Option<usize>,
}

impl MixingReport {
    pub fn rows(&self) -> Vec<TvRow> {
        self.max_tv
            .iter()
            .enumerate()
            .map(|(r, &max_tv)| TvRow {
                n: self.n,
                variant: self.variant,
                r,
                max_tv,
            })
            .collect()
    }
}

/// Evolves the exact distribution from every start (one start for a Cayley
/// graph) until the worst total variation drops to `eps` or `r_budget` steps
/// have been taken.
pub fn tv_mixing_time(op: &TransitionOperator, eps: f64, r_budget: usize) -> MixingReport {
    let n = op.n();
    let starts: Vec<usize> = if op.is_vertex_transitive() {
        vec![0]
    } else {
        (0..n).collect()
    };
    let mut dists: Vec<Vec<f64>> = starts
        .iter()
        .map(|&s| {
            let mut p = vec![0.0; n];
            p[s] = 1.0;
            p
        })
        .collect();
    let mut scratch: Vec<Vec<f64>> = vec![vec![0.0; n]; starts.len()];

    let worst = |d: &[Vec<f64>]| {
        d.par_iter()
            .map(|p| total_variation_to_uniform(p))
            .reduce(|| 0.0, f64::max)
    };
    let mut max_tv = vec![worst(&dists)];
    let mut tau = (max_tv[0] <= eps).then_some(0);
    let mut r = 0;
    while tau.is_none() && r < r_budget {
        dists
            .par_iter()
            .zip(scratch.par_iter_mut())
            .for_each(|(p, q)| op.push_forward(p, q));
        std::mem::swap(&mut dists, &mut scratch);
        r += 1;
        let tv = worst(&dists);
        max_tv.push(tv);
        if tv <= eps {
            tau = Some(r);
        }
    }
    let y = op.graph().multipliers().get(1).copied().unwrap_or(0);
    MixingReport {
        n: n as u64,
        y,
        variant: op.variant(),
        eps,
        r_budget,
        max_tv,
        tau,
    }
}

/// `tau(eps)` for the rho graph against `C (ln n)^3`, and for the
/// no-squaring graph against a power of `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub eps: f64,
    pub rho: Vec<MixingPoint>,
    /// `max tau / (ln n)^3` over the rho rows; `None` if any row failed to mix.
    pub rho_constant: Option<f64>,
    pub no_squaring: Vec<MixingPoint>,
    /// Least-squares slope of `ln tau` against `ln n`.
    pub no_squaring_exponent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingPoint {
    pub n: u64,
    pub y: u64,
    pub tau: Option<usize>,
    pub r_budget: usize,
    /// `tau / (ln n)^3`.
    pub per_log_cube: Option<f64>,
}

fn mixing_point(
    n: u64,
    y: u64,
    variant: Variant,
    eps: f64,
    r_budget: usize,
) -> Result<MixingPoint> {
    let op = TransitionOperator::new(n, y, variant)?;
    let report = tv_mixing_time(&op, eps, r_budget);
    Ok(MixingPoint {
        n,
        y,
        tau: report.tau,
        r_budget,
        per_log_cube: report.tau.map(|t| t as f64 / (n as f64).ln().powi(3)),
    })
}

/// Rho-graph budget `ceil((ln n)^3)`, so reaching `tau` certifies `C <= 1`.
pub fn rho_budget(n: u64) -> usize {
    (n as f64).ln().powi(3).ceil() as usize
}

/// No-squaring budget `n^2`, comfortably above the `~0.2 n^2` it needs.
pub fn no_squaring_budget(n: u64) -> usize {
    (n * n) as usize
}

pub fn mixing_separation(
    rho_primes: &[u64],
    no_squaring_primes: &[u64],
    eps: f64,
    seed: u64,
) -> Result<SeparationReport> {
    let pick_y = |n: u64| seeding::rng_for(seed, n).gen_range(2..n);
    let rho = rho_primes
        .iter()
        .map(|&n| mixing_point(n, pick_y(n), Variant::Rho, eps, rho_budget(n)))
        .collect::<Result<Vec<_>>>()?;
    let no_squaring = no_squaring_primes
        .par_iter()
        .map(|&n| {
            mixing_point(
                n,
                pick_y(n),
                Variant::NoSquaring,
                eps,
                no_squaring_budget(n),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let rho_constant = rho
        .iter()
        .map(|p| p.per_log_cube)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max));
    let no_squaring_exponent = no_squaring
        .iter()
        .map(|p| p.tau.map(|t| (p.n as f64, t as f64)))
        .collect::<Option<Vec<_>>>()
        .map(|pts| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            stats::power_law_exponent(&xs, &ys)
        });
    Ok(SeparationReport {
        eps,
        rho,
        rho_constant,
        no_squaring,
        no_squaring_exponent,
    })
}

/// One run of the spaced-sample argument.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionBoundTrial {
    pub seed: u64,
    pub n: u64,
    /// `floor(sqrt n)`.
    pub t: usize,
    /// Sample spacing, `round((ln n)^3)`.
    pub r: usize,
    /// The first `t` iterates already repeated a value.
    pub immediate_collision: bool,
    pub set_size: usize,
    pub samples: usize,
    pub hits: usize,
    pub hit_frequency: f64,
    /// 1-based index of the first sample landing in the set.
    pub first_hit: Option<usize>,
    #[serde(skip)]
    pub hit_indicators: Vec<bool>,
}

pub fn spacing(n: u64) -> usize {
    (n as f64).ln().powi(3).round() as usize
}

/// Runs the rho iteration for `t = floor(sqrt n)` steps on a random planted
/// instance and collects `S = {x_1, ..., x_t}`. From `x_t` it then draws
/// `samples` points spaced `r = round((ln n)^3)` steps apart and records
/// which of them land in `S`.
///
/// Between samples the walk takes uniformly random edges. Under a uniformly
/// random partition the rho iteration is exactly this random walk until it
/// revisits a vertex, and a revisit is itself a collision.
pub fn collision_bound_check(n: u64, seed: u64, samples: usize) -> Result<CollisionBoundTrial> {
    let mut rng = seeding::rng_from_seed(seed);
    let y = rng.gen_range(2..n);
    let grp = GroupSpec::exponent_model(n, y)?;
    let part = make_partition(rng.next_u64());
    let t = (n as f64).sqrt().floor() as usize;
    let r = spacing(n);

    let mut state = WalkState::random(&grp, &mut rng);
    let mut set = HashSet::with_capacity(t);
    for _ in 0..t {
        state = step(&state, &part, &grp);
        set.insert(state.x);
    }
    let immediate_collision = set.len() < t;
    let mut trial = CollisionBoundTrial {
        seed,
        n,
        t,
        r,
        immediate_collision,
        set_size: set.len(),
        samples: 0,
        hits: 0,
        hit_frequency: 0.0,
        first_hit: None,
        hit_indicators: Vec::new(),
    };
    if immediate_collision {
        return Ok(trial);
    }

    let nm = grp.n;
    let mut x = state.x;
    let mut indicators = Vec::with_capacity(samples);
    for j in 1..=samples {
        for _ in 0..r {
            x = random_edge(&mut rng, nm, x, y);
        }
        let hit = set.contains(&x);
        if hit && trial.first_hit.is_none() {
            trial.first_hit = Some(j);
        }
        indicators.push(hit);
    }
    trial.samples = samples;
    trial.hits = indicators.iter().filter(|&&h| h).count();
    trial.hit_frequency = trial.hits as f64 / samples.max(1) as f64;
    trial.hit_indicators = indicators;
    Ok(trial)
}

#[inline]
fn random_edge(rng: &mut Rng, n: crate::Modulus, x: u64, y: u64) -> u64 {
    match rng.gen_range(0..3u8) {
        0 => n.add(x, 1),
        1 => n.add(x, y),
        _ => n.add(x, x),
    }
}

/// Tail of the first-hit index after `3 b t` samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub b: u32,
    pub samples: usize,
    /// Fraction of runs (without an immediate collision) with no hit in the
    /// first `3 b t` samples.
    pub no_hit_fraction: f64,
    /// `e^{-b}`, the limit of `(1 - 1/(3t))^{3bt}`.
    pub exp_minus_b: f64,
    /// `(1 - 1/(3t))^{3bt}` itself.
    pub bound_model: f64,
    /// `(1 - p)^{3bt}` with `p` the pooled empirical hit frequency.
    pub empirical_geometric: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionBoundReport {
    pub n: u64,
    pub t: usize,
    pub r: usize,
    pub trials: usize,
    pub immediate_collisions: usize,
    /// Average over non-immediate runs of the per-run hit frequency.
    pub mean_hit_frequency: f64,
    /// `1 / (3t)`.
    pub lower_bound: f64,
    /// `1 / (2 sqrt n)`.
    pub half_density_bound: f64,
    /// `mean |S| / n`, what a perfectly mixed walk would give.
    pub uniform_density: f64,
    pub tail: Vec<TailRow>,
    /// Lag-1 autocorrelation of hit indicators pooled across runs.
    pub lag1_autocorrelation: f64,
    #[serde(skip)]
    pub runs: Vec<CollisionBoundTrial>,
}

/// `trials` independent runs of [`collision_bound_check`], each with
/// `3 * b_max * t` samples; run `i` is seeded by `derive_seed(seed, i)`.
pub fn collision_bound_experiment(
    n: u64,
    trials: usize,
    seed: u64,
    b_max: u32,
) -> Result<CollisionBoundReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    crate::Modulus::prime(n)?;
    let t = (n as f64).sqrt().floor() as usize;
    let samples = 3 * b_max as usize * t;
    let runs = (0..trials as u64)
        .into_par_iter()
        .map(|i| collision_bound_check(n, seeding::derive_seed(seed, i), samples))
        .collect::<Result<Vec<_>>>()?;

    let live: Vec<&CollisionBoundTrial> = runs.iter().filter(|r| !r.immediate_collision).collect();
    let freqs: Vec<f64> = live.iter().map(|r| r.hit_frequency).collect();
    let mean_hit_frequency = stats::mean(&freqs);
    let pooled = live.iter().map(|r| r.hits).sum::<usize>() as f64
        / live.iter().map(|r| r.samples).sum::<usize>().max(1) as f64;
    let tail = (1..=b_max)
        .map(|b| {
            let k = 3 * b as usize * t;
            let none = live
                .iter()
                .filter(|r| r.first_hit.is_none_or(|j| j > k))
                .count();
            TailRow {
                b,
                samples: k,
                no_hit_fraction: none as f64 / live.len().max(1) as f64,
                exp_minus_b: (-(b as f64)).exp(),
                bound_model: (1.0 - 1.0 / (3.0 * t as f64)).powi(k as i32),
                empirical_geometric: (1.0 - pooled).powi(k as i32),
            }
        })
        .collect();
    let sizes: Vec<f64> = live.iter().map(|r| r.set_size as f64).collect();
    Ok(CollisionBoundReport {
        n,
        t,
        r: spacing(n),
        trials,
        immediate_collisions: runs.len() - live.len(),
        mean_hit_frequency,
        lower_bound: 1.0 / (3.0 * t as f64),
        half_density_bound: 1.0 / (2.0 * (n as f64).sqrt()),
        uniform_density: stats::mean(&sizes) / n as f64,
        tail,
        lag1_autocorrelation: lag1_autocorrelation(&live),
        runs,
    })
}

/// Pooled lag-1 autocorrelation of the 0/1 hit sequences.
fn lag1_autocorrelation(runs: &[&CollisionBoundTrial]) -> f64 {
    let all: Vec<f64> = runs
        .iter()
        .flat_map(|r| r.hit_indicators.iter().map(|&h| h as u8 as f64))
        .collect();
    let m = stats::mean(&all);
    let var: f64 = all.iter().map(|x| (x - m) * (x - m)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = runs
        .iter()
        .flat_map(|r| {
            r.hit_indicators
                .windows(2)
                .map(|w| (w[0] as u8 as f64 - m) * (w[1] as u8 as f64 - m))
        })
        .sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{operator_norm_L0, DEFAULT_TOL};
    use approx::assert_relative_eq;

    /// Enumerates all `3^r` edge choices explicitly.
    fn brute_force_paths(n: u64, y: u64, start: u64, target: &[u64], r: u32) -> u64 {
        let mut total = 0;
        for code in 0..3u64.pow(r) {
            let mut x = start;
            let mut c = code;
            for _ in 0..r {
                x = match c % 3 {
                    0 => (x + 1) % n,
                    1 => (x + y) % n,
                    _ => (2 * x) % n,
                };
                c /= 3;
            }
            if target.contains(&x) {
                total += 1;
            }
        }
        total
    }

    #[test]
    fn one_step_to_out_neighbours() {
        let q = PathCountQuery {
            n: 11,
            y: 3,
            start: 4,
            subset: vec![5, 7, 8],
            r: 1,
        };
        assert_eq!(count_paths(&q).unwrap().exact, Some(3));
    }

    #[test]
    fn counts_match_exhaustive_enumeration() {
        for start in 0..11u64 {
            for v in 0..11u64 {
                let q = PathCountQuery {
                    n: 11,
                    y: 3,
                    start,
                    subset: vec![v],
                    r: 4,
                };
                let got = count_paths(&q).unwrap();
                let want = brute_force_paths(11, 3, start, &[v], 4);
                assert_eq!(got.exact, Some(want as u128), "start={start} v={v}");
            }
        }
    }

    #[test]
    fn whole_vertex_set_receives_every_path() {
        for r in [1usize, 5, 40, 80, 120] {
            let q = PathCountQuery {
                n: 101,
                y: 7,
                start: 3,
                subset: (0..101).collect(),
                r,
            };
            let c = count_paths(&q).unwrap();
            assert_relative_eq!(c.probability, 1.0, epsilon = 1e-12);
            if let Some(exact) = c.exact {
                assert_eq!(exact, 3u128.pow(r as u32));
            }
        }
    }

    #[test]
    fn query_validation() {
        let mut q = PathCountQuery {
            n: 11,
            y: 3,
            start: 0,
            subset: vec![],
            r: 2,
        };
        assert!(count_paths(&q).is_err());
        q.subset = vec![1, 1];
        assert!(count_paths(&q).is_err());
        q.subset = vec![11];
        assert!(count_paths(&q).is_err());
        q.subset = vec![1];
        q.start = 11;
        assert!(count_paths(&q).is_err());
    }

    #[test]
    fn splitting_quantities_obey_their_bounds() {
        let op = TransitionOperator::new(101, 7, Variant::Rho).unwrap();
        let mu = operator_norm_L0(op.graph(), DEFAULT_TOL).unwrap().mu;
        let sets = random_subsets(101, &SubsetSpec::default());
        for (i, s) in sets.iter().enumerate().take(10) {
            let r = 12;
            let q = split_quantities(&op, i, s, r);
            assert!(q.w_norm <= (s.len() as f64).sqrt() + 1e-12);
            assert!(q.u_norm <= 1.0 + 1e-12);
            assert!(q.ar_u_norm <= mu.powi(r as i32) * q.u_norm * (1.0 + 1e-9));
            assert_relative_eq!(
                q.inner_product,
                q.main_term + q.cross_term,
                max_relative = 1e-9
            );
            // Paths from S into the start, summed: same inner product.
            let backwards: f64 = s
                .iter()
                .map(|&v| op.evolve(v as usize, r)[i] * 3f64.powi(r as i32))
                .sum();
            assert_relative_eq!(q.inner_product, backwards, max_relative = 1e-9);
        }
    }

    #[test]
    fn mixing_lemma_holds_at_101() {
        let mu = operator_norm_L0(&RhoGraph::new(101, 7).unwrap(), DEFAULT_TOL)
            .unwrap()
            .mu;
        let report = verify_mixlem(101, 7, mu, &SubsetSpec::default()).unwrap();
        assert_eq!(report.r, mixlem_length(101, 3, mu));
        assert_eq!(report.checks, 101 * 50);
        assert!(report.passed(), "{:?}", report.violations.first());
        assert!(report.check().is_ok());
        assert!(report.min_ratio >= 0.5 && report.max_ratio <= 1.5);
    }

    #[test]
    fn mixing_lemma_detects_too_short_walks() {
        // Pretending mu is tiny makes r far too short for the bound to hold.
        let report = verify_mixlem(101, 7, 0.5, &SubsetSpec::default()).unwrap();
        assert!(!report.passed());
        assert!(matches!(
            report.check(),
            Err(Error::MixingBoundViolated { .. })
        ));
        assert!(verify_mixlem(101, 7, 3.0, &SubsetSpec::default()).is_err());
    }

    #[test]
    fn tv_starts_at_point_mass_distance() {
        let op = TransitionOperator::new(101, 7, Variant::Rho).unwrap();
        let report = tv_mixing_time(&op, 0.25, 0);
        assert_relative_eq!(report.max_tv[0], 1.0 - 1.0 / 101.0, epsilon = 1e-15);
        assert_eq!(report.tau, None);
    }

    #[test]
    fn tv_is_monotone_and_mixes() {
        let op = TransitionOperator::new(101, 7, Variant::Rho).unwrap();
        let report = tv_mixing_time(&op, 0.01, 500);
        let tau = report.tau.expect("rho graph mixes quickly");
        for r in 1..report.max_tv.len() {
            assert!(report.max_tv[r] <= report.max_tv[r - 1] + 1e-12);
            if 2 * r < report.max_tv.len() {
                assert!(report.max_tv[2 * r] <= report.max_tv[r] + 1e-12);
            }
        }
        assert!(report.max_tv[tau] <= 0.01);
        assert!(report.max_tv[tau - 1] > 0.01);
        assert_eq!(report.rows().len(), tau + 1);
    }

    #[test]
    fn cayley_single_start_matches_all_starts() {
        let op = TransitionOperator::new(53, 7, Variant::NoSquaring).unwrap();
        assert!(op.is_vertex_transitive());
        let single = tv_mixing_time(&op, 0.25, 5000);
        for start in [0usize, 5, 52] {
            let p = op.evolve(start, single.tau.unwrap());
            assert_relative_eq!(
                total_variation_to_uniform(&p),
                single.max_tv[single.tau.unwrap()],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn squaring_separates_mixing_times() {
        let sep = mixing_separation(&[101, 211], &[53, 101], 0.25, 3).unwrap();
        assert!(sep.rho_constant.unwrap() <= 1.0);
        let exp = sep.no_squaring_exponent.unwrap();
        assert!(exp >= 1.5, "exponent {exp}");
    }

    #[test]
    fn collision_check_is_reproducible() {
        let a = collision_bound_check(10007, 5, 50).unwrap();
        let b = collision_bound_check(10007, 5, 50).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.t, 100);
        assert_eq!(a.r, 781);
        if a.immediate_collision {
            assert_eq!(a.samples, 0);
        } else {
            assert_eq!(a.set_size, 100);
            assert_eq!(a.hit_indicators.len(), 50);
        }
    }

    #[test]
    fn immediate_collisions_are_reported() {
        // At n = 101, t = 10 iterates collide fairly often.
        let report = collision_bound_experiment(101, 200, 8, 1).unwrap();
        assert!(report.immediate_collisions > 0);
        for run in &report.runs {
            assert_eq!(run.immediate_collision, run.set_size < run.t);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn paths_are_conserved(start in 0u64..53, y in 2u64..53, r in 0usize..60) {
                let q = PathCountQuery { n: 53, y, start, subset: (0..53).collect(), r };
                let c = count_paths(&q).unwrap();
                prop_assert_eq!(c.exact, Some(3u128.pow(r as u32)));
            }

            #[test]
            fn adjacency_contracts_mean_zero_vectors(
                y in 2u64..101,
                raw in proptest::collection::vec(-1.0f64..1.0, 101),
                r in 1usize..8,
            ) {
                let op = TransitionOperator::new(101, y, Variant::Rho).unwrap();
                let mu = operator_norm_L0(op.graph(), DEFAULT_TOL).unwrap().mu;
                let mean = raw.iter().sum::<f64>() / 101.0;
                let u: Vec<f64> = raw.iter().map(|x| x - mean).collect();
                let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let mut au = u.clone();
                for _ in 0..r {
                    au = op.adjacency_apply(&au);
                }
                prop_assert!(norm(&au) <= mu.powi(r as i32) * norm(&u) * (1.0 + 1e-9));
            }
        }
    }
}
