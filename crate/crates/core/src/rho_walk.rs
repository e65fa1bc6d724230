//! The Pollard rho iteration for discrete logarithms.
//!
//! A walk state carries the current group element `x` together with the
//! exponents `(a, b)` such that `x = h^a * g^b`. Each step multiplies by `g`,
//! multiplies by `h`, or squares, according to which of the three sets
//! `S1`, `S2`, `S3` the current element falls into. Two states with equal
//! elements give the congruence `a_k y + b_k = a_l y + b_l (mod n)`.
//!
//! Groups come in two representations: the exponent model, where the element
//! *is* its discrete log (so `g = 1`, `h = y` and the walk lives directly on
//! `Z/nZ`), and the order-`n` subgroup of `(Z/pZ)^*` for a prime `p = 2kn + 1`.

use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{mod_inv, Modulus, Residue};
use crate::seeding::{self, splitmix64, Rng};
use crate::stats::Summary;

/// Number of fresh random starts tried after a degenerate collision.
pub const MAX_RESTARTS: u32 = 20;

pub const DEFAULT_BUDGET_MULTIPLIER: f64 = 50.0;

/// Step budget `50 * sqrt(n) * (ln n)^3`.
pub fn default_budget(n: u64) -> u64 {
    budget_with(n, DEFAULT_BUDGET_MULTIPLIER)
}

/// Step budget `multiplier * sqrt(n) * (ln n)^3`, at least 1.
pub fn budget_with(n: u64, multiplier: f64) -> u64 {
    let nf = n as f64;
    ((multiplier * nf.sqrt() * nf.ln().powi(3)).ceil() as u64).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subset {
    S1,
    S2,
    S3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionRule {
    /// Keyed pseudorandom map, i.i.d. uniform over the three sets.
    Keyed,
    /// Everything in one set. Only useful for hand-checkable walks.
    Constant(Subset),
}

/// Assignment of every group element to exactly one of `S1`, `S2`, `S3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionAssignment {
    pub seed: u64,
    pub rule: PartitionRule,
}

impl PartitionAssignment {
    pub fn constant(subset: Subset) -> Self {
        PartitionAssignment {
            seed: 0,
            rule: PartitionRule::Constant(subset),
        }
    }

    #[inline]
    pub fn classify(&self, x: u64) -> Subset {
        match self.rule {
            PartitionRule::Constant(s) => s,
            PartitionRule::Keyed => {
                let z = splitmix64(self.seed ^ splitmix64(x));
                // Lemire's multiply-shift keeps the bias below 2^-62.
                match ((z as u128 * 3) >> 64) as u8 {
                    0 => Subset::S1,
                    1 => Subset::S2,
                    _ => Subset::S3,
                }
            }
        }
    }
}

pub fn make_partition(seed: u64) -> PartitionAssignment {
    PartitionAssignment {
        seed,
        rule: PartitionRule::Keyed,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// Elements are exponents; `g = 1` and `h = y`.
    Exponent { y: u64 },
    /// Order-`n` subgroup of `(Z/pZ)^*` generated by `g`, with target `h`.
    Multiplicative { p: Modulus, g: u64, h: u64 },
}

/// A cyclic group of prime order `n` with a dlog instance `h = g^y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub n: Modulus,
    pub repr: Representation,
}

impl GroupSpec {
    pub fn exponent_model(n: u64, y: u64) -> Result<Self> {
        let n = Modulus::prime(n)?;
        Ok(GroupSpec {
            n,
            repr: Representation::Exponent { y: y % n.get() },
        })
    }

    /// Plants `y` in the order-`n` subgroup of `(Z/pZ)^*`, with `p` the
    /// smallest prime of the form `2kn + 1`.
    pub fn multiplicative(n: u64, y: u64) -> Result<Self> {
        Modulus::prime(n)?;
        let mut k = 1u64;
        let p = loop {
            let candidate = (2 * k as u128) * n as u128 + 1;
            if candidate > u64::MAX as u128 {
                return Err(Error::InvalidParameter(format!(
                    "no prime p = 2kn + 1 below 2^64 for n = {n}"
                )));
            }
            if crate::modular::is_prime(candidate as u64) {
                break candidate as u64;
            }
            k += 1;
        };
        let pm = Modulus::new(p)?;
        let cofactor = (p - 1) / n;
        let g = (2..p)
            .map(|base| pm.pow(base, cofactor))
            .find(|&g| g != 1)
            .expect("a subgroup of prime order n exists since n | p - 1");
        let h = pm.pow(g, y % n);
        GroupSpec::multiplicative_with(n, p, g, h)
    }

    /// Uses a caller-supplied `(p, g, h)`; `g` must have exact order `n` and
    /// `h` must lie in `<g>`.
    pub fn multiplicative_with(n: u64, p: u64, g: u64, h: u64) -> Result<Self> {
        let nm = Modulus::prime(n)?;
        let pm = Modulus::prime(p)?;
        if !(p - 1).is_multiple_of(n) {
            return Err(Error::InvalidParameter(format!(
                "{n} does not divide {p} - 1"
            )));
        }
        let (g, h) = (g % p, h % p);
        if g == 1 || g == 0 || pm.pow(g, n) != 1 {
            return Err(Error::InvalidParameter(format!(
                "g = {g} does not have order {n}"
            )));
        }
        if h == 0 || pm.pow(h, n) != 1 {
            return Err(Error::InvalidParameter(format!("h = {h} is not in <g>")));
        }
        Ok(GroupSpec {
            n: nm,
            repr: Representation::Multiplicative { p: pm, g, h },
        })
    }

    pub fn order(&self) -> Modulus {
        self.n
    }

    #[inline]
    pub fn mul_g(&self, x: u64) -> u64 {
        match self.repr {
            Representation::Exponent { .. } => self.n.add(x, 1),
            Representation::Multiplicative { p, g, .. } => p.mul(x, g),
        }
    }

    #[inline]
    pub fn mul_h(&self, x: u64) -> u64 {
        match self.repr {
            Representation::Exponent { y } => self.n.add(x, y),
            Representation::Multiplicative { p, h, .. } => p.mul(x, h),
        }
    }

    #[inline]
    pub fn square(&self, x: u64) -> u64 {
        match self.repr {
            Representation::Exponent { .. } => self.n.add(x, x),
            Representation::Multiplicative { p, .. } => p.mul(x, x),
        }
    }

    /// The element `h^a * g^b`.
    pub fn compose(&self, a: u64, b: u64) -> u64 {
        match self.repr {
            Representation::Exponent { y } => self.n.add(self.n.mul(a, y), b),
            Representation::Multiplicative { p, g, h } => p.mul(p.pow(h, a), p.pow(g, b)),
        }
    }

    /// Whether `g^y = h`.
    pub fn is_log(&self, y: u64) -> bool {
        self.compose(0, y) == self.compose(1, 0)
    }
}

/// A walk position `x = h^a * g^b` after `step` iterations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkState {
    pub x: u64,
    pub a: Residue,
    pub b: Residue,
    pub step: u64,
}

impl WalkState {
    pub fn from_exponents(grp: &GroupSpec, a: u64, b: u64) -> WalkState {
        let n = grp.n;
        WalkState {
            x: grp.compose(a, b),
            a: n.residue(a),
            b: n.residue(b),
            step: 0,
        }
    }

    /// `x_0 = h`.
    pub fn at_target(grp: &GroupSpec) -> WalkState {
        WalkState::from_exponents(grp, 1, 0)
    }

    /// `x_0 = g^r1 * h^r2` for uniformly random `r1, r2`.
    pub fn random(grp: &GroupSpec, rng: &mut Rng) -> WalkState {
        let n = grp.n.get();
        let r1 = rng.gen_range(0..n);
        let r2 = rng.gen_range(0..n);
        WalkState::from_exponents(grp, r2, r1)
    }

    /// Whether the stored element matches the one rebuilt from the exponents.
    pub fn is_consistent(&self, grp: &GroupSpec) -> bool {
        grp.compose(self.a.value(), self.b.value()) == self.x
    }
}

#[inline]
pub fn step(state: &WalkState, part: &PartitionAssignment, grp: &GroupSpec) -> WalkState {
    let n = grp.n;
    let (x, a, b) = match part.classify(state.x) {
        Subset::S1 => (
            grp.mul_g(state.x),
            state.a.value(),
            n.add(state.b.value(), 1),
        ),
        Subset::S2 => (
            grp.mul_h(state.x),
            n.add(state.a.value(), 1),
            state.b.value(),
        ),
        Subset::S3 => (
            grp.square(state.x),
            n.add(state.a.value(), state.a.value()),
            n.add(state.b.value(), state.b.value()),
        ),
    };
    WalkState {
        x,
        a: n.residue(a),
        b: n.residue(b),
        step: state.step + 1,
    }
}

/// Iterates `step` from `start`, yielding `x_0, x_1, ...` lazily.
pub fn trajectory<'a>(
    grp: &'a GroupSpec,
    part: &'a PartitionAssignment,
    start: WalkState,
) -> impl Iterator<Item = WalkState> + 'a {
    std::iter::successors(Some(start), move |s| Some(step(s, part, grp)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionMode {
    Floyd,
    FullHistory,
}

/// Two walk positions `index_k < index_l` holding the same element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionRecord {
    pub index_k: u64,
    pub index_l: u64,
    pub x: u64,
    pub a_k: u64,
    pub b_k: u64,
    pub a_l: u64,
    pub b_l: u64,
    pub mode: DetectionMode,
}

impl CollisionRecord {
    fn new(k: &WalkState, l: &WalkState, mode: DetectionMode) -> Self {
        debug_assert_eq!(k.x, l.x);
        CollisionRecord {
            index_k: k.step,
            index_l: l.step,
            x: k.x,
            a_k: k.a.value(),
            b_k: k.b.value(),
            a_l: l.a.value(),
            b_l: l.b.value(),
            mode,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a_k == self.a_l
    }
}

/// Floyd's tortoise-and-hare: the first `k <= max_steps` with `x_k = x_{2k}`.
pub fn floyd_collide(
    grp: &GroupSpec,
    part: &PartitionAssignment,
    start: WalkState,
    max_steps: u64,
) -> Result<CollisionRecord> {
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be positive".into()));
    }
    let start = WalkState { step: 0, ..start };
    let mut tortoise = start;
    let mut hare = start;
    for _ in 0..max_steps {
        tortoise = step(&tortoise, part, grp);
        hare = step(&step(&hare, part, grp), part, grp);
        if tortoise.x == hare.x {
            return Ok(CollisionRecord::new(&tortoise, &hare, DetectionMode::Floyd));
        }
    }
    Err(Error::NoCollision { budget: max_steps })
}

/// The first self-intersection: least `t` with `x_t` in `{x_0, ..., x_{t-1}}`,
/// paired with the earlier visit.
pub fn first_collision(
    grp: &GroupSpec,
    part: &PartitionAssignment,
    start: WalkState,
    max_steps: u64,
) -> Result<CollisionRecord> {
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be positive".into()));
    }
    let mut seen: HashMap<u64, WalkState> = HashMap::new();
    for state in trajectory(grp, part, WalkState { step: 0, ..start }) {
        if let Some(earlier) = seen.get(&state.x) {
            return Ok(CollisionRecord::new(
                earlier,
                &state,
                DetectionMode::FullHistory,
            ));
        }
        if state.step >= max_steps {
            break;
        }
        seen.insert(state.x, state);
    }
    Err(Error::NoCollision { budget: max_steps })
}

pub fn first_collision_time(
    grp: &GroupSpec,
    part: &PartitionAssignment,
    start: WalkState,
    max_steps: u64,
) -> Result<u64> {
    first_collision(grp, part, start, max_steps).map(|rec| rec.index_l)
}

/// `y = (b_l - b_k) / (a_k - a_l) mod n`.
pub fn solve_dlog(rec: &CollisionRecord, n: Modulus) -> Result<Residue> {
    let denom = n.residue(n.sub(rec.a_k, rec.a_l));
    if denom.is_zero() {
        return Err(Error::DegenerateCollision);
    }
    let inv = mod_inv(denom)?;
    let num = n.sub(rec.b_l, rec.b_k);
    Ok(n.residue(n.mul(num, inv.value())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartMode {
    Random,
    Target,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlogSolution {
    pub y: u64,
    pub restarts: u32,
    /// Floyd index of the first attempt.
    pub first_floyd_k: u64,
    pub record: CollisionRecord,
    /// Group operations over all attempts, counting the hare's two per index.
    pub steps: u64,
}

/// Floyd plus solve, restarting from a fresh `g^r1 h^r2` whenever the
/// collision is degenerate, at most [`MAX_RESTARTS`] times.
pub fn solve_with_restarts(
    grp: &GroupSpec,
    part: &PartitionAssignment,
    start_mode: StartMode,
    rng: &mut Rng,
    budget: u64,
) -> Result<DlogSolution> {
    let mut first_floyd_k = None;
    let mut steps = 0;
    for attempt in 0..=MAX_RESTARTS {
        let start = match (attempt, start_mode) {
            (0, StartMode::Target) => WalkState::at_target(grp),
            _ => WalkState::random(grp, rng),
        };
        let rec = floyd_collide(grp, part, start, budget)?;
        first_floyd_k.get_or_insert(rec.index_k);
        steps += 3 * rec.index_k;
        match solve_dlog(&rec, grp.n) {
            Ok(y) => {
                return Ok(DlogSolution {
                    y: y.value(),
                    restarts: attempt,
                    first_floyd_k: first_floyd_k.unwrap_or(rec.index_k),
                    record: rec,
                    steps,
                })
            }
            Err(Error::DegenerateCollision) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RestartsExhausted {
        restarts: MAX_RESTARTS,
    })
}

/// One CSV row of the collision-time experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub seed: u64,
    pub n: u64,
    pub t_first_collision: u64,
    pub floyd_k: u64,
    pub degenerate_restarts: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionSummary {
    pub n: u64,
    pub trials: usize,
    pub seed: u64,
    pub budget: u64,
    pub t_first_collision: Summary,
    /// `t / sqrt(n)`.
    pub normalized: Summary,
    pub floyd_k: Summary,
    pub total_degenerate_restarts: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionExperiment {
    pub rows: Vec<TrialRow>,
    pub summary: CollisionSummary,
}

/// Runs one trial: fresh planted `y`, partition and random start, all drawn
/// from `seed`.
pub fn collision_trial(n: Modulus, trial: u64, seed: u64, budget: u64) -> Result<TrialRow> {
    let mut rng = seeding::rng_from_seed(seed);
    let y = rng.gen_range(2..n.get());
    let grp = GroupSpec {
        n,
        repr: Representation::Exponent { y },
    };
    let part = make_partition(rand::RngCore::next_u64(&mut rng));
    let start = WalkState::random(&grp, &mut rng);
    let t = first_collision_time(&grp, &part, start, budget)?;
    let sol = solve_with_restarts(&grp, &part, StartMode::Random, &mut rng, budget)?;
    debug_assert!(grp.is_log(sol.y));
    Ok(TrialRow {
        trial,
        seed,
        n: n.get(),
        t_first_collision: t,
        floyd_k: sol.first_floyd_k,
        degenerate_restarts: sol.restarts,
    })
}

/// Independent trials in parallel; trial `i` uses seed `derive_seed(seed, i)`.
pub fn collision_experiment(n: u64, trials: usize, seed: u64) -> Result<CollisionExperiment> {
    collision_experiment_with_budget(n, trials, seed, default_budget(n))
}

pub fn collision_experiment_with_budget(
    n: u64,
    trials: usize,
    seed: u64,
    budget: u64,
) -> Result<CollisionExperiment> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let nm = Modulus::prime(n)?;
    let rows = (0..trials as u64)
        .into_par_iter()
        .map(|i| collision_trial(nm, i, seeding::derive_seed(seed, i), budget))
        .collect::<Result<Vec<_>>>()?;

    let times: Vec<f64> = rows.iter().map(|r| r.t_first_collision as f64).collect();
    let sqrt_n = (n as f64).sqrt();
    let normalized: Vec<f64> = times.iter().map(|t| t / sqrt_n).collect();
    let floyd: Vec<f64> = rows.iter().map(|r| r.floyd_k as f64).collect();
    let summary = CollisionSummary {
        n,
        trials,
        seed,
        budget,
        t_first_collision: Summary::of(&times),
        normalized: Summary::of(&normalized),
        floyd_k: Summary::of(&floyd),
        total_degenerate_restarts: rows.iter().map(|r| r.degenerate_restarts as u64).sum(),
    };
    Ok(CollisionExperiment { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;

    fn all_s3() -> PartitionAssignment {
        PartitionAssignment::constant(Subset::S3)
    }

    #[test]
    fn partition_is_deterministic() {
        let p = make_partition(0xC0FFEE);
        let first = p.classify(7);
        for _ in 0..10 {
            assert_eq!(make_partition(0xC0FFEE).classify(7), first);
        }
    }

    #[test]
    fn partition_shares_are_balanced() {
        let p = make_partition(12345);
        let mut counts = [0usize; 3];
        for x in 0..100_000u64 {
            counts[p.classify(x) as usize] += 1;
        }
        for c in counts {
            let share = c as f64 / 100_000.0;
            assert!((share - 1.0 / 3.0).abs() <= 0.01, "share {share}");
        }
    }

    #[test]
    fn distinct_seeds_disagree_on_most_elements() {
        let (p, q) = (make_partition(1), make_partition(2));
        let differ = (0..10_000u64)
            .filter(|&x| p.classify(x) != q.classify(x))
            .count();
        assert!(differ >= 5_000, "only {differ} differ");
    }

    #[test]
    fn squaring_step_doubles_the_exponent() {
        let grp = GroupSpec::exponent_model(11, 6).unwrap();
        let s = WalkState::from_exponents(&grp, 0, 3);
        assert_eq!(s.x, 3);
        let next = step(&s, &all_s3(), &grp);
        assert_eq!(next.x, 6);
        assert_eq!((next.a.value(), next.b.value()), (0, 6));
    }

    #[test]
    fn multiply_steps_track_exponents() {
        let grp = GroupSpec::exponent_model(11, 6).unwrap();
        let s = WalkState::from_exponents(&grp, 2, 3);
        let g_step = step(&s, &PartitionAssignment::constant(Subset::S1), &grp);
        assert_eq!(g_step.x, grp.n.add(s.x, 1));
        assert_eq!((g_step.a.value(), g_step.b.value()), (2, 4));
        let h_step = step(&s, &PartitionAssignment::constant(Subset::S2), &grp);
        assert_eq!(h_step.x, grp.n.add(s.x, 6));
        assert_eq!((h_step.a.value(), h_step.b.value()), (3, 3));
        assert_eq!(h_step.step, 1);
    }

    #[test]
    fn exponent_invariant_survives_replay() {
        let mut rng = rng_from_seed(9);
        for grp in [
            GroupSpec::exponent_model(1009, 123).unwrap(),
            GroupSpec::multiplicative(1009, 123).unwrap(),
        ] {
            let part = make_partition(77);
            let start = WalkState::random(&grp, &mut rng);
            for s in trajectory(&grp, &part, start).take(21) {
                assert!(s.is_consistent(&grp), "step {}", s.step);
            }
        }
    }

    #[test]
    fn floyd_on_doubling_mod_five() {
        // 1, 2, 4, 3, 1, ... has period 4 and no tail.
        let grp = GroupSpec::exponent_model(5, 2).unwrap();
        let start = WalkState::from_exponents(&grp, 0, 1);
        let rec = floyd_collide(&grp, &all_s3(), start, 100).unwrap();
        assert_eq!((rec.index_k, rec.index_l), (4, 8));
        assert_eq!(rec.x, 1);
    }

    #[test]
    fn floyd_at_fixed_point_stops_immediately() {
        // 0 doubles to 0.
        let grp = GroupSpec::exponent_model(101, 5).unwrap();
        let start = WalkState::from_exponents(&grp, 0, 0);
        let rec = floyd_collide(&grp, &all_s3(), start, 10).unwrap();
        assert_eq!(rec.index_k, 1);
    }

    #[test]
    fn floyd_respects_budget() {
        let grp = GroupSpec::exponent_model(1009, 5).unwrap();
        let start = WalkState::from_exponents(&grp, 0, 1);
        // Pure doubling from 1 has period ord(2) = 504 mod 1009.
        assert_eq!(
            floyd_collide(&grp, &all_s3(), start, 3),
            Err(Error::NoCollision { budget: 3 })
        );
        assert!(floyd_collide(&grp, &all_s3(), start, 0).is_err());
    }

    #[test]
    fn floyd_finds_collision_on_planted_instance() {
        let grp = GroupSpec::exponent_model(1009, 123).unwrap();
        let part = make_partition(3);
        let mut rng = rng_from_seed(3);
        let rec = floyd_collide(&grp, &part, WalkState::random(&grp, &mut rng), 10_000).unwrap();
        assert_eq!(rec.index_l, 2 * rec.index_k);
        assert_eq!(grp.compose(rec.a_k, rec.b_k), grp.compose(rec.a_l, rec.b_l));
    }

    #[test]
    fn first_collision_examples() {
        let grp = GroupSpec::exponent_model(5, 2).unwrap();
        let start = WalkState::from_exponents(&grp, 0, 1);
        assert_eq!(
            first_collision_time(&grp, &all_s3(), start, 100).unwrap(),
            4
        );

        let grp3 = GroupSpec::exponent_model(3, 2).unwrap();
        for seed in 0..50 {
            let part = make_partition(seed);
            for x0 in 0..3 {
                let t =
                    first_collision_time(&grp3, &part, WalkState::from_exponents(&grp3, 0, x0), 10)
                        .unwrap();
                assert!((1..=3).contains(&t));
            }
        }
    }

    #[test]
    fn floyd_element_was_visited_before_its_hare_index() {
        let grp = GroupSpec::exponent_model(10007, 4321).unwrap();
        let mut rng = rng_from_seed(5);
        for seed in 0..20 {
            let part = make_partition(seed);
            let start = WalkState::random(&grp, &mut rng);
            let floyd = floyd_collide(&grp, &part, start, 1_000_000).unwrap();
            let full = first_collision(&grp, &part, start, 1_000_000).unwrap();
            // The walk is periodic from its first repeat on, so the Floyd
            // meeting point lies on the cycle that starts at full.index_k.
            assert!(full.index_l <= floyd.index_l);
            assert!(floyd.index_k >= full.index_k);
            let cycle = full.index_l - full.index_k;
            assert_eq!(floyd.index_k % cycle, 0);
        }
    }

    #[test]
    fn solve_examples() {
        let n = Modulus::prime(11).unwrap();
        let rec = CollisionRecord {
            index_k: 1,
            index_l: 2,
            x: 0,
            a_k: 3,
            b_k: 5,
            a_l: 10,
            b_l: 7,
            mode: DetectionMode::Floyd,
        };
        assert_eq!(solve_dlog(&rec, n).unwrap().value(), 6);
        let degenerate = CollisionRecord {
            a_l: 3,
            b_l: 5,
            ..rec
        };
        assert_eq!(solve_dlog(&degenerate, n), Err(Error::DegenerateCollision));
    }

    #[test]
    fn end_to_end_planted_instances() {
        let budget = default_budget(1009);
        for grp in [
            GroupSpec::exponent_model(1009, 123).unwrap(),
            GroupSpec::multiplicative(1009, 123).unwrap(),
        ] {
            let mut rng = rng_from_seed(1);
            let sol = solve_with_restarts(
                &grp,
                &make_partition(1),
                StartMode::Random,
                &mut rng,
                budget,
            )
            .unwrap();
            assert_eq!(sol.y, 123);
            assert!(grp.is_log(sol.y));
        }
    }

    #[test]
    fn multiplicative_group_shape() {
        let grp = GroupSpec::multiplicative(1009, 5).unwrap();
        let Representation::Multiplicative { p, g, h } = grp.repr else {
            panic!("expected multiplicative representation");
        };
        assert_eq!((p.get() - 1) % 1009, 0);
        assert_ne!(g, 1);
        assert_eq!(p.pow(g, 1009), 1);
        assert_eq!(p.pow(g, 5), h);
        assert!(GroupSpec::multiplicative_with(1009, p.get(), 1, h).is_err());
        assert!(GroupSpec::multiplicative(1001, 5).is_err());
    }

    #[test]
    fn transcripts_are_deterministic() {
        let grp = GroupSpec::exponent_model(10007, 99).unwrap();
        let run = || {
            let mut rng = rng_from_seed(42);
            let start = WalkState::random(&grp, &mut rng);
            trajectory(&grp, &make_partition(42), start)
                .take(200)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn experiment_is_reproducible() {
        let a = collision_experiment(10007, 1, 17).unwrap();
        let b = collision_experiment(10007, 1, 17).unwrap();
        assert_eq!(a, b);
        assert!(collision_experiment(10007, 0, 17).is_err());
        assert!(collision_experiment(10001, 3, 17).is_err());
    }

    #[test]
    fn median_collision_time_is_order_sqrt_n() {
        let exp = collision_experiment(10007, 200, 2024).unwrap();
        let sqrt_n = 10007f64.sqrt();
        let median = exp.summary.t_first_collision.median;
        assert!(
            median >= sqrt_n && median <= 6.0 * sqrt_n,
            "median {median}"
        );
    }
}
