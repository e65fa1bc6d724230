//! The Pollard rho graph and the norm of its adjacency operator on the
//! functions orthogonal to the constants.
//!
//! The graph on `Z/nZ` has edges `x -> x + 1`, `x -> x + y` and `x -> 2x`,
//! which is the rho iteration seen through discrete logs. More generally it
//! may carry any list of additive steps `x -> x + m_i` and multiplicative
//! steps `x -> r_j x`.
//!
//! In the basis of additive characters `chi_k(x) = e^{2 pi i k x / n}` the
//! adjacency operator `(Af)(v) = sum_{v -> w} f(w)` acts as
//!
//! ```text
//! A chi_k = D_k chi_k + sum_j chi_{r_j k},   D_k = sum_i e^{2 pi i k m_i / n},
//! ```
//!
//! so on coefficient vectors it is a diagonal plus a few index permutations
//! and costs `O(n)` to apply. Since `||chi_k||^2 = n` for every `k`, the
//! coefficient map is a scaled isometry and the operator norm on
//! `L_0 = span{chi_k : k != 0}` can be computed entirely in coefficient
//! space. The dense vertex-basis matrix is kept only as a small-`n` oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::Modulus;
use crate::seeding;

/// Largest `n` for which dense `n x n` matrices are built.
pub const DENSE_CEILING: u64 = 4096;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;
/// Gaps below this are indistinguishable from rounding in the norm.
pub const GAP_RESOLUTION: f64 = 1e-9;

/// A directed graph on `Z/nZ` with additive and multiplicative steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoGraph {
    n: Modulus,
    multipliers: Vec<u64>,
    powers: Vec<u64>,
}

impl RhoGraph {
    /// The rho graph: `x -> x + 1`, `x -> x + y`, `x -> 2x`.
    pub fn new(n: u64, y: u64) -> Result<Self> {
        let nm = Modulus::prime(n)?;
        let y = y % n;
        if y == 0 || y == 1 {
            return Err(Error::InvalidParameter(format!(
                "y must not be 0 or 1 modulo n (got {y})"
            )));
        }
        Ok(RhoGraph {
            n: nm,
            multipliers: vec![1, y],
            powers: vec![2],
        })
    }

    /// Edges `x -> x + m` for every multiplier and `x -> r x` for every power.
    pub fn generalized(n: u64, multipliers: &[u64], powers: &[u64]) -> Result<Self> {
        let nm = Modulus::prime(n)?;
        if multipliers.len() + powers.len() == 0 {
            return Err(Error::InvalidParameter(
                "graph needs at least one edge rule".into(),
            ));
        }
        for &r in powers {
            if r < 2 || r % n == 0 {
                return Err(Error::InvalidParameter(format!(
                    "power {r} must exceed 1 and be coprime to {n}"
                )));
            }
        }
        Ok(RhoGraph {
            n: nm,
            multipliers: multipliers.iter().map(|m| m % n).collect(),
            powers: powers.iter().map(|r| r % n).collect(),
        })
    }

    /// The abelian Cayley graph with additive steps only.
    pub fn cayley(n: u64, multipliers: &[u64]) -> Result<Self> {
        RhoGraph::generalized(n, multipliers, &[])
    }

    pub fn n(&self) -> Modulus {
        self.n
    }

    pub fn order(&self) -> usize {
        self.n.get() as usize
    }

    pub fn degree(&self) -> usize {
        self.multipliers.len() + self.powers.len()
    }

    pub fn multipliers(&self) -> &[u64] {
        &self.multipliers
    }

    pub fn powers(&self) -> &[u64] {
        &self.powers
    }

    /// The `y` of a standard rho graph, if this is one.
    pub fn rho_y(&self) -> Option<u64> {
        match (self.multipliers.as_slice(), self.powers.as_slice()) {
            ([1, y], [2]) => Some(*y),
            _ => None,
        }
    }

    /// Out-neighbours of `x`, with multiplicity.
    pub fn successors(&self, x: u64) -> impl Iterator<Item = u64> + '_ {
        let n = self.n;
        self.multipliers
            .iter()
            .map(move |&m| n.add(x, m))
            .chain(self.powers.iter().map(move |&r| n.mul(x, r)))
    }

    /// Precomputed successor table, `degree` entries per vertex.
    pub fn successor_table(&self) -> Vec<u32> {
        let n = self.n.get();
        let mut table = Vec::with_capacity(self.order() * self.degree());
        for x in 0..n {
            table.extend(self.successors(x).map(|w| w as u32));
        }
        table
    }
}

/// Entry `(v, w)` counts the edges `v -> w`.
pub fn build_dense_adjacency(g: &RhoGraph) -> Result<DMatrix<f64>> {
    let n = g.n.get();
    if n > DENSE_CEILING {
        return Err(Error::TooLarge {
            n,
            ceiling: DENSE_CEILING,
        });
    }
    let size = n as usize;
    let mut a = DMatrix::zeros(size, size);
    for v in 0..n {
        for w in g.successors(v) {
            a[(v as usize, w as usize)] += 1.0;
        }
    }
    Ok(a)
}

/// `(Af)(v) = sum over v -> w of f(w)`.
pub fn apply_vertex(g: &RhoGraph, f: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(f.len(), g.order());
    (0..g.n.get())
        .map(|v| g.successors(v).map(|w| f[w as usize]).sum())
        .collect()
}

/// `(A* f)(v) = sum over w -> v of f(w)`.
pub fn apply_vertex_adjoint(g: &RhoGraph, f: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(f.len(), g.order());
    let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
    for w in 0..g.n.get() {
        for v in g.successors(w) {
            out[v as usize] += f[w as usize];
        }
    }
    out
}

#[inline]
fn unit_root(numerator: u64, n: u64) -> Complex64 {
    let theta = std::f64::consts::TAU * (numerator as f64) / (n as f64);
    Complex64::from_polar(1.0, theta)
}

/// The adjacency operator on character coefficients `(c_1, ..., c_{n-1})`,
/// stored at offsets `0..n-1`.
#[derive(Clone, Debug)]
pub struct FourierOperator {
    n: Modulus,
    /// `D_k`, indexed by `k` (entry 0 is the trivial character).
    diag: Vec<Complex64>,
    /// For each power `r`: `k -> r k mod n`.
    forward: Vec<Vec<u32>>,
    /// For each power `r`: `k -> r^{-1} k mod n`.
    backward: Vec<Vec<u32>>,
}

impl FourierOperator {
    pub fn for_graph(g: &RhoGraph) -> Result<Self> {
        let n = g.n;
        let nu = n.get();
        let diag = (0..nu)
            .map(|k| {
                g.multipliers
                    .iter()
                    .map(|&m| unit_root(n.mul(k, m), nu))
                    .sum()
            })
            .collect();
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        for &r in &g.powers {
            let r_inv = n.inv(r)?;
            forward.push((0..nu).map(|k| n.mul(k, r) as u32).collect());
            backward.push((0..nu).map(|k| n.mul(k, r_inv) as u32).collect());
        }
        Ok(FourierOperator {
            n,
            diag,
            forward,
            backward,
        })
    }

    pub fn n(&self) -> Modulus {
        self.n
    }

    /// Dimension of `L_0`, i.e. `n - 1`.
    pub fn dim(&self) -> usize {
        self.n.get() as usize - 1
    }

    /// `D_k`.
    pub fn diag(&self, k: u64) -> Complex64 {
        self.diag[(k % self.n.get()) as usize]
    }

    /// Image of `k` under the first power map (`2k` for the rho graph).
    pub fn index_map(&self, k: u64) -> Option<u64> {
        self.forward
            .first()
            .map(|f| f[(k % self.n.get()) as usize] as u64)
    }

    /// `(Tc)_m = D_m c_m + sum_j c_{r_j^{-1} m}`.
    pub fn apply(&self, c: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
        self.apply_into(c, &mut out);
        out
    }

    pub fn apply_into(&self, c: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(c.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        for (i, o) in out.iter_mut().enumerate() {
            let m = i + 1;
            let mut acc = self.diag[m] * c[i];
            for back in &self.backward {
                acc += c[back[m] as usize - 1];
            }
            *o = acc;
        }
    }

    /// `(T*e)_k = conj(D_k) e_k + sum_j e_{r_j k}`.
    pub fn apply_adjoint(&self, e: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); e.len()];
        self.apply_adjoint_into(e, &mut out);
        out
    }

    pub fn apply_adjoint_into(&self, e: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(e.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        for (i, o) in out.iter_mut().enumerate() {
            let k = i + 1;
            let mut acc = self.diag[k].conj() * e[i];
            for fwd in &self.forward {
                acc += e[fwd[k] as usize - 1];
            }
            *o = acc;
        }
    }

    /// Function on `Z/nZ` with the given character coefficients.
    pub fn synthesize(&self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.n.get();
        (0..n)
            .map(|x| {
                c.iter()
                    .enumerate()
                    .map(|(i, &ck)| ck * unit_root(self.n.mul(i as u64 + 1, x), n))
                    .sum()
            })
            .collect()
    }
}

pub fn build_fourier_operator(n: u64, y: u64) -> Result<FourierOperator> {
    FourierOperator::for_graph(&RhoGraph::new(n, y)?)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

/// Norm of the adjacency operator on `L_0`, with convergence diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: u64,
    /// `y` for a standard rho graph, absent for other edge sets.
    pub y: Option<u64>,
    pub degree: usize,
    pub mu: f64,
    /// `degree - mu`.
    pub gap: f64,
    /// `gap * (ln n)^2`.
    pub fitted_c: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// The CSV layout `n, y, mu, gap, fitted_c, iterations, residual`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub n: u64,
    pub y: Option<u64>,
    pub mu: f64,
    pub gap: f64,
    pub fitted_c: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl From<&SpectralReport> for SpectralRow {
    fn from(r: &SpectralReport) -> Self {
        SpectralRow {
            n: r.n,
            y: r.y,
            mu: r.mu,
            gap: r.gap,
            fitted_c: r.fitted_c,
            iterations: r.iterations,
            residual: r.residual,
        }
    }
}

/// Power-iteration settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerIteration {
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            tol: DEFAULT_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 0x5EED,
        }
    }
}

/// Largest singular value of `T` by power iteration on `T* T`, stopping when
/// the eigen-residual `||T*T v - rho v|| / rho` drops to `tol`.
///
/// Returns the report and the final unit witness `v`, for which
/// `||T v|| = mu` exactly.
pub fn norm_with_witness(
    op: &FourierOperator,
    degree: usize,
    y: Option<u64>,
    cfg: PowerIteration,
) -> Result<(SpectralReport, Vec<Complex64>)> {
    let dim = op.dim();
    let mut rng = seeding::rng_for(cfg.seed, op.n.get());
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let scale = 1.0 / norm(&v);
    v.iter_mut().for_each(|z| *z *= scale);

    let mut tv = vec![Complex64::new(0.0, 0.0); dim];
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        op.apply_into(&v, &mut tv);
        op.apply_adjoint_into(&tv, &mut w);
        let rho = inner(&w, &v).re;
        residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - vi * rho).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / rho;
        if residual <= cfg.tol {
            let mu = norm(&tv);
            let n = op.n.get();
            let gap = degree as f64 - mu;
            let report = SpectralReport {
                n,
                y,
                degree,
                mu,
                gap,
                fitted_c: gap * (n as f64).ln().powi(2),
                iterations: it,
                residual,
            };
            return Ok((report, v));
        }
        let wn = norm(&w);
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / wn);
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iterations,
        residual,
    })
}

pub fn graph_norm(g: &RhoGraph, cfg: PowerIteration) -> Result<(SpectralReport, Vec<Complex64>)> {
    let op = FourierOperator::for_graph(g)?;
    norm_with_witness(&op, g.degree(), g.rho_y(), cfg)
}

#[allow(non_snake_case)]
pub fn operator_norm_L0(g: &RhoGraph, tol: f64) -> Result<SpectralReport> {
    let cfg = PowerIteration {
        tol,
        ..PowerIteration::default()
    };
    graph_norm(g, cfg).map(|(r, _)| r)
}

pub fn generalized_operator(n: u64, multipliers: &[u64], powers: &[u64]) -> Result<SpectralReport> {
    let g = RhoGraph::generalized(n, multipliers, powers)?;
    operator_norm_L0(&g, DEFAULT_TOL)
}

/// Largest singular value of `A P`, with `P` the projection onto `L_0`,
/// computed from a dense SVD in the vertex basis.
pub fn dense_norm_l0(g: &RhoGraph) -> Result<f64> {
    let a = build_dense_adjacency(g)?;
    let size = g.order();
    let p = DMatrix::<f64>::identity(size, size)
        - DMatrix::<f64>::from_element(size, size, 1.0 / size as f64);
    let sv = (a * p).singular_values();
    Ok(sv.iter().copied().fold(0.0, f64::max))
}

/// `max_{k != 0} |sum_i e^{2 pi i k m_i / n}|`, the norm on `L_0` of an
/// abelian Cayley graph, whose characters are eigenvectors.
pub fn cayley_norm_closed_form(n: u64, multipliers: &[u64]) -> Result<f64> {
    let m = Modulus::prime(n)?;
    Ok((1..n)
        .map(|k| {
            multipliers
                .iter()
                .map(|&s| unit_root(m.mul(k, s), n))
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    pub rows: Vec<SpectralReport>,
    /// Minimum of `gap * (ln n)^2` across the rows.
    pub min_fitted_c: f64,
}

/// Norm reports for the rho graph with fixed `y` across `primes`.
pub fn gap_scaling_fit(y: u64, primes: &[u64]) -> Result<GapScan> {
    let rows = primes
        .par_iter()
        .map(|&n| operator_norm_L0(&RhoGraph::new(n, y)?, DEFAULT_TOL))
        .collect::<Result<Vec<_>>>()?;
    Ok(GapScan {
        min_fitted_c: rows
            .iter()
            .map(|r| r.fitted_c)
            .fold(f64::INFINITY, f64::min),
        rows,
    })
}

/// Norm reports for `samples` seeded random `y` per prime.
pub fn gap_sweep(primes: &[u64], samples: usize, seed: u64) -> Result<GapScan> {
    let jobs: Vec<(u64, u64)> = primes
        .iter()
        .flat_map(|&n| {
            let mut rng = seeding::rng_for(seed, n);
            (0..samples)
                .map(move |_| (n, rng.gen_range(2..n)))
                .collect::<Vec<_>>()
        })
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, y)| operator_norm_L0(&RhoGraph::new(n, y)?, DEFAULT_TOL))
        .collect::<Result<Vec<_>>>()?;
    Ok(GapScan {
        min_fitted_c: rows
            .iter()
            .map(|r| r.fitted_c)
            .fold(f64::INFINITY, f64::min),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn random_vec(rng: &mut seeding::Rng, len: usize) -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn graph_validation() {
        assert!(RhoGraph::new(101, 1).is_err());
        assert!(RhoGraph::new(101, 0).is_err());
        assert!(RhoGraph::new(101, 102).is_err());
        assert!(RhoGraph::new(100, 7).is_err());
        assert!(RhoGraph::generalized(101, &[1], &[101]).is_err());
        assert!(RhoGraph::generalized(101, &[1], &[1]).is_err());
        assert_eq!(RhoGraph::new(101, 7).unwrap().rho_y(), Some(7));
    }

    #[test]
    fn dense_adjacency_small_example() {
        let g = RhoGraph::new(5, 3).unwrap();
        let a = build_dense_adjacency(&g).unwrap();
        // 1 -> 2 (by +1 and by doubling), 1 -> 4 (by +3).
        assert_eq!(a[(1, 2)], 2.0);
        assert_eq!(a[(1, 4)], 1.0);
        for i in 0..5 {
            assert_eq!(a.row(i).sum(), 3.0);
            assert_eq!(a.column(i).sum(), 3.0);
        }
        let ones = nalgebra::DVector::from_element(5, 1.0);
        assert_eq!(&a * &ones, ones * 3.0);
    }

    #[test]
    fn dense_ceiling_is_enforced() {
        let g = RhoGraph::new(4099, 7).unwrap();
        assert!(matches!(
            build_dense_adjacency(&g),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn diagonal_magnitudes_follow_cosine_law() {
        let n = 101u64;
        for y in [2u64, 7, 50, 100] {
            let op = build_fourier_operator(n, y).unwrap();
            for k in 1..n {
                let expected = 2.0
                    * (std::f64::consts::PI * (k * (y - 1)) as f64 / n as f64)
                        .cos()
                        .abs();
                assert_relative_eq!(op.diag(k).norm(), expected, epsilon = 1e-12);
                assert!(op.diag(k).norm() < 2.0);
            }
        }
    }

    #[test]
    fn basis_vector_maps_to_diagonal_plus_doubled_index() {
        let op = build_fourier_operator(101, 7).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        for k in [1u64, 17, 50, 51, 100] {
            let mut e = vec![zero; 100];
            e[k as usize - 1] = Complex64::new(1.0, 0.0);
            let out = op.apply(&e);
            let doubled = (2 * k) % 101;
            assert_eq!(op.index_map(k), Some(doubled));
            for (i, z) in out.iter().enumerate() {
                let m = i as u64 + 1;
                let expected = if m == k { op.diag(k) } else { zero }
                    + if m == doubled {
                        Complex64::new(1.0, 0.0)
                    } else {
                        zero
                    };
                assert!((z - expected).norm() < 1e-14, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn index_map_is_a_permutation() {
        let op = build_fourier_operator(499, 3).unwrap();
        let mut seen = vec![false; 499];
        for k in 1..499 {
            let j = op.index_map(k).unwrap();
            assert!(j != 0 && !seen[j as usize]);
            seen[j as usize] = true;
        }
    }

    #[test]
    fn fourier_action_matches_vertex_action() {
        let g = RhoGraph::new(61, 9).unwrap();
        let op = FourierOperator::for_graph(&g).unwrap();
        let mut rng = seeding::rng_from_seed(4);
        let c = random_vec(&mut rng, 60);
        let lhs = apply_vertex(&g, &op.synthesize(&c));
        let rhs = op.synthesize(&op.apply(&c));
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn adjoints_are_adjoint() {
        let g = RhoGraph::new(101, 7).unwrap();
        let op = FourierOperator::for_graph(&g).unwrap();
        let mut rng = seeding::rng_from_seed(11);
        for _ in 0..100 {
            let u = random_vec(&mut rng, 100);
            let v = random_vec(&mut rng, 100);
            let lhs = inner(&op.apply(&u), &v);
            let rhs = inner(&u, &op.apply_adjoint(&v));
            assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));

            let fu = random_vec(&mut rng, 101);
            let fv = random_vec(&mut rng, 101);
            let lhs = inner(&apply_vertex(&g, &fu), &fv);
            let rhs = inner(&fu, &apply_vertex_adjoint(&g, &fv));
            assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn orthogonal_complement_is_invariant() {
        let g = RhoGraph::new(101, 7).unwrap();
        let mut rng = seeding::rng_from_seed(12);
        for _ in 0..20 {
            let mut f = random_vec(&mut rng, 101);
            let mean: Complex64 = f.iter().sum::<Complex64>() / 101.0;
            f.iter_mut().for_each(|z| *z -= mean);
            let af = apply_vertex(&g, &f);
            assert!(af.iter().sum::<Complex64>().norm() < 1e-10);
        }
    }

    #[test]
    fn character_expansion_scales_norm_by_n() {
        let op = build_fourier_operator(53, 5).unwrap();
        let mut rng = seeding::rng_from_seed(13);
        for _ in 0..10 {
            let c = random_vec(&mut rng, 52);
            let f = op.synthesize(&c);
            assert_relative_eq!(
                norm(&f).powi(2),
                53.0 * norm(&c).powi(2),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn fourier_norm_matches_dense_oracle() {
        for (n, y) in [(101u64, 7u64), (101, 50), (53, 2), (211, 100)] {
            let g = RhoGraph::new(n, y).unwrap();
            let report = operator_norm_L0(&g, DEFAULT_TOL).unwrap();
            let dense = dense_norm_l0(&g).unwrap();
            assert!(
                (report.mu - dense).abs() < 1e-8,
                "n={n} y={y}: {} vs {dense}",
                report.mu
            );
            assert!(report.mu < 3.0);
            assert!(report.residual <= DEFAULT_TOL);
        }
    }

    #[test]
    fn witness_certifies_lower_bound() {
        let g = RhoGraph::new(499, 123).unwrap();
        let (report, v) = graph_norm(&g, PowerIteration::default()).unwrap();
        let op = FourierOperator::for_graph(&g).unwrap();
        let ratio = norm(&op.apply(&v)) / norm(&v);
        assert!(ratio >= report.mu - DEFAULT_TOL);

        // Same check in the vertex basis, where v becomes a function orthogonal to 1.
        let small = RhoGraph::new(61, 4).unwrap();
        let (rep, w) = graph_norm(&small, PowerIteration::default()).unwrap();
        let sop = FourierOperator::for_graph(&small).unwrap();
        let f = sop.synthesize(&w);
        assert!(f.iter().sum::<Complex64>().norm() < 1e-9);
        let ratio = norm(&apply_vertex(&small, &f)) / norm(&f);
        assert!(ratio >= rep.mu - 1e-9);
    }

    #[test]
    fn specialization_reproduces_rho_graph() {
        let a = operator_norm_L0(&RhoGraph::new(101, 7).unwrap(), DEFAULT_TOL).unwrap();
        let b = generalized_operator(101, &[1, 7], &[2]).unwrap();
        assert_relative_eq!(a.mu, b.mu, epsilon = 1e-12);
    }

    #[test]
    fn cubing_and_extra_multipliers_stay_below_degree() {
        for (mults, powers) in [(vec![1u64, 7], vec![3u64]), (vec![1, 7, 30], vec![2])] {
            let g = RhoGraph::generalized(101, &mults, &powers).unwrap();
            let r = operator_norm_L0(&g, DEFAULT_TOL).unwrap();
            let dense = dense_norm_l0(&g).unwrap();
            assert!((r.mu - dense).abs() < 1e-8);
            assert!(r.mu < g.degree() as f64);
        }
    }

    #[test]
    fn cayley_variant_matches_closed_form() {
        let (n, y) = (101u64, 7u64);
        let mults = [1, y, (y * y) % n];
        let g = RhoGraph::cayley(n, &mults).unwrap();
        let r = operator_norm_L0(&g, DEFAULT_TOL).unwrap();
        let closed = cayley_norm_closed_form(n, &mults).unwrap();
        assert!((r.mu - closed).abs() < 1e-8, "{} vs {closed}", r.mu);
        assert!((dense_norm_l0(&g).unwrap() - closed).abs() < 1e-8);
    }

    #[test]
    fn gap_scan_rows_are_positive() {
        let scan = gap_scaling_fit(7, &[101, 211, 499]).unwrap();
        assert_eq!(scan.rows.len(), 3);
        assert!(scan.rows.iter().all(|r| r.gap > 0.0));
        assert!(scan.min_fitted_c > 0.0);
        assert!(gap_scaling_fit(1, &[101]).is_err());
    }
}
