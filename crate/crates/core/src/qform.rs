//! The doubling quadratic form
//!
//! ```text
//! Q(x_1, ..., x_{n-1}) = sum_k x_k x_{2k} lambda_k,   lambda_k = |cos(pi k / n)|,
//! ```
//!
//! with subscripts taken modulo an odd `n`, its norm on the unit sphere, and
//! the explicit weight system `gamma_k` that certifies `|Q| < sum x_k^2`.
//!
//! The norm is the largest eigenvalue of the symmetrization of
//! `M[k][2k] = lambda_k`. Doubling permutes the nonzero residues, so that
//! matrix splits into one weighted cycle per orbit of `k -> 2k`. Each cycle
//! is irreducible with nonnegative weights, hence its top eigenvalue is its
//! Perron root, located here by bisection on Sylvester inertia counts.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::two_adic_valuation;
use crate::spectral::DENSE_CEILING;

/// `d` values tried when choosing the ladder step.
pub const D_GRID: [f64; 8] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];

fn check_odd(n: u64) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidModulus(n));
    }
    Ok(())
}

/// The form for one odd `n`: the weights `lambda_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct QFormInstance {
    n: u64,
    lambda: Vec<f64>,
}

impl QFormInstance {
    pub fn new(n: u64) -> Result<Self> {
        check_odd(n)?;
        let lambda = (0..n)
            .map(|k| (std::f64::consts::PI * k as f64 / n as f64).cos().abs())
            .collect();
        Ok(QFormInstance { n, lambda })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `lambda_k` for any integer `k` (reduced mod `n`).
    #[inline]
    pub fn lambda(&self, k: u64) -> f64 {
        self.lambda[(k % self.n) as usize]
    }

    #[inline]
    fn double(&self, k: u64) -> u64 {
        (2 * k) % self.n
    }

    #[inline]
    fn halve(&self, k: u64) -> u64 {
        // (n + 1) / 2 is the inverse of 2.
        ((k as u128 * self.n.div_ceil(2) as u128) % self.n as u128) as u64
    }

    /// Orbits of `k -> 2k` on `{1, ..., n-1}`, each listed in doubling order.
    pub fn doubling_orbits(&self) -> Vec<Vec<u64>> {
        let mut seen = vec![false; self.n as usize];
        let mut orbits = Vec::new();
        for k in 1..self.n {
            if seen[k as usize] {
                continue;
            }
            let mut orbit = Vec::new();
            let mut j = k;
            while !seen[j as usize] {
                seen[j as usize] = true;
                orbit.push(j);
                j = self.double(j);
            }
            orbits.push(orbit);
        }
        orbits
    }
}

/// `sum_k x_k x_{2k mod n} lambda_k`, with `x[k - 1]` holding `x_k`.
pub fn q_eval(x: &[f64], inst: &QFormInstance) -> Result<f64> {
    let dim = inst.n as usize - 1;
    if x.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            actual: x.len(),
        });
    }
    Ok((1..inst.n)
        .map(|k| x[k as usize - 1] * x[inst.double(k) as usize - 1] * inst.lambda(k))
        .sum())
}

/// `(M + M^T) / 2` on indices `1..n-1` (row `k - 1` is index `k`).
pub fn symmetrized_matrix(inst: &QFormInstance) -> Result<DMatrix<f64>> {
    if inst.n > DENSE_CEILING {
        return Err(Error::TooLarge {
            n: inst.n,
            ceiling: DENSE_CEILING,
        });
    }
    let dim = inst.n as usize - 1;
    let mut s = DMatrix::zeros(dim, dim);
    for k in 1..inst.n {
        let (i, j) = (k as usize - 1, inst.double(k) as usize - 1);
        let w = inst.lambda(k) / 2.0;
        s[(i, j)] += w;
        s[(j, i)] += w;
    }
    Ok(s)
}

/// Number of eigenvalues below `sigma` of the symmetric cycle matrix with
/// zero diagonal and `edges[i]` joining positions `i` and `i + 1 (mod len)`.
///
/// Eliminates the chain `0..len-1` and accumulates the fill in the last
/// row, so one count costs `O(len)`.
fn cycle_count_below(edges: &[f64], sigma: f64) -> usize {
    let len = edges.len();
    debug_assert!(len >= 2);
    let m = len - 1;
    let tiny = f64::EPSILON * (1.0 + sigma.abs());
    let guard = |p: f64| if p == 0.0 { -tiny } else { p };

    let mut coupling = vec![0.0; m];
    coupling[0] += edges[m];
    coupling[m - 1] += edges[m - 1];
    let mut last = -sigma;
    let mut pivot = -sigma;
    let mut negatives = 0;
    for i in 0..m {
        let p = guard(pivot);
        if p < 0.0 {
            negatives += 1;
        }
        last -= coupling[i] * coupling[i] / p;
        if i + 1 < m {
            pivot = -sigma - edges[i] * edges[i] / p;
            coupling[i + 1] -= edges[i] * coupling[i] / p;
        }
    }
    if guard(last) < 0.0 {
        negatives += 1;
    }
    negatives
}

/// Largest eigenvalue of a weighted cycle by inertia bisection.
fn cycle_top_eigenvalue(edges: &[f64]) -> f64 {
    let len = edges.len();
    // Gershgorin: every row sum is edges[i-1] + edges[i].
    let mut hi = (0..len)
        .map(|i| edges[(i + len - 1) % len] + edges[i])
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cycle_count_below(edges, mid) == len {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `max |Q(x)|` over the unit sphere.
pub fn q_norm(n: u64) -> Result<f64> {
    check_odd(n)?;
    if n > DENSE_CEILING {
        return Err(Error::TooLarge {
            n,
            ceiling: DENSE_CEILING,
        });
    }
    let inst = QFormInstance::new(n)?;
    Ok(inst
        .doubling_orbits()
        .iter()
        .map(|orbit| {
            let edges: Vec<f64> = orbit.iter().map(|&k| inst.lambda(k) / 2.0).collect();
            cycle_top_eigenvalue(&edges)
        })
        .fold(0.0, f64::max))
}

/// `max |eigenvalue|` of the full symmetrized matrix from a dense
/// symmetric eigendecomposition.
pub fn q_norm_dense(n: u64) -> Result<f64> {
    let inst = QFormInstance::new(n)?;
    let s = symmetrized_matrix(&inst)?;
    Ok(s.symmetric_eigenvalues()
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max))
}

/// Where an index sits in the weight construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `n/4 <= k <= 3n/4`, where `gamma_k = 1`.
    Plateau,
    /// The rest: `k` is congruent to some `l` in `(-n/4, n/4)`, `l != 0`.
    Dyadic { ell: i64, depth: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaCertificate {
    pub n: u64,
    pub d: f64,
    /// `(ln n)^2`.
    pub log_n_sq: f64,
    /// `t_s = 1 - s d / (ln n)^2` for `s = 0..=max depth`.
    pub ladder: Vec<f64>,
    /// `gamma_k`, indexed by `k` (entry 0 unused).
    pub gamma: Vec<f64>,
    pub region: Vec<Option<Region>>,
}

impl GammaCertificate {
    pub fn in_dyadic_set(&self, k: u64) -> bool {
        matches!(
            self.region[(k % self.n) as usize],
            Some(Region::Dyadic { .. })
        )
    }

    pub fn gamma(&self, k: u64) -> f64 {
        self.gamma[(k % self.n) as usize]
    }
}

/// The region of `k`, comparing `4k` against `n` and `3n` exactly.
pub fn classify_index(n: u64, k: u64) -> Option<Region> {
    let k = k % n;
    if k == 0 {
        return None;
    }
    let four_k = 4 * k as u128;
    let (n1, n3) = (n as u128, 3 * n as u128);
    if four_k >= n1 && four_k <= n3 {
        return Some(Region::Plateau);
    }
    let ell = if four_k < n1 {
        k as i64
    } else {
        k as i64 - n as i64
    };
    Some(Region::Dyadic {
        ell,
        depth: two_adic_valuation(ell),
    })
}

pub fn gamma_build(n: u64, d: f64) -> Result<GammaCertificate> {
    check_odd(n)?;
    if !d.is_finite() || d <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "d must be positive, got {d}"
        )));
    }
    let log_n_sq = (n as f64).ln().powi(2);
    let region: Vec<Option<Region>> = (0..n).map(|k| classify_index(n, k)).collect();
    let max_depth = region
        .iter()
        .filter_map(|r| match r {
            Some(Region::Dyadic { depth, .. }) => Some(*depth),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let ladder: Vec<f64> = (0..=max_depth)
        .map(|s| 1.0 - s as f64 * d / log_n_sq)
        .collect();
    if let Some((s, &t)) = ladder.iter().enumerate().find(|(_, &t)| t <= 0.0) {
        return Err(Error::LadderNotPositive {
            d,
            depth: s as u32,
            value: t,
        });
    }
    let gamma = region
        .iter()
        .map(|r| match r {
            Some(Region::Dyadic { depth, .. }) => ladder[*depth as usize],
            _ => 1.0,
        })
        .collect();
    Ok(GammaCertificate {
        n,
        d,
        log_n_sq,
        ladder,
        gamma,
        region,
    })
}

/// One audit row: `k, lambda_k, gamma_k`, the case of the four-way split by
/// membership of `k` and `k/2` in the dyadic set, and the left side
/// `gamma_k lambda_k + lambda_{k/2} / gamma_{k/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CritbdRow {
    pub k: u64,
    pub lambda: f64,
    pub gamma: f64,
    pub case: u8,
    pub lhs: f64,
    /// The case's generic upper bound on `lhs`.
    pub case_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CritbdReport {
    pub n: u64,
    pub d: f64,
    pub passed: bool,
    pub worst_lhs: f64,
    pub worst_k: u64,
    /// `2 - worst_lhs`.
    pub margin: f64,
    /// `margin * (ln n)^2`, the constant certified for the per-index bound.
    pub certified_c: f64,
    /// `worst_lhs / 2 = 1 - margin / 2`, an upper bound on `max |Q|`.
    pub form_bound: f64,
    pub rows: Vec<CritbdRow>,
}

pub fn verify_critbd(cert: &GammaCertificate) -> CritbdReport {
    let inst = QFormInstance::new(cert.n).expect("certificate was built for an odd n");
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let rows: Vec<CritbdRow> = (1..cert.n)
        .map(|k| {
            let half = inst.halve(k);
            let (gk, gh) = (cert.gamma(k), cert.gamma(half));
            let lhs = gk * inst.lambda(k) + inst.lambda(half) / gh;
            let (case, case_bound) = match (cert.in_dyadic_set(k), cert.in_dyadic_set(half)) {
                (false, false) => (1, 2.0 * inv_sqrt2),
                (false, true) => (2, inv_sqrt2 + 1.0 / gh),
                (true, false) => (3, gk + inv_sqrt2),
                (true, true) => (4, gk + 1.0 / gh),
            };
            CritbdRow {
                k,
                lambda: inst.lambda(k),
                gamma: gk,
                case,
                lhs,
                case_bound,
            }
        })
        .collect();
    let (worst_k, worst_lhs) =
        rows.iter()
            .map(|r| (r.k, r.lhs))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
    let margin = 2.0 - worst_lhs;
    CritbdReport {
        n: cert.n,
        d: cert.d,
        passed: worst_lhs < 2.0,
        worst_lhs,
        worst_k,
        margin,
        certified_c: margin * cert.log_n_sq,
        form_bound: worst_lhs / 2.0,
        rows,
    }
}

/// Largest `d` in `grid` whose certificate passes, with its report.
pub fn choose_d(n: u64, grid: &[f64]) -> Result<Option<CritbdReport>> {
    check_odd(n)?;
    let mut best: Option<CritbdReport> = None;
    for &d in grid {
        let cert = match gamma_build(n, d) {
            Ok(c) => c,
            Err(Error::LadderNotPositive { .. }) => continue,
            Err(e) => return Err(e),
        };
        let report = verify_critbd(&cert);
        if report.passed && best.as_ref().is_none_or(|b| d > b.d) {
            best = Some(report);
        }
    }
    Ok(best)
}

/// Per-`n` summary of the form norm against its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QFormSweepRow {
    pub n: u64,
    pub q_norm: f64,
    /// `(1 - q_norm) (ln n)^2`.
    pub scaled_gap: f64,
    pub chosen_d: Option<f64>,
    pub certified_c: Option<f64>,
    pub form_bound: Option<f64>,
    pub certificate_dominates: bool,
}

pub fn sweep_row(n: u64, grid: &[f64]) -> Result<QFormSweepRow> {
    let q = q_norm(n)?;
    let cert = choose_d(n, grid)?;
    let log_n_sq = (n as f64).ln().powi(2);
    Ok(QFormSweepRow {
        n,
        q_norm: q,
        scaled_gap: (1.0 - q) * log_n_sq,
        chosen_d: cert.as_ref().map(|c| c.d),
        certified_c: cert.as_ref().map(|c| c.certified_c),
        form_bound: cert.as_ref().map(|c| c.form_bound),
        certificate_dominates: cert.as_ref().is_some_and(|c| q <= c.form_bound + 1e-9),
    })
}
