//! The chordal metric on the Riemann sphere and χ-uniform convergence checks
//! for Dirichlet series with non-negative coefficients on real intervals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_table, format_f64};
use crate::par;

/// A point of `ℂ ∪ {∞}`. Serialized as a complex number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity(InfinityTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfinityTag {
    #[serde(rename = "inf")]
    Inf,
}

impl SpherePoint {
    pub const INFINITY: SpherePoint = SpherePoint::Infinity(InfinityTag::Inf);

    /// Non-finite inputs map to `∞`.
    pub fn new(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            Self::INFINITY
        }
    }

    pub fn real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity(_))
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::new(z)
    }
}

/// Chordal distance; lies in `[0, 1]`.
pub fn chi(a: SpherePoint, b: SpherePoint) -> f64 {
    match (a, b) {
        (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
            // hypot keeps |a| up to f64::MAX from overflowing
            let (ra, rb) = (1f64.hypot(a.norm()), 1f64.hypot(b.norm()));
            // fixed division order keeps χ exactly symmetric
            ((a - b).norm() / ra.max(rb) / ra.min(rb)).min(1.0)
        }
        (SpherePoint::Finite(a), SpherePoint::Infinity(_)) | (SpherePoint::Infinity(_), SpherePoint::Finite(a)) => 1.0 / 1f64.hypot(a.norm()),
        _ => 0.0,
    }
}

/// `max_k χ(f_k, g_k)`.
pub fn chi_uniform_error(f_values: &[SpherePoint], g_values: &[SpherePoint]) -> Result<f64> {
    if f_values.len() != g_values.len() {
        return Err(Error::invalid(format!("value lists differ in length: {} vs {}", f_values.len(), g_values.len())));
    }
    Ok(f_values.iter().zip(g_values).map(|(&a, &b)| chi(a, b)).fold(0.0, f64::max))
}

const BERNOULLI_2K: [f64; 8] =
    [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0];

/// `ζ(σ)` for real `σ > 1` by Euler–Maclaurin summation (relative accuracy
/// near machine precision, including close to the pole).
pub fn zeta_real(sigma: f64) -> Result<f64> {
    if !(sigma > 1.0) {
        return Err(Error::invalid(format!("zeta_real needs σ > 1, got {sigma}")));
    }
    const M: f64 = 16.0;
    let mut sum: f64 = (1..16).rev().map(|n| (n as f64).powf(-sigma)).sum();
    sum += M.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * M.powf(-sigma);
    // Σ B_2k/(2k)! · σ(σ+1)…(σ+2k−2) · M^{−σ−2k+1}
    let mut rising = sigma;
    let mut fact = 2.0;
    let mut power = M.powf(-sigma - 1.0);
    for (k, b) in BERNOULLI_2K.iter().enumerate() {
        let k = k + 1;
        sum += b / fact * rising * power;
        let j = 2.0 * k as f64;
        rising *= (sigma + j - 1.0) * (sigma + j);
        fact *= (j + 1.0) * (j + 2.0);
        power /= M * M;
    }
    Ok(sum)
}

/// The limit of `Σ n^{-σ}` on the real line: `ζ(σ)` for `σ > 1`, `∞` otherwise.
pub fn zeta_limit(sigma: f64) -> SpherePoint {
    zeta_real(sigma).map_or(SpherePoint::INFINITY, SpherePoint::real)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChordalGrid {
    /// Starting number of grid points per unit length.
    pub points_per_unit: usize,
    /// Stop doubling once the sup changes by less than this.
    pub change_tol: f64,
    pub max_doublings: u32,
}

impl Default for ChordalGrid {
    fn default() -> Self {
        Self { points_per_unit: 2000, change_tol: 1e-3, max_doublings: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordalRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub chi_sup_error: f64,
    /// σ where the sup was attained.
    pub argmax_sigma: f64,
    pub grid_points: usize,
    /// Whether successive grid doublings settled within the change tolerance.
    pub grid_settled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordalReport {
    pub interval: [f64; 2],
    pub target_eps: f64,
    pub rows: Vec<ChordalRow>,
    /// First ladder entry with sup χ-error ≤ `target_eps`.
    pub n0: Option<usize>,
    pub found: bool,
    pub oracle: String,
}

impl ChordalReport {
    /// CSV with header `N,chi_sup_error`.
    pub fn to_csv(&self) -> String {
        csv_table(&["N", "chi_sup_error"], self.rows.iter().map(|r| vec![r.n.to_string(), format_f64(r.chi_sup_error)]))
    }
}

/// χ-uniform convergence of `S_N(σ) = Σ_{n≤N} n^{-σ}` to `ζ`/`∞` on `[σ_lo, σ_hi]`.
pub fn zeta_chordal_convergence_check(interval: [f64; 2], ladder: &[usize], target_eps: f64, grid: &ChordalGrid) -> Result<ChordalReport> {
    let mut report = chordal_convergence_check(&|_| 1.0, &zeta_limit, interval, ladder, target_eps, grid)?;
    report.oracle = "Euler-Maclaurin zeta for sigma > 1; infinity for sigma <= 1".into();
    Ok(report)
}

/// The same check for a user rule `a_n ≥ 0` and its claimed limit on the line.
pub fn chordal_convergence_check(
    coeff: &(dyn Fn(usize) -> f64 + Sync),
    limit: &(dyn Fn(f64) -> SpherePoint + Sync),
    interval: [f64; 2],
    ladder: &[usize],
    target_eps: f64,
    grid: &ChordalGrid,
) -> Result<ChordalReport> {
    let [lo, hi] = interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("interval [{lo}, {hi}] is not a proper finite interval")));
    }
    if ladder.is_empty() {
        return Err(Error::invalid("N ladder is empty"));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] == 0 {
        return Err(Error::invalid("N ladder must be positive and strictly ascending"));
    }
    if !(target_eps > 0.0) || grid.points_per_unit == 0 {
        return Err(Error::invalid("target eps and grid density must be positive"));
    }
    let nmax = *ladder.last().expect("non-empty");
    let coeffs: Vec<f64> = (1..=nmax).map(coeff).collect();
    if coeffs.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::invalid("coefficient rule must give finite non-negative values"));
    }

    let mut rows = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let mut per_unit = grid.points_per_unit;
        let mut prev = sup_on_grid(&coeffs[..n], limit, lo, hi, per_unit);
        let mut settled = false;
        for _ in 0..grid.max_doublings {
            per_unit *= 2;
            let next = sup_on_grid(&coeffs[..n], limit, lo, hi, per_unit);
            let change = (next.0 - prev.0).abs();
            prev = next;
            if change < grid.change_tol {
                settled = true;
                break;
            }
        }
        let (err, at, points) = prev;
        rows.push(ChordalRow { n, chi_sup_error: err, argmax_sigma: at, grid_points: points, grid_settled: settled });
    }
    let n0 = rows.iter().find(|r| r.chi_sup_error <= target_eps).map(|r| r.n);
    Ok(ChordalReport { interval, target_eps, rows, n0, found: n0.is_some(), oracle: "user-supplied limit".into() })
}

/// `(sup χ, argmax, grid size)` of `Σ a_n n^{-σ}` against `limit` on a uniform grid.
fn sup_on_grid(coeffs: &[f64], limit: &(dyn Fn(f64) -> SpherePoint + Sync), lo: f64, hi: f64, per_unit: usize) -> (f64, f64, usize) {
    let steps = ((hi - lo) * per_unit as f64).ceil().max(1.0) as usize;
    let h = (hi - lo) / steps as f64;
    let points = steps + 1;
    // blocks of consecutive grid points; each starts from exact powers
    const BLOCK: usize = 512;
    let starts: Vec<usize> = (0..points).step_by(BLOCK).collect();
    let blocks = par::map(&starts, |&k0| {
        let len = BLOCK.min(points - k0);
        let sums = partial_sums_on_block(coeffs, lo + k0 as f64 * h, h, len);
        let mut best = (0.0f64, lo + k0 as f64 * h);
        for (j, s) in sums.into_iter().enumerate() {
            let sigma = lo + (k0 + j) as f64 * h;
            let e = chi(SpherePoint::real(s), limit(sigma));
            if e > best.0 {
                best = (e, sigma);
            }
        }
        best
    });
    let (err, at) = blocks.into_iter().fold((0.0, lo), |a, b| if b.0 > a.0 { b } else { a });
    (err, at, points)
}

/// `Σ a_n n^{-(σ0 + j h)}` for `j < len`, via `n^{-σ-h} = n^{-σ} · n^{-h}`.
fn partial_sums_on_block(coeffs: &[f64], sigma0: f64, h: f64, len: usize) -> Vec<f64> {
    const LANES: usize = 8;
    let mut acc = vec![0.0f64; len];
    for (chunk_idx, chunk) in coeffs.chunks(LANES).enumerate() {
        let mut p = [0.0f64; LANES];
        let mut r = [1.0f64; LANES];
        for (l, &a) in chunk.iter().enumerate() {
            let n = (chunk_idx * LANES + l + 1) as f64;
            let ln = n.ln();
            p[l] = a * (-sigma0 * ln).exp();
            r[l] = (-h * ln).exp();
        }
        for out in acc.iter_mut() {
            let mut s = 0.0;
            for l in 0..LANES {
                s += p[l];
                p[l] *= r[l];
            }
            *out += s;
        }
    }
    acc
}
