//! Dirichlet polynomials `P(s) = Σ_{n=1}^{N} a_n n^{-s}`.

use std::f64::consts::{LN_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};

/// A finite Dirichlet polynomial.
///
/// `coeffs[k]` holds `a_{k+1}`. The degree is the storage bound `N`; the
/// trailing coefficient may be zero. The coefficient list is never empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct DirichletPolynomial {
    coeffs: Vec<Complex64>,
}

impl TryFrom<Vec<Complex64>> for DirichletPolynomial {
    type Error = Error;

    fn try_from(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(coeffs)
    }
}

impl From<DirichletPolynomial> for Vec<Complex64> {
    fn from(p: DirichletPolynomial) -> Self {
        p.coeffs
    }
}

impl DirichletPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("a Dirichlet polynomial needs at least one coefficient"));
        }
        if let Some(c) = coeffs.iter().find(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite coefficient {c}")));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The zero polynomial of the given degree.
    pub fn zero(degree: usize) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); degree.max(1)] }
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// Coefficients drawn uniformly from the square `[-1, 1] + i[-1, 1]`.
    pub fn random_unit(degree: usize, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..degree.max(1)).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        Self { coeffs }
    }

    /// `c · n^{-s}`.
    pub fn monomial(n: usize, c: Complex64) -> Self {
        let mut p = Self::zero(n);
        p.coeffs[n - 1] = c;
        p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `a_n`, with `a_n = 0` beyond the degree.
    pub fn coeff(&self, n: usize) -> Complex64 {
        assert!(n >= 1, "Dirichlet coefficients are indexed from 1");
        self.coeffs.get(n - 1).copied().unwrap_or_default()
    }

    /// Same coefficients stored with degree `max(degree, n)`, or truncated to `n`.
    pub fn resized(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n.max(1), Complex64::default());
        Self { coeffs }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.norm_sqr() == 0.0)
    }

    pub fn evaluate(&self, s: Complex64) -> Result<Complex64> {
        check_finite(s, "evaluation point")?;
        Ok(eval_unchecked(&self.coeffs, s))
    }

    /// `P^{(order)}(s) = Σ a_n (-ln n)^order n^{-s}`.
    pub fn evaluate_derivative(&self, s: Complex64, order: u32) -> Result<Complex64> {
        check_finite(s, "evaluation point")?;
        let mut acc = Complex64::default();
        for (k, &a) in self.coeffs.iter().enumerate().skip(usize::from(order > 0)) {
            let ln = ((k + 1) as f64).ln();
            acc += a * (-ln).powi(order as i32) * (-s * ln).exp();
        }
        Ok(acc)
    }

    /// Evaluates at many points, sharing the logarithm table.
    pub fn evaluate_many(&self, points: &[Complex64]) -> Result<Vec<Complex64>> {
        for &s in points {
            check_finite(s, "evaluation point")?;
        }
        let logs = log_table(self.degree());
        Ok(points
            .iter()
            .map(|&s| {
                self.coeffs
                    .iter()
                    .zip(&logs)
                    .filter(|(a, _)| a.norm_sqr() != 0.0)
                    .map(|(&a, &ln)| a * (-s * ln).exp())
                    .sum()
            })
            .collect())
    }

    /// The polynomial `Q(s) = P(s + δ)`, i.e. `a_n ↦ a_n n^{-δ}`.
    pub fn shift_by_delta(&self, delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::invalid(format!("shift must be finite, got {delta}")));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| a * ((k + 1) as f64).powf(-delta))
            .collect();
        Ok(Self { coeffs })
    }

    /// `‖P‖_σ = Σ |a_n| n^{-σ}`.
    pub fn seminorm_sigma(&self, sigma: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm() * ((k + 1) as f64).powf(-sigma))
            .sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&a| a * c).collect() }
    }

    /// Dirichlet convolution: the coefficients of `P(s)·Q(s)`.
    pub fn product(&self, other: &Self) -> Self {
        let n = self.degree() * other.degree();
        let mut coeffs = vec![Complex64::default(); n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[(i + 1) * (j + 1) - 1] += a * b;
            }
        }
        Self { coeffs }
    }

    /// Upper bound for `|P'(s)|` on `Re s ≥ sigma0`.
    pub fn lipschitz_bound(&self, sigma0: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| {
                let n = (k + 1) as f64;
                a.norm() * n.ln() * n.powf(-sigma0)
            })
            .sum()
    }
}

fn zip_with(p: &DirichletPolynomial, q: &DirichletPolynomial, f: impl Fn(Complex64, Complex64) -> Complex64) -> DirichletPolynomial {
    let n = p.degree().max(q.degree());
    let coeffs = (1..=n).map(|k| f(p.coeff(k), q.coeff(k))).collect();
    DirichletPolynomial { coeffs }
}

impl Add for &DirichletPolynomial {
    type Output = DirichletPolynomial;
    fn add(self, rhs: Self) -> DirichletPolynomial {
        zip_with(self, rhs, |a, b| a + b)
    }
}

impl Sub for &DirichletPolynomial {
    type Output = DirichletPolynomial;
    fn sub(self, rhs: Self) -> DirichletPolynomial {
        zip_with(self, rhs, |a, b| a - b)
    }
}

impl Neg for &DirichletPolynomial {
    type Output = DirichletPolynomial;
    fn neg(self) -> DirichletPolynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &DirichletPolynomial {
    type Output = DirichletPolynomial;
    fn mul(self, rhs: Self) -> DirichletPolynomial {
        self.product(rhs)
    }
}

pub(crate) fn log_table(n: usize) -> Vec<f64> {
    (1..=n).map(|k| (k as f64).ln()).collect()
}

pub(crate) fn eval_unchecked(coeffs: &[Complex64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() != 0.0)
        .map(|(k, &a)| a * (-s * ((k + 1) as f64).ln()).exp())
        .sum()
}

/// Sampling parameters for [`sup_norm_halfplane`]: a `re_points × im_points`
/// grid on `[σ0, σ0 + width] × [0, height]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupNormPlan {
    pub width: f64,
    pub height: f64,
    pub re_points: usize,
    pub im_points: usize,
    /// Densities are doubled until the estimate moves by less than this.
    pub refine_tol: f64,
    pub max_refinements: u32,
}

impl Default for SupNormPlan {
    fn default() -> Self {
        Self {
            width: 10.0,
            // sixteen periods of 2^{-it}
            height: 2.0 * PI / LN_2 * 16.0,
            re_points: 400,
            im_points: 400,
            refine_tol: 1e-4,
            max_refinements: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNormEstimate {
    /// Largest sampled `|P(s)|`; a lower bound of the half-plane sup.
    pub value: f64,
    pub argmax: Complex64,
    pub re_spacing: f64,
    pub im_spacing: f64,
    /// Bound on `|P'|` over `Re s ≥ σ0`.
    pub lipschitz: f64,
    /// `value + lipschitz · half-diagonal`: an upper bound of `|P|` over the
    /// sampled rectangle only.
    pub rectangle_upper_bound: f64,
    pub refinements: u32,
}

/// Lower-bound estimate of `sup_{Re s ≥ σ0} |P(s)|` from a rectangle grid.
pub fn sup_norm_halfplane(p: &DirichletPolynomial, sigma0: f64, plan: &SupNormPlan) -> Result<SupNormEstimate> {
    if plan.re_points == 0 || plan.im_points == 0 {
        return Err(Error::invalid("sampling plan has no grid points"));
    }
    if !(sigma0.is_finite() && plan.width >= 0.0 && plan.width.is_finite() && plan.height > 0.0 && plan.height.is_finite()) {
        return Err(Error::invalid("sampling plan needs finite σ0, width ≥ 0 and height > 0"));
    }
    let lipschitz = p.lipschitz_bound(sigma0);
    let (mut nx, mut ny) = (plan.re_points, plan.im_points);
    let mut best = grid_max(p, sigma0, plan.width, plan.height, nx, ny);
    let mut refinements = 0;
    while refinements < plan.max_refinements {
        nx *= 2;
        ny *= 2;
        let next = grid_max(p, sigma0, plan.width, plan.height, nx, ny);
        refinements += 1;
        let change = (next.0 - best.0).abs();
        if next.0 >= best.0 {
            best = next;
        }
        if change < plan.refine_tol {
            break;
        }
    }
    let re_spacing = if nx > 1 { plan.width / (nx - 1) as f64 } else { 0.0 };
    let im_spacing = if ny > 1 { plan.height / (ny - 1) as f64 } else { plan.height };
    let half_diag = 0.5 * re_spacing.hypot(im_spacing);
    Ok(SupNormEstimate {
        value: best.0,
        argmax: best.1,
        re_spacing,
        im_spacing,
        lipschitz,
        rectangle_upper_bound: best.0 + lipschitz * half_diag,
        refinements,
    })
}

fn grid_max(p: &DirichletPolynomial, sigma0: f64, width: f64, height: f64, nx: usize, ny: usize) -> (f64, Complex64) {
    let logs = log_table(p.degree());
    let terms: Vec<(Complex64, f64)> = p
        .coeffs
        .iter()
        .zip(&logs)
        .filter(|(a, _)| a.norm_sqr() != 0.0)
        .map(|(&a, &l)| (a, l))
        .collect();
    let dx = if nx > 1 { width / (nx - 1) as f64 } else { 0.0 };
    let dt = if ny > 1 { height / (ny - 1) as f64 } else { 0.0 };
    let rot: Vec<Complex64> = terms.iter().map(|&(_, l)| Complex64::from_polar(1.0, -dt * l)).collect();
    let mut best = (0.0, Complex64::new(sigma0, 0.0));
    let mut cur = vec![Complex64::default(); terms.len()];
    for i in 0..nx {
        let sigma = sigma0 + dx * i as f64;
        for j in 0..ny {
            // re-anchor periodically so the rotation recurrence cannot drift
            if j % 32 == 0 {
                let t = dt * j as f64;
                for (c, &(a, l)) in cur.iter_mut().zip(&terms) {
                    *c = a * (-Complex64::new(sigma, t) * l).exp();
                }
            }
            let v: Complex64 = cur.iter().sum();
            let m = v.norm();
            if m > best.0 {
                best = (m, Complex64::new(sigma, dt * j as f64));
            }
            for (c, r) in cur.iter_mut().zip(&rot) {
                *c *= r;
            }
        }
    }
    best
}
