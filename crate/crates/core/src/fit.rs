//! Discrete complex minimax fitting of Dirichlet polynomials on sampled
//! compact sets, optionally under a `‖h − f‖_σ ≤ ε` seminorm constraint.
//!
//! The kernel is Lawson's iteratively reweighted least squares. Columns
//! `n^{-s}` are normalized to unit RMS over the samples, and the design is
//! reduced once (QR, then SVD of the triangular factor) to its numerical
//! range, so every iteration only solves a small dense least-squares problem.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compact::DiscretizedSet;
use crate::dirichlet::{log_table, DirichletPolynomial};
use crate::error::{Error, Result};
use crate::io::{csv_table, format_f64};
use crate::laurent::{evaluate_rational, RationalDirichletFunction};

/// The function `g` being approximated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetFunction {
    Exp,
    Identity,
    Constant { value: Complex64 },
    /// `Σ c_k s^k`.
    Polynomial { coefficients: Vec<Complex64> },
    /// `Σ a_n n^{-s}`.
    Dirichlet { coefficients: Vec<Complex64> },
    /// `1/(s − center)`.
    Inverse { center: Complex64 },
    /// `e^{1/(s − center)}`.
    ExpInverse { center: Complex64 },
    Sum { terms: Vec<TargetFunction> },
    Scaled { factor: Complex64, target: Box<TargetFunction> },
    /// `P_0(s) + Σ_j P_j(1/(s − z_j))`.
    Rational { function: RationalDirichletFunction },
    /// One value per sample of the set being fitted, in `DiscretizedSet::samples` order.
    Sampled { values: Vec<Complex64> },
}

impl TargetFunction {
    pub fn constant(value: Complex64) -> Self {
        TargetFunction::Constant { value }
    }

    pub fn scaled(self, factor: Complex64) -> Self {
        TargetFunction::Scaled { factor, target: Box::new(self) }
    }

    pub fn plus(self, other: TargetFunction) -> Self {
        TargetFunction::Sum { terms: vec![self, other] }
    }

    pub fn dirichlet(p: &DirichletPolynomial) -> Self {
        TargetFunction::Dirichlet { coefficients: p.coeffs().to_vec() }
    }

    /// The target as a Dirichlet polynomial, when it is one.
    pub fn as_dirichlet(&self) -> Option<DirichletPolynomial> {
        match self {
            TargetFunction::Constant { value } => Some(DirichletPolynomial::constant(*value)),
            TargetFunction::Dirichlet { coefficients } => DirichletPolynomial::new(coefficients.clone()).ok(),
            TargetFunction::Sum { terms } => {
                let mut acc = DirichletPolynomial::zero(1);
                for t in terms {
                    acc = &acc + &t.as_dirichlet()?;
                }
                Some(acc)
            }
            TargetFunction::Scaled { factor, target } => Some(target.as_dirichlet()?.scale(*factor)),
            _ => None,
        }
    }

    fn is_sampled(&self) -> bool {
        match self {
            TargetFunction::Sampled { .. } => true,
            TargetFunction::Sum { terms } => terms.iter().any(|t| t.is_sampled()),
            TargetFunction::Scaled { target, .. } => target.is_sampled(),
            _ => false,
        }
    }

    /// Pointwise value; sampled targets have no pointwise meaning.
    pub fn evaluate(&self, s: Complex64) -> Result<Complex64> {
        let v = match self {
            TargetFunction::Exp => s.exp(),
            TargetFunction::Identity => s,
            TargetFunction::Constant { value } => *value,
            TargetFunction::Polynomial { coefficients } => coefficients.iter().rev().fold(Complex64::default(), |acc, &c| acc * s + c),
            TargetFunction::Dirichlet { coefficients } => DirichletPolynomial::new(coefficients.clone())?.evaluate(s)?,
            TargetFunction::Inverse { center } => {
                if s == *center {
                    return Err(Error::Pole(s));
                }
                1.0 / (s - center)
            }
            TargetFunction::ExpInverse { center } => {
                if s == *center {
                    return Err(Error::Pole(s));
                }
                (1.0 / (s - center)).exp()
            }
            TargetFunction::Sum { terms } => {
                let mut acc = Complex64::default();
                for t in terms {
                    acc += t.evaluate(s)?;
                }
                acc
            }
            TargetFunction::Scaled { factor, target } => factor * target.evaluate(s)?,
            TargetFunction::Rational { function } => evaluate_rational(function, s)?,
            TargetFunction::Sampled { .. } => {
                return Err(Error::invalid("a sampled target can only be evaluated on its own sample set"));
            }
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::invalid(format!("target is not finite at {s}")))
        }
    }

    /// Values at `points`, which must be the sample list for sampled targets.
    pub fn values_at(&self, points: &[Complex64]) -> Result<Vec<Complex64>> {
        match self {
            TargetFunction::Sampled { values } => {
                if values.len() != points.len() {
                    return Err(Error::invalid(format!("sampled target has {} values for {} samples", values.len(), points.len())));
                }
                if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                    return Err(Error::invalid("sampled target has non-finite values"));
                }
                Ok(values.clone())
            }
            TargetFunction::Sum { terms } if self.is_sampled() => {
                let mut acc = vec![Complex64::default(); points.len()];
                for t in terms {
                    for (a, v) in acc.iter_mut().zip(t.values_at(points)?) {
                        *a += v;
                    }
                }
                Ok(acc)
            }
            TargetFunction::Scaled { factor, target } if self.is_sampled() => {
                Ok(target.values_at(points)?.into_iter().map(|v| factor * v).collect())
            }
            _ => points.iter().map(|&s| self.evaluate(s)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop once the sup-error changes by less than `tol · max|g|` between iterations.
    pub tol: f64,
    /// Ridge weight on the normalized coefficients.
    pub ridge: f64,
    /// Singular values below `rank_tol · σ_max` are dropped.
    pub rank_tol: f64,
    /// Allow constrained fits on sets reaching into `Re s > 0`.
    pub geometry_waiver: bool,
    /// Sup-error a constrained fit must reach to count as converged; defaults to `eps`.
    pub error_target: Option<f64>,
    /// Bisection steps on the seminorm penalty weight.
    pub penalty_steps: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tol: 1e-10,
            ridge: 1e-12,
            rank_tol: 1e-16,
            geometry_waiver: false,
            error_target: None,
            penalty_steps: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitProvenance {
    pub samples: usize,
    pub numerical_rank: usize,
    /// Set when a constrained fit ran on a set reaching into `Re s > 0`.
    pub geometry_waiver: bool,
    pub max_real_part: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub polynomial: DirichletPolynomial,
    /// `max_k |h(s_k) − g(s_k)|` over all samples, for the returned coefficients.
    pub minimax_error: f64,
    /// `‖h − f‖_σ` for constrained fits.
    pub constraint_value: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub provenance: FitProvenance,
}

/// Sup over samples of `|P(s_k) − g_k|`, evaluated directly.
pub fn sampled_error(p: &DirichletPolynomial, points: &[Complex64], g: &[Complex64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (&s, &v) in points.iter().zip(g) {
        worst = worst.max((p.evaluate(s)? - v).norm());
    }
    Ok(worst)
}

/// The reduced design for columns `n^{-s}`, `n = first..=N`.
struct Design {
    m: usize,
    /// Unnormalized columns, row-major by sample: `a[k][n-1]`.
    a: DMatrix<Complex64>,
    /// Column scaling: normalized coefficient `x_n = scale_n · c_n`.
    scale: Vec<f64>,
    /// `√M · U_r` with orthonormal `U_r` (M × r).
    g: DMatrix<Complex64>,
    sigma: Vec<f64>,
    /// `V_r` (N × r).
    v: DMatrix<Complex64>,
}

impl Design {
    fn new(points: &[Complex64], first: usize, degree: usize, rank_tol: f64) -> Result<Self> {
        let m = points.len();
        let logs = log_table(degree);
        let cols = degree + 1 - first;
        let a = DMatrix::from_fn(m, cols, |k, j| (-points[k] * logs[first - 1 + j]).exp());
        let mut scale = Vec::with_capacity(cols);
        for n in 0..cols {
            let rms = (a.column(n).norm_squared() / m as f64).sqrt();
            if !(rms.is_finite() && rms > 0.0) {
                return Err(Error::IllConditioned(format!("column n = {} has RMS {rms} over the samples", n + first)));
            }
            scale.push(rms);
        }
        let mut b = a.clone();
        for (n, &s) in scale.iter().enumerate() {
            b.column_mut(n).unscale_mut(s * (m as f64).sqrt());
        }
        // b has unit-norm columns; b = Q R, R = U Σ Vᴴ
        let (q, r) = if m >= cols {
            let qr = b.qr();
            (qr.q(), qr.r())
        } else {
            (DMatrix::identity(m, m), b)
        };
        let svd = r.svd(true, true);
        let u = svd.u.ok_or_else(|| Error::IllConditioned("SVD failed".into()))?;
        let vt = svd.v_t.ok_or_else(|| Error::IllConditioned("SVD failed".into()))?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        if !(smax > 0.0 && smax.is_finite()) {
            return Err(Error::IllConditioned("design matrix has no usable singular values".into()));
        }
        let kept: Vec<usize> = order.into_iter().filter(|&i| svd.singular_values[i] > rank_tol * smax).collect();
        let r_rank = kept.len();
        let qu = &q * &u;
        let sqrt_m = (m as f64).sqrt();
        let g = DMatrix::from_fn(m, r_rank, |k, j| qu[(k, kept[j])] * sqrt_m);
        let v = DMatrix::from_fn(cols, r_rank, |n, j| vt[(kept[j], n)].conj());
        let sigma = kept.iter().map(|&i| svd.singular_values[i]).collect();
        Ok(Self { m, a, scale, g, sigma, v })
    }

    fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Coefficients of the fitted vector `G y`.
    fn coeffs(&self, y: &DVector<Complex64>) -> Vec<Complex64> {
        let z = DVector::from_fn(self.rank(), |j, _| y[j] / self.sigma[j]);
        let x = &self.v * z;
        x.iter().zip(&self.scale).map(|(x, s)| x / s).collect()
    }

    fn residual(&self, c: &[Complex64], target: &[Complex64]) -> Vec<f64> {
        let x = DVector::from_column_slice(c);
        let fitted = &self.a * x;
        fitted.iter().zip(target).map(|(f, g)| (f - g).norm()).collect()
    }

    /// Weighted least squares in the reduced space:
    /// `min Σ w_k |(G y)_k − g_k|² + ridge·‖Σ⁻¹ y‖² + Σ_n p_n |c_n|²`.
    fn solve(&self, w: &[f64], target: &[Complex64], ridge: f64, penalty: Option<&[f64]>) -> Option<Vec<Complex64>> {
        let r = self.rank();
        let extra = penalty.map_or(0, |p| p.len());
        let rows = self.m + r + extra;
        let mut aug = DMatrix::<Complex64>::zeros(rows, r);
        let mut rhs = DVector::<Complex64>::zeros(rows);
        for k in 0..self.m {
            let sw = w[k].sqrt();
            for j in 0..r {
                aug[(k, j)] = self.g[(k, j)] * sw;
            }
            rhs[k] = target[k] * sw;
        }
        let sr = ridge.sqrt();
        for j in 0..r {
            aug[(self.m + j, j)] = Complex64::new(sr / self.sigma[j], 0.0);
        }
        if let Some(p) = penalty {
            // c_n = (V Σ⁻¹ y)_n / scale_n
            for (n, &pn) in p.iter().enumerate() {
                let f = pn.sqrt() / self.scale[n];
                for j in 0..r {
                    aug[(self.m + r + n, j)] = self.v[(n, j)] * (f / self.sigma[j]);
                }
            }
        }
        let qr = aug.qr();
        let qhb = qr.q().adjoint() * rhs;
        let y = qr.r().solve_upper_triangular(&qhb)?;
        if y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Some(self.coeffs(&y))
        } else {
            None
        }
    }
}

/// Outcome of one Lawson run.
struct Lawson {
    coeffs: Vec<Complex64>,
    error: f64,
    weights: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Per-coefficient reweighting `p_n = μ / (|c_n| + δ)`, so `Σ p_n |c_n|² ≈ μ‖c‖₁`.
struct L1Penalty {
    mu: f64,
    /// `n^{-σ}` factors: the penalty acts on `n^{-σ} c_n`.
    factors: Vec<f64>,
    delta: f64,
}

impl L1Penalty {
    fn weights(&self, c: &[Complex64]) -> Vec<f64> {
        c.iter().zip(&self.factors).map(|(c, f)| self.mu * f * f / (c.norm() * f + self.delta)).collect()
    }
}

fn lawson(
    design: &Design,
    target: &[Complex64],
    options: &FitOptions,
    scale: f64,
    init_weights: Option<&[f64]>,
    init_coeffs: Option<&[Complex64]>,
    penalty: Option<&L1Penalty>,
    max_iterations: usize,
) -> Result<Lawson> {
    let m = design.m;
    let n = design.scale.len();
    let mut w: Vec<f64> = match init_weights {
        Some(w0) if w0.len() == m && w0.iter().sum::<f64>() > 0.0 => w0.to_vec(),
        _ => vec![1.0 / m as f64; m],
    };
    let mut best = Lawson {
        coeffs: vec![Complex64::default(); n],
        error: target.iter().map(|g| g.norm()).fold(0.0, f64::max),
        weights: w.clone(),
        iterations: 0,
        converged: false,
    };
    let mut current: Vec<Complex64> = best.coeffs.clone();
    if let Some(c0) = init_coeffs {
        let mut c = c0.to_vec();
        c.resize(n, Complex64::default());
        let e = design.residual(&c, target).into_iter().fold(0.0, f64::max);
        if e < best.error {
            best.error = e;
            best.coeffs = c.clone();
        }
        current = c;
    }
    let mut prev = f64::INFINITY;
    for it in 1..=max_iterations {
        let pw = penalty.map(|p| p.weights(&current));
        let c = design
            .solve(&w, target, options.ridge, pw.as_deref())
            .ok_or_else(|| Error::IllConditioned("weighted least-squares solve produced non-finite coefficients".into()))?;
        let res = design.residual(&c, target);
        let err = res.iter().cloned().fold(0.0, f64::max);
        best.iterations = it;
        let better = if penalty.is_some() { true } else { err < best.error };
        if better {
            best.error = err;
            best.coeffs = c.clone();
            best.weights = w.clone();
        }
        current = c;
        if err <= 1e-15 * scale || (prev - err).abs() < options.tol * scale {
            best.converged = true;
            break;
        }
        prev = err;
        let total: f64 = w.iter().zip(&res).map(|(w, r)| w * r).sum();
        if !(total > 0.0 && total.is_finite()) {
            best.converged = true;
            break;
        }
        for (wk, rk) in w.iter_mut().zip(&res) {
            *wk = *wk * rk / total;
        }
    }
    Ok(best)
}

fn check_set(set: &DiscretizedSet, degree: usize) -> Result<Vec<Complex64>> {
    if set.is_empty() {
        return Err(Error::invalid("sample set is empty"));
    }
    if degree == 0 {
        return Err(Error::invalid("degree must be at least 1"));
    }
    Ok(set.samples())
}

fn provenance(set: &DiscretizedSet, rank: usize, waiver: bool) -> FitProvenance {
    FitProvenance { samples: set.len(), numerical_rank: rank, geometry_waiver: waiver, max_real_part: set.max_real_part() }
}

/// Minimax fit of `Σ_{n≤N} a_n n^{-s}` to `g` over the samples of `set`.
pub fn minimax_fit(set: &DiscretizedSet, g: &TargetFunction, degree: usize, options: &FitOptions) -> Result<FitResult> {
    minimax_fit_warm(set, g, degree, options, None)
}

fn minimax_fit_warm(
    set: &DiscretizedSet,
    g: &TargetFunction,
    degree: usize,
    options: &FitOptions,
    warm: Option<(&[f64], &[Complex64])>,
) -> Result<FitResult> {
    let points = check_set(set, degree)?;
    let target = g.values_at(&points)?;
    let scale = target.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(FitResult {
            polynomial: DirichletPolynomial::zero(degree),
            minimax_error: 0.0,
            constraint_value: None,
            iterations: 0,
            converged: true,
            provenance: provenance(set, 0, false),
        });
    }
    let design = Design::new(&points, 1, degree, options.rank_tol)?;
    // exact members of the span are candidates in their own right
    let member = g.as_dirichlet().filter(|p| p.degree() <= degree).map(|p| p.coeffs().to_vec());
    let start = match (member, warm.map(|w| w.1.to_vec())) {
        (Some(a), Some(b)) => {
            let err = |c: &[Complex64]| {
                let mut c = c.to_vec();
                c.resize(degree, Complex64::default());
                design.residual(&c, &target).into_iter().fold(0.0, f64::max)
            };
            Some(if err(&a) <= err(&b) { a } else { b })
        }
        (a, b) => a.or(b),
    };
    let mut run = lawson(&design, &target, options, scale, warm.map(|w| w.0), start.as_deref(), None, options.max_iterations)?;
    polish(&design, &target, &mut run);
    let polynomial = DirichletPolynomial::new(run.coeffs.clone())?;
    let minimax_error = sampled_error(&polynomial, &points, &target)?;
    Ok(FitResult {
        polynomial,
        minimax_error,
        constraint_value: None,
        iterations: run.iterations,
        converged: run.converged,
        provenance: provenance(set, design.rank(), false),
    })
}

/// One unregularized solve with the final weights, kept only if it lowers the sup-error.
fn polish(design: &Design, target: &[Complex64], run: &mut Lawson) {
    if let Some(c) = design.solve(&run.weights, target, 0.0, None) {
        let err = design.residual(&c, target).into_iter().fold(0.0, f64::max);
        if err < run.error {
            run.error = err;
            run.coeffs = c;
        }
    }
}

/// Fit of `g` on `set` by `h` with `‖h − f‖_σ ≤ eps`.
///
/// `h = f + d`, where `d` minimizes the sup-error of `d − (g − f)` under
/// `Σ |d_n| n^{-σ} ≤ eps`. The ℓ1 budget is handled by a reweighted quadratic
/// penalty whose weight is bisected until the budget holds; the result is
/// finally scaled into the ball, so the constraint holds exactly as recomputed.
pub fn constrained_fit(
    set: &DiscretizedSet,
    g: &TargetFunction,
    f: &DirichletPolynomial,
    sigma: f64,
    eps: f64,
    degree: usize,
    options: &FitOptions,
) -> Result<FitResult> {
    constrained_fit_from(set, g, f, sigma, eps, 1, degree, options)
}

/// [`constrained_fit`] with the correction `h − f` restricted to the indices
/// `first..=degree`; coefficients of `f` below `first` are kept verbatim.
#[allow(clippy::too_many_arguments)]
pub fn constrained_fit_from(
    set: &DiscretizedSet,
    g: &TargetFunction,
    f: &DirichletPolynomial,
    sigma: f64,
    eps: f64,
    first: usize,
    degree: usize,
    options: &FitOptions,
) -> Result<FitResult> {
    if first == 0 || first > degree {
        return Err(Error::invalid(format!("free indices {first}..={degree} are empty")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let points = check_set(set, degree)?;
    if degree < f.degree() {
        return Err(Error::invalid(format!("degree {degree} is below deg f = {}", f.degree())));
    }
    let max_re = set.max_real_part();
    let waiver = max_re > 0.0;
    if waiver && !options.geometry_waiver {
        return Err(Error::invalid(format!("set reaches Re s = {max_re} > 0; pass a geometry waiver to fit anyway")));
    }
    let error_target = options.error_target.unwrap_or(eps);
    let g_vals = g.values_at(&points)?;
    let mut rhs = Vec::with_capacity(points.len());
    for (&s, &gv) in points.iter().zip(&g_vals) {
        rhs.push(gv - f.evaluate(s)?);
    }
    let f_full = f.resized(degree);
    let scale = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cols = degree + 1 - first;
    let finish = |tail: Vec<Complex64>, iterations: usize, rank: usize| -> Result<FitResult> {
        let mut d = vec![Complex64::default(); first - 1];
        d.extend(tail);
        let d = DirichletPolynomial::new(d)?;
        let mut d_norm = d.seminorm_sigma(sigma);
        let mut d = d;
        if d_norm > eps {
            d = d.scale(Complex64::new(eps / d_norm * (1.0 - 1e-12), 0.0));
            d_norm = d.seminorm_sigma(sigma);
        }
        let h = &f_full + &d;
        let constraint = (&h - &f_full).seminorm_sigma(sigma);
        let minimax_error = sampled_error(&h, &points, &g_vals)?;
        let _ = d_norm;
        Ok(FitResult {
            polynomial: h,
            minimax_error,
            constraint_value: Some(constraint),
            iterations,
            converged: constraint <= eps && minimax_error <= error_target,
            provenance: provenance(set, rank, waiver),
        })
    };
    if scale == 0.0 {
        return finish(vec![Complex64::default(); cols], 0, 0);
    }
    let design = Design::new(&points, first, degree, options.rank_tol)?;
    let factors = design_factors(first, degree, sigma);
    let l1 = |c: &[Complex64]| -> f64 { c.iter().zip(&factors).map(|(c, f)| c.norm() * f).sum() };

    // the constraint may not bind at all
    let mut free = lawson(&design, &rhs, options, scale, None, None, None, options.max_iterations)?;
    polish(&design, &rhs, &mut free);
    let mut iterations = free.iterations;
    if l1(&free.coeffs) <= eps {
        return finish(free.coeffs, iterations, design.rank());
    }

    let delta = 1e-3 * eps / cols as f64;
    let inner = options.max_iterations.min(60);
    // bracket the penalty weight on a log scale
    let (mut lo, mut hi) = ((scale * scale * 1e-12).ln(), (scale * scale * 1e6 / eps).ln());
    let mut feasible: Option<Lawson> = None;
    let mut warm_w = free.weights.clone();
    for _ in 0..options.penalty_steps {
        let mid = 0.5 * (lo + hi);
        let penalty = L1Penalty { mu: mid.exp(), factors: factors.clone(), delta };
        let run = lawson(&design, &rhs, options, scale, Some(&warm_w), None, Some(&penalty), inner)?;
        iterations += run.iterations;
        if l1(&run.coeffs) <= eps {
            hi = mid;
            warm_w = run.weights.clone();
            if feasible.as_ref().is_none_or(|f| run.error < f.error) {
                feasible = Some(run);
            }
        } else {
            lo = mid;
            if feasible.is_none() {
                // keep a scaled-down candidate in case nothing lands inside
                feasible = Some(Lawson { coeffs: run.coeffs.clone(), error: f64::INFINITY, ..run });
            }
        }
        if hi - lo < 0.05 {
            break;
        }
    }
    let chosen = feasible.map(|f| f.coeffs).unwrap_or_else(|| vec![Complex64::default(); cols]);
    // compare against plain shrinkage of the unconstrained fit
    let shrink_norm = l1(&free.coeffs);
    let shrunk: Vec<Complex64> = free.coeffs.iter().map(|c| c * (eps / shrink_norm)).collect();
    let err_of = |c: &[Complex64]| {
        let n = l1(c);
        let s = if n > eps { eps / n } else { 1.0 };
        let c: Vec<Complex64> = c.iter().map(|v| v * s).collect();
        design.residual(&c, &rhs).into_iter().fold(0.0, f64::max)
    };
    let best = if err_of(&shrunk) < err_of(&chosen) { shrunk } else { chosen };
    finish(best, iterations, design.rank())
}

fn design_factors(first: usize, degree: usize, sigma: f64) -> Vec<f64> {
    (first..=degree).map(|n| (n as f64).powf(-sigma)).collect()
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    #[serde(rename = "N")]
    pub degree: usize,
    pub minimax_error: f64,
}

/// Minimax errors along ascending degrees. Each fit is warm-started from the
/// previous one, so the error column never increases.
pub fn convergence_study(set: &DiscretizedSet, g: &TargetFunction, degrees: &[usize], options: &FitOptions) -> Result<Vec<StudyRow>> {
    if degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("degrees must be strictly ascending"));
    }
    let mut rows = Vec::with_capacity(degrees.len());
    let mut warm: Option<(Vec<f64>, Vec<Complex64>)> = None;
    for &n in degrees {
        let fit = minimax_fit_warm(set, g, n, options, warm.as_ref().map(|(w, c)| (w.as_slice(), c.as_slice())))?;
        let weights = lawson_weights_for(set, g, &fit)?;
        warm = Some((weights, fit.polynomial.coeffs().to_vec()));
        rows.push(StudyRow { degree: n, minimax_error: fit.minimax_error });
    }
    Ok(rows)
}

/// Residual-proportional weights for warm-starting the next fit.
fn lawson_weights_for(set: &DiscretizedSet, g: &TargetFunction, fit: &FitResult) -> Result<Vec<f64>> {
    let points = set.samples();
    let target = g.values_at(&points)?;
    let mut w = Vec::with_capacity(points.len());
    for (&s, &v) in points.iter().zip(&target) {
        w.push((fit.polynomial.evaluate(s)? - v).norm());
    }
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|x| *x /= total);
    }
    Ok(w)
}

/// CSV with header `N,minimax_error`.
pub fn study_csv(rows: &[StudyRow]) -> String {
    csv_table(&["N", "minimax_error"], rows.iter().map(|r| vec![r.degree.to_string(), format_f64(r.minimax_error)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact::{CompactSetSpec, Density};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disc_set() -> DiscretizedSet {
        CompactSetSpec::disc(c(-1.0, 0.0), 0.5).unwrap().discretize(&Density::default()).unwrap()
    }

    #[test]
    fn constant_is_exact() {
        let set = disc_set();
        for n in [1, 5, 20] {
            let fit = minimax_fit(&set, &TargetFunction::constant(c(2.0, -1.0)), n, &FitOptions::default()).unwrap();
            assert!(fit.minimax_error <= 1e-10, "N={n}: {}", fit.minimax_error);
            assert!((fit.polynomial.coeff(1) - c(2.0, -1.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn basis_element_is_recovered() {
        let set = disc_set();
        let g = TargetFunction::dirichlet(&DirichletPolynomial::monomial(2, c(1.0, 0.0)));
        for n in [2, 3, 8] {
            let fit = minimax_fit(&set, &g, n, &FitOptions::default()).unwrap();
            assert!(fit.minimax_error <= 1e-8, "N={n}: {}", fit.minimax_error);
        }
        let fit = minimax_fit(&set, &g, 2, &FitOptions::default()).unwrap();
        assert!((fit.polynomial.coeff(1)).norm() < 1e-6 && (fit.polynomial.coeff(2) - 1.0).norm() < 1e-6);
    }

    #[test]
    fn exp_decays_and_reported_error_is_faithful() {
        let set = disc_set();
        let e10 = minimax_fit(&set, &TargetFunction::Exp, 10, &FitOptions::default()).unwrap();
        let e60 = minimax_fit(&set, &TargetFunction::Exp, 60, &FitOptions::default()).unwrap();
        assert!(e60.minimax_error < 0.5 * e10.minimax_error, "{} vs {}", e60.minimax_error, e10.minimax_error);
        assert!(e60.minimax_error < 1e-2);
        let recomputed = sampled_error(&e60.polynomial, &set.samples(), &TargetFunction::Exp.values_at(&set.samples()).unwrap()).unwrap();
        assert!((recomputed - e60.minimax_error).abs() <= 1e-10);
    }

    #[test]
    fn minimax_beats_least_squares() {
        // least-squares oracle: the unweighted solve is the first Lawson iterate
        let set = disc_set();
        let pts = set.samples();
        let g = TargetFunction::Exp.values_at(&pts).unwrap();
        let design = Design::new(&pts, 1, 10, 1e-13).unwrap();
        let ls = design.solve(&vec![1.0 / pts.len() as f64; pts.len()], &g, 1e-12, None).unwrap();
        let ls_err = design.residual(&ls, &g).into_iter().fold(0.0, f64::max);
        let fit = minimax_fit(&set, &TargetFunction::Exp, 10, &FitOptions::default()).unwrap();
        assert!(fit.minimax_error <= ls_err);
    }

    #[test]
    fn study_is_monotone_and_csv() {
        let set = disc_set();
        let rows = convergence_study(&set, &TargetFunction::Exp, &[10, 20, 40, 60], &FitOptions::default()).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].minimax_error <= w[0].minimax_error + 1e-9);
        }
        let csv = study_csv(&rows);
        assert!(csv.starts_with("N,minimax_error\n10,"));
        let zero = convergence_study(&set, &TargetFunction::constant(c(0.0, 0.0)), &[1, 3], &FitOptions::default()).unwrap();
        assert!(zero.iter().all(|r| r.minimax_error <= 1e-12));
        let p5 = DirichletPolynomial::from_real(&[1.0, -0.5, 0.25, 0.0, 2.0]).unwrap();
        let member = convergence_study(&set, &TargetFunction::dirichlet(&p5), &[5, 10], &FitOptions::default()).unwrap();
        assert!(member.iter().all(|r| r.minimax_error <= 1e-8), "{member:?}");
    }

    #[test]
    fn sampled_target_alignment() {
        let set = disc_set();
        let bad = TargetFunction::Sampled { values: vec![c(1.0, 0.0); 3] };
        assert!(matches!(minimax_fit(&set, &bad, 3, &FitOptions::default()), Err(Error::InvalidInput(_))));
        let good = TargetFunction::Sampled { values: vec![c(1.0, 0.0); set.len()] };
        assert!(minimax_fit(&set, &good, 3, &FitOptions::default()).unwrap().minimax_error < 1e-10);
    }

    #[test]
    fn inactive_constraint_matches_plain_fit() {
        let set = disc_set();
        let zero = DirichletPolynomial::zero(1);
        let plain = minimax_fit(&set, &TargetFunction::Exp, 12, &FitOptions::default()).unwrap();
        let cons = constrained_fit(&set, &TargetFunction::Exp, &zero, 1.0, 1e6, 12, &FitOptions::default()).unwrap();
        assert!((plain.minimax_error - cons.minimax_error).abs() <= 1e-8);
        let diff = (&plain.polynomial - &cons.polynomial).seminorm_sigma(0.0);
        assert!(diff <= 1e-8 * (1.0 + plain.polynomial.seminorm_sigma(0.0)), "{diff}");
    }

    #[test]
    fn target_equal_to_f_returns_f() {
        let set = disc_set();
        let f = DirichletPolynomial::from_real(&[0.5, 1.0, 0.0, -0.25]).unwrap();
        let fit = constrained_fit(&set, &TargetFunction::dirichlet(&f), &f, 0.5, 1e-3, 6, &FitOptions::default()).unwrap();
        assert!(fit.minimax_error <= 1e-12 && fit.constraint_value.unwrap() <= 1e-12);
        assert!(fit.converged);
    }

    #[test]
    fn constraint_is_respected() {
        let set = CompactSetSpec::k_m(1).translate(c(-0.5, 0.0)).discretize(&Density::uniform(0.05)).unwrap();
        let f = DirichletPolynomial::monomial(2, c(1.0, 0.0));
        let fit = constrained_fit(&set, &TargetFunction::constant(c(1.0, 0.0)), &f, 1.0, 0.5, 30, &FitOptions::default()).unwrap();
        assert!(fit.constraint_value.unwrap() <= 0.5);
        assert!((&fit.polynomial - &f.resized(30)).seminorm_sigma(1.0) <= 0.5);
    }

    #[test]
    fn constrained_preconditions() {
        let set = disc_set();
        let f = DirichletPolynomial::zero(1);
        let g = TargetFunction::Exp;
        let o = FitOptions::default();
        assert!(constrained_fit(&set, &g, &f, 0.0, 1.0, 3, &o).is_err());
        assert!(constrained_fit(&set, &g, &f, 1.0, -1.0, 3, &o).is_err());
        let right = CompactSetSpec::disc(c(0.5, 0.0), 0.25).unwrap().discretize(&Density::default()).unwrap();
        assert!(matches!(constrained_fit(&right, &g, &f, 1.0, 1.0, 3, &o), Err(Error::InvalidInput(_))));
        let waived = FitOptions { geometry_waiver: true, ..o };
        assert!(constrained_fit(&right, &g, &f, 1.0, 1.0, 3, &waived).unwrap().provenance.geometry_waiver);
    }

    #[test]
    fn target_json() {
        let t = TargetFunction::Exp.plus(TargetFunction::ExpInverse { center: c(0.0, 0.0) }.scaled(c(2.0, 0.0)));
        let s = serde_json::to_string(&t).unwrap();
        let back: TargetFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(matches!(TargetFunction::Inverse { center: c(1.0, 0.0) }.evaluate(c(1.0, 0.0)), Err(Error::Pole(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn scale_equivariance(re in -2.0..2.0f64, im in -2.0..2.0f64) {
            prop_assume!(re.hypot(im) > 0.1);
            let set = CompactSetSpec::disc(c(-1.0, 0.0), 0.5).unwrap().discretize(&Density::uniform(0.05)).unwrap();
            let k = c(re, im);
            let base = minimax_fit(&set, &TargetFunction::Exp, 8, &FitOptions::default()).unwrap();
            let scaled = minimax_fit(&set, &TargetFunction::Exp.scaled(k), 8, &FitOptions::default()).unwrap();
            prop_assert!((scaled.minimax_error - k.norm() * base.minimax_error).abs() <= 1e-6 * k.norm());
        }
    }
}
