//! The finite Bohr correspondence `n = p^α ↔ z^α` between Dirichlet
//! polynomials and polynomials in finitely many variables, and numerical
//! estimates of both sides of the sup-norm identity
//! `sup_{Re s>0} |Σ a_n n^{-s}| = sup_{z ∈ 𝔻^k} |Σ a_{p^α} z^α|`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{sup_norm_halfplane, DirichletPolynomial, SupNormPlan};
use crate::error::{Error, Result};
use crate::lattice;

/// Ascending primes up to (and including) `bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

const SHARED_BOUND: u64 = 1 << 20;

impl PrimeTable {
    /// Sieve of Eratosthenes.
    pub fn sieve(bound: u64) -> Self {
        let b = bound as usize;
        let mut composite = vec![false; b + 1];
        let mut primes = Vec::new();
        for i in 2..=b {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j <= b {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        Self { bound, primes }
    }

    /// A table covering `bound`, served from a process-wide cache when possible.
    pub fn covering(bound: u64) -> std::borrow::Cow<'static, PrimeTable> {
        static SHARED: OnceLock<PrimeTable> = OnceLock::new();
        if bound <= SHARED_BOUND {
            std::borrow::Cow::Borrowed(SHARED.get_or_init(|| PrimeTable::sieve(SHARED_BOUND)))
        } else {
            std::borrow::Cow::Owned(PrimeTable::sieve(bound))
        }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `π(n)`, for `n ≤ bound`.
    pub fn count_up_to(&self, n: u64) -> usize {
        debug_assert!(n <= self.bound);
        self.primes.partition_point(|&p| p <= n)
    }
}

/// Exponent vector `α`, trailing zeros trimmed.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex(Vec<u32>);

impl From<Vec<u32>> for MultiIndex {
    fn from(mut v: Vec<u32>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        MultiIndex(v)
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(m: MultiIndex) -> Self {
        m.0
    }
}

impl MultiIndex {
    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0.get(j).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let n = self.len().max(other.len());
        MultiIndex((0..n).map(|j| self.get(j) + other.get(j)).collect())
    }

    /// `p^α`, or `None` on overflow.
    pub fn to_integer(&self, table: &PrimeTable) -> Option<u64> {
        let mut n: u64 = 1;
        for (j, &e) in self.0.iter().enumerate() {
            let p = *table.primes.get(j)?;
            for _ in 0..e {
                n = n.checked_mul(p)?;
            }
        }
        Some(n)
    }
}

/// Exponents of `n` over the table's primes: `p^α = n`.
pub fn factorize_to_multiindex(n: u64, table: &PrimeTable) -> Result<MultiIndex> {
    if n == 0 {
        return Err(Error::invalid("cannot factorize 0"));
    }
    let mut rem = n;
    let mut exps = Vec::new();
    for &p in &table.primes {
        if p * p > rem {
            break;
        }
        let mut e = 0;
        while rem % p == 0 {
            rem /= p;
            e += 1;
        }
        exps.push(e);
    }
    if rem > 1 {
        // rem is prime
        if rem > table.bound {
            return Err(Error::NeedsLargerTable { n, bound: table.bound });
        }
        let idx = table.primes.partition_point(|&p| p < rem);
        if exps.len() <= idx {
            exps.resize(idx + 1, 0);
        }
        exps[idx] += 1;
    }
    Ok(MultiIndex::from(exps))
}

/// `Σ c_α z^α`, the Bohr image of a Dirichlet polynomial of degree `degree_bound`.
///
/// Zero coefficients are never stored; `variable_count = π(degree_bound)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPolynomial {
    terms: BTreeMap<MultiIndex, Complex64>,
    variable_count: usize,
    degree_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedTerm {
    pub exponents: MultiIndex,
    pub coeff: Complex64,
}

impl LiftedPolynomial {
    /// Builds from terms; duplicate exponents are summed.
    pub fn new(terms: impl IntoIterator<Item = (MultiIndex, Complex64)>) -> Result<Self> {
        Self::with_degree_bound(terms, 1)
    }

    /// Like [`LiftedPolynomial::new`], with the Dirichlet degree at least `degree_bound`.
    pub fn with_degree_bound(terms: impl IntoIterator<Item = (MultiIndex, Complex64)>, degree_bound: usize) -> Result<Self> {
        let mut map: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (alpha, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::invalid(format!("non-finite coefficient {c}")));
            }
            *map.entry(alpha).or_default() += c;
        }
        map.retain(|_, c| c.norm_sqr() != 0.0);
        let table = PrimeTable::covering(SHARED_BOUND);
        let mut degree = degree_bound.max(1) as u64;
        for alpha in map.keys() {
            let n = if alpha.len() <= table.primes.len() { alpha.to_integer(&table) } else { None }
                .ok_or_else(|| Error::OutOfRange(format!("p^α overflows for α = {:?}", alpha.0)))?;
            degree = degree.max(n);
        }
        if degree > MAX_UNLIFT_DEGREE {
            return Err(Error::OutOfRange(format!("p^α = {degree} exceeds the supported degree {MAX_UNLIFT_DEGREE}")));
        }
        let variable_count = PrimeTable::covering(degree).count_up_to(degree);
        Ok(Self { terms: map, variable_count, degree_bound: degree as usize })
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.terms
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or_default()
    }

    /// Variables that occur with a positive exponent in some term.
    pub fn active_variables(&self) -> Vec<usize> {
        let mut seen = vec![false; self.variable_count];
        for alpha in self.terms.keys() {
            for (j, &e) in alpha.0.iter().enumerate() {
                if e > 0 {
                    seen[j] = true;
                }
            }
        }
        (0..self.variable_count).filter(|&j| seen[j]).collect()
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(alpha, &c)| alpha.0.iter().enumerate().fold(c, |acc, (j, &e)| acc * z[j].powu(e)))
            .sum()
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, &x) in &self.terms {
            for (b, &y) in &other.terms {
                terms.push((a.add(b), x * y));
            }
        }
        Self::with_degree_bound(terms, self.degree_bound * other.degree_bound)
    }
}

impl Serialize for LiftedPolynomial {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<LiftedTerm> = self
            .terms
            .iter()
            .map(|(a, &c)| LiftedTerm { exponents: a.clone(), coeff: c })
            .collect();
        terms.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LiftedPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<LiftedTerm>::deserialize(deserializer)?;
        LiftedPolynomial::new(terms.into_iter().map(|t| (t.exponents, t.coeff))).map_err(serde::de::Error::custom)
    }
}

/// Largest Dirichlet degree [`unlift`] will materialize.
pub const MAX_UNLIFT_DEGREE: u64 = 1 << 26;

/// `n^{-s} ↦ z^α` with `n = p^α`.
pub fn lift(p: &DirichletPolynomial) -> LiftedPolynomial {
    let n = p.degree() as u64;
    let table = PrimeTable::covering(n);
    let terms = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() != 0.0)
        .map(|(k, &c)| {
            let alpha = factorize_to_multiindex(k as u64 + 1, &table).expect("table covers the degree");
            (alpha, c)
        })
        .collect();
    LiftedPolynomial { terms, variable_count: table.count_up_to(n), degree_bound: p.degree() }
}

/// `z^α ↦ (p^α)^{-s}`; the degree is `max(degree_bound, max p^α)`.
pub fn unlift(q: &LiftedPolynomial) -> Result<DirichletPolynomial> {
    let table = PrimeTable::covering(q.degree_bound as u64);
    let mut coeffs = vec![Complex64::default(); q.degree_bound];
    for (alpha, &c) in &q.terms {
        let n = alpha
            .to_integer(&table)
            .filter(|&n| n <= q.degree_bound as u64)
            .ok_or_else(|| Error::OutOfRange(format!("p^α out of range for α = {:?}", alpha.0)))?;
        coeffs[n as usize - 1] = c;
    }
    DirichletPolynomial::new(coeffs)
}

/// Sampling parameters for [`polydisc_sup_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolydiscPlan {
    /// Angular resolution per variable before the grid budget caps it.
    pub angles_per_variable: usize,
    /// Upper bound on the number of torus grid points.
    pub grid_budget: usize,
    pub max_variables: usize,
    /// Best grid points (plus as many random points) used to start local ascent.
    pub multistarts: usize,
    pub refine_tol: f64,
    pub max_refinements: u32,
    pub seed: u64,
}

impl Default for PolydiscPlan {
    fn default() -> Self {
        Self {
            angles_per_variable: 64,
            grid_budget: 1 << 20,
            max_variables: 8,
            multistarts: 24,
            refine_tol: 1e-9,
            max_refinements: 1,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolydiscEstimate {
    /// Largest `|q|` found on the torus; a lower bound of the polydisc sup.
    pub value: f64,
    /// Distinct local maxima found, best first, as angles of all
    /// `variable_count` variables (inactive ones are 0).
    pub maxima: Vec<(f64, Vec<f64>)>,
    pub resolution: usize,
    pub refinements: u32,
}

/// Lower-bound estimate of `sup_{z ∈ 𝔻^k} |q(z)|` from the torus `|z_j| = 1`.
///
/// A torus grid (per-variable resolution limited by the grid budget) seeds
/// multi-start Newton ascent of `|q(e^{iθ})|²`; refinement doubles the
/// resolution until the estimate stops moving.
pub fn polydisc_sup_estimate(q: &LiftedPolynomial, plan: &PolydiscPlan) -> Result<PolydiscEstimate> {
    if q.variable_count > plan.max_variables {
        return Err(Error::ResourceLimit(format!(
            "{} variables exceed the plan's limit of {}",
            q.variable_count, plan.max_variables
        )));
    }
    if plan.angles_per_variable == 0 || plan.grid_budget == 0 {
        return Err(Error::invalid("polydisc plan has no sample points"));
    }
    let active = q.active_variables();
    let torus = TorusPoly::new(q, &active);
    if active.is_empty() {
        let v = torus.value(&[]).norm();
        return Ok(PolydiscEstimate { value: v, maxima: vec![(v, vec![0.0; q.variable_count])], resolution: 1, refinements: 0 });
    }
    let k = active.len();
    let cap = (plan.grid_budget as f64).powf(1.0 / k as f64).floor() as usize;
    let mut resolution = plan.angles_per_variable.min(cap).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut maxima = torus.search(resolution, plan.multistarts, &mut rng);
    let mut refinements = 0;
    while refinements < plan.max_refinements && (2 * resolution).pow(k as u32) <= 4 * plan.grid_budget {
        resolution *= 2;
        refinements += 1;
        let next = torus.search(resolution, plan.multistarts, &mut rng);
        let gain = next[0].0 - maxima[0].0;
        maxima = merge_maxima(maxima, next);
        if gain.abs() <= plan.refine_tol * maxima[0].0.max(1.0) {
            break;
        }
    }
    let maxima: Vec<(f64, Vec<f64>)> = maxima
        .into_iter()
        .map(|(v, th)| {
            let mut full = vec![0.0; q.variable_count];
            for (&j, &t) in active.iter().zip(&th) {
                full[j] = t.rem_euclid(TAU);
            }
            (v, full)
        })
        .collect();
    Ok(PolydiscEstimate { value: maxima[0].0, maxima, resolution, refinements })
}

fn merge_maxima(a: Vec<(f64, Vec<f64>)>, b: Vec<(f64, Vec<f64>)>) -> Vec<(f64, Vec<f64>)> {
    let mut all = a;
    all.extend(b);
    dedup_maxima(all)
}

fn dedup_maxima(mut all: Vec<(f64, Vec<f64>)>) -> Vec<(f64, Vec<f64>)> {
    all.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for cand in all {
        let dup = out.iter().any(|o| {
            o.1.iter().zip(&cand.1).all(|(a, b)| {
                let d = (a - b).rem_euclid(TAU);
                d.min(TAU - d) < 1e-4
            })
        });
        if !dup {
            out.push(cand);
        }
        if out.len() >= 8 {
            break;
        }
    }
    out
}

/// `q` restricted to its active variables, as a trigonometric polynomial in θ.
struct TorusPoly {
    exps: Vec<Vec<f64>>,
    coeffs: Vec<Complex64>,
}

impl TorusPoly {
    fn new(q: &LiftedPolynomial, active: &[usize]) -> Self {
        let exps = q.terms.keys().map(|a| active.iter().map(|&j| a.get(j) as f64).collect()).collect();
        Self { exps, coeffs: q.terms.values().copied().collect() }
    }

    fn phases<'a>(&'a self, theta: &'a [f64]) -> impl Iterator<Item = (Complex64, &'a [f64])> + 'a {
        self.exps.iter().zip(&self.coeffs).map(move |(e, &c)| {
            let ph: f64 = e.iter().zip(theta).map(|(a, t)| a * t).sum();
            (c * Complex64::from_polar(1.0, ph), e.as_slice())
        })
    }

    fn value(&self, theta: &[f64]) -> Complex64 {
        self.phases(theta).map(|(v, _)| v).sum()
    }

    /// `f = |q|²`, its gradient and Hessian in θ.
    fn second_order(&self, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let k = theta.len();
        let mut q = Complex64::default();
        let mut dq = vec![Complex64::default(); k];
        let mut ddq = DMatrix::<Complex64>::zeros(k, k);
        let i = Complex64::i();
        for (v, e) in self.phases(theta) {
            q += v;
            for a in 0..k {
                if e[a] == 0.0 {
                    continue;
                }
                dq[a] += i * e[a] * v;
                for b in 0..k {
                    ddq[(a, b)] -= e[a] * e[b] * v;
                }
            }
        }
        let f = q.norm_sqr();
        let g = DVector::from_fn(k, |a, _| 2.0 * (q.conj() * dq[a]).re);
        let h = DMatrix::from_fn(k, k, |a, b| 2.0 * (dq[a].conj() * dq[b] + q.conj() * ddq[(a, b)]).re);
        (f, g, h)
    }

    fn search(&self, resolution: usize, starts: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, Vec<f64>)> {
        let k = self.exps.first().map_or(0, |e| e.len());
        let int_exps: Vec<Vec<usize>> = self.exps.iter().map(|e| e.iter().map(|&x| x as usize).collect()).collect();
        let roots: Vec<Complex64> = (0..resolution).map(|m| Complex64::from_polar(1.0, TAU * m as f64 / resolution as f64)).collect();
        let total = resolution.pow(k as u32);
        // keep the best `starts` grid points
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(starts + 1);
        let mut digits = vec![0usize; k];
        for idx in 0..total {
            let mut v = Complex64::default();
            for (e, &c) in int_exps.iter().zip(&self.coeffs) {
                let m: usize = e.iter().zip(&digits).map(|(a, d)| a * d).sum();
                v += c * roots[m % resolution];
            }
            let m = v.norm();
            if best.len() < starts || m > best.last().unwrap().0 {
                let pos = best.partition_point(|x| x.0 >= m);
                best.insert(pos, (m, idx));
                best.truncate(starts.max(1));
            }
            for d in digits.iter_mut() {
                *d += 1;
                if *d < resolution {
                    break;
                }
                *d = 0;
            }
        }
        let mut seeds: Vec<Vec<f64>> = best
            .iter()
            .map(|&(_, mut idx)| {
                (0..k)
                    .map(|_| {
                        let d = idx % resolution;
                        idx /= resolution;
                        TAU * d as f64 / resolution as f64
                    })
                    .collect()
            })
            .collect();
        for _ in 0..starts / 2 {
            seeds.push((0..k).map(|_| rng.gen::<f64>() * TAU).collect());
        }
        dedup_maxima(seeds.into_iter().map(|s| self.ascend(s)).collect())
    }

    /// Damped Newton ascent of `|q|²`, falling back to gradient steps.
    fn ascend(&self, mut theta: Vec<f64>) -> (f64, Vec<f64>) {
        let k = theta.len();
        for _ in 0..200 {
            let (f, g, h) = self.second_order(&theta);
            if g.norm() <= 1e-13 * f.max(1e-300) {
                break;
            }
            let neg_h = -h;
            let step = match neg_h.clone().cholesky() {
                Some(ch) => ch.solve(&g),
                None => g.clone() / (neg_h.norm().max(1.0)),
            };
            let mut scale = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let cand: Vec<f64> = (0..k).map(|a| theta[a] + scale * step[a]).collect();
                if self.value(&cand).norm_sqr() > f {
                    theta = cand;
                    moved = true;
                    break;
                }
                scale *= 0.5;
            }
            if !moved {
                break;
            }
        }
        (self.value(&theta).norm(), theta)
    }
}

/// Both sides of the sup-norm identity for one polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    /// Rectangle-grid estimate on `Re s ≥ 0`.
    pub halfplane_grid: f64,
    /// Best `|P(it)|` at Kronecker-steered points of the imaginary axis.
    pub halfplane_steered: f64,
    pub steered_point: Complex64,
    /// `max(halfplane_grid, halfplane_steered)`.
    pub halfplane: f64,
    pub polydisc: f64,
    /// `|halfplane − polydisc| / max(halfplane, polydisc)`.
    pub relative_gap: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsometryPlan {
    pub halfplane: SupNormPlan,
    pub polydisc: PolydiscPlan,
    /// Largest `|t|` a steered probe may use.
    pub max_probe_height: f64,
    /// Relative tolerance of the check.
    pub tolerance: f64,
}

impl Default for IsometryPlan {
    fn default() -> Self {
        Self {
            halfplane: SupNormPlan::default(),
            polydisc: PolydiscPlan::default(),
            max_probe_height: 1e10,
            tolerance: 0.02,
        }
    }
}

/// Compares the half-plane sup of `p` (at `σ0 = 0`) with the torus sup of its lift.
///
/// Every half-plane value is `|P(s)|` at an explicit point with `Re s ≥ 0`.
/// Besides the rectangle grid, probes on the imaginary axis are placed where
/// the flow `t ↦ (p_j^{-it})_j` passes close to the torus maximisers; those
/// times come from a reduced lattice over the `log p_j`.
pub fn isometry_check(p: &DirichletPolynomial, plan: &IsometryPlan) -> Result<IsometryReport> {
    let grid = sup_norm_halfplane(p, 0.0, &plan.halfplane)?;
    let q = lift(p);
    let torus = polydisc_sup_estimate(&q, &plan.polydisc)?;
    let active = q.active_variables();
    let table = PrimeTable::covering(p.degree() as u64);
    let logs: Vec<f64> = active.iter().map(|&j| (table.primes()[j] as f64).ln()).collect();

    let mut steered = (p.coeff(1).norm(), Complex64::new(0.0, 0.0));
    if !active.is_empty() {
        let torus_poly = TorusPoly::new(&q, &active);
        for (_, angles) in torus.maxima.iter().take(4) {
            let theta: Vec<f64> = active.iter().map(|&j| angles[j]).collect();
            let (_, _, h) = torus_poly.second_order(&theta);
            // positive semidefinite near a maximum; regularize flat directions
            let mut metric = -h;
            let ridge = 1e-6 * metric.diagonal().abs().max().max(1e-12);
            for a in 0..metric.nrows() {
                metric[(a, a)] += ridge;
            }
            for t in lattice::steering_times(&logs, &theta, &metric, plan.max_probe_height) {
                let (v, s) = refine_on_axis(p, t)?;
                if v > steered.0 {
                    steered = (v, s);
                }
            }
        }
    }
    let halfplane = grid.value.max(steered.0);
    let denom = halfplane.max(torus.value);
    let gap = if denom > 0.0 { (halfplane - torus.value).abs() / denom } else { 0.0 };
    Ok(IsometryReport {
        halfplane_grid: grid.value,
        halfplane_steered: steered.0,
        steered_point: steered.1,
        halfplane,
        polydisc: torus.value,
        relative_gap: gap,
        tolerance: plan.tolerance,
        within_tolerance: gap <= plan.tolerance,
    })
}

/// Local maximisation of `|P(it)|` around `t0` (coarse scan, then golden section).
fn refine_on_axis(p: &DirichletPolynomial, t0: f64) -> Result<(f64, Complex64)> {
    let f = |t: f64| -> Result<f64> { Ok(p.evaluate(Complex64::new(0.0, t))?.norm()) };
    let radius = 0.25;
    let steps = 50;
    let mut best = (f(t0)?, t0);
    for i in 0..=steps {
        let t = t0 - radius + 2.0 * radius * i as f64 / steps as f64;
        let v = f(t)?;
        if v > best.0 {
            best = (v, t);
        }
    }
    let h = 2.0 * radius / steps as f64;
    let (mut a, mut b) = (best.1 - h, best.1 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    for (v, t) in [(fc, c), (fd, d)] {
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok((best.0, Complex64::new(0.0, best.1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sieve_and_counts() {
        let t = PrimeTable::sieve(30);
        assert_eq!(t.primes(), &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(t.count_up_to(6), 3);
        assert_eq!(t.count_up_to(1), 0);
        assert_eq!(PrimeTable::covering(100).count_up_to(100), 25);
    }

    #[test]
    fn factorization_examples() {
        let t = PrimeTable::sieve(100);
        assert!(factorize_to_multiindex(1, &t).unwrap().is_empty());
        assert_eq!(factorize_to_multiindex(12, &t).unwrap().exponents(), &[2, 1]);
        assert_eq!(factorize_to_multiindex(6, &t).unwrap().exponents(), &[1, 1]);
        assert_eq!(factorize_to_multiindex(97 * 2, &t).unwrap().to_integer(&t), Some(194));
        let small = PrimeTable::sieve(10);
        assert_eq!(factorize_to_multiindex(22, &small), Err(Error::NeedsLargerTable { n: 22, bound: 10 }));
    }

    #[test]
    fn lift_examples() {
        let k = DirichletPolynomial::constant(Complex64::new(2.0, -1.0));
        let q = lift(&k);
        assert_eq!(q.terms().len(), 1);
        assert_eq!(q.coeff(&MultiIndex::default()), Complex64::new(2.0, -1.0));
        assert_eq!(q.variable_count(), 0);

        let p = DirichletPolynomial::from_real(&[1.0; 6]).unwrap();
        let q = lift(&p);
        assert_eq!(q.variable_count(), 3);
        let keys: Vec<Vec<u32>> = q.terms().keys().map(|a| a.exponents().to_vec()).collect();
        let mut want = vec![vec![], vec![1], vec![0, 1], vec![2], vec![0, 0, 1], vec![1, 1]];
        want.sort();
        assert_eq!(keys, want);
    }

    #[test]
    fn unlift_examples() {
        let k = LiftedPolynomial::new([(MultiIndex::default(), c(3.0))]).unwrap();
        assert_eq!(unlift(&k).unwrap().coeffs(), &[c(3.0)]);
        let z1z2 = LiftedPolynomial::new([(MultiIndex::from(vec![1, 1]), c(5.0))]).unwrap();
        let p = unlift(&z1z2).unwrap();
        assert_eq!(p.degree(), 6);
        assert_eq!(p.coeff(6), c(5.0));
        assert_eq!(z1z2.variable_count(), 3);
    }

    #[test]
    fn unlift_overflow_is_out_of_range() {
        let huge = LiftedPolynomial::new([(MultiIndex::from(vec![200]), c(1.0))]);
        assert!(matches!(huge, Err(Error::OutOfRange(_))));
    }

    #[test]
    fn json_shape() {
        let q = lift(&DirichletPolynomial::from_real(&[0.0, 0.0, 0.0, 0.0, 0.0, 2.0]).unwrap());
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"[{"exponents":[1,1],"coeff":[2.0,0.0]}]"#);
        let back: LiftedPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(unlift(&back).unwrap(), unlift(&q).unwrap());
    }

    #[test]
    fn polydisc_examples() {
        let plan = PolydiscPlan::default();
        let k = lift(&DirichletPolynomial::constant(Complex64::new(0.0, 3.0)));
        assert!((polydisc_sup_estimate(&k, &plan).unwrap().value - 3.0).abs() < 1e-14);
        let one_plus_z1 = LiftedPolynomial::new([(MultiIndex::default(), c(1.0)), (MultiIndex::from(vec![1]), c(1.0))]).unwrap();
        let v = polydisc_sup_estimate(&one_plus_z1, &plan).unwrap().value;
        assert!(v > 2.0 - 1e-3 && v <= 2.0 + 1e-12);
    }

    #[test]
    fn polydisc_resource_limit() {
        let p = DirichletPolynomial::from_real(&[1.0; 30]).unwrap();
        let q = lift(&p);
        assert_eq!(q.variable_count(), 10);
        assert!(matches!(polydisc_sup_estimate(&q, &PolydiscPlan::default()), Err(Error::ResourceLimit(_))));
    }

    fn dense_grid_oracle(q: &LiftedPolynomial, per_var: usize) -> f64 {
        let k = q.variable_count();
        let mut best = 0.0f64;
        let mut digits = vec![0usize; k];
        loop {
            let z: Vec<Complex64> = digits.iter().map(|&d| Complex64::from_polar(1.0, TAU * d as f64 / per_var as f64)).collect();
            best = best.max(q.evaluate(&z).norm());
            let mut j = 0;
            loop {
                if j == k {
                    return best;
                }
                digits[j] += 1;
                if digits[j] < per_var {
                    break;
                }
                digits[j] = 0;
                j += 1;
            }
        }
    }

    #[test]
    fn polydisc_matches_dense_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3, 4, 5, 6] {
            for _ in 0..4 {
                let coeffs: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                let q = lift(&DirichletPolynomial::new(coeffs).unwrap());
                let per_var = if q.variable_count() <= 2 { 512 } else { 120 };
                let oracle = dense_grid_oracle(&q, per_var);
                let est = polydisc_sup_estimate(&q, &PolydiscPlan::default()).unwrap().value;
                assert!((est - oracle).abs() <= 0.01 * oracle, "n={n}: est {est} oracle {oracle}");
            }
        }
    }

    #[test]
    fn isometry_on_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..6 {
            let n = rng.gen_range(2..=20);
            let coeffs: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let p = DirichletPolynomial::new(coeffs).unwrap();
            let r = isometry_check(&p, &IsometryPlan::default()).unwrap();
            assert!(r.halfplane <= r.polydisc * (1.0 + 1e-9), "{r:?}");
            assert!(r.within_tolerance, "{r:?}");
        }
    }

    fn small_poly(max_n: usize) -> impl Strategy<Value = DirichletPolynomial> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, prop::bool::weighted(0.8)), 1..max_n).prop_map(|v| {
            DirichletPolynomial::new(v.into_iter().map(|(a, b, keep)| if keep { Complex64::new(a, b) } else { Complex64::default() }).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn lift_unlift_round_trip(p in small_poly(50)) {
            let q = lift(&p);
            prop_assert_eq!(unlift(&q).unwrap(), p.clone());
            prop_assert_eq!(lift(&unlift(&q).unwrap()), q);
        }

        #[test]
        fn lift_is_multiplicative(p in small_poly(12), r in small_poly(12)) {
            let lhs = lift(&(&p * &r));
            let rhs = lift(&p).product(&lift(&r)).unwrap();
            prop_assert_eq!(lhs.terms().len(), rhs.terms().len());
            for (alpha, &c) in lhs.terms() {
                prop_assert!((c - rhs.coeff(alpha)).norm() <= 1e-14 * (1.0 + c.norm()));
            }
        }

        #[test]
        fn lifted_values_match_dirichlet_values(p in small_poly(30), t in -50.0..50.0f64, sigma in 0.0..2.0f64) {
            let s = Complex64::new(sigma, t);
            let q = lift(&p);
            let table = PrimeTable::sieve(30);
            let z: Vec<Complex64> = table.primes()[..q.variable_count()].iter().map(|&pr| (-s * (pr as f64).ln()).exp()).collect();
            let a = q.evaluate(&z);
            let b = p.evaluate(s).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + p.seminorm_sigma(sigma)));
        }
    }
}
