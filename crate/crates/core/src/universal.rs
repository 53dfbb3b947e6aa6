//! Greedy construction of one coefficient sequence whose partial sums visit a
//! finite list of targets on the rectangles `K_m = [−m, 0] × [−m, m]`.
//!
//! Stage `k` (1-based position in the family) appends a block beyond the
//! previous cut, fitted with [`constrained_fit_from`] so that the block's
//! seminorm at `σ_k = 1/(k+1)` stays within the budget `4^{-k}`. Earlier
//! coefficients are never touched.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compact::{CompactSetSpec, Density};
use crate::dirichlet::DirichletPolynomial;
use crate::error::{Error, Result};
use crate::fit::{constrained_fit_from, sampled_error, FitOptions, FitResult, TargetFunction};
use crate::par;

pub const FINITE_FAMILY_NOTE: &str = "universality is only witnessed for the finitely many targets listed; \
     no claim is made about entire functions outside this family";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub target: TargetFunction,
    /// Selects the compact `K_m`.
    pub m: u32,
    pub tol: f64,
    /// Optional first and second derivatives of the target, checked by
    /// [`verify_schedule`] only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub derivatives: Vec<TargetFunction>,
    /// Tolerance for the derivative checks; defaults to `tol`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_tol: Option<f64>,
}

impl TargetEntry {
    pub fn new(target: TargetFunction, m: u32, tol: f64) -> Self {
        Self { target, m, tol, derivatives: Vec::new(), derivative_tol: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.m == 0 {
            return Err(Error::invalid("compact index m must be at least 1"));
        }
        if self.derivatives.len() > 2 {
            return Err(Error::invalid("derivative targets are supported up to order 2"));
        }
        if self.derivative_tol.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
            return Err(Error::invalid("derivative tolerance must be positive"));
        }
        Ok(())
    }

    fn compact(&self) -> CompactSetSpec {
        CompactSetSpec::k_m(self.m)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetFamily {
    pub entries: Vec<TargetEntry>,
}

impl TargetFamily {
    pub fn new(entries: Vec<TargetEntry>) -> Result<Self> {
        let family = Self { entries };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        self.entries.iter().try_for_each(TargetEntry::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UniversalOptions {
    /// Sampling of `K_1`; spacings grow proportionally for larger `m`.
    pub density: Density,
    /// Multiplies every stage budget `4^{-k}`.
    pub budget_scale: f64,
    /// Block lengths tried in turn, doubling from 1 up to this cap.
    pub max_block: usize,
    /// Number of σ values `1, 1/2, 1/4, …` in the recorded seminorm ladder.
    pub ladder_len: usize,
    pub fit: FitOptions,
}

impl Default for UniversalOptions {
    fn default() -> Self {
        Self { density: Density::default(), budget_scale: 1.0, max_block: 256, ladder_len: 8, fit: FitOptions::default() }
    }
}

impl UniversalOptions {
    pub fn stage_sigma(stage: usize) -> f64 {
        1.0 / (stage as f64 + 1.0)
    }

    pub fn stage_budget(&self, stage: usize) -> f64 {
        self.budget_scale * 4f64.powi(-(stage as i32))
    }

    fn density_for(&self, m: u32) -> Density {
        self.density.refined(1.0 / m as f64)
    }
}

fn sigma_ladder(len: usize) -> Vec<f64> {
    (0..len.max(1)).map(|i| 0.5f64.powi(i as i32)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub sigma: f64,
    pub seminorm: f64,
}

fn ladder_of(block: &DirichletPolynomial, sigmas: &[f64]) -> Vec<LadderEntry> {
    sigmas.iter().map(|&sigma| LadderEntry { sigma, seminorm: block.seminorm_sigma(sigma) }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub m: u32,
    /// Coefficient indices `block_start..=cut` were added by this stage.
    pub block_start: usize,
    pub cut: usize,
    pub sup_error: f64,
    pub tol: f64,
    pub sigma: f64,
    pub budget: f64,
    pub block_seminorm: f64,
    pub ladder: Vec<LadderEntry>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: usize,
    pub m: u32,
    /// Best sup-error reached within the block-length budget.
    pub best_error: f64,
    pub best_block_seminorm: f64,
    pub tol: f64,
    pub budget: f64,
    pub max_block_tried: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UniversalSchedule {
    pub coefficients: Vec<Complex64>,
    pub cuts: Vec<usize>,
    pub records: Vec<StageRecord>,
    #[serde(default)]
    pub failure: Option<StageFailure>,
    #[serde(default)]
    pub note: String,
}

impl UniversalSchedule {
    /// `S_λ D` for the `i`-th cut.
    pub fn partial_sum(&self, i: usize) -> Result<DirichletPolynomial> {
        let cut = *self.cuts.get(i).ok_or_else(|| Error::OutOfRange(format!("no cut number {i}")))?;
        if cut == 0 || cut > self.coefficients.len() {
            return Err(Error::invalid(format!("cut {cut} outside the coefficient list")));
        }
        DirichletPolynomial::new(self.coefficients[..cut].to_vec())
    }

    fn block(&self, i: usize) -> Result<DirichletPolynomial> {
        let start = if i == 0 { 0 } else { self.cuts[i - 1] };
        let mut c = vec![Complex64::default(); start];
        c.extend_from_slice(&self.coefficients[start..self.cuts[i]]);
        DirichletPolynomial::new(c)
    }
}

pub fn build_universal(targets: &TargetFamily, options: &UniversalOptions) -> Result<UniversalSchedule> {
    targets.validate()?;
    if options.max_block == 0 || !(options.budget_scale > 0.0) {
        return Err(Error::invalid("block cap and budget scale must be positive"));
    }
    let sigmas = sigma_ladder(options.ladder_len);
    let mut sched = UniversalSchedule { note: FINITE_FAMILY_NOTE.to_string(), ..Default::default() };
    for (i, entry) in targets.entries.iter().enumerate() {
        let stage = i + 1;
        let sigma = UniversalOptions::stage_sigma(stage);
        let budget = options.stage_budget(stage);
        let set = entry.compact().discretize(&options.density_for(entry.m))?;
        let prev = sched.coefficients.len();
        let prefix = if prev == 0 { DirichletPolynomial::zero(1) } else { DirichletPolynomial::new(sched.coefficients.clone())? };
        let fit_options = FitOptions { error_target: Some(entry.tol), ..options.fit.clone() };

        let mut accepted: Option<FitResult> = None;
        let mut best: Option<FitResult> = None;
        let mut len = 1;
        let mut tried = 0;
        while len <= options.max_block {
            tried = len;
            let fit = constrained_fit_from(&set, &entry.target, &prefix, sigma, budget, prev + 1, prev + len, &fit_options)?;
            if fit.converged {
                accepted = Some(fit);
                break;
            }
            if best.as_ref().is_none_or(|b| fit.minimax_error < b.minimax_error) {
                best = Some(fit);
            }
            if len == options.max_block {
                break;
            }
            len = (len * 2).min(options.max_block);
        }

        match accepted {
            Some(fit) => {
                let cut = prev + len;
                let coeffs = fit.polynomial.resized(cut);
                debug_assert!(coeffs.coeffs()[..prev] == sched.coefficients[..]);
                sched.coefficients.extend_from_slice(&coeffs.coeffs()[prev..]);
                sched.cuts.push(cut);
                let block = sched.block(i)?;
                sched.records.push(StageRecord {
                    stage,
                    m: entry.m,
                    block_start: prev + 1,
                    cut,
                    sup_error: fit.minimax_error,
                    tol: entry.tol,
                    sigma,
                    budget,
                    block_seminorm: block.seminorm_sigma(sigma),
                    ladder: ladder_of(&block, &sigmas),
                    samples: set.len(),
                });
            }
            None => {
                let (best_error, best_block_seminorm) = best.map_or((f64::INFINITY, 0.0), |b| (b.minimax_error, b.constraint_value.unwrap_or(0.0)));
                sched.failure = Some(StageFailure {
                    stage,
                    m: entry.m,
                    best_error,
                    best_block_seminorm,
                    tol: entry.tol,
                    budget,
                    max_block_tried: tried,
                    reason: format!(
                        "no block of length ≤ {tried} reached sup-error {} within seminorm budget {budget} at σ = {sigma}",
                        entry.tol
                    ),
                });
                break;
            }
        }
    }
    Ok(sched)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    /// Must match the build's base density; verification samples twice as densely.
    pub density: Density,
    pub density_factor: f64,
    pub tol_slack: f64,
    pub budget_scale: f64,
    pub ladder_len: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { density: Density::default(), density_factor: 2.0, tol_slack: 1.5, budget_scale: 1.0, ladder_len: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryCheck {
    pub stage: usize,
    pub m: u32,
    pub cut: Option<usize>,
    pub sup_error: Option<f64>,
    pub allowed: f64,
    /// Sup-errors of the first and second derivatives, where targets were given.
    pub derivative_errors: Vec<f64>,
    pub derivative_allowed: Option<f64>,
    pub block_seminorm: Option<f64>,
    pub budget: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub entries: Vec<EntryCheck>,
    pub cuts_increasing: bool,
    /// `Σ_blocks ‖block‖_σ` per ladder value.
    pub ladder: Vec<LadderEntry>,
    pub ladder_finite: bool,
    pub note: String,
}

/// Re-evaluates every partial sum on a fresh, denser sampling of its `K_m`.
pub fn verify_schedule(sched: &UniversalSchedule, targets: &TargetFamily, options: &VerifyOptions) -> Result<VerificationReport> {
    targets.validate()?;
    if sched.cuts.len() > targets.entries.len() {
        return Err(Error::invalid(format!("schedule has {} cuts for {} targets", sched.cuts.len(), targets.entries.len())));
    }
    if sched.cuts.last().is_some_and(|&c| c > sched.coefficients.len()) || sched.cuts.first() == Some(&0) {
        return Err(Error::invalid("cuts must lie within the coefficient list"));
    }
    if !(options.density_factor > 0.0 && options.tol_slack > 0.0) {
        return Err(Error::invalid("density factor and tolerance slack must be positive"));
    }
    let cuts_increasing = sched.cuts.windows(2).all(|w| w[0] < w[1]);
    if !cuts_increasing {
        return Err(Error::invalid("cuts are not strictly increasing"));
    }
    let sigmas = sigma_ladder(options.ladder_len);
    let stages: Vec<usize> = (0..targets.entries.len()).collect();
    let checks = par::map(&stages, |&i| check_entry(sched, &targets.entries[i], i, options));
    let entries = checks.into_iter().collect::<Result<Vec<_>>>()?;

    let mut ladder: Vec<LadderEntry> = sigmas.iter().map(|&sigma| LadderEntry { sigma, seminorm: 0.0 }).collect();
    for i in 0..sched.cuts.len() {
        let block = sched.block(i)?;
        for l in &mut ladder {
            l.seminorm += block.seminorm_sigma(l.sigma);
        }
    }
    let ladder_finite = ladder.iter().all(|l| l.seminorm.is_finite());
    let pass = ladder_finite && cuts_increasing && sched.failure.is_none() && entries.iter().all(|e| e.pass);
    Ok(VerificationReport { pass, entries, cuts_increasing, ladder, ladder_finite, note: FINITE_FAMILY_NOTE.to_string() })
}

fn check_entry(sched: &UniversalSchedule, entry: &TargetEntry, i: usize, options: &VerifyOptions) -> Result<EntryCheck> {
    let stage = i + 1;
    let budget = options.budget_scale * 4f64.powi(-(stage as i32));
    let allowed = options.tol_slack * entry.tol;
    let derivative_allowed = (!entry.derivatives.is_empty()).then(|| options.tol_slack * entry.derivative_tol.unwrap_or(entry.tol));
    let mut check = EntryCheck {
        stage,
        m: entry.m,
        cut: sched.cuts.get(i).copied(),
        sup_error: None,
        allowed,
        derivative_errors: Vec::new(),
        derivative_allowed,
        block_seminorm: None,
        budget,
        samples: 0,
        pass: false,
    };
    if i >= sched.cuts.len() {
        return Ok(check);
    }
    let density = options.density.refined(options.density_factor / entry.m as f64);
    let points = entry.compact().discretize(&density)?.samples();
    check.samples = points.len();
    let sum = sched.partial_sum(i)?;
    let error = sampled_error(&sum, &points, &entry.target.values_at(&points)?)?;
    for (order, d) in entry.derivatives.iter().enumerate() {
        let want = d.values_at(&points)?;
        let mut worst = 0.0f64;
        for (&s, w) in points.iter().zip(want) {
            worst = worst.max((sum.evaluate_derivative(s, order as u32 + 1)? - w).norm());
        }
        check.derivative_errors.push(worst);
    }
    let seminorm = sched.block(i)?.seminorm_sigma(UniversalOptions::stage_sigma(stage));
    check.sup_error = Some(error);
    check.block_seminorm = Some(seminorm);
    check.pass = error <= allowed
        && derivative_allowed.is_none_or(|a| check.derivative_errors.iter().all(|&e| e <= a))
        && seminorm <= budget * (1.0 + 1e-9);
    Ok(check)
}
