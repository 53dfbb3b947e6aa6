//! Coefficient rules for Dirichlet series and estimators for their abscissas
//! of convergence (`σ_c`) and absolute convergence (`σ_a`).

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::dirichlet::DirichletPolynomial;
use crate::error::{Error, Result};

pub const MIN_TRUNCATION: usize = 100;

/// Built-in coefficient sequences addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedRule {
    /// `μ(n)`
    Mobius,
    /// `λ(n) = (-1)^Ω(n)`
    Liouville,
    /// `ln n`
    Log,
    /// `√n`
    Sqrt,
    /// `n^{-2}`
    InverseSquare,
}

/// A finite window onto a Dirichlet series `Σ a_n n^{-s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientRule {
    ExplicitList { coefficients: Vec<Complex64> },
    AllOnes,
    /// `a_n = (-1)^n`
    Alternating,
    NamedCustom { name: NamedRule },
}

impl CoefficientRule {
    pub fn explicit(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::invalid("explicit coefficient list is empty"));
        }
        Ok(CoefficientRule::ExplicitList { coefficients })
    }

    /// `a_n` for `n ≥ 1`.
    pub fn coefficient(&self, n: u64) -> Complex64 {
        let re = |x: f64| Complex64::new(x, 0.0);
        match self {
            CoefficientRule::ExplicitList { coefficients } => coefficients.get((n - 1) as usize).copied().unwrap_or_default(),
            CoefficientRule::AllOnes => re(1.0),
            CoefficientRule::Alternating => re(if n % 2 == 0 { 1.0 } else { -1.0 }),
            CoefficientRule::NamedCustom { name } => re(match name {
                NamedRule::Mobius => mobius(n) as f64,
                NamedRule::Liouville => {
                    if big_omega(n) % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                NamedRule::Log => (n as f64).ln(),
                NamedRule::Sqrt => (n as f64).sqrt(),
                NamedRule::InverseSquare => 1.0 / (n as f64 * n as f64),
            }),
        }
    }

    pub fn is_finitely_supported(&self) -> bool {
        matches!(self, CoefficientRule::ExplicitList { .. })
    }

    pub fn window(&self, n: usize) -> Vec<Complex64> {
        (1..=n as u64).map(|k| self.coefficient(k)).collect()
    }

    /// The partial sum `S_N` as a Dirichlet polynomial.
    pub fn partial_sum(&self, n: usize) -> Result<DirichletPolynomial> {
        DirichletPolynomial::new(self.window(n.max(1)))
    }
}

fn mobius(mut n: u64) -> i32 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

fn big_omega(mut n: u64) -> u32 {
    let mut count = 0;
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            n /= p;
            count += 1;
        }
        p += 1;
    }
    count + u32::from(n > 1)
}

/// An abscissa value: a real number or one of the two infinite sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Abscissa {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Abscissa {
    pub fn finite(self) -> Option<f64> {
        match self {
            Abscissa::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// `self ≤ other + tol`, with the sentinels ordered around the reals.
    pub fn le_with_tol(self, other: Abscissa, tol: f64) -> bool {
        match (self, other) {
            (Abscissa::NegInf, _) | (_, Abscissa::PosInf) => true,
            (_, Abscissa::NegInf) | (Abscissa::PosInf, _) => false,
            (Abscissa::Finite(a), Abscissa::Finite(b)) => a <= b + tol,
        }
    }

    fn plus(self, d: f64) -> Abscissa {
        match self {
            Abscissa::Finite(x) => Abscissa::Finite(x + d),
            s => s,
        }
    }
}

impl Serialize for Abscissa {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Abscissa::NegInf => serializer.serialize_str("neg_inf"),
            Abscissa::PosInf => serializer.serialize_str("pos_inf"),
            Abscissa::Finite(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Abscissa {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(x) if x.is_finite() => Ok(Abscissa::Finite(x)),
            Raw::Num(x) => Err(de::Error::custom(format!("abscissa must be finite or a sentinel, got {x}"))),
            Raw::Tag(t) if t == "neg_inf" => Ok(Abscissa::NegInf),
            Raw::Tag(t) if t == "pos_inf" => Ok(Abscissa::PosInf),
            Raw::Tag(t) => Err(de::Error::custom(format!("unknown abscissa sentinel {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbscissaReport {
    pub sigma_c_estimate: Abscissa,
    pub sigma_a_estimate: Abscissa,
    /// `σ_b = σ_u` lies in `[σ_c, σ_a]`.
    pub sigma_u_bracket: (Abscissa, Abscissa),
    pub truncation_used: usize,
}

impl AbscissaReport {
    /// `σ_c ≤ σ_u^- ≤ σ_u^+ ≤ σ_a + tol` and `σ_a ≤ σ_c + 1 + tol`.
    pub fn satisfies_ordering(&self, tol: f64) -> bool {
        let (lo, hi) = self.sigma_u_bracket;
        self.sigma_c_estimate.le_with_tol(lo, tol)
            && lo.le_with_tol(hi, tol)
            && hi.le_with_tol(self.sigma_a_estimate, tol)
            && self.sigma_a_estimate.le_with_tol(self.sigma_c_estimate.plus(1.0), tol)
    }
}

/// Cahen-type estimates of `σ_c` and `σ_a` from the first `truncation` coefficients.
///
/// For a sequence `b_n` with partial sums `B(M)`, the growth exponent of
/// `max_{m ≤ M} |B(m)|` over a dyadic ladder of `M` is fitted by least
/// squares in log-log coordinates. A positive exponent is the abscissa.
/// Otherwise the partial sums are bounded and the decay exponent of the tail
/// `sup_{m ≥ M} |B(X) - B(m)|` is used instead (zero if the tail does not
/// decay). The `σ_a` estimate is then projected onto `[σ_c, σ_c + 1]`.
pub fn estimate_abscissas(rule: &CoefficientRule, truncation: usize) -> Result<AbscissaReport> {
    if truncation < MIN_TRUNCATION {
        return Err(Error::invalid(format!("truncation must be at least {MIN_TRUNCATION}, got {truncation}")));
    }
    let coeffs = rule.window(truncation);
    if rule.is_finitely_supported() || coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
        return Ok(AbscissaReport {
            sigma_c_estimate: Abscissa::NegInf,
            sigma_a_estimate: Abscissa::NegInf,
            sigma_u_bracket: (Abscissa::NegInf, Abscissa::NegInf),
            truncation_used: truncation,
        });
    }
    let partial = prefix_sums(coeffs.iter().copied());
    let partial_abs = prefix_sums(coeffs.iter().map(|c| Complex64::new(c.norm(), 0.0)));
    let sigma_c = cahen_exponent(&partial);
    let sigma_a_raw = cahen_exponent(&partial_abs);

    let sigma_c = to_abscissa(sigma_c);
    let sigma_a = match (sigma_c, to_abscissa(sigma_a_raw)) {
        (Abscissa::Finite(c), Abscissa::Finite(a)) => Abscissa::Finite(a.clamp(c, c + 1.0)),
        (_, a) => a,
    };
    Ok(AbscissaReport {
        sigma_c_estimate: sigma_c,
        sigma_a_estimate: sigma_a,
        sigma_u_bracket: (sigma_c, sigma_a),
        truncation_used: truncation,
    })
}

fn to_abscissa(x: f64) -> Abscissa {
    if x.is_nan() || x == f64::INFINITY {
        Abscissa::PosInf
    } else if x == f64::NEG_INFINITY {
        Abscissa::NegInf
    } else {
        Abscissa::Finite(x)
    }
}

fn prefix_sums(it: impl Iterator<Item = Complex64>) -> Vec<Complex64> {
    it.scan(Complex64::default(), |acc, c| {
        *acc += c;
        Some(*acc)
    })
    .collect()
}

/// Growth threshold below which partial sums are treated as bounded.
const GROWTH_THRESHOLD: f64 = 0.05;

fn cahen_exponent(partial: &[Complex64]) -> f64 {
    let x = partial.len();
    if partial.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return f64::INFINITY;
    }
    let ladder: Vec<usize> = dyadic_ladder(16, x);
    let mut running = 0.0f64;
    let mut idx = 0;
    let mut growth_pts = Vec::new();
    for &m in &ladder {
        while idx < m {
            running = running.max(partial[idx].norm());
            idx += 1;
        }
        if running > 0.0 {
            growth_pts.push(((m as f64).ln(), running.ln()));
        }
    }
    let growth = slope(&growth_pts).unwrap_or(0.0);
    if growth > GROWTH_THRESHOLD {
        return growth;
    }
    // bounded partial sums: look at the decay of the tail
    let total = partial[x - 1];
    let mut tail_sup = vec![0.0f64; x];
    let mut acc = 0.0f64;
    for m in (0..x).rev() {
        acc = acc.max((total - partial[m]).norm());
        tail_sup[m] = acc;
    }
    let tail_pts: Vec<(f64, f64)> = dyadic_ladder(16, x / 8)
        .into_iter()
        .filter(|&m| tail_sup[m - 1] > 0.0)
        .map(|m| ((m as f64).ln(), tail_sup[m - 1].ln()))
        .collect();
    match slope(&tail_pts) {
        Some(s) if s < 0.0 => s,
        Some(_) => 0.0,
        // tail vanishes identically in the window
        None if tail_sup[x / 8] == 0.0 => f64::NEG_INFINITY,
        None => growth.max(0.0),
    }
}

fn dyadic_ladder(start: usize, end: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut m = start;
    while m <= end {
        out.push(m);
        m *= 2;
    }
    if out.last().is_some_and(|&l| l < end) && end > start {
        out.push(end);
    }
    out
}

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite(a: Abscissa) -> f64 {
        a.finite().expect("finite abscissa")
    }

    #[test]
    fn all_ones_is_one() {
        let r = estimate_abscissas(&CoefficientRule::AllOnes, 10_000).unwrap();
        assert!((finite(r.sigma_c_estimate) - 1.0).abs() < 0.1);
        assert!((finite(r.sigma_a_estimate) - 1.0).abs() < 0.1);
        assert!(r.satisfies_ordering(1e-12));
    }

    #[test]
    fn alternating_oracle() {
        // partial sums of (-1)^n are -1, 0, -1, 0, ... (bounded, no decay): σ_c = 0;
        // partial sums of |(-1)^n| are M: σ_a = 1
        let oracle: Vec<f64> = (1..=8).map(|m| if m % 2 == 1 { -1.0 } else { 0.0 }).collect();
        let rule = CoefficientRule::Alternating;
        let direct: Vec<f64> = rule.window(8).iter().scan(0.0, |a, c| {
            *a += c.re;
            Some(*a)
        }).collect();
        assert_eq!(direct, oracle);
        let r = estimate_abscissas(&rule, 10_000).unwrap();
        assert!(finite(r.sigma_c_estimate).abs() < 0.1);
        assert!((finite(r.sigma_a_estimate) - 1.0).abs() < 0.1);
    }

    #[test]
    fn explicit_lists_are_entire() {
        let rule = CoefficientRule::explicit(vec![Complex64::new(1.0, 0.0); 5]).unwrap();
        let r = estimate_abscissas(&rule, 100).unwrap();
        assert_eq!(r.sigma_c_estimate, Abscissa::NegInf);
        assert_eq!(r.sigma_a_estimate, Abscissa::NegInf);
        assert!(r.satisfies_ordering(0.0));
    }

    #[test]
    fn named_rules() {
        let inv_sq = CoefficientRule::NamedCustom { name: NamedRule::InverseSquare };
        let r = estimate_abscissas(&inv_sq, 20_000).unwrap();
        assert!((finite(r.sigma_c_estimate) + 1.0).abs() < 0.15, "{r:?}");
        let sqrt = CoefficientRule::NamedCustom { name: NamedRule::Sqrt };
        let r = estimate_abscissas(&sqrt, 10_000).unwrap();
        assert!((finite(r.sigma_c_estimate) - 1.5).abs() < 0.1);
        let mu = CoefficientRule::NamedCustom { name: NamedRule::Mobius };
        assert_eq!(mu.window(10).iter().map(|c| c.re as i32).collect::<Vec<_>>(), vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
        for rule in [mu, CoefficientRule::NamedCustom { name: NamedRule::Liouville }, CoefficientRule::NamedCustom { name: NamedRule::Log }] {
            assert!(estimate_abscissas(&rule, 4096).unwrap().satisfies_ordering(0.05));
        }
    }

    #[test]
    fn small_truncation_rejected() {
        assert!(matches!(estimate_abscissas(&CoefficientRule::AllOnes, 99), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn sentinel_json() {
        let r = estimate_abscissas(&CoefficientRule::explicit(vec![Complex64::new(2.0, 0.0)]).unwrap(), 100).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"sigma_c_estimate\":\"neg_inf\""), "{s}");
        let back: AbscissaReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let rule: CoefficientRule = serde_json::from_str(r#"{"kind":"named-custom","name":"mobius"}"#).unwrap();
        assert_eq!(rule, CoefficientRule::NamedCustom { name: NamedRule::Mobius });
    }
}
