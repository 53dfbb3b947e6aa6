//! Laurent decomposition on multiply connected compacta and rational
//! Dirichlet functions `P_0(s) + Σ_j P_j(1/(s − z_j))`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compact::{winding_number, CompactSetSpec, Contour, DiscretizedSet};
use crate::dirichlet::DirichletPolynomial;
use crate::error::{check_finite, Error, Result};
use crate::fit::{minimax_fit, FitOptions, TargetFunction};

/// One hole-attached piece `P_j(1/(s − z_j))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalPart {
    pub anchor: Complex64,
    pub coeffs: DirichletPolynomial,
}

/// `R(s) = P_0(s) + Σ_j P_j(1/(s − z_j))` with pairwise distinct anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRational")]
pub struct RationalDirichletFunction {
    pub p0: DirichletPolynomial,
    pub parts: Vec<RationalPart>,
}

#[derive(Deserialize)]
struct RawRational {
    p0: DirichletPolynomial,
    #[serde(default)]
    parts: Vec<RationalPart>,
}

impl TryFrom<RawRational> for RationalDirichletFunction {
    type Error = Error;

    fn try_from(raw: RawRational) -> Result<Self> {
        Self::new(raw.p0, raw.parts)
    }
}

impl RationalDirichletFunction {
    pub fn new(p0: DirichletPolynomial, parts: Vec<RationalPart>) -> Result<Self> {
        for (i, a) in parts.iter().enumerate() {
            check_finite(a.anchor, "anchor")?;
            if parts[..i].iter().any(|b| b.anchor == a.anchor) {
                return Err(Error::InvalidAnchor { anchor: a.anchor, reason: "anchors must be pairwise distinct".into() });
            }
        }
        Ok(Self { p0, parts })
    }

    pub fn evaluate(&self, s: Complex64) -> Result<Complex64> {
        evaluate_rational(self, s)
    }
}

/// `p0(s) + Σ_j pj(1/(s − z_j))`.
pub fn evaluate_rational(r: &RationalDirichletFunction, s: Complex64) -> Result<Complex64> {
    check_finite(s, "evaluation point")?;
    let mut v = r.p0.evaluate(s)?;
    for part in &r.parts {
        if s == part.anchor {
            return Err(Error::Pole(s));
        }
        v += part.coeffs.evaluate(1.0 / (s - part.anchor))?;
    }
    Ok(v)
}

/// Samples of `f` on one closed contour, i.e. Cauchy data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    pub points: Vec<Complex64>,
    pub dz: Vec<Complex64>,
    pub values: Vec<Complex64>,
}

/// Points closer than this to a node are treated as that node.
const SNAP: f64 = 1e-10;

fn snapped(p: Complex64, z: Complex64) -> bool {
    (p - z).norm() <= SNAP * (1.0 + z.norm())
}

fn polygon_winding(d: &CauchyData, z: Complex64) -> i32 {
    winding_number(&d.points, z)
}

impl CauchyData {
    fn direct(&self, z: Complex64) -> Complex64 {
        self.points.iter().zip(&self.dz).zip(&self.values).map(|((&p, &w), &f)| w * f / (p - z)).sum::<Complex64>()
            / Complex64::new(0.0, TAU)
    }

    /// `(1/2πi) Σ w_k (f_k − c)/(ζ_k − z)`, dropping a node that coincides with `z`.
    fn subtracted(&self, z: Complex64, c: Complex64) -> Complex64 {
        self.points
            .iter()
            .zip(&self.dz)
            .zip(&self.values)
            .filter(|((&p, _), _)| !snapped(p, z))
            .map(|((&p, &w), &f)| w * (f - c) / (p - z))
            .sum::<Complex64>()
            / Complex64::new(0.0, TAU)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolePiece {
    pub anchor: Complex64,
    pub data: CauchyData,
}

/// `f = f_0 + Σ_j f_j`, each piece represented by its Cauchy data.
///
/// `f_0` comes from the outer contours and is holomorphic inside them; `f_j`
/// comes from the `j`-th hole contour, is holomorphic outside the hole and
/// vanishes at ∞. Pieces are evaluated by re-applying the Cauchy quadrature;
/// inside the set, the value of `f` is subtracted first (estimated by the
/// barycentric Cauchy formula), which keeps the quadrature accurate near the
/// boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentPieces {
    pub outer: Vec<CauchyData>,
    pub holes: Vec<HolePiece>,
    pub nodes_per_contour: usize,
    /// Max `|f − (f_0 + Σ f_j)|` over the set's samples.
    pub reconstruction_residual: f64,
    /// Set when the residual stayed above the requested tolerance.
    pub residual_warning: bool,
    /// The set the pieces were computed on, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<CompactSetSpec>,
}

impl LaurentPieces {
    fn all(&self) -> impl Iterator<Item = &CauchyData> {
        self.outer.iter().chain(self.holes.iter().map(|h| &h.data))
    }

    fn in_domain(&self, z: Complex64) -> bool {
        if let Some(spec) = &self.domain {
            return spec.contains(z);
        }
        let near = self.all().any(|d| d.points.windows(2).any(|w| (w[0] - z).norm() <= (w[1] - w[0]).norm()));
        near || (self.outer.iter().any(|d| polygon_winding(d, z) != 0) && self.holes.iter().all(|h| polygon_winding(&h.data, z) == 0))
    }

    /// Index of the outer loop around `z`.
    fn enclosing_outer(&self, z: Complex64) -> Option<usize> {
        self.outer.iter().position(|d| polygon_winding(d, z) != 0).or_else(|| {
            let dist = |d: &CauchyData| d.points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min);
            (0..self.outer.len()).min_by(|&a, &b| dist(&self.outer[a]).total_cmp(&dist(&self.outer[b])))
        })
    }

    /// Barycentric Cauchy interpolant of `f`, or `None` outside the set.
    fn interior_value(&self, z: Complex64) -> Option<Complex64> {
        if !self.in_domain(z) {
            return None;
        }
        let mut num = Complex64::default();
        let mut den = Complex64::default();
        for d in self.all() {
            for ((&p, &w), &f) in d.points.iter().zip(&d.dz).zip(&d.values) {
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                if snapped(p, z) {
                    return Some(f);
                }
                num += w * f / (p - z);
                den += w / (p - z);
            }
        }
        Some(num / den)
    }

    /// Contribution of every loop at `z`: outer loops first, then holes.
    fn loop_values(&self, z: Complex64) -> Vec<Complex64> {
        let loops: Vec<&CauchyData> = self.all().collect();
        let Some(fz) = self.interior_value(z) else {
            return loops.iter().map(|d| d.direct(z)).collect();
        };
        let around = self.enclosing_outer(z);
        let mut vals: Vec<Complex64> = loops
            .iter()
            .enumerate()
            .map(|(i, d)| if around == Some(i) { fz + d.subtracted(z, fz) } else { d.subtracted(z, fz) })
            .collect();
        // on (or extremely close to) a node the quadrature of that loop degrades;
        // its piece is then recovered from f = Σ pieces
        let dist = |d: &CauchyData| d.points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min);
        let (near, d) = loops.iter().enumerate().map(|(i, d)| (i, dist(d))).min_by(|a, b| a.1.total_cmp(&b.1)).expect("at least one loop");
        if d <= 1e-6 * (1.0 + z.norm()) {
            let others: Complex64 = vals.iter().enumerate().filter(|(i, _)| *i != near).map(|(_, v)| v).sum();
            vals[near] = fz - others;
        }
        vals
    }

    pub fn f0(&self, z: Complex64) -> Complex64 {
        self.loop_values(z)[..self.outer.len()].iter().sum()
    }

    pub fn fj(&self, j: usize, z: Complex64) -> Complex64 {
        self.loop_values(z)[self.outer.len() + j]
    }

    pub fn reconstruct(&self, z: Complex64) -> Complex64 {
        self.loop_values(z).into_iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaurentOptions {
    /// Starting quadrature nodes per contour (sets that know their geometry only).
    pub nodes: usize,
    pub max_nodes: usize,
    pub residual_tol: f64,
}

impl Default for LaurentOptions {
    fn default() -> Self {
        Self { nodes: 512, max_nodes: 8192, residual_tol: 1e-10 }
    }
}

fn contour_winding(c: &Contour, z: Complex64) -> f64 {
    let v: Complex64 = c.points.iter().zip(&c.dz).map(|(&p, &w)| w / (p - z)).sum();
    (v / Complex64::new(0.0, TAU)).re
}

/// Pairs each hole contour with the anchor inside it.
fn match_anchors(set: &DiscretizedSet, anchors: &[Complex64]) -> Result<Vec<usize>> {
    let holes: Vec<&Contour> = set.contours.iter().filter(|c| c.hole).collect();
    if anchors.len() != holes.len() {
        return Err(Error::invalid(format!("{} anchors given for {} holes", anchors.len(), holes.len())));
    }
    let mut owner = vec![usize::MAX; holes.len()];
    for (a, &z) in anchors.iter().enumerate() {
        check_finite(z, "anchor")?;
        if set.spec.as_ref().is_some_and(|s| s.contains(z)) {
            return Err(Error::InvalidAnchor { anchor: z, reason: "anchor lies in the set".into() });
        }
        let near = holes.iter().flat_map(|h| h.points.iter()).any(|p| (p - z).norm() < 1e-9);
        if near {
            return Err(Error::InvalidAnchor { anchor: z, reason: "anchor lies on a hole boundary".into() });
        }
        // hole contours run clockwise: winding −1 inside
        let hole = holes.iter().position(|h| contour_winding(h, z) < -0.5).ok_or_else(|| Error::InvalidAnchor {
            anchor: z,
            reason: "anchor is not inside any hole".into(),
        })?;
        if owner[hole] != usize::MAX {
            return Err(Error::InvalidAnchor { anchor: z, reason: "two anchors share a hole".into() });
        }
        owner[hole] = a;
    }
    Ok(owner)
}

fn decompose_once(set: &DiscretizedSet, f: &TargetFunction, anchors: &[Complex64]) -> Result<LaurentPieces> {
    if set.contours.is_empty() {
        return Err(Error::invalid("the set carries no contours"));
    }
    let owner = match_anchors(set, anchors)?;
    let data = |c: &Contour| -> Result<CauchyData> {
        let mut d = CauchyData { points: Vec::new(), dz: Vec::new(), values: Vec::new() };
        for (&p, &w) in c.points.iter().zip(&c.dz) {
            if w.norm_sqr() == 0.0 {
                continue;
            }
            d.points.push(p);
            d.dz.push(w);
            d.values.push(f.evaluate(p)?);
        }
        Ok(d)
    };
    let outer = set.contours.iter().filter(|c| !c.hole).map(data).collect::<Result<Vec<_>>>()?;
    let mut holes = Vec::new();
    for (h, c) in set.contours.iter().filter(|c| c.hole).enumerate() {
        holes.push((owner[h], HolePiece { anchor: anchors[owner[h]], data: data(c)? }));
    }
    // report hole pieces in anchor order
    holes.sort_by_key(|(a, _)| *a);
    let nodes = set.contours.iter().map(|c| c.points.len() - 1).min().unwrap_or(0);
    let mut pieces = LaurentPieces {
        outer,
        holes: holes.into_iter().map(|(_, h)| h).collect(),
        nodes_per_contour: nodes,
        reconstruction_residual: 0.0,
        residual_warning: false,
        domain: set.spec.clone(),
    };
    let samples = set.samples();
    let stride = (samples.len() / 400).max(1);
    let mut residual = 0.0f64;
    for &z in samples.iter().step_by(stride) {
        residual = residual.max((pieces.reconstruct(z) - f.evaluate(z)?).norm());
    }
    pieces.reconstruction_residual = residual;
    Ok(pieces)
}

/// Splits `f` into `f_0 + Σ_j f_j` by Cauchy integrals over the set's contours.
///
/// `anchors` holds one point strictly inside each hole. When the set knows its
/// geometry, contours are regenerated with `options.nodes` nodes and doubled
/// until the reconstruction residual meets `residual_tol` or stops improving.
pub fn laurent_decompose(set: &DiscretizedSet, f: &TargetFunction, anchors: &[Complex64], options: &LaurentOptions) -> Result<LaurentPieces> {
    let (spec, density) = match (&set.spec, &set.density) {
        (Some(s), Some(d)) => (s, d),
        _ => {
            let mut p = decompose_once(set, f, anchors)?;
            p.residual_warning = p.reconstruction_residual > options.residual_tol;
            return Ok(p);
        }
    };
    let mut nodes = options.nodes.max(8);
    let mut best: Option<LaurentPieces> = None;
    loop {
        let mut d = *density;
        d.contour_nodes = nodes;
        let mut refined = spec.discretize(&d)?;
        // keep the caller's samples; only the contours change
        refined.interior_samples = set.interior_samples.clone();
        refined.boundary_samples = set.boundary_samples.clone();
        let pieces = decompose_once(&refined, f, anchors)?;
        let improved = best.as_ref().is_none_or(|b| pieces.reconstruction_residual < 0.5 * b.reconstruction_residual);
        if best.as_ref().is_none_or(|b| pieces.reconstruction_residual < b.reconstruction_residual) {
            best = Some(pieces);
        }
        let done = best.as_ref().is_some_and(|b| b.reconstruction_residual <= options.residual_tol);
        if done || !improved || nodes * 2 > options.max_nodes {
            break;
        }
        nodes *= 2;
    }
    let mut p = best.expect("at least one pass");
    p.residual_warning = p.reconstruction_residual > options.residual_tol;
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFit {
    pub function: RationalDirichletFunction,
    /// Max over the set's samples of `|f − R|`.
    pub sup_error: f64,
    /// Sup-errors of the `f_0` fit and of each hole-piece fit.
    pub piece_errors: Vec<f64>,
    pub reconstruction_residual: f64,
}

/// Rational Dirichlet approximation of `f` on a multiply connected set.
///
/// `degrees[0]` is the degree of `P_0`, `degrees[j]` that of the piece at
/// `anchors[j−1]`. Each hole piece is fitted in the variable
/// `w = 1/(s − z_j)` on the images of the samples. The constant terms of the
/// hole pieces are moved into `P_0`, so every `P_j` has `a_1 = 0`.
pub fn rational_dirichlet_fit(
    set: &DiscretizedSet,
    f: &TargetFunction,
    anchors: &[Complex64],
    degrees: &[usize],
    options: &FitOptions,
    laurent: &LaurentOptions,
) -> Result<RationalFit> {
    if degrees.len() != anchors.len() + 1 {
        return Err(Error::invalid(format!("need {} degrees (one per piece), got {}", anchors.len() + 1, degrees.len())));
    }
    let pieces = laurent_decompose(set, f, anchors, laurent)?;
    let samples = set.samples();
    let f_vals = f.values_at(&samples)?;

    let f0: Vec<Complex64> = samples.iter().map(|&z| pieces.f0(z)).collect();
    let fit0 = minimax_fit(&DiscretizedSet::from_points(samples.clone()), &TargetFunction::Sampled { values: f0 }, degrees[0], options)?;
    let mut piece_errors = vec![fit0.minimax_error];
    let mut p0 = fit0.polynomial;
    let mut parts = Vec::with_capacity(anchors.len());
    for (j, (&z, &deg)) in anchors.iter().zip(&degrees[1..]).enumerate() {
        let w: Vec<Complex64> = samples.iter().map(|&s| 1.0 / (s - z)).collect();
        let vals: Vec<Complex64> = samples.iter().map(|&s| pieces.fj(j, s)).collect();
        let fit = minimax_fit(&DiscretizedSet::from_points(w), &TargetFunction::Sampled { values: vals }, deg, options)?;
        piece_errors.push(fit.minimax_error);
        let mut coeffs = fit.polynomial.coeffs().to_vec();
        let constant = std::mem::take(&mut coeffs[0]);
        let mut c0 = p0.coeffs().to_vec();
        c0[0] += constant;
        p0 = DirichletPolynomial::new(c0)?;
        parts.push(RationalPart { anchor: z, coeffs: DirichletPolynomial::new(coeffs)? });
    }
    let function = RationalDirichletFunction::new(p0, parts)?;
    let mut sup_error = 0.0f64;
    for (&s, &v) in samples.iter().zip(&f_vals) {
        sup_error = sup_error.max((evaluate_rational(&function, s)? - v).norm());
    }
    Ok(RationalFit { function, sup_error, piece_errors, reconstruction_residual: pieces.reconstruction_residual })
}
