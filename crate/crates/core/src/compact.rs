//! Compact sets `K ⊂ ℂ`: declarative shapes, sampling, quadrature contours.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_table, format_f64};

const FUZZ: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disc { center: Complex64, radius: f64 },
    Rectangle { corner_lo: Complex64, corner_hi: Complex64 },
    Annulus { center: Complex64, r_inner: f64, r_outer: f64 },
    JordanPolygon { vertices: Vec<Complex64> },
    /// Pairwise disjoint components.
    Union { components: Vec<Shape> },
}

/// A validated compact set together with the caller's claim about `ℂ \ K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct CompactSetSpec {
    #[serde(flatten)]
    pub shape: Shape,
    pub declared_complement_connected: bool,
}

#[derive(Deserialize)]
struct RawSpec {
    #[serde(flatten)]
    shape: Shape,
    declared_complement_connected: Option<bool>,
}

impl TryFrom<RawSpec> for CompactSetSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let declared = raw.declared_complement_connected.unwrap_or_else(|| default_connected(&raw.shape));
        Self::with_flag(raw.shape, declared)
    }
}

fn default_connected(shape: &Shape) -> bool {
    !matches!(shape, Shape::Annulus { .. } | Shape::Union { .. })
}

impl CompactSetSpec {
    /// Validates `shape`; the complement flag is set per geometry (false for
    /// annuli and unions).
    pub fn new(shape: Shape) -> Result<Self> {
        let declared = default_connected(&shape);
        Self::with_flag(shape, declared)
    }

    pub fn with_flag(shape: Shape, declared_complement_connected: bool) -> Result<Self> {
        validate(&shape)?;
        let shape = normalize(shape);
        Ok(Self { shape, declared_complement_connected })
    }

    pub fn disc(center: Complex64, radius: f64) -> Result<Self> {
        Self::new(Shape::Disc { center, radius })
    }

    pub fn rectangle(corner_lo: Complex64, corner_hi: Complex64) -> Result<Self> {
        Self::new(Shape::Rectangle { corner_lo, corner_hi })
    }

    pub fn annulus(center: Complex64, r_inner: f64, r_outer: f64) -> Result<Self> {
        Self::new(Shape::Annulus { center, r_inner, r_outer })
    }

    pub fn polygon(vertices: Vec<Complex64>) -> Result<Self> {
        Self::new(Shape::JordanPolygon { vertices })
    }

    /// `K_m = [−m, 0] × [−m, m]`.
    pub fn k_m(m: u32) -> Self {
        let m = m.max(1) as f64;
        Self::rectangle(Complex64::new(-m, -m), Complex64::new(0.0, m)).expect("valid rectangle")
    }

    pub fn translate(&self, offset: Complex64) -> Self {
        Self { shape: translate_shape(&self.shape, offset), declared_complement_connected: self.declared_complement_connected }
    }

    /// `max Re s` over `K`; exact for every shape.
    pub fn max_real_part(&self) -> f64 {
        max_re(&self.shape)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        contains(&self.shape, z)
    }

    pub fn discretize(&self, density: &Density) -> Result<DiscretizedSet> {
        density.validate()?;
        let mut set = DiscretizedSet {
            interior_samples: Vec::new(),
            boundary_samples: Vec::new(),
            contours: Vec::new(),
            spec: Some(self.clone()),
            density: Some(*density),
        };
        for comp in components(&self.shape) {
            discretize_component(comp, density, &mut set);
        }
        Ok(set)
    }
}

fn components(shape: &Shape) -> Vec<&Shape> {
    match shape {
        Shape::Union { components: parts } => parts.iter().flat_map(components).collect(),
        other => vec![other],
    }
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn validate(shape: &Shape) -> Result<()> {
    let pos = |r: f64, what: &str| {
        if r.is_finite() && r > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!("{what} must be positive and finite, got {r}")))
        }
    };
    match shape {
        Shape::Disc { center, radius } => {
            if !finite(*center) {
                return Err(Error::invalid("disc center must be finite"));
            }
            pos(*radius, "radius")
        }
        Shape::Rectangle { corner_lo, corner_hi } => {
            if !(finite(*corner_lo) && finite(*corner_hi)) {
                return Err(Error::invalid("rectangle corners must be finite"));
            }
            if corner_lo.re < corner_hi.re && corner_lo.im < corner_hi.im {
                Ok(())
            } else {
                Err(Error::invalid(format!("rectangle corners not ordered: {corner_lo} vs {corner_hi}")))
            }
        }
        Shape::Annulus { center, r_inner, r_outer } => {
            if !finite(*center) {
                return Err(Error::invalid("annulus center must be finite"));
            }
            pos(*r_inner, "inner radius")?;
            pos(*r_outer, "outer radius")?;
            if r_inner < r_outer {
                Ok(())
            } else {
                Err(Error::invalid(format!("annulus needs r_inner < r_outer, got {r_inner} ≥ {r_outer}")))
            }
        }
        Shape::JordanPolygon { vertices } => validate_polygon(vertices),
        Shape::Union { components } => {
            if components.is_empty() {
                return Err(Error::invalid("union needs at least one component"));
            }
            for c in components {
                validate(c)?;
            }
            let flat: Vec<Shape> = components.iter().flat_map(|c| self::components(c).into_iter().cloned()).collect();
            let probe = Density { boundary_spacing: 0.05, interior_spacing: f64::INFINITY, contour_nodes: 8 };
            for (i, a) in flat.iter().enumerate() {
                for b in &flat[i + 1..] {
                    if overlaps(a, b, &probe) {
                        return Err(Error::invalid("union components must be disjoint"));
                    }
                }
            }
            Ok(())
        }
    }
}

fn overlaps(a: &Shape, b: &Shape, probe: &Density) -> bool {
    let boundary = |s: &Shape| {
        let mut set = DiscretizedSet::from_points(Vec::new());
        discretize_component(s, probe, &mut set);
        set.boundary_samples
    };
    let (ba, bb) = (boundary(a), boundary(b));
    ba.iter().any(|&z| contains(b, z)) || bb.iter().any(|&z| contains(a, z)) || segments_cross(&ba, &bb)
}

fn segments_cross(a: &[Complex64], b: &[Complex64]) -> bool {
    a.windows(2).any(|e| b.windows(2).any(|f| segments_intersect(e[0], e[1], f[0], f[1])))
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Complex64, b: Complex64, p: Complex64, d: f64| {
        d == 0.0 && p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn polygon_vertices(v: &[Complex64]) -> &[Complex64] {
    if v.len() > 1 && v.first() == v.last() {
        &v[..v.len() - 1]
    } else {
        v
    }
}

fn signed_area(v: &[Complex64]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum::<f64>()
}

fn validate_polygon(vertices: &[Complex64]) -> Result<()> {
    let v = polygon_vertices(vertices);
    if v.len() < 3 {
        return Err(Error::invalid("polygon needs at least 3 distinct vertices"));
    }
    if !v.iter().all(|&z| finite(z)) {
        return Err(Error::invalid("polygon vertices must be finite"));
    }
    let n = v.len();
    for i in 0..n {
        if v[i] == v[(i + 1) % n] {
            return Err(Error::invalid("polygon has a repeated vertex"));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a, b, c, d) = (v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]);
            if adjacent {
                // adjacent edges may only share their common vertex
                let shared = if j == i + 1 { b } else { a };
                let (other_a, other_b) = if j == i + 1 { (a, d) } else { (b, c) };
                let collinear_back = cross(other_a - shared, other_b - shared) == 0.0
                    && (other_a - shared).re * (other_b - shared).re + (other_a - shared).im * (other_b - shared).im > 0.0;
                if collinear_back {
                    return Err(Error::invalid("polygon folds back on itself"));
                }
            } else if segments_intersect(a, b, c, d) {
                return Err(Error::invalid(format!("polygon is not simple: edges {i} and {j} intersect")));
            }
        }
    }
    if signed_area(v).abs() <= 0.0 {
        return Err(Error::invalid("polygon has zero area"));
    }
    Ok(())
}

/// Polygons are stored open and counter-clockwise.
fn normalize(shape: Shape) -> Shape {
    match shape {
        Shape::JordanPolygon { vertices } => {
            let mut v = polygon_vertices(&vertices).to_vec();
            if signed_area(&v) < 0.0 {
                v.reverse();
            }
            Shape::JordanPolygon { vertices: v }
        }
        Shape::Union { components } => Shape::Union { components: components.into_iter().map(normalize).collect() },
        other => other,
    }
}

fn translate_shape(shape: &Shape, u: Complex64) -> Shape {
    match shape {
        Shape::Disc { center, radius } => Shape::Disc { center: center + u, radius: *radius },
        Shape::Rectangle { corner_lo, corner_hi } => Shape::Rectangle { corner_lo: corner_lo + u, corner_hi: corner_hi + u },
        Shape::Annulus { center, r_inner, r_outer } => Shape::Annulus { center: center + u, r_inner: *r_inner, r_outer: *r_outer },
        Shape::JordanPolygon { vertices } => Shape::JordanPolygon { vertices: vertices.iter().map(|v| v + u).collect() },
        Shape::Union { components } => Shape::Union { components: components.iter().map(|c| translate_shape(c, u)).collect() },
    }
}

fn max_re(shape: &Shape) -> f64 {
    match shape {
        Shape::Disc { center, radius } => center.re + radius,
        Shape::Rectangle { corner_hi, .. } => corner_hi.re,
        Shape::Annulus { center, r_outer, .. } => center.re + r_outer,
        Shape::JordanPolygon { vertices } => vertices.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max),
        Shape::Union { components } => components.iter().map(max_re).fold(f64::NEG_INFINITY, f64::max),
    }
}

fn dist_to_segment(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = (((z - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

fn contains(shape: &Shape, z: Complex64) -> bool {
    match shape {
        Shape::Disc { center, radius } => (z - center).norm() <= radius + FUZZ,
        Shape::Rectangle { corner_lo, corner_hi } => {
            z.re >= corner_lo.re - FUZZ && z.re <= corner_hi.re + FUZZ && z.im >= corner_lo.im - FUZZ && z.im <= corner_hi.im + FUZZ
        }
        Shape::Annulus { center, r_inner, r_outer } => {
            let r = (z - center).norm();
            r >= r_inner - FUZZ && r <= r_outer + FUZZ
        }
        Shape::JordanPolygon { vertices } => {
            let n = vertices.len();
            if (0..n).any(|i| dist_to_segment(z, vertices[i], vertices[(i + 1) % n]) <= FUZZ) {
                return true;
            }
            winding_number(vertices, z) != 0
        }
        Shape::Union { components } => components.iter().any(|c| contains(c, z)),
    }
}

pub(crate) fn winding_number(v: &[Complex64], z: Complex64) -> i32 {
    let n = v.len();
    let mut w = 0;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if a.im <= z.im {
            if b.im > z.im && cross(b - a, z - a) > 0.0 {
                w += 1;
            }
        } else if b.im <= z.im && cross(b - a, z - a) < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Density {
    /// Maximal distance between consecutive boundary samples.
    pub boundary_spacing: f64,
    /// Spacing of the interior grid; `inf` disables interior sampling.
    pub interior_spacing: f64,
    /// Minimum number of quadrature nodes per contour.
    #[serde(default = "default_contour_nodes")]
    pub contour_nodes: usize,
}

fn default_contour_nodes() -> usize {
    256
}

impl Default for Density {
    fn default() -> Self {
        Self { boundary_spacing: 0.01, interior_spacing: 0.05, contour_nodes: default_contour_nodes() }
    }
}

impl Density {
    pub fn uniform(spacing: f64) -> Self {
        Self { boundary_spacing: spacing, interior_spacing: 5.0 * spacing, contour_nodes: default_contour_nodes() }
    }

    /// Both spacings divided by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        Self {
            boundary_spacing: self.boundary_spacing / factor,
            interior_spacing: self.interior_spacing / factor,
            contour_nodes: self.contour_nodes,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.boundary_spacing > 0.0 && self.boundary_spacing.is_finite() && self.interior_spacing > 0.0 && self.contour_nodes > 0 {
            Ok(())
        } else {
            Err(Error::invalid("densities must be positive (boundary spacing finite)"))
        }
    }
}

/// A closed oriented loop `z_0, …, z_M = z_0` with complex quadrature weights
/// `dz_k`, so that `∮ f ≈ Σ f(z_k) dz_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<Complex64>,
    pub dz: Vec<Complex64>,
    /// True when the loop bounds a hole (clockwise).
    pub hole: bool,
}

impl Contour {
    /// `Σ |dz_k|`, the quadrature approximation of the loop length.
    pub fn total_weight(&self) -> f64 {
        self.dz.iter().map(|w| w.norm()).sum()
    }

    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.points.iter().zip(&self.dz).filter(|(_, w)| w.norm_sqr() != 0.0).map(|(&z, &w)| f(z) * w).sum()
    }

    /// Trapezoid rule on a circle; clockwise when `hole`.
    pub fn circle(center: Complex64, radius: f64, nodes: usize, hole: bool) -> Self {
        let nodes = nodes.max(8);
        let sign = if hole { -1.0 } else { 1.0 };
        let mut points = Vec::with_capacity(nodes + 1);
        let mut dz = Vec::with_capacity(nodes + 1);
        for k in 0..nodes {
            let e = Complex64::from_polar(1.0, sign * TAU * k as f64 / nodes as f64);
            points.push(center + radius * e);
            dz.push(Complex64::i() * sign * radius * e * (TAU / nodes as f64));
        }
        points.push(points[0]);
        dz.push(Complex64::default());
        Self { points, dz, hole }
    }

    /// Gauss–Legendre panels along the closed polygon `vertices`.
    pub fn polygon(vertices: &[Complex64], panel_length: f64, hole: bool) -> Self {
        let (gx, gw) = gauss_legendre(GL_ORDER);
        let n = vertices.len();
        let mut order: Vec<Complex64> = vertices.to_vec();
        if hole {
            order.reverse();
        }
        let mut points = vec![order[0]];
        let mut dz = vec![Complex64::default()];
        for i in 0..n {
            let (a, b) = (order[i], order[(i + 1) % n]);
            let panels = ((b - a).norm() / panel_length).ceil().max(1.0) as usize;
            for p in 0..panels {
                let pa = a + (b - a) * (p as f64 / panels as f64);
                let pb = a + (b - a) * ((p + 1) as f64 / panels as f64);
                let half = (pb - pa) * 0.5;
                for (x, w) in gx.iter().zip(&gw) {
                    points.push(pa + half * (x + 1.0));
                    dz.push(half * *w);
                }
            }
        }
        points.push(order[0]);
        dz.push(Complex64::default());
        Self { points, dz, hole }
    }
}

const GL_ORDER: usize = 16;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Sample points and quadrature contours of a compact set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedSet {
    pub interior_samples: Vec<Complex64>,
    pub boundary_samples: Vec<Complex64>,
    pub contours: Vec<Contour>,
    /// The geometry and density this set was generated from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<CompactSetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
}

impl DiscretizedSet {
    /// A set made of explicit points (no contours).
    pub fn from_points(points: Vec<Complex64>) -> Self {
        Self { interior_samples: Vec::new(), boundary_samples: points, contours: Vec::new(), spec: None, density: None }
    }

    /// Boundary samples followed by interior samples.
    pub fn samples(&self) -> Vec<Complex64> {
        self.boundary_samples.iter().chain(&self.interior_samples).copied().collect()
    }

    pub fn len(&self) -> usize {
        self.boundary_samples.len() + self.interior_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_real_part(&self) -> f64 {
        self.samples().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn translate(&self, offset: Complex64) -> Self {
        let shift = |v: &[Complex64]| v.iter().map(|z| z + offset).collect::<Vec<_>>();
        Self {
            interior_samples: shift(&self.interior_samples),
            boundary_samples: shift(&self.boundary_samples),
            contours: self.contours.iter().map(|c| Contour { points: shift(&c.points), dz: c.dz.clone(), hole: c.hole }).collect(),
            spec: self.spec.as_ref().map(|s| s.translate(offset)),
            density: self.density,
        }
    }

    /// `∮_{∂K} f` summed over all contours.
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.contours.iter().map(|c| c.integrate(&f)).sum()
    }

    /// One sample per row: `role,re,im` with role `boundary`, `interior` or `contour<i>`.
    pub fn to_csv(&self) -> String {
        let row = |role: String, z: &Complex64| vec![role, format_f64(z.re), format_f64(z.im)];
        let rows = self
            .boundary_samples
            .iter()
            .map(|z| row("boundary".into(), z))
            .chain(self.interior_samples.iter().map(|z| row("interior".into(), z)))
            .chain(self.contours.iter().enumerate().flat_map(|(i, c)| c.points.iter().map(move |z| row(format!("contour{i}"), z))));
        csv_table(&["role", "re", "im"], rows)
    }
}

/// Points `a + (b−a)k/m`, `k < m`, with `m` the smallest count meeting `spacing`.
fn segment_samples(a: Complex64, b: Complex64, spacing: f64, out: &mut Vec<Complex64>) {
    let m = ((b - a).norm() / spacing).ceil().max(1.0) as usize;
    out.extend((0..m).map(|k| a + (b - a) * (k as f64 / m as f64)));
}

fn circle_samples(center: Complex64, radius: f64, spacing: f64, out: &mut Vec<Complex64>) -> usize {
    // chord length 2r·sin(π/m) ≤ spacing
    let m = (PI / (spacing / (2.0 * radius)).min(1.0).asin()).ceil().max(8.0) as usize;
    out.extend((0..m).map(|k| center + Complex64::from_polar(radius, TAU * k as f64 / m as f64)));
    m
}

fn grid_samples(shape: &Shape, lo: Complex64, hi: Complex64, h: f64, out: &mut Vec<Complex64>) {
    if !h.is_finite() {
        return;
    }
    let nx = ((hi.re - lo.re) / h).floor() as usize;
    let ny = ((hi.im - lo.im) / h).floor() as usize;
    // centre the grid inside the bounding box
    let ox = lo.re + 0.5 * ((hi.re - lo.re) - nx as f64 * h);
    let oy = lo.im + 0.5 * ((hi.im - lo.im) - ny as f64 * h);
    for i in 0..=nx {
        for j in 0..=ny {
            let z = Complex64::new(ox + i as f64 * h, oy + j as f64 * h);
            if contains(shape, z) {
                out.push(z);
            }
        }
    }
}

fn discretize_component(shape: &Shape, density: &Density, set: &mut DiscretizedSet) {
    let h = density.boundary_spacing;
    let nodes = density.contour_nodes;
    let panel = |perimeter: f64| (GL_ORDER as f64 * h).min(0.25).min(perimeter * GL_ORDER as f64 / nodes as f64);
    match shape {
        Shape::Disc { center, radius } => {
            let m = circle_samples(*center, *radius, h, &mut set.boundary_samples);
            set.contours.push(Contour::circle(*center, *radius, m.max(nodes), false));
            let r = Complex64::new(*radius, *radius);
            grid_samples(shape, center - r, center + r, density.interior_spacing, &mut set.interior_samples);
        }
        Shape::Rectangle { corner_lo, corner_hi } => {
            let v = rect_vertices(*corner_lo, *corner_hi);
            for i in 0..4 {
                segment_samples(v[i], v[(i + 1) % 4], h, &mut set.boundary_samples);
            }
            set.contours.push(Contour::polygon(&v, panel(perimeter(&v)), false));
            grid_samples(shape, *corner_lo, *corner_hi, density.interior_spacing, &mut set.interior_samples);
        }
        Shape::Annulus { center, r_inner, r_outer } => {
            let mo = circle_samples(*center, *r_outer, h, &mut set.boundary_samples);
            let mi = circle_samples(*center, *r_inner, h, &mut set.boundary_samples);
            set.contours.push(Contour::circle(*center, *r_outer, mo.max(nodes), false));
            set.contours.push(Contour::circle(*center, *r_inner, mi.max(nodes), true));
            let r = Complex64::new(*r_outer, *r_outer);
            grid_samples(shape, center - r, center + r, density.interior_spacing, &mut set.interior_samples);
        }
        Shape::JordanPolygon { vertices } => {
            let n = vertices.len();
            for i in 0..n {
                segment_samples(vertices[i], vertices[(i + 1) % n], h, &mut set.boundary_samples);
            }
            set.contours.push(Contour::polygon(vertices, panel(perimeter(vertices)), false));
            let lo = Complex64::new(
                vertices.iter().map(|v| v.re).fold(f64::INFINITY, f64::min),
                vertices.iter().map(|v| v.im).fold(f64::INFINITY, f64::min),
            );
            let hi = Complex64::new(
                vertices.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max),
                vertices.iter().map(|v| v.im).fold(f64::NEG_INFINITY, f64::max),
            );
            grid_samples(shape, lo, hi, density.interior_spacing, &mut set.interior_samples);
        }
        Shape::Union { components } => {
            for c in components {
                discretize_component(c, density, set);
            }
        }
    }
}

fn perimeter(v: &[Complex64]) -> f64 {
    (0..v.len()).map(|i| (v[(i + 1) % v.len()] - v[i]).norm()).sum()
}

fn rect_vertices(lo: Complex64, hi: Complex64) -> [Complex64; 4] {
    [lo, Complex64::new(hi.re, lo.im), hi, Complex64::new(lo.re, hi.im)]
}
