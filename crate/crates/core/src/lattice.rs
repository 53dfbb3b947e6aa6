//! Small-dimensional lattice reduction (LLL) and Babai rounding, used to find
//! heights `t` where the phases `t·log p_j` simultaneously approach given targets.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

/// LLL-reduces the lattice spanned by `embed(basis[i])`, updating the integer
/// coordinate vectors in place.
fn lll(basis: &mut [Vec<i64>], embed: &dyn Fn(&[i64]) -> DVector<f64>) {
    const DELTA: f64 = 0.99;
    let n = basis.len();
    let gram_schmidt = |basis: &[Vec<i64>]| -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
        let vecs: Vec<DVector<f64>> = basis.iter().map(|b| embed(b)).collect();
        let mut stars: Vec<DVector<f64>> = Vec::with_capacity(n);
        for v in &vecs {
            let mut s = v.clone();
            for t in &stars {
                let d = t.norm_squared();
                if d > 0.0 {
                    s -= t * (v.dot(t) / d);
                }
            }
            stars.push(s);
        }
        (vecs, stars)
    };
    let mut k = 1;
    let mut guard = 0;
    while k < n && guard < 100_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (vecs, stars) = gram_schmidt(basis);
            let d = stars[j].norm_squared();
            if d == 0.0 {
                continue;
            }
            let mu = (vecs[k].dot(&stars[j]) / d).round();
            if mu != 0.0 && mu.abs() < 9e15 {
                let q = mu as i64;
                let bj = basis[j].clone();
                for (x, y) in basis[k].iter_mut().zip(&bj) {
                    *x -= q * y;
                }
            }
        }
        let (vecs, stars) = gram_schmidt(basis);
        let prev = stars[k - 1].norm_squared();
        let mu = if prev > 0.0 { vecs[k].dot(&stars[k - 1]) / prev } else { 0.0 };
        if stars[k].norm_squared() >= (DELTA - mu * mu) * prev {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
}

/// Babai nearest-plane: integer coordinates of a lattice point close to `target`.
fn babai(basis: &[Vec<i64>], embed: &dyn Fn(&[i64]) -> DVector<f64>, target: &DVector<f64>) -> Vec<i64> {
    let vecs: Vec<DVector<f64>> = basis.iter().map(|b| embed(b)).collect();
    let mut stars: Vec<DVector<f64>> = Vec::with_capacity(vecs.len());
    for v in &vecs {
        let mut s = v.clone();
        for t in &stars {
            let d = t.norm_squared();
            if d > 0.0 {
                s -= t * (v.dot(t) / d);
            }
        }
        stars.push(s);
    }
    let mut w = target.clone();
    let mut coords = vec![0i64; basis[0].len()];
    for i in (0..basis.len()).rev() {
        let d = stars[i].norm_squared();
        if d == 0.0 {
            continue;
        }
        let c = (w.dot(&stars[i]) / d).round();
        if c == 0.0 || c.abs() > 9e15 {
            continue;
        }
        w -= &vecs[i] * c;
        let c = c as i64;
        for (x, y) in coords.iter_mut().zip(&basis[i]) {
            *x += c * y;
        }
    }
    coords
}

/// Heights `t` (|t| ≤ `max_t`) at which `-t·logs[j] ≡ theta[j] (mod 2π)`
/// approximately, with the phase error measured in the quadratic form `metric`.
///
/// The first phase is matched exactly; the rest become a closest-vector
/// problem in a lattice that also penalizes large `t`, solved at several
/// height scales.
pub fn steering_times(logs: &[f64], theta: &[f64], metric: &DMatrix<f64>, max_t: f64) -> Vec<f64> {
    let k = logs.len();
    if k == 0 || max_t <= 0.0 {
        return Vec::new();
    }
    let u: Vec<f64> = logs.iter().map(|l| l / TAU).collect();
    let phi: Vec<f64> = theta.iter().map(|t| t / TAU).collect();
    let time = |m1: i64| (m1 as f64 - phi[0]) / u[0];
    if k == 1 {
        return (-2..=2).map(time).filter(|t| t.abs() <= max_t).collect();
    }
    let r: Vec<f64> = (1..k).map(|j| u[j] / u[0]).collect();
    let psi: Vec<f64> = (1..k).map(|j| phi[j] - phi[0] * r[j - 1]).collect();
    let sub = metric.view((1, 1), (k - 1, k - 1)).into_owned();
    let l = match sub.clone().cholesky() {
        Some(ch) => ch.l(),
        None => DMatrix::identity(k - 1, k - 1),
    };
    let lt = l.transpose();
    let rho = 0.1 * sub.diagonal().abs().max().max(1e-12).sqrt();
    let m_max = (max_t * u[0]).floor().max(1.0);

    let mut times = Vec::new();
    let mut scale = 1e3f64.min(m_max);
    loop {
        let eta = rho / scale;
        // coords: [m1, m2, .., mk]; embedded as (η m1, 2π Lᵀ (m1 r − m))
        let embed = |m: &[i64]| -> DVector<f64> {
            let e = DVector::from_fn(k - 1, |j, _| m[0] as f64 * r[j] - m[j + 1] as f64);
            let w = &lt * e * TAU;
            DVector::from_fn(k, |i, _| if i == 0 { eta * m[0] as f64 } else { w[i - 1] })
        };
        let mut basis: Vec<Vec<i64>> = (0..k)
            .map(|i| {
                let mut v = vec![0i64; k];
                v[i] = 1;
                v
            })
            .collect();
        lll(&mut basis, &embed);
        let shift = &lt * DVector::from_column_slice(&psi) * TAU;
        let target = DVector::from_fn(k, |i, _| if i == 0 { 0.0 } else { -shift[i - 1] });
        let centre = babai(&basis, &embed, &target);
        let mut cands = vec![centre.clone()];
        for b in &basis {
            for sign in [-1i64, 1] {
                cands.push(centre.iter().zip(b).map(|(c, x)| c + sign * x).collect());
            }
        }
        for m in cands {
            let t = time(m[0]);
            if t.is_finite() && t.abs() <= max_t {
                times.push(t);
            }
        }
        if scale >= m_max {
            break;
        }
        scale = (scale * 100.0).min(m_max);
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    times
}
