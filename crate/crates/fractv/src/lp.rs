//! Pointwise l^p geometry: exponents, norms, dual pairing, and Euclidean
//! projection onto l^p balls.
//!
//! Exponents live in [1, inf]; infinity is a distinguished token, never a
//! large float. For q < p the sandwich
//!
//!   |x|_p <= |x|_q <= N^{1/q - 1/p} |x|_p
//!
//! holds on R^N and is relied on by the regularizer tests.

use crate::error::{invalid, Result};

/// An exponent in [1, inf].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(invalid(format!("l^p exponent must lie in [1, inf], got {p}")));
        }
        Ok(LpExponent::Finite(p))
    }

    pub fn infinity() -> Self {
        LpExponent::Infinity
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, LpExponent::Infinity)
    }

    /// 1/p, with 1/inf = 0.
    pub fn reciprocal(&self) -> f64 {
        match self {
            LpExponent::Finite(p) => 1.0 / p,
            LpExponent::Infinity => 0.0,
        }
    }

    /// The Holder conjugate: 1/p + 1/p* = 1.
    pub fn dual(&self) -> LpExponent {
        match self {
            LpExponent::Infinity => LpExponent::Finite(1.0),
            LpExponent::Finite(p) if *p == 1.0 => LpExponent::Infinity,
            LpExponent::Finite(p) => LpExponent::Finite(p / (p - 1.0)),
        }
    }

    /// Total order with infinity sorted last; used for deterministic
    /// tie-breaking of parameter tuples.
    pub fn cmp_inf_last(&self, other: &LpExponent) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (LpExponent::Infinity, LpExponent::Infinity) => Ordering::Equal,
            (LpExponent::Infinity, _) => Ordering::Greater,
            (_, LpExponent::Infinity) => Ordering::Less,
            (LpExponent::Finite(a), LpExponent::Finite(b)) => {
                a.partial_cmp(b).expect("validated exponents")
            }
        }
    }
}

impl std::fmt::Display for LpExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpExponent::Finite(p) => write!(f, "{p}"),
            LpExponent::Infinity => write!(f, "inf"),
        }
    }
}

/// |x|_p. Scales by the max entry first, so large exponents do not
/// overflow.
pub fn lp_norm(x: &[f64], p: LpExponent) -> f64 {
    let m = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    match p {
        LpExponent::Infinity => m,
        LpExponent::Finite(p) => {
            if p == 1.0 {
                x.iter().map(|v| v.abs()).sum()
            } else if p == 2.0 {
                x.iter().map(|v| v * v).sum::<f64>().sqrt()
            } else {
                let sum: f64 = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
                m * sum.powf(1.0 / p)
            }
        }
    }
}

/// Euclidean (l^2-metric) projection of `x` onto the closed l^p ball of
/// the given radius. Radius 0 maps everything to the origin; points
/// already inside are returned unchanged, making the map idempotent. The
/// general-exponent branch solves the KKT system to a constraint residual
/// below 1e-12 * max(radius, 1).
pub fn project_ball(x: &[f64], p: LpExponent, radius: f64) -> Result<Vec<f64>> {
    if !radius.is_finite() || radius < 0.0 {
        return Err(invalid(format!("ball radius must be >= 0, got {radius}")));
    }
    let mut out = x.to_vec();
    project_ball_mut(&mut out, p, radius);
    Ok(out)
}

/// In-place variant of [`project_ball`] for validated inputs (solver hot
/// path).
pub(crate) fn project_ball_mut(x: &mut [f64], p: LpExponent, radius: f64) {
    if radius == 0.0 {
        x.fill(0.0);
        return;
    }
    match p {
        LpExponent::Infinity => {
            for v in x.iter_mut() {
                *v = v.clamp(-radius, radius);
            }
        }
        LpExponent::Finite(p) if p == 2.0 => {
            let n: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > radius {
                let scale = radius / n;
                for v in x.iter_mut() {
                    *v *= scale;
                }
            }
        }
        LpExponent::Finite(p) if p == 1.0 => project_l1(x, radius),
        LpExponent::Finite(p) => project_general(x, p, radius),
    }
}

/// Sorted-threshold projection onto the l^1 ball (simplex projection on
/// the absolute values).
fn project_l1(x: &mut [f64], radius: f64) {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return;
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / (i + 1) as f64;
        if *m > t {
            theta = t;
        } else {
            break;
        }
    }
    for v in x.iter_mut() {
        let shrunk = (v.abs() - theta).max(0.0);
        *v = v.signum() * shrunk;
    }
}

/// KKT solve for p in (1, inf) \ {2}: find lambda >= 0 such that the
/// coordinatewise roots of  t + lambda p t^{p-1} = |x_i|  have l^p norm
/// equal to the radius. The outer solve uses safeguarded bisection with a
/// doubling bracket, the inner one Newton with a bisection fallback.
fn project_general(x: &mut [f64], p: f64, radius: f64) {
    if lp_norm(x, LpExponent::Finite(p)) <= radius {
        return;
    }
    let mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let tol = 1e-12 * radius.max(1.0);

    let norm_at = |lambda: f64, out: &mut Vec<f64>| -> f64 {
        out.clear();
        for &m in &mags {
            out.push(coordinate_root(m, lambda, p));
        }
        lp_norm(out, LpExponent::Finite(p))
    };

    let mut roots = Vec::with_capacity(mags.len());
    let mut lo = 0.0;
    let mut hi = 1.0;
    while norm_at(hi, &mut roots) > radius {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    let mut best = hi;
    let mut best_err = f64::INFINITY;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let n = norm_at(mid, &mut roots);
        let err = (n - radius).abs();
        if err < best_err {
            best = mid;
            best_err = err;
        }
        if err <= tol || hi - lo <= f64::EPSILON * hi {
            break;
        }
        if n > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    norm_at(best, &mut roots);
    for (v, r) in x.iter_mut().zip(roots.iter()) {
        *v = v.signum() * r;
    }
}

/// Root of f(t) = t + lambda p t^{p-1} - m on [0, m], for m >= 0.
fn coordinate_root(m: f64, lambda: f64, p: f64) -> f64 {
    if lambda == 0.0 {
        return m;
    }
    if m == 0.0 {
        return 0.0;
    }
    let f = |t: f64| t + lambda * p * t.powf(p - 1.0) - m;
    let mut lo = 0.0;
    let mut hi = m;
    let mut t = m / (1.0 + lambda * p * m.powf(p - 2.0).min(1e300));
    if !t.is_finite() || t <= 0.0 || t >= m {
        t = 0.5 * m;
    }
    for _ in 0..100 {
        let ft = f(t);
        if ft.abs() <= 1e-15 * m.max(1.0) {
            return t;
        }
        if ft > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let dft = 1.0 + lambda * p * (p - 1.0) * t.powf(p - 2.0);
        let newton = t - ft / dft;
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * m {
            break;
        }
    }
    t
}

/// Mixed mass h^2 * sum_x |field(x)|_p, the discrete M_{l^p} measure norm
/// of a multi-channel field.
pub fn mixed_mass(field: &crate::image::VectorField, p: LpExponent) -> f64 {
    let n = field.width() * field.height();
    let c = field.channels();
    let mut pointwise = vec![0.0; c];
    let mut sum = 0.0;
    for i in 0..n {
        for (k, plane) in field.planes().iter().enumerate() {
            pointwise[k] = plane[i];
        }
        sum += lp_norm(&pointwise, p);
    }
    field.h() * field.h() * sum
}
