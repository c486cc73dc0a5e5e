//! Complex neighbourhoods of [-1, 1] and sampled checks over them.
//!
//! The neighbourhood of radius `r` is the stadium `{z : dist(z, [-1, 1]) < r}`.
//! The shrinking family used by the Gevrey theory has radius `A·n^(-1/k)`.
//! All checks here evaluate on finitely many boundary points; the results are
//! numerical certificates, not proofs.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(feature = "serde")]
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Label carried by every sampled certificate.
pub const CERTIFICATE_KIND: &str = "numerical certificate (sampled, non-rigorous)";

/// Real sample count for interval checks and real sup norms.
pub const REAL_GRID: usize = 2001;
/// Boundary samples per stadium used when nothing else is requested.
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 2000;
/// Points used to confirm that an inner map sends [-1, 1] into itself.
pub const MAP_CHECK_POINTS: usize = 1001;
/// Overshoot of `|phi(x)|` past 1 tolerated as roundoff.
pub const ROUNDOFF_GUARD: f64 = 1e-12;
pub const DEFAULT_LAMBDA_ORDER: usize = 25;

/// Distance from `z` to the segment [-1, 1].
pub fn dist_to_interval(z: Complex64) -> f64 {
    let ax = libm::fabs(z.re);
    if ax <= 1.0 {
        libm::fabs(z.im)
    } else {
        libm::hypot(ax - 1.0, z.im)
    }
}

/// `A·n^(-1/k)`.
pub fn strip_radius(k: f64, a: f64, n: u32) -> f64 {
    a * libm::pow(f64::from(n), -1.0 / k)
}

/// `n + 1` equispaced points on [-1, 1], exactly symmetric about 0.
pub(crate) fn uniform_grid(points: usize) -> Vec<f64> {
    let half = (points - 1) as f64 / 2.0;
    (0..points).map(|i| (i as f64 - half) / half).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct StripDomain {
    pub k: f64,
    pub a: f64,
    pub n: u32,
}

impl StripDomain {
    pub fn new(k: f64, a: f64, n: u32) -> Result<Self> {
        if !(k > 0.0) || !(a > 0.0) || n == 0 {
            return Err(Error::InvalidArgument("strip domain needs k > 0, A > 0, n >= 1"));
        }
        Ok(StripDomain { k, a, n })
    }

    pub fn radius(&self) -> f64 {
        strip_radius(self.k, self.a, self.n)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        dist_to_interval(z) < self.radius()
    }

    pub fn boundary(&self, m: usize) -> Vec<Complex64> {
        stadium_boundary(self.radius(), m)
    }
}

/// `m` points equally spaced by arclength on the boundary of the stadium of
/// radius `r`, counter-clockwise from `1 + r`.
///
/// The perimeter is `4 + 2πr`; when `m` is a multiple of 4 the samples include
/// `1 + r`, `ir`, `-1 - r` and `-ir`.
pub fn stadium_boundary(r: f64, m: usize) -> Vec<Complex64> {
    let quarter = PI * r / 2.0;
    let perimeter = 4.0 + 2.0 * PI * r;
    let arc = |center: f64, theta: f64| Complex64::new(center + r * libm::cos(theta), r * libm::sin(theta));
    (0..m)
        .map(|j| {
            let s = perimeter * j as f64 / m as f64;
            if s < quarter {
                arc(1.0, s / r)
            } else if s < quarter + 2.0 {
                Complex64::new(1.0 - (s - quarter), r)
            } else if s < 3.0 * quarter + 2.0 {
                arc(-1.0, PI / 2.0 + (s - quarter - 2.0) / r)
            } else if s < 3.0 * quarter + 4.0 {
                Complex64::new(-1.0 + (s - 3.0 * quarter - 2.0), -r)
            } else {
                arc(1.0, 3.0 * PI / 2.0 + (s - 3.0 * quarter - 4.0) / r)
            }
        })
        .collect()
}

/// The four extreme points of the stadium of radius `r`.
pub fn stadium_extremes(r: f64) -> [Complex64; 4] {
    [
        Complex64::new(1.0 + r, 0.0),
        Complex64::new(0.0, r),
        Complex64::new(-1.0 - r, 0.0),
        Complex64::new(0.0, -r),
    ]
}

fn boundary_with_extremes(r: f64, m: usize) -> Vec<Complex64> {
    let mut pts = stadium_boundary(r, m);
    pts.extend_from_slice(&stadium_extremes(r));
    pts
}

/// Sampled `max |f(z)|` over the boundary of the stadium of radius `r`
/// (`m` arclength samples plus the four extreme points). For `f` holomorphic
/// on the closed stadium this is a lower estimate of the sup over the whole
/// stadium by the maximum-modulus principle.
pub fn strip_sup_norm(f: &Expr, r: f64, m: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("strip radius must be positive"));
    }
    let mut best = 0.0_f64;
    for z in boundary_with_extremes(r, m) {
        best = best.max(f.eval_complex(z)?.norm());
    }
    Ok(best)
}

/// Sampled sup of `|f|` on [-1, 1] over the default 2001-point uniform grid.
pub fn real_sup_norm(f: &Expr) -> Result<f64> {
    let mut best = 0.0_f64;
    for x in uniform_grid(REAL_GRID) {
        best = best.max(libm::fabs(f.eval_real(x)?));
    }
    Ok(best)
}

/// Confirms that `phi` sends [-1, 1] into [-1, 1] on a 1001-point grid.
/// `term` names the map in the error.
pub fn check_maps_interval(phi: &Expr, term: usize) -> Result<()> {
    for x in uniform_grid(MAP_CHECK_POINTS) {
        let value = phi.eval_real(x)?;
        if !(libm::fabs(value) <= 1.0 + ROUNDOFF_GUARD) {
            return Err(Error::InvalidMap { term, x, value });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Violation {
    pub p: usize,
    pub n: u32,
    pub re: f64,
    pub im: f64,
    pub observed_distance: f64,
    pub required_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct IndexRatio {
    pub n: u32,
    pub max_ratio: f64,
}

/// Outcome of the sampled nesting check
/// `phi_p(stadium(n + 1)) ⊂ stadium(n)` for `n` in a range.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct EkCertificate {
    pub kind: &'static str,
    pub k: f64,
    pub a: f64,
    pub n_lo: u32,
    pub n_hi: u32,
    /// First index from which every check passes through `n_hi`.
    pub m_a: Option<u32>,
    /// Worst `dist(phi_p(z), [-1, 1]) / radius(n)` over everything sampled.
    pub max_ratio: f64,
    pub per_n: Vec<IndexRatio>,
    pub samples_per_boundary: usize,
    /// Worst witness of each failing `(p, n)`, ordered by `(p, n)`.
    pub violations: Vec<Violation>,
    pub violation_count: usize,
    pub pass: bool,
}

/// Samples `phi_p` on the boundary of the stadium of index `n + 1` (plus its
/// extreme points) and requires the image to stay strictly inside the
/// stadium of index `n`, for every map and every `n` in `n_lo..=n_hi`.
pub fn check_ek(maps: &[Expr], k: f64, a: f64, n_lo: u32, n_hi: u32, m: usize) -> Result<EkCertificate> {
    StripDomain::new(k, a, n_lo.max(1))?;
    if n_lo == 0 || n_hi < n_lo {
        return Err(Error::InvalidArgument("index range must satisfy 1 <= n_lo <= n_hi"));
    }
    if m < 8 {
        return Err(Error::InvalidArgument("at least 8 boundary samples are required"));
    }
    for (p, phi) in maps.iter().enumerate() {
        check_maps_interval(phi, p)?;
    }

    let mut per_n = Vec::new();
    let mut violations = Vec::new();
    let mut violation_count = 0;
    let mut n_passes = Vec::new();
    let mut max_ratio = 0.0_f64;
    for n in n_lo..=n_hi {
        let target = strip_radius(k, a, n);
        let samples = boundary_with_extremes(strip_radius(k, a, n + 1), m);
        let mut worst_n = 0.0_f64;
        for (p, phi) in maps.iter().enumerate() {
            let mut witness: Option<Violation> = None;
            for z in &samples {
                let d = dist_to_interval(phi.eval_complex(*z)?);
                let ratio = d / target;
                // NaN counts as a violation
                if !(ratio < 1.0) {
                    violation_count += 1;
                    if witness.as_ref().is_none_or(|w| !(d <= w.observed_distance)) {
                        witness = Some(Violation {
                            p,
                            n,
                            re: z.re,
                            im: z.im,
                            observed_distance: d,
                            required_radius: target,
                        });
                    }
                }
                worst_n = if ratio.is_nan() { f64::NAN } else { worst_n.max(ratio) };
            }
            violations.extend(witness);
        }
        per_n.push(IndexRatio { n, max_ratio: worst_n });
        n_passes.push(worst_n < 1.0);
        max_ratio = if worst_n.is_nan() { f64::NAN } else { max_ratio.max(worst_n) };
    }
    let m_a = n_passes
        .iter()
        .rposition(|ok| !ok)
        .map_or(Some(n_lo), |last_fail| {
            let next = n_lo + last_fail as u32 + 1;
            (next <= n_hi).then_some(next)
        });
    violations.sort_by_key(|v| (v.p, v.n));
    let pass = violations.is_empty() && max_ratio < 1.0;
    Ok(EkCertificate {
        kind: CERTIFICATE_KIND,
        k,
        a,
        n_lo,
        n_hi,
        m_a,
        max_ratio,
        per_n,
        samples_per_boundary: m,
        violations,
        violation_count,
        pass,
    })
}

/// Truncated estimate of `sup_n (‖ψ^(n)‖ / n!)^(1/n)` on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct LambdaReport {
    pub n_max: usize,
    /// `(‖ψ^(n)‖ / n!)^(1/n)` for `n = 1..=n_max`.
    pub values: Vec<f64>,
    pub lambda_hat: f64,
    pub argmax: usize,
    /// Set when the maximum sits at `n_max`, so larger orders might exceed it.
    pub sup_possibly_not_attained: bool,
    pub grid_points: usize,
}

/// Estimates `λ(ψ)` from the Taylor coefficients `ψ^(n)(x)/n!` at 2001
/// equispaced points of [-1, 1] (endpoints included), for `n <= n_max`.
///
/// The coefficients come from truncated power-series arithmetic on the
/// expression tree, which yields the same numbers as repeated symbolic
/// differentiation without the exponential growth of the derivative trees.
pub fn estimate_lambda(psi: &Expr, n_max: usize) -> Result<LambdaReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1"));
    }
    let mut norms = alloc::vec![0.0_f64; n_max + 1];
    for x in uniform_grid(REAL_GRID) {
        let t = psi.taylor(x, n_max)?;
        for (norm, c) in norms.iter_mut().zip(&t) {
            *norm = norm.max(libm::fabs(*c));
        }
    }
    let values: Vec<f64> = (1..=n_max).map(|n| libm::pow(norms[n], 1.0 / n as f64)).collect();
    let mut argmax = 1;
    let mut lambda_hat = values[0];
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > lambda_hat {
            lambda_hat = *v;
            argmax = i + 1;
        }
    }
    Ok(LambdaReport {
        n_max,
        values,
        lambda_hat,
        argmax,
        sup_possibly_not_attained: argmax == n_max,
        grid_points: REAL_GRID,
    })
}
