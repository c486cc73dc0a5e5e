//! Neumann-series solution of `Φ - T(Φ) = u` and regularity diagnostics.
//!
//! The iteration `Φ_{m+1} = u + T(Φ_m)`, `Φ_0 = u`, produces the partial sums
//! `Σ_{j<=m} T^j(u)`. It stops on the Banach a-posteriori estimate
//! `‖Φ_{m+1} - Φ_m‖·ρ/(1-ρ) <= tol` with `ρ` the interval contraction
//! constant, once the residual on the verification grid also meets `tol`.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::Serialize;

use crate::cheb::{chebyshev_points, ChebRep};
use crate::error::{Error, Result};
use crate::operator::OperatorSpec;

/// `ρ` must stay below `1 - CONTRACTION_MARGIN`.
pub const CONTRACTION_MARGIN: f64 = 1e-9;
pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Points of the verification grid used for the reported residual.
pub const RESIDUAL_GRID: usize = 1001;

/// Coefficients at or below this fraction of the largest are ignored by the
/// decay fit.
pub const DECAY_FLOOR: f64 = 1e-13;
/// Minimum number of coefficients above the floor for a decay fit.
pub const DECAY_MIN_COEFFS: usize = 16;
const DECAY_WINDOW_START: usize = 8;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct DecayFit {
    /// Exponent of the best fit `|c_j| ≈ C·exp(-c·j^beta)`.
    pub beta: f64,
    /// Rate `c`.
    pub rate: f64,
    /// Prefactor `C`.
    pub scale: f64,
    /// First and last coefficient index of the fitting window.
    pub fit_range: (usize, usize),
    /// Points used in the fit (window entries above the floor).
    pub points_used: usize,
    /// Root-mean-square residual of `log|c_j|`.
    pub residual_of_fit: f64,
    pub k_target: f64,
    /// `k/(k+1)`, the exponent expected for a Gevrey-k function.
    pub beta_target: f64,
    /// Set when `beta < beta_target - 0.1`. Never an error.
    pub warning: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Solution {
    pub phi: ChebRep,
    pub iterations: usize,
    pub residual: f64,
    pub apriori_bound: f64,
    pub aposteriori_bound: f64,
    pub rho_used: f64,
    pub truncation_budget: f64,
    /// `None` when the solution has too few significant coefficients.
    pub decay: Option<DecayFit>,
}

/// `norm_u·ρ^(m+1)/(1-ρ)`, the bound on the distance from the `m`-th partial
/// sum to the full Neumann series.
pub fn apriori_bound(rho: f64, norm_u: f64, m: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::ContractionViolation { rho });
    }
    let exp = i32::try_from(m + 1).unwrap_or(i32::MAX);
    Ok(norm_u * libm::pow(rho, f64::from(exp)) / (1.0 - rho))
}

/// `max |Φ(x) - Σ a_n(x)·Φ(phi_n(x)) - u(x)|` over a `grid`-point Chebyshev
/// grid, with the operator summed directly from the terms (no
/// re-interpolation).
pub fn residual(op: &OperatorSpec, phi: &ChebRep, u: &ChebRep, grid: usize) -> Result<f64> {
    if grid < 101 {
        return Err(Error::InvalidArgument("residual grid needs at least 101 points"));
    }
    let mut worst = 0.0_f64;
    for x in chebyshev_points(grid - 1) {
        let r = phi.eval_unchecked(x) - op.eval_at(phi, x)? - u.eval_unchecked(x);
        worst = worst.max(libm::fabs(r));
    }
    Ok(worst)
}

fn check_contraction(op: &OperatorSpec) -> Result<f64> {
    let rho = op.contraction_real()?;
    if !(rho < 1.0 - CONTRACTION_MARGIN) {
        return Err(Error::ContractionViolation { rho });
    }
    Ok(rho)
}

/// Solves `Φ - T(Φ) = u` starting from `Φ_0 = u`.
pub fn solve_neumann(op: &OperatorSpec, u: &ChebRep, tol: f64, max_iter: usize) -> Result<Solution> {
    solve_from(op, u, u.clone(), tol, max_iter)
}

/// Same iteration `Φ_{m+1} = u + T(Φ_m)` from an arbitrary starting iterate.
pub fn solve_from(
    op: &OperatorSpec,
    u: &ChebRep,
    initial: ChebRep,
    tol: f64,
    max_iter: usize,
) -> Result<Solution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive"));
    }
    let rho = check_contraction(op)?;
    let norm_u = u.sup();
    let mut phi = initial;
    let mut increment = f64::INFINITY;
    for m in 1..=max_iter {
        let next = ChebRep::combine(1.0, u, 1.0, &op.apply(&phi)?);
        increment = ChebRep::combine(1.0, &next, -1.0, &phi).sup();
        phi = next;
        let estimate = increment * rho / (1.0 - rho);
        if estimate > tol {
            continue;
        }
        let res = residual(op, &phi, u, RESIDUAL_GRID)?;
        if res > tol {
            continue;
        }
        let truncation_budget = op.tail_bound() * phi.sup() / (1.0 - rho);
        let decay = match fit_coeff_decay(&phi, op.k()) {
            Ok(fit) => Some(fit),
            Err(Error::TooFewCoefficients { .. }) => None,
            Err(e) => return Err(e),
        };
        return Ok(Solution {
            iterations: m,
            residual: res,
            apriori_bound: apriori_bound(rho, norm_u, m)?,
            aposteriori_bound: estimate + truncation_budget,
            rho_used: rho,
            truncation_budget,
            decay,
            phi,
        });
    }
    Err(Error::NonConvergence { iterations: max_iter, increment })
}

/// `Φ_0..=Φ_m` of the recursion `Φ_{j+1} = u + T(Φ_j)`, `Φ_0 = u`.
pub fn picard_iterates(op: &OperatorSpec, u: &ChebRep, m: usize) -> Result<Vec<ChebRep>> {
    let mut out = Vec::with_capacity(m + 1);
    out.push(u.clone());
    for j in 0..m {
        let next = ChebRep::combine(1.0, u, 1.0, &op.apply(&out[j])?);
        out.push(next);
    }
    Ok(out)
}

/// Partial sums `S_0..=S_m` of `Σ T^j(u)`, accumulating the terms `T^j(u)`.
pub fn neumann_partial_sums(op: &OperatorSpec, u: &ChebRep, m: usize) -> Result<Vec<ChebRep>> {
    let mut out = Vec::with_capacity(m + 1);
    let mut term = u.clone();
    let mut sum = u.clone();
    out.push(sum.clone());
    for _ in 0..m {
        term = op.apply(&term)?;
        sum = ChebRep::combine(1.0, &sum, 1.0, &term);
        out.push(sum.clone());
    }
    Ok(out)
}

/// Fits `log|c_j| ≈ log C - c·j^beta` over the window `[8, last above floor]`,
/// scanning `beta = 0.05, 0.10, …, 1.50` and solving for `(log C, c)` by
/// linear least squares at each `beta`.
pub fn fit_coeff_decay(rep: &ChebRep, k_target: f64) -> Result<DecayFit> {
    if !(k_target > 0.0) {
        return Err(Error::InvalidArgument("k must be positive"));
    }
    let coeffs = rep.coeffs();
    let cmax = coeffs.iter().fold(0.0_f64, |m, c| m.max(libm::fabs(*c)));
    let floor = DECAY_FLOOR * cmax;
    let above = coeffs.iter().filter(|c| libm::fabs(**c) > floor).count();
    if cmax == 0.0 || above < DECAY_MIN_COEFFS {
        return Err(Error::TooFewCoefficients { found: above, needed: DECAY_MIN_COEFFS });
    }
    let last = coeffs.iter().rposition(|c| libm::fabs(*c) > floor).unwrap_or(0);
    let points: Vec<(f64, f64)> = (DECAY_WINDOW_START..=last)
        .filter(|&j| libm::fabs(coeffs[j]) > floor)
        .map(|j| (j as f64, libm::log(libm::fabs(coeffs[j]))))
        .collect();
    if points.len() < 3 {
        return Err(Error::TooFewCoefficients { found: points.len(), needed: 3 });
    }

    let mut best: Option<(f64, f64, f64, f64)> = None;
    for step in 1..=30 {
        let beta = 0.05 * step as f64;
        let (log_c, rate, sse) = linear_fit(&points, beta);
        if best.is_none_or(|(_, _, _, b)| sse < b) {
            best = Some((beta, rate, log_c, sse));
        }
    }
    let (beta, rate, log_c, sse) = best.expect("beta grid is non-empty");
    let beta_target = k_target / (k_target + 1.0);
    Ok(DecayFit {
        beta,
        rate,
        scale: libm::exp(log_c),
        fit_range: (DECAY_WINDOW_START, last),
        points_used: points.len(),
        residual_of_fit: libm::sqrt(sse / points.len() as f64),
        k_target,
        beta_target,
        warning: beta < beta_target - 0.1,
    })
}

/// Least squares for `y ≈ p - rate·j^beta`; returns `(p, rate, sse)`.
fn linear_fit(points: &[(f64, f64)], beta: f64) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(j, y) in points {
        let t = libm::pow(j, beta);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    let sse = points
        .iter()
        .map(|&(j, y)| {
            let e = y - (intercept + slope * libm::pow(j, beta));
            e * e
        })
        .sum();
    (intercept, -slope, sse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::{interpolate, DEFAULT_MAX_DEGREE, DEFAULT_TOL as CHEB_TOL};
    use crate::expr::parse_expr;
    use crate::operator::TermSpec;
    use alloc::vec;

    fn example1() -> OperatorSpec {
        let t = TermSpec::new(parse_expr("0.5").unwrap(), parse_expr("sin(x)").unwrap(), 0.5);
        OperatorSpec::build(vec![t], 0.0, 1.0).unwrap()
    }

    fn minus_x() -> ChebRep {
        ChebRep::from_coeffs(vec![0.0, -1.0], CHEB_TOL)
    }

    #[test]
    fn apriori_examples() {
        assert_eq!(apriori_bound(0.5, 1.0, 10).unwrap(), 9.765625e-4);
        assert_eq!(apriori_bound(0.0, 1.0, 0).unwrap(), 0.0);
        assert_eq!(apriori_bound(0.0, 3.0, 7).unwrap(), 0.0);
        assert!((apriori_bound(0.25, 2.0, 3).unwrap() - 1.0 / 96.0).abs() < 1e-17);
        assert!(apriori_bound(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn zero_operator_returns_rhs_after_one_iteration() {
        let op = OperatorSpec::build(vec![], 0.0, 1.0).unwrap();
        let u = interpolate(libm::cos, CHEB_TOL, DEFAULT_MAX_DEGREE).unwrap();
        let sol = solve_neumann(&op, &u, 1e-11, 10).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.phi, u);
        assert!(residual(&op, &u, &u, 101).unwrap() <= 1e-14);
    }

    #[test]
    fn example1_is_odd_and_vanishes_at_zero() {
        let sol = solve_neumann(&example1(), &minus_x(), 1e-11, 200).unwrap();
        assert!(sol.phi.eval(0.0).unwrap().abs() <= 1e-12);
        for c in sol.phi.coeffs().iter().step_by(2) {
            assert!(c.abs() <= 1e-12);
        }
        assert!(sol.residual <= 1e-10);
        assert_eq!(sol.rho_used, 0.5);
    }

    #[test]
    fn perturbed_solution_has_half_residual() {
        let op = example1();
        let sol = solve_neumann(&op, &minus_x(), 1e-11, 200).unwrap();
        let shifted = ChebRep::combine(1.0, &sol.phi, 0.1, &ChebRep::from_coeffs(vec![1.0], CHEB_TOL));
        let r = residual(&op, &shifted, &minus_x(), 1001).unwrap();
        assert!((r - 0.05).abs() < 1e-10);
    }

    #[test]
    fn contraction_and_iteration_failures() {
        let t = TermSpec::new(parse_expr("1.2").unwrap(), parse_expr("sin(x)").unwrap(), 0.5);
        let op = OperatorSpec::build(vec![t], 0.0, 1.0).unwrap();
        assert!(matches!(
            solve_neumann(&op, &minus_x(), 1e-11, 50),
            Err(Error::ContractionViolation { .. })
        ));
        assert!(matches!(
            solve_neumann(&example1(), &minus_x(), 1e-11, 3),
            Err(Error::NonConvergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn different_starting_iterates_agree() {
        let op = example1();
        let a = solve_neumann(&op, &minus_x(), 1e-12, 200).unwrap();
        let b = solve_from(&op, &minus_x(), ChebRep::zero(CHEB_TOL), 1e-12, 200).unwrap();
        assert!(ChebRep::combine(1.0, &a.phi, -1.0, &b.phi).sup() <= 1e-10);
    }

    #[test]
    fn polynomial_has_too_few_coefficients() {
        let p = ChebRep::from_coeffs(vec![1.0, 0.5, 0.25], CHEB_TOL);
        assert!(matches!(fit_coeff_decay(&p, 1.0), Err(Error::TooFewCoefficients { .. })));
    }

    #[test]
    fn exact_geometric_decay_fits_beta_one() {
        let coeffs: Vec<f64> = (0..40).map(|j| libm::pow(0.5, j as f64)).collect();
        let fit = fit_coeff_decay(&ChebRep::from_coeffs(coeffs, CHEB_TOL), 1.0).unwrap();
        assert!((fit.beta - 1.0).abs() < 1e-12);
        assert!((fit.rate - core::f64::consts::LN_2).abs() < 1e-10);
        assert!(!fit.warning);
    }
}
