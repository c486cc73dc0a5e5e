//! Library results against reference values computed here by other means.

use std::f64::consts::PI;

use feq_core::cheb::{interpolate, DEFAULT_MAX_DEGREE, DEFAULT_TOL};
use feq_core::strip::stadium_boundary;
use feq_core::suite::paper_example;
use feq_core::{estimate_lambda, parse_expr, strip_sup_norm, ChebRep, Expr};
use num_complex::Complex64;

/// `c_j = (2/π) ∫_0^π f(cos θ) cos(jθ) dθ` (halved for j = 0) by the
/// trapezoid rule, which is spectrally accurate for periodic integrands.
fn cheb_coeff_by_quadrature(f: impl Fn(f64) -> f64, j: usize) -> f64 {
    let m = 400;
    let mut s = 0.0;
    for i in 0..=m {
        let th = PI * i as f64 / m as f64;
        let w = if i == 0 || i == m { 0.5 } else { 1.0 };
        s += w * f(th.cos()) * (j as f64 * th).cos();
    }
    let c = 2.0 * s / m as f64;
    if j == 0 {
        c / 2.0
    } else {
        c
    }
}

#[test]
fn exp_coefficients_match_quadrature() {
    let rep = interpolate(f64::exp, DEFAULT_TOL, DEFAULT_MAX_DEGREE).unwrap();
    for j in 0..10 {
        let q = cheb_coeff_by_quadrature(f64::exp, j);
        assert!((rep.coeffs()[j] - q).abs() < 1e-14, "j={j}");
    }
    // c_1 = 2 I_1(1)
    assert!((rep.coeffs()[1] - 2.0 * 0.565_159_103_992_485_f64).abs() < 1e-14);
}

#[test]
fn derivative_matches_central_differences() {
    let f = |x: f64| (3.0 * x).sin() / (2.0 + x);
    let d = interpolate(f, DEFAULT_TOL, DEFAULT_MAX_DEGREE).unwrap().differentiate();
    let h = 1e-5;
    for i in 1..20 {
        let x = -0.95 + 0.1 * i as f64;
        let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        assert!((d.eval(x).unwrap() - fd).abs() < 1e-9, "x={x}");
    }
}

#[test]
fn operator_application_values() {
    let op = paper_example(1, 1).unwrap().op;
    let id = ChebRep::from_coeffs(vec![0.0, 1.0], DEFAULT_TOL);
    let out = op.apply(&id).unwrap();
    assert!((out.eval(1.0).unwrap() - 0.5 * 1.0_f64.sin()).abs() < 1e-15);
    assert!((out.eval(1.0).unwrap() - 0.420_735_492_4).abs() < 1e-10);

    let p = paper_example(3, 40).unwrap();
    let one = ChebRep::from_coeffs(vec![1.0], DEFAULT_TOL);
    let out = p.op.apply(&one).unwrap();
    for x in [-1.0, -0.3, 0.0, 0.6, 1.0] {
        let full = x * x / (2.0 * (x * x + 1.0));
        assert!((out.eval(x).unwrap() - full).abs() <= p.op.tail_bound() + 1e-15, "x={x}");
    }
}

/// Independent boundary parametrization, evaluated with `num_complex` directly.
fn stadium_sup(f: impl Fn(Complex64) -> Complex64, r: f64, m: usize) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..m {
        let t = i as f64 / m as f64;
        // four pieces of equal parameter length: top, right cap, bottom, left cap
        let z = match (4.0 * t) as usize {
            0 => Complex64::new(1.0 - 8.0 * t, r),
            1 => Complex64::new(-1.0, 0.0) + Complex64::from_polar(r, PI / 2.0 + PI * (4.0 * t - 1.0)),
            2 => Complex64::new(-1.0 + 2.0 * (4.0 * t - 2.0), -r),
            _ => Complex64::new(1.0, 0.0) + Complex64::from_polar(r, -PI / 2.0 + PI * (4.0 * t - 3.0)),
        };
        best = best.max(f(z).norm());
    }
    best
}

#[test]
fn strip_sup_of_sine_matches_fine_sampling() {
    let sin = parse_expr("sin(x)").unwrap();
    for r in [0.1, 0.25, 0.5] {
        let lib = strip_sup_norm(&sin, r, 2000).unwrap();
        let oracle = stadium_sup(|z| z.sin(), r, 1 << 16);
        assert!((lib - oracle).abs() < 1e-6 * oracle, "r={r}: {lib} vs {oracle}");
        // the modulus of a holomorphic function cannot exceed its sup on the
        // real axis translated by r: |sin(x+iy)|^2 = sin^2 x + sinh^2 y
        let analytic_top = ((1.0f64).sin().powi(2) + r.sinh().powi(2)).sqrt();
        assert!(lib >= analytic_top - 1e-15);
    }
}

#[test]
fn strip_contraction_of_truncated_family() {
    let p = paper_example(3, 20).unwrap();
    let terms = p.op.terms().to_vec();
    let mut oracle = 0.0;
    for (i, _) in terms.iter().enumerate() {
        let n = (i + 1) as f64;
        let w = 2f64.powf(n + 1.0);
        oracle += stadium_sup(|z| z * z / (w * (z * z + 1.0)), 0.25, 1 << 14);
    }
    let sigma_quarter: Vec<_> =
        terms.iter().map(|t| feq_core::TermSpec::new(t.a.clone(), t.phi.clone(), 0.25)).collect();
    let op = feq_core::OperatorSpec::build(sigma_quarter, 0.0, 1.0).unwrap();
    let lib = op.contraction_strip(2000).unwrap();
    assert!(lib > 0.25 && lib < 1.0, "{lib}");
    assert!((lib - oracle).abs() < 1e-6, "{lib} vs {oracle}");
}

/// Same sup-norm ratios from repeated symbolic differentiation.
fn lambda_by_derivatives(psi: &Expr, n_max: usize) -> Vec<f64> {
    let mut d = psi.clone();
    let mut fact = 1.0;
    let mut out = Vec::new();
    for n in 1..=n_max {
        d = d.derivative().unwrap();
        fact *= n as f64;
        let mut sup: f64 = 0.0;
        for i in 0..=2000 {
            let x = (i as f64 - 1000.0) / 1000.0;
            sup = sup.max(d.eval_real(x).unwrap().abs());
        }
        out.push((sup / fact).powf(1.0 / n as f64));
    }
    out
}

#[test]
fn jets_agree_with_symbolic_derivatives() {
    for text in ["sin(x)", "sin(sin(x - 1))", "x^2 / (x^2 + 1)", "iter_scaled(sin, 3)", "cos(0.5*x) * sin(x/3)"] {
        let psi = parse_expr(text).unwrap();
        let lib = estimate_lambda(&psi, 4).unwrap();
        let oracle = lambda_by_derivatives(&psi, 4);
        for (n, (a, b)) in lib.values.iter().zip(&oracle).enumerate() {
            assert!((a - b).abs() < 1e-12 * b.max(1.0), "{text} n={}: {a} vs {b}", n + 1);
        }
    }
}

#[test]
fn boundary_points_lie_on_the_stadium() {
    for z in stadium_boundary(0.3, 500) {
        let d = feq_core::dist_to_interval(z);
        assert!((d - 0.3).abs() < 1e-14, "{z}");
    }
}
