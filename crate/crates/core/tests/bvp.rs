use num_complex::Complex64 as C64;
use trikernel::bvp::{
    boundary_residual, cauchy, d0_integrand, reconstruct_sections, sokhotski_plemelj, ClosedQuadrature, ContourKind,
    DiagonalOracle, DiagonalSolver, Method, SolverSettings,
};
use trikernel::enumerate::{count_walks, eval_section, extract_section, Domain, Section};
use trikernel::geometry::{in_domain, trace_curve};
use trikernel::kernel::build_kernel;
use trikernel::model::{phi_inverse_point, phi_point, phi_transform, preset};
use trikernel::rational::{q, qi};
use trikernel::Error;

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn solver(m: &str, t: f64) -> DiagonalSolver {
    DiagonalSolver::for_model(&preset(m).unwrap(), t).unwrap()
}

#[test]
fn plemelj_jump_on_circle() {
    let quad = ClosedQuadrature::unit_circle(64).unwrap();
    // Analytic inside: F⁺ = f, F⁻ = 0.
    let a = re(3.0);
    let f: Vec<C64> = quad.nodes.iter().map(|z| 1.0 / (z - a)).collect();
    for j in (0..64).step_by(3).take(20) {
        let (p, m) = sokhotski_plemelj(&f, &quad, j);
        assert!((p - m - f[j]).norm() < 1e-12);
        assert!((p - f[j]).norm() < 1e-6, "{} {}", p, f[j]);
        assert!(m.norm() < 1e-6);
    }
}

#[test]
fn cauchy_basics() {
    let quad = ClosedQuadrature::unit_circle(64).unwrap();
    let one = vec![re(1.0); 64];
    assert!((cauchy(&one, &quad, C64::new(0.2, -0.3)).unwrap() - 1.0).norm() < 1e-13);
    assert!(cauchy(&one, &quad, re(3.0)).unwrap().norm() < 1e-13);
    let id = quad.nodes.clone();
    assert!(cauchy(&id, &quad, re(0.0)).unwrap().norm() < 1e-14);
    assert!(matches!(cauchy(&one, &quad, re(1.0)), Err(Error::PointTooCloseToContour)));
    assert!(ClosedQuadrature::unit_circle(7).is_err());
}

#[test]
fn oracle_satisfies_boundary_condition() {
    let hat = preset("reverse-kreweras").unwrap();
    let k = build_kernel(&phi_transform(&hat)).unwrap().at(0.05).unwrap();
    let contour = trace_curve(&k, 1024).unwrap();
    let oracle = DiagonalOracle::new(&hat, 30).unwrap();
    assert!(boundary_residual(&k, &contour, &oracle, 25, 1e-7).unwrap() < 1e-7);
    let short = DiagonalOracle::new(&hat, 4).unwrap();
    assert!(matches!(boundary_residual(&k, &contour, &short, 25, 1e-12), Err(Error::TruncationTailTooLarge(_))));
    // The jump is antisymmetric under conjugation.
    let s = solver("reverse-kreweras", 0.05);
    for y in [C64::new(0.3, 0.2), C64::new(-0.2, 0.5)] {
        let d = s.theorem2_D(y).unwrap();
        let dc = s.theorem2_D(y.conj()).unwrap();
        assert!((d.conj() - dc).norm() < 1e-12);
    }
}

#[test]
fn diagonal_is_real_on_real_axis() {
    let s = solver("double-kreweras", 0.1);
    for y in [-0.4, 0.0, 0.25, 0.6] {
        let d = s.theorem2_D(re(y)).unwrap();
        assert!(d.im.abs() < 1e-12 * d.re.abs(), "{} {}", y, d);
    }
}

#[test]
fn theorems_agree_with_enumeration() {
    for m in ["reverse-kreweras", "double-kreweras", "e-n-w-sw-s"] {
        let t = 0.05;
        let s = solver(m, t);
        let oracle = DiagonalOracle::new(&preset(m).unwrap(), 40).unwrap();
        for y in [re(0.1), C64::new(-0.3, 0.2), C64::new(0.5, 0.5)] {
            let want = oracle.eval(y, t);
            let tail = oracle.tail(t, y.norm());
            let d1 = s.theorem1_D(y).unwrap();
            let d2 = s.theorem2_D(y).unwrap();
            assert!((d1 - want).norm() < 1e-9 + tail, "{} {} thm1 {} vs {}", m, y, d1, want);
            assert!((d2 - want).norm() < 1e-9 + tail, "{} {} thm2 {} vs {}", m, y, d2, want);
        }
    }
}

#[test]
fn series_route_matches_numerics() {
    let s = solver("reverse-kreweras", 0.1);
    let a = s.evaluate(Method::Theorem2SeriesAtZero, re(0.0)).unwrap();
    let b = s.evaluate(Method::Theorem2, re(0.0)).unwrap();
    let c = s.evaluate(Method::Theorem1, re(0.0)).unwrap();
    assert!((a - b).norm() < 1e-12 && (b - c).norm() < 1e-10, "{} {} {}", a, b, c);
    assert!(matches!(s.evaluate(Method::Theorem2SeriesAtZero, re(0.1)), Err(Error::Unsupported(_))));
    let other = solver("double-kreweras", 0.1);
    assert!(matches!(other.evaluate(Method::Theorem2SeriesAtZero, re(0.0)), Err(Error::Unsupported(_))));
}

#[test]
fn method_names() {
    assert_eq!(Method::parse("thm1").unwrap(), Method::Theorem1);
    assert_eq!(Method::parse("theorem2").unwrap(), Method::Theorem2);
    assert_eq!(Method::parse("series").unwrap(), Method::Theorem2SeriesAtZero);
    assert!(Method::parse("thm3").is_err());
}

#[test]
fn repoled_map_at_origin() {
    let s = solver("reverse-kreweras", 0.1);
    let (v, d) = s.w.eval_jet(re(0.0)).unwrap();
    assert!(v.norm() < 1e-15);
    // Oriented so that w decreases along [y2, Y(x2)].
    assert!((d - re(-1.0)).norm() < 1e-12, "{}", d);
}

#[test]
fn kappa_is_constant() {
    for m in ["reverse-kreweras", "simple", "e-ne-n-sw"] {
        let s = solver(m, 0.1);
        assert!(s.kappa_check < 1e-8, "{} {}", m, s.kappa_check);
        for z in [C64::new(0.1, 0.2), C64::new(-0.3, -0.1), C64::new(0.5, 0.3)] {
            let k = s.kappa_at(z).unwrap();
            assert!((k - s.kappa).norm() < 1e-8 * s.kappa.norm(), "{} {} {} {}", m, z, k, s.kappa);
        }
    }
}

#[test]
fn bounded_near_y2_and_beyond_unit_disc() {
    let t = 0.1;
    let s = solver("reverse-kreweras", t);
    let oracle = DiagonalOracle::new(&preset("reverse-kreweras").unwrap(), 60).unwrap();
    let y2 = s.kernel.branch_points().unwrap().y2;
    for eps in [1e-3, 1e-5] {
        let y = re(y2 + eps);
        let d = s.theorem2_D(y).unwrap();
        assert!((d - oracle.eval(y, t)).norm() < 1e-8, "{} {}", y, d);
    }
    // A point of the domain outside the unit disc.
    let far = s.contour.upper()[s.contour.upper().len() / 2] * 0.95;
    assert!(far.norm() > 1.0 && in_domain(&s.contour, far).unwrap());
    let d = s.theorem2_D(far).unwrap();
    assert!(d.re.is_finite() && d.im.is_finite());
    assert!(matches!(s.theorem2_on(far, ContourKind::UnitCircle), Err(Error::ConvergenceDomainViolated(_))));
}

#[test]
fn mesh_halving_estimate_is_honest() {
    let hat = preset("reverse-kreweras").unwrap();
    let t = 0.1;
    let exact = solver("reverse-kreweras", t).theorem2_D(C64::new(0.2, 0.1)).unwrap();
    for n in [8, 12, 16] {
        let settings = SolverSettings { n_decoupled: n, ..SolverSettings::default() };
        let s = DiagonalSolver::new(&hat, t, settings).unwrap();
        let r = s.theorem2_on(C64::new(0.2, 0.1), ContourKind::Curve).unwrap();
        let actual = (r.value - exact).norm();
        assert!(actual <= r.error + 1e-14, "{} {} {}", n, actual, r.error);
        assert_eq!(r.nodes, n);
    }
}

#[test]
fn refusals() {
    let s = solver("reverse-kreweras", 0.1);
    assert!(matches!(s.theorem2_D(re(50.0)), Err(Error::ConvergenceDomainViolated(_))));
    let on = s.contour.upper()[5];
    assert!(matches!(s.theorem2_D(on), Err(Error::PointTooCloseToContour)));
    for m in ["kreweras", "ne-w-sw-s"] {
        assert!(matches!(DiagonalSolver::for_model(&preset(m).unwrap(), 0.1), Err(Error::UnboundedContour)), "{}", m);
    }
}

#[test]
fn sections_match_enumeration() {
    let hat = preset("reverse-kreweras").unwrap();
    let t = 0.05;
    let s = solver("reverse-kreweras", t);
    let table = count_walks(&hat, Domain::ThreeQuadrant, (0, 0), 40).unwrap();
    let d = |y: C64| s.theorem2_D(y);
    let pts = [
        (C64::new(0.8, 0.1), C64::new(0.9, -0.2)),
        (re(1.2), re(0.7)),
        (C64::new(-0.7, 0.3), C64::new(0.6, 0.5)),
        (C64::new(0.5, -0.6), re(-1.1)),
        (C64::new(1.0, 0.4), C64::new(0.8, 0.0)),
    ];
    for (x, y) in pts {
        let v = reconstruct_sections(&d, &s.kernel, &hat, x, y).unwrap();
        for (got, which) in [(v.l_hat, Section::LHat), (v.d_hat, Section::DHat), (v.u_hat, Section::UHat), (v.c, Section::C)] {
            let want = eval_section(&extract_section(&table, which), x, y, t);
            assert!((got - want).norm() < 1e-5 * want.norm().max(1.0), "{:?} at ({}, {}): {} vs {}", which, x, y, got, want);
        }
    }
    // L₋₀(X) collects the column i = 0 below the axis, read through y = 1/X.
    let col = extract_section(&table, Section::LHat0Minus);
    let r = trikernel::bvp::Reconstruction::new(&s.kernel, &hat, &d).unwrap();
    for x in [re(0.5), C64::new(0.3, 0.4)] {
        let want = eval_section(&col, re(1.0), 1.0 / x, t);
        let got = r.l_minus0(x).unwrap();
        assert!((got - want).norm() < 1e-8, "{} {} {}", x, got, want);
    }
    let (x, y) = (C64::new(0.4, 0.7), C64::new(-1.3, 0.2));
    let (a, b) = phi_point(x, y);
    let (u, v) = phi_inverse_point(a, b);
    assert!((u - x).norm() < 1e-15 && (v - y).norm() < 1e-15);
    assert!(matches!(reconstruct_sections(&d, &s.kernel, &hat, re(5.0), re(5.0)), Err(Error::ConvergenceDomainViolated(_))));
}

#[test]
fn d0_integrand_leading_terms() {
    let ig = d0_integrand(4).unwrap();
    let c1 = ig.coeff(1, 1);
    assert_eq!(c1.coeff(-1), q(-1, 2));
    assert_eq!(c1.terms.len(), 1);
    let c2 = ig.coeff(2, 1);
    assert_eq!(c2.coeff(-2), q(-1, 4));
    assert_eq!(c2.coeff(1), q(1, 4));
    assert_eq!(c2.terms.len(), 2);
    let c3 = ig.coeff(3, 1);
    assert_eq!(c3.coeff(-3), q(-1, 8));
    assert_eq!(ig.coeff(0, 1).coeff(0), qi(0));
}
