//! Acceptance suite: one line `criterion N: PASS|FAIL` per criterion, nonzero
//! exit status if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use num_bigint::BigUint;
use num_complex::Complex64 as C64;

use trikernel::bvp::{
    boundary_residual, d0_pipeline, theorem2_D0_series, ContourKind, DiagonalOracle, DiagonalSolver,
};
use trikernel::conformal::{
    anti_tutte_pair, check_w_ode, decoupling_residuals, gessel_g, gluing_for, gluing_residual, kreweras_series,
    ode_data, ode_samples, GluingKind, GluingMap,
};
use trikernel::enumerate::{check_functional_equation, count_walks, Domain};
use trikernel::geometry::{indices, trace_curve, CurveParam};
use trikernel::kernel::build_kernel;
use trikernel::model::{group_order, phi_transform, preset, GroupOrder, SYMMETRIC_MODELS};
use trikernel::rational::q;
use trikernel::{PuiseuxSeries, Q};

type Check = Result<(), String>;

const EXCURSIONS: [u64; 8] = [1, 4, 46, 706, 12472, 239632, 4869440, 102995616];
const BOUNDED: [&str; 6] = ["simple", "reverse-kreweras", "double-kreweras", "e-ne-n-sw", "e-n-w-sw-s", "e-ne-n-w-s"];

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Debug>(ctx: &str) -> impl FnOnce(E) -> String + '_ {
    move |e| format!("{}: {:?}", ctx, e)
}

fn criterion1() -> Check {
    let start = Instant::now();
    let table = count_walks(&preset("reverse-kreweras").unwrap(), Domain::ThreeQuadrant, (0, 0), 24)
        .map_err(err("count_walks"))?;
    let elapsed = start.elapsed().as_secs_f64();
    for (k, &c) in EXCURSIONS.iter().enumerate() {
        let got = table.count(3 * k, 0, 0);
        ensure(got == BigUint::from(c), || format!("n = {}: {} != {}", 3 * k, got, c))?;
    }
    ensure(elapsed < 10.0, || format!("enumeration took {:.2} s", elapsed))?;
    println!("  counts match through n = 21 ({:.3} s)", elapsed);
    Ok(())
}

fn criterion2() -> Check {
    let start = Instant::now();
    let series = theorem2_D0_series(24).map_err(err("series"))?;
    let elapsed = start.elapsed().as_secs_f64();
    let table = count_walks(&preset("reverse-kreweras").unwrap(), Domain::ThreeQuadrant, (0, 0), 24)
        .map_err(err("count_walks"))?;
    ensure(series.known_through(22, 1), || format!("series only known below {:?}", series.trunc_exponent()))?;
    for n in 0..=21 {
        let c = Q::from_integer(table.count(n, 0, 0).into());
        ensure(series.coeff(n as i64, 1) == c, || format!("t^{}: {} != {}", n, series.coeff(n as i64, 1), c))?;
    }
    ensure(elapsed < 60.0, || format!("series took {:.2} s", elapsed))?;
    println!("  D(0) = {}  ({:.2} s)", series, elapsed);
    Ok(())
}

/// Reference terms `(coefficient, exponent numerator)` in units of `1/den`,
/// compared exactly below `t^(upto/den)`.
fn matches(name: &str, s: &PuiseuxSeries, den: u32, reference: &[(Q, i64)], upto: i64) -> Check {
    ensure(s.known_through(upto, den), || format!("{}: only known below {:?}", name, s.trunc_exponent()))?;
    let expect = PuiseuxSeries::from_terms(den, reference, Some(upto));
    let diff = s.truncated(upto, den).sub(&expect).reduced();
    ensure(diff.is_zero(), || format!("{}: differs from the reference series by {}", name, diff))?;
    println!("  {} = {}", name, expect);
    Ok(())
}

fn criterion3() -> Check {
    let e = kreweras_series::expansions(40).map_err(err("expansions"))?;
    let i = |n: i64| Q::from_integer(n.into());
    matches("W", &e.w, 1, &[(i(2), 1), (i(8), 4), (i(96), 7), (i(1536), 10)], 11)?;
    let x = |s: i64| -> Vec<(Q, i64)> {
        vec![(i(1), 2), (i(2 * s), 5), (i(6), 8), (i(21 * s), 11), (i(80), 14), (q(1287 * s, 4), 17)]
    };
    matches("x1", &e.x1, 2, &x(-1), 20)?;
    matches("x2", &e.x2, 2, &x(1), 20)?;
    // The reference d̃′(y2) and w′(y2) are the square roots entering the prefactor.
    let sd = e.d_t_prime_y2.sqrt().map_err(err("sqrt"))?;
    matches(
        "sqrt(d~'(y2))",
        &sd,
        4,
        &[(i(2), 5), (q(-3, 2), 17), (i(-8), 23), (q(-603, 16), 29), (i(-174), 35)],
        41,
    )?;
    matches(
        "w(y2)",
        &e.w_y2,
        2,
        &[
            (q(1, 2), -2),
            (i(-2), 1),
            (i(-1), 4),
            (i(-3), 7),
            (i(-7), 10),
            (q(-115, 4), 13),
            (i(-90), 16),
            (q(-3247, 8), 19),
        ],
        22,
    )?;
    let swp = e.w_prime_y2.neg().sqrt().map_err(err("sqrt"))?;
    matches(
        "sqrt(-w'(y2))",
        &swp,
        2,
        &[
            (i(1), -2),
            (i(-2), 1),
            (q(-5, 2), 4),
            (i(-6), 7),
            (q(-169, 8), 10),
            (i(-75), 13),
            (q(-4957, 16), 16),
            (i(-1251), 19),
        ],
        22,
    )?;
    let r = |v: &PuiseuxSeries| e.repoled(v).map_err(err("repole"));
    matches(
        "w_y2(y1)",
        &r(&e.w_y1)?,
        2,
        &[(q(1, 4), -1), (q(-3, 8), 5), (q(-97, 32), 11), (q(-2611, 64), 17)],
        23,
    )?;
    matches("w_y2(Y(x1))", &r(&e.w_yx1)?, 1, &[(i(-1), 1), (i(-2), 4), (i(-18), 7)], 10)?;
    matches(
        "w_y2(Y(x2))",
        &r(&e.w_yx2)?,
        2,
        &[(i(-1), 2), (i(-4), 5), (i(-18), 8), (i(-86), 11), (i(-418), 14), (q(-4131, 2), 17)],
        20,
    )?;
    let pipe = d0_pipeline(24).map_err(err("pipeline"))?;
    let pre = trikernel::bvp::d0_prefactor(24).map_err(err("prefactor"))?;
    matches("prefactor", &pre, 1, &[(i(-1), -1)], 10)?;
    let integral: Vec<(Q, i64)> = EXCURSIONS[..7].iter().enumerate().map(|(k, &c)| (i(-(c as i64)), 3 * k as i64 + 1)).collect();
    matches("integral", &pipe.integral, 1, &integral, 20)?;
    Ok(())
}

fn criterion4() -> Check {
    for m in SYMMETRIC_MODELS {
        let r = check_functional_equation(&preset(m).unwrap(), 8).map_err(err(m))?;
        ensure(r.all_zero(), || format!("{}: {:?}", m, r))?;
    }
    println!("  all residuals vanish through t^8 for {} models", SYMMETRIC_MODELS.len());
    Ok(())
}

fn criterion5() -> Check {
    let expected = [
        ("simple", GroupOrder::Finite(4)),
        ("kreweras", GroupOrder::Finite(6)),
        ("reverse-kreweras", GroupOrder::Finite(6)),
        ("double-kreweras", GroupOrder::Finite(6)),
        ("e-ne-n-sw", GroupOrder::Infinite(400)),
        ("ne-w-sw-s", GroupOrder::Infinite(400)),
        ("e-n-w-sw-s", GroupOrder::Infinite(400)),
        ("e-ne-n-w-s", GroupOrder::Infinite(400)),
    ];
    for (m, want) in expected {
        let got = group_order(&preset(m).unwrap(), 400).map_err(err(m))?;
        ensure(got == want, || format!("{}: {:?} != {:?}", m, got, want))?;
        println!("  {}: {:?}", m, got);
    }
    Ok(())
}

fn criterion6() -> Check {
    for m in BOUNDED {
        let kd = build_kernel(&phi_transform(&preset(m).unwrap())).map_err(err(m))?;
        for t in [0.05, 0.1] {
            let k = kd.at(t).map_err(err(m))?;
            let idx = indices(&k, 2048).map_err(err(m))?;
            ensure(idx.d_tilde == 2 && idx.bvp == -1, || format!("{} at t = {}: {:?}", m, t, idx))?;
        }
    }
    println!("  winding 2 and index -1 for {} bounded models", BOUNDED.len());
    Ok(())
}

fn explicit(w: &GluingMap) -> bool {
    match w.kind() {
        GluingKind::WeierstrassComposite => false,
        GluingKind::MoebiusOf(inner) => *inner != GluingKind::WeierstrassComposite,
        _ => true,
    }
}

fn criterion7() -> Check {
    let t = 0.1;
    let (mut glue, mut ode, mut dec) = (0.0f64, 0.0f64, 0.0f64);
    for m in SYMMETRIC_MODELS {
        let kd = build_kernel(&phi_transform(&preset(m).unwrap())).map_err(err(m))?;
        let k = kd.at(t).map_err(err(m))?;
        let w = gluing_for(&kd, t).map_err(err(m))?;
        let tol = if explicit(&w) { 1e-8 } else { 1e-6 };
        let g = gluing_residual(&w, &k, 50).map_err(err(m))?;
        ensure(g < tol, || format!("{}: gluing residual {:e}", m, g))?;
        glue = glue.max(g);
        if !BOUNDED.contains(&m) {
            continue;
        }
        let tol = if explicit(&w) { 1e-7 } else { 1e-5 };
        let samples = ode_samples(&k, 20).map_err(err(m))?;
        let o = check_w_ode(&w, &k, &samples).map_err(err(m))?;
        ensure(o < tol, || format!("{}: ODE residual {:e}", m, o))?;
        ode = ode.max(o);
        let (wp, _) = ode_data(&w, &k).map_err(err(m))?;
        let at = anti_tutte_pair(&wp, &k).map_err(err(m))?;
        let (a, r) = decoupling_residuals(&at, &k, 50).map_err(err(m))?;
        ensure(a < 1e-6 && r < 1e-6, || format!("{}: decoupling residuals {:e} {:e}", m, a, r))?;
        dec = dec.max(a).max(r);
    }
    let kd = build_kernel(&phi_transform(&preset("simple").unwrap())).map_err(err("simple"))?;
    let k = kd.at(t).map_err(err("simple"))?;
    let cp = CurveParam::new(&k).map_err(err("simple"))?;
    let mut gessel = 0.0f64;
    for j in 0..=50 {
        let y = cp.point(PI * j as f64 / 50.0).map_err(err("simple"))?.y;
        gessel = gessel.max((gessel_g(y, t) * gessel_g(y.conj(), t) - 1.0).norm());
    }
    ensure(gessel < 1e-8, || format!("Gessel residual {:e}", gessel))?;
    println!("  gluing {:.1e}, ODE {:.1e}, decoupling {:.1e}, Gessel {:.1e}", glue, ode, dec, gessel);
    Ok(())
}

fn criterion8() -> Check {
    let hat = preset("reverse-kreweras").unwrap();
    let t = 0.1;
    let solver = DiagonalSolver::for_model(&hat, t).map_err(err("solver"))?;
    let points = [
        C64::new(0.0, 0.0),
        C64::new(0.2, 0.0),
        C64::new(-0.3, 0.0),
        C64::new(0.0, 0.4),
        C64::new(0.3, 0.3),
        C64::new(-0.4, -0.2),
        C64::new(0.5, -0.1),
        C64::new(-0.1, 0.6),
        C64::new(0.6, 0.4),
        C64::new(-0.5, 0.5),
    ];
    let mut rel = 0.0f64;
    let mut circle = 0.0f64;
    for y in points {
        let a = solver.theorem1_D(y).map_err(err("theorem 1"))?;
        let b = solver.theorem2_D(y).map_err(err("theorem 2"))?;
        rel = rel.max((a - b).norm() / b.norm());
        let c = solver.theorem2_on(y, ContourKind::UnitCircle).map_err(err("unit circle"))?;
        circle = circle.max((c.value - b).norm());
    }
    ensure(rel < 1e-4, || format!("theorem 1 vs theorem 2: {:e}", rel))?;
    ensure(circle < 1e-8, || format!("curve vs unit circle: {:e}", circle))?;
    let oracle = DiagonalOracle::new(&hat, 24).map_err(err("oracle"))?;
    let d0 = solver.theorem2_D(C64::new(0.0, 0.0)).map_err(err("D(0)"))?;
    let partial = oracle.eval(C64::new(0.0, 0.0), t);
    let tail = oracle.tail(t, 1.0);
    let diff = (d0 - partial).norm();
    ensure(diff < 1e-6 + tail, || format!("D(0) = {} vs partial sum {}: {:e}", d0, partial, diff))?;
    println!(
        "  thm1/thm2 {:.1e}, curve/circle {:.1e}, D(0) = {:.15} vs enumeration {:.1e} (tail {:.1e})",
        rel, circle, d0.re, diff, tail
    );
    Ok(())
}

fn criterion9() -> Check {
    let hat = preset("reverse-kreweras").unwrap();
    let t = 0.05;
    let k = build_kernel(&phi_transform(&hat)).and_then(|kd| kd.at(t)).map_err(err("kernel"))?;
    let contour = trace_curve(&k, 2048).map_err(err("contour"))?;
    let oracle = DiagonalOracle::new(&hat, 30).map_err(err("oracle"))?;
    let r = boundary_residual(&k, &contour, &oracle, 40, 1e-7).map_err(err("residual"))?;
    ensure(r < 1e-7, || format!("boundary residual {:e}", r))?;
    println!("  boundary residual {:.1e}", r);
    Ok(())
}

fn main() {
    let criteria: [fn() -> Check; 9] =
        [criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7, criterion8, criterion9];
    let mut failed = 0;
    for (n, c) in criteria.iter().enumerate() {
        match c() {
            Ok(()) => println!("criterion {}: PASS", n + 1),
            Err(e) => {
                failed += 1;
                println!("  {}", e);
                println!("criterion {}: FAIL", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
