//! Kernel coefficients, discriminants, branch points and the algebraic
//! branches `Y(x)`, `X(y)`.
//!
//! Everything here is written for a step set that is already small, i.e. the
//! image `S = φ(Ŝ)` of the model.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::StepSet;
use crate::pseries::{solve_fixed_point, PuiseuxSeries};
use crate::rational::{qi, to_f64, Q};

type PS = PuiseuxSeries<Q>;

/// Polynomial in one variable whose coefficients are polynomials in `t`:
/// `coeffs[k][m]` is the coefficient of `t^m u^k`.
#[derive(Clone, PartialEq, Default)]
pub struct TPoly {
    coeffs: Vec<Vec<Q>>,
}

impl TPoly {
    pub fn zero() -> Self {
        TPoly { coeffs: Vec::new() }
    }

    fn add_term(&mut self, k: usize, m: usize, c: Q) {
        if self.coeffs.len() <= k {
            self.coeffs.resize(k + 1, Vec::new());
        }
        let row = &mut self.coeffs[k];
        if row.len() <= m {
            row.resize(m + 1, Q::zero());
        }
        row[m] += c;
        self.normalize();
    }

    fn normalize(&mut self) {
        for row in self.coeffs.iter_mut() {
            while row.last().is_some_and(|c| c.is_zero()) {
                row.pop();
            }
        }
        while self.coeffs.last().is_some_and(|r| r.is_empty()) {
            self.coeffs.pop();
        }
    }

    /// Degree in the main variable (`None` for the zero polynomial).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `t^m u^k`.
    pub fn coeff(&self, k: usize, m: usize) -> Q {
        self.coeffs.get(k).and_then(|r| r.get(m)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, o: &TPoly) -> TPoly {
        let mut r = self.clone();
        for (k, row) in o.coeffs.iter().enumerate() {
            for (m, c) in row.iter().enumerate() {
                r.add_term(k, m, c.clone());
            }
        }
        r
    }

    pub fn scale(&self, s: &Q) -> TPoly {
        let mut r = TPoly::zero();
        for (k, row) in self.coeffs.iter().enumerate() {
            for (m, c) in row.iter().enumerate() {
                r.add_term(k, m, c * s);
            }
        }
        r
    }

    pub fn sub(&self, o: &TPoly) -> TPoly {
        self.add(&o.scale(&qi(-1)))
    }

    pub fn mul(&self, o: &TPoly) -> TPoly {
        let mut r = TPoly::zero();
        for (k1, r1) in self.coeffs.iter().enumerate() {
            for (m1, c1) in r1.iter().enumerate() {
                for (k2, r2) in o.coeffs.iter().enumerate() {
                    for (m2, c2) in r2.iter().enumerate() {
                        r.add_term(k1 + k2, m1 + m2, c1 * c2);
                    }
                }
            }
        }
        r
    }

    /// Derivative in the main variable.
    pub fn deriv(&self) -> TPoly {
        let mut r = TPoly::zero();
        for (k, row) in self.coeffs.iter().enumerate().skip(1) {
            for (m, c) in row.iter().enumerate() {
                r.add_term(k - 1, m, c * qi(k as i64));
            }
        }
        r
    }

    /// Coefficients in the main variable at a numeric `t`.
    pub fn at(&self, t: f64) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|row| row.iter().rev().fold(0.0, |acc, c| acc * t + to_f64(c)))
            .collect()
    }

    /// Coefficients in the main variable at an exact `t`.
    pub fn at_exact(&self, t: &Q) -> Vec<Q> {
        self.coeffs
            .iter()
            .map(|row| row.iter().rev().fold(Q::zero(), |acc, c| acc * t + c))
            .collect()
    }

    /// Evaluates at series `u` and `t` by Horner's rule.
    pub fn eval_series(&self, u: &PS, t: &PS) -> PS {
        let mut acc = PS::zero();
        for row in self.coeffs.iter().rev() {
            let mut c = PS::zero();
            for coef in row.iter().rev() {
                c = c.mul(t).add(&PS::constant(coef.clone()));
            }
            acc = acc.mul(u).add(&c);
        }
        acc
    }

    /// Drops the factor `t` shared by all coefficients: `p = t·q`.
    fn divide_by_t(&self) -> Option<TPoly> {
        let mut r = TPoly::zero();
        for (k, row) in self.coeffs.iter().enumerate() {
            for (m, c) in row.iter().enumerate() {
                if m == 0 {
                    if !c.is_zero() {
                        return None;
                    }
                } else {
                    r.add_term(k, m - 1, c.clone());
                }
            }
        }
        Some(r)
    }

    /// Human-readable form in the variable `var`.
    pub fn render(&self, var: &str) -> String {
        let mut parts = Vec::new();
        for (k, row) in self.coeffs.iter().enumerate().rev() {
            for (m, c) in row.iter().enumerate().rev() {
                if c.is_zero() {
                    continue;
                }
                let mut mono = Vec::new();
                if m > 0 {
                    mono.push(if m == 1 { "t".to_string() } else { format!("t^{}", m) });
                }
                if k > 0 {
                    mono.push(if k == 1 { var.to_string() } else { format!("{}^{}", var, k) });
                }
                let body = mono.join("*");
                let term = if body.is_empty() {
                    c.to_string()
                } else if c.is_one() {
                    body
                } else if *c == qi(-1) {
                    format!("-{}", body)
                } else {
                    format!("{}*{}", c, body)
                };
                parts.push(term);
            }
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(rest);
            } else {
                s.push_str(" + ");
                s.push_str(p);
            }
        }
        s
    }
}

impl fmt::Debug for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("u"))
    }
}

/// Dense real polynomial, lowest degree first.
pub fn horner(p: &[f64], z: C64) -> C64 {
    p.iter().rev().fold(C64::zero(), |acc, c| acc * z + c)
}

fn deriv_f64(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// Exact kernel data of a small step set.
#[derive(Debug, Clone)]
pub struct KernelData {
    pub steps: StepSet,
    pub a: TPoly,
    pub b: TPoly,
    pub c: TPoly,
    pub at: TPoly,
    pub bt: TPoly,
    pub ct: TPoly,
    pub d: TPoly,
    pub dt: TPoly,
}

/// Builds `a, b, c, ã, b̃, c̃, d, d̃` and checks both expansions of the kernel.
pub fn build_kernel(steps: &StepSet) -> Result<KernelData> {
    if !steps.is_small() {
        return Err(Error::StepsTooLarge(format!("{}", steps)));
    }
    let mut a = TPoly::zero();
    let mut b = TPoly::zero();
    let mut c = TPoly::zero();
    let mut at = TPoly::zero();
    let mut bt = TPoly::zero();
    let mut ct = TPoly::zero();
    for (i, j) in steps.steps() {
        let kx = (i + 1) as usize;
        let ky = (j + 1) as usize;
        match j {
            1 => a.add_term(kx, 1, qi(1)),
            0 => b.add_term(kx, 1, qi(1)),
            _ => c.add_term(kx, 1, qi(1)),
        }
        match i {
            1 => at.add_term(ky, 1, qi(1)),
            0 => bt.add_term(ky, 1, qi(1)),
            _ => ct.add_term(ky, 1, qi(1)),
        }
    }
    b.add_term(1, 0, qi(-1));
    bt.add_term(1, 0, qi(-1));
    let four = qi(4);
    let d = b.mul(&b).sub(&a.mul(&c).scale(&four));
    let dt = bt.mul(&bt).sub(&at.mul(&ct).scale(&four));
    let kd = KernelData { steps: steps.clone(), a, b, c, at, bt, ct, d, dt };
    kd.check_cross_identity()?;
    Ok(kd)
}

impl KernelData {
    /// `K(x, y)` as a map `(deg x, deg y, deg t) → coefficient`.
    fn bivariate(polys: [&TPoly; 3], swap: bool) -> BTreeMap<(usize, usize, usize), Q> {
        let mut out: BTreeMap<(usize, usize, usize), Q> = BTreeMap::new();
        for (e, p) in [(2usize, polys[0]), (1, polys[1]), (0, polys[2])] {
            for (k, row) in p.coeffs.iter().enumerate() {
                for (m, c) in row.iter().enumerate() {
                    let key = if swap { (e, k, m) } else { (k, e, m) };
                    *out.entry(key).or_insert_with(Q::zero) += c;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    fn check_cross_identity(&self) -> Result<()> {
        let by_y = Self::bivariate([&self.a, &self.b, &self.c], false);
        let by_x = Self::bivariate([&self.at, &self.bt, &self.ct], true);
        let mut direct: BTreeMap<(usize, usize, usize), Q> = BTreeMap::new();
        direct.insert((1, 1, 0), qi(-1));
        for (i, j) in self.steps.steps() {
            *direct.entry(((i + 1) as usize, (j + 1) as usize, 1)).or_insert_with(Q::zero) += qi(1);
        }
        direct.retain(|_, v| !v.is_zero());
        if by_y != by_x || by_y != direct {
            return Err(Error::DegenerateModel("kernel expansions disagree".into()));
        }
        Ok(())
    }

    /// Number of steps `|S|`.
    pub fn size(&self) -> usize {
        self.steps.len()
    }

    /// Numeric specialisation at `t`.
    pub fn at(&self, t: f64) -> Result<Kernel> {
        if !(t > 0.0 && t < 1.0 / self.size() as f64) {
            return Err(Error::InvalidInput(format!("t = {} outside (0, 1/{})", t, self.size())));
        }
        Ok(Kernel {
            t,
            a: self.a.at(t),
            b: self.b.at(t),
            c: self.c.at(t),
            at: self.at.at(t),
            bt: self.bt.at(t),
            ct: self.ct.at(t),
            d: self.d.at(t),
            dt: self.dt.at(t),
        })
    }

    /// JSON description of the coefficients.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "steps": self.steps.to_json()["steps"],
            "a": self.a.render("x"), "b": self.b.render("x"), "c": self.c.render("x"),
            "a_tilde": self.at.render("y"), "b_tilde": self.bt.render("y"), "c_tilde": self.ct.render("y"),
            "d": self.d.render("x"), "d_tilde": self.dt.render("y"),
        })
    }
}

/// Kernel polynomials at a fixed numeric `t`.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub t: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub at: Vec<f64>,
    pub bt: Vec<f64>,
    pub ct: Vec<f64>,
    pub d: Vec<f64>,
    pub dt: Vec<f64>,
}

/// Real branch points; `None` in the fourth slot stands for the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoints {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: Option<f64>,
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    pub y4: Option<f64>,
}

fn poly_roots(p: &[f64]) -> Vec<C64> {
    let mut n = p.len();
    while n > 0 && p[n - 1] == 0.0 {
        n -= 1;
    }
    if n <= 1 {
        return Vec::new();
    }
    let deg = n - 1;
    let lead = p[deg];
    let mut m = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -p[i] / lead;
    }
    let dp = deriv_f64(&p[..n]);
    m.complex_eigenvalues()
        .iter()
        .map(|&z| {
            // Newton polish.
            let mut z = z;
            for _ in 0..3 {
                let f = horner(&p[..n], z);
                let fp = horner(&dp, z);
                if fp.norm() == 0.0 {
                    break;
                }
                let nz = z - f / fp;
                if !nz.re.is_finite() || !nz.im.is_finite() {
                    break;
                }
                z = nz;
            }
            z
        })
        .collect()
}

/// Classifies the roots of a discriminant following the layout of the branch-point lemma.
fn classify(p: &[f64], var: &str) -> Result<(f64, f64, f64, Option<f64>)> {
    let roots = poly_roots(p);
    if roots.len() < 3 {
        return Err(Error::ClassificationFailure(format!("discriminant in {} has {} roots", var, roots.len())));
    }
    let mut reals = Vec::new();
    for z in &roots {
        if z.im.abs() > 1e-7 * (1.0 + z.re.abs()) {
            return Err(Error::ClassificationFailure(format!("non-real branch point {} in {}", z, var)));
        }
        reals.push(if z.re.abs() < 1e-14 { 0.0 } else { z.re });
    }
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let inner: Vec<f64> = reals.iter().copied().filter(|r| r.abs() < 1.0).collect();
    let outer: Vec<f64> = reals.iter().copied().filter(|r| r.abs() > 1.0).collect();
    if inner.len() != 2 || inner[1] <= 0.0 || inner[0] >= inner[1] {
        return Err(Error::ClassificationFailure(format!("small roots in {}: {:?}", var, reals)));
    }
    let (r3, r4) = match outer.as_slice() {
        [x3] if *x3 > 0.0 => (*x3, None),
        [u, v] if *u > 0.0 => (*u, Some(*v)),
        [u, v] if *v > 0.0 && *u < 0.0 => (*v, Some(*u)),
        _ => return Err(Error::ClassificationFailure(format!("large roots in {}: {:?}", var, reals))),
    };
    let mid = 0.5 * (inner[0] + inner[1]);
    if horner(p, C64::new(mid, 0.0)).re >= 0.0 {
        return Err(Error::ClassificationFailure(format!("discriminant in {} not negative on the cut", var)));
    }
    Ok((inner[0], inner[1], r3, r4))
}

/// Ordered pair of roots `(small, large)` of `α u² + β u + γ`.
fn quadratic_pair(alpha: C64, beta: C64, gamma: C64) -> Result<(C64, C64)> {
    if alpha.norm() == 0.0 {
        return Err(Error::LeadingCoefficientVanishes);
    }
    let disc = (beta * beta - 4.0 * alpha * gamma).sqrt();
    // Avoid cancellation.
    let qv = if (beta.conj() * disc).re >= 0.0 { -0.5 * (beta + disc) } else { -0.5 * (beta - disc) };
    let r1 = qv / alpha;
    let r2 = if qv.norm() == 0.0 { C64::zero() } else { gamma / qv };
    let (n1, n2) = (r1.norm(), r2.norm());
    let tie = (n1 - n2).abs() <= 1e-12 * n1.max(n2);
    let (s, l) = if tie {
        if r1.im >= r2.im {
            (r1, r2)
        } else {
            (r2, r1)
        }
    } else if n1 < n2 {
        (r1, r2)
    } else {
        (r2, r1)
    };
    Ok((s, l))
}

impl Kernel {
    pub fn a(&self, x: C64) -> C64 {
        horner(&self.a, x)
    }
    pub fn b(&self, x: C64) -> C64 {
        horner(&self.b, x)
    }
    pub fn c(&self, x: C64) -> C64 {
        horner(&self.c, x)
    }
    pub fn a_t(&self, y: C64) -> C64 {
        horner(&self.at, y)
    }
    pub fn b_t(&self, y: C64) -> C64 {
        horner(&self.bt, y)
    }
    pub fn c_t(&self, y: C64) -> C64 {
        horner(&self.ct, y)
    }
    pub fn d(&self, x: C64) -> C64 {
        horner(&self.d, x)
    }
    pub fn d_t(&self, y: C64) -> C64 {
        horner(&self.dt, y)
    }
    /// `d̃′(y)`.
    pub fn d_t_prime(&self, y: C64) -> C64 {
        horner(&deriv_f64(&self.dt), y)
    }
    /// `d̃″(y)`.
    pub fn d_t_second(&self, y: C64) -> C64 {
        horner(&deriv_f64(&deriv_f64(&self.dt)), y)
    }
    /// `d̃‴(y)`.
    pub fn d_t_third(&self, y: C64) -> C64 {
        horner(&deriv_f64(&deriv_f64(&deriv_f64(&self.dt))), y)
    }

    /// `K(x, y)`.
    pub fn k(&self, x: C64, y: C64) -> C64 {
        self.a(x) * y * y + self.b(x) * y + self.c(x)
    }

    /// `∂K/∂x`.
    pub fn k_x(&self, x: C64, y: C64) -> C64 {
        2.0 * self.a_t(y) * x + self.b_t(y)
    }

    /// `∂K/∂y`.
    pub fn k_y(&self, x: C64, y: C64) -> C64 {
        2.0 * self.a(x) * y + self.b(x)
    }

    /// Real branch points, classified.
    pub fn branch_points(&self) -> Result<BranchPoints> {
        let (x1, x2, x3, x4) = classify(&self.d, "x")?;
        let (y1, y2, y3, y4) = classify(&self.dt, "y")?;
        Ok(BranchPoints { x1, x2, x3, x4, y1, y2, y3, y4 })
    }

    /// `(Y0(x), Y1(x))` with `|Y0| ≤ |Y1|`; on the cuts `Y0` has `Im ≥ 0`.
    pub fn y_branches(&self, x: C64) -> Result<(C64, C64)> {
        quadratic_pair(self.a(x), self.b(x), self.c(x))
    }

    /// `(X0(y), X1(y))` with `|X0| ≤ |X1|`.
    pub fn x_branches(&self, y: C64) -> Result<(C64, C64)> {
        quadratic_pair(self.a_t(y), self.b_t(y), self.c_t(y))
    }

    /// `√d(x) = −(2a(x)Y0(x) + b(x))`, positive on `(x2, x3)`.
    pub fn sqrt_d(&self, x: C64) -> Result<C64> {
        let (y0, _) = self.y_branches(x)?;
        Ok(-(2.0 * self.a(x) * y0 + self.b(x)))
    }

    /// `√d̃(y) = −(2ã(y)X0(y) + b̃(y))`, positive on `(y2, y3)`.
    pub fn sqrt_d_t(&self, y: C64) -> Result<C64> {
        let (x0, _) = self.x_branches(y)?;
        Ok(-(2.0 * self.a_t(y) * x0 + self.b_t(y)))
    }

    /// `√d̃(y)` at a point `y = Y(x)` of the curve with known generating `x`.
    pub fn sqrt_d_t_on_curve(&self, x: C64, y: C64) -> C64 {
        -(2.0 * self.a_t(y) * x + self.b_t(y))
    }

    /// `Y(x) = −b(x)/(2a(x))` at a branch point; `None` when infinite.
    pub fn y_at(&self, x: f64) -> Option<f64> {
        let a = self.a(C64::new(x, 0.0)).re;
        if a.abs() < 1e-300 {
            return None;
        }
        Some(-self.b(C64::new(x, 0.0)).re / (2.0 * a))
    }

    /// `X(y) = −b̃(y)/(2ã(y))` at a branch point; `None` when infinite.
    pub fn x_at(&self, y: f64) -> Option<f64> {
        let a = self.a_t(C64::new(y, 0.0)).re;
        if a.abs() < 1e-300 {
            return None;
        }
        Some(-self.b_t(C64::new(y, 0.0)).re / (2.0 * a))
    }
}

/// Branch points as exact Puiseux series in `t`.
#[derive(Debug, Clone)]
pub struct SeriesBranchPoints {
    pub x1: PS,
    pub x2: PS,
    pub y1: PS,
    pub y2: PS,
}

/// Solves `u = t B(u) ∓ 2t √(A(u) C(u))` where `p = t·P` for `a, c` and `b = t B − u`.
fn small_root_series(a: &TPoly, b: &TPoly, c: &TPoly, minus: bool, num: i64, den: u32) -> Result<PS> {
    let ap = a.divide_by_t().ok_or_else(|| Error::Unsupported("a is not divisible by t".into()))?;
    let cp = c.divide_by_t().ok_or_else(|| Error::Unsupported("c is not divisible by t".into()))?;
    // b + u = t·B
    let bp = b.add(&{
        let mut u = TPoly::zero();
        u.add_term(1, 0, qi(1));
        u
    });
    let bp = bp.divide_by_t().ok_or_else(|| Error::Unsupported("b + u is not divisible by t".into()))?;
    if bp.coeff(0, 0).is_zero() {
        return Err(Error::Unsupported("B(0) = 0: the small roots are not of order t".into()));
    }
    let one = PS::one();
    let t = PS::t();
    let sign = if minus { qi(-2) } else { qi(2) };
    // Keep a little extra precision inside the square root.
    let (wn, wd) = (num + 2, den);
    solve_fixed_point(
        |u| {
            let ac = ap.eval_series(u, &one).mul(&cp.eval_series(u, &one));
            let ac = ac.truncated(wn, wd);
            let s = if ac.is_zero() { PS::zero().truncated(wn, wd) } else { ac.sqrt()? };
            Ok(t.mul(&bp.eval_series(u, &one)).add(&t.mul(&s).scale(&sign)))
        },
        t.scale(&bp.coeff(0, 0)),
        num,
        den,
    )
}

/// Puiseux expansions of `x1, x2, y1, y2` through `t^(num/den)`.
pub fn branch_points_series(kd: &KernelData, num: i64, den: u32) -> Result<SeriesBranchPoints> {
    Ok(SeriesBranchPoints {
        x1: small_root_series(&kd.a, &kd.b, &kd.c, true, num, den)?,
        x2: small_root_series(&kd.a, &kd.b, &kd.c, false, num, den)?,
        y1: small_root_series(&kd.at, &kd.bt, &kd.ct, true, num, den)?,
        y2: small_root_series(&kd.at, &kd.bt, &kd.ct, false, num, den)?,
    })
}

/// Evaluates `p` at the series `u` with symbolic `t`.
pub fn eval_tpoly_series(p: &TPoly, u: &PS) -> PS {
    p.eval_series(u, &PS::t())
}
