//! Conformal gluing functions for `𝒢_ℒ`.
//!
//! The explicit maps of the Kreweras trilogy are written once over a small
//! jet type (value and first derivative), so the same formula runs on complex
//! numbers and on Puiseux series. Infinite-group models use the composite
//! `℘_{1,3}(−(ω1+ω2)/2 + ℘_{1,2}⁻¹(f(y)))`.

use num_complex::Complex64 as C64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::elliptic::{elliptic_periods, EllipticData, Lattice};
use crate::error::{Error, Result};
use crate::geometry::CurveParam;
use crate::kernel::{Kernel, KernelData};
use crate::model::{preset, StepSet};
use crate::pseries::{solve_fixed_point, PuiseuxSeries};
use crate::rational::qi;

type PS = PuiseuxSeries;

/// Ring operations needed by the explicit formulas.
pub trait Base: Clone {
    fn int(n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
}

impl Base for C64 {
    fn int(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::EvaluationAtPole);
        }
        Ok(self / o)
    }
    fn sqrt(&self) -> Result<Self> {
        Ok(C64::sqrt(*self))
    }
}

impl Base for PS {
    fn int(n: i64) -> Self {
        PS::rat(n, 1)
    }
    fn add(&self, o: &Self) -> Self {
        PS::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        PS::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        PS::mul(self, o)
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::EvaluationAtPole);
        }
        PS::div(self, o)
    }
    fn sqrt(&self) -> Result<Self> {
        PS::sqrt(self)
    }
}

/// Value and derivative with respect to `y`.
#[derive(Debug, Clone)]
pub struct Jet<T> {
    pub v: T,
    pub d: T,
}

impl<T: Base> Jet<T> {
    pub fn constant(v: T) -> Self {
        Jet { v, d: T::int(0) }
    }
    pub fn variable(v: T) -> Self {
        Jet { v, d: T::int(1) }
    }
    fn int(n: i64) -> Self {
        Self::constant(T::int(n))
    }
    fn add(&self, o: &Self) -> Self {
        Jet { v: self.v.add(&o.v), d: self.d.add(&o.d) }
    }
    fn sub(&self, o: &Self) -> Self {
        Jet { v: self.v.sub(&o.v), d: self.d.sub(&o.d) }
    }
    fn mul(&self, o: &Self) -> Self {
        Jet { v: self.v.mul(&o.v), d: self.d.mul(&o.v).add(&self.v.mul(&o.d)) }
    }
    fn div(&self, o: &Self) -> Result<Self> {
        let v = self.v.div(&o.v)?;
        let d = self.d.sub(&v.mul(&o.d)).div(&o.v)?;
        Ok(Jet { v, d })
    }
    fn sqrt(&self) -> Result<Self> {
        let v = self.v.sqrt()?;
        let d = self.d.div(&v.add(&v))?;
        Ok(Jet { v, d })
    }
    fn scale(&self, n: i64) -> Self {
        self.mul(&Self::int(n))
    }
}

/// `(1/y − 1/W)√(1 − yW²)`.
pub fn kreweras_formula<T: Base>(y: &Jet<T>, w: &Jet<T>) -> Result<Jet<T>> {
    let one = Jet::int(1);
    let s = one.sub(&y.mul(w).mul(w)).sqrt()?;
    Ok(one.div(y)?.sub(&one.div(w)?).mul(&s))
}

/// `(−ty³ + y² + t)/(2yt) − (2y² − yW² − W)/(2yW) √(1 − yW(W³+4)/4 + y²W²/4)`.
pub fn reverse_kreweras_formula<T: Base>(y: &Jet<T>, w: &Jet<T>, t: &Jet<T>) -> Result<Jet<T>> {
    let one = Jet::int(1);
    let y2 = y.mul(y);
    let first = t.mul(&y2).mul(y).scale(-1).add(&y2).add(t).div(&y.mul(t).scale(2))?;
    let w2 = w.mul(w);
    let coef = y2.scale(2).sub(&y.mul(&w2)).sub(w).div(&y.mul(w).scale(2))?;
    let rad = one
        .sub(&y.mul(w).mul(&w2.mul(w).add(&Jet::int(4))).div(&Jet::int(4))?)
        .add(&y2.mul(&w2).div(&Jet::int(4))?);
    Ok(first.sub(&coef.mul(&rad.sqrt()?)))
}

/// The double Kreweras map in terms of `Z`.
pub fn double_kreweras_formula<T: Base>(y: &Jet<T>, z: &Jet<T>) -> Result<Jet<T>> {
    let one = Jet::int(1);
    let omz = one.sub(z);
    let omz2 = omz.mul(&omz);
    let z2 = z.mul(z);
    let z3 = z2.mul(z);
    let y2 = y.mul(y);
    let rad = one
        .sub(&y.mul(z).mul(&one.add(&z2)).scale(2).div(&omz2)?)
        .add(&z2.mul(&y2));
    let n1 = z.mul(&omz).add(&y.mul(z).scale(2)).sub(&omz.mul(&y2));
    let yp1 = y.add(&one);
    let d1 = y.mul(z).mul(&omz).mul(&yp1).scale(2);
    let n2 = z
        .mul(&omz2)
        .sub(&z2.mul(&Jet::int(-1).add(&z.scale(2)).add(&z2)).mul(y))
        .add(&one.sub(&z.scale(2)).add(&z2.scale(7)).sub(&z3.scale(4)).mul(&y2))
        .sub(&z.mul(&omz2).mul(&y2).mul(y));
    let d2 = y.mul(&yp1).mul(z).mul(&omz2).scale(2);
    Ok(rad.sqrt()?.mul(&n1).div(&d1)?.add(&n2.div(&d2)?))
}

/// Radius of the ring around `y = −1` used by [`double_kreweras_near_minus_one`].
const DK_RING: f64 = 2e-2;

/// The double Kreweras formula has a removable singularity at `y = −1`;
/// near it `w` and `w′` are recovered from the mean value over a ring.
fn double_kreweras_near_minus_one(y: C64, param: f64) -> Result<(C64, C64)> {
    // The nearest other singularity is the pole at 0.
    const N: usize = 64;
    let z = Jet::constant(C64::new(param, 0.0));
    let c = C64::new(-1.0, 0.0);
    let r = 0.4;
    let mut vals = Vec::with_capacity(N);
    for k in 0..N {
        let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / N as f64);
        vals.push((e, double_kreweras_formula(&Jet::constant(c + r * e), &z)?.v));
    }
    // Cauchy integrals over the ring, by the trapezoidal rule.
    let (mut v, mut d) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for (e, f) in &vals {
        let u = c + r * e;
        v += f * r * e / (u - y);
        d += f * r * e / ((u - y) * (u - y));
    }
    Ok((v / N as f64, d / N as f64))
}

/// `W` with `W = t(2 + W³)`, by fixed-point iteration.
pub fn w_param(t: f64) -> Result<f64> {
    fixed_point_f64(|w| t * (2.0 + w * w * w), 0.0)
}

/// `Z` with `Z = t(1 − 2Z + 6Z² − 2Z³ + Z⁴)/(1 − Z)²`, `Z(0) = 0`.
pub fn z_param(t: f64) -> Result<f64> {
    fixed_point_f64(|z| t * (1.0 - 2.0 * z + 6.0 * z * z - 2.0 * z.powi(3) + z.powi(4)) / ((1.0 - z) * (1.0 - z)), 0.0)
}

fn fixed_point_f64<F: Fn(f64) -> f64>(f: F, seed: f64) -> Result<f64> {
    let mut x = seed;
    for _ in 0..10_000 {
        let nx = f(x);
        if !nx.is_finite() {
            break;
        }
        if (nx - x).abs() <= 4.0 * f64::EPSILON * nx.abs().max(1e-300) {
            return Ok(nx);
        }
        x = nx;
    }
    Err(Error::NoConvergence(10_000))
}

/// `W(t)` through `t^order` (exclusive).
pub fn w_series(order: i64) -> Result<PS> {
    let t = PS::t();
    solve_fixed_point(|w| Ok(t.mul(&PS::rat(2, 1).add(&w.mul(w).mul(w)))), t.scale(&qi(2)), order, 1)
}

/// `Z(t)` through `t^order` (exclusive).
pub fn z_series(order: i64) -> Result<PS> {
    let t = PS::t();
    let one = PS::one();
    solve_fixed_point(
        |z| {
            let z2 = z.mul(z);
            let num = one
                .sub(&z.scale(&qi(2)))
                .add(&z2.scale(&qi(6)))
                .sub(&z2.mul(z).scale(&qi(2)))
                .add(&z2.mul(&z2));
            let den = one.sub(z);
            Ok(t.mul(&num.div(&den.mul(&den).truncated(order, 1))?))
        },
        t.clone(),
        order,
        1,
    )
}

/// Which explicit formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExplicitKind {
    Kreweras,
    ReverseKreweras,
    DoubleKreweras,
}

/// Kind of a gluing map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GluingKind {
    KrewerasExplicit,
    ReverseKrewerasExplicit,
    DoubleKrewerasExplicit,
    WeierstrassComposite,
    MoebiusOf(Box<GluingKind>),
}

/// Recognises the Kreweras trilogy from the step set of the kernel.
pub fn explicit_kind(kernel_steps: &StepSet) -> Option<ExplicitKind> {
    let same = |name: &str| preset(name).map(|p| p.steps().eq(kernel_steps.steps())).unwrap_or(false);
    if same("kreweras") {
        Some(ExplicitKind::Kreweras)
    } else if same("reverse-kreweras") {
        Some(ExplicitKind::ReverseKreweras)
    } else if same("double-kreweras") {
        Some(ExplicitKind::DoubleKreweras)
    } else {
        None
    }
}

/// Explicit map and its derivative at a series argument.
pub fn explicit_series(kind: ExplicitKind, y: &PS, order: i64) -> Result<(PS, PS)> {
    let yj = Jet::variable(y.clone());
    let j = match kind {
        ExplicitKind::Kreweras => kreweras_formula(&yj, &Jet::constant(w_series(order)?))?,
        ExplicitKind::ReverseKreweras => {
            reverse_kreweras_formula(&yj, &Jet::constant(w_series(order)?), &Jet::constant(PS::t()))?
        }
        ExplicitKind::DoubleKreweras => double_kreweras_formula(&yj, &Jet::constant(z_series(order)?))?,
    };
    Ok((j.v, j.d))
}

#[derive(Debug, Clone)]
enum Repr {
    Explicit { kind: ExplicitKind, t: f64, param: f64 },
    Weierstrass { ed: EllipticData, l12: Lattice, l13: Lattice, y2: f64 },
    /// `scale/(inner − shift)`.
    Moebius { inner: Box<GluingMap>, shift: C64, pole: f64, scale: f64 },
}

/// A conformal gluing function of `𝒢_ℒ`.
#[derive(Debug, Clone)]
pub struct GluingMap {
    repr: Repr,
}

impl GluingMap {
    pub fn kind(&self) -> GluingKind {
        match &self.repr {
            Repr::Explicit { kind, .. } => match kind {
                ExplicitKind::Kreweras => GluingKind::KrewerasExplicit,
                ExplicitKind::ReverseKreweras => GluingKind::ReverseKrewerasExplicit,
                ExplicitKind::DoubleKreweras => GluingKind::DoubleKrewerasExplicit,
            },
            Repr::Weierstrass { .. } => GluingKind::WeierstrassComposite,
            Repr::Moebius { inner, .. } => GluingKind::MoebiusOf(Box::new(inner.kind())),
        }
    }

    /// Location of the unique pole in `𝒢_ℒ`.
    pub fn pole(&self) -> f64 {
        match &self.repr {
            Repr::Explicit { .. } => 0.0,
            Repr::Weierstrass { y2, .. } => *y2,
            Repr::Moebius { pole, .. } => *pole,
        }
    }

    /// Period data of a Weierstrass map.
    pub fn elliptic(&self) -> Option<&EllipticData> {
        match &self.repr {
            Repr::Weierstrass { ed, .. } => Some(ed),
            _ => None,
        }
    }

    /// `(w(y), w′(y))`.
    pub fn eval_jet(&self, y: C64) -> Result<(C64, C64)> {
        if (y - self.pole()).norm() <= 1e-14 * (1.0 + self.pole().abs()) {
            return Err(Error::EvaluationAtPole);
        }
        match &self.repr {
            Repr::Explicit { kind, t, param } => {
                let yj = Jet::variable(y);
                let p = Jet::constant(C64::new(*param, 0.0));
                let j = match kind {
                    ExplicitKind::Kreweras => kreweras_formula(&yj, &p)?,
                    ExplicitKind::ReverseKreweras => {
                        reverse_kreweras_formula(&yj, &p, &Jet::constant(C64::new(*t, 0.0)))?
                    }
                    ExplicitKind::DoubleKreweras if (y + 1.0).norm() < DK_RING => return double_kreweras_near_minus_one(y, *param),
                    ExplicitKind::DoubleKreweras => double_kreweras_formula(&yj, &p)?,
                };
                Ok((j.v, j.d))
            }
            Repr::Weierstrass { ed, l12, l13, .. } => {
                let z0 = l12.wp_inv(ed.f(y))?;
                let zeta = z0 - 0.5 * C64::new(ed.omega2, ed.omega1_im);
                let (p, pd) = l13.wp(zeta);
                let (_, pd12) = l12.wp(z0);
                if pd12.is_zero() {
                    return Err(Error::EvaluationAtPole);
                }
                Ok((p, pd * ed.f_prime(y) / pd12))
            }
            Repr::Moebius { inner, shift, scale, .. } => {
                let (v, d) = match inner.eval_jet(y) {
                    // 1/(w − s) ~ (y − p)/r at the inner pole.
                    Err(Error::EvaluationAtPole) if (y - inner.pole()).norm() <= 1e-14 * (1.0 + inner.pole().abs()) => {
                        return Ok((C64::new(0.0, 0.0), C64::new(scale / inner.residue()?, 0.0)));
                    }
                    r => r?,
                };
                let den = v - shift;
                if den.is_zero() {
                    return Err(Error::EvaluationAtPole);
                }
                Ok((*scale / den, -*scale * d / (den * den)))
            }
        }
    }

    pub fn eval(&self, y: C64) -> Result<C64> {
        Ok(self.eval_jet(y)?.0)
    }

    pub fn derivative(&self, y: C64) -> Result<C64> {
        Ok(self.eval_jet(y)?.1)
    }

    /// Residue `r = lim (y − pole)·w(y)`, from closed forms.
    pub fn residue(&self) -> Result<f64> {
        match &self.repr {
            // All three explicit maps behave like 1/y at 0.
            Repr::Explicit { .. } => Ok(1.0),
            Repr::Weierstrass { ed, l12, y2, .. } => {
                let [_, e2, _] = l12.e_values();
                let pdd = 6.0 * e2 * e2 - 0.5 * ed.g2;
                Ok(pdd / (2.0 * ed.f_prime(C64::new(*y2, 0.0)).re))
            }
            Repr::Moebius { inner, pole, scale, .. } => Ok(scale / inner.derivative(C64::new(*pole, 0.0))?.re),
        }
    }
}

/// Explicit map of the Kreweras trilogy for the given kernel at `t`.
pub fn gluing_explicit(kd: &KernelData, t: f64) -> Result<GluingMap> {
    let kind = explicit_kind(&kd.steps)
        .ok_or_else(|| Error::Unsupported(format!("no explicit gluing function for {}", kd.steps)))?;
    kd.at(t)?;
    let param = match kind {
        ExplicitKind::DoubleKreweras => z_param(t)?,
        _ => w_param(t)?,
    };
    Ok(GluingMap { repr: Repr::Explicit { kind, t, param } })
}

/// The Weierstrass composite map.
pub fn gluing_weierstrass(kernel: &Kernel) -> Result<GluingMap> {
    let ed = elliptic_periods(kernel)?;
    let bp = kernel.branch_points()?;
    let l12 = ed.lattice12();
    let l13 = ed.lattice13();
    Ok(GluingMap { repr: Repr::Weierstrass { ed, l12, l13, y2: bp.y2 } })
}

/// Explicit map when one is known, otherwise the Weierstrass composite.
pub fn gluing_for(kd: &KernelData, t: f64) -> Result<GluingMap> {
    if explicit_kind(&kd.steps).is_some() {
        gluing_explicit(kd, t)
    } else {
        gluing_weierstrass(&kd.at(t)?)
    }
}

/// `w_{y2} = 1/(w − w(y2))`.
pub fn repole(w: &GluingMap, y2: f64) -> Result<GluingMap> {
    if (w.pole() - y2).abs() <= 1e-12 * (1.0 + y2.abs()) {
        return Err(Error::PoleAlreadyAtY2);
    }
    let shift = w.eval(C64::new(y2, 0.0))?;
    if !shift.re.is_finite() || !shift.im.is_finite() {
        return Err(Error::EvaluationAtPole);
    }
    Ok(GluingMap { repr: Repr::Moebius { inner: Box::new(w.clone()), shift, pole: y2, scale: 1.0 } })
}

/// A gluing map with its pole at `y2`: re-poled when necessary.
pub fn gluing_at_y2(kd: &KernelData, t: f64) -> Result<GluingMap> {
    let w = gluing_for(kd, t)?;
    let y2 = kd.at(t)?.branch_points()?.y2;
    match repole(&w, y2) {
        Err(Error::PoleAlreadyAtY2) => Ok(w),
        r => r,
    }
}

/// `√(z² − 1)` with its cut on `[−1, 1]`, positive for `z > 1`.
pub fn sqrt_z2_minus_1(z: C64) -> C64 {
    if z.is_zero() {
        return C64::new(0.0, 1.0);
    }
    z * (1.0 - 1.0 / (z * z)).sqrt()
}

/// `h(z) = −z + √(z² − 1)`, from the cut plane onto the unit disc.
pub fn h_map(z: C64) -> C64 {
    -z + sqrt_z2_minus_1(z)
}

/// The anti-Tutte invariant `g` and the decoupling function `f = g/g′`.
#[derive(Debug, Clone)]
pub struct AntiTutte {
    pub w: GluingMap,
    /// `w(Y(x2))`.
    pub a: C64,
    /// `w(Y(x1))`.
    pub b: C64,
    /// Sign of `Im ŵ` just inside `𝒢_ℒ` next to `ℒ0`.
    pub side: f64,
}

pub fn anti_tutte_pair(w: &GluingMap, kernel: &Kernel) -> Result<AntiTutte> {
    let bp = kernel.branch_points()?;
    let yx1 = kernel.y_at(bp.x1).ok_or(Error::BranchPointImageInfinite)?;
    let yx2 = kernel.y_at(bp.x2).ok_or(Error::BranchPointImageInfinite)?;
    let a = w.eval(C64::new(yx2, 0.0))?;
    let b = w.eval(C64::new(yx1, 0.0))?;
    let mut at = AntiTutte { w: w.clone(), a, b, side: 1.0 };
    // 𝒢_ℒ lies to the left of ℒ0.
    let p = CurveParam::new(kernel)?.point(0.5 * std::f64::consts::PI)?;
    let probe = p.y + C64::new(0.0, 1e-4) * p.dy;
    at.side = at.hat(probe)?.0.im.signum();
    Ok(at)
}

impl AntiTutte {
    /// `ŵ` and `ŵ′`, sending `w(Y(x1)) ↦ 1` and `w(Y(x2)) ↦ −1`.
    fn hat(&self, y: C64) -> Result<(C64, C64)> {
        let (v, d) = self.w.eval_jet(y)?;
        let s = 2.0 / (self.b - self.a);
        Ok((s * (v - 0.5 * (self.a + self.b)), s * d))
    }

    pub fn g(&self, y: C64) -> Result<C64> {
        Ok(h_map(self.hat(y)?.0))
    }

    /// `f = g/g′ = −√(ŵ² − 1)/ŵ′`.
    pub fn f(&self, y: C64) -> Result<C64> {
        let (v, d) = self.hat(y)?;
        Ok(-sqrt_z2_minus_1(v) / d)
    }

    /// `√(ŵ² − 1)` at a point of `ℒ`, where `ŵ ∈ [−1, 1]` lies on the cut:
    /// the limit is taken from inside `𝒢_ℒ`.
    fn root_on_curve(&self, v: C64, upper: bool) -> C64 {
        let u = v.re;
        if u.abs() >= 1.0 {
            return sqrt_z2_minus_1(C64::new(u, 0.0));
        }
        let s = if upper { self.side } else { -self.side };
        C64::new(0.0, s * (1.0 - u * u).sqrt())
    }

    /// Boundary value of `g` at `y ∈ ℒ0` (`upper`) or `ℒ1`.
    pub fn g_on_curve(&self, y: C64, upper: bool) -> Result<C64> {
        let (v, _) = self.hat(y)?;
        Ok(-C64::new(v.re, 0.0) + self.root_on_curve(v, upper))
    }

    /// Boundary value of `f` at `y ∈ ℒ0` (`upper`) or `ℒ1`.
    pub fn f_on_curve(&self, y: C64, upper: bool) -> Result<C64> {
        let (v, d) = self.hat(y)?;
        Ok(-self.root_on_curve(v, upper) / d)
    }
}

/// Residuals on `n` points of `ℒ0`: `max |g(y)g(ȳ) − 1|` and
/// `max |√d̃(ȳ)/√d̃(y) − f(ȳ)/f(y)|`.
pub fn decoupling_residuals(at: &AntiTutte, kernel: &Kernel, n: usize) -> Result<(f64, f64)> {
    let cp = CurveParam::new(kernel)?;
    let (mut anti, mut ratio) = (0.0f64, 0.0f64);
    for k in 1..n {
        let p = cp.point(std::f64::consts::PI * k as f64 / n as f64)?;
        let (y, yb) = (p.y, p.y.conj());
        anti = anti.max((at.g_on_curve(y, true)? * at.g_on_curve(yb, false)? - 1.0).norm());
        let s = cp.sqrt_d_t(&p);
        let lhs = s.conj() / s;
        ratio = ratio.max((lhs - at.f_on_curve(yb, false)? / at.f_on_curve(y, true)?).norm());
    }
    Ok((anti, ratio))
}

/// Gessel's anti-Tutte invariant `y/(t(y+1)²)`.
pub fn gessel_g(y: C64, t: f64) -> C64 {
    y / (t * (y + 1.0) * (y + 1.0))
}

/// `g/g′` for Gessel's invariant.
pub fn gessel_f(y: C64) -> C64 {
    y * (y + 1.0) / (y - 1.0)
}

/// Images of the special points and the ODE constant of a map with pole at `y2`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OdeData {
    pub w_yx1: C64,
    pub w_yx2: C64,
    pub w_y1: C64,
    /// `K` in `d̃ w′² = K (w − w(Y(x1)))(w − w(Y(x2)))(w − w(y1))`.
    pub constant: f64,
}

/// ODE data of `w` (re-poled at `y2` first when its pole is elsewhere).
pub fn ode_data(w: &GluingMap, kernel: &Kernel) -> Result<(GluingMap, OdeData)> {
    let bp = kernel.branch_points()?;
    let mut w = match repole(w, bp.y2) {
        Err(Error::PoleAlreadyAtY2) => w.clone(),
        r => r?,
    };
    // Normalise so that w decreases along [y2, Y(x2)] as seen through √d̃.
    let yx2 = kernel.y_at(bp.x2).ok_or(Error::BranchPointImageInfinite)?;
    let mid = C64::new(0.5 * (bp.y2 + yx2.min(bp.y3)), 0.0);
    if (-kernel.sqrt_d_t(mid)? * w.derivative(mid)?).re < 0.0 {
        match &mut w.repr {
            Repr::Moebius { scale, .. } => *scale = -*scale,
            _ => return Err(Error::Unsupported("orientation of a map already poled at y2".into())),
        }
    }
    let yx1 = kernel.y_at(bp.x1).ok_or(Error::BranchPointImageInfinite)?;
    let r = w.residue()?;
    let constant = kernel.d_t_prime(C64::new(bp.y2, 0.0)).re / r;
    let data = OdeData {
        w_yx1: w.eval(C64::new(yx1, 0.0))?,
        w_yx2: w.eval(C64::new(yx2, 0.0))?,
        w_y1: w.eval(C64::new(bp.y1, 0.0))?,
        constant,
    };
    Ok((w, data))
}

/// Largest relative residual of `d̃ w′² = K Π (w − ·)` over the samples.
pub fn check_w_ode(w: &GluingMap, kernel: &Kernel, samples: &[C64]) -> Result<f64> {
    let (w, od) = ode_data(w, kernel)?;
    let mut worst = 0.0f64;
    for &z in samples {
        let (v, d) = w.eval_jet(z)?;
        let lhs = kernel.d_t(z) * d * d;
        let rhs = od.constant * (v - od.w_yx1) * (v - od.w_yx2) * (v - od.w_y1);
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300));
    }
    Ok(worst)
}

/// Samples near `[y2, Y(x2)]`: the open real segment and small complex offsets.
pub fn ode_samples(kernel: &Kernel, n: usize) -> Result<Vec<C64>> {
    let bp = kernel.branch_points()?;
    let yx2 = kernel.y_at(bp.x2).ok_or(Error::BranchPointImageInfinite)?;
    let (lo, hi) = (bp.y2, yx2.min(bp.y3));
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let s = (k as f64 + 0.5) / n as f64;
        let re = lo + (hi - lo) * (0.05 + 0.9 * s);
        let im = if k % 2 == 0 { 0.0 } else { 0.05 * (hi - lo) * ((k as f64).sin()) };
        out.push(C64::new(re, im));
    }
    Ok(out)
}

/// `max |w(y) − w(ȳ)|` over `n` points of `ℒ0`, relative to `max |w|` when that exceeds one.
pub fn gluing_residual(w: &GluingMap, kernel: &Kernel, n: usize) -> Result<f64> {
    let cp = CurveParam::new(kernel)?;
    let last = if cp.bounded { n } else { n - 1 };
    let mut worst = 0.0f64;
    for k in 1..last {
        let p = cp.point(std::f64::consts::PI * k as f64 / n as f64)?;
        let a = w.eval(p.y)?;
        let b = w.eval(p.y.conj())?;
        worst = worst.max((a - b).norm() / a.norm().max(1.0));
    }
    Ok(worst)
}

/// Series helpers for the re-poled Kreweras map at the special points.
pub mod kreweras_series {
    use super::*;
    use crate::kernel::{branch_points_series, build_kernel, eval_tpoly_series};

    /// Expansions used by the `D(0)` pipeline, at working precision `order`.
    #[derive(Debug, Clone)]
    pub struct Expansions {
        pub w: PS,
        pub x1: PS,
        pub x2: PS,
        pub d_t_prime_y2: PS,
        pub w_y2: PS,
        pub w_prime_y2: PS,
        pub w_y1: PS,
        /// `Y(x1) = −1/√x1`, `Y(x2) = 1/√x2`.
        pub y_x1: PS,
        pub y_x2: PS,
        pub w_yx1: PS,
        pub w_yx2: PS,
    }

    impl Expansions {
        /// `w_{y2}(v) = 1/(w(v) − w(y2))`.
        pub fn repoled(&self, w_v: &PS) -> Result<PS> {
            w_v.sub(&self.w_y2).inv()
        }
    }

    pub fn expansions(order: i64) -> Result<Expansions> {
        let kd = build_kernel(&preset("kreweras")?)?;
        let bp = branch_points_series(&kd, order, 2)?;
        let w = w_series(order)?;
        let (x1, x2) = (bp.x1, bp.x2);
        let y2 = bp.y2;
        let d_t_prime_y2 = eval_tpoly_series(&kd.dt.deriv(), &y2);
        let eval = |y: &PS| -> Result<(PS, PS)> {
            let j = kreweras_formula(&Jet::variable(y.clone()), &Jet::constant(w.clone()))?;
            Ok((j.v, j.d))
        };
        let (w_y2, w_prime_y2) = eval(&y2)?;
        let (w_y1, _) = eval(&bp.y1)?;
        let y_x1 = x1.sqrt()?.inv()?.neg();
        let y_x2 = x2.sqrt()?.inv()?;
        let (w_yx1, _) = eval(&y_x1)?;
        let (w_yx2, _) = eval(&y_x2)?;
        Ok(Expansions { w, x1, x2, d_t_prime_y2, w_y2, w_prime_y2, w_y1, y_x1, y_x2, w_yx1, w_yx2 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_kernel;
    use crate::model::phi_transform;

    fn kernel_of(model: &str, t: f64) -> (KernelData, Kernel) {
        let kd = build_kernel(&phi_transform(&preset(model).unwrap())).unwrap();
        let k = kd.at(t).unwrap();
        (kd, k)
    }

    #[test]
    fn jet_quotient_rule() {
        let y = Jet::variable(C64::new(0.3, 0.1));
        let f = Jet::int(1).div(&y.mul(&y)).unwrap();
        let expect = -2.0 / (y.v * y.v * y.v);
        assert!((f.d - expect).norm() < 1e-12);
    }

    #[test]
    fn parameters() {
        let w = w_param(0.1).unwrap();
        assert!((w - 0.1 * (2.0 + w.powi(3))).abs() < 1e-15);
        let s = w_series(11).unwrap();
        assert_eq!(s.to_string(), "2t + 8t⁴ + 96t⁷ + 1536t¹⁰ + O(t¹¹)");
        assert!((s.eval(0.01) - w_param(0.01).unwrap()).abs() < 1e-15);
        let z = z_param(0.01).unwrap();
        assert!((z_series(12).unwrap().eval(0.01) - z).abs() < 1e-12);
    }

    #[test]
    fn trilogy_glues() {
        for (m, t) in [("reverse-kreweras", 1.0 / 6.0), ("double-kreweras", 0.1)] {
            let (kd, k) = kernel_of(m, t);
            let w = gluing_explicit(&kd, t).unwrap();
            assert!(gluing_residual(&w, &k, 50).unwrap() < 1e-8, "{}", m);
        }
    }

    #[test]
    fn weierstrass_glues() {
        let (kd, k) = kernel_of("e-ne-n-sw", 0.125);
        let w = gluing_for(&kd, 0.125).unwrap();
        assert_eq!(w.kind(), GluingKind::WeierstrassComposite);
        let r = gluing_residual(&w, &k, 50).unwrap();
        assert!(r < 1e-6, "{}", r);
    }
}
