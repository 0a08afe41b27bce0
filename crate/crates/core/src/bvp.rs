//! The boundary value problem for the diagonal section `D(y)`.
//!
//! On `ℒ` the unknown satisfies `√d̃(y)D(y) − √d̃(ȳ)D(ȳ) = y − ȳ`. The
//! [`DiagonalSolver`] solves it at fixed `t` in two ways: directly, as a
//! problem of index −1 (through `Γ`, `Ψ` and their boundary values on the
//! slit `w(ℒ)`), and after decoupling with the anti-Tutte pair, which leaves
//! an index-zero problem. For the reverse Kreweras model [`theorem2_D0_series`]
//! produces `D(0)` exactly as a series in `t`. [`reconstruct_sections`]
//! recovers the other generating functions from `D`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::conformal::{anti_tutte_pair, gluing_for, kreweras_series, ode_data, w_series, AntiTutte, GluingMap};
use crate::enumerate::{count_walks, eval_section, extract_section, tail_bound, Domain, Section};
use crate::error::{Error, Result};
use crate::geometry::{in_domain, indices, trace_curve, Contour, CurveParam, Indices};
use crate::kernel::{build_kernel, Kernel, KernelData};
use crate::model::{phi_inverse_point, phi_transform, preset, StepSet};
use crate::poly::Tri;
use crate::pseries::{residue_on_unit_circle, Coeff, LaurentZ, PuiseuxSeries};
use crate::quad::gauss_legendre;
use crate::rational::{q, qi, Q};

type PS = PuiseuxSeries<Q>;
type PZ = PuiseuxSeries<LaurentZ>;

const I: C64 = C64::new(0.0, 1.0);

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// The enumerated diagonal `D(y) = Σ c_{i,i}(n) yⁱ tⁿ`, truncated at `n_max`.
#[derive(Debug, Clone)]
pub struct DiagonalOracle {
    pub n_max: usize,
    pub n_steps: usize,
    /// `max (i + j)/2` over the steps; diagonal exponents stay below `ρn`.
    pub rho: f64,
    series: Tri,
}

impl DiagonalOracle {
    /// Counts three-quadrant walks of `hat` from the origin.
    pub fn new(hat: &StepSet, n_max: usize) -> Result<Self> {
        let table = count_walks(hat, Domain::ThreeQuadrant, (0, 0), n_max)?;
        let series = extract_section(&table, Section::DHat);
        let rho = hat.steps().map(|(i, j)| 0.5 * (i + j) as f64).fold(0.0, f64::max);
        Ok(DiagonalOracle { n_max, n_steps: hat.len(), rho, series })
    }

    pub fn eval(&self, y: C64, t: f64) -> C64 {
        eval_section(&self.series, re(1.0), y, t)
    }

    /// Bound on the omitted tail for `|y| ≤ radius`.
    pub fn tail(&self, t: f64, radius: f64) -> f64 {
        tail_bound(self.n_steps, t, self.n_max, radius, self.rho)
    }
}

/// `max |√d̃(y)D(y) − √d̃(ȳ)D(ȳ) − (y − ȳ)|` over `samples` points of `ℒ0`,
/// with `D` the truncated oracle at `t = kernel.t`.
///
/// Refuses when the truncation tail could exceed `tol`.
pub fn boundary_residual(
    kernel: &Kernel,
    contour: &Contour,
    oracle: &DiagonalOracle,
    samples: usize,
    tol: f64,
) -> Result<f64> {
    let upper = contour.upper();
    let m = upper.len();
    if samples == 0 || m < 3 {
        return Err(Error::InvalidInput("need samples and a traced contour".into()));
    }
    let picks: Vec<usize> = (0..samples)
        .map(|k| (1 + ((k as f64 + 0.5) / samples as f64 * (m - 2) as f64) as usize).min(m - 2))
        .collect();
    let pts: Vec<(C64, C64)> = picks
        .iter()
        .map(|&k| {
            let y = upper[k];
            (y, kernel.sqrt_d_t_on_curve(re(contour.xs[k]), y))
        })
        .collect();
    let radius = pts.iter().fold(0.0f64, |r, (y, _)| r.max(y.norm()));
    let smax = pts.iter().fold(0.0f64, |r, (_, s)| r.max(s.norm()));
    let bound = 2.0 * smax * oracle.tail(kernel.t, radius);
    if !(bound <= tol) {
        return Err(Error::TruncationTailTooLarge(bound));
    }
    let t = kernel.t;
    Ok(pts
        .iter()
        .map(|&(y, s)| {
            // On ℒ the generating x is real, so √d̃(ȳ) is the conjugate.
            let lhs = s * oracle.eval(y, t) - s.conj() * oracle.eval(y.conj(), t);
            (lhs - (y - y.conj())).norm()
        })
        .fold(0.0, f64::max))
}

/// Which closed contour a Cauchy integral ran over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    Curve,
    UnitCircle,
}

/// Trapezoidal rule on a closed analytic contour, `∮ g dz ≈ Σ g(z_k) dz_k`,
/// counterclockwise.
#[derive(Debug, Clone)]
pub struct ClosedQuadrature {
    pub kind: ContourKind,
    pub nodes: Vec<C64>,
    /// `z′(θ_k) · 2π/n`.
    pub dz: Vec<C64>,
}

impl ClosedQuadrature {
    /// `ℒ` through `θ ∈ [0, 2π)`; the second half of the period runs along `ℒ1`.
    pub fn curve(cp: &CurveParam, n: usize) -> Result<Self> {
        if !cp.bounded {
            return Err(Error::UnboundedContour);
        }
        check_nodes(n)?;
        let h = 2.0 * PI / n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut dz = Vec::with_capacity(n);
        for k in 0..n {
            let p = cp.point(h * k as f64)?;
            nodes.push(p.y);
            dz.push(p.dy * h);
        }
        Ok(ClosedQuadrature { kind: ContourKind::Curve, nodes, dz })
    }

    pub fn circle(center: C64, radius: f64, n: usize) -> Result<Self> {
        check_nodes(n)?;
        let h = 2.0 * PI / n as f64;
        let (nodes, dz) = (0..n)
            .map(|k| {
                let e = C64::from_polar(radius, h * k as f64);
                (center + e, I * e * h)
            })
            .unzip();
        Ok(ClosedQuadrature { kind: ContourKind::UnitCircle, nodes, dz })
    }

    pub fn unit_circle(n: usize) -> Result<Self> {
        Self::circle(re(0.0), 1.0, n)
    }

    /// Largest distance between consecutive nodes.
    pub fn cell(&self) -> f64 {
        let n = self.nodes.len();
        (0..n).map(|k| (self.nodes[(k + 1) % n] - self.nodes[k]).norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, z: C64) -> f64 {
        self.nodes.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

fn check_nodes(n: usize) -> Result<()> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("need an even number of nodes ≥ 8, got {}", n)));
    }
    Ok(())
}

/// `(1/2πi)∮ f(u)/(u − z) du` from the values of `f` at the nodes.
pub fn cauchy(f: &[C64], q: &ClosedQuadrature, z: C64) -> Result<C64> {
    if q.distance(z) < q.cell() {
        return Err(Error::PointTooCloseToContour);
    }
    let s: C64 = f.iter().zip(&q.nodes).zip(&q.dz).map(|((fk, zk), dk)| fk * dk / (zk - z)).sum();
    Ok(s / (2.0 * PI * I))
}

/// Boundary values `(F⁺, F⁻)` of the Cauchy integral at node `j`, `F⁺` taken
/// from the left of the contour.
///
/// The principal value is computed as `∮ (f(u) − f(z))/(u − z) du + iπ f(z)`.
pub fn sokhotski_plemelj(f: &[C64], q: &ClosedQuadrature, j: usize) -> (C64, C64) {
    let n = q.nodes.len();
    let (zj, fj) = (q.nodes[j], f[j]);
    let at = |d: isize| f[(j as isize + d).rem_euclid(n as isize) as usize];
    // The subtracted integrand tends to f′(z) at u = z, and f′(z) dz = h df/dθ
    // (sixth-order central difference in θ).
    let mut s = (at(3) - 9.0 * at(2) + 45.0 * at(1) - 45.0 * at(-1) + 9.0 * at(-2) - at(-3)) / 60.0;
    for k in (0..n).filter(|&k| k != j) {
        s += (f[k] - fj) * q.dz[k] / (q.nodes[k] - zj);
    }
    let pv = s / (2.0 * PI * I) + 0.5 * fj;
    (pv + 0.5 * fj, pv - 0.5 * fj)
}

/// A Cauchy integral with its mesh-halving error estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CauchyIntegralResult {
    pub value: C64,
    /// `|value(n) − value(n/2)|`.
    pub error: f64,
    pub contour: ContourKind,
    pub nodes: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Theorem1,
    Theorem2,
    Theorem2SeriesAtZero,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "thm1" | "theorem1" => Ok(Method::Theorem1),
            "thm2" | "theorem2" => Ok(Method::Theorem2),
            "series" | "thm2-series" => Ok(Method::Theorem2SeriesAtZero),
            _ => Err(Error::InvalidInput(format!("unknown method {}", s))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Gauss-Legendre nodes on `ℒ0` for the index −1 solution.
    pub n_index: usize,
    /// Second rule, interlaced with the first, for the boundary values of `Γ`.
    pub n_index_inner: usize,
    /// Trapezoidal nodes on the closed contour for the decoupled solution.
    pub n_decoupled: usize,
    /// Relative tolerance for the mesh-halving estimate.
    pub tolerance: f64,
    /// Samples of `ℒ0` for the index and membership tests.
    pub n_trace: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { n_index: 48, n_index_inner: 41, n_decoupled: 256, tolerance: 1e-9, n_trace: 1024 }
    }
}

/// Nodes of the index −1 solution on `ℒ0`.
#[derive(Debug, Clone)]
struct IndexNodes {
    z: Vec<C64>,
    s: Vec<f64>,
    /// `w′(z) z′(θ)` times the weight.
    ds: Vec<C64>,
    sd: Vec<C64>,
    /// `log(√d̃(z̄)/√d̃(z)) = −2i(arg √d̃(z) − arg √d̃(Y(x2)))`.
    phi: Vec<C64>,
    theta: Vec<f64>,
    wts: Vec<f64>,
}

#[derive(Debug, Clone)]
struct IndexData {
    nodes: IndexNodes,
    psi_plus: Vec<C64>,
    b: f64,
}

/// Node data of the decoupled integral on one contour.
#[derive(Debug, Clone)]
struct DecoupledNodes {
    kind: ContourKind,
    /// `w(z_k)`.
    w: Vec<C64>,
    /// `z w′(z) dz / √(w(z) − w(y1))`.
    g: Vec<C64>,
    quad: ClosedQuadrature,
}

/// Numerical evaluator of `D(y)` at fixed `t`.
#[derive(Debug, Clone)]
pub struct DiagonalSolver {
    /// The step set before the change of variables.
    pub hat: StepSet,
    pub kd: KernelData,
    pub kernel: Kernel,
    pub t: f64,
    pub settings: SolverSettings,
    pub contour: Contour,
    pub indices: Indices,
    /// Gluing function with its pole at `y2`.
    pub w: GluingMap,
    pub anti: AntiTutte,
    /// `w(y1)`.
    pub c: C64,
    /// Constant of the decoupled solution, fixed from `f/√d̃ = κ/√(w − w(y1))`.
    pub kappa: C64,
    /// `|κ² − r/d̃′(y2)| / |r/d̃′(y2)|`.
    pub kappa_check: f64,
    /// The branch `i√(−u)` (cut on `u > 0`) is used for `√(w − w(y1))`.
    cut_positive: bool,
    cp: CurveParam,
    index: Option<IndexData>,
    curve: DecoupledNodes,
}

impl DiagonalSolver {
    pub fn new(hat: &StepSet, t: f64, settings: SolverSettings) -> Result<Self> {
        let kd = build_kernel(&phi_transform(hat))?;
        let kernel = kd.at(t)?;
        let cp = CurveParam::new(&kernel)?;
        if !cp.bounded {
            return Err(Error::UnboundedContour);
        }
        let contour = trace_curve(&kernel, settings.n_trace)?;
        let (w, _) = ode_data(&gluing_for(&kd, t)?, &kernel)?;
        let anti = anti_tutte_pair(&w, &kernel)?;
        let bp = kernel.branch_points()?;
        let c = w.eval(re(bp.y1))?;
        let mid = w.eval(re(0.5 * (bp.y1 + bp.y2)))?;
        let cut_positive = (mid - c).re > 0.0;
        let idx = indices(&kernel, settings.n_trace)?;
        let mut solver = DiagonalSolver {
            hat: hat.clone(),
            kd,
            kernel,
            t,
            settings,
            contour,
            indices: idx,
            w,
            anti,
            c,
            kappa: re(0.0),
            kappa_check: 0.0,
            cut_positive,
            cp,
            index: None,
            curve: DecoupledNodes { kind: ContourKind::Curve, w: vec![], g: vec![], quad: ClosedQuadrature::unit_circle(8)? },
        };
        let zs = re(0.5 * (bp.y2 + solver.cp.y_x2()));
        let f = solver.anti.f(zs)?;
        let kappa = f * solver.sqrt_c(solver.w.eval(zs)? - c) / solver.kernel.sqrt_d_t(zs)?;
        let expect = solver.w.residue()? / solver.kernel.d_t_prime(re(bp.y2)).re;
        solver.kappa = kappa;
        solver.kappa_check = (kappa * kappa - expect).norm() / expect.abs();
        let quad = ClosedQuadrature::curve(&solver.cp, settings.n_decoupled)?;
        solver.curve = solver.decoupled_nodes(quad)?;
        if idx.bvp == -1 {
            solver.index = Some(solver.index_data()?);
        }
        Ok(solver)
    }

    /// Default settings.
    pub fn for_model(hat: &StepSet, t: f64) -> Result<Self> {
        Self::new(hat, t, SolverSettings::default())
    }

    /// `√(w − w(y1))`, continuous along `ℒ`.
    fn sqrt_c(&self, u: C64) -> C64 {
        if self.cut_positive {
            I * (-u).sqrt()
        } else {
            u.sqrt()
        }
    }

    fn decoupled_nodes(&self, quad: ClosedQuadrature) -> Result<DecoupledNodes> {
        let n = quad.nodes.len();
        let mut w = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        let mut roots = Vec::with_capacity(n);
        for (z, dz) in quad.nodes.iter().zip(&quad.dz) {
            let (v, d) = self.w.eval_jet(*z)?;
            let r = self.sqrt_c(v - self.c);
            w.push(v);
            g.push(z * d * dz / r);
            roots.push(r);
        }
        for k in 0..n {
            let step = (roots[(k + 1) % n] / roots[k]).arg().abs();
            if step > 0.5 * PI {
                return Err(Error::BranchDiscontinuity(step));
            }
        }
        Ok(DecoupledNodes { kind: quad.kind, w, g, quad })
    }

    fn index_nodes(&self, n: usize) -> Result<IndexNodes> {
        let (theta, wts) = gauss_legendre(n, 0.0, PI)?;
        let arg0 = self.cp.sqrt_d_t(&self.cp.point(0.0)?).arg();
        let mut prev = arg0;
        let mut out = IndexNodes { z: vec![], s: vec![], ds: vec![], sd: vec![], phi: vec![], theta: theta.clone(), wts: wts.clone() };
        for (th, wt) in theta.iter().zip(&wts) {
            let p = self.cp.point(*th)?;
            let (v, d) = self.w.eval_jet(p.y)?;
            let sd = self.cp.sqrt_d_t(&p);
            let mut a = sd.arg();
            a += 2.0 * PI * ((prev - a) / (2.0 * PI)).round();
            if (a - prev).abs() > 0.5 * PI {
                return Err(Error::PhaseJumpTooLarge((a - prev).abs()));
            }
            prev = a;
            out.z.push(p.y);
            out.s.push(v.re);
            out.ds.push(d * p.dy * wt);
            out.sd.push(sd);
            out.phi.push(-2.0 * I * (a - arg0));
        }
        Ok(out)
    }

    fn index_data(&self) -> Result<IndexData> {
        let nodes = self.index_nodes(self.settings.n_index)?;
        let inner = self.index_nodes(self.settings.n_index_inner)?;
        let a = self.anti.a.re;
        let b = self.anti.b.re;
        // Side of the slit w(ℒ) that is reached from inside 𝒢_ℒ next to ℒ0;
        // the + side lies to the left of the slit oriented from A to B.
        let p = self.cp.point(0.5 * PI)?;
        let probe = self.w.eval(p.y + I * 1e-4 * p.dy)?;
        let plus_is_interior = (probe.im < 0.0) == (b < a);
        let sgn = if plus_is_interior { 1.0 } else { -1.0 };
        let mut psi_plus = Vec::with_capacity(nodes.z.len());
        for k in 0..nodes.z.len() {
            let (s0, p0, t0) = (nodes.s[k], nodes.phi[k], nodes.theta[k]);
            // s(θ) is even about 0 and π, so s − s0 also vanishes at −θ0 and
            // 2π − θ0; those poles are removed analytically.
            let c0 = -2.0 * p0;
            let cpi = -4.0 * PI * I - 2.0 * p0;
            let mut integ = c0 * ((PI + t0) / t0).ln() + cpi * ((PI - t0) / (2.0 * PI - t0)).ln();
            for j in 0..inner.z.len() {
                let th = inner.theta[j];
                integ += (inner.phi[j] - p0) * inner.ds[j] / (inner.s[j] - s0)
                    - (c0 / (th + t0) + cpi / (th - (2.0 * PI - t0))) * inner.wts[j];
            }
            let pv = integ - p0 * (s0 - a).abs().ln();
            let lb = (b - s0).abs().ln();
            let g = sgn * 0.5 * p0 + pv / (2.0 * PI * I) + (p0 + 2.0 * PI * I) / (2.0 * PI * I) * lb;
            psi_plus.push((s0 - b).signum() * g.exp());
        }
        Ok(IndexData { nodes, psi_plus, b })
    }

    fn check_point(&self, y: C64) -> Result<()> {
        match in_domain(&self.contour, y) {
            Ok(true) => {}
            Ok(false) => return Err(Error::ConvergenceDomainViolated(format!("{} is outside the domain bounded by the curve", y))),
            Err(Error::OnCurve(_)) => return Err(Error::PointTooCloseToContour),
            Err(e) => return Err(e),
        }
        if self.curve.quad.distance(y) < self.curve.quad.cell() {
            return Err(Error::PointTooCloseToContour);
        }
        Ok(())
    }

    /// Index −1 solution on `ℒ0`.
    #[allow(non_snake_case)]
    pub fn theorem1_D(&self, y: C64) -> Result<C64> {
        let data = self
            .index
            .as_ref()
            .ok_or(Error::IndexMismatch { expected: -1, found: self.indices.bvp })?;
        self.check_point(y)?;
        let u = self.w.eval(y)?;
        let nd = &data.nodes;
        let two_pi_i = 2.0 * PI * I;
        let gamma: C64 = (0..nd.z.len()).map(|k| nd.phi[k] * nd.ds[k] / (nd.s[k] - u)).sum::<C64>() / two_pi_i;
        let psi = (u - data.b) * gamma.exp();
        let sum: C64 = (0..nd.z.len())
            .map(|k| (nd.z[k] - nd.z[k].conj()) / nd.sd[k] * nd.ds[k] / (data.psi_plus[k] * (nd.s[k] - u)))
            .sum();
        Ok(psi / two_pi_i * sum)
    }

    /// Decoupled solution, integrated over `ℒ`.
    #[allow(non_snake_case)]
    pub fn theorem2_D(&self, y: C64) -> Result<C64> {
        Ok(self.theorem2_on(y, ContourKind::Curve)?.value)
    }

    /// Decoupled solution with its error estimate, over `ℒ` or the unit circle.
    ///
    /// The circle is admissible when it lies in `𝒢_ℒ` and encloses `y`.
    pub fn theorem2_on(&self, y: C64, kind: ContourKind) -> Result<CauchyIntegralResult> {
        self.check_point(y)?;
        let circle;
        let nodes = match kind {
            ContourKind::Curve => &self.curve,
            ContourKind::UnitCircle => {
                let quad = ClosedQuadrature::unit_circle(self.settings.n_decoupled)?;
                for z in quad.nodes.iter().step_by(8) {
                    if !in_domain(&self.contour, *z)? {
                        return Err(Error::ConvergenceDomainViolated("unit circle leaves the domain".into()));
                    }
                }
                if y.norm() >= 1.0 - quad.cell() {
                    return Err(Error::ConvergenceDomainViolated(format!("{} is not inside the unit circle", y)));
                }
                circle = self.decoupled_nodes(quad)?;
                &circle
            }
        };
        let (v, _) = self.w.eval_jet(y)?;
        let f = self.anti.f(y)?;
        let scale = self.kappa / f / (2.0 * PI * I);
        let terms: Vec<C64> = nodes.g.iter().zip(&nodes.w).map(|(g, wk)| g / (wk - v)).collect();
        let fine: C64 = terms.iter().sum::<C64>() * scale;
        let coarse: C64 = terms.iter().step_by(2).sum::<C64>() * 2.0 * scale;
        let error = (fine - coarse).norm();
        Ok(CauchyIntegralResult {
            value: fine,
            error,
            contour: nodes.kind,
            nodes: nodes.g.len(),
            converged: error <= self.settings.tolerance * fine.norm().max(1.0),
        })
    }

    /// Dispatches on `method`. The series method is available for the reverse
    /// Kreweras model at `y = 0` only.
    pub fn evaluate(&self, method: Method, y: C64) -> Result<C64> {
        match method {
            Method::Theorem1 => self.theorem1_D(y),
            Method::Theorem2 => self.theorem2_D(y),
            Method::Theorem2SeriesAtZero => {
                if y.norm() != 0.0 || self.hat != preset("reverse-kreweras")? {
                    return Err(Error::Unsupported("the series route computes D(0) of reverse Kreweras".into()));
                }
                Ok(re(theorem2_D0_series(24)?.eval(self.t)))
            }
        }
    }

    /// `f(z) √(w(z) − w(y1)) / √d̃(z)` at `z`, constant (= `κ`) on `𝒢_ℒ`.
    pub fn kappa_at(&self, z: C64) -> Result<C64> {
        Ok(self.anti.f(z)? * self.sqrt_c(self.w.eval(z)? - self.c) / self.kernel.sqrt_d_t(z)?)
    }
}

fn dz_laurent(c: &LaurentZ) -> LaurentZ {
    let mut terms = BTreeMap::new();
    for (k, v) in &c.terms {
        if *k != 0 {
            terms.insert(k - 1, v * Q::from_integer((*k).into()));
        }
    }
    LaurentZ { terms }
}

fn lift(s: &PS) -> PZ {
    s.map_coeffs(|c| LaurentZ::constant(c.clone()))
}

/// `z w′(z)/√(P − S w(z) + w(z)²)` in powers of `W` with Laurent polynomial
/// coefficients in `z`, for `w(z) = (1/z − 1/W)√(1 − zW²)`.
pub fn d0_integrand(order: i64) -> Result<PZ> {
    let trunc = order + 3;
    let lz = |n: i64, k: i64| LaurentZ::monomial(qi(n), k);
    let base = PZ::from_parts(1, BTreeMap::from([(0, lz(1, 0)), (2, lz(-1, 1))]), Some(trunc));
    let root = base.sqrt()?;
    let inv_w = PZ::monomial(LaurentZ::one(), -1, 1);
    let w = PZ::constant(lz(1, -1)).sub(&inv_w).mul(&root);
    let dw = w.map_coeffs(dz_laurent);
    // P = (1 − W³)^{3/2}/W² and S² = 2P − (W⁶ − 20W³ − 8)/(4W²).
    let cube = PS::from_parts(1, BTreeMap::from([(0, qi(1)), (3, qi(-1))]), Some(trunc + 2));
    let p = cube.powi(3)?.sqrt()?.mul(&PS::monomial(qi(1), -2, 1));
    let poly = PS::from_terms(1, &[(qi(1), 6), (qi(-20), 3), (qi(-8), 0)], None);
    let s2 = p.scale(&qi(2)).sub(&poly.mul(&PS::monomial(q(1, 4), -2, 1)));
    let s = s2.sqrt()?;
    let rad = lift(&p).sub(&lift(&s).mul(&w)).add(&w.mul(&w));
    let num = dw.mul(&PZ::constant(lz(1, 1)));
    let out = num.div(&rad.sqrt()?)?;
    Ok(out.truncated(order + 1, 1))
}

/// `−√(w(y1) − w(y2)) / √(w_{y2}(Y(x1)) w_{y2}(Y(x2)) d̃′(y2) (−w′(y2)))`,
/// each square root taken with a positive leading coefficient.
pub fn d0_prefactor(order: i64) -> Result<PS> {
    let e = kreweras_series::expansions(2 * order)?;
    let num = e.w_y1.sub(&e.w_y2).sqrt()?;
    let r1 = e.repoled(&e.w_yx1)?;
    let r2 = e.repoled(&e.w_yx2)?;
    let den = r1.mul(&r2).sqrt()?.mul(&e.d_t_prime_y2.sqrt()?).mul(&e.w_prime_y2.neg().sqrt()?);
    Ok(num.div(&den)?.neg().reduced())
}

/// The exact `D(0)` pipeline and its intermediate series.
#[derive(Debug, Clone)]
pub struct D0Series {
    pub prefactor: PS,
    /// Integrand in powers of `W`.
    pub integrand: PZ,
    /// `(1/2πi)∮_{|z|=1}` of the integrand, in powers of `t`.
    pub integral: PS,
    pub d0: PS,
    pub working_order: i64,
}

/// Runs the pipeline so that `D(0)` is known below `t^n`, raising the
/// working order as needed.
pub fn d0_pipeline(n: i64) -> Result<D0Series> {
    let mut work = n + 2;
    while work <= n + 32 {
        let integrand = d0_integrand(work)?;
        let in_w = residue_on_unit_circle(&integrand);
        let integral = in_w.compose(&w_series(work + 2)?)?.reduced();
        let prefactor = d0_prefactor(work + 2)?;
        let d0 = prefactor.mul(&integral).reduced();
        if d0.known_through(n, 1) {
            return Ok(D0Series { prefactor, integrand, integral, d0: d0.truncated(n, 1).reduced(), working_order: work });
        }
        work += 4;
    }
    Err(Error::TruncationInsufficient(format!("D(0) not known through t^{} at working order {}", n, work)))
}

/// `D(0) + O(tⁿ)` for the reverse Kreweras model.
#[allow(non_snake_case)]
pub fn theorem2_D0_series(n: i64) -> Result<PS> {
    Ok(d0_pipeline(n)?.d0)
}

/// Values of the sections at one point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SectionValues {
    /// `L(x, y)` of the transformed equation.
    pub l: C64,
    /// `L_{−0}(x)`.
    pub l_minus0: C64,
    /// `L̂(x, y) = L(1/y, xy)`.
    pub l_hat: C64,
    /// `D̂(x, y) = D(xy)`.
    pub d_hat: C64,
    /// `Û(x, y) = L(1/x, xy)`.
    pub u_hat: C64,
    /// `C(x, y) = L̂ + D̂ + Û`.
    pub c: C64,
}

/// Rebuilds sections from a diagonal evaluator, through the transformed
/// functional equation.
pub struct Reconstruction<'a> {
    pub kernel: &'a Kernel,
    /// `δ_{−1,−1}` of the original step set.
    pub delta: f64,
    pub n_steps: usize,
    pub d: &'a dyn Fn(C64) -> Result<C64>,
    pub d0: C64,
}

impl<'a> Reconstruction<'a> {
    pub fn new(kernel: &'a Kernel, hat: &StepSet, d: &'a dyn Fn(C64) -> Result<C64>) -> Result<Self> {
        let d0 = d(re(0.0))?;
        Ok(Reconstruction { kernel, delta: hat.delta(-1, -1) as f64, n_steps: hat.len(), d, d0 })
    }

    /// `L_{−0}(x) = (x/c(x))(½Y0 + (xã(Y0) + ½b̃(Y0))D(Y0) − ½tδD(0))`.
    pub fn l_minus0(&self, x: C64) -> Result<C64> {
        let k = self.kernel;
        let cx = k.c(x);
        if cx.norm() < 1e-300 {
            return Err(Error::ConvergenceDomainViolated("c(x) vanishes".into()));
        }
        let (y0, _) = k.y_branches(x)?;
        let inner = x * k.a_t(y0) + 0.5 * k.b_t(y0);
        Ok(x / cx * (0.5 * y0 + inner * (self.d)(y0)? - 0.5 * k.t * self.delta * self.d0))
    }

    /// `L(x, y)` from `K L = c L_{−0} − x(xã(y) + ½b̃(y))D(y) + ½tδxD(0) − ½xy`.
    pub fn l(&self, x: C64, y: C64) -> Result<C64> {
        let k = self.kernel;
        let kv = k.k(x, y);
        let scale = k.a(x).norm() * y.norm_sqr() + k.b(x).norm() * y.norm() + k.c(x).norm();
        if kv.norm() <= 1e-12 * scale {
            return Err(Error::KernelZero);
        }
        let rhs = k.c(x) * self.l_minus0(x)? - x * (x * k.a_t(y) + 0.5 * k.b_t(y)) * (self.d)(y)?
            + 0.5 * k.t * self.delta * x * self.d0
            - 0.5 * x * y;
        Ok(rhs / kv)
    }

    /// All sections at `(x, y)` in the original coordinates.
    pub fn sections(&self, x: C64, y: C64) -> Result<SectionValues> {
        let rho = |v: C64| v.norm().max(1.0 / v.norm());
        if x.norm() == 0.0 || y.norm() == 0.0 {
            return Err(Error::ConvergenceDomainViolated("zero coordinate".into()));
        }
        let r = self.n_steps as f64 * self.kernel.t * rho(x) * rho(y);
        if r >= 1.0 {
            return Err(Error::ConvergenceDomainViolated(format!("|S| t ρ(x) ρ(y) = {} ≥ 1", r)));
        }
        let (lx, ly) = phi_inverse_point(x, y);
        let (ux, uy) = phi_inverse_point(y, x);
        let l_hat = self.l(lx, ly)?;
        let u_hat = self.l(ux, uy)?;
        let d_hat = (self.d)(x * y)?;
        Ok(SectionValues {
            l: self.l(x, y)?,
            l_minus0: self.l_minus0(x)?,
            l_hat,
            d_hat,
            u_hat,
            c: l_hat + d_hat + u_hat,
        })
    }
}

/// Convenience wrapper around [`Reconstruction::sections`].
pub fn reconstruct_sections(
    d: &dyn Fn(C64) -> Result<C64>,
    kernel: &Kernel,
    hat: &StepSet,
    x: C64,
    y: C64,
) -> Result<SectionValues> {
    Reconstruction::new(kernel, hat, d)?.sections(x, y)
}
