//! The curve `ℒ = Y0([x1,x2]) ∪ Y1([x1,x2])`, membership in `𝒢_ℒ` and
//! winding numbers.
//!
//! `ℒ` is parametrised by `x = m + h cos θ` with `m, h` the midpoint and
//! half-width of `[x1, x2]`. Writing `d(x) = (x − x1)(x − x2) q(x)` the square
//! root `√d(x) = i h sin θ √q(x)` is smooth in `θ`, so the map
//! `θ ↦ y(θ)` is analytic on `[0, π]` and runs along `ℒ0` from `Y(x2)` to `Y(x1)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{horner, BranchPoints, Kernel};

/// Default number of samples on `ℒ0`.
pub const DEFAULT_POINTS: usize = 2048;

/// Smooth parametrisation of `ℒ0` by `θ ∈ [0, π]`.
#[derive(Debug, Clone)]
pub struct CurveParam {
    pub kernel: Kernel,
    pub bp: BranchPoints,
    mid: f64,
    half: f64,
    /// `d(x) / ((x − x1)(x − x2))`.
    q: Vec<f64>,
    pub bounded: bool,
}

/// One point of `ℒ0`.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub theta: f64,
    /// Generating point `x ∈ [x1, x2]`.
    pub x: f64,
    pub y: C64,
    /// `dy/dθ`.
    pub dy: C64,
}

/// Divides `p` by `(x − r)`, dropping the remainder.
pub(crate) fn deflate(p: &[f64], r: f64) -> Vec<f64> {
    let n = p.len();
    let mut out = vec![0.0; n - 1];
    let mut acc = 0.0;
    for k in (1..n).rev() {
        acc = acc * r + p[k];
        out[k - 1] = acc;
    }
    out
}

impl CurveParam {
    pub fn new(kernel: &Kernel) -> Result<Self> {
        let bp = kernel.branch_points()?;
        let q = deflate(&deflate(&kernel.d, bp.x1), bp.x2);
        let bounded = kernel.y_at(bp.x1).is_some();
        Ok(CurveParam {
            kernel: kernel.clone(),
            bp,
            mid: 0.5 * (bp.x1 + bp.x2),
            half: 0.5 * (bp.x2 - bp.x1),
            q,
            bounded,
        })
    }

    /// `Y(x2)`, the positive real crossing.
    pub fn y_x2(&self) -> f64 {
        self.kernel.y_at(self.bp.x2).expect("Y(x2) is finite")
    }

    /// `Y(x1)` if finite.
    pub fn y_x1(&self) -> Option<f64> {
        self.kernel.y_at(self.bp.x1)
    }

    /// Point of `ℒ0` at angle `θ`; `θ = π` is rejected for unbounded curves.
    pub fn point(&self, theta: f64) -> Result<CurvePoint> {
        let x = self.mid + self.half * theta.cos();
        let xc = C64::new(x, 0.0);
        let a = self.kernel.a(xc).re;
        if a == 0.0 {
            return Err(Error::UnboundedContour);
        }
        let sa = a.signum();
        let sq = horner(&self.q, xc).re.max(0.0).sqrt();
        let sigma = C64::new(0.0, sa * self.half * theta.sin() * sq);
        let y = (-self.kernel.b(xc) + sigma) / (2.0 * a);
        let dy = self.kernel.k_x(xc, y) / C64::new(0.0, sa * sq);
        Ok(CurvePoint { theta, x, y, dy })
    }

    /// `√d̃(y)` at a curve point, fixed through the generating `x`.
    pub fn sqrt_d_t(&self, p: &CurvePoint) -> C64 {
        self.kernel.sqrt_d_t_on_curve(C64::new(p.x, 0.0), p.y)
    }
}

/// Sampled curve `ℒ`, oriented with `𝒢_ℒ` on the left.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Contour {
    /// Closed loop: `ℒ0` from `Y(x2)` to `Y(x1)` then `ℒ1` back.
    pub points: Vec<C64>,
    /// Generating `x` of each sample.
    pub xs: Vec<f64>,
    /// Number of samples on `ℒ0`.
    pub n_upper: usize,
    pub bounded: bool,
    pub closed: bool,
    pub y_x2: f64,
    pub y_x1: Option<f64>,
    /// Distance below which a point counts as lying on the curve.
    pub tolerance: f64,
}

impl Contour {
    /// Samples of `ℒ0` (Im ≥ 0).
    pub fn upper(&self) -> &[C64] {
        &self.points[..self.n_upper]
    }

    /// Samples of `ℒ1` (Im ≤ 0), from `Y(x1)` back to `Y(x2)`.
    pub fn lower(&self) -> &[C64] {
        &self.points[self.n_upper - 1..]
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.norm()))
    }

    /// CSV rows `x_param,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x_param,re_y,im_y\n");
        for (x, p) in self.xs.iter().zip(&self.points) {
            s.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", x, p.re, p.im));
        }
        s
    }
}

/// Samples `ℒ` on a Chebyshev grid of `[x1, x2]` (`n_points` samples on `ℒ0`).
///
/// Unbounded curves are traced up to the last finite sample and flagged.
pub fn trace_curve(kernel: &Kernel, n_points: usize) -> Result<Contour> {
    if n_points < 4 {
        return Err(Error::InvalidInput("need at least 4 points".into()));
    }
    let cp = CurveParam::new(kernel)?;
    let last = if cp.bounded { n_points - 1 } else { n_points - 2 };
    let upper: Vec<CurvePoint> = (0..=last)
        .into_par_iter()
        .map(|k| cp.point(PI * k as f64 / (n_points - 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut points: Vec<C64> = upper.iter().map(|p| p.y).collect();
    let mut xs: Vec<f64> = upper.iter().map(|p| p.x).collect();
    if cp.bounded {
        // Real crossings are exact.
        points[0] = C64::new(cp.y_x2(), 0.0);
        *points.last_mut().unwrap() = C64::new(cp.y_x1().unwrap(), 0.0);
    }
    let n_upper = points.len();
    let start = if cp.bounded { n_upper - 2 } else { n_upper - 1 };
    for k in (1..=start).rev() {
        points.push(points[k].conj());
        xs.push(xs[k]);
    }
    let scale = points.iter().fold(1.0f64, |m, p| m.max(p.norm()));
    Ok(Contour {
        points,
        xs,
        n_upper,
        bounded: cp.bounded,
        closed: cp.bounded,
        y_x2: cp.y_x2(),
        y_x1: cp.y_x1(),
        tolerance: 1e-9 * scale,
    })
}

fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * ab.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Whether `y` lies in `𝒢_ℒ`, the bounded component (winding number test).
pub fn in_domain(contour: &Contour, y: C64) -> Result<bool> {
    if !contour.bounded {
        return Err(Error::UnboundedContour);
    }
    let n = contour.points.len();
    let mut dmin = f64::INFINITY;
    let mut wind = 0.0;
    for k in 0..n {
        let a = contour.points[k];
        let b = contour.points[(k + 1) % n];
        dmin = dmin.min(segment_distance(y, a, b));
        wind += ((b - y) / (a - y)).arg();
    }
    if dmin < contour.tolerance {
        return Err(Error::OnCurve(dmin));
    }
    Ok((wind / (2.0 * PI)).round() as i64 != 0)
}

/// Winding number of a closed sequence of non-zero values.
pub fn winding_index(values: &[C64]) -> Result<i64> {
    if values.is_empty() {
        return Ok(0);
    }
    let n = values.len();
    let mut acc = 0.0;
    for k in 0..n {
        let a = values[k];
        let b = values[(k + 1) % n];
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return Err(Error::InvalidInput("zero value on the contour".into()));
        }
        let step = (b / a).arg();
        if step.abs() > PI / 2.0 {
            return Err(Error::PhaseJumpTooLarge(step.abs()));
        }
        acc += step;
    }
    let turns = acc / (2.0 * PI);
    let r = turns.round();
    if (turns - r).abs() >= 0.1 {
        return Err(Error::InvalidInput(format!("winding {} is not close to an integer", turns)));
    }
    Ok(r as i64)
}

/// `Ind_ℒ d̃` and the index of `√d̃(v⁻)/√d̃(v⁺)` along `w(ℒ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indices {
    pub d_tilde: i64,
    pub bvp: i64,
}

/// Computes both indices on a bounded contour.
pub fn indices(kernel: &Kernel, n_points: usize) -> Result<Indices> {
    let cp = CurveParam::new(kernel)?;
    if !cp.bounded {
        return Err(Error::UnboundedContour);
    }
    let upper: Vec<CurvePoint> =
        (0..n_points).map(|k| cp.point(PI * k as f64 / (n_points - 1) as f64)).collect::<Result<_>>()?;
    // d̃ around the closed curve.
    let mut loop_vals: Vec<C64> = upper.iter().map(|p| kernel.d_t(p.y)).collect();
    for p in upper[1..n_points - 1].iter().rev() {
        loop_vals.push(kernel.d_t(p.y.conj()));
    }
    let d_tilde = winding_index(&loop_vals)?;
    // G(u) = √d̃(ȳ)/√d̃(y) along ℒ0, equal to 1 at both ends.
    let g: Vec<C64> = upper
        .iter()
        .map(|p| {
            let s = cp.sqrt_d_t(p);
            s.conj() / s
        })
        .collect();
    let bvp = winding_index(&g)?;
    Ok(Indices { d_tilde, bvp })
}
