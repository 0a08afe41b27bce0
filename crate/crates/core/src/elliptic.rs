//! Weierstrass `℘` for rectangular lattices, its inverse, and the period
//! integrals of the discriminant `d̃`.
//!
//! `℘` is evaluated through Jacobi theta series with nome `|q| ≤ e^{-π}`:
//! whichever period is longer plays the role of the imaginary one, and the
//! homogeneity relation `℘(z; Λ) = −℘(−iz; −iΛ)` handles the swap.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::deflate;
use crate::kernel::Kernel;
use crate::quad::gauss_legendre;

/// Rectangular lattice `ℤ·real + ℤ·i·imag`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub real: f64,
    pub imag: f64,
}

fn i() -> C64 {
    C64::new(0.0, 1.0)
}

/// `θ1..θ4` at `v` for nome `q`.
fn thetas(v: C64, q: f64) -> [C64; 4] {
    let mut th = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
    for k in 0..40 {
        let kf = k as f64;
        let half = q.powf((kf + 0.5) * (kf + 0.5));
        let s = ((2.0 * kf + 1.0) * v).sin();
        let c = ((2.0 * kf + 1.0) * v).cos();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        th[0] += 2.0 * sign * half * s;
        th[1] += 2.0 * half * c;
        if k >= 1 {
            let full = q.powf(kf * kf);
            let c2 = (2.0 * kf * v).cos();
            th[2] += 2.0 * full * c2;
            th[3] += 2.0 * sign * full * c2;
        }
        if half * (1.0 + s.norm() + c.norm()) < 1e-300 {
            break;
        }
    }
    th
}

/// `℘` and `℘′` for the lattice `ℤΩ + ℤΩτ`, `τ = i·s`, `s ≥ 1`.
fn wp_theta(z: C64, om: f64, s: f64) -> (C64, C64) {
    // Reduce to the central cell.
    let im_period = om * s;
    let z = z - C64::new(0.0, im_period * (z.im / im_period).round());
    let z = z - C64::new(om * (z.re / om).round(), 0.0);
    let q = (-PI * s).exp();
    let v = z * (PI / om);
    let [t1, t2, t3, t4] = thetas(v, q);
    let [_, a2, a3, a4] = thetas(C64::new(0.0, 0.0), q);
    let f = PI * a2 * a3 * t4 / (om * t1);
    let p = f * f - PI * PI / (3.0 * om * om) * (a2.powi(4) + a3.powi(4));
    let pd = -2.0 * (PI / om).powi(3) * t2 * t3 * t4 * (a2 * a3 * a4).powi(2) / t1.powi(3);
    (p, pd)
}

impl Lattice {
    pub fn new(real: f64, imag: f64) -> Result<Self> {
        if !(real > 0.0 && imag > 0.0 && real.is_finite() && imag.is_finite()) {
            return Err(Error::InvalidInput(format!("periods {} and {}i", real, imag)));
        }
        Ok(Lattice { real, imag })
    }

    /// `(℘(z), ℘′(z))`.
    pub fn wp(&self, z: C64) -> (C64, C64) {
        if self.imag >= self.real {
            wp_theta(z, self.real, self.imag / self.real)
        } else {
            let (p, pd) = wp_theta(-i() * z, self.imag, self.real / self.imag);
            (-p, i() * pd)
        }
    }

    /// `e1 = ℘(ω_r/2)`, `e2 = ℘((ω_r + iω_i)/2)`, `e3 = ℘(iω_i/2)`; `e1 > e2 > e3`.
    pub fn e_values(&self) -> [f64; 3] {
        [
            self.wp(C64::new(0.5 * self.real, 0.0)).0.re,
            self.wp(C64::new(0.5 * self.real, 0.5 * self.imag)).0.re,
            self.wp(C64::new(0.0, 0.5 * self.imag)).0.re,
        ]
    }

    /// `(g2, g3)` from the half-period values.
    pub fn invariants(&self) -> (f64, f64) {
        let [e1, e2, e3] = self.e_values();
        (2.0 * (e1 * e1 + e2 * e2 + e3 * e3), 4.0 * e1 * e2 * e3)
    }

    /// Representative of `z` in `[0, ω_r) × [0, ω_i)`.
    pub fn reduce(&self, z: C64) -> C64 {
        C64::new(z.re.rem_euclid(self.real), z.im.rem_euclid(self.imag))
    }

    /// `℘⁻¹(u)` in the half-parallelogram `0 ≤ Re ≤ ω_r/2, 0 ≤ Im < ω_i`
    /// (on the two vertical edges only the lower half is used).
    pub fn wp_inv(&self, u: C64) -> Result<C64> {
        let [e1, e2, e3] = self.e_values();
        let mut z = carlson_rf(u - e1, u - e2, u - e3);
        for _ in 0..4 {
            let (p, pd) = self.wp(z);
            if pd.norm() == 0.0 {
                break;
            }
            let step = (p - u) / pd;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            z -= step;
        }
        let residual = (self.wp(z).0 - u).norm();
        if !(residual <= 1e-7 * (1.0 + u.norm())) {
            return Err(Error::InversionOutsideFundamentalDomain);
        }
        let mut z = self.reduce(z);
        if z.re > 0.5 * self.real {
            z = self.reduce(-z);
        }
        let edge = 1e-12 * self.real;
        if (z.re < edge || (z.re - 0.5 * self.real).abs() < edge) && z.im > 0.5 * self.imag {
            z = C64::new(z.re, self.imag - z.im);
        }
        Ok(z)
    }

    /// `℘` by direct lattice summation over `|m|, |n| ≤ radius` (slow; for testing).
    pub fn wp_lattice_sum(&self, z: C64, radius: i64) -> C64 {
        let mut s = 1.0 / (z * z);
        for m in -radius..=radius {
            for n in -radius..=radius {
                if m == 0 && n == 0 {
                    continue;
                }
                let w = C64::new(m as f64 * self.real, n as f64 * self.imag);
                s += 1.0 / ((z - w) * (z - w)) - 1.0 / (w * w);
            }
        }
        s
    }

    /// `g2 = 60 Σ' ω⁻⁴`, `g3 = 140 Σ' ω⁻⁶` by summation over `|m|, |n| ≤ radius`.
    pub fn invariants_lattice_sum(&self, radius: i64) -> (f64, f64) {
        let (mut s4, mut s6) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for m in -radius..=radius {
            for n in -radius..=radius {
                if m == 0 && n == 0 {
                    continue;
                }
                let w = C64::new(m as f64 * self.real, n as f64 * self.imag);
                s4 += w.powi(-4);
                s6 += w.powi(-6);
            }
        }
        (60.0 * s4.re, 140.0 * s6.re)
    }
}

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
pub fn carlson_rf(x: C64, y: C64, z: C64) -> C64 {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..60 {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = (x + lam) * 0.25;
        y = (y + lam) * 0.25;
        z = (z + lam) * 0.25;
    }
    1.0 / ((x + y + z) / 3.0).sqrt()
}

/// Periods attached to the curve and the rational map `f` into `℘_{1,2}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipticData {
    /// `ω1 = i·omega1_im`.
    pub omega1_im: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub g2: f64,
    pub g3: f64,
    /// Pole of `f` (`None` when `y4 = ∞`).
    pub y4: Option<f64>,
    /// `f(y) = f0 + f1/(y − y4)` or `f0 + f1·y`.
    pub f0: f64,
    pub f1: f64,
    /// Largest change of a period when the quadrature order is doubled.
    pub error: f64,
}

impl EllipticData {
    pub fn lattice12(&self) -> Lattice {
        Lattice { real: self.omega2, imag: self.omega1_im }
    }

    pub fn lattice13(&self) -> Lattice {
        Lattice { real: self.omega3, imag: self.omega1_im }
    }

    /// `f(y)`.
    pub fn f(&self, y: C64) -> C64 {
        match self.y4 {
            Some(y4) => self.f0 + self.f1 / (y - y4),
            None => self.f0 + self.f1 * y,
        }
    }

    /// `f′(y)`.
    pub fn f_prime(&self, y: C64) -> C64 {
        match self.y4 {
            Some(y4) => -self.f1 / ((y - y4) * (y - y4)),
            None => C64::new(self.f1, 0.0),
        }
    }
}

/// `∫_p^q g(y) dy` with `y = m + h sin φ`, removing inverse square roots at both ends.
fn sine_integral<F: Fn(f64) -> f64>(p: f64, q: f64, n: usize, g: F) -> Result<f64> {
    let (m, h) = (0.5 * (p + q), 0.5 * (q - p));
    let (x, w) = gauss_legendre(n, -0.5 * PI, 0.5 * PI)?;
    Ok(x.iter().zip(&w).map(|(phi, wt)| wt * h * phi.cos() * g(m + h * phi.sin())).sum())
}

fn horner(p: &[f64], y: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * y + c)
}

/// The endpoint roots are divided out of `d̃` so that the integrands are smooth
/// and free of cancellation near the branch points.
fn periods_at(kernel: &Kernel, y: [f64; 3], y_x1: Option<f64>, n: usize) -> Result<[f64; 3]> {
    let [y1, y2, y3] = y;
    let r1 = deflate(&kernel.dt, y1);
    let r12 = deflate(&r1, y2);
    let r23 = deflate(&deflate(&kernel.dt, y2), y3);
    let (x, wts) = gauss_legendre(n, -0.5 * PI, 0.5 * PI)?;
    let between = |p: f64, q: f64, rho: &dyn Fn(f64) -> f64| -> f64 {
        let (m, h) = (0.5 * (p + q), 0.5 * (q - p));
        x.iter().zip(&wts).map(|(phi, wt)| wt / rho(m + h * phi.sin()).abs().sqrt()).sum()
    };
    // −d̃ = (y − y1)(y2 − y)ρ12 and d̃ = (y − y2)(y3 − y)(−ρ23).
    let w1 = between(y1, y2, &|v| horner(&r12, v));
    let w2 = between(y2, y3, &|v| horner(&r23, v));
    // d̃ = (y1 − y)(−ρ1) on the left of y1.
    let w3 = match y_x1 {
        Some(b) => {
            let (m, h) = (0.5 * (b + y1), 0.5 * (y1 - b));
            x.iter()
                .zip(&wts)
                .map(|(phi, wt)| {
                    let s = phi.sin();
                    wt * (h * (1.0 + s)).sqrt() / horner(&r1, m + h * s).abs().sqrt()
                })
                .sum()
        }
        None => {
            let (x, wts) = gauss_legendre(n, 0.0, 0.5 * PI)?;
            x.iter()
                .zip(&wts)
                .map(|(phi, wt)| {
                    let c = phi.cos();
                    let tan = phi.tan();
                    wt * 2.0 / (c * c * horner(&r1, y1 - tan * tan).abs().sqrt())
                })
                .sum()
        }
    };
    let out = [w1, w2, w3];
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::QuadratureNotConverged(f64::INFINITY));
    }
    Ok(out)
}

/// Largest Gauss-Legendre order tried for the period integrals.
pub const MAX_NODES: usize = 2048;

/// Periods `ω1, ω2, ω3`, invariants of `℘_{1,2}` and the map `f`.
pub fn elliptic_periods(kernel: &Kernel) -> Result<EllipticData> {
    let bp = kernel.branch_points()?;
    let y_x1 = kernel.y_at(bp.x1);
    let ys = [bp.y1, bp.y2, bp.y3];
    // Nearly colliding branch points make the integrands nearly singular
    // just outside the endpoints, so the order is doubled until it settles.
    let mut n = 64;
    let mut prev = periods_at(kernel, ys, y_x1, n)?;
    let (fine, error) = loop {
        n *= 2;
        let next = periods_at(kernel, ys, y_x1, n)?;
        let error = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if error <= 1e-12 * scale.max(1.0) {
            break (next, error);
        }
        if n >= MAX_NODES {
            return Err(Error::QuadratureNotConverged(error));
        }
        prev = next;
    };
    let [w1, w2, w3] = fine;
    let (f0, f1) = match bp.y4 {
        Some(y4) => {
            let yc = C64::new(y4, 0.0);
            (kernel.d_t_second(yc).re / 6.0, kernel.d_t_prime(yc).re)
        }
        None => {
            let z = C64::new(0.0, 0.0);
            (kernel.d_t_second(z).re / 6.0, kernel.d_t_third(z).re / 6.0)
        }
    };
    let l12 = Lattice::new(w2, w1)?;
    let (g2, g3) = l12.invariants();
    Ok(EllipticData { omega1_im: w1, omega2: w2, omega3: w3, g2, g3, y4: bp.y4, f0, f1, error })
}

/// `∫_0^1 dy/√(y(1−y))` by the same endpoint scheme (equals `π`).
pub fn calibration_integral(n: usize) -> Result<f64> {
    sine_integral(0.0, 1.0, n, |y| 1.0 / (y * (1.0 - y)).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_matches_lattice_sum() {
        for l in [Lattice::new(2.0, 3.0).unwrap(), Lattice::new(8.46, 3.29).unwrap()] {
            let z = C64::new(0.37, 0.21);
            let a = l.wp(z).0;
            let b = l.wp_lattice_sum(z, 300);
            assert!((a - b).norm() < 1e-3 * a.norm(), "{} {}", a, b);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let l = Lattice::new(8.45996, 3.2894).unwrap();
        for z in [C64::new(1.3, 0.7), C64::new(3.9, 2.9), C64::new(0.2, 0.1)] {
            let u = l.wp(z).0;
            let back = l.wp_inv(u).unwrap();
            assert!((l.wp(back).0 - u).norm() < 1e-9 * (1.0 + u.norm()));
            assert!(back.re <= 0.5 * l.real + 1e-12 && back.im < l.imag);
        }
    }

    #[test]
    fn calibration() {
        assert!((calibration_integral(64).unwrap() - PI).abs() < 1e-10);
    }
}
