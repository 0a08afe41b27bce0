//! Exact walk counting by dynamic programming, generating-function sections
//! and functional-equation checks.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{phi_transform, validate, StepSet};
use crate::poly::Tri;
use crate::pseries::PuiseuxSeries;
use crate::rational::{q, qi, Q};

/// Region in which walks are confined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `{i ≥ 0 or j ≥ 0}`.
    ThreeQuadrant,
    /// `{i ≥ 0 and j ≥ 0}`.
    Quadrant,
    /// `{i ≥ 0, j ≤ i}`.
    LowerWedge,
    Plane,
}

impl Domain {
    pub fn contains(self, i: i64, j: i64) -> bool {
        match self {
            Domain::ThreeQuadrant => i >= 0 || j >= 0,
            Domain::Quadrant => i >= 0 && j >= 0,
            Domain::LowerWedge => i >= 0 && j <= i,
            Domain::Plane => true,
        }
    }

    pub fn parse(s: &str) -> Result<Domain> {
        match s {
            "3q" | "three_quadrant" | "three-quadrant" => Ok(Domain::ThreeQuadrant),
            "q" | "quadrant" => Ok(Domain::Quadrant),
            "wedge" | "lower_wedge" | "lower-wedge" => Ok(Domain::LowerWedge),
            "plane" => Ok(Domain::Plane),
            _ => Err(Error::InvalidInput(format!("unknown domain {}", s))),
        }
    }
}

/// Walk counts `c_{i,j}(n)` for `n ≤ n_max`, one dense layer per length.
#[derive(Debug, Clone)]
pub struct CountTable {
    pub domain: Domain,
    pub start: (i64, i64),
    pub n_max: usize,
    radius: i64,
    layers: Vec<Vec<BigUint>>,
}

impl CountTable {
    fn index(&self, i: i64, j: i64) -> Option<usize> {
        let (a, b) = (i - self.start.0 + self.radius, j - self.start.1 + self.radius);
        let w = 2 * self.radius + 1;
        if a < 0 || b < 0 || a >= w || b >= w {
            None
        } else {
            Some((a * w + b) as usize)
        }
    }

    /// Number of `n`-step walks ending at `(i, j)`.
    pub fn count(&self, n: usize, i: i64, j: i64) -> BigUint {
        if n > self.n_max {
            return BigUint::zero();
        }
        self.index(i, j).map(|k| self.layers[n][k].clone()).unwrap_or_default()
    }

    /// Non-zero cells of layer `n` in lexicographic order.
    pub fn cells(&self, n: usize) -> Vec<((i64, i64), BigUint)> {
        let w = 2 * self.radius + 1;
        let mut out = Vec::new();
        if n > self.n_max {
            return out;
        }
        for (k, c) in self.layers[n].iter().enumerate() {
            if !c.is_zero() {
                let a = k as i64 / w;
                let b = k as i64 % w;
                out.push(((a - self.radius + self.start.0, b - self.radius + self.start.1), c.clone()));
            }
        }
        out
    }

    /// Total number of walks of length `n`.
    pub fn total(&self, n: usize) -> BigUint {
        self.layers[n].iter().sum()
    }

    /// `Σ_n c_{i,j}(n) tⁿ` as an exact series through `t^{n_max}`.
    pub fn point_series(&self, i: i64, j: i64) -> PuiseuxSeries {
        let terms: Vec<(Q, i64)> = (0..=self.n_max)
            .map(|n| (Q::from_integer(BigInt::from(self.count(n, i, j))), n as i64))
            .collect();
        PuiseuxSeries::from_terms(1, &terms, Some(self.n_max as i64 + 1))
    }
}

/// Counts walks confined to `domain` by forward dynamic programming.
pub fn count_walks(steps: &StepSet, domain: Domain, start: (i64, i64), n_max: usize) -> Result<CountTable> {
    if !domain.contains(start.0, start.1) {
        return Err(Error::StartOutsideDomain);
    }
    let reach = steps.steps().map(|(i, j)| i.abs().max(j.abs())).max().unwrap_or(1) as i64;
    let radius = reach * n_max as i64;
    let w = 2 * radius + 1;
    let mut layers: Vec<Vec<BigUint>> = Vec::with_capacity(n_max + 1);
    let mut first = vec![BigUint::zero(); (w * w) as usize];
    first[(radius * w + radius) as usize] = BigUint::from(1u32);
    layers.push(first);
    let jumps: Vec<(i64, i64)> = steps.steps().map(|(i, j)| (i as i64, j as i64)).collect();
    for n in 1..=n_max {
        let prev = &layers[n - 1];
        // Only cells within n·reach of the start can be reached.
        let live = reach * n as i64;
        let mut next = vec![BigUint::zero(); (w * w) as usize];
        next.par_chunks_mut(w as usize).enumerate().for_each(|(a, row)| {
            let a = a as i64;
            if (a - radius).abs() > live {
                return;
            }
            let i = a - radius + start.0;
            for (b, cell) in row.iter_mut().enumerate() {
                let b = b as i64;
                if (b - radius).abs() > live {
                    continue;
                }
                let j = b - radius + start.1;
                if !domain.contains(i, j) {
                    continue;
                }
                let mut acc = BigUint::zero();
                for &(di, dj) in &jumps {
                    let (pa, pb) = (a - di, b - dj);
                    if pa >= 0 && pb >= 0 && pa < w && pb < w {
                        let v = &prev[(pa * w + pb) as usize];
                        if !v.is_zero() {
                            acc += v;
                        }
                    }
                }
                *cell = acc;
            }
        });
        layers.push(next);
    }
    Ok(CountTable { domain, start, n_max, radius, layers })
}

/// Generating-function sections read off a count table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Section {
    /// Full generating function of the table.
    C,
    /// `{i ≥ 0, j ≤ i − 1}`.
    LHat,
    /// Diagonal `i = j`.
    DHat,
    /// `{j ≥ 0, i ≤ j − 1}`.
    UHat,
    /// Lower diagonal `j = i − 1`.
    DHatLower,
    /// Upper diagonal `i = j − 1`.
    DHatUpper,
    /// `i = 0, j < 0`.
    LHat0Minus,
    /// Quadrant generating function.
    Q,
    /// `j = 0` (quadrant table).
    QMinus0,
    /// `i = 0` (quadrant table).
    Q0Minus,
    /// The origin.
    Q00,
    /// `j = 0, i ≤ 0`.
    CMinus0,
    /// `i = 0, j ≤ 0`.
    C0Minus,
    /// The origin (three-quadrant table).
    C00,
}

impl Section {
    fn keeps(self, i: i64, j: i64) -> bool {
        match self {
            Section::C | Section::Q => true,
            Section::LHat => i >= 0 && j < i,
            Section::DHat => i == j,
            Section::UHat => j >= 0 && i < j,
            Section::DHatLower => j == i - 1,
            Section::DHatUpper => i == j - 1,
            Section::LHat0Minus => i == 0 && j < 0,
            Section::QMinus0 => j == 0,
            Section::Q0Minus => i == 0,
            Section::Q00 | Section::C00 => i == 0 && j == 0,
            Section::CMinus0 => j == 0 && i <= 0,
            Section::C0Minus => i == 0 && j <= 0,
        }
    }
}

/// Filters the table by the support of `which`; returns `Σ c tⁿ xⁱ yʲ`.
pub fn extract_section(table: &CountTable, which: Section) -> Tri {
    let mut out = Tri::zero(table.n_max as u32);
    for n in 0..=table.n_max {
        for ((i, j), c) in table.cells(n) {
            if which.keeps(i, j) {
                out.add_term(n as u32, i, j, Q::from_integer(BigInt::from(c)));
            }
        }
    }
    out
}

/// Evaluates a section numerically at `(x, y, t)`.
pub fn eval_section(p: &Tri, x: Complex64, y: Complex64, t: f64) -> Complex64 {
    p.iter()
        .map(|(&(n, i, j), c)| x.powi(i as i32) * y.powi(j as i32) * t.powi(n as i32) * crate::rational::to_f64(c))
        .sum()
}

/// Geometric bound on the tail `Σ_{n>N} |coefficient|·|monomial|` of a series
/// whose `n`-th layer has total mass at most `|S|ⁿ` and spans exponents up to
/// `ρ n` in modulus.
pub fn tail_bound(n_steps: usize, t: f64, n_max: usize, radius: f64, rho: f64) -> f64 {
    let r = n_steps as f64 * t * radius.max(1.0).powf(rho);
    if r >= 1.0 {
        return f64::INFINITY;
    }
    r.powi(n_max as i32 + 1) / (1.0 - r)
}

fn kernel_hat(steps: &StepSet, n: u32) -> Tri {
    let mut k = Tri::monomial(qi(-1), 0, 1, 1, n);
    for (i, j) in steps.steps() {
        k.add_term(1, i as i64 + 1, j as i64 + 1, qi(1));
    }
    k
}

/// `t x Σ_{(i,lead)} xⁱ` in `x` (axis 0) or `t y Σ_{(lead,j)} yʲ` in `y` (axis 1),
/// optionally shifted by `-x` (resp. `-y`) for the middle coefficient.
fn coeff_poly(steps: &StepSet, axis: usize, lead: i32, n: u32) -> Tri {
    let mut p = Tri::zero(n);
    for (i, j) in steps.steps() {
        if axis == 0 && j == lead {
            p.add_term(1, i as i64 + 1, 0, qi(1));
        }
        if axis == 1 && i == lead {
            p.add_term(1, 0, j as i64 + 1, qi(1));
        }
    }
    if lead == 0 {
        if axis == 0 {
            p.add_term(0, 1, 0, qi(-1));
        } else {
            p.add_term(0, 0, 1, qi(-1));
        }
    }
    p
}

/// Residual of the symmetric-model equation for `L̂` in the original coordinates.
pub fn lemma1_residual(steps: &StepSet, table: &CountTable, n: u32) -> Tri {
    let d = |i, j| qi(steps.delta(i, j));
    let l = extract_section(table, Section::LHat);
    let dh = extract_section(table, Section::DHat);
    let l0 = extract_section(table, Section::LHat0Minus);
    let d00: Tri = {
        let mut p = Tri::zero(n);
        for (&(m, i, j), c) in dh.iter() {
            if i == 0 && j == 0 {
                p.add_term(m, 0, 0, c.clone());
            }
        }
        p
    };
    let half = q(1, 2);
    let lhs = kernel_hat(steps, n).mul(&l);
    let mut rhs = Tri::monomial(-half.clone(), 0, 1, 1, n);
    let mut m1 = Tri::zero(n);
    m1.add_term(1, 0, 0, d(-1, -1));
    m1.add_term(1, 0, 1, d(-1, 0));
    rhs = rhs.add(&m1.mul(&l0));
    rhs = rhs.add(&Tri::monomial(&half * d(-1, -1), 1, 0, 0, n).mul(&d00));
    // -xy(-1/2 + t(½(δ11 xy + δ-1-1 /(xy)) + δ0-1 /y + δ10 x)) D̂
    let mut m2 = Tri::monomial(half.clone(), 0, 1, 1, n);
    m2.add_term(1, 2, 2, -(&half * d(1, 1)));
    m2.add_term(1, 0, 0, -(&half * d(-1, -1)));
    m2.add_term(1, 1, 0, -d(0, -1));
    m2.add_term(1, 2, 1, -d(1, 0));
    rhs = rhs.add(&m2.mul(&dh));
    lhs.sub(&rhs)
}

/// Residual of the equation for `L = L̂∘φ` written with the kernel of `φ(Ŝ)`.
///
/// The `D(0)` term carries the indicator of the jump `(-1,-1)` of `Ŝ`, as
/// it does before the change of variables.
pub fn octant_residual(steps: &StepSet, table: &CountTable, n: u32) -> Tri {
    let s = phi_transform(steps);
    // xⁱyʲ ↦ x^{i-j} y^i
    let m = [[1, -1], [1, 0]];
    let l = extract_section(table, Section::LHat).monomial_map(m);
    let dy = extract_section(table, Section::DHat).monomial_map(m);
    let lm0 = extract_section(table, Section::LHat0Minus).monomial_map(m);
    let d0 = extract_section(table, Section::C00);
    let half = q(1, 2);
    let k = kernel_hat(&s, n);
    let c = coeff_poly(&s, 0, -1, n);
    let at = coeff_poly(&s, 1, 1, n);
    let bt = coeff_poly(&s, 1, 0, n);
    let lhs = k.mul(&l);
    let x = Tri::monomial(qi(1), 0, 1, 0, n);
    let inner = x.mul(&at).add(&bt.scale(&half));
    let rhs = c
        .mul(&lm0)
        .sub(&x.mul(&inner).mul(&dy))
        .add(&Tri::monomial(&half * qi(steps.delta(-1, -1)), 1, 1, 0, n).mul(&d0))
        .add(&Tri::monomial(-half, 0, 1, 1, n));
    lhs.sub(&rhs)
}

/// Residual of the master equation over the three-quadrant cone.
///
/// The boundary sections run over `i < 0` and `j < 0` with the corner move
/// from the origin added back once.
pub fn three_quadrant_residual(steps: &StepSet, table: &CountTable, n: u32) -> Tri {
    let cfull = extract_section(table, Section::C);
    let mut cm0 = Tri::zero(n);
    let mut c0m = Tri::zero(n);
    for (&(m, i, j), v) in cfull.iter() {
        if j == 0 && i < 0 {
            cm0.add_term(m, i, 0, v.clone());
        }
        if i == 0 && j < 0 {
            c0m.add_term(m, 0, j, v.clone());
        }
    }
    let c00 = extract_section(table, Section::C00);
    let lhs = kernel_hat(steps, n).mul(&cfull);
    let rhs = coeff_poly(steps, 0, -1, n)
        .mul(&cm0)
        .add(&coeff_poly(steps, 1, -1, n).mul(&c0m))
        .add(&Tri::monomial(qi(steps.delta(-1, -1)), 1, 0, 0, n).mul(&c00))
        .add(&Tri::monomial(qi(-1), 0, 1, 1, n));
    lhs.sub(&rhs)
}

/// The master equation with the boundary sections taken over `i ≤ 0`, `j ≤ 0`
/// and the corner term subtracted, as it is usually displayed. It is kept to
/// show that this form does not vanish in general.
pub fn three_quadrant_residual_closed_boundary(steps: &StepSet, table: &CountTable, n: u32) -> Tri {
    let cm0 = extract_section(table, Section::CMinus0);
    let c0m = extract_section(table, Section::C0Minus);
    let c00 = extract_section(table, Section::C00);
    let lhs = kernel_hat(steps, n).mul(&extract_section(table, Section::C));
    let rhs = coeff_poly(steps, 0, -1, n)
        .mul(&cm0)
        .add(&coeff_poly(steps, 1, -1, n).mul(&c0m))
        .sub(&Tri::monomial(qi(steps.delta(-1, -1)), 1, 0, 0, n).mul(&c00))
        .add(&Tri::monomial(qi(-1), 0, 1, 1, n));
    lhs.sub(&rhs)
}

/// Residual of the quadrant equation; `table` must be a quadrant table.
pub fn quadrant_residual(steps: &StepSet, table: &CountTable, n: u32) -> Tri {
    let qf = extract_section(table, Section::Q);
    let qm0 = extract_section(table, Section::QMinus0);
    let q0m = extract_section(table, Section::Q0Minus);
    let q00 = extract_section(table, Section::Q00);
    let lhs = kernel_hat(steps, n).mul(&qf);
    let rhs = coeff_poly(steps, 0, -1, n)
        .mul(&qm0)
        .add(&coeff_poly(steps, 1, -1, n).mul(&q0m))
        .sub(&Tri::monomial(qi(steps.delta(-1, -1)), 1, 0, 0, n).mul(&q00))
        .add(&Tri::monomial(qi(-1), 0, 1, 1, n));
    lhs.sub(&rhs)
}

/// Largest residual coefficient of each functional equation through `t^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalEquationReport {
    pub order: u32,
    pub lemma1: String,
    pub octant: String,
    pub three_quadrant: String,
    pub quadrant: String,
}

impl FunctionalEquationReport {
    pub fn all_zero(&self) -> bool {
        [&self.lemma1, &self.octant, &self.three_quadrant, &self.quadrant].iter().all(|s| s.as_str() == "0")
    }
}

/// Substitutes enumerated sections into every functional equation.
pub fn check_functional_equation(steps: &StepSet, n: u32) -> Result<FunctionalEquationReport> {
    let v = validate(steps);
    if !v.satisfies_h {
        return Err(Error::HypothesisViolated(format!("{}", steps)));
    }
    if n == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    let t3 = count_walks(steps, Domain::ThreeQuadrant, (0, 0), n as usize)?;
    let tq = count_walks(steps, Domain::Quadrant, (0, 0), n as usize)?;
    Ok(FunctionalEquationReport {
        order: n,
        lemma1: lemma1_residual(steps, &t3, n).max_abs_coeff().to_string(),
        octant: octant_residual(steps, &t3, n).max_abs_coeff().to_string(),
        three_quadrant: three_quadrant_residual(steps, &t3, n).max_abs_coeff().to_string(),
        quadrant: quadrant_residual(steps, &tq, n).max_abs_coeff().to_string(),
    })
}

/// Cells of one layer as `[i, j, count]` with decimal-string counts.
pub fn layer_json(table: &CountTable, n: usize) -> serde_json::Value {
    let cells: Vec<serde_json::Value> = table
        .cells(n)
        .into_iter()
        .map(|((i, j), c)| serde_json::json!([i, j, c.to_string()]))
        .collect();
    serde_json::json!({ "n": n, "cells": cells })
}

/// Coefficients `c_{0,0}(n)` as machine numbers where they fit.
pub fn excursions(table: &CountTable) -> BTreeMap<usize, BigUint> {
    (0..=table.n_max).map(|n| (n, table.count(n, table.start.0, table.start.1))).collect()
}

/// Float value of a count, saturating at infinity.
pub fn count_f64(c: &BigUint) -> f64 {
    c.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::preset;

    #[test]
    fn reverse_kreweras_excursions() {
        let s = preset("reverse-kreweras").unwrap();
        let t = count_walks(&s, Domain::ThreeQuadrant, (0, 0), 9).unwrap();
        let v: Vec<u64> = (0..=9).step_by(3).map(|n| t.count(n, 0, 0).to_u64().unwrap()).collect();
        assert_eq!(v, vec![1, 4, 46, 706]);
    }

    #[test]
    fn start_outside() {
        let s = preset("simple").unwrap();
        assert_eq!(count_walks(&s, Domain::Quadrant, (-1, 0), 3).unwrap_err(), Error::StartOutsideDomain);
    }

    #[test]
    fn equations_vanish_for_simple_walk() {
        let r = check_functional_equation(&preset("simple").unwrap(), 6).unwrap();
        assert!(r.all_zero(), "{:?}", r);
    }
}
