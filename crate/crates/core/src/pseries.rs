//! Truncated Puiseux series in `t` with exact coefficients.
//!
//! A series stores its exponents as integers over a ramification `q`, so
//! the key `k` stands for `t^(k/q)`. The truncation is absolute and is kept
//! in the same units: every coefficient at or beyond it is unknown.
//! A truncation of `None` marks an exact (finite) expression.
//!
//! Coefficients are generic over [`Coeff`], which lets the same code run
//! on rationals and on Laurent polynomials in an auxiliary variable `z`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, q, Q};

/// Default relative order (in powers of `t`) used when an exact series
/// has to be expanded into an infinite one.
pub const DEFAULT_ORDER: i64 = 24;

/// Coefficient ring of a series.
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn c_add(&self, o: &Self) -> Self;
    fn c_sub(&self, o: &Self) -> Self;
    fn c_mul(&self, o: &Self) -> Self;
    fn c_neg(&self) -> Self;
    fn c_scale(&self, r: &Q) -> Self;
    /// Multiplicative inverse when the element is a unit.
    fn c_inv(&self) -> Option<Self>;
    /// A square root when one exists in the ring, normalised to be "positive".
    fn c_sqrt(&self) -> Option<Self>;
}

impl Coeff for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn c_add(&self, o: &Self) -> Self {
        self + o
    }
    fn c_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn c_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn c_neg(&self) -> Self {
        -self
    }
    fn c_scale(&self, r: &Q) -> Self {
        self * r
    }
    fn c_inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn c_sqrt(&self) -> Option<Self> {
        rational::sqrt_exact(self)
    }
}

/// Laurent polynomial in `z` with rational coefficients.
#[derive(Clone, PartialEq, Default)]
pub struct LaurentZ {
    pub terms: BTreeMap<i64, Q>,
}

impl LaurentZ {
    pub fn monomial(c: Q, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !Zero::is_zero(&c) {
            terms.insert(k, c);
        }
        LaurentZ { terms }
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(c, 0)
    }

    /// Coefficient of `z^k`.
    pub fn coeff(&self, k: i64) -> Q {
        self.terms.get(&k).cloned().unwrap_or_else(Zero::zero)
    }

    fn insert_add(map: &mut BTreeMap<i64, Q>, k: i64, c: Q) {
        let e = map.entry(k).or_insert_with(Zero::zero);
        *e += c;
        if Zero::is_zero(e) {
            map.remove(&k);
        }
    }
}

impl fmt::Debug for LaurentZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(k, c)| format!("({})z^{}", c, k)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Coeff for LaurentZ {
    fn zero() -> Self {
        LaurentZ::default()
    }
    fn one() -> Self {
        LaurentZ::constant(One::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn c_add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, c) in &o.terms {
            LaurentZ::insert_add(&mut terms, *k, c.clone());
        }
        LaurentZ { terms }
    }
    fn c_sub(&self, o: &Self) -> Self {
        self.c_add(&o.c_neg())
    }
    fn c_mul(&self, o: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                LaurentZ::insert_add(&mut terms, ka + kb, ca * cb);
            }
        }
        LaurentZ { terms }
    }
    fn c_neg(&self) -> Self {
        LaurentZ { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }
    fn c_scale(&self, r: &Q) -> Self {
        if Zero::is_zero(r) {
            return LaurentZ::default();
        }
        LaurentZ { terms: self.terms.iter().map(|(k, c)| (*k, c * r)).collect() }
    }
    fn c_inv(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next()?;
        Some(LaurentZ::monomial(c.recip(), -k))
    }
    fn c_sqrt(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next()?;
        if k % 2 != 0 {
            return None;
        }
        Some(LaurentZ::monomial(rational::sqrt_exact(c)?, k / 2))
    }
}

/// A truncated Puiseux series `Σ c_k t^(k/ram) + O(t^(trunc/ram))`.
#[derive(Clone)]
pub struct PuiseuxSeries<C: Coeff = Q> {
    ram: u32,
    terms: BTreeMap<i64, C>,
    trunc: Option<i64>,
}

/// Which root of a quadratic to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl<C: Coeff> PuiseuxSeries<C> {
    /// Builds a series from raw parts, dropping zeros and terms past the truncation.
    pub fn from_parts(ram: u32, terms: BTreeMap<i64, C>, trunc: Option<i64>) -> Self {
        assert!(ram > 0, "ramification must be positive");
        let terms = terms
            .into_iter()
            .filter(|(k, c)| !c.is_zero() && trunc.is_none_or(|t| *k < t))
            .collect();
        PuiseuxSeries { ram, terms, trunc }
    }

    /// The exact zero series.
    pub fn zero() -> Self {
        PuiseuxSeries { ram: 1, terms: BTreeMap::new(), trunc: None }
    }

    /// The exact constant one.
    pub fn one() -> Self {
        Self::constant(C::one())
    }

    /// The exact constant `c`.
    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0, 1)
    }

    /// The exact monomial `c t^(num/den)`.
    pub fn monomial(c: C, num: i64, den: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(num, c);
        Self::from_parts(den, terms, None)
    }

    /// `O(t^(num/den))`: the zero series known only below the given order.
    pub fn big_o(num: i64, den: u32) -> Self {
        Self::from_parts(den, BTreeMap::new(), Some(num))
    }

    pub fn ram(&self) -> u32 {
        self.ram
    }

    /// Truncation in internal units, `None` for exact series.
    pub fn trunc_units(&self) -> Option<i64> {
        self.trunc
    }

    /// Truncation order as a rational exponent of `t`.
    pub fn trunc_exponent(&self) -> Option<Ratio<i64>> {
        self.trunc.map(|k| Ratio::new(k, self.ram as i64))
    }

    /// Smallest stored key, if any.
    pub fn valuation_units(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// Exponent of the leading term.
    pub fn valuation(&self) -> Option<Ratio<i64>> {
        self.valuation_units().map(|k| Ratio::new(k, self.ram as i64))
    }

    /// Valuation used for precision bookkeeping: the leading key, or the
    /// truncation when no term is known.
    fn val_or_trunc(&self) -> Option<i64> {
        self.valuation_units().or(self.trunc)
    }

    /// True when no coefficient is known to be nonzero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the series is exactly zero (no truncation).
    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.trunc.is_none()
    }

    /// Coefficient of `t^(num/den)` (zero if absent or not representable).
    pub fn coeff(&self, num: i64, den: u32) -> C {
        let r = Ratio::new(num, den as i64) * Ratio::from_integer(self.ram as i64);
        if !r.is_integer() {
            return C::zero();
        }
        self.terms.get(&r.to_integer()).cloned().unwrap_or_else(C::zero)
    }

    /// Iterates over `(exponent, coefficient)` pairs in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (Ratio<i64>, &C)> + '_ {
        let r = self.ram as i64;
        self.terms.iter().map(move |(k, c)| (Ratio::new(*k, r), c))
    }

    /// Raw `(key, coefficient)` pairs in internal units.
    pub fn raw_terms(&self) -> &BTreeMap<i64, C> {
        &self.terms
    }

    /// Re-expresses the series over a multiple of its ramification.
    pub fn with_ram(&self, ram: u32) -> Self {
        assert!(ram.is_multiple_of(self.ram), "target ramification must be a multiple");
        let f = (ram / self.ram) as i64;
        PuiseuxSeries {
            ram,
            terms: self.terms.iter().map(|(k, c)| (k * f, c.clone())).collect(),
            trunc: self.trunc.map(|t| t * f),
        }
    }

    /// Smallest ramification able to represent the series.
    pub fn reduced(&self) -> Self {
        let mut g = self.ram as i64;
        for k in self.terms.keys() {
            g = g.gcd(k);
        }
        if let Some(t) = self.trunc {
            g = g.gcd(&t);
        }
        let g = g.max(1);
        PuiseuxSeries {
            ram: (self.ram as i64 / g) as u32,
            terms: self.terms.iter().map(|(k, c)| (k / g, c.clone())).collect(),
            trunc: self.trunc.map(|t| t / g),
        }
    }

    fn aligned(a: &Self, b: &Self) -> (Self, Self) {
        let l = (a.ram as u64).lcm(&(b.ram as u64)) as u32;
        (a.with_ram(l), b.with_ram(l))
    }

    /// Drops everything at or beyond `t^(num/den)`.
    pub fn truncated(&self, num: i64, den: u32) -> Self {
        let l = (self.ram as u64).lcm(&(den as u64)) as u32;
        let s = self.with_ram(l);
        let cut = num * (l / den) as i64;
        PuiseuxSeries::from_parts(l, s.terms, min_opt(s.trunc, Some(cut)))
    }

    /// Applies a coefficient map, keeping exponents and truncation.
    pub fn map_coeffs<D: Coeff, F: Fn(&C) -> D>(&self, f: F) -> PuiseuxSeries<D> {
        PuiseuxSeries::from_parts(self.ram, self.terms.iter().map(|(k, c)| (*k, f(c))).collect(), self.trunc)
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = Self::aligned(self, o);
        let trunc = min_opt(a.trunc, b.trunc);
        let mut terms = a.terms;
        for (k, c) in b.terms {
            match terms.get_mut(&k) {
                Some(e) => *e = e.c_add(&c),
                None => {
                    terms.insert(k, c);
                }
            }
        }
        PuiseuxSeries::from_parts(a.ram, terms, trunc)
    }

    pub fn neg(&self) -> Self {
        PuiseuxSeries { ram: self.ram, terms: self.terms.iter().map(|(k, c)| (*k, c.c_neg())).collect(), trunc: self.trunc }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Multiplies every coefficient by a rational.
    pub fn scale(&self, r: &Q) -> Self {
        PuiseuxSeries::from_parts(self.ram, self.terms.iter().map(|(k, c)| (*k, c.c_scale(r))).collect(), self.trunc)
    }

    /// Multiplies every coefficient by a ring element.
    pub fn scale_by(&self, r: &C) -> Self {
        PuiseuxSeries::from_parts(self.ram, self.terms.iter().map(|(k, c)| (*k, c.c_mul(r))).collect(), self.trunc)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_exact_zero() || o.is_exact_zero() {
            return Self::zero();
        }
        let (a, b) = Self::aligned(self, o);
        let va = a.val_or_trunc();
        let vb = b.val_or_trunc();
        let t1 = match (va, b.trunc) {
            (Some(v), Some(t)) => Some(v + t),
            _ => None,
        };
        let t2 = match (vb, a.trunc) {
            (Some(v), Some(t)) => Some(v + t),
            _ => None,
        };
        let trunc = min_opt(t1, t2);
        let mut terms: BTreeMap<i64, C> = BTreeMap::new();
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                let k = ka + kb;
                if trunc.is_some_and(|t| k >= t) {
                    // Terms are sorted, so later kb only grow.
                    break;
                }
                let p = ca.c_mul(cb);
                match terms.get_mut(&k) {
                    Some(e) => *e = e.c_add(&p),
                    None => {
                        terms.insert(k, p);
                    }
                }
            }
        }
        PuiseuxSeries::from_parts(a.ram, terms, trunc)
    }

    /// Leading key, leading coefficient and the dense normalised tail
    /// `u_j = a_{v+j} / a_v` for `j < n`.
    fn normalised(&self, n: i64) -> Result<(i64, C, Vec<C>)> {
        let v = self.valuation_units().ok_or(Error::DivisionByZeroSeries)?;
        let lead = self.terms[&v].clone();
        let inv = lead.c_inv().ok_or(Error::DivisionByZeroSeries)?;
        let mut u = vec![C::zero(); n.max(0) as usize];
        for (k, c) in self.terms.range(v..v + n) {
            u[(k - v) as usize] = c.c_mul(&inv);
        }
        Ok((v, lead, u))
    }

    /// Multiplicative inverse. An exact input is expanded to relative order [`DEFAULT_ORDER`].
    pub fn inv(&self) -> Result<Self> {
        let v = self.valuation_units().ok_or(Error::DivisionByZeroSeries)?;
        let rel = match self.trunc {
            Some(t) => t - v,
            None => {
                if self.terms.len() == 1 {
                    let c = self.terms[&v].c_inv().ok_or(Error::DivisionByZeroSeries)?;
                    return Ok(Self::from_parts(self.ram, BTreeMap::from([(-v, c)]), None));
                }
                DEFAULT_ORDER * self.ram as i64
            }
        };
        let (v, lead, u) = self.normalised(rel)?;
        let lead_inv = lead.c_inv().ok_or(Error::DivisionByZeroSeries)?;
        let n = rel.max(0) as usize;
        let mut c: Vec<C> = Vec::with_capacity(n);
        for m in 0..n {
            if m == 0 {
                c.push(C::one());
                continue;
            }
            let mut s = C::zero();
            for j in 1..=m {
                if !u[j].is_zero() && !c[m - j].is_zero() {
                    s = s.c_add(&u[j].c_mul(&c[m - j]));
                }
            }
            c.push(s.c_neg());
        }
        let terms = c.into_iter().enumerate().map(|(m, x)| (m as i64 - v, x.c_mul(&lead_inv))).collect();
        Ok(Self::from_parts(self.ram, terms, Some(rel - v)))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    /// Square root with the leading coefficient's ring square root.
    /// Odd valuations double the ramification.
    pub fn sqrt(&self) -> Result<Self> {
        if self.is_exact_zero() {
            return Ok(Self::zero());
        }
        let mut a = self.clone();
        let v0 = match a.valuation_units() {
            Some(v) => v,
            None => {
                // O(t^T): the root is O(t^(T/2)).
                let t = a.trunc.expect("non-exact");
                return Ok(Self::from_parts(a.ram * 2, BTreeMap::new(), Some(t)));
            }
        };
        if v0 % 2 != 0 {
            a = a.with_ram(a.ram * 2);
        }
        let v = a.valuation_units().unwrap();
        let rel = match a.trunc {
            Some(t) => t - v,
            None => {
                if a.terms.len() == 1 {
                    let c = a.terms[&v].c_sqrt().ok_or_else(|| Error::NonSquareLeading(format!("{:?}", a.terms[&v])))?;
                    return Ok(Self::from_parts(a.ram, BTreeMap::from([(v / 2, c)]), None));
                }
                DEFAULT_ORDER * a.ram as i64
            }
        };
        let (v, lead, u) = a.normalised(rel)?;
        let s0 = lead.c_sqrt().ok_or_else(|| Error::NonSquareLeading(format!("{:?}", lead)))?;
        let half = q(1, 2);
        let n = rel.max(0) as usize;
        let mut e: Vec<C> = Vec::with_capacity(n);
        for m in 0..n {
            if m == 0 {
                e.push(C::one());
                continue;
            }
            let mut s = u[m].clone();
            for j in 1..m {
                if !e[j].is_zero() && !e[m - j].is_zero() {
                    s = s.c_sub(&e[j].c_mul(&e[m - j]));
                }
            }
            e.push(s.c_scale(&half));
        }
        let terms = e.into_iter().enumerate().map(|(m, x)| (v / 2 + m as i64, x.c_mul(&s0))).collect();
        Ok(Self::from_parts(a.ram, terms, Some(v / 2 + rel)))
    }

    /// Integer power; negative exponents go through [`inv`](Self::inv).
    pub fn powi(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.inv()?.powi(-n);
        }
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    /// Highest internal key bound that the series needs to be exact below
    /// `t^(num/den)`; `true` when the series is known there.
    pub fn known_through(&self, num: i64, den: u32) -> bool {
        match self.trunc {
            None => true,
            Some(t) => Ratio::new(t, self.ram as i64) >= Ratio::new(num, den as i64),
        }
    }
}

impl<C: Coeff> PartialEq for PuiseuxSeries<C> {
    fn eq(&self, o: &Self) -> bool {
        let (a, b) = Self::aligned(self, o);
        a.trunc == b.trunc && a.terms == b.terms
    }
}

impl<C: Coeff> fmt::Debug for PuiseuxSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PuiseuxSeries(ram={}, trunc={:?}, terms=[", self.ram, self.trunc)?;
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {:?}", k, c)?;
        }
        write!(f, "])")
    }
}

macro_rules! forward_op {
    ($tr:ident, $m:ident) => {
        impl<'a, C: Coeff> $tr<&'a PuiseuxSeries<C>> for &'a PuiseuxSeries<C> {
            type Output = PuiseuxSeries<C>;
            fn $m(self, o: &'a PuiseuxSeries<C>) -> PuiseuxSeries<C> {
                PuiseuxSeries::$m(self, o)
            }
        }
    };
}
forward_op!(Add, add);
forward_op!(Sub, sub);
forward_op!(Mul, mul);

impl<C: Coeff> Neg for &PuiseuxSeries<C> {
    type Output = PuiseuxSeries<C>;
    fn neg(self) -> PuiseuxSeries<C> {
        PuiseuxSeries::neg(self)
    }
}


/// Rational series helpers.
impl PuiseuxSeries<Q> {
    /// The exact series `t`.
    pub fn t() -> Self {
        Self::monomial(<Q as One>::one(), 1, 1)
    }

    /// Exact rational constant.
    pub fn rat(n: i64, d: i64) -> Self {
        Self::constant(q(n, d))
    }

    /// Builds a series from `(coefficient, exponent numerator)` pairs over `ram`.
    pub fn from_terms(ram: u32, terms: &[(Q, i64)], trunc: Option<i64>) -> Self {
        let mut map = BTreeMap::new();
        for (c, k) in terms {
            let e: &mut Q = map.entry(*k).or_insert_with(<Q as Zero>::zero);
            *e += c;
        }
        Self::from_parts(ram, map, trunc)
    }

    /// Numerical value at a positive real `t` (the truncated tail is ignored).
    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| rational::to_f64(c) * t.powf(*k as f64 / self.ram as f64))
            .sum()
    }

    /// Substitutes `inner` for `t`. Requires integer exponents and, when the
    /// series is not exact, an inner series of positive valuation.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let s = self.reduced();
        if s.ram != 1 {
            return Err(Error::Unsupported("composition needs integer exponents".into()));
        }
        let vin = inner.valuation().ok_or(Error::DivisionByZeroSeries)?;
        let mut acc = Self::zero();
        let mut pos = Self::one();
        let mut pos_k = 0i64;
        let mut neg: Option<Self> = None;
        let mut neg_k = 0i64;
        let inv = if s.terms.keys().any(|k| *k < 0) { Some(inner.inv()?) } else { None };
        for (k, c) in &s.terms {
            let p = if *k >= 0 {
                while pos_k < *k {
                    pos = pos.mul(inner);
                    pos_k += 1;
                }
                pos.clone()
            } else {
                let iv = inv.as_ref().unwrap();
                if neg.is_none() {
                    neg = Some(iv.powi(-k)?);
                    neg_k = -k;
                }
                while neg_k > -k {
                    // Walk towards zero: divide by one power.
                    neg = Some(neg.unwrap().mul(inner));
                    neg_k -= 1;
                }
                neg.clone().unwrap()
            };
            acc = acc.add(&p.scale(c));
        }
        if let Some(t) = s.trunc {
            if vin <= <Ratio<i64> as Zero>::zero() {
                return Err(Error::Unsupported("composition with a non-small inner series".into()));
            }
            let cut = vin * Ratio::from_integer(t);
            acc = acc.truncated(*cut.numer(), *cut.denom() as u32);
        }
        Ok(acc)
    }

    /// `[numerator, denominator, exponent numerator, ramification]` quadruples.
    pub fn to_quadruples(&self) -> Vec<(String, String, i64, u32)> {
        let r = self.reduced();
        r.terms
            .iter()
            .map(|(k, c)| {
                let (n, d) = rational::to_strings(c);
                (n, d, *k, r.ram)
            })
            .collect()
    }

    /// Inverse of [`to_quadruples`](Self::to_quadruples).
    pub fn from_quadruples(quads: &[(String, String, i64, u32)], trunc: Option<(i64, u32)>) -> Result<Self> {
        let mut acc = match trunc {
            Some((k, r)) => Self::big_o(k, r),
            None => Self::zero(),
        };
        for (n, d, k, r) in quads {
            let c = rational::parse(&format!("{}/{}", n, d)).ok_or_else(|| Error::InvalidInput(format!("{}/{}", n, d)))?;
            acc = acc.add(&Self::monomial(c, *k, *r));
        }
        Ok(acc)
    }

    /// Serialisable form.
    pub fn to_serial(&self) -> SeriesSerial {
        let r = self.reduced();
        SeriesSerial { terms: r.to_quadruples(), trunc: r.trunc.map(|t| (t, r.ram)) }
    }
}

/// JSON shape of a rational series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSerial {
    pub terms: Vec<(String, String, i64, u32)>,
    pub trunc: Option<(i64, u32)>,
}

impl SeriesSerial {
    pub fn to_series(&self) -> Result<PuiseuxSeries<Q>> {
        PuiseuxSeries::from_quadruples(&self.terms, self.trunc)
    }
}

fn superscript(n: i64) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let mut s = String::new();
    if n < 0 {
        s.push('⁻');
    }
    for ch in n.abs().to_string().chars() {
        s.push(DIGITS[ch.to_digit(10).unwrap() as usize]);
    }
    s
}

fn power_of_t(e: Ratio<i64>) -> String {
    if e.is_zero() {
        String::new()
    } else if e.is_integer() {
        if e == <Ratio<i64> as One>::one() {
            "t".to_string()
        } else {
            format!("t{}", superscript(e.to_integer()))
        }
    } else {
        format!("t^({}/{})", e.numer(), e.denom())
    }
}

impl fmt::Display for PuiseuxSeries<Q> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.reduced();
        let mut first = true;
        for (e, c) in r.iter() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let p = power_of_t(e);
            if p.is_empty() {
                write!(f, "{}", a)?;
            } else if a.is_one() {
                write!(f, "{}", p)?;
            } else if a.is_integer() {
                write!(f, "{}{}", a, p)?;
            } else {
                write!(f, "({}){}", a, p)?;
            }
        }
        if let Some(t) = r.trunc_exponent() {
            if !first {
                write!(f, " + ")?;
            }
            let p = power_of_t(t);
            write!(f, "O({})", if p.is_empty() { "1".to_string() } else { p })?;
        } else if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Iterates `s <- f(s)` (truncated at `t^(num/den)`) until it stabilises.
pub fn solve_fixed_point<F>(f: F, seed: PuiseuxSeries<Q>, num: i64, den: u32) -> Result<PuiseuxSeries<Q>>
where
    F: Fn(&PuiseuxSeries<Q>) -> Result<PuiseuxSeries<Q>>,
{
    let mut s = seed.truncated(num, den);
    // Ramified solutions gain a fraction of a power of t per round.
    let max_rounds = 4 * (num.max(1) as usize) * den as usize + 16;
    for _ in 0..max_rounds {
        let next = f(&s)?.truncated(num, den);
        if next == s {
            return Ok(next);
        }
        s = next;
    }
    Err(Error::NoConvergence(max_rounds))
}

/// Root of `a s^2 + b s + c = 0` with the chosen sign of the square root,
/// checked by substitution.
pub fn solve_quadratic_root(
    a: &PuiseuxSeries<Q>,
    b: &PuiseuxSeries<Q>,
    c: &PuiseuxSeries<Q>,
    branch: Branch,
) -> Result<PuiseuxSeries<Q>> {
    let disc = b.mul(b).sub(&a.mul(c).scale(&q(4, 1)));
    let sq = disc.sqrt()?;
    let sq = match branch {
        Branch::Plus => sq,
        Branch::Minus => sq.neg(),
    };
    let root = b.neg().add(&sq).div(&a.scale(&q(2, 1)))?;
    let residual = a.mul(&root).mul(&root).add(&b.mul(&root)).add(c);
    if !residual.is_zero() {
        return Err(Error::TruncationInsufficient(format!("quadratic residual {}", residual)));
    }
    Ok(root)
}

/// `(1/2πi)∮ f dz` over the unit circle for a series with Laurent
/// polynomial coefficients: the coefficient of `z^{-1}`.
pub fn residue_on_unit_circle(f: &PuiseuxSeries<LaurentZ>) -> PuiseuxSeries<Q> {
    f.map_coeffs(|c| c.coeff(-1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    type S = PuiseuxSeries<Q>;

    fn t() -> S {
        S::t()
    }

    #[test]
    fn product_and_geometric() {
        let one = S::one();
        let a = one.add(&t());
        let b = one.sub(&t());
        assert_eq!(a.mul(&b), one.sub(&t().mul(&t())));
        let g = b.truncated(10, 1).inv().unwrap();
        for k in 0..10 {
            assert_eq!(g.coeff(k, 1), qi(1));
        }
        assert_eq!(g.trunc_exponent(), Some(Ratio::from_integer(10)));
    }

    #[test]
    fn ramified_product() {
        let h = S::monomial(qi(1), 1, 2);
        assert_eq!(h.mul(&h), t());
    }

    #[test]
    fn sqrt_binomial() {
        let s = S::one().sub(&t().scale(&qi(4))).truncated(8, 1).sqrt().unwrap();
        // 1 - 2t - 2t^2 - 4t^3 - 10t^4 - 28t^5
        let expect = [1, -2, -2, -4, -10, -28, -84, -264];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(s.coeff(k as i64, 1), qi(*e));
        }
    }

    #[test]
    fn sqrt_odd_valuation_ramifies() {
        let s = t().mul(&S::one().add(&t())).truncated(6, 1).sqrt().unwrap();
        assert_eq!(s.coeff(1, 2), qi(1));
        assert_eq!(s.coeff(3, 2), q(1, 2));
        assert_eq!(s.mul(&s), t().mul(&S::one().add(&t())).truncated(6, 1));
    }

    #[test]
    fn sqrt_negative_leading_fails() {
        let e = S::rat(-1, 1).add(&t()).sqrt();
        assert!(matches!(e, Err(Error::NonSquareLeading(_))));
    }

    #[test]
    fn display() {
        let w = S::from_terms(1, &[(qi(2), 1), (qi(8), 4), (qi(96), 7)], Some(11));
        assert_eq!(w.to_string(), "2t + 8t⁴ + 96t⁷ + O(t¹¹)");
        let x = S::from_terms(2, &[(qi(1), 2), (qi(-2), 5), (q(-1287, 4), 17)], Some(20));
        assert_eq!(x.to_string(), "t - 2t^(5/2) - (1287/4)t^(17/2) + O(t¹⁰)");
    }

    #[test]
    fn fixed_point_trivial() {
        let s = solve_fixed_point(|_| Ok(S::t()), S::zero(), 5, 1).unwrap();
        assert_eq!(s, S::t().truncated(5, 1));
    }

    #[test]
    fn quadratic_trivial() {
        // y^2 - 2t y = 0
        let a = S::one();
        let b = t().scale(&qi(-2));
        let c = S::zero().truncated(10, 1);
        let r1 = solve_quadratic_root(&a, &b, &c, Branch::Plus).unwrap();
        let r2 = solve_quadratic_root(&a, &b, &c, Branch::Minus).unwrap();
        assert_eq!(r1.truncated(5, 1), t().scale(&qi(2)).truncated(5, 1));
        assert!(r2.truncated(5, 1).is_zero());
    }

    #[test]
    fn residues() {
        let f = S::one().map_coeffs(|_| LaurentZ::monomial(qi(1), -1));
        assert_eq!(residue_on_unit_circle(&f), S::one());
        let mut g = LaurentZ::monomial(qi(1), 1);
        g = g.c_add(&LaurentZ::monomial(qi(1), 2));
        let f2 = S::one().map_coeffs(|_| g.clone());
        assert!(residue_on_unit_circle(&f2).is_zero());
    }

    #[test]
    fn composition() {
        // 1/(1-u) at u = 2t -> 1 + 2t + 4t^2 ...
        let geo = S::one().sub(&t()).truncated(6, 1).inv().unwrap();
        let c = geo.compose(&t().scale(&qi(2))).unwrap();
        assert_eq!(c.coeff(3, 1), qi(8));
        assert_eq!(c.trunc_exponent(), Some(Ratio::from_integer(6)));
    }

    #[test]
    fn quadruple_round_trip() {
        let x = S::from_terms(2, &[(qi(1), 2), (q(-1287, 4), 17)], Some(20));
        let s = x.to_serial();
        assert_eq!(s.to_series().unwrap(), x);
    }
}
