//! Exact polynomials in `t` with Laurent-polynomial coefficients in `x, y`.
//!
//! Used to substitute enumerated sections into functional equations and
//! check that the residual vanishes identically up to a fixed `t`-order.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::Q;

/// `Σ c[n,i,j] tⁿ xⁱ yʲ`, truncated so that only `n ≤ max_n` is kept.
#[derive(Clone, PartialEq, Default)]
pub struct Tri {
    terms: BTreeMap<(u32, i64, i64), Q>,
    max_n: u32,
}

impl Tri {
    pub fn zero(max_n: u32) -> Self {
        Tri { terms: BTreeMap::new(), max_n }
    }

    /// The single term `c tⁿ xⁱ yʲ`.
    pub fn monomial(c: Q, n: u32, i: i64, j: i64, max_n: u32) -> Self {
        let mut p = Self::zero(max_n);
        p.add_term(n, i, j, c);
        p
    }

    pub fn max_n(&self) -> u32 {
        self.max_n
    }

    pub fn add_term(&mut self, n: u32, i: i64, j: i64, c: Q) {
        if n > self.max_n || c.is_zero() {
            return;
        }
        let e = self.terms.entry((n, i, j)).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(n, i, j));
        }
    }

    pub fn coeff(&self, n: u32, i: i64, j: i64) -> Q {
        self.terms.get(&(n, i, j)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, i64, i64), &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Tri) -> Tri {
        let mut r = Tri { terms: self.terms.clone(), max_n: self.max_n.min(o.max_n) };
        r.terms.retain(|k, _| k.0 <= r.max_n);
        for (&(n, i, j), c) in &o.terms {
            r.add_term(n, i, j, c.clone());
        }
        r
    }

    pub fn neg(&self) -> Tri {
        Tri { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(), max_n: self.max_n }
    }

    pub fn sub(&self, o: &Tri) -> Tri {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &Q) -> Tri {
        let mut r = Tri::zero(self.max_n);
        for (&(n, i, j), c) in &self.terms {
            r.add_term(n, i, j, c * s);
        }
        r
    }

    pub fn mul(&self, o: &Tri) -> Tri {
        let mut r = Tri::zero(self.max_n.min(o.max_n));
        for (&(n1, i1, j1), c1) in &self.terms {
            for (&(n2, i2, j2), c2) in &o.terms {
                if n1 + n2 <= r.max_n {
                    r.add_term(n1 + n2, i1 + i2, j1 + j2, c1 * c2);
                }
            }
        }
        r
    }

    /// Applies the monomial substitution `xⁱ yʲ ↦ x^(αi+βj) y^(γi+δj)`.
    pub fn monomial_map(&self, m: [[i64; 2]; 2]) -> Tri {
        let mut r = Tri::zero(self.max_n);
        for (&(n, i, j), c) in &self.terms {
            r.add_term(n, m[0][0] * i + m[0][1] * j, m[1][0] * i + m[1][1] * j, c.clone());
        }
        r
    }

    /// Largest absolute coefficient (zero for the zero polynomial).
    pub fn max_abs_coeff(&self) -> Q {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Q::zero)
    }
}

impl fmt::Debug for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|((n, i, j), c)| format!("{}*t^{}x^{}y^{}", c, n, i, j)).collect();
        write!(f, "Tri[≤{}]({})", self.max_n, parts.join(" + "))
    }
}
