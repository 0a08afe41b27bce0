//! Step sets, hypothesis (H), the change of variables `φ` and the group of the walk.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q, Q};

/// A jump `(di, dj)`.
pub type Step = (i32, i32);

/// The eight compass directions by name.
pub fn direction(name: &str) -> Option<Step> {
    Some(match name.to_ascii_uppercase().as_str() {
        "N" => (0, 1),
        "S" => (0, -1),
        "E" => (1, 0),
        "W" => (-1, 0),
        "NE" => (1, 1),
        "NW" => (-1, 1),
        "SE" => (1, -1),
        "SW" => (-1, -1),
        _ => return None,
    })
}

/// Compass name of a small step.
pub fn direction_name(s: Step) -> Option<&'static str> {
    Some(match s {
        (0, 1) => "N",
        (0, -1) => "S",
        (1, 0) => "E",
        (-1, 0) => "W",
        (1, 1) => "NE",
        (-1, 1) => "NW",
        (1, -1) => "SE",
        (-1, -1) => "SW",
        _ => return None,
    })
}

/// A finite set of jumps, kept in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSet {
    steps: BTreeSet<Step>,
    #[serde(default)]
    pub name: Option<String>,
}

impl StepSet {
    /// Builds a step set; rejects the empty set and the zero jump.
    pub fn new<I: IntoIterator<Item = Step>>(steps: I) -> Result<Self> {
        let steps: BTreeSet<Step> = steps.into_iter().collect();
        if steps.is_empty() {
            return Err(Error::InvalidInput("empty step set".into()));
        }
        if steps.contains(&(0, 0)) {
            return Err(Error::InvalidInput("the zero step is not allowed".into()));
        }
        Ok(StepSet { steps, name: None })
    }

    /// Builds a step set from compass names such as `["N", "SW"]`.
    pub fn from_names(names: &[&str]) -> Result<Self> {
        let mut v = Vec::new();
        for n in names {
            v.push(direction(n).ok_or_else(|| Error::InvalidInput(format!("unknown direction {}", n)))?);
        }
        Self::new(v)
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn steps(&self) -> impl Iterator<Item = Step> + '_ {
        self.steps.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn contains(&self, s: Step) -> bool {
        self.steps.contains(&s)
    }

    /// Indicator `δ_{i,j}`.
    pub fn delta(&self, i: i32, j: i32) -> i64 {
        self.contains((i, j)) as i64
    }

    /// True when every jump lies in `{-1,0,1}^2`.
    pub fn is_small(&self) -> bool {
        self.steps.iter().all(|&(i, j)| i.abs() <= 1 && j.abs() <= 1)
    }

    /// Swaps the coordinates of every jump.
    pub fn mirror(&self) -> StepSet {
        StepSet { steps: self.steps.iter().map(|&(i, j)| (j, i)).collect(), name: None }
    }

    /// Model file JSON: `{"name": ..., "steps": [[di,dj],...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "steps": self.steps.iter().map(|&(i, j)| vec![i, j]).collect::<Vec<_>>(),
        })
    }

    /// Parses the model file format.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arr = v
            .get("steps")
            .and_then(|s| s.as_array())
            .ok_or_else(|| Error::InvalidInput("missing \"steps\" array".into()))?;
        let mut steps = Vec::new();
        for s in arr {
            let pair = s.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::InvalidInput(format!("bad step {}", s)))?;
            let di = pair[0].as_i64().ok_or_else(|| Error::InvalidInput(format!("bad step {}", s)))?;
            let dj = pair[1].as_i64().ok_or_else(|| Error::InvalidInput(format!("bad step {}", s)))?;
            steps.push((di as i32, dj as i32));
        }
        let mut set = Self::new(steps)?;
        set.name = v.get("name").and_then(|n| n.as_str()).map(|s| s.to_string());
        Ok(set)
    }
}

impl fmt::Display for StepSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|&s| direction_name(s).map(|n| n.to_string()).unwrap_or_else(|| format!("({},{})", s.0, s.1)))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Named models: the symmetric models with no anti-diagonal jump and a few
/// classical ones. Step sets are given in the original (hatted) coordinates.
pub const PRESETS: &[(&str, &[&str])] = &[
    ("simple", &["N", "S", "E", "W"]),
    ("kreweras", &["S", "W", "NE"]),
    ("reverse-kreweras", &["E", "N", "SW"]),
    ("double-kreweras", &["E", "NE", "N", "W", "SW", "S"]),
    ("e-ne-n-sw", &["E", "NE", "N", "SW"]),
    ("ne-w-sw-s", &["NE", "W", "SW", "S"]),
    ("e-n-w-sw-s", &["E", "N", "W", "SW", "S"]),
    ("e-ne-n-w-s", &["E", "NE", "N", "W", "S"]),
    ("diagonal", &["NE", "NW", "SE", "SW"]),
    ("gouyou-beauchamps", &["E", "W", "SE", "NW"]),
    ("gessel", &["NE", "W", "E", "SW"]),
];

/// The eight symmetric models without anti-diagonal jumps: four with a
/// finite group followed by four with an infinite group.
pub const SYMMETRIC_MODELS: [&str; 8] = [
    "simple",
    "kreweras",
    "reverse-kreweras",
    "double-kreweras",
    "e-ne-n-sw",
    "ne-w-sw-s",
    "e-n-w-sw-s",
    "e-ne-n-w-s",
];

/// Looks up a preset by name (`union-kreweras` is accepted for `double-kreweras`).
pub fn preset(name: &str) -> Result<StepSet> {
    let key = if name == "union-kreweras" { "double-kreweras" } else { name };
    PRESETS
        .iter()
        .find(|(n, _)| *n == key)
        .ok_or_else(|| Error::InvalidInput(format!("unknown model {}", name)))
        .and_then(|(n, dirs)| Ok(StepSet::from_names(dirs)?.with_name(n)))
}

/// Result of checking hypothesis (H).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelValidation {
    pub symmetric: bool,
    pub has_antidiagonal: bool,
    pub satisfies_h: bool,
}

/// Symmetry in the diagonal and absence of `(-1,1)`, `(1,-1)`.
pub fn validate(steps: &StepSet) -> ModelValidation {
    let symmetric = steps.steps().all(|(i, j)| steps.contains((j, i)));
    let has_antidiagonal = steps.contains((-1, 1)) || steps.contains((1, -1));
    ModelValidation { symmetric, has_antidiagonal, satisfies_h: symmetric && !has_antidiagonal }
}

/// `φ(Ŝ) = {(i - j, i)}`.
pub fn phi_transform(steps: &StepSet) -> StepSet {
    StepSet { steps: steps.steps().map(|(i, j)| (i - j, i)).collect(), name: None }
}

/// Order of the group `<Φ, Ψ>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupOrder {
    Finite(u32),
    /// The orbit did not close within the given number of applications.
    Infinite(u32),
}

impl fmt::Display for GroupOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupOrder::Finite(n) => write!(f, "{}", n),
            GroupOrder::Infinite(b) => write!(f, "Infinite({})", b),
        }
    }
}

/// Default cap on the number of applications of Φ and Ψ.
pub const DEFAULT_MAX_ITER: u32 = 400;

/// Number of applications carried out in exact rational arithmetic.
const EXACT_LIMIT: u32 = 32;

const PRIMES: [u64; 3] = [2305843009213693951, 2305843009213693921, 2305843009213693907];

/// Minimal field interface for the orbit iteration.
trait Field: Clone + PartialEq {
    fn from_i64(&self, v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn inv(&self) -> Option<Self>;
}

impl Field for Q {
    fn from_i64(&self, v: i64) -> Self {
        q(v, 1)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Fp {
    v: u64,
    p: u64,
}

impl Fp {
    fn new(v: i128, p: u64) -> Self {
        Fp { v: v.rem_euclid(p as i128) as u64, p }
    }
    fn pow(self, mut e: u64) -> Self {
        let mut r = Fp { v: 1, p: self.p };
        let mut b = self;
        while e > 0 {
            if e & 1 == 1 {
                r = Field::mul(&r, &b);
            }
            b = Field::mul(&b, &b);
            e >>= 1;
        }
        r
    }
}

impl Field for Fp {
    fn from_i64(&self, v: i64) -> Self {
        Fp::new(v as i128, self.p)
    }
    fn add(&self, o: &Self) -> Self {
        Fp::new(self.v as i128 + o.v as i128, self.p)
    }
    fn mul(&self, o: &Self) -> Self {
        Fp { v: ((self.v as u128 * o.v as u128) % self.p as u128) as u64, p: self.p }
    }
    fn inv(&self) -> Option<Self> {
        if self.v == 0 {
            None
        } else {
            Some(self.pow(self.p - 2))
        }
    }
}

/// `Σ_{(lead,j)} u^j` for the jumps whose first (`axis = 0`) or second
/// coordinate equals `lead`, as a Laurent polynomial in the other one.
fn section(steps: &StepSet, axis: usize, lead: i32) -> [i64; 3] {
    let mut c = [0i64; 3];
    for (i, j) in steps.steps() {
        let (a, b) = if axis == 0 { (i, j) } else { (j, i) };
        if a == lead {
            c[(b + 1) as usize] += 1;
        }
    }
    c
}

fn eval_laurent<F: Field>(c: &[i64; 3], u: &F) -> Option<F> {
    let ui = u.inv()?;
    let mut s = u.from_i64(c[1]);
    s = s.add(&u.mul(&u.from_i64(c[2])));
    s = s.add(&ui.mul(&u.from_i64(c[0])));
    Some(s)
}

/// Ratio `c̃(y)/ã(y)` (for Φ) or `c(x)/a(x)` (for Ψ) evaluated at `u`.
fn involution_ratio<F: Field>(num: &[i64; 3], den: &[i64; 3], u: &F) -> Option<F> {
    let n = eval_laurent(num, u)?;
    let d = eval_laurent(den, u)?;
    Some(n.mul(&d.inv()?))
}

struct Involutions {
    phi_num: [i64; 3],
    phi_den: [i64; 3],
    psi_num: [i64; 3],
    psi_den: [i64; 3],
}

impl Involutions {
    fn new(steps: &StepSet) -> Result<Self> {
        let inv = Involutions {
            phi_num: section(steps, 0, -1),
            phi_den: section(steps, 0, 1),
            psi_num: section(steps, 1, -1),
            psi_den: section(steps, 1, 1),
        };
        for (name, c) in [
            ("no step with di = -1", inv.phi_num),
            ("no step with di = +1", inv.phi_den),
            ("no step with dj = -1", inv.psi_num),
            ("no step with dj = +1", inv.psi_den),
        ] {
            if c.iter().all(|v| *v == 0) {
                return Err(Error::DegenerateModel(name.into()));
            }
        }
        Ok(inv)
    }

    /// Applies Φ (odd steps) or Ψ (even steps); `None` if undefined at the point.
    fn apply<F: Field>(&self, k: u32, x: &F, y: &F) -> Option<(F, F)> {
        if k % 2 == 1 {
            let r = involution_ratio(&self.phi_num, &self.phi_den, y)?;
            Some((r.mul(&x.inv()?), y.clone()))
        } else {
            let r = involution_ratio(&self.psi_num, &self.psi_den, x)?;
            Some((x.clone(), r.mul(&y.inv()?)))
        }
    }

    /// First `k ≤ limit` at which the alternating orbit returns to the start.
    /// `Err(())` when the orbit hits a point where a map is undefined.
    fn closure<F: Field>(&self, x0: &F, y0: &F, limit: u32) -> std::result::Result<Option<u32>, ()> {
        let (mut x, mut y) = (x0.clone(), y0.clone());
        for k in 1..=limit {
            let (nx, ny) = self.apply(k, &x, &y).ok_or(())?;
            x = nx;
            y = ny;
            if k % 2 == 0 && &x == x0 && &y == y0 {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }
}

/// Order of the group of the walk, found from orbits of generic points.
///
/// Closures are detected in exact rational arithmetic; the long tail up to
/// `max_iter` is followed modulo large primes.
pub fn group_order(steps: &StepSet, max_iter: u32) -> Result<GroupOrder> {
    let inv = Involutions::new(steps)?;
    let exact_limit = max_iter.min(EXACT_LIMIT);
    let probes = [(q(3, 7), q(5, 11)), (q(-13, 17), q(19, 23)), (q(29, 31), q(-37, 41))];
    let mut exact: Vec<Option<u32>> = Vec::new();
    for (x0, y0) in probes.iter() {
        if let Ok(c) = inv.closure(x0, y0, exact_limit) {
            exact.push(c);
            if exact.len() == 2 {
                break;
            }
        }
    }
    if exact.len() < 2 {
        return Err(Error::DegenerateModel("orbit undefined at all probe points".into()));
    }
    if let Some(n) = exact[0] {
        if exact.iter().all(|c| *c == Some(n)) {
            return Ok(GroupOrder::Finite(n));
        }
    }
    if max_iter <= exact_limit {
        return Ok(GroupOrder::Infinite(max_iter));
    }
    // Modular continuation.
    let mut rng = ChaCha8Rng::seed_from_u64(0x7269_6b65_726e_656c);
    let mut modular: Vec<Option<u32>> = Vec::new();
    for &p in PRIMES.iter() {
        let mut attempts = 0;
        loop {
            attempts += 1;
            let x0 = Fp::new(rng.gen_range(2..p) as i128, p);
            let y0 = Fp::new(rng.gen_range(2..p) as i128, p);
            match inv.closure(&x0, &y0, max_iter) {
                Ok(c) => {
                    modular.push(c);
                    break;
                }
                Err(()) if attempts < 16 => continue,
                Err(()) => return Err(Error::DegenerateModel("modular orbit undefined".into())),
            }
        }
    }
    match modular[0] {
        Some(n) if modular.iter().all(|c| *c == Some(n)) => {
            // Confirm exactly before reporting a finite order.
            let (x0, y0) = &probes[0];
            match inv.closure(x0, y0, n) {
                Ok(Some(m)) if m == n => Ok(GroupOrder::Finite(n)),
                _ => Ok(GroupOrder::Infinite(max_iter)),
            }
        }
        _ => Ok(GroupOrder::Infinite(max_iter)),
    }
}

/// `φ^{-1}(x, y) = (1/y, xy)` on numbers.
pub fn phi_inverse_point(x: num_complex::Complex64, y: num_complex::Complex64) -> (num_complex::Complex64, num_complex::Complex64) {
    (num_complex::Complex64::new(1.0, 0.0) / y, x * y)
}

/// `φ(x, y)` on points: the inverse of [`phi_inverse_point`], `(x y, 1/x)`.
pub fn phi_point(x: num_complex::Complex64, y: num_complex::Complex64) -> (num_complex::Complex64, num_complex::Complex64) {
    (x * y, num_complex::Complex64::new(1.0, 0.0) / x)
}
