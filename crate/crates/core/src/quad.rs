//! Gauss–Legendre rules.

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point rule mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = GaussLegendre::new(n).map_err(|_| Error::InvalidInput(format!("quadrature order {}", n)))?;
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut pairs: Vec<(f64, f64)> = rule.nodes().zip(rule.weights()).map(|(x, w)| (m + h * x, h * w)).collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    Ok(pairs.into_iter().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials() {
        let (x, w) = gauss_legendre(8, 0.0, 2.0).unwrap();
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(5)).sum();
        assert!((s - 64.0 / 6.0).abs() < 1e-12);
    }
}
