//! Optimal even piecewise-polynomial approximations of ray sections.
//!
//! For fixed positive knots `θ_1 < … < θ_m` the candidate space consists of
//! even, continuous functions that are polynomials of degree `≤ D` between
//! consecutive knots of `−θ_m, …, −θ_1, [0,] θ_1, …, θ_m` and vanish beyond
//! `θ_m`. A knot at 0 exists only for even `K`; for odd `K` the middle piece
//! `[−θ_1, θ_1]` is a single even polynomial.

mod basis;
mod gram_schmidt;
mod optimize;
mod projection;

use alloc::format;
use alloc::vec::Vec;

pub use basis::{nonorthogonal_basis, BasisFunction, EvenPiecewise};
pub use gram_schmidt::gram_schmidt;
pub use optimize::{optimize_knots, OptimizeOptions};
pub use projection::{project_fixed_knots, FixedKnotSolution, Projector};

use crate::{Error, Result, MAX_DEGREE, MAX_PIECES};

/// Maximum polynomial degree `D` and maximum number of pieces `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ApproxConfig {
    k: usize,
    d: usize,
}

impl ApproxConfig {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if !(1..=MAX_PIECES).contains(&k) {
            return Err(Error::InvalidConfig(format!("K must lie in 1..={MAX_PIECES}, got {k}")));
        }
        if !(1..=MAX_DEGREE).contains(&d) {
            return Err(Error::InvalidConfig(format!("D must lie in 1..={MAX_DEGREE}, got {d}")));
        }
        Ok(Self { k, d })
    }

    /// Maximum number of non-trivial pieces `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Maximum polynomial degree `D`.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of positive knots, `⌈K/2⌉`.
    pub fn positive_knots(&self) -> usize {
        self.k.div_ceil(2)
    }

    /// `⌊K·D/2⌋`.
    pub fn dimension(&self) -> usize {
        self.k * self.d / 2
    }

    /// Whether the middle piece is a single even polynomial.
    pub fn odd_k(&self) -> bool {
        self.k % 2 == 1
    }

    /// Whether `(k, d)` belongs to the index set `J`.
    pub fn contains(&self, k: usize, d: usize) -> bool {
        (1..=self.positive_knots()).contains(&k) && (1..=self.d).contains(&d) && !(self.odd_k() && k == 1 && d % 2 == 1)
    }

    /// The index set `J` in lexicographic order.
    pub fn index_set(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.dimension());
        for k in 1..=self.positive_knots() {
            for d in 1..=self.d {
                if self.contains(k, d) {
                    out.push((k, d));
                }
            }
        }
        out
    }
}

/// Strictly increasing positive knot positions `θ_1, …, θ_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector(Vec<f64>);

impl KnotVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidConfig("knot vector is empty".into()));
        }
        let mut prev = 0.0;
        for &t in &theta {
            if !(t.is_finite() && t > prev) {
                return Err(Error::InvalidConfig(format!(
                    "knots must be finite, positive and strictly increasing: {theta:?}"
                )));
            }
            prev = t;
        }
        Ok(Self(theta))
    }

    /// `m` knots evenly spaced on `(0, end]`.
    pub fn equidistant(m: usize, end: f64) -> Result<Self> {
        Self::new((1..=m).map(|k| end * k as f64 / m as f64).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Outermost knot `θ_m`.
    pub fn last(&self) -> f64 {
        *self.0.last().expect("knot vector is non-empty")
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_law() {
        for k in 1..=6 {
            for d in 1..=6 {
                let c = ApproxConfig::new(k, d).unwrap();
                assert_eq!(c.index_set().len(), k * d / 2, "K={k} D={d}");
            }
        }
    }

    #[test]
    fn odd_k_excludes_middle_odd_degrees() {
        let c = ApproxConfig::new(5, 4).unwrap();
        let j = c.index_set();
        assert_eq!(j.len(), 10);
        assert!(!j.contains(&(1, 1)) && !j.contains(&(1, 3)));
        assert!(j.contains(&(1, 2)) && j.contains(&(1, 4)));
        assert!(ApproxConfig::new(1, 1).unwrap().index_set().is_empty());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ApproxConfig::new(0, 1).is_err());
        assert!(ApproxConfig::new(2, 0).is_err());
        assert!(ApproxConfig::new(2, 7).is_err());
        assert!(KnotVector::new(alloc::vec![0.5, 0.5]).is_err());
        assert!(KnotVector::new(alloc::vec![0.0, 0.5]).is_err());
    }
}
