use alloc::vec;
use alloc::vec::Vec;

use super::{ApproxConfig, KnotVector};
use crate::poly::{legendre_to_monomial, monomial_to_legendre, scale_argument, shifted_legendre_values};
use crate::MAX_DEGREE;

/// An even function, zero beyond `θ_m`, stored piecewise on the positive
/// half-line. Piece `k` (1-based) spans `[θ_{k−1}, θ_k]` with `θ_0 = 0`. Its
/// polynomial is held as coefficients of the shifted Legendre polynomials
/// `P̃_i(s)` in the local variable `s = (t − θ_{k−1})/(θ_k − θ_{k−1})`, which
/// makes inner products exact diagonal sums.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenPiecewise {
    knots: Vec<f64>,
    degree: usize,
    coeffs: Vec<f64>,
}

impl EvenPiecewise {
    pub fn zero(knots: &[f64], degree: usize) -> Self {
        assert!(degree <= MAX_DEGREE);
        Self { knots: knots.to_vec(), degree, coeffs: vec![0.0; knots.len() * (degree + 1)] }
    }

    /// Builds a function from per-piece monomial coefficients in `s`.
    pub fn from_local_monomials(knots: &[f64], degree: usize, mono: &[f64]) -> Self {
        assert_eq!(mono.len(), knots.len() * (degree + 1));
        let mut f = Self::zero(knots, degree);
        let n = degree + 1;
        for k in 1..=knots.len() {
            monomial_to_legendre(&mono[(k - 1) * n..k * n], f.legendre_mut(k));
        }
        f
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn pieces(&self) -> usize {
        self.knots.len()
    }

    /// Left end and length of piece `k` (1-based).
    pub fn piece_interval(&self, k: usize) -> (f64, f64) {
        let a = if k == 1 { 0.0 } else { self.knots[k - 2] };
        (a, self.knots[k - 1] - a)
    }

    /// Legendre coefficients of piece `k` (1-based).
    pub fn legendre(&self, k: usize) -> &[f64] {
        let n = self.degree + 1;
        &self.coeffs[(k - 1) * n..k * n]
    }

    pub fn legendre_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.degree + 1;
        &mut self.coeffs[(k - 1) * n..k * n]
    }

    /// All Legendre coefficients, piece after piece.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Monomial coefficients of piece `k` in the local variable `s`.
    pub fn local(&self, k: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.degree + 1];
        legendre_to_monomial(self.legendre(k), &mut m);
        m
    }

    /// Coefficients of piece `k` in powers of `t − θ_{k−1}`.
    pub fn global(&self, k: usize) -> Vec<f64> {
        let (_, h) = self.piece_interval(k);
        let mut c = self.local(k);
        scale_argument(&mut c, 1.0 / h);
        c
    }

    fn piece_value(&self, k: usize, s: f64) -> f64 {
        let mut p = [0.0; MAX_DEGREE + 1];
        let p = &mut p[..=self.degree];
        shifted_legendre_values(s, p);
        self.legendre(k).iter().zip(p.iter()).map(|(c, v)| c * v).sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        if self.knots.is_empty() || t > *self.knots.last().unwrap() {
            return 0.0;
        }
        let k = self.knots.iter().position(|&th| t <= th).unwrap() + 1;
        let (a, h) = self.piece_interval(k);
        self.piece_value(k, (t - a) / h)
    }

    /// Exact `L²(ℝ)` inner product; both functions must share the knots.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.knots, other.knots);
        debug_assert_eq!(self.degree, other.degree);
        let mut total = 0.0;
        for k in 1..=self.pieces() {
            let (_, h) = self.piece_interval(k);
            let s: f64 = self
                .legendre(k)
                .iter()
                .zip(other.legendre(k))
                .enumerate()
                .map(|(i, (f, g))| f * g / (2 * i + 1) as f64)
                .sum();
            total += h * s;
        }
        2.0 * total
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.coeffs {
            *x *= a;
        }
    }

    /// Largest jump between adjacent pieces at `θ_1, …, θ_m` (the last
    /// piece is compared against zero).
    pub fn max_jump(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..=self.pieces() {
            // P̃_i(1) = 1 and P̃_i(0) = (−1)^i.
            let end: f64 = self.legendre(k).iter().sum();
            let next = if k < self.pieces() {
                self.legendre(k + 1).iter().enumerate().map(|(i, c)| if i % 2 == 0 { *c } else { -c }).sum()
            } else {
                0.0
            };
            worst = worst.max((end - next).abs());
        }
        worst
    }

    /// Maximum of `|f|` sampled at `per_piece + 1` points of every piece.
    pub fn sampled_max_abs(&self, per_piece: usize) -> f64 {
        let mut m: f64 = 0.0;
        for k in 1..=self.pieces() {
            for i in 0..=per_piece {
                m = m.max(self.piece_value(k, i as f64 / per_piece as f64).abs());
            }
        }
        m
    }
}

/// A basis element tagged with its index pair `(k, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFunction {
    pub k: usize,
    pub d: usize,
    pub f: EvenPiecewise,
}

/// The elements `Ã_kd`, `(k, d) ∈ J`: equal to 1 inside `θ_{k−1}`,
/// `1 − s^d` on piece `k` and 0 beyond `θ_k`.
pub fn nonorthogonal_basis(knots: &KnotVector, cfg: &ApproxConfig) -> Vec<BasisFunction> {
    assert_eq!(knots.len(), cfg.positive_knots(), "knot count must be ⌈K/2⌉");
    let theta = knots.as_slice();
    cfg.index_set()
        .into_iter()
        .map(|(k, d)| {
            let mut f = EvenPiecewise::zero(theta, cfg.d());
            for j in 1..k {
                f.legendre_mut(j)[0] = 1.0;
            }
            let mut mono = [0.0; MAX_DEGREE + 1];
            mono[0] = 1.0;
            mono[d] = -1.0;
            monomial_to_legendre(&mono[..=cfg.d()], f.legendre_mut(k));
            BasisFunction { k, d, f }
        })
        .collect()
}
