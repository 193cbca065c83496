//! SPH kernels as piecewise polynomials in the radius.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::f64::consts::PI;

use crate::poly::{horner, horner_derivative, taylor_shift};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Maximum byte length of a kernel id (fixed-width field in LUT files).
pub const KERNEL_ID_LEN: usize = 16;

/// One polynomial piece of a kernel on `[lo, hi]`, with ascending
/// coefficients in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPiece {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

/// A radially symmetric kernel `w(r)` with compact support `[0, q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomialKernel {
    id: String,
    q: f64,
    pieces: Vec<KernelPiece>,
    /// Piece coefficients re-expanded in powers of `r − hi`; near the
    /// support boundary this avoids cancellation.
    upper: Vec<Vec<f64>>,
}

/// Kernel-dependent constants of the error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub kappa: f64,
    pub kappa_prime: f64,
}

impl PiecewisePolynomialKernel {
    /// Validates and builds a kernel. Pieces must tile `[0, q]` in order
    /// and join continuously.
    pub fn new(id: impl Into<String>, q: f64, pieces: Vec<KernelPiece>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() || id.len() > KERNEL_ID_LEN || id.contains('\0') {
            return Err(Error::InvalidKernel(format!(
                "kernel id must be 1..={KERNEL_ID_LEN} bytes without NUL, got {id:?}"
            )));
        }
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidKernel(format!("support bound must be positive, got {q}")));
        }
        if pieces.is_empty() {
            return Err(Error::InvalidKernel("no pieces".to_string()));
        }
        let mut prev_hi = 0.0;
        for (i, p) in pieces.iter().enumerate() {
            if p.coeffs.is_empty() || p.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidKernel(format!("piece {i} has no or non-finite coefficients")));
            }
            if (p.lo - prev_hi).abs() > 1e-12 || !(p.hi > p.lo) {
                return Err(Error::InvalidKernel(format!(
                    "piece {i} covers [{}, {}] but must start at {prev_hi} and be non-empty",
                    p.lo, p.hi
                )));
            }
            if i > 0 {
                let left = horner(&pieces[i - 1].coeffs, p.lo);
                let right = horner(&p.coeffs, p.lo);
                if (left - right).abs() > 1e-12 * left.abs().max(right.abs()).max(1.0) {
                    return Err(Error::InvalidKernel(format!("discontinuity {left} vs {right} at r = {}", p.lo)));
                }
            }
            prev_hi = p.hi;
        }
        if (prev_hi - q).abs() > 1e-12 {
            return Err(Error::InvalidKernel(format!("pieces end at {prev_hi}, support bound is {q}")));
        }
        let upper = pieces
            .iter()
            .map(|p| {
                let mut c = p.coeffs.clone();
                taylor_shift(&mut c, p.hi);
                c
            })
            .collect();
        Ok(Self { id, q, pieces, upper })
    }

    /// The cubic B-spline kernel with support `q = 2`, normalized by `1/(4π)`.
    pub fn cubic_spline() -> Self {
        let n = 1.0 / (4.0 * PI);
        let pieces = vec![
            KernelPiece { lo: 0.0, hi: 1.0, coeffs: vec![4.0 * n, 0.0, -6.0 * n, 3.0 * n] },
            KernelPiece { lo: 1.0, hi: 2.0, coeffs: vec![8.0 * n, -12.0 * n, 6.0 * n, -n] },
        ];
        Self::new("cubic", 2.0, pieces).expect("built-in kernel is valid")
    }

    /// Looks up a built-in kernel by id.
    pub fn builtin(id: &str) -> Option<Self> {
        match id {
            "cubic" | "cubic-spline" | "cubic_spline" => Some(Self::cubic_spline()),
            _ => None,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Support bound `q`.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn pieces(&self) -> &[KernelPiece] {
        &self.pieces
    }

    /// Internal breakpoints followed by `q`.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().map(|p| p.hi)
    }

    fn piece_index(&self, r: f64) -> Option<usize> {
        if !(r < self.q) {
            return None;
        }
        Some(self.pieces.iter().position(|p| r < p.hi).unwrap_or(self.pieces.len() - 1))
    }

    /// `w(r)`; exactly zero for `r ≥ q`.
    pub fn eval(&self, r: f64) -> f64 {
        match self.piece_index(r) {
            Some(i) => horner(&self.upper[i], r - self.pieces[i].hi),
            None => 0.0,
        }
    }

    /// `w'(r)`; zero for `r ≥ q`.
    pub fn eval_derivative(&self, r: f64) -> f64 {
        match self.piece_index(r) {
            Some(i) => horner_derivative(&self.upper[i], r - self.pieces[i].hi),
            None => 0.0,
        }
    }

    /// Ray section `B_Λ(t) = w(√(Λ² + t²))`.
    #[inline]
    pub fn ray_section(&self, lambda: f64, t: f64) -> f64 {
        let t = t.abs();
        let r2 = lambda * lambda + t * t;
        if r2 >= self.q * self.q {
            return 0.0;
        }
        let r = libm::sqrt(r2);
        let Some(i) = self.piece_index(r) else { return 0.0 };
        let hi = self.pieces[i].hi;
        // r − hi without subtracting nearly equal numbers.
        horner(&self.upper[i], (r2 - hi * hi) / (r + hi))
    }

    /// `dB_Λ/dt`.
    pub fn ray_section_derivative(&self, lambda: f64, t: f64) -> f64 {
        let r2 = lambda * lambda + t * t;
        if r2 >= self.q * self.q || r2 == 0.0 {
            return 0.0;
        }
        let r = libm::sqrt(r2);
        self.eval_derivative(r) * t / r
    }

    /// Half-length `√(q² − Λ²)` of the support of `B_Λ` (0 if `Λ ≥ q`).
    pub fn support_half_length(&self, lambda: f64) -> f64 {
        let d = self.q * self.q - lambda * lambda;
        if d > 0.0 {
            libm::sqrt(d)
        } else {
            0.0
        }
    }

    /// Non-negative ray parameters where `√(Λ² + t²)` crosses a breakpoint,
    /// ascending, always starting at 0 and ending at the support end.
    pub fn ray_breakpoints(&self, lambda: f64) -> Vec<f64> {
        let mut out = vec![0.0];
        for rb in self.breakpoints() {
            let d = rb * rb - lambda * lambda;
            if d > 0.0 {
                let t = libm::sqrt(d);
                if t > *out.last().unwrap() {
                    out.push(t);
                }
            }
        }
        out
    }

    /// `‖B_Λ‖²` over the whole ray.
    pub fn ray_norm_sq(&self, gl: &GaussLegendre, lambda: f64) -> Result<f64> {
        let pts = self.ray_breakpoints(lambda);
        let half = gl.integrate_segments(
            |t| {
                let b = self.ray_section(lambda, t);
                b * b
            },
            &pts,
        )?;
        Ok(2.0 * half)
    }

    /// Computes `κ = (4π ∫ (r w(r))² dr)^½` and
    /// `κ′ = (∫₀^q Λ ∫ (dB_Λ/dt)² dt dΛ)^½`.
    pub fn constants(&self) -> Result<KernelConstants> {
        let gl = GaussLegendre::default();
        let mut radial = vec![0.0];
        radial.extend(self.breakpoints());

        let k2 = gl.integrate_segments(
            |r| {
                let v = r * self.eval(r);
                v * v
            },
            &radial,
        )?;
        let kappa = libm::sqrt(4.0 * PI * k2);

        let mut inner_err = None;
        let kp2 = gl.integrate_segments(
            |lambda| {
                let pts = self.ray_breakpoints(lambda);
                let inner = gl.integrate_segments(
                    |t| {
                        let d = self.ray_section_derivative(lambda, t);
                        d * d
                    },
                    &pts,
                );
                match inner {
                    Ok(v) => lambda * 2.0 * v,
                    Err(e) => {
                        inner_err.get_or_insert(e);
                        0.0
                    }
                }
            },
            &radial,
        )?;
        if let Some(e) = inner_err {
            return Err(e);
        }
        Ok(KernelConstants { kappa, kappa_prime: libm::sqrt(kp2) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_values() {
        let k = PiecewisePolynomialKernel::cubic_spline();
        assert!((k.eval(0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(k.eval(2.0), 0.0);
        assert_eq!(k.eval(5.0), 0.0);
        let one = 1.0 / (4.0 * PI);
        assert!((horner(&k.pieces()[0].coeffs, 1.0) - one).abs() < 1e-16);
        assert!((horner(&k.pieces()[1].coeffs, 1.0) - one).abs() < 1e-16);
        assert!((k.ray_section(1.0, 0.0) - one).abs() < 1e-16);
        assert_eq!(k.ray_section(2.0, 0.3), 0.0);
        assert_eq!(k.ray_section(0.0, 0.0), k.eval(0.0));
    }

    #[test]
    fn constants_of_cubic() {
        let c = PiecewisePolynomialKernel::cubic_spline().constants().unwrap();
        let exact = libm::sqrt(14.0) / (7.0 * PI);
        assert!((c.kappa_prime - exact).abs() < 1e-10, "{}", c.kappa_prime);
        assert!((c.kappa - 0.352192851793).abs() < 1e-10, "{}", c.kappa);
    }

    #[test]
    fn zero_kernel_has_zero_constants() {
        let k = PiecewisePolynomialKernel::new("zero", 1.0, vec![KernelPiece { lo: 0.0, hi: 1.0, coeffs: vec![0.0] }])
            .unwrap();
        let c = k.constants().unwrap();
        assert_eq!(c.kappa, 0.0);
        assert_eq!(c.kappa_prime, 0.0);
    }

    #[test]
    fn rejects_gaps_and_jumps() {
        let gap = PiecewisePolynomialKernel::new(
            "gap",
            2.0,
            vec![
                KernelPiece { lo: 0.0, hi: 0.9, coeffs: vec![1.0] },
                KernelPiece { lo: 1.0, hi: 2.0, coeffs: vec![1.0] },
            ],
        );
        assert!(matches!(gap, Err(Error::InvalidKernel(_))));
        let jump = PiecewisePolynomialKernel::new(
            "jump",
            2.0,
            vec![
                KernelPiece { lo: 0.0, hi: 1.0, coeffs: vec![1.0] },
                KernelPiece { lo: 1.0, hi: 2.0, coeffs: vec![0.5] },
            ],
        );
        assert!(matches!(jump, Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn ray_breakpoints_skip_crossed_radii() {
        let k = PiecewisePolynomialKernel::cubic_spline();
        assert_eq!(k.ray_breakpoints(1.5), vec![0.0, libm::sqrt(4.0 - 2.25)]);
        assert_eq!(k.ray_breakpoints(0.0), vec![0.0, 1.0, 2.0]);
    }
}
