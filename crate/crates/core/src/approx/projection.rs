use alloc::vec::Vec;

use super::{gram_schmidt, nonorthogonal_basis, ApproxConfig, BasisFunction, EvenPiecewise, KnotVector};
use crate::kernel::PiecewisePolynomialKernel;
use crate::poly::shifted_legendre_values;
use crate::quadrature::GaussLegendre;
use crate::{Result, MAX_DEGREE};

/// Best approximation of `B_Λ` for fixed knots.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedKnotSolution {
    pub lambda: f64,
    pub knots: KnotVector,
    /// Orthogonalized basis, in lexicographic order of `J`.
    pub basis: Vec<BasisFunction>,
    /// Projection coefficient `⟨B_Λ, A⟩ / ⟨A, A⟩` per element of `basis`.
    pub coefficients: Vec<f64>,
    /// `S*_Λ`.
    pub approximation: EvenPiecewise,
    /// `E_Λ(S*_Λ) = ‖B_Λ − S*_Λ‖`.
    pub error: f64,
    /// `‖B_Λ‖`.
    pub target_norm: f64,
}

/// Reusable projection context holding the quadrature rule.
#[derive(Debug, Clone)]
pub struct Projector<'a> {
    kernel: &'a PiecewisePolynomialKernel,
    gl: GaussLegendre,
}

impl<'a> Projector<'a> {
    pub fn new(kernel: &'a PiecewisePolynomialKernel) -> Self {
        Self { kernel, gl: GaussLegendre::default() }
    }

    pub fn kernel(&self) -> &PiecewisePolynomialKernel {
        self.kernel
    }

    /// `‖B_Λ‖`.
    pub fn target_norm(&self, lambda: f64) -> Result<f64> {
        Ok(libm::sqrt(self.kernel.ray_norm_sq(&self.gl, lambda)?))
    }

    /// Moments `∫ P̃_i(s) B_Λ(t) dt` over each positive piece, `s` local.
    pub fn moments(&self, lambda: f64, knots: &[f64], degree: usize) -> Result<Vec<[f64; MAX_DEGREE + 1]>> {
        let breaks = self.kernel.ray_breakpoints(lambda);
        let end = *breaks.last().unwrap();
        let mut out = Vec::with_capacity(knots.len());
        let mut a = 0.0;
        for &b in knots {
            let h = b - a;
            let mut acc = [0.0; MAX_DEGREE + 1];
            let hi = b.min(end);
            if hi > a {
                let mut pts = Vec::with_capacity(breaks.len() + 2);
                pts.push(a);
                pts.extend(breaks.iter().copied().filter(|&t| t > a && t < hi));
                pts.push(hi);
                let mut f = |t: f64| {
                    let v = self.kernel.ray_section(lambda, t);
                    let mut r = [0.0; MAX_DEGREE + 1];
                    shifted_legendre_values((t - a) / h, &mut r[..=degree]);
                    for x in r.iter_mut() {
                        *x *= v;
                    }
                    r
                };
                for w in pts.windows(2) {
                    let seg = self.gl.integrate_vec(&mut f, w[0], w[1])?;
                    for (x, y) in acc.iter_mut().zip(seg) {
                        *x += y;
                    }
                }
            }
            out.push(acc);
            a = b;
        }
        Ok(out)
    }

    /// `⟨B_Λ, f⟩` from precomputed moments.
    pub fn target_inner(moments: &[[f64; MAX_DEGREE + 1]], f: &EvenPiecewise) -> f64 {
        let mut s = 0.0;
        for (k, m) in moments.iter().enumerate() {
            for (c, mi) in f.legendre(k + 1).iter().zip(m) {
                s += c * mi;
            }
        }
        2.0 * s
    }

    /// Projects `B_Λ` onto the space spanned by the knots. `target_norm`
    /// may be supplied to skip recomputing `‖B_Λ‖`.
    pub fn project(
        &self,
        lambda: f64,
        knots: &KnotVector,
        cfg: &ApproxConfig,
        target_norm: Option<f64>,
    ) -> Result<FixedKnotSolution> {
        let target_norm = match target_norm {
            Some(n) => n,
            None => self.target_norm(lambda)?,
        };
        let basis = gram_schmidt(&nonorthogonal_basis(knots, cfg))?;
        let mut approximation = EvenPiecewise::zero(knots.as_slice(), cfg.d());
        let mut coefficients = Vec::with_capacity(basis.len());
        let mut e2 = target_norm * target_norm;
        if target_norm > 0.0 && !basis.is_empty() {
            let moments = self.moments(lambda, knots.as_slice(), cfg.d())?;
            for a in &basis {
                let num = Self::target_inner(&moments, &a.f);
                let den = a.f.norm_sq();
                let c = num / den;
                e2 -= num * c;
                approximation.axpy(c, &a.f);
                coefficients.push(c);
            }
        } else {
            coefficients.resize(basis.len(), 0.0);
        }
        Ok(FixedKnotSolution {
            lambda,
            knots: knots.clone(),
            basis,
            coefficients,
            approximation,
            error: libm::sqrt(e2.max(0.0)),
            target_norm,
        })
    }
}

/// Orthogonal projection of `B_Λ` for fixed knots.
pub fn project_fixed_knots(
    kernel: &PiecewisePolynomialKernel,
    lambda: f64,
    knots: &KnotVector,
    cfg: &ApproxConfig,
) -> Result<FixedKnotSolution> {
    Projector::new(kernel).project(lambda, knots, cfg, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn beyond_support_is_zero() {
        let k = PiecewisePolynomialKernel::cubic_spline();
        let cfg = ApproxConfig::new(4, 3).unwrap();
        let s = project_fixed_knots(&k, 2.5, &KnotVector::new(vec![0.5, 1.0]).unwrap(), &cfg).unwrap();
        assert_eq!(s.error, 0.0);
        assert!(s.approximation.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn hat_projection_has_closed_form() {
        // For K=2, D=1, θ₁=2, Λ=0 the space is spanned by h(t) = 1 − |t|/2;
        // the optimum coefficient is ⟨B, h⟩/⟨h, h⟩.
        let k = PiecewisePolynomialKernel::cubic_spline();
        let cfg = ApproxConfig::new(2, 1).unwrap();
        let s = project_fixed_knots(&k, 0.0, &KnotVector::new(vec![2.0]).unwrap(), &cfg).unwrap();
        let gl = GaussLegendre::default();
        let num = 2.0 * gl.integrate_segments(|t| k.eval(t) * (1.0 - t / 2.0), &[0.0, 1.0, 2.0]).unwrap();
        let c = num / (4.0 / 3.0);
        assert!((s.coefficients[0] - c).abs() < 1e-13);
        assert!(s.approximation.max_jump() < 1e-14);
    }
}
