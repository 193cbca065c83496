use alloc::vec::Vec;

use super::BasisFunction;
use crate::{Error, Result};

/// Relative norm below which an element counts as linearly dependent.
pub(crate) const DEGENERACY_THRESHOLD: f64 = 1e-10;

/// Orthogonalizes `basis` in its given (lexicographic) order by modified
/// Gram–Schmidt with one reorthogonalization pass. The output elements are
/// not normalized.
pub fn gram_schmidt(basis: &[BasisFunction]) -> Result<Vec<BasisFunction>> {
    let mut out: Vec<BasisFunction> = Vec::with_capacity(basis.len());
    let mut norms: Vec<f64> = Vec::with_capacity(basis.len());
    for b in basis {
        let input_norm = libm::sqrt(b.f.norm_sq());
        let mut v = b.clone();
        for _pass in 0..2 {
            for (a, &na) in out.iter().zip(&norms) {
                let c = v.f.inner(&a.f) / na;
                v.f.axpy(-c, &a.f);
            }
        }
        let n = v.f.norm_sq();
        let rel = libm::sqrt(n) / input_norm;
        if !(rel >= DEGENERACY_THRESHOLD) {
            return Err(Error::DegenerateKnots { element: (b.k, b.d), relative_norm: rel });
        }
        norms.push(n);
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{nonorthogonal_basis, ApproxConfig, KnotVector};

    #[test]
    fn single_element_is_unchanged() {
        let cfg = ApproxConfig::new(2, 1).unwrap();
        let b = nonorthogonal_basis(&KnotVector::new(alloc::vec![2.0]).unwrap(), &cfg);
        assert_eq!(gram_schmidt(&b).unwrap(), b);
    }

    #[test]
    fn output_is_orthogonal() {
        let cfg = ApproxConfig::new(6, 6).unwrap();
        let b = nonorthogonal_basis(&KnotVector::new(alloc::vec![0.3, 0.9, 1.7]).unwrap(), &cfg);
        let o = gram_schmidt(&b).unwrap();
        for i in 0..o.len() {
            for j in 0..i {
                let c = o[i].f.inner(&o[j].f);
                // Measured against the input scale; the monomial inner
                // products lose accuracy on strongly cancelled elements.
                let s = libm::sqrt(b[i].f.norm_sq() * b[j].f.norm_sq());
                assert!(c.abs() <= 1e-13 * s, "({i},{j}) {c}");
            }
        }
    }

    #[test]
    fn dependent_input_is_degenerate() {
        let cfg = ApproxConfig::new(4, 2).unwrap();
        let mut b = nonorthogonal_basis(&KnotVector::new(alloc::vec![1.0, 1.5]).unwrap(), &cfg);
        let dup = b[1].clone();
        b.push(dup);
        assert!(matches!(gram_schmidt(&b), Err(Error::DegenerateKnots { .. })));
    }
}
