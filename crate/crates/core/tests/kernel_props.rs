use std::f64::consts::PI;

use proptest::prelude::*;
use sphpoly_core::kernel::{KernelPiece, PiecewisePolynomialKernel};

fn cubic() -> PiecewisePolynomialKernel {
    PiecewisePolynomialKernel::cubic_spline()
}

#[test]
fn cubic_values() {
    let k = cubic();
    assert!((k.eval(0.0) - 1.0 / PI).abs() < 1e-15);
    assert_eq!(k.eval(2.0), 0.0);
    assert_eq!(k.eval(7.0), 0.0);
    // Both branches agree at the internal breakpoint.
    let inner = (4.0 - 6.0 + 3.0) / (4.0 * PI);
    let outer = 1.0 / (4.0 * PI);
    assert!((k.eval(1.0) - outer).abs() < 1e-15);
    assert!((k.eval(1.0 - 1e-12) - inner).abs() < 1e-11);
    assert!((k.ray_section(0.0, 0.0) - 1.0 / PI).abs() < 1e-15);
    assert!((k.ray_section(1.0, 0.0) - outer).abs() < 1e-15);
    assert_eq!(k.ray_section(2.0, 0.3), 0.0);
}

#[test]
fn zero_kernel_has_zero_constants() {
    let k =
        PiecewisePolynomialKernel::new("zero", 1.0, vec![KernelPiece { lo: 0.0, hi: 1.0, coeffs: vec![0.0] }]).unwrap();
    let c = k.constants().unwrap();
    assert_eq!(c.kappa, 0.0);
    assert_eq!(c.kappa_prime, 0.0);
}

#[test]
fn invalid_kernels_are_rejected() {
    let p = |lo: f64, hi: f64, c: Vec<f64>| KernelPiece { lo, hi, coeffs: c };
    assert!(PiecewisePolynomialKernel::new("gap", 2.0, vec![p(0.0, 1.0, vec![1.0]), p(1.1, 2.0, vec![1.0])]).is_err());
    assert!(PiecewisePolynomialKernel::new("jump", 2.0, vec![p(0.0, 1.0, vec![1.0]), p(1.0, 2.0, vec![2.0])]).is_err());
    assert!(PiecewisePolynomialKernel::new("short", 2.0, vec![p(0.0, 1.0, vec![1.0])]).is_err());
    assert!(PiecewisePolynomialKernel::new("a-very-long-kernel-id", 1.0, vec![p(0.0, 1.0, vec![1.0])]).is_err());
}

/// `κ² = ∫_{ℝ³} w(|x|)² dx` estimated by Monte Carlo over the support ball.
#[test]
fn kappa_matches_monte_carlo() {
    use rand::{Rng, SeedableRng};
    let k = cubic();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let n = 4_000_000;
    let mut sum = 0.0;
    for _ in 0..n {
        let x: [f64; 3] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let w = k.eval(r);
        sum += w * w;
    }
    let kappa_mc = (64.0 * sum / n as f64).sqrt();
    let c = k.constants().unwrap();
    assert!((c.kappa - kappa_mc).abs() < 1e-3, "{} vs {kappa_mc}", c.kappa);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn ray_section_is_even(l in 0.0f64..2.5, t in -3.0f64..3.0) {
        let k = cubic();
        prop_assert_eq!(k.ray_section(l, t).to_bits(), k.ray_section(l, -t).to_bits());
    }

    #[test]
    fn ray_section_vanishes_outside_support(r in 2.0f64..4.0, phi in -std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2) {
        let (l, t) = ((r * phi.cos()).abs(), r * phi.sin());
        if l * l + t * t >= 4.0 {
            prop_assert_eq!(cubic().ray_section(l, t), 0.0);
        }
    }

    #[test]
    fn cubic_is_nonnegative(r in 0.0f64..3.0) {
        prop_assert!(cubic().eval(r) >= 0.0);
    }
}
