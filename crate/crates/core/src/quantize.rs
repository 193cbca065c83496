//! Quantum selection, the quantization error estimate `Q_D`, and the
//! construction of exactly closing integer knots for one particle.

use alloc::vec::Vec;
use alloc::{format, vec};

use crate::approx::ApproxConfig;
use crate::geometry::Vec3;
use crate::kernel::KernelConstants;
use crate::lut::Lut;
use crate::poly::BINOMIAL;
use crate::scalar::{QuantInt, Scalar};
use crate::{Error, Result, MAX_DEGREE};

/// Coefficient array `b_0, …, b_D` (unused tail entries are zero).
pub type Coeffs<S> = [S; MAX_DEGREE + 1];

/// A knot position with its localized difference coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot<S> {
    pub pos: S,
    pub coeffs: Coeffs<S>,
}

/// An integer knot on a specific ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantizedKnot<I> {
    pub ray_id: u32,
    pub t_bar: I,
    pub b: Coeffs<I>,
}

/// Supported integer widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntWidth {
    W32,
    W64,
    W128,
}

impl IntWidth {
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            32 => Ok(Self::W32),
            64 => Ok(Self::W64),
            128 => Ok(Self::W128),
            _ => Err(Error::InvalidConfig(format!("integer width must be 32, 64 or 128, got {bits}"))),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Self::W32 => 32,
            Self::W64 => 64,
            Self::W128 => 128,
        }
    }

    /// `INT_MAX = 2^(bits−1) − 1` as a float.
    pub fn int_max(self) -> f64 {
        libm::ldexp(1.0, self.bits() as i32 - 1) - 1.0
    }
}

/// Length quantum `τ`, value quantum `ς` and integer width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantaConfig {
    pub tau: f64,
    pub sigma: f64,
    pub int_width: IntWidth,
}

impl QuantaConfig {
    pub fn new(tau: f64, sigma: f64, int_width: IntWidth) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite() && sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("quanta must be positive, got τ={tau}, ς={sigma}")));
        }
        Ok(Self { tau, sigma, int_width })
    }

    /// `ς_d = ς/τ^d`.
    pub fn sigma_d(&self, d: usize) -> f64 {
        self.sigma / libm::pow(self.tau, d as f64)
    }

    pub fn int_max(&self) -> f64 {
        self.int_width.int_max()
    }
}

/// An SPH particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub position: Vec3,
    pub mass: f64,
    pub density: f64,
    /// Smoothing radius `ζ`.
    pub h: f64,
    /// Field attribute `α`.
    pub value: f64,
}

impl Particle {
    /// Amplitude `μα/(ρζ³)` of the particle's contribution.
    pub fn phi(&self) -> f64 {
        self.mass * self.value / (self.density * self.h * self.h * self.h)
    }

    pub fn validate(&self) -> Result<()> {
        let finite =
            [self.position.x, self.position.y, self.position.z, self.mass, self.value].iter().all(|v| v.is_finite());
        if !finite || !(self.h > 0.0 && self.h.is_finite()) || !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::InvalidConfig(format!("invalid particle {self:?}")));
        }
        Ok(())
    }
}

/// Data-set summary feeding the choice of quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    /// Upper bound of field values along rays.
    pub a_max: f64,
    pub mass: f64,
    pub density: f64,
    pub h: f64,
    pub value: f64,
    /// `μ_r α_r/(ρ_r ζ_r³)`.
    pub phi_repr: f64,
}

/// Default factor by which overlapping particles may exceed the largest
/// single-particle peak.
pub const DEFAULT_CLUSTER_FACTOR: f64 = 16.0;

impl DatasetStats {
    /// Stats for given representative attributes and a data variance
    /// `v`, taken as `a_max` relative to the peak `φ_repr·w(0)` of a
    /// representative particle's contribution.
    pub fn from_variance(variance: f64, mass: f64, density: f64, h: f64, value: f64, w0: f64) -> Result<Self> {
        let phi_repr = mass * value / (density * h * h * h);
        let s = Self { a_max: variance * phi_repr.abs() * w0, mass, density, h, value, phi_repr };
        s.validate()?;
        Ok(s)
    }

    /// `a_max/(φ_repr·w(0))`.
    pub fn variance(&self, w0: f64) -> f64 {
        self.a_max / (self.phi_repr.abs() * w0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_max > 0.0 && self.a_max.is_finite())
            || !(self.h > 0.0)
            || !(self.density > 0.0)
            || !(self.phi_repr != 0.0 && self.phi_repr.is_finite())
        {
            return Err(Error::InvalidConfig(format!("degenerate data set statistics {self:?}")));
        }
        Ok(())
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Summarizes a particle set: representative attributes are medians and
/// `a_max = cluster_factor · max_i |φ_i| · peak`, where `peak` bounds the
/// normalized approximations (see [`Lut::peak_amplitude`]).
pub fn dataset_stats(particles: &[Particle], peak: f64, cluster_factor: f64) -> Result<DatasetStats> {
    if particles.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let col = |f: fn(&Particle) -> f64| -> Vec<f64> { particles.iter().map(f).collect() };
    let mass = median(&mut col(|p| p.mass));
    let density = median(&mut col(|p| p.density));
    let h = median(&mut col(|p| p.h));
    let value = median(&mut col(|p| p.value));
    let phi_max = particles.iter().map(|p| p.phi().abs()).fold(0.0, f64::max);
    let mut phi_repr = mass * value / (density * h * h * h);
    if phi_repr == 0.0 {
        // A zero median attribute gives no scale; fall back to the largest one.
        phi_repr = phi_max;
    }
    let s = DatasetStats { a_max: cluster_factor * phi_max * peak, mass, density, h, value, phi_repr };
    s.validate()?;
    Ok(s)
}

fn qd_coefficient(d: usize, q: f64) -> f64 {
    let d = d as f64;
    2.0 * libm::pow(q, 2.0 * d + 3.0) / ((2.0 * d + 1.0) * (2.0 * d + 3.0))
}

/// Relative quantization error estimate `Q_D(τ, ς)` with `τ` and `ς`
/// normalized by the representative smoothing radius and amplitude.
pub fn quantization_error(degree: usize, c: &KernelConstants, q: f64, tau: f64, sigma: f64) -> f64 {
    let mut sum = c.kappa_prime * c.kappa_prime * tau * tau;
    for d in 0..=degree {
        sum += qd_coefficient(d, q) * sigma * sigma / libm::pow(tau, 2.0 * d as f64);
    }
    libm::sqrt(sum) / (4.0 * c.kappa)
}

/// `dQ_D²/dτ`.
pub fn quantization_error_sq_derivative(degree: usize, c: &KernelConstants, q: f64, tau: f64, sigma: f64) -> f64 {
    let k2 = c.kappa * c.kappa;
    let mut v = c.kappa_prime * c.kappa_prime * tau / (8.0 * k2);
    for d in 1..=degree {
        let df = d as f64;
        v -= df * libm::pow(q, 2.0 * df + 3.0) / (4.0 * k2 * (2.0 * df + 1.0) * (2.0 * df + 3.0)) * sigma * sigma
            / libm::pow(tau, 2.0 * df + 1.0);
    }
    v
}

/// `d²Q_D²/dτ²`.
pub fn quantization_error_sq_second_derivative(
    degree: usize,
    c: &KernelConstants,
    q: f64,
    tau: f64,
    sigma: f64,
) -> f64 {
    let k2 = c.kappa * c.kappa;
    let mut v = c.kappa_prime * c.kappa_prime / (8.0 * k2);
    for d in 1..=degree {
        let df = d as f64;
        v += df * libm::pow(q, 2.0 * df + 3.0) / (4.0 * k2 * (2.0 * df + 3.0)) * sigma * sigma
            / libm::pow(tau, 2.0 * df + 2.0);
    }
    v
}

/// The unique minimizer of `Q_D(·, sigma)` over normalized `τ > 0`, found by
/// a bracketed Newton iteration on `dQ_D²/dτ` in `ln τ`.
pub fn optimal_tau(degree: usize, c: &KernelConstants, q: f64, sigma: f64) -> Result<f64> {
    if degree == 0 {
        return Err(Error::NoPositionalMinimum);
    }
    if !(sigma > 0.0 && sigma.is_finite()) || !(c.kappa > 0.0 && c.kappa_prime > 0.0) {
        return Err(Error::InvalidConfig(format!("optimal τ needs positive ς and kernel constants (ς={sigma})")));
    }
    let g = |u: f64| quantization_error_sq_derivative(degree, c, q, libm::exp(u), sigma);
    // Balance the positional term against the highest-order value term.
    let d = degree as f64;
    let guess =
        libm::pow(sigma * sigma * libm::pow(q, 2.0 * d + 3.0) / (c.kappa_prime * c.kappa_prime), 1.0 / (2.0 * d + 2.0));
    let (mut lo, mut hi) = (libm::log(guess), libm::log(guess));
    while g(lo) > 0.0 {
        lo -= 1.0;
    }
    while g(hi) < 0.0 {
        hi += 1.0;
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gu = g(u);
        if gu == 0.0 {
            break;
        }
        if gu < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let tau = libm::exp(u);
        // d/du g(e^u) = e^u g'(e^u)
        let dg = tau * quantization_error_sq_second_derivative(degree, c, q, tau, sigma);
        let mut next = u - gu / dg;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-15 * u.abs().max(1.0) || hi - lo <= 1e-15 * u.abs().max(1.0) {
            u = next;
            break;
        }
        u = next;
    }
    Ok(libm::exp(u))
}

/// Chooses `ς = a_max/INT_MAX` and the `τ` minimizing `Q_D`.
pub fn choose_quanta(
    degree: usize,
    c: &KernelConstants,
    q: f64,
    stats: &DatasetStats,
    int_width: IntWidth,
) -> Result<QuantaConfig> {
    stats.validate()?;
    let sigma = stats.a_max / int_width.int_max();
    let x = optimal_tau(degree, c, q, sigma / stats.phi_repr.abs())?;
    QuantaConfig::new(x * stats.h, sigma, int_width)
}

macro_rules! chk {
    ($e:expr) => {
        match $e {
            Some(v) => v,
            None => return None,
        }
    };
}

/// Completes the knots of one even approximation.
///
/// `offsets[k−1]` is the distance of knot `k` from the centre and
/// `positive[k−1][d]` holds the coefficient of positive knot `k` for every
/// `(k, d) ∈ J`; other entries are ignored. Negative knots mirror the
/// positive ones with `b_{−k,d} = (−1)^{d+1} b_{kd}`. The remaining
/// coefficients (the middle knot for even `K`, odd degrees at `±1` for odd
/// `K`) are solved for so that the result is exactly even about the centre
/// and therefore telescopes to zero. Knots at equal positions are merged.
/// Returns `None` on overflow.
pub fn close_knots<S: Scalar>(
    cfg: &ApproxConfig,
    center: S,
    offsets: &[S],
    positive: &[Coeffs<S>],
) -> Option<Vec<Knot<S>>> {
    let m = cfg.positive_knots();
    let dd = cfg.d();
    assert_eq!(offsets.len(), m);
    assert_eq!(positive.len(), m);
    let zero = [S::ZERO; MAX_DEGREE + 1];
    let mut pos = vec![zero; m];
    let mut neg = vec![zero; m];
    for k in 1..=m {
        for d in 1..=dd {
            if cfg.contains(k, d) {
                let b = positive[k - 1][d];
                pos[k - 1][d] = b;
                neg[k - 1][d] = if d % 2 == 1 { b } else { chk!(b.checked_neg()) };
            }
        }
    }

    // (o_k)^e for e = 0..=D.
    let mut powers = vec![[S::ONE; MAX_DEGREE + 1]; m];
    for (k, row) in powers.iter_mut().enumerate() {
        for e in 1..=dd {
            row[e] = chk!(row[e - 1].checked_mul(offsets[k]));
        }
    }
    // Σ_k Σ_{j≥d} C(j,d) b_{−k,j} o_k^{j−d}
    let shifted = |neg: &[Coeffs<S>], d: usize| -> Option<S> {
        let mut acc = S::ZERO;
        for k in 1..=m {
            for j in d..=dd {
                let b = neg[k - 1][j];
                if b.is_zero() {
                    continue;
                }
                let t = chk!(chk!(S::from_i64(BINOMIAL[j][d]).checked_mul(b)).checked_mul(powers[k - 1][j - d]));
                acc = chk!(acc.checked_add(t));
            }
        }
        Some(acc)
    };

    let mut middle = None;
    if cfg.odd_k() {
        for d in (1..=dd).rev().filter(|d| d % 2 == 1) {
            // b_{−1,d} is still zero here, so the full sum omits it.
            let v = chk!(chk!(shifted(&neg, d)).checked_neg());
            neg[0][d] = v;
            pos[0][d] = v;
        }
    } else {
        let mut mid = zero;
        for d in (1..=dd).filter(|d| d % 2 == 1) {
            let left = chk!(shifted(&neg, d));
            mid[d] = chk!(chk!(left.checked_add(left)).checked_neg());
        }
        middle = Some(mid);
    }

    let mut out: Vec<Knot<S>> = Vec::with_capacity(2 * m + 1);
    let mut push = |p: S, c: Coeffs<S>| -> Option<()> {
        if let Some(last) = out.last_mut() {
            if last.pos == p {
                for (a, b) in last.coeffs.iter_mut().zip(c) {
                    *a = chk!(a.checked_add(b));
                }
                return Some(());
            }
        }
        out.push(Knot { pos: p, coeffs: c });
        Some(())
    };
    for k in (1..=m).rev() {
        chk!(push(chk!(center.checked_sub(offsets[k - 1])), neg[k - 1]));
    }
    if let Some(mid) = middle {
        chk!(push(center, mid));
    }
    for k in 1..=m {
        chk!(push(chk!(center.checked_add(offsets[k - 1])), pos[k - 1]));
    }
    Some(out)
}

/// Converts a LUT approximation into integer knots for one particle on one
/// ray with closest-approach parameter `t_chi` and normalized distance
/// `lambda`. Returns no knots if the ray misses the particle's support.
pub fn quantize_particle<I: QuantInt>(
    index: usize,
    particle: &Particle,
    t_chi: f64,
    lambda: f64,
    ray_id: u32,
    lut: &Lut,
    quanta: &QuantaConfig,
) -> Result<Vec<QuantizedKnot<I>>> {
    let Some(entry) = lut.lookup(lambda) else { return Ok(Vec::new()) };
    let cfg = lut.config();
    let overflow = |context| Error::ParticleOverflow { particle: index, context };
    let tau = quanta.tau;
    let zeta = particle.h;
    let center = I::from_f64_round(t_chi / tau).ok_or(overflow("centre position"))?;
    let offsets = entry
        .theta
        .iter()
        .map(|th| I::from_f64_round(zeta * th / tau).ok_or(overflow("knot offset")))
        .collect::<Result<Vec<I>>>()?;
    let amplitude = particle.mass * particle.value / (quanta.sigma * particle.density * zeta * zeta * zeta);
    let mut positive = vec![[I::ZERO; MAX_DEGREE + 1]; cfg.positive_knots()];
    for (&(k, d), &s) in cfg.index_set().iter().zip(&entry.s_hat) {
        let v = amplitude * libm::pow(tau / zeta, d as f64) * s;
        positive[k - 1][d] = I::from_f64_round(v).ok_or(overflow("difference coefficient"))?;
    }
    let knots = close_knots(&cfg, center, &offsets, &positive).ok_or(overflow("closure"))?;
    Ok(knots.into_iter().map(|k| QuantizedKnot { ray_id, t_bar: k.pos, b: k.coeffs }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_constants() -> KernelConstants {
        KernelConstants { kappa: 0.352192851793, kappa_prime: libm::sqrt(14.0) / (7.0 * core::f64::consts::PI) }
    }

    #[test]
    fn sigma_zero_limit() {
        let c = cubic_constants();
        let q = quantization_error(3, &c, 2.0, 0.01, 0.0);
        assert!((q - c.kappa_prime * 0.01 / (4.0 * c.kappa)).abs() < 1e-18);
    }

    #[test]
    fn int_max() {
        assert_eq!(IntWidth::W64.int_max(), 9223372036854775807.0);
        assert_eq!(IntWidth::W32.int_max(), 2147483647.0);
        assert!(IntWidth::from_bits(96).is_err());
    }

    #[test]
    fn degree_zero_has_no_minimizer() {
        assert_eq!(optimal_tau(0, &cubic_constants(), 2.0, 1e-10), Err(Error::NoPositionalMinimum));
    }

    #[test]
    fn optimal_tau_zeroes_derivative() {
        let c = cubic_constants();
        for d in 1..=6 {
            let s = 1e5 / 9.2e18;
            let x = optimal_tau(d, &c, 2.0, s).unwrap();
            let g = quantization_error_sq_derivative(d, &c, 2.0, x, s);
            let scale = c.kappa_prime * c.kappa_prime * x / (8.0 * c.kappa * c.kappa);
            assert!(g.abs() < 1e-10 * scale, "D={d}: {g}");
        }
    }

    #[test]
    fn median_of_two_is_mean() {
        let p = |h| Particle { position: Vec3::default(), mass: 1.0, density: 1.0, h, value: 1.0 };
        let s = dataset_stats(&[p(1.0), p(2.0)], 1.0, 16.0).unwrap();
        assert_eq!(s.h, 1.5);
        let one = dataset_stats(&[p(1.0)], 1.0, 16.0).unwrap();
        assert_eq!(one.phi_repr, 1.0);
        assert_eq!(dataset_stats(&[], 1.0, 16.0), Err(Error::EmptyDataset));
    }

    #[test]
    fn closure_even_k_is_even_about_centre() {
        // K=2, D=3: one positive knot plus a middle knot.
        let cfg = ApproxConfig::new(2, 3).unwrap();
        let pos = [[0i64, 7, -3, 2, 0, 0, 0]];
        let knots = close_knots(&cfg, 100i64, &[5], &pos).unwrap();
        assert_eq!(knots.len(), 3);
        assert_eq!(knots[0].pos, 95);
        assert_eq!(knots[0].coeffs[..4], [0, 7, 3, 2]);
        assert_eq!(knots[1].coeffs[0], 0);
        assert_eq!(knots[1].coeffs[2], 0);
    }
}
