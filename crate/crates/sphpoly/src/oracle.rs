//! Brute-force reference computations for tests and the `validate`
//! command.
//!
//! Nothing here calls the production numerics of the core crate: the
//! kernel is re-evaluated from its raw piece coefficients, integrals use
//! composite Simpson sums, minimizers are plain grid searches and integer
//! arithmetic is replayed with arbitrary-precision integers. Everything is
//! single-threaded.

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Zero};
use sphpoly_core::approx::ApproxConfig;
use sphpoly_core::geometry::{Camera, Ray};
use sphpoly_core::kernel::PiecewisePolynomialKernel;
use sphpoly_core::lut::Lut;
use sphpoly_core::quantize::{Particle, QuantaConfig};
use sphpoly_core::raycast::TfPoint;

/// A kernel evaluated by direct power sums of its pieces.
#[derive(Debug, Clone)]
pub struct OracleKernel {
    q: f64,
    pieces: Vec<(f64, f64, Vec<f64>)>,
}

impl OracleKernel {
    pub fn new(kernel: &PiecewisePolynomialKernel) -> Self {
        Self { q: kernel.q(), pieces: kernel.pieces().iter().map(|p| (p.lo, p.hi, p.coeffs.clone())).collect() }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn eval(&self, r: f64) -> f64 {
        if !(r >= 0.0 && r < self.q) {
            return 0.0;
        }
        let (_, _, c) =
            self.pieces.iter().find(|(lo, hi, _)| *lo <= r && r < *hi).unwrap_or(self.pieces.last().unwrap());
        c.iter().enumerate().map(|(j, a)| a * r.powi(j as i32)).sum()
    }

    /// `B_Λ(t)`.
    pub fn ray_section(&self, lambda: f64, t: f64) -> f64 {
        self.eval((lambda * lambda + t * t).sqrt())
    }
}

/// Composite Simpson rule over `values` sampled with spacing `h`; an odd
/// number of intervals closes with a trapezoid on the last one.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut s = 0.0;
    for i in (0..even).step_by(2) {
        s += values[i] + 4.0 * values[i + 1] + values[i + 2];
    }
    s *= h / 3.0;
    if even < intervals {
        s += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    s
}

/// Even number of Simpson intervals of width at most `h` on `[a, b]`.
fn simpson_grid(a: f64, b: f64, h: f64) -> (usize, f64) {
    let mut n = ((b - a) / h).ceil().max(2.0) as usize;
    n += n % 2;
    (n, (b - a) / n as f64)
}

/// `(∫_a^b (f − g)²)^{1/2}` by composite Simpson with spacing ≤ `h`.
pub fn l2_error_dense(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, a: f64, b: f64, h: f64) -> f64 {
    assert!(h > 0.0, "step must be positive");
    if !(b > a) {
        return 0.0;
    }
    let (n, dt) = simpson_grid(a, b, h);
    let v: Vec<f64> = (0..=n)
        .map(|i| {
            let t = a + i as f64 * dt;
            let e = f(t) - g(t);
            e * e
        })
        .collect();
    simpson(&v, dt).max(0.0).sqrt()
}

/// `Σ_i (μα/ρζ³)·w(‖x(t) − χ‖/ζ)` by direct summation.
pub fn exact_field(kernel: &OracleKernel, particles: &[Particle], ray: &Ray, t: f64) -> f64 {
    let x = ray.at(t);
    particles
        .iter()
        .map(|p| {
            let r = (x - p.position).norm() / p.h;
            p.mass * p.value / (p.density * p.h * p.h * p.h) * kernel.eval(r)
        })
        .sum()
}

/// Parameter range of `ray` inside any particle's support, if any.
pub fn support_interval(kernel: &OracleKernel, particles: &[Particle], ray: &Ray) -> Option<(f64, f64)> {
    let mut out: Option<(f64, f64)> = None;
    for p in particles {
        let rel = p.position - ray.base;
        let t = rel.dot(ray.dir);
        let dist = (rel - ray.dir * t).norm();
        let radius = kernel.q() * p.h;
        if dist < radius {
            let half = (radius * radius - dist * dist).sqrt();
            let (a, b) = (t - half, t + half);
            out = Some(out.map_or((a, b), |(x, y)| (x.min(a), y.max(b))));
        }
    }
    out
}

/// Exact field sampled uniformly along a ray.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseRayField {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl DenseRayField {
    /// Samples `[a, b]` with an even number of intervals of width ≤ `h`.
    pub fn sample(kernel: &OracleKernel, particles: &[Particle], ray: &Ray, a: f64, b: f64, h: f64) -> Self {
        let (n, step) = simpson_grid(a, b, h);
        let values = (0..=n).map(|i| exact_field(kernel, particles, ray, a + i as f64 * step)).collect();
        Self { start: a, step, values }
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.start + i as f64 * self.step)
    }

    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        simpson(&sq, self.step).sqrt()
    }

    /// L² distance to `f` over the sampled range.
    pub fn l2_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        let sq: Vec<f64> = self.positions().zip(&self.values).map(|(t, v)| (f(t) - v).powi(2)).collect();
        simpson(&sq, self.step).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Largest exact field magnitude over every `stride`-th ray of the camera.
pub fn sampled_field_max(kernel: &OracleKernel, particles: &[Particle], camera: &Camera, stride: u32, h: f64) -> f64 {
    let mut best: f64 = 0.0;
    for py in (0..camera.height()).step_by(stride.max(1) as usize) {
        for px in (0..camera.width()).step_by(stride.max(1) as usize) {
            let ray = camera.ray(px, py);
            if let Some((a, b)) = support_interval(kernel, particles, &ray) {
                best = best.max(DenseRayField::sample(kernel, particles, &ray, a, b, h).max_abs());
            }
        }
    }
    best
}

/// Transfer function lookup by linear interpolation between control
/// points, clamped at both ends.
pub fn tf_lookup(points: &[TfPoint], v: f64) -> ([f64; 3], f64) {
    let first = points[0];
    let last = points[points.len() - 1];
    if v <= first.value {
        return (first.rgb, first.absorption);
    }
    if v >= last.value {
        return (last.rgb, last.absorption);
    }
    let w = points.windows(2).find(|w| v < w[1].value).unwrap();
    let s = (v - w[0].value) / (w[1].value - w[0].value);
    let mix = |a: f64, b: f64| (1.0 - s) * a + s * b;
    (
        [mix(w[0].rgb[0], w[1].rgb[0]), mix(w[0].rgb[1], w[1].rgb[1]), mix(w[0].rgb[2], w[1].rgb[2])],
        mix(w[0].absorption, w[1].absorption),
    )
}

/// Fine emission–absorption ray march of the exact field over
/// `[near, far]` with midpoint samples no wider than `step`. Background
/// is black; returns RGBA.
pub fn ray_march(
    kernel: &OracleKernel,
    particles: &[Particle],
    ray: &Ray,
    tf: &[TfPoint],
    near: f64,
    far: f64,
    step: f64,
) -> [f64; 4] {
    let mut color = [0.0; 3];
    let mut trans = 1.0;
    let mut march = |a: f64, b: f64, field: &dyn Fn(f64) -> f64| {
        if b <= a {
            return;
        }
        let n = ((b - a) / step).ceil().max(1.0) as usize;
        let dt = (b - a) / n as f64;
        for i in 0..n {
            let (rgb, sigma) = tf_lookup(tf, field(a + (i as f64 + 0.5) * dt));
            let att = (-sigma * dt).exp();
            let weight = if sigma > 0.0 { (1.0 - att) / sigma } else { dt };
            for c in 0..3 {
                color[c] += trans * rgb[c] * weight;
            }
            trans *= att;
        }
    };
    let exact = |t: f64| exact_field(kernel, particles, ray, t);
    match support_interval(kernel, particles, ray) {
        Some((a, b)) => {
            let (a, b) = (a.clamp(near, far), b.clamp(near, far));
            march(near, a, &|_| 0.0);
            march(a, b, &exact);
            if far.is_finite() {
                march(b, far, &|_| 0.0);
            }
        }
        None if far.is_finite() => march(near, far, &|_| 0.0),
        None => {}
    }
    [color[0], color[1], color[2], 1.0 - trans]
}

/// Best single-knot hat approximation `c·(1 − |t|/θ)₊` of `B_Λ` (the
/// `K = 2, D = 1` family) by exhaustive search over `θ_i = i·q/n`.
/// Returns `(θ, E_Λ)`.
pub fn grid_search_hat(kernel: &OracleKernel, lambda: f64, n: usize, h: f64) -> (f64, f64) {
    let half = (kernel.q() * kernel.q() - lambda * lambda).max(0.0).sqrt();
    let b = |t: f64| kernel.ray_section(lambda, t);
    let norm_sq = 2.0 * l2_error_dense(b, |_| 0.0, 0.0, half, h).powi(2);
    let mut best = (f64::NAN, norm_sq.sqrt());
    for i in 1..=n {
        let theta = kernel.q() * i as f64 / n as f64;
        let (m, dt) = simpson_grid(0.0, theta, h);
        let v: Vec<f64> = (0..=m).map(|j| j as f64 * dt).map(|t| b(t) * (1.0 - t / theta)).collect();
        let inner = 2.0 * simpson(&v, dt);
        let e_sq = norm_sq - inner * inner / (2.0 * theta / 3.0);
        let e = e_sq.max(0.0).sqrt();
        if e < best.1 {
            best = (theta, e);
        }
    }
    best
}

/// Minimizer of `f` over `n + 1` log-spaced points in `[lo, hi]`.
pub fn log_grid_minimize(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    (0..=n)
        .map(|i| (a + (b - a) * i as f64 / n as f64).exp())
        .map(|x| (x, f(x)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
        .0
}

/// A knot in arbitrary precision: position and `b_0, …, b_D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigKnot {
    pub pos: BigInt,
    pub b: Vec<BigInt>,
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Coefficients in powers of `(x − centre)` of `Σ_knots Σ_d b_d (x − p)^d`,
/// ignoring the truncation at each knot.
pub fn total_polynomial(knots: &[BigKnot], centre: &BigInt, degree: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); degree + 1];
    for k in knots {
        // (x − p)^d = Σ_j C(d,j) (x − c)^j (c − p)^{d−j}
        let shift = centre - &k.pos;
        for (d, bd) in k.b.iter().enumerate() {
            if bd.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate().take(d + 1) {
                *o += bd * binomial(d, j) * num_traits::pow(shift.clone(), d - j);
            }
        }
    }
    out
}

/// `f(x) = Σ_{p ≤ x} Σ_d b_d (x − p)^d`.
pub fn knot_sum(knots: &[BigKnot], x: &BigInt) -> BigInt {
    let mut s = BigInt::zero();
    for k in knots.iter().filter(|k| &k.pos <= x) {
        let dx = x - &k.pos;
        let mut pow = BigInt::from(1);
        for bd in &k.b {
            s += bd * &pow;
            pow *= &dx;
        }
    }
    s
}

/// Sorts by position, merges equal positions and drops all-zero knots.
pub fn normalize(mut knots: Vec<BigKnot>) -> Vec<BigKnot> {
    knots.sort_by(|a, b| a.pos.cmp(&b.pos));
    let mut out: Vec<BigKnot> = Vec::with_capacity(knots.len());
    for k in knots {
        match out.last_mut() {
            Some(last) if last.pos == k.pos => {
                for (a, b) in last.b.iter_mut().zip(k.b) {
                    *a += b;
                }
            }
            _ => out.push(k),
        }
    }
    out.retain(|k| k.b.iter().any(|v| !v.is_zero()));
    out
}

/// Independent completion of a particle's knots: mirrors the positive
/// knots, then solves for the missing coefficients by expanding the total
/// polynomial about the centre and requiring it to vanish. Returns `None`
/// if a required exact division fails.
pub fn close_knots(
    cfg: &ApproxConfig,
    centre: &BigInt,
    offsets: &[BigInt],
    positive: &[Vec<BigInt>],
) -> Option<Vec<BigKnot>> {
    let dd = cfg.d();
    let m = cfg.positive_knots();
    let mut knots = Vec::with_capacity(2 * m + 1);
    for k in 1..=m {
        let mut pos = vec![BigInt::zero(); dd + 1];
        let mut neg = vec![BigInt::zero(); dd + 1];
        for d in 1..=dd {
            if cfg.contains(k, d) {
                pos[d] = positive[k - 1][d].clone();
                // Reflecting a jump about the centre.
                neg[d] = if d % 2 == 1 { pos[d].clone() } else { -pos[d].clone() };
            }
        }
        knots.push(BigKnot { pos: centre + &offsets[k - 1], b: pos });
        knots.push(BigKnot { pos: centre - &offsets[k - 1], b: neg });
    }
    let p = total_polynomial(&knots, centre, dd);
    if cfg.odd_k() {
        // u_d at both ±o_1 contributes 2·Σ_{j≥d, j odd} C(j,d) o^{j−d} u_j to (x−c)^d.
        let o = &offsets[0];
        let mut u = vec![BigInt::zero(); dd + 1];
        for d in (1..=dd).rev().filter(|d| d % 2 == 1) {
            let mut rhs = -p[d].clone();
            for j in (d + 1..=dd).filter(|j| j % 2 == 1) {
                rhs -= BigInt::from(2) * binomial(j, d) * num_traits::pow(o.clone(), j - d) * &u[j];
            }
            if !(&rhs % BigInt::from(2)).is_zero() {
                return None;
            }
            u[d] = rhs / BigInt::from(2);
        }
        knots.push(BigKnot { pos: centre + o, b: u.clone() });
        knots.push(BigKnot { pos: centre - o, b: u });
    } else {
        knots.push(BigKnot { pos: centre.clone(), b: p.into_iter().map(|v| -v).collect() });
    }
    Some(normalize(knots))
}

/// The integer inputs of a particle's knots, rounded from the table entry
/// nearest `lambda`: centre, offsets and the positive-knot coefficients in
/// `J` (others zero). The real values are formed in the same floating
/// point order as the production path so that rounding agrees.
pub struct ParticleInputs {
    pub centre: BigInt,
    pub offsets: Vec<BigInt>,
    pub positive: Vec<Vec<BigInt>>,
}

pub fn particle_inputs(
    particle: &Particle,
    t_chi: f64,
    lambda: f64,
    lut: &Lut,
    quanta: &QuantaConfig,
) -> Option<ParticleInputs> {
    let n = lut.len();
    if !(lambda < lut.q()) {
        return None;
    }
    // Nearest grid point, ties to the lower index.
    let x = lambda * n as f64 / lut.q() - 0.5;
    let idx = if x - x.floor() > 0.5 { x.ceil() } else { x.floor() }.clamp(0.0, (n - 1) as f64) as usize;
    let entry = &lut.entries()[idx];
    let cfg = lut.config();
    let round = |v: f64| BigInt::from_f64(v.round_ties_even());
    let (tau, zeta) = (quanta.tau, particle.h);
    let centre = round(t_chi / tau)?;
    let offsets = entry.theta.iter().map(|th| round(zeta * th / tau)).collect::<Option<Vec<_>>>()?;
    let amplitude = particle.mass * particle.value / (quanta.sigma * particle.density * zeta * zeta * zeta);
    let mut positive = vec![vec![BigInt::zero(); cfg.d() + 1]; cfg.positive_knots()];
    for (&(k, d), s) in cfg.index_set().iter().zip(&entry.s_hat) {
        positive[k - 1][d] = round(amplitude * libm::pow(tau / zeta, d as f64) * s)?;
    }
    Some(ParticleInputs { centre, offsets, positive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sphpoly_core::geometry::Vec3;

    fn cubic() -> OracleKernel {
        OracleKernel::new(&PiecewisePolynomialKernel::cubic_spline())
    }

    fn unit(position: Vec3) -> Particle {
        Particle { position, mass: 1.0, density: 1.0, h: 1.0, value: 1.0 }
    }

    #[test]
    fn exact_field_examples() {
        let k = cubic();
        let ray = Ray { base: Vec3::new(0.0, 0.0, -5.0), dir: Vec3::new(0.0, 0.0, 1.0), px: 0, py: 0 };
        assert_eq!(exact_field(&k, &[], &ray, 5.0), 0.0);
        let p = unit(Vec3::default());
        assert!((exact_field(&k, &[p], &ray, 5.0) - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        let one = exact_field(&k, &[p], &ray, 5.7);
        assert_eq!(exact_field(&k, &[p, p], &ray, 5.7), 2.0 * one);
    }

    #[test]
    fn dense_l2_examples() {
        let f = |t: f64| (3.0 * t).sin();
        assert_eq!(l2_error_dense(f, f, 0.0, 2.0, 0.01), 0.0);
        let e = l2_error_dense(|t| f(t) + 1.0, f, 0.5, 3.0, 0.01);
        assert!((e - 2.5f64.sqrt()).abs() < 1e-3 * 2.5f64.sqrt());
        assert!((simpson(&[0.0, 1.0, 4.0, 9.0, 16.0], 1.0) - 64.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn total_polynomial_of_a_closed_hat() {
        // c(1 − |x|/θ) scaled to integers: slopes ±1 at ±θ, −2 at 0.
        let k = |p: i64, b1: i64| BigKnot { pos: BigInt::from(p), b: vec![BigInt::zero(), BigInt::from(b1)] };
        let knots = vec![k(-3, 1), k(0, -2), k(3, 1)];
        assert!(total_polynomial(&knots, &BigInt::from(7), 1).iter().all(Zero::is_zero));
        assert_eq!(knot_sum(&knots, &BigInt::from(0)), BigInt::from(3));
        assert_eq!(knot_sum(&knots, &BigInt::from(2)), BigInt::from(1));
        assert_eq!(knot_sum(&knots, &BigInt::from(100)), BigInt::zero());
    }
}
