//! Knot emission, per-ray sorting, exact accumulation and compositing.
//!
//! Rendering runs in three sweeps: every particle emits quantized knots on
//! the rays it touches, knots are sorted by `(ray, position)`, and each
//! ray's stream is accumulated with the update rule and composited front
//! to back. The functions here are the per-particle and per-ray building
//! blocks plus a sequential driver.

use alloc::vec::Vec;
use alloc::{format, vec};

use crate::geometry::{Camera, Ray};
use crate::lut::Lut;
use crate::poly::BINOMIAL;
use crate::quantize::{quantize_particle, Coeffs, Knot, Particle, QuantaConfig, QuantizedKnot};
use crate::scalar::{QuantInt, Scalar};
use crate::{Error, Result, MAX_DEGREE};

/// One polynomial piece of an accumulated ray field: on `[start, end]` the
/// field is `Σ_d coeffs[d]·(x − start)^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPiece<S> {
    pub start: S,
    pub end: S,
    pub coeffs: Coeffs<S>,
}

impl<S: Scalar> FieldPiece<S> {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// Result of running the update rule over a knot stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RayField<S> {
    pub pieces: Vec<FieldPiece<S>>,
    /// Coefficients left after the last knot.
    pub residual: Coeffs<S>,
    /// Number of scalar multiplications and additions performed.
    pub ops: u64,
}

/// Running localized coefficients along one ray.
#[derive(Debug, Clone)]
pub struct RayAccumulator<S> {
    degree: usize,
    ray: u32,
    coeffs: Coeffs<S>,
    pos: Option<S>,
    ops: u64,
}

impl<S: Scalar> RayAccumulator<S> {
    pub fn new(degree: usize, ray: u32) -> Self {
        assert!(degree <= MAX_DEGREE);
        Self { degree, ray, coeffs: [S::ZERO; MAX_DEGREE + 1], pos: None, ops: 0 }
    }

    pub fn coefficients(&self) -> &Coeffs<S> {
        &self.coeffs
    }

    pub fn position(&self) -> Option<S> {
        self.pos
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    fn overflow(&self, at: S) -> Error {
        Error::RayOverflow { ray: self.ray, position: at.to_f64() }
    }

    fn add(&mut self, b: &Coeffs<S>, at: S) -> Result<()> {
        for d in 0..=self.degree {
            if !b[d].is_zero() {
                self.coeffs[d] = self.coeffs[d].checked_add(b[d]).ok_or_else(|| self.overflow(at))?;
                self.ops += 1;
            }
        }
        Ok(())
    }

    /// Re-expands the running polynomial about `pos + delta`:
    /// `ā_d ← Σ_{j≥d} C(j,d)·ā_j·delta^{j−d}`.
    fn shift(&mut self, delta: S, at: S) -> Result<()> {
        let Some(top) = (0..=self.degree).rev().find(|&j| !self.coeffs[j].is_zero()) else {
            return Ok(());
        };
        let mut pow = [S::ONE; MAX_DEGREE + 1];
        for e in 1..=top {
            pow[e] = pow[e - 1].checked_mul(delta).ok_or_else(|| self.overflow(at))?;
            self.ops += 1;
        }
        let mut out = [S::ZERO; MAX_DEGREE + 1];
        for d in 0..=top {
            let mut acc = self.coeffs[d];
            for j in d + 1..=top {
                if self.coeffs[j].is_zero() {
                    continue;
                }
                let term = S::from_i64(BINOMIAL[j][d])
                    .checked_mul(self.coeffs[j])
                    .and_then(|v| v.checked_mul(pow[j - d]))
                    .and_then(|v| acc.checked_add(v))
                    .ok_or_else(|| self.overflow(at))?;
                acc = term;
                self.ops += 3;
            }
            out[d] = acc;
        }
        self.coeffs = out;
        Ok(())
    }

    /// Consumes one knot. Returns the completed piece ending at the knot
    /// when the knot opens a new position; knots at the current position
    /// are merged.
    pub fn push(&mut self, pos: S, b: &Coeffs<S>) -> Result<Option<FieldPiece<S>>> {
        match self.pos {
            None => {
                self.pos = Some(pos);
                self.add(b, pos)?;
                Ok(None)
            }
            Some(p) if pos == p => {
                self.add(b, pos)?;
                Ok(None)
            }
            Some(p) if pos < p => Err(Error::Unsorted { ray: self.ray, position: pos.to_f64(), previous: p.to_f64() }),
            Some(p) => {
                let piece = FieldPiece { start: p, end: pos, coeffs: self.coeffs };
                let delta = pos.checked_sub(p).ok_or_else(|| self.overflow(pos))?;
                self.shift(delta, pos)?;
                self.add(b, pos)?;
                self.pos = Some(pos);
                Ok(Some(piece))
            }
        }
    }
}

/// Runs the update rule over a sorted knot stream.
pub fn accumulate<S: Scalar>(stream: &[Knot<S>], degree: usize, ray: u32) -> Result<RayField<S>> {
    let mut acc = RayAccumulator::new(degree, ray);
    let mut pieces = Vec::with_capacity(stream.len());
    for k in stream {
        if let Some(p) = acc.push(k.pos, &k.coeffs)? {
            pieces.push(p);
        }
    }
    Ok(RayField { pieces, residual: acc.coeffs, ops: acc.ops })
}

/// Accumulates one ray's quantized knots and checks that nothing is left
/// after the last knot.
pub fn accumulate_quantized<I: QuantInt>(stream: &[QuantizedKnot<I>], degree: usize) -> Result<RayField<I>> {
    let ray = stream.first().map_or(0, |k| k.ray_id);
    let mut acc = RayAccumulator::new(degree, ray);
    let mut pieces = Vec::with_capacity(stream.len());
    for k in stream {
        if k.ray_id != ray {
            return Err(Error::InvalidConfig(format!("stream mixes rays {ray} and {}", k.ray_id)));
        }
        if let Some(p) = acc.push(k.t_bar, &k.b)? {
            pieces.push(p);
        }
    }
    if acc.coeffs.iter().any(|c| !c.is_zero()) {
        return Err(Error::Residual { ray });
    }
    Ok(RayField { pieces, residual: acc.coeffs, ops: acc.ops })
}

/// Sorts knots by `(ray_id, t̄)`, stably.
pub fn sort_knots<I: QuantInt>(knots: &mut [QuantizedKnot<I>]) {
    knots.sort_by_key(|k| (k.ray_id, k.t_bar));
}

/// Splits sorted knots into per-ray streams.
pub fn ray_streams<I: QuantInt>(sorted: &[QuantizedKnot<I>]) -> impl Iterator<Item = &[QuantizedKnot<I>]> {
    sorted.chunk_by(|a, b| a.ray_id == b.ray_id)
}

/// Real value `ς·Σ ā_d (t/τ − t̄_k)^d` of a piece starting at `t̄_k`.
pub fn evaluate_piece<I: QuantInt>(coeffs: &Coeffs<I>, start: I, quanta: &QuantaConfig, t: f64) -> f64 {
    let x = t / quanta.tau - start.to_f64();
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * x + c.to_f64();
    }
    quanta.sigma * acc
}

/// Exact integer value `Σ ā_d (x − t̄_k)^d` at an integer position.
pub fn exact_piece_value<I: QuantInt>(coeffs: &Coeffs<I>, start: I, x: I) -> Option<I> {
    let dx = x.checked_sub(start)?;
    let mut acc = I::ZERO;
    for c in coeffs.iter().rev() {
        acc = acc.checked_mul(dx)?.checked_add(*c)?;
    }
    Some(acc)
}

/// A ray crossing a particle's support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub ray: Ray,
    pub ray_id: u32,
    /// Normalized distance `‖χ − x(t_χ)‖/ζ`.
    pub lambda: f64,
    /// Closest-approach parameter.
    pub t_chi: f64,
}

/// All rays passing strictly closer than `qζ` to the particle centre.
pub fn particle_ray_footprint(particle: &Particle, camera: &Camera, q: f64) -> Vec<Hit> {
    let radius = q * particle.h;
    let mut out = Vec::new();
    let Some((x0, y0, x1, y1)) = camera.sphere_bounds(particle.position, radius) else {
        return out;
    };
    for py in y0..=y1 {
        for px in x0..=x1 {
            let ray = camera.ray(px, py);
            let (t_chi, dist) = ray.closest_approach(particle.position);
            if t_chi + radius <= 0.0 {
                continue;
            }
            let lambda = dist / particle.h;
            if lambda < q {
                out.push(Hit { ray, ray_id: camera.ray_id(px, py), lambda, t_chi });
            }
        }
    }
    out
}

/// Emits the quantized knots of one particle on all rays it touches.
pub fn emit_particle<I: QuantInt>(
    index: usize,
    particle: &Particle,
    camera: &Camera,
    lut: &Lut,
    quanta: &QuantaConfig,
    out: &mut Vec<QuantizedKnot<I>>,
) -> Result<()> {
    for hit in particle_ray_footprint(particle, camera, lut.q()) {
        out.extend(quantize_particle::<I>(index, particle, hit.t_chi, hit.lambda, hit.ray_id, lut, quanta)?);
    }
    Ok(())
}

/// Piecewise-linear map from field values to emission colour and
/// absorption coefficient, clamped outside its control points.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    points: Vec<TfPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfPoint {
    pub value: f64,
    pub rgb: [f64; 3],
    pub absorption: f64,
}

impl TransferFunction {
    pub fn new(points: Vec<TfPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfig("transfer function has no control points".into()));
        }
        for w in points.windows(2) {
            if !(w[1].value > w[0].value) {
                return Err(Error::InvalidConfig("transfer function values must be strictly increasing".into()));
            }
        }
        if points.iter().any(|p| !(p.absorption >= 0.0) || p.rgb.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidConfig("absorption must be non-negative and colours finite".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TfPoint] {
        &self.points
    }

    /// Emission colour and absorption at `value`.
    pub fn sample(&self, value: f64) -> ([f64; 3], f64) {
        let p = &self.points;
        if value <= p[0].value || p.len() == 1 {
            return (p[0].rgb, p[0].absorption);
        }
        let last = p[p.len() - 1];
        if value >= last.value {
            return (last.rgb, last.absorption);
        }
        let i = p.partition_point(|c| c.value <= value);
        let (a, b) = (p[i - 1], p[i]);
        let w = (value - a.value) / (b.value - a.value);
        let lerp = |x: f64, y: f64| x + w * (y - x);
        (
            [lerp(a.rgb[0], b.rgb[0]), lerp(a.rgb[1], b.rgb[1]), lerp(a.rgb[2], b.rgb[2])],
            lerp(a.absorption, b.absorption),
        )
    }
}

/// Compositing settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeOptions {
    /// Sample spacing along the ray in world units.
    pub step: f64,
    pub background: [f64; 3],
    /// Clip range of ray parameters.
    pub near: f64,
    pub far: f64,
}

/// Opacity at which a ray is considered saturated.
pub const EARLY_TERMINATION_OPACITY: f64 = 0.999;

struct Compositor {
    color: [f64; 3],
    transmittance: f64,
}

impl Compositor {
    fn segment(&mut self, rgb: [f64; 3], sigma: f64, len: f64) {
        if len <= 0.0 {
            return;
        }
        let (weight, attenuation) = if sigma > 0.0 {
            let a = libm::exp(-sigma * len);
            ((1.0 - a) / sigma, a)
        } else {
            (len, 1.0)
        };
        for (c, e) in self.color.iter_mut().zip(rgb) {
            *c += self.transmittance * e * weight;
        }
        self.transmittance *= attenuation;
    }

    fn saturated(&self) -> bool {
        1.0 - self.transmittance > EARLY_TERMINATION_OPACITY
    }
}

/// Front-to-back emission–absorption compositing of an accumulated field.
/// Each clipped piece gets `max(2, ⌈len/step⌉)` midpoint samples; the zero
/// field between pieces is integrated exactly. Returns RGBA with the
/// background blended behind.
pub fn composite<I: QuantInt>(
    pieces: &[FieldPiece<I>],
    quanta: &QuantaConfig,
    tf: &TransferFunction,
    opts: &CompositeOptions,
) -> [f64; 4] {
    let mut c = Compositor { color: [0.0; 3], transmittance: 1.0 };
    let (zero_rgb, zero_sigma) = tf.sample(0.0);
    let mut cursor = opts.near;
    for p in pieces {
        let a = (p.start.to_f64() * quanta.tau).max(opts.near);
        let b = (p.end.to_f64() * quanta.tau).min(opts.far);
        if b <= a {
            continue;
        }
        if a > cursor {
            c.segment(zero_rgb, zero_sigma, a - cursor);
        }
        if p.is_zero() {
            c.segment(zero_rgb, zero_sigma, b - a);
        } else {
            let m = libm::ceil((b - a) / opts.step).max(2.0) as usize;
            let dt = (b - a) / m as f64;
            for i in 0..m {
                let t = a + (i as f64 + 0.5) * dt;
                let (rgb, sigma) = tf.sample(evaluate_piece(&p.coeffs, p.start, quanta, t));
                c.segment(rgb, sigma, dt);
                if c.saturated() {
                    break;
                }
            }
        }
        cursor = b;
        if c.saturated() {
            break;
        }
    }
    if !c.saturated() && opts.far > cursor && opts.far.is_finite() {
        c.segment(zero_rgb, zero_sigma, opts.far - cursor);
    }
    let t = c.transmittance;
    [
        c.color[0] + t * opts.background[0],
        c.color[1] + t * opts.background[1],
        c.color[2] + t * opts.background[2],
        1.0 - t,
    ]
}

/// Outcome of a render.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub width: u32,
    pub height: u32,
    /// Row-major RGBA.
    pub pixels: Vec<[f64; 4]>,
    pub knot_count: usize,
    pub particles_on_screen: usize,
    /// Particles or rays dropped because of integer overflow.
    pub overflow_count: usize,
    /// First overflow in particle/ray order, for diagnostics.
    pub first_error: Option<Error>,
}

/// Shades every pixel from sorted knots; rays that fail are painted with
/// the background and counted.
pub fn shade_sorted<I: QuantInt>(
    sorted: &[QuantizedKnot<I>],
    camera: &Camera,
    degree: usize,
    quanta: &QuantaConfig,
    tf: &TransferFunction,
    opts: &CompositeOptions,
) -> (Vec<[f64; 4]>, usize, Option<Error>) {
    let empty = composite::<I>(&[], quanta, tf, opts);
    let mut pixels = vec![empty; camera.ray_count()];
    let mut failures = 0;
    let mut first = None;
    for stream in ray_streams(sorted) {
        let id = stream[0].ray_id as usize;
        match shade_stream(stream, degree, quanta, tf, opts) {
            Ok(px) => pixels[id] = px,
            Err(e) => {
                failures += 1;
                first.get_or_insert(e);
                pixels[id] = [opts.background[0], opts.background[1], opts.background[2], 0.0];
            }
        }
    }
    (pixels, failures, first)
}

/// Accumulates and composites one ray.
pub fn shade_stream<I: QuantInt>(
    stream: &[QuantizedKnot<I>],
    degree: usize,
    quanta: &QuantaConfig,
    tf: &TransferFunction,
    opts: &CompositeOptions,
) -> Result<[f64; 4]> {
    let field = accumulate_quantized(stream, degree)?;
    Ok(composite(&field.pieces, quanta, tf, opts))
}

/// Sequential three-sweep renderer.
pub fn render<I: QuantInt>(
    particles: &[Particle],
    camera: &Camera,
    lut: &Lut,
    quanta: &QuantaConfig,
    tf: &TransferFunction,
    opts: &CompositeOptions,
) -> RenderOutput {
    let mut knots: Vec<QuantizedKnot<I>> = Vec::new();
    let mut overflow_count = 0;
    let mut first_error = None;
    let mut on_screen = 0;
    for (i, p) in particles.iter().enumerate() {
        let mut local = Vec::new();
        match emit_particle(i, p, camera, lut, quanta, &mut local) {
            Ok(()) => {
                on_screen += usize::from(!local.is_empty());
                knots.extend(local);
            }
            Err(e) => {
                overflow_count += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    sort_knots(&mut knots);
    let (pixels, failures, ray_error) = shade_sorted(&knots, camera, lut.config().d(), quanta, tf, opts);
    if first_error.is_none() {
        first_error = ray_error;
    }
    RenderOutput {
        width: camera.width(),
        height: camera.height(),
        pixels,
        knot_count: knots.len(),
        particles_on_screen: on_screen,
        overflow_count: overflow_count + failures,
        first_error,
    }
}
