//! Cross-checks of the production pipeline against the oracle.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sphpoly_core::geometry::Camera;
use sphpoly_core::kernel::PiecewisePolynomialKernel;
use sphpoly_core::lut::Lut;
use sphpoly_core::quantize::{quantize_particle, IntWidth, Particle, QuantaConfig, QuantizedKnot};
use sphpoly_core::raycast::{
    accumulate_quantized, emit_particle, evaluate_piece, exact_piece_value, particle_ray_footprint, ray_streams,
    sort_knots, RayField,
};
use sphpoly_core::scalar::QuantInt;

use crate::oracle::{self, BigKnot, DenseRayField, OracleKernel};

/// Everything a validation run looks at.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub kernel: &'a PiecewisePolynomialKernel,
    pub lut: &'a Lut,
    pub quanta: &'a QuantaConfig,
    pub particles: &'a [Particle],
    pub camera: &'a Camera,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupResult {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub groups: Vec<GroupResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.passed)
    }
}

fn to_big<I: QuantInt>(knots: &[QuantizedKnot<I>], degree: usize) -> Vec<BigKnot> {
    knots
        .iter()
        .map(|k| BigKnot {
            pos: BigInt::from(k.t_bar.to_i128()),
            b: k.b[..=degree].iter().map(|v| BigInt::from(v.to_i128())).collect(),
        })
        .collect()
}

/// Every particle's knots on every ray it touches are rebuilt with big
/// integers; they must match exactly and sum to the zero polynomial.
pub fn telescoping<I: QuantInt>(scene: &Scene<'_>) -> GroupResult {
    let cfg = scene.lut.config();
    let d = cfg.d();
    let (mut checked, mut failures, mut overflowed) = (0, 0, 0);
    let mut detail = String::new();
    for (i, p) in scene.particles.iter().enumerate() {
        for hit in particle_ray_footprint(p, scene.camera, scene.lut.q()) {
            let core = match quantize_particle::<I>(i, p, hit.t_chi, hit.lambda, hit.ray_id, scene.lut, scene.quanta) {
                Ok(k) => k,
                Err(_) => {
                    overflowed += 1;
                    continue;
                }
            };
            checked += 1;
            let ok = (|| {
                let inputs = oracle::particle_inputs(p, hit.t_chi, hit.lambda, scene.lut, scene.quanta)?;
                let replay = oracle::close_knots(&cfg, &inputs.centre, &inputs.offsets, &inputs.positive)?;
                let mine = oracle::normalize(to_big(&core, d));
                let total = oracle::total_polynomial(&mine, &inputs.centre, d);
                Some(mine == replay && total.iter().all(Zero::is_zero))
            })()
            .unwrap_or(false);
            if !ok {
                failures += 1;
                if detail.is_empty() {
                    detail = format!("first mismatch: particle {i}, ray {}", hit.ray_id);
                }
            }
        }
    }
    if detail.is_empty() {
        detail = format!("{checked} particle/ray pairs replayed exactly");
    }
    if overflowed > 0 {
        detail.push_str(&format!("; {overflowed} pairs overflowed"));
    }
    GroupResult { name: "telescoping", passed: failures == 0 && overflowed == 0, checked, failures, detail }
}

fn ray_fields<I: QuantInt>(scene: &Scene<'_>, particles: &[(usize, Particle)]) -> Option<BTreeMap<u32, RayField<I>>> {
    let mut knots = Vec::new();
    for (i, p) in particles {
        emit_particle::<I>(*i, p, scene.camera, scene.lut, scene.quanta, &mut knots).ok()?;
    }
    sort_knots(&mut knots);
    ray_streams(&knots)
        .map(|s| accumulate_quantized(s, scene.lut.config().d()).ok().map(|f| (s[0].ray_id, f)))
        .collect()
}

fn field_value<I: QuantInt>(field: Option<&RayField<I>>, x: I) -> BigInt {
    field
        .and_then(|f| f.pieces.iter().find(|p| p.start <= x && x < p.end))
        .and_then(|p| exact_piece_value(&p.coeffs, p.start, x))
        .map_or_else(BigInt::zero, |v| BigInt::from(v.to_i128()))
}

/// Splitting the particle set in two and adding the accumulated fields
/// reproduces the joint field at sampled integer positions; shuffling the
/// particle order leaves every coefficient unchanged.
pub fn superposition<I: QuantInt>(scene: &Scene<'_>, seed: u64, samples_per_ray: usize) -> GroupResult {
    let name = "superposition";
    let indexed: Vec<(usize, Particle)> = scene.particles.iter().copied().enumerate().collect();
    let (a, b): (Vec<_>, Vec<_>) = indexed.iter().partition(|(i, _)| i % 2 == 0);
    let mut shuffled = indexed.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let (Some(all), Some(fa), Some(fb), Some(fs)) = (
        ray_fields::<I>(scene, &indexed),
        ray_fields::<I>(scene, &a),
        ray_fields::<I>(scene, &b),
        ray_fields::<I>(scene, &shuffled),
    ) else {
        return GroupResult { name, passed: false, checked: 0, failures: 1, detail: "integer overflow".into() };
    };
    let mut failures = usize::from(all != fs);
    let mut checked = 0;
    for (ray, f) in &all {
        if f.residual.iter().any(|c| *c != I::ZERO) {
            failures += 1;
        }
        let (Some(first), Some(last)) = (f.pieces.first(), f.pieces.last()) else { continue };
        let (lo, hi) = (first.start.to_i128(), last.end.to_i128());
        let n = samples_per_ray.max(2) as i128;
        for s in 0..=n {
            // Spread over the ray's range plus a margin past the last knot.
            let x = lo + (hi - lo + 16) * s / n - 8;
            let Some(xi) = I::from_i128(x) else { continue };
            checked += 1;
            if field_value(Some(f), xi) != field_value(fa.get(ray), xi) + field_value(fb.get(ray), xi) {
                failures += 1;
            }
        }
        if let Some(xi) = I::from_i128(hi) {
            failures += usize::from(!field_value(Some(f), xi).is_zero());
        }
    }
    let detail = if all != fs {
        "shuffled particle order changed the accumulated fields".to_string()
    } else {
        format!("{} rays, {checked} sample positions", all.len())
    };
    GroupResult { name, passed: failures == 0, checked, failures, detail }
}

/// Per-ray relative L² deviations of the quantized field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeStats {
    pub rays: usize,
    pub within: usize,
    pub bound: f64,
    pub median: f64,
    pub p95: f64,
    pub worst: f64,
    #[serde(skip)]
    pub errors: Vec<f64>,
}

impl EnvelopeStats {
    pub fn fraction(&self) -> f64 {
        if self.rays == 0 {
            1.0
        } else {
            self.within as f64 / self.rays as f64
        }
    }
}

/// Compares, on every ray that meets a particle's support, the
/// accumulated quantized field with the exact field sampled at
/// `ζ_min/64`. A ray is within the envelope if its relative L² deviation
/// is at most `bound`.
pub fn envelope<I: QuantInt>(scene: &Scene<'_>, bound: f64) -> Option<EnvelopeStats> {
    let kernel = OracleKernel::new(scene.kernel);
    let h = scene.particles.iter().map(|p| p.h).fold(f64::INFINITY, f64::min) / 64.0;
    let indexed: Vec<(usize, Particle)> = scene.particles.iter().copied().enumerate().collect();
    let fields = ray_fields::<I>(scene, &indexed)?;
    let tau = scene.quanta.tau;
    let mut errors = Vec::new();
    for py in 0..scene.camera.height() {
        for px in 0..scene.camera.width() {
            let ray = scene.camera.ray(px, py);
            let Some((mut a, mut b)) = oracle::support_interval(&kernel, scene.particles, &ray) else { continue };
            let field = fields.get(&scene.camera.ray_id(px, py));
            if let Some(f) = field.filter(|f| !f.pieces.is_empty()) {
                a = a.min(f.pieces[0].start.to_f64() * tau);
                b = b.max(f.pieces[f.pieces.len() - 1].end.to_f64() * tau);
            }
            let dense = DenseRayField::sample(&kernel, scene.particles, &ray, a, b, h);
            let approx = |t: f64| -> f64 {
                let Some(f) = field else { return 0.0 };
                let i = f.pieces.partition_point(|p| p.start.to_f64() * tau <= t);
                if i == 0 {
                    return 0.0;
                }
                let p = &f.pieces[i - 1];
                if t < p.end.to_f64() * tau {
                    evaluate_piece(&p.coeffs, p.start, scene.quanta, t)
                } else {
                    0.0
                }
            };
            let norm = dense.norm();
            if norm > 0.0 {
                errors.push(dense.l2_distance(approx) / norm);
            }
        }
    }
    let within = errors.iter().filter(|e| **e <= bound).count();
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let pick = |q: f64| sorted.get(((sorted.len() as f64 - 1.0) * q).round() as usize).copied().unwrap_or(0.0);
    Some(EnvelopeStats {
        rays: errors.len(),
        within,
        bound,
        median: pick(0.5),
        p95: pick(0.95),
        worst: sorted.last().copied().unwrap_or(0.0),
        errors,
    })
}

/// Required share of rays inside the envelope.
pub const ENVELOPE_FRACTION: f64 = 0.95;
/// Slack on the combined error estimate.
pub const ENVELOPE_SLACK: f64 = 4.0;

fn envelope_group<I: QuantInt>(scene: &Scene<'_>, combined: f64) -> GroupResult {
    let name = "dense-L2 envelope";
    match envelope::<I>(scene, ENVELOPE_SLACK * combined) {
        None => GroupResult { name, passed: false, checked: 0, failures: 1, detail: "integer overflow".into() },
        Some(s) => GroupResult {
            name,
            passed: s.fraction() >= ENVELOPE_FRACTION,
            checked: s.rays,
            failures: s.rays - s.within,
            detail: format!(
                "{:.1}% of {} rays within {:.3e} (median {:.3e}, p95 {:.3e}, worst {:.3e})",
                100.0 * s.fraction(),
                s.rays,
                s.bound,
                s.median,
                s.p95,
                s.worst
            ),
        },
    }
}

fn run_typed<I: QuantInt>(scene: &Scene<'_>, combined: f64, seed: u64) -> ValidationReport {
    ValidationReport {
        groups: vec![
            telescoping::<I>(scene),
            superposition::<I>(scene, seed, 64),
            envelope_group::<I>(scene, combined),
        ],
    }
}

/// Runs all three groups; `combined` is `√(E*² + Q_D²)` of the scene.
pub fn run(scene: &Scene<'_>, combined: f64, seed: u64) -> ValidationReport {
    match scene.quanta.int_width {
        IntWidth::W32 => run_typed::<i32>(scene, combined, seed),
        IntWidth::W64 => run_typed::<i64>(scene, combined, seed),
        IntWidth::W128 => run_typed::<i128>(scene, combined, seed),
    }
}
