mod common;

use rand::seq::SliceRandom;
use rand::Rng;
use sphpoly_core::geometry::{Camera, Projection, Vec3};
use sphpoly_core::quantize::{IntWidth, Particle, QuantaConfig, QuantizedKnot};
use sphpoly_core::raycast::{
    accumulate_quantized, composite, emit_particle, evaluate_piece, exact_piece_value, particle_ray_footprint,
    ray_streams, sort_knots, CompositeOptions, FieldPiece, RayField, TfPoint, TransferFunction,
};

fn unit_particle(position: Vec3, h: f64) -> Particle {
    Particle { position, mass: 1.0, density: 1.0, h, value: 1.0 }
}

#[test]
fn footprint_matches_brute_force() {
    let mut rng = common::rng(21);
    let cams = [
        common::ortho_camera(32),
        Camera::look_at(
            Vec3::new(0.3, -0.2, -4.0),
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Projection::Pinhole { fov_y: 0.7 },
            32,
            24,
            0.0,
            20.0,
        )
        .unwrap(),
    ];
    for cam in &cams {
        for _ in 0..100 {
            let p = common::random_particle(&mut rng);
            let mut fast: Vec<u32> = particle_ray_footprint(&p, cam, 2.0).iter().map(|h| h.ray_id).collect();
            fast.sort_unstable();
            let mut brute = Vec::new();
            for py in 0..cam.height() {
                for px in 0..cam.width() {
                    let r = cam.ray(px, py);
                    let rel = p.position - r.base;
                    let t = rel.dot(r.dir);
                    let dist = (rel - r.dir * t).norm();
                    if dist < 2.0 * p.h && t + 2.0 * p.h > 0.0 {
                        brute.push(cam.ray_id(px, py));
                    }
                }
            }
            assert_eq!(fast, brute);
        }
    }
}

#[test]
fn footprint_edge_cases() {
    let cam = common::ortho_camera(32);
    let r = cam.ray(7, 11);
    let centred = unit_particle(r.at(4.0), 0.2);
    let hit = particle_ray_footprint(&centred, &cam, 2.0).into_iter().find(|h| h.ray_id == cam.ray_id(7, 11)).unwrap();
    assert!(hit.lambda.abs() < 1e-12);
    assert!((hit.t_chi - 4.0).abs() < 1e-12);

    // One-pixel camera, particle exactly qζ off its single ray.
    let one = Camera::look_at(
        Vec3::new(0.0, 0.0, -5.0),
        Vec3::default(),
        Vec3::new(0.0, 1.0, 0.0),
        Projection::Orthographic { width: 1.0, height: 1.0 },
        1,
        1,
        0.0,
        10.0,
    )
    .unwrap();
    let off = unit_particle(Vec3::new(0.5, 0.0, 0.0), 0.25);
    assert!(particle_ray_footprint(&off, &one, 2.0).is_empty());
    let behind = unit_particle(Vec3::new(0.0, 0.0, -9.0), 0.25);
    assert!(particle_ray_footprint(&behind, &one, 2.0).is_empty());
}

#[test]
fn sorting_matches_reference() {
    assert!(ray_streams::<i64>(&[]).next().is_none());
    let mut rng = common::rng(4);
    let mut knots: Vec<QuantizedKnot<i64>> = (0..1000)
        .map(|i| QuantizedKnot {
            ray_id: rng.gen_range(0..20),
            t_bar: rng.gen_range(-50..50),
            b: [i, 0, 0, 0, 0, 0, 0],
        })
        .collect();
    let mut reference = knots.clone();
    // Insertion sort keyed on (ray, position) is stable.
    for i in 1..reference.len() {
        let mut j = i;
        while j > 0 && (reference[j - 1].ray_id, reference[j - 1].t_bar) > (reference[j].ray_id, reference[j].t_bar) {
            reference.swap(j - 1, j);
            j -= 1;
        }
    }
    sort_knots(&mut knots);
    assert_eq!(knots, reference);
    let streams: Vec<_> = ray_streams(&knots).collect();
    assert!(streams.iter().all(|s| s.iter().all(|k| k.ray_id == s[0].ray_id)));
    assert!(streams.windows(2).all(|w| w[0][0].ray_id < w[1][0].ray_id));
}

/// Sorted knots of a set of particles on all rays of a 16×16 camera.
fn ray_knots(particles: &[Particle], lut: &sphpoly_core::lut::Lut, quanta: &QuantaConfig) -> Vec<QuantizedKnot<i64>> {
    let cam = common::ortho_camera(16);
    let mut out = Vec::new();
    for (i, p) in particles.iter().enumerate() {
        emit_particle(i, p, &cam, lut, quanta, &mut out).unwrap();
    }
    sort_knots(&mut out);
    out
}

fn field_at(field: &RayField<i64>, x: i64) -> i64 {
    field
        .pieces
        .iter()
        .find(|p| p.start <= x && x < p.end)
        .map_or(0, |p| exact_piece_value(&p.coeffs, p.start, x).unwrap())
}

#[test]
fn superposition_and_order_independence() {
    let lut = common::small_lut(4, 3, 32);
    let mut rng = common::rng(8);
    let particles: Vec<Particle> = (0..40).map(|_| common::random_particle(&mut rng)).collect();
    let quanta = common::quanta_for(&particles, &lut, IntWidth::W64);
    let all = ray_knots(&particles, &lut, &quanta);
    let (a, b) = particles.split_at(17);
    let ka = ray_knots(a, &lut, &quanta);
    let kb = ray_knots(b, &lut, &quanta);
    let mut shuffled = particles.clone();
    shuffled.shuffle(&mut rng);
    let ks = ray_knots(&shuffled, &lut, &quanta);
    let group = |k: &[QuantizedKnot<i64>]| -> std::collections::BTreeMap<u32, RayField<i64>> {
        ray_streams(k).map(|s| (s[0].ray_id, accumulate_quantized(s, 3).unwrap())).collect()
    };
    let (fall, fa, fb, fs) = (group(&all), group(&ka), group(&kb), group(&ks));
    assert_eq!(fall, fs, "shuffling changed the accumulated fields");
    for (ray, f) in &fall {
        assert!(f.residual.iter().all(|c| *c == 0));
        let lo = f.pieces.first().unwrap().start;
        let hi = f.pieces.last().unwrap().end;
        for _ in 0..25 {
            let x = rng.gen_range(lo - 10..hi + 10);
            let sa = fa.get(ray).map_or(0, |f| field_at(f, x));
            let sb = fb.get(ray).map_or(0, |f| field_at(f, x));
            assert_eq!(field_at(f, x), sa + sb);
        }
        // Nothing after the last knot.
        assert_eq!(field_at(f, hi), 0);
        assert_eq!(field_at(f, hi + 1_000_000), 0);
    }
}

#[test]
fn accumulation_cost_is_quadratic_in_degree() {
    for d in 1..=6 {
        let lut = common::small_lut(2, d, 8);
        let mut rng = common::rng(d as u64);
        let particles: Vec<Particle> = (0..30).map(|_| common::random_particle(&mut rng)).collect();
        let quanta = common::quanta_for(&particles, &lut, IntWidth::W64);
        let knots = ray_knots(&particles, &lut, &quanta);
        for s in ray_streams(&knots) {
            let f = accumulate_quantized(s, d).unwrap();
            assert!(f.ops <= 8 * (d * d) as u64 * s.len() as u64, "D={d}: {} ops for {} knots", f.ops, s.len());
        }
    }
}

#[test]
fn piece_evaluation_against_expansion() {
    let mut rng = common::rng(2);
    let q = QuantaConfig::new(0.013, 2.5e-9, IntWidth::W64).unwrap();
    for _ in 0..100 {
        let mut c = [0i64; 7];
        for v in c.iter_mut() {
            *v = rng.gen_range(-1_000_000..1_000_000);
        }
        let start = rng.gen_range(-1000..1000);
        for _ in 0..10 {
            let t = (start as f64 + rng.gen_range(0.0..50.0)) * q.tau;
            let x = t / q.tau - start as f64;
            let want: f64 = (0..7).map(|d| q.sigma * c[d] as f64 * x.powi(d as i32)).sum();
            let scale: f64 = (0..7).map(|d| (q.sigma * c[d] as f64 * x.powi(d as i32)).abs()).sum();
            assert!((evaluate_piece(&c, start, &q, t) - want).abs() <= 1e-12 * scale);
        }
    }
    let mut c = [0i64; 7];
    assert_eq!(evaluate_piece(&c, 5, &q, 1.0), 0.0);
    c[0] = 77;
    assert_eq!(evaluate_piece(&c, 5, &q, 5.0 * q.tau), 77.0 * q.sigma);
}

#[test]
fn constant_absorber_transmittance() {
    let sigma_abs = 0.8;
    let tf = TransferFunction::new(vec![
        TfPoint { value: 0.0, rgb: [0.0; 3], absorption: 0.0 },
        TfPoint { value: 1.0, rgb: [0.0; 3], absorption: sigma_abs },
    ])
    .unwrap();
    let q = QuantaConfig::new(0.01, 1e-6, IntWidth::W64).unwrap();
    let mut coeffs = [0i64; 7];
    coeffs[0] = 2_000_000; // value 2.0, clamped to the last control point
    let piece = FieldPiece { start: 100i64, end: 350, coeffs };
    let len = 2.5;
    let opts = CompositeOptions { step: len / 32.0, background: [1.0, 1.0, 1.0], near: 0.0, far: 10.0 };
    let rgba = composite(&[piece], &q, &tf, &opts);
    let t = (-sigma_abs * len).exp();
    assert!(((1.0 - rgba[3]) - t).abs() <= 0.01 * t);
    assert!((rgba[0] - t).abs() <= 0.01 * t);
}
