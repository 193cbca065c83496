use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphpoly::oracle::{self, OracleKernel};
use sphpoly::validate::{self, Scene};
use sphpoly::{cli, parallel, report, scene};
use sphpoly_core::approx::{project_fixed_knots, ApproxConfig, KnotVector};
use sphpoly_core::geometry::Vec3;
use sphpoly_core::kernel::PiecewisePolynomialKernel;
use sphpoly_core::lut::{BuildOptions, Lut};
use sphpoly_core::quantize::{dataset_stats, IntWidth, Particle, QuantizedKnot, DEFAULT_CLUSTER_FACTOR};
use sphpoly_core::raycast::{emit_particle, CompositeOptions};

fn cubic() -> PiecewisePolynomialKernel {
    PiecewisePolynomialKernel::cubic_spline()
}

fn lut(k: usize, d: usize, n: usize) -> Lut {
    let cfg = ApproxConfig::new(k, d).unwrap();
    parallel::build_lut(&cubic(), &cfg, &BuildOptions { n, ..Default::default() }).unwrap()
}

fn desk_lut() -> &'static Lut {
    static LUT: OnceLock<Lut> = OnceLock::new();
    LUT.get_or_init(|| lut(4, 3, 1024))
}

#[test]
fn dense_l2_reproduces_projection_error() {
    let k = cubic();
    let ok = OracleKernel::new(&k);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let kk = rng.gen_range(1..=5);
        let d = rng.gen_range(1..=4);
        let cfg = ApproxConfig::new(kk, d).unwrap();
        let lambda = rng.gen_range(0.0..1.8);
        let mut theta: Vec<f64> = (0..cfg.positive_knots()).map(|_| rng.gen_range(0.05..2.0)).collect();
        theta.sort_by(f64::total_cmp);
        let sol = project_fixed_knots(&k, lambda, &KnotVector::new(theta).unwrap(), &cfg).unwrap();
        let end = sol.knots.last().max(2.0);
        let dense = std::f64::consts::SQRT_2
            * oracle::l2_error_dense(|t| ok.ray_section(lambda, t), |t| sol.approximation.eval(t), 0.0, end, 1e-4);
        assert!((dense - sol.error).abs() <= 1e-6, "K={kk} D={d} Λ={lambda}: {dense} vs {}", sol.error);
    }
}

#[test]
fn a_max_bounds_the_desk_cluster() {
    let particles = scene::desk_scene();
    let lut = desk_lut();
    let stats = dataset_stats(&particles, lut.peak_amplitude(), DEFAULT_CLUSTER_FACTOR).unwrap();
    let camera = scene::desk_camera().build().unwrap();
    let field_max = oracle::sampled_field_max(&OracleKernel::new(&cubic()), &particles, &camera, 1, 1e-3);
    assert!(field_max <= stats.a_max, "{field_max} > {}", stats.a_max);
    // Without the clustering factor the bound is a single particle's peak,
    // which the field reaches near that particle's centre.
    let single = stats.a_max / DEFAULT_CLUSTER_FACTOR;
    assert!(single <= 1.05 * field_max, "{single} vs {field_max}");
}

#[test]
fn touched_rays_match_the_oracle_footprint() {
    let k = cubic();
    let ok = OracleKernel::new(&k);
    let particles = scene::desk_scene();
    let lut = desk_lut();
    let camera = scene::desk_camera().build().unwrap();
    let (_, quanta) = cli::scene_quanta(&k, lut, &particles, IntWidth::W64, None).unwrap();
    let mut knots: Vec<QuantizedKnot<i64>> = Vec::new();
    for (i, p) in particles.iter().enumerate() {
        emit_particle(i, p, &camera, lut, &quanta, &mut knots).unwrap();
    }
    let touched: BTreeSet<u32> = knots.iter().map(|k| k.ray_id).collect();
    let mut expected = BTreeSet::new();
    for py in 0..camera.height() {
        for px in 0..camera.width() {
            if oracle::support_interval(&ok, &particles, &camera.ray(px, py)).is_some() {
                expected.insert(camera.ray_id(px, py));
            }
        }
    }
    assert_eq!(touched, expected);
}

#[test]
fn render_matches_fine_ray_march() {
    let k = cubic();
    let ok = OracleKernel::new(&k);
    let c = k.constants().unwrap();
    let particles = scene::desk_scene();
    let lut = desk_lut();
    let mut spec = scene::desk_camera();
    spec.width = 32;
    spec.height = 32;
    let camera = spec.build().unwrap();
    let tf = scene::desk_transfer_function();
    let (stats, quanta) = cli::scene_quanta(&k, lut, &particles, IntWidth::W64, None).unwrap();
    let step = 0.25 / 64.0;
    let opts = CompositeOptions { step, background: [0.0; 3], near: camera.near(), far: camera.far() };
    let img = parallel::render_width(IntWidth::W64, &particles, &camera, lut, &quanta, &tf, &opts);
    assert_eq!(img.overflow_count, 0);
    let mut total = 0.0;
    for py in 0..camera.height() {
        for px in 0..camera.width() {
            let want =
                oracle::ray_march(&ok, &particles, &camera.ray(px, py), tf.points(), camera.near(), camera.far(), step);
            let got = img.pixels[camera.ray_id(px, py) as usize];
            total += (0..4).map(|i| (got[i] - want[i]).abs()).fold(0.0, f64::max);
        }
    }
    let mean = total / camera.ray_count() as f64;
    let q_d = report::quantization_estimate(3, &c, k.q(), &quanta, &stats);
    let combined = report::combined_error(lut.e_star(&c), q_d);
    assert!(mean <= validate::ENVELOPE_SLACK * combined, "mean ΔE {mean} vs combined {combined}");
}

#[test]
fn validate_groups_on_the_desk_scene() {
    let k = cubic();
    let particles = scene::desk_scene();
    let lut = desk_lut();
    let mut spec = scene::desk_camera();
    spec.width = 24;
    spec.height = 24;
    let camera = spec.build().unwrap();
    for width in [IntWidth::W64, IntWidth::W128] {
        let (_, quanta) = cli::scene_quanta(&k, lut, &particles, width, None).unwrap();
        let scene = Scene { kernel: &k, lut, quanta: &quanta, particles: &particles, camera: &camera };
        let rep = validate::run(&scene, 1.0, 3);
        assert_eq!(rep.groups.len(), 3);
        assert!(rep.groups.iter().take(2).all(|g| g.passed && g.checked > 0), "{rep:?}");
    }
}

fn small_tables() -> &'static Vec<Lut> {
    static TABLES: OnceLock<Vec<Lut>> = OnceLock::new();
    TABLES
        .get_or_init(|| [(1, 2), (2, 1), (3, 2), (4, 3), (5, 2), (6, 1)].iter().map(|&(k, d)| lut(k, d, 16)).collect())
}

fn particle_strategy() -> impl Strategy<Value = Particle> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.2f64..3.0, 0.2f64..3.0, 0.08f64..0.6, -3.0f64..3.0).prop_map(
        |(x, y, z, mass, density, h, value)| Particle { position: Vec3::new(x, y, z), mass, density, h, value },
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    /// The big-integer replay agrees with production quantization for
    /// even and odd K and both wide integer types.
    #[test]
    fn big_integer_replay(particles in prop::collection::vec(particle_strategy(), 1..6), t in 0usize..6, wide in any::<bool>()) {
        let k = cubic();
        let lut = &small_tables()[t];
        let camera = sphpoly::io::CameraSpec::orthographic_z(12, 1.6, 5.0).build().unwrap();
        let width = if wide { IntWidth::W128 } else { IntWidth::W64 };
        let (_, quanta) = cli::scene_quanta(&k, lut, &particles, width, None).unwrap();
        let scene = Scene { kernel: &k, lut, quanta: &quanta, particles: &particles, camera: &camera };
        let g = if wide { validate::telescoping::<i128>(&scene) } else { validate::telescoping::<i64>(&scene) };
        prop_assert!(g.passed, "{:?}", g);
        let s = if wide { validate::superposition::<i128>(&scene, 1, 16) } else { validate::superposition::<i64>(&scene, 1, 16) };
        prop_assert!(s.passed, "{:?}", s);
    }
}
