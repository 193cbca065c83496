#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphpoly_core::approx::ApproxConfig;
use sphpoly_core::geometry::{Camera, Projection, Vec3};
use sphpoly_core::kernel::PiecewisePolynomialKernel;
use sphpoly_core::lut::{build_lut, BuildOptions, Lut};
use sphpoly_core::quantize::{choose_quanta, dataset_stats, IntWidth, Particle, QuantaConfig, DEFAULT_CLUSTER_FACTOR};

pub fn small_lut(k: usize, d: usize, n: usize) -> Lut {
    let kernel = PiecewisePolynomialKernel::cubic_spline();
    let cfg = ApproxConfig::new(k, d).unwrap();
    build_lut(&kernel, &cfg, &BuildOptions { n, ..Default::default() }).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_particle(rng: &mut ChaCha8Rng) -> Particle {
    Particle {
        position: Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        mass: rng.gen_range(0.5..2.0),
        density: rng.gen_range(0.5..2.0),
        h: rng.gen_range(0.15..0.5),
        value: rng.gen_range(0.5..2.0),
    }
}

pub fn ortho_camera(n: u32) -> Camera {
    Camera::look_at(
        Vec3::new(0.0, 0.0, -5.0),
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Projection::Orthographic { width: 3.0, height: 3.0 },
        n,
        n,
        0.0,
        10.0,
    )
    .unwrap()
}

pub fn quanta_for(particles: &[Particle], lut: &Lut, width: IntWidth) -> QuantaConfig {
    let kernel = PiecewisePolynomialKernel::cubic_spline();
    let c = kernel.constants().unwrap();
    let stats = dataset_stats(particles, lut.peak_amplitude(), DEFAULT_CLUSTER_FACTOR).unwrap();
    choose_quanta(lut.config().d(), &c, kernel.q(), &stats, width).unwrap()
}
