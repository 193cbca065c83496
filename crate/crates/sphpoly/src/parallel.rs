//! Rayon drivers for the table build and the three-sweep renderer. Both
//! produce results bit-identical to the sequential versions in the core
//! crate.

use rayon::prelude::*;
use sphpoly_core::approx::{ApproxConfig, Projector};
use sphpoly_core::geometry::Camera;
use sphpoly_core::kernel::PiecewisePolynomialKernel;
use sphpoly_core::lut::{lambda_grid, refine_entry, seed_pass, BuildOptions, Lut};
use sphpoly_core::quantize::{IntWidth, Particle, QuantaConfig, QuantizedKnot};
use sphpoly_core::raycast::{
    emit_particle, ray_streams, shade_stream, CompositeOptions, RenderOutput, TransferFunction,
};
use sphpoly_core::scalar::QuantInt;

use crate::error::{Error, Result};

/// Runs `f` on a pool with `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None | Some(0) => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Usage(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Sequential seed chain, then every entry refined in parallel.
pub fn build_lut(kernel: &PiecewisePolynomialKernel, cfg: &ApproxConfig, opts: &BuildOptions) -> Result<Lut> {
    let projector = Projector::new(kernel);
    let grid = lambda_grid(kernel.q(), opts.n);
    let seeds = seed_pass(&projector, cfg, &grid, opts)?;
    let entries = grid
        .par_iter()
        .enumerate()
        .map(|(i, &l)| refine_entry(&projector, cfg, i, l, &seeds, opts))
        .collect::<sphpoly_core::Result<Vec<_>>>()?;
    Ok(Lut::new(kernel.id(), kernel.q(), *cfg, entries)?)
}

/// Three sweeps: knot emission per particle, a stable sort by
/// `(ray, position)`, then accumulation and compositing per ray.
/// Particles and rays that overflow are counted and skipped.
pub fn render<I: QuantInt>(
    particles: &[Particle],
    camera: &Camera,
    lut: &Lut,
    quanta: &QuantaConfig,
    tf: &TransferFunction,
    opts: &CompositeOptions,
) -> RenderOutput {
    let emitted: Vec<_> = particles
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut local = Vec::new();
            emit_particle::<I>(i, p, camera, lut, quanta, &mut local).map(|()| local)
        })
        .collect();
    let mut knots: Vec<QuantizedKnot<I>> = Vec::new();
    let (mut overflow_count, mut first_error, mut on_screen) = (0, None, 0);
    for r in emitted {
        match r {
            Ok(local) => {
                on_screen += usize::from(!local.is_empty());
                knots.extend(local);
            }
            Err(e) => {
                overflow_count += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    knots.par_sort_by_key(|k| (k.ray_id, k.t_bar));

    let d = lut.config().d();
    let streams: Vec<&[QuantizedKnot<I>]> = ray_streams(&knots).collect();
    let shaded: Vec<_> = streams.par_iter().map(|s| (s[0].ray_id, shade_stream(s, d, quanta, tf, opts))).collect();
    let empty = sphpoly_core::raycast::composite::<I>(&[], quanta, tf, opts);
    let mut pixels = vec![empty; camera.ray_count()];
    for (id, r) in shaded {
        match r {
            Ok(px) => pixels[id as usize] = px,
            Err(e) => {
                overflow_count += 1;
                first_error.get_or_insert(e);
                pixels[id as usize] = [opts.background[0], opts.background[1], opts.background[2], 0.0];
            }
        }
    }
    RenderOutput {
        width: camera.width(),
        height: camera.height(),
        pixels,
        knot_count: knots.len(),
        particles_on_screen: on_screen,
        overflow_count,
        first_error,
    }
}

/// [`render`] with the integer type chosen at run time.
pub fn render_width(
    width: IntWidth,
    particles: &[Particle],
    camera: &Camera,
    lut: &Lut,
    quanta: &QuantaConfig,
    tf: &TransferFunction,
    opts: &CompositeOptions,
) -> RenderOutput {
    match width {
        IntWidth::W32 => render::<i32>(particles, camera, lut, quanta, tf, opts),
        IntWidth::W64 => render::<i64>(particles, camera, lut, quanta, tf, opts),
        IntWidth::W128 => render::<i128>(particles, camera, lut, quanta, tf, opts),
    }
}
