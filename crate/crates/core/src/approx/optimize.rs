use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ApproxConfig, EvenPiecewise, FixedKnotSolution, KnotVector, Projector};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::{Error, Result};

/// Settings of the multi-start knot optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Total number of Nelder–Mead starts (warm or equidistant start included).
    pub starts: usize,
    pub seed: u64,
    pub simplex: NelderMeadOptions,
    /// Maximum number of restart sweeps from the incumbent.
    pub max_sweeps: usize,
    /// A sweep that improves the relative error by less than this ends the
    /// search.
    pub sweep_tol: f64,
    /// ... as does an improvement below this fraction of the incumbent.
    pub sweep_rtol: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            simplex: NelderMeadOptions::default(),
            max_sweeps: 20,
            sweep_tol: 1e-12,
            sweep_rtol: 1e-9,
        }
    }
}

/// Width of the band below `q` where `B_Λ` is approximated by zero.
pub(crate) const NEAR_SUPPORT_FRACTION: f64 = 1e-3;

const PENALTY_DEGENERATE: f64 = 2.0;

/// Finds knots minimizing `E_Λ` for `Λ ∈ [0, q)`.
///
/// The knots are parametrized by the logarithms of their gaps, which keeps
/// every candidate strictly ordered and positive. Candidates beyond `q` are
/// penalized. The objective is `E_Λ/‖B_Λ‖`; the returned solution carries
/// the absolute `E_Λ`.
pub fn optimize_knots(
    projector: &Projector<'_>,
    lambda: f64,
    cfg: &ApproxConfig,
    warm_start: Option<&KnotVector>,
    opts: &OptimizeOptions,
) -> Result<(KnotVector, FixedKnotSolution)> {
    let kernel = projector.kernel();
    let q = kernel.q();
    let m = cfg.positive_knots();
    let support = kernel.support_half_length(lambda);
    let norm = projector.target_norm(lambda)?;

    if cfg.dimension() == 0 || lambda > q - NEAR_SUPPORT_FRACTION * q || norm == 0.0 {
        let end = if support > 0.0 { support } else { q };
        let knots = match warm_start {
            Some(w) if w.len() == m && w.last() <= q => w.clone(),
            _ => KnotVector::equidistant(m, end)?,
        };
        let sol = zero_solution(lambda, &knots, cfg, norm)?;
        return Ok((knots, sol));
    }

    let objective = |u: &[f64]| -> f64 {
        let theta = knots_from_gaps(u);
        let last = *theta.last().unwrap();
        if last > q {
            return 1.0 + (last - q);
        }
        let Ok(kv) = KnotVector::new(theta) else { return PENALTY_DEGENERATE };
        match projector.project(lambda, &kv, cfg, Some(norm)) {
            Ok(s) => s.error / norm,
            Err(_) => PENALTY_DEGENERATE,
        }
    };

    let first = match warm_start {
        Some(w) if w.len() == m => w.clone(),
        _ => KnotVector::equidistant(m, support)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, lambda));
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(opts.starts.max(1));
    starts.push(gaps_from_knots(first.as_slice()));
    while starts.len() < opts.starts.max(1) {
        let mut theta: Vec<f64> = (0..m).map(|_| rng.gen_range(0.02..1.0) * support).collect();
        theta.sort_by(f64::total_cmp);
        theta.dedup();
        if theta.len() == m {
            starts.push(gaps_from_knots(&theta));
        }
    }

    let mut best_u = starts[0].clone();
    let mut best_f = objective(&best_u);
    for u0 in &starts {
        let r = nelder_mead(&objective, u0, &opts.simplex);
        if r.f < best_f {
            best_f = r.f;
            best_u = r.x;
        }
    }

    let mut converged = false;
    for _ in 0..opts.max_sweeps {
        let r = nelder_mead(&objective, &best_u, &opts.simplex);
        let improvement = best_f - r.f;
        if r.f < best_f {
            best_f = r.f;
            best_u = r.x;
        }
        if improvement < opts.sweep_tol || improvement < opts.sweep_rtol * best_f {
            converged = true;
            break;
        }
    }
    let theta = knots_from_gaps(&best_u);
    if !converged {
        return Err(Error::NonConvergence {
            lambda,
            best_error: best_f * norm,
            best_knots: Box::from(theta.as_slice()),
        });
    }
    let knots = KnotVector::new(theta)?;
    let sol = projector.project(lambda, &knots, cfg, Some(norm))?;
    Ok((knots, sol))
}

fn zero_solution(lambda: f64, knots: &KnotVector, cfg: &ApproxConfig, norm: f64) -> Result<FixedKnotSolution> {
    let basis = super::gram_schmidt(&super::nonorthogonal_basis(knots, cfg))?;
    Ok(FixedKnotSolution {
        lambda,
        knots: knots.clone(),
        coefficients: alloc::vec![0.0; basis.len()],
        basis,
        approximation: EvenPiecewise::zero(knots.as_slice(), cfg.d()),
        error: norm,
        target_norm: norm,
    })
}

fn knots_from_gaps(u: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    u.iter()
        .map(|&x| {
            acc += libm::exp(x);
            acc
        })
        .collect()
}

fn gaps_from_knots(theta: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    theta
        .iter()
        .map(|&t| {
            let g = libm::log(t - prev);
            prev = t;
            g
        })
        .collect()
}

fn mix_seed(seed: u64, lambda: f64) -> u64 {
    let mut z = seed ^ lambda.to_bits().wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
