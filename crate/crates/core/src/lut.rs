//! Distance-indexed look-up table of optimal ray approximations.
//!
//! Entry `i` describes the normalized particle seen from a ray at distance
//! `Λ_i = (i + ½)·q/N`. It stores the positive knots `θ_k` and the
//! localized difference coefficients `ŝ_kd` for `(k, d) ∈ J`; all other
//! coefficients follow from evenness and continuity.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::approx::{
    optimize_knots, ApproxConfig, EvenPiecewise, FixedKnotSolution, KnotVector, OptimizeOptions, Projector,
};
use crate::kernel::{KernelConstants, PiecewisePolynomialKernel};
use crate::poly::taylor_shift;
use crate::quantize::{close_knots, Coeffs, Knot};
use crate::raycast::{accumulate, FieldPiece};
use crate::{Error, Result, MAX_DEGREE};

/// Largest tolerated value jump of an approximation at a knot.
pub const CONTINUITY_TOLERANCE: f64 = 1e-9;

/// One table row.
#[derive(Debug, Clone, PartialEq)]
pub struct LutEntry {
    pub lambda: f64,
    /// `E_Λ` of the stored approximation.
    pub error: f64,
    /// Positive knots `θ_1, …, θ_m`.
    pub theta: Vec<f64>,
    /// `ŝ_kd` in lexicographic order of `J`.
    pub s_hat: Vec<f64>,
}

/// Grid `Λ_i = (i + ½)·q/N`.
pub fn lambda_grid(q: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) * q / n as f64).collect()
}

/// Localized difference coefficients of an even approximation at each
/// positive knot: the Taylor coefficients about `θ_k` of the piece to the
/// right minus those of the piece to the left.
pub fn difference_coefficients(approx: &EvenPiecewise) -> Result<Vec<Coeffs<f64>>> {
    let m = approx.pieces();
    let deg = approx.degree();
    let scale = approx.sampled_max_abs(8).max(1.0);
    let mut out = Vec::with_capacity(m);
    for k in 1..=m {
        let (_, h) = approx.piece_interval(k);
        let mut left = approx.global(k);
        taylor_shift(&mut left, h);
        let right = if k < m { approx.global(k + 1) } else { vec![0.0; deg + 1] };
        let mut c = [0.0; MAX_DEGREE + 1];
        for d in 0..=deg {
            c[d] = right[d] - left[d];
        }
        if c[0].abs() > CONTINUITY_TOLERANCE * scale {
            return Err(Error::Continuity { knot: k, jump: c[0] });
        }
        c[0] = 0.0;
        out.push(c);
    }
    Ok(out)
}

/// The stored coefficients `ŝ_kd`, `(k, d) ∈ J`, of a projection.
pub fn to_difference_coefficients(solution: &FixedKnotSolution, cfg: &ApproxConfig) -> Result<Vec<f64>> {
    let full = difference_coefficients(&solution.approximation)?;
    Ok(cfg.index_set().into_iter().map(|(k, d)| full[k - 1][d]).collect())
}

impl LutEntry {
    pub fn from_solution(solution: &FixedKnotSolution, cfg: &ApproxConfig) -> Result<Self> {
        Ok(Self {
            lambda: solution.lambda,
            error: solution.error,
            theta: solution.knots.as_slice().to_vec(),
            s_hat: to_difference_coefficients(solution, cfg)?,
        })
    }

    /// All knots of the approximation centred at 0, in floating point.
    pub fn knots(&self, cfg: &ApproxConfig) -> Vec<Knot<f64>> {
        let mut positive = vec![[0.0; MAX_DEGREE + 1]; cfg.positive_knots()];
        for (&(k, d), &s) in cfg.index_set().iter().zip(&self.s_hat) {
            positive[k - 1][d] = s;
        }
        close_knots(cfg, 0.0, &self.theta, &positive).expect("floating-point closure cannot overflow")
    }

    /// Pieces obtained by running the update rule over [`Self::knots`]
    /// together with the coefficients left after the last knot.
    pub fn pieces(&self, cfg: &ApproxConfig) -> (Vec<FieldPiece<f64>>, Coeffs<f64>) {
        let field = accumulate(&self.knots(cfg), cfg.d(), 0).expect("floating-point accumulation cannot fail");
        (field.pieces, field.residual)
    }

    /// Evaluates the reconstructed approximation.
    pub fn eval(&self, cfg: &ApproxConfig, t: f64) -> f64 {
        let (pieces, _) = self.pieces(cfg);
        pieces
            .iter()
            .find(|p| t >= p.start && t <= p.end)
            .map(|p| crate::poly::horner(&p.coeffs[..=cfg.d()], t - p.start))
            .unwrap_or(0.0)
    }
}

/// A complete table for one kernel and configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Lut {
    kernel_id: String,
    q: f64,
    cfg: ApproxConfig,
    entries: Vec<LutEntry>,
}

impl Lut {
    /// Validates that `entries` sit on the midpoint grid and have the shape
    /// implied by `cfg`.
    pub fn new(kernel_id: impl Into<String>, q: f64, cfg: ApproxConfig, entries: Vec<LutEntry>) -> Result<Self> {
        let n = entries.len();
        if n < 2 {
            return Err(Error::InvalidConfig(alloc::format!("a table needs at least 2 entries, got {n}")));
        }
        let grid = lambda_grid(q, n);
        for (i, (e, &l)) in entries.iter().zip(&grid).enumerate() {
            if (e.lambda - l).abs() > 1e-12 * q
                || e.theta.len() != cfg.positive_knots()
                || e.s_hat.len() != cfg.dimension()
            {
                return Err(Error::InvalidConfig(alloc::format!("entry {i} does not match the grid or configuration")));
            }
        }
        Ok(Self { kernel_id: kernel_id.into(), q, cfg, entries })
    }

    pub fn kernel_id(&self) -> &str {
        &self.kernel_id
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn config(&self) -> ApproxConfig {
        self.cfg
    }

    pub fn entries(&self) -> &[LutEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Grid spacing `q/N`.
    pub fn spacing(&self) -> f64 {
        self.q / self.entries.len() as f64
    }

    /// Index of the entry nearest to `lambda`, ties going to the lower
    /// index; `None` for `Λ ≥ q`.
    pub fn nearest_index(&self, lambda: f64) -> Option<usize> {
        if !(lambda < self.q) {
            return None;
        }
        let n = self.entries.len();
        let x = lambda * n as f64 / self.q - 0.5;
        let i = libm::ceil(x - 0.5).max(0.0) as usize;
        Some(i.min(n - 1))
    }

    /// Nearest entry; `None` stands for the zero approximation.
    pub fn lookup(&self, lambda: f64) -> Option<&LutEntry> {
        self.nearest_index(lambda).map(|i| &self.entries[i])
    }

    /// Overall relative error `E* = (1/κ)·(2π ∫₀^q Λ E_Λ² dΛ)^½` by the
    /// midpoint rule on the table grid.
    pub fn e_star(&self, c: &KernelConstants) -> f64 {
        let dl = self.spacing();
        let s: f64 = self.entries.iter().map(|e| e.lambda * e.error * e.error).sum();
        libm::sqrt(2.0 * PI * s * dl) / c.kappa
    }

    /// Largest `|S*_Λ|` over all entries, sampled at the knots and at 16
    /// interior points per piece.
    pub fn peak_amplitude(&self) -> f64 {
        let d = self.cfg.d();
        let mut peak: f64 = 0.0;
        for e in &self.entries {
            let (pieces, _) = e.pieces(&self.cfg);
            for p in &pieces {
                let len = p.end - p.start;
                for i in 0..=16 {
                    let v = crate::poly::horner(&p.coeffs[..=d], len * i as f64 / 16.0);
                    peak = peak.max(v.abs());
                }
            }
        }
        peak
    }
}

/// LUT build settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub n: usize,
    /// Every `seed_stride`-th entry is optimized in a sequential warm-start
    /// chain; all entries are then refined from their nearest lower seed.
    pub seed_stride: usize,
    pub optimize: OptimizeOptions,
    /// Optimizer starts when refining an entry from its seed; the warm
    /// start counts as one. Seeds always use `optimize.starts`.
    pub refine_starts: usize,
}

/// Default table size.
pub const DEFAULT_LUT_SIZE: usize = 1024;

impl Default for BuildOptions {
    fn default() -> Self {
        Self { n: DEFAULT_LUT_SIZE, seed_stride: 16, optimize: OptimizeOptions::default(), refine_starts: 8 }
    }
}

fn annotate(index: usize, lambda: f64) -> impl FnOnce(Error) -> Error {
    move |e| Error::LutEntry { index, lambda, source: alloc::boxed::Box::new(e) }
}

/// Optimizes the seed entries `0, stride, 2·stride, …` in order, each warm
/// started from the previous one.
pub fn seed_pass(
    projector: &Projector<'_>,
    cfg: &ApproxConfig,
    grid: &[f64],
    opts: &BuildOptions,
) -> Result<Vec<KnotVector>> {
    let stride = opts.seed_stride.max(1);
    let mut seeds: Vec<KnotVector> = Vec::with_capacity(grid.len() / stride + 1);
    for i in (0..grid.len()).step_by(stride) {
        let (knots, _) =
            optimize_knots(projector, grid[i], cfg, seeds.last(), &opts.optimize).map_err(annotate(i, grid[i]))?;
        seeds.push(knots);
    }
    Ok(seeds)
}

/// Optimizes entry `index`, warm started from its seed.
pub fn refine_entry(
    projector: &Projector<'_>,
    cfg: &ApproxConfig,
    index: usize,
    lambda: f64,
    seeds: &[KnotVector],
    opts: &BuildOptions,
) -> Result<LutEntry> {
    let warm = &seeds[index / opts.seed_stride.max(1)];
    let refine = OptimizeOptions { starts: opts.refine_starts, ..opts.optimize };
    let (_, sol) = optimize_knots(projector, lambda, cfg, Some(warm), &refine).map_err(annotate(index, lambda))?;
    LutEntry::from_solution(&sol, cfg).map_err(annotate(index, lambda))
}

/// Builds a table sequentially.
pub fn build_lut(kernel: &PiecewisePolynomialKernel, cfg: &ApproxConfig, opts: &BuildOptions) -> Result<Lut> {
    let projector = Projector::new(kernel);
    let grid = lambda_grid(kernel.q(), opts.n);
    let seeds = seed_pass(&projector, cfg, &grid, opts)?;
    let entries = grid
        .iter()
        .enumerate()
        .map(|(i, &l)| refine_entry(&projector, cfg, i, l, &seeds, opts))
        .collect::<Result<Vec<_>>>()?;
    Lut::new(kernel.id(), kernel.q(), *cfg, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(k: usize, d: usize, n: usize) -> Lut {
        let kernel = PiecewisePolynomialKernel::cubic_spline();
        let cfg = ApproxConfig::new(k, d).unwrap();
        build_lut(&kernel, &cfg, &BuildOptions { n, ..Default::default() }).unwrap()
    }

    #[test]
    fn two_entry_grid() {
        let lut = tiny(2, 1, 2);
        assert_eq!(lut.entries()[0].lambda, 0.5);
        assert_eq!(lut.entries()[1].lambda, 1.5);
    }

    #[test]
    fn lookup_rules() {
        let lut = tiny(2, 1, 8);
        let dl = lut.spacing();
        assert!(lut.lookup(3.0).is_none());
        assert!(lut.lookup(2.0).is_none());
        assert_eq!(lut.nearest_index(3.5 * dl), Some(3));
        assert_eq!(lut.nearest_index(4.0 * dl), Some(3));
        assert_eq!(lut.nearest_index(4.0 * dl + 1e-12), Some(4));
        assert_eq!(lut.nearest_index(0.0), Some(0));
    }

    #[test]
    fn reconstruction_telescopes() {
        for (k, d) in [(2, 1), (3, 3), (4, 2)] {
            let lut = tiny(k, d, 4);
            let cfg = lut.config();
            for e in lut.entries() {
                let (_, residual) = e.pieces(&cfg);
                let scale = e.s_hat.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                for r in residual {
                    assert!(r.abs() <= 1e-12 * scale, "K={k} D={d}: {residual:?}");
                }
            }
        }
    }
}
