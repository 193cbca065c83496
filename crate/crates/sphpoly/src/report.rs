//! Error summaries and the render report (JSON).

use serde::Serialize;
use sphpoly_core::kernel::{KernelConstants, PiecewisePolynomialKernel};
use sphpoly_core::lut::Lut;
use sphpoly_core::quantize::{choose_quanta, quantization_error, DatasetStats, IntWidth, QuantaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantaReport {
    pub int_width: u32,
    pub tau: f64,
    pub sigma: f64,
}

impl From<&QuantaConfig> for QuantaReport {
    fn from(q: &QuantaConfig) -> Self {
        Self { int_width: q.int_width.bits(), tau: q.tau, sigma: q.sigma }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatsReport {
    pub a_max: f64,
    pub mass: f64,
    pub density: f64,
    pub h: f64,
    pub value: f64,
    pub phi_repr: f64,
    /// `a_max/(φ_repr·w(0))`.
    pub variance: f64,
}

impl StatsReport {
    pub fn new(s: &DatasetStats, w0: f64) -> Self {
        Self {
            a_max: s.a_max,
            mass: s.mass,
            density: s.density,
            h: s.h,
            value: s.value,
            phi_repr: s.phi_repr,
            variance: s.variance(w0),
        }
    }
}

/// `Q_D` of the chosen quanta relative to the representative particle.
pub fn quantization_estimate(
    degree: usize,
    c: &KernelConstants,
    q: f64,
    quanta: &QuantaConfig,
    stats: &DatasetStats,
) -> f64 {
    quantization_error(degree, c, q, quanta.tau / stats.h, quanta.sigma / stats.phi_repr.abs())
}

/// `√(E*² + Q_D²)`.
pub fn combined_error(e_star: f64, q_d: f64) -> f64 {
    e_star.hypot(q_d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRow {
    pub k: usize,
    pub d: usize,
    pub lut_entries: usize,
    pub e_star: f64,
    pub q_d: f64,
    pub combined: f64,
    pub quanta: QuantaReport,
}

/// One row of the error table for a built table, an integer width and a
/// data variance factor.
pub fn error_row(
    kernel: &PiecewisePolynomialKernel,
    lut: &Lut,
    width: IntWidth,
    variance: f64,
) -> sphpoly_core::Result<ErrorRow> {
    let c = kernel.constants()?;
    let cfg = lut.config();
    let stats = DatasetStats::from_variance(variance, 1.0, 1.0, 1.0, 1.0, kernel.eval(0.0))?;
    let quanta = choose_quanta(cfg.d(), &c, kernel.q(), &stats, width)?;
    let e_star = lut.e_star(&c);
    let q_d = quantization_estimate(cfg.d(), &c, kernel.q(), &quanta, &stats);
    Ok(ErrorRow {
        k: cfg.k(),
        d: cfg.d(),
        lut_entries: lut.len(),
        e_star,
        q_d,
        combined: combined_error(e_star, q_d),
        quanta: (&quanta).into(),
    })
}

/// Trend flags over an error grid: `E*` falls in `K` and in `D`, `Q_D`
/// rises in `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Trends {
    pub e_star_falls_in_k: bool,
    pub e_star_falls_in_d: bool,
    pub q_d_rises_in_d: bool,
}

pub fn trends(rows: &[ErrorRow]) -> Trends {
    let find = |k: usize, d: usize| rows.iter().find(|r| r.k == k && r.d == d);
    let mut t = Trends { e_star_falls_in_k: true, e_star_falls_in_d: true, q_d_rises_in_d: true };
    for r in rows {
        if let Some(n) = find(r.k + 1, r.d) {
            t.e_star_falls_in_k &= n.e_star < r.e_star;
        }
        if let Some(n) = find(r.k, r.d + 1) {
            t.e_star_falls_in_d &= n.e_star <= r.e_star;
            t.q_d_rises_in_d &= n.q_d > r.q_d;
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub kernel_id: String,
    pub kappa: f64,
    pub kappa_prime: f64,
    pub variance: f64,
    pub rows: Vec<ErrorRow>,
    pub trends: Trends,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderReport {
    pub kernel_id: String,
    pub k: usize,
    pub d: usize,
    pub lut_entries: usize,
    pub width: u32,
    pub height: u32,
    pub quanta: QuantaReport,
    pub stats: StatsReport,
    pub e_star: f64,
    pub q_d: f64,
    pub combined: f64,
    pub particles: usize,
    pub particles_on_screen: usize,
    pub knot_count: usize,
    pub overflow_count: usize,
    pub first_error: Option<String>,
}
