use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core numerics.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Kernel pieces do not tile `[0, q]` or the kernel is discontinuous.
    InvalidKernel(String),
    /// A configuration value is outside its admissible range.
    InvalidConfig(String),
    /// Adaptive quadrature did not reach its tolerance on `[lo, hi]`.
    Quadrature { lo: f64, hi: f64 },
    /// Gram–Schmidt produced a (numerically) vanishing element.
    DegenerateKnots { element: (usize, usize), relative_norm: f64 },
    /// The knot optimizer exhausted its sweep budget.
    NonConvergence { lambda: f64, best_error: f64, best_knots: Box<[f64]> },
    /// An approximation was not continuous at a knot.
    Continuity { knot: usize, jump: f64 },
    /// Look-up table construction failed at one entry.
    LutEntry { index: usize, lambda: f64, source: Box<Error> },
    /// A quantized quantity does not fit the configured integer width.
    Overflow { context: &'static str },
    /// Quantization of one particle overflowed.
    ParticleOverflow { particle: usize, context: &'static str },
    /// Integer accumulation along a ray overflowed.
    RayOverflow { ray: u32, position: f64 },
    /// A knot stream was not sorted by position.
    Unsorted { ray: u32, position: f64, previous: f64 },
    /// A stream left non-zero coefficients after its last knot.
    Residual { ray: u32 },
    /// No finite minimizing length quantum exists (degree zero).
    NoPositionalMinimum,
    /// Statistics were requested for an empty particle set.
    EmptyDataset,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidKernel(msg) => write!(f, "invalid kernel: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Quadrature { lo, hi } => {
                write!(f, "quadrature did not converge on [{lo}, {hi}]")
            }
            Error::DegenerateKnots { element, relative_norm } => write!(
                f,
                "degenerate knots: basis element ({}, {}) collapsed to relative norm {relative_norm:e}",
                element.0, element.1
            ),
            Error::NonConvergence { lambda, best_error, best_knots } => write!(
                f,
                "knot optimizer did not converge at lambda={lambda} (best error {best_error:e} at {best_knots:?})"
            ),
            Error::Continuity { knot, jump } => {
                write!(f, "approximation jumps by {jump:e} at knot {knot}")
            }
            Error::LutEntry { index, lambda, source } => {
                write!(f, "look-up table entry {index} (lambda={lambda}): {source}")
            }
            Error::Overflow { context } => write!(f, "integer overflow in {context}"),
            Error::ParticleOverflow { particle, context } => {
                write!(f, "integer overflow quantizing particle {particle} ({context})")
            }
            Error::RayOverflow { ray, position } => {
                write!(f, "integer overflow accumulating ray {ray} at knot position {position}")
            }
            Error::Unsorted { ray, position, previous } => {
                write!(f, "knot stream of ray {ray} is unsorted: {position} follows {previous}")
            }
            Error::Residual { ray } => {
                write!(f, "ray {ray} has non-zero coefficients after its last knot")
            }
            Error::NoPositionalMinimum => f.write_str(
                "quantization error has no finite minimizer for degree 0; an explicit length quantum is required",
            ),
            Error::EmptyDataset => f.write_str("particle set is empty"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::LutEntry { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
