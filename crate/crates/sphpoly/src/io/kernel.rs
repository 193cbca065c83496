//! Kernel description files (JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sphpoly_core::kernel::{KernelPiece, PiecewisePolynomialKernel};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    pub kernel_id: String,
    pub q: f64,
    pub pieces: Vec<PieceFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceFile {
    pub lo: f64,
    pub hi: f64,
    /// Ascending coefficients in `r`.
    pub coeffs: Vec<f64>,
}

impl KernelFile {
    pub fn from_kernel(k: &PiecewisePolynomialKernel) -> Self {
        Self {
            kernel_id: k.id().to_string(),
            q: k.q(),
            pieces: k.pieces().iter().map(|p| PieceFile { lo: p.lo, hi: p.hi, coeffs: p.coeffs.clone() }).collect(),
        }
    }

    pub fn into_kernel(self) -> sphpoly_core::Result<PiecewisePolynomialKernel> {
        let pieces = self.pieces.into_iter().map(|p| KernelPiece { lo: p.lo, hi: p.hi, coeffs: p.coeffs }).collect();
        PiecewisePolynomialKernel::new(self.kernel_id, self.q, pieces)
    }
}

pub fn read_kernel_file(path: &Path) -> Result<PiecewisePolynomialKernel> {
    let bytes = super::read_bytes(path)?;
    let file: KernelFile = serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))?;
    file.into_kernel().map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_kernel_file(path: &Path, kernel: &PiecewisePolynomialKernel) -> Result<()> {
    let json = serde_json::to_vec_pretty(&KernelFile::from_kernel(kernel))?;
    super::write_bytes(path, &json)
}

/// A built-in kernel id or the path of a kernel file.
pub fn load_kernel(spec: &str) -> Result<PiecewisePolynomialKernel> {
    if let Some(k) = PiecewisePolynomialKernel::builtin(spec) {
        return Ok(k);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::Usage(format!("unknown kernel '{spec}' (neither a built-in id nor a file)")));
    }
    read_kernel_file(path)
}
