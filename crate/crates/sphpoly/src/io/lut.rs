//! `.splt` look-up table files.
//!
//! Little-endian: magic `SPLT`, `u32` version, 16-byte zero-padded kernel
//! id, `f64` q, `u32` K, D, N, then N records of `Λ`, `E_Λ`, `θ_1..θ_m`
//! and `ŝ` in lexicographic `(k, d)` order, all `f64`.

use std::path::Path;

use sphpoly_core::approx::ApproxConfig;
use sphpoly_core::kernel::KERNEL_ID_LEN;
use sphpoly_core::lut::{Lut, LutEntry};

use crate::error::{Error, Result};

pub const LUT_MAGIC: [u8; 4] = *b"SPLT";
pub const LUT_VERSION: u32 = 1;

pub fn encode_lut(lut: &Lut) -> Vec<u8> {
    let cfg = lut.config();
    let mut out = Vec::new();
    out.extend_from_slice(&LUT_MAGIC);
    out.extend_from_slice(&LUT_VERSION.to_le_bytes());
    let mut id = [0u8; KERNEL_ID_LEN];
    id[..lut.kernel_id().len()].copy_from_slice(lut.kernel_id().as_bytes());
    out.extend_from_slice(&id);
    out.extend_from_slice(&lut.q().to_le_bytes());
    for v in [cfg.k(), cfg.d(), lut.len()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for e in lut.entries() {
        for v in [e.lambda, e.error].iter().chain(&e.theta).chain(&e.s_hat) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        if self.0.len() < n {
            return Err("truncated file".into());
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_lut(bytes: &[u8]) -> std::result::Result<Lut, String> {
    let mut c = Cursor(bytes);
    if c.take(4)? != LUT_MAGIC {
        return Err("not a look-up table file (bad magic)".into());
    }
    let version = c.u32()?;
    if version != LUT_VERSION {
        return Err(format!("unsupported look-up table version {version}"));
    }
    let raw_id = c.take(KERNEL_ID_LEN)?;
    let len = raw_id.iter().position(|&b| b == 0).unwrap_or(KERNEL_ID_LEN);
    if raw_id[len..].iter().any(|&b| b != 0) {
        return Err("kernel id is not zero-padded".into());
    }
    let kernel_id = std::str::from_utf8(&raw_id[..len]).map_err(|_| "kernel id is not UTF-8".to_string())?;
    let q = c.f64()?;
    let (k, d, n) = (c.u32()? as usize, c.u32()? as usize, c.u32()? as usize);
    let cfg = ApproxConfig::new(k, d).map_err(|e| e.to_string())?;
    let (m, dim) = (cfg.positive_knots(), cfg.dimension());
    let record = 8 * (2 + m + dim);
    if c.0.len() != n * record {
        return Err(format!("expected {n} records of {record} bytes, found {} bytes", c.0.len()));
    }
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        let lambda = c.f64()?;
        let error = c.f64()?;
        let theta = (0..m).map(|_| c.f64()).collect::<std::result::Result<_, _>>()?;
        let s_hat = (0..dim).map(|_| c.f64()).collect::<std::result::Result<_, _>>()?;
        entries.push(LutEntry { lambda, error, theta, s_hat });
    }
    Lut::new(kernel_id, q, cfg, entries).map_err(|e| e.to_string())
}

pub fn write_lut(path: &Path, lut: &Lut) -> Result<()> {
    super::write_bytes(path, &encode_lut(lut))
}

pub fn read_lut(path: &Path) -> Result<Lut> {
    let bytes = super::read_bytes(path)?;
    decode_lut(&bytes).map_err(|m| Error::format(path, m))
}
