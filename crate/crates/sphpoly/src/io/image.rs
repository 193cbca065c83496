//! Binary PPM (P6) output.

use std::path::Path;

use crate::error::Result;

/// Encodes RGBA pixels (row-major, top row first) as 8-bit P6; alpha is
/// dropped and colours are clamped to `[0, 1]`.
pub fn encode_ppm(width: u32, height: u32, pixels: &[[f64; 4]]) -> Vec<u8> {
    assert_eq!(pixels.len(), width as usize * height as usize);
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    for px in pixels {
        for c in &px[..3] {
            out.push((c.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out
}

pub fn write_ppm(path: &Path, width: u32, height: u32, pixels: &[[f64; 4]]) -> Result<()> {
    super::write_bytes(path, &encode_ppm(width, height, pixels))
}
