//! File formats.

mod camera;
mod image;
mod kernel;
mod lut;
mod particles;
mod transfer;

pub use camera::{read_camera, CameraSpec, ProjectionSpec};
pub use image::{encode_ppm, write_ppm};
pub use kernel::{load_kernel, read_kernel_file, write_kernel_file, KernelFile};
pub use lut::{decode_lut, encode_lut, read_lut, write_lut, LUT_MAGIC, LUT_VERSION};
pub use particles::{
    decode_particles_binary, encode_particles_binary, read_particles, write_particles_binary, write_particles_csv,
    PARTICLE_MAGIC,
};
pub use transfer::{parse_transfer_function, read_transfer_function};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(Error::io(path))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(Error::io(path))
}
