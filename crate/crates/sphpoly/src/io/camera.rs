//! Camera description files (JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sphpoly_core::geometry::{Camera, Projection, Vec3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProjectionSpec {
    /// Extent of the view in world units.
    Orthographic { width: f64, height: f64 },
    /// Vertical field of view in degrees.
    Pinhole { fov_y_deg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub eye: [f64; 3],
    pub target: [f64; 3],
    #[serde(default = "default_up")]
    pub up: [f64; 3],
    pub projection: ProjectionSpec,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub near: f64,
    #[serde(default = "default_far")]
    pub far: f64,
}

fn default_up() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}

fn default_far() -> f64 {
    f64::INFINITY
}

impl CameraSpec {
    /// Orthographic view along +z of the square `[-half, half]²`.
    pub fn orthographic_z(resolution: u32, half: f64, distance: f64) -> Self {
        Self {
            eye: [0.0, 0.0, -distance],
            target: [0.0; 3],
            up: default_up(),
            projection: ProjectionSpec::Orthographic { width: 2.0 * half, height: 2.0 * half },
            width: resolution,
            height: resolution,
            near: 0.0,
            far: 2.0 * distance,
        }
    }

    pub fn build(&self) -> sphpoly_core::Result<Camera> {
        let v = |a: [f64; 3]| Vec3::new(a[0], a[1], a[2]);
        let projection = match self.projection {
            ProjectionSpec::Orthographic { width, height } => Projection::Orthographic { width, height },
            ProjectionSpec::Pinhole { fov_y_deg } => Projection::Pinhole { fov_y: fov_y_deg.to_radians() },
        };
        Camera::look_at(
            v(self.eye),
            v(self.target),
            v(self.up),
            projection,
            self.width,
            self.height,
            self.near,
            self.far,
        )
    }
}

pub fn read_camera(path: &Path) -> Result<CameraSpec> {
    let bytes = super::read_bytes(path)?;
    let spec: CameraSpec = serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))?;
    spec.build().map_err(|e| Error::format(path, e.to_string()))?;
    Ok(spec)
}
