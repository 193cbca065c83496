//! A small built-in scene for demos and tests.

use sphpoly_core::geometry::Vec3;
use sphpoly_core::quantize::Particle;
use sphpoly_core::raycast::{TfPoint, TransferFunction};

use crate::io::{CameraSpec, ProjectionSpec};

/// Eight overlapping particles of varying size and attribute inside the
/// cube `[-1, 1]³`.
pub fn desk_scene() -> Vec<Particle> {
    let p = |x, y, z, mass, density, h, value| Particle { position: Vec3::new(x, y, z), mass, density, h, value };
    vec![
        p(-0.5, -0.3, 0.1, 1.0, 1.0, 0.45, 1.0),
        p(0.4, -0.4, -0.2, 1.2, 0.9, 0.5, 0.8),
        p(0.1, 0.45, 0.3, 0.8, 1.1, 0.4, 1.5),
        p(-0.6, 0.5, -0.4, 1.0, 1.0, 0.35, 0.6),
        p(0.7, 0.3, 0.5, 0.9, 1.0, 0.3, 2.0),
        p(0.0, 0.0, 0.0, 1.5, 1.2, 0.6, 1.0),
        p(-0.2, -0.7, 0.6, 0.7, 0.8, 0.25, 1.2),
        p(0.5, 0.8, -0.6, 1.1, 1.0, 0.4, 0.5),
    ]
}

/// Orthographic 64×64 view of the desk scene along +z.
pub fn desk_camera() -> CameraSpec {
    CameraSpec {
        eye: [0.0, 0.0, -5.0],
        target: [0.0, 0.0, 0.0],
        up: [0.0, 1.0, 0.0],
        projection: ProjectionSpec::Orthographic { width: 3.6, height: 3.6 },
        width: 64,
        height: 64,
        near: 0.0,
        far: 10.0,
    }
}

/// Transparent at zero, blue for thin regions, orange for dense ones.
pub fn desk_transfer_function() -> TransferFunction {
    let p = |value, r, g, b, absorption| TfPoint { value, rgb: [r, g, b], absorption };
    TransferFunction::new(vec![
        p(0.0, 0.0, 0.0, 0.0, 0.0),
        p(1.0, 0.2, 0.3, 0.9, 0.4),
        p(4.0, 0.9, 0.6, 0.2, 1.5),
        p(10.0, 1.0, 1.0, 0.8, 4.0),
    ])
    .expect("built-in transfer function is valid")
}
