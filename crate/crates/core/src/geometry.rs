//! Vectors, rays and cameras.

use core::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// A viewing ray `x(t) = b + t·v` with unit direction `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub base: Vec3,
    pub dir: Vec3,
    pub px: u32,
    pub py: u32,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vec3 {
        self.base + self.dir * t
    }

    /// Closest-point parameter `t_χ` and distance of `p` from the ray line.
    pub fn closest_approach(&self, p: Vec3) -> (f64, f64) {
        let rel = p - self.base;
        let t = rel.dot(self.dir);
        let perp = rel - self.dir * t;
        (t, perp.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// Parallel rays; the view covers `width × height` world units.
    Orthographic { width: f64, height: f64 },
    /// Rays through the eye; vertical field of view in radians.
    Pinhole { fov_y: f64 },
}

/// A camera with an orthonormal frame, a raster size and a clip range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    eye: Vec3,
    forward: Vec3,
    right: Vec3,
    up: Vec3,
    projection: Projection,
    width: u32,
    height: u32,
    near: f64,
    far: f64,
}

impl Camera {
    /// Builds a camera looking from `eye` towards `target`.
    #[allow(clippy::too_many_arguments)]
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        projection: Projection,
        width: u32,
        height: u32,
        near: f64,
        far: f64,
    ) -> Result<Self> {
        let bad = |m: &str| Error::InvalidConfig(alloc::string::String::from(m));
        if width == 0 || height == 0 {
            return Err(bad("camera resolution must be positive"));
        }
        if !(far > near) || !near.is_finite() || far.is_nan() {
            return Err(bad("camera clip range needs far > near"));
        }
        match projection {
            Projection::Orthographic { width, height } if !(width > 0.0 && height > 0.0) => {
                return Err(bad("orthographic extent must be positive"))
            }
            Projection::Pinhole { fov_y } if !(fov_y > 0.0 && fov_y < core::f64::consts::PI) => {
                return Err(bad("pinhole field of view must lie in (0, π)"))
            }
            _ => {}
        }
        let forward = (target - eye).normalized().ok_or_else(|| bad("eye and target coincide"))?;
        let right = forward.cross(up).normalized().ok_or_else(|| bad("up is parallel to the view direction"))?;
        let up = right.cross(forward);
        Ok(Self { eye, forward, right, up, projection, width, height, near, far })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn near(&self) -> f64 {
        self.near
    }

    pub fn far(&self) -> f64 {
        self.far
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub fn eye(&self) -> Vec3 {
        self.eye
    }

    pub fn ray_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Row-major ray id.
    pub fn ray_id(&self, px: u32, py: u32) -> u32 {
        py * self.width + px
    }

    fn half_extent(&self) -> (f64, f64) {
        match self.projection {
            Projection::Orthographic { width, height } => (0.5 * width, 0.5 * height),
            Projection::Pinhole { fov_y } => {
                let ty = libm::tan(0.5 * fov_y);
                (ty * self.width as f64 / self.height as f64, ty)
            }
        }
    }

    /// The ray through the centre of pixel `(px, py)`; `py = 0` is the top row.
    pub fn ray(&self, px: u32, py: u32) -> Ray {
        let u = 2.0 * (px as f64 + 0.5) / self.width as f64 - 1.0;
        let v = 1.0 - 2.0 * (py as f64 + 0.5) / self.height as f64;
        let (hx, hy) = self.half_extent();
        match self.projection {
            Projection::Orthographic { .. } => {
                Ray { base: self.eye + self.right * (u * hx) + self.up * (v * hy), dir: self.forward, px, py }
            }
            Projection::Pinhole { .. } => {
                let d = self.forward + self.right * (u * hx) + self.up * (v * hy);
                Ray { base: self.eye, dir: d.normalized().unwrap_or(self.forward), px, py }
            }
        }
    }

    /// Inclusive pixel bounding box `(x0, y0, x1, y1)` covering the
    /// projection of the sphere `(c, radius)`, or `None` if it lies
    /// entirely outside the image or behind the camera.
    pub fn sphere_bounds(&self, c: Vec3, radius: f64) -> Option<(u32, u32, u32, u32)> {
        let rel = c - self.eye;
        let (x, y, z) = (rel.dot(self.right), rel.dot(self.up), rel.dot(self.forward));
        let (hx, hy) = self.half_extent();
        let (ux0, ux1, uy0, uy1) = match self.projection {
            Projection::Orthographic { .. } => {
                if z + radius <= 0.0 {
                    return None;
                }
                ((x - radius) / hx, (x + radius) / hx, (y - radius) / hy, (y + radius) / hy)
            }
            Projection::Pinhole { .. } => {
                if z + radius <= 0.0 {
                    return None;
                }
                if z <= radius {
                    (-1.0, 1.0, -1.0, 1.0)
                } else {
                    let (a, b) = tangent_slopes(x, z, radius);
                    let (c0, c1) = tangent_slopes(y, z, radius);
                    (a / hx, b / hx, c0 / hy, c1 / hy)
                }
            }
        };
        let to_px = |u: f64, n: u32| libm::floor(0.5 * (u + 1.0) * n as f64);
        let (px0, px1) = (to_px(ux0, self.width) - 1.0, to_px(ux1, self.width) + 1.0);
        // Image v grows upwards, rows grow downwards.
        let (py0, py1) = (to_px(-uy1, self.height) - 1.0, to_px(-uy0, self.height) + 1.0);
        let clamp = |v: f64, n: u32| v.max(0.0).min(n as f64 - 1.0) as u32;
        if px1 < 0.0 || py1 < 0.0 || px0 > self.width as f64 - 1.0 || py0 > self.height as f64 - 1.0 {
            return None;
        }
        Some((clamp(px0, self.width), clamp(py0, self.height), clamp(px1, self.width), clamp(py1, self.height)))
    }
}

/// Slopes `x/z` of the two tangents from the origin to the circle of
/// radius `r` around `(x, z)`, with `z > r`.
fn tangent_slopes(x: f64, z: f64, r: f64) -> (f64, f64) {
    let den = z * z - r * r;
    let root = r * libm::sqrt((x * x + z * z - r * r).max(0.0));
    ((x * z - root) / den, (x * z + root) / den)
}
