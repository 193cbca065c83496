//! Particle files: CSV with header `x,y,z,mass,density,h,value`, or the
//! binary form `SPRT`, `u64` count, then 7 little-endian `f64` per particle.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sphpoly_core::geometry::Vec3;
use sphpoly_core::quantize::Particle;

use crate::error::{Error, Result};

pub const PARTICLE_MAGIC: [u8; 4] = *b"SPRT";

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    x: f64,
    y: f64,
    z: f64,
    mass: f64,
    density: f64,
    h: f64,
    value: f64,
}

impl From<Row> for Particle {
    fn from(r: Row) -> Self {
        Particle { position: Vec3::new(r.x, r.y, r.z), mass: r.mass, density: r.density, h: r.h, value: r.value }
    }
}

fn fields(p: &Particle) -> [f64; 7] {
    [p.position.x, p.position.y, p.position.z, p.mass, p.density, p.h, p.value]
}

pub fn encode_particles_binary(particles: &[Particle]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 56 * particles.len());
    out.extend_from_slice(&PARTICLE_MAGIC);
    out.extend_from_slice(&(particles.len() as u64).to_le_bytes());
    for p in particles {
        for v in fields(p) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_particles_binary(bytes: &[u8]) -> std::result::Result<Vec<Particle>, String> {
    if bytes.len() < 12 || bytes[..4] != PARTICLE_MAGIC {
        return Err("not a binary particle file".into());
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let body = &bytes[12..];
    if body.len() as u64 != n.saturating_mul(56) {
        return Err(format!("expected {n} records, found {} bytes", body.len()));
    }
    Ok(body
        .chunks_exact(56)
        .map(|r| {
            let f = |i: usize| f64::from_le_bytes(r[8 * i..8 * i + 8].try_into().unwrap());
            Particle { position: Vec3::new(f(0), f(1), f(2)), mass: f(3), density: f(4), h: f(5), value: f(6) }
        })
        .collect())
}

fn parse_csv(bytes: &[u8]) -> std::result::Result<Vec<Particle>, String> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    let want = ["x", "y", "z", "mass", "density", "h", "value"];
    if header.iter().collect::<Vec<_>>() != want {
        return Err(format!("header must be {}", want.join(",")));
    }
    reader.deserialize::<Row>().map(|r| r.map(Particle::from).map_err(|e| e.to_string())).collect()
}

/// Reads either format, chosen by the leading magic bytes.
pub fn read_particles(path: &Path) -> Result<Vec<Particle>> {
    let bytes = super::read_bytes(path)?;
    let particles =
        if bytes.starts_with(&PARTICLE_MAGIC) { decode_particles_binary(&bytes) } else { parse_csv(&bytes) }
            .map_err(|m| Error::format(path, m))?;
    for (i, p) in particles.iter().enumerate() {
        p.validate().map_err(|e| Error::format(path, format!("particle {i}: {e}")))?;
    }
    Ok(particles)
}

pub fn write_particles_binary(path: &Path, particles: &[Particle]) -> Result<()> {
    super::write_bytes(path, &encode_particles_binary(particles))
}

pub fn write_particles_csv(path: &Path, particles: &[Particle]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if particles.is_empty() {
        w.write_record(["x", "y", "z", "mass", "density", "h", "value"])?;
    }
    for p in particles {
        let f = fields(p);
        w.serialize(Row { x: f[0], y: f[1], z: f[2], mass: f[3], density: f[4], h: f[5], value: f[6] })?;
    }
    w.flush().map_err(Error::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_parsing() {
        let ok = b"x,y,z,mass,density,h,value\n1,2,3,4,5,6,7\n0.5, 0, 0, 1, 1, 0.1, -2\n";
        let p = parse_csv(ok).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].position, Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(p[1].value, -2.0);
        assert!(parse_csv(b"x,y,z,m,density,h,value\n").is_err());
        assert!(parse_csv(b"x,y,z,mass,density,h,value\n1,2\n").is_err());
        assert!(parse_csv(b"x,y,z,mass,density,h,value\n").unwrap().is_empty());
    }

    #[test]
    fn binary_rejects_bad_length() {
        let p = Particle { position: Vec3::new(1.0, 2.0, 3.0), mass: 1.0, density: 2.0, h: 0.5, value: 3.0 };
        let b = encode_particles_binary(&[p, p]);
        assert_eq!(decode_particles_binary(&b).unwrap(), vec![p, p]);
        assert!(decode_particles_binary(&b[..b.len() - 8]).is_err());
    }
}
