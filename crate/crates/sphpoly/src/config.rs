//! Run configuration: a JSON file mirroring the command-line flags, with
//! flags taking precedence.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sphpoly_core::quantize::IntWidth;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl From<OneOrMany> for Vec<usize> {
    fn from(v: OneOrMany) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

/// All fields optional; unset fields fall back to defaults when resolved.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub int_width: Option<u32>,
    #[serde(rename = "K")]
    pub k: Option<OneOrMany>,
    #[serde(rename = "D")]
    pub d: Option<OneOrMany>,
    pub n: Option<usize>,
    pub refine_starts: Option<usize>,
    pub kernel: Option<String>,
    pub lut: Option<PathBuf>,
    pub tf: Option<PathBuf>,
    pub camera: Option<PathBuf>,
    pub particles: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub variance: Option<f64>,
    pub step: Option<f64>,
    pub format: Option<String>,
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        // Relative paths in a config file are relative to the file.
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.lut, &mut cfg.tf, &mut cfg.camera, &mut cfg.particles, &mut cfg.out, &mut cfg.report]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            seed: self.seed.or(base.seed),
            threads: self.threads.or(base.threads),
            int_width: self.int_width.or(base.int_width),
            k: self.k.or(base.k),
            d: self.d.or(base.d),
            n: self.n.or(base.n),
            refine_starts: self.refine_starts.or(base.refine_starts),
            kernel: self.kernel.or(base.kernel),
            lut: self.lut.or(base.lut),
            tf: self.tf.or(base.tf),
            camera: self.camera.or(base.camera),
            particles: self.particles.or(base.particles),
            out: self.out.or(base.out),
            report: self.report.or(base.report),
            variance: self.variance.or(base.variance),
            step: self.step.or(base.step),
            format: self.format.or(base.format),
        }
    }

    pub fn ks(&self) -> Result<Vec<usize>> {
        let ks: Vec<usize> = self.k.clone().map_or(vec![4], Into::into);
        if ks.is_empty() || ks.iter().any(|k| !(1..=8).contains(k)) {
            return Err(Error::Usage(format!("K must lie in 1..=8, got {ks:?}")));
        }
        Ok(ks)
    }

    pub fn ds(&self) -> Result<Vec<usize>> {
        let ds: Vec<usize> = self.d.clone().map_or(vec![3], Into::into);
        if ds.is_empty() || ds.iter().any(|d| !(1..=6).contains(d)) {
            return Err(Error::Usage(format!("D must lie in 1..=6, got {ds:?}")));
        }
        Ok(ds)
    }

    /// The single `(K, D)` pair of commands that use one table.
    pub fn single_kd(&self) -> Result<(usize, usize)> {
        match (self.ks()?.as_slice(), self.ds()?.as_slice()) {
            ([k], [d]) => Ok((*k, *d)),
            _ => Err(Error::Usage("this command takes a single K and D".into())),
        }
    }

    pub fn int_width(&self) -> Result<IntWidth> {
        let bits = self.int_width.unwrap_or(64);
        IntWidth::from_bits(bits).map_err(|_| Error::Usage(format!("integer width must be 32, 64 or 128, got {bits}")))
    }

    pub fn lut_size(&self, default: usize) -> Result<usize> {
        let n = self.n.unwrap_or(default);
        if n < 2 {
            return Err(Error::Usage(format!("table size must be at least 2, got {n}")));
        }
        Ok(n)
    }

    pub fn refine_starts(&self) -> Result<usize> {
        match self.refine_starts.unwrap_or(8) {
            0 => Err(Error::Usage("refine starts must be at least 1".into())),
            n => Ok(n),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn kernel_spec(&self) -> &str {
        self.kernel.as_deref().unwrap_or("cubic")
    }
}
