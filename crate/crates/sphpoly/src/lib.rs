//! File formats, parallel drivers, reference oracles and the command line
//! for `sphpoly-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod oracle;
pub mod parallel;
pub mod report;
pub mod scene;
pub mod validate;

pub use error::{Error, Result};
