use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("dense dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("propagator tolerance not reached after {halvings} halvings (dt = {dt:e}, norm drift = {drift:e}, error estimate = {estimate:e})")]
    Tolerance {
        halvings: u32,
        dt: f64,
        drift: f64,
        estimate: f64,
    },
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
