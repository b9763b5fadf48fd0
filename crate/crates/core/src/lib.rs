//! Hyperspectral cube denoising by patch-wise low-rank matrix recovery.
//!
//! The pipeline sweeps `b × b × w` subcubes over a cube, splits each
//! flattened `b² × w` patch into low-rank plus sparse parts with GoDec, and
//! averages the low-rank estimates back together. Around it sit a seedable
//! noise simulator, PSNR evaluation, parameter sweeps and a Nelder-Mead tuner
//! for the corruption fraction `p`.

pub mod cli;
pub mod cube;
pub mod error;
pub mod godec;
pub mod lrmr;
pub mod metrics;
pub mod noise;
pub mod report;
pub mod synthetic;
pub mod tune;

pub use cube::{load_cube, normalize, write_cube, HsiCube};
pub use error::{Error, ErrorKind, Result};
pub use lrmr::{denoise, LrmrParams, RunReport, SolverConfig};
pub use metrics::{gradient_1d, psnr, QualityReport};
pub use noise::{corrupt, NoiseSpec};
