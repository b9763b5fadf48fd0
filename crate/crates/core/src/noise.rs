//! Seedable degradation of normalized cubes: additive Gaussian noise,
//! salt-and-pepper impulses, dead lines and stripes.
//!
//! All draws come from one `ChaCha8Rng` seeded with `seed_from_u64(spec.seed)`
//! and are consumed in this order:
//!
//! 1. Affected bands: partial Fisher-Yates over `0..bands`, one
//!    `random_range(i..bands)` per selected band, `round(fraction * bands)`
//!    bands in total. The selection is then processed in ascending order.
//! 2. Per affected band:
//!    - if `sigma > 0`, one `Normal(0, sigma)` sample per pixel, row-major;
//!    - if `stripe_count > 0`, partial Fisher-Yates over the columns;
//!    - if `dead_line_count > 0`, partial Fisher-Yates over the rows;
//!    - if `impulse_density > 0`, per pixel row-major one `random::<f64>()`,
//!      followed by one `random::<bool>()` (1 = salt) when it falls below the
//!      density.
//!
//! Values are then formed as `clip(v + gaussian + stripe_bias)`, impulses
//! overwrite with 0 or 1, and dead rows are set to 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cube::HsiCube;
use crate::error::{Error, Result};

/// Additive offset applied to striped columns before clipping.
pub const STRIPE_BIAS: f64 = 0.2;

/// Slack allowed when checking that the input lies in `[0, 1]`.
pub const RANGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub gaussian_sigma: f64,
    pub impulse_density: f64,
    pub dead_line_count: usize,
    pub stripe_count: usize,
    pub affected_band_fraction: f64,
    pub seed: u64,
}

impl NoiseSpec {
    /// No degradation at all.
    pub fn none(seed: u64) -> Self {
        Self {
            gaussian_sigma: 0.0,
            impulse_density: 0.0,
            dead_line_count: 0,
            stripe_count: 0,
            affected_band_fraction: 1.0,
            seed,
        }
    }

    /// Mixed Gaussian + impulse profile used for the benchmark runs:
    /// sigma 0.025, impulse density 0.10, every band affected.
    pub fn paper_like(seed: u64) -> Self {
        Self {
            gaussian_sigma: 0.025,
            impulse_density: 0.10,
            ..Self::none(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma.is_finite() && self.gaussian_sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian sigma must be finite and >= 0, got {}",
                self.gaussian_sigma
            )));
        }
        for (name, v) in [
            ("impulse density", self.impulse_density),
            ("affected band fraction", self.affected_band_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

fn partial_shuffle(rng: &mut ChaCha8Rng, n: usize, take: usize) -> Vec<usize> {
    let take = take.min(n);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..take {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(take);
    idx
}

pub fn corrupt(cube: &HsiCube, spec: &NoiseSpec) -> Result<HsiCube> {
    spec.validate()?;
    if let Some((index, &value)) = cube
        .data()
        .iter()
        .enumerate()
        .find(|(_, &v)| !(-RANGE_TOLERANCE..=1.0 + RANGE_TOLERANCE).contains(&v))
    {
        return Err(Error::NotNormalized { index, value });
    }

    let (rows, cols, bands) = (cube.rows(), cube.cols(), cube.bands());
    let plane = rows * cols;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_affected = (spec.affected_band_fraction * bands as f64).round() as usize;
    let mut affected = partial_shuffle(&mut rng, bands, n_affected);
    affected.sort_unstable();

    let gaussian = if spec.gaussian_sigma > 0.0 {
        Some(Normal::new(0.0, spec.gaussian_sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };

    let mut data = cube.data().to_vec();
    let mut offset = vec![0.0; plane];
    for band in affected {
        let values = &mut data[band * plane..(band + 1) * plane];

        offset.fill(0.0);
        if let Some(normal) = &gaussian {
            for o in offset.iter_mut() {
                *o = normal.sample(&mut rng);
            }
        }
        if spec.stripe_count > 0 {
            for col in partial_shuffle(&mut rng, cols, spec.stripe_count) {
                for row in 0..rows {
                    offset[row * cols + col] += STRIPE_BIAS;
                }
            }
        }
        let dead_rows = if spec.dead_line_count > 0 {
            partial_shuffle(&mut rng, rows, spec.dead_line_count)
        } else {
            Vec::new()
        };

        for (v, o) in values.iter_mut().zip(&offset) {
            *v = (*v + o).clamp(0.0, 1.0);
        }
        if spec.impulse_density > 0.0 {
            for v in values.iter_mut() {
                if rng.random::<f64>() < spec.impulse_density {
                    *v = if rng.random::<bool>() { 1.0 } else { 0.0 };
                }
            }
        }
        for row in dead_rows {
            values[row * cols..(row + 1) * cols].fill(0.0);
        }
    }
    Ok(HsiCube::from_parts_unchecked(rows, cols, bands, data))
}
