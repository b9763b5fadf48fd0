//! Seeded synthetic scenes with a known clean reference.
//!
//! Each pixel mixes four endmember spectra with smooth, spatially varying
//! abundances. The endmembers themselves drift slowly across the scene
//! (spectral variability), so a window's effective rank grows with its size
//! the way it does in real imagery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{normalize, HsiCube};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub endmembers: usize,
    /// Relative amplitude of the endmember drift.
    pub variability: f64,
    /// Number of spatial drift fields.
    pub drift_fields: usize,
    /// Drift wavelength range in pixels.
    pub drift_wavelength: (f64, f64),
    pub seed: u64,
}

impl SceneSpec {
    /// The 64×64×32 four-endmember scene used by the benchmark suites.
    pub fn benchmark(seed: u64) -> Self {
        Self {
            rows: 64,
            cols: 64,
            bands: 32,
            endmembers: 4,
            variability: 0.5,
            drift_fields: 6,
            drift_wavelength: (12.0, 30.0),
            seed,
        }
    }
}

/// Smooth positive spectrum: a baseline plus a few Gaussian features.
fn random_spectrum(rng: &mut ChaCha8Rng, bands: usize) -> Vec<f64> {
    let base = rng.random_range(0.2..0.6);
    let slope = rng.random_range(-0.2..0.2);
    let features: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.0..bands as f64),
                rng.random_range(2.0..(bands as f64 / 3.0).max(3.0)),
                rng.random_range(-0.25..0.35),
            )
        })
        .collect();
    (0..bands)
        .map(|b| {
            let x = b as f64;
            let mut v = base + slope * x / bands as f64;
            for &(centre, width, height) in &features {
                v += height * (-((x - centre) / width).powi(2) / 2.0).exp();
            }
            v.max(0.02)
        })
        .collect()
}

/// Renders the scene and min-max normalizes it onto `[0, 1]`.
pub fn generate(spec: &SceneSpec) -> Result<HsiCube> {
    let SceneSpec {
        rows,
        cols,
        bands,
        endmembers,
        ..
    } = *spec;
    if rows == 0 || cols == 0 || bands == 0 || endmembers == 0 {
        return Err(Error::InvalidParameter(
            "scene dimensions and endmember count must be positive".into(),
        ));
    }
    let (lo, hi) = spec.drift_wavelength;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "drift wavelength range {lo}..{hi} is invalid"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let spectra: Vec<Vec<f64>> = (0..endmembers).map(|_| random_spectrum(&mut rng, bands)).collect();

    // Abundance fields: a floor plus a few Gaussian bumps each.
    let scale = rows.max(cols) as f64;
    let bumps: Vec<Vec<(f64, f64, f64, f64)>> = (0..endmembers)
        .map(|_| {
            (0..3)
                .map(|_| {
                    (
                        rng.random_range(0.0..rows as f64),
                        rng.random_range(0.0..cols as f64),
                        rng.random_range(scale / 8.0..scale / 3.0),
                        rng.random_range(0.5..1.5),
                    )
                })
                .collect()
        })
        .collect();

    // Drift: plane waves in space, each paired with a smooth spectral shape per endmember.
    let fields: Vec<(f64, f64, f64)> = (0..spec.drift_fields)
        .map(|_| {
            let wavelength = rng.random_range(spec.drift_wavelength.0..=spec.drift_wavelength.1);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let k = std::f64::consts::TAU / wavelength;
            (
                k * angle.cos(),
                k * angle.sin(),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let shapes: Vec<Vec<Vec<f64>>> = (0..endmembers)
        .map(|_| {
            (0..spec.drift_fields)
                .map(|_| {
                    let s = random_spectrum(&mut rng, bands);
                    let mean = s.iter().sum::<f64>() / bands as f64;
                    s.iter().map(|v| v / mean - 1.0).collect()
                })
                .collect()
        })
        .collect();

    let mut weights = vec![0.0; endmembers];
    let mut drift = vec![0.0; spec.drift_fields];
    let mut data = vec![0.0; rows * cols * bands];
    for r in 0..rows {
        for c in 0..cols {
            for (w, bs) in weights.iter_mut().zip(&bumps) {
                *w = 0.05
                    + bs.iter()
                        .map(|&(cr, cc, width, h)| {
                            h * (-((r as f64 - cr).powi(2) + (c as f64 - cc).powi(2)) / (2.0 * width * width)).exp()
                        })
                        .sum::<f64>();
            }
            let total: f64 = weights.iter().sum();
            for (d, &(kr, kc, phase)) in drift.iter_mut().zip(&fields) {
                *d = (kr * r as f64 + kc * c as f64 + phase).sin();
            }
            for b in 0..bands {
                let mut v = 0.0;
                for e in 0..endmembers {
                    let wobble: f64 = drift.iter().zip(&shapes[e]).map(|(d, s)| d * s[b]).sum();
                    v += weights[e] / total * spectra[e][b] * (1.0 + spec.variability * wobble);
                }
                data[(b * rows + r) * cols + c] = v;
            }
        }
    }
    let raw = HsiCube::new(rows, cols, bands, data)?;
    Ok(normalize(&raw)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_normalized() {
        let spec = SceneSpec::benchmark(3);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.rows(), a.cols(), a.bands()), (64, 64, 32));
        let (lo, hi) = a.min_max();
        assert_eq!((lo, hi), (0.0, 1.0));
    }

    #[test]
    fn without_drift_the_scene_has_endmember_rank() {
        let spec = SceneSpec {
            variability: 0.0,
            rows: 16,
            cols: 16,
            ..SceneSpec::benchmark(1)
        };
        let cube = generate(&spec).unwrap();
        let m = nalgebra::DMatrix::from_fn(256, 32, |i, b| cube.get(i / 16, i % 16, b));
        let sv = m.singular_values();
        let big = sv.iter().filter(|&&s| s > 1e-9 * sv.max()).count();
        // Normalization adds an affine offset, so at most one extra direction.
        assert!(big <= 5, "numerical rank {big}");
    }

    #[test]
    fn small_and_degenerate_shapes() {
        for (rows, cols, bands) in [(1, 1, 1), (8, 8, 3), (16, 16, 6), (3, 40, 2)] {
            let spec = SceneSpec {
                rows,
                cols,
                bands,
                ..SceneSpec::benchmark(5)
            };
            let cube = generate(&spec).unwrap();
            assert_eq!(cube.len(), rows * cols * bands);
        }
        let empty = SceneSpec {
            bands: 0,
            ..SceneSpec::benchmark(1)
        };
        assert!(generate(&empty).is_err());
        let bad = SceneSpec {
            drift_wavelength: (30.0, 12.0),
            ..SceneSpec::benchmark(1)
        };
        assert!(generate(&bad).is_err());
    }
}
