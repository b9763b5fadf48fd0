//! Hyperspectral data cubes: storage, normalization, on-disk format and
//! patch (subcube) handling.

mod io;
mod patch;
mod raw;

pub use io::{load_cube, write_cube, CubePaths, Header};
pub use patch::{aggregate, axis_origins, extract_patch, make_grid, Aggregator, PatchGrid, PatchMatrix};
pub use raw::{decode_raw, read_raw, Endian, Interleave, RawLayout, SampleType};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `rows × cols × bands` cube of finite reflectance values.
///
/// Values are stored band-major: band, then row, then column, which is also
/// the canonical on-disk order.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    rows: usize,
    cols: usize,
    bands: usize,
    data: Vec<f64>,
}

impl HsiCube {
    pub fn new(rows: usize, cols: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || bands == 0 {
            return Err(Error::DimensionMismatch(format!(
                "cube dimensions must be positive, got {rows}x{cols}x{bands}"
            )));
        }
        let expected = rows
            .checked_mul(cols)
            .and_then(|v| v.checked_mul(bands))
            .ok_or_else(|| Error::DimensionMismatch("cube dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols}x{bands} cube needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            rows,
            cols,
            bands,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize, bands: usize) -> Result<Self> {
        Self::new(rows, cols, bands, vec![0.0; rows * cols * bands])
    }

    /// Builds a cube from `f(row, col, band)`, evaluated in band-major order.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        bands: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols * bands);
        for band in 0..bands {
            for row in 0..rows {
                for col in 0..cols {
                    data.push(f(row, col, band));
                }
            }
        }
        Self::new(rows, cols, bands, data)
    }

    /// Internal constructor for data already known to satisfy the invariants.
    pub(crate) fn from_parts_unchecked(rows: usize, cols: usize, bands: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols * bands);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self {
            rows,
            cols,
            bands,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn dims(&self) -> Dims {
        Dims {
            rows: self.rows,
            cols: self.cols,
            bands: self.bands,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, band: usize) -> usize {
        (band * self.rows + row) * self.cols + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, band: usize) -> f64 {
        self.data[self.index(row, col, band)]
    }

    /// Band-major values.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// One spectral band as a row-major `rows × cols` plane.
    pub fn band(&self, band: usize) -> &[f64] {
        let plane = self.rows * self.cols;
        &self.data[band * plane..(band + 1) * plane]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Applies `f` elementwise; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.bands,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// Spatial and spectral extent of a cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
}

/// The affine range used by [`normalize`], kept so the map can be inverted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleRecord {
    pub min: f64,
    pub max: f64,
}

impl ScaleRecord {
    pub fn denormalize(&self, cube: &HsiCube) -> Result<HsiCube> {
        let span = self.max - self.min;
        cube.map(|v| v * span + self.min)
    }
}

/// Min-max maps the whole cube onto `[0, 1]`.
///
/// A constant cube maps to zeros with the range `(min, min + 1)`.
pub fn normalize(cube: &HsiCube) -> Result<(HsiCube, ScaleRecord)> {
    if let Some(index) = cube.data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let (min, max) = cube.min_max();
    let record = if max > min {
        ScaleRecord { min, max }
    } else {
        ScaleRecord { min, max: min + 1.0 }
    };
    let span = record.max - record.min;
    let out = cube.map(|v| (v - min) / span)?;
    Ok((out, record))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(HsiCube::new(0, 1, 1, vec![]).is_err());
        assert!(HsiCube::new(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(matches!(
            HsiCube::new(1, 1, 2, vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn band_major_indexing() {
        let c = HsiCube::from_fn(2, 3, 2, |r, c, b| (100 * b + 10 * r + c) as f64).unwrap();
        assert_eq!(c.get(1, 2, 1), 112.0);
        assert_eq!(c.band(1)[0], 100.0);
        assert_eq!(c.data()[6], 100.0);
    }

    #[test]
    fn normalize_affine() {
        let c = HsiCube::new(1, 3, 1, vec![2.0, 4.0, 6.0]).unwrap();
        let (n, rec) = normalize(&c).unwrap();
        assert_eq!(n.data(), &[0.0, 0.5, 1.0]);
        assert_eq!(rec, ScaleRecord { min: 2.0, max: 6.0 });
    }

    #[test]
    fn normalize_constant_cube() {
        let c = HsiCube::new(2, 2, 1, vec![7.0; 4]).unwrap();
        let (n, rec) = normalize(&c).unwrap();
        assert!(n.data().iter().all(|&v| v == 0.0));
        assert_eq!(rec, ScaleRecord { min: 7.0, max: 8.0 });
        assert_eq!(rec.denormalize(&n).unwrap(), c);
    }

    #[test]
    fn normalize_round_trip() {
        let c = HsiCube::from_fn(4, 5, 3, |r, c, b| ((r * 7 + c * 3 + b) as f64).sin() * 1e3 - 20.0).unwrap();
        let (n, rec) = normalize(&c).unwrap();
        let back = rec.denormalize(&n).unwrap();
        for (a, b) in c.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
