//! Sliding-window subcube extraction and overlap-average reconstruction.

use nalgebra::DMatrix;

use super::HsiCube;
use crate::error::{Error, Result};

/// Top-left origins of every `block × block` window visited by a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchGrid {
    pub block: usize,
    pub stride: usize,
    pub row_origins: Vec<usize>,
    pub col_origins: Vec<usize>,
}

impl PatchGrid {
    pub fn len(&self) -> usize {
        self.row_origins.len() * self.col_origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Origins in row-major order.
    pub fn origins(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_origins
            .iter()
            .flat_map(move |&r| self.col_origins.iter().map(move |&c| (r, c)))
    }

    pub fn origin(&self, index: usize) -> (usize, usize) {
        let n = self.col_origins.len();
        (self.row_origins[index / n], self.col_origins[index % n])
    }
}

/// `0, s, 2s, …` up to `dim - b`, with `dim - b` appended when the stride
/// does not land on it so the last window reaches the border.
pub fn axis_origins(dim: usize, block: usize, stride: usize) -> Vec<usize> {
    let last = dim - block;
    let mut out: Vec<usize> = (0..=last).step_by(stride).collect();
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

pub fn make_grid(rows: usize, cols: usize, block: usize, stride: usize) -> Result<PatchGrid> {
    if block == 0 {
        return Err(Error::InvalidParameter("blocksize b must be at least 1".into()));
    }
    if stride == 0 {
        return Err(Error::InvalidParameter("stride s must be at least 1".into()));
    }
    if block > rows || block > cols {
        return Err(Error::InvalidParameter(format!(
            "blocksize b={block} exceeds the spatial size {rows}x{cols} (need b <= min(rows, cols))"
        )));
    }
    if stride > block {
        return Err(Error::InvalidParameter(format!(
            "stride s={stride} exceeds blocksize b={block}; pixels between windows would be skipped"
        )));
    }
    Ok(PatchGrid {
        block,
        stride,
        row_origins: axis_origins(rows, block, stride),
        col_origins: axis_origins(cols, block, stride),
    })
}

/// One subcube flattened to a `block² × bands` matrix.
///
/// Row `i` is pixel `(origin.0 + i / block, origin.1 + i % block)`; column `j`
/// is band `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchMatrix {
    pub origin: (usize, usize),
    pub block: usize,
    pub values: DMatrix<f64>,
}

pub fn extract_patch(cube: &HsiCube, origin: (usize, usize), block: usize) -> Result<PatchMatrix> {
    let (r0, c0) = origin;
    if block == 0 || r0 + block > cube.rows() || c0 + block > cube.cols() {
        return Err(Error::InvalidParameter(format!(
            "window at ({r0}, {c0}) of size {block} does not fit in {}x{}",
            cube.rows(),
            cube.cols()
        )));
    }
    let values = DMatrix::from_fn(block * block, cube.bands(), |i, band| {
        cube.get(r0 + i / block, c0 + i % block, band)
    });
    Ok(PatchMatrix { origin, block, values })
}

/// Running per-(pixel, band) sums and per-pixel counts of patch estimates.
///
/// Results depend only on the order of [`Aggregator::add`] calls.
#[derive(Debug, Clone)]
pub struct Aggregator {
    rows: usize,
    cols: usize,
    bands: usize,
    sums: Vec<f64>,
    counts: Vec<u32>,
}

impl Aggregator {
    pub fn new(rows: usize, cols: usize, bands: usize) -> Self {
        Self {
            rows,
            cols,
            bands,
            sums: vec![0.0; rows * cols * bands],
            counts: vec![0; rows * cols],
        }
    }

    pub fn add(&mut self, patch: &PatchMatrix) -> Result<()> {
        let (r0, c0) = patch.origin;
        let b = patch.block;
        if patch.values.nrows() != b * b || patch.values.ncols() != self.bands {
            return Err(Error::DimensionMismatch(format!(
                "patch is {}x{}, expected {}x{}",
                patch.values.nrows(),
                patch.values.ncols(),
                b * b,
                self.bands
            )));
        }
        if r0 + b > self.rows || c0 + b > self.cols {
            return Err(Error::InvalidParameter(format!(
                "patch at ({r0}, {c0}) of size {b} does not fit in {}x{}",
                self.rows, self.cols
            )));
        }
        let plane = self.rows * self.cols;
        for i in 0..b * b {
            let pixel = (r0 + i / b) * self.cols + c0 + i % b;
            self.counts[pixel] += 1;
        }
        for band in 0..self.bands {
            let column = patch.values.column(band);
            let base = band * plane;
            for (i, v) in column.iter().enumerate() {
                let pixel = (r0 + i / b) * self.cols + c0 + i % b;
                self.sums[base + pixel] += v;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<HsiCube> {
        if let Some(pixel) = self.counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidParameter(format!(
                "pixel ({}, {}) is not covered by any patch",
                pixel / self.cols,
                pixel % self.cols
            )));
        }
        let plane = self.rows * self.cols;
        let mut data = self.sums;
        for (i, v) in data.iter_mut().enumerate() {
            *v /= f64::from(self.counts[i % plane]);
        }
        HsiCube::new(self.rows, self.cols, self.bands, data)
    }
}

/// Uniform mean of all patch estimates covering each (pixel, band), summed in
/// the order given.
pub fn aggregate(patches: &[PatchMatrix], rows: usize, cols: usize, bands: usize) -> Result<HsiCube> {
    let mut acc = Aggregator::new(rows, cols, bands);
    for patch in patches {
        acc.add(patch)?;
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_tiling() {
        let g = make_grid(4, 4, 2, 2).unwrap();
        assert_eq!(g.row_origins, vec![0, 2]);
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn coverage_rule_appends_border_origin() {
        let g = make_grid(5, 5, 2, 2).unwrap();
        assert_eq!(g.row_origins, vec![0, 2, 3]);
        assert_eq!(g.col_origins, vec![0, 2, 3]);
        assert_eq!(g.len(), 9);
    }

    #[test]
    fn indian_pines_default_grid() {
        // Oracle: enumerate k*8 for k >= 0 while <= 145 - 20, then append 125.
        let mut expected = Vec::new();
        let mut k = 0;
        while k * 8 <= 125 {
            expected.push(k * 8);
            k += 1;
        }
        expected.push(125);
        let g = make_grid(145, 145, 20, 8).unwrap();
        assert_eq!(g.row_origins, expected);
        assert_eq!(g.row_origins.len(), 17);
        assert_eq!(g.len(), 289);
        assert_eq!(g.origin(17), (8, 0));
    }

    #[test]
    fn grid_errors() {
        assert!(make_grid(4, 5, 5, 1).is_err());
        assert!(make_grid(4, 4, 0, 1).is_err());
        assert!(make_grid(4, 4, 2, 0).is_err());
        assert!(make_grid(3, 3, 1, 2).is_err());
        assert!(make_grid(8, 8, 3, 3).is_ok());
    }

    #[test]
    fn lexicographic_extraction() {
        let c = HsiCube::new(2, 2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = extract_patch(&c, (0, 0), 2).unwrap();
        assert_eq!(p.values.shape(), (4, 1));
        assert_eq!(p.values.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn unit_block_is_pixel_spectrum() {
        let c = HsiCube::from_fn(3, 3, 4, |r, c, b| (r * 100 + c * 10 + b) as f64).unwrap();
        let p = extract_patch(&c, (2, 1), 1).unwrap();
        assert_eq!(p.values.shape(), (1, 4));
        assert_eq!(
            p.values.row(0).iter().copied().collect::<Vec<_>>(),
            vec![210.0, 211.0, 212.0, 213.0]
        );
        assert!(extract_patch(&c, (2, 2), 2).is_err());
    }

    #[test]
    fn scatter_back_on_window() {
        let c = HsiCube::from_fn(4, 4, 2, |r, c, b| (r * 4 + c) as f64 + 0.5 * b as f64).unwrap();
        let p = extract_patch(&c, (1, 1), 2).unwrap();
        let mut acc = Aggregator::new(4, 4, 2);
        acc.add(&p).unwrap();
        let plane = 16;
        for band in 0..2 {
            for r in 1..3 {
                for col in 1..3 {
                    let i = band * plane + r * 4 + col;
                    assert_eq!(acc.sums[i] / f64::from(acc.counts[r * 4 + col]), c.get(r, col, band));
                }
            }
        }
        // The rest of the plane is uncovered.
        assert!(acc.finish().is_err());
    }

    #[test]
    fn single_patch_covering_plane() {
        let c = HsiCube::from_fn(3, 3, 2, |r, c, b| (r + 2 * c + 5 * b) as f64).unwrap();
        let p = extract_patch(&c, (0, 0), 3).unwrap();
        assert_eq!(aggregate(&[p], 3, 3, 2).unwrap(), c);
    }

    #[test]
    fn overlap_mean() {
        // Two 2x2 windows on a 2x3 plane overlap in column 1.
        let left = PatchMatrix {
            origin: (0, 0),
            block: 2,
            values: DMatrix::from_element(4, 1, 1.0),
        };
        let right = PatchMatrix {
            origin: (0, 1),
            block: 2,
            values: DMatrix::from_element(4, 1, 3.0),
        };
        let out = aggregate(&[left.clone(), right], 2, 3, 1).unwrap();
        assert_eq!(out.data(), &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);

        let same = aggregate(&[left.clone(), PatchMatrix { origin: (0, 1), ..left }], 2, 3, 1).unwrap();
        assert!(same.data().iter().all(|&v| v == 1.0));
    }

    proptest! {
        #[test]
        fn grid_covers_every_pixel(rows in 1usize..40, cols in 1usize..40, b_seed in 0usize..1000, s_seed in 0usize..1000) {
            let block = 1 + b_seed % rows.min(cols);
            let stride = 1 + s_seed % block;
            let g = make_grid(rows, cols, block, stride).unwrap();
            let mut covered = vec![false; rows * cols];
            let origins: Vec<_> = g.origins().collect();
            for w in origins.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for (r0, c0) in origins {
                prop_assert!(r0 + block <= rows && c0 + block <= cols);
                for r in r0..r0 + block {
                    for c in c0..c0 + block {
                        covered[r * cols + c] = true;
                    }
                }
            }
            prop_assert!(covered.iter().all(|&v| v));
        }

        #[test]
        fn extract_then_aggregate_is_identity(rows in 1usize..16, cols in 1usize..16, bands in 1usize..5,
                                              b_seed in 0usize..100, s_seed in 0usize..100, seed in 0u64..1000) {
            let block = 1 + b_seed % rows.min(cols);
            let stride = 1 + s_seed % block;
            let c = HsiCube::from_fn(rows, cols, bands, |r, col, b| {
                ((seed as f64 + 1.0) * (r * 31 + col * 7 + b * 3) as f64).sin()
            }).unwrap();
            let g = make_grid(rows, cols, block, stride).unwrap();
            let patches: Vec<_> = g.origins().map(|o| extract_patch(&c, o, block).unwrap()).collect();
            let out = aggregate(&patches, rows, cols, bands).unwrap();
            for (a, b) in c.data().iter().zip(out.data()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
