//! Headerless raw cubes in the common interleaves and sample types.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HsiCube;
use crate::error::{Error, Result};

/// Sample ordering of a raw file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interleave {
    /// Band sequential: band, row, col (the canonical order).
    Bsq,
    /// Band interleaved by line: row, band, col.
    Bil,
    /// Band interleaved by pixel: row, col, band.
    Bip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleType {
    U8,
    U16,
    I16,
    U32,
    I32,
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endian {
    Little,
    Big,
}

macro_rules! from_str_table {
    ($ty:ty, $what:literal, { $($name:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($variant),)+
                    other => Err(Error::Usage(format!(
                        concat!("unknown ", $what, " {:?} (expected one of: {})"),
                        other,
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

from_str_table!(Interleave, "interleave", { "bsq" => Interleave::Bsq, "bil" => Interleave::Bil, "bip" => Interleave::Bip });
from_str_table!(SampleType, "sample type", {
    "u8" => SampleType::U8, "u16" => SampleType::U16, "i16" => SampleType::I16,
    "u32" => SampleType::U32, "i32" => SampleType::I32, "f32" => SampleType::F32, "f64" => SampleType::F64,
});
from_str_table!(Endian, "byte order", { "little" => Endian::Little, "big" => Endian::Big });

impl SampleType {
    pub fn size(self) -> usize {
        match self {
            SampleType::U8 => 1,
            SampleType::U16 | SampleType::I16 => 2,
            SampleType::U32 | SampleType::I32 | SampleType::F32 => 4,
            SampleType::F64 => 8,
        }
    }

    fn decode(self, bytes: &[u8], endian: Endian) -> f64 {
        macro_rules! read {
            ($t:ty) => {{
                let arr = bytes.try_into().expect("slice length matches sample size");
                match endian {
                    Endian::Little => <$t>::from_le_bytes(arr) as f64,
                    Endian::Big => <$t>::from_be_bytes(arr) as f64,
                }
            }};
        }
        match self {
            SampleType::U8 => bytes[0] as f64,
            SampleType::U16 => read!(u16),
            SampleType::I16 => read!(i16),
            SampleType::U32 => read!(u32),
            SampleType::I32 => read!(i32),
            SampleType::F32 => read!(f32),
            SampleType::F64 => read!(f64),
        }
    }
}

/// Layout of a headerless raw cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawLayout {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub interleave: Interleave,
    pub sample: SampleType,
    pub endian: Endian,
    /// Bytes to skip before the first sample.
    pub offset: usize,
}

/// Decodes `bytes` laid out as `layout` into a band-major cube.
pub fn decode_raw(bytes: &[u8], layout: &RawLayout) -> Result<HsiCube> {
    let RawLayout {
        rows,
        cols,
        bands,
        interleave,
        sample,
        endian,
        offset,
    } = *layout;
    let count = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(bands))
        .ok_or_else(|| Error::InvalidParameter("cube dimensions overflow".into()))?;
    let size = sample.size();
    let expected = count * size + offset;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            expected: expected as u64,
            found: bytes.len() as u64,
        });
    }
    let payload = &bytes[offset..];
    let mut data = vec![0.0; count];
    for (i, chunk) in payload.chunks_exact(size).enumerate() {
        let (r, c, b) = match interleave {
            Interleave::Bsq => ((i / cols) % rows, i % cols, i / (rows * cols)),
            Interleave::Bil => (i / (bands * cols), i % cols, (i / cols) % bands),
            Interleave::Bip => (i / (cols * bands), (i / bands) % cols, i % bands),
        };
        data[(b * rows + r) * cols + c] = sample.decode(chunk, endian);
    }
    HsiCube::new(rows, cols, bands, data)
}

pub fn read_raw(path: impl AsRef<Path>, layout: &RawLayout) -> Result<HsiCube> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raw(&bytes, layout)
}
