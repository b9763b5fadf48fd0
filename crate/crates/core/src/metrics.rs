//! PSNR, finite-difference gradients over sweep columns, and wall-clock timing.

use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cube::{Dims, HsiCube};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// `+inf` for a perfect reconstruction, serialized as `"inf"`.
    #[serde(serialize_with = "serialize_db", deserialize_with = "deserialize_db")]
    pub psnr_db: f64,
    pub max_ref: f64,
    pub sse: f64,
    pub dims: Dims,
}

impl QualityReport {
    pub fn is_perfect(&self) -> bool {
        self.psnr_db == f64::INFINITY
    }
}

fn serialize_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else if *v < 0.0 {
        s.serialize_str("-inf")
    } else {
        s.serialize_str("nan")
    }
}

fn deserialize_db<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Db {
        Num(f64),
        Text(String),
    }
    match Db::deserialize(d)? {
        Db::Num(v) => Ok(v),
        Db::Text(t) => match t.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(serde::de::Error::custom(format!("invalid dB value {other:?}"))),
        },
    }
}

/// `10 log10(max(C)^2 · m·n·w / ||C - C̃||^2)` with the peak taken over the
/// reference cube `C`.
pub fn psnr(reference: &HsiCube, test: &HsiCube) -> Result<QualityReport> {
    if reference.dims() != test.dims() {
        return Err(Error::DimensionMismatch(format!(
            "reference is {:?}, test is {:?}",
            reference.dims(),
            test.dims()
        )));
    }
    let sse: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let max_ref = reference.min_max().1;
    let psnr_db = if sse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (max_ref * max_ref * reference.len() as f64 / sse).log10()
    };
    Ok(QualityReport {
        psnr_db,
        max_ref,
        sse,
        dims: reference.dims(),
    })
}

/// Unit-spacing gradient: central differences inside, one-sided at the ends.
pub fn gradient_1d(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "gradient needs at least 2 samples, got {n}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    out.push(values[1] - values[0]);
    out.extend(values.windows(3).map(|w| (w[2] - w[0]) / 2.0));
    out.push(values[n - 1] - values[n - 2]);
    Ok(out)
}

/// Runs `f` and returns its result with the elapsed wall time in seconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}
