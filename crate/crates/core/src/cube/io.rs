//! Canonical on-disk cube format.
//!
//! A cube is a pair of files sharing a stem: `<stem>.hdr`, UTF-8 text with one
//! `key=value` per line (`rows`, `cols`, `bands`, `dtype=f64`,
//! `order=band-major`), and `<stem>.raw`, the values as little-endian IEEE-754
//! doubles in band-major order.

use std::fs;
use std::path::{Path, PathBuf};

use super::HsiCube;
use crate::error::{Error, Result};

/// Header and payload locations for one cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubePaths {
    pub header: PathBuf,
    pub payload: PathBuf,
}

impl CubePaths {
    /// Accepts the stem, or either member of the pair.
    pub fn new(path: impl AsRef<Path>) -> Self {
        let path = path.as_ref();
        let stem = match path.extension().and_then(|e| e.to_str()) {
            Some("hdr") | Some("raw") => path.with_extension(""),
            _ => path.to_path_buf(),
        };
        let mut header = stem.clone().into_os_string();
        header.push(".hdr");
        let mut payload = stem.into_os_string();
        payload.push(".raw");
        Self {
            header: header.into(),
            payload: payload.into(),
        }
    }
}

/// Parsed header fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
}

impl Header {
    pub fn render(&self) -> String {
        format!(
            "rows={}\ncols={}\nbands={}\ndtype=f64\norder=band-major\n",
            self.rows, self.cols, self.bands
        )
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Header {
            path: path.to_path_buf(),
            reason,
        };
        let (mut rows, mut cols, mut bands) = (None, None, None);
        let (mut dtype, mut order) = (None, None);
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let count = || {
                value
                    .parse::<usize>()
                    .map_err(|_| bad(format!("{key} must be a non-negative integer, got {value:?}")))
            };
            match key {
                "rows" => rows = Some(count()?),
                "cols" => cols = Some(count()?),
                "bands" => bands = Some(count()?),
                "dtype" => dtype = Some(value.to_string()),
                "order" => order = Some(value.to_string()),
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        match dtype.as_deref() {
            Some("f64") => {}
            Some(other) => return Err(bad(format!("unsupported dtype {other:?}"))),
            None => return Err(bad("missing dtype".into())),
        }
        match order.as_deref() {
            Some("band-major") => {}
            Some(other) => return Err(bad(format!("unsupported order {other:?}"))),
            None => return Err(bad("missing order".into())),
        }
        let header = Header {
            rows: rows.ok_or_else(|| bad("missing rows".into()))?,
            cols: cols.ok_or_else(|| bad("missing cols".into()))?,
            bands: bands.ok_or_else(|| bad("missing bands".into()))?,
        };
        if header.rows == 0 || header.cols == 0 || header.bands == 0 {
            return Err(bad("dimensions must be positive".into()));
        }
        Ok(header)
    }

    fn payload_bytes(&self) -> Option<u64> {
        (self.rows as u64)
            .checked_mul(self.cols as u64)?
            .checked_mul(self.bands as u64)?
            .checked_mul(8)
    }
}

pub fn load_cube(path: impl AsRef<Path>) -> Result<HsiCube> {
    let paths = CubePaths::new(path);
    let text = fs::read_to_string(&paths.header).map_err(|e| Error::io(&paths.header, e))?;
    let header = Header::parse(&text, &paths.header)?;
    let expected = header.payload_bytes().ok_or_else(|| Error::Header {
        path: paths.header.clone(),
        reason: "dimensions overflow".into(),
    })?;
    let found = fs::metadata(&paths.payload)
        .map_err(|e| Error::io(&paths.payload, e))?
        .len();
    if found != expected {
        return Err(Error::SizeMismatch { expected, found });
    }
    let bytes = fs::read(&paths.payload).map_err(|e| Error::io(&paths.payload, e))?;
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            expected,
            found: bytes.len() as u64,
        });
    }
    let data = bytes
        .chunks_exact(8)
        .map(|chunk| f64::from_le_bytes(chunk.try_into().expect("8-byte chunk")))
        .collect();
    HsiCube::new(header.rows, header.cols, header.bands, data)
}

pub fn write_cube(cube: &HsiCube, path: impl AsRef<Path>) -> Result<CubePaths> {
    let paths = CubePaths::new(path);
    let header = Header {
        rows: cube.rows(),
        cols: cube.cols(),
        bands: cube.bands(),
    };
    let mut bytes = Vec::with_capacity(cube.len() * 8);
    for v in cube.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&paths.header, header.render()).map_err(|e| Error::io(&paths.header, e))?;
    fs::write(&paths.payload, bytes).map_err(|e| Error::io(&paths.payload, e))?;
    Ok(paths)
}
