//! C ABI for the hsi-lrmr toolkit.
//!
//! Cubes cross the boundary as opaque `HsiCube` handles created by
//! `hsi_cube_new` / `hsi_cube_load` and released with `hsi_cube_free`. Every
//! fallible function returns an `HsiStatus`; on failure the message is
//! available from `hsi_last_error_message` on the same thread. Panics are
//! caught and reported as `HSI_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hsi_lrmr::godec::RankProjector;
use hsi_lrmr::{Error, ErrorKind, LrmrParams, NoiseSpec, SolverConfig};

/// Result code of every fallible call. Values 1-3 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsiStatus {
    Ok = 0,
    /// Bad argument: null pointer, invalid UTF-8 path, bad parameter combination.
    Usage = 1,
    /// Unreadable, malformed or inconsistent data.
    Data = 2,
    /// The decomposition failed numerically.
    Solver = 3,
    Panic = 4,
}

/// Opaque cube handle.
pub struct HsiCube {
    inner: hsi_lrmr::HsiCube,
}

/// Noise profile, see `hsi_noise_paper_like`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HsiNoiseSpec {
    pub gaussian_sigma: f64,
    pub impulse_density: f64,
    pub dead_line_count: usize,
    pub stripe_count: usize,
    pub affected_band_fraction: f64,
    pub seed: u64,
}

/// Denoising parameters: rank bound, corruption fraction, blocksize, stride.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HsiParams {
    pub rank: usize,
    pub p: f64,
    pub block: usize,
    pub stride: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HsiSolverOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
    /// Selects the randomized projection seeded by `projection_seed`.
    pub randomized: bool,
    pub projection_seed: u64,
    pub rank_continuation: bool,
    /// 0 uses the default thread pool.
    pub workers: usize,
}

/// Statistics of one `hsi_denoise` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HsiRunSummary {
    pub patches: usize,
    pub cardinality: usize,
    pub mean_inner_iterations: f64,
    pub max_inner_iterations: usize,
    pub unconverged_patches: usize,
    pub wall_seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> HsiStatus {
    match e.kind() {
        ErrorKind::Usage => HsiStatus::Usage,
        ErrorKind::Data => HsiStatus::Data,
        ErrorKind::Solver => HsiStatus::Solver,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Error>) -> HsiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsiStatus::Ok,
        Ok(Err(e)) => {
            let status = status_of(&e);
            set_last_error(e.to_string());
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            HsiStatus::Panic
        }
    }
}

fn null(what: &str) -> Error {
    Error::Usage(format!("{what} must not be null"))
}

unsafe fn cube_ref<'a>(cube: *const HsiCube, what: &str) -> Result<&'a hsi_lrmr::HsiCube, Error> {
    cube.as_ref().map(|c| &c.inner).ok_or_else(|| null(what))
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, Error> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map_err(|_| Error::Usage("path is not valid UTF-8".into()))
}

unsafe fn emit(out: *mut *mut HsiCube, cube: hsi_lrmr::HsiCube) -> Result<(), Error> {
    if out.is_null() {
        return Err(null("output handle pointer"));
    }
    *out = Box::into_raw(Box::new(HsiCube { inner: cube }));
    Ok(())
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hsi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hsi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a cube from `rows * cols * bands` band-major values (copied).
///
/// # Safety
/// `data` must point to that many readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hsi_cube_new(
    rows: usize,
    cols: usize,
    bands: usize,
    data: *const f64,
    out: *mut *mut HsiCube,
) -> HsiStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let len = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(bands))
            .ok_or_else(|| Error::InvalidParameter("cube dimensions overflow".into()))?;
        let values = std::slice::from_raw_parts(data, len).to_vec();
        emit(out, hsi_lrmr::HsiCube::new(rows, cols, bands, values)?)
    })
}

/// Loads a canonical `.hdr`/`.raw` cube.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hsi_cube_load(path: *const c_char, out: *mut *mut HsiCube) -> HsiStatus {
    guard(|| emit(out, hsi_lrmr::load_cube(path_arg(path)?)?))
}

/// Writes `cube` as a canonical `.hdr`/`.raw` pair.
///
/// # Safety
/// `cube` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hsi_cube_write(cube: *const HsiCube, path: *const c_char) -> HsiStatus {
    guard(|| {
        hsi_lrmr::write_cube(cube_ref(cube, "cube")?, path_arg(path)?)?;
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `cube` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hsi_cube_free(cube: *mut HsiCube) {
    if !cube.is_null() {
        drop(Box::from_raw(cube));
    }
}

/// # Safety
/// `cube` must be a live handle; each output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn hsi_cube_dims(
    cube: *const HsiCube,
    rows: *mut usize,
    cols: *mut usize,
    bands: *mut usize,
) -> HsiStatus {
    guard(|| {
        let c = cube_ref(cube, "cube")?;
        for (dst, v) in [(rows, c.rows()), (cols, c.cols()), (bands, c.bands())] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}

/// Copies the band-major values into `buffer`, which must hold exactly
/// `rows * cols * bands` doubles (`len`).
///
/// # Safety
/// `cube` must be a live handle; `buffer` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsi_cube_copy_data(cube: *const HsiCube, buffer: *mut f64, len: usize) -> HsiStatus {
    guard(|| {
        let c = cube_ref(cube, "cube")?;
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        if len != c.len() {
            return Err(Error::SizeMismatch {
                expected: c.len() as u64,
                found: len as u64,
            });
        }
        std::slice::from_raw_parts_mut(buffer, len).copy_from_slice(c.data());
        Ok(())
    })
}

/// Min-max normalizes onto `[0, 1]`; `min` / `max` (nullable) receive the
/// original range.
///
/// # Safety
/// `cube` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hsi_cube_normalize(
    cube: *const HsiCube,
    out: *mut *mut HsiCube,
    min: *mut f64,
    max: *mut f64,
) -> HsiStatus {
    guard(|| {
        let (normalized, scale) = hsi_lrmr::normalize(cube_ref(cube, "cube")?)?;
        emit(out, normalized)?;
        if let Some(m) = min.as_mut() {
            *m = scale.min;
        }
        if let Some(m) = max.as_mut() {
            *m = scale.max;
        }
        Ok(())
    })
}

/// Gaussian sigma 0.025, impulse density 0.10, all bands, no lines or stripes.
#[no_mangle]
pub extern "C" fn hsi_noise_paper_like(seed: u64) -> HsiNoiseSpec {
    let s = NoiseSpec::paper_like(seed);
    HsiNoiseSpec {
        gaussian_sigma: s.gaussian_sigma,
        impulse_density: s.impulse_density,
        dead_line_count: s.dead_line_count,
        stripe_count: s.stripe_count,
        affected_band_fraction: s.affected_band_fraction,
        seed: s.seed,
    }
}

/// # Safety
/// `cube` must be a live handle, `spec` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hsi_corrupt(
    cube: *const HsiCube,
    spec: *const HsiNoiseSpec,
    out: *mut *mut HsiCube,
) -> HsiStatus {
    guard(|| {
        let s = spec.as_ref().ok_or_else(|| null("spec"))?;
        let spec = NoiseSpec {
            gaussian_sigma: s.gaussian_sigma,
            impulse_density: s.impulse_density,
            dead_line_count: s.dead_line_count,
            stripe_count: s.stripe_count,
            affected_band_fraction: s.affected_band_fraction,
            seed: s.seed,
        };
        emit(out, hsi_lrmr::corrupt(cube_ref(cube, "cube")?, &spec)?)
    })
}

/// `r = 7, p = 0.15, b = 20, s = 8`.
#[no_mangle]
pub extern "C" fn hsi_params_default() -> HsiParams {
    let p = LrmrParams::default();
    HsiParams {
        rank: p.rank,
        p: p.p,
        block: p.block,
        stride: p.stride,
    }
}

/// Exact projection, 100 iterations, tolerance 1e-6, rank continuation on.
#[no_mangle]
pub extern "C" fn hsi_solver_options_default() -> HsiSolverOptions {
    let c = SolverConfig::default();
    HsiSolverOptions {
        max_iters: c.max_iters,
        rel_tol: c.rel_tol,
        randomized: false,
        projection_seed: 0,
        rank_continuation: c.rank_continuation,
        workers: 0,
    }
}

/// Denoises `cube`. `solver` may be null for the defaults; `summary` may be null.
///
/// # Safety
/// `cube` must be a live handle, `params` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hsi_denoise(
    cube: *const HsiCube,
    params: *const HsiParams,
    solver: *const HsiSolverOptions,
    out: *mut *mut HsiCube,
    summary: *mut HsiRunSummary,
) -> HsiStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let o = solver.as_ref().copied().unwrap_or_else(|| hsi_solver_options_default());
        let config = SolverConfig {
            max_iters: o.max_iters,
            rel_tol: o.rel_tol,
            projector: if o.randomized {
                RankProjector::randomized(o.projection_seed)
            } else {
                RankProjector::Exact
            },
            rank_continuation: o.rank_continuation,
            workers: (o.workers > 0).then_some(o.workers),
        };
        let params = LrmrParams {
            rank: p.rank,
            p: p.p,
            block: p.block,
            stride: p.stride,
        };
        let (restored, report) = hsi_lrmr::denoise(cube_ref(cube, "cube")?, &params, &config)?;
        emit(out, restored)?;
        if let Some(s) = summary.as_mut() {
            *s = HsiRunSummary {
                patches: report.patches,
                cardinality: report.cardinality,
                mean_inner_iterations: report.mean_inner_iterations,
                max_inner_iterations: report.max_inner_iterations,
                unconverged_patches: report.unconverged_patches,
                wall_seconds: report.wall_seconds,
            };
        }
        Ok(())
    })
}

/// PSNR in dB of `test` against `reference`; `+inf` for identical cubes.
///
/// # Safety
/// Both handles must be live; `psnr_db` writable.
#[no_mangle]
pub unsafe extern "C" fn hsi_psnr(reference: *const HsiCube, test: *const HsiCube, psnr_db: *mut f64) -> HsiStatus {
    guard(|| {
        let report = hsi_lrmr::psnr(cube_ref(reference, "reference")?, cube_ref(test, "test")?)?;
        *psnr_db.as_mut().ok_or_else(|| null("psnr_db"))? = report.psnr_db;
        Ok(())
    })
}

/// Central differences inside, one-sided at the ends; `len >= 2`.
///
/// # Safety
/// `values` readable and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsi_gradient_1d(values: *const f64, len: usize, out: *mut f64) -> HsiStatus {
    guard(|| {
        if values.is_null() || out.is_null() {
            return Err(null("values/out"));
        }
        let g = hsi_lrmr::gradient_1d(std::slice::from_raw_parts(values, len))?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&g);
        Ok(())
    })
}
