//! Parameter analysis: exhaustive sweeps over the integer parameters, the
//! rank × stride surface, and Nelder-Mead tuning of the corruption fraction.

mod simplex;

pub use simplex::{nelder_mead, NelderMeadConfig, NelderMeadResult, Step, Termination, TraceRow};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cube::HsiCube;
use crate::error::{Error, Result};
use crate::lrmr::{denoise, LrmrParams, SolverConfig};
use crate::metrics::{gradient_1d, psnr};
use crate::noise::{corrupt, NoiseSpec};

/// Objective value returned for infeasible `p < 0`.
pub const INFEASIBLE_PENALTY: f64 = 1e6;

/// A clean reference, its degraded counterpart and the solver settings: every
/// evaluation against it is a deterministic function of the parameters.
#[derive(Debug, Clone)]
pub struct Context {
    pub clean: HsiCube,
    pub noisy: HsiCube,
    pub noise: Option<NoiseSpec>,
    pub solver: SolverConfig,
}

impl Context {
    pub fn new(clean: HsiCube, noisy: HsiCube, solver: SolverConfig) -> Result<Self> {
        if clean.dims() != noisy.dims() {
            return Err(Error::DimensionMismatch(format!(
                "clean cube is {:?}, noisy cube is {:?}",
                clean.dims(),
                noisy.dims()
            )));
        }
        Ok(Self {
            clean,
            noisy,
            noise: None,
            solver,
        })
    }

    /// Degrades `clean` with `noise` once; the realization is fixed by its seed.
    pub fn with_noise(clean: HsiCube, noise: NoiseSpec, solver: SolverConfig) -> Result<Self> {
        let noisy = corrupt(&clean, &noise)?;
        Ok(Self {
            clean,
            noisy,
            noise: Some(noise),
            solver,
        })
    }

    /// Denoises with `params`, returning (PSNR against the clean cube, seconds).
    pub fn evaluate(&self, params: &LrmrParams) -> Result<(f64, f64)> {
        let (restored, report) = denoise(&self.noisy, params, &self.solver)?;
        Ok((psnr(&self.clean, &restored)?.psnr_db, report.wall_seconds))
    }
}

/// `p ↦ −PSNR` with `r`, `b`, `s` held fixed.
pub struct Objective<'a> {
    pub context: &'a Context,
    pub fixed: LrmrParams,
}

impl Objective<'_> {
    pub fn eval(&self, p: f64) -> Result<f64> {
        if p < 0.0 {
            return Ok(INFEASIBLE_PENALTY);
        }
        let (db, _) = self.context.evaluate(&LrmrParams { p, ..self.fixed })?;
        Ok(-db)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub p_start: f64,
    pub psnr_start: f64,
    pub p_final: f64,
    pub psnr_final: f64,
    pub budget_exhausted: bool,
    pub search: NelderMeadResult,
}

/// One row of a tuning trace CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneTraceRow {
    pub iter: usize,
    pub best_p: f64,
    pub best_negpsnr: f64,
}

impl TuneResult {
    pub fn trace_rows(&self) -> Vec<TuneTraceRow> {
        self.search
            .trace
            .iter()
            .map(|r| TuneTraceRow {
                iter: r.iter,
                best_p: r.best_x[0],
                best_negpsnr: r.best_f,
            })
            .collect()
    }
}

/// Minimizes −PSNR over `p` from `p0` with the other parameters of `fixed`.
pub fn tune_p(context: &Context, fixed: LrmrParams, p0: f64, cfg: &NelderMeadConfig) -> Result<TuneResult> {
    if !(p0.is_finite() && p0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "starting p must be positive, got {p0}"
        )));
    }
    fixed.validate(context.noisy.dims())?;
    let objective = Objective { context, fixed };
    let start = objective.eval(p0)?;
    let search = nelder_mead(|x| objective.eval(x[0]), &[p0], cfg)?;
    Ok(TuneResult {
        p_start: p0,
        psnr_start: -start,
        p_final: search.x[0],
        psnr_final: -search.f,
        budget_exhausted: search.budget_exhausted(),
        search,
    })
}

/// Which tunable a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "r")]
    Rank,
    #[serde(rename = "s")]
    Stride,
    #[serde(rename = "b")]
    Block,
    #[serde(rename = "p")]
    P,
}

impl SweepParam {
    pub fn symbol(self) -> &'static str {
        match self {
            SweepParam::Rank => "r",
            SweepParam::Stride => "s",
            SweepParam::Block => "b",
            SweepParam::P => "p",
        }
    }

    /// `fixed` with this parameter set to `value`.
    pub fn apply(self, fixed: LrmrParams, value: f64) -> Result<LrmrParams> {
        let count = || {
            if value.fract() == 0.0 && value >= 1.0 && value <= usize::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidParameter(format!(
                    "{} must be a positive integer, got {value}",
                    self.symbol()
                )))
            }
        };
        Ok(match self {
            SweepParam::Rank => LrmrParams {
                rank: count()?,
                ..fixed
            },
            SweepParam::Stride => LrmrParams {
                stride: count()?,
                ..fixed
            },
            SweepParam::Block => LrmrParams {
                block: count()?,
                ..fixed
            },
            SweepParam::P => LrmrParams { p: value, ..fixed },
        })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(SweepParam::Rank),
            "s" => Ok(SweepParam::Stride),
            "b" => Ok(SweepParam::Block),
            "p" => Ok(SweepParam::P),
            other => Err(Error::Usage(format!(
                "unknown sweep parameter {other:?} (expected r, s, b or p)"
            ))),
        }
    }
}

/// One sweep point. A failed point has NaN PSNR and seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(rename = "param")]
    pub param_name: SweepParam,
    #[serde(rename = "value")]
    pub param_value: f64,
    #[serde(rename = "psnr")]
    pub psnr_db: f64,
    #[serde(rename = "seconds")]
    pub wall_seconds: f64,
    pub grad_psnr: f64,
    #[serde(rename = "grad_seconds")]
    pub grad_time: f64,
}

impl SweepRecord {
    pub fn failed(&self) -> bool {
        self.psnr_db.is_nan()
    }
}

/// Fills the gradient columns; NaN when there are fewer than two points.
pub fn fill_gradients(records: &mut [SweepRecord]) {
    let psnr: Vec<f64> = records.iter().map(|r| r.psnr_db).collect();
    let secs: Vec<f64> = records.iter().map(|r| r.wall_seconds).collect();
    match (gradient_1d(&psnr), gradient_1d(&secs)) {
        (Ok(gp), Ok(gt)) => {
            for ((r, a), b) in records.iter_mut().zip(gp).zip(gt) {
                r.grad_psnr = a;
                r.grad_time = b;
            }
        }
        _ => {
            for r in records.iter_mut() {
                r.grad_psnr = f64::NAN;
                r.grad_time = f64::NAN;
            }
        }
    }
}

/// Runs denoise + PSNR once per value, in order. A point that fails is kept
/// as a NaN row and reported through `on_error`; the sweep continues.
pub fn sweep(
    param: SweepParam,
    values: &[f64],
    fixed: LrmrParams,
    context: &Context,
    mut on_error: impl FnMut(f64, &Error),
) -> Result<Vec<SweepRecord>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one value".into()));
    }
    let mut records: Vec<SweepRecord> = values
        .iter()
        .map(|&value| {
            let outcome = param.apply(fixed, value).and_then(|p| context.evaluate(&p));
            let (psnr_db, wall_seconds) = outcome.unwrap_or_else(|e| {
                on_error(value, &e);
                (f64::NAN, f64::NAN)
            });
            SweepRecord {
                param_name: param,
                param_value: value,
                psnr_db,
                wall_seconds,
                grad_psnr: f64::NAN,
                grad_time: f64::NAN,
            }
        })
        .collect();
    fill_gradients(&mut records);
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub r: usize,
    pub s: usize,
    pub psnr: f64,
}

/// PSNR over the full `r × s` grid (r outer, s inner) with `p`, `b` from `fixed`.
pub fn surface(
    r_values: &[usize],
    s_values: &[usize],
    fixed: LrmrParams,
    context: &Context,
    mut on_error: impl FnMut(usize, usize, &Error),
) -> Result<Vec<SurfacePoint>> {
    if r_values.is_empty() || s_values.is_empty() {
        return Err(Error::InvalidParameter("surface needs at least one r and one s".into()));
    }
    let mut out = Vec::with_capacity(r_values.len() * s_values.len());
    for &r in r_values {
        for &s in s_values {
            let params = LrmrParams {
                rank: r,
                stride: s,
                ..fixed
            };
            let psnr = match context.evaluate(&params) {
                Ok((db, _)) => db,
                Err(e) => {
                    on_error(r, s, &e);
                    f64::NAN
                }
            };
            out.push(SurfacePoint { r, s, psnr });
        }
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}

/// Writes rows with a header line in the struct's field order.
pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

/// Parses a sweep CSV (`param,value,psnr,seconds,grad_psnr,grad_seconds`).
pub fn read_sweep_csv(input: impl std::io::Read) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_error)?.clone();
    let expected = ["param", "value", "psnr", "seconds", "grad_psnr", "grad_seconds"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Csv(format!(
            "expected header {}, got {}",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<SweepRecord>, _>>()
        .map_err(csv_error)?;
    if rows.is_empty() {
        return Err(Error::Csv("no sweep rows".into()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, SceneSpec};

    fn small_context() -> Context {
        let clean = generate(&SceneSpec {
            rows: 24,
            cols: 24,
            bands: 12,
            ..SceneSpec::benchmark(5)
        })
        .unwrap();
        Context::with_noise(clean, NoiseSpec::paper_like(3), SolverConfig::default()).unwrap()
    }

    fn fixed() -> LrmrParams {
        LrmrParams {
            rank: 3,
            p: 0.15,
            block: 10,
            stride: 4,
        }
    }

    #[test]
    fn objective_is_deterministic_and_penalizes_negative_p() {
        let ctx = small_context();
        let obj = Objective {
            context: &ctx,
            fixed: fixed(),
        };
        assert_eq!(obj.eval(0.12).unwrap().to_bits(), obj.eval(0.12).unwrap().to_bits());
        assert_eq!(obj.eval(-0.1).unwrap(), INFEASIBLE_PENALTY);
    }

    #[test]
    fn sweep_records_and_gradients() {
        let ctx = small_context();
        let recs = sweep(SweepParam::Rank, &[1.0, 2.0, 3.0], fixed(), &ctx, |_, _| {}).unwrap();
        assert_eq!(recs.len(), 3);
        let g = gradient_1d(&recs.iter().map(|r| r.psnr_db).collect::<Vec<_>>()).unwrap();
        for (r, g) in recs.iter().zip(g) {
            assert_eq!(r.grad_psnr, g);
        }
        let again = sweep(SweepParam::Rank, &[1.0, 2.0, 3.0], fixed(), &ctx, |_, _| {}).unwrap();
        let col = |v: &[SweepRecord]| v.iter().map(|r| r.psnr_db.to_bits()).collect::<Vec<_>>();
        assert_eq!(col(&recs), col(&again));
    }

    #[test]
    fn single_point_sweep_has_nan_gradients() {
        let ctx = small_context();
        let recs = sweep(SweepParam::Block, &[8.0], fixed(), &ctx, |_, _| {}).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].grad_psnr.is_nan() && recs[0].grad_time.is_nan());
    }

    #[test]
    fn failed_points_do_not_stop_the_sweep() {
        let ctx = small_context();
        let mut failures = Vec::new();
        let recs = sweep(SweepParam::Block, &[8.0, 30.0, 2.5, 10.0], fixed(), &ctx, |v, _| {
            failures.push(v)
        })
        .unwrap();
        assert_eq!(failures, vec![30.0, 2.5]);
        assert!(!recs[0].failed() && recs[1].failed() && recs[2].failed() && !recs[3].failed());
        assert!(sweep(SweepParam::Block, &[], fixed(), &ctx, |_, _| {}).is_err());
    }

    #[test]
    fn surface_rows_match_sweeps() {
        let ctx = small_context();
        let grid = surface(&[1, 2], &[4, 6], fixed(), &ctx, |_, _, _| {}).unwrap();
        assert_eq!(grid.len(), 4);
        let s_sweep = sweep(
            SweepParam::Stride,
            &[4.0, 6.0],
            LrmrParams { rank: 2, ..fixed() },
            &ctx,
            |_, _| {},
        )
        .unwrap();
        assert_eq!(grid[2].psnr.to_bits(), s_sweep[0].psnr_db.to_bits());
        assert_eq!(grid[3].psnr.to_bits(), s_sweep[1].psnr_db.to_bits());
    }

    #[test]
    fn csv_round_trip_and_header() {
        let rows = vec![
            SweepRecord {
                param_name: SweepParam::Rank,
                param_value: 1.0,
                psnr_db: 20.99,
                wall_seconds: 1.5,
                grad_psnr: 14.7,
                grad_time: f64::NAN,
            },
            SweepRecord {
                param_name: SweepParam::Rank,
                param_value: 2.0,
                psnr_db: 35.69,
                wall_seconds: 1.25,
                grad_psnr: 10.02,
                grad_time: 0.5,
            },
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(
            text.starts_with("param,value,psnr,seconds,grad_psnr,grad_seconds\nr,1.0,20.99,1.5,14.7,NaN\n"),
            "{text}"
        );
        let back = read_sweep_csv(&buf[..]).unwrap();
        assert_eq!(back[1], rows[1]);
        assert!(back[0].grad_time.is_nan());
        assert!(read_sweep_csv("param,value,psnr,seconds,grad_psnr,grad_seconds\n".as_bytes()).is_err());
        assert!(read_sweep_csv("".as_bytes()).is_err());
        assert!(read_sweep_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn tune_rejects_bad_start() {
        let ctx = small_context();
        assert!(tune_p(&ctx, fixed(), 0.0, &NelderMeadConfig::default()).is_err());
        assert!(tune_p(&ctx, fixed(), f64::NAN, &NelderMeadConfig::default()).is_err());
    }

    #[test]
    fn tune_from_minimizer_of_synthetic_objective() {
        // Objective with an exact local minimizer at 0.2 through the same wrapper path.
        let res = nelder_mead(
            |x| {
                Ok(if x[0] < 0.0 {
                    INFEASIBLE_PENALTY
                } else {
                    (x[0] - 0.2).powi(2)
                })
            },
            &[0.2],
            &NelderMeadConfig::default(),
        )
        .unwrap();
        assert!((res.x[0] - 0.2).abs() <= NelderMeadConfig::default().x_tol);
    }
}
