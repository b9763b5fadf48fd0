//! The `hsi-lrmr` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.
//! Machine-readable results go to stdout (or the named output files), progress
//! to stderr. Relative input paths that do not exist are looked up in
//! `$HSI_DATA_DIR`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cube::{self, CubePaths, Endian, HsiCube, Interleave, RawLayout, SampleType};
use crate::error::{Error, ErrorKind, Result};
use crate::godec::RankProjector;
use crate::lrmr::{denoise, LrmrParams, SolverConfig};
use crate::metrics::psnr;
use crate::noise::{corrupt, NoiseSpec};
use crate::report::{self, Section};
use crate::synthetic::{generate, SceneSpec};
use crate::tune::{self, Context, NelderMeadConfig, SweepParam};

/// Environment variable naming the fallback directory for input cubes.
pub const DATA_DIR_VAR: &str = "HSI_DATA_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "hsi-lrmr",
    version,
    about = "Hyperspectral denoising by patch-wise low-rank matrix recovery"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a headerless raw cube into the canonical .hdr/.raw pair
    Convert(ConvertArgs),
    /// Write the seeded synthetic benchmark scene
    Synth(SynthArgs),
    /// Degrade a normalized cube with seeded noise
    Corrupt(CorruptArgs),
    /// Restore a cube patch by patch
    Denoise(DenoiseArgs),
    /// Compare a test cube with a reference
    Psnr(PsnrArgs),
    /// Denoise once per value of one parameter and tabulate PSNR and time
    Sweep(SweepArgs),
    /// Tune p with Nelder-Mead on -PSNR
    TuneP(TunePArgs),
    /// PSNR over an r x s grid
    Surface(SurfaceArgs),
    /// Render sweep CSVs as markdown tables and plot data
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Raw input file
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output cube (.hdr/.raw stem)
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long)]
    pub bands: usize,
    /// bsq, bil or bip
    #[arg(long, default_value = "bsq")]
    pub interleave: String,
    /// u8, u16, i16, u32, i32, f32 or f64
    #[arg(long, default_value = "f64")]
    pub dtype: String,
    /// little or big
    #[arg(long, default_value = "little")]
    pub endian: String,
    /// Bytes to skip at the start of the file
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
    /// Min-max normalize to [0, 1]; the scale record is printed
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output cube (.hdr/.raw stem)
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub rows: usize,
    #[arg(long, default_value_t = 64)]
    pub cols: usize,
    #[arg(long, default_value_t = 32)]
    pub bands: usize,
}

/// Noise options. Unset options take the `paper-like` profile values.
#[derive(Debug, Args, Default)]
pub struct NoiseArgs {
    /// Gaussian standard deviation [default: 0.025]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Impulse density [default: 0.10]
    #[arg(long)]
    pub impulse: Option<f64>,
    /// Dead rows per affected band [default: 0]
    #[arg(long)]
    pub dead_lines: Option<usize>,
    /// Striped columns per affected band [default: 0]
    #[arg(long)]
    pub stripes: Option<usize>,
    /// Fraction of bands affected [default: 1.0]
    #[arg(long)]
    pub band_fraction: Option<f64>,
    /// Noise seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

impl NoiseArgs {
    fn any_set(&self) -> bool {
        self.sigma.is_some()
            || self.impulse.is_some()
            || self.dead_lines.is_some()
            || self.stripes.is_some()
            || self.band_fraction.is_some()
            || self.seed.is_some()
    }

    pub fn spec(&self) -> NoiseSpec {
        let base = NoiseSpec::paper_like(self.seed.unwrap_or(0));
        NoiseSpec {
            gaussian_sigma: self.sigma.unwrap_or(base.gaussian_sigma),
            impulse_density: self.impulse.unwrap_or(base.impulse_density),
            dead_line_count: self.dead_lines.unwrap_or(base.dead_line_count),
            stripe_count: self.stripes.unwrap_or(base.stripe_count),
            affected_band_fraction: self.band_fraction.unwrap_or(base.affected_band_fraction),
            seed: base.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    /// Input cube (.hdr/.raw stem)
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output cube (.hdr/.raw stem)
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Rank bound
    #[arg(long = "r", value_name = "R", default_value_t = 7)]
    pub rank: usize,
    /// Corruption fraction; k = round(p b^2 w) clamped to b^2 w
    #[arg(long = "p", value_name = "P", default_value_t = 0.15)]
    pub p: f64,
    /// Blocksize
    #[arg(long = "b", value_name = "B", default_value_t = 20)]
    pub block: usize,
    /// Stride
    #[arg(long = "s", value_name = "S", default_value_t = 8)]
    pub stride: usize,
}

impl ParamArgs {
    pub fn params(&self) -> LrmrParams {
        LrmrParams {
            rank: self.rank,
            p: self.p,
            block: self.block,
            stride: self.stride,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// GoDec iteration cap per patch (per continuation stage)
    #[arg(long, default_value_t = 100)]
    pub godec_max_iters: usize,
    /// GoDec relative objective-change tolerance
    #[arg(long, default_value_t = 1e-6)]
    pub godec_rel_tol: f64,
    /// Use randomized bilateral projection instead of the exact truncated SVD
    #[arg(long)]
    pub randomized: bool,
    /// Seed for the randomized projection
    #[arg(long, default_value_t = 0, requires = "randomized")]
    pub projection_seed: u64,
    /// Solve each patch from S = 0 at full rank (no rank continuation)
    #[arg(long)]
    pub no_continuation: bool,
    /// Worker threads [default: available parallelism]; never changes results
    #[arg(long)]
    pub workers: Option<usize>,
}

impl SolverArgs {
    pub fn config(&self) -> Result<SolverConfig> {
        if self.workers == Some(0) {
            return Err(Error::Usage("--workers must be at least 1".into()));
        }
        Ok(SolverConfig {
            max_iters: self.godec_max_iters,
            rel_tol: self.godec_rel_tol,
            projector: if self.randomized {
                RankProjector::randomized(self.projection_seed)
            } else {
                RankProjector::Exact
            },
            rank_continuation: !self.no_continuation,
            workers: self.workers,
        })
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Input cube (.hdr/.raw stem)
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output cube (.hdr/.raw stem)
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the run report JSON here instead of stdout
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PsnrArgs {
    /// Clean reference cube
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Cube under test
    #[arg(long)]
    pub test: PathBuf,
}

/// The clean reference and its degraded version. Without `--noisy` the clean
/// cube is corrupted with the noise options.
#[derive(Debug, Args)]
pub struct ContextArgs {
    /// Clean reference cube
    #[arg(long)]
    pub clean: PathBuf,
    /// Degraded cube; omit to corrupt --clean with the noise options
    #[arg(long)]
    pub noisy: Option<PathBuf>,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// r, s, b or p
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// Explicit values, e.g. `1,2,4,8` or `1..20`
    #[arg(long, conflicts_with_all = ["from", "to"])]
    pub values: Option<String>,
    #[command(flatten)]
    pub context: ContextArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV output [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TunePArgs {
    /// Starting value for p
    #[arg(long, default_value_t = 0.15)]
    pub p0: f64,
    #[arg(long = "r", value_name = "R", default_value_t = 7)]
    pub rank: usize,
    #[arg(long = "b", value_name = "B", default_value_t = 20)]
    pub block: usize,
    #[arg(long = "s", value_name = "S", default_value_t = 8)]
    pub stride: usize,
    #[arg(long, default_value_t = 20)]
    pub nm_max_iters: usize,
    /// Objective evaluations allowed within one iteration
    #[arg(long, default_value_t = 20)]
    pub nm_max_evals: usize,
    #[arg(long, default_value_t = 1e-15)]
    pub nm_f_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub nm_x_tol: f64,
    #[command(flatten)]
    pub context: ContextArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Result JSON [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trace CSV (iter,best_p,best_negpsnr)
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long, default_value = "1..10")]
    pub r_values: String,
    #[arg(long, default_value = "2,4,8")]
    pub s_values: String,
    #[arg(long = "p", value_name = "P", default_value_t = 0.15)]
    pub p: f64,
    #[arg(long = "b", value_name = "B", default_value_t = 20)]
    pub block: usize,
    #[command(flatten)]
    pub context: ContextArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV output (r,s,psnr) [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Sweep CSV files
    #[arg(required = true)]
    pub csv: Vec<PathBuf>,
    /// Markdown output [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for `<stem>_psnr.dat` / `<stem>_time.dat`
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Solver => 3,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(e.kind())
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Convert(a) => convert(a, out),
        Command::Synth(a) => synth(a, out),
        Command::Corrupt(a) => {
            let clean = load_input(&a.input)?;
            let noisy = corrupt(&clean, &a.noise.spec())?;
            let paths = cube::write_cube(&noisy, &a.out)?;
            print_json(
                out,
                &serde_json::json!({ "out": paths.header, "noise": a.noise.spec() }),
            )
        }
        Command::Denoise(a) => {
            let noisy = load_input(&a.input)?;
            let (restored, report) = denoise(&noisy, &a.params.params(), &a.solver.config()?)?;
            cube::write_cube(&restored, &a.out)?;
            let _ = writeln!(
                err,
                "denoised {} patches in {:.2}s (mean {:.1} GoDec iterations)",
                report.patches, report.wall_seconds, report.mean_inner_iterations
            );
            match &a.report {
                Some(path) => write_file(path, &to_json(&report)?),
                None => print_json(out, &report),
            }
        }
        Command::Psnr(a) => {
            let reference = load_input(&a.reference)?;
            let test = load_input(&a.test)?;
            print_json(out, &psnr(&reference, &test)?)
        }
        Command::Sweep(a) => sweep(a, out, err),
        Command::TuneP(a) => tune_p(a, out, err),
        Command::Surface(a) => surface(a, out, err),
        Command::Report(a) => report_cmd(a, out),
    }
}

fn convert(a: ConvertArgs, out: &mut dyn Write) -> Result<()> {
    let layout = RawLayout {
        rows: a.rows,
        cols: a.cols,
        bands: a.bands,
        interleave: a.interleave.parse::<Interleave>()?,
        sample: a.dtype.parse::<SampleType>()?,
        endian: a.endian.parse::<Endian>()?,
        offset: a.offset,
    };
    let raw = cube::read_raw(resolve_file(&a.input), &layout)?;
    let (cube, scale) = if a.normalize {
        let (c, s) = cube::normalize(&raw)?;
        (c, Some(s))
    } else {
        (raw, None)
    };
    let paths = cube::write_cube(&cube, &a.out)?;
    print_json(
        out,
        &serde_json::json!({ "out": paths.header, "dims": cube.dims(), "scale": scale }),
    )
}

fn synth(a: SynthArgs, out: &mut dyn Write) -> Result<()> {
    let spec = SceneSpec {
        rows: a.rows,
        cols: a.cols,
        bands: a.bands,
        ..SceneSpec::benchmark(a.seed)
    };
    let cube = generate(&spec)?;
    let paths = cube::write_cube(&cube, &a.out)?;
    print_json(out, &serde_json::json!({ "out": paths.header, "scene": spec }))
}

fn build_context(a: &ContextArgs, solver: SolverConfig) -> Result<Context> {
    let clean = load_input(&a.clean)?;
    match &a.noisy {
        Some(path) => {
            if a.noise.any_set() {
                return Err(Error::Usage("noise options cannot be combined with --noisy".into()));
            }
            Context::new(clean, load_input(path)?, solver)
        }
        None => Context::with_noise(clean, a.noise.spec(), solver),
    }
}

/// Parses `1,2,4`, `1..5` (inclusive) or a mix such as `1..3,8`.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let bad = |part: &str| Error::Usage(format!("cannot parse value list item {part:?}"));
    let mut values = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: i64 = lo.trim().parse().map_err(|_| bad(part))?;
            let hi: i64 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad(part))?;
            if hi < lo {
                return Err(bad(part));
            }
            values.extend((lo..=hi).map(|v| v as f64));
        } else {
            values.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    if values.is_empty() {
        return Err(Error::Usage("empty value list".into()));
    }
    Ok(values)
}

fn range_values(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0 && from.is_finite() && to.is_finite() && from <= to) {
        return Err(Error::Usage(format!("invalid range {from}..{to} step {step}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| from + i as f64 * step).collect())
}

fn parse_counts(text: &str, what: &str) -> Result<Vec<usize>> {
    parse_values(text)?
        .into_iter()
        .map(|v| {
            if v.fract() == 0.0 && v >= 1.0 {
                Ok(v as usize)
            } else {
                Err(Error::Usage(format!(
                    "{what} values must be positive integers, got {v}"
                )))
            }
        })
        .collect()
}

fn sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let param: SweepParam = a.param.parse()?;
    let values = match (&a.values, a.from, a.to) {
        (Some(v), _, _) => parse_values(v)?,
        (None, Some(from), Some(to)) => range_values(from, to, a.step)?,
        _ => return Err(Error::Usage("give either --values or both --from and --to".into())),
    };
    let context = build_context(&a.context, a.solver.config()?)?;
    let fixed = a.params.params();
    let mut records = Vec::with_capacity(values.len());
    for &value in &values {
        let mut one = tune::sweep(param, &[value], fixed, &context, |v, e| {
            let _ = writeln!(err, "{param}={v}: failed: {e}");
        })?;
        let rec = one.remove(0);
        if !rec.failed() {
            let _ = writeln!(
                err,
                "{param}={value}: {:.2} dB in {:.2}s",
                rec.psnr_db, rec.wall_seconds
            );
        }
        records.push(rec);
    }
    tune::fill_gradients(&mut records);
    emit_csv(&records, a.out.as_deref(), out)
}

fn tune_p(a: TunePArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let context = build_context(&a.context, a.solver.config()?)?;
    let cfg = NelderMeadConfig {
        f_tol: a.nm_f_tol,
        x_tol: a.nm_x_tol,
        max_iters: a.nm_max_iters,
        max_fun_evals_per_iter: a.nm_max_evals,
        ..NelderMeadConfig::default()
    };
    let fixed = LrmrParams {
        rank: a.rank,
        p: a.p0,
        block: a.block,
        stride: a.stride,
    };
    let result = tune::tune_p(&context, fixed, a.p0, &cfg)?;
    let _ = writeln!(
        err,
        "p {} -> {} ({:.2} dB -> {:.2} dB, {} iterations, {:?})",
        result.p_start,
        result.p_final,
        result.psnr_start,
        result.psnr_final,
        result.search.iterations,
        result.search.termination
    );
    if let Some(path) = &a.trace {
        let mut buf = Vec::new();
        tune::write_csv(&result.trace_rows(), &mut buf)?;
        write_file(path, &String::from_utf8_lossy(&buf))?;
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        p_start: f64,
        psnr_start: f64,
        p_final: f64,
        psnr_final: f64,
        iterations: usize,
        evaluations: usize,
        termination: tune::Termination,
        budget_exhausted: bool,
        trace: &'a [tune::TraceRow],
    }
    let summary = Summary {
        p_start: result.p_start,
        psnr_start: result.psnr_start,
        p_final: result.p_final,
        psnr_final: result.psnr_final,
        iterations: result.search.iterations,
        evaluations: result.search.evaluations,
        termination: result.search.termination,
        budget_exhausted: result.budget_exhausted,
        trace: &result.search.trace,
    };
    match &a.out {
        Some(path) => write_file(path, &to_json(&summary)?),
        None => print_json(out, &summary),
    }
}

fn surface(a: SurfaceArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let r_values = parse_counts(&a.r_values, "r")?;
    let s_values = parse_counts(&a.s_values, "s")?;
    let context = build_context(&a.context, a.solver.config()?)?;
    let fixed = LrmrParams {
        rank: 1,
        p: a.p,
        block: a.block,
        stride: 1,
    };
    let grid = tune::surface(&r_values, &s_values, fixed, &context, |r, s, e| {
        let _ = writeln!(err, "r={r} s={s}: failed: {e}");
    })?;
    emit_csv(&grid, a.out.as_deref(), out)
}

fn report_cmd(a: ReportArgs, out: &mut dyn Write) -> Result<()> {
    let mut sections = Vec::with_capacity(a.csv.len());
    for path in &a.csv {
        let path = resolve_file(path);
        let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let records = tune::read_sweep_csv(file).map_err(|e| match e {
            Error::Csv(msg) => Error::Csv(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let title = path
            .file_stem()
            .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        sections.push(Section { title, records });
    }
    let md = report::markdown(&sections)?;
    if let Some(dir) = &a.plot_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for section in &sections {
            for plot in report::plot_data(&section.title, section)? {
                write_file(&dir.join(&plot.name), &plot.contents)?;
            }
        }
    }
    match &a.out {
        Some(path) => write_file(path, &md),
        None => out.write_all(md.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

/// `path` itself when it exists or is absolute, else `$HSI_DATA_DIR/path` when that exists.
fn resolve_with(path: &Path, exists: impl Fn(&Path) -> bool) -> PathBuf {
    if path.is_absolute() || exists(path) {
        return path.to_path_buf();
    }
    match std::env::var_os(DATA_DIR_VAR) {
        Some(dir) => {
            let candidate = Path::new(&dir).join(path);
            if exists(&candidate) {
                candidate
            } else {
                path.to_path_buf()
            }
        }
        None => path.to_path_buf(),
    }
}

fn resolve_file(path: &Path) -> PathBuf {
    resolve_with(path, Path::exists)
}

fn load_input(path: &Path) -> Result<HsiCube> {
    cube::load_cube(resolve_with(path, |p| CubePaths::new(p).header.exists()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Csv(format!("cannot serialize report: {e}")))
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    out.write_all(to_json(value)?.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn emit_csv<T: Serialize>(rows: &[T], path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
            tune::write_csv(rows, file)
        }
        None => tune::write_csv(rows, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(
            std::iter::once("hsi-lrmr").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_lists_paper_defaults() {
        let (code, out, _) = run_capture(&["denoise", "--help"]);
        assert_eq!(code, 0);
        for flag in [
            "--r <R>",
            "[default: 7]",
            "[default: 0.15]",
            "[default: 20]",
            "[default: 8]",
            "--report",
            "--workers",
        ] {
            assert!(out.contains(flag), "missing {flag} in\n{out}");
        }
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run_capture(&[]).0, 1);
        assert_eq!(run_capture(&["frobnicate"]).0, 1);
        assert_eq!(run_capture(&["denoise", "--in", "x"]).0, 1);
        assert_eq!(
            run_capture(&["sweep", "--param", "q", "--clean", "x", "--values", "1"]).0,
            1
        );
    }

    #[test]
    fn missing_input_is_a_data_error() {
        let (code, _, err) = run_capture(&["psnr", "--ref", "/nonexistent/a", "--test", "/nonexistent/b"]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("1,2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert_eq!(parse_values("1..3, 8").unwrap(), vec![1.0, 2.0, 3.0, 8.0]);
        assert_eq!(parse_values("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_values("3..1").is_err());
        assert!(parse_values("").is_err());
        assert!(parse_values("a").is_err());
        assert_eq!(range_values(1.0, 20.0, 1.0).unwrap().len(), 20);
        assert_eq!(range_values(0.1, 0.3, 0.1).unwrap().len(), 3);
        assert!(parse_counts("1,2.5", "r").is_err());
    }

    #[test]
    fn noise_defaults_are_paper_like() {
        assert_eq!(NoiseArgs::default().spec(), NoiseSpec::paper_like(0));
        let custom = NoiseArgs {
            sigma: Some(0.0),
            seed: Some(9),
            ..NoiseArgs::default()
        };
        assert_eq!(custom.spec().gaussian_sigma, 0.0);
        assert_eq!(custom.spec().seed, 9);
        assert_eq!(custom.spec().impulse_density, 0.10);
    }
}
