//! Patch-based low-rank matrix recovery over a whole cube.
//!
//! The spatial plane is swept with `b × b` windows at stride `s`; each window
//! is flattened to a `b² × w` matrix, split by GoDec into low-rank plus sparse
//! parts, and the low-rank parts are averaged back into the cube.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{extract_patch, make_grid, Aggregator, Dims, HsiCube, PatchMatrix};
use crate::error::{Error, Result};
use crate::godec::{godec_continuation, godec_with, GoDecProblem, RankProjector};
use crate::metrics::timed;

/// Patches solved per parallel batch before their estimates are merged.
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrmrParams {
    /// Upper bound on the rank of each patch's low-rank part.
    pub rank: usize,
    /// Expected fraction of corrupted entries; may exceed 1, see [`LrmrParams::cardinality`].
    pub p: f64,
    /// Window size in pixels.
    pub block: usize,
    /// Window step in pixels.
    pub stride: usize,
}

impl Default for LrmrParams {
    /// `r = 7, p = 0.15, b = 20, s = 8`.
    fn default() -> Self {
        Self {
            rank: 7,
            p: 0.15,
            block: 20,
            stride: 8,
        }
    }
}

impl LrmrParams {
    /// Sparse cardinality per patch: `round(p · b² · w)` clamped to the entry count.
    pub fn cardinality(&self, bands: usize) -> usize {
        let entries = self.block * self.block * bands;
        let k = (self.p * entries as f64).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(entries)
        }
    }

    pub fn validate(&self, dims: Dims) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidParameter("rank r must be at least 1".into()));
        }
        if self.block == 0 {
            return Err(Error::InvalidParameter("blocksize b must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride s must be at least 1".into()));
        }
        if !(self.p.is_finite() && self.p >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "p must be finite and >= 0, got {}",
                self.p
            )));
        }
        if self.block > dims.rows || self.block > dims.cols {
            return Err(Error::InvalidParameter(format!(
                "blocksize b={} exceeds the spatial size {}x{} (need b <= min(rows, cols))",
                self.block, dims.rows, dims.cols
            )));
        }
        let max_rank = (self.block * self.block).min(dims.bands);
        if self.rank > max_rank {
            return Err(Error::InvalidParameter(format!(
                "rank r={} exceeds min(b^2, bands) = {max_rank}",
                self.rank
            )));
        }
        Ok(())
    }
}

/// Inner-solver settings shared by every patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub projector: RankProjector,
    /// Warm-start each patch through the doubling rank schedule of
    /// [`godec_continuation`] instead of solving from `S = 0` at full rank.
    pub rank_continuation: bool,
    /// Thread count; `None` uses the global rayon pool. Never affects results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: GoDecProblem::DEFAULT_MAX_ITERS,
            rel_tol: GoDecProblem::DEFAULT_REL_TOL,
            projector: RankProjector::Exact,
            rank_continuation: true,
            workers: None,
        }
    }
}

/// Summary of one [`denoise`] run. `wall_seconds` is the only field that is
/// not a deterministic function of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub params: LrmrParams,
    pub cardinality: usize,
    pub dims: Dims,
    pub patches: usize,
    pub mean_inner_iterations: f64,
    pub max_inner_iterations: usize,
    pub unconverged_patches: usize,
    pub solver: SolverConfig,
    pub wall_seconds: f64,
}

struct PatchOutcome {
    estimate: PatchMatrix,
    iterations: usize,
    converged: bool,
}

fn solve_patch(
    cube: &HsiCube,
    index: usize,
    origin: (usize, usize),
    params: &LrmrParams,
    cardinality: usize,
    config: &SolverConfig,
) -> Result<PatchOutcome> {
    let wrap = |source: Error| Error::Patch {
        row: origin.0,
        col: origin.1,
        source: Box::new(source),
    };
    let patch = extract_patch(cube, origin, params.block).map_err(wrap)?;
    let problem = GoDecProblem {
        data: patch.values,
        rank: params.rank,
        cardinality,
        max_iters: config.max_iters,
        rel_tol: config.rel_tol,
        initial_sparse: None,
    };
    let projector = config.projector.reseeded(index as u64);
    let (result, iterations) = if config.rank_continuation {
        godec_continuation(&problem, projector)
    } else {
        godec_with(&problem, projector).map(|r| {
            let n = r.iterations;
            (r, n)
        })
    }
    .map_err(wrap)?;
    Ok(PatchOutcome {
        estimate: PatchMatrix {
            origin,
            block: params.block,
            values: result.low_rank.to_dense(),
        },
        iterations,
        converged: result.converged,
    })
}

fn run(cube: &HsiCube, params: &LrmrParams, config: &SolverConfig) -> Result<(HsiCube, RunReport)> {
    params.validate(cube.dims())?;
    let grid = make_grid(cube.rows(), cube.cols(), params.block, params.stride)?;
    let cardinality = params.cardinality(cube.bands());
    let origins: Vec<(usize, usize)> = grid.origins().collect();

    let mut acc = Aggregator::new(cube.rows(), cube.cols(), cube.bands());
    let (mut total_iters, mut max_iters, mut unconverged) = (0usize, 0usize, 0usize);
    for (batch_index, batch) in origins.chunks(BATCH).enumerate() {
        let outcomes: Vec<Result<PatchOutcome>> = batch
            .par_iter()
            .enumerate()
            .map(|(i, &origin)| solve_patch(cube, batch_index * BATCH + i, origin, params, cardinality, config))
            .collect();
        // Merged strictly in row-major patch order.
        for outcome in outcomes {
            let outcome = outcome?;
            total_iters += outcome.iterations;
            max_iters = max_iters.max(outcome.iterations);
            unconverged += usize::from(!outcome.converged);
            acc.add(&outcome.estimate)?;
        }
    }
    let restored = acc.finish()?;
    let report = RunReport {
        params: *params,
        cardinality,
        dims: cube.dims(),
        patches: origins.len(),
        mean_inner_iterations: total_iters as f64 / origins.len() as f64,
        max_inner_iterations: max_iters,
        unconverged_patches: unconverged,
        solver: *config,
        wall_seconds: 0.0,
    };
    Ok((restored, report))
}

/// Restores `cube` (expected in normalized units) patch by patch.
pub fn denoise(cube: &HsiCube, params: &LrmrParams, config: &SolverConfig) -> Result<(HsiCube, RunReport)> {
    let (result, secs) = timed(|| match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot start {n} workers: {e}")))?
            .install(|| run(cube, params, config)),
        None => run(cube, params, config),
    });
    let (restored, mut report) = result?;
    report.wall_seconds = secs;
    Ok((restored, report))
}
