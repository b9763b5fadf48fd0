//! GoDec: alternating rank-`r` projection and cardinality-`k` hard
//! thresholding for `min ||D - L - S||_F^2  s.t. rank(L) <= r, nnz(S) <= k`.

use nalgebra::{DMatrix, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rank-bounded matrix kept as `left * right`, `left` is `rows × rank` and
/// `right` is `rank × cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRank {
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
}

impl LowRank {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            left: DMatrix::zeros(rows, 0),
            right: DMatrix::zeros(0, cols),
        }
    }

    /// Number of stored factor columns, an upper bound on the true rank.
    pub fn rank(&self) -> usize {
        self.left.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.left.nrows(), self.right.ncols())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        if self.rank() == 0 {
            let (r, c) = self.shape();
            return DMatrix::zeros(r, c);
        }
        &self.left * &self.right
    }
}

/// Sparse matrix as `(linear index, value)` pairs, linear index in
/// column-major order, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, f64)>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|(_, v)| *v != 0.0).count()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        let slice = out.as_mut_slice();
        for &(i, v) in &self.entries {
            slice[i] = v;
        }
        out
    }
}

/// How the rank projection step is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RankProjector {
    /// Truncated SVD.
    Exact,
    /// Bilateral random projection with power iterations, followed by an
    /// exact SVD of the small core.
    Randomized {
        power_iters: usize,
        oversample: usize,
        seed: u64,
    },
}

impl RankProjector {
    pub fn randomized(seed: u64) -> Self {
        RankProjector::Randomized {
            power_iters: 2,
            oversample: 5,
            seed,
        }
    }

    /// Same projector with the random stream advanced to a new key.
    pub(crate) fn reseeded(self, key: u64) -> Self {
        match self {
            RankProjector::Exact => self,
            RankProjector::Randomized {
                power_iters,
                oversample,
                seed,
            } => RankProjector::Randomized {
                power_iters,
                oversample,
                seed: mix(seed, key),
            },
        }
    }

    pub fn project(&self, m: &DMatrix<f64>, rank: usize) -> Result<LowRank> {
        match *self {
            RankProjector::Exact => rank_project(m, rank),
            RankProjector::Randomized {
                power_iters,
                oversample,
                seed,
            } => randomized_rank_project(m, rank, power_iters, oversample, seed),
        }
    }
}

/// splitmix64 finalizer over `seed ^ key`.
pub(crate) fn mix(seed: u64, key: u64) -> u64 {
    let mut z = seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.as_slice().iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Solver {
            iteration: 0,
            reason: "non-finite matrix entry".into(),
        })
    }
}

fn check_rank(m: &DMatrix<f64>, rank: usize) -> Result<()> {
    if rank > m.nrows().min(m.ncols()) {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} exceeds min dimension of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn truncated_svd(m: DMatrix<f64>, rank: usize) -> Result<LowRank> {
    let (rows, cols) = m.shape();
    let svd = SVD::try_new(m, true, true, f64::EPSILON, 0).ok_or_else(|| Error::Solver {
        iteration: 0,
        reason: "SVD did not converge".into(),
    })?;
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let rank = rank.min(svd.singular_values.len());
    if rank == 0 {
        return Ok(LowRank::zeros(rows, cols));
    }
    let mut left = u.columns(0, rank).into_owned();
    for (j, mut col) in left.column_iter_mut().enumerate() {
        col *= svd.singular_values[j];
    }
    Ok(LowRank {
        left,
        right: v_t.rows(0, rank).into_owned(),
    })
}

/// Best rank-`rank` approximation in Frobenius norm (truncated SVD).
///
/// The dominant singular subspace is taken from the eigendecomposition of the
/// Gram matrix on the short side, and `m` is projected onto it. This equals
/// the truncated SVD while costing one `min(rows, cols)`-square eigenproblem.
pub fn rank_project(m: &DMatrix<f64>, rank: usize) -> Result<LowRank> {
    check_rank(m, rank)?;
    let (rows, cols) = m.shape();
    if rank == 0 {
        check_finite(m)?;
        return Ok(LowRank::zeros(rows, cols));
    }
    let tall = rows >= cols;
    // Explicit transposes route both products through the blocked gemm kernel.
    let gram = if tall { m.transpose() * m } else { m * m.transpose() };
    // Any non-finite entry of `m` leaves a non-finite entry on the diagonal.
    check_finite(&gram)?;
    let eigen = gram.symmetric_eigen();
    if eigen.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver {
            iteration: 0,
            reason: "eigendecomposition produced non-finite values".into(),
        });
    }
    let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let basis = DMatrix::from_fn(eigen.eigenvectors.nrows(), rank, |i, j| {
        eigen.eigenvectors[(i, order[j])]
    });
    Ok(if tall {
        LowRank {
            left: m * &basis,
            right: basis.transpose(),
        }
    } else {
        LowRank {
            left: basis.clone(),
            right: basis.tr_mul(m),
        }
    })
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Bilateral random projection: sketch the column space with a Gaussian
/// test matrix refined by `power_iters` rounds of `M Mᵀ`, sketch the row space
/// from it, and truncate the SVD of the projected core.
pub fn randomized_rank_project(
    m: &DMatrix<f64>,
    rank: usize,
    power_iters: usize,
    oversample: usize,
    seed: u64,
) -> Result<LowRank> {
    check_rank(m, rank)?;
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if rank == 0 {
        return Ok(LowRank::zeros(rows, cols));
    }
    let width = (rank + oversample).min(rows.min(cols));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let test = DMatrix::from_fn(cols, width, |_, _| StandardNormal.sample(&mut rng));

    let mut col_basis = orthonormal_basis(m * test);
    for _ in 0..power_iters {
        let row_sketch = orthonormal_basis(m.tr_mul(&col_basis));
        col_basis = orthonormal_basis(m * row_sketch);
    }
    let row_basis = orthonormal_basis(m.tr_mul(&col_basis));
    let core = col_basis.tr_mul(m) * &row_basis;
    let small = truncated_svd(core, rank)?;
    Ok(LowRank {
        left: col_basis * small.left,
        right: small.right * row_basis.transpose(),
    })
}

/// Keeps the `k` largest-magnitude entries; ties go to the smaller
/// column-major linear index.
pub fn hard_threshold(m: &DMatrix<f64>, k: usize) -> SparseMatrix {
    let (rows, cols) = m.shape();
    let values = m.as_slice();
    let k = k.min(values.len());
    if k == 0 {
        return SparseMatrix::zeros(rows, cols);
    }
    // For non-negative floats the bit pattern orders like the value (NaN last, as total_cmp).
    let key = |v: f64| v.abs().to_bits();
    let entries = if k == values.len() {
        values.iter().copied().enumerate().collect()
    } else {
        let mut keys: Vec<u64> = values.iter().map(|&v| key(v)).collect();
        let (_, &mut cut, _) = keys.select_nth_unstable_by(k - 1, |a, b| b.cmp(a));
        let mut ties = k - values.iter().filter(|&&v| key(v) > cut).count();
        let mut entries = Vec::with_capacity(k);
        for (i, &v) in values.iter().enumerate() {
            let kv = key(v);
            if kv > cut {
                entries.push((i, v));
            } else if kv == cut && ties > 0 {
                ties -= 1;
                entries.push((i, v));
            }
        }
        entries
    };
    SparseMatrix { rows, cols, entries }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoDecProblem {
    pub data: DMatrix<f64>,
    pub rank: usize,
    pub cardinality: usize,
    pub max_iters: usize,
    pub rel_tol: f64,
    /// Starting sparse part; zero when `None`.
    pub initial_sparse: Option<SparseMatrix>,
}

impl GoDecProblem {
    pub const DEFAULT_MAX_ITERS: usize = 100;
    pub const DEFAULT_REL_TOL: f64 = 1e-6;

    pub fn new(data: DMatrix<f64>, rank: usize, cardinality: usize) -> Self {
        Self {
            data,
            rank,
            cardinality,
            max_iters: Self::DEFAULT_MAX_ITERS,
            rel_tol: Self::DEFAULT_REL_TOL,
            initial_sparse: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (rows, cols) = self.data.shape();
        if self.rank == 0 {
            return Err(Error::InvalidParameter("rank must be at least 1".into()));
        }
        check_rank(&self.data, self.rank)?;
        if self.cardinality > rows * cols {
            return Err(Error::InvalidParameter(format!(
                "cardinality {} exceeds the {} entries of the matrix",
                self.cardinality,
                rows * cols
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("invalid rel_tol {}", self.rel_tol)));
        }
        if let Some(s) = &self.initial_sparse {
            if (s.rows, s.cols) != (rows, cols) || s.entries.iter().any(|&(i, _)| i >= rows * cols) {
                return Err(Error::DimensionMismatch(
                    "initial sparse part does not match the data".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoDecResult {
    pub low_rank: LowRank,
    pub sparse: SparseMatrix,
    /// `||D - L - S||_F^2` after each iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl GoDecResult {
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(0.0)
    }
}

pub fn godec(problem: &GoDecProblem) -> Result<GoDecResult> {
    godec_with(problem, RankProjector::Exact)
}

pub fn godec_with(problem: &GoDecProblem, projector: RankProjector) -> Result<GoDecResult> {
    problem.validate()?;
    check_finite(&problem.data)?;
    let d = &problem.data;
    let (rows, cols) = d.shape();
    let scale = d.norm_squared();
    // Below this the residual is rounding noise.
    let floor = scale * f64::EPSILON * f64::EPSILON;

    let mut sparse = problem
        .initial_sparse
        .clone()
        .unwrap_or_else(|| SparseMatrix::zeros(rows, cols));
    let mut low_rank = LowRank::zeros(rows, cols);
    let mut trace = Vec::new();
    let mut previous = scale;
    let mut converged = false;

    for iteration in 1..=problem.max_iters {
        let mut target = d.clone();
        {
            let t = target.as_mut_slice();
            for &(i, v) in &sparse.entries {
                t[i] -= v;
            }
        }
        low_rank = projector
            .reseeded(iteration as u64)
            .project(&target, problem.rank)
            .map_err(|e| match e {
                Error::Solver { reason, .. } => Error::Solver { iteration, reason },
                other => other,
            })?;

        let mut residual = d - low_rank.to_dense();
        sparse = hard_threshold(&residual, problem.cardinality);
        {
            let r = residual.as_mut_slice();
            for &(i, _) in &sparse.entries {
                r[i] = 0.0;
            }
        }
        let objective = residual.norm_squared();
        if !objective.is_finite() {
            return Err(Error::Solver {
                iteration,
                reason: "objective became non-finite".into(),
            });
        }
        trace.push(objective);

        if objective <= floor || (previous - objective).abs() <= problem.rel_tol * previous {
            converged = true;
            break;
        }
        previous = objective;
    }

    Ok(GoDecResult {
        iterations: trace.len(),
        low_rank,
        sparse,
        objective_trace: trace,
        converged,
    })
}

/// Ranks visited by [`godec_continuation`]: `1, 2, 4, …` below `rank`, then `rank`.
pub fn continuation_ranks(rank: usize) -> Vec<usize> {
    let mut ranks: Vec<usize> = std::iter::successors(Some(1usize), |r| r.checked_mul(2))
        .take_while(|&r| r < rank)
        .collect();
    ranks.push(rank);
    ranks
}

/// GoDec warm-started through a doubling rank schedule: each stage starts from
/// the sparse part found at the previous, smaller rank.
///
/// Starting the full-rank problem from `S = 0` lets the first projection soak
/// up outliers whenever `rank` is a sizeable fraction of the column count; the
/// low-rank stages identify the outliers first. The first stage is solved from
/// both `S = 0` and `S = hard_threshold(D, k)`, keeping the lower objective
/// (ties keep `S = 0`). With `k` covering every entry the schedule is skipped
/// and plain [`godec_with`] runs. The returned trace and
/// iteration count cover the final stage only; `total_iterations` in the
/// second tuple slot counts all stages.
pub fn godec_continuation(problem: &GoDecProblem, projector: RankProjector) -> Result<(GoDecResult, usize)> {
    problem.validate()?;
    if problem.cardinality >= problem.data.len() {
        // S absorbs every residual, so a warm start would pin L at the first stage.
        let result = godec_with(problem, projector)?;
        let total = result.iterations;
        return Ok((result, total));
    }
    let mut sparse = problem.initial_sparse.clone();
    let mut total = 0;
    let ranks = continuation_ranks(problem.rank);
    let last = ranks.len() - 1;
    for (stage, rank) in ranks.into_iter().enumerate() {
        let staged = GoDecProblem {
            data: problem.data.clone(),
            rank,
            cardinality: problem.cardinality,
            max_iters: problem.max_iters,
            rel_tol: problem.rel_tol,
            initial_sparse: sparse.take(),
        };
        let projector = projector.reseeded(1_000_003 * stage as u64);
        let mut result = godec_with(&staged, projector)?;
        total += result.iterations;
        if stage == 0 && staged.initial_sparse.is_none() && staged.cardinality > 0 {
            // Second start with S taken from the largest entries of D. It wins when
            // the outliers outweigh the low-rank part's leading singular values.
            let alternative = godec_with(
                &GoDecProblem {
                    initial_sparse: Some(hard_threshold(&staged.data, staged.cardinality)),
                    ..staged
                },
                projector,
            )?;
            total += alternative.iterations;
            if alternative.objective() < result.objective() {
                result = alternative;
            }
        }
        if stage == last {
            return Ok((result, total));
        }
        sparse = Some(result.sparse);
    }
    unreachable!("schedule always ends at the target rank")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> DMatrix<f64> {
        random_matrix(rows, rank, seed) * random_matrix(rank, cols, seed + 1_000)
    }

    fn svd_truncation(m: &DMatrix<f64>, rank: usize) -> DMatrix<f64> {
        truncated_svd(m.clone(), rank).unwrap().to_dense()
    }

    #[test]
    fn projection_matches_svd_truncation() {
        for seed in 0..20 {
            let tall = random_matrix(40, 12, seed);
            let wide = tall.transpose();
            for rank in [1, 5, 12] {
                assert!((rank_project(&tall, rank).unwrap().to_dense() - svd_truncation(&tall, rank)).norm() < 1e-10);
                assert!((rank_project(&wide, rank).unwrap().to_dense() - svd_truncation(&wide, rank)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn projection_is_idempotent_on_rank_r() {
        let m = random_low_rank(30, 12, 3, 5);
        let p = rank_project(&m, 3).unwrap();
        assert_eq!(p.rank(), 3);
        assert!((p.to_dense() - &m).amax() < 1e-10);
    }

    #[test]
    fn eckart_young_on_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let p = rank_project(&m, 2).unwrap().to_dense();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 0.0]));
        assert!((p - expected).amax() < 1e-12);
    }

    #[test]
    fn projection_error_is_tail_energy() {
        // Oracle: the full singular spectrum from an independent SVD.
        let m = random_matrix(40, 25, 17);
        let sv = m.clone().svd(false, false).singular_values;
        let mut sorted: Vec<f64> = sv.iter().copied().collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let tail: f64 = sorted[5..].iter().map(|s| s * s).sum();
        let err = (&m - rank_project(&m, 5).unwrap().to_dense()).norm_squared();
        assert!((err - tail).abs() < 1e-8, "{err} vs {tail}");
    }

    #[test]
    fn projection_errors() {
        let m = random_matrix(4, 3, 1);
        assert!(rank_project(&m, 4).is_err());
        let mut bad = m.clone();
        bad[(1, 1)] = f64::NAN;
        assert!(matches!(rank_project(&bad, 1), Err(Error::Solver { .. })));
    }

    #[test]
    fn threshold_cases() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, -5.0, 3.0]);
        assert_eq!(hard_threshold(&m, 0).nnz(), 0);
        assert_eq!(hard_threshold(&m, 2).to_dense().as_slice(), &[0.0, -5.0, 3.0]);
        let flat = DMatrix::from_element(2, 3, 4.0);
        let kept = hard_threshold(&flat, 2);
        assert_eq!(kept.entries, vec![(0, 4.0), (1, 4.0)]);
        assert_eq!(hard_threshold(&m, 10).nnz(), 3);
    }

    #[test]
    fn rank_r_input_is_fixed_point() {
        let d = random_low_rank(20, 10, 2, 9);
        let res = godec(&GoDecProblem::new(d.clone(), 2, 0)).unwrap();
        assert!((res.low_rank.to_dense() - &d).amax() < 1e-10);
        assert_eq!(res.sparse.nnz(), 0);
        assert!(res.converged && res.iterations <= 2);
    }

    #[test]
    fn zero_input() {
        let res = godec(&GoDecProblem::new(DMatrix::zeros(6, 4), 1, 3)).unwrap();
        assert_eq!(res.low_rank.to_dense(), DMatrix::zeros(6, 4));
        assert!(res.sparse.to_dense().iter().all(|&v| v == 0.0));
        assert_eq!(res.objective(), 0.0);
        assert!(res.converged);
    }

    /// Adds `±magnitude` at one random row in each of the first `count` columns.
    fn plant_outliers(d: &mut DMatrix<f64>, count: usize, magnitude: f64, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = d.nrows();
        for c in 0..count {
            let r = rng.random_range(0..rows);
            d[(r, c)] += if rng.random::<bool>() { magnitude } else { -magnitude };
        }
        count
    }

    #[test]
    fn planted_decomposition_is_recovered() {
        let l0 = random_low_rank(50, 30, 2, 77);
        let mut d = l0.clone();
        let k = plant_outliers(&mut d, 20, 5.0, 2024);
        let res = godec(&GoDecProblem::new(d, 2, k)).unwrap();
        let rel = (res.low_rank.to_dense() - &l0).norm() / l0.norm();
        assert!(rel < 1e-4, "relative error {rel}");
    }

    /// Rank-2 `50 × 30` with singular values in `[0.5, 1.5]` plus 20 entries of ±5.
    fn planted_unit_spectrum(seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gaussian = |rng: &mut ChaCha8Rng, r, c| DMatrix::<f64>::from_fn(r, c, |_, _| StandardNormal.sample(rng));
        let u = gaussian(&mut rng, 50, 2).qr().q();
        let v = gaussian(&mut rng, 30, 2).qr().q();
        let s = nalgebra::DVector::<f64>::from_fn(2, |_, _| rng.random_range(0.5..1.5));
        let l0 = u * DMatrix::from_diagonal(&s) * v.transpose();
        let mut d = l0.clone();
        let mut positions: Vec<usize> = (0..1500).collect();
        for i in 0..20 {
            let j = rng.random_range(i..1500);
            positions.swap(i, j);
            d.as_mut_slice()[positions[i]] += if rng.random::<bool>() { 5.0 } else { -5.0 };
        }
        (l0, d)
    }

    #[test]
    fn continuation_recovers_outlier_dominated_problems() {
        for seed in 0..20 {
            let (l0, d) = planted_unit_spectrum(seed);
            let (res, _) = godec_continuation(&GoDecProblem::new(d, 2, 20), RankProjector::Exact).unwrap();
            let rel = (res.low_rank.to_dense() - &l0).norm() / l0.norm();
            assert!(rel < 1e-4, "seed {seed}: relative error {rel}");
        }
    }

    #[test]
    fn k_zero_matches_truncated_svd() {
        for seed in 0..50 {
            let d = random_matrix(25, 15, seed);
            let res = godec(&GoDecProblem::new(d.clone(), 4, 0)).unwrap();
            let oracle = svd_truncation(&d, 4);
            assert!((res.low_rank.to_dense() - oracle).norm() < 1e-8);
        }
    }

    #[test]
    fn invalid_problems() {
        let d = random_matrix(5, 4, 0);
        assert!(godec(&GoDecProblem::new(d.clone(), 0, 0)).is_err());
        assert!(godec(&GoDecProblem::new(d.clone(), 5, 0)).is_err());
        assert!(godec(&GoDecProblem::new(d.clone(), 2, 21)).is_err());
        let mut bad = d;
        bad[(0, 0)] = f64::INFINITY;
        assert!(matches!(
            godec(&GoDecProblem::new(bad, 2, 1)),
            Err(Error::Solver { .. })
        ));
    }

    #[test]
    fn randomized_agrees_on_gapped_spectrum() {
        // Singular values 10, 8, 6 then 0.5 and below: gap >> 2x at index 3.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q1 = random_matrix(60, 20, 1).qr().q();
        let q2 = random_matrix(20, 20, 2).qr().q();
        let mut s = vec![10.0, 8.0, 6.0];
        s.extend((0..17).map(|_| rng.random_range(0.0..0.5)));
        let m = &q1 * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s)) * q2.transpose();
        let exact = (&m - rank_project(&m, 3).unwrap().to_dense()).norm_squared();
        let fast = (&m - randomized_rank_project(&m, 3, 2, 5, 11).unwrap().to_dense()).norm_squared();
        assert!(((fast - exact) / exact).abs() < 1e-3, "{fast} vs {exact}");
    }

    #[test]
    fn continuation_schedule() {
        assert_eq!(continuation_ranks(1), vec![1]);
        assert_eq!(continuation_ranks(2), vec![1, 2]);
        assert_eq!(continuation_ranks(7), vec![1, 2, 4, 7]);
        assert_eq!(continuation_ranks(8), vec![1, 2, 4, 8]);
    }

    #[test]
    fn first_stage_keeps_the_better_start() {
        for seed in 0..10 {
            let d = random_matrix(20, 8, seed);
            let p = GoDecProblem::new(d.clone(), 1, 10);
            let (staged, total) = godec_continuation(&p, RankProjector::Exact).unwrap();
            let plain = godec(&p).unwrap();
            let warm = godec(&GoDecProblem {
                initial_sparse: Some(hard_threshold(&d, 10)),
                ..p.clone()
            })
            .unwrap();
            assert_eq!(total, plain.iterations + warm.iterations);
            let best = if warm.objective() < plain.objective() {
                warm
            } else {
                plain
            };
            assert_eq!(staged.objective_trace, best.objective_trace);
        }
    }

    #[test]
    fn continuation_with_full_cardinality_is_plain_godec() {
        let d = random_matrix(12, 6, 9);
        let p = GoDecProblem::new(d.clone(), 4, 72);
        let (staged, _) = godec_continuation(&p, RankProjector::Exact).unwrap();
        assert_eq!(staged.low_rank, godec(&p).unwrap().low_rank);
        assert!((staged.low_rank.to_dense() - svd_truncation(&d, 4)).norm() < 1e-10);
    }

    #[test]
    fn continuation_recovers_high_rank_planted_problem() {
        // Rank 6 of 12 columns, one gross outlier per column.
        let l0 = random_low_rank(80, 12, 6, 31);
        let mut d = l0.clone();
        let k = plant_outliers(&mut d, 12, 4.0, 8);
        let (res, total) = godec_continuation(&GoDecProblem::new(d, 6, k), RankProjector::Exact).unwrap();
        let rel = (res.low_rank.to_dense() - &l0).norm() / l0.norm();
        assert!(rel < 1e-6, "relative error {rel}");
        assert!(total >= res.iterations);
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(100))]
        #[test]
        fn objective_is_monotone(seed in 0u64..u64::MAX, rank in 1usize..5, frac in 0.0f64..0.3) {
            let d = random_matrix(24, 10, seed);
            let k = (frac * 240.0).round() as usize;
            let res = godec(&GoDecProblem::new(d, rank, k)).unwrap();
            for w in res.objective_trace.windows(2) {
                proptest::prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{} -> {}", w[0], w[1]);
            }
        }
    }
}
