//! Nelder-Mead downhill simplex with fminsearch-style initialization and
//! stopping rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    /// Stop once every vertex value is within this of the best one...
    pub f_tol: f64,
    /// ...and every vertex lies within this of the best one (max-norm).
    pub x_tol: f64,
    pub max_fun_evals_per_iter: usize,
    pub max_iters: usize,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            f_tol: 1e-15,
            x_tol: 1e-9,
            max_fun_evals_per_iter: 20,
            max_iters: 20,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("nelder-mead: {what}")));
        if !(self.f_tol > 0.0 && self.x_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        // A shrink step costs one reflection, one contraction and `dim` new vertices.
        if self.max_fun_evals_per_iter < 2 {
            return bad("max_fun_evals_per_iter must be at least 2");
        }
        if dim == 0 {
            return bad("start point is empty");
        }
        if !(self.reflection > 0.0
            && self.expansion > 1.0
            && self.expansion > self.reflection
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0)
        {
            return bad("coefficients out of range (need rho > 0, chi > max(1, rho), 0 < gamma < 1, 0 < sigma < 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Initial,
    Reflect,
    Expand,
    ContractOutside,
    ContractInside,
    Shrink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Both spread criteria met.
    Converged,
    /// Iteration budget used up.
    MaxIters,
    /// An iteration needed more evaluations than allowed.
    EvalBudget,
}

/// Simplex state after one iteration (row 0 is the initial simplex).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub step: Step,
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub evals: usize,
    pub total_evals: usize,
    pub f_spread: f64,
    pub x_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceRow>,
}

impl NelderMeadResult {
    pub fn budget_exhausted(&self) -> bool {
        self.termination != Termination::Converged
    }
}

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

fn sanitize(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

/// Minimizes `f` from `x0`.
///
/// The initial simplex moves each coordinate by 5% (0.00025 when it is zero).
/// Vertices are kept sorted by value with a stable sort, so among equal values
/// the older vertex ranks first.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], cfg: &NelderMeadConfig) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    cfg.validate(n)?;
    let mut total = 0usize;

    let f0 = f(x0)?;
    total += 1;
    if !f0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "objective is not finite at the start point ({f0})"
        )));
    }
    let mut simplex = vec![Vertex { x: x0.to_vec(), f: f0 }];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] = if x[i] != 0.0 { 1.05 * x[i] } else { 0.00025 };
        let fx = sanitize(f(&x)?);
        total += 1;
        simplex.push(Vertex { x, f: fx });
    }
    simplex.sort_by(|a, b| a.f.total_cmp(&b.f));

    let spreads = |s: &[Vertex]| {
        let best = &s[0];
        let fs = s[1..].iter().map(|v| (v.f - best.f).abs()).fold(0.0, f64::max);
        let xs = s[1..]
            .iter()
            .flat_map(|v| v.x.iter().zip(&best.x).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        (fs, xs)
    };
    let row = |iter: usize, step: Step, evals: usize, total: usize, s: &[Vertex]| {
        let (f_spread, x_spread) = spreads(s);
        TraceRow {
            iter,
            step,
            best_x: s[0].x.clone(),
            best_f: s[0].f,
            evals,
            total_evals: total,
            f_spread,
            x_spread,
        }
    };
    let mut trace = vec![row(0, Step::Initial, n + 1, total, &simplex)];

    let mut termination = Termination::MaxIters;
    let mut iterations = 0;
    loop {
        let (fs, xs) = spreads(&simplex);
        if fs <= cfg.f_tol && xs <= cfg.x_tol {
            termination = Termination::Converged;
            break;
        }
        if iterations >= cfg.max_iters {
            break;
        }

        let worst = &simplex[n];
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v.x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.x).map(|(c, w)| c + t * (c - w)).collect() };
        let (f_best, f_second_worst, f_worst) = (simplex[0].f, simplex[n - 1].f, simplex[n].f);
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| -> Result<Option<f64>> {
            if *evals >= cfg.max_fun_evals_per_iter {
                return Ok(None);
            }
            *evals += 1;
            Ok(Some(sanitize(f(x)?)))
        };

        let xr = along(cfg.reflection);
        let Some(fr) = eval(&xr, &mut evals)? else {
            termination = Termination::EvalBudget;
            break;
        };

        let mut replacement: Option<(Vertex, Step)> = None;
        let mut needs_shrink = false;
        if fr < f_best {
            let xe = along(cfg.reflection * cfg.expansion);
            let Some(fe) = eval(&xe, &mut evals)? else {
                termination = Termination::EvalBudget;
                total += evals;
                break;
            };
            replacement = Some(if fe < fr {
                (Vertex { x: xe, f: fe }, Step::Expand)
            } else {
                (Vertex { x: xr, f: fr }, Step::Reflect)
            });
        } else if fr < f_second_worst {
            replacement = Some((Vertex { x: xr, f: fr }, Step::Reflect));
        } else if fr < f_worst {
            let xc = along(cfg.reflection * cfg.contraction);
            let Some(fc) = eval(&xc, &mut evals)? else {
                termination = Termination::EvalBudget;
                total += evals;
                break;
            };
            if fc <= fr {
                replacement = Some((Vertex { x: xc, f: fc }, Step::ContractOutside));
            } else {
                needs_shrink = true;
            }
        } else {
            let xcc = along(-cfg.contraction);
            let Some(fcc) = eval(&xcc, &mut evals)? else {
                termination = Termination::EvalBudget;
                total += evals;
                break;
            };
            if fcc < f_worst {
                replacement = Some((Vertex { x: xcc, f: fcc }, Step::ContractInside));
            } else {
                needs_shrink = true;
            }
        }

        let step = if let Some((vertex, step)) = replacement {
            simplex[n] = vertex;
            step
        } else {
            debug_assert!(needs_shrink);
            if evals + n > cfg.max_fun_evals_per_iter {
                termination = Termination::EvalBudget;
                total += evals;
                break;
            }
            let best = simplex[0].x.clone();
            for v in simplex[1..].iter_mut() {
                for (xj, bj) in v.x.iter_mut().zip(&best) {
                    *xj = bj + cfg.shrink * (*xj - bj);
                }
                v.f = sanitize(f(&v.x)?);
                evals += 1;
            }
            Step::Shrink
        };
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        total += evals;
        iterations += 1;
        trace.push(row(iterations, step, evals, total, &simplex));
    }

    Ok(NelderMeadResult {
        x: simplex[0].x.clone(),
        f: simplex[0].f,
        iterations,
        evaluations: total,
        termination,
        trace,
    })
}
