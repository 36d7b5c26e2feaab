use std::f64::consts::PI;
use std::time::Instant;

use rand::distributions::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{QaoaParams, QaoaSimulator};
use crate::{seed, Error, Result};

/// Edge length of the initial simplex, in radians.
pub const INITIAL_STEP: f64 = 0.25;
/// Convergence threshold on the spread of simplex objective values.
pub const SPREAD_TOLERANCE: f64 = 1e-6;

/// One optimizer run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRecord {
    #[serde(flatten)]
    pub params: QaoaParams,
    pub energy: f64,
    pub evals: usize,
    pub seed: u64,
    pub wall_time_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimized {
    pub record: OptimizationRecord,
    pub termination: Termination,
}

/// Derivative-free simplex minimizer with a hard evaluation budget.
#[derive(Clone, Copy, Debug)]
pub struct NelderMead {
    pub initial_step: f64,
    pub tolerance: f64,
    pub max_evals: usize,
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub termination: Termination,
}

impl NelderMead {
    pub fn new(max_evals: usize) -> Self {
        NelderMead {
            initial_step: INITIAL_STEP,
            tolerance: SPREAD_TOLERANCE,
            max_evals,
        }
    }

    /// Minimizes `f` from `x0`. The first evaluation is always `x0`, and the
    /// returned point is the best one evaluated.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let dim = x0.len();
        let mut evals = 0usize;
        let mut best = (x0.to_vec(), f64::INFINITY);
        let budget = self.max_evals;
        let mut eval = |x: &[f64], evals: &mut usize, best: &mut (Vec<f64>, f64)| -> Option<f64> {
            if *evals >= budget {
                return None;
            }
            *evals += 1;
            let v = f(x);
            if v < best.1 {
                *best = (x.to_vec(), v);
            }
            Some(v)
        };
        let finish = |best: (Vec<f64>, f64), evals, termination| Minimum {
            x: best.0,
            value: best.1,
            evals,
            termination,
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        for i in 0..=dim {
            let mut x = x0.to_vec();
            if i > 0 {
                x[i - 1] += self.initial_step;
            }
            match eval(&x, &mut evals, &mut best) {
                Some(v) => simplex.push((x, v)),
                None => return finish(best, evals, Termination::BudgetExhausted),
            }
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[dim].1 - simplex[0].1 < self.tolerance {
                return finish(best, evals, Termination::Converged);
            }
            let mut centroid = vec![0.0; dim];
            for (x, _) in &simplex[..dim] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / dim as f64;
                }
            }
            let worst = simplex[dim].clone();
            let along = |t: f64, from: &[f64]| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(from)
                    .map(|(c, x)| c + t * (x - c))
                    .collect()
            };

            let xr = along(-1.0, &worst.0);
            let Some(fr) = eval(&xr, &mut evals, &mut best) else {
                return finish(best, evals, Termination::BudgetExhausted);
            };
            if fr < simplex[0].1 {
                let xe = along(-2.0, &worst.0);
                let Some(fe) = eval(&xe, &mut evals, &mut best) else {
                    return finish(best, evals, Termination::BudgetExhausted);
                };
                simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[dim - 1].1 {
                simplex[dim] = (xr, fr);
                continue;
            }
            let (xc, outside) = if fr < worst.1 {
                (along(0.5, &xr), true)
            } else {
                (along(0.5, &worst.0), false)
            };
            let Some(fc) = eval(&xc, &mut evals, &mut best) else {
                return finish(best, evals, Termination::BudgetExhausted);
            };
            if (outside && fc <= fr) || (!outside && fc < worst.1) {
                simplex[dim] = (xc, fc);
                continue;
            }
            // Shrink towards the best vertex.
            let anchor = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = anchor
                    .iter()
                    .zip(&vertex.0)
                    .map(|(a, v)| a + 0.5 * (v - a))
                    .collect();
                let Some(v) = eval(&x, &mut evals, &mut best) else {
                    return finish(best, evals, Termination::BudgetExhausted);
                };
                *vertex = (x, v);
            }
        }
    }
}

/// `200 * 2p` energy evaluations.
pub fn default_budget(p: usize) -> usize {
    200 * 2 * p
}

/// Maximizes the QAOA energy from `init` with at most `budget` evaluations.
pub fn optimize(sim: &QaoaSimulator, init: &QaoaParams, budget: usize) -> Result<Optimized> {
    let p = init.depth();
    if budget < 2 * p + 1 {
        return Err(Error::InvalidParams(format!(
            "budget {budget} is below 2p + 1 = {}",
            2 * p + 1
        )));
    }
    Ok(refine(sim, init, budget))
}

/// Like [`optimize`] but accepts any budget; with a budget smaller than the
/// simplex the best of its first vertices is returned, and a budget of 0
/// only evaluates `init`.
pub fn refine(sim: &QaoaSimulator, init: &QaoaParams, budget: usize) -> Optimized {
    let start = Instant::now();
    if budget == 0 {
        return Optimized {
            record: OptimizationRecord {
                params: init.clone(),
                energy: sim.energy(init),
                evals: 1,
                seed: 0,
                wall_time_s: start.elapsed().as_secs_f64(),
            },
            termination: Termination::BudgetExhausted,
        };
    }
    let objective = |x: &[f64]| {
        let params = QaoaParams::from_slice(x).expect("simplex keeps the layout");
        -sim.energy(&params)
    };
    let min = NelderMead::new(budget).minimize(objective, &init.to_vec());
    let params = QaoaParams::from_slice(&min.x).expect("simplex keeps the layout");
    Optimized {
        record: OptimizationRecord {
            energy: -min.value,
            params,
            evals: min.evals,
            seed: 0,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
        termination: min.termination,
    }
}

/// Uniform draw with `gamma in (0, 2pi)` and `beta in (0, pi)`.
pub fn random_params(p: usize, seed: u64) -> QaoaParams {
    let mut rng = seed::rng(seed);
    let gammas = (0..p).map(|_| 2.0 * PI * rng.sample::<f64, _>(Open01)).collect();
    let betas = (0..p).map(|_| PI * rng.sample::<f64, _>(Open01)).collect();
    QaoaParams::new(gammas, betas).expect("p >= 1 checked by callers")
}

pub fn multistart(sim: &QaoaSimulator, p: usize, n_starts: usize, seed: u64) -> Result<Vec<OptimizationRecord>> {
    multistart_with_budget(sim, p, n_starts, seed, default_budget(p))
}

/// `n_starts` independent runs from random initial schedules, sorted by
/// energy descending. Run `i` uses seed `derive_seed(seed, i)`.
pub fn multistart_with_budget(
    sim: &QaoaSimulator,
    p: usize,
    n_starts: usize,
    seed: u64,
    budget: usize,
) -> Result<Vec<OptimizationRecord>> {
    if p == 0 || n_starts == 0 {
        return Err(Error::InvalidParams(format!(
            "need p >= 1 and at least one start (got p={p}, starts={n_starts})"
        )));
    }
    let mut records = (0..n_starts as u64)
        .into_par_iter()
        .map(|i| {
            let run_seed = seed::derive_seed(seed, i);
            let init = random_params(p, run_seed);
            optimize(sim, &init, budget).map(|o| OptimizationRecord {
                seed: run_seed,
                ..o.record
            })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| b.energy.total_cmp(&a.energy));
    Ok(records)
}

/// `energy / cstar`.
pub fn approx_ratio(energy: f64, cstar: usize) -> Result<f64> {
    if cstar == 0 {
        return Err(Error::InvalidInput("approximation ratio needs C* > 0".into()));
    }
    Ok(energy / cstar as f64)
}
