use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DonorEntry;
use crate::maxcut::{cut_value_bits, exact_maxcut_with_cap, DEFAULT_ORACLE_CAP};
use crate::qaoa::{random_params, refine, OptimizationRecord, QaoaParams, QaoaSimulator, DEFAULT_SIMULATOR_CAP};
use crate::{seed, stats, Error, Graph, Result};

/// Samples drawn from each transferred state when C* is out of reach.
const LOWER_BOUND_SAMPLES: usize = 64;

/// How the acceptor's reference cut is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutReference {
    Exact(usize),
    /// Best cut found by sampling the transferred states followed by
    /// single-flip ascent; recomputed per transfer.
    LowerBound,
}

/// A graph receiving parameters, with its simulator prepared once.
#[derive(Clone, Debug)]
pub struct Acceptor {
    pub id: String,
    pub graph: Graph,
    pub sim: QaoaSimulator,
    pub reference: CutReference,
}

impl Acceptor {
    pub fn new(id: impl Into<String>, graph: Graph) -> Result<Acceptor> {
        Acceptor::with_caps(id, graph, DEFAULT_SIMULATOR_CAP, DEFAULT_ORACLE_CAP)
    }

    pub fn with_caps(id: impl Into<String>, graph: Graph, sim_cap: usize, oracle_cap: usize) -> Result<Acceptor> {
        let sim = QaoaSimulator::with_cap(&graph, sim_cap)?;
        let reference = match exact_maxcut_with_cap(&graph, oracle_cap) {
            Ok(sol) => CutReference::Exact(sol.value),
            Err(Error::CapExceeded { .. }) => CutReference::LowerBound,
            Err(e) => return Err(e),
        };
        Ok(Acceptor {
            id: id.into(),
            graph,
            sim,
            reference,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferOptions {
    pub p: usize,
    /// Transfer only the donor's best record instead of all of them.
    pub best_only: bool,
    /// Seeds the sampling used for lower-bound references.
    pub seed: u64,
}

impl TransferOptions {
    pub fn new(p: usize) -> Self {
        TransferOptions {
            p,
            best_only: false,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub acceptor_id: String,
    pub donor_id: u64,
    pub distance: f64,
    /// Transferred approximation ratio of every donor record used.
    pub ratios: Vec<f64>,
    pub r_avg: f64,
    pub r_native: Option<f64>,
    pub regime: String,
    pub wall_time_s: f64,
    pub cstar: usize,
    pub lower_bound: bool,
}

/// One line of the transfer CSV.
#[derive(Serialize)]
struct TransferRow<'a> {
    acceptor_id: &'a str,
    donor_id: u64,
    distance: f64,
    r_avg: f64,
    r_native: Option<f64>,
    regime: &'a str,
    wall_time_s: f64,
}

impl TransferResult {
    pub fn write_csv<W: std::io::Write>(rows: &[TransferResult], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if rows.is_empty() {
            w.write_record(["acceptor_id", "donor_id", "distance", "r_avg", "r_native", "regime", "wall_time_s"])?;
        }
        for r in rows {
            w.serialize(TransferRow {
                acceptor_id: &r.acceptor_id,
                donor_id: r.donor_id,
                distance: r.distance,
                r_avg: r.r_avg,
                r_native: r.r_native,
                regime: &r.regime,
                wall_time_s: r.wall_time_s,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_depth(records: &[OptimizationRecord], p: usize) -> Result<()> {
    match records.iter().find(|r| r.params.depth() != p) {
        Some(r) => Err(Error::DepthMismatch {
            expected: p,
            found: r.params.depth(),
        }),
        None => Ok(()),
    }
}

/// Evaluates the donor's schedules on the acceptor and averages the
/// resulting approximation ratios.
pub fn transfer_eval(
    acceptor: &Acceptor,
    donor: &DonorEntry,
    distance: f64,
    regime: &str,
    opts: &TransferOptions,
) -> Result<TransferResult> {
    let start = Instant::now();
    let records = if opts.best_only {
        &donor.records[..1]
    } else {
        &donor.records[..]
    };
    if records.is_empty() {
        return Err(Error::InvalidInput(format!("donor {} has no records", donor.graph_id)));
    }
    check_depth(records, opts.p)?;
    let energies: Vec<f64> = records.iter().map(|r| acceptor.sim.energy(&r.params)).collect();
    let (cstar, lower_bound) = match acceptor.reference {
        CutReference::Exact(c) => (c, false),
        CutReference::LowerBound => {
            let params: Vec<&QaoaParams> = records.iter().map(|r| &r.params).collect();
            (sampled_cut(acceptor, &params, opts.seed), true)
        }
    };
    if cstar == 0 {
        return Err(Error::InvalidInput(format!("acceptor {} has no edges", acceptor.id)));
    }
    let ratios: Vec<f64> = energies.iter().map(|e| e / cstar as f64).collect();
    Ok(TransferResult {
        acceptor_id: acceptor.id.clone(),
        donor_id: donor.graph_id,
        distance,
        r_avg: stats::mean(&ratios),
        ratios,
        r_native: None,
        regime: regime.to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        cstar,
        lower_bound,
    })
}

/// Best cut among samples of each transferred state, each improved by
/// single-node flips until no flip helps.
fn sampled_cut(acceptor: &Acceptor, params: &[&QaoaParams], seed: u64) -> usize {
    let g = &acceptor.graph;
    let n = g.node_count();
    let mut best = 0;
    for (k, p) in params.iter().enumerate() {
        let probs = acceptor.sim.state(p).probabilities();
        let mut rng = seed::stream_rng(seed, k as u64);
        for _ in 0..LOWER_BOUND_SAMPLES {
            let x: f64 = rng.gen();
            let mut acc = 0.0;
            let mut z = probs.len() - 1;
            for (i, &q) in probs.iter().enumerate() {
                acc += q;
                if x < acc {
                    z = i;
                    break;
                }
            }
            let mut z = z as u64;
            let mut value = cut_value_bits(g, z);
            loop {
                let flip = (0..n)
                    .map(|v| (v, cut_value_bits(g, z ^ (1 << v))))
                    .max_by_key(|&(v, c)| (c, std::cmp::Reverse(v)));
                match flip {
                    Some((v, c)) if c > value => {
                        z ^= 1 << v;
                        value = c;
                    }
                    _ => break,
                }
            }
            best = best.max(value);
        }
    }
    best
}

/// Continues optimizing from transferred parameters for at most
/// `extra_iters` evaluations; 0 just evaluates them. The result never has
/// lower energy than `params` itself.
pub fn warm_start(sim: &QaoaSimulator, params: &QaoaParams, extra_iters: usize) -> OptimizationRecord {
    refine(sim, params, extra_iters).record
}

/// `(iterations, transferred)` for every speed-up regime; the first row is
/// the reference.
pub const SPEEDUP_REGIMES: [(usize, bool); 5] = [(1000, false), (100, false), (10, false), (10, true), (0, true)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub graph_id: String,
    pub iterations: usize,
    pub transferred: bool,
    pub evals: usize,
    pub wall_time_s: f64,
    /// Wall time of the reference regime divided by this row's.
    pub speedup: f64,
    pub energy: f64,
    pub ratio: f64,
}

/// Runs the speed-up regimes on one acceptor. Random-start regimes share the
/// initial point drawn from `seed`; transferred regimes call `transfer`
/// (embedding plus donor lookup) inside their timed section.
pub fn speedup_report<F>(acceptor: &Acceptor, p: usize, seed: u64, mut transfer: F) -> Result<Vec<SpeedupRow>>
where
    F: FnMut(&Graph) -> Result<QaoaParams>,
{
    let cstar = match acceptor.reference {
        CutReference::Exact(c) if c > 0 => c,
        _ => {
            return Err(Error::InvalidInput(format!(
                "speed-up report needs an exact, positive C* for acceptor {}",
                acceptor.id
            )))
        }
    };
    let init = random_params(p, seed);
    let mut rows = Vec::with_capacity(SPEEDUP_REGIMES.len());
    for (iterations, transferred) in SPEEDUP_REGIMES {
        let start = Instant::now();
        let from = if transferred {
            let params = transfer(&acceptor.graph)?;
            if params.depth() != p {
                return Err(Error::DepthMismatch {
                    expected: p,
                    found: params.depth(),
                });
            }
            params
        } else {
            init.clone()
        };
        let rec = refine(&acceptor.sim, &from, iterations).record;
        let wall = start.elapsed().as_secs_f64();
        rows.push(SpeedupRow {
            graph_id: acceptor.id.clone(),
            iterations,
            transferred,
            evals: rec.evals,
            wall_time_s: wall,
            speedup: 0.0,
            energy: rec.energy,
            ratio: rec.energy / cstar as f64,
        });
    }
    let reference = rows[0].wall_time_s;
    for r in &mut rows {
        r.speedup = reference / r.wall_time_s.max(f64::MIN_POSITIVE);
    }
    rows[0].speedup = 1.0;
    Ok(rows)
}
