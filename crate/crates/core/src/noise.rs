//! Noisy QAOA energies by stochastic Pauli trajectories.
//!
//! Every trajectory runs the ideal circuit and, with the scaled
//! probabilities, inserts a uniformly random non-identity Pauli after each
//! mixer rotation (one qubit) and after each edge term of the phase layer
//! (both endpoints). Readout flips are folded in analytically: flipping each
//! bit with probability `q` flips an edge's cut indicator with probability
//! `r = 2q(1 - q)`, so the measured energy is `(1 - 2r) E + r m`.
//!
//! Each trajectory draws its random numbers from its own stream and draws
//! the same numbers at every scale, so sweeps over the scale factor use
//! common random numbers.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qaoa::{CutTable, QaoaParams, StateVector, DEFAULT_SIMULATOR_CAP};
use crate::stats::{self, BoxStats};
use crate::{seed, Error, Graph, Result};

/// Default trajectory count.
pub const DEFAULT_TRAJECTORIES: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability per mixer rotation.
    pub p1: f64,
    /// Depolarizing probability per edge term.
    pub p2: f64,
    /// Readout flip probability per bit.
    pub p_ro: f64,
    pub scale: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            p1: 1e-3,
            p2: 1e-2,
            p_ro: 2e-2,
            scale: 1.0,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel {
            p1: 0.0,
            p2: 0.0,
            p_ro: 0.0,
            scale: 1.0,
        }
    }

    pub fn with_scale(self, scale: f64) -> Self {
        NoiseModel { scale, ..self }
    }

    /// `(p1, p2, p_ro)` multiplied by the scale.
    pub fn scaled(&self) -> (f64, f64, f64) {
        (self.scale * self.p1, self.scale * self.p2, self.scale * self.p_ro)
    }

    /// Scale 0 is accepted and means no noise.
    pub fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidNoise(format!("scale {} must be finite and >= 0", self.scale)));
        }
        let (p1, p2, pr) = self.scaled();
        for (name, p) in [("p1", p1), ("p2", p2), ("p_ro", pr)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("scaled {name} = {p} is outside [0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyEstimate {
    pub e_noisy: f64,
    pub stderr: f64,
    pub n_traj: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pauli {
    I,
    X,
    Y,
    Z,
}

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

fn apply_pauli(s: &mut StateVector, qubit: usize, p: Pauli) {
    let mask = 1usize << qubit;
    let amps = s.amplitudes_mut();
    match p {
        Pauli::I => {}
        Pauli::Z => {
            for (z, a) in amps.iter_mut().enumerate() {
                if z & mask != 0 {
                    *a = -*a;
                }
            }
        }
        Pauli::X | Pauli::Y => {
            let i = Complex64::new(0.0, 1.0);
            for z in 0..amps.len() {
                if z & mask == 0 {
                    let (a0, a1) = (amps[z], amps[z | mask]);
                    if p == Pauli::X {
                        amps[z] = a1;
                        amps[z | mask] = a0;
                    } else {
                        // Y = (0, -i; i, 0)
                        amps[z] = -i * a1;
                        amps[z | mask] = i * a0;
                    }
                }
            }
        }
    }
}

/// Noisy evaluator bound to one graph.
#[derive(Clone, Debug)]
pub struct NoisySimulator {
    n: usize,
    edges: Vec<(usize, usize)>,
    cuts: CutTable,
}

impl NoisySimulator {
    pub fn new(g: &Graph) -> Result<Self> {
        Self::with_cap(g, DEFAULT_SIMULATOR_CAP)
    }

    pub fn with_cap(g: &Graph, cap: usize) -> Result<Self> {
        Ok(NoisySimulator {
            n: g.node_count(),
            edges: g.edges().to_vec(),
            cuts: CutTable::new(g, cap)?,
        })
    }

    /// `exp(-i gamma sum_{e in edges} C_e)`.
    fn apply_edge_phase(&self, s: &mut StateVector, edges: &[(usize, usize)], gamma: f64) {
        if edges.is_empty() {
            return;
        }
        let phases: Vec<Complex64> = (0..=edges.len())
            .map(|k| Complex64::from_polar(1.0, -gamma * k as f64))
            .collect();
        for (z, a) in s.amplitudes_mut().iter_mut().enumerate() {
            let k = edges.iter().filter(|&&(u, v)| ((z >> u) ^ (z >> v)) & 1 == 1).count();
            *a *= phases[k];
        }
    }

    /// Energy of one trajectory before readout error.
    fn trajectory(&self, params: &QaoaParams, p1: f64, p2: f64, rng: &mut ChaCha8Rng) -> f64 {
        let mut s = StateVector::uniform(self.n);
        for (&gamma, &beta) in params.gammas().iter().zip(params.betas()) {
            // Decide every edge's error up front: (edge index, Pauli pair).
            let faults: Vec<(usize, Pauli, Pauli)> = (0..self.edges.len())
                .filter_map(|e| {
                    let (hit, k) = (rng.gen::<f64>(), rng.gen_range(1..16usize));
                    (hit < p2).then_some((e, PAULIS[k / 4], PAULIS[k % 4]))
                })
                .collect();
            if faults.is_empty() {
                s.apply_phase(&self.cuts, gamma);
            } else {
                let mut from = 0;
                for &(e, pu, pv) in &faults {
                    self.apply_edge_phase(&mut s, &self.edges[from..=e], gamma);
                    let (u, v) = self.edges[e];
                    apply_pauli(&mut s, u, pu);
                    apply_pauli(&mut s, v, pv);
                    from = e + 1;
                }
                self.apply_edge_phase(&mut s, &self.edges[from..], gamma);
            }
            for q in 0..self.n {
                s.apply_rx(q, beta);
                let (hit, k) = (rng.gen::<f64>(), rng.gen_range(1..4usize));
                if hit < p1 {
                    apply_pauli(&mut s, q, PAULIS[k]);
                }
            }
        }
        s.expectation(&self.cuts)
    }

    /// Measured energy of every trajectory.
    pub fn trajectory_energies(&self, params: &QaoaParams, nm: &NoiseModel, n_traj: usize, seed: u64) -> Result<Vec<f64>> {
        nm.validate()?;
        if n_traj == 0 {
            return Err(Error::InvalidInput("need at least one trajectory".into()));
        }
        let (p1, p2, q) = nm.scaled();
        let r = 2.0 * q * (1.0 - q);
        let m = self.edges.len() as f64;
        Ok((0..n_traj as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::stream_rng(seed, t);
                let e = self.trajectory(params, p1, p2, &mut rng);
                if r == 0.0 {
                    e
                } else {
                    (1.0 - 2.0 * r) * e + r * m
                }
            })
            .collect())
    }

    pub fn energy(&self, params: &QaoaParams, nm: &NoiseModel, n_traj: usize, seed: u64) -> Result<NoisyEstimate> {
        let energies = self.trajectory_energies(params, nm, n_traj, seed)?;
        Ok(NoisyEstimate {
            e_noisy: stats::mean(&energies),
            stderr: stats::sample_std(&energies) / (n_traj as f64).sqrt(),
            n_traj,
            seed,
        })
    }
}

pub fn noisy_energy(g: &Graph, params: &QaoaParams, nm: &NoiseModel, n_traj: usize, seed: u64) -> Result<NoisyEstimate> {
    NoisySimulator::new(g)?.energy(params, nm, n_traj, seed)
}

/// `(|E_noisy| - |E_ideal|, that / |E_ideal|)`.
pub fn error_stats(e_ideal: f64, est: &NoisyEstimate) -> Result<(f64, f64)> {
    if e_ideal == 0.0 {
        return Err(Error::InvalidInput("relative error needs a nonzero ideal energy".into()));
    }
    let delta = est.e_noisy.abs() - e_ideal.abs();
    Ok((delta, delta / e_ideal.abs()))
}

/// One graph of a sweep.
#[derive(Clone, Debug)]
pub struct SweepInput {
    pub graph_id: String,
    pub graph: Graph,
    pub params: QaoaParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub graph_id: String,
    pub scale: f64,
    pub e_ideal: f64,
    pub e_noisy: f64,
    pub stderr: f64,
    pub delta_e: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSummary {
    pub scale: f64,
    pub abs: BoxStats,
    pub rel: BoxStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<ScaleSummary>,
}

impl Sweep {
    pub fn write_rows_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Box-plot table of the absolute (`relative = false`) or relative errors.
    pub fn write_summary_csv<W: std::io::Write>(&self, relative: bool, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scale", "mean", "median", "q1", "q3", "lo_whisker", "hi_whisker", "n_outliers"])?;
        for s in &self.summary {
            let b = if relative { &s.rel } else { &s.abs };
            w.write_record(&[
                s.scale.to_string(),
                b.mean.to_string(),
                b.median.to_string(),
                b.q1.to_string(),
                b.q3.to_string(),
                b.lo_whisker.to_string(),
                b.hi_whisker.to_string(),
                b.n_outliers.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Noisy estimates of every graph at every scale. Graph `i` uses seed
/// `derive_seed(seed, i)` at all scales.
pub fn sweep_scale(inputs: &[SweepInput], scales: &[f64], nm: &NoiseModel, n_traj: usize, seed: u64) -> Result<Sweep> {
    if inputs.is_empty() || scales.is_empty() {
        return Err(Error::InvalidInput("sweep needs graphs and scales".into()));
    }
    for &s in scales {
        nm.with_scale(s).validate()?;
    }
    let per_graph = inputs
        .iter()
        .enumerate()
        .map(|(i, inp)| {
            let sim = NoisySimulator::new(&inp.graph)?;
            let ideal = sim.energy(&inp.params, &NoiseModel::noiseless(), 1, 0)?.e_noisy;
            let graph_seed = seed::derive_seed(seed, i as u64);
            scales
                .iter()
                .map(|&scale| {
                    let est = sim.energy(&inp.params, &nm.with_scale(scale), n_traj, graph_seed)?;
                    let (delta_e, rel_err) = error_stats(ideal, &est)?;
                    Ok(SweepRow {
                        graph_id: inp.graph_id.clone(),
                        scale,
                        e_ideal: ideal,
                        e_noisy: est.e_noisy,
                        stderr: est.stderr,
                        delta_e,
                        rel_err,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<SweepRow> = per_graph.into_iter().flatten().collect();
    let summary = scales
        .iter()
        .map(|&scale| {
            let at: Vec<&SweepRow> = rows.iter().filter(|r| r.scale == scale).collect();
            let abs: Vec<f64> = at.iter().map(|r| r.delta_e).collect();
            let rel: Vec<f64> = at.iter().map(|r| r.rel_err).collect();
            ScaleSummary {
                scale,
                abs: BoxStats::from_values(&abs).expect("finite errors"),
                rel: BoxStats::from_values(&rel).expect("finite errors"),
            }
        })
        .collect();
    Ok(Sweep { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::QaoaSimulator;

    fn graph() -> Graph {
        Graph::new(6, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3), (1, 4)]).unwrap()
    }

    fn params() -> QaoaParams {
        QaoaParams::new(vec![0.4, 0.7], vec![0.6, 0.3]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(NoiseModel::default().validate().is_ok());
        assert!(NoiseModel::default().with_scale(-1.0).validate().is_err());
        assert!(NoiseModel::default().with_scale(100.0).validate().is_err());
        assert!(NoiseModel::default().with_scale(0.0).validate().is_ok());
        assert!(noisy_energy(&graph(), &params(), &NoiseModel::default(), 0, 0).is_err());
    }

    #[test]
    fn paulis_match_their_matrices() {
        let mut s = StateVector::from_amplitudes(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        apply_pauli(&mut s, 0, Pauli::Y);
        // Y (0.6, 0.8i) = (-i * 0.8i, i * 0.6) = (0.8, 0.6i)
        assert!((s.amplitudes()[0] - Complex64::new(0.8, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - Complex64::new(0.0, 0.6)).norm() < 1e-15);
        apply_pauli(&mut s, 0, Pauli::Z);
        assert!((s.amplitudes()[1] - Complex64::new(0.0, -0.6)).norm() < 1e-15);
    }

    #[test]
    fn split_phase_equals_full_phase() {
        let g = graph();
        let sim = NoisySimulator::new(&g).unwrap();
        let mut a = StateVector::uniform(6);
        a.apply_rx(2, 0.3);
        let mut b = a.clone();
        a.apply_phase(&sim.cuts, 0.9);
        sim.apply_edge_phase(&mut b, &g.edges()[..3], 0.9);
        sim.apply_edge_phase(&mut b, &g.edges()[3..], 0.9);
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_noise_is_exact() {
        let g = graph();
        let ideal = QaoaSimulator::new(&g).unwrap().energy(&params());
        let est = noisy_energy(&g, &params(), &NoiseModel::noiseless(), 1, 3).unwrap();
        assert_eq!(est.e_noisy, ideal);
        let sim = NoisySimulator::new(&g).unwrap();
        let zero = NoiseModel::default().with_scale(0.0);
        assert!(sim.trajectory_energies(&params(), &zero, 20, 3).unwrap().iter().all(|&e| e == ideal));
        let est = sim.energy(&params(), &zero, 20, 3).unwrap();
        assert_eq!((est.e_noisy, est.stderr), (ideal, 0.0));
    }

    #[test]
    fn full_depolarization_gives_half_the_edges() {
        let g = graph();
        let nm = NoiseModel {
            p1: 0.75,
            p2: 0.0,
            p_ro: 0.0,
            scale: 1.0,
        };
        let est = noisy_energy(&g, &params(), &nm, 4000, 1).unwrap();
        let half = g.edge_count() as f64 / 2.0;
        assert!((est.e_noisy - half).abs() < 4.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn readout_error_is_analytic() {
        let g = graph();
        let ideal = QaoaSimulator::new(&g).unwrap().energy(&params());
        let nm = NoiseModel {
            p1: 0.0,
            p2: 0.0,
            p_ro: 0.1,
            scale: 1.0,
        };
        let est = noisy_energy(&g, &params(), &nm, 3, 0).unwrap();
        let r = 2.0 * 0.1 * 0.9;
        assert!((est.e_noisy - ((1.0 - 2.0 * r) * ideal + r * 8.0)).abs() < 1e-12);
    }

    #[test]
    fn error_stats_arithmetic() {
        let est = NoisyEstimate {
            e_noisy: 8.5,
            stderr: 0.0,
            n_traj: 1,
            seed: 0,
        };
        let (d, r) = error_stats(10.0, &est).unwrap();
        assert!((d + 1.5).abs() < 1e-15 && (r + 0.15).abs() < 1e-15);
        assert!(error_stats(0.0, &est).is_err());
    }

    #[test]
    fn sweep_shape_and_repeatability() {
        let inputs = vec![
            SweepInput {
                graph_id: "a".into(),
                graph: graph(),
                params: params(),
            },
            SweepInput {
                graph_id: "b".into(),
                graph: Graph::cycle(5),
                params: params(),
            },
        ];
        let sweep = sweep_scale(&inputs, &[1.0, 1.0, 2.0], &NoiseModel::default(), 50, 9).unwrap();
        assert_eq!(sweep.rows.len(), 6);
        assert_eq!(sweep.rows[0], sweep.rows[1]);
        for s in &sweep.summary {
            assert!(s.abs.q1 <= s.abs.median && s.abs.median <= s.abs.q3);
        }
        let mut out = Vec::new();
        sweep.write_summary_csv(false, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("scale,mean,median,q1,q3,lo_whisker,hi_whisker,n_outliers\n"));
        let mut out = Vec::new();
        sweep.write_rows_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("graph_id,scale,e_ideal,e_noisy,stderr,delta_e,rel_err\n"));
    }
}
