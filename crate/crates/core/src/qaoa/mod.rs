//! Statevector QAOA for MaxCut.
//!
//! The ansatz is `U_B(beta_p) U_C(gamma_p) ... U_B(beta_1) U_C(gamma_1) |s>`
//! with `U_C(gamma) = exp(-i gamma C)` diagonal in the computational basis and
//! `U_B(beta) = prod_j exp(-i beta X_j)`. Basis index bit `i` is node `i`.
//! Energies are expectations of the cut operator `C` and are maximized.

mod optimize;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Graph, Result};

pub use optimize::{
    approx_ratio, default_budget, multistart, multistart_with_budget, optimize, random_params, refine,
    NelderMead, OptimizationRecord, Optimized, Termination, INITIAL_STEP, SPREAD_TOLERANCE,
};

/// Default qubit cap for the statevector engine.
pub const DEFAULT_SIMULATOR_CAP: usize = 20;

/// A depth-`p` schedule. Angles are kept unreduced; see [`QaoaParams::reduced`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct QaoaParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

#[derive(Deserialize)]
struct RawParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl TryFrom<RawParams> for QaoaParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        QaoaParams::new(raw.gammas, raw.betas)
    }
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::InvalidParams(format!(
                "need equal non-empty gamma/beta lists, got {} and {}",
                gammas.len(),
                betas.len()
            )));
        }
        if gammas.iter().chain(&betas).any(|a| !a.is_finite()) {
            return Err(Error::InvalidParams("non-finite angle".into()));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn zeros(p: usize) -> Result<Self> {
        QaoaParams::new(vec![0.0; p], vec![0.0; p])
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Flat layout `[gamma_1..gamma_p, beta_1..beta_p]` used by optimizers.
    pub fn to_vec(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_slice(flat: &[f64]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::InvalidParams(format!("odd parameter count {}", flat.len())));
        }
        let p = flat.len() / 2;
        QaoaParams::new(flat[..p].to_vec(), flat[p..].to_vec())
    }

    /// Angles folded into `[0, 2pi)` and `[0, pi)`; the energy is unchanged.
    pub fn reduced(&self) -> QaoaParams {
        QaoaParams {
            gammas: self.gammas.iter().map(|g| g.rem_euclid(2.0 * PI)).collect(),
            betas: self.betas.iter().map(|b| b.rem_euclid(PI)).collect(),
        }
    }
}

/// `2^n` complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        StateVector {
            n,
            amps: vec![a; dim],
        }
    }

    pub fn basis(n: usize, z: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[z] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes is not a power of two",
                amps.len()
            )));
        }
        Ok(StateVector {
            n: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies amplitude `z` by `exp(-i gamma C(z))`.
    pub fn apply_phase(&mut self, cuts: &CutTable, gamma: f64) {
        debug_assert_eq!(cuts.values.len(), self.amps.len());
        let phases: Vec<Complex64> = (0..=cuts.max_cut)
            .map(|k| Complex64::from_polar(1.0, -gamma * k as f64))
            .collect();
        for (a, &c) in self.amps.iter_mut().zip(&cuts.values) {
            *a *= phases[c as usize];
        }
    }

    /// `exp(-i beta X)` on one qubit.
    pub fn apply_rx(&mut self, qubit: usize, beta: f64) {
        let (s, c) = beta.sin_cos();
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                // (c, -i s; -i s, c)
                *a0 = Complex64::new(c * x0.re + s * x1.im, c * x0.im - s * x1.re);
                *a1 = Complex64::new(c * x1.re + s * x0.im, c * x1.im - s * x0.re);
            }
        }
    }

    pub fn apply_mixer(&mut self, beta: f64) {
        for q in 0..self.n {
            self.apply_rx(q, beta);
        }
    }

    pub fn expectation(&self, cuts: &CutTable) -> f64 {
        self.amps
            .iter()
            .zip(&cuts.values)
            .map(|(a, &c)| a.norm_sqr() * c as f64)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// `C(z)` for every basis index of a graph.
#[derive(Clone, Debug)]
pub struct CutTable {
    values: Vec<u16>,
    max_cut: usize,
    edges: usize,
}

impl CutTable {
    pub fn new(g: &Graph, cap: usize) -> Result<Self> {
        let n = g.node_count();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if n > cap {
            return Err(Error::CapExceeded { n, cap });
        }
        let mut values = vec![0u16; 1 << n];
        // Gray-code walk: flipping node v changes C by (#same-side) - (#other).
        let mut side = vec![false; n];
        let mut current: i32 = 0;
        let mut z = 0usize;
        for step in 1usize..(1 << n) {
            let v = step.trailing_zeros() as usize;
            for &w in g.neighbors(v) {
                current += if side[w] == side[v] { 1 } else { -1 };
            }
            side[v] = !side[v];
            z ^= 1 << v;
            values[z] = current as u16;
        }
        let max_cut = values.iter().copied().max().unwrap_or(0) as usize;
        Ok(CutTable {
            values,
            max_cut,
            edges: g.edge_count(),
        })
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    /// Largest entry, i.e. the exact MaxCut value.
    pub fn max_cut(&self) -> usize {
        self.max_cut
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }
}

/// Energy evaluator bound to one graph.
#[derive(Clone, Debug)]
pub struct QaoaSimulator {
    n: usize,
    cuts: CutTable,
}

impl QaoaSimulator {
    pub fn new(g: &Graph) -> Result<Self> {
        Self::with_cap(g, DEFAULT_SIMULATOR_CAP)
    }

    pub fn with_cap(g: &Graph, cap: usize) -> Result<Self> {
        Ok(QaoaSimulator {
            n: g.node_count(),
            cuts: CutTable::new(g, cap)?,
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn cuts(&self) -> &CutTable {
        &self.cuts
    }

    pub fn state(&self, params: &QaoaParams) -> StateVector {
        let mut s = StateVector::uniform(self.n);
        for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
            s.apply_phase(&self.cuts, gamma);
            s.apply_mixer(beta);
        }
        s
    }

    pub fn energy(&self, params: &QaoaParams) -> f64 {
        self.state(params).expectation(&self.cuts)
    }
}

pub fn uniform_state(n: usize) -> StateVector {
    StateVector::uniform(n)
}

pub fn apply_phase(s: &mut StateVector, g: &Graph, gamma: f64) -> Result<()> {
    check_width(s, g)?;
    s.apply_phase(&CutTable::new(g, s.n)?, gamma);
    Ok(())
}

pub fn apply_mixer(s: &mut StateVector, beta: f64) {
    s.apply_mixer(beta);
}

pub fn qaoa_state(g: &Graph, params: &QaoaParams) -> Result<StateVector> {
    Ok(QaoaSimulator::new(g)?.state(params))
}

pub fn expectation(s: &StateVector, g: &Graph) -> Result<f64> {
    check_width(s, g)?;
    Ok(s.expectation(&CutTable::new(g, s.n)?))
}

pub fn qaoa_energy(g: &Graph, params: &QaoaParams) -> Result<f64> {
    Ok(QaoaSimulator::new(g)?.energy(params))
}

fn check_width(s: &StateVector, g: &Graph) -> Result<()> {
    if s.n != g.node_count() {
        return Err(Error::InvalidInput(format!(
            "state has {} qubits, graph has {} nodes",
            s.n,
            g.node_count()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxcut;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn uniform_examples() {
        let s = uniform_state(1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.amplitudes().iter().all(|&a| close(a, Complex64::new(h, 0.0))));
        let s2 = uniform_state(2);
        assert!(s2.amplitudes().iter().all(|&a| close(a, Complex64::new(0.5, 0.0))));
        for n in 0..=DEFAULT_SIMULATOR_CAP.min(16) {
            assert!((uniform_state(n).norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cut_table_matches_direct_count() {
        let g = Graph::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]).unwrap();
        let t = CutTable::new(&g, 20).unwrap();
        for z in 0..32usize {
            assert_eq!(t.values()[z] as usize, maxcut::cut_value_bits(&g, z as u64));
        }
        assert_eq!(t.max_cut(), maxcut::exact_maxcut(&g).unwrap().value);
        assert!(matches!(CutTable::new(&Graph::path(21), 20), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn phase_examples() {
        let g = Graph::cycle(5);
        let mut s = uniform_state(5);
        let orig = s.clone();
        apply_phase(&mut s, &g, 0.0).unwrap();
        assert_eq!(s, orig);
        apply_phase(&mut s, &g, 2.0 * PI).unwrap();
        assert!(s.amplitudes().iter().zip(orig.amplitudes()).all(|(&a, &b)| close(a, b)));

        let edge = Graph::path(2);
        // |01>: node 0 = 1, node 1 = 0, basis index 1.
        let mut b = StateVector::basis(2, 1);
        apply_phase(&mut b, &edge, FRAC_PI_2).unwrap();
        assert!(close(b.amplitudes()[1], Complex64::from_polar(1.0, -FRAC_PI_2)));
    }

    #[test]
    fn mixer_examples() {
        let mut s = StateVector::basis(3, 5);
        let orig = s.clone();
        apply_mixer(&mut s, 0.0);
        assert_eq!(s, orig);

        let mut one = StateVector::basis(1, 0);
        apply_mixer(&mut one, FRAC_PI_2);
        assert!((one.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
        assert!(close(one.amplitudes()[1], Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn beta_pi_mixer_keeps_energy() {
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let sim = QaoaSimulator::new(&g).unwrap();
        let params = QaoaParams::new(vec![0.7, 1.9], vec![0.3, 2.2]).unwrap();
        let mut s = sim.state(&params);
        let before = s.expectation(sim.cuts());
        s.apply_mixer(PI);
        assert!((s.expectation(sim.cuts()) - before).abs() < 1e-12);
    }

    #[test]
    fn energy_examples() {
        let g = Graph::new(6, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 3), (1, 5)]).unwrap();
        let m = g.edge_count() as f64;
        assert!((expectation(&uniform_state(6), &g).unwrap() - m / 2.0).abs() < 1e-12);
        for z in [0usize, 7, 21, 63] {
            let e = expectation(&StateVector::basis(6, z), &g).unwrap();
            assert_eq!(e, maxcut::cut_value_bits(&g, z as u64) as f64);
        }
        let zero = QaoaParams::zeros(3).unwrap();
        assert!((qaoa_energy(&g, &zero).unwrap() - m / 2.0).abs() < 1e-12);
        let s = qaoa_state(&g, &QaoaParams::new(vec![0.0], vec![0.0]).unwrap()).unwrap();
        assert_eq!(s, uniform_state(6));
    }

    #[test]
    fn single_edge_reaches_one_at_depth_one() {
        // Oracle: grid search over (gamma, beta).
        let g = Graph::path(2);
        let sim = QaoaSimulator::new(&g).unwrap();
        let mut best: f64 = 0.0;
        for i in 0..=200 {
            for j in 0..=200 {
                let p = QaoaParams::new(
                    vec![2.0 * PI * i as f64 / 200.0],
                    vec![PI * j as f64 / 200.0],
                )
                .unwrap();
                best = best.max(sim.energy(&p));
            }
        }
        assert!((best - 1.0).abs() < 1e-3, "grid optimum {best}");
        let exact = QaoaParams::new(vec![FRAC_PI_2], vec![PI / 8.0]).unwrap();
        assert!((sim.energy(&exact) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn params_validation_and_reduction() {
        assert!(QaoaParams::new(vec![], vec![]).is_err());
        assert!(QaoaParams::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(QaoaParams::new(vec![f64::NAN], vec![1.0]).is_err());
        let p = QaoaParams::new(vec![7.0, -1.0], vec![4.0, 0.5]).unwrap();
        let r = p.reduced();
        assert!((r.gammas()[0] - (7.0 - 2.0 * PI)).abs() < 1e-12);
        assert!((r.gammas()[1] - (2.0 * PI - 1.0)).abs() < 1e-12);
        assert!((r.betas()[0] - (4.0 - PI)).abs() < 1e-12);
        let g = Graph::cycle(5);
        assert!((qaoa_energy(&g, &p).unwrap() - qaoa_energy(&g, &r).unwrap()).abs() < 1e-9);
        assert_eq!(QaoaParams::from_slice(&p.to_vec()).unwrap(), p);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<QaoaParams>(&json).unwrap(), p);
        assert!(serde_json::from_str::<QaoaParams>(r#"{"gammas":[1],"betas":[]}"#).is_err());
    }
}
