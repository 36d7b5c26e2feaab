//! Random-walk weighted characteristic functions of node features, pooled
//! over nodes.

use serde::{Deserialize, Serialize};

use crate::{Error, Graph, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatherConfig {
    /// Largest random-walk scale `r`.
    pub order: usize,
    pub eval_points: usize,
    pub theta_max: f64,
}

impl Default for FeatherConfig {
    fn default() -> Self {
        FeatherConfig {
            order: 5,
            eval_points: 25,
            theta_max: 2.5,
        }
    }
}

/// Number of node features: log-degree and clustering coefficient.
pub const FEATURE_COUNT: usize = 2;

impl FeatherConfig {
    pub fn dims(&self) -> usize {
        2 * FEATURE_COUNT * self.order * self.eval_points
    }

    /// Uniform grid on `(0, theta_max]`.
    pub fn thetas(&self) -> Vec<f64> {
        (1..=self.eval_points)
            .map(|j| self.theta_max * j as f64 / self.eval_points as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.order == 0 || self.eval_points == 0 || !(self.theta_max > 0.0) {
            return Err(Error::InvalidInput(format!("invalid FEATHER settings {self:?}")));
        }
        Ok(())
    }
}

pub fn clustering_coefficient(g: &Graph, v: usize) -> f64 {
    let nb = g.neighbors(v);
    let d = nb.len();
    if d < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if g.has_edge(a, b) {
                links += 1;
            }
        }
    }
    2.0 * links as f64 / (d * (d - 1)) as f64
}

/// Row-stochastic `D^{-1} A` as adjacency lists with weights; an isolated
/// node keeps a self-loop of weight 1.
pub fn transition_rows(g: &Graph) -> Vec<Vec<(usize, f64)>> {
    (0..g.node_count())
        .map(|v| {
            let nb = g.neighbors(v);
            if nb.is_empty() {
                vec![(v, 1.0)]
            } else {
                let w = 1.0 / nb.len() as f64;
                nb.iter().map(|&u| (u, w)).collect()
            }
        })
        .collect()
}

fn node_features(g: &Graph) -> [Vec<f64>; FEATURE_COUNT] {
    let n = g.node_count();
    [
        (0..n).map(|v| (g.degree(v) as f64).ln_1p()).collect(),
        (0..n).map(|v| clustering_coefficient(g, v)).collect(),
    ]
}

/// Per-node characteristic functions, laid out as
/// `[feature][scale][re | im][theta]` per node.
pub fn node_functions(g: &Graph, config: &FeatherConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let rows = transition_rows(g);
    let thetas = config.thetas();
    let t = thetas.len();
    let mut out = vec![Vec::with_capacity(config.dims()); n];
    let step = |xs: &[f64]| -> Vec<f64> {
        rows.iter()
            .map(|row| row.iter().map(|&(u, w)| w * xs[u]).sum())
            .collect()
    };
    for feature in node_features(g) {
        // Columns per theta: cos and sin of theta * x_u.
        let mut re: Vec<Vec<f64>> = thetas
            .iter()
            .map(|&th| feature.iter().map(|x| (th * x).cos()).collect())
            .collect();
        let mut im: Vec<Vec<f64>> = thetas
            .iter()
            .map(|&th| feature.iter().map(|x| (th * x).sin()).collect())
            .collect();
        for _ in 0..config.order {
            re = re.iter().map(|c| step(c)).collect();
            im = im.iter().map(|c| step(c)).collect();
            for (v, row) in out.iter_mut().enumerate() {
                row.extend((0..t).map(|j| re[j][v]));
                row.extend((0..t).map(|j| im[j][v]));
            }
        }
    }
    Ok(out)
}

/// Mean of [`node_functions`] over nodes.
pub fn embed_feather(g: &Graph, config: &FeatherConfig) -> Result<Vec<f64>> {
    let per_node = node_functions(g, config)?;
    let mut pooled = vec![0.0; config.dims()];
    for row in &per_node {
        for (p, x) in pooled.iter_mut().zip(row) {
            *p += x;
        }
    }
    let n = per_node.len() as f64;
    pooled.iter_mut().for_each(|p| *p /= n);
    Ok(pooled)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_and_grid() {
        let c = FeatherConfig::default();
        assert_eq!(c.dims(), 500);
        let th = c.thetas();
        assert!((th[0] - 0.1).abs() < 1e-15 && (th[24] - 2.5).abs() < 1e-15);
        assert_eq!(embed_feather(&Graph::cycle(5), &c).unwrap().len(), 500);
    }

    #[test]
    fn transition_rows_are_stochastic() {
        let g = Graph::new(5, vec![(0, 1), (1, 2), (1, 3)]).unwrap();
        for row in transition_rows(&g) {
            let s: f64 = row.iter().map(|x| x.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_theta_is_near_one() {
        let g = Graph::new(6, vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)]).unwrap();
        let check = |c: FeatherConfig, re_tol: f64, im_tol: f64| {
            for row in node_functions(&g, &c).unwrap() {
                for block in 0..FEATURE_COUNT * c.order {
                    let base = block * 2 * c.eval_points;
                    assert!((row[base] - 1.0).abs() < re_tol);
                    assert!(row[base + c.eval_points].abs() < im_tol);
                }
            }
        };
        // At the first default grid point sin(theta x) is still about
        // theta * log(1 + deg), so only the real part is within 0.1.
        check(FeatherConfig::default(), 0.1, 0.15);
        let fine = FeatherConfig {
            theta_max: 0.05,
            ..FeatherConfig::default()
        };
        check(fine, 1e-4, 0.01);
    }

    #[test]
    fn cycle_nodes_are_identical() {
        let c = FeatherConfig::default();
        let rows = node_functions(&Graph::cycle(6), &c).unwrap();
        assert!(rows.iter().all(|r| r == &rows[0]));
        let pooled = embed_feather(&Graph::cycle(6), &c).unwrap();
        assert!(pooled.iter().zip(&rows[0]).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn clustering_examples() {
        let k4 = Graph::complete(4);
        assert_eq!(clustering_coefficient(&k4, 0), 1.0);
        assert_eq!(clustering_coefficient(&Graph::star(3), 0), 0.0);
        let g = Graph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2)]).unwrap();
        assert!((clustering_coefficient(&g, 0) - 1.0 / 3.0).abs() < 1e-15);
    }
}
