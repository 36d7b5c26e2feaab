use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Graph, Result};

/// Cap on the spectrum length.
pub const MAX_SPECTRUM: usize = 128;

/// Combinatorial Laplacian `L = D - A`.
pub fn laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut l = DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        l[(u, v)] = -1.0;
        l[(v, u)] = -1.0;
    }
    for v in 0..n {
        l[(v, v)] = g.degree(v) as f64;
    }
    l
}

/// All Laplacian eigenvalues, ascending.
pub fn laplacian_spectrum(g: &Graph) -> Vec<f64> {
    if g.node_count() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = SymmetricEigen::new(laplacian(g)).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// The `k` smallest Laplacian eigenvalues, zero-padded when `n < k`.
pub fn embed_sf(g: &Graph, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidInput("spectrum length k must be at least 1".into()));
    }
    let mut values = laplacian_spectrum(g);
    values.resize(k, 0.0);
    Ok(values)
}

/// `min(largest training graph, MAX_SPECTRUM)`.
pub fn default_spectrum_len(training_nodes: usize) -> usize {
    training_nodes.clamp(1, MAX_SPECTRUM)
}
