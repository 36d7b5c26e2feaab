//! Undirected simple graphs, the common input of every other module.

mod generate;
mod wl;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{Error, Result};

pub use generate::{
    generate_random, generate_regular, generate_watts_strogatz, DEFAULT_GENERATION_RETRIES,
};
pub use wl::{default_fingerprint_iterations, fingerprint, stable_digest, wl_fingerprint, wl_labels, Fingerprint};

/// Unweighted, undirected simple graph on nodes `0..n`.
///
/// Edges are kept canonical (`u < v`, sorted lexicographically), so two graphs
/// with the same edge set compare equal regardless of construction order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    meta: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    meta: Map<String, Value>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;

    fn try_from(raw: GraphJson) -> Result<Self> {
        let edges = raw.edges.into_iter().map(|[u, v]| (u, v)).collect();
        Ok(Graph::new(raw.n, edges)?.with_meta(raw.meta))
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson {
            n: g.n,
            edges: g.edges.into_iter().map(|(u, v)| [u, v]).collect(),
            meta: g.meta,
        }
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges (in either
    /// orientation) and endpoints outside `0..n`.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut canonical = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) has an endpoint >= n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &canonical {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: canonical,
            adjacency,
            meta: Map::new(),
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Graph::new(n, edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 nodes");
        let edges = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Graph::new(n, edges).expect("cycle is simple")
    }

    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|v| (v - 1, v)).collect();
        Graph::new(n, edges).expect("path is simple")
    }

    pub fn star(leaves: usize) -> Self {
        let edges = (1..=leaves).map(|v| (0, v)).collect();
        Graph::new(leaves + 1, edges).expect("star is simple")
    }

    pub fn with_meta(mut self, meta: Map<String, Value>) -> Self {
        self.meta = meta;
        self
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    pub fn meta(&self) -> &Map<String, Value> {
        &self.meta
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Returns a copy with node `v` renamed to `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "permutation of length {} for {} nodes",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Ok(Graph::new(self.n, edges)?.with_meta(self.meta.clone()))
    }

    /// Node sets of the connected components, each sorted, ordered by their
    /// smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.components().len() == 1
    }

    /// BFS distances from `source`; unreachable nodes get `usize::MAX`.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Largest finite eccentricity over all nodes (per-component diameter).
    pub fn diameter(&self) -> usize {
        (0..self.n)
            .flat_map(|s| self.bfs_distances(s))
            .filter(|&d| d != usize::MAX)
            .max()
            .unwrap_or(0)
    }

    /// Graph whose nodes are the edges of `self` (in canonical edge order),
    /// adjacent when the edges share an endpoint.
    pub fn line_graph(&self) -> Result<Graph> {
        if self.edges.is_empty() {
            return Err(Error::InvalidGraph("line graph of an edgeless graph".into()));
        }
        let mut incident = vec![Vec::new(); self.n];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            incident[u].push(i);
            incident[v].push(i);
        }
        let mut edges = Vec::new();
        for list in &incident {
            for (a, &i) in list.iter().enumerate() {
                for &j in &list[a + 1..] {
                    edges.push((i, j));
                }
            }
        }
        // Two distinct simple edges share at most one endpoint, so no
        // duplicates arise here.
        Graph::new(self.edges.len(), edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Fraction of nodes with even degree.
pub fn parity(g: &Graph) -> Result<f64> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(even_degree_count(g) as f64 / g.node_count() as f64)
}

pub fn even_degree_count(g: &Graph) -> usize {
    g.degrees().iter().filter(|&&d| d % 2 == 0).count()
}

/// Number of nodes that must have even degree.
///
/// Only targets where the odd-degree count `n - n_even` is even can exist
/// (handshake lemma).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityTarget {
    n: usize,
    n_even: usize,
}

impl ParityTarget {
    pub fn new(n: usize, n_even: usize) -> Result<Self> {
        if n == 0 || n_even > n || (n - n_even) % 2 != 0 {
            return Err(Error::InvalidParity {
                n,
                even_fraction: if n == 0 { 0.0 } else { n_even as f64 / n as f64 },
            });
        }
        Ok(ParityTarget { n, n_even })
    }

    /// Target from a fraction; `n * even_fraction` must be an integer.
    pub fn from_fraction(n: usize, even_fraction: f64) -> Result<Self> {
        let scaled = n as f64 * even_fraction;
        let rounded = scaled.round();
        if !(0.0..=1.0).contains(&even_fraction) || (scaled - rounded).abs() > 1e-9 {
            return Err(Error::InvalidParity { n, even_fraction });
        }
        ParityTarget::new(n, rounded as usize).map_err(|_| Error::InvalidParity { n, even_fraction })
    }

    /// Every achievable parity on `n` nodes, ascending.
    pub fn all(n: usize) -> Vec<ParityTarget> {
        (n % 2..=n)
            .step_by(2)
            .map(|n_even| ParityTarget { n, n_even })
            .collect()
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn n_even(&self) -> usize {
        self.n_even
    }

    pub fn even_fraction(&self) -> f64 {
        self.n_even as f64 / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_examples() {
        assert_eq!(parity(&Graph::cycle(6)).unwrap(), 1.0);
        assert_eq!(parity(&Graph::complete(4)).unwrap(), 0.0);
        assert!((parity(&Graph::path(3)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(parity(&Graph::new(0, vec![]).unwrap()), Err(Error::EmptyGraph)));
    }

    #[test]
    fn parity_target_validation() {
        assert!(ParityTarget::from_fraction(5, 0.99).is_err());
        // 5 nodes, 4 even: one odd node is impossible.
        assert!(ParityTarget::from_fraction(5, 0.8).is_err());
        assert_eq!(ParityTarget::from_fraction(40, 0.05).unwrap().n_even(), 2);
        assert_eq!(ParityTarget::all(40).len(), 21);
        assert_eq!(ParityTarget::all(12).len(), 7);
        assert_eq!(ParityTarget::all(5).len(), 3);
    }

    #[test]
    fn line_graph_examples() {
        let l = Graph::path(3).line_graph().unwrap();
        assert_eq!((l.node_count(), l.edge_count()), (2, 1));
        let tri = Graph::cycle(3);
        assert_eq!(tri.line_graph().unwrap(), tri);
        assert_eq!(Graph::star(3).line_graph().unwrap(), tri);
        assert!(Graph::new(3, vec![]).unwrap().line_graph().is_err());
    }

    #[test]
    fn line_graph_degrees() {
        let g = Graph::new(6, vec![(0, 1), (1, 2), (2, 3), (3, 0), (1, 4), (4, 5), (2, 5)]).unwrap();
        let l = g.line_graph().unwrap();
        assert_eq!(l.node_count(), g.edge_count());
        for (i, &(u, v)) in g.edges().iter().enumerate() {
            assert_eq!(l.degree(i), g.degree(u) + g.degree(v) - 2);
        }
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let mut k4 = Graph::complete(4);
        k4.set_meta("class", "regular");
        let text = k4.to_json();
        assert_eq!(
            text,
            r#"{"n":4,"edges":[[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]],"meta":{"class":"regular"}}"#
        );
        assert_eq!(Graph::from_json(&text).unwrap(), k4);

        assert!(Graph::from_json(r#"{"n":3,"edges":[[0,1],[1,0]]}"#).is_err());
        assert!(Graph::from_json(r#"{"n":3,"edges":[[0,1],[0,1]]}"#).is_err());
        assert!(Graph::from_json(r#"{"n":3,"edges":[[0,3]]}"#).is_err());
        assert!(Graph::from_json(r#"{"n":3,"edges":[[1,1]]}"#).is_err());
    }

    #[test]
    fn components_and_diameter() {
        let two_triangles =
            Graph::new(6, vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert_eq!(two_triangles.components().len(), 2);
        assert!(!two_triangles.is_connected());
        assert_eq!(Graph::cycle(6).diameter(), 3);
        assert_eq!(Graph::path(5).diameter(), 4);
    }
}
