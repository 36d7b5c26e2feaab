//! Weisfeiler-Lehman (1-WL) color refinement and graph fingerprints.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Graph;

/// First 64 bits of SHA-256 over the little-endian encoding of `words`.
///
/// Used wherever a hash must be identical across runs and platforms
/// (vocabulary tokens, fingerprints, corpus digests).
pub fn stable_digest(words: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    for w in words {
        hasher.update(w.to_le_bytes());
    }
    let out = hasher.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 output has 32 bytes"))
}

/// WL labels per refinement round: `labels[i][v]` for `i in 0..=iterations`.
///
/// Round 0 is the node degree; round `i + 1` hashes the round index, the
/// node's own label and the sorted multiset of its neighbors' labels.
pub fn wl_labels(g: &Graph, iterations: usize) -> Vec<Vec<u64>> {
    let n = g.node_count();
    let mut rounds = Vec::with_capacity(iterations + 1);
    rounds.push(
        (0..n)
            .map(|v| stable_digest(&[0, g.degree(v) as u64]))
            .collect::<Vec<_>>(),
    );
    let mut words = Vec::new();
    for i in 0..iterations {
        let prev: &Vec<u64> = &rounds[i];
        let next = (0..n)
            .map(|v| {
                let mut neigh: Vec<u64> = g.neighbors(v).iter().map(|&u| prev[u]).collect();
                neigh.sort_unstable();
                words.clear();
                words.push(i as u64 + 1);
                words.push(prev[v]);
                words.extend_from_slice(&neigh);
                stable_digest(&words)
            })
            .collect();
        rounds.push(next);
    }
    rounds
}

/// Isomorphism-invariant 64-bit digest of a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Fingerprint(pub u64);

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl From<Fingerprint> for String {
    fn from(fp: Fingerprint) -> String {
        fp.to_string()
    }
}

impl TryFrom<String> for Fingerprint {
    type Error = std::num::ParseIntError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        u64::from_str_radix(&s, 16).map(Fingerprint)
    }
}

/// 1-WL fingerprint after `iterations` rounds.
///
/// Every connected component is summarized by the sorted multiset of all its
/// node labels across rounds; the graph digest combines the sorted component
/// digests. Isomorphic graphs always collide; WL-equivalent non-isomorphic
/// graphs (for example two 3-regular graphs of equal size) also collide.
pub fn wl_fingerprint(g: &Graph, iterations: usize) -> Fingerprint {
    let iterations = iterations.max(1);
    let labels = wl_labels(g, iterations);
    let mut component_digests: Vec<u64> = g
        .components()
        .iter()
        .map(|comp| {
            let mut bag: Vec<u64> = labels
                .iter()
                .flat_map(|round| comp.iter().map(move |&v| round[v]))
                .collect();
            bag.sort_unstable();
            bag.insert(0, comp.len() as u64);
            stable_digest(&bag)
        })
        .collect();
    component_digests.sort_unstable();
    let mut words = vec![g.node_count() as u64, g.edge_count() as u64, iterations as u64];
    words.extend(component_digests);
    Fingerprint(stable_digest(&words))
}

pub fn default_fingerprint_iterations(g: &Graph) -> usize {
    g.diameter().max(3)
}

/// Fingerprint with `max(3, diameter)` refinement rounds.
pub fn fingerprint(g: &Graph) -> Fingerprint {
    wl_fingerprint(g, default_fingerprint_iterations(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relabeling_preserves_fingerprint() {
        let g = Graph::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let h = g.permuted(&[4, 2, 0, 1, 3]).unwrap();
        assert_eq!(wl_fingerprint(&g, 3), wl_fingerprint(&h, 3));
    }

    #[test]
    fn distinguishes_k4_from_c4() {
        assert_ne!(
            wl_fingerprint(&Graph::complete(4), 3),
            wl_fingerprint(&Graph::cycle(4), 3)
        );
    }

    #[test]
    fn distinguishes_c6_from_two_triangles() {
        // Plain 1-WL colors coincide here (both 2-regular); the component
        // aggregation separates them.
        let two_triangles =
            Graph::new(6, vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let c6 = Graph::cycle(6);
        let a = wl_labels(&c6, 2);
        let b = wl_labels(&two_triangles, 2);
        assert_eq!(a, b);
        for it in 1..=4 {
            assert_ne!(wl_fingerprint(&c6, it), wl_fingerprint(&two_triangles, it));
        }
    }

    #[test]
    fn digest_is_stable() {
        // Frozen value: any change here silently invalidates stored corpora.
        assert_eq!(stable_digest(&[]), 0x141cfc9842c4b0e3);
        assert_eq!(
            Fingerprint::try_from(Fingerprint(0xabc).to_string()).unwrap(),
            Fingerprint(0xabc)
        );
    }
}
