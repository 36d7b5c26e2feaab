//! Seeded random graph generators. All generators return connected graphs and
//! retry a bounded number of times before giving up.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{even_degree_count, Graph, ParityTarget};
use crate::{seed, Error, Result};

pub const DEFAULT_GENERATION_RETRIES: usize = 1000;

/// Mutable adjacency used while a graph is being built.
struct Builder {
    n: usize,
    adj: Vec<bool>,
    deg: Vec<usize>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder {
            n,
            adj: vec![false; n * n],
            deg: vec![0; n],
        }
    }

    fn has(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }

    fn set(&mut self, u: usize, v: usize, on: bool) {
        debug_assert_ne!(u, v);
        if self.has(u, v) == on {
            return;
        }
        self.adj[u * self.n + v] = on;
        self.adj[v * self.n + u] = on;
        if on {
            self.deg[u] += 1;
            self.deg[v] += 1;
        } else {
            self.deg[u] -= 1;
            self.deg[v] -= 1;
        }
    }

    fn odd_count(&self) -> usize {
        self.deg.iter().filter(|&&d| d % 2 == 1).count()
    }

    fn finish(&self) -> Graph {
        let mut edges = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.has(u, v) {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(self.n, edges).expect("builder only holds simple edges")
    }
}

/// Random connected graph with degrees capped at `max_degree` and exactly
/// `target.n_even()` even-degree nodes.
///
/// A random spanning tree under the cap is densified with random edges, then
/// parity is repaired by toggling edges between two odd nodes (too many odd
/// nodes) or two even nodes (too few). Attempts that get stuck or end up
/// disconnected are discarded.
pub fn generate_random(
    n: usize,
    max_degree: usize,
    target: ParityTarget,
    seed: u64,
) -> Result<Graph> {
    generate_random_with_retries(n, max_degree, target, seed, DEFAULT_GENERATION_RETRIES)
}

pub fn generate_random_with_retries(
    n: usize,
    max_degree: usize,
    target: ParityTarget,
    seed: u64,
    retries: usize,
) -> Result<Graph> {
    if n < 4 || max_degree < 2 {
        return Err(Error::Infeasible(format!(
            "random generation needs n >= 4 and max_degree >= 2 (got n={n}, max_degree={max_degree})"
        )));
    }
    if target.nodes() != n {
        return Err(Error::InvalidParity {
            n,
            even_fraction: target.even_fraction(),
        });
    }
    let mut rng = seed::rng(seed);
    let want_odd = n - target.n_even();
    for _ in 0..retries {
        if let Some(b) = random_attempt(n, max_degree, want_odd, &mut rng) {
            let mut g = b.finish();
            if g.is_connected() && even_degree_count(&g) == target.n_even() {
                g.set_meta("class", "random");
                g.set_meta("seed", seed);
                g.set_meta("n_even", target.n_even());
                g.set_meta("max_degree", max_degree);
                return Ok(g);
            }
        }
    }
    Err(Error::Unreachable {
        attempts: retries,
        reason: format!(
            "no connected graph with n={n}, max_degree={max_degree}, n_even={}",
            target.n_even()
        ),
    })
}

fn random_attempt(
    n: usize,
    cap: usize,
    want_odd: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Builder> {
    let mut b = Builder::new(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let v = order[i];
        let open: Vec<usize> = order[..i].iter().copied().filter(|&u| b.deg[u] < cap).collect();
        let &u = open.choose(rng)?;
        b.set(u, v, true);
    }

    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && !b.has(u, v) && b.deg[u] < cap && b.deg[v] < cap {
            b.set(u, v, true);
        }
    }

    for _ in 0..50 * n {
        let odd = b.odd_count();
        if odd == want_odd {
            return Some(b);
        }
        let pick_odd = odd > want_odd;
        let pool: Vec<usize> = (0..n).filter(|&v| (b.deg[v] % 2 == 1) == pick_odd).collect();
        if pool.len() < 2 {
            return None;
        }
        let u = *pool.choose(rng)?;
        let v = *pool.choose(rng)?;
        if u == v {
            continue;
        }
        if b.has(u, v) {
            if b.deg[u] > 1 && b.deg[v] > 1 {
                b.set(u, v, false);
            }
        } else if b.deg[u] < cap && b.deg[v] < cap {
            b.set(u, v, true);
        }
    }
    None
}

/// Uniform-ish random connected `d`-regular graph via stub pairing with
/// partial restarts.
pub fn generate_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n || (n * d) % 2 != 0 {
        return Err(Error::Infeasible(format!(
            "no {d}-regular graph on {n} nodes (need d < n and n*d even)"
        )));
    }
    let mut rng = seed::rng(seed);
    for _ in 0..DEFAULT_GENERATION_RETRIES {
        if let Some(b) = regular_attempt(n, d, &mut rng) {
            let mut g = b.finish();
            if g.is_connected() {
                g.set_meta("class", "regular");
                g.set_meta("seed", seed);
                g.set_meta("degree", d);
                return Ok(g);
            }
        }
    }
    Err(Error::Unreachable {
        attempts: DEFAULT_GENERATION_RETRIES,
        reason: format!("no connected {d}-regular graph on {n} nodes"),
    })
}

fn regular_attempt(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Builder> {
    let mut b = Builder::new(n);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut left = Vec::new();
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u != v && !b.has(u, v) {
                b.set(u, v, true);
            } else {
                left.push(u);
                left.push(v);
            }
        }
        if !left.is_empty() {
            let suitable = left
                .iter()
                .enumerate()
                .any(|(i, &u)| left[i + 1..].iter().any(|&v| u != v && !b.has(u, v)));
            if !suitable {
                return None;
            }
        }
        stubs = left;
    }
    Some(b)
}

/// Ring lattice with `k / 2` neighbors per side, each lattice edge rewired
/// with probability `beta_rewire` to a uniformly chosen new endpoint. Rewiring
/// never creates self-loops or duplicates, so the edge count stays `n*k/2`.
pub fn generate_watts_strogatz(n: usize, k: usize, beta_rewire: f64, seed: u64) -> Result<Graph> {
    if k % 2 != 0 || k >= n || k == 0 {
        return Err(Error::Infeasible(format!(
            "Watts-Strogatz needs even 0 < k < n (got n={n}, k={k})"
        )));
    }
    if !(0.0..=1.0).contains(&beta_rewire) {
        return Err(Error::InvalidInput(format!(
            "rewiring probability {beta_rewire} outside [0, 1]"
        )));
    }
    let mut rng = seed::rng(seed);
    for _ in 0..DEFAULT_GENERATION_RETRIES {
        let mut b = Builder::new(n);
        for u in 0..n {
            for j in 1..=k / 2 {
                b.set(u, (u + j) % n, true);
            }
        }
        for j in 1..=k / 2 {
            for u in 0..n {
                let v = (u + j) % n;
                if !b.has(u, v) || rng.gen::<f64>() >= beta_rewire || b.deg[u] >= n - 1 {
                    continue;
                }
                let mut w = rng.gen_range(0..n);
                while w == u || b.has(u, w) {
                    w = rng.gen_range(0..n);
                }
                b.set(u, v, false);
                b.set(u, w, true);
            }
        }
        let mut g = b.finish();
        if g.is_connected() {
            g.set_meta("class", "ws");
            g.set_meta("seed", seed);
            g.set_meta("k", k);
            g.set_meta("beta", json!(beta_rewire));
            return Ok(g);
        }
    }
    Err(Error::Unreachable {
        attempts: DEFAULT_GENERATION_RETRIES,
        reason: format!("no connected Watts-Strogatz graph for n={n}, k={k}, beta={beta_rewire}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parity;

    #[test]
    fn every_parity_on_forty_nodes() {
        for (i, target) in ParityTarget::all(40).into_iter().enumerate() {
            let g = generate_random(40, 4, target, 100 + i as u64).unwrap();
            assert!(g.is_connected());
            assert!(g.max_degree() <= 4);
            assert_eq!(parity(&g).unwrap(), target.even_fraction());
        }
    }

    #[test]
    fn all_even_on_eight_nodes() {
        let target = ParityTarget::from_fraction(8, 1.0).unwrap();
        for s in 0..20 {
            let g = generate_random(8, 4, target, s).unwrap();
            assert_eq!(parity(&g).unwrap(), 1.0);
            assert!(g.degrees().iter().all(|d| *d == 2 || *d == 4));
        }
    }

    #[test]
    fn random_is_seed_deterministic() {
        let t = ParityTarget::new(14, 6).unwrap();
        assert_eq!(
            generate_random(14, 4, t, 9).unwrap(),
            generate_random(14, 4, t, 9).unwrap()
        );
        assert_ne!(
            generate_random(14, 4, t, 9).unwrap().edges(),
            generate_random(14, 4, t, 10).unwrap().edges()
        );
    }

    #[test]
    fn random_preconditions() {
        let t = ParityTarget::new(3, 1).unwrap();
        assert!(matches!(generate_random(3, 4, t, 0), Err(Error::Infeasible(_))));
        let t = ParityTarget::new(6, 2).unwrap();
        assert!(generate_random(6, 1, t, 0).is_err());
        assert!(generate_random(8, 4, t, 0).is_err());
    }

    #[test]
    fn unreachable_reports_attempts() {
        // A connected graph with max degree 2 on 6 nodes is a path or a
        // cycle, which has 0 or 2 odd nodes; 6 odd nodes cannot happen.
        let t = ParityTarget::new(6, 0).unwrap();
        match generate_random_with_retries(6, 2, t, 1, 25) {
            Err(Error::Unreachable { attempts, .. }) => assert_eq!(attempts, 25),
            other => panic!("expected unreachable, got {other:?}"),
        }
    }

    #[test]
    fn regular_examples() {
        assert_eq!(generate_regular(4, 3, 5).unwrap().edges(), Graph::complete(4).edges());
        let g3 = generate_regular(20, 3, 1).unwrap();
        assert!(g3.degrees().iter().all(|&d| d == 3));
        assert_eq!(parity(&g3).unwrap(), 0.0);
        let g4 = generate_regular(20, 4, 1).unwrap();
        assert_eq!(parity(&g4).unwrap(), 1.0);
        assert!(matches!(generate_regular(5, 3, 0), Err(Error::Infeasible(_))));
        assert!(matches!(generate_regular(4, 4, 0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn watts_strogatz_examples() {
        let ring = generate_watts_strogatz(20, 4, 0.0, 3).unwrap();
        assert_eq!(parity(&ring).unwrap(), 1.0);
        assert_eq!(ring.edge_count(), 40);
        assert_eq!(generate_watts_strogatz(20, 4, 0.3, 3).unwrap().edge_count(), 40);
        for s in 0..100 {
            let g = generate_watts_strogatz(20, 4, 1.0, s).unwrap();
            assert!(g.is_connected());
            assert_eq!(g.edge_count(), 40);
        }
        assert!(generate_watts_strogatz(20, 3, 0.1, 0).is_err());
        assert!(generate_watts_strogatz(4, 4, 0.1, 0).is_err());
    }
}
