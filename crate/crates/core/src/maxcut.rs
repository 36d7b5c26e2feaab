//! Exact MaxCut.
//!
//! Assignments use bit `i` = side of node `i`, with node 0 always on side 0.
//! Among optimal cuts the lexicographically smallest assignment string
//! (`z_0 z_1 ... z_{n-1}`) is returned, so both solvers agree bit for bit.

use serde::{Deserialize, Serialize};

use crate::{Error, Graph, Result};

/// Default node cap for [`exact_maxcut`].
pub const DEFAULT_ORACLE_CAP: usize = 24;
/// Largest `n` solved by plain enumeration; branch-and-bound above.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSolution {
    pub value: usize,
    pub assignment: Vec<bool>,
}

impl CutSolution {
    pub fn assignment_string(&self) -> String {
        self.assignment.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Number of edges whose endpoints lie on different sides.
pub fn cut_value(g: &Graph, assignment: &[bool]) -> Result<usize> {
    if assignment.len() != g.node_count() {
        return Err(Error::InvalidInput(format!(
            "assignment of length {} for {} nodes",
            assignment.len(),
            g.node_count()
        )));
    }
    Ok(g.edges()
        .iter()
        .filter(|&&(u, v)| assignment[u] != assignment[v])
        .count())
}

/// Cut value of a basis index (bit `i` of `z` is node `i`).
pub fn cut_value_bits(g: &Graph, z: u64) -> usize {
    g.edges()
        .iter()
        .filter(|&&(u, v)| ((z >> u) ^ (z >> v)) & 1 == 1)
        .count()
}

pub fn exact_maxcut(g: &Graph) -> Result<CutSolution> {
    exact_maxcut_with_cap(g, DEFAULT_ORACLE_CAP)
}

pub fn exact_maxcut_with_cap(g: &Graph, cap: usize) -> Result<CutSolution> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if n <= ENUMERATION_LIMIT {
        Ok(exhaustive_maxcut(g))
    } else {
        Ok(branch_and_bound_maxcut(g))
    }
}

/// Exhaustive search over the `2^(n-1)` assignments with node 0 fixed,
/// walked in Gray-code order with O(degree) updates per step.
pub fn exhaustive_maxcut(g: &Graph) -> CutSolution {
    let n = g.node_count();
    assert!((1..=40).contains(&n), "exhaustive search supports 1..=40 nodes");
    let mut side = vec![false; n];
    let mut value: i64 = 0;
    // Lexicographic rank of the assignment string: node 0 is the most
    // significant bit.
    let mut key: u64 = 0;
    let mut best = (0i64, 0u64);
    let free = n - 1;
    for step in 1u64..(1u64 << free) {
        let flip = 1 + step.trailing_zeros() as usize;
        for &w in g.neighbors(flip) {
            value += if side[w] == side[flip] { 1 } else { -1 };
        }
        side[flip] = !side[flip];
        key ^= 1u64 << (n - 1 - flip);
        if value > best.0 || (value == best.0 && key < best.1) {
            best = (value, key);
        }
    }
    let assignment = (0..n).map(|i| (best.1 >> (n - 1 - i)) & 1 == 1).collect();
    CutSolution {
        value: best.0 as usize,
        assignment,
    }
}

/// Depth-first branch-and-bound assigning nodes in index order (side 0
/// first), seeded with a greedy + local-search incumbent value.
///
/// The bound adds, for every unassigned node, the larger of its edge counts
/// to the two sides, plus all edges among unassigned nodes.
pub fn branch_and_bound_maxcut(g: &Graph) -> CutSolution {
    let n = g.node_count();
    assert!(n >= 1, "empty graph");
    if n == 1 {
        return CutSolution {
            value: 0,
            assignment: vec![false],
        };
    }
    let mut search = Search {
        g,
        side: vec![false; n],
        to_side: vec![[0usize; 2]; n],
        // Strictly below the greedy value, so the lexicographically first
        // optimal leaf is never pruned.
        threshold: greedy_cut(g) as i64 - 1,
        best: None,
    };
    // Node 0 sits on side 0.
    for &w in g.neighbors(0) {
        search.to_side[w][0] += 1;
    }
    let unassigned_edges = g.edges().iter().filter(|&&(u, _)| u != 0).count();
    search.descend(1, 0, unassigned_edges);
    let assignment = search.best.expect("threshold below optimum guarantees a leaf");
    CutSolution {
        value: search.threshold as usize,
        assignment,
    }
}

struct Search<'a> {
    g: &'a Graph,
    side: Vec<bool>,
    to_side: Vec<[usize; 2]>,
    threshold: i64,
    best: Option<Vec<bool>>,
}

impl Search<'_> {
    fn descend(&mut self, next: usize, cut: usize, unassigned_edges: usize) {
        let n = self.g.node_count();
        if next == n {
            if cut as i64 > self.threshold {
                self.threshold = cut as i64;
                self.best = Some(self.side.clone());
            }
            return;
        }
        let bound = cut
            + unassigned_edges
            + (next..n)
                .map(|v| self.to_side[v][0].max(self.to_side[v][1]))
                .sum::<usize>();
        if bound as i64 <= self.threshold {
            return;
        }
        let later = self.g.neighbors(next).iter().filter(|&&w| w > next).count();
        for s in [false, true] {
            let gained = self.to_side[next][usize::from(!s)];
            self.side[next] = s;
            for &w in self.g.neighbors(next) {
                if w > next {
                    self.to_side[w][usize::from(s)] += 1;
                }
            }
            self.descend(next + 1, cut + gained, unassigned_edges - later);
            for &w in self.g.neighbors(next) {
                if w > next {
                    self.to_side[w][usize::from(s)] -= 1;
                }
            }
        }
        self.side[next] = false;
    }
}

/// Greedy placement followed by single-flip hill climbing.
fn greedy_cut(g: &Graph) -> usize {
    let n = g.node_count();
    let mut side = vec![false; n];
    for v in 1..n {
        let (mut zero, mut one) = (0, 0);
        for &w in g.neighbors(v) {
            if w < v {
                if side[w] {
                    one += 1
                } else {
                    zero += 1
                }
            }
        }
        side[v] = zero > one;
    }
    loop {
        let mut improved = false;
        for v in 0..n {
            let same = g.neighbors(v).iter().filter(|&&w| side[w] == side[v]).count();
            if 2 * same > g.degree(v) {
                side[v] = !side[v];
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    cut_value(g, &side).expect("length matches")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn cut_value_examples() {
        let k3 = Graph::complete(3);
        assert_eq!(cut_value(&k3, &bits("001")).unwrap(), 2);
        assert_eq!(cut_value(&k3, &bits("000")).unwrap(), 0);
        let g = Graph::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 3)]).unwrap();
        let z = bits("01101");
        let flipped: Vec<bool> = z.iter().map(|b| !b).collect();
        assert_eq!(cut_value(&g, &z).unwrap(), cut_value(&g, &flipped).unwrap());
        assert!(cut_value(&g, &bits("01")).is_err());
        assert_eq!(cut_value_bits(&k3, 0b100), 2);
    }

    #[test]
    fn exact_examples() {
        assert_eq!(exact_maxcut(&Graph::path(2)).unwrap().value, 1);
        assert_eq!(exact_maxcut(&Graph::cycle(5)).unwrap().value, 4);
        let k33 = Graph::new(
            6,
            (0..3).flat_map(|u| (3..6).map(move |v| (u, v))).collect(),
        )
        .unwrap();
        assert_eq!(exact_maxcut(&k33).unwrap().value, 9);
        let k4 = exact_maxcut(&Graph::complete(4)).unwrap();
        assert_eq!(k4.value, 4);
        // Lex-smallest optimal bipartition with node 0 on side 0.
        assert_eq!(k4.assignment_string(), "0011");
        assert_eq!(exact_maxcut(&Graph::new(1, vec![]).unwrap()).unwrap().value, 0);
    }

    #[test]
    fn k4_by_listing_bipartitions() {
        // Oracle: the 8 bipartitions with node 0 fixed, cut sizes by hand
        // formula |S| * (4 - |S|).
        let best = (0u32..8)
            .map(|free| {
                let ones = free.count_ones() as usize;
                ones * (4 - ones)
            })
            .max()
            .unwrap();
        assert_eq!(best, 4);
        assert_eq!(exact_maxcut(&Graph::complete(4)).unwrap().value, best);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Graph::path(30);
        assert!(matches!(
            exact_maxcut(&g),
            Err(Error::CapExceeded { n: 30, cap: 24 })
        ));
        assert_eq!(exact_maxcut_with_cap(&g, 30).unwrap().value, 29);
        assert!(matches!(
            exact_maxcut(&Graph::new(0, vec![]).unwrap()),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn branch_and_bound_handles_small_cases() {
        for g in [Graph::complete(5), Graph::cycle(7), Graph::star(4), Graph::path(2)] {
            assert_eq!(branch_and_bound_maxcut(&g), exhaustive_maxcut(&g));
        }
        let empty = Graph::new(4, vec![]).unwrap();
        assert_eq!(branch_and_bound_maxcut(&empty), exhaustive_maxcut(&empty));
    }
}
