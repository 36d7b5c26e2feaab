use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;

use qtransfer::donor::{
    parity_corpus, transfer_eval, Acceptor, BuildOptions, DonorDb, TransferOptions,
};
use qtransfer::embed::{
    distance, embed_feather, embed_sf, wl_corpus, EmbeddingMethod, EmbeddingVector, FeatherConfig,
};
use qtransfer::graph::{
    even_degree_count, generate_random, generate_regular, parity, wl_fingerprint, ParityTarget,
};
use qtransfer::maxcut::{branch_and_bound_maxcut, cut_value_bits, exact_maxcut, exhaustive_maxcut};
use qtransfer::noise::{NoiseModel, NoisySimulator};
use qtransfer::qaoa::{optimize, QaoaParams, QaoaSimulator, StateVector};
use qtransfer::Graph;

fn graph_strategy(min_n: usize, max_n: usize) -> impl Strategy<Value = Graph> {
    (min_n..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        prop::collection::vec(any::<bool>(), pairs.len()).prop_map(move |keep| {
            let edges = pairs
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(&e, _)| e)
                .collect();
            Graph::new(n, edges).unwrap()
        })
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn graph_and_permutation(min_n: usize, max_n: usize) -> impl Strategy<Value = (Graph, Vec<usize>)> {
    graph_strategy(min_n, max_n).prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), permutation(n))
    })
}

fn params_strategy(p: usize) -> impl Strategy<Value = QaoaParams> {
    (
        prop::collection::vec(-2.0 * PI..2.0 * PI, p),
        prop::collection::vec(-PI..PI, p),
    )
        .prop_map(|(g, b)| QaoaParams::new(g, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parity_is_consistent(g in graph_strategy(1, 10)) {
        let pi = parity(&g).unwrap();
        let n = g.node_count() as f64;
        prop_assert!((0.0..=1.0).contains(&pi));
        prop_assert!(((n * pi) - (n * pi).round()).abs() < 1e-9);
        let odd = g.node_count() - even_degree_count(&g);
        prop_assert_eq!(odd % 2, 0);
    }

    #[test]
    fn generators_are_seed_deterministic(n in 6usize..12, class in 0usize..4, seed in any::<u64>()) {
        let targets = ParityTarget::all(n);
        let t = targets[class % targets.len()];
        let a = generate_random(n, 4, t, seed).unwrap();
        let again = generate_random(n, 4, t, seed).unwrap();
        prop_assert_eq!(a.edges(), again.edges());
        prop_assert_eq!(even_degree_count(&a), t.n_even());
        prop_assert!(a.is_connected() && a.max_degree() <= 4);
        let r = generate_regular(2 * (n / 2), 3, seed).unwrap();
        let again = generate_regular(2 * (n / 2), 3, seed).unwrap();
        prop_assert_eq!(r.edges(), again.edges());
        prop_assert!(r.degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn wl_is_permutation_invariant((g, perm) in graph_and_permutation(1, 10)) {
        let h = g.permuted(&perm).unwrap();
        prop_assert_eq!(wl_fingerprint(&g, 3), wl_fingerprint(&h, 3));
        prop_assert_eq!(wl_corpus(&g, 2).unwrap(), wl_corpus(&h, 2).unwrap());
    }

    #[test]
    fn line_graph_shape(g in graph_strategy(2, 9)) {
        prop_assume!(g.edge_count() > 0);
        let lg = g.line_graph().unwrap();
        prop_assert_eq!(lg.node_count(), g.edge_count());
        for (i, &(u, v)) in g.edges().iter().enumerate() {
            prop_assert_eq!(lg.degree(i), g.degree(u) + g.degree(v) - 2);
        }
    }

    #[test]
    fn exact_cut_dominates_random_cuts(g in graph_strategy(2, 12), zs in prop::collection::vec(any::<u64>(), 1000)) {
        let best = exact_maxcut(&g).unwrap();
        let mask = (1u64 << g.node_count()) - 1;
        for z in zs {
            prop_assert!(cut_value_bits(&g, z & mask) <= best.value);
        }
        prop_assert!(!best.assignment[0]);
    }

    #[test]
    fn branch_and_bound_matches_enumeration(g in graph_strategy(2, 13)) {
        let a = exhaustive_maxcut(&g);
        let b = branch_and_bound_maxcut(&g);
        prop_assert_eq!(a.value, b.value);
    }

    #[test]
    fn adding_an_edge_moves_cstar_by_at_most_one(g in graph_strategy(3, 11), pick in any::<prop::sample::Index>()) {
        let n = g.node_count();
        let missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !g.has_edge(u, v))
            .collect();
        prop_assume!(!missing.is_empty());
        let mut edges = g.edges().to_vec();
        edges.push(missing[pick.index(missing.len())]);
        let before = exact_maxcut(&g).unwrap().value;
        let after = exact_maxcut(&Graph::new(n, edges).unwrap()).unwrap().value;
        prop_assert!(after == before || after == before + 1);
    }

    #[test]
    fn layers_preserve_norm(g in graph_strategy(1, 8), params in params_strategy(3)) {
        let sim = QaoaSimulator::new(&g).unwrap();
        let mut s = StateVector::uniform(g.node_count());
        for (&gamma, &beta) in params.gammas().iter().zip(params.betas()) {
            s.apply_phase(sim.cuts(), gamma);
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            s.apply_mixer(beta);
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn energy_has_angle_periods(g in graph_strategy(1, 8), params in params_strategy(2), k in 0usize..2) {
        let sim = QaoaSimulator::new(&g).unwrap();
        let e = sim.energy(&params);
        let mut gammas = params.gammas().to_vec();
        gammas[k] += 2.0 * PI;
        let shifted_gamma = QaoaParams::new(gammas, params.betas().to_vec()).unwrap();
        let mut betas = params.betas().to_vec();
        betas[k] += PI;
        let shifted_beta = QaoaParams::new(params.gammas().to_vec(), betas).unwrap();
        prop_assert!((sim.energy(&shifted_gamma) - e).abs() < 1e-9);
        prop_assert!((sim.energy(&shifted_beta) - e).abs() < 1e-9);
    }

    #[test]
    fn energy_is_bounded(g in graph_strategy(1, 8), params in params_strategy(2)) {
        let e = QaoaSimulator::new(&g).unwrap().energy(&params);
        let cstar = exact_maxcut(&g).unwrap().value as f64;
        prop_assert!(e >= -1e-12 && e <= cstar + 1e-9 && cstar <= g.edge_count() as f64);
    }

    #[test]
    fn optimize_never_loses_energy(g in graph_strategy(3, 7), params in params_strategy(1)) {
        let sim = QaoaSimulator::new(&g).unwrap();
        let out = optimize(&sim, &params, 40).unwrap();
        prop_assert!(out.record.energy >= sim.energy(&params));
        prop_assert!(out.record.evals <= 40);
    }

    #[test]
    fn spectral_and_feather_are_permutation_invariant((g, perm) in graph_and_permutation(1, 9)) {
        let h = g.permuted(&perm).unwrap();
        let (a, b) = (embed_sf(&g, 9).unwrap(), embed_sf(&h, 9).unwrap());
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
        let c = FeatherConfig::default();
        let (a, b) = (embed_feather(&g, &c).unwrap(), embed_feather(&h, &c).unwrap());
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
    }

    #[test]
    fn spectrum_is_sorted_with_one_zero_per_component(g in graph_strategy(1, 9)) {
        let s = embed_sf(&g, g.node_count()).unwrap();
        prop_assert!(s.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let zeros = s.iter().filter(|x| x.abs() < 1e-9).count();
        prop_assert_eq!(zeros, g.components().len());
    }

    #[test]
    fn noisy_energies_stay_in_range(g in graph_strategy(2, 6), params in params_strategy(2), seed in any::<u64>()) {
        let sim = NoisySimulator::new(&g).unwrap();
        let nm = NoiseModel::default().with_scale(20.0);
        let m = g.edge_count() as f64;
        for e in sim.trajectory_energies(&params, &nm, 10, seed).unwrap() {
            prop_assert!(e >= -1e-12 && e <= m + 1e-9);
        }
    }
}

/// Linear-scan reference for nearest/farthest queries.
fn scan(db: &DonorDb, v: &EmbeddingVector) -> Vec<(f64, u64)> {
    let mut d: Vec<(f64, u64)> = db
        .entries
        .iter()
        .map(|e| (distance(&e.embedding, v).unwrap(), e.graph_id))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d
}

fn small_db() -> &'static DonorDb {
    static DB: OnceLock<DonorDb> = OnceLock::new();
    DB.get_or_init(|| {
        let graphs = parity_corpus(6, 4, 12, 3).unwrap();
        let embeddings: Vec<EmbeddingVector> = graphs
            .iter()
            .map(|g| EmbeddingVector::new(embed_sf(g, 6).unwrap()).unwrap())
            .collect();
        let mut opts = BuildOptions::new(EmbeddingMethod::Sf, 1, 3, 1);
        opts.deterministic = true;
        DonorDb::build(&graphs, &embeddings, &opts).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn queries_match_linear_scan(q in prop::collection::vec(-1.0f64..8.0, 6)) {
        let db = small_db();
        let v = EmbeddingVector::new(q).unwrap();
        let reference = scan(&db, &v);
        let near = db.nearest(&v, 3).unwrap();
        for (hit, r) in near.iter().zip(&reference) {
            prop_assert_eq!((hit.distance, hit.graph_id), *r);
            prop_assert_eq!(db.entries[hit.index].graph_id, hit.graph_id);
        }
        let far = db.farthest(&v).unwrap();
        let max = reference.iter().map(|r| r.0).fold(f64::MIN, f64::max);
        let first_max = reference.iter().filter(|r| r.0 == max).map(|r| r.1).min().unwrap();
        prop_assert_eq!((far.distance, far.graph_id), (max, first_max));
    }

    #[test]
    fn transferred_ratios_are_bounded(g in graph_strategy(3, 8), donor in 0usize..12) {
        prop_assume!(g.edge_count() > 0);
        let db = small_db();
        let acc = Acceptor::new("a", g).unwrap();
        let r = transfer_eval(&acc, &db.entries[donor], 0.0, "nearest", &TransferOptions::new(1)).unwrap();
        prop_assert!(r.r_avg >= -1e-9 && r.r_avg <= 1.0 + 1e-9);
        prop_assert_eq!(r.ratios.len(), db.entries[donor].records.len());
        let recomputed = qtransfer::stats::mean(&r.ratios);
        prop_assert_eq!(recomputed, r.r_avg);
    }
}
