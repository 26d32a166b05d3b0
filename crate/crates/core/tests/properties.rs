//! Randomized invariants across the graph, state, dynamics, metric and fit
//! layers.

use proptest::prelude::*;

use ctqw_core::dynamics::{evolve, rhs, EvolveOptions, SpectralDecomposition};
use ctqw_core::fit::{fit_stretched_exponential, kohlrausch, FitOptions};
use ctqw_core::graph::{
    build_barabasi_albert, build_complete, build_cycle, build_erdos_renyi, build_star,
    build_watts_strogatz, closeness_centrality, laplacian, Graph,
};
use ctqw_core::metrics::{
    fidelity, fidelity_with_diagonal, fidelity_with_node, quantum_classical_distance,
    von_neumann_entropy, DqcMode, EntropyBase,
};
use ctqw_core::state::{localized_state, DensityMatrix};
use ctqw_core::{EvolutionModel, TimeGrid};

mod common;
use common::{literal_rhs, random_state};

fn any_graph() -> impl Strategy<Value = Graph> {
    (0usize..6, 4usize..24, any::<u64>()).prop_map(|(family, n, seed)| match family {
        0 => build_cycle(n).unwrap(),
        1 => build_complete(n).unwrap(),
        2 => build_star(n).unwrap(),
        3 => build_erdos_renyi(n, 3.0_f64.min((n - 1) as f64), seed).unwrap(),
        4 => build_watts_strogatz(n, 2, 0.3, seed).unwrap(),
        _ => build_barabasi_albert(n, 2, seed).unwrap(),
    })
}

fn small_graph() -> impl Strategy<Value = Graph> {
    (0usize..6, 3usize..=8, any::<u64>()).prop_map(|(family, n, seed)| match family {
        0 => build_cycle(n).unwrap(),
        1 => build_complete(n).unwrap(),
        2 => build_star(n).unwrap(),
        3 => build_erdos_renyi(n, 2.0, seed).unwrap(),
        4 if n >= 5 => build_watts_strogatz(n, 2, 0.5, seed).unwrap(),
        _ => build_barabasi_albert(n, 2, seed).unwrap(),
    })
}

fn graph_and_state() -> impl Strategy<Value = (Graph, DensityMatrix)> {
    small_graph().prop_flat_map(|g| {
        let n = g.n();
        (
            Just(g),
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
                .prop_map(move |e| random_state(n, &e)),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_is_psd_with_zero_row_sums(g in any_graph()) {
        let l = laplacian(&g);
        for r in 0..g.n() {
            prop_assert_eq!(l.row(r).sum(), 0.0);
            prop_assert_eq!(l[(r, r)], g.degree(r) as f64);
        }
        prop_assert_eq!(&l, &l.transpose());
        let spec = SpectralDecomposition::new(&l).unwrap();
        prop_assert!(spec.eigenvalues()[0] > -1e-10);
        // connected: exactly one zero mode
        prop_assert!(spec.eigenvalues()[1] > 1e-10);
    }

    #[test]
    fn random_generators_are_reproducible(n in 10usize..60, seed in any::<u64>()) {
        prop_assert_eq!(build_erdos_renyi(n, 4.0, seed).unwrap(), build_erdos_renyi(n, 4.0, seed).unwrap());
        prop_assert_eq!(
            build_watts_strogatz(n, 4, 0.3, seed).unwrap(),
            build_watts_strogatz(n, 4, 0.3, seed).unwrap()
        );
        prop_assert_eq!(build_barabasi_albert(n, 2, seed).unwrap(), build_barabasi_albert(n, 2, seed).unwrap());
    }

    #[test]
    fn watts_strogatz_keeps_edge_count(n in 8usize..80, half_k in 1usize..3, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let k = 2 * half_k;
        let g = build_watts_strogatz(n, k, p, seed).unwrap();
        prop_assert_eq!(g.edge_count(), n * k / 2);
        prop_assert!(g.is_connected());
    }

    #[test]
    fn barabasi_albert_edge_count(n in 4usize..80, m in 1usize..4, seed in any::<u64>()) {
        prop_assume!(m < n);
        let g = build_barabasi_albert(n, m, seed).unwrap();
        prop_assert_eq!(g.edge_count(), m * (n - m) + m * (m - 1) / 2);
    }

    #[test]
    fn closeness_is_at_most_one(g in any_graph()) {
        let c = closeness_centrality(&g).unwrap();
        for (i, &x) in c.iter().enumerate() {
            prop_assert!(x > 0.0 && x <= 1.0 + 1e-15);
            // equality exactly for nodes adjacent to every other node
            prop_assert_eq!((x - 1.0).abs() < 1e-15, g.degree(i) == g.n() - 1);
        }
    }

    #[test]
    fn graph_hash_ignores_edge_order(g in any_graph(), rot in 0usize..50) {
        let mut edges: Vec<(usize, usize)> = g.edges().iter().map(|&(a, b)| (b, a)).collect();
        let len = edges.len();
        edges.rotate_left(rot % len);
        let h = Graph::from_edges(g.n(), edges).unwrap();
        prop_assert_eq!(g.canonical_hash(), h.canonical_hash());
    }

    #[test]
    fn closed_form_dissipators_match_operator_sums(
        (g, rho) in graph_and_state(),
        gamma in 0.0f64..2.0,
        p in 0.0f64..=1.0,
    ) {
        let l = laplacian(&g);
        for model in [EvolutionModel::HakenStrobl { gamma }, EvolutionModel::Qsw { p }] {
            let fast = rhs(model, &l, rho.matrix()).unwrap();
            let slow = literal_rhs(model, &l, rho.matrix());
            prop_assert!((fast - slow).camax() <= 1e-12, "{:?}", model);
        }
    }

    #[test]
    fn generators_are_trace_free_and_hermitian((g, rho) in graph_and_state(), rate in 0.0f64..1.0) {
        let l = laplacian(&g);
        for model in [
            EvolutionModel::Noiseless,
            EvolutionModel::Intrinsic { gamma: rate },
            EvolutionModel::HakenStrobl { gamma: rate },
            EvolutionModel::Qsw { p: rate },
        ] {
            let d = rhs(model, &l, rho.matrix()).unwrap();
            prop_assert!(d.trace().norm() < 1e-12);
            prop_assert!((&d - d.adjoint()).camax() < 1e-12);
        }
    }

    #[test]
    fn fast_fidelities_match_general_form((_g, rho) in graph_and_state(), j in 0usize..3, weights in prop::collection::vec(0.01f64..1.0, 8)) {
        let n = rho.dim();
        let node = localized_state(n, j).unwrap();
        let general = fidelity(&node, &rho).unwrap();
        prop_assert!((general - fidelity_with_node(j, &rho).unwrap()).abs() <= 1e-8);

        let total: f64 = weights[..n].iter().sum();
        let p: Vec<f64> = weights[..n].iter().map(|w| w / total).collect();
        let sigma = DensityMatrix::from_real_diagonal(&p);
        let general = fidelity(&sigma, &rho).unwrap();
        prop_assert!((general - fidelity_with_diagonal(&p, &rho).unwrap()).abs() <= 1e-8);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&general));
    }

    #[test]
    fn entropy_lies_between_zero_and_log_n((_g, rho) in graph_and_state()) {
        let n = rho.dim() as f64;
        let s = von_neumann_entropy(&rho, EntropyBase::Natural).unwrap();
        prop_assert!(s >= 0.0 && s <= n.ln() + 1e-10);
        let s2 = von_neumann_entropy(&rho, EntropyBase::Two).unwrap();
        prop_assert!((s2 - s / std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn minimized_fidelity_bounds_fixed_distance((g, rho) in graph_and_state(), t in 0.0f64..5.0, j in 0usize..3) {
        let spec = SpectralDecomposition::new(&laplacian(&g)).unwrap();
        let fixed = quantum_classical_distance(&rho, &spec, t, j, DqcMode::FixedInitial).unwrap();
        let min = quantum_classical_distance(&rho, &spec, t, j, DqcMode::MinOverLocalized).unwrap();
        // the minimum runs over fidelities, so it can only raise the distance
        prop_assert!(min >= fixed - 1e-12);
        prop_assert!((0.0..=1.0).contains(&min));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evolution_preserves_state_validity(g in small_graph(), j in 0usize..3, rate in 0.01f64..0.5, family in 0usize..4) {
        let model = [
            EvolutionModel::Noiseless,
            EvolutionModel::Intrinsic { gamma: rate },
            EvolutionModel::HakenStrobl { gamma: rate },
            EvolutionModel::Qsw { p: rate },
        ][family];
        let rho0 = localized_state(g.n(), j).unwrap();
        let grid = TimeGrid::new(6.0, 13).unwrap();
        let traj = evolve(model, &laplacian(&g), &rho0, &grid, EvolveOptions::default()).unwrap();
        let mut last_purity = 1.0;
        for rho in &traj.states {
            let d = rho.validate();
            prop_assert!(d.is_valid(), "{:?}", d);
            let purity = rho.purity();
            if model == EvolutionModel::Noiseless {
                prop_assert!((purity - 1.0).abs() < 1e-8);
            }
            if matches!(model, EvolutionModel::Intrinsic { .. } | EvolutionModel::HakenStrobl { .. }) {
                // unital dephasing can only mix
                prop_assert!(purity <= last_purity + 1e-8);
            }
            last_purity = purity;
        }
    }

    #[test]
    fn star_hub_walk_matches_complete_graph(n in 4usize..14, t in 0.0f64..30.0) {
        let star = laplacian(&build_star(n).unwrap());
        let complete = laplacian(&build_complete(n).unwrap());
        let rho0 = localized_state(n, 0).unwrap();
        let grid = TimeGrid::new(t.max(1e-3), 5).unwrap();
        let opts = EvolveOptions::default();
        let a = evolve(EvolutionModel::Noiseless, &star, &rho0, &grid, opts).unwrap();
        let b = evolve(EvolutionModel::Noiseless, &complete, &rho0, &grid, opts).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            prop_assert!((fidelity_with_node(0, x).unwrap() - fidelity_with_node(0, y).unwrap()).abs() <= 1e-8);
        }
    }

    #[test]
    fn fit_recovers_noiseless_parameters(c0 in 0.2f64..5.0, lambda in 0.05f64..2.0, beta in 0.3f64..2.5) {
        let t_end = 8.0 / lambda;
        let times: Vec<f64> = (0..400).map(|i| t_end * i as f64 / 399.0).collect();
        let values: Vec<f64> = times.iter().map(|&t| kohlrausch(c0, lambda, beta, t)).collect();
        let fit = fit_stretched_exponential(&times, &values, &FitOptions::default()).unwrap();
        prop_assert!(fit.converged);
        prop_assert!((fit.lambda - lambda).abs() <= 1e-3, "lambda {} vs {}", fit.lambda, lambda);
        prop_assert!((fit.beta - beta).abs() <= 1e-3, "beta {} vs {}", fit.beta, beta);
    }

    #[test]
    fn fit_is_covariant_under_time_rescaling(lambda in 0.05f64..1.0, beta in 0.4f64..2.0, a in 0.2f64..5.0) {
        // slightly off-model data, so the optimum is a genuine least-squares point
        let times: Vec<f64> = (0..300).map(|i| 30.0 * i as f64 / 299.0).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|&t| kohlrausch(2.0, lambda, beta, t) + 0.01 * (-(t - 10.0).powi(2) / 8.0).exp())
            .collect();
        let scaled: Vec<f64> = times.iter().map(|&t| a * t).collect();
        let opts = FitOptions::default();
        let f1 = fit_stretched_exponential(&times, &values, &opts).unwrap();
        let f2 = fit_stretched_exponential(&scaled, &values, &opts).unwrap();
        prop_assert!((f2.lambda - f1.lambda / a).abs() <= 1e-6 * f1.lambda.max(1.0), "{} vs {}", f2.lambda, f1.lambda / a);
        prop_assert!((f2.beta - f1.beta).abs() <= 1e-6);
        for &t in &times {
            let (m1, m2) = (f1.model(t), f1.model(t + 1.0));
            prop_assert!(m2 <= m1);
        }
    }
}
