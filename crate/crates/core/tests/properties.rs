use proptest::prelude::*;

use corrclust::graph::{brute_force_opt, cost, generate_sbm, replay, to_stream, StreamMode};
use corrclust::harness::{run_experiment, write_rows, Algo, Dataset, ExperimentConfig};
use corrclust::pivot::{classic_pivot, cm_pivot};
use corrclust::predictor::{noisy_oracle, quality_l, triangle_violation_count, PredictorSpec};
use corrclust::sketch::{estimated_cost, SparsifierGraph};
use corrclust::streaming::{dynamic_cc, insertion_cc, DynamicParams, InsertionParams};
use corrclust::{Clustering, RandomPermutation, SignedGraph};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = SignedGraph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let mut pos = Vec::new();
            let mut i = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[i] {
                        pos.push((u, v));
                    }
                    i += 1;
                }
            }
            SignedGraph::complete(n, pos).unwrap()
        })
    })
}

fn labels_for(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..n.max(1), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_ignores_relabelling(g in graph_strategy(9), shift in 1usize..50) {
        let n = g.n();
        let labels: Vec<usize> = (0..n).map(|u| (u * 7 + 3) % n.max(1)).collect();
        let a = Clustering::from_labels(labels.clone());
        let b = Clustering::from_labels(labels.iter().map(|l| l * 31 + shift).collect::<Vec<_>>());
        prop_assert_eq!(cost(&g, &a).unwrap(), cost(&g, &b).unwrap());
    }

    #[test]
    fn every_clustering_costs_at_least_opt((g, labels) in graph_strategy(8).prop_flat_map(|g| {
        let n = g.n();
        (Just(g), labels_for(n))
    })) {
        let (opt, witness) = brute_force_opt(&g).unwrap();
        prop_assert_eq!(cost(&g, &witness).unwrap(), opt);
        prop_assert!(cost(&g, &Clustering::from_labels(labels)).unwrap() >= opt);
    }

    #[test]
    fn exact_sparsifier_estimate_is_the_cost((g, labels) in graph_strategy(9).prop_flat_map(|g| {
        let n = g.n();
        (Just(g), labels_for(n))
    })) {
        let c = Clustering::from_labels(labels);
        let est = estimated_cost(&SparsifierGraph::exact(&g), &g.pos_degrees(), &c);
        prop_assert!((est - cost(&g, &c).unwrap() as f64).abs() < 1e-9);
    }

    #[test]
    fn streams_replay_to_their_graph(g in graph_strategy(10), seed in any::<u64>(), churn in 0.0f64..2.0) {
        for mode in [StreamMode::InsertionOnly, StreamMode::Dynamic] {
            let s = to_stream(&g, mode, churn, seed).unwrap();
            prop_assert_eq!(&replay(&s).unwrap(), &g);
        }
    }

    #[test]
    fn optimal_noisy_oracle_has_unit_quality(g in graph_strategy(7)) {
        let (opt, witness) = brute_force_opt(&g).unwrap();
        let o = noisy_oracle(&witness, 0.0).unwrap();
        prop_assert_eq!(quality_l(&g, &o), opt as f64);
    }

    #[test]
    fn noisy_oracles_are_metric(labels in labels_for(6), eps0 in 0.0f64..0.5) {
        let o = noisy_oracle(&Clustering::from_labels(labels), eps0).unwrap();
        prop_assert_eq!(triangle_violation_count(&o, &[0, 1, 2, 3, 4, 5], 0, 0), 0);
    }

    #[test]
    fn large_queues_reduce_to_plain_pivot(g in graph_strategy(8), seed in any::<u64>()) {
        let p = RandomPermutation::from_seed(g.n(), seed);
        prop_assert_eq!(cm_pivot(&g, g.n().max(2), &p).unwrap(), classic_pivot(&g, &p).unwrap());
    }
}

#[test]
fn planted_partition_is_free_when_p_is_one() {
    for seed in 0..10 {
        let (g, truth) = generate_sbm(30, 3, 1.0, seed).unwrap();
        assert_eq!(cost(&g, &truth).unwrap(), 0);
    }
}

#[test]
fn streaming_algorithms_never_beat_the_optimum() {
    for seed in 0..20 {
        let (g, truth) = generate_sbm(9, 3, 0.8, seed).unwrap();
        let (opt, _) = brute_force_opt(&g).unwrap();
        let o = noisy_oracle(&truth, 0.1).unwrap();
        let s = to_stream(&g, StreamMode::Dynamic, 1.0, seed).unwrap();
        let (c, _) = dynamic_cc(&s, &o, &DynamicParams::default(), seed).unwrap();
        assert!(cost(&g, &c).unwrap() >= opt);
        let full = corrclust::graph::to_full_stream(&g, seed);
        let (c, _) = insertion_cc(&full, &o, &InsertionParams::default(), seed).unwrap();
        assert!(cost(&g, &c).unwrap() >= opt);
    }
}

#[test]
fn experiment_output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        dataset: Dataset::Sbm { n: 40, k: 4, p: 0.9 },
        algos: vec![Algo::Dynamic, Algo::Insertion, Algo::Cklpu, Algo::CmPivot],
        predictors: vec![PredictorSpec::Noisy(0.0), PredictorSpec::Noisy(0.2)],
        trials: 1,
        seed: 17,
        ..ExperimentConfig::default()
    };
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_rows(&a, &run_experiment(&cfg).unwrap()).unwrap();
    write_rows(&b, &run_experiment(&cfg).unwrap()).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn missing_dataset_is_named_in_the_error() {
    let cfg = ExperimentConfig::parse("dataset = edges:/no/such/graph.txt\npredictors = const:0.5\n").unwrap();
    let err = run_experiment(&cfg).unwrap_err().to_string();
    assert!(err.contains("/no/such/graph.txt"), "{err}");
}
