use std::collections::BTreeSet;

use batchcut::oracle::random_partition;
use batchcut::simgraph::{cut_weight, inner_weights, similarity_graph, SimilarityGraph};
use batchcut::spectral::embed;
use batchcut::Dataset;
use proptest::prelude::*;

fn sets() -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(prop::collection::vec(0u64..15, 0..6), 1..30)
}

fn dense_edges(g: &SimilarityGraph) -> Vec<(usize, usize, u32)> {
    let mut e: Vec<_> = g.edges().collect();
    e.sort_unstable();
    e
}

proptest! {
    #[test]
    fn weights_equal_set_intersections(raw in sets()) {
        let ds = Dataset::from_sets(raw.clone());
        let g = similarity_graph(&ds, None);
        let uniq: Vec<BTreeSet<u64>> = raw.iter().map(|s| s.iter().copied().collect()).collect();
        for i in 0..uniq.len() {
            for j in 0..uniq.len() {
                let expect = if i == j { 0 } else { uniq[i].intersection(&uniq[j]).count() as u32 };
                prop_assert_eq!(g.weight(i, j), expect);
            }
        }
    }

    #[test]
    fn cut_plus_inner_is_total(raw in sets(), k in 1usize..5, seed in any::<u64>()) {
        let ds = Dataset::from_sets(raw);
        let k = k.min(ds.len());
        let g = similarity_graph(&ds, None);
        let p = random_partition(ds.len(), k, seed).unwrap();
        let inner: u64 = inner_weights(&g, &p).unwrap().iter().sum();
        prop_assert_eq!(cut_weight(&g, &p).unwrap() + inner, g.total_pairwise_weight());
    }

    #[test]
    fn graph_ignores_description_order(raw in sets()) {
        let reversed: Vec<Vec<u64>> = raw.iter().map(|s| s.iter().rev().copied().collect()).collect();
        let a = similarity_graph(&Dataset::from_sets(raw), None);
        let b = similarity_graph(&Dataset::from_sets(reversed), None);
        prop_assert_eq!(dense_edges(&a), dense_edges(&b));
    }

    #[test]
    fn embedding_rows_are_unit_or_zero(raw in sets(), kp in 1usize..5) {
        let ds = Dataset::from_sets(raw);
        let g = similarity_graph(&ds, None);
        let kp = kp.min(ds.len());
        let e = embed(&g, kp, 0).unwrap();
        for i in 0..e.n() {
            let norm: f64 = e.points.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(norm < 1e-12 || (norm - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn embedding_is_invariant_to_weight_scaling() {
    let edges = [(0, 1, 2u32), (1, 2, 1), (2, 3, 3), (3, 0, 1), (0, 2, 1)];
    let doubled: Vec<_> = edges.iter().map(|&(i, j, w)| (i, j, 2 * w)).collect();
    let a = embed(&SimilarityGraph::from_edges(4, &edges), 2, 0).unwrap();
    let b = embed(&SimilarityGraph::from_edges(4, &doubled), 2, 0).unwrap();
    for (x, y) in a.points.as_slice().iter().zip(b.points.as_slice()) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn planted_clusters_embed_apart() {
    let (ds, truth) = batchcut::dataset::generate_planted(&batchcut::dataset::PlantedConfig {
        n: 40,
        clusters: 4,
        shared_per_cluster: 5,
        private_per_sample: 1,
        noise_overlap: 0.0,
        seed: 3,
    })
    .unwrap();
    let e = embed(&similarity_graph(&ds, None), 4, 0).unwrap();
    for i in 0..40 {
        for j in 0..40 {
            let d = batchcut::linalg::euclidean(e.points.row(i), e.points.row(j));
            if truth.batch_of(i) == truth.batch_of(j) {
                assert!(d < 1e-8);
            } else {
                assert!(d > 1.0);
            }
        }
    }
}
