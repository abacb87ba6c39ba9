use std::sync::Arc;

use mqforest::data::{load_vectors, recall, save_vectors};
use mqforest::experiments::{run_recall_experiment, ExperimentConfig, ModeSelection, Workload};
use mqforest::{gen_clustered_sphere, Forest, GroundTruth};

const SEED: u64 = 77;

fn workload() -> Workload {
    let data = gen_clustered_sphere(6000, 24, 12, 0.15, SEED).unwrap().data;
    Workload::from_data(&data, 40, SEED).unwrap()
}

#[test]
fn files_forest_and_queries_survive_a_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let work = workload();

    let base_path = dir.path().join("base.fvecs");
    save_vectors(&work.base, &base_path).unwrap();
    let base = Arc::new(load_vectors(&base_path).unwrap());
    assert_eq!(*base, *work.base);

    let truth = work.ground_truth(20).unwrap();
    let (ids, dist) = (dir.path().join("gt.ivecs"), dir.path().join("gt.dist.fvecs"));
    truth.save(&ids, &dist).unwrap();
    let reloaded = GroundTruth::load(&ids, &dist).unwrap();
    assert_eq!(reloaded.ids(3), truth.ids(3));

    let forest = Forest::build(Arc::clone(&base), 12, 200, SEED).unwrap();
    let restored = Forest::read_from(&forest.to_bytes().unwrap()[..], Arc::clone(&base)).unwrap();
    for qi in 0..work.queries.len() {
        let q = work.queries.unit_row(qi);
        let a = forest.query_mq(&q, 20, 4).unwrap();
        let b = restored.query_mq(&q, 20, 4).unwrap();
        assert_eq!(a, b);
        assert!(recall(&a.ids(), reloaded.ids(qi)) > 0.0);
    }
}

#[test]
fn more_trees_never_hurt_recall() {
    let work = workload();
    let truth = work.ground_truth(20).unwrap();
    let cfg = ExperimentConfig {
        k: 20,
        tree_counts: vec![2, 6, 12],
        leaf_capacity: 100,
        warmup: 2,
        seed: SEED,
        ..ExperimentConfig::default()
    };
    let rows = run_recall_experiment(&cfg, &work, &truth, ModeSelection::Both).unwrap();
    assert_eq!(rows.len(), 6);
    for mode in ["rp", "mq"] {
        let series: Vec<f64> = rows
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| r.mean_recall)
            .collect();
        assert!(series.windows(2).all(|w| w[1] >= w[0]), "{mode}: {series:?}");
    }
}
