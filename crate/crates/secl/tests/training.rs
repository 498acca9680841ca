mod common;

use std::fs;

use secl::eval::accuracy;
use secl::graph::{write_attributes_text, write_edges, write_labels, PlantedPartition};
use secl::harness::{output, run_experiment, time_report, train, train_with, Prepared, TrainConfig, TrainOptions};
use secl::losses::Ablation;
use secl::{DenseMatrix, Error, Graph};

fn planted(seed: u64) -> Graph {
    PlantedPartition {
        nodes: 90,
        clusters: 3,
        p_in: 0.2,
        p_out: 0.01,
        attributes: 12,
        noise: 0.6,
    }
    .generate(seed)
    .unwrap()
}

#[test]
fn one_epoch_on_the_smallest_graph() {
    let g = Graph::new(2, vec![(0, 1)], DenseMatrix::identity(2), Some(vec![0, 1])).unwrap();
    let config = common::small_config(2, &[3], 1);
    let prepared = Prepared::new(&config, g).unwrap();
    let out = train(&config, &prepared, 0).unwrap();
    assert_eq!(out.record.losses.len(), 1);
    assert_eq!(out.clustering.unwrap().labels.len(), 2);
    assert!(time_report(&config, &prepared).unwrap() < 1.0);
}

#[test]
fn logged_epochs_match_config_and_total_recombines() {
    let config = common::small_config(3, &[16], 25);
    let prepared = Prepared::new(&config, planted(1)).unwrap();
    let out = train(&config, &prepared, 7).unwrap();
    assert_eq!(out.record.losses.len(), 25);
    for l in &out.record.losses {
        let recomputed = l.l_sl + l.lambda1 * l.l_cl - l.lambda2 * l.l_m;
        assert!((l.total - recomputed).abs() < 1e-12);
    }
}

#[test]
fn without_modularity_the_head_gets_no_gradient() {
    let mut config = common::small_config(3, &[8], 10);
    config.loss.ablation = Ablation::NoModularity;
    let prepared = Prepared::new(&config, planted(2)).unwrap();
    let mut epochs = 0;
    train_with(&config, &prepared, 0, TrainOptions::default(), |view| {
        epochs += 1;
        let head = view.gradients.last().unwrap();
        assert!(head.as_slice().iter().all(|&v| v == 0.0), "epoch {}", view.epoch);
        Ok(())
    })
    .unwrap();
    assert_eq!(epochs, 10);
}

#[test]
fn seeds_change_only_initialization() {
    let config = common::small_config(3, &[8], 3);
    let g = planted(3);
    let a = Prepared::new(&config, g.clone()).unwrap();
    let b = Prepared::new(&config, g).unwrap();
    assert_eq!(a.x_hat, b.x_hat);
    assert_eq!(a.ops.a_tilde, b.ops.a_tilde);
    let r0 = train(&config, &a, 0).unwrap();
    let r0_again = train(&config, &b, 0).unwrap();
    let r1 = train(&config, &a, 1).unwrap();
    assert_eq!(r0.h2, r0_again.h2);
    assert_ne!(r0.h2, r1.h2);
}

#[test]
fn overflowing_parameters_abort_with_epoch() {
    let mut config = common::small_config(3, &[8], 5);
    config.optim.learning_rate = 1e308;
    let prepared = Prepared::new(&config, planted(4)).unwrap();
    match train(&config, &prepared, 0) {
        Err(Error::TrainingAborted { epoch, reason }) => {
            assert!(epoch >= 2, "{epoch}");
            assert!(reason.contains("last finite losses"), "{reason}");
        }
        other => panic!("expected an abort, got {:?}", other.map(|o| o.record.losses)),
    }
}

#[test]
fn planted_partition_is_recovered() {
    let g = planted(5);
    let truth = g.labels().unwrap().to_vec();
    let config = common::small_config(3, &[32], 60);
    let prepared = Prepared::new(&config, g).unwrap();
    let out = train(&config, &prepared, 0).unwrap();
    let losses = &out.record.losses;
    assert!(losses.last().unwrap().total < losses[0].total);
    let acc = accuracy(&out.clustering.unwrap().labels, &truth).unwrap();
    assert!(acc > 0.9, "accuracy {acc}");
}

fn write_dataset(dir: &std::path::Path, g: &Graph) {
    write_edges(&dir.join("edges.txt"), g.edges()).unwrap();
    write_attributes_text(&dir.join("features.txt"), g.attributes()).unwrap();
    write_labels(&dir.join("labels.txt"), g.labels().unwrap()).unwrap();
}

fn experiment_files(root: &std::path::Path, config: &TrainConfig) -> Vec<(String, Vec<u8>)> {
    let g = config.dataset.load().unwrap();
    let prepared = Prepared::new(config, g).unwrap();
    let dir = output::create_experiment_dir(root, config).unwrap();
    run_experiment(config, &prepared, Some(&dir)).unwrap();
    let mut names = vec![output::METRICS_CSV.to_string(), output::METRICS_JSON.into(), output::LOSS_LOG_CSV.into()];
    for k in 0..config.run.runs {
        names.push(output::embeddings_file(k));
        names.push(output::labels_file(k));
    }
    names.into_iter().map(|n| (n.clone(), fs::read(dir.join(&n)).unwrap())).collect()
}

#[test]
fn deterministic_experiments_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    write_dataset(tmp.path(), &planted(6));
    let mut config = common::small_config(3, &[8], 8);
    config.dataset.dir = tmp.path().to_path_buf();
    config.run.deterministic = true;
    let a = experiment_files(&tmp.path().join("a"), &config);
    let b = experiment_files(&tmp.path().join("b"), &config);
    assert_eq!(a, b);
    let csv = String::from_utf8(a[0].1.clone()).unwrap();
    assert_eq!(csv.lines().count(), 1 + config.run.runs + 2);
}

#[test]
fn experiment_report_is_consistent() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = common::small_config(3, &[8], 5);
    config.run.runs = 3;
    let prepared = Prepared::new(&config, planted(7)).unwrap();
    let result = run_experiment(&config, &prepared, Some(tmp.path())).unwrap();
    assert_eq!(result.report.per_run.len(), 3);
    assert!(result.report.is_consistent(1e-12));
    let seeds: Vec<u64> = result.records.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, vec![0, 1, 2]);
    let emb = secl::graph::read_dense_bin(&tmp.path().join(output::embeddings_file(2))).unwrap();
    assert_eq!(emb.shape(), (90, 8));
}
