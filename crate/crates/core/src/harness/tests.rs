use std::collections::BTreeSet;
use std::fs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::baselines::Detector;
use crate::encode::EncoderKind;
use crate::metrics::{evaluate_index, QueryMode, RetrievalIndex};
use crate::toy::{generate_sources, CorpusRecipe};

fn toy(problems: usize, solutions: usize, seed: u64) -> Corpus {
    let files = generate_sources(&CorpusRecipe::new(problems, solutions, seed))
        .unwrap()
        .into_iter()
        .map(|f| {
            let group = f.problem[1..].parse().unwrap();
            CorpusFile { id: f.relative_path(), problem: f.problem, group, source: f.source }
        })
        .collect();
    Corpus { files, origin: Origin::AugmentedStyle, skipped: Vec::new() }
}

#[test]
fn ingest_plain_tree() {
    let dir = tempfile::tempdir().unwrap();
    for p in ["alpha", "beta"] {
        fs::create_dir(dir.path().join(p)).unwrap();
        for i in 0..3 {
            fs::write(dir.path().join(p).join(format!("{i}.c")), format!("int main() {{ return {i}; }}")).unwrap();
        }
    }
    fs::write(dir.path().join("beta/broken.c"), "int main( {").unwrap();
    let c = ingest(dir.path()).unwrap();
    assert_eq!(c.origin, Origin::PojStyle);
    assert_eq!(c.len(), 6);
    assert_eq!(c.problems().len(), 2);
    assert_eq!(c.skipped.len(), 1);
    assert_eq!(c.skipped[0].path, "beta/broken.c");
    assert!(c.files.iter().all(|f| f.group == usize::from(f.problem == "beta")));
}

#[test]
fn ingest_with_manifest_and_round_trip() {
    let src = tempfile::tempdir().unwrap();
    crate::toy::generate(&CorpusRecipe::new(2, 3, 0), src.path()).unwrap();
    let c = ingest(src.path()).unwrap();
    assert_eq!(c.origin, Origin::AugmentedStyle);
    assert_eq!(c.groups().len(), 2);
    let out = tempfile::tempdir().unwrap();
    c.write_to(out.path()).unwrap();
    assert_eq!(ingest(out.path()).unwrap(), c);
}

#[test]
fn ingest_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(ingest(dir.path()), Err(HarnessError::EmptyCorpus)));
    assert!(matches!(ingest(&dir.path().join("missing")), Err(HarnessError::Io { .. })));
}

#[test]
fn apportion_examples() {
    assert_eq!(apportion(10, &[0.6, 0.2, 0.2]), [6, 2, 2]);
    assert_eq!(apportion(104, &[0.6, 0.2, 0.2]), [62, 21, 21]);
    assert_eq!(apportion(5, &[0.6, 0.2, 0.2]), [3, 1, 1]);
}

#[test]
fn split_by_class() {
    let c = toy(10, 3, 1);
    let spec = SplitSpec { unit: Some(SplitUnit::ByClass), ..SplitSpec::default() };
    let (a, b, t) = split(&c, &spec).unwrap();
    let classes = |c: &Corpus| c.problems().keys().map(|k| k.to_string()).collect::<BTreeSet<_>>();
    assert_eq!((classes(&a).len(), classes(&b).len(), classes(&t).len()), (6, 2, 2));
    assert!(classes(&a).is_disjoint(&classes(&b)) && classes(&b).is_disjoint(&classes(&t)));
    assert_eq!(a.len() + b.len() + t.len(), c.len());
    assert_eq!(split(&c, &spec).unwrap(), (a, b, t));
}

#[test]
fn split_rejects() {
    assert!(matches!(split(&toy(4, 2, 0), &SplitSpec::default()), Err(HarnessError::TooFewUnits(4))));
    let spec = SplitSpec { ratios: [0.5, 0.2, 0.2], ..SplitSpec::default() };
    assert!(matches!(split(&toy(6, 2, 0), &spec), Err(HarnessError::InvalidSplit(_))));
    assert_eq!(SplitSpec::from_yaml_str("seed: 4\n").unwrap().seed, 4);
    assert!(SplitSpec::from_yaml_str("seeds: 4\n").is_err());
}

#[test]
fn same_problem_batches_are_pure() {
    let c = toy(4, 10, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut regroup = c.clone();
    // five groups of two per problem
    for (i, f) in regroup.files.iter_mut().enumerate() {
        f.group = i / 2;
    }
    for _ in 0..20 {
        let batches = make_batches(&regroup, 4, true, &mut rng).unwrap();
        assert!(!batches.is_empty());
        for b in &batches {
            assert_eq!(b.len(), 4);
            let problems: BTreeSet<_> = b.pairs.iter().map(|p| &regroup.files[p.anchor].problem).collect();
            assert_eq!(problems.len(), 1);
            let groups: BTreeSet<_> = b.groups().into_iter().collect();
            assert_eq!(groups.len(), 4);
            for p in &b.pairs {
                // pairs of two: the positive is always the other member
                assert_eq!(p.positive, p.anchor ^ 1);
            }
        }
    }
    assert!(make_batches(&c, 1, false, &mut rng).is_err());
}

#[test]
fn singletons_are_never_anchors() {
    let mut c = toy(2, 3, 0);
    c.files[0].group = 99;
    let batches = make_batches(&c, 2, false, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert!(batches.iter().flat_map(|b| &b.pairs).all(|p| p.anchor != 0 && p.positive != 0));
}

#[test]
fn positives_are_uniform() {
    let members = [3, 7, 9, 12];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = [0usize; 3];
    let n = 10_000;
    for _ in 0..n {
        let p = draw_positive(&members, 7, &mut rng).unwrap();
        counts[[3, 9, 12].iter().position(|&m| m == p).unwrap()] += 1;
    }
    let expected = n as f64 / 3.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 0.999 quantile of chi-square with 2 degrees of freedom
    assert!(chi2 < 13.82, "{counts:?}");
    assert_eq!(draw_positive(&[5], 5, &mut rng), None);
}

fn small_config(encoder: EncoderKind, algorithm: Algorithm) -> TrainConfig {
    TrainConfig {
        encoder,
        algorithm,
        batch_size: 4,
        embedding_dim: 8,
        vocab: 64,
        gcn_depth: 2,
        lr_grid: vec![1e-2],
        epochs: 2,
        queue_size: 16,
        prototypes: 4,
        ..TrainConfig::default()
    }
}

#[test]
fn zero_epochs_select_the_initialization() {
    let c = toy(4, 4, 0);
    let config = TrainConfig { epochs: 0, ..small_config(EncoderKind::Bow, Algorithm::Simclr) };
    let m = train(&c, &c, &config).unwrap();
    assert_eq!(m.record.runs[0].val_map.len(), 1);
    assert_eq!(m.record.selected.epoch, 0);
    assert_eq!(m.params, crate::encode::EncoderParams::init(&config.encoder_config(), config.seed));
}

#[test]
fn duplicate_rates_give_identical_runs() {
    let c = toy(4, 4, 0);
    let config = TrainConfig { lr_grid: vec![1e-2, 1e-2], ..small_config(EncoderKind::Gcn, Algorithm::Moco) };
    let m = train(&c, &c, &config).unwrap();
    assert_eq!(m.record.runs[0], m.record.runs[1]);
    assert_eq!(m.record.selected.run, 0);
}

#[test]
fn bow_simclr_loss_decreases() {
    let c = toy(4, 6, 9);
    let config = TrainConfig { epochs: 30, lr_grid: vec![0.1], ..small_config(EncoderKind::Bow, Algorithm::Simclr) };
    let m = train(&c, &c, &config).unwrap();
    let losses = &m.record.runs[0].train_loss;
    assert_eq!(losses.len(), 30);
    assert!(losses[29] < losses[0], "{losses:?}");
}

#[test]
fn every_algorithm_and_encoder_trains() {
    let c = toy(4, 4, 3);
    for encoder in EncoderKind::ALL {
        for algorithm in [Algorithm::Simclr, Algorithm::Moco, Algorithm::Swav] {
            for supervised in [false, true] {
                let config = TrainConfig { supervised, ..small_config(encoder, algorithm) };
                let m = train(&c, &c, &config).unwrap();
                assert_eq!(m.record.runs[0].train_loss.len(), 2, "{encoder:?} {algorithm:?}");
                assert!(m.record.runs[0].train_loss.iter().all(|l| l.is_finite()));
            }
        }
    }
}

#[test]
fn divergence_is_recorded() {
    let c = toy(4, 4, 3);
    let config = TrainConfig { lr_grid: vec![1e300, 1e-2], ..small_config(EncoderKind::Bow, Algorithm::Simclr) };
    let m = train(&c, &c, &config).unwrap();
    assert!(m.record.runs[0].diverged);
    assert!(!m.record.runs[1].diverged);
    let all_bad = TrainConfig { lr_grid: vec![1e300], ..config };
    assert!(matches!(train(&c, &c, &all_bad), Err(HarnessError::AllRunsDiverged)));
}

#[test]
fn identical_group_files_are_retrieved_perfectly() {
    let base = toy(3, 1, 4);
    let mut files = Vec::new();
    for f in &base.files {
        for k in 0..3 {
            files.push(CorpusFile { id: format!("{}-{k}", f.id), ..f.clone() });
        }
    }
    let c = Corpus { files, origin: Origin::AugmentedStyle, skipped: Vec::new() };
    let params = crate::encode::EncoderParams::init(&small_config(EncoderKind::Gcn, Algorithm::Simclr).encoder_config(), 0);
    let report = evaluate(&c, &params, None).unwrap();
    assert_eq!(report.r, 2);
    assert_eq!(report.map_at_r, 1.0);
    let empty = Corpus { files: Vec::new(), ..c };
    assert!(matches!(evaluate(&empty, &params, None), Err(HarnessError::EmptyCorpus)));
}

#[test]
fn detector_path_matches_direct_metric() {
    let c = toy(2, 3, 5);
    let via_harness = evaluate_detector(&c, Detector::Edit, Some(2)).unwrap();
    let n = c.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| Detector::Edit.score(&c.files[i].source, &c.files[j].source).unwrap().value).collect())
        .collect();
    let ids = c.files.iter().map(|f| f.id.clone()).collect();
    let groups = c.files.iter().map(|f| f.group).collect();
    let index = RetrievalIndex::from_similarities(ids, groups, rows).unwrap();
    let direct = evaluate_index(&index, 2, QueryMode::ExcludeSelf, false).unwrap();
    assert_eq!(via_harness, direct);
}

#[test]
fn config_yaml() {
    let c = TrainConfig::from_yaml_str("encoder: bow\nalgorithm: swav\nlr_grid: [0.5]\n").unwrap();
    assert_eq!((c.encoder, c.algorithm, c.lr_grid.clone(), c.batch_size), (EncoderKind::Bow, Algorithm::Swav, vec![0.5], 80));
    assert_eq!(TrainConfig::from_yaml_str(&c.to_yaml_string().unwrap()).unwrap(), c);
    assert!(TrainConfig::from_yaml_str("batch_size: 1\n").is_err());
    assert!(TrainConfig::from_yaml_str("lr_grid: []\n").is_err());
    assert!(TrainConfig::from_yaml_str("epoch: 3\n").is_err());
}
