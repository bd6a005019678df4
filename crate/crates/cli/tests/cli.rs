use std::fs;
use std::path::{Path, PathBuf};

use clonelab_cli::run;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("clonelab").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cli(&[]), 1);
    assert_eq!(cli(&["frobnicate"]), 1);
    assert_eq!(cli(&["baseline", "--detector", "fuzzy", "--in", "x", "--out", "y"]), 1);
    assert_eq!(cli(&["split", "--in", "x"]), 1);
    assert_eq!(cli(&["--jobs", "0", "graph-dump", "--file", "a.c", "--out", "-"]), 1);
}

#[test]
fn empty_transform_writes_an_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out, config) = (dir.path().join("in"), dir.path().join("out"), dir.path().join("t.yaml"));
    fs::create_dir(&input).unwrap();
    fs::write(&config, "seed: 3\n").unwrap();
    assert_eq!(cli(&["transform", "--config", s(&config), "--in", s(&input), "--out", s(&out)]), 0);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["groups"], serde_json::json!([]));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing");
    let out = dir.path().join("out.csv");
    assert_eq!(cli(&["baseline", "--detector", "line", "--in", s(&missing), "--out", s(&out)]), 2);
    let broken = dir.path().join("broken.c");
    fs::write(&broken, "int main( {").unwrap();
    assert_eq!(cli(&["graph-dump", "--file", s(&broken), "--out", "-"]), 2);
    let config = dir.path().join("bad.yaml");
    fs::write(&config, "copies_per_file: -1\n").unwrap();
    assert_eq!(cli(&["transform", "--config", s(&config), "--in", s(dir.path()), "--out", s(&dir.path().join("o"))]), 2);
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let file = repo().join("data/toy/p000/s000.c");
    assert_eq!(cli(&["graph-dump", "--file", s(&file), "--out", s(&dot)]), 0);
    let first = fs::read_to_string(&dot).unwrap();
    assert!(first.starts_with("digraph"));
    fs::write(&dot, "keep me").unwrap();
    assert_eq!(cli(&["graph-dump", "--file", s(&file), "--out", s(&dot)]), 2);
    assert_eq!(fs::read_to_string(&dot).unwrap(), "keep me");
    assert_eq!(cli(&["graph-dump", "--file", s(&file), "--out", s(&dot), "--force"]), 0);
    assert_eq!(fs::read_to_string(&dot).unwrap(), first);
}

#[test]
fn full_pipeline_on_the_bundled_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let w = |p: &str| dir.path().join(p);
    let configs = repo().join("configs");
    let toy = repo().join("data/toy");
    let steps: [Vec<String>; 5] = [
        ["transform", "--config", s(&configs.join("transform.yaml")), "--in", s(&toy), "--out", s(&w("aug"))].map(String::from).to_vec(),
        ["split", "--in", s(&w("aug")), "--spec", s(&configs.join("split.yaml")), "--out", s(&w("split"))].map(String::from).to_vec(),
        ["train", "--config", s(&configs.join("train.yaml")), "--data", s(&w("split")), "--out", s(&w("run.json"))].map(String::from).to_vec(),
        ["evaluate", "--checkpoint", s(&w("run.ckpt")), "--data", s(&w("split/test")), "--out", s(&w("metrics.json"))].map(String::from).to_vec(),
        ["baseline", "--detector", "canonical", "--in", s(&w("split/test")), "--out", s(&w("pairs.csv"))].map(String::from).to_vec(),
    ];
    for step in &steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        assert_eq!(cli(&args), 0, "{args:?}");
    }
    for part in ["train", "val", "test"] {
        assert!(w("split").join(part).join("manifest.json").is_file());
    }
    let run_record: serde_json::Value = serde_json::from_str(&fs::read_to_string(w("run.json")).unwrap()).unwrap();
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(w("metrics.json")).unwrap()).unwrap();
    let map = metrics["map_at_r"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&map));
    assert_eq!(run_record["test"], metrics);
    let csv = fs::read_to_string(w("pairs.csv")).unwrap();
    assert!(csv.starts_with("file_a,file_b,detector,score\n"));

    // a second split into the same directory needs --force and then replaces it
    let (aug, spec, split_dir) = (w("aug"), configs.join("split.yaml"), w("split"));
    let again = ["split", "--in", s(&aug), "--spec", s(&spec), "--out", s(&split_dir)];
    assert_eq!(cli(&again), 2);
    let forced: Vec<&str> = again.iter().copied().chain(["--force"]).collect();
    assert_eq!(cli(&forced), 0);
}

#[test]
fn generate_matches_the_bundled_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("toy");
    assert_eq!(cli(&["generate", "--problems", "6", "--solutions", "5", "--seed", "7", "--out", s(&out)]), 0);
    let bundled = repo().join("data/toy");
    for entry in walk(&bundled) {
        let rel = entry.strip_prefix(&bundled).unwrap();
        assert_eq!(fs::read(&entry).unwrap(), fs::read(out.join(rel)).unwrap(), "{}", rel.display());
    }
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}
