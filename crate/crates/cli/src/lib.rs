//! The `clonelab` command line: one subcommand per pipeline stage.
//!
//! Exit codes: 0 on success, 1 on a usage error (the synopsis is printed),
//! 2 when the data or the filesystem gets in the way.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use clonelab::baselines::{score_all_pairs, write_scores_csv, Detector};
use clonelab::encode::{load_params, save_params};
use clonelab::graph::build_graph;
use clonelab::harness::{evaluate, ingest, split, train, SplitSpec, TrainConfig};
use clonelab::lang::parse_source;
use clonelab::toy::{generate, CorpusRecipe};
use clonelab::transform::{augment_corpus, TransformConfig};

pub const SYNOPSIS: &str = "\
usage: clonelab [--jobs N] <command> [options]

commands:
  transform  --config <yaml> --in <dir> --out <dir>
  split      --in <dir> --spec <yaml> --out <dir>
  train      --config <yaml> --data <dir> --out <run.json>
  evaluate   --checkpoint <file> --data <dir> --out <metrics.json> [--r N]
  baseline   --detector {line|canonical|edit} --in <dir> --out <csv>
  graph-dump --file <c file> --out <dot|->
  generate   --problems N --solutions N [--seed S] --out <dir>

every command accepts --force to replace existing outputs";

#[derive(Debug, Parser)]
#[command(name = "clonelab", disable_help_subcommand = true)]
struct Cli {
    /// Worker threads for parallel stages; defaults to the logical CPU count.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Augment a dataset with semantics-preserving transformations.
    Transform {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Partition a dataset into train, val and test directories.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Train an encoder; reads <data>/train and <data>/val, and <data>/test if present.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Where the encoder parameters go; defaults to the run file with a `.ckpt` extension.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Score a trained encoder on a dataset.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        r: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Score every file pair with a non-learned detector.
    Baseline {
        #[arg(long)]
        detector: Detector,
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Write the code graph of one file in DOT format.
    GraphDump {
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Write a synthetic corpus.
    Generate {
        #[arg(long)]
        problems: usize,
        #[arg(long)]
        solutions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long)]
    out: PathBuf,
    /// Replace outputs that already exist.
    #[arg(long)]
    force: bool,
}

impl Output {
    fn is_stdout(&self) -> bool {
        self.out.as_os_str() == "-"
    }

    /// Fails unless the target is free or `--force` was given. An empty
    /// directory counts as free.
    fn claim(&self) -> anyhow::Result<&Path> {
        let path = self.out.as_path();
        if self.force || self.is_stdout() {
            return Ok(path);
        }
        let occupied = match fs::read_dir(path) {
            Ok(mut entries) => entries.next().is_some(),
            Err(_) => path.exists(),
        };
        if occupied {
            bail!("{} already exists; pass --force to replace it", path.display());
        }
        Ok(path)
    }

    /// Clears a claimed output directory so stale files never mix with new ones.
    fn fresh_dir(&self) -> anyhow::Result<&Path> {
        let path = self.claim()?;
        if path.is_dir() {
            fs::remove_dir_all(path).with_context(|| format!("clearing {}", path.display()))?;
        } else if path.exists() {
            fs::remove_file(path).with_context(|| format!("removing {}", path.display()))?;
        }
        Ok(path)
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Transform { config, input, out } => {
            let config = TransformConfig::from_yaml_str(&read_text(&config)?)?;
            let dir = out.fresh_dir()?;
            let manifest = augment_corpus(&input, dir, &config)?;
            eprintln!(
                "transform: {} groups, {} files written, {} skipped",
                manifest.groups.len(),
                manifest.file_count(),
                manifest.skipped.len()
            );
        }
        Command::Split { input, spec, out } => {
            let spec = SplitSpec::from_yaml_str(&read_text(&spec)?)?;
            let corpus = ingest(&input)?;
            let (a, b, c) = split(&corpus, &spec)?;
            let dir = out.fresh_dir()?;
            for (name, part) in [("train", &a), ("val", &b), ("test", &c)] {
                part.write_to(&dir.join(name))?;
            }
            eprintln!("split: {} train, {} val, {} test files", a.len(), b.len(), c.len());
        }
        Command::Train { config, data, checkpoint, out } => {
            let config = TrainConfig::from_yaml_str(&read_text(&config)?)?.with_env_seed()?;
            let run_path = out.claim()?;
            let ckpt_path = checkpoint.unwrap_or_else(|| run_path.with_extension("ckpt"));
            if !out.force && ckpt_path.exists() {
                bail!("{} already exists; pass --force to replace it", ckpt_path.display());
            }
            let train_set = ingest(&data.join("train"))?;
            let val_set = ingest(&data.join("val"))?;
            let mut model = train(&train_set, &val_set, &config)?;
            let test_dir = data.join("test");
            if test_dir.is_dir() {
                model.record.test = Some(evaluate(&ingest(&test_dir)?, &model.params, config.r)?);
            }
            write_text(run_path, &to_json(&model.record)?)?;
            let file = fs::File::create(&ckpt_path).with_context(|| format!("writing {}", ckpt_path.display()))?;
            let mut writer = BufWriter::new(file);
            save_params(&model.params, &mut writer)?;
            writer.flush()?;
            let s = &model.record.selected;
            eprintln!("train: lr {} epoch {} val MAP@{} {:.4}", s.lr, s.epoch, model.record.r, s.val_map);
        }
        Command::Evaluate { checkpoint, data, r, out } => {
            let path = out.claim()?;
            let file = fs::File::open(&checkpoint).with_context(|| format!("reading {}", checkpoint.display()))?;
            let params = load_params(BufReader::new(file))?;
            let report = evaluate(&ingest(&data)?, &params, r)?;
            write_text(path, &to_json(&report)?)?;
            eprintln!("evaluate: MAP@{} {:.4} F1@{} {:.4}", report.r, report.map_at_r, report.r, report.f1_at_r);
        }
        Command::Baseline { detector, input, out } => {
            let corpus = ingest(&input)?;
            let files: Vec<(String, String)> = corpus.files.into_iter().map(|f| (f.id, f.source)).collect();
            let scores = score_all_pairs(&files, detector);
            let failed = scores.iter().filter(|s| s.score.is_none()).count();
            if out.is_stdout() {
                write_scores_csv(&scores, io::stdout().lock())?;
            } else {
                let mut buf = Vec::new();
                write_scores_csv(&scores, &mut buf)?;
                write_text(out.claim()?, std::str::from_utf8(&buf)?)?;
            }
            eprintln!("baseline: {} pairs scored with {}, {} failed", scores.len(), detector.name(), failed);
        }
        Command::GraphDump { file, out } => {
            let ast = parse_source(&read_text(&file)?).with_context(|| format!("parsing {}", file.display()))?;
            let dot = build_graph(&ast).to_dot();
            if out.is_stdout() {
                io::stdout().lock().write_all(dot.as_bytes())?;
            } else {
                write_text(out.claim()?, &dot)?;
            }
        }
        Command::Generate { problems, solutions, seed, out } => {
            let dir = out.fresh_dir()?;
            let manifest = generate(&CorpusRecipe::new(problems, solutions, seed), dir)?;
            eprintln!("generate: {} files in {} groups", manifest.file_count(), manifest.groups.len());
        }
    }
    Ok(())
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            if let Some(reason) = e.render().to_string().lines().next().filter(|l| l.starts_with("error")) {
                eprintln!("{reason}");
            }
            eprintln!("{SYNOPSIS}");
            return 1;
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("--jobs must be at least 1\n{SYNOPSIS}");
            return 1;
        }
        // a second configuration in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
