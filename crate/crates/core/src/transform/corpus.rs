//! Directory-level augmentation: `dataset/<problem>/<file>.c` in, the same
//! layout plus augmented siblings and a clone-group manifest out.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{augment_file, TransformConfig, TransformError};
use crate::lang::{parse_source, render};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SOURCE_EXTENSIONS: &[&str] = &["c", "cpp", "cc"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Transform { path: String, source: TransformError },
    #[error("{path}: malformed manifest: {source}")]
    Manifest { path: PathBuf, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestGroup {
    pub id: usize,
    pub problem: String,
    /// Paths relative to the corpus root, original first.
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

/// Clone groups of a corpus: an original file and its augmentations share a group.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub groups: Vec<ManifestGroup>,
    #[serde(default)]
    pub skipped: Vec<SkippedFile>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Manifest, CorpusError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|source| CorpusError::Manifest { path, source })
    }

    pub fn save(&self, dir: &Path) -> Result<(), CorpusError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(io_err(&path))
    }

    pub fn file_count(&self) -> usize {
        self.groups.iter().map(|g| g.files.len()).sum()
    }
}

/// FNV-1a hash of a relative path; the per-file seed.
pub fn file_seed(relative_path: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in relative_path.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        out.push(entry.map_err(io_err(dir))?.path());
    }
    out.sort();
    Ok(out)
}

/// Source files of a `<problem>/<file>` tree as (problem, file name) pairs.
pub fn list_sources(input_dir: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let mut files = Vec::new();
    for problem in sorted_entries(input_dir)? {
        if !problem.is_dir() {
            continue;
        }
        let pname = problem.file_name().unwrap_or_default().to_string_lossy().into_owned();
        for f in sorted_entries(&problem)? {
            let ext = f.extension().and_then(|e| e.to_str()).unwrap_or("");
            if f.is_file() && SOURCE_EXTENSIONS.contains(&ext) {
                files.push((pname.clone(), f.file_name().unwrap_or_default().to_string_lossy().into_owned()));
            }
        }
    }
    Ok(files)
}

fn augmented_name(file: &str, k: usize) -> String {
    match file.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}.aug{k}.{ext}"),
        None => format!("{file}.aug{k}"),
    }
}

enum FileOutcome {
    Group { problem: String, files: Vec<String> },
    Skipped(SkippedFile),
}

/// Augments every source file under `input_dir` into `output_dir` and
/// writes `manifest.json` there.
///
/// Originals are copied verbatim, augmented copies are named
/// `<stem>.aug<k>.<ext>` with `k` starting at 1. Files that do not parse are
/// listed as skipped and not copied. Work is spread over the rayon pool;
/// results do not depend on scheduling.
pub fn augment_corpus(input_dir: &Path, output_dir: &Path, config: &TransformConfig) -> Result<Manifest, CorpusError> {
    let sources = list_sources(input_dir)?;
    fs::create_dir_all(output_dir).map_err(io_err(output_dir))?;
    let outcomes: Vec<Result<FileOutcome, CorpusError>> = sources
        .par_iter()
        .map(|(problem, file)| {
            let rel = format!("{problem}/{file}");
            let src_path = input_dir.join(problem).join(file);
            let bytes = fs::read(&src_path).map_err(io_err(&src_path))?;
            let Ok(text) = String::from_utf8(bytes) else {
                return Ok(FileOutcome::Skipped(SkippedFile { path: rel, reason: "not valid UTF-8".to_string() }));
            };
            let ast = match parse_source(&text) {
                Ok(a) => a,
                Err(e) => return Ok(FileOutcome::Skipped(SkippedFile { path: rel, reason: e.to_string() })),
            };
            let copies = augment_file(&ast, config, file_seed(&rel))
                .map_err(|source| CorpusError::Transform { path: rel.clone(), source })?;
            let dir = output_dir.join(problem);
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            let dst = dir.join(file);
            fs::write(&dst, &text).map_err(io_err(&dst))?;
            let mut files = vec![rel];
            for (k, (aug, _)) in copies.iter().enumerate() {
                let name = augmented_name(file, k + 1);
                let dst = dir.join(&name);
                fs::write(&dst, render(aug)).map_err(io_err(&dst))?;
                files.push(format!("{problem}/{name}"));
            }
            Ok(FileOutcome::Group { problem: problem.clone(), files })
        })
        .collect();

    let mut manifest = Manifest::default();
    for outcome in outcomes {
        match outcome? {
            FileOutcome::Group { problem, files } => {
                let id = manifest.groups.len();
                manifest.groups.push(ManifestGroup { id, problem, files });
            }
            FileOutcome::Skipped(s) => manifest.skipped.push(s),
        }
    }
    manifest.save(output_dir)?;
    Ok(manifest)
}
