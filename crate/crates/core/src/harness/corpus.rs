use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::lang::parse_source;
use crate::transform::{list_sources, Manifest, ManifestGroup, SkippedFile, MANIFEST_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Plain `<problem>/<file>` tree; every problem is one clone group.
    PojStyle,
    /// A manifest lists the clone groups.
    AugmentedStyle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFile {
    /// Path relative to the corpus root.
    pub id: String,
    pub problem: String,
    pub group: usize,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub files: Vec<CorpusFile>,
    pub origin: Origin,
    pub skipped: Vec<SkippedFile>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// File indices per problem id.
    pub fn problems(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, f) in self.files.iter().enumerate() {
            out.entry(f.problem.as_str()).or_default().push(i);
        }
        out
    }

    /// File indices per clone group.
    pub fn groups(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, f) in self.files.iter().enumerate() {
            out.entry(f.group).or_default().push(i);
        }
        out
    }

    /// Retrieval depth matching the corpus: the smallest clone group size
    /// minus one, so every query can in principle fill its list.
    pub fn default_r(&self) -> Option<usize> {
        self.groups().values().map(Vec::len).filter(|&n| n > 1).min().map(|n| n - 1)
    }

    fn subset(&self, keep: impl Fn(&CorpusFile) -> bool) -> Corpus {
        Corpus { files: self.files.iter().filter(|f| keep(f)).cloned().collect(), origin: self.origin, skipped: Vec::new() }
    }

    /// Writes the files under `dir`, plus a manifest for augmented corpora.
    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for f in &self.files {
            let path = dir.join(&f.id);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
            }
            fs::write(&path, &f.source).map_err(|e| HarnessError::io(&path, e))?;
        }
        if self.origin == Origin::AugmentedStyle {
            let groups = self
                .groups()
                .into_iter()
                .map(|(id, members)| ManifestGroup {
                    id,
                    problem: self.files[members[0]].problem.clone(),
                    files: members.iter().map(|&i| self.files[i].id.clone()).collect(),
                })
                .collect();
            Manifest { groups, skipped: self.skipped.clone() }.save(dir)?;
        }
        Ok(())
    }
}

fn read_checked(root: &Path, id: &str) -> Result<Result<String, String>, HarnessError> {
    let path = root.join(id);
    let bytes = fs::read(&path).map_err(|e| HarnessError::io(&path, e))?;
    let Ok(text) = String::from_utf8(bytes) else {
        return Ok(Err("not valid UTF-8".to_string()));
    };
    Ok(match parse_source(&text) {
        Ok(_) => Ok(text),
        Err(e) => Err(e.to_string()),
    })
}

/// Loads a dataset directory. With a manifest the clone groups come from it;
/// otherwise each problem directory is one group. Unparseable files are
/// listed in `skipped`.
pub fn ingest(root: &Path) -> Result<Corpus, HarnessError> {
    if !root.is_dir() {
        return Err(HarnessError::io(root, std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")));
    }
    let mut corpus = if root.join(MANIFEST_FILE).is_file() {
        let manifest = Manifest::load(root)?;
        let mut corpus = Corpus { files: Vec::new(), origin: Origin::AugmentedStyle, skipped: manifest.skipped };
        for g in manifest.groups {
            for id in g.files {
                match read_checked(root, &id)? {
                    Ok(source) => corpus.files.push(CorpusFile { id, problem: g.problem.clone(), group: g.id, source }),
                    Err(reason) => corpus.skipped.push(SkippedFile { path: id, reason }),
                }
            }
        }
        corpus
    } else {
        let mut corpus = Corpus { files: Vec::new(), origin: Origin::PojStyle, skipped: Vec::new() };
        let mut group_of: BTreeMap<String, usize> = BTreeMap::new();
        for (problem, file) in list_sources(root)? {
            let id = format!("{problem}/{file}");
            let next = group_of.len();
            let group = *group_of.entry(problem.clone()).or_insert(next);
            match read_checked(root, &id)? {
                Ok(source) => corpus.files.push(CorpusFile { id, problem, group, source }),
                Err(reason) => corpus.skipped.push(SkippedFile { path: id, reason }),
            }
        }
        corpus
    };
    if corpus.files.is_empty() {
        return Err(HarnessError::EmptyCorpus);
    }
    corpus.files.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(corpus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitUnit {
    ByClass,
    ByGroup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    /// Train, validation and test shares.
    pub ratios: [f64; 3],
    /// Defaults to classes for plain trees and clone groups for manifests.
    pub unit: Option<SplitUnit>,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { ratios: [0.6, 0.2, 0.2], unit: None, seed: 0 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(HarnessError::InvalidSplit(format!("ratios must be positive, got {:?}", self.ratios)));
        }
        let sum: f64 = self.ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(HarnessError::InvalidSplit(format!("ratios sum to {sum}, not 1")));
        }
        Ok(())
    }

    pub fn from_yaml_str(text: &str) -> Result<Self, HarnessError> {
        let spec: SplitSpec = serde_yaml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn unit_for(&self, origin: Origin) -> SplitUnit {
        self.unit.unwrap_or(match origin {
            Origin::PojStyle => SplitUnit::ByClass,
            Origin::AugmentedStyle => SplitUnit::ByGroup,
        })
    }
}

/// Largest-remainder apportionment of `n` units; ties in the remainder go
/// to the earlier partition.
pub fn apportion(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts: [usize; 3] = [0; 3];
    for (c, e) in counts.iter_mut().zip(&exact) {
        *c = (e + 1e-9).floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    let frac = |i: usize| exact[i] - counts[i] as f64;
    order.sort_by(|&a, &b| frac(b).partial_cmp(&frac(a)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Train, validation and test corpora with disjoint split units.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus, Corpus), HarnessError> {
    spec.validate()?;
    let unit = spec.unit_for(corpus.origin);
    let key = |f: &CorpusFile| match unit {
        SplitUnit::ByClass => f.problem.clone(),
        SplitUnit::ByGroup => format!("{:020}", f.group),
    };
    let mut units: Vec<String> = corpus.files.iter().map(key).collect::<BTreeSet<_>>().into_iter().collect();
    if units.len() < 5 {
        return Err(HarnessError::TooFewUnits(units.len()));
    }
    units.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let [a, b, _] = apportion(units.len(), &spec.ratios);
    let part: BTreeMap<String, usize> =
        units.into_iter().enumerate().map(|(i, u)| (u, if i < a { 0 } else if i < a + b { 1 } else { 2 })).collect();
    let pick = |p: usize| corpus.subset(|f| part[&key(f)] == p);
    Ok((pick(0), pick(1), pick(2)))
}
