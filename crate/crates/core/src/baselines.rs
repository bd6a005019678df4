//! Token-based clone detectors used as non-learned reference points: line
//! run matching, greedy tiling over canonical tokens, and token edit distance.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{canonical_tokens, parse_source, tokenize, LexError, SourceError, Token, TokenKind};

pub const DEFAULT_MIN_BLOCK: usize = 2;
pub const DEFAULT_MIN_TILE: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("cannot tokenize: {0}")]
    Lex(#[from] LexError),
    #[error("cannot parse: {0}")]
    Parse(#[from] SourceError),
    #[error("block and tile sizes must be positive")]
    ZeroSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "detector")]
pub enum ScoreDetail {
    Lines { matched: usize, lines_a: usize, lines_b: usize },
    Tiles { covered: usize, len_a: usize, len_b: usize },
    Edits { distance: usize, len_a: usize, len_b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    /// Always within `[0, 1]`.
    pub value: f64,
    pub detail: ScoreDetail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    Line,
    Canonical,
    Edit,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::Line, Detector::Canonical, Detector::Edit];

    pub fn name(self) -> &'static str {
        match self {
            Detector::Line => "line",
            Detector::Canonical => "canonical",
            Detector::Edit => "edit",
        }
    }

    /// Scores a pair with the default block and tile sizes.
    pub fn score(self, a: &str, b: &str) -> Result<SimilarityScore, BaselineError> {
        match self {
            Detector::Line => line_similarity(a, b, DEFAULT_MIN_BLOCK),
            Detector::Canonical => canonical_similarity(a, b, DEFAULT_MIN_TILE),
            Detector::Edit => edit_similarity(a, b),
        }
    }
}

impl std::str::FromStr for Detector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Detector::ALL.into_iter().find(|d| d.name() == s).ok_or_else(|| format!("unknown detector `{s}`"))
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Source lines with comments dropped and tokens joined by single spaces.
/// Blank lines vanish.
pub fn normalized_lines(source: &str) -> Result<Vec<String>, LexError> {
    let mut lines: Vec<(usize, String)> = Vec::new();
    for t in tokenize(source)? {
        if t.kind == TokenKind::Comment {
            continue;
        }
        let text = t.text.split_whitespace().collect::<Vec<_>>().join(" ");
        match lines.last_mut() {
            Some((line, acc)) if *line == t.line => {
                acc.push(' ');
                acc.push_str(&text);
            }
            _ => lines.push((t.line, text)),
        }
    }
    Ok(lines.into_iter().map(|(_, l)| l).collect())
}

/// Marks every element of `a` and `b` that lies inside a common run of at
/// least `min_run` consecutive equal elements.
pub fn mark_common_runs<T: PartialEq>(a: &[T], b: &[T], min_run: usize) -> (Vec<bool>, Vec<bool>) {
    let (n, m) = (a.len(), b.len());
    let mut mark_a = vec![false; n];
    let mut mark_b = vec![false; m];
    // run[j] = length of the common run ending at (i, j)
    let mut run = vec![0usize; m + 1];
    for i in 0..n {
        let mut next = vec![0usize; m + 1];
        for j in 0..m {
            if a[i] == b[j] {
                next[j + 1] = run[j] + 1;
            }
        }
        for j in 0..m {
            let len = next[j + 1];
            let maximal = len > 0 && (i + 1 == n || j + 1 == m || a[i + 1] != b[j + 1]);
            if maximal && len >= min_run {
                mark_a[i + 1 - len..=i].iter_mut().for_each(|x| *x = true);
                mark_b[j + 1 - len..=j].iter_mut().for_each(|x| *x = true);
            }
        }
        run = next;
    }
    (mark_a, mark_b)
}

/// Share of lines inside runs of at least `min_block` consecutive normalized
/// lines found in both files. The matched count is the smaller of the two
/// sides' marked counts, divided by the longer file's line count.
pub fn line_similarity(a: &str, b: &str, min_block: usize) -> Result<SimilarityScore, BaselineError> {
    if min_block == 0 {
        return Err(BaselineError::ZeroSize);
    }
    let (la, lb) = (normalized_lines(a)?, normalized_lines(b)?);
    let (ma, mb) = mark_common_runs(&la, &lb, min_block);
    let count = |m: &[bool]| m.iter().filter(|x| **x).count();
    let matched = count(&ma).min(count(&mb));
    let den = la.len().max(lb.len());
    Ok(SimilarityScore {
        value: ratio(matched, den),
        detail: ScoreDetail::Lines { matched, lines_a: la.len(), lines_b: lb.len() },
    })
}

/// Greedy string tiling: repeatedly takes the longest unmarked common
/// substrings (at least `min_tile` long) as tiles. Returns the number of
/// elements of either sequence covered by tiles.
pub fn greedy_tiling<T: PartialEq>(a: &[T], b: &[T], min_tile: usize) -> usize {
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut covered = 0;
    loop {
        let mut best = min_tile;
        let mut matches: Vec<(usize, usize, usize)> = Vec::new();
        for p in 0..a.len() {
            if used_a[p] {
                continue;
            }
            for t in 0..b.len() {
                let mut j = 0;
                while p + j < a.len() && t + j < b.len() && !used_a[p + j] && !used_b[t + j] && a[p + j] == b[t + j] {
                    j += 1;
                }
                if j == best {
                    matches.push((p, t, j));
                } else if j > best {
                    best = j;
                    matches.clear();
                    matches.push((p, t, j));
                }
            }
        }
        for (p, t, len) in matches {
            if used_a[p..p + len].iter().any(|x| *x) || used_b[t..t + len].iter().any(|x| *x) {
                continue;
            }
            used_a[p..p + len].iter_mut().for_each(|x| *x = true);
            used_b[t..t + len].iter_mut().for_each(|x| *x = true);
            covered += len;
        }
        if best == min_tile {
            return covered;
        }
    }
}

/// `2·covered / (len_a + len_b)` over canonical token streams. Equal streams
/// score 1 even when shorter than `min_tile`. Arguments are put in a fixed
/// order first so the greedy choice cannot make the score asymmetric.
pub fn canonical_similarity(a: &str, b: &str, min_tile: usize) -> Result<SimilarityScore, BaselineError> {
    if min_tile == 0 {
        return Err(BaselineError::ZeroSize);
    }
    let ta = canonical_tokens(&parse_source(a)?);
    let tb = canonical_tokens(&parse_source(b)?);
    let (x, y) = if ta <= tb { (&ta, &tb) } else { (&tb, &ta) };
    let covered = if x == y { x.len() } else { greedy_tiling(x, y, min_tile) };
    Ok(SimilarityScore {
        value: ratio(2 * covered, ta.len() + tb.len()),
        detail: ScoreDetail::Tiles { covered, len_a: ta.len(), len_b: tb.len() },
    })
}

/// Token texts with comments dropped and every identifier replaced by `VAR`.
/// Directives other than `#include` are split into tokens and abstracted the
/// same way, so renaming inside macro bodies does not show.
pub fn abstracted_tokens(source: &str) -> Result<Vec<String>, LexError> {
    let mut out = Vec::new();
    push_abstracted(&tokenize(source)?, &mut out);
    Ok(out)
}

fn push_abstracted(tokens: &[Token], out: &mut Vec<String>) {
    for t in tokens {
        match t.kind {
            TokenKind::Comment => {}
            TokenKind::Identifier => out.push("VAR".to_string()),
            TokenKind::PreprocessorDirective => {
                let body = t.text.trim_start_matches('#').trim_start();
                let word_end = body.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(body.len());
                let (word, rest) = body.split_at(word_end);
                match tokenize(rest) {
                    Ok(inner) if word != "include" => {
                        out.push(format!("#{word}"));
                        push_abstracted(&inner, out);
                    }
                    _ => out.push(t.text.clone()),
                }
            }
            _ => out.push(t.text.clone()),
        }
    }
}

/// `1 − D / max(len_a, len_b)` with `D` the Levenshtein distance between the
/// identifier-abstracted token streams.
pub fn edit_similarity(a: &str, b: &str) -> Result<SimilarityScore, BaselineError> {
    let (ta, tb) = (abstracted_tokens(a)?, abstracted_tokens(b)?);
    Ok(edit_score(&ta, &tb))
}

pub fn edit_score(ta: &[String], tb: &[String]) -> SimilarityScore {
    let distance = strsim::generic_levenshtein(&ta.iter().collect::<Vec<_>>(), &tb.iter().collect::<Vec<_>>());
    let longest = ta.len().max(tb.len());
    SimilarityScore {
        value: if longest == 0 { 1.0 } else { 1.0 - distance as f64 / longest as f64 },
        detail: ScoreDetail::Edits { distance, len_a: ta.len(), len_b: tb.len() },
    }
}

/// One scored pair; `score` is `None` when the detector could not process
/// either file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub file_a: String,
    pub file_b: String,
    pub detector: Detector,
    pub score: Option<f64>,
}

/// Scores every unordered pair `(i, j)` with `i < j` of `(name, source)` files.
pub fn score_all_pairs(files: &[(String, String)], detector: Detector) -> Vec<PairScore> {
    let pairs: Vec<(usize, usize)> =
        (0..files.len()).flat_map(|i| (i + 1..files.len()).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| PairScore {
            file_a: files[i].0.clone(),
            file_b: files[j].0.clone(),
            detector,
            score: detector.score(&files[i].1, &files[j].1).ok().map(|s| s.value),
        })
        .collect()
}

/// Full similarity matrix; unscored pairs and files count as 0, the
/// diagonal as 1.
pub fn similarity_matrix(sources: &[String], detector: Detector) -> Vec<Vec<f64>> {
    let n = sources.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| detector.score(&sources[i], &sources[j]).map_or(0.0, |s| s.value)).collect())
        .collect();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = 1.0;
        for (off, &v) in upper[i].iter().enumerate() {
            let j = i + 1 + off;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// CSV with header `file_a,file_b,detector,score`; unscored pairs leave the
/// score empty.
pub fn write_scores_csv<W: Write>(scores: &[PairScore], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["file_a", "file_b", "detector", "score"])?;
    for s in scores {
        let score = s.score.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([s.file_a.as_str(), s.file_b.as_str(), s.detector.name(), score.as_str()])?;
    }
    w.flush()?;
    Ok(())
}
