//! Plagiarism-mimicking source transformations and corpus augmentation.

mod config;
mod corpus;
mod macros;
mod rewrite;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{ConfigError, TransformConfig, TransformKind, DEFAULT_COPIES, DEFAULT_PROBABILITY};
pub use corpus::{augment_corpus, file_seed, list_sources, CorpusError, Manifest, ManifestGroup, SkippedFile, MANIFEST_FILE};

use crate::lang::{parse_source, render, Ast};
use rewrite::Outcome;

/// What happened to one augmented copy.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformReport {
    pub applied: Vec<TransformKind>,
    pub skipped: Vec<(TransformKind, String)>,
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("{kind} produced an invalid tree: {detail}")]
    InvariantBroken { kind: TransformKind, detail: String },
}

/// Result of attempting a single transformation.
#[derive(Debug, Clone)]
pub struct Application {
    pub ast: Ast,
    pub applied: bool,
    /// Why nothing changed, when `applied` is false.
    pub reason: Option<String>,
}

/// Applies one transformation to a copy of `ast`.
///
/// When the kind has no site the input is returned unchanged with
/// `applied == false`. The rewritten tree is checked to validate and to
/// re-parse after rendering.
pub fn apply_one<R: Rng + ?Sized>(
    ast: &Ast,
    kind: TransformKind,
    rng: &mut R,
    config: &TransformConfig,
) -> Result<Application, TransformError> {
    let mut out = ast.clone();
    let outcome = match kind {
        TransformKind::CommentsEdit => rewrite::comments_edit(&mut out, rng, config),
        TransformKind::RenameVariables => rewrite::rename_variables(&mut out, rng, config),
        TransformKind::RenameFunctions => rewrite::rename_functions(&mut out, rng, config),
        TransformKind::SwapIfElse => rewrite::swap_if_else(&mut out),
        TransformKind::RearrangeFunctionDecls => rewrite::rearrange_function_decls(&mut out, rng),
        TransformKind::ForToWhile => rewrite::for_to_while(&mut out),
        TransformKind::WhileToFor => rewrite::while_to_for(&mut out),
        TransformKind::PrintfToCout => rewrite::printf_to_cout(&mut out),
        TransformKind::ExpandMacros => rewrite::expand_macros(&mut out),
    };
    match outcome {
        Outcome::NotApplicable(reason) => Ok(Application { ast: ast.clone(), applied: false, reason: Some(reason) }),
        Outcome::Applied => {
            out.compact();
            let broken = |detail: String| TransformError::InvariantBroken { kind, detail };
            out.validate().map_err(broken)?;
            parse_source(&render(&out)).map_err(|e| broken(e.to_string()))?;
            Ok(Application { ast: out, applied: true, reason: None })
        }
    }
}

/// Random stream for one augmented copy, derived from the run seed, the
/// file's seed and the copy index only.
pub fn copy_rng(seed: u64, file_seed: u64, copy: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&file_seed.to_le_bytes());
    key[16..24].copy_from_slice(&(copy as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Produces `config.copies_per_file` augmented versions of `ast`.
///
/// Every kind is tried in table order with its own Bernoulli draw. The coin
/// and a sub-seed are drawn for every kind whether or not it fires, so the
/// pattern for one kind does not depend on how much randomness another
/// kind consumed.
pub fn augment_file(
    ast: &Ast,
    config: &TransformConfig,
    file_seed: u64,
) -> Result<Vec<(Ast, TransformReport)>, TransformError> {
    (0..config.copies_per_file)
        .map(|copy| {
            let mut rng = copy_rng(config.seed, file_seed, copy);
            let mut current = ast.clone();
            let mut report = TransformReport::default();
            for kind in TransformKind::ALL {
                let fire = rng.gen_bool(config.probability_of(kind).clamp(0.0, 1.0));
                let sub_seed: u64 = rng.gen();
                if !fire {
                    continue;
                }
                let app = apply_one(&current, kind, &mut ChaCha8Rng::seed_from_u64(sub_seed), config)?;
                if app.applied {
                    report.applied.push(kind);
                    current = app.ast;
                } else {
                    report.skipped.push((kind, app.reason.unwrap_or_default()));
                }
            }
            Ok((current, report))
        })
        .collect()
}

#[cfg(test)]
mod tests;
