//! Augmentation recipe and its YAML form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    CommentsEdit,
    RenameVariables,
    RenameFunctions,
    SwapIfElse,
    RearrangeFunctionDecls,
    ForToWhile,
    WhileToFor,
    PrintfToCout,
    ExpandMacros,
}

impl TransformKind {
    /// All kinds in application order.
    pub const ALL: [TransformKind; 9] = [
        TransformKind::CommentsEdit,
        TransformKind::RenameVariables,
        TransformKind::RenameFunctions,
        TransformKind::SwapIfElse,
        TransformKind::RearrangeFunctionDecls,
        TransformKind::ForToWhile,
        TransformKind::WhileToFor,
        TransformKind::PrintfToCout,
        TransformKind::ExpandMacros,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::CommentsEdit => "comments_edit",
            TransformKind::RenameVariables => "rename_variables",
            TransformKind::RenameFunctions => "rename_functions",
            TransformKind::SwapIfElse => "swap_if_else",
            TransformKind::RearrangeFunctionDecls => "rearrange_function_decls",
            TransformKind::ForToWhile => "for_to_while",
            TransformKind::WhileToFor => "while_to_for",
            TransformKind::PrintfToCout => "printf_to_cout",
            TransformKind::ExpandMacros => "expand_macros",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransformKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ConfigError::UnknownTransformation(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown transformation `{0}`")]
    UnknownTransformation(String),
    #[error("probability {probability} for `{kind}` is outside [0, 1]")]
    ProbabilityOutOfRange { kind: TransformKind, probability: f64 },
    #[error("name_pool must not be empty")]
    EmptyNamePool,
    #[error("invalid name `{0}` in name_pool")]
    InvalidName(String),
    #[error("comment_pool must not be empty")]
    EmptyCommentPool,
    #[error("invalid YAML: {0}")]
    Yaml(#[from] serde_yaml::Error),
}

pub const DEFAULT_PROBABILITY: f64 = 0.3;
pub const DEFAULT_COPIES: usize = 4;

const DEFAULT_NAMES: &[&str] = &[
    "ddk", "sdd", "j", "tj", "ai", "acc", "aux", "buf", "cnt", "cur", "idx", "itm", "lhs", "rhs", "nxt",
    "pos", "res", "tmp", "val", "qq",
];

const DEFAULT_COMMENTS: &[&str] = &[
    "// 'for'",
    "// looooop",
    "// read input",
    "// main part",
    "// update state",
    "// compute answer",
    "/* helper */",
    "/* check bounds */",
];

/// Recipe for producing augmented copies of a source file.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformConfig {
    pub copies_per_file: usize,
    pub probability: BTreeMap<TransformKind, f64>,
    pub seed: u64,
    pub name_pool: Vec<String>,
    pub comment_pool: Vec<String>,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            copies_per_file: DEFAULT_COPIES,
            probability: TransformKind::ALL.into_iter().map(|k| (k, DEFAULT_PROBABILITY)).collect(),
            seed: 0,
            name_pool: DEFAULT_NAMES.iter().map(|s| s.to_string()).collect(),
            comment_pool: DEFAULT_COMMENTS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TransformConfig {
    /// Same probability for every kind.
    pub fn uniform(p: f64) -> Self {
        let mut c = TransformConfig::default();
        for v in c.probability.values_mut() {
            *v = p;
        }
        c
    }

    pub fn probability_of(&self, kind: TransformKind) -> f64 {
        self.probability.get(&kind).copied().unwrap_or(0.0)
    }

    /// Expected number of applied kinds per copy, assuming every kind has a site.
    pub fn expected_applied(&self) -> f64 {
        TransformKind::ALL.iter().map(|k| self.probability_of(*k)).sum()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (&kind, &probability) in &self.probability {
            if !(0.0..=1.0).contains(&probability) {
                return Err(ConfigError::ProbabilityOutOfRange { kind, probability });
            }
        }
        if self.name_pool.is_empty() {
            return Err(ConfigError::EmptyNamePool);
        }
        for n in &self.name_pool {
            let ok = n.chars().next().is_some_and(|c| c == '_' || c.is_ascii_alphabetic())
                && n.chars().all(|c| c == '_' || c.is_ascii_alphanumeric())
                && !crate::lang::lexer::is_keyword(n);
            if !ok {
                return Err(ConfigError::InvalidName(n.clone()));
            }
        }
        if self.comment_pool.is_empty() {
            return Err(ConfigError::EmptyCommentPool);
        }
        Ok(())
    }

    pub fn from_yaml_str(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = serde_yaml::from_str(text)?;
        let config = file.into_config()?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_yaml_string(&self) -> String {
        serde_yaml::to_string(&ConfigFile::from_config(self)).expect("config serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TransformEntry {
    name: String,
    probability: f64,
}

/// On-disk layout. Kinds missing from `transformations` are disabled; a
/// missing `transformations` key keeps the defaults.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default = "default_copies")]
    copies_per_file: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    transformations: Option<Vec<TransformEntry>>,
    #[serde(default)]
    name_pool: Option<Vec<String>>,
    #[serde(default)]
    comment_pool: Option<Vec<String>>,
}

fn default_copies() -> usize {
    DEFAULT_COPIES
}

impl ConfigFile {
    fn into_config(self) -> Result<TransformConfig, ConfigError> {
        let mut config = TransformConfig { copies_per_file: self.copies_per_file, seed: self.seed, ..Default::default() };
        if let Some(entries) = self.transformations {
            config.probability = TransformKind::ALL.into_iter().map(|k| (k, 0.0)).collect();
            for e in entries {
                config.probability.insert(e.name.parse()?, e.probability);
            }
        }
        if let Some(p) = self.name_pool {
            config.name_pool = p;
        }
        if let Some(p) = self.comment_pool {
            config.comment_pool = p;
        }
        Ok(config)
    }

    fn from_config(c: &TransformConfig) -> Self {
        ConfigFile {
            copies_per_file: c.copies_per_file,
            seed: c.seed,
            transformations: Some(
                TransformKind::ALL
                    .iter()
                    .map(|k| TransformEntry { name: k.name().to_string(), probability: c.probability_of(*k) })
                    .collect(),
            ),
            name_pool: Some(c.name_pool.clone()),
            comment_pool: Some(c.comment_pool.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = TransformConfig::default();
        assert_eq!(c.copies_per_file, 4);
        assert_eq!(c.probability.len(), 9);
        assert!((c.expected_applied() - 2.7).abs() < 1e-12);
        c.validate().unwrap();
    }

    #[test]
    fn yaml_round_trip() {
        let mut c = TransformConfig::default();
        c.seed = 99;
        c.probability.insert(TransformKind::SwapIfElse, 1.0);
        let back = TransformConfig::from_yaml_str(&c.to_yaml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn yaml_subset_disables_the_rest() {
        let c = TransformConfig::from_yaml_str(
            "copies_per_file: 2\nseed: 5\ntransformations:\n  - name: for_to_while\n    probability: 0.5\n",
        )
        .unwrap();
        assert_eq!(c.copies_per_file, 2);
        assert_eq!(c.probability_of(TransformKind::ForToWhile), 0.5);
        assert_eq!(c.probability_of(TransformKind::CommentsEdit), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            TransformConfig::from_yaml_str("transformations:\n  - name: obfuscate\n    probability: 0.1\n"),
            Err(ConfigError::UnknownTransformation(_))
        ));
        assert!(matches!(
            TransformConfig::from_yaml_str("transformations:\n  - name: swap_if_else\n    probability: 1.5\n"),
            Err(ConfigError::ProbabilityOutOfRange { .. })
        ));
        assert!(matches!(TransformConfig::from_yaml_str("name_pool: [\"9x\"]"), Err(ConfigError::InvalidName(_))));
        assert!(matches!(TransformConfig::from_yaml_str("copies_per_file: -1"), Err(ConfigError::Yaml(_))));
    }
}
