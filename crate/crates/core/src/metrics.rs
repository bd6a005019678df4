//! Retrieval metrics: MAP@R and F1@R over an embedding or similarity index.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encode::{dot, norm, Embedding};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("query `{0}` is not in the index")]
    QueryMissing(String),
    #[error("index of {size} items cannot return {r} neighbours")]
    IndexTooSmall { size: usize, r: usize },
    #[error("duplicate item id `{0}`")]
    DuplicateId(String),
    #[error("expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("no item has a same-group peer")]
    NoQueries,
    #[error("r must be positive")]
    ZeroR,
}

/// Whether a query may retrieve itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    #[default]
    ExcludeSelf,
    IncludeSelf,
}

#[derive(Debug, Clone, PartialEq)]
enum Scores {
    /// Unit-normalized; zero vectors stay zero and are similar to nothing.
    Embeddings(Vec<Embedding>),
    Similarities(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalIndex {
    ids: Vec<String>,
    groups: Vec<usize>,
    scores: Scores,
}

impl RetrievalIndex {
    pub fn from_embeddings(items: Vec<(String, usize, Embedding)>) -> Result<Self, MetricError> {
        let dim = items.first().map_or(0, |i| i.2.len());
        let mut ids = Vec::with_capacity(items.len());
        let mut groups = Vec::with_capacity(items.len());
        let mut vectors = Vec::with_capacity(items.len());
        for (id, group, v) in items {
            if v.len() != dim {
                return Err(MetricError::ShapeMismatch { expected: dim, found: v.len() });
            }
            let n = norm(&v);
            vectors.push(if n > 0.0 { v.iter().map(|x| x / n).collect() } else { v });
            ids.push(id);
            groups.push(group);
        }
        Self::checked(ids, groups, Scores::Embeddings(vectors))
    }

    /// `rows[i][j]` is the similarity of item `j` as seen from query `i`.
    pub fn from_similarities(ids: Vec<String>, groups: Vec<usize>, rows: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        if groups.len() != ids.len() {
            return Err(MetricError::ShapeMismatch { expected: ids.len(), found: groups.len() });
        }
        if rows.len() != ids.len() {
            return Err(MetricError::ShapeMismatch { expected: ids.len(), found: rows.len() });
        }
        if let Some(r) = rows.iter().find(|r| r.len() != ids.len()) {
            return Err(MetricError::ShapeMismatch { expected: ids.len(), found: r.len() });
        }
        Self::checked(ids, groups, Scores::Similarities(rows))
    }

    fn checked(ids: Vec<String>, groups: Vec<usize>, scores: Scores) -> Result<Self, MetricError> {
        let mut seen = HashMap::with_capacity(ids.len());
        for id in &ids {
            if seen.insert(id.as_str(), ()).is_some() {
                return Err(MetricError::DuplicateId(id.clone()));
            }
        }
        Ok(RetrievalIndex { ids, groups, scores })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    fn similarity(&self, query: usize, item: usize) -> f64 {
        match &self.scores {
            Scores::Embeddings(v) => dot(&v[query], &v[item]),
            Scores::Similarities(rows) => rows[query][item],
        }
    }

    fn position(&self, id: &str) -> Result<usize, MetricError> {
        self.ids.iter().position(|i| i == id).ok_or_else(|| MetricError::QueryMissing(id.to_string()))
    }

    /// Positions of the `r` most similar items, most similar first, ties by
    /// ascending id.
    fn ranked(&self, query: usize, r: usize, mode: QueryMode) -> Result<Vec<usize>, MetricError> {
        if r == 0 {
            return Err(MetricError::ZeroR);
        }
        let pool = match mode {
            QueryMode::ExcludeSelf => self.len().saturating_sub(1),
            QueryMode::IncludeSelf => self.len(),
        };
        if pool < r {
            return Err(MetricError::IndexTooSmall { size: self.len(), r });
        }
        let mut scored: Vec<(f64, usize)> = (0..self.len())
            .filter(|&i| mode == QueryMode::IncludeSelf || i != query)
            .map(|i| (self.similarity(query, i), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| {
            b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then_with(|| self.ids[a.1].cmp(&self.ids[b.1]))
        };
        if r < scored.len() {
            scored.select_nth_unstable_by(r - 1, cmp);
            scored.truncate(r);
        }
        scored.sort_by(cmp);
        Ok(scored.into_iter().map(|(_, i)| i).collect())
    }
}

/// Ids of the `r` items most similar to `query`, the query itself excluded.
pub fn retrieve(index: &RetrievalIndex, query: &str, r: usize) -> Result<Vec<String>, MetricError> {
    let q = index.position(query)?;
    Ok(index.ranked(q, r, QueryMode::ExcludeSelf)?.into_iter().map(|i| index.ids[i].clone()).collect())
}

/// `(1/r) Σ P(i)·rel(i)` over the first `r` positions of `relevance`.
pub fn average_precision(relevance: &[bool], r: usize) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &rel) in relevance.iter().take(r).enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / r as f64
}

/// Harmonic mean of `hits/r` and `hits/relevant_total`; 0 when there are no hits.
pub fn f1_score(hits: usize, r: usize, relevant_total: usize) -> f64 {
    if hits == 0 {
        return 0.0;
    }
    let p = hits as f64 / r as f64;
    let rec = hits as f64 / relevant_total as f64;
    2.0 * p * rec / (p + rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub id: String,
    pub average_precision: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub map_at_r: f64,
    pub f1_at_r: f64,
    pub r: usize,
    pub queries: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_query: Option<Vec<QueryMetrics>>,
}

impl MetricReport {
    /// One header row and one value row.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["map_at_r", "f1_at_r", "r", "queries"])?;
        w.write_record([self.map_at_r.to_string(), self.f1_at_r.to_string(), self.r.to_string(), self.queries.to_string()])?;
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Both metrics in one pass. Items without a same-group peer are not queries.
pub fn evaluate_index(index: &RetrievalIndex, r: usize, mode: QueryMode, keep_per_query: bool) -> Result<MetricReport, MetricError> {
    let mut group_sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &g in &index.groups {
        *group_sizes.entry(g).or_default() += 1;
    }
    let queries: Vec<usize> = (0..index.len()).filter(|&i| group_sizes[&index.groups[i]] > 1).collect();
    if queries.is_empty() {
        return Err(MetricError::NoQueries);
    }
    let per_query: Vec<QueryMetrics> = queries
        .par_iter()
        .map(|&q| {
            let ranked = index.ranked(q, r, mode)?;
            let relevance: Vec<bool> = ranked.iter().map(|&i| index.groups[i] == index.groups[q]).collect();
            let hits = relevance.iter().filter(|x| **x).count();
            let total = match mode {
                QueryMode::ExcludeSelf => group_sizes[&index.groups[q]] - 1,
                QueryMode::IncludeSelf => group_sizes[&index.groups[q]],
            };
            Ok(QueryMetrics {
                id: index.ids[q].clone(),
                average_precision: average_precision(&relevance, r),
                f1: f1_score(hits, r, total),
            })
        })
        .collect::<Result<_, MetricError>>()?;
    let n = per_query.len() as f64;
    Ok(MetricReport {
        map_at_r: per_query.iter().map(|q| q.average_precision).sum::<f64>() / n,
        f1_at_r: per_query.iter().map(|q| q.f1).sum::<f64>() / n,
        r,
        queries: per_query.len(),
        per_query: keep_per_query.then_some(per_query),
    })
}

pub fn map_at_r(index: &RetrievalIndex, r: usize) -> Result<f64, MetricError> {
    Ok(evaluate_index(index, r, QueryMode::ExcludeSelf, false)?.map_at_r)
}

pub fn f1_at_r(index: &RetrievalIndex, r: usize) -> Result<f64, MetricError> {
    Ok(evaluate_index(index, r, QueryMode::ExcludeSelf, false)?.f1_at_r)
}
