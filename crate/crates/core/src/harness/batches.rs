use rand::seq::SliceRandom;
use rand::Rng;

use super::{Corpus, HarnessError};

/// One training example: indices into the corpus files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingPair {
    pub anchor: usize,
    pub positive: usize,
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub pairs: Vec<TrainingPair>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn groups(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.group).collect()
    }
}

/// Uniform pick among `members` other than `anchor`; `None` for a singleton.
pub fn draw_positive<R: Rng + ?Sized>(members: &[usize], anchor: usize, rng: &mut R) -> Option<usize> {
    let others: Vec<usize> = members.iter().copied().filter(|&m| m != anchor).collect();
    others.choose(rng).copied()
}

/// Shuffles every file with a clone-group peer into batches of exactly
/// `batch_size` pairs. No batch holds two anchors of one group, so in-batch
/// negatives are never clones of the anchor. With `same_problem` each batch
/// draws from a single problem. Leftovers that cannot fill a batch are dropped.
pub fn make_batches<R: Rng + ?Sized>(
    corpus: &Corpus,
    batch_size: usize,
    same_problem: bool,
    rng: &mut R,
) -> Result<Vec<Batch>, HarnessError> {
    if batch_size < 2 {
        return Err(HarnessError::InvalidConfig(format!("batch size must be at least 2, got {batch_size}")));
    }
    let groups = corpus.groups();
    let mut anchors: Vec<usize> = (0..corpus.len()).filter(|&i| groups[&corpus.files[i].group].len() > 1).collect();
    anchors.shuffle(rng);
    let buckets: Vec<Vec<usize>> = if same_problem {
        let problems = corpus.problems();
        let mut by_problem: Vec<Vec<usize>> = problems.keys().map(|_| Vec::new()).collect();
        let slot: std::collections::BTreeMap<&str, usize> = problems.keys().enumerate().map(|(i, p)| (*p, i)).collect();
        for &a in &anchors {
            by_problem[slot[corpus.files[a].problem.as_str()]].push(a);
        }
        by_problem
    } else {
        vec![anchors]
    };

    let mut batches = Vec::new();
    for bucket in buckets {
        let mut open: Vec<Batch> = Vec::new();
        for anchor in bucket {
            let group = corpus.files[anchor].group;
            let positive = draw_positive(&groups[&group], anchor, rng).expect("anchors have peers");
            let pair = TrainingPair { anchor, positive, group };
            match open.iter().position(|b| b.pairs.iter().all(|p| p.group != group)) {
                Some(i) => {
                    open[i].pairs.push(pair);
                    if open[i].len() == batch_size {
                        batches.push(open.remove(i));
                    }
                }
                None => open.push(Batch { pairs: vec![pair] }),
            }
        }
    }
    batches.shuffle(rng);
    Ok(batches)
}
