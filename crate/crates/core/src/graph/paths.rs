//! code2seq-style path contexts: two leaf tokens and the chain of node kinds
//! connecting them through their lowest common ancestor.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{Ast, NodeId};

pub const DEFAULT_MAX_CONTEXTS: usize = 200;
pub const DEFAULT_MAX_PATH_LEN: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathContext {
    pub left_token: String,
    /// Node kinds from the left leaf to the right leaf, both included.
    pub path: Vec<String>,
    pub right_token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("tree has {0} leaves, at least 2 are needed")]
    NoLeafPair(usize),
}

impl PathContext {
    /// Context made of a single leaf, for trees too small to pair.
    pub fn degenerate(ast: &Ast, leaf: NodeId) -> PathContext {
        let t = ast.leaf_text(leaf).to_string();
        PathContext { left_token: t.clone(), path: vec![ast.kind(leaf).name().to_string()], right_token: t }
    }
}

/// Samples up to `max_contexts` leaf pairs whose connecting path has at most
/// `max_path_len` nodes.
///
/// When fewer pairs qualify than the cap, all of them are returned in leaf
/// order. Otherwise a uniform sample without replacement is drawn from `rng`
/// and returned in leaf order too. The endpoint with the smaller text is
/// always on the left.
pub fn extract_path_contexts<R: Rng + ?Sized>(
    ast: &Ast,
    max_contexts: usize,
    max_path_len: usize,
    rng: &mut R,
) -> Result<Vec<PathContext>, PathError> {
    let order = ast.preorder();
    let parents = ast.parents();
    let mut depth = vec![0usize; ast.nodes.len()];
    for &id in &order {
        if let Some(p) = parents[id.index()] {
            depth[id.index()] = depth[p.index()] + 1;
        }
    }
    let leaves: Vec<NodeId> = order.iter().copied().filter(|&id| ast.children(id).is_empty()).collect();
    if leaves.len() < 2 {
        return Err(PathError::NoLeafPair(leaves.len()));
    }

    let path_len = |a: NodeId, b: NodeId| -> usize {
        let (mut x, mut y) = (a, b);
        while depth[x.index()] > depth[y.index()] {
            x = parents[x.index()].expect("deeper node has a parent");
        }
        while depth[y.index()] > depth[x.index()] {
            y = parents[y.index()].expect("deeper node has a parent");
        }
        while x != y {
            x = parents[x.index()].expect("distinct nodes below the root");
            y = parents[y.index()].expect("distinct nodes below the root");
        }
        depth[a.index()] + depth[b.index()] - 2 * depth[x.index()] + 1
    };

    let mut pairs = Vec::new();
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            if path_len(leaves[i], leaves[j]) <= max_path_len {
                pairs.push((leaves[i], leaves[j]));
            }
        }
    }
    if pairs.len() > max_contexts {
        let mut picked = rand::seq::index::sample(rng, pairs.len(), max_contexts).into_vec();
        picked.sort_unstable();
        pairs = picked.into_iter().map(|k| pairs[k]).collect();
    }
    Ok(pairs.into_iter().map(|(a, b)| context(ast, &parents, &depth, a, b)).collect())
}

fn context(ast: &Ast, parents: &[Option<NodeId>], depth: &[usize], a: NodeId, b: NodeId) -> PathContext {
    let (mut up, mut down) = (vec![a], vec![b]);
    let (mut x, mut y) = (a, b);
    while depth[x.index()] > depth[y.index()] {
        x = parents[x.index()].unwrap();
        up.push(x);
    }
    while depth[y.index()] > depth[x.index()] {
        y = parents[y.index()].unwrap();
        down.push(y);
    }
    while x != y {
        x = parents[x.index()].unwrap();
        y = parents[y.index()].unwrap();
        up.push(x);
        down.push(y);
    }
    down.pop();
    up.extend(down.into_iter().rev());
    let mut path: Vec<String> = up.iter().map(|n| ast.kind(*n).name().to_string()).collect();
    let (mut left, mut right) = (ast.leaf_text(a).to_string(), ast.leaf_text(b).to_string());
    if right < left {
        std::mem::swap(&mut left, &mut right);
        path.reverse();
    }
    PathContext { left_token: left, path, right_token: right }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_source;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn single_pair_under_one_parent() {
        let ast = parse_source("int x = y;").unwrap();
        let ctx = extract_path_contexts(&ast, 200, 9, &mut rng()).unwrap();
        assert_eq!(ctx.len(), 1);
        assert_eq!(ctx[0].path, ["Identifier", "Decl", "Identifier"]);
        assert_eq!((ctx[0].left_token.as_str(), ctx[0].right_token.as_str()), ("x", "y"));
    }

    #[test]
    fn all_pairs_when_unlimited() {
        let ast = parse_source(crate::lang::parser::tests::FIGURE).unwrap();
        let n = ast.preorder().into_iter().filter(|&i| ast.children(i).is_empty()).count();
        let ctx = extract_path_contexts(&ast, usize::MAX, usize::MAX, &mut rng()).unwrap();
        assert_eq!(ctx.len(), n * (n - 1) / 2);
    }

    #[test]
    fn main_to_zero_path() {
        let ast = parse_source("int main(void){return 0;}").unwrap();
        let ctx = extract_path_contexts(&ast, 200, 9, &mut rng()).unwrap();
        let c = ctx.iter().find(|c| c.left_token == "0" && c.right_token == "main").unwrap();
        assert_eq!(c.path, ["Literal", "Return", "Block", "FunctionDef", "Identifier"]);
    }

    #[test]
    fn cap_and_reproducibility() {
        let ast = parse_source(crate::lang::parser::tests::FIGURE).unwrap();
        let a = extract_path_contexts(&ast, 10, 9, &mut rng()).unwrap();
        let b = extract_path_contexts(&ast, 10, 9, &mut rng()).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
        assert!(a.iter().all(|c| c.path.len() <= 9 && c.left_token <= c.right_token));
    }

    #[test]
    fn too_few_leaves() {
        let ast = parse_source("int main(){}").unwrap();
        let leaves = ast.preorder().into_iter().filter(|&i| ast.children(i).is_empty()).count();
        assert_eq!(leaves, 2);
        let empty = crate::lang::Ast::new();
        assert_eq!(extract_path_contexts(&empty, 5, 9, &mut rng()), Err(PathError::NoLeafPair(1)));
    }
}
