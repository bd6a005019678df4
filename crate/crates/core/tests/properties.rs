use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use clonelab::baselines::{line_similarity, Detector};
use clonelab::contrastive::{info_nce, simclr_batch_loss, supcon_batch_loss, swav_assign, MocoState, ProjectionHead, SwavState};
use clonelab::encode::{encode, encode_graph, gcn_layer, EncoderConfig, EncoderInput, EncoderKind, EncoderParams, Matrix};
use clonelab::graph::{build_graph, encoder_graph, extract_path_contexts, CodeGraph, Edge, EdgeKind};
use clonelab::harness::{make_batches, split, Corpus, CorpusFile, Origin, SplitSpec, SplitUnit};
use clonelab::lang::{canonical_tokens, parse_source, reconstruct, render, tokenize, Ast, NodeKind};
use clonelab::metrics::{evaluate_index, QueryMode, RetrievalIndex};
use clonelab::toy::{generate_sources, CorpusRecipe};
use clonelab::transform::{apply_one, augment_file, TransformConfig, TransformKind};

/// A toy program, optionally pushed through a few random transformations
/// so loops, helpers and output styles vary.
fn program() -> impl Strategy<Value = String> {
    (any::<u64>(), 0usize..6, any::<bool>()).prop_map(|(seed, pick, augment)| {
        let files = generate_sources(&CorpusRecipe::new(6, 1, seed)).unwrap();
        let source = files[pick].source.clone();
        if !augment {
            return source;
        }
        let ast = parse_source(&source).unwrap();
        let copies = augment_file(&ast, &TransformConfig::uniform(0.5), seed).unwrap();
        render(&copies[0].0)
    })
}

fn apply(source: &str, kind: TransformKind, seed: u64) -> Ast {
    let ast = parse_source(source).unwrap();
    apply_one(&ast, kind, &mut ChaCha8Rng::seed_from_u64(seed), &TransformConfig::default()).unwrap().ast
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn render_round_trips(src in program()) {
        let ast = parse_source(&src).unwrap();
        let again = parse_source(&render(&ast)).unwrap();
        prop_assert!(ast.structurally_equal(&again));
    }

    #[test]
    fn tokens_cover_the_source(src in program()) {
        let tokens = tokenize(&src).unwrap();
        prop_assert_eq!(reconstruct(&src, &tokens), src.clone());
        for pair in tokens.windows(2) {
            prop_assert!((pair[0].line, pair[0].column) < (pair[1].line, pair[1].column));
            prop_assert!(pair[0].end_offset() <= pair[1].offset);
        }
        prop_assert!(tokens.iter().all(|t| !t.text.is_empty() && src[t.offset..].starts_with(&t.text)));
    }

    #[test]
    fn lexical_kinds_keep_canonical_tokens(src in program(), seed in any::<u64>()) {
        let before = canonical_tokens(&parse_source(&src).unwrap());
        for kind in [TransformKind::CommentsEdit, TransformKind::RenameVariables, TransformKind::RenameFunctions] {
            let after = apply(&src, kind, seed);
            prop_assert_eq!(&canonical_tokens(&after), &before, "{}", kind);
        }
    }

    #[test]
    fn every_kind_reparses(src in program(), seed in any::<u64>()) {
        for kind in TransformKind::ALL {
            let out = apply(&src, kind, seed);
            prop_assert!(parse_source(&render(&out)).is_ok(), "{}", kind);
        }
    }

    #[test]
    fn renaming_is_injective(src in program(), seed in any::<u64>()) {
        let before = parse_source(&src).unwrap();
        let after = apply(&src, TransformKind::RenameVariables, seed);
        let decls = |ast: &Ast| ast.find_all(NodeKind::Decl).into_iter().filter_map(|d| ast.declared_name(d).map(str::to_string)).collect::<Vec<_>>();
        let (old, new) = (decls(&before), decls(&after));
        prop_assert_eq!(old.len(), new.len());
        let mut seen = std::collections::BTreeMap::new();
        for (o, n) in old.iter().zip(&new) {
            // one original may be declared in several scopes, but two originals never share a target
            if let Some(prev) = seen.insert(n.clone(), o.clone()) {
                prop_assert_eq!(&prev, o);
            }
        }
    }

    #[test]
    fn augmentation_is_deterministic(src in program(), seed in any::<u64>()) {
        let ast = parse_source(&src).unwrap();
        let config = TransformConfig::default();
        let a = augment_file(&ast, &config, seed).unwrap();
        let b = augment_file(&ast, &config, seed).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for ((x, rx), (y, ry)) in a.iter().zip(&b) {
            prop_assert_eq!(render(x), render(y));
            prop_assert_eq!(rx, ry);
        }
    }

    #[test]
    fn graph_edges_are_well_formed(src in program()) {
        let ast = parse_source(&src).unwrap();
        let g = build_graph(&ast);
        prop_assert_eq!(g.edges_of(EdgeKind::Ast).count(), g.node_count() - 1);
        prop_assert!(g.edges.iter().all(|e| e.src < g.node_count() && e.dst < g.node_count()));
        for e in g.edges_of(EdgeKind::PdgData) {
            prop_assert!(g.labels[e.src].starts_with("Decl"), "{}", g.labels[e.src]);
            prop_assert!(g.labels[e.dst].starts_with("Identifier"), "{}", g.labels[e.dst]);
        }
    }

    #[test]
    fn path_sampling_is_reproducible(src in program(), seed in any::<u64>()) {
        let ast = parse_source(&src).unwrap();
        let a = extract_path_contexts(&ast, 50, 9, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = extract_path_contexts(&ast, 50, 9, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|c| !c.path.is_empty() && c.left_token <= c.right_token));
    }

    #[test]
    fn baselines_are_symmetric_and_reflexive(a in program(), b in program()) {
        for d in Detector::ALL {
            let ab = d.score(&a, &b).unwrap().value;
            let ba = d.score(&b, &a).unwrap().value;
            prop_assert_eq!(ab, ba, "{:?}", d);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(d.score(&a, &a).unwrap().value, 1.0);
        }
    }

    #[test]
    fn abstracted_detectors_ignore_comments_and_renaming(src in program(), seed in any::<u64>()) {
        // compare rendered text with rendered text, since rendering drops redundant parentheses
        let base = render(&parse_source(&src).unwrap());
        for kind in [TransformKind::CommentsEdit, TransformKind::RenameVariables] {
            let out = render(&apply(&src, kind, seed));
            prop_assert_eq!(Detector::Canonical.score(&base, &out).unwrap().value, 1.0);
            prop_assert_eq!(Detector::Edit.score(&base, &out).unwrap().value, 1.0);
        }
    }

    #[test]
    fn line_similarity_shrinks_with_block_size(a in program(), b in program()) {
        let scores: Vec<f64> = (1..6).map(|k| line_similarity(&a, &b, k).unwrap().value).collect();
        prop_assert!(scores.windows(2).all(|w| w[1] <= w[0]), "{:?}", scores);
    }
}

fn small_params(kind: EncoderKind, seed: u64) -> EncoderParams {
    EncoderParams::init(&EncoderConfig { kind, dim: 5, vocab: 40, depth: 3 }, seed)
}

/// Relabels nodes by `perm` (old index to new index).
fn permuted(g: &CodeGraph, perm: &[usize]) -> CodeGraph {
    let mut labels = vec![String::new(); g.labels.len()];
    for (old, l) in g.labels.iter().enumerate() {
        labels[perm[old]] = l.clone();
    }
    let edges = g.edges.iter().map(|e| Edge { src: perm[e.src], dst: perm[e.dst], kind: e.kind }).collect();
    CodeGraph { labels, edges }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn graph_encoding_ignores_node_order(src in program(), seed in any::<u64>()) {
        let g = encoder_graph(&parse_source(&src).unwrap());
        let mut perm: Vec<usize> = (0..g.node_count()).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let params = small_params(EncoderKind::Gcn, seed);
        let a = encode_graph(&g, &params).unwrap();
        let b = encode_graph(&permuted(&g, &perm), &params).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs())));
        prop_assert_eq!(encode_graph(&g, &params).unwrap(), a);
    }

    #[test]
    fn gcn_layer_is_bounded(src in program(), seed in any::<u64>(), scale in 0.1f64..10.0) {
        let g = encoder_graph(&parse_source(&src).unwrap());
        let p = small_params(EncoderKind::Gcn, seed);
        let mut h = Matrix::zeros(g.node_count(), 5);
        for (v, x) in h.data.iter_mut().enumerate() {
            *x = ((v as f64) * 0.37).sin() * scale;
        }
        let out = gcn_layer(&h, &g, &p.layers[0]).unwrap();
        prop_assert!(out.data.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn encoders_are_deterministic(tokens in prop::collection::vec(0usize..40, 1..30), seed in any::<u64>()) {
        let p = small_params(EncoderKind::Bow, seed);
        let input = EncoderInput::Tokens(tokens);
        prop_assert_eq!(encode(&p, &input).unwrap(), encode(&p, &input).unwrap());
    }
}

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, dim).prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn info_nce_is_non_negative_and_finite(q in vector(4), k in vector(4), negs in prop::collection::vec(vector(4), 1..8), tau in 0.05f64..1.0) {
        let loss = info_nce(&q, &k, &negs, tau).unwrap();
        prop_assert!(loss.is_finite() && loss > 0.0);
    }

    #[test]
    fn losses_ignore_embedding_scale(q in prop::collection::vec(vector(4), 3), k in prop::collection::vec(vector(4), 3), s in 0.01f64..100.0, i in 0usize..3) {
        let mut q2 = q.clone();
        q2[i].iter_mut().for_each(|x| *x *= s);
        let a = simclr_batch_loss(&q, &k, 0.1).unwrap().loss;
        let b = simclr_batch_loss(&q2, &k, 0.1).unwrap().loss;
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn supcon_matches_simclr_on_distinct_groups(q in prop::collection::vec(vector(3), 2..6), seed in any::<u64>()) {
        let k: Vec<Vec<f64>> = q.iter().map(|v| v.iter().map(|x| x * 0.5 + (seed % 7) as f64 * 0.1).collect()).collect();
        let groups: Vec<usize> = (0..q.len()).collect();
        prop_assert_eq!(simclr_batch_loss(&q, &k, 0.2).unwrap(), supcon_batch_loss(&q, &k, &groups, 0.2).unwrap());
    }

    #[test]
    fn swav_codes_are_distributions(rows in prop::collection::vec(vector(4), 1..10), count in 2usize..12, seed in any::<u64>()) {
        let state = SwavState::new(count, 4, 0.1, seed).unwrap();
        for row in swav_assign(&rows, &state).unwrap() {
            prop_assert!(row.iter().all(|&x| x >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn queue_keeps_the_latest_entries(batches in prop::collection::vec(1usize..6, 1..20), capacity in 1usize..12) {
        let p = small_params(EncoderKind::Bow, 0);
        let mut state = MocoState::new(&p, &ProjectionHead::init(5, 0), capacity, 0.5).unwrap();
        let mut all = Vec::new();
        for b in batches {
            let start = all.len();
            let vecs: Vec<Vec<f64>> = (start..start + b).map(|i| vec![1.0, i as f64]).collect();
            let groups: Vec<usize> = (start..start + b).collect();
            state.enqueue(&vecs, &groups);
            all.extend(groups);
            let tail = &all[all.len().saturating_sub(capacity)..];
            prop_assert_eq!(state.queue.iter().map(|e| e.group).collect::<Vec<_>>(), tail.to_vec());
        }
    }
}

fn index_strategy() -> impl Strategy<Value = (Vec<usize>, Vec<Vec<f64>>, usize)> {
    (3usize..16).prop_flat_map(|n| {
        (prop::collection::vec(0usize..3, n), prop::collection::vec(vector(3), n), 1..n)
    })
}

fn embedding_index(groups: &[usize], emb: &[Vec<f64>]) -> RetrievalIndex {
    let items = groups.iter().zip(emb).enumerate().map(|(i, (&g, e))| (format!("f{i:02}"), g, e.clone())).collect();
    RetrievalIndex::from_embeddings(items).unwrap()
}

fn has_queries(groups: &[usize]) -> bool {
    groups.iter().any(|g| groups.iter().filter(|h| *h == g).count() > 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_are_bounded_and_scale_free((groups, emb, r) in index_strategy(), s in 0.01f64..100.0) {
        prop_assume!(has_queries(&groups));
        let base = evaluate_index(&embedding_index(&groups, &emb), r, QueryMode::ExcludeSelf, false).unwrap();
        prop_assert!((0.0..=1.0).contains(&base.map_at_r) && (0.0..=1.0).contains(&base.f1_at_r));
        let scaled: Vec<Vec<f64>> = emb.iter().map(|v| v.iter().map(|x| x * s).collect()).collect();
        let other = evaluate_index(&embedding_index(&groups, &scaled), r, QueryMode::ExcludeSelf, false).unwrap();
        prop_assert!((base.map_at_r - other.map_at_r).abs() <= 1e-12);
        prop_assert!((base.f1_at_r - other.f1_at_r).abs() <= 1e-12);
    }

    #[test]
    fn metrics_ignore_insertion_order((groups, emb, r) in index_strategy(), seed in any::<u64>()) {
        prop_assume!(has_queries(&groups));
        let items: Vec<(String, usize, Vec<f64>)> =
            groups.iter().zip(&emb).enumerate().map(|(i, (&g, e))| (format!("f{i:02}"), g, e.clone())).collect();
        let mut shuffled = items.clone();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let a = evaluate_index(&RetrievalIndex::from_embeddings(items).unwrap(), r, QueryMode::ExcludeSelf, false).unwrap();
        let b = evaluate_index(&RetrievalIndex::from_embeddings(shuffled).unwrap(), r, QueryMode::ExcludeSelf, false).unwrap();
        prop_assert!((a.map_at_r - b.map_at_r).abs() <= 1e-12 && (a.f1_at_r - b.f1_at_r).abs() <= 1e-12);
    }

    #[test]
    fn dropping_a_low_irrelevant_item_keeps_a_query((groups, emb, r) in index_strategy()) {
        prop_assume!(groups.iter().filter(|&&g| g == groups[0]).count() > 1);
        let index = embedding_index(&groups, &emb);
        let ranked = clonelab::metrics::retrieve(&index, "f00", groups.len() - 1).unwrap();
        let victim = ranked[r..].iter().find(|id| groups[id[1..].parse::<usize>().unwrap()] != groups[0]);
        prop_assume!(victim.is_some() && groups.len() - 1 > r);
        let drop: usize = victim.unwrap()[1..].parse().unwrap();
        let keep: Vec<usize> = (0..groups.len()).filter(|&i| i != drop).collect();
        let items = keep.iter().map(|&i| (format!("f{i:02}"), groups[i], emb[i].clone())).collect();
        let smaller = RetrievalIndex::from_embeddings(items).unwrap();
        let per = |idx: &RetrievalIndex| {
            evaluate_index(idx, r, QueryMode::ExcludeSelf, true).unwrap().per_query.unwrap().into_iter().find(|q| q.id == "f00").unwrap()
        };
        prop_assert_eq!(per(&index), per(&smaller));
    }
}

fn grouped_corpus(problems: usize, per_problem: usize, group_size: usize) -> Corpus {
    let files = (0..problems * per_problem)
        .map(|i| CorpusFile {
            id: format!("p{:02}/f{i:03}.c", i / per_problem),
            problem: format!("p{:02}", i / per_problem),
            group: i / group_size,
            source: "int main() { return 0; }".to_string(),
        })
        .collect();
    Corpus { files, origin: Origin::AugmentedStyle, skipped: Vec::new() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn splits_partition_the_units(problems in 5usize..12, seed in any::<u64>(), by_class in any::<bool>()) {
        let corpus = grouped_corpus(problems, 6, 3);
        let unit = if by_class { SplitUnit::ByClass } else { SplitUnit::ByGroup };
        let (a, b, c) = split(&corpus, &SplitSpec { unit: Some(unit), seed, ..SplitSpec::default() }).unwrap();
        prop_assert_eq!(a.len() + b.len() + c.len(), corpus.len());
        let keys = |c: &Corpus| -> BTreeSet<String> {
            c.files.iter().map(|f| if by_class { f.problem.clone() } else { f.group.to_string() }).collect()
        };
        let (ka, kb, kc) = (keys(&a), keys(&b), keys(&c));
        prop_assert!(ka.is_disjoint(&kb) && kb.is_disjoint(&kc) && ka.is_disjoint(&kc));
        prop_assert!(!ka.is_empty() && !kb.is_empty() && !kc.is_empty());
    }

    #[test]
    fn same_problem_batches_never_mix(problems in 1usize..5, group_size in 2usize..4, batch in 2usize..5, seed in any::<u64>()) {
        let corpus = grouped_corpus(problems, 12, group_size);
        let batches = make_batches(&corpus, batch, true, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for b in batches {
            prop_assert_eq!(b.len(), batch);
            let ps: BTreeSet<&str> = b.pairs.iter().flat_map(|p| [p.anchor, p.positive]).map(|i| corpus.files[i].problem.as_str()).collect();
            prop_assert_eq!(ps.len(), 1);
            let gs: BTreeSet<usize> = b.groups().into_iter().collect();
            prop_assert_eq!(gs.len(), batch);
        }
    }
}
