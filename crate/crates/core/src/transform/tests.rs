use std::collections::{BTreeMap, HashSet};

use super::*;
use crate::lang::parser::tests::FIGURE;
use crate::lang::{canonical_tokens, NodeKind};

fn parse(src: &str) -> Ast {
    parse_source(src).unwrap()
}

fn apply(src: &str, kind: TransformKind, seed: u64) -> Application {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    apply_one(&parse(src), kind, &mut rng, &TransformConfig::default()).unwrap()
}

fn identifiers(ast: &Ast) -> Vec<String> {
    ast.find_all(NodeKind::Identifier).into_iter().map(|i| ast.node(i).text.clone()).collect()
}

#[test]
fn rename_variables_is_consistent_bijection() {
    let before = parse(FIGURE);
    let config = TransformConfig { name_pool: vec!["ddk".into(), "j".into(), "sdd".into()], ..Default::default() };
    let app = apply_one(&before, TransformKind::RenameVariables, &mut ChaCha8Rng::seed_from_u64(3), &config).unwrap();
    assert!(app.applied);
    let (old, new) = (identifiers(&before), identifiers(&app.ast));
    assert_eq!(old.len(), new.len());
    let mut map = BTreeMap::new();
    for (o, n) in old.iter().zip(&new) {
        assert_eq!(*map.entry(o.clone()).or_insert(n.clone()), *n, "inconsistent rename of {o}");
    }
    for kept in ["foobar", "main", "printf"] {
        assert_eq!(map[kept], kept);
    }
    let targets: HashSet<_> = map.values().collect();
    assert_eq!(targets.len(), map.len(), "not injective: {map:?}");
    for renamed in ["keq", "lec", "fur", "i"] {
        assert_ne!(map[renamed], renamed);
    }
    // three stems for four names: one gets a numeric suffix
    assert!(map.values().any(|v| v.ends_with('1')));
    assert_eq!(canonical_tokens(&before), canonical_tokens(&app.ast));
}

#[test]
fn rename_functions_skips_main_and_library() {
    let app = apply(FIGURE, TransformKind::RenameFunctions, 1);
    let ids = identifiers(&app.ast);
    assert!(!ids.contains(&"foobar".to_string()));
    assert!(ids.contains(&"main".to_string()));
    assert!(ids.contains(&"printf".to_string()));
    let defs = app.ast.find_all(NodeKind::FunctionDef);
    let called = app.ast.find_all(NodeKind::Call).into_iter().map(|c| app.ast.children(c)[0]);
    let callee_names: HashSet<_> = called.map(|c| app.ast.node(c).text.clone()).collect();
    let new_name = app.ast.declared_name(defs[0]).unwrap().to_string();
    assert!(callee_names.contains(&new_name));
}

#[test]
fn renaming_reaches_macro_bodies() {
    let app = apply("#define INC(v) (v + step)\nint step = 2;\nint main(){ int a = INC(step); return a; }", TransformKind::RenameVariables, 0);
    let text = render(&app.ast);
    let step_decl = app.ast.find_all(NodeKind::Decl)[0];
    let new = app.ast.declared_name(step_decl).unwrap();
    assert!(text.contains(&format!("#define INC(v) (v + {new})")), "{text}");
}

#[test]
fn swap_if_else_negates_and_swaps() {
    let app = apply("int main(){ int c = 1; if (c) { c = 2; } else { c = 3; } return c; }", TransformKind::SwapIfElse, 0);
    assert!(app.applied);
    let text = render(&app.ast);
    assert!(text.contains("if (!c) {\n    c = 3;\n  } else {\n    c = 2;\n  }"), "{text}");
    let twice = apply_one(&app.ast, TransformKind::SwapIfElse, &mut ChaCha8Rng::seed_from_u64(0), &TransformConfig::default()).unwrap();
    let original = parse("int main(){ int c = 1; if (c) { c = 2; } else { c = 3; } return c; }");
    assert_eq!(canonical_tokens(&twice.ast), canonical_tokens(&original));
    assert!(render(&twice.ast).contains("if (!!c)"));
}

#[test]
fn swap_if_else_parenthesizes_compound_condition() {
    let app = apply("int main(){ int a = 0; if (a < 2) a = 1; else a = 2; return a; }", TransformKind::SwapIfElse, 0);
    assert!(render(&app.ast).contains("if (!(a < 2))"));
}

#[test]
fn printf_to_cout_figure_line() {
    let app = apply(FIGURE, TransformKind::PrintfToCout, 0);
    let text = render(&app.ast);
    assert!(text.contains("std::cout << lec;"), "{text}");
    assert!(text.starts_with("#include <iostream>\n#include <stdio.h>"), "{text}");
    assert!(!text.contains("<iomanip>"));
}

#[test]
fn printf_to_cout_width_and_text() {
    let app = apply("int main(){ int x = 1; printf(\"x=%3d%%\\n\", x + 1); printf(\"%f\", 1); return 0; }", TransformKind::PrintfToCout, 0);
    let text = render(&app.ast);
    assert!(text.starts_with("#include <iomanip>\n#include <iostream>\n"), "{text}");
    assert!(text.contains("std::cout << \"x=\" << std::setw(3) << x + 1 << \"%\\n\";"), "{text}");
    assert!(text.contains("printf(\"%f\", 1);"));
}

#[test]
fn for_to_while_hoists_init_and_step() {
    let app = apply("int main(){ int s = 0; for (int i = 0; i < 3; ++i) { s += i; } for (;;) { break; } return s; }", TransformKind::ForToWhile, 0);
    let text = render(&app.ast);
    assert!(text.contains("  {\n    int i = 0;\n    while (i < 3) {\n      s += i;\n      ++i;\n    }\n  }"), "{text}");
    assert!(text.contains("while (1) {\n    break;\n  }"), "{text}");
}

#[test]
fn for_to_while_skips_continue_loops() {
    let app = apply("int main(){ for (int i = 0; i < 3; i++) { if (i) continue; } return 0; }", TransformKind::ForToWhile, 0);
    assert!(!app.applied);
    assert!(app.reason.unwrap().contains("continue"));
}

#[test]
fn while_to_for_matches_figure_shape() {
    let app = apply(FIGURE, TransformKind::WhileToFor, 0);
    assert!(render(&app.ast).contains("for (; fur < keq;) {"));
}

#[test]
fn rearrange_adds_prototypes() {
    let src = "int g(int);\nint f(int a) { return g(a); }\nint g(int b) { return b; }\nint main() { return f(1); }";
    let app = apply(src, TransformKind::RearrangeFunctionDecls, 5);
    let ast = &app.ast;
    let items = ast.children(ast.root);
    let protos: Vec<_> = items.iter().filter(|&&i| ast.function_body(i).is_none()).map(|&i| ast.declared_name(i).unwrap()).collect();
    assert_eq!(protos, ["f", "g"]);
    assert_eq!(items.len(), 5);
    assert!(items[..2].iter().all(|&i| ast.function_body(i).is_none()));
}

#[test]
fn not_applicable_leaves_input() {
    let src = "int main(){ return 0; }";
    for kind in [TransformKind::SwapIfElse, TransformKind::ForToWhile, TransformKind::WhileToFor, TransformKind::PrintfToCout, TransformKind::ExpandMacros, TransformKind::RearrangeFunctionDecls, TransformKind::RenameVariables, TransformKind::RenameFunctions] {
        let app = apply(src, kind, 0);
        assert!(!app.applied, "{kind}");
        assert!(app.ast.structurally_equal(&parse(src)));
    }
}

#[test]
fn comments_edit_replaces_comments() {
    let app = apply(FIGURE, TransformKind::CommentsEdit, 9);
    assert!(app.applied);
    assert!(!app.ast.comments.is_empty());
    let pool = TransformConfig::default().comment_pool;
    assert!(app.ast.comments.iter().all(|c| pool.contains(&c.text)));
    assert_eq!(canonical_tokens(&app.ast), canonical_tokens(&parse(FIGURE)));
}

#[test]
fn expand_macros_removes_directive() {
    let app = apply("#define N 3\nint main(){ int a[N]; return N; }", TransformKind::ExpandMacros, 0);
    assert!(app.applied);
    assert!(app.ast.find_all(NodeKind::MacroDefine).is_empty());
    assert!(render(&app.ast).contains("return 3;"));
}

#[test]
fn zero_probability_copies_equal_input() {
    let ast = parse(FIGURE);
    let out = augment_file(&ast, &TransformConfig::uniform(0.0), 7).unwrap();
    assert_eq!(out.len(), 4);
    for (copy, report) in out {
        assert!(report.applied.is_empty() && report.skipped.is_empty());
        assert!(parse(&render(&copy)).structurally_equal(&ast));
    }
}

#[test]
fn certainty_applies_every_applicable_kind() {
    let src = "#include <stdio.h>\n#define K 2\nint h(int q) { return q * K; }\nint main() { int x = 0; // c\n for (int i = 0; i < 3; i++) { x += h(i); } while (x > 10) x--; if (x) printf(\"%d\", x); else x = 1; return 0; }";
    let config = TransformConfig { copies_per_file: 1, ..TransformConfig::uniform(1.0) };
    let out = augment_file(&parse(src), &config, 1).unwrap();
    assert_eq!(out[0].1.applied, TransformKind::ALL.to_vec());
    assert!(out[0].1.skipped.is_empty());
}

#[test]
fn augmentation_is_deterministic() {
    let ast = parse(FIGURE);
    let config = TransformConfig::uniform(0.5);
    let render_all = |seed| augment_file(&ast, &config, seed).unwrap().into_iter().map(|(a, _)| render(&a)).collect::<Vec<_>>();
    assert_eq!(render_all(11), render_all(11));
}

#[test]
fn report_kinds_are_disjoint() {
    let ast = parse(FIGURE);
    for seed in 0..20 {
        for (_, r) in augment_file(&ast, &TransformConfig::uniform(0.6), seed).unwrap() {
            for (k, _) in &r.skipped {
                assert!(!r.applied.contains(k));
            }
        }
    }
}
