//! Seeded generator of small synthetic corpora: a handful of problems, each
//! solved many times with different names, literals and statement shapes.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transform::{Manifest, ManifestGroup};

#[derive(Debug, Error)]
pub enum ToyError {
    #[error("a recipe needs at least two templates, got {0}")]
    TooFewTemplates(usize),
    #[error("problem and solution counts must be positive")]
    Empty,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Manifest(#[from] crate::transform::CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    LoopSum,
    BranchMax,
    StringScan,
    Factorial,
    ArrayReverse,
    DigitSum,
}

impl Template {
    pub const ALL: [Template; 6] = [
        Template::LoopSum,
        Template::BranchMax,
        Template::StringScan,
        Template::Factorial,
        Template::ArrayReverse,
        Template::DigitSum,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecipe {
    pub problems: usize,
    pub solutions_per_problem: usize,
    pub seed: u64,
    pub templates: Vec<Template>,
}

impl CorpusRecipe {
    pub fn new(problems: usize, solutions_per_problem: usize, seed: u64) -> Self {
        CorpusRecipe { problems, solutions_per_problem, seed, templates: Template::ALL.to_vec() }
    }

    pub fn validate(&self) -> Result<(), ToyError> {
        if self.templates.len() < 2 {
            return Err(ToyError::TooFewTemplates(self.templates.len()));
        }
        if self.problems == 0 || self.solutions_per_problem == 0 {
            return Err(ToyError::Empty);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedFile {
    pub problem: String,
    pub name: String,
    pub source: String,
}

impl GeneratedFile {
    pub fn relative_path(&self) -> String {
        format!("{}/{}", self.problem, self.name)
    }
}

/// Semantics of one problem; solutions of the same problem agree on it.
#[derive(Debug, Clone, Copy)]
struct Task {
    template: Template,
    a: i64,
    b: i64,
}

fn task_for(recipe: &CorpusRecipe, problem: usize) -> Task {
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    rng.set_stream(u64::MAX - problem as u64);
    let template = recipe.templates[problem % recipe.templates.len()];
    let (a, b) = match template {
        Template::LoopSum => (rng.gen_range(1..=3), rng.gen_range(1..=4)),
        Template::BranchMax => (rng.gen_range(0..2), rng.gen_range(0..3)),
        Template::StringScan => (b"aeiouxz"[rng.gen_range(0..7)] as i64, rng.gen_range(0..2)),
        Template::Factorial => ([1_000_007, 1009, 65_521, 997][rng.gen_range(0..4)], rng.gen_range(1..=2)),
        Template::ArrayReverse => (rng.gen_range(1..=3), rng.gen_range(0..2)),
        Template::DigitSum => (rng.gen_range(0..2), [10, 8, 2][rng.gen_range(0..3)]),
    };
    Task { template, a, b }
}

/// Conventional names by role, so unrelated solutions often share them the
/// way real contest code does.
const ROLES: [&[&str]; 6] = [
    &["n", "m", "cnt", "len", "size", "num"],
    &["sum", "s", "ans", "res", "total", "result", "best", "acc"],
    &["i", "j", "k", "idx", "p"],
    &["x", "a", "v", "t", "val", "cur", "d"],
    &["j", "k", "q", "pos", "r", "w"],
    &["steps", "ops", "iters", "work"],
];

const CONVENTIONAL_NAME: f64 = 0.7;

struct Style<'a> {
    rng: &'a mut ChaCha8Rng,
    names: Vec<&'static str>,
    read_helper: bool,
    print_helper: bool,
    counter: bool,
}

impl<'a> Style<'a> {
    fn draw(rng: &'a mut ChaCha8Rng) -> Self {
        let mut names: Vec<&'static str> = Vec::new();
        for pool in ROLES {
            let free: Vec<&'static str> = pool.iter().copied().filter(|n| !names.contains(n)).collect();
            // the first free name is the conventional one and wins most of the time
            let pick = if rng.gen_bool(CONVENTIONAL_NAME) { free[0] } else { *free.choose(rng).expect("role pools outnumber roles") };
            names.push(pick);
        }
        let (read_helper, print_helper, counter) = (rng.gen_bool(0.4), rng.gen_bool(0.4), rng.gen_bool(0.3));
        Style { rng, names, read_helper, print_helper, counter }
    }

    fn flip(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }

    fn name(&self, role: usize) -> &'static str {
        self.names[role]
    }

    /// `lhs += rhs;` or `lhs = lhs + rhs;`
    fn accumulate(&mut self, lhs: &str, op: char, rhs: &str) -> String {
        if self.flip() {
            format!("{lhs} {op}= {rhs};")
        } else {
            format!("{lhs} = {lhs} {op} {rhs};")
        }
    }

    /// Declares an `int` and reads it from standard input.
    fn read(&self, var: &str) -> Vec<String> {
        if self.read_helper {
            vec![format!("int {var} = read_int();")]
        } else {
            vec![format!("int {var};"), format!("scanf(\"%d\", &{var});")]
        }
    }

    fn print(&self, expr: &str, long: bool) -> String {
        match (self.print_helper, long) {
            (true, _) => format!("print_answer({expr});"),
            (false, true) => format!("printf(\"%lld\\n\", {expr});"),
            (false, false) => format!("printf(\"%d\\n\", {expr});"),
        }
    }

    /// Dead bookkeeping that some authors leave in loops.
    fn tick(&self) -> Option<String> {
        self.counter.then(|| format!("{}++;", self.name(5)))
    }

    /// A counting loop over `var` from `from` while `var cmp to`.
    fn count_loop(&mut self, var: &str, from: &str, cmp: &str, to: &str, body: &[String]) -> Vec<String> {
        let mut inner: Vec<String> = body.to_vec();
        inner.extend(self.tick());
        let mut out = Vec::new();
        if self.flip() {
            out.push(format!("for (int {var} = {from}; {var} {cmp} {to}; {var}++) {{"));
            out.extend(inner.iter().map(|l| format!("    {l}")));
            out.push("}".to_string());
        } else {
            out.push(format!("int {var} = {from};"));
            out.push(format!("while ({var} {cmp} {to}) {{"));
            out.extend(inner.iter().map(|l| format!("    {l}")));
            out.push(format!("    {var}++;"));
            out.push("}".to_string());
        }
        out
    }

    fn program(&self, includes: &[&str], helpers: &[String], main_body: &[String]) -> String {
        let mut s: String = includes.iter().map(|i| format!("#include <{i}>\n")).collect();
        s.push('\n');
        if self.read_helper {
            s.push_str("int read_int() {\n    int value;\n    scanf(\"%d\", &value);\n    return value;\n}\n\n");
        }
        if self.print_helper {
            s.push_str("void print_answer(long long value) {\n    printf(\"%lld\\n\", value);\n}\n\n");
        }
        for h in helpers {
            s.push_str(h);
            s.push('\n');
        }
        s.push_str("int main() {\n");
        if self.counter {
            s.push_str(&format!("    int {} = 0;\n", self.name(5)));
        }
        s.push_str(&indent(main_body));
        s.push_str("    return 0;\n}\n");
        s
    }
}

fn indent(lines: &[String]) -> String {
    lines.iter().map(|l| format!("    {l}\n")).collect()
}

fn loop_sum(task: Task, st: &mut Style) -> String {
    let (n, s, i, t) = (st.name(0), st.name(1), st.name(2), st.name(3));
    let term = vec![i; task.a as usize].join(" * ");
    let add = st.accumulate(s, '+', t);
    let inner = if task.b > 1 {
        vec![format!("if ({i} % {} == 0) {{", task.b), format!("    int {t} = {term};"), format!("    {add}"), "}".into()]
    } else {
        vec![format!("int {t} = {term};"), add]
    };
    let loop_lines = st.count_loop(i, "1", "<=", n, &inner);
    let mut body = Vec::new();
    if st.flip() {
        let mut helper = format!("long long solve(int {n}) {{\n    long long {s} = 0;\n");
        helper.push_str(&indent(&loop_lines));
        helper.push_str(&format!("    return {s};\n}}\n"));
        if st.counter {
            // the helper has no counter in scope
            helper = helper.replace(&format!("{}++;", st.name(5)), "");
        }
        body.extend(st.read(n));
        body.push(st.print(&format!("solve({n})"), true));
        st.program(&["stdio.h"], &[helper], &body)
    } else {
        let decl = format!("long long {s} = 0;");
        if st.flip() {
            body.push(decl);
            body.extend(st.read(n));
        } else {
            body.extend(st.read(n));
            body.push(decl);
        }
        body.extend(loop_lines);
        body.push(st.print(s, true));
        st.program(&["stdio.h"], &[], &body)
    }
}

fn branch_max(task: Task, st: &mut Style) -> String {
    let (n, best, i, x) = (st.name(0), st.name(1), st.name(2), st.name(3));
    let sentinels = if task.a == 0 { ["-1000000000", "-2000000000", "-1000000007"] } else { ["1000000000", "2000000000", "1000000007"] };
    let sentinel = sentinels[st.rng.gen_range(0..3)];
    let cmp = if task.a == 0 { ">" } else { "<" };
    let mut body = st.read(n);
    body.push(format!("int {best} = {sentinel};"));
    let update = if st.flip() {
        vec![format!("if ({x} {cmp} {best}) {{"), format!("    {best} = {x};"), "}".into()]
    } else {
        let rev = if cmp == ">" { "<=" } else { ">=" };
        vec![format!("if ({x} {rev} {best}) {{"), "} else {".into(), format!("    {best} = {x};"), "}".into()]
    };
    let mut inner = st.read(x);
    inner.extend(update);
    body.extend(st.count_loop(i, "0", "<", n, &inner));
    if task.b > 0 {
        body.push(st.accumulate(best, '+', &task.b.to_string()));
    }
    body.push(st.print(best, false));
    st.program(&["stdio.h"], &[], &body)
}

fn string_scan(task: Task, st: &mut Style) -> String {
    let (c, s, i, len) = (st.name(1), st.name(4), st.name(2), st.name(0));
    let target = task.a as u8 as char;
    let size = [100, 128, 256, 1000, 1001, 105][st.rng.gen_range(0..6)];
    let test = if task.b == 0 { format!("{s}[{i}] == '{target}'") } else { format!("{s}[{i}] != '{target}'") };
    let mut body = vec![format!("char {s}[{size}];"), format!("scanf(\"%s\", {s});"), format!("int {c} = 0;")];
    let inc = if st.flip() { format!("{c}++;") } else { st.accumulate(c, '+', "1") };
    let inner = vec![format!("if ({test}) {{"), format!("    {inc}"), "}".into()];
    if st.flip() {
        body.push(format!("int {i} = 0;"));
        body.push(format!("while ({s}[{i}] != '\\0') {{"));
        body.extend(inner.iter().map(|l| format!("    {l}")));
        body.extend(st.tick().map(|l| format!("    {l}")));
        body.push(format!("    {i}++;"));
        body.push("}".into());
        body.push(st.print(c, false));
        st.program(&["stdio.h"], &[], &body)
    } else {
        body.push(format!("int {len} = strlen({s});"));
        body.extend(st.count_loop(i, "0", "<", len, &inner));
        body.push(st.print(c, false));
        st.program(&["stdio.h", "string.h"], &[], &body)
    }
}

fn factorial(task: Task, st: &mut Style) -> String {
    let (n, r, i) = (st.name(0), st.name(1), st.name(2));
    let (modulus, start) = (task.a, task.b);
    let mut body = st.read(n);
    if st.flip() {
        let helper = format!(
            "long long fact(int {n}) {{\n    if ({n} <= {start}) {{\n        return {start};\n    }}\n    return fact({n} - 1) * {n} % {modulus};\n}}\n"
        );
        body.push(st.print(&format!("fact({n})"), true));
        st.program(&["stdio.h"], &[helper], &body)
    } else {
        body.push(format!("long long {r} = {start};"));
        let step = if st.flip() {
            format!("{r} = {r} * {i} % {modulus};")
        } else {
            format!("{r} = ({r} * {i}) % {modulus};")
        };
        body.extend(st.count_loop(i, &(start + 1).to_string(), "<=", n, &[step]));
        body.push(st.print(r, true));
        st.program(&["stdio.h"], &[], &body)
    }
}

fn array_reverse(task: Task, st: &mut Style) -> String {
    let (n, arr, i, j) = (st.name(0), st.name(3), st.name(2), st.name(4));
    let stride = task.a;
    let size = [100, 105, 1000, 1024, 10005, 200][st.rng.gen_range(0..6)];
    let mut body = st.read(n);
    body.push(format!("int {arr}[{size}];"));
    body.extend(st.count_loop(i, "0", "<", n, &[format!("scanf(\"%d\", &{arr}[{i}]);")]));
    let sep = if task.b == 0 { " " } else { "\\n" };
    if st.flip() {
        body.push(format!("for (int {j} = {n} - 1; {j} >= 0; {j} -= {stride}) {{"));
        body.push(format!("    printf(\"%d{sep}\", {arr}[{j}]);"));
        body.push("}".into());
    } else {
        body.push(format!("int {j} = {n} - 1;"));
        body.push(format!("while ({j} >= 0) {{"));
        body.push(format!("    printf(\"%d{sep}\", {arr}[{j}]);"));
        body.extend(st.tick().map(|l| format!("    {l}")));
        body.push(format!("    {}", st.accumulate(j, '-', &stride.to_string())));
        body.push("}".into());
    }
    st.program(&["stdio.h"], &[], &body)
}

fn digit_sum(task: Task, st: &mut Style) -> String {
    let (n, s, d) = (st.name(0), st.name(1), st.name(3));
    let base = task.b;
    let term = if task.a == 0 { d.to_string() } else { "1".to_string() };
    let mut body = st.read(n);
    if st.flip() {
        let extra = if task.a == 0 { format!("{n} % {base}") } else { "1".to_string() };
        let helper = format!(
            "int digits(int {n}) {{\n    if ({n} == 0) {{\n        return 0;\n    }}\n    return {extra} + digits({n} / {base});\n}}\n"
        );
        body.push(st.print(&format!("digits({n})"), false));
        st.program(&["stdio.h"], &[helper], &body)
    } else {
        body.push(format!("int {s} = 0;"));
        body.push(format!("while ({n} > 0) {{"));
        body.push(format!("    int {d} = {n} % {base};"));
        body.push(format!("    {}", st.accumulate(s, '+', &term)));
        body.extend(st.tick().map(|l| format!("    {l}")));
        body.push(format!("    {}", st.accumulate(n, '/', &base.to_string())));
        body.push("}".into());
        body.push(st.print(s, false));
        st.program(&["stdio.h"], &[], &body)
    }
}

fn solution(recipe: &CorpusRecipe, task: Task, problem: usize, index: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    rng.set_stream((problem * recipe.solutions_per_problem + index) as u64);
    let mut st = Style::draw(&mut rng);
    match task.template {
        Template::LoopSum => loop_sum(task, &mut st),
        Template::BranchMax => branch_max(task, &mut st),
        Template::StringScan => string_scan(task, &mut st),
        Template::Factorial => factorial(task, &mut st),
        Template::ArrayReverse => array_reverse(task, &mut st),
        Template::DigitSum => digit_sum(task, &mut st),
    }
}

pub fn problem_name(problem: usize) -> String {
    format!("p{problem:03}")
}

/// All files of the recipe in problem-major order.
pub fn generate_sources(recipe: &CorpusRecipe) -> Result<Vec<GeneratedFile>, ToyError> {
    recipe.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..recipe.problems).flat_map(|p| (0..recipe.solutions_per_problem).map(move |s| (p, s))).collect();
    Ok(jobs
        .par_iter()
        .map(|&(p, s)| GeneratedFile {
            problem: problem_name(p),
            name: format!("s{s:03}.c"),
            source: solution(recipe, task_for(recipe, p), p, s),
        })
        .collect())
}

/// Writes `<out>/<problem>/<solution>.c` plus a manifest with one clone
/// group per problem.
pub fn generate(recipe: &CorpusRecipe, out_dir: &Path) -> Result<Manifest, ToyError> {
    let files = generate_sources(recipe)?;
    let mut manifest = Manifest::default();
    for f in &files {
        let dir = out_dir.join(&f.problem);
        fs::create_dir_all(&dir).map_err(|source| ToyError::Io { path: dir.clone(), source })?;
        let path = dir.join(&f.name);
        fs::write(&path, &f.source).map_err(|source| ToyError::Io { path, source })?;
        match manifest.groups.last_mut() {
            Some(g) if g.problem == f.problem => g.files.push(f.relative_path()),
            _ => manifest.groups.push(ManifestGroup {
                id: manifest.groups.len(),
                problem: f.problem.clone(),
                files: vec![f.relative_path()],
            }),
        }
    }
    manifest.save(out_dir)?;
    Ok(manifest)
}
