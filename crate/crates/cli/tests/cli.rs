use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const GUARDED_NNF: &str = "nnf 7 6 4\nL -1\nL 1\nL -3\nA 2 1 2\nO 1 2 0 3\nL 2\nA 2 5 4\n";

const MARKER_AUTOMATON: &str = r#"{"states": ["no", "yes"], "accepting": ["yes"],
 "leaf": [{"label": "a", "to": "yes"}, {"label": "b", "to": "no"}, {"label": "e", "to": "no"}],
 "internal": [
   {"left": "no", "right": "no", "label": "a", "to": "yes"},
   {"left": "no", "right": "no", "label": "b", "to": "no"},
   {"left": "no", "right": "no", "label": "e", "to": "no"},
   {"left": "yes", "right": "no", "label": "a", "to": "yes"},
   {"left": "yes", "right": "no", "label": "b", "to": "yes"},
   {"left": "yes", "right": "no", "label": "e", "to": "yes"},
   {"left": "no", "right": "yes", "label": "a", "to": "yes"},
   {"left": "no", "right": "yes", "label": "b", "to": "yes"},
   {"left": "no", "right": "yes", "label": "e", "to": "yes"},
   {"left": "yes", "right": "yes", "label": "a", "to": "yes"},
   {"left": "yes", "right": "yes", "label": "b", "to": "yes"},
   {"left": "yes", "right": "yes", "label": "e", "to": "yes"}]}"#;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture { dir: tempfile::tempdir().unwrap() };
        f.write("guarded.nnf", GUARDED_NNF);
        f.write("q.cq", "Q() :- R(x), S(y).\n");
        f.write("q1.cq", "Q(x) :- R(x), S(y).\n");
        f.write("plain.tsv", "R\ta\nR\ta'\nS\tb\n");
        f.write("tid.tsv", "R\ta\t1/2\nR\ta'\t1/2\nS\tb\t1/2\n");
        f.write("ok.cnf", "p cnf 3 2\n1 -2 0\n2 3 0\n");
        f
    }

    fn write(&self, name: &str, body: &str) -> String {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }

    fn run(&self, args: &[&str]) -> Output {
        let args: Vec<String> =
            args.iter().map(|a| if self.dir.path().join(a).exists() { self.path(a) } else { a.to_string() }).collect();
        Command::new(env!("CARGO_BIN_EXE_kcdb")).args(&args).output().unwrap()
    }

    fn stdout(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    }

    fn code(&self, args: &[&str]) -> Option<i32> {
        self.run(args).status.code()
    }
}

fn lines(s: &str) -> Vec<&str> {
    s.lines().collect()
}

#[test]
fn counts_the_guarded_circuit() {
    let f = Fixture::new();
    assert_eq!(f.stdout(&["count", "--nnf", "guarded.nnf"]), "6\n");
    assert_eq!(lines(&f.stdout(&["count", "--nnf", "guarded.nnf", "--by-cardinality"])), ["0", "1", "3", "2", "0"]);
    assert_eq!(f.stdout(&["--format", "json", "count", "--nnf", "guarded.nnf"]), "{\"count\":6}\n");
    assert_eq!(lines(&f.stdout(&["enum", "--nnf", "guarded.nnf"])).len(), 6);
    assert_eq!(lines(&f.stdout(&["enum", "--nnf", "guarded.nnf", "--limit", "2"])).len(), 2);
}

#[test]
fn weighted_counts_and_best_valuation() {
    let f = Fixture::new();
    f.write("w.txt", "c weights as probabilities\n1 1/2\n2 1/2\n3 1/2\n4 1/2\n");
    assert_eq!(f.stdout(&["wmc", "--nnf", "guarded.nnf", "--weights", "w.txt"]), "3/8\n");
    f.write("w2.txt", "1 1 2\n2 3 1\n3 1 1\n4 5 1\n");
    let best = f.stdout(&["best", "--nnf", "guarded.nnf", "--weights", "w2.txt"]);
    assert!(best.contains("-1 2") && best.contains(" 4"), "{best}");
}

#[test]
fn compiled_cnf_counts_like_the_formula() {
    let f = Fixture::new();
    let out = f.path("ok.nnf");
    f.stdout(&["compile-cnf", "--cnf", "ok.cnf", "-o", &out]);
    let from_nnf = f.stdout(&["count", "--nnf", "ok.nnf"]);
    assert_eq!(from_nnf, f.stdout(&["count", "--cnf", "ok.cnf"]));
    assert_eq!(from_nnf, "4\n");
    let class = f.stdout(&["check-class", "--nnf", "ok.nnf"]);
    assert!(class.contains("decomposable true"), "{class}");
}

#[test]
fn provenance_fixed_point() {
    let f = Fixture::new();
    assert_eq!(f.stdout(&["pqe", "--query", "q.cq", "--tid", "tid.tsv", "--mode", "exact"]), "3/8\n");
    assert_eq!(f.stdout(&["pqe", "--query", "q.cq", "--tid", "tid.tsv", "--mode", "brute"]), "3/8\n");
    assert_eq!(
        f.stdout(&["--format", "json", "pqe", "--query", "q.cq", "--tid", "tid.tsv", "--mode", "exact"]),
        "{\"probability\":{\"denominator\":8,\"numerator\":3}}\n"
    );
    assert_eq!(f.stdout(&["ur", "--query", "q.cq", "--db", "plain.tsv"]), "3\n");
    let s = f.stdout(&["shapley", "--query", "q.cq", "--db", "plain.tsv"]);
    let values: Vec<&str> = s.lines().map(|l| l.rsplit('\t').next().unwrap()).collect();
    assert_eq!(values, ["1/6", "1/6", "2/3"]);
    let ro = f.stdout(&["prov", "--query", "q.cq", "--db", "plain.tsv", "--method", "read-once"]);
    assert_eq!(ro.trim(), "And(Or(R(a), R(a')), S(b))");
}

#[test]
fn approximate_pqe_is_seeded() {
    let f = Fixture::new();
    let run =
        |seed: &str| f.stdout(&["--seed", seed, "pqe", "--query", "q.cq", "--tid", "tid.tsv", "--mode", "approx"]);
    assert_eq!(run("7"), run("7"));
    let a = f.stdout(&["--seed", "7", "sample", "--nnf", "guarded.nnf", "--count", "20"]);
    assert_eq!(a, f.stdout(&["--seed", "7", "sample", "--nnf", "guarded.nnf", "--count", "20"]));
    assert_eq!(lines(&a).len(), 20);
}

#[test]
fn query_answers() {
    let f = Fixture::new();
    assert_eq!(f.stdout(&["cq-count", "--query", "q1.cq", "--db", "plain.tsv"]), "2\n");
    assert_eq!(lines(&f.stdout(&["cq-enum", "--query", "q1.cq", "--db", "plain.tsv"])), ["a", "a'"]);
    assert_eq!(f.stdout(&["cq-access", "--query", "q1.cq", "--db", "plain.tsv", "--index", "2"]), "a'\n");
    let split = f.stdout(&[
        "cq-count",
        "--query",
        "q1.cq",
        "--rel",
        &format!("R={}", f.write("r.tsv", "a\na'\n")),
        "--rel",
        &format!("S={}", f.write("s.tsv", "b\n")),
    ]);
    assert_eq!(split, "2\n");
    let rc = f.path("q1.rc");
    f.stdout(&["cq-compile", "--query", "q1.cq", "--db", "plain.tsv", "-o", &rc]);
    assert!(Path::new(&rc).exists());
}

#[test]
fn trees() {
    let f = Fixture::new();
    f.write("a.json", MARKER_AUTOMATON);
    f.write(
        "t.json",
        r#"{"default": "e", "root": {"label": "a", "prob": "1/2", "children": [{"label": "b", "prob": "1/3"}, {"label": "a", "prob": "1/4"}]}}"#,
    );
    assert_eq!(f.stdout(&["tree-pqe", "--tree", "t.json", "--automaton", "a.json"]), "5/8\n");
    f.write("marked.json", &some_marked_automaton());
    let answers = f.stdout(&["tree-enum", "--tree", "t.json", "--automaton", "marked.json"]);
    let sets: BTreeSet<&str> = answers.lines().collect();
    assert_eq!(sets.len(), 7, "{answers}");
    assert!(sets.contains("0 1 2"));
}

/// Accepts the annotated trees with at least one marked node.
fn some_marked_automaton() -> String {
    let mut leaf = Vec::new();
    let mut internal = Vec::new();
    for l in ["a", "b", "e"] {
        for mark in [0, 1] {
            let to = |seen: bool| if seen || mark == 1 { "yes" } else { "no" };
            leaf.push(format!(r#"{{"label": "{l}:{mark}", "to": "{}"}}"#, to(false)));
            for x in ["no", "yes"] {
                for y in ["no", "yes"] {
                    let t = to(x == "yes" || y == "yes");
                    internal.push(format!(r#"{{"left": "{x}", "right": "{y}", "label": "{l}:{mark}", "to": "{t}"}}"#));
                }
            }
        }
    }
    format!(
        r#"{{"states": ["no", "yes"], "accepting": ["yes"], "leaf": [{}], "internal": [{}]}}"#,
        leaf.join(", "),
        internal.join(", ")
    )
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    assert_eq!(f.code(&["cq-access", "--query", "q1.cq", "--db", "plain.tsv", "--index", "0"]), Some(2));
    assert_eq!(f.code(&["cq-access", "--query", "q1.cq", "--db", "plain.tsv", "--index", "3"]), Some(1));
    assert_eq!(f.code(&["count"]), Some(2));
    assert_eq!(f.code(&["count", "--nnf", "missing.nnf"]), Some(2));
    assert_eq!(f.code(&["no-such-command"]), Some(2));
    f.write("bad.cnf", "p cnf 3 3\n1 2 0\n3 0\n");
    assert_eq!(f.code(&["count", "--cnf", "bad.cnf"]), Some(2));
    f.write("bad.tsv", "R\t1\nR\t1\t2\n");
    assert_eq!(f.code(&["cq-count", "--query", "q1.cq", "--db", "bad.tsv"]), Some(2));
    f.write("nh.cq", "Q() :- R(x), S(x, y), T(y).\n");
    f.write("nh.tsv", "R\t1\t1/2\nS\t1\t2\t1/2\nT\t2\t1/2\n");
    assert_eq!(f.code(&["pqe", "--query", "nh.cq", "--tid", "nh.tsv", "--mode", "exact"]), Some(1));
    assert_eq!(f.stdout(&["pqe", "--query", "nh.cq", "--tid", "nh.tsv", "--mode", "brute"]), "1/8\n");
}
