use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

const KB: &str = "\
fof(a1, axiom, ![X]: (c__Dog(X) => c__Animal(X))).
fof(a2, axiom, ![X]: (c__Puppy(X) => c__Dog(X))).
fof(a3, axiom, ![X]: (c__Car(X) => c__Vehicle(X))).
fof(a4, axiom, ![X]: (c__Animal(X) => c__LivingThing(X))).
fof(a5, axiom, c__Car(c__myCar)).
";

const EMBEDDING: &str = "\
dog 1 0.2 0
puppy 0.9 0.3 0
animal 0.8 0.1 0.2
car 0 1 0.1
vehicle 0.1 0.9 0.3
living_thing 0.6 0 0.5
";

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture { dir: TempDir::new().unwrap() };
        f.write("kb.p", KB);
        f.write("emb.txt", EMBEDDING);
        f.write("goal.p", "fof(g, conjecture, ![X]: (c__Puppy(X) => c__Animal(X))).\n");
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, content: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, content).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_premsel"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }
}

fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn vector_select_returns_k_ids() {
    let f = Fixture::new();
    let out = f.ok(&[
        "select", "--kb", "kb.p", "--goal", "goal.p", "--strategy", "vector", "--k", "3",
        "--embedding", "emb.txt", "--format", "json",
    ]);
    let v = json(&out);
    assert_eq!(v["selected"].as_array().unwrap().len(), 3);
    assert_eq!(v["scores"].as_array().unwrap().len(), 3);
    assert_eq!(v["strategy"], "vector");
    assert_eq!(v["params"]["k"], 3);
}

#[test]
fn sine_with_disjoint_goal_selects_nothing() {
    let f = Fixture::new();
    f.write("other.p", "fof(g, conjecture, q(b)).\n");
    let out = f.ok(&[
        "select", "--kb", "kb.p", "--goal", "other.p", "--strategy", "sine", "--depth", "3",
        "--format", "json",
    ]);
    assert_eq!(json(&out)["selected"], serde_json::json!([]));

    let tptp = f.ok(&["select", "--kb", "kb.p", "--goal", "other.p", "--strategy", "sine", "--depth", "3"]);
    assert!(!tptp.contains("axiom,"));
    assert!(tptp.contains("conjecture"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let f = Fixture::new();
    for strategy in [
        &["--strategy", "sine", "--depth", "2"][..],
        &["--strategy", "vb-union", "--depth", "1", "--k", "2", "--embedding", "emb.txt"],
        &["--strategy", "simsine", "--depth", "2", "--k", "2", "--embedding", "emb.txt"],
    ] {
        let mut args = vec!["select", "--kb", "kb.p", "--goal", "goal.p", "--format", "json"];
        args.extend_from_slice(strategy);
        assert_eq!(f.ok(&args), f.ok(&args));
    }
}

#[test]
fn output_file_matches_stdout() {
    let f = Fixture::new();
    let args = ["select", "--kb", "kb.p", "--goal", "goal.p", "--strategy", "sine", "--depth", "2"];
    let stdout = f.ok(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--output", "sel.p"]);
    f.ok(&with_out);
    assert_eq!(fs::read_to_string(f.path("sel.p")).unwrap(), stdout);
}

#[test]
fn stats_of_single_axiom_kb() {
    let f = Fixture::new();
    f.write("one.p", "fof(only, axiom, p(a) & q(b)).\n");
    let out = f.ok(&["stats", "--kb", "one.p"]);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows, ["a\t1\t0.000000", "b\t1\t0.000000", "p\t1\t0.000000", "q\t1\t0.000000"]);
}

#[test]
fn map_build_without_tables_is_bruteforce_only() {
    let f = Fixture::new();
    let out = f.ok(&["map", "build", "--kb", "kb.p", "--embedding", "emb.txt"]);
    assert!(!out.is_empty());
    for line in out.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 3);
        assert_eq!(cols[2], "bruteforce");
    }
    assert!(out.contains("c__LivingThing\tliving_thing\tbruteforce"));
    assert!(!out.contains("c__myCar"));
}

#[test]
fn map_build_with_table() {
    let f = Fixture::new();
    f.write("syn.tsv", "c__myCar\tcar\tsynonym\nc__myCar\tvehicle\tinstance\n");
    let out = f.ok(&["map", "build", "--kb", "kb.p", "--embedding", "emb.txt", "--table", "syn.tsv"]);
    assert!(out.contains("c__myCar\tcar\tsynonym"));
}

#[test]
fn frat_with_no_tasks_is_header_only() {
    let f = Fixture::new();
    f.write("tasks.csv", "");
    let out = f.ok(&[
        "eval", "frat", "--kb", "kb.p", "--tasks", "tasks.csv", "--strategy", "vector",
        "--embedding", "emb.txt", "--params", "1,2",
    ]);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("k\thit_pct"));
}

#[test]
fn frat_rows_per_param() {
    let f = Fixture::new();
    f.write("tasks.csv", "puppy,dog,animal,living_thing\n");
    let out = f.ok(&[
        "eval", "frat", "--kb", "kb.p", "--tasks", "tasks.csv", "--strategy", "sine", "--params", "1,2,3",
    ]);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("depth\t"));
    assert!(rows[1].starts_with("1\t"));
    assert!(rows[3].starts_with("3\t"));
}

#[test]
fn eval_prove_without_prover_skips() {
    let f = Fixture::new();
    fs::create_dir(f.path("problems")).unwrap();
    f.write("problems/p1.p", "fof(g, conjecture, c__Dog(c__rex)).\n");
    f.write("problems/p2.p", "fof(g, conjecture, c__Car(c__myCar)).\n");
    let out = f.ok(&[
        "eval", "prove", "--kb", "kb.p", "--problems", "problems", "--strategy", "sine", "--depth", "1",
        "--out-dir", "inputs", "--runs", "runs.tsv",
    ]);
    assert_eq!(out.lines().nth(1), Some("sine depth=1 t=1\t0\t0\t0\t0\t2\t2"));
    assert!(f.path("inputs/p1.p").exists());
    let runs = fs::read_to_string(f.path("runs.tsv")).unwrap();
    assert_eq!(runs.lines().count(), 3);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let f = Fixture::new();
    f.write(
        "run.toml",
        "kb = \"kb.p\"\ngoal = \"goal.p\"\nstrategy = \"vector\"\nk = 2\nembedding = \"emb.txt\"\nformat = \"json\"\n",
    );
    let v = json(&f.ok(&["--config", "run.toml", "select"]));
    assert_eq!(v["selected"].as_array().unwrap().len(), 2);
    let v = json(&f.ok(&["--config", "run.toml", "select", "--k", "4"]));
    assert_eq!(v["selected"].as_array().unwrap().len(), 4);

    f.write("bad.toml", "depht = 3\n");
    assert!(!f.run(&["--config", "bad.toml", "stats", "--kb", "kb.p"]).status.success());
}

#[test]
fn invalid_configurations_fail() {
    let f = Fixture::new();
    let cases: &[&[&str]] = &[
        &["select", "--kb", "kb.p", "--goal", "goal.p", "--strategy", "sine"],
        &["select", "--kb", "kb.p", "--goal", "goal.p", "--strategy", "vector", "--k", "2"],
        &["select", "--kb", "kb.p", "--goal", "goal.p", "--strategy", "sine", "--depth", "1", "--tolerance", "0.5"],
        &["select", "--kb", "kb.p", "--strategy", "sine", "--depth", "1"],
        &["select", "--kb", "missing.p", "--goal", "goal.p", "--strategy", "sine", "--depth", "1"],
        &["select", "--kb", "kb.p", "--goal", "goal.p", "--strategy", "vector", "--k", "9", "--embedding", "emb.txt"],
    ];
    for args in cases {
        let out = f.run(args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
}

#[test]
fn help_lists_subcommands() {
    let f = Fixture::new();
    let out = f.ok(&["--help"]);
    for cmd in ["select", "stats", "map", "eval"] {
        assert!(out.contains(cmd));
    }
}
