use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::Path;

use premsel::harness::{
    frat_goal, run_corpus, run_frat, CorpusOptions, FratTask, Outcome, OutcomeCounts, ProverConfig,
};
use premsel::{parse_kb, Context, EmbeddingStore, Error, Selector, Strategy};

const KB: &str = "\
fof(a1, axiom, ![X]: (c__Tulip(X) => c__Flower(X))).
fof(a2, axiom, ![X]: (c__Daisy(X) => c__Flower(X))).
fof(a3, axiom, ![X]: (c__Vase(X) => c__Container(X))).
fof(a4, axiom, ![X]: (c__Car(X) => c__Vehicle(X))).
";

fn context() -> Context {
    let store = EmbeddingStore::from_pairs([
        ("tulip", vec![1.0, 0.1, 0.0]),
        ("daisy", vec![0.9, 0.2, 0.0]),
        ("flower", vec![1.0, 0.0, 0.1]),
        ("vase", vec![0.5, 0.5, 0.0]),
        ("container", vec![0.2, 0.9, 0.0]),
        ("car", vec![0.0, 0.1, 1.0]),
        ("vehicle", vec![0.0, 0.2, 0.9]),
    ])
    .unwrap();
    Context::new(parse_kb(KB).unwrap()).unwrap().with_embedding(store, None)
}

fn write_problems(dir: &Path, problems: &[(&str, &str)]) {
    fs::create_dir_all(dir).unwrap();
    for (name, src) in problems {
        fs::write(dir.join(name), src).unwrap();
    }
}

#[test]
fn corpus_without_prover_is_skipped_and_writes_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let problems = tmp.path().join("problems");
    write_problems(
        &problems,
        &[
            ("p1.p", "fof(g, conjecture, ![X]: (c__Tulip(X) => c__Flower(X)))."),
            ("p2.p", "fof(g, conjecture, unrelated(b))."),
            ("p3.p", "this is not tptp"),
            (".hidden", "ignored"),
        ],
    );
    let ctx = context();
    let selector = Selector::prepare(&ctx, Strategy::Sine { depth: 2, tolerance: 1.0 }, None).unwrap();
    let opts = CorpusOptions {
        prover: None,
        out_dir: tmp.path().join("out"),
        jobs: 2,
    };
    let runs = run_corpus(&problems, &selector, &opts).unwrap();
    let ids: Vec<&str> = runs.iter().map(|r| r.problem_id.as_str()).collect();
    assert_eq!(ids, ["p1", "p2", "p3"]);
    assert_eq!(runs[0].outcome, Outcome::Skipped);
    assert!(runs[0].selected_count > 0);
    assert_eq!(runs[1].outcome, Outcome::Skipped);
    assert_eq!(runs[2].outcome, Outcome::Error);
    let c = OutcomeCounts::from_runs(&runs);
    assert_eq!(c.total(), 3);

    // Empty selection: the prover input holds the goal only.
    let input = fs::read_to_string(tmp.path().join("out/p2.p")).unwrap();
    assert_eq!(input.matches("fof(").count(), 1);
    assert!(input.contains("conjecture"));
}

#[test]
fn vector_corpus_with_unmappable_goal_selects_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let problems = tmp.path().join("problems");
    write_problems(&problems, &[("p.p", "fof(g, conjecture, zzz(b)).")]);
    let ctx = context();
    let selector = Selector::prepare(&ctx, Strategy::Vector { k: 2 }, None).unwrap();
    let opts = CorpusOptions {
        prover: None,
        out_dir: tmp.path().join("out"),
        jobs: 1,
    };
    let runs = run_corpus(&problems, &selector, &opts).unwrap();
    assert_eq!(runs[0].selected_count, 0);
}

#[test]
fn custom_patterns_and_missing_prover() {
    let tmp = tempfile::tempdir().unwrap();
    let script = tmp.path().join("prover.sh");
    fs::write(&script, "#!/bin/sh\necho RESULT: proved\n").unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    let problems = tmp.path().join("problems");
    write_problems(&problems, &[("p.p", "fof(g, conjecture, c__Car(a)).")]);
    let ctx = context();
    let selector = Selector::prepare(&ctx, Strategy::Sine { depth: 1, tolerance: 1.0 }, None).unwrap();

    let mut prover = ProverConfig::new(format!("{} {{input}}", script.display()), 5).unwrap();
    let mut opts = CorpusOptions {
        prover: Some(prover.clone()),
        out_dir: tmp.path().join("out"),
        jobs: 1,
    };
    assert_eq!(run_corpus(&problems, &selector, &opts).unwrap()[0].outcome, Outcome::Error);

    prover.patterns = premsel::harness::OutcomePatterns::new("RESULT: proved", "RESULT: model", "RESULT: timeout").unwrap();
    opts.prover = Some(prover);
    assert_eq!(run_corpus(&problems, &selector, &opts).unwrap()[0].outcome, Outcome::Proof);

    opts.prover = Some(ProverConfig::new("/no/such/prover {input}", 5).unwrap());
    assert!(matches!(run_corpus(&problems, &selector, &opts), Err(Error::ProverNotFound(_))));
}

fn task(w: [&str; 4]) -> FratTask {
    FratTask::new(w[0], w[1], w[2], w[3]).unwrap()
}

#[test]
fn frat_full_selection_finds_every_target() {
    let ctx = context();
    let tasks = [task(["tulip", "daisy", "vase", "flower"]), task(["car", "tulip", "vase", "vehicle"])];
    let report = run_frat(&tasks, &ctx, Strategy::Vector { k: 1 }, &[1, 4, 10], None).unwrap();
    assert_eq!(report.param_name, "k");
    let last = report.rows.last().unwrap();
    assert_eq!(last.param, 10);
    assert_eq!(last.hit_rate, 1.0);
    for pair in report.rows.windows(2) {
        assert!(pair[0].hit_rate <= pair[1].hit_rate);
    }
    let first = &report.rows[0];
    assert_eq!(first.avg_selected, 1.0);
    assert!(first.avg_target_position.is_none_or(|p| p >= 1.0));
}

#[test]
fn frat_without_targets_or_with_unknown_words() {
    let ctx = context();
    let tasks = [task(["tulip", "daisy", "vase", "spaceship"])];
    let report = run_frat(&tasks, &ctx, Strategy::Vector { k: 1 }, &[1, 2, 4], None).unwrap();
    assert!(report.rows.iter().all(|r| r.hit_rate == 0.0 && r.avg_target_position.is_none()));

    // Query words that are not KB symbols give SInE nothing to start from.
    let report = run_frat(&tasks, &ctx, Strategy::Sine { depth: 1, tolerance: 1.0 }, &[1, 3], None).unwrap();
    assert!(report.rows.iter().all(|r| r.hit_rate == 0.0 && r.avg_selected == 0.0));
}

#[test]
fn frat_depth_rows_match_direct_selection() {
    let ctx = context();
    let tasks = [task(["c__Tulip", "c__Vase", "c__Car", "c__Flower"])];
    let report = run_frat(&tasks, &ctx, Strategy::Sine { depth: 1, tolerance: 1.0 }, &[1, 2], None).unwrap();
    for row in &report.rows {
        let sel = Selector::prepare(&ctx, Strategy::Sine { depth: row.param, tolerance: 1.0 }, None)
            .unwrap()
            .select(&frat_goal(&tasks[0]))
            .unwrap();
        assert_eq!(row.avg_selected, sel.len() as f64);
    }
}
