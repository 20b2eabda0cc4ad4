//! Batch evaluation: prover runs over problem corpora and the fRAT study.

mod frat;
mod prover;
mod report;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use frat::{frat_goal, read_frat_tasks, run_frat, FratReport, FratRow, FratTask};
pub use prover::{run_prover, Outcome, OutcomePatterns, ProverConfig, ProverRun};
pub use report::{write_frat_tsv, write_runs_tsv, write_summary_tsv, CorpusReport};

use crate::engine::Selector;
use crate::error::{Error, Result};
use crate::kb::{parse_goal, Goal};
use crate::selection::{SelectionResult, Strategy};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProblemRun {
    pub problem_id: String,
    pub strategy: Strategy,
    pub selected_count: usize,
    pub outcome: Outcome,
    pub wall_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpu_secs: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    pub proof: usize,
    pub model: usize,
    pub timeout: usize,
    pub error: usize,
    pub skipped: usize,
}

impl OutcomeCounts {
    pub fn from_runs<'a>(runs: impl IntoIterator<Item = &'a ProblemRun>) -> Self {
        let mut c = OutcomeCounts::default();
        for r in runs {
            match r.outcome {
                Outcome::Proof => c.proof += 1,
                Outcome::Model => c.model += 1,
                Outcome::Timeout => c.timeout += 1,
                Outcome::Error => c.error += 1,
                Outcome::Skipped => c.skipped += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.proof + self.model + self.timeout + self.error + self.skipped
    }
}

#[derive(Clone, Debug)]
pub struct CorpusOptions {
    pub prover: Option<ProverConfig>,
    /// Where prover input files are written.
    pub out_dir: PathBuf,
    /// Concurrent problem runs.
    pub jobs: usize,
}

/// Problem files of a corpus directory, sorted by name.
pub fn problem_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let hidden = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('.'));
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Selection that treats an unvectorizable goal as selecting nothing.
pub(crate) fn select_or_empty(selector: &Selector<'_>, goal: &Goal) -> Result<SelectionResult> {
    match selector.select(goal) {
        Err(Error::GoalNotVectorizable) => Ok(SelectionResult {
            strategy: selector.strategy(),
            selected: Vec::new(),
        }),
        r => r,
    }
}

/// Prover input: selected axioms in rank order, then the goal.
pub fn prover_input(selector: &Selector<'_>, selection: &SelectionResult, goal: &Goal) -> String {
    let mut out = format!(
        "% {} selected axiom(s), {}\n",
        selection.len(),
        selection.strategy
    );
    out.push_str(&selection.to_tptp(&selector.context().kb));
    out.push_str(&goal.to_tptp());
    out
}

fn run_problem(selector: &Selector<'_>, path: &Path, opts: &CorpusOptions) -> Result<ProblemRun> {
    let problem_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let strategy = selector.strategy();
    let failed = |problem_id: String| ProblemRun {
        problem_id,
        strategy,
        selected_count: 0,
        outcome: Outcome::Error,
        wall_secs: 0.0,
        cpu_secs: None,
    };

    let goal = match fs::read_to_string(path).map_err(Error::from).and_then(|s| parse_goal(&s)) {
        Ok(g) => g,
        Err(e) => {
            log::warn!("{}: {e}", path.display());
            return Ok(failed(problem_id));
        }
    };
    let selection = select_or_empty(selector, &goal)?;
    let input = opts.out_dir.join(format!("{problem_id}.p"));
    fs::write(&input, prover_input(selector, &selection, &goal))?;

    let Some(prover) = &opts.prover else {
        return Ok(ProblemRun {
            problem_id,
            strategy,
            selected_count: selection.len(),
            outcome: Outcome::Skipped,
            wall_secs: 0.0,
            cpu_secs: None,
        });
    };
    let run = run_prover(prover, &input)?;
    Ok(ProblemRun {
        problem_id,
        strategy,
        selected_count: selection.len(),
        outcome: run.outcome,
        wall_secs: run.wall_secs,
        cpu_secs: run.cpu_secs,
    })
}

/// Selects for every problem of `problems`, writes the prover inputs and,
/// when a prover is configured, runs and classifies it. Runs are returned
/// in problem-file order.
pub fn run_corpus(problems: &Path, selector: &Selector<'_>, opts: &CorpusOptions) -> Result<Vec<ProblemRun>> {
    let files = problem_files(problems)?;
    fs::create_dir_all(&opts.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    pool.install(|| {
        files
            .par_iter()
            .map(|p| run_problem(selector, p, opts))
            .collect()
    })
}
