//! Functional remote association tasks: three cue words, one target word.
//! A selection "hits" when one of its axioms mentions the target word.

use std::io::Read;

use serde::Serialize;

use crate::engine::{Context, Selector};
use crate::error::{Error, Result};
use crate::kb::{AnnotatedFormula, Formula, Goal, Role, SymbolId, Term};
use crate::mapping::{brute_force_normalize, NormalizeConfig};
use crate::selection::{SelectionResult, Strategy};

use super::select_or_empty;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FratTask {
    pub query_words: [String; 3],
    pub target_word: String,
}

impl FratTask {
    pub fn new(w1: &str, w2: &str, w3: &str, target: &str) -> Result<Self> {
        let clean = |w: &str| {
            let w = w.trim().to_lowercase();
            if w.is_empty() {
                Err(Error::InvalidConfig("fRAT words must be non-empty".into()))
            } else {
                Ok(w)
            }
        };
        Ok(FratTask {
            query_words: [clean(w1)?, clean(w2)?, clean(w3)?],
            target_word: clean(target)?,
        })
    }
}

/// Reads `w1,w2,w3,target` lines. `#` starts a comment; a literal
/// `w1,w2,w3,target` header is skipped.
pub fn read_frat_tasks(reader: impl Read) -> Result<Vec<FratTask>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut tasks = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::InvalidConfig(format!(
                "fRAT task {}: expected 4 fields, found {}",
                i + 1,
                rec.len()
            )));
        }
        if i == 0 && rec.iter().eq(["w1", "w2", "w3", "target"]) {
            continue;
        }
        tasks.push(FratTask::new(&rec[0], &rec[1], &rec[2], &rec[3])?);
    }
    Ok(tasks)
}

/// `![X]: (w1(X) & w2(X) & w3(X))` as a conjecture.
pub fn frat_goal(task: &FratTask) -> Goal {
    let x = || vec![Term::Var("X".into())];
    let body = Formula::conjunction(task.query_words.iter().map(|w| Formula::atom(w.as_str(), x())));
    Goal::new(
        Vec::new(),
        AnnotatedFormula {
            name: "frat_goal".into(),
            role: Role::Conjecture,
            formula: Formula::forall(vec!["X".into()], body),
            line: 0,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FratRow {
    /// `k` for vector-based strategies, recursion depth otherwise.
    pub param: usize,
    pub tasks: usize,
    pub hits: usize,
    pub hit_rate: f64,
    /// Mean 1-based rank of the first axiom mentioning the target, over hits.
    pub avg_target_position: Option<f64>,
    /// Same mean over all tasks, a miss counting as selection size + 1.
    pub avg_target_position_all: Option<f64>,
    pub avg_selected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FratReport {
    pub strategy: String,
    pub param_name: &'static str,
    pub rows: Vec<FratRow>,
}

/// Rank (1-based) of the first selected axiom mentioning a symbol in `target`.
fn first_hit(ctx: &Context, ranked: &[usize], target: &[SymbolId]) -> Option<usize> {
    ranked.iter().position(|&pos| {
        let syms = &ctx.kb.axiom(pos).symbols;
        target.iter().any(|t| syms.binary_search(t).is_ok())
    })
    .map(|i| i + 1)
}

struct Observation {
    /// Selection for the largest parameter, rank order.
    ranked: Vec<usize>,
    steps: Vec<Option<usize>>,
}

fn with_param(strategy: Strategy, p: usize) -> Strategy {
    match strategy {
        Strategy::Sine { tolerance, .. } => Strategy::Sine { depth: p, tolerance },
        Strategy::Simsine { tolerance, k, .. } => Strategy::Simsine { depth: p, tolerance, k },
        Strategy::Vector { .. } => Strategy::Vector { k: p },
        Strategy::VbUnion { depth, tolerance, .. } => Strategy::VbUnion { depth, tolerance, k: p },
    }
}

/// Runs `strategy` on every task once per parameter value (`k` for vector
/// and vb-union, depth for sine and simsine) and reports hit statistics.
pub fn run_frat(
    tasks: &[FratTask],
    ctx: &Context,
    strategy: Strategy,
    params: &[usize],
    cache_dir: Option<&std::path::Path>,
) -> Result<FratReport> {
    let mut params = params.to_vec();
    params.sort_unstable();
    params.dedup();
    let param_name = match strategy {
        Strategy::Vector { .. } | Strategy::VbUnion { .. } => "k",
        _ => "depth",
    };
    let mut report = FratReport {
        strategy: strategy.name().to_owned(),
        param_name,
        rows: Vec::new(),
    };
    let Some(&max_param) = params.last() else {
        return Ok(report);
    };
    if tasks.is_empty() {
        return Ok(report);
    }

    let normalizer = match &ctx.embedding {
        Some((_, m)) => m.normalizer().clone(),
        None => NormalizeConfig::default(),
    };
    let normalized: Vec<String> = ctx
        .kb
        .symbols()
        .iter()
        .map(|s| brute_force_normalize(s.as_str(), &normalizer))
        .collect();
    let targets: Vec<Vec<SymbolId>> = tasks
        .iter()
        .map(|t| {
            let want = brute_force_normalize(&t.target_word, &normalizer);
            (0..normalized.len())
                .filter(|&i| normalized[i] == want)
                .map(|i| SymbolId(i as u32))
                .collect()
        })
        .collect();

    // Nested parameters (vector k, trigger depth) are served from one
    // selection at the largest value.
    let nested = !matches!(strategy, Strategy::VbUnion { .. });
    let mut per_param: Vec<Vec<(Option<usize>, usize)>> = vec![Vec::new(); params.len()];
    if nested {
        let mut selector = Selector::prepare(ctx, with_param(strategy, max_param), cache_dir)?;
        selector.cap_k();
        for (task, target) in tasks.iter().zip(&targets) {
            let sel = select_or_empty(&selector, &frat_goal(task))?;
            let obs = observe(&sel);
            for (slot, &p) in per_param.iter_mut().zip(&params) {
                let ranked: Vec<usize> = match strategy {
                    Strategy::Vector { .. } => obs.ranked.iter().copied().take(p).collect(),
                    _ => obs
                        .ranked
                        .iter()
                        .zip(&obs.steps)
                        .filter(|(_, s)| s.is_some_and(|s| s <= p))
                        .map(|(&pos, _)| pos)
                        .collect(),
                };
                slot.push((first_hit(ctx, &ranked, target), ranked.len()));
            }
        }
    } else {
        for (slot, &p) in per_param.iter_mut().zip(&params) {
            let selector = Selector::prepare(ctx, with_param(strategy, p), cache_dir)?;
            for (task, target) in tasks.iter().zip(&targets) {
                let sel = select_or_empty(&selector, &frat_goal(task))?;
                let ranked: Vec<usize> = sel.positions().collect();
                slot.push((first_hit(ctx, &ranked, target), ranked.len()));
            }
        }
    }

    for (p, obs) in params.iter().zip(per_param) {
        report.rows.push(summarize(*p, &obs));
    }
    Ok(report)
}

fn observe(sel: &SelectionResult) -> Observation {
    Observation {
        ranked: sel.positions().collect(),
        steps: sel.selected.iter().map(|s| s.step).collect(),
    }
}

fn summarize(param: usize, obs: &[(Option<usize>, usize)]) -> FratRow {
    let tasks = obs.len();
    let hits: Vec<usize> = obs.iter().filter_map(|(h, _)| *h).collect();
    let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    let hit_positions: Vec<f64> = hits.iter().map(|&h| h as f64).collect();
    let all_positions: Vec<f64> = obs
        .iter()
        .map(|&(h, n)| h.unwrap_or(n + 1) as f64)
        .collect();
    let sizes: Vec<f64> = obs.iter().map(|&(_, n)| n as f64).collect();
    FratRow {
        param,
        tasks,
        hits: hits.len(),
        hit_rate: if tasks == 0 { 0.0 } else { hits.len() as f64 / tasks as f64 },
        avg_target_position: mean(&hit_positions),
        avg_target_position_all: mean(&all_positions),
        avg_selected: mean(&sizes).unwrap_or(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{parse_goal, Symbol};

    #[test]
    fn goal_shape() {
        let t = FratTask::new("tulip", "daisy", "vase", "flower").unwrap();
        let g = frat_goal(&t);
        let syms: Vec<_> = g.symbols.iter().map(Symbol::as_str).collect();
        assert_eq!(syms, ["daisy", "tulip", "vase"]);
        assert_eq!(parse_goal(&g.to_tptp()).unwrap().symbols, g.symbols);

        let g = frat_goal(&FratTask::new("a", "a", "a", "b").unwrap());
        assert_eq!(g.symbols.len(), 1);
    }

    #[test]
    fn task_csv() {
        let src = "w1,w2,w3,target\n# comment\nTulip, daisy ,vase,flower\nsensitive,sob,weep,cry\n";
        let tasks = read_frat_tasks(src.as_bytes()).unwrap();
        assert_eq!(tasks.len(), 2);
        assert_eq!(tasks[0].query_words[0], "tulip");
        assert_eq!(tasks[0].query_words[1], "daisy");
        assert!(read_frat_tasks("a,b,c\n".as_bytes()).is_err());
        assert!(read_frat_tasks("a,b,,d\n".as_bytes()).is_err());
        assert!(read_frat_tasks("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn summary_rows() {
        let row = summarize(5, &[(Some(1), 5), (None, 5), (Some(3), 5), (None, 5)]);
        assert_eq!(row.hit_rate, 0.5);
        assert_eq!(row.avg_target_position, Some(2.0));
        assert_eq!(row.avg_target_position_all, Some((1.0 + 6.0 + 3.0 + 6.0) / 4.0));
        assert_eq!(row.avg_selected, 5.0);
        assert_eq!(summarize(1, &[]).avg_target_position, None);
    }
}
