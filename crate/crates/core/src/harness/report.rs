//! Tab-separated and JSON reports for corpus runs and fRAT studies.

use std::io::Write;

use serde::Serialize;

use super::{FratReport, OutcomeCounts, ProblemRun};
use crate::error::Result;

/// Everything a corpus run produced, for JSON output.
#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub runs: Vec<ProblemRun>,
    pub summary: Vec<(String, OutcomeCounts)>,
}

impl CorpusReport {
    /// Groups the summary by strategy display string, in first-seen order.
    pub fn new(runs: Vec<ProblemRun>) -> Self {
        let mut labels: Vec<String> = Vec::new();
        for r in &runs {
            let label = r.strategy.to_string();
            if !labels.contains(&label) {
                labels.push(label);
            }
        }
        let summary = labels
            .into_iter()
            .map(|l| {
                let counts = OutcomeCounts::from_runs(runs.iter().filter(|r| r.strategy.to_string() == l));
                (l, counts)
            })
            .collect();
        CorpusReport { runs, summary }
    }
}

fn tsv_writer(out: impl Write) -> csv::Writer<impl Write> {
    csv::WriterBuilder::new()
        .delimiter(b'\t')
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(out)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_owned(), |v| format!("{v:.3}"))
}

pub fn write_runs_tsv(runs: &[ProblemRun], out: impl Write) -> Result<()> {
    let mut w = tsv_writer(out);
    w.write_record(["problem", "strategy", "selected", "outcome", "wall_secs", "cpu_secs"])?;
    for r in runs {
        w.write_record([
            r.problem_id.clone(),
            r.strategy.to_string(),
            r.selected_count.to_string(),
            r.outcome.as_str().to_owned(),
            format!("{:.3}", r.wall_secs),
            opt(r.cpu_secs),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_tsv(groups: &[(String, OutcomeCounts)], out: impl Write) -> Result<()> {
    let mut w = tsv_writer(out);
    w.write_record(["strategy", "proof", "model", "timeout", "error", "skipped", "total"])?;
    for (label, c) in groups {
        w.write_record([
            label.clone(),
            c.proof.to_string(),
            c.model.to_string(),
            c.timeout.to_string(),
            c.error.to_string(),
            c.skipped.to_string(),
            c.total().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One line per parameter value, ascending. Hit rate is a percentage.
pub fn write_frat_tsv(report: &FratReport, out: impl Write) -> Result<()> {
    let mut w = tsv_writer(out);
    w.write_record([report.param_name, "hit_pct", "avg_pos", "avg_pos_all", "avg_selected", "hits", "tasks"])?;
    let mut rows: Vec<_> = report.rows.iter().collect();
    rows.sort_by_key(|r| r.param);
    for r in rows {
        w.write_record([
            r.param.to_string(),
            format!("{:.2}", 100.0 * r.hit_rate),
            opt(r.avg_target_position),
            opt(r.avg_target_position_all),
            format!("{:.3}", r.avg_selected),
            r.hits.to_string(),
            r.tasks.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
