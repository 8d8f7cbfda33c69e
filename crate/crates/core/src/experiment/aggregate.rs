use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::datasets::Pool;
use crate::rng::derive_seed;

use super::{run_trial, ExperimentConfig, ExperimentError, SoundnessAudit, TrialTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Auc,
    LabeledCount,
    DeducedCount,
    ClosureSize,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Auc, Metric::LabeledCount, Metric::DeducedCount, Metric::ClosureSize];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Auc => "auc",
            Metric::LabeledCount => "labeled_count",
            Metric::DeducedCount => "deduced_count",
            Metric::ClosureSize => "closure_size",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TrialTrace {
    /// Value of `metric` at query count `checkpoint`: the latest round at or
    /// before the checkpoint that carries the metric. A trial that ran out of
    /// candidates early keeps its final value.
    pub fn value_at(&self, checkpoint: usize, metric: Metric) -> Option<f64> {
        self.records
            .iter()
            .rev()
            .filter(|r| r.query_index <= checkpoint)
            .find_map(|r| match metric {
                Metric::Auc => r.auc,
                Metric::LabeledCount => Some(r.labeled_count as f64),
                Metric::DeducedCount => Some(r.deduced_count as f64),
                Metric::ClosureSize => Some(r.closure_size as f64),
            })
    }
}

/// Query counts at which every trial reports: `0, e, 2e, ...` and the budget.
pub fn checkpoints(budget: usize, eval_every: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=budget).step_by(eval_every.max(1)).collect();
    if out.last() != Some(&budget) {
        out.push(budget);
    }
    out
}

/// Mean and normal-approximation 95% half-width `1.96 * sd / sqrt(n)`; the
/// half-width is 0 for fewer than two values.
pub fn mean_ci95(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * var.sqrt() / (n as f64).sqrt())
}

/// Per-trial `a - b` at a checkpoint, pairing traces by trial index.
pub fn paired_differences(a: &[TrialTrace], b: &[TrialTrace], checkpoint: usize, metric: Metric) -> Vec<f64> {
    a.iter()
        .filter_map(|ta| {
            let tb = b.iter().find(|t| t.trial == ta.trial)?;
            Some(ta.value_at(checkpoint, metric)? - tb.value_at(checkpoint, metric)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub checkpoint: usize,
    pub metric: Metric,
    pub mean: f64,
    pub ci95: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub traces: Vec<TrialTrace>,
    pub aggregate: Vec<AggregateRow>,
    pub soundness: SoundnessAudit,
}

impl ExperimentResult {
    pub fn row(&self, checkpoint: usize, metric: Metric) -> Option<&AggregateRow> {
        self.aggregate
            .iter()
            .find(|r| r.checkpoint == checkpoint && r.metric == metric)
    }
}

fn aggregate(traces: &[TrialTrace], cps: &[usize]) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for &cp in cps {
        for metric in Metric::ALL {
            let values: Vec<f64> = traces.iter().filter_map(|t| t.value_at(cp, metric)).collect();
            let (mean, ci95) = mean_ci95(&values);
            rows.push(AggregateRow {
                checkpoint: cp,
                metric,
                mean,
                ci95,
                n: values.len(),
            });
        }
    }
    rows
}

/// `n_trials` independent trials with seeds `derive_seed(rng_seed, trial)`,
/// aggregated at [`checkpoints`].
pub fn run_experiment(pool: &Pool, cfg: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    cfg.validate()?;
    let traces = (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| run_trial(pool, cfg, t, derive_seed(cfg.rng_seed, t as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let cps = checkpoints(cfg.budget, cfg.eval_every);
    let mut soundness = SoundnessAudit::default();
    for t in &traces {
        soundness.merge(&t.soundness);
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        aggregate: aggregate(&traces, &cps),
        traces,
        soundness,
    })
}
