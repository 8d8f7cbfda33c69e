use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::json;

use super::{fit_power_law, runtime_profile, AggregateRow, ExperimentError, ExperimentResult, ProfileRow, TrialTrace};

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace<W: Write>(trace: &TrialTrace, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "query_index",
        "src",
        "dst",
        "label",
        "labeled_count",
        "deduced_count",
        "auc",
        "insert_runtime_us",
        "closure_size",
    ])?;
    for r in &trace.records {
        w.write_record([
            r.query_index.to_string(),
            opt(r.pair.map(|p| p.src)),
            opt(r.pair.map(|p| p.dst)),
            opt(r.label.map(|l| l.sign())),
            r.labeled_count.to_string(),
            r.deduced_count.to_string(),
            opt(r.auc),
            format!("{:.3}", r.insert_runtime_us),
            r.closure_size.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate<W: Write>(rows: &[AggregateRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["checkpoint", "metric", "mean", "ci95"])?;
    for r in rows {
        w.write_record([
            r.checkpoint.to_string(),
            r.metric.to_string(),
            r.mean.to_string(),
            r.ci95.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_runtime_profile<W: Write>(rows: &[ProfileRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "closure_size_lo",
        "closure_size_hi",
        "mean_closure_size",
        "mean_insert_runtime_us",
        "count",
    ])?;
    for r in rows {
        w.write_record([
            r.closure_size_lo.to_string(),
            r.closure_size_hi.to_string(),
            r.mean_closure_size.to_string(),
            r.mean_insert_runtime_us.to_string(),
            r.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Number of buckets in `runtime_profile.csv`.
pub const PROFILE_BUCKETS: usize = 20;

/// Writes `trace_<trial>.csv`, `aggregate.csv`, `runtime_profile.csv`,
/// `config.json` and `summary.json` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(dir)?;
    let create = |name: &str| -> Result<BufWriter<File>, ExperimentError> { Ok(BufWriter::new(File::create(dir.join(name))?)) };
    for t in &result.traces {
        write_trace(t, create(&format!("trace_{}.csv", t.trial))?)?;
    }
    write_aggregate(&result.aggregate, create("aggregate.csv")?)?;
    let profile = runtime_profile(&result.traces, PROFILE_BUCKETS);
    write_runtime_profile(&profile, create("runtime_profile.csv")?)?;
    serde_json::to_writer_pretty(create("config.json")?, &result.config)?;
    let coverage: Vec<f64> = result.traces.iter().map(|t| t.test_coverage).collect();
    let summary = json!({
        "strategy": result.config.strategy.display_name(),
        "n_trials": result.traces.len(),
        "soundness": result.soundness,
        "mean_test_coverage": coverage.iter().sum::<f64>() / coverage.len().max(1) as f64,
        "exhausted_trials": result.traces.iter().filter(|t| t.exhausted).count(),
        "runtime_power_law": fit_power_law(&profile),
    });
    let mut w = create("summary.json")?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    w.flush()?;
    Ok(())
}
