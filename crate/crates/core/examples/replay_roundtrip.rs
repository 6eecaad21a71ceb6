//! Record a toy run as a trace, then replay it and compare the reports.

use std::path::Path;

use qobench::adapter::read_trace;
use qobench::harness::{run_effectiveness, AdapterConfig, Suite, SuiteConfig};

fn main() -> qobench::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/suite");
    let tmp = tempfile::tempdir().expect("temp dir");
    let trace = tmp.path().join("trace.jsonl");

    let mut cfg = SuiteConfig::load(dir.join("toy-noisy.json"))?;
    cfg.export_trace = Some(trace.clone());
    let live = run_effectiveness(&Suite::open(cfg.clone())?)?;
    println!("recorded {} queries", read_trace(&trace)?.len());

    cfg.adapter = AdapterConfig::Replay {
        trace,
        descriptor: None,
        unknown_plan: Default::default(),
    };
    cfg.export_trace = None;
    let replayed = run_effectiveness(&Suite::open(cfg)?)?;

    let a = serde_json::to_string(&live.report)?;
    let b = serde_json::to_string(&replayed.report)?;
    println!("live OF {:.4}, replay OF {:.4}", live.report.optimality_frequency, replayed.report.optimality_frequency);
    println!("reports identical: {}", a == b);
    Ok(())
}
