//! Effectiveness of the toy optimizer strategies on the demo suite.

use std::path::Path;

use qobench::harness::{run_effectiveness, write_effectiveness, Suite, SuiteConfig};

fn main() -> qobench::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/suite");
    let out = tempfile::tempdir().expect("temp dir");
    for name in ["toy-exhaustive.json", "toy-greedy.json", "toy-noisy.json"] {
        let mut cfg = SuiteConfig::load(dir.join(name))?;
        cfg.output.dir = out.path().join(name);
        cfg.export_trace = None;
        let suite = Suite::open(cfg)?;
        let run = run_effectiveness(&suite)?;
        let r = &run.report;
        println!("{}: OF {:.3}", r.backend, r.optimality_frequency);
        for q in &r.per_query {
            print!("  {} PF {:.3} [{:.3}, {:.3}]", q.query_id, q.pf.estimate, q.pf.low, q.pf.high);
            if let Some(m) = &q.misses {
                print!("  misses: {} costed, {} not enumerated", m.costed_but_rejected, m.never_enumerated);
            }
            println!();
        }
        write_effectiveness(&suite, r)?;
    }
    Ok(())
}
