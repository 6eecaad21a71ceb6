//! Optimizer counters and their fit against optimization time.

use std::path::Path;

use qobench::efficiency::Counter;
use qobench::harness::{run_efficiency, Suite};

fn main() -> qobench::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/suite");
    for name in ["toy-exhaustive.json", "replay-mysql.json"] {
        let suite = Suite::load(dir.join(name))?;
        let report = run_efficiency(&suite)?;
        println!("{}", report.backend);
        for c in Counter::ALL {
            let mean = report.mean(c).map_or("N/A".to_string(), |m| format!("{m:.1}"));
            match report.fit(c) {
                Some(f) => println!("  {:4} mean {mean:>8}  r2 {:.3}", c.label(), f.r_squared),
                None => println!("  {:4} mean {mean:>8}  no fit", c.label()),
            }
        }
        for r in &report.regressions {
            if let Some(note) = &r.note {
                println!("  {}: {note}", r.counter.label());
            }
        }
    }
    Ok(())
}
