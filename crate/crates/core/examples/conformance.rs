//! Check adapters against the backend contract.

use std::path::Path;

use qobench::adapter::adapter_conformance;
use qobench::harness::Suite;

fn main() -> qobench::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/suite");
    for name in ["toy-exhaustive.json", "replay-mysql.json"] {
        let suite = Suite::load(dir.join(name))?;
        let mut backend = suite.backend()?;
        let report = adapter_conformance(backend.as_mut(), &suite.queries[0]);
        println!("{name}: {}", if report.passed() { "pass" } else { "fail" });
        for c in &report.checks {
            println!("  {:24} {}", c.name, if c.passed { "ok" } else { &c.detail });
        }
    }
    Ok(())
}
