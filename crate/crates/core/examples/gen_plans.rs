//! Random physical plans for one query, compiled to hinted SQL.

use std::path::Path;

use qobench::dialect::{builtin_dialect, DialectStyle};
use qobench::harness::generate_plans;
use qobench::model::{BackendCapabilities, Catalog, JoinAlgorithm, JoinGraph};

fn main() -> qobench::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/suite");
    let catalog = Catalog::load(dir.join("catalog.json"))?;
    let graphs = JoinGraph::load_all(dir.join("queries.json"))?;
    let q = graphs.iter().find(|g| g.len() == 3).expect("a 3-table query");

    for style in [DialectStyle::StyleX, DialectStyle::StyleY, DialectStyle::StyleMysql] {
        let d = builtin_dialect(style);
        // the MySQL style only forces nested loops
        let caps = match style {
            DialectStyle::StyleMysql => BackendCapabilities::new(vec![JoinAlgorithm::NestedLoop], true)?,
            _ => BackendCapabilities::default(),
        };
        let plans = generate_plans(q, &catalog, &caps, Some(3), 11, Some(&d))?;
        println!("-- {style}");
        for p in &plans.plans {
            println!("{}", p.fingerprint);
            println!("  {}", p.sql.as_deref().unwrap_or(""));
        }
    }
    Ok(())
}
