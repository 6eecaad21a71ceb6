//! Generate a synthetic query and data, round-trip it through CSV and run plans.

use std::sync::Arc;

use qobench::engine::{
    execute_plan, optimize, synthetic_query, Database, QueryShape, QueryStats, Strategy, SynthConfig, Truthful,
};
use qobench::model::BackendCapabilities;
use qobench::sampling::sample_n_plans;

fn main() -> qobench::Result<()> {
    let q = synthetic_query("chain4", 4, QueryShape::Chain, &SynthConfig::default(), 9)?;
    for t in q.db.catalog().tables() {
        println!("{} rows={} indexes={}", t.name, t.row_count, t.indexes.len());
    }

    let dir = tempfile::tempdir().expect("temp dir");
    q.db.write_csv_dir(dir.path())?;
    let db = Arc::new(Database::load_csv_dir(q.db.catalog().clone(), dir.path())?);

    let caps = BackendCapabilities::default();
    let stats = QueryStats::new(&q.graph, Arc::clone(&db))?;
    let best = optimize(Strategy::Exhaustive, &stats, &Truthful, &caps, db.catalog())?;
    let reference = execute_plan(&best.plan, &q.graph, &db)?;
    println!("best {} work {}", best.plan.fingerprint(), reference.work());

    let sample = sample_n_plans(&q.graph, 5, &Default::default(), &caps, db.catalog(), 1)?;
    for p in &sample.plans {
        let e = execute_plan(p, &q.graph, &db)?;
        let same = e.digest == reference.digest;
        println!("{} work {} same result {same}", p.fingerprint(), e.work());
    }
    Ok(())
}
