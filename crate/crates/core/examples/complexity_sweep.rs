//! Optimality frequency of greedy join ordering as queries grow.

use qobench::engine::Strategy;
use qobench::harness::{complexity_sweep, SweepConfig};

fn main() -> qobench::Result<()> {
    let report = complexity_sweep(&SweepConfig::new(3, 6, 20, 5, Strategy::GreedyLeftDeep))?;
    println!("tables  OF     work ratio");
    for r in &report.rows {
        println!("{:6}  {:.3}  {:.3}", r.tables, r.optimality_frequency, r.mean_work_ratio);
    }
    println!("non-increasing: {}", report.non_increasing());
    Ok(())
}
