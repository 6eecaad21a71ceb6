//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use qobench::adapter::{Backend, Runtime};
use qobench::dialect::{builtin_dialect, compile_plan, DialectStyle};
use qobench::effectiveness::{
    benchmark_query, classify_fingerprints, optimality_frequency, performance_factor, BenchmarkOptions,
};
use qobench::efficiency::{efficiency_report, linear_regression, Counter, QueryCounters};
use qobench::encoding::{sample_encoding, BitSequence};
use qobench::engine::{
    enumerate_plan_space, exact_performance_factor, execute_plan, space_summary, synthetic_query, QueryShape,
    QueryStats, Strategy, SynthConfig, ToyBackend, ToyConfig, DEFAULT_ENUMERATION_BOUND,
};
use qobench::harness::{complexity_sweep, deterministic_part, SweepConfig};
use qobench::model::{
    AccessMethod, BackendCapabilities, Catalog, ColumnRef, IndexInfo, JoinAlgorithm, JoinGraph, JoinPredicate,
    PhysicalPlan, PlanFingerprint, Shape, TableInfo, TableRef,
};
use qobench::sampling::{required_sample_size, sample_n_plans, SamplingConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn micro_config() -> SynthConfig {
    SynthConfig {
        min_rows: 6,
        max_rows: 16,
        min_domain: 4,
        max_domain: 10,
        ..SynthConfig::default()
    }
}

const SHAPES: [QueryShape; 3] = [QueryShape::Chain, QueryShape::Star, QueryShape::Clique];

fn sample_size() -> Outcome {
    let cfg = SamplingConfig {
        confidence_z: 1.96,
        precision: 0.05,
        prior: 0.5,
        population: None,
    };
    let start = Instant::now();
    let n = required_sample_size(&cfg).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    check(n == 385 && took < Duration::from_millis(1), format!("n={n} in {took:?}"))
}

fn chi_square(counts: &[u64], total: u64) -> f64 {
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

fn sampler_uniformity() -> Outcome {
    let start = Instant::now();
    let catalan: Vec<usize> = (1..=6).map(|n| BitSequence::all(n).len()).collect();
    let tables: Vec<TableRef> = ["A", "B", "C", "D"].iter().map(|t| TableRef::new(*t)).collect();
    let g = JoinGraph::new("n4", tables, vec![], vec![]).map_err(|e| e.to_string())?;
    let shapes = Shape::all(4);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws = 200_000u64;
    let mut by_shape = vec![0u64; shapes.len()];
    let mut cells: HashMap<(usize, Vec<String>), u64> = HashMap::new();
    for _ in 0..draws {
        let enc = sample_encoding(&g, &mut rng);
        let shape = enc.tree().shape();
        let s = shapes.iter().position(|x| *x == shape).expect("known shape");
        by_shape[s] += 1;
        *cells.entry((s, enc.permutation)).or_default() += 1;
    }
    let mut cell_counts: Vec<u64> = cells.values().copied().collect();
    cell_counts.resize(120, 0);
    let shape_stat = chi_square(&by_shape, draws);
    let cell_stat = chi_square(&cell_counts, draws);
    let crit = |df: f64| ChiSquared::new(df).unwrap().inverse_cdf(0.999);
    let took = start.elapsed();
    check(
        catalan == [1, 1, 2, 5, 14, 42]
            && cells.len() == 120
            && shape_stat < crit(4.0)
            && cell_stat < crit(119.0)
            && took < Duration::from_secs(30),
        format!(
            "catalan {:?}; shapes chi2 {shape_stat:.2} < {:.2}; cells chi2 {cell_stat:.2} < {:.2}; {took:.1?}",
            &catalan[1..],
            crit(4.0),
            crit(119.0)
        ),
    )
}

fn estimator_coverage() -> Outcome {
    let start = Instant::now();
    let q = synthetic_query("clique3", 3, QueryShape::Clique, &SynthConfig::default(), 3).map_err(|e| e.to_string())?;
    let caps = BackendCapabilities::default();
    let catalog = q.db.catalog();
    let stats = QueryStats::new(&q.graph, Arc::clone(&q.db)).map_err(|e| e.to_string())?;
    let bound = DEFAULT_ENUMERATION_BOUND;
    // a chosen plan near the middle of the space, where the estimate varies most
    let space = enumerate_plan_space(&q.graph, &caps, catalog, bound).map_err(|e| e.to_string())?;
    let mut scored: Vec<(f64, &PhysicalPlan)> = space
        .iter()
        .map(|p| Ok((exact_performance_factor(&stats, p, &caps, catalog, bound)?, p)))
        .collect::<qobench::Result<_>>()
        .map_err(|e| e.to_string())?;
    scored.sort_by(|a, b| (a.0 - 0.5).abs().total_cmp(&(b.0 - 0.5).abs()));
    let (exact, chosen) = scored[0];
    let chosen_rt = Runtime(stats.plan_work(chosen).map_err(|e| e.to_string())? as f64);
    let cfg = SamplingConfig::default();
    let n = required_sample_size(&cfg).map_err(|e| e.to_string())? as usize;
    let runs = 200;
    let mut hits = 0;
    for seed in 0..runs {
        let sample = sample_n_plans(&q.graph, n, &cfg, &caps, catalog, 10_000 + seed).map_err(|e| e.to_string())?;
        let rts: Vec<Runtime> = sample
            .plans
            .iter()
            .map(|p| stats.plan_work(p).map(|w| Runtime(w as f64)))
            .collect::<qobench::Result<_>>()
            .map_err(|e| e.to_string())?;
        let pf = performance_factor(chosen_rt, &rts, cfg.precision).map_err(|e| e.to_string())?;
        if (pf.estimate - exact).abs() <= cfg.precision {
            hits += 1;
        }
    }
    let took = start.elapsed();
    let share = hits as f64 / runs as f64;
    check(
        share >= 0.9 && took < Duration::from_secs(120),
        format!("{hits}/{runs} estimates within 0.05 of exact PF {exact:.4} (space {}); {took:.1?}", space.len()),
    )
}

fn toy_backend(q: &qobench::engine::SyntheticQuery, strategy: Strategy) -> qobench::Result<ToyBackend> {
    ToyBackend::new(Arc::clone(&q.db), &ToyConfig::new(strategy))
}

fn oracle_optimality() -> Outcome {
    let start = Instant::now();
    let caps = BackendCapabilities::default();
    let opts = |seed| BenchmarkOptions {
        sampling: SamplingConfig::default(),
        seed,
        timeout_factor: None,
        classify_misses: false,
    };
    let (mut best, mut worst) = (Vec::new(), Vec::new());
    let mut exact_ones = 0;
    let mut tie_free = 0;
    let mut total = 0;
    let mut run = || -> qobench::Result<()> {
        for n in 2..=5 {
            for (i, shape) in SHAPES.iter().enumerate() {
                for seed in 0..2u64 {
                    let q = synthetic_query(format!("{shape}{n}-{seed}"), n, *shape, &micro_config(), seed * 31 + i as u64)?;
                    total += 1;
                    let mut ex = toy_backend(&q, Strategy::Exhaustive)?;
                    let r = benchmark_query(&mut ex, &q.graph, &opts(seed))?;
                    let plan = ex.run_chosen(&q.graph)?.plan.expect("toy returns plans");
                    let stats = QueryStats::new(&q.graph, Arc::clone(&q.db))?;
                    let exact = exact_performance_factor(&stats, &plan, &caps, q.db.catalog(), DEFAULT_ENUMERATION_BOUND)?;
                    if exact == 1.0 {
                        exact_ones += 1;
                    }
                    best.push(r);
                    let summary = space_summary(&stats, &caps, q.db.catalog(), DEFAULT_ENUMERATION_BOUND)?;
                    if summary.min_work < summary.max_work {
                        tie_free += 1;
                        let mut adv = toy_backend(&q, Strategy::AdversarialWorst)?;
                        worst.push(benchmark_query(&mut adv, &q.graph, &opts(seed))?);
                    }
                }
            }
        }
        Ok(())
    };
    run().map_err(|e| e.to_string())?;
    let of_best = optimality_frequency(&best).map_err(|e| e.to_string())?;
    let of_worst = optimality_frequency(&worst).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    check(
        exact_ones == total && of_best == 1.0 && of_worst == 0.0 && took < Duration::from_secs(60),
        format!(
            "exact PF 1.0 on {exact_ones}/{total}; exhaustive OF {of_best}; adversarial OF {of_worst} on {tie_free} tie-free queries; {took:.1?}"
        ),
    )
}

fn hint_fidelity() -> Outcome {
    let catalog = Catalog::new(vec![
        TableInfo {
            name: "A".into(),
            columns: vec!["a".into()],
            row_count: 1,
            indexes: vec![IndexInfo { name: "indexA".into(), table: "A".into(), column: "a".into() }],
        },
        TableInfo {
            name: "B".into(),
            columns: vec!["b".into()],
            row_count: 1,
            indexes: vec![IndexInfo { name: "indexB".into(), table: "B".into(), column: "b".into() }],
        },
    ])
    .map_err(|e| e.to_string())?;
    let g = JoinGraph::new(
        "hint",
        vec![TableRef::new("A"), TableRef::new("B")],
        vec![JoinPredicate::new(ColumnRef::new("A", "a"), ColumnRef::new("B", "b"))],
        vec![],
    )
    .map_err(|e| e.to_string())?;
    g.check_against(&catalog).map_err(|e| e.to_string())?;
    let plan = |alg| {
        PhysicalPlan::join(
            alg,
            g.predicates().to_vec(),
            PhysicalPlan::scan("A", AccessMethod::IndexScan("indexA".into())),
            PhysicalPlan::scan("B", AccessMethod::IndexScan("indexB".into())),
        )
    };
    let render = |style, alg| {
        compile_plan(&plan(alg), &g, &builtin_dialect(style))
            .map(|h| h.text)
            .map_err(|e| e.to_string())
    };
    let x = render(DialectStyle::StyleX, JoinAlgorithm::Hash)?;
    let y = render(DialectStyle::StyleY, JoinAlgorithm::Hash)?;
    let my = render(DialectStyle::StyleMysql, JoinAlgorithm::NestedLoop)?;
    let expected = "SELECT * FROM A WITH (INDEX(indexA)) INNER HASH JOIN B WITH (INDEX(indexB)) ON A.a = B.b";
    check(
        x == expected
            && my.contains("STRAIGHT_JOIN")
            && my.contains("USE INDEX(")
            && y.contains("ORDERED")
            && y.contains("USE_HASH"),
        format!("x: {x} | y: {y} | mysql: {my}"),
    )
}

fn plan_equivalence() -> Outcome {
    let start = Instant::now();
    let caps = BackendCapabilities::default();
    let mut plans = 0usize;
    let mut bad = Vec::new();
    let mut run = || -> qobench::Result<()> {
        for n in 1..=4 {
            for (i, shape) in SHAPES.iter().enumerate() {
                let cfg = SynthConfig {
                    min_rows: 4,
                    max_rows: 10,
                    selection_rate: 0.5,
                    ..micro_config()
                };
                let q = synthetic_query(format!("{shape}{n}"), n, *shape, &cfg, 100 + i as u64)?;
                let space = enumerate_plan_space(&q.graph, &caps, q.db.catalog(), DEFAULT_ENUMERATION_BOUND)?;
                let digests: HashSet<_> = space
                    .iter()
                    .map(|p| execute_plan(p, &q.graph, &q.db).map(|e| e.digest))
                    .collect::<qobench::Result<_>>()?;
                plans += space.len();
                if digests.len() != 1 {
                    bad.push(q.graph.query_id().to_string());
                }
            }
        }
        Ok(())
    };
    run().map_err(|e| e.to_string())?;
    let took = start.elapsed();
    check(
        bad.is_empty() && took < Duration::from_secs(60),
        format!("{plans} plans over 12 queries, digest mismatches in {bad:?}; {took:.1?}"),
    )
}

fn regression_utility() -> Outcome {
    let err = |e: qobench::Error| e.to_string();
    let x: Vec<f64> = (1..=10).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 7.0).collect();
    let exact = linear_regression(&x, &y).map_err(err)?;
    let three = linear_regression(&[1.0, 2.0, 3.0], &[2.0, 2.0, 5.0]).map_err(err)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;

    let mut queries = Vec::new();
    for i in 0..20usize {
        let n = 2 + i % 5;
        let shape = SHAPES[i % 3];
        let q = synthetic_query(format!("s{i}"), n, shape, &SynthConfig::default(), 500 + i as u64).map_err(err)?;
        let mut toy = toy_backend(&q, Strategy::Exhaustive).map_err(err)?;
        let probe = toy.probe(&q.graph).map_err(err)?.expect("toy probes");
        queries.push(QueryCounters {
            query_id: q.graph.query_id().to_string(),
            counters: probe.counters,
        });
    }
    let report = efficiency_report("toy-exhaustive", queries).map_err(err)?;
    let fits: Vec<(Counter, f64)> = Counter::ALL
        .iter()
        .map(|c| (*c, report.fit(*c).map_or(0.0, |f| f.r_squared)))
        .collect();
    let toy_ok = fits.iter().all(|(_, r2)| *r2 >= 0.7);
    let fit_text: Vec<String> = fits.iter().map(|(c, r2)| format!("{c} {r2:.3}")).collect();
    check(
        close(exact.r_squared, 1.0)
            && close(three.slope, 1.5)
            && close(three.intercept, -1.0)
            && close(three.r_squared, 0.75)
            && toy_ok,
        format!(
            "exact-linear r2 {}; 3-point slope {} intercept {} (expected -1.0) r2 {}; toy r2 {}",
            exact.r_squared,
            three.slope,
            three.intercept,
            three.r_squared,
            fit_text.join(", ")
        ),
    )
}

fn miss_classification() -> Outcome {
    let better: Vec<PlanFingerprint> = (0..71).map(|i| PlanFingerprint(format!("p{i}"))).collect();
    let considered = better[..54].iter().cloned().collect();
    let m = classify_fingerprints(&better, &considered);
    let cost = m.cost_model_share().unwrap_or(0.0);
    let enumeration = m.enumeration_share().unwrap_or(0.0);
    check(
        m.costed_but_rejected == 54
            && m.never_enumerated == 17
            && (cost * 100.0).round() == 76.0
            && (enumeration * 100.0).round() == 24.0,
        format!(
            "({}, {}) = {:.0}% / {:.0}%",
            m.costed_but_rejected,
            m.never_enumerated,
            cost * 100.0,
            enumeration * 100.0
        ),
    )
}

fn complexity_trend() -> Outcome {
    let start = Instant::now();
    let mut ok = 0;
    let mut rows = Vec::new();
    for rep in 0..10u64 {
        let r = complexity_sweep(&SweepConfig::new(3, 6, 20, rep, Strategy::GreedyLeftDeep)).map_err(|e| e.to_string())?;
        if r.non_increasing() {
            ok += 1;
        }
        let ofs: Vec<String> = r.rows.iter().map(|row| format!("{:.2}", row.optimality_frequency)).collect();
        rows.push(format!("[{}]", ofs.join(" ")));
    }
    check(
        ok >= 9,
        format!("non-increasing in {ok}/10 reps; OF by size {}; {:.1?}", rows.join(" "), start.elapsed()),
    )
}

fn determinism() -> Outcome {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/suite");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for e in fs::read_dir(&src).map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        if e.path().is_file() {
            fs::copy(e.path(), tmp.path().join(e.file_name())).map_err(|e| e.to_string())?;
        }
    }
    let mut compared = 0;
    for (cmd, config, stem) in [
        ("effectiveness", "toy-noisy.json", "effectiveness"),
        ("efficiency", "toy-exhaustive.json", "efficiency"),
        ("effectiveness", "replay-mysql.json", "effectiveness"),
    ] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = tmp.path().join(format!("{stem}-{config}-{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_qobench"))
                .args([cmd, "--config"])
                .arg(tmp.path().join(config))
                .arg("--output")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!("{cmd} {config}: {}", String::from_utf8_lossy(&status.stderr)));
            }
            let json = fs::read_to_string(out.join(format!("{stem}.json"))).map_err(|e| e.to_string())?;
            let csv = fs::read(out.join(format!("{stem}.csv"))).map_err(|e| e.to_string())?;
            outputs.push((deterministic_part(&json).map_err(|e| e.to_string())?, csv));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{cmd} {config}: reports differ"));
        }
        compared += 1;
    }
    Ok(format!("{compared} command/config pairs byte-identical across re-runs"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("sample size", sample_size),
        ("sampler uniformity", sampler_uniformity),
        ("estimator coverage", estimator_coverage),
        ("oracle optimality", oracle_optimality),
        ("hint fidelity", hint_fidelity),
        ("plan equivalence", plan_equivalence),
        ("regression utility", regression_utility),
        ("miss classification", miss_classification),
        ("complexity sweep", complexity_trend),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
