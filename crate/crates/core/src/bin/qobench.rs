use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use qobench::adapter::adapter_conformance;
use qobench::dialect::resolve_dialect;
use qobench::engine::{QueryShape, Strategy};
use qobench::harness::{
    complexity_sweep, generate_plans, implied_catalog, run_effectiveness, run_efficiency, write_effectiveness,
    write_efficiency, Suite, SuiteConfig, SweepConfig,
};
use qobench::model::{BackendCapabilities, Catalog, JoinAlgorithm, JoinGraph};
use qobench::sampling::{required_sample_size, SamplingConfig};
use qobench::{Error, Result};

#[derive(Parser)]
#[command(name = "qobench", version, about = "Query optimizer effectiveness and efficiency benchmarks")]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the number of sampled plans a PF estimate needs.
    SampleSize {
        /// Confidence level; ignored when --z is given.
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        /// Standard normal quantile to use directly.
        #[arg(long)]
        z: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        precision: f64,
        #[arg(long, default_value_t = 0.5)]
        prior: f64,
        /// Plan space size, for the finite population correction.
        #[arg(long)]
        population: Option<u64>,
    },
    /// Sample random physical plans for one query.
    GenPlans {
        /// JoinGraph JSON: one object or an array.
        #[arg(long)]
        query: PathBuf,
        /// Query to pick from an array; defaults to the first.
        #[arg(long)]
        query_id: Option<String>,
        /// Catalog JSON; without it no index scans are generated.
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Number of plans; defaults to the required sample size.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: u64,
        /// Comma list of join algorithms plus optional `index`.
        #[arg(long, default_value = "hash,merge,loop,index")]
        caps: String,
        /// Builtin style (x, y, mysql) or template file.
        #[arg(long)]
        dialect: Option<String>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the effectiveness workflow over a suite.
    Effectiveness {
        #[arg(long)]
        config: PathBuf,
        /// Worker count; the adapter must be parallel-safe.
        #[arg(long)]
        parallel: Option<usize>,
        /// Overrides the output directory of the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Collect efficiency counters and their regressions over a suite.
    Efficiency {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Toy-engine optimality frequency against table count.
    ComplexitySweep {
        #[arg(long, default_value_t = 3)]
        tables_min: usize,
        #[arg(long, default_value_t = 6)]
        tables_max: usize,
        #[arg(long, default_value_t = 20)]
        per_size: usize,
        #[arg(long)]
        seed: u64,
        /// exhaustive, greedy, adversarial or random[:seed].
        #[arg(long, default_value = "greedy")]
        strategy: String,
        #[arg(long, value_delimiter = ',', default_value = "chain,clique")]
        shapes: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an adapter against the backend contract.
    Conformance {
        #[arg(long)]
        config: PathBuf,
        /// Probe query; defaults to the first query of the suite.
        #[arg(long)]
        query_id: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    // clap exits with 2 on bad arguments; 2 is reserved for adapter failures
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::Config(format!("stdout: {e}"))),
    }
}

fn parse_caps(s: &str) -> Result<BackendCapabilities> {
    let mut algs = Vec::new();
    let mut index = false;
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "index" {
            index = true;
        } else {
            algs.push(JoinAlgorithm::parse(part)?);
        }
    }
    BackendCapabilities::new(algs, index)
}

fn load_suite(config: &PathBuf, output: Option<PathBuf>) -> Result<Suite> {
    let mut cfg = SuiteConfig::load(config)?;
    if let Some(o) = output {
        cfg.output.dir = o;
    }
    Suite::open(cfg)
}

fn run(cmd: Command) -> Result<u8> {
    let usage = |e: Error| match e {
        Error::InvalidArgument(m) => Error::Config(m),
        other => other,
    };
    match cmd {
        Command::SampleSize {
            confidence,
            z,
            precision,
            prior,
            population,
        } => {
            let confidence_z = match z {
                Some(z) => z,
                None => SamplingConfig::z_for_confidence(confidence).map_err(usage)?,
            };
            let n = required_sample_size(&SamplingConfig {
                confidence_z,
                precision,
                prior,
                population,
            })
            .map_err(usage)?;
            println!("{n}");
        }
        Command::GenPlans {
            query,
            query_id,
            catalog,
            count,
            seed,
            caps,
            dialect,
            out,
        } => {
            let graphs = JoinGraph::load_all(&query).map_err(usage)?;
            let graph = match &query_id {
                Some(id) => graphs.into_iter().find(|g| g.query_id() == id),
                None => graphs.into_iter().next(),
            }
            .ok_or_else(|| Error::Config(format!("no matching query in {}", query.display())))?;
            let catalog = match catalog {
                Some(p) => Catalog::load(p)?,
                None => implied_catalog(&graph)?,
            };
            graph.check_against(&catalog).map_err(usage)?;
            let caps = parse_caps(&caps).map_err(usage)?;
            let dialect = dialect.as_deref().map(resolve_dialect).transpose().map_err(usage)?;
            let plans = generate_plans(
                &graph,
                &catalog,
                &caps,
                count,
                seed,
                dialect.as_ref().map(|d| d as &dyn qobench::dialect::HintDialect),
            )
            .map_err(usage)?;
            let mut text = serde_json::to_string_pretty(&plans)?;
            text.push('\n');
            emit(out.as_ref(), text.as_bytes())?;
        }
        Command::Effectiveness {
            config,
            parallel,
            output,
        } => {
            let mut suite = load_suite(&config, output)?;
            if let Some(p) = parallel {
                if p == 0 {
                    return Err(Error::Config("--parallel must be at least 1".into()));
                }
                suite.config.parallel = p;
            }
            let run = run_effectiveness(&suite)?;
            for p in write_effectiveness(&suite, &run.report)? {
                info!("wrote {}", p.display());
            }
            eprintln!(
                "OF {:.4} over {} queries",
                run.report.optimality_frequency,
                run.report.per_query.len()
            );
            if let Some(f) = run.report.failures.first() {
                eprintln!("{} queries failed; first: {}: {}", run.report.failures.len(), f.query_id, f.error);
                return Ok(f.exit_code as u8);
            }
        }
        Command::Efficiency { config, output } => {
            let suite = load_suite(&config, output)?;
            let report = run_efficiency(&suite)?;
            for p in write_efficiency(&suite, &report)? {
                info!("wrote {}", p.display());
            }
            for r in &report.regressions {
                if let Some(note) = &r.note {
                    eprintln!("{}: {note}", r.counter.label());
                }
            }
        }
        Command::ComplexitySweep {
            tables_min,
            tables_max,
            per_size,
            seed,
            strategy,
            shapes,
            format,
            out,
        } => {
            let strategy: Strategy = strategy.parse().map_err(usage)?;
            let mut cfg = SweepConfig::new(tables_min, tables_max, per_size, seed, strategy);
            cfg.shapes = shapes
                .iter()
                .map(|s| s.parse::<QueryShape>())
                .collect::<Result<_>>()
                .map_err(usage)?;
            let report = complexity_sweep(&cfg)?;
            let bytes = match format {
                Format::Json => {
                    let mut t = serde_json::to_string_pretty(&report)?;
                    t.push('\n');
                    t.into_bytes()
                }
                Format::Csv => {
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    buf
                }
            };
            emit(out.as_ref(), &bytes)?;
        }
        Command::Conformance { config, query_id } => {
            let suite = load_suite(&config, None)?;
            let probe = match &query_id {
                Some(id) => suite.queries.iter().find(|q| q.query_id() == id),
                None => suite.queries.first(),
            }
            .ok_or_else(|| Error::Config("no probe query".into()))?;
            let mut backend = suite.backend()?;
            let report = adapter_conformance(backend.as_mut(), probe);
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.passed() {
                return Ok(2);
            }
        }
    }
    Ok(0)
}
