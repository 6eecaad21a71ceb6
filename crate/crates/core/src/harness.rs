//! Suite configuration and the orchestration behind each command.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adapter::{
    read_trace, write_trace, AdapterDescriptor, Backend, Isolation, RecordingBackend, ReplayAdapter, ReplayRecord,
    UnknownPlanPolicy,
};
use crate::dialect::{compile_plan, resolve_dialect, DialectStyle, HintDialect};
use crate::effectiveness::{benchmark_query, BenchmarkOptions, EffectivenessReport, QueryEffectivenessResult, QueryFailure};
use crate::efficiency::{efficiency_report, EfficiencyReport, QueryCounters};
use crate::engine::optimizer::fnv1a;
use crate::engine::{
    optimize, synthetic_query, CostModelConfig, Database, GeneratorConfig, QueryShape, QueryStats, RuntimeMode,
    Strategy, SynthConfig, ToyBackend, ToyConfig, Truthful,
};
use crate::error::{Error, Result};
use crate::model::{BackendCapabilities, Catalog, JoinGraph, PhysicalPlan, PlanFingerprint, TableInfo};
use crate::sampling::{required_sample_size, sample_n_plans, SamplingConfig};

/// Version of every JSON document the tool writes.
pub const SCHEMA_VERSION: u32 = 1;

pub const ENV_CATALOG: &str = "QOBENCH_CATALOG";
pub const ENV_QUERIES: &str = "QOBENCH_QUERIES";
pub const ENV_OUTPUT: &str = "QOBENCH_OUTPUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub catalog: PathBuf,
    pub queries: PathBuf,
    pub seed: u64,
    #[serde(default)]
    pub sampling: SamplingConfig,
    /// Cut-off for sampled plans as a multiple of the chosen plan's runtime;
    /// `null` disables it.
    #[serde(default = "default_timeout_factor")]
    pub timeout_factor: Option<f64>,
    /// PF thresholds for the share table.
    #[serde(default)]
    pub thresholds: Vec<f64>,
    pub adapter: AdapterConfig,
    /// Builtin style name or template file.
    #[serde(default)]
    pub dialect: Option<String>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub export_trace: Option<PathBuf>,
    #[serde(default = "default_parallel")]
    pub parallel: usize,
}

fn default_timeout_factor() -> Option<f64> {
    Some(10.0)
}

fn default_parallel() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdapterConfig {
    Toy {
        strategy: Strategy,
        #[serde(default)]
        cost_model: CostModelConfig,
        #[serde(default)]
        capabilities: BackendCapabilities,
        #[serde(default)]
        runtime: RuntimeMode,
        /// Defaults to uniform data seeded with the suite seed.
        #[serde(default)]
        data: Option<DataSource>,
    },
    Replay {
        trace: PathBuf,
        /// Defaults to the descriptor file written next to the trace.
        #[serde(default)]
        descriptor: Option<AdapterDescriptor>,
        #[serde(default)]
        unknown_plan: UnknownPlanPolicy,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Generate(GeneratorConfig),
    CsvDir(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<ReportFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("qobench-out"),
            formats: vec![ReportFormat::Json, ReportFormat::Csv],
        }
    }
}

impl SuiteConfig {
    /// Reads a config file. Relative paths are taken from the file's
    /// directory; the path environment overrides apply afterwards.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: SuiteConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.apply_env();
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.catalog);
        fix(&mut self.queries);
        fix(&mut self.output.dir);
        if let Some(p) = &mut self.export_trace {
            fix(p);
        }
        match &mut self.adapter {
            AdapterConfig::Toy {
                data: Some(DataSource::CsvDir(dir)),
                ..
            } => fix(dir),
            AdapterConfig::Replay { trace, .. } => fix(trace),
            _ => {}
        }
        if let Some(d) = &mut self.dialect {
            if d.parse::<DialectStyle>().is_err() && Path::new(d.as_str()).is_relative() {
                *d = base.join(d.as_str()).to_string_lossy().into_owned();
            }
        }
    }

    fn apply_env(&mut self) {
        if let Ok(v) = std::env::var(ENV_CATALOG) {
            self.catalog = v.into();
        }
        if let Ok(v) = std::env::var(ENV_QUERIES) {
            self.queries = v.into();
        }
        if let Ok(v) = std::env::var(ENV_OUTPUT) {
            self.output.dir = v.into();
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        self.sampling.validate().map_err(cfg)?;
        if let Some(f) = self.timeout_factor {
            if !(f.is_finite() && f >= 1.0) {
                return Err(Error::Config(format!("timeout_factor {f} must be a finite number >= 1")));
            }
        }
        if let Some(t) = self.thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::Config(format!("threshold {t} outside [0, 1]")));
        }
        if self.parallel == 0 {
            return Err(Error::Config("parallel must be at least 1".into()));
        }
        let mut files = vec![&self.catalog, &self.queries];
        match &self.adapter {
            AdapterConfig::Replay { trace, .. } => files.push(trace),
            AdapterConfig::Toy {
                data: Some(DataSource::CsvDir(dir)),
                ..
            } => files.push(dir),
            _ => {}
        }
        for f in files {
            if !f.exists() {
                return Err(Error::Config(format!("{} does not exist", f.display())));
            }
        }
        Ok(())
    }
}

enum Source {
    Toy {
        db: Arc<Database>,
        config: ToyConfig,
    },
    Replay {
        records: Vec<ReplayRecord>,
        descriptor: AdapterDescriptor,
        policy: UnknownPlanPolicy,
    },
}

/// A loaded suite: config, catalog, queries and whatever the adapter needs.
pub struct Suite {
    pub config: SuiteConfig,
    pub catalog: Catalog,
    pub queries: Vec<JoinGraph>,
    source: Source,
}

impl Suite {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Suite::open(SuiteConfig::load(path)?)
    }

    pub fn open(config: SuiteConfig) -> Result<Self> {
        let catalog = Catalog::load(&config.catalog).map_err(|e| Error::Config(e.to_string()))?;
        let queries = JoinGraph::load_all(&config.queries).map_err(|e| Error::Config(e.to_string()))?;
        if queries.is_empty() {
            return Err(Error::Config(format!("{} holds no queries", config.queries.display())));
        }
        let mut ids = HashSet::new();
        for q in &queries {
            if !ids.insert(q.query_id()) {
                return Err(Error::Config(format!("duplicate query id `{}`", q.query_id())));
            }
            q.check_against(&catalog).map_err(|e| Error::Config(e.to_string()))?;
        }
        let source = match &config.adapter {
            AdapterConfig::Toy {
                strategy,
                cost_model,
                capabilities,
                runtime,
                data,
            } => {
                let db = match data {
                    None => Database::generate(catalog.clone(), &GeneratorConfig::uniform(config.seed))?,
                    Some(DataSource::Generate(g)) => Database::generate(catalog.clone(), g)?,
                    Some(DataSource::CsvDir(dir)) => Database::load_csv_dir(catalog.clone(), dir)?,
                };
                Source::Toy {
                    db: Arc::new(db),
                    config: ToyConfig {
                        strategy: *strategy,
                        cost_model: *cost_model,
                        capabilities: capabilities.clone(),
                        runtime: *runtime,
                    },
                }
            }
            AdapterConfig::Replay {
                trace,
                descriptor,
                unknown_plan,
            } => {
                let descriptor = match descriptor {
                    Some(d) => d.clone(),
                    None => {
                        let side = descriptor_path(trace);
                        let text = std::fs::read_to_string(&side).map_err(|e| {
                            Error::Config(format!("replay adapter needs a descriptor: {}: {e}", side.display()))
                        })?;
                        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", side.display())))?
                    }
                };
                Source::Replay {
                    records: read_trace(trace)?,
                    descriptor,
                    policy: *unknown_plan,
                }
            }
        };
        Ok(Suite {
            config,
            catalog,
            queries,
            source,
        })
    }

    fn dialect(&self) -> Result<Option<Box<dyn HintDialect>>> {
        self.config
            .dialect
            .as_deref()
            .map(|d| resolve_dialect(d).map(|t| Box::new(t) as Box<dyn HintDialect>))
            .transpose()
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// A fresh backend instance. Parallel runs build one per worker.
    pub fn backend(&self) -> Result<Box<dyn Backend>> {
        let dialect = self.dialect()?;
        Ok(match &self.source {
            Source::Toy { db, config } => {
                let toy = ToyBackend::new(Arc::clone(db), config)?;
                match dialect {
                    Some(d) => Box::new(toy.with_dialect(d)),
                    None => Box::new(toy),
                }
            }
            Source::Replay {
                records,
                descriptor,
                policy,
            } => {
                let replay = ReplayAdapter::new(descriptor.clone(), self.catalog.clone(), records.clone(), *policy)?;
                match dialect {
                    Some(d) => Box::new(replay.with_dialect(d)),
                    None => Box::new(replay),
                }
            }
        })
    }
}

/// Descriptor file written next to an exported trace.
pub fn descriptor_path(trace: &Path) -> PathBuf {
    let mut s = trace.as_os_str().to_owned();
    s.push(".descriptor.json");
    PathBuf::from(s)
}

/// Sampling seed of one query: the suite seed mixed with the query id, so a
/// query's sample does not depend on its position in the suite.
pub fn query_seed(seed: u64, query_id: &str) -> u64 {
    seed ^ fnv1a(query_id.as_bytes())
}

pub struct EffectivenessRun {
    pub report: EffectivenessReport,
    /// Recorded trace when the config asks for one.
    pub trace: Option<Vec<ReplayRecord>>,
}

type WorkerOutput = (Vec<(usize, Result<QueryEffectivenessResult>)>, Vec<ReplayRecord>);

pub fn run_effectiveness(suite: &Suite) -> Result<EffectivenessRun> {
    let cfg = &suite.config;
    let descriptor = suite.backend()?.descriptor().clone();
    descriptor.validate()?;
    let workers = cfg.parallel.min(suite.queries.len());
    if cfg.parallel > 1 && descriptor.isolation == Isolation::SequentialOnly {
        return Err(Error::Config(format!(
            "adapter `{}` is sequential-only; parallel runs are not allowed",
            descriptor.name
        )));
    }
    let record = cfg.export_trace.is_some();
    let probe = !descriptor.probe_support.is_empty();
    let outputs: Vec<Result<WorkerOutput>> = if workers <= 1 {
        vec![effectiveness_worker(suite, 0, 1, record, probe)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| s.spawn(move || effectiveness_worker(suite, w, workers, record, probe)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Execution("worker panicked".into()))))
                .collect()
        })
    };
    let mut slots: Vec<Option<Result<QueryEffectivenessResult>>> = suite.queries.iter().map(|_| None).collect();
    let mut records = Vec::new();
    for out in outputs {
        let (results, recs) = out?;
        for (i, r) in results {
            slots[i] = Some(r);
        }
        records.extend(recs);
    }
    let mut per_query = Vec::new();
    let mut failures = Vec::new();
    let mut first_error = None;
    for (q, slot) in suite.queries.iter().zip(slots) {
        match slot.expect("every query is assigned to a worker") {
            Ok(r) => per_query.push(r),
            Err(e) => {
                warn!("{}: {e}", q.query_id());
                failures.push(QueryFailure {
                    query_id: q.query_id().to_string(),
                    error: e.to_string(),
                    exit_code: e.exit_code(),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    if per_query.is_empty() {
        return Err(first_error.expect("a non-empty suite"));
    }
    let mut report = EffectivenessReport::new(&descriptor.name, cfg.sampling.precision, per_query, &cfg.thresholds)?;
    report.failures = failures;
    let trace = record.then(|| {
        let order: std::collections::HashMap<&str, usize> =
            suite.queries.iter().enumerate().map(|(i, q)| (q.query_id(), i)).collect();
        records.sort_by_key(|r| order.get(r.query_id.as_str()).copied());
        records
    });
    if let (Some(path), Some(trace)) = (&cfg.export_trace, &trace) {
        if let Some(dir) = path.parent() {
            prepare_dir(dir)?;
        }
        write_trace(path, trace)?;
        let side = descriptor_path(path);
        std::fs::write(&side, serde_json::to_string_pretty(&descriptor)?).map_err(|e| Error::io(side, e))?;
        info!("wrote trace {}", path.display());
    }
    Ok(EffectivenessRun { report, trace })
}

fn effectiveness_worker(suite: &Suite, worker: usize, workers: usize, record: bool, probe: bool) -> Result<WorkerOutput> {
    let cfg = &suite.config;
    let mut backend = RecordingBackend::new(suite.backend()?);
    let mut out = Vec::new();
    for (i, g) in suite.queries.iter().enumerate().skip(worker).step_by(workers) {
        let options = BenchmarkOptions {
            sampling: cfg.sampling,
            seed: query_seed(cfg.seed, g.query_id()),
            timeout_factor: cfg.timeout_factor,
            classify_misses: probe,
        };
        info!("benchmarking {} ({} tables)", g.query_id(), g.len());
        let result = if record {
            benchmark_query(&mut backend, g, &options)
        } else {
            benchmark_query(backend.inner_mut(), g, &options)
        };
        out.push((i, result));
    }
    Ok((out, if record { backend.records() } else { Vec::new() }))
}

pub fn run_efficiency(suite: &Suite) -> Result<EfficiencyReport> {
    let mut backend = suite.backend()?;
    let d = backend.descriptor().clone();
    if d.effectiveness_only || d.probe_support.is_empty() {
        return Err(Error::Adapter(format!(
            "adapter `{}` is effectiveness-only; efficiency reporting is disabled",
            d.name
        )));
    }
    let mut queries = Vec::new();
    for g in &suite.queries {
        let probe = backend
            .probe(g)?
            .ok_or_else(|| Error::Adapter(format!("adapter `{}` returned no counters for `{}`", d.name, g.query_id())))?;
        queries.push(QueryCounters {
            query_id: g.query_id().to_string(),
            counters: probe.counters,
        });
    }
    efficiency_report(&d.name, queries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub version: String,
    pub generated_unix_secs: u64,
}

impl ReportMetadata {
    pub fn now() -> Self {
        ReportMetadata {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            generated_unix_secs: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// JSON report document. Everything outside `metadata` is a function of the
/// config and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument<T> {
    pub schema: u32,
    pub command: String,
    pub seed: u64,
    pub report: T,
    pub metadata: ReportMetadata,
}

impl<T> ReportDocument<T> {
    pub fn new(command: &str, seed: u64, report: T) -> Self {
        ReportDocument {
            schema: SCHEMA_VERSION,
            command: command.into(),
            seed,
            report,
            metadata: ReportMetadata::now(),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `effectiveness.json` and/or `effectiveness.csv`; returns the paths.
pub fn write_effectiveness(suite: &Suite, report: &EffectivenessReport) -> Result<Vec<PathBuf>> {
    let out = &suite.config.output;
    prepare_dir(&out.dir)?;
    let mut written = Vec::new();
    for f in &out.formats {
        let path = match f {
            ReportFormat::Json => {
                let p = out.dir.join("effectiveness.json");
                let doc = ReportDocument::new("effectiveness", suite.config.seed, report);
                write_file(&p, serde_json::to_string_pretty(&doc)?.as_bytes())?;
                p
            }
            ReportFormat::Csv => {
                let p = out.dir.join("effectiveness.csv");
                let mut buf = Vec::new();
                report.write_csv(&mut buf)?;
                write_file(&p, &buf)?;
                p
            }
        };
        written.push(path);
    }
    Ok(written)
}

/// Writes `efficiency.json` and/or `efficiency.csv`; returns the paths.
pub fn write_efficiency(suite: &Suite, report: &EfficiencyReport) -> Result<Vec<PathBuf>> {
    let out = &suite.config.output;
    prepare_dir(&out.dir)?;
    let mut written = Vec::new();
    for f in &out.formats {
        let path = match f {
            ReportFormat::Json => {
                let p = out.dir.join("efficiency.json");
                let doc = ReportDocument::new("efficiency", suite.config.seed, report);
                write_file(&p, serde_json::to_string_pretty(&doc)?.as_bytes())?;
                p
            }
            ReportFormat::Csv => {
                let p = out.dir.join("efficiency.csv");
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(EfficiencyReport::csv_header())?;
                w.write_record(report.csv_row())?;
                let buf = w.into_inner().map_err(|e| Error::io(&p, e.into_error()))?;
                write_file(&p, &buf)?;
                p
            }
        };
        written.push(path);
    }
    Ok(written)
}

/// Strips `metadata` from a report document so two runs can be compared.
pub fn deterministic_part(json: &str) -> Result<String> {
    let mut v: serde_json::Value = serde_json::from_str(json)?;
    if let Some(o) = v.as_object_mut() {
        o.remove("metadata");
    }
    Ok(serde_json::to_string_pretty(&v)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedPlan {
    pub fingerprint: PlanFingerprint,
    pub plan: PhysicalPlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sql: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedPlans {
    pub schema: u32,
    pub query_id: String,
    pub seed: u64,
    pub capabilities: BackendCapabilities,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dialect: Option<String>,
    pub plans: Vec<GeneratedPlan>,
}

/// Draws `count` plans (default: the required sample size) and compiles
/// each with `dialect` when given.
pub fn generate_plans(
    graph: &JoinGraph,
    catalog: &Catalog,
    caps: &BackendCapabilities,
    count: Option<usize>,
    seed: u64,
    dialect: Option<&dyn HintDialect>,
) -> Result<GeneratedPlans> {
    let sampling = SamplingConfig::default();
    let count = match count {
        Some(c) => c,
        None => required_sample_size(&sampling)? as usize,
    };
    let sample = sample_n_plans(graph, count, &sampling, caps, catalog, seed)?;
    let plans = sample
        .plans
        .into_iter()
        .map(|plan| {
            let sql = dialect.map(|d| compile_plan(&plan, graph, d).map(|h| h.text)).transpose()?;
            Ok(GeneratedPlan {
                fingerprint: plan.fingerprint(),
                plan,
                sql,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratedPlans {
        schema: SCHEMA_VERSION,
        query_id: graph.query_id().to_string(),
        seed,
        capabilities: caps.clone(),
        dialect: dialect.map(|d| d.name().to_string()),
        plans,
    })
}

/// Index-free catalog holding just the columns `graph` mentions.
pub fn implied_catalog(graph: &JoinGraph) -> Result<Catalog> {
    let mut tables: Vec<TableInfo> = Vec::new();
    let mut add = |table: &str, column: &str| {
        let t = match tables.iter_mut().position(|t| t.name == table) {
            Some(i) => &mut tables[i],
            None => {
                tables.push(TableInfo {
                    name: table.into(),
                    columns: vec![],
                    row_count: 0,
                    indexes: vec![],
                });
                tables.last_mut().expect("just pushed")
            }
        };
        if !t.has_column(column) {
            t.columns.push(column.into());
        }
    };
    for t in graph.tables() {
        add(&t.table, "");
    }
    for p in graph.predicates() {
        for c in [&p.left, &p.right] {
            let table = graph.table_ref(&c.table).map(|t| t.table.clone()).unwrap_or(c.table.clone());
            add(&table, &c.column);
        }
    }
    for s in graph.selections() {
        let table = graph.table_ref(&s.table).map(|t| t.table.clone()).unwrap_or(s.table.clone());
        add(&table, &s.column);
    }
    for t in &mut tables {
        t.columns.retain(|c| !c.is_empty());
    }
    Catalog::new(tables)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub tables_min: usize,
    pub tables_max: usize,
    pub per_size: usize,
    pub seed: u64,
    pub strategy: Strategy,
    #[serde(default)]
    pub cost_model: CostModelConfig,
    #[serde(default)]
    pub capabilities: BackendCapabilities,
    /// Query shapes used in turn.
    pub shapes: Vec<QueryShape>,
    #[serde(default)]
    pub data: SynthConfig,
}

impl SweepConfig {
    pub fn new(tables_min: usize, tables_max: usize, per_size: usize, seed: u64, strategy: Strategy) -> Self {
        SweepConfig {
            tables_min,
            tables_max,
            per_size,
            seed,
            strategy,
            cost_model: CostModelConfig::Truthful,
            capabilities: BackendCapabilities::default(),
            shapes: vec![QueryShape::Chain, QueryShape::Clique],
            data: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tables: usize,
    pub queries: usize,
    pub relative_optimal: usize,
    pub optimality_frequency: f64,
    /// Mean of chosen work over the minimum work of the query.
    pub mean_work_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub strategy: Strategy,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn non_increasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].optimality_frequency <= w[0].optimality_frequency)
    }

    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["tables", "queries", "relative_optimal", "optimality_frequency", "mean_work_ratio"])?;
        for r in &self.rows {
            w.write_record([
                r.tables.to_string(),
                r.queries.to_string(),
                r.relative_optimal.to_string(),
                r.optimality_frequency.to_string(),
                r.mean_work_ratio.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

/// OF per table count over random micro-queries. A query counts as optimal
/// when the chosen plan's work equals the minimum over its plan space, which
/// the truthful bushy DP computes exactly.
pub fn complexity_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.tables_min == 0 || cfg.tables_max < cfg.tables_min {
        return Err(Error::Config(format!(
            "table range {}..={} is empty",
            cfg.tables_min, cfg.tables_max
        )));
    }
    if cfg.per_size == 0 || cfg.shapes.is_empty() {
        return Err(Error::Config("per_size and shapes must be non-empty".into()));
    }
    let toy = ToyConfig {
        strategy: cfg.strategy,
        cost_model: cfg.cost_model,
        capabilities: cfg.capabilities.clone(),
        runtime: RuntimeMode::Modeled,
    };
    let mut rows = Vec::new();
    for n in cfg.tables_min..=cfg.tables_max {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut optimal = 0;
        let mut ratio = 0.0;
        for i in 0..cfg.per_size {
            let shape = cfg.shapes[i % cfg.shapes.len()];
            let q = synthetic_query(format!("n{n}_{i}"), n, shape, &cfg.data, rng.random())?;
            let mut backend = ToyBackend::new(Arc::clone(&q.db), &toy)?;
            let chosen = backend.run_chosen(&q.graph)?.runtime.0;
            let stats = QueryStats::new(&q.graph, Arc::clone(&q.db))?;
            let best = optimize(Strategy::Exhaustive, &stats, &Truthful, &cfg.capabilities, q.catalog())?.cost;
            if chosen == best {
                optimal += 1;
            }
            ratio += if best > 0.0 { chosen / best } else { 1.0 };
        }
        rows.push(SweepRow {
            tables: n,
            queries: cfg.per_size,
            relative_optimal: optimal,
            optimality_frequency: optimal as f64 / cfg.per_size as f64,
            mean_work_ratio: ratio / cfg.per_size as f64,
        });
    }
    Ok(SweepReport {
        strategy: cfg.strategy,
        seed: cfg.seed,
        rows,
    })
}
