//! What a benchmarked system has to provide, plus an offline adapter that
//! replays recorded runtimes and counters.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dialect::{validate_dialect, HintDialect, HintedQuery};
use crate::efficiency::{Counter, EfficiencyCounters};
use crate::error::{Error, Result};
use crate::model::{BackendCapabilities, Catalog, JoinGraph, PhysicalPlan, PlanFingerprint};

/// Plan runtime in backend units. A timed-out or failed run is `+inf` and
/// serializes as `"timeout"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Runtime(pub f64);

impl Runtime {
    pub const TIMEOUT: Runtime = Runtime(f64::INFINITY);

    pub fn is_timeout(self) -> bool {
        self.0 == f64::INFINITY
    }
}

impl fmt::Display for Runtime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_timeout() {
            f.write_str("timeout")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Runtime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_timeout() {
            s.serialize_str("timeout")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Runtime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_finite() && v >= 0.0 => Ok(Runtime(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("runtime {v} is not finite and >= 0"))),
            Raw::Text(t) if t == "timeout" => Ok(Runtime::TIMEOUT),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"timeout\", got `{t}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Isolation {
    #[default]
    SequentialOnly,
    ParallelSafe,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheReset {
    #[default]
    NoOp,
    /// Command the operator runs between plans; adapters invoke it.
    Command(String),
}

/// Static description of an adapter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterDescriptor {
    pub name: String,
    /// Dialect name; `None` for backends that accept plans directly.
    #[serde(default)]
    pub dialect: Option<String>,
    pub capabilities: BackendCapabilities,
    #[serde(default)]
    pub probe_support: BTreeSet<Counter>,
    #[serde(default)]
    pub isolation: Isolation,
    #[serde(default)]
    pub cache_reset: CacheReset,
    /// Adapter only takes part in effectiveness runs.
    #[serde(default)]
    pub effectiveness_only: bool,
}

impl AdapterDescriptor {
    pub fn validate(&self) -> Result<()> {
        if self.probe_support.is_empty() && !self.effectiveness_only {
            return Err(Error::Adapter(format!(
                "adapter `{}` exposes no efficiency counter and is not marked effectiveness-only",
                self.name
            )));
        }
        Ok(())
    }
}

/// The optimizer's own plan for a query and its runtime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChosenRun {
    pub fingerprint: PlanFingerprint,
    /// Known for backends that expose their plans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PhysicalPlan>,
    pub runtime: Runtime,
}

/// What the optimizer enumerated for its last query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub counters: EfficiencyCounters,
    /// Complete plans the optimizer costed, when the backend can tell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub considered: Option<Vec<PlanFingerprint>>,
    /// Operators the optimizer costed, keyed like
    /// [`PhysicalPlan::operator_keys`]. A plan all of whose operators were
    /// costed counts as considered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costed_operators: Option<Vec<String>>,
}

/// A system under test.
pub trait Backend {
    fn descriptor(&self) -> &AdapterDescriptor;
    fn catalog(&self) -> &Catalog;
    /// Hint dialect for compiling sampled plans; `None` when plans are
    /// submitted directly.
    fn dialect(&self) -> Option<&dyn HintDialect>;
    /// Optimizes and runs `graph` without hints.
    fn run_chosen(&mut self, graph: &JoinGraph) -> Result<ChosenRun>;
    /// Runs one forced plan. Runs exceeding `timeout` report [`Runtime::TIMEOUT`].
    fn run_plan(
        &mut self,
        graph: &JoinGraph,
        plan: &PhysicalPlan,
        hinted: Option<&HintedQuery>,
        timeout: Option<Runtime>,
    ) -> Result<Runtime>;
    fn reset_cache(&mut self) -> Result<()>;
    /// Efficiency counters of optimizing `graph`; `None` when unsupported.
    fn probe(&mut self, graph: &JoinGraph) -> Result<Option<Probe>>;

    fn capabilities(&self) -> &BackendCapabilities {
        &self.descriptor().capabilities
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn descriptor(&self) -> &AdapterDescriptor {
        (**self).descriptor()
    }

    fn catalog(&self) -> &Catalog {
        (**self).catalog()
    }

    fn dialect(&self) -> Option<&dyn HintDialect> {
        (**self).dialect()
    }

    fn run_chosen(&mut self, graph: &JoinGraph) -> Result<ChosenRun> {
        (**self).run_chosen(graph)
    }

    fn run_plan(
        &mut self,
        graph: &JoinGraph,
        plan: &PhysicalPlan,
        hinted: Option<&HintedQuery>,
        timeout: Option<Runtime>,
    ) -> Result<Runtime> {
        (**self).run_plan(graph, plan, hinted, timeout)
    }

    fn reset_cache(&mut self) -> Result<()> {
        (**self).reset_cache()
    }

    fn probe(&mut self, graph: &JoinGraph) -> Result<Option<Probe>> {
        (**self).probe(graph)
    }
}

/// Recorded behaviour of one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ReplayRecordDef")]
pub struct ReplayRecord {
    pub query_id: String,
    pub chosen: PlanFingerprint,
    pub chosen_runtime: Runtime,
    pub runtimes: BTreeMap<PlanFingerprint, Runtime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counters: Option<EfficiencyCounters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub considered: Option<Vec<PlanFingerprint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costed_operators: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct ReplayRecordDef {
    query_id: String,
    chosen: PlanFingerprint,
    chosen_runtime: Runtime,
    runtimes: BTreeMap<PlanFingerprint, Runtime>,
    #[serde(default)]
    counters: Option<EfficiencyCounters>,
    #[serde(default)]
    considered: Option<Vec<PlanFingerprint>>,
    #[serde(default)]
    costed_operators: Option<Vec<String>>,
}

impl TryFrom<ReplayRecordDef> for ReplayRecord {
    type Error = Error;

    fn try_from(d: ReplayRecordDef) -> Result<Self> {
        if !d.runtimes.contains_key(&d.chosen) {
            return Err(Error::Adapter(format!(
                "record `{}`: chosen plan {} has no runtime entry",
                d.query_id, d.chosen
            )));
        }
        Ok(ReplayRecord {
            query_id: d.query_id,
            chosen: d.chosen,
            chosen_runtime: d.chosen_runtime,
            runtimes: d.runtimes,
            counters: d.counters,
            considered: d.considered,
            costed_operators: d.costed_operators,
        })
    }
}

/// Reads one record per line; blank lines are skipped.
pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<ReplayRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ReplayRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Adapter(format!("{}:{}: {e}", path.display(), n + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_trace(path: impl AsRef<Path>, records: &[ReplayRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    for r in records {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    f.flush().map_err(|e| Error::io(path, e))
}

/// What the replay adapter does with a plan missing from the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownPlanPolicy {
    #[default]
    Error,
    Timeout,
}

/// Serves runtimes and counters from recorded traces.
pub struct ReplayAdapter {
    descriptor: AdapterDescriptor,
    catalog: Catalog,
    dialect: Option<Box<dyn HintDialect>>,
    records: HashMap<String, ReplayRecord>,
    policy: UnknownPlanPolicy,
}

impl ReplayAdapter {
    pub fn new(
        descriptor: AdapterDescriptor,
        catalog: Catalog,
        records: Vec<ReplayRecord>,
        policy: UnknownPlanPolicy,
    ) -> Result<Self> {
        let mut map = HashMap::new();
        for r in records {
            let id = r.query_id.clone();
            if map.insert(id.clone(), r).is_some() {
                return Err(Error::Adapter(format!("trace has two records for `{id}`")));
            }
        }
        Ok(ReplayAdapter {
            descriptor,
            catalog,
            dialect: None,
            records: map,
            policy,
        })
    }

    pub fn with_dialect(mut self, dialect: Box<dyn HintDialect>) -> Self {
        self.dialect = Some(dialect);
        self
    }

    fn record(&self, graph: &JoinGraph) -> Result<&ReplayRecord> {
        self.records
            .get(graph.query_id())
            .ok_or_else(|| Error::Adapter(format!("trace has no record for query `{}`", graph.query_id())))
    }
}

impl Backend for ReplayAdapter {
    fn descriptor(&self) -> &AdapterDescriptor {
        &self.descriptor
    }

    fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn dialect(&self) -> Option<&dyn HintDialect> {
        self.dialect.as_deref()
    }

    fn run_chosen(&mut self, graph: &JoinGraph) -> Result<ChosenRun> {
        let r = self.record(graph)?;
        Ok(ChosenRun {
            fingerprint: r.chosen.clone(),
            plan: None,
            runtime: r.chosen_runtime,
        })
    }

    fn run_plan(
        &mut self,
        graph: &JoinGraph,
        plan: &PhysicalPlan,
        _hinted: Option<&HintedQuery>,
        timeout: Option<Runtime>,
    ) -> Result<Runtime> {
        let r = self.record(graph)?;
        let fp = plan.fingerprint();
        let rt = match (r.runtimes.get(&fp), self.policy) {
            (Some(rt), _) => *rt,
            (None, UnknownPlanPolicy::Timeout) => Runtime::TIMEOUT,
            (None, UnknownPlanPolicy::Error) => {
                return Err(Error::Adapter(format!(
                    "trace for `{}` has no runtime for plan {fp}",
                    graph.query_id()
                )))
            }
        };
        Ok(match timeout {
            Some(t) if rt > t => Runtime::TIMEOUT,
            _ => rt,
        })
    }

    fn reset_cache(&mut self) -> Result<()> {
        Ok(())
    }

    fn probe(&mut self, graph: &JoinGraph) -> Result<Option<Probe>> {
        let r = self.record(graph)?;
        Ok(r.counters.clone().map(|counters| Probe {
            counters,
            considered: r.considered.clone(),
            costed_operators: r.costed_operators.clone(),
        }))
    }
}

/// Wraps a backend and records everything it answers as replay records.
pub struct RecordingBackend<B> {
    inner: B,
    records: BTreeMap<String, ReplayRecord>,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend {
            inner,
            records: BTreeMap::new(),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut B {
        &mut self.inner
    }

    /// Records in query-id order.
    pub fn records(&self) -> Vec<ReplayRecord> {
        self.records.values().cloned().collect()
    }

    fn entry(&mut self, graph: &JoinGraph) -> Result<&mut ReplayRecord> {
        self.records
            .get_mut(graph.query_id())
            .ok_or_else(|| Error::Adapter(format!("run_chosen was not called for `{}`", graph.query_id())))
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn descriptor(&self) -> &AdapterDescriptor {
        self.inner.descriptor()
    }

    fn catalog(&self) -> &Catalog {
        self.inner.catalog()
    }

    fn dialect(&self) -> Option<&dyn HintDialect> {
        self.inner.dialect()
    }

    fn run_chosen(&mut self, graph: &JoinGraph) -> Result<ChosenRun> {
        let run = self.inner.run_chosen(graph)?;
        let rec = self
            .records
            .entry(graph.query_id().to_string())
            .or_insert_with(|| ReplayRecord {
                query_id: graph.query_id().to_string(),
                chosen: run.fingerprint.clone(),
                chosen_runtime: run.runtime,
                runtimes: BTreeMap::new(),
                counters: None,
                considered: None,
                costed_operators: None,
            });
        rec.chosen = run.fingerprint.clone();
        rec.chosen_runtime = run.runtime;
        rec.runtimes.insert(run.fingerprint.clone(), run.runtime);
        Ok(run)
    }

    fn run_plan(
        &mut self,
        graph: &JoinGraph,
        plan: &PhysicalPlan,
        hinted: Option<&HintedQuery>,
        timeout: Option<Runtime>,
    ) -> Result<Runtime> {
        let rt = self.inner.run_plan(graph, plan, hinted, timeout)?;
        let fp = plan.fingerprint();
        let rec = self.entry(graph)?;
        // The chosen plan's entry stays its unconstrained runtime.
        if fp != rec.chosen {
            rec.runtimes.insert(fp, rt);
        }
        Ok(rt)
    }

    fn reset_cache(&mut self) -> Result<()> {
        self.inner.reset_cache()
    }

    fn probe(&mut self, graph: &JoinGraph) -> Result<Option<Probe>> {
        let p = self.inner.probe(graph)?;
        if let (Some(p), Some(rec)) = (&p, self.records.get_mut(graph.query_id())) {
            rec.counters = Some(p.counters.clone());
            rec.considered = p.considered.clone();
            rec.costed_operators = p.costed_operators.clone();
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceCheck {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub adapter: String,
    pub checks: Vec<ConformanceCheck>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ConformanceCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs the adapter requirements as probes against `probe_query`.
pub fn adapter_conformance(backend: &mut dyn Backend, probe_query: &JoinGraph) -> ConformanceReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, r: std::result::Result<(), String>| {
        checks.push(ConformanceCheck {
            name: name.to_string(),
            passed: r.is_ok(),
            detail: r.err().unwrap_or_default(),
        })
    };
    let desc = backend.descriptor().clone();
    push(
        "capabilities",
        if desc.capabilities.join_algorithms().is_empty() {
            Err("no join algorithm".into())
        } else {
            Ok(())
        },
    );
    push("descriptor", desc.validate().map_err(|e| e.to_string()));
    push(
        "dialect",
        match backend.dialect() {
            None => Ok(()),
            Some(d) => validate_dialect(d).map_err(|v| {
                v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
            }),
        },
    );
    push("cache_reset", backend.reset_cache().map_err(|e| e.to_string()));
    let probe = if desc.effectiveness_only {
        Ok(())
    } else {
        match (backend.probe(probe_query), backend.probe(probe_query)) {
            (Ok(Some(a)), Ok(Some(b))) => {
                let exposed: BTreeSet<Counter> =
                    Counter::ALL.into_iter().filter(|c| a.counters.get(*c).is_some()).collect();
                if Counter::ALL.iter().any(|&c| a.counters.get(c) != b.counters.get(c))
                    || a.considered != b.considered
                {
                    Err("two probes of the same query disagree".into())
                } else if !desc.probe_support.is_subset(&exposed) {
                    Err("probe omits counters the descriptor declares".into())
                } else {
                    a.counters.validate().map_err(|e| e.to_string())
                }
            }
            (Ok(None), _) | (_, Ok(None)) => Err("probe is not supported".into()),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        }
    };
    push("probe_deterministic", probe);
    ConformanceReport {
        adapter: desc.name,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JoinAlgorithm, TableInfo, TableRef};

    fn descriptor() -> AdapterDescriptor {
        AdapterDescriptor {
            name: "replay".into(),
            dialect: None,
            capabilities: BackendCapabilities::default(),
            probe_support: BTreeSet::from([Counter::PhysicalPlans]),
            isolation: Isolation::SequentialOnly,
            cache_reset: CacheReset::NoOp,
            effectiveness_only: false,
        }
    }

    fn catalog() -> Catalog {
        Catalog::new(
            ["A", "B"]
                .iter()
                .map(|n| TableInfo {
                    name: n.to_string(),
                    columns: vec!["k".into()],
                    row_count: 1,
                    indexes: vec![],
                })
                .collect(),
        )
        .unwrap()
    }

    fn graph() -> JoinGraph {
        JoinGraph::new("q1", vec![TableRef::new("A"), TableRef::new("B")], vec![], vec![]).unwrap()
    }

    fn ab() -> PhysicalPlan {
        PhysicalPlan::join(JoinAlgorithm::Cross, vec![], PhysicalPlan::seq("A"), PhysicalPlan::seq("B"))
    }

    fn record() -> ReplayRecord {
        let fp = ab().fingerprint();
        ReplayRecord {
            query_id: "q1".into(),
            chosen: fp.clone(),
            chosen_runtime: Runtime(5.0),
            runtimes: BTreeMap::from([(fp, Runtime(5.0)), (PlanFingerprint("CJ(B,A)".into()), Runtime(9.0))]),
            counters: Some(EfficiencyCounters {
                logical_plans: None,
                join_orderings: None,
                physical_plans: Some(48),
                physical_join_plans: Some(40),
                optimization_time: 1.5,
                lower_bound: false,
            }),
            considered: None,
            costed_operators: None,
        }
    }

    #[test]
    fn runtime_serde() {
        assert_eq!(serde_json::to_string(&Runtime::TIMEOUT).unwrap(), "\"timeout\"");
        assert_eq!(serde_json::to_string(&Runtime(2.5)).unwrap(), "2.5");
        assert_eq!(serde_json::from_str::<Runtime>("\"timeout\"").unwrap(), Runtime::TIMEOUT);
        assert!(serde_json::from_str::<Runtime>("-1").is_err());
        assert!(serde_json::from_str::<Runtime>("\"slow\"").is_err());
    }

    #[test]
    fn record_requires_chosen_runtime() {
        let mut r = record();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ReplayRecord>(&json).unwrap(), r);
        r.runtimes.remove(&r.chosen.clone());
        let json = serde_json::to_string(&r).unwrap();
        assert!(serde_json::from_str::<ReplayRecord>(&json).is_err());
    }

    #[test]
    fn replay_lookup_and_policies() {
        let mut a = ReplayAdapter::new(descriptor(), catalog(), vec![record()], UnknownPlanPolicy::Error).unwrap();
        let g = graph();
        assert_eq!(a.run_chosen(&g).unwrap().runtime, Runtime(5.0));
        let ba = PhysicalPlan::join(JoinAlgorithm::Cross, vec![], PhysicalPlan::seq("B"), PhysicalPlan::seq("A"));
        assert_eq!(a.run_plan(&g, &ba, None, None).unwrap(), Runtime(9.0));
        assert_eq!(a.run_plan(&g, &ba, None, Some(Runtime(8.0))).unwrap(), Runtime::TIMEOUT);
        let unknown = PhysicalPlan::join(JoinAlgorithm::Hash, vec![], PhysicalPlan::seq("B"), PhysicalPlan::seq("A"));
        assert!(matches!(a.run_plan(&g, &unknown, None, None), Err(Error::Adapter(_))));
        let mut t = ReplayAdapter::new(descriptor(), catalog(), vec![record()], UnknownPlanPolicy::Timeout).unwrap();
        assert_eq!(t.run_plan(&g, &unknown, None, None).unwrap(), Runtime::TIMEOUT);
        let other = JoinGraph::new("q2", vec![TableRef::new("A")], vec![], vec![]).unwrap();
        assert!(t.run_chosen(&other).is_err());
        assert!(ReplayAdapter::new(descriptor(), catalog(), vec![record(), record()], UnknownPlanPolicy::Error).is_err());
    }

    #[test]
    fn trace_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.jsonl");
        write_trace(&path, &[record()]).unwrap();
        assert_eq!(read_trace(&path).unwrap(), vec![record()]);
        std::fs::write(&path, "{not json}\n").unwrap();
        assert!(read_trace(&path).is_err());
    }

    #[test]
    fn conformance() {
        let mut a = ReplayAdapter::new(descriptor(), catalog(), vec![record()], UnknownPlanPolicy::Error).unwrap();
        let report = adapter_conformance(&mut a, &graph());
        assert!(report.passed(), "{report:?}");

        let mut d = descriptor();
        d.probe_support.clear();
        let mut a = ReplayAdapter::new(d, catalog(), vec![record()], UnknownPlanPolicy::Error).unwrap();
        let report = adapter_conformance(&mut a, &graph());
        assert!(!report.check("descriptor").unwrap().passed);

        let mut x = crate::dialect::builtin_dialect(crate::dialect::DialectStyle::StyleX);
        x.join_types.clear();
        let mut a = ReplayAdapter::new(descriptor(), catalog(), vec![record()], UnknownPlanPolicy::Error)
            .unwrap()
            .with_dialect(Box::new(x));
        let report = adapter_conformance(&mut a, &graph());
        assert!(!report.check("dialect").unwrap().passed);
    }

    #[test]
    fn flaky_probe_fails_conformance() {
        struct Flaky(ReplayAdapter, u64);
        impl Backend for Flaky {
            fn descriptor(&self) -> &AdapterDescriptor {
                self.0.descriptor()
            }
            fn catalog(&self) -> &Catalog {
                self.0.catalog()
            }
            fn dialect(&self) -> Option<&dyn HintDialect> {
                None
            }
            fn run_chosen(&mut self, g: &JoinGraph) -> Result<ChosenRun> {
                self.0.run_chosen(g)
            }
            fn run_plan(&mut self, g: &JoinGraph, p: &PhysicalPlan, h: Option<&HintedQuery>, t: Option<Runtime>) -> Result<Runtime> {
                self.0.run_plan(g, p, h, t)
            }
            fn reset_cache(&mut self) -> Result<()> {
                Ok(())
            }
            fn probe(&mut self, g: &JoinGraph) -> Result<Option<Probe>> {
                self.1 += 1;
                let mut p = self.0.probe(g)?.unwrap();
                p.counters.physical_plans = Some(100 + self.1);
                Ok(Some(p))
            }
        }
        let inner = ReplayAdapter::new(descriptor(), catalog(), vec![record()], UnknownPlanPolicy::Error).unwrap();
        let report = adapter_conformance(&mut Flaky(inner, 0), &graph());
        assert!(!report.check("probe_deterministic").unwrap().passed);
    }

    #[test]
    fn recorder_captures_what_it_sees() {
        let inner = ReplayAdapter::new(descriptor(), catalog(), vec![record()], UnknownPlanPolicy::Error).unwrap();
        let mut rec = RecordingBackend::new(inner);
        let g = graph();
        rec.run_chosen(&g).unwrap();
        let ba = PhysicalPlan::join(JoinAlgorithm::Cross, vec![], PhysicalPlan::seq("B"), PhysicalPlan::seq("A"));
        rec.run_plan(&g, &ba, None, None).unwrap();
        rec.probe(&g).unwrap();
        assert_eq!(rec.records(), vec![record()]);
    }
}
