//! The toy engine behind the adapter contract.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::cost::{CostModel, CostModelConfig, QueryStats};
use super::data::Database;
use super::exec::{execute_with_budget, Outcome};
use super::optimizer::{optimize, Optimized, Strategy};
use crate::adapter::{AdapterDescriptor, Backend, CacheReset, ChosenRun, Isolation, Probe, Runtime};
use crate::dialect::{HintDialect, HintedQuery};
use crate::efficiency::Counter;
use crate::error::Result;
use crate::model::{BackendCapabilities, Catalog, JoinGraph, PhysicalPlan};

/// How the toy engine turns a plan into a runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeMode {
    /// Work units from exact cardinalities, without running the plan.
    #[default]
    Modeled,
    /// Work units reported by actually executing the plan.
    Executed,
    /// Wall-clock milliseconds of executing the plan. Not reproducible.
    WallClock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub strategy: Strategy,
    #[serde(default)]
    pub cost_model: CostModelConfig,
    #[serde(default)]
    pub capabilities: BackendCapabilities,
    #[serde(default)]
    pub runtime: RuntimeMode,
}

impl ToyConfig {
    pub fn new(strategy: Strategy) -> Self {
        ToyConfig {
            strategy,
            cost_model: CostModelConfig::default(),
            capabilities: BackendCapabilities::default(),
            runtime: RuntimeMode::Modeled,
        }
    }
}

pub struct ToyBackend {
    descriptor: AdapterDescriptor,
    db: Arc<Database>,
    strategy: Strategy,
    model: Box<dyn CostModel>,
    runtime: RuntimeMode,
    dialect: Option<Box<dyn HintDialect>>,
    stats: HashMap<String, QueryStats>,
}

impl ToyBackend {
    pub fn new(db: Arc<Database>, config: &ToyConfig) -> Result<Self> {
        let descriptor = AdapterDescriptor {
            name: match config.cost_model {
                CostModelConfig::Truthful => format!("toy-{}", config.strategy),
                CostModelConfig::Noisy { .. } => format!("toy-{}-noisy", config.strategy),
            },
            dialect: None,
            capabilities: config.capabilities.clone(),
            probe_support: BTreeSet::from(Counter::ALL),
            isolation: Isolation::ParallelSafe,
            cache_reset: CacheReset::NoOp,
            effectiveness_only: false,
        };
        Ok(ToyBackend {
            descriptor,
            db,
            strategy: config.strategy,
            model: config.cost_model.build()?,
            runtime: config.runtime,
            dialect: None,
            stats: HashMap::new(),
        })
    }

    /// Compiles sampled plans with `dialect` before running them. The toy
    /// engine still runs the plan itself; the text only exercises the
    /// compiler.
    pub fn with_dialect(mut self, dialect: Box<dyn HintDialect>) -> Self {
        self.descriptor.dialect = Some(dialect.name().to_string());
        self.dialect = Some(dialect);
        self
    }

    pub fn database(&self) -> &Arc<Database> {
        &self.db
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Cardinality cache for `graph`, built on first use.
    pub fn stats(&mut self, graph: &JoinGraph) -> Result<&QueryStats> {
        let stale = self
            .stats
            .get(graph.query_id())
            .is_some_and(|s| s.graph() != graph);
        if stale || !self.stats.contains_key(graph.query_id()) {
            graph.check_against(self.db.catalog())?;
            let s = QueryStats::new(graph, Arc::clone(&self.db))?;
            self.stats.insert(graph.query_id().to_string(), s);
        }
        Ok(&self.stats[graph.query_id()])
    }

    pub fn optimize(&mut self, graph: &JoinGraph) -> Result<Optimized> {
        self.stats(graph)?;
        let stats = &self.stats[graph.query_id()];
        optimize(
            self.strategy,
            stats,
            self.model.as_ref(),
            &self.descriptor.capabilities,
            self.db.catalog(),
        )
    }

    fn measure(&mut self, graph: &JoinGraph, plan: &PhysicalPlan, timeout: Option<Runtime>) -> Result<Runtime> {
        let rt = match self.runtime {
            RuntimeMode::Modeled => Runtime(self.stats(graph)?.plan_work(plan)? as f64),
            RuntimeMode::Executed => {
                let budget = timeout.filter(|t| !t.is_timeout()).map(|t| t.0.floor() as u64);
                match execute_with_budget(plan, graph, &self.db, budget)? {
                    Outcome::Completed(e) => Runtime(e.work() as f64),
                    Outcome::OverBudget { .. } => Runtime::TIMEOUT,
                }
            }
            RuntimeMode::WallClock => {
                let start = Instant::now();
                execute_with_budget(plan, graph, &self.db, None)?;
                Runtime(start.elapsed().as_secs_f64() * 1e3)
            }
        };
        Ok(match timeout {
            Some(t) if rt.0 > t.0 => Runtime::TIMEOUT,
            _ => rt,
        })
    }
}

impl Backend for ToyBackend {
    fn descriptor(&self) -> &AdapterDescriptor {
        &self.descriptor
    }

    fn catalog(&self) -> &Catalog {
        self.db.catalog()
    }

    fn dialect(&self) -> Option<&dyn HintDialect> {
        self.dialect.as_deref()
    }

    fn run_chosen(&mut self, graph: &JoinGraph) -> Result<ChosenRun> {
        let plan = self.optimize(graph)?.plan;
        let runtime = self.measure(graph, &plan, None)?;
        Ok(ChosenRun {
            fingerprint: plan.fingerprint(),
            plan: Some(plan),
            runtime,
        })
    }

    fn run_plan(
        &mut self,
        graph: &JoinGraph,
        plan: &PhysicalPlan,
        _hinted: Option<&HintedQuery>,
        timeout: Option<Runtime>,
    ) -> Result<Runtime> {
        self.measure(graph, plan, timeout)
    }

    fn reset_cache(&mut self) -> Result<()> {
        Ok(())
    }

    fn probe(&mut self, graph: &JoinGraph) -> Result<Option<Probe>> {
        let o = self.optimize(graph)?;
        Ok(Some(Probe {
            counters: o.counters,
            considered: Some(o.considered.iter().map(PhysicalPlan::fingerprint).collect()),
            costed_operators: Some(o.costed_operators.into_iter().collect()),
        }))
    }
}
