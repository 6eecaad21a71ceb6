//! Performance factor, optimality frequency and the per-query benchmark run.

use std::collections::HashSet;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::adapter::{Backend, Probe, Runtime};
use crate::dialect::compile_plan;
use crate::error::{Error, Result};
use crate::model::{JoinGraph, PhysicalPlan, PlanFingerprint};
use crate::sampling::{sample_plans, SamplingConfig};

/// PF estimate with its fixed-margin interval, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfEstimate {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// Share of `sample` at least as slow as `chosen`; ties count. The interval
/// is `estimate ± precision`.
pub fn performance_factor(chosen: Runtime, sample: &[Runtime], precision: f64) -> Result<PfEstimate> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("performance factor of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&precision) {
        return Err(Error::InvalidArgument(format!("precision {precision} outside [0, 1]")));
    }
    let worse = sample.iter().filter(|r| r.0 >= chosen.0).count();
    let estimate = worse as f64 / sample.len() as f64;
    Ok(PfEstimate {
        estimate,
        low: (estimate - precision).max(0.0),
        high: (estimate + precision).min(1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEffectivenessResult {
    pub query_id: String,
    pub chosen: PlanFingerprint,
    pub chosen_runtime: Runtime,
    pub sample_runtimes: Vec<Runtime>,
    pub pf: PfEstimate,
    pub relative_optimal: bool,
    pub seed: u64,
    /// Sampled plans that ran faster than the chosen one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub better_plans: Vec<PlanFingerprint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub misses: Option<MissClassification>,
}

impl QueryEffectivenessResult {
    pub fn new(
        query_id: impl Into<String>,
        chosen: PlanFingerprint,
        chosen_runtime: Runtime,
        sample_runtimes: Vec<Runtime>,
        precision: f64,
        seed: u64,
    ) -> Result<Self> {
        let pf = performance_factor(chosen_runtime, &sample_runtimes, precision)?;
        Ok(QueryEffectivenessResult {
            query_id: query_id.into(),
            chosen,
            chosen_runtime,
            sample_runtimes,
            relative_optimal: pf.estimate == 1.0,
            pf,
            seed,
            better_plans: Vec::new(),
            misses: None,
        })
    }
}

/// Share of queries whose estimated PF is 1. Samples can miss better plans,
/// so this is an upper bound on the true value.
pub fn optimality_frequency(results: &[QueryEffectivenessResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("optimality frequency of an empty suite".into()));
    }
    Ok(results.iter().filter(|r| r.relative_optimal).count() as f64 / results.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectivenessReport {
    pub backend: String,
    pub precision: f64,
    pub per_query: Vec<QueryEffectivenessResult>,
    pub optimality_frequency: f64,
    /// Mean PF over queries that missed the relative optimal plan.
    pub avg_pf_suboptimal: Option<f64>,
    /// `(tau, share of queries with pf - precision > tau)`.
    pub threshold_shares: Vec<(f64, f64)>,
    /// Queries that could not be benchmarked; they are left out of every
    /// aggregate.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<QueryFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryFailure {
    pub query_id: String,
    pub error: String,
    pub exit_code: i32,
}

impl EffectivenessReport {
    pub fn new(
        backend: impl Into<String>,
        precision: f64,
        per_query: Vec<QueryEffectivenessResult>,
        thresholds: &[f64],
    ) -> Result<Self> {
        let optimality_frequency = optimality_frequency(&per_query)?;
        let sub: Vec<f64> = per_query
            .iter()
            .filter(|r| !r.relative_optimal)
            .map(|r| r.pf.estimate)
            .collect();
        let avg_pf_suboptimal = (!sub.is_empty()).then(|| sub.iter().sum::<f64>() / sub.len() as f64);
        let mut report = EffectivenessReport {
            backend: backend.into(),
            precision,
            per_query,
            optimality_frequency,
            avg_pf_suboptimal,
            threshold_shares: Vec::new(),
            failures: Vec::new(),
        };
        report.threshold_shares = thresholds.iter().map(|&t| (t, report.threshold_share(t))).collect();
        Ok(report)
    }

    /// Share of queries whose PF is above `tau` even at the bottom of the
    /// margin.
    pub fn threshold_share(&self, tau: f64) -> f64 {
        let hits = self
            .per_query
            .iter()
            .filter(|r| r.pf.estimate - self.precision > tau)
            .count();
        hits as f64 / self.per_query.len() as f64
    }

    pub fn csv_header() -> [&'static str; 8] {
        [
            "query_id",
            "pf",
            "pf_low",
            "pf_high",
            "relative_optimal",
            "chosen_runtime",
            "sample_size",
            "seed",
        ]
    }

    pub fn csv_rows(&self) -> Vec<[String; 8]> {
        self.per_query
            .iter()
            .map(|r| {
                [
                    r.query_id.clone(),
                    r.pf.estimate.to_string(),
                    r.pf.low.to_string(),
                    r.pf.high.to_string(),
                    r.relative_optimal.to_string(),
                    r.chosen_runtime.to_string(),
                    r.sample_runtimes.len().to_string(),
                    r.seed.to_string(),
                ]
            })
            .collect()
    }

    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(Self::csv_header())?;
        for row in self.csv_rows() {
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

/// Per-query run settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkOptions {
    pub sampling: SamplingConfig,
    pub seed: u64,
    /// Sampled plans slower than `factor x chosen runtime` are cut off and
    /// count as infinitely slow. `None` disables the cut-off.
    pub timeout_factor: Option<f64>,
    /// Probe the optimizer afterwards and split the better plans by whether
    /// it costed them.
    pub classify_misses: bool,
}

/// Runs one query through the effectiveness workflow: the unhinted run, a
/// plan sample, one forced run per sampled plan with a cache reset before
/// each, then the PF.
pub fn benchmark_query(
    backend: &mut dyn Backend,
    graph: &JoinGraph,
    options: &BenchmarkOptions,
) -> Result<QueryEffectivenessResult> {
    backend.reset_cache()?;
    let chosen = backend.run_chosen(graph)?;
    let sample = sample_plans(
        graph,
        &options.sampling,
        backend.capabilities(),
        backend.catalog(),
        options.seed,
    )?;
    let timeout = options.timeout_factor.map(|f| Runtime(chosen.runtime.0 * f));
    let mut runtimes = Vec::with_capacity(sample.plans.len());
    let mut better: Vec<&PhysicalPlan> = Vec::new();
    for plan in &sample.plans {
        let hinted = backend.dialect().map(|d| compile_plan(plan, graph, d)).transpose()?;
        backend.reset_cache()?;
        let rt = backend.run_plan(graph, plan, hinted.as_ref(), timeout)?;
        if rt.0 < chosen.runtime.0 {
            better.push(plan);
        }
        runtimes.push(rt);
    }
    debug!(
        "{}: chosen {} ran {}, {} sampled plans",
        graph.query_id(),
        chosen.fingerprint,
        chosen.runtime,
        runtimes.len()
    );
    let mut result = QueryEffectivenessResult::new(
        graph.query_id(),
        chosen.fingerprint,
        chosen.runtime,
        runtimes,
        options.sampling.precision,
        options.seed,
    )?;
    let mut seen = HashSet::new();
    better.retain(|p| seen.insert(p.fingerprint()));
    if options.classify_misses {
        if let Some(considered) = backend.probe(graph)?.as_ref().and_then(Considered::from_probe) {
            let better: Vec<PhysicalPlan> = better.iter().map(|&p| p.clone()).collect();
            result.misses = Some(classify_misses(&better, &considered));
        }
    }
    result.better_plans = better.iter().map(|p| p.fingerprint()).collect();
    Ok(result)
}

/// Better-than-chosen plans split by whether the optimizer costed them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissClassification {
    pub better_total: u64,
    /// Costed but rejected: the cost model got them wrong.
    pub costed_but_rejected: u64,
    /// Never enumerated: the search strategy missed them.
    pub never_enumerated: u64,
    /// The considered set may be incomplete, so `costed_but_rejected` is a
    /// lower bound.
    #[serde(default)]
    pub lower_bound: bool,
}

impl MissClassification {
    pub fn cost_model_share(&self) -> Option<f64> {
        (self.better_total > 0).then(|| self.costed_but_rejected as f64 / self.better_total as f64)
    }

    pub fn enumeration_share(&self) -> Option<f64> {
        (self.better_total > 0).then(|| self.never_enumerated as f64 / self.better_total as f64)
    }
}

/// What an optimizer reported costing for one query.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Considered {
    pub plans: HashSet<PlanFingerprint>,
    /// Costed operators; `None` when the backend only lists complete plans.
    pub operators: Option<HashSet<String>>,
    pub lower_bound: bool,
}

impl Considered {
    /// `None` when the probe carries neither plans nor operators.
    pub fn from_probe(p: &Probe) -> Option<Self> {
        if p.considered.is_none() && p.costed_operators.is_none() {
            return None;
        }
        Some(Considered {
            plans: p.considered.iter().flatten().cloned().collect(),
            operators: p.costed_operators.as_ref().map(|o| o.iter().cloned().collect()),
            lower_bound: p.counters.lower_bound,
        })
    }

    /// Listed as a complete plan, or every operator of it was costed.
    pub fn contains(&self, plan: &PhysicalPlan) -> bool {
        self.plans.contains(&plan.fingerprint())
            || self
                .operators
                .as_ref()
                .is_some_and(|ops| plan.operator_keys().iter().all(|k| ops.contains(k)))
    }
}

pub fn classify_misses(better: &[PhysicalPlan], considered: &Considered) -> MissClassification {
    let costed = better.iter().filter(|p| considered.contains(p)).count() as u64;
    MissClassification {
        better_total: better.len() as u64,
        costed_but_rejected: costed,
        never_enumerated: better.len() as u64 - costed,
        lower_bound: considered.lower_bound,
    }
}

pub fn classify_fingerprints(better: &[PlanFingerprint], considered: &HashSet<PlanFingerprint>) -> MissClassification {
    let costed = better.iter().filter(|fp| considered.contains(fp)).count() as u64;
    MissClassification {
        better_total: better.len() as u64,
        costed_but_rejected: costed,
        never_enumerated: better.len() as u64 - costed,
        lower_bound: false,
    }
}
