//! Search-space counters (#LP, #JO, #PP, #PJ), their derivation from sets of
//! physical plans, and the least-squares fit used to check them against
//! optimization time.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PhysicalPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Counter {
    LogicalPlans,
    JoinOrderings,
    PhysicalPlans,
    PhysicalJoinPlans,
}

impl Counter {
    pub const ALL: [Counter; 4] = [
        Counter::LogicalPlans,
        Counter::JoinOrderings,
        Counter::PhysicalPlans,
        Counter::PhysicalJoinPlans,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Counter::LogicalPlans => "#LP",
            Counter::JoinOrderings => "#JO",
            Counter::PhysicalPlans => "#PP",
            Counter::PhysicalJoinPlans => "#PJ",
        }
    }
}

impl fmt::Display for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Counters reported for one optimized query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CountersDef")]
pub struct EfficiencyCounters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logical_plans: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub join_orderings: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical_plans: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical_join_plans: Option<u64>,
    /// In backend units: deterministic work for the toy engine, milliseconds
    /// for wall-clock backends.
    pub optimization_time: f64,
    /// Set when the source only exposes part of what it enumerated, so the
    /// counts are lower bounds.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub lower_bound: bool,
}

#[derive(Deserialize)]
struct CountersDef {
    logical_plans: Option<u64>,
    join_orderings: Option<u64>,
    physical_plans: Option<u64>,
    physical_join_plans: Option<u64>,
    optimization_time: f64,
    #[serde(default)]
    lower_bound: bool,
}

impl TryFrom<CountersDef> for EfficiencyCounters {
    type Error = Error;

    fn try_from(d: CountersDef) -> Result<Self> {
        let c = EfficiencyCounters {
            logical_plans: d.logical_plans,
            join_orderings: d.join_orderings,
            physical_plans: d.physical_plans,
            physical_join_plans: d.physical_join_plans,
            optimization_time: d.optimization_time,
            lower_bound: d.lower_bound,
        };
        c.validate()?;
        Ok(c)
    }
}

impl EfficiencyCounters {
    pub fn get(&self, c: Counter) -> Option<u64> {
        match c {
            Counter::LogicalPlans => self.logical_plans,
            Counter::JoinOrderings => self.join_orderings,
            Counter::PhysicalPlans => self.physical_plans,
            Counter::PhysicalJoinPlans => self.physical_join_plans,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if Counter::ALL.iter().all(|c| self.get(*c).is_none()) {
            return Err(Error::InvalidArgument(
                "efficiency counters must expose at least one of #LP, #JO, #PP, #PJ".into(),
            ));
        }
        if let (Some(pj), Some(pp)) = (self.physical_join_plans, self.physical_plans) {
            if pj > pp {
                return Err(Error::InvalidArgument(format!("#PJ = {pj} exceeds #PP = {pp}")));
            }
        }
        if let (Some(jo), Some(lp)) = (self.join_orderings, self.logical_plans) {
            if jo > lp {
                return Err(Error::InvalidArgument(format!("#JO = {jo} exceeds #LP = {lp}")));
            }
        }
        if !self.optimization_time.is_finite() || self.optimization_time < 0.0 {
            return Err(Error::InvalidArgument("optimization time must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// All four counters from the physical plans an optimizer costed: #PP is
    /// their number, #PJ the number of join-rooted ones, #LP the distinct
    /// logical plans, #JO the distinct join structures of the join plans.
    pub fn derive_from_physical(plans: &[PhysicalPlan], optimization_time: f64) -> Self {
        let joins = strip_non_join(plans);
        EfficiencyCounters {
            logical_plans: Some(derive_logical(plans)),
            join_orderings: Some(derive_join_orderings(&joins)),
            physical_plans: Some(plans.len() as u64),
            physical_join_plans: Some(joins.len() as u64),
            optimization_time,
            lower_bound: false,
        }
    }
}

/// Drops plans whose root is not a join (scans and other non-join operators).
pub fn strip_non_join(plans: &[PhysicalPlan]) -> Vec<PhysicalPlan> {
    plans.iter().filter(|p| p.is_join()).cloned().collect()
}

/// Distinct plans once join algorithms and access methods are erased.
pub fn derive_logical(plans: &[PhysicalPlan]) -> u64 {
    plans.iter().map(PhysicalPlan::logical_key).collect::<HashSet<_>>().len() as u64
}

/// Distinct `(shape, leaf order)` pairs.
pub fn derive_join_orderings(plans: &[PhysicalPlan]) -> u64 {
    plans.iter().map(PhysicalPlan::ordering_key).collect::<HashSet<_>>().len() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// `y` was constant; `r_squared` is reported as 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

/// Ordinary least squares of `y` on `x` with `r^2 = 1 - SS_res / SS_tot`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<RegressionFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "x has {} points but y has {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument("regression needs at least 2 points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("x is constant".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(RegressionFit {
            slope,
            intercept,
            r_squared: 0.0,
            n_points: n,
            degenerate: true,
        });
    }
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (intercept + slope * a)).powi(2))
        .sum();
    Ok(RegressionFit {
        slope,
        intercept,
        r_squared: (1.0 - ss_res / ss_tot).clamp(0.0, 1.0),
        n_points: n,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryCounters {
    pub query_id: String,
    pub counters: EfficiencyCounters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterRegression {
    pub counter: Counter,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RegressionFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Per-backend summary: mean of each counter over the queries that expose it
/// (`None` = N/A) and the fit of optimization time against each counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub backend: String,
    pub queries: Vec<QueryCounters>,
    /// Counters exposed by no query are absent.
    pub means: BTreeMap<Counter, f64>,
    pub regressions: Vec<CounterRegression>,
    /// True when any query's counters are lower bounds.
    pub lower_bound: bool,
}

pub fn efficiency_report(backend: &str, queries: Vec<QueryCounters>) -> Result<EfficiencyReport> {
    if queries.is_empty() {
        return Err(Error::InvalidArgument("efficiency report over an empty suite".into()));
    }
    for q in &queries {
        q.counters.validate()?;
    }
    let mut means = BTreeMap::new();
    let mut regressions = Vec::new();
    for counter in Counter::ALL {
        let points: Vec<(f64, f64)> = queries
            .iter()
            .filter_map(|q| q.counters.get(counter).map(|v| (v as f64, q.counters.optimization_time)))
            .collect();
        if points.is_empty() {
            continue;
        }
        means.insert(counter, points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64);
        let (x, y): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let entry = if x.len() < 2 {
            CounterRegression {
                counter,
                fit: None,
                note: Some("skipped: fewer than 2 queries".into()),
            }
        } else {
            match linear_regression(&x, &y) {
                Ok(fit) => CounterRegression {
                    counter,
                    fit: Some(fit),
                    note: fit.degenerate.then(|| "optimization time is constant".into()),
                },
                Err(e) => CounterRegression {
                    counter,
                    fit: None,
                    note: Some(format!("skipped: {e}")),
                },
            }
        };
        regressions.push(entry);
    }
    Ok(EfficiencyReport {
        backend: backend.to_string(),
        lower_bound: queries.iter().any(|q| q.counters.lower_bound),
        queries,
        means,
        regressions,
    })
}

impl EfficiencyReport {
    pub fn mean(&self, c: Counter) -> Option<f64> {
        self.means.get(&c).copied()
    }

    pub fn fit(&self, c: Counter) -> Option<&RegressionFit> {
        self.regressions
            .iter()
            .find(|r| r.counter == c)
            .and_then(|r| r.fit.as_ref())
    }

    /// One row shaped like a predictor table: backend then the four means,
    /// `N/A` where a counter is not exposed.
    pub fn csv_row(&self) -> Vec<String> {
        let mut row = vec![self.backend.clone()];
        row.extend(Counter::ALL.iter().map(|c| match self.mean(*c) {
            Some(v) => format_mean(v),
            None => "N/A".to_string(),
        }));
        row
    }

    pub fn csv_header() -> Vec<String> {
        let mut h = vec!["backend".to_string()];
        h.extend(Counter::ALL.iter().map(|c| c.label().to_string()));
        h
    }
}

fn format_mean(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AccessMethod, JoinAlgorithm};
    use proptest::prelude::*;

    fn counters(pp: Option<u64>, pj: Option<u64>, t: f64) -> EfficiencyCounters {
        EfficiencyCounters {
            logical_plans: None,
            join_orderings: None,
            physical_plans: pp,
            physical_join_plans: pj,
            optimization_time: t,
            lower_bound: false,
        }
    }

    fn ab(alg: JoinAlgorithm, left: &str, right: &str) -> PhysicalPlan {
        PhysicalPlan::join(alg, vec![], PhysicalPlan::seq(left), PhysicalPlan::seq(right))
    }

    #[test]
    fn strip_keeps_join_roots() {
        let scan = PhysicalPlan::scan("A", AccessMethod::IndexScan("ia".into()));
        let join = ab(JoinAlgorithm::Hash, "A", "B");
        assert_eq!(strip_non_join(&[scan, join.clone()]), vec![join.clone()]);
        assert_eq!(strip_non_join(&[join.clone(), join.clone()]).len(), 2);
        assert!(strip_non_join(&[]).is_empty());
    }

    #[test]
    fn derive_examples() {
        let hash = ab(JoinAlgorithm::Hash, "A", "B");
        let merge = ab(JoinAlgorithm::Merge, "A", "B");
        assert_eq!(derive_logical(&[hash.clone(), merge.clone()]), 1);
        assert_eq!(derive_join_orderings(&[hash.clone(), merge]), 1);
        let flipped = ab(JoinAlgorithm::Hash, "B", "A");
        assert_eq!(derive_logical(&[hash.clone(), flipped.clone()]), 2);
        assert_eq!(derive_join_orderings(&[hash, flipped]), 2);

        // 2 orderings x 3 algorithms x 1 access method
        let space: Vec<PhysicalPlan> = [("A", "B"), ("B", "A")]
            .iter()
            .flat_map(|(l, r)| JoinAlgorithm::PHYSICAL.iter().map(move |a| ab(*a, l, r)))
            .collect();
        assert_eq!(space.len(), 6);
        assert_eq!(derive_logical(&space), 2);
        assert_eq!(derive_join_orderings(&space), 2);
    }

    #[test]
    fn regression_exact_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 7.0).collect();
        let fit = linear_regression(&x, &y).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept - 7.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regression_three_points() {
        // Sxx = 2, Sxy = 3, SS_tot = 6, SS_res = 1.5; intercept = 3 - 1.5 * 2.
        let fit = linear_regression(&[1.0, 2.0, 3.0], &[2.0, 2.0, 5.0]).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r_squared - 0.75).abs() < 1e-12);
    }

    #[test]
    fn regression_independent_data_has_small_r2() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..5000).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..5000).map(|_| rng.random()).collect();
        assert!(linear_regression(&x, &y).unwrap().r_squared < 0.01);
    }

    #[test]
    fn regression_degenerate_inputs() {
        assert!(matches!(
            linear_regression(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::Degenerate(_))
        ));
        let fit = linear_regression(&[1.0, 2.0], &[4.0, 4.0]).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.r_squared, 0.0);
        assert!(linear_regression(&[1.0], &[1.0]).is_err());
        assert!(linear_regression(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn counters_need_one_value() {
        assert!(counters(None, None, 1.0).validate().is_err());
        assert!(counters(Some(3), Some(4), 1.0).validate().is_err());
        let json = r#"{"optimization_time": 1.0}"#;
        assert!(serde_json::from_str::<EfficiencyCounters>(json).is_err());
    }

    #[test]
    fn report_single_query_na_cells() {
        let report = efficiency_report(
            "mysql",
            vec![QueryCounters {
                query_id: "q1".into(),
                counters: counters(Some(48), Some(40), 2.0),
            }],
        )
        .unwrap();
        assert_eq!(report.csv_row(), vec!["mysql", "N/A", "N/A", "48", "40"]);
        assert!(report.regressions.iter().all(|r| r.fit.is_none() && r.note.is_some()));
        assert!(efficiency_report("x", vec![]).is_err());
    }

    proptest! {
        #[test]
        fn r2_invariant_under_affine_rescaling(
            pts in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            a in 0.1f64..10.0, b in -50.0f64..50.0, c in -10.0f64..-0.1, d in -50.0f64..50.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-3));
            prop_assume!(y.iter().any(|v| (v - y[0]).abs() > 1e-3));
            let base = linear_regression(&x, &y).unwrap();
            let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let y2: Vec<f64> = y.iter().map(|v| c * v + d).collect();
            let scaled = linear_regression(&x2, &y2).unwrap();
            prop_assert!((base.r_squared - scaled.r_squared).abs() < 1e-7);
            prop_assert!((0.0..=1.0).contains(&base.r_squared));
        }

        #[test]
        fn derive_chain_and_order_insensitivity(picks in prop::collection::vec((0usize..3, 0usize..3, any::<bool>()), 0..30)) {
            let names = ["A", "B", "C"];
            let plans: Vec<PhysicalPlan> = picks
                .iter()
                .filter(|(l, r, _)| l != r)
                .map(|(l, r, h)| ab(if *h { JoinAlgorithm::Hash } else { JoinAlgorithm::Merge }, names[*l], names[*r]))
                .collect();
            let distinct: HashSet<_> = plans.iter().map(|p| p.fingerprint()).collect();
            prop_assert!(derive_join_orderings(&plans) <= derive_logical(&plans));
            prop_assert!(derive_logical(&plans) <= distinct.len() as u64);
            let mut rev = plans.clone();
            rev.reverse();
            rev.extend(plans.iter().cloned());
            prop_assert_eq!(derive_logical(&rev), derive_logical(&plans));
            prop_assert_eq!(derive_join_orderings(&rev), derive_join_orderings(&plans));
        }
    }
}
