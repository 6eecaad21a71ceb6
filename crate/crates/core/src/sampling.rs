//! Sample sizing and random physical plans.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::encoding::sample_join_ordering;
use crate::error::{Error, Result};
use crate::model::{
    AccessMethod, BackendCapabilities, Catalog, IndexInfo, JoinGraph, JoinTree, PhysicalPlan,
};

/// Parameters of the proportion estimate: `n = Z^2 p (1 - p) / e^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    /// Standard normal quantile of the confidence level.
    pub confidence_z: f64,
    /// Margin of error `e`.
    pub precision: f64,
    /// Prior estimate of the proportion; 0.5 when unknown.
    #[serde(default = "default_prior")]
    pub prior: f64,
    /// Size of the plan space, when known and small.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<u64>,
}

fn default_prior() -> f64 {
    0.5
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            confidence_z: 1.96,
            precision: 0.05,
            prior: 0.5,
            population: None,
        }
    }
}

impl SamplingConfig {
    /// Two-sided `Z` for a confidence level such as 0.95.
    pub fn z_for_confidence(level: f64) -> Result<f64> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "confidence level {level} must lie in (0, 1)"
            )));
        }
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        Ok(normal.inverse_cdf(0.5 + level / 2.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.confidence_z > 0.0 && self.confidence_z.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "confidence Z must be positive, got {}",
                self.confidence_z
            )));
        }
        if !(self.precision > 0.0 && self.precision <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "precision must lie in (0, 1], got {}",
                self.precision
            )));
        }
        if !(self.prior > 0.0 && self.prior < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "prior must lie in (0, 1), got {}",
                self.prior
            )));
        }
        if self.population == Some(0) {
            return Err(Error::InvalidArgument("population must be positive".into()));
        }
        Ok(())
    }
}

// Absorbs rounding noise so that an exact integer quotient is not pushed up by
// one ulp before taking the ceiling.
const CEIL_SLACK: f64 = 1e-9;

fn ceil_count(x: f64) -> u64 {
    ((x - CEIL_SLACK).ceil().max(1.0)) as u64
}

/// Number of plans to sample, with the finite-population correction
/// `n' = n / (1 + (n - 1) / N)` applied when the population is given.
pub fn required_sample_size(config: &SamplingConfig) -> Result<u64> {
    config.validate()?;
    let z = config.confidence_z;
    let p = config.prior;
    let e = config.precision;
    let n = ceil_count(z * z * p * (1.0 - p) / (e * e));
    Ok(match config.population {
        Some(pop) => ceil_count(n as f64 / (1.0 + (n as f64 - 1.0) / pop as f64)),
        None => n,
    })
}

/// Indexes usable to access the table reference `name`: those on a column
/// that appears in one of its join predicates or filters.
pub fn applicable_indexes<'a>(graph: &JoinGraph, catalog: &'a Catalog, name: &str) -> Vec<&'a IndexInfo> {
    let Some(tref) = graph.table_ref(name) else {
        return Vec::new();
    };
    let used = |col: &str| {
        graph
            .predicates()
            .iter()
            .filter_map(|p| p.column_of(name))
            .any(|c| c.column == col)
            || graph.selections().iter().any(|s| s.table == name && s.column == col)
    };
    catalog
        .indexes_on(&tref.table)
        .iter()
        .filter(|i| used(&i.column))
        .collect()
}

/// Access methods a sampler may pick for `name`, sequential scan first.
pub fn access_choices(
    graph: &JoinGraph,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    name: &str,
) -> Vec<AccessMethod> {
    let mut out = vec![AccessMethod::SequentialScan];
    if caps.supports_index_scan() {
        out.extend(
            applicable_indexes(graph, catalog, name)
                .into_iter()
                .map(|i| AccessMethod::IndexScan(i.name.clone())),
        );
    }
    out
}

/// Annotates a join ordering with uniformly random operators: cross join where
/// the inputs share no predicate, otherwise a backend join algorithm; for each
/// leaf a sequential scan or one of its applicable indexes.
pub fn randomize_physical<R: Rng + ?Sized>(
    tree: &JoinTree,
    graph: &JoinGraph,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    rng: &mut R,
) -> Result<PhysicalPlan> {
    let algorithms = caps.join_algorithms();
    let rng = std::cell::RefCell::new(rng);
    PhysicalPlan::from_tree(
        tree,
        graph,
        &mut || *algorithms.choose(&mut **rng.borrow_mut()).expect("capabilities are non-empty"),
        &mut |name| {
            let choices = access_choices(graph, caps, catalog, name);
            choices
                .choose(&mut **rng.borrow_mut())
                .expect("sequential scan always available")
                .clone()
        },
    )
}

/// One random physical plan.
pub fn sample_plan<R: Rng + ?Sized>(
    graph: &JoinGraph,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    rng: &mut R,
) -> Result<PhysicalPlan> {
    let tree = sample_join_ordering(graph, rng);
    randomize_physical(&tree, graph, caps, catalog, rng)
}

/// Independently drawn plans (with replacement) for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSample {
    pub query_id: String,
    pub seed: u64,
    pub config: SamplingConfig,
    pub plans: Vec<PhysicalPlan>,
}

/// Draws `required_sample_size(config)` plans from a ChaCha8 stream seeded
/// with `seed`.
pub fn sample_plans(
    graph: &JoinGraph,
    config: &SamplingConfig,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    seed: u64,
) -> Result<PlanSample> {
    let count = required_sample_size(config)?;
    sample_n_plans(graph, count as usize, config, caps, catalog, seed)
}

/// Like [`sample_plans`] with an explicit count.
pub fn sample_n_plans(
    graph: &JoinGraph,
    count: usize,
    config: &SamplingConfig,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    seed: u64,
) -> Result<PlanSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plans = (0..count)
        .map(|_| sample_plan(graph, caps, catalog, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(PlanSample {
        query_id: graph.query_id().to_string(),
        seed,
        config: *config,
        plans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_plan, ColumnRef, JoinAlgorithm, JoinPredicate, TableInfo, TableRef};
    use std::collections::HashMap;

    fn cfg(z: f64, e: f64, pop: Option<u64>) -> SamplingConfig {
        SamplingConfig {
            confidence_z: z,
            precision: e,
            prior: 0.5,
            population: pop,
        }
    }

    #[test]
    fn sample_size_examples() {
        assert_eq!(required_sample_size(&cfg(1.96, 0.05, None)).unwrap(), 385);
        // 385 / (1 + 384/1000) = 278.17
        assert_eq!(required_sample_size(&cfg(1.96, 0.05, Some(1000))).unwrap(), 279);
        assert_eq!(required_sample_size(&cfg(1.96, 1.0, None)).unwrap(), 1);
        assert!(required_sample_size(&cfg(1.96, 0.0, None)).is_err());
        assert!(required_sample_size(&cfg(0.0, 0.05, None)).is_err());
    }

    #[test]
    fn z_from_level() {
        let z = SamplingConfig::z_for_confidence(0.95).unwrap();
        assert!((z - 1.959964).abs() < 1e-6);
        assert_eq!(required_sample_size(&cfg(z, 0.05, None)).unwrap(), 385);
        assert!(SamplingConfig::z_for_confidence(1.0).is_err());
    }

    #[test]
    fn exact_quotients_do_not_round_up() {
        // 2^2 * 0.25 / 0.1^2 = 100
        assert_eq!(required_sample_size(&cfg(2.0, 0.1, None)).unwrap(), 100);
    }

    fn two_table(index_on_b: bool) -> (JoinGraph, Catalog) {
        let mut b = TableInfo {
            name: "B".into(),
            columns: vec!["y".into()],
            row_count: 10,
            indexes: vec![],
        };
        if index_on_b {
            b.indexes.push(IndexInfo {
                name: "ib".into(),
                table: "B".into(),
                column: "y".into(),
            });
        }
        let a = TableInfo {
            name: "A".into(),
            columns: vec!["x".into()],
            row_count: 10,
            indexes: vec![],
        };
        let g = JoinGraph::new(
            "q",
            vec![TableRef::new("A"), TableRef::new("B")],
            vec![JoinPredicate::new(ColumnRef::new("A", "x"), ColumnRef::new("B", "y"))],
            vec![],
        )
        .unwrap();
        (g, Catalog::new(vec![a, b]).unwrap())
    }

    #[test]
    fn singleton_choices_are_deterministic() {
        let (g, cat) = two_table(false);
        let caps = BackendCapabilities::new([JoinAlgorithm::NestedLoop], true).unwrap();
        let sample = sample_plans(&g, &SamplingConfig::default(), &caps, &cat, 3).unwrap();
        assert_eq!(sample.plans.len(), 385);
        let mut seen: HashMap<String, usize> = HashMap::new();
        for p in &sample.plans {
            *seen.entry(p.fingerprint().0).or_default() += 1;
            assert_eq!(validate_plan(p, &g, &caps, &cat), Ok(()));
        }
        assert_eq!(seen.len(), 2);
        let share = seen["NL(A,B)"] as f64 / 385.0;
        assert!((share - 0.5).abs() < 0.1, "{share}");
    }

    #[test]
    fn same_seed_same_sample() {
        let (g, cat) = two_table(true);
        let caps = BackendCapabilities::default();
        let a = sample_plans(&g, &SamplingConfig::default(), &caps, &cat, 11).unwrap();
        let b = sample_plans(&g, &SamplingConfig::default(), &caps, &cat, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_plans(&g, &SamplingConfig::default(), &caps, &cat, 12).unwrap();
        assert_ne!(a.plans, c.plans);
    }

    #[test]
    fn disconnected_root_is_cross() {
        let cat = Catalog::new(vec![
            TableInfo {
                name: "A".into(),
                columns: vec!["x".into()],
                row_count: 1,
                indexes: vec![],
            },
            TableInfo {
                name: "B".into(),
                columns: vec!["x".into()],
                row_count: 1,
                indexes: vec![],
            },
        ])
        .unwrap();
        let g = JoinGraph::new("q", vec![TableRef::new("A"), TableRef::new("B")], vec![], vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let p = sample_plan(&g, &BackendCapabilities::default(), &cat, &mut rng).unwrap();
            let PhysicalPlan::Join { algorithm, .. } = p else { panic!() };
            assert_eq!(algorithm, JoinAlgorithm::Cross);
        }
    }

    #[test]
    fn applicable_index_requires_predicate_or_filter_column() {
        let (g, mut cat) = two_table(true);
        let mut tables = cat.tables().to_vec();
        tables[1].columns.push("z".into());
        tables[1].indexes.push(IndexInfo {
            name: "iz".into(),
            table: "B".into(),
            column: "z".into(),
        });
        cat = Catalog::new(tables).unwrap();
        let names: Vec<_> = applicable_indexes(&g, &cat, "B").into_iter().map(|i| i.name.clone()).collect();
        assert_eq!(names, vec!["ib"]);
        let no_idx = BackendCapabilities::new([JoinAlgorithm::Hash], false).unwrap();
        assert_eq!(access_choices(&g, &no_idx, &cat, "B"), vec![AccessMethod::SequentialScan]);
    }
}
