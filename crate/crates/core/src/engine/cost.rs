use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::data::Database;
use super::exec::{scan_leaf, Rows};
use super::work;
use crate::error::{Error, Result};
use crate::model::{AccessMethod, JoinAlgorithm, JoinGraph, PhysicalPlan, TableSet};

/// Exact cardinalities of every table subset of one query, computed lazily.
///
/// The cardinality of a subset does not depend on the plan that produces it,
/// so the work of any plan follows from these numbers alone.
pub struct QueryStats {
    graph: JoinGraph,
    db: Arc<Database>,
    leaves: Vec<Rc<Rows>>,
    leaf_work: RefCell<HashMap<(usize, AccessMethod), u64>>,
    connected: RefCell<HashMap<TableSet, Rc<Rows>>>,
}

impl QueryStats {
    pub fn new(graph: &JoinGraph, db: Arc<Database>) -> Result<Self> {
        let leaves = (0..graph.len())
            .map(|i| Ok(Rc::new(scan_leaf(graph, &db, i, &AccessMethod::SequentialScan)?.rows)))
            .collect::<Result<Vec<_>>>()?;
        Ok(QueryStats {
            graph: graph.clone(),
            db,
            leaves,
            leaf_work: RefCell::new(HashMap::new()),
            connected: RefCell::new(HashMap::new()),
        })
    }

    pub fn graph(&self) -> &JoinGraph {
        &self.graph
    }

    pub fn database(&self) -> &Arc<Database> {
        &self.db
    }

    /// Work of accessing the reference at `pos` with `access`.
    pub fn leaf_work(&self, pos: usize, access: &AccessMethod) -> Result<u64> {
        if let Some(&w) = self.leaf_work.borrow().get(&(pos, access.clone())) {
            return Ok(w);
        }
        let w = scan_leaf(&self.graph, &self.db, pos, access)?.work;
        self.leaf_work.borrow_mut().insert((pos, access.clone()), w);
        Ok(w)
    }

    /// Rows produced by joining `set` with every predicate inside it applied.
    pub fn cardinality(&self, set: TableSet) -> u64 {
        self.components(set)
            .into_iter()
            .fold(1u64, |acc, c| acc.saturating_mul(self.connected_rows(c).len() as u64))
    }

    /// Work of joining `left` and `right` with `alg`.
    pub fn join_work(&self, alg: JoinAlgorithm, left: TableSet, right: TableSet) -> u64 {
        work::join(
            alg,
            self.cardinality(left),
            self.cardinality(right),
            self.cardinality(left.union(right)),
        )
    }

    /// Work units executing `plan` would report.
    pub fn plan_work(&self, plan: &PhysicalPlan) -> Result<u64> {
        plan_cost(&Truthful, self, plan).map(|c| c as u64)
    }

    fn components(&self, set: TableSet) -> Vec<TableSet> {
        let mut left = set;
        let mut out = Vec::new();
        while let Some(start) = left.iter().next() {
            let mut reached = TableSet::single(start);
            loop {
                let mut grown = reached;
                for i in 0..self.graph.predicates().len() {
                    let (a, b) = self.graph.endpoints(i);
                    if set.contains(a) && set.contains(b) && (reached.contains(a) || reached.contains(b)) {
                        grown = grown.union(TableSet::single(a)).union(TableSet::single(b));
                    }
                }
                if grown == reached {
                    break;
                }
                reached = grown;
            }
            out.push(reached);
            left = left.minus(reached);
        }
        out
    }

    fn connected_rows(&self, set: TableSet) -> Rc<Rows> {
        if set.len() == 1 {
            return self.leaves[set.iter().next().expect("non-empty")].clone();
        }
        if let Some(r) = self.connected.borrow().get(&set) {
            return r.clone();
        }
        let last = set
            .iter()
            .filter(|&t| self.graph.is_connected(set.minus(TableSet::single(t))))
            .last()
            .expect("a connected graph has a non-cut vertex");
        let rest = set.minus(TableSet::single(last));
        let l = self.connected_rows(rest);
        let r = self.leaves[last].clone();
        let rows = Rc::new(hash_join(&self.graph, rest, last, &l, &r));
        self.connected.borrow_mut().insert(set, rows.clone());
        rows
    }
}

fn hash_join(graph: &JoinGraph, rest: TableSet, last: usize, l: &Rows, r: &Rows) -> Rows {
    let mut lk = Vec::new();
    let mut rk = Vec::new();
    for i in graph.separating(rest, TableSet::single(last)) {
        let p = &graph.predicates()[i];
        let (lc, rc) = if l.schema.contains(&p.left) {
            (&p.left, &p.right)
        } else {
            (&p.right, &p.left)
        };
        lk.push(l.schema.iter().position(|c| c == lc).expect("column of joined side"));
        rk.push(r.schema.iter().position(|c| c == rc).expect("column of leaf"));
    }
    let mut table: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (j, row) in r.data.iter().enumerate() {
        table.entry(rk.iter().map(|&p| row[p]).collect()).or_default().push(j);
    }
    let mut data = Vec::new();
    for a in &l.data {
        let k: Vec<i64> = lk.iter().map(|&p| a[p]).collect();
        if let Some(js) = table.get(&k) {
            for &j in js {
                data.push(a.iter().chain(&r.data[j]).copied().collect());
            }
        }
    }
    Rows {
        schema: l.schema.iter().chain(&r.schema).cloned().collect(),
        data,
    }
}

/// Operator kinds a cost model may weigh differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    SequentialScan,
    IndexScan,
    NestedLoop,
    Hash,
    Merge,
    Cross,
}

impl NodeKind {
    pub const ALL: [NodeKind; 6] = [
        NodeKind::SequentialScan,
        NodeKind::IndexScan,
        NodeKind::NestedLoop,
        NodeKind::Hash,
        NodeKind::Merge,
        NodeKind::Cross,
    ];

    pub fn of_access(access: &AccessMethod) -> Self {
        match access {
            AccessMethod::SequentialScan => NodeKind::SequentialScan,
            AccessMethod::IndexScan(_) => NodeKind::IndexScan,
        }
    }

    pub fn of_join(alg: JoinAlgorithm) -> Self {
        match alg {
            JoinAlgorithm::NestedLoop => NodeKind::NestedLoop,
            JoinAlgorithm::Hash => NodeKind::Hash,
            JoinAlgorithm::Merge => NodeKind::Merge,
            JoinAlgorithm::Cross => NodeKind::Cross,
        }
    }
}

/// Estimated cost of plan operators. Costs are additive over plan nodes.
pub trait CostModel {
    fn leaf(&self, stats: &QueryStats, pos: usize, access: &AccessMethod) -> Result<f64>;
    fn join(&self, stats: &QueryStats, alg: JoinAlgorithm, left: TableSet, right: TableSet) -> f64;
}

/// Cost equals the work execution reports.
#[derive(Debug, Clone, Copy, Default)]
pub struct Truthful;

impl CostModel for Truthful {
    fn leaf(&self, stats: &QueryStats, pos: usize, access: &AccessMethod) -> Result<f64> {
        Ok(stats.leaf_work(pos, access)? as f64)
    }

    fn join(&self, stats: &QueryStats, alg: JoinAlgorithm, left: TableSet, right: TableSet) -> f64 {
        stats.join_work(alg, left, right) as f64
    }
}

/// Truthful cost scaled by one lognormal factor per node kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Noisy {
    pub factors: BTreeMap<NodeKind, f64>,
}

impl Noisy {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise sigma must be finite and >= 0, got {sigma}")));
        }
        let dist = LogNormal::new(0.0, sigma)
            .map_err(|e| Error::InvalidArgument(format!("noise sigma {sigma}: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors = NodeKind::ALL.iter().map(|&k| (k, dist.sample(&mut rng))).collect();
        Ok(Noisy { factors })
    }

    fn factor(&self, kind: NodeKind) -> f64 {
        self.factors.get(&kind).copied().unwrap_or(1.0)
    }
}

impl CostModel for Noisy {
    fn leaf(&self, stats: &QueryStats, pos: usize, access: &AccessMethod) -> Result<f64> {
        Ok(stats.leaf_work(pos, access)? as f64 * self.factor(NodeKind::of_access(access)))
    }

    fn join(&self, stats: &QueryStats, alg: JoinAlgorithm, left: TableSet, right: TableSet) -> f64 {
        stats.join_work(alg, left, right) as f64 * self.factor(NodeKind::of_join(alg))
    }
}

/// Serializable choice of cost model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostModelConfig {
    #[default]
    Truthful,
    Noisy { sigma: f64, seed: u64 },
}

impl CostModelConfig {
    pub fn build(&self) -> Result<Box<dyn CostModel>> {
        Ok(match *self {
            CostModelConfig::Truthful => Box::new(Truthful),
            CostModelConfig::Noisy { sigma, seed } => Box::new(Noisy::new(sigma, seed)?),
        })
    }
}

/// Sum of `model` costs over all nodes of `plan`.
pub fn plan_cost(model: &dyn CostModel, stats: &QueryStats, plan: &PhysicalPlan) -> Result<f64> {
    Ok(cost_rec(model, stats, plan)?.0)
}

fn cost_rec(model: &dyn CostModel, stats: &QueryStats, plan: &PhysicalPlan) -> Result<(f64, TableSet)> {
    match plan {
        PhysicalPlan::Scan { table, access } => {
            let pos = stats
                .graph()
                .position(table)
                .ok_or_else(|| Error::InvalidArgument(format!("`{table}` is not part of the query")))?;
            Ok((model.leaf(stats, pos, access)?, TableSet::single(pos)))
        }
        PhysicalPlan::Join {
            algorithm, left, right, ..
        } => {
            let (lc, ls) = cost_rec(model, stats, left)?;
            let (rc, rs) = cost_rec(model, stats, right)?;
            if ls.intersects(rs) {
                return Err(Error::InvalidArgument("plan repeats a table".into()));
            }
            Ok((lc + rc + model.join(stats, *algorithm, ls, rs), ls.union(rs)))
        }
    }
}
