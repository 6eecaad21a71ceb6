//! Instrumented optimizers.
//!
//! Counters are kept at memo granularity. Every ordered split `(S1, S2)` of
//! a table set that the optimizer examines is one join ordering (#JO) and one
//! logical join plan; each leaf access is a further logical plan (#LP). Every
//! operator alternative costed is a physical plan (#PP), and the join ones
//! among them are physical join plans (#PJ). Optimization time is the number
//! of memo entries touched: two lookups and one predicate check per
//! separating predicate for each split, plus one per costed alternative.

use std::collections::BTreeSet;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cost::{CostModel, QueryStats};
use crate::efficiency::EfficiencyCounters;
use crate::error::{Error, Result};
use crate::model::{
    operator_key, AccessMethod, BackendCapabilities, Catalog, JoinAlgorithm, JoinGraph, PhysicalPlan, TableSet,
};
use crate::sampling::{access_choices, sample_plan};

/// Largest query the subset DP accepts.
pub const MAX_DP_TABLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Bushy dynamic programming over all table subsets, cross products included.
    Exhaustive,
    /// Linear trees: the cheapest two-table join, then repeatedly the
    /// cheapest connected table joined on either side.
    GreedyLeftDeep,
    /// One uniformly sampled plan.
    UniformRandom { seed: u64 },
    /// Bushy dynamic programming that keeps the most expensive alternative.
    AdversarialWorst,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Exhaustive => f.write_str("exhaustive"),
            Strategy::GreedyLeftDeep => f.write_str("greedy_left_deep"),
            Strategy::UniformRandom { seed } => write!(f, "uniform_random:{seed}"),
            Strategy::AdversarialWorst => f.write_str("adversarial_worst"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    /// `exhaustive`, `greedy`, `adversarial` or `random[:seed]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, seed) = match s.split_once(':') {
            Some((n, seed)) => (
                n,
                Some(seed.parse::<u64>().map_err(|e| Error::InvalidArgument(format!("strategy seed `{seed}`: {e}")))?),
            ),
            None => (s, None),
        };
        match (name, seed) {
            ("exhaustive", None) => Ok(Strategy::Exhaustive),
            ("greedy" | "greedy_left_deep", None) => Ok(Strategy::GreedyLeftDeep),
            ("adversarial" | "adversarial_worst", None) => Ok(Strategy::AdversarialWorst),
            ("random" | "uniform_random", seed) => Ok(Strategy::UniformRandom { seed: seed.unwrap_or(0) }),
            _ => Err(Error::InvalidArgument(format!("unknown strategy `{s}`"))),
        }
    }
}

/// Optimizer output.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub plan: PhysicalPlan,
    /// Estimated cost of `plan` under the optimizer's cost model.
    pub cost: f64,
    pub counters: EfficiencyCounters,
    /// Complete plans (covering every table) the optimizer costed.
    pub considered: Vec<PhysicalPlan>,
    /// Keys of every operator the optimizer costed; see
    /// [`PhysicalPlan::operator_keys`].
    pub costed_operators: BTreeSet<String>,
}

#[derive(Default)]
struct Tally {
    splits: u64,
    leaves: u64,
    physical: u64,
    physical_join: u64,
    touched: u64,
    ops: BTreeSet<String>,
}

impl Tally {
    fn join_op(&mut self, g: &JoinGraph, alg: JoinAlgorithm, l: TableSet, r: TableSet) {
        self.ops.insert(operator_key(alg, &g.names(l), &g.names(r)));
    }
}

impl Tally {
    fn counters(&self) -> EfficiencyCounters {
        EfficiencyCounters {
            logical_plans: Some(self.splits + self.leaves),
            join_orderings: Some(self.splits),
            physical_plans: Some(self.physical),
            physical_join_plans: Some(self.physical_join),
            optimization_time: self.touched as f64,
            lower_bound: false,
        }
    }
}

pub fn optimize(
    strategy: Strategy,
    stats: &QueryStats,
    model: &dyn CostModel,
    caps: &BackendCapabilities,
    catalog: &Catalog,
) -> Result<Optimized> {
    match strategy {
        Strategy::Exhaustive => dynamic_program(stats, model, caps, catalog, false),
        Strategy::AdversarialWorst => dynamic_program(stats, model, caps, catalog, true),
        Strategy::GreedyLeftDeep => greedy(stats, model, caps, catalog),
        Strategy::UniformRandom { seed } => random(stats, model, caps, catalog, seed),
    }
}

struct Leaf {
    access: AccessMethod,
    cost: f64,
}

/// Costs every access alternative of every table, keeping the best (or worst).
fn best_leaves(
    stats: &QueryStats,
    model: &dyn CostModel,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    worst: bool,
    tally: &mut Tally,
) -> Result<Vec<Leaf>> {
    let g = stats.graph();
    (0..g.len())
        .map(|i| {
            let mut best: Option<Leaf> = None;
            for access in access_choices(g, caps, catalog, g.tables()[i].name()) {
                let cost = model.leaf(stats, i, &access)?;
                tally.ops.insert(PhysicalPlan::scan(g.tables()[i].name(), access.clone()).fingerprint().0);
                tally.physical += 1;
                tally.touched += 1;
                if best.as_ref().is_none_or(|b| better(cost, b.cost, worst)) {
                    best = Some(Leaf { access, cost });
                }
            }
            tally.leaves += 1;
            Ok(best.expect("sequential scan always available"))
        })
        .collect()
}

fn better(candidate: f64, incumbent: f64, worst: bool) -> bool {
    if worst {
        candidate > incumbent
    } else {
        candidate < incumbent
    }
}

/// Join alternatives for combining `l` and `r`: the backend algorithms when a
/// predicate connects them, else a cross join.
fn alternatives(g: &JoinGraph, caps: &BackendCapabilities, l: TableSet, r: TableSet, tally: &mut Tally) -> Vec<JoinAlgorithm> {
    tally.touched += 2 + g.separating(l, r).count() as u64;
    if g.connects(l, r) {
        caps.join_algorithms()
    } else {
        vec![JoinAlgorithm::Cross]
    }
}

#[derive(Clone, Copy)]
struct Entry {
    cost: f64,
    left: TableSet,
    alg: JoinAlgorithm,
}

fn dynamic_program(
    stats: &QueryStats,
    model: &dyn CostModel,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    worst: bool,
) -> Result<Optimized> {
    let g = stats.graph();
    let n = g.len();
    if n > MAX_DP_TABLES {
        return Err(Error::InvalidArgument(format!(
            "dynamic programming supports at most {MAX_DP_TABLES} tables, query has {n}"
        )));
    }
    let mut tally = Tally::default();
    let leaves = best_leaves(stats, model, caps, catalog, worst, &mut tally)?;
    let full = g.all();
    let mut memo: Vec<Option<Entry>> = vec![None; 1usize << n];
    let cost_of = |memo: &[Option<Entry>], s: TableSet| -> f64 {
        if s.len() == 1 {
            leaves[s.iter().next().unwrap()].cost
        } else {
            memo[s.0 as usize].expect("subsets are solved first").cost
        }
    };
    let mut considered = Vec::new();
    for bits in 1..=full.0 {
        let s = TableSet(bits);
        if s.len() < 2 {
            continue;
        }
        let mut best: Option<Entry> = None;
        for l in s.proper_subsets() {
            let r = s.minus(l);
            tally.splits += 1;
            let base = cost_of(&memo, l) + cost_of(&memo, r);
            for alg in alternatives(g, caps, l, r, &mut tally) {
                let cost = base + model.join(stats, alg, l, r);
                tally.join_op(g, alg, l, r);
                tally.physical += 1;
                tally.physical_join += 1;
                tally.touched += 1;
                if s == full {
                    considered.push(Entry { cost, left: l, alg });
                }
                if best.is_none_or(|b| better(cost, b.cost, worst)) {
                    best = Some(Entry { cost, left: l, alg });
                }
            }
        }
        memo[bits as usize] = best;
    }
    let build = |s: TableSet| build_plan(g, &leaves, &memo, s);
    let plan = build(full);
    let cost = cost_of(&memo, full);
    let considered = if n == 1 {
        vec![plan.clone()]
    } else {
        considered
            .iter()
            .map(|e| join_node(g, e.alg, build(e.left), build(full.minus(e.left)), e.left, full.minus(e.left)))
            .collect()
    };
    Ok(Optimized {
        plan,
        cost,
        counters: tally.counters(),
        considered,
        costed_operators: tally.ops,
    })
}

fn join_node(g: &JoinGraph, alg: JoinAlgorithm, l: PhysicalPlan, r: PhysicalPlan, ls: TableSet, rs: TableSet) -> PhysicalPlan {
    let preds = g.separating(ls, rs).map(|i| g.predicates()[i].clone()).collect();
    PhysicalPlan::join(alg, preds, l, r)
}

fn build_plan(g: &JoinGraph, leaves: &[Leaf], memo: &[Option<Entry>], s: TableSet) -> PhysicalPlan {
    if s.len() == 1 {
        let i = s.iter().next().unwrap();
        return PhysicalPlan::scan(g.tables()[i].name(), leaves[i].access.clone());
    }
    let e = memo[s.0 as usize].expect("solved");
    let r = s.minus(e.left);
    join_node(g, e.alg, build_plan(g, leaves, memo, e.left), build_plan(g, leaves, memo, r), e.left, r)
}

fn greedy(
    stats: &QueryStats,
    model: &dyn CostModel,
    caps: &BackendCapabilities,
    catalog: &Catalog,
) -> Result<Optimized> {
    let g = stats.graph();
    let mut tally = Tally::default();
    let leaves = best_leaves(stats, model, caps, catalog, false, &mut tally)?;
    let scan = |i: usize| PhysicalPlan::scan(g.tables()[i].name(), leaves[i].access.clone());
    let mut considered = Vec::new();
    if g.len() == 1 {
        return Ok(Optimized {
            plan: scan(0),
            cost: leaves[0].cost,
            counters: tally.counters(),
            considered: vec![scan(0)],
            costed_operators: tally.ops,
        });
    }
    // Cheapest two-table join first, in either orientation.
    let pairs: Vec<(usize, usize)> = (0..g.len())
        .flat_map(|i| (0..g.len()).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let linked: Vec<(usize, usize)> = pairs
        .iter()
        .copied()
        .filter(|&(i, j)| g.connects(TableSet::single(i), TableSet::single(j)))
        .collect();
    let pairs = if linked.is_empty() { pairs } else { linked };
    let mut best: Option<(f64, usize, usize, JoinAlgorithm)> = None;
    for (i, j) in pairs {
        let (l, r) = (TableSet::single(i), TableSet::single(j));
        tally.splits += 1;
        for alg in alternatives(g, caps, l, r, &mut tally) {
            let c = leaves[i].cost + leaves[j].cost + model.join(stats, alg, l, r);
            tally.join_op(g, alg, l, r);
            tally.physical += 1;
            tally.physical_join += 1;
            tally.touched += 1;
            if g.len() == 2 {
                considered.push(join_node(g, alg, scan(i), scan(j), l, r));
            }
            if best.is_none_or(|b| c < b.0) {
                best = Some((c, i, j, alg));
            }
        }
    }
    let (mut cost, i, j, alg) = best.expect("at least two tables");
    let (l, r) = (TableSet::single(i), TableSet::single(j));
    let mut plan = join_node(g, alg, scan(i), scan(j), l, r);
    let mut done = l.union(r);
    while done != g.all() {
        let rest = g.all().minus(done);
        let connected: Vec<usize> = rest
            .iter()
            .filter(|&t| g.connects(done, TableSet::single(t)))
            .collect();
        let candidates = if connected.is_empty() { rest.iter().collect() } else { connected };
        let last_step = rest.len() == 1;
        let mut best: Option<(f64, usize, bool, JoinAlgorithm)> = None;
        for t in candidates {
            let ts = TableSet::single(t);
            for table_left in [false, true] {
                let (l, r) = if table_left { (ts, done) } else { (done, ts) };
                tally.splits += 1;
                for alg in alternatives(g, caps, l, r, &mut tally) {
                    let c = cost + leaves[t].cost + model.join(stats, alg, l, r);
                    tally.join_op(g, alg, l, r);
                    tally.physical += 1;
                    tally.physical_join += 1;
                    tally.touched += 1;
                    if last_step {
                        considered.push(attach(g, alg, &plan, scan(t), done, ts, table_left));
                    }
                    if best.is_none_or(|b| c < b.0) {
                        best = Some((c, t, table_left, alg));
                    }
                }
            }
        }
        let (c, t, table_left, alg) = best.expect("remaining tables");
        let ts = TableSet::single(t);
        plan = attach(g, alg, &plan, scan(t), done, ts, table_left);
        cost = c;
        done = done.union(ts);
    }
    Ok(Optimized {
        plan,
        cost,
        counters: tally.counters(),
        considered,
        costed_operators: tally.ops,
    })
}

/// Joins a base table to the tree built so far, on either side.
fn attach(
    g: &JoinGraph,
    alg: JoinAlgorithm,
    tree: &PhysicalPlan,
    table: PhysicalPlan,
    done: TableSet,
    ts: TableSet,
    table_left: bool,
) -> PhysicalPlan {
    if table_left {
        join_node(g, alg, table, tree.clone(), ts, done)
    } else {
        join_node(g, alg, tree.clone(), table, done, ts)
    }
}

fn random(
    stats: &QueryStats,
    model: &dyn CostModel,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    seed: u64,
) -> Result<Optimized> {
    let g = stats.graph();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(g.query_id().as_bytes()));
    let plan = sample_plan(g, caps, catalog, &mut rng)?;
    let cost = super::cost::plan_cost(model, stats, &plan)?;
    let joins = u64::from(g.len() > 1);
    let counters = EfficiencyCounters {
        logical_plans: Some(1),
        join_orderings: Some(joins),
        physical_plans: Some(1),
        physical_join_plans: Some(joins),
        optimization_time: 1.0,
        lower_bound: false,
    };
    Ok(Optimized {
        costed_operators: plan.operator_keys().into_iter().collect(),
        considered: vec![plan.clone()],
        plan,
        cost,
        counters,
    })
}

/// Stable across platforms and compiler versions, unlike `DefaultHasher`.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}
