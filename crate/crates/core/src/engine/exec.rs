use std::collections::HashMap;
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::data::Database;
use super::work;
use crate::error::{Error, Result};
use crate::model::{AccessMethod, ColumnRef, CompareOp, JoinAlgorithm, JoinGraph, JoinPredicate, PhysicalPlan};

/// Intermediate result: qualified columns plus rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rows {
    pub schema: Vec<ColumnRef>,
    pub data: Vec<Vec<i64>>,
}

impl Rows {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn position(&self, col: &ColumnRef) -> Option<usize> {
        self.schema.iter().position(|c| c == col)
    }

    /// Order-independent digest of the row multiset. Columns are read in
    /// sorted name order, so plans with different join orders agree.
    pub fn digest(&self) -> ResultDigest {
        let mut order: Vec<usize> = (0..self.schema.len()).collect();
        order.sort_by(|&a, &b| self.schema[a].cmp(&self.schema[b]));
        let mut d = ResultDigest {
            rows: self.data.len() as u64,
            sum: 0,
            sum_sq: 0,
        };
        for row in &self.data {
            let mut h = DefaultHasher::new();
            for &i in &order {
                row[i].hash(&mut h);
            }
            let h = h.finish();
            d.sum = d.sum.wrapping_add(h);
            d.sum_sq = d.sum_sq.wrapping_add(h.wrapping_mul(h));
        }
        d
    }
}

/// Row count plus wrapping sums of per-row hashes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResultDigest {
    pub rows: u64,
    pub sum: u64,
    pub sum_sq: u64,
}

impl fmt::Display for ResultDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:016x}{:016x}", self.rows, self.sum, self.sum_sq)
    }
}

/// Counters gathered while running a plan.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecStats {
    /// Total work units; the runtime of the plan.
    pub work: u64,
    /// Tuple pairs compared by nested-loop joins.
    pub comparisons: u64,
    /// Base-table rows read by scans.
    pub rows_read: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub rows: Rows,
    pub digest: ResultDigest,
    pub stats: ExecStats,
}

impl Execution {
    pub fn work(&self) -> u64 {
        self.stats.work
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Completed(Execution),
    /// Aborted once the work charged so far exceeded the budget.
    OverBudget { work: u64 },
}

/// Runs `plan` to completion.
pub fn execute_plan(plan: &PhysicalPlan, graph: &JoinGraph, db: &Database) -> Result<Execution> {
    match execute_with_budget(plan, graph, db, None)? {
        Outcome::Completed(e) => Ok(e),
        Outcome::OverBudget { .. } => unreachable!("no budget"),
    }
}

/// Runs `plan`, aborting when the work exceeds `budget`. Operators check the
/// budget before producing their output, so an aborted run never
/// materializes more than `budget` rows.
pub fn execute_with_budget(
    plan: &PhysicalPlan,
    graph: &JoinGraph,
    db: &Database,
    budget: Option<u64>,
) -> Result<Outcome> {
    let mut ex = Executor {
        graph,
        db,
        budget,
        stats: ExecStats::default(),
    };
    match ex.run(plan)? {
        Some(rows) => Ok(Outcome::Completed(Execution {
            digest: rows.digest(),
            rows,
            stats: ex.stats,
        })),
        None => Ok(Outcome::OverBudget { work: ex.stats.work }),
    }
}

struct Executor<'a> {
    graph: &'a JoinGraph,
    db: &'a Database,
    budget: Option<u64>,
    stats: ExecStats,
}

impl Executor<'_> {
    /// Adds `units`; false once over budget.
    fn charge(&mut self, units: u64) -> bool {
        self.stats.work = self.stats.work.saturating_add(units);
        self.budget.is_none_or(|b| self.stats.work <= b)
    }

    fn run(&mut self, plan: &PhysicalPlan) -> Result<Option<Rows>> {
        match plan {
            PhysicalPlan::Scan { table, access } => {
                let pos = self.graph.position(table).ok_or_else(|| {
                    Error::Execution(format!("`{table}` is not part of `{}`", self.graph.query_id()))
                })?;
                let scan = scan_leaf(self.graph, self.db, pos, access)?;
                self.stats.rows_read += scan.read;
                Ok(self.charge(scan.work).then_some(scan.rows))
            }
            PhysicalPlan::Join {
                algorithm,
                predicates,
                left,
                right,
            } => {
                let Some(l) = self.run(left)? else {
                    return Ok(None);
                };
                let Some(r) = self.run(right)? else {
                    return Ok(None);
                };
                self.join(*algorithm, predicates, l, r)
            }
        }
    }

    fn join(&mut self, alg: JoinAlgorithm, preds: &[JoinPredicate], l: Rows, r: Rows) -> Result<Option<Rows>> {
        let (lk, rk) = key_positions(preds, &l, &r)?;
        if alg != JoinAlgorithm::Cross && preds.is_empty() {
            return Err(Error::Execution(format!("{alg} join without predicates")));
        }
        let (ln, rn) = (l.len() as u64, r.len() as u64);
        let schema: Vec<ColumnRef> = l.schema.iter().chain(&r.schema).cloned().collect();
        let concat = |a: &[i64], b: &[i64]| a.iter().chain(b).copied().collect::<Vec<i64>>();
        let pairs: Vec<(usize, usize)> = match alg {
            JoinAlgorithm::Cross | JoinAlgorithm::NestedLoop => {
                if !self.charge(work::join_before_output(alg, ln, rn)) {
                    return Ok(None);
                }
                if alg == JoinAlgorithm::NestedLoop {
                    self.stats.comparisons += ln * rn;
                }
                let mut out = Vec::new();
                for (i, a) in l.data.iter().enumerate() {
                    for (j, b) in r.data.iter().enumerate() {
                        if keys_match(a, &lk, b, &rk) {
                            out.push((i, j));
                        }
                    }
                }
                out
            }
            JoinAlgorithm::Hash => {
                let mut table: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
                for (j, b) in r.data.iter().enumerate() {
                    table.entry(key(b, &rk)).or_default().push(j);
                }
                let out_n: u64 = l
                    .data
                    .iter()
                    .map(|a| table.get(&key(a, &lk)).map_or(0, |v| v.len() as u64))
                    .sum();
                if !self.charge(work::join(alg, ln, rn, out_n)) {
                    return Ok(None);
                }
                let mut out = Vec::with_capacity(out_n as usize);
                for (i, a) in l.data.iter().enumerate() {
                    if let Some(js) = table.get(&key(a, &lk)) {
                        out.extend(js.iter().map(|&j| (i, j)));
                    }
                }
                out
            }
            JoinAlgorithm::Merge => {
                let mut li: Vec<(Vec<i64>, usize)> = l.data.iter().enumerate().map(|(i, a)| (key(a, &lk), i)).collect();
                let mut ri: Vec<(Vec<i64>, usize)> = r.data.iter().enumerate().map(|(j, b)| (key(b, &rk), j)).collect();
                li.sort();
                ri.sort();
                let groups = merge_groups(&li, &ri);
                let out_n: u64 = groups.iter().map(|(a, b)| (a.len() * b.len()) as u64).sum();
                if !self.charge(work::join(alg, ln, rn, out_n)) {
                    return Ok(None);
                }
                let mut out = Vec::with_capacity(out_n as usize);
                for (a, b) in groups {
                    for (_, i) in a {
                        out.extend(b.iter().map(|(_, j)| (*i, *j)));
                    }
                }
                out
            }
        };
        let data = pairs.into_iter().map(|(i, j)| concat(&l.data[i], &r.data[j])).collect();
        Ok(Some(Rows { schema, data }))
    }
}

type Keyed = (Vec<i64>, usize);

fn merge_groups<'a>(li: &'a [Keyed], ri: &'a [Keyed]) -> Vec<(&'a [Keyed], &'a [Keyed])> {
    let (mut a, mut b) = (0, 0);
    let mut out = Vec::new();
    while a < li.len() && b < ri.len() {
        match li[a].0.cmp(&ri[b].0) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                let k = &li[a].0;
                let a_end = a + li[a..].iter().take_while(|x| &x.0 == k).count();
                let b_end = b + ri[b..].iter().take_while(|x| &x.0 == k).count();
                out.push((&li[a..a_end], &ri[b..b_end]));
                a = a_end;
                b = b_end;
            }
        }
    }
    out
}

fn key(row: &[i64], pos: &[usize]) -> Vec<i64> {
    pos.iter().map(|&p| row[p]).collect()
}

fn keys_match(a: &[i64], lk: &[usize], b: &[i64], rk: &[usize]) -> bool {
    lk.iter().zip(rk).all(|(&x, &y)| a[x] == b[y])
}

/// For each predicate, the column position on the left and on the right input.
fn key_positions(preds: &[JoinPredicate], l: &Rows, r: &Rows) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut lk = Vec::with_capacity(preds.len());
    let mut rk = Vec::with_capacity(preds.len());
    for p in preds {
        let (a, b) = match (l.position(&p.left), r.position(&p.right)) {
            (Some(a), Some(b)) => (a, b),
            _ => match (l.position(&p.right), r.position(&p.left)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Execution(format!("predicate {p} does not separate the join inputs"))),
            },
        };
        lk.push(a);
        rk.push(b);
    }
    Ok((lk, rk))
}

/// Rows and charge of one leaf access.
pub(crate) struct LeafScan {
    pub rows: Rows,
    pub work: u64,
    pub read: u64,
}

/// Scans the table reference at `pos` and applies its filters. An index scan
/// probes the index when the query has an equality filter on the indexed
/// column and walks the whole index otherwise.
pub(crate) fn scan_leaf(graph: &JoinGraph, db: &Database, pos: usize, access: &AccessMethod) -> Result<LeafScan> {
    let tref = &graph.tables()[pos];
    let name = tref.name();
    let rel = db
        .relation(&tref.table)
        .ok_or_else(|| Error::Execution(format!("table `{}` is not loaded", tref.table)))?;
    let col_pos = |c: &str| {
        rel.columns
            .iter()
            .position(|x| x == c)
            .ok_or_else(|| Error::Execution(format!("table `{}` has no column `{c}`", tref.table)))
    };
    let filters = graph
        .selections_on(pos)
        .map(|s| Ok((col_pos(&s.column)?, s.op, s.value)))
        .collect::<Result<Vec<_>>>()?;
    let base = rel.len() as u64;
    let (candidates, work, read): (Vec<usize>, u64, u64) = match access {
        AccessMethod::SequentialScan => ((0..rel.len()).collect(), work::seq_scan(base), base),
        AccessMethod::IndexScan(index) => {
            let info = db
                .catalog()
                .table(&tref.table)
                .and_then(|t| t.index(index))
                .ok_or_else(|| Error::Execution(format!("no index `{index}` on `{}`", tref.table)))?;
            let map = db
                .index(&tref.table, index)
                .ok_or_else(|| Error::Execution(format!("index `{index}` is not built")))?;
            let probe = graph
                .selections_on(pos)
                .find(|s| s.column == info.column && s.op == CompareOp::Eq)
                .map(|s| s.value);
            match probe {
                Some(v) => {
                    let hits = map.get(&v).cloned().unwrap_or_default();
                    let m = hits.len() as u64;
                    (hits, work::index_probe(m), m)
                }
                None => (
                    map.values().flatten().copied().collect(),
                    work::index_walk(base),
                    base,
                ),
            }
        }
    };
    let data = candidates
        .into_iter()
        .map(|i| &rel.rows[i])
        .filter(|row| filters.iter().all(|&(c, op, v)| op.eval(row[c], v)))
        .cloned()
        .collect();
    let schema = rel.columns.iter().map(|c| ColumnRef::new(name, c.as_str())).collect();
    Ok(LeafScan {
        rows: Rows { schema, data },
        work,
        read,
    })
}
