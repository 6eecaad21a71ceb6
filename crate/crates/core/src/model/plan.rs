use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{JoinGraph, JoinPredicate, JoinTree, Shape, TableSet};

/// Physical join operator. `Cross` is never a backend capability; it is
/// forced wherever the two inputs share no predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JoinAlgorithm {
    NestedLoop,
    Hash,
    Merge,
    Cross,
}

impl JoinAlgorithm {
    pub const PHYSICAL: [JoinAlgorithm; 3] = [
        JoinAlgorithm::NestedLoop,
        JoinAlgorithm::Hash,
        JoinAlgorithm::Merge,
    ];

    /// Two-letter code used in plan fingerprints.
    pub fn code(self) -> &'static str {
        match self {
            JoinAlgorithm::NestedLoop => "NL",
            JoinAlgorithm::Hash => "HJ",
            JoinAlgorithm::Merge => "MJ",
            JoinAlgorithm::Cross => "CJ",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nested_loop" | "nestedloop" | "loop" | "nl" => Ok(JoinAlgorithm::NestedLoop),
            "hash" | "hj" => Ok(JoinAlgorithm::Hash),
            "merge" | "mj" => Ok(JoinAlgorithm::Merge),
            "cross" | "cj" => Ok(JoinAlgorithm::Cross),
            other => Err(Error::InvalidArgument(format!("unknown join algorithm `{other}`"))),
        }
    }
}

impl fmt::Display for JoinAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JoinAlgorithm::NestedLoop => "nested_loop",
            JoinAlgorithm::Hash => "hash",
            JoinAlgorithm::Merge => "merge",
            JoinAlgorithm::Cross => "cross",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessMethod {
    SequentialScan,
    IndexScan(String),
}

/// What a backend's execution engine can run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CapabilitiesDef")]
pub struct BackendCapabilities {
    join_algorithms: BTreeSet<JoinAlgorithm>,
    supports_index_scan: bool,
}

#[derive(Deserialize)]
struct CapabilitiesDef {
    join_algorithms: BTreeSet<JoinAlgorithm>,
    #[serde(default)]
    supports_index_scan: bool,
}

impl TryFrom<CapabilitiesDef> for BackendCapabilities {
    type Error = Error;

    fn try_from(d: CapabilitiesDef) -> Result<Self> {
        BackendCapabilities::new(d.join_algorithms, d.supports_index_scan)
    }
}

impl BackendCapabilities {
    pub fn new(
        join_algorithms: impl IntoIterator<Item = JoinAlgorithm>,
        supports_index_scan: bool,
    ) -> Result<Self> {
        let join_algorithms: BTreeSet<_> = join_algorithms.into_iter().collect();
        if join_algorithms.is_empty() {
            return Err(Error::InvalidArgument(
                "a backend must support at least one join algorithm".into(),
            ));
        }
        if join_algorithms.contains(&JoinAlgorithm::Cross) {
            return Err(Error::InvalidArgument(
                "cross join is implicit and cannot be listed as a capability".into(),
            ));
        }
        Ok(BackendCapabilities {
            join_algorithms,
            supports_index_scan,
        })
    }

    /// Join algorithms in a fixed order; sampling draws from this list.
    pub fn join_algorithms(&self) -> Vec<JoinAlgorithm> {
        self.join_algorithms.iter().copied().collect()
    }

    pub fn supports(&self, alg: JoinAlgorithm) -> bool {
        alg == JoinAlgorithm::Cross || self.join_algorithms.contains(&alg)
    }

    pub fn supports_index_scan(&self) -> bool {
        self.supports_index_scan
    }
}

impl Default for BackendCapabilities {
    fn default() -> Self {
        BackendCapabilities::new(JoinAlgorithm::PHYSICAL, true).expect("non-empty")
    }
}

/// Key of a join operator over two table sets, e.g. `HJ(A,B|C)`. Names are
/// sorted within each side; the sides keep their order.
pub fn operator_key(algorithm: JoinAlgorithm, left: &[&str], right: &[&str]) -> String {
    let side = |names: &[&str]| {
        let mut v = names.to_vec();
        v.sort_unstable();
        v.join(",")
    };
    format!("{}({}|{})", algorithm.code(), side(left), side(right))
}

/// Canonical plan identity: tree shape, leaf tables, per-node algorithm and
/// per-leaf access method. Child order is significant.
///
/// Grammar: `A` (sequential scan), `A@idx` (index scan), `HJ(l,r)`, `MJ(l,r)`,
/// `NL(l,r)`, `CJ(l,r)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlanFingerprint(pub String);

impl fmt::Display for PlanFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Binary operator tree with a join algorithm on every internal node and an
/// access method on every leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PhysicalPlan {
    Scan {
        table: String,
        access: AccessMethod,
    },
    Join {
        algorithm: JoinAlgorithm,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        predicates: Vec<JoinPredicate>,
        left: Box<PhysicalPlan>,
        right: Box<PhysicalPlan>,
    },
}

impl PhysicalPlan {
    pub fn scan(table: impl Into<String>, access: AccessMethod) -> Self {
        PhysicalPlan::Scan {
            table: table.into(),
            access,
        }
    }

    pub fn seq(table: impl Into<String>) -> Self {
        Self::scan(table, AccessMethod::SequentialScan)
    }

    pub fn join(
        algorithm: JoinAlgorithm,
        predicates: Vec<JoinPredicate>,
        left: PhysicalPlan,
        right: PhysicalPlan,
    ) -> Self {
        PhysicalPlan::Join {
            algorithm,
            predicates,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Builds a plan over `tree`, attaching to each node the predicates that
    /// separate its two subtrees. Nodes without such predicates become cross
    /// joins; the others get the algorithm `pick` returns. Leaves get the
    /// access method returned by `access`. Callbacks run in preorder.
    pub fn from_tree(
        tree: &JoinTree,
        graph: &JoinGraph,
        pick: &mut dyn FnMut() -> JoinAlgorithm,
        access: &mut dyn FnMut(&str) -> AccessMethod,
    ) -> Result<Self> {
        Ok(Self::build(tree, graph, pick, access)?.0)
    }

    fn build(
        tree: &JoinTree,
        graph: &JoinGraph,
        pick: &mut dyn FnMut() -> JoinAlgorithm,
        access: &mut dyn FnMut(&str) -> AccessMethod,
    ) -> Result<(Self, TableSet)> {
        match tree {
            JoinTree::Leaf(name) => {
                let i = graph.position(name).ok_or_else(|| {
                    Error::InvalidArgument(format!("`{name}` is not a table of `{}`", graph.query_id()))
                })?;
                Ok((Self::scan(name.clone(), access(name)), TableSet::single(i)))
            }
            JoinTree::Join(l, r) => {
                let (lset, rset) = (set_of(l, graph)?, set_of(r, graph)?);
                let predicates: Vec<JoinPredicate> =
                    graph.predicates_between(lset, rset)?.into_iter().cloned().collect();
                let algorithm = if predicates.is_empty() {
                    JoinAlgorithm::Cross
                } else {
                    pick()
                };
                let (left, _) = Self::build(l, graph, pick, access)?;
                let (right, _) = Self::build(r, graph, pick, access)?;
                Ok((Self::join(algorithm, predicates, left, right), lset.union(rset)))
            }
        }
    }

    pub fn is_join(&self) -> bool {
        matches!(self, PhysicalPlan::Join { .. })
    }

    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let PhysicalPlan::Scan { table, .. } = n {
                out.push(table.as_str());
            }
        });
        out
    }

    /// Preorder traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a PhysicalPlan)) {
        f(self);
        if let PhysicalPlan::Join { left, right, .. } = self {
            left.walk(f);
            right.walk(f);
        }
    }

    /// One key per operator: the leaf fingerprint for scans and
    /// [`operator_key`] for joins. Two plans share a key when they apply
    /// the same operator to the same pair of table sets.
    pub fn operator_keys(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |n| match n {
            PhysicalPlan::Scan { .. } => out.push(n.fingerprint().0),
            PhysicalPlan::Join {
                algorithm, left, right, ..
            } => out.push(operator_key(*algorithm, &left.leaves(), &right.leaves())),
        });
        out
    }

    pub fn internal_nodes(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |p| n += p.is_join() as usize);
        n
    }

    /// Leaf table set, resolved against `graph`. Unknown leaves are an error.
    pub fn table_set(&self, graph: &JoinGraph) -> Result<TableSet> {
        graph.table_set(self.leaves())
    }

    pub fn join_tree(&self) -> JoinTree {
        match self {
            PhysicalPlan::Scan { table, .. } => JoinTree::leaf(table.clone()),
            PhysicalPlan::Join { left, right, .. } => JoinTree::join(left.join_tree(), right.join_tree()),
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            PhysicalPlan::Scan { .. } => Shape::Leaf,
            PhysicalPlan::Join { left, right, .. } => Shape::join(left.shape(), right.shape()),
        }
    }

    pub fn fingerprint(&self) -> PlanFingerprint {
        let mut s = String::new();
        self.write_key(&mut s, KeyKind::Physical);
        PlanFingerprint(s)
    }

    /// Identity after erasing join algorithms and access methods; predicate
    /// placement is kept.
    pub fn logical_key(&self) -> String {
        let mut s = String::new();
        self.write_key(&mut s, KeyKind::Logical);
        s
    }

    /// Identity of the join structure alone: shape plus leaf order.
    pub fn ordering_key(&self) -> String {
        let mut s = String::new();
        self.write_key(&mut s, KeyKind::Ordering);
        s
    }

    fn write_key(&self, out: &mut String, kind: KeyKind) {
        match self {
            PhysicalPlan::Scan { table, access } => {
                out.push_str(table);
                if let (KeyKind::Physical, AccessMethod::IndexScan(i)) = (kind, access) {
                    out.push('@');
                    out.push_str(i);
                }
            }
            PhysicalPlan::Join {
                algorithm,
                predicates,
                left,
                right,
            } => {
                match kind {
                    KeyKind::Physical => out.push_str(algorithm.code()),
                    KeyKind::Logical | KeyKind::Ordering => out.push('J'),
                }
                out.push('(');
                left.write_key(out, kind);
                out.push(',');
                right.write_key(out, kind);
                out.push(')');
                if kind == KeyKind::Logical {
                    let mut preds: Vec<String> = predicates.iter().map(canonical_predicate).collect();
                    preds.sort();
                    out.push('[');
                    out.push_str(&preds.join(";"));
                    out.push(']');
                }
            }
        }
    }
}

fn canonical_predicate(p: &JoinPredicate) -> String {
    let (a, b) = (p.left.to_string(), p.right.to_string());
    if a <= b {
        format!("{a}={b}")
    } else {
        format!("{b}={a}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeyKind {
    Physical,
    Logical,
    Ordering,
}

fn set_of(tree: &JoinTree, graph: &JoinGraph) -> Result<TableSet> {
    graph.table_set(tree.leaves())
}

impl fmt::Display for PhysicalPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fingerprint().0)
    }
}
