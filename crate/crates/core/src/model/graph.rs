use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Catalog;

/// A set of table references of one [`JoinGraph`], as a bitmask over their
/// positions in the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TableSet(pub u64);

impl TableSet {
    pub const EMPTY: TableSet = TableSet(0);

    pub fn single(i: usize) -> Self {
        TableSet(1 << i)
    }

    /// All of the first `n` positions.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            TableSet(u64::MAX)
        } else {
            TableSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn union(self, other: Self) -> Self {
        TableSet(self.0 | other.0)
    }

    pub fn minus(self, other: Self) -> Self {
        TableSet(self.0 & !other.0)
    }

    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Non-empty proper subsets, in increasing bitmask order.
    pub fn proper_subsets(self) -> impl Iterator<Item = TableSet> {
        let full = self.0;
        let mut sub = (full.wrapping_sub(1)) & full;
        let mut done = full == 0;
        let mut out = Vec::new();
        while !done {
            if sub == 0 {
                done = true;
            } else {
                out.push(TableSet(sub));
                sub = (sub - 1) & full;
            }
        }
        out.reverse();
        out.into_iter()
    }
}

/// `alias.column`, where the alias identifies a table reference of the graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
}

impl ColumnRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        ColumnRef {
            table: table.into(),
            column: column.into(),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.column)
    }
}

impl TryFrom<String> for ColumnRef {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        match s.split_once('.') {
            Some((t, c)) if !t.is_empty() && !c.is_empty() && !c.contains('.') => {
                Ok(ColumnRef::new(t, c))
            }
            _ => Err(Error::InvalidGraph(format!(
                "column reference `{s}` must have the form table.column"
            ))),
        }
    }
}

impl From<ColumnRef> for String {
    fn from(c: ColumnRef) -> String {
        c.to_string()
    }
}

/// Equi-join condition `left = right`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JoinPredicate {
    pub left: ColumnRef,
    pub right: ColumnRef,
}

impl JoinPredicate {
    pub fn new(left: ColumnRef, right: ColumnRef) -> Self {
        JoinPredicate { left, right }
    }

    /// The column on `table`'s side, if the predicate touches it.
    pub fn column_of(&self, table: &str) -> Option<&ColumnRef> {
        if self.left.table == table {
            Some(&self.left)
        } else if self.right.table == table {
            Some(&self.right)
        } else {
            None
        }
    }
}

impl fmt::Display for JoinPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.left, self.right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<>")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CompareOp {
    pub fn eval(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CompareOp::Eq => lhs == rhs,
            CompareOp::Ne => lhs != rhs,
            CompareOp::Lt => lhs < rhs,
            CompareOp::Le => lhs <= rhs,
            CompareOp::Gt => lhs > rhs,
            CompareOp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "<>",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

/// Single-table filter `table.column <op> value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Selection {
    pub table: String,
    pub column: String,
    pub op: CompareOp,
    pub value: i64,
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{} {} {}",
            self.table,
            self.column,
            self.op.symbol(),
            self.value
        )
    }
}

/// A table occurrence in a query. Self-joins need distinct aliases.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableRef {
    pub table: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alias: Option<String>,
}

impl TableRef {
    pub fn new(table: impl Into<String>) -> Self {
        TableRef {
            table: table.into(),
            alias: None,
        }
    }

    pub fn aliased(table: impl Into<String>, alias: impl Into<String>) -> Self {
        TableRef {
            table: table.into(),
            alias: Some(alias.into()),
        }
    }

    /// Identifier of the reference inside the query.
    pub fn name(&self) -> &str {
        self.alias.as_deref().unwrap_or(&self.table)
    }
}

/// A flat select-project-join query: table references, equi-join predicates
/// and per-table filters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDef")]
pub struct JoinGraph {
    query_id: String,
    tables: Vec<TableRef>,
    predicates: Vec<JoinPredicate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    selections: Vec<Selection>,
    #[serde(skip)]
    endpoints: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
struct GraphDef {
    query_id: String,
    tables: Vec<TableRef>,
    #[serde(default)]
    predicates: Vec<JoinPredicate>,
    #[serde(default)]
    selections: Vec<Selection>,
}

impl TryFrom<GraphDef> for JoinGraph {
    type Error = Error;

    fn try_from(d: GraphDef) -> Result<Self> {
        JoinGraph::new(d.query_id, d.tables, d.predicates, d.selections)
    }
}

impl JoinGraph {
    pub const MAX_TABLES: usize = 64;

    pub fn new(
        query_id: impl Into<String>,
        tables: Vec<TableRef>,
        predicates: Vec<JoinPredicate>,
        selections: Vec<Selection>,
    ) -> Result<Self> {
        let query_id = query_id.into();
        if tables.is_empty() {
            return Err(Error::InvalidGraph(format!("query `{query_id}` has no tables")));
        }
        if tables.len() > Self::MAX_TABLES {
            return Err(Error::InvalidGraph(format!(
                "query `{query_id}` has {} tables; at most {} are supported",
                tables.len(),
                Self::MAX_TABLES
            )));
        }
        let mut seen = HashSet::new();
        for t in &tables {
            if !seen.insert(t.name()) {
                return Err(Error::InvalidGraph(format!(
                    "table reference `{}` appears twice in `{query_id}`; self-joins need aliases",
                    t.name()
                )));
            }
        }
        let position = |name: &str| tables.iter().position(|t| t.name() == name);
        let mut endpoints = Vec::with_capacity(predicates.len());
        for p in &predicates {
            let (Some(l), Some(r)) = (position(&p.left.table), position(&p.right.table)) else {
                return Err(Error::InvalidGraph(format!(
                    "predicate `{p}` references a table not in `{query_id}`"
                )));
            };
            if l == r {
                return Err(Error::InvalidGraph(format!(
                    "predicate `{p}` must join two distinct tables"
                )));
            }
            endpoints.push((l, r));
        }
        for s in &selections {
            if position(&s.table).is_none() {
                return Err(Error::InvalidGraph(format!(
                    "selection `{s}` references a table not in `{query_id}`"
                )));
            }
        }
        Ok(JoinGraph {
            query_id,
            tables,
            predicates,
            selections,
            endpoints,
        })
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn tables(&self) -> &[TableRef] {
        &self.tables
    }

    pub fn predicates(&self) -> &[JoinPredicate] {
        &self.predicates
    }

    pub fn selections(&self) -> &[Selection] {
        &self.selections
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn all(&self) -> TableSet {
        TableSet::full(self.tables.len())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.name() == name)
    }

    pub fn table_ref(&self, name: &str) -> Option<&TableRef> {
        self.tables.iter().find(|t| t.name() == name)
    }

    /// Bitmask of the named references; unknown names are an error.
    pub fn table_set<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<TableSet> {
        let mut set = TableSet::EMPTY;
        for n in names {
            let i = self.position(n).ok_or_else(|| {
                Error::InvalidArgument(format!("`{n}` is not a table of `{}`", self.query_id))
            })?;
            set = set.union(TableSet::single(i));
        }
        Ok(set)
    }

    pub fn names(&self, set: TableSet) -> Vec<&str> {
        set.iter().map(|i| self.tables[i].name()).collect()
    }

    /// Positions (into `tables()`) of the two endpoints of predicate `i`.
    pub fn endpoints(&self, i: usize) -> (usize, usize) {
        self.endpoints[i]
    }

    /// Predicates with one endpoint in `left` and the other in `right`.
    /// An empty result means the two sides can only be combined by a cross join.
    pub fn predicates_between(&self, left: TableSet, right: TableSet) -> Result<Vec<&JoinPredicate>> {
        if left.intersects(right) {
            return Err(Error::InvalidArgument(
                "table sets passed to predicates_between overlap".into(),
            ));
        }
        if !left.union(right).is_subset_of(self.all()) {
            return Err(Error::InvalidArgument("table set outside the query".into()));
        }
        Ok(self.separating(left, right).map(|i| &self.predicates[i]).collect())
    }

    pub(crate) fn separating(&self, left: TableSet, right: TableSet) -> impl Iterator<Item = usize> + '_ {
        self.endpoints.iter().enumerate().filter_map(move |(i, &(a, b))| {
            let crosses = (left.contains(a) && right.contains(b)) || (left.contains(b) && right.contains(a));
            crosses.then_some(i)
        })
    }

    pub(crate) fn connects(&self, left: TableSet, right: TableSet) -> bool {
        self.separating(left, right).next().is_some()
    }

    /// Whether the predicates restricted to `set` connect all of its tables.
    pub fn is_connected(&self, set: TableSet) -> bool {
        let Some(start) = set.iter().next() else {
            return true;
        };
        let mut reached = TableSet::single(start);
        loop {
            let mut grown = reached;
            for &(a, b) in &self.endpoints {
                if set.contains(a) && set.contains(b) {
                    if reached.contains(a) {
                        grown = grown.union(TableSet::single(b));
                    }
                    if reached.contains(b) {
                        grown = grown.union(TableSet::single(a));
                    }
                }
            }
            if grown == reached {
                return reached == set;
            }
            reached = grown;
        }
    }

    /// Selections on the reference at position `i`.
    pub fn selections_on(&self, i: usize) -> impl Iterator<Item = &Selection> {
        let name = self.tables[i].name();
        self.selections.iter().filter(move |s| s.table == name)
    }

    /// Checks table and column names against the catalog.
    pub fn check_against(&self, catalog: &Catalog) -> Result<()> {
        let column_ok = |alias: &str, column: &str| -> Result<()> {
            let tref = self.table_ref(alias).expect("validated on construction");
            let info = catalog.table(&tref.table).ok_or_else(|| {
                Error::InvalidGraph(format!("table `{}` is not in the catalog", tref.table))
            })?;
            if info.has_column(column) {
                Ok(())
            } else {
                Err(Error::InvalidGraph(format!(
                    "column `{column}` does not exist on `{}`",
                    tref.table
                )))
            }
        };
        for t in &self.tables {
            if catalog.table(&t.table).is_none() {
                return Err(Error::InvalidGraph(format!(
                    "table `{}` is not in the catalog",
                    t.table
                )));
            }
        }
        for p in &self.predicates {
            column_ok(&p.left.table, &p.left.column)?;
            column_ok(&p.right.table, &p.right.column)?;
        }
        for s in &self.selections {
            column_ok(&s.table, &s.column)?;
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Reads either a single query object or an array of queries.
    pub fn load_all(path: impl AsRef<std::path::Path>) -> Result<Vec<JoinGraph>> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if value.is_array() {
            Ok(serde_json::from_value(value)?)
        } else {
            Ok(vec![serde_json::from_value(value)?])
        }
    }
}
