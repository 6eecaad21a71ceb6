//! Random micro-queries with seeded data.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{ColumnDistribution, Database, GeneratorConfig};
use crate::error::{Error, Result};
use crate::model::{
    Catalog, ColumnRef, CompareOp, IndexInfo, JoinGraph, JoinPredicate, Selection, TableInfo, TableRef,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryShape {
    Chain,
    Star,
    Clique,
}

impl fmt::Display for QueryShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryShape::Chain => "chain",
            QueryShape::Star => "star",
            QueryShape::Clique => "clique",
        })
    }
}

impl FromStr for QueryShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(QueryShape::Chain),
            "star" => Ok(QueryShape::Star),
            "clique" => Ok(QueryShape::Clique),
            _ => Err(Error::InvalidArgument(format!("unknown query shape `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub min_rows: u64,
    pub max_rows: u64,
    /// Join column values are drawn from `0..d` with `d` in this range.
    pub min_domain: u64,
    pub max_domain: u64,
    /// Build an index on every join column.
    pub indexes: bool,
    /// Chance of a range filter on each table.
    pub selection_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            min_rows: 16,
            max_rows: 64,
            min_domain: 8,
            max_domain: 32,
            indexes: true,
            selection_rate: 0.0,
        }
    }
}

/// A query with its own database. Tables are `T0..Tn`, each with join columns
/// `a` and `b` and a payload column `v`.
pub struct SyntheticQuery {
    pub graph: JoinGraph,
    pub db: Arc<Database>,
}

impl SyntheticQuery {
    pub fn catalog(&self) -> &Catalog {
        self.db.catalog()
    }
}

pub fn synthetic_query(
    query_id: impl Into<String>,
    tables: usize,
    shape: QueryShape,
    config: &SynthConfig,
    seed: u64,
) -> Result<SyntheticQuery> {
    if tables == 0 {
        return Err(Error::InvalidArgument("a query needs at least one table".into()));
    }
    if config.min_rows > config.max_rows || config.min_domain > config.max_domain || config.min_domain == 0 {
        return Err(Error::InvalidArgument("empty row or domain range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..tables).map(|i| format!("T{i}")).collect();
    let mut infos = Vec::new();
    let mut columns = BTreeMap::new();
    for name in &names {
        let indexes = if config.indexes {
            ["a", "b"]
                .iter()
                .map(|c| IndexInfo {
                    name: format!("{name}_{c}"),
                    table: name.clone(),
                    column: c.to_string(),
                })
                .collect()
        } else {
            vec![]
        };
        infos.push(TableInfo {
            name: name.clone(),
            columns: vec!["a".into(), "b".into(), "v".into()],
            row_count: rng.random_range(config.min_rows..=config.max_rows),
            indexes,
        });
        for c in ["a", "b"] {
            let domain = rng.random_range(config.min_domain..=config.max_domain);
            columns.insert(
                format!("{name}.{c}"),
                ColumnDistribution::Uniform { domain: Some(domain) },
            );
        }
    }
    let pred = |l: usize, lc: &str, r: usize, rc: &str| {
        JoinPredicate::new(ColumnRef::new(&names[l], lc), ColumnRef::new(&names[r], rc))
    };
    let predicates = match shape {
        QueryShape::Chain => (1..tables).map(|i| pred(i - 1, "b", i, "a")).collect(),
        QueryShape::Star => (1..tables).map(|i| pred(0, "a", i, "a")).collect(),
        QueryShape::Clique => (0..tables)
            .flat_map(|i| (i + 1..tables).map(move |j| (i, j)))
            .map(|(i, j)| pred(i, "a", j, "a"))
            .collect(),
    };
    let mut selections = Vec::new();
    for name in &names {
        if rng.random_bool(config.selection_rate.clamp(0.0, 1.0)) {
            selections.push(Selection {
                table: name.clone(),
                column: "v".into(),
                op: CompareOp::Lt,
                value: rng.random_range(1..=config.max_rows as i64),
            });
        }
    }
    let catalog = Catalog::new(infos)?;
    let gen = GeneratorConfig {
        seed: rng.random(),
        default_distribution: ColumnDistribution::default(),
        columns,
    };
    let db = Database::generate(catalog, &gen)?;
    let graph = JoinGraph::new(
        query_id,
        names.iter().map(TableRef::new).collect(),
        predicates,
        selections,
    )?;
    graph.check_against(db.catalog())?;
    Ok(SyntheticQuery {
        graph,
        db: Arc::new(db),
    })
}
