use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Catalog;

/// A base table's rows. All values are 64-bit integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<i64>>,
}

impl Relation {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<i64>>) -> Result<Self> {
        if let Some(bad) = rows.iter().position(|r| r.len() != columns.len()) {
            return Err(Error::InvalidArgument(format!(
                "row {bad} has {} values but the schema has {} columns",
                rows[bad].len(),
                columns.len()
            )));
        }
        Ok(Relation { columns, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Value -> row positions, ordered by value.
pub type HashIndex = BTreeMap<i64, Vec<usize>>;

/// Loaded tables plus a prebuilt index for every catalog index.
#[derive(Debug, Clone)]
pub struct Database {
    catalog: Catalog,
    relations: BTreeMap<String, Relation>,
    indexes: BTreeMap<(String, String), HashIndex>,
}

impl Database {
    /// Every catalog table needs a relation with the same columns and row
    /// count.
    pub fn new(catalog: Catalog, relations: BTreeMap<String, Relation>) -> Result<Self> {
        let mut indexes = BTreeMap::new();
        for t in catalog.tables() {
            let rel = relations
                .get(&t.name)
                .ok_or_else(|| Error::InvalidArgument(format!("no data for table `{}`", t.name)))?;
            if rel.columns != t.columns {
                return Err(Error::InvalidArgument(format!(
                    "columns of `{}` do not match the catalog",
                    t.name
                )));
            }
            if rel.len() as u64 != t.row_count {
                return Err(Error::InvalidArgument(format!(
                    "`{}` has {} rows but the catalog says {}",
                    t.name,
                    rel.len(),
                    t.row_count
                )));
            }
            for idx in &t.indexes {
                let col = t.column_position(&idx.column).expect("catalog validated");
                let mut map = HashIndex::new();
                for (pos, row) in rel.rows.iter().enumerate() {
                    map.entry(row[col]).or_default().push(pos);
                }
                indexes.insert((t.name.clone(), idx.name.clone()), map);
            }
        }
        Ok(Database {
            catalog,
            relations,
            indexes,
        })
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn relation(&self, table: &str) -> Option<&Relation> {
        self.relations.get(table)
    }

    pub fn index(&self, table: &str, index: &str) -> Option<&HashIndex> {
        self.indexes.get(&(table.to_string(), index.to_string()))
    }

    /// Synthetic data for every catalog table.
    pub fn generate(catalog: Catalog, config: &GeneratorConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut relations = BTreeMap::new();
        for t in catalog.tables() {
            let dists: Vec<ColumnDistribution> = t
                .columns
                .iter()
                .map(|c| {
                    config
                        .columns
                        .get(&format!("{}.{c}", t.name))
                        .copied()
                        .unwrap_or(config.default_distribution)
                })
                .collect();
            let rows = (0..t.row_count)
                .map(|_| {
                    dists
                        .iter()
                        .map(|d| d.sample(t.row_count, &mut rng))
                        .collect::<Result<Vec<i64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            relations.insert(t.name.clone(), Relation::new(t.columns.clone(), rows)?);
        }
        Database::new(catalog, relations)
    }

    /// Reads `<dir>/<table>.csv` for every catalog table. The header row must
    /// list the catalog columns in order.
    pub fn load_csv_dir(catalog: Catalog, dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut relations = BTreeMap::new();
        for t in catalog.tables() {
            let path = dir.join(format!("{}.csv", t.name));
            let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            let mut reader = csv::Reader::from_reader(file);
            let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
            let mut rows = Vec::new();
            for rec in reader.records() {
                let rec = rec?;
                let row = rec
                    .iter()
                    .map(|v| {
                        v.trim().parse::<i64>().map_err(|_| {
                            Error::InvalidArgument(format!("{}: `{v}` is not an integer", path.display()))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
            relations.insert(t.name.clone(), Relation::new(header, rows)?);
        }
        Database::new(catalog, relations)
    }

    /// Writes one CSV file per table into `dir`.
    pub fn write_csv_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, rel) in &self.relations {
            let path = dir.join(format!("{name}.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&rel.columns)?;
            for row in &rel.rows {
                w.write_record(row.iter().map(|v| v.to_string()))?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnDistribution {
    /// Uniform over `0..domain`; the domain defaults to the table's row count.
    Uniform {
        #[serde(default)]
        domain: Option<u64>,
    },
    /// Zipf over `1..=domain` with the given exponent.
    Zipf {
        #[serde(default)]
        domain: Option<u64>,
        exponent: f64,
    },
}

impl Default for ColumnDistribution {
    fn default() -> Self {
        ColumnDistribution::Uniform { domain: None }
    }
}

impl ColumnDistribution {
    fn sample(&self, rows: u64, rng: &mut impl Rng) -> Result<i64> {
        match *self {
            ColumnDistribution::Uniform { domain } => {
                let d = domain.unwrap_or(rows).max(1);
                Ok(rng.random_range(0..d) as i64)
            }
            ColumnDistribution::Zipf { domain, exponent } => {
                let d = domain.unwrap_or(rows).max(1);
                let z = Zipf::new(d as f64, exponent)
                    .map_err(|e| Error::InvalidArgument(format!("zipf distribution: {e}")))?;
                Ok(z.sample(rng) as i64)
            }
        }
    }
}

/// Seeded synthetic data generation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    #[serde(default)]
    pub default_distribution: ColumnDistribution,
    /// Per-column overrides keyed by `table.column`.
    #[serde(default)]
    pub columns: BTreeMap<String, ColumnDistribution>,
}

impl GeneratorConfig {
    pub fn uniform(seed: u64) -> Self {
        GeneratorConfig {
            seed,
            default_distribution: ColumnDistribution::default(),
            columns: BTreeMap::new(),
        }
    }
}
