use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexInfo {
    pub name: String,
    pub table: String,
    pub column: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableInfo {
    pub name: String,
    pub columns: Vec<String>,
    pub row_count: u64,
    #[serde(default)]
    pub indexes: Vec<IndexInfo>,
}

impl TableInfo {
    pub fn has_column(&self, column: &str) -> bool {
        self.columns.iter().any(|c| c == column)
    }

    pub fn column_position(&self, column: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == column)
    }

    pub fn index(&self, name: &str) -> Option<&IndexInfo> {
        self.indexes.iter().find(|i| i.name == name)
    }
}

/// Schema and index metadata of the benchmarked database.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CatalogDef")]
pub struct Catalog {
    tables: Vec<TableInfo>,
}

#[derive(Deserialize)]
struct CatalogDef {
    tables: Vec<TableInfo>,
}

impl TryFrom<CatalogDef> for Catalog {
    type Error = Error;

    fn try_from(def: CatalogDef) -> Result<Self> {
        Catalog::new(def.tables)
    }
}

impl Catalog {
    pub fn new(tables: Vec<TableInfo>) -> Result<Self> {
        let mut names = HashSet::new();
        for t in &tables {
            if !names.insert(t.name.as_str()) {
                return Err(Error::InvalidCatalog(format!("duplicate table `{}`", t.name)));
            }
            let mut cols = HashSet::new();
            for c in &t.columns {
                if !cols.insert(c.as_str()) {
                    return Err(Error::InvalidCatalog(format!(
                        "duplicate column `{c}` in table `{}`",
                        t.name
                    )));
                }
            }
            let mut idx_names = HashSet::new();
            for i in &t.indexes {
                if i.table != t.name {
                    return Err(Error::InvalidCatalog(format!(
                        "index `{}` listed under `{}` but declared on `{}`",
                        i.name, t.name, i.table
                    )));
                }
                if !t.has_column(&i.column) {
                    return Err(Error::InvalidCatalog(format!(
                        "index `{}` references unknown column `{}.{}`",
                        i.name, t.name, i.column
                    )));
                }
                if !idx_names.insert(i.name.as_str()) {
                    return Err(Error::InvalidCatalog(format!(
                        "duplicate index `{}` on `{}`",
                        i.name, t.name
                    )));
                }
            }
        }
        Ok(Catalog { tables })
    }

    pub fn tables(&self) -> &[TableInfo] {
        &self.tables
    }

    pub fn table(&self, name: &str) -> Option<&TableInfo> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Indexes declared on `table`, in catalog order.
    pub fn indexes_on(&self, table: &str) -> &[IndexInfo] {
        self.table(table).map(|t| t.indexes.as_slice()).unwrap_or(&[])
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(name: &str, cols: &[&str]) -> TableInfo {
        TableInfo {
            name: name.into(),
            columns: cols.iter().map(|c| c.to_string()).collect(),
            row_count: 10,
            indexes: vec![],
        }
    }

    #[test]
    fn rejects_duplicate_tables_and_columns() {
        assert!(Catalog::new(vec![table("A", &["x"]), table("A", &["y"])]).is_err());
        assert!(Catalog::new(vec![table("A", &["x", "x"])]).is_err());
    }

    #[test]
    fn index_must_reference_existing_column() {
        let mut t = table("A", &["x"]);
        t.indexes.push(IndexInfo {
            name: "ia".into(),
            table: "A".into(),
            column: "nope".into(),
        });
        assert!(matches!(Catalog::new(vec![t]), Err(Error::InvalidCatalog(_))));
    }

    #[test]
    fn json_is_validated() {
        let bad = r#"{"tables":[{"name":"A","columns":["x"],"row_count":1,
            "indexes":[{"name":"i","table":"A","column":"y"}]}]}"#;
        assert!(Catalog::from_json_str(bad).is_err());
        let good = r#"{"tables":[{"name":"A","columns":["x"],"row_count":1,
            "indexes":[{"name":"i","table":"A","column":"x"}]}]}"#;
        let cat = Catalog::from_json_str(good).unwrap();
        assert_eq!(cat.indexes_on("A").len(), 1);
        assert!(cat.indexes_on("B").is_empty());
    }
}
