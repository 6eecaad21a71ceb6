//! Domain types shared by every module: catalogs, queries as join graphs,
//! join trees and annotated physical plans.

mod catalog;
mod graph;
mod plan;
mod tree;
mod validate;

pub use catalog::{Catalog, IndexInfo, TableInfo};
pub use graph::{ColumnRef, CompareOp, JoinGraph, JoinPredicate, Selection, TableRef, TableSet};
pub use plan::{operator_key, AccessMethod, BackendCapabilities, JoinAlgorithm, PhysicalPlan, PlanFingerprint};
pub use tree::{JoinTree, Shape};
pub use validate::{validate_plan, Violation};
