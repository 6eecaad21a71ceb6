use std::collections::BTreeSet;
use std::fmt;

use crate::model::{
    AccessMethod, BackendCapabilities, Catalog, JoinAlgorithm, JoinGraph, PhysicalPlan, TableSet,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownTable(String),
    DuplicateTable(String),
    MissingTable(String),
    UnsupportedAlgorithm { node: String, algorithm: JoinAlgorithm },
    /// A non-cross join whose inputs share no predicate.
    MissingPredicate { node: String },
    /// A cross join over inputs that are connected by a predicate.
    NeedlessCross { node: String },
    /// Assigned predicates differ from those separating the two subtrees.
    MisplacedPredicates { node: String },
    IndexScanUnsupported { table: String },
    UnknownIndex { table: String, index: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownTable(t) => write!(f, "unknown table `{t}`"),
            Violation::DuplicateTable(t) => write!(f, "table `{t}` appears in more than one leaf"),
            Violation::MissingTable(t) => write!(f, "table `{t}` is not covered by the plan"),
            Violation::UnsupportedAlgorithm { node, algorithm } => {
                write!(f, "unsupported algorithm `{algorithm}` at {node}")
            }
            Violation::MissingPredicate { node } => write!(f, "missing predicate at {node}"),
            Violation::NeedlessCross { node } => {
                write!(f, "cross join at {node} although a predicate connects its inputs")
            }
            Violation::MisplacedPredicates { node } => {
                write!(f, "predicates at {node} differ from the separating predicates")
            }
            Violation::IndexScanUnsupported { table } => {
                write!(f, "index scan on `{table}` but the backend has no index scans")
            }
            Violation::UnknownIndex { table, index } => {
                write!(f, "index `{index}` does not exist on `{table}`")
            }
        }
    }
}

/// Checks every structural and capability invariant of `plan` for `graph`.
/// Never stops at the first problem.
pub fn validate_plan(
    plan: &PhysicalPlan,
    graph: &JoinGraph,
    caps: &BackendCapabilities,
    catalog: &Catalog,
) -> Result<(), Vec<Violation>> {
    let mut v = Vec::new();
    let mut covered = TableSet::EMPTY;
    let leaves_ok = check_leaves(plan, graph, caps, catalog, &mut covered, &mut v);
    for (i, t) in graph.tables().iter().enumerate() {
        if !covered.contains(i) {
            v.push(Violation::MissingTable(t.name().to_string()));
        }
    }
    if leaves_ok {
        check_nodes(plan, graph, caps, &mut v);
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

fn check_leaves(
    plan: &PhysicalPlan,
    graph: &JoinGraph,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    covered: &mut TableSet,
    v: &mut Vec<Violation>,
) -> bool {
    let mut ok = true;
    plan.walk(&mut |node| {
        let PhysicalPlan::Scan { table, access } = node else {
            return;
        };
        let Some(i) = graph.position(table) else {
            v.push(Violation::UnknownTable(table.clone()));
            ok = false;
            return;
        };
        if covered.contains(i) {
            v.push(Violation::DuplicateTable(table.clone()));
            ok = false;
        }
        *covered = covered.union(TableSet::single(i));
        if let AccessMethod::IndexScan(index) = access {
            if !caps.supports_index_scan() {
                v.push(Violation::IndexScanUnsupported {
                    table: table.clone(),
                });
            }
            let base = &graph.tables()[i].table;
            if catalog.table(base).and_then(|t| t.index(index)).is_none() {
                v.push(Violation::UnknownIndex {
                    table: table.clone(),
                    index: index.clone(),
                });
            }
        }
    });
    ok
}

fn check_nodes(plan: &PhysicalPlan, graph: &JoinGraph, caps: &BackendCapabilities, v: &mut Vec<Violation>) {
    plan.walk(&mut |node| {
        let PhysicalPlan::Join {
            algorithm,
            predicates,
            left,
            right,
        } = node
        else {
            return;
        };
        let label = || node.fingerprint().0;
        let (Ok(l), Ok(r)) = (left.table_set(graph), right.table_set(graph)) else {
            return;
        };
        let expected: BTreeSet<_> = graph
            .predicates_between(l, r)
            .map(|p| p.into_iter().collect())
            .unwrap_or_default();
        let actual: BTreeSet<_> = predicates.iter().collect();
        if !caps.supports(*algorithm) {
            v.push(Violation::UnsupportedAlgorithm {
                node: label(),
                algorithm: *algorithm,
            });
        }
        match (*algorithm == JoinAlgorithm::Cross, expected.is_empty()) {
            (false, true) => v.push(Violation::MissingPredicate { node: label() }),
            (true, false) => v.push(Violation::NeedlessCross { node: label() }),
            _ => {}
        }
        if actual != expected || actual.len() != predicates.len() {
            v.push(Violation::MisplacedPredicates { node: label() });
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ColumnRef, IndexInfo, JoinPredicate, TableInfo, TableRef};

    fn setup() -> (JoinGraph, Catalog) {
        let cat = Catalog::new(
            ["A", "B", "C"]
                .iter()
                .map(|t| TableInfo {
                    name: t.to_string(),
                    columns: vec!["x".into()],
                    row_count: 4,
                    indexes: vec![IndexInfo {
                        name: format!("i{t}"),
                        table: t.to_string(),
                        column: "x".into(),
                    }],
                })
                .collect(),
        )
        .unwrap();
        let g = JoinGraph::new(
            "q",
            vec![TableRef::new("A"), TableRef::new("B"), TableRef::new("C")],
            vec![
                JoinPredicate::new(ColumnRef::new("A", "x"), ColumnRef::new("B", "x")),
                JoinPredicate::new(ColumnRef::new("B", "x"), ColumnRef::new("C", "x")),
            ],
            vec![],
        )
        .unwrap();
        (g, cat)
    }

    fn p(g: &JoinGraph, l: &str, r: &str) -> Vec<JoinPredicate> {
        g.predicates_between(g.table_set(l.split(',')).unwrap(), g.table_set(r.split(',')).unwrap())
            .unwrap()
            .into_iter()
            .cloned()
            .collect()
    }

    #[test]
    fn valid_three_table_plan() {
        let (g, cat) = setup();
        let plan = PhysicalPlan::join(
            JoinAlgorithm::Hash,
            p(&g, "A,B", "C"),
            PhysicalPlan::join(
                JoinAlgorithm::Merge,
                p(&g, "A", "B"),
                PhysicalPlan::seq("A"),
                PhysicalPlan::scan("B", AccessMethod::IndexScan("iB".into())),
            ),
            PhysicalPlan::seq("C"),
        );
        assert_eq!(validate_plan(&plan, &g, &BackendCapabilities::default(), &cat), Ok(()));
    }

    #[test]
    fn unsupported_algorithm() {
        let (g, cat) = setup();
        let caps = BackendCapabilities::new([JoinAlgorithm::NestedLoop], false).unwrap();
        let plan = PhysicalPlan::join(
            JoinAlgorithm::Hash,
            p(&g, "A,B", "C"),
            PhysicalPlan::join(JoinAlgorithm::NestedLoop, p(&g, "A", "B"), PhysicalPlan::seq("A"), PhysicalPlan::seq("B")),
            PhysicalPlan::seq("C"),
        );
        let errs = validate_plan(&plan, &g, &caps, &cat).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].to_string().contains("unsupported algorithm"));
    }

    #[test]
    fn missing_predicate_on_disconnected_join() {
        let (g, cat) = setup();
        let plan = PhysicalPlan::join(
            JoinAlgorithm::Hash,
            p(&g, "A,C", "B"),
            PhysicalPlan::join(JoinAlgorithm::Hash, vec![], PhysicalPlan::seq("A"), PhysicalPlan::seq("C")),
            PhysicalPlan::seq("B"),
        );
        let errs = validate_plan(&plan, &g, &BackendCapabilities::default(), &cat).unwrap_err();
        assert!(errs.iter().any(|e| e.to_string().contains("missing predicate")));
    }

    #[test]
    fn structural_violations_are_all_reported() {
        let (g, cat) = setup();
        let caps = BackendCapabilities::new([JoinAlgorithm::Hash], false).unwrap();
        let plan = PhysicalPlan::join(
            JoinAlgorithm::Cross,
            vec![],
            PhysicalPlan::scan("A", AccessMethod::IndexScan("nope".into())),
            PhysicalPlan::seq("B"),
        );
        let errs = validate_plan(&plan, &g, &caps, &cat).unwrap_err();
        assert!(errs.contains(&Violation::MissingTable("C".into())));
        assert!(errs.contains(&Violation::IndexScanUnsupported { table: "A".into() }));
        assert!(errs.contains(&Violation::UnknownIndex {
            table: "A".into(),
            index: "nope".into()
        }));
        assert!(errs.iter().any(|e| matches!(e, Violation::NeedlessCross { .. })));

        let dup = PhysicalPlan::join(JoinAlgorithm::Cross, vec![], PhysicalPlan::seq("A"), PhysicalPlan::seq("A"));
        let errs = validate_plan(&dup, &g, &caps, &cat).unwrap_err();
        assert!(errs.contains(&Violation::DuplicateTable("A".into())));
    }
}
