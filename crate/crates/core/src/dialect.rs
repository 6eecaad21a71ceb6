//! Hint dialects and the compiler from physical plans to hinted SQL.
//!
//! A dialect supplies the join-hint token of each algorithm, an index-hint
//! fragment and a template that forces one two-way join. Plans are compiled
//! bottom-up: leaves render as a table plus an optional index fragment, and
//! a child that is itself a join becomes a parenthesized subquery with alias
//! `j<k>`, where `k` numbers internal nodes in preorder (the root is `j0`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AccessMethod, BackendCapabilities, ColumnRef, JoinAlgorithm, JoinGraph, PhysicalPlan};

/// Arguments of one two-way join hint. `t1`/`t2` are either a table
/// reference or an aliased parenthesized subquery; `al1`/`al2` name them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinHintArgs<'a> {
    pub t1: &'a str,
    pub al1: &'a str,
    pub idx1: &'a str,
    pub t2: &'a str,
    pub al2: &'a str,
    pub idx2: &'a str,
    pub join: &'a str,
    pub clause: &'a str,
}

/// Where selection filters of the query go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterPlacement {
    /// Conjoined to the outermost join clause; appended as `WHERE` when the
    /// outermost node has no clause.
    #[default]
    Clause,
    /// Always appended as a trailing `WHERE`.
    Where,
}

pub trait HintDialect {
    fn name(&self) -> &str;
    /// Join-hint tokens, one per supported algorithm.
    fn join_types(&self) -> Vec<String>;
    fn join_token(&self, alg: JoinAlgorithm) -> Option<&str>;
    fn index_hint(&self, table: &str, index: &str) -> String;
    fn join_hint(&self, args: &JoinHintArgs<'_>) -> String;
    /// Two-way join without a predicate. `args.join` and `args.clause` are empty.
    fn cross_join(&self, args: &JoinHintArgs<'_>) -> String;
    /// Query over a single table.
    fn scan(&self, table: &str, idx: &str) -> String;
    fn filter_placement(&self) -> FilterPlacement;

    /// Algorithms with a token, plus index scans when the dialect has an
    /// index hint.
    fn capabilities(&self) -> Result<BackendCapabilities> {
        let algs = JoinAlgorithm::PHYSICAL.into_iter().filter(|a| self.join_token(*a).is_some());
        BackendCapabilities::new(algs, !self.index_hint("t", "i").trim().is_empty())
    }
}

/// Dialect defined by string templates. Placeholders: `{table}`, `{index}`
/// in the index hint; `{t1} {al1} {idx1} {t2} {al2} {idx2} {join} {clause}`
/// in the join and cross-join templates; `{t1} {idx1}` in the scan template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateDialect {
    pub name: String,
    /// Algorithm -> hint token.
    pub join_types: BTreeMap<JoinAlgorithm, String>,
    pub index_hint: String,
    pub join_hint: String,
    pub cross_join: String,
    #[serde(default = "default_scan")]
    pub scan: String,
    #[serde(default)]
    pub filters: FilterPlacement,
}

fn default_scan() -> String {
    "SELECT * FROM {t1} {idx1}".into()
}

impl TemplateDialect {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let d: TemplateDialect = serde_json::from_str(s)?;
        if d.join_types.contains_key(&JoinAlgorithm::Cross) {
            return Err(Error::Config(
                "cross joins use the `cross_join` template, not a join type".into(),
            ));
        }
        Ok(d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&s)
    }
}

fn fill(template: &str, pairs: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in pairs {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

fn join_pairs<'a>(a: &'a JoinHintArgs<'a>) -> [(&'static str, &'a str); 8] {
    [
        ("t1", a.t1),
        ("al1", a.al1),
        ("idx1", a.idx1),
        ("t2", a.t2),
        ("al2", a.al2),
        ("idx2", a.idx2),
        ("join", a.join),
        ("clause", a.clause),
    ]
}

impl HintDialect for TemplateDialect {
    fn name(&self) -> &str {
        &self.name
    }

    fn join_types(&self) -> Vec<String> {
        self.join_types.values().cloned().collect()
    }

    fn join_token(&self, alg: JoinAlgorithm) -> Option<&str> {
        self.join_types.get(&alg).map(String::as_str)
    }

    fn index_hint(&self, table: &str, index: &str) -> String {
        fill(&self.index_hint, &[("table", table), ("index", index)])
    }

    fn join_hint(&self, args: &JoinHintArgs<'_>) -> String {
        fill(&self.join_hint, &join_pairs(args))
    }

    fn cross_join(&self, args: &JoinHintArgs<'_>) -> String {
        fill(&self.cross_join, &join_pairs(args))
    }

    fn scan(&self, table: &str, idx: &str) -> String {
        fill(&self.scan, &[("t1", table), ("idx1", idx)])
    }

    fn filter_placement(&self) -> FilterPlacement {
        self.filters
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DialectStyle {
    #[serde(alias = "x")]
    StyleX,
    #[serde(alias = "y")]
    StyleY,
    #[serde(alias = "mysql")]
    StyleMysql,
}

impl std::str::FromStr for DialectStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" | "style-x" => Ok(DialectStyle::StyleX),
            "y" | "style-y" => Ok(DialectStyle::StyleY),
            "mysql" | "style-mysql" => Ok(DialectStyle::StyleMysql),
            _ => Err(Error::Config(format!("unknown dialect style `{s}` (expected x, y or mysql)"))),
        }
    }
}

impl fmt::Display for DialectStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DialectStyle::StyleX => "style-x",
            DialectStyle::StyleY => "style-y",
            DialectStyle::StyleMysql => "style-mysql",
        })
    }
}

pub fn builtin_dialect(style: DialectStyle) -> TemplateDialect {
    use JoinAlgorithm::*;
    let tokens = |pairs: &[(JoinAlgorithm, &str)]| pairs.iter().map(|(a, t)| (*a, t.to_string())).collect();
    match style {
        DialectStyle::StyleX => TemplateDialect {
            name: style.to_string(),
            join_types: tokens(&[(Hash, "HASH"), (Merge, "MERGE"), (NestedLoop, "LOOP")]),
            index_hint: "WITH (INDEX({index}))".into(),
            join_hint: "SELECT * FROM {t1} {idx1} INNER {join} JOIN {t2} {idx2} ON {clause}".into(),
            cross_join: "SELECT * FROM {t1} {idx1} CROSS JOIN {t2} {idx2}".into(),
            scan: default_scan(),
            filters: FilterPlacement::Where,
        },
        DialectStyle::StyleY => TemplateDialect {
            name: style.to_string(),
            join_types: tokens(&[(Hash, "USE_HASH"), (Merge, "USE_MERGE"), (NestedLoop, "USE_NL")]),
            index_hint: "INDEX({table} {index})".into(),
            join_hint: "SELECT /*+ ORDERED {join}({al1}, {al2}) {idx1} {idx2} */ * FROM {t1}, {t2} WHERE {clause}"
                .into(),
            cross_join: "SELECT /*+ ORDERED {idx1} {idx2} */ * FROM {t1}, {t2}".into(),
            scan: "SELECT /*+ {idx1} */ * FROM {t1}".into(),
            filters: FilterPlacement::Clause,
        },
        DialectStyle::StyleMysql => TemplateDialect {
            name: style.to_string(),
            join_types: tokens(&[(NestedLoop, "LOOP")]),
            index_hint: "USE INDEX({index})".into(),
            join_hint: "SELECT STRAIGHT_JOIN * FROM {t1} {idx1}, {t2} {idx2} WHERE {clause}".into(),
            cross_join: "SELECT STRAIGHT_JOIN * FROM {t1} {idx1}, {t2} {idx2}".into(),
            scan: default_scan(),
            filters: FilterPlacement::Clause,
        },
    }
}

/// Either a builtin style name or a path to a template file.
pub fn resolve_dialect(spec: &str) -> Result<TemplateDialect> {
    match spec.parse::<DialectStyle>() {
        Ok(style) => Ok(builtin_dialect(style)),
        Err(_) if Path::new(spec).exists() => TemplateDialect::load(spec),
        Err(e) => Err(e),
    }
}

/// A plan rendered as a hinted query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintedQuery {
    pub text: String,
    pub plan: PhysicalPlan,
}

/// Single spaces, and none before a comma left by an empty fragment.
fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").replace(" ,", ",")
}

struct Rendered {
    /// Table reference or aliased subquery.
    from: String,
    /// Identifier usable in clauses.
    alias: String,
    /// Index fragment of a leaf; empty for subqueries.
    idx: String,
    /// Table references below this node.
    tables: Vec<String>,
}

struct Compiler<'a> {
    graph: &'a JoinGraph,
    dialect: &'a dyn HintDialect,
    next_alias: usize,
}

impl Compiler<'_> {
    fn leaf(&self, table: &str, access: &AccessMethod) -> Result<Rendered> {
        let tref = self
            .graph
            .table_ref(table)
            .ok_or_else(|| Error::InvalidArgument(format!("`{table}` is not part of `{}`", self.graph.query_id())))?;
        let from = match &tref.alias {
            Some(a) => format!("{} {a}", tref.table),
            None => tref.table.clone(),
        };
        let idx = match access {
            AccessMethod::SequentialScan => String::new(),
            AccessMethod::IndexScan(i) => self.dialect.index_hint(tref.name(), i),
        };
        Ok(Rendered {
            from,
            alias: tref.name().to_string(),
            idx,
            tables: vec![tref.name().to_string()],
        })
    }

    /// Renders `plan` as a child of a join node.
    fn child(&mut self, plan: &PhysicalPlan) -> Result<Rendered> {
        match plan {
            PhysicalPlan::Scan { table, access } => self.leaf(table, access),
            PhysicalPlan::Join { .. } => {
                let alias = format!("j{}", self.next_alias);
                let (text, tables) = self.join(plan, false)?;
                Ok(Rendered {
                    from: format!("({text}) {alias}"),
                    alias,
                    idx: String::new(),
                    tables,
                })
            }
        }
    }

    /// Renders a join node. The query's filters go on the outermost one.
    fn join(&mut self, plan: &PhysicalPlan, outermost: bool) -> Result<(String, Vec<String>)> {
        let PhysicalPlan::Join {
            algorithm,
            predicates,
            left,
            right,
        } = plan
        else {
            unreachable!("join() is only called on join nodes")
        };
        self.next_alias += 1;
        let l = self.child(left)?;
        let r = self.child(right)?;
        let qualify = |c: &ColumnRef| -> Option<String> {
            for side in [&l, &r] {
                if side.tables.contains(&c.table) {
                    return Some(format!("{}.{}", side.alias, c.column));
                }
            }
            None
        };
        let mut terms = Vec::new();
        for p in predicates {
            let (a, b) = if l.tables.contains(&p.left.table) {
                (&p.left, &p.right)
            } else {
                (&p.right, &p.left)
            };
            let (Some(a), Some(b)) = (qualify(a), qualify(b)) else {
                return Err(Error::InvalidArgument(format!("predicate {p} does not match the plan")));
            };
            terms.push(format!("{a} = {b}"));
        }
        let clause = terms.join(" AND ");
        let mut tables = l.tables.clone();
        tables.extend(r.tables.iter().cloned());
        let filters = outermost.then(|| self.qualify_filters(&l, &r));
        let text = if *algorithm == JoinAlgorithm::Cross {
            let args = JoinHintArgs {
                t1: &l.from,
                al1: &l.alias,
                idx1: &l.idx,
                t2: &r.from,
                al2: &r.alias,
                idx2: &r.idx,
                join: "",
                clause: "",
            };
            let mut text = self.dialect.cross_join(&args);
            if let Some(f) = filters.filter(|f| !f.is_empty()) {
                text = format!("{text} WHERE {f}");
            }
            text
        } else {
            let token = self.dialect.join_token(*algorithm).ok_or_else(|| {
                Error::Config(format!("dialect `{}` has no hint for {algorithm} joins", self.dialect.name()))
            })?;
            let placement = self.dialect.filter_placement();
            let clause = match (&filters, placement) {
                (Some(f), FilterPlacement::Clause) if !f.is_empty() => format!("{clause} AND {f}"),
                _ => clause,
            };
            let args = JoinHintArgs {
                t1: &l.from,
                al1: &l.alias,
                idx1: &l.idx,
                t2: &r.from,
                al2: &r.alias,
                idx2: &r.idx,
                join: token,
                clause: &clause,
            };
            let mut text = self.dialect.join_hint(&args);
            if let (Some(f), FilterPlacement::Where) = (&filters, placement) {
                if !f.is_empty() {
                    text = format!("{text} WHERE {f}");
                }
            }
            text
        };
        Ok((normalize(&text), tables))
    }

    /// The query's filters, qualified by the two children's identifiers.
    fn qualify_filters(&self, l: &Rendered, r: &Rendered) -> String {
        self.graph
            .selections()
            .iter()
            .filter_map(|s| {
                let side = [l, r].into_iter().find(|side| side.tables.contains(&s.table))?;
                Some(format!("{}.{} {} {}", side.alias, s.column, s.op.symbol(), s.value))
            })
            .collect::<Vec<_>>()
            .join(" AND ")
    }
}

/// Renders `plan` as one query forcing its join order, join algorithms and
/// access methods.
pub fn compile_plan(plan: &PhysicalPlan, graph: &JoinGraph, dialect: &dyn HintDialect) -> Result<HintedQuery> {
    let mut c = Compiler {
        graph,
        dialect,
        next_alias: 0,
    };
    let text = match plan {
        PhysicalPlan::Scan { table, access } => {
            let leaf = c.leaf(table, access)?;
            let filters: Vec<String> = graph
                .selections()
                .iter()
                .filter(|s| s.table == leaf.alias)
                .map(|s| s.to_string())
                .collect();
            let mut text = dialect.scan(&leaf.from, &leaf.idx);
            if !filters.is_empty() {
                text = format!("{text} WHERE {}", filters.join(" AND "));
            }
            normalize(&text)
        }
        PhysicalPlan::Join { .. } => c.join(plan, true)?.0,
    };
    Ok(HintedQuery {
        text,
        plan: plan.clone(),
    })
}

/// Problems found by [`validate_dialect`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialectViolation(pub String);

impl fmt::Display for DialectViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Checks that the dialect has join tokens and that its functions render
/// non-empty, repeatable strings on probe inputs.
pub fn validate_dialect(d: &dyn HintDialect) -> std::result::Result<(), Vec<DialectViolation>> {
    let mut v = Vec::new();
    let tokens = d.join_types();
    if tokens.is_empty() {
        v.push(DialectViolation("join_types is empty".into()));
    }
    let mut check = |what: &str, f: &dyn Fn() -> String| {
        let (a, b) = (f(), f());
        if a.trim().is_empty() {
            v.push(DialectViolation(format!("{what} renders an empty string")));
        } else if a != b {
            v.push(DialectViolation(format!("{what} is not deterministic")));
        }
    };
    check("index_hint", &|| d.index_hint("t1", "i1"));
    let token = tokens.first().cloned().unwrap_or_default();
    let args = JoinHintArgs {
        t1: "t1",
        al1: "t1",
        idx1: "",
        t2: "t2",
        al2: "t2",
        idx2: "",
        join: &token,
        clause: "t1.a = t2.b",
    };
    check("join_hint", &|| d.join_hint(&args));
    check("cross_join", &|| d.cross_join(&JoinHintArgs { join: "", clause: "", ..args }));
    check("scan", &|| d.scan("t1", ""));
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CompareOp, JoinPredicate, Selection, TableRef};
    use std::cell::Cell;

    fn ab() -> JoinGraph {
        JoinGraph::new(
            "q",
            vec![TableRef::new("A"), TableRef::new("B")],
            vec![JoinPredicate::new(ColumnRef::new("A", "a"), ColumnRef::new("B", "b"))],
            vec![],
        )
        .unwrap()
    }

    fn ab_plan(alg: JoinAlgorithm) -> PhysicalPlan {
        PhysicalPlan::join(
            alg,
            ab().predicates().to_vec(),
            PhysicalPlan::scan("A", AccessMethod::IndexScan("indexA".into())),
            PhysicalPlan::scan("B", AccessMethod::IndexScan("indexB".into())),
        )
    }

    #[test]
    fn style_x_two_way() {
        let d = builtin_dialect(DialectStyle::StyleX);
        let q = compile_plan(&ab_plan(JoinAlgorithm::Hash), &ab(), &d).unwrap();
        assert_eq!(
            q.text,
            "SELECT * FROM A WITH (INDEX(indexA)) INNER HASH JOIN B WITH (INDEX(indexB)) ON A.a = B.b"
        );
        assert_eq!(d.index_hint("T", "I"), "WITH (INDEX(I))");
        let args = JoinHintArgs {
            t1: "A",
            al1: "A",
            idx1: &d.index_hint("A", "indexA"),
            t2: "B",
            al2: "B",
            idx2: &d.index_hint("B", "indexB"),
            join: "HASH",
            clause: "A.a = B.b",
        };
        assert_eq!(
            normalize(&d.join_hint(&args)),
            "SELECT * FROM A WITH (INDEX(indexA)) INNER HASH JOIN B WITH (INDEX(indexB)) ON A.a = B.b"
        );
    }

    #[test]
    fn style_y_and_mysql() {
        let y = builtin_dialect(DialectStyle::StyleY);
        assert_eq!(y.join_types(), vec!["USE_NL", "USE_HASH", "USE_MERGE"]);
        let q = compile_plan(&ab_plan(JoinAlgorithm::Hash), &ab(), &y).unwrap();
        assert_eq!(
            q.text,
            "SELECT /*+ ORDERED USE_HASH(A, B) INDEX(A indexA) INDEX(B indexB) */ * FROM A, B WHERE A.a = B.b"
        );
        let m = builtin_dialect(DialectStyle::StyleMysql);
        assert_eq!(m.join_types(), vec!["LOOP"]);
        let q = compile_plan(&ab_plan(JoinAlgorithm::NestedLoop), &ab(), &m).unwrap();
        assert_eq!(
            q.text,
            "SELECT STRAIGHT_JOIN * FROM A USE INDEX(indexA), B USE INDEX(indexB) WHERE A.a = B.b"
        );
        let err = compile_plan(&ab_plan(JoinAlgorithm::Hash), &ab(), &m).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    fn three_way() -> (JoinGraph, PhysicalPlan) {
        let g = JoinGraph::new(
            "q3",
            vec![TableRef::new("A"), TableRef::new("B"), TableRef::aliased("C", "c1")],
            vec![
                JoinPredicate::new(ColumnRef::new("A", "a"), ColumnRef::new("B", "b")),
                JoinPredicate::new(ColumnRef::new("c1", "c"), ColumnRef::new("B", "b")),
            ],
            vec![Selection {
                table: "A".into(),
                column: "x".into(),
                op: CompareOp::Lt,
                value: 5,
            }],
        )
        .unwrap();
        let ab = PhysicalPlan::join(
            JoinAlgorithm::Merge,
            vec![g.predicates()[0].clone()],
            PhysicalPlan::seq("A"),
            PhysicalPlan::seq("B"),
        );
        let p = PhysicalPlan::join(JoinAlgorithm::NestedLoop, vec![g.predicates()[1].clone()], PhysicalPlan::seq("c1"), ab);
        (g, p)
    }

    #[test]
    fn nested_subqueries_and_filters() {
        let (g, p) = three_way();
        let x = compile_plan(&p, &g, &builtin_dialect(DialectStyle::StyleX)).unwrap();
        assert_eq!(
            x.text,
            "SELECT * FROM C c1 INNER LOOP JOIN (SELECT * FROM A INNER MERGE JOIN B ON A.a = B.b) j1 ON c1.c = j1.b WHERE j1.x < 5"
        );
        let y = compile_plan(&p, &g, &builtin_dialect(DialectStyle::StyleY)).unwrap();
        assert_eq!(
            y.text,
            "SELECT /*+ ORDERED USE_NL(c1, j1) */ * FROM C c1, (SELECT /*+ ORDERED USE_MERGE(A, B) */ * FROM A, B WHERE A.a = B.b) j1 WHERE c1.c = j1.b AND j1.x < 5"
        );
    }

    #[test]
    fn cross_and_single_table() {
        let g = JoinGraph::new("q", vec![TableRef::new("A"), TableRef::new("B")], vec![], vec![]).unwrap();
        let p = PhysicalPlan::join(JoinAlgorithm::Cross, vec![], PhysicalPlan::seq("A"), PhysicalPlan::seq("B"));
        assert_eq!(
            compile_plan(&p, &g, &builtin_dialect(DialectStyle::StyleX)).unwrap().text,
            "SELECT * FROM A CROSS JOIN B"
        );
        assert_eq!(
            compile_plan(&p, &g, &builtin_dialect(DialectStyle::StyleY)).unwrap().text,
            "SELECT /*+ ORDERED */ * FROM A, B"
        );
        let one = JoinGraph::new("one", vec![TableRef::new("A")], vec![], vec![]).unwrap();
        let scan = PhysicalPlan::scan("A", AccessMethod::IndexScan("ia".into()));
        assert_eq!(
            compile_plan(&scan, &one, &builtin_dialect(DialectStyle::StyleMysql)).unwrap().text,
            "SELECT * FROM A USE INDEX(ia)"
        );
    }

    #[test]
    fn template_round_trip() {
        let x = builtin_dialect(DialectStyle::StyleX);
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(TemplateDialect::from_json_str(&json).unwrap(), x);
        let caps = x.capabilities().unwrap();
        assert!(caps.supports(JoinAlgorithm::Merge) && caps.supports_index_scan());
        let bad = json.replace("\"hash\"", "\"cross\"");
        assert!(TemplateDialect::from_json_str(&bad).is_err());
        assert!("style-y".parse::<DialectStyle>().is_ok());
        assert!("z".parse::<DialectStyle>().is_err());
    }

    #[test]
    fn validation() {
        for s in [DialectStyle::StyleX, DialectStyle::StyleY, DialectStyle::StyleMysql] {
            validate_dialect(&builtin_dialect(s)).unwrap();
        }
        let mut empty = builtin_dialect(DialectStyle::StyleX);
        empty.join_types.clear();
        assert!(validate_dialect(&empty).is_err());

        struct Flaky(TemplateDialect, Cell<u32>);
        impl HintDialect for Flaky {
            fn name(&self) -> &str {
                "flaky"
            }
            fn join_types(&self) -> Vec<String> {
                self.0.join_types()
            }
            fn join_token(&self, alg: JoinAlgorithm) -> Option<&str> {
                self.0.join_token(alg)
            }
            fn index_hint(&self, t: &str, i: &str) -> String {
                self.0.index_hint(t, i)
            }
            fn join_hint(&self, a: &JoinHintArgs<'_>) -> String {
                self.1.set(self.1.get() + 1);
                format!("{} /* {} */", self.0.join_hint(a), self.1.get())
            }
            fn cross_join(&self, a: &JoinHintArgs<'_>) -> String {
                self.0.cross_join(a)
            }
            fn scan(&self, t: &str, i: &str) -> String {
                self.0.scan(t, i)
            }
            fn filter_placement(&self) -> FilterPlacement {
                self.0.filter_placement()
            }
        }
        let errs = validate_dialect(&Flaky(builtin_dialect(DialectStyle::StyleX), Cell::new(0))).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].0.contains("join_hint"));
    }
}
