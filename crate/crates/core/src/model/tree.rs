use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Shape of a full binary tree. Leaves are anonymous slots numbered left to
/// right starting at 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Leaf,
    Join(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn join(left: Shape, right: Shape) -> Self {
        Shape::Join(Box::new(left), Box::new(right))
    }

    pub fn leaves(&self) -> usize {
        match self {
            Shape::Leaf => 1,
            Shape::Join(l, r) => l.leaves() + r.leaves(),
        }
    }

    /// Places `tables` into the leaf slots left to right.
    ///
    /// Panics if the number of names differs from the number of slots.
    pub fn fill<S: AsRef<str>>(&self, tables: &[S]) -> JoinTree {
        assert_eq!(tables.len(), self.leaves(), "one table per leaf slot");
        let mut it = tables.iter();
        self.fill_from(&mut it)
    }

    fn fill_from<'a, S: AsRef<str> + 'a>(&self, it: &mut impl Iterator<Item = &'a S>) -> JoinTree {
        match self {
            Shape::Leaf => JoinTree::Leaf(it.next().expect("slot count checked").as_ref().to_string()),
            Shape::Join(l, r) => {
                let left = l.fill_from(it);
                let right = r.fill_from(it);
                JoinTree::join(left, right)
            }
        }
    }

    /// All shapes with `n` leaves.
    pub fn all(n: usize) -> Vec<Shape> {
        let mut memo: Vec<Vec<Shape>> = vec![Vec::new(), vec![Shape::Leaf]];
        for size in 2..=n {
            let mut shapes = Vec::new();
            for left in 1..size {
                for l in &memo[left] {
                    for r in &memo[size - left] {
                        shapes.push(Shape::join(l.clone(), r.clone()));
                    }
                }
            }
            memo.push(shapes);
        }
        if n == 0 {
            Vec::new()
        } else {
            memo.swap_remove(n)
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(s: &Shape, next: &mut usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match s {
                Shape::Leaf => {
                    *next += 1;
                    write!(f, "slot{}", next)
                }
                Shape::Join(l, r) => {
                    write!(f, "J(")?;
                    go(l, next, f)?;
                    write!(f, ", ")?;
                    go(r, next, f)?;
                    write!(f, ")")
                }
            }
        }
        go(self, &mut 0, f)
    }
}

/// A join ordering: binary tree whose leaves name table references.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JoinTree {
    Leaf(String),
    Join(Box<JoinTree>, Box<JoinTree>),
}

impl JoinTree {
    pub fn leaf(name: impl Into<String>) -> Self {
        JoinTree::Leaf(name.into())
    }

    pub fn join(left: JoinTree, right: JoinTree) -> Self {
        JoinTree::Join(Box::new(left), Box::new(right))
    }

    /// Leaf table set of this subtree.
    pub fn tables_of(&self) -> BTreeSet<String> {
        self.leaves().into_iter().map(str::to_string).collect()
    }

    /// Leaf names, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            JoinTree::Leaf(t) => out.push(t),
            JoinTree::Join(l, r) => {
                l.collect(out);
                r.collect(out);
            }
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            JoinTree::Leaf(_) => Shape::Leaf,
            JoinTree::Join(l, r) => Shape::join(l.shape(), r.shape()),
        }
    }

    pub fn internal_nodes(&self) -> usize {
        match self {
            JoinTree::Leaf(_) => 0,
            JoinTree::Join(l, r) => 1 + l.internal_nodes() + r.internal_nodes(),
        }
    }
}

impl fmt::Display for JoinTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JoinTree::Leaf(t) => write!(f, "{t}"),
            JoinTree::Join(l, r) => write!(f, "J({l}, {r})"),
        }
    }
}
