//! Brute-force view of a query's plan space, used as the reference for the
//! statistical estimates.
//!
//! The space is every join ordering (shape times leaf permutation) with every
//! assignment of backend join algorithms to the nodes that have predicates
//! and of applicable access methods to the leaves. Materializing it is only
//! feasible for a handful of tables; the counting functions instead work per
//! ordering on the per-node work lists, which is exact because plan work is
//! a sum of independent node charges.

use std::collections::HashSet;

use super::cost::QueryStats;
use crate::error::{Error, Result};
use crate::model::{
    AccessMethod, BackendCapabilities, Catalog, JoinAlgorithm, JoinGraph, JoinTree, PhysicalPlan, Shape, TableSet,
};
use crate::sampling::access_choices;

pub const DEFAULT_ENUMERATION_BOUND: usize = 6;

fn check_bound(graph: &JoinGraph, bound: usize) -> Result<()> {
    if graph.len() > bound {
        return Err(Error::EnumerationBound {
            tables: graph.len(),
            bound,
        });
    }
    Ok(())
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Every join ordering of the query: `Catalan(n-1) n!` trees.
pub fn join_orderings(graph: &JoinGraph, bound: usize) -> Result<Vec<JoinTree>> {
    check_bound(graph, bound)?;
    let names: Vec<&str> = graph.tables().iter().map(|t| t.name()).collect();
    let perms = permutations(graph.len());
    let mut out = Vec::new();
    for shape in Shape::all(graph.len()) {
        for p in &perms {
            let filled: Vec<&str> = p.iter().map(|&i| names[i]).collect();
            out.push(shape.fill(&filled));
        }
    }
    Ok(out)
}

/// Calls `f` on every plan of the space without keeping them.
pub fn for_each_plan(
    graph: &JoinGraph,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    bound: usize,
    mut f: impl FnMut(PhysicalPlan) -> Result<()>,
) -> Result<()> {
    let algorithms = caps.join_algorithms();
    let access: Vec<Vec<AccessMethod>> = graph
        .tables()
        .iter()
        .map(|t| access_choices(graph, caps, catalog, t.name()))
        .collect();
    for tree in join_orderings(graph, bound)? {
        let leaves: Vec<usize> = tree
            .leaves()
            .iter()
            .map(|l| graph.position(l).expect("ordering over query tables"))
            .collect();
        let mut picks = 0usize;
        PhysicalPlan::from_tree(
            &tree,
            graph,
            &mut || {
                picks += 1;
                JoinAlgorithm::Cross
            },
            &mut |_| AccessMethod::SequentialScan,
        )?;
        let mut radices = vec![algorithms.len(); picks];
        radices.extend(leaves.iter().map(|&p| access[p].len()));
        let mut digits = vec![0usize; radices.len()];
        loop {
            let (mut a, mut l) = (0, picks);
            let plan = PhysicalPlan::from_tree(
                &tree,
                graph,
                &mut || {
                    a += 1;
                    algorithms[digits[a - 1]]
                },
                &mut |_| {
                    l += 1;
                    access[leaves[l - 1 - picks]][digits[l - 1]].clone()
                },
            )?;
            f(plan)?;
            if !advance(&mut digits, &radices) {
                break;
            }
        }
    }
    Ok(())
}

fn advance(digits: &mut [usize], radices: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radices[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// The full plan space, deduplicated by fingerprint. Refuses queries with
/// more than `bound` tables.
pub fn enumerate_plan_space(
    graph: &JoinGraph,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    bound: usize,
) -> Result<Vec<PhysicalPlan>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for_each_plan(graph, caps, catalog, bound, |p| {
        if seen.insert(p.fingerprint()) {
            out.push(p);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Work options of each operator slot of one join ordering.
fn ordering_slots(
    shape: &Shape,
    perm: &[usize],
    stats: &QueryStats,
    algorithms: &[JoinAlgorithm],
    leaf_options: &[Vec<u64>],
    out: &mut Vec<Vec<u64>>,
) -> TableSet {
    match shape {
        Shape::Leaf => {
            let pos = perm[0];
            out.push(leaf_options[pos].clone());
            TableSet::single(pos)
        }
        Shape::Join(l, r) => {
            let split = l.leaves();
            let ls = ordering_slots(l, &perm[..split], stats, algorithms, leaf_options, out);
            let rs = ordering_slots(r, &perm[split..], stats, algorithms, leaf_options, out);
            let options = if !stats.graph().connects(ls, rs) {
                vec![stats.join_work(JoinAlgorithm::Cross, ls, rs)]
            } else {
                algorithms.iter().map(|&a| stats.join_work(a, ls, rs)).collect()
            };
            out.push(options);
            ls.union(rs)
        }
    }
}

/// Calls `f` with the slot lists of every join ordering.
fn for_each_ordering_slots(
    stats: &QueryStats,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    bound: usize,
    mut f: impl FnMut(&[Vec<u64>]),
) -> Result<()> {
    let graph = stats.graph();
    check_bound(graph, bound)?;
    let algorithms = caps.join_algorithms();
    let leaf_options = graph
        .tables()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            access_choices(graph, caps, catalog, t.name())
                .iter()
                .map(|a| stats.leaf_work(i, a))
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let perms = permutations(graph.len());
    let mut slots = Vec::new();
    for shape in Shape::all(graph.len()) {
        for p in &perms {
            slots.clear();
            ordering_slots(&shape, p, stats, &algorithms, &leaf_options, &mut slots);
            f(&slots);
        }
    }
    Ok(())
}

/// Number of ways to pick one option per slot with a total of at least `threshold`.
fn count_at_least(slots: &[Vec<u64>], threshold: u64) -> u128 {
    let total: u128 = slots.iter().map(|s| s.len() as u128).product();
    let lo: u64 = slots.iter().map(|s| *s.iter().min().expect("non-empty")).sum();
    let hi: u64 = slots.iter().map(|s| *s.iter().max().expect("non-empty")).sum();
    if lo >= threshold {
        return total;
    }
    if hi < threshold {
        return 0;
    }
    let (a, b) = slots.split_at(slots.len() / 2);
    let sa = all_sums(a);
    let mut sb = all_sums(b);
    sb.sort_unstable();
    sa.iter()
        .map(|&x| {
            let need = threshold.saturating_sub(x);
            (sb.len() - sb.partition_point(|&y| y < need)) as u128
        })
        .sum()
}

fn all_sums(slots: &[Vec<u64>]) -> Vec<u64> {
    let mut sums = vec![0u64];
    for s in slots {
        sums = sums.iter().flat_map(|&x| s.iter().map(move |&y| x + y)).collect();
    }
    sums
}

/// Size and work range of a query's plan space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceSummary {
    pub size: u128,
    pub min_work: u64,
    pub max_work: u64,
}

pub fn space_summary(
    stats: &QueryStats,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    bound: usize,
) -> Result<SpaceSummary> {
    let mut s = SpaceSummary {
        size: 0,
        min_work: u64::MAX,
        max_work: 0,
    };
    for_each_ordering_slots(stats, caps, catalog, bound, |slots| {
        s.size += slots.iter().map(|o| o.len() as u128).product::<u128>();
        s.min_work = s.min_work.min(slots.iter().map(|o| *o.iter().min().unwrap()).sum());
        s.max_work = s.max_work.max(slots.iter().map(|o| *o.iter().max().unwrap()).sum());
    })?;
    Ok(s)
}

/// Number of plans in the space with work at least `threshold`, and the size
/// of the space.
pub fn count_plans_at_least(
    stats: &QueryStats,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    bound: usize,
    threshold: u64,
) -> Result<(u128, u128)> {
    let (mut hits, mut size) = (0u128, 0u128);
    for_each_ordering_slots(stats, caps, catalog, bound, |slots| {
        hits += count_at_least(slots, threshold);
        size += slots.iter().map(|o| o.len() as u128).product::<u128>();
    })?;
    Ok((hits, size))
}

/// Share of the plan space whose work is at least that of `chosen`; ties
/// count, so the chosen plan itself is included.
pub fn exact_performance_factor(
    stats: &QueryStats,
    chosen: &PhysicalPlan,
    caps: &BackendCapabilities,
    catalog: &Catalog,
    bound: usize,
) -> Result<f64> {
    check_bound(stats.graph(), bound)?;
    let w = stats.plan_work(chosen)?;
    let (hits, size) = count_plans_at_least(stats, caps, catalog, bound, w)?;
    Ok(hits as f64 / size as f64)
}
