//! Work-unit charges of each operator.
//!
//! Every charge is a function of operator input and output cardinalities
//! only, so the executor and the truthful cost model agree exactly. The
//! relative ranking of plans depends on these constants:
//!
//! | operator                         | units                                   |
//! |----------------------------------|-----------------------------------------|
//! | sequential scan                  | `rows(T)`                               |
//! | index scan, equality filter      | `1 + matches` (probe, then fetch)       |
//! | index scan, no usable filter     | `2 rows(T)` (index walk plus fetch)     |
//! | nested loop                      | `L R + L` (comparisons plus outer reads)|
//! | hash join (build on the right)   | `2 R + L + O`                           |
//! | merge join                       | `sort(L) + sort(R) + L + R + O`         |
//! | cross join                       | `L R`                                   |
//!
//! with `sort(x) = x ceil(log2 x)` for `x >= 2` and 0 otherwise.

use crate::model::JoinAlgorithm;

pub fn seq_scan(base_rows: u64) -> u64 {
    base_rows
}

pub fn index_probe(matches: u64) -> u64 {
    1 + matches
}

pub fn index_walk(base_rows: u64) -> u64 {
    base_rows.saturating_mul(2)
}

pub fn sort(rows: u64) -> u64 {
    if rows < 2 {
        0
    } else {
        let log = 64 - (rows - 1).leading_zeros() as u64;
        rows.saturating_mul(log)
    }
}

/// Charge of a join with `left`/`right` input rows and `out` output rows.
pub fn join(alg: JoinAlgorithm, left: u64, right: u64, out: u64) -> u64 {
    match alg {
        JoinAlgorithm::NestedLoop => left.saturating_mul(right).saturating_add(left),
        JoinAlgorithm::Hash => right
            .saturating_mul(2)
            .saturating_add(left)
            .saturating_add(out),
        JoinAlgorithm::Merge => sort(left)
            .saturating_add(sort(right))
            .saturating_add(left)
            .saturating_add(right)
            .saturating_add(out),
        JoinAlgorithm::Cross => left.saturating_mul(right),
    }
}

/// Charge that does not depend on the output size; a lower bound for
/// algorithms that also pay per output row.
pub fn join_before_output(alg: JoinAlgorithm, left: u64, right: u64) -> u64 {
    join(alg, left, right, 0)
}
