//! Uniform random join orderings.
//!
//! A join tree over `n` tables is encoded as a pair `(s, p)`: `s` is the
//! preorder walk of the tree shape written as bits (`1` for a join, `0` for a
//! leaf), and `p` is the sequence of tables placed into the leaves left to
//! right. `s` has length `2n - 1` with `n - 1` ones.
//!
//! Shapes are drawn uniformly by generating the first `2(n - 1)` bits with a
//! biased coin and appending the final `0`. With `r` = ones minus zeros so far
//! and `k` bits still to generate, the next bit is `0` with probability
//! `r (k + r + 2) / (2 k (r + 1))`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{JoinGraph, JoinTree, Shape};

/// Preorder encoding of a full binary tree shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitSequence(Vec<bool>);

impl BitSequence {
    /// Validates the bit counts and the preorder prefix condition.
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        let len = bits.len();
        if len.is_multiple_of(2) {
            return Err(Error::MalformedEncoding(format!(
                "length {len} is even; an encoding of n leaves has length 2n-1"
            )));
        }
        let n = len.div_ceil(2);
        let ones = bits.iter().filter(|b| **b).count();
        if ones != n - 1 {
            return Err(Error::MalformedEncoding(format!(
                "expected {} ones and {n} zeros, found {ones} ones",
                n - 1
            )));
        }
        let mut balance = 0i64;
        for (i, &b) in bits[..len - 1].iter().enumerate() {
            balance += if b { 1 } else { -1 };
            if balance < 0 {
                return Err(Error::MalformedEncoding(format!(
                    "prefix of length {} has more zeros than ones",
                    i + 1
                )));
            }
        }
        Ok(BitSequence(bits))
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Number of leaves `n`.
    pub fn leaves(&self) -> usize {
        self.0.len().div_ceil(2)
    }

    /// All valid sequences for `n` leaves, in lexicographic order
    /// (`0` before `1`).
    pub fn all(n: usize) -> Vec<BitSequence> {
        assert!(n >= 1, "at least one leaf");
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(2 * n - 1);
        fn go(cur: &mut Vec<bool>, ones: usize, zeros: usize, n: usize, out: &mut Vec<BitSequence>) {
            if ones == n - 1 && zeros == n - 1 {
                let mut bits = cur.clone();
                bits.push(false);
                out.push(BitSequence(bits));
                return;
            }
            if zeros < ones {
                cur.push(false);
                go(cur, ones, zeros + 1, n, out);
                cur.pop();
            }
            if ones < n - 1 {
                cur.push(true);
                go(cur, ones + 1, zeros, n, out);
                cur.pop();
            }
        }
        go(&mut cur, 0, 0, n, &mut out);
        out
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::MalformedEncoding(format!("unexpected character `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitSequence::new(bits)
    }
}

impl TryFrom<String> for BitSequence {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BitSequence> for String {
    fn from(b: BitSequence) -> String {
        b.to_string()
    }
}

/// Probability that the next generated bit is a leaf (`0`), given
/// `r` = ones minus zeros so far and `k` bits left to generate.
pub fn leaf_probability(r: u64, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("no bits remain (k = 0)".into()));
    }
    if r > k {
        return Err(Error::InvalidArgument(format!(
            "r = {r} exceeds the {k} remaining bits"
        )));
    }
    let (r, k) = (r as f64, k as f64);
    Ok(r * (k + r + 2.0) / (2.0 * k * (r + 1.0)))
}

/// Draws a uniformly random tree shape over `n` leaves, as its encoding.
///
/// Panics if `n == 0`.
pub fn sample_bit_sequence<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitSequence {
    assert!(n >= 1, "a join tree has at least one leaf");
    let generated = 2 * (n - 1);
    let mut bits = Vec::with_capacity(generated + 1);
    let mut r = 0u64;
    for i in 0..generated {
        let k = (generated - i) as u64;
        let p = leaf_probability(r, k).expect("r never exceeds the remaining bits");
        let leaf = rng.random::<f64>() < p;
        if leaf {
            r -= 1;
        } else {
            r += 1;
        }
        bits.push(!leaf);
    }
    bits.push(false);
    BitSequence(bits)
}

/// The unique shape whose preorder walk is `s`.
pub fn decode(s: &BitSequence) -> Shape {
    fn go(it: &mut std::slice::Iter<'_, bool>) -> Shape {
        match it.next() {
            Some(true) => {
                let l = go(it);
                let r = go(it);
                Shape::join(l, r)
            }
            Some(false) => Shape::Leaf,
            None => unreachable!("validated sequence"),
        }
    }
    go(&mut s.0.iter())
}

/// Parses and decodes in one step.
pub fn decode_str(s: &str) -> Result<Shape> {
    Ok(decode(&s.parse()?))
}

pub fn encode(shape: &Shape) -> BitSequence {
    fn go(s: &Shape, out: &mut Vec<bool>) {
        match s {
            Shape::Leaf => out.push(false),
            Shape::Join(l, r) => {
                out.push(true);
                go(l, out);
                go(r, out);
            }
        }
    }
    let mut bits = Vec::new();
    go(shape, &mut bits);
    BitSequence(bits)
}

/// A join ordering as `(shape encoding, leaf permutation)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JoinTreeEncoding {
    pub sequence: BitSequence,
    pub permutation: Vec<String>,
}

impl JoinTreeEncoding {
    pub fn new(sequence: BitSequence, permutation: Vec<String>) -> Result<Self> {
        if sequence.leaves() != permutation.len() {
            return Err(Error::MalformedEncoding(format!(
                "{} leaves but {} tables in the permutation",
                sequence.leaves(),
                permutation.len()
            )));
        }
        Ok(JoinTreeEncoding { sequence, permutation })
    }

    pub fn tree(&self) -> JoinTree {
        decode(&self.sequence).fill(&self.permutation)
    }
}

/// Random `(s, p)` for the tables of `graph`: a uniform shape and a uniform
/// permutation (Fisher-Yates).
pub fn sample_encoding<R: Rng + ?Sized>(graph: &JoinGraph, rng: &mut R) -> JoinTreeEncoding {
    let sequence = sample_bit_sequence(graph.len(), rng);
    let mut permutation: Vec<String> = graph.tables().iter().map(|t| t.name().to_string()).collect();
    permutation.shuffle(rng);
    JoinTreeEncoding { sequence, permutation }
}

pub fn sample_join_ordering<R: Rng + ?Sized>(graph: &JoinGraph, rng: &mut R) -> JoinTree {
    sample_encoding(graph, rng).tree()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TableRef;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    /// Exact probability of producing `s`, by walking the coin.
    fn sequence_probability(s: &BitSequence) -> f64 {
        let generated = s.bits().len() - 1;
        let mut r = 0u64;
        let mut prob = 1.0;
        for (i, &b) in s.bits()[..generated].iter().enumerate() {
            let p0 = leaf_probability(r, (generated - i) as u64).unwrap();
            if b {
                prob *= 1.0 - p0;
                r += 1;
            } else {
                prob *= p0;
                r -= 1;
            }
        }
        prob
    }

    #[test]
    fn leaf_probability_examples() {
        for k in 1..10 {
            assert_eq!(leaf_probability(0, k).unwrap(), 0.0);
        }
        assert_eq!(leaf_probability(1, 1).unwrap(), 1.0);
        assert_eq!(leaf_probability(1, 3).unwrap(), 0.5);
        assert!(leaf_probability(4, 3).is_err());
        assert!(leaf_probability(0, 0).is_err());
    }

    #[test]
    fn leaf_probability_range() {
        for k in 1..=64u64 {
            for r in 0..=k {
                let p = leaf_probability(r, k).unwrap();
                assert!((0.0..=1.0).contains(&p), "P({r},{k}) = {p}");
                assert_eq!(p == 0.0, r == 0);
            }
        }
    }

    #[test]
    fn three_leaf_shapes_each_have_probability_half() {
        let all = BitSequence::all(3);
        let strings: Vec<String> = all.iter().map(|s| s.to_string()).collect();
        assert_eq!(strings, vec!["10100", "11000"]);
        for s in &all {
            assert_eq!(sequence_probability(s), 0.5);
        }
    }

    #[test]
    fn coin_is_exactly_uniform_for_small_n() {
        let catalan = [1, 1, 2, 5, 14, 42, 132, 429];
        for n in 1..=8 {
            let all = BitSequence::all(n);
            assert_eq!(all.len(), catalan[n - 1]);
            let expected = 1.0 / all.len() as f64;
            for s in &all {
                assert!((sequence_probability(s) - expected).abs() < 1e-12, "{s}");
            }
        }
    }

    #[test]
    fn small_n_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(sample_bit_sequence(1, &mut rng).to_string(), "0");
        for _ in 0..100 {
            assert_eq!(sample_bit_sequence(2, &mut rng).to_string(), "100");
        }
        let mut counts: HashMap<String, usize> = HashMap::new();
        for _ in 0..20_000 {
            *counts.entry(sample_bit_sequence(3, &mut rng).to_string()).or_default() += 1;
        }
        assert_eq!(counts.len(), 2);
        let a = counts["10100"] as f64 / 20_000.0;
        assert!((a - 0.5).abs() < 0.02, "{a}");
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_str("100").unwrap().to_string(), "J(slot1, slot2)");
        assert_eq!(
            decode_str("1011000").unwrap().to_string(),
            "J(slot1, J(J(slot2, slot3), slot4))"
        );
        assert!(matches!(decode_str("1100"), Err(Error::MalformedEncoding(_))));
        assert!(matches!(decode_str("00100"), Err(Error::MalformedEncoding(_))));
        assert!(matches!(decode_str("11100"), Err(Error::MalformedEncoding(_))));
        assert!(matches!(decode_str("10x"), Err(Error::MalformedEncoding(_))));
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode(&Shape::Leaf).to_string(), "0");
        assert_eq!(encode(&Shape::join(Shape::Leaf, Shape::Leaf)).to_string(), "100");
        let s = Shape::join(
            Shape::Leaf,
            Shape::join(Shape::join(Shape::Leaf, Shape::Leaf), Shape::Leaf),
        );
        assert_eq!(encode(&s).to_string(), "1011000");
    }

    #[test]
    fn round_trip_all_sequences() {
        for n in 1..=6 {
            for s in BitSequence::all(n) {
                assert_eq!(encode(&decode(&s)), s);
            }
        }
    }

    #[test]
    fn encoding_fills_leaves_left_to_right() {
        let enc = JoinTreeEncoding::new(
            "1011000".parse().unwrap(),
            ["C", "B", "D", "A"].iter().map(|s| s.to_string()).collect(),
        )
        .unwrap();
        assert_eq!(enc.tree().to_string(), "J(C, J(J(B, D), A))");
        assert!(JoinTreeEncoding::new("100".parse().unwrap(), vec!["A".into()]).is_err());
    }

    #[test]
    fn single_table_ordering() {
        let g = JoinGraph::new("q", vec![TableRef::new("T")], vec![], vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_join_ordering(&g, &mut rng), JoinTree::leaf("T"));
    }
}
