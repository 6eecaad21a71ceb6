//! Uniform join tree shapes from biased-coin bit sequences.

use std::collections::BTreeMap;

use qobench::encoding::{decode, encode, sample_bit_sequence, BitSequence};
use qobench::model::Shape;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bits(s: &BitSequence) -> String {
    s.bits().iter().map(|b| if *b { '1' } else { '0' }).collect()
}

fn main() {
    let n = 4;
    let shapes = Shape::all(n);
    println!("{} shapes with {n} leaves", shapes.len());
    for s in &shapes {
        assert_eq!(&decode(&encode(s)), s);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = 50_000;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..draws {
        *counts.entry(bits(&sample_bit_sequence(n, &mut rng))).or_default() += 1;
    }
    for (seq, c) in &counts {
        println!("{seq}  {:.4}", *c as f64 / draws as f64);
    }
    println!("expected {:.4} each", 1.0 / shapes.len() as f64);
}
