#![allow(dead_code)]

use maxmin_core::generators::{gen_random, RandomKind};
use maxmin_core::itemset::ItemSet;
use maxmin_core::{Instance, Matroid, SetFunction, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn kind_for(i: u64) -> RandomKind {
    if i % 2 == 0 {
        RandomKind::Additive
    } else {
        RandomKind::Coverage
    }
}

/// Random instance with `1 ≤ m ≤ max_m` and `m ≤ n ≤ max_n`.
pub fn random_instance(seed: u64, max_n: usize, max_m: usize) -> Instance {
    let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let m = r.gen_range(1..=max_m);
    let n = r.gen_range(m.max(1)..=max_n);
    let bound = r.gen_range(2..=9);
    gen_random(kind_for(seed), n, m, seed, bound).unwrap()
}

pub fn random_matroid(r: &mut ChaCha8Rng, n: usize) -> Matroid {
    if r.gen_bool(0.5) {
        Matroid::uniform(n, r.gen_range(1..=n))
    } else {
        let blocks_count = r.gen_range(1..=3.min(n));
        let mut blocks = vec![Vec::new(); blocks_count];
        for j in 0..n {
            blocks[r.gen_range(0..blocks_count)].push(j);
        }
        blocks.retain(|b| !b.is_empty());
        let caps = blocks.iter().map(|_| r.gen_range(1..=2)).collect();
        Matroid::partition(n, blocks, caps).unwrap()
    }
}

/// Random instance carrying one or two uniform or partition matroids.
pub fn random_matroid_instance(seed: u64, max_n: usize, max_m: usize) -> Instance {
    let base = random_instance(seed, max_n, max_m);
    let mut r = rng(seed.wrapping_mul(31).wrapping_add(7));
    let count = r.gen_range(1..=2);
    let ms = (0..count).map(|_| random_matroid(&mut r, base.items())).collect();
    base.with_matroids(ms).unwrap()
}

/// Random monotone submodular coverage function on `n` items.
pub fn random_coverage(r: &mut ChaCha8Rng, n: usize) -> SetFunction {
    let u = r.gen_range(1..=n + 2);
    let elements = (0..u)
        .map(|e| (format!("e{e}"), Value::ratio(r.gen_range(1..=6), r.gen_range(1..=3))))
        .collect();
    let covers = (0..n)
        .map(|_| (0..u).filter(|_| r.gen_bool(0.4)).collect())
        .collect();
    SetFunction::coverage(elements, covers).unwrap()
}

pub fn random_additive(r: &mut ChaCha8Rng, n: usize) -> SetFunction {
    SetFunction::additive((0..n).map(|_| Value::from_int(r.gen_range(0..=5))).collect()).unwrap()
}

pub fn set(n: usize, items: &[usize]) -> ItemSet {
    ItemSet::from_items(n, items.iter().copied()).unwrap()
}
