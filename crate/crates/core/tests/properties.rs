mod common;

use maxmin_core::exact::{opt_maxmin, opt_truncated_maxsum};
use maxmin_core::format::{read_instance, write_instance};
use maxmin_core::greedy::{greedy_with_threshold, solve_approx, verify_trace, TieBreakPolicy};
use maxmin_core::itemset::all_masks;
use maxmin_core::valuation::{check_submodular_monotone, CheckMode};
use maxmin_core::{Allocation, Instance, ItemSet, SetFunction, Value};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

/// A random composition of the valuation variants on at most `max_n` items.
fn composed(seed: u64, max_n: usize) -> SetFunction {
    let mut r = rng(seed);
    let n = r.gen_range(1..=max_n.saturating_sub(1).max(1));
    let base = if r.gen_bool(0.5) {
        random_coverage(&mut r, n)
    } else {
        random_additive(&mut r, n)
    };
    match r.gen_range(0..5) {
        0 => base,
        1 => SetFunction::truncated(base, Value::ratio(r.gen_range(0..12), 2)).unwrap(),
        2 => SetFunction::augmented(base, Value::ratio(r.gen_range(0..6), 3)).unwrap(),
        3 => {
            let mut keep: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.6)).collect();
            if keep.is_empty() {
                keep.push(0);
            }
            keep.shuffle(&mut r);
            SetFunction::restricted(base, keep).unwrap()
        }
        _ => {
            let m = r.gen_range(1..=(max_n - n).max(1));
            SetFunction::disjoint_sum(vec![base, random_coverage(&mut r, m)])
        }
    }
}

/// Optimum by enumerating every assignment, `⊥` included when the instance
/// has constraints.
fn naive_opt(inst: &Instance) -> Value {
    let n = inst.items();
    let m = inst.players();
    let partial = !inst.matroids().is_empty() || inst.cardinality_cap().is_some();
    let choices = if partial { m + 1 } else { m };
    let mut best: Option<Value> = None;
    let mut code = vec![0usize; n];
    loop {
        let mut bundles = vec![ItemSet::empty(n); m];
        for (j, &p) in code.iter().enumerate() {
            if p < m {
                bundles[p].insert(j);
            }
        }
        let used: usize = bundles.iter().map(ItemSet::len).sum();
        let feasible = bundles.iter().all(|b| inst.is_feasible_bundle(b))
            && inst.cardinality_cap().map_or(true, |k| used <= k);
        if feasible {
            let min = bundles.iter().map(|b| inst.value(b)).min().unwrap();
            if best.as_ref().map_or(true, |b| min > *b) {
                best = Some(min);
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return best.unwrap();
            }
            code[i] += 1;
            if code[i] < choices {
                break;
            }
            code[i] = 0;
            i += 1;
        }
    }
}

fn random_policy(seed: u64, n: usize, m: usize) -> TieBreakPolicy {
    let mut r = rng(seed);
    let mut items: Vec<usize> = (0..n).collect();
    let mut players: Vec<usize> = (0..m).collect();
    items.shuffle(&mut r);
    players.shuffle(&mut r);
    let seed_players = r.gen_bool(0.5).then(|| {
        let mut s: Vec<usize> = (0..m).collect();
        s.shuffle(&mut r);
        s
    });
    TieBreakPolicy::ByPermutation {
        items,
        players,
        seed_players,
    }
}

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn compositions_are_normalized_monotone_submodular(seed in any::<u64>()) {
        let f = composed(seed, 10);
        let report = check_submodular_monotone(&f, CheckMode::Exhaustive).unwrap();
        prop_assert!(report.normalized && report.monotone && report.submodular);
        prop_assert!(f.evaluate(&ItemSet::empty(f.ground_size())).unwrap().is_zero());
    }

    #[test]
    fn truncation_is_pointwise_min(seed in any::<u64>(), cap in 0i64..20) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let f = random_coverage(&mut r, n);
        let cap = Value::ratio(cap, 2);
        let g = SetFunction::truncated(f.clone(), cap.clone()).unwrap();
        for mask in all_masks(n) {
            let s = ItemSet::from_mask(n, mask);
            prop_assert_eq!(g.evaluate(&s).unwrap(), Value::min_of(&cap, &f.evaluate(&s).unwrap()));
        }
    }

    #[test]
    fn augmentation_leaves_other_marginals(seed in any::<u64>(), t in 0i64..10) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=7);
        let g = SetFunction::augmented(random_coverage(&mut r, n), Value::from_int(t)).unwrap();
        let z = n;
        for mask in all_masks(n) {
            let s = ItemSet::from_mask(n + 1, mask);
            for j in (0..n).filter(|&j| !s.contains(j)) {
                prop_assert_eq!(g.marginal(j, &s).unwrap(), g.marginal(j, &s.with(z)).unwrap());
            }
        }
    }

    #[test]
    fn disjoint_sum_adds_parts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let f = random_coverage(&mut r, a);
        let g = random_additive(&mut r, b);
        let h = SetFunction::disjoint_sum(vec![f.clone(), g.clone()]);
        for mask in all_masks(a + b) {
            let s = ItemSet::from_mask(a + b, mask);
            let left = ItemSet::from_mask(a, mask & ((1 << a) - 1));
            let right = ItemSet::from_mask(b, mask >> a);
            prop_assert_eq!(h.evaluate(&s).unwrap(), f.evaluate(&left).unwrap() + g.evaluate(&right).unwrap());
        }
    }

    #[test]
    fn greedy_traces_replay_and_respect_the_order(seed in any::<u64>(), num in 0i64..40) {
        let inst = random_instance(seed, 8, 4);
        let policy = random_policy(seed.rotate_left(17), inst.items(), inst.players());
        let t = Value::ratio(num, 4);
        let (alloc, trace) = greedy_with_threshold(&inst, &t, &policy).unwrap();
        prop_assert_eq!(trace.replay(inst.items(), inst.players()), alloc.clone());
        let checked = verify_trace(&inst, &t, &policy, &trace);
        prop_assert!(checked.is_ok(), "{:?}", checked);
        prop_assert_eq!(checked.unwrap(), alloc.clone());
        // At most one step lifts a bundle across the threshold.
        let max_single = (0..inst.items()).map(|j| inst.singleton_value(j)).max().unwrap();
        for v in alloc.values(&inst) {
            prop_assert!(v <= &t + &max_single);
        }
    }

    #[test]
    fn exact_dominates_the_greedy(seed in any::<u64>()) {
        let inst = random_instance(seed, 7, 3);
        let (opt, witness) = opt_maxmin(&inst).unwrap();
        prop_assert_eq!(witness.min_value(&inst), opt.clone());
        let r = solve_approx(&inst, &Value::ratio(2, 5), &TieBreakPolicy::Lexicographic).unwrap();
        prop_assert!(r.achieved_min <= opt);
        let (g, _) = greedy_with_threshold(&inst, &opt, &TieBreakPolicy::Lexicographic).unwrap();
        prop_assert!(g.min_value(&inst) <= opt);
    }

    #[test]
    fn exact_matches_enumeration(seed in any::<u64>(), constrained in 0u8..3) {
        let base = random_instance(seed, 6, 3);
        let inst = match constrained {
            0 => base,
            1 => random_matroid_instance(seed, 6, 3),
            _ => {
                let k = rng(seed).gen_range(1..=base.items());
                base.with_cardinality_cap(Some(k)).unwrap()
            }
        };
        let (opt, witness) = opt_maxmin(&inst).unwrap();
        prop_assert_eq!(&opt, &naive_opt(&inst));
        prop_assert!(witness.bundles().iter().all(|b| inst.is_feasible_bundle(b)));
    }

    #[test]
    fn truncated_maxsum_is_optimal(seed in any::<u64>(), cap in 1i64..12) {
        let inst = random_instance(seed, 6, 3);
        let cap = Value::from_int(cap);
        let a = opt_truncated_maxsum(&inst, &cap).unwrap();
        let score = |a: &Allocation| -> Value {
            a.bundles().iter().map(|b| Value::min_of(&cap, &inst.value(b))).sum()
        };
        let n = inst.items();
        let m = inst.players();
        let mut best = Value::zero();
        for code in 0..(m as u64).pow(n as u32) {
            let mut c = code;
            let assignment: Vec<usize> = (0..n).map(|_| { let p = (c % m as u64) as usize; c /= m as u64; p }).collect();
            let alloc = Allocation::from_assignment(m, &assignment.iter().map(|&p| Some(p)).collect::<Vec<_>>());
            best = Value::max_of(&best, &score(&alloc));
        }
        prop_assert_eq!(score(&a), best);
        prop_assert!(a.unallocated(n).is_empty());
    }

    #[test]
    fn scaling_is_equivariant(seed in any::<u64>(), num in 1i64..9, den in 1i64..9) {
        let inst = random_instance(seed, 5, 3);
        let table = inst.valuation().value_table().unwrap();
        let f = SetFunction::table(inst.items(), table).unwrap();
        let inst = Instance::new(inst.labels().to_vec(), inst.players(), f).unwrap();
        let c = Value::ratio(num, den);
        let scaled = inst.scaled(&c);
        let (opt, a) = opt_maxmin(&inst).unwrap();
        let (opt_c, a_c) = opt_maxmin(&scaled).unwrap();
        prop_assert_eq!(&opt * &c, opt_c);
        // Each witness is optimal for the other instance too.
        prop_assert_eq!(a_c.min_value(&inst), opt.clone());
        prop_assert_eq!(a.min_value(&scaled), &opt * &c);
    }

    #[test]
    fn instances_round_trip(seed in any::<u64>(), with_matroids in any::<bool>()) {
        let inst = if with_matroids {
            random_matroid_instance(seed, 8, 4)
        } else {
            random_instance(seed, 8, 4)
        };
        let text = write_instance(&inst);
        let back = read_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_instance(&back), text);
    }

    #[test]
    fn composed_valuations_round_trip(seed in any::<u64>()) {
        let f = composed(seed, 8);
        let inst = Instance::new(Instance::default_labels(f.ground_size()), 2, f).unwrap();
        let text = write_instance(&inst);
        let back = read_instance(&text).unwrap();
        prop_assert_eq!(write_instance(&back), text);
        prop_assert_eq!(back.valuation().value_table().unwrap(), inst.valuation().value_table().unwrap());
    }

    #[test]
    fn rational_values_round_trip(n in any::<i64>(), d in 1i64..i64::MAX) {
        let v = Value::ratio(n, d);
        prop_assert_eq!(v.to_string().parse::<Value>().unwrap(), v);
    }
}
