//! Instance families: the small integrality-gap instance, the additive
//! Sylvester family that is hard for the greedy, its submodular lift, and
//! seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::greedy::{greedy_with_threshold, TieBreakPolicy};
use crate::instance::{Allocation, Instance};
use crate::valuation::{check_submodular_monotone, CheckMode, SetFunction};
use crate::value::Value;

/// Six items `j1..j3, k1..k3` and three players. Singletons are worth 2,
/// same-letter pairs 4, mixed pairs 3, and any three or more items 4.
pub fn gen_gap_instance() -> Instance {
    let labels: Vec<String> = ["j1", "j2", "j3", "k1", "k2", "k3"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let values = (0u64..64)
        .map(|mask| match mask.count_ones() {
            0 => Value::zero(),
            1 => Value::from_int(2),
            2 => {
                let js = (mask & 0b000111).count_ones();
                if js == 1 {
                    Value::from_int(3)
                } else {
                    Value::from_int(4)
                }
            }
            _ => Value::from_int(4),
        })
        .collect();
    let f = SetFunction::table(6, values).expect("valid table");
    let report = check_submodular_monotone(&f, CheckMode::Exhaustive).expect("six items");
    assert!(report.submodular && report.monotone, "gap instance must be submodular");
    Instance::new(labels, 3, f).expect("valid instance")
}

/// `s_1 = 2`, `s_n = 1 + s_1 ⋯ s_{n-1}`.
pub fn sylvester(count: usize) -> Vec<u64> {
    let mut s: Vec<u64> = Vec::with_capacity(count);
    let mut prod: u64 = 1;
    for _ in 0..count {
        let next = prod + 1;
        s.push(next);
        prod = prod.saturating_mul(next);
    }
    s
}

/// `Σ_{i≤N} 1/(s_i - 1)`.
pub fn sylvester_sum(s: &[u64]) -> Value {
    s.iter().map(|&x| Value::ratio(1, x as i64 - 1)).sum()
}

/// `(2 + S) / (4 + 3S)` for `S = Σ_{i≥1} 1/(s_i - 1)`, the limit of the
/// Sylvester family's ratio. The series converges after a few terms in
/// double precision.
pub fn sylvester_limit_ratio() -> f64 {
    let mut s = 0.0f64;
    let mut prod = 1.0f64;
    for _ in 0..8 {
        let next = prod + 1.0;
        s += 1.0 / (next - 1.0);
        prod *= next;
    }
    (2.0 + s) / (4.0 + 3.0 * s)
}

/// The additive family together with the data the lift needs.
#[derive(Clone, Debug)]
pub struct SylvesterFamily {
    pub n_terms: usize,
    pub s: Vec<u64>,
    pub delta: Value,
    pub instance: Instance,
    pub policy: TieBreakPolicy,
    /// Threshold at which the greedy with `policy` produces
    /// `greedy_reference`.
    pub threshold: Value,
    /// The listed greedy allocation; every item is allocated.
    pub greedy_reference: Allocation,
    /// Partial allocation with minimum `3 - δ`; `unallocated_item` is left out.
    pub partial_reference: Allocation,
    pub unallocated_item: usize,
}

/// Largest supported number of Sylvester terms.
pub const MAX_SYLVESTER_TERMS: usize = 6;

/// Additive instance with `m = 2(s_N - 1)` players and items
/// `m/2 × (2+δ)`, `m × (3-δ)/2`, `m/2 × (1+3δ)/(2(s_i-1))` for `i < N` and
/// `m/2 + 1 × (1+3δ)/(2(s_N-1))`, where `δ = (2-S)/(4+3S)`.
///
/// Items are indexed in that order. Players are indexed as in the greedy
/// listing: first the `m/2` players that receive `2+δ`, then for each
/// `i < N` the `m/(2 s_i)` players of group `i`, then the single group-`N`
/// player. Lexicographic tie-breaking at threshold
/// `2 + δ + (1+3δ)/(2(s_N-1))` reproduces the listing.
pub fn gen_sylvester_additive(n_terms: usize) -> Result<SylvesterFamily> {
    if n_terms == 0 || n_terms > MAX_SYLVESTER_TERMS {
        return Err(Error::Usage(format!(
            "number of Sylvester terms must lie in 1..={MAX_SYLVESTER_TERMS}, got {n_terms}"
        )));
    }
    let s = sylvester(n_terms);
    let big_s = sylvester_sum(&s);
    let two = Value::from_int(2);
    let three = Value::from_int(3);
    let delta = (&two - &big_s) / (Value::from_int(4) + &three * &big_s);
    let s_n = *s.last().expect("non-empty");
    let m = 2 * (s_n as usize - 1);
    let half = m / 2;

    // Σ_{i<N} 1/s_i = 1 - 1/(s_N - 1) makes the medium items come out even.
    let lhs: Value = s[..n_terms - 1].iter().map(|&x| Value::ratio(1, x as i64)).sum();
    assert_eq!(lhs, Value::one() - Value::ratio(1, s_n as i64 - 1));

    let big = &two + &delta;
    let medium = (&three - &delta) / &two;
    let small_numer = Value::one() + &three * &delta;
    let small: Vec<Value> = s
        .iter()
        .map(|&x| &small_numer / Value::from_int(2 * (x as i64 - 1)))
        .collect();

    let mut weights = Vec::new();
    let mut labels = Vec::new();
    for k in 0..half {
        weights.push(big.clone());
        labels.push(format!("big{k}"));
    }
    for k in 0..m {
        weights.push(medium.clone());
        labels.push(format!("mid{k}"));
    }
    let mut group_start = Vec::new();
    for (i, w) in small.iter().enumerate() {
        group_start.push(weights.len());
        let count = if i + 1 == n_terms { half + 1 } else { half };
        for k in 0..count {
            weights.push(w.clone());
            labels.push(format!("g{}_{k}", i + 1));
        }
    }
    let n = weights.len();
    let f = SetFunction::additive(weights)?;
    let instance = Instance::new(labels, m, f)?;

    // Greedy listing.
    let mut greedy = Allocation::empty(n, m);
    let mid = |k: usize| half + k;
    for p in 0..half {
        greedy.give(p, p);
        greedy.give(p, mid(half + p));
    }
    let mut player = half;
    let mut next_mid = 0;
    for (i, &si) in s.iter().enumerate() {
        let players = if i + 1 == n_terms { 1 } else { m / (2 * si as usize) };
        let mut item = group_start[i];
        for _ in 0..players {
            greedy.give(player, mid(next_mid));
            next_mid += 1;
            for _ in 0..si {
                greedy.give(player, item);
                item += 1;
            }
            player += 1;
        }
    }
    assert_eq!(player, m);
    assert_eq!(next_mid, half);
    assert!(greedy.unallocated(n).is_empty());

    // Partial reference allocation.
    let mut partial = Allocation::empty(n, m);
    for p in 0..half {
        partial.give(p, mid(2 * p));
        partial.give(p, mid(2 * p + 1));
    }
    for p in 0..half {
        let q = half + p;
        partial.give(q, p);
        for &start in &group_start {
            partial.give(q, start + p);
        }
    }
    let unallocated_item = n - 1;
    assert_eq!(partial.unallocated(n).to_vec(), vec![unallocated_item]);

    let threshold = &big + small.last().expect("non-empty");
    Ok(SylvesterFamily {
        n_terms,
        s,
        delta,
        instance,
        policy: TieBreakPolicy::Lexicographic,
        threshold,
        greedy_reference: greedy,
        partial_reference: partial,
        unallocated_item,
    })
}

/// The submodular instance built from an additive family.
#[derive(Clone, Debug)]
pub struct LiftedInstance {
    pub instance: Instance,
    pub policy: TieBreakPolicy,
    pub threshold: Value,
    pub copies: usize,
    /// Value of each gadget element; divides `2 + δ`.
    pub s_prime: Value,
    pub gadget_size: usize,
    pub special_player: usize,
    pub z_star: usize,
    /// Allocation in which every player reaches at least 5.
    pub reference: Allocation,
}

/// Copies the additive instance `⌈5 / f(j)⌉` times (`j` the item left out by
/// the partial reference), and adds a coverage gadget: `N = (2+δ)/s'`
/// elements of weight `s'`, one item `z^p_i` covering element `i` for each
/// copied player `p`, and an item `z*` covering all elements. One extra
/// player `p*` is added.
///
/// `s'` is the largest `(2+δ)/k` not exceeding the smallest item value.
/// Fails with a construction error if either precondition on the additive
/// family does not hold.
pub fn lift_to_submodular(base: &SylvesterFamily) -> Result<LiftedInstance> {
    let inst = &base.instance;
    let n = inst.items();
    let m = inst.players();
    let SetFunction::Additive(weights) = inst.valuation() else {
        return Err(Error::Construction("the lift needs an additive instance".into()));
    };
    let two_delta = Value::from_int(2) + &base.delta;
    let three_delta = Value::from_int(3) - &base.delta;

    let j = base.unallocated_item;
    let fj = inst.singleton_value(j);
    let partial = &base.partial_reference;
    if !fj.is_positive()
        || partial.owner(j).is_some()
        || partial.min_value(inst) < three_delta
    {
        return Err(Error::Construction(
            "first precondition fails: need a partial allocation with minimum at least 3 - δ leaving out an item of positive value".into(),
        ));
    }
    let (greedy, _) = greedy_with_threshold(inst, &base.threshold, &base.policy)?;
    if base.threshold <= two_delta || !greedy.unallocated(n).is_empty() {
        return Err(Error::Construction(
            "second precondition fails: greedy above 2 + δ must allocate every item".into(),
        ));
    }

    let copies_v = (Value::from_int(5) / &fj).ceil();
    let copies: usize = copies_v
        .try_into()
        .map_err(|_| Error::Construction("too many copies".into()))?;
    let min_item = weights
        .iter()
        .filter(|w| w.is_positive())
        .min()
        .cloned()
        .ok_or_else(|| Error::Construction("all items are worth zero".into()))?;
    let k = (&two_delta / &min_item).ceil();
    let gadget_size: usize = k
        .try_into()
        .map_err(|_| Error::Construction("gadget too large".into()))?;
    let s_prime = &two_delta / Value::from_int(gadget_size as i64);

    let copy_players = copies * m;
    let additive_items = copies * n;
    let z_star = additive_items;
    let z_item = |p: usize, i: usize| z_star + 1 + p * gadget_size + i;
    let total_items = z_item(copy_players, 0);

    let mut labels = Vec::with_capacity(total_items);
    let mut copied = Vec::with_capacity(additive_items);
    for c in 0..copies {
        for (jj, w) in weights.iter().enumerate() {
            labels.push(format!("c{c}_{}", inst.label(jj)));
            copied.push(w.clone());
        }
    }
    labels.push("z*".to_string());
    let mut covers = vec![(0..gadget_size).collect::<Vec<usize>>()];
    for p in 0..copy_players {
        for i in 0..gadget_size {
            labels.push(format!("z{p}_{i}"));
            covers.push(vec![i]);
        }
    }
    let elements: Vec<(String, Value)> = (0..gadget_size)
        .map(|i| (format!("e{i}"), s_prime.clone()))
        .collect();
    let gadget = SetFunction::coverage(elements, covers)?;
    let f = SetFunction::disjoint_sum(vec![SetFunction::additive(copied)?, gadget]);
    let report = check_submodular_monotone(
        &f,
        CheckMode::Sampled {
            samples: 200,
            seed: 0x5eed,
        },
    )?;
    if !report.submodular || !report.monotone {
        return Err(Error::Construction("lifted function failed the sampled check".into()));
    }
    let players = copy_players + 1;
    let special = copy_players;
    let instance = Instance::new(labels, players, f)?;

    // Player c·m + p is copy c of base player p.
    let base_ranks = base.policy.ranks(n, m)?;
    let expand = |order: &[usize]| -> Vec<usize> {
        order
            .iter()
            .flat_map(|&p| (0..copies).map(move |c| c * m + p))
            .collect()
    };
    let mut player_order = expand(&base_ranks.player_order);
    player_order.push(special);
    let bigger = weights.iter().filter(|w| **w >= two_delta).count() * copies;
    let mut seed_order = expand(&base_ranks.seed_order);
    seed_order.insert(bigger.min(seed_order.len()), special);
    let mut item_order: Vec<usize> = Vec::with_capacity(total_items);
    for c in 0..copies {
        let mut by_rank: Vec<usize> = (0..n).collect();
        by_rank.sort_by_key(|&jj| base_ranks.item[jj]);
        item_order.extend(by_rank.into_iter().map(|jj| c * n + jj));
    }
    item_order.extend(z_star..total_items);
    let policy = TieBreakPolicy::ByPermutation {
        items: item_order,
        players: player_order,
        seed_players: Some(seed_order),
    };

    let mut reference = Allocation::empty(total_items, players);
    for c in 0..copies {
        for p in 0..m {
            let q = c * m + p;
            for jj in partial.bundle(p).iter() {
                reference.give(q, c * n + jj);
            }
            for i in 0..gadget_size {
                reference.give(q, z_item(q, i));
            }
        }
        reference.give(special, c * n + j);
    }
    reference.give(special, z_star);

    Ok(LiftedInstance {
        instance,
        policy,
        threshold: base.threshold.clone(),
        copies,
        s_prime,
        gadget_size,
        special_player: special,
        z_star,
        reference,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomKind {
    Additive,
    Coverage,
}

/// Seeded random instance. Additive weights are integers in `1..=bound`.
/// Coverage instances use a universe of `2n` elements with weights `a/b`,
/// `a ∈ 1..=bound`, `b ∈ {1, 2}`; each item covers a random non-empty set
/// of elements.
pub fn gen_random(kind: RandomKind, n: usize, m: usize, seed: u64, bound: u32) -> Result<Instance> {
    if bound == 0 {
        return Err(Error::Usage("weight bound must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = match kind {
        RandomKind::Additive => SetFunction::additive(
            (0..n)
                .map(|_| Value::from_int(rng.gen_range(1..=bound) as i64))
                .collect(),
        )?,
        RandomKind::Coverage => {
            let u = 2 * n;
            let elements: Vec<(String, Value)> = (0..u)
                .map(|e| {
                    let a = rng.gen_range(1..=bound) as i64;
                    let b = rng.gen_range(1..=2);
                    (format!("e{e}"), Value::ratio(a, b))
                })
                .collect();
            let covers: Vec<Vec<usize>> = (0..n)
                .map(|_| {
                    let mut c: Vec<usize> = (0..u).filter(|_| rng.gen_bool(0.3)).collect();
                    if c.is_empty() {
                        c.push(rng.gen_range(0..u));
                    }
                    c
                })
                .collect();
            SetFunction::coverage(elements, covers)?
        }
    };
    Instance::new(Instance::default_labels(n), m, f)
}
