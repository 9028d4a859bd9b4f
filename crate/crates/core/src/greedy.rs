//! Truncated max-sum greedy.
//!
//! Every player is first seeded with one of the `m` largest singletons.
//! Afterwards the pair `(j, p)` with the largest marginal `Δ(j | A_p)` among
//! players still strictly below the threshold is allocated, until no item or
//! no eligible player remains. Ties follow a [`TieBreakPolicy`], so a run is
//! a deterministic function of `(instance, threshold, policy)`.
//!
//! The search for the best pair is lazy: each remaining item sits in a heap
//! keyed by a stale upper bound on its best marginal. Bundles only grow and
//! players only leave the eligible set, so bounds never increase and the
//! popped item is the true maximum once its refreshed value still beats the
//! next key.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance};
use crate::itemset::ItemSet;
use crate::valuation::Bundle;
use crate::value::Value;

/// Total order on `(item, player)` pairs used to break ties between equal
/// marginals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TieBreakPolicy {
    /// Smallest item index first, then smallest player index.
    Lexicographic,
    /// `items` and `players` list indices from highest to lowest priority.
    /// `seed_players`, when present, is the player order used to hand out
    /// the seeding items; otherwise `players` is used.
    ByPermutation {
        items: Vec<usize>,
        players: Vec<usize>,
        seed_players: Option<Vec<usize>>,
    },
}

/// Rank tables derived from a policy; lower rank means higher priority.
#[derive(Clone, Debug)]
pub(crate) struct Ranks {
    pub item: Vec<usize>,
    pub player: Vec<usize>,
    pub player_order: Vec<usize>,
    pub seed_order: Vec<usize>,
}

fn check_permutation(p: &[usize], n: usize, what: &str) -> Result<Vec<usize>> {
    if p.len() != n {
        return Err(Error::Usage(format!(
            "{what} permutation has {} entries, expected {n}",
            p.len()
        )));
    }
    let mut rank = vec![usize::MAX; n];
    for (r, &x) in p.iter().enumerate() {
        if x >= n || rank[x] != usize::MAX {
            return Err(Error::Usage(format!("{what} permutation is not a permutation of 0..{n}")));
        }
        rank[x] = r;
    }
    Ok(rank)
}

impl TieBreakPolicy {
    pub(crate) fn ranks(&self, items: usize, players: usize) -> Result<Ranks> {
        match self {
            TieBreakPolicy::Lexicographic => Ok(Ranks {
                item: (0..items).collect(),
                player: (0..players).collect(),
                player_order: (0..players).collect(),
                seed_order: (0..players).collect(),
            }),
            TieBreakPolicy::ByPermutation {
                items: ip,
                players: pp,
                seed_players,
            } => {
                let item = check_permutation(ip, items, "item")?;
                let player = check_permutation(pp, players, "player")?;
                let seed_order = match seed_players {
                    Some(sp) => {
                        check_permutation(sp, players, "seeding player")?;
                        sp.clone()
                    }
                    None => pp.clone(),
                };
                Ok(Ranks {
                    item,
                    player,
                    player_order: pp.clone(),
                    seed_order,
                })
            }
        }
    }

    /// The policy induced on a sub-instance whose item `i` is
    /// `kept_items[i]` and whose player `r` is `kept_players[r]`.
    pub fn restrict(&self, kept_items: &[usize], kept_players: &[usize]) -> TieBreakPolicy {
        let project = |order: &[usize], kept: &[usize]| -> Vec<usize> {
            order
                .iter()
                .filter_map(|x| kept.iter().position(|k| k == x))
                .collect()
        };
        match self {
            TieBreakPolicy::Lexicographic
                if kept_items.windows(2).all(|w| w[0] < w[1])
                    && kept_players.windows(2).all(|w| w[0] < w[1]) =>
            {
                TieBreakPolicy::Lexicographic
            }
            TieBreakPolicy::Lexicographic => {
                let mut items: Vec<usize> = (0..kept_items.len()).collect();
                items.sort_by_key(|&i| kept_items[i]);
                let mut players: Vec<usize> = (0..kept_players.len()).collect();
                players.sort_by_key(|&r| kept_players[r]);
                TieBreakPolicy::ByPermutation {
                    items,
                    players,
                    seed_players: None,
                }
            }
            TieBreakPolicy::ByPermutation {
                items,
                players,
                seed_players,
            } => TieBreakPolicy::ByPermutation {
                items: project(items, kept_items),
                players: project(players, kept_players),
                seed_players: seed_players.as_ref().map(|s| project(s, kept_players)),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyStep {
    pub item: usize,
    pub player: usize,
    /// `Δ(item | A_player)` at the moment of allocation; for seeding steps
    /// this is the singleton value.
    pub marginal: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyTrace {
    pub threshold: Value,
    pub seeding: Vec<GreedyStep>,
    pub steps: Vec<GreedyStep>,
}

impl GreedyTrace {
    pub fn all_steps(&self) -> impl Iterator<Item = &GreedyStep> {
        self.seeding.iter().chain(&self.steps)
    }

    /// Rebuilds the allocation by replaying the steps.
    pub fn replay(&self, items: usize, players: usize) -> Allocation {
        let mut a = Allocation::empty(items, players);
        for s in self.all_steps() {
            a.give(s.player, s.item);
        }
        a
    }

    /// One line per step: index, item label, player, marginal.
    pub fn render(&self, inst: &Instance) -> String {
        let mut out = format!("threshold {}\n", self.threshold);
        for (i, s) in self.seeding.iter().enumerate() {
            out.push_str(&format!(
                "seed {i} item {} player {} marginal {}\n",
                inst.label(s.item),
                s.player,
                s.marginal
            ));
        }
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "step {i} item {} player {} marginal {}\n",
                inst.label(s.item),
                s.player,
                s.marginal
            ));
        }
        out
    }
}

#[derive(PartialEq, Eq)]
struct HeapEntry {
    bound: Value,
    rank: usize,
    item: usize,
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .cmp(&other.bound)
            .then_with(|| other.rank.cmp(&self.rank))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Items sorted by `(f(j) desc, item rank)`.
fn singleton_order(inst: &Instance, ranks: &Ranks) -> Vec<(usize, Value)> {
    let mut items: Vec<(usize, Value)> = (0..inst.items())
        .map(|j| (j, inst.singleton_value(j)))
        .collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then(ranks.item[a.0].cmp(&ranks.item[b.0])));
    items
}

fn run(
    inst: &Instance,
    threshold: &Value,
    policy: &TieBreakPolicy,
    cap: Option<usize>,
) -> Result<(Allocation, GreedyTrace)> {
    if !inst.matroids().is_empty() {
        return Err(Error::Unsupported("greedy does not support matroids".into()));
    }
    if threshold.is_negative() {
        return Err(Error::Usage(format!("threshold must be non-negative, got {threshold}")));
    }
    let n = inst.items();
    let m = inst.players();
    let ranks = policy.ranks(n, m)?;
    let limit = cap.unwrap_or(n).min(n);
    let f = inst.valuation();

    let mut bundles: Vec<Bundle> = (0..m).map(|_| Bundle::new(f)).collect();
    let mut trace = GreedyTrace {
        threshold: threshold.clone(),
        seeding: Vec::new(),
        steps: Vec::new(),
    };
    let mut available = ItemSet::full(n);

    let order = singleton_order(inst, &ranks);
    for ((j, value), &p) in order.iter().zip(&ranks.seed_order).take(limit) {
        bundles[p].insert(*j);
        available.remove(*j);
        trace.seeding.push(GreedyStep {
            item: *j,
            player: p,
            marginal: value.clone(),
        });
    }
    let mut allocated = trace.seeding.len();

    let mut eligible: Vec<usize> = ranks
        .player_order
        .iter()
        .copied()
        .filter(|&p| bundles[p].value() < threshold)
        .collect();

    let mut heap: BinaryHeap<HeapEntry> = order
        .iter()
        .filter(|(j, _)| available.contains(*j))
        .map(|(j, v)| HeapEntry {
            bound: v.clone(),
            rank: ranks.item[*j],
            item: *j,
        })
        .collect();

    while allocated < limit && !eligible.is_empty() {
        let Some(top) = heap.pop() else { break };
        let j = top.item;
        let mut best: Option<(Value, usize)> = None;
        for &p in &eligible {
            let g = bundles[p].marginal(j);
            if best.as_ref().map_or(true, |(b, _)| g > *b) {
                best = Some((g, p));
            }
        }
        let (gain, p) = best.expect("eligible set is non-empty");
        let refreshed = HeapEntry {
            bound: gain,
            rank: top.rank,
            item: j,
        };
        if heap.peek().map_or(false, |next| *next > refreshed) {
            heap.push(refreshed);
            continue;
        }
        let gain = refreshed.bound;
        bundles[p].insert(j);
        available.remove(j);
        allocated += 1;
        trace.steps.push(GreedyStep {
            item: j,
            player: p,
            marginal: gain,
        });
        if bundles[p].value() >= threshold {
            eligible.retain(|&q| q != p);
        }
    }

    let alloc = Allocation::from_bundles(n, bundles.iter().map(|b| b.items().clone()).collect())?;
    Ok((alloc, trace))
}

/// One run of the greedy with `threshold` in place of `α·OPT`.
pub fn greedy_with_threshold(
    inst: &Instance,
    threshold: &Value,
    policy: &TieBreakPolicy,
) -> Result<(Allocation, GreedyTrace)> {
    run(inst, threshold, policy, None)
}

/// Greedy that stops once the instance's cardinality cap is reached;
/// seeding counts toward the cap.
pub fn greedy_cardinality(
    inst: &Instance,
    threshold: &Value,
    policy: &TieBreakPolicy,
) -> Result<(Allocation, GreedyTrace)> {
    let Some(k) = inst.cardinality_cap() else {
        return Err(Error::Usage("instance has no cardinality cap".into()));
    };
    if k < 1 {
        return Err(Error::Usage("cardinality cap must be at least 1".into()));
    }
    run(inst, threshold, policy, Some(k))
}

/// Result of removing the items worth at least the threshold.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// `None` when no player is left, or when the cardinality cap is used up
    /// by the fixed items.
    pub instance: Option<Instance>,
    /// Players of the reduced instance.
    pub players: usize,
    /// Reduced item `i` is original item `kept_items[i]`.
    pub kept_items: Vec<usize>,
    /// Reduced player `r` is original player `kept_players[r]`.
    pub kept_players: Vec<usize>,
    /// `(player, item)` pairs in original indices.
    pub fixed: Vec<(usize, usize)>,
    pub policy: TieBreakPolicy,
}

impl Reduction {
    fn identity(inst: &Instance, policy: &TieBreakPolicy) -> Reduction {
        Reduction {
            instance: Some(inst.clone()),
            players: inst.players(),
            kept_items: (0..inst.items()).collect(),
            kept_players: (0..inst.players()).collect(),
            fixed: Vec::new(),
            policy: policy.clone(),
        }
    }

    /// Re-attaches the fixed items to an allocation of the reduced instance.
    pub fn lift(&self, original: &Instance, reduced: Option<&Allocation>) -> Allocation {
        let mut a = Allocation::empty(original.items(), original.players());
        for &(p, j) in &self.fixed {
            a.give(p, j);
        }
        if let Some(r) = reduced {
            for (rp, b) in r.bundles().iter().enumerate() {
                for i in b.iter() {
                    a.give(self.kept_players[rp], self.kept_items[i]);
                }
            }
        }
        a
    }

    pub fn lift_step(&self, s: &GreedyStep) -> GreedyStep {
        GreedyStep {
            item: self.kept_items[s.item],
            player: self.kept_players[s.player],
            marginal: s.marginal.clone(),
        }
    }
}

/// Removes every item with `f(j) ≥ threshold` and gives each to its own
/// player. If there are more such items than players, the `m` largest are
/// kept (ties by the policy) and the remaining items are discarded.
///
/// Fixed players are the first ones in the policy's player order.
pub fn preprocess_big_items(
    inst: &Instance,
    threshold: &Value,
    policy: &TieBreakPolicy,
) -> Result<Reduction> {
    if !threshold.is_positive() {
        return Err(Error::Usage(format!("threshold must be positive, got {threshold}")));
    }
    let n = inst.items();
    let m = inst.players();
    let ranks = policy.ranks(n, m)?;
    let order = singleton_order(inst, &ranks);
    let big: Vec<usize> = order
        .iter()
        .filter(|(_, v)| v >= threshold)
        .map(|(j, _)| *j)
        .collect();
    if big.is_empty() {
        return Ok(Reduction::identity(inst, policy));
    }
    let slots = match inst.cardinality_cap() {
        Some(k) => m.min(k),
        None => m,
    };
    let fixed: Vec<(usize, usize)> = ranks
        .player_order
        .iter()
        .copied()
        .zip(big.iter().copied())
        .take(slots)
        .collect();
    let remaining_players = m - fixed.len();
    let kept_players: Vec<usize> = ranks.player_order[fixed.len()..].to_vec();
    let mut kept_players_sorted = kept_players.clone();
    kept_players_sorted.sort_unstable();
    let cap_left = inst.cardinality_cap().map(|k| k - fixed.len());
    let exhausted = remaining_players == 0 || cap_left == Some(0);
    let kept_items: Vec<usize> = if exhausted {
        Vec::new()
    } else {
        (0..n).filter(|j| !big.contains(j)).collect()
    };
    let instance = if exhausted {
        None
    } else {
        let reduced = inst.restrict(&kept_items, remaining_players)?;
        let cap = cap_left.filter(|&k| k < kept_items.len());
        Some(reduced.with_cardinality_cap(cap)?)
    };
    let sub_policy = policy.restrict(&kept_items, &kept_players_sorted);
    Ok(Reduction {
        instance,
        players: remaining_players,
        kept_items,
        kept_players: kept_players_sorted,
        fixed,
        policy: sub_policy,
    })
}

/// One threshold tried by [`solve_approx`]: preprocessing followed by the
/// greedy on the reduced instance.
#[derive(Clone, Debug)]
pub struct Attempt {
    pub threshold: Value,
    pub reduction: Reduction,
    /// Greedy output on the reduced instance, in reduced indices.
    pub reduced: Option<(Allocation, GreedyTrace)>,
    /// Allocation of the original instance.
    pub allocation: Allocation,
    pub min_value: Value,
}

impl Attempt {
    pub fn succeeded(&self) -> bool {
        self.min_value >= self.threshold
    }

    /// Trace steps in original indices, fixed items excluded.
    pub fn lifted_trace(&self) -> Option<GreedyTrace> {
        self.reduced.as_ref().map(|(_, t)| GreedyTrace {
            threshold: t.threshold.clone(),
            seeding: t.seeding.iter().map(|s| self.reduction.lift_step(s)).collect(),
            steps: t.steps.iter().map(|s| self.reduction.lift_step(s)).collect(),
        })
    }
}

/// Preprocesses at `threshold` and runs the greedy (capped when the
/// instance has a cardinality cap). A zero threshold skips preprocessing.
pub fn attempt(inst: &Instance, threshold: &Value, policy: &TieBreakPolicy) -> Result<Attempt> {
    let reduction = if threshold.is_positive() {
        preprocess_big_items(inst, threshold, policy)?
    } else {
        Reduction::identity(inst, policy)
    };
    let reduced = match &reduction.instance {
        Some(r) if r.cardinality_cap().is_some() => {
            Some(greedy_cardinality(r, threshold, &reduction.policy)?)
        }
        Some(r) => Some(greedy_with_threshold(r, threshold, &reduction.policy)?),
        None => None,
    };
    let allocation = reduction.lift(inst, reduced.as_ref().map(|(a, _)| a));
    let min_value = allocation.min_value(inst);
    Ok(Attempt {
        threshold: threshold.clone(),
        reduction,
        reduced,
        allocation,
        min_value,
    })
}

/// Candidate values for `OPT`, descending: all distinct `f(S)` when
/// `n ≤ 20`, otherwise the integers `0..=f(J)` after clearing denominators
/// of the singleton values, rescaled.
pub fn approx_candidates(inst: &Instance) -> Result<Vec<Value>> {
    const GRID_ITEMS: usize = 20;
    const MAX_INTEGER_GRID: u64 = 1 << 20;
    if inst.items() <= GRID_ITEMS {
        let mut g = inst.value_grid()?;
        g.reverse();
        return Ok(g);
    }
    let singles: Vec<Value> = (0..inst.items()).map(|j| inst.singleton_value(j)).collect();
    let mut scale = Value::common_denominator(&singles);
    let total = inst.value(&inst.full_set());
    scale = num_integer::Integer::lcm(&scale, total.denom());
    let top = (&total * Value::from_bigint(scale.clone())).floor();
    let top: u64 = top
        .try_into()
        .map_err(|_| Error::Resource("threshold grid too large".into()))?;
    if top > MAX_INTEGER_GRID {
        return Err(Error::Resource(format!(
            "integer threshold grid of {top} points exceeds {MAX_INTEGER_GRID}"
        )));
    }
    let s = Value::from_bigint(scale);
    Ok((0..=top).rev().map(|k| Value::from_int(k as i64) / &s).collect())
}

/// Output of [`solve_approx`].
#[derive(Clone, Debug)]
pub struct ApproxResult {
    /// The greedy allocation with leftover items handed out, see
    /// [`complete_allocation`].
    pub allocation: Allocation,
    pub achieved_min: Value,
    /// The accepted guess `T*` for `OPT`.
    pub guessed_opt: Value,
    /// `α·T*`.
    pub threshold: Value,
    /// Minimum of the greedy allocation before completion.
    pub greedy_min: Value,
    pub fixed: Vec<(usize, usize)>,
    /// Steps in original indices.
    pub trace: GreedyTrace,
}

/// Gives each unallocated item, in index order, to the lowest-indexed player
/// of currently minimum value, respecting the cardinality cap.
pub fn complete_allocation(inst: &Instance, alloc: &Allocation) -> Allocation {
    let n = inst.items();
    let mut bundles: Vec<Bundle> = alloc
        .bundles()
        .iter()
        .map(|b| Bundle::from_set(inst.valuation(), b))
        .collect();
    let mut used = alloc.allocated(n).len();
    let limit = inst.cardinality_cap().unwrap_or(n);
    for j in alloc.unallocated(n).iter() {
        if used >= limit || bundles.is_empty() {
            break;
        }
        let mut q = 0;
        for p in 1..bundles.len() {
            if bundles[p].value() < bundles[q].value() {
                q = p;
            }
        }
        bundles[q].insert(j);
        used += 1;
    }
    Allocation::from_bundles(n, bundles.iter().map(|b| b.items().clone()).collect())
        .expect("completion keeps bundles disjoint")
}

/// Scans the candidate grid from the top and returns the first guess `T`
/// at which preprocessing plus greedy at `α·T` reaches `α·T` for every
/// player. `T = 0` always succeeds.
pub fn solve_approx(inst: &Instance, alpha: &Value, policy: &TieBreakPolicy) -> Result<ApproxResult> {
    if !alpha.is_positive() || *alpha > Value::one() {
        return Err(Error::Usage(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !inst.matroids().is_empty() {
        return Err(Error::Unsupported("greedy does not support matroids".into()));
    }
    for guess in approx_candidates(inst)? {
        let threshold = alpha * &guess;
        let att = attempt(inst, &threshold, policy)?;
        if !att.succeeded() {
            continue;
        }
        let allocation = complete_allocation(inst, &att.allocation);
        let achieved_min = allocation.min_value(inst);
        let trace = att.lifted_trace().unwrap_or(GreedyTrace {
            threshold: threshold.clone(),
            seeding: Vec::new(),
            steps: Vec::new(),
        });
        return Ok(ApproxResult {
            allocation,
            achieved_min,
            guessed_opt: guess,
            threshold,
            greedy_min: att.min_value,
            fixed: att.reduction.fixed,
            trace,
        });
    }
    unreachable!("the zero guess always succeeds")
}

/// Independent re-check of a trace against the instance.
///
/// Replays the trace from empty bundles and at every step recomputes all
/// eligible `(item, player)` marginals by direct evaluation, requiring the
/// recorded pair to be the maximum under the policy's total order. Also
/// checks the seeding and the stopping condition. Quadratic per step; meant
/// for small instances.
pub fn verify_trace(
    inst: &Instance,
    threshold: &Value,
    policy: &TieBreakPolicy,
    trace: &GreedyTrace,
) -> std::result::Result<Allocation, String> {
    let n = inst.items();
    let m = inst.players();
    let ranks = policy.ranks(n, m).map_err(|e| e.to_string())?;
    let f = inst.valuation();
    let eval = |s: &ItemSet| f.evaluate(s).expect("in range");
    let limit = inst.cardinality_cap().unwrap_or(n).min(n);

    let mut singles: Vec<(Value, usize, usize)> = (0..n)
        .map(|j| (eval(&ItemSet::from_items(n, [j]).unwrap()), ranks.item[j], j))
        .collect();
    singles.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let expect_seeds = m.min(n).min(limit);
    if trace.seeding.len() != expect_seeds {
        return Err(format!("expected {expect_seeds} seeding steps, got {}", trace.seeding.len()));
    }
    let mut bundles = vec![ItemSet::empty(n); m];
    let mut left = ItemSet::full(n);
    for (k, s) in trace.seeding.iter().enumerate() {
        let (v, _, j) = &singles[k];
        if s.item != *j || s.player != ranks.seed_order[k] || s.marginal != *v {
            return Err(format!("seeding step {k} does not follow the policy"));
        }
        bundles[s.player].insert(s.item);
        left.remove(s.item);
    }
    let mut used = trace.seeding.len();
    for (k, s) in trace.steps.iter().enumerate() {
        let mut best: Option<(Value, usize, usize, usize, usize)> = None;
        for j in left.iter() {
            for p in 0..m {
                let fp = eval(&bundles[p]);
                if fp >= *threshold {
                    continue;
                }
                let g = eval(&bundles[p].with(j)) - &fp;
                let better = match &best {
                    None => true,
                    Some((bg, bri, brp, _, _)) => {
                        g > *bg
                            || (g == *bg
                                && (ranks.item[j], ranks.player[p]) < (*bri, *brp))
                    }
                };
                if better {
                    best = Some((g, ranks.item[j], ranks.player[p], j, p));
                }
            }
        }
        let Some((g, _, _, j, p)) = best else {
            return Err(format!("step {k} taken after the greedy should have stopped"));
        };
        if used >= limit {
            return Err(format!("step {k} exceeds the cardinality cap"));
        }
        if (j, p) != (s.item, s.player) || g != s.marginal {
            return Err(format!(
                "step {k} records ({}, {}, {}) but the maximum is ({j}, {p}, {g})",
                s.item, s.player, s.marginal
            ));
        }
        bundles[p].insert(j);
        left.remove(j);
        used += 1;
    }
    let any_eligible = bundles.iter().any(|b| eval(b) < *threshold);
    if used < limit && !left.is_empty() && any_eligible {
        return Err("trace stops while an eligible pair remains".into());
    }
    Allocation::from_bundles(n, bundles).map_err(|e| e.to_string())
}

/// Run-level inequalities from the greedy analysis, evaluated for one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunInequalities {
    /// `f(A_p) ≤ threshold + max_j f(j)` for every player.
    pub bundle_upper_bound: bool,
    /// `Σ_{j∈A*} Δ(j | A_q) ≤ Σ_{p≠q} f(A_p)`; `None` when `f(A_q) ≥ threshold`.
    pub marginal_sum_bound: Option<bool>,
    /// `f_min(A*) < f(A_q) + (1/m) Σ_p f(A_p)`; `None` when `f(A_q) ≥ threshold`
    /// or `n < m`.
    pub average_bound: Option<bool>,
}

impl RunInequalities {
    pub fn all_hold(&self) -> bool {
        self.bundle_upper_bound
            && self.marginal_sum_bound.unwrap_or(true)
            && self.average_bound.unwrap_or(true)
    }
}

/// Checks the per-run inequalities for a greedy allocation `greedy` at
/// `threshold` against a reference allocation `reference` (normally an
/// optimal one). `q` is the lowest-indexed min player of `greedy`.
pub fn run_inequalities(
    inst: &Instance,
    threshold: &Value,
    greedy: &Allocation,
    reference: &Allocation,
) -> RunInequalities {
    let n = inst.items();
    let m = inst.players();
    let values = greedy.values(inst);
    let max_single = (0..n)
        .map(|j| inst.singleton_value(j))
        .max()
        .unwrap_or_else(Value::zero);
    let bound = threshold + &max_single;
    let bundle_upper_bound = values.iter().all(|v| *v <= bound);

    let q = greedy.min_player(inst).expect("at least one player");
    if values[q] >= *threshold {
        return RunInequalities {
            bundle_upper_bound,
            marginal_sum_bound: None,
            average_bound: None,
        };
    }
    let aq = Bundle::from_set(inst.valuation(), greedy.bundle(q));
    let lhs: Value = reference.allocated(n).iter().map(|j| aq.marginal(j)).sum();
    let others: Value = values
        .iter()
        .enumerate()
        .filter(|(p, _)| *p != q)
        .map(|(_, v)| v.clone())
        .sum();
    let marginal_sum_bound = Some(lhs <= others);
    let average_bound = if n >= m {
        let avg = values.iter().sum::<Value>() / Value::from_int(m as i64);
        Some(reference.min_value(inst) < &values[q] + &avg)
    } else {
        None
    };
    RunInequalities {
        bundle_upper_bound,
        marginal_sum_bound,
        average_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::SetFunction;

    fn additive(weights: &[i64], m: usize) -> Instance {
        let f = SetFunction::additive(weights.iter().map(|&w| Value::from_int(w)).collect()).unwrap();
        Instance::new(Instance::default_labels(weights.len()), m, f).unwrap()
    }

    #[test]
    fn seeded_players_already_above_threshold() {
        let inst = additive(&[3, 3, 2, 2, 2], 2);
        let t = Value::ratio(12, 5);
        let (a, trace) = greedy_with_threshold(&inst, &t, &TieBreakPolicy::Lexicographic).unwrap();
        assert_eq!(a.bundle(0).to_vec(), vec![0]);
        assert_eq!(a.bundle(1).to_vec(), vec![1]);
        assert!(trace.steps.is_empty());
        assert_eq!(a.unallocated(5).len(), 3);
        assert_eq!(a.min_value(&inst), Value::from_int(3));
        verify_trace(&inst, &t, &TieBreakPolicy::Lexicographic, &trace).unwrap();
    }

    #[test]
    fn zero_threshold_seeds_only() {
        let inst = additive(&[1, 5, 4, 2], 3);
        let (a, trace) =
            greedy_with_threshold(&inst, &Value::zero(), &TieBreakPolicy::Lexicographic).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(a.min_value(&inst), Value::from_int(2));
    }

    #[test]
    fn fewer_items_than_players() {
        let inst = additive(&[4], 3);
        let (a, _) = greedy_with_threshold(&inst, &Value::from_int(10), &TieBreakPolicy::Lexicographic)
            .unwrap();
        assert_eq!(a.bundle(0).to_vec(), vec![0]);
        assert!(a.bundle(1).is_empty() && a.bundle(2).is_empty());
    }

    #[test]
    fn rejects_matroids_and_bad_policy() {
        let inst = additive(&[1, 1], 1)
            .with_matroids(vec![crate::matroid::Matroid::uniform(2, 1)])
            .unwrap();
        assert!(matches!(
            greedy_with_threshold(&inst, &Value::one(), &TieBreakPolicy::Lexicographic),
            Err(Error::Unsupported(_))
        ));
        let inst = additive(&[1, 1], 1);
        let bad = TieBreakPolicy::ByPermutation {
            items: vec![0, 0],
            players: vec![0],
            seed_players: None,
        };
        assert!(matches!(
            greedy_with_threshold(&inst, &Value::one(), &bad),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn preprocess_examples() {
        let inst = additive(&[1, 1, 1], 2);
        let r = preprocess_big_items(&inst, &Value::from_int(2), &TieBreakPolicy::Lexicographic).unwrap();
        assert!(r.fixed.is_empty());
        assert_eq!(r.players, 2);

        let inst = additive(&[5, 1, 1], 2);
        let r = preprocess_big_items(&inst, &Value::from_int(2), &TieBreakPolicy::Lexicographic).unwrap();
        assert_eq!(r.fixed, vec![(0, 0)]);
        assert_eq!(r.players, 1);
        let red = r.instance.as_ref().unwrap();
        assert_eq!(red.items(), 2);
        assert_eq!(red.value(&red.full_set()), Value::from_int(2));

        let inst = additive(&[5, 5, 5], 2);
        let r = preprocess_big_items(&inst, &Value::from_int(2), &TieBreakPolicy::Lexicographic).unwrap();
        assert_eq!(r.fixed.len(), 2);
        assert_eq!(r.players, 0);
        assert!(r.instance.is_none());
        let lifted = r.lift(&inst, None);
        assert_eq!(lifted.unallocated(3).len(), 1);
    }

    #[test]
    fn cardinality_cap_stops_allocation() {
        let inst = additive(&[3, 3, 2, 2, 2], 2).with_cardinality_cap(Some(2)).unwrap();
        let (a, trace) =
            greedy_cardinality(&inst, &Value::one(), &TieBreakPolicy::Lexicographic).unwrap();
        assert_eq!(a.allocated(5).to_vec(), vec![0, 1]);
        assert!(trace.steps.is_empty());
        let plain = additive(&[3, 3, 2, 2, 2], 2);
        assert!(matches!(
            greedy_cardinality(&plain, &Value::one(), &TieBreakPolicy::Lexicographic),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn solve_approx_single_player_and_empty() {
        let inst = additive(&[3, 1, 2], 1);
        let r = solve_approx(&inst, &Value::ratio(2, 5), &TieBreakPolicy::Lexicographic).unwrap();
        assert_eq!(r.achieved_min, Value::from_int(6));
        assert_eq!(r.allocation.bundle(0).len(), 3);

        let inst = additive(&[3, 1], 3);
        let r = solve_approx(&inst, &Value::ratio(2, 5), &TieBreakPolicy::Lexicographic).unwrap();
        assert_eq!(r.achieved_min, Value::zero());
        assert_eq!(r.guessed_opt, Value::zero());

        assert!(matches!(
            solve_approx(&inst, &Value::zero(), &TieBreakPolicy::Lexicographic),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            solve_approx(&inst, &Value::ratio(3, 2), &TieBreakPolicy::Lexicographic),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn restrict_policy_projects_orders() {
        let p = TieBreakPolicy::ByPermutation {
            items: vec![3, 1, 0, 2],
            players: vec![1, 0],
            seed_players: None,
        };
        let r = p.restrict(&[0, 2, 3], &[1]);
        assert_eq!(
            r,
            TieBreakPolicy::ByPermutation {
                items: vec![2, 0, 1],
                players: vec![0],
                seed_players: None
            }
        );
    }
}
