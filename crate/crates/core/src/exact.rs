//! Exhaustive oracles for small instances.
//!
//! Allocations are enumerated as assignment vectors over items `0..n`. Since
//! all players share one valuation, players are renumbered by first
//! occurrence: item `j` may only go to an already used player or to the next
//! fresh one. The unallocated choice (written `⊥`, ordered after every
//! player) is offered only when matroids or a cardinality cap are present.
//! The search visits canonical vectors in lexicographic order and keeps the
//! first strictly better one, so ties resolve to the lexicographically least
//! vector.

use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance};
use crate::itemset::{all_masks, ItemSet};
use crate::valuation::MAX_ENUMERATION_ITEMS;
use crate::value::Value;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Node budget from `MAXMIN_BUDGET`, or [`DEFAULT_BUDGET`].
pub fn default_budget() -> u64 {
    std::env::var("MAXMIN_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(Clone, Copy)]
enum Objective<'a> {
    MaxMin,
    TruncatedSum(&'a Value),
}

impl Objective<'_> {
    fn score(&self, values: &[Value]) -> Value {
        match self {
            Objective::MaxMin => values.iter().min().cloned().unwrap_or_else(Value::zero),
            Objective::TruncatedSum(cap) => values.iter().map(|v| Value::min_of(v, cap)).sum(),
        }
    }
}

struct Search<'a> {
    inst: &'a Instance,
    objective: Objective<'a>,
    allow_skip: bool,
    cap: usize,
    budget: u64,
    nodes: u64,
    bundles: Vec<ItemSet>,
    assignment: Vec<Option<usize>>,
    best: Option<(Value, Vec<Option<usize>>)>,
}

impl Search<'_> {
    fn upper_bound(&self, next: usize, used: usize) -> Value {
        let n = self.inst.items();
        let rest = ItemSet::from_items(n, next..n).expect("in range");
        let f_rest = self.inst.value(&rest);
        let m = self.inst.players();
        let vals: Vec<Value> = (0..m)
            .map(|p| {
                if p < used {
                    self.inst.value(&self.bundles[p].union(&rest))
                } else {
                    f_rest.clone()
                }
            })
            .collect();
        self.objective.score(&vals)
    }

    fn dfs(&mut self, j: usize, used: usize, allocated: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Resource(format!(
                "exact search exceeded the node budget of {}",
                self.budget
            )));
        }
        let n = self.inst.items();
        let m = self.inst.players();
        if j == n {
            let vals: Vec<Value> = self.bundles.iter().map(|b| self.inst.value(b)).collect();
            let score = self.objective.score(&vals);
            if self.best.as_ref().map_or(true, |(b, _)| score > *b) {
                self.best = Some((score, self.assignment.clone()));
            }
            return Ok(());
        }
        if let Some((b, _)) = &self.best {
            if self.upper_bound(j, used) <= *b {
                return Ok(());
            }
        }
        if allocated < self.cap {
            for p in 0..m.min(used + 1) {
                let candidate = self.bundles[p].with(j);
                if !self.inst.is_feasible_bundle(&candidate) {
                    continue;
                }
                let old = std::mem::replace(&mut self.bundles[p], candidate);
                self.assignment[j] = Some(p);
                let r = self.dfs(j + 1, used.max(p + 1), allocated + 1);
                self.bundles[p] = old;
                self.assignment[j] = None;
                r?;
            }
        }
        if self.allow_skip {
            self.dfs(j + 1, used, allocated)?;
        }
        Ok(())
    }
}

fn search(inst: &Instance, objective: Objective, budget: u64) -> Result<(Value, Allocation)> {
    let n = inst.items();
    let m = inst.players();
    let allow_skip = !inst.matroids().is_empty() || inst.cardinality_cap().is_some();
    let mut s = Search {
        inst,
        objective,
        allow_skip,
        cap: inst.cardinality_cap().unwrap_or(n),
        budget,
        nodes: 0,
        bundles: vec![ItemSet::empty(n); m],
        assignment: vec![None; n],
        best: None,
    };
    s.dfs(0, 0, 0)?;
    let (value, assignment) = s
        .best
        .ok_or_else(|| Error::Infeasible("no feasible allocation".into()))?;
    Ok((value, Allocation::from_assignment(m, &assignment)))
}

/// Optimal `f_min` and a witness, honouring matroids and the cardinality cap.
pub fn opt_maxmin(inst: &Instance) -> Result<(Value, Allocation)> {
    opt_maxmin_with_budget(inst, default_budget())
}

pub fn opt_maxmin_with_budget(inst: &Instance, budget: u64) -> Result<(Value, Allocation)> {
    search(inst, Objective::MaxMin, budget)
}

/// Allocation maximizing `Σ_p min(cap, f(A_p))`. Without matroids every item
/// is allocated; with matroids bundles are common-independent and items may
/// stay unallocated.
pub fn opt_truncated_maxsum(inst: &Instance, cap: &Value) -> Result<Allocation> {
    opt_truncated_maxsum_with_budget(inst, cap, default_budget())
}

pub fn opt_truncated_maxsum_with_budget(inst: &Instance, cap: &Value, budget: u64) -> Result<Allocation> {
    if cap.is_negative() {
        return Err(Error::Domain(format!("truncation cap must be non-negative, got {cap}")));
    }
    search(inst, Objective::TruncatedSum(cap), budget).map(|(_, a)| a)
}

/// Every `C ⊆ J` with `f(C) ≥ t` (or `> t` when `strict`), restricted to
/// common-independent sets when the instance has matroids. Ordered by mask.
pub fn enumerate_configurations(inst: &Instance, t: &Value, strict: bool) -> Result<Vec<ItemSet>> {
    let n = inst.items();
    if n > MAX_ENUMERATION_ITEMS {
        return Err(Error::Resource(format!(
            "configuration enumeration is limited to {MAX_ENUMERATION_ITEMS} items, got {n}"
        )));
    }
    let table = inst.valuation().value_table()?;
    Ok(all_masks(n)
        .filter(|&mask| {
            let v = &table[mask as usize];
            if strict {
                v > t
            } else {
                v >= t
            }
        })
        .map(|mask| ItemSet::from_mask(n, mask))
        .filter(|s| inst.is_feasible_bundle(s))
        .collect())
}
