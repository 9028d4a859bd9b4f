//! Configuration LP for identical valuations.
//!
//! With identical valuations the configuration LP at threshold `T` is
//! feasible exactly when the covering LP
//!
//! ```text
//! min Σ_j y_j   s.t.  Σ_{j∈C} y_j ≥ 1 for every configuration C,  y ≥ 0
//! ```
//!
//! has optimum at least `m`. A solution with `Σ y < m` is a dual certificate
//! of infeasibility. The covering LP is solved through its packing dual
//! `max Σ x_C s.t. Σ_{C∋j} x_C ≤ 1`, whose optimal `x` scaled by `1/opt`
//! gives every player the same fractional configuration mix.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exact::{enumerate_configurations, opt_maxmin, opt_truncated_maxsum};
use crate::instance::Instance;
use crate::itemset::{all_masks, ItemSet};
use crate::simplex;
use crate::valuation::{Bundle, SetFunction, MAX_ENUMERATION_ITEMS};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringSolution {
    pub optimum: Value,
    /// Optimal covering solution, one entry per item.
    pub y: Vec<Value>,
    /// Optimal packing solution, one entry per configuration.
    pub x: Vec<Value>,
}

/// Exact optimum of the covering LP over `configs`.
pub fn solve_covering_lp(configs: &[ItemSet], n: usize) -> Result<CoveringSolution> {
    for c in configs {
        c.check_universe(n)?;
        if c.is_empty() {
            return Err(Error::Infeasible(
                "the empty configuration cannot be covered".into(),
            ));
        }
    }
    let a: Vec<Vec<Value>> = (0..n)
        .map(|j| {
            configs
                .iter()
                .map(|c| if c.contains(j) { Value::one() } else { Value::zero() })
                .collect()
        })
        .collect();
    let b = vec![Value::one(); n];
    let c = vec![Value::one(); configs.len()];
    let s = simplex::maximize(&a, &b, &c)?;
    Ok(CoveringSolution {
        optimum: s.objective,
        y: s.y,
        x: s.x,
    })
}

/// Configurations of the instance at threshold `t` that have no proper
/// subset which is also a configuration.
pub fn minimal_configurations(inst: &Instance, t: &Value) -> Result<Vec<ItemSet>> {
    let all = enumerate_configurations(inst, t, false)?;
    let masks: HashSet<u64> = all.iter().map(ItemSet::mask).collect();
    Ok(all
        .into_iter()
        .filter(|c| c.iter().all(|i| !masks.contains(&c.without(i).mask())))
        .collect())
}

/// Fractional solution of the configuration LP in which every player uses
/// the same mix: `x_{p,C} = weights[i]` for `C = configs[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimalWitness {
    pub threshold: Value,
    pub players: usize,
    pub configs: Vec<ItemSet>,
    pub weights: Vec<Value>,
}

/// Why an item-level check failed, or `Ok` when the witness satisfies every
/// constraint exactly.
pub fn verify_primal_witness(inst: &Instance, w: &PrimalWitness) -> std::result::Result<(), String> {
    if w.configs.len() != w.weights.len() {
        return Err("one weight per configuration is required".into());
    }
    if w.players != inst.players() {
        return Err("player count differs from the instance".into());
    }
    for (c, x) in w.configs.iter().zip(&w.weights) {
        if x.is_negative() {
            return Err(format!("negative weight {x}"));
        }
        if inst.value(c) < w.threshold {
            return Err(format!("configuration {:?} is below the threshold", inst.set_labels(c)));
        }
        if !inst.is_feasible_bundle(c) {
            return Err(format!("configuration {:?} is not independent", inst.set_labels(c)));
        }
    }
    let per_player: Value = w.weights.iter().sum();
    if per_player < Value::one() {
        return Err(format!("player constraint: total weight {per_player} < 1"));
    }
    let m = Value::from_int(w.players as i64);
    for j in 0..inst.items() {
        let load: Value = w
            .configs
            .iter()
            .zip(&w.weights)
            .filter(|(c, _)| c.contains(j))
            .map(|(_, x)| x)
            .sum();
        if &m * &load > Value::one() {
            return Err(format!("item {} is used {} times", inst.label(j), &m * &load));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Repair {
    pub item: usize,
    pub amount: Value,
}

/// Outcome of checking a certificate against every configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub configurations: usize,
    /// `y(C) ≥ 1` for every configuration.
    pub covered: bool,
    /// `y(C) > 1` for every configuration.
    pub strictly_covered: bool,
    /// Smallest `y(C)`; `None` when there is no configuration.
    pub min_cover: Option<Value>,
    /// Least configuration (by mask) with `y(C) < 1`.
    pub violator: Option<ItemSet>,
    pub sum: Value,
    pub nonnegative: bool,
    pub sum_below_m: bool,
}

impl Verification {
    pub fn is_valid(&self) -> bool {
        self.covered && self.nonnegative && self.sum_below_m
    }
}

/// A candidate solution of the covering LP at some threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub y: Vec<Value>,
    pub threshold: Value,
    /// Configurations are the sets with `f(C) > threshold` when set, and
    /// `f(C) ≥ threshold` otherwise.
    pub strict_filter: bool,
    pub matroid_constrained: bool,
    /// Optimal integral value the certificate was built from.
    pub opt: Option<Value>,
    /// `(item, player)` pairs removed before the construction, each with
    /// `y = 1`.
    pub removed: Vec<(usize, usize)>,
    /// Lowest-indexed min player of the truncated max-sum allocation.
    pub min_player: Option<usize>,
    /// `Σ y` before any repair.
    pub initial_sum: Value,
    pub repair: Option<Repair>,
    pub verification: Option<Verification>,
}

impl DualCertificate {
    pub fn sum(&self) -> Value {
        self.y.iter().sum()
    }

    /// Line-oriented text form.
    pub fn render(&self, inst: &Instance) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "threshold {}", self.threshold);
        let _ = writeln!(out, "filter {}", if self.strict_filter { "strict" } else { "non-strict" });
        let _ = writeln!(out, "matroid_constrained {}", self.matroid_constrained);
        if let Some(opt) = &self.opt {
            let _ = writeln!(out, "opt {opt}");
        }
        if let Some(q) = self.min_player {
            let _ = writeln!(out, "min_player {q}");
        }
        for (j, p) in &self.removed {
            let _ = writeln!(out, "removed {} player {p}", inst.label(*j));
        }
        for (j, v) in self.y.iter().enumerate() {
            let _ = writeln!(out, "y {} {v}", inst.label(j));
        }
        let _ = writeln!(out, "initial_sum {}", self.initial_sum);
        let _ = writeln!(out, "sum {}", self.sum());
        match &self.repair {
            Some(r) => {
                let _ = writeln!(out, "repair {} {}", inst.label(r.item), r.amount);
            }
            None => {
                let _ = writeln!(out, "repair none");
            }
        }
        if let Some(v) = &self.verification {
            let _ = writeln!(out, "configurations {}", v.configurations);
            let _ = writeln!(out, "strictly_covered {}", v.strictly_covered);
            let _ = writeln!(out, "verdict {}", if v.is_valid() { "valid" } else { "invalid" });
            if let Some(c) = &v.violator {
                let _ = writeln!(out, "violator {}", inst.set_labels(c).join(","));
            }
        }
        out
    }
}

/// Checks `y` against every configuration by enumeration.
pub fn verify_certificate(inst: &Instance, cert: &DualCertificate) -> Result<Verification> {
    let n = inst.items();
    if cert.y.len() != n {
        return Err(Error::Domain(format!("certificate has {} entries for {n} items", cert.y.len())));
    }
    let configs = enumerate_configurations(inst, &cert.threshold, cert.strict_filter)?;
    let one = Value::one();
    let mut min_cover: Option<Value> = None;
    let mut violator = None;
    let mut strictly_covered = true;
    for c in &configs {
        let cover: Value = c.iter().map(|j| &cert.y[j]).sum();
        if cover <= one {
            strictly_covered = false;
        }
        if cover < one && violator.is_none() {
            violator = Some(c.clone());
        }
        if min_cover.as_ref().map_or(true, |m| cover < *m) {
            min_cover = Some(cover);
        }
    }
    let sum = cert.sum();
    Ok(Verification {
        configurations: configs.len(),
        covered: violator.is_none(),
        strictly_covered,
        min_cover,
        violator,
        nonnegative: cert.y.iter().all(|v| !v.is_negative()),
        sum_below_m: sum < Value::from_int(inst.players() as i64),
        sum,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpVerdict {
    PrimalFeasible(PrimalWitness),
    PrimalInfeasible(DualCertificate),
}

impl LpVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpVerdict::PrimalFeasible(_))
    }
}

fn plain_certificate(inst: &Instance, y: Vec<Value>, t: &Value) -> DualCertificate {
    let initial_sum = y.iter().sum();
    DualCertificate {
        y,
        threshold: t.clone(),
        strict_filter: false,
        matroid_constrained: !inst.matroids().is_empty(),
        opt: None,
        removed: Vec::new(),
        min_player: None,
        initial_sum,
        repair: None,
        verification: None,
    }
}

/// Decides the configuration LP at threshold `t` exactly.
pub fn decide_configuration_lp(inst: &Instance, t: &Value) -> Result<LpVerdict> {
    let n = inst.items();
    let m = inst.players();
    if n > MAX_ENUMERATION_ITEMS {
        return Err(Error::Resource(format!(
            "configuration LP is limited to {MAX_ENUMERATION_ITEMS} items, got {n}"
        )));
    }
    if !t.is_positive() {
        return Ok(LpVerdict::PrimalFeasible(PrimalWitness {
            threshold: t.clone(),
            players: m,
            configs: vec![ItemSet::empty(n)],
            weights: vec![Value::one()],
        }));
    }
    let configs = minimal_configurations(inst, t)?;
    if configs.is_empty() {
        return Ok(LpVerdict::PrimalInfeasible(plain_certificate(inst, vec![Value::zero(); n], t)));
    }
    let sol = solve_covering_lp(&configs, n)?;
    if sol.optimum < Value::from_int(m as i64) {
        return Ok(LpVerdict::PrimalInfeasible(plain_certificate(inst, sol.y, t)));
    }
    let (configs, weights): (Vec<ItemSet>, Vec<Value>) = configs
        .into_iter()
        .zip(sol.x)
        .filter(|(_, x)| x.is_positive())
        .map(|(c, x)| (c, x / &sol.optimum))
        .unzip();
    Ok(LpVerdict::PrimalFeasible(PrimalWitness {
        threshold: t.clone(),
        players: m,
        configs,
        weights,
    }))
}

/// Largest value `f(S)` at which the configuration LP is feasible.
/// Feasibility is monotone in the threshold, so the grid is bisected.
pub fn lp_opt(inst: &Instance) -> Result<Value> {
    let grid = inst.value_grid()?;
    let (mut lo, mut hi) = (0usize, grid.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if decide_configuration_lp(inst, &grid[mid])?.is_feasible() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(grid[lo].clone())
}

/// `lp_opt / OPT`.
pub fn integrality_gap(inst: &Instance) -> Result<Value> {
    let (opt, _) = opt_maxmin(inst)?;
    if opt.is_zero() {
        return Err(Error::Domain("integrality gap is undefined when OPT = 0".into()));
    }
    Ok(lp_opt(inst)? / opt)
}

/// Items whose singleton is independent in every matroid.
fn is_loop(inst: &Instance, j: usize) -> bool {
    !inst.is_feasible_bundle(&ItemSet::from_items(inst.items(), [j]).expect("in range"))
}

struct Preprocessed {
    /// Remaining instance, its items and its optimum.
    reduced: Instance,
    kept: Vec<usize>,
    first_player: usize,
    opt: Value,
    removed: Vec<(usize, usize)>,
}

/// Repeatedly removes the lowest-indexed item worth more than the current
/// optimum together with the lowest-indexed remaining player.
fn remove_big_items(inst: &Instance) -> Result<Preprocessed> {
    let mut kept: Vec<usize> = (0..inst.items()).collect();
    let mut removed = Vec::new();
    let mut current = inst.clone();
    loop {
        let (opt, _) = opt_maxmin(&current)?;
        let big = (0..current.items())
            .find(|&j| current.singleton_value(j) > opt && !is_loop(&current, j));
        match big {
            Some(j) if current.players() > 1 => {
                removed.push((kept[j], removed.len()));
                kept.remove(j);
                let keep: Vec<usize> = (0..current.items()).filter(|&i| i != j).collect();
                current = current.restrict(&keep, current.players() - 1)?;
            }
            _ => {
                return Ok(Preprocessed {
                    reduced: current,
                    kept,
                    first_player: removed.len(),
                    opt,
                    removed,
                })
            }
        }
    }
}

/// `y_j = Δ_f̄(-j | A_p) / T_f̄(p)` for the truncated max-sum allocation with
/// cap `2·opt`, in reduced indices, together with the allocation's lowest
/// min player.
fn proportional_prices(pre: &Preprocessed) -> Result<(Vec<Value>, usize, Vec<ItemSet>)> {
    let inst = &pre.reduced;
    let cap = Value::from_int(2) * &pre.opt;
    let alloc = opt_truncated_maxsum(inst, &cap)?;
    let fbar = SetFunction::truncated(inst.valuation().clone(), cap.clone())?;
    let mut y = vec![Value::zero(); inst.items()];
    for b in alloc.bundles() {
        let losses: Vec<(usize, Value)> = b
            .iter()
            .map(|j| Ok((j, fbar.remove_marginal(j, b)?)))
            .collect::<Result<_>>()?;
        let total: Value = losses.iter().map(|(_, v)| v).sum();
        if total > cap {
            return Err(Error::CertificateInvalid {
                reason: format!("T_f̄(p) = {total} exceeds 2·OPT = {cap}"),
                witness: Some(inst.set_labels(b)),
            });
        }
        if total.is_positive() {
            for (j, v) in losses {
                y[j] = v / &total;
            }
        }
    }
    let q = alloc.min_player(inst).expect("at least one player");
    Ok((y, q, alloc.bundles().to_vec()))
}

fn lift_prices(inst: &Instance, pre: &Preprocessed, reduced_y: &[Value]) -> Vec<Value> {
    let mut y = vec![Value::zero(); inst.items()];
    for &(j, _) in &pre.removed {
        y[j] = Value::one();
    }
    for (i, &j) in pre.kept.iter().enumerate() {
        y[j] = reduced_y[i].clone();
    }
    y
}

fn invalid(inst: &Instance, reason: String, v: &Verification) -> Error {
    Error::CertificateInvalid {
        reason,
        witness: v.violator.as_ref().map(|c| inst.set_labels(c)),
    }
}

/// Lowers one price whose configurations are all strictly covered so that
/// `Σ y` drops below `m`. Picks the lowest-indexed positive item and takes
/// half its smallest slack, capped by its price.
fn strictness_repair(inst: &Instance, cert: &DualCertificate) -> Result<Option<Repair>> {
    let configs = enumerate_configurations(inst, &cert.threshold, cert.strict_filter)?;
    let one = Value::one();
    for j in 0..inst.items() {
        if !cert.y[j].is_positive() {
            continue;
        }
        let mut slack: Option<Value> = None;
        let mut tight = false;
        for c in configs.iter().filter(|c| c.contains(j)) {
            let s: Value = c.iter().map(|i| &cert.y[i]).sum::<Value>() - &one;
            if !s.is_positive() {
                tight = true;
                break;
            }
            if slack.as_ref().map_or(true, |m| s < *m) {
                slack = Some(s);
            }
        }
        if tight {
            continue;
        }
        let amount = match slack {
            Some(s) => Value::min_of(&(s / Value::from_int(2)), &cert.y[j]),
            None => cert.y[j].clone(),
        };
        return Ok(Some(Repair { item: j, amount }));
    }
    Ok(None)
}

/// Dual certificate at `3·OPT` for an instance without matroids.
///
/// Configurations are the sets with `f(C) > 3·OPT`. The certificate is
/// verified by enumeration and, if `Σ y = m`, repaired by lowering one
/// price with slack.
pub fn build_certificate_thm3(inst: &Instance) -> Result<DualCertificate> {
    if !inst.matroids().is_empty() {
        return Err(Error::Usage(
            "this certificate is for instances without matroids; use the matroid variant".into(),
        ));
    }
    let (opt, _) = opt_maxmin(inst)?;
    let pre = remove_big_items(inst)?;
    let (reduced_y, q, _) = proportional_prices(&pre)?;
    let y = lift_prices(inst, &pre, &reduced_y);
    let initial_sum: Value = y.iter().sum();
    let mut cert = DualCertificate {
        y,
        threshold: Value::from_int(3) * &opt,
        strict_filter: true,
        matroid_constrained: false,
        opt: Some(opt),
        removed: pre.removed.clone(),
        min_player: Some(q + pre.first_player),
        initial_sum,
        repair: None,
        verification: None,
    };
    let m = Value::from_int(inst.players() as i64);
    let v = verify_certificate(inst, &cert)?;
    if !v.covered {
        return Err(invalid(inst, "configuration constraint violated".into(), &v));
    }
    if v.sum > m {
        return Err(invalid(inst, format!("value constraint violated: Σ y = {}", v.sum), &v));
    }
    if v.sum == m {
        let Some(r) = strictness_repair(inst, &cert)? else {
            return Err(invalid(inst, "Σ y = m and no price can be lowered".into(), &v));
        };
        cert.y[r.item] -= &r.amount;
        cert.repair = Some(r);
    }
    let v = verify_certificate(inst, &cert)?;
    if !v.is_valid() {
        return Err(invalid(inst, "repaired certificate does not verify".into(), &v));
    }
    cert.verification = Some(v);
    Ok(cert)
}

/// Dual certificate at `5·OPT` for an instance with matroid constraints.
///
/// Uses matroid-feasible truncated max-sum allocations and sets `y = 0` on
/// the min player's bundle and on unallocated items.
pub fn build_certificate_thm8(inst: &Instance) -> Result<DualCertificate> {
    if inst.matroids().is_empty() {
        return Err(Error::Usage("this certificate needs at least one matroid".into()));
    }
    let (opt, _) = opt_maxmin(inst)?;
    let pre = remove_big_items(inst)?;
    let (mut reduced_y, q, bundles) = proportional_prices(&pre)?;
    for j in bundles[q].iter() {
        reduced_y[j] = Value::zero();
    }
    let y = lift_prices(inst, &pre, &reduced_y);
    let initial_sum: Value = y.iter().sum();
    let mut cert = DualCertificate {
        y,
        threshold: Value::from_int(5) * &opt,
        strict_filter: true,
        matroid_constrained: true,
        opt: Some(opt),
        removed: pre.removed.clone(),
        min_player: Some(q + pre.first_player),
        initial_sum,
        repair: None,
        verification: None,
    };
    let v = verify_certificate(inst, &cert)?;
    let bound = Value::from_int(inst.players() as i64 - 1);
    if !v.covered {
        return Err(invalid(inst, "configuration constraint violated".into(), &v));
    }
    if v.sum > bound {
        return Err(invalid(inst, format!("Σ y = {} exceeds m - 1", v.sum), &v));
    }
    cert.verification = Some(v);
    Ok(cert)
}

/// Searches for a configuration `C` with `f(C) ≥ t` and `y(C) < 1`.
///
/// Starting from the empty set and from every single item, items are added
/// by largest `Δ(j | C) / y_j` (zero prices first) until `f(C) ≥ t`; the set
/// is then shrunk by dropping expensive items while it stays above `t`.
/// Returns the cheapest set found. `None` proves nothing.
pub fn greedy_pricing_heuristic(inst: &Instance, y: &[Value], t: &Value) -> Option<ItemSet> {
    let n = inst.items();
    let f = inst.valuation();
    let one = Value::one();
    let price = |c: &ItemSet| -> Value { c.iter().map(|j| &y[j]).sum() };
    let mut best: Option<(Value, ItemSet)> = None;
    let starts = std::iter::once(None).chain((0..n).map(Some));
    for start in starts {
        let mut bundle = Bundle::new(f);
        if let Some(s) = start {
            if !inst.is_feasible_bundle(&ItemSet::from_items(n, [s]).expect("in range")) {
                continue;
            }
            bundle.insert(s);
        }
        while bundle.value() < t {
            let mut pick: Option<(usize, Value)> = None;
            for j in 0..n {
                if bundle.items().contains(j) || !inst.is_feasible_bundle(&bundle.items().with(j)) {
                    continue;
                }
                let gain = bundle.marginal(j);
                if !gain.is_positive() {
                    continue;
                }
                let better = match &pick {
                    None => true,
                    Some((k, g)) => density_greater(&gain, &y[j], g, &y[*k]),
                };
                if better {
                    pick = Some((j, gain));
                }
            }
            match pick {
                Some((j, _)) => {
                    bundle.insert(j);
                }
                None => break,
            }
        }
        if bundle.value() < t {
            continue;
        }
        let mut c = bundle.items().clone();
        let mut order: Vec<usize> = c.to_vec();
        order.sort_by(|a, b| y[*b].cmp(&y[*a]).then(a.cmp(b)));
        for j in order {
            let smaller = c.without(j);
            if f.evaluate(&smaller).expect("in range") >= *t {
                c = smaller;
            }
        }
        let p = price(&c);
        if p < one && best.as_ref().map_or(true, |(bp, _)| p < *bp) {
            best = Some((p, c));
        }
    }
    best.map(|(_, c)| c)
}

/// `g1 / y1 > g2 / y2` with `g / 0 = ∞` and ties among infinities broken by
/// the larger gain.
fn density_greater(g1: &Value, y1: &Value, g2: &Value, y2: &Value) -> bool {
    match (y1.is_zero(), y2.is_zero()) {
        (true, true) => g1 > g2,
        (true, false) => true,
        (false, true) => false,
        (false, false) => g1 * y2 > g2 * y1,
    }
}

/// All subsets of the ground set, for exhaustive cross-checks.
pub fn all_subsets(n: usize) -> impl Iterator<Item = ItemSet> {
    all_masks(n).map(move |m| ItemSet::from_mask(n, m))
}
