//! Monotone set functions with exact values.
//!
//! A [`SetFunction`] is an oracle over the ground set `0..n`. Composite
//! variants (truncation, augmentation with a fresh item, disjoint sums and
//! restrictions) keep the submodular-and-monotone property of their parts.
//!
//! Evaluation goes through [`Bundle`], an incremental evaluator that keeps
//! enough per-variant state to answer marginal queries without re-evaluating
//! the whole set. The greedy solver holds one bundle per player.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::value::Value;

/// Largest ground set accepted by the explicit table variant and by
/// exhaustive checks.
pub const MAX_ENUMERATION_ITEMS: usize = 24;

/// Weighted coverage: item `j` covers the universe elements `covers[j]`, and
/// a set is worth the total weight of the elements it covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverage {
    element_labels: Vec<String>,
    weights: Vec<Value>,
    covers: Vec<Vec<usize>>,
}

impl Coverage {
    pub fn element_labels(&self) -> &[String] {
        &self.element_labels
    }

    pub fn weights(&self) -> &[Value] {
        &self.weights
    }

    pub fn covers(&self) -> &[Vec<usize>] {
        &self.covers
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetFunction {
    /// `f(S) = Σ_{j∈S} w_j`.
    Additive(Vec<Value>),
    Coverage(Coverage),
    /// Explicit value per subset, indexed by membership mask.
    Table { n: usize, values: Vec<Value> },
    /// `min(cap, inner(S))`.
    Truncated { inner: Box<SetFunction>, cap: Value },
    /// Adds a fresh item `z` (index `inner.ground_size()`) worth `bonus`
    /// regardless of the rest of the set.
    Augmented { inner: Box<SetFunction>, bonus: Value },
    /// Sum of functions on consecutive blocks of the ground set.
    DisjointSum { parts: Vec<SetFunction>, offsets: Vec<usize> },
    /// `inner` seen through `keep`: item `i` here is item `keep[i]` of
    /// `inner`.
    Restricted { inner: Box<SetFunction>, keep: Vec<usize> },
}

fn check_non_negative(v: &Value, what: &str) -> Result<()> {
    if v.is_negative() {
        Err(Error::Construction(format!("{what} must be non-negative, got {v}")))
    } else {
        Ok(())
    }
}

impl SetFunction {
    pub fn additive(weights: Vec<Value>) -> Result<Self> {
        for w in &weights {
            check_non_negative(w, "additive weight")?;
        }
        Ok(SetFunction::Additive(weights))
    }

    /// `elements` are `(label, weight)` pairs; `covers[j]` lists element
    /// indices covered by item `j`.
    pub fn coverage(elements: Vec<(String, Value)>, covers: Vec<Vec<usize>>) -> Result<Self> {
        let (element_labels, weights): (Vec<_>, Vec<_>) = elements.into_iter().unzip();
        for w in &weights {
            check_non_negative(w, "coverage element weight")?;
        }
        let mut covers = covers;
        for c in covers.iter_mut() {
            c.sort_unstable();
            c.dedup();
            if let Some(&e) = c.last() {
                if e >= weights.len() {
                    return Err(Error::Construction(format!(
                        "coverage element {e} out of range for universe of size {}",
                        weights.len()
                    )));
                }
            }
        }
        Ok(SetFunction::Coverage(Coverage {
            element_labels,
            weights,
            covers,
        }))
    }

    /// Explicit table indexed by subset mask. Values are shifted so that
    /// `f(∅) = 0`; negative values after the shift are rejected.
    pub fn table(n: usize, values: Vec<Value>) -> Result<Self> {
        if n > MAX_ENUMERATION_ITEMS {
            return Err(Error::Construction(format!(
                "table functions are limited to {MAX_ENUMERATION_ITEMS} items, got {n}"
            )));
        }
        if values.len() != 1usize << n {
            return Err(Error::Construction(format!(
                "table over {n} items needs {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        let base = values[0].clone();
        let values: Vec<Value> = values.into_iter().map(|v| v - &base).collect();
        for v in &values {
            check_non_negative(v, "table value")?;
        }
        Ok(SetFunction::Table { n, values })
    }

    pub fn truncated(inner: SetFunction, cap: Value) -> Result<Self> {
        check_non_negative(&cap, "truncation cap")?;
        Ok(SetFunction::Truncated {
            inner: Box::new(inner),
            cap,
        })
    }

    pub fn augmented(inner: SetFunction, bonus: Value) -> Result<Self> {
        check_non_negative(&bonus, "augmentation bonus")?;
        Ok(SetFunction::Augmented {
            inner: Box::new(inner),
            bonus,
        })
    }

    pub fn disjoint_sum(parts: Vec<SetFunction>) -> Self {
        let mut offsets = Vec::with_capacity(parts.len());
        let mut at = 0;
        for p in &parts {
            offsets.push(at);
            at += p.ground_size();
        }
        SetFunction::DisjointSum { parts, offsets }
    }

    pub fn restricted(inner: SetFunction, keep: Vec<usize>) -> Result<Self> {
        let n = inner.ground_size();
        let mut seen = vec![false; n];
        for &k in &keep {
            if k >= n || std::mem::replace(&mut seen[k], true) {
                return Err(Error::Construction(format!(
                    "restriction index {k} is out of range or repeated"
                )));
            }
        }
        Ok(SetFunction::Restricted {
            inner: Box::new(inner),
            keep,
        })
    }

    pub fn ground_size(&self) -> usize {
        match self {
            SetFunction::Additive(w) => w.len(),
            SetFunction::Coverage(c) => c.covers.len(),
            SetFunction::Table { n, .. } => *n,
            SetFunction::Truncated { inner, .. } => inner.ground_size(),
            SetFunction::Augmented { inner, .. } => inner.ground_size() + 1,
            SetFunction::DisjointSum { parts, .. } => parts.iter().map(|p| p.ground_size()).sum(),
            SetFunction::Restricted { keep, .. } => keep.len(),
        }
    }

    /// Returns a function whose every value is multiplied by `c > 0`.
    pub fn scaled(&self, c: &Value) -> SetFunction {
        match self {
            SetFunction::Additive(w) => SetFunction::Additive(w.iter().map(|x| x * c).collect()),
            SetFunction::Coverage(cov) => SetFunction::Coverage(Coverage {
                element_labels: cov.element_labels.clone(),
                weights: cov.weights.iter().map(|x| x * c).collect(),
                covers: cov.covers.clone(),
            }),
            SetFunction::Table { n, values } => SetFunction::Table {
                n: *n,
                values: values.iter().map(|x| x * c).collect(),
            },
            SetFunction::Truncated { inner, cap } => SetFunction::Truncated {
                inner: Box::new(inner.scaled(c)),
                cap: cap * c,
            },
            SetFunction::Augmented { inner, bonus } => SetFunction::Augmented {
                inner: Box::new(inner.scaled(c)),
                bonus: bonus * c,
            },
            SetFunction::DisjointSum { parts, offsets } => SetFunction::DisjointSum {
                parts: parts.iter().map(|p| p.scaled(c)).collect(),
                offsets: offsets.clone(),
            },
            SetFunction::Restricted { inner, keep } => SetFunction::Restricted {
                inner: Box::new(inner.scaled(c)),
                keep: keep.clone(),
            },
        }
    }

    fn check_set(&self, s: &ItemSet) -> Result<()> {
        s.check_universe(self.ground_size())
    }

    fn check_item(&self, j: usize) -> Result<()> {
        let n = self.ground_size();
        if j >= n {
            return Err(Error::Domain(format!(
                "item {j} out of range for ground set of size {n}"
            )));
        }
        Ok(())
    }

    /// `f(S)`.
    pub fn evaluate(&self, s: &ItemSet) -> Result<Value> {
        self.check_set(s)?;
        Ok(Bundle::from_set(self, s).value().clone())
    }

    /// `f(S ∪ {j}) − f(S)`; zero when `j ∈ S`.
    pub fn marginal(&self, j: usize, s: &ItemSet) -> Result<Value> {
        self.check_set(s)?;
        self.check_item(j)?;
        Ok(Bundle::from_set(self, s).marginal(j))
    }

    /// `f(S ∪ T) − f(T)`.
    pub fn marginal_set(&self, s: &ItemSet, t: &ItemSet) -> Result<Value> {
        self.check_set(s)?;
        self.check_set(t)?;
        Ok(self.evaluate(&s.union(t))? - self.evaluate(t)?)
    }

    /// `f(S) − f(S − {j})`; `j` must belong to `S`.
    pub fn remove_marginal(&self, j: usize, s: &ItemSet) -> Result<Value> {
        self.check_set(s)?;
        self.check_item(j)?;
        if !s.contains(j) {
            return Err(Error::Domain(format!("item {j} is not in the set")));
        }
        Ok(self.evaluate(s)? - self.evaluate(&s.without(j))?)
    }

    /// Values of all `2^n` subsets indexed by mask.
    pub fn value_table(&self) -> Result<Vec<Value>> {
        let n = self.ground_size();
        if n > MAX_ENUMERATION_ITEMS {
            return Err(Error::Resource(format!(
                "enumerating all subsets of {n} items (limit {MAX_ENUMERATION_ITEMS})"
            )));
        }
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1u64 << n) {
            out.push(Bundle::from_set(self, &ItemSet::from_mask(n, mask)).value().clone());
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
enum State {
    Plain,
    Coverage { covered: Vec<bool> },
    Table { mask: u64 },
    Truncated { inner: Box<State>, inner_value: Value },
    Augmented { inner: Box<State>, has_z: bool },
    Disjoint { parts: Vec<State> },
    Restricted { inner: Box<State> },
}

impl State {
    fn new(f: &SetFunction) -> State {
        match f {
            SetFunction::Additive(_) => State::Plain,
            SetFunction::Coverage(c) => State::Coverage {
                covered: vec![false; c.weights.len()],
            },
            SetFunction::Table { .. } => State::Table { mask: 0 },
            SetFunction::Truncated { inner, .. } => State::Truncated {
                inner: Box::new(State::new(inner)),
                inner_value: Value::zero(),
            },
            SetFunction::Augmented { inner, .. } => State::Augmented {
                inner: Box::new(State::new(inner)),
                has_z: false,
            },
            SetFunction::DisjointSum { parts, .. } => State::Disjoint {
                parts: parts.iter().map(State::new).collect(),
            },
            SetFunction::Restricted { inner, .. } => State::Restricted {
                inner: Box::new(State::new(inner)),
            },
        }
    }

    /// Marginal of `j`, which must not already be in the state's set.
    fn marginal(&self, f: &SetFunction, j: usize) -> Value {
        match (f, self) {
            (SetFunction::Additive(w), State::Plain) => w[j].clone(),
            (SetFunction::Coverage(c), State::Coverage { covered }) => c.covers[j]
                .iter()
                .filter(|&&e| !covered[e])
                .map(|&e| &c.weights[e])
                .sum(),
            (SetFunction::Table { values, .. }, State::Table { mask }) => {
                &values[(mask | 1 << j) as usize] - &values[*mask as usize]
            }
            (SetFunction::Truncated { inner, cap }, State::Truncated { inner: st, inner_value }) => {
                if inner_value >= cap {
                    return Value::zero();
                }
                let after = inner_value + st.marginal(inner, j);
                Value::min_of(cap, &after) - inner_value
            }
            (SetFunction::Augmented { inner, bonus }, State::Augmented { inner: st, has_z }) => {
                if j == inner.ground_size() {
                    if *has_z {
                        Value::zero()
                    } else {
                        bonus.clone()
                    }
                } else {
                    st.marginal(inner, j)
                }
            }
            (SetFunction::DisjointSum { parts, offsets }, State::Disjoint { parts: sts }) => {
                let k = offsets.partition_point(|&o| o <= j) - 1;
                sts[k].marginal(&parts[k], j - offsets[k])
            }
            (SetFunction::Restricted { inner, keep }, State::Restricted { inner: st }) => {
                st.marginal(inner, keep[j])
            }
            _ => unreachable!("evaluator state does not match its function"),
        }
    }

    fn insert(&mut self, f: &SetFunction, j: usize) -> Value {
        match (f, self) {
            (SetFunction::Additive(w), State::Plain) => w[j].clone(),
            (SetFunction::Coverage(c), State::Coverage { covered }) => {
                let mut gain = Value::zero();
                for &e in &c.covers[j] {
                    if !covered[e] {
                        covered[e] = true;
                        gain += &c.weights[e];
                    }
                }
                gain
            }
            (SetFunction::Table { values, .. }, State::Table { mask }) => {
                let before = *mask;
                *mask |= 1 << j;
                &values[*mask as usize] - &values[before as usize]
            }
            (SetFunction::Truncated { inner, cap }, State::Truncated { inner: st, inner_value }) => {
                let old = Value::min_of(cap, inner_value);
                let gain = st.insert(inner, j);
                *inner_value += gain;
                Value::min_of(cap, inner_value) - old
            }
            (SetFunction::Augmented { inner, bonus }, State::Augmented { inner: st, has_z }) => {
                if j == inner.ground_size() {
                    *has_z = true;
                    bonus.clone()
                } else {
                    st.insert(inner, j)
                }
            }
            (SetFunction::DisjointSum { parts, offsets }, State::Disjoint { parts: sts }) => {
                let k = offsets.partition_point(|&o| o <= j) - 1;
                sts[k].insert(&parts[k], j - offsets[k])
            }
            (SetFunction::Restricted { inner, keep }, State::Restricted { inner: st }) => {
                st.insert(inner, keep[j])
            }
            _ => unreachable!("evaluator state does not match its function"),
        }
    }
}

/// A growing set together with its value under `f`.
#[derive(Clone, Debug)]
pub struct Bundle<'f> {
    f: &'f SetFunction,
    state: State,
    items: ItemSet,
    value: Value,
}

impl<'f> Bundle<'f> {
    pub fn new(f: &'f SetFunction) -> Self {
        Bundle {
            f,
            state: State::new(f),
            items: ItemSet::empty(f.ground_size()),
            value: Value::zero(),
        }
    }

    pub fn from_set(f: &'f SetFunction, s: &ItemSet) -> Self {
        let mut b = Bundle::new(f);
        for j in s.iter() {
            b.insert(j);
        }
        b
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    pub fn items(&self) -> &ItemSet {
        &self.items
    }

    pub fn marginal(&self, j: usize) -> Value {
        if self.items.contains(j) {
            Value::zero()
        } else {
            self.state.marginal(self.f, j)
        }
    }

    /// Adds `j` and returns its marginal.
    pub fn insert(&mut self, j: usize) -> Value {
        if self.items.contains(j) {
            return Value::zero();
        }
        self.items.insert(j);
        let gain = self.state.insert(self.f, j);
        self.value += &gain;
        gain
    }
}

/// How [`check_submodular_monotone`] explores the function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Every subset; requires at most [`MAX_ENUMERATION_ITEMS`] items.
    Exhaustive,
    /// `samples` uniformly drawn triples `(j, S ⊆ T)` from a seeded stream.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmodularityReport {
    pub mode: CheckMode,
    pub normalized: bool,
    pub submodular: bool,
    pub monotone: bool,
    /// `(j, S, T)` with `S ⊆ T` and `Δ(j|S) < Δ(j|T)`.
    pub witness: Option<(usize, ItemSet, ItemSet)>,
    /// `(S, T)` with `S ⊆ T` and `f(S) > f(T)`.
    pub monotone_witness: Option<(ItemSet, ItemSet)>,
    pub checks: u64,
}

/// Verifies diminishing returns and monotonicity.
///
/// Exhaustive mode uses the local form of diminishing returns,
/// `Δ(j|S) ≥ Δ(j|S+k)` for all `S` and `j, k ∉ S`, which is equivalent to the
/// `S ⊆ T` form; the first violation in (S by mask, k, j) order is reported.
pub fn check_submodular_monotone(f: &SetFunction, mode: CheckMode) -> Result<SubmodularityReport> {
    let n = f.ground_size();
    match mode {
        CheckMode::Exhaustive => {
            if n > MAX_ENUMERATION_ITEMS {
                return Err(Error::Usage(format!(
                    "exhaustive check needs at most {MAX_ENUMERATION_ITEMS} items, got {n}; use sampled mode"
                )));
            }
            let table = f.value_table()?;
            let normalized = table[0].is_zero();
            let mut witness = None;
            let mut monotone_witness = None;
            let mut checks = 0u64;
            'outer: for s in 0..(1u64 << n) {
                for k in 0..n {
                    if s >> k & 1 == 1 {
                        continue;
                    }
                    let sk = s | 1 << k;
                    if monotone_witness.is_none() && table[s as usize] > table[sk as usize] {
                        monotone_witness = Some((ItemSet::from_mask(n, s), ItemSet::from_mask(n, sk)));
                    }
                    if witness.is_some() {
                        continue;
                    }
                    for j in 0..n {
                        if j == k || s >> j & 1 == 1 {
                            continue;
                        }
                        checks += 1;
                        let small = &table[(s | 1 << j) as usize] - &table[s as usize];
                        let large = &table[(sk | 1 << j) as usize] - &table[sk as usize];
                        if small < large {
                            witness = Some((j, ItemSet::from_mask(n, s), ItemSet::from_mask(n, sk)));
                            break;
                        }
                    }
                }
                if witness.is_some() && monotone_witness.is_some() {
                    break 'outer;
                }
            }
            Ok(SubmodularityReport {
                mode,
                normalized,
                submodular: witness.is_none(),
                monotone: monotone_witness.is_none(),
                witness,
                monotone_witness,
                checks,
            })
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let empty = ItemSet::empty(n);
            let normalized = f.evaluate(&empty)?.is_zero();
            let mut witness = None;
            let mut monotone_witness = None;
            if n == 0 {
                return Ok(SubmodularityReport {
                    mode,
                    normalized,
                    submodular: true,
                    monotone: true,
                    witness,
                    monotone_witness,
                    checks: 0,
                });
            }
            for _ in 0..samples {
                let mut s = ItemSet::empty(n);
                let mut t = ItemSet::empty(n);
                for i in 0..n {
                    match rng.gen_range(0..3) {
                        0 => {
                            s.insert(i);
                            t.insert(i);
                        }
                        1 => {
                            t.insert(i);
                        }
                        _ => {}
                    }
                }
                let j = rng.gen_range(0..n);
                let bs = Bundle::from_set(f, &s);
                let bt = Bundle::from_set(f, &t);
                if monotone_witness.is_none() && bs.value() > bt.value() {
                    monotone_witness = Some((s.clone(), t.clone()));
                }
                if witness.is_none() && bs.marginal(j) < bt.marginal(j) {
                    witness = Some((j, s, t));
                }
                if witness.is_some() && monotone_witness.is_some() {
                    break;
                }
            }
            Ok(SubmodularityReport {
                mode,
                normalized,
                submodular: witness.is_none(),
                monotone: monotone_witness.is_none(),
                witness,
                monotone_witness,
                checks: samples as u64,
            })
        }
    }
}
