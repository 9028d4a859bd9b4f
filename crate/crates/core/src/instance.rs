use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::matroid::{is_common_independent, Matroid};
use crate::valuation::{Bundle, SetFunction};
use crate::value::Value;

/// A max-min allocation instance with identical valuations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    labels: Vec<String>,
    players: usize,
    valuation: SetFunction,
    matroids: Vec<Matroid>,
    cardinality_cap: Option<usize>,
}

impl Instance {
    pub fn new(labels: Vec<String>, players: usize, valuation: SetFunction) -> Result<Self> {
        Instance::with_constraints(labels, players, valuation, Vec::new(), None)
    }

    pub fn with_constraints(
        labels: Vec<String>,
        players: usize,
        valuation: SetFunction,
        matroids: Vec<Matroid>,
        cardinality_cap: Option<usize>,
    ) -> Result<Self> {
        let n = labels.len();
        if valuation.ground_size() != n {
            return Err(Error::Construction(format!(
                "valuation has {} items but the instance lists {n}",
                valuation.ground_size()
            )));
        }
        if players == 0 {
            return Err(Error::Construction("an instance needs at least one player".into()));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Construction("item labels must be distinct".into()));
        }
        if let Some(m) = matroids.iter().find(|m| m.ground_size() != n) {
            return Err(Error::Construction(format!(
                "matroid over {} items on an instance with {n} items",
                m.ground_size()
            )));
        }
        if let Some(k) = cardinality_cap {
            if k == 0 || k > n {
                return Err(Error::Construction(format!(
                    "cardinality cap {k} must lie in 1..={n}"
                )));
            }
        }
        Ok(Instance {
            labels,
            players,
            valuation,
            matroids,
            cardinality_cap,
        })
    }

    /// Items labelled `j0, j1, ...`.
    pub fn default_labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("j{i}")).collect()
    }

    pub fn items(&self) -> usize {
        self.labels.len()
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, j: usize) -> &str {
        &self.labels[j]
    }

    pub fn item_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn valuation(&self) -> &SetFunction {
        &self.valuation
    }

    pub fn matroids(&self) -> &[Matroid] {
        &self.matroids
    }

    pub fn cardinality_cap(&self) -> Option<usize> {
        self.cardinality_cap
    }

    pub fn value(&self, s: &ItemSet) -> Value {
        Bundle::from_set(&self.valuation, s).value().clone()
    }

    pub fn singleton_value(&self, j: usize) -> Value {
        Bundle::new(&self.valuation).marginal(j)
    }

    pub fn is_feasible_bundle(&self, s: &ItemSet) -> bool {
        is_common_independent(&self.matroids, s).unwrap_or(false)
    }

    pub fn full_set(&self) -> ItemSet {
        ItemSet::full(self.items())
    }

    pub fn empty_set(&self) -> ItemSet {
        ItemSet::empty(self.items())
    }

    pub fn set_labels(&self, s: &ItemSet) -> Vec<String> {
        s.iter().map(|j| self.labels[j].clone()).collect()
    }

    /// Same items and valuation with a different player count.
    pub fn with_players(&self, players: usize) -> Result<Instance> {
        Instance::with_constraints(
            self.labels.clone(),
            players,
            self.valuation.clone(),
            self.matroids.clone(),
            self.cardinality_cap,
        )
    }

    pub fn with_matroids(&self, matroids: Vec<Matroid>) -> Result<Instance> {
        Instance::with_constraints(
            self.labels.clone(),
            self.players,
            self.valuation.clone(),
            matroids,
            self.cardinality_cap,
        )
    }

    pub fn with_cardinality_cap(&self, cap: Option<usize>) -> Result<Instance> {
        Instance::with_constraints(
            self.labels.clone(),
            self.players,
            self.valuation.clone(),
            self.matroids.clone(),
            cap,
        )
    }

    /// Values multiplied by `c > 0`.
    pub fn scaled(&self, c: &Value) -> Instance {
        Instance {
            valuation: self.valuation.scaled(c),
            ..self.clone()
        }
    }

    /// The instance on the items `keep` (in that order) with `players`
    /// players. Matroids are restricted accordingly; the cardinality cap is
    /// dropped.
    pub fn restrict(&self, keep: &[usize], players: usize) -> Result<Instance> {
        let labels = keep.iter().map(|&j| self.labels[j].clone()).collect();
        let valuation = SetFunction::restricted(self.valuation.clone(), keep.to_vec())?;
        let matroids = self.matroids.iter().map(|m| m.restrict(keep)).collect();
        Instance::with_constraints(labels, players, valuation, matroids, None)
    }

    /// All distinct values `f(S)` over `S ⊆ J`, ascending.
    pub fn value_grid(&self) -> Result<Vec<Value>> {
        let mut vals = self.valuation.value_table()?;
        vals.sort();
        vals.dedup();
        Ok(vals)
    }
}

/// A partial allocation: disjoint bundles, one per player.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    bundles: Vec<ItemSet>,
}

impl Allocation {
    pub fn empty(items: usize, players: usize) -> Self {
        Allocation {
            bundles: vec![ItemSet::empty(items); players],
        }
    }

    /// Fails if bundles overlap or are over different ground sets.
    pub fn from_bundles(items: usize, bundles: Vec<ItemSet>) -> Result<Self> {
        let mut seen = ItemSet::empty(items);
        for b in &bundles {
            b.check_universe(items)?;
            if !seen.is_disjoint(b) {
                return Err(Error::Domain("bundles overlap".into()));
            }
            seen = seen.union(b);
        }
        Ok(Allocation { bundles })
    }

    /// `assignment[j]` is the player of item `j`, `None` when unallocated.
    pub fn from_assignment(players: usize, assignment: &[Option<usize>]) -> Self {
        let n = assignment.len();
        let mut bundles = vec![ItemSet::empty(n); players];
        for (j, p) in assignment.iter().enumerate() {
            if let Some(p) = p {
                bundles[*p].insert(j);
            }
        }
        Allocation { bundles }
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    pub fn bundle(&self, p: usize) -> &ItemSet {
        &self.bundles[p]
    }

    pub fn players(&self) -> usize {
        self.bundles.len()
    }

    pub fn items(&self) -> usize {
        self.bundles.first().map_or(0, |b| b.universe())
    }

    pub(crate) fn give(&mut self, p: usize, j: usize) {
        self.bundles[p].insert(j);
    }

    pub fn allocated(&self, items: usize) -> ItemSet {
        self.bundles
            .iter()
            .fold(ItemSet::empty(items), |acc, b| acc.union(b))
    }

    pub fn unallocated(&self, items: usize) -> ItemSet {
        ItemSet::full(items).difference(&self.allocated(items))
    }

    pub fn owner(&self, j: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(j))
    }

    pub fn values(&self, inst: &Instance) -> Vec<Value> {
        self.bundles.iter().map(|b| inst.value(b)).collect()
    }

    /// `min_p f(A_p)`; zero when there are no players.
    pub fn min_value(&self, inst: &Instance) -> Value {
        self.values(inst).into_iter().min().unwrap_or_else(Value::zero)
    }

    pub fn sum_value(&self, inst: &Instance) -> Value {
        self.values(inst).into_iter().sum()
    }

    /// Lowest-indexed player attaining the minimum.
    pub fn min_player(&self, inst: &Instance) -> Option<usize> {
        let vals = self.values(inst);
        let min = vals.iter().min()?;
        vals.iter().position(|v| v == min)
    }
}
