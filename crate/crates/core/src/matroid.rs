//! Independence oracles for per-bundle constraints.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::itemset::ItemSet;

/// Largest ground set for which the exchange property of an explicit matroid
/// is verified.
pub const MAX_EXPLICIT_ITEMS: usize = 16;
const MAX_DOWNWARD_CLOSED_ITEMS: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatroidKind {
    /// Sets of size at most `rank`.
    Uniform { rank: usize },
    /// At most `capacities[b]` items from block `b`; items outside every
    /// block are unconstrained.
    Partition {
        blocks: Vec<Vec<usize>>,
        capacities: Vec<usize>,
    },
    /// Downward closure of a list of sets, checked for the exchange property.
    Explicit { independent: HashSet<u64>, generators: Vec<u64> },
    /// Downward closure of a list of sets without the exchange check; not a
    /// matroid in general.
    DownwardClosed { independent: HashSet<u64>, generators: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matroid {
    n: usize,
    kind: MatroidKind,
}

fn downward_closure(n: usize, generators: &[u64]) -> HashSet<u64> {
    let mut out = HashSet::new();
    out.insert(0);
    let mut stack: Vec<u64> = generators.to_vec();
    while let Some(s) = stack.pop() {
        if !out.insert(s) {
            continue;
        }
        for i in 0..n {
            if s >> i & 1 == 1 {
                let t = s & !(1 << i);
                if !out.contains(&t) {
                    stack.push(t);
                }
            }
        }
    }
    out
}

fn sets_to_masks(n: usize, sets: &[Vec<usize>]) -> Result<Vec<u64>> {
    sets.iter()
        .map(|s| {
            let mut m = 0u64;
            for &i in s {
                if i >= n {
                    return Err(Error::Construction(format!(
                        "item {i} out of range for matroid on {n} items"
                    )));
                }
                m |= 1 << i;
            }
            Ok(m)
        })
        .collect()
}

impl Matroid {
    pub fn uniform(n: usize, rank: usize) -> Self {
        Matroid {
            n,
            kind: MatroidKind::Uniform { rank },
        }
    }

    pub fn partition(n: usize, blocks: Vec<Vec<usize>>, capacities: Vec<usize>) -> Result<Self> {
        if blocks.len() != capacities.len() {
            return Err(Error::Construction(
                "partition matroid needs one capacity per block".into(),
            ));
        }
        let mut seen = vec![false; n];
        for b in &blocks {
            for &i in b {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Construction(format!(
                        "partition block item {i} out of range or in two blocks"
                    )));
                }
            }
        }
        Ok(Matroid {
            n,
            kind: MatroidKind::Partition { blocks, capacities },
        })
    }

    /// Matroid whose independent sets are all subsets of the given sets.
    /// Rejects families that violate the exchange property.
    pub fn explicit(n: usize, sets: &[Vec<usize>]) -> Result<Self> {
        if n > MAX_EXPLICIT_ITEMS {
            return Err(Error::Construction(format!(
                "explicit matroids are limited to {MAX_EXPLICIT_ITEMS} items, got {n}"
            )));
        }
        let generators = sets_to_masks(n, sets)?;
        let independent = downward_closure(n, &generators);
        if let Some((small, large)) = exchange_violation(n, &independent) {
            return Err(Error::Construction(format!(
                "not a matroid: {:?} cannot be extended from {:?}",
                ItemSet::from_mask(n, small),
                ItemSet::from_mask(n, large)
            )));
        }
        Ok(Matroid {
            n,
            kind: MatroidKind::Explicit {
                independent,
                generators,
            },
        })
    }

    /// Any downward-closed family; the exchange property is not checked.
    pub fn downward_closed(n: usize, sets: &[Vec<usize>]) -> Result<Self> {
        if n > MAX_DOWNWARD_CLOSED_ITEMS {
            return Err(Error::Construction(format!(
                "explicit set systems are limited to {MAX_DOWNWARD_CLOSED_ITEMS} items, got {n}"
            )));
        }
        let generators = sets_to_masks(n, sets)?;
        let independent = downward_closure(n, &generators);
        Ok(Matroid {
            n,
            kind: MatroidKind::DownwardClosed {
                independent,
                generators,
            },
        })
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &MatroidKind {
        &self.kind
    }

    /// False only for the unchecked downward-closed variant.
    pub fn is_verified_matroid(&self) -> bool {
        !matches!(self.kind, MatroidKind::DownwardClosed { .. })
    }

    /// Restriction to the items `keep`; item `keep[i]` becomes item `i`.
    pub fn restrict(&self, keep: &[usize]) -> Matroid {
        let n = keep.len();
        let remap_mask = |mask: u64| -> Option<u64> {
            let mut out = 0u64;
            let mut seen = 0u64;
            for (i, &j) in keep.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    out |= 1 << i;
                    seen |= 1 << j;
                }
            }
            (seen == mask).then_some(out)
        };
        let kind = match &self.kind {
            MatroidKind::Uniform { rank } => MatroidKind::Uniform { rank: *rank },
            MatroidKind::Partition { blocks, capacities } => MatroidKind::Partition {
                blocks: blocks
                    .iter()
                    .map(|b| {
                        b.iter()
                            .filter_map(|j| keep.iter().position(|k| k == j))
                            .collect()
                    })
                    .collect(),
                capacities: capacities.clone(),
            },
            MatroidKind::Explicit { independent, .. } | MatroidKind::DownwardClosed { independent, .. } => {
                let independent: HashSet<u64> =
                    independent.iter().filter_map(|&s| remap_mask(s)).collect();
                let mut generators: Vec<u64> = independent
                    .iter()
                    .copied()
                    .filter(|&s| (0..n).all(|i| s >> i & 1 == 1 || !independent.contains(&(s | 1 << i))))
                    .collect();
                generators.sort_unstable();
                if matches!(self.kind, MatroidKind::Explicit { .. }) {
                    MatroidKind::Explicit { independent, generators }
                } else {
                    MatroidKind::DownwardClosed { independent, generators }
                }
            }
        };
        Matroid { n, kind }
    }

    pub fn is_independent(&self, s: &ItemSet) -> Result<bool> {
        s.check_universe(self.n)?;
        Ok(match &self.kind {
            MatroidKind::Uniform { rank } => s.len() <= *rank,
            MatroidKind::Partition { blocks, capacities } => blocks
                .iter()
                .zip(capacities)
                .all(|(b, &cap)| b.iter().filter(|&&i| s.contains(i)).count() <= cap),
            MatroidKind::Explicit { independent, .. }
            | MatroidKind::DownwardClosed { independent, .. } => independent.contains(&s.mask()),
        })
    }
}

/// Finds `I, J` independent with `|I| < |J|` such that no `x ∈ J \ I` keeps
/// `I + x` independent.
fn exchange_violation(n: usize, independent: &HashSet<u64>) -> Option<(u64, u64)> {
    let mut sets: Vec<u64> = independent.iter().copied().collect();
    sets.sort_unstable();
    // Augmenting from |I| to |I|+1 suffices: if the property holds for
    // |J| = |I| + 1 it holds for all larger J by restricting J.
    for &i in &sets {
        let ci = i.count_ones();
        for &j in &sets {
            if j.count_ones() != ci + 1 {
                continue;
            }
            let ok = (0..n)
                .filter(|&x| j >> x & 1 == 1 && i >> x & 1 == 0)
                .any(|x| independent.contains(&(i | 1 << x)));
            if !ok {
                return Some((i, j));
            }
        }
    }
    None
}

/// Conjunction of [`Matroid::is_independent`]; true for an empty list.
pub fn is_common_independent(ms: &[Matroid], s: &ItemSet) -> Result<bool> {
    if let Some(first) = ms.first() {
        if ms.iter().any(|m| m.n != first.n) {
            return Err(Error::Domain("matroids over different ground sets".into()));
        }
    }
    for m in ms {
        if !m.is_independent(s)? {
            return Ok(false);
        }
    }
    Ok(true)
}
