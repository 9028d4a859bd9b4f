//! JSON instance files and tie-break permutation files.
//!
//! An instance file looks like
//!
//! ```json
//! {
//!   "version": 1,
//!   "n": 2,
//!   "m": 1,
//!   "items": ["a", "b"],
//!   "valuation": {"type": "additive", "payload": {"weights": ["1", "3/2"]}},
//!   "matroids": [],
//!   "cardinality_cap": 1
//! }
//! ```
//!
//! Values are rational strings. Nested valuations are described relative to
//! the item labels of their own ground set. Serialization is canonical, so a
//! parsed file written back out is byte-identical to the writer's output.

use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};
use crate::greedy::TieBreakPolicy;
use crate::instance::Instance;
use crate::itemset::ItemSet;
use crate::matroid::{Matroid, MatroidKind};
use crate::valuation::SetFunction;
use crate::value::Value;

pub const FORMAT_VERSION: u64 = 1;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<'a>(obj: &'a Json, key: &str) -> Result<&'a Json> {
    obj.get(key).ok_or_else(|| parse_err(format!("missing field {key:?}")))
}

fn as_str<'a>(v: &'a Json, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| parse_err(format!("{what} must be a string")))
}

fn as_array<'a>(v: &'a Json, what: &str) -> Result<&'a Vec<Json>> {
    v.as_array().ok_or_else(|| parse_err(format!("{what} must be an array")))
}

fn as_count(v: &Json, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(format!("{what} must be a non-negative integer")))
}

fn as_value(v: &Json, what: &str) -> Result<Value> {
    as_str(v, what)?.parse()
}

fn string_list(v: &Json, what: &str) -> Result<Vec<String>> {
    as_array(v, what)?
        .iter()
        .map(|x| as_str(x, what).map(str::to_string))
        .collect()
}

struct Labels<'a> {
    labels: &'a [String],
    index: HashMap<&'a str, usize>,
}

impl<'a> Labels<'a> {
    fn new(labels: &'a [String]) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.as_str(), i).is_some() {
                return Err(parse_err(format!("duplicate item label {l:?}")));
            }
        }
        Ok(Labels { labels, index })
    }

    fn get(&self, l: &str) -> Result<usize> {
        self.index
            .get(l)
            .copied()
            .ok_or_else(|| parse_err(format!("unknown item label {l:?}")))
    }

    fn indices(&self, v: &Json, what: &str) -> Result<Vec<usize>> {
        string_list(v, what)?.iter().map(|l| self.get(l)).collect()
    }

    fn names(&self, items: impl IntoIterator<Item = usize>) -> Json {
        Json::Array(items.into_iter().map(|j| json!(self.labels[j])).collect())
    }
}

fn subset_key(labels: &[String], mask: u64) -> String {
    (0..labels.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| labels[i].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

fn typed(kind: &str, payload: Json) -> Json {
    json!({"type": kind, "payload": payload})
}

/// Valuation over items labelled `labels`.
pub fn valuation_to_json(f: &SetFunction, labels: &[String]) -> Json {
    match f {
        SetFunction::Additive(w) => typed(
            "additive",
            json!({"weights": w.iter().map(|x| x.to_string()).collect::<Vec<_>>()}),
        ),
        SetFunction::Coverage(c) => {
            let universe: Vec<Json> = c
                .element_labels()
                .iter()
                .zip(c.weights())
                .map(|(l, w)| json!({"label": l, "weight": w.to_string()}))
                .collect();
            let covers: Map<String, Json> = c
                .covers()
                .iter()
                .enumerate()
                .map(|(j, es)| {
                    let names: Vec<Json> = es.iter().map(|&e| json!(c.element_labels()[e])).collect();
                    (labels[j].clone(), Json::Array(names))
                })
                .collect();
            typed("coverage", json!({"universe": universe, "covers": covers}))
        }
        SetFunction::Table { values, .. } => {
            let table: Map<String, Json> = values
                .iter()
                .enumerate()
                .map(|(mask, v)| (subset_key(labels, mask as u64), json!(v.to_string())))
                .collect();
            typed("table", json!({ "values": table }))
        }
        SetFunction::Truncated { inner, cap } => typed(
            "truncated",
            json!({"cap": cap.to_string(), "inner": valuation_to_json(inner, labels)}),
        ),
        SetFunction::Augmented { inner, bonus } => {
            let (rest, last) = labels.split_at(labels.len() - 1);
            typed(
                "augmented",
                json!({
                    "bonus": bonus.to_string(),
                    "item": last[0],
                    "inner": valuation_to_json(inner, rest),
                }),
            )
        }
        SetFunction::DisjointSum { parts, offsets } => {
            let parts: Vec<Json> = parts
                .iter()
                .zip(offsets)
                .map(|(p, &o)| {
                    let ls = &labels[o..o + p.ground_size()];
                    json!({"items": ls, "valuation": valuation_to_json(p, ls)})
                })
                .collect();
            typed("disjoint_sum", json!({ "parts": parts }))
        }
        SetFunction::Restricted { inner, keep } => {
            // Dropped inner items get synthetic labels that cannot clash.
            let mut inner_labels: Vec<String> =
                (0..inner.ground_size()).map(|i| format!("#{i}")).collect();
            for (i, &k) in keep.iter().enumerate() {
                inner_labels[k] = labels[i].clone();
            }
            typed(
                "restricted",
                json!({
                    "inner_items": inner_labels,
                    "inner": valuation_to_json(inner, &inner_labels),
                }),
            )
        }
    }
}

pub fn valuation_from_json(v: &Json, labels: &[String]) -> Result<SetFunction> {
    let lab = Labels::new(labels)?;
    let kind = as_str(field(v, "type")?, "valuation type")?;
    let p = field(v, "payload")?;
    let n = labels.len();
    match kind {
        "additive" => {
            let w = as_array(field(p, "weights")?, "weights")?;
            if w.len() != n {
                return Err(parse_err(format!("{} weights for {n} items", w.len())));
            }
            SetFunction::additive(w.iter().map(|x| as_value(x, "weight")).collect::<Result<_>>()?)
        }
        "coverage" => {
            let mut elements = Vec::new();
            let mut element_index = HashMap::new();
            for e in as_array(field(p, "universe")?, "universe")? {
                let l = as_str(field(e, "label")?, "element label")?.to_string();
                let w = as_value(field(e, "weight")?, "element weight")?;
                if element_index.insert(l.clone(), elements.len()).is_some() {
                    return Err(parse_err(format!("duplicate element label {l:?}")));
                }
                elements.push((l, w));
            }
            let covers_obj = field(p, "covers")?
                .as_object()
                .ok_or_else(|| parse_err("covers must be an object"))?;
            let mut covers = vec![Vec::new(); n];
            for (item, es) in covers_obj {
                let j = lab.get(item)?;
                for e in string_list(es, "covered elements")? {
                    let idx = element_index
                        .get(&e)
                        .ok_or_else(|| parse_err(format!("unknown element {e:?}")))?;
                    covers[j].push(*idx);
                }
            }
            SetFunction::coverage(elements, covers)
        }
        "table" => {
            if n > 24 {
                return Err(parse_err("table valuations are limited to 24 items"));
            }
            let obj = field(p, "values")?
                .as_object()
                .ok_or_else(|| parse_err("table values must be an object"))?;
            let mut values: Vec<Option<Value>> = vec![None; 1 << n];
            for (key, val) in obj {
                let mut mask = 0u64;
                if !key.is_empty() {
                    for l in key.split(',') {
                        mask |= 1 << lab.get(l)?;
                    }
                }
                values[mask as usize] = Some(as_value(val, "table value")?);
            }
            let values = values
                .into_iter()
                .enumerate()
                .map(|(mask, v)| {
                    v.ok_or_else(|| {
                        parse_err(format!("table misses subset {{{}}}", subset_key(labels, mask as u64)))
                    })
                })
                .collect::<Result<_>>()?;
            SetFunction::table(n, values)
        }
        "truncated" => {
            let cap = as_value(field(p, "cap")?, "cap")?;
            SetFunction::truncated(valuation_from_json(field(p, "inner")?, labels)?, cap)
        }
        "augmented" => {
            let bonus = as_value(field(p, "bonus")?, "bonus")?;
            let item = as_str(field(p, "item")?, "augmented item")?;
            if n == 0 || labels[n - 1] != item {
                return Err(parse_err("the augmented item must be the last item"));
            }
            SetFunction::augmented(valuation_from_json(field(p, "inner")?, &labels[..n - 1])?, bonus)
        }
        "disjoint_sum" => {
            let mut parts = Vec::new();
            let mut at = 0;
            for part in as_array(field(p, "parts")?, "parts")? {
                let ls = string_list(field(part, "items")?, "part items")?;
                if labels.get(at..at + ls.len()) != Some(&ls[..]) {
                    return Err(parse_err("disjoint_sum parts must list consecutive items in order"));
                }
                at += ls.len();
                parts.push(valuation_from_json(field(part, "valuation")?, &ls)?);
            }
            if at != n {
                return Err(parse_err("disjoint_sum parts do not cover every item"));
            }
            Ok(SetFunction::disjoint_sum(parts))
        }
        "restricted" => {
            let inner_labels = string_list(field(p, "inner_items")?, "inner items")?;
            let inner_lab = Labels::new(&inner_labels)?;
            let keep = labels
                .iter()
                .map(|l| inner_lab.get(l))
                .collect::<Result<Vec<_>>>()?;
            let inner = valuation_from_json(field(p, "inner")?, &inner_labels)?;
            SetFunction::restricted(inner, keep)
        }
        other => Err(parse_err(format!("unknown valuation type {other:?}"))),
    }
}

fn mask_names(lab: &Labels, n: usize, mask: u64) -> Json {
    lab.names(ItemSet::from_mask(n, mask).iter())
}

fn matroid_to_json(m: &Matroid, lab: &Labels) -> Json {
    let n = m.ground_size();
    match m.kind() {
        MatroidKind::Uniform { rank } => json!({"type": "uniform", "rank": rank}),
        MatroidKind::Partition { blocks, capacities } => json!({
            "type": "partition",
            "blocks": blocks.iter().map(|b| lab.names(b.iter().copied())).collect::<Vec<_>>(),
            "capacities": capacities,
        }),
        MatroidKind::Explicit { generators, .. } => json!({
            "type": "explicit",
            "sets": generators.iter().map(|&g| mask_names(lab, n, g)).collect::<Vec<_>>(),
        }),
        MatroidKind::DownwardClosed { generators, .. } => json!({
            "type": "downward_closed",
            "sets": generators.iter().map(|&g| mask_names(lab, n, g)).collect::<Vec<_>>(),
        }),
    }
}

fn matroid_from_json(v: &Json, lab: &Labels) -> Result<Matroid> {
    let n = lab.labels.len();
    let sets = |v: &Json| -> Result<Vec<Vec<usize>>> {
        as_array(field(v, "sets")?, "sets")?
            .iter()
            .map(|s| lab.indices(s, "set"))
            .collect()
    };
    match as_str(field(v, "type")?, "matroid type")? {
        "uniform" => Ok(Matroid::uniform(n, as_count(field(v, "rank")?, "rank")?)),
        "partition" => {
            let blocks = as_array(field(v, "blocks")?, "blocks")?
                .iter()
                .map(|b| lab.indices(b, "block"))
                .collect::<Result<Vec<_>>>()?;
            let caps = as_array(field(v, "capacities")?, "capacities")?
                .iter()
                .map(|c| as_count(c, "capacity"))
                .collect::<Result<Vec<_>>>()?;
            Matroid::partition(n, blocks, caps)
        }
        "explicit" => Matroid::explicit(n, &sets(v)?),
        "downward_closed" => Matroid::downward_closed(n, &sets(v)?),
        other => Err(parse_err(format!("unknown matroid type {other:?}"))),
    }
}

pub fn instance_to_json(inst: &Instance) -> Json {
    let lab = Labels::new(inst.labels()).expect("instance labels are distinct");
    let mut obj = Map::new();
    obj.insert("version".into(), json!(FORMAT_VERSION));
    obj.insert("n".into(), json!(inst.items()));
    obj.insert("m".into(), json!(inst.players()));
    obj.insert("items".into(), json!(inst.labels()));
    obj.insert("valuation".into(), valuation_to_json(inst.valuation(), inst.labels()));
    obj.insert(
        "matroids".into(),
        Json::Array(inst.matroids().iter().map(|m| matroid_to_json(m, &lab)).collect()),
    );
    if let Some(k) = inst.cardinality_cap() {
        obj.insert("cardinality_cap".into(), json!(k));
    }
    Json::Object(obj)
}

/// Pretty-printed instance document with a trailing newline.
pub fn write_instance(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&instance_to_json(inst)).expect("serializable");
    s.push('\n');
    s
}

pub fn instance_from_json(v: &Json) -> Result<Instance> {
    let version = as_count(field(v, "version")?, "version")?;
    if version as u64 != FORMAT_VERSION {
        return Err(parse_err(format!("unsupported format version {version}")));
    }
    let labels = string_list(field(v, "items")?, "items")?;
    let n = as_count(field(v, "n")?, "n")?;
    if n != labels.len() {
        return Err(parse_err(format!("n = {n} but {} item labels", labels.len())));
    }
    let m = as_count(field(v, "m")?, "m")?;
    let lab = Labels::new(&labels)?;
    let valuation = valuation_from_json(field(v, "valuation")?, &labels)?;
    let matroids = match v.get("matroids") {
        None | Some(Json::Null) => Vec::new(),
        Some(ms) => as_array(ms, "matroids")?
            .iter()
            .map(|m| matroid_from_json(m, &lab))
            .collect::<Result<_>>()?,
    };
    let cap = match v.get("cardinality_cap") {
        None | Some(Json::Null) => None,
        Some(c) => Some(as_count(c, "cardinality_cap")?),
    };
    Instance::with_constraints(labels, m, valuation, matroids, cap).map_err(|e| match e {
        Error::Construction(msg) => Error::Parse(msg),
        other => other,
    })
}

pub fn read_instance(text: &str) -> Result<Instance> {
    let v: Json = serde_json::from_str(text).map_err(|e| parse_err(format!("invalid JSON: {e}")))?;
    instance_from_json(&v)
}

/// Policy file: `{"items": [labels by priority], "players": [indices by
/// priority], "seed_players": [indices]}`; `seed_players` is optional.
pub fn write_policy(inst: &Instance, policy: &TieBreakPolicy) -> String {
    let (items, players, seed): (Vec<usize>, Vec<usize>, Option<Vec<usize>>) = match policy {
        TieBreakPolicy::Lexicographic => ((0..inst.items()).collect(), (0..inst.players()).collect(), None),
        TieBreakPolicy::ByPermutation {
            items,
            players,
            seed_players,
        } => (items.clone(), players.clone(), seed_players.clone()),
    };
    let mut obj = Map::new();
    obj.insert(
        "items".into(),
        json!(items.iter().map(|&j| inst.label(j)).collect::<Vec<_>>()),
    );
    obj.insert("players".into(), json!(players));
    if let Some(s) = seed {
        obj.insert("seed_players".into(), json!(s));
    }
    let mut s = serde_json::to_string_pretty(&Json::Object(obj)).expect("serializable");
    s.push('\n');
    s
}

pub fn read_policy(inst: &Instance, text: &str) -> Result<TieBreakPolicy> {
    let v: Json = serde_json::from_str(text).map_err(|e| parse_err(format!("invalid JSON: {e}")))?;
    let lab = Labels::new(inst.labels())?;
    let items = lab.indices(field(&v, "items")?, "items")?;
    let counts = |x: &Json, what: &str| -> Result<Vec<usize>> {
        as_array(x, what)?.iter().map(|p| as_count(p, what)).collect()
    };
    let players = counts(field(&v, "players")?, "players")?;
    let seed_players = match v.get("seed_players") {
        None | Some(Json::Null) => None,
        Some(s) => Some(counts(s, "seed_players")?),
    };
    let policy = TieBreakPolicy::ByPermutation {
        items,
        players,
        seed_players,
    };
    policy
        .ranks(inst.items(), inst.players())
        .map_err(|e| parse_err(e.to_string()))?;
    Ok(policy)
}

/// Labels of each bundle, keyed by player index.
pub fn allocation_to_json(inst: &Instance, bundles: &[ItemSet]) -> Json {
    let map: BTreeMap<String, Vec<String>> = bundles
        .iter()
        .enumerate()
        .map(|(p, b)| (p.to_string(), inst.set_labels(b)))
        .collect();
    json!(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_round_trip() {
        let f = SetFunction::additive(vec![Value::ratio(3, 2), Value::from_int(2)]).unwrap();
        let inst = Instance::with_constraints(
            vec!["a".into(), "b".into()],
            2,
            f,
            vec![Matroid::uniform(2, 1)],
            Some(1),
        )
        .unwrap();
        let text = write_instance(&inst);
        let back = read_instance(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(write_instance(&back), text);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(read_instance("{"), Err(Error::Parse(_))));
        assert!(matches!(
            read_instance(r#"{"version": 2, "n": 0, "m": 1, "items": [], "valuation": {}}"#),
            Err(Error::Parse(_))
        ));
        let bad_value = r#"{"version": 1, "n": 1, "m": 1, "items": ["a"],
            "valuation": {"type": "additive", "payload": {"weights": ["1/0"]}}}"#;
        assert!(matches!(read_instance(bad_value), Err(Error::Parse(_))));
        let zero_players = r#"{"version": 1, "n": 1, "m": 0, "items": ["a"],
            "valuation": {"type": "additive", "payload": {"weights": ["1"]}}}"#;
        assert!(matches!(read_instance(zero_players), Err(Error::Parse(_))));
    }

    #[test]
    fn policy_round_trip() {
        let f = SetFunction::additive(vec![Value::one(); 3]).unwrap();
        let inst = Instance::new(Instance::default_labels(3), 2, f).unwrap();
        let p = TieBreakPolicy::ByPermutation {
            items: vec![2, 0, 1],
            players: vec![1, 0],
            seed_players: Some(vec![0, 1]),
        };
        assert_eq!(read_policy(&inst, &write_policy(&inst, &p)).unwrap(), p);
        assert!(read_policy(&inst, r#"{"items": ["j0"], "players": [0, 1]}"#).is_err());
    }
}
