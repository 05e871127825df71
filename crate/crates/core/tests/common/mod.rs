#![allow(dead_code)]

use std::path::PathBuf;

use prolong::algebra::{Field, Poly, Scalar};
use prolong::deriv_index::{enumerate_upto, DerivIndex};
use prolong::dsl::parse_system;
use prolong::tower::Presentation;
use prolong::verdict::SystemSpec;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn load(name: &str) -> SystemSpec {
    let path = corpus_dir().join(format!("{name}.dsys"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_system(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn corpus_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .expect("corpus")
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "dsys").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

pub fn slot(entries: &[u32]) -> DerivIndex {
    DerivIndex::from_entries(entries, 0)
}

/// A system `leader = Σ c·(smaller slot) + c₀` with leaders forming an antichain per unknown; for m ≤ 2
/// a right-hand side may also carry a product of two base slots.
pub fn random_solved_system(rng: &mut StdRng, m: usize, n: usize, max_height: u32) -> Presentation {
    let field = Field::Rational;
    let all = enumerate_upto(m, n, max_height).unwrap();
    let mut leaders: Vec<DerivIndex> = Vec::new();
    for k in 0..n {
        let candidates: Vec<&DerivIndex> = all.iter().filter(|v| v.unknown == k && v.height() >= 1).collect();
        let wanted = rng.gen_range(0..=m.min(2));
        for _ in 0..wanted {
            let c = (*candidates.choose(rng).unwrap()).clone();
            if leaders.iter().all(|l| !l.below(&c).unwrap() && !c.below(l).unwrap()) {
                leaders.push(c);
            }
        }
    }
    let mut polys = Vec::new();
    for leader in &leaders {
        let smaller: Vec<&DerivIndex> = all.iter().filter(|v| *v < leader && !leaders.contains(v)).collect();
        let mut rhs = Poly::from_i64(field, rng.gen_range(-2..=2));
        for _ in 0..rng.gen_range(0..=2) {
            if let Some(v) = smaller.choose(rng) {
                let c = Scalar::from_i64(field, [-2, -1, 1, 2, 3][rng.gen_range(0..5)]);
                rhs = rhs.add(&Poly::var(field, (*v).clone()).scale(&c));
            }
        }
        if m <= 2 && rng.gen_bool(0.25) {
            let base: Vec<&DerivIndex> = smaller.iter().copied().filter(|v| v.height() == 0).collect();
            if let (Some(a), Some(b)) = (base.choose(rng), base.choose(rng)) {
                rhs = rhs.add(&Poly::var(field, (*a).clone()).mul(&Poly::var(field, (*b).clone())));
            }
        }
        polys.push(Poly::var(field, leader.clone()).sub(&rhs));
    }
    Presentation::with_relations(m, n, field, polys).unwrap()
}

/// Every value reachable by changing exactly one field of `v`.
pub fn single_field_mutations(v: &Value) -> Vec<Value> {
    let mut out = Vec::new();
    mutate_at(v, &mut |replacement| out.push(replacement), &|x| x);
    out.retain(|m| m != v);
    out
}

fn leaf_variants(v: &Value) -> Vec<Value> {
    match v {
        Value::Null => vec![Value::from(0), Value::from("x")],
        Value::Bool(b) => vec![Value::Bool(!b)],
        Value::Number(n) => {
            let k = n.as_u64().unwrap_or(0);
            vec![Value::from(k + 1), Value::Null]
        }
        Value::String(s) => vec![Value::from(format!("{s}1")), Value::from(s.chars().skip(1).collect::<String>())],
        _ => Vec::new(),
    }
}

fn mutate_at(v: &Value, emit: &mut dyn FnMut(Value), rebuild: &dyn Fn(Value) -> Value) {
    match v {
        Value::Object(map) => {
            for (key, child) in map {
                let mut dropped = map.clone();
                dropped.remove(key);
                emit(rebuild(Value::Object(dropped)));
                let key = key.clone();
                let map = map.clone();
                let inner = move |x: Value| {
                    let mut m = map.clone();
                    m.insert(key.clone(), x);
                    Value::Object(m)
                };
                mutate_at(child, emit, &|x| rebuild(inner(x)));
            }
        }
        Value::Array(items) => {
            if let Some(last) = items.last() {
                let mut shorter = items.clone();
                shorter.pop();
                emit(rebuild(Value::Array(shorter)));
                let mut longer = items.clone();
                longer.push(last.clone());
                emit(rebuild(Value::Array(longer)));
            } else {
                emit(rebuild(Value::Array(vec![Value::from(0)])));
            }
            for (i, child) in items.iter().enumerate() {
                let items = items.clone();
                let inner = move |x: Value| {
                    let mut a = items.clone();
                    a[i] = x;
                    Value::Array(a)
                };
                mutate_at(child, emit, &|x| rebuild(inner(x)));
            }
        }
        leaf => {
            for alt in leaf_variants(leaf) {
                emit(rebuild(alt));
            }
        }
    }
}
