//! Random hierarchies, random types and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::Rng;
use tracegen_core::types::{ClassHierarchy, ClassId, CollectionKind, GradualType};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Core builtins plus up to `max_user` user classes. Bases are drawn among
/// earlier classes; attributes among `q0..q5`.
pub fn random_hierarchy(rng: &mut impl Rng, max_user: usize) -> ClassHierarchy {
    let mut h = ClassHierarchy::new();
    let n = rng.gen_range(1..=max_user);
    for i in 0..n {
        let existing = h.len() as u32;
        let mut bases = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            // prefer user classes so that chains form
            let first_user = existing - i as u32;
            let b = if i > 0 && rng.gen_bool(0.8) {
                ClassId(rng.gen_range(first_user..existing))
            } else {
                ClassId(rng.gen_range(0..first_user))
            };
            if !bases.contains(&b) {
                bases.push(b);
            }
        }
        let attrs: BTreeSet<String> = (0..rng.gen_range(0..=3)).map(|_| format!("q{}", rng.gen_range(0..6))).collect();
        h.add_class(&format!("m.C{i}"), bases, attrs, false).expect("fresh name");
    }
    h
}

pub fn random_type(rng: &mut impl Rng, h: &ClassHierarchy, depth: u32) -> GradualType {
    let pick = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..6) };
    match pick {
        0 => GradualType::Any,
        1 => GradualType::None,
        2 => GradualType::Instance(ClassId(rng.gen_range(0..h.len() as u32))),
        3 => GradualType::Union((0..rng.gen_range(2..=3)).map(|_| random_type(rng, h, depth - 1)).collect()),
        4 => GradualType::list(random_type(rng, h, depth - 1)),
        _ => GradualType::dict(random_type(rng, h, depth - 1), random_type(rng, h, depth - 1)),
    }
}

/// Reflexive-transitive closure of the explicit superclass edges.
pub fn subclass_oracle(h: &ClassHierarchy, sub: ClassId, sup: ClassId) -> bool {
    let mut stack = vec![sub];
    let mut seen = BTreeSet::new();
    while let Some(c) = stack.pop() {
        if c == sup {
            return true;
        }
        if seen.insert(c) {
            stack.extend(h.class(c).superclasses.iter().copied());
        }
    }
    false
}

fn kind_class(k: CollectionKind) -> ClassId {
    match k {
        CollectionKind::List => ClassId::LIST,
        CollectionKind::Set => ClassId::SET,
        CollectionKind::Dict => ClassId::DICT,
        CollectionKind::TupleVariadic => ClassId::TUPLE,
    }
}

/// The consistency relation spelled out rule by rule over the closure oracle.
pub fn consistent_oracle(h: &ClassHierarchy, s: &GradualType, t: &GradualType) -> bool {
    use GradualType as G;
    if s.is_any() || t.is_any() {
        return true;
    }
    if let G::Union(ms) = s {
        return ms.iter().all(|m| consistent_oracle(h, m, t));
    }
    if let G::Union(ms) = t {
        return ms.iter().any(|m| consistent_oracle(h, s, m));
    }
    match (s, t) {
        (G::None, G::None) => true,
        (G::None, G::Instance(c)) => *c == ClassId::OBJECT,
        (G::None, _) | (_, G::None) => false,
        (G::Instance(a), G::Instance(b)) => subclass_oracle(h, *a, *b),
        (G::Instance(a), G::Collection(k, _)) => subclass_oracle(h, *a, kind_class(*k)),
        (G::Collection(k, _), G::Instance(b)) => subclass_oracle(h, kind_class(*k), *b),
        (G::Collection(k1, e1), G::Collection(k2, e2)) => {
            k1 == k2 && e1.len() == e2.len() && e1.iter().zip(e2).all(|(a, b)| consistent_oracle(h, a, b))
        }
        _ => panic!("generator produced an unexpected pair {s:?} / {t:?}"),
    }
}

/// Attributes visible on instances of `c`, walking superclass edges.
pub fn closure_oracle(h: &ClassHierarchy, c: ClassId) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![c];
    let mut out = BTreeSet::new();
    while let Some(x) = stack.pop() {
        if seen.insert(x) {
            out.extend(h.class(x).declared_attributes.iter().cloned());
            stack.extend(h.class(x).superclasses.iter().copied());
        }
    }
    out
}

/// Exhaustive pair enumeration for the effect size.
pub fn a12_oracle(a: &[f64], b: &[f64]) -> f64 {
    let mut score = 0.0;
    for x in a {
        for y in b {
            if x > y {
                score += 1.0;
            } else if x == y {
                score += 0.5;
            }
        }
    }
    score / (a.len() * b.len()) as f64
}
