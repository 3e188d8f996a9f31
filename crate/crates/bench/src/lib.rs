//! Shared workloads for the benchmarks.

use std::path::PathBuf;

use tracegen_core::types::{ClassHierarchy, ClassId, GradualType};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// A chain `m.C0 <- m.C1 <- ...` of `depth` user classes over the builtins.
pub fn chain_hierarchy(depth: usize) -> ClassHierarchy {
    let mut h = ClassHierarchy::new();
    let mut base = ClassId::OBJECT;
    for i in 0..depth {
        base = h
            .add_class(&format!("m.C{i}"), vec![base], [format!("a{i}")].into(), false)
            .expect("fresh name");
    }
    h
}

/// Nested list/dict/union types over the classes of `h`, cycling through
/// the ids so the workload is deterministic.
pub fn type_corpus(h: &ClassHierarchy, n: usize) -> Vec<GradualType> {
    let ids: Vec<ClassId> = h.ids().collect();
    (0..n)
        .map(|i| {
            let a = GradualType::Instance(ids[i % ids.len()]);
            let b = GradualType::Instance(ids[(i * 7 + 3) % ids.len()]);
            match i % 4 {
                0 => a,
                1 => GradualType::list(a),
                2 => GradualType::Union(vec![a, b, GradualType::None]),
                _ => GradualType::dict(GradualType::Instance(ClassId::STR), GradualType::list(b)),
            }
        })
        .collect()
}
