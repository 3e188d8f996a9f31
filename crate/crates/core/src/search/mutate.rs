//! Mutation and crossover of test cases.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::analysis::CallableKind;
use crate::search::synth::{random_str, GenContext};
use crate::search::testcase::{Slot, Statement, TestCase};
use crate::types::GradualType;

/// Inserts a call to `callable` at position `pos`, shifting later
/// references.
pub fn insert_call_at(ctx: &GenContext, test: &TestCase, pos: usize, callable: usize, rng: &mut impl Rng) -> Option<TestCase> {
    let mut prefix = TestCase {
        statements: test.statements[..pos].to_vec(),
    };
    let receiver = match ctx.cluster.callables[callable].kind {
        CallableKind::Method if rng.gen_bool(0.5) => {
            let owner = GradualType::Instance(ctx.cluster.callables[callable].owner.expect("owner"));
            let found: Vec<usize> = (0..prefix.len())
                .filter(|i| {
                    let t = &prefix.statements[*i].ty;
                    !t.is_any() && ctx.cluster.hierarchy.is_consistent(t, &owner)
                })
                .collect();
            found.choose(rng).copied()
        }
        _ => None,
    };
    ctx.call(&mut prefix, callable, receiver, 0, rng)?;
    let added = prefix.len() - pos;
    for slot in &test.statements[pos..] {
        let mut slot = slot.clone();
        for r in slot.stmt.references_mut() {
            if *r >= pos {
                *r += added;
            }
        }
        prefix.statements.push(slot);
    }
    Some(prefix)
}

/// Picks a callable to insert, preferring those listed in `preferred`.
pub fn pick_callable(ctx: &GenContext, preferred: &[usize], rng: &mut impl Rng) -> Option<usize> {
    if !preferred.is_empty() && rng.gen_bool(0.7) {
        return preferred.choose(rng).copied();
    }
    let all: Vec<usize> = ctx.cluster.subject_callables().collect();
    all.choose(rng).copied()
}

/// One mutation round: deletion, change and insertion, each applied with
/// probability 1/3. Returns the input unchanged when the result would be
/// invalid.
pub fn mutate(ctx: &GenContext, test: &TestCase, preferred: &[usize], max_len: usize, rng: &mut impl Rng) -> TestCase {
    let mut out = test.clone();
    let third = 1.0 / 3.0;
    if rng.gen_bool(third) && !out.is_empty() {
        let p = 1.0 / out.len() as f64;
        for i in (0..out.len()).rev() {
            if i < out.len() && rng.gen_bool(p) {
                out.remove_with_repair(i, ctx.cluster);
            }
        }
    }
    if rng.gen_bool(third) && !out.is_empty() {
        let p = 1.0 / out.len() as f64;
        for i in 0..out.len() {
            if rng.gen_bool(p) {
                change(ctx, &mut out, i, rng);
            }
        }
    }
    if rng.gen_bool(third) || out.is_empty() {
        let mut prob = 1.0;
        while rng.gen_bool(prob) && out.len() < max_len {
            let Some(c) = pick_callable(ctx, preferred, rng) else { break };
            let pos = rng.gen_range(0..=out.len());
            if let Some(t) = insert_call_at(ctx, &out, pos, c, rng) {
                out = t;
            }
            prob *= 0.5;
        }
    }
    if out.is_valid(ctx.cluster, max_len) {
        out
    } else {
        test.clone()
    }
}

/// Changes statement `i` in place (possibly inserting new statements before it).
pub fn change(ctx: &GenContext, test: &mut TestCase, i: usize, rng: &mut impl Rng) {
    let stmt = test.statements[i].stmt.clone();
    match stmt {
        Statement::Int(v) => {
            let nv = if rng.gen_bool(0.5) {
                v.saturating_add(rng.gen_range(-10..=10))
            } else {
                ctx.pool.int(rng)
            };
            test.statements[i].stmt = Statement::Int(nv);
        }
        Statement::Float(v) => {
            let nv = if rng.gen_bool(0.5) { v + rng.gen_range(-10.0..10.0) } else { ctx.pool.float(rng) };
            test.statements[i].stmt = Statement::Float(nv);
        }
        Statement::Bool(b) => test.statements[i].stmt = Statement::Bool(!b),
        Statement::Str(s) => test.statements[i].stmt = Statement::Str(change_str(ctx, &s, rng)),
        Statement::List(mut items) | Statement::Set(mut items) | Statement::Tuple(mut items) => {
            // drop or duplicate an element among the slots already referenced
            if !items.is_empty() && rng.gen_bool(0.5) {
                let k = rng.gen_range(0..items.len());
                items.remove(k);
            } else if let Some(x) = items.choose(rng).copied() {
                if items.len() < 5 {
                    items.push(x);
                }
            }
            test.statements[i].stmt = match &test.statements[i].stmt {
                Statement::List(_) => Statement::List(items),
                Statement::Set(_) => Statement::Set(items),
                _ => Statement::Tuple(items),
            };
        }
        Statement::Dict(mut pairs) => {
            if !pairs.is_empty() {
                let k = rng.gen_range(0..pairs.len());
                pairs.remove(k);
                test.statements[i].stmt = Statement::Dict(pairs);
            }
        }
        Statement::Construct { callable, .. } | Statement::Call { callable, .. } | Statement::Method { callable, .. } => {
            change_argument(ctx, test, i, callable, rng);
        }
        Statement::None | Statement::Object(_) => {}
    }
}

fn change_str(ctx: &GenContext, s: &str, rng: &mut impl Rng) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    match rng.gen_range(0..5) {
        0 if !chars.is_empty() => {
            let k = rng.gen_range(0..chars.len());
            chars.remove(k);
        }
        1 => {
            let k = rng.gen_range(0..=chars.len());
            let c = random_str(rng).chars().next().unwrap_or('a');
            chars.insert(k, c);
        }
        2 if !chars.is_empty() => {
            let k = rng.gen_range(0..chars.len());
            chars[k] = random_str(rng).chars().next().unwrap_or('z');
        }
        3 => return ctx.pool.str(rng),
        _ => {
            let extra = ctx.pool.str(rng);
            if rng.gen_bool(0.5) {
                return format!("{s}{extra}");
            }
            return format!("{extra}{s}");
        }
    }
    chars.into_iter().collect()
}

/// Replaces one argument of the call at `i`: either with a fresh value of a
/// newly selected type or with another earlier slot of a consistent type.
fn change_argument(ctx: &GenContext, test: &mut TestCase, i: usize, callable: usize, rng: &mut impl Rng) {
    let n = ctx.cluster.callables[callable].params.len();
    if n == 0 {
        return;
    }
    let p = rng.gen_range(0..n);
    let current = match &test.statements[i].stmt {
        Statement::Construct { args, .. } | Statement::Call { args, .. } | Statement::Method { args, .. } => args[p],
        _ => return,
    };
    if rng.gen_bool(0.5) {
        let current_ty = test.statements[current].ty.clone();
        let options: Vec<usize> = (0..i)
            .filter(|k| *k != current)
            .filter(|k| {
                let t = &test.statements[*k].ty;
                current_ty.is_any() || t.is_any() || ctx.cluster.hierarchy.is_consistent(t, &current_ty)
            })
            .collect();
        if let Some(k) = options.choose(rng) {
            set_arg(&mut test.statements[i], p, *k);
            return;
        }
    }
    // build a new argument just before the call
    let mut prefix = TestCase {
        statements: test.statements[..i].to_vec(),
    };
    let slot = ctx.argument(&mut prefix, callable, p, 1, rng);
    let added = prefix.len() - i;
    let mut call = test.statements[i].clone();
    set_arg(&mut call, p, slot);
    prefix.statements.push(call);
    for later in &test.statements[i + 1..] {
        let mut later = later.clone();
        for r in later.stmt.references_mut() {
            if *r >= i {
                *r += added;
            }
        }
        prefix.statements.push(later);
    }
    *test = prefix;
}

fn set_arg(slot: &mut Slot, p: usize, to: usize) {
    if let Statement::Construct { args, .. } | Statement::Call { args, .. } | Statement::Method { args, .. } = &mut slot.stmt {
        args[p] = to;
    }
}

/// Single-point crossover at the same relative position in both parents.
/// References into the dropped part of the second parent are rewired to a
/// consistent slot of the first; statements that cannot be rewired are
/// dropped.
pub fn crossover(ctx: &GenContext, a: &TestCase, b: &TestCase, max_len: usize, rng: &mut impl Rng) -> (TestCase, TestCase) {
    let alpha: f64 = rng.gen();
    let cut_a = (alpha * a.len() as f64).floor() as usize;
    let cut_b = (alpha * b.len() as f64).floor() as usize;
    let child1 = splice(ctx, a, cut_a, b, cut_b);
    let child2 = splice(ctx, b, cut_b, a, cut_a);
    let keep = |child: TestCase, parent: &TestCase| {
        if child.is_valid(ctx.cluster, max_len) {
            child
        } else {
            parent.clone()
        }
    };
    (keep(child1, a), keep(child2, b))
}

fn splice(ctx: &GenContext, head: &TestCase, cut_h: usize, tail: &TestCase, cut_t: usize) -> TestCase {
    let mut out = TestCase {
        statements: head.statements[..cut_h].to_vec(),
    };
    let mut map: Vec<Option<usize>> = vec![None; tail.len()];
    for j in cut_t..tail.len() {
        let mut slot = tail.statements[j].clone();
        let mut ok = true;
        for r in slot.stmt.references_mut() {
            let new = if *r >= cut_t {
                map[*r]
            } else {
                let want = &tail.statements[*r].ty;
                (0..out.len()).rev().find(|k| {
                    let t = &out.statements[*k].ty;
                    if want.is_any() {
                        *t == *want || !t.is_any()
                    } else {
                        !t.is_any() && ctx.cluster.hierarchy.is_consistent(t, want)
                    }
                })
            };
            match new {
                Some(n) => *r = n,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.statements.push(slot);
            map[j] = Some(out.len() - 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{build_cluster, TestCluster};
    use crate::host::{parse_module, Loader};
    use crate::inference::SelectionWeights;
    use crate::search::synth::ConstantPool;
    use crate::trace::UsageTrace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::rc::Rc;

    const SRC: &str = "\
class Node:
    def __init__(self, name):
        self.name = name
class ClassDef(Node):
    def __init__(self, name, bases):
        self.name = name
        self.bases = bases
class Other(Node):
    def __init__(self, name, value):
        self.name = name
        self.value = value
def visit(node):
    if len(node.bases) > 0:
        return 'has bases'
    return 'none'
def add(a, b):
    return a + b
";

    fn cluster() -> TestCluster {
        let loader = Rc::new(Loader::new("/nonexistent", false));
        loader.insert(parse_module("m", SRC).unwrap());
        build_cluster(&loader, "m", 1).unwrap()
    }

    fn seed_test(ctx: &GenContext, rng: &mut ChaCha8Rng) -> TestCase {
        let mut t = TestCase::default();
        for c in ctx.cluster.subject_callables().collect::<Vec<_>>() {
            ctx.call(&mut t, c, None, 0, rng);
        }
        t
    }

    #[test]
    fn mutations_preserve_validity() {
        let c = cluster();
        let pool = ConstantPool::new(&c.literals);
        let ctx = GenContext { cluster: &c, weights: SelectionWeights::default(), pool: &pool, reuse: 0.3 };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base = seed_test(&ctx, &mut rng);
        let mut t = base.clone();
        for i in 0..1000 {
            t = mutate(&ctx, &t, &[], 40, &mut rng);
            assert!(t.is_valid(&c, 40), "iteration {i}: {t:?}");
            if i % 50 == 0 {
                let (x, y) = crossover(&ctx, &t, &base, 40, &mut rng);
                assert!(x.is_valid(&c, 40) && y.is_valid(&c, 40));
            }
        }
    }

    #[test]
    fn deleting_the_only_statement_leaves_an_empty_test() {
        let c = cluster();
        let mut t = TestCase::default();
        t.push(Statement::Int(1), GradualType::Any);
        t.remove_with_repair(0, &c);
        assert!(t.is_empty() && t.is_valid(&c, 40));
    }

    #[test]
    fn traced_attribute_raises_the_odds_of_the_matching_class() {
        let mut c = cluster();
        let visit = c.callables.iter().position(|x| x.local_name == "visit").unwrap();
        let class_def = c.hierarchy.lookup("m.ClassDef").unwrap();
        let count = |c: &TestCluster| {
            let pool = ConstantPool::new(&[]);
            let ctx = GenContext { cluster: c, weights: SelectionWeights::default(), pool: &pool, reuse: 0.0 };
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let ctor = c.constructors[&class_def];
            (0..2000)
                .filter(|_| {
                    let t = insert_call_at(&ctx, &TestCase::default(), 0, visit, &mut rng).unwrap();
                    let Some(Statement::Call { args, .. }) = t.statements.last().map(|s| &s.stmt) else { return false };
                    matches!(t.statements[args[0]].stmt, Statement::Construct { callable, .. } if callable == ctor)
                })
                .count()
        };
        let before = count(&c);
        let mut trace = UsageTrace::default();
        trace.record_attribute("bases");
        c.traces.insert((visit, 0), trace);
        let after = count(&c);
        assert!(after > 3 * before, "{before} -> {after}");
    }

    #[test]
    fn crossover_rewires_references() {
        let c = cluster();
        let pool = ConstantPool::new(&[]);
        let ctx = GenContext { cluster: &c, weights: SelectionWeights::default(), pool: &pool, reuse: 0.0 };
        let add = c.callables.iter().position(|x| x.local_name == "add").unwrap();
        let int = GradualType::Instance(crate::types::ClassId::INT);
        let mut a = TestCase::default();
        a.push(Statement::Int(1), int.clone());
        a.push(Statement::Int(2), int.clone());
        let mut b = TestCase::default();
        let x = b.push(Statement::Int(7), int.clone());
        b.push(Statement::Call { callable: add, args: vec![x, x] }, GradualType::Any);
        let child = splice(&ctx, &a, 2, &b, 1);
        assert_eq!(child.len(), 3);
        assert_eq!(child.statements[2].stmt, Statement::Call { callable: add, args: vec![1, 1] });
    }
}
