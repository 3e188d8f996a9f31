//! Renders archived tests as a pytest module.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::analysis::{CallableKind, TestCluster};
use crate::executor::{ExecutionResult, Outcome};
use crate::host::{format_float, quote_str};
use crate::search::testcase::{Statement, TestCase};

/// Source text of a pytest module exercising `tests`. Each test comes with
/// the regular execution result it was archived with; primitive return
/// values become equality assertions and a final exception a
/// `pytest.raises` block.
pub fn emit_module(cluster: &TestCluster, tests: &[(&TestCase, &ExecutionResult)]) -> String {
    let mut modules = BTreeSet::new();
    for (t, _) in tests {
        for slot in &t.statements {
            if let Some(c) = slot.stmt.callable() {
                if !matches!(cluster.callables[c].kind, CallableKind::Method) {
                    modules.insert(cluster.callables[c].module.clone());
                }
            }
        }
    }
    let aliases: BTreeMap<String, String> = modules
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), format!("module_{i}")))
        .collect();

    let mut out = String::new();
    let raises = tests.iter().any(|(_, r)| matches!(r.outcomes.last(), Some(Outcome::Exception(_))));
    if raises {
        out.push_str("import pytest\n");
    }
    for (m, a) in &aliases {
        let _ = writeln!(out, "import {m} as {a}");
    }
    for (n, (test, result)) in tests.iter().enumerate() {
        out.push_str("\n\n");
        let _ = writeln!(out, "def test_case_{n}():");
        if test.is_empty() {
            out.push_str("    pass\n");
            continue;
        }
        let values: BTreeMap<usize, &str> = result.values.iter().map(|(i, s)| (*i, s.as_str())).collect();
        let failing = match result.outcomes.last() {
            Some(Outcome::Exception(e)) => Some((result.outcomes.len() - 1, e.as_str())),
            _ => None,
        };
        for (i, slot) in test.statements.iter().enumerate() {
            let expr = expression(cluster, &aliases, &slot.stmt);
            if let Some((last, exc)) = failing {
                if i == last {
                    let _ = writeln!(out, "    with pytest.raises({exc}):");
                    let _ = writeln!(out, "        {expr}");
                    continue;
                }
            }
            let _ = writeln!(out, "    var_{i} = {expr}");
            if let Some(v) = values.get(&i) {
                if assertable(v) {
                    let _ = writeln!(out, "    assert var_{i} == {v}");
                }
            }
        }
    }
    out
}

/// Reprs that read back as equal literals.
fn assertable(repr: &str) -> bool {
    !(repr.starts_with('<') || repr.contains("nan") || repr.contains("inf") || repr.contains(" object"))
}

fn expression(cluster: &TestCluster, aliases: &BTreeMap<String, String>, stmt: &Statement) -> String {
    let var = |i: &usize| format!("var_{i}");
    let join = |v: &[usize]| v.iter().map(var).collect::<Vec<_>>().join(", ");
    match stmt {
        Statement::None => "None".into(),
        Statement::Bool(b) => if *b { "True" } else { "False" }.into(),
        Statement::Int(i) => i.to_string(),
        Statement::Float(f) => match format_float(*f).as_str() {
            s @ ("nan" | "inf" | "-inf") => format!("float('{s}')"),
            s => s.to_string(),
        },
        Statement::Str(s) => quote_str(s),
        Statement::List(v) => format!("[{}]", join(v)),
        Statement::Set(v) if v.is_empty() => "set()".into(),
        Statement::Set(v) => format!("{{{}}}", join(v)),
        Statement::Tuple(v) if v.len() == 1 => format!("({},)", var(&v[0])),
        Statement::Tuple(v) => format!("({})", join(v)),
        Statement::Dict(pairs) => {
            let items: Vec<String> = pairs.iter().map(|(k, v)| format!("{}: {}", var(k), var(v))).collect();
            format!("{{{}}}", items.join(", "))
        }
        Statement::Object(c) => format!("{}()", cluster.hierarchy.class(*c).qualified_name),
        Statement::Construct { callable, args } | Statement::Call { callable, args } => {
            let info = &cluster.callables[*callable];
            format!("{}.{}({})", aliases[&info.module], info.name, join(args))
        }
        Statement::Method { callable, receiver, args } => {
            let info = &cluster.callables[*callable];
            format!("{}.{}({})", var(receiver), info.name, join(args))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_cluster;
    use crate::executor::Executor;
    use crate::host::{parse_module, Loader};
    use crate::types::GradualType;
    use std::rc::Rc;
    use std::time::Duration;

    fn setup() -> (TestCluster, Executor) {
        let src = "\
class Box:
    def __init__(self, v):
        self.v = v
    def get(self):
        return self.v
def half(n):
    return n / 2
def fail(x):
    return x.missing
";
        let loader = Rc::new(Loader::new("/nonexistent", false));
        loader.insert(parse_module("m", src).unwrap());
        let c = build_cluster(&loader, "m", 1).unwrap();
        let ex = Executor::new(loader, &c, Duration::from_secs(3));
        (c, ex)
    }

    fn find(c: &TestCluster, local: &str) -> usize {
        c.callables.iter().position(|x| x.local_name == local).unwrap()
    }

    fn add(t: &mut TestCase, s: Statement) {
        t.push(s, GradualType::Any);
    }

    #[test]
    fn renders_calls_assertions_and_raises() {
        let (c, mut ex) = setup();
        let mut ok = TestCase::default();
        add(&mut ok, Statement::Int(3));
        add(&mut ok, Statement::Construct {
            callable: find(&c, "Box.__init__"),
            args: vec![0],
        });
        add(&mut ok, Statement::Method {
            callable: find(&c, "Box.get"),
            receiver: 1,
            args: vec![],
        });
        add(&mut ok, Statement::Call {
            callable: find(&c, "half"),
            args: vec![0],
        });
        let mut bad = TestCase::default();
        add(&mut bad, Statement::Str("a'b".into()));
        add(&mut bad, Statement::Call {
            callable: find(&c, "fail"),
            args: vec![0],
        });
        let r1 = ex.execute_regular(&ok, &c);
        let r2 = ex.execute_regular(&bad, &c);
        let src = emit_module(&c, &[(&ok, &r1), (&bad, &r2)]);
        assert!(src.starts_with("import pytest\nimport m as module_0\n"), "{src}");
        assert!(src.contains("    var_1 = module_0.Box(var_0)\n"), "{src}");
        assert!(src.contains("    assert var_2 == 3\n"), "{src}");
        assert!(src.contains("    assert var_3 == 1.5\n"), "{src}");
        assert!(!src.contains("assert var_1 =="), "{src}");
        assert!(src.contains("    var_0 = 'a\\'b'\n"), "{src}");
        assert!(src.contains("    with pytest.raises(AttributeError):\n        module_0.fail(var_0)\n"), "{src}");
    }

    #[test]
    fn emitted_module_parses() {
        let (c, mut ex) = setup();
        let mut t = TestCase::default();
        add(&mut t, Statement::Float(f64::INFINITY));
        add(&mut t, Statement::Tuple(vec![0]));
        add(&mut t, Statement::Set(vec![]));
        add(&mut t, Statement::Dict(vec![]));
        let r = ex.execute_regular(&t, &c);
        let src = emit_module(&c, &[(&t, &r), (&TestCase::default(), &r)]);
        parse_module("test_m", &src).unwrap();
    }
}
