use std::rc::Rc;

use super::*;
use crate::trace::TraceCell;
use crate::types::{ClassId, GradualType};

fn interp(src: &str) -> (Interp, Rc<ModuleObj>) {
    let loader = Rc::new(Loader::new("/nonexistent", false));
    loader.insert(parse_module("m", src).expect("parses"));
    let mut types = TypeMap::default();
    types.by_name.insert("m.A".into(), ClassId(20));
    let mut it = Interp::new(Rc::new(Builtins::new()), loader, Rc::new(types));
    let m = it.import_module("m").unwrap_or_else(|e| panic!("import failed: {e:?}"));
    (it, m)
}

fn call(it: &mut Interp, m: &ModuleObj, f: &str, args: Vec<Value>) -> Exec<Value> {
    let fv = m.get(f).expect("function exists");
    it.call(&fv, args)
}

fn eval(src_expr: &str) -> Value {
    let (mut it, m) = interp(&format!("def f():\n    return {src_expr}\n"));
    call(&mut it, &m, "f", vec![]).unwrap_or_else(|e| panic!("{src_expr}: {e:?}"))
}

fn raised(it: &Interp, r: Exec<Value>) -> String {
    match r {
        Err(Unwind::Raise(e)) => it.exception_name(&e),
        other => panic!("expected an exception, got {other:?}"),
    }
}

#[test]
fn arithmetic_follows_host_semantics() {
    assert!(matches!(eval("7 // -2"), Value::Int(-4)));
    assert!(matches!(eval("-7 % 3"), Value::Int(2)));
    assert!(matches!(eval("2 ** 10"), Value::Int(1024)));
    assert!(matches!(eval("1 / 4"), Value::Float(x) if x == 0.25));
    assert!(matches!(eval("True + True"), Value::Int(2)));
    assert_eq!(format!("{:?}", eval("'ab' * 3")), "'ababab'");
    assert_eq!(format!("{:?}", eval("[1, 2] + [3]")), "[1, 2, 3]");
    assert_eq!(format!("{:?}", eval("'%s-%d' % ('x', 4)")), "'x-4'");
}

#[test]
fn comparisons_and_containment() {
    assert!(matches!(eval("1 < 2.5"), Value::Bool(true)));
    assert!(matches!(eval("(1, 2) < (1, 3)"), Value::Bool(true)));
    assert!(matches!(eval("'b' in 'abc'"), Value::Bool(true)));
    assert!(matches!(eval("2 in {1: 0, 2: 0}"), Value::Bool(true)));
    assert!(matches!(eval("1.0 in {1}"), Value::Bool(true)));
    assert!(matches!(eval("None is None"), Value::Bool(true)));
}

#[test]
fn string_and_collection_methods() {
    assert_eq!(format!("{:?}", eval("'a,b,,c'.split(',')")), "['a', 'b', '', 'c']");
    assert_eq!(format!("{:?}", eval("' x '.strip().upper()")), "'X'");
    assert_eq!(format!("{:?}", eval("'-'.join(['a', 'b'])")), "'a-b'");
    assert_eq!(format!("{:?}", eval("sorted([3, 1, 2])")), "[1, 2, 3]");
    assert_eq!(format!("{:?}", eval("{'a': 1}.get('b', 5)")), "5");
    assert_eq!(format!("{:?}", eval("list(range(1, 7, 2))")), "[1, 3, 5]");
    assert_eq!(format!("{:?}", eval("'x'.zfill(3)")), "'00x'");
    assert_eq!(format!("{:?}", eval("'{} and {}'.format(1, 'y')")), "'1 and y'");
}

#[test]
fn errors_surface_as_host_exceptions() {
    let (mut it, m) = interp("def f(x):\n    return 10 // x\ndef g(d):\n    return d['k']\n");
    let r = call(&mut it, &m, "f", vec![Value::Int(0)]);
    assert_eq!(raised(&it, r), "ZeroDivisionError");
    let d = it.make_dict(vec![]).expect("dict");
    let r = call(&mut it, &m, "g", vec![d]);
    assert_eq!(raised(&it, r), "KeyError");
    let r = call(&mut it, &m, "f", vec![Value::str("a")]);
    assert_eq!(raised(&it, r), "TypeError");
}

#[test]
fn recursion_is_bounded() {
    let (mut it, m) = interp("def f(n):\n    return f(n + 1)\n");
    let r = call(&mut it, &m, "f", vec![Value::Int(0)]);
    assert_eq!(raised(&it, r), "RecursionError");
}

#[test]
fn classes_inheritance_and_dunders() {
    let src = "\
class A:
    def __init__(self, v):
        self.v = v
    def __eq__(self, other):
        return isinstance(other, A) and self.v == other.v
    def __add__(self, other):
        return A(self.v + other)
class B(A):
    def double(self):
        return self.v * 2
def f():
    b = B(3)
    return (b + 1).v, b.double(), A(1) == A(1), A(1) != A(2), isinstance(b, A)
";
    let (mut it, m) = interp(src);
    let r = call(&mut it, &m, "f", vec![]).expect("runs");
    assert_eq!(format!("{r:?}"), "(4, 6, True, True, True)");
}

#[test]
fn raise_and_assert() {
    let src = "\
class Bad(ValueError):
    pass
def f(x):
    if x:
        raise Bad('no')
    assert x == 0, 'x'
    return 1
";
    let (mut it, m) = interp(src);
    let r = call(&mut it, &m, "f", vec![Value::Int(1)]);
    assert_eq!(raised(&it, r), "m.Bad");
    let r = call(&mut it, &m, "f", vec![Value::Bool(false)]);
    assert!(r.is_ok());
}

fn trace_of(src: &str, f: &str, arg: Value) -> (Exec<Value>, crate::trace::UsageTrace) {
    let (mut it, m) = interp(src);
    it.shim_enabled = true;
    let cell = TraceCell::new();
    let r = call(&mut it, &m, f, vec![cell.wrap(arg)]);
    (r, cell.extract_and_reset())
}

#[test]
fn proxy_records_attribute_and_methods() {
    let src = "def f(x):\n    if x.startswith('a'):\n        return len(x)\n    return x + 'b'\n";
    let (r, t) = trace_of(src, "f", Value::str("abc"));
    assert!(matches!(r, Ok(Value::Int(3))));
    assert!(t.attribute_accesses.contains("startswith"));
    assert!(t.method_invocations.contains_key("__len__"));
    let (_, t) = trace_of(src, "f", Value::str("xyz"));
    let ops = &t.method_invocations["__add__"];
    assert!(ops.contains(&GradualType::Instance(ClassId::STR)));
}

#[test]
fn reflected_operations_use_reflected_names() {
    let src = "def f(x):\n    return 1 + x, 2 < x, 3 in x\n";
    let (r, t) = trace_of(src, "f", Value::list(vec![Value::Int(3)]));
    assert!(r.is_err(), "1 + list raises");
    assert!(t.method_invocations.contains_key("__radd__"));
    let src = "def f(x):\n    return 2 < x\n";
    let (_, t) = trace_of(src, "f", Value::Int(5));
    assert!(t.method_invocations.contains_key("__gt__"));
    let src = "def f(x):\n    return 3 in x\n";
    let (_, t) = trace_of(src, "f", Value::list(vec![]));
    assert!(t.method_invocations.contains_key("__contains__"));
}

#[test]
fn proxy_masquerades_but_type_reveals_it() {
    let src = "def f(x):\n    return x.__class__ is int, type(x) is int, isinstance(x, int)\n";
    let (r, t) = trace_of(src, "f", Value::Int(1));
    assert_eq!(format!("{:?}", r.expect("runs")), "(True, False, True)");
    assert!(t.attribute_accesses.is_empty());
    assert!(t.typecheck_targets.contains(&ClassId::INT));
}

#[test]
fn native_code_rejects_proxies() {
    let src = "def f(x):\n    return x in 'abc'\n";
    let (r, _) = trace_of(src, "f", Value::str("a"));
    assert!(r.is_err());
    let src = "def f(x):\n    return 'abc'.startswith(x)\n";
    let (r, _) = trace_of(src, "f", Value::str("a"));
    assert!(r.is_err());
}

#[test]
fn element_proxies_record_into_the_element_trace() {
    let src = "def f(xs):\n    for x in xs:\n        x.bit_length()\n    return xs[0] + 1\n";
    let (r, t) = trace_of(src, "f", Value::list(vec![Value::Int(4)]));
    assert!(matches!(r, Ok(Value::Int(5))));
    assert!(t.method_invocations.contains_key("__iter__"));
    let e = t.element.expect("element trace");
    assert!(e.attribute_accesses.contains("bit_length"));
    assert!(e.method_invocations.contains_key("__add__"));
}

#[test]
fn proxied_execution_matches_plain_execution() {
    let src = "\
def f(x, y):
    out = []
    for k in x:
        if k in y and y[k] > 1:
            out.append(k)
    return sorted(out), len(x), str(y.get('a', 0))
";
    let (mut it, m) = interp(src);
    let x = Value::list(vec![Value::str("a"), Value::str("b")]);
    let y = it
        .make_dict(vec![(Value::str("a"), Value::Int(2)), (Value::str("b"), Value::Int(0))])
        .expect("dict");
    let plain = call(&mut it, &m, "f", vec![x.clone(), y.clone()]).expect("runs");
    let (cx, cy) = (TraceCell::new(), TraceCell::new());
    let proxied = call(&mut it, &m, "f", vec![cx.wrap(x), cy.wrap(y)]).expect("runs");
    assert_eq!(format!("{plain:?}"), format!("{proxied:?}"));
    assert!(!cx.snapshot().is_empty() && !cy.snapshot().is_empty());
}

#[test]
fn branch_distances() {
    use super::ast::CmpOp;
    assert_eq!(branch_distance(CmpOp::Eq, &Value::Int(3), &Value::Int(5), false), (2.0, 0.0));
    assert_eq!(branch_distance(CmpOp::Lt, &Value::Int(7), &Value::Int(5), false), (3.0, 0.0));
    assert_eq!(branch_distance(CmpOp::Lt, &Value::Int(2), &Value::Int(5), true), (0.0, 3.0));
    assert_eq!(branch_distance(CmpOp::Eq, &Value::str("kitten"), &Value::str("sitting"), false), (3.0, 0.0));
    assert_eq!(branch_distance(CmpOp::In, &Value::Int(1), &Value::Int(1), true), (0.0, 1.0));
    assert_eq!(levenshtein("", "abc"), 3);
}

#[test]
fn coverage_sink_records_arms_and_distances() {
    let src = "def f(x):\n    if x > 10 and x < 20:\n        return 1\n    return 0\n";
    let mut module = parse_module("m", src).expect("parses");
    if let ast::StmtKind::FunctionDef(def) = &mut module.body[0].kind {
        let def = Rc::make_mut(def);
        if let ast::StmtKind::If { probe, .. } = &mut def.body[0].kind {
            *probe = Some(ast::Probe { code: 0, predicate: 0 });
        }
    }
    let loader = Rc::new(Loader::new("/nonexistent", false));
    loader.insert(module);
    let mut it = Interp::new(Rc::new(Builtins::new()), loader, Rc::new(TypeMap::default()));
    it.coverage = Some(CoverageSink::default());
    let m = it.import_module("m").expect("imports");
    call(&mut it, &m, "f", vec![Value::Int(4)]).expect("runs");
    let sink = it.coverage.take().expect("sink");
    let p = ast::Probe { code: 0, predicate: 0 };
    assert!(sink.arms.contains(&(p, false)));
    // x > 10 fails by 10 - 4 + 1 = 7, the skipped operand adds 1
    assert_eq!(sink.distances[&p], (8.0, 0.0));
}
