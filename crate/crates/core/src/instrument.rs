//! Branch instrumentation of the subject module and goal bookkeeping.

use std::rc::Rc;

use crate::host::ast::{FunctionDef, Module, Probe, Stmt, StmtKind};
use crate::host::CoverageSink;

/// One coverage target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Goal {
    /// One arm of a predicate.
    Arm { code: u32, predicate: u32, outcome: bool },
    /// Entry of a code object without predicates.
    Root { code: u32 },
}

impl Goal {
    pub fn code(self) -> u32 {
        match self {
            Goal::Arm { code, .. } | Goal::Root { code } => code,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PredicateInfo {
    pub probe: Probe,
    pub line: u32,
    /// Enclosing predicate arm inside the same code object, if any.
    pub parent: Option<(u32, bool)>,
}

#[derive(Debug, Clone)]
pub struct CodeInfo {
    pub id: u32,
    /// `f` or `C.m`.
    pub name: String,
    pub line: u32,
    pub predicates: Vec<PredicateInfo>,
}

/// Every code object and goal of an instrumented module.
#[derive(Debug, Clone, Default)]
pub struct BranchRegistry {
    pub codes: Vec<CodeInfo>,
    pub goals: Vec<Goal>,
}

/// Assigns code ids to the module's functions and methods and probe ids to
/// their `if`/`while`/`for` predicates.
pub fn instrument(module: &mut Module) -> BranchRegistry {
    let mut registry = BranchRegistry::default();
    for stmt in &mut module.body {
        match &mut stmt.kind {
            StmtKind::FunctionDef(def) => instrument_function(def, None, &mut registry),
            StmtKind::ClassDef(class) => {
                let class = Rc::make_mut(class);
                let class_name = class.name.to_string();
                for member in &mut class.body {
                    if let StmtKind::FunctionDef(def) = &mut member.kind {
                        instrument_function(def, Some(&class_name), &mut registry);
                    }
                }
            }
            _ => {}
        }
    }
    for code in &registry.codes {
        if code.predicates.is_empty() {
            registry.goals.push(Goal::Root { code: code.id });
        }
        for p in &code.predicates {
            for outcome in [true, false] {
                registry.goals.push(Goal::Arm {
                    code: code.id,
                    predicate: p.probe.predicate,
                    outcome,
                });
            }
        }
    }
    registry
}

fn instrument_function(def: &mut Rc<FunctionDef>, class: Option<&str>, registry: &mut BranchRegistry) {
    let def = Rc::make_mut(def);
    let id = registry.codes.len() as u32;
    def.code = Some(id);
    let mut info = CodeInfo {
        id,
        name: match class {
            Some(c) => format!("{c}.{}", def.name),
            None => def.name.to_string(),
        },
        line: def.line,
        predicates: Vec::new(),
    };
    probe_block(&mut def.body, id, None, &mut info.predicates);
    registry.codes.push(info);
}

fn probe_block(body: &mut [Stmt], code: u32, parent: Option<(u32, bool)>, out: &mut Vec<PredicateInfo>) {
    for stmt in body {
        let line = stmt.line;
        let next = |probe: &mut Option<Probe>, out: &mut Vec<PredicateInfo>| {
            let p = Probe {
                code,
                predicate: out.len() as u32,
            };
            *probe = Some(p);
            out.push(PredicateInfo { probe: p, line, parent });
            p.predicate
        };
        match &mut stmt.kind {
            StmtKind::If { body, orelse, probe, .. } => {
                let id = next(probe, out);
                probe_block(body, code, Some((id, true)), out);
                probe_block(orelse, code, Some((id, false)), out);
            }
            StmtKind::While { body, probe, .. } | StmtKind::For { body, probe, .. } => {
                let id = next(probe, out);
                probe_block(body, code, Some((id, true)), out);
            }
            _ => {}
        }
    }
}

impl BranchRegistry {
    pub fn predicate(&self, code: u32, predicate: u32) -> &PredicateInfo {
        &self.codes[code as usize].predicates[predicate as usize]
    }

    pub fn is_covered(&self, goal: Goal, sink: &CoverageSink) -> bool {
        match goal {
            Goal::Root { code } => sink.codes.contains(&code),
            Goal::Arm { code, predicate, outcome } => sink.arms.contains(&(Probe { code, predicate }, outcome)),
        }
    }

    /// Approach level plus normalized branch distance; 0 iff covered.
    pub fn fitness(&self, goal: Goal, sink: &CoverageSink) -> f64 {
        let norm = |d: f64| d / (d + 1.0);
        match goal {
            Goal::Root { code } => {
                if sink.codes.contains(&code) {
                    0.0
                } else {
                    1.0
                }
            }
            Goal::Arm { code, predicate, outcome } => {
                let mut target = (predicate, outcome);
                let mut level = 0.0;
                loop {
                    let probe = Probe { code, predicate: target.0 };
                    if let Some((t, f)) = sink.distances.get(&probe) {
                        let d = if target.1 { *t } else { *f };
                        return level + norm(d);
                    }
                    level += 1.0;
                    match self.predicate(code, target.0).parent {
                        Some(p) => target = p,
                        // the code object was entered or not at all
                        None => return level + if sink.codes.contains(&code) { 0.0 } else { 1.0 },
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::host::{parse_module, Builtins, Interp, Loader, TypeMap, Value};

    fn run(src: &str, f: &str, args: Vec<Value>) -> (BranchRegistry, CoverageSink) {
        let mut m = parse_module("m", src).unwrap();
        let reg = instrument(&mut m);
        let loader = Rc::new(Loader::new("/nonexistent", false));
        loader.insert(m);
        let mut it = Interp::new(Rc::new(Builtins::new()), loader, Rc::new(TypeMap::default()));
        it.coverage = Some(CoverageSink::default());
        let module = it.import_module("m").unwrap();
        let _ = it.call(&module.get(f).unwrap(), args);
        (reg, it.coverage.take().unwrap())
    }

    /// Counts predicates by walking the tree independently of the instrumenter.
    fn count_predicates(body: &[Stmt]) -> usize {
        body.iter()
            .map(|s| match &s.kind {
                StmtKind::If { body, orelse, .. } => 1 + count_predicates(body) + count_predicates(orelse),
                StmtKind::While { body, .. } | StmtKind::For { body, .. } => 1 + count_predicates(body),
                _ => 0,
            })
            .sum()
    }

    #[test]
    fn one_if_gives_two_goals() {
        let (reg, _) = run("def f(a):\n    if a:\n        return 1\n    else:\n        return 2\n", "f", vec![Value::Int(1)]);
        assert_eq!(reg.goals.len(), 2);
    }

    #[test]
    fn straight_line_function_gets_a_root_goal() {
        let src = "def f():\n    return 1\ndef g(x):\n    for i in x:\n        if i:\n            pass\n";
        let (reg, sink) = run(src, "f", vec![]);
        let m = parse_module("m", src).unwrap();
        let expected: usize = m
            .body
            .iter()
            .map(|s| match &s.kind {
                StmtKind::FunctionDef(d) => match count_predicates(&d.body) {
                    0 => 1,
                    n => 2 * n,
                },
                _ => 0,
            })
            .sum();
        assert_eq!(reg.goals.len(), expected);
        assert!(reg.is_covered(Goal::Root { code: 0 }, &sink));
    }

    #[test]
    fn distance_of_a_failed_less_equal() {
        let (reg, sink) = run("def f(a, b):\n    if a <= b:\n        return 1\n    return 0\n", "f", vec![Value::Int(5), Value::Int(3)]);
        let t = Goal::Arm { code: 0, predicate: 0, outcome: true };
        let f = Goal::Arm { code: 0, predicate: 0, outcome: false };
        assert!(reg.is_covered(f, &sink));
        assert!(!reg.is_covered(t, &sink));
        assert_eq!(sink.distances[&Probe { code: 0, predicate: 0 }].0, 2.0);
        assert_eq!(reg.fitness(t, &sink), 2.0 / 3.0);
        assert_eq!(reg.fitness(f, &sink), 0.0);
    }

    #[test]
    fn approach_level_counts_unreached_ancestors() {
        let src = "\
def f(a):
    if a > 0:
        if a > 10:
            if a == 50:
                return 1
    return 0
";
        let (reg, sink) = run(src, "f", vec![Value::Int(-3)]);
        let deep = Goal::Arm { code: 0, predicate: 2, outcome: true };
        // two levels away; outer predicate needs 3 + 1 to flip
        assert_eq!(reg.fitness(deep, &sink), 2.0 + 4.0 / 5.0);
        let (reg2, sink2) = run(src, "f", vec![Value::Int(40)]);
        assert_eq!(reg2.fitness(deep, &sink2), 10.0 / 11.0);
        let (_, never) = (reg.clone(), CoverageSink::default());
        assert_eq!(reg.fitness(deep, &never), 4.0);
    }

    #[test]
    fn full_coverage_by_hand_written_inputs() {
        let src = "\
class C:
    def m(self, xs):
        n = 0
        for x in xs:
            if x % 2 == 0:
                n = n + 1
            else:
                n = n - 1
        while n > 0:
            n = n - 1
        return n
";
        let mut m = parse_module("m", src).unwrap();
        let reg = instrument(&mut m);
        let loader = Rc::new(Loader::new("/nonexistent", false));
        loader.insert(m);
        let mut it = Interp::new(Rc::new(Builtins::new()), loader, Rc::new(TypeMap::default()));
        it.coverage = Some(CoverageSink::default());
        let module = it.import_module("m").unwrap();
        let c = it.call(&module.get("C").unwrap(), vec![]).unwrap();
        let meth = it.get_attr(&c, "m").unwrap();
        it.call(&meth, vec![Value::list(vec![Value::Int(2), Value::Int(4), Value::Int(1)])]).unwrap();
        let sink = it.coverage.take().unwrap();
        assert_eq!(reg.codes[0].name, "C.m");
        for g in &reg.goals {
            assert!(reg.is_covered(*g, &sink), "{g:?}");
        }
    }
}
