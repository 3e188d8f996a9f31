//! Test-case execution: regular runs for coverage and returns, proxied runs
//! for usage traces.

use std::collections::HashSet;
use std::rc::Rc;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::analysis::{CallableKind, TestCluster};
use crate::host::ast::Probe;
use crate::host::{Builtins, CoverageSink, Exec, Interp, Loader, TypeMap, Unwind, Value};
use crate::search::testcase::{Statement, TestCase};
use crate::trace::{TraceCell, UsageTrace};
use crate::types::GradualType;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Exception(String),
    Timeout,
}

#[derive(Debug, Clone, Default)]
pub struct ExecutionResult {
    pub coverage: CoverageSink,
    /// Ends at the first raising or timed-out statement.
    pub outcomes: Vec<Outcome>,
    /// Observed return types of successful cluster calls, by statement index.
    pub returns: Vec<(usize, GradualType)>,
    /// `repr` of successful call results, used for assertions.
    pub values: Vec<(usize, String)>,
    /// (callable, parameter) traces; proxied runs only.
    pub traces: Vec<((usize, usize), UsageTrace)>,
    pub wall_time: f64,
}

impl ExecutionResult {
    pub fn covered_arms(&self) -> &HashSet<(Probe, bool)> {
        &self.coverage.arms
    }

    pub fn raised(&self) -> bool {
        self.outcomes.last().is_some_and(|o| *o != Outcome::Ok)
    }
}

/// Runs test cases against the instrumented subject registered in `loader`.
pub struct Executor {
    builtins: Rc<Builtins>,
    loader: Rc<Loader>,
    types: Rc<TypeMap>,
    subject: String,
    pub timeout: Duration,
    pub max_proxy_depth: u8,
    pub regular_runs: u64,
    pub proxied_runs: u64,
}

impl Executor {
    pub fn new(loader: Rc<Loader>, cluster: &TestCluster, timeout: Duration) -> Self {
        Executor {
            builtins: Rc::new(Builtins::new()),
            loader,
            types: cluster.type_map.clone(),
            subject: cluster.subject.clone(),
            timeout,
            max_proxy_depth: 1,
            regular_runs: 0,
            proxied_runs: 0,
        }
    }

    fn fresh(&self) -> Interp {
        let mut it = Interp::new(self.builtins.clone(), self.loader.clone(), self.types.clone());
        it.max_proxy_depth = self.max_proxy_depth;
        it
    }

    /// Coverage and return observations; no proxies involved.
    pub fn execute_regular(&mut self, test: &TestCase, cluster: &TestCluster) -> ExecutionResult {
        self.regular_runs += 1;
        self.run(test, cluster, false)
    }

    /// Wraps every argument of every cluster call in a fresh per-parameter
    /// proxy and collects the traces. Coverage is discarded.
    pub fn execute_proxied(&mut self, test: &TestCase, cluster: &TestCluster) -> ExecutionResult {
        self.proxied_runs += 1;
        let mut r = self.run(test, cluster, true);
        r.coverage = CoverageSink::default();
        r
    }

    /// Always a regular run; with probability `p` also a proxied run whose
    /// traces are merged into `cluster`. Returns the regular result.
    pub fn execute_with_policy(
        &mut self,
        test: &TestCase,
        cluster: &mut TestCluster,
        p: f64,
        rng: &mut impl Rng,
    ) -> ExecutionResult {
        let regular = self.execute_regular(test, cluster);
        if p > 0.0 && rng.gen_bool(p.min(1.0)) {
            let proxied = self.execute_proxied(test, cluster);
            for (key, trace) in proxied.traces {
                cluster.traces.entry(key).or_default().merge(&trace);
            }
        }
        regular
    }

    fn run(&mut self, test: &TestCase, cluster: &TestCluster, proxied: bool) -> ExecutionResult {
        let start = Instant::now();
        let mut it = self.fresh();
        it.deadline = Some(start + self.timeout);
        if !proxied {
            it.coverage = Some(CoverageSink::default());
        }
        let mut result = ExecutionResult::default();
        let mut cells: Vec<((usize, usize), TraceCell)> = Vec::new();
        match it.import_module(&self.subject) {
            Ok(_) => {
                // module-level code is not a coverage target
                if let Some(sink) = it.coverage.as_mut() {
                    *sink = CoverageSink::default();
                }
                it.shim_enabled = proxied;
                let mut values: Vec<Value> = Vec::with_capacity(test.len());
                for (i, slot) in test.statements.iter().enumerate() {
                    let r = self.step(&mut it, &slot.stmt, &values, cluster, proxied.then_some(&mut cells));
                    match r {
                        Ok(v) => {
                            result.outcomes.push(Outcome::Ok);
                            if let Some(c) = slot.stmt.callable() {
                                if !proxied {
                                    let t = match cluster.callables[c].kind {
                                        CallableKind::Constructor => GradualType::None,
                                        _ => it.type_of(&v),
                                    };
                                    result.returns.push((i, t));
                                    if let Ok(s) = it.repr(&v) {
                                        result.values.push((i, s));
                                    }
                                }
                            }
                            values.push(v);
                        }
                        Err(Unwind::Raise(e)) => {
                            result.outcomes.push(Outcome::Exception(it.exception_name(&e)));
                            break;
                        }
                        Err(Unwind::Timeout) => {
                            result.outcomes.push(Outcome::Timeout);
                            break;
                        }
                    }
                }
            }
            Err(e) => {
                let name = match e {
                    Unwind::Raise(v) => it.exception_name(&v),
                    Unwind::Timeout => "Timeout".to_string(),
                };
                log::debug!("subject import failed during execution: {name}");
            }
        }
        it.shim_enabled = false;
        for (key, cell) in cells {
            result.traces.push((key, cell.extract_and_reset()));
        }
        if let Some(sink) = it.coverage.take() {
            result.coverage = sink;
        }
        result.wall_time = start.elapsed().as_secs_f64();
        result
    }

    fn step(
        &self,
        it: &mut Interp,
        stmt: &Statement,
        values: &[Value],
        cluster: &TestCluster,
        cells: Option<&mut Vec<((usize, usize), TraceCell)>>,
    ) -> Exec<Value> {
        let get = |i: &usize| values[*i].clone();
        let args_of = |callable: usize, args: &[usize], cells: Option<&mut Vec<((usize, usize), TraceCell)>>| {
            let mut out = Vec::with_capacity(args.len());
            match cells {
                Some(cells) => {
                    for (p, a) in args.iter().enumerate() {
                        let cell = TraceCell::new();
                        out.push(cell.wrap(values[*a].peel().clone()));
                        cells.push(((callable, p), cell));
                    }
                }
                None => out.extend(args.iter().map(get)),
            }
            out
        };
        match stmt {
            Statement::None => Ok(Value::None),
            Statement::Bool(b) => Ok(Value::Bool(*b)),
            Statement::Int(i) => Ok(Value::Int(*i)),
            Statement::Float(f) => Ok(Value::Float(*f)),
            Statement::Str(s) => Ok(Value::str(s)),
            Statement::List(items) => Ok(Value::list(items.iter().map(get).collect())),
            Statement::Tuple(items) => Ok(Value::tuple(items.iter().map(get).collect())),
            Statement::Set(items) => it.make_set(items.iter().map(get).collect()),
            Statement::Dict(pairs) => it.make_dict(pairs.iter().map(|(k, v)| (get(k), get(v))).collect()),
            Statement::Object(c) => {
                let name = cluster.hierarchy.class(*c).qualified_name.clone();
                match self.builtins.class_named(&name) {
                    Some(class) => it.call(&Value::Class(class), Vec::new()),
                    None => it.err("TypeError", format!("cannot instantiate {name}")),
                }
            }
            Statement::Construct { callable, args } | Statement::Call { callable, args } => {
                let info = &cluster.callables[*callable];
                let module = it.import_module(&info.module)?;
                let Some(f) = module.get(&info.name) else {
                    return it.err("AttributeError", format!("module has no attribute '{}'", info.name));
                };
                let args = args_of(*callable, args, cells);
                it.call(&f, args)
            }
            Statement::Method { callable, receiver, args } => {
                let info = &cluster.callables[*callable];
                let recv = get(receiver);
                let m = it.get_attr(&recv, &info.name)?;
                let args = args_of(*callable, args, cells);
                it.call(&m, args)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_cluster;
    use crate::host::parse_module;
    use crate::instrument::{instrument, BranchRegistry};
    use crate::types::ClassId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(src: &str) -> (TestCluster, Executor, BranchRegistry) {
        let mut m = parse_module("m", src).unwrap();
        let reg = instrument(&mut m);
        let loader = Rc::new(Loader::new("/nonexistent", false));
        loader.insert(m);
        let cluster = build_cluster(&loader, "m", 1).unwrap();
        let exec = Executor::new(loader, &cluster, Duration::from_secs(3));
        (cluster, exec, reg)
    }

    fn callable(c: &TestCluster, name: &str) -> usize {
        c.callables.iter().position(|x| x.local_name == name).unwrap()
    }

    const SRC: &str = "\
def pair(a, b):
    if a <= b:
        return ('a', 1)
    return []
def boom(x, y, z):
    return x.missing
def check(x):
    if isinstance(x, int):
        return 1
    return 0
";

    fn call_test(c: usize, args: Vec<(Statement, GradualType)>) -> TestCase {
        let mut t = TestCase::default();
        let slots: Vec<usize> = args.into_iter().map(|(s, ty)| t.push(s, ty)).collect();
        t.push(Statement::Call { callable: c, args: slots }, GradualType::Any);
        t
    }

    fn int(i: i64) -> (Statement, GradualType) {
        (Statement::Int(i), GradualType::Instance(ClassId::INT))
    }

    #[test]
    fn regular_run_records_returns_and_coverage() {
        let (cluster, mut ex, reg) = setup(SRC);
        let f = callable(&cluster, "pair");
        let r = ex.execute_regular(&call_test(f, vec![int(5), int(3)]), &cluster);
        assert_eq!(r.outcomes, vec![Outcome::Ok; 3]);
        assert_eq!(r.returns, vec![(2, GradualType::list(GradualType::Any))]);
        assert!(reg.is_covered(reg.goals[1], &r.coverage));
        assert!(!reg.is_covered(reg.goals[0], &r.coverage));
        let r = ex.execute_regular(&call_test(f, vec![int(1), int(3)]), &cluster);
        let tuple = GradualType::Tuple(vec![GradualType::Instance(ClassId::STR), GradualType::Instance(ClassId::INT)]);
        assert_eq!(r.returns, vec![(2, tuple)]);
        assert_eq!(r.values, vec![(2, "('a', 1)".to_string())]);
    }

    #[test]
    fn raising_statement_ends_the_run_and_records_no_return() {
        let (cluster, mut ex, _) = setup(SRC);
        let f = callable(&cluster, "boom");
        let mut t = call_test(f, vec![int(1), int(2), int(3)]);
        t.push(Statement::Int(9), GradualType::Any);
        let r = ex.execute_regular(&t, &cluster);
        assert_eq!(r.outcomes.len(), 4);
        assert_eq!(r.outcomes[3], Outcome::Exception("AttributeError".into()));
        assert!(r.returns.is_empty());
        assert!(r.traces.is_empty());
    }

    #[test]
    fn proxied_run_has_one_proxy_per_parameter_and_keeps_traces_on_error() {
        let (cluster, mut ex, _) = setup(SRC);
        let f = callable(&cluster, "boom");
        let r = ex.execute_proxied(&call_test(f, vec![int(1), int(2), int(3)]), &cluster);
        let keys: Vec<(usize, usize)> = r.traces.iter().map(|(k, _)| *k).collect();
        assert_eq!(keys, vec![(f, 0), (f, 1), (f, 2)]);
        assert!(r.traces[0].1.attribute_accesses.contains("missing"));
        assert!(r.traces[1].1.is_empty());
        assert!(r.coverage.arms.is_empty() && r.coverage.codes.is_empty());
        let empty = ex.execute_proxied(&TestCase::default(), &cluster);
        assert!(empty.outcomes.is_empty() && empty.traces.is_empty());
    }

    #[test]
    fn policy_extremes_and_coverage_purity() {
        let (mut cluster, mut ex, _) = setup(SRC);
        let f = callable(&cluster, "check");
        let t = call_test(f, vec![int(4)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plain = ex.execute_regular(&t, &cluster);
        for _ in 0..20 {
            let r = ex.execute_with_policy(&t, &mut cluster, 0.0, &mut rng);
            assert_eq!(r.coverage.arms, plain.coverage.arms);
        }
        assert_eq!(ex.proxied_runs, 0);
        for _ in 0..20 {
            let r = ex.execute_with_policy(&t, &mut cluster, 1.0, &mut rng);
            assert_eq!(r.coverage.arms, plain.coverage.arms);
        }
        assert_eq!(ex.proxied_runs, 20);
        assert!(cluster.traces[&(f, 0)].typecheck_targets.contains(&ClassId::INT));
    }

    #[test]
    fn proxied_run_count_is_binomial() {
        let (mut cluster, mut ex, _) = setup("def f():\n    return 1\n");
        let t = TestCase::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            ex.execute_with_policy(&t, &mut cluster, 0.05, &mut rng);
        }
        // 99 % interval of Binomial(10000, 0.05): 500 +- 2.576 * sqrt(475)
        let sd = (10_000.0f64 * 0.05 * 0.95).sqrt();
        let (lo, hi) = (500.0 - 2.576 * sd, 500.0 + 2.576 * sd);
        let n = ex.proxied_runs as f64;
        assert!(lo <= n && n <= hi, "{n} outside [{lo:.1}, {hi:.1}]");
    }

    #[test]
    fn timeout_yields_partial_result() {
        let (cluster, mut ex, _) = setup("def spin(n):\n    while n > 0:\n        n = n + 1\n");
        ex.timeout = Duration::from_millis(50);
        let f = callable(&cluster, "spin");
        let r = ex.execute_regular(&call_test(f, vec![int(1)]), &cluster);
        assert_eq!(r.outcomes.last(), Some(&Outcome::Timeout));
        assert!(r.wall_time < 1.0);
    }

    #[test]
    fn methods_receive_unwrapped_receivers() {
        let src = "class A:\n    def __init__(self, v):\n        self.v = v\n    def get(self, k):\n        return self.v + k\n";
        let (cluster, mut ex, _) = setup(src);
        let ctor = callable(&cluster, "A.__init__");
        let get = callable(&cluster, "A.get");
        let mut t = TestCase::default();
        let one = t.push(Statement::Int(1), GradualType::Instance(ClassId::INT));
        let a = t.push(Statement::Construct { callable: ctor, args: vec![one] }, GradualType::Any);
        t.push(Statement::Method { callable: get, receiver: a, args: vec![one] }, GradualType::Any);
        let r = ex.execute_regular(&t, &cluster);
        assert_eq!(r.returns, vec![(1, GradualType::None), (2, GradualType::Instance(ClassId::INT))]);
        let r = ex.execute_proxied(&t, &cluster);
        assert_eq!(r.outcomes, vec![Outcome::Ok; 3]);
        let ctor_trace = &r.traces.iter().find(|(k, _)| *k == (ctor, 0)).unwrap().1;
        // the stored proxy keeps recording after the constructor returned
        assert!(ctor_trace.method_invocations.contains_key("__add__"));
    }
}
