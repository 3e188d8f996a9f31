//! Tree-walking evaluator.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::path::PathBuf;
use std::rc::Rc;
use std::time::Instant;

use indexmap::IndexMap;

use super::ast::*;
use super::builtins::BUILTIN_EXCEPTIONS;
use super::parser::parse_module;
use super::value::*;
use crate::types::{ClassId, CollectionKind, GradualType, CORE_BUILTINS};

pub const MAX_CALL_DEPTH: u32 = 50;
const K: f64 = 1.0;
/// Longest sequence the runtime will materialize.
pub(crate) const MAX_SEQUENCE: usize = 1_000_000;

#[derive(Debug, Clone)]
pub enum Unwind {
    Raise(Value),
    Timeout,
}

pub type Exec<T> = Result<T, Unwind>;

pub(crate) enum Flow {
    Next,
    Break,
    Continue,
    Return(Value),
}

/// The builtin class objects. Immutable and shared across executions.
pub struct Builtins {
    pub object: Rc<ClassObj>,
    pub int: Rc<ClassObj>,
    pub bool_: Rc<ClassObj>,
    pub float: Rc<ClassObj>,
    pub str_: Rc<ClassObj>,
    pub list: Rc<ClassObj>,
    pub set: Rc<ClassObj>,
    pub dict: Rc<ClassObj>,
    pub tuple: Rc<ClassObj>,
    pub none_type: Rc<ClassObj>,
    pub function: Rc<ClassObj>,
    pub module: Rc<ClassObj>,
    pub type_: Rc<ClassObj>,
    pub proxy: Rc<ClassObj>,
    pub exceptions: IndexMap<&'static str, Rc<ClassObj>>,
}

fn builtin_class(name: &str, kind: ClassKind, bases: Vec<Rc<ClassObj>>) -> Rc<ClassObj> {
    let mro = linearize(&bases).expect("builtin hierarchy is consistent");
    Rc::new(ClassObj {
        name: name.into(),
        qualname: name.into(),
        module: "builtins".into(),
        bases,
        mro,
        dict: RefCell::new(IndexMap::new()),
        kind,
        def: None,
    })
}

impl Builtins {
    pub fn new() -> Self {
        let object = builtin_class("object", ClassKind::Object, vec![]);
        let o = || vec![object.clone()];
        let int = builtin_class("int", ClassKind::Int, o());
        let bool_ = builtin_class("bool", ClassKind::Bool, vec![int.clone()]);
        let mut exceptions: IndexMap<&'static str, Rc<ClassObj>> = IndexMap::new();
        for (name, base) in BUILTIN_EXCEPTIONS {
            let bases = match base {
                Some(b) => vec![exceptions[b].clone()],
                None => o(),
            };
            exceptions.insert(name, builtin_class(name, ClassKind::Exception, bases));
        }
        Builtins {
            float: builtin_class("float", ClassKind::Float, o()),
            str_: builtin_class("str", ClassKind::Str, o()),
            list: builtin_class("list", ClassKind::List, o()),
            set: builtin_class("set", ClassKind::Set, o()),
            dict: builtin_class("dict", ClassKind::Dict, o()),
            tuple: builtin_class("tuple", ClassKind::Tuple, o()),
            none_type: builtin_class("NoneType", ClassKind::NoneType, o()),
            function: builtin_class("function", ClassKind::Function, o()),
            module: builtin_class("module", ClassKind::Module, o()),
            type_: builtin_class("type", ClassKind::Type, o()),
            proxy: builtin_class("ObjectProxy", ClassKind::ObjectProxy, o()),
            object,
            int,
            bool_,
            exceptions,
        }
    }

    /// Builtin class visible under `name` in every namespace.
    pub fn class_named(&self, name: &str) -> Option<Rc<ClassObj>> {
        Some(match name {
            "object" => self.object.clone(),
            "int" => self.int.clone(),
            "bool" => self.bool_.clone(),
            "float" => self.float.clone(),
            "str" => self.str_.clone(),
            "list" => self.list.clone(),
            "set" => self.set.clone(),
            "dict" => self.dict.clone(),
            "tuple" => self.tuple.clone(),
            other => return self.exceptions.get(other).cloned(),
        })
    }
}

impl Default for Builtins {
    fn default() -> Self {
        Self::new()
    }
}

/// C3 linearization of the strict ancestors given the direct bases.
pub(crate) fn linearize(bases: &[Rc<ClassObj>]) -> Option<Vec<Rc<ClassObj>>> {
    let mut seqs: Vec<Vec<Rc<ClassObj>>> = bases
        .iter()
        .map(|b| {
            let mut s = vec![b.clone()];
            s.extend(b.mro.iter().cloned());
            s
        })
        .collect();
    seqs.push(bases.to_vec());
    let mut out: Vec<Rc<ClassObj>> = Vec::new();
    loop {
        seqs.retain(|s| !s.is_empty());
        if seqs.is_empty() {
            return Some(out);
        }
        let head = seqs.iter().map(|s| s[0].clone()).find(|cand| {
            !seqs.iter().any(|s| s[1..].iter().any(|c| Rc::ptr_eq(c, cand)))
        })?;
        for s in &mut seqs {
            if Rc::ptr_eq(&s[0], &head) {
                s.remove(0);
            }
        }
        out.push(head);
    }
}

/// Parsed module sources, shared by every execution of one run.
pub struct Loader {
    root: PathBuf,
    strip_annotations: bool,
    cache: RefCell<HashMap<String, Result<Rc<Module>, String>>>,
}

impl Loader {
    pub fn new(root: impl Into<PathBuf>, strip_annotations: bool) -> Self {
        Loader {
            root: root.into(),
            strip_annotations,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn root(&self) -> &std::path::Path {
        &self.root
    }

    /// Registers an already prepared (e.g. instrumented) syntax tree.
    pub fn insert(&self, module: Module) -> Rc<Module> {
        let rc = Rc::new(module);
        self.cache.borrow_mut().insert(rc.name.clone(), Ok(rc.clone()));
        rc
    }

    pub fn path_of(&self, name: &str) -> Option<PathBuf> {
        let rel = name.replace('.', "/");
        let file = self.root.join(format!("{rel}.py"));
        if file.is_file() {
            return Some(file);
        }
        let pkg = self.root.join(rel).join("__init__.py");
        pkg.is_file().then_some(pkg)
    }

    /// Parses (once) the module called `name`.
    pub fn load(&self, name: &str) -> Result<Rc<Module>, String> {
        if let Some(r) = self.cache.borrow().get(name) {
            return r.clone();
        }
        let result = self.read(name);
        self.cache.borrow_mut().insert(name.to_string(), result.clone());
        result
    }

    fn read(&self, name: &str) -> Result<Rc<Module>, String> {
        let path = self.path_of(name).ok_or_else(|| format!("No module named '{name}'"))?;
        let src = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut module = parse_module(name, &src).map_err(|e| format!("{}: {e}", path.display()))?;
        if self.strip_annotations {
            module.strip_annotations();
        }
        Ok(Rc::new(module))
    }
}

/// Maps runtime classes onto the cluster's class ids.
#[derive(Debug, Clone, Default)]
pub struct TypeMap {
    pub by_name: HashMap<String, ClassId>,
}

/// Branch-coverage observations of one execution.
#[derive(Debug, Clone, Default)]
pub struct CoverageSink {
    pub arms: HashSet<(Probe, bool)>,
    /// Smallest observed (true-arm, false-arm) distance per predicate.
    pub distances: HashMap<Probe, (f64, f64)>,
    pub codes: HashSet<u32>,
}

impl CoverageSink {
    pub fn record(&mut self, probe: Probe, outcome: bool, to_true: f64, to_false: f64) {
        self.arms.insert((probe, outcome));
        let e = self.distances.entry(probe).or_insert((f64::INFINITY, f64::INFINITY));
        e.0 = e.0.min(to_true);
        e.1 = e.1.min(to_false);
    }
}

pub(crate) enum Scope<'a> {
    Module,
    Class(&'a mut IndexMap<Name, Value>),
    Function(&'a mut HashMap<Name, Value>),
}

pub(crate) struct Frame<'a> {
    pub module: Rc<ModuleObj>,
    pub scope: Scope<'a>,
    pub class_name: Option<Name>,
}

pub struct Interp {
    pub builtins: Rc<Builtins>,
    pub loader: Rc<Loader>,
    pub types: Rc<TypeMap>,
    pub modules: HashMap<String, Rc<ModuleObj>>,
    /// When set, `isinstance` records targets on proxies.
    pub shim_enabled: bool,
    /// Deepest proxy nesting created for collection elements.
    pub max_proxy_depth: u8,
    pub coverage: Option<CoverageSink>,
    pub deadline: Option<Instant>,
    steps: u32,
    pub(crate) call_depth: u32,
}

/// Module globals, functions and user class dicts form reference cycles;
/// clearing them lets a finished interpreter's objects be freed.
impl Drop for Interp {
    fn drop(&mut self) {
        for (_, module) in self.modules.drain() {
            let globals = std::mem::take(&mut *module.globals.borrow_mut());
            for value in globals.into_values() {
                if let Value::Class(c) = value {
                    if c.kind == ClassKind::User {
                        let dict = std::mem::take(&mut *c.dict.borrow_mut());
                        drop(dict);
                    }
                }
            }
        }
    }
}

impl Interp {
    pub fn new(builtins: Rc<Builtins>, loader: Rc<Loader>, types: Rc<TypeMap>) -> Self {
        Interp {
            builtins,
            loader,
            types,
            modules: HashMap::new(),
            shim_enabled: false,
            max_proxy_depth: 1,
            coverage: None,
            deadline: None,
            steps: 0,
            call_depth: 0,
        }
    }

    /// Forgets imported modules so the next import re-executes them.
    pub fn reset_modules(&mut self) {
        self.modules.clear();
        self.call_depth = 0;
    }

    pub(crate) fn tick(&mut self) -> Exec<()> {
        self.steps = self.steps.wrapping_add(1);
        if self.steps.is_multiple_of(128) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Err(Unwind::Timeout);
                }
            }
        }
        Ok(())
    }

    // ----- exceptions -----

    pub fn new_exception(&self, class: &str, msg: &str) -> Value {
        let cls = self.builtins.exceptions[class].clone();
        let inst = Instance {
            class: cls,
            attrs: RefCell::new(IndexMap::new()),
        };
        inst.attrs.borrow_mut().insert("args".into(), Value::tuple(vec![Value::str(msg)]));
        Value::Instance(Rc::new(inst))
    }

    pub fn err<T>(&self, class: &str, msg: impl AsRef<str>) -> Exec<T> {
        Err(Unwind::Raise(self.new_exception(class, msg.as_ref())))
    }

    /// Qualified class name of a raised value.
    pub fn exception_name(&self, v: &Value) -> String {
        self.class_of(v).qualname.to_string()
    }

    pub fn exception_message(&self, v: &Value) -> String {
        if let Value::Instance(i) = v {
            if let Some(Value::Tuple(args)) = i.attrs.borrow().get("args") {
                if let Some(Value::Str(s)) = args.first() {
                    return s.to_string();
                }
            }
        }
        String::new()
    }

    // ----- classes and types -----

    pub fn class_of(&self, v: &Value) -> Rc<ClassObj> {
        let b = &self.builtins;
        match v {
            Value::None => b.none_type.clone(),
            Value::Bool(_) => b.bool_.clone(),
            Value::Int(_) => b.int.clone(),
            Value::Float(_) => b.float.clone(),
            Value::Str(_) => b.str_.clone(),
            Value::List(_) => b.list.clone(),
            Value::Tuple(_) => b.tuple.clone(),
            Value::Dict(_) => b.dict.clone(),
            Value::Set(_) => b.set.clone(),
            Value::Function(_) | Value::BoundMethod(..) | Value::Builtin(_) | Value::NativeMethod(..) => {
                b.function.clone()
            }
            Value::Class(_) => b.type_.clone(),
            Value::Instance(i) => i.class.clone(),
            Value::Module(_) => b.module.clone(),
            // masquerade: the runtime class of a proxy is the wrapped one
            Value::Proxy(p) => self.class_of(&p.wrapped),
        }
    }

    pub fn type_name(&self, v: &Value) -> String {
        match v {
            Value::Proxy(_) => "ObjectProxy".into(),
            other => self.class_of(other).name.to_string(),
        }
    }

    pub fn class_id(&self, c: &ClassObj) -> Option<ClassId> {
        if let Some(id) = self.types.by_name.get(&*c.qualname) {
            return Some(*id);
        }
        CORE_BUILTINS
            .iter()
            .position(|(n, _)| *n == &*c.qualname && &*c.module == "builtins")
            .map(|i| ClassId(i as u32))
    }

    /// Gradual type describing `v`, inspecting collections: tuples fully,
    /// other collections by their first element.
    pub fn type_of(&self, v: &Value) -> GradualType {
        self.type_of_depth(v, 0)
    }

    fn type_of_depth(&self, v: &Value, depth: u32) -> GradualType {
        let nested = |x: &Value| {
            if depth >= 3 {
                GradualType::Any
            } else {
                self.type_of_depth(x, depth + 1)
            }
        };
        match v {
            Value::None => GradualType::None,
            Value::Bool(_) => GradualType::Instance(ClassId::BOOL),
            Value::Int(_) => GradualType::Instance(ClassId::INT),
            Value::Float(_) => GradualType::Instance(ClassId::FLOAT),
            Value::Str(_) => GradualType::Instance(ClassId::STR),
            Value::Tuple(items) => {
                if depth >= 3 {
                    GradualType::bare(CollectionKind::TupleVariadic)
                } else {
                    GradualType::Tuple(items.iter().map(nested).collect())
                }
            }
            Value::List(l) => GradualType::list(l.borrow().first().map(nested).unwrap_or(GradualType::Any)),
            Value::Set(s) => GradualType::set(s.borrow().values().next().map(nested).unwrap_or(GradualType::Any)),
            Value::Dict(d) => match d.borrow().values().next() {
                Some((k, v)) => GradualType::dict(nested(k), nested(v)),
                None => GradualType::dict(GradualType::Any, GradualType::Any),
            },
            Value::Instance(i) => self
                .class_id(&i.class)
                .map(GradualType::Instance)
                .unwrap_or(GradualType::Any),
            Value::Proxy(p) => self.type_of_depth(&p.wrapped, depth),
            _ => GradualType::Any,
        }
    }

    // ----- modules -----

    pub fn import_module(&mut self, name: &str) -> Exec<Rc<ModuleObj>> {
        if let Some(m) = self.modules.get(name) {
            return Ok(m.clone());
        }
        if let Some(m) = self.builtin_module(name) {
            self.modules.insert(name.to_string(), m.clone());
            return Ok(m);
        }
        let ast = match self.loader.load(name) {
            Ok(a) => a,
            Err(msg) => return self.err("ImportError", msg),
        };
        let module = Rc::new(ModuleObj::new(name));
        module.globals.borrow_mut().insert("__name__".into(), Value::str(name));
        self.modules.insert(name.to_string(), module.clone());
        let mut frame = Frame {
            module: module.clone(),
            scope: Scope::Module,
            class_name: None,
        };
        if let Err(e) = self.exec_block(&ast.body, &mut frame) {
            self.modules.remove(name);
            return Err(e);
        }
        Ok(module)
    }

    fn builtin_module(&self, name: &str) -> Option<Rc<ModuleObj>> {
        let m = ModuleObj::new(name);
        {
            let mut g = m.globals.borrow_mut();
            match name {
                "os" => {
                    g.insert("sep".into(), Value::str(std::path::MAIN_SEPARATOR_STR));
                    g.insert("name".into(), Value::str(if cfg!(windows) { "nt" } else { "posix" }));
                    g.insert("linesep".into(), Value::str(if cfg!(windows) { "\r\n" } else { "\n" }));
                }
                "typing" => {
                    for n in [
                        "Any", "List", "Dict", "Set", "Tuple", "Optional", "Union", "Callable", "Iterable",
                        "Sequence", "Mapping", "TypeVar", "Generic",
                    ] {
                        g.insert(n.into(), Value::None);
                    }
                }
                "__future__" => {
                    g.insert("annotations".into(), Value::None);
                }
                _ => return None,
            }
        }
        Some(Rc::new(m))
    }

    fn resolve_relative(&self, current: &str, module: &str) -> String {
        let dots = module.chars().take_while(|c| *c == '.').count();
        if dots == 0 {
            return module.to_string();
        }
        let mut parts: Vec<&str> = current.split('.').collect();
        for _ in 0..dots {
            parts.pop();
        }
        let rest = &module[dots..];
        if !rest.is_empty() {
            parts.push(rest);
        }
        parts.join(".")
    }

    // ----- statements -----

    pub(crate) fn exec_block(&mut self, body: &[Stmt], frame: &mut Frame) -> Exec<Flow> {
        for stmt in body {
            match self.exec_stmt(stmt, frame)? {
                Flow::Next => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Next)
    }

    fn exec_stmt(&mut self, stmt: &Stmt, frame: &mut Frame) -> Exec<Flow> {
        match &stmt.kind {
            StmtKind::Expr(e) => {
                self.eval(e, frame)?;
            }
            StmtKind::Assign(target, value) => {
                let v = self.eval(value, frame)?;
                self.assign(target, v, frame)?;
            }
            StmtKind::AugAssign(target, op, value) => {
                self.aug_assign(target, *op, value, frame)?;
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e, frame)?,
                    None => Value::None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::If { test, body, orelse, probe } => {
                let taken = self.condition(test, *probe, frame)?;
                let branch = if taken { body } else { orelse };
                return self.exec_block(branch, frame);
            }
            StmtKind::While { test, body, probe } => loop {
                self.tick()?;
                if !self.condition(test, *probe, frame)? {
                    break;
                }
                match self.exec_block(body, frame)? {
                    Flow::Break => break,
                    Flow::Return(v) => return Ok(Flow::Return(v)),
                    Flow::Next | Flow::Continue => {}
                }
            },
            StmtKind::For { target, iter, body, probe } => {
                let iterable = self.eval(iter, frame)?;
                let items = self.iterate(&iterable)?;
                let mut exhausted = true;
                for item in items {
                    self.tick()?;
                    self.record_arm(*probe, true);
                    self.assign(target, item, frame)?;
                    match self.exec_block(body, frame)? {
                        Flow::Break => {
                            exhausted = false;
                            break;
                        }
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Next | Flow::Continue => {}
                    }
                }
                if exhausted {
                    self.record_arm(*probe, false);
                }
            }
            StmtKind::Pass => {}
            StmtKind::Break => return Ok(Flow::Break),
            StmtKind::Continue => return Ok(Flow::Continue),
            StmtKind::Raise(e) => {
                let v = match e {
                    Some(e) => self.eval(e, frame)?,
                    None => return self.err("RuntimeError", "No active exception to reraise"),
                };
                return Err(Unwind::Raise(self.make_exception(v)?));
            }
            StmtKind::Assert(test, msg) => {
                let v = self.eval(test, frame)?;
                if !self.truthy(&v)? {
                    let m = match msg {
                        Some(m) => {
                            let mv = self.eval(m, frame)?;
                            self.to_str(&mv)?
                        }
                        None => String::new(),
                    };
                    return self.err("AssertionError", m);
                }
            }
            StmtKind::FunctionDef(def) => {
                let f = self.make_function(def, frame)?;
                self.store(&def.name, f, frame);
            }
            StmtKind::ClassDef(def) => {
                let c = self.make_class(def, frame)?;
                self.store(&def.name, c, frame);
            }
            StmtKind::Import { module, alias } => {
                if module.contains('.') && alias.is_none() {
                    return self.err("ImportError", format!("dotted import of '{module}' needs an alias"));
                }
                let m = self.import_module(module)?;
                let name: Name = alias.clone().unwrap_or_else(|| module.as_str().into());
                self.store(&name, Value::Module(m), frame);
            }
            StmtKind::ImportFrom { module, names } => {
                let full = self.resolve_relative(&frame.module.name, module);
                let m = self.import_module(&full)?;
                for (n, alias) in names {
                    let v = match m.get(n) {
                        Some(v) => v,
                        None => {
                            // `from pkg import submodule`
                            let sub = format!("{full}.{n}");
                            if self.loader.path_of(&sub).is_some() {
                                Value::Module(self.import_module(&sub)?)
                            } else {
                                return self.err(
                                    "ImportError",
                                    format!("cannot import name '{n}' from '{full}'"),
                                );
                            }
                        }
                    };
                    self.store(alias.as_ref().unwrap_or(n), v, frame);
                }
            }
        }
        Ok(Flow::Next)
    }

    fn make_exception(&mut self, v: Value) -> Exec<Value> {
        let exc_root = self.builtins.exceptions["Exception"].clone();
        match &v {
            Value::Class(c) if c.is_subclass_of(&exc_root) => self.call(&v, vec![]),
            Value::Instance(i) if i.class.is_subclass_of(&exc_root) => Ok(v),
            _ => self.err("TypeError", "exceptions must derive from BaseException"),
        }
    }

    fn record_arm(&mut self, probe: Option<Probe>, outcome: bool) {
        if let (Some(p), Some(sink)) = (probe, self.coverage.as_mut()) {
            let (t, f) = if outcome { (0.0, K) } else { (K, 0.0) };
            sink.record(p, outcome, t, f);
        }
    }

    /// Evaluates a branch predicate, recording arm and distances when the
    /// statement is probed and coverage is on.
    fn condition(&mut self, test: &Expr, probe: Option<Probe>, frame: &mut Frame) -> Exec<bool> {
        match probe {
            Some(p) if self.coverage.is_some() => {
                let (outcome, t, f) = self.eval_cond(test, frame)?;
                if let Some(sink) = self.coverage.as_mut() {
                    sink.record(p, outcome, t, f);
                }
                Ok(outcome)
            }
            _ => {
                let v = self.eval(test, frame)?;
                self.truthy(&v)
            }
        }
    }

    /// Truth value plus distances to the true and false outcome.
    fn eval_cond(&mut self, e: &Expr, frame: &mut Frame) -> Exec<(bool, f64, f64)> {
        match e {
            Expr::Unary(UnaryOp::Not, inner) => {
                let (v, t, f) = self.eval_cond(inner, frame)?;
                Ok((!v, f, t))
            }
            Expr::And(a, b) => {
                let (va, ta, fa) = self.eval_cond(a, frame)?;
                if !va {
                    return Ok((false, ta + K, fa));
                }
                let (vb, tb, fb) = self.eval_cond(b, frame)?;
                Ok((vb, ta + tb, fa.min(fb)))
            }
            Expr::Or(a, b) => {
                let (va, ta, fa) = self.eval_cond(a, frame)?;
                if va {
                    return Ok((true, ta, fa + K));
                }
                let (vb, tb, fb) = self.eval_cond(b, frame)?;
                Ok((vb, ta.min(tb), fa + fb))
            }
            Expr::Compare(op, l, r) => {
                let lv = self.eval(l, frame)?;
                let rv = self.eval(r, frame)?;
                let res = self.compare(*op, &lv, &rv)?;
                let outcome = self.truthy(&res)?;
                let (t, f) = branch_distance(*op, lv.peel(), rv.peel(), outcome);
                Ok((outcome, t, f))
            }
            _ => {
                let v = self.eval(e, frame)?;
                let b = self.truthy(&v)?;
                Ok(if b { (true, 0.0, K) } else { (false, K, 0.0) })
            }
        }
    }

    fn store(&mut self, name: &Name, v: Value, frame: &mut Frame) {
        match &mut frame.scope {
            Scope::Module => {
                frame.module.globals.borrow_mut().insert(name.clone(), v);
            }
            Scope::Class(ns) => {
                ns.insert(name.clone(), v);
            }
            Scope::Function(locals) => {
                locals.insert(name.clone(), v);
            }
        }
    }

    fn lookup(&self, name: &Name, frame: &Frame) -> Exec<Value> {
        let local = match &frame.scope {
            Scope::Function(l) => l.get(name).cloned(),
            Scope::Class(ns) => ns.get(name).cloned(),
            Scope::Module => None,
        };
        if let Some(v) = local {
            return Ok(v);
        }
        if let Some(v) = frame.module.globals.borrow().get(name) {
            return Ok(v.clone());
        }
        if let Some(c) = self.builtins.class_named(name) {
            return Ok(Value::Class(c));
        }
        if let Some((_, b)) = Builtin::ALL.iter().find(|(n, _)| *n == &**name) {
            return Ok(Value::Builtin(*b));
        }
        self.err("NameError", format!("name '{name}' is not defined"))
    }

    fn assign(&mut self, target: &Target, v: Value, frame: &mut Frame) -> Exec<()> {
        match target {
            Target::Name(n) => {
                self.store(n, v, frame);
                Ok(())
            }
            Target::Attribute(obj, name) => {
                let o = self.eval(obj, frame)?;
                self.set_attr(&o, name, v)
            }
            Target::Subscript(obj, idx) => {
                let o = self.eval(obj, frame)?;
                let k = self.eval(idx, frame)?;
                self.set_item(&o, k, v)
            }
            Target::Tuple(targets) => {
                let items = self.iterate(&v)?;
                if items.len() < targets.len() {
                    return self.err(
                        "ValueError",
                        format!("not enough values to unpack (expected {}, got {})", targets.len(), items.len()),
                    );
                }
                if items.len() > targets.len() {
                    return self.err(
                        "ValueError",
                        format!("too many values to unpack (expected {})", targets.len()),
                    );
                }
                for (t, item) in targets.iter().zip(items) {
                    self.assign(t, item, frame)?;
                }
                Ok(())
            }
        }
    }

    fn aug_assign(&mut self, target: &Target, op: BinOp, value: &Expr, frame: &mut Frame) -> Exec<()> {
        match target {
            Target::Name(n) => {
                let cur = self.lookup(n, frame)?;
                let rhs = self.eval(value, frame)?;
                let new = self.inplace(op, cur, rhs)?;
                self.store(n, new, frame);
                Ok(())
            }
            Target::Attribute(obj, name) => {
                let o = self.eval(obj, frame)?;
                let cur = self.get_attr(&o, name)?;
                let rhs = self.eval(value, frame)?;
                let new = self.inplace(op, cur, rhs)?;
                self.set_attr(&o, name, new)
            }
            Target::Subscript(obj, idx) => {
                let o = self.eval(obj, frame)?;
                let k = self.eval(idx, frame)?;
                let cur = self.get_item(&o, &k)?;
                let rhs = self.eval(value, frame)?;
                let new = self.inplace(op, cur, rhs)?;
                self.set_item(&o, k, new)
            }
            Target::Tuple(_) => self.err("SyntaxError", "illegal expression for augmented assignment"),
        }
    }

    fn inplace(&mut self, op: BinOp, cur: Value, rhs: Value) -> Exec<Value> {
        if let (BinOp::Add, Value::List(l)) = (op, &cur) {
            let items = self.iterate(&rhs)?;
            l.borrow_mut().extend(items);
            return Ok(cur);
        }
        self.binop(op, &cur, &rhs)
    }

    // ----- definitions -----

    fn make_function(&mut self, def: &Rc<FunctionDef>, frame: &mut Frame) -> Exec<Value> {
        let mut defaults = Vec::with_capacity(def.params.len());
        for p in &def.params {
            defaults.push(match &p.default {
                Some(d) => Some(self.eval(d, frame)?),
                None => None,
            });
        }
        let qualname = match &frame.class_name {
            Some(c) => format!("{}.{}.{}", frame.module.name, c, def.name),
            None => format!("{}.{}", frame.module.name, def.name),
        };
        Ok(Value::Function(Rc::new(Function {
            def: def.clone(),
            module: frame.module.clone(),
            qualname: qualname.into(),
            defaults,
        })))
    }

    fn make_class(&mut self, def: &Rc<ClassDef>, frame: &mut Frame) -> Exec<Value> {
        let mut bases = Vec::new();
        for b in &def.bases {
            match self.eval(b, frame)? {
                Value::Class(c) => {
                    let ok = matches!(c.kind, ClassKind::User | ClassKind::Object | ClassKind::Exception);
                    if !ok {
                        return self.err("TypeError", format!("subclassing '{}' is not supported", c.name));
                    }
                    bases.push(c)
                }
                // typing placeholders such as Generic[T]
                Value::None => {}
                other => {
                    return self.err("TypeError", format!("bases must be classes, not {}", self.type_name(&other)))
                }
            }
        }
        if bases.is_empty() {
            bases.push(self.builtins.object.clone());
        }
        let Some(mro) = linearize(&bases) else {
            return self.err("TypeError", "Cannot create a consistent method resolution order (MRO)");
        };
        let mut ns: IndexMap<Name, Value> = IndexMap::new();
        {
            let mut inner = Frame {
                module: frame.module.clone(),
                scope: Scope::Class(&mut ns),
                class_name: Some(def.name.clone()),
            };
            self.exec_block(&def.body, &mut inner)?;
        }
        Ok(Value::Class(Rc::new(ClassObj {
            name: def.name.clone(),
            qualname: format!("{}.{}", frame.module.name, def.name).into(),
            module: frame.module.name.clone(),
            bases,
            mro,
            dict: RefCell::new(ns),
            kind: ClassKind::User,
            def: Some(def.clone()),
        })))
    }

    // ----- calls -----

    pub fn call(&mut self, f: &Value, args: Vec<Value>) -> Exec<Value> {
        match f {
            Value::Function(func) => self.call_function(func, args),
            Value::BoundMethod(recv, func) => {
                let mut full = Vec::with_capacity(args.len() + 1);
                full.push((**recv).clone());
                full.extend(args);
                self.call_function(func, full)
            }
            Value::Builtin(b) => self.call_builtin(*b, args),
            Value::NativeMethod(recv, name) => self.call_method(recv, name, args),
            Value::Class(c) => self.instantiate(c, args),
            Value::Proxy(p) => {
                let operand = None;
                p.with_node(|t| t.record_method("__call__", operand));
                self.call(&p.wrapped, args)
            }
            Value::Instance(i) => match i.class.lookup("__call__") {
                Some(Value::Function(func)) => {
                    let mut full = vec![f.clone()];
                    full.extend(args);
                    self.call_function(&func, full)
                }
                _ => self.err("TypeError", format!("'{}' object is not callable", i.class.name)),
            },
            other => self.err("TypeError", format!("'{}' object is not callable", self.type_name(other))),
        }
    }

    pub fn call_function(&mut self, func: &Rc<Function>, args: Vec<Value>) -> Exec<Value> {
        let def = &func.def;
        let n = def.params.len();
        if args.len() > n {
            return self.err(
                "TypeError",
                format!("{}() takes {} positional arguments but {} were given", def.name, n, args.len()),
            );
        }
        let mut locals: HashMap<Name, Value> = HashMap::with_capacity(n + 4);
        let given = args.len();
        for (p, a) in def.params.iter().zip(args) {
            locals.insert(p.name.clone(), a);
        }
        for (i, p) in def.params.iter().enumerate().skip(given) {
            match &func.defaults[i] {
                Some(d) => {
                    locals.insert(p.name.clone(), d.clone());
                }
                None => {
                    return self.err(
                        "TypeError",
                        format!("{}() missing required positional argument: '{}'", def.name, p.name),
                    )
                }
            }
        }
        if self.call_depth >= MAX_CALL_DEPTH {
            return self.err("RecursionError", "maximum recursion depth exceeded");
        }
        self.tick()?;
        if let (Some(code), Some(sink)) = (def.code, self.coverage.as_mut()) {
            sink.codes.insert(code);
        }
        self.call_depth += 1;
        let result = {
            let mut frame = Frame {
                module: func.module.clone(),
                scope: Scope::Function(&mut locals),
                class_name: None,
            };
            self.exec_block(&def.body, &mut frame)
        };
        self.call_depth -= 1;
        match result? {
            Flow::Return(v) => Ok(v),
            _ => Ok(Value::None),
        }
    }

    fn instantiate(&mut self, c: &Rc<ClassObj>, args: Vec<Value>) -> Exec<Value> {
        match c.kind {
            ClassKind::User | ClassKind::Object | ClassKind::Exception => {
                let inst = Rc::new(Instance {
                    class: c.clone(),
                    attrs: RefCell::new(IndexMap::new()),
                });
                let v = Value::Instance(inst.clone());
                match c.lookup("__init__") {
                    Some(Value::Function(init)) => {
                        let mut full = vec![v.clone()];
                        full.extend(args);
                        let r = self.call_function(&init, full)?;
                        if !r.is_none() {
                            return self.err("TypeError", "__init__() should return None");
                        }
                    }
                    _ if c.base_kind() == ClassKind::Exception => {
                        inst.attrs.borrow_mut().insert("args".into(), Value::tuple(args));
                    }
                    _ if !args.is_empty() => {
                        return self.err("TypeError", format!("{}() takes no arguments", c.name));
                    }
                    _ => {}
                }
                Ok(v)
            }
            _ => self.convert(c, args),
        }
    }

    // ----- expressions -----

    pub(crate) fn eval(&mut self, e: &Expr, frame: &mut Frame) -> Exec<Value> {
        match e {
            Expr::Const(c) => Ok(match c {
                Const::None => Value::None,
                Const::Bool(b) => Value::Bool(*b),
                Const::Int(i) => Value::Int(*i),
                Const::Float(f) => Value::Float(*f),
                Const::Str(s) => Value::Str(s.clone()),
            }),
            Expr::Name(n) => self.lookup(n, frame),
            Expr::Attribute(obj, name) => {
                let o = self.eval(obj, frame)?;
                self.get_attr(&o, name)
            }
            Expr::Subscript(obj, idx) => {
                let o = self.eval(obj, frame)?;
                if let Expr::Slice(lo, hi) = &**idx {
                    let lo = match lo {
                        Some(x) => Some(self.eval(x, frame)?),
                        None => None,
                    };
                    let hi = match hi {
                        Some(x) => Some(self.eval(x, frame)?),
                        None => None,
                    };
                    return self.get_slice(&o, lo, hi);
                }
                let k = self.eval(idx, frame)?;
                self.get_item(&o, &k)
            }
            Expr::Slice(..) => self.err("SyntaxError", "slice outside subscript"),
            Expr::Call(f, args) => {
                // method calls skip the bound-method allocation
                let fv = self.eval(f, frame)?;
                let mut argv = Vec::with_capacity(args.len());
                for a in args {
                    argv.push(self.eval(a, frame)?);
                }
                self.call(&fv, argv)
            }
            Expr::BinOp(op, a, b) => {
                let av = self.eval(a, frame)?;
                let bv = self.eval(b, frame)?;
                self.binop(*op, &av, &bv)
            }
            Expr::Unary(op, a) => {
                let v = self.eval(a, frame)?;
                self.unary(*op, &v)
            }
            Expr::And(a, b) => {
                let av = self.eval(a, frame)?;
                if !self.truthy(&av)? {
                    return Ok(av);
                }
                self.eval(b, frame)
            }
            Expr::Or(a, b) => {
                let av = self.eval(a, frame)?;
                if self.truthy(&av)? {
                    return Ok(av);
                }
                self.eval(b, frame)
            }
            Expr::Compare(op, a, b) => {
                let av = self.eval(a, frame)?;
                let bv = self.eval(b, frame)?;
                self.compare(*op, &av, &bv)
            }
            Expr::IfExp(cond, body, orelse) => {
                let c = self.eval(cond, frame)?;
                if self.truthy(&c)? {
                    self.eval(body, frame)
                } else {
                    self.eval(orelse, frame)
                }
            }
            Expr::List(items) => {
                let mut out = Vec::with_capacity(items.len());
                for i in items {
                    out.push(self.eval(i, frame)?);
                }
                Ok(Value::list(out))
            }
            Expr::Tuple(items) => {
                let mut out = Vec::with_capacity(items.len());
                for i in items {
                    out.push(self.eval(i, frame)?);
                }
                Ok(Value::tuple(out))
            }
            Expr::Set(items) => {
                let mut out = Vec::with_capacity(items.len());
                for i in items {
                    out.push(self.eval(i, frame)?);
                }
                self.make_set(out)
            }
            Expr::Dict(pairs) => {
                let mut out = Vec::with_capacity(pairs.len());
                for (k, v) in pairs {
                    let kv = self.eval(k, frame)?;
                    let vv = self.eval(v, frame)?;
                    out.push((kv, vv));
                }
                self.make_dict(out)
            }
        }
    }

    pub fn make_set(&mut self, items: Vec<Value>) -> Exec<Value> {
        let mut m = IndexMap::with_capacity(items.len());
        for v in items {
            let k = self.hash_key(&v)?;
            m.entry(k).or_insert(v);
        }
        Ok(Value::Set(Rc::new(RefCell::new(m))))
    }

    pub fn make_dict(&mut self, pairs: Vec<(Value, Value)>) -> Exec<Value> {
        let mut m = IndexMap::with_capacity(pairs.len());
        for (k, v) in pairs {
            let hk = self.hash_key(&k)?;
            match m.get_mut(&hk) {
                Some(slot) => {
                    let (_, old): &mut (Value, Value) = slot;
                    *old = v;
                }
                None => {
                    m.insert(hk, (k, v));
                }
            }
        }
        Ok(Value::Dict(Rc::new(RefCell::new(m))))
    }
}

/// Branch distance of a comparison towards its true and false outcome.
pub fn branch_distance(op: CmpOp, a: &Value, b: &Value, outcome: bool) -> (f64, f64) {
    let num = |v: &Value| match v {
        Value::Int(i) => Some(*i as f64),
        Value::Float(f) if f.is_finite() => Some(*f),
        Value::Bool(b) => Some(*b as i64 as f64),
        _ => None,
    };
    let fallback = if outcome { (0.0, K) } else { (K, 0.0) };
    if let (Some(x), Some(y)) = (num(a), num(b)) {
        let d = (x - y).abs();
        return match op {
            CmpOp::Eq => (d, if x == y { K } else { 0.0 }),
            CmpOp::NotEq => (if x == y { K } else { 0.0 }, d),
            CmpOp::Lt => if x < y { (0.0, y - x) } else { (x - y + K, 0.0) },
            CmpOp::LtE => if x <= y { (0.0, y - x + K) } else { (x - y, 0.0) },
            CmpOp::Gt => if x > y { (0.0, x - y) } else { (y - x + K, 0.0) },
            CmpOp::GtE => if x >= y { (0.0, x - y + K) } else { (y - x, 0.0) },
            _ => fallback,
        };
    }
    if let (Value::Str(x), Value::Str(y)) = (a, b) {
        return match op {
            CmpOp::Eq => (levenshtein(x, y) as f64, if x == y { K } else { 0.0 }),
            CmpOp::NotEq => (if x == y { K } else { 0.0 }, levenshtein(x, y) as f64),
            _ => fallback,
        };
    }
    fallback
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
