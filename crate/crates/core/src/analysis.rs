//! Subject analysis: callables, the class hierarchy and the attribute map.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::host::ast::{self, Const, Expr, Module, StmtKind, Target};
use crate::host::{native_attributes, Builtins, ClassKind, ClassObj, Interp, Loader, ModuleObj, TypeMap, Value};
use crate::trace::UsageTrace;
use crate::types::{ClassHierarchy, ClassId, CollectionKind, GradualType, CORE_BUILTINS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CallableKind {
    Function,
    Method,
    Constructor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamInfo {
    pub name: String,
    pub declared: GradualType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallableInfo {
    pub kind: CallableKind,
    /// `module.f`, `module.C.m`, or `module.C` for constructors.
    pub qualified_name: String,
    /// Name inside the module: `f`, `C.m`, or `C.__init__`.
    pub local_name: String,
    pub module: String,
    /// Attribute used to reach the callable (function, method or class name).
    pub name: String,
    pub owner: Option<ClassId>,
    /// Parameters without `self`.
    pub params: Vec<ParamInfo>,
    pub declared_return: GradualType,
    pub line: u32,
    pub col: u32,
    pub in_subject: bool,
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("cannot import `{module}`: {message}")]
    ImportFailure { module: String, message: String },
}

/// Static model of the subject, enriched at run time with traces and
/// return observations.
#[derive(Debug, Clone)]
pub struct TestCluster {
    pub subject: String,
    pub hierarchy: ClassHierarchy,
    pub callables: Vec<CallableInfo>,
    pub attribute_map: BTreeMap<String, BTreeSet<ClassId>>,
    /// Keyed by (callable index, parameter index).
    pub traces: IndexMap<(usize, usize), UsageTrace>,
    pub recorded_returns: IndexMap<usize, GradualType>,
    pub constructors: HashMap<ClassId, usize>,
    pub literals: Vec<Const>,
    pub warnings: Vec<String>,
    pub type_map: Rc<TypeMap>,
}

impl TestCluster {
    /// An empty cluster over `hierarchy`, used for synthetic class universes.
    pub fn from_hierarchy(hierarchy: ClassHierarchy) -> Self {
        let mut cluster = TestCluster {
            subject: String::new(),
            hierarchy,
            callables: Vec::new(),
            attribute_map: BTreeMap::new(),
            traces: IndexMap::new(),
            recorded_returns: IndexMap::new(),
            constructors: HashMap::new(),
            literals: Vec::new(),
            warnings: Vec::new(),
            type_map: Rc::new(TypeMap::default()),
        };
        cluster.rebuild_attribute_map();
        cluster
    }

    /// Maps every attribute to the topmost classes declaring it.
    pub fn rebuild_attribute_map(&mut self) {
        self.attribute_map = attribute_map(&self.hierarchy);
    }

    pub fn subject_callables(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.callables.len()).filter(|i| self.callables[*i].in_subject)
    }

    /// Classes whose attribute closure contains every name in `required`.
    pub fn classes_with_attributes(&self, required: &BTreeSet<String>) -> BTreeSet<ClassId> {
        let mut result: Option<BTreeSet<ClassId>> = None;
        for attr in required {
            let Some(roots) = self.attribute_map.get(attr) else {
                return BTreeSet::new();
            };
            let providers: BTreeSet<ClassId> = roots
                .iter()
                .flat_map(|r| self.hierarchy.descendants_or_self(*r))
                .collect();
            result = Some(match result {
                None => providers,
                Some(prev) => prev.intersection(&providers).copied().collect(),
            });
        }
        result.unwrap_or_else(|| self.hierarchy.ids().collect())
    }
}

/// The attribute map of `hierarchy`: attribute name to the declaring classes
/// none of whose strict ancestors declare it.
pub fn attribute_map(hierarchy: &ClassHierarchy) -> BTreeMap<String, BTreeSet<ClassId>> {
    let mut map: BTreeMap<String, BTreeSet<ClassId>> = BTreeMap::new();
    for class in hierarchy.classes() {
        for attr in &class.declared_attributes {
            let inherited = hierarchy
                .ancestors(class.id)
                .iter()
                .any(|a| hierarchy.class(*a).declared_attributes.contains(attr));
            if !inherited {
                map.entry(attr.clone()).or_default().insert(class.id);
            }
        }
    }
    map
}

/// Modules imported by `module` at top level, resolved to absolute names.
pub fn imported_modules(module: &Module) -> Vec<String> {
    let mut out = Vec::new();
    for stmt in &module.body {
        let name = match &stmt.kind {
            StmtKind::Import { module, .. } => module.clone(),
            StmtKind::ImportFrom { module: m, .. } => resolve_relative(&module.name, m),
            _ => continue,
        };
        if !out.contains(&name) {
            out.push(name);
        }
    }
    out
}

fn resolve_relative(current: &str, module: &str) -> String {
    let dots = module.chars().take_while(|c| *c == '.').count();
    if dots == 0 {
        return module.to_string();
    }
    let mut parts: Vec<&str> = current.split('.').collect();
    for _ in 0..dots.min(parts.len()) {
        parts.pop();
    }
    let rest = &module[dots..];
    if !rest.is_empty() {
        parts.push(rest);
    }
    parts.join(".")
}

const HOST_MODULES: [&str; 3] = ["os", "typing", "__future__"];

/// Analyses `subject` (already registered with or loadable by `loader`) and
/// the modules it imports, up to `dependency_depth` levels.
pub fn build_cluster(
    loader: &Rc<Loader>,
    subject: &str,
    dependency_depth: usize,
) -> Result<TestCluster, AnalysisError> {
    let import_failure = |message: String| AnalysisError::ImportFailure {
        module: subject.to_string(),
        message,
    };
    let subject_ast = loader.load(subject).map_err(import_failure)?;

    // modules in scope, breadth first
    let mut warnings = Vec::new();
    let mut scope: Vec<Rc<Module>> = vec![subject_ast.clone()];
    let mut frontier = vec![subject_ast.clone()];
    for _ in 0..dependency_depth {
        let mut next = Vec::new();
        for m in &frontier {
            for dep in imported_modules(m) {
                if HOST_MODULES.contains(&dep.as_str()) || scope.iter().any(|s| s.name == dep) {
                    continue;
                }
                match loader.load(&dep) {
                    Ok(ast) => {
                        scope.push(ast.clone());
                        next.push(ast);
                    }
                    Err(e) => warnings.push(format!("skipped dependency `{dep}`: {e}")),
                }
            }
        }
        frontier = next;
    }

    let builtins = Rc::new(Builtins::new());
    let mut interp = Interp::new(builtins.clone(), loader.clone(), Rc::new(TypeMap::default()));
    interp
        .import_module(subject)
        .map_err(|e| import_failure(describe(&interp, e)))?;
    let mut runtime: Vec<Rc<ModuleObj>> = Vec::new();
    for m in &scope {
        match interp.import_module(&m.name) {
            Ok(obj) => runtime.push(obj),
            Err(e) if m.name == subject => return Err(import_failure(describe(&interp, e))),
            Err(e) => {
                warnings.push(format!("skipped dependency `{}`: {}", m.name, describe(&interp, e)));
                runtime.push(Rc::new(ModuleObj::new(&m.name)));
            }
        }
    }

    let mut b = ClusterBuilder {
        hierarchy: ClassHierarchy::new(),
        type_map: TypeMap::default(),
        builtins,
    };
    for (i, (name, _)) in CORE_BUILTINS.iter().enumerate() {
        b.type_map.by_name.insert(name.to_string(), ClassId(i as u32));
    }
    b.set_builtin_attributes();

    // classes of every module in scope, in definition order
    type ClassEntry = (Rc<ast::ClassDef>, Rc<ClassObj>, ClassId);
    let mut module_classes: Vec<Vec<ClassEntry>> = Vec::new();
    for (ast, obj) in scope.iter().zip(&runtime) {
        let mut classes = Vec::new();
        for stmt in &ast.body {
            if let StmtKind::ClassDef(def) = &stmt.kind {
                if let Some(Value::Class(c)) = obj.get(&def.name) {
                    if &*c.module == ast.name.as_str() {
                        let id = b.register(&c);
                        classes.push((def.clone(), c, id));
                    }
                }
            }
        }
        module_classes.push(classes);
    }

    let mut callables = Vec::new();
    for ((ast, obj), classes) in scope.iter().zip(&runtime).zip(&module_classes) {
        let in_subject = ast.name == subject;
        for stmt in &ast.body {
            match &stmt.kind {
                StmtKind::FunctionDef(def) if is_public(&def.name) => {
                    callables.push(CallableInfo {
                        kind: CallableKind::Function,
                        qualified_name: format!("{}.{}", ast.name, def.name),
                        local_name: def.name.to_string(),
                        module: ast.name.clone(),
                        name: def.name.to_string(),
                        owner: None,
                        params: b.params(def, obj, 0),
                        declared_return: b.resolve_opt(def.returns.as_ref(), obj),
                        line: def.line,
                        col: def.col,
                        in_subject,
                    });
                }
                StmtKind::ClassDef(def) if is_public(&def.name) => {
                    let Some((_, class, id)) = classes.iter().find(|(d, _, _)| Rc::ptr_eq(d, def)) else {
                        continue;
                    };
                    let (params, line, col) = match class.lookup("__init__") {
                        Some(Value::Function(init)) => {
                            (b.params(&init.def, &init.module, 1), init.def.line, init.def.col)
                        }
                        _ => (Vec::new(), def.line, def.col),
                    };
                    callables.push(CallableInfo {
                        kind: CallableKind::Constructor,
                        qualified_name: format!("{}.{}", ast.name, def.name),
                        local_name: format!("{}.__init__", def.name),
                        module: ast.name.clone(),
                        name: def.name.to_string(),
                        owner: Some(*id),
                        params,
                        declared_return: GradualType::None,
                        line,
                        col,
                        in_subject,
                    });
                    for member in &def.body {
                        let StmtKind::FunctionDef(m) = &member.kind else { continue };
                        if !is_public(&m.name) {
                            continue;
                        }
                        callables.push(CallableInfo {
                            kind: CallableKind::Method,
                            qualified_name: format!("{}.{}.{}", ast.name, def.name, m.name),
                            local_name: format!("{}.{}", def.name, m.name),
                            module: ast.name.clone(),
                            name: m.name.to_string(),
                            owner: Some(*id),
                            params: b.params(m, obj, 1),
                            declared_return: b.resolve_opt(m.returns.as_ref(), obj),
                            line: m.line,
                            col: m.col,
                            in_subject,
                        });
                    }
                }
                _ => {}
            }
        }
    }

    let mut constructors = HashMap::new();
    for (i, c) in callables.iter().enumerate() {
        if c.kind == CallableKind::Constructor {
            constructors.insert(c.owner.expect("constructors have owners"), i);
        }
    }

    let mut cluster = TestCluster {
        subject: subject.to_string(),
        hierarchy: b.hierarchy,
        callables,
        attribute_map: BTreeMap::new(),
        traces: IndexMap::new(),
        recorded_returns: IndexMap::new(),
        constructors,
        literals: subject_ast.literals(),
        warnings,
        type_map: Rc::new(b.type_map),
    };
    cluster.rebuild_attribute_map();
    for w in &cluster.warnings {
        log::warn!("{w}");
    }
    Ok(cluster)
}

fn describe(interp: &Interp, e: crate::host::Unwind) -> String {
    match e {
        crate::host::Unwind::Raise(v) => {
            format!("{}: {}", interp.exception_name(&v), interp.exception_message(&v))
        }
        crate::host::Unwind::Timeout => "timed out".to_string(),
    }
}

fn is_public(name: &str) -> bool {
    !name.starts_with('_')
}

struct ClusterBuilder {
    hierarchy: ClassHierarchy,
    type_map: TypeMap,
    builtins: Rc<Builtins>,
}

impl ClusterBuilder {
    fn set_builtin_attributes(&mut self) {
        let kinds = [
            ClassKind::Object,
            ClassKind::Int,
            ClassKind::Bool,
            ClassKind::Float,
            ClassKind::Str,
            ClassKind::List,
            ClassKind::Set,
            ClassKind::Dict,
            ClassKind::Tuple,
        ];
        for (i, kind) in kinds.into_iter().enumerate() {
            let id = ClassId(i as u32);
            let attrs = self.own_attributes(id, native_attributes(kind).iter().map(|s| s.to_string()));
            self.hierarchy.set_attributes(id, attrs);
        }
    }

    /// `attrs` minus those an ancestor already declares.
    fn own_attributes(&self, id: ClassId, attrs: impl Iterator<Item = String>) -> BTreeSet<String> {
        let inherited: BTreeSet<&str> = self
            .hierarchy
            .ancestors(id)
            .iter()
            .flat_map(|a| self.hierarchy.class(*a).declared_attributes.iter().map(String::as_str))
            .collect();
        attrs.filter(|a| !inherited.contains(a.as_str())).collect()
    }

    fn register(&mut self, class: &Rc<ClassObj>) -> ClassId {
        if let Some(id) = self.type_map.by_name.get(&*class.qualname) {
            return *id;
        }
        let bases: Vec<ClassId> = class.bases.iter().map(|b| self.register(b)).collect();
        let attrs: BTreeSet<String> = match class.kind {
            ClassKind::User => {
                let mut attrs: BTreeSet<String> = class.dict.borrow().keys().map(|k| k.to_string()).collect();
                if let Some(Value::Function(init)) = class.dict.borrow().get("__init__") {
                    collect_self_assignments(&init.def.body, &mut attrs);
                }
                attrs
            }
            kind => native_attributes(kind).iter().map(|s| s.to_string()).collect(),
        };
        let builtin = class.kind != ClassKind::User;
        let id = self
            .hierarchy
            .add_class(&class.qualname, bases, BTreeSet::new(), builtin)
            .expect("class names are unique and bases registered first");
        let own = self.own_attributes(id, attrs.into_iter());
        self.hierarchy.set_attributes(id, own);
        self.type_map.by_name.insert(class.qualname.to_string(), id);
        id
    }

    fn params(&mut self, def: &ast::FunctionDef, module: &ModuleObj, skip: usize) -> Vec<ParamInfo> {
        def.params
            .iter()
            .skip(skip)
            .map(|p| ParamInfo {
                name: p.name.to_string(),
                declared: self.resolve_opt(p.annotation.as_ref(), module),
            })
            .collect()
    }

    fn resolve_opt(&mut self, e: Option<&Expr>, module: &ModuleObj) -> GradualType {
        match e {
            Some(e) => {
                let t = self.resolve(e, module, 0);
                self.hierarchy.unify(&t)
            }
            None => GradualType::Any,
        }
    }

    /// Interprets an annotation expression against the module's globals.
    fn resolve(&mut self, e: &Expr, module: &ModuleObj, depth: u32) -> GradualType {
        if depth > 8 {
            return GradualType::Any;
        }
        match e {
            Expr::Const(Const::None) => GradualType::None,
            Expr::Const(Const::Str(s)) => match crate::host::parse_expression(s) {
                Ok(inner) => self.resolve(&inner, module, depth + 1),
                Err(_) => GradualType::Any,
            },
            Expr::Name(n) => self.resolve_name(n, module),
            Expr::Attribute(base, attr) => match &**base {
                Expr::Name(m) if &**m == "typing" => self.resolve_name(attr, &ModuleObj::new("typing")),
                Expr::Name(m) => match module.get(m) {
                    Some(Value::Module(inner)) => self.resolve_name(attr, &inner),
                    _ => GradualType::Any,
                },
                _ => GradualType::Any,
            },
            Expr::BinOp(ast::BinOp::BitOr, a, b) => GradualType::Union(vec![
                self.resolve(a, module, depth + 1),
                self.resolve(b, module, depth + 1),
            ]),
            Expr::Subscript(head, index) => {
                let args: Vec<GradualType> = match &**index {
                    Expr::Tuple(items) => items.iter().map(|a| self.resolve(a, module, depth + 1)).collect(),
                    single => vec![self.resolve(single, module, depth + 1)],
                };
                let head_name = match &**head {
                    Expr::Name(n) => n.to_string(),
                    Expr::Attribute(_, n) => n.to_string(),
                    _ => return GradualType::Any,
                };
                match head_name.as_str() {
                    "Optional" => GradualType::Union(vec![args[0].clone(), GradualType::None]),
                    "Union" => GradualType::Union(args),
                    "Tuple" | "tuple" => {
                        if let Expr::Tuple(items) = &**index {
                            if items.len() == 2 && matches!(&items[1], Expr::Const(Const::Str(s)) if &**s == "...") {
                                return GradualType::tuple_of(args[0].clone());
                            }
                        }
                        GradualType::Tuple(args)
                    }
                    _ => match self.resolve(head, module, depth + 1) {
                        GradualType::Collection(kind, _) => GradualType::Generic(kind.class(), args),
                        GradualType::Instance(c) => GradualType::Generic(c, args),
                        _ => GradualType::Any,
                    },
                }
            }
            _ => GradualType::Any,
        }
    }

    fn resolve_name(&mut self, name: &str, module: &ModuleObj) -> GradualType {
        match name {
            "None" => return GradualType::None,
            "Any" => return GradualType::Any,
            "List" => return GradualType::bare(CollectionKind::List),
            "Dict" => return GradualType::bare(CollectionKind::Dict),
            "Set" => return GradualType::bare(CollectionKind::Set),
            "Tuple" => return GradualType::bare(CollectionKind::TupleVariadic),
            _ => {}
        }
        let class = match module.get(name) {
            Some(Value::Class(c)) => Some(c),
            Some(_) => None,
            None => self.builtins.class_named(name),
        };
        match class {
            Some(c) if c.kind == ClassKind::NoneType => GradualType::None,
            Some(c) => match self.lookup_class(&c) {
                Some(id) => GradualType::Instance(id),
                None => GradualType::Any,
            },
            None => GradualType::Any,
        }
    }

    fn lookup_class(&mut self, c: &Rc<ClassObj>) -> Option<ClassId> {
        match c.kind {
            ClassKind::User | ClassKind::Exception => Some(self.register(c)),
            _ => self.type_map.by_name.get(&*c.qualname).copied(),
        }
    }
}

fn collect_self_assignments(body: &[ast::Stmt], out: &mut BTreeSet<String>) {
    fn target(t: &Target, out: &mut BTreeSet<String>) {
        match t {
            Target::Attribute(Expr::Name(n), attr) if &**n == "self" => {
                out.insert(attr.to_string());
            }
            Target::Tuple(items) => items.iter().for_each(|t| target(t, out)),
            _ => {}
        }
    }
    for stmt in body {
        match &stmt.kind {
            StmtKind::Assign(t, _) | StmtKind::AugAssign(t, _, _) => target(t, out),
            StmtKind::If { body, orelse, .. } => {
                collect_self_assignments(body, out);
                collect_self_assignments(orelse, out);
            }
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => collect_self_assignments(body, out),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::host::parse_module;
    use proptest::prelude::*;

    fn cluster(src: &str) -> TestCluster {
        let loader = Rc::new(Loader::new("/nonexistent", false));
        loader.insert(parse_module("m", src).expect("parses"));
        build_cluster(&loader, "m", 1).expect("builds")
    }

    fn attrs(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn shared_attribute_maps_to_topmost_declarer() {
        let c = cluster(
            "class B:\n    def __init__(self):\n        self.x = 1\n        self.y = 2\n\
             class A(B):\n    def __init__(self):\n        self.x = 3\n        self.z = 4\n",
        );
        let a = c.hierarchy.lookup("m.A").unwrap();
        let b = c.hierarchy.lookup("m.B").unwrap();
        assert_eq!(c.attribute_map["x"], BTreeSet::from([b]));
        assert_eq!(c.attribute_map["y"], BTreeSet::from([b]));
        assert_eq!(c.attribute_map["z"], BTreeSet::from([a]));
        assert_eq!(c.classes_with_attributes(&attrs(&["x", "z"])), BTreeSet::from([a]));
        assert_eq!(c.classes_with_attributes(&attrs(&["x"])), BTreeSet::from([b, a]));
        assert_eq!(c.classes_with_attributes(&attrs(&[])).len(), c.hierarchy.len());
        assert!(c.classes_with_attributes(&attrs(&["nope"])).is_empty());
    }

    #[test]
    fn unannotated_function_has_any_parameter() {
        let c = cluster("def f(a):\n    return a\n");
        assert_eq!(c.callables.len(), 1);
        assert_eq!(c.callables[0].kind, CallableKind::Function);
        assert_eq!(c.callables[0].params[0].declared, GradualType::Any);
        assert_eq!(c.callables[0].declared_return, GradualType::Any);
    }

    #[test]
    fn annotations_resolve() {
        let src = "\
from typing import Optional, List, Dict
class Node:
    pass
def f(a: int, b: Optional[str], c: List[Node], d: Dict[str, int], e: 'Node', g: int | None) -> tuple[int, str]:
    return 1, 'x'
";
        let c = cluster(src);
        let h = &c.hierarchy;
        let rendered: Vec<String> = c.callables[1].params.iter().map(|p| h.render(&p.declared)).collect();
        assert_eq!(rendered, ["int", "none | str", "list[m.Node]", "dict[str, int]", "m.Node", "int | none"]);
        assert_eq!(h.render(&c.callables[1].declared_return), "tuple[int, str]");
    }

    #[test]
    fn class_members_become_callables() {
        let src = "\
class A:
    k = 3
    def __init__(self, v):
        self.v = v
    def get(self):
        return self.v
    def _hidden(self):
        pass
class _Private:
    pass
";
        let c = cluster(src);
        let names: Vec<&str> = c.callables.iter().map(|c| c.local_name.as_str()).collect();
        assert_eq!(names, ["A.__init__", "A.get"]);
        assert_eq!(c.callables[0].params.len(), 1);
        let a = c.hierarchy.lookup("m.A").unwrap();
        let declared = &c.hierarchy.class(a).declared_attributes;
        for n in ["k", "v", "get", "_hidden"] {
            assert!(declared.contains(n), "{n}");
        }
        assert_eq!(c.constructors[&a], 0);
    }

    #[test]
    fn builtin_attributes_are_minimal() {
        let c = cluster("def f(a):\n    return a\n");
        assert!(c.attribute_map["bit_length"].contains(&ClassId::INT));
        assert!(!c.attribute_map["bit_length"].contains(&ClassId::BOOL));
        assert_eq!(c.attribute_map["__eq__"], BTreeSet::from([ClassId::OBJECT]));
        let with_endswith = c.classes_with_attributes(&attrs(&["endswith"]));
        assert_eq!(with_endswith, BTreeSet::from([ClassId::STR]));
    }

    #[test]
    fn dependencies_are_followed_one_level() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.py"), "import b\ndef f(x):\n    return b.g(x)\n").unwrap();
        std::fs::write(dir.path().join("b.py"), "import c\ndef g(x):\n    return c.h(x)\n").unwrap();
        std::fs::write(dir.path().join("c.py"), "def h(x):\n    return x\n").unwrap();
        let loader = Rc::new(Loader::new(dir.path(), false));
        let cl = build_cluster(&loader, "a", 1).unwrap();
        let names: Vec<&str> = cl.callables.iter().map(|c| c.qualified_name.as_str()).collect();
        assert_eq!(names, ["a.f", "b.g"]);
        assert!(cl.callables[0].in_subject && !cl.callables[1].in_subject);
        let cl = build_cluster(&loader, "a", 0).unwrap();
        assert_eq!(cl.callables.len(), 1);
    }

    #[test]
    fn broken_dependency_is_a_warning_and_broken_subject_an_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.py"), "def f(x):\n    import broken\n    return x\n").unwrap();
        std::fs::write(dir.path().join("bad.py"), "def f(:\n").unwrap();
        std::fs::write(dir.path().join("broken.py"), "def g(:\n").unwrap();
        let loader = Rc::new(Loader::new(dir.path(), false));
        assert!(build_cluster(&loader, "bad", 1).is_err());
        assert!(build_cluster(&loader, "missing", 1).is_err());
        let cl = build_cluster(&loader, "a", 1).unwrap();
        assert_eq!(cl.callables.len(), 1);
    }

    /// Random hierarchy: each class picks up to two earlier bases and a few
    /// attributes from a small alphabet.
    fn arb_hierarchy(max: usize) -> impl Strategy<Value = ClassHierarchy> {
        prop::collection::vec(
            (prop::collection::vec(any::<prop::sample::Index>(), 0..3), prop::collection::btree_set(0u8..6, 0..4)),
            1..=max,
        )
        .prop_map(|specs| {
            let mut h = ClassHierarchy::new();
            let first = h.len();
            for (i, (bases, attrs)) in specs.into_iter().enumerate() {
                let mut ids: Vec<ClassId> = Vec::new();
                if i > 0 {
                    for b in bases {
                        let id = ClassId((first + b.index(i)) as u32);
                        if !ids.contains(&id) {
                            ids.push(id);
                        }
                    }
                }
                let attrs = attrs.into_iter().map(|a| format!("a{a}")).collect();
                h.add_class(&format!("C{i}"), ids, attrs, false).unwrap();
            }
            h
        })
    }

    fn closure_oracle(h: &ClassHierarchy, c: ClassId) -> BTreeSet<String> {
        // walk superclass edges explicitly instead of using the cached ancestors
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

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn attribute_map_is_minimal_and_lookup_matches_oracle(
            h in arb_hierarchy(8),
            required in prop::collection::btree_set(0u8..6, 0..3),
        ) {
            let c = TestCluster::from_hierarchy(h);
            for (attr, roots) in &c.attribute_map {
                for r in roots {
                    prop_assert!(c.hierarchy.class(*r).declared_attributes.contains(attr));
                    for a in c.hierarchy.ancestors(*r) {
                        prop_assert!(!c.hierarchy.class(*a).declared_attributes.contains(attr));
                    }
                }
            }
            let required: BTreeSet<String> = required.into_iter().map(|a| format!("a{a}")).collect();
            let expected: BTreeSet<ClassId> = c
                .hierarchy
                .ids()
                .filter(|id| closure_oracle(&c.hierarchy, *id).is_superset(&required))
                .collect();
            prop_assert_eq!(c.classes_with_attributes(&required), expected);
        }

        #[test]
        fn classes_with_attributes_is_monotone(
            h in arb_hierarchy(8),
            small in prop::collection::btree_set(0u8..6, 0..3),
            extra in prop::collection::btree_set(0u8..6, 0..3),
        ) {
            let c = TestCluster::from_hierarchy(h);
            let r1: BTreeSet<String> = small.iter().map(|a| format!("a{a}")).collect();
            let mut r2 = r1.clone();
            r2.extend(extra.iter().map(|a| format!("a{a}")));
            let s1 = c.classes_with_attributes(&r1);
            let s2 = c.classes_with_attributes(&r2);
            prop_assert!(s2.is_subset(&s1));
        }
    }
}
