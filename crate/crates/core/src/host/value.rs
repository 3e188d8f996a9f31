//! Runtime values of the host language.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use indexmap::IndexMap;

use super::ast::{ClassDef, FunctionDef, Name};
use crate::trace::UsageTrace;

pub type ListRef = Rc<RefCell<Vec<Value>>>;
pub type DictRef = Rc<RefCell<IndexMap<HashKey, (Value, Value)>>>;
pub type SetRef = Rc<RefCell<IndexMap<HashKey, Value>>>;

#[derive(Clone)]
pub enum Value {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Rc<str>),
    List(ListRef),
    Tuple(Rc<[Value]>),
    Dict(DictRef),
    Set(SetRef),
    Function(Rc<Function>),
    BoundMethod(Box<Value>, Rc<Function>),
    Builtin(Builtin),
    NativeMethod(Box<Value>, Name),
    Class(Rc<ClassObj>),
    Instance(Rc<Instance>),
    Module(Rc<ModuleObj>),
    Proxy(Rc<ProxyObj>),
}

/// Builtin functions available in every module's namespace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Len,
    IsInstance,
    IsSubclass,
    Type,
    HasAttr,
    GetAttr,
    SetAttr,
    Range,
    Abs,
    Min,
    Max,
    Sum,
    Sorted,
    Enumerate,
    Zip,
    Print,
    Repr,
    Round,
    Any,
    All,
    Reversed,
    Id,
    Callable,
    Ord,
    Chr,
}

impl Builtin {
    pub const ALL: [(&'static str, Builtin); 25] = [
        ("len", Builtin::Len),
        ("isinstance", Builtin::IsInstance),
        ("issubclass", Builtin::IsSubclass),
        ("type", Builtin::Type),
        ("hasattr", Builtin::HasAttr),
        ("getattr", Builtin::GetAttr),
        ("setattr", Builtin::SetAttr),
        ("range", Builtin::Range),
        ("abs", Builtin::Abs),
        ("min", Builtin::Min),
        ("max", Builtin::Max),
        ("sum", Builtin::Sum),
        ("sorted", Builtin::Sorted),
        ("enumerate", Builtin::Enumerate),
        ("zip", Builtin::Zip),
        ("print", Builtin::Print),
        ("repr", Builtin::Repr),
        ("round", Builtin::Round),
        ("any", Builtin::Any),
        ("all", Builtin::All),
        ("reversed", Builtin::Reversed),
        ("id", Builtin::Id),
        ("callable", Builtin::Callable),
        ("ord", Builtin::Ord),
        ("chr", Builtin::Chr),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL
            .iter()
            .find(|(_, b)| *b == self)
            .map(|(n, _)| *n)
            .expect("every builtin is listed")
    }
}

/// What a class object is backed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    /// Defined by a `class` statement.
    User,
    Object,
    Int,
    Bool,
    Float,
    Str,
    List,
    Set,
    Dict,
    Tuple,
    NoneType,
    Function,
    Module,
    Type,
    /// Builtin exception class; instances are [`Instance`]s carrying `args`.
    Exception,
    /// The class reported by `type()` for proxies.
    ObjectProxy,
}

pub struct ClassObj {
    pub name: Name,
    /// `module.Name` for user classes, the bare name for builtins.
    pub qualname: Rc<str>,
    pub module: Rc<str>,
    pub bases: Vec<Rc<ClassObj>>,
    /// Linearized strict ancestors, nearest first.
    pub mro: Vec<Rc<ClassObj>>,
    pub dict: RefCell<IndexMap<Name, Value>>,
    pub kind: ClassKind,
    pub def: Option<Rc<ClassDef>>,
}

impl ClassObj {
    /// Looks `name` up in the class and its ancestors.
    pub fn lookup(&self, name: &str) -> Option<Value> {
        if let Some(v) = self.dict.borrow().get(name) {
            return Some(v.clone());
        }
        self.mro.iter().find_map(|c| c.dict.borrow().get(name).cloned())
    }

    pub fn is_subclass_of(self: &Rc<Self>, other: &Rc<ClassObj>) -> bool {
        Rc::ptr_eq(self, other) || self.mro.iter().any(|c| Rc::ptr_eq(c, other))
    }

    /// First builtin kind found along the linearization (self included).
    pub fn base_kind(&self) -> ClassKind {
        if self.kind != ClassKind::User {
            return self.kind;
        }
        self.mro
            .iter()
            .map(|c| c.kind)
            .find(|k| *k != ClassKind::User)
            .unwrap_or(ClassKind::Object)
    }
}

impl fmt::Debug for ClassObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<class '{}'>", self.qualname)
    }
}

pub struct Instance {
    pub class: Rc<ClassObj>,
    pub attrs: RefCell<IndexMap<Name, Value>>,
}

pub struct Function {
    pub def: Rc<FunctionDef>,
    pub module: Rc<ModuleObj>,
    pub qualname: Rc<str>,
    pub defaults: Vec<Option<Value>>,
}

pub struct ModuleObj {
    pub name: Rc<str>,
    pub globals: RefCell<HashMap<Name, Value>>,
}

impl ModuleObj {
    pub fn new(name: &str) -> Self {
        ModuleObj {
            name: name.into(),
            globals: RefCell::new(HashMap::new()),
        }
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.globals.borrow().get(name).cloned()
    }
}

/// A transparent wrapper recording interactions with the wrapped value.
pub struct ProxyObj {
    pub wrapped: Value,
    /// Trace of the wrapped argument's root; element proxies share it.
    pub trace: Rc<RefCell<UsageTrace>>,
    /// Nesting level: 0 for the argument itself, 1 for its elements.
    pub depth: u8,
}

impl ProxyObj {
    pub fn with_node<R>(&self, f: impl FnOnce(&mut UsageTrace) -> R) -> R {
        let mut root = self.trace.borrow_mut();
        let mut node: &mut UsageTrace = &mut root;
        for _ in 0..self.depth {
            node = node.element.get_or_insert_with(Default::default);
        }
        f(node)
    }
}

/// Hashable projection of a value, used as dict and set key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HashKey {
    None,
    Int(i64),
    Float(u64),
    Str(Rc<str>),
    Tuple(Vec<HashKey>),
    Id(usize),
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(s.into())
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(Rc::new(RefCell::new(items)))
    }

    pub fn tuple(items: Vec<Value>) -> Value {
        Value::Tuple(items.into())
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Value::None)
    }

    /// The underlying value with every proxy layer removed, without
    /// recording anything.
    pub fn peel(&self) -> &Value {
        let mut v = self;
        while let Value::Proxy(p) = v {
            v = &p.wrapped;
        }
        v
    }

    /// Identity for `is`; values without identity compare by content.
    pub fn identical(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::None, Value::None) => true,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Str(a), Value::Str(b)) => Rc::ptr_eq(a, b) || a == b,
            (Value::List(a), Value::List(b)) => Rc::ptr_eq(a, b),
            (Value::Dict(a), Value::Dict(b)) => Rc::ptr_eq(a, b),
            (Value::Set(a), Value::Set(b)) => Rc::ptr_eq(a, b),
            (Value::Tuple(a), Value::Tuple(b)) => Rc::ptr_eq(a, b),
            (Value::Class(a), Value::Class(b)) => Rc::ptr_eq(a, b),
            (Value::Instance(a), Value::Instance(b)) => Rc::ptr_eq(a, b),
            (Value::Function(a), Value::Function(b)) => Rc::ptr_eq(a, b),
            (Value::Module(a), Value::Module(b)) => Rc::ptr_eq(a, b),
            (Value::Proxy(a), Value::Proxy(b)) => Rc::ptr_eq(a, b),
            (Value::Builtin(a), Value::Builtin(b)) => a == b,
            _ => false,
        }
    }

    /// Address-like identity for hashing and `id()`.
    pub fn address(&self) -> usize {
        match self {
            Value::List(r) => Rc::as_ptr(r) as *const u8 as usize,
            Value::Dict(r) => Rc::as_ptr(r) as *const u8 as usize,
            Value::Set(r) => Rc::as_ptr(r) as *const u8 as usize,
            Value::Tuple(r) => Rc::as_ptr(r) as *const u8 as usize,
            Value::Class(r) => Rc::as_ptr(r) as *const u8 as usize,
            Value::Instance(r) => Rc::as_ptr(r) as *const u8 as usize,
            Value::Function(r) => Rc::as_ptr(r) as *const u8 as usize,
            Value::Module(r) => Rc::as_ptr(r) as *const u8 as usize,
            Value::Proxy(r) => Rc::as_ptr(r) as *const u8 as usize,
            Value::Str(s) => s.as_ptr() as usize,
            Value::Int(i) => *i as usize,
            Value::Bool(b) => *b as usize,
            Value::Float(f) => f.to_bits() as usize,
            Value::None => 0,
            Value::Builtin(b) => *b as usize + 1,
            Value::BoundMethod(..) | Value::NativeMethod(..) => 1,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::None => write!(f, "None"),
            Value::Bool(b) => write!(f, "{}", if *b { "True" } else { "False" }),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{}", format_float(*x)),
            Value::Str(s) => write!(f, "{}", quote_str(s)),
            Value::List(l) => {
                write!(f, "[")?;
                for (i, v) in l.borrow().iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v:?}")?;
                }
                write!(f, "]")
            }
            Value::Tuple(t) => {
                write!(f, "(")?;
                for (i, v) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v:?}")?;
                }
                if t.len() == 1 {
                    write!(f, ",")?;
                }
                write!(f, ")")
            }
            Value::Dict(d) => {
                write!(f, "{{")?;
                for (i, (k, v)) in d.borrow().values().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k:?}: {v:?}")?;
                }
                write!(f, "}}")
            }
            Value::Set(s) => {
                if s.borrow().is_empty() {
                    return write!(f, "set()");
                }
                write!(f, "{{")?;
                for (i, v) in s.borrow().values().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v:?}")?;
                }
                write!(f, "}}")
            }
            Value::Function(func) => write!(f, "<function {}>", func.qualname),
            Value::BoundMethod(_, func) => write!(f, "<bound method {}>", func.qualname),
            Value::Builtin(b) => write!(f, "<built-in function {}>", b.name()),
            Value::NativeMethod(_, n) => write!(f, "<built-in method {n}>"),
            Value::Class(c) => write!(f, "{c:?}"),
            Value::Instance(i) => write!(f, "<{} object>", i.class.qualname),
            Value::Module(m) => write!(f, "<module '{}'>", m.name),
            Value::Proxy(p) => write!(f, "{:?}", p.wrapped),
        }
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == x.trunc() && x.abs() < 1e16 {
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}

pub fn quote_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\x{:02x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}
