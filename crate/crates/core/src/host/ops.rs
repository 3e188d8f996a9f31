//! Attribute access, subscripts, operators, truthiness and iteration.
//!
//! Every operation on a proxy records into its trace before it is
//! forwarded to the wrapped value.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::rc::Rc;

use indexmap::IndexMap;

use super::ast::{BinOp, CmpOp, UnaryOp};
use super::builtins::native_attributes;
use super::interp::{Exec, Interp, MAX_SEQUENCE};
use super::value::*;

impl Interp {
    /// The user-defined method `name` of an instance's class, if any.
    pub(crate) fn user_method(&self, v: &Value, name: &str) -> Option<Rc<Function>> {
        match v {
            Value::Instance(i) => match i.class.lookup(name) {
                Some(Value::Function(f)) => Some(f),
                _ => None,
            },
            _ => None,
        }
    }

    fn call_user(&mut self, f: &Rc<Function>, recv: &Value, args: Vec<Value>) -> Exec<Value> {
        let mut full = Vec::with_capacity(args.len() + 1);
        full.push(recv.clone());
        full.extend(args);
        self.call_function(f, full)
    }

    /// Wraps `item` as an element proxy of `parent` when nesting allows.
    fn child(&self, parent: &ProxyObj, item: Value) -> Value {
        if parent.depth < self.max_proxy_depth {
            Value::Proxy(Rc::new(ProxyObj {
                wrapped: item,
                trace: parent.trace.clone(),
                depth: parent.depth + 1,
            }))
        } else {
            item
        }
    }

    fn record(&self, p: &ProxyObj, method: &str, operand: Option<&Value>) {
        let t = operand.map(|o| self.type_of(o));
        p.with_node(|n| n.record_method(method, t));
    }

    // ----- attributes -----

    pub fn get_attr(&mut self, v: &Value, name: &str) -> Exec<Value> {
        if name == "__class__" {
            return Ok(match v {
                Value::Proxy(p) => Value::Class(self.class_of(&p.wrapped)),
                other => Value::Class(self.class_of(other)),
            });
        }
        match v {
            Value::Proxy(p) => {
                p.with_node(|n| n.record_attribute(name));
                self.get_attr(&p.wrapped, name)
            }
            Value::Instance(i) => {
                if let Some(a) = i.attrs.borrow().get(name) {
                    return Ok(a.clone());
                }
                match i.class.lookup(name) {
                    Some(Value::Function(f)) => Ok(Value::BoundMethod(Box::new(v.clone()), f)),
                    Some(other) => Ok(other),
                    None if name == "__dict__" => {
                        let pairs: Vec<(Value, Value)> = i
                            .attrs
                            .borrow()
                            .iter()
                            .map(|(k, v)| (Value::Str(k.clone()), v.clone()))
                            .collect();
                        self.make_dict(pairs)
                    }
                    None => self.err(
                        "AttributeError",
                        format!("'{}' object has no attribute '{name}'", i.class.name),
                    ),
                }
            }
            Value::Class(c) => match name {
                "__name__" => Ok(Value::Str(c.name.clone())),
                "__qualname__" => Ok(Value::Str(c.name.clone())),
                "__module__" => Ok(Value::Str(c.module.clone())),
                "__mro__" => {
                    let mut items = vec![Value::Class(c.clone())];
                    items.extend(c.mro.iter().cloned().map(Value::Class));
                    Ok(Value::tuple(items))
                }
                "__bases__" => Ok(Value::tuple(c.bases.iter().cloned().map(Value::Class).collect())),
                _ => match c.lookup(name) {
                    Some(v) => Ok(v),
                    None => self.err(
                        "AttributeError",
                        format!("type object '{}' has no attribute '{name}'", c.name),
                    ),
                },
            },
            Value::Module(m) => match m.get(name) {
                Some(v) => Ok(v),
                None => {
                    let sub = format!("{}.{name}", m.name);
                    if let Some(sm) = self.modules.get(&sub) {
                        return Ok(Value::Module(sm.clone()));
                    }
                    self.err("AttributeError", format!("module '{}' has no attribute '{name}'", m.name))
                }
            },
            Value::Function(f) => match name {
                "__name__" => Ok(Value::Str(f.def.name.clone())),
                "__qualname__" => Ok(Value::str(&f.qualname)),
                "__module__" => Ok(Value::Str(f.module.name.clone())),
                _ => self.err("AttributeError", format!("'function' object has no attribute '{name}'")),
            },
            Value::Int(i) => match name {
                "real" | "numerator" => Ok(Value::Int(*i)),
                "imag" => Ok(Value::Int(0)),
                "denominator" => Ok(Value::Int(1)),
                _ => self.native_attr(v, name),
            },
            Value::Bool(b) => match name {
                "real" | "numerator" => Ok(Value::Int(*b as i64)),
                "imag" => Ok(Value::Int(0)),
                "denominator" => Ok(Value::Int(1)),
                _ => self.native_attr(v, name),
            },
            Value::Float(x) => match name {
                "real" => Ok(Value::Float(*x)),
                "imag" => Ok(Value::Float(0.0)),
                _ => self.native_attr(v, name),
            },
            _ => self.native_attr(v, name),
        }
    }

    fn native_attr(&mut self, v: &Value, name: &str) -> Exec<Value> {
        let cls = self.class_of(v);
        let mut kinds = vec![cls.kind];
        kinds.extend(cls.mro.iter().map(|c| c.kind));
        if kinds.iter().any(|k| native_attributes(*k).contains(&name)) {
            return Ok(Value::NativeMethod(Box::new(v.clone()), name.into()));
        }
        self.err("AttributeError", format!("'{}' object has no attribute '{name}'", cls.name))
    }

    pub fn set_attr(&mut self, v: &Value, name: &str, value: Value) -> Exec<()> {
        match v {
            Value::Proxy(p) => {
                p.with_node(|n| {
                    n.record_attribute(name);
                    n.record_method("__setattr__", None);
                });
                self.set_attr(&p.wrapped, name, value)
            }
            Value::Instance(i) => {
                if let Some(f) = self.user_method(v, "__setattr__") {
                    self.call_user(&f, v, vec![Value::str(name), value])?;
                    return Ok(());
                }
                i.attrs.borrow_mut().insert(name.into(), value);
                Ok(())
            }
            Value::Class(c) if c.kind == ClassKind::User => {
                c.dict.borrow_mut().insert(name.into(), value);
                Ok(())
            }
            Value::Module(m) => {
                m.globals.borrow_mut().insert(name.into(), value);
                Ok(())
            }
            other => self.err(
                "AttributeError",
                format!("'{}' object has no attribute '{name}'", self.type_name(other)),
            ),
        }
    }

    // ----- subscripts -----

    fn index_of(&mut self, k: &Value, len: usize, what: &str) -> Exec<usize> {
        let i = match k {
            Value::Int(i) => *i,
            Value::Bool(b) => *b as i64,
            Value::Proxy(p) => {
                self.record(p, "__index__", None);
                return self.index_of(&p.wrapped.clone(), len, what);
            }
            other => {
                return self.err(
                    "TypeError",
                    format!("{what} indices must be integers or slices, not {}", self.type_name(other)),
                )
            }
        };
        let n = len as i64;
        let j = if i < 0 { i + n } else { i };
        if j < 0 || j >= n {
            return self.err("IndexError", format!("{what} index out of range"));
        }
        Ok(j as usize)
    }

    pub fn get_item(&mut self, o: &Value, k: &Value) -> Exec<Value> {
        match o {
            Value::Proxy(p) => {
                self.record(p, "__getitem__", Some(k));
                let r = self.get_item(&p.wrapped, k)?;
                Ok(match p.wrapped.peel() {
                    Value::List(_) | Value::Tuple(_) | Value::Dict(_) => self.child(p, r),
                    _ => r,
                })
            }
            Value::List(l) => {
                let len = l.borrow().len();
                let i = self.index_of(k, len, "list")?;
                Ok(l.borrow()[i].clone())
            }
            Value::Tuple(t) => {
                let i = self.index_of(k, t.len(), "tuple")?;
                Ok(t[i].clone())
            }
            Value::Str(s) => {
                let chars: Vec<char> = s.chars().collect();
                let i = self.index_of(k, chars.len(), "string")?;
                Ok(Value::str(&chars[i].to_string()))
            }
            Value::Dict(d) => {
                let hk = self.hash_key(k)?;
                let found = d.borrow().get(&hk).map(|(_, v)| v.clone());
                match found {
                    Some(v) => Ok(v),
                    None => {
                        let r = self.repr(k)?;
                        self.err("KeyError", r)
                    }
                }
            }
            Value::Instance(_) => match self.user_method(o, "__getitem__") {
                Some(f) => self.call_user(&f, o, vec![k.clone()]),
                None => self.err("TypeError", format!("'{}' object is not subscriptable", self.type_name(o))),
            },
            // generic aliases such as list[int]
            Value::Class(c) if c.kind != ClassKind::User => Ok(o.clone()),
            other => self.err(
                "TypeError",
                format!("'{}' object is not subscriptable", self.type_name(other)),
            ),
        }
    }

    pub fn set_item(&mut self, o: &Value, k: Value, v: Value) -> Exec<()> {
        match o {
            Value::Proxy(p) => {
                self.record(p, "__setitem__", Some(&k));
                self.set_item(&p.wrapped, k, v)
            }
            Value::List(l) => {
                let len = l.borrow().len();
                let i = self.index_of(&k, len, "list")?;
                l.borrow_mut()[i] = v;
                Ok(())
            }
            Value::Dict(d) => {
                let hk = self.hash_key(&k)?;
                let mut m = d.borrow_mut();
                match m.get_mut(&hk) {
                    Some(slot) => slot.1 = v,
                    None => {
                        m.insert(hk, (k, v));
                    }
                }
                Ok(())
            }
            Value::Instance(_) => match self.user_method(o, "__setitem__") {
                Some(f) => self.call_user(&f, o, vec![k, v]).map(|_| ()),
                None => self.err(
                    "TypeError",
                    format!("'{}' object does not support item assignment", self.type_name(o)),
                ),
            },
            other => self.err(
                "TypeError",
                format!("'{}' object does not support item assignment", self.type_name(other)),
            ),
        }
    }

    fn slice_bound(&mut self, b: Option<Value>, len: usize, default: i64) -> Exec<usize> {
        let n = len as i64;
        let i = match b.as_ref().map(Value::peel) {
            None | Some(Value::None) => default,
            Some(Value::Int(i)) => *i,
            Some(Value::Bool(x)) => *x as i64,
            Some(other) => {
                return self.err(
                    "TypeError",
                    format!(
                        "slice indices must be integers or None or have an __index__ method, not {}",
                        self.type_name(other)
                    ),
                )
            }
        };
        let j = if i < 0 { i + n } else { i };
        Ok(j.clamp(0, n) as usize)
    }

    pub fn get_slice(&mut self, o: &Value, lo: Option<Value>, hi: Option<Value>) -> Exec<Value> {
        match o {
            Value::Proxy(p) => {
                self.record(p, "__getitem__", None);
                self.get_slice(&p.wrapped.clone(), lo, hi)
            }
            Value::List(l) => {
                let items = l.borrow().clone();
                let (a, b) = (self.slice_bound(lo, items.len(), 0)?, self.slice_bound(hi, items.len(), i64::MAX)?);
                Ok(Value::list(if a < b { items[a..b].to_vec() } else { vec![] }))
            }
            Value::Tuple(t) => {
                let (a, b) = (self.slice_bound(lo, t.len(), 0)?, self.slice_bound(hi, t.len(), i64::MAX)?);
                Ok(Value::tuple(if a < b { t[a..b].to_vec() } else { vec![] }))
            }
            Value::Str(s) => {
                let chars: Vec<char> = s.chars().collect();
                let (a, b) = (
                    self.slice_bound(lo, chars.len(), 0)?,
                    self.slice_bound(hi, chars.len(), i64::MAX)?,
                );
                let out: String = if a < b { chars[a..b].iter().collect() } else { String::new() };
                Ok(Value::str(&out))
            }
            other => self.err(
                "TypeError",
                format!("'{}' object is not subscriptable", self.type_name(other)),
            ),
        }
    }

    // ----- operators -----

    pub fn binop(&mut self, op: BinOp, a: &Value, b: &Value) -> Exec<Value> {
        self.tick()?;
        if let Value::Proxy(p) = a {
            self.record(p, op.dunder(), Some(b));
            return self.binop(op, &p.wrapped, b);
        }
        if let Some(f) = self.user_method(a, op.dunder()) {
            return self.call_user(&f, a, vec![b.clone()]);
        }
        if let Value::Proxy(p) = b {
            self.record(p, op.reflected(), Some(a));
            return self.binop(op, a, &p.wrapped);
        }
        if let Some(f) = self.user_method(b, op.reflected()) {
            return self.call_user(&f, b, vec![a.clone()]);
        }
        self.native_binop(op, a, b)
    }

    fn unsupported<T>(&self, op: BinOp, a: &Value, b: &Value) -> Exec<T> {
        self.err(
            "TypeError",
            format!(
                "unsupported operand type(s) for {}: '{}' and '{}'",
                op.symbol(),
                self.type_name(a),
                self.type_name(b)
            ),
        )
    }

    fn repeat<T: Clone>(&self, items: &[T], n: i64) -> Exec<Vec<T>> {
        let n = n.max(0) as usize;
        if items.len().saturating_mul(n) > MAX_SEQUENCE {
            return self.err("MemoryError", "");
        }
        let mut out = Vec::with_capacity(items.len() * n);
        for _ in 0..n {
            out.extend_from_slice(items);
        }
        Ok(out)
    }

    fn native_binop(&mut self, op: BinOp, a: &Value, b: &Value) -> Exec<Value> {
        use Value::*;
        let overflow = || self.err::<Value>("OverflowError", "integer overflow");
        if let (Some(x), Some(y)) = (as_int(a), as_int(b)) {
            return match op {
                BinOp::Add => x.checked_add(y).map(Int).map_or_else(overflow, Ok),
                BinOp::Sub => x.checked_sub(y).map(Int).map_or_else(overflow, Ok),
                BinOp::Mul => x.checked_mul(y).map(Int).map_or_else(overflow, Ok),
                BinOp::Div => {
                    if y == 0 {
                        self.err("ZeroDivisionError", "division by zero")
                    } else {
                        Ok(Float(x as f64 / y as f64))
                    }
                }
                BinOp::FloorDiv => {
                    if y == 0 {
                        return self.err("ZeroDivisionError", "integer division or modulo by zero");
                    }
                    let q = x.wrapping_div(y);
                    let adjust = x.wrapping_rem(y) != 0 && ((x < 0) != (y < 0));
                    Ok(Int(if adjust { q - 1 } else { q }))
                }
                BinOp::Mod => {
                    if y == 0 {
                        return self.err("ZeroDivisionError", "integer division or modulo by zero");
                    }
                    let r = x.wrapping_rem(y);
                    Ok(Int(if r != 0 && ((r < 0) != (y < 0)) { r + y } else { r }))
                }
                BinOp::Pow => {
                    if y < 0 {
                        if x == 0 {
                            return self.err("ZeroDivisionError", "0.0 cannot be raised to a negative power");
                        }
                        return Ok(Float((x as f64).powf(y as f64)));
                    }
                    u32::try_from(y)
                        .ok()
                        .and_then(|e| x.checked_pow(e))
                        .map(Int)
                        .map_or_else(overflow, Ok)
                }
                BinOp::BitOr => Ok(match (a, b) {
                    (Bool(p), Bool(q)) => Bool(*p | *q),
                    _ => Int(x | y),
                }),
                BinOp::BitAnd => Ok(match (a, b) {
                    (Bool(p), Bool(q)) => Bool(*p & *q),
                    _ => Int(x & y),
                }),
            };
        }
        if let (Some(x), Some(y)) = (as_float(a), as_float(b)) {
            return match op {
                BinOp::Add => Ok(Float(x + y)),
                BinOp::Sub => Ok(Float(x - y)),
                BinOp::Mul => Ok(Float(x * y)),
                BinOp::Div => {
                    if y == 0.0 {
                        self.err("ZeroDivisionError", "float division by zero")
                    } else {
                        Ok(Float(x / y))
                    }
                }
                BinOp::FloorDiv => {
                    if y == 0.0 {
                        self.err("ZeroDivisionError", "float floor division by zero")
                    } else {
                        Ok(Float((x / y).floor()))
                    }
                }
                BinOp::Mod => {
                    if y == 0.0 {
                        return self.err("ZeroDivisionError", "float modulo");
                    }
                    let r = x % y;
                    Ok(Float(if r != 0.0 && ((r < 0.0) != (y < 0.0)) { r + y } else { r }))
                }
                BinOp::Pow => {
                    if x == 0.0 && y < 0.0 {
                        return self.err("ZeroDivisionError", "0.0 cannot be raised to a negative power");
                    }
                    Ok(Float(x.powf(y)))
                }
                BinOp::BitOr | BinOp::BitAnd => self.unsupported(op, a, b),
            };
        }
        match (op, a, b) {
            (BinOp::Add, Str(x), Str(y)) => {
                if x.len() + y.len() > MAX_SEQUENCE {
                    return self.err("MemoryError", "");
                }
                Ok(Value::str(&format!("{x}{y}")))
            }
            (BinOp::Mul, Str(s), n) | (BinOp::Mul, n, Str(s)) if as_int(n).is_some() => {
                let bytes = self.repeat(s.as_bytes(), as_int(n).unwrap_or(0))?;
                Ok(Value::str(&String::from_utf8(bytes).unwrap_or_default()))
            }
            (BinOp::Mod, Str(fmt), args) => {
                let args = match args {
                    Tuple(t) => t.to_vec(),
                    other => vec![other.clone()],
                };
                self.percent_format(fmt, &args)
            }
            (BinOp::Add, List(x), List(y)) => {
                let mut out = x.borrow().clone();
                out.extend(y.borrow().iter().cloned());
                if out.len() > MAX_SEQUENCE {
                    return self.err("MemoryError", "");
                }
                Ok(Value::list(out))
            }
            (BinOp::Mul, List(l), n) | (BinOp::Mul, n, List(l)) if as_int(n).is_some() => {
                let items = l.borrow().clone();
                Ok(Value::list(self.repeat(&items, as_int(n).unwrap_or(0))?))
            }
            (BinOp::Add, Tuple(x), Tuple(y)) => {
                let mut out = x.to_vec();
                out.extend(y.iter().cloned());
                Ok(Value::tuple(out))
            }
            (BinOp::Mul, Tuple(t), n) | (BinOp::Mul, n, Tuple(t)) if as_int(n).is_some() => {
                Ok(Value::tuple(self.repeat(t, as_int(n).unwrap_or(0))?))
            }
            (BinOp::BitOr, Set(x), Set(y)) => {
                let mut out = x.borrow().clone();
                for (k, v) in y.borrow().iter() {
                    out.entry(k.clone()).or_insert_with(|| v.clone());
                }
                Ok(Set(Rc::new(RefCell::new(out))))
            }
            (BinOp::BitAnd, Set(x), Set(y)) => {
                let y = y.borrow();
                let out: IndexMap<HashKey, Value> =
                    x.borrow().iter().filter(|(k, _)| y.contains_key(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
                Ok(Set(Rc::new(RefCell::new(out))))
            }
            (BinOp::Sub, Set(x), Set(y)) => {
                let y = y.borrow();
                let out: IndexMap<HashKey, Value> =
                    x.borrow().iter().filter(|(k, _)| !y.contains_key(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
                Ok(Set(Rc::new(RefCell::new(out))))
            }
            (BinOp::BitOr, Dict(x), Dict(y)) => {
                let mut out = x.borrow().clone();
                for (k, v) in y.borrow().iter() {
                    out.insert(k.clone(), v.clone());
                }
                Ok(Dict(Rc::new(RefCell::new(out))))
            }
            _ => self.unsupported(op, a, b),
        }
    }

    fn percent_format(&mut self, fmt: &str, args: &[Value]) -> Exec<Value> {
        let mut out = String::new();
        let mut it = fmt.chars().peekable();
        let mut next = args.iter();
        while let Some(c) = it.next() {
            if c != '%' {
                out.push(c);
                continue;
            }
            let spec = it.next();
            if spec == Some('%') {
                out.push('%');
                continue;
            }
            let Some(arg) = next.next() else {
                return self.err("TypeError", "not enough arguments for format string");
            };
            match spec {
                Some('s') => out.push_str(&self.to_str(arg)?),
                Some('r') => out.push_str(&self.repr(arg)?),
                Some('d') | Some('i') => match (as_int(arg.peel()), as_float(arg.peel())) {
                    (Some(i), _) => out.push_str(&i.to_string()),
                    (None, Some(f)) => out.push_str(&(f.trunc() as i64).to_string()),
                    _ => {
                        return self.err(
                            "TypeError",
                            format!("%d format: a real number is required, not {}", self.type_name(arg)),
                        )
                    }
                },
                _ => return self.err("ValueError", "unsupported format character"),
            }
        }
        if next.next().is_some() {
            return self.err("TypeError", "not all arguments converted during string formatting");
        }
        Ok(Value::str(&out))
    }

    pub fn unary(&mut self, op: UnaryOp, v: &Value) -> Exec<Value> {
        if op == UnaryOp::Not {
            return Ok(Value::Bool(!self.truthy(v)?));
        }
        let dunder = if op == UnaryOp::Neg { "__neg__" } else { "__pos__" };
        match v {
            Value::Proxy(p) => {
                self.record(p, dunder, None);
                self.unary(op, &p.wrapped)
            }
            Value::Int(i) if op == UnaryOp::Neg => {
                i.checked_neg().map(Value::Int).map_or_else(|| self.err("OverflowError", "integer overflow"), Ok)
            }
            Value::Bool(b) if op == UnaryOp::Neg => Ok(Value::Int(-(*b as i64))),
            Value::Float(x) if op == UnaryOp::Neg => Ok(Value::Float(-x)),
            Value::Int(_) | Value::Float(_) => Ok(v.clone()),
            Value::Bool(b) => Ok(Value::Int(*b as i64)),
            Value::Instance(_) => match self.user_method(v, dunder) {
                Some(f) => self.call_user(&f, v, vec![]),
                None => self.err(
                    "TypeError",
                    format!("bad operand type for unary {}: '{}'", if op == UnaryOp::Neg { "-" } else { "+" }, self.type_name(v)),
                ),
            },
            other => self.err(
                "TypeError",
                format!(
                    "bad operand type for unary {}: '{}'",
                    if op == UnaryOp::Neg { "-" } else { "+" },
                    self.type_name(other)
                ),
            ),
        }
    }

    pub fn compare(&mut self, op: CmpOp, a: &Value, b: &Value) -> Exec<Value> {
        self.tick()?;
        match op {
            CmpOp::Is => Ok(Value::Bool(a.identical(b))),
            CmpOp::IsNot => Ok(Value::Bool(!a.identical(b))),
            CmpOp::In => Ok(Value::Bool(self.contains(b, a)?)),
            CmpOp::NotIn => Ok(Value::Bool(!self.contains(b, a)?)),
            _ => self.rich_compare(op, a, b),
        }
    }

    fn rich_compare(&mut self, op: CmpOp, a: &Value, b: &Value) -> Exec<Value> {
        if let Value::Proxy(p) = a {
            self.record(p, op.dunder(), Some(b));
            return self.rich_compare(op, &p.wrapped, b);
        }
        if let Some(f) = self.user_method(a, op.dunder()) {
            return self.call_user(&f, a, vec![b.clone()]);
        }
        if op == CmpOp::NotEq {
            if let Some(f) = self.user_method(a, "__eq__") {
                let r = self.call_user(&f, a, vec![b.clone()])?;
                return Ok(Value::Bool(!self.truthy(&r)?));
            }
        }
        if let Value::Proxy(p) = b {
            self.record(p, op.reflected(), Some(a));
            return self.rich_compare(op, a, &p.wrapped);
        }
        if let Some(f) = self.user_method(b, op.reflected()) {
            return self.call_user(&f, b, vec![a.clone()]);
        }
        if op == CmpOp::NotEq {
            if let Some(f) = self.user_method(b, "__eq__") {
                let r = self.call_user(&f, b, vec![a.clone()])?;
                return Ok(Value::Bool(!self.truthy(&r)?));
            }
        }
        let r = match op {
            CmpOp::Eq => self.native_eq(a, b)?,
            CmpOp::NotEq => !self.native_eq(a, b)?,
            _ => {
                let ord = self.native_order(op, a, b)?;
                match op {
                    CmpOp::Lt => ord == Some(Ordering::Less),
                    CmpOp::LtE => matches!(ord, Some(Ordering::Less | Ordering::Equal)),
                    CmpOp::Gt => ord == Some(Ordering::Greater),
                    _ => matches!(ord, Some(Ordering::Greater | Ordering::Equal)),
                }
            }
        };
        Ok(Value::Bool(r))
    }

    /// `a == b` with the host's dispatch rules.
    pub fn eq(&mut self, a: &Value, b: &Value) -> Exec<bool> {
        if a.identical(b) && !matches!(a.peel(), Value::Float(x) if x.is_nan()) {
            return Ok(true);
        }
        let r = self.rich_compare(CmpOp::Eq, a, b)?;
        self.truthy(&r)
    }

    fn native_eq(&mut self, a: &Value, b: &Value) -> Exec<bool> {
        use Value::*;
        if let (Some(x), Some(y)) = (as_int(a), as_int(b)) {
            return Ok(x == y);
        }
        if let (Some(x), Some(y)) = (as_float(a), as_float(b)) {
            return Ok(x == y);
        }
        match (a, b) {
            (Str(x), Str(y)) => Ok(x == y),
            (List(x), List(y)) => {
                let (x, y) = (x.borrow().clone(), y.borrow().clone());
                self.seq_eq(&x, &y)
            }
            (Tuple(x), Tuple(y)) => self.seq_eq(&x.clone(), &y.clone()),
            (Set(x), Set(y)) => {
                let (x, y) = (x.borrow(), y.borrow());
                Ok(x.len() == y.len() && x.keys().all(|k| y.contains_key(k)))
            }
            (Dict(x), Dict(y)) => {
                let (x, y) = (x.borrow().clone(), y.borrow().clone());
                if x.len() != y.len() {
                    return Ok(false);
                }
                for (k, (_, v)) in &x {
                    match y.get(k) {
                        Some((_, w)) => {
                            if !self.eq(v, w)? {
                                return Ok(false);
                            }
                        }
                        Option::None => return Ok(false),
                    }
                }
                Ok(true)
            }
            _ => Ok(a.identical(b)),
        }
    }

    fn seq_eq(&mut self, x: &[Value], y: &[Value]) -> Exec<bool> {
        if x.len() != y.len() {
            return Ok(false);
        }
        for (p, q) in x.iter().zip(y) {
            if !self.eq(p, q)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn native_order(&mut self, op: CmpOp, a: &Value, b: &Value) -> Exec<Option<Ordering>> {
        use Value::*;
        if let (Some(x), Some(y)) = (as_int(a), as_int(b)) {
            return Ok(Some(x.cmp(&y)));
        }
        if let (Some(x), Some(y)) = (as_float(a), as_float(b)) {
            return Ok(x.partial_cmp(&y));
        }
        match (a, b) {
            (Str(x), Str(y)) => Ok(Some(x.cmp(y))),
            (List(x), List(y)) => {
                let (x, y) = (x.borrow().clone(), y.borrow().clone());
                self.seq_order(op, &x, &y)
            }
            (Tuple(x), Tuple(y)) => self.seq_order(op, &x.clone(), &y.clone()),
            (Set(x), Set(y)) => {
                let (x, y) = (x.borrow(), y.borrow());
                let sub = x.keys().all(|k| y.contains_key(k));
                let sup = y.keys().all(|k| x.contains_key(k));
                Ok(match (sub, sup) {
                    (true, true) => Some(Ordering::Equal),
                    (true, false) => Some(Ordering::Less),
                    (false, true) => Some(Ordering::Greater),
                    _ => Option::None,
                })
            }
            _ => {
                let sym = match op {
                    CmpOp::Lt => "<",
                    CmpOp::LtE => "<=",
                    CmpOp::Gt => ">",
                    _ => ">=",
                };
                self.err(
                    "TypeError",
                    format!(
                        "'{sym}' not supported between instances of '{}' and '{}'",
                        self.type_name(a),
                        self.type_name(b)
                    ),
                )
            }
        }
    }

    fn seq_order(&mut self, _op: CmpOp, x: &[Value], y: &[Value]) -> Exec<Option<Ordering>> {
        for (p, q) in x.iter().zip(y) {
            if !self.eq(p, q)? {
                let lt = self.rich_compare(CmpOp::Lt, p, q)?;
                return Ok(Some(if self.truthy(&lt)? { Ordering::Less } else { Ordering::Greater }));
            }
        }
        Ok(Some(x.len().cmp(&y.len())))
    }

    /// `a < b` as used by sorting, `min` and `max`.
    pub fn less(&mut self, a: &Value, b: &Value) -> Exec<bool> {
        let r = self.rich_compare(CmpOp::Lt, a, b)?;
        self.truthy(&r)
    }

    /// `item in container`.
    pub fn contains(&mut self, container: &Value, item: &Value) -> Exec<bool> {
        match container {
            Value::Proxy(p) => {
                self.record(p, "__contains__", Some(item));
                self.contains(&p.wrapped, item)
            }
            Value::Str(s) => match item {
                Value::Str(x) => Ok(s.contains(&**x)),
                other => self.err(
                    "TypeError",
                    format!("'in <string>' requires string as left operand, not {}", self.type_name(other)),
                ),
            },
            Value::List(l) => {
                let items = l.borrow().clone();
                self.any_eq(&items, item)
            }
            Value::Tuple(t) => self.any_eq(&t.clone(), item),
            Value::Dict(d) => {
                let k = self.hash_key(item)?;
                Ok(d.borrow().contains_key(&k))
            }
            Value::Set(s) => {
                let k = self.hash_key(item)?;
                Ok(s.borrow().contains_key(&k))
            }
            Value::Instance(_) => {
                if let Some(f) = self.user_method(container, "__contains__") {
                    let r = self.call_user(&f, container, vec![item.clone()])?;
                    return self.truthy(&r);
                }
                if self.user_method(container, "__iter__").is_some() {
                    let items = self.iterate(container)?;
                    return self.any_eq(&items, item);
                }
                self.err(
                    "TypeError",
                    format!("argument of type '{}' is not iterable", self.type_name(container)),
                )
            }
            other => self.err(
                "TypeError",
                format!("argument of type '{}' is not iterable", self.type_name(other)),
            ),
        }
    }

    fn any_eq(&mut self, items: &[Value], item: &Value) -> Exec<bool> {
        for e in items {
            self.tick()?;
            if self.eq(e, item)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    // ----- protocols -----

    pub fn truthy(&mut self, v: &Value) -> Exec<bool> {
        Ok(match v {
            Value::Proxy(p) => {
                self.record(p, "__bool__", None);
                return self.truthy(&p.wrapped);
            }
            Value::None => false,
            Value::Bool(b) => *b,
            Value::Int(i) => *i != 0,
            Value::Float(x) => *x != 0.0,
            Value::Str(s) => !s.is_empty(),
            Value::List(l) => !l.borrow().is_empty(),
            Value::Tuple(t) => !t.is_empty(),
            Value::Dict(d) => !d.borrow().is_empty(),
            Value::Set(s) => !s.borrow().is_empty(),
            Value::Instance(_) => {
                if let Some(f) = self.user_method(v, "__bool__") {
                    let r = self.call_user(&f, v, vec![])?;
                    return match r {
                        Value::Bool(b) => Ok(b),
                        other => self.err(
                            "TypeError",
                            format!("__bool__ should return bool, returned {}", self.type_name(&other)),
                        ),
                    };
                }
                if self.user_method(v, "__len__").is_some() {
                    return Ok(self.len(v)? != 0);
                }
                true
            }
            _ => true,
        })
    }

    pub fn len(&mut self, v: &Value) -> Exec<usize> {
        match v {
            Value::Proxy(p) => {
                self.record(p, "__len__", None);
                self.len(&p.wrapped)
            }
            Value::Str(s) => Ok(s.chars().count()),
            Value::List(l) => Ok(l.borrow().len()),
            Value::Tuple(t) => Ok(t.len()),
            Value::Dict(d) => Ok(d.borrow().len()),
            Value::Set(s) => Ok(s.borrow().len()),
            Value::Instance(_) if self.user_method(v, "__len__").is_some() => {
                let f = self.user_method(v, "__len__").expect("checked");
                match self.call_user(&f, v, vec![])? {
                    Value::Int(n) if n >= 0 => Ok(n as usize),
                    Value::Int(_) => self.err("ValueError", "__len__() should return >= 0"),
                    other => self.err(
                        "TypeError",
                        format!("'{}' object cannot be interpreted as an integer", self.type_name(&other)),
                    ),
                }
            }
            other => self.err(
                "TypeError",
                format!("object of type '{}' has no len()", self.type_name(other)),
            ),
        }
    }

    /// Materializes the items an iteration over `v` would produce.
    pub fn iterate(&mut self, v: &Value) -> Exec<Vec<Value>> {
        match v {
            Value::Proxy(p) => {
                self.record(p, "__iter__", None);
                let items = self.iterate(&p.wrapped)?;
                Ok(match p.wrapped.peel() {
                    Value::List(_) | Value::Tuple(_) | Value::Set(_) => {
                        items.into_iter().map(|i| self.child(p, i)).collect()
                    }
                    _ => items,
                })
            }
            Value::List(l) => Ok(l.borrow().clone()),
            Value::Tuple(t) => Ok(t.to_vec()),
            Value::Str(s) => Ok(s.chars().map(|c| Value::str(&c.to_string())).collect()),
            Value::Dict(d) => Ok(d.borrow().values().map(|(k, _)| k.clone()).collect()),
            Value::Set(s) => Ok(s.borrow().values().cloned().collect()),
            Value::Instance(_) => match self.user_method(v, "__iter__") {
                Some(f) => {
                    let it = self.call_user(&f, v, vec![])?;
                    if matches!(it, Value::Instance(_)) {
                        return self.err("TypeError", "iterator objects are not supported");
                    }
                    self.iterate(&it)
                }
                None => self.err("TypeError", format!("'{}' object is not iterable", self.type_name(v))),
            },
            other => self.err("TypeError", format!("'{}' object is not iterable", self.type_name(other))),
        }
    }

    pub fn hash_key(&mut self, v: &Value) -> Exec<HashKey> {
        Ok(match v {
            Value::Proxy(p) => {
                self.record(p, "__hash__", None);
                return self.hash_key(&p.wrapped);
            }
            Value::None => HashKey::None,
            Value::Bool(b) => HashKey::Int(*b as i64),
            Value::Int(i) => HashKey::Int(*i),
            Value::Float(x) => {
                if x.fract() == 0.0 && x.abs() < 9.0e15 {
                    HashKey::Int(*x as i64)
                } else {
                    HashKey::Float(x.to_bits())
                }
            }
            Value::Str(s) => HashKey::Str(s.clone()),
            Value::Tuple(t) => {
                let mut keys = Vec::with_capacity(t.len());
                for i in t.iter() {
                    keys.push(self.hash_key(i)?);
                }
                HashKey::Tuple(keys)
            }
            Value::List(_) | Value::Dict(_) | Value::Set(_) => {
                return self.err("TypeError", format!("unhashable type: '{}'", self.type_name(v)))
            }
            Value::Instance(i) => {
                if let Some(f) = self.user_method(v, "__hash__") {
                    return match self.call_user(&f, v, vec![])? {
                        Value::Int(h) => Ok(HashKey::Int(h)),
                        _ => self.err("TypeError", "__hash__ method should return an integer"),
                    };
                }
                if self.user_method(v, "__eq__").is_some() {
                    return self.err("TypeError", format!("unhashable type: '{}'", i.class.name));
                }
                HashKey::Id(v.address())
            }
            other => HashKey::Id(other.address()),
        })
    }

    pub fn to_str(&mut self, v: &Value) -> Exec<String> {
        match v {
            Value::Proxy(p) => {
                self.record(p, "__str__", None);
                self.to_str(&p.wrapped)
            }
            Value::Str(s) => Ok(s.to_string()),
            Value::Instance(i) => {
                if let Some(f) = self.user_method(v, "__str__") {
                    return match self.call_user(&f, v, vec![])? {
                        Value::Str(s) => Ok(s.to_string()),
                        other => self.err(
                            "TypeError",
                            format!("__str__ returned non-string (type {})", self.type_name(&other)),
                        ),
                    };
                }
                if i.class.base_kind() == ClassKind::Exception && self.user_method(v, "__repr__").is_none() {
                    let args = i.attrs.borrow().get("args").cloned();
                    return match args {
                        Some(Value::Tuple(t)) if t.is_empty() => Ok(String::new()),
                        Some(Value::Tuple(t)) if t.len() == 1 => self.to_str(&t[0]),
                        Some(other) => self.repr(&other),
                        None => Ok(String::new()),
                    };
                }
                self.repr(v)
            }
            other => self.repr(other),
        }
    }

    pub fn repr(&mut self, v: &Value) -> Exec<String> {
        match v {
            Value::Proxy(p) => {
                self.record(p, "__repr__", None);
                self.repr(&p.wrapped)
            }
            Value::Instance(i) => {
                if let Some(f) = self.user_method(v, "__repr__") {
                    return match self.call_user(&f, v, vec![])? {
                        Value::Str(s) => Ok(s.to_string()),
                        other => self.err(
                            "TypeError",
                            format!("__repr__ returned non-string (type {})", self.type_name(&other)),
                        ),
                    };
                }
                Ok(format!("<{} object at {:#x}>", i.class.qualname, v.address()))
            }
            Value::List(l) => {
                let items = l.borrow().clone();
                Ok(format!("[{}]", self.join_repr(&items)?))
            }
            Value::Tuple(t) => {
                let inner = self.join_repr(&t.clone())?;
                Ok(if t.len() == 1 { format!("({inner},)") } else { format!("({inner})") })
            }
            Value::Set(s) => {
                let items: Vec<Value> = s.borrow().values().cloned().collect();
                if items.is_empty() {
                    return Ok("set()".into());
                }
                Ok(format!("{{{}}}", self.join_repr(&items)?))
            }
            Value::Dict(d) => {
                let pairs: Vec<(Value, Value)> = d.borrow().values().cloned().collect();
                let mut parts = Vec::with_capacity(pairs.len());
                for (k, v) in &pairs {
                    parts.push(format!("{}: {}", self.repr(k)?, self.repr(v)?));
                }
                Ok(format!("{{{}}}", parts.join(", ")))
            }
            other => Ok(format!("{other:?}")),
        }
    }

    fn join_repr(&mut self, items: &[Value]) -> Exec<String> {
        let mut parts = Vec::with_capacity(items.len());
        for i in items {
            parts.push(self.repr(i)?);
        }
        Ok(parts.join(", "))
    }
}

pub(crate) fn as_int(v: &Value) -> Option<i64> {
    match v {
        Value::Int(i) => Some(*i),
        Value::Bool(b) => Some(*b as i64),
        _ => None,
    }
}

pub(crate) fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Int(i) => Some(*i as f64),
        Value::Bool(b) => Some(*b as i64 as f64),
        Value::Float(x) => Some(*x),
        _ => None,
    }
}
