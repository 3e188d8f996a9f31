//! Builtin functions, methods of the builtin types and their attribute
//! tables.

use std::cell::RefCell;
use std::rc::Rc;

use indexmap::IndexMap;

use super::interp::{Exec, Interp, MAX_SEQUENCE};
use super::ops::{as_float, as_int};
use super::value::*;

/// Builtin exception classes, parents before children.
pub const BUILTIN_EXCEPTIONS: [(&str, Option<&str>); 19] = [
    ("Exception", None),
    ("ValueError", Some("Exception")),
    ("TypeError", Some("Exception")),
    ("AttributeError", Some("Exception")),
    ("NameError", Some("Exception")),
    ("ImportError", Some("Exception")),
    ("AssertionError", Some("Exception")),
    ("MemoryError", Some("Exception")),
    ("SyntaxError", Some("Exception")),
    ("LookupError", Some("Exception")),
    ("KeyError", Some("LookupError")),
    ("IndexError", Some("LookupError")),
    ("ArithmeticError", Some("Exception")),
    ("ZeroDivisionError", Some("ArithmeticError")),
    ("OverflowError", Some("ArithmeticError")),
    ("RuntimeError", Some("Exception")),
    ("NotImplementedError", Some("RuntimeError")),
    ("RecursionError", Some("RuntimeError")),
    ("StopIteration", Some("Exception")),
];

const OBJECT_ATTRS: &[&str] = &[
    "__class__", "__delattr__", "__dir__", "__doc__", "__eq__", "__format__", "__ge__",
    "__getattribute__", "__gt__", "__hash__", "__init__", "__init_subclass__", "__le__", "__lt__",
    "__ne__", "__new__", "__reduce__", "__reduce_ex__", "__repr__", "__setattr__", "__sizeof__",
    "__str__", "__subclasshook__",
];

const INT_ATTRS: &[&str] = &[
    "__abs__", "__add__", "__and__", "__bool__", "__ceil__", "__divmod__", "__doc__", "__eq__",
    "__float__", "__floor__", "__floordiv__", "__format__", "__ge__", "__getattribute__",
    "__getnewargs__", "__gt__", "__hash__", "__index__", "__int__", "__invert__", "__le__",
    "__lshift__", "__lt__", "__mod__", "__mul__", "__ne__", "__neg__", "__new__", "__or__",
    "__pos__", "__pow__", "__radd__", "__rand__", "__rdivmod__", "__repr__", "__rfloordiv__",
    "__rlshift__", "__rmod__", "__rmul__", "__ror__", "__round__", "__rpow__", "__rrshift__",
    "__rshift__", "__rsub__", "__rtruediv__", "__rxor__", "__sizeof__", "__sub__", "__truediv__",
    "__trunc__", "__xor__", "as_integer_ratio", "bit_count", "bit_length", "conjugate",
    "denominator", "from_bytes", "imag", "is_integer", "numerator", "real", "to_bytes",
];

const BOOL_ATTRS: &[&str] = &[
    "__and__", "__doc__", "__invert__", "__new__", "__or__", "__rand__", "__repr__", "__ror__",
    "__rxor__", "__xor__",
];

const FLOAT_ATTRS: &[&str] = &[
    "__abs__", "__add__", "__bool__", "__ceil__", "__divmod__", "__doc__", "__eq__", "__float__",
    "__floor__", "__floordiv__", "__format__", "__ge__", "__getattribute__", "__getformat__",
    "__getnewargs__", "__gt__", "__hash__", "__int__", "__le__", "__lt__", "__mod__", "__mul__",
    "__ne__", "__neg__", "__new__", "__pos__", "__pow__", "__radd__", "__rdivmod__", "__repr__",
    "__rfloordiv__", "__rmod__", "__rmul__", "__round__", "__rpow__", "__rsub__", "__rtruediv__",
    "__sub__", "__truediv__", "__trunc__", "as_integer_ratio", "conjugate", "fromhex", "hex",
    "imag", "is_integer", "real",
];

const STR_ATTRS: &[&str] = &[
    "__add__", "__contains__", "__doc__", "__eq__", "__format__", "__ge__", "__getattribute__",
    "__getitem__", "__getnewargs__", "__gt__", "__hash__", "__iter__", "__le__", "__len__",
    "__lt__", "__mod__", "__mul__", "__ne__", "__new__", "__repr__", "__rmod__", "__rmul__",
    "__sizeof__", "__str__", "capitalize", "casefold", "center", "count", "encode", "endswith",
    "expandtabs", "find", "format", "format_map", "index", "isalnum", "isalpha", "isascii",
    "isdecimal", "isdigit", "isidentifier", "islower", "isnumeric", "isprintable", "isspace",
    "istitle", "isupper", "join", "ljust", "lower", "lstrip", "maketrans", "partition",
    "removeprefix", "removesuffix", "replace", "rfind", "rindex", "rjust", "rpartition", "rsplit",
    "rstrip", "split", "splitlines", "startswith", "strip", "swapcase", "title", "translate",
    "upper", "zfill",
];

const LIST_ATTRS: &[&str] = &[
    "__add__", "__class_getitem__", "__contains__", "__delitem__", "__doc__", "__eq__", "__ge__",
    "__getattribute__", "__getitem__", "__gt__", "__hash__", "__iadd__", "__imul__", "__init__",
    "__iter__", "__le__", "__len__", "__lt__", "__mul__", "__ne__", "__new__", "__repr__",
    "__reversed__", "__rmul__", "__setitem__", "__sizeof__", "append", "clear", "copy", "count",
    "extend", "index", "insert", "pop", "remove", "reverse", "sort",
];

const TUPLE_ATTRS: &[&str] = &[
    "__add__", "__class_getitem__", "__contains__", "__doc__", "__eq__", "__ge__",
    "__getattribute__", "__getitem__", "__getnewargs__", "__gt__", "__hash__", "__iter__", "__le__",
    "__len__", "__lt__", "__mul__", "__ne__", "__new__", "__repr__", "__rmul__", "count", "index",
];

const DICT_ATTRS: &[&str] = &[
    "__class_getitem__", "__contains__", "__delitem__", "__doc__", "__eq__", "__ge__",
    "__getattribute__", "__getitem__", "__gt__", "__hash__", "__init__", "__ior__", "__iter__",
    "__le__", "__len__", "__lt__", "__ne__", "__new__", "__or__", "__repr__", "__reversed__",
    "__ror__", "__setitem__", "__sizeof__", "clear", "copy", "fromkeys", "get", "items", "keys",
    "pop", "popitem", "setdefault", "update", "values",
];

const SET_ATTRS: &[&str] = &[
    "__and__", "__class_getitem__", "__contains__", "__doc__", "__eq__", "__ge__",
    "__getattribute__", "__gt__", "__hash__", "__iand__", "__init__", "__ior__", "__isub__",
    "__iter__", "__ixor__", "__le__", "__len__", "__lt__", "__ne__", "__new__", "__or__",
    "__rand__", "__reduce__", "__repr__", "__ror__", "__rsub__", "__rxor__", "__sizeof__",
    "__sub__", "__xor__", "add", "clear", "copy", "difference", "difference_update", "discard",
    "intersection", "intersection_update", "isdisjoint", "issubset", "issuperset", "pop", "remove",
    "symmetric_difference", "symmetric_difference_update", "union", "update",
];

const NONE_ATTRS: &[&str] = &["__bool__", "__doc__", "__hash__", "__new__", "__repr__"];

const EXCEPTION_ATTRS: &[&str] = &[
    "__cause__", "__context__", "__delattr__", "__dict__", "__getattribute__", "__init__", "__new__",
    "__reduce__", "__repr__", "__setattr__", "__setstate__", "__str__", "__suppress_context__",
    "__traceback__", "add_note", "args", "with_traceback",
];

/// Attributes a builtin class defines itself, mirroring `vars(cls)`.
pub fn native_attributes(kind: ClassKind) -> &'static [&'static str] {
    match kind {
        ClassKind::Object => OBJECT_ATTRS,
        ClassKind::Int => INT_ATTRS,
        ClassKind::Bool => BOOL_ATTRS,
        ClassKind::Float => FLOAT_ATTRS,
        ClassKind::Str => STR_ATTRS,
        ClassKind::List => LIST_ATTRS,
        ClassKind::Tuple => TUPLE_ATTRS,
        ClassKind::Dict => DICT_ATTRS,
        ClassKind::Set => SET_ATTRS,
        ClassKind::NoneType => NONE_ATTRS,
        ClassKind::Exception => EXCEPTION_ATTRS,
        _ => &[],
    }
}

fn arity(interp: &Interp, name: &str, args: &[Value], min: usize, max: usize) -> Exec<()> {
    if args.len() < min || args.len() > max {
        let expected = if min == max { format!("{min}") } else { format!("{min} to {max}") };
        return interp.err(
            "TypeError",
            format!("{name}() takes {expected} arguments ({} given)", args.len()),
        );
    }
    Ok(())
}

impl Interp {
    /// Class targets of an `isinstance` check.
    fn class_targets(&self, spec: &Value, fname: &str) -> Exec<Vec<Rc<ClassObj>>> {
        match spec.peel() {
            Value::Class(c) => Ok(vec![c.clone()]),
            Value::Tuple(items) => {
                let mut out = Vec::new();
                for i in items.iter() {
                    out.extend(self.class_targets(i, fname)?);
                }
                Ok(out)
            }
            _ => self.err(
                "TypeError",
                format!("{fname}() arg 2 must be a type, a tuple of types, or a union"),
            ),
        }
    }

    fn int_arg(&mut self, v: &Value, what: &str) -> Exec<i64> {
        match v {
            Value::Proxy(p) => {
                let t = None;
                p.with_node(|n| n.record_method("__index__", t));
                self.int_arg(&p.wrapped.clone(), what)
            }
            Value::Int(i) => Ok(*i),
            Value::Bool(b) => Ok(*b as i64),
            other => self.err(
                "TypeError",
                format!("'{}' object cannot be interpreted as an integer{what}", self.type_name(other)),
            ),
        }
    }

    /// Stable merge sort with a fallible comparison.
    pub(crate) fn sort_values(&mut self, items: Vec<Value>, key: Option<&Value>) -> Exec<Vec<Value>> {
        let keyed: Vec<(Value, Value)> = match key {
            Some(f) => {
                let mut out = Vec::with_capacity(items.len());
                for i in items {
                    let k = self.call(f, vec![i.clone()])?;
                    out.push((k, i));
                }
                out
            }
            None => items.into_iter().map(|i| (i.clone(), i)).collect(),
        };
        let sorted = self.merge_sort(keyed)?;
        Ok(sorted.into_iter().map(|(_, v)| v).collect())
    }

    fn merge_sort(&mut self, mut items: Vec<(Value, Value)>) -> Exec<Vec<(Value, Value)>> {
        if items.len() <= 1 {
            return Ok(items);
        }
        let right = items.split_off(items.len() / 2);
        let left = self.merge_sort(items)?;
        let right = self.merge_sort(right)?;
        let mut out = Vec::with_capacity(left.len() + right.len());
        let mut l = left.into_iter().peekable();
        let mut r = right.into_iter().peekable();
        while let (Some(a), Some(b)) = (l.peek(), r.peek()) {
            self.tick()?;
            if self.less(&b.0, &a.0)? {
                out.push(r.next().expect("peeked"));
            } else {
                out.push(l.next().expect("peeked"));
            }
        }
        out.extend(l);
        out.extend(r);
        Ok(out)
    }

    fn extreme(&mut self, name: &str, args: Vec<Value>, want_max: bool) -> Exec<Value> {
        let items = if args.len() == 1 { self.iterate(&args[0])? } else { args };
        let mut it = items.into_iter();
        let Some(mut best) = it.next() else {
            return self.err("ValueError", format!("{name}() arg is an empty sequence"));
        };
        for v in it {
            let better = if want_max { self.less(&best, &v)? } else { self.less(&v, &best)? };
            if better {
                best = v;
            }
        }
        Ok(best)
    }

    pub fn call_builtin(&mut self, b: Builtin, args: Vec<Value>) -> Exec<Value> {
        let name = b.name();
        match b {
            Builtin::Len => {
                arity(self, name, &args, 1, 1)?;
                Ok(Value::Int(self.len(&args[0])? as i64))
            }
            Builtin::IsInstance => {
                arity(self, name, &args, 2, 2)?;
                let targets = self.class_targets(&args[1], name)?;
                if let (true, Value::Proxy(p)) = (self.shim_enabled, &args[0]) {
                    let ids: Vec<_> = targets.iter().filter_map(|c| self.class_id(c)).collect();
                    p.with_node(|n| ids.into_iter().for_each(|id| n.record_typecheck(id)));
                }
                let cls = self.class_of(&args[0]);
                Ok(Value::Bool(targets.iter().any(|t| cls.is_subclass_of(t))))
            }
            Builtin::IsSubclass => {
                arity(self, name, &args, 2, 2)?;
                let Value::Class(c) = args[0].peel() else {
                    return self.err("TypeError", "issubclass() arg 1 must be a class");
                };
                let targets = self.class_targets(&args[1], name)?;
                Ok(Value::Bool(targets.iter().any(|t| c.is_subclass_of(t))))
            }
            Builtin::Type => {
                arity(self, name, &args, 1, 1)?;
                Ok(match &args[0] {
                    Value::Proxy(_) => Value::Class(self.builtins.proxy.clone()),
                    other => Value::Class(self.class_of(other)),
                })
            }
            Builtin::HasAttr => {
                arity(self, name, &args, 2, 2)?;
                let attr = self.str_arg(&args[1], "hasattr(): attribute name")?;
                match self.get_attr(&args[0], &attr) {
                    Ok(_) => Ok(Value::Bool(true)),
                    Err(super::Unwind::Raise(e)) if self.exception_name(&e) == "AttributeError" => {
                        Ok(Value::Bool(false))
                    }
                    Err(e) => Err(e),
                }
            }
            Builtin::GetAttr => {
                arity(self, name, &args, 2, 3)?;
                let attr = self.str_arg(&args[1], "getattr(): attribute name")?;
                match self.get_attr(&args[0], &attr) {
                    Err(super::Unwind::Raise(e)) if args.len() == 3 && self.exception_name(&e) == "AttributeError" => {
                        Ok(args[2].clone())
                    }
                    other => other,
                }
            }
            Builtin::SetAttr => {
                arity(self, name, &args, 3, 3)?;
                let attr = self.str_arg(&args[1], "setattr(): attribute name")?;
                self.set_attr(&args[0], &attr, args[2].clone())?;
                Ok(Value::None)
            }
            Builtin::Range => {
                arity(self, name, &args, 1, 3)?;
                let mut n = Vec::with_capacity(3);
                for a in &args {
                    n.push(self.int_arg(a, "")?);
                }
                let (start, stop, step) = match n.as_slice() {
                    [stop] => (0, *stop, 1),
                    [start, stop] => (*start, *stop, 1),
                    [start, stop, step] => (*start, *stop, *step),
                    _ => unreachable!("arity checked"),
                };
                if step == 0 {
                    return self.err("ValueError", "range() arg 3 must not be zero");
                }
                let len = if step > 0 {
                    (stop.saturating_sub(start).max(0) as u64).div_ceil(step as u64)
                } else {
                    (start.saturating_sub(stop).max(0) as u64).div_ceil(step.unsigned_abs())
                };
                if len > MAX_SEQUENCE as u64 {
                    return self.err("MemoryError", "");
                }
                Ok(Value::list((0..len as i64).map(|i| Value::Int(start + i * step)).collect()))
            }
            Builtin::Abs => {
                arity(self, name, &args, 1, 1)?;
                match &args[0] {
                    Value::Proxy(p) => {
                        p.with_node(|n| n.record_method("__abs__", None));
                        self.call_builtin(b, vec![p.wrapped.clone()])
                    }
                    Value::Int(i) => i
                        .checked_abs()
                        .map(Value::Int)
                        .map_or_else(|| self.err("OverflowError", "integer overflow"), Ok),
                    Value::Bool(x) => Ok(Value::Int(*x as i64)),
                    Value::Float(x) => Ok(Value::Float(x.abs())),
                    other => match self.user_method(other, "__abs__") {
                        Some(f) => self.call_function(&f, vec![other.clone()]),
                        None => self.err(
                            "TypeError",
                            format!("bad operand type for abs(): '{}'", self.type_name(other)),
                        ),
                    },
                }
            }
            Builtin::Min | Builtin::Max => {
                if args.is_empty() {
                    return self.err("TypeError", format!("{name} expected at least 1 argument, got 0"));
                }
                self.extreme(name, args, b == Builtin::Max)
            }
            Builtin::Sum => {
                arity(self, name, &args, 1, 2)?;
                let items = self.iterate(&args[0])?;
                let mut acc = args.get(1).cloned().unwrap_or(Value::Int(0));
                if matches!(acc, Value::Str(_)) {
                    return self.err("TypeError", "sum() can't sum strings [use ''.join(seq) instead]");
                }
                for i in items {
                    acc = self.binop(super::ast::BinOp::Add, &acc, &i)?;
                }
                Ok(acc)
            }
            Builtin::Sorted => {
                arity(self, name, &args, 1, 1)?;
                let items = self.iterate(&args[0])?;
                Ok(Value::list(self.sort_values(items, None)?))
            }
            Builtin::Enumerate => {
                arity(self, name, &args, 1, 2)?;
                let start = match args.get(1) {
                    Some(s) => self.int_arg(s, "")?,
                    None => 0,
                };
                let items = self.iterate(&args[0])?;
                Ok(Value::list(
                    items
                        .into_iter()
                        .enumerate()
                        .map(|(i, v)| Value::tuple(vec![Value::Int(start + i as i64), v]))
                        .collect(),
                ))
            }
            Builtin::Zip => {
                let mut cols = Vec::with_capacity(args.len());
                for a in &args {
                    cols.push(self.iterate(a)?);
                }
                let n = cols.iter().map(Vec::len).min().unwrap_or(0);
                Ok(Value::list(
                    (0..n)
                        .map(|i| Value::tuple(cols.iter().map(|c| c[i].clone()).collect()))
                        .collect(),
                ))
            }
            Builtin::Print => {
                for a in &args {
                    self.to_str(a)?;
                }
                Ok(Value::None)
            }
            Builtin::Repr => {
                arity(self, name, &args, 1, 1)?;
                Ok(Value::str(&self.repr(&args[0])?))
            }
            Builtin::Round => {
                arity(self, name, &args, 1, 2)?;
                let digits = match args.get(1) {
                    Some(Value::None) | None => None,
                    Some(d) => Some(self.int_arg(d, "")?),
                };
                match (args[0].peel(), digits) {
                    (Value::Int(i), _) => Ok(Value::Int(*i)),
                    (Value::Bool(x), _) => Ok(Value::Int(*x as i64)),
                    (Value::Float(x), None) => {
                        if !x.is_finite() {
                            return self.err("OverflowError", "cannot convert float infinity to integer");
                        }
                        Ok(Value::Int(x.round_ties_even() as i64))
                    }
                    (Value::Float(x), Some(d)) => {
                        let m = 10f64.powi(d.clamp(-300, 300) as i32);
                        Ok(Value::Float((x * m).round_ties_even() / m))
                    }
                    (other, _) => self.err(
                        "TypeError",
                        format!("type {} doesn't define __round__ method", self.type_name(other)),
                    ),
                }
            }
            Builtin::Any | Builtin::All => {
                arity(self, name, &args, 1, 1)?;
                let items = self.iterate(&args[0])?;
                let want = b == Builtin::Any;
                for i in items {
                    if self.truthy(&i)? == want {
                        return Ok(Value::Bool(want));
                    }
                }
                Ok(Value::Bool(!want))
            }
            Builtin::Reversed => {
                arity(self, name, &args, 1, 1)?;
                if matches!(args[0].peel(), Value::Set(_) | Value::Int(_) | Value::Float(_)) {
                    return self.err(
                        "TypeError",
                        format!("'{}' object is not reversible", self.type_name(&args[0])),
                    );
                }
                let mut items = self.iterate(&args[0])?;
                items.reverse();
                Ok(Value::list(items))
            }
            Builtin::Id => {
                arity(self, name, &args, 1, 1)?;
                Ok(Value::Int(args[0].address() as i64))
            }
            Builtin::Callable => {
                arity(self, name, &args, 1, 1)?;
                let v = args[0].peel();
                let c = match v {
                    Value::Function(_)
                    | Value::BoundMethod(..)
                    | Value::Builtin(_)
                    | Value::NativeMethod(..)
                    | Value::Class(_) => true,
                    Value::Instance(_) => self.user_method(v, "__call__").is_some(),
                    _ => false,
                };
                Ok(Value::Bool(c))
            }
            Builtin::Ord => {
                arity(self, name, &args, 1, 1)?;
                match args[0].peel() {
                    Value::Str(s) if s.chars().count() == 1 => {
                        Ok(Value::Int(s.chars().next().expect("one char") as i64))
                    }
                    Value::Str(s) => self.err(
                        "TypeError",
                        format!("ord() expected a character, but string of length {} found", s.chars().count()),
                    ),
                    other => self.err(
                        "TypeError",
                        format!("ord() expected string of length 1, but {} found", self.type_name(other)),
                    ),
                }
            }
            Builtin::Chr => {
                arity(self, name, &args, 1, 1)?;
                let i = self.int_arg(&args[0], "")?;
                match u32::try_from(i).ok().and_then(char::from_u32) {
                    Some(c) => Ok(Value::str(&c.to_string())),
                    None => self.err("ValueError", "chr() arg not in range(0x110000)"),
                }
            }
        }
    }

    /// A `str` argument of a native routine; proxies are rejected the way
    /// native code rejects foreign objects.
    fn str_arg(&self, v: &Value, what: &str) -> Exec<Rc<str>> {
        match v {
            Value::Str(s) => Ok(s.clone()),
            other => self.err(
                "TypeError",
                format!("{what} must be str, not {}", self.type_name(other)),
            ),
        }
    }

    fn opt_str_arg(&self, args: &[Value], i: usize, what: &str) -> Exec<Option<Rc<str>>> {
        match args.get(i) {
            None | Some(Value::None) => Ok(None),
            Some(v) => self.str_arg(v, what).map(Some),
        }
    }

    fn affixes(&self, v: &Value, method: &str) -> Exec<Vec<Rc<str>>> {
        match v {
            Value::Str(s) => Ok(vec![s.clone()]),
            Value::Tuple(t) => t
                .iter()
                .map(|x| match x {
                    Value::Str(s) => Ok(s.clone()),
                    other => self.err(
                        "TypeError",
                        format!("tuple for {method} must only contain str, not {}", self.type_name(other)),
                    ),
                })
                .collect(),
            other => self.err(
                "TypeError",
                format!("{method} first arg must be str or a tuple of str, not {}", self.type_name(other)),
            ),
        }
    }

    pub fn call_method(&mut self, recv: &Value, name: &str, args: Vec<Value>) -> Exec<Value> {
        self.tick()?;
        if name.starts_with("__") && name.ends_with("__") {
            return self.call_dunder(recv, name, args);
        }
        match recv {
            Value::Str(s) => self.str_method(s, name, args),
            Value::List(l) => self.list_method(l, name, args),
            Value::Dict(d) => self.dict_method(d, name, args),
            Value::Set(s) => self.set_method(s, name, args),
            Value::Tuple(t) => match name {
                "count" => {
                    arity(self, name, &args, 1, 1)?;
                    let mut n = 0;
                    for v in t.iter() {
                        if self.eq(v, &args[0])? {
                            n += 1;
                        }
                    }
                    Ok(Value::Int(n))
                }
                "index" => {
                    arity(self, name, &args, 1, 1)?;
                    for (i, v) in t.iter().enumerate() {
                        if self.eq(v, &args[0])? {
                            return Ok(Value::Int(i as i64));
                        }
                    }
                    self.err("ValueError", "tuple.index(x): x not in tuple")
                }
                _ => self.unsupported_method(recv, name),
            },
            Value::Int(_) | Value::Bool(_) => match name {
                "bit_length" => {
                    let i = as_int(recv).unwrap_or(0);
                    Ok(Value::Int(64 - i.unsigned_abs().leading_zeros() as i64))
                }
                "conjugate" => Ok(Value::Int(as_int(recv).unwrap_or(0))),
                "is_integer" => Ok(Value::Bool(true)),
                _ => self.unsupported_method(recv, name),
            },
            Value::Float(x) => match name {
                "is_integer" => Ok(Value::Bool(x.fract() == 0.0)),
                "conjugate" => Ok(Value::Float(*x)),
                _ => self.unsupported_method(recv, name),
            },
            Value::Instance(i) if i.class.base_kind() == ClassKind::Exception => match name {
                "with_traceback" => Ok(recv.clone()),
                _ => self.unsupported_method(recv, name),
            },
            _ => self.unsupported_method(recv, name),
        }
    }

    fn unsupported_method<T>(&self, recv: &Value, name: &str) -> Exec<T> {
        self.err(
            "NotImplementedError",
            format!("'{}.{name}' is not available in this runtime", self.type_name(recv)),
        )
    }

    fn call_dunder(&mut self, recv: &Value, name: &str, args: Vec<Value>) -> Exec<Value> {
        use super::ast::{BinOp, CmpOp};
        const BINOPS: [BinOp; 9] = [
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::FloorDiv,
            BinOp::Mod,
            BinOp::Pow,
            BinOp::BitOr,
            BinOp::BitAnd,
        ];
        const CMPS: [CmpOp; 6] = [CmpOp::Eq, CmpOp::NotEq, CmpOp::Lt, CmpOp::LtE, CmpOp::Gt, CmpOp::GtE];
        let one = |s: &Self| arity(s, name, &args, 1, 1);
        if let Some(op) = BINOPS.iter().find(|o| o.dunder() == name) {
            one(self)?;
            return self.binop(*op, recv, &args[0]);
        }
        if let Some(op) = BINOPS.iter().find(|o| o.reflected() == name) {
            one(self)?;
            return self.binop(*op, &args[0], recv);
        }
        if let Some(op) = CMPS.iter().find(|o| o.dunder() == name) {
            one(self)?;
            return self.compare(*op, recv, &args[0]);
        }
        match name {
            "__len__" => Ok(Value::Int(self.len(recv)? as i64)),
            "__bool__" => Ok(Value::Bool(self.truthy(recv)?)),
            "__str__" => Ok(Value::str(&self.to_str(recv)?)),
            "__repr__" => Ok(Value::str(&self.repr(recv)?)),
            "__contains__" => {
                one(self)?;
                Ok(Value::Bool(self.contains(recv, &args[0])?))
            }
            "__getitem__" => {
                one(self)?;
                self.get_item(recv, &args[0])
            }
            "__setitem__" => {
                arity(self, name, &args, 2, 2)?;
                let mut it = args.into_iter();
                let (k, v) = (it.next().expect("two"), it.next().expect("two"));
                self.set_item(recv, k, v)?;
                Ok(Value::None)
            }
            "__iter__" => Ok(Value::list(self.iterate(recv)?)),
            "__hash__" => match self.hash_key(recv)? {
                HashKey::Int(h) => Ok(Value::Int(h)),
                _ => Ok(Value::Int(recv.address() as i64)),
            },
            "__init__" => Ok(Value::None),
            "__neg__" => self.unary(super::ast::UnaryOp::Neg, recv),
            "__pos__" => self.unary(super::ast::UnaryOp::Pos, recv),
            "__abs__" => self.call_builtin(Builtin::Abs, vec![recv.clone()]),
            "__int__" | "__index__" | "__trunc__" => {
                let c = self.builtins.int.clone();
                self.convert(&c, vec![recv.clone()])
            }
            "__float__" => {
                let c = self.builtins.float.clone();
                self.convert(&c, vec![recv.clone()])
            }
            _ => self.unsupported_method(recv, name),
        }
    }

    fn str_method(&mut self, s: &Rc<str>, name: &str, args: Vec<Value>) -> Exec<Value> {
        let text: &str = s;
        let b = Value::Bool;
        let all = |f: fn(char) -> bool| Value::Bool(!text.is_empty() && text.chars().all(f));
        match name {
            "lower" => Ok(Value::str(&text.to_lowercase())),
            "upper" => Ok(Value::str(&text.to_uppercase())),
            "casefold" => Ok(Value::str(&text.to_lowercase())),
            "swapcase" => Ok(Value::str(
                &text
                    .chars()
                    .map(|c| if c.is_uppercase() { c.to_lowercase().collect::<String>() } else { c.to_uppercase().collect() })
                    .collect::<String>(),
            )),
            "capitalize" => {
                let mut cs = text.chars();
                let out = match cs.next() {
                    Some(f) => f.to_uppercase().collect::<String>() + &cs.as_str().to_lowercase(),
                    None => String::new(),
                };
                Ok(Value::str(&out))
            }
            "title" => {
                let mut out = String::with_capacity(text.len());
                let mut prev_alpha = false;
                for c in text.chars() {
                    if prev_alpha {
                        out.extend(c.to_lowercase());
                    } else {
                        out.extend(c.to_uppercase());
                    }
                    prev_alpha = c.is_alphabetic();
                }
                Ok(Value::str(&out))
            }
            "strip" | "lstrip" | "rstrip" => {
                arity(self, name, &args, 0, 1)?;
                let chars = self.opt_str_arg(&args, 0, &format!("{name} arg"))?;
                let pat = |c: char| match &chars {
                    Some(cs) => cs.contains(c),
                    None => c.is_whitespace(),
                };
                let out = match name {
                    "strip" => text.trim_matches(pat),
                    "lstrip" => text.trim_start_matches(pat),
                    _ => text.trim_end_matches(pat),
                };
                Ok(Value::str(out))
            }
            "split" | "rsplit" => {
                arity(self, name, &args, 0, 2)?;
                let sep = self.opt_str_arg(&args, 0, "must be str or None")?;
                let max = match args.get(1) {
                    Some(m) => self.int_arg(m, "")?,
                    None => -1,
                };
                let parts: Vec<String> = match &sep {
                    Some(sep) if sep.is_empty() => return self.err("ValueError", "empty separator"),
                    Some(sep) => {
                        if max < 0 {
                            text.split(&**sep).map(String::from).collect()
                        } else if name == "split" {
                            text.splitn(max as usize + 1, &**sep).map(String::from).collect()
                        } else {
                            let mut v: Vec<String> = text.rsplitn(max as usize + 1, &**sep).map(String::from).collect();
                            v.reverse();
                            v
                        }
                    }
                    None => {
                        let words: Vec<&str> = text.split_whitespace().collect();
                        if max < 0 || words.len() <= max as usize {
                            words.into_iter().map(String::from).collect()
                        } else if name == "split" {
                            let mut v: Vec<String> = Vec::new();
                            let mut rest = text.trim_start();
                            for _ in 0..max {
                                let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
                                v.push(rest[..end].to_string());
                                rest = rest[end..].trim_start();
                            }
                            v.push(rest.to_string());
                            v
                        } else {
                            let mut v: Vec<String> = Vec::new();
                            let mut rest = text.trim_end();
                            for _ in 0..max {
                                let start = rest.rfind(char::is_whitespace).map(|i| i + 1).unwrap_or(0);
                                v.push(rest[start..].to_string());
                                rest = rest[..start].trim_end();
                            }
                            v.push(rest.to_string());
                            v.reverse();
                            v
                        }
                    }
                };
                Ok(Value::list(parts.iter().map(|p| Value::str(p)).collect()))
            }
            "splitlines" => Ok(Value::list(text.lines().map(Value::str).collect())),
            "join" => {
                arity(self, name, &args, 1, 1)?;
                let items = self.iterate(&args[0])?;
                let mut parts = Vec::with_capacity(items.len());
                for (i, v) in items.iter().enumerate() {
                    match v {
                        Value::Str(x) => parts.push(x.to_string()),
                        other => {
                            return self.err(
                                "TypeError",
                                format!("sequence item {i}: expected str instance, {} found", self.type_name(other)),
                            )
                        }
                    }
                }
                let joined = parts.join(text);
                if joined.len() > MAX_SEQUENCE {
                    return self.err("MemoryError", "");
                }
                Ok(Value::str(&joined))
            }
            "startswith" | "endswith" => {
                arity(self, name, &args, 1, 1)?;
                let affixes = self.affixes(&args[0], name)?;
                let hit = affixes
                    .iter()
                    .any(|a| if name == "startswith" { text.starts_with(&**a) } else { text.ends_with(&**a) });
                Ok(b(hit))
            }
            "removeprefix" | "removesuffix" => {
                arity(self, name, &args, 1, 1)?;
                let a = self.str_arg(&args[0], &format!("{name}() argument"))?;
                let out = if name == "removeprefix" {
                    text.strip_prefix(&*a).unwrap_or(text)
                } else {
                    text.strip_suffix(&*a).unwrap_or(text)
                };
                Ok(Value::str(out))
            }
            "replace" => {
                arity(self, name, &args, 2, 3)?;
                let old = self.str_arg(&args[0], "replace() argument 1")?;
                let new = self.str_arg(&args[1], "replace() argument 2")?;
                let out = match args.get(2) {
                    Some(c) => {
                        let c = self.int_arg(c, "")?;
                        if c < 0 { text.replace(&*old, &new) } else { text.replacen(&*old, &new, c as usize) }
                    }
                    None => text.replace(&*old, &new),
                };
                if out.len() > MAX_SEQUENCE {
                    return self.err("MemoryError", "");
                }
                Ok(Value::str(&out))
            }
            "find" | "rfind" | "index" | "rindex" | "count" => {
                arity(self, name, &args, 1, 1)?;
                let sub = self.str_arg(&args[0], "must be")?;
                if name == "count" {
                    let n = if sub.is_empty() { text.chars().count() + 1 } else { text.matches(&*sub).count() };
                    return Ok(Value::Int(n as i64));
                }
                let pos = if name.starts_with('r') { text.rfind(&*sub) } else { text.find(&*sub) };
                match pos {
                    Some(p) => Ok(Value::Int(text[..p].chars().count() as i64)),
                    None if name.contains("index") => self.err("ValueError", "substring not found"),
                    None => Ok(Value::Int(-1)),
                }
            }
            "partition" | "rpartition" => {
                arity(self, name, &args, 1, 1)?;
                let sep = self.str_arg(&args[0], "must be")?;
                if sep.is_empty() {
                    return self.err("ValueError", "empty separator");
                }
                let pos = if name == "partition" { text.find(&*sep) } else { text.rfind(&*sep) };
                let parts = match pos {
                    Some(p) => [&text[..p], &*sep, &text[p + sep.len()..]],
                    None if name == "partition" => [text, "", ""],
                    None => ["", "", text],
                };
                Ok(Value::tuple(parts.iter().map(|p| Value::str(p)).collect()))
            }
            "zfill" | "ljust" | "rjust" | "center" => {
                arity(self, name, &args, 1, 2)?;
                let width = self.int_arg(&args[0], "")?.clamp(0, MAX_SEQUENCE as i64) as usize;
                let fill = match args.get(1) {
                    Some(f) => {
                        let f = self.str_arg(f, "The fill character")?;
                        if f.chars().count() != 1 {
                            return self.err("TypeError", "The fill character must be exactly one character long");
                        }
                        f.chars().next().expect("one char")
                    }
                    None => if name == "zfill" { '0' } else { ' ' },
                };
                let len = text.chars().count();
                if len >= width {
                    return Ok(Value::Str(s.clone()));
                }
                let pad = width - len;
                let fills = |n: usize| std::iter::repeat_n(fill, n).collect::<String>();
                let out = match name {
                    "ljust" => format!("{text}{}", fills(pad)),
                    "center" => {
                        let left = pad / 2 + (pad & width & 1);
                        format!("{}{text}{}", fills(left), fills(pad - left))
                    }
                    "zfill" if text.starts_with(['+', '-']) => {
                        format!("{}{}{}", &text[..1], fills(pad), &text[1..])
                    }
                    _ => format!("{}{text}", fills(pad)),
                };
                Ok(Value::str(&out))
            }
            "isdigit" | "isdecimal" | "isnumeric" => Ok(all(|c| c.is_ascii_digit())),
            "isalpha" => Ok(all(char::is_alphabetic)),
            "isalnum" => Ok(all(char::is_alphanumeric)),
            "isspace" => Ok(all(char::is_whitespace)),
            "isascii" => Ok(b(text.is_ascii())),
            "isidentifier" => {
                let mut cs = text.chars();
                let ok = cs.next().is_some_and(|c| c.is_alphabetic() || c == '_')
                    && cs.all(|c| c.is_alphanumeric() || c == '_');
                Ok(b(ok))
            }
            "islower" => Ok(b(text.chars().any(char::is_lowercase) && !text.chars().any(char::is_uppercase))),
            "isupper" => Ok(b(text.chars().any(char::is_uppercase) && !text.chars().any(char::is_lowercase))),
            "format" => {
                let mut out = String::new();
                let mut next = 0;
                let mut chars = text.chars().peekable();
                while let Some(c) = chars.next() {
                    match c {
                        '{' if chars.peek() == Some(&'{') => {
                            chars.next();
                            out.push('{');
                        }
                        '}' if chars.peek() == Some(&'}') => {
                            chars.next();
                            out.push('}');
                        }
                        '{' => {
                            let mut field = String::new();
                            for d in chars.by_ref() {
                                if d == '}' {
                                    break;
                                }
                                field.push(d);
                            }
                            let idx = if field.is_empty() {
                                next += 1;
                                next - 1
                            } else {
                                match field.parse::<usize>() {
                                    Ok(i) => i,
                                    Err(_) => return self.err("KeyError", quote_str(&field)),
                                }
                            };
                            let Some(arg) = args.get(idx) else {
                                return self.err("IndexError", format!("Replacement index {idx} out of range"));
                            };
                            out.push_str(&self.to_str(arg)?);
                        }
                        c => out.push(c),
                    }
                }
                Ok(Value::str(&out))
            }
            "encode" => Ok(Value::Str(s.clone())),
            _ => self.unsupported_method(&Value::Str(s.clone()), name),
        }
    }

    fn list_method(&mut self, l: &ListRef, name: &str, args: Vec<Value>) -> Exec<Value> {
        match name {
            "append" => {
                arity(self, name, &args, 1, 1)?;
                if l.borrow().len() >= MAX_SEQUENCE {
                    return self.err("MemoryError", "");
                }
                l.borrow_mut().push(args[0].clone());
                Ok(Value::None)
            }
            "extend" => {
                arity(self, name, &args, 1, 1)?;
                let items = self.iterate(&args[0])?;
                if l.borrow().len() + items.len() > MAX_SEQUENCE {
                    return self.err("MemoryError", "");
                }
                l.borrow_mut().extend(items);
                Ok(Value::None)
            }
            "insert" => {
                arity(self, name, &args, 2, 2)?;
                let n = l.borrow().len() as i64;
                let i = self.int_arg(&args[0], "")?;
                let i = if i < 0 { (i + n).max(0) } else { i.min(n) } as usize;
                l.borrow_mut().insert(i, args[1].clone());
                Ok(Value::None)
            }
            "pop" => {
                arity(self, name, &args, 0, 1)?;
                let n = l.borrow().len();
                if n == 0 {
                    return self.err("IndexError", "pop from empty list");
                }
                let i = match args.first() {
                    Some(i) => {
                        let i = self.int_arg(i, "")?;
                        let j = if i < 0 { i + n as i64 } else { i };
                        if j < 0 || j >= n as i64 {
                            return self.err("IndexError", "pop index out of range");
                        }
                        j as usize
                    }
                    None => n - 1,
                };
                Ok(l.borrow_mut().remove(i))
            }
            "remove" | "index" | "count" => {
                arity(self, name, &args, 1, 1)?;
                let items = l.borrow().clone();
                let mut hits = Vec::new();
                for (i, v) in items.iter().enumerate() {
                    if self.eq(v, &args[0])? {
                        hits.push(i);
                        if name != "count" {
                            break;
                        }
                    }
                }
                match (name, hits.first()) {
                    ("count", _) => Ok(Value::Int(hits.len() as i64)),
                    ("index", Some(i)) => Ok(Value::Int(*i as i64)),
                    ("remove", Some(i)) => {
                        l.borrow_mut().remove(*i);
                        Ok(Value::None)
                    }
                    ("index", None) => {
                        let r = self.repr(&args[0])?;
                        self.err("ValueError", format!("{r} is not in list"))
                    }
                    _ => self.err("ValueError", "list.remove(x): x not in list"),
                }
            }
            "reverse" => {
                l.borrow_mut().reverse();
                Ok(Value::None)
            }
            "sort" => {
                arity(self, name, &args, 0, 0)?;
                let items = l.borrow().clone();
                let sorted = self.sort_values(items, None)?;
                *l.borrow_mut() = sorted;
                Ok(Value::None)
            }
            "copy" => Ok(Value::list(l.borrow().clone())),
            "clear" => {
                l.borrow_mut().clear();
                Ok(Value::None)
            }
            _ => self.unsupported_method(&Value::List(l.clone()), name),
        }
    }

    fn dict_method(&mut self, d: &DictRef, name: &str, args: Vec<Value>) -> Exec<Value> {
        match name {
            "get" => {
                arity(self, name, &args, 1, 2)?;
                let k = self.hash_key(&args[0])?;
                let found = d.borrow().get(&k).map(|(_, v)| v.clone());
                Ok(found.unwrap_or_else(|| args.get(1).cloned().unwrap_or(Value::None)))
            }
            "keys" => Ok(Value::list(d.borrow().values().map(|(k, _)| k.clone()).collect())),
            "values" => Ok(Value::list(d.borrow().values().map(|(_, v)| v.clone()).collect())),
            "items" => Ok(Value::list(
                d.borrow()
                    .values()
                    .map(|(k, v)| Value::tuple(vec![k.clone(), v.clone()]))
                    .collect(),
            )),
            "pop" => {
                arity(self, name, &args, 1, 2)?;
                let k = self.hash_key(&args[0])?;
                let removed = d.borrow_mut().shift_remove(&k);
                match (removed, args.get(1)) {
                    (Some((_, v)), _) => Ok(v),
                    (None, Some(default)) => Ok(default.clone()),
                    (None, None) => {
                        let r = self.repr(&args[0])?;
                        self.err("KeyError", r)
                    }
                }
            }
            "popitem" => match d.borrow_mut().pop() {
                Some((_, (k, v))) => Ok(Value::tuple(vec![k, v])),
                None => self.err("KeyError", "'popitem(): dictionary is empty'"),
            },
            "setdefault" => {
                arity(self, name, &args, 1, 2)?;
                let k = self.hash_key(&args[0])?;
                let default = args.get(1).cloned().unwrap_or(Value::None);
                let mut m = d.borrow_mut();
                let entry = m.entry(k).or_insert_with(|| (args[0].clone(), default));
                Ok(entry.1.clone())
            }
            "update" => {
                arity(self, name, &args, 1, 1)?;
                let pairs: Vec<(Value, Value)> = match args[0].peel() {
                    Value::Dict(o) => o.borrow().values().cloned().collect(),
                    _ => {
                        let mut out = Vec::new();
                        for p in self.iterate(&args[0])? {
                            let kv = self.iterate(&p)?;
                            if kv.len() != 2 {
                                return self.err(
                                    "ValueError",
                                    "dictionary update sequence element has wrong length",
                                );
                            }
                            out.push((kv[0].clone(), kv[1].clone()));
                        }
                        out
                    }
                };
                for (k, v) in pairs {
                    let hk = self.hash_key(&k)?;
                    let mut m = d.borrow_mut();
                    match m.get_mut(&hk) {
                        Some(slot) => slot.1 = v,
                        None => {
                            m.insert(hk, (k, v));
                        }
                    }
                }
                Ok(Value::None)
            }
            "copy" => Ok(Value::Dict(Rc::new(RefCell::new(d.borrow().clone())))),
            "clear" => {
                d.borrow_mut().clear();
                Ok(Value::None)
            }
            _ => self.unsupported_method(&Value::Dict(d.clone()), name),
        }
    }

    fn set_method(&mut self, s: &SetRef, name: &str, args: Vec<Value>) -> Exec<Value> {
        let other_keys = |me: &mut Self, v: &Value| -> Exec<IndexMap<HashKey, Value>> {
            let mut out = IndexMap::new();
            for i in me.iterate(v)? {
                let k = me.hash_key(&i)?;
                out.entry(k).or_insert(i);
            }
            Ok(out)
        };
        let new_set = |m: IndexMap<HashKey, Value>| Value::Set(Rc::new(RefCell::new(m)));
        match name {
            "add" => {
                arity(self, name, &args, 1, 1)?;
                let k = self.hash_key(&args[0])?;
                s.borrow_mut().entry(k).or_insert_with(|| args[0].clone());
                Ok(Value::None)
            }
            "remove" | "discard" => {
                arity(self, name, &args, 1, 1)?;
                let k = self.hash_key(&args[0])?;
                let removed = s.borrow_mut().shift_remove(&k);
                if removed.is_none() && name == "remove" {
                    let r = self.repr(&args[0])?;
                    return self.err("KeyError", r);
                }
                Ok(Value::None)
            }
            "pop" => match s.borrow_mut().shift_remove_index(0) {
                Some((_, v)) => Ok(v),
                None => self.err("KeyError", "'pop from an empty set'"),
            },
            "union" | "update" => {
                let mut out = s.borrow().clone();
                for a in &args {
                    for (k, v) in other_keys(self, a)? {
                        out.entry(k).or_insert(v);
                    }
                }
                if name == "update" {
                    *s.borrow_mut() = out;
                    return Ok(Value::None);
                }
                Ok(new_set(out))
            }
            "intersection" | "difference" | "symmetric_difference" => {
                arity(self, name, &args, 1, 1)?;
                let o = other_keys(self, &args[0])?;
                let mine = s.borrow().clone();
                let out: IndexMap<HashKey, Value> = match name {
                    "intersection" => mine.into_iter().filter(|(k, _)| o.contains_key(k)).collect(),
                    "difference" => mine.into_iter().filter(|(k, _)| !o.contains_key(k)).collect(),
                    _ => {
                        let mut out: IndexMap<HashKey, Value> =
                            mine.iter().filter(|(k, _)| !o.contains_key(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
                        out.extend(o.into_iter().filter(|(k, _)| !mine.contains_key(k)));
                        out
                    }
                };
                Ok(new_set(out))
            }
            "issubset" | "issuperset" | "isdisjoint" => {
                arity(self, name, &args, 1, 1)?;
                let o = other_keys(self, &args[0])?;
                let mine = s.borrow();
                Ok(Value::Bool(match name {
                    "issubset" => mine.keys().all(|k| o.contains_key(k)),
                    "issuperset" => o.keys().all(|k| mine.contains_key(k)),
                    _ => !mine.keys().any(|k| o.contains_key(k)),
                }))
            }
            "copy" => Ok(new_set(s.borrow().clone())),
            "clear" => {
                s.borrow_mut().clear();
                Ok(Value::None)
            }
            _ => self.unsupported_method(&Value::Set(s.clone()), name),
        }
    }

    /// Calls a builtin class such as `int` or `list`.
    pub fn convert(&mut self, c: &Rc<ClassObj>, args: Vec<Value>) -> Exec<Value> {
        let name = c.name.clone();
        match c.kind {
            ClassKind::Int => {
                arity(self, &name, &args, 0, 2)?;
                let Some(v) = args.first() else { return Ok(Value::Int(0)) };
                if let Value::Proxy(p) = v {
                    p.with_node(|n| n.record_method("__int__", None));
                    let inner = p.wrapped.clone();
                    let mut rest = vec![inner];
                    rest.extend(args.iter().skip(1).cloned());
                    return self.convert(c, rest);
                }
                let base = match args.get(1) {
                    Some(b) => Some(self.int_arg(b, "")?),
                    None => None,
                };
                match (v, base) {
                    (Value::Int(i), None) => Ok(Value::Int(*i)),
                    (Value::Bool(b), None) => Ok(Value::Int(*b as i64)),
                    (Value::Float(x), None) => {
                        if x.is_nan() {
                            self.err("ValueError", "cannot convert float NaN to integer")
                        } else if !x.is_finite() || x.abs() >= 9.2e18 {
                            self.err("OverflowError", "cannot convert float infinity to integer")
                        } else {
                            Ok(Value::Int(x.trunc() as i64))
                        }
                    }
                    (Value::Str(s), base) => {
                        let base = base.unwrap_or(10);
                        if !(2..=36).contains(&base) {
                            return self.err("ValueError", "int() base must be >= 2 and <= 36, or 0");
                        }
                        let t: String = s.trim().chars().filter(|c| *c != '_').collect();
                        match i64::from_str_radix(&t, base as u32) {
                            Ok(i) if !t.is_empty() && !s.trim().starts_with('_') => Ok(Value::Int(i)),
                            _ => self.err(
                                "ValueError",
                                format!("invalid literal for int() with base {base}: {}", quote_str(s)),
                            ),
                        }
                    }
                    (Value::Instance(_), None) if self.user_method(v, "__int__").is_some() => {
                        let f = self.user_method(v, "__int__").expect("checked");
                        self.call_function(&f, vec![v.clone()])
                    }
                    (_, Some(_)) => self.err("TypeError", "int() can't convert non-string with explicit base"),
                    (other, None) => self.err(
                        "TypeError",
                        format!(
                            "int() argument must be a string, a bytes-like object or a real number, not '{}'",
                            self.type_name(other)
                        ),
                    ),
                }
            }
            ClassKind::Float => {
                arity(self, &name, &args, 0, 1)?;
                let Some(v) = args.first() else { return Ok(Value::Float(0.0)) };
                match v {
                    Value::Proxy(p) => {
                        p.with_node(|n| n.record_method("__float__", None));
                        self.convert(c, vec![p.wrapped.clone()])
                    }
                    Value::Str(s) => {
                        let t = s.trim().to_lowercase();
                        let parsed = match t.trim_start_matches(['+', '-']) {
                            "inf" | "infinity" | "nan" => t.parse::<f64>().ok(),
                            other if other.chars().all(|c| c.is_ascii_digit() || "._eE+-".contains(c)) => {
                                t.replace('_', "").parse::<f64>().ok()
                            }
                            _ => None,
                        };
                        match parsed {
                            Some(x) => Ok(Value::Float(x)),
                            None => self.err(
                                "ValueError",
                                format!("could not convert string to float: {}", quote_str(s)),
                            ),
                        }
                    }
                    other => match as_float(other) {
                        Some(x) => Ok(Value::Float(x)),
                        None => self.err(
                            "TypeError",
                            format!("float() argument must be a string or a real number, not '{}'", self.type_name(other)),
                        ),
                    },
                }
            }
            ClassKind::Str => {
                arity(self, &name, &args, 0, 1)?;
                match args.first() {
                    Some(v) => Ok(Value::str(&self.to_str(v)?)),
                    None => Ok(Value::str("")),
                }
            }
            ClassKind::Bool => {
                arity(self, &name, &args, 0, 1)?;
                match args.first() {
                    Some(v) => Ok(Value::Bool(self.truthy(v)?)),
                    None => Ok(Value::Bool(false)),
                }
            }
            ClassKind::List => {
                arity(self, &name, &args, 0, 1)?;
                match args.first() {
                    Some(v) => Ok(Value::list(self.iterate(v)?)),
                    None => Ok(Value::list(vec![])),
                }
            }
            ClassKind::Tuple => {
                arity(self, &name, &args, 0, 1)?;
                match args.first() {
                    Some(v) => Ok(Value::tuple(self.iterate(v)?)),
                    None => Ok(Value::tuple(vec![])),
                }
            }
            ClassKind::Set => {
                arity(self, &name, &args, 0, 1)?;
                let items = match args.first() {
                    Some(v) => self.iterate(v)?,
                    None => vec![],
                };
                self.make_set(items)
            }
            ClassKind::Dict => {
                arity(self, &name, &args, 0, 1)?;
                let d = self.make_dict(vec![])?;
                if let (Some(src), Value::Dict(r)) = (args.first(), &d) {
                    self.dict_method(&r.clone(), "update", vec![src.clone()])?;
                }
                Ok(d)
            }
            ClassKind::Type => {
                arity(self, &name, &args, 1, 1)?;
                self.call_builtin(Builtin::Type, args)
            }
            _ => self.err("TypeError", format!("cannot create '{name}' instances")),
        }
    }
}
