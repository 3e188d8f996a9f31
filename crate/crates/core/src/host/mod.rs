//! An embedded interpreter for the Python subset the generator tests.
//!
//! Supported: functions with positional parameters, annotations and
//! defaults; classes with (multiple) inheritance and user dunder methods;
//! `if`/`while`/`for`; `raise`/`assert`; imports of sibling modules; the
//! usual expressions over `None`, `bool`, `int`, `float`, `str`, `list`,
//! `tuple`, `dict` and `set`. Not supported: exception handlers, keyword
//! arguments, closures, comprehensions, generators, decorators.

pub mod ast;
mod builtins;
mod interp;
pub mod lexer;
mod ops;
pub mod parser;
mod value;

use thiserror::Error;

pub use builtins::native_attributes;
pub use interp::{
    branch_distance, levenshtein, Builtins, CoverageSink, Exec, Interp, Loader, TypeMap, Unwind, MAX_CALL_DEPTH,
};
pub use parser::{parse_expression, parse_module};
pub use value::{
    format_float, quote_str, Builtin, ClassKind, ClassObj, Function, HashKey, Instance, ModuleObj, ProxyObj,
    Value,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[cfg(test)]
mod tests;
