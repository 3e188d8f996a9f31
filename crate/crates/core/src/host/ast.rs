//! Syntax tree of the host language.

use std::rc::Rc;

pub type Name = Rc<str>;

#[derive(Debug, Clone)]
pub struct Module {
    pub name: String,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: u32,
    pub col: u32,
}

/// Identifies one predicate of an instrumented code object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Probe {
    pub code: u32,
    pub predicate: u32,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    FunctionDef(Rc<FunctionDef>),
    ClassDef(Rc<ClassDef>),
    If {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
        probe: Option<Probe>,
    },
    While {
        test: Expr,
        body: Vec<Stmt>,
        probe: Option<Probe>,
    },
    For {
        target: Target,
        iter: Expr,
        body: Vec<Stmt>,
        probe: Option<Probe>,
    },
    Return(Option<Expr>),
    Raise(Option<Expr>),
    Assert(Expr, Option<Expr>),
    Assign(Target, Expr),
    AugAssign(Target, BinOp, Expr),
    Expr(Expr),
    Pass,
    Break,
    Continue,
    Import {
        module: String,
        alias: Option<Name>,
    },
    ImportFrom {
        module: String,
        names: Vec<(Name, Option<Name>)>,
    },
}

#[derive(Debug, Clone)]
pub struct Param {
    pub name: Name,
    pub annotation: Option<Expr>,
    pub default: Option<Expr>,
}

#[derive(Debug, Clone)]
pub struct FunctionDef {
    pub name: Name,
    pub params: Vec<Param>,
    pub returns: Option<Expr>,
    pub body: Vec<Stmt>,
    pub line: u32,
    pub col: u32,
    /// Set by instrumentation for code objects of the subject module.
    pub code: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct ClassDef {
    pub name: Name,
    pub bases: Vec<Expr>,
    pub body: Vec<Stmt>,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone)]
pub enum Target {
    Name(Name),
    Attribute(Expr, Name),
    Subscript(Expr, Expr),
    Tuple(Vec<Target>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Const {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Rc<str>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
    BitOr,
    BitAnd,
}

impl BinOp {
    pub fn dunder(self) -> &'static str {
        match self {
            BinOp::Add => "__add__",
            BinOp::Sub => "__sub__",
            BinOp::Mul => "__mul__",
            BinOp::Div => "__truediv__",
            BinOp::FloorDiv => "__floordiv__",
            BinOp::Mod => "__mod__",
            BinOp::Pow => "__pow__",
            BinOp::BitOr => "__or__",
            BinOp::BitAnd => "__and__",
        }
    }

    pub fn reflected(self) -> &'static str {
        match self {
            BinOp::Add => "__radd__",
            BinOp::Sub => "__rsub__",
            BinOp::Mul => "__rmul__",
            BinOp::Div => "__rtruediv__",
            BinOp::FloorDiv => "__rfloordiv__",
            BinOp::Mod => "__rmod__",
            BinOp::Pow => "__rpow__",
            BinOp::BitOr => "__ror__",
            BinOp::BitAnd => "__rand__",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
            BinOp::BitOr => "|",
            BinOp::BitAnd => "&",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    NotEq,
    Lt,
    LtE,
    Gt,
    GtE,
    In,
    NotIn,
    Is,
    IsNot,
}

impl CmpOp {
    pub fn dunder(self) -> &'static str {
        match self {
            CmpOp::Eq => "__eq__",
            CmpOp::NotEq => "__ne__",
            CmpOp::Lt => "__lt__",
            CmpOp::LtE => "__le__",
            CmpOp::Gt => "__gt__",
            CmpOp::GtE => "__ge__",
            CmpOp::In | CmpOp::NotIn => "__contains__",
            CmpOp::Is | CmpOp::IsNot => "",
        }
    }

    /// The method tried on the right operand.
    pub fn reflected(self) -> &'static str {
        match self {
            CmpOp::Lt => "__gt__",
            CmpOp::LtE => "__ge__",
            CmpOp::Gt => "__lt__",
            CmpOp::GtE => "__le__",
            other => other.dunder(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Pos,
    Not,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Name(Name),
    Const(Const),
    Attribute(Box<Expr>, Name),
    Subscript(Box<Expr>, Box<Expr>),
    Slice(Option<Box<Expr>>, Option<Box<Expr>>),
    Call(Box<Expr>, Vec<Expr>),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnaryOp, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    IfExp(Box<Expr>, Box<Expr>, Box<Expr>),
    List(Vec<Expr>),
    Tuple(Vec<Expr>),
    Set(Vec<Expr>),
    Dict(Vec<(Expr, Expr)>),
}

impl Module {
    /// Drops every parameter and return annotation.
    pub fn strip_annotations(&mut self) {
        fn strip(body: &mut [Stmt]) {
            for stmt in body {
                match &mut stmt.kind {
                    StmtKind::FunctionDef(f) => {
                        let f = Rc::make_mut(f);
                        f.returns = None;
                        for p in &mut f.params {
                            p.annotation = None;
                        }
                        strip(&mut f.body);
                    }
                    StmtKind::ClassDef(c) => strip(&mut Rc::make_mut(c).body),
                    StmtKind::If { body, orelse, .. } => {
                        strip(body);
                        strip(orelse);
                    }
                    StmtKind::While { body, .. } | StmtKind::For { body, .. } => strip(body),
                    _ => {}
                }
            }
        }
        strip(&mut self.body);
    }

    /// String, integer and float literals in source order.
    pub fn literals(&self) -> Vec<Const> {
        let mut out = Vec::new();
        for stmt in &self.body {
            collect_stmt(stmt, &mut out);
        }
        out
    }
}

fn collect_stmt(stmt: &Stmt, out: &mut Vec<Const>) {
    match &stmt.kind {
        StmtKind::FunctionDef(f) => {
            for p in &f.params {
                if let Some(d) = &p.default {
                    collect_expr(d, out);
                }
            }
            f.body.iter().for_each(|s| collect_stmt(s, out));
        }
        StmtKind::ClassDef(c) => c.body.iter().for_each(|s| collect_stmt(s, out)),
        StmtKind::If { test, body, orelse, .. } => {
            collect_expr(test, out);
            body.iter().chain(orelse).for_each(|s| collect_stmt(s, out));
        }
        StmtKind::While { test, body, .. } => {
            collect_expr(test, out);
            body.iter().for_each(|s| collect_stmt(s, out));
        }
        StmtKind::For { iter, body, .. } => {
            collect_expr(iter, out);
            body.iter().for_each(|s| collect_stmt(s, out));
        }
        StmtKind::Return(Some(e)) | StmtKind::Raise(Some(e)) | StmtKind::Expr(e) => {
            collect_expr(e, out)
        }
        StmtKind::Assert(e, _) => collect_expr(e, out),
        StmtKind::Assign(_, e) | StmtKind::AugAssign(_, _, e) => collect_expr(e, out),
        _ => {}
    }
}

fn collect_expr(expr: &Expr, out: &mut Vec<Const>) {
    match expr {
        Expr::Const(c @ (Const::Int(_) | Const::Float(_) | Const::Str(_))) => out.push(c.clone()),
        Expr::Const(_) | Expr::Name(_) => {}
        Expr::Attribute(e, _) | Expr::Unary(_, e) => collect_expr(e, out),
        Expr::Subscript(a, b)
        | Expr::BinOp(_, a, b)
        | Expr::And(a, b)
        | Expr::Or(a, b)
        | Expr::Compare(_, a, b) => {
            collect_expr(a, out);
            collect_expr(b, out);
        }
        Expr::Slice(a, b) => {
            for e in [a, b].into_iter().flatten() {
                collect_expr(e, out);
            }
        }
        Expr::Call(f, args) => {
            collect_expr(f, out);
            args.iter().for_each(|a| collect_expr(a, out));
        }
        Expr::IfExp(a, b, c) => {
            collect_expr(a, out);
            collect_expr(b, out);
            collect_expr(c, out);
        }
        Expr::List(items) | Expr::Tuple(items) | Expr::Set(items) => {
            items.iter().for_each(|a| collect_expr(a, out))
        }
        Expr::Dict(items) => {
            for (k, v) in items {
                collect_expr(k, out);
                collect_expr(v, out);
            }
        }
    }
}
