//! Recursive-descent parser producing [`ast::Module`](super::ast::Module).

use std::rc::Rc;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

pub fn parse_module(name: &str, src: &str) -> Result<Module, SyntaxError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut body = Vec::new();
    while !p.at(&Tok::Eof) {
        if p.eat(&Tok::Newline) {
            continue;
        }
        body.extend(p.statement()?);
    }
    Ok(Module {
        name: name.to_string(),
        body,
    })
}

/// Parses a single expression, as found in string annotations.
pub fn parse_expression(src: &str) -> Result<Expr, SyntaxError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.test()?;
    p.eat(&Tok::Newline);
    if !p.at(&Tok::Eof) {
        return Err(p.error("trailing tokens after expression"));
    }
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const KEYWORDS: [&str; 24] = [
    "def", "class", "if", "elif", "else", "while", "for", "in", "return", "raise", "pass",
    "break", "continue", "import", "from", "as", "and", "or", "not", "is", "None", "True",
    "False", "assert",
];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn token(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn at_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, msg: &str) -> SyntaxError {
        let t = self.token();
        SyntaxError {
            line: t.line,
            col: t.col,
            message: format!("{msg} (found {:?})", t.tok),
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), SyntaxError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{op}`")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{kw}`")))
        }
    }

    fn name(&mut self) -> Result<Name, SyntaxError> {
        match self.peek().clone() {
            Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) => {
                self.advance();
                Ok(n.into())
            }
            _ => Err(self.error("expected a name")),
        }
    }

    fn dotted_name(&mut self) -> Result<String, SyntaxError> {
        let mut s = self.name()?.to_string();
        while self.eat_op(".") {
            s.push('.');
            s.push_str(&self.name()?);
        }
        Ok(s)
    }

    fn statement(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let (line, col) = (self.token().line, self.token().col);
        let stmt = |kind| Stmt { kind, line, col };
        if self.at_op("@") {
            return Err(self.error("decorators are not supported"));
        }
        if self.eat_kw("def") {
            return Ok(vec![stmt(StmtKind::FunctionDef(Rc::new(self.funcdef(line, col)?)))]);
        }
        if self.eat_kw("class") {
            let name = self.name()?;
            let mut bases = Vec::new();
            if self.eat_op("(") {
                while !self.at_op(")") {
                    bases.push(self.test()?);
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op(")")?;
            }
            let body = self.block()?;
            return Ok(vec![stmt(StmtKind::ClassDef(Rc::new(ClassDef {
                name,
                bases,
                body,
                line,
                col,
            })))]);
        }
        if self.eat_kw("if") {
            return Ok(vec![self.if_rest(line, col)?]);
        }
        if self.eat_kw("while") {
            let test = self.named_test()?;
            let body = self.block()?;
            if self.at_kw("else") {
                return Err(self.error("loop else clauses are not supported"));
            }
            return Ok(vec![stmt(StmtKind::While { test, body, probe: None })]);
        }
        if self.eat_kw("for") {
            let target = self.target_list()?;
            self.expect_kw("in")?;
            let iter = self.testlist()?;
            let body = self.block()?;
            if self.at_kw("else") {
                return Err(self.error("loop else clauses are not supported"));
            }
            return Ok(vec![stmt(StmtKind::For { target, iter, body, probe: None })]);
        }
        if self.at_kw("try") || self.at_kw("with") || self.at_kw("lambda") {
            return Err(self.error("unsupported statement"));
        }
        let mut out = vec![self.simple_statement()?];
        while self.eat_op(";") {
            if self.at(&Tok::Newline) {
                break;
            }
            out.push(self.simple_statement()?);
        }
        if !self.eat(&Tok::Newline) && !self.at(&Tok::Eof) {
            return Err(self.error("expected end of statement"));
        }
        Ok(out)
    }

    fn if_rest(&mut self, line: u32, col: u32) -> Result<Stmt, SyntaxError> {
        let test = self.named_test()?;
        let body = self.block()?;
        let orelse = if self.at_kw("elif") {
            let (l, c) = (self.token().line, self.token().col);
            self.advance();
            vec![self.if_rest(l, c)?]
        } else if self.eat_kw("else") {
            self.block()?
        } else {
            Vec::new()
        };
        Ok(Stmt {
            kind: StmtKind::If { test, body, orelse, probe: None },
            line,
            col,
        })
    }

    fn funcdef(&mut self, line: u32, col: u32) -> Result<FunctionDef, SyntaxError> {
        let name = self.name()?;
        self.expect_op("(")?;
        let mut params: Vec<Param> = Vec::new();
        while !self.at_op(")") {
            if self.at_op("*") || self.at_op("**") || self.at_op("/") {
                return Err(self.error("variadic and keyword-only parameters are not supported"));
            }
            let pname = self.name()?;
            if params.iter().any(|p| p.name == pname) {
                return Err(self.error("duplicate parameter name"));
            }
            let annotation = if self.eat_op(":") { Some(self.test()?) } else { None };
            let default = if self.eat_op("=") { Some(self.test()?) } else { None };
            params.push(Param {
                name: pname,
                annotation,
                default,
            });
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        let returns = if self.eat_op("->") { Some(self.test()?) } else { None };
        let body = self.block()?;
        Ok(FunctionDef {
            name,
            params,
            returns,
            body,
            line,
            col,
            code: None,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect_op(":")?;
        if !self.eat(&Tok::Newline) {
            let mut out = vec![self.simple_statement()?];
            while self.eat_op(";") {
                if self.at(&Tok::Newline) {
                    break;
                }
                out.push(self.simple_statement()?);
            }
            if !self.eat(&Tok::Newline) && !self.at(&Tok::Eof) {
                return Err(self.error("expected end of statement"));
            }
            return Ok(out);
        }
        if !self.eat(&Tok::Indent) {
            return Err(self.error("expected an indented block"));
        }
        let mut body = Vec::new();
        while !self.eat(&Tok::Dedent) {
            if self.at(&Tok::Eof) {
                break;
            }
            if self.eat(&Tok::Newline) {
                continue;
            }
            body.extend(self.statement()?);
        }
        Ok(body)
    }

    fn simple_statement(&mut self) -> Result<Stmt, SyntaxError> {
        let (line, col) = (self.token().line, self.token().col);
        let kind = if self.eat_kw("pass") {
            StmtKind::Pass
        } else if self.eat_kw("break") {
            StmtKind::Break
        } else if self.eat_kw("continue") {
            StmtKind::Continue
        } else if self.eat_kw("return") {
            if self.at(&Tok::Newline) || self.at_op(";") {
                StmtKind::Return(None)
            } else {
                StmtKind::Return(Some(self.testlist()?))
            }
        } else if self.eat_kw("raise") {
            if self.at(&Tok::Newline) {
                StmtKind::Raise(None)
            } else {
                let e = self.test()?;
                if self.eat_kw("from") {
                    self.test()?;
                }
                StmtKind::Raise(Some(e))
            }
        } else if self.eat_kw("assert") {
            let e = self.test()?;
            let msg = if self.eat_op(",") { Some(self.test()?) } else { None };
            StmtKind::Assert(e, msg)
        } else if self.eat_kw("import") {
            let module = self.dotted_name()?;
            let alias = if self.eat_kw("as") { Some(self.name()?) } else { None };
            if self.at_op(",") {
                return Err(self.error("one module per import statement"));
            }
            StmtKind::Import { module, alias }
        } else if self.eat_kw("from") {
            let mut module = String::new();
            while self.eat_op(".") {
                module.push('.');
            }
            if !self.at_kw("import") {
                module.push_str(&self.dotted_name()?);
            }
            self.expect_kw("import")?;
            let paren = self.eat_op("(");
            let mut names = Vec::new();
            loop {
                if self.eat_op("*") {
                    return Err(self.error("star imports are not supported"));
                }
                let n = self.name()?;
                let alias = if self.eat_kw("as") { Some(self.name()?) } else { None };
                names.push((n, alias));
                if !self.eat_op(",") || (paren && self.at_op(")")) {
                    break;
                }
            }
            if paren {
                self.expect_op(")")?;
            }
            StmtKind::ImportFrom { module, names }
        } else if self.at_kw("global") || self.at_kw("nonlocal") || self.at_kw("del") {
            return Err(self.error("unsupported statement"));
        } else {
            let first = self.testlist()?;
            if self.eat_op("=") {
                let value = self.testlist()?;
                if self.at_op("=") {
                    return Err(self.error("chained assignment is not supported"));
                }
                StmtKind::Assign(self.to_target(first)?, value)
            } else if self.at_op(":") {
                // annotated assignment; the annotation is informational
                self.advance();
                self.test()?;
                if self.eat_op("=") {
                    StmtKind::Assign(self.to_target(first)?, self.testlist()?)
                } else {
                    StmtKind::Pass
                }
            } else if let Some(op) = self.aug_op() {
                let value = self.testlist()?;
                StmtKind::AugAssign(self.to_target(first)?, op, value)
            } else {
                StmtKind::Expr(first)
            }
        };
        Ok(Stmt { kind, line, col })
    }

    fn aug_op(&mut self) -> Option<BinOp> {
        let op = match self.peek() {
            Tok::Op("+=") => BinOp::Add,
            Tok::Op("-=") => BinOp::Sub,
            Tok::Op("*=") => BinOp::Mul,
            Tok::Op("/=") => BinOp::Div,
            Tok::Op("//=") => BinOp::FloorDiv,
            Tok::Op("%=") => BinOp::Mod,
            Tok::Op("**=") => BinOp::Pow,
            Tok::Op("|=") => BinOp::BitOr,
            Tok::Op("&=") => BinOp::BitAnd,
            _ => return None,
        };
        self.advance();
        Some(op)
    }

    fn to_target(&self, e: Expr) -> Result<Target, SyntaxError> {
        Ok(match e {
            Expr::Name(n) => Target::Name(n),
            Expr::Attribute(obj, n) => Target::Attribute(*obj, n),
            Expr::Subscript(obj, idx) => Target::Subscript(*obj, *idx),
            Expr::Tuple(items) | Expr::List(items) => Target::Tuple(
                items
                    .into_iter()
                    .map(|i| self.to_target(i))
                    .collect::<Result<_, _>>()?,
            ),
            _ => return Err(self.error("invalid assignment target")),
        })
    }

    fn target_list(&mut self) -> Result<Target, SyntaxError> {
        let mut items = vec![self.bitor()?];
        let mut tuple = false;
        while self.eat_op(",") {
            tuple = true;
            if self.at_kw("in") {
                break;
            }
            items.push(self.bitor()?);
        }
        let e = if tuple { Expr::Tuple(items) } else { items.pop().expect("one item") };
        self.to_target(e)
    }

    fn testlist(&mut self) -> Result<Expr, SyntaxError> {
        let first = self.test()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.ends_expression() {
                break;
            }
            items.push(self.test()?);
        }
        Ok(Expr::Tuple(items))
    }

    fn ends_expression(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Eof)
            || matches!(self.peek(), Tok::Op(o) if matches!(*o, ")" | "]" | "}" | "=" | ":" | ";"))
    }

    fn named_test(&mut self) -> Result<Expr, SyntaxError> {
        let e = self.test()?;
        if self.at_op(":=") {
            return Err(self.error("assignment expressions are not supported"));
        }
        Ok(e)
    }

    fn test(&mut self) -> Result<Expr, SyntaxError> {
        if self.at_kw("lambda") {
            return Err(self.error("lambda is not supported"));
        }
        let body = self.or_test()?;
        if self.eat_kw("if") {
            let cond = self.or_test()?;
            self.expect_kw("else")?;
            let orelse = self.test()?;
            return Ok(Expr::IfExp(Box::new(cond), Box::new(body), Box::new(orelse)));
        }
        Ok(body)
    }

    fn or_test(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.and_test()?;
        while self.eat_kw("or") {
            let r = self.and_test()?;
            e = Expr::Or(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn and_test(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.not_test()?;
        while self.eat_kw("and") {
            let r = self.not_test()?;
            e = Expr::And(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn not_test(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat_kw("not") {
            let e = self.not_test()?;
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(e)));
        }
        self.comparison()
    }

    fn comp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Tok::Op("==") => CmpOp::Eq,
            Tok::Op("!=") => CmpOp::NotEq,
            Tok::Op("<") => CmpOp::Lt,
            Tok::Op("<=") => CmpOp::LtE,
            Tok::Op(">") => CmpOp::Gt,
            Tok::Op(">=") => CmpOp::GtE,
            Tok::Name(n) if n == "in" => CmpOp::In,
            Tok::Name(n) if n == "is" => {
                if matches!(self.peek_at(1), Tok::Name(m) if m == "not") {
                    self.advance();
                    CmpOp::IsNot
                } else {
                    CmpOp::Is
                }
            }
            Tok::Name(n) if n == "not" && matches!(self.peek_at(1), Tok::Name(m) if m == "in") => {
                self.advance();
                CmpOp::NotIn
            }
            _ => return None,
        };
        self.advance();
        Some(op)
    }

    fn comparison(&mut self) -> Result<Expr, SyntaxError> {
        let first = self.bitor()?;
        let mut pairs = Vec::new();
        while let Some(op) = self.comp_op() {
            pairs.push((op, self.bitor()?));
        }
        if pairs.is_empty() {
            return Ok(first);
        }
        // `a < b < c` becomes `a < b and b < c`
        let mut left = first;
        let mut result: Option<Expr> = None;
        for (op, right) in pairs {
            let cmp = Expr::Compare(op, Box::new(left), Box::new(right.clone()));
            result = Some(match result {
                None => cmp,
                Some(prev) => Expr::And(Box::new(prev), Box::new(cmp)),
            });
            left = right;
        }
        Ok(result.expect("at least one comparison"))
    }

    fn bitor(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.bitand()?;
        while self.eat_op("|") {
            let r = self.bitand()?;
            e = Expr::BinOp(BinOp::BitOr, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn bitand(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.arith()?;
        while self.eat_op("&") {
            let r = self.arith()?;
            e = Expr::BinOp(BinOp::BitAnd, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn arith(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.term()?;
        loop {
            let op = if self.eat_op("+") {
                BinOp::Add
            } else if self.eat_op("-") {
                BinOp::Sub
            } else {
                break;
            };
            let r = self.term()?;
            e = Expr::BinOp(op, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.factor()?;
        loop {
            let op = if self.eat_op("*") {
                BinOp::Mul
            } else if self.eat_op("/") {
                BinOp::Div
            } else if self.eat_op("//") {
                BinOp::FloorDiv
            } else if self.eat_op("%") {
                BinOp::Mod
            } else {
                break;
            };
            let r = self.factor()?;
            e = Expr::BinOp(op, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat_op("-") {
            let e = self.factor()?;
            return Ok(match e {
                Expr::Const(Const::Int(i)) => Expr::Const(Const::Int(-i)),
                Expr::Const(Const::Float(f)) => Expr::Const(Const::Float(-f)),
                e => Expr::Unary(UnaryOp::Neg, Box::new(e)),
            });
        }
        if self.eat_op("+") {
            let e = self.factor()?;
            return Ok(Expr::Unary(UnaryOp::Pos, Box::new(e)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.atom_expr()?;
        if self.eat_op("**") {
            let exp = self.factor()?;
            return Ok(Expr::BinOp(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.atom()?;
        loop {
            if self.eat_op("(") {
                let mut args = Vec::new();
                while !self.at_op(")") {
                    if self.at_op("*") || self.at_op("**") {
                        return Err(self.error("argument unpacking is not supported"));
                    }
                    if matches!(self.peek(), Tok::Name(_)) && matches!(self.peek_at(1), Tok::Op("=")) {
                        return Err(self.error("keyword arguments are not supported"));
                    }
                    args.push(self.test()?);
                    if self.at_kw("for") {
                        return Err(self.error("generator expressions are not supported"));
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op(")")?;
                e = Expr::Call(Box::new(e), args);
            } else if self.eat_op("[") {
                let idx = self.subscript()?;
                self.expect_op("]")?;
                e = Expr::Subscript(Box::new(e), Box::new(idx));
            } else if self.eat_op(".") {
                let n = self.name()?;
                e = Expr::Attribute(Box::new(e), n);
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn subscript(&mut self) -> Result<Expr, SyntaxError> {
        let lower = if self.at_op(":") { None } else { Some(self.test()?) };
        if self.eat_op(":") {
            let upper = if self.at_op("]") { None } else { Some(Box::new(self.test()?)) };
            return Ok(Expr::Slice(lower.map(Box::new), upper));
        }
        let first = lower.expect("lower present");
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.test()?);
        }
        Ok(Expr::Tuple(items))
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let tok = self.peek().clone();
        match tok {
            Tok::Int(i) => {
                self.advance();
                Ok(Expr::Const(Const::Int(i)))
            }
            Tok::Float(f) => {
                self.advance();
                Ok(Expr::Const(Const::Float(f)))
            }
            Tok::Str(s) => {
                self.advance();
                let mut s = s;
                while let Tok::Str(more) = self.peek().clone() {
                    self.advance();
                    s.push_str(&more);
                }
                Ok(Expr::Const(Const::Str(s.into())))
            }
            Tok::Name(n) if n == "None" => {
                self.advance();
                Ok(Expr::Const(Const::None))
            }
            Tok::Name(n) if n == "True" || n == "False" => {
                self.advance();
                Ok(Expr::Const(Const::Bool(n == "True")))
            }
            Tok::Name(_) => Ok(Expr::Name(self.name()?)),
            Tok::Op(".") if matches!(self.peek_at(1), Tok::Op(".")) && matches!(self.peek_at(2), Tok::Op(".")) => {
                self.advance();
                self.advance();
                self.advance();
                Ok(Expr::Name("...".into()))
            }
            Tok::Op("(") => {
                self.advance();
                if self.eat_op(")") {
                    return Ok(Expr::Tuple(Vec::new()));
                }
                let first = self.test()?;
                if self.at_kw("for") {
                    return Err(self.error("generator expressions are not supported"));
                }
                if self.eat_op(")") {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat_op(",") {
                    if self.at_op(")") {
                        break;
                    }
                    items.push(self.test()?);
                }
                self.expect_op(")")?;
                Ok(Expr::Tuple(items))
            }
            Tok::Op("[") => {
                self.advance();
                let items = self.items_until("]")?;
                Ok(Expr::List(items))
            }
            Tok::Op("{") => {
                self.advance();
                if self.eat_op("}") {
                    return Ok(Expr::Dict(Vec::new()));
                }
                let first = self.test()?;
                if self.eat_op(":") {
                    let v = self.test()?;
                    let mut pairs = vec![(first, v)];
                    while self.eat_op(",") {
                        if self.at_op("}") {
                            break;
                        }
                        let k = self.test()?;
                        self.expect_op(":")?;
                        pairs.push((k, self.test()?));
                    }
                    if self.at_kw("for") {
                        return Err(self.error("comprehensions are not supported"));
                    }
                    self.expect_op("}")?;
                    return Ok(Expr::Dict(pairs));
                }
                let mut items = vec![first];
                while self.eat_op(",") {
                    if self.at_op("}") {
                        break;
                    }
                    items.push(self.test()?);
                }
                if self.at_kw("for") {
                    return Err(self.error("comprehensions are not supported"));
                }
                self.expect_op("}")?;
                Ok(Expr::Set(items))
            }
            _ => Err(self.error("expected an expression")),
        }
    }

    fn items_until(&mut self, close: &str) -> Result<Vec<Expr>, SyntaxError> {
        let mut items = Vec::new();
        while !self.at_op(close) {
            items.push(self.test()?);
            if self.at_kw("for") {
                return Err(self.error("comprehensions are not supported"));
            }
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(close)?;
        Ok(items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_function_with_annotations_and_defaults() {
        let m = parse_module("m", "def f(a: int, b=2) -> str:\n    return a\n").unwrap();
        let StmtKind::FunctionDef(f) = &m.body[0].kind else { panic!() };
        assert_eq!(&*f.name, "f");
        assert_eq!(f.params.len(), 2);
        assert!(f.params[0].annotation.is_some());
        assert!(f.params[1].default.is_some());
        assert!(f.returns.is_some());
    }

    #[test]
    fn elif_nests_into_orelse() {
        let m = parse_module("m", "if a:\n    pass\nelif b:\n    pass\nelse:\n    pass\n").unwrap();
        let StmtKind::If { orelse, .. } = &m.body[0].kind else { panic!() };
        assert!(matches!(orelse[0].kind, StmtKind::If { .. }));
    }

    #[test]
    fn chained_comparison_desugars() {
        let e = parse_expression("1 < x <= 3").unwrap();
        assert!(matches!(e, Expr::And(..)));
    }

    #[test]
    fn not_in_and_is_not() {
        assert!(matches!(parse_expression("a not in b").unwrap(), Expr::Compare(CmpOp::NotIn, ..)));
        assert!(matches!(parse_expression("a is not None").unwrap(), Expr::Compare(CmpOp::IsNot, ..)));
    }

    #[test]
    fn class_with_bases_and_tuple_unpacking() {
        let src = "class A(B):\n    x = 1\n    def m(self):\n        a, b = 1, 2\n";
        let m = parse_module("m", src).unwrap();
        let StmtKind::ClassDef(c) = &m.body[0].kind else { panic!() };
        assert_eq!(c.bases.len(), 1);
        assert_eq!(c.body.len(), 2);
    }

    #[test]
    fn unsupported_constructs_are_rejected() {
        assert!(parse_module("m", "f(x=1)\n").is_err());
        assert!(parse_module("m", "try:\n    pass\n").is_err());
        assert!(parse_module("m", "[x for x in y]\n").is_err());
    }

    #[test]
    fn slices_and_ellipsis() {
        assert!(matches!(parse_expression("a[1:]").unwrap(), Expr::Subscript(..)));
        let e = parse_expression("tuple[int, ...]").unwrap();
        let Expr::Subscript(_, idx) = e else { panic!() };
        assert!(matches!(*idx, Expr::Tuple(ref items) if items.len() == 2));
    }
}
