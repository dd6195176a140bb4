//! Arithmetic mini-language for user-supplied coefficient functions.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          // right-associative
//! atom    := number | constant | variable | call | '(' expr ')'
//! call    := name '(' expr (',' expr)* ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-2^2 == -4`, and `2^3^2 == 512`.
//! Implicit multiplication (`3t`) is rejected.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("math domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: String },
    #[error("expected {expected} bound values, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Min,
    Max,
    Pow,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::Min,
        Func::Max,
        Func::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max | Func::Pow => 2,
            _ => 1,
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }
}

/// Expression tree. Variables are stored by slot index into the variable
/// list the expression was parsed against.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Const(Constant),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(op, ..) => op.precedence(),
            Node::Neg(_) => PREC_UNARY,
            Node::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => PREC_UNARY,
            _ => PREC_ATOM,
        }
    }

    fn uses_slot(&self, slot: usize) -> bool {
        match self {
            Node::Var(s) => *s == slot,
            Node::Num(_) | Node::Const(_) => false,
            Node::Neg(inner) => inner.uses_slot(slot),
            Node::Binary(_, l, r) => l.uses_slot(slot) || r.uses_slot(slot),
            Node::Call(_, args) => args.iter().any(|a| a.uses_slot(slot)),
        }
    }
}

/// A parsed, immutable expression. Cheap to clone and safe to share
/// across threads.
#[derive(Clone)]
pub struct Expression {
    source: Arc<str>,
    vars: Arc<[String]>,
    root: Arc<Node>,
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expression")
            .field("source", &self.source)
            .field("vars", &self.vars)
            .finish()
    }
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.root == other.root
    }
}

impl Expression {
    /// Parses `source`, accepting only the identifiers in `allowed_vars`
    /// besides the built-in constants and functions.
    pub fn parse(source: &str, allowed_vars: &[&str]) -> Result<Self, ParseError> {
        if source.trim().is_empty() {
            return Err(ParseError::Empty);
        }
        let tokens = lex(source)?;
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            vars: allowed_vars,
            end: source.len(),
        };
        let root = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(ParseError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", tok.kind.describe()),
            });
        }
        Ok(Self {
            source: source.into(),
            vars: allowed_vars.iter().map(|v| v.to_string()).collect(),
            root: Arc::new(root),
        })
    }

    /// Builds an expression directly from a tree (used by generators and tests).
    pub fn from_node(root: Node, vars: &[&str]) -> Self {
        let vars: Arc<[String]> = vars.iter().map(|v| v.to_string()).collect();
        let source = render(&root, &vars);
        Self {
            source: source.into(),
            vars,
            root: Arc::new(root),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// True when the expression references variable `name`.
    pub fn uses(&self, name: &str) -> bool {
        self.vars
            .iter()
            .position(|v| v == name)
            .is_some_and(|slot| self.root.uses_slot(slot))
    }

    /// Evaluates with values given positionally in the order of `vars()`.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        if values.len() != self.vars.len() {
            return Err(EvalError::Arity {
                expected: self.vars.len(),
                got: values.len(),
            });
        }
        eval_node(&self.root, values, &self.vars)
    }

    /// Evaluates with named bindings. Every variable the expression
    /// actually uses must be bound; unused ones may be omitted.
    pub fn eval_named(&self, bindings: &HashMap<&str, f64>) -> Result<f64, EvalError> {
        let mut values = Vec::with_capacity(self.vars.len());
        for (slot, name) in self.vars.iter().enumerate() {
            match bindings.get(name.as_str()) {
                Some(v) => values.push(*v),
                None if self.root.uses_slot(slot) => return Err(EvalError::Unbound(name.clone())),
                None => values.push(0.0),
            }
        }
        eval_node(&self.root, &values, &self.vars)
    }

    /// Canonical text form; re-parsing it yields an identical tree.
    pub fn pretty(&self) -> String {
        render(&self.root, &self.vars)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Op(c) => format!("operator `{c}`"),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Comma => "`,`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent only when followed by digits, so `2e` stays an error
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                kind: TokenKind::Number(value),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Ident(src[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        let kind = match c {
            '+' | '-' | '*' | '/' | '^' => TokenKind::Op(c),
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            ',' => TokenKind::Comma,
            _ => {
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token { kind, offset: start });
        i += c.len_utf8();
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    vars: &'a [&'a str],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(ParseError::Syntax {
                offset: t.offset,
                message: format!("expected {}, found {}", kind.describe(), t.kind.describe()),
            }),
            None => Err(ParseError::Syntax {
                offset: self.end,
                message: format!("expected {}, found end of input", kind.describe()),
            }),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        self.binary(1)
    }

    /// Precedence climbing over the left-associative levels 1 (`+ -`) and 2 (`* /`).
    fn binary(&mut self, min_prec: u8) -> Result<Node, ParseError> {
        let mut lhs = if min_prec >= 2 { self.unary()? } else { self.binary(2)? };
        loop {
            let op = match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Op('+')) if min_prec == 1 => BinOp::Add,
                Some(TokenKind::Op('-')) if min_prec == 1 => BinOp::Sub,
                Some(TokenKind::Op('*')) if min_prec == 2 => BinOp::Mul,
                Some(TokenKind::Op('/')) if min_prec == 2 => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = if min_prec >= 2 { self.unary()? } else { self.binary(2)? };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Op('-'))) {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Op('^'))) {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let offset = self.offset();
        let Some(tok) = self.bump().cloned() else {
            return Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".into(),
            });
        };
        let node = match tok.kind {
            TokenKind::Number(v) => Node::Num(v),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                inner
            }
            TokenKind::Ident(name) => self.identifier(name, tok.offset)?,
            other => {
                return Err(ParseError::Syntax {
                    offset: tok.offset,
                    message: format!("unexpected {}", other.describe()),
                })
            }
        };
        // reject implicit multiplication such as `3t` or `2(t+1)`
        if let Some(next) = self.peek() {
            if matches!(
                next.kind,
                TokenKind::Number(_) | TokenKind::Ident(_) | TokenKind::LParen
            ) {
                return Err(ParseError::Syntax {
                    offset: next.offset,
                    message: format!(
                        "unexpected {} (implicit multiplication is not supported)",
                        next.kind.describe()
                    ),
                });
            }
        }
        Ok(node)
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Node, ParseError> {
        if let Some(func) = Func::lookup(&name) {
            if !matches!(self.peek().map(|t| &t.kind), Some(TokenKind::LParen)) {
                return Err(ParseError::Syntax {
                    offset: self.offset(),
                    message: format!("function `{name}` must be followed by `(`"),
                });
            }
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Comma)) {
                self.pos += 1;
                args.push(self.expr()?);
            }
            self.expect(TokenKind::RParen)?;
            if args.len() != func.arity() {
                return Err(ParseError::Syntax {
                    offset,
                    message: format!(
                        "function `{name}` takes {} argument(s), got {}",
                        func.arity(),
                        args.len()
                    ),
                });
            }
            return Ok(Node::Call(func, args));
        }
        if let Some(slot) = self.vars.iter().position(|v| *v == name) {
            return Ok(Node::Var(slot));
        }
        match name.as_str() {
            "pi" => Ok(Node::Const(Constant::Pi)),
            "e" => Ok(Node::Const(Constant::E)),
            _ => Err(ParseError::UnknownIdentifier { name, offset }),
        }
    }
}

// ---------------------------------------------------------------------------
// printing

fn render(node: &Node, vars: &[String]) -> String {
    let mut out = String::new();
    write_node(node, vars, &mut out);
    out
}

fn write_child(node: &Node, vars: &[String], parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_node(node, vars, out);
        out.push(')');
    } else {
        write_node(node, vars, out);
    }
}

fn write_node(node: &Node, vars: &[String], out: &mut String) {
    match node {
        Node::Num(v) => {
            // shortest decimal that round-trips, never in exponent form
            let text = format!("{v}");
            out.push_str(&text);
        }
        Node::Const(c) => out.push_str(c.name()),
        Node::Var(slot) => out.push_str(&vars[*slot]),
        Node::Neg(inner) => {
            out.push('-');
            write_child(inner, vars, inner.precedence() < PREC_UNARY, out);
        }
        Node::Binary(op, lhs, rhs) => {
            let prec = op.precedence();
            let (left_parens, right_parens) = if *op == BinOp::Pow {
                (lhs.precedence() <= prec, rhs.precedence() < PREC_UNARY)
            } else {
                (lhs.precedence() < prec, rhs.precedence() <= prec)
            };
            write_child(lhs, vars, left_parens, out);
            if *op == BinOp::Pow {
                out.push('^');
            } else {
                out.push(' ');
                out.push(op.symbol());
                out.push(' ');
            }
            write_child(rhs, vars, right_parens, out);
        }
        Node::Call(func, args) => {
            out.push_str(func.name());
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_node(arg, vars, out);
            }
            out.push(')');
        }
    }
}

// ---------------------------------------------------------------------------
// evaluation

fn domain(node: &Node, vars: &[String], reason: impl Into<String>) -> EvalError {
    EvalError::Domain {
        subexpr: render(node, vars),
        reason: reason.into(),
    }
}

fn eval_node(node: &Node, values: &[f64], vars: &[String]) -> Result<f64, EvalError> {
    let value = match node {
        Node::Num(v) => *v,
        Node::Const(c) => c.value(),
        Node::Var(slot) => values[*slot],
        Node::Neg(inner) => -eval_node(inner, values, vars)?,
        Node::Binary(op, lhs, rhs) => {
            let a = eval_node(lhs, values, vars)?;
            let b = eval_node(rhs, values, vars)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(domain(node, vars, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => power(node, vars, a, b)?,
            }
        }
        Node::Call(func, args) => {
            let x = eval_node(&args[0], values, vars)?;
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Exp => x.exp(),
                Func::Ln => {
                    if x <= 0.0 {
                        return Err(domain(node, vars, format!("ln of non-positive value {x}")));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(domain(node, vars, format!("sqrt of negative value {x}")));
                    }
                    x.sqrt()
                }
                Func::Abs => x.abs(),
                Func::Min => x.min(eval_node(&args[1], values, vars)?),
                Func::Max => x.max(eval_node(&args[1], values, vars)?),
                Func::Pow => {
                    let y = eval_node(&args[1], values, vars)?;
                    power(node, vars, x, y)?
                }
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(node, vars, format!("non-finite result {value}")))
    }
}

fn power(node: &Node, vars: &[String], base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(domain(node, vars, "zero raised to a negative power"));
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(domain(
            node,
            vars,
            format!("negative base {base} raised to non-integer power {exponent}"),
        ));
    }
    Ok(base.powf(exponent))
}
