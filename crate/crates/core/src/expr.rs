//! A small arithmetic-expression language for curve equations, matrix
//! entries and rational maps.
//!
//! Grammar: integers, names, `+ - * ·`, `^` (right associative) and
//! parentheses. Exponents are integer expressions over the scenario
//! parameters and are resolved when compiling, so `x^(q+1)` is a single
//! power node.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gf::{FieldCtx, FieldElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("parse error in `{src}` at byte {pos}: {msg}")]
    Parse { src: String, pos: usize, msg: String },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("exponent `{0}` is not a non-negative integer expression over parameters")]
    BadExponent(String),
    #[error("definition cycle through `{0}`")]
    DefinitionCycle(String),
    #[error("polynomial in `{0}` has too many terms to expand")]
    TooManyTerms(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ast {
    Num(u64),
    Name(String),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
}

impl std::fmt::Display for Ast {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ast::Num(n) => write!(f, "{n}"),
            Ast::Name(s) => write!(f, "{s}"),
            Ast::Add(a, b) => write!(f, "({a}+{b})"),
            Ast::Sub(a, b) => write!(f, "({a}-{b})"),
            Ast::Mul(a, b) => write!(f, "{a}*{b}"),
            Ast::Neg(a) => write!(f, "-{a}"),
            Ast::Pow(a, b) => write!(f, "{a}^{b}"),
        }
    }
}

struct Parser<'s> {
    src: &'s str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl<'s> Parser<'s> {
    fn err(&self, msg: &str) -> ExprError {
        let byte = self.chars.get(self.pos).map_or(self.src.len(), |c| c.0);
        ExprError::Parse {
            src: self.src.to_string(),
            pos: byte,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.1.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn expr(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some('-') => {
                    self.pos += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.unary()?;
        while matches!(self.peek(), Some('*') | Some('·')) {
            self.pos += 1;
            lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast, ExprError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Ast::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, ExprError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let mut v: u64 = 0;
                while let Some(d) = self.chars.get(self.pos).and_then(|c| c.1.to_digit(10)) {
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(d as u64))
                        .ok_or_else(|| self.err("integer literal overflow"))?;
                    self.pos += 1;
                }
                Ok(Ast::Num(v))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.1.is_alphanumeric() || c.1 == '_')
                {
                    self.pos += 1;
                }
                Ok(Ast::Name(self.chars[start..self.pos].iter().map(|c| c.1).collect()))
            }
            _ => Err(self.err("expected a number, name or `(`")),
        }
    }
}

pub fn parse(src: &str) -> Result<Ast, ExprError> {
    let mut p = Parser {
        src,
        chars: src.char_indices().collect(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// Parses `lhs = rhs` as `lhs - rhs`; a bare expression is taken as `= 0`.
pub fn parse_equation(src: &str) -> Result<Ast, ExprError> {
    match src.split_once('=') {
        Some((l, r)) => Ok(Ast::Sub(Box::new(parse(l)?), Box::new(parse(r)?))),
        None => parse(src),
    }
}

/// Integer evaluation over parameters, used for exponents.
pub fn eval_int(ast: &Ast, params: &BTreeMap<String, i64>) -> Option<i64> {
    Some(match ast {
        Ast::Num(n) => i64::try_from(*n).ok()?,
        Ast::Name(s) => *params.get(s)?,
        Ast::Add(a, b) => eval_int(a, params)?.checked_add(eval_int(b, params)?)?,
        Ast::Sub(a, b) => eval_int(a, params)?.checked_sub(eval_int(b, params)?)?,
        Ast::Mul(a, b) => eval_int(a, params)?.checked_mul(eval_int(b, params)?)?,
        Ast::Neg(a) => -eval_int(a, params)?,
        Ast::Pow(a, b) => {
            let e = u32::try_from(eval_int(b, params)?).ok()?;
            eval_int(a, params)?.checked_pow(e)?
        }
    })
}

/// Name resolution context for [`compile`].
#[derive(Clone, Copy)]
pub struct Scope<'a> {
    pub ctx: &'a FieldCtx,
    pub params: &'a BTreeMap<String, i64>,
    pub consts: &'a BTreeMap<String, FieldElem>,
    pub defs: &'a BTreeMap<String, Ast>,
    pub vars: &'a [String],
}

/// Compiled expression, evaluated directly without expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Const(FieldElem),
    Var(usize),
    Add(Vec<Node>),
    Mul(Vec<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, u64),
}

impl Node {
    pub fn eval(&self, ctx: &FieldCtx, vals: &[FieldElem]) -> FieldElem {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => vals[*i],
            Node::Add(xs) => xs
                .iter()
                .fold(FieldElem::ZERO, |acc, x| ctx.add(acc, x.eval(ctx, vals))),
            Node::Mul(xs) => {
                let mut acc = ctx.one();
                for x in xs {
                    acc = ctx.mul(acc, x.eval(ctx, vals));
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            Node::Neg(x) => ctx.neg(x.eval(ctx, vals)),
            Node::Pow(x, e) => ctx.pow(x.eval(ctx, vals), *e),
        }
    }

    pub fn is_const(&self) -> bool {
        match self {
            Node::Const(_) => true,
            Node::Var(_) => false,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().all(Node::is_const),
            Node::Neg(x) | Node::Pow(x, _) => x.is_const(),
        }
    }

    /// Highest variable slot referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Add(xs) | Node::Mul(xs) => xs.iter().filter_map(Node::max_var).max(),
            Node::Neg(x) | Node::Pow(x, _) => x.max_var(),
        }
    }
}

pub fn compile(ast: &Ast, scope: &Scope) -> Result<Node, ExprError> {
    let mut stack = Vec::new();
    let node = compile_inner(ast, scope, &mut stack)?;
    Ok(fold(node, scope.ctx))
}

pub fn compile_str(src: &str, scope: &Scope) -> Result<Node, ExprError> {
    compile(&parse(src)?, scope)
}

/// Compiles and evaluates a variable-free expression.
pub fn const_value(src: &str, scope: &Scope) -> Result<FieldElem, ExprError> {
    let node = compile_str(src, scope)?;
    if !node.is_const() {
        return Err(ExprError::UnknownName(src.to_string()));
    }
    Ok(node.eval(scope.ctx, &[]))
}

fn compile_inner(ast: &Ast, scope: &Scope, stack: &mut Vec<String>) -> Result<Node, ExprError> {
    Ok(match ast {
        Ast::Num(n) => Node::Const(scope.ctx.from_int((*n % scope.ctx.p() as u64) as i64)),
        Ast::Name(s) => {
            if let Some(i) = scope.vars.iter().position(|v| v == s) {
                Node::Var(i)
            } else if let Some(def) = scope.defs.get(s) {
                if stack.contains(s) {
                    return Err(ExprError::DefinitionCycle(s.clone()));
                }
                stack.push(s.clone());
                let n = compile_inner(def, scope, stack)?;
                stack.pop();
                n
            } else if let Some(c) = scope.consts.get(s) {
                Node::Const(*c)
            } else if let Some(v) = scope.params.get(s) {
                Node::Const(scope.ctx.from_int(*v))
            } else {
                return Err(ExprError::UnknownName(s.clone()));
            }
        }
        Ast::Add(a, b) => Node::Add(vec![
            compile_inner(a, scope, stack)?,
            compile_inner(b, scope, stack)?,
        ]),
        Ast::Sub(a, b) => Node::Add(vec![
            compile_inner(a, scope, stack)?,
            Node::Neg(Box::new(compile_inner(b, scope, stack)?)),
        ]),
        Ast::Mul(a, b) => Node::Mul(vec![
            compile_inner(a, scope, stack)?,
            compile_inner(b, scope, stack)?,
        ]),
        Ast::Neg(a) => Node::Neg(Box::new(compile_inner(a, scope, stack)?)),
        Ast::Pow(a, b) => {
            let e = eval_int(b, scope.params)
                .filter(|&e| e >= 0)
                .ok_or_else(|| ExprError::BadExponent(b.to_string()))?;
            Node::Pow(Box::new(compile_inner(a, scope, stack)?), e as u64)
        }
    })
}

/// Flattens nested sums/products and folds constant subtrees.
fn fold(node: Node, ctx: &FieldCtx) -> Node {
    match node {
        Node::Add(xs) => {
            let mut out = Vec::new();
            for x in xs {
                match fold(x, ctx) {
                    Node::Add(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            let c = out.iter().all(Node::is_const);
            let n = Node::Add(out);
            if c {
                Node::Const(n.eval(ctx, &[]))
            } else {
                n
            }
        }
        Node::Mul(xs) => {
            let mut out = Vec::new();
            for x in xs {
                match fold(x, ctx) {
                    Node::Mul(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            let c = out.iter().all(Node::is_const);
            let n = Node::Mul(out);
            if c {
                Node::Const(n.eval(ctx, &[]))
            } else {
                n
            }
        }
        Node::Neg(x) => {
            let x = fold(*x, ctx);
            match x {
                Node::Const(c) => Node::Const(ctx.neg(c)),
                other => Node::Neg(Box::new(other)),
            }
        }
        Node::Pow(x, e) => {
            let x = fold(*x, ctx);
            match x {
                Node::Const(c) => Node::Const(ctx.pow(c, e)),
                other => Node::Pow(Box::new(other), e),
            }
        }
        other => other,
    }
}

/// Sparse univariate polynomial: exponent -> coefficient.
pub type UniPoly = BTreeMap<u64, FieldElem>;

const MAX_TERMS: usize = 4096;

/// Expands a node that uses only variable slot `var` into a sparse
/// polynomial. Other slots are rejected.
pub fn expand_univariate(node: &Node, var: usize, ctx: &FieldCtx) -> Result<UniPoly, ExprError> {
    let name = format!("#{var}");
    let r = match node {
        Node::Const(c) => mono(0, *c),
        Node::Var(i) if *i == var => mono(1, ctx.one()),
        Node::Var(_) => return Err(ExprError::UnknownName(name)),
        Node::Add(xs) => {
            let mut acc = UniPoly::new();
            for x in xs {
                acc = poly_add(ctx, &acc, &expand_univariate(x, var, ctx)?);
            }
            acc
        }
        Node::Mul(xs) => {
            let mut acc = mono(0, ctx.one());
            for x in xs {
                acc = poly_mul(ctx, &acc, &expand_univariate(x, var, ctx)?);
            }
            acc
        }
        Node::Neg(x) => expand_univariate(x, var, ctx)?
            .into_iter()
            .map(|(e, c)| (e, ctx.neg(c)))
            .collect(),
        Node::Pow(x, e) => {
            let base = expand_univariate(x, var, ctx)?;
            if base.len() == 1 {
                let (&k, &c) = base.iter().next().unwrap();
                mono(k * e, ctx.pow(c, *e))
            } else {
                let mut acc = mono(0, ctx.one());
                for _ in 0..*e {
                    acc = poly_mul(ctx, &acc, &base);
                    if acc.len() > MAX_TERMS {
                        return Err(ExprError::TooManyTerms(name));
                    }
                }
                acc
            }
        }
    };
    if r.len() > MAX_TERMS {
        return Err(ExprError::TooManyTerms(name));
    }
    Ok(r)
}

fn mono(e: u64, c: FieldElem) -> UniPoly {
    let mut m = UniPoly::new();
    if !c.is_zero() {
        m.insert(e, c);
    }
    m
}

fn poly_add(ctx: &FieldCtx, a: &UniPoly, b: &UniPoly) -> UniPoly {
    let mut out = a.clone();
    for (&e, &c) in b {
        let v = ctx.add(out.get(&e).copied().unwrap_or(FieldElem::ZERO), c);
        if v.is_zero() {
            out.remove(&e);
        } else {
            out.insert(e, v);
        }
    }
    out
}

fn poly_mul(ctx: &FieldCtx, a: &UniPoly, b: &UniPoly) -> UniPoly {
    let mut out = UniPoly::new();
    for (&ea, &ca) in a {
        for (&eb, &cb) in b {
            let v = ctx.add(
                out.get(&(ea + eb)).copied().unwrap_or(FieldElem::ZERO),
                ctx.mul(ca, cb),
            );
            if v.is_zero() {
                out.remove(&(ea + eb));
            } else {
                out.insert(ea + eb, v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixture {
        ctx: FieldCtx,
        params: BTreeMap<String, i64>,
        consts: BTreeMap<String, FieldElem>,
        defs: BTreeMap<String, Ast>,
        vars: Vec<String>,
    }

    impl Fixture {
        fn new(p: u64, n: u32) -> Self {
            let ctx = FieldCtx::build(p, &[n]).unwrap();
            let mut consts = BTreeMap::new();
            consts.insert("t".to_string(), ctx.generator_t());
            Fixture {
                ctx,
                params: [("q".to_string(), 4i64), ("q0".to_string(), 2)].into(),
                consts,
                defs: [("alpha".to_string(), parse("y^(2*q0)+x").unwrap())].into(),
                vars: vec!["x".into(), "y".into()],
            }
        }

        fn scope(&self) -> Scope<'_> {
            Scope {
                ctx: &self.ctx,
                params: &self.params,
                consts: &self.consts,
                defs: &self.defs,
                vars: &self.vars,
            }
        }
    }

    #[test]
    fn parses_precedence() {
        assert_eq!(
            parse("x + y*2^3").unwrap().to_string(),
            "(x+y*2^3)"
        );
        assert_eq!(parse("-x^2").unwrap(), Ast::Neg(Box::new(parse("x^2").unwrap())));
        assert_eq!(parse("a^b^c").unwrap().to_string(), "a^b^c");
        assert!(parse("x +").is_err());
        assert!(parse("(x").is_err());
        assert!(parse("x y").is_err());
    }

    #[test]
    fn int_exponents() {
        let params: BTreeMap<String, i64> = [("q".to_string(), 3)].into();
        assert_eq!(eval_int(&parse("q^2-q+1").unwrap(), &params), Some(7));
        assert_eq!(eval_int(&parse("z").unwrap(), &params), None);
    }

    #[test]
    fn evaluates_with_defs_and_consts() {
        let f = Fixture::new(2, 4);
        let s = f.scope();
        let n = compile_str("alpha + t*x", &s).unwrap();
        let x = f.ctx.generator_t();
        let y = f.ctx.one();
        let expect = f.ctx.add(f.ctx.add(f.ctx.pow(y, 4), x), f.ctx.mul(x, x));
        assert_eq!(n.eval(&f.ctx, &[x, y]), expect);
        assert_eq!(compile_str("w", &s).unwrap_err(), ExprError::UnknownName("w".into()));
        assert!(matches!(compile_str("x^y", &s), Err(ExprError::BadExponent(_))));
    }

    #[test]
    fn constant_folding() {
        let f = Fixture::new(7, 1);
        let s = f.scope();
        assert_eq!(const_value("3*5 - 1", &s).unwrap(), f.ctx.from_int(0));
        assert_eq!(const_value("-1", &s).unwrap(), f.ctx.from_int(6));
        assert_eq!(compile_str("2*3 + x", &s).unwrap().max_var(), Some(0));
    }

    #[test]
    fn detects_definition_cycles() {
        let mut f = Fixture::new(2, 2);
        f.defs.insert("a".into(), parse("b+1").unwrap());
        f.defs.insert("b".into(), parse("a").unwrap());
        assert!(matches!(
            compile_str("a", &f.scope()),
            Err(ExprError::DefinitionCycle(_))
        ));
    }

    #[test]
    fn univariate_expansion() {
        let f = Fixture::new(2, 4);
        let s = f.scope();
        let n = compile_str("y^q + y", &s).unwrap();
        let p = expand_univariate(&n, 1, &f.ctx).unwrap();
        assert_eq!(p.keys().copied().collect::<Vec<_>>(), vec![1, 4]);
        // (y+1)^2 = y^2 + 1 in characteristic 2
        let n = compile_str("(y+1)^2", &s).unwrap();
        let p = expand_univariate(&n, 1, &f.ctx).unwrap();
        assert_eq!(p.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
        assert!(expand_univariate(&compile_str("x", &s).unwrap(), 1, &f.ctx).is_err());
    }
}
