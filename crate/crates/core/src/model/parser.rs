use std::collections::HashMap;

use super::ast::*;
use super::lexer::{tokenize, Pos, Tok, Token, KEYWORDS};
use super::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NameKind {
    Set,
    Label,
    Constant,
    Variable,
    Param,
}

/// Parses B-lite source text into a [`Machine`].
pub fn parse_machine(source: &str) -> Result<Machine, ModelError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        at: 0,
        globals: HashMap::new(),
        params: Vec::new(),
    };
    p.machine()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    globals: HashMap<String, NameKind>,
    /// Stack of bound parameter names, innermost last.
    params: Vec<String>,
}

type PResult<T> = Result<T, ModelError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ModelError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(v) => format!("'{v}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if self.is_sym(sym) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(format!("expected '{kw}', found {}", Self::describe(self.peek())))
        }
    }

    fn expect_sym(&mut self, sym: &str) -> PResult<()> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            self.error(format!("expected '{sym}', found {}", Self::describe(self.peek())))
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                Ok((s, pos))
            }
            other => self.error(format!("expected identifier, found {}", Self::describe(&other))),
        }
    }

    fn lookup(&self, name: &str) -> Option<NameKind> {
        if self.params.iter().any(|p| p == name) {
            return Some(NameKind::Param);
        }
        self.globals.get(name).copied()
    }

    fn declare(&mut self, name: &str, pos: Pos, kind: NameKind) -> PResult<()> {
        if self.lookup(name).is_some() {
            return Err(ModelError::DuplicateName {
                pos,
                name: name.to_string(),
            });
        }
        self.globals.insert(name.to_string(), kind);
        Ok(())
    }

    fn machine(&mut self) -> PResult<Machine> {
        self.expect_kw("MACHINE")?;
        let (name, _) = self.name()?;

        let mut sets = Vec::new();
        if self.eat_kw("SETS") {
            loop {
                let (set_name, pos) = self.name()?;
                self.declare(&set_name, pos, NameKind::Set)?;
                self.expect_sym("=")?;
                self.expect_sym("{")?;
                let mut labels = Vec::new();
                loop {
                    let (label, pos) = self.name()?;
                    self.declare(&label, pos, NameKind::Label)?;
                    labels.push(label);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                sets.push(SetDecl { name: set_name, labels });
                if !self.eat_sym(";") {
                    break;
                }
            }
        }

        let mut constants = Vec::new();
        if self.eat_kw("CONSTANTS") {
            loop {
                let (c, pos) = self.name()?;
                self.declare(&c, pos, NameKind::Constant)?;
                let default = if self.eat_sym("=") {
                    Some(self.signed_int()?)
                } else {
                    None
                };
                constants.push(ConstantDecl { name: c, default });
                if !self.eat_sym(",") {
                    break;
                }
            }
        }

        let mut var_names: Vec<(String, Pos)> = Vec::new();
        if self.eat_kw("VARIABLES") {
            loop {
                let (v, pos) = self.name()?;
                self.declare(&v, pos, NameKind::Variable)?;
                var_names.push((v, pos));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }

        let mut domains: Vec<Option<DomainExpr>> = vec![None; var_names.len()];
        let mut invariant = Vec::new();
        if self.eat_kw("INVARIANT") {
            let pred = self.pred()?;
            for conjunct in conjuncts_owned(pred) {
                if let Some((v, dom)) = typing_of(&conjunct) {
                    if let Some(k) = var_names.iter().position(|(n, _)| n == v) {
                        if domains[k].is_none() {
                            domains[k] = Some(dom);
                            continue;
                        }
                    }
                }
                invariant.push(conjunct);
            }
        }
        let mut variables = Vec::with_capacity(var_names.len());
        for ((name, pos), dom) in var_names.into_iter().zip(domains) {
            match dom {
                Some(domain) => variables.push(VariableDecl { name, domain }),
                None => {
                    return Err(ModelError::Syntax {
                        pos,
                        message: format!("variable '{name}' has no typing conjunct in INVARIANT"),
                    })
                }
            }
        }

        let initialisation = if self.eat_kw("INITIALISATION") {
            self.stmt()?
        } else {
            Stmt::Skip
        };

        let mut operations: Vec<OperationDecl> = Vec::new();
        if self.eat_kw("OPERATIONS") && !self.is_kw("END") {
            loop {
                let pos = self.pos();
                let op = self.operation()?;
                if operations.iter().any(|o| o.name == op.name) {
                    return Err(ModelError::DuplicateName { pos, name: op.name });
                }
                operations.push(op);
                if !self.eat_sym(";") {
                    break;
                }
            }
        }
        self.expect_kw("END")?;
        if *self.peek() != Tok::Eof {
            return self.error(format!("unexpected {} after machine END", Self::describe(self.peek())));
        }

        Ok(Machine {
            name,
            sets,
            constants,
            variables,
            invariant,
            initialisation,
            operations,
        })
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat_sym("-");
        match *self.peek() {
            Tok::Int(v) => {
                self.advance();
                Ok(if neg { -v } else { v })
            }
            ref other => self.error(format!("expected integer, found {}", Self::describe(other))),
        }
    }

    /// Binds a comma-separated list of fresh names as parameters.
    fn bind_params(&mut self) -> PResult<Vec<(String, Pos)>> {
        let mut names: Vec<(String, Pos)> = Vec::new();
        loop {
            let (n, pos) = self.name()?;
            if self.lookup(&n).is_some() || names.iter().any(|(m, _)| *m == n) {
                return Err(ModelError::DuplicateName { pos, name: n });
            }
            names.push((n, pos));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.params.extend(names.iter().map(|(n, _)| n.clone()));
        Ok(names)
    }

    fn unbind_params(&mut self, count: usize) {
        let keep = self.params.len() - count;
        self.params.truncate(keep);
    }

    /// Splits `pred` into typed parameters and the remaining conjunction.
    fn split_typing(names: &[(String, Pos)], pred: Expr) -> PResult<(Vec<Param>, Expr)> {
        let mut doms: Vec<Option<DomainExpr>> = vec![None; names.len()];
        let mut rest = Vec::new();
        for conjunct in conjuncts_owned(pred) {
            if let Some((v, dom)) = typing_of(&conjunct) {
                if let Some(k) = names.iter().position(|(n, _)| n == v) {
                    if doms[k].is_none() {
                        doms[k] = Some(dom);
                        continue;
                    }
                }
            }
            rest.push(conjunct);
        }
        let mut params = Vec::with_capacity(names.len());
        for ((name, pos), dom) in names.iter().zip(doms) {
            match dom {
                Some(domain) => params.push(Param {
                    name: name.clone(),
                    domain,
                }),
                None => {
                    return Err(ModelError::Syntax {
                        pos: *pos,
                        message: format!("parameter '{name}' has no typing conjunct"),
                    })
                }
            }
        }
        Ok((params, Expr::conjunction(rest)))
    }

    fn operation(&mut self) -> PResult<OperationDecl> {
        let (name, _) = self.name()?;
        let names = if self.eat_sym("(") {
            let names = self.bind_params()?;
            self.expect_sym(")")?;
            names
        } else {
            Vec::new()
        };
        self.expect_sym("=")?;
        let result = self.operation_body(&name, &names);
        self.unbind_params(names.len());
        result
    }

    fn operation_body(&mut self, name: &str, names: &[(String, Pos)]) -> PResult<OperationDecl> {
        if self.eat_kw("SELECT") {
            let pred = self.pred()?;
            let (params, guard) = Self::split_typing(names, pred)?;
            self.expect_kw("THEN")?;
            let body = self.stmt()?;
            self.expect_kw("END")?;
            Ok(OperationDecl {
                name: name.to_string(),
                params,
                guard,
                body,
            })
        } else if self.is_kw("BEGIN") {
            if let Some((p, pos)) = names.first() {
                return Err(ModelError::Syntax {
                    pos: *pos,
                    message: format!("parameter '{p}' has no typing conjunct"),
                });
            }
            self.advance();
            let body = self.stmt()?;
            self.expect_kw("END")?;
            Ok(OperationDecl {
                name: name.to_string(),
                params: Vec::new(),
                guard: Expr::Bool(true),
                body,
            })
        } else {
            self.error(format!(
                "expected SELECT or BEGIN, found {}",
                Self::describe(self.peek())
            ))
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let mut parts = vec![self.stmt_atom()?];
        while self.eat_sym("||") {
            parts.push(self.stmt_atom()?);
        }
        Ok(Stmt::parallel(parts))
    }

    fn stmt_atom(&mut self) -> PResult<Stmt> {
        if self.eat_kw("skip") {
            return Ok(Stmt::Skip);
        }
        if self.eat_kw("BEGIN") {
            let s = self.stmt()?;
            self.expect_kw("END")?;
            return Ok(s);
        }
        if self.eat_kw("IF") {
            return self.if_rest();
        }
        if self.eat_kw("ANY") {
            let names = self.bind_params()?;
            let result = (|| {
                self.expect_kw("WHERE")?;
                let pred = self.pred()?;
                let (params, pred) = Self::split_typing(&names, pred)?;
                self.expect_kw("THEN")?;
                let body = self.stmt()?;
                self.expect_kw("END")?;
                Ok(Stmt::Any {
                    params,
                    pred,
                    body: Box::new(body),
                })
            })();
            self.unbind_params(names.len());
            return result;
        }
        if self.eat_kw("CHOICE") {
            let mut branches = vec![self.stmt()?];
            while self.eat_kw("OR") {
                branches.push(self.stmt()?);
            }
            self.expect_kw("END")?;
            return Ok(Stmt::Choice(branches));
        }
        let (target, pos) = self.name()?;
        match self.lookup(&target) {
            Some(NameKind::Variable) => {}
            Some(_) => {
                return Err(ModelError::Syntax {
                    pos,
                    message: format!("'{target}' is not an assignable variable"),
                })
            }
            None => {
                return Err(ModelError::UnknownIdentifier { pos, name: target });
            }
        }
        self.expect_sym(":=")?;
        let value = self.expr()?;
        Ok(Stmt::Assign(target, value))
    }

    /// After `IF` (or `ELSIF`): `P THEN S [ELSIF ...] [ELSE S] END`.
    fn if_rest(&mut self) -> PResult<Stmt> {
        let cond = self.pred()?;
        self.expect_kw("THEN")?;
        let then = self.stmt()?;
        let otherwise = if self.eat_kw("ELSIF") {
            // The nested IF consumes the shared END.
            return Ok(Stmt::If {
                cond,
                then: Box::new(then),
                otherwise: Some(Box::new(self.if_rest()?)),
            });
        } else if self.eat_kw("ELSE") {
            Some(Box::new(self.stmt()?))
        } else {
            None
        };
        self.expect_kw("END")?;
        Ok(Stmt::If {
            cond,
            then: Box::new(then),
            otherwise,
        })
    }

    pub(crate) fn pred(&mut self) -> PResult<Expr> {
        let lhs = self.or_expr()?;
        if self.eat_sym("=>") {
            let rhs = self.or_expr()?;
            return Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut parts = vec![self.and_expr()?];
        while self.eat_kw("or") {
            parts.push(self.and_expr()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::disjunction(parts)
        })
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut parts = vec![self.cmp_expr()?];
        while self.eat_sym("&") {
            parts.push(self.cmp_expr()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::conjunction(parts)
        })
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Sym("=") => Some(CmpOp::Eq),
            Tok::Sym("/=") => Some(CmpOp::Ne),
            Tok::Sym("<") => Some(CmpOp::Lt),
            Tok::Sym("<=") => Some(CmpOp::Le),
            Tok::Sym(">") => Some(CmpOp::Gt),
            Tok::Sym(">=") => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let rhs = self.expr()?;
            return Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)));
        }
        let negated = if self.eat_sym(":") {
            false
        } else if self.eat_sym("/:") {
            true
        } else {
            return Ok(lhs);
        };
        let set = self.set_expr()?;
        Ok(Expr::Member {
            elem: Box::new(lhs),
            set,
            negated,
        })
    }

    fn set_expr(&mut self) -> PResult<SetExpr> {
        if self.eat_kw("BOOL") {
            return Ok(SetExpr::Bool);
        }
        if let Tok::Ident(s) = self.peek().clone() {
            if self.lookup(&s) == Some(NameKind::Set) {
                self.advance();
                return Ok(SetExpr::Named(s));
            }
        }
        if self.eat_sym("{") {
            let mut items = vec![self.expr()?];
            while self.eat_sym(",") {
                items.push(self.expr()?);
            }
            self.expect_sym("}")?;
            return Ok(SetExpr::Enumerated(items));
        }
        let lo = self.expr()?;
        self.expect_sym("..")?;
        let hi = self.expr()?;
        Ok(SetExpr::Range(Box::new(lo), Box::new(hi)))
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_sym("+") {
                ArithOp::Add
            } else if self.is_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(lhs);
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while self.eat_sym("*") {
            let rhs = self.unary()?;
            lhs = Expr::Arith(ArithOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            if let Tok::Int(v) = *self.peek() {
                self.advance();
                return Ok(Expr::Int(-v));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Expr::Int(v))
            }
            Tok::Sym("(") => {
                self.advance();
                let e = self.pred()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "TRUE" => {
                    self.advance();
                    Ok(Expr::Bool(true))
                }
                "FALSE" => {
                    self.advance();
                    Ok(Expr::Bool(false))
                }
                "not" => {
                    self.advance();
                    self.expect_sym("(")?;
                    let e = self.pred()?;
                    self.expect_sym(")")?;
                    Ok(Expr::Not(Box::new(e)))
                }
                "min" | "max" => {
                    self.advance();
                    self.expect_sym("(")?;
                    let a = self.expr()?;
                    self.expect_sym(",")?;
                    let b = self.expr()?;
                    self.expect_sym(")")?;
                    Ok(if s == "min" {
                        Expr::Min(Box::new(a), Box::new(b))
                    } else {
                        Expr::Max(Box::new(a), Box::new(b))
                    })
                }
                kw if KEYWORDS.contains(&kw) => self.error(format!("unexpected keyword '{kw}' in expression")),
                _ => {
                    self.advance();
                    match self.lookup(&s) {
                        None => Err(ModelError::UnknownIdentifier { pos, name: s }),
                        Some(NameKind::Set) => Err(ModelError::Syntax {
                            pos,
                            message: format!("set '{s}' cannot be used as a value"),
                        }),
                        Some(_) => Ok(Expr::Ident(s)),
                    }
                }
            },
            other => self.error(format!("unexpected {}", Self::describe(&other))),
        }
    }
}

fn conjuncts_owned(e: Expr) -> Vec<Expr> {
    match e {
        Expr::And(parts) => parts,
        other => vec![other],
    }
}

/// Recognises `x : BOOL`, `x : lo..hi` and `x : SetName` typing conjuncts.
pub(crate) fn typing_of(e: &Expr) -> Option<(&str, DomainExpr)> {
    if let Expr::Member {
        elem,
        set,
        negated: false,
    } = e
    {
        if let Expr::Ident(v) = elem.as_ref() {
            let dom = match set {
                SetExpr::Bool => DomainExpr::Bool,
                SetExpr::Range(lo, hi) => DomainExpr::Range((**lo).clone(), (**hi).clone()),
                SetExpr::Named(s) => DomainExpr::Set(s.clone()),
                SetExpr::Enumerated(_) => return None,
            };
            return Some((v, dom));
        }
    }
    None
}
