//! Canonical pretty-printer. `parse_machine(&print_machine(m)) == m` for
//! every machine the parser can produce.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "  ";

pub fn print_machine(m: &Machine) -> String {
    let mut out = String::new();
    writeln!(out, "MACHINE {}", m.name).unwrap();
    if !m.sets.is_empty() {
        let sets: Vec<String> = m
            .sets
            .iter()
            .map(|s| format!("{} = {{{}}}", s.name, s.labels.join(", ")))
            .collect();
        writeln!(out, "SETS\n{INDENT}{}", sets.join(";\n  ")).unwrap();
    }
    if !m.constants.is_empty() {
        let cs: Vec<String> = m
            .constants
            .iter()
            .map(|c| match c.default {
                Some(v) => format!("{} = {v}", c.name),
                None => c.name.clone(),
            })
            .collect();
        writeln!(out, "CONSTANTS {}", cs.join(", ")).unwrap();
    }
    if !m.variables.is_empty() {
        let vs: Vec<&str> = m.variables.iter().map(|v| v.name.as_str()).collect();
        writeln!(out, "VARIABLES {}", vs.join(", ")).unwrap();
    }
    let mut inv: Vec<String> = m
        .variables
        .iter()
        .map(|v| format!("{} : {}", v.name, domain(&v.domain)))
        .collect();
    inv.extend(m.invariant.iter().map(|e| expr_at(e, Prec::And as u8 + 1)));
    if !inv.is_empty() {
        writeln!(out, "INVARIANT\n{INDENT}{}", inv.join(" &\n  ")).unwrap();
    }
    if !m.variables.is_empty() || m.initialisation != Stmt::Skip {
        writeln!(out, "INITIALISATION").unwrap();
        stmt(&mut out, &m.initialisation, 1);
        out.push('\n');
    }
    writeln!(out, "OPERATIONS").unwrap();
    for (k, op) in m.operations.iter().enumerate() {
        operation(&mut out, op);
        if k + 1 < m.operations.len() {
            out.push(';');
        }
        out.push('\n');
    }
    out.push_str("END\n");
    out
}

fn operation(out: &mut String, op: &OperationDecl) {
    out.push_str(INDENT);
    out.push_str(&op.name);
    if !op.params.is_empty() {
        let names: Vec<&str> = op.params.iter().map(|p| p.name.as_str()).collect();
        write!(out, "({})", names.join(", ")).unwrap();
    }
    out.push_str(" =\n");
    if op.params.is_empty() && op.guard == Expr::Bool(true) {
        writeln!(out, "{INDENT}{INDENT}BEGIN").unwrap();
    } else {
        writeln!(out, "{INDENT}{INDENT}SELECT {}", typed_pred(&op.params, &op.guard)).unwrap();
        writeln!(out, "{INDENT}{INDENT}THEN").unwrap();
    }
    stmt(out, &op.body, 3);
    write!(out, "\n{INDENT}{INDENT}END").unwrap();
}

/// Parameter typings followed by the remaining predicate.
fn typed_pred(params: &[Param], pred: &Expr) -> String {
    let mut parts: Vec<String> = params
        .iter()
        .map(|p| format!("{} : {}", p.name, domain(&p.domain)))
        .collect();
    if *pred != Expr::Bool(true) || parts.is_empty() {
        let prec = if parts.is_empty() { 0 } else { Prec::And as u8 + 1 };
        match pred {
            Expr::And(cs) if !parts.is_empty() => parts.extend(cs.iter().map(|c| expr_at(c, Prec::And as u8 + 1))),
            _ => parts.push(expr_at(pred, prec)),
        }
    }
    parts.join(" & ")
}

fn domain(d: &DomainExpr) -> String {
    match d {
        DomainExpr::Bool => "BOOL".into(),
        DomainExpr::Range(lo, hi) => format!("{}..{}", expr_at(lo, Prec::Add as u8), expr_at(hi, Prec::Add as u8)),
        DomainExpr::Set(s) => s.clone(),
    }
}

fn pad(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    match s {
        Stmt::Parallel(parts) if !parts.is_empty() => {
            for (k, p) in parts.iter().enumerate() {
                if k > 0 {
                    out.push_str(" ||\n");
                }
                stmt(out, p, depth);
            }
        }
        _ => {
            pad(out, depth);
            stmt_inline(out, s, depth);
        }
    }
}

/// Prints a non-parallel statement whose first line is already indented.
fn stmt_inline(out: &mut String, s: &Stmt, depth: usize) {
    match s {
        Stmt::Skip | Stmt::Parallel(_) => out.push_str("skip"),
        Stmt::Assign(v, e) => write!(out, "{v} := {}", expr_at(e, 0)).unwrap(),
        Stmt::If { cond, then, otherwise } => {
            writeln!(out, "IF {} THEN", expr_at(cond, 0)).unwrap();
            stmt(out, then, depth + 1);
            out.push('\n');
            if let Some(other) = otherwise {
                pad(out, depth);
                out.push_str("ELSE\n");
                stmt(out, other, depth + 1);
                out.push('\n');
            }
            pad(out, depth);
            out.push_str("END");
        }
        Stmt::Any { params, pred, body } => {
            let names: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
            writeln!(out, "ANY {} WHERE {} THEN", names.join(", "), typed_pred(params, pred)).unwrap();
            stmt(out, body, depth + 1);
            out.push('\n');
            pad(out, depth);
            out.push_str("END");
        }
        Stmt::Choice(branches) => {
            out.push_str("CHOICE\n");
            for (k, b) in branches.iter().enumerate() {
                if k > 0 {
                    out.push('\n');
                    pad(out, depth);
                    out.push_str("OR\n");
                }
                stmt(out, b, depth + 1);
            }
            out.push('\n');
            pad(out, depth);
            out.push_str("END");
        }
    }
}

#[derive(Clone, Copy)]
#[repr(u8)]
enum Prec {
    Implies = 1,
    Or = 2,
    And = 3,
    Cmp = 4,
    Add = 5,
    Mul = 6,
    Unary = 7,
}

fn prec_of(e: &Expr) -> u8 {
    match e {
        Expr::Implies(..) => Prec::Implies as u8,
        Expr::Or(_) => Prec::Or as u8,
        Expr::And(_) => Prec::And as u8,
        Expr::Cmp(..) | Expr::Member { .. } => Prec::Cmp as u8,
        Expr::Arith(ArithOp::Add | ArithOp::Sub, ..) => Prec::Add as u8,
        Expr::Arith(ArithOp::Mul, ..) => Prec::Mul as u8,
        Expr::Neg(_) => Prec::Unary as u8,
        _ => u8::MAX,
    }
}

/// Renders `e` so that it parses back at a position requiring precedence `min`.
pub fn expr_at(e: &Expr, min: u8) -> String {
    let body = expr_body(e);
    if prec_of(e) < min {
        format!("({body})")
    } else {
        body
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    expr_at(e, 0)
}

fn expr_body(e: &Expr) -> String {
    match e {
        Expr::Bool(true) => "TRUE".into(),
        Expr::Bool(false) => "FALSE".into(),
        Expr::Int(v) => v.to_string(),
        Expr::Ident(s) => s.clone(),
        Expr::Neg(inner) => match inner.as_ref() {
            Expr::Int(_) => format!("-({})", expr_body(inner)),
            _ => format!("-{}", expr_at(inner, Prec::Unary as u8)),
        },
        Expr::Arith(op, a, b) => {
            let (sym, p) = match op {
                ArithOp::Add => ("+", Prec::Add),
                ArithOp::Sub => ("-", Prec::Add),
                ArithOp::Mul => ("*", Prec::Mul),
            };
            format!("{} {sym} {}", expr_at(a, p as u8), expr_at(b, p as u8 + 1))
        }
        Expr::Min(a, b) => format!("min({}, {})", expr_at(a, 0), expr_at(b, 0)),
        Expr::Max(a, b) => format!("max({}, {})", expr_at(a, 0), expr_at(b, 0)),
        Expr::Cmp(op, a, b) => {
            let sym = match op {
                CmpOp::Eq => "=",
                CmpOp::Ne => "/=",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            let p = Prec::Cmp as u8 + 1;
            format!("{} {sym} {}", expr_at(a, p), expr_at(b, p))
        }
        Expr::Member { elem, set, negated } => {
            let p = Prec::Cmp as u8 + 1;
            let sym = if *negated { "/:" } else { ":" };
            let set = match set {
                SetExpr::Bool => "BOOL".to_string(),
                SetExpr::Named(s) => s.clone(),
                SetExpr::Range(lo, hi) => format!("{}..{}", expr_at(lo, Prec::Add as u8), expr_at(hi, Prec::Add as u8)),
                SetExpr::Enumerated(items) => {
                    let items: Vec<String> = items.iter().map(|i| expr_at(i, Prec::Add as u8)).collect();
                    format!("{{{}}}", items.join(", "))
                }
            };
            format!("{} {sym} {set}", expr_at(elem, p))
        }
        Expr::And(parts) => join(parts, " & ", Prec::And as u8 + 1),
        Expr::Or(parts) => join(parts, " or ", Prec::Or as u8 + 1),
        Expr::Not(inner) => format!("not({})", expr_at(inner, 0)),
        Expr::Implies(a, b) => {
            let p = Prec::Implies as u8 + 1;
            format!("{} => {}", expr_at(a, p), expr_at(b, p))
        }
    }
}

fn join(parts: &[Expr], sep: &str, min: u8) -> String {
    parts.iter().map(|p| expr_at(p, min)).collect::<Vec<_>>().join(sep)
}
