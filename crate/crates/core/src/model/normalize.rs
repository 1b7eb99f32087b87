use super::ast::{Expr, OperationDecl, Stmt};

/// An operation whose guard no longer mentions parameters.
///
/// Parameter-dependent guard conjuncts live in an `ANY` wrapper around the
/// body, so the guard only reads machine variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedOperation {
    pub name: String,
    pub guard: Expr,
    pub body: Stmt,
}

pub fn normalize(op: &OperationDecl) -> NormalizedOperation {
    if op.params.is_empty() {
        return NormalizedOperation {
            name: op.name.clone(),
            guard: op.guard.clone(),
            body: op.body.clone(),
        };
    }
    let names: Vec<&str> = op.params.iter().map(|p| p.name.as_str()).collect();
    let (bound, free): (Vec<Expr>, Vec<Expr>) = op
        .guard
        .conjuncts()
        .into_iter()
        .cloned()
        .partition(|c| c.mentions_any(&names));
    NormalizedOperation {
        name: op.name.clone(),
        guard: Expr::conjunction(free),
        body: Stmt::Any {
            params: op.params.clone(),
            pred: Expr::conjunction(bound),
            body: Box::new(op.body.clone()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ast::{CmpOp, DomainExpr, Param};
    use crate::model::parse_machine;

    #[test]
    fn parameterless_operation_is_unchanged() {
        let m = parse_machine(
            "MACHINE M VARIABLES cs, wait INVARIANT cs : BOOL & wait : 0..1 \
             INITIALISATION cs := FALSE || wait := 1 OPERATIONS \
             Enter = SELECT cs = FALSE & wait > 0 THEN cs := TRUE || wait := wait - 1 END END",
        )
        .unwrap();
        let op = &m.operations[0];
        let n = normalize(op);
        assert_eq!(n.guard, op.guard);
        assert_eq!(n.body, op.body);
    }

    #[test]
    fn parameter_conjuncts_move_into_any() {
        let m = parse_machine(
            "MACHINE M VARIABLES x INVARIANT x : 0..1 INITIALISATION x := 0 OPERATIONS \
             Set(p) = SELECT p : 0..1 & p = 1 THEN x := p END END",
        )
        .unwrap();
        let n = normalize(&m.operations[0]);
        assert_eq!(n.guard, Expr::Bool(true));
        assert_eq!(
            n.body,
            Stmt::Any {
                params: vec![Param {
                    name: "p".into(),
                    domain: DomainExpr::Range(Expr::Int(0), Expr::Int(1)),
                }],
                pred: Expr::Cmp(CmpOp::Eq, Box::new(Expr::Ident("p".into())), Box::new(Expr::Int(1))),
                body: Box::new(Stmt::Assign("x".into(), Expr::Ident("p".into()))),
            }
        );
    }

    #[test]
    fn activate_keeps_parameter_free_guard() {
        let m = parse_machine(
            "MACHINE A SETS PROC = {p1, p2, p3} VARIABLES pc, active, ready \
             INVARIANT pc : 0..1 & active : PROC & ready : PROC \
             INITIALISATION pc := 1 || active := p1 || ready := p2 OPERATIONS \
             Activate(p) = SELECT p : PROC & pc = 1 & p = ready THEN active := p END END",
        )
        .unwrap();
        let n = normalize(&m.operations[0]);
        assert_eq!(crate::model::printer::expr_to_string(&n.guard), "pc = 1");
        match n.body {
            Stmt::Any { pred, .. } => {
                assert_eq!(crate::model::printer::expr_to_string(&pred), "p = ready")
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
