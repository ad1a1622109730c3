use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ast::{Expr, ForInit, Statement, StmtForm};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Invocation {
    pub name: String,
    pub arity: usize,
}

impl Invocation {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Invocation { name: name.into(), arity }
    }
}

/// Variables and calls a statement touches.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngredientSet {
    pub vars_used: BTreeSet<String>,
    pub vars_defined: BTreeSet<String>,
    pub invocations: BTreeSet<Invocation>,
}

/// Definitions are assignment targets, declared names, `++`/`--` operands and
/// catch/for-each variables. Uses are every other identifier occurrence except
/// type names and callee names. Field accesses use the base and the field
/// name; element writes (`a[i] = v`) define and use the array.
pub fn collect_ingredients(stmt: &Statement) -> IngredientSet {
    let mut set = IngredientSet::default();
    match &stmt.form {
        StmtForm::LocalDecl { vars, .. } => {
            for d in vars {
                set.vars_defined.insert(d.name.clone());
                if let Some(init) = &d.init {
                    walk(init, &mut set);
                }
            }
        }
        StmtForm::Expr(e) | StmtForm::If(e) | StmtForm::While(e) | StmtForm::Throw(e) => walk(e, &mut set),
        StmtForm::Return(e) => {
            if let Some(e) = e {
                walk(e, &mut set);
            }
        }
        StmtForm::For { init, cond, update } => {
            match init {
                Some(ForInit::Decl { vars, .. }) => {
                    for d in vars {
                        set.vars_defined.insert(d.name.clone());
                        if let Some(init) = &d.init {
                            walk(init, &mut set);
                        }
                    }
                }
                Some(ForInit::Exprs(es)) => es.iter().for_each(|e| walk(e, &mut set)),
                None => {}
            }
            if let Some(c) = cond {
                walk(c, &mut set);
            }
            update.iter().for_each(|e| walk(e, &mut set));
        }
        StmtForm::ForEach { var, iterable, .. } => {
            set.vars_defined.insert(var.clone());
            walk(iterable, &mut set);
        }
        StmtForm::Catch { var, .. } => {
            set.vars_defined.insert(var.clone());
        }
        StmtForm::Break | StmtForm::Continue | StmtForm::Empty | StmtForm::Try => {}
    }
    set
}

fn walk(expr: &Expr, set: &mut IngredientSet) {
    match expr {
        Expr::Name(n) => {
            set.vars_used.insert(n.clone());
        }
        Expr::Literal(_) | Expr::This | Expr::Super | Expr::ClassLiteral(_) => {}
        Expr::Field { base, name } => {
            walk(base, set);
            set.vars_used.insert(name.clone());
        }
        Expr::Call { target, name, args } => {
            set.invocations.insert(Invocation::new(name.clone(), args.len()));
            if let Some(t) = target {
                walk(t, set);
            }
            args.iter().for_each(|a| walk(a, set));
        }
        Expr::Index { base, index } => {
            walk(base, set);
            walk(index, set);
        }
        Expr::Unary { op, operand } | Expr::Postfix { op, operand } => {
            if op == "++" || op == "--" {
                lvalue(operand, true, set);
            } else {
                walk(operand, set);
            }
        }
        Expr::Binary { lhs, rhs, .. } => {
            walk(lhs, set);
            walk(rhs, set);
        }
        Expr::Assign { op, target, value } => {
            walk(value, set);
            lvalue(target, op != "=", set);
        }
        Expr::Ternary { cond, then, otherwise } => {
            walk(cond, set);
            walk(then, set);
            walk(otherwise, set);
        }
        Expr::Cast { operand, .. } | Expr::InstanceOf { operand, .. } => walk(operand, set),
        Expr::New { args, .. } => args.iter().for_each(|a| walk(a, set)),
        Expr::NewArray { dims, init, .. } => {
            dims.iter().for_each(|d| walk(d, set));
            if let Some(items) = init {
                items.iter().for_each(|i| walk(i, set));
            }
        }
        Expr::ArrayInit(items) => items.iter().for_each(|i| walk(i, set)),
    }
}

fn lvalue(target: &Expr, also_use: bool, set: &mut IngredientSet) {
    match target {
        Expr::Name(n) => {
            set.vars_defined.insert(n.clone());
            if also_use {
                set.vars_used.insert(n.clone());
            }
        }
        Expr::Field { base, name } => {
            walk(base, set);
            set.vars_defined.insert(name.clone());
            if also_use {
                set.vars_used.insert(name.clone());
            }
        }
        Expr::Index { base, index } => {
            walk(index, set);
            // Element writes are weak updates of the whole array.
            lvalue(base, true, set);
        }
        other => walk(other, set),
    }
}
