//! Static checks run before execution: definite assignment, builtin use, and a
//! termination lint for `while` loops.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ast::{Expr, Program, Stmt, StmtKind};
use super::builtins;
use super::lexer::Span;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    UseBeforeAssign { name: String, line: u32, col: u32 },
    UnknownFunction { name: String, line: u32, col: u32 },
    ArityMismatch { name: String, expected: usize, found: usize, line: u32, col: u32 },
    /// A `while` body never assigns any variable of its condition.
    NonTerminatingLoop { line: u32, col: u32 },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::UseBeforeAssign { name, line, col } => {
                write!(f, "{line}:{col}: use-before-assign({name})")
            }
            Diagnostic::UnknownFunction { name, line, col } => {
                write!(f, "{line}:{col}: unknown function {name}")
            }
            Diagnostic::ArityMismatch { name, expected, found, line, col } => {
                write!(f, "{line}:{col}: {name} takes {expected} argument(s), got {found}")
            }
            Diagnostic::NonTerminatingLoop { line, col } => {
                write!(f, "{line}:{col}: while loop body never updates its condition")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub violations: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl CheckReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.warnings.is_empty()
    }
}

pub fn static_check(program: &Program) -> CheckReport {
    let mut report = CheckReport::default();
    let mut assigned = HashSet::new();
    check_block(&program.body, &mut assigned, &mut report);
    report
}

fn check_expr(expr: &Expr, assigned: &HashSet<String>, report: &mut CheckReport) {
    expr.for_each_var(&mut |name, span: Span| {
        if !assigned.contains(name) {
            report.violations.push(Diagnostic::UseBeforeAssign {
                name: name.to_string(),
                line: span.line,
                col: span.col,
            });
        }
    });
    expr.for_each_call(&mut |name, found, span: Span| match builtins::lookup(name) {
        None => report.violations.push(Diagnostic::UnknownFunction {
            name: name.to_string(),
            line: span.line,
            col: span.col,
        }),
        Some(b) if b.arity != found => report.violations.push(Diagnostic::ArityMismatch {
            name: name.to_string(),
            expected: b.arity,
            found,
            line: span.line,
            col: span.col,
        }),
        Some(_) => {}
    });
}

fn check_block(body: &[Stmt], assigned: &mut HashSet<String>, report: &mut CheckReport) {
    for stmt in body {
        check_stmt(stmt, assigned, report);
    }
}

fn check_stmt(stmt: &Stmt, assigned: &mut HashSet<String>, report: &mut CheckReport) {
    match &stmt.kind {
        StmtKind::Assign { target, value } => {
            check_expr(value, assigned, report);
            assigned.insert(target.clone());
        }
        StmtKind::Append { target, value } => {
            check_expr(value, assigned, report);
            if !assigned.contains(target) {
                report.violations.push(Diagnostic::UseBeforeAssign {
                    name: target.clone(),
                    line: stmt.span.line,
                    col: stmt.span.col,
                });
            }
        }
        StmtKind::Call(expr) => check_expr(expr, assigned, report),
        StmtKind::Pass => {}
        StmtKind::If { branches, orelse } => {
            // Conditions are evaluated in order; a later condition sees only what is
            // assigned before the `if`.
            let mut outcome: Option<HashSet<String>> = None;
            for (cond, body) in branches {
                check_expr(cond, assigned, report);
                let mut inner = assigned.clone();
                check_block(body, &mut inner, report);
                outcome = Some(match outcome {
                    None => inner,
                    Some(acc) => acc.intersection(&inner).cloned().collect(),
                });
            }
            let mut inner = assigned.clone();
            check_block(orelse, &mut inner, report);
            let merged = match outcome {
                None => inner,
                Some(acc) => acc.intersection(&inner).cloned().collect(),
            };
            *assigned = merged;
        }
        StmtKind::For { var, start, end, body } => {
            if let Some(s) = start {
                check_expr(s, assigned, report);
            }
            check_expr(end, assigned, report);
            let mut inner = assigned.clone();
            inner.insert(var.clone());
            check_block(body, &mut inner, report);
        }
        StmtKind::While { cond, body } => {
            check_expr(cond, assigned, report);
            let mut inner = assigned.clone();
            check_block(body, &mut inner, report);
            let mut cond_vars = HashSet::new();
            cond.for_each_var(&mut |name, _| {
                cond_vars.insert(name.to_string());
            });
            let mut targets = HashSet::new();
            collect_targets(body, &mut targets);
            if cond_vars.is_disjoint(&targets) {
                report.warnings.push(Diagnostic::NonTerminatingLoop {
                    line: stmt.span.line,
                    col: stmt.span.col,
                });
            }
        }
    }
}

fn collect_targets(body: &[Stmt], out: &mut HashSet<String>) {
    for stmt in body {
        match &stmt.kind {
            StmtKind::Assign { target, .. } | StmtKind::Append { target, .. } => {
                out.insert(target.clone());
            }
            StmtKind::If { branches, orelse } => {
                branches.iter().for_each(|(_, b)| collect_targets(b, out));
                collect_targets(orelse, out);
            }
            StmtKind::For { var, body, .. } => {
                out.insert(var.clone());
                collect_targets(body, out);
            }
            StmtKind::While { body, .. } => collect_targets(body, out),
            StmtKind::Call(_) | StmtKind::Pass => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_source;

    fn check(src: &str) -> CheckReport {
        static_check(&parse_source(src).unwrap())
    }

    #[test]
    fn use_before_assign() {
        let r = check("y = x + 1\n");
        assert_eq!(
            r.violations,
            vec![Diagnostic::UseBeforeAssign { name: "x".into(), line: 1, col: 5 }]
        );
    }

    #[test]
    fn while_true_pass_warns() {
        let r = check("while True: pass\n");
        assert!(r.violations.is_empty());
        assert!(matches!(r.warnings[..], [Diagnostic::NonTerminatingLoop { line: 1, .. }]));
    }

    #[test]
    fn loop_assignments_do_not_escape() {
        let r = check("n = 3\nwhile n > 0:\n    n = n - 1\n    z = 1\ny = z\n");
        assert_eq!(r.violations.len(), 1);
        assert!(r.warnings.is_empty());
        let r = check("for i in range(3):\n    k = i\nj = i\n");
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn if_else_definite_assignment() {
        assert!(check("c = True\nif c:\n    a = 1\nelse:\n    a = 2\nb = a\n").is_clean());
        assert_eq!(check("c = True\nif c:\n    a = 1\nb = a\n").violations.len(), 1);
        assert_eq!(
            check("c = True\nif c:\n    a = 1\nelif c:\n    d = 1\nelse:\n    a = 2\nb = a\n").violations.len(),
            1
        );
    }

    #[test]
    fn builtin_checks() {
        let r = check("x = open('f')\ny = rand_exp(1, 2)\n");
        assert!(matches!(r.violations[0], Diagnostic::UnknownFunction { .. }));
        assert!(matches!(r.violations[1], Diagnostic::ArityMismatch { expected: 1, found: 2, .. }));
        assert_eq!(check("q.append(1)\n").violations.len(), 1);
    }
}
