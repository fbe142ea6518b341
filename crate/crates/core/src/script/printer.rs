//! Pretty-printer producing source that parses back to the same AST.

use std::fmt::Write;

use super::ast::{Expr, ExprKind, Program, Stmt, StmtKind, UnaryOp};

pub const SCRIPT_SENTINEL: &str = "## simscript v1";

pub fn print_program(program: &Program) -> String {
    let mut out = format!("{SCRIPT_SENTINEL}\n");
    let mut sections = program.sections.iter().peekable();
    for (i, stmt) in program.body.iter().enumerate() {
        while let Some(s) = sections.next_if(|s| s.at == i) {
            let _ = writeln!(out, "# section: {}", s.name);
        }
        print_stmt(stmt, 0, &mut out);
    }
    for s in sections {
        let _ = writeln!(out, "# section: {}", s.name);
    }
    out
}

fn print_block(body: &[Stmt], depth: usize, out: &mut String) {
    if body.is_empty() {
        let _ = writeln!(out, "{}pass", "    ".repeat(depth));
    }
    for stmt in body {
        print_stmt(stmt, depth, out);
    }
}

fn print_stmt(stmt: &Stmt, depth: usize, out: &mut String) {
    let pad = "    ".repeat(depth);
    match &stmt.kind {
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{pad}{target} = {}", print_expr(value));
        }
        StmtKind::Append { target, value } => {
            let _ = writeln!(out, "{pad}{target}.append({})", print_expr(value));
        }
        StmtKind::Call(expr) => {
            let _ = writeln!(out, "{pad}{}", print_expr(expr));
        }
        StmtKind::Pass => {
            let _ = writeln!(out, "{pad}pass");
        }
        StmtKind::If { branches, orelse } => {
            for (i, (cond, body)) in branches.iter().enumerate() {
                let kw = if i == 0 { "if" } else { "elif" };
                let _ = writeln!(out, "{pad}{kw} {}:", print_expr(cond));
                print_block(body, depth + 1, out);
            }
            if !orelse.is_empty() {
                let _ = writeln!(out, "{pad}else:");
                print_block(orelse, depth + 1, out);
            }
        }
        StmtKind::For { var, start, end, body } => {
            let range = match start {
                Some(s) => format!("{}, {}", print_expr(s), print_expr(end)),
                None => print_expr(end),
            };
            let _ = writeln!(out, "{pad}for {var} in range({range}):");
            print_block(body, depth + 1, out);
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "{pad}while {}:", print_expr(cond));
            print_block(body, depth + 1, out);
        }
    }
}

/// Number literal text: integers without a fraction, everything else in shortest
/// round-trip form.
pub fn number_literal(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

pub fn string_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

pub fn print_expr(expr: &Expr) -> String {
    expr_at(expr, 0)
}

// Precedence levels: or 1, and 2, not 3, comparison 4, + - 5, * / % 6, unary minus 7, postfix 8.
fn expr_prec(expr: &Expr) -> u8 {
    match &expr.kind {
        ExprKind::Binary(op, ..) => op.precedence(),
        ExprKind::Unary(UnaryOp::Not, _) => 3,
        ExprKind::Unary(UnaryOp::Neg, _) => 7,
        _ => 8,
    }
}

fn expr_at(expr: &Expr, min: u8) -> String {
    let text = match &expr.kind {
        ExprKind::Number(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
            format!("-{}", number_literal(-v))
        }
        ExprKind::Number(v) => number_literal(*v),
        ExprKind::Str(s) => string_literal(s),
        ExprKind::Bool(true) => "True".into(),
        ExprKind::Bool(false) => "False".into(),
        ExprKind::Var(name) => name.clone(),
        ExprKind::List(items) => {
            format!("[{}]", items.iter().map(print_expr).collect::<Vec<_>>().join(", "))
        }
        ExprKind::Call(name, args) => {
            format!("{name}({})", args.iter().map(print_expr).collect::<Vec<_>>().join(", "))
        }
        ExprKind::Index(base, index) => format!("{}[{}]", expr_at(base, 8), print_expr(index)),
        ExprKind::Unary(UnaryOp::Neg, e) => format!("-{}", expr_at(e, 7)),
        ExprKind::Unary(UnaryOp::Not, e) => format!("not {}", expr_at(e, 3)),
        ExprKind::Binary(op, a, b) => {
            let p = op.precedence();
            let (lmin, rmin) = if op.is_comparison() { (p + 1, p + 1) } else { (p, p + 1) };
            format!("{} {} {}", expr_at(a, lmin), op.symbol(), expr_at(b, rmin))
        }
    };
    let needs_parens = expr_prec(expr) < min
        || matches!(&expr.kind, ExprKind::Number(v) if min >= 7 && v.is_sign_negative());
    if needs_parens {
        format!("({text})")
    } else {
        text
    }
}

