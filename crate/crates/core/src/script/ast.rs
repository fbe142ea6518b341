use serde::{Deserialize, Serialize};

use super::lexer::Span;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub body: Vec<Stmt>,
    /// Top-level `# section:` markers, each placed before `body[at]`.
    pub sections: Vec<SectionMarker>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionMarker {
    pub name: String,
    pub at: usize,
}

impl Program {
    pub fn section_names(&self) -> Vec<&str> {
        self.sections.iter().map(|s| s.name.as_str()).collect()
    }

    /// Every builtin call in the program, nested ones included.
    pub fn for_each_call<'a>(&'a self, f: &mut impl FnMut(&'a str, usize, Span)) {
        fn walk<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a str, usize, Span)) {
            for stmt in stmts {
                match &stmt.kind {
                    StmtKind::Assign { value, .. } | StmtKind::Append { value, .. } | StmtKind::Call(value) => {
                        value.for_each_call(f)
                    }
                    StmtKind::If { branches, orelse } => {
                        for (cond, body) in branches {
                            cond.for_each_call(f);
                            walk(body, f);
                        }
                        walk(orelse, f);
                    }
                    StmtKind::For { start, end, body, .. } => {
                        if let Some(s) = start {
                            s.for_each_call(f);
                        }
                        end.for_each_call(f);
                        walk(body, f);
                    }
                    StmtKind::While { cond, body } => {
                        cond.for_each_call(f);
                        walk(body, f);
                    }
                    StmtKind::Pass => {}
                }
            }
        }
        walk(&self.body, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StmtKind {
    Assign { target: String, value: Expr },
    /// `target.append(value)`
    Append { target: String, value: Expr },
    /// A builtin call evaluated for its effect.
    Call(Expr),
    If { branches: Vec<(Expr, Vec<Stmt>)>, orelse: Vec<Stmt> },
    /// `for var in range(start, end)`; `start` defaults to 0.
    For { var: String, start: Option<Expr>, end: Expr, body: Vec<Stmt> },
    While { cond: Expr, body: Vec<Stmt> },
    Pass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 6,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExprKind {
    Number(f64),
    Str(String),
    Bool(bool),
    Var(String),
    List(Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Self { kind, span: Span::default() }
    }

    /// Visit every variable name read by this expression.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a str, Span)) {
        match &self.kind {
            ExprKind::Var(name) => f(name, self.span),
            ExprKind::Number(_) | ExprKind::Str(_) | ExprKind::Bool(_) => {}
            ExprKind::List(items) | ExprKind::Call(_, items) => {
                items.iter().for_each(|e| e.for_each_var(f))
            }
            ExprKind::Index(a, b) | ExprKind::Binary(_, a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            ExprKind::Unary(_, e) => e.for_each_var(f),
        }
    }

    /// Visit every call (name, argument count, span), innermost last.
    pub fn for_each_call<'a>(&'a self, f: &mut impl FnMut(&'a str, usize, Span)) {
        match &self.kind {
            ExprKind::Call(name, args) => {
                f(name, args.len(), self.span);
                args.iter().for_each(|e| e.for_each_call(f));
            }
            ExprKind::List(items) => items.iter().for_each(|e| e.for_each_call(f)),
            ExprKind::Index(a, b) | ExprKind::Binary(_, a, b) => {
                a.for_each_call(f);
                b.for_each_call(f);
            }
            ExprKind::Unary(_, e) => e.for_each_call(f),
            _ => {}
        }
    }
}
