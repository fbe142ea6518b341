//! Tree-walking interpreter.
//!
//! Values are 64-bit floats, booleans, strings and lists. Integer-valued slots
//! (range bounds, list indices, `rand_uniform_int` bounds) reject non-integral numbers.
//! Every executed statement and every loop iteration costs one step.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{BinaryOp, Expr, ExprKind, Program, Stmt, StmtKind, UnaryOp};
use super::builtins;
use super::lexer::Span;
use crate::rng::SimRng;
use crate::run::{PlotDecl, RunResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecLimits {
    pub max_steps: u64,
    pub max_series_points: u64,
}

impl Default for ExecLimits {
    fn default() -> Self {
        Self { max_steps: 10_000_000, max_series_points: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RuntimeError {
    #[error("step budget of {limit} exceeded")]
    StepBudgetExceeded { limit: u64 },
    #[error("series budget of {limit} points exceeded")]
    SeriesBudgetExceeded { limit: u64 },
    #[error("{span}: type error: {message}")]
    RuntimeTypeError { message: String, span: Span },
    #[error("{span}: division by zero")]
    DivisionByZero { span: Span },
    #[error("{span}: undefined variable {name}")]
    UndefinedVariable { name: String, span: Span },
    #[error("{span}: unknown function {name}")]
    UnknownFunction { name: String, span: Span },
    #[error("{span}: index {index} out of range for list of length {len}")]
    IndexOutOfRange { index: f64, len: usize, span: Span },
    #[error("{span}: invalid argument: {message}")]
    InvalidArgument { message: String, span: Span },
    #[error("{span}: series {series} would go backwards in x")]
    SeriesOrder { series: String, span: Span },
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{error}")]
pub struct RunFailure {
    pub error: RuntimeError,
    pub partial: RunResult,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
    Unit,
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Num(_) => "number",
            Value::Bool(_) => "bool",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Unit => "nothing",
        }
    }
}

pub fn interpret(program: &Program, seed: u64, limits: ExecLimits) -> Result<RunResult, RunFailure> {
    let mut interp = Interpreter {
        vars: HashMap::new(),
        rng: SimRng::new(seed),
        limits,
        steps: 0,
        points: 0,
        result: RunResult::new(seed),
    };
    match interp.block(&program.body) {
        Ok(()) => {
            interp.result.steps_used = interp.steps;
            Ok(interp.result)
        }
        Err(error) => {
            interp.result.steps_used = interp.steps;
            Err(RunFailure { error, partial: interp.result })
        }
    }
}

struct Interpreter {
    vars: HashMap<String, Value>,
    rng: SimRng,
    limits: ExecLimits,
    steps: u64,
    points: u64,
    result: RunResult,
}

type RResult<T> = Result<T, RuntimeError>;

fn type_error<T>(message: impl Into<String>, span: Span) -> RResult<T> {
    Err(RuntimeError::RuntimeTypeError { message: message.into(), span })
}

fn as_int(v: f64, what: &str, span: Span) -> RResult<i64> {
    if v.fract() == 0.0 && v.abs() <= (1u64 << 53) as f64 {
        Ok(v as i64)
    } else {
        type_error(format!("{what} must be an integer, got {v}"), span)
    }
}

impl Interpreter {
    fn tick(&mut self) -> RResult<()> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            self.steps = self.limits.max_steps;
            return Err(RuntimeError::StepBudgetExceeded { limit: self.limits.max_steps });
        }
        Ok(())
    }

    fn block(&mut self, body: &[Stmt]) -> RResult<()> {
        for stmt in body {
            self.stmt(stmt)?;
        }
        Ok(())
    }

    fn stmt(&mut self, stmt: &Stmt) -> RResult<()> {
        self.tick()?;
        match &stmt.kind {
            StmtKind::Assign { target, value } => {
                let v = self.eval(value)?;
                match self.vars.get_mut(target) {
                    Some(slot) => *slot = v,
                    None => {
                        self.vars.insert(target.clone(), v);
                    }
                }
            }
            StmtKind::Append { target, value } => {
                let v = self.eval(value)?;
                match self.vars.get_mut(target) {
                    Some(Value::List(items)) => items.push(v),
                    Some(other) => {
                        return type_error(format!("cannot append to {}", other.type_name()), stmt.span)
                    }
                    None => {
                        return Err(RuntimeError::UndefinedVariable { name: target.clone(), span: stmt.span })
                    }
                }
            }
            StmtKind::Call(expr) => {
                self.eval(expr)?;
            }
            StmtKind::Pass => {}
            StmtKind::If { branches, orelse } => {
                for (cond, body) in branches {
                    if self.truth(cond)? {
                        return self.block(body);
                    }
                }
                self.block(orelse)?;
            }
            StmtKind::For { var, start, end, body } => {
                let lo = match start {
                    Some(s) => self.int(s, "range start")?,
                    None => 0,
                };
                let hi = self.int(end, "range end")?;
                for i in lo..hi {
                    self.tick()?;
                    self.vars.insert(var.clone(), Value::Num(i as f64));
                    self.block(body)?;
                }
            }
            StmtKind::While { cond, body } => {
                while self.truth(cond)? {
                    self.tick()?;
                    self.block(body)?;
                }
            }
        }
        Ok(())
    }

    fn truth(&mut self, cond: &Expr) -> RResult<bool> {
        match self.eval(cond)? {
            Value::Bool(b) => Ok(b),
            other => type_error(format!("condition must be bool, got {}", other.type_name()), cond.span),
        }
    }

    fn num(&mut self, e: &Expr) -> RResult<f64> {
        match self.eval(e)? {
            Value::Num(v) => Ok(v),
            other => type_error(format!("expected number, got {}", other.type_name()), e.span),
        }
    }

    fn int(&mut self, e: &Expr, what: &str) -> RResult<i64> {
        let v = self.num(e)?;
        as_int(v, what, e.span)
    }

    fn string(&mut self, e: &Expr) -> RResult<String> {
        match self.eval(e)? {
            Value::Str(s) => Ok(s),
            other => type_error(format!("expected string, got {}", other.type_name()), e.span),
        }
    }

    fn boolean(&mut self, e: &Expr) -> RResult<bool> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            other => type_error(format!("expected bool, got {}", other.type_name()), e.span),
        }
    }

    fn var(&self, name: &str, span: Span) -> RResult<&Value> {
        self.vars
            .get(name)
            .ok_or_else(|| RuntimeError::UndefinedVariable { name: name.to_string(), span })
    }

    /// Length or element of a list without copying it when it is a plain variable.
    fn with_list<T>(&mut self, e: &Expr, f: impl FnOnce(&[Value]) -> RResult<T>) -> RResult<T> {
        if let ExprKind::Var(name) = &e.kind {
            return match self.var(name, e.span)? {
                Value::List(items) => f(items),
                other => type_error(format!("expected list, got {}", other.type_name()), e.span),
            };
        }
        match self.eval(e)? {
            Value::List(items) => f(&items),
            other => type_error(format!("expected list, got {}", other.type_name()), e.span),
        }
    }

    fn eval(&mut self, e: &Expr) -> RResult<Value> {
        let span = e.span;
        Ok(match &e.kind {
            ExprKind::Number(v) => Value::Num(*v),
            ExprKind::Str(s) => Value::Str(s.clone()),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Var(name) => self.var(name, span)?.clone(),
            ExprKind::List(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(self.eval(item)?);
                }
                Value::List(out)
            }
            ExprKind::Index(base, index) => {
                let i = self.int(index, "list index")?;
                self.with_list(base, |items| {
                    usize::try_from(i)
                        .ok()
                        .and_then(|i| items.get(i))
                        .cloned()
                        .ok_or(RuntimeError::IndexOutOfRange { index: i as f64, len: items.len(), span })
                })?
            }
            ExprKind::Unary(UnaryOp::Neg, operand) => Value::Num(-self.num(operand)?),
            ExprKind::Unary(UnaryOp::Not, operand) => Value::Bool(!self.boolean(operand)?),
            ExprKind::Binary(op, a, b) => self.binary(*op, a, b, span)?,
            ExprKind::Call(name, args) => self.call(name, args, span)?,
        })
    }

    fn binary(&mut self, op: BinaryOp, a: &Expr, b: &Expr, span: Span) -> RResult<Value> {
        match op {
            BinaryOp::And => return Ok(Value::Bool(self.boolean(a)? && self.boolean(b)?)),
            BinaryOp::Or => return Ok(Value::Bool(self.boolean(a)? || self.boolean(b)?)),
            BinaryOp::Eq | BinaryOp::Ne => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                let same = match (&x, &y) {
                    (Value::Num(p), Value::Num(q)) => p == q,
                    (Value::Bool(p), Value::Bool(q)) => p == q,
                    (Value::Str(p), Value::Str(q)) => p == q,
                    _ => {
                        return type_error(
                            format!("cannot compare {} with {}", x.type_name(), y.type_name()),
                            span,
                        )
                    }
                };
                return Ok(Value::Bool(if op == BinaryOp::Eq { same } else { !same }));
            }
            _ => {}
        }
        let (x, y) = (self.num(a)?, self.num(b)?);
        Ok(match op {
            BinaryOp::Add => Value::Num(x + y),
            BinaryOp::Sub => Value::Num(x - y),
            BinaryOp::Mul => Value::Num(x * y),
            BinaryOp::Div => {
                if y == 0.0 {
                    return Err(RuntimeError::DivisionByZero { span });
                }
                Value::Num(x / y)
            }
            BinaryOp::Mod => {
                if y == 0.0 {
                    return Err(RuntimeError::DivisionByZero { span });
                }
                // Result takes the sign of the divisor.
                Value::Num(x - y * (x / y).floor())
            }
            BinaryOp::Lt => Value::Bool(x < y),
            BinaryOp::Le => Value::Bool(x <= y),
            BinaryOp::Gt => Value::Bool(x > y),
            BinaryOp::Ge => Value::Bool(x >= y),
            BinaryOp::And | BinaryOp::Or | BinaryOp::Eq | BinaryOp::Ne => unreachable!("handled above"),
        })
    }

    fn call(&mut self, name: &str, args: &[Expr], span: Span) -> RResult<Value> {
        let Some(builtin) = builtins::lookup(name) else {
            return Err(RuntimeError::UnknownFunction { name: name.to_string(), span });
        };
        if builtin.arity != args.len() {
            return type_error(
                format!("{name} takes {} argument(s), got {}", builtin.arity, args.len()),
                span,
            );
        }
        let invalid = |message: String| Err(RuntimeError::InvalidArgument { message, span });
        Ok(match name {
            "rand_uniform" => {
                let (lo, hi) = (self.num(&args[0])?, self.num(&args[1])?);
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return invalid(format!("rand_uniform({lo}, {hi})"));
                }
                Value::Num(self.rng.uniform(lo, hi))
            }
            "rand_uniform_int" => {
                let lo = self.int(&args[0], "rand_uniform_int low")?;
                let hi = self.int(&args[1], "rand_uniform_int high")?;
                if lo > hi {
                    return invalid(format!("rand_uniform_int({lo}, {hi})"));
                }
                Value::Num(self.rng.uniform_int(lo as f64, hi as f64))
            }
            "rand_exp" => {
                let mean = self.num(&args[0])?;
                if !(mean.is_finite() && mean > 0.0) {
                    return invalid(format!("rand_exp({mean})"));
                }
                Value::Num(self.rng.exponential(mean))
            }
            "record" => {
                let series = self.string(&args[0])?;
                let (x, y) = (self.num(&args[1])?, self.num(&args[2])?);
                if self.points >= self.limits.max_series_points {
                    return Err(RuntimeError::SeriesBudgetExceeded { limit: self.limits.max_series_points });
                }
                if let Some(&(last, _)) = self.result.series.get(&series).and_then(|s| s.last()) {
                    if x < last {
                        return Err(RuntimeError::SeriesOrder { series, span });
                    }
                }
                self.points += 1;
                self.result.push_point(&series, x, y);
                Value::Unit
            }
            "mark_event" => {
                let event = self.string(&args[0])?;
                let x = self.num(&args[1])?;
                self.result.push_event(&event, x);
                Value::Unit
            }
            "plot_decl" => {
                let xlabel = self.string(&args[0])?;
                let ylabel = self.string(&args[1])?;
                let grid = self.boolean(&args[2])?;
                let legend = self.boolean(&args[3])?;
                self.result.plot = Some(PlotDecl { xlabel, ylabel, grid, legend });
                Value::Unit
            }
            "min" => Value::Num(self.num(&args[0])?.min(self.num(&args[1])?)),
            "max" => Value::Num(self.num(&args[0])?.max(self.num(&args[1])?)),
            "floor" => Value::Num(self.num(&args[0])?.floor()),
            "ceil" => Value::Num(self.num(&args[0])?.ceil()),
            "abs" => Value::Num(self.num(&args[0])?.abs()),
            "len" => Value::Num(self.with_list(&args[0], |items| Ok(items.len()))? as f64),
            _ => unreachable!("every table entry is handled"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_source;

    fn run(src: &str) -> Result<RunResult, RunFailure> {
        interpret(&parse_source(src).unwrap(), 1, ExecLimits::default())
    }

    #[test]
    fn records_a_point() {
        let r = run("x = 1\nrecord('x', 0, x)\n").unwrap();
        assert_eq!(r.series("x"), Some(&[(0.0, 1.0)][..]));
        assert_eq!(r.steps_used, 2);
    }

    #[test]
    fn step_budget() {
        let prog = parse_source("while 1 < 2: x = 1\n").unwrap();
        let err = interpret(&prog, 0, ExecLimits { max_steps: 1000, max_series_points: 10 }).unwrap_err();
        assert_eq!(err.error, RuntimeError::StepBudgetExceeded { limit: 1000 });
        assert_eq!(err.partial.steps_used, 1000);
    }

    #[test]
    fn series_budget_keeps_partial_trace() {
        let prog = parse_source("for i in range(10): record('s', i, i)\n").unwrap();
        let err = interpret(&prog, 0, ExecLimits { max_steps: 1000, max_series_points: 4 }).unwrap_err();
        assert_eq!(err.error, RuntimeError::SeriesBudgetExceeded { limit: 4 });
        assert_eq!(err.partial.series("s").unwrap().len(), 4);
    }

    #[test]
    fn runtime_errors() {
        assert!(matches!(run("x = 1 / 0\n").unwrap_err().error, RuntimeError::DivisionByZero { .. }));
        assert!(matches!(run("x = 'a' + 1\n").unwrap_err().error, RuntimeError::RuntimeTypeError { .. }));
        assert!(matches!(run("if 1: pass\n").unwrap_err().error, RuntimeError::RuntimeTypeError { .. }));
        assert!(matches!(run("for i in range(2.5): pass\n").unwrap_err().error, RuntimeError::RuntimeTypeError { .. }));
        assert!(matches!(run("q = [1]\nx = q[1]\n").unwrap_err().error, RuntimeError::IndexOutOfRange { .. }));
        assert!(matches!(run("x = rand_exp(0)\n").unwrap_err().error, RuntimeError::InvalidArgument { .. }));
        assert!(matches!(run("record('s', 2, 0)\nrecord('s', 1, 0)\n").unwrap_err().error, RuntimeError::SeriesOrder { .. }));
        assert!(matches!(run("y = z\n").unwrap_err().error, RuntimeError::UndefinedVariable { .. }));
    }

    #[test]
    fn arithmetic_and_lists() {
        let r = run(
            "q = []\nfor i in range(1, 4):\n    q.append(i * 2)\nrecord('a', 0, q[2] + len(q))\nrecord('a', 1, -7 % 3)\nrecord('a', 2, min(3, floor(2.7)))\n",
        )
        .unwrap();
        assert_eq!(r.series("a").unwrap(), &[(0.0, 9.0), (1.0, 2.0), (2.0, 2.0)]);
    }

    #[test]
    fn short_circuit() {
        // The right operand would fail if evaluated.
        assert!(run("q = []\nif len(q) > 0 and q[0] == 1: pass\n").is_ok());
    }

    #[test]
    fn plot_and_events() {
        let r = run("plot_decl('time', 'inventory', True, False)\nmark_event('order', 3)\n").unwrap();
        assert_eq!(r.plot.as_ref().unwrap().ylabel, "inventory");
        assert!(!r.plot.as_ref().unwrap().legend);
        assert_eq!(r.events_named("order").collect::<Vec<_>>(), vec![3.0]);
    }
}
