//! Recursive-descent parser for SimScript.

use thiserror::Error;

use super::ast::{BinaryOp, Expr, ExprKind, Program, SectionMarker, Stmt, StmtKind, UnaryOp};
use super::lexer::{lex, Keyword, LexError, Span, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{span}: unexpected {found}, expected {expected}")]
    UnexpectedToken { found: String, expected: String, span: Span },
    #[error("{span}: block opened here has no indented body")]
    UnterminatedBlock { span: Span },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Lex(e) => e.span(),
            ParseError::UnexpectedToken { span, .. } | ParseError::UnterminatedBlock { span } => *span,
        }
    }
}

/// Lex and parse source text.
pub fn parse_source(source: &str) -> Result<Program, ParseError> {
    parse(&lex(source)?)
}

pub fn parse(tokens: &[Token]) -> Result<Program, ParseError> {
    let mut p = Parser { tokens, pos: 0 };
    let mut body = Vec::new();
    let mut sections = Vec::new();
    loop {
        match p.peek() {
            TokenKind::Eof => break,
            TokenKind::Section(name) => {
                sections.push(SectionMarker { name: name.clone(), at: body.len() });
                p.pos += 1;
            }
            _ => body.push(p.statement()?),
        }
    }
    Ok(Program { body, sections })
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t TokenKind {
        &self.tokens[self.pos.min(self.tokens.len() - 1)].kind
    }

    fn span(&self) -> Span {
        self.tokens[self.pos.min(self.tokens.len() - 1)].span
    }

    fn bump(&mut self) -> &'t Token {
        let tok = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::UnexpectedToken {
            found: self.peek().to_string(),
            expected: expected.to_string(),
            span: self.span(),
        })
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            self.unexpected(what)
        }
    }

    fn keyword(&mut self, kw: Keyword) -> bool {
        self.eat(&TokenKind::Keyword(kw))
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let kind = match self.peek() {
            TokenKind::Keyword(Keyword::If) => {
                self.bump();
                let mut branches = Vec::new();
                let cond = self.expr()?;
                branches.push((cond, self.suite(span)?));
                let mut orelse = Vec::new();
                loop {
                    let at = self.span();
                    if self.keyword(Keyword::Elif) {
                        let cond = self.expr()?;
                        branches.push((cond, self.suite(at)?));
                    } else if self.keyword(Keyword::Else) {
                        orelse = self.suite(at)?;
                        break;
                    } else {
                        break;
                    }
                }
                StmtKind::If { branches, orelse }
            }
            TokenKind::Keyword(Keyword::For) => {
                self.bump();
                let var = self.ident("loop variable")?;
                if !self.keyword(Keyword::In) {
                    return self.unexpected("`in`");
                }
                if self.ident("`range`")? != "range" {
                    return Err(ParseError::UnexpectedToken {
                        found: "iterable".into(),
                        expected: "`range(...)`".into(),
                        span,
                    });
                }
                self.expect(TokenKind::LParen, "`(`")?;
                let first = self.expr()?;
                let (start, end) = if self.eat(&TokenKind::Comma) {
                    (Some(first), self.expr()?)
                } else {
                    (None, first)
                };
                self.expect(TokenKind::RParen, "`)`")?;
                StmtKind::For { var, start, end, body: self.suite(span)? }
            }
            TokenKind::Keyword(Keyword::While) => {
                self.bump();
                let cond = self.expr()?;
                StmtKind::While { cond, body: self.suite(span)? }
            }
            _ => {
                let kind = self.simple()?;
                self.expect(TokenKind::Newline, "end of line")?;
                kind
            }
        };
        Ok(Stmt { kind, span })
    }

    /// `:` followed by either an indented block or one simple statement on the same line.
    fn suite(&mut self, opened: Span) -> PResult<Vec<Stmt>> {
        self.expect(TokenKind::Colon, "`:`")?;
        if self.eat(&TokenKind::Newline) {
            if !self.eat(&TokenKind::Indent) {
                return Err(ParseError::UnterminatedBlock { span: opened });
            }
            let mut body = Vec::new();
            while !self.eat(&TokenKind::Dedent) {
                if matches!(self.peek(), TokenKind::Eof) {
                    return Err(ParseError::UnterminatedBlock { span: opened });
                }
                body.push(self.statement()?);
            }
            Ok(body)
        } else if matches!(self.peek(), TokenKind::Eof) {
            Err(ParseError::UnterminatedBlock { span: opened })
        } else {
            let span = self.span();
            let kind = self.simple()?;
            self.expect(TokenKind::Newline, "end of line")?;
            Ok(vec![Stmt { kind, span }])
        }
    }

    fn simple(&mut self) -> PResult<StmtKind> {
        if self.keyword(Keyword::Pass) {
            return Ok(StmtKind::Pass);
        }
        if let TokenKind::Ident(name) = self.peek() {
            match self.tokens.get(self.pos + 1).map(|t| &t.kind) {
                Some(TokenKind::Assign) => {
                    self.pos += 2;
                    return Ok(StmtKind::Assign { target: name.clone(), value: self.expr()? });
                }
                Some(TokenKind::Dot) => {
                    self.pos += 2;
                    if self.ident("`append`")? != "append" {
                        return Err(ParseError::UnexpectedToken {
                            found: "method".into(),
                            expected: "`append`".into(),
                            span: self.span(),
                        });
                    }
                    self.expect(TokenKind::LParen, "`(`")?;
                    let value = self.expr()?;
                    self.expect(TokenKind::RParen, "`)`")?;
                    return Ok(StmtKind::Append { target: name.clone(), value });
                }
                _ => {}
            }
        }
        let span = self.span();
        let expr = self.expr()?;
        if matches!(expr.kind, ExprKind::Call(..)) {
            Ok(StmtKind::Call(expr))
        } else {
            Err(ParseError::UnexpectedToken {
                found: "expression".into(),
                expected: "statement".into(),
                span,
            })
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            TokenKind::Ident(name) => {
                self.bump();
                Ok(name.clone())
            }
            _ => self.unexpected(what),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek() {
            TokenKind::Keyword(Keyword::Or) => BinaryOp::Or,
            TokenKind::Keyword(Keyword::And) => BinaryOp::And,
            TokenKind::Eq => BinaryOp::Eq,
            TokenKind::Ne => BinaryOp::Ne,
            TokenKind::Lt => BinaryOp::Lt,
            TokenKind::Le => BinaryOp::Le,
            TokenKind::Gt => BinaryOp::Gt,
            TokenKind::Ge => BinaryOp::Ge,
            TokenKind::Plus => BinaryOp::Add,
            TokenKind::Minus => BinaryOp::Sub,
            TokenKind::Star => BinaryOp::Mul,
            TokenKind::Slash => BinaryOp::Div,
            TokenKind::Percent => BinaryOp::Mod,
            _ => return None,
        })
    }

    /// Precedence climbing. Level 3 is `not`; comparisons do not chain.
    fn binary(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = if min <= 3 && matches!(self.peek(), TokenKind::Keyword(Keyword::Not)) {
            let span = self.span();
            self.bump();
            let operand = self.binary(3)?;
            Expr { kind: ExprKind::Unary(UnaryOp::Not, Box::new(operand)), span }
        } else if min <= 3 {
            self.binary(4)?
        } else {
            self.unary()?
        };
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min {
                break;
            }
            let span = self.span();
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
            if op.is_comparison() && self.binary_op().is_some_and(|o| o.is_comparison()) {
                return self.unexpected("end of comparison (comparisons do not chain)");
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if matches!(self.peek(), TokenKind::Minus) {
            let span = self.span();
            self.bump();
            let operand = self.unary()?;
            return Ok(Expr { kind: ExprKind::Unary(UnaryOp::Neg, Box::new(operand)), span });
        }
        let mut expr = self.primary()?;
        while matches!(self.peek(), TokenKind::LBracket) {
            let span = self.span();
            self.bump();
            let index = self.expr()?;
            self.expect(TokenKind::RBracket, "`]`")?;
            expr = Expr { kind: ExprKind::Index(Box::new(expr), Box::new(index)), span };
        }
        Ok(expr)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek() {
            TokenKind::Int(v) => ExprKind::Number(*v as f64),
            TokenKind::Float(v) => ExprKind::Number(*v),
            TokenKind::Str(s) => ExprKind::Str(s.clone()),
            TokenKind::Keyword(Keyword::True) => ExprKind::Bool(true),
            TokenKind::Keyword(Keyword::False) => ExprKind::Bool(false),
            TokenKind::Ident(name) => {
                self.bump();
                if self.eat(&TokenKind::LParen) {
                    let args = self.list_tail(TokenKind::RParen, "`)`")?;
                    return Ok(Expr { kind: ExprKind::Call(name.clone(), args), span });
                }
                return Ok(Expr { kind: ExprKind::Var(name.clone()), span });
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                return Ok(inner);
            }
            TokenKind::LBracket => {
                self.bump();
                let items = self.list_tail(TokenKind::RBracket, "`]`")?;
                return Ok(Expr { kind: ExprKind::List(items), span });
            }
            _ => return self.unexpected("expression"),
        };
        self.bump();
        Ok(Expr { kind, span })
    }

    fn list_tail(&mut self, close: TokenKind, what: &str) -> PResult<Vec<Expr>> {
        let mut items = Vec::new();
        if self.eat(&close) {
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.eat(&close) {
                return Ok(items);
            }
            self.expect(TokenKind::Comma, &format!("`,` or {what}"))?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn for_loop_with_inline_body() {
        let p = parse_source("x = 0\nfor t in range(10): x = x + 1\n").unwrap();
        assert_eq!(p.body.len(), 2);
        match &p.body[1].kind {
            StmtKind::For { var, start: None, body, .. } => {
                assert_eq!(var, "t");
                assert_eq!(body.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn incomplete_comparison() {
        assert!(matches!(parse_source("if x >"), Err(ParseError::UnexpectedToken { .. })));
    }

    #[test]
    fn unterminated_block() {
        assert!(matches!(parse_source("while x < 1:\n"), Err(ParseError::UnterminatedBlock { .. })));
        assert!(matches!(parse_source("while x < 1:"), Err(ParseError::UnterminatedBlock { .. })));
    }

    #[test]
    fn precedence() {
        let p = parse_source("y = 1 + 2 * 3 < 4 and not z or w\n").unwrap();
        let StmtKind::Assign { value, .. } = &p.body[0].kind else { panic!() };
        let ExprKind::Binary(BinaryOp::Or, lhs, _) = &value.kind else { panic!("{value:?}") };
        let ExprKind::Binary(BinaryOp::And, cmp, not) = &lhs.kind else { panic!() };
        assert!(matches!(not.kind, ExprKind::Unary(UnaryOp::Not, _)));
        let ExprKind::Binary(BinaryOp::Lt, sum, _) = &cmp.kind else { panic!() };
        let ExprKind::Binary(BinaryOp::Add, _, prod) = &sum.kind else { panic!() };
        assert!(matches!(prod.kind, ExprKind::Binary(BinaryOp::Mul, _, _)));
    }

    #[test]
    fn chained_comparison_rejected() {
        assert!(parse_source("y = 1 < 2 < 3\n").is_err());
    }

    #[test]
    fn elif_else_append_index_sections() {
        let src = "# section: main\nq = []\nq.append(3)\nif q[0] > 2:\n    x = 1\nelif q[0] == 2:\n    x = 2\nelse:\n    x = 3\n";
        let p = parse_source(src).unwrap();
        assert_eq!(p.section_names(), vec!["main"]);
        assert_eq!(p.body.len(), 3);
        let StmtKind::If { branches, orelse } = &p.body[2].kind else { panic!() };
        assert_eq!((branches.len(), orelse.len()), (2, 1));
    }

    #[test]
    fn bare_expression_is_not_a_statement() {
        assert!(matches!(parse_source("x + 1\n"), Err(ParseError::UnexpectedToken { .. })));
    }
}
