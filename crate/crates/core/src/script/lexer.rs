//! Line-oriented lexer with Python-style indentation tokens.

use std::fmt;

use thiserror::Error;

/// Source position (1-based line and column).
///
/// Spans never take part in equality, so ASTs compare structurally regardless of
/// where they were parsed from.
#[derive(Debug, Clone, Copy, Default, Eq, serde::Serialize, serde::Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    If,
    Elif,
    Else,
    For,
    In,
    While,
    Pass,
    And,
    Or,
    Not,
    True,
    False,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Self> {
        Some(match s {
            "if" => Keyword::If,
            "elif" => Keyword::Elif,
            "else" => Keyword::Else,
            "for" => Keyword::For,
            "in" => Keyword::In,
            "while" => Keyword::While,
            "pass" => Keyword::Pass,
            "and" => Keyword::And,
            "or" => Keyword::Or,
            "not" => Keyword::Not,
            "True" => Keyword::True,
            "False" => Keyword::False,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Keyword(Keyword),
    Int(i64),
    Float(f64),
    Str(String),
    /// `# section: name` comment at column 1.
    Section(String),
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Newline,
    Indent,
    Dedent,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(n) => return write!(f, "identifier `{n}`"),
            TokenKind::Keyword(k) => return write!(f, "keyword `{k:?}`"),
            TokenKind::Int(v) => return write!(f, "integer {v}"),
            TokenKind::Float(v) => return write!(f, "number {v}"),
            TokenKind::Str(_) => "string",
            TokenKind::Section(_) => "section comment",
            TokenKind::Assign => "`=`",
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::Slash => "`/`",
            TokenKind::Percent => "`%`",
            TokenKind::Eq => "`==`",
            TokenKind::Ne => "`!=`",
            TokenKind::Lt => "`<`",
            TokenKind::Le => "`<=`",
            TokenKind::Gt => "`>`",
            TokenKind::Ge => "`>=`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::Comma => "`,`",
            TokenKind::Colon => "`:`",
            TokenKind::Dot => "`.`",
            TokenKind::Newline => "end of line",
            TokenKind::Indent => "indent",
            TokenKind::Dedent => "dedent",
            TokenKind::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("{span}: illegal character {ch:?}")]
    IllegalCharacter { ch: char, span: Span },
    #[error("{span}: unterminated string")]
    UnterminatedString { span: Span },
    #[error("{span}: malformed number")]
    BadNumber { span: Span },
    #[error("{span}: dedent does not match any enclosing block")]
    BadIndent { span: Span },
}

impl LexError {
    pub fn span(&self) -> Span {
        match self {
            LexError::IllegalCharacter { span, .. }
            | LexError::UnterminatedString { span }
            | LexError::BadNumber { span }
            | LexError::BadIndent { span } => *span,
        }
    }
}

const SECTION_PREFIX: &str = "# section:";

pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut indents: Vec<usize> = vec![0];
    let mut depth = 0usize;
    let mut last_line = 1u32;

    for (idx, line) in source.split('\n').enumerate() {
        let lineno = idx as u32 + 1;
        last_line = lineno;
        let line = line.strip_suffix('\r').unwrap_or(line);
        let indent = line.len() - line.trim_start_matches(' ').len();
        let rest = &line[indent..];
        if let Some(pos) = rest.find('\t').filter(|&p| rest[..p].trim().is_empty()) {
            return Err(LexError::IllegalCharacter {
                ch: '\t',
                span: Span::new(lineno, (indent + pos) as u32 + 1),
            });
        }
        let blank = rest.trim().is_empty() || rest.starts_with('#');
        if depth == 0 {
            let section = (indent == 0)
                .then(|| rest.strip_prefix(SECTION_PREFIX))
                .flatten()
                .map(|name| name.trim().to_string());
            if blank && section.is_none() {
                continue;
            }
            let span = Span::new(lineno, indent as u32 + 1);
            let top = *indents.last().expect("indent stack never empty");
            if indent > top {
                indents.push(indent);
                tokens.push(Token { kind: TokenKind::Indent, span });
            } else {
                while indent < *indents.last().expect("indent stack never empty") {
                    indents.pop();
                    tokens.push(Token { kind: TokenKind::Dedent, span });
                }
                if indent != *indents.last().expect("indent stack never empty") {
                    return Err(LexError::BadIndent { span });
                }
            }
            if let Some(name) = section {
                tokens.push(Token { kind: TokenKind::Section(name), span });
                continue;
            }
        } else if blank {
            continue;
        }
        lex_line(rest, lineno, indent, &mut depth, &mut tokens)?;
        if depth == 0 {
            tokens.push(Token {
                kind: TokenKind::Newline,
                span: Span::new(lineno, line.len() as u32 + 1),
            });
        }
    }
    let end = Span::new(last_line + 1, 1);
    if depth > 0 && tokens.last().map(|t| &t.kind) != Some(&TokenKind::Newline) {
        tokens.push(Token { kind: TokenKind::Newline, span: end });
    }
    for _ in 1..indents.len() {
        tokens.push(Token { kind: TokenKind::Dedent, span: end });
    }
    tokens.push(Token { kind: TokenKind::Eof, span: end });
    Ok(tokens)
}

fn lex_line(
    text: &str,
    line: u32,
    offset: usize,
    depth: &mut usize,
    out: &mut Vec<Token>,
) -> Result<(), LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let col = |i: usize| (offset + i) as u32 + 1;
    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col(i));
        if c == ' ' {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        let simple = |kind| Token { kind, span };
        let two = chars.get(i + 1).copied();
        match c {
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let kind = match Keyword::from_ident(&word) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(word),
                };
                out.push(Token { kind, span });
                continue;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let mut float = false;
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    float = true;
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    float = true;
                    i += 1;
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                        i += 1;
                    }
                    let digits = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if digits == i {
                        return Err(LexError::BadNumber { span });
                    }
                }
                if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                    return Err(LexError::BadNumber { span });
                }
                let text: String = chars[start..i].iter().collect();
                let kind = if float {
                    TokenKind::Float(text.parse().map_err(|_| LexError::BadNumber { span })?)
                } else {
                    match text.parse::<i64>() {
                        Ok(v) if v <= (1 << 53) => TokenKind::Int(v),
                        _ => return Err(LexError::BadNumber { span }),
                    }
                };
                out.push(Token { kind, span });
                continue;
            }
            '\'' | '"' => {
                let quote = c;
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(LexError::UnterminatedString { span }),
                        Some(&ch) if ch == quote => break,
                        Some('\\') => {
                            let esc = match chars.get(i + 1) {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('\\') => '\\',
                                Some('\'') => '\'',
                                Some('"') => '"',
                                _ => return Err(LexError::UnterminatedString { span }),
                            };
                            s.push(esc);
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push(Token { kind: TokenKind::Str(s), span });
                continue;
            }
            '=' if two == Some('=') => {
                out.push(simple(TokenKind::Eq));
                i += 2;
                continue;
            }
            '!' if two == Some('=') => {
                out.push(simple(TokenKind::Ne));
                i += 2;
                continue;
            }
            '<' if two == Some('=') => {
                out.push(simple(TokenKind::Le));
                i += 2;
                continue;
            }
            '>' if two == Some('=') => {
                out.push(simple(TokenKind::Ge));
                i += 2;
                continue;
            }
            '(' | '[' => *depth += 1,
            ')' | ']' => *depth = depth.saturating_sub(1),
            _ => {}
        }
        let kind = match c {
            '=' => TokenKind::Assign,
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            '*' => TokenKind::Star,
            '/' => TokenKind::Slash,
            '%' => TokenKind::Percent,
            '<' => TokenKind::Lt,
            '>' => TokenKind::Gt,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            ',' => TokenKind::Comma,
            ':' => TokenKind::Colon,
            '.' => TokenKind::Dot,
            other => return Err(LexError::IllegalCharacter { ch: other, span }),
        };
        out.push(simple(kind));
        i += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        lex(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn assignment() {
        assert_eq!(
            kinds("x = 1"),
            vec![
                TokenKind::Ident("x".into()),
                TokenKind::Assign,
                TokenKind::Int(1),
                TokenKind::Newline,
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn while_header() {
        assert_eq!(
            kinds("while x < 10:")[..5],
            [
                TokenKind::Keyword(Keyword::While),
                TokenKind::Ident("x".into()),
                TokenKind::Lt,
                TokenKind::Int(10),
                TokenKind::Colon
            ]
        );
    }

    #[test]
    fn illegal_character_column() {
        let err = lex("x @ 1").unwrap_err();
        assert!(matches!(err, LexError::IllegalCharacter { ch: '@', .. }));
        assert_eq!((err.span().line, err.span().col), (1, 3));
    }

    #[test]
    fn indentation_tokens() {
        let k = kinds("if x:\n    y = 1\n\n    # note\nz = 2\n");
        assert_eq!(k.iter().filter(|t| **t == TokenKind::Indent).count(), 1);
        assert_eq!(k.iter().filter(|t| **t == TokenKind::Dedent).count(), 1);
        assert!(matches!(lex("if x:\n    y = 1\n  z = 2"), Err(LexError::BadIndent { .. })));
    }

    #[test]
    fn numbers_strings_sections() {
        let k = kinds("# section: preamble\nx = 2.5e-3 + 1e20\ns = 'a\\'b'");
        assert_eq!(k[0], TokenKind::Section("preamble".into()));
        assert!(k.contains(&TokenKind::Float(2.5e-3)));
        assert!(k.contains(&TokenKind::Float(1e20)));
        assert!(k.contains(&TokenKind::Str("a'b".into())));
        assert!(matches!(lex("s = 'abc"), Err(LexError::UnterminatedString { .. })));
        assert!(matches!(lex("x = 12ab"), Err(LexError::BadNumber { .. })));
    }

    #[test]
    fn brackets_join_lines() {
        let k = kinds("f(1,\n  2)\n");
        assert_eq!(k.iter().filter(|t| **t == TokenKind::Newline).count(), 1);
    }
}
