//! Spec grammar.
//!
//! ```text
//! spec    := imp
//! imp     := or ("->" imp)?
//! or      := and ("|" and)*
//! and     := until ("&" until)*
//! until   := unary ("U" interval? until)?
//! unary   := "!" unary | ("F" | "G") interval? unary | primary
//! primary := "true" | "false" | "(" spec ")" | lin cmp lin | ident
//! lin     := "-"? term (("+" | "-") term)*
//! term    := INT | (INT "*")? "sum" "(" ident ":" ident ")"
//! cmp     := ">=" | "<=" | ">" | "<" | "=="
//! interval:= "[" INT "," (INT | "inf") ")"
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use std::fmt;

use super::formula::{Cmp, Formula, LinExpr, LinearConstraint, SumTerm};
use super::interval::{End, Interval};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: unknown operator `{op}`")]
    UnknownOperator { line: usize, column: usize, op: String },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. } | ParseError::UnknownOperator { line, column, .. } => {
                (*line, *column)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

pub fn parse_spec(text: &str) -> Result<Formula, ParseError> {
    let (f, warnings) = parse_spec_with_warnings(text)?;
    for w in warnings {
        log::warn!("{w}");
    }
    Ok(f)
}

pub fn parse_spec_with_warnings(text: &str) -> Result<(Formula, Vec<ParseWarning>), ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0, warnings: Vec::new() };
    let f = p.implication()?;
    if let Some(t) = p.peek_token() {
        return Err(p.error_at(t, format!("unexpected `{}`", t.tok)));
    }
    Ok((f, p.warnings))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Not,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
    LBracket,
    Comma,
    Colon,
    Plus,
    Minus,
    Star,
    Cmp(Cmp),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => f.write_str(s),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Not => f.write_str("!"),
            Tok::And => f.write_str("&"),
            Tok::Or => f.write_str("|"),
            Tok::Arrow => f.write_str("->"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::LBracket => f.write_str("["),
            Tok::Comma => f.write_str(","),
            Tok::Colon => f.write_str(":"),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Star => f.write_str("*"),
            Tok::Cmp(c) => f.write_str(c.symbol()),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
    /// No whitespace between this token and the previous one.
    glued: bool,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    let mut glued = false;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                glued = false;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i, &mut col);
                glued = false;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                glued = false;
                continue;
            }
            _ => {}
        }
        let next = chars.get(i + 1).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            col += i - start;
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| ParseError::Syntax {
                line: tl,
                column: tc,
                message: format!("integer `{s}` is out of range"),
            })?;
            Tok::Int(n)
        } else {
            let (tok, width) = match (c, next) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('>', Some('=')) => (Tok::Cmp(Cmp::Ge), 2),
                ('<', Some('=')) => (Tok::Cmp(Cmp::Le), 2),
                ('=', Some('=')) => (Tok::Cmp(Cmp::Eq), 2),
                ('>', _) => (Tok::Cmp(Cmp::Gt), 1),
                ('<', _) => (Tok::Cmp(Cmp::Lt), 1),
                ('!', _) => (Tok::Not, 1),
                ('&', _) => (Tok::And, 1),
                ('|', _) => (Tok::Or, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBracket, 1),
                (',', _) => (Tok::Comma, 1),
                (':', _) => (Tok::Colon, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                _ => {
                    return Err(ParseError::UnknownOperator { line: tl, column: tc, op: c.to_string() })
                }
            };
            advance(width, &mut i, &mut col);
            tok
        };
        out.push(Token { tok, line: tl, column: tc, glued });
        glued = true;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    warnings: Vec<ParseWarning>,
}

impl Parser {
    fn peek_token(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek(&self) -> Option<&Tok> {
        self.peek_token().map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|t| &t.tok)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn error_at(&self, t: &Token, message: String) -> ParseError {
        ParseError::Syntax { line: t.line, column: t.column, message }
    }

    fn eof_error(&self, expected: &str) -> ParseError {
        let (line, column) = self
            .tokens
            .last()
            .map(|t| (t.line, t.column + t.tok.to_string().len()))
            .unwrap_or((1, 1));
        ParseError::Syntax { line, column, message: format!("expected {expected}, found end of input") }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        match self.bump() {
            Some(t) if t.tok == want => Ok(t),
            Some(t) => Err(self.error_at(&t, format!("expected {what}, found `{}`", t.tok))),
            None => Err(self.eof_error(what)),
        }
    }

    fn at_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == name)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies_(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            acc = Formula::or_(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            acc = Formula::and_(acc, self.until()?);
        }
        Ok(acc)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.at_ident("U") {
            self.bump();
            let iv = self.optional_interval()?;
            let rhs = self.until()?;
            return Ok(Formula::until_(lhs, iv, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Formula::not_(self.unary()?))
            }
            Some(Tok::Ident(s)) if s == "F" || s == "G" => {
                let eventually = s == "F";
                self.bump();
                let iv = self.optional_interval()?;
                let body = self.unary()?;
                Ok(if eventually { Formula::eventually_(iv, body) } else { Formula::globally_(iv, body) })
            }
            _ => self.primary(),
        }
    }

    fn optional_interval(&mut self) -> Result<Interval, ParseError> {
        if self.peek() != Some(&Tok::LBracket) {
            return Ok(Interval::UNBOUNDED);
        }
        let open = self.bump().unwrap();
        let start = self.integer("interval start")?;
        self.expect(Tok::Comma, "`,`")?;
        let end = match self.bump() {
            Some(Token { tok: Tok::Int(n), .. }) => End::Finite(n),
            Some(Token { tok: Tok::Ident(s), .. }) if s == "inf" => End::Infinite,
            Some(t) => return Err(self.error_at(&t, format!("expected interval end, found `{}`", t.tok))),
            None => return Err(self.eof_error("interval end")),
        };
        self.expect(Tok::RParen, "`)` closing the interval")?;
        let iv = Interval::new(start, end);
        if iv.is_empty() {
            self.warnings.push(ParseWarning {
                line: open.line,
                column: open.column,
                message: "interval is empty and was canonicalized to [0,0)".into(),
            });
        }
        Ok(iv)
    }

    fn integer(&mut self, what: &str) -> Result<u64, ParseError> {
        match self.bump() {
            Some(Token { tok: Tok::Int(n), .. }) => Ok(n),
            Some(t) => Err(self.error_at(&t, format!("expected {what}, found `{}`", t.tok))),
            None => Err(self.eof_error(what)),
        }
    }

    fn starts_linear(&self) -> bool {
        match self.peek() {
            Some(Tok::Int(_)) | Some(Tok::Minus) => true,
            Some(Tok::Ident(s)) if s == "sum" => self.peek_at(1) == Some(&Tok::LParen),
            _ => false,
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        if self.starts_linear() {
            return self.linear_atom();
        }
        match self.bump() {
            Some(Token { tok: Tok::LParen, .. }) => {
                let f = self.implication()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(t @ Token { tok: Tok::Ident(_), .. }) => {
                let Tok::Ident(name) = &t.tok else { unreachable!() };
                if let Some(next) = self.peek_token() {
                    if next.glued && matches!(next.tok, Tok::LBracket | Tok::LParen) {
                        return Err(ParseError::UnknownOperator {
                            line: t.line,
                            column: t.column,
                            op: name.clone(),
                        });
                    }
                }
                Ok(match name.as_str() {
                    "true" => Formula::True,
                    "false" => Formula::False,
                    "U" | "inf" => return Err(self.error_at(&t, format!("unexpected `{name}`"))),
                    _ => Formula::prop(name.clone()),
                })
            }
            Some(t) => Err(self.error_at(&t, format!("unexpected `{}`", t.tok))),
            None => Err(self.eof_error("a formula")),
        }
    }

    fn linear_atom(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.lin_expr()?;
        let cmp = match self.bump() {
            Some(Token { tok: Tok::Cmp(c), .. }) => c,
            Some(t) => return Err(self.error_at(&t, format!("expected comparison, found `{}`", t.tok))),
            None => return Err(self.eof_error("comparison")),
        };
        let rhs = self.lin_expr()?;
        Ok(Formula::linear(LinearConstraint { lhs, cmp, rhs }))
    }

    fn lin_expr(&mut self) -> Result<LinExpr, ParseError> {
        let mut e = LinExpr::default();
        let mut sign = 1i64;
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            sign = -1;
        }
        loop {
            self.lin_term(sign, &mut e)?;
            match self.peek() {
                Some(Tok::Plus) => sign = 1,
                Some(Tok::Minus) => sign = -1,
                _ => break,
            }
            self.bump();
        }
        Ok(e)
    }

    fn lin_term(&mut self, sign: i64, e: &mut LinExpr) -> Result<(), ParseError> {
        let mut coef = 1i64;
        if let Some(Tok::Int(n)) = self.peek() {
            let n = i64::try_from(*n).map_err(|_| {
                let t = self.peek_token().unwrap();
                self.error_at(t, "constant is out of range".into())
            })?;
            self.bump();
            if self.peek() != Some(&Tok::Star) {
                e.constant += sign * n;
                return Ok(());
            }
            self.bump();
            coef = n;
        }
        match self.bump() {
            Some(Token { tok: Tok::Ident(s), .. }) if s == "sum" => {}
            Some(t) => return Err(self.error_at(&t, format!("expected `sum`, found `{}`", t.tok))),
            None => return Err(self.eof_error("`sum`")),
        }
        self.expect(Tok::LParen, "`(`")?;
        let key = self.ident("aggregate key")?;
        self.expect(Tok::Colon, "`:`")?;
        let name = self.ident("aggregate name")?;
        self.expect(Tok::RParen, "`)`")?;
        e.terms.push(SumTerm { coef: sign * coef, key, name });
        Ok(())
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.bump() {
            Some(Token { tok: Tok::Ident(s), .. }) => Ok(s),
            Some(t) => Err(self.error_at(&t, format!("expected {what}, found `{}`", t.tok))),
            None => Err(self.eof_error(what)),
        }
    }
}
