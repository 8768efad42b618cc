//! Tokenizer shared by the graph, rule and script formats.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Sym(s) => write!(f, "'{s}'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub at: Location,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{at}: {message}")]
pub struct SyntaxError {
    pub at: Location,
    pub message: String,
}

impl SyntaxError {
    pub fn new(at: Location, message: impl Into<String>) -> Self {
        SyntaxError { at, message: message.into() }
    }
}

const SYMBOLS: [&str; 19] = [
    "->", "==", "!=", "<=", ">=", "{", "}", "(", ")", "[", "]", ";", ",", "<", ">", "=", "|", "+", "-",
];

fn advance(chars: &[char], i: &mut usize, line: &mut usize, col: &mut usize) {
    if chars[*i] == '\n' {
        *line += 1;
        *col = 1;
    } else {
        *col += 1;
    }
    *i += 1;
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let at = Location { line, column: col };
        if c.is_whitespace() {
            advance(&chars, &mut i, &mut line, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&chars, &mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                advance(&chars, &mut i, &mut line, &mut col);
            }
            out.push(Token { tok: Tok::Ident(s), at });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                advance(&chars, &mut i, &mut line, &mut col);
            }
            let n = s.parse().map_err(|_| SyntaxError::new(at, format!("integer {s} is too large")))?;
            out.push(Token { tok: Tok::Int(n), at });
            continue;
        }
        if c == '"' {
            advance(&chars, &mut i, &mut line, &mut col);
            let mut s = String::new();
            loop {
                let Some(&d) = chars.get(i) else {
                    return Err(SyntaxError::new(at, "unterminated string"));
                };
                advance(&chars, &mut i, &mut line, &mut col);
                match d {
                    '"' => break,
                    '\\' => {
                        let Some(&e) = chars.get(i) else {
                            return Err(SyntaxError::new(at, "unterminated string"));
                        };
                        advance(&chars, &mut i, &mut line, &mut col);
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                    }
                    '\n' => return Err(SyntaxError::new(at, "newline in string")),
                    other => s.push(other),
                }
            }
            out.push(Token { tok: Tok::Str(s), at });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                for _ in 0..sym.len() {
                    advance(&chars, &mut i, &mut line, &mut col);
                }
                out.push(Token { tok: Tok::Sym(sym), at });
            }
            None => return Err(SyntaxError::new(at, format!("unexpected character '{c}'"))),
        }
    }
    out.push(Token { tok: Tok::Eof, at: Location { line, column: col } });
    Ok(out)
}

/// Cursor over a token list with the usual expect/accept helpers.
pub struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self, SyntaxError> {
        Ok(Cursor { tokens: tokenize(text)?, pos: 0 })
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub fn peek_at(&self, offset: usize) -> &Token {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)]
    }

    pub fn at(&self) -> Location {
        self.peek().at
    }

    pub fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == s)
    }

    pub fn accept_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn accept_ident(&mut self, s: &str) -> bool {
        if self.is_ident(s) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.at(), message)
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        self.error(format!("expected {wanted}, found {}", self.peek().tok))
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.accept_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{s}'")))
        }
    }

    pub fn expect_keyword(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.accept_ident(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{s}'")))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Location), SyntaxError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                let at = self.next().at;
                Ok((s, at))
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    pub fn expect_int(&mut self) -> Result<(u64, Location), SyntaxError> {
        match self.peek().tok {
            Tok::Int(n) => {
                let at = self.next().at;
                Ok((n, at))
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    pub fn expect_str(&mut self) -> Result<(String, Location), SyntaxError> {
        match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                let at = self.next().at;
                Ok((s, at))
            }
            _ => Err(self.unexpected("a quoted string")),
        }
    }

    pub fn is_str(&self) -> bool {
        matches!(self.peek().tok, Tok::Str(_))
    }
}

/// Quotes a label for the text formats.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
