//! Recursive-descent parser for proposition expressions.
//!
//! Grammar (precedence ! > & > ->, `->` right-associative):
//!
//! ```text
//! expr  := conj ( "->" expr )?
//! conj  := unary ( "&" unary )*
//! unary := "!" unary | "(" expr ")" | identifier
//! ```

use super::ParseError;
use crate::qlogic::RawProp;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Bang,
    Amp,
    Arrow,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize, col: usize) -> Self {
        Lexer { src, bytes: src.as_bytes(), pos: 0, line, col }
    }

    fn bump(&mut self) {
        if self.bytes[self.pos] == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.pos += 1;
    }

    fn next_token(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        if self.pos >= self.bytes.len() {
            return Ok((Tok::End, line, col));
        }
        let c = self.bytes[self.pos];
        let tok = match c {
            b'!' => {
                self.bump();
                Tok::Bang
            }
            b'&' => {
                self.bump();
                Tok::Amp
            }
            b'(' => {
                self.bump();
                Tok::LParen
            }
            b')' => {
                self.bump();
                Tok::RParen
            }
            b'-' => {
                self.bump();
                if self.pos < self.bytes.len() && self.bytes[self.pos] == b'>' {
                    self.bump();
                    Tok::Arrow
                } else {
                    return Err(ParseError::new(line, col, "expected '->'"));
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.bump();
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            }
            other => {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("unexpected character {:?}", other as char),
                ))
            }
        };
        Ok((tok, line, col))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    lookahead: (Tok, usize, usize),
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, line: usize, col: usize) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src, line, col);
        let lookahead = lexer.next_token()?;
        Ok(Parser { lexer, lookahead })
    }

    fn advance(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        let next = self.lexer.next_token()?;
        Ok(std::mem::replace(&mut self.lookahead, next))
    }

    fn expr(&mut self) -> Result<RawProp, ParseError> {
        let lhs = self.conj()?;
        if self.lookahead.0 == Tok::Arrow {
            self.advance()?;
            let rhs = self.expr()?;
            return Ok(RawProp::implication(lhs, rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<RawProp, ParseError> {
        let mut acc = self.unary()?;
        while self.lookahead.0 == Tok::Amp {
            self.advance()?;
            let rhs = self.unary()?;
            acc = RawProp::And(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RawProp, ParseError> {
        let (tok, line, col) = self.advance()?;
        match tok {
            Tok::Bang => Ok(RawProp::Not(Box::new(self.unary()?))),
            Tok::LParen => {
                let inner = self.expr()?;
                let (tok, line, col) = self.advance()?;
                if tok != Tok::RParen {
                    return Err(ParseError::new(line, col, "expected ')'"));
                }
                Ok(inner)
            }
            Tok::Ident(name) => Ok(RawProp::Atom(name)),
            other => Err(ParseError::new(line, col, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses a whole string as one expression; offsets diagnostics by the given
/// starting line/column (both 1-based) so callers embedding expressions in
/// larger files report true positions.
pub fn parse_at(src: &str, line: usize, col: usize) -> Result<RawProp, ParseError> {
    let mut p = Parser::new(src, line, col)?;
    let prop = p.expr()?;
    let (tok, l, c) = p.advance()?;
    if tok != Tok::End {
        return Err(ParseError::new(l, c, format!("unexpected trailing {tok:?}")));
    }
    Ok(prop)
}

pub fn parse(src: &str) -> Result<RawProp, ParseError> {
    parse_at(src, 1, 1)
}
