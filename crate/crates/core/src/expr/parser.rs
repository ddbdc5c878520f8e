//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 'y' | 'pi' | param | func '(' expr ')' | '(' expr ')'
//! ```

use super::ast::{BinOp, Func, Node};
use crate::error::{QmtError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> QmtError {
    QmtError::Syntax { offset, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k] as char;
        if c.is_ascii_whitespace() {
            k += 1;
            continue;
        }
        let start = k;
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => {
                k += 1;
                Tok::Op(c)
            }
            '(' => {
                k += 1;
                Tok::LParen
            }
            ')' => {
                k += 1;
                Tok::RParen
            }
            c if c.is_ascii_digit() || c == '.' => {
                while k < bytes.len() && (bytes[k].is_ascii_digit() || bytes[k] == b'.') {
                    k += 1;
                }
                if k < bytes.len() && (bytes[k] == b'e' || bytes[k] == b'E') {
                    let mut look = k + 1;
                    if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                        look += 1;
                    }
                    if look < bytes.len() && bytes[look].is_ascii_digit() {
                        k = look;
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                    }
                }
                let lexeme = &text[start..k];
                let value: f64 = lexeme
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{lexeme}`")))?;
                Tok::Num(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'_') {
                    k += 1;
                }
                Tok::Ident(text[start..k].to_string())
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        out.push(Token { tok, offset: start });
    }
    out.push(Token { tok: Tok::End, offset: text.len() });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    declared: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek().tok == Tok::Op('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Node::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        let Token { tok, offset } = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, offset),
            Tok::End => Err(syntax(offset, "unexpected end of expression")),
            Tok::RParen => Err(syntax(offset, "unexpected `)`")),
            Tok::Op(c) => Err(syntax(offset, format!("unexpected operator `{c}`"))),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Node> {
        if let Some(func) = Func::from_name(&name) {
            if self.peek().tok != Tok::LParen {
                return Err(syntax(self.peek().offset, format!("expected `(` after `{name}`")));
            }
            self.bump();
            let arg = self.expr()?;
            self.expect_rparen()?;
            return Ok(Node::Call(func, Box::new(arg)));
        }
        match name.as_str() {
            "x" => Ok(Node::X),
            "y" => Ok(Node::Y),
            "pi" => Ok(Node::Pi),
            _ if self.declared.contains(&name) => Ok(Node::Param(name)),
            _ => Err(QmtError::UnknownIdentifier { name, offset }),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        let t = self.bump();
        if t.tok == Tok::RParen {
            Ok(())
        } else {
            Err(syntax(t.offset, "expected `)`"))
        }
    }
}

/// Names that cannot be used as parameters.
pub fn is_reserved(name: &str) -> bool {
    matches!(name, "x" | "y" | "pi") || Func::from_name(name).is_some()
}

pub(crate) fn parse_node(text: &str, declared: &[String]) -> Result<Node> {
    if text.trim().is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0, declared };
    let node = parser.expr()?;
    let rest = parser.peek();
    if rest.tok != Tok::End {
        return Err(syntax(rest.offset, "unexpected trailing input"));
    }
    Ok(node)
}
