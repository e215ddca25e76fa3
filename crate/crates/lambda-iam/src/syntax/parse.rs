//! Parser for the concrete term grammar.
//!
//! ```text
//! term    ::= abs | app
//! abs     ::= ("\" | "λ") ident "." term
//! app     ::= item+                      (left-associative)
//! item    ::= atom esuffix*
//! atom    ::= ident | "(" term ")"
//! esuffix ::= "[" ident "<-" term "]"
//! ident   ::= [a-zA-Z][a-zA-Z0-9_']*
//! ```

use std::fmt;
use std::rc::Rc;

use super::{Name, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,
    Ident(Name),
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '\\' | 'λ' => {
                chars.next();
                toks.push((pos, Tok::Lambda));
            }
            '.' => {
                chars.next();
                toks.push((pos, Tok::Dot));
            }
            '(' => {
                chars.next();
                toks.push((pos, Tok::LParen));
            }
            ')' => {
                chars.next();
                toks.push((pos, Tok::RParen));
            }
            '[' => {
                chars.next();
                toks.push((pos, Tok::LBracket));
            }
            ']' => {
                chars.next();
                toks.push((pos, Tok::RBracket));
            }
            '←' => {
                chars.next();
                toks.push((pos, Tok::Arrow));
            }
            '<' => {
                chars.next();
                match chars.peek() {
                    Some(&(_, '-')) => {
                        chars.next();
                        toks.push((pos, Tok::Arrow));
                    }
                    _ => {
                        return Err(ParseError {
                            pos,
                            msg: "expected `<-`".into(),
                        })
                    }
                }
            }
            c if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push((pos, Tok::Ident(name)));
            }
            other => {
                return Err(ParseError {
                    pos,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.here(),
            msg: msg.into(),
        }
    }

    fn expect_ident(&mut self) -> Result<Name, ParseError> {
        match self.bump() {
            Some(Tok::Ident(n)) => Ok(n),
            _ => {
                self.pos -= 1;
                Err(self.err("expected identifier"))
            }
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn term(&mut self) -> Result<Rc<Term>, ParseError> {
        if self.peek() == Some(&Tok::Lambda) {
            self.pos += 1;
            let name = self.expect_ident()?;
            self.expect(Tok::Dot, "`.`")?;
            let body = self.term()?;
            return Ok(Rc::new(Term::Abs(name, body)));
        }
        let mut items = vec![self.item()?];
        while matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::LParen)) {
            items.push(self.item()?);
        }
        let mut out = items.remove(0);
        for item in items {
            out = Rc::new(Term::App(out, item));
        }
        Ok(out)
    }

    fn item(&mut self) -> Result<Rc<Term>, ParseError> {
        let mut out = self.atom()?;
        while self.peek() == Some(&Tok::LBracket) {
            self.pos += 1;
            let name = self.expect_ident()?;
            self.expect(Tok::Arrow, "`<-`")?;
            let definiens = self.term()?;
            self.expect(Tok::RBracket, "`]`")?;
            out = Rc::new(Term::Sub(out, name, definiens));
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<Rc<Term>, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let Some(Tok::Ident(n)) = self.bump() else { unreachable!() };
                Ok(Rc::new(Term::Var(n)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

/// Parses a term from its concrete syntax.
pub fn parse(input: &str) -> Result<Rc<Term>, ParseError> {
    let toks = lex(input)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: input.len(),
    };
    let t = p.term()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Term;

    #[test]
    fn parses_application_of_abstractions() {
        let t = parse("(\\x.x x)(\\y.y)").unwrap();
        let expected = Term::app(
            Term::abs("x", Term::app(Term::var("x"), Term::var("x"))),
            Term::abs("y", Term::var("y")),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn parses_variable() {
        assert_eq!(parse("x").unwrap(), Term::var("x"));
    }

    #[test]
    fn parses_explicit_substitution_suffix() {
        let t = parse("(x x)[x<-\\y.y]").unwrap();
        let expected = Term::sub(
            Term::app(Term::var("x"), Term::var("x")),
            "x",
            Term::abs("y", Term::var("y")),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse("a b c").unwrap();
        let expected = Term::app(Term::app(Term::var("a"), Term::var("b")), Term::var("c"));
        assert_eq!(t, expected);
    }

    #[test]
    fn abstraction_body_extends_right() {
        let t = parse("\\x.x y").unwrap();
        let expected = Term::abs("x", Term::app(Term::var("x"), Term::var("y")));
        assert_eq!(t, expected);
    }

    #[test]
    fn unicode_lambda_and_arrow() {
        assert_eq!(parse("λx.x").unwrap(), parse("\\x.x").unwrap());
        assert_eq!(parse("x[x←y]").unwrap(), parse("x[x<-y]").unwrap());
    }

    #[test]
    fn suffix_binds_tighter_than_application() {
        let t = parse("a b[x<-c]").unwrap();
        let expected = Term::app(Term::var("a"), Term::sub(Term::var("b"), "x", Term::var("c")));
        assert_eq!(t, expected);
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "(", "(x", "\\.x", "\\x x", "x[y]", "x[y<-]", "x)", "λ", "x [", "?"] {
            assert!(parse(bad).is_err(), "expected parse failure on {bad:?}");
        }
        let err = parse("x $").unwrap_err();
        assert_eq!(err.pos, 2);
    }
}
