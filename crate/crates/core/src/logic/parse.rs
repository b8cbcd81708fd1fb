//! Recursive-descent parser for the formula grammar
//!
//! ```text
//! formula := disj
//! disj    := conj ("|" conj)*
//! conj    := lit ("&" lit)*
//! lit     := "~" lit | "exists" var "." formula | atom | "(" formula ")"
//! atom    := term "=" term | name "(" term ("," term)* ")"
//! term    := var | name "(" term ")" | name
//! var     := "x" digits
//! ```

use thiserror::Error;

use super::ast::{Formula, Term};
use crate::structure::{is_variable_name, Signature, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown symbol `{name}` at position {position}")]
    UnknownSymbol { position: usize, name: String },
    #[error("arity mismatch for `{name}` at position {position}: expected {expected}, found {found}")]
    ArityMismatch {
        position: usize,
        name: String,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    /// 1-based character position of the offending token.
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownSymbol { position, .. }
            | ParseError::ArityMismatch { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Amp,
    Bar,
    Tilde,
    Dot,
    Eof,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Tilde => "`~`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let single = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'=' => Some(Tok::Eq),
            b'&' => Some(Tok::Amp),
            b'|' => Some(Tok::Bar),
            b'~' => Some(Tok::Tilde),
            b'.' => Some(Tok::Dot),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, i + 1));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start + 1));
        } else {
            return Err(ParseError::Syntax {
                position: i + 1,
                message: format!("unexpected character {:?}", text[i..].chars().next().unwrap()),
            });
        }
    }
    out.push((Tok::Eof, text.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: &'a Signature,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn position(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if t.0 != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::Syntax {
            position: self.position(),
            message: format!("expected {wanted}, found {}", describe(self.peek())),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&describe(&tok)))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut members = vec![self.conj()?];
        while *self.peek() == Tok::Bar {
            self.bump();
            members.push(self.conj()?);
        }
        Ok(Formula::disj(members))
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut members = vec![self.lit()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            members.push(self.lit()?);
        }
        Ok(Formula::conj(members))
    }

    fn lit(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.lit()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) if name == "exists" => {
                self.bump();
                let var = self.var()?;
                self.expect(Tok::Dot)?;
                Ok(Formula::exists(var, self.formula()?))
            }
            Tok::Ident(_) => self.atom(),
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn var(&mut self) -> Result<usize, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if is_variable_name(&name) => {
                let position = self.position();
                self.bump();
                name[1..].parse().map_err(|_| ParseError::Syntax {
                    position,
                    message: "variable index too large".into(),
                })
            }
            _ => Err(self.unexpected("a variable")),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let position = self.position();
        if let Tok::Ident(name) = self.peek().clone() {
            if let Some(Symbol::Relation(r)) = self.sig.lookup(&name) {
                self.bump();
                self.expect(Tok::LParen)?;
                let mut args = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
                self.expect(Tok::RParen)?;
                let expected = self.sig.relations[r].arity;
                if args.len() != expected {
                    return Err(ParseError::ArityMismatch {
                        position,
                        name,
                        expected,
                        found: args.len(),
                    });
                }
                return Ok(Formula::Rel(r, args));
            }
        }
        let lhs = self.term()?;
        self.expect(Tok::Eq)?;
        let rhs = self.term()?;
        Ok(Formula::Equal(lhs, rhs))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let position = self.position();
        let name = match self.peek().clone() {
            Tok::Ident(name) => name,
            _ => return Err(self.unexpected("a term")),
        };
        if is_variable_name(&name) {
            return Ok(Term::Var(self.var()?));
        }
        self.bump();
        match self.sig.lookup(&name) {
            Some(Symbol::Constant(c)) => Ok(Term::Const(c)),
            Some(Symbol::Function(g)) => {
                self.expect(Tok::LParen)?;
                let inner = self.term()?;
                if *self.peek() == Tok::Comma {
                    return Err(ParseError::ArityMismatch {
                        position,
                        name,
                        expected: 1,
                        found: 2,
                    });
                }
                self.expect(Tok::RParen)?;
                Ok(Term::app(g, inner))
            }
            Some(Symbol::Relation(_)) => Err(ParseError::Syntax {
                position,
                message: format!("relation `{name}` used as a term"),
            }),
            None => Err(ParseError::UnknownSymbol { position, name }),
        }
    }
}

/// Parses `text` against the symbols of `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        sig,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::new(
            vec![crate::structure::RelationSymbol {
                name: "R".into(),
                arity: 2,
            }],
            vec!["f".into()],
            vec!["c".into()],
        )
        .unwrap()
    }

    #[test]
    fn relation_atom() {
        assert_eq!(
            parse_formula("R(x0,x1)", &sig()).unwrap(),
            Formula::rel_vars(0, [0, 1])
        );
    }

    #[test]
    fn reflexive_equality() {
        assert_eq!(
            parse_formula("x0 = x0", &sig()).unwrap(),
            Formula::eq_vars(0, 0)
        );
    }

    #[test]
    fn truncated_input_reports_position() {
        let err = parse_formula("R(x0,", &sig()).unwrap_err();
        assert_eq!(err.position(), 6);
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn precedence_and_quantifier_scope() {
        let s = sig();
        let f = parse_formula("~R(x0,x1) & x0 = c | exists x2. f(x2) = x0 & R(x2,x2)", &s).unwrap();
        let Formula::Or(members) = &f else {
            panic!("expected a disjunction: {f:?}")
        };
        assert_eq!(members.len(), 2);
        assert!(matches!(&members[0], Formula::And(v) if v.len() == 2));
        assert!(matches!(&members[1], Formula::Exists(2, body) if matches!(**body, Formula::And(_))));
    }

    #[test]
    fn symbol_errors() {
        let s = sig();
        assert!(matches!(
            parse_formula("S(x0)", &s),
            Err(ParseError::UnknownSymbol { position: 1, .. })
        ));
        assert!(matches!(
            parse_formula("R(x0)", &s),
            Err(ParseError::ArityMismatch { expected: 2, found: 1, .. })
        ));
        assert!(matches!(
            parse_formula("f(x0, x1) = x0", &s),
            Err(ParseError::ArityMismatch { .. })
        ));
        assert!(parse_formula("x0 = x0 )", &s).is_err());
        assert!(parse_formula("x0 # x0", &s).is_err());
    }

    #[test]
    fn whitespace_is_insignificant() {
        let s = sig();
        assert_eq!(
            parse_formula(" R ( x0 ,x1 )&x0=c", &s).unwrap(),
            parse_formula("R(x0,x1) & x0 = c", &s).unwrap()
        );
    }
}
