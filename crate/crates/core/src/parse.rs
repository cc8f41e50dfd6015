//! Literal syntax for fields, rational functions, symbols and places.
//!
//! ```text
//! symbol  = "{" [ expr { "," expr } ] [ ";" field ] "}" ;
//! field   = "F" integer [ "(" ident ")" ] ;
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary | unary } ;    (* juxtaposition multiplies *)
//! unary   = [ "-" ] power ;
//! power   = atom [ "^" [ "-" ] integer ] ;
//! atom    = integer | ident | "(" expr ")" ;
//! place   = "inf" | expr ;                            (* a monic irreducible *)
//! ```
//!
//! Integers are read in the prime field. The identifier `a` is the class of
//! the variable in the modulus of `F_{p^e}`; other identifiers are function
//! variables (`t`, or `x`, `y`, `z` in the plane).

use std::sync::Arc;

use thiserror::Error;

use crate::gfield::{field_of_order, Fe, FiniteField, Place, Poly, RatFunc};
use crate::milnor::{FieldRef, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected {found} at offset {pos}, expected {expected}")]
    Unexpected {
        pos: usize,
        found: String,
        expected: String,
    },
    #[error("unknown identifier {0}")]
    UnknownIdent(String),
    #[error("bad field {0}")]
    BadField(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(i64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().map(|x| x.1).collect();
            let v = text
                .parse::<i64>()
                .map_err(|_| ParseError::Invalid(format!("integer {text} too large")))?;
            out.push((pos, Tok::Num(v)));
            i = j;
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].1.is_alphanumeric() || chars[j].1 == '_') {
                j += 1;
            }
            out.push((pos, Tok::Ident(chars[i..j].iter().map(|x| x.1).collect())));
            i = j;
        } else if "+-*/^(){},;".contains(c) {
            out.push((pos, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError::Unexpected {
                pos,
                found: c.to_string(),
                expected: "a token".into(),
            });
        }
    }
    Ok(out)
}

/// Parsed arithmetic expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(i64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(s: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(s)?,
            pos: 0,
            end: s.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Unexpected {
            pos: self.offset(),
            found: match self.peek() {
                None => "end of input".into(),
                Some(Tok::Num(n)) => n.to_string(),
                Some(Tok::Ident(s)) => s.clone(),
                Some(Tok::Sym(c)) => c.to_string(),
            },
            expected: expected.into(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("'{c}'")))
        }
    }

    fn done(&self) -> Result<(), ParseError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(
                self.peek(),
                Some(Tok::Num(_) | Tok::Ident(_)) | Some(Tok::Sym('('))
            ) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.power()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            match self.peek() {
                Some(Tok::Num(n)) => {
                    let n = *n;
                    self.pos += 1;
                    Ok(Expr::Pow(Box::new(base), if neg { -n } else { n }))
                }
                _ => Err(self.error("an integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::Var(s))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(self.error("a number, variable or '('")),
        }
    }

    fn field(&mut self) -> Result<(Arc<FiniteField>, Option<String>), ParseError> {
        let start = self.offset();
        let q = match self.peek().cloned() {
            Some(Tok::Ident(s)) if s.starts_with('F') => {
                self.pos += 1;
                let digits = &s[1..];
                if digits.is_empty() {
                    match self.peek() {
                        Some(Tok::Num(n)) => {
                            let n = *n;
                            self.pos += 1;
                            n
                        }
                        _ => return Err(self.error("field order")),
                    }
                } else {
                    digits
                        .parse::<i64>()
                        .map_err(|_| ParseError::BadField(s.clone()))?
                }
            }
            _ => return Err(self.error("a field such as F5 or F9(t)")),
        };
        let field = u64::try_from(q)
            .ok()
            .and_then(|q| field_of_order(q).ok())
            .ok_or_else(|| ParseError::BadField(format!("F{q} at offset {start}")))?;
        let var = if self.eat('(') {
            let v = match self.peek().cloned() {
                Some(Tok::Ident(v)) if v != "a" => v,
                _ => return Err(self.error("a variable name")),
            };
            self.pos += 1;
            self.expect(')')?;
            Some(v)
        } else {
            None
        };
        Ok((field, var))
    }
}

pub fn parse_expr(s: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(s)?;
    let e = p.expr()?;
    p.done()?;
    Ok(e)
}

/// `F5`, `F9(t)`: the base field and the function variable, if any.
pub fn parse_field(s: &str) -> Result<(Arc<FiniteField>, Option<String>), ParseError> {
    let mut p = Parser::new(s)?;
    let f = p.field()?;
    p.done()?;
    Ok(f)
}

pub fn parse_field_ref(s: &str) -> Result<FieldRef, ParseError> {
    let (k, var) = parse_field(s)?;
    Ok(match var {
        Some(_) => FieldRef::Function(k),
        None => FieldRef::Finite(k),
    })
}

/// A constant of `F_q`; `a` is the variable class of the modulus.
pub fn field_element(k: &Arc<FiniteField>, e: &Expr) -> Result<Fe, ParseError> {
    eval_ratfunc(e, k, "")?
        .as_constant()
        .ok_or_else(|| ParseError::Invalid("expected a constant".into()))
}

pub fn eval_ratfunc(e: &Expr, k: &Arc<FiniteField>, var: &str) -> Result<RatFunc, ParseError> {
    let rec = |x: &Expr| eval_ratfunc(x, k, var);
    Ok(match e {
        Expr::Num(n) => RatFunc::constant(k, k.from_int(*n)),
        Expr::Var(v) if v == "a" => RatFunc::constant(k, k.variable()),
        Expr::Var(v) if !var.is_empty() && v == var => RatFunc::t(k),
        Expr::Var(v) => return Err(ParseError::UnknownIdent(v.clone())),
        Expr::Neg(x) => rec(x)?.neg(),
        Expr::Add(a, b) => rec(a)?.add(&rec(b)?),
        Expr::Sub(a, b) => rec(a)?.sub(&rec(b)?),
        Expr::Mul(a, b) => rec(a)?.mul(&rec(b)?),
        Expr::Div(a, b) => {
            let d = rec(b)?;
            if d.is_zero() {
                return Err(ParseError::DivisionByZero);
            }
            rec(a)?.div(&d)
        }
        Expr::Pow(a, n) => {
            let x = rec(a)?;
            if x.is_zero() && *n < 0 {
                return Err(ParseError::DivisionByZero);
            }
            if n.unsigned_abs() > 10_000 {
                return Err(ParseError::Invalid("exponent too large".into()));
            }
            x.pow(*n)
        }
    })
}

pub fn parse_ratfunc(s: &str, k: &Arc<FiniteField>, var: &str) -> Result<RatFunc, ParseError> {
    eval_ratfunc(&parse_expr(s)?, k, var)
}

/// A place of `F_q(t)`: `inf`, or a monic irreducible polynomial.
pub fn parse_place(s: &str, k: &Arc<FiniteField>, var: &str) -> Result<Place, ParseError> {
    let s = s.trim();
    if s == "inf" || s == "oo" || s == "∞" {
        return Ok(Place::Infinity);
    }
    let f = parse_ratfunc(s, k, var)?;
    if !f.den().is_one() || f.num().deg() == 0 {
        return Err(ParseError::Invalid(format!(
            "{s} is not a nonconstant polynomial"
        )));
    }
    let pi: Poly = f.num().clone();
    if !pi.is_monic() || !pi.is_irreducible() {
        return Err(ParseError::Invalid(format!("{s} is not monic irreducible")));
    }
    Ok(Place::Finite(pi))
}

/// A symbol literal; the field may come from the literal or the default.
pub fn parse_symbol(s: &str, default: Option<&FieldRef>) -> Result<Symbol, ParseError> {
    let mut p = Parser::new(s)?;
    p.expect('{')?;
    let mut exprs = Vec::new();
    if !matches!(p.peek(), Some(Tok::Sym('}' | ';'))) {
        exprs.push(p.expr()?);
        while p.eat(',') {
            exprs.push(p.expr()?);
        }
    }
    let (field, var) = if p.eat(';') {
        let (k, var) = p.field()?;
        let fr = match var {
            Some(_) => FieldRef::Function(k),
            None => FieldRef::Finite(k),
        };
        (fr, var.unwrap_or_default())
    } else {
        let fr = default
            .cloned()
            .ok_or_else(|| ParseError::BadField("symbol needs a field".into()))?;
        let var = if fr.is_function_field() {
            "t".to_string()
        } else {
            String::new()
        };
        (fr, var)
    };
    p.expect('}')?;
    p.done()?;
    let k = field.base();
    let entries = exprs
        .iter()
        .map(|e| eval_ratfunc(e, k, &var))
        .collect::<Result<Vec<_>, _>>()?;
    Symbol::new(field, entries).map_err(|e| ParseError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfield::canonical_field;

    #[test]
    fn symbols() {
        let s = parse_symbol("{t, t-2; F5(t)}", None).unwrap();
        let f5 = canonical_field(5, 1).unwrap();
        assert_eq!(s.field, FieldRef::Function(Arc::clone(&f5)));
        assert_eq!(s.entries[1].num().coeffs(), &[Fe(3), Fe(1)]);
        let s = parse_symbol(
            "{2t^2 (t+1)^-1}",
            Some(&FieldRef::Function(Arc::clone(&f5))),
        )
        .unwrap();
        assert_eq!(s.entries[0].den().coeffs(), &[Fe(1), Fe(1)]);
        assert!(parse_symbol("{0; F5(t)}", None).is_err());
        assert!(parse_symbol("{t; F6(t)}", None).is_err());
        assert!(parse_symbol("{t, ; F5(t)}", None).is_err());
    }

    #[test]
    fn field_elements() {
        let f9 = canonical_field(3, 2).unwrap();
        let x = field_element(&f9, &parse_expr("a+1").unwrap()).unwrap();
        assert_eq!(x, f9.generator());
        assert_eq!(f9.format(x), "a+1");
        assert_eq!(parse_field("F9(t)").unwrap().1.as_deref(), Some("t"));
    }

    #[test]
    fn places() {
        let f3 = canonical_field(3, 1).unwrap();
        assert_eq!(parse_place("inf", &f3, "t").unwrap(), Place::Infinity);
        assert_eq!(
            parse_place("t", &f3, "t").unwrap(),
            Place::rational(&f3, Fe(0))
        );
        assert!(parse_place("t^2-1", &f3, "t").is_err());
        assert!(parse_place("t^2+1", &f3, "t").is_ok());
    }
}
