//! Recursive-descent parser for the infix expression grammar.
//!
//! Variables: `eps` (reserved parameter), `x`/`y`/`z` or `x1`..`xN`.
//! Functions: `exp log ln sin cos atan arctan bump(e, lo, hi)`.
//! `^` binds tighter than unary minus and is right-associative; integer
//! exponents become exact integer powers.

use super::Expr;
use crate::error::GsfError;

pub fn parse_expr(src: &str) -> Result<Expr, GsfError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(GsfError::Parse(format!("trailing input at token {:?}", p.tokens[p.pos])));
    }
    Ok(e.simplify())
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<Tok>, GsfError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' | '−' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' | '×' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' | '÷' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || bytes[i] == 'e'
                        || bytes[i] == 'E'
                        || ((bytes[i] == '+' || bytes[i] == '-')
                            && i > start
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let s: String = bytes[start..i].iter().collect();
                let v: f64 =
                    s.parse().map_err(|_| GsfError::Parse(format!("bad number {:?}", s)))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(bytes[start..i].iter().collect()));
            }
            other => return Err(GsfError::Parse(format!("unexpected character {:?}", other))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn bump_tok(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), GsfError> {
        match self.bump_tok() {
            Some(got) if got == t => Ok(()),
            got => Err(GsfError::Parse(format!("expected {:?}, got {:?}", t, got))),
        }
    }

    fn expr(&mut self) -> Result<Expr, GsfError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(lhs.boxed(), self.term()?.boxed());
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(lhs.boxed(), self.term()?.boxed());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, GsfError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(lhs.boxed(), self.unary()?.boxed());
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(lhs.boxed(), self.unary()?.boxed());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, GsfError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(self.unary()?.boxed()));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, GsfError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            // exponent: a signed numeric literal or a parenthesized expression
            // that folds to a constant
            let exp = self.unary()?.simplify();
            let p = match exp {
                Expr::Const(v) => v,
                other => {
                    return Err(GsfError::Parse(format!(
                        "exponent must be a numeric constant, got {}",
                        other
                    )))
                }
            };
            if p.fract() == 0.0 && p.abs() < 1e15 {
                return Ok(Expr::PowI(base.boxed(), p as i64));
            }
            return Ok(Expr::PowF(base.boxed(), p));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, GsfError> {
        match self.bump_tok() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    self.call(&name, args)
                } else {
                    self.name(&name)
                }
            }
            other => Err(GsfError::Parse(format!("unexpected token {:?}", other))),
        }
    }

    fn name(&self, name: &str) -> Result<Expr, GsfError> {
        match name {
            "eps" => Ok(Expr::Eps),
            "pi" => Ok(Expr::Const(std::f64::consts::PI)),
            "e" => Ok(Expr::Const(std::f64::consts::E)),
            "x" => Ok(Expr::Var(0)),
            "y" => Ok(Expr::Var(1)),
            "z" => Ok(Expr::Var(2)),
            _ => {
                if let Some(rest) = name.strip_prefix('x') {
                    if let Ok(i) = rest.parse::<usize>() {
                        if i >= 1 {
                            return Ok(Expr::Var(i - 1));
                        }
                    }
                }
                Err(GsfError::Parse(format!("unknown identifier {:?}", name)))
            }
        }
    }

    fn call(&self, name: &str, mut args: Vec<Expr>) -> Result<Expr, GsfError> {
        let one = |args: &mut Vec<Expr>| -> Result<Box<Expr>, GsfError> {
            if args.len() != 1 {
                return Err(GsfError::Parse(format!("{} takes one argument", name)));
            }
            Ok(args.pop().unwrap().boxed())
        };
        match name {
            "exp" => Ok(Expr::Exp(one(&mut args)?)),
            "log" | "ln" => Ok(Expr::Ln(one(&mut args)?)),
            "sin" => Ok(Expr::Sin(one(&mut args)?)),
            "cos" => Ok(Expr::Cos(one(&mut args)?)),
            "atan" | "arctan" => Ok(Expr::Atan(one(&mut args)?)),
            "bump" => {
                if args.len() != 3 {
                    return Err(GsfError::Parse("bump takes (expr, lo, hi)".into()));
                }
                let hi = args.pop().unwrap().simplify();
                let lo = args.pop().unwrap().simplify();
                let arg = args.pop().unwrap();
                match (lo, hi) {
                    (Expr::Const(lo), Expr::Const(hi)) if lo < hi => {
                        Ok(Expr::Bump { arg: arg.boxed(), lo, hi })
                    }
                    _ => Err(GsfError::Parse("bump bounds must be constants with lo < hi".into())),
                }
            }
            other => Err(GsfError::Parse(format!("unknown function {:?}", other))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let e = parse_expr("2*x + sin(x)/2").unwrap();
        let v = e.eval(&[1.0], 0.5);
        assert!((v - (2.0 + 1f64.sin() / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn integer_powers_are_exact() {
        let e = parse_expr("eps^-1").unwrap();
        assert!(matches!(e, Expr::PowI(_, -1)));
        let e = parse_expr("x^3").unwrap();
        assert_eq!(e.eval(&[2.0], 0.1), 8.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_expr("2 +* x").is_err());
        assert!(parse_expr("foo(3)").is_err());
        assert!(parse_expr("x ^ y").is_err());
    }

    #[test]
    fn multi_variable_names() {
        let e = parse_expr("x1 + x2^2").unwrap();
        assert_eq!(e.arity(), 2);
        assert_eq!(e.eval(&[1.0, 3.0], 0.1), 10.0);
    }
}
