use super::expr::{Builtin, Expr};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown builtin `{name}` at byte {offset}")]
    UnknownBuiltin { offset: usize, name: String },
}

impl ParseError {
    /// Same error with offsets moved by `by` bytes, for text parsed out of a larger string.
    pub fn shifted(self, by: usize) -> ParseError {
        match self {
            ParseError::Syntax { offset, msg } => ParseError::Syntax { offset: offset + by, msg },
            ParseError::UnknownBuiltin { offset, name } => ParseError::UnknownBuiltin { offset: offset + by, name },
        }
    }
}

// lowercase names that may be applied as unknown functions
const FIELD_NAMES: &[&str] = &["u", "v", "u0", "u1", "v0", "v1"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let b = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && i + 1 < b.len() && b[i + 1].is_ascii_digit()) {
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &src[start..i];
            let mut value: BigRational;
            if i < b.len() && b[i] == b'.' {
                i += 1;
                let fs = i;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                let frac = &src[fs..i];
                let digits = format!("{}{}", int_part, frac);
                let n: BigInt = digits.parse().map_err(|_| syntax(start, "bad number"))?;
                let d = num::pow::pow(BigInt::from(10), frac.len());
                value = BigRational::new(n, d);
            } else {
                let n: BigInt = int_part.parse().map_err(|_| syntax(start, "bad number"))?;
                value = BigRational::from_integer(n);
                // "a/b" between two digit runs is a single ratio literal
                if i + 1 < b.len() && b[i] == b'/' && b[i + 1].is_ascii_digit() {
                    let ds = i + 1;
                    let mut j = ds;
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    if !(j < b.len() && b[j] == b'.') {
                        let d: BigInt = src[ds..j].parse().map_err(|_| syntax(ds, "bad number"))?;
                        if d.is_zero() {
                            return Err(syntax(ds, "zero denominator"));
                        }
                        value = value / BigRational::from_integer(d);
                        i = j;
                    }
                }
            }
            out.push((Tok::Num(value), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        if "+-*/^(),'".contains(c) {
            out.push((Tok::Op(c), start));
            i += 1;
            continue;
        }
        return Err(syntax(start, &format!("unexpected character `{}`", c)));
    }
    Ok(out)
}

fn syntax(offset: usize, msg: &str) -> ParseError {
    ParseError::Syntax { offset, msg: msg.to_string() }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
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
            Err(syntax(self.offset(), &format!("expected `{}`", c)))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(syntax(self.offset(), "expected identifier")),
        }
    }

    fn int(&mut self) -> Result<u32, ParseError> {
        let off = self.offset();
        match self.peek() {
            Some(Tok::Num(r)) if r.is_integer() => {
                let v: u32 = r.numer().to_string().parse().map_err(|_| syntax(off, "order too large"))?;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(syntax(off, "expected integer")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc * self.factor()?;
            } else if self.eat('/') {
                acc = acc / self.factor()?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if self.eat('^') {
            let e = self.factor()?;
            return Ok(Expr::pow(base, e));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        self.base()
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let off = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(Expr::Num(r))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "Diff" && self.peek() == Some(&Tok::Op('(')) {
                    return self.diff();
                }
                let mut primes = 0u32;
                while self.eat('\'') {
                    primes += 1;
                }
                if self.peek() != Some(&Tok::Op('(')) {
                    if primes > 0 {
                        return Err(syntax(self.offset(), "expected `(` after primes"));
                    }
                    return Ok(Expr::sym(&name));
                }
                self.pos += 1;
                let args = self.args()?;
                if let Some(b) = Builtin::from_name(&name) {
                    if primes > 0 || args.len() != 1 {
                        return Err(syntax(off, "builtins take one argument and no primes"));
                    }
                    return Ok(Expr::call(b, args.into_iter().next().unwrap()));
                }
                let lower = name.chars().next().map(|c| c.is_ascii_lowercase()).unwrap_or(false);
                if lower && !FIELD_NAMES.contains(&name.as_str()) {
                    return Err(ParseError::UnknownBuiltin { offset: off, name });
                }
                if primes > 0 && args.len() != 1 {
                    return Err(syntax(off, "primes apply to one-argument functions only"));
                }
                let mut orders = vec![0; args.len()];
                if primes > 0 {
                    orders[0] = primes;
                }
                Ok(Expr::func(&name, args, orders))
            }
            _ => Err(syntax(off, "unexpected token")),
        }
    }

    // after `(`: expr ("," expr)* ")"
    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(args)
    }

    // Diff(F, xi, n) or Diff(F(a, b), n1, n2)
    fn diff(&mut self) -> Result<Expr, ParseError> {
        self.expect('(')?;
        let fname = self.ident()?;
        if self.eat('(') {
            let args = self.args()?;
            let mut orders = Vec::new();
            for _ in 0..args.len() {
                self.expect(',')?;
                orders.push(self.int()?);
            }
            self.expect(')')?;
            return Ok(Expr::func(&fname, args, orders));
        }
        self.expect(',')?;
        let var = self.ident()?;
        self.expect(',')?;
        let n = self.int()?;
        self.expect(')')?;
        Ok(Expr::func(&fname, vec![Expr::sym(&var)], vec![n]))
    }
}

/// Parses the expression grammar (`+ - * / ^`, builtins, `F'(xi)`, `Diff(F, xi, n)`).
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    if p.peek().is_none() {
        return Err(syntax(0, "empty input"));
    }
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(syntax(p.offset(), "trailing input"));
    }
    Ok(e)
}
