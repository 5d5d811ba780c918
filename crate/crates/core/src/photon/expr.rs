//! Text expressions and line-oriented scripts over the photon algebra.
//!
//! Expressions combine `a(k,mu)`, `ad(k,mu)`, `alpha(mu)`, `alphad(mu)`,
//! `arad(k,mu)`, `aradd(k,mu)`, `H` and rational numbers with `+ - * /` and
//! parentheses. Script lines:
//!
//! ```text
//! N 3
//! OMEGA 1/2
//! COMM alpha(1) ; alphad(1)        => 3/2
//! APPLY H ; alphad(2)              => 1/2*alphad(2)
//! NORM alphad(0)                   => -3/2
//! PARITY 1 + alphad(1)             => mixed
//! SUBSIDIARY alphad(1) ; 1,0,0,1   => true
//! ```
//!
//! States are written as the operator that creates them from the vacuum.
//! The optional `=> expected` part turns a line into an exact assertion.

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{
    apply, apply_to_vacuum, build_a_rad, build_alpha, build_h_ph, commutator, inner_product, rational,
    subsidiary_check, time_parity, Generator, OperatorPolynomial, Rational,
};
use crate::error::{Error, Result};

/// Interpretation context: number of colors and mode frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Env {
    pub colors: u32,
    pub omega: Rational,
}

impl Default for Env {
    fn default() -> Self {
        Env { colors: 2, omega: Rational::one() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Num(s.parse().map_err(|_| Error::usage(format!("number {s} out of range")))?));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/(),".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::usage(format!("unexpected character {c:?} in expression")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    env: &'a Env,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::usage(format!("expected {c:?} at token {}", self.pos + 1)))
        }
    }

    fn int(&mut self) -> Result<i64> {
        match self.toks.get(self.pos) {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(*n)
            }
            _ => Err(Error::usage(format!("expected an integer at token {}", self.pos + 1))),
        }
    }

    fn expr(&mut self) -> Result<OperatorPolynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<OperatorPolynomial> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                if d.degree() != 0 || d.is_zero() {
                    return Err(Error::usage("division only by a non-zero number"));
                }
                acc = acc.scale(&(Rational::one() / d.constant()));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<OperatorPolynomial> {
        if self.eat('-') {
            return Ok(self.unary()?.scale(&rational(-1, 1)));
        }
        self.atom()
    }

    fn args(&mut self, n: usize) -> Result<Vec<i64>> {
        self.expect('(')?;
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            if i > 0 {
                self.expect(',')?;
            }
            v.push(self.int()?);
        }
        self.expect(')')?;
        Ok(v)
    }

    fn atom(&mut self) -> Result<OperatorPolynomial> {
        let tok = self.toks.get(self.pos).cloned().ok_or_else(|| Error::usage("unexpected end of expression"))?;
        self.pos += 1;
        let n = self.env.colors;
        let color = |k: i64| -> Result<u32> {
            u32::try_from(k).ok().filter(|k| (1..=n).contains(k)).ok_or_else(|| Error::domain(format!("color {k} outside 1..={n}")))
        };
        let index = |mu: i64| -> Result<u8> {
            u8::try_from(mu).ok().filter(|m| *m <= 3).ok_or_else(|| Error::domain(format!("index {mu} outside 0..=3")))
        };
        match tok {
            Tok::Num(v) => Ok(OperatorPolynomial::scalar(rational(v, 1))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "a" | "ad" => {
                    let v = self.args(2)?;
                    Ok(OperatorPolynomial::generator(Generator::new(color(v[0])?, index(v[1])?, name == "ad")?))
                }
                "alpha" | "alphad" => {
                    let v = self.args(1)?;
                    let al = build_alpha(n, index(v[0])?)?;
                    Ok(if name == "alphad" { al.adjoint() } else { al })
                }
                "arad" | "aradd" => {
                    let v = self.args(2)?;
                    let ar = build_a_rad(n, color(v[0])?, index(v[1])?)?;
                    Ok(if name == "aradd" { ar.adjoint() } else { ar })
                }
                "H" => build_h_ph(n, &self.env.omega),
                other => Err(Error::usage(format!("unknown symbol {other:?}"))),
            },
            Tok::Sym(c) => Err(Error::usage(format!("unexpected {c:?}"))),
        }
    }
}

/// Parses an operator expression.
pub fn parse_expression(src: &str, env: &Env) -> Result<OperatorPolynomial> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0, env };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::usage(format!("trailing input after token {}", p.pos)));
    }
    Ok(e)
}

fn parse_rational(src: &str) -> Result<Rational> {
    let e = parse_expression(src, &Env::default())?;
    if e.degree() != 0 {
        return Err(Error::usage(format!("{src:?} is not a number")));
    }
    Ok(e.constant())
}

/// One evaluated script line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptLine {
    pub line: usize,
    pub command: String,
    pub input: String,
    pub result: String,
    pub expected: Option<String>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScriptOutcome {
    pub lines: Vec<ScriptLine>,
}

impl ScriptOutcome {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass != Some(false))
    }

    pub fn assertions(&self) -> usize {
        self.lines.iter().filter(|l| l.pass.is_some()).count()
    }
}

fn split2<'a>(body: &'a str, what: &str) -> Result<(&'a str, &'a str)> {
    body.split_once(';').map(|(a, b)| (a.trim(), b.trim())).ok_or_else(|| Error::usage(format!("{what} needs two arguments separated by ';'")))
}

fn run_line(cmd: &str, body: &str, expected: Option<&str>, env: &mut Env) -> Result<(String, Option<bool>)> {
    let state = |src: &str, env: &Env| parse_expression(src, env).map(|p| apply_to_vacuum(&p));
    match cmd {
        "N" => {
            let n: u32 = body.trim().parse().map_err(|_| Error::usage(format!("N expects an integer, got {body:?}")))?;
            if n < 2 {
                return Err(Error::domain(format!("the color algebra needs N ≥ 2, got {n}")));
            }
            env.colors = n;
            Ok((n.to_string(), None))
        }
        "OMEGA" => {
            let w = parse_rational(body)?;
            env.omega = w.clone();
            Ok((w.to_string(), None))
        }
        "COMM" => {
            let (a, b) = split2(body, "COMM")?;
            let c = commutator(&parse_expression(a, env)?, &parse_expression(b, env)?);
            let pass = expected.map(|e| parse_expression(e, env).map(|e| e == c)).transpose()?;
            Ok((c.to_string(), pass))
        }
        "APPLY" => {
            let (a, b) = split2(body, "APPLY")?;
            let r = apply(&parse_expression(a, env)?, &state(b, env)?);
            let pass = expected.map(|e| state(e, env).map(|e| e == r)).transpose()?;
            Ok((r.to_string(), pass))
        }
        "NORM" => {
            let s = state(body, env)?;
            let r = inner_product(&s, &s);
            let pass = expected.map(|e| parse_rational(e).map(|e| e == r)).transpose()?;
            Ok((r.to_string(), pass))
        }
        "PARITY" => {
            let r = time_parity(&state(body, env)?).label();
            Ok((r.to_string(), expected.map(|e| e.trim() == r)))
        }
        "SUBSIDIARY" => {
            let (a, b) = split2(body, "SUBSIDIARY")?;
            let comps: Vec<Rational> = b.split(',').map(parse_rational).collect::<Result<_>>()?;
            let lam: [Rational; 4] = comps.try_into().map_err(|_| Error::usage("SUBSIDIARY needs four λ components"))?;
            let per = subsidiary_check(env.colors, &state(a, env)?, &lam)?;
            let all = per.iter().all(|b| *b);
            let pass = match expected.map(str::trim) {
                None => None,
                Some("true") => Some(all),
                Some("false") => Some(!all),
                Some(other) => return Err(Error::usage(format!("SUBSIDIARY expects true or false, got {other:?}"))),
            };
            let r: Vec<&str> = per.iter().map(|b| if *b { "true" } else { "false" }).collect();
            Ok((r.join(","), pass))
        }
        other => Err(Error::usage(format!("unknown command {other:?} (expected N, OMEGA, COMM, APPLY, NORM, PARITY or SUBSIDIARY)"))),
    }
}

/// Runs a script; errors carry the 1-based line number.
pub fn run_script(src: &str) -> Result<ScriptOutcome> {
    let mut env = Env::default();
    let mut out = ScriptOutcome::default();
    for (i, raw) in src.lines().enumerate() {
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (stmt, expected) = match text.split_once("=>") {
            Some((s, e)) => (s.trim(), Some(e.trim())),
            None => (text, None),
        };
        let (cmd, body) = stmt.split_once(char::is_whitespace).map_or((stmt, ""), |(c, b)| (c, b.trim()));
        let wrap = |e: Error| Error::Parse { path: None, line: Some(i + 1), message: e.to_string() };
        let (result, pass) = run_line(cmd, body, expected, &mut env).map_err(wrap)?;
        out.lines.push(ScriptLine {
            line: i + 1,
            command: cmd.to_string(),
            input: body.to_string(),
            result,
            expected: expected.map(str::to_string),
            pass,
        });
    }
    Ok(out)
}
