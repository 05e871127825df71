//! The text format for systems:
//!
//! ```text
//! # comment
//! char: 0
//! derivations: 2
//! unknowns: a b c
//! D0 a = c^2
//! D1 a = c
//! ```

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::algebra::{Field, Naming, Poly, Scalar};
use crate::deriv_index::{DerivIndex, MultiIndex, MAX_HEIGHT};
use crate::tower::{Presentation, Relation};
use crate::verdict::SystemSpec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("bad header: {0}")]
    Header(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("derivation D{0} out of range")]
    Derivation(usize),
    #[error("equation has no unknowns")]
    ConstantEquation,
    #[error("division by a non-constant expression")]
    NonConstantDivision,
    #[error("division by zero")]
    DivisionByZero,
    #[error("leader {leader} already used on line {first}")]
    DuplicateLeader { leader: String, first: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Deriv(usize),
    Op(char),
}

fn tokenize(src: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |c: usize, m: String| ParseError { line, column: col0 + c, kind: ParseErrorKind::Syntax(m) };
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
            out.push((Tok::Num(s.parse().expect("digits")), col0 + start));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let tok = match s.strip_prefix('D') {
                Some(d) if !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()) => {
                    Tok::Deriv(d.parse().map_err(|_| err(start, format!("bad derivation `{s}`")))?)
                }
                _ => Tok::Ident(s),
            };
            out.push((tok, col0 + start));
        } else if "+-*/^()=".contains(c) {
            out.push((Tok::Op(c), col0 + i));
            i += 1;
        } else {
            return Err(err(i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
    field: Field,
    m: usize,
    names: &'a BTreeMap<String, usize>,
}

impl<'a> Parser<'a> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn fail(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, column: self.col(), kind }
    }

    fn syntax(&self, msg: &str) -> ParseError {
        self.fail(ParseErrorKind::Syntax(msg.to_string()))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
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

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.peek() == Some(&Tok::Op('/')) {
                self.pos += 1;
                let at = self.pos;
                let d = self.unary()?;
                let Some(c) = d.as_constant() else {
                    self.pos = at;
                    return Err(self.fail(ParseErrorKind::NonConstantDivision));
                };
                let Ok(inv) = c.inv() else {
                    self.pos = at;
                    return Err(self.fail(ParseErrorKind::DivisionByZero));
                };
                acc = acc.scale(&inv);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                let e: u32 = n.try_into().map_err(|_| self.syntax("exponent too large"))?;
                if e > MAX_HEIGHT {
                    return Err(self.syntax("exponent too large"));
                }
                self.pos += 1;
                Ok(e)
            }
            _ => Err(self.syntax("expected an integer exponent")),
        }
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.exponent()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Poly::constant(Scalar::from_bigint(self.field, &n)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            Some(Tok::Deriv(_)) | Some(Tok::Ident(_)) => self.derivative(),
            _ => Err(self.syntax("expected a number, a derivative or `(`")),
        }
    }

    fn derivative(&mut self) -> Result<Poly, ParseError> {
        let mut index = vec![0u32; self.m];
        while let Some(Tok::Deriv(i)) = self.peek().cloned() {
            if i >= self.m {
                return Err(self.fail(ParseErrorKind::Derivation(i)));
            }
            self.pos += 1;
            let e = if self.eat('^') { self.exponent()? } else { 1 };
            index[i] += e;
        }
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                let Some(&k) = self.names.get(&name) else {
                    return Err(self.fail(ParseErrorKind::UnknownName(name)));
                };
                if index.iter().sum::<u32>() > MAX_HEIGHT {
                    return Err(self.syntax("derivative height too large"));
                }
                self.pos += 1;
                Ok(Poly::var(self.field, DerivIndex::new(MultiIndex::new(index), k)))
            }
            _ => Err(self.syntax("expected an unknown after derivations")),
        }
    }
}

/// Parse a whole document.
pub fn parse_system(text: &str) -> Result<SystemSpec, ParseError> {
    let mut field = None;
    let mut m = None;
    let mut names: Option<Vec<String>> = None;
    let mut equations: Vec<(Poly, usize)> = Vec::new();
    let header = |line: usize, msg: String| ParseError { line, column: 1, kind: ParseErrorKind::Header(msg) };
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        if let Some((key, value)) = body.split_once(':') {
            if !equations.is_empty() {
                return Err(header(line, "header after equations".into()));
            }
            let value = value.trim();
            match key.trim() {
                "char" => {
                    let p: u64 = value.parse().map_err(|_| header(line, format!("bad characteristic `{value}`")))?;
                    field = Some(Field::with_characteristic(p).map_err(|e| header(line, e.to_string()))?);
                }
                "derivations" => {
                    let v: usize = value.parse().map_err(|_| header(line, format!("bad derivation count `{value}`")))?;
                    if v == 0 || v > 16 {
                        return Err(header(line, "derivations must be between 1 and 16".into()));
                    }
                    m = Some(v);
                }
                "unknowns" => {
                    let list: Vec<String> = value.split_whitespace().map(String::from).collect();
                    if list.is_empty() {
                        return Err(header(line, "no unknowns".into()));
                    }
                    for (i, n) in list.iter().enumerate() {
                        let ok = n.chars().next().map(|c| c.is_alphabetic() || c == '_').unwrap_or(false)
                            && n.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
                        let deriv_like = n.strip_prefix('D').map(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit())).unwrap_or(false);
                        if !ok || deriv_like {
                            return Err(header(line, format!("bad unknown name `{n}`")));
                        }
                        if list[..i].contains(n) {
                            return Err(header(line, format!("duplicate unknown `{n}`")));
                        }
                    }
                    names = Some(list);
                }
                other => return Err(header(line, format!("unknown header `{other}`"))),
            }
            continue;
        }
        let (Some(mm), Some(nm)) = (m, names.as_ref()) else {
            return Err(header(line, "equations need `derivations:` and `unknowns:` first".into()));
        };
        let f = field.unwrap_or(Field::Rational);
        let lookup: BTreeMap<String, usize> = nm.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let toks = tokenize(body, line, 1)?;
        let eq: Vec<usize> = toks.iter().enumerate().filter(|(_, t)| t.0 == Tok::Op('=')).map(|(i, _)| i).collect();
        if eq.len() != 1 {
            let col = eq.get(1).map(|&i| toks[i].1).unwrap_or(1);
            return Err(ParseError { line, column: col, kind: ParseErrorKind::Syntax("expected exactly one `=`".into()) });
        }
        let (lhs, rhs) = toks.split_at(eq[0]);
        let side = |toks: &[(Tok, usize)], end_col: usize| -> Result<Poly, ParseError> {
            let mut p = Parser { toks: toks.to_vec(), pos: 0, line, end_col, field: f, m: mm, names: &lookup };
            let e = p.expr()?;
            if p.pos != p.toks.len() {
                return Err(p.syntax("unexpected token"));
            }
            Ok(e)
        };
        let eq_col = rhs[0].1;
        let l = side(lhs, eq_col)?;
        let r = side(&rhs[1..], body.chars().count() + 1)?;
        let poly = l.sub(&r);
        if poly.vars().is_empty() {
            return Err(ParseError { line, column: 1, kind: ParseErrorKind::ConstantEquation });
        }
        equations.push((poly, line));
    }
    let m = m.ok_or_else(|| header(text.lines().count().max(1), "missing `derivations:`".into()))?;
    let names = names.ok_or_else(|| header(text.lines().count().max(1), "missing `unknowns:`".into()))?;
    let field = field.unwrap_or(Field::Rational);
    let mut seen: BTreeMap<DerivIndex, usize> = BTreeMap::new();
    let mut relations = Vec::new();
    for (poly, line) in equations {
        let rel = Relation::new(poly).expect("nonconstant");
        if let Some(&first) = seen.get(&rel.leader) {
            let naming = Naming::new(names.clone());
            return Err(ParseError {
                line,
                column: 1,
                kind: ParseErrorKind::DuplicateLeader { leader: naming.var_name(&rel.leader), first },
            });
        }
        seen.insert(rel.leader.clone(), line);
        relations.push(rel);
    }
    Ok(SystemSpec { pres: Presentation { m, n: names.len(), field, relations }, names })
}

/// Parse one polynomial expression in the context of a system.
pub fn parse_poly(spec: &SystemSpec, text: &str) -> Result<Poly, ParseError> {
    let lookup: BTreeMap<String, usize> = spec.names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
    let toks = tokenize(text, 1, 1)?;
    let mut p = Parser { toks, pos: 0, line: 1, end_col: text.chars().count() + 1, field: spec.pres.field, m: spec.pres.m, names: &lookup };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.syntax("unexpected token"));
    }
    Ok(e)
}

/// Header plus one `poly = 0` line per relation.
pub fn serialize_system(spec: &SystemSpec) -> String {
    let mut s = format!(
        "char: {}\nderivations: {}\nunknowns: {}\n",
        spec.pres.field.characteristic(),
        spec.pres.m,
        spec.names.join(" ")
    );
    let naming = spec.naming();
    for rel in &spec.pres.relations {
        s.push_str(&rel.poly.display_with(&naming));
        s.push_str(" = 0\n");
    }
    s
}
