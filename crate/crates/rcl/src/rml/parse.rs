use thiserror::Error;

use super::{Arg, EventType, Guard, Lit, PatVal, RmlSpec, RmlTerm};
use crate::ast::{CmpOp, Number};
use crate::discharge::parse_rational;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {message}")]
pub struct RmlParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    Or,
    And,
    Not,
    Cmp(CmpOp),
    Punct(char),
    Eof,
}

struct Lexed {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(src: &str) -> Result<Vec<Lexed>, RmlParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1u32, 1u32);
    let err = |line, col, m: String| RmlParseError { line, col, message: m };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '\\' if chars.get(i + 1) == Some(&'/') => {
                adv = 2;
                Some(Tok::Or)
            }
            '/' if chars.get(i + 1) == Some(&'\\') => {
                adv = 2;
                Some(Tok::And)
            }
            '∨' => Some(Tok::Or),
            '∧' => Some(Tok::And),
            '¬' => Some(Tok::Not),
            '<' | '>' | '!' | '=' => {
                let eq = chars.get(i + 1) == Some(&'=');
                adv = if eq { 2 } else { 1 };
                Some(match (c, eq) {
                    ('<', false) => Tok::Cmp(CmpOp::Lt),
                    ('<', true) => Tok::Cmp(CmpOp::Le),
                    ('>', false) => Tok::Cmp(CmpOp::Gt),
                    ('>', true) => Tok::Cmp(CmpOp::Ge),
                    ('=', true) => Tok::Cmp(CmpOp::Eq),
                    ('!', true) => Tok::Cmp(CmpOp::Ne),
                    ('=', false) => Tok::Punct('='),
                    _ => return Err(err(l0, c0, format!("unexpected `{c}`"))),
                })
            }
            '\'' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '\'' && chars[j] != '\n' {
                    j += 1;
                }
                if chars.get(j) != Some(&'\'') {
                    return Err(err(l0, c0, "unterminated string".into()));
                }
                adv = j + 1 - i;
                Some(Tok::Str(chars[i + 1..j].iter().collect()))
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                adv = j - i;
                Some(Tok::Num(chars[i..j].iter().collect()))
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                adv = j - i;
                let w: String = chars[i..j].iter().collect();
                Some(if w == "not" { Tok::Not } else { Tok::Ident(w) })
            }
            '(' | ')' | '{' | '}' | ',' | ';' | ':' | '*' | '+' => Some(Tok::Punct(c)),
            other => return Err(err(l0, c0, format!("unexpected `{other}`"))),
        };
        if let Some(tok) = tok {
            out.push(Lexed { tok, line: l0, col: c0 });
        }
        i += adv;
        col += adv as u32;
    }
    out.push(Lexed { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    scope: Vec<String>,
}

const RESERVED: &[&str] = &["let", "matches", "with", "any", "none", "empty", "true", "false"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, RmlParseError> {
        let t = &self.toks[self.pos];
        Err(RmlParseError { line: t.line, col: t.col, message: message.into() })
    }

    fn punct(&mut self, c: char) -> Result<(), RmlParseError> {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{c}`"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn ident(&mut self) -> Result<String, RmlParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("expected an identifier"),
        }
    }

    fn number(&mut self) -> Result<Number, RmlParseError> {
        match self.peek().clone() {
            Tok::Num(n) => match parse_rational(&n) {
                Some(v) => {
                    self.bump();
                    Ok(v)
                }
                None => self.error(format!("bad number `{n}`")),
            },
            _ => self.error("expected a number"),
        }
    }

    fn list<T>(&mut self, close: char, mut item: impl FnMut(&mut Self) -> Result<T, RmlParseError>) -> Result<Vec<T>, RmlParseError> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(close) {
                return Ok(out);
            }
            self.punct(',')?;
        }
    }

    fn lit(&mut self) -> Result<Lit, RmlParseError> {
        match self.peek().clone() {
            Tok::Num(_) => Ok(Lit::Num(self.number()?)),
            Tok::Str(s) => {
                self.bump();
                Ok(Lit::Str(s))
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(Lit::Bool(w == "true"))
            }
            Tok::Ident(w) => {
                self.bump();
                Ok(Lit::Sym(w))
            }
            _ => self.error("expected a value"),
        }
    }

    fn event_type(&mut self, name: String) -> Result<EventType, RmlParseError> {
        let params = if self.eat('(') { self.list(')', |p| p.ident())? } else { Vec::new() };
        if !self.is_word("matches") {
            return self.error("expected `matches`");
        }
        self.bump();
        self.punct('{')?;
        let fields = self.list('}', |p| {
            let k = p.ident()?;
            p.punct(':')?;
            let v = match p.peek().clone() {
                Tok::Ident(w) if params.contains(&w) => {
                    p.bump();
                    PatVal::Param(w)
                }
                _ => PatVal::Lit(p.lit()?),
            };
            Ok((k, v))
        })?;
        let guard = if self.is_word("with") {
            self.bump();
            let param = self.ident()?;
            if !params.contains(&param) {
                return self.error(format!("`{param}` is not a parameter of `{name}`"));
            }
            let Tok::Cmp(op) = self.bump() else {
                return self.error("expected a comparison");
            };
            Some(Guard { param, op, value: self.number()? })
        } else {
            None
        };
        self.punct(';')?;
        Ok(EventType { name, params, fields, guard })
    }

    fn starts_primary(&self) -> bool {
        match self.peek() {
            Tok::Not | Tok::Punct('(') | Tok::Punct('{') => true,
            Tok::Ident(w) => !matches!(w.as_str(), "let" | "matches" | "with"),
            _ => false,
        }
    }

    fn or(&mut self) -> Result<RmlTerm, RmlParseError> {
        let mut ts = vec![self.and()?];
        while *self.peek() == Tok::Or {
            self.bump();
            ts.push(self.and()?);
        }
        Ok(if ts.len() == 1 { ts.pop().unwrap() } else { RmlTerm::Or(ts) })
    }

    fn and(&mut self) -> Result<RmlTerm, RmlParseError> {
        let mut ts = vec![self.cat()?];
        while *self.peek() == Tok::And {
            self.bump();
            ts.push(self.cat()?);
        }
        Ok(if ts.len() == 1 { ts.pop().unwrap() } else { RmlTerm::And(ts) })
    }

    fn cat(&mut self) -> Result<RmlTerm, RmlParseError> {
        let mut t = self.postfix()?;
        while self.starts_primary() {
            let next = self.postfix()?;
            t = RmlTerm::concat(t, next);
        }
        Ok(t)
    }

    fn postfix(&mut self) -> Result<RmlTerm, RmlParseError> {
        let mut t = self.primary()?;
        while self.eat('*') {
            t = RmlTerm::star(t);
        }
        Ok(t)
    }

    fn arg(&mut self) -> Result<Arg, RmlParseError> {
        match self.peek().clone() {
            Tok::Ident(w) if w == "_" => {
                self.bump();
                Ok(Arg::Wild)
            }
            Tok::Ident(w) if self.scope.contains(&w) => {
                self.bump();
                if self.eat('+') {
                    let n = self.number()?;
                    if !n.is_integer() || *n.numer() < 0 {
                        return self.error("offset must be a natural number");
                    }
                    return Ok(Arg::Add(w, n.to_integer() as u64));
                }
                Ok(Arg::Var(w))
            }
            _ => Ok(Arg::Lit(self.lit()?)),
        }
    }

    fn primary(&mut self) -> Result<RmlTerm, RmlParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                let t = self.primary()?;
                match t.negate() {
                    Some(n) => Ok(n),
                    None => self.error("only single-event terms can be negated"),
                }
            }
            Tok::Punct('(') => {
                self.bump();
                let t = self.or()?;
                self.punct(')')?;
                Ok(t)
            }
            Tok::Punct('{') => {
                self.bump();
                let t = if self.is_word("let") {
                    self.bump();
                    let mut vars = vec![self.ident()?];
                    while self.eat(',') {
                        vars.push(self.ident()?);
                    }
                    self.punct(';')?;
                    let n = self.scope.len();
                    self.scope.extend(vars.iter().cloned());
                    let body = self.or();
                    self.scope.truncate(n);
                    RmlTerm::let_(vars, body?)
                } else {
                    self.or()?
                };
                self.punct('}')?;
                Ok(t)
            }
            Tok::Ident(w) if w == "any" || w == "none" || w == "empty" => {
                self.bump();
                Ok(match w.as_str() {
                    "any" => RmlTerm::Any,
                    "none" => RmlTerm::Nothing,
                    _ => RmlTerm::Empty,
                })
            }
            Tok::Ident(w) => {
                let here = &self.toks[self.pos];
                let next = &self.toks[self.pos + 1];
                let call = next.tok == Tok::Punct('(') && next.line == here.line && next.col as usize == here.col as usize + w.chars().count();
                let name = self.ident()?;
                // `c (a b)` is the event `c` followed by a group.
                let args = if call && self.eat('(') { self.list(')', |p| p.arg())? } else { Vec::new() };
                Ok(RmlTerm::Et { name, args, negated: false })
            }
            _ => self.error("expected a term"),
        }
    }
}

/// Parses a single term. `not` is pushed down to event types as it is read.
pub fn parse_term(src: &str) -> Result<RmlTerm, RmlParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, scope: Vec::new() };
    let t = p.or()?;
    if *p.peek() != Tok::Eof {
        return p.error("unexpected input after term");
    }
    Ok(t)
}

/// Parses a specification: event-type declarations and `name = term;`
/// definitions. A `main` definition is accepted and ignored; it is always
/// the conjunction of the other terms.
pub fn parse_rml(src: &str) -> Result<RmlSpec, RmlParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, scope: Vec::new() };
    let mut spec = RmlSpec { event_types: Vec::new(), terms: Vec::new() };
    while *p.peek() != Tok::Eof {
        let name = p.ident()?;
        if *p.peek() == Tok::Punct('=') {
            p.bump();
            let t = p.or()?;
            p.punct(';')?;
            if name != "main" {
                spec.terms.push((name, t));
            }
        } else {
            if matches!(p.peek2(), Tok::Eof) {
                return p.error("expected `matches` or `=`");
            }
            let et = p.event_type(name)?;
            spec.event_types.push(et);
        }
    }
    if let Some((n, a)) = spec.undeclared_refs().first() {
        return Err(RmlParseError { line: 0, col: 0, message: format!("event type `{n}` with {a} arguments is not declared") });
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rml::emit_rml;

    #[test]
    fn negated_conjunction_is_pushed_down() {
        let t = parse_term("not (a /\\ b)").unwrap();
        assert_eq!(t, RmlTerm::Or(vec![RmlTerm::et("a", vec![]).negate().unwrap(), RmlTerm::et("b", vec![]).negate().unwrap()]));
    }

    #[test]
    fn unicode_connectives() {
        let a = parse_term("{let x; ¬p(x) ∨ q(x+1)}*").unwrap();
        let b = parse_term("{let x; not p(x) \\/ q(x+1)}*").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unbound_identifiers_are_constants() {
        let t = parse_term("{let i; command(inspect, i)}").unwrap();
        let RmlTerm::Let(_, b) = t else { panic!() };
        assert_eq!(*b, RmlTerm::et("command", vec![Arg::Lit(Lit::Sym("inspect".into())), Arg::Var("i".into())]));
    }

    #[test]
    fn spec_round_trip() {
        let src = "r_lt_120(v) matches { topic: 'p/R', data: v } with v < 120;\nc(Cmd, i) matches { topic: 'p/C', command: Cmd, id: i };\nt1 = {let i; not r_lt_120(_) \\/ c(inspect, i)}*;\nt2 = c(move, 1) c(move, -2.5);\n";
        let spec = parse_rml(src).unwrap();
        assert_eq!(emit_rml(&spec), src);
    }

    #[test]
    fn undeclared_reference() {
        assert!(parse_rml("t1 = {a}*;").is_err());
    }
}
