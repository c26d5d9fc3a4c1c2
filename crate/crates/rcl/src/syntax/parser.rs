use num_traits::Zero;

use super::lexer::{is_keyword, lex, Tok, Token};
use crate::ast::*;
use crate::diag::{Diagnostic, Span};

/// Source positions of the parts of a node clause, kept beside the AST so
/// that AST equality stays purely structural.
#[derive(Debug, Clone, Default)]
pub struct ContractSpans {
    pub node: Span,
    pub inputs: Vec<Span>,
    pub outputs: Vec<Span>,
    pub topics: Vec<Span>,
    pub assumes: Vec<Span>,
    pub guarantees: Vec<Span>,
}

#[derive(Debug, Clone, Default)]
pub struct DocSpans {
    /// One span per context declaration, flattened across context clauses.
    pub context: Vec<Span>,
    /// One entry per node clause, in document order.
    pub contracts: Vec<ContractSpans>,
}

impl DocSpans {
    pub fn for_node(&self, doc: &Document, node: &str) -> Option<&ContractSpans> {
        let idx = doc.contracts().position(|c| c.node == node)?;
        self.contracts.get(idx)
    }
}

pub fn parse_document(src: &str) -> Result<Document, Vec<Diagnostic>> {
    parse_document_with_spans(src).map(|(d, _)| d)
}

pub fn parse_document_with_spans(src: &str) -> Result<(Document, DocSpans), Vec<Diagnostic>> {
    let tokens = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser { toks: tokens, pos: 0 };
    p.document().map_err(|d| vec![d])
}

pub fn parse_formula(src: &str) -> Result<Formula, Vec<Diagnostic>> {
    let tokens = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser { toks: tokens, pos: 0 };
    let f = p.formula().map_err(|d| vec![d])?;
    if p.peek() != &Tok::Eof {
        return Err(vec![p.unexpected("end of formula")]);
    }
    Ok(f)
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        let tok = self.peek();
        let code = if *tok == Tok::Eof { "P002" } else { "P001" };
        Diagnostic::error(code, self.span(), format!("expected {wanted}, found {}", tok.describe()))
    }

    fn expect(&mut self, t: Tok) -> PResult<Span> {
        if self.peek() == &t {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    /// A user-chosen identifier; keywords are refused.
    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if is_keyword(&s) => Err(Diagnostic::error(
                "P004",
                self.span(),
                format!("keyword `{s}` cannot be used as {what}"),
            )),
            Tok::Ident(s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn document(&mut self) -> PResult<(Document, DocSpans)> {
        let mut doc = Document::default();
        let mut spans = DocSpans::default();
        loop {
            if self.peek() == &Tok::Eof {
                break;
            }
            if self.is_kw("context") {
                let (decls, sp) = self.context_clause()?;
                spans.context.extend(sp);
                doc.clauses.push(Clause::Context(decls));
            } else if self.is_kw("node") {
                let (c, sp) = self.node_clause()?;
                spans.contracts.push(sp);
                doc.clauses.push(Clause::Node(c));
            } else {
                return Err(self.unexpected("`context` or `node`"));
            }
        }
        Ok((doc, spans))
    }

    fn unterminated<T>(&self, r: PResult<T>, start: Span, what: &str) -> PResult<T> {
        r.map_err(|d| {
            if d.code == "P002" {
                Diagnostic::error("P002", start, format!("unterminated {what} clause"))
            } else {
                d
            }
        })
    }

    fn context_clause(&mut self) -> PResult<(Vec<ContextDecl>, Vec<Span>)> {
        let start = self.expect_kw("context")?;
        let r = self.context_body();
        self.unterminated(r, start, "context")
    }

    fn context_body(&mut self) -> PResult<(Vec<ContextDecl>, Vec<Span>)> {
        self.expect(Tok::LBrace)?;
        let mut decls = Vec::new();
        let mut spans = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let (name, sp) = self.ident("a type name")?;
            if name == "x" {
                return Err(Diagnostic::error("P004", sp, "`x` is reserved as the product separator"));
            }
            self.expect(Tok::Colon)?;
            let body = self.type_expr()?;
            self.expect(Tok::Semi)?;
            decls.push(ContextDecl { name, body });
            spans.push(sp);
        }
        Ok((decls, spans))
    }

    fn base_type(&mut self) -> PResult<BaseType> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "REAL" || s == "NATURAL" || s == "BOOL" => {
                self.bump();
                Ok(BaseType::from_name(&s))
            }
            Tok::Ident(_) => Ok(BaseType::Named(self.ident("a type")?.0)),
            _ => Err(self.unexpected("a type")),
        }
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let sp = self.span();
        if self.eat(&Tok::LBrace) {
            if self.eat(&Tok::RBrace) {
                return Ok(TypeExpr::Empty);
            }
            let mut members: Vec<(String, Option<Vec<BaseType>>)> = Vec::new();
            loop {
                let (name, _) = self.ident("a set member")?;
                let params = if self.eat(&Tok::LParen) {
                    let mut ps = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            ps.push(self.base_type()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    Some(ps)
                } else {
                    None
                };
                members.push((name, params));
                if self.eat(&Tok::RBrace) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
            if members.iter().all(|(_, p)| p.is_none()) {
                return Ok(TypeExpr::Enum(members.into_iter().map(|(n, _)| n).collect()));
            }
            return Ok(TypeExpr::Constructors(
                members
                    .into_iter()
                    .map(|(name, p)| Constructor { name, params: p.unwrap_or_default() })
                    .collect(),
            ));
        }
        if let Tok::Ident(s) = self.peek() {
            if s == "seq" || s == "sequence" {
                return Err(Diagnostic::error("P005", sp, "sequence types are not supported"));
            }
        }
        let mut params = vec![self.base_type()?];
        while self.is_kw("x") {
            self.bump();
            params.push(self.base_type()?);
        }
        if !self.eat(&Tok::LongArrow) {
            return Err(Diagnostic::error(
                "P005",
                sp,
                "unsupported type declaration: expected `{...}` or a function type `T1 x T2 --> T3`",
            ));
        }
        let ret = self.base_type()?;
        Ok(TypeExpr::Function { params, ret })
    }

    fn node_clause(&mut self) -> PResult<(Contract, ContractSpans)> {
        let start = self.expect_kw("node")?;
        let r = self.node_body();
        self.unterminated(r, start, "node")
    }

    fn node_body(&mut self) -> PResult<(Contract, ContractSpans)> {
        let (node, node_span) = self.ident("a node name")?;
        let mut spans = ContractSpans { node: node_span, ..Default::default() };
        self.expect(Tok::LBrace)?;
        self.expect_kw("inputs")?;
        let (inputs, isp) = self.io_list(Dir::In)?;
        self.expect_kw("outputs")?;
        let (outputs, osp) = self.io_list(Dir::Out)?;
        spans.inputs = isp;
        spans.outputs = osp;
        let topics = if self.eat_kw("topics") {
            let (t, tsp) = self.topic_list()?;
            spans.topics = tsp;
            Some(t)
        } else {
            None
        };
        let mut assumes = Vec::new();
        while self.is_kw("assume") {
            spans.assumes.push(self.bump().span);
            self.expect(Tok::LParen)?;
            assumes.push(self.formula()?);
            self.expect(Tok::RParen)?;
        }
        let mut guarantees = Vec::new();
        while self.is_kw("guarantee") {
            spans.guarantees.push(self.bump().span);
            self.expect(Tok::LParen)?;
            guarantees.push(self.formula()?);
            self.expect(Tok::RParen)?;
        }
        if self.peek() == &Tok::RBrace && guarantees.is_empty() {
            return Err(Diagnostic::error("P003", self.span(), "at least one guarantee required"));
        }
        if guarantees.is_empty() {
            return Err(self.unexpected("`assume` or `guarantee`"));
        }
        self.expect(Tok::RBrace)?;
        Ok((Contract { node, inputs, outputs, topics, assumes, guarantees }, spans))
    }

    fn io_list(&mut self, dir: Dir) -> PResult<(Vec<IoVar>, Vec<Span>)> {
        self.expect(Tok::LParen)?;
        let mut vars = Vec::new();
        let mut spans = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok((vars, spans));
        }
        loop {
            let (name, sp) = self.ident("a variable name")?;
            self.expect(Tok::Colon)?;
            let ty = self.base_type()?;
            vars.push(IoVar { dir, name, ty });
            spans.push(sp);
            if self.eat(&Tok::RParen) {
                return Ok((vars, spans));
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn topic_list(&mut self) -> PResult<(Vec<TopicBinding>, Vec<Span>)> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        let mut spans = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok((out, spans));
        }
        loop {
            let sp = self.span();
            let mut message_type = self.ident("a message type")?.0;
            while self.eat(&Tok::Slash) {
                message_type.push('/');
                message_type.push_str(&self.ident("a message type segment")?.0);
            }
            let (topic_name, _) = self.ident("a topic name")?;
            let binding = if self.eat_kw("matches") {
                self.expect(Tok::LParen)?;
                let dir = if (self.is_kw("in") || self.is_kw("out")) && self.peek_at(1) == &Tok::Dot {
                    let d = if self.is_kw("in") { Dir::In } else { Dir::Out };
                    self.bump();
                    self.bump();
                    Some(d)
                } else {
                    None
                };
                let (name, _) = self.ident("a variable name")?;
                self.expect(Tok::RParen)?;
                Some(TopicRef { dir, name })
            } else {
                None
            };
            out.push(TopicBinding { message_type, topic_name, binding });
            spans.push(sp);
            if self.eat(&Tok::RParen) {
                return Ok((out, spans));
            }
            self.expect(Tok::Comma)?;
        }
    }

    pub fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.implication()?;
        while self.eat(&Tok::DoubleArrow) {
            let rhs = self.implication()?;
            lhs = Formula::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while self.eat_kw("or") {
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while self.eat_kw("and") {
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat_kw("not") {
            return Ok(Formula::not(self.unary()?));
        }
        let q = if self.is_kw("forall") {
            Some(Quantifier::Forall)
        } else if self.is_kw("exists") {
            Some(Quantifier::Exists)
        } else if self.peek() == &Tok::ExistsBang {
            Some(Quantifier::ExistsUnique)
        } else {
            None
        };
        if let Some(q) = q {
            self.bump();
            return self.quantified(q);
        }
        self.atom()
    }

    fn quantified(&mut self, q: Quantifier) -> PResult<Formula> {
        let parens = self.eat(&Tok::LParen);
        let mut vars = Vec::new();
        loop {
            let mut names = vec![self.ident("a bound variable")?.0];
            while self.eat(&Tok::Comma) {
                names.push(self.ident("a bound variable")?.0);
            }
            self.expect_kw("in")?;
            let ty = self.base_type()?;
            vars.extend(names.into_iter().map(|n| TypedVar::new(n, ty.clone())));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Pipe)?;
        let body = self.formula()?;
        if parens {
            self.expect(Tok::RParen)?;
        }
        Ok(Formula::Quant(q, vars, Box::new(body)))
    }

    fn atom(&mut self) -> PResult<Formula> {
        if self.eat(&Tok::LParen) {
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::EqEq | Tok::Eq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            Tok::Lt => Some(CmpOp::Lt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Gt => Some(CmpOp::Gt),
            Tok::Ge => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let rhs = self.term()?;
            return Ok(Formula::Compare(lhs, op, rhs));
        }
        let negated = match self.peek() {
            Tok::NotIn => Some(true),
            Tok::Ident(s) if s == "in" && self.peek_at(1) == &Tok::LBrace => Some(false),
            _ => None,
        };
        if let Some(negated) = negated {
            self.bump();
            self.expect(Tok::LBrace)?;
            let mut set = Vec::new();
            if !self.eat(&Tok::RBrace) {
                loop {
                    set.push(self.ident("a set member")?.0);
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            return Ok(Formula::Member { term: lhs, set, negated });
        }
        Ok(match lhs {
            Term::Bool(b) => Formula::Bool(b),
            t => Formula::Pred(t),
        })
    }

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.primary()?;
        while self.eat(&Tok::Plus) {
            let sp = self.span();
            match self.bump().tok {
                Tok::Num(n) if !n.contains('.') => {
                    let k = n
                        .parse::<u64>()
                        .map_err(|_| Diagnostic::error("P001", sp, "natural literal out of range"))?;
                    t = Term::Add(Box::new(t), k);
                }
                other => {
                    return Err(Diagnostic::error(
                        "P001",
                        sp,
                        format!("expected a natural literal after `+`, found {}", other.describe()),
                    ))
                }
            }
        }
        Ok(t)
    }

    fn args(&mut self) -> PResult<Option<Vec<Term>>> {
        if !self.eat(&Tok::LParen) {
            return Ok(None);
        }
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(Some(args));
        }
        loop {
            args.push(self.term()?);
            if self.eat(&Tok::RParen) {
                return Ok(Some(args));
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn io_tail(&mut self, node: Option<String>) -> PResult<Term> {
        let dir = if self.eat_kw("in") {
            Dir::In
        } else if self.eat_kw("out") {
            Dir::Out
        } else {
            return Err(self.unexpected("`in` or `out`"));
        };
        self.expect(Tok::Dot)?;
        let (name, _) = self.ident("a variable name")?;
        let r = IoRef { node, dir, name };
        Ok(match self.args()? {
            Some(args) => Term::Apply(r, args),
            None => Term::Io(r),
        })
    }

    fn primary(&mut self) -> PResult<Term> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                parse_number(&n).map(Term::Num).ok_or_else(|| Diagnostic::error("P001", sp, "numeric literal out of range"))
            }
            Tok::Ident(s) if s == "TRUE" || s == "FALSE" => {
                self.bump();
                Ok(Term::Bool(s == "TRUE"))
            }
            Tok::Ident(s) if (s == "in" || s == "out") && self.peek_at(1) == &Tok::Dot => self.io_tail(None),
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                if self.peek() == &Tok::Dot {
                    self.bump();
                    return self.io_tail(Some(s));
                }
                Ok(match self.args()? {
                    Some(args) if !args.is_empty() => Term::Ctor(s, args),
                    Some(_) => return Err(Diagnostic::error("P001", sp, "constructor application needs arguments")),
                    None => Term::Name(s),
                })
            }
            Tok::Ident(s) => Err(Diagnostic::error("P004", sp, format!("unexpected keyword `{s}` in term position"))),
            _ => Err(self.unexpected("a formula or term")),
        }
    }
}

fn parse_number(text: &str) -> Option<Number> {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let mut num: i64 = int.parse().ok()?;
    let mut den: i64 = 1;
    for d in frac.chars() {
        num = num.checked_mul(10)?.checked_add(d.to_digit(10)? as i64)?;
        den = den.checked_mul(10)?;
    }
    let n = Number::new(num, den);
    debug_assert!(!n.denom().is_zero());
    Some(n)
}
