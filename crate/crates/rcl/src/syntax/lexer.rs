use crate::diag::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    Pipe,
    Slash,
    Plus,
    Arrow,
    LongArrow,
    DoubleArrow,
    EqEq,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    NotIn,
    ExistsBang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Num(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Pipe => "|",
            Tok::Slash => "/",
            Tok::Plus => "+",
            Tok::Arrow => "->",
            Tok::LongArrow => "-->",
            Tok::DoubleArrow => "<->",
            Tok::EqEq => "==",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::NotIn => "!in",
            Tok::ExistsBang => "exists!",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub const KEYWORDS: &[&str] = &[
    "context", "node", "inputs", "outputs", "topics", "matches", "assume", "guarantee", "forall", "exists",
    "in", "out", "and", "or", "not", "TRUE", "FALSE", "REAL", "NATURAL", "BOOL",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let at = |n: usize| chars.get(i + n).copied();
        let tok = if ident_start(c) {
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            while i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word == "exists" && chars.get(i) == Some(&'!') && !matches!(chars.get(i + 1), Some('=') | Some('i')) {
                i += 1;
                Tok::ExistsBang
            } else {
                Tok::Ident(word)
            }
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            Tok::Num(chars[start..i].iter().collect())
        } else {
            let (tok, width) = match (c, at(1), at(2)) {
                ('-', Some('-'), Some('>')) => (Tok::LongArrow, 3),
                ('-', Some('>'), _) => (Tok::Arrow, 2),
                ('<', Some('-'), Some('>')) => (Tok::DoubleArrow, 3),
                ('<', Some('='), _) => (Tok::Le, 2),
                ('<', _, _) => (Tok::Lt, 1),
                ('>', Some('='), _) => (Tok::Ge, 2),
                ('>', _, _) => (Tok::Gt, 1),
                ('=', Some('='), _) => (Tok::EqEq, 2),
                ('=', _, _) => (Tok::Eq, 1),
                ('!', Some('='), _) => (Tok::Ne, 2),
                ('!', Some('i'), Some('n')) if !at(3).is_some_and(ident_char) => (Tok::NotIn, 3),
                ('(', _, _) => (Tok::LParen, 1),
                (')', _, _) => (Tok::RParen, 1),
                ('{', _, _) => (Tok::LBrace, 1),
                ('}', _, _) => (Tok::RBrace, 1),
                (',', _, _) => (Tok::Comma, 1),
                (';', _, _) => (Tok::Semi, 1),
                (':', _, _) => (Tok::Colon, 1),
                ('.', _, _) => (Tok::Dot, 1),
                ('|', _, _) => (Tok::Pipe, 1),
                ('/', _, _) => (Tok::Slash, 1),
                ('+', _, _) => (Tok::Plus, 1),
                _ => {
                    return Err(Diagnostic::error(
                        "P006",
                        Span::new(line, col, 1),
                        format!("unexpected character `{}`", c.escape_default()),
                    ))
                }
            };
            i += width;
            tok
        };
        let len = (i - start) as u32;
        out.push(Token { tok, span: Span::new(line, col, len) });
        col += len;
    }
    out.push(Token { tok: Tok::Eof, span: Span::new(line, col, 0) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn primes_belong_to_identifiers() {
        assert_eq!(toks("x''"), vec![Tok::Ident("x''".into()), Tok::Eof]);
    }

    #[test]
    fn arrows_and_membership() {
        assert_eq!(
            toks("--> -> <-> !in !="),
            vec![Tok::LongArrow, Tok::Arrow, Tok::DoubleArrow, Tok::NotIn, Tok::Ne, Tok::Eof]
        );
    }

    #[test]
    fn unique_existential_is_one_token() {
        assert_eq!(toks("exists!(")[0], Tok::ExistsBang);
        assert_eq!(toks("exists !in")[0], Tok::Ident("exists".into()));
    }

    #[test]
    fn comments_are_skipped_and_lines_counted() {
        let t = lex("// note\n  a").unwrap();
        assert_eq!(t[0].span, Span::new(2, 3, 1));
    }

    #[test]
    fn stray_character_is_reported() {
        let d = lex("a $ b").unwrap_err();
        assert_eq!(d.span, Span::new(1, 3, 1));
    }
}
