// SPDX-License-Identifier: Apache-2.0

use crate::bits::{mask, MAX_WIDTH};

use super::diag::{Diagnostic, DiagnosticKind};
use super::source::SourceUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Keyword {
    Design,
    End,
    In,
    Out,
    Reg,
    Wire,
    Assign,
    Always,
    If,
    Else,
    Case,
    Default,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Self> {
        Some(match s {
            "design" => Self::Design,
            "end" => Self::End,
            "in" => Self::In,
            "out" => Self::Out,
            "reg" => Self::Reg,
            "wire" => Self::Wire,
            "assign" => Self::Assign,
            "always" => Self::Always,
            "if" => Self::If,
            "else" => Self::Else,
            "case" => Self::Case,
            "default" => Self::Default,
            _ => return None,
        })
    }
}

/// A numeric literal. `width` is `None` for plain decimal numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Literal {
    pub width: Option<u32>,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(Literal),
    Kw(Keyword),
    Semi,
    Colon,
    Comma,
    Eq,
    LessEq,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Question,
    Amp,
    Pipe,
    Caret,
    Tilde,
    EqEq,
    NotEq,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(_) => "number".to_string(),
            Tok::Kw(k) => format!("keyword `{}`", format!("{k:?}").to_lowercase()),
            Tok::Eof => "end of file".to_string(),
            other => format!("`{}`", other.punct()),
        }
    }

    fn punct(&self) -> &'static str {
        match self {
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Eq => "=",
            Tok::LessEq => "<=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Question => "?",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Caret => "^",
            Tok::Tilde => "~",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub lo: usize,
    pub hi: usize,
}

pub(crate) fn lex(src: &SourceUnit) -> Result<Vec<Token>, Diagnostic> {
    let bytes = src.text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |lo: usize, hi: usize, msg: String| {
        Diagnostic::new(DiagnosticKind::Lexical, src.span(lo, hi), msg)
    };

    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let start = i;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(err(start, bytes.len(), "unterminated block comment".into()));
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }

        let lo = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src.text[lo..i];
            let tok = match Keyword::from_ident(word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word.to_string()),
            };
            out.push(Token { tok, lo, hi: i });
            continue;
        }
        if c.is_ascii_digit() {
            let lit = lex_number(src, &mut i).map_err(|m| err(lo, i.max(lo + 1), m))?;
            out.push(Token {
                tok: Tok::Number(lit),
                lo,
                hi: i,
            });
            continue;
        }

        let two = bytes.get(i + 1).copied();
        let (tok, len) = match (c, two) {
            (b'<', Some(b'=')) => (Tok::LessEq, 2),
            (b'=', Some(b'=')) => (Tok::EqEq, 2),
            (b'!', Some(b'=')) => (Tok::NotEq, 2),
            (b';', _) => (Tok::Semi, 1),
            (b':', _) => (Tok::Colon, 1),
            (b',', _) => (Tok::Comma, 1),
            (b'=', _) => (Tok::Eq, 1),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b'{', _) => (Tok::LBrace, 1),
            (b'}', _) => (Tok::RBrace, 1),
            (b'[', _) => (Tok::LBracket, 1),
            (b']', _) => (Tok::RBracket, 1),
            (b'?', _) => (Tok::Question, 1),
            (b'&', _) => (Tok::Amp, 1),
            (b'|', _) => (Tok::Pipe, 1),
            (b'^', _) => (Tok::Caret, 1),
            (b'~', _) => (Tok::Tilde, 1),
            _ => {
                let ch = src.text[i..].chars().next().unwrap_or('?');
                return Err(err(
                    i,
                    i + ch.len_utf8(),
                    format!("unexpected character {ch:?}"),
                ));
            }
        };
        i += len;
        out.push(Token { tok, lo, hi: i });
    }
    out.push(Token {
        tok: Tok::Eof,
        lo: bytes.len(),
        hi: bytes.len(),
    });
    Ok(out)
}

/// Plain decimal (`12`) or sized (`4'b1010`, `8'hff`, `3'd5`).
fn lex_number(src: &SourceUnit, i: &mut usize) -> Result<Literal, String> {
    let bytes = src.text.as_bytes();
    let start = *i;
    while *i < bytes.len() && (bytes[*i].is_ascii_digit() || bytes[*i] == b'_') {
        *i += 1;
    }
    let leading = parse_digits(&src.text[start..*i], 10)?;
    if bytes.get(*i) != Some(&b'\'') {
        return Ok(Literal {
            width: None,
            value: leading,
        });
    }
    *i += 1;
    let width = u32::try_from(leading)
        .ok()
        .filter(|w| (1..=MAX_WIDTH).contains(w))
        .ok_or_else(|| format!("literal width {leading} outside 1..={MAX_WIDTH}"))?;
    let radix = match bytes.get(*i) {
        Some(b'b') | Some(b'B') => 2,
        Some(b'h') | Some(b'H') => 16,
        Some(b'd') | Some(b'D') => 10,
        _ => return Err("expected base `b`, `h` or `d` after `'`".into()),
    };
    *i += 1;
    let digits_start = *i;
    while *i < bytes.len() && (bytes[*i].is_ascii_alphanumeric() || bytes[*i] == b'_') {
        *i += 1;
    }
    let value = parse_digits(&src.text[digits_start..*i], radix)?;
    if value & !mask(width) != 0 {
        return Err(format!("value {value} does not fit in {width} bits"));
    }
    Ok(Literal {
        width: Some(width),
        value,
    })
}

fn parse_digits(text: &str, radix: u32) -> Result<u64, String> {
    let cleaned: String = text.chars().filter(|c| *c != '_').collect();
    if cleaned.is_empty() {
        return Err("missing digits in literal".into());
    }
    u64::from_str_radix(&cleaned, radix)
        .map_err(|_| format!("invalid base-{radix} literal `{text}`"))
}
