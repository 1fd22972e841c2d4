// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser from tokens to an unresolved syntax tree.

use super::diag::{Diagnostic, DiagnosticKind};
use super::lexer::{Keyword, Literal, Tok, Token};
use super::source::SourceUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Range {
    pub lo: usize,
    pub hi: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Module {
    pub name: String,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DeclClass {
    In,
    Out,
    Reg,
    Wire,
}

#[derive(Debug, Clone)]
pub(crate) enum Item {
    Decl(Decl),
    Assign(AssignStmt),
    Always(Vec<AStmt>),
}

#[derive(Debug, Clone)]
pub(crate) struct Decl {
    pub class: DeclClass,
    pub name: String,
    pub name_at: Range,
    pub width: u32,
    pub reset: Option<(Literal, Range)>,
    /// `wire x = e;` / `out y = e;` sugar for a declaration plus `assign`.
    pub driver: Option<AssignStmt>,
}

#[derive(Debug, Clone)]
pub(crate) struct AssignStmt {
    pub target: String,
    pub target_at: Range,
    pub expr: AExpr,
    pub at: Range,
}

#[derive(Debug, Clone)]
pub(crate) enum AStmt {
    NonBlocking(AssignStmt),
    If {
        cond: AExpr,
        head: Range,
        then_arm: Vec<AStmt>,
        else_arm: Option<Vec<AStmt>>,
    },
    Case {
        subject: AExpr,
        head: Range,
        arms: Vec<CaseArmAst>,
        default: Option<Vec<AStmt>>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct CaseArmAst {
    pub labels: Vec<(Literal, Range)>,
    pub body: Vec<AStmt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BinOp {
    And,
    Or,
    Xor,
    Eq,
    Ne,
}

#[derive(Debug, Clone)]
pub(crate) struct AExpr {
    pub kind: AExprKind,
    pub at: Range,
}

#[derive(Debug, Clone)]
pub(crate) enum AExprKind {
    Ident(String),
    Lit(Literal),
    Not(Box<AExpr>),
    Binary(BinOp, Box<AExpr>, Box<AExpr>),
    Concat(Vec<AExpr>),
    Index(Box<AExpr>, u64),
    Slice(Box<AExpr>, u64, u64),
    Ternary(Box<AExpr>, Box<AExpr>, Box<AExpr>),
}

pub(crate) struct Parser<'a> {
    src: &'a SourceUnit,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> Parser<'a> {
    pub fn new(src: &'a SourceUnit, toks: Vec<Token>) -> Self {
        Self { src, toks, pos: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> usize {
        self.toks[self.pos].lo
    }

    fn last_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].hi
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, what: &str) -> Diagnostic {
        let t = &self.toks[self.pos];
        Diagnostic::new(
            DiagnosticKind::Syntax,
            self.src.span(t.lo, t.hi),
            format!("expected {what}, found {}", t.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.error(what))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<(String, Range)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let t = self.bump();
                Ok((name, Range { lo: t.lo, hi: t.hi }))
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn number(&mut self) -> PResult<(Literal, Range)> {
        match *self.peek() {
            Tok::Number(lit) => {
                let t = self.bump();
                Ok((lit, Range { lo: t.lo, hi: t.hi }))
            }
            _ => Err(self.error("number")),
        }
    }

    fn plain_number(&mut self, what: &str) -> PResult<(u64, Range)> {
        match *self.peek() {
            Tok::Number(Literal { width: None, value }) => {
                let t = self.bump();
                Ok((value, Range { lo: t.lo, hi: t.hi }))
            }
            _ => Err(self.error(what)),
        }
    }

    pub fn module(&mut self) -> PResult<Module> {
        self.expect(Tok::Kw(Keyword::Design), "`design`")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::Semi, "`;`")?;
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Tok::Kw(Keyword::End) => {
                    self.bump();
                    break;
                }
                Tok::Kw(Keyword::In | Keyword::Out | Keyword::Reg | Keyword::Wire) => {
                    items.push(Item::Decl(self.decl()?))
                }
                Tok::Kw(Keyword::Assign) => {
                    self.bump();
                    let a = self.assignment(Tok::Eq, "`=`")?;
                    items.push(Item::Assign(a));
                }
                Tok::Kw(Keyword::Always) => {
                    self.bump();
                    self.expect(Tok::LBrace, "`{`")?;
                    let body = self.stmts_until_rbrace()?;
                    items.push(Item::Always(body));
                }
                _ => return Err(self.error("declaration, `assign`, `always` or `end`")),
            }
        }
        self.expect(Tok::Eof, "end of file after `end`")?;
        Ok(Module { name, items })
    }

    fn decl(&mut self) -> PResult<Decl> {
        let class = match self.bump().tok {
            Tok::Kw(Keyword::In) => DeclClass::In,
            Tok::Kw(Keyword::Out) => DeclClass::Out,
            Tok::Kw(Keyword::Reg) => DeclClass::Reg,
            _ => DeclClass::Wire,
        };
        let decl_lo = self.here();
        let (name, name_at) = self.ident()?;
        let width = if self.eat(&Tok::Colon) {
            let (w, at) = self.plain_number("width")?;
            if w == 0 || w > crate::bits::MAX_WIDTH as u64 {
                return Err(Diagnostic::new(
                    DiagnosticKind::WidthMismatch,
                    self.src.span(at.lo, at.hi),
                    format!(
                        "width {w} of `{name}` outside 1..={}",
                        crate::bits::MAX_WIDTH
                    ),
                ));
            }
            w as u32
        } else {
            1
        };
        let mut reset = None;
        let mut driver = None;
        if self.eat(&Tok::Eq) {
            match class {
                DeclClass::Reg => reset = Some(self.number()?),
                DeclClass::Wire | DeclClass::Out => {
                    let expr = self.expr()?;
                    driver = Some(AssignStmt {
                        target: name.clone(),
                        target_at: name_at,
                        expr,
                        at: Range {
                            lo: decl_lo,
                            hi: self.last_end(),
                        },
                    });
                }
                DeclClass::In => {
                    return Err(Diagnostic::new(
                        DiagnosticKind::Syntax,
                        self.src.span(name_at.lo, name_at.hi),
                        format!("input `{name}` cannot have an initializer"),
                    ))
                }
            }
        }
        self.expect(Tok::Semi, "`;`")?;
        if let Some(d) = driver.as_mut() {
            d.at.hi = self.last_end();
        }
        Ok(Decl {
            class,
            name,
            name_at,
            width,
            reset,
            driver,
        })
    }

    /// `target <op> expr ;`
    fn assignment(&mut self, op: Tok, what: &str) -> PResult<AssignStmt> {
        let lo = self.here();
        let (target, target_at) = self.ident()?;
        self.expect(op, what)?;
        let expr = self.expr()?;
        self.expect(Tok::Semi, "`;`")?;
        Ok(AssignStmt {
            target,
            target_at,
            expr,
            at: Range {
                lo,
                hi: self.last_end(),
            },
        })
    }

    fn stmts_until_rbrace(&mut self) -> PResult<Vec<AStmt>> {
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn block(&mut self) -> PResult<Vec<AStmt>> {
        if self.eat(&Tok::LBrace) {
            self.stmts_until_rbrace()
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> PResult<AStmt> {
        match self.peek() {
            Tok::Kw(Keyword::If) => {
                let lo = self.here();
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let head = Range {
                    lo,
                    hi: self.last_end(),
                };
                let then_arm = self.block()?;
                let else_arm = if self.eat(&Tok::Kw(Keyword::Else)) {
                    Some(self.block()?)
                } else {
                    None
                };
                Ok(AStmt::If {
                    cond,
                    head,
                    then_arm,
                    else_arm,
                })
            }
            Tok::Kw(Keyword::Case) => {
                let lo = self.here();
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let subject = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let head = Range {
                    lo,
                    hi: self.last_end(),
                };
                self.expect(Tok::LBrace, "`{`")?;
                let mut arms = Vec::new();
                let mut default = None;
                while !self.eat(&Tok::RBrace) {
                    if self.eat(&Tok::Kw(Keyword::Default)) {
                        if default.is_some() {
                            return Err(self.error("a single `default` arm"));
                        }
                        self.expect(Tok::Colon, "`:`")?;
                        default = Some(self.block()?);
                        continue;
                    }
                    let mut labels = vec![self.number()?];
                    while self.eat(&Tok::Comma) {
                        labels.push(self.number()?);
                    }
                    self.expect(Tok::Colon, "`:`")?;
                    let body = self.block()?;
                    arms.push(CaseArmAst { labels, body });
                }
                Ok(AStmt::Case {
                    subject,
                    head,
                    arms,
                    default,
                })
            }
            Tok::Ident(_) => Ok(AStmt::NonBlocking(self.assignment(Tok::LessEq, "`<=`")?)),
            _ => Err(self.error("statement")),
        }
    }

    pub fn expr(&mut self) -> PResult<AExpr> {
        let cond = self.binary(0)?;
        if self.eat(&Tok::Question) {
            let a = self.expr()?;
            self.expect(Tok::Colon, "`:`")?;
            let b = self.expr()?;
            let at = Range {
                lo: cond.at.lo,
                hi: b.at.hi,
            };
            return Ok(AExpr {
                kind: AExprKind::Ternary(Box::new(cond), Box::new(a), Box::new(b)),
                at,
            });
        }
        Ok(cond)
    }

    // Precedence, loosest first: `|`, `^`, `&`, `==`/`!=`.
    fn binary(&mut self, level: u8) -> PResult<AExpr> {
        if level == 4 {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = match (level, self.peek()) {
                (0, Tok::Pipe) => BinOp::Or,
                (1, Tok::Caret) => BinOp::Xor,
                (2, Tok::Amp) => BinOp::And,
                (3, Tok::EqEq) => BinOp::Eq,
                (3, Tok::NotEq) => BinOp::Ne,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.binary(level + 1)?;
            let at = Range {
                lo: lhs.at.lo,
                hi: rhs.at.hi,
            };
            lhs = AExpr {
                kind: AExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                at,
            };
        }
    }

    fn unary(&mut self) -> PResult<AExpr> {
        if *self.peek() == Tok::Tilde {
            let lo = self.bump().lo;
            let inner = self.unary()?;
            let at = Range {
                lo,
                hi: inner.at.hi,
            };
            return Ok(AExpr {
                kind: AExprKind::Not(Box::new(inner)),
                at,
            });
        }
        let mut e = self.primary()?;
        while *self.peek() == Tok::LBracket {
            self.bump();
            let (hi_idx, _) = self.plain_number("constant index")?;
            let kind = if self.eat(&Tok::Colon) {
                let (lo_idx, _) = self.plain_number("constant index")?;
                AExprKind::Slice(Box::new(e.clone()), hi_idx, lo_idx)
            } else {
                AExprKind::Index(Box::new(e.clone()), hi_idx)
            };
            self.expect(Tok::RBracket, "`]`")?;
            e = AExpr {
                kind,
                at: Range {
                    lo: e.at.lo,
                    hi: self.last_end(),
                },
            };
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<AExpr> {
        let lo = self.here();
        match self.peek().clone() {
            Tok::Ident(name) => {
                let t = self.bump();
                Ok(AExpr {
                    kind: AExprKind::Ident(name),
                    at: Range { lo: t.lo, hi: t.hi },
                })
            }
            Tok::Number(lit) => {
                let t = self.bump();
                Ok(AExpr {
                    kind: AExprKind::Lit(lit),
                    at: Range { lo: t.lo, hi: t.hi },
                })
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                e.at = Range {
                    lo,
                    hi: self.last_end(),
                };
                Ok(e)
            }
            Tok::LBrace => {
                self.bump();
                let mut parts = vec![self.expr()?];
                while self.eat(&Tok::Comma) {
                    parts.push(self.expr()?);
                }
                self.expect(Tok::RBrace, "`}`")?;
                Ok(AExpr {
                    kind: AExprKind::Concat(parts),
                    at: Range {
                        lo,
                        hi: self.last_end(),
                    },
                })
            }
            _ => Err(self.error("expression")),
        }
    }
}
