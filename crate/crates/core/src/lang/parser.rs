//! Recursive-descent parser for expressions, programs and engine commands.

use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {message}", line = span.line, col = span.col)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

type PResult<T> = Result<T, ParseError>;

pub const KEYWORDS: &[&str] = &[
    "abort", "skip", "assert", "if", "then", "else", "end", "while", "do", "proc", "repeat",
    "until", "begin", "local", "Def", "Prog", "Extract", "Refine", "Step", "Seq", "If", "While",
    "Inv", "Pcho", "Wpc", "Spc", "Repeat", "WeakenPre", "StrengthenPost", "Choose", "End",
    "Pause", "Show", "Eval", "Test", "IQOPT",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Tokens that may legally follow a statement.
fn ends_statement(t: Option<&Tok>) -> bool {
    match t {
        None => true,
        Some(Tok::Semi | Tok::RParen | Tok::LBrack | Tok::RBrack | Tok::Dot) => true,
        Some(Tok::Ident(s)) => matches!(s.as_str(), "end" | "else" | "until"),
        _ => false,
    }
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof_span: Span,
}

impl Parser {
    pub fn new(src: &str) -> Self {
        let toks = tokenize(src);
        let eof_span = Span {
            start: src.len(),
            end: src.len(),
            line: src.lines().count().max(1),
            col: src.lines().last().map_or(1, |l| l.chars().count() + 1),
        };
        Parser {
            toks,
            pos: 0,
            eof_span,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map_or(self.eof_span, |t| t.span)
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            return self.span();
        }
        self.toks[self.pos - 1].span
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let message = message.into();
        let message = match self.peek() {
            Some(Tok::Error(e)) => e.clone(),
            Some(t) => format!("{message}, found {}", t.describe()),
            None => format!("{message}, found end of input"),
        };
        Err(ParseError {
            message,
            span: self.span(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(format!("expected `{kw}`"))
        }
    }

    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(format!("expected {what}")),
        }
    }

    /// `[q1 .. qn]`, possibly empty.
    fn register(&mut self) -> PResult<Vec<String>> {
        self.expect(&Tok::LBrack, "`[`")?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrack) {
            let q = self.name("qubit name or `]`")?;
            if out.contains(&q) {
                return Err(ParseError {
                    message: format!("duplicate qubit `{q}` in register"),
                    span: self.prev_span(),
                });
            }
            out.push(q);
        }
        Ok(out)
    }

    fn register_follows(&self) -> bool {
        self.peek() == Some(&Tok::LBrack)
            && match self.peek_at(1) {
                Some(Tok::RBrack) => true,
                Some(Tok::Ident(s)) => !is_keyword(s),
                _ => false,
            }
    }

    /// Whether the `[` at the cursor opens a `[p ⊕]` choice marker rather than a ray.
    fn choice_marker_follows(&self) -> bool {
        let mut depth = 0usize;
        let mut k = 0;
        while let Some(t) = self.peek_at(k) {
            match t {
                Tok::LBrack | Tok::LParen => depth += 1,
                Tok::RBrack | Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return false;
                    }
                }
                Tok::Oplus if depth == 1 => return true,
                Tok::Dot => return false,
                _ => {}
            }
            k += 1;
        }
        false
    }

    // ---------------------------------------------------------------- expressions

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.join_level()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Implies) => BinOp::Implies,
                Some(Tok::Conjunct) => BinOp::Conjunct,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.join_level()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn join_level(&mut self) -> PResult<Expr> {
        let mut lhs = self.meet_level()?;
        while self.eat(&Tok::Join) {
            let rhs = self.meet_level()?;
            lhs = Expr::bin(BinOp::Join, lhs, rhs);
        }
        Ok(lhs)
    }

    fn meet_level(&mut self) -> PResult<Expr> {
        let mut lhs = self.add_level()?;
        while self.eat(&Tok::Meet) {
            let rhs = self.add_level()?;
            lhs = Expr::bin(BinOp::Meet, lhs, rhs);
        }
        Ok(lhs)
    }

    fn add_level(&mut self) -> PResult<Expr> {
        let mut lhs = self.tensor_level()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.tensor_level()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn tensor_level(&mut self) -> PResult<Expr> {
        let mut lhs = self.product_level()?;
        while self.eat(&Tok::Tensor) {
            let rhs = self.product_level()?;
            lhs = Expr::bin(BinOp::Tensor, lhs, rhs);
        }
        Ok(lhs)
    }

    fn starts_primary(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(s)) => !is_keyword(s) || s == "IQOPT",
            Some(Tok::Ket(_) | Tok::LParen | Tok::Number(_) | Tok::Imag(_)) => true,
            Some(Tok::LBrack) => !self.register_follows() && !self.choice_marker_follows(),
            _ => false,
        }
    }

    fn product_level(&mut self) -> PResult<Expr> {
        let (mut lhs, mut juxt) = self.unary_level()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                // Juxtaposition `c o` after a literal or parenthesised scalar.
                _ if juxt && self.starts_primary() => {
                    let (rhs, j) = self.unary_level()?;
                    lhs = Expr::bin(BinOp::Mul, lhs, rhs);
                    juxt = j;
                    continue;
                }
                _ => return Ok(lhs),
            };
            self.bump();
            let (rhs, j) = self.unary_level()?;
            lhs = Expr::bin(op, lhs, rhs);
            juxt = j;
        }
    }

    /// Returns the parsed operand and whether it may act as a juxtaposed scalar.
    fn unary_level(&mut self) -> PResult<(Expr, bool)> {
        if self.eat(&Tok::Minus) {
            let (e, j) = self.unary_level()?;
            return Ok((Expr::un(UnOp::Neg, e), j));
        }
        self.postfix_level()
    }

    fn postfix_level(&mut self) -> PResult<(Expr, bool)> {
        let (mut e, mut juxt) = self.primary()?;
        loop {
            match self.peek() {
                Some(Tok::Dagger) => {
                    self.bump();
                    e = Expr::un(UnOp::Dagger, e);
                }
                Some(Tok::Perp) => {
                    self.bump();
                    e = Expr::un(UnOp::Perp, e);
                }
                Some(Tok::LBrack) if self.register_follows() => {
                    let r = self.register()?;
                    e = Expr::Apply(Box::new(e), r);
                }
                _ => return Ok((e, juxt)),
            }
            juxt = false;
        }
    }

    fn primary(&mut self) -> PResult<(Expr, bool)> {
        match self.peek().cloned() {
            Some(Tok::Number(x)) => {
                self.bump();
                Ok((Expr::Number(x), true))
            }
            Some(Tok::Imag(x)) => {
                self.bump();
                Ok((Expr::Imag(x), true))
            }
            Some(Tok::Ket(b)) => {
                self.bump();
                Ok((Expr::Ket(b), false))
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok((e, true))
            }
            Some(Tok::LBrack) => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RBrack, "`]`")?;
                Ok((Expr::Ray(Box::new(e)), false))
            }
            Some(Tok::Ident(s)) if s == "IQOPT" => {
                self.bump();
                let n = self.name("definition name after IQOPT")?;
                Ok((Expr::Iqopt(n), false))
            }
            Some(Tok::Ident(s)) if !is_keyword(&s) => {
                self.bump();
                if self.eat(&Tok::LParen) {
                    let mut args = vec![self.expr()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.expr()?);
                    }
                    self.expect(&Tok::RParen, "`)`")?;
                    return Ok((Expr::Call(s, args), false));
                }
                Ok((Expr::Ident(s), false))
            }
            _ => self.error("expected an expression"),
        }
    }

    // ---------------------------------------------------------------- statements

    pub fn stmt(&mut self) -> PResult<Stmt> {
        let first = self.stmt_atom()?;
        if self.eat(&Tok::Semi) {
            let rest = self.stmt()?;
            return Ok(Stmt::seq(first, rest));
        }
        Ok(first)
    }

    fn prescription(&mut self) -> PResult<(Expr, Expr)> {
        self.expect(&Tok::Lt, "`<`")?;
        let p = self.expr()?;
        self.expect(&Tok::Comma, "`,`")?;
        let q = self.expr()?;
        self.expect(&Tok::Gt, "`>`")?;
        Ok((p, q))
    }

    fn stmt_atom(&mut self) -> PResult<Stmt> {
        if self.eat_kw("abort") {
            return Ok(Stmt::Abort);
        }
        if self.eat_kw("skip") {
            return Ok(Stmt::Skip);
        }
        if self.eat_kw("assert") {
            return Ok(Stmt::Assert(self.expr()?));
        }
        if self.eat_kw("proc") {
            return Ok(Stmt::Proc(self.name("program name")?));
        }
        if self.eat_kw("if") {
            let g = self.expr()?;
            self.expect_kw("then")?;
            let a = self.stmt()?;
            self.expect_kw("else")?;
            let b = self.stmt()?;
            self.expect_kw("end")?;
            return Ok(Stmt::If(g, Box::new(a), Box::new(b)));
        }
        if self.eat_kw("while") {
            let g = self.expr()?;
            self.expect_kw("do")?;
            let body = self.stmt()?;
            self.expect_kw("end")?;
            return Ok(Stmt::While(g, Box::new(body)));
        }
        if self.eat_kw("repeat") {
            let body = self.stmt()?;
            self.expect_kw("until")?;
            let g = self.expr()?;
            return Ok(Stmt::RepeatUntil(Box::new(body), g));
        }
        if self.eat_kw("begin") {
            self.expect_kw("local")?;
            let locals = if self.peek() == Some(&Tok::LBrack) {
                self.register()?
            } else {
                let mut v = vec![self.name("local qubit name")?];
                while !matches!(self.peek(), Some(Tok::Colon) | None) {
                    v.push(self.name("local qubit name or `:`")?);
                }
                v
            };
            self.expect(&Tok::Colon, "`:`")?;
            let body = self.stmt()?;
            self.expect_kw("end")?;
            return Ok(Stmt::Block(locals, Box::new(body)));
        }
        if self.register_follows() {
            let r = self.register()?;
            self.expect(&Tok::Assign, "`:=`")?;
            match self.peek() {
                Some(Tok::Number(z)) if *z == 0.0 => {
                    self.bump();
                }
                _ => return self.error("expected `0` after `:=`"),
            }
            return Ok(Stmt::Init(r));
        }
        if self.peek() == Some(&Tok::Lt) {
            let (p, q) = self.prescription()?;
            if self.eat(&Tok::Leq) {
                let body = self.stmt()?;
                return Ok(Stmt::Refined(p, q, Box::new(body)));
            }
            return Ok(Stmt::Prescription(p, q));
        }
        if self.peek() == Some(&Tok::LParen) {
            // An operator expression in parentheses is a unitary statement; otherwise a group.
            let save = self.pos;
            if let Ok(e) = self.expr() {
                if ends_statement(self.peek()) {
                    return Ok(Stmt::Unitary(e));
                }
            }
            self.pos = save;
            self.bump();
            let a = self.stmt()?;
            if self.eat(&Tok::LBrack) {
                let p = self.expr()?;
                self.expect(&Tok::Oplus, "`⊕`")?;
                self.expect(&Tok::RBrack, "`]`")?;
                let b = self.stmt()?;
                self.expect(&Tok::RParen, "`)`")?;
                return Ok(Stmt::PChoice(Box::new(a), p, Box::new(b)));
            }
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(a);
        }
        if self.starts_primary() {
            return Ok(Stmt::Unitary(self.expr()?));
        }
        self.error("expected a statement")
    }

    // ---------------------------------------------------------------- commands

    fn def(&mut self) -> PResult<Command> {
        let name = self.name("definition name")?;
        self.expect(&Tok::Assign, "`:=`")?;
        if self.eat_kw("Prog") {
            return Ok(Command::DefProg(name, self.stmt()?));
        }
        if self.eat_kw("Extract") {
            return Ok(Command::DefExtract(name, self.name("proof name")?));
        }
        if self.peek() == Some(&Tok::LBrack) && self.peek_at(1) == Some(&Tok::LBrack) {
            self.bump();
            self.bump();
            let s = self.stmt()?;
            self.expect(&Tok::RBrack, "`]]`")?;
            self.expect(&Tok::RBrack, "`]]`")?;
            self.expect(&Tok::LParen, "`(`")?;
            let input = self.expr()?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(Command::DefSim(name, s, input));
        }
        Ok(Command::DefExpr(name, self.expr()?))
    }

    fn step(&mut self) -> PResult<Command> {
        if self.eat_kw("Seq") {
            return Ok(Command::StepSeq(self.expr()?));
        }
        if self.eat_kw("If") {
            return Ok(Command::StepIf(self.expr()?));
        }
        if self.eat_kw("While") {
            let g = self.expr()?;
            self.expect_kw("Inv")?;
            return Ok(Command::StepWhile(g, self.expr()?));
        }
        if self.eat_kw("Repeat") {
            return Ok(Command::StepRepeat(self.expr()?));
        }
        if self.eat_kw("Pcho") {
            let prob = self.expr()?;
            let mode = if self.eat_kw("Wpc") {
                SplitMode::Wpc
            } else if self.eat_kw("Spc") {
                SplitMode::Spc
            } else {
                return self.error("expected `Wpc` or `Spc`");
            };
            let left = self.expr()?;
            self.expect(&Tok::Comma, "`,`")?;
            let right = self.expr()?;
            return Ok(Command::StepPChoice {
                prob,
                mode,
                left,
                right,
            });
        }
        Ok(Command::Step(self.stmt()?))
    }

    fn command_body(&mut self) -> PResult<Command> {
        let kw = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return self.error("expected a command"),
        };
        self.bump();
        let cmd = match kw.as_str() {
            "Def" => self.def()?,
            "Refine" => {
                let n = self.name("proof name")?;
                self.expect(&Tok::Colon, "`:`")?;
                let (p, q) = self.prescription()?;
                Command::Refine(n, p, q)
            }
            "Step" => self.step()?,
            "WeakenPre" => Command::WeakenPre(self.expr()?),
            "StrengthenPost" => Command::StrengthenPost(self.expr()?),
            "Choose" => match self.peek() {
                Some(&Tok::Number(n)) if n >= 1.0 && n.fract() == 0.0 => {
                    self.bump();
                    Command::Choose(n as usize)
                }
                _ => return self.error("expected a goal number"),
            },
            "End" => Command::End,
            "Pause" => Command::Pause,
            "Show" => {
                if self.eat_kw("Def") {
                    Command::ShowDef
                } else {
                    Command::Show(self.name("name")?)
                }
            }
            "Eval" => Command::Eval(self.expr()?),
            "Test" => {
                let a = self.expr()?;
                let rel = if self.eat(&Tok::Eq) {
                    TestRel::Eq
                } else if self.eat(&Tok::Leq) {
                    TestRel::Leq
                } else {
                    return self.error("expected `=` or `<=`");
                };
                Command::Test(a, rel, self.expr()?)
            }
            _ => {
                self.pos -= 1;
                return self.error("unknown command");
            }
        };
        Ok(cmd)
    }

    fn command(&mut self) -> PResult<Spanned<Command>> {
        let start = self.span();
        let node = self.command_body()?;
        self.expect(&Tok::Dot, "`.` ending the command")?;
        Ok(Spanned {
            node,
            span: start.to(self.prev_span()),
        })
    }

    /// Skips past the next `.` that closes all brackets or is followed by a command keyword.
    fn recover(&mut self) {
        const STARTERS: &[&str] = &[
            "Def", "Refine", "Step", "WeakenPre", "StrengthenPost", "Choose", "End", "Pause",
            "Show", "Eval", "Test",
        ];
        let mut depth = 0i32;
        while let Some(t) = self.bump() {
            match t {
                Tok::LParen | Tok::LBrack => depth += 1,
                Tok::RParen | Tok::RBrack => depth -= 1,
                Tok::Dot => {
                    let next_cmd =
                        matches!(self.peek(), Some(Tok::Ident(s)) if STARTERS.contains(&s.as_str()));
                    if depth <= 0 || next_cmd || self.at_end() {
                        return;
                    }
                }
                _ => {}
            }
        }
    }
}

fn whole<T>(src: &str, f: impl FnOnce(&mut Parser) -> PResult<T>) -> PResult<T> {
    let mut p = Parser::new(src);
    let v = f(&mut p)?;
    if !p.at_end() {
        return p.error("unexpected trailing input");
    }
    Ok(v)
}

pub fn parse_expr(src: &str) -> PResult<Expr> {
    whole(src, |p| p.expr())
}

pub fn parse_stmt(src: &str) -> PResult<Stmt> {
    whole(src, |p| p.stmt())
}

pub fn parse_command(src: &str) -> PResult<Spanned<Command>> {
    whole(src, |p| p.command())
}

/// One item per command in the script: parsed commands or their errors, in order.
pub fn parse_script(src: &str) -> Vec<Result<Spanned<Command>, ParseError>> {
    let mut p = Parser::new(src);
    let mut out = Vec::new();
    while !p.at_end() {
        let save = p.pos;
        match p.command() {
            Ok(c) => out.push(Ok(c)),
            Err(e) => {
                out.push(Err(e));
                p.pos = save;
                p.recover();
            }
        }
    }
    out
}
