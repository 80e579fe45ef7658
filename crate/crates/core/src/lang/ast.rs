use serde::{Deserialize, Serialize};

/// Byte range in the source plus the 1-based line/column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end,
            line: self.line,
            col: self.col,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Tensor,
    Join,
    Meet,
    Implies,
    Conjunct,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Tensor => "⊗",
            BinOp::Join => "∨",
            BinOp::Meet => "∧",
            BinOp::Implies => "⇝",
            BinOp::Conjunct => "⋒",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Dagger,
    Perp,
}

/// Operator, predicate, ket and scalar expressions share one syntax tree; kinds are
/// resolved during evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Number(f64),
    Imag(f64),
    Ket(String),
    Ident(String),
    /// `IQOPT C`: reference to a labelled definition.
    Iqopt(String),
    Call(String, Vec<Expr>),
    /// `[v]`: the ray spanned by a ket expression.
    Ray(Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `o[q1 .. qn]`
    Apply(Box<Expr>, Vec<String>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn un(op: UnOp, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    pub fn conjunct(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Conjunct, a, b)
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Implies, a, b)
    }

    pub fn meet(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Meet, a, b)
    }

    pub fn join(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Join, a, b)
    }

    pub fn perp(a: Expr) -> Expr {
        Expr::un(UnOp::Perp, a)
    }

    pub fn is_atom(&self) -> bool {
        match self {
            Expr::Number(x) => *x >= 0.0,
            Expr::Imag(x) => *x >= 0.0,
            Expr::Ket(_) | Expr::Ident(_) | Expr::Iqopt(_) | Expr::Call(..) | Expr::Ray(_) => true,
            Expr::Apply(inner, _) => inner.is_atom(),
            Expr::Unary(..) | Expr::Binary(..) => false,
        }
    }
}

/// Program syntax. Sequential composition is right-nested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Stmt {
    Abort,
    Skip,
    Init(Vec<String>),
    Unitary(Expr),
    Assert(Expr),
    Prescription(Expr, Expr),
    Seq(Box<Stmt>, Box<Stmt>),
    /// `(s0 [p ⊕] s1)`
    PChoice(Box<Stmt>, Expr, Box<Stmt>),
    If(Expr, Box<Stmt>, Box<Stmt>),
    While(Expr, Box<Stmt>),
    RepeatUntil(Box<Stmt>, Expr),
    Block(Vec<String>, Box<Stmt>),
    Proc(String),
    /// `< pre, post > <= body`: a prescription together with a checked refinement of it.
    Refined(Expr, Expr, Box<Stmt>),
}

impl Stmt {
    pub fn seq(a: Stmt, b: Stmt) -> Stmt {
        Stmt::Seq(Box::new(a), Box::new(b))
    }

    /// Builds a right-nested sequence; empty input gives `skip`.
    pub fn seq_all(items: Vec<Stmt>) -> Stmt {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Stmt::Skip,
            Some(last) => it.fold(last, |acc, s| Stmt::seq(s, acc)),
        }
    }

    /// Prescriptions in left-to-right order, not descending into the specification part of
    /// `Refined` nodes.
    pub fn prescriptions(&self) -> Vec<(&Expr, &Expr)> {
        let mut out = Vec::new();
        self.collect_prescriptions(&mut out);
        out
    }

    fn collect_prescriptions<'a>(&'a self, out: &mut Vec<(&'a Expr, &'a Expr)>) {
        match self {
            Stmt::Prescription(p, q) => out.push((p, q)),
            Stmt::Seq(a, b) | Stmt::PChoice(a, _, b) | Stmt::If(_, a, b) => {
                a.collect_prescriptions(out);
                b.collect_prescriptions(out);
            }
            Stmt::While(_, s)
            | Stmt::RepeatUntil(s, _)
            | Stmt::Block(_, s)
            | Stmt::Refined(_, _, s) => s.collect_prescriptions(out),
            _ => {}
        }
    }

    /// Replaces the k-th prescription (same order as [`Stmt::prescriptions`]) by `fill(k)`.
    pub fn fill_prescriptions(&self, fill: &mut dyn FnMut(usize) -> Stmt) -> Stmt {
        let mut k = 0;
        self.fill_rec(fill, &mut k)
    }

    fn fill_rec(&self, fill: &mut dyn FnMut(usize) -> Stmt, k: &mut usize) -> Stmt {
        let b = |s: Stmt| Box::new(s);
        match self {
            Stmt::Prescription(..) => {
                let out = fill(*k);
                *k += 1;
                out
            }
            Stmt::Seq(x, y) => {
                let x = x.fill_rec(fill, k);
                Stmt::Seq(b(x), b(y.fill_rec(fill, k)))
            }
            Stmt::PChoice(x, p, y) => {
                let x = x.fill_rec(fill, k);
                Stmt::PChoice(b(x), p.clone(), b(y.fill_rec(fill, k)))
            }
            Stmt::If(g, x, y) => {
                let x = x.fill_rec(fill, k);
                Stmt::If(g.clone(), b(x), b(y.fill_rec(fill, k)))
            }
            Stmt::While(g, s) => Stmt::While(g.clone(), b(s.fill_rec(fill, k))),
            Stmt::RepeatUntil(s, g) => Stmt::RepeatUntil(b(s.fill_rec(fill, k)), g.clone()),
            Stmt::Block(l, s) => Stmt::Block(l.clone(), b(s.fill_rec(fill, k))),
            Stmt::Refined(p, q, s) => Stmt::Refined(p.clone(), q.clone(), b(s.fill_rec(fill, k))),
            other => other.clone(),
        }
    }

    /// Removes every `Refined` wrapper, keeping the bodies.
    pub fn strip_refined(&self) -> Stmt {
        let b = |s: &Stmt| Box::new(s.strip_refined());
        match self {
            Stmt::Refined(_, _, s) => s.strip_refined(),
            Stmt::Seq(x, y) => Stmt::Seq(b(x), b(y)),
            Stmt::PChoice(x, p, y) => Stmt::PChoice(b(x), p.clone(), b(y)),
            Stmt::If(g, x, y) => Stmt::If(g.clone(), b(x), b(y)),
            Stmt::While(g, s) => Stmt::While(g.clone(), b(s)),
            Stmt::RepeatUntil(s, g) => Stmt::RepeatUntil(b(s), g.clone()),
            Stmt::Block(l, s) => Stmt::Block(l.clone(), b(s)),
            other => other.clone(),
        }
    }

    pub fn is_executable(&self) -> bool {
        self.prescriptions().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestRel {
    Eq,
    Leq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMode {
    /// Both branches keep the postcondition; the precondition must be the meet.
    Wpc,
    /// Both branches keep the precondition; the postcondition must be the join.
    Spc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Command {
    DefExpr(String, Expr),
    DefSim(String, Stmt, Expr),
    DefProg(String, Stmt),
    DefExtract(String, String),
    Refine(String, Expr, Expr),
    Step(Stmt),
    StepSeq(Expr),
    StepIf(Expr),
    StepWhile(Expr, Expr),
    StepPChoice {
        prob: Expr,
        mode: SplitMode,
        left: Expr,
        right: Expr,
    },
    StepRepeat(Expr),
    WeakenPre(Expr),
    StrengthenPost(Expr),
    Choose(usize),
    End,
    Pause,
    ShowDef,
    Show(String),
    Eval(Expr),
    Test(Expr, TestRel, Expr),
}

impl Command {
    /// Commands that can change engine state when they succeed.
    pub fn is_mutating(&self) -> bool {
        !matches!(
            self,
            Command::Pause | Command::ShowDef | Command::Show(_) | Command::Eval(_) | Command::Test(..)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spanned<T> {
    pub node: T,
    pub span: Span,
}
