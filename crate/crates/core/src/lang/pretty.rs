//! Printing back to concrete syntax. Atoms print bare, every compound expression is wrapped
//! in parentheses, so output re-parses to the same tree.

use std::fmt::{self, Write};

use super::ast::*;

fn number(x: f64) -> String {
    format!("{x}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(x) if *x < 0.0 => write!(f, "(-{})", number(-x)),
            Expr::Number(x) => f.write_str(&number(*x)),
            Expr::Imag(x) if *x < 0.0 => write!(f, "(-{}i)", number(-x)),
            Expr::Imag(x) => write!(f, "{}i", number(*x)),
            Expr::Ket(b) => write!(f, "|{b}⟩"),
            Expr::Ident(s) => f.write_str(s),
            Expr::Iqopt(s) => write!(f, "IQOPT {s}"),
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Ray(inner) => match &**inner {
                Expr::Binary(op, a, b) => write!(f, "[{a} {} {b}]", op.symbol()),
                other => write!(f, "[{other}]"),
            },
            Expr::Unary(UnOp::Neg, a) => write!(f, "(-{a})"),
            Expr::Unary(UnOp::Dagger, a) => write!(f, "({a}†)"),
            Expr::Unary(UnOp::Perp, a) => write!(f, "({a}^⊥)"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Apply(inner, reg) => {
                match &**inner {
                    Expr::Iqopt(_) => write!(f, "({inner})")?,
                    _ => write!(f, "{inner}")?,
                }
                write!(f, "[{}]", reg.join(" "))
            }
        }
    }
}

fn reg(names: &[String]) -> String {
    format!("[{}]", names.join(" "))
}

struct Printer {
    out: String,
    multiline: bool,
    depth: usize,
}

impl Printer {
    fn newline(&mut self) {
        if self.multiline {
            self.out.push('\n');
            for _ in 0..self.depth {
                self.out.push_str("    ");
            }
        } else {
            self.out.push(' ');
        }
    }

    fn nested(&mut self, s: &Stmt) {
        self.depth += 1;
        self.newline();
        self.stmt(s);
        self.depth -= 1;
        self.newline();
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Abort => self.out.push_str("abort"),
            Stmt::Skip => self.out.push_str("skip"),
            Stmt::Init(r) => {
                let _ = write!(self.out, "{} :=0", reg(r));
            }
            Stmt::Unitary(e) => {
                let _ = write!(self.out, "{e}");
            }
            Stmt::Assert(e) => {
                let _ = write!(self.out, "assert {e}");
            }
            Stmt::Prescription(p, q) => {
                let _ = write!(self.out, "< {p}, {q} >");
            }
            Stmt::Seq(a, b) => {
                let wrap = matches!(**a, Stmt::Seq(..) | Stmt::Refined(..));
                if wrap {
                    self.out.push('(');
                }
                self.stmt(a);
                if wrap {
                    self.out.push(')');
                }
                self.out.push(';');
                self.newline();
                self.stmt(b);
            }
            Stmt::PChoice(a, p, b) => {
                self.out.push('(');
                self.stmt(a);
                let _ = write!(self.out, " [{p} ⊕] ");
                self.stmt(b);
                self.out.push(')');
            }
            Stmt::If(g, a, b) => {
                let _ = write!(self.out, "if {g} then");
                self.nested(a);
                self.out.push_str("else");
                self.nested(b);
                self.out.push_str("end");
            }
            Stmt::While(g, body) => {
                let _ = write!(self.out, "while {g} do");
                self.nested(body);
                self.out.push_str("end");
            }
            Stmt::RepeatUntil(body, g) => {
                self.out.push_str("repeat");
                self.nested(body);
                let _ = write!(self.out, "until {g}");
            }
            Stmt::Block(locals, body) => {
                let _ = write!(self.out, "begin local {} :", reg(locals));
                self.nested(body);
                self.out.push_str("end");
            }
            Stmt::Proc(n) => {
                let _ = write!(self.out, "proc {n}");
            }
            Stmt::Refined(p, q, body) => {
                let _ = write!(self.out, "< {p}, {q} > <= (");
                self.depth += 1;
                self.newline();
                self.stmt(body);
                self.depth -= 1;
                self.newline();
                self.out.push(')');
            }
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Printer {
            out: String::new(),
            multiline: false,
            depth: 0,
        };
        p.stmt(self);
        f.write_str(&p.out)
    }
}

/// Indented multi-line rendering of a program.
pub fn pretty_block(s: &Stmt) -> String {
    let mut p = Printer {
        out: String::new(),
        multiline: true,
        depth: 0,
    };
    p.stmt(s);
    p.out
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::DefExpr(n, e) => write!(f, "Def {n} := {e}."),
            Command::DefSim(n, s, e) => write!(f, "Def {n} := [[{s}]]({e})."),
            Command::DefProg(n, s) => write!(f, "Def {n} := Prog {s}."),
            Command::DefExtract(n, m) => write!(f, "Def {n} := Extract {m}."),
            Command::Refine(n, p, q) => write!(f, "Refine {n} : < {p}, {q} >."),
            Command::Step(s) => write!(f, "Step {s}."),
            Command::StepSeq(e) => write!(f, "Step Seq {e}."),
            Command::StepIf(e) => write!(f, "Step If {e}."),
            Command::StepWhile(g, i) => write!(f, "Step While {g} Inv {i}."),
            Command::StepPChoice {
                prob,
                mode,
                left,
                right,
            } => {
                let m = match mode {
                    SplitMode::Wpc => "Wpc",
                    SplitMode::Spc => "Spc",
                };
                write!(f, "Step Pcho {prob} {m} {left}, {right}.")
            }
            Command::StepRepeat(e) => write!(f, "Step Repeat {e}."),
            Command::WeakenPre(e) => write!(f, "WeakenPre {e}."),
            Command::StrengthenPost(e) => write!(f, "StrengthenPost {e}."),
            Command::Choose(n) => write!(f, "Choose {n}."),
            Command::End => f.write_str("End."),
            Command::Pause => f.write_str("Pause."),
            Command::ShowDef => f.write_str("Show Def."),
            Command::Show(n) => write!(f, "Show {n}."),
            Command::Eval(e) => write!(f, "Eval {e}."),
            Command::Test(a, rel, b) => {
                let r = match rel {
                    TestRel::Eq => "=",
                    TestRel::Leq => "<=",
                };
                write!(f, "Test {a} {r} {b}.")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse_command, parse_expr, parse_stmt};
    use super::*;

    #[test]
    fn goal_style_rendering() {
        let e = parse_expr("Peq[q1 q2]^⊥ ⋒ Pe[q1 q2 q3 a]").unwrap();
        assert_eq!(e.to_string(), "((Peq[q1 q2]^⊥) ⋒ Pe[q1 q2 q3 a])");
    }

    #[test]
    fn expression_round_trip() {
        for src in [
            "0.5 [|0000⟩ + |1111⟩]",
            "Rz[t] * Omega[t t'] * Rz[t]†",
            "(P00 ∨ Pp ⊗ P1)^⊥[a b c]",
            "-X - (2+3i) * Y ⇝ c0[]",
            "Uc(sqrt(2)) ⊗ IQOPT Inv0",
            "(IQOPT Inv0)[a b]",
            "-2i / 4",
        ] {
            let e = parse_expr(src).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{src}");
        }
    }

    #[test]
    fn statement_round_trip() {
        for src in [
            "[q0 q1] :=0; X[q0]; (skip [0.3 ⊕] abort)",
            "(H[q]; X[q]); Z[q]",
            "if P[q] then skip else if Q[p] then X[p] else Y[q] end end",
            "while P0[a] do repeat X[a] until P1[a] end",
            "begin local a b : CX[q a]; < P0[q], P1[q] > end",
            "< P0[q], P1[q] > <= X[q]; Y[q]",
            "(< P0[q], P1[q] > <= X[q]); Y[q]",
            "proc S0; assert Pp[t]",
        ] {
            let s = parse_stmt(src).unwrap();
            assert_eq!(parse_stmt(&s.to_string()).unwrap(), s, "{src}");
            assert_eq!(parse_stmt(&pretty_block(&s)).unwrap(), s, "{src}");
        }
    }

    #[test]
    fn command_round_trip() {
        for src in [
            "Def rho := [[proc S0]](Pp[t]).",
            "Step While Pnot00[q0 q1] Inv IQOPT Inv0.",
            "Step Pcho 0.5 Wpc P[q], Q[q].",
            "Test A[p] <= B[p].",
        ] {
            let c = parse_command(src).unwrap().node;
            assert_eq!(parse_command(&c.to_string()).unwrap().node, c);
        }
    }
}
