//! Refinement sessions: a tree of prescriptions `< pre, post >` refined by tactics until
//! every leaf is closed by a program, followed by program extraction.

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::env::{EvalError, Evaluator};
use crate::lang::{pretty_block, Expr, SplitMode, Stmt};
use crate::lattice::{Lattice, Subspace};
use crate::linalg::CVec;
use crate::qop::{LabelledSpace, Register};
use crate::semantics::{Program, SemError, Semantics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RefineError {
    #[error("no refinement in progress")]
    NoSession,
    #[error("a refinement of `{0}` is already in progress")]
    SessionActive(String),
    #[error("no goal to work on")]
    NoGoal,
    #[error("there is no goal {0}")]
    BadChoice(usize),
    #[error("{0} goal(s) remain open")]
    OpenGoals(usize),
    #[error("side condition failed: {what}{}", witness.as_ref().map(|w| format!("\n{w}")).unwrap_or_default())]
    SideCondition {
        what: String,
        witness: Option<String>,
    },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Sem(#[from] SemError),
}

impl From<crate::qop::QopError> for RefineError {
    fn from(e: crate::qop::QopError) -> Self {
        RefineError::Eval(e.into())
    }
}

impl From<crate::lattice::LatticeError> for RefineError {
    fn from(e: crate::lattice::LatticeError) -> Self {
        RefineError::Eval(e.into())
    }
}

pub type RefineResult<T> = Result<T, RefineError>;

/// A predicate as written by the user together with its value.
#[derive(Debug, Clone)]
pub struct GoalPred {
    pub expr: Expr,
    pub space: LabelledSpace,
}

#[derive(Debug, Clone)]
pub struct Goal {
    pub id: usize,
    pub pre: GoalPred,
    pub post: GoalPred,
}

impl Goal {
    pub fn register(&self) -> Register {
        self.pre.space.reg.union(&self.post.space.reg)
    }

    pub fn text(&self) -> String {
        format!("< {}, {} >", self.pre.expr, self.post.expr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    Program,
    Seq,
    If,
    While,
    WeakenPre,
    StrengthenPost,
    PChoice(SplitMode),
    Repeat,
    Local,
}

#[derive(Debug, Clone)]
pub enum ProofNode {
    Open(Goal),
    /// The goal was refined to `skeleton`; its prescriptions, in order, are the children.
    Rule {
        rule: Rule,
        goal: Goal,
        skeleton: Stmt,
        children: Vec<ProofNode>,
    },
}

impl ProofNode {
    pub fn goal(&self) -> &Goal {
        match self {
            ProofNode::Open(g) | ProofNode::Rule { goal: g, .. } => g,
        }
    }

    fn open_goals<'a>(&'a self, out: &mut Vec<&'a Goal>) {
        match self {
            ProofNode::Open(g) => out.push(g),
            ProofNode::Rule { children, .. } => {
                for c in children {
                    c.open_goals(out);
                }
            }
        }
    }

    fn find_open_mut(&mut self, id: usize) -> Option<&mut ProofNode> {
        match self {
            ProofNode::Open(g) if g.id == id => Some(self),
            ProofNode::Open(_) => None,
            ProofNode::Rule { children, .. } => {
                children.iter_mut().find_map(|c| c.find_open_mut(id))
            }
        }
    }

    /// The program obtained by filling every skeleton with its children's programs.
    pub fn extract(&self) -> Stmt {
        match self {
            ProofNode::Open(g) => Stmt::Prescription(g.pre.expr.clone(), g.post.expr.clone()),
            ProofNode::Rule {
                skeleton, children, ..
            } => skeleton.fill_prescriptions(&mut |k| children[k].extract()),
        }
    }

    /// The program with every refinement step kept as a `Refined` node.
    pub fn refinement_term(&self) -> Stmt {
        match self {
            ProofNode::Open(g) => Stmt::Prescription(g.pre.expr.clone(), g.post.expr.clone()),
            ProofNode::Rule {
                goal,
                skeleton,
                children,
                ..
            } => Stmt::Refined(
                goal.pre.expr.clone(),
                goal.post.expr.clone(),
                Box::new(skeleton.fill_prescriptions(&mut |k| children[k].refinement_term())),
            ),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ProofNode::Open(g) => json!({
                "kind": "open",
                "id": g.id,
                "pre": g.pre.expr.to_string(),
                "post": g.post.expr.to_string(),
            }),
            ProofNode::Rule {
                rule,
                goal,
                skeleton,
                children,
            } => json!({
                "kind": "rule",
                "rule": rule,
                "id": goal.id,
                "pre": goal.pre.expr.to_string(),
                "post": goal.post.expr.to_string(),
                "program": skeleton.to_string(),
                "children": children.iter().map(ProofNode::to_json).collect::<Vec<_>>(),
            }),
        }
    }
}

/// A completed refinement.
#[derive(Debug, Clone)]
pub struct SealedProof {
    pub name: String,
    pub root: ProofNode,
}

impl SealedProof {
    pub fn goal(&self) -> &Goal {
        self.root.goal()
    }

    pub fn extract(&self) -> Stmt {
        self.root.extract()
    }

    pub fn refinement_term(&self) -> Stmt {
        self.root.refinement_term()
    }

    pub fn render(&self) -> String {
        format!(
            "{} : {}\n{}",
            self.name,
            self.goal().text(),
            pretty_block(&self.refinement_term())
        )
    }
}

/// Tactic requests, mirroring the refinement commands.
#[derive(Debug, Clone)]
pub enum Tactic {
    Program(Stmt),
    Seq(Expr),
    If(Expr),
    While { guard: Expr, inv: Expr },
    WeakenPre(Expr),
    StrengthenPost(Expr),
    PChoice {
        prob: Expr,
        mode: SplitMode,
        left: Expr,
        right: Expr,
    },
    Repeat(Expr),
}

#[derive(Debug, Clone)]
pub struct Session {
    pub name: String,
    pub root: ProofNode,
    /// Every qubit mentioned so far, in order of appearance.
    pub ambient: Register,
    current: usize,
    next_id: usize,
}

fn witness_text(v: &CVec, reg: &Register) -> String {
    let n = reg.len();
    let terms: Vec<String> = v
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 1e-9)
        .map(|(i, z)| {
            let bits: String = (0..n)
                .map(|k| if (i >> (n - 1 - k)) & 1 == 1 { '1' } else { '0' })
                .collect();
            format!("({:.6}{:+.6}i)|{bits}⟩", z.re, z.im)
        })
        .collect();
    format!("counterexample over {reg}: {}", terms.join(" + "))
}

impl Session {
    pub fn start(name: &str, ev: &Evaluator, pre: &Expr, post: &Expr) -> RefineResult<Session> {
        let pre = GoalPred {
            expr: pre.clone(),
            space: ev.labelled_space(pre)?,
        };
        let post = GoalPred {
            expr: post.clone(),
            space: ev.labelled_space(post)?,
        };
        let ambient = pre.space.reg.union(&post.space.reg);
        Ok(Session {
            name: name.to_string(),
            root: ProofNode::Open(Goal { id: 0, pre, post }),
            ambient,
            current: 0,
            next_id: 1,
        })
    }

    pub fn goals(&self) -> Vec<&Goal> {
        let mut out = Vec::new();
        self.root.open_goals(&mut out);
        out
    }

    pub fn current_index(&self) -> usize {
        self.current
    }

    pub fn current_goal(&self) -> Option<&Goal> {
        self.goals().get(self.current).copied()
    }

    pub fn choose(&mut self, n: usize) -> RefineResult<()> {
        let count = self.goals().len();
        if n == 0 || n > count {
            return Err(RefineError::BadChoice(n));
        }
        self.current = n - 1;
        Ok(())
    }

    pub fn seal(&self) -> RefineResult<SealedProof> {
        let open = self.goals().len();
        if open > 0 {
            return Err(RefineError::OpenGoals(open));
        }
        Ok(SealedProof {
            name: self.name.clone(),
            root: self.root.clone(),
        })
    }

    /// Goal listing in display form.
    pub fn render_goals(&self) -> String {
        let goals = self.goals();
        if goals.is_empty() {
            return "Goal Clear.".to_string();
        }
        let n = goals.len();
        let mut lines = Vec::new();
        for (i, g) in goals.iter().enumerate() {
            let mark = if i == self.current && self.current != 0 {
                " *"
            } else {
                ""
            };
            lines.push(format!("Goal ({}/{}){}", i + 1, n, mark));
            lines.push(g.text());
        }
        lines.join("\n")
    }

    fn pred(&self, ev: &Evaluator, e: Expr) -> RefineResult<GoalPred> {
        let space = ev.labelled_space(&e)?;
        Ok(GoalPred { expr: e, space })
    }

    fn lift(p: &GoalPred, amb: &Register) -> RefineResult<Subspace> {
        Ok(p.space.extend_to(amb)?)
    }

    fn require_leq(
        lat: &Lattice,
        what: &str,
        a: &GoalPred,
        b: &GoalPred,
        amb: &Register,
    ) -> RefineResult<()> {
        let sa = Self::lift(a, amb)?;
        let sb = Self::lift(b, amb)?;
        if lat.leq(&sa, &sb)? {
            return Ok(());
        }
        Err(RefineError::SideCondition {
            what: format!("{what}: {} ⊑ {} does not hold", a.expr, b.expr),
            witness: lat
                .separating_vector(&sa, &sb)
                .map(|v| witness_text(&v, amb)),
        })
    }

    /// Applies a tactic to the current goal. On failure the session is unchanged.
    pub fn apply(&mut self, ev: &Evaluator, tactic: &Tactic) -> RefineResult<()> {
        let goal = self.current_goal().ok_or(RefineError::NoGoal)?.clone();
        let lat = ev.lat;
        let (p, q) = (&goal.pre, &goal.post);
        let mut amb = self.ambient.union(&goal.register());
        let (rule, skeleton, new_preds): (Rule, Stmt, Vec<(GoalPred, GoalPred)>) = match tactic {
            Tactic::Program(s) => return self.apply_program(ev, &goal, s),
            Tactic::Seq(r) => {
                let r = self.pred(ev, r.clone())?;
                amb = amb.union(&r.space.reg);
                let sk = Stmt::seq(
                    Stmt::Prescription(p.expr.clone(), r.expr.clone()),
                    Stmt::Prescription(r.expr.clone(), q.expr.clone()),
                );
                (Rule::Seq, sk, vec![(p.clone(), r.clone()), (r, q.clone())])
            }
            Tactic::If(r) => {
                let g = self.pred(ev, r.clone())?;
                amb = amb.union(&g.space.reg);
                let then_pre = self.pred(ev, Expr::conjunct(r.clone(), p.expr.clone()))?;
                let else_pre =
                    self.pred(ev, Expr::conjunct(Expr::perp(r.clone()), p.expr.clone()))?;
                let sk = Stmt::If(
                    r.clone(),
                    Box::new(Stmt::Prescription(then_pre.expr.clone(), q.expr.clone())),
                    Box::new(Stmt::Prescription(else_pre.expr.clone(), q.expr.clone())),
                );
                (
                    Rule::If,
                    sk,
                    vec![(then_pre, q.clone()), (else_pre, q.clone())],
                )
            }
            Tactic::While { guard, inv } => {
                let g = self.pred(ev, guard.clone())?;
                let i = self.pred(ev, inv.clone())?;
                amb = amb.union(&g.space.reg).union(&i.space.reg);
                Self::require_leq(&lat, "precondition implies invariant", p, &i, &amb)?;
                let exit = self.pred(ev, Expr::conjunct(Expr::perp(guard.clone()), inv.clone()))?;
                Self::require_leq(&lat, "loop exit establishes postcondition", &exit, q, &amb)?;
                let body_pre = self.pred(ev, Expr::conjunct(guard.clone(), inv.clone()))?;
                let sk = Stmt::While(
                    guard.clone(),
                    Box::new(Stmt::Prescription(body_pre.expr.clone(), inv.clone())),
                );
                (Rule::While, sk, vec![(body_pre, i)])
            }
            Tactic::WeakenPre(r) => {
                let r = self.pred(ev, r.clone())?;
                amb = amb.union(&r.space.reg);
                Self::require_leq(&lat, "weakening", p, &r, &amb)?;
                let sk = Stmt::Prescription(r.expr.clone(), q.expr.clone());
                (Rule::WeakenPre, sk, vec![(r, q.clone())])
            }
            Tactic::StrengthenPost(t) => {
                let t = self.pred(ev, t.clone())?;
                amb = amb.union(&t.space.reg);
                Self::require_leq(&lat, "strengthening", &t, q, &amb)?;
                let sk = Stmt::Prescription(p.expr.clone(), t.expr.clone());
                (Rule::StrengthenPost, sk, vec![(p.clone(), t)])
            }
            Tactic::PChoice {
                prob,
                mode,
                left,
                right,
            } => {
                let pv = match ev.eval(prob)? {
                    crate::env::Value::Scalar(z) if z.im.abs() < 1e-12 => z.re,
                    _ => return Err(RefineError::Unsupported("probability must be real".into())),
                };
                if !(pv > 0.0 && pv < 1.0) {
                    return Err(SemError::BadProbability(pv).into());
                }
                let a = self.pred(ev, left.clone())?;
                let b = self.pred(ev, right.clone())?;
                amb = amb.union(&a.space.reg).union(&b.space.reg);
                let pres = |x: &GoalPred, y: &GoalPred| {
                    Box::new(Stmt::Prescription(x.expr.clone(), y.expr.clone()))
                };
                match mode {
                    SplitMode::Wpc => {
                        let both = self.pred(ev, Expr::meet(left.clone(), right.clone()))?;
                        Self::require_leq(&lat, "precondition implies both branches", p, &both, &amb)?;
                        let sk = Stmt::PChoice(pres(&a, q), prob.clone(), pres(&b, q));
                        (Rule::PChoice(*mode), sk, vec![(a, q.clone()), (b, q.clone())])
                    }
                    SplitMode::Spc => {
                        let either = self.pred(ev, Expr::join(left.clone(), right.clone()))?;
                        Self::require_leq(&lat, "branches establish postcondition", &either, q, &amb)?;
                        let sk = Stmt::PChoice(pres(p, &a), prob.clone(), pres(p, &b));
                        (Rule::PChoice(*mode), sk, vec![(p.clone(), a), (p.clone(), b)])
                    }
                }
            }
            Tactic::Repeat(r) => {
                let g = self.pred(ev, r.clone())?;
                amb = amb.union(&g.space.reg);
                let mid = Expr::meet(
                    Expr::implies(Expr::perp(r.clone()), p.expr.clone()),
                    Expr::implies(r.clone(), q.expr.clone()),
                );
                let mid = self.pred(ev, mid)?;
                let sk = Stmt::RepeatUntil(
                    Box::new(Stmt::Prescription(p.expr.clone(), mid.expr.clone())),
                    r.clone(),
                );
                (Rule::Repeat, sk, vec![(p.clone(), mid)])
            }
        };
        self.commit(goal.id, rule, skeleton, new_preds, amb);
        Ok(())
    }

    fn apply_program(&mut self, ev: &Evaluator, goal: &Goal, s: &Stmt) -> RefineResult<()> {
        let lat = ev.lat;
        // A block wrapping a single prescription: the prescription on the enlarged register.
        if let Stmt::Block(locals, body) = s {
            if let Stmt::Prescription(pe, qe) = &**body {
                let locals = Register::new(locals.iter().cloned())?;
                if !locals.is_disjoint(&goal.register()) {
                    return Err(RefineError::Unsupported(
                        "local qubits must not occur in the goal".into(),
                    ));
                }
                let pre = self.pred(ev, pe.clone())?;
                let post = self.pred(ev, qe.clone())?;
                let amb = self
                    .ambient
                    .union(&goal.register())
                    .union(&locals)
                    .union(&pre.space.reg)
                    .union(&post.space.reg);
                Self::require_leq(&lat, "goal precondition implies block precondition", &goal.pre, &pre, &amb)?;
                Self::require_leq(&lat, "block postcondition implies goal postcondition", &post, &goal.post, &amb)?;
                self.commit(goal.id, Rule::Local, s.clone(), vec![(pre, post)], amb);
                return Ok(());
            }
        }
        let prog: Program = ev.compile(s)?;
        let amb = self.ambient.union(&goal.register()).union(&prog.qv());
        let sem = Semantics::new(lat);
        let post = goal.post.space.extend_to(&amb)?;
        let pre = goal.pre.space.extend_to(&amb)?;
        let w = match sem.wlp(&prog, &post, &amb) {
            Err(SemError::BlockUnsupported) => {
                return Err(RefineError::Unsupported(
                    "block statements are only accepted around a single prescription".into(),
                ))
            }
            other => other?,
        };
        if !lat.leq(&pre, &w)? {
            return Err(RefineError::SideCondition {
                what: format!("{} does not refine {}", s, goal.text()),
                witness: lat.separating_vector(&pre, &w).map(|v| witness_text(&v, &amb)),
            });
        }
        let mut new_preds = Vec::new();
        for (pe, qe) in s.prescriptions() {
            new_preds.push((self.pred(ev, pe.clone())?, self.pred(ev, qe.clone())?));
        }
        self.commit(goal.id, Rule::Program, s.clone(), new_preds, amb);
        Ok(())
    }

    fn commit(
        &mut self,
        id: usize,
        rule: Rule,
        skeleton: Stmt,
        preds: Vec<(GoalPred, GoalPred)>,
        amb: Register,
    ) {
        let mut children = Vec::with_capacity(preds.len());
        for (pre, post) in preds {
            amb_extend(&mut self.ambient, &pre.space.reg);
            amb_extend(&mut self.ambient, &post.space.reg);
            children.push(ProofNode::Open(Goal {
                id: self.next_id,
                pre,
                post,
            }));
            self.next_id += 1;
        }
        amb_extend(&mut self.ambient, &amb);
        let node = self.root.find_open_mut(id).expect("current goal is open");
        let goal = node.goal().clone();
        *node = ProofNode::Rule {
            rule,
            goal,
            skeleton,
            children,
        };
        let count = self.goals().len();
        if count == 0 {
            self.current = 0;
        } else if self.current >= count {
            self.current = count - 1;
        }
    }
}

fn amb_extend(amb: &mut Register, r: &Register) {
    *amb = amb.union(r);
}
