//! Predicate transformers, density-matrix simulation and an explicit Kraus-operator oracle
//! over a resolved program representation.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Lattice, LatticeError, Subspace};
use crate::linalg::{self, cr, CMat, CVec};
use crate::qop::{extend_matrix, DensityState, LabelledOp, LabelledSpace, QopError, Register};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemError {
    #[error("block-local statements are not supported by wlp/sp")]
    BlockUnsupported,
    #[error("probability {0} is outside (0, 1)")]
    BadProbability(f64),
    #[error("program contains a prescription and cannot be executed")]
    NotExecutable,
    #[error("program contains a loop; the Kraus oracle handles loop-free programs only")]
    NotLoopFree,
    #[error("state register {reg} is missing qubits {missing}")]
    MissingQubits { reg: Register, missing: Register },
    #[error("operator on {0} is not unitary")]
    NotUnitary(Register),
    #[error("fixpoint iteration did not stabilise within {0} steps")]
    NoFixpoint(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Qop(#[from] QopError),
}

pub type SemResult<T> = Result<T, SemError>;

/// Resolved program: every operator and predicate carries its matrix and register.
#[derive(Debug, Clone)]
pub enum Program {
    Abort,
    Skip,
    Init(Register),
    Unitary(LabelledOp),
    Assert(LabelledSpace),
    Prescription(LabelledSpace, LabelledSpace),
    Seq(Box<Program>, Box<Program>),
    PChoice(f64, Box<Program>, Box<Program>),
    If(LabelledSpace, Box<Program>, Box<Program>),
    While(LabelledSpace, Box<Program>),
    Block(Register, Box<Program>),
}

impl Program {
    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    pub fn seq_all(items: impl IntoIterator<Item = Program>) -> Program {
        let items: Vec<Program> = items.into_iter().collect();
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Program::Skip,
            Some(last) => it.fold(last, |acc, s| Program::seq(s, acc)),
        }
    }

    pub fn if_(g: LabelledSpace, a: Program, b: Program) -> Program {
        Program::If(g, Box::new(a), Box::new(b))
    }

    pub fn while_(g: LabelledSpace, body: Program) -> Program {
        Program::While(g, Box::new(body))
    }

    /// `repeat S until P` as `S; while P^perp do S end`.
    pub fn repeat_until(body: Program, g: &LabelledSpace) -> Program {
        let neg = LabelledSpace {
            reg: g.reg.clone(),
            space: g.space.complement(),
        };
        Program::seq(body.clone(), Program::while_(neg, body))
    }

    pub fn block(locals: Register, body: Program) -> Program {
        Program::Block(locals, Box::new(body))
    }

    /// Free qubits, in order of first appearance.
    pub fn qv(&self) -> Register {
        match self {
            Program::Abort | Program::Skip => Register::empty(),
            Program::Init(r) => r.clone(),
            Program::Unitary(u) => u.reg.clone(),
            Program::Assert(p) => p.reg.clone(),
            Program::Prescription(p, q) => p.reg.union(&q.reg),
            Program::Seq(a, b) | Program::PChoice(_, a, b) => a.qv().union(&b.qv()),
            Program::If(g, a, b) => g.reg.union(&a.qv()).union(&b.qv()),
            Program::While(g, s) => g.reg.union(&s.qv()),
            Program::Block(l, s) => s.qv().minus(l),
        }
    }

    pub fn is_loop_free(&self) -> bool {
        match self {
            Program::While(..) => false,
            Program::Seq(a, b) | Program::PChoice(_, a, b) | Program::If(_, a, b) => {
                a.is_loop_free() && b.is_loop_free()
            }
            Program::Block(_, s) => s.is_loop_free(),
            _ => true,
        }
    }

    pub fn is_executable(&self) -> bool {
        match self {
            Program::Prescription(..) => false,
            Program::Seq(a, b) | Program::PChoice(_, a, b) | Program::If(_, a, b) => {
                a.is_executable() && b.is_executable()
            }
            Program::While(_, s) | Program::Block(_, s) => s.is_executable(),
            _ => true,
        }
    }

    /// Renames qubits everywhere according to `map`; unmapped names are kept.
    pub fn rename(&self, map: &HashMap<String, String>) -> Program {
        let rr = |r: &Register| {
            Register::new(
                r.names()
                    .iter()
                    .map(|q| map.get(q).cloned().unwrap_or_else(|| q.clone())),
            )
            .expect("renaming is injective")
        };
        let rs = |p: &LabelledSpace| LabelledSpace {
            reg: rr(&p.reg),
            space: p.space.clone(),
        };
        let b = |p: &Program| Box::new(p.rename(map));
        match self {
            Program::Abort => Program::Abort,
            Program::Skip => Program::Skip,
            Program::Init(r) => Program::Init(rr(r)),
            Program::Unitary(u) => Program::Unitary(LabelledOp {
                reg: rr(&u.reg),
                mat: u.mat.clone(),
            }),
            Program::Assert(p) => Program::Assert(rs(p)),
            Program::Prescription(p, q) => Program::Prescription(rs(p), rs(q)),
            Program::Seq(x, y) => Program::Seq(b(x), b(y)),
            Program::PChoice(p, x, y) => Program::PChoice(*p, b(x), b(y)),
            Program::If(g, x, y) => Program::If(rs(g), b(x), b(y)),
            Program::While(g, s) => Program::While(rs(g), b(s)),
            Program::Block(l, s) => Program::Block(rr(l), b(s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Wlp,
    Sp,
}

/// Ranks of the successive iterates of one loop fixpoint computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixpointTrace {
    pub direction: Direction,
    pub dim: usize,
    pub ranks: Vec<usize>,
}

impl FixpointTrace {
    pub fn iterations(&self) -> usize {
        self.ranks.len().saturating_sub(1)
    }

    /// Nonincreasing ranks for wlp, nondecreasing for sp.
    pub fn is_monotone(&self) -> bool {
        self.ranks.windows(2).all(|w| match self.direction {
            Direction::Wlp => w[1] <= w[0],
            Direction::Sp => w[1] >= w[0],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    /// A loop stops once the trace still inside it is at most this.
    pub residual_tol: f64,
    pub max_while_iters: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            residual_tol: 1e-12,
            max_while_iters: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub state: DensityState,
    pub loops: Vec<LoopReport>,
}

impl SimOutcome {
    pub fn converged(&self) -> bool {
        self.loops.iter().all(|l| l.converged)
    }

    pub fn max_residual(&self) -> f64 {
        self.loops.iter().fold(0.0, |a, l| a.max(l.residual))
    }
}

#[derive(Debug, Clone)]
pub struct HoareVerdict {
    pub valid: bool,
    /// Whether the strongest-postcondition check gives the same answer.
    pub sp_agrees: bool,
    /// A unit vector in the precondition that violates the triple, over `ambient`.
    pub witness: Option<CVec>,
    pub ambient: Register,
}

/// Semantic engine: lattice tolerances plus an optional recorder of loop fixpoints.
#[derive(Debug, Default)]
pub struct Semantics {
    pub lat: Lattice,
    /// Hard cap on fixpoint iterations is `cap_factor * dim`.
    pub cap_factor: usize,
    traces: RefCell<Vec<FixpointTrace>>,
    record: bool,
}

impl Semantics {
    pub fn new(lat: Lattice) -> Self {
        Semantics {
            lat,
            cap_factor: 4,
            traces: RefCell::new(Vec::new()),
            record: false,
        }
    }

    pub fn recording(lat: Lattice) -> Self {
        Semantics {
            record: true,
            ..Semantics::new(lat)
        }
    }

    pub fn take_traces(&self) -> Vec<FixpointTrace> {
        std::mem::take(&mut self.traces.borrow_mut())
    }

    fn cap(&self, dim: usize) -> usize {
        self.cap_factor.max(1) * dim.max(1)
    }

    fn push_trace(&self, t: FixpointTrace) {
        if self.record {
            self.traces.borrow_mut().push(t);
        }
    }

    fn lift(&self, p: &LabelledSpace, amb: &Register) -> SemResult<Subspace> {
        Ok(p.extend_to(amb)?)
    }

    fn unitary_on(&self, u: &LabelledOp, amb: &Register) -> SemResult<CMat> {
        if !linalg::is_unitary(&u.mat, 1e-8) {
            return Err(SemError::NotUnitary(u.reg.clone()));
        }
        Ok(u.extend_to(amb)?)
    }

    /// Kraus operators `|0><i|` of the reset channel on `r`, over `amb`.
    fn reset_kraus(r: &Register, amb: &Register) -> SemResult<Vec<CMat>> {
        let k = r.dim();
        (0..k)
            .map(|i| {
                let mut m = CMat::zeros(k, k);
                m[(0, i)] = cr(1.0);
                Ok(extend_matrix(&m, r, amb)?)
            })
            .collect()
    }

    /// Weakest liberal precondition of `s` for `post`, all over `amb`.
    pub fn wlp(&self, s: &Program, post: &Subspace, amb: &Register) -> SemResult<Subspace> {
        let lat = &self.lat;
        let d = amb.dim();
        if post.is_full() {
            return Ok(Subspace::full(d));
        }
        Ok(match s {
            Program::Abort => Subspace::full(d),
            Program::Skip => post.clone(),
            Program::Init(r) => {
                let rp = post.projector();
                let mut m = CMat::zeros(d, d);
                for k in Self::reset_kraus(r, amb)? {
                    m += k.adjoint() * &rp * k;
                }
                lat.eigenspace_one(&m)?
            }
            Program::Unitary(u) => post.map_unitary(&self.unitary_on(u, amb)?.adjoint()),
            Program::Assert(p) => lat.implies(&self.lift(p, amb)?, post)?,
            Program::Prescription(p, q) => {
                let q = self.lift(q, amb)?;
                if lat.leq(&q, post)? {
                    self.lift(p, amb)?
                } else {
                    Subspace::zero(d)
                }
            }
            Program::Seq(a, b) => {
                let mid = self.wlp(b, post, amb)?;
                self.wlp(a, &mid, amb)?
            }
            Program::PChoice(p, a, b) => {
                check_prob(*p)?;
                lat.meet(&self.wlp(a, post, amb)?, &self.wlp(b, post, amb)?)?
            }
            Program::If(g, a, b) => {
                let g = self.lift(g, amb)?;
                let wa = self.wlp(a, post, amb)?;
                let wb = self.wlp(b, post, amb)?;
                lat.meet(&lat.implies(&g, &wa)?, &lat.implies(&g.complement(), &wb)?)?
            }
            Program::While(g, body) => {
                let g = self.lift(g, amb)?;
                let gc = g.complement();
                let exit = lat.implies(&gc, post)?;
                let mut cur = Subspace::full(d);
                let mut ranks = vec![cur.rank()];
                let cap = self.cap(d);
                loop {
                    let inner = self.wlp(body, &cur, amb)?;
                    let next = lat.meet(&lat.implies(&g, &inner)?, &exit)?;
                    ranks.push(next.rank());
                    let stable = lat.equal(&next, &cur)?;
                    cur = next;
                    if stable {
                        break;
                    }
                    if ranks.len() > cap {
                        return Err(SemError::NoFixpoint(cap));
                    }
                }
                self.push_trace(FixpointTrace {
                    direction: Direction::Wlp,
                    dim: d,
                    ranks,
                });
                cur
            }
            Program::Block(..) => return Err(SemError::BlockUnsupported),
        })
    }

    /// Strongest postcondition of `s` from `pre`, all over `amb`.
    pub fn sp(&self, s: &Program, pre: &Subspace, amb: &Register) -> SemResult<Subspace> {
        let lat = &self.lat;
        let d = amb.dim();
        if pre.is_zero() {
            return Ok(Subspace::zero(d));
        }
        Ok(match s {
            Program::Abort => Subspace::zero(d),
            Program::Skip => pre.clone(),
            Program::Init(r) => {
                let rp = pre.projector();
                let mut m = CMat::zeros(d, d);
                for k in Self::reset_kraus(r, amb)? {
                    m += &k * &rp * k.adjoint();
                }
                lat.support_of(&m)?
            }
            Program::Unitary(u) => pre.map_unitary(&self.unitary_on(u, amb)?),
            Program::Assert(p) => lat.conjunct(&self.lift(p, amb)?, pre)?,
            Program::Prescription(p, q) => {
                let p = self.lift(p, amb)?;
                if lat.leq(pre, &p)? {
                    self.lift(q, amb)?
                } else {
                    Subspace::full(d)
                }
            }
            Program::Seq(a, b) => {
                let mid = self.sp(a, pre, amb)?;
                self.sp(b, &mid, amb)?
            }
            Program::PChoice(p, a, b) => {
                check_prob(*p)?;
                lat.join(&self.sp(a, pre, amb)?, &self.sp(b, pre, amb)?)?
            }
            Program::If(g, a, b) => {
                let g = self.lift(g, amb)?;
                let sa = self.sp(a, &lat.conjunct(&g, pre)?, amb)?;
                let sb = self.sp(b, &lat.conjunct(&g.complement(), pre)?, amb)?;
                lat.join(&sa, &sb)?
            }
            Program::While(g, body) => {
                let g = self.lift(g, amb)?;
                let mut cur = Subspace::zero(d);
                let mut ranks = vec![0];
                let cap = self.cap(d);
                loop {
                    let step = self.sp(body, &lat.conjunct(&g, &cur)?, amb)?;
                    let next = lat.join(pre, &step)?;
                    ranks.push(next.rank());
                    let stable = lat.equal(&next, &cur)?;
                    cur = next;
                    if stable {
                        break;
                    }
                    if ranks.len() > cap {
                        return Err(SemError::NoFixpoint(cap));
                    }
                }
                self.push_trace(FixpointTrace {
                    direction: Direction::Sp,
                    dim: d,
                    ranks,
                });
                lat.conjunct(&g.complement(), &cur)?
            }
            Program::Block(..) => return Err(SemError::BlockUnsupported),
        })
    }

    /// wlp with the ambient register chosen as `post.reg ∪ qv(s)`.
    pub fn wlp_labelled(&self, s: &Program, post: &LabelledSpace) -> SemResult<LabelledSpace> {
        let amb = post.reg.union(&s.qv());
        let space = self.wlp(s, &post.extend_to(&amb)?, &amb)?;
        Ok(LabelledSpace { reg: amb, space })
    }

    /// sp with the ambient register chosen as `pre.reg ∪ qv(s)`.
    pub fn sp_labelled(&self, s: &Program, pre: &LabelledSpace) -> SemResult<LabelledSpace> {
        let amb = pre.reg.union(&s.qv());
        let space = self.sp(s, &pre.extend_to(&amb)?, &amb)?;
        Ok(LabelledSpace { reg: amb, space })
    }

    /// Partial correctness of `{pre} s {post}` via wlp, cross-checked with sp.
    pub fn hoare_valid(
        &self,
        pre: &LabelledSpace,
        s: &Program,
        post: &LabelledSpace,
    ) -> SemResult<HoareVerdict> {
        let amb = pre.reg.union(&post.reg).union(&s.qv());
        let p = pre.extend_to(&amb)?;
        let q = post.extend_to(&amb)?;
        let w = self.wlp(s, &q, &amb)?;
        let valid = self.lat.leq(&p, &w)?;
        let sp = self.sp(s, &p, &amb)?;
        let sp_valid = self.lat.leq(&sp, &q)?;
        Ok(HoareVerdict {
            valid,
            sp_agrees: valid == sp_valid,
            witness: if valid {
                None
            } else {
                self.lat.separating_vector(&p, &w)
            },
            ambient: amb,
        })
    }

    pub fn annotate_post(&self, pre: &LabelledSpace, s: &Program) -> SemResult<LabelledSpace> {
        self.sp_labelled(s, pre)
    }

    /// States that may end in `post`: the complement of the wlp of its complement.
    pub fn annotate_pre(&self, s: &Program, post: &LabelledSpace) -> SemResult<LabelledSpace> {
        let neg = LabelledSpace {
            reg: post.reg.clone(),
            space: post.space.complement(),
        };
        let w = self.wlp_labelled(s, &neg)?;
        Ok(LabelledSpace {
            reg: w.reg,
            space: w.space.complement(),
        })
    }
}

fn check_prob(p: f64) -> SemResult<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(SemError::BadProbability(p))
    }
}

// ------------------------------------------------------------------ simulation

struct Simulator<'a> {
    opts: &'a SimOptions,
    loops: Vec<LoopReport>,
    fresh: usize,
}

impl Simulator<'_> {
    fn run(&mut self, s: &Program, rho: &CMat, amb: &Register) -> SemResult<CMat> {
        Ok(match s {
            Program::Abort => CMat::zeros(rho.nrows(), rho.ncols()),
            Program::Skip => rho.clone(),
            Program::Init(r) => {
                let mut out = CMat::zeros(rho.nrows(), rho.ncols());
                for k in Semantics::reset_kraus(r, amb)? {
                    out += &k * rho * k.adjoint();
                }
                out
            }
            Program::Unitary(u) => {
                if !linalg::is_unitary(&u.mat, 1e-8) {
                    return Err(SemError::NotUnitary(u.reg.clone()));
                }
                let m = u.extend_to(amb)?;
                &m * rho * m.adjoint()
            }
            Program::Assert(p) => {
                let pr = p.extend_to(amb)?.projector();
                &pr * rho * &pr
            }
            Program::Prescription(..) => return Err(SemError::NotExecutable),
            Program::Seq(a, b) => {
                let mid = self.run(a, rho, amb)?;
                self.run(b, &mid, amb)?
            }
            Program::PChoice(p, a, b) => {
                check_prob(*p)?;
                self.run(a, rho, amb)?.scale(*p) + self.run(b, rho, amb)?.scale(1.0 - p)
            }
            Program::If(g, a, b) => {
                let pg = g.extend_to(amb)?.projector();
                let pc = linalg::identity(pg.nrows()) - &pg;
                self.run(a, &(&pg * rho * &pg), amb)? + self.run(b, &(&pc * rho * &pc), amb)?
            }
            Program::While(g, body) => {
                let pg = g.extend_to(amb)?.projector();
                let pc = linalg::identity(pg.nrows()) - &pg;
                let mut acc = CMat::zeros(rho.nrows(), rho.ncols());
                let mut cur = rho.clone();
                let mut iterations = 0;
                let d = rho.nrows();
                // Bodies with inner loops are summarised once instead of rerun per round.
                let body_super = if body.is_loop_free() {
                    None
                } else {
                    Some(self.superop(body, amb)?)
                };
                loop {
                    acc += &pc * &cur * &pc;
                    let inside = &pg * &cur * &pg;
                    let residual = linalg::trace(&inside).re;
                    if residual <= self.opts.residual_tol {
                        self.loops.push(LoopReport {
                            iterations,
                            residual: residual.max(0.0),
                            converged: true,
                        });
                        break;
                    }
                    if iterations >= self.opts.max_while_iters {
                        self.loops.push(LoopReport {
                            iterations,
                            residual,
                            converged: false,
                        });
                        break;
                    }
                    cur = match &body_super {
                        Some(sb) => unvec(&(sb * vec(&inside)), d),
                        None => self.run(body, &inside, amb)?,
                    };
                    iterations += 1;
                }
                acc
            }
            Program::Block(locals, body) => {
                let (locals, body) = self.fresh_locals(locals, body, amb)?;
                let state = DensityState::new(rho.clone(), amb.clone())?.pad_zero(&locals);
                let out = self.run(&body, &state.rho, &state.reg)?;
                crate::qop::partial_trace(&out, &state.reg, amb)?
            }
        })
    }

    /// Renames locals that clash with the current register.
    fn fresh_locals(
        &mut self,
        locals: &Register,
        body: &Program,
        amb: &Register,
    ) -> SemResult<(Register, Program)> {
        let mut map = HashMap::new();
        for q in locals.names() {
            if amb.contains(q) {
                self.fresh += 1;
                map.insert(q.clone(), format!("{q}#{}", self.fresh));
            }
        }
        if map.is_empty() {
            return Ok((locals.clone(), body.clone()));
        }
        let l = Register::new(
            locals
                .names()
                .iter()
                .map(|q| map.get(q).cloned().unwrap_or_else(|| q.clone())),
        )?;
        Ok((l, body.rename(&map)))
    }

    /// Transfer matrix of `s` acting on column-stacked density matrices over `amb`.
    /// Loops are summed until the worst-case mass left inside is below the tolerance.
    fn superop(&mut self, s: &Program, amb: &Register) -> SemResult<CMat> {
        let d = amb.dim();
        let mm = linalg::matmul;
        let conj = |k: &CMat| linalg::kron(&k.map(|z| z.conj()), k);
        Ok(match s {
            Program::Abort => CMat::zeros(d * d, d * d),
            Program::Skip => linalg::identity(d * d),
            Program::Init(r) => {
                let mut out = CMat::zeros(d * d, d * d);
                for k in Semantics::reset_kraus(r, amb)? {
                    out += conj(&k);
                }
                out
            }
            Program::Unitary(u) => {
                if !linalg::is_unitary(&u.mat, 1e-8) {
                    return Err(SemError::NotUnitary(u.reg.clone()));
                }
                conj(&u.extend_to(amb)?)
            }
            Program::Assert(p) => conj(&p.extend_to(amb)?.projector()),
            Program::Prescription(..) => return Err(SemError::NotExecutable),
            Program::Seq(a, b) => mm(&self.superop(b, amb)?, &self.superop(a, amb)?),
            Program::PChoice(p, a, b) => {
                check_prob(*p)?;
                self.superop(a, amb)?.scale(*p) + self.superop(b, amb)?.scale(1.0 - p)
            }
            Program::If(g, a, b) => {
                let pg = g.extend_to(amb)?.projector();
                let pc = linalg::identity(d) - &pg;
                mm(&self.superop(a, amb)?, &conj(&pg)) + mm(&self.superop(b, amb)?, &conj(&pc))
            }
            Program::While(g, body) => {
                let pg = g.extend_to(amb)?.projector();
                let pc = conj(&(linalg::identity(d) - &pg));
                let pg = conj(&pg);
                // One round maps rho to body(Pg rho Pg). Sums of rounds are doubled until
                // the worst-case mass still inside drops below the tolerance.
                let round = mm(&self.superop(body, amb)?, &pg);
                let trace_row = vec(&linalg::identity(d)).transpose();
                let mut sum = linalg::identity(d * d);
                let mut power = round;
                let mut rounds = 1;
                loop {
                    let row = &trace_row * &pg * &power;
                    let effect = CMat::from_fn(d, d, |i, j| row[j + i * d]);
                    let (vals, _) =
                        linalg::hermitian_eigen(&(&effect + effect.adjoint()).scale(0.5));
                    let residual = vals.last().copied().unwrap_or(0.0).max(0.0);
                    let converged = residual <= self.opts.residual_tol;
                    if converged || rounds >= self.opts.max_while_iters {
                        self.loops.push(LoopReport {
                            iterations: rounds,
                            residual,
                            converged,
                        });
                        break mm(&pc, &(sum + power));
                    }
                    sum += mm(&power, &sum);
                    power = mm(&power, &power);
                    rounds *= 2;
                }
            }
            Program::Block(locals, body) => {
                let (locals, body) = self.fresh_locals(locals, body, amb)?;
                let ext = amb.union(&locals.minus(amb));
                let de = ext.dim();
                let mut pad = CMat::zeros(de * de, d * d);
                let mut trace = CMat::zeros(d * d, de * de);
                for col in 0..d * d {
                    let mut e = CMat::zeros(d, d);
                    e[(col % d, col / d)] = cr(1.0);
                    let padded = DensityState { rho: e, reg: amb.clone() }.pad_zero(&locals);
                    debug_assert_eq!(padded.reg, ext);
                    pad.set_column(col, &vec(&padded.rho));
                }
                for col in 0..de * de {
                    let mut e = CMat::zeros(de, de);
                    e[(col % de, col / de)] = cr(1.0);
                    trace.set_column(col, &vec(&crate::qop::partial_trace(&e, &ext, amb)?));
                }
                mm(&mm(&trace, &self.superop(&body, &ext)?), &pad)
            }
        })
    }
}

fn vec(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

fn unvec(v: &CVec, d: usize) -> CMat {
    CMat::from_column_slice(d, d, v.as_slice())
}

/// Runs `s` on `input`. The input register must contain every free qubit of `s`.
pub fn simulate(s: &Program, input: &DensityState, opts: &SimOptions) -> SemResult<SimOutcome> {
    let missing = s.qv().minus(&input.reg);
    if !missing.is_empty() {
        return Err(SemError::MissingQubits {
            reg: input.reg.clone(),
            missing,
        });
    }
    if !s.is_executable() {
        return Err(SemError::NotExecutable);
    }
    let mut sim = Simulator {
        opts,
        loops: Vec::new(),
        fresh: 0,
    };
    let rho = sim.run(s, &input.rho, &input.reg)?;
    Ok(SimOutcome {
        state: DensityState {
            reg: input.reg.clone(),
            rho,
        },
        loops: sim.loops,
    })
}

// ------------------------------------------------------------------ Kraus oracle

/// Explicit Kraus representation of loop-free executable programs, used to cross-check the
/// structural transformers.
pub mod oracle {
    use super::*;

    /// Re-derives a minimal Kraus list from the Choi matrix when the list grows past `d^2`.
    fn compress(ks: Vec<CMat>, d: usize) -> Vec<CMat> {
        if ks.len() <= d * d {
            return ks;
        }
        let n = d * d;
        let mut choi = CMat::zeros(n, n);
        for k in &ks {
            let v = CVec::from_iterator(n, k.iter().copied());
            choi += &v * v.adjoint();
        }
        let (vals, vecs) = linalg::hermitian_eigen(&choi);
        let top = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        vals.iter()
            .enumerate()
            .filter(|(_, &l)| l > 1e-14 * top.max(1.0))
            .map(|(j, &l)| {
                let col = vecs.column(j) * cr(l.sqrt());
                CMat::from_iterator(d, d, col.iter().copied())
            })
            .collect()
    }

    pub fn kraus(s: &Program, amb: &Register) -> SemResult<Vec<CMat>> {
        let d = amb.dim();
        let out = match s {
            Program::Abort => Vec::new(),
            Program::Skip => vec![linalg::identity(d)],
            Program::Init(r) => Semantics::reset_kraus(r, amb)?,
            Program::Unitary(u) => vec![u.extend_to(amb)?],
            Program::Assert(p) => vec![p.extend_to(amb)?.projector()],
            Program::Prescription(..) => return Err(SemError::NotExecutable),
            Program::Seq(a, b) => {
                let ka = kraus(a, amb)?;
                let kb = kraus(b, amb)?;
                let mut out = Vec::with_capacity(ka.len() * kb.len());
                for f in &kb {
                    for e in &ka {
                        out.push(f * e);
                    }
                }
                out
            }
            Program::PChoice(p, a, b) => {
                check_prob(*p)?;
                let mut out: Vec<CMat> =
                    kraus(a, amb)?.into_iter().map(|k| k.scale(p.sqrt())).collect();
                out.extend(kraus(b, amb)?.into_iter().map(|k| k.scale((1.0 - p).sqrt())));
                out
            }
            Program::If(g, a, b) => {
                let pg = g.extend_to(amb)?.projector();
                let pc = linalg::identity(d) - &pg;
                let mut out: Vec<CMat> = kraus(a, amb)?.into_iter().map(|k| k * &pg).collect();
                out.extend(kraus(b, amb)?.into_iter().map(|k| k * &pc));
                out
            }
            Program::While(..) => return Err(SemError::NotLoopFree),
            Program::Block(..) => return Err(SemError::BlockUnsupported),
        };
        Ok(compress(out, d))
    }

    /// `ker(sum E^dagger Q^perp E)`.
    pub fn wlp(lat: &Lattice, s: &Program, post: &Subspace, amb: &Register) -> SemResult<Subspace> {
        let qc = post.complement().projector();
        let d = amb.dim();
        let mut m = CMat::zeros(d, d);
        for e in kraus(s, amb)? {
            m += e.adjoint() * &qc * e;
        }
        Ok(lat.kernel_of(&m)?)
    }

    /// `supp(sum E P E^dagger)`.
    pub fn sp(lat: &Lattice, s: &Program, pre: &Subspace, amb: &Register) -> SemResult<Subspace> {
        let pp = pre.projector();
        let d = amb.dim();
        let mut m = CMat::zeros(d, d);
        for e in kraus(s, amb)? {
            m += &e * &pp * e.adjoint();
        }
        Ok(lat.support_of(&m)?)
    }
}
