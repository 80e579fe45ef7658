//! Named definitions, expression evaluation and resolution of program syntax into
//! [`Program`](crate::semantics::Program) values.

use std::fmt::Write as _;

use indexmap::IndexMap;
use num_complex::Complex64;
use thiserror::Error;

use crate::lang::{BinOp, Expr, Stmt, UnOp};
use crate::lattice::{Lattice, LatticeError, Subspace};
use crate::linalg::{self, c, cr, CMat, CVec};
use crate::qop::{gates, ket_bits, DensityState, LabelledOp, LabelledSpace, QopError, Register};
use crate::refine::SealedProof;
use crate::semantics::{Program, SemError, Semantics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown name `{0}`")]
    Unknown(String),
    #[error("`{0}` is already defined")]
    Redefined(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("refinement of < {pre}, {post} > is not valid")]
    InvalidRefinement { pre: String, post: String },
    #[error(transparent)]
    Qop(#[from] QopError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sem(#[from] SemError),
}

pub type EvalResult<T> = Result<T, EvalError>;

fn type_err<T>(msg: impl Into<String>) -> EvalResult<T> {
    Err(EvalError::Type(msg.into()))
}

/// Runtime values of the expression language.
#[derive(Debug, Clone)]
pub enum Value {
    Scalar(Complex64),
    Ket(CVec),
    Op { mat: CMat, reg: Option<Register> },
    Space { space: Subspace, reg: Option<Register> },
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Ket(_) => "ket",
            Value::Op { reg: None, .. } => "operator",
            Value::Op { .. } => "labelled operator",
            Value::Space { reg: None, .. } => "subspace",
            Value::Space { .. } => "labelled subspace",
        }
    }

    pub fn op(mat: CMat) -> Value {
        Value::Op { mat, reg: None }
    }

    pub fn space(space: Subspace) -> Value {
        Value::Space { space, reg: None }
    }

    pub fn register(&self) -> Option<&Register> {
        match self {
            Value::Op { reg, .. } | Value::Space { reg, .. } => reg.as_ref(),
            _ => None,
        }
    }

    pub fn is_labelled(&self) -> bool {
        self.register().is_some()
    }
}

#[derive(Debug, Clone)]
pub enum Definition {
    Value { value: Value, source: Expr },
    Program(Stmt),
    Proof(SealedProof),
    State { state: DensityState, program: Stmt, input: Expr },
}

impl Definition {
    pub fn kind(&self) -> &'static str {
        match self {
            Definition::Value { value, .. } => value.kind(),
            Definition::Program(_) => "program",
            Definition::Proof(_) => "proof",
            Definition::State { .. } => "state",
        }
    }
}

/// User definitions in insertion order plus a shadowable prelude of built-ins and
/// configuration-injected operators.
#[derive(Debug, Clone, Default)]
pub struct Environment {
    defs: IndexMap<String, Definition>,
    prelude: IndexMap<String, Value>,
}

impl Environment {
    pub fn new() -> Self {
        let mut prelude = IndexMap::new();
        let ops: [(&str, CMat); 13] = [
            ("I", gates::i()),
            ("X", gates::x()),
            ("Y", gates::y()),
            ("Z", gates::z()),
            ("H", gates::h()),
            ("S", gates::s()),
            ("CX", gates::cx()),
            ("CNOT", gates::cx()),
            ("CCX", gates::ccx()),
            ("TOF", gates::ccx()),
            ("B", gates::b()),
            ("c0", gates::c0()),
            ("c1", gates::c1()),
        ];
        for (n, m) in ops {
            prelude.insert(n.to_string(), Value::op(m));
        }
        let spaces: [(&str, Subspace); 5] = [
            ("P0", gates::p0()),
            ("P1", gates::p1()),
            ("Pp", gates::pplus()),
            ("P00", gates::p00()),
            ("Omega", gates::omega()),
        ];
        for (n, s) in spaces {
            prelude.insert(n.to_string(), Value::space(s));
        }
        prelude.insert("pi".into(), Value::Scalar(cr(std::f64::consts::PI)));
        Environment {
            defs: IndexMap::new(),
            prelude,
        }
    }

    /// Adds or replaces a prelude operator (used for configuration-injected matrices).
    pub fn inject(&mut self, name: &str, value: Value) {
        self.prelude.insert(name.to_string(), value);
    }

    pub fn define(&mut self, name: &str, def: Definition) -> EvalResult<()> {
        if self.defs.contains_key(name) {
            return Err(EvalError::Redefined(name.to_string()));
        }
        self.defs.insert(name.to_string(), def);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Definition> {
        self.defs.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.defs.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.defs.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Definition)> {
        self.defs.iter()
    }

    pub fn lookup_value(&self, name: &str) -> EvalResult<Value> {
        match self.defs.get(name) {
            Some(Definition::Value { value, .. }) => Ok(value.clone()),
            Some(Definition::State { state, .. }) => Ok(Value::Op {
                mat: state.rho.clone(),
                reg: Some(state.reg.clone()),
            }),
            Some(other) => type_err(format!("`{name}` is a {}, not an operator", other.kind())),
            None => self
                .prelude
                .get(name)
                .cloned()
                .ok_or_else(|| EvalError::Unknown(name.to_string())),
        }
    }
}

/// Evaluation context: environment plus numerical settings.
pub struct Evaluator<'a> {
    pub env: &'a Environment,
    pub lat: Lattice,
}

const UNITARY_TOL: f64 = 1e-8;

impl<'a> Evaluator<'a> {
    pub fn new(env: &'a Environment, lat: Lattice) -> Self {
        Evaluator { env, lat }
    }

    pub fn eval(&self, e: &Expr) -> EvalResult<Value> {
        match e {
            Expr::Number(x) => Ok(Value::Scalar(cr(*x))),
            Expr::Imag(x) => Ok(Value::Scalar(c(0.0, *x))),
            Expr::Ket(bits) => Ok(Value::Ket(ket_bits(bits))),
            Expr::Ident(n) | Expr::Iqopt(n) => self.env.lookup_value(n),
            Expr::Call(name, args) => self.call(name, args),
            Expr::Ray(inner) => match self.eval(inner)? {
                Value::Ket(v) if v.norm() > 0.0 => Ok(Value::space(gates::ray(&v))),
                Value::Ket(_) => type_err("ray of the zero vector"),
                other => type_err(format!("`[..]` expects a ket, found {}", other.kind())),
            },
            Expr::Unary(op, a) => self.unary(*op, self.eval(a)?),
            Expr::Binary(op, a, b) => self.binary(*op, self.eval(a)?, self.eval(b)?),
            Expr::Apply(inner, names) => {
                let reg = Register::new(names.iter().cloned())?;
                match self.eval(inner)? {
                    Value::Op { mat, reg: None } => {
                        let lo = LabelledOp::new(mat, reg)?;
                        Ok(Value::Op {
                            mat: lo.mat,
                            reg: Some(lo.reg),
                        })
                    }
                    Value::Space { space, reg: None } => {
                        let ls = LabelledSpace::new(space, reg)?;
                        Ok(Value::Space {
                            space: ls.space,
                            reg: Some(ls.reg),
                        })
                    }
                    Value::Scalar(z) if names.is_empty() => Ok(Value::Op {
                        mat: CMat::from_element(1, 1, z),
                        reg: Some(reg),
                    }),
                    other => type_err(format!("cannot attach a register to a {}", other.kind())),
                }
            }
        }
    }

    fn scalar(&self, e: &Expr) -> EvalResult<Complex64> {
        match self.eval(e)? {
            Value::Scalar(z) => Ok(z),
            other => type_err(format!("expected a scalar, found {}", other.kind())),
        }
    }

    fn real(&self, e: &Expr) -> EvalResult<f64> {
        let z = self.scalar(e)?;
        if z.im.abs() > 1e-12 {
            return type_err("expected a real number");
        }
        Ok(z.re)
    }

    fn call(&self, name: &str, args: &[Expr]) -> EvalResult<Value> {
        if args.len() != 1 {
            return type_err(format!("`{name}` takes one argument"));
        }
        let z = self.scalar(&args[0])?;
        let real = |z: Complex64| -> EvalResult<f64> {
            if z.im.abs() > 1e-12 {
                type_err(format!("`{name}` expects a real argument"))
            } else {
                Ok(z.re)
            }
        };
        Ok(match name {
            "Rz" => Value::op(gates::rz(real(z)?)),
            "Uc" => Value::op(gates::uc(z)),
            "sqrt" => Value::Scalar(z.sqrt()),
            "exp" => Value::Scalar(z.exp()),
            "cos" => Value::Scalar(z.cos()),
            "sin" => Value::Scalar(z.sin()),
            "acos" => Value::Scalar(cr(real(z)?.acos())),
            "asin" => Value::Scalar(cr(real(z)?.asin())),
            "atan" => Value::Scalar(cr(real(z)?.atan())),
            _ => return Err(EvalError::Unknown(format!("{name}(..)"))),
        })
    }

    fn unary(&self, op: UnOp, v: Value) -> EvalResult<Value> {
        Ok(match (op, v) {
            (UnOp::Neg, Value::Scalar(z)) => Value::Scalar(-z),
            (UnOp::Neg, Value::Ket(k)) => Value::Ket(-k),
            (UnOp::Neg, v @ (Value::Op { .. } | Value::Space { .. })) => {
                let (mat, reg) = self.as_op(v)?;
                Value::Op { mat: -mat, reg }
            }
            (UnOp::Dagger, Value::Scalar(z)) => Value::Scalar(z.conj()),
            (UnOp::Dagger, Value::Op { mat, reg }) => Value::Op {
                mat: mat.adjoint(),
                reg,
            },
            (UnOp::Dagger, s @ Value::Space { .. }) => s,
            (UnOp::Perp, v @ (Value::Op { .. } | Value::Space { .. })) => {
                let (space, reg) = self.as_space(v)?;
                Value::Space {
                    space: space.complement(),
                    reg,
                }
            }
            (op, v) => return type_err(format!("{op:?} is not defined on a {}", v.kind())),
        })
    }

    /// Interprets an operator or subspace value as a matrix.
    pub fn as_op(&self, v: Value) -> EvalResult<(CMat, Option<Register>)> {
        match v {
            Value::Op { mat, reg } => Ok((mat, reg)),
            Value::Space { space, reg } => Ok((space.projector(), reg)),
            other => type_err(format!("expected an operator, found {}", other.kind())),
        }
    }

    /// Interprets a value as a predicate: subspaces as-is, positive semidefinite Hermitian
    /// matrices by their support.
    pub fn as_space(&self, v: Value) -> EvalResult<(Subspace, Option<Register>)> {
        match v {
            Value::Space { space, reg } => Ok((space, reg)),
            Value::Op { mat, reg } => {
                if !linalg::is_hermitian(&mat, 1e-9) {
                    return type_err("a non-Hermitian operator cannot be used as a predicate");
                }
                let scale = linalg::max_abs(&mat).max(1.0);
                if linalg::min_eigenvalue(&mat) < -1e-9 * scale {
                    return type_err("an operator with negative eigenvalues cannot be used as a predicate");
                }
                Ok((self.lat.support_of(&mat)?, reg))
            }
            other => type_err(format!("expected a predicate, found {}", other.kind())),
        }
    }

    /// Brings two register-carrying operands onto a common register (left order first).
    fn align_ops(
        &self,
        a: (CMat, Option<Register>),
        b: (CMat, Option<Register>),
    ) -> EvalResult<(CMat, CMat, Option<Register>)> {
        match (a, b) {
            ((ma, None), (mb, None)) => {
                if ma.nrows() != mb.nrows() {
                    return type_err(format!(
                        "dimension mismatch: {} vs {}",
                        ma.nrows(),
                        mb.nrows()
                    ));
                }
                Ok((ma, mb, None))
            }
            ((ma, Some(ra)), (mb, Some(rb))) => {
                let u = ra.union(&rb);
                let ea = crate::qop::extend_matrix(&ma, &ra, &u)?;
                let eb = crate::qop::extend_matrix(&mb, &rb, &u)?;
                Ok((ea, eb, Some(u)))
            }
            _ => type_err("cannot combine labelled and unlabelled operators"),
        }
    }

    fn align_spaces(
        &self,
        a: (Subspace, Option<Register>),
        b: (Subspace, Option<Register>),
    ) -> EvalResult<(Subspace, Subspace, Option<Register>)> {
        match (a, b) {
            ((sa, None), (sb, None)) => {
                if sa.dim() != sb.dim() {
                    return type_err(format!("dimension mismatch: {} vs {}", sa.dim(), sb.dim()));
                }
                Ok((sa, sb, None))
            }
            ((sa, Some(ra)), (sb, Some(rb))) => {
                let u = ra.union(&rb);
                let ea = crate::qop::extend_subspace(&sa, &ra, &u)?;
                let eb = crate::qop::extend_subspace(&sb, &rb, &u)?;
                Ok((ea, eb, Some(u)))
            }
            _ => type_err("cannot combine labelled and unlabelled predicates"),
        }
    }

    fn binary(&self, op: BinOp, a: Value, b: Value) -> EvalResult<Value> {
        use Value::*;
        match op {
            BinOp::Join | BinOp::Meet | BinOp::Implies | BinOp::Conjunct => {
                let (sa, sb, reg) = self.align_spaces(self.as_space(a)?, self.as_space(b)?)?;
                let lat = &self.lat;
                let space = match op {
                    BinOp::Join => lat.join(&sa, &sb)?,
                    BinOp::Meet => lat.meet(&sa, &sb)?,
                    BinOp::Implies => lat.implies(&sa, &sb)?,
                    _ => lat.conjunct(&sa, &sb)?,
                };
                return Ok(Space { space, reg });
            }
            _ => {}
        }
        Ok(match (op, a, b) {
            (BinOp::Add, Scalar(x), Scalar(y)) => Scalar(x + y),
            (BinOp::Sub, Scalar(x), Scalar(y)) => Scalar(x - y),
            (BinOp::Mul, Scalar(x), Scalar(y)) => Scalar(x * y),
            (BinOp::Div, Scalar(x), Scalar(y)) => {
                if y.norm() == 0.0 {
                    return type_err("division by zero");
                }
                Scalar(x / y)
            }
            (BinOp::Add, Ket(x), Ket(y)) if x.len() == y.len() => Ket(x + y),
            (BinOp::Sub, Ket(x), Ket(y)) if x.len() == y.len() => Ket(x - y),
            (BinOp::Mul, Scalar(z), Ket(k)) => Ket(k * z),
            (BinOp::Div, Ket(k), Scalar(z)) if z.norm() > 0.0 => Ket(k / z),
            (BinOp::Tensor, Ket(x), Ket(y)) => Ket(x.kronecker(&y)),
            (BinOp::Mul, Scalar(z), v @ (Op { .. } | Space { .. })) => {
                let (m, reg) = self.as_op(v)?;
                Op { mat: m * z, reg }
            }
            (BinOp::Mul | BinOp::Div, v @ (Op { .. } | Space { .. }), Scalar(z)) => {
                let (m, reg) = self.as_op(v)?;
                let z = if op == BinOp::Div {
                    if z.norm() == 0.0 {
                        return type_err("division by zero");
                    }
                    cr(1.0) / z
                } else {
                    z
                };
                Op { mat: m * z, reg }
            }
            (BinOp::Tensor, Space { space: sa, reg: ra }, Space { space: sb, reg: rb }) => {
                let reg = tensor_register(ra, rb)?;
                Space {
                    space: sa.tensor(&sb),
                    reg,
                }
            }
            (BinOp::Tensor, a @ (Op { .. } | Space { .. }), b @ (Op { .. } | Space { .. })) => {
                let (ma, ra) = self.as_op(a)?;
                let (mb, rb) = self.as_op(b)?;
                Op {
                    mat: linalg::kron(&ma, &mb),
                    reg: tensor_register(ra, rb)?,
                }
            }
            (
                BinOp::Add | BinOp::Sub | BinOp::Mul,
                a @ (Op { .. } | Space { .. }),
                b @ (Op { .. } | Space { .. }),
            ) => {
                let (ma, mb, reg) = self.align_ops(self.as_op(a)?, self.as_op(b)?)?;
                let mat = match op {
                    BinOp::Add => ma + mb,
                    BinOp::Sub => ma - mb,
                    _ => ma * mb,
                };
                Op { mat, reg }
            }
            (op, a, b) => {
                return type_err(format!(
                    "`{}` is not defined on {} and {}",
                    op.symbol(),
                    a.kind(),
                    b.kind()
                ))
            }
        })
    }

    /// Evaluates a labelled predicate.
    pub fn labelled_space(&self, e: &Expr) -> EvalResult<LabelledSpace> {
        match self.as_space(self.eval(e)?)? {
            (space, Some(reg)) => Ok(LabelledSpace::new(space, reg)?),
            (_, None) => type_err(format!("predicate `{e}` needs a qubit register")),
        }
    }

    /// Evaluates a labelled unitary.
    pub fn labelled_unitary(&self, e: &Expr) -> EvalResult<LabelledOp> {
        match self.eval(e)? {
            Value::Op { mat, reg: Some(reg) } => {
                if !linalg::is_unitary(&mat, UNITARY_TOL) {
                    return type_err(format!("`{e}` is not unitary"));
                }
                Ok(LabelledOp::new(mat, reg)?)
            }
            other => type_err(format!("`{e}` must be a labelled unitary, found {}", other.kind())),
        }
    }

    /// Resolves program syntax, inlining procedures and checking `Refined` nodes.
    pub fn compile(&self, s: &Stmt) -> EvalResult<Program> {
        let b = |s: &Stmt| -> EvalResult<Box<Program>> { Ok(Box::new(self.compile(s)?)) };
        Ok(match s {
            Stmt::Abort => Program::Abort,
            Stmt::Skip => Program::Skip,
            Stmt::Init(r) => Program::Init(Register::new(r.iter().cloned())?),
            Stmt::Unitary(e) => Program::Unitary(self.labelled_unitary(e)?),
            Stmt::Assert(e) => Program::Assert(self.labelled_space(e)?),
            Stmt::Prescription(p, q) => {
                Program::Prescription(self.labelled_space(p)?, self.labelled_space(q)?)
            }
            Stmt::Seq(x, y) => Program::Seq(b(x)?, b(y)?),
            Stmt::PChoice(x, p, y) => {
                let p = self.real(p)?;
                if !(p > 0.0 && p < 1.0) {
                    return Err(SemError::BadProbability(p).into());
                }
                Program::PChoice(p, b(x)?, b(y)?)
            }
            Stmt::If(g, x, y) => Program::If(self.labelled_space(g)?, b(x)?, b(y)?),
            Stmt::While(g, body) => Program::While(self.labelled_space(g)?, b(body)?),
            Stmt::RepeatUntil(body, g) => {
                Program::repeat_until(self.compile(body)?, &self.labelled_space(g)?)
            }
            Stmt::Block(locals, body) => {
                Program::Block(Register::new(locals.iter().cloned())?, b(body)?)
            }
            Stmt::Proc(name) => match self.env.get(name) {
                Some(Definition::Program(p)) => self.compile(p)?,
                Some(Definition::Proof(pf)) => self.compile(&pf.extract())?,
                Some(other) => {
                    return type_err(format!("`{name}` is a {}, not a program", other.kind()))
                }
                None => return Err(EvalError::Unknown(name.clone())),
            },
            Stmt::Refined(p, q, body) => {
                let prog = self.compile(body)?;
                let pre = self.labelled_space(p)?;
                let post = self.labelled_space(q)?;
                let sem = Semantics::new(self.lat);
                if !sem.hoare_valid(&pre, &prog, &post)?.valid {
                    return Err(EvalError::InvalidRefinement {
                        pre: p.to_string(),
                        post: q.to_string(),
                    });
                }
                prog
            }
        })
    }
}

fn tensor_register(a: Option<Register>, b: Option<Register>) -> EvalResult<Option<Register>> {
    match (a, b) {
        (None, None) => Ok(None),
        (Some(a), Some(b)) => {
            if !a.is_disjoint(&b) {
                return Err(QopError::Overlap(a, b).into());
            }
            Ok(Some(a.union(&b)))
        }
        _ => type_err("cannot tensor labelled and unlabelled operators"),
    }
}

fn fmt_complex(z: Complex64) -> String {
    let clean = |x: f64| {
        let r = (x * 1e6).round() / 1e6;
        if r == 0.0 {
            0.0
        } else {
            r
        }
    };
    let (re, im) = (clean(z.re), clean(z.im));
    match (re == 0.0, im == 0.0) {
        (_, true) => format!("{re}"),
        (true, false) => format!("{im}i"),
        (false, false) if im < 0.0 => format!("{re}-{}i", -im),
        _ => format!("{re}+{im}i"),
    }
}

/// Matrix rendering with entries rounded to six decimals.
pub fn format_matrix(m: &CMat) -> String {
    let cells: Vec<Vec<String>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| fmt_complex(m[(i, j)])).collect())
        .collect();
    let width = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
    let mut out = String::new();
    for row in cells {
        out.push('[');
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{cell:>width$}");
        }
        out.push_str("]\n");
    }
    out
}

pub fn format_value(v: &Value) -> String {
    let reg = |r: &Option<Register>| r.as_ref().map(|r| format!(" on {r}")).unwrap_or_default();
    match v {
        Value::Scalar(z) => format!("scalar {}\n", fmt_complex(*z)),
        Value::Ket(k) => {
            let m = CMat::from_iterator(k.len(), 1, k.iter().copied());
            format!("ket\n{}", format_matrix(&m))
        }
        Value::Op { mat, reg: r } => format!(
            "operator {}x{}{}\n{}",
            mat.nrows(),
            mat.ncols(),
            reg(r),
            format_matrix(mat)
        ),
        Value::Space { space, reg: r } => format!(
            "subspace of rank {} in dimension {}{}, projector\n{}",
            space.rank(),
            space.dim(),
            reg(r),
            format_matrix(&space.projector())
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_expr;

    fn ev(env: &Environment, s: &str) -> EvalResult<Value> {
        Evaluator::new(env, Lattice::default()).eval(&parse_expr(s).unwrap())
    }

    #[test]
    fn scaled_ray_coerces_to_its_support() {
        let env = Environment::new();
        let ev_ = Evaluator::new(&env, Lattice::default());
        let v = ev(&env, "0.5 [|0000⟩ + |1111⟩]").unwrap();
        let (s, _) = ev_.as_space(v).unwrap();
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn labelled_algebra_uses_union_register() {
        let env = Environment::new();
        let v = ev(&env, "P00[q0 q1] * Omega[t t']").unwrap();
        let r = v.register().unwrap().clone();
        assert_eq!(r, Register::new(["q0", "q1", "t", "t'"]).unwrap());
        let ev_ = Evaluator::new(&env, Lattice::default());
        assert_eq!(ev_.as_space(v).unwrap().0.rank(), 1);
    }

    #[test]
    fn complement_and_lattice_ops() {
        let env = Environment::new();
        let v = ev(&env, "P00^⊥").unwrap();
        assert!(matches!(v, Value::Space { ref space, reg: None } if space.rank() == 3));
        let v = ev(&env, "P00[p q] ∧ Pp[p]").unwrap();
        assert!(matches!(v, Value::Space { ref space, .. } if space.is_zero()));
    }

    #[test]
    fn type_errors() {
        let env = Environment::new();
        assert!(matches!(ev(&env, "X + X[q]"), Err(EvalError::Type(_))));
        assert!(matches!(ev(&env, "X[q] ⊗ Y[q]"), Err(EvalError::Qop(_))));
        assert!(matches!(ev(&env, "Nope"), Err(EvalError::Unknown(_))));
        assert!(matches!(ev(&env, "X[p q]"), Err(EvalError::Qop(_))));
        let ev_ = Evaluator::new(&env, Lattice::default());
        assert!(ev_.as_space(ev(&env, "-P0").unwrap()).is_err());
        assert!(ev_.as_space(ev(&env, "X * P0").unwrap()).is_err());
    }

    #[test]
    fn unitary_check_in_programs() {
        let env = Environment::new();
        let ev_ = Evaluator::new(&env, Lattice::default());
        assert!(ev_.compile(&crate::lang::parse_stmt("H[q]; CX[q p]").unwrap()).is_ok());
        assert!(ev_.compile(&crate::lang::parse_stmt("P0[q]").unwrap()).is_err());
        assert!(ev_.compile(&crate::lang::parse_stmt("(skip [1.5 ⊕] abort)").unwrap()).is_err());
    }

    #[test]
    fn refined_nodes_are_checked() {
        let env = Environment::new();
        let ev_ = Evaluator::new(&env, Lattice::default());
        let ok = crate::lang::parse_stmt("< P0[q], P1[q] > <= X[q]").unwrap();
        assert!(ev_.compile(&ok).is_ok());
        let bad = crate::lang::parse_stmt("< P0[q], P1[q] > <= skip").unwrap();
        assert!(matches!(ev_.compile(&bad), Err(EvalError::InvalidRefinement { .. })));
    }
}
