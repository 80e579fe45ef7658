//! Registers, labelled operators and subspaces, the built-in gate library and density states.
//!
//! Qubit order inside a register fixes the tensor order: the first qubit is the most
//! significant bit of a computational basis index.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Lattice, LatticeError, Subspace};
use crate::linalg::{self, c, cr, CMat, CVec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QopError {
    #[error("duplicate qubit `{0}` in register")]
    DuplicateQubit(String),
    #[error("register {reg} does not contain {sub}")]
    NotSubregister { sub: Register, reg: Register },
    #[error("operator of dimension {dim} does not fit register {reg} (needs {need})")]
    ArityMismatch {
        reg: Register,
        dim: usize,
        need: usize,
    },
    #[error("registers {0} and {1} overlap")]
    Overlap(Register, Register),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Ordered, duplicate-free list of qubit names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Register(Vec<String>);

impl Register {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, QopError> {
        let mut out: Vec<String> = Vec::new();
        for n in names {
            let n = n.into();
            if out.contains(&n) {
                return Err(QopError::DuplicateQubit(n));
            }
            out.push(n);
        }
        Ok(Register(out))
    }

    pub fn empty() -> Self {
        Register(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        1usize << self.0.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn contains(&self, q: &str) -> bool {
        self.0.iter().any(|x| x == q)
    }

    pub fn index_of(&self, q: &str) -> Option<usize> {
        self.0.iter().position(|x| x == q)
    }

    pub fn is_subset_of(&self, other: &Register) -> bool {
        self.0.iter().all(|q| other.contains(q))
    }

    pub fn is_disjoint(&self, other: &Register) -> bool {
        self.0.iter().all(|q| !other.contains(q))
    }

    /// Ordered union: qubits of `self` first, then new qubits of `other` in their order.
    pub fn union(&self, other: &Register) -> Register {
        let mut out = self.0.clone();
        for q in &other.0 {
            if !out.contains(q) {
                out.push(q.clone());
            }
        }
        Register(out)
    }

    pub fn minus(&self, other: &Register) -> Register {
        Register(
            self.0
                .iter()
                .filter(|q| !other.contains(q))
                .cloned()
                .collect(),
        )
    }

    pub fn push(&mut self, q: &str) -> Result<(), QopError> {
        if self.contains(q) {
            return Err(QopError::DuplicateQubit(q.to_string()));
        }
        self.0.push(q.to_string());
        Ok(())
    }

    /// For every basis index of `ambient`, the basis index of the `self` factor and of the
    /// complementary factor (in ambient order).
    fn split_indices(&self, ambient: &Register) -> Result<Vec<(usize, usize)>, QopError> {
        if !self.is_subset_of(ambient) {
            return Err(QopError::NotSubregister {
                sub: self.clone(),
                reg: ambient.clone(),
            });
        }
        let n = ambient.len();
        let pos: Vec<usize> = self
            .0
            .iter()
            .map(|q| ambient.index_of(q).expect("subset checked"))
            .collect();
        let rest: Vec<usize> = (0..n).filter(|i| !pos.contains(i)).collect();
        let bit = |x: usize, i: usize| (x >> (n - 1 - i)) & 1;
        Ok((0..(1usize << n))
            .map(|x| {
                let a = pos.iter().fold(0, |acc, &i| (acc << 1) | bit(x, i));
                let b = rest.iter().fold(0, |acc, &i| (acc << 1) | bit(x, i));
                (a, b)
            })
            .collect())
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(" "))
    }
}

fn check_arity(m: &CMat, reg: &Register) -> Result<(), QopError> {
    if m.nrows() != reg.dim() || m.ncols() != reg.dim() {
        return Err(QopError::ArityMismatch {
            reg: reg.clone(),
            dim: m.nrows(),
            need: reg.dim(),
        });
    }
    Ok(())
}

/// `op (x) I` on `ambient`, where `op` acts on the qubits of `reg`.
pub fn extend_matrix(op: &CMat, reg: &Register, ambient: &Register) -> Result<CMat, QopError> {
    check_arity(op, reg)?;
    if reg == ambient {
        return Ok(op.clone());
    }
    let idx = reg.split_indices(ambient)?;
    let d = ambient.dim();
    let mut out = CMat::zeros(d, d);
    for (i, &(ai, bi)) in idx.iter().enumerate() {
        for (j, &(aj, bj)) in idx.iter().enumerate() {
            if bi == bj {
                out[(i, j)] = op[(ai, aj)];
            }
        }
    }
    Ok(out)
}

/// Cylindrical extension `S (x) I` of a subspace over `reg` to `ambient`.
pub fn extend_subspace(
    s: &Subspace,
    reg: &Register,
    ambient: &Register,
) -> Result<Subspace, QopError> {
    if s.dim() != reg.dim() {
        return Err(QopError::ArityMismatch {
            reg: reg.clone(),
            dim: s.dim(),
            need: reg.dim(),
        });
    }
    if reg == ambient {
        return Ok(s.clone());
    }
    let idx = reg.split_indices(ambient)?;
    let rest = ambient.dim() / reg.dim();
    let r = s.rank();
    let d = ambient.dim();
    let mut basis = CMat::zeros(d, r * rest);
    for (i, &(a, b)) in idx.iter().enumerate() {
        for k in 0..r {
            basis[(i, k * rest + b)] = s.basis()[(a, k)];
        }
    }
    Ok(Subspace::from_basis_unchecked(basis))
}

/// Partial trace of `rho` (over `ambient`) keeping only the qubits of `keep`, in `keep` order.
pub fn partial_trace(rho: &CMat, ambient: &Register, keep: &Register) -> Result<CMat, QopError> {
    check_arity(rho, ambient)?;
    let idx = keep.split_indices(ambient)?;
    let dk = keep.dim();
    let mut out = CMat::zeros(dk, dk);
    for (i, &(ai, bi)) in idx.iter().enumerate() {
        for (j, &(aj, bj)) in idx.iter().enumerate() {
            if bi == bj {
                out[(ai, aj)] += rho[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Reorders the tensor factors of an operator on `from` into the order of `to` (same qubit set).
pub fn reorder_matrix(m: &CMat, from: &Register, to: &Register) -> Result<CMat, QopError> {
    if from.len() != to.len() {
        return Err(QopError::NotSubregister {
            sub: from.clone(),
            reg: to.clone(),
        });
    }
    extend_matrix(m, from, to)
}

/// Computational basis vector for a bit string such as `"0110"`.
pub fn ket_bits(bits: &str) -> CVec {
    let n = bits.len();
    let idx = bits
        .chars()
        .fold(0usize, |acc, ch| (acc << 1) | usize::from(ch == '1'));
    let mut v = CVec::zeros(1 << n);
    v[idx] = cr(1.0);
    v
}

/// Operator with a qubit register attached.
#[derive(Debug, Clone)]
pub struct LabelledOp {
    pub reg: Register,
    pub mat: CMat,
}

impl LabelledOp {
    pub fn new(mat: CMat, reg: Register) -> Result<Self, QopError> {
        check_arity(&mat, &reg)?;
        Ok(LabelledOp { reg, mat })
    }

    pub fn extend_to(&self, ambient: &Register) -> Result<CMat, QopError> {
        extend_matrix(&self.mat, &self.reg, ambient)
    }
}

/// Subspace with a qubit register attached.
#[derive(Debug, Clone)]
pub struct LabelledSpace {
    pub reg: Register,
    pub space: Subspace,
}

impl LabelledSpace {
    pub fn new(space: Subspace, reg: Register) -> Result<Self, QopError> {
        if space.dim() != reg.dim() {
            return Err(QopError::ArityMismatch {
                reg,
                dim: space.dim(),
                need: 0,
            });
        }
        Ok(LabelledSpace { reg, space })
    }

    pub fn extend_to(&self, ambient: &Register) -> Result<Subspace, QopError> {
        extend_subspace(&self.space, &self.reg, ambient)
    }
}

/// Density operator over a register.
#[derive(Debug, Clone)]
pub struct DensityState {
    pub reg: Register,
    pub rho: CMat,
}

impl DensityState {
    pub fn new(rho: CMat, reg: Register) -> Result<Self, QopError> {
        check_arity(&rho, &reg)?;
        Ok(DensityState { reg, rho })
    }

    pub fn pure(psi: &CVec, reg: Register) -> Result<Self, QopError> {
        let n = psi.norm();
        let v = psi.unscale(n);
        Self::new(&v * v.adjoint(), reg)
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.rho).re
    }

    /// Tensors `|0..0><0..0|` on the qubits of `extra` not already present.
    pub fn pad_zero(&self, extra: &Register) -> DensityState {
        let fresh = extra.minus(&self.reg);
        if fresh.is_empty() {
            return self.clone();
        }
        let k = fresh.dim();
        let mut z = CMat::zeros(k, k);
        z[(0, 0)] = cr(1.0);
        DensityState {
            reg: self.reg.union(&fresh),
            rho: linalg::kron(&self.rho, &z),
        }
    }

    pub fn reduce_to(&self, keep: &Register) -> Result<DensityState, QopError> {
        Ok(DensityState {
            reg: keep.clone(),
            rho: partial_trace(&self.rho, &self.reg, keep)?,
        })
    }

    /// Trace of `P rho` for a subspace `P` given on a subregister.
    pub fn weight(&self, p: &LabelledSpace) -> Result<f64, QopError> {
        let proj = p.extend_to(&self.reg)?.projector();
        Ok(linalg::trace(&(proj * &self.rho)).re)
    }
}

/// Built-in gates, constants and projectors.
pub mod gates {
    use super::*;

    fn m(n: usize, xs: &[Complex64]) -> CMat {
        CMat::from_row_slice(n, n, xs)
    }

    pub fn i() -> CMat {
        linalg::identity(2)
    }

    pub fn x() -> CMat {
        m(2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
    }

    pub fn y() -> CMat {
        m(2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
    }

    pub fn z() -> CMat {
        m(2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
    }

    pub fn h() -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        m(2, &[cr(s), cr(s), cr(s), cr(-s)])
    }

    pub fn s() -> CMat {
        m(2, &[cr(1.0), cr(0.0), cr(0.0), c(0.0, 1.0)])
    }

    /// Controlled-X with the first qubit as control.
    pub fn cx() -> CMat {
        let mut u = linalg::identity(4);
        u[(2, 2)] = cr(0.0);
        u[(3, 3)] = cr(0.0);
        u[(2, 3)] = cr(1.0);
        u[(3, 2)] = cr(1.0);
        u
    }

    /// Toffoli with the first two qubits as controls.
    pub fn ccx() -> CMat {
        let mut u = linalg::identity(8);
        u[(6, 6)] = cr(0.0);
        u[(7, 7)] = cr(0.0);
        u[(6, 7)] = cr(1.0);
        u[(7, 6)] = cr(1.0);
        u
    }

    /// `diag(e^{-i theta/2}, e^{i theta/2})`.
    pub fn rz(theta: f64) -> CMat {
        let h = theta / 2.0;
        m(
            2,
            &[Complex64::from_polar(1.0, -h), cr(0.0), cr(0.0), Complex64::from_polar(1.0, h)],
        )
    }

    /// Unitary sending `|0>` to a state proportional to `c|0> + |1>`.
    pub fn uc(cc: Complex64) -> CMat {
        let n = 1.0 / (1.0 + cc.norm_sqr()).sqrt();
        m(2, &[cc * n, cr(n), cr(n), -cc.conj() * n])
    }

    /// Two-qubit beam-splitter mixing `|01>` and `|10>`.
    pub fn b() -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut u = linalg::identity(4);
        u[(1, 1)] = cr(s);
        u[(1, 2)] = cr(s);
        u[(2, 1)] = cr(s);
        u[(2, 2)] = cr(-s);
        u
    }

    /// `1x1` zero and identity.
    pub fn c0() -> CMat {
        CMat::zeros(1, 1)
    }

    pub fn c1() -> CMat {
        linalg::identity(1)
    }

    pub fn ray(v: &CVec) -> Subspace {
        let n = v.norm();
        let mut b = CMat::zeros(v.len(), 1);
        b.set_column(0, &v.unscale(n));
        Subspace::from_basis_unchecked(b)
    }

    pub fn p0() -> Subspace {
        ray(&ket_bits("0"))
    }

    pub fn p1() -> Subspace {
        ray(&ket_bits("1"))
    }

    pub fn pplus() -> Subspace {
        ray(&(ket_bits("0") + ket_bits("1")))
    }

    pub fn p00() -> Subspace {
        ray(&ket_bits("00"))
    }

    /// Maximally entangled two-qubit state `(|00> + |11>)/sqrt 2`.
    pub fn omega_vec() -> CVec {
        (ket_bits("00") + ket_bits("11")).unscale(2f64.sqrt())
    }

    pub fn omega() -> Subspace {
        ray(&omega_vec())
    }

    /// Support of `P` in the lattice sense, for convenience in tests.
    pub fn support(m: &CMat) -> Result<Subspace, LatticeError> {
        Lattice::default().support_of(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(xs: &[&str]) -> Register {
        Register::new(xs.iter().copied()).unwrap()
    }

    #[test]
    fn union_keeps_left_order() {
        let u = reg(&["t", "q"]).union(&reg(&["q", "a", "t", "b"]));
        assert_eq!(u, reg(&["t", "q", "a", "b"]));
        assert!(Register::new(["a", "a"]).is_err());
    }

    #[test]
    fn extend_cx_reversed() {
        // CX[q1 q0] on [q0 q1] is CX with control on the second qubit.
        let e = extend_matrix(&gates::cx(), &reg(&["q1", "q0"]), &reg(&["q0", "q1"])).unwrap();
        let v = e * ket_bits("01");
        assert!((v - ket_bits("11")).norm() < 1e-15);
    }

    #[test]
    fn extend_single_qubit_in_middle() {
        let e = extend_matrix(&gates::x(), &reg(&["b"]), &reg(&["a", "b", "c"])).unwrap();
        let expected = linalg::kron(&linalg::kron(&gates::i(), &gates::x()), &gates::i());
        assert!(linalg::max_abs(&(e - expected)) < 1e-15);
    }

    #[test]
    fn subspace_extension_matches_projector_extension() {
        let s = gates::omega();
        let r = reg(&["b", "d"]);
        let amb = reg(&["a", "b", "c", "d"]);
        let es = extend_subspace(&s, &r, &amb).unwrap();
        let ep = extend_matrix(&s.projector(), &r, &amb).unwrap();
        assert!(linalg::max_abs(&(es.projector() - ep)) < 1e-14);
        assert_eq!(es.rank(), 4);
    }

    #[test]
    fn partial_trace_of_bell_is_mixed() {
        let rho = gates::omega().projector();
        let r = partial_trace(&rho, &reg(&["a", "b"]), &reg(&["b"])).unwrap();
        assert!((r[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(r[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn gate_unitarity() {
        for u in [
            gates::x(),
            gates::y(),
            gates::z(),
            gates::h(),
            gates::s(),
            gates::cx(),
            gates::ccx(),
            gates::b(),
            gates::rz(0.3),
            gates::uc(c(0.4, -1.2)),
        ] {
            assert!(linalg::is_unitary(&u, 1e-12));
        }
    }

    #[test]
    fn uc_prepares_ratio_state() {
        let cc = c(2.0, 0.5);
        let v = gates::uc(cc) * ket_bits("0");
        assert!((v[0] / v[1] - cc).norm() < 1e-12);
    }

    #[test]
    fn out_of_register_is_error() {
        assert!(extend_matrix(&gates::x(), &reg(&["z"]), &reg(&["a"])).is_err());
        assert!(extend_matrix(&gates::cx(), &reg(&["a"]), &reg(&["a"])).is_err());
    }
}
