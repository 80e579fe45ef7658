//! Closed subspaces of a finite-dimensional Hilbert space and their orthomodular lattice.
//!
//! A [`Subspace`] stores an orthonormal basis as the columns of a `d x r` matrix. All
//! numerical decisions (rank cut-offs, inclusion, eigenvalue-one selection) go through a
//! [`Tolerances`] record carried by the [`Lattice`] context.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMat, CVec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative singular/eigen value cut-off deciding numerical rank.
    pub rank: f64,
    /// Allowed defect when accepting a basis as orthonormal.
    pub ortho: f64,
    /// Maximum residual `|(I - Q) b|` for `b` in a basis of `P` when testing `P <= Q`.
    pub incl: f64,
    /// Eigenvalue window around 1 used by [`Lattice::eigenspace_one`].
    pub eig1: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-9,
            ortho: 1e-10,
            incl: 1e-7,
            eig1: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("cannot infer ambient dimension from an empty spanning set")]
    EmptySpanning,
    #[error("basis columns are not orthonormal (defect {0:.3e})")]
    NotOrthonormal(f64),
}

#[derive(Debug, Clone)]
pub struct Subspace {
    dim: usize,
    basis: CMat,
}

impl Subspace {
    pub fn zero(dim: usize) -> Self {
        Subspace {
            dim,
            basis: CMat::zeros(dim, 0),
        }
    }

    pub fn full(dim: usize) -> Self {
        Subspace {
            dim,
            basis: linalg::identity(dim),
        }
    }

    /// Accepts `basis` if its columns are orthonormal within `tol`.
    pub fn from_orthonormal(basis: CMat, tol: f64) -> Result<Self, LatticeError> {
        let r = basis.ncols();
        let defect = linalg::max_abs(&(basis.adjoint() * &basis - linalg::identity(r)));
        if defect > tol {
            return Err(LatticeError::NotOrthonormal(defect));
        }
        Ok(Subspace {
            dim: basis.nrows(),
            basis,
        })
    }

    /// Trusted constructor; callers guarantee orthonormal columns.
    pub(crate) fn from_basis_unchecked(basis: CMat) -> Self {
        Subspace {
            dim: basis.nrows(),
            basis,
        }
    }

    /// Span of the given vectors with an SVD rank cut-off relative to the largest singular value.
    pub fn from_spanning(
        vectors: &[CVec],
        dim: Option<usize>,
        tol: &Tolerances,
    ) -> Result<Self, LatticeError> {
        let d = match (vectors.first(), dim) {
            (Some(v), Some(d)) if v.len() != d => {
                return Err(LatticeError::DimensionMismatch {
                    left: d,
                    right: v.len(),
                })
            }
            (Some(v), _) => v.len(),
            (None, Some(d)) => return Ok(Subspace::zero(d)),
            (None, None) => return Err(LatticeError::EmptySpanning),
        };
        let mut m = CMat::zeros(d, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != d {
                return Err(LatticeError::DimensionMismatch {
                    left: d,
                    right: v.len(),
                });
            }
            m.set_column(j, v);
        }
        Ok(Self::span_of_columns(&m, tol.rank))
    }

    /// Column span of `m` using a relative singular value cut-off.
    pub(crate) fn span_of_columns(m: &CMat, rel_tol: f64) -> Self {
        let d = m.nrows();
        if m.ncols() == 0 || d == 0 {
            return Subspace::zero(d);
        }
        let (u, sv, _) = linalg::thin_svd(m);
        let smax = sv.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return Subspace::zero(d);
        }
        let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > rel_tol * smax).collect();
        Subspace::from_basis_unchecked(linalg::select_columns(&u, &keep))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.dim
    }

    /// Orthogonal projector `B B^dagger`.
    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    pub fn complement(&self) -> Subspace {
        if self.is_zero() {
            return Subspace::full(self.dim);
        }
        if self.is_full() {
            return Subspace::zero(self.dim);
        }
        // Eigenvalues of the projector are 0 (complement) and 1 (self); take the d - r smallest.
        let (vals, vecs) = linalg::hermitian_eigen(&self.projector());
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        order.truncate(self.dim - self.rank());
        Subspace::from_basis_unchecked(linalg::select_columns(&vecs, &order))
    }

    /// Distance of `v` from the subspace, relative to `|v|`.
    pub fn residual(&self, v: &CVec) -> f64 {
        let n = v.norm();
        if n == 0.0 {
            return 0.0;
        }
        let r = v - &self.basis * (self.basis.adjoint() * v);
        r.norm() / n
    }

    /// Cylindrical extension by a trailing identity factor of dimension `k`: `S (x) I_k`.
    pub fn tensor_identity(&self, k: usize) -> Subspace {
        Subspace::from_basis_unchecked(linalg::kron(&self.basis, &linalg::identity(k)))
    }

    /// Tensor product `S (x) T` of two subspaces.
    pub fn tensor(&self, other: &Subspace) -> Subspace {
        Subspace::from_basis_unchecked(linalg::kron(&self.basis, &other.basis))
    }

    /// Image of the subspace under a unitary.
    pub fn map_unitary(&self, u: &CMat) -> Subspace {
        Subspace::from_basis_unchecked(u * &self.basis)
    }
}

/// Lattice operations parameterised by a tolerance record.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lattice {
    pub tol: Tolerances,
}

impl Lattice {
    pub fn new(tol: Tolerances) -> Self {
        Lattice { tol }
    }

    fn same_dim(a: &Subspace, b: &Subspace) -> Result<usize, LatticeError> {
        if a.dim != b.dim {
            return Err(LatticeError::DimensionMismatch {
                left: a.dim,
                right: b.dim,
            });
        }
        Ok(a.dim)
    }

    fn check_hermitian(&self, m: &CMat) -> Result<(), LatticeError> {
        if !linalg::is_square(m) {
            return Err(LatticeError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if !linalg::is_hermitian(m, self.tol.rank) {
            return Err(LatticeError::NotHermitian);
        }
        Ok(())
    }

    fn spectral_split(&self, m: &CMat, want_kernel: bool) -> Result<Subspace, LatticeError> {
        self.check_hermitian(m)?;
        let d = m.nrows();
        let (vals, vecs) = linalg::hermitian_eigen(m);
        let scale = vals.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let cut = self.tol.rank * scale;
        let keep: Vec<usize> = (0..d)
            .filter(|&i| (vals[i].abs() <= cut) == want_kernel)
            .collect();
        Ok(Subspace::from_basis_unchecked(linalg::select_columns(
            &vecs, &keep,
        )))
    }

    /// Null space of a Hermitian operator.
    pub fn kernel_of(&self, m: &CMat) -> Result<Subspace, LatticeError> {
        self.spectral_split(m, true)
    }

    /// Support (range) of a Hermitian operator.
    pub fn support_of(&self, m: &CMat) -> Result<Subspace, LatticeError> {
        self.spectral_split(m, false)
    }

    /// Span of eigenvectors whose eigenvalue lies within `tol.eig1` of 1.
    pub fn eigenspace_one(&self, m: &CMat) -> Result<Subspace, LatticeError> {
        self.check_hermitian(m)?;
        let (vals, vecs) = linalg::hermitian_eigen(m);
        let keep: Vec<usize> = (0..vals.len())
            .filter(|&i| (vals[i] - 1.0).abs() <= self.tol.eig1)
            .collect();
        Ok(Subspace::from_basis_unchecked(linalg::select_columns(
            &vecs, &keep,
        )))
    }

    pub fn meet(&self, a: &Subspace, b: &Subspace) -> Result<Subspace, LatticeError> {
        let d = Self::same_dim(a, b)?;
        if a.is_zero() || b.is_zero() {
            return Ok(Subspace::zero(d));
        }
        if a.is_full() {
            return Ok(b.clone());
        }
        if b.is_full() {
            return Ok(a.clone());
        }
        let m = linalg::identity(d) * linalg::cr(2.0) - a.projector() - b.projector();
        self.kernel_of(&m)
    }

    pub fn join(&self, a: &Subspace, b: &Subspace) -> Result<Subspace, LatticeError> {
        let d = Self::same_dim(a, b)?;
        if a.is_full() || b.is_full() {
            return Ok(Subspace::full(d));
        }
        if a.is_zero() {
            return Ok(b.clone());
        }
        if b.is_zero() {
            return Ok(a.clone());
        }
        self.support_of(&(a.projector() + b.projector()))
    }

    pub fn meet_all<'a, I>(&self, dim: usize, items: I) -> Result<Subspace, LatticeError>
    where
        I: IntoIterator<Item = &'a Subspace>,
    {
        items
            .into_iter()
            .try_fold(Subspace::full(dim), |acc, s| self.meet(&acc, s))
    }

    pub fn join_all<'a, I>(&self, dim: usize, items: I) -> Result<Subspace, LatticeError>
    where
        I: IntoIterator<Item = &'a Subspace>,
    {
        items
            .into_iter()
            .try_fold(Subspace::zero(dim), |acc, s| self.join(&acc, s))
    }

    /// Inclusion `a <= b`.
    pub fn leq(&self, a: &Subspace, b: &Subspace) -> Result<bool, LatticeError> {
        Self::same_dim(a, b)?;
        Ok(self.inclusion_defect(a, b) <= self.tol.incl)
    }

    /// `max |(I - P_b) x|` over the basis vectors `x` of `a`.
    pub fn inclusion_defect(&self, a: &Subspace, b: &Subspace) -> f64 {
        if a.is_zero() || b.is_full() {
            return 0.0;
        }
        let r = &a.basis - &b.basis * (b.basis.adjoint() * &a.basis);
        linalg::max_abs(&r)
    }

    pub fn equal(&self, a: &Subspace, b: &Subspace) -> Result<bool, LatticeError> {
        Self::same_dim(a, b)?;
        Ok(a.rank() == b.rank() && self.leq(a, b)? && self.leq(b, a)?)
    }

    /// Sasaki implication `a^perp v (a ^ b)`.
    pub fn implies(&self, a: &Subspace, b: &Subspace) -> Result<Subspace, LatticeError> {
        let m = self.meet(a, b)?;
        self.join(&a.complement(), &m)
    }

    /// Sasaki conjunction (projection) `a ^ (a^perp v b)`.
    pub fn conjunct(&self, a: &Subspace, b: &Subspace) -> Result<Subspace, LatticeError> {
        let j = self.join(&a.complement(), b)?;
        self.meet(a, &j)
    }

    /// A unit vector of `a` as far as possible from `b`; `None` when `a <= b`.
    pub fn separating_vector(&self, a: &Subspace, b: &Subspace) -> Option<CVec> {
        if self.inclusion_defect(a, b) <= self.tol.incl {
            return None;
        }
        let r = &a.basis - &b.basis * (b.basis.adjoint() * &a.basis);
        let (_, _, v) = linalg::thin_svd(&r);
        let coeffs = v.column(0);
        let w = &a.basis * coeffs;
        let n = w.norm();
        Some(w.unscale(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cr};

    fn v(xs: &[(f64, f64)]) -> CVec {
        CVec::from_iterator(xs.len(), xs.iter().map(|&(a, b)| c(a, b)))
    }

    fn span(vs: &[CVec]) -> Subspace {
        Subspace::from_spanning(vs, None, &Tolerances::default()).unwrap()
    }

    #[test]
    fn near_parallel_vectors_keep_full_rank() {
        let s = 0.5_f64.sqrt();
        let a = v(&[(s, 0.0), (s, 0.0)]);
        let b = v(&[(s + 1e-12, 0.0), (-s + 1e-12, 0.0)]);
        assert_eq!(span(&[a, b]).rank(), 2);
    }

    #[test]
    fn duplicate_vectors_collapse() {
        let a = v(&[(1.0, 0.0), (0.0, 1.0)]);
        let b = a.scale(3.0);
        assert_eq!(span(&[a, b]).rank(), 1);
    }

    #[test]
    fn empty_spanning_needs_dimension() {
        let t = Tolerances::default();
        assert_eq!(
            Subspace::from_spanning(&[], None, &t).unwrap_err(),
            LatticeError::EmptySpanning
        );
        assert!(Subspace::from_spanning(&[], Some(4), &t).unwrap().is_zero());
    }

    #[test]
    fn meet_and_join_of_coordinate_axes() {
        let lat = Lattice::default();
        let x = span(&[v(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)])]);
        let y = span(&[v(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)])]);
        let xy = lat.join(&x, &y).unwrap();
        assert_eq!(xy.rank(), 2);
        assert!(lat.meet(&x, &y).unwrap().is_zero());
        let diag = span(&[v(&[(1.0, 0.0), (1.0, 0.0), (0.0, 0.0)])]);
        assert!(lat.leq(&diag, &xy).unwrap());
        assert_eq!(lat.meet(&diag, &xy).unwrap().rank(), 1);
    }

    #[test]
    fn sasaki_on_qubit_basis_states() {
        // |0> and |+>: the implication |0> ~> |+> is |1>, the conjunction is |0>.
        let lat = Lattice::default();
        let s = 0.5_f64.sqrt();
        let zero = span(&[v(&[(1.0, 0.0), (0.0, 0.0)])]);
        let one = span(&[v(&[(0.0, 0.0), (1.0, 0.0)])]);
        let plus = span(&[v(&[(s, 0.0), (s, 0.0)])]);
        assert!(lat.equal(&lat.implies(&zero, &plus).unwrap(), &one).unwrap());
        assert!(lat.equal(&lat.conjunct(&zero, &plus).unwrap(), &zero).unwrap());
        assert!(!lat.leq(&one, &plus).unwrap());
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let lat = Lattice::default();
        let m = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
        assert_eq!(lat.support_of(&m).unwrap_err(), LatticeError::NotHermitian);
        assert_eq!(lat.kernel_of(&m).unwrap_err(), LatticeError::NotHermitian);
    }

    #[test]
    fn eigenspace_one_picks_unit_eigenvalues() {
        let lat = Lattice::default();
        let m = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0), cr(0.5), cr(1.0 - 1e-9)]));
        assert_eq!(lat.eigenspace_one(&m).unwrap().rank(), 2);
    }

    #[test]
    fn separating_vector_lies_outside() {
        let lat = Lattice::default();
        let a = Subspace::full(2);
        let b = span(&[v(&[(1.0, 0.0), (0.0, 0.0)])]);
        let w = lat.separating_vector(&a, &b).unwrap();
        assert!(b.residual(&w) > 0.99);
        assert!(lat.separating_vector(&b, &a).is_none());
    }

    #[test]
    fn mismatched_dimensions_error() {
        let lat = Lattice::default();
        let e = lat.meet(&Subspace::full(2), &Subspace::full(4)).unwrap_err();
        assert_eq!(e, LatticeError::DimensionMismatch { left: 2, right: 4 });
    }
}
