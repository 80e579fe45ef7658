//! Dense complex matrix helpers shared by the lattice, operator and semantics layers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest entry modulus; 0 for empty matrices.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn is_square(m: &CMat) -> bool {
    m.nrows() == m.ncols()
}

/// Hermiticity check relative to the entry scale of `m`.
pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    if !is_square(m) {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    max_abs(&(m - m.adjoint())) <= tol * scale
}

/// Eigen-decomposition of a Hermitian matrix (input is symmetrised first).
/// Returns eigenvalues in nondecreasing order and the unitary matrix of eigenvectors as columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = to_faer(&(m + m.adjoint()).scale(0.5));
    let eig = h
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver converges");
    let s = eig.S().column_vector();
    let vals = (0..n).map(|i| s[i].re).collect();
    let vecs = from_faer(eig.U());
    (vals, vecs)
}

/// Matrix product; large operands go through faer.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    if a.nrows().min(a.ncols()).min(b.ncols()) < 48 {
        return a * b;
    }
    from_faer((to_faer(a) * to_faer(b)).as_ref())
}

fn to_faer(m: &CMat) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        faer::c64::new(m[(i, j)].re, m[(i, j)].im)
    })
}

fn from_faer(m: faer::MatRef<'_, faer::c64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| c(m[(i, j)].re, m[(i, j)].im))
}

/// Thin singular value decomposition `m = U diag(s) V^dagger`, singular values nonincreasing.
pub fn thin_svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return (
            CMat::zeros(m.nrows(), 0),
            Vec::new(),
            CMat::zeros(m.ncols(), 0),
        );
    }
    let svd = to_faer(m).thin_svd().expect("SVD converges");
    let s = svd.S().column_vector();
    let vals = (0..k).map(|i| s[i].re).collect();
    (from_faer(svd.U()), vals, from_faer(svd.V()))
}

/// Columns of `m` at the given indices.
pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    let mut out = CMat::zeros(m.nrows(), cols.len());
    for (j, &k) in cols.iter().enumerate() {
        out.set_column(j, &m.column(k));
    }
    out
}

/// Unitarity defect `max |U^dagger U - I|`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    if !is_square(u) {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    unitarity_defect(u) <= tol
}

/// Smallest eigenvalue of a Hermitian matrix (`+inf` for empty input).
pub fn min_eigenvalue(m: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(m);
    vals.into_iter().fold(f64::INFINITY, f64::min)
}

/// Fidelity between a pure state and a density matrix: `<psi|rho|psi>` for normalised `psi`.
pub fn pure_fidelity(psi: &CVec, rho: &CMat) -> f64 {
    let n = psi.norm();
    if n == 0.0 {
        return 0.0;
    }
    let v = psi.unscale(n);
    (v.adjoint() * rho * &v)[(0, 0)].re
}
