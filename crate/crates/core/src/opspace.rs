//! Dense linear algebra on operator space `M(ℂᵈ)`.
//!
//! Matrices are vectorized by column stacking, so entry `(i, j)` of a `d × d`
//! matrix lands at index `j·d + i`. With this convention the map `X ↦ A X B`
//! is represented by the Kronecker product `Bᵀ ⊗ A`.

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default absolute tolerance for residual checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Matrix unit `E_ij = |i⟩⟨j|`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `‖A − A*‖_F`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

/// Hermitian part `(A + A*)/2`, written `Re A` for operators.
pub fn re_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Skew part `(A − A*)/(2i)`, written `Im A` for operators.
pub fn im_part(a: &CMatrix) -> CMatrix {
    (a - a.adjoint()) * c(0.0, -0.5)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().sum()
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn vectorize(x: &CMatrix) -> CVector {
    // nalgebra storage is column-major, which is exactly column stacking
    CVector::from_column_slice(x.as_slice())
}

pub fn devectorize(v: &CVector, d: usize) -> CMatrix {
    assert_eq!(v.len(), d * d, "vector length must be d²");
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Hilbert-Schmidt pairing `tr[A* B]`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            context: "hs_inner",
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// A linear map on `d × d` matrices, stored as a `d² × d²` matrix acting on
/// column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "superoperator matrix",
                expected: n,
                found: matrix.nrows(),
            });
        }
        if !is_finite(&matrix) {
            return Err(Error::NonFinite {
                what: "superoperator",
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(x.nrows(), self.dim, "operand dimension mismatch");
        let v = &self.matrix * vectorize(x);
        devectorize(&v, self.dim)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, other.dim);
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn add(&self, other: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, other.dim);
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scale(&self, s: C64) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix * s,
        }
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Trace dual `S_*`, defined by `tr[S_*(ρ) X] = tr[ρ S(X)]`.
    pub fn trace_dual(&self) -> Superoperator {
        let perm = transpose_permutation(self.dim);
        Superoperator {
            dim: self.dim,
            matrix: &perm * self.matrix.transpose() * &perm,
        }
    }
}

/// Permutation `P` with `P vec(A) = vec(Aᵀ)`.
fn transpose_permutation(d: usize) -> CMatrix {
    let n = d * d;
    let mut p = CMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            // vec(A)[j·d+i] = A_ij goes to vec(Aᵀ)[i·d+j]
            p[(i * d + j, j * d + i)] = ONE;
        }
    }
    p
}

/// The superoperator `X ↦ A X B`.
pub fn left_right_superop(a: &CMatrix, b: &CMatrix) -> Result<Superoperator> {
    let d = a.nrows();
    for m in [a, b] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "left_right_superop",
                expected: d,
                found: m.nrows(),
            });
        }
    }
    Superoperator::new(d, b.transpose().kronecker(a))
}

/// `exp(t·S)` by scaling and squaring with a Padé approximant.
pub fn expm(s: &Superoperator, t: f64) -> Result<Superoperator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "expm requires finite t ≥ 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(Superoperator::identity(s.dim));
    }
    let m = (&s.matrix * c(t, 0.0)).exp();
    Superoperator::new(s.dim, m)
}

/// One eigenpair of a superoperator; the eigenvector is returned as a matrix.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    pub vector: CMatrix,
}

/// Eigenvalues of a square complex matrix via the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::ConvergenceFailure)?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Eigenpairs of a square complex matrix: Schur form `M = Q T Q*` followed by
/// back substitution on the triangular factor.
pub fn eigen_decomposition(m: &CMatrix) -> Result<Vec<(C64, CVector)>> {
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::ConvergenceFailure)?;
    let (q, t) = schur.unpack();
    let small = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = CVector::zeros(n);
        y[k] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for l in j + 1..=k {
                acc += t[(j, l)] * y[l];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < small {
                denom = c(small, 0.0);
            }
            y[j] = -acc / denom;
        }
        let mut v = &q * y;
        let nv = v.norm();
        if nv > 0.0 {
            v /= c(nv, 0.0);
        }
        out.push((lambda, v));
    }
    Ok(out)
}

/// Eigenpairs of a superoperator, eigenvectors reshaped into matrices with
/// unit Hilbert-Schmidt norm.
pub fn eig(s: &Superoperator) -> Result<Vec<EigenPair>> {
    Ok(eigen_decomposition(&s.matrix)?
        .into_iter()
        .map(|(value, v)| EigenPair {
            value,
            vector: devectorize(&v, s.dim),
        })
        .collect())
}

/// Full SVD `m = U diag(s) V*` with `s` non-increasing.
///
/// Goes through faer: nalgebra's complex SVD with singular vectors can return
/// inaccurate singular values on some well-conditioned inputs.
pub(crate) fn svd(m: &CMatrix) -> Result<(Vec<f64>, CMatrix, CMatrix)> {
    let a = faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = a.svd().map_err(|_| Error::ConvergenceFailure)?;
    let s = svd.S().column_vector();
    let vals = (0..s.nrows()).map(|k| s[k].re).collect();
    let (u, v) = (svd.U(), svd.V());
    let u = CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]);
    let v = CMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]);
    Ok((vals, u, v))
}

/// Moore-Penrose pseudo-inverse through the SVD.
pub(crate) fn pseudo_inverse(m: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    let (vals, u, v) = svd(m)?;
    let cutoff = rel_tol * vals.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let mut out = CMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in vals.iter().enumerate().take_while(|(_, &s)| s > cutoff) {
        out += (v.column(k) * u.column(k).adjoint()) * c(1.0 / s, 0.0);
    }
    Ok(out)
}

/// Real rank of a real matrix by singular values above `rel_tol · σ_max`.
pub(crate) fn real_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Complex rank by singular values above `rel_tol · σ_max`.
pub(crate) fn complex_rank(m: &CMatrix, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}
