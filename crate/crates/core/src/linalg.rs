//! Dense complex linear algebra: products, Kronecker products, Hermitian
//! eigendecomposition, spectral matrix functions and the partial trace over
//! the field mode.
//!
//! Matrices are small (at most a few thousand rows), so everything is dense
//! and backed by `nalgebra`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative Frobenius tolerance for the Hermiticity precondition.
pub const TOL_HERM: f64 = 1e-10;
/// Relative Frobenius tolerance for the eigendecomposition residual.
pub const TOL_EIG: f64 = 1e-10;
/// Density-matrix eigenvalues below `-POSITIVITY_FLOOR` are rejected; those in
/// `[-POSITIVITY_FLOOR, 0)` are treated as zero.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

const EIG_MAX_SWEEPS: usize = 10_000;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dense complex matrix used for operators and density matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Self {
        assert_eq!(
            rows * cols,
            entries.len(),
            "rows·cols must equal the entry count"
        );
        Self(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Self {
        let entries: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_slice(rows, cols, &entries)
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(DMatrix::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    /// Projector `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        let n = v.len();
        Self(DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    pub fn from_nalgebra(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Entrywise complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.ncols(), v.len());
        let out = &self.0 * DVector::from_column_slice(v);
        out.iter().copied().collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && hermiticity_residual(self) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.nrows();
        let defect = &(&self.adjoint() * self) - &Self::identity(n);
        defect.frobenius_norm() <= tol * (n as f64).sqrt()
    }

    /// Hermitian, unit trace and eigenvalues ≥ −tol.
    pub fn is_density(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return false;
        }
        match hermitian_eig(self) {
            Ok(eig) => eig.eigenvalues.iter().all(|&l| l >= -tol),
            Err(_) => false,
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

/// `‖A − A†‖_F / ‖A‖_F` (zero for the zero matrix).
pub fn hermiticity_residual(a: &ComplexMatrix) -> f64 {
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return 0.0;
    }
    (a - &a.adjoint()).frobenius_norm() / norm
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Spectral decomposition `A = V·diag(λ)·V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V·diag(f(λ))·V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors.0;
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= fj;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    /// `exp(−i·scale·A)`.
    pub fn exp_i(&self, scale: f64) -> ComplexMatrix {
        self.map_spectrum(|lambda| C64::from_polar(1.0, -scale * lambda))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|lambda| C64::new(lambda, 0.0))
    }
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending order.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}×{}", a.nrows(), a.ncols()),
        });
    }
    let residual = hermiticity_residual(a);
    if residual > TOL_HERM {
        return Err(Error::NotHermitian { residual });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let sym = (&a.0 + a.0.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, EIG_MAX_SWEEPS)
        .ok_or(Error::NoConvergence { residual: f64::NAN })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);

    let out = EigenDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix(eigenvectors),
    };
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let av = a * &out.eigenvectors;
    let vl = out.map_columns();
    let residual = (&av - &vl).frobenius_norm() / scale;
    if !(residual <= TOL_EIG) {
        return Err(Error::NoConvergence { residual });
    }
    Ok(out)
}

impl EigenDecomposition {
    /// `V·diag(λ)`.
    fn map_columns(&self) -> ComplexMatrix {
        let mut m = self.eigenvectors.0.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            for i in 0..m.nrows() {
                m[(i, j)] *= lambda;
            }
        }
        ComplexMatrix(m)
    }
}

/// `exp(−i·scale·A)` for Hermitian `A`, computed spectrally.
pub fn matrix_exp_i(a: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(a)?.exp_i(scale))
}

/// Traces the field mode out of a `(4·mode_dim)`-dimensional operator whose
/// basis runs atom a slowest and the mode fastest.
pub fn partial_trace_mode(rho: &ComplexMatrix, mode_dim: usize) -> Result<ComplexMatrix> {
    let dim = 4 * mode_dim;
    if mode_dim == 0 || rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim}×{dim}"),
            got: format!("{}×{}", rho.nrows(), rho.ncols()),
        });
    }
    let mut out = ComplexMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = ZERO;
            for n in 0..mode_dim {
                acc += rho[(i * mode_dim + n, j * mode_dim + n)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Eigenvalues of a density matrix with floating-point noise clipped.
pub fn density_spectrum(rho: &ComplexMatrix) -> Result<EigenDecomposition> {
    let mut eig = hermitian_eig(rho)?;
    for lambda in eig.eigenvalues.iter_mut() {
        if *lambda < -POSITIVITY_FLOOR {
            return Err(Error::NotPositive {
                eigenvalue: *lambda,
            });
        }
        if *lambda < 0.0 {
            *lambda = 0.0;
        }
    }
    Ok(eig)
}

/// Principal square root of a positive semidefinite matrix.
pub fn sqrt_psd(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = density_spectrum(rho)?;
    Ok(eig.map_spectrum(|lambda| C64::new(lambda.sqrt(), 0.0)))
}

/// Trace distance `½‖a − b‖₁` between two Hermitian matrices.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    // The difference of nearly equal operators is mostly round-off, so
    // hermiticity is judged on the inputs and the difference is symmetrized.
    for m in [a, b] {
        let residual = hermiticity_residual(m);
        if residual > TOL_HERM {
            return Err(Error::NotHermitian { residual });
        }
    }
    let diff = a - b;
    let diff = (&diff + &diff.adjoint()).scale_real(0.5);
    let eig = hermitian_eig(&diff)?;
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// `Tr ρ²`.
pub fn purity(rho: &ComplexMatrix) -> f64 {
    (rho * rho).trace().re
}

/// Single-qubit operators in the basis `{|0⟩, |1⟩}` with `σ_z|1⟩ = +|1⟩`.
pub mod pauli {
    use super::*;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, 2, &[-1.0, 0.0, 0.0, 1.0])
    }

    /// `|1⟩⟨0|`.
    pub fn sigma_plus() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, 2, &[0.0, 0.0, 1.0, 0.0])
    }

    /// `|0⟩⟨1|`.
    pub fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0])
    }
}

/// Truncated annihilation operator on `dim` Fock levels.
pub fn annihilation(dim: usize) -> ComplexMatrix {
    let mut b = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        b[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    b
}
