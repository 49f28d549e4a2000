//! Dense complex linear algebra on finite-dimensional Hilbert spaces.
//!
//! Everything here is a value type: matrices and vectors are validated once
//! at construction and never mutated afterwards, so they can be shared
//! freely between worker threads.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::chernoff::OperatorFunction;
use crate::error::{LabError, Result};

/// Relative tolerance used by [`HermitianOperator::new`].
pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-12;
/// Absolute tolerance on `max |U^H U - I|` for [`UnitaryOperator`].
pub const UNITARITY_TOL: f64 = 1e-10;
/// Default number of nodes used to discretize `sup_{t in [0, T]}`.
pub const DEFAULT_TIME_GRID: usize = 33;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(LabError::Empty);
        }
        if m.nrows() != m.ncols() {
            return Err(LabError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::NonFinite { dim: m.nrows() });
        }
        Ok(Self(m))
    }

    /// Row-major construction.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(LabError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(dim, &c)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Matrix product; fails if the dimensions differ or the product overflows.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.check_dim(rhs.dim())?;
        Self::new(&self.0 * &rhs.0)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.check_dim(rhs.dim())?;
        Self::new(&self.0 + &rhs.0)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.check_dim(rhs.dim())?;
        Self::new(&self.0 - &rhs.0)
    }

    pub fn scale(&self, factor: Complex64) -> Result<Self> {
        Self::new(&self.0 * factor)
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.check_dim(v.dim())?;
        StateVector::from_vector(&self.0 * &v.0)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff: dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        self.0
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(LabError::DimensionMismatch {
                expected: self.dim(),
                found: other,
            });
        }
        Ok(())
    }
}

/// Self-adjoint matrix, the finite-dimensional stand-in for a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    tolerance: f64,
}

impl HermitianOperator {
    /// Validates Hermiticity to [`DEFAULT_HERMITICITY_TOL`] relative to the
    /// largest entry. Inputs outside the tolerance are rejected, not symmetrized.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DEFAULT_HERMITICITY_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, relative_tol: f64) -> Result<Self> {
        if !(relative_tol >= 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "hermiticity tolerance must be nonnegative, got {relative_tol}"
            )));
        }
        let deviation = hermiticity_deviation(&matrix);
        let tolerance = relative_tol * matrix.max_abs();
        if deviation > tolerance {
            return Err(LabError::NotHermitian {
                deviation,
                tolerance,
            });
        }
        Ok(Self {
            matrix,
            tolerance: relative_tol,
        })
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(dim, entries)?)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
            tolerance: DEFAULT_HERMITICITY_TOL,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            tolerance: DEFAULT_HERMITICITY_TOL,
        }
    }

    pub fn sigma_x() -> Self {
        Self::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).expect("sigma_x is Hermitian")
    }

    pub fn sigma_y() -> Self {
        let m = ComplexMatrix::from_rows(2, &[ZERO, -I, I, ZERO]).expect("finite");
        Self::new(m).expect("sigma_y is Hermitian")
    }

    pub fn sigma_z() -> Self {
        Self::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0]).expect("sigma_z is Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn hermiticity_tol(&self) -> f64 {
        self.tolerance
    }

    /// Real linear combination `sum_k w_k H_k`, which stays Hermitian.
    pub fn linear_combination<'a, It>(dim: usize, terms: It) -> Result<Self>
    where
        It: IntoIterator<Item = (f64, &'a HermitianOperator)>,
    {
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        for (w, h) in terms {
            if h.dim() != dim {
                return Err(LabError::DimensionMismatch {
                    expected: dim,
                    found: h.dim(),
                });
            }
            acc += h.matrix.as_matrix() * Complex64::new(w, 0.0);
        }
        Self::new(ComplexMatrix::new(acc)?)
    }
}

/// `max |M - M^H|` over all entries.
pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    let a = m.as_matrix();
    let n = m.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator(ComplexMatrix);

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = unitarity_deviation(&matrix);
        if !(deviation <= UNITARITY_TOL) {
            return Err(LabError::NotUnitary { deviation });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.0.apply(v)
    }
}

/// `max |U^H U - I|` over all entries.
pub fn unitarity_deviation(m: &ComplexMatrix) -> f64 {
    let a = m.as_matrix();
    let gram = a.adjoint() * a;
    gram.iter()
        .enumerate()
        .map(|(idx, z)| {
            // column-major storage: idx = col * n + row
            let n = a.nrows();
            let expect = if idx % n == idx / n { ONE } else { ZERO };
            (z - expect).norm()
        })
        .fold(0.0, f64::max)
}

/// Finite complex vector; normalization is left to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<Complex64>);

impl StateVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(entries))
    }

    pub fn from_vector(v: DVector<Complex64>) -> Result<Self> {
        if v.is_empty() {
            return Err(LabError::Empty);
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::NonFinite { dim: v.len() });
        }
        Ok(Self(v))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Canonical basis vector `e_k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut v = DVector::zeros(dim);
        v[k] = ONE;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(LabError::InvalidArgument(
                "cannot normalize the zero vector".into(),
            ));
        }
        Ok(Self(&self.0 / Complex64::new(n, 0.0)))
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

/// Eigendecomposition `H = V diag(lambda) V^H` of a Hermitian operator,
/// reusable for evaluating `exp(itH)` at many times.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl HermitianSpectrum {
    pub fn decompose(h: &HermitianOperator) -> Result<Self> {
        let dim = h.dim();
        let max_iter = 1000 * dim.max(8);
        let eig = SymmetricEigen::try_new(h.matrix().as_matrix().clone(), f64::EPSILON, max_iter)
            .ok_or_else(|| LabError::EigenFailure {
                dim,
                norm_estimate: h.matrix().frobenius_norm(),
            })?;
        if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(LabError::EigenFailure {
                dim,
                norm_estimate: h.matrix().frobenius_norm(),
            });
        }
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `exp(itH) = V diag(exp(i t lambda_k)) V^H`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let phases = self.eigenvalues.map(|l| Complex64::from_polar(1.0, t * l));
        let mut scaled = self.eigenvectors.clone();
        for (mut col, phase) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *phase;
        }
        ComplexMatrix(scaled * self.eigenvectors.adjoint())
    }
}

/// Unitary group element `exp(itH)`.
pub fn expm_hermitian(h: &HermitianOperator, t: f64) -> Result<UnitaryOperator> {
    if !t.is_finite() {
        return Err(LabError::InvalidArgument(format!("time must be finite, got {t}")));
    }
    let spectrum = HermitianSpectrum::decompose(h)?;
    UnitaryOperator::new(spectrum.propagator(t))
}

/// `A^n` by repeated squaring. The multiplication order depends only on `n`,
/// so the result is bitwise reproducible.
pub fn operator_power(a: &ComplexMatrix, n: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(LabError::InvalidArgument(
            "operator_power requires n >= 1".into(),
        ));
    }
    let mut base = a.0.clone();
    let mut acc: Option<DMatrix<Complex64>> = None;
    let mut e = n;
    loop {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(m) => m * &base,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = &base * &base;
    }
    ComplexMatrix::new(acc.expect("n >= 1 sets at least one bit"))
}

/// Uniform grid `{k T / (points - 1)}`, `k = 0..points`.
///
/// Nodes are computed as `(k T) / (points - 1)`, so refining `points - 1`
/// by a power of two reproduces the coarse nodes bit for bit.
pub fn time_grid(horizon: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(LabError::InvalidArgument(format!(
            "time grid needs at least 2 points, got {points}"
        )));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(LabError::InvalidArgument(format!(
            "time horizon must be positive and finite, got {horizon}"
        )));
    }
    let m = (points - 1) as f64;
    Ok((0..points).map(|k| (k as f64 * horizon) / m).collect())
}

/// `rho_{T,u}(F) = sup_{t in [0,T]} ||F(t) u||`, discretized on a uniform grid.
///
/// The grid maximum is a lower bound on the true supremum.
pub fn seminorm_rho(
    f: &OperatorFunction,
    u: &StateVector,
    horizon: f64,
    grid_points: usize,
) -> Result<f64> {
    if u.dim() != f.dim() {
        return Err(LabError::DimensionMismatch {
            expected: f.dim(),
            found: u.dim(),
        });
    }
    let mut sup: f64 = 0.0;
    for t in time_grid(horizon, grid_points)? {
        let ft = f.eval(t).map_err(|e| LabError::Evaluation {
            t,
            source: Box::new(e),
        })?;
        sup = sup.max(ft.apply(u)?.norm());
    }
    Ok(sup)
}
