//! Dense complex matrices sized for spin Hilbert spaces (dim <= a few thousand).
//!
//! Everything downstream — spin operators, Hamiltonians, density matrices,
//! vectorized generators — is a `ComplexMatrix`. The type wraps a dense
//! `nalgebra` matrix so the backing representation can change without touching
//! callers; only square matrices are representable.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// The imaginary unit.
pub const IM: C64 = C64::new(0.0, 1.0);

/// Hard ceiling on any matrix dimension this crate will allocate.
/// Kronecker products error out instead of attempting a larger allocation.
pub const MAX_KRON_DIM: usize = 16_384;

/// Square dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    m: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { m: DMatrix::from_fn(dim, dim, f) }
    }

    /// Builds a matrix from rows of entries. All rows must have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: r.len() });
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// Diagonal matrix with real entries.
    pub fn from_diag_re(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) }
        })
    }

    /// Rank-1 projector |v><v| onto a (not necessarily normalized) vector.
    pub fn projector_onto(v: &[C64]) -> Self {
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj() / norm_sq)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.m[(i, j)] = value;
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    /// (M + M^dagger) / 2 — projects onto the Hermitian part, preserving Re(trace).
    pub fn hermitize(&self) -> Self {
        let mut m = (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0);
        // Force exactly real diagonal so hermiticity defects cannot accumulate there.
        for i in 0..m.nrows() {
            m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        }
        Self { m }
    }

    /// max_ij |M_ij - conj(M_ji)|: zero iff Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff on mismatched dims");
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Eigenvalues of a Hermitian matrix, ascending. The input must be
    /// Hermitian (up to roundoff); the Hermitian part is diagonalized.
    pub fn eigenvalues_hermitian(&self) -> Vec<f64> {
        debug_assert!(self.hermiticity_defect() < 1e-8 * (1.0 + self.max_abs()));
        let herm = self.hermitize();
        let mut ev: Vec<f64> = herm.m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue_hermitian(&self) -> f64 {
        self.eigenvalues_hermitian()[0]
    }

    /// Matrix exponential (Padé + scaling-and-squaring).
    pub fn expm(&self) -> Self {
        Self { m: self.m.exp() }
    }

    pub(crate) fn inner(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub(crate) fn from_inner(m: DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "ComplexMatrix must be square");
        Self { m }
    }
}

/// Kronecker product; index convention `(i1*d2 + i2, j1*d2 + j2) = a[i1,j1] * b[i2,j2]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .filter(|&d| d <= MAX_KRON_DIM)
        .ok_or(Error::DimensionCap { dim: a.dim().saturating_mul(b.dim()), cap: MAX_KRON_DIM })?;
    let m = a.m.kronecker(&b.m);
    debug_assert_eq!(m.nrows(), dim);
    Ok(ComplexMatrix { m })
}

/// [A, B] = AB - BA.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Re Tr(rho * obs), the expectation value of `obs` in state `rho`.
///
/// Computed as the contraction sum_ij rho_ij obs_ji without forming the
/// product. For Hermitian `rho` and `obs` the imaginary part of the trace is
/// pure roundoff; callers that know both are Hermitian may assert on
/// `expectation_full` instead.
pub fn expectation(rho: &ComplexMatrix, obs: &ComplexMatrix) -> Result<f64> {
    Ok(expectation_full(rho, obs)?.re)
}

/// Tr(rho * obs) including any imaginary residue.
pub fn expectation_full(rho: &ComplexMatrix, obs: &ComplexMatrix) -> Result<C64> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: obs.dim() });
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            acc += rho.m[(i, j)] * obs.m[(j, i)];
        }
    }
    Ok(acc)
}

macro_rules! impl_binop {
    ($trait:ident, $fn:ident, $op:tt) => {
        impl std::ops::$trait for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $fn(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { m: &self.m $op &rhs.m }
            }
        }
        impl std::ops::$trait for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $fn(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { m: self.m $op rhs.m }
            }
        }
        impl std::ops::$trait<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $fn(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { m: self.m $op &rhs.m }
            }
        }
        impl std::ops::$trait<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $fn(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { m: &self.m $op rhs.m }
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);
impl_binop!(Mul, mul, *);

impl std::ops::Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        ComplexMatrix { m: &self.m * rhs }
    }
}

impl std::ops::Mul<C64> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        ComplexMatrix { m: self.m * rhs }
    }
}

impl std::ops::Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: f64) -> ComplexMatrix {
        self * C64::new(rhs, 0.0)
    }
}

impl std::ops::Mul<f64> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: f64) -> ComplexMatrix {
        self * C64::new(rhs, 0.0)
    }
}

impl std::ops::Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { m: -&self.m }
    }
}

impl std::ops::Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { m: -self.m }
    }
}
