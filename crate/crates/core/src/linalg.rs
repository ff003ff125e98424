//! Small complex-matrix helpers shared by the exact (Gaussian-integer) and
//! floating-point code paths.

use nalgebra::{DMatrix, DVector};
use num_complex::{Complex, Complex64};

/// Matrix over the Gaussian integers. All algebraic identities are checked in
/// this type so that equality is exact.
pub type ExactMatrix = DMatrix<Complex<i64>>;

/// Floating-point complex matrix used by the simulator.
pub type CMatrix = DMatrix<Complex64>;

/// Floating-point complex column vector.
pub type CVector = DVector<Complex64>;

pub fn exact_identity(n: usize) -> ExactMatrix {
    ExactMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex::new(1, 0)
        } else {
            Complex::new(0, 0)
        }
    })
}

pub fn exact_zeros(n: usize) -> ExactMatrix {
    ExactMatrix::from_element(n, n, Complex::new(0, 0))
}

/// Entrywise complex conjugate.
pub fn conj_exact(m: &ExactMatrix) -> ExactMatrix {
    m.map(|z| z.conj())
}

/// Conjugate transpose.
pub fn adjoint_exact(m: &ExactMatrix) -> ExactMatrix {
    conj_exact(m).transpose()
}

pub fn to_float(m: &ExactMatrix) -> CMatrix {
    m.map(|z| Complex64::new(z.re as f64, z.im as f64))
}

pub fn is_zero_exact(m: &ExactMatrix) -> bool {
    m.iter().all(|z| z.re == 0 && z.im == 0)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &CVector, b: &CVector) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}
