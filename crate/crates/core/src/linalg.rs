//! Small dense complex matrix helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix. Every operator in this crate is at most 32×32.
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(a·b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus of `m − m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Trace distance `½‖a − b‖₁` of two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b))
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
}

/// Partial trace of an `n`-qubit operator, keeping the qubits in `keep`
/// (0-based, qubit 0 is the most significant tensor factor). The kept qubits
/// retain their relative order.
pub fn partial_trace(m: &CMatrix, n: usize, keep: &[usize]) -> CMatrix {
    assert_eq!(m.nrows(), 1 << n);
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dk = 1usize << keep.len();
    let dt = 1usize << traced.len();
    // index of the full basis state from kept/traced sub-indices
    let compose = |k: usize, t: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in keep.iter().enumerate() {
            let bit = (k >> (keep.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            let bit = (t >> (traced.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        idx
    };
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(compose(a, t), compose(b, t))];
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Purity `Tr(ρ²)`.
pub fn purity(rho: &CMatrix) -> f64 {
    trace_product(rho, rho).re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_trace_of_product_state() {
        let a = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let b = CMatrix::from_row_slice(2, 2, &[ONE * 0.5, ONE * 0.5, ONE * 0.5, ONE * 0.5]);
        let ab = a.kronecker(&b);
        assert!(max_abs_diff(&partial_trace(&ab, 2, &[0]), &a) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&ab, 2, &[1]), &b) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&ab, 2, &[0, 1]), &ab) < 1e-15);
    }

    #[test]
    fn trace_distance_orthogonal_pure_states() {
        let p = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let q = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
        assert!((trace_distance(&p, &q) - 1.0).abs() < 1e-14);
    }
}
