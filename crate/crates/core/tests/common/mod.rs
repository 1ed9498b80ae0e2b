//! Dense oracles shared by the integration tests.
//!
//! These materialize the operators the production code only ever applies
//! implicitly, and stay independent of the shift-indexed implementation
//! path they are used to check.

// Each test binary uses its own subset of the oracles.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use psl_core::{LagConstraint, SequenceSet};

/// Dense `ML x ML` shift operator for constraint `(i, j, k)`: the lag-k
/// upper shift placed in block `(i, j)` of an `L x L` block grid.
pub fn abar_dense(l: usize, m: usize, c: &LagConstraint) -> DMatrix<f64> {
    let ml = l * m;
    let mut out = DMatrix::zeros(ml, ml);
    for a in 0..m - c.k {
        out[(c.i * m + a, c.j * m + a + c.k)] = 1.0;
    }
    out
}

fn vec_col_major(mat: &DMatrix<f64>) -> Vec<f64> {
    mat.iter().copied().collect()
}

/// Dense `(ML)^2 x (ML)^2` lifted rank-two operator
/// `vec(A) vec(A^H)^H + vec(A^H) vec(A)^H` for the shift operator of `c`.
pub fn phi_dense(l: usize, m: usize, c: &LagConstraint) -> DMatrix<f64> {
    let abar = abar_dense(l, m, c);
    let a = vec_col_major(&abar);
    let b = vec_col_major(&abar.transpose());
    let n = a.len();
    DMatrix::from_fn(n, n, |r, cc| a[r] * b[cc] + b[r] * a[cc])
}

/// Dense Hermitian update `conj(r) A + r A^H` at the iterate of `set`.
pub fn d_dense(set: &SequenceSet, c: &LagConstraint) -> DMatrix<Complex64> {
    let l = set.num_sequences();
    let m = set.length();
    let abar = abar_dense(l, m, c).map(|v| Complex64::new(v, 0.0));
    let s = DVector::from_vec(set.stacked());
    let r = (s.adjoint() * &abar * &s)[(0, 0)];
    &abar * r.conj() + abar.adjoint() * r
}

/// Largest eigenvalue of a real symmetric matrix.
pub fn sym_eig_max(mat: &DMatrix<f64>) -> f64 {
    mat.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v))
}

/// Largest eigenvalue of a complex Hermitian matrix, through the real
/// symmetric embedding `[[Re, -Im], [Im, Re]]`.
pub fn hermitian_eig_max(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let emb = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (rr, cc) = (r % n, c % n);
        match (r < n, c < n) {
            (true, true) | (false, false) => h[(rr, cc)].re,
            (true, false) => -h[(rr, cc)].im,
            (false, true) => h[(rr, cc)].im,
        }
    });
    sym_eig_max(&emb)
}
