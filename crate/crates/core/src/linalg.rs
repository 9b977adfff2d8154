//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::potential::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative singular-value cutoff used by the minimum-norm solve.
pub const PINV_RCOND: f64 = 1e-12;

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn determinant(m: &CMatrix) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Adjugate via cofactors, defined for singular matrices as well.
pub fn adjugate(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    if n == 1 {
        return CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    }
    let mut adj = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let minor = m.clone().remove_row(i).remove_column(j);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            // adj = transpose of the cofactor matrix
            adj[(j, i)] = determinant(&minor) * sign;
        }
    }
    adj
}

/// Solves `m x = b` by LU; `None` when the factorization is singular.
pub fn lu_solve(m: &CMatrix, b: &CVector) -> Option<CVector> {
    m.clone().lu().solve(b)
}

/// Minimum-norm least-squares solution of `m x = b`, treating singular values
/// at or below `PINV_RCOND · σ_max` as zero.
pub fn min_norm_solve(m: &CMatrix, b: &CVector) -> CVector {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return CVector::zeros(m.ncols());
    }
    svd.solve(b, PINV_RCOND * smax)
        .unwrap_or_else(|_| CVector::zeros(m.ncols()))
}

/// Orthonormal basis (as columns) of the orthogonal complement of `v`
/// under `⟨x, y⟩ = x^* y`. `v` must be nonzero.
pub fn orthogonal_complement(v: &CVector) -> CMatrix {
    let n = v.len();
    let mut basis: Vec<CVector> = vec![v / C64::new(v.norm(), 0.0)];
    for j in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w = CVector::zeros(n);
        w[j] = C64::new(1.0, 0.0);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dotc(&w);
                w -= q * proj;
            }
        }
        let norm = w.norm();
        if norm > 1e-8 {
            basis.push(w / C64::new(norm, 0.0));
        }
    }
    CMatrix::from_columns(&basis[1..])
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn adjugate_identity_and_singular() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let adj = adjugate(&m);
        assert_eq!(adj, CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        let s = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(adjugate(&s)[(1, 1)], c(1.0, 0.0));
        let m3 = CMatrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64 + 1.0, (i as f64) - (j as f64) * 0.5));
        let prod = &m3 * adjugate(&m3);
        let det = determinant(&m3);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { det } else { c(0.0, 0.0) };
                assert!((prod[(i, j)] - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn min_norm_of_rank_deficient_diagonal() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let x = min_norm_solve(&m, &CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(x[1].norm() < 1e-15);
    }

    #[test]
    fn complement_is_orthonormal() {
        let v = CVector::from_vec(vec![c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.5)]);
        let b = orthogonal_complement(&v);
        assert_eq!(b.ncols(), 2);
        let gram = b.adjoint() * &b;
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - c(expect, 0.0)).norm() < 1e-12);
            }
            assert!(v.dotc(&b.column(i).into_owned()).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_eigenvalues_sorted() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }
}
