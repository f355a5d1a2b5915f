//! Dense symmetric eigen-helpers shared by the SCF and Hessian code.

use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Largest accepted overlap condition number.
pub const MAX_OVERLAP_CONDITION: f64 = 1e12;

/// Symmetric eigendecomposition with eigenvalues ascending and each
/// eigenvector's largest-magnitude entry made positive.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension("eigen of non-square matrix"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver("non-finite matrix entry"));
    }
    let sym = symmetrize(m);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or(Error::Eigensolver("symmetric QR did not converge"))?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        fix_sign(&mut v);
        vectors.set_column(col, &v);
    }
    Ok((values, vectors))
}

pub(crate) fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0usize;
    for i in 0..v.len() {
        if v[i].abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v.len() > 0 && v[best] < 0.0 {
        v.neg_mut();
    }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric (Löwdin) orthogonalizer for a positive definite overlap.
#[derive(Debug, Clone)]
pub struct Orthogonalizer {
    /// `S^{-1/2}`.
    pub inv_sqrt: DMatrix<f64>,
    /// `S^{1/2}`.
    pub sqrt: DMatrix<f64>,
    pub condition: f64,
    pub min_eigenvalue: f64,
}

impl Orthogonalizer {
    pub fn new(overlap: &DMatrix<f64>) -> Result<Self> {
        let (vals, vecs) = sym_eigen_sorted(overlap)?;
        let n = vals.len();
        let min = vals[0];
        let max = vals[n - 1];
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(condition <= MAX_OVERLAP_CONDITION) {
            return Err(Error::SingularOverlap(condition));
        }
        let inv = DVector::from_iterator(n, vals.iter().map(|v| 1.0 / v.sqrt()));
        let sq = DVector::from_iterator(n, vals.iter().map(|v| v.sqrt()));
        let inv_sqrt = &vecs * DMatrix::from_diagonal(&inv) * vecs.transpose();
        let sqrt = &vecs * DMatrix::from_diagonal(&sq) * vecs.transpose();
        Ok(Self { inv_sqrt: symmetrize(&inv_sqrt), sqrt: symmetrize(&sqrt), condition, min_eigenvalue: min })
    }

    /// Solves `A c = λ S c`, eigenvalues ascending, `CᵀSC = I`.
    pub fn generalized_eigen(&self, a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let at = &self.inv_sqrt * a * &self.inv_sqrt;
        let (vals, u) = sym_eigen_sorted(&at)?;
        Ok((vals, &self.inv_sqrt * u))
    }

    /// Matrix elements in the orthonormal basis: `S^{-1/2} A S^{-1/2}`.
    pub fn to_orthonormal(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        &self.inv_sqrt * a * &self.inv_sqrt
    }
}

/// Modified Gram-Schmidt in the metric `s`, applied twice.
pub fn s_orthonormalize(c: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = c.clone();
    for _ in 0..2 {
        for i in 0..out.ncols() {
            let mut v = out.column(i).into_owned();
            for j in 0..i {
                let u = out.column(j);
                let proj = (u.transpose() * s * &v)[0];
                v -= u * proj;
            }
            let norm2 = (v.transpose() * s * &v)[0];
            if !(norm2 > 1e-24) {
                return Err(Error::Dimension("linearly dependent columns"));
            }
            v /= norm2.sqrt();
            out.set_column(i, &v);
        }
    }
    Ok(out)
}

/// Count of singular values above `rel_tol * max(1, σ_max)`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let cut = rel_tol * top.max(1.0);
    sv.iter().filter(|&&s| s > cut).count()
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_eigenpairs() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, -1.0]);
        let (vals, vecs) = sym_eigen_sorted(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        assert!((vals[2] - 3.0).abs() < 1e-14);
        let recon = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((recon - m).abs().max() < 1e-13);
    }

    #[test]
    fn lowdin_round_trip() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]);
        let o = Orthogonalizer::new(&s).unwrap();
        let id = &o.inv_sqrt * &s * &o.inv_sqrt;
        assert!((id - DMatrix::identity(2, 2)).abs().max() < 1e-14);
        assert!((&o.sqrt * &o.sqrt - &s).abs().max() < 1e-14);
    }

    #[test]
    fn singular_overlap_rejected() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(Orthogonalizer::new(&s), Err(Error::SingularOverlap(_))));
    }

    #[test]
    fn gram_schmidt_metric() {
        let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.0]);
        let c = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.2, 1.0, -0.3, 0.7]);
        let q = s_orthonormalize(&c, &s).unwrap();
        let g = q.transpose() * &s * &q;
        assert!((g - DMatrix::identity(2, 2)).abs().max() < 1e-14);
    }

    #[test]
    fn rank_of_outer_product() {
        let v = DVector::from_vec(alloc::vec![1.0, 2.0, 3.0]);
        assert_eq!(numerical_rank(&(&v * v.transpose()), 1e-10), 1);
    }
}
