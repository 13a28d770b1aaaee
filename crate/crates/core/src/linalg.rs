//! Dense complex matrices and the eigensolver backend.
//!
//! [`ComplexMatrix`] wraps a column-major `faer` matrix. Every kernel in this
//! module runs with sequential parallelism so that results are bitwise
//! independent of the host's thread count.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{evd_cplx, evd_scratch, ComputeEigenvectors};
use faer::linalg::matmul::matmul;
use faer::linalg::svd::{svd, svd_scratch, ComputeSvdVectors};
use faer::diag::Diag;
use faer::{Accum, Mat, MatRef, Par};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

const PAR: Par = Par::Seq;

/// Square or rectangular dense complex matrix, stored column-major.
#[derive(Clone, Debug)]
pub struct ComplexMatrix {
    inner: Mat<C64>,
}

impl PartialEq for ComplexMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows() == other.rows()
            && self.cols() == other.cols()
            && (0..self.cols()).all(|j| (0..self.rows()).all(|i| self.get(i, j) == other.get(i, j)))
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: Mat::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: Mat::identity(n, n),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            inner: Mat::from_fn(rows, cols, f),
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn as_faer(&self) -> MatRef<'_, C64> {
        self.inner.as_ref()
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.inner[(i, j)] = value;
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows()).map(|i| self.get(i, j)).collect()
    }

    /// True when every entry of column `j` is exactly zero.
    pub fn column_is_zero(&self, j: usize) -> bool {
        (0..self.rows()).all(|i| self.get(i, j) == C64::new(0.0, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols(), self.rows(), |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows().min(self.cols())).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry modulus, `max_ij |a_ij|`.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                m = m.max(self.get(i, j).norm());
            }
        }
        m
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::Config(format!(
                "matrix product of {}x{} and {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        let mut out = Mat::<C64>::zeros(self.rows(), rhs.cols());
        matmul(
            out.as_mut(),
            Accum::Replace,
            self.inner.as_ref(),
            rhs.inner.as_ref(),
            C64::new(1.0, 0.0),
            PAR,
        );
        Ok(Self { inner: out })
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols() {
            return Err(Error::Config(format!(
                "vector of length {} applied to {}x{} matrix",
                v.len(),
                self.rows(),
                self.cols()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.rows()];
        for (j, &vj) in v.iter().enumerate() {
            if vj == C64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j) * vj;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.rows() != rhs.rows() || self.cols() != rhs.cols() {
            return Err(Error::Config("matrix difference of mismatched shapes".into()));
        }
        Ok(Self::from_fn(self.rows(), self.cols(), |i, j| {
            self.get(i, j) - rhs.get(i, j)
        }))
    }

    /// `self^n` by repeated multiplication; `n = 0` gives the identity.
    pub fn pow(&self, n: u32) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Config("power of a non-square matrix".into()));
        }
        let mut acc = Self::identity(self.rows());
        for _ in 0..n {
            acc = acc.matmul(self)?;
        }
        Ok(acc)
    }

    /// `max_ij |(A†A − I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.adjoint().matmul(self).expect("A†A is always conformable");
        gram.sub(&Self::identity(self.cols()))
            .expect("square gram matrix")
            .max_abs()
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        singular_values(self.inner.as_ref())
    }
}

pub(crate) fn singular_values(a: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    let mut s = Diag::<C64>::zeros(m.min(n));
    let mut buf = MemBuffer::new(svd_scratch::<C64>(
        m,
        n,
        ComputeSvdVectors::No,
        ComputeSvdVectors::No,
        PAR,
        Default::default(),
    ));
    svd(
        a,
        s.as_mut(),
        None,
        None,
        PAR,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e:?}")))?;
    Ok(s.column_vector().iter().map(|x| x.re).collect())
}

/// Eigenvalues with paired right and left eigenvectors.
///
/// Column `i` of `right` satisfies `A r = λ_i r`; column `i` of `left`
/// satisfies `l† A = λ_i l†`. Both come from the same Schur form, so the
/// pairing is by index.
pub(crate) struct EigenPairs {
    pub values: Vec<C64>,
    pub right: Mat<C64>,
    pub left: Mat<C64>,
}

pub(crate) fn eigen_left_right(a: MatRef<'_, C64>) -> Result<EigenPairs> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Config("eigendecomposition of a non-square matrix".into()));
    }
    if n == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            right: Mat::zeros(0, 0),
            left: Mat::zeros(0, 0),
        });
    }
    let mut s = Diag::<C64>::zeros(n);
    let mut left = Mat::<C64>::zeros(n, n);
    let mut right = Mat::<C64>::zeros(n, n);
    let mut buf = MemBuffer::new(evd_scratch::<C64>(
        n,
        ComputeEigenvectors::Yes,
        ComputeEigenvectors::Yes,
        PAR,
        Default::default(),
    ));
    evd_cplx(
        a,
        s.as_mut(),
        Some(left.as_mut()),
        Some(right.as_mut()),
        PAR,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Numerical(format!("eigensolver did not converge: {e:?}")))?;
    let values: Vec<C64> = s.column_vector().iter().copied().collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical("eigensolver returned non-finite eigenvalues".into()));
    }
    Ok(EigenPairs {
        values,
        right,
        left,
    })
}

/// `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn normalize(a: &mut [C64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        for x in a.iter_mut() {
            *x /= n;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matmul_and_adjoint() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64));
        let b = a.adjoint();
        assert_eq!(b.rows(), 3);
        assert_eq!(b.get(2, 1), c(1.0, -2.0));
        let p = a.matmul(&b).unwrap();
        // (a a†)_00 = Σ_j |0 + i j|² = 0 + 1 + 4
        assert!((p.get(0, 0) - c(5.0, 0.0)).norm() < 1e-15);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn eigenpairs_of_a_triangular_matrix() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                c(1.0 + i as f64, 0.5)
            } else if j > i {
                c(0.3, -0.2)
            } else {
                c(0.0, 0.0)
            }
        });
        let e = eigen_left_right(a.as_faer()).unwrap();
        for k in 0..3 {
            let lam = e.values[k];
            let r: Vec<C64> = (0..3).map(|i| e.right[(i, k)]).collect();
            let l: Vec<C64> = (0..3).map(|i| e.left[(i, k)]).collect();
            let ar = a.matvec(&r).unwrap();
            let lr: f64 = ar.iter().zip(&r).map(|(x, y)| (x - lam * y).norm()).fold(0.0, f64::max);
            assert!(lr < 1e-13);
            let la = a.adjoint().matvec(&l).unwrap();
            let ll: f64 = la
                .iter()
                .zip(&l)
                .map(|(x, y)| (x - lam.conj() * y).norm())
                .fold(0.0, f64::max);
            assert!(ll < 1e-13);
        }
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = ComplexMatrix::from_diagonal(&[c(3.0, 4.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let s = a.singular_values().unwrap();
        let expect = [5.0, 2.0, 1.0];
        for (x, y) in s.iter().zip(expect) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn power_and_trace() {
        let a = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(2.0, 0.0)]);
        let a3 = a.pow(3).unwrap();
        assert!((a3.trace() - c(8.0, -1.0)).norm() < 1e-14);
        assert_eq!(a.pow(0).unwrap(), ComplexMatrix::identity(2));
    }
}
