//! Dense linear-algebra helpers over [`Scalar`] matrices.
//!
//! Every routine takes `ndarray` views. Singular value decompositions are
//! dispatched through [`Scalar::svd`], with an exact shortcut for diagonal
//! matrices (the surrogate and multiplication operators are diagonal, and
//! some of them are 4096 x 4096).

pub mod jacobi;
pub(crate) mod native;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How much of the decomposition to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvdJob {
    ValuesOnly,
    /// Square orthogonal `U` (m x m) and `V` (n x n).
    Full,
}

/// `A = U diag(s) V^T`, singular values non-increasing.
///
/// With [`SvdJob::ValuesOnly`] both factor matrices are empty (0 x 0).
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Array2<T>,
    pub s: Vec<T>,
    pub v: Array2<T>,
}

impl<T: Scalar> Svd<T> {
    pub fn has_vectors(&self) -> bool {
        !self.u.is_empty() || !self.v.is_empty()
    }
}

/// Computes the SVD, rejecting non-finite input.
pub fn svd<T: Scalar>(a: ArrayView2<'_, T>, job: SvdJob) -> Result<Svd<T>> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("svd", "matrix has non-finite entries"));
    }
    let (m, n) = a.dim();
    if m == 0 || n == 0 {
        let (u, v) = match job {
            SvdJob::ValuesOnly => (Array2::zeros((0, 0)), Array2::zeros((0, 0))),
            SvdJob::Full => (identity(m), identity(n)),
        };
        return Ok(Svd { u, s: Vec::new(), v });
    }
    if is_diagonal(a) {
        return Ok(diagonal_svd(a, job));
    }
    T::svd(a, job)
}

pub fn singular_values<T: Scalar>(a: ArrayView2<'_, T>) -> Result<Vec<T>> {
    Ok(svd(a, SvdJob::ValuesOnly)?.s)
}

/// Singular values of `P ⊗ Q` as the sorted pairwise products of those of
/// `P` and `Q`, zero-padded to `min` of the Kronecker dimensions.
pub fn kronecker_singular_values<T: Scalar>(p: ArrayView2<'_, T>, q: ArrayView2<'_, T>) -> Result<Vec<T>> {
    let (sp, sq) = (singular_values(p)?, singular_values(q)?);
    let mut s: Vec<T> = sp.iter().flat_map(|a| sq.iter().map(move |b| *a * *b)).collect();
    s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    let len = (p.nrows() * q.nrows()).min(p.ncols() * q.ncols());
    s.resize(len, T::zero());
    Ok(s)
}

/// Spectral norm (largest singular value); zero for empty matrices.
pub fn op_norm<T: Scalar>(a: ArrayView2<'_, T>) -> Result<T> {
    Ok(singular_values(a)?.first().copied().unwrap_or_else(T::zero))
}

pub fn identity<T: Scalar>(n: usize) -> Array2<T> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { T::one() } else { T::zero() })
}

pub fn matmul<T: Scalar>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> Array2<T> {
    a.dot(&b)
}

/// `|| R^T R - I ||_2`.
pub fn orthogonality_defect<T: Scalar>(r: ArrayView2<'_, T>) -> Result<T> {
    let mut gram = r.t().dot(&r);
    for i in 0..gram.nrows() {
        gram[[i, i]] -= T::one();
    }
    op_norm(gram.view())
}

pub fn is_diagonal<T: Scalar>(a: ArrayView2<'_, T>) -> bool {
    a.indexed_iter()
        .all(|((i, j), x)| i == j || *x == T::zero())
}

/// Exact SVD of a (possibly rectangular) diagonal matrix: a signed
/// permutation on the left, a permutation on the right.
fn diagonal_svd<T: Scalar>(a: ArrayView2<'_, T>, job: SvdJob) -> Svd<T> {
    let (m, n) = a.dim();
    let k = m.min(n);
    let mut order: Vec<usize> = (0..k).collect();
    // Stable sort keeps ties in index order, so results are reproducible.
    order.sort_by(|&x, &y| {
        a[[y, y]]
            .abs()
            .partial_cmp(&a[[x, x]].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let s: Vec<T> = order.iter().map(|&i| a[[i, i]].abs()).collect();
    if job == SvdJob::ValuesOnly {
        return Svd {
            u: Array2::zeros((0, 0)),
            s,
            v: Array2::zeros((0, 0)),
        };
    }
    let mut u = Array2::zeros((m, m));
    let mut v = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        let sign = if a[[i, i]] < T::zero() { -T::one() } else { T::one() };
        u[[i, col]] = sign;
        v[[i, col]] = T::one();
    }
    for i in k..m {
        u[[i, i]] = T::one();
    }
    for j in k..n {
        v[[j, j]] = T::one();
    }
    Svd { u, s, v }
}

/// Extends the orthonormal columns in `basis` (length-`dim` vectors) to a
/// full orthonormal basis using the standard basis vectors as candidates.
pub(crate) fn complete_basis<T: Scalar>(basis: &mut Vec<Vec<T>>, dim: usize) {
    let half = T::from_f64(0.5);
    let mut candidate = 0;
    while basis.len() < dim && candidate < dim {
        let mut w = vec![T::zero(); dim];
        w[candidate] = T::one();
        candidate += 1;
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * *bi;
                }
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm > half {
            w.iter_mut().for_each(|x| *x /= norm);
            basis.push(w);
        }
    }
    debug_assert_eq!(basis.len(), dim);
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += *x * *y;
    }
    acc
}

pub(crate) fn columns_to_matrix<T: Scalar>(cols: &[Vec<T>], rows: usize) -> Array2<T> {
    Array2::from_shape_fn((rows, cols.len()), |(i, j)| cols[j][i])
}
