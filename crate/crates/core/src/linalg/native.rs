//! faer-backed SVD for native floating-point types.

use faer::traits::RealField;
use faer::Mat;
use ndarray::{Array2, ArrayView2};

use super::{Svd, SvdJob};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) fn svd<T>(a: ArrayView2<'_, T>, job: SvdJob) -> Result<Svd<T>>
where
    T: Scalar + RealField,
{
    let (m, n) = a.dim();
    let mat = Mat::<T>::from_fn(m, n, |i, j| a[[i, j]]);
    match job {
        SvdJob::ValuesOnly => {
            let s = mat
                .singular_values()
                .map_err(|e| Error::numerical("svd", format!("{e:?}")))?;
            Ok(Svd {
                u: Array2::zeros((0, 0)),
                s,
                v: Array2::zeros((0, 0)),
            })
        }
        SvdJob::Full => {
            let d = mat
                .svd()
                .map_err(|e| Error::numerical("svd", format!("{e:?}")))?;
            let (u, s, v) = (d.U(), d.S().column_vector(), d.V());
            Ok(Svd {
                u: Array2::from_shape_fn((m, m), |(i, j)| u[(i, j)]),
                s: (0..m.min(n)).map(|i| s[i]).collect(),
                v: Array2::from_shape_fn((n, n), |(i, j)| v[(i, j)]),
            })
        }
    }
}
