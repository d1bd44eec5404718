use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::gallery::{GalleryId, OperatorMatrix};
use crate::linalg::{self, SvdJob};
use crate::scalar::Scalar;

/// `A = U |A|` with `|A| = (A^T A)^{1/2}`.
#[derive(Debug, Clone)]
pub struct PolarDecomposition<T> {
    pub abs_a: OperatorMatrix<T>,
    /// Isometry (`m x n`, orthogonal when square).
    pub u: Array2<T>,
    /// `||A - U |A|||_2`; also the residual of the witness `(U, I)` for
    /// `A ≺ |A|`.
    pub reconstruction: T,
    /// `|||A| - U^T A||_2`, residual of the witness `(U^T, I)` for `|A| ≺ A`.
    pub reverse_residual: T,
    /// `||U^T U - I||_2`.
    pub orthogonality_defect: T,
}

pub fn polar_absolute<T: Scalar>(a: &OperatorMatrix<T>) -> Result<PolarDecomposition<T>> {
    let (m, n) = a.dim();
    if m < n {
        return Err(Error::invalid(format!(
            "polar factor needs a square or tall matrix, got {m}x{n}"
        )));
    }
    let d = linalg::svd(a.view(), SvdJob::Full)?;
    // Rank-deficient directions pair arbitrary completed columns of U with
    // zero singular values, which keeps U an isometry.
    let w = d.u.slice(s![.., ..n]);
    let u = w.dot(&d.v.t());
    let mut sv = d.v.clone();
    for (j, mut col) in sv.columns_mut().into_iter().enumerate() {
        let sj = d.s[j];
        col.mapv_inplace(|x| x * sj);
    }
    let abs_entries = sv.dot(&d.v.t());
    let recon = linalg::op_norm((&a.entries - &u.dot(&abs_entries)).view())?;
    let reverse = linalg::op_norm((&abs_entries - &u.t().dot(&a.entries)).view())?;
    let orthogonality_defect = linalg::orthogonality_defect(u.view())?;
    let abs_a = OperatorMatrix::from_parts(
        abs_entries,
        a.grid,
        GalleryId::Absolute(Box::new(a.label.clone())),
        a.kind,
    )?;
    Ok(PolarDecomposition {
        abs_a,
        u,
        reconstruction: recon,
        reverse_residual: reverse,
        orthogonality_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{build_integration, GridSpec, OperatorKind};
    use ndarray::array;

    fn wrap(m: Array2<f64>) -> OperatorMatrix<f64> {
        let n = m.ncols();
        OperatorMatrix::from_parts(m, GridSpec::midpoint(n).unwrap(), "J^m:1".parse().unwrap(), OperatorKind::CompactModel).unwrap()
    }

    #[test]
    fn sign_matrix() {
        let p = polar_absolute(&wrap(array![[-2.0, 0.0], [0.0, 3.0]])).unwrap();
        assert_eq!(p.abs_a.entries, array![[2.0, 0.0], [0.0, 3.0]]);
        assert_eq!(p.u, array![[-1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn orthogonal_input_has_identity_modulus() {
        let (c, s) = (0.6, 0.8);
        let q = array![[c, -s], [s, c]];
        let p = polar_absolute(&wrap(q.clone())).unwrap();
        assert!((&p.abs_a.entries - &linalg::identity::<f64>(2)).iter().all(|x| x.abs() < 1e-14));
        assert!((&p.u - &q).iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn integration_modulus_keeps_spectrum() {
        let j = build_integration::<f64>(1, &GridSpec::midpoint(128).unwrap()).unwrap();
        let p = polar_absolute(&j).unwrap();
        let s1 = linalg::singular_values(j.view()).unwrap();
        let s2 = linalg::singular_values(p.abs_a.view()).unwrap();
        assert!(s1.iter().zip(&s2).all(|(a, b)| (a - b).abs() <= 1e-10));
        assert!(p.reconstruction <= 1e-10 && p.reverse_residual <= 1e-10);
        assert_eq!(p.abs_a.label.to_string(), "abs(J^m:1)");
    }

    #[test]
    fn wide_input_is_rejected() {
        assert!(polar_absolute(&wrap(Array2::zeros((2, 3)))).is_err());
    }
}
