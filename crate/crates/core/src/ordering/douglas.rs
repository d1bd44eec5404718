use ndarray::{s, Array2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gallery::OperatorMatrix;
use crate::linalg::{self, SvdJob};
use crate::scalar::Scalar;

/// Relative cutoff of the pseudo-inverse of `A^T`.
pub const PINV_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelTrend {
    Bounded,
    Diverging,
    Inconclusive,
}

/// Range-inclusion constants `C(N)` across discretization levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DouglasEstimate {
    pub levels: Vec<usize>,
    pub constants: Vec<f64>,
    /// Numerical rank of `A^T` used at each level.
    pub ranks: Vec<usize>,
    pub classification: LevelTrend,
}

/// Bounded when the constants vary by less than 4x, diverging when they
/// increase strictly and end more than 10x above the first level.
///
/// A spread within rounding of 4x counts as a tie and is not bounded:
/// `C(N) ∝ N` over levels 64, 128, 256 lands on 4x exactly.
pub fn classify_levels(constants: &[f64]) -> LevelTrend {
    if constants.is_empty() || constants.iter().any(|c| !c.is_finite()) {
        return LevelTrend::Inconclusive;
    }
    let max = constants.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let increasing = constants.windows(2).all(|w| w[1] > w[0]);
    if max < 4.0 * min * (1.0 - 1e-9) {
        LevelTrend::Bounded
    } else if increasing && constants[constants.len() - 1] > 10.0 * constants[0] {
        LevelTrend::Diverging
    } else {
        LevelTrend::Inconclusive
    }
}

/// `C = max_{y ≠ 0} ||A′^T R y|| / ||A^T y||` over `y` in the numerical range
/// of `A`, i.e. `||A′^T R U_k Σ_k^{-1}||_2`. `R = I` when omitted.
pub fn douglas_constant_at<T: Scalar>(
    a_prime: &OperatorMatrix<T>,
    a: &OperatorMatrix<T>,
    r: Option<&Array2<T>>,
) -> Result<(T, usize)> {
    let d = linalg::svd(a.view(), SvdJob::Full)?;
    let cutoff = d.s.first().copied().unwrap_or_else(T::zero) * T::from_f64(PINV_CUTOFF);
    let k = d.s.iter().take_while(|s| **s > cutoff && **s > T::zero()).count();
    if k == 0 {
        return Err(Error::invalid(format!(
            "A^T of `{}` is numerically zero; pencil degenerate",
            a.label
        )));
    }
    let m = a.dim().0;
    let ry = match r {
        Some(r) => {
            if r.ncols() != m || r.nrows() != a_prime.dim().0 {
                return Err(Error::invalid("R does not map the range of A into that of A′"));
            }
            r.dot(&d.u.slice(s![.., ..k]))
        }
        None => {
            if a_prime.dim().0 != m {
                return Err(Error::invalid("range spaces differ; supply R"));
            }
            d.u.slice(s![.., ..k]).to_owned()
        }
    };
    let mut probe = a_prime.entries.t().dot(&ry);
    for (j, mut col) in probe.columns_mut().into_iter().enumerate() {
        let inv = T::one() / d.s[j];
        col.mapv_inplace(|x| x * inv);
    }
    Ok((linalg::op_norm(probe.view())?, k))
}

/// Sweeps `build(level) -> (A′, A, R)` over `levels`.
pub fn douglas_constant<T, F>(levels: &[usize], mut build: F) -> Result<DouglasEstimate>
where
    T: Scalar,
    F: FnMut(usize) -> Result<(OperatorMatrix<T>, OperatorMatrix<T>, Option<Array2<T>>)>,
{
    if levels.is_empty() {
        return Err(Error::invalid("no discretization levels"));
    }
    let mut constants = Vec::with_capacity(levels.len());
    let mut ranks = Vec::with_capacity(levels.len());
    for &n in levels {
        let (ap, a, r) = build(n)?;
        let (c, k) = douglas_constant_at(&ap, &a, r.as_ref())?;
        constants.push(c.to_f64());
        ranks.push(k);
    }
    Ok(DouglasEstimate {
        levels: levels.to_vec(),
        classification: classify_levels(&constants),
        constants,
        ranks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{build_integration, GridSpec};

    fn j(m: usize, n: usize) -> OperatorMatrix<f64> {
        build_integration(m, &GridSpec::midpoint(n).unwrap()).unwrap()
    }

    #[test]
    fn identity_pair_has_unit_constant() {
        let est = douglas_constant(&[16, 32, 64], |n| Ok((j(1, n), j(1, n), None))).unwrap();
        assert!(est.constants.iter().all(|c| (c - 1.0).abs() < 1e-10));
        assert_eq!(est.classification, LevelTrend::Bounded);
    }

    #[test]
    fn smoother_operator_is_bounded_by_rougher_one() {
        let est = douglas_constant(&[64, 128, 256], |n| Ok((j(2, n), j(1, n), None))).unwrap();
        assert_eq!(est.classification, LevelTrend::Bounded);
    }

    #[test]
    fn level_classification() {
        assert_eq!(classify_levels(&[1.0, 2.0, 3.9]), LevelTrend::Bounded);
        assert_eq!(classify_levels(&[1.0, 5.0, 11.0]), LevelTrend::Diverging);
        assert_eq!(classify_levels(&[1.0, 20.0, 11.0]), LevelTrend::Inconclusive);
        assert_eq!(classify_levels(&[136.83775585907972, 273.67551171845315, 547.3510234314584]), LevelTrend::Inconclusive);
    }

    #[test]
    fn zero_operator_is_degenerate() {
        let z = OperatorMatrix::from_parts(Array2::zeros((3, 3)), GridSpec::midpoint(3).unwrap(), "J^m:1".parse().unwrap(), crate::gallery::OperatorKind::CompactModel).unwrap();
        assert!(douglas_constant_at(&j(1, 3), &z, None).is_err());
    }
}
