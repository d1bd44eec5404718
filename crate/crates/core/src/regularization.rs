//! Regularizing filters `g_α` and the boundedness dichotomy of
//! `g_α(A^T A) A^T R^T A′` as `α → 0`.
//!
//! Norms are evaluated by functional calculus on the SVD of `A`, so each
//! `α` costs one singular value computation of an `N x N` product.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gallery::OperatorMatrix;
use crate::linalg::{self, SvdJob};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GeneratorFamily {
    /// `1/(λ + α)`
    Tikhonov,
    /// `1/λ` for `λ >= α`, else 0.
    SpectralCutoff,
    /// `k = ceil(1/α)` steps of size `ω`: `Σ_{j<k} ω (1 - ωλ)^j`. `ω`
    /// defaults to `1/(2 s_1(A)^2)`.
    Landweber { omega: Option<f64> },
}

impl GeneratorFamily {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorFamily::Tikhonov => "tikhonov",
            GeneratorFamily::SpectralCutoff => "cutoff",
            GeneratorFamily::Landweber { .. } => "landweber",
        }
    }

    /// Step size for an operator with largest singular value `s1`.
    fn omega_for(&self, s1: f64) -> Result<Option<f64>> {
        let GeneratorFamily::Landweber { omega } = *self else {
            return Ok(None);
        };
        let limit = 1.0 / (s1 * s1);
        let w = omega.unwrap_or(0.5 * limit);
        if !(w > 0.0 && w < limit) {
            return Err(Error::invalid(format!(
                "landweber step {w} must lie in (0, 1/s_1^2) = (0, {limit})"
            )));
        }
        Ok(Some(w))
    }

    /// `g_α(λ)`; `omega` must be set for Landweber.
    pub fn eval<T: Scalar>(&self, lambda: T, alpha: f64, omega: Option<f64>) -> T {
        let a = T::from_f64(alpha);
        match self {
            GeneratorFamily::Tikhonov => T::one() / (lambda + a),
            GeneratorFamily::SpectralCutoff => {
                if lambda >= a && lambda > T::zero() {
                    T::one() / lambda
                } else {
                    T::zero()
                }
            }
            GeneratorFamily::Landweber { .. } => {
                let w = T::from_f64(omega.expect("landweber step resolved"));
                let k = (1.0 / alpha).ceil() as u64;
                if lambda == T::zero() {
                    return w * T::from_f64(k as f64);
                }
                (T::one() - (T::one() - w * lambda).powi(k)) / lambda
            }
        }
    }
}

impl fmt::Display for GeneratorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tikhonov" => Ok(GeneratorFamily::Tikhonov),
            "cutoff" | "spectral_cutoff" => Ok(GeneratorFamily::SpectralCutoff),
            "landweber" => Ok(GeneratorFamily::Landweber { omega: None }),
            other => Err(Error::Config(format!(
                "unknown family `{other}`; valid: tikhonov, cutoff, landweber"
            ))),
        }
    }
}

/// Eight logarithmically spaced points `1e-1, ..., 1e-8`.
pub fn default_alphas() -> Vec<f64> {
    (1..=8).map(|k| 10f64.powi(-k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundedness {
    UniformlyBounded,
    Unbounded,
    Inconclusive,
}

/// Norms along a decreasing `α` grid: uniformly bounded while the maximum
/// stays below 4x the first norm; unbounded after a tenfold increase that
/// is still rising at the last `α`.
pub fn classify_norms(norms: &[f64]) -> Boundedness {
    let Some(&first) = norms.first() else {
        return Boundedness::Inconclusive;
    };
    let max = norms.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return Boundedness::UniformlyBounded;
    }
    if max < 4.0 * first {
        return Boundedness::UniformlyBounded;
    }
    let last = norms[norms.len() - 1];
    let rising = norms.len() >= 2 && last > norms[norms.len() - 2];
    if last >= 10.0 * first && rising {
        Boundedness::Unbounded
    } else {
        Boundedness::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularizationProfile {
    pub family: GeneratorFamily,
    pub alphas: Vec<f64>,
    pub norms: Vec<f64>,
    pub classification: Boundedness,
    /// `‖g_α(A^T A) A^T y − x_0‖`, when a reference solution was given.
    pub errors: Option<Vec<f64>>,
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::invalid("empty alpha grid"));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::invalid(format!("alpha must be positive, got {a}")));
    }
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("alpha grid must be strictly decreasing"));
    }
    Ok(())
}

/// Filter weights `g_α(s_i^2) s_i` for the leading `min(m, n)` directions.
fn filter_weights<T: Scalar>(s: &[T], family: &GeneratorFamily, alpha: f64, omega: Option<f64>) -> Vec<T> {
    s.iter().map(|&si| family.eval(si * si, alpha, omega) * si).collect()
}

/// `‖g_α(A^T A) A^T R^T A′‖` for each `α` (`R = I` when omitted).
pub fn dichotomy_probe<T: Scalar>(
    a_prime: &OperatorMatrix<T>,
    a: &OperatorMatrix<T>,
    r: Option<&Array2<T>>,
    family: GeneratorFamily,
    alphas: &[f64],
) -> Result<RegularizationProfile> {
    let (m, n) = a.dim();
    let rta = match r {
        Some(r) => {
            if r.nrows() != a_prime.dim().0 || r.ncols() != m {
                return Err(Error::invalid("R does not map the range of A into that of A′"));
            }
            r.t().dot(&a_prime.entries)
        }
        None => {
            if a_prime.dim().0 != m {
                return Err(Error::invalid(format!(
                    "range dimensions differ ({} vs {m}); supply R",
                    a_prime.dim().0
                )));
            }
            a_prime.entries.clone()
        }
    };
    let d = linalg::svd(a.view(), SvdJob::Full)?;
    let s1 = d.s.first().map_or(0.0, |x| x.to_f64());
    check_alphas(alphas)?;
    let omega = family.omega_for(s1)?;
    let k = m.min(n);
    let projected = d.u.slice(s![.., ..k]).t().dot(&rta);
    let mut norms = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let w = filter_weights(&d.s[..k], &family, alpha, omega);
        let mut scaled = projected.clone();
        for (i, mut row) in scaled.rows_mut().into_iter().enumerate() {
            let wi = w[i];
            row.mapv_inplace(|x| x * wi);
        }
        norms.push(linalg::op_norm(scaled.view())?.to_f64());
    }
    Ok(RegularizationProfile {
        family,
        alphas: alphas.to_vec(),
        classification: classify_norms(&norms),
        norms,
        errors: None,
    })
}

/// Trajectory `‖g_α(A^T A) A^T y‖`, plus the error against `x0` when given.
pub fn pointwise_dichotomy<T: Scalar>(
    a: &OperatorMatrix<T>,
    y: &[T],
    family: GeneratorFamily,
    alphas: &[f64],
    x0: Option<&[T]>,
) -> Result<RegularizationProfile> {
    let (m, n) = a.dim();
    if y.len() != m {
        return Err(Error::invalid(format!("y has length {}, A has {m} rows", y.len())));
    }
    if let Some(x0) = x0 {
        if x0.len() != n {
            return Err(Error::invalid(format!("x0 has length {}, A has {n} columns", x0.len())));
        }
    }
    let d = linalg::svd(a.view(), SvdJob::Full)?;
    let s1 = d.s.first().map_or(0.0, |x| x.to_f64());
    check_alphas(alphas)?;
    let omega = family.omega_for(s1)?;
    let k = m.min(n);
    let coeffs = d.u.slice(s![.., ..k]).t().dot(&Array1::from(y.to_vec()));
    let mut norms = Vec::with_capacity(alphas.len());
    let mut errors = x0.map(|_| Vec::with_capacity(alphas.len()));
    for &alpha in alphas {
        let w = filter_weights(&d.s[..k], &family, alpha, omega);
        let c: Array1<T> = Array1::from_iter(coeffs.iter().zip(&w).map(|(c, w)| *c * *w));
        norms.push(linalg::dot(c.as_slice().expect("contiguous"), c.as_slice().expect("contiguous")).sqrt().to_f64());
        if let (Some(x0), Some(errs)) = (x0, errors.as_mut()) {
            let x = d.v.slice(s![.., ..k]).dot(&c);
            let diff: Vec<T> = x.iter().zip(x0).map(|(a, b)| *a - *b).collect();
            errs.push(linalg::dot(&diff, &diff).sqrt().to_f64());
        }
    }
    Ok(RegularizationProfile {
        family,
        alphas: alphas.to_vec(),
        classification: classify_norms(&norms),
        norms,
        errors,
    })
}

/// `max_λ g_α(λ) λ^{1/2}` over the given `λ` values.
pub fn qualification_sup(family: GeneratorFamily, alpha: f64, lambdas: &[f64], omega: Option<f64>) -> f64 {
    lambdas
        .iter()
        .map(|&l| family.eval(l, alpha, omega) * l.sqrt())
        .fold(0.0, f64::max)
}
