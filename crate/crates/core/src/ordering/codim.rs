use ndarray::s;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gallery::OperatorMatrix;
use crate::linalg::{self, SvdJob};
use crate::scalar::Scalar;
use crate::spectral::{classify_log_ratios, IndexWindow, Trend};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodimReport {
    pub m: usize,
    pub window: IndexWindow,
    /// `min s_{2n}(A) / s_n(A)` over the window.
    pub c_lower: f64,
    /// `max s_{2n}(A) / s_n(QA)`.
    pub c_hat: f64,
    /// `max s_n(QA) / s_n(A)`.
    pub c_bar: f64,
    /// Trend of `s_{2n}(A)/s_n(A)` along the window.
    pub doubling_trend: Trend,
    /// `(min, max)` of `s_n(QA) / s_n(A)`.
    pub ratio_window: (f64, f64),
    pub holds: bool,
}

/// Checks `C̲ s_n(A) <= s_{2n}(A) <= Ĉ s_n(QA) <= Ĉ C̄ s_n(A)` on `window`,
/// where `Q` projects out the top `m` left singular vectors of `A`.
///
/// At finite size every constant is positive, so the doubling condition
/// counts only when `s_{2n}/s_n` keeps a bounded trend (it decays like
/// `2^{-n}` for exponentially ill-posed spectra) and neither sandwich ratio
/// diverges.
pub fn codim_lemma_check<T: Scalar>(
    a: &OperatorMatrix<T>,
    m: usize,
    window: IndexWindow,
) -> Result<CodimReport> {
    let (rows, cols) = a.dim();
    let len = rows.min(cols);
    if m == 0 || m >= rows {
        return Err(Error::invalid(format!(
            "codimension {m} must lie in 1..{rows}"
        )));
    }
    if 2 * window.end > len {
        return Err(Error::invalid(format!(
            "window {window} needs s_{} but the spectrum has {len} values",
            2 * window.end
        )));
    }
    let d = linalg::svd(a.view(), SvdJob::Full)?;
    let um = d.u.slice(s![.., ..m]);
    let qa = &a.entries - &um.dot(&um.t().dot(&a.entries));
    let sq = linalg::singular_values(qa.view())?;

    let f = |x: T| x.to_f64();
    let mut doubling_logs = Vec::with_capacity(window.len());
    let (mut c_lower, mut c_hat, mut c_bar) = (f64::INFINITY, 0.0f64, 0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut hat_logs = Vec::with_capacity(window.len());
    let mut bar_logs = Vec::with_capacity(window.len());
    for n in window.indices() {
        let (sn, s2n, sqn) = (f(d.s[n - 1]), f(d.s[2 * n - 1]), f(sq[n - 1]));
        let doubling = s2n / sn;
        c_lower = c_lower.min(doubling);
        doubling_logs.push(s2n.ln() - sn.ln());
        c_hat = c_hat.max(s2n / sqn);
        hat_logs.push(s2n.ln() - sqn.ln());
        let r = sqn / sn;
        c_bar = c_bar.max(r);
        bar_logs.push(sqn.ln() - sn.ln());
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let doubling_trend = classify_log_ratios(&doubling_logs).0;
    let hat_trend = classify_log_ratios(&hat_logs).0;
    let bar_trend = classify_log_ratios(&bar_logs).0;
    let finite = |x: f64| x.is_finite() && x > 0.0;
    let holds = finite(c_lower)
        && finite(c_hat)
        && finite(c_bar)
        && doubling_trend == Trend::Bounded
        && hat_trend != Trend::Diverging
        && bar_trend != Trend::Diverging;
    Ok(CodimReport {
        m,
        window,
        c_lower,
        c_hat,
        c_bar,
        doubling_trend,
        ratio_window: (lo, hi),
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{build_integration, GridSpec, OperatorKind};
    use ndarray::{Array1, Array2};

    fn diag(values: Vec<f64>) -> OperatorMatrix<f64> {
        let n = values.len();
        OperatorMatrix::from_parts(
            Array2::from_diag(&Array1::from(values)),
            GridSpec::midpoint(n).unwrap(),
            "E^k:1:1".parse().unwrap(),
            OperatorKind::CompactModel,
        )
        .unwrap()
    }

    #[test]
    fn harmonic_diagonal_satisfies_the_lemma_exactly() {
        let a = diag((1..=64).map(|n| 1.0 / n as f64).collect());
        let r = codim_lemma_check(&a, 1, IndexWindow::new(1, 32).unwrap()).unwrap();
        assert_eq!(r.c_lower, 0.5);
        assert!(r.holds);
    }

    #[test]
    fn geometric_diagonal_fails_the_doubling_condition() {
        let a = diag((1..=64).map(|n| 2f64.powi(-n)).collect());
        let r = codim_lemma_check(&a, 1, IndexWindow::new(1, 32).unwrap()).unwrap();
        assert!(!r.holds);
        assert_eq!(r.doubling_trend, Trend::Vanishing);
    }

    #[test]
    fn integration_keeps_its_order_under_codimension_two() {
        let j = build_integration::<f64>(1, &GridSpec::midpoint(256).unwrap()).unwrap();
        let r = codim_lemma_check(&j, 2, IndexWindow::new(4, 32).unwrap()).unwrap();
        assert!(r.holds);
        assert!(r.ratio_window.0 >= 0.25 && r.ratio_window.1 <= 1.0, "{:?}", r.ratio_window);
    }

    #[test]
    fn window_must_fit_twice() {
        let a = diag((1..=10).map(|n| 1.0 / n as f64).collect());
        assert!(codim_lemma_check(&a, 1, IndexWindow::new(1, 6).unwrap()).is_err());
        assert!(codim_lemma_check(&a, 10, IndexWindow::new(1, 5).unwrap()).is_err());
    }
}
