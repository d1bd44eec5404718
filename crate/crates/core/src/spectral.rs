//! Singular spectra, decay-rate fits and spectrum comparison.
//!
//! Comparison statistics are computed from `ln s_n(A′) - ln s_n(A)`, so
//! swapping the operands negates every statistic exactly and the trend
//! classification is antisymmetric without rounding exceptions.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gallery::OperatorMatrix;
use crate::linalg;
use crate::scalar::Scalar;
use crate::verdict::{Direction, EvidenceTag, OrderingVerdict, Relation};

/// Non-increasing singular values of one discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult<T> {
    pub values: Vec<T>,
    /// Discretization level (points per axis).
    pub level: usize,
    pub label: String,
}

impl<T: Scalar> SpectrumResult<T> {
    /// Validates ordering and sign.
    pub fn new(values: Vec<T>, level: usize, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if values.iter().any(|v| *v < T::zero() || !v.is_finite()) {
            return Err(Error::invalid(format!("spectrum `{label}` has negative or non-finite values")));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid(format!("spectrum `{label}` is not non-increasing")));
        }
        Ok(SpectrumResult { values, level, label })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `s_n`, 1-based.
    pub fn s(&self, n: usize) -> T {
        self.values[n - 1]
    }

    pub fn to_f64(&self) -> SpectrumResult<f64> {
        SpectrumResult {
            values: self.values.iter().map(|v| v.to_f64()).collect(),
            level: self.level,
            label: self.label.clone(),
        }
    }

    /// Two columns `n,s_n` with a header row, 17 significant digits.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["n", "s_n"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([(i + 1).to_string(), format!("{:.16e}", v.to_f64())])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Full singular spectrum of a gallery matrix. Operators built as a
/// Kronecker product take the spectrum from their factors.
pub fn compute_spectrum<T: Scalar>(a: &OperatorMatrix<T>) -> Result<SpectrumResult<T>> {
    let label = a.label.to_string();
    let values = match a.kronecker_factors() {
        Some((p, q)) => linalg::kronecker_singular_values(p, q),
        None => linalg::singular_values(a.view()),
    };
    let values = values.map_err(|e| match e {
        Error::NumericalFailure { reason, .. } => Error::NumericalFailure {
            label: label.clone(),
            reason,
        },
        other => other,
    })?;
    SpectrumResult::new(values, a.grid.n_points(), label)
}

/// Inclusive 1-based index range `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexWindow {
    pub start: usize,
    pub end: usize,
}

impl IndexWindow {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start < 1 || end < start {
            return Err(Error::invalid(format!("invalid index window {start}:{end}")));
        }
        Ok(IndexWindow { start, end })
    }

    /// `[4, len/4]`, or the whole range when that would hold fewer than
    /// four indices.
    pub fn default_for(len: usize) -> Result<Self> {
        let end = len / 4;
        if end >= 7 {
            Self::new(4, end)
        } else {
            Self::new(1, len.max(1))
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }

    pub fn check_within(&self, len: usize) -> Result<()> {
        if self.end > len {
            return Err(Error::invalid(format!(
                "window {self} exceeds spectrum length {len}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for IndexWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for IndexWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("window `{s}` must look like a:b")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("window `{s}` must look like a:b")))
        };
        Self::new(parse(a)?, parse(b)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    Power,
    Polylog,
    Exponential,
}

/// Exponents tried for the stretched-exponential model.
pub fn kappa_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 10.0).collect()
}

/// Least-squares fit of one model in the log domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Power exponent (power and polylog).
    pub theta: Option<f64>,
    /// Log exponent (polylog).
    pub beta: Option<f64>,
    /// `(gamma, kappa)` of `c exp(-gamma n^kappa)` (exponential).
    pub gamma_kappa: Option<(f64, f64)>,
    pub log_c: f64,
    /// RMS of the log-domain residual.
    pub residual: f64,
    pub window: IndexWindow,
}

impl DecayFit {
    /// Model value at index `n`.
    pub fn predict(&self, n: usize) -> f64 {
        let x = n as f64;
        let log = match self.model {
            DecayModel::Power => self.log_c - self.theta.unwrap_or(0.0) * x.ln(),
            DecayModel::Polylog => {
                self.log_c - self.theta.unwrap_or(0.0) * x.ln() + self.beta.unwrap_or(0.0) * x.ln().ln()
            }
            DecayModel::Exponential => {
                let (g, k) = self.gamma_kappa.unwrap_or((0.0, 1.0));
                self.log_c - g * x.powf(k)
            }
        };
        log.exp()
    }
}

/// Candidate fits of every model, in tie-break order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFits {
    pub best: DecayFit,
    pub candidates: Vec<DecayFit>,
}

/// Solves `min ||X b - y||` and returns `(b, rms residual)`.
fn lstsq(columns: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let rows = y.len();
    let x = Mat::<f64>::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let rhs = Mat::<f64>::from_fn(rows, 1, |i, _| y[i]);
    let b = x.qr().solve_lstsq(&rhs);
    let coef: Vec<f64> = (0..columns.len()).map(|j| b[(j, 0)]).collect();
    let ss: f64 = (0..rows)
        .map(|i| {
            let fit: f64 = columns.iter().zip(&coef).map(|(c, b)| c[i] * b).sum();
            (y[i] - fit).powi(2)
        })
        .sum();
    (coef, (ss / rows as f64).sqrt())
}

/// Fits power, polylog and exponential models; see [`fit_decay`].
pub fn fit_decay_all<T: Scalar>(s: &SpectrumResult<T>, window: IndexWindow) -> Result<DecayFits> {
    window.check_within(s.len())?;
    if window.len() < 8 {
        return Err(Error::invalid(format!("window {window} is shorter than 8")));
    }
    let mut ns = Vec::with_capacity(window.len());
    let mut logs = Vec::with_capacity(window.len());
    for n in window.indices() {
        let v = s.s(n);
        if v <= T::zero() {
            return Err(Error::numerical(
                s.label.clone(),
                format!("s_{n} = {:e} underflows inside the window {window}", v.to_f64()),
            ));
        }
        ns.push(n as f64);
        logs.push(v.to_f64().ln());
    }
    let ones = vec![1.0; ns.len()];
    let ln_n: Vec<f64> = ns.iter().map(|n| n.ln()).collect();

    let (b, r) = lstsq(&[ones.clone(), ln_n.clone()], &logs);
    let power = DecayFit {
        model: DecayModel::Power,
        theta: Some(-b[1]),
        beta: None,
        gamma_kappa: None,
        log_c: b[0],
        residual: r,
        window,
    };

    let keep: Vec<usize> = (0..ns.len()).filter(|&i| ns[i] >= 3.0).collect();
    let y: Vec<f64> = keep.iter().map(|&i| logs[i]).collect();
    let c1: Vec<f64> = keep.iter().map(|&i| ln_n[i]).collect();
    let c2: Vec<f64> = keep.iter().map(|&i| ln_n[i].ln()).collect();
    let (b, r) = lstsq(&[vec![1.0; keep.len()], c1, c2], &y);
    let polylog = DecayFit {
        model: DecayModel::Polylog,
        theta: Some(-b[1]),
        beta: Some(b[2]),
        gamma_kappa: None,
        log_c: b[0],
        residual: r,
        window,
    };

    let mut exponential: Option<DecayFit> = None;
    for kappa in kappa_grid() {
        let nk: Vec<f64> = ns.iter().map(|n| n.powf(kappa)).collect();
        let (b, r) = lstsq(&[ones.clone(), nk], &logs);
        if exponential.as_ref().is_none_or(|e| r < e.residual) {
            exponential = Some(DecayFit {
                model: DecayModel::Exponential,
                theta: None,
                beta: None,
                gamma_kappa: Some((-b[1], kappa)),
                log_c: b[0],
                residual: r,
                window,
            });
        }
    }
    let candidates = vec![power, polylog, exponential.expect("non-empty kappa grid")];
    // Residuals closer than this count as tied and the simpler model wins.
    const TIE: f64 = 1e-10;
    let mut best = candidates[0].clone();
    for c in &candidates[1..] {
        if c.residual < best.residual - TIE {
            best = c.clone();
        }
    }
    Ok(DecayFits { best, candidates })
}

/// Best of the three decay models on `window`, ties going to the simpler
/// model (power, then polylog, then exponential).
pub fn fit_decay<T: Scalar>(s: &SpectrumResult<T>, window: IndexWindow) -> Result<DecayFit> {
    Ok(fit_decay_all(s, window)?.best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Bounded,
    Vanishing,
    Diverging,
    Inconclusive,
}

/// Ratios `ρ_n = s_n(A′)/s_n(A)` over a window with their trend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumComparison {
    pub ratio_sup: f64,
    pub ratio_sup_at: usize,
    pub ratio_trend: Trend,
    pub window: IndexWindow,
    pub log_ratios: Vec<f64>,
    /// Geometric means of `ρ` over the first and last quarter.
    pub first_quarter_mean: f64,
    pub last_quarter_mean: f64,
    pub labels: (String, String),
}

impl SpectrumComparison {
    pub fn ratios(&self) -> Vec<f64> {
        self.log_ratios.iter().map(|l| l.exp()).collect()
    }
}

/// Trend of a log-ratio sequence and the log quarter means.
///
/// Quarter length is `max(1, len/4)`. Vanishing when the last quarter sits
/// below a quarter of the first, diverging above four times it, bounded
/// within a factor two with overall spread below ten.
pub fn classify_log_ratios(log_ratios: &[f64]) -> (Trend, f64, f64) {
    let len = log_ratios.len();
    if len == 0 {
        return (Trend::Inconclusive, f64::NAN, f64::NAN);
    }
    let q = (len / 4).max(1);
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let first = mean(&log_ratios[..q]);
    let last = mean(&log_ratios[len - q..]);
    let d = last - first;
    let (lo, hi) = log_ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
    let ln4 = 4f64.ln();
    let trend = if d.is_nan() {
        Trend::Inconclusive
    } else if d < -ln4 {
        Trend::Vanishing
    } else if d > ln4 {
        Trend::Diverging
    } else if d.abs() <= 2f64.ln() && hi - lo < 10f64.ln() {
        Trend::Bounded
    } else {
        Trend::Inconclusive
    };
    (trend, first, last)
}

pub fn compare_spectra<T: Scalar>(
    sa_prime: &SpectrumResult<T>,
    sa: &SpectrumResult<T>,
    window: IndexWindow,
) -> Result<SpectrumComparison> {
    window.check_within(sa_prime.len())?;
    window.check_within(sa.len())?;
    let mut log_ratios = Vec::with_capacity(window.len());
    for n in window.indices() {
        let (p, q) = (sa_prime.s(n), sa.s(n));
        if q <= T::zero() {
            return Err(Error::numerical(
                sa.label.clone(),
                format!("s_{n} underflows to zero; ratio undefined"),
            ));
        }
        log_ratios.push(p.to_f64().ln() - q.to_f64().ln());
    }
    let (ratio_trend, first, last) = classify_log_ratios(&log_ratios);
    let (arg, sup) = log_ratios
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, x)| if *x > acc.1 { (i, *x) } else { acc });
    Ok(SpectrumComparison {
        ratio_sup: sup.exp(),
        ratio_sup_at: window.start + arg,
        ratio_trend,
        window,
        first_quarter_mean: first.exp(),
        last_quarter_mean: last.exp(),
        log_ratios,
        labels: (sa_prime.label.clone(), sa.label.clone()),
    })
}

/// Decision table over a comparison and its swapped counterpart.
pub fn verdict_from_comparison(
    c_forward: &SpectrumComparison,
    c_backward: &SpectrumComparison,
) -> Result<OrderingVerdict> {
    if c_forward.window != c_backward.window {
        return Err(Error::invalid(format!(
            "comparisons use different windows ({} vs {})",
            c_forward.window, c_backward.window
        )));
    }
    use Trend::*;
    let (relation, direction) = match (c_forward.ratio_trend, c_backward.ratio_trend) {
        (Inconclusive, _) | (_, Inconclusive) => (Relation::Undecided, Direction::Forward),
        (Bounded, Bounded) => (Relation::Equivalent, Direction::Forward),
        (Vanishing, Diverging) => (Relation::StrictlyMoreIllPosed, Direction::Forward),
        (Diverging, Vanishing) => (Relation::StrictlyMoreIllPosed, Direction::Reverse),
        (Bounded, Diverging) => (Relation::MoreIllPosed, Direction::Forward),
        (Diverging, Bounded) => (Relation::MoreIllPosed, Direction::Reverse),
        _ => (Relation::Undecided, Direction::Forward),
    };
    Ok(OrderingVerdict::new(relation, direction).with_evidence(
        EvidenceTag::Spectra,
        format!(
            "{} vs {} on {}: forward {:?}, backward {:?}",
            c_forward.labels.0,
            c_forward.labels.1,
            c_forward.window,
            c_forward.ratio_trend,
            c_backward.ratio_trend
        ),
    ))
}
