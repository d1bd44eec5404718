use serde::Serialize;

use crate::error::{Error, Result};
use crate::gallery::{compose, OperatorMatrix};
use crate::scalar::Scalar;
use crate::spectral::{compute_spectrum, IndexWindow, SpectrumResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberRatio {
    pub label: String,
    pub level: usize,
    pub window: IndexWindow,
    /// `max_n s_n(A)/s_n(TA)`; infinite when some `s_n(TA)` is zero.
    pub max_ratio: f64,
    pub attained_at: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub max_ratio: f64,
    /// `(operator label, level, index n)` of the overall maximum.
    pub attained_at: (String, usize, usize),
    pub members: Vec<MemberRatio>,
    /// Set when a zero `s_n(TA)` forced the infinite sentinel.
    pub infinite: bool,
    /// Member maxima strictly increase in family order.
    pub strictly_increasing: bool,
}

/// `max_n s_n(A)/s_n(TA)` for one family member from precomputed spectra.
pub fn member_ratio<T: Scalar, U: Scalar>(
    s_a: &SpectrumResult<T>,
    s_ta: &SpectrumResult<U>,
    window: Option<IndexWindow>,
) -> Result<MemberRatio> {
    let len = s_a.len().min(s_ta.len());
    let window = match window {
        Some(w) => w,
        None => IndexWindow::default_for(len)?,
    };
    window.check_within(len)?;
    let mut best = (f64::NEG_INFINITY, window.start);
    for n in window.indices() {
        let num = s_a.s(n).to_f64();
        let den = s_ta.s(n).to_f64();
        let r = if den == 0.0 { f64::INFINITY } else { num / den };
        if r > best.0 {
            best = (r, n);
        }
    }
    Ok(MemberRatio {
        label: s_a.label.clone(),
        level: s_a.level,
        window,
        max_ratio: best.0,
        attained_at: best.1,
    })
}

/// Folds member maxima into one report.
pub fn summarize_probe(members: Vec<MemberRatio>) -> Result<ProbeReport> {
    let top = members
        .iter()
        .fold(None::<&MemberRatio>, |acc, m| match acc {
            Some(a) if a.max_ratio >= m.max_ratio => Some(a),
            _ => Some(m),
        })
        .ok_or_else(|| Error::invalid("empty operator family"))?;
    Ok(ProbeReport {
        max_ratio: top.max_ratio,
        attained_at: (top.label.clone(), top.level, top.attained_at),
        infinite: members.iter().any(|m| m.max_ratio.is_infinite()),
        strictly_increasing: members.windows(2).all(|w| w[1].max_ratio > w[0].max_ratio),
        members,
    })
}

/// `max` over the family and the window of `s_n(A)/s_n(TA)`; each member
/// pairs `T` at the member's level with `A`.
pub fn left_inverse_ratio_probe<T: Scalar>(
    family: &[(OperatorMatrix<T>, OperatorMatrix<T>)],
    window: Option<IndexWindow>,
) -> Result<ProbeReport> {
    let mut members = Vec::with_capacity(family.len());
    for (t, a) in family {
        let ta = compose(t, a)?;
        let s_a = compute_spectrum(a)?;
        let s_ta = compute_spectrum(&ta)?;
        members.push(member_ratio(&s_a, &s_ta, window)?);
    }
    summarize_probe(members)
}
