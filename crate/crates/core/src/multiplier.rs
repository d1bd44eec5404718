//! Non-negative multiplication operators and their quotient comparison.
//!
//! Two multipliers on a common measure space are compared through the
//! essential suprema of `f′/f` and `f/f′`, approximated by grid maxima on a
//! sequence of grids refined toward the singular end of the domain.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gallery::{build_multiplication, Domain, GridSpec, OperatorMatrix};
use crate::scalar::Scalar;
use crate::verdict::{Direction, EvidenceTag, OrderingVerdict, Relation};

/// Closed-form multiplier families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum MultiplierFn {
    /// `c t`
    Linear { c: f64 },
    /// `t^κ`
    Power { kappa: f64 },
    /// `exp(-1/t^κ)`
    ExpInv { kappa: f64 },
    /// `(1 + t)^{-p}`
    InvPoly { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    FiniteMeasureUnitInterval,
    InfiniteMeasureHalfLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    IncreasingFromZero,
    DecreasingToZero,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierSpec {
    pub name: String,
    pub function: MultiplierFn,
    pub domain_kind: DomainKind,
    pub monotonicity: Monotonicity,
}

impl MultiplierSpec {
    pub fn new(function: MultiplierFn) -> Result<Self> {
        let (name, param) = match function {
            MultiplierFn::Linear { c } => ("linear", c),
            MultiplierFn::Power { kappa } => ("power", kappa),
            MultiplierFn::ExpInv { kappa } => ("exp-inv", kappa),
            MultiplierFn::InvPoly { p } => ("inv-poly", p),
        };
        if !(param.is_finite() && param > 0.0) {
            return Err(Error::invalid(format!(
                "multiplier `{name}` needs a finite positive parameter, got {param}"
            )));
        }
        let (domain_kind, monotonicity) = match function {
            MultiplierFn::InvPoly { .. } => {
                (DomainKind::InfiniteMeasureHalfLine, Monotonicity::DecreasingToZero)
            }
            _ => (
                DomainKind::FiniteMeasureUnitInterval,
                Monotonicity::IncreasingFromZero,
            ),
        };
        Ok(MultiplierSpec {
            name: format!("{name}:{param}"),
            function,
            domain_kind,
            monotonicity,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.function {
            MultiplierFn::Linear { c } => c * t,
            MultiplierFn::Power { kappa } => t.powf(kappa),
            MultiplierFn::ExpInv { kappa } => (-1.0 / t.powf(kappa)).exp(),
            MultiplierFn::InvPoly { p } => (1.0 + t).powf(-p),
        }
    }

    /// Values on `nodes`, which must be sorted ascending; checks sign,
    /// finiteness and the declared monotonicity.
    pub fn eval_nodes(&self, nodes: &[f64]) -> Result<Vec<f64>> {
        let values: Vec<f64> = nodes.iter().map(|&t| self.eval(t)).collect();
        if let Some((t, v)) = nodes
            .iter()
            .zip(&values)
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::invalid(format!(
                "multiplier `{self}` has value {v} at t = {t}"
            )));
        }
        let ok = match self.monotonicity {
            Monotonicity::IncreasingFromZero => values.windows(2).all(|w| w[0] <= w[1]),
            Monotonicity::DecreasingToZero => values.windows(2).all(|w| w[0] >= w[1]),
            Monotonicity::None => true,
        };
        if !ok {
            return Err(Error::invalid(format!(
                "multiplier `{self}` violates its declared monotonicity on the grid"
            )));
        }
        Ok(values)
    }
}

impl fmt::Display for MultiplierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for MultiplierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("multiplier `{s}` needs the form name:param")))?;
        let x: f64 = param
            .parse()
            .map_err(|_| Error::invalid(format!("multiplier parameter `{param}` is not a number")))?;
        let function = match name {
            "linear" => MultiplierFn::Linear { c: x },
            "power" => MultiplierFn::Power { kappa: x },
            "exp-inv" => MultiplierFn::ExpInv { kappa: x },
            "inv-poly" => MultiplierFn::InvPoly { p: x },
            _ => {
                return Err(Error::invalid(format!(
                    "unknown multiplier `{name}`; valid: linear, power, exp-inv, inv-poly"
                )))
            }
        };
        let spec = MultiplierSpec::new(function)?;
        // Keep the caller's spelling of the parameter so identifiers round-trip.
        Ok(MultiplierSpec {
            name: s.to_string(),
            ..spec
        })
    }
}

/// Default refinement: dyadic depths `2^{-j}` toward `t = 0` on the unit
/// interval, truncation endpoints on the half line.
pub fn default_levels(kind: DomainKind) -> Vec<f64> {
    match kind {
        DomainKind::FiniteMeasureUnitInterval => vec![2.0, 4.0, 6.0, 8.0],
        DomainKind::InfiniteMeasureHalfLine => vec![10.0, 100.0, 1000.0],
    }
}

/// Nodes of one refinement level.
///
/// Unit interval, depth `j`: the uniform points `i/N` not below `2^{-j}`
/// together with `2^{-0}, ..., 2^{-j}`. Half line, endpoint `T`: `N + 1`
/// uniform points on [0, T].
pub fn level_nodes(kind: DomainKind, n_points: usize, level: f64) -> Result<Vec<f64>> {
    match kind {
        DomainKind::FiniteMeasureUnitInterval => {
            if !(level >= 0.0 && level.fract() == 0.0 && level <= 60.0) {
                return Err(Error::invalid(format!(
                    "unit-interval refinement depth must be an integer in 0..=60, got {level}"
                )));
            }
            let depth = level as i32;
            let floor = 2f64.powi(-depth);
            let mut nodes: Vec<f64> = (1..=n_points)
                .map(|i| i as f64 / n_points as f64)
                .filter(|t| *t >= floor)
                .chain((0..=depth).map(|j| 2f64.powi(-j)))
                .collect();
            nodes.sort_by(|a, b| a.total_cmp(b));
            nodes.dedup();
            Ok(nodes)
        }
        DomainKind::InfiniteMeasureHalfLine => GridSpec::half_line(n_points + 1, level)?.nodes(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupClass {
    Bounded,
    Unbounded,
    Inconclusive,
}

/// Growth of a grid supremum across refinement levels: unbounded after a
/// tenfold increase, bounded once the last level moves by less than 2x.
pub fn classify_sups(sups: &[f64]) -> SupClass {
    let (Some(&first), Some(&last)) = (sups.first(), sups.last()) else {
        return SupClass::Inconclusive;
    };
    if last.is_infinite() || last >= 10.0 * first {
        return SupClass::Unbounded;
    }
    if sups.len() < 2 {
        return SupClass::Inconclusive;
    }
    let prev = sups[sups.len() - 2];
    if last < 2.0 * prev {
        SupClass::Bounded
    } else {
        SupClass::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSup {
    pub level: f64,
    pub forward: f64,
    pub forward_at: f64,
    pub backward: f64,
    pub backward_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientReport {
    /// `sup f′/f` on the finest level.
    pub sup_ratio: f64,
    pub attained_near: f64,
    /// `(sup f′/f, sup f/f′)` on the finest level.
    pub both_directions: (f64, f64),
    pub levels: Vec<LevelSup>,
    pub forward_class: SupClass,
    pub backward_class: SupClass,
    pub verdict: OrderingVerdict,
}

fn grid_sup(num: &[f64], den: &[f64], nodes: &[f64]) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, nodes[0]);
    for ((n, d), t) in num.iter().zip(den).zip(nodes) {
        let q = n / d;
        if q > best.0 {
            best = (q, *t);
        }
    }
    best
}

/// Compares `H′ = M_{f′}` with `H = M_f` through the quotient suprema.
pub fn quotient_verdict(
    f_prime: &MultiplierSpec,
    f: &MultiplierSpec,
    grid: &GridSpec,
    refinement_levels: &[f64],
) -> Result<QuotientReport> {
    if f_prime.domain_kind != f.domain_kind {
        return Err(Error::invalid(format!(
            "multipliers `{f_prime}` and `{f}` live on different domains"
        )));
    }
    let grid_kind = match grid.domain() {
        Domain::UnitInterval => DomainKind::FiniteMeasureUnitInterval,
        Domain::HalfLineTruncated { .. } => DomainKind::InfiniteMeasureHalfLine,
        Domain::UnitSquare => return Err(Error::invalid("multipliers need a 1-D grid")),
    };
    if grid_kind != f.domain_kind {
        return Err(Error::invalid(format!(
            "grid domain does not match multiplier `{f}`"
        )));
    }
    if refinement_levels.is_empty() {
        return Err(Error::invalid("at least one refinement level is required"));
    }
    let mut levels = Vec::with_capacity(refinement_levels.len());
    for &level in refinement_levels {
        let nodes = level_nodes(f.domain_kind, grid.n_points(), level)?;
        let vp = f_prime.eval_nodes(&nodes)?;
        let v = f.eval_nodes(&nodes)?;
        if let Some(i) = (0..nodes.len()).find(|&i| v[i] == 0.0 || vp[i] == 0.0) {
            return Err(Error::invalid(format!(
                "multiplier vanishes at grid node t = {}; grids must avoid exact zeros",
                nodes[i]
            )));
        }
        let (forward, forward_at) = grid_sup(&vp, &v, &nodes);
        let (backward, backward_at) = grid_sup(&v, &vp, &nodes);
        levels.push(LevelSup {
            level,
            forward,
            forward_at,
            backward,
            backward_at,
        });
    }
    let fwd: Vec<f64> = levels.iter().map(|l| l.forward).collect();
    let bwd: Vec<f64> = levels.iter().map(|l| l.backward).collect();
    let forward_class = classify_sups(&fwd);
    let backward_class = classify_sups(&bwd);
    let (relation, direction) = match (forward_class, backward_class) {
        (SupClass::Bounded, SupClass::Bounded) => (Relation::Equivalent, Direction::Forward),
        (SupClass::Bounded, SupClass::Unbounded) => {
            (Relation::StrictlyMoreIllPosed, Direction::Forward)
        }
        (SupClass::Unbounded, SupClass::Bounded) => {
            (Relation::StrictlyMoreIllPosed, Direction::Reverse)
        }
        _ => (Relation::Undecided, Direction::Forward),
    };
    let last = levels.last().expect("non-empty levels");
    let verdict = OrderingVerdict::new(relation, direction).with_evidence(
        EvidenceTag::Quotient,
        format!(
            "sup {f_prime}/{f}: {forward_class:?}; sup {f}/{f_prime}: {backward_class:?} over {} levels",
            levels.len()
        ),
    );
    Ok(QuotientReport {
        sup_ratio: last.forward,
        attained_near: last.forward_at,
        both_directions: (last.forward, last.backward),
        forward_class,
        backward_class,
        verdict,
        levels,
    })
}

/// `H′ = R H S` with `R = I` and `S = M_{f′/f}` on a common grid.
#[derive(Debug, Clone)]
pub struct SelfAdjointPair<T> {
    pub h_prime: OperatorMatrix<T>,
    pub h: OperatorMatrix<T>,
    pub s: Array2<T>,
    pub r: Array2<T>,
    /// Largest entry of `|H′ - R H S|`.
    pub residual: T,
}

pub fn build_selfadjoint_pair<T: Scalar>(
    f_prime: &MultiplierSpec,
    f: &MultiplierSpec,
    grid: &GridSpec,
) -> Result<SelfAdjointPair<T>> {
    let report = quotient_verdict(f_prime, f, grid, &default_levels(f.domain_kind))?;
    if report.forward_class != SupClass::Bounded {
        return Err(Error::PreconditionViolation(format!(
            "quotient {f_prime}/{f} is not bounded ({:?})",
            report.forward_class
        )));
    }
    let h_prime = build_multiplication::<T>(f_prime, grid)?;
    let h = build_multiplication::<T>(f, grid)?;
    let n = h.dim().0;
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        let d = h.entries[[i, i]];
        if d == T::zero() {
            return Err(Error::invalid("multiplier vanishes at a grid node"));
        }
        s[[i, i]] = h_prime.entries[[i, i]] / d;
    }
    let r = crate::linalg::identity::<T>(n);
    let rhs = r.dot(&h.entries).dot(&s);
    let residual = h_prime
        .entries
        .iter()
        .zip(rhs.iter())
        .fold(T::zero(), |acc, (a, b)| acc.max_of((*a - *b).abs()));
    Ok(SelfAdjointPair {
        h_prime,
        h,
        s,
        r,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> MultiplierSpec {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_validates_names() {
        assert_eq!(spec("exp-inv:1").function, MultiplierFn::ExpInv { kappa: 1.0 });
        assert_eq!(spec("inv-poly:2").domain_kind, DomainKind::InfiniteMeasureHalfLine);
        assert!("linear:-1".parse::<MultiplierSpec>().is_err());
        assert!("cos:1".parse::<MultiplierSpec>().is_err());
        assert!("power".parse::<MultiplierSpec>().is_err());
    }

    #[test]
    fn linear_pair_is_equivalent_with_exact_ratio() {
        let grid = GridSpec::midpoint(64).unwrap();
        let r = quotient_verdict(&spec("linear:3"), &spec("linear:2"), &grid, &default_levels(DomainKind::FiniteMeasureUnitInterval)).unwrap();
        assert_eq!(r.verdict.relation, Relation::Equivalent);
        assert!(r.levels.iter().all(|l| l.forward == 1.5));
    }

    #[test]
    fn exponential_zero_is_strictly_more_ill_posed() {
        let grid = GridSpec::midpoint(64).unwrap();
        let r = quotient_verdict(&spec("exp-inv:1"), &spec("power:1"), &grid, &default_levels(DomainKind::FiniteMeasureUnitInterval)).unwrap();
        assert_eq!(r.verdict.relation, Relation::StrictlyMoreIllPosed);
        assert_eq!(r.verdict.direction, Direction::Forward);
        assert!((r.sup_ratio - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(r.attained_near, 1.0);
        // Swapping the operands flips the direction.
        let back = quotient_verdict(&spec("power:1"), &spec("exp-inv:1"), &grid, &default_levels(DomainKind::FiniteMeasureUnitInterval)).unwrap();
        assert_eq!(back.verdict.direction, Direction::Reverse);
    }

    #[test]
    fn half_line_decay_orders() {
        let grid = GridSpec::half_line(1000, 100.0).unwrap();
        let r = quotient_verdict(&spec("inv-poly:2"), &spec("inv-poly:1"), &grid, &default_levels(DomainKind::InfiniteMeasureHalfLine)).unwrap();
        assert_eq!(r.sup_ratio, 1.0);
        assert_eq!(r.attained_near, 0.0);
        assert_eq!(r.verdict.relation, Relation::StrictlyMoreIllPosed);
    }

    #[test]
    fn sup_classification() {
        assert_eq!(classify_sups(&[1.0, 1.0, 1.0]), SupClass::Bounded);
        assert_eq!(classify_sups(&[1.0, 5.0, 20.0]), SupClass::Unbounded);
        assert_eq!(classify_sups(&[1.0, 2.0, 5.0]), SupClass::Inconclusive);
    }

    #[test]
    fn selfadjoint_pair_factorizes_exactly() {
        let grid = GridSpec::midpoint(8).unwrap();
        let p = build_selfadjoint_pair::<f64>(&spec("power:2"), &spec("power:1"), &grid).unwrap();
        let nodes = grid.nodes().unwrap();
        for (i, t) in nodes.iter().enumerate() {
            assert!((p.s[[i, i]] - t).abs() < 1e-15);
        }
        assert!(p.residual <= 1e-14);
        let err = build_selfadjoint_pair::<f64>(&spec("power:1"), &spec("power:2"), &grid);
        assert!(matches!(err, Err(Error::PreconditionViolation(_))));
    }
}
