//! Ordering verdicts shared by the spectral, factorization and multiplier
//! analyses.

use std::fmt;

use serde::Serialize;

/// Relation between the first operand `A′` and the second operand `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    MoreIllPosed,
    StrictlyMoreIllPosed,
    Equivalent,
    Incomparable,
    Undecided,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::MoreIllPosed => "MoreIllPosed",
            Relation::StrictlyMoreIllPosed => "StrictlyMoreIllPosed",
            Relation::Equivalent => "Equivalent",
            Relation::Incomparable => "Incomparable",
            Relation::Undecided => "Undecided",
        };
        f.write_str(s)
    }
}

/// Which operand the relation is asserted for.
///
/// `Forward` reads "A′ relation A", `Reverse` reads "A relation A′".
/// Symmetric relations always carry `Forward`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceTag {
    Spectra,
    Douglas,
    GuardCompactness,
    Quotient,
    Witness,
    Dichotomy,
    Codimension,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub tag: EvidenceTag,
    pub detail: String,
}

/// Numeric certificate of a factorization witness, detached from the
/// witness matrices so it can travel inside reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessCertificate {
    pub rank: usize,
    pub residual: f64,
    pub orthogonality_defect: f64,
    pub tolerance: f64,
    pub scale: f64,
}

impl WitnessCertificate {
    /// Residual within `tolerance * scale` and `R` orthogonal to 1e-10.
    pub fn is_sound(&self) -> bool {
        self.residual <= self.tolerance * self.scale && self.orthogonality_defect <= 1e-10
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingVerdict {
    pub relation: Relation,
    pub direction: Direction,
    pub witness: Option<WitnessCertificate>,
    pub evidence: Vec<Evidence>,
    /// A direction ruled out independently of spectra ("this operand is not
    /// more ill-posed than the other").
    pub excluded: Option<Direction>,
}

impl OrderingVerdict {
    pub fn new(relation: Relation, direction: Direction) -> Self {
        let direction = match relation {
            Relation::MoreIllPosed | Relation::StrictlyMoreIllPosed => direction,
            _ => Direction::Forward,
        };
        OrderingVerdict {
            relation,
            direction,
            witness: None,
            evidence: Vec::new(),
            excluded: None,
        }
    }

    pub fn undecided() -> Self {
        Self::new(Relation::Undecided, Direction::Forward)
    }

    pub fn with_evidence(mut self, tag: EvidenceTag, detail: impl Into<String>) -> Self {
        self.evidence.push(Evidence {
            tag,
            detail: detail.into(),
        });
        self
    }

    /// True when the verdict asserts `A′ ≺ A` (strict or not).
    pub fn asserts_forward_order(&self) -> bool {
        matches!(
            self.relation,
            Relation::MoreIllPosed | Relation::StrictlyMoreIllPosed
        ) && self.direction == Direction::Forward
            || self.relation == Relation::Equivalent
    }

    /// Short form such as `StrictlyMoreIllPosed(reverse)`.
    pub fn summary(&self) -> String {
        match self.relation {
            Relation::MoreIllPosed | Relation::StrictlyMoreIllPosed => {
                let d = match self.direction {
                    Direction::Forward => "forward",
                    Direction::Reverse => "reverse",
                };
                format!("{}({d})", self.relation)
            }
            _ => self.relation.to_string(),
        }
    }

    /// Folds a compactness guard into this verdict.
    ///
    /// A verdict in the guard's allowed direction is upgraded to strict; a
    /// verdict claiming the excluded direction or equivalence contradicts
    /// the guard and becomes `Undecided`.
    pub fn merge_guard(mut self, guard: &OrderingVerdict) -> Self {
        let Some(excluded) = guard.excluded else {
            return self;
        };
        self.evidence.extend(guard.evidence.iter().cloned());
        self.excluded = Some(excluded);
        match self.relation {
            Relation::MoreIllPosed | Relation::StrictlyMoreIllPosed => {
                if self.direction == excluded {
                    self.relation = Relation::Undecided;
                    self.direction = Direction::Forward;
                } else {
                    self.relation = Relation::StrictlyMoreIllPosed;
                }
            }
            Relation::Equivalent => self.relation = Relation::Undecided,
            Relation::Incomparable | Relation::Undecided => {}
        }
        self
    }
}

/// Outcome of a one-directional test of `A′ ≺ A` (or its converse).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inclusion {
    Holds,
    Fails,
    Unknown,
}

/// Combines a forward test (`A′ ≺ A`) with a backward test (`A ≺ A′`).
pub fn two_sided(forward: Inclusion, backward: Inclusion) -> OrderingVerdict {
    use Inclusion::*;
    let (relation, direction) = match (forward, backward) {
        (Holds, Holds) => (Relation::Equivalent, Direction::Forward),
        (Holds, Fails) => (Relation::StrictlyMoreIllPosed, Direction::Forward),
        (Fails, Holds) => (Relation::StrictlyMoreIllPosed, Direction::Reverse),
        (Holds, Unknown) => (Relation::MoreIllPosed, Direction::Forward),
        (Unknown, Holds) => (Relation::MoreIllPosed, Direction::Reverse),
        (Fails, Fails) => (Relation::Incomparable, Direction::Forward),
        _ => (Relation::Undecided, Direction::Forward),
    };
    OrderingVerdict::new(relation, direction)
}
