//! Factorization witnesses, polar decomposition, range-inclusion estimates
//! and the codimension check.

mod codim;
mod douglas;
mod polar;
mod probe;
mod witness;

pub use codim::{codim_lemma_check, CodimReport};
pub use douglas::{classify_levels, douglas_constant, douglas_constant_at, DouglasEstimate, LevelTrend, PINV_CUTOFF};
pub use polar::{polar_absolute, PolarDecomposition};
pub use probe::{left_inverse_ratio_probe, member_ratio, summarize_probe, MemberRatio, ProbeReport};
pub use witness::{build_witness, compose_witnesses, truncated_residual, FactorizationWitness, WITNESS_TOLERANCE};

use crate::gallery::OperatorKind;
use crate::verdict::{Direction, EvidenceTag, OrderingVerdict};

/// A noncompact operator is never more ill-posed than a compact one.
///
/// Returns a verdict whose `excluded` direction is the "noncompact ≺
/// compact" reading; merging it into a spectral verdict upgrades the
/// opposite order to strict. `None` when both kinds agree.
pub fn compactness_guard(a_prime_kind: OperatorKind, a_kind: OperatorKind) -> Option<OrderingVerdict> {
    use OperatorKind::*;
    let excluded = match (a_prime_kind, a_kind) {
        (CompactModel, NoncompactModel) => Direction::Reverse,
        (NoncompactModel, CompactModel) => Direction::Forward,
        _ => return None,
    };
    let detail = match excluded {
        Direction::Reverse => "A is noncompact and A′ compact: A is not more ill-posed than A′",
        Direction::Forward => "A′ is noncompact and A compact: A′ is not more ill-posed than A",
    };
    let mut v = OrderingVerdict::undecided().with_evidence(EvidenceTag::GuardCompactness, detail);
    v.excluded = Some(excluded);
    Some(v)
}
