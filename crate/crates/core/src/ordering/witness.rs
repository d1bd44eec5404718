use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::gallery::OperatorMatrix;
use crate::linalg::{self, SvdJob};
use crate::scalar::Scalar;
use crate::verdict::WitnessCertificate;

/// Residual tolerance of witnesses, relative to `s_1(A′)`.
pub const WITNESS_TOLERANCE: f64 = 1e-8;

/// `A′ ≈ R A S` on the leading `rank` right singular directions of `A′`.
#[derive(Debug, Clone)]
pub struct FactorizationWitness<T> {
    /// Isometry from the range space of `A` into that of `A′`.
    pub r: Array2<T>,
    /// Maps the domain of `A′` into the domain of `A`.
    pub s: Array2<T>,
    /// `σ_i = s_i(A′) / s_i(A)`, `i <= rank`.
    pub sigma: Vec<T>,
    pub rank: usize,
    /// `||(A′ - R A S) V′_rank||_2`.
    pub residual: T,
    /// `||R^T R - I||_2`.
    pub orthogonality_defect: T,
    /// `s_1(A′)`, the scale of the residual tolerance.
    pub scale: T,
    /// Leading right singular vectors of `A′` (columns), on which the
    /// residual is measured.
    pub subspace: Array2<T>,
    pub labels: (String, String),
}

impl<T: Scalar> FactorizationWitness<T> {
    pub fn certificate(&self) -> WitnessCertificate {
        WitnessCertificate {
            rank: self.rank,
            residual: self.residual.to_f64(),
            orthogonality_defect: self.orthogonality_defect.to_f64(),
            tolerance: WITNESS_TOLERANCE,
            scale: self.scale.to_f64(),
        }
    }

    pub fn max_sigma(&self) -> T {
        self.sigma.iter().fold(T::zero(), |m, s| m.max_of(*s))
    }
}

/// `||(A′ - R A S) W||_2`.
pub fn truncated_residual<T: Scalar>(
    a_prime: &Array2<T>,
    a: &Array2<T>,
    r: &Array2<T>,
    s: &Array2<T>,
    w: &Array2<T>,
) -> Result<T> {
    let lhs = a_prime.dot(w);
    let rhs = r.dot(&a.dot(&s.dot(w)));
    linalg::op_norm((&lhs - &rhs).view())
}

/// Builds the witness `A′ = R A S` from the singular value decompositions
/// `A = U Σ V^T`, `A′ = U′ Σ′ V′^T`:
/// `S = Σ_{i<=rank} σ_i v_i v′_i^T` and `R = U′ U^T` (restricted to the
/// first `dim Y` columns of `U′`), which sends `u_i` to `u′_i` for every `i`.
pub fn build_witness<T: Scalar>(
    a_prime: &OperatorMatrix<T>,
    a: &OperatorMatrix<T>,
    rank: usize,
) -> Result<FactorizationWitness<T>> {
    let (mp, np) = a_prime.dim();
    let (m, n) = a.dim();
    if rank == 0 || rank > mp.min(np) || rank > m.min(n) {
        return Err(Error::invalid(format!(
            "rank {rank} exceeds the dimensions of {}x{} and {}x{}",
            mp, np, m, n
        )));
    }
    if mp < m {
        return Err(Error::invalid(format!(
            "range space of `{}` ({mp}) is smaller than that of `{}` ({m}); no isometry exists",
            a_prime.label, a.label
        )));
    }
    let da = linalg::svd(a.view(), SvdJob::Full)?;
    let dp = linalg::svd(a_prime.view(), SvdJob::Full)?;
    let floor = da.s[0] * T::epsilon() * T::from_usize(m.max(n));
    if let Some(i) = (0..rank).find(|&i| da.s[i] <= floor) {
        return Err(Error::invalid(format!(
            "s_{}(`{}`) = {:e} vanishes within rank {rank}",
            i + 1,
            a.label,
            da.s[i].to_f64()
        )));
    }
    let sigma: Vec<T> = (0..rank).map(|i| dp.s[i] / da.s[i]).collect();

    let vk = da.v.slice(s![.., ..rank]);
    let vpk = dp.v.slice(s![.., ..rank]).to_owned();
    let scaled = Array2::from_shape_fn((n, rank), |(r, c)| vk[[r, c]] * sigma[c]);
    let s_mat = scaled.dot(&vpk.t());
    let r_mat = dp.u.slice(s![.., ..m]).dot(&da.u.t());

    let residual = truncated_residual(&a_prime.entries, &a.entries, &r_mat, &s_mat, &vpk)?;
    let orthogonality_defect = linalg::orthogonality_defect(r_mat.view())?;
    Ok(FactorizationWitness {
        r: r_mat,
        s: s_mat,
        sigma,
        rank,
        residual,
        orthogonality_defect,
        scale: dp.s[0],
        subspace: vpk,
        labels: (a_prime.label.to_string(), a.label.to_string()),
    })
}

/// Transitive witness: from `A″ = R₁ A′ S₁` and `A′ = R₂ A S₂` forms
/// `(R₁ R₂, S₂ S₁)` for `A″ ≺ A`, measured on the subspace of `w1`.
///
/// Returns the witness and the bound `res₁ + ||R₁|| res₂ ||S₁||`.
pub fn compose_witnesses<T: Scalar>(
    w1: &FactorizationWitness<T>,
    w2: &FactorizationWitness<T>,
    a_double_prime: &OperatorMatrix<T>,
    a: &OperatorMatrix<T>,
) -> Result<(FactorizationWitness<T>, T)> {
    if w1.r.ncols() != w2.r.nrows() || w2.s.ncols() != w1.s.nrows() {
        return Err(Error::invalid("witnesses do not chain (dimension mismatch)"));
    }
    if w2.rank < w1.rank {
        return Err(Error::invalid(format!(
            "inner witness rank {} is below outer rank {}",
            w2.rank, w1.rank
        )));
    }
    let r = w1.r.dot(&w2.r);
    let s = w2.s.dot(&w1.s);
    let residual = truncated_residual(&a_double_prime.entries, &a.entries, &r, &s, &w1.subspace)?;
    let bound = w1.residual + linalg::op_norm(w1.r.view())? * w2.residual * linalg::op_norm(w1.s.view())?;
    let sigma = w1
        .sigma
        .iter()
        .zip(&w2.sigma)
        .map(|(a, b)| *a * *b)
        .collect();
    let orthogonality_defect = linalg::orthogonality_defect(r.view())?;
    Ok((
        FactorizationWitness {
            r,
            s,
            sigma,
            rank: w1.rank,
            residual,
            orthogonality_defect,
            scale: w1.scale,
            subspace: w1.subspace.clone(),
            labels: (w1.labels.0.clone(), w2.labels.1.clone()),
        },
        bound,
    ))
}
