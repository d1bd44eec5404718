//! One-sided (Hestenes) Jacobi SVD in the scalar's own arithmetic.
//!
//! Slower than the blocked faer kernels but exact-arithmetic agnostic, which
//! is what the double-double path needs. Column pairs are rotated until every
//! pair is orthogonal to working precision; singular values are the final
//! column norms.

use ndarray::{Array2, ArrayView2};

use super::{columns_to_matrix, complete_basis, dot, Svd, SvdJob};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 80;

pub fn svd<T: Scalar>(a: ArrayView2<'_, T>, job: SvdJob) -> Result<Svd<T>> {
    let (m, n) = a.dim();
    if m < n {
        let t = svd(a.t(), job)?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let want_vectors = job == SvdJob::Full;
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| a.column(j).to_vec()).collect();
    let mut vcols: Vec<Vec<T>> = if want_vectors {
        (0..n)
            .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
            .collect()
    } else {
        Vec::new()
    };

    let tol = T::epsilon() * T::from_usize(m).sqrt();
    let two = T::from_f64(2.0);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (two * gamma);
                let sign = if zeta < T::zero() { -T::one() } else { T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                if want_vectors {
                    rotate(&mut vcols, p, q, c, s);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical(
            "jacobi-svd",
            format!("no convergence after {MAX_SWEEPS} sweeps"),
        ));
    }

    let norms: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        norms[y]
            .partial_cmp(&norms[x])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let s: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    if !want_vectors {
        return Ok(Svd {
            u: Array2::zeros((0, 0)),
            s,
            v: Array2::zeros((0, 0)),
        });
    }

    // Columns whose norm is at the rounding level carry no reliable direction;
    // their left vectors come from basis completion instead.
    let floor = T::epsilon() * T::from_usize(m) * s[0];
    let mut ubasis: Vec<Vec<T>> = Vec::with_capacity(m);
    for &j in &order {
        if norms[j] <= floor || norms[j] == T::zero() {
            break;
        }
        ubasis.push(cols[j].iter().map(|x| *x / norms[j]).collect());
    }
    complete_basis(&mut ubasis, m);
    if ubasis.len() != m {
        return Err(Error::numerical("jacobi-svd", "basis completion failed"));
    }
    let u = columns_to_matrix(&ubasis, m);
    let v = Array2::from_shape_fn((n, n), |(i, k)| vcols[order[k]][i]);
    Ok(Svd { u, s, v })
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}
