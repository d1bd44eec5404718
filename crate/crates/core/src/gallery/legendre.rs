//! Shifted Legendre polynomials on [0, 1].
//!
//! `p_i(t) = sqrt(2i - 1) P_{i-1}(2t - 1)` for `i = 1, 2, ...` is the
//! orthonormal basis used on the domain side of the moment operator.

use crate::scalar::Scalar;

/// `P_0(x), ..., P_{count-1}(x)` by the three-term recurrence.
pub fn legendre_values<T: Scalar>(x: T, count: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(T::one());
    if count == 1 {
        return out;
    }
    out.push(x);
    for k in 1..count - 1 {
        let kf = T::from_usize(k);
        let next = (T::from_usize(2 * k + 1) * x * out[k] - kf * out[k - 1]) / (kf + T::one());
        out.push(next);
    }
    out
}

/// `p_1(t), ..., p_count(t)`.
pub fn orthonormal_shifted<T: Scalar>(t: T, count: usize) -> Vec<T> {
    let x = T::from_f64(2.0) * t - T::one();
    legendre_values(x, count)
        .into_iter()
        .enumerate()
        .map(|(k, p)| T::from_usize(2 * k + 1).sqrt() * p)
        .collect()
}

/// Gauss-Legendre rule with `n` nodes on [0, 1]; exact for polynomials of
/// degree `2n - 1`.
pub fn gauss_legendre_unit<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let two = T::from_f64(2.0);
    let nf = T::from_usize(n);
    for k in 0..n {
        let guess = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = T::from_f64(guess);
        let mut dp = T::one();
        // Newton converges quadratically from the asymptotic guess; the cap
        // only guards against a stalled last digit.
        for iter in 0..100 {
            let p = legendre_values(x, n + 1);
            let (pn, pn1) = (p[n], p[n - 1]);
            dp = nf * (x * pn - pn1) / (x * x - T::one());
            let dx = pn / dp;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::from_f64(4.0) && iter > 0 {
                let p = legendre_values(x, n + 1);
                dp = nf * (x * p[n] - p[n - 1]) / (x * x - T::one());
                break;
            }
        }
        nodes.push((x + T::one()) / two);
        weights.push(T::one() / ((T::one() - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Moment `∫_0^1 t^a P̃_k(t) dt` of the (non-normalized) shifted Legendre
/// polynomial, for all `k < count`.
///
/// Equals `a!^2 / ((a-k)! (a+k+1)!)` for `k <= a` and zero otherwise; the
/// ratio recurrence keeps every factor positive, so no cancellation occurs.
pub fn shifted_moments<T: Scalar>(a: usize, count: usize) -> Vec<T> {
    let mut out = vec![T::zero(); count];
    if count == 0 {
        return out;
    }
    let mut r = T::one() / T::from_usize(a + 1);
    for (k, slot) in out.iter_mut().enumerate().take(a.min(count - 1) + 1) {
        *slot = r;
        r = r * T::from_usize(a - k) / T::from_usize(a + k + 2);
    }
    out
}

/// Transfer from piecewise-constant cells to Legendre coefficients:
/// entry `(k, i)` is `(1/sqrt(h)) ∫_{cell i} p_{k+1}(t) dt` on `cells`
/// uniform cells of width `h`. Each column holds the Legendre coefficients
/// of the normalized cell indicator.
pub fn cell_transfer<T: Scalar>(degrees: usize, cells: usize) -> ndarray::Array2<T> {
    let h = T::one() / T::from_usize(cells);
    let inv_sqrt_h = T::one() / h.sqrt();
    let two = T::from_f64(2.0);
    // Antiderivative of P_k in x = 2t - 1 is (P_{k+1} - P_{k-1}) / (2k + 1).
    let boundary: Vec<Vec<T>> = (0..=cells)
        .map(|i| {
            let x = two * T::from_usize(i) * h - T::one();
            legendre_values(x, degrees + 1)
        })
        .collect();
    ndarray::Array2::from_shape_fn((degrees, cells), |(k, i)| {
        let integral = if k == 0 {
            h
        } else {
            let (lo, hi) = (&boundary[i], &boundary[i + 1]);
            let anti = |p: &Vec<T>| (p[k + 1] - p[k - 1]) / T::from_usize(2 * k + 1);
            // dt = dx / 2
            (anti(hi) - anti(lo)) / two
        };
        T::from_usize(2 * k + 1).sqrt() * integral * inv_sqrt_h
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DoubleDouble;

    #[test]
    fn gauss_rule_integrates_monomials_exactly() {
        let (x, w) = gauss_legendre_unit::<f64>(6);
        for a in 0..12 {
            let q: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(a)).sum();
            assert!((q - 1.0 / (a as f64 + 1.0)).abs() < 1e-14, "degree {a}");
        }
        let (x, w) = gauss_legendre_unit::<DoubleDouble>(10);
        let q = x
            .iter()
            .zip(&w)
            .fold(DoubleDouble::from_f64(0.0), |acc, (t, w)| acc + *w * t.powi(19));
        let exact = DoubleDouble::from_f64(1.0) / DoubleDouble::from_f64(20.0);
        assert!((q - exact).abs().to_f64() < 1e-30);
    }

    #[test]
    fn closed_form_moments_match_quadrature() {
        let n = 12;
        let (x, w) = gauss_legendre_unit::<f64>(n);
        for a in 0..n {
            let closed = shifted_moments::<f64>(a, n);
            for (k, c) in closed.iter().enumerate() {
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(t, w)| w * t.powi(a as i32) * legendre_values(2.0 * t - 1.0, k + 1)[k])
                    .sum();
                assert!((q - c).abs() < 1e-14, "a={a} k={k}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn orthonormality_on_gauss_nodes() {
        let (x, w) = gauss_legendre_unit::<f64>(8);
        let vals: Vec<Vec<f64>> = x.iter().map(|t| orthonormal_shifted(*t, 8)).collect();
        for i in 0..8 {
            for j in 0..8 {
                let g: f64 = (0..8).map(|q| w[q] * vals[q][i] * vals[q][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn transfer_columns_are_orthonormal_when_square() {
        // Cell indicators and Legendre polynomials of degree < n span
        // different spaces, but each normalized indicator has unit norm, so
        // its full coefficient vector does too; truncation loses mass only.
        let p = cell_transfer::<f64>(16, 4);
        for i in 0..4 {
            let norm2: f64 = p.column(i).iter().map(|x| x * x).sum();
            assert!(norm2 <= 1.0 + 1e-12 && norm2 > 0.9, "{norm2}");
        }
    }
}
