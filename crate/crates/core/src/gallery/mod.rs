//! Finite-dimensional discretizations of the model operators.
//!
//! Every builder is a pure function returning an [`OperatorMatrix`] whose
//! entries are computed in the requested scalar type. Identifiers are
//! stable strings (`J^m:<m>`, `E^k:<k>:<dim>`, `BH`, `J2`, `M:<fname>`, and
//! `*`-joined products such as `BH*J^m:1`).

pub mod legendre;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multiplier::{DomainKind, MultiplierSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Domain {
    UnitInterval,
    UnitSquare,
    HalfLineTruncated { t_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    MidpointCollocation,
    LegendreBasis,
    DiagonalSurrogate,
}

/// Discretization carrier of an operator's domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    n_points: usize,
    domain: Domain,
    scheme: Scheme,
}

impl GridSpec {
    pub fn new(n_points: usize, domain: Domain, scheme: Scheme) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::invalid("grid needs at least one point"));
        }
        if let Domain::HalfLineTruncated { t_max } = domain {
            if !(t_max.is_finite() && t_max > 0.0) {
                return Err(Error::invalid(format!(
                    "half-line truncation must be finite and positive, got {t_max}"
                )));
            }
        }
        Ok(GridSpec {
            n_points,
            domain,
            scheme,
        })
    }

    pub fn midpoint(n_points: usize) -> Result<Self> {
        Self::new(n_points, Domain::UnitInterval, Scheme::MidpointCollocation)
    }

    pub fn legendre(n_points: usize) -> Result<Self> {
        Self::new(n_points, Domain::UnitInterval, Scheme::LegendreBasis)
    }

    pub fn half_line(n_points: usize, t_max: f64) -> Result<Self> {
        Self::new(
            n_points,
            Domain::HalfLineTruncated { t_max },
            Scheme::MidpointCollocation,
        )
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Matrix dimension on the domain side (`n_points²` on the square).
    pub fn dimension(&self) -> usize {
        match self.domain {
            Domain::UnitSquare => self.n_points * self.n_points,
            _ => self.n_points,
        }
    }

    /// Collocation nodes: cell midpoints `(i - 1/2)/N` on [0, 1], or the
    /// uniform points `i T/(N - 1)` (both ends included) on [0, T].
    pub fn nodes(&self) -> Result<Vec<f64>> {
        if self.scheme != Scheme::MidpointCollocation {
            return Err(Error::invalid("only collocation grids carry nodes"));
        }
        let n = self.n_points;
        match self.domain {
            Domain::UnitInterval => Ok((0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()),
            Domain::HalfLineTruncated { t_max } => {
                if n == 1 {
                    return Ok(vec![0.0]);
                }
                Ok((0..n).map(|i| i as f64 * t_max / (n - 1) as f64).collect())
            }
            Domain::UnitSquare => Err(Error::invalid("square grids have no 1-D node list")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    CompactModel,
    NoncompactModel,
}

/// Registry identifier of a gallery operator.
#[derive(Debug, Clone, PartialEq)]
pub enum GalleryId {
    Integration { m: usize },
    Embedding { k: usize, dim: usize },
    Hausdorff,
    MixedIntegration,
    Multiplication(MultiplierSpec),
    /// Modulus `|A| = (A^T A)^{1/2}` from the polar decomposition.
    Absolute(Box<GalleryId>),
    /// Left-to-right operator product.
    Product(Vec<GalleryId>),
}

pub const VALID_IDENTIFIERS: &str =
    "J^m:<m>, E^k:<k>:<dim>, BH, J2, M:<linear:c|power:kappa|exp-inv:kappa|inv-poly:p>, abs(<id>), and products joined by '*'";

impl GalleryId {
    /// Kind of the operator this identifier builds; products are compact
    /// when any factor is.
    pub fn kind(&self) -> OperatorKind {
        match self {
            GalleryId::Hausdorff | GalleryId::Multiplication(_) => OperatorKind::NoncompactModel,
            GalleryId::Absolute(inner) => inner.kind(),
            GalleryId::Product(parts) => {
                if parts.iter().any(|p| p.kind() == OperatorKind::CompactModel) {
                    OperatorKind::CompactModel
                } else {
                    OperatorKind::NoncompactModel
                }
            }
            _ => OperatorKind::CompactModel,
        }
    }
}

impl fmt::Display for GalleryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GalleryId::Integration { m } => write!(f, "J^m:{m}"),
            GalleryId::Embedding { k, dim } => write!(f, "E^k:{k}:{dim}"),
            GalleryId::Hausdorff => f.write_str("BH"),
            GalleryId::MixedIntegration => f.write_str("J2"),
            GalleryId::Multiplication(spec) => write!(f, "M:{spec}"),
            GalleryId::Absolute(inner) => write!(f, "abs({inner})"),
            GalleryId::Product(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for GalleryId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("unknown operator `{s}`; valid: {VALID_IDENTIFIERS}"));
        let factors = split_top_level(s).ok_or_else(bad)?;
        if factors.len() > 1 {
            let parts = factors
                .into_iter()
                .map(str::parse)
                .collect::<Result<Vec<GalleryId>>>()?;
            return Ok(GalleryId::Product(parts));
        }
        if let Some(inner) = s.strip_prefix("abs(").and_then(|r| r.strip_suffix(')')) {
            return Ok(GalleryId::Absolute(Box::new(inner.parse()?)));
        }
        let positive = |x: &str| x.parse::<usize>().ok().filter(|v| *v >= 1).ok_or_else(bad);
        if let Some(rest) = s.strip_prefix("J^m:") {
            return Ok(GalleryId::Integration { m: positive(rest)? });
        }
        if let Some(rest) = s.strip_prefix("E^k:") {
            let (k, dim) = rest.split_once(':').ok_or_else(bad)?;
            let dim = positive(dim)?;
            if dim > 2 {
                return Err(bad());
            }
            return Ok(GalleryId::Embedding {
                k: positive(k)?,
                dim,
            });
        }
        if let Some(rest) = s.strip_prefix("M:") {
            let spec = rest
                .parse::<MultiplierSpec>()
                .map_err(|e| Error::Config(format!("operator `{s}`: {e}")))?;
            return Ok(GalleryId::Multiplication(spec));
        }
        match s {
            "BH" => Ok(GalleryId::Hausdorff),
            "J2" => Ok(GalleryId::MixedIntegration),
            _ => Err(bad()),
        }
    }
}

/// Splits on `*` outside parentheses; `None` on unbalanced input.
fn split_top_level(s: &str) -> Option<Vec<&str>> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0usize, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            '*' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return None;
    }
    parts.push(&s[start..]);
    Some(parts)
}

impl Serialize for GalleryId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Dense discretization of a gallery operator.
#[derive(Debug, Clone)]
pub struct OperatorMatrix<T> {
    pub entries: Array2<T>,
    /// Grid of the domain side.
    pub grid: GridSpec,
    pub label: GalleryId,
    pub kind: OperatorKind,
    /// `(P, Q)` with `entries = P ⊗ Q`; stale if `entries` is edited.
    kronecker: Option<Arc<(Array2<T>, Array2<T>)>>,
}

impl<T: Scalar> OperatorMatrix<T> {
    /// Wraps a matrix, rejecting non-finite entries.
    pub fn from_parts(entries: Array2<T>, grid: GridSpec, label: GalleryId, kind: OperatorKind) -> Result<Self> {
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::numerical(label.to_string(), "non-finite matrix entry"));
        }
        Ok(OperatorMatrix {
            entries,
            grid,
            label,
            kind,
            kronecker: None,
        })
    }

    /// Kronecker factors recorded by the builder, if any.
    pub fn kronecker_factors(&self) -> Option<(ArrayView2<'_, T>, ArrayView2<'_, T>)> {
        self.kronecker.as_deref().map(|(p, q)| (p.view(), q.view()))
    }

    pub fn dim(&self) -> (usize, usize) {
        self.entries.dim()
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.entries.view()
    }

    /// Converts the entries to another scalar type through `f64`.
    pub fn cast<U: Scalar>(&self) -> OperatorMatrix<U> {
        OperatorMatrix {
            entries: self.entries.mapv(|x| U::from_f64(x.to_f64())),
            grid: self.grid,
            label: self.label.clone(),
            kind: self.kind,
            kronecker: self.kronecker.as_deref().map(|(p, q)| {
                Arc::new((p.mapv(|x| U::from_f64(x.to_f64())), q.mapv(|x| U::from_f64(x.to_f64()))))
            }),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_matrix_csv(path, self.entries.view())
    }
}

/// Collocation matrix of `J^m` on `N` midpoints.
///
/// Entry `(i, j)` is `h (s_i - t_j)^{m-1} / (m-1)!` below the diagonal and
/// `(h/2)^m / m!` (the kernel integrated over the half cell) on it.
pub fn build_integration<T: Scalar>(m: usize, grid: &GridSpec) -> Result<OperatorMatrix<T>> {
    if m < 1 {
        return Err(Error::invalid("integration order must be at least 1"));
    }
    if grid.domain != Domain::UnitInterval || grid.scheme != Scheme::MidpointCollocation {
        return Err(Error::invalid(
            "integration operators need a unit-interval midpoint grid",
        ));
    }
    let n = grid.n_points;
    let h = T::one() / T::from_usize(n);
    let fact = (1..m).fold(T::one(), |acc, k| acc * T::from_usize(k));
    let diag = (h / T::from_f64(2.0)).powi(m as u64) / (fact * T::from_usize(m));
    let entries = Array2::from_shape_fn((n, n), |(i, j)| match j.cmp(&i) {
        std::cmp::Ordering::Less => h * (T::from_usize(i - j) * h).powi(m as u64 - 1) / fact,
        std::cmp::Ordering::Equal => diag,
        std::cmp::Ordering::Greater => T::zero(),
    });
    OperatorMatrix::from_parts(
        entries,
        *grid,
        GalleryId::Integration { m },
        OperatorKind::CompactModel,
    )
}

/// Sorted singular values of the embedding surrogate `E^k`.
pub fn embedding_values<T: Scalar>(k: usize, dim: usize, n: usize) -> Result<Vec<T>> {
    if k < 1 || n < 1 {
        return Err(Error::invalid("embedding order and size must be positive"));
    }
    match dim {
        1 => Ok((1..=n)
            .map(|i| T::one() / T::from_usize(i).powi(k as u64))
            .collect()),
        2 => {
            let mut keyed: Vec<(usize, T)> = Vec::with_capacity(n * n);
            for i in 1..=n {
                for j in 1..=n {
                    let q = 1 + i * i + j * j;
                    let qt = T::from_usize(q);
                    let mut den = qt.powi((k / 2) as u64);
                    if k % 2 == 1 {
                        den *= qt.sqrt();
                    }
                    keyed.push((q, T::one() / den));
                }
            }
            // Values depend on q only, so sorting by the integer key is exact.
            keyed.sort_by_key(|(q, _)| *q);
            Ok(keyed.into_iter().map(|(_, v)| v).collect())
        }
        _ => Err(Error::invalid(format!("embedding dimension must be 1 or 2, got {dim}"))),
    }
}

/// Diagonal surrogate realizing the singular values of `E^k` on a
/// `dim`-dimensional domain with `n` points per axis.
pub fn build_embedding_surrogate<T: Scalar>(k: usize, dim: usize, n: usize) -> Result<OperatorMatrix<T>> {
    let values = embedding_values::<T>(k, dim, n)?;
    let domain = if dim == 2 {
        Domain::UnitSquare
    } else {
        Domain::UnitInterval
    };
    let grid = GridSpec::new(n, domain, Scheme::DiagonalSurrogate)?;
    OperatorMatrix::from_parts(
        Array2::from_diag(&ndarray::Array1::from(values)),
        grid,
        GalleryId::Embedding { k, dim },
        OperatorKind::CompactModel,
    )
}

/// Moment operator w.r.t. the orthonormal shifted Legendre basis: entry
/// `(j, i)` is `∫_0^1 t^{j-1} p_i(t) dt` (1-based).
pub fn build_hausdorff<T: Scalar>(rows: usize, grid: &GridSpec) -> Result<OperatorMatrix<T>> {
    if grid.scheme != Scheme::LegendreBasis || grid.domain != Domain::UnitInterval {
        return Err(Error::invalid("moment operator needs a Legendre basis grid"));
    }
    let n = grid.n_points;
    if rows == 0 || rows > n {
        return Err(Error::invalid(format!(
            "row count {rows} must lie in 1..={n} (basis size)"
        )));
    }
    let mut entries = Array2::zeros((rows, n));
    for j in 0..rows {
        let moments = legendre::shifted_moments::<T>(j, n);
        for (i, m) in moments.into_iter().enumerate() {
            entries[[j, i]] = T::from_usize(2 * i + 1).sqrt() * m;
        }
    }
    OperatorMatrix::from_parts(entries, *grid, GalleryId::Hausdorff, OperatorKind::NoncompactModel)
}

/// `J ⊗ J` on the unit square, `N² x N²`.
pub fn build_mixed_integration<T: Scalar>(n: usize) -> Result<OperatorMatrix<T>> {
    let j = build_integration::<T>(1, &GridSpec::midpoint(n)?)?;
    let entries = ndarray::linalg::kron(&j.entries, &j.entries);
    let grid = GridSpec::new(n, Domain::UnitSquare, Scheme::MidpointCollocation)?;
    let mut op = OperatorMatrix::from_parts(entries, grid, GalleryId::MixedIntegration, OperatorKind::CompactModel)?;
    op.kronecker = Some(Arc::new((j.entries.clone(), j.entries)));
    Ok(op)
}

/// `diag(f(t_1), ..., f(t_N))` on the grid nodes.
pub fn build_multiplication<T: Scalar>(f: &MultiplierSpec, grid: &GridSpec) -> Result<OperatorMatrix<T>> {
    let matches_domain = matches!(
        (f.domain_kind, grid.domain),
        (DomainKind::FiniteMeasureUnitInterval, Domain::UnitInterval)
            | (DomainKind::InfiniteMeasureHalfLine, Domain::HalfLineTruncated { .. })
    );
    if !matches_domain {
        return Err(Error::invalid(format!(
            "multiplier `{f}` lives on {:?}, grid is {:?}",
            f.domain_kind, grid.domain
        )));
    }
    let values = f.eval_nodes(&grid.nodes()?)?;
    let diag = ndarray::Array1::from_iter(values.into_iter().map(T::from_f64));
    OperatorMatrix::from_parts(
        Array2::from_diag(&diag),
        *grid,
        GalleryId::Multiplication(f.clone()),
        OperatorKind::NoncompactModel,
    )
}

/// Product `left · right`, bridging a Legendre domain on the left with a
/// midpoint range on the right through the cell-to-Legendre transfer.
pub fn compose<T: Scalar>(left: &OperatorMatrix<T>, right: &OperatorMatrix<T>) -> Result<OperatorMatrix<T>> {
    let mismatch = || {
        Error::invalid(format!(
            "cannot compose `{}` ({}x{}) with `{}` ({}x{})",
            left.label,
            left.dim().0,
            left.dim().1,
            right.label,
            right.dim().0,
            right.dim().1
        ))
    };
    let entries = match (left.grid.scheme, right.grid.scheme) {
        (Scheme::LegendreBasis, Scheme::MidpointCollocation) => {
            if right.grid.domain != Domain::UnitInterval {
                return Err(mismatch());
            }
            let transfer = legendre::cell_transfer::<T>(left.dim().1, right.dim().0);
            left.entries.dot(&transfer).dot(&right.entries)
        }
        _ if left.dim().1 == right.dim().0 && left.grid.domain == right.grid.domain => {
            left.entries.dot(&right.entries)
        }
        _ => return Err(mismatch()),
    };
    let kind = if left.kind == OperatorKind::CompactModel || right.kind == OperatorKind::CompactModel {
        OperatorKind::CompactModel
    } else {
        OperatorKind::NoncompactModel
    };
    let mut parts = Vec::new();
    for op in [left, right] {
        match &op.label {
            GalleryId::Product(p) => parts.extend(p.iter().cloned()),
            other => parts.push(other.clone()),
        }
    }
    OperatorMatrix::from_parts(entries, right.grid, GalleryId::Product(parts), kind)
}

/// Tunables of registry builds that are not part of the identifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GalleryOptions {
    /// Truncation endpoint for half-line multipliers.
    pub half_line_t: f64,
    /// Moment rows of `BH`; defaults to the basis size.
    pub hausdorff_rows: Option<usize>,
}

impl Default for GalleryOptions {
    fn default() -> Self {
        GalleryOptions {
            half_line_t: 100.0,
            hausdorff_rows: None,
        }
    }
}

/// Builds the operator named by `id` at discretization level `n` (points
/// per axis).
pub fn build<T: Scalar>(id: &GalleryId, n: usize, opts: &GalleryOptions) -> Result<OperatorMatrix<T>> {
    match id {
        GalleryId::Integration { m } => build_integration(*m, &GridSpec::midpoint(n)?),
        GalleryId::Embedding { k, dim } => build_embedding_surrogate(*k, *dim, n),
        GalleryId::Hausdorff => build_hausdorff(opts.hausdorff_rows.unwrap_or(n), &GridSpec::legendre(n)?),
        GalleryId::MixedIntegration => build_mixed_integration(n),
        GalleryId::Multiplication(f) => {
            let grid = match f.domain_kind {
                DomainKind::FiniteMeasureUnitInterval => GridSpec::midpoint(n)?,
                DomainKind::InfiniteMeasureHalfLine => GridSpec::half_line(n, opts.half_line_t)?,
            };
            build_multiplication(f, &grid)
        }
        GalleryId::Absolute(inner) => Ok(crate::ordering::polar_absolute(&build::<T>(inner, n, opts)?)?.abs_a),
        GalleryId::Product(parts) => {
            let mut iter = parts.iter();
            let first = iter
                .next()
                .ok_or_else(|| Error::Config("empty operator product".into()))?;
            let mut acc = build::<T>(first, n, opts)?;
            for part in iter {
                let next = build::<T>(part, n, opts)?;
                acc = compose(&acc, &next)?;
            }
            Ok(acc)
        }
    }
}

/// Row-major CSV, 17 significant digits, no header.
pub fn write_matrix_csv<T: Scalar>(path: impl AsRef<Path>, m: ArrayView2<'_, T>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    for row in m.rows() {
        w.write_record(row.iter().map(|x| format!("{:.16e}", x.to_f64())))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::invalid(format!("{}: ragged rows", path.display())));
    }
    Ok(Array2::from_shape_fn((rows.len(), ncols), |(i, j)| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::singular_values;
    use crate::scalar::DoubleDouble;

    #[test]
    fn single_cell_integration_is_one_half() {
        let j = build_integration::<f64>(1, &GridSpec::midpoint(1).unwrap()).unwrap();
        assert_eq!(j.entries, ndarray::arr2(&[[0.5]]));
    }

    #[test]
    fn integration_is_lower_triangular_with_toeplitz_structure() {
        let j = build_integration::<f64>(2, &GridSpec::midpoint(6).unwrap()).unwrap();
        for i in 0..6 {
            for k in 0..6 {
                if k > i {
                    assert_eq!(j.entries[[i, k]], 0.0);
                } else if i > 0 && k > 0 {
                    assert_eq!(j.entries[[i, k]], j.entries[[i - 1, k - 1]]);
                }
            }
        }
        assert!(build_integration::<f64>(0, &GridSpec::midpoint(4).unwrap()).is_err());
        assert!(build_integration::<f64>(1, &GridSpec::legendre(4).unwrap()).is_err());
    }

    #[test]
    fn integration_spectrum_matches_discrete_and_continuum_values() {
        let n_pts = 512;
        let j = build_integration::<f64>(1, &GridSpec::midpoint(n_pts).unwrap()).unwrap();
        let s = singular_values(j.view()).unwrap();
        let h = 1.0 / n_pts as f64;
        for n in 1..=n_pts {
            // h (L + I/2) has singular values h / (2 tan((n - 1/2) pi / 2N)).
            let x = (n as f64 - 0.5) * std::f64::consts::PI;
            let discrete = h / (2.0 * (x / (2.0 * n_pts as f64)).tan());
            assert!((s[n - 1] / discrete - 1.0).abs() < 1e-12, "n={n}");
            // The relative gap to 1/x is about -(x h)^2 / 12.
            if n <= 56 {
                assert!((s[n - 1] * x - 1.0).abs() < 0.01, "n={n}");
            }
        }
    }

    #[test]
    fn surrogate_spectra() {
        let e = build_embedding_surrogate::<f64>(1, 1, 4).unwrap();
        assert_eq!(e.entries.diag().to_vec(), vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        let e2 = embedding_values::<f64>(2, 2, 3).unwrap();
        assert_eq!(e2.len(), 9);
        assert_eq!(e2[0], 1.0 / 3.0);
        assert!(e2.windows(2).all(|w| w[0] >= w[1] && w[1] > 0.0));
    }

    #[test]
    fn hausdorff_columns_match_exact_integrals() {
        let b = build_hausdorff::<f64>(3, &GridSpec::legendre(3).unwrap()).unwrap();
        let c0: Vec<f64> = b.entries.column(0).to_vec();
        assert_eq!(c0, vec![1.0, 0.5, 1.0 / 3.0]);
        // ∫ p_2 = 0, ∫ t p_2 = sqrt(3)/6
        assert_eq!(b.entries[[0, 1]], 0.0);
        assert!((b.entries[[1, 1]] - 3f64.sqrt() / 6.0).abs() < 1e-16);
        assert!(build_hausdorff::<f64>(4, &GridSpec::legendre(3).unwrap()).is_err());
    }

    #[test]
    fn moment_times_transfer_equals_cell_moments() {
        let n = 24;
        let b = build_hausdorff::<DoubleDouble>(n, &GridSpec::legendre(n).unwrap()).unwrap();
        let p = legendre::cell_transfer::<DoubleDouble>(n, n);
        let bp = b.entries.dot(&p);
        let q = |x: usize| DoubleDouble::from_usize(x);
        let h = DoubleDouble::from_f64(1.0) / q(n);
        for j in 0..n {
            // The last cell carries the largest moment of each row.
            let row_scale = (DoubleDouble::from_f64(1.0) - (q(n - 1) * h).powi(j as u64 + 1)) / (q(j + 1) * h.sqrt());
            for i in 0..n {
                let (a, c) = (q(i) * h, q(i + 1) * h);
                let exact = (c.powi(j as u64 + 1) - a.powi(j as u64 + 1)) / (q(j + 1) * h.sqrt());
                let err = ((bp[[j, i]] - exact) / row_scale).abs().to_f64();
                assert!(err < 1e-29, "({j},{i}): {err:e}");
            }
        }
    }

    #[test]
    fn kronecker_spectrum_is_outer_product_of_factors() {
        let n = 12;
        let j = build_integration::<f64>(1, &GridSpec::midpoint(n).unwrap()).unwrap();
        let s1 = singular_values(j.view()).unwrap();
        let j2 = build_mixed_integration::<f64>(n).unwrap();
        assert_eq!(j2.dim(), (n * n, n * n));
        let s2 = singular_values(j2.view()).unwrap();
        let mut outer: Vec<f64> = s1.iter().flat_map(|a| s1.iter().map(move |b| a * b)).collect();
        outer.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (x, y) in s2.iter().zip(&outer) {
            assert!((x - y).abs() < 1e-10);
        }
        let one = build_mixed_integration::<f64>(1).unwrap();
        assert_eq!(one.entries[[0, 0]], 0.25);
    }

    #[test]
    fn multiplication_on_midpoints_and_half_line() {
        let f: MultiplierSpec = "linear:1".parse().unwrap();
        let m = build_multiplication::<f64>(&f, &GridSpec::midpoint(4).unwrap()).unwrap();
        assert_eq!(m.entries.diag().to_vec(), vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(m.kind, OperatorKind::NoncompactModel);
        let g: MultiplierSpec = "inv-poly:1".parse().unwrap();
        let h = build_multiplication::<f64>(&g, &GridSpec::half_line(1000, 100.0).unwrap()).unwrap();
        let d = h.entries.diag();
        assert_eq!(d[0], 1.0);
        assert!((d[999] - 1.0 / 101.0).abs() < 1e-15);
        assert!(d.windows(2).into_iter().all(|w| w[1] < w[0]));
        assert!(build_multiplication::<f64>(&g, &GridSpec::midpoint(4).unwrap()).is_err());
    }

    #[test]
    fn identifiers_round_trip() {
        for s in ["J^m:3", "E^k:2:1", "E^k:1:2", "BH", "J2", "M:exp-inv:1", "BH*J^m:1", "M:power:0.5*J^m:1", "abs(BH*J^m:1)*J^m:2"] {
            let id: GalleryId = s.parse().unwrap();
            assert_eq!(id.to_string(), s);
        }
        for s in ["J^m:0", "E^k:1:3", "K", "M:sin:1", "", "abs(J2", "J2)"] {
            assert!(matches!(s.parse::<GalleryId>(), Err(Error::Config(_))), "{s}");
        }
    }

    #[test]
    fn registry_builds_products() {
        let id: GalleryId = "M:power:1*J^m:1".parse().unwrap();
        let mj = build::<f64>(&id, 8, &GalleryOptions::default()).unwrap();
        assert_eq!(mj.kind, OperatorKind::CompactModel);
        assert_eq!(mj.dim(), (8, 8));
        let id: GalleryId = "BH*J^m:1".parse().unwrap();
        let bj = build::<f64>(&id, 8, &GalleryOptions::default()).unwrap();
        assert_eq!(bj.dim(), (8, 8));
    }

    #[test]
    fn csv_round_trip_keeps_seventeen_digits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let j = build_integration::<f64>(2, &GridSpec::midpoint(5).unwrap()).unwrap();
        j.write_csv(&path).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(back, j.entries);
    }
}
