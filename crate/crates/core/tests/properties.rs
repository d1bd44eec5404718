use illpose::gallery::{GridSpec, OperatorKind, OperatorMatrix};
use illpose::linalg::{self, singular_values, SvdJob};
use illpose::multiplier::{default_levels, quotient_verdict, DomainKind, MultiplierFn, MultiplierSpec};
use illpose::ordering::{build_witness, polar_absolute};
use illpose::regularization::{default_alphas, dichotomy_probe, GeneratorFamily};
use illpose::spectral::{compare_spectra, fit_decay_all, verdict_from_comparison, DecayModel, IndexWindow, SpectrumResult, Trend};
use illpose::verdict::{Direction, Relation};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn op(entries: Array2<f64>) -> OperatorMatrix<f64> {
    let n = entries.ncols();
    OperatorMatrix::from_parts(entries, GridSpec::midpoint(n).unwrap(), "J^m:1".parse().unwrap(), OperatorKind::CompactModel).unwrap()
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn square() -> impl Strategy<Value = Array2<f64>> {
    (2usize..12).prop_flat_map(|n| matrix(n, n))
}

fn tall() -> impl Strategy<Value = Array2<f64>> {
    (2usize..8, 0usize..5).prop_flat_map(|(n, extra)| matrix(n + extra, n))
}

fn spectrum(values: Vec<f64>, label: &str) -> SpectrumResult<f64> {
    SpectrumResult::new(values, 0, label).unwrap()
}

/// Strictly decreasing positive sequence of length `len`.
fn decreasing(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..0.5, len).prop_map(|steps| {
        let mut x = 1.0;
        steps
            .into_iter()
            .map(|s| {
                x *= 1.0 - s;
                x
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn singular_values_ignore_row_permutations_and_signs(a in square(), shift in 0usize..11, flip in 0usize..11) {
        let n = a.nrows();
        let mut b = Array2::zeros((n, n));
        for i in 0..n {
            let sign = if i == flip % n { -1.0 } else { 1.0 };
            b.row_mut((i + shift) % n).assign(&a.row(i).mapv(|x| sign * x));
        }
        let sa = singular_values(a.view()).unwrap();
        let sb = singular_values(b.view()).unwrap();
        for (x, y) in sa.iter().zip(&sb) {
            prop_assert!((x - y).abs() <= 1e-12 * sa[0].max(1.0));
        }
    }

    #[test]
    fn polar_factor_preserves_spectrum_and_reconstructs(a in prop_oneof![square(), tall()]) {
        let m = op(a.clone());
        let p = polar_absolute(&m).unwrap();
        let sa = singular_values(a.view()).unwrap();
        let sabs = singular_values(p.abs_a.view()).unwrap();
        let scale = sa[0].max(1.0);
        for (x, y) in sa.iter().zip(&sabs) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
        prop_assert!(p.reconstruction <= 1e-10 * scale);
        prop_assert!(p.reverse_residual <= 1e-10 * scale);
        prop_assert!(p.orthogonality_defect <= 1e-10);
        let asym = &p.abs_a.entries - &p.abs_a.entries.t();
        prop_assert!(asym.iter().all(|x| x.abs() <= 1e-12 * scale));
    }

    #[test]
    fn power_fits_round_trip(theta in 0.3f64..3.0, c in 0.1f64..10.0) {
        let s = spectrum((1..=64).map(|n| c * (n as f64).powf(-theta)).collect(), "p");
        let fits = fit_decay_all(&s, IndexWindow::new(4, 64).unwrap()).unwrap();
        prop_assert_eq!(fits.best.model, DecayModel::Power);
        prop_assert!((fits.best.theta.unwrap() - theta).abs() <= 1e-6);
        prop_assert!((fits.best.log_c - c.ln()).abs() <= 1e-6);
    }

    #[test]
    fn polylog_fits_round_trip(theta in 0.5f64..2.0, beta in prop_oneof![-2.0f64..-0.2, 0.2f64..2.0]) {
        // n^{-theta} (ln n)^beta decreases once ln n > beta / theta; hold it
        // constant before that point.
        let turn = ((beta / theta).exp().ceil() as usize).max(8);
        let model = |n: usize| {
            let x = n.max(turn) as f64;
            x.powf(-theta) * x.ln().powf(beta)
        };
        let s = spectrum((1..=256).map(model).collect(), "q");
        let fits = fit_decay_all(&s, IndexWindow::new(turn, 256).unwrap()).unwrap();
        prop_assert_eq!(fits.best.model, DecayModel::Polylog);
        prop_assert!((fits.best.theta.unwrap() - theta).abs() <= 1e-6);
        prop_assert!((fits.best.beta.unwrap() - beta).abs() <= 1e-6);
    }

    #[test]
    fn exponential_fits_round_trip(gamma in 0.05f64..1.0, k in 2usize..=15) {
        let kappa = k as f64 / 10.0;
        let s = spectrum((1..=32).map(|n| (-gamma * (n as f64).powf(kappa)).exp()).collect(), "e");
        let fits = fit_decay_all(&s, IndexWindow::new(1, 32).unwrap()).unwrap();
        prop_assert_eq!(fits.best.model, DecayModel::Exponential);
        let (g, kk) = fits.best.gamma_kappa.unwrap();
        prop_assert!((g - gamma).abs() <= 1e-6 && (kk - kappa).abs() <= 1e-12);
    }

    #[test]
    fn comparison_is_antisymmetric(a in decreasing(40), b in decreasing(40)) {
        let (sa, sb) = (spectrum(a, "a"), spectrum(b, "b"));
        let w = IndexWindow::new(4, 40).unwrap();
        let f = compare_spectra(&sa, &sb, w).unwrap();
        let r = compare_spectra(&sb, &sa, w).unwrap();
        for (x, y) in f.log_ratios.iter().zip(&r.log_ratios) {
            prop_assert_eq!(*x, -*y);
        }
        prop_assert!((f.first_quarter_mean * r.first_quarter_mean - 1.0).abs() <= 1e-12);
        let mirrored = match f.ratio_trend {
            Trend::Vanishing => Trend::Diverging,
            Trend::Diverging => Trend::Vanishing,
            t => t,
        };
        prop_assert_eq!(r.ratio_trend, mirrored);
        let v1 = verdict_from_comparison(&f, &r).unwrap();
        let v2 = verdict_from_comparison(&r, &f).unwrap();
        prop_assert_eq!(v1.relation, v2.relation);
        if matches!(v1.relation, Relation::MoreIllPosed | Relation::StrictlyMoreIllPosed) {
            prop_assert_eq!(v1.direction, v2.direction.flip());
        }
    }

    #[test]
    fn every_spectrum_is_equivalent_to_itself(a in decreasing(32)) {
        let s = spectrum(a, "a");
        let w = IndexWindow::new(1, 32).unwrap();
        let c = compare_spectra(&s, &s, w).unwrap();
        let v = verdict_from_comparison(&c, &c).unwrap();
        prop_assert_eq!(v.relation, Relation::Equivalent);
        prop_assert_eq!(v.direction, Direction::Forward);
    }

    #[test]
    fn self_witness_is_sound_with_unit_sigma(a in square()) {
        let s = singular_values(a.view()).unwrap();
        prop_assume!(s[s.len() - 1] > 1e-6 * s[0]);
        let m = op(a);
        let w = build_witness(&m, &m, s.len()).unwrap();
        prop_assert!(w.certificate().is_sound());
        prop_assert!(w.sigma.iter().all(|x| (x - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn quotient_suprema_pair_up(c1 in 0.1f64..10.0, c2 in 0.1f64..10.0, k1 in 0.2f64..3.0, k2 in 0.2f64..3.0) {
        let grid = GridSpec::midpoint(64).unwrap();
        let levels = default_levels(DomainKind::FiniteMeasureUnitInterval);
        let lin = |c| MultiplierSpec::new(MultiplierFn::Linear { c }).unwrap();
        let pow = |kappa| MultiplierSpec::new(MultiplierFn::Power { kappa }).unwrap();
        for (fp, f) in [(lin(c1), lin(c2)), (pow(k1), pow(k2)), (lin(c1), pow(k1))] {
            let r = quotient_verdict(&fp, &f, &grid, &levels).unwrap();
            for l in &r.levels {
                prop_assert!(l.forward * l.backward >= 1.0 - 1e-12);
            }
            let sups: Vec<f64> = r.levels.iter().map(|l| l.forward).collect();
            prop_assert!(sups.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
            let same = quotient_verdict(&f, &f, &grid, &levels).unwrap();
            prop_assert_eq!(same.verdict.relation, Relation::Equivalent);
            prop_assert!(same.levels.iter().all(|l| l.forward == 1.0 && l.backward == 1.0));
        }
    }

    #[test]
    fn tikhonov_norms_grow_as_alpha_shrinks(d in decreasing(24), dp in decreasing(24)) {
        let a = op(Array2::from_diag(&Array1::from(d)));
        let ap = op(Array2::from_diag(&Array1::from(dp)));
        let p = dichotomy_probe(&ap, &a, None, GeneratorFamily::Tikhonov, &default_alphas()).unwrap();
        prop_assert!(p.norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
    }
}

#[test]
fn diagonal_dichotomy_matches_the_scalar_formula() {
    let d: Vec<f64> = (1..=20).map(|n| 1.0 / (n * n) as f64).collect();
    let dp: Vec<f64> = (1..=20).map(|n| 1.0 / n as f64).collect();
    let a = op(Array2::from_diag(&Array1::from(d.clone())));
    let ap = op(Array2::from_diag(&Array1::from(dp.clone())));
    for family in [GeneratorFamily::Tikhonov, GeneratorFamily::SpectralCutoff] {
        let p = dichotomy_probe(&ap, &a, None, family, &default_alphas()).unwrap();
        for (alpha, norm) in p.alphas.iter().zip(&p.norms) {
            let want = d
                .iter()
                .zip(&dp)
                .map(|(s, sp)| family.eval(s * s, *alpha, None) * s * sp)
                .fold(0.0, f64::max);
            assert!((norm - want).abs() <= 1e-12 * want.max(1.0), "{family} alpha {alpha}");
        }
    }
}

#[test]
fn witness_subspace_is_orthonormal() {
    let a = op(Array2::from_shape_fn((6, 6), |(i, j)| 1.0 / (1 + i + j) as f64));
    let b = op(Array2::from_shape_fn((6, 6), |(i, j)| if i >= j { 1.0 / 6.0 } else { 0.0 }));
    let w = build_witness(&a, &b, 4).unwrap();
    let g = w.subspace.t().dot(&w.subspace);
    let defect = &g - &linalg::identity::<f64>(4);
    assert!(defect.iter().all(|x| x.abs() < 1e-12));
    let d = linalg::svd(b.view(), SvdJob::Full).unwrap();
    assert!(d.has_vectors());
}
