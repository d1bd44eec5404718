use illpose::gallery::{build_integration, GridSpec, OperatorKind, OperatorMatrix};
use illpose::multiplier::{default_levels, quotient_verdict, MultiplierSpec};
use illpose::ordering::{build_witness, codim_lemma_check, compose_witnesses};
use illpose::regularization::{default_alphas, dichotomy_probe, pointwise_dichotomy, Boundedness, GeneratorFamily};
use illpose::spectral::{compute_spectrum, IndexWindow, Trend};
use illpose::verdict::{Direction, Relation};
use ndarray::{Array1, Array2};

fn j(m: usize, n: usize) -> OperatorMatrix<f64> {
    build_integration(m, &GridSpec::midpoint(n).unwrap()).unwrap()
}

fn diag(values: Vec<f64>) -> OperatorMatrix<f64> {
    let n = values.len();
    OperatorMatrix::from_parts(
        Array2::from_diag(&Array1::from(values)),
        GridSpec::midpoint(n).unwrap(),
        "E^k:1:1".parse().unwrap(),
        OperatorKind::CompactModel,
    )
    .unwrap()
}

fn spec(s: &str) -> MultiplierSpec {
    s.parse().unwrap()
}

#[test]
fn smoother_operator_gives_a_bounded_tikhonov_profile() {
    let (j1, j2) = (j(1, 256), j(2, 256));
    for family in [GeneratorFamily::Tikhonov, GeneratorFamily::SpectralCutoff] {
        let bounded = dichotomy_probe(&j2, &j1, None, family, &default_alphas()).unwrap();
        assert_eq!(bounded.classification, Boundedness::UniformlyBounded, "{family}");
        let unbounded = dichotomy_probe(&j1, &j2, None, family, &default_alphas()).unwrap();
        assert_eq!(unbounded.classification, Boundedness::Unbounded, "{family}");
        let (first, last) = (unbounded.norms[0], *unbounded.norms.last().unwrap());
        assert!(last >= 10.0 * first, "{family}: {first} -> {last}");
    }
}

#[test]
fn rough_data_drive_the_pointwise_trajectory_to_infinity() {
    let a = j(1, 256);
    let d = illpose::linalg::svd(a.view(), illpose::linalg::SvdJob::Full).unwrap();
    // y = sum_n s_n^{1/2} u_n lies in the range closure but not in A's range.
    let coeffs = Array1::from_iter(d.s.iter().map(|s| s.sqrt()));
    let y = d.u.dot(&coeffs);
    let p = pointwise_dichotomy(&a, y.as_slice().unwrap(), GeneratorFamily::Tikhonov, &default_alphas(), None).unwrap();
    assert!(p.norms.last().unwrap() >= &(10.0 * p.norms[0]));
    assert_eq!(p.classification, Boundedness::Unbounded);
}

#[test]
fn pointwise_error_vanishes_for_exact_data() {
    let a = j(1, 64);
    let x0: Vec<f64> = (0..64).map(|i| (i as f64 / 64.0).sin()).collect();
    let y = a.entries.dot(&Array1::from(x0.clone()));
    let alphas = default_alphas();
    let p = pointwise_dichotomy(&a, y.as_slice().unwrap(), GeneratorFamily::Tikhonov, &alphas, Some(&x0)).unwrap();
    let errors = p.errors.unwrap();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors.last().unwrap() < &(0.1 * errors[0]));
}

#[test]
fn landweber_rejects_an_unstable_step() {
    let a = j(1, 32);
    let e = dichotomy_probe(&j(2, 32), &a, None, GeneratorFamily::Landweber { omega: Some(100.0) }, &default_alphas());
    assert!(e.is_err());
    let ok = dichotomy_probe(&j(2, 32), &a, None, GeneratorFamily::Landweber { omega: None }, &default_alphas()).unwrap();
    assert_eq!(ok.classification, Boundedness::UniformlyBounded);
}

#[test]
fn scaled_identity_multipliers_are_equivalent_with_exact_ratio() {
    let grid = GridSpec::midpoint(1000).unwrap();
    let (f_prime, f) = (spec("linear:3"), spec("linear:1.5"));
    let r = quotient_verdict(&f_prime, &f, &grid, &default_levels(f.domain_kind)).unwrap();
    assert_eq!(r.verdict.relation, Relation::Equivalent);
    assert_eq!(r.sup_ratio, 2.0);
    assert_eq!(r.both_directions.1, 0.5);
}

#[test]
fn exponential_multiplier_is_strictly_more_ill_posed_than_a_power() {
    let grid = GridSpec::midpoint(1000).unwrap();
    let (f_prime, f) = (spec("exp-inv:1"), spec("power:1"));
    let r = quotient_verdict(&f_prime, &f, &grid, &default_levels(f.domain_kind)).unwrap();
    assert_eq!(r.verdict.relation, Relation::StrictlyMoreIllPosed);
    assert_eq!(r.verdict.direction, Direction::Forward);
    assert!((r.sup_ratio - (-1.0f64).exp()).abs() < 1e-6);
    assert_eq!(r.attained_near, 1.0);
}

#[test]
fn faster_polynomial_decay_on_the_half_line_is_strictly_more_ill_posed() {
    let grid = GridSpec::half_line(1001, 1000.0).unwrap();
    let (f_prime, f) = (spec("inv-poly:2"), spec("inv-poly:1"));
    let r = quotient_verdict(&f_prime, &f, &grid, &default_levels(f.domain_kind)).unwrap();
    assert_eq!(r.verdict.relation, Relation::StrictlyMoreIllPosed);
    assert!((r.sup_ratio - 1.0).abs() < 1e-6);
    assert!(r.levels.windows(2).all(|w| w[1].backward > w[0].backward));
}

#[test]
fn mismatched_multiplier_domains_are_rejected() {
    let grid = GridSpec::midpoint(100).unwrap();
    assert!(quotient_verdict(&spec("inv-poly:1"), &spec("power:1"), &grid, &[2.0]).is_err());
}

#[test]
fn witnesses_between_integration_powers_are_sound_and_compose() {
    let (j1, j2, j3) = (j(1, 128), j(2, 128), j(3, 128));
    let w32 = build_witness(&j3, &j2, 40).unwrap();
    let w21 = build_witness(&j2, &j1, 40).unwrap();
    for w in [&w32, &w21] {
        let c = w.certificate();
        assert!(c.is_sound(), "{c:?}");
        assert!(c.orthogonality_defect <= 1e-10);
    }
    let (w31, bound) = compose_witnesses(&w32, &w21, &j3, &j1).unwrap();
    assert!(w31.residual <= bound + 1e-14);
    assert!(w31.residual <= 1e-8 * w31.scale);
}

#[test]
fn witness_rank_above_the_dimension_is_rejected() {
    assert!(build_witness(&j(2, 16), &j(1, 16), 17).is_err());
}

#[test]
fn codim_lemma_on_reference_diagonals() {
    let harmonic = diag((1..=128).map(|n| 1.0 / n as f64).collect());
    let r = codim_lemma_check(&harmonic, 2, IndexWindow::new(4, 32).unwrap()).unwrap();
    assert_eq!(r.c_lower, 0.5);
    assert!(r.holds);

    let geometric = diag((1..=64).map(|n| 2f64.powi(-n)).collect());
    let r = codim_lemma_check(&geometric, 2, IndexWindow::new(4, 16).unwrap()).unwrap();
    assert_eq!(r.doubling_trend, Trend::Vanishing);
    assert!(!r.holds);
}

#[test]
fn codim_lemma_holds_for_integration() {
    let a = j(1, 256);
    let r = codim_lemma_check(&a, 2, IndexWindow::new(4, 32).unwrap()).unwrap();
    assert!(r.holds);
    let (lo, hi) = r.ratio_window;
    assert!(lo >= 0.25 && hi <= 1.0 + 1e-12, "{lo} {hi}");
    assert!(compute_spectrum(&a).unwrap().len() >= 64);
}
