//! Experiment configs, pipelines and reports.
//!
//! Every experiment writes into its own output directory: spectra as
//! `spectrum_<label>_<N>.csv`, witnesses as `witness_<pair>_<N>/`, plot data
//! as `plot_*.csv`, then `timings.json` and finally `report.json`. Artifact
//! paths in the report are relative to that directory.

mod config;
mod plot;
mod report;

pub use config::{parse_levels, ExperimentConfig, ExperimentKind, Precision, VALID_EXPERIMENTS};
pub use plot::{render_plot_data, PlotOutput};
pub use report::{
    to_json_string, write_json, ChildSummary, CodimEntry, ComparisonEntry, ConfigEcho, DouglasEntry, Failure,
    FailureKind, FitEntry, ProbeEntry, ProfileEntry, QuotientEntry, SpectrumArtifact, StageTiming, VerdictReport,
    WitnessEntry, SCHEMA_VERSION,
};

use std::any::Any;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::gallery::{build, build_multiplication, write_matrix_csv, GalleryId, GalleryOptions, GridSpec, OperatorMatrix};
use crate::linalg;
use crate::multiplier::{build_selfadjoint_pair, default_levels, quotient_verdict, DomainKind, MultiplierSpec, SupClass};
use crate::ordering::{
    build_witness, codim_lemma_check, compactness_guard, compose_witnesses, douglas_constant, member_ratio,
    summarize_probe, FactorizationWitness, LevelTrend, WITNESS_TOLERANCE,
};
use crate::regularization::{default_alphas, dichotomy_probe, Boundedness, GeneratorFamily};
use crate::scalar::{DoubleDouble, Scalar};
use crate::spectral::{compare_spectra, compute_spectrum, fit_decay_all, verdict_from_comparison, IndexWindow, SpectrumResult};
use crate::verdict::{two_sided, EvidenceTag, Inclusion, OrderingVerdict, Relation, WitnessCertificate};

/// File-name form of a label: characters outside `[A-Za-z0-9.-]` become `_`.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

/// Spectra shared between the members of one run, keyed by identifier,
/// level, precision and half-line endpoint.
#[derive(Default)]
pub struct SpectrumCache {
    map: HashMap<(String, usize, &'static str, u64), Box<dyn Any>>,
}

impl SpectrumCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get<T: Scalar + 'static>(&mut self, id: &GalleryId, n: usize, opts: &GalleryOptions) -> Result<SpectrumResult<T>> {
        let key = (id.to_string(), n, T::NAME, opts.half_line_t.to_bits());
        if let Some(s) = self.map.get(&key).and_then(|b| b.downcast_ref::<SpectrumResult<T>>()) {
            return Ok(s.clone());
        }
        let s = compute_spectrum(&build::<T>(id, n, opts)?)?;
        self.map.insert(key, Box::new(s.clone()));
        Ok(s)
    }
}

/// Runs one experiment and writes its artifacts and `report.json`.
///
/// Invalid configs and I/O problems are returned as errors before or
/// instead of a report. Failures inside a pipeline stage produce a partial
/// report whose `failure` names the stage.
pub fn run_experiment(config: &ExperimentConfig) -> Result<VerdictReport> {
    run_with_cache(config, &mut SpectrumCache::new())
}

pub fn run_with_cache(config: &ExperimentConfig, cache: &mut SpectrumCache) -> Result<VerdictReport> {
    config.validate()?;
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut report = if config.experiment == ExperimentKind::PaperSuite {
        run_paper_suite(config, cache)?
    } else {
        let mut ctx = Ctx::new(config, cache);
        let outcome = match config.precision {
            Precision::F64 => run_pipeline::<f64>(&mut ctx),
            Precision::DoubleDouble => run_pipeline::<DoubleDouble>(&mut ctx),
        };
        match outcome {
            Ok(()) => {}
            Err(e @ Error::Io { .. }) => return Err(e),
            Err(e) => ctx.report.failure = Some(Failure::from_error(&ctx.stage, &e)),
        }
        ctx.report
    };
    finish(&dir, &mut report)?;
    Ok(report)
}

/// Plot data, `timings.json` and `report.json`, in that order.
fn finish(dir: &Path, report: &mut VerdictReport) -> Result<()> {
    let plots = render_plot_data(report, dir)?;
    report.artifacts.extend(plots.files);
    write_json(dir.join("timings.json"), &report.timings)?;
    report.artifacts.push("timings.json".to_string());
    write_json(dir.join("report.json"), report)
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    dir: PathBuf,
    opts: GalleryOptions,
    cache: &'a mut SpectrumCache,
    report: VerdictReport,
    stage: String,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a ExperimentConfig, cache: &'a mut SpectrumCache) -> Self {
        Ctx {
            cfg,
            dir: cfg.output_dir.clone(),
            opts: GalleryOptions {
                half_line_t: cfg.half_line_t,
                ..GalleryOptions::default()
            },
            cache,
            report: VerdictReport::new(cfg.echo()),
            stage: "setup".to_string(),
        }
    }

    fn begin(&mut self, stage: String) -> Instant {
        self.stage = stage;
        Instant::now()
    }

    fn end(&mut self, t0: Instant) {
        self.report.timings.push(StageTiming {
            stage: self.stage.clone(),
            seconds: t0.elapsed().as_secs_f64(),
        });
    }

    fn build<T: Scalar>(&self, id: &GalleryId, n: usize) -> Result<OperatorMatrix<T>> {
        build::<T>(id, n, &self.opts)
    }

    /// Cached spectrum, written once per run as `spectrum_<label>_<N>.csv`.
    fn spectrum<T: Scalar + 'static>(&mut self, id: &GalleryId, n: usize) -> Result<SpectrumResult<T>> {
        let s = self.cache.get::<T>(id, n, &self.opts)?;
        let label = id.to_string();
        let rel = format!("spectrum_{}_{n}.csv", slug(&label));
        if !self.report.spectra.iter().any(|a| a.path == rel) {
            s.write_csv(self.dir.join(&rel))?;
            self.report.artifacts.push(rel.clone());
            self.report.spectra.push(SpectrumArtifact {
                label,
                level: n,
                len: s.len(),
                precision: T::NAME.to_string(),
                path: rel,
            });
        }
        Ok(s)
    }

    fn fit<T: Scalar>(&mut self, s: &SpectrumResult<T>, id: &GalleryId, n: usize, window: Option<IndexWindow>) -> Result<()> {
        let window = match window.or(self.cfg.window) {
            Some(w) => w,
            None => IndexWindow::default_for(s.len())?,
        };
        let fits = fit_decay_all(s, window)?;
        self.report.fits.push(FitEntry {
            label: id.to_string(),
            level: n,
            window,
            best: fits.best,
            candidates: fits.candidates,
            spectrum: format!("spectrum_{}_{n}.csv", slug(&id.to_string())),
        });
        Ok(())
    }

    /// Forward and backward comparison of two spectra with the verdict
    /// folded together with the compactness guard.
    fn compare(
        &mut self,
        ids: (&GalleryId, &GalleryId),
        sp: &SpectrumResult<f64>,
        s: &SpectrumResult<f64>,
        n: usize,
        window: Option<IndexWindow>,
    ) -> Result<OrderingVerdict> {
        let window = match window.or(self.cfg.window) {
            Some(w) => w,
            None => IndexWindow::default_for(sp.len().min(s.len()))?,
        };
        let forward = compare_spectra(sp, s, window)?;
        let backward = compare_spectra(s, sp, window)?;
        let mut verdict = verdict_from_comparison(&forward, &backward)?;
        if let Some(guard) = compactness_guard(ids.0.kind(), ids.1.kind()) {
            verdict = verdict.merge_guard(&guard);
        }
        self.report.comparisons.push(ComparisonEntry {
            level: n,
            forward,
            backward,
            verdict: verdict.clone(),
        });
        Ok(verdict)
    }

    #[allow(clippy::too_many_arguments)]
    fn write_witness<T: Scalar>(
        &mut self,
        pair: (String, String),
        level: usize,
        r: &Array2<T>,
        s: &Array2<T>,
        sigma: &[T],
        certificate: WitnessCertificate,
        composed_bound: Option<f64>,
    ) -> Result<WitnessEntry> {
        let rel = format!("witness_{}__{}_{level}", slug(&pair.0), slug(&pair.1));
        let dir = self.dir.join(&rel);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_matrix_csv(dir.join("R.csv"), r.view())?;
        write_matrix_csv(dir.join("S.csv"), s.view())?;
        let path = dir.join("sigma.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["i", "sigma"])?;
        for (i, v) in sigma.iter().enumerate() {
            w.write_record([(i + 1).to_string(), format!("{:.16e}", v.to_f64())])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        let entry = WitnessEntry {
            pair,
            level,
            sound: certificate.is_sound() && composed_bound.is_none_or(|b| certificate.residual <= b),
            certificate,
            dir: rel.clone(),
            composed_bound,
        };
        write_json(dir.join("certificate.json"), &entry)?;
        for f in ["R.csv", "S.csv", "sigma.csv", "certificate.json"] {
            self.report.artifacts.push(format!("{rel}/{f}"));
        }
        self.report.witnesses.push(entry.clone());
        Ok(entry)
    }

    fn factorization<T: Scalar>(&mut self, w: &FactorizationWitness<T>, level: usize, bound: Option<f64>) -> Result<WitnessEntry> {
        self.write_witness(w.labels.clone(), level, &w.r, &w.s, &w.sigma, w.certificate(), bound)
    }

    fn pair(&self) -> (GalleryId, GalleryId) {
        (self.cfg.operators[0].clone(), self.cfg.operators[1].clone())
    }
}

fn run_pipeline<T: Scalar + 'static>(ctx: &mut Ctx<'_>) -> Result<()> {
    match ctx.cfg.experiment {
        ExperimentKind::Spectrum => run_spectrum::<T>(ctx),
        ExperimentKind::Compare => run_compare::<T>(ctx),
        ExperimentKind::Factorize => run_factorize::<T>(ctx),
        ExperimentKind::Douglas => run_douglas::<T>(ctx),
        ExperimentKind::Dichotomy => run_dichotomy::<T>(ctx),
        ExperimentKind::Multiplier => run_multiplier::<T>(ctx),
        ExperimentKind::Codim => run_codim::<T>(ctx),
        ExperimentKind::PaperSuite => Err(Error::Config("paper-suite cannot be nested".into())),
    }
}

fn run_spectrum<T: Scalar + 'static>(ctx: &mut Ctx<'_>) -> Result<()> {
    for id in ctx.cfg.operators.clone() {
        for &n in &ctx.cfg.levels {
            let t0 = ctx.begin(format!("spectrum {id} N={n}"));
            let s = ctx.spectrum::<T>(&id, n)?;
            ctx.fit(&s, &id, n, None)?;
            ctx.end(t0);
        }
    }
    Ok(())
}

fn run_compare<T: Scalar + 'static>(ctx: &mut Ctx<'_>) -> Result<()> {
    let (ap, a) = ctx.pair();
    for &n in &ctx.cfg.levels {
        let t0 = ctx.begin(format!("compare {ap} vs {a} N={n}"));
        let sp = ctx.spectrum::<T>(&ap, n)?;
        let s = ctx.spectrum::<T>(&a, n)?;
        for (spec, id) in [(&sp, &ap), (&s, &a)] {
            let fits_window = ctx.cfg.window.is_some() || IndexWindow::default_for(spec.len())?.len() >= 8;
            if fits_window {
                ctx.fit(spec, id, n, None)?;
            }
        }
        ctx.report.verdict = ctx.compare((&ap, &a), &sp.to_f64(), &s.to_f64(), n, None)?;
        ctx.end(t0);
    }
    Ok(())
}

/// Every direction with `s_i(A)` above `1e-10 s_1(A)`, capped by the size
/// of `A′`.
fn auto_rank<T: Scalar>(a_prime: &OperatorMatrix<T>, a: &OperatorMatrix<T>) -> Result<usize> {
    let s = linalg::singular_values(a.view())?;
    let cut = s.first().map_or(0.0, |x| x.to_f64()) * 1e-10;
    let k = s.iter().take_while(|x| x.to_f64() > cut).count();
    let (mp, np) = a_prime.dim();
    Ok(k.min(mp.min(np)).max(1))
}

fn witness_verdict(entry: &WitnessEntry) -> OrderingVerdict {
    let detail = format!(
        "{} = R {} S on rank {}: residual {:e} (tolerance {:e}), orthogonality defect {:e}",
        entry.pair.0,
        entry.pair.1,
        entry.certificate.rank,
        entry.certificate.residual,
        entry.certificate.tolerance * entry.certificate.scale,
        entry.certificate.orthogonality_defect
    );
    let mut v = if entry.sound {
        OrderingVerdict::new(Relation::MoreIllPosed, crate::verdict::Direction::Forward)
    } else {
        OrderingVerdict::undecided()
    }
    .with_evidence(EvidenceTag::Witness, detail);
    v.witness = Some(entry.certificate.clone());
    v
}

fn run_factorize<T: Scalar + 'static>(ctx: &mut Ctx<'_>) -> Result<()> {
    let (ap, a) = ctx.pair();
    for &n in &ctx.cfg.levels {
        let t0 = ctx.begin(format!("factorize {ap} vs {a} N={n}"));
        let mp = ctx.build::<T>(&ap, n)?;
        let m = ctx.build::<T>(&a, n)?;
        let rank = match ctx.cfg.rank {
            Some(r) => r,
            None => auto_rank(&mp, &m)?,
        };
        let w = build_witness(&mp, &m, rank)?;
        let entry = ctx.factorization(&w, n, None)?;
        ctx.report.verdict = witness_verdict(&entry);
        ctx.end(t0);
    }
    Ok(())
}

fn level_inclusion(t: LevelTrend) -> Inclusion {
    match t {
        LevelTrend::Bounded => Inclusion::Holds,
        LevelTrend::Diverging => Inclusion::Fails,
        LevelTrend::Inconclusive => Inclusion::Unknown,
    }
}

fn run_douglas<T: Scalar + 'static>(ctx: &mut Ctx<'_>) -> Result<()> {
    let (ap, a) = ctx.pair();
    let levels = ctx.cfg.levels.clone();
    let opts = ctx.opts;
    let t0 = ctx.begin(format!("douglas {ap} vs {a}"));
    let sweep = |x: &GalleryId, y: &GalleryId| {
        douglas_constant::<T, _>(&levels, |n| Ok((build::<T>(x, n, &opts)?, build::<T>(y, n, &opts)?, None)))
    };
    let forward = sweep(&ap, &a)?;
    let backward = sweep(&a, &ap)?;
    let verdict = two_sided(level_inclusion(forward.classification), level_inclusion(backward.classification))
        .with_evidence(
            EvidenceTag::Douglas,
            format!(
                "C(N) for {ap} vs {a}: {:?} ({:?}); swapped: {:?} ({:?})",
                forward.constants, forward.classification, backward.constants, backward.classification
            ),
        );
    ctx.report.douglas.push(DouglasEntry {
        pair: (ap.to_string(), a.to_string()),
        forward,
        backward,
    });
    ctx.report.verdict = verdict;
    ctx.end(t0);
    Ok(())
}

fn bounded_inclusion(b: Boundedness) -> Inclusion {
    match b {
        Boundedness::UniformlyBounded => Inclusion::Holds,
        Boundedness::Unbounded => Inclusion::Fails,
        Boundedness::Inconclusive => Inclusion::Unknown,
    }
}

fn run_dichotomy<T: Scalar + 'static>(ctx: &mut Ctx<'_>) -> Result<()> {
    let (ap, a) = ctx.pair();
    let family = ctx.cfg.family.unwrap_or(GeneratorFamily::Tikhonov);
    let alphas = ctx.cfg.alphas.clone().unwrap_or_else(default_alphas);
    for &n in &ctx.cfg.levels {
        let t0 = ctx.begin(format!("dichotomy {family} {ap} vs {a} N={n}"));
        let mp = ctx.build::<T>(&ap, n)?;
        let m = ctx.build::<T>(&a, n)?;
        let forward = dichotomy_probe(&mp, &m, None, family, &alphas)?;
        let backward = dichotomy_probe(&m, &mp, None, family, &alphas)?;
        ctx.report.verdict = two_sided(
            bounded_inclusion(forward.classification),
            bounded_inclusion(backward.classification),
        )
        .with_evidence(
            EvidenceTag::Dichotomy,
            format!(
                "{family} at N={n}: {ap} into {a} {:?}, {a} into {ap} {:?}",
                forward.classification, backward.classification
            ),
        );
        ctx.report.profiles.push(ProfileEntry {
            pair: (ap.to_string(), a.to_string()),
            level: n,
            forward,
            backward,
        });
        ctx.end(t0);
    }
    Ok(())
}

fn multiplier_spec(id: &GalleryId) -> Result<&MultiplierSpec> {
    match id {
        GalleryId::Multiplication(f) => Ok(f),
        other => Err(Error::Config(format!("`{other}` is not a multiplier"))),
    }
}

fn multiplier_grid(f: &MultiplierSpec, n: usize, t_max: f64) -> Result<GridSpec> {
    match f.domain_kind {
        DomainKind::FiniteMeasureUnitInterval => GridSpec::midpoint(n),
        DomainKind::InfiniteMeasureHalfLine => GridSpec::half_line(n, t_max),
    }
}

/// Largest grid on which the diagonal witness matrices are written.
const MULTIPLIER_WITNESS_POINTS: usize = 256;

fn run_multiplier<T: Scalar + 'static>(ctx: &mut Ctx<'_>) -> Result<()> {
    let (ap, a) = ctx.pair();
    let (fp, f) = (multiplier_spec(&ap)?.clone(), multiplier_spec(&a)?.clone());
    let refinement = ctx.cfg.refinement.clone().unwrap_or_else(|| default_levels(f.domain_kind));
    let mut last = None;
    for &n in &ctx.cfg.levels {
        let t0 = ctx.begin(format!("multiplier {fp} vs {f} N={n}"));
        let grid = multiplier_grid(&f, n, ctx.cfg.half_line_t)?;
        let report = quotient_verdict(&fp, &f, &grid, &refinement)?;
        ctx.report.verdict = report.verdict.clone();
        last = Some((n, report.forward_class));
        ctx.report.quotients.push(QuotientEntry {
            pair: (ap.to_string(), a.to_string()),
            n_points: n,
            report,
        });
        ctx.end(t0);
    }
    if let Some((n, SupClass::Bounded)) = last {
        let t0 = ctx.begin(format!("multiplier witness {fp} vs {f}"));
        let wn = n.min(MULTIPLIER_WITNESS_POINTS);
        let grid = multiplier_grid(&f, wn, ctx.cfg.half_line_t)?;
        let pair = build_selfadjoint_pair::<T>(&fp, &f, &grid)?;
        let sigma: Vec<T> = pair.s.diag().to_vec();
        let certificate = WitnessCertificate {
            rank: wn,
            residual: pair.residual.to_f64(),
            orthogonality_defect: linalg::orthogonality_defect(pair.r.view())?.to_f64(),
            tolerance: WITNESS_TOLERANCE,
            scale: build_multiplication::<T>(&fp, &grid)?.entries.iter().fold(0.0f64, |m, x| m.max(x.to_f64().abs())),
        };
        let entry = ctx.write_witness((ap.to_string(), a.to_string()), wn, &pair.r, &pair.s, &sigma, certificate, None)?;
        if entry.sound {
            ctx.report.verdict.witness = Some(entry.certificate.clone());
        }
        ctx.end(t0);
    }
    Ok(())
}

fn run_codim<T: Scalar + 'static>(ctx: &mut Ctx<'_>) -> Result<()> {
    let id = ctx.cfg.operators[0].clone();
    let m = ctx.cfg.codim_m.unwrap_or(2);
    for &n in &ctx.cfg.levels {
        let t0 = ctx.begin(format!("codim {id} m={m} N={n}"));
        let a = ctx.build::<T>(&id, n)?;
        let (r, c) = a.dim();
        let window = match ctx.cfg.window {
            Some(w) => w,
            None => IndexWindow::default_for(r.min(c) / 2)?,
        };
        let report = codim_lemma_check(&a, m, window)?;
        let relation = if report.holds { Relation::Equivalent } else { Relation::Undecided };
        ctx.report.verdict = OrderingVerdict::new(relation, crate::verdict::Direction::Forward).with_evidence(
            EvidenceTag::Codimension,
            format!(
                "Q{id} (codimension {m}) vs {id} on {window}: c_lower {:e}, ratio window [{:e}, {:e}], holds {}",
                report.c_lower, report.ratio_window.0, report.ratio_window.1, report.holds
            ),
        );
        ctx.report.codim.push(CodimEntry {
            label: id.to_string(),
            level: n,
            report,
        });
        ctx.end(t0);
    }
    Ok(())
}

#[derive(Clone)]
enum Member {
    Config(Box<ExperimentConfig>),
    Hausdorff,
    Transitive,
}

fn id(s: &str) -> GalleryId {
    s.parse().expect("suite identifiers are valid")
}

fn member_config(
    out: &Path,
    name: &str,
    kind: ExperimentKind,
    ops: &[&str],
    levels: &[usize],
) -> (String, Member) {
    let mut cfg = ExperimentConfig::new(kind, ops.iter().map(|s| id(s)).collect(), out.join(name));
    cfg.levels = levels.to_vec();
    (name.to_string(), Member::Config(Box::new(cfg)))
}

/// Level at which suite witnesses are built for a pair (matrices stay at
/// most 256 x 256).
fn witness_level(ids: &[&str]) -> usize {
    if ids.iter().any(|s| s.contains("J2") || s.ends_with(":2") && s.starts_with("E^k")) {
        16
    } else {
        128
    }
}

/// Fixed reproduction set; see the README for the list of members.
fn run_paper_suite(config: &ExperimentConfig, cache: &mut SpectrumCache) -> Result<VerdictReport> {
    let out = &config.output_dir;
    let mut report = VerdictReport::new(config.echo());
    let mut queue: Vec<(String, Member)> = Vec::new();
    let mut spectra = member_config(out, "integration-spectra", ExperimentKind::Spectrum, &["J^m:1", "J^m:2", "J^m:3"], &[512]);
    if let Member::Config(c) = &mut spectra.1 {
        c.window = Some(IndexWindow::new(16, 128)?);
    }
    queue.push(spectra);
    for (p, q) in [("J^m:2", "J^m:1"), ("J^m:3", "J^m:1"), ("J^m:3", "J^m:2")] {
        queue.push(member_config(out, &format!("compare-{}-{}", slug(p), slug(q)), ExperimentKind::Compare, &[p, q], &[512]));
    }
    for k in 1..=3 {
        for m in 1..=3 {
            let (p, q) = (format!("E^k:{k}:1"), format!("J^m:{m}"));
            queue.push(member_config(out, &format!("compare-{}-{}", slug(&p), slug(&q)), ExperimentKind::Compare, &[&p, &q], &[512]));
        }
    }
    let mut mixed = member_config(out, "mixed-spectrum", ExperimentKind::Spectrum, &["J2"], &[64]);
    if let Member::Config(c) = &mut mixed.1 {
        c.window = Some(IndexWindow::new(8, 256)?);
    }
    queue.push(mixed);
    for e in ["E^k:1:2", "E^k:2:2"] {
        queue.push(member_config(out, &format!("compare-J2-{}", slug(e)), ExperimentKind::Compare, &["J2", e], &[64]));
    }
    queue.push(("hausdorff".to_string(), Member::Hausdorff));
    queue.push(("witness-transitive".to_string(), Member::Transitive));
    for (name, p, q) in [
        ("multiplier-linear", "M:linear:2", "M:linear:1"),
        ("multiplier-power-exp", "M:exp-inv:1", "M:power:1"),
        ("multiplier-inv-poly", "M:inv-poly:2", "M:inv-poly:1"),
    ] {
        queue.push(member_config(out, name, ExperimentKind::Multiplier, &[p, q], &[1000]));
    }
    queue.push(member_config(out, "douglas", ExperimentKind::Douglas, &["J^m:2", "J^m:1"], &[64, 128, 256]));
    for family in [GeneratorFamily::Tikhonov, GeneratorFamily::SpectralCutoff] {
        let mut member = member_config(out, &format!("dichotomy-{family}"), ExperimentKind::Dichotomy, &["J^m:2", "J^m:1"], &[256]);
        if let Member::Config(c) = &mut member.1 {
            c.family = Some(family);
        }
        queue.push(member);
    }
    let mut codim = member_config(out, "codim", ExperimentKind::Codim, &["J^m:1"], &[256]);
    if let Member::Config(c) = &mut codim.1 {
        c.window = Some(IndexWindow::new(4, 32)?);
    }
    queue.push(codim);

    let mut i = 0;
    while i < queue.len() {
        let (name, member) = queue[i].clone();
        let member = &member;
        let t0 = Instant::now();
        let child = match member {
            Member::Config(cfg) => run_with_cache(cfg, cache)?,
            Member::Hausdorff => run_hausdorff(config, &out.join(&name), cache)?,
            Member::Transitive => run_transitive(config, &out.join(&name), cache)?,
        };
        report.timings.push(StageTiming {
            stage: name.clone(),
            seconds: t0.elapsed().as_secs_f64(),
        });
        // Witnesses for every order a comparison asserts.
        if let Member::Config(cfg) = member {
            if cfg.experiment == ExperimentKind::Compare && child.failure.is_none() {
                let (p, q) = (cfg.operators[0].to_string(), cfg.operators[1].to_string());
                let v = &child.verdict;
                let mut dirs = Vec::new();
                if v.asserts_forward_order() {
                    dirs.push((p.clone(), q.clone()));
                }
                let reverse = matches!(v.relation, Relation::MoreIllPosed | Relation::StrictlyMoreIllPosed)
                    && v.direction == crate::verdict::Direction::Reverse
                    || v.relation == Relation::Equivalent;
                if reverse {
                    dirs.push((q.clone(), p.clone()));
                }
                for (x, y) in dirs {
                    let level = witness_level(&[&x, &y]);
                    let wname = format!("witness-{}-{}", slug(&x), slug(&y));
                    if !queue.iter().any(|(n, _)| *n == wname) {
                        queue.push(member_config(out, &wname, ExperimentKind::Factorize, &[&x, &y], &[level]));
                    }
                }
            }
        }
        if report.failure.is_none() {
            if let Some(f) = &child.failure {
                report.failure = Some(Failure {
                    stage: format!("{name}: {}", f.stage),
                    kind: f.kind,
                    message: f.message.clone(),
                });
            }
        }
        let rel = format!("{name}/report.json");
        report.artifacts.push(rel.clone());
        report.children.push(ChildSummary {
            name,
            report: rel,
            verdict: child.verdict.summary(),
            failure: child.failure,
        });
        i += 1;
    }
    Ok(report)
}

/// Sub-experiment of the suite that does not fit a single generic config.
fn child_config(parent: &ExperimentConfig, dir: &Path, kind: ExperimentKind, ops: &[&str], levels: &[usize]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind, ops.iter().map(|s| id(s)).collect(), dir);
    cfg.levels = levels.to_vec();
    cfg.seed = parent.seed.clone();
    cfg
}

fn run_custom(
    cfg: &ExperimentConfig,
    cache: &mut SpectrumCache,
    body: impl FnOnce(&mut Ctx<'_>) -> Result<()>,
) -> Result<VerdictReport> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let mut ctx = Ctx::new(cfg, cache);
    match body(&mut ctx) {
        Ok(()) => {}
        Err(e @ Error::Io { .. }) => return Err(e),
        Err(e) => ctx.report.failure = Some(Failure::from_error(&ctx.stage, &e)),
    }
    let mut report = ctx.report;
    finish(&cfg.output_dir, &mut report)?;
    Ok(report)
}

/// `B⁽ᴴ⁾J` against `J`: spectra of the composite in double-double, spectra
/// of `J` in f64, ratio comparison on [8, 64] at the finest level and the
/// left-inverse probe across all levels.
fn run_hausdorff(parent: &ExperimentConfig, dir: &Path, cache: &mut SpectrumCache) -> Result<VerdictReport> {
    let levels = [64, 128, 256];
    let cfg = child_config(parent, dir, ExperimentKind::Compare, &["BH*J^m:1", "J^m:1"], &levels);
    run_custom(&cfg, cache, |ctx| {
        let (bhj, j) = ctx.pair();
        let mut members = Vec::new();
        let mut finest = None;
        for n in levels {
            let t0 = ctx.begin(format!("hausdorff spectra N={n}"));
            let s_bhj = ctx.spectrum::<DoubleDouble>(&bhj, n)?;
            let s_j = ctx.spectrum::<f64>(&j, n)?;
            members.push(member_ratio(&s_j, &s_bhj, None)?);
            finest = Some((s_bhj.to_f64(), s_j));
            ctx.end(t0);
        }
        let (sp, s) = finest.expect("levels are non-empty");
        let t0 = ctx.begin("hausdorff comparison".to_string());
        ctx.fit(&s, &j, 256, None)?;
        ctx.report.verdict = ctx.compare((&bhj, &j), &sp, &s, 256, Some(IndexWindow::new(8, 64)?))?;
        ctx.report.probes.push(ProbeEntry {
            pair: ("BH".to_string(), j.to_string()),
            report: summarize_probe(members)?,
        });
        ctx.end(t0);
        let t0 = ctx.begin("hausdorff witness N=64".to_string());
        let mp = ctx.build::<f64>(&bhj, 64)?;
        let m = ctx.build::<f64>(&j, 64)?;
        let rank = auto_rank(&mp, &m)?;
        ctx.factorization(&build_witness(&mp, &m, rank)?, 64, None)?;
        ctx.end(t0);
        Ok(())
    })
}

/// Witnesses for `J³ ≺ J²` and `J² ≺ J` and their composition `J³ ≺ J`.
fn run_transitive(parent: &ExperimentConfig, dir: &Path, cache: &mut SpectrumCache) -> Result<VerdictReport> {
    let n = 128;
    let cfg = child_config(parent, dir, ExperimentKind::Factorize, &["J^m:3", "J^m:1"], &[n]);
    run_custom(&cfg, cache, |ctx| {
        let t0 = ctx.begin(format!("transitive witness N={n}"));
        let [j3, j2, j1] = [3, 2, 1].map(|m| ctx.build::<f64>(&GalleryId::Integration { m }, n));
        let (j3, j2, j1) = (j3?, j2?, j1?);
        let w1 = build_witness(&j3, &j2, auto_rank(&j3, &j2)?)?;
        let w2 = build_witness(&j2, &j1, auto_rank(&j2, &j1)?.max(w1.rank))?;
        ctx.factorization(&w1, n, None)?;
        ctx.factorization(&w2, n, None)?;
        let (w, bound) = compose_witnesses(&w1, &w2, &j3, &j1)?;
        let entry = ctx.factorization(&w, n, Some(bound))?;
        ctx.report.verdict = witness_verdict(&entry);
        ctx.end(t0);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: ExperimentKind, ops: &[&str], levels: &[usize], dir: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(kind, ops.iter().map(|s| id(s)).collect(), dir);
        c.levels = levels.to_vec();
        c
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("J^m:1"), "J_m_1");
        assert_eq!(slug("M:exp-inv:1.5"), "M_exp-inv_1.5");
    }

    #[test]
    fn spectrum_experiment_writes_its_artifacts() {
        let tmp = tempfile::tempdir().unwrap();
        let r = run_experiment(&cfg(ExperimentKind::Spectrum, &["J^m:1"], &[64], tmp.path())).unwrap();
        assert!(r.failure.is_none());
        assert!(tmp.path().join("spectrum_J_m_1_64.csv").exists());
        assert!(tmp.path().join("report.json").exists());
        for a in &r.artifacts {
            assert!(tmp.path().join(a).exists(), "{a}");
        }
    }

    #[test]
    fn factorize_verdict_carries_a_sound_witness() {
        let tmp = tempfile::tempdir().unwrap();
        let r = run_experiment(&cfg(ExperimentKind::Factorize, &["J^m:2", "J^m:1"], &[32], tmp.path())).unwrap();
        assert_eq!(r.verdict.relation, Relation::MoreIllPosed);
        assert!(r.witnesses[0].sound);
        assert!(tmp.path().join("witness_J_m_2__J_m_1_32/R.csv").exists());
    }

    #[test]
    fn stage_failure_yields_partial_report() {
        let tmp = tempfile::tempdir().unwrap();
        // 1x1 spectra cannot be fitted.
        let r = run_experiment(&cfg(ExperimentKind::Spectrum, &["J^m:1"], &[1], tmp.path())).unwrap();
        let f = r.failure.unwrap();
        assert!(f.stage.contains("spectrum J^m:1"));
        assert_eq!(f.kind, FailureKind::InvalidInput);
        assert!(tmp.path().join("report.json").exists());
    }
}
