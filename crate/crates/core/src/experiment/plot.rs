use std::path::Path;

use crate::error::{Error, Result};

use super::report::VerdictReport;
use super::slug;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotOutput {
    /// Written files, relative to the output directory.
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

fn writer(dir: &Path, rel: &str) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(dir.join(rel))?)
}

fn finish(mut w: csv::Writer<std::fs::File>, dir: &Path, rel: &str) -> Result<()> {
    w.flush().map_err(|e| Error::io(dir.join(rel), e))
}

fn e17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads a `n,s_n` spectrum CSV.
fn read_spectrum(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v = rec
            .get(1)
            .and_then(|x| x.parse::<f64>().ok())
            .ok_or_else(|| Error::invalid(format!("malformed spectrum row in {}", path.display())))?;
        values.push(v);
    }
    Ok(values)
}

/// Writes plot-ready CSVs for the fits, regularization profiles and
/// range-inclusion sweeps of `report` into `dir`.
///
/// Spectra get `n, s_n, log n, log s_n, fit, log residual, in_window`
/// columns with the best fitted model as overlay; profiles get `(alpha,
/// norm)` by decreasing `α`; sweeps get `(N, C)` by increasing `N`.
pub fn render_plot_data(report: &VerdictReport, dir: &Path) -> Result<PlotOutput> {
    let mut out = PlotOutput::default();
    if report.is_empty() {
        out.warnings.push("report holds no spectra or profiles; nothing to plot".to_string());
        return Ok(out);
    }
    for fit in &report.fits {
        let values = read_spectrum(&dir.join(&fit.spectrum))?;
        let rel = format!("plot_spectrum_{}_{}.csv", slug(&fit.label), fit.level);
        let mut w = writer(dir, &rel)?;
        w.write_record(["n", "s_n", "log_n", "log_s_n", "fit", "log_residual", "in_window"])?;
        for (i, s) in values.iter().enumerate() {
            let n = i + 1;
            let model = fit.best.predict(n);
            let inside = (fit.window.start..=fit.window.end).contains(&n);
            w.write_record([
                n.to_string(),
                e17(*s),
                e17((n as f64).ln()),
                e17(s.ln()),
                e17(model),
                e17(s.ln() - model.ln()),
                u8::from(inside).to_string(),
            ])?;
        }
        finish(w, dir, &rel)?;
        out.files.push(rel);
    }
    for p in &report.profiles {
        for (prof, (a, b)) in [(&p.forward, (&p.pair.0, &p.pair.1)), (&p.backward, (&p.pair.1, &p.pair.0))] {
            let rel = format!("plot_dichotomy_{}__{}_{}_{}.csv", slug(a), slug(b), prof.family, p.level);
            let mut rows: Vec<(f64, f64)> = prof.alphas.iter().copied().zip(prof.norms.iter().copied()).collect();
            rows.sort_by(|x, y| y.0.total_cmp(&x.0));
            let mut w = writer(dir, &rel)?;
            w.write_record(["alpha", "norm"])?;
            for (alpha, norm) in rows {
                w.write_record([e17(alpha), e17(norm)])?;
            }
            finish(w, dir, &rel)?;
            out.files.push(rel);
        }
    }
    for d in &report.douglas {
        for (est, (a, b)) in [(&d.forward, (&d.pair.0, &d.pair.1)), (&d.backward, (&d.pair.1, &d.pair.0))] {
            let rel = format!("plot_douglas_{}__{}.csv", slug(a), slug(b));
            let mut rows: Vec<(usize, f64)> = est.levels.iter().copied().zip(est.constants.iter().copied()).collect();
            rows.sort_by_key(|r| r.0);
            let mut w = writer(dir, &rel)?;
            w.write_record(["N", "C"])?;
            for (n, c) in rows {
                w.write_record([n.to_string(), e17(c)])?;
            }
            finish(w, dir, &rel)?;
            out.files.push(rel);
        }
    }
    Ok(out)
}
