use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gallery::GalleryId;
use crate::regularization::GeneratorFamily;
use crate::spectral::IndexWindow;

use super::report::ConfigEcho;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Spectrum,
    Compare,
    Factorize,
    Douglas,
    Dichotomy,
    Multiplier,
    Codim,
    PaperSuite,
}

pub const VALID_EXPERIMENTS: &str =
    "spectrum, compare, factorize, douglas, dichotomy, multiplier, codim, paper-suite";

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Factorize => "factorize",
            ExperimentKind::Douglas => "douglas",
            ExperimentKind::Dichotomy => "dichotomy",
            ExperimentKind::Multiplier => "multiplier",
            ExperimentKind::Codim => "codim",
            ExperimentKind::PaperSuite => "paper-suite",
        }
    }

    /// Accepted operator counts `(min, max)`.
    fn operator_count(self) -> (usize, usize) {
        match self {
            ExperimentKind::Spectrum => (1, usize::MAX),
            ExperimentKind::Codim => (1, 1),
            ExperimentKind::PaperSuite => (0, 0),
            _ => (2, 2),
        }
    }

    pub fn default_levels(self) -> Vec<usize> {
        match self {
            ExperimentKind::Douglas => vec![64, 128, 256],
            ExperimentKind::Multiplier => vec![1000],
            _ => vec![256],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "spectrum" => ExperimentKind::Spectrum,
            "compare" => ExperimentKind::Compare,
            "factorize" => ExperimentKind::Factorize,
            "douglas" => ExperimentKind::Douglas,
            "dichotomy" => ExperimentKind::Dichotomy,
            "multiplier" => ExperimentKind::Multiplier,
            "codim" => ExperimentKind::Codim,
            "paper-suite" => ExperimentKind::PaperSuite,
            other => {
                return Err(Error::Config(format!(
                    "unknown experiment `{other}`; valid: {VALID_EXPERIMENTS}"
                )))
            }
        })
    }
}

/// Working precision of spectra and witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F64,
    DoubleDouble,
}

impl Precision {
    pub fn name(self) -> &'static str {
        match self {
            Precision::F64 => "f64",
            Precision::DoubleDouble => "dd",
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "f64" => Ok(Precision::F64),
            "dd" | "double-double" => Ok(Precision::DoubleDouble),
            other => Err(Error::Config(format!("unknown precision `{other}`; valid: f64, dd"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// `[A′, A]` for pairwise experiments.
    pub operators: Vec<GalleryId>,
    /// Strictly increasing discretization levels (points per axis).
    pub levels: Vec<usize>,
    pub window: Option<IndexWindow>,
    pub family: Option<GeneratorFamily>,
    pub output_dir: PathBuf,
    pub precision: Precision,
    pub alphas: Option<Vec<f64>>,
    /// Witness rank; all numerically nonzero directions when unset.
    pub rank: Option<usize>,
    pub codim_m: Option<usize>,
    pub half_line_t: f64,
    /// Multiplier refinement levels (dyadic depths or half-line endpoints).
    pub refinement: Option<Vec<f64>>,
    /// Echoed only; no code path is randomized.
    pub seed: Option<String>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, operators: Vec<GalleryId>, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            experiment,
            operators,
            levels: experiment.default_levels(),
            window: None,
            family: None,
            output_dir: output_dir.into(),
            precision: Precision::F64,
            alphas: None,
            rank: None,
            codim_m: None,
            half_line_t: 100.0,
            refinement: None,
            seed: None,
        }
    }

    /// Parses `key = value` lines; `#` starts a comment, arrays are
    /// comma-separated. `experiment` may be omitted when supplied by the
    /// caller through `kind`.
    pub fn parse(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let mut experiment = None;
        let mut operators = None;
        let mut cfg = ExperimentConfig::new(ExperimentKind::Spectrum, Vec::new(), "illpose-out");
        let mut levels = None;
        let mut output_dir = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: Error| match e {
                Error::Config(m) | Error::InvalidArgument(m) => Error::Config(format!("line {}: {m}", lineno + 1)),
                other => other,
            };
            match key {
                "experiment" => experiment = Some(value.parse::<ExperimentKind>().map_err(at)?),
                "operators" => operators = Some(list(value).map(str::parse).collect::<Result<Vec<GalleryId>>>().map_err(at)?),
                "levels" => levels = Some(parse_levels(value).map_err(at)?),
                "window" => cfg.window = Some(value.parse().map_err(at)?),
                "family" => cfg.family = Some(value.parse().map_err(at)?),
                "output_dir" => output_dir = Some(PathBuf::from(value)),
                "precision" => cfg.precision = value.parse().map_err(at)?,
                "alphas" => cfg.alphas = Some(parse_floats(value).map_err(at)?),
                "rank" => cfg.rank = Some(parse_positive(key, value).map_err(at)?),
                "codim_m" => cfg.codim_m = Some(parse_positive(key, value).map_err(at)?),
                "half_line_t" => cfg.half_line_t = parse_floats(value).map_err(at)?[0],
                "refinement" => cfg.refinement = Some(parse_floats(value).map_err(at)?),
                "seed" => cfg.seed = Some(value.to_string()),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.experiment = match (experiment, kind) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!(
                    "config names experiment `{a}` but `{b}` was requested"
                )))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Config("missing `experiment`".into())),
        };
        cfg.operators = operators.unwrap_or_default();
        cfg.levels = levels.unwrap_or_else(|| cfg.experiment.default_levels());
        if let Some(dir) = output_dir {
            cfg.output_dir = dir;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>, kind: Option<ExperimentKind>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, kind)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.experiment.operator_count();
        let n = self.operators.len();
        if n < lo || n > hi {
            let want = match (lo, hi) {
                (0, 0) => "no operators (the suite is fixed)".to_string(),
                (a, b) if a == b => format!("exactly {a} operator(s)"),
                (a, _) => format!("at least {a} operator(s)"),
            };
            return Err(Error::Config(format!(
                "experiment `{}` takes {want}, got {n}",
                self.experiment
            )));
        }
        check_levels(&self.levels)?;
        if self.experiment == ExperimentKind::Multiplier {
            for id in &self.operators {
                if !matches!(id, GalleryId::Multiplication(_)) {
                    return Err(Error::Config(format!(
                        "multiplier experiment needs `M:` operators, got `{id}`"
                    )));
                }
            }
        }
        if let Some(alphas) = &self.alphas {
            if alphas.is_empty() || alphas.iter().any(|a| a.is_nan() || *a <= 0.0) || alphas.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::Config("alphas must be positive and strictly decreasing".into()));
            }
        }
        if !(self.half_line_t > 0.0 && self.half_line_t.is_finite()) {
            return Err(Error::Config(format!("half_line_t must be positive, got {}", self.half_line_t)));
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            experiment: self.experiment.to_string(),
            operators: self.operators.iter().map(|o| o.to_string()).collect(),
            levels: self.levels.clone(),
            window: self.window.map(|w| w.to_string()),
            family: self.family.map(|f| f.to_string()),
            precision: self.precision.name().to_string(),
            alphas: self.alphas.clone(),
            rank: self.rank,
            codim_m: self.codim_m,
            half_line_t: self.half_line_t,
            refinement: self.refinement.clone(),
            seed: self.seed.clone(),
        }
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

pub fn parse_levels(value: &str) -> Result<Vec<usize>> {
    let levels = list(value)
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::Config(format!("level `{s}` is not a positive integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    check_levels(&levels)?;
    Ok(levels)
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() || levels.contains(&0) || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!(
            "levels must be positive and strictly increasing, got {levels:?}"
        )));
    }
    Ok(())
}

fn parse_floats(value: &str) -> Result<Vec<f64>> {
    let xs = list(value)
        .map(|s| s.parse::<f64>().map_err(|_| Error::Config(format!("`{s}` is not a number"))))
        .collect::<Result<Vec<_>>>()?;
    if xs.is_empty() {
        return Err(Error::Config("empty numeric list".into()));
    }
    Ok(xs)
}

fn parse_positive(key: &str, value: &str) -> Result<usize> {
    match value.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(Error::Config(format!("`{key}` must be a positive integer, got `{value}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "# pair\nexperiment = compare\noperators = E^k:2:1, J^m:1\nlevels = 64,128\nwindow = 4:16\nfamily = cutoff\noutput_dir = out\n";
        let c = ExperimentConfig::parse(text, None).unwrap();
        assert_eq!(c.experiment, ExperimentKind::Compare);
        assert_eq!(c.operators.len(), 2);
        assert_eq!(c.levels, vec![64, 128]);
        assert_eq!(c.window, Some(IndexWindow::new(4, 16).unwrap()));
        assert_eq!(c.family, Some(GeneratorFamily::SpectralCutoff));
    }

    #[test]
    fn config_errors() {
        let bad = [
            "experiment = compare\noperators = J^m:1",
            "experiment = spectrum\noperators =",
            "experiment = spectrum\noperators = Q^7",
            "experiment = spectrum\noperators = J^m:1\nlevels = 128, 64",
            "experiment = warp\n",
            "experiment = spectrum\ncolour = red",
            "operators = J^m:1",
            "experiment = multiplier\noperators = J^m:1, M:linear:1",
        ];
        for text in bad {
            assert!(matches!(ExperimentConfig::parse(text, None), Err(Error::Config(_))), "{text}");
        }
        let e = ExperimentConfig::parse("experiment = spectrum\noperators = Q^7", None).unwrap_err();
        assert!(e.to_string().contains("J^m:<m>"), "{e}");
    }

    #[test]
    fn caller_kind_must_agree() {
        let text = "experiment = spectrum\noperators = J^m:1";
        assert!(ExperimentConfig::parse(text, Some(ExperimentKind::Compare)).is_err());
        let c = ExperimentConfig::parse("operators = J^m:1", Some(ExperimentKind::Spectrum)).unwrap();
        assert_eq!(c.levels, vec![256]);
    }
}
