//! Experiment configuration: TOML schema, validation and serialization.
//!
//! Parsing happens in two passes. The TOML text is first deserialized into a
//! loosely typed mirror in which every field is optional, so that a missing
//! field never aborts the parse. Validation then checks every section and
//! reports all problems at once, each prefixed with the dotted path of the
//! offending field.

use std::fmt;
use std::num::NonZeroUsize;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chernoff::DEFAULT_SCHEDULE;
use crate::ensemble::{
    DiscreteEnsemble, GaussianHermitianEnsemble, HamiltonianEnsemble, DEFAULT_MC_SAMPLES,
};
use crate::error::Result as LabResult;
use crate::measure::{JumpDistribution, PeriodicGridFunction, ShiftProcessSpec};
use crate::operator::{ComplexMatrix, HermitianOperator, DEFAULT_TIME_GRID};
use crate::quantizer::{
    quantization_ensemble, OscillatorBasis, PolynomialSymbol, QuantizationEnsemble,
    QuantizationRule,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

impl ConfigError {
    /// The individual validation messages (one for syntax errors).
    pub fn messages(&self) -> Vec<String> {
        match self {
            Self::Invalid(v) => v.clone(),
            other => vec![other.to_string()],
        }
    }
}

// ---------------------------------------------------------------------------
// Validated configuration

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub workers: Workers,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workers {
    Auto,
    Fixed(NonZeroUsize),
}

impl Workers {
    pub fn resolve(self) -> usize {
        match self {
            Self::Auto => std::thread::available_parallelism().map_or(1, NonZeroUsize::get),
            Self::Fixed(n) => n.get(),
        }
    }
}

impl std::str::FromStr for Workers {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        s.parse::<NonZeroUsize>()
            .map(Self::Fixed)
            .map_err(|_| format!("workers must be a positive integer or \"auto\", got \"{s}\""))
    }
}

impl fmt::Display for Workers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Fixed(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Chernoff {
        ensemble: EnsembleSpec,
        settings: ChernoffSettings,
    },
    Lln {
        ensemble: EnsembleSpec,
        settings: LlnSettings,
    },
    Clt(CltSettings),
    Quantize(QuantizationSpec),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Chernoff { .. } => "chernoff",
            Self::Lln { .. } => "lln",
            Self::Clt(_) => "clt",
            Self::Quantize(_) => "quantize",
        }
    }
}

/// Matrix given by name (`sigma_x`, `sigma_y`, `sigma_z`, `identity:N`,
/// `zero:N`) or by row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Named(String),
    Explicit {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
}

impl MatrixSpec {
    pub fn build(&self) -> LabResult<HermitianOperator> {
        use crate::error::LabError;
        match self {
            Self::Named(name) => match name.as_str() {
                "sigma_x" => Ok(HermitianOperator::sigma_x()),
                "sigma_y" => Ok(HermitianOperator::sigma_y()),
                "sigma_z" => Ok(HermitianOperator::sigma_z()),
                other => {
                    let (kind, dim) = other.split_once(':').ok_or_else(|| {
                        LabError::InvalidArgument(format!("unknown matrix name \"{other}\""))
                    })?;
                    let dim: usize = dim.parse().ok().filter(|&d| d > 0).ok_or_else(|| {
                        LabError::InvalidArgument(format!("bad dimension in \"{other}\""))
                    })?;
                    match kind {
                        "identity" => Ok(HermitianOperator::identity(dim)),
                        "zero" => Ok(HermitianOperator::zeros(dim)),
                        _ => Err(LabError::InvalidArgument(format!(
                            "unknown matrix name \"{other}\""
                        ))),
                    }
                }
            },
            Self::Explicit { re, im } => {
                let dim = re.len();
                let square = |rows: &Vec<Vec<f64>>| rows.len() == dim && rows.iter().all(|r| r.len() == dim);
                if dim == 0 || !square(re) || im.as_ref().is_some_and(|m| !square(m)) {
                    return Err(LabError::InvalidArgument(
                        "explicit matrix must be square with matching re/im shapes".into(),
                    ));
                }
                let mut entries = Vec::with_capacity(dim * dim);
                for i in 0..dim {
                    for j in 0..dim {
                        let imag = im.as_ref().map_or(0.0, |m| m[i][j]);
                        entries.push(Complex64::new(re[i][j], imag));
                    }
                }
                HermitianOperator::new(ComplexMatrix::from_rows(dim, &entries)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationSpec {
    pub symbol: PolynomialSymbol,
    pub dim: usize,
    pub hbar: f64,
    pub rules: Vec<(QuantizationRule, f64)>,
}

impl QuantizationSpec {
    pub fn build(&self) -> LabResult<QuantizationEnsemble> {
        let basis = OscillatorBasis::new(self.dim, self.hbar)?;
        quantization_ensemble(&self.symbol, &self.rules, &basis)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSpec {
    Discrete { atoms: Vec<(MatrixSpec, f64)> },
    Gaussian {
        center: MatrixSpec,
        scale: f64,
        mc_samples: usize,
    },
    Quantization(QuantizationSpec),
}

impl EnsembleSpec {
    pub fn build(&self) -> LabResult<HamiltonianEnsemble> {
        Ok(match self {
            Self::Discrete { atoms } => DiscreteEnsemble::new(
                atoms
                    .iter()
                    .map(|(m, p)| Ok((m.build()?, *p)))
                    .collect::<LabResult<Vec<_>>>()?,
            )?
            .into(),
            Self::Gaussian { center, scale, .. } => {
                GaussianHermitianEnsemble::new(center.build()?, *scale)?.into()
            }
            Self::Quantization(q) => q.build()?.into(),
        })
    }

    /// Monte Carlo budget; zero for finitely supported laws.
    pub fn mc_samples(&self) -> usize {
        match self {
            Self::Gaussian { mc_samples, .. } => *mc_samples,
            _ => 0,
        }
    }

    fn default_probes(&self) -> ProbeSet {
        match self {
            Self::Quantization(_) => ProbeSet::LowLying,
            _ => ProbeSet::Default,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeSet {
    /// Canonical basis plus four seeded random unit vectors.
    Default,
    Canonical,
    /// First `dim / 2` basis vectors.
    LowLying,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffSettings {
    pub horizon: f64,
    pub schedule: Vec<u64>,
    pub grid_points: usize,
    pub probes: ProbeSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlnSettings {
    pub n: Vec<u64>,
    pub t: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub reference_samples: usize,
    pub probes: ProbeSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    Cos,
    Sin,
}

/// One term `amplitude * cos(2 pi k x / L)` (or `sin`) of the probe function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeMode {
    pub kind: WaveKind,
    pub k: i64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltSettings {
    pub jump: JumpDistribution,
    pub period: f64,
    pub grid: usize,
    pub t: f64,
    pub schedule: Vec<u32>,
    pub probe: Vec<ProbeMode>,
}

impl CltSettings {
    pub fn process(&self) -> LabResult<ShiftProcessSpec> {
        ShiftProcessSpec::new(self.jump.clone())
    }

    pub fn probe_function(&self) -> LabResult<PeriodicGridFunction> {
        let period = self.period;
        PeriodicGridFunction::from_fn(period, self.grid, |x| {
            let v: f64 = self
                .probe
                .iter()
                .map(|m| {
                    let arg = 2.0 * std::f64::consts::PI * m.k as f64 * x / period;
                    m.amplitude
                        * match m.kind {
                            WaveKind::Cos => arg.cos(),
                            WaveKind::Sin => arg.sin(),
                        }
                })
                .sum();
            Complex64::new(v, 0.0)
        })
    }
}

// ---------------------------------------------------------------------------
// Raw mirror of the TOML document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Int(i64),
    Text(String),
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    experiment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<RawScalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<RawScalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ensemble: Option<RawEnsemble>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chernoff: Option<RawChernoff>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lln: Option<RawLln>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clt: Option<RawClt>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<RawAtom>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<MatrixSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symbol: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hbar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rules: Option<Vec<RawRule>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    matrix: Option<MatrixSpec>,
    probability: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    rule: Option<QuantizationRule>,
    probability: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChernoff {
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probes: Option<ProbeSet>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLln {
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probes: Option<ProbeSet>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClt {
    #[serde(skip_serializing_if = "Option::is_none")]
    jump: Option<JumpDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe: Option<Vec<ProbeMode>>,
}

// ---------------------------------------------------------------------------
// Validation

struct Issues(Vec<String>);

impl Issues {
    fn push(&mut self, path: &str, msg: impl fmt::Display) {
        self.0.push(format!("{path}: {msg}"));
    }

    fn require<T>(&mut self, value: Option<T>, path: &str) -> Option<T> {
        if value.is_none() {
            self.push(path, "required field is missing");
        }
        value
    }

    fn positive(&mut self, value: Option<f64>, path: &str) -> Option<f64> {
        let v = self.require(value, path)?;
        if !(v > 0.0) || !v.is_finite() {
            self.push(path, format!("must be positive and finite, got {v}"));
            return None;
        }
        Some(v)
    }

    fn at_least(&mut self, value: usize, min: usize, path: &str) -> Option<usize> {
        if value < min {
            self.push(path, format!("must be >= {min}, got {value}"));
            return None;
        }
        Some(value)
    }

    fn schedule<T: Copy + PartialOrd + Default + fmt::Display>(
        &mut self,
        value: Option<Vec<T>>,
        path: &str,
    ) -> Option<Vec<T>> {
        let v = self.require(value, path)?;
        if v.is_empty() {
            self.push(path, "must not be empty");
            return None;
        }
        if v.iter().any(|&n| n <= T::default()) {
            self.push(path, "entries must be >= 1");
            return None;
        }
        if v.windows(2).any(|w| w[0] >= w[1]) {
            self.push(path, "must be strictly increasing");
            return None;
        }
        Some(v)
    }
}

/// Parses and validates a TOML experiment description.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| line_column(text, s.start))
            .unwrap_or((1, 1));
        ConfigError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    validate(raw)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn validate(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let mut issues = Issues(Vec::new());

    let seed = match issues.require(raw.seed, "seed") {
        Some(RawScalar::Int(v)) if v >= 0 => Some(v as u64),
        Some(RawScalar::Text(s)) if s.parse::<u64>().is_ok() => s.parse().ok(),
        Some(other) => {
            issues.push("seed", format!("must be a 64-bit unsigned integer, got {other:?}"));
            None
        }
        None => None,
    };
    let output_dir = issues.require(raw.output_dir, "output_dir").map(PathBuf::from);
    let workers = match raw.workers {
        None => Some(Workers::Auto),
        Some(RawScalar::Int(n)) if n >= 1 => NonZeroUsize::new(n as usize).map(Workers::Fixed),
        Some(RawScalar::Text(s)) => match s.parse::<Workers>() {
            Ok(w) => Some(w),
            Err(e) => {
                issues.push("workers", e);
                None
            }
        },
        Some(RawScalar::Int(n)) => {
            issues.push("workers", format!("must be a positive integer or \"auto\", got {n}"));
            None
        }
    };

    let experiment = match issues.require(raw.experiment.as_deref(), "experiment") {
        Some("chernoff") => {
            let ensemble = validate_ensemble(raw.ensemble, &mut issues);
            let settings = validate_chernoff(raw.chernoff, ensemble.as_ref(), &mut issues);
            ensemble.zip(settings).map(|(ensemble, settings)| Experiment::Chernoff { ensemble, settings })
        }
        Some("lln") => {
            let ensemble = validate_ensemble(raw.ensemble, &mut issues);
            let settings = validate_lln(raw.lln, ensemble.as_ref(), &mut issues);
            ensemble.zip(settings).map(|(ensemble, settings)| Experiment::Lln { ensemble, settings })
        }
        Some("clt") => validate_clt(raw.clt, &mut issues).map(Experiment::Clt),
        Some("quantize") => match validate_ensemble(raw.ensemble, &mut issues) {
            Some(EnsembleSpec::Quantization(q)) => Some(Experiment::Quantize(q)),
            Some(_) => {
                issues.push("ensemble.kind", "quantize experiments need kind = \"quantization\"");
                None
            }
            None => None,
        },
        Some(other) => {
            issues.push(
                "experiment",
                format!("unknown experiment \"{other}\" (expected chernoff, lln, clt or quantize)"),
            );
            None
        }
        None => None,
    };

    match (seed, output_dir, workers, experiment) {
        (Some(seed), Some(output_dir), Some(workers), Some(experiment)) if issues.0.is_empty() => {
            Ok(ExperimentConfig {
                seed,
                output_dir,
                workers,
                experiment,
            })
        }
        _ => Err(ConfigError::Invalid(issues.0)),
    }
}

fn validate_ensemble(raw: Option<RawEnsemble>, issues: &mut Issues) -> Option<EnsembleSpec> {
    let raw = issues.require(raw, "ensemble")?;
    let spec = match issues.require(raw.kind.as_deref(), "ensemble.kind")? {
        "discrete" => {
            let atoms = issues.require(raw.atoms, "ensemble.atoms")?;
            if atoms.is_empty() {
                issues.push("ensemble.atoms", "must contain at least one atom");
                return None;
            }
            let mut out = Vec::new();
            let mut ok = true;
            for (k, a) in atoms.into_iter().enumerate() {
                let m = issues.require(a.matrix, &format!("ensemble.atoms[{k}].matrix"));
                let p = issues.require(a.probability, &format!("ensemble.atoms[{k}].probability"));
                match m.zip(p) {
                    Some(pair) => out.push(pair),
                    None => ok = false,
                }
            }
            ok.then_some(EnsembleSpec::Discrete { atoms: out })?
        }
        "gaussian" => {
            let center = issues.require(raw.center, "ensemble.center");
            let scale = issues.positive(raw.scale, "ensemble.scale");
            let mc = raw.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES);
            let mc = issues.at_least(mc, 1, "ensemble.mc_samples");
            EnsembleSpec::Gaussian {
                center: center?,
                scale: scale?,
                mc_samples: mc?,
            }
        }
        "quantization" => {
            let symbol = issues.require(raw.symbol, "ensemble.symbol").and_then(|s| {
                s.parse::<PolynomialSymbol>()
                    .map_err(|e| issues.push("ensemble.symbol", e))
                    .ok()
            });
            let dim = issues
                .require(raw.dim, "ensemble.dim")
                .and_then(|d| issues.at_least(d, 2, "ensemble.dim"));
            let hbar = issues.positive(raw.hbar.or(Some(1.0)), "ensemble.hbar");
            let rules = issues.require(raw.rules, "ensemble.rules").and_then(|rules| {
                if rules.is_empty() {
                    issues.push("ensemble.rules", "must contain at least one rule");
                    return None;
                }
                let mut out = Vec::new();
                let mut ok = true;
                for (k, r) in rules.into_iter().enumerate() {
                    let rule = issues.require(r.rule, &format!("ensemble.rules[{k}].rule"));
                    let p = issues.require(r.probability, &format!("ensemble.rules[{k}].probability"));
                    match rule.zip(p) {
                        Some(pair) => out.push(pair),
                        None => ok = false,
                    }
                }
                ok.then_some(out)
            });
            EnsembleSpec::Quantization(QuantizationSpec {
                symbol: symbol?,
                dim: dim?,
                hbar: hbar?,
                rules: rules?,
            })
        }
        other => {
            issues.push(
                "ensemble.kind",
                format!("unknown kind \"{other}\" (expected discrete, gaussian or quantization)"),
            );
            return None;
        }
    };
    // Constructing the ensemble checks Hermiticity, probability sums and dimensions.
    if let Err(e) = spec.build() {
        issues.push("ensemble", e);
        return None;
    }
    Some(spec)
}

fn validate_chernoff(
    raw: Option<RawChernoff>,
    ensemble: Option<&EnsembleSpec>,
    issues: &mut Issues,
) -> Option<ChernoffSettings> {
    let raw = raw.unwrap_or_default();
    let horizon = issues.positive(raw.horizon.or(Some(1.0)), "chernoff.horizon");
    let schedule = issues.schedule(
        raw.schedule.or_else(|| Some(DEFAULT_SCHEDULE.to_vec())),
        "chernoff.schedule",
    );
    let grid = issues.at_least(
        raw.grid_points.unwrap_or(DEFAULT_TIME_GRID),
        2,
        "chernoff.grid_points",
    );
    let probes = raw
        .probes
        .or_else(|| ensemble.map(EnsembleSpec::default_probes))?;
    Some(ChernoffSettings {
        horizon: horizon?,
        schedule: schedule?,
        grid_points: grid?,
        probes,
    })
}

fn validate_lln(
    raw: Option<RawLln>,
    ensemble: Option<&EnsembleSpec>,
    issues: &mut Issues,
) -> Option<LlnSettings> {
    let raw = issues.require(raw, "lln")?;
    let n = issues.schedule(raw.n, "lln.n");
    let t = issues.positive(raw.t, "lln.t");
    let epsilon = issues.positive(raw.epsilon, "lln.epsilon");
    let trials = issues
        .require(raw.trials, "lln.trials")
        .and_then(|v| issues.at_least(v, 1, "lln.trials"));
    let reference = issues.at_least(
        raw.reference_samples
            .or_else(|| ensemble.map(|e| e.mc_samples().max(DEFAULT_MC_SAMPLES)))
            .unwrap_or(DEFAULT_MC_SAMPLES),
        1,
        "lln.reference_samples",
    );
    let probes = raw.probes.unwrap_or(ProbeSet::Canonical);
    Some(LlnSettings {
        n: n?,
        t: t?,
        epsilon: epsilon?,
        trials: trials?,
        reference_samples: reference?,
        probes,
    })
}

fn validate_clt(raw: Option<RawClt>, issues: &mut Issues) -> Option<CltSettings> {
    let raw = issues.require(raw, "clt")?;
    let jump = issues.require(raw.jump, "clt.jump").and_then(|j| {
        j.validate().map_err(|e| issues.push("clt.jump", e)).ok()?;
        Some(j)
    });
    let period = issues.positive(raw.period.or(Some(2.0 * std::f64::consts::PI)), "clt.period");
    let grid = issues.require(raw.grid, "clt.grid").and_then(|g| {
        if g < 4 || !g.is_power_of_two() {
            issues.push("clt.grid", format!("must be a power of two >= 4, got {g}"));
            return None;
        }
        Some(g)
    });
    let t = issues.positive(raw.t, "clt.t");
    let schedule = issues.schedule(raw.schedule, "clt.schedule");
    let probe = issues.require(raw.probe, "clt.probe").and_then(|p| {
        if p.is_empty() {
            issues.push("clt.probe", "must contain at least one mode");
            return None;
        }
        if p.iter().any(|m| !m.amplitude.is_finite()) {
            issues.push("clt.probe", "amplitudes must be finite");
            return None;
        }
        Some(p)
    });
    Some(CltSettings {
        jump: jump?,
        period: period?,
        grid: grid?,
        t: t?,
        schedule: schedule?,
        probe: probe?,
    })
}

// ---------------------------------------------------------------------------
// Serialization

impl ExperimentConfig {
    /// TOML text that [`parse_config`] maps back to an equal configuration.
    pub fn to_toml(&self) -> String {
        let seed = if self.seed <= i64::MAX as u64 {
            RawScalar::Int(self.seed as i64)
        } else {
            RawScalar::Text(self.seed.to_string())
        };
        let workers = match self.workers {
            Workers::Auto => RawScalar::Text("auto".into()),
            Workers::Fixed(n) => RawScalar::Int(n.get() as i64),
        };
        let mut raw = RawConfig {
            experiment: Some(self.experiment.name().into()),
            seed: Some(seed),
            output_dir: Some(self.output_dir.to_string_lossy().into_owned()),
            workers: Some(workers),
            ..RawConfig::default()
        };
        match &self.experiment {
            Experiment::Chernoff { ensemble, settings } => {
                raw.ensemble = Some(raw_ensemble(ensemble));
                raw.chernoff = Some(RawChernoff {
                    horizon: Some(settings.horizon),
                    schedule: Some(settings.schedule.clone()),
                    grid_points: Some(settings.grid_points),
                    probes: Some(settings.probes),
                });
            }
            Experiment::Lln { ensemble, settings } => {
                raw.ensemble = Some(raw_ensemble(ensemble));
                raw.lln = Some(RawLln {
                    n: Some(settings.n.clone()),
                    t: Some(settings.t),
                    epsilon: Some(settings.epsilon),
                    trials: Some(settings.trials),
                    reference_samples: Some(settings.reference_samples),
                    probes: Some(settings.probes),
                });
            }
            Experiment::Clt(c) => {
                raw.clt = Some(RawClt {
                    jump: Some(c.jump.clone()),
                    period: Some(c.period),
                    grid: Some(c.grid),
                    t: Some(c.t),
                    schedule: Some(c.schedule.clone()),
                    probe: Some(c.probe.clone()),
                });
            }
            Experiment::Quantize(q) => {
                raw.ensemble = Some(raw_ensemble(&EnsembleSpec::Quantization(q.clone())));
            }
        }
        toml::to_string(&raw).expect("configuration values are representable in TOML")
    }
}

fn raw_ensemble(e: &EnsembleSpec) -> RawEnsemble {
    match e {
        EnsembleSpec::Discrete { atoms } => RawEnsemble {
            kind: Some("discrete".into()),
            atoms: Some(
                atoms
                    .iter()
                    .map(|(m, p)| RawAtom {
                        matrix: Some(m.clone()),
                        probability: Some(*p),
                    })
                    .collect(),
            ),
            ..RawEnsemble::default()
        },
        EnsembleSpec::Gaussian {
            center,
            scale,
            mc_samples,
        } => RawEnsemble {
            kind: Some("gaussian".into()),
            center: Some(center.clone()),
            scale: Some(*scale),
            mc_samples: Some(*mc_samples),
            ..RawEnsemble::default()
        },
        EnsembleSpec::Quantization(q) => RawEnsemble {
            kind: Some("quantization".into()),
            symbol: Some(q.symbol.to_string()),
            dim: Some(q.dim),
            hbar: Some(q.hbar),
            rules: Some(
                q.rules
                    .iter()
                    .map(|(r, p)| RawRule {
                        rule: Some(*r),
                        probability: Some(*p),
                    })
                    .collect(),
            ),
            ..RawEnsemble::default()
        },
    }
}
