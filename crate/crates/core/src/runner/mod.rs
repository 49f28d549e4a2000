//! Batch execution of configured experiments.
//!
//! A run writes three files into the output directory:
//!
//! * `report.csv`: the experiment's result table,
//! * `plot.gp`: a gnuplot script rendering the table,
//! * `manifest.txt`: run metadata, SHA-256 checksums and the configuration echo.
//!
//! The report is a deterministic function of the configuration and seed; the
//! worker count only changes wall time.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{
    parse_config, ChernoffSettings, CltSettings, ConfigError, EnsembleSpec, Experiment,
    ExperimentConfig, LlnSettings, MatrixSpec, ProbeMode, ProbeSet, QuantizationSpec, WaveKind,
    Workers,
};

use crate::chernoff::{
    canonical_probes, default_probes, equivalence_report, low_lying_probes, OperatorFunction,
};
use crate::error::LabError;
use crate::lln::{lln_csv, lln_tail, LlnParams};
use crate::measure::{clt_csv, clt_error, heat_apply};
use crate::operator::{ComplexMatrix, StateVector};
use crate::rng::{RngStream, PROPAGATOR_STREAM};

pub const REPORT_FILE: &str = "report.csv";
pub const PLOT_FILE: &str = "plot.gp";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// Summary of a completed run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub experiment: &'static str,
    pub seed: u64,
    pub workers: usize,
    pub wall_time_seconds: f64,
    pub output_dir: PathBuf,
    /// `(file name, hex sha256)` for every file written besides the manifest.
    pub checksums: Vec<(String, String)>,
}

struct Artifacts {
    files: Vec<(&'static str, String)>,
}

/// Runs the experiment on a pool of `config.workers` threads and writes all
/// artifacts. On failure a manifest recording the error is still written when
/// the output directory is usable.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest, RunError> {
    let start = Instant::now();
    let workers = config.workers.resolve();
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;

    let outcome = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))
        .and_then(|pool| pool.install(|| compute(config)));

    let mut checksums = Vec::new();
    let failure = match outcome {
        Ok(artifacts) => {
            let mut err = None;
            for (name, body) in &artifacts.files {
                match write_file(dir, name, body) {
                    Ok(()) => checksums.push((name.to_string(), sha256_hex(body.as_bytes()))),
                    Err(e) => {
                        err = Some(e);
                        break;
                    }
                }
            }
            err
        }
        Err(e) => Some(e),
    };

    let manifest = RunManifest {
        experiment: config.experiment.name(),
        seed: config.seed,
        workers,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        output_dir: dir.clone(),
        checksums,
    };
    let text = render_manifest(&manifest, config, failure.as_ref());
    write_file(dir, MANIFEST_FILE, &text)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(manifest),
    }
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| RunError::Io { path, source })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn render_manifest(m: &RunManifest, config: &ExperimentConfig, failure: Option<&RunError>) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "artifact_version = {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    let _ = writeln!(w, "experiment = {}", m.experiment);
    let _ = writeln!(w, "seed = {}", m.seed);
    let _ = writeln!(w, "workers = {}", m.workers);
    let _ = writeln!(w, "wall_time_seconds = {:.6}", m.wall_time_seconds);
    match failure {
        None => {
            let _ = writeln!(w, "status = ok");
        }
        Some(e) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(w, "status = failed: {msg}");
        }
    }
    let _ = writeln!(w, "\n[checksums]");
    for (name, sum) in &m.checksums {
        let _ = writeln!(w, "{name} = sha256:{sum}");
    }
    let _ = writeln!(w, "\n[config]");
    out.push_str(&config.to_toml());
    out
}

fn probes(set: ProbeSet, dim: usize, seed: u64) -> Vec<StateVector> {
    match set {
        ProbeSet::Default => default_probes(dim, seed),
        ProbeSet::Canonical => canonical_probes(dim),
        ProbeSet::LowLying => low_lying_probes(dim),
    }
}

fn compute(config: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let seed = config.seed;
    let files = match &config.experiment {
        Experiment::Chernoff { ensemble, settings } => {
            let e = ensemble.build()?;
            let mc = ensemble.mc_samples();
            // Both estimates share one frozen sample set.
            let f = e.averaged_propagator(mc, &mut RngStream::new(seed, PROPAGATOR_STREAM))?;
            let h_bar = e.mean_hamiltonian(mc, &mut RngStream::new(seed, PROPAGATOR_STREAM))?;
            let target = OperatorFunction::semigroup(&h_bar)?;
            let vectors = probes(settings.probes, e.dim(), seed);
            let report = equivalence_report(
                &f,
                &target,
                settings.horizon,
                &settings.schedule,
                &vectors,
                settings.grid_points,
            )?;
            vec![(REPORT_FILE, report.to_csv()), (PLOT_FILE, CHERNOFF_PLOT.to_string())]
        }
        Experiment::Lln { ensemble, settings } => {
            let e = ensemble.build()?;
            let vectors = probes(settings.probes, e.dim(), seed);
            let rng = RngStream::new(seed, 0);
            let rows = settings
                .n
                .iter()
                .map(|&n| {
                    let params = LlnParams {
                        n,
                        t: settings.t,
                        epsilon: settings.epsilon,
                        trials: settings.trials,
                        reference_samples: settings.reference_samples,
                    };
                    lln_tail(&e, &params, &vectors, &rng)
                })
                .collect::<Result<Vec<_>, _>>()?;
            vec![(REPORT_FILE, lln_csv(&rows)), (PLOT_FILE, LLN_PLOT.to_string())]
        }
        Experiment::Clt(c) => {
            let spec = c.process()?;
            let u = c.probe_function()?;
            let rows = clt_error(&u, &spec, c.t, &c.schedule)?;
            let limit = heat_apply(&u, c.t, spec.variance())?;
            vec![
                (REPORT_FILE, clt_csv(&rows)),
                ("probe.csv", u.to_csv()),
                ("limit.csv", limit.to_csv()),
                (PLOT_FILE, CLT_PLOT.to_string()),
            ]
        }
        Experiment::Quantize(q) => {
            let ens = q.build()?;
            let mut csv = String::from("rule,row,col,re,im\n");
            for ((rule, _), (op, _)) in ens.rules().iter().zip(ens.atoms().atoms()) {
                matrix_rows(&mut csv, &rule.to_string(), op.matrix());
            }
            matrix_rows(&mut csv, "mean", ens.atoms().mean()?.matrix());
            vec![(REPORT_FILE, csv), (PLOT_FILE, QUANTIZE_PLOT.to_string())]
        }
    };
    Ok(Artifacts { files })
}

fn matrix_rows(out: &mut String, label: &str, m: &ComplexMatrix) {
    let dim = m.dim();
    for i in 0..dim {
        for j in 0..dim {
            let z: Complex64 = m.get(i, j);
            let _ = writeln!(out, "{label},{i},{j},{:e},{:e}", z.re, z.im);
        }
    }
}

const CHERNOFF_PLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set logscale xy
set xlabel 'n'
set ylabel 'sup deviation'
set terminal pngcairo size 800,600
set output 'report.png'
plot 'report.csv' using 1:2 with linespoints title 'deviation', \\
     '' using 1:(1.0/$1) with lines dashtype 2 title '1/n'
";

const LLN_PLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set logscale x
set xlabel 'n'
set terminal pngcairo size 800,600
set output 'report.png'
plot 'report.csv' using 1:5 with linespoints title 'tail probability', \\
     '' using 1:6 with linespoints title 'mean deviation'
";

const CLT_PLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set logscale xy
set xlabel 'n'
set ylabel 'sup error'
set terminal pngcairo size 800,600
set output 'report.png'
plot 'report.csv' using 1:2 with linespoints title 'error'
";

const QUANTIZE_PLOT: &str = "\
set datafile separator ','
set xlabel 'column'
set ylabel 'row'
set yrange [*:*] reverse
set terminal pngcairo size 800,600
set output 'report.png'
plot 'report.csv' using 3:2:(strcol(1) eq 'mean' ? abs($4) : NaN) every ::1 with image title '|mean|'
";
