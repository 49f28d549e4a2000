//! Chernoff power iterations `(F(t/n))^n`, their deviation from a target
//! semigroup, and finite-difference extraction of `F'(0)`.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::operator::{
    operator_power, time_grid, ComplexMatrix, HermitianOperator, HermitianSpectrum, StateVector,
};
use crate::rng::{RngStream, PROBE_STREAM};

/// Tolerance on `F(0) = I` for members of an [`OperatorFunction`].
pub const IDENTITY_AT_ZERO_TOL: f64 = 1e-12;
/// Geometric schedule used when none is configured.
pub const DEFAULT_SCHEDULE: [u64; 5] = [8, 16, 32, 64, 128];
/// Random unit vectors appended to the canonical basis by [`default_probes`].
pub const DEFAULT_RANDOM_PROBES: usize = 4;

type Evaluator = dyn Fn(f64) -> Result<ComplexMatrix> + Send + Sync;

/// A strongly continuous operator-valued map `t -> F(t)` on `[0, t_max]`
/// with `F(0) = I`.
#[derive(Clone)]
pub struct OperatorFunction {
    dim: usize,
    t_max: f64,
    evaluator: Arc<Evaluator>,
}

impl fmt::Debug for OperatorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorFunction")
            .field("dim", &self.dim)
            .field("t_max", &self.t_max)
            .finish_non_exhaustive()
    }
}

impl OperatorFunction {
    /// Wraps an evaluator and checks `F(0) = I`. `t_max` may be infinite.
    pub fn new<E>(dim: usize, t_max: f64, evaluator: E) -> Result<Self>
    where
        E: Fn(f64) -> Result<ComplexMatrix> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(LabError::Empty);
        }
        if !(t_max > 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "operator function domain must have t_max > 0, got {t_max}"
            )));
        }
        let f = Self {
            dim,
            t_max,
            evaluator: Arc::new(evaluator),
        };
        let at_zero = f.eval(0.0)?;
        let deviation = at_zero.max_abs_diff(&ComplexMatrix::identity(dim));
        if !(deviation <= IDENTITY_AT_ZERO_TOL) {
            return Err(LabError::InvalidArgument(format!(
                "operator function violates F(0) = I: max deviation {deviation:e}"
            )));
        }
        Ok(f)
    }

    /// The unitary group `t -> exp(itH)`.
    pub fn semigroup(h: &HermitianOperator) -> Result<Self> {
        let spectrum = HermitianSpectrum::decompose(h)?;
        Self::new(h.dim(), f64::INFINITY, move |t| Ok(spectrum.propagator(t)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn eval(&self, t: f64) -> Result<ComplexMatrix> {
        if !(t >= 0.0 && t <= self.t_max) {
            return Err(LabError::OutsideDomain {
                t,
                t_max: self.t_max,
            });
        }
        let m = (self.evaluator)(t)?;
        if m.dim() != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                found: m.dim(),
            });
        }
        Ok(m)
    }
}

/// `(F(t/n))^n` from a single evaluation of `F`.
pub fn chernoff_power(f: &OperatorFunction, t: f64, n: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(LabError::InvalidArgument("chernoff_power requires n >= 1".into()));
    }
    if !(t >= 0.0) {
        return Err(LabError::OutsideDomain { t, t_max: f.t_max() });
    }
    let step = f.eval(t / n as f64)?;
    operator_power(&step, n)
}

/// `max_{u, t} ||(F(t/n))^n u - U(t) u||` over the probe set and the uniform
/// time grid on `[0, T]`.
///
/// `target` is assumed to be a semigroup, so `U(t)` stands in for
/// `(U(t/n))^n`. The probe set is finite, so the value is a lower bound on
/// the operator-level deviation.
pub fn chernoff_deviation(
    f: &OperatorFunction,
    target: &OperatorFunction,
    horizon: f64,
    n: u64,
    vectors: &[StateVector],
    grid_points: usize,
) -> Result<f64> {
    if vectors.is_empty() {
        return Err(LabError::InvalidArgument("probe vector set is empty".into()));
    }
    if f.dim() != target.dim() {
        return Err(LabError::DimensionMismatch {
            expected: f.dim(),
            found: target.dim(),
        });
    }
    if let Some(v) = vectors.iter().find(|v| v.dim() != f.dim()) {
        return Err(LabError::DimensionMismatch {
            expected: f.dim(),
            found: v.dim(),
        });
    }
    let mut worst: f64 = 0.0;
    for t in time_grid(horizon, grid_points)? {
        let approx = chernoff_power(f, t, n)?;
        let exact = target.eval(t)?;
        let diff = approx.sub(&exact)?;
        for u in vectors {
            worst = worst.max(diff.apply(u)?.norm());
        }
    }
    Ok(worst)
}

/// Second-order one-sided difference `(-3F(0) + 4F(h) - F(2h)) / (2h)`.
pub fn generator_fd(f: &OperatorFunction, h: f64) -> Result<ComplexMatrix> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(LabError::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    if h >= f.t_max() / 2.0 {
        return Err(LabError::OutsideDomain {
            t: 2.0 * h,
            t_max: f.t_max(),
        });
    }
    let f0 = f.eval(0.0)?.into_matrix();
    let f1 = f.eval(h)?.into_matrix();
    let f2 = f.eval(2.0 * h)?.into_matrix();
    let num = f0 * Complex64::new(-3.0, 0.0) + f1 * Complex64::new(4.0, 0.0) - f2;
    ComplexMatrix::new(num / Complex64::new(2.0 * h, 0.0))
}

/// Deviations of `(F(t/n))^n` from a target semigroup along a schedule of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffReport {
    pub n_schedule: Vec<u64>,
    pub deviations: Vec<f64>,
    pub test_vectors: usize,
    pub horizon: f64,
    /// `deviations[k + 1] / deviations[k]`; NaN when `deviations[k]` is zero.
    pub decay_ratios: Vec<f64>,
}

impl ChernoffReport {
    pub const CSV_HEADER: &'static str = "n,deviation,decay_ratio";

    /// One row per schedule entry; the first row has an empty ratio.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (k, (n, d)) in self.n_schedule.iter().zip(&self.deviations).enumerate() {
            let ratio = if k == 0 {
                String::new()
            } else {
                format!("{:e}", self.decay_ratios[k - 1])
            };
            writeln!(out, "{n},{d:e},{ratio}").expect("writing to a String");
        }
        out
    }

    pub fn last_ratio(&self) -> Option<f64> {
        self.decay_ratios.last().copied()
    }
}

/// Runs [`chernoff_deviation`] for each `n` in a strictly increasing schedule.
///
/// Entries are evaluated in parallel on the current rayon pool and reassembled
/// in schedule order.
pub fn equivalence_report(
    f: &OperatorFunction,
    target: &OperatorFunction,
    horizon: f64,
    n_schedule: &[u64],
    vectors: &[StateVector],
    grid_points: usize,
) -> Result<ChernoffReport> {
    if n_schedule.is_empty() {
        return Err(LabError::InvalidArgument("n schedule is empty".into()));
    }
    if n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::InvalidArgument(
            "n schedule must be strictly increasing".into(),
        ));
    }
    let deviations = n_schedule
        .par_iter()
        .map(|&n| chernoff_deviation(f, target, horizon, n, vectors, grid_points))
        .collect::<Result<Vec<f64>>>()?;
    let decay_ratios = deviations
        .windows(2)
        .map(|w| if w[0] == 0.0 { f64::NAN } else { w[1] / w[0] })
        .collect();
    Ok(ChernoffReport {
        n_schedule: n_schedule.to_vec(),
        deviations,
        test_vectors: vectors.len(),
        horizon,
        decay_ratios,
    })
}

/// Canonical basis plus [`DEFAULT_RANDOM_PROBES`] random unit vectors drawn
/// from the probe stream of `seed`.
pub fn default_probes(dim: usize, seed: u64) -> Vec<StateVector> {
    let mut probes: Vec<StateVector> = (0..dim).map(|k| StateVector::basis(dim, k)).collect();
    let mut rng = RngStream::new(seed, PROBE_STREAM);
    for _ in 0..DEFAULT_RANDOM_PROBES {
        probes.push(random_unit_vector(dim, &mut rng));
    }
    probes
}

/// First `max(dim / 2, 1)` canonical basis vectors.
pub fn low_lying_probes(dim: usize) -> Vec<StateVector> {
    (0..(dim / 2).max(1))
        .map(|k| StateVector::basis(dim, k))
        .collect()
}

pub fn canonical_probes(dim: usize) -> Vec<StateVector> {
    (0..dim).map(|k| StateVector::basis(dim, k)).collect()
}

/// Haar-distributed unit vector (normalized complex Gaussian).
pub fn random_unit_vector(dim: usize, rng: &mut RngStream) -> StateVector {
    loop {
        let entries: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        let v = StateVector::new(entries).expect("normal draws are finite");
        if let Ok(unit) = v.normalized() {
            return unit;
        }
    }
}
