//! Law of large numbers for compositions of independent random unitaries.
//!
//! Trial `j` draws its `n` Hamiltonians from stream `j` of the master seed,
//! so results do not depend on how trials are scheduled across threads.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::ensemble::{Draw, HamiltonianEnsemble, Mixture};
use crate::error::{LabError, Result};
use crate::operator::{
    expm_hermitian, operator_power, ComplexMatrix, HermitianSpectrum, StateVector,
    UnitaryOperator,
};
use crate::rng::{RngStream, PROPAGATOR_STREAM};

/// Parameters of one tail-probability estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlnParams {
    pub n: u64,
    pub t: f64,
    pub epsilon: f64,
    pub trials: usize,
    /// Monte Carlo budget for the reference composition of continuous
    /// ensembles; ignored for finitely supported ones.
    pub reference_samples: usize,
}

impl LlnParams {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(LabError::InvalidArgument("n must be >= 1".into()));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(LabError::InvalidArgument(format!("t must be positive, got {}", self.t)));
        }
        if !(self.epsilon > 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.trials == 0 {
            return Err(LabError::InvalidArgument("trials must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlnResult {
    pub n: u64,
    pub t: f64,
    pub epsilon: f64,
    pub trials: usize,
    /// Fraction of trials whose deviation exceeds `epsilon`.
    pub tail_probability: f64,
    pub mean_deviation: f64,
    /// Samples behind the reference composition; zero when it is exact.
    pub reference_samples: usize,
    /// Entrywise standard error of the one-step reference `F(t/n)`.
    pub reference_std_error: f64,
}

impl LlnResult {
    pub const CSV_HEADER: &'static str = "n,t,epsilon,trials,tail_probability,mean_deviation";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{},{:e},{:e}",
            self.n, self.t, self.epsilon, self.trials, self.tail_probability, self.mean_deviation
        )
    }
}

pub fn lln_csv(rows: &[LlnResult]) -> String {
    let mut out = String::from(LlnResult::CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{}", r.csv_row()).expect("writing to a String");
    }
    out
}

/// Draws `exp(i (t/n) H)` factors, reusing precomputed spectra for atoms.
struct StepSampler<'a> {
    ensemble: &'a HamiltonianEnsemble,
    step: f64,
    atom_steps: Vec<ComplexMatrix>,
}

impl<'a> StepSampler<'a> {
    fn new(ensemble: &'a HamiltonianEnsemble, n: u64, t: f64) -> Result<Self> {
        let step = t / n as f64;
        let atom_steps = match ensemble.discrete() {
            Some(d) => d
                .atoms()
                .iter()
                .map(|(h, _)| Ok(HermitianSpectrum::decompose(h)?.propagator(step)))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        Ok(Self {
            ensemble,
            step,
            atom_steps,
        })
    }

    fn next(&self, rng: &mut RngStream) -> Result<ComplexMatrix> {
        match self.ensemble.draw(rng) {
            Draw::Atom(k, _) => Ok(self.atom_steps[k].clone()),
            Draw::Sample(h) => Ok(expm_hermitian(&h, self.step)?.into_matrix()),
        }
    }

    /// `exp(i(t/n)H_n) ... exp(i(t/n)H_1)`, newest factor on the left.
    fn compose(&self, n: u64, rng: &mut RngStream) -> Result<ComplexMatrix> {
        let mut acc = self.next(rng)?.into_matrix();
        for _ in 1..n {
            acc = self.next(rng)?.into_matrix() * acc;
        }
        ComplexMatrix::new(acc)
    }
}

/// One random composition of `n` independent factors at time `t/n`.
pub fn sample_composition(
    e: &HamiltonianEnsemble,
    n: u64,
    t: f64,
    rng: &mut RngStream,
) -> Result<UnitaryOperator> {
    if n == 0 {
        return Err(LabError::InvalidArgument("n must be >= 1".into()));
    }
    let sampler = StepSampler::new(e, n, t)?;
    UnitaryOperator::new(sampler.compose(n, rng)?)
}

/// The mean composition `(E exp(i(t/n)H))^n`, exact for finitely supported
/// ensembles by independence of the factors. Also returns the sample count
/// and standard error of the one-step mean.
fn reference_composition(
    e: &HamiltonianEnsemble,
    params: &LlnParams,
    seed: u64,
) -> Result<(ComplexMatrix, usize, f64)> {
    let mut rng = RngStream::new(seed, PROPAGATOR_STREAM);
    let mixture = Mixture::build(e, params.reference_samples, &mut rng)?;
    let step = params.t / params.n as f64;
    let reference = operator_power(&mixture.eval(step), params.n)?;
    let samples = if mixture.is_exact() {
        0
    } else {
        mixture.sample_count()
    };
    Ok((reference, samples, mixture.standard_error(step)))
}

/// Per-trial deviations `max_x ||C_j x - R x||`, indexed by trial.
pub fn lln_deviations(
    e: &HamiltonianEnsemble,
    params: &LlnParams,
    vectors: &[StateVector],
    seed: u64,
) -> Result<(Vec<f64>, usize, f64)> {
    params.validate()?;
    if vectors.is_empty() {
        return Err(LabError::InvalidArgument("probe vector set is empty".into()));
    }
    if let Some(v) = vectors.iter().find(|v| v.dim() != e.dim()) {
        return Err(LabError::DimensionMismatch {
            expected: e.dim(),
            found: v.dim(),
        });
    }
    let (reference, samples, std_error) = reference_composition(e, params, seed)?;
    let sampler = StepSampler::new(e, params.n, params.t)?;
    let deviations = (0..params.trials)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::new(seed, j as u64);
            let diff = sampler.compose(params.n, &mut rng)?.sub(&reference)?;
            vectors.iter().try_fold(0.0f64, |worst, x| {
                Ok(worst.max(diff.apply(x)?.norm()))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((deviations, samples, std_error))
}

/// Tail statistics from a precomputed deviation list.
pub fn summarize(params: &LlnParams, deviations: &[f64]) -> LlnResult {
    let exceed = deviations.iter().filter(|&&d| d > params.epsilon).count();
    // summed in trial order so the result is independent of scheduling
    let total: f64 = deviations.iter().sum();
    LlnResult {
        n: params.n,
        t: params.t,
        epsilon: params.epsilon,
        trials: deviations.len(),
        tail_probability: exceed as f64 / deviations.len() as f64,
        mean_deviation: total / deviations.len() as f64,
        reference_samples: 0,
        reference_std_error: 0.0,
    }
}

/// Empirical `P(max_x ||C x - E[C] x|| > epsilon)` over `params.trials`
/// compositions, with `E[C]` the mean composition.
pub fn lln_tail(
    e: &HamiltonianEnsemble,
    params: &LlnParams,
    vectors: &[StateVector],
    rng: &RngStream,
) -> Result<LlnResult> {
    let (deviations, samples, std_error) = lln_deviations(e, params, vectors, rng.seed())?;
    Ok(LlnResult {
        reference_samples: samples,
        reference_std_error: std_error,
        ..summarize(params, &deviations)
    })
}
