//! Random Hamiltonian ensembles and their averaged propagators.
//!
//! The expectation `E[exp(itH)]` is an exact convex combination for finitely
//! supported laws. For continuous laws it is a Monte Carlo mean over a sample
//! set that is drawn once and reused for every `t`, so the resulting operator
//! function is continuous in `t`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::chernoff::OperatorFunction;
use crate::error::{LabError, Result};
use crate::operator::{ComplexMatrix, HermitianOperator, HermitianSpectrum};
use crate::quantizer::QuantizationEnsemble;
use crate::rng::RngStream;

/// Allowed deviation of `sum p_k` from one.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;
/// Monte Carlo budget for continuous ensembles when none is configured.
pub const DEFAULT_MC_SAMPLES: usize = 4096;

/// Finitely supported law `sum_k p_k delta_{H_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEnsemble {
    atoms: Vec<(HermitianOperator, f64)>,
}

impl DiscreteEnsemble {
    /// Probabilities must be nonnegative and sum to one within
    /// [`PROBABILITY_SUM_TOL`]; they are renormalized to sum exactly.
    pub fn new(atoms: Vec<(HermitianOperator, f64)>) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| LabError::InvalidArgument("ensemble needs at least one atom".into()))?;
        let dim = first.0.dim();
        if let Some((h, _)) = atoms.iter().find(|(h, _)| h.dim() != dim) {
            return Err(LabError::DimensionMismatch {
                expected: dim,
                found: h.dim(),
            });
        }
        check_probabilities(atoms.iter().map(|(_, p)| *p))?;
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        let atoms = atoms.into_iter().map(|(h, p)| (h, p / total)).collect();
        Ok(Self { atoms })
    }

    pub fn point_mass(h: HermitianOperator) -> Self {
        Self {
            atoms: vec![(h, 1.0)],
        }
    }

    pub fn atoms(&self) -> &[(HermitianOperator, f64)] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].0.dim()
    }

    /// `sum_k p_k H_k`.
    pub fn mean(&self) -> Result<HermitianOperator> {
        HermitianOperator::linear_combination(self.dim(), self.atoms.iter().map(|(h, p)| (*p, h)))
    }

    fn draw_index(&self, rng: &mut RngStream) -> usize {
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        for (k, (_, p)) in self.atoms.iter().enumerate() {
            cumulative += p;
            if u < cumulative {
                return k;
            }
        }
        // u landed in the rounding gap above the last partial sum
        self.atoms
            .iter()
            .rposition(|(_, p)| *p > 0.0)
            .expect("probabilities sum to one")
    }
}

pub(crate) fn check_probabilities(probs: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(LabError::InvalidArgument(format!(
                "probability {p} is outside [0, 1]"
            )));
        }
        total += p;
    }
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(LabError::InvalidArgument(format!(
            "probabilities must sum to 1, got {total}"
        )));
    }
    Ok(())
}

/// `center + scale * G` with `G` drawn from the Gaussian unitary ensemble:
/// diagonal entries `N(0, scale^2)`, off-diagonal real and imaginary parts
/// `N(0, scale^2 / 2)`, mirrored so every sample is exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHermitianEnsemble {
    center: HermitianOperator,
    scale: f64,
}

impl GaussianHermitianEnsemble {
    pub fn new(center: HermitianOperator, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(LabError::InvalidArgument(format!(
                "Gaussian ensemble scale must be positive, got {scale}"
            )));
        }
        Ok(Self { center, scale })
    }

    pub fn center(&self) -> &HermitianOperator {
        &self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    fn sample(&self, rng: &mut RngStream) -> HermitianOperator {
        let n = self.dim();
        let c = self.center.matrix().as_matrix();
        let off = self.scale / std::f64::consts::SQRT_2;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            let g: f64 = StandardNormal.sample(rng);
            m[(i, i)] = Complex64::new(c[(i, i)].re + self.scale * g, 0.0);
            for j in (i + 1)..n {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                let z = c[(i, j)] + Complex64::new(off * re, off * im);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        let m = ComplexMatrix::new(m).expect("finite center plus finite draws");
        HermitianOperator::new(m).expect("mirrored construction is exactly Hermitian")
    }
}

/// A probability law over Hermitian operators of a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianEnsemble {
    Discrete(DiscreteEnsemble),
    Gaussian(GaussianHermitianEnsemble),
    Quantization(QuantizationEnsemble),
}

impl From<DiscreteEnsemble> for HamiltonianEnsemble {
    fn from(e: DiscreteEnsemble) -> Self {
        Self::Discrete(e)
    }
}

impl From<GaussianHermitianEnsemble> for HamiltonianEnsemble {
    fn from(e: GaussianHermitianEnsemble) -> Self {
        Self::Gaussian(e)
    }
}

impl From<QuantizationEnsemble> for HamiltonianEnsemble {
    fn from(e: QuantizationEnsemble) -> Self {
        Self::Quantization(e)
    }
}

/// Result of one draw: either an index into the atom list of a finitely
/// supported law or a freshly sampled operator.
pub(crate) enum Draw<'a> {
    Atom(usize, &'a HermitianOperator),
    Sample(HermitianOperator),
}

impl HamiltonianEnsemble {
    pub fn dim(&self) -> usize {
        match self {
            Self::Discrete(e) => e.dim(),
            Self::Gaussian(e) => e.dim(),
            Self::Quantization(e) => e.atoms().dim(),
        }
    }

    /// The atom list when the law is finitely supported.
    pub fn discrete(&self) -> Option<&DiscreteEnsemble> {
        match self {
            Self::Discrete(e) => Some(e),
            Self::Quantization(e) => Some(e.atoms()),
            Self::Gaussian(_) => None,
        }
    }

    pub(crate) fn draw(&self, rng: &mut RngStream) -> Draw<'_> {
        match (self, self.discrete()) {
            (_, Some(d)) => {
                let k = d.draw_index(rng);
                Draw::Atom(k, &d.atoms()[k].0)
            }
            (Self::Gaussian(g), None) => Draw::Sample(g.sample(rng)),
            _ => unreachable!("only Gaussian ensembles lack an atom list"),
        }
    }

    /// One draw from the law; advances `rng`.
    pub fn sample_hamiltonian(&self, rng: &mut RngStream) -> HermitianOperator {
        match self.draw(rng) {
            Draw::Atom(_, h) => h.clone(),
            Draw::Sample(h) => h,
        }
    }

    /// `H_bar = E[H]`: exact for finitely supported laws (`mc_samples` and
    /// `rng` are ignored), a sample mean of `mc_samples` draws otherwise.
    pub fn mean_hamiltonian(
        &self,
        mc_samples: usize,
        rng: &mut RngStream,
    ) -> Result<HermitianOperator> {
        if let Some(d) = self.discrete() {
            return d.mean();
        }
        if mc_samples == 0 {
            return Err(LabError::InvalidArgument(
                "continuous ensembles need mc_samples >= 1".into(),
            ));
        }
        let dim = self.dim();
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        for _ in 0..mc_samples {
            acc += self.sample_hamiltonian(rng).matrix().as_matrix();
        }
        acc /= Complex64::new(mc_samples as f64, 0.0);
        HermitianOperator::new(ComplexMatrix::new(acc)?)
    }

    /// `t -> E[exp(itH)]`, with the same conventions as [`Self::mean_hamiltonian`].
    pub fn averaged_propagator(
        &self,
        mc_samples: usize,
        rng: &mut RngStream,
    ) -> Result<OperatorFunction> {
        Mixture::build(self, mc_samples, rng)?.into_operator_function()
    }
}

/// Convex combination `sum_k w_k exp(itH_k)` with precomputed spectra.
#[derive(Debug, Clone)]
pub(crate) struct Mixture {
    dim: usize,
    parts: Vec<(HermitianSpectrum, f64)>,
    exact: bool,
}

impl Mixture {
    pub(crate) fn build(
        e: &HamiltonianEnsemble,
        mc_samples: usize,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let dim = e.dim();
        if let Some(d) = e.discrete() {
            let parts = d
                .atoms()
                .iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(h, p)| Ok((HermitianSpectrum::decompose(h)?, *p)))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Self {
                dim,
                parts,
                exact: true,
            });
        }
        if mc_samples == 0 {
            return Err(LabError::InvalidArgument(
                "continuous ensembles need mc_samples >= 1".into(),
            ));
        }
        let w = 1.0 / mc_samples as f64;
        let parts = (0..mc_samples)
            .map(|_| Ok((HermitianSpectrum::decompose(&e.sample_hamiltonian(rng))?, w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim,
            parts,
            exact: false,
        })
    }

    pub(crate) fn is_exact(&self) -> bool {
        self.exact
    }

    pub(crate) fn sample_count(&self) -> usize {
        self.parts.len()
    }

    pub(crate) fn eval(&self, t: f64) -> ComplexMatrix {
        let mut acc = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for (spectrum, w) in &self.parts {
            acc += spectrum.propagator(t).into_matrix() * Complex64::new(*w, 0.0);
        }
        ComplexMatrix::new(acc).expect("convex combination of unitaries is finite")
    }

    /// Largest entrywise standard error of the Monte Carlo mean at `t`;
    /// zero for exact mixtures.
    pub(crate) fn standard_error(&self, t: f64) -> f64 {
        let m = self.parts.len();
        if self.exact || m < 2 {
            return 0.0;
        }
        let mean = self.eval(t).into_matrix();
        let mut var = DMatrix::<f64>::zeros(self.dim, self.dim);
        for (spectrum, _) in &self.parts {
            let d = spectrum.propagator(t).into_matrix() - &mean;
            var += d.map(|z| z.norm_sqr());
        }
        let var = var / (m as f64 - 1.0);
        var.iter().fold(0.0f64, |a, v| a.max(v.sqrt())) / (m as f64).sqrt()
    }

    pub(crate) fn into_operator_function(self) -> Result<OperatorFunction> {
        let dim = self.dim;
        let this = Arc::new(self);
        OperatorFunction::new(dim, f64::INFINITY, move |t| Ok(this.eval(t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chernoff::generator_fd;
    use crate::operator::expm_hermitian;

    fn pauli_pair() -> HamiltonianEnsemble {
        DiscreteEnsemble::new(vec![
            (HermitianOperator::sigma_x(), 0.5),
            (HermitianOperator::sigma_z(), 0.5),
        ])
        .unwrap()
        .into()
    }

    fn diag(a: f64, b: f64) -> HermitianOperator {
        HermitianOperator::from_real_rows(2, &[a, 0.0, 0.0, b]).unwrap()
    }

    #[test]
    fn construction_validates_probabilities() {
        let bad = DiscreteEnsemble::new(vec![
            (HermitianOperator::sigma_x(), 0.5),
            (HermitianOperator::sigma_z(), 0.4),
        ]);
        assert!(matches!(bad, Err(LabError::InvalidArgument(m)) if m.contains("sum to 1")));
        let neg = DiscreteEnsemble::new(vec![
            (HermitianOperator::sigma_x(), 1.5),
            (HermitianOperator::sigma_z(), -0.5),
        ]);
        assert!(neg.is_err());
        assert!(DiscreteEnsemble::new(vec![]).is_err());
        let mixed = DiscreteEnsemble::new(vec![
            (HermitianOperator::sigma_x(), 0.5),
            (HermitianOperator::identity(3), 0.5),
        ]);
        assert!(matches!(mixed, Err(LabError::DimensionMismatch { .. })));
    }

    #[test]
    fn point_mass_always_returns_atom() {
        let e: HamiltonianEnsemble =
            DiscreteEnsemble::point_mass(HermitianOperator::sigma_x()).into();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            assert_eq!(e.sample_hamiltonian(&mut rng), HermitianOperator::sigma_x());
        }
    }

    #[test]
    fn two_point_frequencies() {
        let e = pauli_pair();
        let mut rng = RngStream::new(2024, 0);
        let draws = 10_000;
        let hits = (0..draws)
            .filter(|_| e.sample_hamiltonian(&mut rng) == HermitianOperator::sigma_x())
            .count();
        let freq = hits as f64 / draws as f64;
        // binomial sd = 0.005; 0.02 is a 4 sd band
        assert!((freq - 0.5).abs() <= 0.02, "{freq}");
    }

    #[test]
    fn gaussian_samples_are_exactly_hermitian() {
        let e: HamiltonianEnsemble =
            GaussianHermitianEnsemble::new(HermitianOperator::zeros(2), 1.0)
                .unwrap()
                .into();
        let mut rng = RngStream::new(5, 0);
        for _ in 0..50 {
            let h = e.sample_hamiltonian(&mut rng);
            let m = h.matrix();
            assert_eq!(m.max_abs_diff(&m.adjoint()), 0.0);
        }
    }

    #[test]
    fn gaussian_rejects_bad_scale() {
        assert!(GaussianHermitianEnsemble::new(HermitianOperator::zeros(2), 0.0).is_err());
        assert!(GaussianHermitianEnsemble::new(HermitianOperator::zeros(2), f64::NAN).is_err());
    }

    #[test]
    fn discrete_mean_is_convex_combination() {
        let mut rng = RngStream::new(0, 0);
        let m = pauli_pair().mean_hamiltonian(0, &mut rng).unwrap();
        let want = ComplexMatrix::from_real_rows(2, &[0.5, 0.5, 0.5, -0.5]).unwrap();
        assert!(m.matrix().max_abs_diff(&want) < 1e-15);
        let point: HamiltonianEnsemble = DiscreteEnsemble::point_mass(diag(3.0, -1.0)).into();
        assert_eq!(point.mean_hamiltonian(0, &mut rng).unwrap(), diag(3.0, -1.0));
    }

    #[test]
    fn gaussian_mean_converges_to_center() {
        let e: HamiltonianEnsemble =
            GaussianHermitianEnsemble::new(HermitianOperator::sigma_z(), 0.5)
                .unwrap()
                .into();
        let mut rng = RngStream::new(77, 0);
        let m = e.mean_hamiltonian(10_000, &mut rng).unwrap();
        let bound = 3.0 * 0.5 / (10_000f64).sqrt();
        let dev = m.matrix().max_abs_diff(HermitianOperator::sigma_z().matrix());
        assert!(dev <= bound, "{dev} > {bound}");
    }

    #[test]
    fn gaussian_mean_needs_samples() {
        let e: HamiltonianEnsemble =
            GaussianHermitianEnsemble::new(HermitianOperator::sigma_z(), 0.5)
                .unwrap()
                .into();
        assert!(e.mean_hamiltonian(0, &mut RngStream::new(0, 0)).is_err());
        assert!(e.averaged_propagator(0, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn propagator_is_identity_at_zero() {
        let gauss: HamiltonianEnsemble =
            GaussianHermitianEnsemble::new(HermitianOperator::sigma_x(), 1.0)
                .unwrap()
                .into();
        for e in [pauli_pair(), gauss] {
            let f = e.averaged_propagator(64, &mut RngStream::new(3, 0)).unwrap();
            assert!(f.eval(0.0).unwrap().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn commuting_diagonal_closed_form() {
        let e: HamiltonianEnsemble =
            DiscreteEnsemble::new(vec![(diag(1.0, -1.0), 0.5), (diag(2.0, -2.0), 0.5)])
                .unwrap()
                .into();
        let f = e.averaged_propagator(0, &mut RngStream::new(0, 0)).unwrap();
        for t in [0.3, 1.0, 2.7] {
            let a = (Complex64::new(0.0, t).exp() + Complex64::new(0.0, 2.0 * t).exp()) * 0.5;
            let b = (Complex64::new(0.0, -t).exp() + Complex64::new(0.0, -2.0 * t).exp()) * 0.5;
            let want = ComplexMatrix::diagonal(&[a, b]);
            assert!(f.eval(t).unwrap().max_abs_diff(&want) < 1e-14);
        }
    }

    #[test]
    fn point_mass_propagator_is_the_group() {
        let h = HermitianOperator::sigma_y();
        let e: HamiltonianEnsemble = DiscreteEnsemble::point_mass(h.clone()).into();
        let f = e.averaged_propagator(0, &mut RngStream::new(0, 0)).unwrap();
        for (s, t) in [(0.2, 0.5), (1.0, 2.0)] {
            let lhs = f.eval(s).unwrap().matmul(&f.eval(t).unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&f.eval(s + t).unwrap()) < 1e-13);
            let want = expm_hermitian(&h, s).unwrap();
            assert!(f.eval(s).unwrap().max_abs_diff(want.matrix()) < 1e-13);
        }
    }

    #[test]
    fn discrete_propagator_ignores_budget_and_rng() {
        let e = pauli_pair();
        let a = e.averaged_propagator(0, &mut RngStream::new(1, 0)).unwrap();
        let b = e.averaged_propagator(999, &mut RngStream::new(42, 7)).unwrap();
        assert_eq!(a.eval(0.7).unwrap(), b.eval(0.7).unwrap());
    }

    #[test]
    fn gaussian_propagator_is_reproducible() {
        let e: HamiltonianEnsemble =
            GaussianHermitianEnsemble::new(HermitianOperator::sigma_x(), 0.3)
                .unwrap()
                .into();
        let a = e.averaged_propagator(128, &mut RngStream::new(9, 2)).unwrap();
        let b = e.averaged_propagator(128, &mut RngStream::new(9, 2)).unwrap();
        assert_eq!(a.eval(1.3).unwrap(), b.eval(1.3).unwrap());
    }

    #[test]
    fn generator_matches_mean_with_richardson_ratio() {
        let gauss: HamiltonianEnsemble =
            GaussianHermitianEnsemble::new(HermitianOperator::sigma_x(), 0.4)
                .unwrap()
                .into();
        for e in [pauli_pair(), gauss] {
            let f = e.averaged_propagator(256, &mut RngStream::new(4, 0)).unwrap();
            let hbar = e.mean_hamiltonian(256, &mut RngStream::new(4, 0)).unwrap();
            let want = hbar.matrix().scale(Complex64::new(0.0, 1.0)).unwrap();
            let e1 = generator_fd(&f, 1e-2).unwrap().max_abs_diff(&want);
            let e2 = generator_fd(&f, 5e-3).unwrap().max_abs_diff(&want);
            let ratio = e1 / e2;
            assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn averaged_propagator_is_a_contraction() {
        let e = pauli_pair();
        let f = e.averaged_propagator(0, &mut RngStream::new(0, 0)).unwrap();
        for k in 0..40 {
            let t = k as f64 * 0.37;
            assert!(f.eval(t).unwrap().operator_norm() <= 1.0 + 1e-10);
        }
    }
}
