//! Linear quantization of polynomial symbols in a truncated oscillator basis.
//!
//! A monomial `q^a p^b` is mapped to an ordered operator polynomial in the
//! truncated position and momentum matrices:
//!
//! * Weyl (full symmetrization): `2^{-a} sum_k C(a,k) Q^k P^b Q^{a-k}`
//! * Born–Jordan (equal weights): `(a+1)^{-1} sum_k Q^k P^b Q^{a-k}`
//!
//! Both orderings collapse to `Q^a` or `P^b` when one of the powers is zero.
//! The truncated matrices only satisfy `[Q, P] = i hbar` away from the
//! bottom-right corner, so entries near the truncation edge are artifacts.

mod symbol;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::{check_probabilities, DiscreteEnsemble};
use crate::error::{LabError, Result};
use crate::operator::{ComplexMatrix, HermitianOperator};

pub use symbol::{Monomial, PolynomialSymbol, SymbolError, MAX_DEGREE};

/// Number-state truncation `{|0>, ..., |N-1>}` with Planck constant `hbar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorBasis {
    dim: usize,
    hbar: f64,
}

impl OscillatorBasis {
    pub fn new(dim: usize, hbar: f64) -> Result<Self> {
        if dim < 2 {
            return Err(LabError::InvalidArgument(format!(
                "oscillator basis needs N >= 2, got {dim}"
            )));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(LabError::InvalidArgument(format!(
                "hbar must be positive and finite, got {hbar}"
            )));
        }
        Ok(Self { dim, hbar })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizationRule {
    Weyl,
    BornJordan,
}

impl fmt::Display for QuantizationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Weyl => "weyl",
            Self::BornJordan => "born_jordan",
        })
    }
}

fn lowering(basis: &OscillatorBasis) -> DMatrix<Complex64> {
    let n = basis.dim;
    let mut a = DMatrix::zeros(n, n);
    for j in 1..n {
        a[(j - 1, j)] = Complex64::new((j as f64).sqrt(), 0.0);
    }
    a
}

/// `Q = sqrt(hbar/2) (A + A^H)` and `P = i sqrt(hbar/2) (A^H - A)`.
pub fn position_momentum(basis: &OscillatorBasis) -> (HermitianOperator, HermitianOperator) {
    let (q, p) = raw_position_momentum(basis);
    let wrap = |m| {
        HermitianOperator::new(ComplexMatrix::new(m).expect("finite ladder entries"))
            .expect("ladder combinations are exactly Hermitian")
    };
    (wrap(q), wrap(p))
}

fn raw_position_momentum(basis: &OscillatorBasis) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let a = lowering(basis);
    let ad = a.adjoint();
    let c = (basis.hbar / 2.0).sqrt();
    let q = (&a + &ad) * Complex64::new(c, 0.0);
    let p = (&ad - &a) * Complex64::new(0.0, c);
    (q, p)
}

fn powers(m: &DMatrix<Complex64>, max: u32) -> Vec<DMatrix<Complex64>> {
    let n = m.nrows();
    let mut out = vec![DMatrix::identity(n, n)];
    for k in 1..=max as usize {
        out.push(&out[k - 1] * m);
    }
    out
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Operator assigned to the symbol by the chosen ordering rule.
pub fn quantize(
    h: &PolynomialSymbol,
    rule: QuantizationRule,
    basis: &OscillatorBasis,
) -> Result<HermitianOperator> {
    let n = basis.dim;
    let (q, p) = raw_position_momentum(basis);
    let max_q = h.terms().iter().map(|m| m.q_power).max().unwrap_or(0);
    let max_p = h.terms().iter().map(|m| m.p_power).max().unwrap_or(0);
    let q_pow = powers(&q, max_q);
    let p_pow = powers(&p, max_p);

    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for m in h.terms() {
        let (a, b) = (m.q_power, m.p_power);
        let mut ordered = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..=a {
            let weight = match rule {
                QuantizationRule::Weyl => binomial(a, k) / 2f64.powi(a as i32),
                QuantizationRule::BornJordan => 1.0 / (a + 1) as f64,
            };
            let word = &q_pow[k as usize] * &p_pow[b as usize] * &q_pow[(a - k) as usize];
            ordered += word * Complex64::new(weight, 0.0);
        }
        acc += ordered * Complex64::new(m.coeff, 0.0);
    }
    let matrix = ComplexMatrix::new(acc)?;
    HermitianOperator::new(matrix).map_err(|e| {
        LabError::Internal(format!("{rule} quantization of '{h}' is not Hermitian: {e}"))
    })
}

/// Random linear quantization: the ensemble whose atoms are the
/// quantizations of one symbol under each rule, weighted by the rule law.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationEnsemble {
    symbol: PolynomialSymbol,
    rules: Vec<(QuantizationRule, f64)>,
    basis: OscillatorBasis,
    atoms: DiscreteEnsemble,
}

impl QuantizationEnsemble {
    pub fn symbol(&self) -> &PolynomialSymbol {
        &self.symbol
    }

    pub fn rules(&self) -> &[(QuantizationRule, f64)] {
        &self.rules
    }

    pub fn basis(&self) -> &OscillatorBasis {
        &self.basis
    }

    /// Atom `k` is the quantization under `rules()[k]`.
    pub fn atoms(&self) -> &DiscreteEnsemble {
        &self.atoms
    }
}

pub fn quantization_ensemble(
    h: &PolynomialSymbol,
    rules: &[(QuantizationRule, f64)],
    basis: &OscillatorBasis,
) -> Result<QuantizationEnsemble> {
    if rules.is_empty() {
        return Err(LabError::InvalidArgument(
            "quantization ensemble needs at least one rule".into(),
        ));
    }
    check_probabilities(rules.iter().map(|(_, p)| *p))?;
    let atoms = rules
        .iter()
        .map(|&(rule, p)| Ok((quantize(h, rule, basis)?, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantizationEnsemble {
        symbol: h.clone(),
        rules: rules.to_vec(),
        basis: *basis,
        atoms: DiscreteEnsemble::new(atoms)?,
    })
}
