//! Random shifts acting on band-limited periodic functions.
//!
//! Functions live on a periodic grid of `N` points over `[0, L)` and are
//! identified with their trigonometric interpolants, so every shift is exact.
//! Convolution with a finitely supported jump law is a finite weighted sum of
//! shifts, which is diagonal in the Fourier basis with multiplier
//! `phi(k) = E[exp(-2 pi i k s zeta / L)]`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Allowed `|E zeta|`, relative to the largest jump magnitude.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

/// `N` complex samples at `x_j = j L / N`, `N` a power of two and at least 4.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGridFunction {
    period: f64,
    values: Vec<Complex64>,
}

impl PeriodicGridFunction {
    pub fn new(period: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(LabError::InvalidArgument(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let n = values.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(LabError::InvalidArgument(format!(
                "grid size must be a power of two >= 4, got {n}"
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::NonFinite { dim: n });
        }
        Ok(Self { period, values })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(period: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..n).map(|j| f(node(period, n, j))).collect();
        Self::new(period, values)
    }

    pub fn constant(period: f64, n: usize, c: Complex64) -> Result<Self> {
        Self::new(period, vec![c; n])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|j| node(self.period, self.len(), j))
    }

    /// Maximum modulus over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Grid sup-norm of `self - other`.
    pub fn sup_distance(&self, other: &PeriodicGridFunction) -> f64 {
        assert_eq!(self.len(), other.len(), "grid sizes differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Discrete Fourier coefficients `c_m = N^{-1} sum_j u_j e^{-2 pi i m j / N}`.
    pub fn fourier_coefficients(&self) -> Vec<Complex64> {
        let n = self.len();
        let mut buf = self.values.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// `x,re,im` rows, one per grid node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im\n");
        for (x, z) in self.nodes().zip(&self.values) {
            writeln!(out, "{x:e},{:e},{:e}", z.re, z.im).expect("writing to a String");
        }
        out
    }

    /// Applies the Fourier multiplier `mult(m)` to every mode `m`.
    fn apply_multiplier(&self, mult: impl Fn(i64) -> Complex64) -> Self {
        let n = self.len();
        let mut planner = FftPlanner::new();
        let mut buf = self.values.clone();
        planner.plan_fft_forward(n).process(&mut buf);
        for (j, z) in buf.iter_mut().enumerate() {
            *z *= mult(mode_index(n, j));
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        Self {
            period: self.period,
            values: buf,
        }
    }
}

fn node(period: f64, n: usize, j: usize) -> f64 {
    (j as f64 * period) / n as f64
}

/// Signed mode number of FFT bin `j`; the Nyquist bin maps to `+N/2`.
fn mode_index(n: usize, j: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// `exp(-2 pi i m s / L)` with the phase reduced modulo one turn.
fn shift_phase(m: i64, s: f64, period: f64) -> Complex64 {
    let turns = (m as f64 * (s / period)).rem_euclid(1.0);
    Complex64::from_polar(1.0, -2.0 * PI * turns)
}

/// Finitely supported, mean-zero law of a single jump `zeta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpDistribution {
    /// `+amplitude` or `-amplitude` with probability 1/2 each.
    Rademacher { amplitude: f64 },
    /// `a` with probability `p`, `b` with probability `1 - p`.
    TwoPoint { a: f64, b: f64, p: f64 },
    /// Uniform over the listed values.
    DiscreteUniform { values: Vec<f64> },
}

impl JumpDistribution {
    /// `(value, probability)` pairs with positive probability.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Rademacher { amplitude } => vec![(*amplitude, 0.5), (-*amplitude, 0.5)],
            Self::TwoPoint { a, b, p } => [(*a, *p), (*b, 1.0 - *p)]
                .into_iter()
                .filter(|(_, w)| *w > 0.0)
                .collect(),
            Self::DiscreteUniform { values } => {
                let w = 1.0 / values.len() as f64;
                values.iter().map(|&v| (v, w)).collect()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.atoms().iter().map(|(v, w)| v * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.atoms().iter().map(|(v, w)| w * (v - mean).powi(2)).sum()
    }

    /// Requires finite values, a valid law, mean zero and positive variance.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::InvalidArgument(msg));
        match self {
            Self::TwoPoint { p, .. } if !(0.0..=1.0).contains(p) => {
                return bad(format!("two-point probability {p} is outside [0, 1]"));
            }
            Self::DiscreteUniform { values } if values.is_empty() => {
                return bad("uniform jump law needs at least one value".into());
            }
            _ => {}
        }
        let atoms = self.atoms();
        if atoms.iter().any(|(v, _)| !v.is_finite()) {
            return bad("jump values must be finite".into());
        }
        let scale = atoms.iter().map(|(v, _)| v.abs()).fold(0.0, f64::max);
        let mean = self.mean();
        if mean.abs() > MEAN_ZERO_TOL * scale.max(f64::MIN_POSITIVE) {
            return bad(format!("jump law must have mean zero, got {mean}"));
        }
        if !(self.variance() > 0.0) {
            return bad("jump law must have positive variance".into());
        }
        Ok(())
    }
}

/// The shift process `xi(t) = sqrt(t) zeta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftProcessSpec {
    jump: JumpDistribution,
}

impl ShiftProcessSpec {
    pub fn new(jump: JumpDistribution) -> Result<Self> {
        jump.validate()?;
        Ok(Self { jump })
    }

    pub fn jump(&self) -> &JumpDistribution {
        &self.jump
    }

    pub fn variance(&self) -> f64 {
        self.jump.variance()
    }

    /// `E[exp(-2 pi i m sqrt(t) zeta / L)]`; exactly 1 for `m = 0`.
    fn characteristic(&self, t: f64, period: f64) -> impl Fn(i64) -> Complex64 + '_ {
        let s = t.sqrt();
        let atoms = self.jump.atoms();
        move |m| {
            if m == 0 {
                return Complex64::new(1.0, 0.0);
            }
            atoms
                .iter()
                .map(|&(v, w)| shift_phase(m, s * v, period) * w)
                .sum()
        }
    }
}

/// `u(x - s)` for the trigonometric interpolant of `u`; `s` is taken modulo `L`.
pub fn fourier_shift(u: &PeriodicGridFunction, s: f64) -> PeriodicGridFunction {
    let period = u.period();
    let s = s.rem_euclid(period);
    if s == 0.0 {
        return u.clone();
    }
    u.apply_multiplier(|m| shift_phase(m, s, period))
}

/// `F(t) u = E[u(x - sqrt(t) zeta)]`.
pub fn convolution_apply(
    u: &PeriodicGridFunction,
    spec: &ShiftProcessSpec,
    t: f64,
) -> Result<PeriodicGridFunction> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(u.clone());
    }
    let phi = spec.characteristic(t, u.period());
    Ok(u.apply_multiplier(phi))
}

/// `(F(t/n))^n u`, the law of `u(x - eta_n(t))` with
/// `eta_n(t) = xi_n(t/n) + ... + xi_1(t/n)`, as the multiplier `phi(m)^n`.
pub fn clt_compose(
    u: &PeriodicGridFunction,
    spec: &ShiftProcessSpec,
    t: f64,
    n: u32,
) -> Result<PeriodicGridFunction> {
    check_time(t)?;
    if n == 0 {
        return Err(LabError::InvalidArgument("n must be >= 1".into()));
    }
    let phi = spec.characteristic(t / n as f64, u.period());
    Ok(u.apply_multiplier(|m| phi(m).powu(n)))
}

/// Heat semigroup `exp(t (variance / 2) d^2/dx^2)` as the multiplier
/// `exp(-variance (2 pi m / L)^2 t / 2)`.
pub fn heat_apply(u: &PeriodicGridFunction, t: f64, variance: f64) -> Result<PeriodicGridFunction> {
    check_time(t)?;
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(LabError::InvalidArgument(format!(
            "variance must be positive, got {variance}"
        )));
    }
    let period = u.period();
    Ok(u.apply_multiplier(|m| {
        let k = 2.0 * PI * m as f64 / period;
        Complex64::new((-variance * k * k * t / 2.0).exp(), 0.0)
    }))
}

/// Grid sup-norm distance between `(F(t/n))^n u` and the heat semigroup
/// applied to `u`, for each `n` of a strictly increasing schedule.
pub fn clt_error(
    u: &PeriodicGridFunction,
    spec: &ShiftProcessSpec,
    t: f64,
    n_schedule: &[u32],
) -> Result<Vec<(u32, f64)>> {
    if n_schedule.is_empty() {
        return Err(LabError::InvalidArgument("n schedule is empty".into()));
    }
    if n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::InvalidArgument(
            "n schedule must be strictly increasing".into(),
        ));
    }
    let limit = heat_apply(u, t, spec.variance())?;
    n_schedule
        .iter()
        .map(|&n| Ok((n, clt_compose(u, spec, t, n)?.sup_distance(&limit))))
        .collect()
}

pub fn clt_csv(rows: &[(u32, f64)]) -> String {
    let mut out = String::from("n,error\n");
    for (n, e) in rows {
        writeln!(out, "{n},{e:e}").expect("writing to a String");
    }
    out
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(LabError::InvalidArgument(format!(
            "time must be nonnegative and finite, got {t}"
        )));
    }
    Ok(())
}
