//! The N-dimensional space of periodic δ-combs at θ = (0,0).
//!
//! Conventions, fixed once and used everywhere:
//!
//! * DFT: `F[m][n] = e^{-2πimn/N} / √N`. Position coefficients `c` and
//!   momentum coefficients `d` are related by `d = F c`.
//! * `U = e^{2πi x̂}` is diagonal, `U e_m = e^{2πim/N} e_m`.
//! * `V = e^{2πi p̂}` translates a comb by `-1/N`: `V e_m = e_{m-1}`. In the
//!   momentum basis it is `diag(e^{+2πin/N})`.
//! * With these, `U V U⁻¹ V⁻¹ = ω I` where `ω = e^{-2πi/N}`
//!   ([`WEYL_PHASE_SIGN`] = -1).
//! * Parity sends `e_m` to `e_{(N-m) mod N}` in both bases, with no phases.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Sign `s` of the Weyl phase `ω = e^{2πi s / N}` under the conventions above.
pub const WEYL_PHASE_SIGN: i32 = -1;

/// Dimension of the sector space, stored as `N`; `ħ = 1/(2πN)` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertConfig {
    n: usize,
}

impl HilbertConfig {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if !n.is_multiple_of(2) {
            return Err(Error::OddDimension(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half(&self) -> usize {
        self.n / 2
    }

    pub fn hbar(&self) -> f64 {
        1.0 / (2.0 * PI * self.n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Position,
    Momentum,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::Position => "position",
            Basis::Momentum => "momentum",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which θ-sector the comb basis belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// θ = (0, 0), periodic combs.
    Theta00,
    /// θ = (0, 1/2), combs with alternating sign `(-1)^k`.
    Theta0Half,
}

impl Sector {
    pub fn name(self) -> &'static str {
        match self {
            Sector::Theta00 => "theta_00",
            Sector::Theta0Half => "theta_0half",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Coefficients over the comb basis of one sector. Indices are taken mod N.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub coeffs: Vec<Complex64>,
    pub basis: Basis,
    pub sector: Sector,
}

impl StateVector {
    pub fn new(coeffs: Vec<Complex64>, basis: Basis, sector: Sector) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            coeffs,
            basis,
            sector,
        })
    }

    /// Position-basis vector `e_index` in the θ = (0,0) sector.
    pub fn basis_vector(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                n: index,
                m: 0,
                dim,
            });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        coeffs[index] = Complex64::new(1.0, 0.0);
        Self::new(coeffs, Basis::Position, Sector::Theta00)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coeffs)
    }

    /// Coefficient at `index mod N`.
    pub fn at(&self, index: i64) -> Complex64 {
        self.coeffs[index.rem_euclid(self.dim() as i64) as usize]
    }

    pub fn normalized(mut self) -> Result<Self> {
        let nrm = self.norm();
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::Normalization(nrm));
        }
        for c in &mut self.coeffs {
            *c /= nrm;
        }
        Ok(self)
    }
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `e^{-2πik/N}` for `k = 0..N`, each evaluated from its own reduced angle.
pub(crate) fn roots_of_unity(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect()
}

pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let roots = roots_of_unity(n);
    let scale = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, |m, k| roots[(m * k) % n] * scale))
}

/// Unitary FFT of length N in the `F` convention, and its inverse.
#[derive(Clone)]
pub struct UnitaryDft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl UnitaryDft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// In place `v <- F v`.
    pub fn forward(&self, v: &mut [Complex64]) {
        self.forward.process(v);
        v.iter_mut().for_each(|z| *z *= self.scale);
    }

    /// In place `v <- F⁻¹ v`.
    pub fn inverse(&self, v: &mut [Complex64]) {
        self.inverse.process(v);
        v.iter_mut().for_each(|z| *z *= self.scale);
    }
}

pub fn to_momentum(state: &StateVector) -> Result<StateVector> {
    if state.basis != Basis::Position {
        return Err(Error::WrongBasis {
            expected: Basis::Position.name(),
            found: state.basis.name(),
        });
    }
    let mut coeffs = state.coeffs.clone();
    UnitaryDft::new(coeffs.len()).forward(&mut coeffs);
    StateVector::new(coeffs, Basis::Momentum, state.sector)
}

pub fn to_position(state: &StateVector) -> Result<StateVector> {
    if state.basis != Basis::Momentum {
        return Err(Error::WrongBasis {
            expected: Basis::Momentum.name(),
            found: state.basis.name(),
        });
    }
    let mut coeffs = state.coeffs.clone();
    UnitaryDft::new(coeffs.len()).inverse(&mut coeffs);
    StateVector::new(coeffs, Basis::Position, state.sector)
}

pub fn observable_u(cfg: &HilbertConfig) -> ComplexMatrix {
    harmonic_operator(1, 0, cfg)
}

pub fn observable_v(cfg: &HilbertConfig) -> ComplexMatrix {
    harmonic_operator(0, 1, cfg)
}

/// `U^a V^b` on the sector. Only `(a mod N, b mod N)` matters since
/// `U^N = V^N = I` there.
pub fn harmonic_operator(a: i64, b: i64, cfg: &HilbertConfig) -> ComplexMatrix {
    let n = cfg.n();
    let (a, b) = (a.rem_euclid(n as i64) as usize, b.rem_euclid(n as i64) as usize);
    let roots = roots_of_unity(n);
    let mut m = ComplexMatrix::zeros(n);
    // V^b e_k = e_{k-b}; then U^a multiplies row j by e^{2πiaj/N}.
    for k in 0..n {
        let j = (k + n - b) % n;
        m[(j, k)] = roots[(n - (a * j) % n) % n];
    }
    m
}

/// `U^a V^b v` without building the matrix.
pub fn apply_harmonic(a: i64, b: i64, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let (a, b) = (a.rem_euclid(n as i64) as usize, b.rem_euclid(n as i64) as usize);
    let roots = roots_of_unity(n);
    (0..n)
        .map(|j| roots[(n - (a * j) % n) % n] * v[(j + b) % n])
        .collect()
}

/// Weyl commutator phase `ω` read off `U V U⁻¹ V⁻¹`.
pub fn weyl_phase(cfg: &HilbertConfig) -> Complex64 {
    let u = observable_u(cfg);
    let v = observable_v(cfg);
    let comm = &(&(&u * &v) * &u.adjoint()) * &v.adjoint();
    comm[(0, 0)]
}

pub fn parity_matrix(cfg: &HilbertConfig) -> ComplexMatrix {
    let n = cfg.n();
    let mut p = ComplexMatrix::zeros(n);
    for m in 0..n {
        p[((n - m) % n, m)] = Complex64::new(1.0, 0.0);
    }
    p
}

pub fn apply_parity(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n).map(|j| v[(n - j) % n]).collect()
}

/// Finite images of the half-line projectors L, R (position) and B, T
/// (momentum).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfKind {
    PositionLow,
    PositionHigh,
    MomentumLow,
    MomentumHigh,
}

impl HalfKind {
    pub fn complement(self) -> Self {
        match self {
            HalfKind::PositionLow => HalfKind::PositionHigh,
            HalfKind::PositionHigh => HalfKind::PositionLow,
            HalfKind::MomentumLow => HalfKind::MomentumHigh,
            HalfKind::MomentumHigh => HalfKind::MomentumLow,
        }
    }
}

pub fn half_mask(kind: HalfKind, n: usize) -> Vec<Complex64> {
    let low = matches!(kind, HalfKind::PositionLow | HalfKind::MomentumLow);
    (0..n)
        .map(|i| {
            let in_low = i < n / 2;
            Complex64::new(if in_low == low { 1.0 } else { 0.0 }, 0.0)
        })
        .collect()
}

pub fn half_projector(kind: HalfKind, cfg: &HilbertConfig) -> ComplexMatrix {
    let n = cfg.n();
    let mask = ComplexMatrix::diagonal(&half_mask(kind, n));
    match kind {
        HalfKind::PositionLow | HalfKind::PositionHigh => mask,
        HalfKind::MomentumLow | HalfKind::MomentumHigh => {
            let f = dft_matrix(n).expect("n > 0");
            &(&f.adjoint() * &mask) * &f
        }
    }
}
