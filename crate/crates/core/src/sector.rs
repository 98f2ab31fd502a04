//! Reconstruction of the propagator from the factorization
//! `F = (E_x + X^{-1/2} O_x)(B + Y^{-1} T) S` on the doubled space
//! `H(0,0) ⊕ H(0,1/2)`.
//!
//! Basis order: `Φ_0^{(0,0)} .. Φ_{N-1}^{(0,0)}` then
//! `Φ_0^{(0,1/2)} .. Φ_{N-1}^{(0,1/2)}`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::propagator::corrected_matrix;
use crate::torus::{dft_matrix, half_mask, HalfKind, HilbertConfig};

/// Leakage allowed by [`oracle_matrix`].
pub const LEAKAGE_TOLERANCE: f64 = 1e-12;
/// Entry tolerance of [`verify_oracle`].
pub const ORACLE_TOLERANCE: f64 = 1e-10;
/// Header token recording the doubled basis order in matrix files.
pub const DOUBLED_BASIS_ORDER: &str = "theta_00,theta_0half";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorOperatorName {
    Ex,
    Ox,
    BHalf,
    THalf,
    XNegHalf,
    YInv,
    SStretch,
}

impl fmt::Display for SectorOperatorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SectorOperatorName::Ex => "E_x",
            SectorOperatorName::Ox => "O_x",
            SectorOperatorName::BHalf => "B_half",
            SectorOperatorName::THalf => "T_half",
            SectorOperatorName::XNegHalf => "X_neg_half",
            SectorOperatorName::YInv => "Y_inv",
            SectorOperatorName::SStretch => "S_stretch",
        })
    }
}

/// A `2N × 2N` operator on the doubled space.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub name: SectorOperatorName,
    pub matrix: ComplexMatrix,
}

/// Coefficients over both sector bases.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledVector {
    pub c00: Vec<Complex64>,
    pub c0h: Vec<Complex64>,
}

impl DoubledVector {
    /// `Φ_m^{(0,0)}`.
    pub fn basis_00(n: usize, m: usize) -> Self {
        let mut c00 = vec![Complex64::new(0.0, 0.0); n];
        c00[m] = Complex64::new(1.0, 0.0);
        Self {
            c00,
            c0h: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_concat(v: &[Complex64]) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::OddDimension(v.len()));
        }
        let (a, b) = v.split_at(v.len() / 2);
        Ok(Self {
            c00: a.to_vec(),
            c0h: b.to_vec(),
        })
    }

    pub fn concat(&self) -> Vec<Complex64> {
        self.c00.iter().chain(&self.c0h).copied().collect()
    }

    pub fn norm(&self) -> f64 {
        crate::torus::norm(&self.concat())
    }
}

pub fn build_ex_ox(cfg: &HilbertConfig) -> (SectorOperator, SectorOperator) {
    let n = cfg.n();
    let mut ex = ComplexMatrix::zeros(2 * n);
    for m in 0..n {
        let theta = PI * m as f64 / n as f64;
        ex[(m, m)] = Complex64::new(0.5, 0.0);
        ex[(n + m, n + m)] = Complex64::new(0.5, 0.0);
        ex[(n + m, m)] = Complex64::from_polar(0.5, -theta);
        ex[(m, n + m)] = Complex64::from_polar(0.5, theta);
    }
    let ox = &ComplexMatrix::identity(2 * n) - &ex;
    (
        SectorOperator {
            name: SectorOperatorName::Ex,
            matrix: ex,
        },
        SectorOperator {
            name: SectorOperatorName::Ox,
            matrix: ox,
        },
    )
}

pub fn build_b_t(cfg: &HilbertConfig) -> (SectorOperator, SectorOperator) {
    let n = cfg.n();
    let f = dft_matrix(n).expect("n > 0");
    let mask = ComplexMatrix::diagonal(&half_mask(HalfKind::MomentumLow, n));
    let block = &(&f.adjoint() * &mask) * &f;
    let b = ComplexMatrix::block_diag(&block, &block);
    let t = &ComplexMatrix::identity(2 * n) - &b;
    (
        SectorOperator {
            name: SectorOperatorName::BHalf,
            matrix: b,
        },
        SectorOperator {
            name: SectorOperatorName::THalf,
            matrix: t,
        },
    )
}

/// `X^{-1/2} = e^{-iπN x̂}` is `(-1)^m` on `Φ_m` in both sectors.
pub fn build_x_neg_half(cfg: &HilbertConfig) -> SectorOperator {
    let n = cfg.n();
    let diag: Vec<Complex64> = (0..2 * n)
        .map(|i| Complex64::new(if (i % n).is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0))
        .collect();
    SectorOperator {
        name: SectorOperatorName::XNegHalf,
        matrix: ComplexMatrix::diagonal(&diag),
    }
}

/// `Y^{-1}` is `e^{-2πiθ_2}`: `+1` on `(0,0)`, `-1` on `(0,1/2)`.
pub fn build_y_inv(cfg: &HilbertConfig) -> SectorOperator {
    let n = cfg.n();
    let diag: Vec<Complex64> = (0..2 * n)
        .map(|i| Complex64::new(if i < n { 1.0 } else { -1.0 }, 0.0))
        .collect();
    SectorOperator {
        name: SectorOperatorName::YInv,
        matrix: ComplexMatrix::diagonal(&diag),
    }
}

/// `S Φ_m^{(0,0)} = (Φ_r^{(0,0)} + e^{-2πim/N} Φ_r^{(0,1/2)}) / √2` with
/// `r = 2m mod N`. Columns of the `(0,1/2)` sector are zero.
pub fn build_s(cfg: &HilbertConfig) -> SectorOperator {
    let n = cfg.n();
    let mut s = ComplexMatrix::zeros(2 * n);
    for m in 0..n {
        let r = (2 * m) % n;
        s[(r, m)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        s[(n + r, m)] = Complex64::from_polar(FRAC_1_SQRT_2, -2.0 * PI * m as f64 / n as f64);
    }
    SectorOperator {
        name: SectorOperatorName::SStretch,
        matrix: s,
    }
}

/// `S` on a doubled vector; the input must lie in the `(0,0)` sector.
pub fn apply_s(cfg: &HilbertConfig, v: &DoubledVector) -> Result<DoubledVector> {
    let n = cfg.n();
    if v.c00.len() != n || v.c0h.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.c00.len().max(v.c0h.len()),
        });
    }
    let outside = crate::torus::norm(&v.c0h);
    if outside > 0.0 {
        return Err(Error::OutsideSector(outside));
    }
    let out = build_s(cfg).matrix.mul_vec(&v.concat())?;
    DoubledVector::from_concat(&out)
}

/// All seven factors; fields are public so callers can substitute one.
#[derive(Debug, Clone)]
pub struct SectorFactors {
    pub ex: SectorOperator,
    pub ox: SectorOperator,
    pub b_half: SectorOperator,
    pub t_half: SectorOperator,
    pub x_neg_half: SectorOperator,
    pub y_inv: SectorOperator,
    pub s: SectorOperator,
}

impl SectorFactors {
    pub fn build(cfg: &HilbertConfig) -> Self {
        let (ex, ox) = build_ex_ox(cfg);
        let (b_half, t_half) = build_b_t(cfg);
        Self {
            ex,
            ox,
            b_half,
            t_half,
            x_neg_half: build_x_neg_half(cfg),
            y_inv: build_y_inv(cfg),
            s: build_s(cfg),
        }
    }

    /// `E_x + X^{-1/2} O_x`.
    pub fn position_factor(&self) -> ComplexMatrix {
        &self.ex.matrix + &(&self.x_neg_half.matrix * &self.ox.matrix)
    }

    /// `B + Y^{-1} T`.
    pub fn momentum_factor(&self) -> ComplexMatrix {
        &self.b_half.matrix + &(&self.y_inv.matrix * &self.t_half.matrix)
    }

    pub fn assemble(&self) -> ComplexMatrix {
        &(&self.position_factor() * &self.momentum_factor()) * &self.s.matrix
    }
}

pub fn assemble_f(cfg: &HilbertConfig) -> ComplexMatrix {
    SectorFactors::build(cfg).assemble()
}

/// Largest `(0,1/2)` component norm over the images of `Φ_m^{(0,0)}`.
pub fn leakage(f: &ComplexMatrix) -> f64 {
    let n = f.dim() / 2;
    (0..n)
        .map(|m| {
            (n..2 * n)
                .map(|row| f[(row, m)].norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

pub fn fixed_point_check(cfg: &HilbertConfig) -> f64 {
    leakage(&assemble_f(cfg))
}

/// The `(0,0) → (0,0)` block of the assembled operator.
pub fn oracle_matrix(cfg: &HilbertConfig) -> Result<ComplexMatrix> {
    let f = assemble_f(cfg);
    let leak = leakage(&f);
    if !(leak < LEAKAGE_TOLERANCE) {
        return Err(Error::SectorLeak(leak));
    }
    Ok(f.block(0, 0, cfg.n()))
}

/// Largest entry difference between the oracle and the closed-form
/// corrected matrix; errors with the first entry beyond tolerance.
pub fn verify_oracle(cfg: &HilbertConfig) -> Result<f64> {
    let oracle = oracle_matrix(cfg)?;
    let closed = corrected_matrix(cfg).matrix;
    let n = cfg.n();
    let mut worst: f64 = 0.0;
    for row in 0..n {
        for col in 0..n {
            let diff = (oracle[(row, col)] - closed[(row, col)]).norm();
            if !(diff <= ORACLE_TOLERANCE) {
                return Err(Error::OracleMismatch {
                    row,
                    col,
                    oracle: oracle[(row, col)],
                    closed: closed[(row, col)],
                    diff,
                });
            }
            worst = worst.max(diff);
        }
    }
    Ok(worst)
}
