//! The quantum baker's map propagator on the θ = (0,0) sector.
//!
//! The Balazs-Voros matrix is `F_N⁻¹ · blockdiag(F_{N/2}, F_{N/2})`. The
//! parity-corrected matrix multiplies each odd row `n` by the phase
//! `e^{iπ(n - 2m)/N}` (left block, `m < N/2`) or `e^{iπ(n - (2m - N))/N}`
//! (right block). The phase depends only on `(n, m)`, so it is applied as an
//! entry-wise mask on the Balazs-Voros product.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::torus::{dft_matrix, HilbertConfig};

/// Defect above which [`eigenphases`] refuses its input.
pub const EIGEN_UNITARITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorVariant {
    BalazsVoros,
    ParityCorrected,
}

impl PropagatorVariant {
    /// Short name used on the command line and in file headers.
    pub fn tag(self) -> &'static str {
        match self {
            PropagatorVariant::BalazsVoros => "bv",
            PropagatorVariant::ParityCorrected => "parity",
        }
    }
}

impl fmt::Display for PropagatorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PropagatorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bv" | "balazs_voros" => Ok(PropagatorVariant::BalazsVoros),
            "parity" | "parity_corrected" => Ok(PropagatorVariant::ParityCorrected),
            other => Err(Error::InvalidParameter(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropagatorMatrix {
    pub cfg: HilbertConfig,
    pub variant: PropagatorVariant,
    pub matrix: ComplexMatrix,
}

impl PropagatorMatrix {
    pub fn build(cfg: &HilbertConfig, variant: PropagatorVariant) -> Self {
        match variant {
            PropagatorVariant::BalazsVoros => bv_matrix(cfg),
            PropagatorVariant::ParityCorrected => corrected_matrix(cfg),
        }
    }

    pub fn unitary_defect(&self) -> f64 {
        self.matrix.unitary_defect()
    }
}

pub fn bv_matrix(cfg: &HilbertConfig) -> PropagatorMatrix {
    let n = cfg.n();
    let f_inv = dft_matrix(n).expect("n > 0").adjoint();
    let f_half = dft_matrix(cfg.half()).expect("n/2 > 0");
    let matrix = f_inv
        .mul_block_diag(&f_half)
        .expect("N/2 divides N");
    PropagatorMatrix {
        cfg: *cfg,
        variant: PropagatorVariant::BalazsVoros,
        matrix,
    }
}

/// Signed offset of `n` from the classical image of column `m`:
/// `n - 2m` for `m < N/2` and `n - (2m - N)` otherwise. Lies in `(-N, N)`.
pub fn trajectory_offset(n: usize, m: usize, half: usize) -> i64 {
    let image = if m < half { 2 * m } else { 2 * m - 2 * half };
    n as i64 - image as i64
}

pub fn phase_correction(n: usize, m: usize, cfg: &HilbertConfig) -> Result<Complex64> {
    let dim = cfg.n();
    if n >= dim || m >= dim {
        return Err(Error::IndexOutOfRange { n, m, dim });
    }
    if n.is_multiple_of(2) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(odd_row_phase(trajectory_offset(n, m, cfg.half()), dim))
}

/// `e^{iπ d / N}`.
pub(crate) fn odd_row_phase(offset: i64, dim: usize) -> Complex64 {
    Complex64::from_polar(1.0, PI * offset as f64 / dim as f64)
}

pub fn corrected_matrix(cfg: &HilbertConfig) -> PropagatorMatrix {
    let n = cfg.n();
    let half = cfg.half();
    let mut matrix = bv_matrix(cfg).matrix;
    // Even rows are left untouched so they stay bit-identical to BV.
    for row in (1..n).step_by(2) {
        for (m, z) in matrix.row_mut(row).iter_mut().enumerate() {
            *z *= odd_row_phase(trajectory_offset(row, m, half), n);
        }
    }
    PropagatorMatrix {
        cfg: *cfg,
        variant: PropagatorVariant::ParityCorrected,
        matrix,
    }
}

/// Closed-form entries of either propagator, evaluated without forming any
/// matrix product.
///
/// Summing the geometric series in the product gives
/// `bv[n][m] = (√2/N) σ G((n - 2m) mod N)` with `σ = (-1)^n` on the right
/// block and `G(k) = Σ_{a<N/2} e^{2πiak/N}`, which is `N/2` for `k ≡ 0`, zero
/// for other even `k`, and `2 / (1 - e^{2πik/N})` for odd `k`.
#[derive(Debug, Clone)]
pub struct ClosedFormPropagator {
    n: usize,
    variant: PropagatorVariant,
    geometric: Vec<Complex64>,
    // e^{iπd/N} for d in (-N, N), indexed by d + N.
    phases: Vec<Complex64>,
}

impl ClosedFormPropagator {
    pub fn new(cfg: &HilbertConfig, variant: PropagatorVariant) -> Self {
        let n = cfg.n();
        let geometric = (0..n)
            .map(|k| {
                if k == 0 {
                    Complex64::new(n as f64 / 2.0, 0.0)
                } else if k % 2 == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
                    Complex64::new(2.0, 0.0) / (Complex64::new(1.0, 0.0) - w)
                }
            })
            .collect();
        let phases = (0..2 * n)
            .map(|i| odd_row_phase(i as i64 - n as i64, n))
            .collect();
        Self {
            n,
            variant,
            geometric,
            phases,
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let n = self.n;
        let half = n / 2;
        let k = (row + 2 * n - (2 * col) % n) % n;
        let sign = if col >= half && row % 2 == 1 { -1.0 } else { 1.0 };
        let mut z = self.geometric[k] * (sign * std::f64::consts::SQRT_2 / n as f64);
        if self.variant == PropagatorVariant::ParityCorrected && row % 2 == 1 {
            let d = trajectory_offset(row, col, half);
            z *= self.phases[(d + n as i64) as usize];
        }
        z
    }

    /// Dense `O(N²)` application, row by row.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        use rayon::prelude::*;
        Ok((0..self.n)
            .into_par_iter()
            .map(|row| (0..self.n).map(|col| self.entry(row, col) * v[col]).sum())
            .collect())
    }
}

/// Eigenphases in `[0, 2π)`, ascending.
pub fn eigenphases(matrix: &ComplexMatrix) -> Result<Vec<f64>> {
    let defect = matrix.unitary_defect();
    if !(defect < EIGEN_UNITARITY_TOLERANCE) {
        return Err(Error::NotUnitary(defect));
    }
    let n = matrix.dim();
    let m = DMatrix::from_row_slice(n, n, matrix.as_slice());
    let eigenvalues = Schur::new(m)
        .eigenvalues()
        .ok_or_else(|| Error::InvalidParameter("Schur form did not converge".into()))?;
    let mut phases = Vec::with_capacity(n);
    for z in eigenvalues.iter() {
        if (z.norm() - 1.0).abs() > EIGEN_UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary((z.norm() - 1.0).abs()));
        }
        let mut phi = z.arg();
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        phases.push(phi);
    }
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::commutator_defect;
    use crate::torus::parity_matrix;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(n: usize) -> HilbertConfig {
        HilbertConfig::new(n).unwrap()
    }

    fn mat2(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, vec![a, b, cc, d]).unwrap()
    }

    #[test]
    fn bv_at_n2() {
        let want = mat2(c(S, 0.0), c(S, 0.0), c(S, 0.0), c(-S, 0.0));
        assert!(bv_matrix(&cfg(2)).matrix.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn bv_matches_brute_force_product() {
        let n = 4;
        let f_inv = dft_matrix(n).unwrap().adjoint();
        let f2 = dft_matrix(2).unwrap();
        let blk = ComplexMatrix::block_diag(&f2, &f2);
        let brute = ComplexMatrix::from_fn(n, |i, j| (0..n).map(|k| f_inv[(i, k)] * blk[(k, j)]).sum());
        let bv = bv_matrix(&cfg(n)).matrix;
        for j in 0..n {
            assert!((bv[(0, j)] - brute[(0, j)]).norm() < 1e-15);
        }
        assert!(bv.max_abs_diff(&brute).unwrap() < 1e-15);
    }

    #[test]
    fn bv_unitary() {
        for n in [2, 4, 6, 10, 64] {
            assert!(bv_matrix(&cfg(n)).unitary_defect() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn phase_correction_examples() {
        let c8 = cfg(8);
        for n in (0..8).step_by(2) {
            for m in 0..8 {
                assert_eq!(phase_correction(n, m, &c8).unwrap(), c(1.0, 0.0));
            }
        }
        let p = phase_correction(1, 0, &cfg(2)).unwrap();
        assert!((p - c(0.0, 1.0)).norm() < 1e-15);
        let p = phase_correction(3, 3, &cfg(4)).unwrap();
        assert!((p - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        assert!(matches!(
            phase_correction(4, 0, &cfg(4)),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn phase_has_unit_modulus() {
        let c = cfg(30);
        for n in 0..30 {
            for m in 0..30 {
                assert!((phase_correction(n, m, &c).unwrap().norm() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn corrected_at_n2() {
        let want = mat2(c(S, 0.0), c(S, 0.0), c(0.0, S), c(0.0, -S));
        assert!(corrected_matrix(&cfg(2)).matrix.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn corrected_even_rows_are_bv_rows() {
        for n in [2, 8, 14, 32] {
            let bv = bv_matrix(&cfg(n)).matrix;
            let cm = corrected_matrix(&cfg(n)).matrix;
            for row in (0..n).step_by(2) {
                assert_eq!(bv.row(row), cm.row(row));
            }
        }
    }

    #[test]
    fn corrected_is_unitary_and_commutes_with_parity() {
        for n in [2, 4, 8, 12, 40, 128] {
            let c = cfg(n);
            let cm = corrected_matrix(&c);
            assert!(cm.unitary_defect() < 1e-10, "n={n}");
            let p = parity_matrix(&c);
            assert!(commutator_defect(&p, &cm.matrix).unwrap() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn bv_breaks_parity() {
        let d = commutator_defect(&parity_matrix(&cfg(4)), &bv_matrix(&cfg(4)).matrix).unwrap();
        assert!(d > 0.1, "defect {d}");
        for n in [6, 10, 64] {
            let c = cfg(n);
            assert!(commutator_defect(&parity_matrix(&c), &bv_matrix(&c).matrix).unwrap() > 1e-3);
        }
    }

    #[test]
    fn correction_is_small_near_classical_trajectories() {
        for n in [4, 8, 16, 64, 128] {
            let c = cfg(n);
            let bv = bv_matrix(&c).matrix;
            let cm = corrected_matrix(&c).matrix;
            let bound = 2.0 * (PI / (2.0 * n as f64)).sin() * bv.max_abs();
            let mut worst: f64 = 0.0;
            for row in 0..n {
                for col in 0..n {
                    if trajectory_offset(row, col, n / 2).abs() <= 1 {
                        worst = worst.max((cm[(row, col)] - bv[(row, col)]).norm());
                    }
                }
            }
            assert!(worst <= bound + 1e-15, "n={n}: {worst} > {bound}");
        }
    }

    #[test]
    fn phase_vanishes_on_classical_trajectories() {
        for n in [2, 6, 16, 100] {
            let hc = cfg(n);
            for m in 0..n {
                let row = (2 * m) % n;
                assert_eq!(phase_correction(row, m, &hc).unwrap(), c(1.0, 0.0));
                // The odd-row formula itself has zero exponent there.
                assert_eq!(odd_row_phase(trajectory_offset(row, m, n / 2), n), c(1.0, 0.0));
            }
        }
    }

    #[test]
    fn closed_form_entries_match_products() {
        for n in [2, 4, 6, 16, 50] {
            let c = cfg(n);
            for variant in [PropagatorVariant::BalazsVoros, PropagatorVariant::ParityCorrected] {
                let dense = PropagatorMatrix::build(&c, variant).matrix;
                let cf = ClosedFormPropagator::new(&c, variant);
                let closed = ComplexMatrix::from_fn(n, |i, j| cf.entry(i, j));
                assert!(dense.max_abs_diff(&closed).unwrap() < 1e-13, "n={n} {variant}");
            }
        }
    }

    #[test]
    fn eigenphases_simple_cases() {
        let id = eigenphases(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(id, vec![0.0; 3]);
        let d = eigenphases(&ComplexMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 1.0)])).unwrap();
        assert!(d[0].abs() < 1e-12 && (d[1] - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn eigenphases_match_characteristic_polynomial_at_n2() {
        // λ² - tr λ + det = 0 for the corrected 2×2 matrix.
        let m = corrected_matrix(&cfg(2)).matrix;
        let tr = m.trace();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let disc = (tr * tr - det * 4.0).sqrt();
        let mut want: Vec<f64> = [(tr + disc) / 2.0, (tr - disc) / 2.0]
            .iter()
            .map(|z| {
                assert!((z.norm() - 1.0).abs() < 1e-12);
                z.arg().rem_euclid(2.0 * PI)
            })
            .collect();
        want.sort_by(f64::total_cmp);
        let got = eigenphases(&m).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn eigenphases_reject_non_unitary() {
        let m = ComplexMatrix::identity(2).scale(c(1.5, 0.0));
        assert!(matches!(eigenphases(&m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn eigenphases_of_propagator_are_sorted_and_in_range() {
        let ph = eigenphases(&corrected_matrix(&cfg(32)).matrix).unwrap();
        assert_eq!(ph.len(), 32);
        assert!(ph.windows(2).all(|w| w[0] <= w[1]));
        assert!(ph.iter().all(|&p| (0.0..2.0 * PI).contains(&p)));
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("bv".parse::<PropagatorVariant>().unwrap(), PropagatorVariant::BalazsVoros);
        assert_eq!(
            "parity".parse::<PropagatorVariant>().unwrap(),
            PropagatorVariant::ParityCorrected
        );
        assert!("saraceno".parse::<PropagatorVariant>().is_err());
    }
}
