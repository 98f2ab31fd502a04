//! `O(N log N)` application of either propagator.
//!
//! `bv ψ = F_N⁻¹ (F_{N/2} ψ_lo ‖ F_{N/2} ψ_hi)`. For the parity-corrected
//! matrix the odd-row phase factors as `r_n c_m` with
//! `r_n = e^{iπn/N}` and `c_m = e^{-2πim/N}` on the left half,
//! `c_m = -e^{-2πim/N}` on the right half. Odd outputs are therefore
//! `r_n (bv (c ⊙ ψ))_n` and even outputs are `(bv ψ)_n`.
//!
//! Splitting `F_N⁻¹` by output parity and using `c_{m+N/2} = c_m`, with
//! `t_j = e^{2πij/N}` and `F = F_{N/2}`:
//!
//! * `(bv ψ)_{2k} = (F⁻¹ F (ψ_lo + ψ_hi))_k / √2`
//! * `(bv ψ)_{2k+1} = (F⁻¹ (t ⊙ F (ψ_lo - ψ_hi)))_k / √2`
//!
//! and the corrected odd outputs replace `ψ_lo - ψ_hi` by
//! `c_lo ⊙ (ψ_lo - ψ_hi)`. Every transform has length `N/2`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::propagator::PropagatorVariant;
use crate::torus::{roots_of_unity, Basis, HilbertConfig, StateVector};

/// Pre-planned transforms and phase tables for repeated application.
#[derive(Clone)]
pub struct FastPropagator {
    n: usize,
    variant: PropagatorVariant,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
    scale: f64,
    /// `e^{-2πij/N}` for `j < N/2`, which is `c_j` and `conj(t_j)`.
    half_roots: Vec<Complex64>,
    /// `r_{2k+1}` for `k < N/2`.
    odd_row_phase: Vec<Complex64>,
}

impl FastPropagator {
    pub fn new(cfg: &HilbertConfig, variant: PropagatorVariant) -> Self {
        let n = cfg.n();
        let half = cfg.half();
        let mut half_roots = roots_of_unity(n);
        half_roots.truncate(half);
        let odd_row_phase = (0..half)
            .map(|k| Complex64::from_polar(1.0, PI * (2 * k + 1) as f64 / n as f64))
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(half);
        let inverse = planner.plan_fft_inverse(half);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            variant,
            forward,
            inverse,
            scratch_len,
            scale: 1.0 / ((half * n) as f64).sqrt(),
            half_roots,
            odd_row_phase,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> PropagatorVariant {
        self.variant
    }

    /// Column factor `c_m` of the odd-row phase.
    pub fn column_phase(&self, m: usize) -> Complex64 {
        self.half_roots[m % (self.n / 2)]
    }

    /// Row factor `r_n` of the odd-row phase.
    pub fn row_phase(&self, n: usize) -> Complex64 {
        Complex64::from_polar(1.0, PI * n as f64 / self.n as f64)
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = v.to_vec();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, v: &mut [Complex64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        let half = self.n / 2;
        let corrected = self.variant == PropagatorVariant::ParityCorrected;
        let mut scratch = vec![Complex64::default(); self.scratch_len];
        let mut buf = vec![Complex64::default(); self.n];
        let (sum, diff) = buf.split_at_mut(half);
        let (lo, hi) = v.split_at(half);
        for j in 0..half {
            sum[j] = lo[j] + hi[j];
            diff[j] = lo[j] - hi[j];
            if corrected {
                diff[j] *= self.half_roots[j];
            }
        }
        self.forward.process_with_scratch(&mut buf, &mut scratch);
        for (z, w) in buf[half..].iter_mut().zip(&self.half_roots) {
            *z *= w.conj();
        }
        self.inverse.process_with_scratch(&mut buf, &mut scratch);
        for k in 0..half {
            v[2 * k] = buf[k] * self.scale;
            v[2 * k + 1] = buf[half + k] * self.scale;
            if corrected {
                v[2 * k + 1] *= self.odd_row_phase[k];
            }
        }
        Ok(())
    }
}

/// One application of the chosen propagator to a position-basis state.
pub fn apply_fast(
    state: &StateVector,
    variant: PropagatorVariant,
    cfg: &HilbertConfig,
) -> Result<StateVector> {
    if state.basis != Basis::Position {
        return Err(Error::WrongBasis {
            expected: Basis::Position.name(),
            found: state.basis.name(),
        });
    }
    let coeffs = FastPropagator::new(cfg, variant).apply(&state.coeffs)?;
    StateVector::new(coeffs, Basis::Position, state.sector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{phase_correction, ClosedFormPropagator, PropagatorMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let nrm = crate::torus::norm(&v);
        v.into_iter().map(|z| z / nrm).collect()
    }

    const VARIANTS: [PropagatorVariant; 2] =
        [PropagatorVariant::BalazsVoros, PropagatorVariant::ParityCorrected];

    #[test]
    fn phase_factorization_matches_phase_correction() {
        for n in [2, 4, 6, 10, 32, 100] {
            let cfg = HilbertConfig::new(n).unwrap();
            let fp = FastPropagator::new(&cfg, PropagatorVariant::ParityCorrected);
            for row in (1..n).step_by(2) {
                for col in 0..n {
                    let want = phase_correction(row, col, &cfg).unwrap();
                    let got = fp.row_phase(row) * fp.column_phase(col);
                    assert!((got - want).norm() < 1e-14, "n={n} ({row},{col})");
                }
            }
        }
    }

    #[test]
    fn n2_basis_vector() {
        let cfg = HilbertConfig::new(2).unwrap();
        let e0 = StateVector::basis_vector(2, 0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let out = apply_fast(&e0, PropagatorVariant::BalazsVoros, &cfg).unwrap();
        assert!((out.coeffs[0] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!((out.coeffs[1] - Complex64::new(s, 0.0)).norm() < 1e-15);
        let out = apply_fast(&e0, PropagatorVariant::ParityCorrected, &cfg).unwrap();
        assert!((out.coeffs[1] - Complex64::new(0.0, s)).norm() < 1e-15);
    }

    #[test]
    fn matches_dense_matrix() {
        for n in [2, 4, 8, 12, 18, 64, 130] {
            let cfg = HilbertConfig::new(n).unwrap();
            let v = random_state(n, n as u64);
            for variant in VARIANTS {
                let dense = PropagatorMatrix::build(&cfg, variant).matrix.mul_vec(&v).unwrap();
                let fast = FastPropagator::new(&cfg, variant).apply(&v).unwrap();
                let diff = dense
                    .iter()
                    .zip(&fast)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-12, "n={n} {variant}: {diff}");
            }
        }
    }

    #[test]
    fn matches_closed_form_at_1024() {
        let cfg = HilbertConfig::new(1024).unwrap();
        let v = random_state(1024, 7);
        for variant in VARIANTS {
            let dense = ClosedFormPropagator::new(&cfg, variant).apply(&v).unwrap();
            let fast = FastPropagator::new(&cfg, variant).apply(&v).unwrap();
            let diff = dense
                .iter()
                .zip(&fast)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-9, "{variant}: {diff}");
        }
    }

    #[test]
    fn preserves_norm() {
        let cfg = HilbertConfig::new(256).unwrap();
        for variant in VARIANTS {
            let fp = FastPropagator::new(&cfg, variant);
            let mut v = random_state(256, 3);
            for _ in 0..100 {
                fp.apply_in_place(&mut v).unwrap();
            }
            assert!((crate::torus::norm(&v) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = HilbertConfig::new(4).unwrap();
        let fp = FastPropagator::new(&cfg, PropagatorVariant::BalazsVoros);
        assert!(matches!(
            fp.apply(&[Complex64::new(1.0, 0.0); 3]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
        let mom = StateVector::new(vec![Complex64::new(1.0, 0.0); 4], Basis::Momentum, crate::torus::Sector::Theta00)
            .unwrap();
        assert!(matches!(
            apply_fast(&mom, PropagatorVariant::BalazsVoros, &cfg),
            Err(Error::WrongBasis { .. })
        ));
    }
}
