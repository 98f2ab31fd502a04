//! Coherent states, their images in the finite sector, and the
//! weak-classical-limit experiment.
//!
//! All packets use `ħ = 1/(2πN)` once tied to a sector. `U = e^{2πi x̂}` and
//! `(Vψ)(x) = ψ(x + 2πħ)`, matching the sector conventions where `V` moves a
//! comb by `-1/N`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::classical::{baker_map, on_branch_boundary, PlanePoint};
use crate::error::{Error, Result};
use crate::fast::FastPropagator;
use crate::matrix::ComplexMatrix;
use crate::propagator::PropagatorVariant;
use crate::sector::build_ex_ox;
use crate::torus::{apply_harmonic, norm, HilbertConfig, StateVector, UnitaryDft};

/// Gaussian terms below this relative size are dropped from comb sums.
pub const TRUNCATION_TOLERANCE: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    pub x0: f64,
    pub p0: f64,
    pub hbar: f64,
}

impl CoherentParams {
    pub fn new(x0: f64, p0: f64, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if !(x0.is_finite() && p0.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite centre ({x0}, {p0})")));
        }
        Ok(Self { x0, p0, hbar })
    }

    pub fn for_sector(x0: f64, p0: f64, cfg: &HilbertConfig) -> Result<Self> {
        Self::new(x0, p0, cfg.hbar())
    }

    /// Half-width beyond which `|φ|` is below [`TRUNCATION_TOLERANCE`].
    pub fn support_radius(&self) -> f64 {
        10.0 * self.hbar.sqrt() * (1.0f64).max((1.0 / TRUNCATION_TOLERANCE).ln().sqrt())
    }
}

pub fn coherent_wavefunction(x: f64, params: &CoherentParams) -> Complex64 {
    let CoherentParams { x0, p0, hbar } = *params;
    let amp = (PI * hbar).powf(-0.25) * (-(x - x0).powi(2) / (2.0 * hbar)).exp();
    Complex64::from_polar(amp, p0 * x / hbar - p0 * x0 / (2.0 * hbar))
}

/// Normalized `c_j = Σ_k φ(j·spacing + k·period)` for `j = 0..len`.
pub fn lattice_packet(
    params: &CoherentParams,
    spacing: f64,
    period: f64,
    len: usize,
) -> Result<Vec<Complex64>> {
    let radius = params.support_radius();
    let mut coeffs: Vec<Complex64> = (0..len)
        .map(|j| {
            let base = j as f64 * spacing;
            let k_lo = ((params.x0 - radius - base) / period).ceil() as i64;
            let k_hi = ((params.x0 + radius - base) / period).floor() as i64;
            (k_lo..=k_hi)
                .map(|k| coherent_wavefunction(base + k as f64 * period, params))
                .sum()
        })
        .collect();
    let nrm = norm(&coeffs);
    if !(nrm > 0.0 && nrm.is_finite()) {
        return Err(Error::Normalization(nrm));
    }
    coeffs.iter_mut().for_each(|z| *z /= nrm);
    Ok(coeffs)
}

/// Pairs the packet with the combs of the `(0,0)` sector.
pub fn project_to_sector(params: &CoherentParams, cfg: &HilbertConfig) -> Result<StateVector> {
    let expected = cfg.hbar();
    if ((params.hbar - expected) / expected).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "hbar {} does not match 1/(2πN) = {expected} for N = {}",
            params.hbar,
            cfg.n()
        )));
    }
    let n = cfg.n();
    let coeffs = lattice_packet(params, 1.0 / n as f64, 1.0, n)?;
    StateVector::new(
        coeffs,
        crate::torus::Basis::Position,
        crate::torus::Sector::Theta00,
    )
}

/// `⟨φ|U^a V^b|φ⟩` on the line:
/// `e^{2πi(a x0 + b p0)} e^{-π²ħ(a² + b²)} e^{-2π²iabħ}`.
pub fn harmonic_expectation_closed_form(a: i64, b: i64, params: &CoherentParams) -> Complex64 {
    let (a, b) = (a as f64, b as f64);
    let h = params.hbar;
    let decay = (-PI * PI * h * (a * a + b * b)).exp();
    let phase = 2.0 * PI * (a * params.x0 + b * params.p0) - 2.0 * PI * PI * a * b * h;
    Complex64::from_polar(decay, phase)
}

/// Composite Simpson rule on `[lo, hi]` with an even number of intervals.
pub fn simpson<F>(f: F, lo: f64, hi: f64, intervals: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let n = intervals + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(lo + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// `⟨φ|U^a V^b|φ⟩` by direct quadrature of `φ̄(x) e^{2πiax} φ(x + 2πħb)`.
pub fn harmonic_expectation_quadrature(a: i64, b: i64, params: &CoherentParams) -> Complex64 {
    let shift = 2.0 * PI * params.hbar * b as f64;
    let half = params.support_radius() + shift.abs();
    simpson(
        |x| {
            coherent_wavefunction(x, params).conj()
                * Complex64::from_polar(1.0, 2.0 * PI * a as f64 * x)
                * coherent_wavefunction(x + shift, params)
        },
        params.x0 - half,
        params.x0 + half,
        20_000,
    )
}

/// `‖P v‖²`.
pub fn projector_mass(state: &StateVector, projector: &ComplexMatrix) -> Result<f64> {
    let image = projector.mul_vec(&state.coeffs)?;
    Ok(norm(&image).powi(2))
}

/// `e^{-ε²/ħ}/2`, claimed only for `ε/√ħ > 1`.
pub fn gaussian_tail_bound(epsilon: f64, hbar: f64) -> Result<f64> {
    if !(hbar > 0.0) || !(epsilon / hbar.sqrt() > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail bound needs eps/sqrt(hbar) > 1, got eps={epsilon}, hbar={hbar}"
        )));
    }
    Ok((-epsilon * epsilon / hbar).exp() / 2.0)
}

/// Mass of a sector state at periodic distance more than `epsilon` from `x0`.
pub fn tail_mass(state: &StateVector, x0: f64, epsilon: f64) -> f64 {
    let n = state.dim() as f64;
    state
        .coeffs
        .iter()
        .enumerate()
        .filter(|(m, _)| {
            let d = (*m as f64 / n - x0).rem_euclid(1.0);
            d.min(1.0 - d) > epsilon
        })
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

/// `⟨v|U^a V^b|v⟩` on the sector.
pub fn sector_expectation(a: i64, b: i64, v: &[Complex64]) -> Complex64 {
    let image = apply_harmonic(a, b, v);
    v.iter().zip(&image).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub n: usize,
    pub quantum: Complex64,
    pub classical: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub a: i64,
    pub b: i64,
    pub x0: f64,
    pub p0: f64,
    pub rows: Vec<LimitRow>,
}

impl LimitReport {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

/// Compares `⟨Fc|U^aV^b|Fc⟩` with `⟨c'|U^aV^b|c'⟩`, where `c` is the packet at
/// `(x0, p0)` and `c'` the packet at its classical image, for each `N`.
pub fn weak_limit_experiment(
    a: i64,
    b: i64,
    x0: f64,
    p0: f64,
    n_list: &[usize],
    variant: PropagatorVariant,
) -> Result<LimitReport> {
    let plane = PlanePoint::new(x0, p0)?;
    if on_branch_boundary(plane) {
        return Err(Error::BoundaryPoint { x: x0, p: p0 });
    }
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("empty N list".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("N list must be strictly ascending".into()));
    }
    let start = plane.project();
    let image = baker_map(start);
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let cfg = HilbertConfig::new(n)?;
            let packet = project_to_sector(&CoherentParams::for_sector(start.x(), start.p(), &cfg)?, &cfg)?;
            let evolved = FastPropagator::new(&cfg, variant).apply(&packet.coeffs)?;
            let quantum = sector_expectation(a, b, &evolved);
            let target = project_to_sector(&CoherentParams::for_sector(image.x(), image.p(), &cfg)?, &cfg)?;
            let classical = sector_expectation(a, b, &target.coeffs);
            Ok(LimitRow {
                n,
                quantum,
                classical,
                error: (quantum - classical).norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitReport { a, b, x0, p0, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationRow {
    pub operator: &'static str,
    pub region: &'static str,
    pub measured_mass: f64,
    pub expected_limit: f64,
}

/// Coordinate held fixed while the other one selects the region.
const NEUTRAL: f64 = 0.4;

fn sector_mask_mass(v: &[Complex64], keep: impl Fn(usize) -> bool) -> f64 {
    v.iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

fn momentum_mass(v: &[Complex64], keep: impl Fn(usize) -> bool) -> f64 {
    let mut d = v.to_vec();
    UnitaryDft::new(d.len()).forward(&mut d);
    sector_mask_mass(&d, keep)
}

/// Packet on the period-2 lattice `x = j/N`, re-expressed in the doubled
/// sector basis `(Φ^{(0,0)}, Φ^{(0,1/2)})`.
fn doubled_sector_packet(params: &CoherentParams, n: usize) -> Result<Vec<Complex64>> {
    let lattice = lattice_packet(params, 1.0 / n as f64, 2.0, 2 * n)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * n];
    for m in 0..n {
        let (lo, hi) = (lattice[m], lattice[m + n]);
        out[m] = (lo + hi) * s;
        out[n + m] = (lo - hi) * Complex64::from_polar(s, -PI * m as f64 / n as f64);
    }
    Ok(out)
}

/// Sixteen rows `(operator, region, ‖O φ‖², limit)`.
///
/// `L, R, B, T` act on sector packets. `E_x, O_x` act on the doubled sector
/// space through the oracle's operators, with packets centred at
/// `x0 = 0.5` and `1.5` on the period-2 lattice. `E_p, O_p` act on a
/// lattice of spacing `1/(2N)` whose momenta `q/N` span the period `[0, 2)`,
/// with packets centred at `p0 = 0.5` and `1.5`.
pub fn localization_table(cfg: &HilbertConfig) -> Result<Vec<LocalizationRow>> {
    let n = cfg.n();
    let half = n / 2;
    let sector = |x0, p0| -> Result<Vec<Complex64>> {
        Ok(project_to_sector(&CoherentParams::for_sector(x0, p0, cfg)?, cfg)?.coeffs)
    };

    // (first-half mass, second-half mass) for the packet in each region.
    let (ex, ox) = build_ex_ox(cfg);
    let mut x_split = Vec::new();
    for x0 in [0.5, 1.5] {
        let v = doubled_sector_packet(&CoherentParams::for_sector(x0, NEUTRAL, cfg)?, n)?;
        x_split.push((
            norm(&ex.matrix.mul_vec(&v)?).powi(2),
            norm(&ox.matrix.mul_vec(&v)?).powi(2),
        ));
    }
    let mut p_split = Vec::new();
    for p0 in [0.5, 1.5] {
        let params = CoherentParams::for_sector(NEUTRAL, p0, cfg)?;
        let v = lattice_packet(&params, 1.0 / (2 * n) as f64, 1.0, 2 * n)?;
        p_split.push((momentum_mass(&v, |q| q < n), momentum_mass(&v, |q| q >= n)));
    }
    let mut lr_split = Vec::new();
    for x0 in [0.3, 0.7] {
        let v = sector(x0, NEUTRAL)?;
        lr_split.push((sector_mask_mass(&v, |m| m < half), sector_mask_mass(&v, |m| m >= half)));
    }
    let mut bt_split = Vec::new();
    for p0 in [0.3, 0.7] {
        let v = sector(NEUTRAL, p0)?;
        bt_split.push((momentum_mass(&v, |a| a < half), momentum_mass(&v, |a| a >= half)));
    }

    let families = [
        (("E_x", "O_x"), ("e_x", "o_x"), x_split),
        (("E_p", "O_p"), ("e_p", "o_p"), p_split),
        (("L", "R"), ("l", "r"), lr_split),
        (("B", "T"), ("b", "t"), bt_split),
    ];
    let mut rows = Vec::with_capacity(16);
    for ((first, second), regions, split) in families {
        let regions = [regions.0, regions.1];
        for (op_index, operator) in [first, second].into_iter().enumerate() {
            for (region_index, region) in regions.into_iter().enumerate() {
                let (lo, hi) = split[region_index];
                rows.push(LocalizationRow {
                    operator,
                    region,
                    measured_mass: if op_index == 0 { lo } else { hi },
                    expected_limit: if op_index == region_index { 1.0 } else { 0.0 },
                });
            }
        }
    }
    Ok(rows)
}

/// `g(r) = (sin r / r) e^{-ħr² + ir}`, with `g(0) = 1`.
pub fn kernel_profile(r: f64, hbar: f64) -> Complex64 {
    let sinc = if r == 0.0 { 1.0 } else { r.sin() / r };
    Complex64::from_polar(sinc * (-hbar * r * r).exp(), r)
}

/// `K(x, y) = g((x - y)/2ħ) / (2πħ)`.
pub fn diffraction_kernel(x: f64, y: f64, hbar: f64) -> Complex64 {
    kernel_profile((x - y) / (2.0 * hbar), hbar) / (2.0 * PI * hbar)
}

/// Range in `r` outside which `e^{-ħr²}` is below `e^{-40}`.
fn kernel_r_cutoff(hbar: f64) -> f64 {
    (40.0 / hbar).sqrt()
}

/// `∫ K(0, y) dy` by quadrature in `r = (x - y)/2ħ`.
pub fn kernel_integral(hbar: f64) -> Complex64 {
    let cut = kernel_r_cutoff(hbar);
    let intervals = ((2.0 * cut / 0.01).ceil() as usize).max(2_000);
    simpson(|r| kernel_profile(r, hbar), -cut, cut, intervals) / PI
}

/// `∫ |K(0, y)| |y| dy`.
pub fn kernel_first_moment(hbar: f64) -> f64 {
    let cut = kernel_r_cutoff(hbar);
    let intervals = ((cut / 0.01).ceil() as usize).max(2_000);
    // Even integrand; |y| = 2ħ|r| and dy = 2ħ dr.
    let half = simpson(
        |r| Complex64::new(kernel_profile(r, hbar).norm() * r, 0.0),
        0.0,
        cut,
        intervals,
    );
    2.0 * half.re * 4.0 * hbar * hbar / (2.0 * PI * hbar)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitPoint {
    pub x0: f64,
    pub p0: f64,
    pub overlap: f64,
}

/// `|⟨c(x0, p0)|ψ⟩|²` on the grid `x0 = i/G`, `p0 = j/G`, rows ordered by
/// `x0` then `p0`.
pub fn phase_portrait(state: &StateVector, grid: usize) -> Result<Vec<PortraitPoint>> {
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must be positive".into()));
    }
    let cfg = HilbertConfig::new(state.dim())?;
    (0..grid * grid)
        .into_par_iter()
        .map(|idx| {
            let (x0, p0) = ((idx / grid) as f64 / grid as f64, (idx % grid) as f64 / grid as f64);
            let packet = project_to_sector(&CoherentParams::for_sector(x0, p0, &cfg)?, &cfg)?;
            let overlap: Complex64 = packet
                .coeffs
                .iter()
                .zip(&state.coeffs)
                .map(|(c, s)| c.conj() * s)
                .sum();
            Ok(PortraitPoint {
                x0,
                p0,
                overlap: overlap.norm_sqr(),
            })
        })
        .collect()
}
