//! The classical baker's map on the unit torus and its lift to the plane.
//!
//! All intervals are half-open, `[0, 1/2)` and `[1/2, 1)` in `x` (period 1),
//! `[0, 1)` and `[1, 2)` (period 2) for the even/odd strips. A point on a
//! boundary takes the branch whose half-open interval contains it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Distance from a branch boundary below which [`pullback_harmonic`] refuses
/// to pick a side.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// A point of the unit torus, `0 <= x < 1`, `0 <= p < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    x: f64,
    p: f64,
}

impl TorusPoint {
    pub fn new(x: f64, p: f64) -> Result<Self> {
        let ok = |v: f64| (0.0..1.0).contains(&v);
        if !ok(x) || !ok(p) {
            return Err(Error::InvalidParameter(format!(
                "torus point ({x}, {p}) outside [0,1)^2"
            )));
        }
        Ok(Self { x, p })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn to_plane(self) -> PlanePoint {
        PlanePoint {
            x: self.x,
            p: self.p,
        }
    }
}

/// A point of the universal cover R².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    x: f64,
    p: f64,
}

impl PlanePoint {
    pub fn new(x: f64, p: f64) -> Result<Self> {
        if !x.is_finite() || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "plane point ({x}, {p}) is not finite"
            )));
        }
        Ok(Self { x, p })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Fractional-part projection onto the torus.
    pub fn project(self) -> TorusPoint {
        TorusPoint {
            x: reduce(self.x, 1.0),
            p: reduce(self.p, 1.0),
        }
    }
}

/// Membership of a plane point in the eight strips of the covering map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionFlags {
    pub in_l: bool,
    pub in_r: bool,
    pub in_b: bool,
    pub in_t: bool,
    pub in_e_x: bool,
    pub in_o_x: bool,
    pub in_e_p: bool,
    pub in_o_p: bool,
}

/// `v mod period` in `[0, period)`.
///
/// `v - period * floor(v / period)` can round up to `period` itself for tiny
/// negative `v`; that case is pulled back to the largest value below
/// `period`, which keeps the point on the side it belongs to.
pub fn reduce(v: f64, period: f64) -> f64 {
    let r = v - period * (v / period).floor();
    if r >= period {
        f64::from_bits(period.to_bits() - 1)
    } else {
        r
    }
}

pub fn baker_map(pt: TorusPoint) -> TorusPoint {
    let TorusPoint { x, p } = pt;
    if x < 0.5 {
        TorusPoint { x: 2.0 * x, p: p / 2.0 }
    } else {
        TorusPoint {
            x: 2.0 * x - 1.0,
            p: p / 2.0 + 0.5,
        }
    }
}

/// Inverse of [`baker_map`]: the lower half `p < 1/2` came from the left
/// half, the upper half from the right.
pub fn baker_inverse(pt: TorusPoint) -> TorusPoint {
    let TorusPoint { x, p } = pt;
    if p < 0.5 {
        TorusPoint { x: x / 2.0, p: 2.0 * p }
    } else {
        TorusPoint {
            x: x / 2.0 + 0.5,
            p: 2.0 * p - 1.0,
        }
    }
}

pub fn region_membership(pt: PlanePoint) -> RegionFlags {
    let in_l = reduce(pt.x, 1.0) < 0.5;
    let in_b = reduce(pt.p, 1.0) < 0.5;
    let in_e_x = reduce(pt.x, 2.0) < 1.0;
    let in_e_p = reduce(pt.p, 2.0) < 1.0;
    RegionFlags {
        in_l,
        in_r: !in_l,
        in_b,
        in_t: !in_b,
        in_e_x,
        in_o_x: !in_e_x,
        in_e_p,
        in_o_p: !in_e_p,
    }
}

/// The lift of the baker's map to the plane.
pub fn cover_map(pt: PlanePoint) -> PlanePoint {
    let f = region_membership(pt);
    let PlanePoint { x, p } = pt;
    let (x, p) = match (f.in_l, f.in_e_p) {
        (true, true) => (2.0 * x, p / 2.0),
        (false, true) => (2.0 * x - 1.0, p / 2.0 + 0.5),
        (true, false) => (2.0 * x + 1.0, p / 2.0 + 0.5),
        (false, false) => (2.0 * x, p / 2.0),
    };
    PlanePoint { x, p }
}

pub fn cover_inverse(pt: PlanePoint) -> PlanePoint {
    let f = region_membership(pt);
    let PlanePoint { x, p } = pt;
    let (x, p) = match (f.in_e_x, f.in_b) {
        (true, true) => (x / 2.0, 2.0 * p),
        (false, true) => (x / 2.0 - 0.5, 2.0 * p - 1.0),
        (true, false) => (x / 2.0 + 0.5, 2.0 * p - 1.0),
        (false, false) => (x / 2.0, 2.0 * p),
    };
    PlanePoint { x, p }
}

/// Both sides of the pullback identity for the harmonic `e^{2πi(ax + bp)}`
/// under the covering map.
///
/// `lhs` evaluates the harmonic at `cover_map(pt)`; `rhs` is
/// `e^{4πiax} e^{iπbp} (χ_l + (-1)^b χ_r)(χ_{e_p} + (-1)^b χ_{o_p})`.
/// Points within [`BOUNDARY_TOLERANCE`] of an `l/r` edge (x a multiple of 1/2)
/// or an `e_p/o_p` edge (p an integer) are rejected.
pub fn pullback_harmonic(a: i64, b: i64, pt: PlanePoint) -> Result<(Complex64, Complex64)> {
    if on_branch_boundary(pt) {
        return Err(Error::BoundaryPoint { x: pt.x, p: pt.p });
    }
    let image = cover_map(pt);
    let lhs = Complex64::from_polar(1.0, 2.0 * PI * (a as f64 * image.x + b as f64 * image.p));

    let f = region_membership(pt);
    let sign_b = if b.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let chi_x = if f.in_l { 1.0 } else { sign_b };
    let chi_p = if f.in_e_p { 1.0 } else { sign_b };
    let rhs = Complex64::from_polar(
        chi_x * chi_p,
        4.0 * PI * a as f64 * pt.x + PI * b as f64 * pt.p,
    );
    Ok((lhs, rhs))
}

/// True within [`BOUNDARY_TOLERANCE`] of a line where the covering map
/// switches branch: `x ∈ Z/2` or `p ∈ Z`.
pub fn on_branch_boundary(pt: PlanePoint) -> bool {
    near_lattice(pt.x, 0.5) || near_lattice(pt.p, 1.0)
}

fn near_lattice(v: f64, spacing: f64) -> bool {
    let r = reduce(v, spacing);
    r < BOUNDARY_TOLERANCE || spacing - r < BOUNDARY_TOLERANCE
}

/// `steps + 1` points starting at `pt`, each the image of the previous one.
pub fn orbit(pt: TorusPoint, steps: usize) -> Vec<TorusPoint> {
    std::iter::successors(Some(pt), |&q| Some(baker_map(q)))
        .take(steps + 1)
        .collect()
}
