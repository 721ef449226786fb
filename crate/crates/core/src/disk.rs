//! Geometry of the unit disk: Möbius involutions, hyperbolic distance,
//! boundary arcs and Carleson boxes.
//!
//! Arc lengths are normalized so that the whole circle has length 1. An arc
//! of normalized length `h` therefore spans `2πh` radians, and the Carleson
//! box over it reaches radial depth `h`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// A point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    pub re: f64,
    pub im: f64,
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Result<Self> {
        let p = DiskPoint { re, im };
        if !(re.is_finite() && im.is_finite()) || p.norm_sqr() >= 1.0 {
            return Err(Error::invalid(format!("({re}, {im}) is not an interior point of the unit disk")));
        }
        Ok(p)
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::from_complex(Complex64::from_polar(r, theta))
    }

    pub fn z(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.z()
    }
}

/// A point of the unit circle, normalized to unit modulus on construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    re: f64,
    im: f64,
}

impl BoundaryPoint {
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        BoundaryPoint { re: c, im: s }
    }

    /// Projects a nonzero complex number radially onto the circle.
    pub fn from_complex(z: Complex64) -> Result<Self> {
        let n = z.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("boundary point needs a nonzero direction"));
        }
        Ok(BoundaryPoint { re: z.re / n, im: z.im / n })
    }

    pub fn z(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn angle(self) -> f64 {
        self.im.atan2(self.re)
    }
}

/// A point of the closed disk: either interior or on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedDiskPoint {
    Interior(DiskPoint),
    Boundary(BoundaryPoint),
}

impl ClosedDiskPoint {
    pub fn z(self) -> Complex64 {
        match self {
            ClosedDiskPoint::Interior(p) => p.z(),
            ClosedDiskPoint::Boundary(b) => b.z(),
        }
    }

    pub fn is_interior(self) -> bool {
        matches!(self, ClosedDiskPoint::Interior(_))
    }

    /// Classifies `z` as interior when `|z| < 1 - slack`, otherwise projects it
    /// onto the circle.
    pub fn classify(z: Complex64, slack: f64) -> Result<Self> {
        if z.norm() < 1.0 - slack {
            Ok(ClosedDiskPoint::Interior(DiskPoint::from_complex(z)?))
        } else {
            Ok(ClosedDiskPoint::Boundary(BoundaryPoint::from_complex(z)?))
        }
    }
}

/// Open arc of the unit circle with normalized length in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcInterval {
    pub center_angle: f64,
    pub length: f64,
}

impl ArcInterval {
    pub fn new(center_angle: f64, length: f64) -> Result<Self> {
        if !(length > 0.0 && length <= 1.0) || !center_angle.is_finite() {
            return Err(Error::invalid(format!("arc length {length} outside (0, 1] or bad center {center_angle}")));
        }
        Ok(ArcInterval {
            center_angle: wrap_angle(center_angle),
            length,
        })
    }

    pub fn full_circle() -> Self {
        ArcInterval {
            center_angle: 0.0,
            length: 1.0,
        }
    }

    pub fn is_full(&self) -> bool {
        self.length >= 1.0
    }

    /// Angular half-width in radians.
    pub fn half_angle(&self) -> f64 {
        PI * self.length
    }

    /// Angular range `[start, end]` in radians with `end - start = 2π·length`.
    pub fn angle_range(&self) -> (f64, f64) {
        let hw = self.half_angle();
        (self.center_angle - hw, self.center_angle + hw)
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        if self.is_full() {
            return true;
        }
        wrap_angle(theta - self.center_angle).abs() < self.half_angle()
    }

    /// Whether `self` is contained in `other` (as sets of angles).
    pub fn is_subarc_of(&self, other: &ArcInterval) -> bool {
        if other.is_full() {
            return true;
        }
        if self.is_full() {
            return false;
        }
        let d = wrap_angle(self.center_angle - other.center_angle).abs();
        d + self.half_angle() <= other.half_angle() + 1e-15
    }
}

/// Carleson box `S(I) = {z ≠ 0 : 1 - |z| < |I|, z/|z| ∈ I}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonBox {
    pub arc: ArcInterval,
}

impl CarlesonBox {
    pub fn new(arc: ArcInterval) -> Self {
        CarlesonBox { arc }
    }

    pub fn full_disk() -> Self {
        CarlesonBox {
            arc: ArcInterval::full_circle(),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        if r == 0.0 || r >= 1.0 {
            return false;
        }
        1.0 - r < self.arc.length && self.arc.contains_angle(z.arg())
    }

    /// Inner radius of the box, `1 - |I|`.
    pub fn inner_radius(&self) -> f64 {
        (1.0 - self.arc.length).max(0.0)
    }
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    t
}

/// Value and derivative of the involution `φ_a(z) = (a - z)/(1 - ā z)`.
///
/// Valid for `|a| < 1` and `|z| ≤ 1`; the denominator never vanishes there.
pub fn mobius_jet(a: DiskPoint, z: Complex64) -> (Complex64, Complex64) {
    mobius_jet_c(a.z(), z)
}

#[inline]
pub(crate) fn mobius_jet_c(a: Complex64, z: Complex64) -> (Complex64, Complex64) {
    let den = Complex64::new(1.0, 0.0) - a.conj() * z;
    let value = (a - z) / den;
    let derivative = Complex64::new(a.norm_sqr() - 1.0, 0.0) / (den * den);
    (value, derivative)
}

/// `S(a) := S(I_a)` with `I_a` centred at `a/|a|`, `|I_a| = 1 - |a|`; `S(0)` is the disk.
pub fn carleson_box_of_point(a: DiskPoint) -> CarlesonBox {
    let r = a.norm();
    if r == 0.0 {
        return CarlesonBox::full_disk();
    }
    CarlesonBox {
        arc: ArcInterval {
            center_angle: a.im.atan2(a.re),
            length: (1.0 - r).min(1.0),
        },
    }
}

/// Hyperbolic distance `½ log((1+ρ)/(1-ρ))`, `ρ = |φ_z(w)|`.
pub fn hyperbolic_distance(z: DiskPoint, w: DiskPoint) -> f64 {
    pseudo_hyperbolic(z.z(), w.z()).atanh()
}

/// Pseudo-hyperbolic distance `|φ_z(w)|`.
pub fn pseudo_hyperbolic(z: Complex64, w: Complex64) -> f64 {
    let den = (Complex64::new(1.0, 0.0) - z.conj() * w).norm();
    ((z - w).norm() / den).min(1.0)
}
