//! Weighted area integration over the disk and Carleson boxes, and sampled
//! suprema over the parameter `a ∈ 𝔻`.
//!
//! All integrals are against unnormalized Lebesgue area (`∫_𝔻 dA = π`).

mod cubature;
pub mod gauss;
mod profile;

pub use cubature::{Focus, MIN_REL_TOL};
pub use profile::{classify_trend, fit_loglog_slope, sup_profile, sup_profile_focused, sup_profile_with, SupProfile, Trend, DEFAULT_ANGLES, DEFAULT_RADII};

use crate::disk::CarlesonBox;
use crate::error::{Error, Result};
use cubature::{integrate_region, CubatureSettings, PolarRegion};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default relative tolerance of the 2D integrators.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default radial truncation `1 - r` of the boundary layer.
pub const DEFAULT_CUTOFF: f64 = 1e-6;

/// Value of a weighted area integral with its heuristic error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_bound: f64,
    pub cells_used: usize,
    pub max_radius_reached: f64,
}

impl QuadratureResult {
    pub fn zero() -> Self {
        QuadratureResult {
            value: 0.0,
            error_bound: 0.0,
            cells_used: 0,
            max_radius_reached: 0.0,
        }
    }
}

/// Tuning knobs of the polar cubature.
#[derive(Clone, Debug)]
pub struct QuadOptions {
    /// Relative tolerance.
    pub tol: f64,
    /// Absolute error that is always accepted.
    pub abs_floor: f64,
    /// Radial truncation `1 - r` before tail extrapolation.
    pub cutoff: f64,
    /// Evaluation budget before giving up with `NonConvergent`.
    pub max_evals: usize,
    /// Boundary directions where the integrand is known to concentrate.
    pub foci: Vec<Focus>,
    /// Uniform refinement level instead of adaptivity (for convergence studies).
    pub fixed_level: Option<u32>,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: DEFAULT_TOL,
            abs_floor: 1e-300,
            cutoff: DEFAULT_CUTOFF,
            max_evals: 4_000_000,
            foci: Vec::new(),
            fixed_level: None,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions { tol, ..Default::default() }
    }

    pub fn focus(mut self, f: impl IntoIterator<Item = Focus>) -> Self {
        self.foci.extend(f);
        self
    }
}

fn check_common(s_weight: f64, opts: &QuadOptions) -> Result<()> {
    if !(s_weight > -1.0) || !s_weight.is_finite() {
        return Err(Error::invalid(format!("weight exponent must exceed -1, got {s_weight}")));
    }
    if !(opts.tol > 0.0) || !opts.tol.is_finite() {
        return Err(Error::invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !(opts.cutoff > 0.0 && opts.cutoff < 1.0) {
        return Err(Error::invalid("cutoff must lie in (0, 1)"));
    }
    Ok(())
}

fn finish(out: cubature::CubatureOutcome) -> Result<QuadratureResult> {
    let result = QuadratureResult {
        value: out.value,
        error_bound: out.error,
        cells_used: out.cells,
        max_radius_reached: out.max_radius,
    };
    if out.converged && out.value.is_finite() {
        Ok(result)
    } else {
        Err(Error::NonConvergent { partial: result })
    }
}

/// `∫_𝔻 F(z) (1 - |z|²)^s dA(z)`.
///
/// The integrand receives `z` and the exactly computed `1 - |z|²`.
pub fn integrate_disk_with<F>(integrand: F, s_weight: f64, opts: &QuadOptions) -> Result<QuadratureResult>
where
    F: Fn(Complex64, f64) -> f64,
{
    check_common(s_weight, opts)?;
    finish(integrate_region(&integrand, s_weight, PolarRegion::disk(), &opts.foci, settings(opts)))
}

/// `∫_{S(I)} F(z) (1 - |z|²)^s dA(z)`.
pub fn integrate_box_with<F>(integrand: F, bx: &CarlesonBox, s_weight: f64, opts: &QuadOptions) -> Result<QuadratureResult>
where
    F: Fn(Complex64, f64) -> f64,
{
    check_common(s_weight, opts)?;
    let h = bx.arc.length;
    let (t0, t1) = bx.arc.angle_range();
    let region = PolarRegion {
        r_inner: 1.0 - h,
        theta0: t0,
        theta1: t1,
    };
    if bx.arc.is_full() {
        return integrate_disk_with(integrand, s_weight, opts);
    }
    let mut local = opts.clone();
    local.cutoff = opts.cutoff.min(h * 1e-3);
    local.foci.push(Focus::new(bx.arc.center_angle, h));
    finish(integrate_region(&integrand, s_weight, region, &local.foci, settings(&local)))
}

fn settings(opts: &QuadOptions) -> CubatureSettings {
    CubatureSettings {
        tol: opts.tol,
        abs_floor: opts.abs_floor,
        cutoff: opts.cutoff,
        max_evals: opts.max_evals,
        fixed_level: opts.fixed_level,
    }
}

/// `∫_𝔻 F(z) (1 - |z|²)^s dA(z)` to relative tolerance `tol`.
pub fn integrate_disk<F>(integrand: F, s_weight: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> f64,
{
    integrate_disk_with(|z, _| integrand(z), s_weight, &QuadOptions::with_tol(tol))
}

/// `∫_{S(I)} F(z) (1 - |z|²)^s dA(z)` to relative tolerance `tol`.
pub fn integrate_box<F>(integrand: F, bx: &CarlesonBox, s_weight: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> f64,
{
    integrate_box_with(|z, _| integrand(z), bx, s_weight, &QuadOptions::with_tol(tol))
}
