use super::koenigs::interior_zero;
use super::GeneratorSpec;
use crate::disk::{pseudo_hyperbolic, DiskPoint};
use crate::error::{Error, Result};
use crate::quadrature::{classify_trend, sup_profile_with, SupProfile, Trend, DEFAULT_ANGLES};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Radius of the pseudo-hyperbolic ball around an interior zero of `G`
/// excluded from the profile.
pub const EXCLUSION_RADIUS: f64 = 0.1;

/// Per-radius suprema of `(1 - |z|²)/|G(z)|` (optionally times
/// `log(1/(1 - |z|²))`) with the fitted trend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochConditionReport {
    pub profile: SupProfile,
    pub log_weighted: bool,
    /// Centre and pseudo-hyperbolic radius of the excluded ball, if any.
    pub excluded_ball: Option<(DiskPoint, f64)>,
    pub slope: Option<f64>,
    /// `Vanishing` means the condition holds.
    pub verdict: Trend,
}

impl BlochConditionReport {
    pub fn holds(&self) -> bool {
        self.verdict == Trend::Vanishing
    }
}

/// Samples the (logarithmic) vanishing Bloch condition of `G` on `radii`.
///
/// Circles lying entirely inside the exclusion ball around the Denjoy–Wolff
/// point are dropped; a zero of `G` elsewhere is an error.
pub fn bloch_condition_profile(spec: &GeneratorSpec, log_weighted: bool, radii: &[f64]) -> Result<BlochConditionReport> {
    let zero = interior_zero(spec);
    let excluded = |z: DiskPoint| zero.is_some_and(|t| pseudo_hyperbolic(z.z(), t) < EXCLUSION_RADIUS);
    let mut kept = Vec::new();
    for &r in radii {
        let n = if r == 0.0 { 1 } else { DEFAULT_ANGLES };
        let all_out = (0..n).all(|k| DiskPoint::from_polar(r, TAU * k as f64 / n as f64).map(excluded).unwrap_or(false));
        if !all_out {
            kept.push(r);
        }
    }
    if kept.is_empty() {
        return Err(Error::invalid("no radius left outside the excluded ball"));
    }
    let profile = sup_profile_with(
        |z| {
            if excluded(z) {
                return Ok(f64::NEG_INFINITY);
            }
            let g = spec.eval(z.z()).norm();
            if !(g > 1e-300) {
                return Err(Error::GeneratorZero(z.z()));
            }
            let one = 1.0 - z.norm_sqr();
            let w = if log_weighted { one * (1.0 / one).ln() } else { one };
            Ok(w / g)
        },
        &kept,
        DEFAULT_ANGLES,
        false,
    )?;
    let slope = profile.tail_slope();
    Ok(BlochConditionReport {
        profile,
        log_weighted,
        excluded_ball: zero.and_then(|t| DiskPoint::from_complex(t).ok()).map(|t| (t, EXCLUSION_RADIUS)),
        slope,
        verdict: classify_trend(slope),
    })
}

#[cfg(test)]
mod tests {
    use super::super::generator_by_name;
    use super::*;
    use crate::funclib::AnalyticFn;
    use crate::quadrature::DEFAULT_RADII;
    use num_complex::Complex64;

    #[test]
    fn contraction_plain() {
        let r = bloch_condition_profile(&generator_by_name("neg_z").unwrap(), false, &DEFAULT_RADII).unwrap();
        assert!(r.holds());
        assert_eq!(r.profile.radii[0], 0.25);
        for (x, v) in r.profile.radii.iter().zip(&r.profile.values) {
            assert!((v - (1.0 - x * x) / x).abs() < 1e-13);
        }
    }

    #[test]
    fn rotation_log() {
        let r = bloch_condition_profile(&generator_by_name("rotation").unwrap(), true, &DEFAULT_RADII).unwrap();
        assert!(r.holds());
        for (x, v) in r.profile.radii.iter().zip(&r.profile.values) {
            let one = 1.0 - x * x;
            assert!((v - one * (1.0 / one).ln() / x).abs() < 1e-13);
        }
    }

    #[test]
    fn parabolic_fails() {
        let r = bloch_condition_profile(&generator_by_name("parabolic").unwrap(), false, &DEFAULT_RADII).unwrap();
        assert_eq!(r.verdict, Trend::NonVanishing);
        let at = |x: f64| r.profile.values[r.profile.radii.iter().position(|&y| y == x).unwrap()];
        assert!((at(0.9) - 19.0).abs() < 1e-9);
        assert!((at(0.99) - 199.0).abs() < 1e-7);
    }

    #[test]
    fn zero_on_annulus() {
        // zeros at 0 and ±1/2; the circle |z| = 1/2 hits one of them
        let g = AnalyticFn::closed_form("-z(z^2-0.25)", |z: Complex64| (-(z * z - 0.25) * z, -(3.0 * z * z - 0.25)));
        let spec = GeneratorSpec::from_generator("bad", g);
        let err = bloch_condition_profile(&spec, false, &[0.5]).unwrap_err();
        assert!(matches!(err, Error::AtPoint { .. }));
    }
}
