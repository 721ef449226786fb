use crate::disk::DiskPoint;
use crate::error::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Radii ladder used for suprema over `a ∈ 𝔻`.
pub const DEFAULT_RADII: [f64; 9] = [0.0, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.995, 0.999];
/// Angles sampled on every positive radius.
pub const DEFAULT_ANGLES: usize = 64;

/// Per-radius suprema of an objective sampled on a polar grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Angle at which each per-radius supremum was attained.
    pub argmax_angles: Vec<f64>,
    pub global_sup: f64,
    pub attained_at: DiskPoint,
    /// Extra samples from the local refinement pass, `(r, θ, value)`.
    pub refined: Vec<(f64, f64, f64)>,
}

impl SupProfile {
    /// Log-log decay slope over the last decade of the ladder (radii with
    /// `1 - r ≤ 10 (1 - r_max)`), as `d log y / d log(1/(1 - r))`.
    ///
    /// `None` when fewer than two usable points exist or a value is not
    /// positive; an identically zero tail reports `-inf`.
    pub fn tail_slope(&self) -> Option<f64> {
        let r_max = *self.radii.last()?;
        let window = 10.0 * (1.0 - r_max) * (1.0 + 1e-9);
        let pts: Vec<(f64, f64)> = self
            .radii
            .iter()
            .zip(&self.values)
            .filter(|(r, _)| 1.0 - **r <= window && **r < 1.0)
            .map(|(r, v)| (1.0 - r, *v))
            .collect();
        if pts.len() >= 2 && pts.iter().all(|p| p.1 == 0.0) {
            return Some(f64::NEG_INFINITY);
        }
        fit_loglog_slope(&pts)
    }

    /// Value on the largest ladder radius.
    pub fn last_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Direction of a boundary profile, read off its tail slope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// Slope at most `-0.25`: the quantity tends to zero.
    Vanishing,
    /// Slope at least `-0.05`: flat or growing.
    NonVanishing,
    Inconclusive,
}

/// Buckets a tail slope; `None` is inconclusive.
pub fn classify_trend(slope: Option<f64>) -> Trend {
    match slope {
        Some(s) if s <= -0.25 => Trend::Vanishing,
        Some(s) if s >= -0.05 => Trend::NonVanishing,
        _ => Trend::Inconclusive,
    }
}

/// Least-squares slope of `log y` against `log(1/x)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (-(x.ln()), y.ln()))
        .collect();
    if pts.len() < 2 || pts.len() != points.len() {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Sampled supremum of `objective` over the default radii ladder.
pub fn sup_profile<F>(objective: F, radii: &[f64], angles_per_radius: usize) -> Result<SupProfile>
where
    F: Fn(DiskPoint) -> Result<f64> + Sync,
{
    sup_profile_with(objective, radii, angles_per_radius, true)
}

/// Sampled supremum of `objective`; `refine` toggles the local pass around
/// the argmax.
pub fn sup_profile_with<F>(objective: F, radii: &[f64], angles_per_radius: usize, refine: bool) -> Result<SupProfile>
where
    F: Fn(DiskPoint) -> Result<f64> + Sync,
{
    sup_profile_focused(objective, radii, angles_per_radius, refine, &[])
}

/// [`sup_profile_with`] with `extra_angles` sampled on every circle in
/// addition to the uniform ones, so that narrow peaks in known directions
/// are not missed.
pub fn sup_profile_focused<F>(objective: F, radii: &[f64], angles_per_radius: usize, refine: bool, extra_angles: &[f64]) -> Result<SupProfile>
where
    F: Fn(DiskPoint) -> Result<f64> + Sync,
{
    let mut radii: Vec<f64> = radii.to_vec();
    radii.sort_by(|a, b| a.total_cmp(b));
    radii.dedup();
    if radii.is_empty() || radii[0] < 0.0 || *radii.last().unwrap() >= 1.0 {
        return Err(crate::error::Error::invalid("radii must lie in [0, 1) and be non-empty"));
    }
    let n = angles_per_radius.max(1);
    let dtheta = TAU / n as f64;
    let mut jobs = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        if r == 0.0 {
            jobs.push((i, r, 0.0));
        } else {
            jobs.extend((0..n).map(|k| (i, r, dtheta * k as f64)));
            jobs.extend(extra_angles.iter().map(|&t| (i, r, t)));
        }
    }
    let values = eval_all(&objective, &jobs)?;

    let mut per_radius = vec![f64::NEG_INFINITY; radii.len()];
    let mut per_angle = vec![0.0; radii.len()];
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0usize);
    for (&(i, r, t), &v) in jobs.iter().zip(&values) {
        if v > per_radius[i] {
            per_radius[i] = v;
            per_angle[i] = t;
        }
        if v > best.0 {
            best = (v, r, t, i);
        }
    }

    let mut refined = Vec::new();
    if refine && best.0.is_finite() {
        let (_, r_star, t_star, i_star) = best;
        let mut extra = Vec::new();
        if r_star > 0.0 {
            for d in [-0.5, -0.25, 0.25, 0.5] {
                extra.push((r_star, t_star + d * dtheta));
            }
        }
        if i_star > 0 {
            extra.push((0.5 * (radii[i_star - 1] + r_star), t_star));
        }
        if i_star + 1 < radii.len() {
            extra.push((0.5 * (radii[i_star + 1] + r_star), t_star));
        } else if r_star > 0.0 {
            extra.push((1.0 - (1.0 - r_star) / 2.0, t_star));
            extra.push((1.0 - (1.0 - r_star) / 4.0, t_star));
        }
        let jobs: Vec<(usize, f64, f64)> = extra.iter().map(|&(r, t)| (0, r, t)).collect();
        let vals = eval_all(&objective, &jobs)?;
        for (&(r, t), v) in extra.iter().zip(vals) {
            refined.push((r, t, v));
            if v > best.0 {
                best = (v, r, t, best.3);
            }
        }
    }

    let attained_at = DiskPoint::from_polar(best.1, best.2)?;
    Ok(SupProfile {
        radii,
        values: per_radius,
        argmax_angles: per_angle,
        global_sup: best.0,
        attained_at,
        refined,
    })
}

fn eval_all<F>(objective: &F, jobs: &[(usize, f64, f64)]) -> Result<Vec<f64>>
where
    F: Fn(DiskPoint) -> Result<f64> + Sync,
{
    jobs.par_iter()
        .map(|&(_, r, t)| {
            let a = DiskPoint::from_polar(r, t)?;
            objective(a).map_err(|e| e.at_point(a.z()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn one_minus_r_squared() {
        let p = sup_profile(|a| Ok(1.0 - a.norm_sqr()), &DEFAULT_RADII, 64).unwrap();
        assert_eq!(p.global_sup, 1.0);
        assert_eq!(p.attained_at.norm(), 0.0);
        for (r, v) in p.radii.iter().zip(&p.values) {
            assert!((v - (1.0 - r * r)).abs() < 1e-15);
        }
    }

    #[test]
    fn radial_monotone_attained_at_largest_radius() {
        let p = sup_profile(|a| Ok(a.norm()), &DEFAULT_RADII, 64).unwrap();
        let largest = p.refined.iter().map(|x| x.0).fold(0.999, f64::max);
        assert!((p.global_sup - largest).abs() < 1e-12);
        assert!((p.attained_at.norm() - largest).abs() < 1e-12);
    }

    #[test]
    fn bmoa_type_series_sup_at_origin() {
        // (1 - x)² π Σ (k+1)/(k+2) x^k with x = |a|², maximal at a = 0
        let obj = |a: DiskPoint| {
            let x = a.norm_sqr();
            let mut sum = 0.0;
            let mut pow = 1.0;
            for k in 0..200_000 {
                let term = (k as f64 + 1.0) / (k as f64 + 2.0) * pow;
                sum += term;
                pow *= x;
                if term < 1e-18 {
                    break;
                }
            }
            Ok((1.0 - x).powi(2) * std::f64::consts::PI * sum)
        };
        let p = sup_profile(obj, &DEFAULT_RADII, 16).unwrap();
        assert!((p.global_sup - std::f64::consts::PI / 2.0).abs() < 1e-12);
        assert_eq!(p.attained_at.norm(), 0.0);
    }

    #[test]
    fn failures_carry_the_point() {
        let err = sup_profile(|a| if a.norm() > 0.6 { Err(Error::invalid("boom")) } else { Ok(0.0) }, &DEFAULT_RADII, 8).unwrap_err();
        match err {
            Error::AtPoint { a, .. } => assert!(a.norm() > 0.6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [1e-2, 5e-3, 1e-3].iter().map(|&x: &f64| (x, x.powf(0.5))).collect();
        assert!((fit_loglog_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
    }
}
