use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Value of a weight and its gradient `(∂_x ω, ∂_y ω)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSample {
    pub value: f64,
    pub gradient: (f64, f64),
}

/// `ω(z) = log(K/(1 - |z|²))`.
pub fn log_weight(k: f64) -> impl Fn(DiskPoint) -> WeightSample + Sync {
    move |z: DiskPoint| {
        let one = 1.0 - z.norm_sqr();
        // ∇ω = 2z/(1 - |z|²)
        WeightSample {
            value: (k / one).ln(),
            gradient: (2.0 * z.re / one, 2.0 * z.im / one),
        }
    }
}

/// Empirical `C_ω = sup (1 - |z|²) |∇ω(z)| / ω(z)` over the radii and 64
/// angles per radius.
pub fn weight_regularity_constant<W>(omega: W, radii: &[f64]) -> Result<f64>
where
    W: Fn(DiskPoint) -> WeightSample,
{
    let n = 64;
    let mut sup: f64 = 0.0;
    for &r in radii {
        let count = if r == 0.0 { 1 } else { n };
        for k in 0..count {
            let z = DiskPoint::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64)?;
            let w = omega(z);
            if !(w.value > 0.0) {
                return Err(Error::NonPositiveWeight {
                    at: Complex64::new(z.re, z.im),
                    value: w.value,
                });
            }
            let grad = w.gradient.0.hypot(w.gradient.1);
            sup = sup.max((1.0 - z.norm_sqr()) * grad / w.value);
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::DEFAULT_RADII;

    #[test]
    fn constant_weight() {
        let c = weight_regularity_constant(
            |_| WeightSample {
                value: 1.0,
                gradient: (0.0, 0.0),
            },
            &DEFAULT_RADII,
        )
        .unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn log_weight_profile_and_decay_in_k() {
        let radii: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let k = 10.0;
        let c = weight_regularity_constant(log_weight(k), &radii).unwrap();
        // closed form 2r / (log K + log(1/(1 - r²))) on each circle
        let expect = radii.iter().map(|r| 2.0 * r / (k.ln() + (1.0 / (1.0 - r * r)).ln())).fold(0.0, f64::max);
        assert!((c - expect).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for k in [1e2, 1e4, 1e8] {
            let c = weight_regularity_constant(log_weight(k), &radii).unwrap();
            assert!(c < prev);
            prev = c;
        }
        assert!(prev < 0.5);
    }

    #[test]
    fn non_positive_weight_is_rejected() {
        let err = weight_regularity_constant(log_weight(0.5), &[0.0, 0.5]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveWeight { .. }));
    }
}
