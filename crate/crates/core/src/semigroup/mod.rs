//! Infinitesimal generators, their flows, Denjoy–Wolff classification,
//! Koenigs maps, γ-symbols and the (logarithmic) Bloch condition.

mod bloch;
mod catalogue;
mod koenigs;
mod ode;

pub use bloch::{bloch_condition_profile, BlochConditionReport};
pub use catalogue::{generator_by_name, generator_catalogue, load_generator_catalogue, BerksonPortaEntry, GeneratorEntry, DEFAULT_CATALOGUE};
pub use koenigs::{classify, default_validation_grid, gamma_symbol, koenigs_map, validate_generator, GeneratorValidation, SemigroupClass, SemigroupKind};

use crate::disk::{ClosedDiskPoint, DiskPoint};
use crate::error::{Error, Result};
use crate::funclib::AnalyticFn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Default tolerance of the flow integrator.
pub const DEFAULT_FLOW_TOL: f64 = 1e-11;

type FlowJet = dyn Fn(Complex64, f64) -> (Complex64, Complex64) + Send + Sync;

/// Berkson–Porta data `G(z) = (τ̄z - 1)(z - τ) p(z)` with `Re p ≥ 0`.
#[derive(Clone, Debug)]
pub struct BerksonPorta {
    pub tau: ClosedDiskPoint,
    pub p: AnalyticFn,
}

/// An infinitesimal generator, given in closed form, by Berkson–Porta data,
/// or both.
#[derive(Clone)]
pub struct GeneratorSpec {
    pub name: String,
    g: AnalyticFn,
    berkson_porta: Option<BerksonPorta>,
    closed_flow: Option<Arc<FlowJet>>,
}

impl fmt::Debug for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorSpec")
            .field("name", &self.name)
            .field("g", &self.g)
            .field("berkson_porta", &self.berkson_porta)
            .field("closed_flow", &self.closed_flow.is_some())
            .finish()
    }
}

fn berkson_porta_generator(tau: Complex64, p: &AnalyticFn) -> AnalyticFn {
    let pj = p.clone();
    let tb = tau.conj();
    let one = Complex64::new(1.0, 0.0);
    AnalyticFn::closed_form(format!("bp[{tau}; {}]", p.label()), move |z| {
        let (pv, pd) = pj.jet(z);
        let a = tb * z - one;
        let b = z - tau;
        (a * b * pv, (tb * b + a) * pv + a * b * pd)
    })
}

impl GeneratorSpec {
    pub fn from_generator(name: impl Into<String>, g: AnalyticFn) -> Self {
        GeneratorSpec {
            name: name.into(),
            g,
            berkson_porta: None,
            closed_flow: None,
        }
    }

    pub fn from_berkson_porta(name: impl Into<String>, tau: ClosedDiskPoint, p: AnalyticFn) -> Self {
        GeneratorSpec {
            name: name.into(),
            g: berkson_porta_generator(tau.z(), &p),
            berkson_porta: Some(BerksonPorta { tau, p }),
            closed_flow: None,
        }
    }

    /// Closed-form `G` together with Berkson–Porta data; the two must agree
    /// to `1e-10` on a sample grid.
    pub fn with_both(name: impl Into<String>, g: AnalyticFn, tau: ClosedDiskPoint, p: AnalyticFn) -> Result<Self> {
        let bp = berkson_porta_generator(tau.z(), &p);
        for &r in &[0.0, 0.3, 0.6, 0.9, 0.99] {
            for k in 0..16 {
                let z = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / 16.0);
                let d = (g.eval(z) - bp.eval(z)).norm();
                if !(d <= 1e-10) {
                    return Err(Error::invalid(format!("closed form and Berkson–Porta data disagree at {z} by {d:.3e}")));
                }
            }
        }
        Ok(GeneratorSpec {
            name: name.into(),
            g,
            berkson_porta: Some(BerksonPorta { tau, p }),
            closed_flow: None,
        })
    }

    /// Attaches an exact flow `(z, t) ↦ (φ_t(z), ∂_z φ_t(z))`, used by
    /// [`semigroup_map`] in place of the integrator.
    pub fn with_closed_flow<F>(mut self, flow: F) -> Self
    where
        F: Fn(Complex64, f64) -> (Complex64, Complex64) + Send + Sync + 'static,
    {
        self.closed_flow = Some(Arc::new(flow));
        self
    }

    pub fn generator(&self) -> &AnalyticFn {
        &self.g
    }

    pub fn berkson_porta(&self) -> Option<&BerksonPorta> {
        self.berkson_porta.as_ref()
    }

    pub fn has_closed_flow(&self) -> bool {
        self.closed_flow.is_some()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.g.eval(z)
    }

    pub fn deriv(&self, z: Complex64) -> Complex64 {
        self.g.deriv(z)
    }

    /// `G(z) = -λz`, flow `e^{-λt} z`.
    pub fn linear(name: impl Into<String>, lambda: Complex64) -> Self {
        let g = AnalyticFn::closed_form(format!("-({lambda})z"), move |z| (-lambda * z, -lambda));
        Self::from_generator(name, g).with_closed_flow(move |z, t| {
            let q = (-lambda * t).exp();
            (q * z, q)
        })
    }
}

/// One accepted integration of the Cauchy problem `x' = G(x)`, `x(0) = z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub value: DiskPoint,
    pub t: f64,
    pub steps: usize,
    pub local_error: f64,
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("flow time must be finite and non-negative, got {t}")))
    }
}

/// `φ_t(z)` by adaptive Dormand–Prince 5(4) integration.
pub fn flow(spec: &GeneratorSpec, z: DiskPoint, t: f64, tol: f64) -> Result<FlowResult> {
    check_time(t)?;
    let out = ode::dopri5(|y| [spec.g.eval(y[0])], [z.z()], t, tol)?;
    Ok(FlowResult {
        value: DiskPoint::from_complex(out.y[0])?,
        t,
        steps: out.steps,
        local_error: out.local_error,
    })
}

/// [`flow`] over many starting points, in parallel.
pub fn flow_batch(spec: &GeneratorSpec, points: &[DiskPoint], t: f64, tol: f64) -> Vec<Result<FlowResult>> {
    points.par_iter().map(|&z| flow(spec, z, t, tol)).collect()
}

/// `(φ_t(z), ∂_z φ_t(z))`, integrating the variational equation
/// `y' = G'(x) y` alongside the flow.
pub fn flow_jet(spec: &GeneratorSpec, z: Complex64, t: f64, tol: f64) -> Result<(Complex64, Complex64)> {
    check_time(t)?;
    let out = ode::dopri5(
        |y| {
            let (g, dg) = spec.g.jet(y[0]);
            [g, dg * y[1]]
        },
        [z, Complex64::new(1.0, 0.0)],
        t,
        tol,
    )?;
    Ok((out.y[0], out.y[1]))
}

/// The self-map `φ_t` as an [`AnalyticFn`]: the exact flow when the spec
/// carries one, otherwise an integrator-backed evaluator (which yields NaN
/// where the integration fails).
pub fn semigroup_map(spec: &GeneratorSpec, t: f64, tol: f64) -> Result<AnalyticFn> {
    check_time(t)?;
    let label = format!("phi_{t}[{}]", spec.name);
    if t == 0.0 {
        return Ok(AnalyticFn::closed_form(label, |z| (z, Complex64::new(1.0, 0.0))));
    }
    if let Some(cf) = spec.closed_flow.clone() {
        return Ok(AnalyticFn::closed_form(label, move |z| cf(z, t)));
    }
    let s = spec.clone();
    Ok(AnalyticFn::closed_form(label, move |z| {
        flow_jet(&s, z, t, tol).unwrap_or((Complex64::new(f64::NAN, f64::NAN), Complex64::new(f64::NAN, f64::NAN)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(n: usize) -> Vec<DiskPoint> {
        // deterministic spiral covering |z| ≤ 0.95
        (0..n)
            .map(|k| {
                let r = 0.95 * ((k as f64 + 0.5) / n as f64).sqrt();
                DiskPoint::from_polar(r, 2.399_963_229_728_653 * k as f64).unwrap()
            })
            .collect()
    }

    #[test]
    fn flows_match_closed_forms() {
        let cat = generator_catalogue().unwrap();
        for spec in cat.iter().filter(|s| s.has_closed_flow()) {
            for z in samples(20) {
                for t in [0.1, 0.5, 1.0] {
                    let num = flow(spec, z, t, 1e-12).unwrap().value.z();
                    let exact = spec.closed_flow.as_ref().unwrap()(z.z(), t).0;
                    assert!((num - exact).norm() < 1e-9, "{} z={:?} t={t}", spec.name, z);
                }
            }
        }
    }

    #[test]
    fn time_zero_is_identity() {
        let spec = generator_by_name("parabolic").unwrap();
        let z = DiskPoint::new(0.3, -0.7).unwrap();
        let r = flow(&spec, z, 0.0, 1e-10).unwrap();
        assert_eq!(r.value, z);
        assert!(flow(&spec, z, -1.0, 1e-10).is_err());
    }

    #[test]
    fn semigroup_law() {
        for spec in generator_catalogue().unwrap() {
            for z in samples(10) {
                for (t, s) in [(0.1, 0.5), (0.5, 1.0), (1.0, 0.1)] {
                    let ts = flow(&spec, z, t + s, 1e-12).unwrap().value;
                    let inner = flow(&spec, z, s, 1e-12).unwrap().value;
                    let comp = flow(&spec, inner, t, 1e-12).unwrap().value;
                    assert!((ts.z() - comp.z()).norm() < 1e-9, "{}", spec.name);
                }
            }
        }
    }

    #[test]
    fn error_estimate_consistent_with_tighter_run() {
        let spec = generator_by_name("logistic").unwrap();
        let z = DiskPoint::new(0.6, 0.5).unwrap();
        let coarse = flow(&spec, z, 1.0, 1e-6).unwrap();
        let fine = flow(&spec, z, 1.0, 1e-12).unwrap();
        let diff = (coarse.value.z() - fine.value.z()).norm();
        assert!(diff <= 10.0 * coarse.local_error.max(1e-15), "{diff} vs {}", coarse.local_error);
        assert!(fine.steps > coarse.steps);
    }

    #[test]
    fn generator_is_the_time_derivative() {
        let spec = generator_by_name("logistic").unwrap();
        let z = DiskPoint::new(0.2, 0.4).unwrap();
        let errs: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&t| {
                let x = flow(&spec, z, t, 1e-13).unwrap().value.z();
                (t, ((x - z.z()) / t - spec.eval(z.z())).norm())
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0].1 / w[1].1).log10() / (w[0].0 / w[1].0).log10();
            assert!(order >= 0.9, "order {order}");
        }
    }

    #[test]
    fn variational_derivative() {
        let spec = generator_by_name("parabolic").unwrap();
        let z = Complex64::new(0.1, 0.5);
        let (v, d) = flow_jet(&spec, z, 0.7, 1e-12).unwrap();
        let (ev, ed) = spec.closed_flow.as_ref().unwrap()(z, 0.7);
        assert!((v - ev).norm() < 1e-10 && (d - ed).norm() < 1e-9);
    }

    #[test]
    fn denjoy_wolff_attraction() {
        for spec in generator_catalogue().unwrap() {
            let class = classify(&spec).unwrap();
            if !class.attracting {
                continue;
            }
            let tau = class.dw_point.z();
            let z = DiskPoint::new(-0.4, 0.3).unwrap();
            let mut prev = f64::INFINITY;
            for t in [0.5, 1.0, 2.0, 4.0, 8.0] {
                let d = (flow(&spec, z, t, 1e-11).unwrap().value.z() - tau).norm();
                assert!(d < prev, "{}", spec.name);
                prev = d;
            }
        }
    }

    #[test]
    fn flows_are_univalent() {
        use crate::funclib::univalence_probe;
        for spec in generator_catalogue().unwrap() {
            for t in [0.5, 1.0] {
                let phi = semigroup_map(&spec, t, 1e-10).unwrap();
                assert!(univalence_probe(&phi, 4).injective_on_mesh, "{} t={t}", spec.name);
            }
        }
    }

    #[test]
    fn both_forms_must_agree() {
        let one = AnalyticFn::constant(Complex64::new(1.0, 0.0));
        let tau = ClosedDiskPoint::Interior(DiskPoint::ORIGIN);
        let g = AnalyticFn::closed_form("-z", |z| (-z, Complex64::new(-1.0, 0.0)));
        assert!(GeneratorSpec::with_both("ok", g, tau, one.clone()).is_ok());
        let bad = AnalyticFn::closed_form("z", |z| (z, Complex64::new(1.0, 0.0)));
        assert!(GeneratorSpec::with_both("bad", bad, tau, one).is_err());
    }
}
