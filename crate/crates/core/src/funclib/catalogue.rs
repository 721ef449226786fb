use super::AnalyticFn;
use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use crate::quadrature::Focus;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Parameters of the test functions used throughout the norm and operator
/// experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunctionSpec {
    /// `e_n(z) = z^n`.
    Monomial { n: u32 },
    /// `l_w(z) = log(e / (1 - w̄z))`.
    LogTest { w: DiskPoint },
    /// `f_{w,α,λ}(z) = (1 - |w|²)^λ / (1 - w̄z)^{α+λ}`.
    PowerTest { w: DiskPoint, alpha: f64, lambda: f64 },
    /// `β_w^α = f_{w,α,λ}` with `λ = (s - (p - 2))/p - α`.
    BetaTest { w: DiskPoint, alpha: f64, p: f64, s: f64 },
    /// `H = log(h + i) = log(i / (1 - z))` for the Koenigs map
    /// `h(z) = iz/(1 - z)` of the generator `(1 - z)²`.
    KoenigsLog,
    /// `log(1 / (1 - e^{-iθ} z))`, the boundary-singular logarithm.
    LogPole { angle: f64 },
    /// `z / (1 - z)²`.
    Koebe,
}

/// Builds the closed-form evaluator of a catalogue function.
pub fn make_test_function(spec: &TestFunctionSpec) -> Result<AnalyticFn> {
    let one = Complex64::new(1.0, 0.0);
    match *spec {
        TestFunctionSpec::Monomial { n } => Ok(AnalyticFn::closed_form(format!("e_{n}"), move |z: Complex64| {
            if n == 0 {
                (one, Complex64::new(0.0, 0.0))
            } else {
                (z.powu(n), f64::from(n) * z.powu(n - 1))
            }
        })),
        TestFunctionSpec::LogTest { w } => {
            let wb = w.z().conj();
            Ok(AnalyticFn::closed_form(format!("l_{}", fmt_point(w)), move |z: Complex64| {
                let q = one - wb * z;
                (one - q.ln(), wb / q)
            })
            .with_foci(focus_of(w)))
        }
        TestFunctionSpec::PowerTest { w, alpha, lambda } => power_test(w, alpha, lambda),
        TestFunctionSpec::BetaTest { w, alpha, p, s } => {
            if !(p > 1.0) {
                return Err(Error::invalid(format!("beta test needs p > 1, got {p}")));
            }
            let lambda = (s - (p - 2.0)) / p - alpha;
            power_test(w, alpha, lambda)
        }
        TestFunctionSpec::KoenigsLog => Ok(AnalyticFn::closed_form("H", move |z: Complex64| {
            let q = one - z;
            (Complex64::new(0.0, std::f64::consts::FRAC_PI_2) - q.ln(), one / q)
        })
        .with_foci([Focus::new(0.0, 1e-12)])),
        TestFunctionSpec::LogPole { angle } => {
            let e = Complex64::from_polar(1.0, -angle);
            Ok(AnalyticFn::closed_form(format!("log1m({angle})"), move |z: Complex64| {
                let q = one - e * z;
                (-q.ln(), e / q)
            })
            .with_foci([Focus::new(angle, 1e-12)]))
        }
        TestFunctionSpec::Koebe => Ok(AnalyticFn::closed_form("koebe", move |z: Complex64| {
            let q = one - z;
            (z / (q * q), (one + z) / (q * q * q))
        })
        .with_foci([Focus::new(0.0, 1e-12)])),
    }
}

fn power_test(w: DiskPoint, alpha: f64, lambda: f64) -> Result<AnalyticFn> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("power test needs λ > 0, got {lambda}")));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("power test needs α ≥ 0, got {alpha}")));
    }
    let wb = w.z().conj();
    let scale = (1.0 - w.norm_sqr()).powf(lambda);
    let e = alpha + lambda;
    let one = Complex64::new(1.0, 0.0);
    Ok(
        AnalyticFn::closed_form(format!("f_{{{},{alpha},{lambda}}}", fmt_point(w)), move |z: Complex64| {
            let q = one - wb * z;
            let lq = q.ln();
            let v = (-e * lq).exp() * scale;
            (v, v * e * wb / q)
        })
        .with_foci(focus_of(w)),
    )
}

fn focus_of(w: DiskPoint) -> Vec<Focus> {
    let r = w.norm();
    if r > 0.0 {
        vec![Focus::new(w.z().arg(), 1.0 - r)]
    } else {
        Vec::new()
    }
}

fn fmt_point(w: DiskPoint) -> String {
    if w.im == 0.0 {
        format!("{}", w.re)
    } else {
        format!("{}{:+}i", w.re, w.im)
    }
}

/// The six-function catalogue used by the norm-equivalence experiments:
/// `e_1, e_2, l_{0.5}, l_{0.9}, log(1/(1-z)), f_{w,1/4,1/4}` with
/// `w = 0.9 e^{iπ/3}`.
pub fn catalogue() -> Vec<(String, TestFunctionSpec)> {
    let w = DiskPoint::from_polar(0.9, std::f64::consts::FRAC_PI_3).expect("interior point");
    vec![
        ("e_1".into(), TestFunctionSpec::Monomial { n: 1 }),
        ("e_2".into(), TestFunctionSpec::Monomial { n: 2 }),
        (
            "l_0.5".into(),
            TestFunctionSpec::LogTest {
                w: DiskPoint { re: 0.5, im: 0.0 },
            },
        ),
        (
            "l_0.9".into(),
            TestFunctionSpec::LogTest {
                w: DiskPoint { re: 0.9, im: 0.0 },
            },
        ),
        ("log1m".into(), TestFunctionSpec::LogPole { angle: 0.0 }),
        ("f_w".into(), TestFunctionSpec::PowerTest { w, alpha: 0.25, lambda: 0.25 }),
    ]
}
