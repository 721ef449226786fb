//! Composition operators, generalized Volterra operators `T_g`, symbol
//! classification, strong-continuity curves and the witness construction.

mod witness;

pub use witness::{witness_construct, HypothesisCheck, WitnessGrids, WitnessRound, WitnessState, C_G};

use crate::error::{Error, Result};
use crate::funclib::{taylor_compose, AnalyticFn, TaylorSeries};
use crate::quadrature::gauss::integrate_adaptive;
use crate::quadrature::{classify_trend, fit_loglog_slope, SupProfile, Trend};
use crate::semigroup::{semigroup_map, GeneratorSpec};
use crate::spaces::{
    admissible_check, f_family_norm_with, littleo_profile_with, mads_norm_with, Classification, NormForm, NormOptions, SpaceParams, SpaceSelector,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Constant recorded for the composition bound `‖C_φ‖ ≤ C · rhs`.
pub const COMPOSITION_CONSTANT: f64 = 4.0;

fn require_scale(params: SpaceParams) -> Result<()> {
    if admissible_check(params).classification == Classification::Invalid {
        return Err(Error::invalid(format!("parameters {params:?} are outside the scale")));
    }
    Ok(())
}

fn probe_self_map(phi: &AnalyticFn) -> Result<()> {
    let r_max = phi.r_max();
    for &r in &[0.0, 0.5, 0.9, 0.99, 0.999] {
        if r > r_max {
            continue;
        }
        let n = if r == 0.0 { 1 } else { 64 };
        for k in 0..n {
            let z = Complex64::from_polar(r, TAU * k as f64 / n as f64);
            let m = phi.eval(z).norm();
            if !(m < 1.0) {
                return Err(Error::NotSelfMap { at: z, modulus: m });
            }
        }
    }
    Ok(())
}

/// `C_φ f = f ∘ φ`; Taylor pairs go through [`taylor_compose`], anything
/// else is composed as a closed form.
pub fn compose_operator(phi: &AnalyticFn, f: &AnalyticFn) -> Result<AnalyticFn> {
    probe_self_map(phi)?;
    if f.is_taylor() && phi.is_taylor() {
        taylor_compose(f, phi)
    } else {
        Ok(f.compose_closed(phi))
    }
}

/// Result of [`composition_norm_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionProbe {
    pub max_ratio: f64,
    /// `log(e/(1 - |φ(0)|))` for `α = 0`, `(1/(1 - |φ(0)|))^α` otherwise.
    pub bound_rhs: f64,
    /// `max_ratio / bound_rhs`.
    pub observed_constant: f64,
    pub within_bound: bool,
    pub ratios: Vec<(String, f64)>,
}

/// `max_f ‖C_φ f‖ / ‖f‖` over `catalogue` in the `M_α(D^p_s)` norm
/// (`|f(0)|` plus the kernel-form seminorm).
pub fn composition_norm_probe(phi: &AnalyticFn, params: SpaceParams, catalogue: &[AnalyticFn], opts: &NormOptions) -> Result<CompositionProbe> {
    require_scale(params)?;
    let phi0 = phi.eval(Complex64::new(0.0, 0.0)).norm();
    let bound_rhs = if params.alpha == 0.0 {
        (1.0 / (1.0 - phi0)).ln() + 1.0
    } else {
        (1.0 / (1.0 - phi0)).powf(params.alpha)
    };
    let mut ratios = Vec::with_capacity(catalogue.len());
    for f in catalogue {
        let cf = compose_operator(phi, f)?;
        let num = mads_norm_with(&cf, params, NormForm::Kernel, None, opts)?.value;
        let den = mads_norm_with(f, params, NormForm::Kernel, None, opts)?.value;
        if den > 0.0 {
            ratios.push((f.label(), num / den));
        }
    }
    let max_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let observed_constant = max_ratio / bound_rhs;
    Ok(CompositionProbe {
        max_ratio,
        bound_rhs,
        observed_constant,
        within_bound: observed_constant <= COMPOSITION_CONSTANT,
        ratios,
    })
}

fn volterra_taylor(g: &TaylorSeries, f: &TaylorSeries) -> Result<TaylorSeries> {
    let n = g.order().max(f.order());
    let coef = |c: &[Complex64], k: usize| c.get(k).copied().unwrap_or_default();
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    // c_{m+1} = Σ_j f_j g_{m+1-j} (m+1-j)/(m+1)
    for m in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=m {
            let k = m + 1 - j;
            acc += coef(&f.coeffs, j) * coef(&g.coeffs, k) * (k as f64 / (m + 1) as f64);
        }
        out[m + 1] = acc;
    }
    TaylorSeries::new(out, f.tail_bound + g.tail_bound, f.r_max.min(g.r_max))
}

/// `T_g f(z) = ∫_0^z f(ζ) g'(ζ) dζ`.
///
/// Taylor pairs are integrated coefficient-wise; otherwise the value is an
/// adaptive Gauss–Kronrod integral along the radius and the derivative is
/// `f g'` exactly.
pub fn volterra_apply(g: &AnalyticFn, f: &AnalyticFn, tol: f64) -> Result<AnalyticFn> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if let (Some(tg), Some(tf)) = (g.taylor(), f.taylor()) {
        return Ok(AnalyticFn::from_taylor(volterra_taylor(tg, tf)?));
    }
    let (g, f) = (g.clone(), f.clone());
    let foci = g.foci().iter().chain(f.foci()).copied().collect::<Vec<_>>();
    Ok(AnalyticFn::closed_form(format!("T[{}]({})", g.label(), f.label()), move |z| {
        let d = f.eval(z) * g.deriv(z);
        if z.norm() == 0.0 {
            return (Complex64::new(0.0, 0.0), d);
        }
        let r = integrate_adaptive(|u| f.eval(u * z) * g.deriv(u * z) * z, 0.0, 1.0, 1, tol * 1e-3, tol, 2000);
        let v = if r.converged { r.value } else { Complex64::new(f64::NAN, f64::NAN) };
        (v, d)
    })
    .with_foci(foci))
}

/// Trend-based reading of a boundedness or compactness criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

/// Numbers behind a [`SymbolClassReport`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymbolEvidence {
    pub f_log_norm: Option<f64>,
    pub f_norm: Option<f64>,
    pub m0_norm: Option<f64>,
    pub profile: Option<SupProfile>,
    pub slope: Option<f64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolClassReport {
    pub bounded: Verdict,
    pub compact: Verdict,
    pub evidence: SymbolEvidence,
}

fn bounded_verdict(slope: Option<f64>) -> Verdict {
    match slope {
        Some(s) if s <= 0.05 => Verdict::Consistent,
        Some(s) if s >= 0.15 => Verdict::Inconsistent,
        _ => Verdict::Inconclusive,
    }
}

fn compact_verdict(slope: Option<f64>) -> Verdict {
    match classify_trend(slope) {
        Trend::Vanishing => Verdict::Consistent,
        Trend::NonVanishing => Verdict::Inconsistent,
        Trend::Inconclusive => Verdict::Inconclusive,
    }
}

fn is_constant(g: &AnalyticFn) -> bool {
    [0.0, 0.5, 0.9]
        .iter()
        .flat_map(|&r| (0..16).map(move |k| Complex64::from_polar(r, TAU * k as f64 / 16.0)))
        .all(|z| g.deriv(z).norm() == 0.0)
}

/// Reads boundedness and compactness of `T_g` on `M_α(D^p_s)` off the
/// defining profiles: `F_log(p, p-2, s-(p-2))` for `α = 0`, and `M_0` /
/// `m_0` of `g` for `α > 0` when `g` is known to be univalent.
pub fn volterra_symbol_class(g: &AnalyticFn, params: SpaceParams, univalent_hint: bool, opts: &NormOptions) -> Result<SymbolClassReport> {
    if !admissible_check(params).admissible {
        return Err(Error::invalid(format!("parameters {params:?} are not admissible")));
    }
    if is_constant(g) {
        return Ok(SymbolClassReport {
            bounded: Verdict::Consistent,
            compact: Verdict::Consistent,
            evidence: SymbolEvidence {
                note: "constant symbol: T_g = 0".into(),
                ..Default::default()
            },
        });
    }
    let SpaceParams { p, s, alpha } = params;
    if alpha == 0.0 {
        let (q, s2) = (p - 2.0, s - (p - 2.0));
        let flog = f_family_norm_with(g, p, q, s2, true, opts)?;
        let fplain = f_family_norm_with(g, p, q, s2, false, opts)?;
        let slope = flog.profile.tail_slope();
        return Ok(SymbolClassReport {
            bounded: bounded_verdict(slope),
            compact: compact_verdict(slope),
            evidence: SymbolEvidence {
                f_log_norm: Some(flog.value),
                f_norm: Some(fplain.value),
                m0_norm: None,
                profile: Some(flog.profile),
                slope,
                note: format!("F_log({p}, {q}, {s2}) profile"),
            },
        });
    }
    if !univalent_hint {
        return Ok(SymbolClassReport {
            bounded: Verdict::Inconclusive,
            compact: Verdict::Inconclusive,
            evidence: SymbolEvidence {
                note: "alpha > 0 without univalence: no computable characterization".into(),
                ..Default::default()
            },
        });
    }
    let m0 = SpaceParams::new(p, s, 0.0);
    let profile = littleo_profile_with(
        g,
        SpaceSelector::Mads {
            params: m0,
            form: NormForm::Kernel,
        },
        opts,
    )?;
    let slope = profile.tail_slope();
    Ok(SymbolClassReport {
        bounded: bounded_verdict(slope),
        compact: compact_verdict(slope),
        evidence: SymbolEvidence {
            f_log_norm: None,
            f_norm: None,
            m0_norm: Some(profile.global_sup),
            profile: Some(profile),
            slope,
            note: format!("M_0(D^{p}_{s}) profile of g"),
        },
    })
}

/// `‖f∘φ_t - f‖` against `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityCurve {
    /// `(t, norm)` ascending in `t`.
    pub points: Vec<(f64, f64)>,
    /// `d log norm / d log(1/t)` over the positive times.
    pub slope: Option<f64>,
    pub params: SpaceParams,
    pub form: NormForm,
}

/// Radii added per time so that the supremum can see the scale `t` at which
/// `f∘φ_t - f` concentrates.
fn continuity_radii(base: &[f64], t: f64) -> Vec<f64> {
    let mut r: Vec<f64> = base.to_vec();
    for c in [4.0, 2.0, 1.0, 0.5, 0.25] {
        let x = 1.0 - c * t;
        if x > 0.0 && x < 1.0 - 1e-9 {
            r.push(x);
        }
    }
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

/// `‖f∘φ_t - f‖_{M_α(D^p_s)}` for each `t` in `t_grid` (kernel form, plus
/// the `|f(φ_t(0)) - f(0)|` term).
pub fn strong_continuity_curve(spec: &GeneratorSpec, f: &AnalyticFn, params: SpaceParams, t_grid: &[f64], opts: &NormOptions) -> Result<ContinuityCurve> {
    require_scale(params)?;
    let mut ts: Vec<f64> = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    let mut points = Vec::with_capacity(ts.len());
    for &t in &ts {
        if t == 0.0 {
            points.push((0.0, 0.0));
            continue;
        }
        let phi = semigroup_map(spec, t, crate::semigroup::DEFAULT_FLOW_TOL)?;
        let diff = compose_operator(&phi, f)?.minus(f);
        let local = NormOptions {
            radii: continuity_radii(&opts.radii, t),
            ..opts.clone()
        };
        points.push((t, mads_norm_with(&diff, params, NormForm::Kernel, None, &local)?.value));
    }
    let positive: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 > 0.0).collect();
    Ok(ContinuityCurve {
        slope: fit_loglog_slope(&positive),
        points,
        params,
        form: NormForm::Kernel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::DiskPoint;
    use crate::funclib::{make_test_function, TestFunctionSpec};
    use crate::semigroup::generator_by_name;
    use crate::spaces::dps_norm;

    fn e(n: u32) -> AnalyticFn {
        make_test_function(&TestFunctionSpec::Monomial { n }).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn compose_examples() {
        let f = make_test_function(&TestFunctionSpec::LogTest {
            w: DiskPoint::new(0.5, 0.2).unwrap(),
        })
        .unwrap();
        let z = Complex64::new(0.3, -0.4);
        assert_eq!(compose_operator(&AnalyticFn::identity(), &f).unwrap().eval(z), f.eval(z));
        let k = AnalyticFn::constant(c(2.5));
        let half = AnalyticFn::closed_form("z/2", |z| (z / 2.0, c(0.5)));
        assert_eq!(compose_operator(&half, &k).unwrap().eval(z), c(2.5));
        let h = compose_operator(&half, &e(1)).unwrap();
        let n = dps_norm(&h, 2.0, 1.0, 1e-9).unwrap();
        assert!((n.value - (std::f64::consts::PI / 8.0).sqrt()).abs() < 1e-8);
        let out = AnalyticFn::closed_form("1.2z", |z| (1.2 * z, c(1.2)));
        assert!(matches!(compose_operator(&out, &e(1)), Err(Error::NotSelfMap { .. })));
    }

    #[test]
    fn volterra_examples() {
        let z = Complex64::new(0.4, 0.3);
        let one = AnalyticFn::constant(c(1.0));
        let g = make_test_function(&TestFunctionSpec::LogPole { angle: 0.5 }).unwrap();
        let t = volterra_apply(&g, &one, 1e-12).unwrap();
        assert!((t.eval(z) - (g.eval(z) - g.eval(c(0.0)))).norm() < 1e-12);
        let t = volterra_apply(&e(1), &e(1), 1e-12).unwrap();
        assert!((t.eval(z) - z * z / 2.0).norm() < 1e-14);
        let t = volterra_apply(&e(2), &e(1), 1e-12).unwrap();
        assert!((t.eval(z) - 2.0 / 3.0 * z * z * z).norm() < 1e-14);
        assert!((t.deriv(z) - 2.0 * z * z).norm() < 1e-15);
    }

    #[test]
    fn volterra_taylor_is_exact_for_unit() {
        let g = AnalyticFn::polynomial(vec![c(3.0), c(0.1), Complex64::new(0.3, -0.7), c(1.0 / 3.0)]).unwrap();
        let one = AnalyticFn::polynomial(vec![c(1.0)]).unwrap();
        let t = volterra_apply(&g, &one, 1e-10).unwrap();
        let tc = &t.taylor().unwrap().coeffs;
        assert_eq!(tc[0], c(0.0));
        assert_eq!(&tc[1..], &g.taylor().unwrap().coeffs[1..]);
    }

    #[test]
    fn symbol_class_examples() {
        let opts = NormOptions {
            angles: 16,
            refine: false,
            ..NormOptions::with_tol(1e-5)
        };
        let params = SpaceParams::new(2.0, 1.0, 0.0);
        let r = volterra_symbol_class(&AnalyticFn::constant(c(1.0)), params, false, &opts).unwrap();
        assert_eq!((r.bounded, r.compact), (Verdict::Consistent, Verdict::Consistent));
        let r = volterra_symbol_class(&e(1), params, false, &opts).unwrap();
        assert_eq!(r.compact, Verdict::Consistent, "{:?}", r.evidence.slope);
        let log = make_test_function(&TestFunctionSpec::LogPole { angle: 0.0 }).unwrap();
        let r = volterra_symbol_class(&log, params, false, &opts).unwrap();
        assert_eq!(r.compact, Verdict::Inconsistent, "{:?}", r.evidence.slope);
        assert!(volterra_symbol_class(&e(1), SpaceParams::new(3.0, 0.5, 0.0), false, &opts).is_err());
    }

    #[test]
    fn continuity_at_zero_and_decay() {
        let opts = NormOptions {
            angles: 16,
            refine: false,
            ..NormOptions::with_tol(1e-6)
        };
        let spec = generator_by_name("neg_z").unwrap();
        let curve = strong_continuity_curve(&spec, &e(2), SpaceParams::new(2.0, 1.0, 0.0), &[0.1, 0.0, 0.01, 0.001], &opts).unwrap();
        assert_eq!(curve.points[0], (0.0, 0.0));
        assert!(curve.points.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(curve.slope.unwrap() <= -0.9, "{:?}", curve.slope);
    }

    #[test]
    fn composition_probe_identity() {
        let opts = NormOptions {
            radii: vec![0.0, 0.5, 0.9],
            angles: 8,
            refine: false,
            ..NormOptions::with_tol(1e-6)
        };
        let cat = [e(1), e(2)];
        let r = composition_norm_probe(&AnalyticFn::identity(), SpaceParams::new(2.0, 1.0, 0.0), &cat, &opts).unwrap();
        assert!((r.max_ratio - 1.0).abs() < 1e-12);
        assert!((r.bound_rhs - 1.0).abs() < 1e-15);
    }
}
