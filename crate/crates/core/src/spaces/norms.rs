use super::{admissible_check, Classification, NormEstimate, NormForm, QuadratureMeta, SpaceParams, BOX_CONVENTION};
use crate::disk::{carleson_box_of_point, mobius_jet_c, wrap_angle, DiskPoint};
use crate::error::{Error, Result};
use crate::funclib::AnalyticFn;
use crate::quadrature::{
    integrate_box_with, integrate_disk_with, sup_profile_focused, Focus, QuadOptions, QuadratureResult, SupProfile, DEFAULT_ANGLES, DEFAULT_RADII, DEFAULT_TOL,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Mutex;

/// Sampling and tolerance settings shared by the sup-type norms.
#[derive(Clone, Debug)]
pub struct NormOptions {
    pub tol: f64,
    pub radii: Vec<f64>,
    pub angles: usize,
    pub refine: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            tol: DEFAULT_TOL,
            radii: DEFAULT_RADII.to_vec(),
            angles: DEFAULT_ANGLES,
            refine: true,
        }
    }
}

impl NormOptions {
    pub fn with_tol(tol: f64) -> Self {
        NormOptions { tol, ..Default::default() }
    }
}

/// Weights of the Bloch-type suprema.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlochWeight {
    /// `(1 - |z|²)^α |f'(z)|`.
    AlphaPower { alpha: f64 },
    /// `log(e/(1 - |z|²)) (1 - |z|²) |f'(z)|`.
    Log,
}

/// Functional whose boundary behaviour a little-o profile tracks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum SpaceSelector {
    Mads { params: SpaceParams, form: NormForm },
    FFamily { p: f64, q: f64, s: f64, log_weighted: bool },
    Bloch { weight: BlochWeight },
}

#[inline]
fn pow_abs(x: Complex64, p: f64) -> f64 {
    if p == 2.0 {
        x.norm_sqr()
    } else {
        x.norm().powf(p)
    }
}

fn quad_options(tol: f64, foci: Vec<Focus>) -> QuadOptions {
    QuadOptions::with_tol(tol).focus(foci)
}

fn a_focus(a: Complex64) -> Option<Focus> {
    let r = a.norm();
    (r > 0.0).then(|| Focus::new(a.arg(), 1.0 - r))
}

/// Foci of `|f'(φ_a)|`: the involution sends the boundary point `ζ` to
/// `φ_a(ζ)` and stretches widths by `|φ_a'(ζ)|`.
fn pulled_foci(f: &AnalyticFn, a: Complex64) -> Vec<Focus> {
    f.foci()
        .iter()
        .map(|fo| {
            let zeta = Complex64::from_polar(1.0, fo.angle);
            let (img, d) = mobius_jet_c(a, zeta);
            Focus::new(wrap_angle(img.arg()), fo.width * d.norm())
        })
        .collect()
}

fn focus_angles(f: &AnalyticFn) -> Vec<f64> {
    f.foci().iter().map(|fo| fo.angle).collect()
}

/// `‖f‖_{D^p_s} = |f(0)| + (∫ |f'|^p (1 - |z|²)^s dA)^{1/p}`.
pub fn dps_norm(f: &AnalyticFn, p: f64, s: f64, tol: f64) -> Result<NormEstimate> {
    if !(p > 0.0) {
        return Err(Error::invalid(format!("p must be positive, got {p}")));
    }
    let q = integrate_disk_with(|z, _| pow_abs(f.deriv(z), p), s, &quad_options(tol, f.foci().to_vec()))?;
    let mut meta = QuadratureMeta { tol, ..Default::default() };
    meta.absorb(&q);
    let f0 = f.eval(Complex64::new(0.0, 0.0)).norm();
    let profile = SupProfile {
        radii: vec![0.0],
        values: vec![q.value],
        argmax_angles: vec![0.0],
        global_sup: q.value,
        attained_at: DiskPoint::ORIGIN,
        refined: Vec::new(),
    };
    Ok(NormEstimate {
        value: f0 + q.value.max(0.0).powf(1.0 / p),
        form: NormForm::Dps,
        f0_term: f0,
        exponent: 1.0 / p,
        profile,
        quadrature_meta: meta,
        params: Some(SpaceParams::new(p, s, 0.0)),
        box_convention: BOX_CONVENTION.into(),
    })
}

/// Raw (p-th power) value of the selected `M_α` functional at `a`.
pub(crate) fn mads_functional(f: &AnalyticFn, params: SpaceParams, form: NormForm, beta: f64, a: Complex64, tol: f64) -> Result<QuadratureResult> {
    let SpaceParams { p, s, alpha } = params;
    let sigma = params.sigma();
    let one_a = 1.0 - a.norm_sqr();
    match form {
        NormForm::Invariant => {
            let mut foci = pulled_foci(f, a);
            foci.extend(a_focus(a));
            let pre = one_a.powf(p * alpha);
            let mut q = integrate_disk_with(
                |z, _| {
                    let (w, dphi) = mobius_jet_c(a, z);
                    pow_abs(f.deriv(w) * dphi, p)
                },
                s,
                &quad_options(tol, foci),
            )?;
            q.value *= pre;
            q.error_bound *= pre;
            Ok(q)
        }
        NormForm::Kernel => {
            if !(beta > 0.0) {
                return Err(Error::invalid(format!("kernel exponent β must be positive, got {beta}")));
            }
            let mut foci = f.foci().to_vec();
            foci.extend(a_focus(a));
            let num = one_a.powf(beta);
            let e = 0.5 * (sigma + beta);
            let ab = a.conj();
            integrate_disk_with(
                |z, _| {
                    let d = (Complex64::new(1.0, 0.0) - ab * z).norm_sqr();
                    pow_abs(f.deriv(z), p) * num / d.powf(e)
                },
                s,
                &quad_options(tol, foci),
            )
        }
        NormForm::Box => {
            let a_pt = DiskPoint::from_complex(a)?;
            let bx = carleson_box_of_point(a_pt);
            let scale = one_a.powf(-sigma);
            let mut q = integrate_box_with(|z, _| pow_abs(f.deriv(z), p), &bx, s, &quad_options(tol, f.foci().to_vec()))?;
            q.value *= scale;
            q.error_bound *= scale;
            Ok(q)
        }
        other => Err(Error::invalid(format!("{other:?} is not an M_alpha form"))),
    }
}

/// Seminorm of `M_α(D^p_s)` in the selected form, with the default kernel
/// exponent `β = s - (p - 2) + pα` (the one that makes kernel and invariant
/// forms coincide).
pub fn mads_seminorm(f: &AnalyticFn, params: SpaceParams, form: NormForm, beta: Option<f64>, tol: f64) -> Result<NormEstimate> {
    mads_seminorm_with(f, params, form, beta, &NormOptions::with_tol(tol))
}

pub fn mads_seminorm_with(f: &AnalyticFn, params: SpaceParams, form: NormForm, beta: Option<f64>, opts: &NormOptions) -> Result<NormEstimate> {
    if admissible_check(params).classification == Classification::Invalid {
        return Err(Error::invalid(format!("parameters {params:?} are outside the scale")));
    }
    let beta = beta.unwrap_or_else(|| params.matching_beta());
    let meta = Mutex::new(QuadratureMeta {
        tol: opts.tol,
        ..Default::default()
    });
    let profile = sup_profile_focused(
        |a| {
            let q = mads_functional(f, params, form, beta, a.z(), opts.tol)?;
            meta.lock().expect("meta lock").absorb(&q);
            Ok(q.value)
        },
        &opts.radii,
        opts.angles,
        opts.refine,
        &focus_angles(f),
    )?;
    let exponent = 1.0 / params.p;
    Ok(NormEstimate {
        value: profile.global_sup.max(0.0).powf(exponent),
        form,
        f0_term: 0.0,
        exponent,
        profile,
        quadrature_meta: meta.into_inner().expect("meta lock"),
        params: Some(params),
        box_convention: BOX_CONVENTION.into(),
    })
}

/// `|f(0)|` plus [`mads_seminorm`].
pub fn mads_norm(f: &AnalyticFn, params: SpaceParams, form: NormForm, beta: Option<f64>, tol: f64) -> Result<NormEstimate> {
    mads_norm_with(f, params, form, beta, &NormOptions::with_tol(tol))
}

pub fn mads_norm_with(f: &AnalyticFn, params: SpaceParams, form: NormForm, beta: Option<f64>, opts: &NormOptions) -> Result<NormEstimate> {
    let mut est = mads_seminorm_with(f, params, form, beta, opts)?;
    est.f0_term = f.eval(Complex64::new(0.0, 0.0)).norm();
    est.value += est.f0_term;
    Ok(est)
}

fn f_family_functional(f: &AnalyticFn, p: f64, q: f64, s: f64, log_weighted: bool, a: Complex64, tol: f64) -> Result<QuadratureResult> {
    let one_a = 1.0 - a.norm_sqr();
    let pre = if log_weighted { (1.0 / one_a).ln().powf(p) } else { 1.0 };
    if pre == 0.0 {
        return Ok(QuadratureResult::zero());
    }
    let mut foci = f.foci().to_vec();
    foci.extend(a_focus(a));
    let num = one_a.powf(s);
    let ab = a.conj();
    let mut r = integrate_disk_with(
        |z, _| {
            let d = (Complex64::new(1.0, 0.0) - ab * z).norm_sqr();
            pow_abs(f.deriv(z), p) * num / d.powf(s)
        },
        q + s,
        &quad_options(tol, foci),
    )?;
    r.value *= pre;
    r.error_bound *= pre;
    Ok(r)
}

/// `sup_a ∫ |f'|^p (1 - |z|²)^q (1 - |φ_a(z)|²)^s dA`, optionally times
/// `log(1/(1 - |a|²))^p`. The value is the supremum itself (no root).
pub fn f_family_norm(f: &AnalyticFn, p: f64, q: f64, s: f64, log_weighted: bool, tol: f64) -> Result<NormEstimate> {
    f_family_norm_with(f, p, q, s, log_weighted, &NormOptions::with_tol(tol))
}

pub fn f_family_norm_with(f: &AnalyticFn, p: f64, q: f64, s: f64, log_weighted: bool, opts: &NormOptions) -> Result<NormEstimate> {
    if !(q > -2.0 && s > 0.0 && q + s > -1.0) {
        return Err(Error::invalid(format!("F(p, q, s) needs q > -2, s > 0, q + s > -1; got q = {q}, s = {s}")));
    }
    let meta = Mutex::new(QuadratureMeta {
        tol: opts.tol,
        ..Default::default()
    });
    let profile = sup_profile_focused(
        |a| {
            let r = f_family_functional(f, p, q, s, log_weighted, a.z(), opts.tol)?;
            meta.lock().expect("meta lock").absorb(&r);
            Ok(r.value)
        },
        &opts.radii,
        opts.angles,
        opts.refine,
        &focus_angles(f),
    )?;
    Ok(NormEstimate {
        value: profile.global_sup,
        form: NormForm::FFamily,
        f0_term: 0.0,
        exponent: 1.0,
        profile,
        quadrature_meta: meta.into_inner().expect("meta lock"),
        params: None,
        box_convention: BOX_CONVENTION.into(),
    })
}

fn bloch_weight(weight: BlochWeight, one_minus_r2: f64) -> f64 {
    match weight {
        BlochWeight::AlphaPower { alpha } => one_minus_r2.powf(alpha),
        BlochWeight::Log => (1.0 + (1.0 / one_minus_r2).ln()) * one_minus_r2,
    }
}

/// `|f(0)| + sup_z w(z) |f'(z)|` over the sampling grid.
pub fn weighted_bloch_norm(f: &AnalyticFn, weight: BlochWeight, tol: f64) -> Result<NormEstimate> {
    let _ = tol;
    let opts = NormOptions::default();
    let profile = bloch_profile(f, weight, &opts.radii, opts.angles, true)?;
    let f0 = f.eval(Complex64::new(0.0, 0.0)).norm();
    Ok(NormEstimate {
        value: f0 + profile.global_sup,
        form: NormForm::Bloch,
        f0_term: f0,
        exponent: 1.0,
        profile,
        quadrature_meta: QuadratureMeta::default(),
        params: None,
        box_convention: BOX_CONVENTION.into(),
    })
}

fn bloch_profile(f: &AnalyticFn, weight: BlochWeight, radii: &[f64], angles: usize, refine: bool) -> Result<SupProfile> {
    sup_profile_focused(
        |z| {
            let w = bloch_weight(weight, 1.0 - z.norm_sqr());
            Ok(w * f.deriv(z.z()).norm())
        },
        radii,
        angles,
        refine,
        &focus_angles(f),
    )
}

/// Per-radius suprema of the functional defining the selected space, for
/// little-o trend analysis. `M_α` profiles carry the root, i.e.
/// `(1 - |a|²)^α ‖f∘φ_a - f(a)‖`.
pub fn littleo_profile(f: &AnalyticFn, selector: SpaceSelector, radii: &[f64], tol: f64) -> Result<SupProfile> {
    let opts = NormOptions {
        tol,
        radii: radii.to_vec(),
        angles: DEFAULT_ANGLES,
        refine: false,
    };
    littleo_profile_with(f, selector, &opts)
}

pub fn littleo_profile_with(f: &AnalyticFn, selector: SpaceSelector, opts: &NormOptions) -> Result<SupProfile> {
    match selector {
        SpaceSelector::Mads { params, form } => {
            let est = mads_seminorm_with(f, params, form, None, opts)?;
            let mut prof = est.profile;
            let e = 1.0 / params.p;
            prof.values.iter_mut().for_each(|v| *v = v.max(0.0).powf(e));
            prof.global_sup = prof.global_sup.max(0.0).powf(e);
            prof.refined.iter_mut().for_each(|r| r.2 = r.2.max(0.0).powf(e));
            Ok(prof)
        }
        SpaceSelector::FFamily { p, q, s, log_weighted } => Ok(f_family_norm_with(f, p, q, s, log_weighted, opts)?.profile),
        SpaceSelector::Bloch { weight } => bloch_profile(f, weight, &opts.radii, opts.angles, opts.refine),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funclib::{make_test_function, TestFunctionSpec};
    use std::f64::consts::PI;

    fn e(n: u32) -> AnalyticFn {
        make_test_function(&TestFunctionSpec::Monomial { n }).unwrap()
    }

    #[test]
    fn dps_of_identity() {
        let r = dps_norm(&e(1), 2.0, 1.0, 1e-8).unwrap();
        assert!((r.value - (PI / 2.0).sqrt()).abs() < 1e-7);
        let r = dps_norm(&e(1), 2.0, 0.0, 1e-8).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-7);
        let c = AnalyticFn::constant(Complex64::new(-3.0, 4.0));
        assert!((dps_norm(&c, 2.0, 1.0, 1e-6).unwrap().value - 5.0).abs() < 1e-15);
        assert!(r.is_consistent());
    }

    #[test]
    fn constants_have_zero_seminorms() {
        let c = AnalyticFn::constant(Complex64::new(2.0, 0.0));
        let opts = NormOptions {
            radii: vec![0.0, 0.5, 0.9],
            angles: 4,
            ..Default::default()
        };
        for form in [NormForm::Invariant, NormForm::Box, NormForm::Kernel] {
            let r = mads_seminorm_with(&c, SpaceParams::new(2.0, 1.0, 0.0), form, None, &opts).unwrap();
            assert_eq!(r.value, 0.0);
        }
        assert_eq!(f_family_norm(&c, 2.0, 0.0, 1.0, false, 1e-6).unwrap().value, 0.0);
    }

    #[test]
    fn kernel_equals_invariant_with_matching_beta() {
        let f = make_test_function(&TestFunctionSpec::LogTest {
            w: DiskPoint::new(0.6, 0.3).unwrap(),
        })
        .unwrap();
        let params = SpaceParams::new(2.0, 1.0, 0.25);
        for a in [Complex64::new(0.0, 0.0), Complex64::new(0.5, -0.2), Complex64::from_polar(0.95, 2.0)] {
            let inv = mads_functional(&f, params, NormForm::Invariant, params.matching_beta(), a, 1e-9).unwrap();
            let ker = mads_functional(&f, params, NormForm::Kernel, params.matching_beta(), a, 1e-9).unwrap();
            assert!(((inv.value - ker.value) / ker.value).abs() < 1e-7, "{} vs {}", inv.value, ker.value);
        }
    }

    #[test]
    fn bloch_examples() {
        let r = weighted_bloch_norm(&e(1), BlochWeight::AlphaPower { alpha: 1.0 }, 1e-6).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.profile.attained_at.norm(), 0.0);
        let r = weighted_bloch_norm(&e(1), BlochWeight::Log, 1e-6).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        let log = make_test_function(&TestFunctionSpec::LogPole { angle: 0.0 }).unwrap();
        let r = weighted_bloch_norm(&log, BlochWeight::AlphaPower { alpha: 1.0 }, 1e-6).unwrap();
        assert!(r.value < 2.0 && r.value > 1.999, "{}", r.value);
    }

    #[test]
    fn f_family_rejects_bad_exponents() {
        assert!(f_family_norm(&e(1), 2.0, -2.5, 1.0, false, 1e-6).is_err());
        assert!(f_family_norm(&e(1), 2.0, 0.0, 0.0, false, 1e-6).is_err());
    }
}
