//! Analytic functions on the disk: truncated Taylor series, closed-form
//! evaluators, the test-function catalogue and a univalence probe.

mod catalogue;
mod taylor;
mod univalence;

pub use catalogue::{catalogue, make_test_function, TestFunctionSpec};
pub use taylor::TaylorSeries;
pub use univalence::{univalence_probe, UnivalenceReport};

use crate::disk::wrap_angle;
use crate::error::{Error, Result};
use crate::quadrature::Focus;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Default truncation order of Taylor forms.
pub const DEFAULT_ORDER: usize = 256;
/// Default working radius of Taylor forms.
pub const DEFAULT_R_MAX: f64 = 0.999;
/// Safety factor on `sup |g|` when composing Taylor forms.
pub const COMPOSITION_MARGIN: f64 = 0.999;

type Jet = dyn Fn(Complex64) -> (Complex64, Complex64) + Send + Sync;

#[derive(Clone)]
enum Repr {
    Taylor(TaylorSeries),
    Closed { label: String, jet: Arc<Jet> },
}

/// A holomorphic function on the disk, evaluable with its first derivative.
///
/// Closed forms are exact at every interior point; Taylor forms are valid on
/// `|z| ≤ r_max` up to their tail bound. `foci` lists boundary directions
/// where `|f'|` may concentrate, used to steer the area quadrature.
#[derive(Clone)]
pub struct AnalyticFn {
    repr: Repr,
    foci: Vec<Focus>,
}

impl fmt::Debug for AnalyticFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Taylor(t) => f
                .debug_struct("Taylor")
                .field("order", &t.order())
                .field("tail_bound", &t.tail_bound)
                .field("r_max", &t.r_max)
                .finish(),
            Repr::Closed { label, .. } => f.debug_tuple("Closed").field(label).finish(),
        }
    }
}

impl AnalyticFn {
    pub fn from_taylor(series: TaylorSeries) -> Self {
        AnalyticFn {
            repr: Repr::Taylor(series),
            foci: Vec::new(),
        }
    }

    /// Taylor form of a polynomial (zero tail, default working radius).
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        Ok(Self::from_taylor(TaylorSeries::new(coeffs, 0.0, DEFAULT_R_MAX)?))
    }

    /// Closed-form evaluator returning `(f(z), f'(z))`.
    pub fn closed_form<F>(label: impl Into<String>, jet: F) -> Self
    where
        F: Fn(Complex64) -> (Complex64, Complex64) + Send + Sync + 'static,
    {
        AnalyticFn {
            repr: Repr::Closed {
                label: label.into(),
                jet: Arc::new(jet),
            },
            foci: Vec::new(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::closed_form(format!("const({c})"), move |_| (c, Complex64::new(0.0, 0.0)))
    }

    pub fn identity() -> Self {
        Self::closed_form("z", |z| (z, Complex64::new(1.0, 0.0)))
    }

    pub fn with_foci(mut self, foci: impl IntoIterator<Item = Focus>) -> Self {
        self.foci.extend(foci);
        self
    }

    pub fn foci(&self) -> &[Focus] {
        &self.foci
    }

    pub fn label(&self) -> String {
        match &self.repr {
            Repr::Taylor(t) => format!("taylor[{}]", t.order()),
            Repr::Closed { label, .. } => label.clone(),
        }
    }

    pub fn taylor(&self) -> Option<&TaylorSeries> {
        match &self.repr {
            Repr::Taylor(t) => Some(t),
            Repr::Closed { .. } => None,
        }
    }

    pub fn is_taylor(&self) -> bool {
        self.taylor().is_some()
    }

    /// Radius up to which evaluation is trusted.
    pub fn r_max(&self) -> f64 {
        match &self.repr {
            Repr::Taylor(t) => t.r_max,
            Repr::Closed { .. } => 1.0,
        }
    }

    #[inline]
    pub fn jet(&self, z: Complex64) -> (Complex64, Complex64) {
        match &self.repr {
            Repr::Taylor(t) => t.jet(z),
            Repr::Closed { jet, .. } => jet(z),
        }
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.jet(z).0
    }

    #[inline]
    pub fn deriv(&self, z: Complex64) -> Complex64 {
        self.jet(z).1
    }

    /// Closed-form view of `self` (Taylor forms are wrapped, not re-expanded).
    fn jet_fn(&self) -> Arc<Jet> {
        match &self.repr {
            Repr::Closed { jet, .. } => jet.clone(),
            Repr::Taylor(t) => {
                let t = t.clone();
                Arc::new(move |z| t.jet(z))
            }
        }
    }

    /// `Σ c_k f_k` as a closed form.
    pub fn linear_combination(terms: &[(Complex64, AnalyticFn)]) -> Self {
        let parts: Vec<(Complex64, Arc<Jet>)> = terms.iter().map(|(c, f)| (*c, f.jet_fn())).collect();
        let label = terms.iter().map(|(c, f)| format!("({c})*{}", f.label())).collect::<Vec<_>>().join(" + ");
        let foci = terms.iter().flat_map(|(_, f)| f.foci.iter().copied()).collect::<Vec<_>>();
        Self::closed_form(label, move |z| {
            let mut v = Complex64::new(0.0, 0.0);
            let mut d = Complex64::new(0.0, 0.0);
            for (c, jet) in &parts {
                let (fv, fd) = jet(z);
                v += c * fv;
                d += c * fd;
            }
            (v, d)
        })
        .with_foci(foci)
    }

    /// `self - other`.
    pub fn minus(&self, other: &AnalyticFn) -> Self {
        Self::linear_combination(&[(Complex64::new(1.0, 0.0), self.clone()), (Complex64::new(-1.0, 0.0), other.clone())])
    }

    /// `self · other`.
    pub fn times(&self, other: &AnalyticFn) -> Self {
        let (a, b) = (self.jet_fn(), other.jet_fn());
        let foci = self.foci.iter().chain(&other.foci).copied().collect::<Vec<_>>();
        Self::closed_form(format!("{}*{}", self.label(), other.label()), move |z| {
            let (av, ad) = a(z);
            let (bv, bd) = b(z);
            (av * bv, ad * bv + av * bd)
        })
        .with_foci(foci)
    }

    /// `f ∘ φ` as a closed form with the chain rule; foci of `f` are pulled
    /// back through `φ` by a boundary search.
    pub fn compose_closed(&self, phi: &AnalyticFn) -> Self {
        let (f, g) = (self.jet_fn(), phi.jet_fn());
        let mut foci: Vec<Focus> = phi.foci.clone();
        for focus in &self.foci {
            if let Some(pulled) = pull_back_focus(phi, *focus) {
                foci.push(pulled);
            }
        }
        Self::closed_form(format!("{}∘{}", self.label(), phi.label()), move |z| {
            let (gv, gd) = g(z);
            let (fv, fd) = f(gv);
            (fv, fd * gd)
        })
        .with_foci(foci)
    }
}

/// Finds the boundary direction that `φ` sends closest to the focus of `f`.
fn pull_back_focus(phi: &AnalyticFn, focus: Focus) -> Option<Focus> {
    let target = Complex64::from_polar(1.0, focus.angle);
    let r = 0.999_f64.min(phi.r_max());
    let n = 256;
    let dist = |t: f64| (phi.eval(Complex64::from_polar(r, t)) - target).norm();
    let (mut best_t, mut best_d) = (0.0, f64::INFINITY);
    for k in 0..n {
        let t = std::f64::consts::TAU * k as f64 / n as f64;
        let d = dist(t);
        if d < best_d {
            best_d = d;
            best_t = t;
        }
    }
    // golden-section polish on the bracketing cell
    let h = std::f64::consts::TAU / n as f64;
    let (mut lo, mut hi) = (best_t - h, best_t + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if dist(m1) < dist(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    let d = dist(t);
    if d > 0.1 {
        return None;
    }
    Some(Focus::new(wrap_angle(t), focus.width.max(1.0 - r).max(d)))
}

/// `f ∘ g` for Taylor forms, truncated to the order of `f`.
///
/// `g` must map its working disk into `𝔻`; the result's working radius is
/// the largest `r ≤ r_max(g)` with `sup_{|z| = r} |g| ≤ 0.999 · r_max(f)`.
pub fn taylor_compose(f: &AnalyticFn, g: &AnalyticFn) -> Result<AnalyticFn> {
    let (Some(tf), Some(tg)) = (f.taylor(), g.taylor()) else {
        return Err(Error::invalid("taylor_compose needs two Taylor forms"));
    };
    let n = tf.order().max(tg.order());
    let allowed = COMPOSITION_MARGIN * tf.r_max;
    let sup_at = |r: f64| sup_on_circle(tg, r) + tg.tail_bound;
    let sup_g = sup_at(tg.r_max);
    if sup_g >= 1.0 || tg.coeffs[0].norm() + tg.tail_bound > allowed {
        return Err(Error::CompositionRadius { reached: sup_g, allowed });
    }
    // shrink the working radius until g stays inside the trusted disk of f
    let mut r = tg.r_max;
    if sup_g > allowed {
        let (mut lo, mut hi) = (0.0, tg.r_max);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if sup_at(mid) <= allowed {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        r = lo;
        if r <= 0.0 {
            return Err(Error::CompositionRadius { reached: sup_g, allowed });
        }
    }
    let sup_g = sup_at(r);
    let gc = &tg.coeffs;
    let mut acc = vec![Complex64::new(0.0, 0.0); n + 1];
    for c in tf.coeffs.iter().rev() {
        acc = taylor::mul_trunc(&acc, gc, n);
        acc[0] += c;
    }
    // tail: f's own tail, g's tail through the Lipschitz constant of f, and
    // a geometric estimate of the discarded orders
    let lip = sup_deriv_on_disk(tf, sup_g.min(tf.r_max));
    let last: f64 = acc.iter().rev().take(8).map(|c| c.norm()).fold(0.0, f64::max);
    let trunc = last * r.powi(n as i32) / (1.0 - r);
    let tail = tf.tail_bound + lip * tg.tail_bound + trunc;
    Ok(AnalyticFn::from_taylor(TaylorSeries::new(acc, tail, r)?))
}

fn sup_on_circle(t: &TaylorSeries, r: f64) -> f64 {
    (0..512)
        .map(|k| t.jet(Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / 512.0)).0.norm())
        .fold(0.0, f64::max)
}

fn sup_deriv_on_disk(t: &TaylorSeries, r: f64) -> f64 {
    (0..512)
        .map(|k| t.jet(Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / 512.0)).1.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn compose_with_identity_either_side() {
        let g = AnalyticFn::polynomial(vec![c(0.1, 0.0), c(0.3, 0.1), c(0.0, 0.2)]).unwrap();
        let e1 = AnalyticFn::polynomial(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let left = taylor_compose(&e1, &g).unwrap();
        let right = taylor_compose(&g, &e1).unwrap();
        for k in 0..3 {
            assert!((left.taylor().unwrap().coeffs[k] - g.taylor().unwrap().coeffs[k]).norm() < 1e-15);
            assert!((right.taylor().unwrap().coeffs[k] - g.taylor().unwrap().coeffs[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn square_of_half() {
        let e2 = AnalyticFn::polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let half = AnalyticFn::polynomial(vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let h = taylor_compose(&e2, &half).unwrap();
        let co = &h.taylor().unwrap().coeffs;
        assert_eq!(co[0], c(0.0, 0.0));
        assert_eq!(co[1], c(0.0, 0.0));
        assert!((co[2] - c(0.25, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn composition_radius_is_enforced() {
        let f = AnalyticFn::polynomial(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let g = AnalyticFn::polynomial(vec![c(0.0, 0.0), c(1.2, 0.0)]).unwrap();
        assert!(matches!(taylor_compose(&f, &g), Err(Error::CompositionRadius { .. })));
    }

    #[test]
    fn closed_composition_chain_rule() {
        let f = AnalyticFn::closed_form("exp", |z: Complex64| (z.exp(), z.exp()));
        let g = AnalyticFn::closed_form("sq", |z: Complex64| (z * z, 2.0 * z));
        let h = f.compose_closed(&g);
        let z = c(0.3, -0.4);
        let (v, d) = h.jet(z);
        assert!((v - (z * z).exp()).norm() < 1e-15);
        assert!((d - 2.0 * z * (z * z).exp()).norm() < 1e-15);
    }

    #[test]
    fn focus_pullback_through_rotation() {
        let f = AnalyticFn::identity().with_foci([Focus::new(0.0, 1e-3)]);
        let rot = AnalyticFn::closed_form("rot", |z: Complex64| {
            let e = Complex64::from_polar(1.0, 0.5);
            (e * z, e)
        });
        let h = f.compose_closed(&rot);
        assert!(h.foci().iter().any(|fo| (fo.angle + 0.5).abs() < 1e-6));
    }

    proptest! {
        #[test]
        fn taylor_derivative_matches_finite_differences(
            coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..30),
            r in 0.0f64..0.9, t in 0.0f64..std::f64::consts::TAU,
        ) {
            let f = AnalyticFn::polynomial(coeffs.iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
            let z = Complex64::from_polar(r, t);
            let fd = |h: f64| ((f.eval(z + h) - f.eval(z - h)) / (2.0 * h) - f.deriv(z)).norm();
            let (e3, e4) = (fd(1e-3), fd(1e-4));
            // central differences are second order above the roundoff floor
            if e4 > 1e-9 {
                prop_assert!((e3 / e4).log10() >= 1.9);
            }
        }

        #[test]
        fn taylor_value_at_zero_is_first_coefficient(re in -5.0f64..5.0, im in -5.0f64..5.0) {
            let f = AnalyticFn::polynomial(vec![c(re, im), c(1.0, 2.0)]).unwrap();
            prop_assert_eq!(f.eval(c(0.0, 0.0)), c(re, im));
        }
    }
}
