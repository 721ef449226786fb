use super::{ode, GeneratorSpec};
use crate::disk::{pseudo_hyperbolic, BoundaryPoint, ClosedDiskPoint, DiskPoint};
use crate::error::{Error, Result};
use crate::funclib::AnalyticFn;
use crate::quadrature::gauss::integrate_adaptive;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Horizon of the long-time flow used to locate boundary Denjoy–Wolff points.
pub const T_MAX: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemigroupKind {
    Elliptic,
    NonElliptic,
    Trivial,
}

/// Denjoy–Wolff data of a semigroup.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemigroupClass {
    pub kind: SemigroupKind,
    pub dw_point: ClosedDiskPoint,
    /// `-G'(τ)`, elliptic only.
    pub lambda: Option<Complex64>,
    /// False for rotation groups (`Re λ = 0`) and the trivial semigroup.
    pub attracting: bool,
}

impl SemigroupClass {
    fn tau(&self) -> Complex64 {
        self.dw_point.z()
    }
}

fn coarse_grid() -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for &r in &[0.3, 0.6, 0.85, 0.95] {
        pts.extend((0..12).map(|k| Complex64::from_polar(r, TAU * k as f64 / 12.0)));
    }
    pts
}

fn is_trivial(spec: &GeneratorSpec) -> bool {
    coarse_grid().iter().all(|&z| spec.eval(z).norm() < 1e-14)
}

fn newton(spec: &GeneratorSpec, mut z: Complex64) -> Option<Complex64> {
    for _ in 0..100 {
        let (g, dg) = spec.generator().jet(z);
        if g.norm() < 1e-15 {
            break;
        }
        if dg.norm() == 0.0 || !dg.re.is_finite() {
            return None;
        }
        let dz = -g / dg;
        let mut damp = 1.0;
        let mut next = z + dz;
        for _ in 0..30 {
            if next.norm() < 1.0 && spec.eval(next).norm() < g.norm() {
                break;
            }
            damp *= 0.5;
            next = z + damp * dz;
        }
        if next.norm() >= 1.0 {
            return None;
        }
        let step = (next - z).norm();
        z = next;
        if step < 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    // a simple zero well inside; double zeros creeping to the boundary are
    // boundary fixed points, not Denjoy–Wolff points inside
    (z.norm() < 0.9999 && spec.eval(z).norm() < 1e-12 && spec.deriv(z).norm() > 1e-8).then_some(z)
}

/// Interior zeros of `G` reached by damped Newton from a coarse grid,
/// deduplicated.
fn interior_zeros(spec: &GeneratorSpec) -> Vec<Complex64> {
    let mut zeros: Vec<Complex64> = Vec::new();
    for z0 in coarse_grid() {
        if let Some(z) = newton(spec, z0) {
            if zeros.iter().all(|w| (w - z).norm() > 1e-8) {
                zeros.push(z);
            }
        }
    }
    zeros
}

pub(super) fn interior_zero(spec: &GeneratorSpec) -> Option<Complex64> {
    if let Some(bp) = spec.berkson_porta() {
        return match bp.tau {
            ClosedDiskPoint::Interior(t) => Some(t.z()),
            ClosedDiskPoint::Boundary(_) => None,
        };
    }
    interior_zeros(spec).into_iter().min_by(|a, b| a.norm().total_cmp(&b.norm()))
}

/// Elliptic when `G` has an interior zero (found by damped Newton), else
/// non-elliptic with the boundary point the flow of `0` converges to.
pub fn classify(spec: &GeneratorSpec) -> Result<SemigroupClass> {
    if is_trivial(spec) {
        return Ok(SemigroupClass {
            kind: SemigroupKind::Trivial,
            dw_point: ClosedDiskPoint::Interior(DiskPoint::ORIGIN),
            lambda: Some(Complex64::new(0.0, 0.0)),
            attracting: false,
        });
    }
    if let Some(tau) = interior_zero(spec) {
        let lambda = -spec.deriv(tau);
        if lambda.re < -1e-9 {
            return Err(Error::invalid(format!(
                "zero {tau} of G is repelling (λ = {lambda}); not an infinitesimal generator"
            )));
        }
        return Ok(SemigroupClass {
            kind: SemigroupKind::Elliptic,
            dw_point: ClosedDiskPoint::Interior(DiskPoint::from_complex(tau)?),
            lambda: Some(lambda),
            attracting: lambda.re > 1e-12,
        });
    }
    if let Some(bp) = spec.berkson_porta() {
        return Ok(SemigroupClass {
            kind: SemigroupKind::NonElliptic,
            dw_point: bp.tau,
            lambda: None,
            attracting: true,
        });
    }

    let ladder: Vec<f64> = (0..7).rev().map(|k| T_MAX / f64::from(1 << k)).collect();
    let mut tail = Vec::new();
    let (mut t, mut x) = (0.0, Complex64::new(0.0, 0.0));
    for &tk in &ladder {
        match ode::dopri5(|y| [spec.eval(y[0])], [x], tk - t, 1e-10) {
            Ok(out) => {
                x = out.y[0];
                t = tk;
                tail.push((t, x));
            }
            Err(Error::StepUnderflow { t: dt, x: xs }) if xs.norm() > 1.0 - 1e-6 => {
                tail.push((t + dt, xs));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let n = tail.len();
    let settled = n >= 3 && {
        let (a, b, c) = (tail[n - 3].1, tail[n - 2].1, tail[n - 1].1);
        let increasing = a.norm() < b.norm() && b.norm() < c.norm();
        let turn = (b / b.norm() - c / c.norm()).norm();
        increasing && c.norm() > 0.9 && turn < 0.05
    };
    if !settled {
        return Err(Error::Ambiguous { tail });
    }
    Ok(SemigroupClass {
        kind: SemigroupKind::NonElliptic,
        dw_point: ClosedDiskPoint::Boundary(BoundaryPoint::from_complex(tail[n - 1].1)?),
        lambda: None,
        attracting: true,
    })
}

/// Outcome of [`validate_generator`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorValidation {
    pub valid: bool,
    pub min_re_p: f64,
    pub tau: ClosedDiskPoint,
    /// Grid points skipped inside the ball `δ(z, τ) < 0.1`.
    pub excluded: usize,
}

/// Polar grid `{0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99} × 32` angles.
pub fn default_validation_grid() -> Vec<DiskPoint> {
    let mut g = Vec::new();
    for &r in &[0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99] {
        for k in 0..32 {
            g.push(DiskPoint::from_polar(r, TAU * (k as f64 + 0.5) / 32.0).expect("grid inside disk"));
        }
    }
    g
}

/// Recovers `p = G / ((τ̄z - 1)(z - τ))` on `grid` and checks `Re p ≥ 0`
/// (up to `1e-9`).
pub fn validate_generator(spec: &GeneratorSpec, grid: &[DiskPoint]) -> Result<GeneratorValidation> {
    let tau = match spec.berkson_porta() {
        Some(bp) => bp.tau,
        None => match interior_zero(spec) {
            Some(t) => ClosedDiskPoint::Interior(DiskPoint::from_complex(t)?),
            None => classify(spec)?.dw_point,
        },
    };
    let tz = tau.z();
    let one = Complex64::new(1.0, 0.0);
    let mut min_re_p = f64::INFINITY;
    let mut excluded = 0;
    for z in grid {
        let z = z.z();
        if tau.is_interior() && pseudo_hyperbolic(z, tz) < 0.1 {
            excluded += 1;
            continue;
        }
        let d = (tz.conj() * z - one) * (z - tz);
        if d.norm() < 1e-300 {
            excluded += 1;
            continue;
        }
        min_re_p = min_re_p.min((spec.eval(z) / d).re);
    }
    Ok(GeneratorValidation {
        valid: min_re_p >= -1e-9,
        min_re_p,
        tau,
        excluded,
    })
}

fn segment_integral(q: &(impl Fn(Complex64) -> Complex64 + ?Sized), from: Complex64, to: Complex64, tol: f64) -> Complex64 {
    let d = to - from;
    if d.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = integrate_adaptive(|u| q(from + u * d) * d, 0.0, 1.0, 2, tol * 1e-2, tol, 4000);
    if r.converged {
        r.value
    } else {
        Complex64::new(f64::NAN, f64::NAN)
    }
}

fn check_no_other_zero(spec: &GeneratorSpec, tau: Option<Complex64>) -> Result<()> {
    for z in interior_zeros(spec) {
        if tau.is_none_or(|t| (z - t).norm() > 1e-6) {
            return Err(Error::PathThroughZero(z));
        }
    }
    Ok(())
}

fn require_resolved(class: &SemigroupClass) -> Result<()> {
    if class.kind == SemigroupKind::Trivial {
        return Err(Error::invalid("the trivial semigroup has no Koenigs map"));
    }
    Ok(())
}

/// Koenigs map, normalized by `h(τ) = 0`, `h'(τ) = 1` (elliptic) or
/// `h(0) = 0`, `h' = i/G` (non-elliptic).
///
/// Elliptic maps are evaluated as `h(z) = (z - τ) exp(∫_τ^z q)` with
/// `q = -λ/G - 1/(ζ - τ)` regular at `τ`, integrated on the segment.
pub fn koenigs_map(spec: &GeneratorSpec, class: &SemigroupClass, tol: f64) -> Result<AnalyticFn> {
    require_resolved(class)?;
    let s = spec.clone();
    let label = format!("h[{}]", spec.name);
    match class.kind {
        SemigroupKind::Elliptic => {
            let tau = class.tau();
            let lambda = class.lambda.ok_or_else(|| Error::invalid("elliptic class without λ"))?;
            check_no_other_zero(spec, Some(tau))?;
            Ok(AnalyticFn::closed_form(label, move |z| {
                let w = z - tau;
                if w.norm() < 1e-14 {
                    return (w, Complex64::new(1.0, 0.0));
                }
                let q = |zeta: Complex64| -lambda / s.eval(zeta) - 1.0 / (zeta - tau);
                let e = segment_integral(&q, tau, z, tol).exp();
                (w * e, e * (-lambda * w / s.eval(z)))
            }))
        }
        _ => {
            check_no_other_zero(spec, None)?;
            let i = Complex64::i();
            let zero = Complex64::new(0.0, 0.0);
            Ok(AnalyticFn::closed_form(label, move |z| {
                let q = |zeta: Complex64| i / s.eval(zeta);
                (segment_integral(&q, zero, z, tol), i / s.eval(z))
            }))
        }
    }
}

/// `γ(z) = ∫_τ^z (ζ - τ)/G(ζ) dζ` (elliptic); the Koenigs map otherwise.
pub fn gamma_symbol(spec: &GeneratorSpec, class: &SemigroupClass, tol: f64) -> Result<AnalyticFn> {
    require_resolved(class)?;
    if class.kind != SemigroupKind::Elliptic {
        return koenigs_map(spec, class, tol);
    }
    let tau = class.tau();
    check_no_other_zero(spec, Some(tau))?;
    let s = spec.clone();
    let at_tau = 1.0 / spec.deriv(tau);
    Ok(AnalyticFn::closed_form(format!("gamma[{}]", spec.name), move |z| {
        let w = z - tau;
        let ratio = |zeta: Complex64| {
            let d = zeta - tau;
            if d.norm() < 1e-14 {
                at_tau
            } else {
                d / s.eval(zeta)
            }
        };
        (segment_integral(&ratio, tau, z, tol), if w.norm() < 1e-14 { at_tau } else { ratio(z) })
    }))
}

#[cfg(test)]
mod tests {
    use super::super::{flow, generator_by_name, generator_catalogue};
    use super::*;

    fn closed(label: &str, f: impl Fn(Complex64) -> (Complex64, Complex64) + Send + Sync + 'static) -> GeneratorSpec {
        GeneratorSpec::from_generator(label, AnalyticFn::closed_form(label, f))
    }

    fn pts() -> Vec<Complex64> {
        (0..12).map(|k| Complex64::from_polar(0.1 + 0.07 * k as f64, 1.3 * k as f64)).collect()
    }

    #[test]
    fn classify_examples() {
        let c = classify(&generator_by_name("neg_z").unwrap()).unwrap();
        assert_eq!(c.kind, SemigroupKind::Elliptic);
        assert!(c.dw_point.z().norm() < 1e-14);
        assert!((c.lambda.unwrap() - 1.0).norm() < 1e-14);

        let c = classify(&generator_by_name("rotation").unwrap()).unwrap();
        assert_eq!(c.kind, SemigroupKind::Elliptic);
        assert!((c.lambda.unwrap() + Complex64::i()).norm() < 1e-14);
        assert!(!c.attracting);

        // closed form alone: boundary point found from the long-time flow
        let one = Complex64::new(1.0, 0.0);
        let par = closed("(1-z)^2", move |z| ((one - z) * (one - z), -2.0 * (one - z)));
        let c = classify(&par).unwrap();
        assert_eq!(c.kind, SemigroupKind::NonElliptic);
        assert!((c.dw_point.z() - one).norm() < 1e-9);

        let hyp = closed("(1-z^2)/2", move |z| (0.5 * (one - z * z), -z));
        let c = classify(&hyp).unwrap();
        assert!((c.dw_point.z() - one).norm() < 1e-9);

        let zero = GeneratorSpec::linear("0", Complex64::new(0.0, 0.0));
        assert_eq!(classify(&zero).unwrap().kind, SemigroupKind::Trivial);

        let off = closed("-(z-0.5)", move |z| (-(z - 0.5), -one));
        let c = classify(&off).unwrap();
        assert!((c.dw_point.z() - 0.5).norm() < 1e-12);
    }

    #[test]
    fn repelling_zero_rejected() {
        let g = closed("z", |z| (z, Complex64::new(1.0, 0.0)));
        assert!(classify(&g).is_err());
    }

    #[test]
    fn validation_examples() {
        let v = validate_generator(&generator_by_name("neg_z").unwrap(), &default_validation_grid()).unwrap();
        assert!(v.valid && (v.min_re_p - 1.0).abs() < 1e-12);
        let g = closed("z", |z| (z, Complex64::new(1.0, 0.0)));
        let v = validate_generator(&g, &default_validation_grid()).unwrap();
        assert!(!v.valid && (v.min_re_p + 1.0).abs() < 1e-12);
        let v = validate_generator(&generator_by_name("parabolic").unwrap(), &default_validation_grid()).unwrap();
        assert!(v.valid && (v.min_re_p - 1.0).abs() < 1e-12);
        assert!(!v.tau.is_interior());
        for spec in generator_catalogue().unwrap() {
            assert!(validate_generator(&spec, &default_validation_grid()).unwrap().valid, "{}", spec.name);
        }
    }

    #[test]
    fn koenigs_examples() {
        let spec = generator_by_name("neg_z").unwrap();
        let h = koenigs_map(&spec, &classify(&spec).unwrap(), 1e-12).unwrap();
        for z in pts() {
            assert!((h.eval(z) - z).norm() < 1e-12);
            assert!((h.deriv(z) - 1.0).norm() < 1e-12);
        }
        let spec = generator_by_name("parabolic").unwrap();
        let h = koenigs_map(&spec, &classify(&spec).unwrap(), 1e-12).unwrap();
        let one = Complex64::new(1.0, 0.0);
        for z in pts() {
            let exact = Complex64::i() * z / (one - z);
            assert!((h.eval(z) - exact).norm() < 1e-10 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn koenigs_functional_equations_on_catalogue() {
        for spec in generator_catalogue().unwrap() {
            let class = classify(&spec).unwrap();
            let h = koenigs_map(&spec, &class, 1e-12).unwrap();
            for z in pts() {
                for t in [0.1, 1.0] {
                    let ft = flow(&spec, DiskPoint::from_complex(z).unwrap(), t, 1e-12).unwrap().value.z();
                    let lhs = h.eval(ft);
                    let rhs = match class.lambda {
                        Some(l) => (-l * t).exp() * h.eval(z),
                        None => h.eval(z) + Complex64::i() * t,
                    };
                    assert!((lhs - rhs).norm() < 1e-6, "{} z={z} t={t}: {}", spec.name, (lhs - rhs).norm());
                }
            }
        }
    }

    #[test]
    fn gamma_examples() {
        let spec = generator_by_name("neg_z").unwrap();
        let g = gamma_symbol(&spec, &classify(&spec).unwrap(), 1e-12).unwrap();
        let one = Complex64::new(1.0, 0.0);
        for z in pts() {
            assert!((g.eval(z) + z).norm() < 1e-12);
        }
        let spec = generator_by_name("logistic").unwrap();
        let g = gamma_symbol(&spec, &classify(&spec).unwrap(), 1e-12).unwrap();
        for z in pts() {
            assert!((g.eval(z) - (one - z).ln()).norm() < 1e-11);
            assert!((g.deriv(z) + one / (one - z)).norm() < 1e-11);
        }
        let spec = generator_by_name("parabolic").unwrap();
        let g = gamma_symbol(&spec, &classify(&spec).unwrap(), 1e-12).unwrap();
        for z in pts() {
            assert!((g.eval(z) - Complex64::i() * z / (one - z)).norm() < 1e-10);
        }
        let zero = GeneratorSpec::linear("0", Complex64::new(0.0, 0.0));
        assert!(gamma_symbol(&zero, &classify(&zero).unwrap(), 1e-10).is_err());
    }
}
