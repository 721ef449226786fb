//! Built-in self-checks against closed forms and known identities.

use crate::disk::{mobius_jet, DiskPoint};
use crate::error::{Error, Result};
use crate::funclib::{catalogue, make_test_function, AnalyticFn, TestFunctionSpec};
use crate::operators::{strong_continuity_curve, volterra_apply, witness_construct, WitnessGrids};
use crate::quadrature::{fit_loglog_slope, DEFAULT_RADII};
use crate::semigroup::{bloch_condition_profile, classify, flow, generator_by_name, koenigs_map, GeneratorSpec};
use crate::spaces::{admissible_check, dps_norm, mads_seminorm, mads_seminorm_with, Classification, NormForm, NormOptions, SpaceParams};
use crate::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Smoke,
    Full,
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Level::Smoke),
            "full" => Ok(Level::Full),
            other => Err(Error::Unknown {
                kind: "verify level",
                name: other.into(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub level: Level,
    /// Multiplies every quadrature tolerance used by the checks.
    pub tol_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            level: Level::Smoke,
            tol_scale: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    /// One human-readable line.
    pub fn line(&self) -> String {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        format!(
            "[{tag}] {:>2} {} ({:.2}s / {:.0}s): {}",
            self.id, self.name, self.seconds, self.budget_seconds, self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub level: Level,
    pub tol_scale: f64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// `(id, name, time budget in seconds, lowest level that runs it)`.
pub const CHECKS: [(u32, &str, f64, Level); 11] = [
    (1, "mobius involution and schwarz-pick identity", 1.0, Level::Smoke),
    (2, "flow against closed forms and semigroup law", 10.0, Level::Smoke),
    (3, "koenigs conjugation", 10.0, Level::Smoke),
    (4, "norm oracle for e_1", 30.0, Level::Smoke),
    (5, "equivalence of invariant, box and kernel forms", 300.0, Level::Full),
    (6, "test-function plateau in M_0(D^2_1)", 120.0, Level::Full),
    (7, "vanishing bloch condition classifier", 30.0, Level::Smoke),
    (8, "strong-continuity dichotomy", 300.0, Level::Full),
    (9, "volterra identities", 30.0, Level::Smoke),
    (10, "witness construction for the koenigs log", 600.0, Level::Full),
    (11, "admissibility truth table", 1.0, Level::Smoke),
];

pub fn verify_suite(level: Level) -> VerifySummary {
    verify_suite_with(VerifyOptions { level, tol_scale: 1.0 })
}

pub fn verify_suite_with(opts: VerifyOptions) -> VerifySummary {
    let checks: Vec<CheckResult> = CHECKS.iter().filter(|c| c.3 <= opts.level).map(|c| run_check(c.0, opts.tol_scale)).collect();
    let passed = checks.iter().all(CheckResult::passed);
    VerifySummary {
        level: opts.level,
        tol_scale: opts.tol_scale,
        checks,
        passed,
    }
}

/// Runs check `id`; numeric errors become failures with the error text.
///
/// # Panics
/// On an unknown id.
pub fn run_check(id: u32, tol_scale: f64) -> CheckResult {
    let &(_, name, budget, _) = CHECKS.iter().find(|c| c.0 == id).expect("known check id");
    let start = Instant::now();
    let outcome = match id {
        1 => mobius(),
        2 => flows(),
        3 => koenigs(),
        4 => norm_oracle(tol_scale),
        5 => equivalence(tol_scale),
        6 => plateau(tol_scale),
        7 => bloch(),
        8 => continuity(tol_scale),
        9 => volterra(tol_scale),
        10 => witness(tol_scale),
        11 => admissibility(),
        _ => unreachable!(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (ok, mut detail) = match outcome {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let ok = ok && seconds <= budget;
    if seconds > budget {
        detail.push_str("; over time budget");
    }
    CheckResult {
        id,
        name: name.into(),
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        detail,
        seconds,
        budget_seconds: budget,
    }
}

type Outcome = Result<(bool, String)>;
type ClosedFlow = Box<dyn Fn(Complex64, f64) -> Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 50 points on a sunflower spiral inside `|z| ≤ r_max`.
fn spiral(r_max: f64) -> Vec<DiskPoint> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..50)
        .map(|k| DiskPoint::from_polar(r_max * ((k as f64 + 0.5) / 50.0).sqrt(), k as f64 * golden).expect("interior"))
        .collect()
}

fn random_point(rng: &mut StdRng, r_max: f64) -> Complex64 {
    Complex64::from_polar(r_max * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU))
}

fn mobius() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = DiskPoint::from_complex(random_point(&mut rng, 0.99))?;
        let z = random_point(&mut rng, 0.99);
        let (w, dw) = mobius_jet(a, z);
        let back = mobius_jet(a, w).0;
        let lhs = 1.0 - w.norm_sqr();
        let rhs = (1.0 - a.norm_sqr()) * (1.0 - z.norm_sqr()) / (c(1.0, 0.0) - a.z().conj() * z).norm_sqr();
        let sp = dw.norm() * (1.0 - z.norm_sqr()) - lhs;
        worst = worst.max((back - z).norm()).max((lhs - rhs).abs()).max(sp.abs());
    }
    Ok((worst < 1e-12, format!("max residual {worst:.3e} over 1000 pairs")))
}

fn flows() -> Outcome {
    let neg_z = generator_by_name("neg_z")?;
    let parabolic = generator_by_name("parabolic")?;
    let one = c(1.0, 0.0);
    let exact: [(&GeneratorSpec, ClosedFlow); 2] = [
        (&neg_z, Box::new(|z, t| (-t).exp() * z)),
        (&parabolic, Box::new(move |z, t| (z + t * (one - z)) / (one + t * (one - z)))),
    ];
    let tol = 1e-12;
    let mut err = 0.0f64;
    let mut law = 0.0f64;
    for (spec, phi) in &exact {
        for &z in &spiral(0.95) {
            for t in [0.1, 0.5, 1.0] {
                err = err.max((flow(spec, z, t, tol)?.value.z() - phi(z.z(), t)).norm());
            }
            let half = flow(spec, z, 0.5, tol)?.value;
            let twice = flow(spec, half, 0.5, tol)?.value.z();
            law = law.max((twice - flow(spec, z, 1.0, tol)?.value.z()).norm());
        }
    }
    Ok((err < 1e-8 && law < 1e-7, format!("max error {err:.3e}, semigroup residual {law:.3e}")))
}

fn koenigs() -> Outcome {
    let tol = 1e-10;
    let t = 0.5;
    let elliptic = generator_by_name("neg_2z")?;
    let class = classify(&elliptic)?;
    let lambda = class.lambda.ok_or_else(|| Error::invalid("elliptic class without lambda"))?;
    let h = koenigs_map(&elliptic, &class, tol)?;
    let mut e1 = 0.0f64;
    for &z in &spiral(0.9) {
        let w = flow(&elliptic, z, t, 1e-12)?.value.z();
        e1 = e1.max((h.eval(w) - (-lambda * t).exp() * h.eval(z.z())).norm());
    }
    let parabolic = generator_by_name("parabolic")?;
    let class = classify(&parabolic)?;
    let h = koenigs_map(&parabolic, &class, tol)?;
    let mut e2 = 0.0f64;
    for &z in &spiral(0.9) {
        let w = flow(&parabolic, z, t, 1e-12)?.value.z();
        e2 = e2.max((h.eval(w) - h.eval(z.z()) - c(0.0, t)).norm());
    }
    Ok((e1 < 1e-6 && e2 < 1e-6, format!("elliptic residual {e1:.3e}, parabolic residual {e2:.3e}")))
}

/// `(1 - |a|²)² π Σ (k+1)/(k+2) |a|^{2k}`, the invariant functional of `e_1`.
fn e1_series(r: f64) -> f64 {
    let x = r * r;
    let mut sum = 0.0;
    let mut xk = 1.0;
    for k in 0..20_000 {
        let kf = k as f64;
        sum += (kf + 1.0) / (kf + 2.0) * xk;
        xk *= x;
        if xk < 1e-18 {
            break;
        }
    }
    (1.0 - x).powi(2) * std::f64::consts::PI * sum
}

fn norm_oracle(tol_scale: f64) -> Outcome {
    let e1 = make_test_function(&TestFunctionSpec::Monomial { n: 1 })?;
    let target = std::f64::consts::FRAC_PI_2.sqrt();
    let dps = dps_norm(&e1, 2.0, 1.0, 1e-8 * tol_scale)?.value;
    let mads = mads_seminorm(&e1, SpaceParams::new(2.0, 1.0, 0.0), NormForm::Invariant, None, 1e-6 * tol_scale)?.value;
    let grid: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
    let at_zero = e1_series(0.0);
    let series_max = grid.iter().all(|&r| e1_series(r) <= at_zero * (1.0 + 1e-12));
    let rd = (dps - target).abs() / target;
    let rm = (mads - target).abs() / target;
    Ok((
        rd < 1e-3 && rm < 5e-3 && series_max,
        format!("dps rel {rd:.2e}, seminorm rel {rm:.2e}, series sup at 0: {series_max}"),
    ))
}

fn equivalence(tol_scale: f64) -> Outcome {
    let base = NormOptions {
        tol: 1e-4 * tol_scale,
        radii: DEFAULT_RADII.to_vec(),
        angles: 16,
        refine: false,
    };
    let fine = NormOptions {
        tol: base.tol / 10.0,
        angles: base.angles * 2,
        ..base.clone()
    };
    let ratios = |f: &AnalyticFn, q: SpaceParams, o: &NormOptions| -> Result<(f64, f64)> {
        let inv = mads_seminorm_with(f, q, NormForm::Invariant, None, o)?.value;
        let bx = mads_seminorm_with(f, q, NormForm::Box, None, o)?.value;
        let ker = mads_seminorm_with(f, q, NormForm::Kernel, None, o)?.value;
        Ok((inv / bx, ker / bx))
    };
    let (mut lo, mut hi, mut shift) = (f64::INFINITY, 0.0f64, 0.0f64);
    for q in [
        SpaceParams::new(2.0, 1.0, 0.0),
        SpaceParams::new(2.0, 1.0, 0.25),
        SpaceParams::new(3.0, 1.5, 0.0),
    ] {
        for (_, spec) in catalogue() {
            let f = make_test_function(&spec)?;
            let (a, b) = ratios(&f, q, &base)?;
            let (a2, b2) = ratios(&f, q, &fine)?;
            lo = lo.min(a).min(b);
            hi = hi.max(a).max(b);
            shift = shift.max((a2 / a - 1.0).abs()).max((b2 / b - 1.0).abs());
        }
    }
    Ok((
        lo >= 1.0 / 50.0 && hi <= 50.0 && shift < 0.1,
        format!("ratios in [{lo:.3}, {hi:.3}], max refinement shift {:.2}%", 100.0 * shift),
    ))
}

/// Invariant `D^2_1` functional of `l_w` at `a`, both real:
/// `π Σ (c^{k+1} - a^{k+1})² / ((k+1)(k+2))` with `c = φ_a(w)`.
fn log_test_series(w: f64, a: f64) -> f64 {
    let c = (a - w) / (1.0 - a * w);
    let (mut ck, mut ak, mut sum) = (c, a, 0.0);
    for k in 0..1_000_000 {
        let kf = k as f64;
        sum += (ck - ak).powi(2) / ((kf + 1.0) * (kf + 2.0));
        ck *= c;
        ak *= a;
        if ck.abs().max(ak.abs()) < 1e-12 {
            break;
        }
    }
    std::f64::consts::PI * sum
}

/// `1 + sup_a (functional)^{1/2}` by grid search and golden-section polish.
fn log_test_norm_oracle(w: f64) -> f64 {
    let n = 2000;
    let grid: Vec<f64> = (0..=n).map(|i| -0.999 + 1.9989 * i as f64 / n as f64).collect();
    let i = (0..=n)
        .max_by(|&i, &j| log_test_series(w, grid[i]).total_cmp(&log_test_series(w, grid[j])))
        .unwrap_or(0);
    let (mut lo, mut hi) = (grid[i.saturating_sub(1)], grid[(i + 1).min(n)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if log_test_series(w, x1) < log_test_series(w, x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    1.0 + log_test_series(w, 0.5 * (lo + hi)).sqrt()
}

fn plateau(tol_scale: f64) -> Outcome {
    let opts = NormOptions {
        tol: 1e-6 * tol_scale,
        radii: DEFAULT_RADII.to_vec(),
        angles: 16,
        refine: true,
    };
    let q = SpaceParams::new(2.0, 1.0, 0.0);
    let ws = [0.9, 0.99, 0.999];
    let mut values = Vec::new();
    for r in ws {
        let l = make_test_function(&TestFunctionSpec::LogTest {
            w: DiskPoint { re: r, im: 0.0 },
        })?;
        values.push(crate::spaces::mads_norm_with(&l, q, NormForm::Kernel, None, &opts)?.value);
    }
    let oracle: Vec<f64> = ws.iter().map(|&w| log_test_norm_oracle(w)).collect();
    let dev = values.iter().zip(&oracle).map(|(v, o)| (v - o).abs() / o).fold(0.0, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    let agreement = if dev < 0.01 { "oracle agrees" } else { "oracle disagrees" };
    Ok((
        spread < 0.2,
        format!(
            "norms {values:.4?}, spread {:.2}%; series oracle {oracle:.4?}, {agreement} within {:.2}%",
            100.0 * spread,
            100.0 * dev
        ),
    ))
}

fn bloch() -> Outcome {
    let radii = DEFAULT_RADII[1..].to_vec();
    let mut notes = Vec::new();
    let mut ok = true;
    for name in ["neg_z", "rotation"] {
        let spec = generator_by_name(name)?;
        for log in [false, true] {
            let rep = bloch_condition_profile(&spec, log, &radii)?;
            ok &= rep.holds();
            notes.push(format!("{name}{}: {:?}", if log { " log" } else { "" }, rep.verdict));
        }
    }
    let rep = bloch_condition_profile(&generator_by_name("parabolic")?, false, &radii)?;
    ok &= !rep.holds();
    let mut worst = 0.0f64;
    for r in [0.9, 0.99] {
        let i = rep
            .profile
            .radii
            .iter()
            .position(|x| (x - r).abs() < 1e-12)
            .ok_or_else(|| Error::invalid(format!("radius {r} missing")))?;
        let expect = (1.0 + r) / (1.0 - r);
        worst = worst.max((rep.profile.values[i] - expect).abs() / expect);
    }
    ok &= worst < 0.01;
    notes.push(format!("parabolic: {:?}, max rel deviation {worst:.2e}", rep.verdict));
    Ok((ok, notes.join("; ")))
}

fn continuity(tol_scale: f64) -> Outcome {
    let opts = NormOptions {
        tol: 1e-5 * tol_scale,
        radii: DEFAULT_RADII.to_vec(),
        angles: 32,
        refine: false,
    };
    let q = SpaceParams::new(2.0, 1.0, 0.0);
    let ts = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    let e2 = make_test_function(&TestFunctionSpec::Monomial { n: 2 })?;
    let a = strong_continuity_curve(&generator_by_name("neg_z")?, &e2, q, &ts, &opts)?;
    let slope = fit_loglog_slope(&a.points).unwrap_or(f64::NAN);
    let log1m = make_test_function(&TestFunctionSpec::LogPole { angle: 0.0 })?;
    let b = strong_continuity_curve(&generator_by_name("rotation")?, &log1m, q, &ts, &opts)?;
    let reference = b.points.last().map(|p| p.1).unwrap_or(f64::NAN);
    let min_ratio = b.points.iter().map(|p| p.1 / reference).fold(f64::INFINITY, f64::min);
    Ok((
        slope <= -0.5 && min_ratio >= 0.5,
        format!("(a) slope {slope:.3}; (b) min value / value at 0.1 = {min_ratio:.3}"),
    ))
}

fn volterra(tol_scale: f64) -> Outcome {
    let tol = 1e-13;
    let g = make_test_function(&TestFunctionSpec::LogPole { angle: 0.0 })?;
    let f = make_test_function(&TestFunctionSpec::LogTest {
        w: DiskPoint { re: 0.5, im: 0.0 },
    })?;
    let tf = volterra_apply(&g, &f, tol)?;
    let h = 1e-5;
    let mut fd = 0.0f64;
    for z in [c(0.3, 0.2), c(-0.5, 0.1), c(0.1, -0.7), c(0.6, 0.6)] {
        let d = (tf.eval(z + h) - tf.eval(z - h)) / (2.0 * h);
        let expect = f.eval(z) * g.deriv(z);
        fd = fd.max((d - expect).norm() / expect.norm());
    }

    let coeffs = vec![c(0.3, 0.0), c(1.0, 0.0), c(-0.5, 0.0), c(0.0, 0.25), c(0.125, -0.5)];
    let gt = AnalyticFn::polynomial(coeffs.clone())?;
    let one = AnalyticFn::polynomial(vec![c(1.0, 0.0)])?;
    let t1 = volterra_apply(&gt, &one, tol)?;
    let got = t1.taylor().map(|t| t.coeffs.clone()).unwrap_or_default();
    let exact = got.len() >= coeffs.len()
        && got[0] == c(0.0, 0.0)
        && coeffs[1..].iter().zip(&got[1..]).all(|(a, b)| a == b)
        && got[coeffs.len()..].iter().all(|x| *x == c(0.0, 0.0));

    let quad_tol = 1e-10 * tol_scale;
    let f2 = make_test_function(&TestFunctionSpec::Monomial { n: 2 })?;
    let (a, b) = (c(2.0, 0.0), c(0.0, 3.0));
    let combo = AnalyticFn::linear_combination(&[(a, f.clone()), (b, f2.clone())]);
    let lhs = volterra_apply(&g, &combo, quad_tol)?;
    let r1 = volterra_apply(&g, &f, quad_tol)?;
    let r2 = volterra_apply(&g, &f2, quad_tol)?;
    let mut lin = 0.0f64;
    for z in [c(0.3, 0.2), c(-0.5, 0.1), c(0.1, -0.7), c(0.6, 0.6)] {
        let l = lhs.eval(z);
        lin = lin.max((l - a * r1.eval(z) - b * r2.eval(z)).norm() / l.norm().max(1.0));
    }
    Ok((
        fd < 1e-6 && exact && lin < quad_tol,
        format!("derivative rel {fd:.2e}, T_g 1 exact: {exact}, linearity {lin:.2e} (tol {quad_tol:.0e})"),
    ))
}

fn witness(tol_scale: f64) -> Outcome {
    let h = make_test_function(&TestFunctionSpec::KoenigsLog)?;
    let grids = WitnessGrids {
        tol: WitnessGrids::default().tol * tol_scale,
        ..WitnessGrids::default()
    };
    let state = witness_construct(&h, SpaceParams::new(2.0, 1.0, 0.25), 3, &grids)?;
    let all = state.rounds.iter().all(|r| r.certified());
    let last = state.rounds.last();
    let bound = last.map(|r| (r.box_lower, r.grid_slack)).unwrap_or((f64::NAN, f64::NAN));
    let ok = state.rounds.len() == 3 && all && bound.0 >= 0.5 - bound.1;
    Ok((
        ok,
        format!(
            "{} rounds, all certified: {all}, final box lower bound {:.4} (slack {:.2e})",
            state.rounds.len(),
            bound.0,
            bound.1
        ),
    ))
}

fn admissibility() -> Outcome {
    use Classification::*;
    let table = [
        ((2.0, 1.0, 0.0), true, ProperMalpha),
        ((2.0, 1.0, 0.25), true, ProperMalpha),
        ((2.0, 1.0, 0.5), false, CollapsedToDps),
        ((2.0, 1.0, 0.75), false, CollapsedToDps),
        ((3.0, 1.0, 0.0), false, CollapsedToDps),
        ((1.5, 0.0, 0.0), true, ProperMalpha),
        ((1.5, -0.2, 0.0), false, Invalid),
        ((3.0, 0.5, 0.0), false, Invalid),
    ];
    let wrong: Vec<String> = table
        .iter()
        .filter(|((p, s, a), adm, class)| {
            let r = admissible_check(SpaceParams::new(*p, *s, *a));
            r.admissible != *adm || r.classification != *class
        })
        .map(|((p, s, a), _, _)| format!("({p},{s},{a})"))
        .collect();
    Ok((
        wrong.is_empty(),
        format!(
            "{} of {} triples match{}",
            table.len() - wrong.len(),
            table.len(),
            if wrong.is_empty() {
                String::new()
            } else {
                format!("; mismatched {}", wrong.join(" "))
            }
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_checks_pass() {
        for id in [1, 11] {
            let r = run_check(id, 1.0);
            assert!(r.passed(), "{}", r.line());
        }
    }

    #[test]
    fn series_oracle_peaks_at_origin() {
        assert!((e1_series(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(e1_series(0.5) < e1_series(0.0));
    }

    #[test]
    fn tampered_tolerance_fails_gracefully() {
        let r = run_check(4, 1e-6);
        assert!(!r.passed());
        assert!(r.detail.contains("error"), "{}", r.detail);
    }

    #[test]
    fn log_test_oracle_matches_origin_value() {
        // at a = 0 the functional is π w² Σ w^{2k}/((k+1)(k+2))
        let w: f64 = 0.6;
        let direct: f64 = std::f64::consts::PI * (0..400).map(|k| w.powi(2 * k + 2) / ((k + 1) * (k + 2)) as f64).sum::<f64>();
        assert!((log_test_series(w, 0.0) - direct).abs() < 1e-14);
        assert!(log_test_norm_oracle(0.999) < 1.0 + (4.0 * std::f64::consts::PI * 2f64.ln()).sqrt());
    }

    #[test]
    fn level_parses() {
        assert_eq!("full".parse::<Level>().unwrap(), Level::Full);
        assert!("medium".parse::<Level>().is_err());
    }
}
