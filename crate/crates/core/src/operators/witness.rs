//! Iterative construction of `F = Σ a_k β_{w_k}` with `T_g F` in
//! `M_α(D^p_s)` but not in the little space.

use crate::disk::{ArcInterval, CarlesonBox, DiskPoint};
use crate::error::{Error, Result};
use crate::funclib::{make_test_function, AnalyticFn, TestFunctionSpec};
use crate::quadrature::{integrate_box_with, QuadOptions, DEFAULT_RADII};
use crate::spaces::{littleo_profile_with, NormForm, NormOptions, SpaceParams, SpaceSelector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// `C(g)` in the partial-norm cap: the bound `1 + 1/2` on short arcs.
pub const C_G: f64 = 1.5;

const CENTER_OFFSETS: [f64; 5] = [0.0, -0.25, 0.25, -0.5, 0.5];
const PLATEAU_WINDOW: usize = 6;
const PLATEAU_GROWTH: f64 = 1.02;
/// Below this scale `1 - z` keeps too few digits for the box integrals.
const MIN_ARC: f64 = 1e-9;

/// Search grids of [`witness_construct`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WitnessGrids {
    /// Normalized arc lengths, descending.
    pub arc_lengths: Vec<f64>,
    pub centers: usize,
    pub ring_angles: usize,
    /// Deepest ring `1 - |w| = δ_n 2^{-k}` tried.
    pub max_ring_depth: u32,
    pub tol: f64,
    pub check_hypothesis: bool,
}

impl Default for WitnessGrids {
    fn default() -> Self {
        WitnessGrids {
            arc_lengths: (1..=12).map(|k| 0.5f64.powi(k)).collect(),
            centers: 128,
            ring_angles: 256,
            max_ring_depth: 24,
            tol: 1e-5,
            check_hypothesis: true,
        }
    }
}

/// Numerical reading of the hypothesis `g ∈ ∩_β M_β \ M_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub m0_profile_slope: Option<f64>,
    pub m0_diverging: bool,
    /// `(β, largest sampled value, tail slope)`.
    pub beta_ladder: Vec<(f64, f64, Option<f64>)>,
    pub beta_finite: bool,
}

impl HypothesisCheck {
    pub fn satisfied(&self) -> bool {
        self.m0_diverging && self.beta_finite
    }
}

/// One accepted round `n ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRound {
    pub n: usize,
    pub delta: f64,
    pub delta_prime: f64,
    pub w: Complex64,
    pub arc: ArcInterval,
    /// Box functional of `β_{w_n}` on its own box.
    pub selection_value: f64,
    /// `sup_{|I| ≥ δ_n}` of the box functional of `β_{w_n}`.
    pub long_arc_sup: f64,
    pub m_n: f64,
    pub coefficient: f64,
    /// `(box functional of F_n on I_n)^{1/p}`.
    pub box_lower: f64,
    /// Off-grid excess of the short-arc bound on `F_{n-1}`, root scale.
    pub grid_slack: f64,
    pub partial_norm: f64,
    /// Margins of properties (1)–(4); positive means certified.
    pub margins: Vec<(String, f64)>,
}

impl WitnessRound {
    pub fn certified(&self) -> bool {
        self.margins.iter().all(|m| m.1 > 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessState {
    pub params: SpaceParams,
    pub n: usize,
    pub coefficients: Vec<f64>,
    /// `w_0 = 1` sits on the circle; the rest are interior.
    pub centers: Vec<Complex64>,
    pub arcs: Vec<ArcInterval>,
    pub thresholds: Vec<f64>,
    pub delta_primes: Vec<f64>,
    pub partial_norm: f64,
    pub partial_norms: Vec<f64>,
    pub c_g: f64,
    pub rounds: Vec<WitnessRound>,
    pub hypothesis: Option<HypothesisCheck>,
}

impl WitnessState {
    /// `F_n` as an evaluator.
    pub fn function(&self) -> Result<AnalyticFn> {
        let mut terms = vec![(Complex64::new(1.0, 0.0), AnalyticFn::constant(Complex64::new(1.0, 0.0)))];
        for (a, w) in self.coefficients.iter().zip(&self.centers).skip(1) {
            terms.push((Complex64::new(*a, 0.0), beta_test(*w, self.params)?));
        }
        Ok(AnalyticFn::linear_combination(&terms))
    }
}

fn beta_test(w: Complex64, params: SpaceParams) -> Result<AnalyticFn> {
    make_test_function(&TestFunctionSpec::BetaTest {
        w: DiskPoint::from_complex(w)?,
        alpha: params.alpha,
        p: params.p,
        s: params.s,
    })
}

fn pow_abs(x: Complex64, p: f64) -> f64 {
    if p == 2.0 {
        x.norm_sqr()
    } else {
        x.norm().powf(p)
    }
}

fn arc(center: f64, length: f64) -> ArcInterval {
    ArcInterval::new(center, length.min(1.0)).expect("arc length in (0, 1]")
}

/// Arcs of length `len` around `angle`, centre shifted by fractions of the width.
fn local_arcs(angle: f64, len: f64) -> impl Iterator<Item = ArcInterval> {
    CENTER_OFFSETS.into_iter().map(move |o| arc(angle + o * TAU * len, len))
}

struct Engine<'a> {
    g: &'a AnalyticFn,
    params: SpaceParams,
    sigma: f64,
    grids: &'a WitnessGrids,
}

impl Engine<'_> {
    /// `|I|^{-σ} ∫_{S(I)} |F g'|^p (1 - |z|²)^s dA`.
    fn functional(&self, f: &AnalyticFn, a: ArcInterval) -> Result<f64> {
        let p = self.params.p;
        let foci = f.foci().iter().chain(self.g.foci()).copied();
        let mut opts = QuadOptions::with_tol(self.grids.tol).focus(foci);
        // thresholds are O(1) after scaling by |I|^{-σ}
        opts.abs_floor = self.grids.tol * a.length.powf(self.sigma);
        let q = integrate_box_with(|z, _| pow_abs(f.eval(z) * self.g.deriv(z), p), &CarlesonBox::new(a), self.params.s, &opts)?;
        Ok(q.value * a.length.powf(-self.sigma))
    }

    fn evaluate(&self, f: &AnalyticFn, arcs: &[ArcInterval]) -> Result<Vec<f64>> {
        arcs.par_iter().map(|a| self.functional(f, *a)).collect()
    }

    fn grid_arcs(&self, len: f64, shifted: bool) -> impl Iterator<Item = ArcInterval> {
        let m = self.grids.centers;
        let off = if shifted { 0.5 } else { 0.0 };
        (0..m).map(move |k| arc(TAU * (k as f64 + off) / m as f64, len))
    }

    fn focus_angles(&self, centers: &[Complex64]) -> Vec<f64> {
        let mut v: Vec<f64> = self.g.foci().iter().map(|f| f.angle).collect();
        v.extend(centers.iter().skip(1).map(|w| w.arg()));
        v
    }

    /// Grid arcs of every length plus local arcs at the focus angles.
    fn candidates(&self, lengths: &[f64], angles: &[f64], shifted: bool) -> Vec<ArcInterval> {
        lengths
            .iter()
            .flat_map(|&len| {
                self.grid_arcs(len, shifted)
                    .chain(angles.iter().flat_map(move |&t| local_arcs(t, len)))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    fn max_root(&self, f: &AnalyticFn, arcs: &[ArcInterval]) -> Result<f64> {
        Ok(self.evaluate(f, arcs)?.into_iter().fold(0.0, f64::max).powf(1.0 / self.params.p))
    }
}

fn exhausted(round: usize, reason: impl Into<String>, margins: Vec<(String, f64)>) -> Error {
    Error::SearchExhausted {
        round,
        reason: reason.into(),
        margins,
    }
}

fn hypothesis_check(g: &AnalyticFn, params: SpaceParams, tol: f64) -> Result<HypothesisCheck> {
    let opts = NormOptions {
        tol: tol.max(1e-5),
        radii: DEFAULT_RADII.to_vec(),
        angles: 16,
        refine: false,
    };
    let m0 = SpaceParams::new(params.p, params.s, 0.0);
    let prof = littleo_profile_with(
        g,
        SpaceSelector::Mads {
            params: m0,
            form: NormForm::Kernel,
        },
        &opts,
    )?;
    let m0_profile_slope = prof.tail_slope();
    let top = params.alpha_threshold();
    let mut beta_ladder = Vec::new();
    for k in 1..=3 {
        let beta = top * k as f64 / 4.0;
        let pr = littleo_profile_with(
            g,
            SpaceSelector::Mads {
                params: SpaceParams::new(params.p, params.s, beta),
                form: NormForm::Kernel,
            },
            &opts,
        )?;
        beta_ladder.push((beta, pr.global_sup, pr.tail_slope()));
    }
    let beta_finite = beta_ladder.iter().all(|b| b.1.is_finite() && b.2.is_some_and(|s| s <= 0.05));
    Ok(HypothesisCheck {
        m0_profile_slope,
        m0_diverging: m0_profile_slope.is_some_and(|s| s > 0.1),
        beta_ladder,
        beta_finite,
    })
}

/// Runs `n_max` rounds of the recursive construction for the symbol `g` on
/// `M_α(D^p_s)`, `0 < α < (s - (p - 2))/p`.
///
/// Round `n` picks `δ_n` so short grid arcs carry at most `2^{-p}` of
/// `F_{n-1}`, scans rings `1 - |w| = δ_n 2^{-k}` for a `w_n` whose own box
/// carries at least `2^{pn}` of `β_{w_n}` while long arcs carry at most 1,
/// and takes `I_n` as the heaviest short arc for `β_{w_n}`. Any property
/// that fails to certify ends the run with `SearchExhausted`.
pub fn witness_construct(g: &AnalyticFn, params: SpaceParams, n_max: usize, grids: &WitnessGrids) -> Result<WitnessState> {
    let top = params.alpha_threshold();
    if !(params.alpha > 0.0 && params.alpha < top) || !(params.p > 1.0) || !(params.s > params.p - 2.0) {
        return Err(Error::invalid(format!(
            "witness construction needs p > 1, s > p - 2 and 0 < α < {top}, got {params:?}"
        )));
    }
    if grids.arc_lengths.is_empty() || grids.centers == 0 || grids.ring_angles == 0 || !(grids.tol > 0.0) {
        return Err(Error::invalid("empty witness search grid"));
    }
    let mut lengths = grids.arc_lengths.clone();
    lengths.retain(|l| *l > 0.0 && *l < 1.0);
    lengths.sort_by(|a, b| b.total_cmp(a));
    lengths.dedup();

    let eng = Engine {
        g,
        params,
        sigma: params.sigma(),
        grids,
    };
    let p = params.p;
    let hypothesis = if grids.check_hypothesis {
        Some(hypothesis_check(g, params, grids.tol)?)
    } else {
        None
    };

    let one = Complex64::new(1.0, 0.0);
    let mut state = WitnessState {
        params,
        n: 0,
        coefficients: vec![1.0],
        centers: vec![one],
        arcs: vec![ArcInterval::full_circle()],
        thresholds: vec![1.0],
        delta_primes: vec![1.0],
        partial_norm: 0.0,
        partial_norms: Vec::new(),
        c_g: C_G,
        rounds: Vec::new(),
        hypothesis,
    };
    let mut f_prev = AnalyticFn::constant(one);
    let mut terms = vec![(one, f_prev.clone())];
    let partial_arcs = |state: &WitnessState| {
        let mut v = eng.candidates(&lengths, &eng.focus_angles(&state.centers), false);
        v.extend(state.arcs.iter().copied());
        v
    };
    state.partial_norm = eng.max_root(&f_prev, &partial_arcs(&state))?;
    state.partial_norms.push(state.partial_norm);

    for n in 1..=n_max {
        let last_len = state.arcs[n - 1].length;
        let angles = eng.focus_angles(&state.centers);

        // δ_n: largest grid length below |I_{n-1}| whose shorter arcs all stay under 2^{-p}
        let mut short: Vec<f64> = lengths.iter().copied().filter(|l| *l < last_len).collect();
        let floor = lengths.last().copied().unwrap_or(1.0).min(last_len);
        let mut extra = lengths.last().copied().unwrap_or(1.0);
        while extra > floor / 65536.0 && extra > MIN_ARC {
            extra *= 0.5;
            if extra < last_len {
                short.push(extra);
            }
        }
        let mut per_len = Vec::with_capacity(short.len());
        for &len in &short {
            let arcs = eng.candidates(&[len], &angles, false);
            per_len.push(eng.evaluate(&f_prev, &arcs)?.into_iter().fold(0.0, f64::max));
        }
        let cap = 2f64.powf(-p);
        let pos = (0..short.len()).find(|&i| per_len[i..].iter().all(|v| *v <= cap));
        let Some(pos) = pos else {
            let best = per_len.last().copied().unwrap_or(f64::INFINITY);
            return Err(exhausted(
                n,
                "no grid length keeps short arcs of F_{n-1} under 2^{-p}",
                vec![("short_arcs".into(), cap - best)],
            ));
        };
        let delta = short[pos];
        let shifted = eng.candidates(&short[pos..], &[], true);
        let shifted_root = eng.max_root(&f_prev, &shifted)?;
        let grid_slack = (shifted_root - 0.5).max(0.0);

        // w_n on successively deeper rings
        let target = 2f64.powf(p * n as f64);
        let mut ring_angles: Vec<f64> = (0..grids.ring_angles).map(|k| TAU * k as f64 / grids.ring_angles as f64).collect();
        ring_angles.extend(g.foci().iter().map(|f| f.angle));
        let long: Vec<f64> = lengths.iter().copied().filter(|l| *l >= delta).collect();
        let mut history: Vec<f64> = Vec::new();
        let mut best_long = f64::INFINITY;
        let mut chosen = None;
        for k in 1..=grids.max_ring_depth {
            let dp = delta * 0.5f64.powi(k as i32);
            if dp < MIN_ARC {
                break;
            }
            let r = 1.0 - dp;
            let values: Vec<(f64, Complex64, AnalyticFn)> = ring_angles
                .par_iter()
                .map(|&t| {
                    let w = Complex64::from_polar(r, t);
                    let b = beta_test(w, params)?;
                    Ok((eng.functional(&b, arc(t, dp))?, w, b))
                })
                .collect::<Result<_>>()?;
            let (e, w, b) = values.into_iter().max_by(|a, b| a.0.total_cmp(&b.0)).expect("ring has angles");
            history.push(e);
            if e >= target {
                let mut arcs = eng.candidates(&long, &[w.arg()], false);
                arcs.push(ArcInterval::full_circle());
                let long_sup = eng.evaluate(&b, &arcs)?.into_iter().fold(0.0, f64::max);
                best_long = best_long.min(long_sup);
                if long_sup <= 1.0 {
                    chosen = Some((dp, w, b, e, long_sup));
                    break;
                }
            }
            let h = history.len();
            if e < target && h > PLATEAU_WINDOW && e < PLATEAU_GROWTH * history[h - 1 - PLATEAU_WINDOW] {
                break;
            }
        }
        let Some((delta_prime, w, beta_w, selection_value, long_arc_sup)) = chosen else {
            let best = history.iter().copied().fold(0.0, f64::max);
            return Err(exhausted(
                n,
                format!("no ring point reaches the selection bound 2^{{pn}} = {target} with long arcs under 1"),
                std::iter::once(("selection".to_string(), best - target))
                    .chain(best_long.is_finite().then(|| ("long_arcs".to_string(), 1.0 - best_long)))
                    .collect(),
            ));
        };

        // I_n: heaviest arc of length ≤ δ_n for β_{w_n}
        let mut arcs = eng.candidates(&short[pos..], &[], false);
        let t = w.arg();
        let mut len = delta_prime / 8.0;
        while len <= delta {
            arcs.extend(local_arcs(t, len));
            len *= 2.0;
        }
        let vals = eng.evaluate(&beta_w, &arcs)?;
        let (imax, mp) = vals.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
        let i_n = arcs[imax];
        let m_n = mp.powf(1.0 / p);
        let a_n = 1.0 / m_n;

        terms.push((Complex64::new(a_n, 0.0), beta_w));
        let f_n = AnalyticFn::linear_combination(&terms);
        let box_lower = eng.functional(&f_n, i_n)?.powf(1.0 / p);

        state.n = n;
        state.coefficients.push(a_n);
        state.centers.push(w);
        state.arcs.push(i_n);
        state.thresholds.push(delta);
        state.delta_primes.push(delta_prime);
        let partial = eng.max_root(&f_n, &partial_arcs(&state))?;

        let min_prev = state.arcs[..n].iter().map(|a| a.length).fold(f64::INFINITY, f64::min);
        let cap4 = (state.partial_norm + 0.5f64.powi(n as i32) * C_G).max(C_G);
        let margins = vec![
            ("property_1".to_string(), 0.5f64.powi(n as i32) - a_n),
            ("property_2".to_string(), min_prev - delta),
            ("property_3".to_string(), box_lower - 0.5),
            ("property_4".to_string(), cap4 - partial),
        ];
        let round = WitnessRound {
            n,
            delta,
            delta_prime,
            w,
            arc: i_n,
            selection_value,
            long_arc_sup,
            m_n,
            coefficient: a_n,
            box_lower,
            grid_slack,
            partial_norm: partial,
            margins: margins.clone(),
        };
        if !round.certified() {
            let failing: Vec<String> = margins.iter().filter(|m| m.1 <= 0.0).map(|m| m.0.clone()).collect();
            return Err(exhausted(n, format!("{} not certified", failing.join(", ")), margins));
        }
        state.partial_norm = partial;
        state.partial_norms.push(partial);
        state.rounds.push(round);
        f_prev = f_n;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Focus;

    /// `ε L³/3` with `L = log(e/(1 - z))`: outside the Bloch space, inside
    /// every growth space `(1 - |z|)^{-β}`.
    fn log_cube(eps: f64) -> AnalyticFn {
        let one = Complex64::new(1.0, 0.0);
        AnalyticFn::closed_form("log_cube", move |z: Complex64| {
            let l = one - (one - z).ln();
            (eps * l * l * l / 3.0, eps * l * l / (one - z))
        })
        .with_foci([Focus::new(0.0, 1e-12)])
    }

    fn quick() -> WitnessGrids {
        WitnessGrids {
            centers: 32,
            ring_angles: 32,
            tol: 1e-4,
            check_hypothesis: false,
            ..Default::default()
        }
    }

    #[test]
    fn base_case() {
        let st = witness_construct(&log_cube(0.03), SpaceParams::new(2.0, 1.0, 0.25), 0, &quick()).unwrap();
        assert_eq!(st.n, 0);
        assert_eq!(st.coefficients, vec![1.0]);
        assert!(st.arcs[0].is_full());
        assert_eq!(st.centers[0], Complex64::new(1.0, 0.0));
        let f = st.function().unwrap();
        assert_eq!(f.eval(Complex64::new(0.3, 0.2)), Complex64::new(1.0, 0.0));
        assert!(st.partial_norm.is_finite() && st.partial_norm > 0.0);
    }

    #[test]
    fn rejects_alpha_outside_range() {
        let g = log_cube(0.03);
        assert!(witness_construct(&g, SpaceParams::new(2.0, 1.0, 0.0), 1, &quick()).is_err());
        assert!(witness_construct(&g, SpaceParams::new(2.0, 1.0, 0.5), 1, &quick()).is_err());
    }

    #[test]
    fn three_rounds_certify_outside_bloch() {
        let st = witness_construct(&log_cube(0.03), SpaceParams::new(2.0, 3.0, 0.5), 3, &quick()).unwrap();
        assert_eq!(st.rounds.len(), 3);
        for r in &st.rounds {
            assert!(r.certified(), "{r:?}");
            assert!(r.box_lower >= 0.5);
            assert!(r.coefficient <= 0.5f64.powi(r.n as i32));
        }
        for n in 1..=3 {
            assert!(st.thresholds[n] < st.arcs[n - 1].length);
            assert!(st.partial_norms[n] <= (st.partial_norms[n - 1] + 0.5f64.powi(n as i32) * C_G).max(C_G));
        }
        let f = st.function().unwrap();
        let z = Complex64::new(0.2, 0.1);
        let direct: Complex64 = st.coefficients[1..]
            .iter()
            .zip(&st.centers[1..])
            .map(|(a, w)| *a * beta_test(*w, st.params).unwrap().eval(z))
            .sum::<Complex64>()
            + 1.0;
        assert!((f.eval(z) - direct).norm() < 1e-14);
    }
}
