//! Adaptive polar cubature over the disk and over Carleson boxes.
//!
//! The radial variable is replaced by `u = -ln(1 - r)`, so the geometric
//! panels `1 - r ∈ [4^{-k-1}, 4^{-k}]` become strips of constant width in `u`
//! and boundary-scale features become O(1) in the new variable. Each cell of
//! the `(u, θ)` partition is integrated with the degree-7 Genz–Malik rule and
//! its embedded degree-5 rule; cells are bisected along the axis with the
//! largest fourth difference, largest error first.
//!
//! The radial range is cut at `1 - r = cutoff`; the remaining boundary layer
//! is extrapolated from the local exponential decay rate of the angular
//! integral in `u`.

use super::gauss::{integrate_adaptive, pairwise_sum};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{LN_2, TAU};

/// Smallest relative tolerance the 2D rule will try to certify.
pub const MIN_REL_TOL: f64 = 1e-11;

/// Deepest radial truncation `1 - r` the boundary layer may be pushed to.
pub const MIN_CUTOFF: f64 = 1e-12;

/// A boundary direction where the integrand may concentrate, with the
/// angular width of the concentration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Focus {
    pub angle: f64,
    pub width: f64,
}

impl Focus {
    pub fn new(angle: f64, width: f64) -> Self {
        Focus {
            angle,
            width: width.max(1e-12),
        }
    }
}

/// Polar region `{ r_inner < r < 1, θ ∈ [theta0, theta1] }`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PolarRegion {
    pub r_inner: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl PolarRegion {
    pub fn disk() -> Self {
        PolarRegion {
            r_inner: 0.0,
            theta0: 0.0,
            theta1: TAU,
        }
    }

    fn is_full_circle(&self) -> bool {
        (self.theta1 - self.theta0 - TAU).abs() < 1e-14
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CubatureSettings {
    pub tol: f64,
    pub abs_floor: f64,
    pub cutoff: f64,
    pub max_evals: usize,
    /// Fixed uniform refinement level; `None` means adaptive.
    pub fixed_level: Option<u32>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CubatureOutcome {
    pub value: f64,
    pub error: f64,
    pub cells: usize,
    pub max_radius: f64,
    pub converged: bool,
}

const STRIP_WIDTH: f64 = 2.0 * LN_2;
const BASE_PANELS_FULL: usize = 8;
const BASE_PANELS_ARC: usize = 2;
const GRADING: f64 = 4.0;

// Genz–Malik constants for dimension 2.
const L2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const L4: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const L5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)
const W1: f64 = -3816.0 / 19683.0;
const W2: f64 = 980.0 / 6561.0;
const W3: f64 = 1020.0 / 19683.0;
const W4: f64 = 200.0 / 19683.0;
const W5: f64 = 6859.0 / 19683.0 / 4.0;
const V1: f64 = -971.0 / 729.0;
const V2: f64 = 245.0 / 486.0;
const V3: f64 = 65.0 / 1458.0;
const V4: f64 = 25.0 / 729.0;
const DIFF_RATIO: f64 = (9.0 / 70.0) / (9.0 / 10.0);

#[derive(Clone, Copy, Debug)]
struct Cell {
    u0: f64,
    u1: f64,
    t0: f64,
    t1: f64,
    value: f64,
    error: f64,
    split_u: bool,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.u0.total_cmp(&self.u0))
            .then_with(|| other.t0.total_cmp(&self.t0))
    }
}

/// Integrand in the `(u, θ)` chart including the polar Jacobian and the
/// `(1 - r²)^s` weight.
struct Chart<'a, F: Fn(Complex64, f64) -> f64> {
    f: &'a F,
    s: f64,
}

impl<F: Fn(Complex64, f64) -> f64> Chart<'_, F> {
    #[inline]
    fn eval(&self, u: f64, theta: f64) -> f64 {
        let one_minus_r = (-u).exp();
        let r = 1.0 - one_minus_r;
        let one_minus_r2 = one_minus_r * (1.0 + r);
        let weight = if self.s == 0.0 { 1.0 } else { one_minus_r2.powf(self.s) };
        let v = (self.f)(Complex64::from_polar(r, theta), one_minus_r2);
        v * weight * r * one_minus_r
    }
}

fn genz_malik<F: Fn(Complex64, f64) -> f64>(chart: &Chart<'_, F>, u0: f64, u1: f64, t0: f64, t1: f64) -> Cell {
    let cu = 0.5 * (u0 + u1);
    let ct = 0.5 * (t0 + t1);
    let hu = 0.5 * (u1 - u0);
    let ht = 0.5 * (t1 - t0);
    let f0 = chart.eval(cu, ct);

    let a2u = chart.eval(cu - L2 * hu, ct) + chart.eval(cu + L2 * hu, ct);
    let a2t = chart.eval(cu, ct - L2 * ht) + chart.eval(cu, ct + L2 * ht);
    let a3u = chart.eval(cu - L4 * hu, ct) + chart.eval(cu + L4 * hu, ct);
    let a3t = chart.eval(cu, ct - L4 * ht) + chart.eval(cu, ct + L4 * ht);
    let mut s4 = 0.0;
    let mut s5 = 0.0;
    for (su, st) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
        s4 += chart.eval(cu + su * L4 * hu, ct + st * L4 * ht);
        s5 += chart.eval(cu + su * L5 * hu, ct + st * L5 * ht);
    }
    let vol = 4.0 * hu * ht;
    let i7 = vol * (W1 * f0 + W2 * (a2u + a2t) + W3 * (a3u + a3t) + W4 * s4 + W5 * s5);
    let i5 = vol * (V1 * f0 + V2 * (a2u + a2t) + V3 * (a3u + a3t) + V4 * s4);
    let du = (a2u - 2.0 * f0 - DIFF_RATIO * (a3u - 2.0 * f0)).abs();
    let dt = (a2t - 2.0 * f0 - DIFF_RATIO * (a3t - 2.0 * f0)).abs();
    let split_u = if (du - dt).abs() <= 1e-14 * (du + dt) { hu >= ht } else { du > dt };
    let error = if i7.is_finite() && i5.is_finite() { (i7 - i5).abs() } else { f64::INFINITY };
    Cell {
        u0,
        u1,
        t0,
        t1,
        value: i7,
        error,
        split_u,
    }
}

const EVALS_PER_CELL: usize = 17;

/// Angular partition of `[t0, t1]` for a strip whose deep edge sits at
/// `1 - r = depth`, graded geometrically around every focus.
fn angular_breaks(t0: f64, t1: f64, base: usize, depth: f64, foci: &[Focus], periodic: bool) -> Vec<f64> {
    let span = t1 - t0;
    let mut breaks: Vec<f64> = (0..=base).map(|i| t0 + span * i as f64 / base as f64).collect();
    for focus in foci {
        let scale = focus.width.max(depth);
        let mut centers = Vec::with_capacity(3);
        if periodic {
            let c = t0 + (focus.angle - t0).rem_euclid(TAU);
            centers.extend([c, c - TAU]);
        } else {
            let mid = 0.5 * (t0 + t1);
            centers.push(mid + crate::disk::wrap_angle(focus.angle - mid));
        }
        for c in centers {
            let mut d = scale;
            while d < span {
                for x in [c - d, c + d] {
                    if x > t0 && x < t1 {
                        breaks.push(x);
                    }
                }
                d *= GRADING;
            }
            if c > t0 && c < t1 {
                breaks.push(c);
            }
        }
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    let min_gap = 1e-13 * span.max(1e-300);
    breaks.dedup_by(|b, a| (*b - *a).abs() <= min_gap);
    if let Some(last) = breaks.last_mut() {
        *last = t1;
    }
    breaks
}

fn strip_edges(u_start: f64, u_end: f64) -> Vec<f64> {
    let mut edges = vec![u_start];
    let mut u = u_start;
    while u + STRIP_WIDTH < u_end - 0.25 * STRIP_WIDTH {
        u += STRIP_WIDTH;
        edges.push(u);
    }
    edges.push(u_end);
    edges
}

/// Integrates `f(z, 1 - |z|²) · (1 - |z|²)^s` against `dA` over `region`.
pub(crate) fn integrate_region<F>(f: &F, s: f64, region: PolarRegion, foci: &[Focus], settings: CubatureSettings) -> CubatureOutcome
where
    F: Fn(Complex64, f64) -> f64,
{
    let chart = Chart { f, s };
    let cutoff = settings.cutoff;
    let u_start = -(1.0 - region.r_inner).ln();
    let u_end = -cutoff.ln();
    let periodic = region.is_full_circle();
    let base = if periodic { BASE_PANELS_FULL } else { BASE_PANELS_ARC };

    let mut cells = Vec::new();
    let u_edges = strip_edges(u_start, u_end.max(u_start + 1e-9));
    for w in u_edges.windows(2) {
        let depth = (-w[1]).exp();
        let t_breaks = angular_breaks(region.theta0, region.theta1, base, depth, foci, periodic);
        for tb in t_breaks.windows(2) {
            cells.push((w[0], w[1], tb[0], tb[1]));
        }
    }

    if let Some(level) = settings.fixed_level {
        let n = 1usize << level;
        let mut values = Vec::with_capacity(cells.len() * n * n);
        let mut err = 0.0;
        for &(u0, u1, t0, t1) in &cells {
            let du = (u1 - u0) / n as f64;
            let dt = (t1 - t0) / n as f64;
            for i in 0..n {
                for j in 0..n {
                    let c = genz_malik(
                        &chart,
                        u0 + du * i as f64,
                        u0 + du * (i + 1) as f64,
                        t0 + dt * j as f64,
                        t0 + dt * (j + 1) as f64,
                    );
                    values.push(c.value);
                    err += c.error;
                }
            }
        }
        let count = values.len();
        let core = pairwise_sum(&values);
        let (tail, tail_err) = boundary_tail(&chart, u_end, region, foci);
        let value = core + tail;
        return CubatureOutcome {
            value,
            error: err + tail_err,
            cells: count,
            max_radius: 1.0 - cutoff,
            converged: true,
        };
    }

    let mut heap: BinaryHeap<Cell> = cells.iter().map(|&(u0, u1, t0, t1)| genz_malik(&chart, u0, u1, t0, t1)).collect();
    let mut evals = heap.len() * EVALS_PER_CELL;
    let mut u_end = u_end;
    let (mut tail, mut tail_err) = boundary_tail(&chart, u_end, region, foci);
    let effective_tol = settings.tol.max(MIN_REL_TOL);
    let u_limit = -MIN_CUTOFF.ln();

    loop {
        let (core, core_err) = totals(&heap);
        let value = core + tail;
        let error = core_err + tail_err;
        let target = settings.abs_floor.max(effective_tol * value.abs());
        let done = error <= target;
        if done || evals >= settings.max_evals || !error.is_finite() && u_end >= u_limit {
            let converged = done && settings.tol >= MIN_REL_TOL;
            return CubatureOutcome {
                value,
                error,
                cells: heap.len(),
                max_radius: 1.0 - (-u_end).exp(),
                converged,
            };
        }
        if tail_err > 0.5 * target && u_end < u_limit {
            // the extrapolated layer is too uncertain: integrate one more strip
            let u_next = (u_end + STRIP_WIDTH).min(u_limit);
            let depth = (-u_next).exp();
            let t_breaks = angular_breaks(region.theta0, region.theta1, base, depth, foci, periodic);
            for tb in t_breaks.windows(2) {
                heap.push(genz_malik(&chart, u_end, u_next, tb[0], tb[1]));
                evals += EVALS_PER_CELL;
            }
            u_end = u_next;
            (tail, tail_err) = boundary_tail(&chart, u_end, region, foci);
            continue;
        }
        // refine until the running error falls under the target, recomputing
        // totals only every few hundred splits
        let mut running = core_err;
        let core_target = (target - tail_err).max(0.5 * target);
        let mut splits = 0;
        while running > core_target && splits < 256 && evals < settings.max_evals {
            let Some(worst) = heap.pop() else { break };
            let (a, b) = if worst.split_u {
                let m = 0.5 * (worst.u0 + worst.u1);
                (
                    genz_malik(&chart, worst.u0, m, worst.t0, worst.t1),
                    genz_malik(&chart, m, worst.u1, worst.t0, worst.t1),
                )
            } else {
                let m = 0.5 * (worst.t0 + worst.t1);
                (
                    genz_malik(&chart, worst.u0, worst.u1, worst.t0, m),
                    genz_malik(&chart, worst.u0, worst.u1, m, worst.t1),
                )
            };
            running += a.error + b.error - worst.error;
            heap.push(a);
            heap.push(b);
            evals += 2 * EVALS_PER_CELL;
            splits += 1;
        }
        if splits == 0 {
            // nothing left to refine in the body
            let (core, core_err) = totals(&heap);
            return CubatureOutcome {
                value: core + tail,
                error: core_err + tail_err,
                cells: heap.len(),
                max_radius: 1.0 - (-u_end).exp(),
                converged: false,
            };
        }
    }
}

fn totals(heap: &BinaryHeap<Cell>) -> (f64, f64) {
    let mut cells: Vec<&Cell> = heap.iter().collect();
    cells.sort_by(|x, y| x.u0.total_cmp(&y.u0).then(x.t0.total_cmp(&y.t0)));
    let values: Vec<f64> = cells.iter().map(|c| c.value).collect();
    let err: f64 = cells.iter().map(|c| c.error).sum();
    (pairwise_sum(&values), err)
}

/// Extrapolates the layer `u > u_end` assuming the angular integral decays
/// like `exp(-μ u)` locally; the error is the change of the extrapolated
/// tail between two adjacent fitting windows.
fn boundary_tail<F: Fn(Complex64, f64) -> f64>(chart: &Chart<'_, F>, u_end: f64, region: PolarRegion, foci: &[Focus]) -> (f64, f64) {
    let depth = (-u_end).exp();
    let periodic = region.is_full_circle();
    let breaks = angular_breaks(region.theta0, region.theta1, 4, depth, foci, periodic);
    let angular = |u: f64| -> f64 {
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let r = integrate_adaptive(|t| chart.eval(u, t), w[0], w[1], 1, 0.0, 1e-10, 200);
            total += r.value;
        }
        total
    };
    let h = 0.25;
    let a0 = angular(u_end);
    if a0 == 0.0 {
        return (0.0, 0.0);
    }
    let a1 = angular(u_end - h);
    let a2 = angular(u_end - 2.0 * h);
    let mu1 = (a1 / a0).ln() / h;
    let mu2 = (a2 / a1).ln() / h;
    if !(mu1 > 1e-3) || !mu1.is_finite() {
        // no decay: the truncated layer cannot be bounded
        return (0.0, f64::INFINITY);
    }
    let tail = a0 / mu1;
    let alt = if mu2 > 1e-3 { a1 * (-mu2 * h).exp() / mu2 } else { f64::INFINITY };
    (tail, 2.0 * (tail - alt).abs())
}
