use super::AnalyticFn;
use crate::disk::{pseudo_hyperbolic, DiskPoint};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Outcome of [`univalence_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnivalenceReport {
    pub injective_on_mesh: bool,
    pub first_collision: Option<(DiskPoint, DiskPoint)>,
    pub mesh_points: usize,
}

/// Looks for two mesh points, hyperbolically far apart, whose images are
/// closer than Koebe's quarter theorem allows for a univalent map.
///
/// The mesh has hyperbolic spacing `η = 1/mesh_density` on circles of
/// hyperbolic radius `kη` up to `|z| ≤ min(r_max, 0.96)`, each circle carrying
/// an even number of equally spaced angles. A reported collision certifies
/// non-injectivity up to evaluation error; a clean pass is only heuristic.
pub fn univalence_probe(f: &AnalyticFn, mesh_density: usize) -> UnivalenceReport {
    let eta = 1.0 / mesh_density.max(1) as f64;
    let rho_max = (f.r_max().min(0.96)).atanh();
    let mut pts: Vec<Complex64> = vec![Complex64::new(0.0, 0.0)];
    let mut k = 1;
    while k as f64 * eta <= rho_max {
        let rho = k as f64 * eta;
        let r = rho.tanh();
        let mut n = ((PI * (2.0 * rho).sinh() / eta).ceil() as usize).max(4);
        n += n % 2;
        pts.extend((0..n).map(|j| Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64)));
        k += 1;
    }
    let jets: Vec<(Complex64, Complex64)> = pts.iter().map(|&z| f.jet(z)).collect();
    let sep = (4.0 * eta).tanh();
    let koebe = 0.25 * sep * 0.99;

    // sort by real part of the image so that only nearby candidates are compared
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| jets[a].0.re.total_cmp(&jets[b].0.re).then(a.cmp(&b)));
    let radius: Vec<f64> = pts.iter().zip(&jets).map(|(z, (_, d))| koebe * d.norm() * (1.0 - z.norm_sqr())).collect();
    let max_radius = radius.iter().copied().fold(0.0, f64::max);

    let mut first: Option<(usize, usize)> = None;
    for (pos, &i) in order.iter().enumerate() {
        let (fi, _) = jets[i];
        for &j in &order[pos + 1..] {
            let (fj, _) = jets[j];
            if fj.re - fi.re > max_radius {
                break;
            }
            let thr = radius[i].max(radius[j]);
            if (fi - fj).norm() < thr && pseudo_hyperbolic(pts[i], pts[j]) > sep {
                let pair = if i < j { (i, j) } else { (j, i) };
                if first.is_none_or(|p| pair < p) {
                    first = Some(pair);
                }
            }
        }
    }
    UnivalenceReport {
        injective_on_mesh: first.is_none(),
        first_collision: first.map(|(i, j)| {
            (
                DiskPoint::from_complex(pts[i]).expect("mesh point inside disk"),
                DiskPoint::from_complex(pts[j]).expect("mesh point inside disk"),
            )
        }),
        mesh_points: pts.len(),
    }
}
