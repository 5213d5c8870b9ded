#![allow(dead_code)]

use stit_core::geom::{AxisBox, HPolytope, Halfspace};
use stit_core::StreamRng;

/// Unit cube cut by `extra` random halfspaces that keep the center strictly
/// inside, so the polytope is never a plain box.
pub fn random_polytope(d: usize, extra: usize, rng: &mut StreamRng) -> HPolytope {
    let mut hs = AxisBox::unit(d).to_polytope().halfspaces().to_vec();
    for _ in 0..extra.max(1) {
        let n: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n: Vec<f64> = n.iter().map(|x| x / len).collect();
        let center: f64 = n.iter().map(|x| 0.5 * x).sum();
        hs.push(Halfspace::new(n, center + rng.uniform_in(0.05, 0.6)));
    }
    HPolytope::new(d, hs).unwrap()
}

/// Rejection-sampling volume estimate inside the bounding box: (mean, stderr).
pub fn mc_volume(p: &HPolytope, samples: usize, rng: &mut StreamRng) -> (f64, f64) {
    let b = p.bounding_box().unwrap();
    let box_vol = b.volume();
    let mut hits = 0usize;
    let mut x = vec![0.0; p.dim()];
    for _ in 0..samples {
        for i in 0..p.dim() {
            x[i] = rng.uniform_in(b.low[i], b.high[i]);
        }
        if p.contains(&x) {
            hits += 1;
        }
    }
    let f = hits as f64 / samples as f64;
    (
        box_vol * f,
        box_vol * (f * (1.0 - f) / samples as f64).sqrt(),
    )
}

pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Two boxes overlap in a set of positive volume.
pub fn boxes_overlap(a: &AxisBox, b: &AxisBox) -> bool {
    (0..a.dim()).all(|i| a.low[i].max(b.low[i]) < a.high[i].min(b.high[i]))
}
