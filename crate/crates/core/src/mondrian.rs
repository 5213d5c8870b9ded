//! Weighted Mondrian processes on axis boxes.
//!
//! A box with sides `s_i` splits at rate `sum_i omega_i s_i`, along axis `i`
//! with probability proportional to `omega_i s_i`, at a uniform position on
//! that side. The stationary zero cell is the box
//! `prod_i [-T_i1, T_i2]` with all `T` independent `Exponential(lambda omega_i)`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
pub use crate::geom::AxisBox;
use crate::geom::CONTAIN_TOL;
use crate::rng::StreamRng;
use crate::stats;
use crate::tessellate::{DiscreteDirectionalDistribution, Node, TessellationTree};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedMondrianSpec {
    weights: Vec<f64>,
    lifetime: f64,
}

impl WeightedMondrianSpec {
    pub fn new(weights: Vec<f64>, lifetime: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("weights must be nonempty"));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(invalid("weights must be positive"));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(invalid("weights must sum to 1"));
        }
        if !(lifetime >= 0.0 && lifetime.is_finite()) {
            return Err(invalid("lifetime must be nonnegative and finite"));
        }
        Ok(WeightedMondrianSpec { weights, lifetime })
    }

    /// Uniform weights `1/d`.
    pub fn standard(d: usize, lifetime: f64) -> Result<Self> {
        Self::new(vec![1.0 / d as f64; d], lifetime)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn with_lifetime(&self, lifetime: f64) -> Result<Self> {
        Self::new(self.weights.clone(), lifetime)
    }

    pub fn directional_distribution(&self) -> DiscreteDirectionalDistribution {
        DiscreteDirectionalDistribution::mondrian(&self.weights).expect("validated weights")
    }
}

/// Samples a weighted Mondrian tessellation of `window`.
pub fn mondrian_sample(
    window: &AxisBox,
    spec: &WeightedMondrianSpec,
    rng: &mut StreamRng,
) -> Result<TessellationTree> {
    let d = window.dim();
    if spec.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: spec.dim(),
        });
    }
    if window.sides().iter().any(|&s| s < 2.0 * CONTAIN_TOL) {
        return Err(invalid("mondrian window must be nondegenerate"));
    }
    let lifetime = spec.lifetime;
    let w = &spec.weights;
    let polytope = window.to_polytope();
    if lifetime == 0.0 {
        return Ok(TessellationTree::trivial(polytope, 0.0));
    }
    let mut nodes: Vec<Node> = Vec::new();
    let mut n_leaves = 0;
    let mut stack: Vec<(AxisBox, f64, Option<usize>)> = vec![(window.clone(), 0.0, None)];
    let mut rates = vec![0.0; d];
    while let Some((cell, t0, parent)) = stack.pop() {
        let idx = nodes.len();
        if let Some(p) = parent {
            if let Node::Split { upper, .. } = &mut nodes[p] {
                *upper = idx;
            }
        }
        for i in 0..d {
            rates[i] = w[i] * (cell.high[i] - cell.low[i]);
        }
        let total: f64 = rates.iter().sum();
        let mut t = t0;
        loop {
            t += rng.exponential(total);
            if t >= lifetime {
                nodes.push(Node::Leaf { id: n_leaves });
                n_leaves += 1;
                break;
            }
            let i = rng.categorical(&rates);
            let (lo, hi) = (cell.low[i], cell.high[i]);
            let c = rng.uniform_in(lo, hi);
            if c - lo < 2.0 * CONTAIN_TOL || hi - c < 2.0 * CONTAIN_TOL {
                continue;
            }
            let mut normal = vec![0.0; d];
            normal[i] = 1.0;
            nodes.push(Node::Split {
                normal,
                offset: c,
                birth_time: t,
                upper: usize::MAX,
            });
            let mut lower = cell.clone();
            lower.high[i] = c;
            let mut upper = cell;
            upper.low[i] = c;
            stack.push((upper, t, Some(idx)));
            stack.push((lower, t, None));
            break;
        }
    }
    TessellationTree::from_parts(polytope, lifetime, nodes)
}

/// Draws the stationary zero cell; per axis the lower extent is drawn before
/// the upper one.
pub fn zero_cell_sample(spec: &WeightedMondrianSpec, rng: &mut StreamRng) -> AxisBox {
    let d = spec.dim();
    let mut low = vec![0.0; d];
    let mut high = vec![0.0; d];
    for i in 0..d {
        let rate = spec.lifetime * spec.weights[i];
        low[i] = -rng.exponential(rate);
        high[i] = rng.exponential(rate);
    }
    AxisBox { low, high }
}

/// Expected number of leaves `prod_i (1 + lambda omega_i s_i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeafCountFormula {
    pub value: f64,
    /// Set when the box is not the unit cube; the product form for general
    /// boxes is checked by simulation only.
    pub derived: bool,
}

pub fn expected_leaf_count(window: &AxisBox, spec: &WeightedMondrianSpec) -> LeafCountFormula {
    let sides = window.sides();
    let value = sides
        .iter()
        .zip(&spec.weights)
        .map(|(s, w)| 1.0 + spec.lifetime * w * s)
        .product();
    LeafCountFormula {
        value,
        derived: sides.iter().any(|&s| s != 1.0),
    }
}

/// `E[vol(Z_0)] = 2^d / (lambda^d prod_i omega_i)`.
pub fn expected_zero_cell_volume(spec: &WeightedMondrianSpec) -> f64 {
    spec.weights
        .iter()
        .map(|w| 2.0 / (spec.lifetime * w))
        .product()
}

/// Erlang bound on `E[D(P_S Z_0)^k 1{D >= r}]` at unit lifetime:
/// `omega_S^{-k} Gamma(2s+k)/Gamma(2s) sum_{n<2s+k} (r omega_S)^n e^{-r omega_S}/n!`.
pub fn diameter_moment_bound(weights: &[f64], coords: &[usize], k: usize, r: f64) -> f64 {
    let s = coords.len();
    let omega_s = coords
        .iter()
        .map(|&i| weights[i])
        .fold(f64::INFINITY, f64::min);
    libm::pow(omega_s, -(k as f64)) * stats::erlang_tail_moment(2 * s, k, r * omega_s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiameterStats {
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub reps: usize,
    /// `estimate <= bound + 3 stderr`.
    pub pass: bool,
}

/// Monte-Carlo estimate of `E[D(P_S Z_0)^k 1{D >= r}]` from exact box
/// diameters of sampled zero cells, with the Erlang bound.
pub fn projected_zero_cell_diameter_stats(
    spec: &WeightedMondrianSpec,
    coords: &[usize],
    k: usize,
    r: f64,
    reps: usize,
    rng: &mut StreamRng,
) -> Result<DiameterStats> {
    if coords.is_empty() {
        return Err(invalid("relevant coordinate set must be nonempty"));
    }
    if let Some(&bad) = coords.iter().find(|&&i| i >= spec.dim()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            max: spec.dim() - 1,
        });
    }
    if spec.lifetime != 1.0 {
        return Err(invalid("diameter bounds are stated at unit lifetime"));
    }
    if reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    let mut vals = Vec::with_capacity(reps);
    for _ in 0..reps {
        let z = zero_cell_sample(spec, rng);
        let diam = libm::sqrt(
            coords
                .iter()
                .map(|&i| {
                    let s = z.high[i] - z.low[i];
                    s * s
                })
                .sum(),
        );
        vals.push(if diam >= r {
            libm::pow(diam, k as f64)
        } else {
            0.0
        });
    }
    let est = stats::mean_estimate(&vals);
    let bound = diameter_moment_bound(&spec.weights, coords, k, r);
    Ok(DiameterStats {
        estimate: est.mean,
        stderr: est.stderr,
        bound,
        reps,
        pass: est.mean <= bound + 3.0 * est.stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(WeightedMondrianSpec::new(vec![0.5, 0.6], 1.0).is_err());
        assert!(WeightedMondrianSpec::new(vec![0.0, 1.0], 1.0).is_err());
        assert!(WeightedMondrianSpec::new(vec![0.5, 0.5], -1.0).is_err());
    }

    #[test]
    fn closed_forms() {
        let spec = WeightedMondrianSpec::new(vec![0.5, 0.5], 3.0).unwrap();
        let f = expected_leaf_count(&AxisBox::unit(2), &spec);
        assert_eq!(f.value, 6.25);
        assert!(!f.derived);
        let f = expected_leaf_count(&AxisBox::unit(2), &spec.with_lifetime(0.0).unwrap());
        assert_eq!(f.value, 1.0);
        let b = AxisBox::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        let f = expected_leaf_count(&b, &spec.with_lifetime(2.0).unwrap());
        assert_eq!(f.value, 6.0);
        assert!(f.derived);
        let spec = WeightedMondrianSpec::new(vec![0.9, 0.1], 3.0).unwrap();
        assert!((expected_leaf_count(&AxisBox::unit(2), &spec).value - 4.81).abs() < 1e-12);
        let spec = WeightedMondrianSpec::new(vec![0.5, 0.5], 2.0).unwrap();
        assert_eq!(expected_zero_cell_volume(&spec), 4.0);
    }

    #[test]
    fn diameter_bound_values() {
        assert!((diameter_moment_bound(&[1.0], &[0], 1, 0.0) - 2.0).abs() < 1e-12);
        assert!((diameter_moment_bound(&[1.0], &[0], 2, 0.0) - 6.0).abs() < 1e-12);
        assert!((diameter_moment_bound(&[0.3, 0.7], &[0, 1], 1, 0.0) - 40.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn tiny_lifetime_single_leaf() {
        let spec = WeightedMondrianSpec::new(vec![0.5, 0.5], 1e-12).unwrap();
        let t = mondrian_sample(&AxisBox::unit(2), &spec, &mut StreamRng::new(1)).unwrap();
        assert_eq!(t.leaf_count(), 1);
    }

    #[test]
    fn cells_stay_boxes() {
        let spec = WeightedMondrianSpec::new(vec![0.3, 0.7], 6.0).unwrap();
        let t = mondrian_sample(&AxisBox::unit(2), &spec, &mut StreamRng::new(4)).unwrap();
        assert!(t.birth_times_valid());
        for c in t.leaf_cells().unwrap() {
            assert!(c.as_axis_box().is_some());
        }
    }

    #[test]
    fn zero_cell_contains_origin() {
        let spec = WeightedMondrianSpec::new(vec![0.2, 0.3, 0.5], 2.0).unwrap();
        let mut rng = StreamRng::new(8);
        for _ in 0..100 {
            let z = zero_cell_sample(&spec, &mut rng);
            assert!(z.contains(&[0.0, 0.0, 0.0]));
        }
    }
}
