//! Approximation error `E[(f(X) - f_bar(X))^2]` of cell-conditional means.

use serde::{Deserialize, Serialize};
use stit_core::geom::Halfspace;
use stit_core::mondrian::diameter_moment_bound;
use stit_core::stats::mean_estimate;
use stit_core::{AxisBox, Error, HPolytope, SamplerSpec, StreamKey, StreamRng, TessellationTree};

use crate::risk::par_indexed;
use crate::target::{Link, Measure, RidgeTarget};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BiasConfig {
    pub a: Vec<Vec<f64>>,
    pub link: Link,
    pub mu: Measure,
    pub sampler: SamplerSpec,
    /// Monte-Carlo points per cell for the conditional means.
    pub n_mc: usize,
    /// Fresh evaluation points per replicate.
    pub n_eval: usize,
    pub replicates: usize,
}

impl Default for BiasConfig {
    fn default() -> Self {
        BiasConfig {
            a: vec![vec![1.0]],
            link: Link::Linear,
            mu: Measure::UniformCube,
            sampler: SamplerSpec::Mondrian {
                weights: vec![1.0],
                lifetime: 5.0,
            },
            n_mc: 2_000,
            n_eval: 2_000,
            replicates: 400,
        }
    }
}

impl BiasConfig {
    pub fn target(&self) -> stit_core::Result<RidgeTarget> {
        let s = self.a.len();
        let radius = self
            .a
            .iter()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
            * (self.a.first().map_or(0, |r| r.len()) as f64).sqrt();
        RidgeTarget::new(
            self.a.clone(),
            self.link,
            self.link.lipschitz(s, radius),
            1.0,
            0.0,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub lambda: f64,
    pub bias: f64,
    pub stderr: f64,
    /// `L^2 |A|_F^2 E[D(Z_0)^2] / lambda^2` for axis-aligned Mondrian samplers.
    pub bound: Option<f64>,
}

fn router(sampler: &SamplerSpec) -> impl Fn(&TessellationTree, &[f64]) -> usize + Sync + '_ {
    move |tree, x| match sampler {
        SamplerSpec::ObliqueLifted { matrix, .. } => tree.route(&matrix.lift(x)),
        _ => tree.route(x),
    }
}

/// Leaf cells in covariate space, in leaf-id order. Leaves of a lifted
/// tree whose preimage has empty interior are `None`.
fn covariate_cells(
    sampler: &SamplerSpec,
    tree: &TessellationTree,
    window: &AxisBox,
) -> stit_core::Result<Vec<Option<HPolytope>>> {
    let cells = tree.leaf_cells()?;
    let SamplerSpec::ObliqueLifted { matrix, .. } = sampler else {
        return Ok(cells.into_iter().map(Some).collect());
    };
    let base = window.to_polytope();
    Ok(cells
        .iter()
        .map(|c| {
            let b = c.as_axis_box()?;
            let mut hs = base.halfspaces().to_vec();
            for (j, col) in matrix.columns().iter().enumerate() {
                hs.push(Halfspace::new(col.clone(), b.high[j]));
                hs.push(Halfspace::new(col.iter().map(|v| -v).collect(), -b.low[j]));
            }
            HPolytope::new(window.dim(), hs).ok()
        })
        .collect())
}

/// Conditional means of `f` per leaf. Both covariate laws are uniform, so
/// the conditional law on a cell is uniform on its intersection with the
/// support; it is sampled by rejection from the cell's bounding box, or
/// directly when the cell is a box inside the support.
fn leaf_means(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    mu: Measure,
    cells: &[Option<HPolytope>],
    n_mc: usize,
    rng: &mut StreamRng,
) -> stit_core::Result<Vec<f64>> {
    let mut means = Vec::with_capacity(cells.len());
    for cell in cells {
        let Some(cell) = cell else {
            means.push(0.0);
            continue;
        };
        let direct = mu == Measure::UniformCube && cell.as_axis_box().is_some();
        let bb = cell.bounding_box()?;
        let (mut s, mut hits, mut tries) = (0.0, 0usize, 0usize);
        while hits < n_mc && tries < REJECTION_BUDGET * n_mc {
            tries += 1;
            let x: Vec<f64> = bb
                .low
                .iter()
                .zip(&bb.high)
                .map(|(l, h)| rng.uniform_in(*l, *h))
                .collect();
            if direct || (cell.contains(&x) && mu.in_support(&x)) {
                s += f(&x);
                hits += 1;
            }
        }
        means.push(if hits == 0 {
            f(cell.witness())
        } else {
            s / hits as f64
        });
    }
    Ok(means)
}

const REJECTION_BUDGET: usize = 1000;

/// Bias of an arbitrary regression function `f` on `R^d`. Replicate `r`
/// draws the tessellation and cell means from `key.child(r).child(0)` and
/// evaluation points from `key.child(r).child(1)`; returns mean and stderr.
#[allow(clippy::too_many_arguments)]
pub fn estimate_bias_of(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    d: usize,
    mu: Measure,
    sampler: &SamplerSpec,
    n_mc: usize,
    n_eval: usize,
    replicates: usize,
    key: StreamKey,
) -> stit_core::Result<(f64, f64)> {
    if sampler.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: sampler.dim(),
        });
    }
    if n_mc == 0 || n_eval == 0 || replicates < 2 {
        return Err(Error::InvalidParameter(
            "n_mc, n_eval must be positive and replicates >= 2".into(),
        ));
    }
    let window = mu.support_box(d);
    let route = router(sampler);
    let per_rep = par_indexed(replicates, |r| -> stit_core::Result<f64> {
        let mut rng = key.child(r as u64).child(0).rng();
        let tree = sampler.sample(&window, &mut rng)?;
        let cells = covariate_cells(sampler, &tree, &window)?;
        let means = leaf_means(f, mu, &cells, n_mc, &mut rng)?;
        let mut erng = key.child(r as u64).child(1).rng();
        let mut s = 0.0;
        for _ in 0..n_eval {
            let x = mu.sample(d, &mut erng);
            let e = f(&x) - means[route(&tree, &x)];
            s += e * e;
        }
        Ok(s / n_eval as f64)
    })
    .into_iter()
    .collect::<stit_core::Result<Vec<_>>>()?;
    let est = mean_estimate(&per_rep);
    Ok((est.mean, est.stderr))
}

/// Bias of the configured ridge target, with the diameter bound when the
/// sampler is an axis-aligned Mondrian.
pub fn estimate_bias(cfg: &BiasConfig, key: StreamKey) -> stit_core::Result<BiasEstimate> {
    let target = cfg.target()?;
    let f = |x: &[f64]| target.f(x);
    let (bias, stderr) = estimate_bias_of(
        &f,
        target.dim(),
        cfg.mu,
        &cfg.sampler,
        cfg.n_mc,
        cfg.n_eval,
        cfg.replicates,
        key,
    )?;
    let lambda = cfg.sampler.lifetime();
    let bound = match &cfg.sampler {
        SamplerSpec::Mondrian { weights, .. } => {
            let coords: Vec<usize> = (0..weights.len()).collect();
            let a2: f64 = cfg.a.iter().flatten().map(|v| v * v).sum();
            Some(
                target.lipschitz.powi(2) * a2 * diameter_moment_bound(weights, &coords, 2, 0.0)
                    / (lambda * lambda),
            )
        }
        _ => None,
    };
    Ok(BiasEstimate {
        lambda,
        bias,
        stderr,
        bound,
    })
}
