//! Monte-Carlo risk of tree and forest estimators against the noise-free
//! regression function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stit_core::regress::fit_forest_with_streams;
use stit_core::stats::mean_estimate;
use stit_core::{AxisBox, ForestModel, SamplerSpec, StreamKey};

use crate::target::{sample_dataset, Measure, RidgeTarget};

/// Estimator configuration: sampler, number of trees and training window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub sampler: SamplerSpec,
    pub trees: usize,
    /// Training window; the support box of the covariate law when absent.
    #[serde(default)]
    pub window: Option<AxisBox>,
}

impl ModelSpec {
    pub fn new(sampler: SamplerSpec, trees: usize) -> Self {
        ModelSpec {
            sampler,
            trees,
            window: None,
        }
    }

    pub fn window_for(&self, mu: Measure) -> AxisBox {
        self.window
            .clone()
            .unwrap_or_else(|| mu.support_box(self.sampler.dim()))
    }
}

/// Mean squared error `E[(f_hat(X) - f(X))^2]` over replicates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub risk: f64,
    pub stderr: f64,
    pub n_test: usize,
    pub replicates: usize,
}

/// Runs `f(0..n)` on the current rayon pool and returns results in index
/// order.
pub fn par_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Fits a forest whose tree `i` draws from `key.child(i)`.
pub fn fit_model(
    spec: &ModelSpec,
    data: &stit_core::Dataset,
    window: &AxisBox,
    key: StreamKey,
) -> stit_core::Result<ForestModel> {
    let keys: Vec<StreamKey> = (0..spec.trees as u64).map(|i| key.child(i)).collect();
    fit_forest_with_streams(data, &spec.sampler, Some(window), &keys, key.0)
}

/// Squared error of one fitted model on `n_test` fresh points.
pub fn test_error(
    model: &ForestModel,
    target: &RidgeTarget,
    mu: Measure,
    n_test: usize,
    key: StreamKey,
) -> f64 {
    let mut rng = key.rng();
    let mut sum = 0.0;
    for _ in 0..n_test {
        let x = mu.sample(target.dim(), &mut rng);
        let e = model.predict(&x) - target.f(&x);
        sum += e * e;
    }
    sum / n_test as f64
}

/// Risk of one replicate: training data from `key.child(0)`, trees from
/// `key.child(1)`, test points from `key.child(2)`.
pub fn replicate_risk(
    spec: &ModelSpec,
    target: &RidgeTarget,
    mu: Measure,
    n_train: usize,
    n_test: usize,
    key: StreamKey,
) -> stit_core::Result<f64> {
    let data = sample_dataset(target, mu, n_train, &mut key.child(0).rng())?;
    let window = spec.window_for(mu);
    let model = fit_model(spec, &data, &window, key.child(1))?;
    Ok(test_error(&model, target, mu, n_test, key.child(2)))
}

/// Replicate `r` uses stream `key.child(r)`; replicates run in parallel.
pub fn estimate_risk(
    spec: &ModelSpec,
    target: &RidgeTarget,
    mu: Measure,
    n_train: usize,
    n_test: usize,
    replicates: usize,
    key: StreamKey,
) -> stit_core::Result<RiskEstimate> {
    if n_train == 0 || n_test == 0 || replicates == 0 || spec.trees == 0 {
        return Err(stit_core::Error::InvalidParameter(
            "counts must be positive".into(),
        ));
    }
    let risks = par_indexed(replicates, |r| {
        replicate_risk(spec, target, mu, n_train, n_test, key.child(r as u64))
    })
    .into_iter()
    .collect::<stit_core::Result<Vec<f64>>>()?;
    let est = mean_estimate(&risks);
    Ok(RiskEstimate {
        risk: est.mean,
        stderr: est.stderr,
        n_test,
        replicates,
    })
}
