//! Risk lower bound for axis-aligned weighted Mondrian trees on linear
//! targets.

use serde::{Deserialize, Serialize};
use stit_core::{AxisBox, Error, SamplerSpec, StreamKey};

use crate::risk::{estimate_risk, ModelSpec};
use crate::target::{Link, Measure, RidgeTarget};

/// Closed-form lower bound and its parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuboptimalityBound {
    /// Per-coordinate bias terms `a_i^2/(2 lambda^2 w_i^2) (1 - 2/(lambda w_i) - 1/(lambda^2 w_i^2))`.
    pub raw_terms: Vec<f64>,
    /// Sum of the terms with negative ones replaced by 0.
    pub bias: f64,
    /// `sigma^2 (n / (2^d lambda^d prod w_i) + 1)^{-1}`.
    pub variance: f64,
}

impl SuboptimalityBound {
    pub fn total(&self) -> f64 {
        self.bias + self.variance
    }
}

pub fn suboptimality_bound(
    a: &[f64],
    lambda: f64,
    w: &[f64],
    sigma: f64,
    n: usize,
) -> stit_core::Result<SuboptimalityBound> {
    if a.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: w.len(),
        });
    }
    if a.iter().any(|&ai| ai == 0.0) {
        return Err(Error::InvalidTarget(
            "every coefficient a_i must be nonzero".into(),
        ));
    }
    if !(lambda > 0.0) || w.iter().any(|&wi| !(wi > 0.0)) {
        return Err(Error::InvalidParameter(
            "lifetime and weights must be positive".into(),
        ));
    }
    let raw_terms: Vec<f64> = a
        .iter()
        .zip(w)
        .map(|(ai, wi)| {
            let lw = lambda * wi;
            ai * ai / (2.0 * lw * lw) * (1.0 - 2.0 / lw - 1.0 / (lw * lw))
        })
        .collect();
    let bias = raw_terms.iter().map(|t| t.max(0.0)).sum();
    let d = a.len() as i32;
    let cells = 2f64.powi(d) * lambda.powi(d) * w.iter().product::<f64>();
    let variance = sigma * sigma / (n as f64 / cells + 1.0);
    Ok(SuboptimalityBound {
        raw_terms,
        bias,
        variance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuboptimalityResult {
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub empirical_risk: f64,
    pub stderr: f64,
    pub bound: SuboptimalityBound,
    pub lower_bound: f64,
    /// `empirical_risk >= lower_bound - 3 stderr`.
    pub pass: bool,
}

/// Single weighted-Mondrian trees on `X ~ U[0,1]^d`, `Y = <a, X> + sigma N`.
#[allow(clippy::too_many_arguments)]
pub fn suboptimality_check(
    a: &[f64],
    lambda: f64,
    w: &[f64],
    sigma: f64,
    n: usize,
    n_test: usize,
    replicates: usize,
    key: StreamKey,
) -> stit_core::Result<SuboptimalityResult> {
    let bound = suboptimality_bound(a, lambda, w, sigma, n)?;
    let target = RidgeTarget::single_index(a.to_vec(), Link::Linear, sigma)?;
    let spec = ModelSpec {
        sampler: SamplerSpec::Mondrian {
            weights: w.to_vec(),
            lifetime: lambda,
        },
        trees: 1,
        window: Some(AxisBox::unit(a.len())),
    };
    let est = estimate_risk(
        &spec,
        &target,
        Measure::UniformCube,
        n,
        n_test,
        replicates,
        key,
    )?;
    let lower_bound = bound.total();
    Ok(SuboptimalityResult {
        lambda,
        weights: w.to_vec(),
        empirical_risk: est.risk,
        stderr: est.stderr,
        pass: est.risk >= lower_bound - 3.0 * est.stderr,
        lower_bound,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let b = suboptimality_bound(&[1.0, 1.0], 10.0, &[0.5, 0.5], 0.0, 100).unwrap();
        assert!((b.bias - 0.0224).abs() < 1e-15);
        assert_eq!(b.variance, 0.0);
        let b = suboptimality_bound(&[1.0], 1.0, &[1.0], 1.0, 2).unwrap();
        assert_eq!(b.bias, 0.0);
        assert!(b.raw_terms[0] < 0.0);
        assert_eq!(b.variance, 0.5);
        assert!(suboptimality_bound(&[1.0, 0.0], 1.0, &[0.5, 0.5], 1.0, 2).is_err());
    }
}
