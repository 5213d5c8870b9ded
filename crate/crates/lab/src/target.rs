//! Ridge-function regression targets `f(x) = g(A x)` and covariate laws.

use serde::{Deserialize, Serialize};
use stit_core::linalg::{dot, rank};
use stit_core::{AxisBox, Dataset, Error, StreamRng};

/// Link functions `g : R^s -> R`.
///
/// | link        | `g(z)`            | Hölder constant on `|z| <= R`, `beta = 1` |
/// |-------------|-------------------|-------------------------------------------|
/// | `linear`    | `sum_j z_j`       | `sqrt(s)`                                  |
/// | `abs-sum`   | `sum_j |z_j|`     | `sqrt(s)`                                  |
/// | `sine`      | `sum_j sin(z_j)`  | `sqrt(s)`                                  |
/// | `quadratic` | `sum_j z_j^2`     | `2 R`                                      |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Link {
    Linear,
    AbsSum,
    Sine,
    Quadratic,
}

impl Link {
    pub fn eval(self, z: &[f64]) -> f64 {
        match self {
            Link::Linear => z.iter().sum(),
            Link::AbsSum => z.iter().map(|v| v.abs()).sum(),
            Link::Sine => z.iter().map(|v| v.sin()).sum(),
            Link::Quadratic => z.iter().map(|v| v * v).sum(),
        }
    }

    /// Lipschitz constant of the link on the ball of radius `radius` in `R^s`.
    pub fn lipschitz(self, s: usize, radius: f64) -> f64 {
        match self {
            Link::Linear | Link::AbsSum | Link::Sine => (s as f64).sqrt(),
            Link::Quadratic => 2.0 * radius,
        }
    }
}

/// Covariate distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Uniform on `[0,1]^d`.
    UniformCube,
    /// Uniform on the unit Euclidean ball.
    UniformBall,
}

impl Measure {
    pub fn sample(self, d: usize, rng: &mut StreamRng) -> Vec<f64> {
        match self {
            Measure::UniformCube => (0..d).map(|_| rng.uniform()).collect(),
            Measure::UniformBall => {
                let g: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
                let n = dot(&g, &g).sqrt();
                let r = rng.uniform().powf(1.0 / d as f64);
                g.iter().map(|v| v * r / n).collect()
            }
        }
    }

    pub fn in_support(self, x: &[f64]) -> bool {
        match self {
            Measure::UniformCube => x.iter().all(|v| (0.0..=1.0).contains(v)),
            Measure::UniformBall => dot(x, x) <= 1.0,
        }
    }

    /// Smallest axis box containing the support.
    pub fn support_box(self, d: usize) -> AxisBox {
        match self {
            Measure::UniformCube => AxisBox::unit(d),
            Measure::UniformBall => AxisBox::cube(d, -1.0, 1.0),
        }
    }
}

/// `Y = g(A x) + sigma * N(0, 1)` with the rows of `A` spanning the relevant
/// subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeTarget {
    pub a: Vec<Vec<f64>>,
    pub link: Link,
    pub lipschitz: f64,
    pub beta: f64,
    pub sigma: f64,
}

impl RidgeTarget {
    pub fn new(
        a: Vec<Vec<f64>>,
        link: Link,
        lipschitz: f64,
        beta: f64,
        sigma: f64,
    ) -> stit_core::Result<Self> {
        let t = RidgeTarget {
            a,
            link,
            lipschitz,
            beta,
            sigma,
        };
        t.validate()?;
        Ok(t)
    }

    /// Single-index target `g(<a, x>)` with the documented link constant.
    pub fn single_index(a: Vec<f64>, link: Link, sigma: f64) -> stit_core::Result<Self> {
        let radius = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let l = link.lipschitz(1, radius);
        Self::new(vec![a], link, l, 1.0, sigma)
    }

    pub fn validate(&self) -> stit_core::Result<()> {
        let d = self.a.first().map(|r| r.len()).unwrap_or(0);
        if d == 0 || self.a.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidTarget(
                "A must be a nonempty s x d matrix".into(),
            ));
        }
        let r = rank(&self.a, 1e-9);
        if r < self.a.len() {
            return Err(Error::RankDeficient {
                rank: r,
                needed: self.a.len(),
            });
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) || !(self.lipschitz > 0.0) || !(self.sigma >= 0.0)
        {
            return Err(Error::InvalidTarget(
                "need L > 0, beta in (0, 1] and sigma >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.a[0].len()
    }

    pub fn subspace_dim(&self) -> usize {
        self.a.len()
    }

    /// Noise-free regression function.
    pub fn f(&self, x: &[f64]) -> f64 {
        let z: Vec<f64> = self.a.iter().map(|r| dot(r, x)).collect();
        self.link.eval(&z)
    }
}

/// Draws `n` pairs; per row the covariates are drawn before the noise.
pub fn sample_dataset(
    target: &RidgeTarget,
    mu: Measure,
    n: usize,
    rng: &mut StreamRng,
) -> stit_core::Result<Dataset> {
    let d = target.dim();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi = mu.sample(d, rng);
        let noise = if target.sigma > 0.0 {
            target.sigma * rng.normal()
        } else {
            0.0
        };
        y.push(target.f(&xi) + noise);
        x.push(xi);
    }
    Dataset::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_linear_target_is_first_coordinate() {
        let t = RidgeTarget::single_index(vec![1.0, 0.0], Link::Linear, 0.0).unwrap();
        let data = sample_dataset(&t, Measure::UniformCube, 100, &mut StreamRng::new(1)).unwrap();
        for (x, y) in data.x().iter().zip(data.y()) {
            assert_eq!(*y, x[0]);
        }
    }

    #[test]
    fn links_and_constants() {
        assert_eq!(Link::AbsSum.eval(&[-1.0, 2.0]), 3.0);
        assert_eq!(Link::Quadratic.eval(&[3.0]), 9.0);
        assert_eq!(Link::Quadratic.lipschitz(1, 2.0), 4.0);
        assert!(RidgeTarget::new(
            vec![vec![1.0, 1.0], vec![2.0, 2.0]],
            Link::Linear,
            1.0,
            1.0,
            0.0
        )
        .is_err());
    }
}
