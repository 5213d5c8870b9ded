//! Convergence-rate experiments: risk on a grid of sample sizes with
//! lifetimes from the rate schedules, and log-log slope fits.

use serde::{Deserialize, Serialize};
use stit_core::linalg::{dot, norm};
use stit_core::oblique::{lifetime_schedule, perp_norm21, ScheduleRule};
use stit_core::stats::ols;
use stit_core::{Error, FeatureMatrix, SamplerSpec, StreamKey, SubspaceSpec};

use crate::risk::{estimate_risk, ModelSpec};
use crate::target::{Link, Measure, RidgeTarget};

/// Estimator family compared in a rate experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Oblique Mondrian forest with features aligned to the relevant subspace.
    Oblique,
    /// Axis-aligned Mondrian with uniform weights.
    Axis,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Oblique => "oblique",
            Family::Axis => "axis",
        }
    }

    fn stream_id(self) -> u64 {
        match self {
            Family::Oblique => 0,
            Family::Axis => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateConfig {
    /// Rows spanning the relevant subspace; `(1,...,1)/sqrt(d)` in `R^3` by default.
    pub a: Vec<Vec<f64>>,
    pub link: Link,
    pub sigma: f64,
    pub mu: Measure,
    pub grid: Vec<usize>,
    pub replicates: usize,
    pub n_test: usize,
    pub oblique_trees: usize,
    pub axis_trees: usize,
    /// Size of the off-subspace feature columns before normalization.
    pub eps: f64,
    /// Candidate schedule multipliers, tried at the smallest sample size.
    pub multipliers: Vec<f64>,
    /// Fixed multipliers; skip the tuning step when set.
    pub oblique_multiplier: Option<f64>,
    pub axis_multiplier: Option<f64>,
    /// Allowed deviation of the fitted slope from the theoretical exponent.
    pub tolerance: f64,
    pub families: Vec<Family>,
}

impl Default for RateConfig {
    fn default() -> Self {
        let r = 1.0 / 3f64.sqrt();
        RateConfig {
            a: vec![vec![r, r, r]],
            link: Link::Linear,
            sigma: 0.5,
            mu: Measure::UniformCube,
            grid: vec![1_000, 3_000, 10_000, 30_000, 100_000],
            replicates: 20,
            n_test: 2_000,
            oblique_trees: 10,
            axis_trees: 1,
            eps: 1e-6,
            multipliers: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            oblique_multiplier: None,
            axis_multiplier: None,
            tolerance: 0.15,
            families: vec![Family::Oblique, Family::Axis],
        }
    }
}

impl RateConfig {
    pub fn target(&self) -> stit_core::Result<RidgeTarget> {
        let radius = self.a.iter().map(|r| norm(r)).sum::<f64>() * (self.a[0].len() as f64).sqrt();
        let l = self.link.lipschitz(self.a.len(), radius);
        RidgeTarget::new(self.a.clone(), self.link, l, 1.0, self.sigma)
    }

    pub fn validate(&self) -> stit_core::Result<()> {
        self.target()?;
        let mut g = self.grid.clone();
        g.sort_unstable();
        g.dedup();
        if g.len() < 4 || g[0] == 0 || (g[g.len() - 1] as f64 / g[0] as f64).log10() < 1.5 {
            return Err(Error::InvalidParameter(
                "need at least 4 grid points spanning 1.5 decades".into(),
            ));
        }
        if self.replicates < 2
            || self.n_test == 0
            || self.oblique_trees == 0
            || self.axis_trees == 0
        {
            return Err(Error::InvalidParameter(
                "replicates >= 2 and positive counts required".into(),
            ));
        }
        if self.multipliers.is_empty() || self.multipliers.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::InvalidParameter(
                "multipliers must be positive".into(),
            ));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive".into()));
        }
        Ok(())
    }
}

/// One grid point of a rate experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub lambda: f64,
    pub trees: usize,
    pub risk: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub family: Family,
    pub multiplier: f64,
    pub grid: Vec<RatePoint>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub expected_slope: f64,
    pub pass: bool,
}

/// Features `[basis of S, eps * basis of S^perp]`, normalized to
/// `|A|_{2,1} = 1`.
pub fn aligned_features(s: &SubspaceSpec, eps: f64) -> stit_core::Result<FeatureMatrix> {
    let d = s.ambient_dim();
    let mut cols: Vec<Vec<f64>> = s.basis().to_vec();
    let mut perp: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        for b in cols.iter().take(s.dim()).chain(&perp) {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, bi)| *x -= c * bi);
        }
        let n = norm(&v);
        if n > 1e-8 && perp.len() < d - s.dim() {
            perp.push(v.iter().map(|x| x / n).collect());
        }
    }
    cols.extend(
        perp.into_iter()
            .map(|v| v.iter().map(|x| eps * x).collect()),
    );
    Ok(FeatureMatrix::from_columns(cols)?.normalized())
}

struct Plan {
    rule_s: usize,
    trees: usize,
    eps: f64,
    sampler: Box<dyn Fn(f64) -> SamplerSpec + Sync>,
    expected_slope: f64,
}

fn plan(cfg: &RateConfig, target: &RidgeTarget, family: Family) -> stit_core::Result<Plan> {
    let d = target.dim();
    let s = target.subspace_dim();
    let beta = target.beta;
    match family {
        Family::Oblique => {
            let sub = SubspaceSpec::from_spanning(&target.a)?;
            let a = aligned_features(&sub, cfg.eps)?;
            let eps = perp_norm21(&a, &sub);
            Ok(Plan {
                rule_s: s,
                trees: cfg.oblique_trees,
                eps,
                sampler: Box::new(move |lifetime| SamplerSpec::ObliqueLifted {
                    matrix: a.clone(),
                    lifetime,
                }),
                expected_slope: -2.0 * beta / (s as f64 + 2.0 * beta),
            })
        }
        Family::Axis => Ok(Plan {
            rule_s: d,
            trees: cfg.axis_trees,
            eps: 0.0,
            sampler: Box::new(move |lifetime| SamplerSpec::Mondrian {
                weights: vec![1.0 / d as f64; d],
                lifetime,
            }),
            expected_slope: -2.0 * beta / (d as f64 + 2.0 * beta),
        }),
    }
}

fn lifetime(target: &RidgeTarget, p: &Plan, n: usize, c: f64) -> stit_core::Result<f64> {
    Ok(lifetime_schedule(
        ScheduleRule::C1,
        n,
        p.rule_s,
        target.dim(),
        target.beta,
        target.lipschitz,
        p.eps,
        c,
    )?
    .lifetime)
}

/// Multiplier with the smallest risk at the smallest sample size; ties go
/// to the earlier candidate.
pub fn tune_multiplier(cfg: &RateConfig, family: Family, key: StreamKey) -> stit_core::Result<f64> {
    let target = cfg.target()?;
    let p = plan(cfg, &target, family)?;
    let n0 = *cfg.grid.iter().min().unwrap();
    let mut best = (f64::INFINITY, cfg.multipliers[0]);
    for (i, &c) in cfg.multipliers.iter().enumerate() {
        let lam = lifetime(&target, &p, n0, c)?;
        let spec = ModelSpec::new((p.sampler)(lam), p.trees);
        let est = estimate_risk(
            &spec,
            &target,
            cfg.mu,
            n0,
            cfg.n_test,
            cfg.replicates,
            key.child(i as u64),
        )?;
        if est.risk < best.0 {
            best = (est.risk, c);
        }
    }
    Ok(best.1)
}

/// Stream layout: `key.child(family).child(0)` tunes the multiplier,
/// `key.child(family).child(1).child(grid index)` runs the grid.
pub fn rate_experiment(
    cfg: &RateConfig,
    family: Family,
    key: StreamKey,
) -> stit_core::Result<RateFit> {
    cfg.validate()?;
    let target = cfg.target()?;
    let p = plan(cfg, &target, family)?;
    let fkey = key.child(family.stream_id());
    let fixed = match family {
        Family::Oblique => cfg.oblique_multiplier,
        Family::Axis => cfg.axis_multiplier,
    };
    let multiplier = match fixed {
        Some(c) => c,
        None => tune_multiplier(cfg, family, fkey.child(0))?,
    };
    let mut ns = cfg.grid.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut grid = Vec::with_capacity(ns.len());
    for (gi, &n) in ns.iter().enumerate() {
        let lam = lifetime(&target, &p, n, multiplier)?;
        let spec = ModelSpec::new((p.sampler)(lam), p.trees);
        let est = estimate_risk(
            &spec,
            &target,
            cfg.mu,
            n,
            cfg.n_test,
            cfg.replicates,
            fkey.child(1).child(gi as u64),
        )?;
        grid.push(RatePoint {
            n,
            lambda: lam,
            trees: p.trees,
            risk: est.risk,
            stderr: est.stderr,
        });
    }
    let (slope, slope_stderr) = fit_slope(&grid);
    Ok(RateFit {
        family,
        multiplier,
        pass: (slope - p.expected_slope).abs() <= cfg.tolerance,
        expected_slope: p.expected_slope,
        grid,
        slope,
        slope_stderr,
    })
}

/// Least-squares slope of `ln risk` on `ln n`. The stderr combines the
/// residual scatter with the per-point risk stderrs carried through the
/// linear fit.
pub fn fit_slope(grid: &[RatePoint]) -> (f64, f64) {
    let xs: Vec<f64> = grid.iter().map(|g| (g.n as f64).ln()).collect();
    let ys: Vec<f64> = grid.iter().map(|g| g.risk.ln()).collect();
    let fit = ols(&xs, &ys);
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let carried: f64 = xs
        .iter()
        .zip(grid)
        .map(|(x, g)| ((x - xbar) / sxx * g.stderr / g.risk).powi(2))
        .sum();
    (fit.slope, (fit.slope_stderr.powi(2) + carried).sqrt())
}
