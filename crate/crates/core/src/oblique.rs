//! Oblique Mondrian processes built from a feature matrix `A` (d x m).
//!
//! The directional distribution `phi_A` puts weight `|a_i| / |A|_{2,1}` on
//! the direction of column `a_i`. The partition it induces on a point set can
//! be sampled by mapping points to `A^T x` and running a standard Mondrian in
//! `R^m` with lifetime `m lambda / |A|_{2,1}`; the zero cell is the preimage
//! of a lifted Mondrian zero cell.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom::{diameter_estimate, AxisBox, HPolytope, Halfspace};
use crate::linalg::{dot, norm, rank, singular_values};
use crate::mondrian::{mondrian_sample, WeightedMondrianSpec};
use crate::rng::StreamRng;
use crate::stats;
use crate::tessellate::{renormalize, DiscreteDirectionalDistribution, TessellationTree};

/// Numerical rank tolerance for feature matrices.
pub const RANK_TOL: f64 = 1e-9;
/// Default lifted-window padding in units of the expected zero-cell side.
pub const DEFAULT_PADDING: f64 = 3.0;

/// Feature matrix stored by columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRows", into = "MatrixRows")]
pub struct FeatureMatrix {
    dim: usize,
    columns: Vec<Vec<f64>>,
    column_norms: Vec<f64>,
    norm21: f64,
}

/// Row-major serialized form of a [`FeatureMatrix`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixRows {
    pub rows: Vec<Vec<f64>>,
}

impl TryFrom<MatrixRows> for FeatureMatrix {
    type Error = Error;
    fn try_from(m: MatrixRows) -> Result<Self> {
        FeatureMatrix::from_rows(&m.rows)
    }
}

impl From<FeatureMatrix> for MatrixRows {
    fn from(a: FeatureMatrix) -> Self {
        MatrixRows { rows: a.rows() }
    }
}

impl FeatureMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let dim = columns
            .first()
            .map(|c| c.len())
            .ok_or_else(|| invalid("no columns"))?;
        if dim == 0 {
            return Err(invalid("columns must be nonempty"));
        }
        for c in &columns {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(invalid("matrix entries must be finite"));
            }
        }
        let column_norms: Vec<f64> = columns.iter().map(|c| norm(c)).collect();
        if column_norms.iter().any(|&n| n == 0.0) {
            return Err(invalid("feature matrix has a zero column"));
        }
        let r = rank(&columns, RANK_TOL);
        if r < dim {
            return Err(Error::RankDeficient {
                rank: r,
                needed: dim,
            });
        }
        let norm21 = column_norms.iter().sum();
        Ok(FeatureMatrix {
            dim,
            columns,
            column_norms,
            norm21,
        })
    }

    /// `rows[j][i]` is entry `(j, i)` of the `d x m` matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows
            .first()
            .map(|r| r.len())
            .ok_or_else(|| invalid("no rows"))?;
        for r in rows {
            if r.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: r.len(),
                });
            }
        }
        Self::from_columns(
            (0..m)
                .map(|i| rows.iter().map(|r| r[i]).collect())
                .collect(),
        )
    }

    pub fn identity(d: usize) -> Self {
        Self::from_columns(
            (0..d)
                .map(|i| {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    e
                })
                .collect(),
        )
        .expect("identity has full rank")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of columns `m`.
    pub fn features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|j| self.columns.iter().map(|c| c[j]).collect())
            .collect()
    }

    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }

    /// `|A|_{2,1}`, the sum of column norms.
    pub fn norm21(&self) -> f64 {
        self.norm21
    }

    /// `A / |A|_{2,1}`.
    pub fn normalized(&self) -> Self {
        let s = 1.0 / self.norm21;
        Self::from_columns(
            self.columns
                .iter()
                .map(|c| c.iter().map(|x| x * s).collect())
                .collect(),
        )
        .expect("scaling keeps rank")
    }

    /// `A^T x`.
    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|c| dot(c, x)).collect()
    }
}

/// Orthonormal basis (rows) of the relevant subspace `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSpec {
    basis: Vec<Vec<f64>>,
}

impl SubspaceSpec {
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let d = basis
            .first()
            .map(|b| b.len())
            .ok_or_else(|| invalid("empty basis"))?;
        for (i, b) in basis.iter().enumerate() {
            if b.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: b.len(),
                });
            }
            for (j, c) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(b, c) - target).abs() > 1e-9 {
                    return Err(invalid("basis rows must be orthonormal"));
                }
            }
        }
        if basis.len() > d {
            return Err(invalid("subspace dimension exceeds ambient dimension"));
        }
        Ok(SubspaceSpec { basis })
    }

    /// Orthonormalizes spanning rows by modified Gram-Schmidt.
    pub fn from_spanning(rows: &[Vec<f64>]) -> Result<Self> {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for r in rows {
            let mut v = r.clone();
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, bi)| *x -= c * bi);
            }
            let n = norm(&v);
            if n < 1e-9 * norm(r).max(1.0) {
                let needed = rows.len();
                return Err(Error::RankDeficient {
                    rank: basis.len(),
                    needed,
                });
            }
            basis.push(v.iter().map(|x| x / n).collect());
        }
        Self::new(basis)
    }

    /// Span of the given coordinate axes.
    pub fn coordinates(d: usize, axes: &[usize]) -> Result<Self> {
        Self::new(
            axes.iter()
                .map(|&i| {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    e
                })
                .collect(),
        )
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Subspace dimension `s`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis[0].len()
    }

    /// Orthogonal projection `P_S x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for b in &self.basis {
            let c = dot(b, x);
            out.iter_mut().zip(b).for_each(|(o, bi)| *o += c * bi);
        }
        out
    }
}

/// Inputs of the risk bound for oblique Mondrian forests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub lipschitz: f64,
    pub beta: f64,
    pub noise_var: f64,
    pub f_inf: f64,
    pub n: usize,
    pub lifetime: f64,
    pub trees: usize,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.lipschitz > 0.0) {
            return Err(invalid("L must be positive"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(invalid("beta must lie in (0, 1]"));
        }
        if !(self.noise_var >= 0.0) || !(self.f_inf >= 0.0) {
            return Err(invalid("noise variance and sup norm must be nonnegative"));
        }
        if self.n == 0 || self.trees == 0 {
            return Err(invalid("n and M must be at least 1"));
        }
        if !(self.lifetime > 0.0) {
            return Err(invalid("lifetime must be positive"));
        }
        Ok(())
    }
}

/// `phi_A`: column directions with weights `|a_i| / |A|_{2,1}`; parallel
/// columns are merged.
pub fn dirdist_from_matrix(a: &FeatureMatrix) -> Result<DiscreteDirectionalDistribution> {
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (c, &n) in a.columns.iter().zip(&a.column_norms) {
        let u: Vec<f64> = c.iter().map(|x| x / n).collect();
        let w = n / a.norm21;
        match dirs
            .iter()
            .position(|v| (dot(v, &u).abs() - 1.0).abs() < 1e-12)
        {
            Some(j) => weights[j] += w,
            None => {
                dirs.push(u);
                weights.push(w);
            }
        }
    }
    renormalize(&mut weights);
    DiscreteDirectionalDistribution::new(dirs, weights)
}

/// Partition of a point set produced by the lifted Mondrian route.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedPartition {
    /// Leaf id of each input point.
    pub labels: Vec<usize>,
    /// Mondrian tree in `R^m`.
    pub tree: TessellationTree,
}

/// Axis window in `R^m` for the lifted route: bounding box of `lifted`,
/// padded by `padding * 2 |A|_{2,1} / lambda` on every side.
pub fn lifted_window(
    lifted: &[Vec<f64>],
    a: &FeatureMatrix,
    lambda: f64,
    padding: f64,
) -> Result<AxisBox> {
    let mut b = AxisBox::bounding(lifted, 0.0)?;
    let pad = padding * 2.0 * a.norm21 / lambda;
    for i in 0..b.dim() {
        b.low[i] -= pad;
        b.high[i] += pad;
    }
    Ok(b)
}

/// Standard Mondrian spec in `R^m` equivalent to `phi_A` at lifetime `lambda`.
pub fn lifted_spec(a: &FeatureMatrix, lambda: f64) -> Result<WeightedMondrianSpec> {
    let m = a.features();
    WeightedMondrianSpec::standard(m, m as f64 * lambda / a.norm21)
}

pub fn lifted_partition(
    points: &[Vec<f64>],
    a: &FeatureMatrix,
    lambda: f64,
    rng: &mut StreamRng,
) -> Result<LiftedPartition> {
    lifted_partition_with_padding(points, a, lambda, DEFAULT_PADDING, rng)
}

pub fn lifted_partition_with_padding(
    points: &[Vec<f64>],
    a: &FeatureMatrix,
    lambda: f64,
    padding: f64,
    rng: &mut StreamRng,
) -> Result<LiftedPartition> {
    if !(lambda > 0.0) {
        return Err(invalid("lifetime must be positive"));
    }
    for p in points {
        if p.len() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: p.len(),
            });
        }
    }
    let lifted: Vec<Vec<f64>> = points.iter().map(|x| a.lift(x)).collect();
    let window = lifted_window(&lifted, a, lambda, padding)?;
    let tree = mondrian_sample(&window, &lifted_spec(a, lambda)?, rng)?;
    let labels = lifted.iter().map(|y| tree.route(y)).collect();
    Ok(LiftedPartition { labels, tree })
}

/// Zero cell `{y : -T_i1 <= <a_i, y> <= T_i2}` with all `T` independent
/// `Exponential(lambda / |A|_{2,1})`, drawn column by column.
pub fn oblique_zero_cell(a: &FeatureMatrix, lambda: f64, rng: &mut StreamRng) -> Result<HPolytope> {
    if !(lambda > 0.0) {
        return Err(invalid("lifetime must be positive"));
    }
    let rate = lambda / a.norm21;
    let mut hs = Vec::with_capacity(2 * a.features());
    for c in &a.columns {
        let t1 = rng.exponential(rate);
        let t2 = rng.exponential(rate);
        hs.push(Halfspace::new(c.clone(), t2));
        hs.push(Halfspace::new(c.iter().map(|x| -x).collect(), t1));
    }
    HPolytope::new(a.dim(), hs)
}

/// `s`-th largest singular value of `P_S A`, computed on the `s x m`
/// matrix of coordinates `basis * A`.
pub fn sigma_s(a: &FeatureMatrix, s: &SubspaceSpec) -> Result<f64> {
    if s.ambient_dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: s.ambient_dim(),
        });
    }
    let m: Vec<Vec<f64>> = s
        .basis
        .iter()
        .map(|b| a.columns.iter().map(|c| dot(b, c)).collect())
        .collect();
    let sv = singular_values(&m);
    Ok(sv.get(s.dim() - 1).copied().unwrap_or(0.0))
}

/// `|P_{S^perp} A|_{2,1} = sum_i |(I - P_S) a_i|`.
pub fn perp_norm21(a: &FeatureMatrix, s: &SubspaceSpec) -> f64 {
    a.columns
        .iter()
        .map(|c| {
            let p = s.project(c);
            norm(&c.iter().zip(&p).map(|(x, y)| x - y).collect::<Vec<f64>>())
        })
        .sum()
}

/// Volume of the unit ball in `R^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    let h = k as f64 / 2.0;
    libm::pow(core::f64::consts::PI, h) / libm::tgamma(h + 1.0)
}

/// `c_{d,k} = kappa_k pi^{k/2} d^{k/2} / k!`.
pub fn c_dk(d: usize, k: usize) -> f64 {
    let h = k as f64 / 2.0;
    unit_ball_volume(k) * libm::pow(core::f64::consts::PI, h) * libm::pow(d as f64, h)
        / libm::tgamma(k as f64 + 1.0)
}

/// Risk bound for an oblique Mondrian forest with `|A|_{2,1} = 1`.
pub fn c1_bound(inputs: &BoundInputs, a: &FeatureMatrix, s: &SubspaceSpec) -> Result<f64> {
    inputs.validate()?;
    if (a.norm21 - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(a.norm21));
    }
    let sig = sigma_s(a, s)?;
    let eps = perp_norm21(a, s);
    Ok(c1_bound_terms(
        inputs,
        a.dim(),
        s.dim(),
        a.features(),
        sig,
        eps,
    ))
}

/// Closed form with `sigma_s(P_S A)` and `|P_{S^perp} A|_{2,1}` given.
pub fn c1_bound_terms(
    inputs: &BoundInputs,
    d: usize,
    s: usize,
    m: usize,
    sigma: f64,
    eps: f64,
) -> f64 {
    let b = inputs.beta;
    let lam = inputs.lifetime;
    let bias = 9.0 * inputs.lipschitz * inputs.lipschitz * libm::pow(m as f64, 4.0 * b)
        / (libm::pow(d as f64, 2.0 * b) * libm::pow(lam, 2.0 * b) * libm::pow(sigma, 2.0 * b));
    let mut cells = 0.0;
    for k in s + 1..=d {
        cells += c_dk(d, k) * libm::pow(lam, k as f64) * libm::pow(eps, (k - s) as f64);
    }
    for k in 0..=s {
        cells += c_dk(d, k) * libm::pow(lam, k as f64);
    }
    let var = (5.0 * inputs.f_inf * inputs.f_inf + 2.0 * inputs.noise_var) / inputs.n as f64;
    bias + var * cells
}

/// Bounds on `E[D(P_S Z_0)^k 1{D >= r}]` for the oblique zero cell at unit
/// lifetime with `|A|_{2,1} = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiameterBounds {
    /// `m^k Gamma(2m+k) / (d^k sigma^k Gamma(2m)) * sum_{n<2m+k} x^n e^{-x}/n!`
    /// with `x = r d sigma / m`.
    pub proof: f64,
    /// `m^k Gamma(2m+k) / (2^k d^k sigma^k Gamma(2m))`, moment only (`r = 0`).
    pub statement: f64,
    /// The two forms disagree.
    pub mismatch: bool,
}

pub fn deter_bounds(m: usize, d: usize, sigma: f64, k: usize, r: f64) -> DiameterBounds {
    let scale = libm::pow(m as f64 / (d as f64 * sigma), k as f64);
    let x = r * d as f64 * sigma / m as f64;
    let proof = scale * stats::erlang_tail_moment(2 * m, k, x);
    let statement = scale * stats::gamma_ratio(2.0 * m as f64, k as f64) / libm::pow(2.0, k as f64);
    DiameterBounds {
        proof,
        statement,
        mismatch: proof != statement,
    }
}

/// Projected zero-cell diameter moments against the bounds above.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiameterCheck {
    pub estimate: f64,
    pub stderr: f64,
    pub bounds: DiameterBounds,
    /// `estimate <= proof bound + 3 stderr`.
    pub pass: bool,
}

/// MC estimate of `E[D(P_S Z_0)^k]` at unit lifetime, with diameters from
/// [`diameter_estimate`] using `n_dirs` directions when `s > 1`.
pub fn deter_check(
    a: &FeatureMatrix,
    s: &SubspaceSpec,
    k: usize,
    reps: usize,
    n_dirs: usize,
    rng: &mut StreamRng,
) -> Result<DiameterCheck> {
    if (a.norm21 - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(a.norm21));
    }
    let sig = sigma_s(a, s)?;
    let mut vals = Vec::with_capacity(reps);
    for _ in 0..reps {
        let z = oblique_zero_cell(a, 1.0, rng)?;
        let diam = diameter_estimate(&z, s.basis(), n_dirs, rng)?;
        vals.push(libm::pow(diam, k as f64));
    }
    let est = stats::mean_estimate(&vals);
    let bounds = deter_bounds(a.features(), a.dim(), sig, k, 0.0);
    Ok(DiameterCheck {
        estimate: est.mean,
        stderr: est.stderr,
        bounds,
        pass: est.mean <= bounds.proof + 3.0 * est.stderr,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleRule {
    C1,
    C2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub lifetime: f64,
    /// Minimum tree count `ceil(lambda^{2 beta})` for the `C2` rule.
    pub min_trees: Option<usize>,
    /// Whether `eps` was small enough for the subspace-dimension rate.
    pub subspace_regime: bool,
}

/// Lifetime `lambda_n` of the rate corollaries, times `multiplier`.
#[allow(clippy::too_many_arguments)]
pub fn lifetime_schedule(
    rule: ScheduleRule,
    n: usize,
    s: usize,
    d: usize,
    beta: f64,
    lipschitz: f64,
    eps: f64,
    multiplier: f64,
) -> Result<Schedule> {
    if n == 0
        || s == 0
        || s > d
        || !(beta > 0.0)
        || !(lipschitz > 0.0)
        || !(eps >= 0.0)
        || !(multiplier > 0.0)
    {
        return Err(invalid("schedule parameters must be positive with s <= d"));
    }
    let extra = match rule {
        ScheduleRule::C1 => 0.0,
        ScheduleRule::C2 => 2.0,
    };
    let nf = n as f64;
    let es = s as f64 + extra + 2.0 * beta;
    let ed = d as f64 + extra + 2.0 * beta;
    let threshold = libm::pow(lipschitz, -2.0 / es) * libm::pow(nf, -1.0 / es);
    let subspace_regime = s == d || eps <= threshold;
    let base = if subspace_regime {
        libm::pow(lipschitz, 2.0 / es) * libm::pow(nf, 1.0 / es)
    } else {
        libm::pow(lipschitz, 2.0 / ed)
            * libm::pow(nf, 1.0 / ed)
            * libm::pow(eps, -((d - s) as f64) / ed)
    };
    let lifetime = multiplier * base;
    let min_trees = match rule {
        ScheduleRule::C1 => None,
        ScheduleRule::C2 => {
            // guard against ceil(100.00000000000001) = 101
            let v = libm::pow(lifetime, 2.0 * beta);
            Some((libm::ceil(v * (1.0 - 1e-12)) as usize).max(1))
        }
    };
    Ok(Schedule {
        lifetime,
        min_trees,
        subspace_regime,
    })
}
