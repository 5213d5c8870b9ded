//! STIT tessellations of a polytope window.
//!
//! A cell `W` alive at time `t` waits an exponential time with rate
//! `R(W) = sum_i w_i * width(W, u_i)` (sum over the stored antipodal
//! representatives), then is cut by a hyperplane with normal `u_i` chosen with
//! probability proportional to `w_i * width(W, u_i)` and offset uniform over
//! the extent of `W` in that direction. Both pieces evolve independently
//! until the lifetime `lambda` is reached.
//!
//! Trees are grown depth-first; each cell draws its clock, direction and
//! offset in that order, so the seed alone fixes the tree. Nodes are stored
//! in preorder: a split at index `i` has its lower child at `i + 1` and its
//! upper child at `upper`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom::{AxisBox, HPolytope, Halfspace, Hyperplane, Zonotope, CONTAIN_TOL, UNIT_TOL};
use crate::linalg::{dot, norm, rank};
use crate::rng::{StreamKey, StreamRng};
use crate::stats;

/// Minimum total split rate of a cell.
pub const MIN_RATE: f64 = 1e-12;

/// Even directional distribution with finitely many atoms, stored as one
/// unit representative per antipodal pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DirectionsRepr")]
pub struct DiscreteDirectionalDistribution {
    directions: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct DirectionsRepr {
    directions: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<DirectionsRepr> for DiscreteDirectionalDistribution {
    type Error = Error;
    fn try_from(r: DirectionsRepr) -> Result<Self> {
        DiscreteDirectionalDistribution::new(r.directions, r.weights)
    }
}

impl DiscreteDirectionalDistribution {
    pub fn new(directions: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if directions.is_empty() || directions.len() != weights.len() {
            return Err(invalid("need one positive weight per direction"));
        }
        let d = directions[0].len();
        if d == 0 {
            return Err(invalid("directions must have positive dimension"));
        }
        for u in &directions {
            if u.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: u.len(),
                });
            }
            if (norm(u) - 1.0).abs() > UNIT_TOL {
                return Err(invalid("directions must be unit vectors"));
            }
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(invalid("weights must be positive"));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(invalid("weights must sum to 1"));
        }
        for i in 0..directions.len() {
            for j in i + 1..directions.len() {
                if (dot(&directions[i], &directions[j]).abs() - 1.0).abs() < 1e-12 {
                    return Err(invalid("directions must be pairwise distinct up to sign"));
                }
            }
        }
        let r = rank(&directions, 1e-9);
        if r < d {
            return Err(Error::RankDeficient { rank: r, needed: d });
        }
        Ok(DiscreteDirectionalDistribution {
            directions,
            weights,
        })
    }

    /// Normalizes directions and rescales positive weights to sum to one.
    pub fn from_unnormalized(directions: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("weights must be positive"));
        }
        let mut dirs = Vec::with_capacity(directions.len());
        for u in directions {
            let n = norm(u);
            if !(n > 0.0) {
                return Err(invalid("zero direction"));
            }
            dirs.push(u.iter().map(|x| x / n).collect());
        }
        let mut w: Vec<f64> = weights.iter().map(|x| x / total).collect();
        renormalize(&mut w);
        Self::new(dirs, w)
    }

    /// Weighted Mondrian: axis directions `e_i` with weights `omega_i`.
    pub fn mondrian(weights: &[f64]) -> Result<Self> {
        let d = weights.len();
        let dirs = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        Self::new(dirs, weights.to_vec())
    }

    /// Standard Mondrian in `R^d` (weights `1/d`).
    pub fn standard_mondrian(d: usize) -> Result<Self> {
        Self::mondrian(&vec![1.0 / d as f64; d])
    }

    pub fn dim(&self) -> usize {
        self.directions[0].len()
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Axis index per atom when every direction is `+-e_i`.
    pub fn axis_weights(&self) -> Option<Vec<f64>> {
        let d = self.dim();
        let mut w = vec![0.0; d];
        for (u, &wi) in self.directions.iter().zip(&self.weights) {
            let nz: Vec<usize> = (0..d).filter(|&i| u[i] != 0.0).collect();
            if nz.len() != 1 {
                return None;
            }
            w[nz[0]] += wi;
        }
        Some(w)
    }

    /// Associated zonoid `Pi` with `h_Pi(u) = 1/2 sum_i w_i |<u, u_i>|`.
    pub fn zonoid(&self) -> Zonotope {
        Zonotope::new(
            self.directions
                .iter()
                .cloned()
                .zip(self.weights.iter().copied())
                .collect(),
        )
        .expect("validated distribution")
    }
}

/// Adjusts the largest weight so the sum is as close to 1 as floating point
/// allows.
pub(crate) fn renormalize(w: &mut [f64]) {
    let imax = (0..w.len())
        .max_by(|&a, &b| w[a].total_cmp(&w[b]))
        .unwrap_or(0);
    let rest: f64 = w
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != imax)
        .map(|(_, x)| x)
        .sum();
    w[imax] = 1.0 - rest;
}

/// Directional distribution of a STIT process. Only the discrete case can be
/// sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirectionalDistribution {
    Discrete(DiscreteDirectionalDistribution),
    Isotropic { dim: usize },
}

impl From<DiscreteDirectionalDistribution> for DirectionalDistribution {
    fn from(d: DiscreteDirectionalDistribution) -> Self {
        DirectionalDistribution::Discrete(d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        normal: Vec<f64>,
        offset: f64,
        birth_time: f64,
        upper: usize,
    },
    Leaf {
        id: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct TessellationTree {
    window: HPolytope,
    lifetime: f64,
    nodes: Vec<Node>,
    n_leaves: usize,
}

/// Serialized form: window, lifetime and the preorder node list.
#[derive(Serialize, Deserialize)]
struct TreeRepr {
    window: HPolytope,
    lifetime: f64,
    nodes: Vec<Node>,
}

impl TryFrom<TreeRepr> for TessellationTree {
    type Error = Error;
    fn try_from(t: TreeRepr) -> Result<Self> {
        TessellationTree::from_parts(t.window, t.lifetime, t.nodes)
    }
}

impl From<TessellationTree> for TreeRepr {
    fn from(t: TessellationTree) -> Self {
        TreeRepr {
            window: t.window,
            lifetime: t.lifetime,
            nodes: t.nodes,
        }
    }
}

impl TessellationTree {
    /// The tree without any split.
    pub fn trivial(window: HPolytope, lifetime: f64) -> Self {
        TessellationTree {
            window,
            lifetime,
            nodes: vec![Node::Leaf { id: 0 }],
            n_leaves: 1,
        }
    }

    /// Rebuilds a tree from parts, checking the preorder layout.
    pub fn from_parts(window: HPolytope, lifetime: f64, nodes: Vec<Node>) -> Result<Self> {
        let d = window.dim();
        let mut n_leaves = 0;
        let end = check_subtree(&nodes, 0, d, &mut n_leaves, f64::NEG_INFINITY, lifetime)?;
        if end != nodes.len() {
            return Err(invalid("trailing nodes after the root subtree"));
        }
        Ok(TessellationTree {
            window,
            lifetime,
            nodes,
            n_leaves,
        })
    }

    pub fn window(&self) -> &HPolytope {
        &self.window
    }

    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn leaf_count(&self) -> usize {
        self.n_leaves
    }

    pub fn split_count(&self) -> usize {
        self.nodes.len() - self.n_leaves
    }

    /// Leaf id reached by `x` without checking the window. Points on a split
    /// plane go to the upper side.
    #[inline]
    pub fn route(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { id } => return *id,
                Node::Split {
                    normal,
                    offset,
                    upper,
                    ..
                } => {
                    i = if dot(normal, x) - offset >= 0.0 {
                        *upper
                    } else {
                        i + 1
                    };
                }
            }
        }
    }

    pub fn locate(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if self.window.max_excess(x) > CONTAIN_TOL {
            return Err(Error::OutOfWindow);
        }
        Ok(self.route(x))
    }

    /// Cell of the leaf reached by `x`, rebuilt by replaying the splits on
    /// its path.
    pub fn cell_of(&self, x: &[f64]) -> Result<HPolytope> {
        self.locate(x)?;
        let mut cell = self.window.clone();
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return Ok(cell),
                Node::Split {
                    normal,
                    offset,
                    upper,
                    ..
                } => {
                    let plane = Hyperplane::new(normal.clone(), *offset)?;
                    let (lo, up) = cell.split(&plane)?;
                    if dot(normal, x) - offset >= 0.0 {
                        i = *upper;
                        cell = up.ok_or(Error::InfeasiblePolytope)?;
                    } else {
                        i += 1;
                        cell = lo.ok_or(Error::InfeasiblePolytope)?;
                    }
                }
            }
        }
    }

    /// Cell containing the origin.
    pub fn zero_cell(&self) -> Result<HPolytope> {
        self.cell_of(&vec![0.0; self.dim()])
    }

    /// All leaf cells in leaf-id order.
    pub fn leaf_cells(&self) -> Result<Vec<HPolytope>> {
        let mut out = Vec::with_capacity(self.n_leaves);
        let mut stack = vec![(0usize, self.window.clone())];
        while let Some((i, cell)) = stack.pop() {
            match &self.nodes[i] {
                Node::Leaf { .. } => out.push(cell),
                Node::Split {
                    normal,
                    offset,
                    upper,
                    ..
                } => {
                    let plane = Hyperplane::new(normal.clone(), *offset)?;
                    let (lo, up) = cell.split(&plane)?;
                    stack.push((*upper, up.ok_or(Error::InfeasiblePolytope)?));
                    stack.push((i + 1, lo.ok_or(Error::InfeasiblePolytope)?));
                }
            }
        }
        Ok(out)
    }

    /// Number of leaves in the subtree rooted at node `i`.
    pub fn subtree_leaf_count(&self, i: usize) -> usize {
        let end = self.subtree_end(i);
        self.nodes[i..end]
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    fn subtree_end(&self, i: usize) -> usize {
        match &self.nodes[i] {
            Node::Leaf { .. } => i + 1,
            Node::Split { upper, .. } => self.subtree_end(*upper),
        }
    }

    /// Birth times along every root-to-leaf path are strictly increasing and
    /// below the lifetime.
    pub fn birth_times_valid(&self) -> bool {
        let mut n = 0;
        check_subtree(
            &self.nodes,
            0,
            self.dim(),
            &mut n,
            f64::NEG_INFINITY,
            self.lifetime,
        )
        .is_ok()
    }
}

fn check_subtree(
    nodes: &[Node],
    i: usize,
    d: usize,
    n_leaves: &mut usize,
    parent_time: f64,
    lifetime: f64,
) -> Result<usize> {
    match nodes.get(i) {
        None => Err(invalid("truncated node list")),
        Some(Node::Leaf { id }) => {
            if *id != *n_leaves {
                return Err(invalid("leaf ids must be consecutive in preorder"));
            }
            *n_leaves += 1;
            Ok(i + 1)
        }
        Some(Node::Split {
            normal,
            birth_time,
            upper,
            ..
        }) => {
            if normal.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: normal.len(),
                });
            }
            if !(*birth_time > parent_time && *birth_time < lifetime) {
                return Err(invalid(
                    "birth times must increase and stay below the lifetime",
                ));
            }
            let mid = check_subtree(nodes, i + 1, d, n_leaves, *birth_time, lifetime)?;
            if mid != *upper {
                return Err(invalid(
                    "upper child index does not follow the lower subtree",
                ));
            }
            check_subtree(nodes, mid, d, n_leaves, *birth_time, lifetime)
        }
    }
}

/// Samples a STIT tessellation of `window` with lifetime `lifetime`.
pub fn stit_sample(
    window: &HPolytope,
    lifetime: f64,
    phi: &DiscreteDirectionalDistribution,
    rng: &mut StreamRng,
) -> Result<TessellationTree> {
    if !(lifetime > 0.0 && lifetime.is_finite()) {
        return Err(invalid("lifetime must be positive and finite"));
    }
    if phi.dim() != window.dim() {
        return Err(Error::DimensionMismatch {
            expected: window.dim(),
            got: phi.dim(),
        });
    }
    let dirs = phi.directions();
    let w = phi.weights();
    let mut nodes: Vec<Node> = Vec::new();
    let mut n_leaves = 0;
    // (cell, time already elapsed, split node whose `upper` points here)
    let mut stack: Vec<(HPolytope, f64, Option<usize>)> = vec![(window.clone(), 0.0, None)];
    let mut hi = vec![0.0; dirs.len()];
    let mut rates = vec![0.0; dirs.len()];
    while let Some((cell, t0, parent)) = stack.pop() {
        let idx = nodes.len();
        if let Some(p) = parent {
            if let Node::Split { upper, .. } = &mut nodes[p] {
                *upper = idx;
            }
        }
        for (i, u) in dirs.iter().enumerate() {
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            let h_plus = cell.support(u)?;
            let h_minus = cell.support(&neg)?;
            hi[i] = h_plus;
            rates[i] = w[i] * (h_plus + h_minus).max(0.0);
        }
        let total: f64 = rates.iter().sum();
        if total < MIN_RATE {
            return Err(Error::RateUnderflow(total));
        }
        let mut t = t0;
        loop {
            t += rng.exponential(total);
            if t >= lifetime {
                nodes.push(Node::Leaf { id: n_leaves });
                n_leaves += 1;
                break;
            }
            let i = rng.categorical(&rates);
            let width = rates[i] / w[i];
            let offset = rng.uniform_in(hi[i] - width, hi[i]);
            let plane = Hyperplane::new(dirs[i].clone(), offset)?;
            match cell.split(&plane)? {
                (Some(lo), Some(up)) => {
                    nodes.push(Node::Split {
                        normal: dirs[i].clone(),
                        offset,
                        birth_time: t,
                        upper: usize::MAX,
                    });
                    stack.push((up, t, Some(idx)));
                    stack.push((lo, t, None));
                    break;
                }
                // sliver: the cut is absorbed and the clock keeps running
                _ => continue,
            }
        }
    }
    Ok(TessellationTree {
        window: window.clone(),
        lifetime,
        nodes,
        n_leaves,
    })
}

/// Like [`stit_sample`] for any [`DirectionalDistribution`]; continuous
/// distributions are rejected.
pub fn sample(
    window: &HPolytope,
    lifetime: f64,
    phi: &DirectionalDistribution,
    rng: &mut StreamRng,
) -> Result<TessellationTree> {
    match phi {
        DirectionalDistribution::Discrete(p) => stit_sample(window, lifetime, p, rng),
        DirectionalDistribution::Isotropic { .. } => Err(Error::UnsupportedDistribution),
    }
}

/// Leaf counts of STIT(lambda) on the unit cube against STIT(1) on
/// `[0, lambda]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub mean_scaled_lifetime: f64,
    pub var_scaled_lifetime: f64,
    pub mean_scaled_window: f64,
    pub var_scaled_window: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub critical_1pct: f64,
}

/// Compares `STIT(lambda)` on `[0,1]^d` with `STIT(1)` on `[0,lambda]^d` over
/// `reps` replicates each; replicate `r` of side `s` uses stream
/// `key.child(s).child(r)`.
pub fn scaling_check(
    phi: &DiscreteDirectionalDistribution,
    lifetime: f64,
    reps: usize,
    key: StreamKey,
) -> Result<ScalingReport> {
    let d = phi.dim();
    let unit = AxisBox::unit(d).to_polytope();
    let big = AxisBox::cube(d, 0.0, lifetime).to_polytope();
    let mut a = Vec::with_capacity(reps);
    let mut b = Vec::with_capacity(reps);
    for r in 0..reps as u64 {
        let mut rng = key.child(0).child(r).rng();
        a.push(stit_sample(&unit, lifetime, phi, &mut rng)?.leaf_count() as f64);
        let mut rng = key.child(1).child(r).rng();
        b.push(stit_sample(&big, 1.0, phi, &mut rng)?.leaf_count() as f64);
    }
    let ks = stats::ks_two_sample(&a, &b);
    Ok(ScalingReport {
        mean_scaled_lifetime: stats::mean(&a),
        var_scaled_lifetime: stats::variance(&a),
        mean_scaled_window: stats::mean(&b),
        var_scaled_window: stats::variance(&b),
        ks_statistic: ks,
        p_value: stats::ks_two_sample_pvalue(ks, reps, reps),
        critical_1pct: stats::ks_two_sample_critical(0.01, reps, reps),
    })
}

/// Halfspaces on the path from the root to the leaf reached by `x`.
pub fn path_halfspaces(tree: &TessellationTree, x: &[f64]) -> Vec<Halfspace> {
    let mut out = Vec::new();
    let mut i = 0;
    while let Node::Split {
        normal,
        offset,
        upper,
        ..
    } = &tree.nodes[i]
    {
        if dot(normal, x) - offset >= 0.0 {
            out.push(Halfspace::new(normal.iter().map(|v| -v).collect(), -offset));
            i = *upper;
        } else {
            out.push(Halfspace::new(normal.clone(), *offset));
            i += 1;
        }
    }
    out
}
