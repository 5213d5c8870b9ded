use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::lp::{self, LpSolution, LP_TOL};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm};

/// Tolerance on the normal of a [`Hyperplane`].
pub const UNIT_TOL: f64 = 1e-12;
/// Slack accepted by membership tests and the emptiness rule for split sides.
pub const CONTAIN_TOL: f64 = 1e-9;

/// `{x : <normal, x> = offset}` with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    normal: Vec<f64>,
    offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if (norm(&normal) - 1.0).abs() > UNIT_TOL {
            return Err(invalid("hyperplane normal must have unit length"));
        }
        Ok(Hyperplane { normal, offset })
    }

    /// `{x : <a, x> = b}` rescaled to a unit normal.
    pub fn from_unnormalized(a: &[f64], b: f64) -> Result<Self> {
        let n = norm(a);
        if !(n > 0.0 && n.is_finite()) {
            return Err(invalid("hyperplane normal must be nonzero"));
        }
        Ok(Hyperplane {
            normal: a.iter().map(|x| x / n).collect(),
            offset: b / n,
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed distance `<normal, x> - offset`.
    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

/// `{x : <normal, x> <= offset}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    /// Violation scaled by the normal's length; positive means outside.
    #[inline]
    pub fn excess(&self, x: &[f64]) -> f64 {
        let n = norm(&self.normal);
        (dot(&self.normal, x) - self.offset) / n
    }
}

/// Axis-aligned box `[low, high]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxRepr")]
pub struct AxisBox {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

#[derive(Deserialize)]
struct BoxRepr {
    low: Vec<f64>,
    high: Vec<f64>,
}

impl TryFrom<BoxRepr> for AxisBox {
    type Error = Error;
    fn try_from(b: BoxRepr) -> Result<Self> {
        AxisBox::new(b.low, b.high)
    }
}

impl AxisBox {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        if low.len() != high.len() {
            return Err(Error::DimensionMismatch {
                expected: low.len(),
                got: high.len(),
            });
        }
        if low.is_empty() {
            return Err(invalid("box must have positive dimension"));
        }
        if low
            .iter()
            .zip(&high)
            .any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite())
        {
            return Err(invalid("box requires finite low <= high"));
        }
        Ok(AxisBox { low, high })
    }

    pub fn unit(dim: usize) -> Self {
        AxisBox {
            low: vec![0.0; dim],
            high: vec![1.0; dim],
        }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        AxisBox {
            low: vec![lo; dim],
            high: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn sides(&self) -> Vec<f64> {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(l, h)| h - l)
            .collect()
    }

    pub fn volume(&self) -> f64 {
        self.sides().iter().product()
    }

    pub fn diameter(&self) -> f64 {
        norm(&self.sides())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.low.iter().zip(&self.high))
            .all(|(v, (l, h))| *v >= l - CONTAIN_TOL && *v <= h + CONTAIN_TOL)
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.low.iter().zip(&self.high))
            .map(|(v, (l, h))| v.clamp(*l, *h))
            .collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    /// Axis bounding box of `points`, each side widened by `rel_pad` times its
    /// length (or by `rel_pad` when the side is degenerate).
    pub fn bounding(points: &[Vec<f64>], rel_pad: f64) -> Result<Self> {
        let first = points.first().ok_or_else(|| invalid("no points"))?;
        let d = first.len();
        let mut low = first.clone();
        let mut high = first.clone();
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
            for i in 0..d {
                low[i] = low[i].min(p[i]);
                high[i] = high[i].max(p[i]);
            }
        }
        for i in 0..d {
            let pad = rel_pad * (high[i] - low[i]).max(1.0);
            low[i] -= pad;
            high[i] += pad;
        }
        AxisBox::new(low, high)
    }

    pub fn to_polytope(&self) -> HPolytope {
        HPolytope::from_box(self)
    }
}

/// Bounded convex polytope `{x : <a_i, x> <= b_i}` with a cached interior
/// witness (Chebyshev center) and its inradius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRepr", into = "PolytopeRepr")]
pub struct HPolytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    witness: Vec<f64>,
    inradius: f64,
}

/// Serialized form: the witness is recomputed on load.
#[derive(Serialize, Deserialize)]
struct PolytopeRepr {
    dim: usize,
    halfspaces: Vec<Halfspace>,
}

impl TryFrom<PolytopeRepr> for HPolytope {
    type Error = Error;
    fn try_from(p: PolytopeRepr) -> Result<Self> {
        HPolytope::new(p.dim, p.halfspaces)
    }
}

impl From<HPolytope> for PolytopeRepr {
    fn from(p: HPolytope) -> Self {
        PolytopeRepr {
            dim: p.dim,
            halfspaces: p.halfspaces,
        }
    }
}

impl HPolytope {
    /// Builds a polytope, certifying a nonempty interior and boundedness.
    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("polytope dimension must be positive"));
        }
        for h in &halfspaces {
            if h.normal.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: h.normal.len(),
                });
            }
            if !(norm(&h.normal) > 0.0) || !h.offset.is_finite() {
                return Err(invalid(
                    "halfspace normals must be nonzero and offsets finite",
                ));
            }
        }
        let (witness, inradius) = chebyshev_center(dim, &halfspaces)?;
        if inradius < CONTAIN_TOL {
            return Err(Error::InfeasiblePolytope);
        }
        let p = HPolytope {
            dim,
            halfspaces,
            witness,
            inradius,
        };
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            p.support(&e)?;
            e[i] = -1.0;
            p.support(&e)?;
        }
        Ok(p)
    }

    pub fn from_box(b: &AxisBox) -> Self {
        let d = b.dim();
        let mut halfspaces = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            halfspaces.push(Halfspace::new(e.clone(), b.high[i]));
            e[i] = -1.0;
            halfspaces.push(Halfspace::new(e, -b.low[i]));
        }
        let inradius = b.sides().iter().fold(f64::INFINITY, |m, &s| m.min(0.5 * s));
        HPolytope {
            dim: d,
            halfspaces,
            witness: b.center(),
            inradius,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn witness(&self) -> &[f64] {
        &self.witness
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    /// Boundary points count as inside (tolerance `1e-9`).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.halfspaces.iter().all(|h| h.excess(x) <= CONTAIN_TOL)
    }

    /// Largest constraint violation at `x` (negative when strictly inside).
    pub fn max_excess(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.excess(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact LP optimum of `objective` over the polytope.
    pub fn lp_maximize(&self, objective: &[f64]) -> Result<LpSolution> {
        if objective.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: objective.len(),
            });
        }
        // Shift to the witness so every right-hand side is nonnegative and
        // phase 1 is skipped.
        let rows: Vec<Vec<f64>> = self.halfspaces.iter().map(|h| h.normal.clone()).collect();
        let rhs: Vec<f64> = self
            .halfspaces
            .iter()
            .map(|h| (h.offset - dot(&h.normal, &self.witness)).max(0.0))
            .collect();
        let sol = lp::maximize(objective, &rows, &rhs)?;
        let maximizer: Vec<f64> = sol
            .maximizer
            .iter()
            .zip(&self.witness)
            .map(|(z, w)| z + w)
            .collect();
        Ok(LpSolution {
            value: sol.value + dot(objective, &self.witness),
            maximizer,
        })
    }

    /// Support function `h(K, u) = sup_{x in K} <u, x>`.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        if let Some(b) = self.as_axis_box() {
            if u.len() == self.dim {
                return Ok(box_support(&b, u));
            }
        }
        Ok(self.lp_maximize(u)?.value)
    }

    /// Width `h(K, u) + h(K, -u)`.
    pub fn width(&self, u: &[f64]) -> Result<f64> {
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        Ok(self.support(u)? + self.support(&neg)?)
    }

    /// Detects polytopes given exactly by one upper and one lower coordinate
    /// bound per axis.
    pub fn as_axis_box(&self) -> Option<AxisBox> {
        if self.halfspaces.len() != 2 * self.dim {
            return None;
        }
        let mut low = vec![f64::NAN; self.dim];
        let mut high = vec![f64::NAN; self.dim];
        for h in &self.halfspaces {
            let mut axis = None;
            for (i, &v) in h.normal.iter().enumerate() {
                if v != 0.0 {
                    if axis.is_some() {
                        return None;
                    }
                    axis = Some((i, v));
                }
            }
            let (i, v) = axis?;
            if v > 0.0 {
                if !high[i].is_nan() {
                    return None;
                }
                high[i] = h.offset / v;
            } else {
                if !low[i].is_nan() {
                    return None;
                }
                low[i] = h.offset / v;
            }
        }
        if low.iter().chain(&high).any(|x| x.is_nan()) {
            return None;
        }
        AxisBox::new(low, high).ok()
    }

    /// Intersection with one extra halfspace; `None` when the result has no
    /// interior ball of radius at least `1e-9`.
    pub fn intersect(&self, h: Halfspace) -> Result<Option<HPolytope>> {
        let mut halfspaces = self.halfspaces.clone();
        halfspaces.push(h);
        let (witness, inradius) = chebyshev_center(self.dim, &halfspaces)?;
        if inradius < CONTAIN_TOL {
            return Ok(None);
        }
        Ok(Some(HPolytope {
            dim: self.dim,
            halfspaces,
            witness,
            inradius,
        }))
    }

    /// Splits by `plane` into `lower = K ∩ {<u,x> <= t}` and
    /// `upper = K ∩ {<u,x> >= t}`. Sides without interior are `None`.
    pub fn split(&self, plane: &Hyperplane) -> Result<(Option<HPolytope>, Option<HPolytope>)> {
        let u = plane.normal();
        let t = plane.offset();
        if let (Some(b), Some((axis, sign))) = (self.as_axis_box(), axis_of(u)) {
            return Ok(split_box(&b, axis, sign * t, sign > 0.0));
        }
        let hi = self.support(u)?;
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let lo = -self.support(&neg)?;
        if t >= hi - CONTAIN_TOL {
            return Ok((Some(self.clone()), None));
        }
        if t <= lo + CONTAIN_TOL {
            return Ok((None, Some(self.clone())));
        }
        let lower = self.intersect(Halfspace::new(u.to_vec(), t))?;
        let upper = self.intersect(Halfspace::new(neg, -t))?;
        Ok((lower, upper))
    }

    /// Axis bounding box from `2d` support evaluations.
    pub fn bounding_box(&self) -> Result<AxisBox> {
        let d = self.dim;
        let mut low = vec![0.0; d];
        let mut high = vec![0.0; d];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            high[i] = self.support(&e)?;
            e[i] = -1.0;
            low[i] = -self.support(&e)?;
        }
        AxisBox::new(low, high)
    }
}

/// `Some((i, +-1))` when `u` is `+-e_i`.
fn axis_of(u: &[f64]) -> Option<(usize, f64)> {
    let mut found = None;
    for (i, &v) in u.iter().enumerate() {
        if v != 0.0 {
            if found.is_some() || v.abs() != 1.0 {
                return None;
            }
            found = Some((i, v));
        }
    }
    found
}

/// Splits a box at `x_axis = c`. `positive` tells whether the plane normal
/// points along `+e_axis`, which decides which piece is the lower side.
fn split_box(
    b: &AxisBox,
    axis: usize,
    c: f64,
    positive: bool,
) -> (Option<HPolytope>, Option<HPolytope>) {
    let (lo, hi) = (b.low[axis], b.high[axis]);
    let left = if c - lo >= 2.0 * CONTAIN_TOL {
        let mut nb = b.clone();
        nb.high[axis] = c.min(hi);
        Some(HPolytope::from_box(&nb))
    } else {
        None
    };
    let right = if hi - c >= 2.0 * CONTAIN_TOL {
        let mut nb = b.clone();
        nb.low[axis] = c.max(lo);
        Some(HPolytope::from_box(&nb))
    } else {
        None
    };
    if positive {
        (left, right)
    } else {
        (right, left)
    }
}

fn box_support(b: &AxisBox, u: &[f64]) -> f64 {
    u.iter()
        .zip(b.low.iter().zip(&b.high))
        .map(|(&ui, (&l, &h))| if ui >= 0.0 { ui * h } else { ui * l })
        .sum()
}

/// Chebyshev center: maximize `r` subject to `<a_i,x> + |a_i| r <= b_i`.
/// Always feasible (r may be negative); an empty polytope shows as `r < 0`.
fn chebyshev_center(dim: usize, halfspaces: &[Halfspace]) -> Result<(Vec<f64>, f64)> {
    let rows: Vec<Vec<f64>> = halfspaces
        .iter()
        .map(|h| {
            let mut row = h.normal.clone();
            row.push(norm(&h.normal));
            row
        })
        .collect();
    let rhs: Vec<f64> = halfspaces.iter().map(|h| h.offset).collect();
    let mut objective = vec![0.0; dim + 1];
    objective[dim] = 1.0;
    let sol = lp::maximize(&objective, &rows, &rhs)?;
    let r = sol.value;
    let mut x = sol.maximizer;
    x.truncate(dim);
    let _ = LP_TOL;
    Ok((x, r))
}
