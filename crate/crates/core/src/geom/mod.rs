//! Convex geometry: halfspace polytopes, a dense LP for support functions,
//! hyperplane splits, zonotopes and box intrinsic volumes.

pub mod lp;
mod polytope;
mod zonotope;

use alloc::vec::Vec;

pub use lp::{LpSolution, LP_TOL};
pub use polytope::{AxisBox, HPolytope, Halfspace, Hyperplane, CONTAIN_TOL, UNIT_TOL};
pub use zonotope::Zonotope;

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm};
use crate::rng::StreamRng;

/// Default number of sampled directions in [`diameter_estimate`].
pub const DEFAULT_DIAMETER_DIRS: usize = 1024;

/// Intrinsic volume `V_j` of a box: the elementary symmetric polynomial
/// `e_j(sides)`.
pub fn box_intrinsic_volume(sides: &[f64], j: usize) -> Result<f64> {
    if j > sides.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: sides.len(),
        });
    }
    // e[k] after processing a prefix of the sides
    let mut e = alloc::vec![0.0; j + 1];
    e[0] = 1.0;
    for &s in sides {
        for k in (1..=j).rev() {
            e[k] += s * e[k - 1];
        }
    }
    Ok(e[j])
}

fn check_basis(dim: usize, basis: &[Vec<f64>]) -> Result<()> {
    if basis.is_empty() {
        return Err(invalid("subspace basis is empty"));
    }
    for (i, b) in basis.iter().enumerate() {
        if b.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: b.len(),
            });
        }
        for (j, c) in basis.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot(b, c) - target).abs() > 1e-9 {
                return Err(invalid("subspace basis must be orthonormal"));
            }
        }
    }
    Ok(())
}

/// Width of the orthogonal projection `P_S K` in direction `u`, where `u` is
/// a unit vector of `S` given in ambient coordinates.
pub fn projected_width(polytope: &HPolytope, basis: &[Vec<f64>], u: &[f64]) -> Result<f64> {
    check_basis(polytope.dim(), basis)?;
    if u.len() != polytope.dim() {
        return Err(Error::DimensionMismatch {
            expected: polytope.dim(),
            got: u.len(),
        });
    }
    let mut resid = u.to_vec();
    for b in basis {
        let c = dot(b, u);
        for (r, bi) in resid.iter_mut().zip(b) {
            *r -= c * bi;
        }
    }
    if norm(&resid) > 1e-9 {
        return Err(invalid("direction is not in the subspace"));
    }
    polytope.width(u)
}

fn coordinate_axes(basis: &[Vec<f64>]) -> Option<Vec<usize>> {
    basis
        .iter()
        .map(|b| {
            let mut axis = None;
            for (i, &v) in b.iter().enumerate() {
                if v != 0.0 {
                    if axis.is_some() || (v.abs() - 1.0).abs() > 1e-12 {
                        return None;
                    }
                    axis = Some(i);
                }
            }
            axis
        })
        .collect()
}

/// Diameter of `P_S K`.
///
/// Exact for axis boxes with a coordinate subspace and for one-dimensional
/// subspaces. Otherwise the maximum projected width over `n_dirs` uniform
/// directions of `S`, which never exceeds the true diameter.
pub fn diameter_estimate(
    polytope: &HPolytope,
    basis: &[Vec<f64>],
    n_dirs: usize,
    rng: &mut StreamRng,
) -> Result<f64> {
    check_basis(polytope.dim(), basis)?;
    if n_dirs == 0 {
        return Err(invalid("n_dirs must be at least 1"));
    }
    if let (Some(b), Some(axes)) = (polytope.as_axis_box(), coordinate_axes(basis)) {
        let sides = b.sides();
        return Ok(libm::sqrt(axes.iter().map(|&i| sides[i] * sides[i]).sum()));
    }
    if basis.len() == 1 {
        return polytope.width(&basis[0]);
    }
    let d = polytope.dim();
    let mut best = 0.0f64;
    let mut u = alloc::vec![0.0; d];
    for _ in 0..n_dirs {
        let c: Vec<f64> = (0..basis.len()).map(|_| rng.normal()).collect();
        let l = norm(&c);
        if l == 0.0 {
            continue;
        }
        u.iter_mut().for_each(|x| *x = 0.0);
        for (ci, b) in c.iter().zip(basis) {
            for (x, bi) in u.iter_mut().zip(b) {
                *x += ci / l * bi;
            }
        }
        best = best.max(polytope.width(&u)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn intrinsic_volumes() {
        assert_eq!(box_intrinsic_volume(&[1.0; 3], 2).unwrap(), 3.0);
        assert_eq!(box_intrinsic_volume(&[2.0, 3.0], 2).unwrap(), 6.0);
        assert_eq!(box_intrinsic_volume(&[2.0, 3.0], 1).unwrap(), 5.0);
        assert_eq!(box_intrinsic_volume(&[2.0, 3.0], 0).unwrap(), 1.0);
        assert_eq!(
            box_intrinsic_volume(&[2.0, 3.0], 3),
            Err(Error::IndexOutOfRange { index: 3, max: 2 })
        );
    }

    #[test]
    fn projected_widths() {
        let k = AxisBox::unit(3).to_polytope();
        assert!(
            (projected_width(&k, &[vec![1.0, 0.0, 0.0]], &[1.0, 0.0, 0.0]).unwrap() - 1.0).abs()
                < 1e-12
        );
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let w = projected_width(&k, &[vec![s, s, 0.0]], &[s, s, 0.0]).unwrap();
        assert!((w - 2f64.sqrt()).abs() < 1e-9);
        assert!(projected_width(&k, &[vec![1.0, 0.0, 0.0]], &[0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn diameters() {
        let mut rng = StreamRng::new(1);
        let b = AxisBox::new(vec![0.0, 0.0], vec![3.0, 4.0])
            .unwrap()
            .to_polytope();
        let full = [vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(diameter_estimate(&b, &full, 16, &mut rng).unwrap(), 5.0);
        let sq = AxisBox::unit(2).to_polytope();
        assert_eq!(
            diameter_estimate(&sq, &[vec![1.0, 0.0]], 16, &mut rng).unwrap(),
            1.0
        );

        // equilateral triangle with unit edges
        let h = 3f64.sqrt() / 2.0;
        let verts = [[0.0, 0.0], [1.0, 0.0], [0.5, h]];
        let mut hs = Vec::new();
        for i in 0..3 {
            let (p, q, r) = (verts[i], verts[(i + 1) % 3], verts[(i + 2) % 3]);
            let mut n = vec![q[1] - p[1], p[0] - q[0]];
            let mut off = n[0] * p[0] + n[1] * p[1];
            if n[0] * r[0] + n[1] * r[1] > off {
                n = vec![-n[0], -n[1]];
                off = -off;
            }
            hs.push(Halfspace::new(n, off));
        }
        let tri = HPolytope::new(2, hs).unwrap();
        let est = diameter_estimate(&tri, &full, 4096, &mut rng).unwrap();
        assert!(est <= 1.0 + 1e-9 && est > 0.99, "{est}");
    }
}
