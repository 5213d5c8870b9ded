use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::polytope::{HPolytope, Halfspace, UNIT_TOL};
use crate::error::{invalid, Error, Result};
use crate::linalg::{cofactor_normal, det, dot, norm, rank, subsets};

/// Minkowski sum of centered segments `[-w v / 2, w v / 2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zonotope {
    segments: Vec<(Vec<f64>, f64)>,
}

impl Zonotope {
    pub fn new(segments: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let d = segments
            .first()
            .map(|s| s.0.len())
            .ok_or_else(|| invalid("no segments"))?;
        for (v, w) in &segments {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
            if (norm(v) - 1.0).abs() > UNIT_TOL {
                return Err(invalid("segment directions must be unit vectors"));
            }
            if !(*w > 0.0 && w.is_finite()) {
                return Err(invalid("segment weights must be positive"));
            }
        }
        Ok(Zonotope { segments })
    }

    pub fn dim(&self) -> usize {
        self.segments[0].0.len()
    }

    pub fn segments(&self) -> &[(Vec<f64>, f64)] {
        &self.segments
    }

    /// `h(u) = 1/2 * sum_i w_i |<u, v_i>|`.
    pub fn support(&self, u: &[f64]) -> f64 {
        0.5 * self
            .segments
            .iter()
            .map(|(v, w)| w * dot(u, v).abs())
            .sum::<f64>()
    }

    /// Sum over `d`-subsets of `prod w_i * |det(v_J)|`.
    pub fn volume(&self) -> Result<f64> {
        let d = self.dim();
        let dirs: Vec<Vec<f64>> = self.segments.iter().map(|s| s.0.clone()).collect();
        if rank(&dirs, 1e-9) < d {
            return Err(Error::DegenerateZonotope(d));
        }
        let mut vol = 0.0;
        for j in subsets(self.segments.len(), d) {
            let m: Vec<Vec<f64>> = j.iter().map(|&i| self.segments[i].0.clone()).collect();
            let w: f64 = j.iter().map(|&i| self.segments[i].1).product();
            vol += w * det(&m).abs();
        }
        Ok(vol)
    }

    /// Facet description: every `(d-1)`-subset of directions with
    /// independent members contributes the pair of normals `+-n`.
    pub fn to_hpolytope(&self) -> Result<HPolytope> {
        let d = self.dim();
        let dirs: Vec<Vec<f64>> = self.segments.iter().map(|s| s.0.clone()).collect();
        if rank(&dirs, 1e-9) < d {
            return Err(Error::DegenerateZonotope(d));
        }
        let mut normals: Vec<Vec<f64>> = Vec::new();
        if d == 1 {
            normals.push(alloc::vec![1.0]);
        } else {
            for j in subsets(self.segments.len(), d - 1) {
                let vs: Vec<&[f64]> = j.iter().map(|&i| self.segments[i].0.as_slice()).collect();
                let n = cofactor_normal(&vs);
                let l = norm(&n);
                if l < 1e-9 {
                    continue;
                }
                let n: Vec<f64> = n.iter().map(|x| x / l).collect();
                let dup = normals
                    .iter()
                    .any(|m| (dot(m, &n).abs() - 1.0).abs() < 1e-12);
                if !dup {
                    normals.push(n);
                }
            }
        }
        let mut hs = Vec::with_capacity(2 * normals.len());
        for n in normals {
            let h = self.support(&n);
            let neg: Vec<f64> = n.iter().map(|x| -x).collect();
            hs.push(Halfspace::new(n, h));
            hs.push(Halfspace::new(neg, h));
        }
        HPolytope::new(d, hs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mondrian_zonoid_support() {
        let z = Zonotope::new(vec![(vec![1.0, 0.0], 0.5), (vec![0.0, 1.0], 0.5)]).unwrap();
        assert!((z.support(&[1.0, 0.0]) - 0.25).abs() < 1e-15);
        let z = Zonotope::new(vec![(vec![1.0, 0.0], 0.3), (vec![0.0, 1.0], 0.7)]).unwrap();
        assert!((z.support(&[0.0, 1.0]) - 0.35).abs() < 1e-15);
        assert!((z.volume().unwrap() - 0.21).abs() < 1e-15);
        let z = Zonotope::new(vec![
            (vec![1.0, 0.0, 0.0], 1.0),
            (vec![0.0, 1.0, 0.0], 1.0),
            (vec![0.0, 0.0, 1.0], 1.0),
        ])
        .unwrap();
        assert_eq!(z.support(&[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn volume_examples() {
        let z = Zonotope::new(vec![(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0)]).unwrap();
        assert!((z.volume().unwrap() - 1.0).abs() < 1e-15);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let z = Zonotope::new(vec![
            (vec![1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 1.0),
            (vec![s, s], 1.0),
        ])
        .unwrap();
        assert!((z.volume().unwrap() - 1.0 - 2.0 * s).abs() < 1e-12);
        let flat = Zonotope::new(vec![(vec![1.0, 0.0], 1.0), (vec![-1.0, 0.0], 2.0)]).unwrap();
        assert_eq!(flat.volume(), Err(Error::DegenerateZonotope(2)));
    }

    #[test]
    fn facets_match_support() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let z = Zonotope::new(vec![
            (vec![1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 0.5),
            (vec![s, s], 2.0),
        ])
        .unwrap();
        let p = z.to_hpolytope().unwrap();
        assert_eq!(p.halfspaces().len(), 6);
        for u in [[1.0, 0.0], [0.3, -0.8], [-0.6, 0.6]] {
            assert!((p.support(&u).unwrap() - z.support(&u)).abs() < 1e-9);
        }
    }
}
