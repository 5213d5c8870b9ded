mod common;

use common::{mc_volume, random_polytope};
use proptest::prelude::*;
use stit_core::geom::{
    box_intrinsic_volume, diameter_estimate, projected_width, AxisBox, HPolytope, Halfspace,
    Hyperplane, Zonotope,
};
use stit_core::StreamRng;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn support_is_subadditive(seed in any::<u64>(), d in 2usize..4, u in prop::collection::vec(-1.0f64..1.0, 3), v in prop::collection::vec(-1.0f64..1.0, 3)) {
        let mut rng = StreamRng::new(seed);
        let k = random_polytope(d, 3, &mut rng);
        let (u, v) = (&u[..d], &v[..d]);
        let w: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
        let lhs = k.support(&w).unwrap();
        let rhs = k.support(u).unwrap() + k.support(v).unwrap();
        prop_assert!(lhs <= rhs + 1e-7, "{lhs} > {rhs}");
    }

    #[test]
    fn support_is_positively_homogeneous(seed in any::<u64>(), s in 0.1f64..10.0) {
        let mut rng = StreamRng::new(seed);
        let k = random_polytope(3, 2, &mut rng);
        let u = [rng.normal(), rng.normal(), rng.normal()];
        let su: Vec<f64> = u.iter().map(|x| x * s).collect();
        let a = k.support(&su).unwrap();
        let b = s * k.support(&u).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
    }

    #[test]
    fn lp_maximizer_is_feasible_and_optimal(seed in any::<u64>()) {
        let mut rng = StreamRng::new(seed);
        let k = random_polytope(3, 4, &mut rng);
        let c = [rng.normal(), rng.normal(), rng.normal()];
        let sol = k.lp_maximize(&c).unwrap();
        prop_assert!(k.max_excess(&sol.maximizer) <= 1e-9);
        // no random feasible point does better
        for _ in 0..200 {
            let x = [rng.uniform(), rng.uniform(), rng.uniform()];
            if k.contains(&x) {
                let v: f64 = x.iter().zip(&c).map(|(a, b)| a * b).sum();
                prop_assert!(v <= sol.value + 1e-9);
            }
        }
    }

    #[test]
    fn split_sides_are_disjoint_and_cover(seed in any::<u64>()) {
        let mut rng = StreamRng::new(seed);
        let k = random_polytope(2, 2, &mut rng);
        let n = unit(&[rng.normal(), rng.normal()]);
        let t = rng.uniform_in(-0.2, 1.2);
        let plane = Hyperplane::new(n.clone(), t).unwrap();
        let (lo, up) = k.split(&plane).unwrap();
        for _ in 0..300 {
            let x = [rng.uniform(), rng.uniform()];
            let side = n[0] * x[0] + n[1] * x[1] - t;
            if side.abs() < 1e-7 {
                continue;
            }
            let in_lo = lo.as_ref().is_some_and(|p| p.contains(&x));
            let in_up = up.as_ref().is_some_and(|p| p.contains(&x));
            if k.max_excess(&x) < -1e-7 {
                prop_assert!(in_lo ^ in_up);
            } else if k.max_excess(&x) > 1e-7 {
                prop_assert!(!in_lo && !in_up);
            }
        }
    }
}

#[test]
fn lp_matches_box_closed_form() {
    let mut rng = StreamRng::new(2024);
    for _ in 0..10_000 {
        let d = 1 + rng.below(4);
        let low: Vec<f64> = (0..d).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
        let high: Vec<f64> = low.iter().map(|l| l + rng.uniform_in(0.01, 4.0)).collect();
        let b = AxisBox::new(low.clone(), high.clone()).unwrap();
        // a far-away redundant face keeps the polytope off the box fast path
        let mut hs = b.to_polytope().halfspaces().to_vec();
        hs.push(Halfspace::new(vec![1.0; d], 1e3));
        let p = HPolytope::new(d, hs).unwrap();
        assert!(p.as_axis_box().is_none());
        let u: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let closed: f64 = (0..d)
            .map(|i| {
                if u[i] >= 0.0 {
                    u[i] * high[i]
                } else {
                    u[i] * low[i]
                }
            })
            .sum();
        let lp = p.lp_maximize(&u).unwrap().value;
        assert!((lp - closed).abs() <= 1e-9, "{lp} vs {closed}");
    }
}

#[test]
fn triangle_split_volumes() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let square = AxisBox::unit(2).to_polytope();
    let plane = Hyperplane::new(vec![s, s], s).unwrap();
    let (lo, up) = square.split(&plane).unwrap();
    let mut rng = StreamRng::new(11);
    for half in [lo.unwrap(), up.unwrap()] {
        let (v, se) = mc_volume(&half, 1_000_000, &mut rng);
        assert!((v - 0.5).abs() < 3.0 * se + 1e-3, "{v} +- {se}");
    }
}

#[test]
fn split_conserves_volume() {
    let mut rng = StreamRng::new(5);
    for _ in 0..10 {
        let d = 2 + rng.below(2);
        let k = random_polytope(d, 2, &mut rng);
        let n = unit(&(0..d).map(|_| rng.normal()).collect::<Vec<_>>());
        let c: f64 = k.witness().iter().zip(&n).map(|(a, b)| a * b).sum();
        let plane = Hyperplane::new(n, c + rng.uniform_in(-0.2, 0.2)).unwrap();
        let (lo, up) = k.split(&plane).unwrap();
        let (v, se) = mc_volume(&k, 200_000, &mut rng);
        let mut parts = 0.0;
        let mut var = se * se;
        for p in [lo, up].into_iter().flatten() {
            let (vp, sp) = mc_volume(&p, 200_000, &mut rng);
            parts += vp;
            var += sp * sp;
        }
        assert!((parts - v).abs() <= 3.0 * var.sqrt(), "{parts} vs {v}");
    }
}

#[test]
fn zonotope_volume_matches_monte_carlo() {
    let mut rng = StreamRng::new(17);
    for case in 0..8 {
        let d = 2 + case % 2;
        let m = d + 1 + rng.below(2);
        let segs: Vec<(Vec<f64>, f64)> = (0..m)
            .map(|_| {
                (
                    unit(&(0..d).map(|_| rng.normal()).collect::<Vec<_>>()),
                    rng.uniform_in(0.2, 1.5),
                )
            })
            .collect();
        let z = Zonotope::new(segs).unwrap();
        let exact = z.volume().unwrap();
        let p = z.to_hpolytope().unwrap();
        let (est, se) = mc_volume(&p, 400_000, &mut rng);
        assert!(
            (est - exact).abs() <= 3.0 * se,
            "case {case}: {est} +- {se} vs {exact}"
        );
    }
}

#[test]
fn zonotope_brute_force_determinants() {
    // three segments in the plane: every 2-subset contributes |det|
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = Zonotope::new(vec![
        (vec![1.0, 0.0], 1.0),
        (vec![0.0, 1.0], 1.0),
        (vec![s, s], 1.0),
    ])
    .unwrap();
    let pairs = [
        (1.0 * 1.0 - 0.0 * 0.0),
        (1.0 * s - 0.0 * s),
        (0.0 * s - 1.0 * s),
    ];
    let expect: f64 = pairs.iter().map(|x: &f64| x.abs()).sum();
    assert!((z.volume().unwrap() - expect).abs() < 1e-14);
    assert!((expect - (1.0 + 2f64.sqrt())).abs() < 1e-14);
}

#[test]
fn weighted_mondrian_zonoid_support_is_half_weight() {
    let mut rng = StreamRng::new(3);
    for _ in 0..100 {
        let d = 1 + rng.below(6);
        let raw: Vec<f64> = (0..d).map(|_| rng.uniform_in(0.1, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        let segs = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                (e, raw[i] / total)
            })
            .collect();
        let z = Zonotope::new(segs).unwrap();
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            assert_eq!(z.support(&e), raw[i] / total / 2.0);
        }
    }
}

#[test]
fn unit_cube_intrinsic_volumes_are_binomials() {
    for d in 0..=8 {
        for j in 0..=d {
            assert_eq!(
                box_intrinsic_volume(&vec![1.0; d], j).unwrap(),
                binomial(d, j)
            );
        }
    }
}

#[test]
fn projected_width_of_sampled_box() {
    let mut rng = StreamRng::new(8);
    for _ in 0..50 {
        let low: Vec<f64> = (0..3).map(|_| -rng.exponential(1.0)).collect();
        let high: Vec<f64> = (0..3).map(|_| rng.exponential(1.0)).collect();
        let b = AxisBox::new(low.clone(), high.clone()).unwrap();
        let w =
            projected_width(&b.to_polytope(), &[vec![1.0, 0.0, 0.0]], &[1.0, 0.0, 0.0]).unwrap();
        assert!((w - (high[0] - low[0])).abs() < 1e-12);
    }
}

#[test]
fn diameter_estimate_is_a_lower_bound() {
    let mut rng = StreamRng::new(21);
    for _ in 0..20 {
        let k = random_polytope(2, 3, &mut rng);
        let basis = [vec![1.0, 0.0], vec![0.0, 1.0]];
        let est = diameter_estimate(&k, &basis, 256, &mut rng).unwrap();
        let bb = k.bounding_box().unwrap();
        assert!(est <= bb.diameter() + 1e-9);
        assert!(est >= 0.999 * bb.sides().iter().cloned().fold(0.0, f64::max));
    }
}
