use proptest::prelude::*;
use stit_core::regress::{
    fit_forest, fit_forest_with_streams, fit_tree, predict_forest, predict_tree, tree_stream,
};
use stit_core::tessellate::DiscreteDirectionalDistribution;
use stit_core::{AxisBox, Dataset, FeatureMatrix, SamplerSpec, StreamKey, StreamRng};

fn samplers() -> Vec<SamplerSpec> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        SamplerSpec::Mondrian {
            weights: vec![0.5, 0.5],
            lifetime: 6.0,
        },
        SamplerSpec::Stit {
            phi: DiscreteDirectionalDistribution::new(
                vec![vec![1.0, 0.0], vec![s, s]],
                vec![0.4, 0.6],
            )
            .unwrap(),
            lifetime: 4.0,
        },
        SamplerSpec::ObliqueLifted {
            matrix: FeatureMatrix::from_columns(vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, -1.0],
            ])
            .unwrap()
            .normalized(),
            lifetime: 5.0,
        },
    ]
}

fn random_data(n: usize, rng: &mut StreamRng) -> Dataset {
    let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.uniform(), rng.uniform()]).collect();
    let y = x
        .iter()
        .map(|p| (3.0 * p[0]).sin() + p[1] + 0.1 * rng.normal())
        .collect();
    Dataset::new(x, y).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn row_order_does_not_matter(seed in any::<u64>(), which in 0usize..3) {
        let mut rng = StreamRng::new(seed);
        let data = random_data(60, &mut rng);
        let mut idx: Vec<usize> = (0..data.len()).collect();
        for i in (1..idx.len()).rev() {
            idx.swap(i, rng.below(i + 1));
        }
        let shuffled = Dataset::new(
            idx.iter().map(|&i| data.x()[i].clone()).collect(),
            idx.iter().map(|&i| data.y()[i]).collect(),
        ).unwrap();
        let sampler = &samplers()[which];
        let a = fit_forest(&data, sampler, None, 3, seed).unwrap();
        let b = fit_forest(&shuffled, sampler, None, 3, seed).unwrap();
        for _ in 0..100 {
            let q = [rng.uniform(), rng.uniform()];
            prop_assert_eq!(a.predict(&q).to_bits(), b.predict(&q).to_bits());
        }
    }

    #[test]
    fn predictions_stay_in_label_range(seed in any::<u64>(), which in 0usize..3) {
        let mut rng = StreamRng::new(seed);
        let data = random_data(40, &mut rng);
        let lo = data.y().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = data.y().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tree = fit_tree(&data, &samplers()[which], None, &mut rng).unwrap();
        for _ in 0..200 {
            let q = [rng.uniform_in(-0.2, 1.2), rng.uniform_in(-0.2, 1.2)];
            let p = predict_tree(&tree, &q);
            prop_assert!(p == 0.0 || (lo - 1e-12 <= p && p <= hi + 1e-12), "{p} outside [{lo}, {hi}]");
        }
    }
}

#[test]
fn forest_is_mean_of_separately_fitted_trees() {
    let mut rng = StreamRng::new(3);
    let data = random_data(200, &mut rng);
    for sampler in samplers() {
        let forest = fit_forest(&data, &sampler, None, 32, 99).unwrap();
        let trees: Vec<_> = (0..32)
            .map(|i| fit_tree(&data, &sampler, None, &mut tree_stream(99, i).rng()).unwrap())
            .collect();
        for _ in 0..500 {
            let q = [rng.uniform(), rng.uniform()];
            let mut sum = 0.0;
            for t in &trees {
                sum += predict_tree(t, &q);
            }
            assert_eq!(
                predict_forest(&forest, &q).to_bits(),
                (sum / 32.0).to_bits()
            );
        }
    }
}

#[test]
fn identical_streams_reproduce_the_tree() {
    let mut rng = StreamRng::new(4);
    let data = random_data(100, &mut rng);
    let key = StreamKey::root(17);
    for sampler in samplers() {
        let forest = fit_forest_with_streams(&data, &sampler, None, &[key; 8], 17).unwrap();
        let tree = fit_tree(&data, &sampler, None, &mut key.rng()).unwrap();
        for _ in 0..200 {
            let q = [rng.uniform(), rng.uniform()];
            let t = predict_tree(&tree, &q);
            let f = predict_forest(&forest, &q);
            assert!((f - t).abs() <= 1e-15 * t.abs().max(1.0));
        }
        let single = fit_forest(&data, &sampler, None, 1, 5).unwrap();
        let first = fit_tree(&data, &sampler, None, &mut tree_stream(5, 0).rng()).unwrap();
        let q = [0.3, 0.6];
        assert_eq!(single.predict(&q), first.predict(&q));
    }
}

#[test]
fn prediction_is_mean_of_co_members() {
    let mut rng = StreamRng::new(5);
    let data = random_data(200, &mut rng);
    for sampler in samplers() {
        let tree = fit_tree(&data, &sampler, None, &mut rng).unwrap();
        for _ in 0..300 {
            let q = [rng.uniform(), rng.uniform()];
            let leaf = tree.leaf_of(&tree.window().clamp(&q));
            let members: Vec<f64> = data
                .x()
                .iter()
                .zip(data.y())
                .filter(|(x, _)| tree.leaf_of(x) == leaf)
                .map(|(_, &y)| y)
                .collect();
            let want = if members.is_empty() {
                0.0
            } else {
                members.iter().sum::<f64>() / members.len() as f64
            };
            let got = predict_tree(&tree, &q);
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }
}

#[test]
fn empty_leaf_predicts_zero() {
    // all labels sit in the lower-left corner; the far corner cell is empty
    let x = vec![vec![0.0, 0.0], vec![0.05, 0.02], vec![0.01, 0.04]];
    let data = Dataset::new(x, vec![5.0, 6.0, 7.0]).unwrap();
    let window = AxisBox::unit(2);
    let sampler = SamplerSpec::Mondrian {
        weights: vec![0.5, 0.5],
        lifetime: 20.0,
    };
    let mut found = 0;
    for seed in 0..20 {
        let tree = fit_tree(&data, &sampler, Some(&window), &mut StreamRng::new(seed)).unwrap();
        let q = [0.95, 0.95];
        let leaf = tree.leaf_of(&q);
        if tree.leaf_stats()[leaf].count == 0 {
            assert_eq!(predict_tree(&tree, &q), 0.0);
            found += 1;
        }
    }
    assert!(found > 15);
}

#[test]
fn trivial_cases() {
    let one = Dataset::new(vec![vec![0.4, 0.7]], vec![3.5]).unwrap();
    for sampler in samplers() {
        let t = fit_tree(&one, &sampler, None, &mut StreamRng::new(1)).unwrap();
        assert_eq!(predict_tree(&t, &[0.4, 0.7]), 3.5);
    }
    let mut rng = StreamRng::new(2);
    let data = random_data(50, &mut rng);
    let constant = Dataset::new(data.x().to_vec(), vec![2.25; 50]).unwrap();
    let tiny = SamplerSpec::Mondrian {
        weights: vec![0.5, 0.5],
        lifetime: 1e-12,
    };
    let t = fit_tree(&data, &tiny, None, &mut rng).unwrap();
    let mean = data.y().iter().sum::<f64>() / 50.0;
    assert!((predict_tree(&t, &[0.5, 0.5]) - mean).abs() < 1e-12);
    for sampler in samplers() {
        let t = fit_tree(&constant, &sampler, None, &mut rng).unwrap();
        for _ in 0..100 {
            let p = predict_tree(&t, &[rng.uniform(), rng.uniform()]);
            assert!(p == 0.0 || p == 2.25);
        }
    }
}

#[test]
fn out_of_window_queries_are_clamped() {
    let mut rng = StreamRng::new(6);
    let data = random_data(80, &mut rng);
    let forest = fit_forest(&data, &samplers()[0], Some(&AxisBox::unit(2)), 4, 1).unwrap();
    let far = forest.predict_checked(&[1.5, -0.5]);
    let edge = forest.predict_checked(&[1.0, 0.0]);
    assert!(far.clamped && !edge.clamped);
    assert_eq!(far.value, edge.value);
    assert!(fit_tree(
        &data,
        &samplers()[0],
        Some(&AxisBox::cube(2, 0.5, 1.0)),
        &mut rng
    )
    .is_err());
}
