//! Random tessellation trees and forests for regression.
//!
//! A tree samples a tessellation of the training window without looking at
//! the data, routes every training point to its cell and predicts the mean
//! label of the cell (0 for a cell without training points). A forest
//! averages independently drawn trees.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom::AxisBox;
use crate::mondrian::{mondrian_sample, WeightedMondrianSpec};
use crate::oblique::{lifted_spec, FeatureMatrix};
use crate::rng::{StreamKey, StreamRng};
use crate::tessellate::{stit_sample, DiscreteDirectionalDistribution, TessellationTree};

/// Relative margin of the default training window.
pub const DEFAULT_WINDOW_PAD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(invalid("dataset must have at least one row"));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let d = x[0].len();
        if d == 0 {
            return Err(invalid("covariates must have positive dimension"));
        }
        for row in &x {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(invalid("covariates must be finite"));
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(invalid("labels must be finite"));
        }
        Ok(Dataset { x, y })
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }

    /// Bounding box of the covariates with a small relative margin.
    pub fn default_window(&self) -> AxisBox {
        AxisBox::bounding(&self.x, DEFAULT_WINDOW_PAD).expect("nonempty dataset")
    }
}

/// Partition sampler used to grow trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    /// General STIT sampler on the window polytope.
    Stit {
        phi: DiscreteDirectionalDistribution,
        lifetime: f64,
    },
    /// Axis-aligned weighted Mondrian.
    Mondrian { weights: Vec<f64>, lifetime: f64 },
    /// Oblique Mondrian realized as a standard Mondrian on `A^T x`.
    ObliqueLifted {
        matrix: FeatureMatrix,
        lifetime: f64,
    },
}

impl SamplerSpec {
    pub fn lifetime(&self) -> f64 {
        match self {
            SamplerSpec::Stit { lifetime, .. }
            | SamplerSpec::Mondrian { lifetime, .. }
            | SamplerSpec::ObliqueLifted { lifetime, .. } => *lifetime,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SamplerSpec::Stit { phi, .. } => phi.dim(),
            SamplerSpec::Mondrian { weights, .. } => weights.len(),
            SamplerSpec::ObliqueLifted { matrix, .. } => matrix.dim(),
        }
    }

    /// Samples a tessellation for `window`. For the lifted sampler the tree
    /// lives in `R^m` and covers the bounding box of `A^T(window)`.
    pub fn sample(&self, window: &AxisBox, rng: &mut StreamRng) -> Result<TessellationTree> {
        if window.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: window.dim(),
                got: self.dim(),
            });
        }
        match self {
            SamplerSpec::Stit { phi, lifetime } => {
                stit_sample(&window.to_polytope(), *lifetime, phi, rng)
            }
            SamplerSpec::Mondrian { weights, lifetime } => {
                let spec = WeightedMondrianSpec::new(weights.clone(), *lifetime)?;
                mondrian_sample(window, &spec, rng)
            }
            SamplerSpec::ObliqueLifted { matrix, lifetime } => {
                let lifted = lifted_box(matrix, window)?;
                mondrian_sample(&lifted, &lifted_spec(matrix, *lifetime)?, rng)
            }
        }
    }

    fn lift(&self) -> Option<FeatureMatrix> {
        match self {
            SamplerSpec::ObliqueLifted { matrix, .. } => Some(matrix.clone()),
            _ => None,
        }
    }
}

/// Bounding box of `A^T(window)`.
pub fn lifted_box(a: &FeatureMatrix, window: &AxisBox) -> Result<AxisBox> {
    let mut low = Vec::with_capacity(a.features());
    let mut high = Vec::with_capacity(a.features());
    for c in a.columns() {
        let (mut lo, mut hi) = (0.0, 0.0);
        for (j, &cj) in c.iter().enumerate() {
            let (p, q) = (cj * window.low[j], cj * window.high[j]);
            lo += p.min(q);
            hi += p.max(q);
        }
        low.push(lo);
        high.push(hi);
    }
    AxisBox::new(low, high)
}

/// Count and label sum of one leaf.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LeafStats {
    pub count: u64,
    pub sum: f64,
}

impl LeafStats {
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeEstimatorRepr", into = "TreeEstimatorRepr")]
pub struct TreeEstimator {
    tree: TessellationTree,
    window: AxisBox,
    lift: Option<FeatureMatrix>,
    leaf_stats: Vec<LeafStats>,
}

#[derive(Serialize, Deserialize)]
struct TreeEstimatorRepr {
    tree: TessellationTree,
    window: AxisBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lift: Option<FeatureMatrix>,
    leaf_stats: Vec<LeafStats>,
}

impl TryFrom<TreeEstimatorRepr> for TreeEstimator {
    type Error = Error;
    fn try_from(r: TreeEstimatorRepr) -> Result<Self> {
        let (space, data) = match &r.lift {
            Some(a) => (a.features(), a.dim()),
            None => (r.window.dim(), r.window.dim()),
        };
        if r.tree.dim() != space {
            return Err(Error::DimensionMismatch {
                expected: space,
                got: r.tree.dim(),
            });
        }
        if r.window.dim() != data {
            return Err(Error::DimensionMismatch {
                expected: data,
                got: r.window.dim(),
            });
        }
        if r.leaf_stats.len() != r.tree.leaf_count() {
            return Err(invalid("one leaf statistic per leaf is required"));
        }
        Ok(TreeEstimator {
            tree: r.tree,
            window: r.window,
            lift: r.lift,
            leaf_stats: r.leaf_stats,
        })
    }
}

impl From<TreeEstimator> for TreeEstimatorRepr {
    fn from(t: TreeEstimator) -> Self {
        TreeEstimatorRepr {
            tree: t.tree,
            window: t.window,
            lift: t.lift,
            leaf_stats: t.leaf_stats,
        }
    }
}

/// A prediction together with whether the query had to be clamped into the
/// window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub value: f64,
    pub clamped: bool,
}

impl TreeEstimator {
    pub fn tree(&self) -> &TessellationTree {
        &self.tree
    }

    pub fn window(&self) -> &AxisBox {
        &self.window
    }

    pub fn leaf_stats(&self) -> &[LeafStats] {
        &self.leaf_stats
    }

    /// Leaf of `x`, which must lie in the window.
    pub fn leaf_of(&self, x: &[f64]) -> usize {
        match &self.lift {
            Some(a) => self.tree.route(&a.lift(x)),
            None => self.tree.route(x),
        }
    }

    pub fn predict_checked(&self, x: &[f64]) -> Prediction {
        if self.window.contains(x) {
            Prediction {
                value: self.leaf_stats[self.leaf_of(x)].mean(),
                clamped: false,
            }
        } else {
            let c = self.window.clamp(x);
            Prediction {
                value: self.leaf_stats[self.leaf_of(&c)].mean(),
                clamped: true,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.predict_checked(x).value
    }
}

/// Fits one tree. `window` defaults to [`Dataset::default_window`].
pub fn fit_tree(
    data: &Dataset,
    sampler: &SamplerSpec,
    window: Option<&AxisBox>,
    rng: &mut StreamRng,
) -> Result<TreeEstimator> {
    if sampler.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: sampler.dim(),
        });
    }
    let window = match window {
        Some(w) => {
            if w.dim() != data.dim() {
                return Err(Error::DimensionMismatch {
                    expected: data.dim(),
                    got: w.dim(),
                });
            }
            if data.x.iter().any(|x| !w.contains(x)) {
                return Err(Error::OutOfWindow);
            }
            w.clone()
        }
        None => data.default_window(),
    };
    let tree = sampler.sample(&window, rng)?;
    let mut est = TreeEstimator {
        leaf_stats: Vec::new(),
        lift: sampler.lift(),
        window,
        tree,
    };
    // Labels are summed per leaf in sorted order so the fit does not depend
    // on the row order.
    let mut pairs: Vec<(usize, f64)> = data
        .x
        .iter()
        .zip(&data.y)
        .map(|(x, &y)| (est.leaf_of(x), y))
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut stats = alloc::vec![LeafStats::default(); est.tree.leaf_count()];
    for (leaf, y) in pairs {
        stats[leaf].count += 1;
        stats[leaf].sum += y;
    }
    est.leaf_stats = stats;
    Ok(est)
}

pub fn predict_tree(model: &TreeEstimator, x: &[f64]) -> f64 {
    model.predict(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ForestRepr", into = "ForestRepr")]
pub struct ForestModel {
    sampler: SamplerSpec,
    seed: u64,
    trees: Vec<TreeEstimator>,
}

#[derive(Serialize, Deserialize)]
struct ForestRepr {
    sampler: SamplerSpec,
    seed: u64,
    trees: Vec<TreeEstimator>,
}

impl TryFrom<ForestRepr> for ForestModel {
    type Error = Error;
    fn try_from(f: ForestRepr) -> Result<Self> {
        ForestModel::from_trees(f.sampler, f.seed, f.trees)
    }
}

impl From<ForestModel> for ForestRepr {
    fn from(f: ForestModel) -> Self {
        ForestRepr {
            sampler: f.sampler,
            seed: f.seed,
            trees: f.trees,
        }
    }
}

impl ForestModel {
    pub fn from_trees(sampler: SamplerSpec, seed: u64, trees: Vec<TreeEstimator>) -> Result<Self> {
        let first = trees
            .first()
            .ok_or_else(|| invalid("a forest needs at least one tree"))?;
        if trees.iter().any(|t| t.window != first.window) {
            return Err(invalid("all trees must share the window"));
        }
        Ok(ForestModel {
            sampler,
            seed,
            trees,
        })
    }

    pub fn sampler(&self) -> &SamplerSpec {
        &self.sampler
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trees(&self) -> &[TreeEstimator] {
        &self.trees
    }

    pub fn dim(&self) -> usize {
        self.trees[0].window.dim()
    }

    pub fn window(&self) -> &AxisBox {
        &self.trees[0].window
    }

    /// Mean of the tree predictions, summed in tree order.
    pub fn predict_checked(&self, x: &[f64]) -> Prediction {
        let mut sum = 0.0;
        let mut clamped = false;
        for t in &self.trees {
            let p = t.predict_checked(x);
            sum += p.value;
            clamped |= p.clamped;
        }
        Prediction {
            value: sum / self.trees.len() as f64,
            clamped,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.predict_checked(x).value
    }
}

/// Stream of tree `index` in a forest fitted with `seed`.
pub fn tree_stream(seed: u64, index: u64) -> StreamKey {
    StreamKey::path(seed, &[index])
}

/// Fits `m` trees, tree `i` drawing from [`tree_stream`]`(seed, i)`.
pub fn fit_forest(
    data: &Dataset,
    sampler: &SamplerSpec,
    window: Option<&AxisBox>,
    m: usize,
    seed: u64,
) -> Result<ForestModel> {
    let keys: Vec<StreamKey> = (0..m as u64).map(|i| tree_stream(seed, i)).collect();
    fit_forest_with_streams(data, sampler, window, &keys, seed)
}

/// Fits one tree per stream key, in order.
pub fn fit_forest_with_streams(
    data: &Dataset,
    sampler: &SamplerSpec,
    window: Option<&AxisBox>,
    keys: &[StreamKey],
    seed: u64,
) -> Result<ForestModel> {
    if keys.is_empty() {
        return Err(invalid("a forest needs at least one tree"));
    }
    let window = window.cloned().unwrap_or_else(|| data.default_window());
    let trees = keys
        .iter()
        .map(|k| fit_tree(data, sampler, Some(&window), &mut k.rng()))
        .collect::<Result<Vec<_>>>()?;
    ForestModel::from_trees(sampler.clone(), seed, trees)
}

pub fn predict_forest(model: &ForestModel, x: &[f64]) -> f64 {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid_data(n: usize) -> Dataset {
        let mut rng = StreamRng::new(77);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.uniform(), rng.uniform()]).collect();
        let y = x.iter().map(|p| p[0] + 2.0 * p[1]).collect();
        Dataset::new(x, y).unwrap()
    }

    fn mondrian(lifetime: f64) -> SamplerSpec {
        SamplerSpec::Mondrian {
            weights: vec![0.5, 0.5],
            lifetime,
        }
    }

    #[test]
    fn single_point() {
        let data = Dataset::new(vec![vec![0.3, 0.4]], vec![2.5]).unwrap();
        let t = fit_tree(&data, &mondrian(5.0), None, &mut StreamRng::new(0)).unwrap();
        assert_eq!(t.predict(&[0.3, 0.4]), 2.5);
    }

    #[test]
    fn constant_labels_and_tiny_lifetime() {
        let data = grid_data(100);
        let constant = Dataset::new(data.x().to_vec(), vec![1.5; 100]).unwrap();
        let t = fit_tree(&constant, &mondrian(8.0), None, &mut StreamRng::new(1)).unwrap();
        for s in t.leaf_stats() {
            assert!(s.count == 0 || s.mean() == 1.5);
        }
        let t = fit_tree(&data, &mondrian(1e-12), None, &mut StreamRng::new(1)).unwrap();
        let mean = data.y().iter().sum::<f64>() / 100.0;
        assert!((t.predict(&[0.5, 0.5]) - mean).abs() < 1e-12);
    }

    #[test]
    fn empty_leaf_predicts_zero() {
        let data = Dataset::new(vec![vec![0.1, 0.1], vec![0.2, 0.2]], vec![3.0, 5.0]).unwrap();
        let window = AxisBox::unit(2);
        let mut rng = StreamRng::new(4);
        let t = fit_tree(&data, &mondrian(20.0), Some(&window), &mut rng).unwrap();
        let far = [0.9, 0.9];
        let leaf = t.leaf_of(&far);
        assert_eq!(t.leaf_stats()[leaf].count, 0);
        assert_eq!(t.predict(&far), 0.0);
    }

    #[test]
    fn clamps_outside_queries() {
        let data = grid_data(50);
        let t = fit_tree(
            &data,
            &mondrian(3.0),
            Some(&AxisBox::unit(2)),
            &mut StreamRng::new(2),
        )
        .unwrap();
        let p = t.predict_checked(&[1.5, 0.5]);
        assert!(p.clamped);
        assert_eq!(p.value, t.predict(&[1.0, 0.5]));
    }

    #[test]
    fn out_of_window_training_rejected() {
        let data = Dataset::new(vec![vec![2.0, 0.0]], vec![1.0]).unwrap();
        let r = fit_tree(
            &data,
            &mondrian(1.0),
            Some(&AxisBox::unit(2)),
            &mut StreamRng::new(0),
        );
        assert_eq!(r.err(), Some(Error::OutOfWindow));
    }

    #[test]
    fn lifted_box_of_square() {
        let a = FeatureMatrix::from_columns(vec![vec![1.0, 0.0], vec![1.0, -1.0]]).unwrap();
        let b = lifted_box(&a, &AxisBox::unit(2)).unwrap();
        assert_eq!(b.low, vec![0.0, -1.0]);
        assert_eq!(b.high, vec![1.0, 1.0]);
    }

    #[test]
    fn forest_with_one_tree_is_the_tree() {
        let data = grid_data(80);
        let f = fit_forest(&data, &mondrian(4.0), None, 1, 9).unwrap();
        let t = fit_tree(&data, &mondrian(4.0), None, &mut tree_stream(9, 0).rng()).unwrap();
        assert_eq!(f.predict(&[0.3, 0.6]), t.predict(&[0.3, 0.6]));
    }
}
