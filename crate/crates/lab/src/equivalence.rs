//! Agreement of the direct STIT route and the lifted Mondrian route on
//! co-membership probabilities of fixed point pairs.

use serde::{Deserialize, Serialize};
use stit_core::oblique::{dirdist_from_matrix, lifted_partition_with_padding, DEFAULT_PADDING};
use stit_core::tessellate::stit_sample;
use stit_core::{AxisBox, FeatureMatrix, StreamKey};

use crate::risk::par_indexed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteConfig {
    /// Feature matrix rows; normalized to `|A|_{2,1} = 1` before use.
    pub rows: Vec<Vec<f64>>,
    pub lifetime: f64,
    pub pairs: Vec<[Vec<f64>; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquivalenceConfig {
    pub replicates: usize,
    pub padding: f64,
    pub configs: Vec<RouteConfig>,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let pairs = |p: [[f64; 4]; 3]| -> Vec<[Vec<f64>; 2]> {
            p.iter()
                .map(|q| [vec![q[0], q[1]], vec![q[2], q[3]]])
                .collect()
        };
        EquivalenceConfig {
            replicates: 10_000,
            padding: DEFAULT_PADDING,
            configs: vec![
                RouteConfig {
                    rows: vec![vec![1.0, s], vec![0.0, s]],
                    lifetime: 2.0,
                    pairs: pairs([
                        [0.2, 0.2, 0.4, 0.3],
                        [0.1, 0.8, 0.3, 0.6],
                        [0.5, 0.5, 0.55, 0.9],
                    ]),
                },
                RouteConfig {
                    rows: vec![vec![1.0, 0.0, 0.6], vec![0.0, 1.0, -0.8]],
                    lifetime: 3.0,
                    pairs: pairs([
                        [0.3, 0.3, 0.35, 0.4],
                        [0.7, 0.1, 0.8, 0.3],
                        [0.2, 0.9, 0.25, 0.7],
                    ]),
                },
                RouteConfig {
                    rows: vec![vec![2.0, 0.5], vec![1.0, -1.0]],
                    lifetime: 4.0,
                    pairs: pairs([
                        [0.1, 0.1, 0.2, 0.15],
                        [0.6, 0.6, 0.62, 0.75],
                        [0.4, 0.9, 0.5, 0.8],
                    ]),
                },
            ],
        }
    }
}

/// Co-membership frequencies of one pair under both routes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub config_id: usize,
    pub pair_id: usize,
    pub lifetime: f64,
    pub direct: f64,
    pub lifted: f64,
    pub pooled_stderr: f64,
    /// `|direct - lifted| <= 3 pooled_stderr`.
    pub pass: bool,
}

/// Replicate `r` of configuration `c` draws the lifted partition from
/// `key.child(c).child(r).child(0)` and the direct tessellation of pair `j`
/// from `key.child(c).child(r).child(1 + j)`. The direct route samples each
/// pair on its own bounding box.
pub fn equivalence_experiment(
    cfg: &EquivalenceConfig,
    key: StreamKey,
) -> stit_core::Result<Vec<PairResult>> {
    let mut out = Vec::new();
    for (ci, rc) in cfg.configs.iter().enumerate() {
        let a = FeatureMatrix::from_rows(&rc.rows)?.normalized();
        let phi = dirdist_from_matrix(&a)?;
        let windows = rc
            .pairs
            .iter()
            .map(|p| AxisBox::bounding(p, 1e-3).map(|b| b.to_polytope()))
            .collect::<stit_core::Result<Vec<_>>>()?;
        let points: Vec<Vec<f64>> = rc.pairs.iter().flat_map(|p| p.iter().cloned()).collect();
        let ck = key.child(ci as u64);
        let hits = par_indexed(
            cfg.replicates,
            |r| -> stit_core::Result<Vec<(bool, bool)>> {
                let rk = ck.child(r as u64);
                let part = lifted_partition_with_padding(
                    &points,
                    &a,
                    rc.lifetime,
                    cfg.padding,
                    &mut rk.child(0).rng(),
                )?;
                rc.pairs
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        let tree = stit_sample(
                            &windows[j],
                            rc.lifetime,
                            &phi,
                            &mut rk.child(1 + j as u64).rng(),
                        )?;
                        let direct = tree.locate(&p[0])? == tree.locate(&p[1])?;
                        Ok((direct, part.labels[2 * j] == part.labels[2 * j + 1]))
                    })
                    .collect()
            },
        )
        .into_iter()
        .collect::<stit_core::Result<Vec<_>>>()?;
        let n = cfg.replicates as f64;
        for j in 0..rc.pairs.len() {
            let p1 = hits.iter().filter(|h| h[j].0).count() as f64 / n;
            let p2 = hits.iter().filter(|h| h[j].1).count() as f64 / n;
            let pooled = ((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / n).sqrt();
            out.push(PairResult {
                config_id: ci,
                pair_id: j,
                lifetime: rc.lifetime,
                direct: p1,
                lifted: p2,
                pooled_stderr: pooled,
                pass: (p1 - p2).abs() <= 3.0 * pooled,
            });
        }
    }
    Ok(out)
}
