//! Monte-Carlo checks of the tessellation geometry: leaf counts, zero-cell
//! laws, the typical-cell identity, diameter bounds and scaling.

use serde::{Deserialize, Serialize};
use stit_core::mondrian::{mondrian_sample, projected_zero_cell_diameter_stats, zero_cell_sample};
use stit_core::oblique::deter_check;
use stit_core::stats::{gamma2_cdf, ks_one_sample, ks_one_sample_critical, mean_estimate};
use stit_core::tessellate::scaling_check;
use stit_core::{
    AxisBox, DiscreteDirectionalDistribution, FeatureMatrix, StreamKey, SubspaceSpec,
    WeightedMondrianSpec,
};

use crate::risk::par_indexed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub leaf_reps: usize,
    pub zero_cell_reps: usize,
    pub campbell_reps: usize,
    pub diameter_reps: usize,
    pub deter_reps: usize,
    pub deter_dirs: usize,
    pub scaling_reps: usize,
    /// Relative tolerance of the typical-cell volume check.
    pub campbell_tolerance: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            leaf_reps: 20_000,
            zero_cell_reps: 20_000,
            campbell_reps: 2_000,
            diameter_reps: 100_000,
            deter_reps: 3_000,
            deter_dirs: 256,
            scaling_reps: 5_000,
            campbell_tolerance: 0.1,
        }
    }
}

/// One row of the geometry table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryCheck {
    pub check_id: String,
    pub estimate: f64,
    pub stderr: f64,
    pub bound_or_target: f64,
    pub pass: bool,
}

fn row(id: &str, estimate: f64, stderr: f64, target: f64, pass: bool) -> GeometryCheck {
    GeometryCheck {
        check_id: id.to_string(),
        estimate,
        stderr,
        bound_or_target: target,
        pass,
    }
}

/// Mean-within-3-stderr check against an exact value.
fn equals(id: &str, xs: &[f64], target: f64) -> GeometryCheck {
    let e = mean_estimate(xs);
    row(
        id,
        e.mean,
        e.stderr,
        target,
        (e.mean - target).abs() <= 3.0 * e.stderr,
    )
}

/// Mean leaf count of `[0,1]^2`, `lambda = 3`, `w = (1/2, 1/2)` against `6.25`.
pub fn leaf_count_check(reps: usize, key: StreamKey) -> stit_core::Result<GeometryCheck> {
    let spec = WeightedMondrianSpec::new(vec![0.5, 0.5], 3.0)?;
    let window = AxisBox::unit(2);
    let counts = par_indexed(reps, |r| {
        mondrian_sample(&window, &spec, &mut key.child(r as u64).rng())
            .map(|t| t.leaf_count() as f64)
    })
    .into_iter()
    .collect::<stit_core::Result<Vec<_>>>()?;
    Ok(equals("leaf_count_unit_square", &counts, 6.25))
}

/// Zero-cell side lengths against `Gamma(2, lambda w_i)` and the mean
/// volume against `2^d / (lambda^d prod w_i)`.
pub fn zero_cell_checks(reps: usize, key: StreamKey) -> stit_core::Result<Vec<GeometryCheck>> {
    let mut out = Vec::new();
    let spec = WeightedMondrianSpec::new(vec![0.3, 0.7], 2.0)?;
    let cells = par_indexed(reps, |r| {
        zero_cell_sample(&spec, &mut key.child(0).child(r as u64).rng())
    });
    let crit = ks_one_sample_critical(0.01, reps);
    for i in 0..2 {
        let sides: Vec<f64> = cells.iter().map(|c| c.high[i] - c.low[i]).collect();
        let rate = spec.lifetime() * spec.weights()[i];
        let ks = ks_one_sample(&sides, |x| gamma2_cdf(x, rate));
        out.push(row(
            &format!("zero_cell_side_ks_axis{i}"),
            ks,
            0.0,
            crit,
            ks < crit,
        ));
    }
    let spec = WeightedMondrianSpec::new(vec![0.5, 0.5], 2.0)?;
    let vols = par_indexed(reps, |r| {
        zero_cell_sample(&spec, &mut key.child(1).child(r as u64).rng()).volume()
    });
    out.push(equals("zero_cell_mean_volume", &vols, 4.0));
    Ok(out)
}

/// Mean typical-cell volume from the cell intensity in an inner window:
/// `vol(W') / E[#cell centers in W']`, for `w = (1/2, 1/2)`, `lambda = 1`.
pub fn campbell_check(
    reps: usize,
    tolerance: f64,
    key: StreamKey,
) -> stit_core::Result<GeometryCheck> {
    let spec = WeightedMondrianSpec::new(vec![0.5, 0.5], 1.0)?;
    let (side, margin) = (24.0, 6.0);
    let window = AxisBox::cube(2, 0.0, side);
    let inner = AxisBox::cube(2, margin, side - margin);
    let counts = par_indexed(reps, |r| -> stit_core::Result<f64> {
        let tree = mondrian_sample(&window, &spec, &mut key.child(r as u64).rng())?;
        let cells = tree.leaf_cells()?;
        Ok(cells
            .iter()
            .filter(|c| c.as_axis_box().is_some_and(|b| inner.contains(&b.center())))
            .count() as f64)
    })
    .into_iter()
    .collect::<stit_core::Result<Vec<_>>>()?;
    let e = mean_estimate(&counts);
    let v = inner.volume();
    let estimate = v / e.mean;
    let stderr = v * e.stderr / (e.mean * e.mean);
    let target = 1.0 / (0.5 * 0.5);
    Ok(row(
        "campbell_typical_cell_volume",
        estimate,
        stderr,
        target,
        (estimate - target).abs() <= tolerance * target,
    ))
}

/// Projected zero-cell diameter moments against the Erlang bounds; the
/// single-coordinate cases are tight.
pub fn diameter_checks(reps: usize, key: StreamKey) -> stit_core::Result<Vec<GeometryCheck>> {
    let mut out = Vec::new();
    let one = WeightedMondrianSpec::new(vec![1.0], 1.0)?;
    for (i, k) in [1usize, 2].into_iter().enumerate() {
        let st = projected_zero_cell_diameter_stats(
            &one,
            &[0],
            k,
            0.0,
            reps,
            &mut key.child(i as u64).rng(),
        )?;
        let tight = (st.estimate - st.bound).abs() <= 3.0 * st.stderr;
        out.push(row(
            &format!("mondrian_diameter_k{k}_s1"),
            st.estimate,
            st.stderr,
            st.bound,
            st.pass && tight,
        ));
    }
    let two = WeightedMondrianSpec::new(vec![0.3, 0.7], 1.0)?;
    let st =
        projected_zero_cell_diameter_stats(&two, &[0, 1], 1, 0.0, reps, &mut key.child(2).rng())?;
    out.push(row(
        "mondrian_diameter_k1_s2",
        st.estimate,
        st.stderr,
        st.bound,
        st.pass,
    ));
    Ok(out)
}

/// Oblique zero-cell diameters against the proof-form bound for a fixed
/// `A` (`d = 3`, `m = 4`) and two subspaces.
pub fn deter_checks(
    reps: usize,
    n_dirs: usize,
    key: StreamKey,
) -> stit_core::Result<Vec<GeometryCheck>> {
    let a = FeatureMatrix::from_columns(vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.6, 0.0, 0.8],
    ])?
    .normalized();
    let subspaces = [
        ("s1", SubspaceSpec::from_spanning(&[vec![1.0, 1.0, 1.0]])?),
        (
            "s2",
            SubspaceSpec::from_spanning(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, -1.0]])?,
        ),
    ];
    let mut out = Vec::new();
    for (si, (name, s)) in subspaces.iter().enumerate() {
        for k in [1usize, 2] {
            let mut rng = key.child(si as u64).child(k as u64).rng();
            let c = deter_check(&a, s, k, reps, n_dirs, &mut rng)?;
            out.push(row(
                &format!("oblique_diameter_k{k}_{name}"),
                c.estimate,
                c.stderr,
                c.bounds.proof,
                c.pass,
            ));
        }
    }
    Ok(out)
}

/// Two-sample KS of STIT(4) on the unit square against STIT(1) on
/// `[0,4]^2`, for an axis-aligned and an oblique direction set.
pub fn scaling_checks(reps: usize, key: StreamKey) -> stit_core::Result<Vec<GeometryCheck>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let configs = [
        (
            "scaling_axis",
            DiscreteDirectionalDistribution::mondrian(&[0.5, 0.5])?,
        ),
        (
            "scaling_oblique",
            DiscreteDirectionalDistribution::new(vec![vec![1.0, 0.0], vec![s, s]], vec![0.4, 0.6])?,
        ),
    ];
    let mut out = Vec::new();
    for (i, (id, phi)) in configs.iter().enumerate() {
        let rep = scaling_check(phi, 4.0, reps, key.child(i as u64))?;
        out.push(row(
            id,
            rep.ks_statistic,
            0.0,
            rep.critical_1pct,
            rep.ks_statistic < rep.critical_1pct,
        ));
    }
    Ok(out)
}

/// All checks; check group `g` draws from `key.child(g)`.
pub fn geometry_suite(
    cfg: &GeometryConfig,
    key: StreamKey,
) -> stit_core::Result<Vec<GeometryCheck>> {
    let mut out = vec![leaf_count_check(cfg.leaf_reps, key.child(0))?];
    out.extend(zero_cell_checks(cfg.zero_cell_reps, key.child(1))?);
    out.push(campbell_check(
        cfg.campbell_reps,
        cfg.campbell_tolerance,
        key.child(2),
    )?);
    out.extend(diameter_checks(cfg.diameter_reps, key.child(3))?);
    out.extend(deter_checks(cfg.deter_reps, cfg.deter_dirs, key.child(4))?);
    out.extend(scaling_checks(cfg.scaling_reps, key.child(5))?);
    Ok(out)
}
