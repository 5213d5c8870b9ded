use stit_core::geom::{Halfspace, Hyperplane};
use stit_core::oblique::{c1_bound, perp_norm21, sigma_s};
use stit_core::regress::{fit_forest, fit_tree};
use stit_core::{
    AxisBox, BoundInputs, Dataset, FeatureMatrix, HPolytope, SamplerSpec, StreamKey, StreamRng,
    SubspaceSpec, Zonotope,
};
use stit_lab::config::SuboptConfig;
use stit_lab::equivalence::{equivalence_experiment, EquivalenceConfig};
use stit_lab::geometry::{geometry_suite, GeometryCheck, GeometryConfig};
use stit_lab::rates::{rate_experiment, RateConfig};
use stit_lab::subopt::{suboptimality_bound, suboptimality_check};

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn record(&mut self, n: usize, pass: bool, detail: String) {
        println!(
            "[acceptance] criterion {n} ... {} ({detail})",
            if pass { "PASS" } else { "FAIL" }
        );
        self.lines.push((n, pass, detail));
    }
}

fn checks<'a>(all: &'a [GeometryCheck], prefix: &str) -> Vec<&'a GeometryCheck> {
    all.iter()
        .filter(|c| c.check_id.starts_with(prefix))
        .collect()
}

fn summarize(cs: &[&GeometryCheck]) -> (bool, String) {
    let pass = !cs.is_empty() && cs.iter().all(|c| c.pass);
    let detail = cs
        .iter()
        .map(|c| format!("{}={:.4}/{:.4}", c.check_id, c.estimate, c.bound_or_target))
        .collect::<Vec<_>>()
        .join(", ");
    (pass, detail)
}

fn geometry_criteria(report: &mut Report) {
    let all = geometry_suite(&GeometryConfig::default(), StreamKey::root(1).child(2)).unwrap();
    let groups: [(usize, &[&str]); 5] = [
        (1, &["leaf_count"]),
        (2, &["zero_cell"]),
        (3, &["scaling"]),
        (5, &["campbell"]),
        (6, &["mondrian_diameter", "oblique_diameter"]),
    ];
    for (n, prefixes) in groups {
        let cs: Vec<&GeometryCheck> = prefixes.iter().flat_map(|p| checks(&all, p)).collect();
        let (pass, detail) = summarize(&cs);
        report.record(n, pass, detail);
    }
}

fn equivalence_criterion(report: &mut Report) {
    let cfg = EquivalenceConfig::default();
    let rows = equivalence_experiment(&cfg, StreamKey::root(1).child(3)).unwrap();
    let configs = cfg.configs.len();
    let worst = rows
        .iter()
        .map(|r| (r.direct - r.lifted).abs() / r.pooled_stderr)
        .fold(0.0, f64::max);
    let pass = configs >= 3 && cfg.replicates >= 10_000 && rows.iter().all(|r| r.pass);
    report.record(
        4,
        pass,
        format!("{configs} configs x 3 pairs, max |diff|/se = {worst:.2}"),
    );
}

fn rate_criterion(report: &mut Report) {
    let cfg = RateConfig::default();
    let mut pass = cfg.replicates >= 20;
    let mut detail = Vec::new();
    for family in cfg.families.clone() {
        let fit = rate_experiment(&cfg, family, StreamKey::root(1).child(0)).unwrap();
        pass &= fit.pass;
        detail.push(format!(
            "{} slope {:.3} +- {:.3} vs {:.3} (c = {})",
            family.name(),
            fit.slope,
            fit.slope_stderr,
            fit.expected_slope,
            fit.multiplier
        ));
    }
    report.record(7, pass, detail.join("; "));
}

fn suboptimality_criterion(report: &mut Report) {
    let cfg = SuboptConfig::default();
    let mut pass = cfg.grid.len() == 4;
    let mut detail = Vec::new();
    for (i, cell) in cfg.grid.iter().enumerate() {
        let r = suboptimality_check(
            &cfg.a,
            cell.lambda,
            &cell.weights,
            cfg.sigma,
            cfg.n,
            cfg.n_test,
            cfg.replicates,
            StreamKey::root(1).child(1).child(i as u64),
        )
        .unwrap();
        pass &= r.pass;
        detail.push(format!(
            "{:.4}>={:.4}-3*{:.4}",
            r.empirical_risk, r.lower_bound, r.stderr
        ));
    }
    report.record(8, pass, detail.join(", "));
}

fn kernel_properties() -> Result<(), String> {
    let mut rng = StreamRng::new(9);
    for _ in 0..1_000 {
        let d = 1 + rng.below(4);
        let low: Vec<f64> = (0..d).map(|_| rng.uniform_in(-3.0, 3.0)).collect();
        let high: Vec<f64> = low.iter().map(|l| l + rng.uniform_in(0.05, 3.0)).collect();
        let b = AxisBox::new(low.clone(), high.clone()).unwrap();
        let mut hs = b.to_polytope().halfspaces().to_vec();
        hs.push(Halfspace::new(vec![1.0; d], 1e3));
        let p = HPolytope::new(d, hs).unwrap();
        let u: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let closed: f64 = (0..d).map(|i| (u[i] * low[i]).max(u[i] * high[i])).sum();
        let lp = p.lp_maximize(&u).unwrap().value;
        if (lp - closed).abs() > 1e-9 {
            return Err(format!("LP {lp} vs box {closed}"));
        }
        let i = rng.below(d);
        let t = rng.uniform_in(low[i], high[i]);
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        let (lo, up) = b
            .to_polytope()
            .split(&Hyperplane::new(e, t).unwrap())
            .unwrap();
        let vol =
            |q: Option<HPolytope>| q.and_then(|q| q.as_axis_box()).map_or(0.0, |q| q.volume());
        let (vl, vu) = (vol(lo), vol(up));
        if (vl + vu - b.volume()).abs() > 1e-9 * b.volume() {
            return Err(format!("split volumes {vl} + {vu} vs {}", b.volume()));
        }
    }
    for case in 0..2 {
        let d = 2 + case;
        let segs: Vec<(Vec<f64>, f64)> = (0..d + 1)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                (v.iter().map(|x| x / n).collect(), rng.uniform_in(0.3, 1.2))
            })
            .collect();
        let z = Zonotope::new(segs).unwrap();
        let exact = z.volume().unwrap();
        let p = z.to_hpolytope().unwrap();
        let bb = p.bounding_box().unwrap();
        let samples = 200_000;
        let mut hits = 0usize;
        for _ in 0..samples {
            let x: Vec<f64> = (0..d)
                .map(|i| rng.uniform_in(bb.low[i], bb.high[i]))
                .collect();
            hits += p.contains(&x) as usize;
        }
        let f = hits as f64 / samples as f64;
        let (est, se) = (
            bb.volume() * f,
            bb.volume() * (f * (1.0 - f) / samples as f64).sqrt(),
        );
        if (est - exact).abs() > 3.0 * se {
            return Err(format!("zonotope volume {exact} vs MC {est} +- {se}"));
        }
    }
    Ok(())
}

fn estimator_properties() -> Result<(), String> {
    let mut rng = StreamRng::new(10);
    let n = 300;
    let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.uniform(), rng.uniform()]).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|p| p[0] - 2.0 * p[1] + 0.3 * rng.normal())
        .collect();
    let data = Dataset::new(x.clone(), y.clone()).unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.below(i + 1));
    }
    let permuted = Dataset::new(
        order.iter().map(|&i| x[i].clone()).collect(),
        order.iter().map(|&i| y[i]).collect(),
    )
    .unwrap();
    let window = AxisBox::unit(2);
    let probes: Vec<Vec<f64>> = (0..500)
        .map(|_| vec![rng.uniform(), rng.uniform()])
        .collect();
    let a = FeatureMatrix::from_columns(vec![vec![1.0, 0.0], vec![0.6, 0.8]])
        .unwrap()
        .normalized();
    for sampler in [
        SamplerSpec::Mondrian {
            weights: vec![0.5, 0.5],
            lifetime: 12.0,
        },
        SamplerSpec::ObliqueLifted {
            matrix: a,
            lifetime: 12.0,
        },
    ] {
        let t1 = fit_tree(
            &data,
            &sampler,
            Some(&window),
            &mut StreamKey::root(4).rng(),
        )
        .unwrap();
        let t2 = fit_tree(
            &permuted,
            &sampler,
            Some(&window),
            &mut StreamKey::root(4).rng(),
        )
        .unwrap();
        if probes
            .iter()
            .any(|p| t1.predict(p).to_bits() != t2.predict(p).to_bits())
        {
            return Err("row permutation changed a prediction".into());
        }
        let forest = fit_forest(&data, &sampler, Some(&window), 8, 17).unwrap();
        for p in &probes {
            let mean = forest.trees().iter().map(|t| t.predict(p)).sum::<f64>() / 8.0;
            if forest.predict(p).to_bits() != mean.to_bits() {
                return Err("forest prediction is not the mean of its trees".into());
            }
        }
    }
    let sparse = Dataset::new(vec![vec![0.1, 0.1], vec![0.9, 0.9]], vec![5.0, 7.0]).unwrap();
    let sampler = SamplerSpec::Mondrian {
        weights: vec![0.5, 0.5],
        lifetime: 20.0,
    };
    let tree = fit_tree(
        &sparse,
        &sampler,
        Some(&window),
        &mut StreamKey::root(5).rng(),
    )
    .unwrap();
    let cells = tree.tree().leaf_cells().unwrap();
    let empty = tree
        .leaf_stats()
        .iter()
        .position(|s| s.count == 0)
        .ok_or("no empty leaf")?;
    if tree.predict(cells[empty].witness()) != 0.0 {
        return Err("empty leaf does not predict 0".into());
    }
    Ok(())
}

fn determinism() -> Result<(), String> {
    let cfg = GeometryConfig {
        leaf_reps: 500,
        zero_cell_reps: 500,
        campbell_reps: 50,
        diameter_reps: 1_000,
        deter_reps: 100,
        deter_dirs: 32,
        scaling_reps: 200,
        ..GeometryConfig::default()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| geometry_suite(&cfg, StreamKey::root(3)).unwrap())
    };
    let bits = |v: &[GeometryCheck]| {
        v.iter()
            .map(|c| (c.estimate.to_bits(), c.stderr.to_bits()))
            .collect::<Vec<_>>()
    };
    let (a, b, c) = (run(1), run(1), run(2));
    if bits(&a) != bits(&b) || bits(&a) != bits(&c) {
        return Err("geometry outputs differ across runs or thread counts".into());
    }
    Ok(())
}

fn property_criterion(report: &mut Report) {
    let results = [
        ("kernel", kernel_properties()),
        ("estimator", estimator_properties()),
        ("determinism", determinism()),
    ];
    let pass = results.iter().all(|r| r.1.is_ok());
    let detail = results
        .iter()
        .map(|(name, r)| match r {
            Ok(()) => format!("{name} ok"),
            Err(e) => format!("{name}: {e}"),
        })
        .collect::<Vec<_>>()
        .join(", ");
    report.record(9, pass, detail);
}

/// `c_{d,k}` through `Gamma(k/2 + 1)` by the half-integer recursion.
fn reference_c(d: usize, k: usize) -> f64 {
    let mut g = if k % 2 == 0 {
        1.0
    } else {
        std::f64::consts::PI.sqrt() / 2.0
    };
    let mut x = if k % 2 == 0 { 2.0 } else { 1.5 };
    while x <= k as f64 / 2.0 + 1e-9 {
        g *= x;
        x += 1.0;
    }
    let kappa = std::f64::consts::PI.powf(k as f64 / 2.0) / g;
    let fact: f64 = (2..=k).map(|i| i as f64).product();
    kappa * (std::f64::consts::PI * d as f64).sqrt().powi(k as i32) / fact
}

#[allow(clippy::too_many_arguments)]
fn reference_c1(inp: &BoundInputs, d: usize, s: usize, m: usize, sig: f64, eps: f64) -> f64 {
    let ratio = (m as f64).powi(2) / (d as f64 * inp.lifetime * sig);
    let bias = 9.0 * inp.lipschitz.powi(2) * ratio.powf(2.0 * inp.beta);
    let cells: f64 = (0..=d)
        .map(|k| {
            reference_c(d, k) * inp.lifetime.powi(k as i32) * eps.powi(k.saturating_sub(s) as i32)
        })
        .sum();
    bias + cells * (5.0 * inp.f_inf.powi(2) + 2.0 * inp.noise_var) / inp.n as f64
}

fn reference_subopt(a: &[f64], lambda: f64, w: &[f64], sigma: f64, n: usize) -> f64 {
    let mut bias = 0.0;
    for (ai, wi) in a.iter().zip(w) {
        let r = lambda * wi;
        let t = ai * ai * (r * r - 2.0 * r - 1.0) / (2.0 * r.powi(4));
        bias += if t > 0.0 { t } else { 0.0 };
    }
    let c: f64 = w.iter().map(|wi| 2.0 * lambda * wi).product();
    bias + sigma * sigma * c / (n as f64 + c)
}

fn closed_form_criterion(report: &mut Report) {
    let mut rng = StreamRng::new(12);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = 2 + rng.below(3);
        let m = d + rng.below(3);
        let s = 1 + rng.below(d);
        let a = loop {
            let cols: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..d).map(|_| rng.normal()).collect())
                .collect();
            if let Ok(a) = FeatureMatrix::from_columns(cols) {
                break a.normalized();
            }
        };
        let rows: Vec<Vec<f64>> = (0..s)
            .map(|_| (0..d).map(|_| rng.normal()).collect())
            .collect();
        let sub = SubspaceSpec::from_spanning(&rows).unwrap();
        let inp = BoundInputs {
            lipschitz: rng.uniform_in(0.1, 3.0),
            beta: rng.uniform_in(0.1, 1.0),
            noise_var: rng.uniform_in(0.0, 2.0),
            f_inf: rng.uniform_in(0.0, 2.0),
            n: 1 + rng.below(100_000),
            lifetime: rng.uniform_in(0.1, 20.0),
            trees: 1,
        };
        let got = c1_bound(&inp, &a, &sub).unwrap();
        let want = reference_c1(
            &inp,
            d,
            s,
            m,
            sigma_s(&a, &sub).unwrap(),
            perp_norm21(&a, &sub),
        );
        worst = worst.max((got - want).abs() / want.abs());

        let k = 1 + rng.below(4);
        let av: Vec<f64> = (0..k)
            .map(|_| rng.uniform_in(0.2, 3.0) * if rng.uniform() < 0.5 { -1.0 } else { 1.0 })
            .collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.uniform_in(0.1, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let lambda = rng.uniform_in(0.5, 40.0);
        let sigma = rng.uniform_in(0.1, 2.0);
        let n = 1 + rng.below(100_000);
        let got = suboptimality_bound(&av, lambda, &w, sigma, n)
            .unwrap()
            .total();
        let want = reference_subopt(&av, lambda, &w, sigma, n);
        worst = worst.max((got - want).abs() / want.abs());
    }
    report.record(
        10,
        worst <= 1e-12,
        format!("200 evaluations, max relative error {worst:.2e}"),
    );
}

fn main() {
    let mut report = Report { lines: Vec::new() };
    geometry_criteria(&mut report);
    equivalence_criterion(&mut report);
    rate_criterion(&mut report);
    suboptimality_criterion(&mut report);
    property_criterion(&mut report);
    closed_form_criterion(&mut report);
    report.lines.sort_by_key(|l| l.0);
    println!("[acceptance] summary");
    for (n, pass, _) in &report.lines {
        println!(
            "[acceptance] criterion {n}: {}",
            if *pass { "PASS" } else { "FAIL" }
        );
    }
    let failed: Vec<usize> = report.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    if report.lines.len() != 10 || !failed.is_empty() {
        eprintln!("[acceptance] failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
