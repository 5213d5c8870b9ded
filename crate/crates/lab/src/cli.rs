//! The `stit` command line: argument parsing, configuration overrides and
//! command execution.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use stit_core::regress::fit_forest;
use stit_core::stats::ols;
use stit_core::{SamplerSpec, StreamKey};

use crate::bias::estimate_bias;
use crate::config::RunConfig;
use crate::equivalence::equivalence_experiment;
use crate::error::{LabError, LabResult};
use crate::geometry::geometry_suite;
use crate::io::{self, num, Artifact, Table};
use crate::rates::rate_experiment;
use crate::subopt::suboptimality_check;
use crate::svg::{log_log_plot, Series};

#[derive(Debug, Parser)]
#[command(
    name = "stit",
    version,
    about = "Random tessellation forests and their experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Root seed; overrides the configuration.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads; overrides the configuration.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Exit with status 3 when an acceptance check fails.
    #[arg(long = "assert", global = true)]
    pub assert_checks: bool,
    /// Also write SVG plots where available.
    #[arg(long, global = true)]
    pub plot: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one tessellation and write it as JSON.
    SampleTessellation,
    /// Fit a forest to a dataset CSV and write the model JSON.
    Fit {
        /// Dataset CSV; overrides the configuration.
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
        /// Number of trees; overrides the configuration.
        #[arg(long, value_name = "M")]
        trees: Option<usize>,
    },
    /// Predict at the points of a CSV file with a saved model.
    Predict {
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        points: Option<PathBuf>,
    },
    /// Run an experiment and write its result tables.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Rates,
    Suboptimality,
    Geometry,
    Equivalence,
    Bias,
}

impl ExperimentKind {
    fn stream_id(self) -> u64 {
        match self {
            ExperimentKind::Rates => 0,
            ExperimentKind::Suboptimality => 1,
            ExperimentKind::Geometry => 2,
            ExperimentKind::Equivalence => 3,
            ExperimentKind::Bias => 4,
        }
    }
}

const SAMPLE_STREAM: u64 = 5;

/// Result of a command before anything is written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
    /// Failed acceptance checks.
    pub failures: Vec<String>,
}

/// Loads the configuration and applies flag overrides.
pub fn resolve_config(cli: &Cli) -> LabResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    match &cli.command {
        Command::Fit { data, trees } => {
            if let Some(d) = data {
                match &mut cfg.fit {
                    Some(f) => f.data = d.clone(),
                    None => {
                        return Err(LabError::Config(
                            "`fit` needs a `fit` section with a sampler".into(),
                        ))
                    }
                }
            }
            if let (Some(m), Some(f)) = (trees, &mut cfg.fit) {
                f.trees = *m;
            }
        }
        Command::Predict { model, points } => match (&mut cfg.predict, model, points) {
            (Some(p), m, q) => {
                if let Some(m) = m {
                    p.model = m.clone();
                }
                if let Some(q) = q {
                    p.points = q.clone();
                }
            }
            (None, Some(m), Some(q)) => {
                cfg.predict = Some(crate::config::PredictConfig {
                    model: m.clone(),
                    points: q.clone(),
                })
            }
            _ => {
                return Err(LabError::Config(
                    "`predict` needs a model and a points file".into(),
                ))
            }
        },
        _ => {}
    }
    if cfg.threads == Some(0) {
        return Err(LabError::Config("threads must be positive".into()));
    }
    Ok(cfg)
}

fn config_err(e: stit_core::Error) -> LabError {
    LabError::Config(e.to_string())
}

/// Executes a command on the current thread pool; nothing is written.
pub fn execute(command: &Command, cfg: &RunConfig, plot: bool) -> LabResult<Outcome> {
    let root = StreamKey::root(cfg.seed);
    match command {
        Command::SampleTessellation => sample_tessellation(cfg, root.child(SAMPLE_STREAM)),
        Command::Fit { .. } => fit(cfg),
        Command::Predict { .. } => predict(cfg),
        Command::Experiment { kind } => {
            let key = root.child(kind.stream_id());
            match kind {
                ExperimentKind::Rates => rates(cfg, key, plot),
                ExperimentKind::Suboptimality => suboptimality(cfg, key),
                ExperimentKind::Geometry => geometry(cfg, key),
                ExperimentKind::Equivalence => equivalence(cfg, key),
                ExperimentKind::Bias => bias(cfg, key),
            }
        }
    }
}

/// Resolves the configuration, executes on a pool of the requested size,
/// then writes all artifacts. Returns the summary line.
pub fn run(cli: &Cli) -> LabResult<String> {
    let cfg = resolve_config(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| LabError::Config(e.to_string()))?;
    let outcome = pool.install(|| execute(&cli.command, &cfg, cli.plot))?;
    io::write_artifacts(&outcome.artifacts)?;
    if cli.assert_checks && !outcome.failures.is_empty() {
        return Err(LabError::Assertion(outcome.failures.join(", ")));
    }
    Ok(outcome.summary)
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

fn paths(a: &[Artifact]) -> String {
    a.iter()
        .map(|x| x.path.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn sample_tessellation(cfg: &RunConfig, key: StreamKey) -> LabResult<Outcome> {
    let sc = &cfg.sample_tessellation;
    let window = sc
        .window
        .clone()
        .unwrap_or_else(|| stit_core::AxisBox::unit(sc.sampler.dim()));
    let tree = sc.sampler.sample(&window, &mut key.rng())?;
    let art = Artifact::new(
        out(cfg, "tessellation.json"),
        io::tessellation_to_json(&tree)?,
    );
    let summary = format!(
        "sample-tessellation: {} leaves -> {}",
        tree.leaf_count(),
        art.path.display()
    );
    Ok(Outcome {
        artifacts: vec![art],
        summary,
        failures: vec![],
    })
}

fn fit(cfg: &RunConfig) -> LabResult<Outcome> {
    let fc = cfg
        .fit
        .as_ref()
        .ok_or_else(|| LabError::Config("missing `fit` section".into()))?;
    let sampler = match (&fc.feature_matrix, &fc.sampler) {
        (Some(p), None) => {
            let lifetime = fc.lifetime.ok_or_else(|| {
                LabError::Config("`fit.lifetime` is required with a feature matrix".into())
            })?;
            SamplerSpec::ObliqueLifted {
                matrix: io::load_feature_matrix(p)?,
                lifetime,
            }
        }
        (None, Some(s)) => s.clone(),
        _ => {
            return Err(LabError::Config(
                "`fit` needs exactly one of `sampler` and `feature_matrix`".into(),
            ))
        }
    };
    if fc.trees == 0 {
        return Err(LabError::Config("`fit.trees` must be positive".into()));
    }
    let data = io::load_dataset(&fc.data)?;
    let model = fit_forest(&data, &sampler, fc.window.as_ref(), fc.trees, cfg.seed)?;
    let art = Artifact::new(out(cfg, "model.json"), io::model_to_json(&model)?);
    let summary = format!(
        "fit: {} trees on {} points -> {}",
        fc.trees,
        data.len(),
        art.path.display()
    );
    Ok(Outcome {
        artifacts: vec![art],
        summary,
        failures: vec![],
    })
}

fn predict(cfg: &RunConfig) -> LabResult<Outcome> {
    let pc = cfg
        .predict
        .as_ref()
        .ok_or_else(|| LabError::Config("missing `predict` section".into()))?;
    let model = io::load_model(&pc.model)?;
    let points = io::load_points(&pc.points)?;
    let d = model.dim();
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.extend(["prediction".to_string(), "clamped".to_string()]);
    let mut t = Table {
        header,
        rows: Vec::with_capacity(points.len()),
    };
    let mut clamped = 0;
    for (i, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(LabError::parse(
                &pc.points,
                format!("record {}: expected {d} columns", i + 1),
            ));
        }
        let pr = model.predict_checked(p);
        clamped += pr.clamped as usize;
        let mut r: Vec<String> = p.iter().map(|v| num(*v)).collect();
        r.extend([num(pr.value), pr.clamped.to_string()]);
        t.rows.push(r);
    }
    let art = Artifact::new(out(cfg, "predictions.csv"), t.to_csv());
    let summary = format!(
        "predict: {} points ({clamped} clamped) -> {}",
        points.len(),
        art.path.display()
    );
    Ok(Outcome {
        artifacts: vec![art],
        summary,
        failures: vec![],
    })
}

fn rates(cfg: &RunConfig, key: StreamKey, plot: bool) -> LabResult<Outcome> {
    let rc = &cfg.rates;
    rc.validate().map_err(config_err)?;
    let mut artifacts = Vec::new();
    let mut failures = Vec::new();
    let mut series = Vec::new();
    let mut summary_table = Table::new(&[
        "family",
        "multiplier",
        "slope",
        "slope_stderr",
        "expected_slope",
        "pass",
    ]);
    for &family in &rc.families {
        let fit = rate_experiment(rc, family, key)?;
        let mut t = Table::new(&["n", "lambda", "M", "risk", "stderr"]);
        for g in &fit.grid {
            t.push(vec![
                g.n.to_string(),
                num(g.lambda),
                g.trees.to_string(),
                num(g.risk),
                num(g.stderr),
            ]);
        }
        artifacts.push(Artifact::new(
            out(cfg, &format!("rates_{}.csv", family.name())),
            t.to_csv(),
        ));
        summary_table.push(vec![
            family.name().into(),
            num(fit.multiplier),
            num(fit.slope),
            num(fit.slope_stderr),
            num(fit.expected_slope),
            fit.pass.to_string(),
        ]);
        if !fit.pass {
            failures.push(format!("rates_{}", family.name()));
        }
        let xs: Vec<f64> = fit.grid.iter().map(|g| (g.n as f64).ln()).collect();
        let ys: Vec<f64> = fit.grid.iter().map(|g| g.risk.ln()).collect();
        let line = ols(&xs, &ys);
        series.push(Series {
            name: family.name().into(),
            points: fit.grid.iter().map(|g| (g.n as f64, g.risk)).collect(),
            fit: Some((line.slope, line.intercept)),
        });
    }
    artifacts.push(Artifact::new(
        out(cfg, "rates_summary.csv"),
        summary_table.to_csv(),
    ));
    if plot {
        let svg = log_log_plot("risk against sample size", "n", "risk", &series);
        artifacts.push(Artifact::new(out(cfg, "rates.svg"), svg.into_bytes()));
    }
    let slopes: Vec<String> = summary_table
        .rows
        .iter()
        .map(|r| format!("{} slope {}", r[0], short(&r[2])))
        .collect();
    let summary = format!("rates: {} -> {}", slopes.join(", "), paths(&artifacts));
    Ok(Outcome {
        artifacts,
        summary,
        failures,
    })
}

fn short(s: &str) -> String {
    s.parse::<f64>()
        .map(|v| format!("{v:.3}"))
        .unwrap_or_else(|_| s.to_string())
}

fn suboptimality(cfg: &RunConfig, key: StreamKey) -> LabResult<Outcome> {
    let sc = &cfg.suboptimality;
    let d = sc.a.len();
    if sc.grid.is_empty() || sc.grid.iter().any(|c| c.weights.len() != d) {
        return Err(LabError::Config(
            "suboptimality grid weights must match the length of `a`".into(),
        ));
    }
    let mut header = vec!["lambda".to_string()];
    header.extend((1..=d).map(|i| format!("w{i}")));
    header.extend(["empirical_risk", "stderr", "lower_bound", "pass"].map(String::from));
    let mut t = Table {
        header,
        rows: vec![],
    };
    let mut failures = Vec::new();
    for (i, cell) in sc.grid.iter().enumerate() {
        let r = suboptimality_check(
            &sc.a,
            cell.lambda,
            &cell.weights,
            sc.sigma,
            sc.n,
            sc.n_test,
            sc.replicates,
            key.child(i as u64),
        )?;
        let mut row = vec![num(r.lambda)];
        row.extend(r.weights.iter().map(|w| num(*w)));
        row.extend([
            num(r.empirical_risk),
            num(r.stderr),
            num(r.lower_bound),
            r.pass.to_string(),
        ]);
        t.push(row);
        if !r.pass {
            failures.push(format!("suboptimality_cell{i}"));
        }
    }
    finish("suboptimality", t, failures, out(cfg, "suboptimality.csv"))
}

fn finish(name: &str, t: Table, failures: Vec<String>, path: PathBuf) -> LabResult<Outcome> {
    let n = t.rows.len();
    let summary = format!(
        "{name}: {}/{n} checks passed -> {}",
        n - failures.len(),
        path.display()
    );
    Ok(Outcome {
        artifacts: vec![Artifact::new(path, t.to_csv())],
        summary,
        failures,
    })
}

fn geometry(cfg: &RunConfig, key: StreamKey) -> LabResult<Outcome> {
    let checks = geometry_suite(&cfg.geometry, key)?;
    let mut t = Table::new(&["check_id", "estimate", "stderr", "bound_or_target", "pass"]);
    let mut failures = Vec::new();
    for c in &checks {
        t.push(vec![
            c.check_id.clone(),
            num(c.estimate),
            num(c.stderr),
            num(c.bound_or_target),
            c.pass.to_string(),
        ]);
        if !c.pass {
            failures.push(c.check_id.clone());
        }
    }
    finish("geometry", t, failures, out(cfg, "geometry.csv"))
}

fn equivalence(cfg: &RunConfig, key: StreamKey) -> LabResult<Outcome> {
    let rows = equivalence_experiment(&cfg.equivalence, key)?;
    let mut t = Table::new(&[
        "config_id",
        "pair_id",
        "lambda",
        "direct",
        "lifted",
        "pooled_stderr",
        "pass",
    ]);
    let mut failures = Vec::new();
    for r in &rows {
        t.push(vec![
            r.config_id.to_string(),
            r.pair_id.to_string(),
            num(r.lifetime),
            num(r.direct),
            num(r.lifted),
            num(r.pooled_stderr),
            r.pass.to_string(),
        ]);
        if !r.pass {
            failures.push(format!("equivalence_{}_{}", r.config_id, r.pair_id));
        }
    }
    finish("equivalence", t, failures, out(cfg, "equivalence.csv"))
}

fn bias(cfg: &RunConfig, key: StreamKey) -> LabResult<Outcome> {
    let b = estimate_bias(&cfg.bias, key)?;
    let mut t = Table::new(&["lambda", "bias", "stderr", "bound", "pass"]);
    let pass = b.bound.map_or(true, |bd| b.bias <= bd + 3.0 * b.stderr);
    t.push(vec![
        num(b.lambda),
        num(b.bias),
        num(b.stderr),
        b.bound.map(num).unwrap_or_default(),
        pass.to_string(),
    ]);
    let failures = if pass {
        vec![]
    } else {
        vec!["bias_bound".to_string()]
    };
    finish("bias", t, failures, out(cfg, "bias.csv"))
}

/// Entry point used by the binary: returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}
