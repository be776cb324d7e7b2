//! Experiment configuration, deterministic parallel execution and CSV /
//! JSON manifest output.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::SubsetMask;
use crate::error::{domain, Error, Result};
use crate::families::{
    diagonal_observable_variance_bound, dirichlet_l1_mean, dirichlet_sd_mean, porter_thomas_survival, product_sd_mean,
    product_tail_exact, Underlying,
};
use crate::lab::{
    anticoncentration_statistic, diagonal_observable_variance, estimate_tail_curve, log_grid, map_trials,
    pairwise_loss_moments_multi, Bandwidth, FamilySpec, MetricSpec, MomentReport, ReferenceOutcome,
};
use crate::loss::{mmd_two_sample_test, KernelSpec};
use crate::rng::RandomStream;
use crate::samples::SampleSet;

pub const CSV_HEADER: &str = "experiment,family,n,metric,sigma,statistic,value,stderr,trials,seed";

/// Desk-scale trial count.
pub const DEFAULT_TRIALS: usize = 10_000;
/// Trial count used with `--paper-scale`.
pub const PAPER_TRIALS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Tails,
    Pairwise,
    Anticoncentration,
    Observable,
    Mmdtest,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::Tails => "tails",
            ExperimentKind::Pairwise => "pairwise",
            ExperimentKind::Anticoncentration => "anticoncentration",
            ExperimentKind::Observable => "observable",
            ExperimentKind::Mmdtest => "mmdtest",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "tails" => ExperimentKind::Tails,
            "pairwise" => ExperimentKind::Pairwise,
            "anticoncentration" => ExperimentKind::Anticoncentration,
            "observable" => ExperimentKind::Observable,
            "mmdtest" => ExperimentKind::Mmdtest,
            _ => return domain(format!("unknown experiment '{s}'")),
        })
    }
}

fn default_y_grid() -> Vec<f64> {
    let mut g = log_grid(1e-3, 1e2, 26).expect("static grid");
    g.push(0.5);
    g.sort_by(f64::total_cmp);
    g
}

fn default_observable() -> Vec<u32> {
    vec![1]
}

fn default_alpha() -> f64 {
    0.05
}

fn default_samples() -> usize {
    100
}

fn default_mmd_sigma() -> f64 {
    1.0
}

/// Everything needed to reproduce a run. Serialized into the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub families: Vec<FamilySpec>,
    pub n_min: u32,
    pub n_max: u32,
    pub trials: usize,
    #[serde(default)]
    pub metrics: Vec<MetricSpec>,
    #[serde(default = "default_y_grid")]
    pub y_grid: Vec<f64>,
    #[serde(default)]
    pub reference: ReferenceOutcome,
    /// Qubits of the diagonal Pauli string for the observable experiment.
    #[serde(default = "default_observable")]
    pub observable: Vec<u32>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Samples per side for the two-sample test experiment.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_mmd_sigma")]
    pub mmd_sigma: f64,
    pub seed: u64,
    /// Thread count; does not affect results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, families: Vec<FamilySpec>, n_min: u32, n_max: u32, seed: u64) -> Self {
        Self {
            experiment,
            families,
            n_min,
            n_max,
            trials: DEFAULT_TRIALS,
            metrics: vec![MetricSpec::Sd],
            y_grid: default_y_grid(),
            reference: ReferenceOutcome::Fixed,
            observable: default_observable(),
            alpha: default_alpha(),
            samples: default_samples(),
            mmd_sigma: default_mmd_sigma(),
            seed,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return domain("no families given");
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return domain(format!("invalid qubit range {}..={}", self.n_min, self.n_max));
        }
        if self.trials == 0 {
            return domain("trials must be at least 1");
        }
        if self.workers == Some(0) {
            return domain("workers must be at least 1");
        }
        for f in &self.families {
            f.check(self.n_min)?;
            f.check(self.n_max)?;
        }
        match self.experiment {
            ExperimentKind::Pairwise if self.metrics.is_empty() => domain("pairwise experiment needs a metric"),
            ExperimentKind::Observable => SubsetMask::from_qubits(&self.observable, self.n_min).map(|_| ()),
            ExperimentKind::Mmdtest => {
                if self.samples < 2 {
                    return domain("two-sample test needs at least 2 samples per side");
                }
                KernelSpec::new(self.mmd_sigma)?;
                crate::loss::mmd_test_threshold(self.samples, self.samples, self.alpha, 1.0).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// Reads a config, or the config inside a manifest, from JSON.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let inner = value.get("config").cloned().unwrap_or(value);
        Ok(serde_json::from_value(inner)?)
    }

    /// Stream for one `(family, n)` cell; independent of the other cells
    /// in the config.
    fn cell_stream(&self, family: &FamilySpec, n: u32) -> RandomStream {
        RandomStream::new(self.seed).labelled(&format!("{}/{family}/{n}", self.experiment))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub experiment: String,
    pub family: String,
    pub n: u32,
    pub metric: String,
    pub sigma: Option<f64>,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl ExperimentRow {
    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.family,
            self.n,
            self.metric,
            opt(self.sigma),
            self.statistic,
            fmt_float(self.value),
            opt(self.stderr),
            self.trials,
            self.seed
        )
    }

    fn check_finite(&self) -> Result<()> {
        let bad = !self.value.is_finite()
            || self.stderr.is_some_and(|v| !v.is_finite())
            || self.sigma.is_some_and(|v| !v.is_finite());
        if bad {
            return domain(format!(
                "non-finite value in {} / {} / n={} / {} / {}; aborting",
                self.experiment, self.family, self.n, self.metric, self.statistic
            ));
        }
        Ok(())
    }
}

/// Renders rows as CSV, rejecting any non-finite value.
pub fn rows_to_csv(rows: &[ExperimentRow]) -> Result<String> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        r.check_finite()?;
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    Ok(out)
}

struct RowSink<'a> {
    config: &'a ExperimentConfig,
    rows: Vec<ExperimentRow>,
}

impl RowSink<'_> {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        family: &FamilySpec,
        n: u32,
        metric: &str,
        sigma: Option<f64>,
        statistic: impl Into<String>,
        value: f64,
        stderr: Option<f64>,
        trials: usize,
    ) {
        self.rows.push(ExperimentRow {
            experiment: self.config.experiment.to_string(),
            family: family.to_string(),
            n,
            metric: metric.to_string(),
            sigma,
            statistic: statistic.into(),
            value,
            stderr,
            trials,
            seed: self.config.seed,
        });
    }

    fn moments(&mut self, r: &MomentReport) {
        self.push(&r.family, r.n, &r.metric, r.sigma, "mean", r.mean, Some(r.mean_se), r.trials);
        self.push(&r.family, r.n, &r.metric, r.sigma, "variance", r.variance, Some(r.variance_se), r.trials);
    }
}

fn reference_mean(family: &FamilySpec, n: u32, metric: &MetricSpec) -> Option<f64> {
    let dirichlet = *family == FamilySpec::dirichlet();
    match metric {
        MetricSpec::Sd if *family == FamilySpec::Product => Some(product_sd_mean(n)),
        MetricSpec::Sd if dirichlet => Some(dirichlet_sd_mean(n)),
        MetricSpec::L1 if dirichlet => Some(dirichlet_l1_mean(n)),
        MetricSpec::Tvd if dirichlet => Some(dirichlet_l1_mean(n) / 2.0),
        _ => None,
    }
}

fn reference_tail(family: &FamilySpec, n: u32, y: f64) -> Option<f64> {
    let big_n = 2f64.powi(n as i32);
    match family {
        FamilySpec::Product => product_tail_exact(n, y.min(big_n)).ok(),
        f if *f == FamilySpec::dirichlet() => porter_thomas_survival(big_n, (y / big_n).min(1.0)).ok(),
        _ => None,
    }
}

fn y_label(prefix: &str, y: f64) -> String {
    format!("{prefix}[y={}]", fmt_float(y))
}

fn run_cell(config: &ExperimentConfig, sink: &mut RowSink, family: &FamilySpec, n: u32) -> Result<()> {
    let stream = config.cell_stream(family, n);
    let trials = config.trials;
    match config.experiment {
        ExperimentKind::Pairwise => {
            for r in pairwise_loss_moments_multi(*family, n, &config.metrics, trials, &stream)? {
                sink.moments(&r);
            }
            for m in &config.metrics {
                if let Some(v) = reference_mean(family, n, m) {
                    sink.push(family, n, m.label(), m.sigma(n), "reference_mean", v, None, trials);
                }
            }
        }
        ExperimentKind::Tails => {
            let curve = estimate_tail_curve(*family, n, &config.y_grid, trials, &stream, config.reference)?;
            for pt in &curve.points {
                let se = (pt.survival * (1.0 - pt.survival) / trials as f64).sqrt();
                sink.push(family, n, "survival", None, y_label("survival", pt.y), pt.survival, Some(se), trials);
                sink.push(family, n, "survival", None, y_label("ci_low", pt.y), pt.ci_low, None, trials);
                sink.push(family, n, "survival", None, y_label("ci_high", pt.y), pt.ci_high, None, trials);
                if let Some(v) = reference_tail(family, n, pt.y) {
                    sink.push(family, n, "survival", None, y_label("reference", pt.y), v, None, trials);
                }
            }
        }
        ExperimentKind::Anticoncentration => {
            let r = anticoncentration_statistic(*family, n, trials, &stream)?;
            let m = "anticoncentration";
            sink.push(family, n, m, None, "second_moment", r.second_moment, Some(r.second_moment_se), trials);
            sink.push(family, n, m, None, "tail_half", r.tail_half, Some(r.tail_half_se), trials);
        }
        ExperimentKind::Observable => {
            let s = SubsetMask::from_qubits(&config.observable, n)?;
            let r = diagonal_observable_variance(*family, n, s, trials, &stream)?;
            sink.moments(&r);
            if let FamilySpec::PseudoIndep(u @ Underlying::Gamma { .. }) = family {
                let bound = diagonal_observable_variance_bound(n, u.mean(), u.variance());
                sink.push(family, n, &r.metric, None, "variance_bound", bound, None, trials);
            }
        }
        ExperimentKind::Mmdtest => {
            let spec = KernelSpec::new(config.mmd_sigma)?;
            let m = config.samples;
            let outcomes = map_trials(trials, &stream, |s| {
                let p = family.instance(n, &s.child(0))?;
                let q = family.instance(n, &s.child(1))?;
                let x = SampleSet::draw(&p, &s.child(2), m);
                let same = SampleSet::draw(&p, &s.child(3), m);
                let other = SampleSet::draw(&q, &s.child(4), m);
                let null = mmd_two_sample_test(&x, &same, &spec, config.alpha)?;
                let alt = mmd_two_sample_test(&x, &other, &spec, config.alpha)?;
                Ok((!null.accept, !alt.accept, null.threshold))
            })?;
            let t = trials as f64;
            let rate = |hits: usize| {
                let f = hits as f64 / t;
                (f, (f * (1.0 - f) / t).sqrt())
            };
            let (type1, se1) = rate(outcomes.iter().filter(|o| o.0).count());
            let (power, se2) = rate(outcomes.iter().filter(|o| o.1).count());
            let sigma = Some(config.mmd_sigma);
            sink.push(family, n, "mmd2_estimate", sigma, "type1_error", type1, Some(se1), trials);
            sink.push(family, n, "mmd2_estimate", sigma, "power", power, Some(se2), trials);
            sink.push(family, n, "mmd2_estimate", sigma, "threshold", outcomes[0].2, None, trials);
        }
    }
    Ok(())
}

/// Runs every `(family, n)` cell in order and returns the rows.
pub fn run_rows(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    let workers = config.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("could not start {workers} workers: {e}")))?;
    pool.install(|| {
        let mut sink = RowSink { config, rows: Vec::new() };
        for family in &config.families {
            for n in config.n_min..=config.n_max {
                log::info!("{} {family} n={n}", config.experiment);
                run_cell(config, &mut sink, family, n)?;
            }
        }
        Ok(sink.rows)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub rows: usize,
    pub csv: Option<String>,
    pub config: ExperimentConfig,
}

/// Runs `config`, writing the CSV to `out` (or `stdout` when `None`) and,
/// with a path, the manifest next to it with extension `.json`.
pub fn run(config: &ExperimentConfig, out: Option<&Path>, stdout: &mut dyn Write) -> Result<Vec<ExperimentRow>> {
    let rows = run_rows(config)?;
    let csv = rows_to_csv(&rows)?;
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, &csv)?;
            let manifest = Manifest {
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: config.seed,
                rows: rows.len(),
                csv: path.file_name().map(|f| f.to_string_lossy().into_owned()),
                config: config.clone(),
            };
            std::fs::write(manifest_path(path), serde_json::to_string_pretty(&manifest)? + "\n")?;
        }
        None => stdout.write_all(csv.as_bytes())?,
    }
    Ok(rows)
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Preset experiments, one per figure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureKind {
    /// Product tail curves.
    Fig2,
    /// Dirichlet(1) tail curves.
    Fig4,
    /// Mean SD.
    Fig5,
    /// Variance of SD.
    Fig6,
    /// Mean MMD² at `ς = 1`.
    Fig7,
    /// Mean MMD² at `ς = n`.
    Fig8,
    /// Mean 1-norm / total variation.
    Fig9,
}

impl FigureKind {
    pub const ALL: [FigureKind; 7] = [
        FigureKind::Fig2,
        FigureKind::Fig4,
        FigureKind::Fig5,
        FigureKind::Fig6,
        FigureKind::Fig7,
        FigureKind::Fig8,
        FigureKind::Fig9,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            FigureKind::Fig2 => "fig2",
            FigureKind::Fig4 => "fig4",
            FigureKind::Fig5 => "fig5",
            FigureKind::Fig6 => "fig6",
            FigureKind::Fig7 => "fig7",
            FigureKind::Fig8 => "fig8",
            FigureKind::Fig9 => "fig9",
        }
    }

    /// Families compared in the loss figures.
    pub fn model_families() -> Vec<FamilySpec> {
        vec![
            FamilySpec::IqpProduct(Default::default()),
            FamilySpec::Mps { chi: None },
            FamilySpec::Iqp { singletons: true },
            FamilySpec::pareto(2.0),
            FamilySpec::PeakedIqp,
        ]
    }

    pub fn config(&self, seed: u64, trials: usize) -> ExperimentConfig {
        let tails = |family| {
            let mut c = ExperimentConfig::new(ExperimentKind::Tails, vec![family], 1, 26, seed);
            c.trials = trials;
            c
        };
        let pairwise = |metrics: Vec<MetricSpec>| {
            let mut c = ExperimentConfig::new(ExperimentKind::Pairwise, Self::model_families(), 2, 13, seed);
            c.metrics = metrics;
            c.trials = trials;
            c
        };
        match self {
            FigureKind::Fig2 => tails(FamilySpec::Product),
            FigureKind::Fig4 => tails(FamilySpec::dirichlet()),
            FigureKind::Fig5 | FigureKind::Fig6 => pairwise(vec![MetricSpec::Sd]),
            FigureKind::Fig7 => pairwise(vec![MetricSpec::Mmd2(Bandwidth::Fixed(1.0))]),
            FigureKind::Fig8 => pairwise(vec![MetricSpec::Mmd2(Bandwidth::Qubits)]),
            FigureKind::Fig9 => pairwise(vec![MetricSpec::L1, MetricSpec::Tvd]),
        }
    }
}

impl FromStr for FigureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.label() == s).ok_or_else(|| Error::Domain(format!("unknown figure '{s}'")))
    }
}
