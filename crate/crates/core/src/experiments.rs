//! The Monte Carlo verification engine.
//!
//! Each experiment turns one limit statement into a reproducible pass/fail
//! report. Replications are independent units keyed by stream index, so the
//! engine may run them on a rayon pool (capped by `TRANSITORY_SIM_THREADS`,
//! 0 or unset meaning auto) and still produce byte-identical reports:
//! per-replication results are collected in index order and every reduction
//! happens serially afterwards.
//!
//! Exact-null hypothesis tests (sampler correctness, oracle equivalence) are
//! judged by p-values at level 0.001. Limit statements checked at finite n
//! use KS-distance or relative-error thresholds instead, since their null is
//! only asymptotically true.

use std::time::Instant;

use rayon::prelude::*;

use crate::distributions::{InterarrivalModel, PiecewiseConstantRate, TimeHorizon};
use crate::gaussian::{sample_gaussian_path, GaussianKind, GaussianPathSpec};
use crate::path::{GridPath, StepPath};
use crate::reflection::{ht_netput, netput_gamma_n, HeavyTrafficSpec, Reflect, ServiceModel};
use crate::report::{sha256_hex, JsonValue};
use crate::samplers::{
    conditional_mean_mu_n, sample_conditioned_poisson_os, sample_conditioned_renewal_rejection,
    ConditionedRow,
};
use crate::scaling::{counting_path, diffusion_scaled_counting, phi_array, PhiScaling};
use crate::special::{binomial_pmf, standard_normal_cdf};
use crate::stats::{chi_square_gof, ks_one_sample, ks_two_sample};
use crate::stream::RandomStream;
use crate::{Result, SimError};

/// Worker-count cap honored by the engine (0 or unset = auto).
pub const THREADS_ENV_VAR: &str = "TRANSITORY_SIM_THREADS";

// ============================================================================
// Experiment identifiers and configuration
// ============================================================================

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentId {
    OsVsRejection,
    MuNLemma,
    Fslln,
    FcltCounting,
    FcltPoisson,
    PhiDiagnostics,
    WorkloadBb,
    HtCompare,
    InverseBound,
    Exchangeability,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        Self::OsVsRejection,
        Self::MuNLemma,
        Self::Fslln,
        Self::FcltCounting,
        Self::FcltPoisson,
        Self::PhiDiagnostics,
        Self::WorkloadBb,
        Self::HtCompare,
        Self::InverseBound,
        Self::Exchangeability,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::OsVsRejection => "os_vs_rejection",
            Self::MuNLemma => "mu_n_lemma",
            Self::Fslln => "fslln",
            Self::FcltCounting => "fclt_counting",
            Self::FcltPoisson => "fclt_poisson",
            Self::PhiDiagnostics => "phi_diagnostics",
            Self::WorkloadBb => "workload_bb",
            Self::HtCompare => "ht_compare",
            Self::InverseBound => "inverse_bound",
            Self::Exchangeability => "exchangeability",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.name() == name)
    }
}

/// Fully resolved experiment configuration. `defaults` pins the canonical
/// scale of each experiment; every field can be overridden before running.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub model: InterarrivalModel,
    pub horizon: f64,
    pub n_list: Vec<usize>,
    pub replications: usize,
    pub grid_size: usize,
    pub service: ServiceModel,
    pub theta: f64,
    pub max_attempts: u64,
    /// Rejection level for exact-null hypothesis tests.
    pub rejection_level: f64,
    /// KS-distance threshold for asymptotic-proximity comparisons.
    pub ks_distance_max: f64,
    /// Sample count for the goodness-of-fit marginal in `os_vs_rejection`.
    pub gof_samples: usize,
    /// Fluid-scale sup-gap bound at the largest n in `fslln`.
    pub sup_gap_max: f64,
    /// How many replications keep their full grid path for `paths.csv`.
    pub paths_retained: usize,
}

impl ExperimentConfig {
    /// The canonical configuration of each experiment.
    pub fn defaults(experiment: ExperimentId, seed: u64) -> Self {
        let exponential_unit = InterarrivalModel::exponential(1.0).expect("valid rate");
        let base = Self {
            experiment,
            seed,
            model: exponential_unit,
            horizon: 1.0,
            n_list: vec![500],
            replications: 5000,
            grid_size: 1024,
            service: ServiceModel::Exponential,
            theta: 0.0,
            max_attempts: 1_000_000,
            rejection_level: 0.001,
            ks_distance_max: 0.05,
            gof_samples: 100_000,
            sup_gap_max: 0.02,
            paths_retained: 100,
        };
        match experiment {
            ExperimentId::OsVsRejection => Self {
                model: InterarrivalModel::exponential(10.0).expect("valid rate"),
                n_list: vec![10],
                replications: 10_000,
                ..base
            },
            ExperimentId::MuNLemma => Self {
                n_list: vec![0, 9, 99, 999],
                replications: 10_000,
                ..base
            },
            ExperimentId::Fslln => Self {
                n_list: vec![100, 1000, 10_000],
                replications: 500,
                ..base
            },
            ExperimentId::FcltCounting => Self {
                model: InterarrivalModel::exponential(500.0).expect("valid rate"),
                ..base
            },
            ExperimentId::FcltPoisson => Self {
                model: ramp_rate_model(),
                n_list: vec![400],
                ..base
            },
            ExperimentId::PhiDiagnostics => Self {
                n_list: vec![100, 1000, 10_000],
                replications: 2000,
                ..base
            },
            ExperimentId::WorkloadBb => Self {
                model: InterarrivalModel::exponential(500.0).expect("valid rate"),
                replications: 3000,
                ..base
            },
            ExperimentId::HtCompare => Self { replications: 3000, ..base },
            ExperimentId::InverseBound => Self {
                n_list: vec![10, 100, 1000],
                replications: 1000,
                ..base
            },
            ExperimentId::Exchangeability => Self {
                model: InterarrivalModel::exponential(20.0).expect("valid rate"),
                n_list: vec![20],
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(SimError::Config("n_list must not be empty".into()));
        }
        if self.replications < 100 {
            return Err(SimError::Config(format!(
                "distributional tests need at least 100 replications, got {}",
                self.replications
            )));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(SimError::Config(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if self.grid_size == 0 {
            return Err(SimError::Config("grid_size must be >= 1".into()));
        }
        if self.max_attempts == 0 {
            return Err(SimError::Config("max_attempts must be >= 1".into()));
        }
        if !self.rejection_level.is_finite()
            || self.rejection_level <= 0.0
            || self.rejection_level >= 1.0
        {
            return Err(SimError::Config("rejection_level must lie in (0, 1)".into()));
        }
        if !self.ks_distance_max.is_finite() || self.ks_distance_max <= 0.0 {
            return Err(SimError::Config("ks_distance_max must be > 0".into()));
        }
        let needs_positive_n = !matches!(self.experiment, ExperimentId::MuNLemma);
        if needs_positive_n && self.n_list.contains(&0) {
            return Err(SimError::Config("n values must be >= 1".into()));
        }
        Ok(())
    }

    fn horizon_t(&self) -> TimeHorizon {
        TimeHorizon::new(self.horizon).expect("validated horizon")
    }

    /// Canonical JSON echo of the full configuration.
    pub fn to_json(&self) -> JsonValue {
        JsonValue::object(vec![
            ("experiment", JsonValue::Str(self.experiment.name().into())),
            ("seed", JsonValue::UInt(self.seed)),
            ("model", model_to_json(&self.model)),
            ("horizon", JsonValue::Float(self.horizon)),
            (
                "n_list",
                JsonValue::Array(self.n_list.iter().map(|&n| JsonValue::UInt(n as u64)).collect()),
            ),
            ("replications", JsonValue::UInt(self.replications as u64)),
            ("grid_size", JsonValue::UInt(self.grid_size as u64)),
            ("service", service_to_json(&self.service)),
            ("theta", JsonValue::Float(self.theta)),
            ("max_attempts", JsonValue::UInt(self.max_attempts)),
            ("rejection_level", JsonValue::Float(self.rejection_level)),
            ("ks_distance_max", JsonValue::Float(self.ks_distance_max)),
            ("gof_samples", JsonValue::UInt(self.gof_samples as u64)),
            ("sup_gap_max", JsonValue::Float(self.sup_gap_max)),
            ("paths_retained", JsonValue::UInt(self.paths_retained as u64)),
        ])
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.to_json().to_canonical_string().as_bytes())
    }
}

/// Ramp rate γ(t) = 2t on [0, 1], discretized so that Γ(t) = t² holds
/// exactly on the millesimal grid.
pub fn ramp_rate_model() -> InterarrivalModel {
    InterarrivalModel::poisson_rate_fn(
        PiecewiseConstantRate::from_rate_fn(|t| 2.0 * t, 1000, 1.0).expect("valid ramp"),
    )
}

pub fn model_to_json(model: &InterarrivalModel) -> JsonValue {
    match model {
        InterarrivalModel::Exponential { rate } => JsonValue::object(vec![
            ("family", JsonValue::Str("exponential".into())),
            ("rate", JsonValue::Float(*rate)),
        ]),
        InterarrivalModel::Uniform { upper } => JsonValue::object(vec![
            ("family", JsonValue::Str("uniform".into())),
            ("upper", JsonValue::Float(*upper)),
        ]),
        InterarrivalModel::Gamma { shape, scale } => JsonValue::object(vec![
            ("family", JsonValue::Str("gamma".into())),
            ("shape", JsonValue::Float(*shape)),
            ("scale", JsonValue::Float(*scale)),
        ]),
        InterarrivalModel::PoissonRateFn(r) => JsonValue::object(vec![
            ("family", JsonValue::Str("poisson-rate-fn".into())),
            ("support_end", JsonValue::Float(r.support_end())),
            ("total_mass", JsonValue::Float(r.total())),
            ("segments", JsonValue::UInt((r.segment_count()) as u64)),
        ]),
    }
}

pub fn service_to_json(service: &ServiceModel) -> JsonValue {
    match service {
        ServiceModel::Exponential => JsonValue::object(vec![(
            "family",
            JsonValue::Str("exponential".into()),
        )]),
        ServiceModel::Deterministic => JsonValue::object(vec![(
            "family",
            JsonValue::Str("deterministic".into()),
        )]),
        ServiceModel::LogNormal { variance } => JsonValue::object(vec![
            ("family", JsonValue::Str("lognormal".into())),
            ("variance", JsonValue::Float(*variance)),
        ]),
    }
}

// ============================================================================
// Report structure
// ============================================================================

/// One reported statistic, keyed by the row size and (optionally) a time point.
#[derive(Clone, Debug, PartialEq)]
pub struct StatRow {
    pub n: usize,
    pub t: Option<f64>,
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
}

/// One pass/fail verdict. `criterion` names the invariant being enforced.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub criterion: String,
    pub mode: String,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn p_above(name: &str, criterion: &str, p: f64, level: f64) -> Self {
        Self {
            name: name.into(),
            criterion: criterion.into(),
            mode: "p_value_above".into(),
            statistic: p,
            threshold: level,
            passed: p > level,
        }
    }

    fn below(name: &str, criterion: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            criterion: criterion.into(),
            mode: "below".into(),
            statistic: value,
            threshold,
            passed: value < threshold,
        }
    }

    fn at_most(name: &str, criterion: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            criterion: criterion.into(),
            mode: "at_most".into(),
            statistic: value,
            threshold,
            passed: value <= threshold,
        }
    }

    fn above(name: &str, criterion: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            criterion: criterion.into(),
            mode: "above".into(),
            statistic: value,
            threshold,
            passed: value > threshold,
        }
    }

    /// |value − target| ≤ tolerance.
    fn within(name: &str, criterion: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            criterion: criterion.into(),
            mode: "abs_error_at_most".into(),
            statistic: (value - target).abs(),
            threshold: tolerance,
            passed: (value - target).abs() <= tolerance,
        }
    }

    /// Strict decrease along a sequence: the largest adjacent increment must
    /// be negative.
    fn strictly_decreasing(name: &str, criterion: &str, values: &[f64]) -> Self {
        let worst = values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            name: name.into(),
            criterion: criterion.into(),
            mode: "max_increment_below_zero".into(),
            statistic: worst,
            threshold: 0.0,
            passed: worst < 0.0,
        }
    }

    fn to_json(&self) -> JsonValue {
        JsonValue::object(vec![
            ("name", JsonValue::Str(self.name.clone())),
            ("criterion", JsonValue::Str(self.criterion.clone())),
            ("mode", JsonValue::Str(self.mode.clone())),
            ("statistic", JsonValue::Float(self.statistic)),
            ("threshold", JsonValue::Float(self.threshold)),
            ("passed", JsonValue::Bool(self.passed)),
        ])
    }
}

/// A retained replication path destined for `paths.csv`.
#[derive(Clone, Debug)]
pub struct RetainedPath {
    pub replication: usize,
    pub path: GridPath,
}

/// The full outcome of one experiment run. A pure function of the
/// configuration: rerunning with the same config yields identical bytes.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub stats: Vec<StatRow>,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Wall-clock duration. Deliberately excluded from the canonical JSON so
    /// reruns stay byte-identical.
    pub runtime_secs: f64,
    pub retained_paths: Vec<RetainedPath>,
}

impl ExperimentReport {
    /// Canonical `report.json` body. Seed and config hash are embedded as
    /// JSON fields, which keeps the document valid JSON while still carrying
    /// full provenance.
    pub fn to_canonical_json(&self) -> String {
        let stats = self
            .stats
            .iter()
            .map(|s| {
                JsonValue::object(vec![
                    ("n", JsonValue::UInt(s.n as u64)),
                    ("t", s.t.map_or(JsonValue::Null, JsonValue::Float)),
                    ("name", JsonValue::Str(s.name.clone())),
                    ("value", JsonValue::Float(s.value)),
                    ("std_error", s.std_error.map_or(JsonValue::Null, JsonValue::Float)),
                ])
            })
            .collect();
        let checks = self.checks.iter().map(Check::to_json).collect();
        JsonValue::object(vec![
            ("experiment", JsonValue::Str(self.experiment.name().into())),
            ("seed", JsonValue::UInt(self.seed)),
            ("config", self.config.to_json()),
            ("config_sha256", JsonValue::Str(self.config_sha256.clone())),
            ("stats", JsonValue::Array(stats)),
            ("checks", JsonValue::Array(checks)),
            ("passed", JsonValue::Bool(self.passed)),
        ])
        .to_canonical_string()
    }

    /// `summary.csv`: one row per reported statistic.
    pub fn summary_csv(&self) -> String {
        let mut out = crate::report::csv_provenance_line(self.seed, &self.config_sha256);
        out.push_str("n,t,name,value,std_error\n");
        for s in &self.stats {
            let t = s.t.map(crate::report::csv_float).unwrap_or_default();
            let se = s.std_error.map(crate::report::csv_float).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.n,
                t,
                s.name,
                crate::report::csv_float(s.value),
                se
            ));
        }
        out
    }

    /// `paths.csv`: the retained replication paths, one point per row.
    pub fn paths_csv(&self) -> String {
        let mut out = crate::report::csv_provenance_line(self.seed, &self.config_sha256);
        out.push_str("replication,t,value\n");
        for retained in &self.retained_paths {
            for (i, &v) in retained.path.values().iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{}\n",
                    retained.replication,
                    crate::report::csv_float(retained.path.epoch(i)),
                    crate::report::csv_float(v)
                ));
            }
        }
        out
    }
}

// ============================================================================
// Engine plumbing
// ============================================================================

fn build_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV_VAR) {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .map_err(|_| SimError::Config(format!("{THREADS_ENV_VAR}={raw} is not a number")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SimError::Config(format!("could not build thread pool: {e}")))
}

/// Map replications `0..reps` in parallel, each with its own stream; results
/// come back in replication order regardless of schedule.
fn par_map<T, F>(pool: &rayon::ThreadPool, seed: u64, section: u64, reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Result<T> + Sync,
{
    pool.install(|| {
        (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = RandomStream::new(seed, (section << 40) | r as u64).rng();
                f(r, &mut rng)
            })
            .collect()
    })
}

#[derive(Clone, Copy, Debug)]
struct Summary {
    mean: f64,
    mean_se: f64,
    var: f64,
    var_se: f64,
}

fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    let var = m2 / (n - 1.0);
    let m2n = m2 / n;
    let m4n = m4 / n;
    Summary {
        mean,
        mean_se: (var / n).sqrt(),
        var,
        var_se: ((m4n - m2n * m2n).max(0.0) / n).sqrt(),
    }
}

/// Nearest-rank percentile of an unsorted slice.
fn percentile(xs: &[f64], q: f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Exponential model matched to place E[A(T)] at n; leaves the conditioned
/// law of the first n coordinates unchanged while maximizing acceptance.
fn rate_matched(model: &InterarrivalModel, n: usize, horizon: f64) -> InterarrivalModel {
    match model {
        InterarrivalModel::Exponential { .. } => {
            InterarrivalModel::exponential(n as f64 / horizon).expect("n >= 1")
        }
        other => other.clone(),
    }
}

fn draw_row(
    model: &InterarrivalModel,
    n: usize,
    horizon: TimeHorizon,
    rng: &mut rand_chacha::ChaCha8Rng,
    max_attempts: u64,
) -> Result<ConditionedRow> {
    Ok(sample_conditioned_renewal_rejection(model, n, horizon, rng, max_attempts)?.0)
}

// ============================================================================
// run_experiment
// ============================================================================

/// Execute the configured experiment and assemble its report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let started = Instant::now();
    let pool = build_pool()?;

    let mut stats = Vec::new();
    let mut checks = Vec::new();
    let mut retained = Vec::new();

    match config.experiment {
        ExperimentId::OsVsRejection => {
            run_os_vs_rejection(config, &pool, &mut stats, &mut checks)?
        }
        ExperimentId::MuNLemma => run_mu_n_lemma(config, &pool, &mut stats, &mut checks)?,
        ExperimentId::Fslln => run_fslln(config, &pool, &mut stats, &mut checks)?,
        ExperimentId::FcltCounting => {
            run_fclt_counting(config, &pool, &mut stats, &mut checks, &mut retained)?
        }
        ExperimentId::FcltPoisson => {
            run_fclt_poisson(config, &pool, &mut stats, &mut checks, &mut retained)?
        }
        ExperimentId::PhiDiagnostics => {
            run_phi_diagnostics(config, &pool, &mut stats, &mut checks)?
        }
        ExperimentId::WorkloadBb => {
            run_workload_bb(config, &pool, &mut stats, &mut checks, &mut retained)?
        }
        ExperimentId::HtCompare => {
            run_ht_compare(config, &pool, &mut stats, &mut checks, &mut retained)?
        }
        ExperimentId::InverseBound => run_inverse_bound(config, &pool, &mut stats, &mut checks)?,
        ExperimentId::Exchangeability => {
            run_exchangeability(config, &pool, &mut stats, &mut checks)?
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(ExperimentReport {
        experiment: config.experiment,
        seed: config.seed,
        config: config.clone(),
        config_sha256: config.sha256(),
        stats,
        checks,
        passed,
        runtime_secs: started.elapsed().as_secs_f64(),
        retained_paths: retained,
    })
}

// ============================================================================
// Individual experiments
// ============================================================================

fn homogeneous_poisson(n: usize, horizon: f64) -> InterarrivalModel {
    InterarrivalModel::poisson_rate_fn(
        PiecewiseConstantRate::homogeneous(n as f64 / horizon, horizon).expect("valid rate"),
    )
}

/// Ordered-statistics sampler against its exact binomial marginal, then
/// against the rejection sampler (exponential oracle equivalence).
fn run_os_vs_rejection(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    stats: &mut Vec<StatRow>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let n = config.n_list[0];
    let horizon = config.horizon_t();
    if !matches!(config.model, InterarrivalModel::Exponential { .. }) {
        return Err(SimError::Config(
            "os_vs_rejection compares against the exponential oracle; model must be exponential"
                .into(),
        ));
    }
    let os_model = homogeneous_poisson(n, config.horizon);

    // Marginal count at T/2 is Binomial(n, 1/2).
    let half = config.horizon / 2.0;
    let count_hist: Vec<usize> = par_map(pool, config.seed, 1, config.gof_samples, |_, rng| {
        let s = sample_conditioned_poisson_os(&os_model, n, horizon, rng)?;
        Ok(s.count_through(half))
    })?;
    let mut hist = vec![0u64; n + 1];
    for c in count_hist {
        hist[c] += 1;
    }
    let expected: Vec<f64> = (0..=n as u64).map(|k| binomial_pmf(n as u64, 0.5, k)).collect();
    let gof = chi_square_gof(&hist, &expected)?;
    stats.push(StatRow {
        n,
        t: Some(half),
        name: "midpoint_count_chi_square".into(),
        value: gof.statistic,
        std_error: None,
    });
    checks.push(Check::p_above(
        "midpoint-count-vs-binomial",
        "os-marginal-binomial",
        gof.p_value,
        config.rejection_level,
    ));

    // Arrival-epoch equivalence between the two samplers.
    let os_epochs: Vec<Vec<f64>> = par_map(pool, config.seed, 2, config.replications, |_, rng| {
        Ok(sample_conditioned_poisson_os(&os_model, n, horizon, rng)?.epochs().to_vec())
    })?;
    let rej_epochs: Vec<Vec<f64>> = par_map(pool, config.seed, 3, config.replications, |_, rng| {
        Ok(draw_row(&config.model, n, horizon, rng, config.max_attempts)?.arrival_epochs())
    })?;

    let coords = [1usize, n.div_ceil(2), n];
    for &k in &coords {
        let a: Vec<f64> = os_epochs.iter().map(|e| e[k - 1]).collect();
        let b: Vec<f64> = rej_epochs.iter().map(|e| e[k - 1]).collect();
        let ks = ks_two_sample(&a, &b)?;
        stats.push(StatRow {
            n,
            t: None,
            name: format!("epoch_{k}_ks_statistic"),
            value: ks.statistic,
            std_error: None,
        });
        checks.push(Check::p_above(
            &format!("epoch-{k}-two-sample-ks"),
            "sampler-oracle-equivalence",
            ks.p_value,
            config.rejection_level,
        ));
    }
    Ok(())
}

/// Quadrature conditional mean against its exponential closed form, the
/// Monte Carlo mean of the first coordinate, and monotonicity of n·μ_n.
fn run_mu_n_lemma(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    stats: &mut Vec<StatRow>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let horizon = config.horizon_t();
    let mut n_mu: Vec<f64> = Vec::new();
    for &n in &config.n_list {
        let mu = conditional_mean_mu_n(&config.model, n, horizon)?;
        stats.push(StatRow { n, t: None, name: "mu_n".into(), value: mu, std_error: None });
        if let InterarrivalModel::Exponential { .. } = config.model {
            let target = config.horizon / (n as f64 + 1.0);
            checks.push(Check::within(
                &format!("mu-{n}-closed-form"),
                "conditional-mean-closed-form",
                mu,
                target,
                1e-8,
            ));
        }
        if n > 0 {
            n_mu.push(n as f64 * mu);
        }
    }
    if n_mu.len() >= 2 {
        let increments: Vec<f64> = n_mu.iter().rev().copied().collect();
        checks.push(Check::strictly_decreasing(
            "n-mu-n-increasing-toward-horizon",
            "conditional-mean-closed-form",
            &increments,
        ));
        checks.push(Check::below(
            "n-mu-n-bounded-by-horizon",
            "conditional-mean-closed-form",
            n_mu.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)),
            config.horizon,
        ));
    }

    // Monte Carlo mean of ξ₁ at the smallest positive n in the list.
    if let Some(&n_mc) = config.n_list.iter().find(|&&n| n > 0) {
        let model = rate_matched(&config.model, n_mc, config.horizon);
        let mu = conditional_mean_mu_n(&config.model, n_mc, horizon)?;
        let first: Vec<f64> = par_map(pool, config.seed, 4, config.replications, |_, rng| {
            Ok(draw_row(&model, n_mc, horizon, rng, config.max_attempts)?.xi()[0])
        })?;
        let s = summarize(&first);
        stats.push(StatRow {
            n: n_mc,
            t: None,
            name: "mean_xi_1".into(),
            value: s.mean,
            std_error: Some(s.mean_se),
        });
        checks.push(Check::within(
            &format!("mc-mean-xi1-n{n_mc}"),
            "conditional-mean-monte-carlo",
            s.mean,
            mu,
            3.0 * s.mean_se,
        ));
    }
    Ok(())
}

/// Fluid limit: the 95th percentile of `sup |Ā_n − identity|` must fall
/// monotonically in n and end below the configured bound.
fn run_fslln(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    stats: &mut Vec<StatRow>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let horizon = config.horizon_t();
    let t = config.horizon;
    let mut percentiles = Vec::new();
    for (idx, &n) in config.n_list.iter().enumerate() {
        let model = rate_matched(&config.model, n, t);
        let sups: Vec<f64> =
            par_map(pool, config.seed, 10 + idx as u64, config.replications, |_, rng| {
                let row = draw_row(&model, n, horizon, rng, config.max_attempts)?;
                let a = counting_path(&row);
                let scaled: Vec<f64> =
                    a.post_jump_values().iter().map(|v| v / n as f64).collect();
                let path = StepPath::new(0.0, t, a.jump_epochs().to_vec(), scaled)
                    .expect("valid scaled path");
                Ok(path.sup_abs_linear_gap(1.0 / t))
            })?;
        let p95 = percentile(&sups, 0.95);
        stats.push(StatRow {
            n,
            t: None,
            name: "sup_gap_p95".into(),
            value: p95,
            std_error: None,
        });
        percentiles.push(p95);
    }
    if percentiles.len() >= 2 {
        checks.push(Check::strictly_decreasing(
            "sup-gap-p95-decreasing",
            "fslln-sup-gap",
            &percentiles,
        ));
    }
    checks.push(Check::below(
        "sup-gap-p95-final",
        "fslln-sup-gap",
        *percentiles.last().unwrap(),
        config.sup_gap_max,
    ));
    Ok(())
}

/// Diffusion-scaled counting fluctuation against its bridge marginals.
fn run_fclt_counting(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    stats: &mut Vec<StatRow>,
    checks: &mut Vec<Check>,
    retained: &mut Vec<RetainedPath>,
) -> Result<()> {
    const T_POINTS: [f64; 3] = [0.25, 0.5, 0.75];
    let n = config.n_list[0];
    let horizon = config.horizon_t();
    let model = rate_matched(&config.model, n, config.horizon);
    let sqrt_n = (n as f64).sqrt();

    struct Rep {
        marginals: [f64; 3],
        endpoint: f64,
        path: Option<GridPath>,
    }

    let reps: Vec<Rep> = par_map(pool, config.seed, 20, config.replications, |r, rng| {
        let row = draw_row(&model, n, horizon, rng, config.max_attempts)?;
        let a = counting_path(&row);
        let mut marginals = [0.0; 3];
        for (k, &u) in T_POINTS.iter().enumerate() {
            let clock = u * config.horizon;
            marginals[k] = sqrt_n * (a.eval(clock).expect("in domain") / n as f64 - u);
        }
        let grid = diffusion_scaled_counting(&row, config.grid_size);
        let endpoint = *grid.values().last().unwrap();
        let path = (r < config.paths_retained).then_some(grid);
        Ok(Rep { marginals, endpoint, path })
    })?;

    for rep in &reps {
        if let Some(path) = &rep.path {
            retained.push(RetainedPath { replication: retained.len(), path: path.clone() });
        }
    }

    let endpoint_violations = reps.iter().filter(|r| r.endpoint != 0.0).count();
    checks.push(Check::at_most(
        "endpoint-exactly-zero",
        "fclt-counting-tied-down",
        endpoint_violations as f64,
        0.0,
    ));

    for (k, &u) in T_POINTS.iter().enumerate() {
        let values: Vec<f64> = reps.iter().map(|r| r.marginals[k]).collect();
        let s = summarize(&values);
        let target_var = u * (1.0 - u);
        stats.push(StatRow {
            n,
            t: Some(u),
            name: "scaled_counting_mean".into(),
            value: s.mean,
            std_error: Some(s.mean_se),
        });
        stats.push(StatRow {
            n,
            t: Some(u),
            name: "scaled_counting_var".into(),
            value: s.var,
            std_error: Some(s.var_se),
        });
        checks.push(Check::within(
            &format!("mean-zero-t{u}"),
            "fclt-counting-bridge-marginal",
            s.mean,
            0.0,
            3.0 * s.mean_se,
        ));
        checks.push(Check::within(
            &format!("variance-t{u}"),
            "fclt-counting-bridge-marginal",
            s.var,
            target_var,
            0.05 * target_var + 3.0 * s.var_se,
        ));
        let sd = target_var.sqrt();
        let ks = ks_one_sample(&values, |x| standard_normal_cdf(x / sd))?;
        stats.push(StatRow {
            n,
            t: Some(u),
            name: "scaled_counting_ks".into(),
            value: ks.statistic,
            std_error: None,
        });
        checks.push(Check::p_above(
            &format!("normal-marginal-t{u}"),
            "fclt-counting-bridge-marginal",
            ks.p_value,
            config.rejection_level,
        ));
    }
    Ok(())
}

/// Conditioned-Poisson fluctuation against the time-changed bridge moments.
fn run_fclt_poisson(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    stats: &mut Vec<StatRow>,
    checks: &mut Vec<Check>,
    retained: &mut Vec<RetainedPath>,
) -> Result<()> {
    const T_POINTS: [f64; 2] = [0.5, 0.8];
    let n = config.n_list[0];
    let horizon = config.horizon_t();
    let model = match &config.model {
        InterarrivalModel::PoissonRateFn(_) => config.model.clone(),
        _ => {
            return Err(SimError::Config(
                "fclt_poisson needs the Poisson rate-function family".into(),
            ))
        }
    };
    let sqrt_n = (n as f64).sqrt();
    let f: Vec<f64> = T_POINTS
        .iter()
        .map(|&t| model.conditioned_cdf(t, horizon))
        .collect::<Result<_>>()?;

    let rows: Vec<([f64; 2], Option<GridPath>)> =
        par_map(pool, config.seed, 30, config.replications, |r, rng| {
            let sample = sample_conditioned_poisson_os(&model, n, horizon, rng)?;
            let mut marg = [0.0; 2];
            for (k, &t) in T_POINTS.iter().enumerate() {
                marg[k] = (sample.count_through(t) as f64 - n as f64 * f[k]) / sqrt_n;
            }
            let path = (r < config.paths_retained)
                .then(|| {
                    crate::scaling::diffusion_scaled_conditioned_poisson(
                        &sample,
                        &model,
                        config.grid_size,
                    )
                })
                .transpose()?;
            Ok((marg, path))
        })?;

    for (_, path) in rows.iter() {
        if let Some(p) = path {
            retained.push(RetainedPath { replication: retained.len(), path: p.clone() });
        }
    }

    let mut columns: [Vec<f64>; 2] =
        [Vec::with_capacity(rows.len()), Vec::with_capacity(rows.len())];
    for (marg, _) in &rows {
        columns[0].push(marg[0]);
        columns[1].push(marg[1]);
    }
    for (k, &t) in T_POINTS.iter().enumerate() {
        let s = summarize(&columns[k]);
        let target_var = f[k] * (1.0 - f[k]);
        stats.push(StatRow {
            n,
            t: Some(t),
            name: "scaled_poisson_mean".into(),
            value: s.mean,
            std_error: Some(s.mean_se),
        });
        stats.push(StatRow {
            n,
            t: Some(t),
            name: "scaled_poisson_var".into(),
            value: s.var,
            std_error: Some(s.var_se),
        });
        checks.push(Check::within(
            &format!("mean-zero-t{t}"),
            "fclt-poisson-bridge-marginal",
            s.mean,
            0.0,
            3.0 * s.mean_se,
        ));
        checks.push(Check::within(
            &format!("variance-t{t}"),
            "fclt-poisson-bridge-marginal",
            s.var,
            target_var,
            0.05 * target_var + 3.0 * s.var_se,
        ));
    }

    // Cross-covariance against F(s)(1 − F(t)).
    let n_rows = rows.len() as f64;
    let (m0, m1) = (summarize(&columns[0]).mean, summarize(&columns[1]).mean);
    let mut cov = 0.0;
    for (marg, _) in &rows {
        cov += (marg[0] - m0) * (marg[1] - m1);
    }
    cov /= n_rows - 1.0;
    let mut var_prod = 0.0;
    for (marg, _) in &rows {
        let p = (marg[0] - m0) * (marg[1] - m1) - cov;
        var_prod += p * p;
    }
    let cov_se = (var_prod / (n_rows - 1.0) / n_rows).sqrt();
    let target_cov = f[0] * (1.0 - f[1]);
    stats.push(StatRow {
        n,
        t: Some(T_POINTS[1]),
        name: "scaled_poisson_cov_0.5_0.8".into(),
        value: cov,
        std_error: Some(cov_se),
    });
    checks.push(Check::within(
        "covariance-0.5-0.8",
        "fclt-poisson-bridge-covariance",
        cov,
        target_cov,
        3.0 * cov_se,
    ));
    Ok(())
}

/// Diagnostics of the centered scaled array: Σφ² concentrates at 1 while
/// |Σφ| and max|φ| collapse as n grows.
fn run_phi_diagnostics(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    stats: &mut Vec<StatRow>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let horizon = config.horizon_t();
    let mut sum_p95 = Vec::new();
    let mut max_p95 = Vec::new();
    for (idx, &n) in config.n_list.iter().enumerate() {
        // Large rows: cap the ensemble so the rejection cost stays desk-scale.
        let rows = if n >= 10_000 { config.replications.min(500) } else { config.replications };
        let model = rate_matched(&config.model, n, config.horizon);
        let mu = conditional_mean_mu_n(&config.model, n, horizon)?;
        let diags: Vec<(f64, f64, f64)> =
            par_map(pool, config.seed, 40 + idx as u64, rows, |_, rng| {
                let row = draw_row(&model, n, horizon, rng, config.max_attempts)?;
                let d = phi_array(&row, mu, PhiScaling::SqrtN);
                Ok((d.sum, d.sum_sq, d.max_abs))
            })?;
        let sums: Vec<f64> = diags.iter().map(|d| d.0.abs()).collect();
        let sum_sqs: Vec<f64> = diags.iter().map(|d| d.1).collect();
        let maxes: Vec<f64> = diags.iter().map(|d| d.2).collect();
        let s = summarize(&sum_sqs);
        stats.push(StatRow {
            n,
            t: None,
            name: "mean_sum_phi_sq".into(),
            value: s.mean,
            std_error: Some(s.mean_se),
        });
        let p_sum = percentile(&sums, 0.95);
        let p_max = percentile(&maxes, 0.95);
        stats.push(StatRow { n, t: None, name: "abs_sum_phi_p95".into(), value: p_sum, std_error: None });
        stats.push(StatRow { n, t: None, name: "max_abs_phi_p95".into(), value: p_max, std_error: None });
        sum_p95.push(p_sum);
        max_p95.push(p_max);

        if n == 1000 {
            checks.push(Check::above(
                "sum-phi-sq-above-0.9",
                "phi-normalization",
                s.mean,
                0.9,
            ));
            checks.push(Check::below(
                "sum-phi-sq-below-1.1",
                "phi-normalization",
                s.mean,
                1.1,
            ));
        }
    }
    if sum_p95.len() >= 2 {
        checks.push(Check::strictly_decreasing(
            "abs-sum-phi-p95-decreasing",
            "phi-normalization",
            &sum_p95,
        ));
        checks.push(Check::strictly_decreasing(
            "max-abs-phi-p95-decreasing",
            "phi-normalization",
            &max_p95,
        ));
    }
    Ok(())
}

/// Conditioned workload against the reflected motion-minus-bridge limit.
fn run_workload_bb(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    stats: &mut Vec<StatRow>,
    checks: &mut Vec<Check>,
    retained: &mut Vec<RetainedPath>,
) -> Result<()> {
    let n = config.n_list[0];
    let horizon = config.horizon_t();
    let model = rate_matched(&config.model, n, config.horizon);
    let sqrt_n = (n as f64).sqrt();
    let sigma_sq = config.service.variance();

    struct Rep {
        netput_half: f64,
        netput_one: f64,
        workload_one: f64,
        path: Option<GridPath>,
    }

    let reps: Vec<Rep> = par_map(pool, config.seed, 50, config.replications, |r, rng| {
        let row = draw_row(&model, n, horizon, rng, config.max_attempts)?;
        let services = config.service.sample_vec(n, rng);
        let gamma = netput_gamma_n(&row, &services)?;
        let phi = gamma.reflect();
        let path = (r < config.paths_retained)
            .then(|| {
                GridPath::sample_step(&phi, config.grid_size).map(|g| {
                    GridPath::new(1.0, g.values().iter().map(|v| sqrt_n * v).collect())
                        .expect("same shape")
                })
            })
            .transpose()?;
        Ok(Rep {
            netput_half: sqrt_n * gamma.eval(0.5).expect("in domain"),
            netput_one: sqrt_n * gamma.eval(1.0).expect("in domain"),
            workload_one: sqrt_n * phi.eval(1.0).expect("in domain"),
            path,
        })
    })?;

    for rep in &reps {
        if let Some(path) = &rep.path {
            retained.push(RetainedPath { replication: retained.len(), path: path.clone() });
        }
    }

    // Comparator: reflected (motion − bridge) observed at n points, matching
    // the jump resolution of the simulated netput.
    let spec = GaussianPathSpec::new(
        GaussianKind::BmMinusBridge { sigma: sigma_sq.sqrt() },
        n,
    )?;
    let limit_endpoint: Vec<f64> = par_map(pool, config.seed, 51, config.replications, |_, rng| {
        let path = sample_gaussian_path(&spec, rng)?;
        Ok(*path.reflect().values().last().unwrap())
    })?;

    let workload_one: Vec<f64> = reps.iter().map(|r| r.workload_one).collect();
    let ks = ks_two_sample(&workload_one, &limit_endpoint)?;
    stats.push(StatRow {
        n,
        t: Some(1.0),
        name: "workload_endpoint_ks_distance".into(),
        value: ks.statistic,
        std_error: None,
    });
    checks.push(Check::below(
        "workload-endpoint-vs-limit",
        "workload-bridge-diffusion",
        ks.statistic,
        config.ks_distance_max,
    ));

    for (name, values, t, target) in [
        (
            "netput_var",
            reps.iter().map(|r| r.netput_half).collect::<Vec<_>>(),
            0.5,
            sigma_sq * 0.5 + 0.25,
        ),
        (
            "netput_var",
            reps.iter().map(|r| r.netput_one).collect::<Vec<_>>(),
            1.0,
            sigma_sq,
        ),
    ] {
        let s = summarize(&values);
        stats.push(StatRow {
            n,
            t: Some(t),
            name: name.into(),
            value: s.var,
            std_error: Some(s.var_se),
        });
        checks.push(Check::within(
            &format!("netput-variance-t{t}"),
            "workload-bridge-diffusion",
            s.var,
            target,
            0.10 * target + 3.0 * s.var_se,
        ));
    }
    Ok(())
}

/// Heavy-traffic comparator: reflected-motion limit, the drift constant, and
/// the depleting-points variance gap against the conditioned model.
fn run_ht_compare(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    stats: &mut Vec<StatRow>,
    checks: &mut Vec<Check>,
    retained: &mut Vec<RetainedPath>,
) -> Result<()> {
    let n = config.n_list[0];
    let horizon = config.horizon_t();
    let sqrt_n = (n as f64).sqrt();
    let spec = HeavyTrafficSpec::new(config.theta, n, config.model.clone(), config.service)?;

    // Drift constant n^{3/2}(1/μ_n − 1/λ_n) → θ, checked at n = 10⁴.
    for &theta in &[0.5, -0.5] {
        let drift_spec =
            HeavyTrafficSpec::new(theta, 10_000, config.model.clone(), config.service)?;
        let drift = drift_spec.scaled_drift();
        stats.push(StatRow {
            n: 10_000,
            t: None,
            name: format!("scaled_drift_theta_{theta}"),
            value: drift,
            std_error: None,
        });
        checks.push(Check::within(
            &format!("scaled-drift-theta-{theta}"),
            "heavy-traffic-drift",
            drift,
            theta,
            0.01 * theta.abs(),
        ));
    }

    // Heavy-traffic workload endpoint and netput endpoint variance.
    struct Rep {
        workload_one: f64,
        netput_one: f64,
        path: Option<GridPath>,
    }
    let reps: Vec<Rep> = par_map(pool, config.seed, 60, config.replications, |r, rng| {
        let gamma = ht_netput(&spec, rng);
        let phi = gamma.reflect();
        let path = (r < config.paths_retained)
            .then(|| {
                GridPath::sample_step(&phi, config.grid_size).map(|g| {
                    GridPath::new(1.0, g.values().iter().map(|v| sqrt_n * v).collect())
                        .expect("same shape")
                })
            })
            .transpose()?;
        Ok(Rep {
            workload_one: sqrt_n * phi.eval(1.0).expect("in domain"),
            netput_one: sqrt_n * gamma.eval(1.0).expect("in domain"),
            path,
        })
    })?;
    for rep in &reps {
        if let Some(path) = &rep.path {
            retained.push(RetainedPath { replication: retained.len(), path: path.clone() });
        }
    }

    // Comparator: Φ(θe + W − W′)(1) with the diffusion coefficients of the
    // two families.
    let sigma_sq =
        spec.service.variance() * spec.service_mean() * spec.service_mean() + spec.arrival.variance();
    let gauss = GaussianPathSpec::new(
        GaussianKind::BrownianMotion { sigma: sigma_sq.sqrt() },
        n,
    )?;
    let theta = config.theta;
    let limit_endpoint: Vec<f64> = par_map(pool, config.seed, 61, config.replications, |_, rng| {
        let w = sample_gaussian_path(&gauss, rng)?;
        let drifted: Vec<f64> = w
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| v + theta * w.epoch(i))
            .collect();
        let path = GridPath::new(1.0, drifted)?;
        Ok(*path.reflect().values().last().unwrap())
    })?;

    let workload_one: Vec<f64> = reps.iter().map(|r| r.workload_one).collect();
    let ks = ks_two_sample(&workload_one, &limit_endpoint)?;
    stats.push(StatRow {
        n,
        t: Some(1.0),
        name: "ht_workload_endpoint_ks_distance".into(),
        value: ks.statistic,
        std_error: None,
    });
    checks.push(Check::below(
        "ht-workload-endpoint-vs-limit",
        "heavy-traffic-comparator",
        ks.statistic,
        config.ks_distance_max,
    ));

    let ht_netput_one: Vec<f64> = reps.iter().map(|r| r.netput_one).collect();
    let ht_summary = summarize(&ht_netput_one);
    stats.push(StatRow {
        n,
        t: Some(1.0),
        name: "ht_netput_var".into(),
        value: ht_summary.var,
        std_error: Some(ht_summary.var_se),
    });
    checks.push(Check::within(
        "ht-netput-endpoint-variance",
        "heavy-traffic-comparator",
        ht_summary.var,
        sigma_sq,
        0.10 * sigma_sq + 3.0 * ht_summary.var_se,
    ));

    // Depleting-points effect: the conditioned model loses the interarrival
    // variability at the end of the horizon.
    let cond_model = rate_matched(
        &InterarrivalModel::exponential(1.0).expect("valid"),
        n,
        config.horizon,
    );
    let cond_netput_one: Vec<f64> =
        par_map(pool, config.seed, 62, config.replications, |_, rng| {
            let row = draw_row(&cond_model, n, horizon, rng, config.max_attempts)?;
            let services = config.service.sample_vec(n, rng);
            let gamma = netput_gamma_n(&row, &services)?;
            Ok(sqrt_n * gamma.eval(1.0).expect("in domain"))
        })?;
    let cond_summary = summarize(&cond_netput_one);
    stats.push(StatRow {
        n,
        t: Some(1.0),
        name: "conditioned_netput_var".into(),
        value: cond_summary.var,
        std_error: Some(cond_summary.var_se),
    });
    checks.push(Check::within(
        "conditioned-netput-endpoint-variance",
        "depleting-points-variance",
        cond_summary.var,
        config.service.variance(),
        0.10 * config.service.variance() + 3.0 * cond_summary.var_se,
    ));
    checks.push(Check::below(
        "conditioned-variance-below-ht-variance",
        "depleting-points-variance",
        cond_summary.var,
        ht_summary.var,
    ));
    Ok(())
}

/// The exact index-unit bound `0 ≤ S_n⁻¹(t) − Ā_n(t) ≤ 1/n` on a dense grid
/// plus every jump epoch.
fn run_inverse_bound(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    stats: &mut Vec<StatRow>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let horizon = config.horizon_t();
    for (idx, &n) in config.n_list.iter().enumerate() {
        let model = rate_matched(&config.model, n, config.horizon);
        let violations: Vec<u64> =
            par_map(pool, config.seed, 70 + idx as u64, config.replications, |_, rng| {
                let row = draw_row(&model, n, horizon, rng, config.max_attempts)?;
                let a = counting_path(&row);
                let inv = crate::scaling::inverse_path(&row);
                let mut bad = 0u64;
                let mut probe: Vec<f64> =
                    (0..=1000).map(|i| i as f64 / 1000.0 * config.horizon).collect();
                probe.extend_from_slice(a.jump_epochs());
                for &t in &probe {
                    // Compare in index units: the bound is 0 ≤ gap ≤ 1 there,
                    // which floating point cannot blur.
                    let count = a.eval(t).expect("in domain") as i64;
                    let inv_idx = (inv.eval(t).expect("in domain") * n as f64).round() as i64;
                    let gap = inv_idx - count;
                    if !(0..=1).contains(&gap) {
                        bad += 1;
                    }
                }
                Ok(bad)
            })?;
        let total: u64 = violations.iter().sum();
        stats.push(StatRow {
            n,
            t: None,
            name: "inverse_bound_violations".into(),
            value: total as f64,
            std_error: None,
        });
        checks.push(Check::at_most(
            &format!("inverse-bound-n{n}"),
            "inverse-bound-exact",
            total as f64,
            0.0,
        ));
    }
    Ok(())
}

/// Marginal equality of extreme coordinates, plus a deliberately broken
/// (sorted) ensemble as a negative control.
fn run_exchangeability(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    stats: &mut Vec<StatRow>,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let n = config.n_list[0];
    if n < 2 {
        return Err(SimError::Config("exchangeability needs n >= 2".into()));
    }
    let horizon = config.horizon_t();
    let model = rate_matched(&config.model, n, config.horizon);
    let rows: Vec<ConditionedRow> = par_map(pool, config.seed, 80, config.replications, |_, rng| {
        draw_row(&model, n, horizon, rng, config.max_attempts)
    })?;

    for (i, j) in [(1usize, n), (1usize, n.div_ceil(2))] {
        let res = crate::samplers::exchangeability_diagnostic(&rows, i, j)?;
        stats.push(StatRow {
            n,
            t: None,
            name: format!("ks_coords_{i}_{j}"),
            value: res.statistic,
            std_error: None,
        });
        checks.push(Check::p_above(
            &format!("coords-{i}-{j}-identical-marginals"),
            "exchangeable-coordinates",
            res.p_value,
            config.rejection_level,
        ));
    }

    // Negative control: order statistics are decidedly not exchangeable.
    let sorted_rows: Vec<ConditionedRow> = rows
        .iter()
        .map(|row| {
            let mut xi = row.xi().to_vec();
            xi[..n].sort_by(|a, b| a.partial_cmp(b).unwrap());
            ConditionedRow::new(n, horizon, xi).expect("sorting preserves the row invariants")
        })
        .collect();
    let control = crate::samplers::exchangeability_diagnostic(&sorted_rows, 1, n)?;
    stats.push(StatRow {
        n,
        t: None,
        name: "negative_control_ks".into(),
        value: control.statistic,
        std_error: None,
    });
    checks.push(Check::below(
        "sorted-control-rejected",
        "exchangeable-coordinates",
        control.p_value,
        config.rejection_level,
    ));
    Ok(())
}
