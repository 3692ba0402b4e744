//! Parsing and resolution of the command line and the flat config file.
//!
//! Precedence is defaults < config file < flags. Unknown flags and unknown
//! config keys are rejected rather than ignored.

use std::collections::BTreeMap;
use std::path::PathBuf;

use transitory_sim_core::{ExperimentId, InterarrivalModel, PiecewiseConstantRate, ServiceModel};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Operational(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Operational(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Sample,
    Mu,
    SimulateWorkload,
    Verify,
    CompareHt,
    Report,
}

impl Subcommand {
    fn parse(word: &str) -> Option<Self> {
        match word {
            "sample" => Some(Self::Sample),
            "mu" => Some(Self::Mu),
            "simulate-workload" => Some(Self::SimulateWorkload),
            "verify" => Some(Self::Verify),
            "compare-ht" => Some(Self::CompareHt),
            "report" => Some(Self::Report),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sample => "sample",
            Self::Mu => "mu",
            Self::SimulateWorkload => "simulate-workload",
            Self::Verify => "verify",
            Self::CompareHt => "compare-ht",
            Self::Report => "report",
        }
    }

    /// Does this subcommand draw random numbers (and therefore need a seed)?
    pub fn is_stochastic(&self) -> bool {
        !matches!(self, Self::Mu | Self::Report)
    }
}

/// The sampling route for `sample`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    OrderedStatistics,
    Rejection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Model parameters as written; the horizon-dependent families are built
/// once the horizon is known.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Exponential(f64),
    Uniform(f64),
    Gamma(f64, f64),
    PoissonHomogeneous { rate: f64, end: Option<f64> },
    PoissonRamp { slope: f64, segments: usize, end: Option<f64> },
}

impl ModelSpec {
    pub fn build(&self, horizon: f64) -> Result<InterarrivalModel, CliError> {
        let err = |e: transitory_sim_core::SimError| usage(e.to_string());
        match *self {
            ModelSpec::Exponential(rate) => InterarrivalModel::exponential(rate).map_err(err),
            ModelSpec::Uniform(upper) => InterarrivalModel::uniform(upper).map_err(err),
            ModelSpec::Gamma(shape, scale) => InterarrivalModel::gamma(shape, scale).map_err(err),
            ModelSpec::PoissonHomogeneous { rate, end } => {
                let end = end.unwrap_or(horizon);
                PiecewiseConstantRate::homogeneous(rate, end)
                    .map(InterarrivalModel::poisson_rate_fn)
                    .map_err(err)
            }
            ModelSpec::PoissonRamp { slope, segments, end } => {
                let end = end.unwrap_or(horizon);
                PiecewiseConstantRate::from_rate_fn(|t| slope * t, segments, end)
                    .map(InterarrivalModel::poisson_rate_fn)
                    .map_err(err)
            }
        }
    }
}

/// Fully resolved options after merging defaults, config file, and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub force: bool,
    pub format: OutputFormat,
    pub model: Option<ModelSpec>,
    pub horizon: f64,
    pub n_list: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub grid: Option<usize>,
    pub service: Option<ServiceModel>,
    pub theta: Option<f64>,
    pub max_attempts: Option<u64>,
    pub level: Option<f64>,
    pub ks_max: Option<f64>,
    pub paths_retained: Option<usize>,
    pub experiment: Option<ExperimentId>,
    pub sampler: SamplerKind,
    pub input: Option<PathBuf>,
    pub config_path: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: None,
            out_dir: PathBuf::from("out"),
            force: false,
            format: OutputFormat::Json,
            model: None,
            horizon: 1.0,
            n_list: None,
            reps: None,
            grid: None,
            service: None,
            theta: None,
            max_attempts: None,
            level: None,
            ks_max: None,
            paths_retained: None,
            experiment: None,
            sampler: SamplerKind::Rejection,
            input: None,
            config_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliInvocation {
    pub subcommand: Subcommand,
    pub options: Options,
}

// ============================================================================
// Raw key/value collection
// ============================================================================

/// Keys shared by flags and config files. Model and service parameters use
/// dotted keys in files and compact specs on the command line; both funnel
/// into the same slots here.
#[derive(Debug, Default, Clone)]
struct RawOptions {
    scalar: BTreeMap<&'static str, String>,
    model_parts: BTreeMap<&'static str, String>,
    service_parts: BTreeMap<&'static str, String>,
    force: bool,
}

const SCALAR_KEYS: &[&str] = &[
    "seed",
    "out",
    "format",
    "horizon",
    "n",
    "reps",
    "grid",
    "theta",
    "max_attempts",
    "level",
    "ks_max",
    "paths_retained",
    "experiment",
    "sampler",
    "input",
];
const MODEL_KEYS: &[&str] = &["family", "rate", "upper", "shape", "scale", "slope", "segments", "end"];
const SERVICE_KEYS: &[&str] = &["family", "variance"];

impl RawOptions {
    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if key == "force" {
            self.force = match value {
                "true" | "1" => true,
                "false" | "0" => false,
                _ => return Err(usage(format!("force must be true or false, got {value}"))),
            };
            return Ok(());
        }
        if let Some(rest) = key.strip_prefix("model.") {
            let slot = MODEL_KEYS
                .iter()
                .find(|&&k| k == rest)
                .ok_or_else(|| usage(format!("unknown config key model.{rest}")))?;
            self.model_parts.insert(slot, value.to_string());
            return Ok(());
        }
        if let Some(rest) = key.strip_prefix("service.") {
            let slot = SERVICE_KEYS
                .iter()
                .find(|&&k| k == rest)
                .ok_or_else(|| usage(format!("unknown config key service.{rest}")))?;
            self.service_parts.insert(slot, value.to_string());
            return Ok(());
        }
        let slot = SCALAR_KEYS
            .iter()
            .find(|&&k| k == key)
            .ok_or_else(|| usage(format!("unknown config key {key}")))?;
        self.scalar.insert(slot, value.to_string());
        Ok(())
    }
}

// ============================================================================
// Parsing
// ============================================================================

/// Parse the argument vector (without the program name) into a fully
/// resolved invocation. Reads `--config` if present; flags override file
/// values; unknown flags and keys are rejected.
pub fn parse_invocation(args: &[String]) -> Result<CliInvocation, CliError> {
    let Some(first) = args.first() else {
        return Err(usage("missing subcommand"));
    };
    if first == "--help" || first == "-h" || first == "help" {
        return Err(usage("help requested"));
    }
    let subcommand = Subcommand::parse(first)
        .ok_or_else(|| usage(format!("unknown subcommand '{first}'")))?;

    // First pass over flags: collect key/value pairs and find --config.
    let mut flag_pairs: Vec<(String, String)> = Vec::new();
    let mut config_path: Option<PathBuf> = None;
    let mut i = 1;
    while i < args.len() {
        let arg = &args[i];
        let Some(stripped) = arg.strip_prefix("--") else {
            return Err(usage(format!("unexpected argument '{arg}'")));
        };
        let (name, inline_value) = match stripped.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (stripped.to_string(), None),
        };
        let key = flag_to_key(&name)?;
        let value = if key == "force" && inline_value.is_none() {
            "true".to_string()
        } else if let Some(v) = inline_value {
            v
        } else {
            i += 1;
            args.get(i)
                .cloned()
                .ok_or_else(|| usage(format!("flag --{name} needs a value")))?
        };
        if key == "config" {
            config_path = Some(PathBuf::from(value));
        } else {
            flag_pairs.push((key.to_string(), value));
        }
        i += 1;
    }

    let mut raw = RawOptions::default();

    // Config file first, flags second, so flags win.
    if let Some(path) = &config_path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {} is not key=value", lineno + 1)))?;
            raw.set(key.trim(), value.trim())?;
        }
    }
    for (key, value) in &flag_pairs {
        if key == "model" {
            apply_model_string(&mut raw, value)?;
        } else if key == "service" {
            apply_service_string(&mut raw, value)?;
        } else if key == "out_dir" {
            raw.set("out", value)?;
        } else {
            raw.set(key, value)?;
        }
    }

    let mut options = resolve(raw)?;
    options.config_path = config_path;

    if subcommand.is_stochastic() && options.seed.is_none() {
        return Err(usage(format!(
            "--seed is required for the stochastic subcommand '{}'",
            subcommand.name()
        )));
    }
    Ok(CliInvocation { subcommand, options })
}

/// Map a flag name to its canonical config key.
fn flag_to_key(flag: &str) -> Result<&'static str, CliError> {
    Ok(match flag {
        "config" => "config",
        "seed" => "seed",
        "out" => "out_dir",
        "force" => "force",
        "format" => "format",
        "model" => "model",
        "T" | "horizon" => "horizon",
        "n" => "n",
        "reps" => "reps",
        "grid" => "grid",
        "service" => "service",
        "theta" => "theta",
        "max-attempts" => "max_attempts",
        "level" => "level",
        "ks-max" => "ks_max",
        "paths-retained" => "paths_retained",
        "experiment" => "experiment",
        "sampler" => "sampler",
        "input" => "input",
        other => return Err(usage(format!("unknown flag --{other}"))),
    })
}

fn apply_model_string(raw: &mut RawOptions, spec: &str) -> Result<(), CliError> {
    let (family, params) = spec.split_once(':').unwrap_or((spec, ""));
    let parts: Vec<&str> = if params.is_empty() { vec![] } else { params.split(',').collect() };
    let expect = |n: usize, lo: usize| -> Result<(), CliError> {
        if parts.len() < lo || parts.len() > n {
            return Err(usage(format!("model spec '{spec}' has the wrong number of parameters")));
        }
        Ok(())
    };
    match family {
        "exp" | "exponential" => {
            expect(1, 1)?;
            raw.model_parts.insert("family", "exponential".into());
            raw.model_parts.insert("rate", parts[0].into());
        }
        "uniform" => {
            expect(1, 1)?;
            raw.model_parts.insert("family", "uniform".into());
            raw.model_parts.insert("upper", parts[0].into());
        }
        "gamma" => {
            expect(2, 2)?;
            raw.model_parts.insert("family", "gamma".into());
            raw.model_parts.insert("shape", parts[0].into());
            raw.model_parts.insert("scale", parts[1].into());
        }
        "poisson" => {
            expect(2, 1)?;
            raw.model_parts.insert("family", "poisson".into());
            raw.model_parts.insert("rate", parts[0].into());
            if let Some(end) = parts.get(1) {
                raw.model_parts.insert("end", (*end).into());
            }
        }
        "poisson-ramp" => {
            expect(3, 1)?;
            raw.model_parts.insert("family", "poisson-ramp".into());
            raw.model_parts.insert("slope", parts[0].into());
            if let Some(segments) = parts.get(1) {
                raw.model_parts.insert("segments", (*segments).into());
            }
            if let Some(end) = parts.get(2) {
                raw.model_parts.insert("end", (*end).into());
            }
        }
        other => return Err(usage(format!("unknown model family '{other}'"))),
    }
    Ok(())
}

fn apply_service_string(raw: &mut RawOptions, spec: &str) -> Result<(), CliError> {
    let (family, params) = spec.split_once(':').unwrap_or((spec, ""));
    match family {
        "exp" | "exponential" => {
            raw.service_parts.insert("family", "exponential".into());
        }
        "det" | "deterministic" => {
            raw.service_parts.insert("family", "deterministic".into());
        }
        "lognormal" => {
            if params.is_empty() {
                return Err(usage("lognormal service needs a variance, e.g. lognormal:0.5"));
            }
            raw.service_parts.insert("family", "lognormal".into());
            raw.service_parts.insert("variance", params.into());
        }
        other => return Err(usage(format!("unknown service family '{other}'"))),
    }
    Ok(())
}

// ============================================================================
// Resolution
// ============================================================================

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| usage(format!("{key}={value} is not a valid value")))
}

fn resolve(raw: RawOptions) -> Result<Options, CliError> {
    let mut options = Options { force: raw.force, ..Options::default() };

    for (key, value) in &raw.scalar {
        match *key {
            "seed" => options.seed = Some(parse_num("seed", value)?),
            "out" => options.out_dir = PathBuf::from(value),
            "format" => {
                options.format = match value.as_str() {
                    "json" => OutputFormat::Json,
                    "csv" => OutputFormat::Csv,
                    other => return Err(usage(format!("format must be json or csv, got {other}"))),
                }
            }
            "horizon" => options.horizon = parse_num("horizon", value)?,
            "n" => {
                let list: Result<Vec<usize>, _> =
                    value.split(',').map(|v| parse_num::<usize>("n", v)).collect();
                options.n_list = Some(list?);
            }
            "reps" => options.reps = Some(parse_num("reps", value)?),
            "grid" => options.grid = Some(parse_num("grid", value)?),
            "theta" => options.theta = Some(parse_num("theta", value)?),
            "max_attempts" => options.max_attempts = Some(parse_num("max_attempts", value)?),
            "level" => options.level = Some(parse_num("level", value)?),
            "ks_max" => options.ks_max = Some(parse_num("ks_max", value)?),
            "paths_retained" => options.paths_retained = Some(parse_num("paths_retained", value)?),
            "experiment" => {
                options.experiment = Some(
                    ExperimentId::parse(value)
                        .ok_or_else(|| usage(format!("unknown experiment '{value}'")))?,
                )
            }
            "sampler" => {
                options.sampler = match value.as_str() {
                    "os" | "ordered-statistics" => SamplerKind::OrderedStatistics,
                    "rejection" => SamplerKind::Rejection,
                    other => {
                        return Err(usage(format!("sampler must be os or rejection, got {other}")))
                    }
                }
            }
            "input" => options.input = Some(PathBuf::from(value)),
            _ => unreachable!("whitelisted key"),
        }
    }

    if !(options.horizon.is_finite() && options.horizon > 0.0) {
        return Err(usage(format!("horizon must be > 0, got {}", options.horizon)));
    }

    if !raw.model_parts.is_empty() {
        options.model = Some(resolve_model(&raw.model_parts)?);
    }
    if !raw.service_parts.is_empty() {
        options.service = Some(resolve_service(&raw.service_parts)?);
    }
    Ok(options)
}

fn resolve_model(parts: &BTreeMap<&'static str, String>) -> Result<ModelSpec, CliError> {
    let family = parts
        .get("family")
        .ok_or_else(|| usage("model.family is required when model keys are given"))?;
    let get = |key: &str| -> Result<f64, CliError> {
        let value = parts
            .get(key)
            .ok_or_else(|| usage(format!("model family {family} needs model.{key}")))?;
        parse_num(&format!("model.{key}"), value)
    };
    let reject_extra = |allowed: &[&str]| -> Result<(), CliError> {
        for key in parts.keys() {
            if *key != "family" && !allowed.contains(key) {
                return Err(usage(format!("model.{key} does not apply to family {family}")));
            }
        }
        Ok(())
    };
    match family.as_str() {
        "exponential" | "exp" => {
            reject_extra(&["rate"])?;
            Ok(ModelSpec::Exponential(get("rate")?))
        }
        "uniform" => {
            reject_extra(&["upper"])?;
            Ok(ModelSpec::Uniform(get("upper")?))
        }
        "gamma" => {
            reject_extra(&["shape", "scale"])?;
            Ok(ModelSpec::Gamma(get("shape")?, get("scale")?))
        }
        "poisson" => {
            reject_extra(&["rate", "end"])?;
            let end = parts.get("end").map(|v| parse_num("model.end", v)).transpose()?;
            Ok(ModelSpec::PoissonHomogeneous { rate: get("rate")?, end })
        }
        "poisson-ramp" => {
            reject_extra(&["slope", "segments", "end"])?;
            let segments = parts
                .get("segments")
                .map(|v| parse_num("model.segments", v))
                .transpose()?
                .unwrap_or(1000);
            let end = parts.get("end").map(|v| parse_num("model.end", v)).transpose()?;
            Ok(ModelSpec::PoissonRamp { slope: get("slope")?, segments, end })
        }
        other => Err(usage(format!("unknown model family '{other}'"))),
    }
}

fn resolve_service(parts: &BTreeMap<&'static str, String>) -> Result<ServiceModel, CliError> {
    let family = parts
        .get("family")
        .ok_or_else(|| usage("service.family is required when service keys are given"))?;
    match family.as_str() {
        "exponential" | "exp" => Ok(ServiceModel::Exponential),
        "deterministic" | "det" => Ok(ServiceModel::Deterministic),
        "lognormal" => {
            let variance = parts
                .get("variance")
                .ok_or_else(|| usage("lognormal service needs service.variance"))?;
            ServiceModel::log_normal(parse_num("service.variance", variance)?)
                .map_err(|e| usage(e.to_string()))
        }
        other => Err(usage(format!("unknown service family '{other}'"))),
    }
}
