//! Subcommand execution: dispatch into the core library, write deterministic
//! outputs, and map every outcome onto the exit-status contract.

use std::path::{Path, PathBuf};

use transitory_sim_core::experiments::{model_to_json, run_experiment, service_to_json};
use transitory_sim_core::report::{
    csv_float, csv_provenance_line, parse_json, sha256_hex, JsonValue,
};
use transitory_sim_core::samplers::{
    conditional_mean_mu_n, sample_conditioned_poisson_os, sample_conditioned_renewal_rejection,
};
use transitory_sim_core::reflection::netput_gamma_n;
use transitory_sim_core::{
    ExperimentConfig, ExperimentId, ExperimentReport, GridPath, InterarrivalModel, RandomStream,
    Reflect, ServiceModel, SimError, TimeHorizon,
};

use crate::invocation::{CliInvocation, CliError, OutputFormat, SamplerKind, Subcommand};
use crate::{EXIT_OPERATIONAL, EXIT_USAGE, EXIT_VERDICT_FAILURE, USAGE};

/// Parse and execute, translating every error into the exit contract.
pub fn run_main(args: &[String]) -> u8 {
    let invocation = match crate::parse_invocation(args) {
        Ok(inv) => inv,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}\n\n{USAGE}");
            return EXIT_USAGE;
        }
        Err(CliError::Operational(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_OPERATIONAL;
        }
    };
    match execute(&invocation) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Operational(msg)) => {
            eprintln!("error: {msg}");
            EXIT_OPERATIONAL
        }
    }
}

fn sim_err(e: SimError) -> CliError {
    match e {
        SimError::Config(msg) => CliError::Usage(msg),
        other => CliError::Operational(other.to_string()),
    }
}

/// Execute a resolved invocation; the returned code is the process exit
/// status (0 success, 1 failed verdicts).
pub fn execute(inv: &CliInvocation) -> Result<u8, CliError> {
    match inv.subcommand {
        Subcommand::Mu => execute_mu(inv),
        Subcommand::Sample => execute_sample(inv),
        Subcommand::SimulateWorkload => execute_simulate_workload(inv),
        Subcommand::Verify => execute_verify(inv, None),
        Subcommand::CompareHt => execute_verify(inv, Some(ExperimentId::HtCompare)),
        Subcommand::Report => execute_report(inv),
    }
}

// ============================================================================
// mu
// ============================================================================

fn execute_mu(inv: &CliInvocation) -> Result<u8, CliError> {
    let options = &inv.options;
    let spec = options
        .model
        .as_ref()
        .ok_or_else(|| CliError::Usage("mu needs --model".into()))?;
    let n = single_n(options)?;
    let model = spec.build(options.horizon)?;
    let horizon = TimeHorizon::new(options.horizon).map_err(sim_err)?;
    let mu = conditional_mean_mu_n(&model, n, horizon).map_err(sim_err)?;
    println!("{}", csv_float(mu));
    Ok(0)
}

fn single_n(options: &crate::Options) -> Result<usize, CliError> {
    let list = options
        .n_list
        .as_ref()
        .ok_or_else(|| CliError::Usage("--n is required".into()))?;
    if list.len() != 1 {
        return Err(CliError::Usage("this subcommand takes a single --n value".into()));
    }
    Ok(list[0])
}

// ============================================================================
// sample
// ============================================================================

fn execute_sample(inv: &CliInvocation) -> Result<u8, CliError> {
    let options = &inv.options;
    let spec = options
        .model
        .as_ref()
        .ok_or_else(|| CliError::Usage("sample needs --model".into()))?;
    let n = single_n(options)?;
    let reps = options.reps.unwrap_or(100);
    let seed = options.seed.expect("checked by parse");
    let model = spec.build(options.horizon)?;
    let horizon = TimeHorizon::new(options.horizon).map_err(sim_err)?;
    let max_attempts = options.max_attempts.unwrap_or(1_000_000);

    let route = match options.sampler {
        SamplerKind::OrderedStatistics => "os",
        SamplerKind::Rejection => "rejection",
    };
    let config = JsonValue::object(vec![
        ("subcommand", JsonValue::Str("sample".into())),
        ("seed", JsonValue::UInt(seed)),
        ("model", model_to_json(&model)),
        ("horizon", JsonValue::Float(options.horizon)),
        ("n", JsonValue::UInt(n as u64)),
        ("replications", JsonValue::UInt(reps as u64)),
        ("sampler", JsonValue::Str(route.into())),
    ]);
    let config_sha = sha256_hex(config.to_canonical_string().as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(reps);
    for r in 0..reps {
        let mut rng = RandomStream::new(seed, r as u64).rng();
        let values = match options.sampler {
            SamplerKind::OrderedStatistics => {
                sample_conditioned_poisson_os(&model, n, horizon, &mut rng)
                    .map_err(sim_err)?
                    .epochs()
                    .to_vec()
            }
            SamplerKind::Rejection => {
                sample_conditioned_renewal_rejection(&model, n, horizon, &mut rng, max_attempts)
                    .map_err(sim_err)?
                    .0
                    .xi()
                    .to_vec()
            }
        };
        rows.push(values);
    }

    let path = match options.format {
        OutputFormat::Json => {
            let body = JsonValue::object(vec![
                ("config", config),
                ("config_sha256", JsonValue::Str(config_sha.clone())),
                ("seed", JsonValue::UInt(seed)),
                (
                    "samples",
                    JsonValue::Array(
                        rows.iter()
                            .map(|row| {
                                JsonValue::Array(
                                    row.iter().map(|&v| JsonValue::Float(v)).collect(),
                                )
                            })
                            .collect(),
                    ),
                ),
            ]);
            let path = options.out_dir.join("samples.json");
            write_file(&path, &body.to_canonical_string(), options.force)?;
            path
        }
        OutputFormat::Csv => {
            let mut body = csv_provenance_line(seed, &config_sha);
            body.push_str("replication,index,value\n");
            for (r, row) in rows.iter().enumerate() {
                for (i, &v) in row.iter().enumerate() {
                    body.push_str(&format!("{r},{i},{}\n", csv_float(v)));
                }
            }
            let path = options.out_dir.join("samples.csv");
            write_file(&path, &body, options.force)?;
            path
        }
    };
    println!("wrote {} ({} replications, route {route})", path.display(), reps);
    Ok(0)
}

// ============================================================================
// simulate-workload
// ============================================================================

fn execute_simulate_workload(inv: &CliInvocation) -> Result<u8, CliError> {
    let options = &inv.options;
    let n = single_n(options)?;
    let reps = options.reps.unwrap_or(100);
    let seed = options.seed.expect("checked by parse");
    let grid = options.grid.unwrap_or(1024);
    let service = options.service.unwrap_or(ServiceModel::Exponential);
    let max_attempts = options.max_attempts.unwrap_or(1_000_000);
    let horizon = TimeHorizon::new(options.horizon).map_err(sim_err)?;
    let model = match &options.model {
        Some(spec) => spec.build(options.horizon)?,
        None => InterarrivalModel::exponential(n as f64 / options.horizon).map_err(sim_err)?,
    };
    let retained_cap = options.paths_retained.unwrap_or(100).min(reps);

    let config = JsonValue::object(vec![
        ("subcommand", JsonValue::Str("simulate-workload".into())),
        ("seed", JsonValue::UInt(seed)),
        ("model", model_to_json(&model)),
        ("service", service_to_json(&service)),
        ("horizon", JsonValue::Float(options.horizon)),
        ("n", JsonValue::UInt(n as u64)),
        ("replications", JsonValue::UInt(reps as u64)),
        ("grid_size", JsonValue::UInt(grid as u64)),
        ("paths_retained", JsonValue::UInt(retained_cap as u64)),
    ]);
    let config_sha = sha256_hex(config.to_canonical_string().as_bytes());

    let mut endpoints = Vec::with_capacity(reps);
    let mut sups = Vec::with_capacity(reps);
    let mut retained: Vec<(usize, GridPath)> = Vec::new();
    for r in 0..reps {
        let mut rng = RandomStream::new(seed, r as u64).rng();
        let row = sample_conditioned_renewal_rejection(&model, n, horizon, &mut rng, max_attempts)
            .map_err(sim_err)?
            .0;
        let services = service.sample_vec(n, &mut rng);
        let phi = netput_gamma_n(&row, &services).map_err(sim_err)?.reflect();
        endpoints.push(phi.eval(1.0).expect("in domain"));
        let sup = phi
            .post_jump_values()
            .iter()
            .fold(phi.initial_value(), |acc, &v| acc.max(v));
        sups.push(sup);
        if r < retained_cap {
            retained.push((r, GridPath::sample_step(&phi, grid).map_err(sim_err)?));
        }
    }

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let endpoint_mean = mean(&endpoints);
    let endpoint_var = endpoints
        .iter()
        .map(|&x| (x - endpoint_mean) * (x - endpoint_mean))
        .sum::<f64>()
        / (reps as f64 - 1.0).max(1.0);
    let sup_mean = mean(&sups);

    let report = JsonValue::object(vec![
        ("config", config),
        ("config_sha256", JsonValue::Str(config_sha.clone())),
        ("seed", JsonValue::UInt(seed)),
        (
            "stats",
            JsonValue::object(vec![
                ("workload_endpoint_mean", JsonValue::Float(endpoint_mean)),
                ("workload_endpoint_var", JsonValue::Float(endpoint_var)),
                ("workload_sup_mean", JsonValue::Float(sup_mean)),
            ]),
        ),
        ("passed", JsonValue::Bool(true)),
    ]);

    let report_path = options.out_dir.join("report.json");
    write_file(&report_path, &report.to_canonical_string(), options.force)?;

    let mut summary = csv_provenance_line(seed, &config_sha);
    summary.push_str("n,t,name,value,std_error\n");
    summary.push_str(&format!("{n},1,workload_endpoint_mean,{},\n", csv_float(endpoint_mean)));
    summary.push_str(&format!("{n},1,workload_endpoint_var,{},\n", csv_float(endpoint_var)));
    summary.push_str(&format!("{n},,workload_sup_mean,{},\n", csv_float(sup_mean)));
    write_file(&options.out_dir.join("summary.csv"), &summary, options.force)?;

    let mut paths = csv_provenance_line(seed, &config_sha);
    paths.push_str("replication,t,value\n");
    for (r, path) in &retained {
        for (i, &v) in path.values().iter().enumerate() {
            paths.push_str(&format!("{r},{},{}\n", csv_float(path.epoch(i)), csv_float(v)));
        }
    }
    write_file(&options.out_dir.join("paths.csv"), &paths, options.force)?;

    println!(
        "wrote {}, summary.csv, paths.csv ({} replications, workload endpoint mean {:.6})",
        report_path.display(),
        reps,
        endpoint_mean
    );
    Ok(0)
}

// ============================================================================
// verify / compare-ht
// ============================================================================

fn execute_verify(inv: &CliInvocation, forced: Option<ExperimentId>) -> Result<u8, CliError> {
    let options = &inv.options;
    let experiment = match forced {
        Some(id) => id,
        None => options
            .experiment
            .ok_or_else(|| CliError::Usage("verify needs --experiment".into()))?,
    };
    let seed = options.seed.expect("checked by parse");
    let mut config = ExperimentConfig::defaults(experiment, seed);
    config.horizon = options.horizon;
    if let Some(spec) = &options.model {
        config.model = spec.build(options.horizon)?;
    }
    if let Some(n_list) = &options.n_list {
        config.n_list = n_list.clone();
    }
    if let Some(reps) = options.reps {
        config.replications = reps;
    }
    if let Some(grid) = options.grid {
        config.grid_size = grid;
    }
    if let Some(service) = options.service {
        config.service = service;
    }
    if let Some(theta) = options.theta {
        config.theta = theta;
    }
    if let Some(max_attempts) = options.max_attempts {
        config.max_attempts = max_attempts;
    }
    if let Some(level) = options.level {
        config.rejection_level = level;
    }
    if let Some(ks_max) = options.ks_max {
        config.ks_distance_max = ks_max;
    }
    if let Some(paths_retained) = options.paths_retained {
        config.paths_retained = paths_retained;
    }

    let report = run_experiment(&config).map_err(sim_err)?;
    write_report_files(&report, &options.out_dir, options.force)?;
    print_report(&report);
    Ok(if report.passed { 0 } else { EXIT_VERDICT_FAILURE })
}

fn write_report_files(
    report: &ExperimentReport,
    out_dir: &Path,
    force: bool,
) -> Result<(), CliError> {
    write_file(&out_dir.join("report.json"), &report.to_canonical_json(), force)?;
    write_file(&out_dir.join("summary.csv"), &report.summary_csv(), force)?;
    write_file(&out_dir.join("paths.csv"), &report.paths_csv(), force)?;
    Ok(())
}

fn print_report(report: &ExperimentReport) {
    for check in &report.checks {
        let mark = if check.passed { "ok  " } else { "FAIL" };
        println!(
            "[{mark}] {} ({}) {}: {:.6} vs {:.6}",
            check.name, check.criterion, check.mode, check.statistic, check.threshold
        );
    }
    println!(
        "experiment {}: {} ({} checks, {:.2} s)",
        report.experiment.name(),
        if report.passed { "PASS" } else { "FAIL" },
        report.checks.len(),
        report.runtime_secs
    );
}

// ============================================================================
// report
// ============================================================================

fn execute_report(inv: &CliInvocation) -> Result<u8, CliError> {
    let options = &inv.options;
    let input: &PathBuf = options
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("report needs --input <report.json>".into()))?;
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Operational(format!("cannot read {}: {e}", input.display())))?;
    let value = parse_json(&text).map_err(|e| CliError::Operational(e.to_string()))?;

    let experiment = value
        .get("experiment")
        .and_then(JsonValue::as_str)
        .unwrap_or("<unknown>");
    let seed = value.get("seed").and_then(JsonValue::as_f64).unwrap_or(f64::NAN);
    let claimed_sha = value
        .get("config_sha256")
        .and_then(JsonValue::as_str)
        .unwrap_or("");
    if let Some(config) = value.get("config") {
        let recomputed = sha256_hex(config.to_canonical_string().as_bytes());
        if recomputed != claimed_sha {
            return Err(CliError::Operational(format!(
                "config hash mismatch: file says {claimed_sha}, canonical config hashes to {recomputed}"
            )));
        }
    }

    println!("experiment {experiment} (seed {seed}, config {claimed_sha})");
    let mut all_passed = true;
    if let Some(checks) = value.get("checks").and_then(JsonValue::as_array) {
        for check in checks {
            let name = check.get("name").and_then(JsonValue::as_str).unwrap_or("?");
            let criterion = check.get("criterion").and_then(JsonValue::as_str).unwrap_or("?");
            let passed = check.get("passed").and_then(JsonValue::as_bool).unwrap_or(false);
            all_passed &= passed;
            println!("[{}] {name} ({criterion})", if passed { "ok  " } else { "FAIL" });
        }
    }
    let overall = value.get("passed").and_then(JsonValue::as_bool).unwrap_or(all_passed);
    println!("overall: {}", if overall { "PASS" } else { "FAIL" });
    Ok(if overall { 0 } else { EXIT_VERDICT_FAILURE })
}

// ============================================================================
// File plumbing
// ============================================================================

/// Write a file, creating parent directories, refusing to overwrite unless
/// `force` is set.
fn write_file(path: &Path, content: &str, force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(CliError::Usage(format!(
            "{} already exists; pass --force to overwrite",
            path.display()
        )));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::Operational(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| CliError::Operational(format!("cannot write {}: {e}", path.display())))
}
