//! Command-line front end: flag/config parsing, experiment dispatch, and
//! deterministic report emission.
//!
//! Exit-status contract: 0 when everything ran and every verdict passed,
//! 1 when an experiment ran but a verdict failed, 2 for usage errors
//! (unknown flags or keys, missing seed, unreadable config, refusing to
//! overwrite without `--force`), and 3 for operational failures (sampler
//! exhaustion, I/O).

pub mod invocation;
pub mod run;

pub use invocation::{parse_invocation, CliError, CliInvocation, Options, Subcommand};
pub use run::execute;

/// Exit code for a failed verdict.
pub const EXIT_VERDICT_FAILURE: u8 = 1;
/// Exit code for usage errors.
pub const EXIT_USAGE: u8 = 2;
/// Exit code for operational errors.
pub const EXIT_OPERATIONAL: u8 = 3;

pub const USAGE: &str = "\
transitory-sim — conditioned renewal processes, their diffusion limits, and
the transitory-queue workload, with statistical verification experiments.

USAGE:
    transitory-sim <SUBCOMMAND> [FLAGS]

SUBCOMMANDS:
    sample             draw conditioned arrival data (--sampler os|rejection)
    mu                 evaluate the conditional-mean integral (deterministic)
    simulate-workload  simulate reflected workload paths
    verify             run a named verification experiment
    compare-ht         run the heavy-traffic comparison experiment
    report             summarize an existing report.json

FLAGS (flags override config-file values):
    --config <path>          flat key=value file, dotted sections (model.rate=1.0)
    --seed <u64>             RNG seed; required for stochastic subcommands
    --out <dir>              output directory (default: out)
    --force                  overwrite existing output files
    --format <json|csv>      sample output format (default: json)
    --experiment <id>        one of: os_vs_rejection mu_n_lemma fslln
                             fclt_counting fclt_poisson phi_diagnostics
                             workload_bb ht_compare inverse_bound exchangeability
    --model <spec>           exp:R | uniform:B | gamma:K,S | poisson:R[,END]
                             | poisson-ramp:SLOPE[,SEGMENTS[,END]]
    --T <f64>                horizon (default: 1)
    --n <list>               comma-separated row sizes
    --reps <usize>           replications
    --grid <usize>           grid size for path output
    --service <spec>         exp | det | lognormal:VAR
    --theta <f64>            heavy-traffic drift parameter
    --max-attempts <u64>     rejection-sampler attempt budget
    --level <f64>            rejection level for exact-null tests
    --ks-max <f64>           KS-distance threshold for limit comparisons
    --paths-retained <usize> replications kept in paths.csv
    --sampler <os|rejection> sampling route for `sample`
    --input <path>           report.json to summarize (for `report`)

Outputs: report.json plus summary.csv and paths.csv, all deterministic for a
fixed seed; CSVs carry a `# seed=<u64> config_sha256=<hex>` header line and
the JSON embeds the same fields. TRANSITORY_SIM_THREADS caps the worker pool
(0 or unset = auto).
";
