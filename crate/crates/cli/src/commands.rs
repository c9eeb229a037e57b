use std::path::Path;

use dpsqkd_core::keyrate::click_rate;
use dpsqkd_core::protocol::{estimate_statistics, exact_count_distribution, simulate_run};
use dpsqkd_core::subadd::{coefficient_identity, verify_theorem, SubaddTrial};
use dpsqkd_core::{asymptotic_rate, source_entropy, KeyRateReport};
use serde::Serialize;
use serde_json::json;

use crate::config::SimulationConfig;
use crate::output::{cell, csv_record, csv_table, json, sig12, to_value};
use crate::{CliError, Format};

/// Largest `n` accepted by `verify-subadd` (qubit subsystems plus a qubit E).
pub const SUBADD_MAX_N: usize = 4;
/// Coefficient identity is checked for every `1 <= m <= n <= 60`.
pub const COEFFICIENT_MAX_N: u64 = 60;

/// Rendered command output plus the process exit status it implies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub status: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, status: 0 }
    }
}

/// Key-rate bound for the exact binomial click-count distribution.
pub fn cmd_keyrate(config: &SimulationConfig, format: Format) -> Result<Outcome, CliError> {
    let report = KeyRateReport::exact(
        config.n_pulses,
        config.alpha,
        config.eta,
        config.overlap_convention,
    )?;
    let value = to_value(&report)?;
    Ok(Outcome::ok(match format {
        Format::Json => json(&value)?,
        Format::Csv => csv_record(&value)?,
    }))
}

/// Monte Carlo run, channel estimation and the key rate from the empirical
/// count distribution. The exact-distribution report is included for
/// comparison.
pub fn cmd_simulate(config: &SimulationConfig, format: Format) -> Result<Outcome, CliError> {
    let blocks = simulate_run(
        config.n_pulses,
        config.n_blocks,
        config.alpha,
        config.eta,
        config.seed,
    )?;
    let stats = estimate_statistics(&blocks, config.publish_fraction, config.seed)?;
    drop(blocks);
    let empirical =
        KeyRateReport::empirical(&stats, config.alpha, config.eta, config.overlap_convention)?;
    let exact = KeyRateReport::exact(
        config.n_pulses,
        config.alpha,
        config.eta,
        config.overlap_convention,
    )?;
    let text = match format {
        Format::Json => json(&to_value(&json!({
            "config": config,
            "statistics": stats,
            "keyrate": empirical,
            "exact_keyrate": exact,
        }))?)?,
        Format::Csv => {
            let reference =
                exact_count_distribution(config.n_pulses, click_rate(config.alpha, config.eta))?;
            csv_table(
                ["w", "p_empirical", "p_exact"],
                (0..config.n_pulses).map(|w| {
                    vec![
                        w.to_string(),
                        sig12(stats.count_histogram.p(w)).to_string(),
                        sig12(reference.p(w)).to_string(),
                    ]
                }),
            )?
        }
    };
    Ok(Outcome::ok(text))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepArgs {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub s_a: f64,
    pub g_pulse_asymptotic: f64,
}

/// Evaluates the asymptotic per-pulse rate on an even alpha grid.
pub fn sweep_rows(config: &SimulationConfig, sweep: SweepArgs) -> Result<Vec<SweepRow>, CliError> {
    if !(sweep.alpha_min >= 0.0 && sweep.alpha_min < sweep.alpha_max && sweep.alpha_max.is_finite())
    {
        return Err(CliError::InvalidConfig(format!(
            "need 0 <= alpha_min < alpha_max, got [{}, {}]",
            sweep.alpha_min, sweep.alpha_max
        )));
    }
    if sweep.steps < 2 {
        return Err(CliError::InvalidConfig(format!(
            "steps must be at least 2, got {}",
            sweep.steps
        )));
    }
    let width = sweep.alpha_max - sweep.alpha_min;
    (0..sweep.steps)
        .map(|i| {
            let alpha = sweep.alpha_min + width * i as f64 / (sweep.steps - 1) as f64;
            Ok(SweepRow {
                alpha,
                s_a: source_entropy(alpha, config.overlap_convention),
                g_pulse_asymptotic: asymptotic_rate(alpha, config.eta, config.overlap_convention)?,
            })
        })
        .collect()
}

/// Row with the largest rate; the first one wins ties.
pub fn sweep_argmax(rows: &[SweepRow]) -> Option<SweepRow> {
    rows.iter()
        .copied()
        .fold(None, |best: Option<SweepRow>, row| match best {
            Some(b) if b.g_pulse_asymptotic >= row.g_pulse_asymptotic => Some(b),
            _ => Some(row),
        })
}

/// CSV columns `kind,alpha,s_a,g_pulse_asymptotic`; grid rows have kind
/// `grid` and the footer row has kind `argmax`.
pub fn cmd_sweep_alpha(
    config: &SimulationConfig,
    sweep: SweepArgs,
    format: Format,
) -> Result<Outcome, CliError> {
    let rows = sweep_rows(config, sweep)?;
    let best = sweep_argmax(&rows).ok_or_else(|| CliError::Internal("empty sweep".into()))?;
    let text = match format {
        Format::Csv => {
            let row = |kind: &str, r: &SweepRow| {
                vec![
                    kind.to_string(),
                    sig12(r.alpha).to_string(),
                    sig12(r.s_a).to_string(),
                    sig12(r.g_pulse_asymptotic).to_string(),
                ]
            };
            csv_table(
                ["kind", "alpha", "s_a", "g_pulse_asymptotic"],
                rows.iter()
                    .map(|r| row("grid", r))
                    .chain(std::iter::once(row("argmax", &best))),
            )?
        }
        Format::Json => json(&to_value(&json!({
            "eta": config.eta,
            "overlap_convention": config.overlap_convention,
            "rows": rows,
            "argmax": best,
        }))?)?,
    };
    Ok(Outcome::ok(text))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubaddArgs {
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubaddSummary {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub min_slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSummary {
    pub n_max: u64,
    pub pairs_checked: usize,
    pub all_hold: bool,
    pub failures: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubaddReport {
    pub seed: u64,
    pub trials: usize,
    pub n_max: usize,
    pub results: Vec<SubaddSummary>,
    pub coefficient_identity: CoefficientSummary,
    pub passed: bool,
    #[serde(skip)]
    pub log: Vec<SubaddTrial>,
}

/// Runs the inequality check for every `1 <= m <= n <= n_max` on qubit
/// subsystems with a qubit E, and the coefficient identity up to `n = 60`.
pub fn verify_subadd(args: SubaddArgs) -> Result<SubaddReport, CliError> {
    if args.trials == 0 {
        return Err(CliError::InvalidConfig(
            "empty trial count: trials must be at least 1".into(),
        ));
    }
    if args.n_max == 0 || args.n_max > SUBADD_MAX_N {
        return Err(CliError::InvalidConfig(format!(
            "n_max must lie in 1..={SUBADD_MAX_N} (dimension budget), got {}",
            args.n_max
        )));
    }
    let mut results = Vec::new();
    let mut log = Vec::new();
    for n in 1..=args.n_max {
        for m in 1..=n {
            let v = verify_theorem(n, m, args.trials, &vec![2; n], 2, args.seed)?;
            results.push(SubaddSummary {
                n,
                m,
                trials: args.trials,
                min_slack: v.min_slack,
                passed: v.passed,
            });
            log.extend(v.trials);
        }
    }
    let pairs: Vec<(u64, u64)> = (1..=COEFFICIENT_MAX_N)
        .flat_map(|n| (1..=n).map(move |m| (n, m)))
        .collect();
    let failures: Vec<(u64, u64)> = pairs
        .iter()
        .copied()
        .filter(|&(n, m)| !coefficient_identity(n, m))
        .collect();
    let coefficients = CoefficientSummary {
        n_max: COEFFICIENT_MAX_N,
        pairs_checked: pairs.len(),
        all_hold: failures.is_empty(),
        failures,
    };
    let passed = coefficients.all_hold && results.iter().all(|r| r.passed);
    Ok(SubaddReport {
        seed: args.seed,
        trials: args.trials,
        n_max: args.n_max,
        results,
        coefficient_identity: coefficients,
        passed,
        log,
    })
}

/// Writes every trial as CSV.
pub fn write_trial_log(path: &Path, log: &[SubaddTrial]) -> Result<(), CliError> {
    let text = csv_table(
        ["n", "m", "ancilla_dim", "lhs", "rhs", "slack"],
        log.iter().map(|t| {
            vec![
                t.n.to_string(),
                t.m.to_string(),
                t.ancilla_dim.to_string(),
                sig12(t.lhs).to_string(),
                sig12(t.rhs).to_string(),
                sig12(t.slack).to_string(),
            ]
        }),
    )?;
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Exit status 4 when any trial falls below the slack tolerance or the
/// coefficient identity fails.
pub fn cmd_verify_subadd(
    args: SubaddArgs,
    format: Format,
    trial_log: Option<&Path>,
) -> Result<Outcome, CliError> {
    let report = verify_subadd(args)?;
    if let Some(path) = trial_log {
        write_trial_log(path, &report.log)?;
    }
    let value = to_value(&report)?;
    let text = match format {
        Format::Json => json(&value)?,
        Format::Csv => csv_table(
            ["n", "m", "trials", "min_slack", "passed"],
            value["results"].as_array().into_iter().flatten().map(|r| {
                ["n", "m", "trials", "min_slack", "passed"]
                    .iter()
                    .map(|k| cell(&r[*k]))
                    .collect()
            }),
        )?,
    };
    Ok(Outcome {
        text,
        status: if report.passed {
            0
        } else {
            crate::EXIT_VERIFICATION
        },
    })
}
