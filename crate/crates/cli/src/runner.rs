//! Environment and policy construction plus single-experiment execution
//! with per-round CSV logging.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ucbtune_core::env::{make_switching, make_synthetic, Environment, ReplayEnv};
use ucbtune_core::ingest::{self, EncodedDataset, Schema};
use ucbtune_core::policy::{
    self, DoplinucbPolicy, FixedAlphaPolicy, OplinucbPolicy, Policy,
};
use ucbtune_core::rng::derive_rng;
use ucbtune_core::{compute_regret, RegretCurve, RoundRecord};

use crate::config::{EnvironmentKind, ExperimentConfig, PolicyKind, RowOrder};
use crate::{data_err, CliError, CliResult};

// Policy RNG stream labels under each replicate seed; the environment
// consumes the raw seed itself.
const STREAM_OPLINUCB: u64 = 1;
const STREAM_DOPLINUCB: u64 = 2;

/// Everything needed to build a fresh environment per (policy, seed) pair.
/// Replay rows are loaded once and shared.
pub enum EnvBlueprint {
    Replay {
        base: ReplayEnv,
        order: RowOrder,
        switch_period: Option<u64>,
    },
    Synthetic {
        dim: usize,
        num_arms: usize,
    },
}

impl EnvBlueprint {
    pub fn from_config(config: &ExperimentConfig) -> CliResult<Self> {
        match config.environment.kind {
            EnvironmentKind::Replay | EnvironmentKind::Switching => {
                let dataset = load_dataset(config)?;
                let base = ReplayEnv::from_dataset(&dataset).map_err(data_err)?;
                Ok(EnvBlueprint::Replay {
                    base,
                    order: config.environment.order.expect("validated"),
                    switch_period: match config.environment.kind {
                        EnvironmentKind::Switching => {
                            Some(config.environment.switch_period.expect("validated"))
                        }
                        _ => None,
                    },
                })
            }
            EnvironmentKind::Synthetic => Ok(EnvBlueprint::Synthetic {
                dim: config.environment.dim.expect("validated"),
                num_arms: config.environment.num_arms.expect("validated"),
            }),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            EnvBlueprint::Replay { base, .. } => base.dim(),
            EnvBlueprint::Synthetic { dim, .. } => *dim,
        }
    }

    pub fn num_arms(&self) -> usize {
        match self {
            EnvBlueprint::Replay { .. } => 2,
            EnvBlueprint::Synthetic { num_arms, .. } => *num_arms,
        }
    }

    /// Rows available per run (replay), or `None` for endless environments.
    pub fn rows_available(&self) -> Option<usize> {
        match self {
            EnvBlueprint::Replay { base, .. } => Some(base.len()),
            EnvBlueprint::Synthetic { .. } => None,
        }
    }

    pub fn build(&self, seed: u64) -> CliResult<Box<dyn Environment>> {
        match self {
            EnvBlueprint::Replay {
                base,
                order,
                switch_period,
            } => {
                let mut env = base.clone();
                env.reset();
                let env = match order {
                    RowOrder::File => env,
                    RowOrder::Shuffled => env.shuffled(seed),
                };
                match switch_period {
                    Some(period) => Ok(Box::new(
                        make_switching(env, *period).map_err(data_err)?,
                    )),
                    None => Ok(Box::new(env)),
                }
            }
            EnvBlueprint::Synthetic { dim, num_arms } => Ok(Box::new(
                make_synthetic(*dim, *num_arms, seed).map_err(data_err)?,
            )),
        }
    }
}

/// Parse, encode, and optionally cache the configured dataset(s).
pub fn load_dataset(config: &ExperimentConfig) -> CliResult<EncodedDataset> {
    let env = &config.environment;
    if let Some(cache) = &env.encoded_cache {
        let path = Path::new(cache);
        if path.exists() {
            let file = fs::File::open(path)
                .map_err(|e| CliError::Data(format!("cannot read cache {cache}: {e}")))?;
            return ingest::read_cache(BufReader::new(file)).map_err(data_err);
        }
    }

    let schema = Schema::adult();
    let mut records = Vec::new();
    for path in env.datasets.as_ref().expect("validated") {
        let file = fs::File::open(path)
            .map_err(|e| CliError::Data(format!("cannot read dataset {path}: {e}")))?;
        let mut parsed =
            ingest::parse_adult(BufReader::new(file), &schema).map_err(data_err)?;
        records.append(&mut parsed);
    }
    if records.is_empty() {
        return Err(CliError::Data("datasets contain no records".into()));
    }
    let fit_rows = env
        .encoder_fit_rows
        .unwrap_or(records.len())
        .clamp(1, records.len());
    let spec = ingest::fit_encoder(&records[..fit_rows], &schema).map_err(data_err)?;
    let dataset = ingest::encode_dataset(&spec, &records).map_err(data_err)?;

    if let Some(cache) = &env.encoded_cache {
        let path = Path::new(cache);
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(data_err)?;
            }
        }
        let file = fs::File::create(path)
            .map_err(|e| CliError::Data(format!("cannot write cache {cache}: {e}")))?;
        let mut writer = BufWriter::new(file);
        ingest::write_cache(&mut writer, &spec, &dataset).map_err(data_err)?;
        writer.flush().map_err(data_err)?;
    }
    Ok(dataset)
}

/// Build one policy instance with its own derived RNG stream.
pub fn build_policy(
    config: &ExperimentConfig,
    kind: PolicyKind,
    fixed_alpha: Option<f64>,
    dim: usize,
    num_arms: usize,
    seed: u64,
) -> CliResult<Box<dyn Policy>> {
    match kind {
        PolicyKind::Fixed => {
            let alpha = fixed_alpha
                .ok_or_else(|| CliError::Config("run.alpha: required for fixed policy".into()))?;
            Ok(Box::new(
                FixedAlphaPolicy::new(dim, num_arms, alpha)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            ))
        }
        PolicyKind::Oplinucb => {
            let section = config.oplinucb_section()?;
            let grid = config.grid()?;
            let policy = OplinucbPolicy::new(
                dim,
                num_arms,
                grid,
                section.prior_success,
                section.prior_failure,
                derive_rng(seed, STREAM_OPLINUCB, 0),
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
            let policy = if section.fractional_rewards.unwrap_or(false) {
                policy.with_fractional_rewards()
            } else {
                policy
            };
            Ok(Box::new(policy))
        }
        PolicyKind::Doplinucb => {
            let section = config.doplinucb_section()?;
            let grid = config.grid()?;
            Ok(Box::new(
                DoplinucbPolicy::new(
                    dim,
                    num_arms,
                    grid,
                    section.to_config(),
                    derive_rng(seed, STREAM_DOPLINUCB, 0),
                )
                .map_err(|e| CliError::Config(e.to_string()))?,
            ))
        }
    }
}

/// Label used in output file names for one policy instance.
pub fn policy_file_label(kind: PolicyKind, fixed_alpha: Option<f64>) -> String {
    match kind {
        PolicyKind::Fixed => format!("fixed_a{}", fixed_alpha.unwrap_or_default()),
        PolicyKind::Oplinucb => "oplinucb".to_string(),
        PolicyKind::Doplinucb => "doplinucb".to_string(),
    }
}

pub struct RunOutput {
    pub records: Vec<RoundRecord>,
    pub curve: RegretCurve,
}

impl RunOutput {
    pub fn final_regret(&self) -> f64 {
        self.curve.final_regret()
    }
}

/// Play the policy against the environment for up to `horizon` rounds
/// (replay exhaustion ends the run early).
pub fn execute(
    policy: &mut dyn Policy,
    env: &mut dyn Environment,
    horizon: u64,
) -> CliResult<RunOutput> {
    let records = policy::run_rounds(policy, env, horizon).map_err(data_err)?;
    if records.is_empty() {
        return Err(CliError::Data(
            "environment was exhausted before the first round".into(),
        ));
    }
    let curve = compute_regret(&records).map_err(data_err)?;
    Ok(RunOutput { records, curve })
}

/// One CSV row per round: t, alpha, arm, reward, optimal_reward,
/// cumulative_regret.
pub fn write_round_log(path: &Path, output: &RunOutput) -> CliResult<()> {
    let file = fs::File::create(path)
        .map_err(|e| CliError::Data(format!("cannot write log {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "t,alpha,arm,reward,optimal_reward,cumulative_regret").map_err(data_err)?;
    for (record, cum) in output.records.iter().zip(output.curve.as_slice()) {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            record.t,
            record.alpha,
            record.arm,
            record.reward,
            record.optimal_reward.unwrap_or(f64::NAN),
            cum
        )
        .map_err(data_err)?;
    }
    w.flush().map_err(data_err)
}

/// Run the configured policy for one seed, writing the per-round log.
/// Returns the log path and the final cumulative regret.
pub fn run_experiment(
    config: &ExperimentConfig,
    blueprint: &EnvBlueprint,
    seed: u64,
    out_dir: &Path,
) -> CliResult<(PathBuf, f64)> {
    config.validate_for_run()?;
    let kind = config.run.policy.expect("validated");
    let fixed_alpha = config.run.alpha;
    let mut policy = build_policy(
        config,
        kind,
        fixed_alpha,
        blueprint.dim(),
        blueprint.num_arms(),
        seed,
    )?;
    let mut env = blueprint.build(seed)?;
    let output = execute(policy.as_mut(), env.as_mut(), config.run.horizon)?;

    let label = policy_file_label(kind, fixed_alpha);
    let path = out_dir.join(format!("{}.{label}.seed{seed}.log.csv", config.label));
    write_round_log(&path, &output)?;
    Ok((path, output.final_regret()))
}
