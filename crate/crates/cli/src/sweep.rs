//! Grid sweeps: every fixed exploration value over all seeds, plus the two
//! meta-policies, reduced to a summary table.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use ucbtune_core::policy::{DoplinucbPolicy, FixedAlphaPolicy, OplinucbPolicy};
use ucbtune_core::rng::derive_rng;

use crate::config::ExperimentConfig;
use crate::runner::{execute, EnvBlueprint};
use crate::{CliError, CliResult};

/// Final cumulative regret of one fixed exploration value, per seed.
#[derive(Debug, Clone)]
pub struct AlphaRow {
    pub alpha: f64,
    pub per_seed: Vec<f64>,
    pub mean: f64,
}

/// Final cumulative regret of one meta-policy, per seed.
#[derive(Debug, Clone)]
pub struct MetaRow {
    pub per_seed: Vec<f64>,
    pub mean: f64,
}

/// One summary row: order statistics of the fixed-α grid plus the two
/// meta-policy results, all as mean final cumulative regret over seeds.
#[derive(Debug, Clone)]
pub struct SummaryTable {
    pub configuration: String,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    pub oplinucb: f64,
    pub doplinucb: f64,
}

impl SummaryTable {
    /// Order-statistic sanity: min ≤ median ≤ max and min ≤ mean ≤ max.
    pub fn validate(&self) -> CliResult<()> {
        let ok = self.min <= self.median
            && self.median <= self.max
            && self.min <= self.mean
            && self.mean <= self.max;
        if !ok {
            return Err(CliError::Data(format!(
                "summary ordering violated: min={} median={} mean={} max={}",
                self.min, self.median, self.mean, self.max
            )));
        }
        Ok(())
    }

    pub fn csv_header() -> &'static str {
        "config,max,min,mean,median,oplinucb,doplinucb"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.configuration,
            self.max,
            self.min,
            self.mean,
            self.median,
            self.oplinucb,
            self.doplinucb
        )
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub per_alpha: Vec<AlphaRow>,
    pub oplinucb: MetaRow,
    pub doplinucb: MetaRow,
    pub summary: SummaryTable,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Median with the even-count average convention.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite regrets"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Run the whole grid (each value over all seeds) plus OPLINUCB and
/// DOPLINUCB, and reduce to a [`SummaryTable`].
///
/// Work parallelizes across (candidate, seed) pairs; every pair derives its
/// own RNG streams, so the schedule cannot change results.
pub fn sweep_grid(config: &ExperimentConfig, blueprint: &EnvBlueprint) -> CliResult<SweepResult> {
    config.validate_for_sweep()?;
    let grid = config.grid()?;
    let seeds = config.run.seeds.clone();
    let horizon = config.run.horizon;
    let dim = blueprint.dim();
    let num_arms = blueprint.num_arms();

    let fixed_tasks: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let fixed_results: Vec<f64> = fixed_tasks
        .par_iter()
        .map(|&(alpha_index, seed)| -> CliResult<f64> {
            let alpha = grid.values()[alpha_index];
            let mut policy = FixedAlphaPolicy::new(dim, num_arms, alpha)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let mut env = blueprint.build(seed)?;
            Ok(execute(&mut policy, env.as_mut(), horizon)?.final_regret())
        })
        .collect::<CliResult<Vec<f64>>>()?;

    let per_alpha: Vec<AlphaRow> = (0..grid.len())
        .map(|i| {
            let per_seed: Vec<f64> = (0..seeds.len())
                .map(|k| fixed_results[i * seeds.len() + k])
                .collect();
            AlphaRow {
                alpha: grid.values()[i],
                mean: mean(&per_seed),
                per_seed,
            }
        })
        .collect();

    let oplinucb_section = config.oplinucb_section()?.clone();
    let op_per_seed: Vec<f64> = seeds
        .par_iter()
        .map(|&seed| -> CliResult<f64> {
            let policy = OplinucbPolicy::new(
                dim,
                num_arms,
                grid.clone(),
                oplinucb_section.prior_success,
                oplinucb_section.prior_failure,
                derive_rng(seed, 1, 0),
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
            let mut policy = if oplinucb_section.fractional_rewards.unwrap_or(false) {
                policy.with_fractional_rewards()
            } else {
                policy
            };
            let mut env = blueprint.build(seed)?;
            Ok(execute(&mut policy, env.as_mut(), horizon)?.final_regret())
        })
        .collect::<CliResult<Vec<f64>>>()?;

    let dop_config = config.doplinucb_section()?.to_config();
    let dop_per_seed: Vec<f64> = seeds
        .par_iter()
        .map(|&seed| -> CliResult<f64> {
            let mut policy = DoplinucbPolicy::new(
                dim,
                num_arms,
                grid.clone(),
                dop_config,
                derive_rng(seed, 2, 0),
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
            let mut env = blueprint.build(seed)?;
            Ok(execute(&mut policy, env.as_mut(), horizon)?.final_regret())
        })
        .collect::<CliResult<Vec<f64>>>()?;

    let alpha_means: Vec<f64> = per_alpha.iter().map(|row| row.mean).collect();
    let oplinucb = MetaRow {
        mean: mean(&op_per_seed),
        per_seed: op_per_seed,
    };
    let doplinucb = MetaRow {
        mean: mean(&dop_per_seed),
        per_seed: dop_per_seed,
    };
    let summary = SummaryTable {
        configuration: config.configuration_label(),
        max: alpha_means.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: alpha_means.iter().copied().fold(f64::INFINITY, f64::min),
        mean: mean(&alpha_means),
        median: median(&alpha_means),
        oplinucb: oplinucb.mean,
        doplinucb: doplinucb.mean,
    };
    summary.validate()?;

    Ok(SweepResult {
        per_alpha,
        oplinucb,
        doplinucb,
        summary,
    })
}

/// Write `summary.csv`, `per_alpha.csv`, and `meta.csv` under `out_dir`.
pub fn write_sweep_outputs(
    config: &ExperimentConfig,
    result: &SweepResult,
    out_dir: &Path,
) -> CliResult<Vec<PathBuf>> {
    let seeds = &config.run.seeds;
    let seed_columns: Vec<String> = seeds.iter().map(|s| format!("seed{s}")).collect();
    let mut written = Vec::new();

    let summary_path = out_dir.join(format!("{}.summary.csv", config.label));
    {
        let mut w = BufWriter::new(fs::File::create(&summary_path).map_err(|e| {
            CliError::Data(format!("cannot write {}: {e}", summary_path.display()))
        })?);
        writeln!(w, "{}", SummaryTable::csv_header()).map_err(crate::data_err)?;
        writeln!(w, "{}", result.summary.csv_row()).map_err(crate::data_err)?;
        w.flush().map_err(crate::data_err)?;
    }
    written.push(summary_path);

    let per_alpha_path = out_dir.join(format!("{}.per_alpha.csv", config.label));
    {
        let mut w = BufWriter::new(fs::File::create(&per_alpha_path).map_err(|e| {
            CliError::Data(format!("cannot write {}: {e}", per_alpha_path.display()))
        })?);
        writeln!(w, "alpha,mean_final_regret,{}", seed_columns.join(","))
            .map_err(crate::data_err)?;
        for row in &result.per_alpha {
            let seeds_csv: Vec<String> = row.per_seed.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{},{},{}", row.alpha, row.mean, seeds_csv.join(","))
                .map_err(crate::data_err)?;
        }
        w.flush().map_err(crate::data_err)?;
    }
    written.push(per_alpha_path);

    let meta_path = out_dir.join(format!("{}.meta.csv", config.label));
    {
        let mut w = BufWriter::new(fs::File::create(&meta_path).map_err(|e| {
            CliError::Data(format!("cannot write {}: {e}", meta_path.display()))
        })?);
        writeln!(w, "policy,mean_final_regret,{}", seed_columns.join(","))
            .map_err(crate::data_err)?;
        for (name, row) in [("oplinucb", &result.oplinucb), ("doplinucb", &result.doplinucb)] {
            let seeds_csv: Vec<String> = row.per_seed.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{name},{},{}", row.mean, seeds_csv.join(","))
                .map_err(crate::data_err)?;
        }
        w.flush().map_err(crate::data_err)?;
    }
    written.push(meta_path);

    Ok(written)
}
