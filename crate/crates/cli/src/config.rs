//! Experiment configuration: a TOML file with explicit keys.
//!
//! Every constant a policy consumes must be spelled out in the file; the
//! harness adds no hidden defaults on top. Sections are only required when
//! the command actually uses them: `run` with a fixed-α policy needs no
//! `[oplinucb]` block, while `sweep` needs everything.

use std::path::Path;

use serde::Deserialize;

use ucbtune_core::alpha::AlphaGrid;
use ucbtune_core::ctree::CTreeConfig;
use ucbtune_core::policy::DoplinucbConfig;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    Replay,
    Switching,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowOrder {
    /// Dataset order, exactly as parsed.
    File,
    /// Seeded permutation (one per replicate seed).
    Shuffled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Fixed,
    Oplinucb,
    Doplinucb,
}

impl PolicyKind {
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Fixed => "fixed",
            PolicyKind::Oplinucb => "oplinucb",
            PolicyKind::Doplinucb => "doplinucb",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub kind: EnvironmentKind,
    /// Adult-format input file(s), concatenated in order (replay/switching).
    pub datasets: Option<Vec<String>>,
    /// Row presentation order (replay/switching).
    pub order: Option<RowOrder>,
    /// Optional columnar cache of the encoded dataset; created when absent.
    pub encoded_cache: Option<String>,
    /// Fit the encoder on the first N rows instead of the whole file.
    pub encoder_fit_rows: Option<usize>,
    /// Label-inversion period (switching).
    pub switch_period: Option<u64>,
    /// Context dimension (synthetic).
    pub dim: Option<usize>,
    /// Arm count (synthetic).
    pub num_arms: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OplinucbSection {
    pub prior_success: f64,
    pub prior_failure: f64,
    /// Accept rewards in (0, 1) via Bernoulli trials (off by default).
    pub fractional_rewards: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoplinucbSection {
    pub warmup_rounds: u64,
    pub window_size: usize,
    pub refit_period: u64,
    pub significance: f64,
    pub min_leaf_weight: u64,
    pub max_depth: u32,
    pub uniform_alpha_prob: f64,
}

impl DoplinucbSection {
    pub fn to_config(&self) -> DoplinucbConfig {
        DoplinucbConfig {
            warmup_rounds: self.warmup_rounds,
            window_size: self.window_size,
            refit_period: self.refit_period,
            uniform_alpha_prob: self.uniform_alpha_prob,
            tree: CTreeConfig {
                significance: self.significance,
                min_leaf_weight: self.min_leaf_weight,
                max_depth: self.max_depth,
                ..CTreeConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Policy played by the `run` command (`sweep` runs all of them).
    pub policy: Option<PolicyKind>,
    /// Exploration value for `policy = "fixed"`.
    pub alpha: Option<f64>,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub out_dir: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Short name used in output file names.
    pub label: String,
    pub environment: EnvironmentSection,
    pub grid: Option<GridSection>,
    pub oplinucb: Option<OplinucbSection>,
    pub doplinucb: Option<DoplinucbSection>,
    pub run: RunSection,
}

impl ExperimentConfig {
    pub fn from_str(text: &str) -> CliResult<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate_common()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_str(&text)
    }

    fn validate_common(&self) -> CliResult<()> {
        if self.label.is_empty() || self.label.contains(['/', '\\']) {
            return Err(CliError::Config(
                "label: must be a non-empty name without path separators".into(),
            ));
        }
        if self.run.horizon == 0 {
            return Err(CliError::Config("run.horizon: must be at least 1".into()));
        }
        if self.run.seeds.is_empty() {
            return Err(CliError::Config(
                "run.seeds: at least one seed is required".into(),
            ));
        }
        match self.environment.kind {
            EnvironmentKind::Replay | EnvironmentKind::Switching => {
                match &self.environment.datasets {
                    None => {
                        return Err(CliError::Config(
                            "environment.datasets: required for replay environments".into(),
                        ))
                    }
                    Some(paths) if paths.is_empty() => {
                        return Err(CliError::Config(
                            "environment.datasets: must list at least one file".into(),
                        ))
                    }
                    Some(_) => {}
                }
                if self.environment.order.is_none() {
                    return Err(CliError::Config(
                        "environment.order: required for replay environments (file or shuffled)"
                            .into(),
                    ));
                }
                if self.environment.kind == EnvironmentKind::Switching
                    && self.environment.switch_period.is_none()
                {
                    return Err(CliError::Config(
                        "environment.switch_period: required for switching environments".into(),
                    ));
                }
                if let Some(0) = self.environment.switch_period {
                    return Err(CliError::Config(
                        "environment.switch_period: must be at least 1".into(),
                    ));
                }
            }
            EnvironmentKind::Synthetic => {
                if self.environment.dim.is_none() {
                    return Err(CliError::Config(
                        "environment.dim: required for synthetic environments".into(),
                    ));
                }
                if self.environment.num_arms.is_none() {
                    return Err(CliError::Config(
                        "environment.num_arms: required for synthetic environments".into(),
                    ));
                }
            }
        }
        if let Some(grid) = &self.grid {
            self.build_grid_from(grid)?;
        }
        Ok(())
    }

    fn build_grid_from(&self, section: &GridSection) -> CliResult<AlphaGrid> {
        AlphaGrid::from_range(section.start, section.stop, section.step)
            .map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    /// The expanded candidate grid; requires the `[grid]` section.
    pub fn grid(&self) -> CliResult<AlphaGrid> {
        let section = self.grid.as_ref().ok_or_else(|| {
            CliError::Config("grid: section is required for this command".into())
        })?;
        self.build_grid_from(section)
    }

    pub fn oplinucb_section(&self) -> CliResult<&OplinucbSection> {
        self.oplinucb.as_ref().ok_or_else(|| {
            CliError::Config("oplinucb: section is required for this command".into())
        })
    }

    pub fn doplinucb_section(&self) -> CliResult<&DoplinucbSection> {
        self.doplinucb.as_ref().ok_or_else(|| {
            CliError::Config("doplinucb: section is required for this command".into())
        })
    }

    /// What the `run` command needs for its configured policy.
    pub fn validate_for_run(&self) -> CliResult<()> {
        let Some(kind) = self.run.policy else {
            return Err(CliError::Config(
                "run.policy: required for the run command".into(),
            ));
        };
        match kind {
            PolicyKind::Fixed => {
                let alpha = self.run.alpha.ok_or_else(|| {
                    CliError::Config("run.alpha: required when run.policy = \"fixed\"".into())
                })?;
                if !(alpha >= 0.0) || !alpha.is_finite() {
                    return Err(CliError::Config(
                        "run.alpha: must be a nonnegative finite real".into(),
                    ));
                }
            }
            PolicyKind::Oplinucb => {
                self.grid()?;
                self.oplinucb_section()?;
            }
            PolicyKind::Doplinucb => {
                self.grid()?;
                self.doplinucb_section()?;
            }
        }
        Ok(())
    }

    /// What the `sweep` command needs: the grid and both meta-policies.
    pub fn validate_for_sweep(&self) -> CliResult<()> {
        self.grid()?;
        self.oplinucb_section()?;
        self.doplinucb_section()?;
        Ok(())
    }

    /// Row label of the summary table (the configuration axis).
    pub fn configuration_label(&self) -> String {
        match self.environment.kind {
            EnvironmentKind::Replay => "replay".to_string(),
            EnvironmentKind::Switching => format!(
                "switch={}",
                self.environment.switch_period.unwrap_or_default()
            ),
            EnvironmentKind::Synthetic => format!(
                "synthetic d={} K={}",
                self.environment.dim.unwrap_or_default(),
                self.environment.num_arms.unwrap_or_default()
            ),
        }
    }
}
