//! The three runnable policies (fixed-α LinUCB, OPLINUCB, and DOPLINUCB)
//! behind a uniform step contract: observe a context, choose an arm, receive
//! a reward, update.
//!
//! OPLINUCB layers Beta-Bernoulli Thompson sampling over the exploration
//! grid: each round it samples one θ per candidate, plays the argmax
//! candidate's exploration value inside LinUCB, and credits the realized
//! reward entirely to that candidate.
//!
//! DOPLINUCB instead predicts the reward of every `(context ⊕ candidate)`
//! pair with a conditional-inference tree fitted on a sliding window of
//! logged rounds, and plays the argmax candidate. Until the first tree
//! exists the candidate is drawn uniformly (warm-up).

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::alpha::{AlphaGrid, AlphaPosterior};
use crate::ctree::{self, CTree, CTreeConfig, LearningSample};
use crate::env::Environment;
use crate::linucb::LinUcbState;
use crate::{argmax_tiebreak, ArmId, Context, Error, Result, RoundRecord, TieBreak};

/// Uniform policy contract used by the experiment harness.
///
/// `choose` may advance the policy's RNG and record which candidate is
/// pending, but learning state changes only in `learn`.
pub trait Policy {
    /// Pick an arm for this context; returns the arm and the exploration
    /// value used.
    fn choose(&mut self, context: &Context) -> Result<(ArmId, f64)>;

    /// Feed back the observed reward for the round started by `choose`.
    fn learn(&mut self, context: &Context, arm: ArmId, reward: f64) -> Result<()>;

    /// Stable identifier used in snapshots and output labels.
    fn kind(&self) -> &'static str;

    /// Versioned state blob; restore with [`restore_policy`] or the
    /// concrete type's `restore`.
    fn snapshot(&self) -> Result<Vec<u8>>;
}

const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SnapshotEnvelope<T> {
    version: u32,
    kind: String,
    state: T,
}

fn snapshot_of<T: Serialize>(kind: &str, state: &T) -> Result<Vec<u8>> {
    serde_json::to_vec(&SnapshotEnvelope {
        version: SNAPSHOT_VERSION,
        kind: kind.to_string(),
        state,
    })
    .map_err(|e| Error::Snapshot(e.to_string()))
}

fn restore_as<T: DeserializeOwned>(expected_kind: &str, bytes: &[u8]) -> Result<T> {
    let envelope: SnapshotEnvelope<T> =
        serde_json::from_slice(bytes).map_err(|e| Error::Snapshot(e.to_string()))?;
    if envelope.version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!(
            "unsupported snapshot version {}",
            envelope.version
        )));
    }
    if envelope.kind != expected_kind {
        return Err(Error::Snapshot(format!(
            "snapshot holds a '{}' policy, expected '{expected_kind}'",
            envelope.kind
        )));
    }
    Ok(envelope.state)
}

fn snapshot_kind(bytes: &[u8]) -> Result<String> {
    #[derive(Deserialize)]
    struct KindOnly {
        kind: String,
    }
    serde_json::from_slice::<KindOnly>(bytes)
        .map(|k| k.kind)
        .map_err(|e| Error::Snapshot(e.to_string()))
}

/// Restore any policy snapshot produced by [`Policy::snapshot`].
pub fn restore_policy(bytes: &[u8]) -> Result<Box<dyn Policy>> {
    match snapshot_kind(bytes)?.as_str() {
        FixedAlphaPolicy::KIND => Ok(Box::new(FixedAlphaPolicy::restore(bytes)?)),
        OplinucbPolicy::KIND => Ok(Box::new(OplinucbPolicy::restore(bytes)?)),
        DoplinucbPolicy::KIND => Ok(Box::new(DoplinucbPolicy::restore(bytes)?)),
        other => Err(Error::Snapshot(format!("unknown policy kind '{other}'"))),
    }
}

fn arm_ids(num_arms: usize) -> Vec<ArmId> {
    (0..num_arms).map(ArmId).collect()
}

// ── Fixed-α LinUCB ──────────────────────────────────────────────────────

/// LinUCB with a constant exploration value: the grid baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedAlphaPolicy {
    alpha: f64,
    inner: LinUcbState,
    arms: Vec<ArmId>,
}

impl FixedAlphaPolicy {
    pub const KIND: &'static str = "fixed_alpha";

    pub fn new(dim: usize, num_arms: usize, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(
                "exploration value must be a nonnegative finite real".into(),
            ));
        }
        Ok(Self {
            alpha,
            inner: LinUcbState::new(dim, num_arms)?,
            arms: arm_ids(num_arms),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn inner(&self) -> &LinUcbState {
        &self.inner
    }

    pub fn restore(bytes: &[u8]) -> Result<Self> {
        restore_as(Self::KIND, bytes)
    }
}

impl Policy for FixedAlphaPolicy {
    fn choose(&mut self, context: &Context) -> Result<(ArmId, f64)> {
        let arm = self.inner.select_arm(&self.arms, context, self.alpha)?;
        Ok((arm, self.alpha))
    }

    fn learn(&mut self, context: &Context, arm: ArmId, reward: f64) -> Result<()> {
        self.inner.update(arm, context, reward)
    }

    fn kind(&self) -> &'static str {
        Self::KIND
    }

    fn snapshot(&self) -> Result<Vec<u8>> {
        snapshot_of(Self::KIND, self)
    }
}

// ── OPLINUCB ────────────────────────────────────────────────────────────

/// Thompson sampling over the exploration grid around a LinUCB core.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OplinucbPolicy {
    grid: AlphaGrid,
    posterior: AlphaPosterior,
    inner: LinUcbState,
    arms: Vec<ArmId>,
    rng: ChaCha8Rng,
    pending_alpha: Option<usize>,
    fractional_rewards: bool,
}

impl OplinucbPolicy {
    pub const KIND: &'static str = "oplinucb";

    pub fn new(
        dim: usize,
        num_arms: usize,
        grid: AlphaGrid,
        prior_success: f64,
        prior_failure: f64,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let posterior = AlphaPosterior::new(grid.len(), prior_success, prior_failure)?;
        Ok(Self {
            posterior,
            inner: LinUcbState::new(dim, num_arms)?,
            arms: arm_ids(num_arms),
            grid,
            rng,
            pending_alpha: None,
            fractional_rewards: false,
        })
    }

    /// Accept rewards in (0, 1) by converting them to Bernoulli trials
    /// before the posterior update. Off by default; the stock environments
    /// only emit {0, 1}.
    pub fn with_fractional_rewards(mut self) -> Self {
        self.fractional_rewards = true;
        self
    }

    pub fn grid(&self) -> &AlphaGrid {
        &self.grid
    }

    pub fn posterior(&self) -> &AlphaPosterior {
        &self.posterior
    }

    pub fn inner(&self) -> &LinUcbState {
        &self.inner
    }

    pub fn restore(bytes: &[u8]) -> Result<Self> {
        restore_as(Self::KIND, bytes)
    }
}

impl Policy for OplinucbPolicy {
    fn choose(&mut self, context: &Context) -> Result<(ArmId, f64)> {
        let (index, alpha) = self.posterior.sample_select(&self.grid, &mut self.rng)?;
        let arm = self.inner.select_arm(&self.arms, context, alpha)?;
        self.pending_alpha = Some(index);
        Ok((arm, alpha))
    }

    fn learn(&mut self, context: &Context, arm: ArmId, reward: f64) -> Result<()> {
        let index = self.pending_alpha.take().ok_or_else(|| {
            Error::InvalidState("learn called without a pending choose".into())
        })?;
        self.inner.update(arm, context, reward)?;
        if self.fractional_rewards && reward != 0.0 && reward != 1.0 {
            self.posterior
                .update_fractional(index, reward, &mut self.rng)
        } else {
            self.posterior.update(index, reward)
        }
    }

    fn kind(&self) -> &'static str {
        Self::KIND
    }

    fn snapshot(&self) -> Result<Vec<u8>> {
        snapshot_of(Self::KIND, self)
    }
}

// ── DOPLINUCB ───────────────────────────────────────────────────────────

/// Tree-training and candidate-selection knobs for [`DoplinucbPolicy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoplinucbConfig {
    /// Rounds of uniform candidate draws before the first tree fit.
    pub warmup_rounds: u64,
    /// Sliding window of logged rounds kept as tree-training data.
    pub window_size: usize,
    /// Rounds between tree refits after warm-up.
    pub refit_period: u64,
    /// Probability of drawing the candidate uniformly even when a tree
    /// exists. Keeps the training window covering the whole grid; without
    /// it the window degenerates to a single exploration value and later
    /// refits can no longer rank candidates. Set 0 to disable.
    pub uniform_alpha_prob: f64,
    pub tree: CTreeConfig,
}

impl Default for DoplinucbConfig {
    fn default() -> Self {
        Self {
            warmup_rounds: 5000,
            window_size: 5000,
            refit_period: 500,
            uniform_alpha_prob: 0.05,
            tree: CTreeConfig::default(),
        }
    }
}

impl DoplinucbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(Error::InvalidArgument(
                "window size must be at least 1".into(),
            ));
        }
        if self.refit_period == 0 {
            return Err(Error::InvalidArgument(
                "refit period must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.uniform_alpha_prob) {
            return Err(Error::InvalidArgument(
                "uniform candidate probability must lie in [0, 1]".into(),
            ));
        }
        self.tree.validate()
    }
}

/// Per-context exploration selection through a conditional-inference tree
/// over `(context ⊕ candidate) → reward`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoplinucbPolicy {
    grid: AlphaGrid,
    config: DoplinucbConfig,
    inner: LinUcbState,
    arms: Vec<ArmId>,
    tree: Option<CTree>,
    training_log: VecDeque<(Vec<f64>, f64)>,
    rounds_seen: u64,
    refit_count: u64,
    rng: ChaCha8Rng,
    pending_alpha: Option<usize>,
}

impl DoplinucbPolicy {
    pub const KIND: &'static str = "doplinucb";

    pub fn new(
        dim: usize,
        num_arms: usize,
        grid: AlphaGrid,
        config: DoplinucbConfig,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            inner: LinUcbState::new(dim, num_arms)?,
            arms: arm_ids(num_arms),
            grid,
            config,
            tree: None,
            training_log: VecDeque::new(),
            rounds_seen: 0,
            refit_count: 0,
            rng,
            pending_alpha: None,
        })
    }

    pub fn grid(&self) -> &AlphaGrid {
        &self.grid
    }

    pub fn config(&self) -> &DoplinucbConfig {
        &self.config
    }

    pub fn tree(&self) -> Option<&CTree> {
        self.tree.as_ref()
    }

    pub fn inner(&self) -> &LinUcbState {
        &self.inner
    }

    pub fn rounds_seen(&self) -> u64 {
        self.rounds_seen
    }

    /// Periodic refits performed after the initial fit.
    pub fn refit_count(&self) -> u64 {
        self.refit_count
    }

    pub fn training_log_len(&self) -> usize {
        self.training_log.len()
    }

    pub fn restore(bytes: &[u8]) -> Result<Self> {
        restore_as(Self::KIND, bytes)
    }

    /// Refit the tree on the current window. A window smaller than the
    /// tree's minimum leaf weight is left alone (no-op, logged).
    pub fn refit(&mut self) -> Result<bool> {
        if self.training_log.len() < self.config.tree.min_leaf_weight as usize {
            log::warn!(
                "tree refit skipped: window holds {} rows, need at least {}",
                self.training_log.len(),
                self.config.tree.min_leaf_weight
            );
            return Ok(false);
        }
        let rows: Vec<Vec<f64>> = self.training_log.iter().map(|(c, _)| c.clone()).collect();
        let responses: Vec<f64> = self.training_log.iter().map(|(_, r)| *r).collect();
        let sample = LearningSample::from_rows(&rows, &responses)?;
        self.tree = Some(ctree::fit(&sample, &self.config.tree)?);
        Ok(true)
    }

    fn predict_candidates(&self, tree: &CTree, context: &Context) -> Result<usize> {
        let dim = context.dim();
        let mut covariates = Vec::with_capacity(dim + 1);
        covariates.extend_from_slice(context.values());
        covariates.push(0.0);
        let mut predictions = Vec::with_capacity(self.grid.len());
        for &alpha in self.grid.values() {
            covariates[dim] = alpha;
            predictions.push(tree.predict(&covariates));
        }
        argmax_tiebreak(&predictions, TieBreak::LowestIndex)
    }
}

impl Policy for DoplinucbPolicy {
    fn choose(&mut self, context: &Context) -> Result<(ArmId, f64)> {
        let index = match &self.tree {
            None => self.rng.random_range(0..self.grid.len()),
            Some(tree) => {
                if self.config.uniform_alpha_prob > 0.0
                    && self.rng.random::<f64>() < self.config.uniform_alpha_prob
                {
                    self.rng.random_range(0..self.grid.len())
                } else {
                    self.predict_candidates(tree, context)?
                }
            }
        };
        let alpha = self.grid.values()[index];
        let arm = self.inner.select_arm(&self.arms, context, alpha)?;
        self.pending_alpha = Some(index);
        Ok((arm, alpha))
    }

    fn learn(&mut self, context: &Context, arm: ArmId, reward: f64) -> Result<()> {
        let index = self.pending_alpha.take().ok_or_else(|| {
            Error::InvalidState("learn called without a pending choose".into())
        })?;
        self.inner.update(arm, context, reward)?;

        let mut row = Vec::with_capacity(context.dim() + 1);
        row.extend_from_slice(context.values());
        row.push(self.grid.values()[index]);
        self.training_log.push_back((row, reward));
        while self.training_log.len() > self.config.window_size {
            self.training_log.pop_front();
        }

        self.rounds_seen += 1;
        if self.rounds_seen >= self.config.warmup_rounds
            && (self.rounds_seen - self.config.warmup_rounds) % self.config.refit_period == 0
        {
            let had_tree = self.tree.is_some();
            if self.refit()? && had_tree {
                self.refit_count += 1;
            }
        }
        Ok(())
    }

    fn kind(&self) -> &'static str {
        Self::KIND
    }

    fn snapshot(&self) -> Result<Vec<u8>> {
        snapshot_of(Self::KIND, self)
    }
}

// ── Round driver ────────────────────────────────────────────────────────

/// Play one policy-environment round and log it.
pub fn play_round<P, E>(policy: &mut P, env: &mut E, t: u64) -> Result<RoundRecord>
where
    P: Policy + ?Sized,
    E: Environment + ?Sized,
{
    let context = env.current_context().cloned().ok_or(Error::EndOfStream)?;
    let (arm, alpha) = policy.choose(&context)?;
    let step = env.step(arm)?;
    policy.learn(&context, arm, step.reward)?;
    Ok(RoundRecord {
        t,
        context,
        alpha,
        arm,
        reward: step.reward,
        optimal_reward: Some(step.optimal_reward),
    })
}

/// Play up to `horizon` rounds, stopping early if the environment runs out.
pub fn run_rounds<P, E>(policy: &mut P, env: &mut E, horizon: u64) -> Result<Vec<RoundRecord>>
where
    P: Policy + ?Sized,
    E: Environment + ?Sized,
{
    let mut records = Vec::with_capacity(horizon.min(1 << 20) as usize);
    for t in 0..horizon {
        if env.current_context().is_none() {
            break;
        }
        records.push(play_round(policy, env, t)?);
    }
    Ok(records)
}
