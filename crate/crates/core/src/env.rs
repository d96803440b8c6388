//! Reward-generating processes: dataset replay (stationary), label-switching
//! replay (non-stationary), and synthetic linear-Bernoulli environments with
//! known optima.
//!
//! Every environment reveals the realized best reward across arms on each
//! step, for evaluation only, so cumulative regret is computable from logs.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ingest::EncodedDataset;
use crate::{ArmId, Context, Error, Result};

/// Outcome of playing one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvStep {
    pub reward: f64,
    /// Realized best reward across all arms this round (evaluation only).
    pub optimal_reward: f64,
}

pub trait Environment {
    fn dim(&self) -> usize;

    fn num_arms(&self) -> usize;

    /// Context for the upcoming round, or `None` once exhausted.
    fn current_context(&self) -> Option<&Context>;

    /// Play one arm and advance to the next round.
    fn step(&mut self, arm: ArmId) -> Result<EnvStep>;
}

fn check_arm(arm: ArmId, num_arms: usize) -> Result<()> {
    if arm.index() >= num_arms {
        return Err(Error::InvalidArgument(format!(
            "arm {} outside [0, {num_arms})",
            arm.index()
        )));
    }
    Ok(())
}

/// A logged binary-classification dataset presented as a two-armed bandit:
/// arm `k` pays 1 exactly when `k` equals the row's label, so the optimal
/// arm always pays 1.
///
/// Rows are shared, so cloning an environment to replay it from the start
/// is cheap.
#[derive(Debug, Clone)]
pub struct ReplayEnv {
    rows: Arc<Vec<(Context, u8)>>,
    cursor: usize,
}

impl ReplayEnv {
    pub fn new(rows: Vec<(Context, u8)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument(
                "replay environment needs at least one row".into(),
            ));
        }
        let dim = rows[0].0.dim();
        for (i, (ctx, label)) in rows.iter().enumerate() {
            if ctx.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: ctx.dim(),
                });
            }
            if *label > 1 {
                return Err(Error::InvalidArgument(format!(
                    "row {i}: label must be 0 or 1, got {label}"
                )));
            }
        }
        Ok(Self {
            rows: Arc::new(rows),
            cursor: 0,
        })
    }

    pub fn from_dataset(dataset: &EncodedDataset) -> Result<Self> {
        Self::new(dataset.rows().to_vec())
    }

    /// Present the rows in a seeded random order instead of dataset order.
    pub fn shuffled(self, seed: u64) -> Self {
        let mut rows = self.rows.as_ref().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Fisher-Yates
        for i in (1..rows.len()).rev() {
            let k = rng.random_range(0..=i);
            rows.swap(i, k);
        }
        Self {
            rows: Arc::new(rows),
            cursor: 0,
        }
    }

    /// Rewind to the first row (rows stay shared).
    pub fn reset(&mut self) {
        self.cursor = 0;
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn remaining(&self) -> usize {
        self.rows.len() - self.cursor
    }

    fn step_with_inversion(&mut self, arm: ArmId, inverted: bool) -> Result<EnvStep> {
        check_arm(arm, 2)?;
        let Some((_, label)) = self.rows.get(self.cursor) else {
            return Err(Error::EndOfStream);
        };
        let paying_arm = if inverted {
            1 - *label as usize
        } else {
            *label as usize
        };
        self.cursor += 1;
        Ok(EnvStep {
            reward: if arm.index() == paying_arm { 1.0 } else { 0.0 },
            optimal_reward: 1.0,
        })
    }
}

impl Environment for ReplayEnv {
    fn dim(&self) -> usize {
        self.rows[0].0.dim()
    }

    fn num_arms(&self) -> usize {
        2
    }

    fn current_context(&self) -> Option<&Context> {
        self.rows.get(self.cursor).map(|(ctx, _)| ctx)
    }

    fn step(&mut self, arm: ArmId) -> Result<EnvStep> {
        self.step_with_inversion(arm, false)
    }
}

/// Replay with the arm-label mapping inverted on every other block of
/// `switch_period` rounds: at rounds where ⌊t/s⌋ is odd, arm `k` pays 1
/// exactly when `k` differs from the label.
#[derive(Debug, Clone)]
pub struct SwitchingReplayEnv {
    base: ReplayEnv,
    switch_period: u64,
    t: u64,
}

/// Wrap a replay environment with period-`s` label inversion.
pub fn make_switching(base: ReplayEnv, switch_period: u64) -> Result<SwitchingReplayEnv> {
    if switch_period == 0 {
        return Err(Error::InvalidArgument(
            "switch period must be at least 1".into(),
        ));
    }
    Ok(SwitchingReplayEnv {
        base,
        switch_period,
        t: 0,
    })
}

impl SwitchingReplayEnv {
    pub fn switch_period(&self) -> u64 {
        self.switch_period
    }

    /// Whether the mapping is inverted for the upcoming round.
    pub fn inverted(&self) -> bool {
        (self.t / self.switch_period) % 2 == 1
    }
}

impl Environment for SwitchingReplayEnv {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn num_arms(&self) -> usize {
        2
    }

    fn current_context(&self) -> Option<&Context> {
        self.base.current_context()
    }

    fn step(&mut self, arm: ArmId) -> Result<EnvStep> {
        let inverted = self.inverted();
        let step = self.base.step_with_inversion(arm, inverted)?;
        self.t += 1;
        Ok(step)
    }
}

/// Linear-Bernoulli environment: contexts are drawn i.i.d. uniform on the
/// unit ball and arm `k` pays `Bernoulli(clamp(μ_kᵀx, 0, 1))`.
///
/// All arms' rewards in a round share one uniform draw (comonotone
/// coupling), so each arm's reward keeps its marginal law while the realized
/// best reward is exactly the draw of the arm with the highest expected
/// reward. Arms with identical weights then receive identical rewards.
#[derive(Debug, Clone)]
pub struct SyntheticLinearEnv {
    dim: usize,
    weights: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
    current: Context,
}

/// Draw `num_arms` fixed unit-norm weight vectors (seeded) and start the
/// i.i.d. context stream.
pub fn make_synthetic(dim: usize, num_arms: usize, seed: u64) -> Result<SyntheticLinearEnv> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "context dimension must be at least 1".into(),
        ));
    }
    if num_arms < 2 {
        return Err(Error::InvalidArgument(
            "synthetic environment needs at least 2 arms".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..num_arms)
        .map(|_| {
            let mut w = gaussian_vec(&mut rng, dim);
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                w.iter_mut().for_each(|v| *v /= norm);
            } else {
                w[0] = 1.0;
            }
            w
        })
        .collect();
    SyntheticLinearEnv::with_weights(weights, rng)
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn sample_unit_ball(rng: &mut ChaCha8Rng, dim: usize) -> Context {
    let mut v = gaussian_vec(rng, dim);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        v[0] = 1.0;
    } else {
        let radius: f64 = rng.random::<f64>().powf(1.0 / dim as f64);
        v.iter_mut().for_each(|x| *x *= radius / norm);
    }
    Context::new(v).expect("ball samples are finite")
}

impl SyntheticLinearEnv {
    /// Build from explicit per-arm weight vectors; the RNG drives both the
    /// context stream and the reward draws.
    pub fn with_weights(weights: Vec<Vec<f64>>, mut rng: ChaCha8Rng) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidArgument(
                "synthetic environment needs at least 2 arms".into(),
            ));
        }
        let dim = weights[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "context dimension must be at least 1".into(),
            ));
        }
        for w in &weights {
            if w.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: w.len(),
                });
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(
                    "arm weights must be finite".into(),
                ));
            }
        }
        let current = sample_unit_ball(&mut rng, dim);
        Ok(Self {
            dim,
            weights,
            rng,
            current,
        })
    }

    pub fn arm_weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// clamp(μ_kᵀx, 0, 1): the expected reward of arm `k` at context `x`.
    pub fn expected_reward(&self, arm: ArmId, x: &Context) -> f64 {
        self.weights[arm.index()]
            .iter()
            .zip(x.values())
            .map(|(w, v)| w * v)
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }
}

impl Environment for SyntheticLinearEnv {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_arms(&self) -> usize {
        self.weights.len()
    }

    fn current_context(&self) -> Option<&Context> {
        Some(&self.current)
    }

    fn step(&mut self, arm: ArmId) -> Result<EnvStep> {
        check_arm(arm, self.weights.len())?;
        let u: f64 = self.rng.random();
        let mut chosen = 0.0;
        let mut best = 0.0;
        for (k, _) in self.weights.iter().enumerate() {
            let p = self.expected_reward(ArmId(k), &self.current);
            let r = if u < p { 1.0 } else { 0.0 };
            if k == arm.index() {
                chosen = r;
            }
            best = f64::max(best, r);
        }
        self.current = sample_unit_ball(&mut self.rng, self.dim);
        Ok(EnvStep {
            reward: chosen,
            optimal_reward: best,
        })
    }
}
