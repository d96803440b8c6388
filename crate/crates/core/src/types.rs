//! Shared domain types, argmax tie-breaking, and regret accounting.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Feature vector observed before each decision.
///
/// Entries are finite reals; the length stays fixed for the lifetime of an
/// experiment (environments and policies check it on every round).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Context {
    values: Vec<f64>,
}

impl Context {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "context must have at least one feature".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "context entry {i} is not finite"
            )));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl AsRef<[f64]> for Context {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Index of one of the `K` selectable actions.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct ArmId(pub usize);

impl ArmId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for ArmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One logged interaction: the unit of regret accounting and of the
/// tree-training data used by the dynamic meta-policy.
///
/// `optimal_reward` is the realized best reward across all arms, revealed by
/// the environment for evaluation only. It is `None` for environments that
/// cannot reveal counterfactuals, in which case regret is unavailable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: u64,
    pub context: Context,
    /// Exploration value used this round.
    pub alpha: f64,
    pub arm: ArmId,
    pub reward: f64,
    pub optimal_reward: Option<f64>,
}

/// Cumulative regret indexed by round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve {
    cumulative: Vec<f64>,
}

impl RegretCurve {
    pub fn as_slice(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Final cumulative regret, or 0 for an empty log.
    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// How to resolve ties between equal maximal scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Deterministic: the first index attaining the maximum.
    LowestIndex,
    /// Uniform among the tied indices, reproducible given the seed.
    SeededRandom(u64),
}

/// Index of a maximal score, with explicit tie-breaking.
pub fn argmax_tiebreak(scores: &[f64], mode: TieBreak) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument(
            "argmax over an empty score vector".into(),
        ));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("argmax over NaN scores".into()));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match mode {
        TieBreak::LowestIndex => Ok(scores
            .iter()
            .position(|&s| s == max)
            .expect("non-empty scores have a maximum")),
        TieBreak::SeededRandom(seed) => {
            let tied: Vec<usize> = scores
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == max)
                .map(|(i, _)| i)
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(tied[rng.random_range(0..tied.len())])
        }
    }
}

/// Running sum of (realized optimal reward − realized obtained reward).
///
/// Requires the counterfactual optimal reward on every record.
pub fn compute_regret(log: &[RoundRecord]) -> Result<RegretCurve> {
    let mut cumulative = Vec::with_capacity(log.len());
    let mut acc = 0.0;
    for rec in log {
        let optimal = rec
            .optimal_reward
            .ok_or(Error::MissingCounterfactual { t: rec.t })?;
        acc += optimal - rec.reward;
        cumulative.push(acc);
    }
    Ok(RegretCurve { cumulative })
}
