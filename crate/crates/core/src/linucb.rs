//! Disjoint-model LinUCB: per-arm ridge regression state, UCB scoring with a
//! supplied exploration value, arm selection, and reward updates.
//!
//! This is the inner bandit of both meta-policies. Every arm keeps its own
//! Gram matrix `A = I + Σ x xᵀ` and reward sums `b = Σ r x`; the coefficient
//! estimate `Θ = A⁻¹ b` is derived on demand, and the score of an arm at
//! context `x` is `Θᵀx + α·√(xᵀ A⁻¹ x)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, SpdMatrix};
use crate::{argmax_tiebreak, ArmId, Context, Error, Result, TieBreak};

/// Ridge regression state for a single arm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmModel {
    gram: SpdMatrix,
    reward_sums: Vec<f64>,
}

impl ArmModel {
    fn new(dim: usize) -> Result<Self> {
        Ok(Self {
            gram: SpdMatrix::identity(dim)?,
            reward_sums: vec![0.0; dim],
        })
    }

    /// Coefficient estimate Θ = A⁻¹ b.
    pub fn theta(&self) -> Result<Vec<f64>> {
        self.gram.solve(&self.reward_sums)
    }

    pub fn gram(&self) -> &SpdMatrix {
        &self.gram
    }

    pub fn reward_sums(&self) -> &[f64] {
        &self.reward_sums
    }
}

/// All per-arm models for one LinUCB instance.
///
/// Arms are initialized lazily: an arm that has never been scored or updated
/// behaves as `(A, b) = (I, 0)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinUcbState {
    dim: usize,
    num_arms: usize,
    arms: BTreeMap<ArmId, ArmModel>,
}

impl LinUcbState {
    pub fn new(dim: usize, num_arms: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "context dimension must be at least 1".into(),
            ));
        }
        if num_arms == 0 {
            return Err(Error::InvalidArgument(
                "arm count must be at least 1".into(),
            ));
        }
        Ok(Self {
            dim,
            num_arms,
            arms: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    /// Model for an arm, if it has been touched already.
    pub fn arm(&self, arm: ArmId) -> Option<&ArmModel> {
        self.arms.get(&arm)
    }

    fn check_context(&self, x: &Context) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.dim(),
            });
        }
        Ok(())
    }

    fn arm_mut(&mut self, arm: ArmId) -> Result<&mut ArmModel> {
        if arm.index() >= self.num_arms {
            return Err(Error::InvalidArgument(format!(
                "arm {} outside [0, {})",
                arm.index(),
                self.num_arms
            )));
        }
        let dim = self.dim;
        if !self.arms.contains_key(&arm) {
            self.arms.insert(arm, ArmModel::new(dim)?);
        }
        Ok(self.arms.get_mut(&arm).expect("just inserted"))
    }

    /// UCB score Θᵀx + α·√(xᵀA⁻¹x), initializing the arm if new.
    pub fn score(&mut self, arm: ArmId, x: &Context, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidArgument(
                "exploration value must be a nonnegative real".into(),
            ));
        }
        self.check_context(x)?;
        let model = self.arm_mut(arm)?;
        let theta = model.gram.solve(&model.reward_sums)?;
        let mean = dot(&theta, x.values());
        let width = model.gram.quad_form_inverse(x.values())?.sqrt();
        Ok(mean + alpha * width)
    }

    /// The arm with the largest UCB score; ties go to the lowest index.
    pub fn select_arm(&mut self, arms: &[ArmId], x: &Context, alpha: f64) -> Result<ArmId> {
        if arms.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot select from an empty arm set".into(),
            ));
        }
        let mut scores = Vec::with_capacity(arms.len());
        for &arm in arms {
            scores.push(self.score(arm, x, alpha)?);
        }
        let best = argmax_tiebreak(&scores, TieBreak::LowestIndex)?;
        Ok(arms[best])
    }

    /// Fold one observed reward into the chosen arm's model:
    /// A += x xᵀ and b += r·x. Only that arm's model changes.
    pub fn update(&mut self, arm: ArmId, x: &Context, reward: f64) -> Result<()> {
        if !reward.is_finite() {
            return Err(Error::InvalidArgument("reward must be finite".into()));
        }
        self.check_context(x)?;
        let model = self.arm_mut(arm)?;
        model.gram.rank_one_update(x.values())?;
        for (b, &xi) in model.reward_sums.iter_mut().zip(x.values()) {
            *b += reward * xi;
        }
        Ok(())
    }
}
