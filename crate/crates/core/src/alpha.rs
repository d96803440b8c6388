//! Beta-Bernoulli Thompson sampling over the candidate exploration grid:
//! the outer bandit that picks one exploration value per round and credits
//! the round's realized reward to it.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::{argmax_tiebreak, Error, Result, TieBreak};

/// Sorted grid of distinct candidate exploration values, each > 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    values: Vec<f64>,
}

impl AlphaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "exploration grid must be non-empty".into(),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "grid value {i} must be a positive finite real, got {v}"
                )));
            }
            if i > 0 && values[i - 1] >= v {
                return Err(Error::InvalidArgument(
                    "grid values must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { values })
    }

    /// Inclusive arithmetic progression `start, start+step, ..., ≤ stop`.
    pub fn from_range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start > 0.0 && step > 0.0 && stop >= start) {
            return Err(Error::InvalidArgument(format!(
                "invalid grid range {start}:{stop}:{step}"
            )));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let values = (0..count).map(|i| start + i as f64 * step).collect();
        Self::new(values)
    }

    /// The 100-point grid 0.01, 0.02, ..., 1.00.
    pub fn hundredths() -> Self {
        Self::new((1..=100).map(|i| i as f64 * 0.01).collect()).expect("static grid is valid")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.values.get(index).copied()
    }
}

/// Per-candidate Thompson-sampling state: prior shape plus pull count and
/// cumulative reward. The effective posterior of candidate `i` is
/// `Beta(S0 + rf_i, F0 + n_i − rf_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaPosterior {
    prior_success: f64,
    prior_failure: f64,
    pulls: Vec<u64>,
    cum_reward: Vec<f64>,
}

impl AlphaPosterior {
    pub fn new(num_candidates: usize, prior_success: f64, prior_failure: f64) -> Result<Self> {
        if num_candidates == 0 {
            return Err(Error::InvalidArgument(
                "posterior needs at least one candidate".into(),
            ));
        }
        if !(prior_success > 0.0 && prior_failure > 0.0)
            || !prior_success.is_finite()
            || !prior_failure.is_finite()
        {
            return Err(Error::InvalidArgument(
                "prior shape parameters must be positive finite reals".into(),
            ));
        }
        Ok(Self {
            prior_success,
            prior_failure,
            pulls: vec![0; num_candidates],
            cum_reward: vec![0.0; num_candidates],
        })
    }

    /// Uniform Beta(1, 1) priors.
    pub fn uniform(num_candidates: usize) -> Result<Self> {
        Self::new(num_candidates, 1.0, 1.0)
    }

    pub fn num_candidates(&self) -> usize {
        self.pulls.len()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn cumulative_rewards(&self) -> &[f64] {
        &self.cum_reward
    }

    /// Effective Beta shape (successes, failures) of candidate `i`.
    pub fn shape(&self, index: usize) -> (f64, f64) {
        let s = self.prior_success + self.cum_reward[index];
        let f = self.prior_failure + self.pulls[index] as f64 - self.cum_reward[index];
        (s, f)
    }

    pub fn posterior_mean(&self, index: usize) -> f64 {
        let (s, f) = self.shape(index);
        s / (s + f)
    }

    /// Draw θᵢ from every candidate's posterior and return the argmax
    /// (index and grid value). Ties go to the lowest index.
    pub fn sample_select<R: Rng + ?Sized>(
        &self,
        grid: &AlphaGrid,
        rng: &mut R,
    ) -> Result<(usize, f64)> {
        if grid.len() != self.num_candidates() {
            return Err(Error::DimensionMismatch {
                expected: self.num_candidates(),
                actual: grid.len(),
            });
        }
        let mut draws = Vec::with_capacity(self.num_candidates());
        for i in 0..self.num_candidates() {
            let (s, f) = self.shape(i);
            if !(s > 0.0 && f > 0.0) {
                return Err(Error::InvalidState(format!(
                    "candidate {i} has degenerate posterior shape ({s}, {f})"
                )));
            }
            let dist = Beta::new(s, f)
                .map_err(|e| Error::InvalidState(format!("candidate {i}: {e}")))?;
            // Guard the open interval against rounding at extreme shapes.
            let theta: f64 = dist.sample(rng).clamp(1e-12, 1.0 - 1e-12);
            draws.push(theta);
        }
        let index = argmax_tiebreak(&draws, TieBreak::LowestIndex)?;
        Ok((index, grid.values()[index]))
    }

    /// Record one pull of candidate `index` with a Bernoulli reward.
    pub fn update(&mut self, index: usize, reward: f64) -> Result<()> {
        if index >= self.num_candidates() {
            return Err(Error::InvalidArgument(format!(
                "candidate index {index} out of range"
            )));
        }
        if reward != 0.0 && reward != 1.0 {
            return Err(Error::InvalidArgument(format!(
                "posterior update needs a reward in {{0, 1}}, got {reward}"
            )));
        }
        self.pulls[index] += 1;
        self.cum_reward[index] += reward;
        Ok(())
    }

    /// Fractional rewards in [0, 1] enter as a Bernoulli trial with success
    /// probability `reward`, keeping the Beta posterior conjugate.
    pub fn update_fractional<R: Rng + ?Sized>(
        &mut self,
        index: usize,
        reward: f64,
        rng: &mut R,
    ) -> Result<()> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::InvalidArgument(format!(
                "fractional reward must lie in [0, 1], got {reward}"
            )));
        }
        let outcome = if rng.random_bool(reward) { 1.0 } else { 0.0 };
        self.update(index, outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_validation() {
        assert!(AlphaGrid::new(vec![]).is_err());
        assert!(AlphaGrid::new(vec![0.0, 0.5]).is_err());
        assert!(AlphaGrid::new(vec![0.5, 0.5]).is_err());
        assert!(AlphaGrid::new(vec![0.5, 0.2]).is_err());
        assert!(AlphaGrid::new(vec![0.1, 0.2, 0.9]).is_ok());
    }

    #[test]
    fn hundredths_grid_matches_from_range() {
        let grid = AlphaGrid::hundredths();
        assert_eq!(grid.len(), 100);
        assert!((grid.values()[0] - 0.01).abs() < 1e-15);
        assert!((grid.values()[99] - 1.0).abs() < 1e-15);
        let ranged = AlphaGrid::from_range(0.01, 1.0, 0.01).unwrap();
        assert_eq!(ranged.len(), 100);
    }

    #[test]
    fn single_candidate_always_selected() {
        let grid = AlphaGrid::new(vec![0.3]).unwrap();
        let post = AlphaPosterior::uniform(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let (i, a) = post.sample_select(&grid, &mut rng).unwrap();
            assert_eq!(i, 0);
            assert_eq!(a, 0.3);
        }
    }

    #[test]
    fn lopsided_posteriors_dominate_selection() {
        // Candidate 0 carries 99 successes in 99 pulls (posterior Beta(100, 1)),
        // candidate 1 carries 99 failures (posterior Beta(1, 100)).
        let grid = AlphaGrid::new(vec![0.1, 0.2]).unwrap();
        let mut post = AlphaPosterior::uniform(2).unwrap();
        for _ in 0..99 {
            post.update(0, 1.0).unwrap();
            post.update(1, 0.0).unwrap();
        }
        assert_eq!(post.shape(0), (100.0, 1.0));
        assert_eq!(post.shape(1), (1.0, 100.0));

        // Independent oracle for P(X > Y), X ~ Beta(100, 1), Y ~ Beta(1, 100),
        // via the exact inverse CDFs X = U^(1/100), Y = 1 - V^(1/100).
        let mut oracle_rng = ChaCha8Rng::seed_from_u64(77);
        let mut oracle_wins = 0u64;
        let draws = 100_000u64;
        for _ in 0..draws {
            let u: f64 = oracle_rng.random_range(0.0..1.0);
            let v: f64 = oracle_rng.random_range(0.0..1.0);
            let x = u.powf(1.0 / 100.0);
            let y = 1.0 - v.powf(1.0 / 100.0);
            if x > y {
                oracle_wins += 1;
            }
        }
        let oracle_freq = oracle_wins as f64 / draws as f64;
        assert!(oracle_freq >= 0.99, "oracle P(X>Y) = {oracle_freq}");

        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let mut wins = 0u64;
        for _ in 0..draws {
            let (i, _) = post.sample_select(&grid, &mut rng).unwrap();
            if i == 0 {
                wins += 1;
            }
        }
        let freq = wins as f64 / draws as f64;
        assert!(freq >= 0.99, "selection frequency {freq}");
        assert!((freq - oracle_freq).abs() < 0.005);
    }

    #[test]
    fn uniform_priors_select_uniformly() {
        let grid = AlphaGrid::hundredths();
        let post = AlphaPosterior::uniform(100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 100_000usize;
        let mut counts = vec![0u64; 100];
        for _ in 0..draws {
            let (i, _) = post.sample_select(&grid, &mut rng).unwrap();
            counts[i] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / draws as f64;
            assert!(
                (freq - 0.01).abs() <= 0.02,
                "candidate {i} frequency {freq} outside 1/N ± 0.02"
            );
        }
    }

    #[test]
    fn update_success_and_failure_shapes() {
        let mut post = AlphaPosterior::uniform(2).unwrap();
        post.update(0, 1.0).unwrap();
        assert_eq!(post.shape(0), (2.0, 1.0));
        post.update(1, 0.0).unwrap();
        assert_eq!(post.shape(1), (1.0, 2.0));
    }

    #[test]
    fn count_accumulation_matches_shape_formula() {
        let mut post = AlphaPosterior::uniform(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut successes = 0u64;
        let n = 200u64;
        for _ in 0..n {
            let r = if rng.random_bool(0.7) { 1.0 } else { 0.0 };
            if r == 1.0 {
                successes += 1;
            }
            post.update(0, r).unwrap();
        }
        assert_eq!(
            post.shape(0),
            (1.0 + successes as f64, 1.0 + (n - successes) as f64)
        );
        assert_eq!(post.pulls()[0], n);
    }

    #[test]
    fn updating_one_candidate_leaves_others_untouched() {
        let mut post = AlphaPosterior::uniform(4).unwrap();
        post.update(1, 1.0).unwrap();
        post.update(1, 0.0).unwrap();
        for i in [0usize, 2, 3] {
            assert_eq!(post.shape(i), (1.0, 1.0));
            assert_eq!(post.pulls()[i], 0);
        }
    }

    #[test]
    fn rejects_non_bernoulli_reward() {
        let mut post = AlphaPosterior::uniform(2).unwrap();
        assert!(post.update(0, 0.5).is_err());
        assert!(post.update(0, -1.0).is_err());
        assert!(post.update(7, 1.0).is_err());
    }

    #[test]
    fn fractional_path_is_bernoulli() {
        let mut post = AlphaPosterior::uniform(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            post.update_fractional(0, 0.25, &mut rng).unwrap();
        }
        let mean = post.cumulative_rewards()[0] / post.pulls()[0] as f64;
        assert!((mean - 0.25).abs() < 0.05);
    }

    #[test]
    fn sample_means_match_analytic_means() {
        let configs = [(1.0, 1.0, 10u64, 7u64), (2.0, 3.0, 25, 5), (1.0, 1.0, 0, 0)];
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &(s0, f0, n, successes) in &configs {
            let mut post = AlphaPosterior::new(1, s0, f0).unwrap();
            for k in 0..n {
                post.update(0, if k < successes { 1.0 } else { 0.0 }).unwrap();
            }
            let (s, f) = post.shape(0);
            let dist = Beta::new(s, f).unwrap();
            let draws = 100_000usize;
            let mut acc = 0.0;
            for _ in 0..draws {
                acc += dist.sample(&mut rng);
            }
            let sample_mean = acc / draws as f64;
            assert!(
                (sample_mean - post.posterior_mean(0)).abs() < 0.01,
                "sample mean {sample_mean} vs analytic {}",
                post.posterior_mean(0)
            );
        }
    }

    #[test]
    fn sampled_values_stay_in_open_interval() {
        let mut post = AlphaPosterior::uniform(2).unwrap();
        for _ in 0..500 {
            post.update(0, 1.0).unwrap();
            post.update(1, 0.0).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for i in 0..2 {
            let (s, f) = post.shape(i);
            let dist = Beta::new(s, f).unwrap();
            for _ in 0..50_000 {
                let theta: f64 = dist.sample(&mut rng).clamp(1e-12, 1.0 - 1e-12);
                assert!(theta > 0.0 && theta < 1.0);
            }
        }
    }
}
