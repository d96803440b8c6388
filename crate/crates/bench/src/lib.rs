//! Seeded input builders shared by the benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ucbtune_core::ctree::LearningSample;
use ucbtune_core::linalg::SpdMatrix;
use ucbtune_core::linucb::LinUcbState;
use ucbtune_core::{ArmId, Context};

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// An SPD matrix grown from the identity by `updates` rank-one additions.
pub fn warmed_gram(d: usize, updates: usize, seed: u64) -> SpdMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gram = SpdMatrix::identity(d).unwrap();
    for _ in 0..updates {
        let x = random_vec(&mut rng, d);
        gram.rank_one_update(&x).unwrap();
    }
    gram
}

/// A two-arm LinUCB state fed with `updates` random rounds.
pub fn warmed_linucb(d: usize, updates: usize, seed: u64) -> LinUcbState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = LinUcbState::new(d, 2).unwrap();
    for _ in 0..updates {
        let arm = ArmId(rng.random_range(0..2));
        let x = Context::new(random_vec(&mut rng, d)).unwrap();
        let r = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        state.update(arm, &x, r).unwrap();
    }
    state
}

/// A numeric training window shaped like the dynamic policy's tree input:
/// standardized-ish features plus one exploration-value column, binary
/// responses correlated with a couple of covariates.
pub fn training_window(rows: usize, covariates: usize, seed: u64) -> LearningSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(rows);
    let mut responses = Vec::with_capacity(rows);
    for _ in 0..rows {
        let row = random_vec(&mut rng, covariates);
        let p = 0.5 + 0.3 * row[0] - 0.2 * row[covariates - 1];
        responses.push(if rng.random_bool(p.clamp(0.05, 0.95)) {
            1.0
        } else {
            0.0
        });
        data.push(row);
    }
    LearningSample::from_rows(&data, &responses).unwrap()
}
