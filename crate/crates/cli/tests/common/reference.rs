//! Independent straight-line reference implementations of the two
//! meta-policies, used to check production trajectories step for step.
//!
//! Everything here is recomputed from first principles each round: ridge
//! scores come from rebuilding the Gram matrix and inverting it with
//! Gauss-Jordan, and the reference tree refits by naive recursive
//! partitioning over row-index sets. Only the RNG primitives (ChaCha
//! streams, Beta/Normal samplers) are shared with production, so the random
//! draws line up while all decision arithmetic is independent.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefRound {
    pub arm: usize,
    pub alpha: f64,
    pub reward: f64,
    pub optimal_reward: f64,
}

// ── Synthetic environment mirror ────────────────────────────────────────

pub struct RefSyntheticEnv {
    dim: usize,
    pub weights: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
    pub current: Vec<f64>,
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn sample_unit_ball(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut v = gaussian_vec(rng, dim);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        v[0] = 1.0;
    } else {
        let radius: f64 = rng.random::<f64>().powf(1.0 / dim as f64);
        v.iter_mut().for_each(|x| *x *= radius / norm);
    }
    v
}

impl RefSyntheticEnv {
    pub fn new(dim: usize, num_arms: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<Vec<f64>> = (0..num_arms)
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
        let current = sample_unit_ball(&mut rng, dim);
        Self {
            dim,
            weights,
            rng,
            current,
        }
    }

    fn expected(&self, arm: usize, x: &[f64]) -> f64 {
        self.weights[arm]
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    pub fn step(&mut self, arm: usize) -> (f64, f64) {
        let u: f64 = self.rng.random();
        let mut chosen = 0.0;
        let mut best = 0.0;
        for k in 0..self.weights.len() {
            let p = self.expected(k, &self.current);
            let r = if u < p { 1.0 } else { 0.0 };
            if k == arm {
                chosen = r;
            }
            best = f64::max(best, r);
        }
        self.current = sample_unit_ball(&mut self.rng, self.dim);
        (chosen, best)
    }
}

// ── Naive ridge scoring ─────────────────────────────────────────────────

fn gauss_jordan_inverse(a: &[f64], d: usize) -> Vec<f64> {
    let w = 2 * d;
    let mut m = vec![0.0; d * w];
    for i in 0..d {
        for j in 0..d {
            m[i * w + j] = a[i * d + j];
        }
        m[i * w + d + i] = 1.0;
    }
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&r1, &r2| {
                m[r1 * w + col]
                    .abs()
                    .partial_cmp(&m[r2 * w + col].abs())
                    .unwrap()
            })
            .unwrap();
        if pivot != col {
            for j in 0..w {
                m.swap(col * w + j, pivot * w + j);
            }
        }
        let p = m[col * w + col];
        for j in 0..w {
            m[col * w + j] /= p;
        }
        for row in 0..d {
            if row == col {
                continue;
            }
            let f = m[row * w + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                m[row * w + j] -= f * m[col * w + j];
            }
        }
    }
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            inv[i * d + j] = m[i * w + d + j];
        }
    }
    inv
}

/// Batch LinUCB score from the raw per-arm update history.
fn batch_score(history: &[(Vec<f64>, f64)], d: usize, x: &[f64], alpha: f64) -> f64 {
    let mut gram = vec![0.0; d * d];
    for i in 0..d {
        gram[i * d + i] = 1.0;
    }
    let mut b = vec![0.0; d];
    for (u, r) in history {
        for i in 0..d {
            for j in 0..d {
                gram[i * d + j] += u[i] * u[j];
            }
            b[i] += r * u[i];
        }
    }
    let inv = gauss_jordan_inverse(&gram, d);
    let theta: Vec<f64> = (0..d)
        .map(|i| (0..d).map(|j| inv[i * d + j] * b[j]).sum())
        .collect();
    let ax: Vec<f64> = (0..d)
        .map(|i| (0..d).map(|j| inv[i * d + j] * x[j]).sum())
        .collect();
    let mean: f64 = theta.iter().zip(x).map(|(t, v)| t * v).sum();
    let quad: f64 = x.iter().zip(&ax).map(|(v, a)| v * a).sum::<f64>().max(0.0);
    mean + alpha * quad.sqrt()
}

fn argmax_lowest(values: &[f64]) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v == max).unwrap()
}

fn select_arm(histories: &[Vec<(Vec<f64>, f64)>], d: usize, x: &[f64], alpha: f64) -> usize {
    let scores: Vec<f64> = histories
        .iter()
        .map(|h| batch_score(h, d, x, alpha))
        .collect();
    argmax_lowest(&scores)
}

// ── Reference OPLINUCB ──────────────────────────────────────────────────

pub fn run_reference_oplinucb(
    dim: usize,
    num_arms: usize,
    env_seed: u64,
    policy_rng: ChaCha8Rng,
    grid: &[f64],
    prior_success: f64,
    prior_failure: f64,
    horizon: usize,
) -> Vec<RefRound> {
    let mut env = RefSyntheticEnv::new(dim, num_arms, env_seed);
    let mut rng = policy_rng;
    let mut pulls = vec![0u64; grid.len()];
    let mut wins = vec![0.0f64; grid.len()];
    let mut histories: Vec<Vec<(Vec<f64>, f64)>> = vec![Vec::new(); num_arms];
    let mut rounds = Vec::with_capacity(horizon);

    for _ in 0..horizon {
        let x = env.current.clone();
        let mut draws = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let s = prior_success + wins[i];
            let f = prior_failure + pulls[i] as f64 - wins[i];
            let dist = Beta::new(s, f).unwrap();
            let theta: f64 = dist.sample(&mut rng).clamp(1e-12, 1.0 - 1e-12);
            draws.push(theta);
        }
        let index = argmax_lowest(&draws);
        let alpha = grid[index];
        let arm = select_arm(&histories, dim, &x, alpha);
        let (reward, optimal_reward) = env.step(arm);
        histories[arm].push((x, reward));
        pulls[index] += 1;
        wins[index] += reward;
        rounds.push(RefRound {
            arm,
            alpha,
            reward,
            optimal_reward,
        });
    }
    rounds
}

// ── Naive conditional-inference tree ────────────────────────────────────

#[derive(Debug, Clone, Copy)]
pub struct RefTreeConfig {
    pub significance: f64,
    pub min_leaf: usize,
    pub max_depth: u32,
}

enum RefNode {
    Leaf {
        prediction: f64,
    },
    Split {
        covariate: usize,
        threshold: f64,
        left: Box<RefNode>,
        right: Box<RefNode>,
    },
}

fn two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Association p-value of covariate j with the response over `active` rows
/// (unit weights), via the standardized linear statistic.
fn association_p(rows: &[Vec<f64>], ys: &[f64], active: &[usize], j: usize) -> f64 {
    let n = active.len() as f64;
    if n < 2.0 {
        return 1.0;
    }
    let gs: Vec<f64> = active.iter().map(|&i| rows[i][j]).collect();
    let yv: Vec<f64> = active.iter().map(|&i| ys[i]).collect();
    let gmin = gs.iter().copied().fold(f64::INFINITY, f64::min);
    let gmax = gs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ymin = yv.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = yv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if gmin == gmax || ymin == ymax {
        return 1.0;
    }
    let gbar: f64 = gs.iter().sum::<f64>() / n;
    let ybar: f64 = yv.iter().sum::<f64>() / n;
    let t: f64 = gs.iter().zip(&yv).map(|(g, y)| g * y).sum();
    let ss_g: f64 = gs.iter().map(|g| (g - gbar) * (g - gbar)).sum();
    let ss_y: f64 = yv.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let variance = ss_g * ss_y / (n - 1.0);
    if variance <= 0.0 {
        return 1.0;
    }
    let z = (t - n * gbar * ybar) / variance.sqrt();
    two_sided_p(z)
}

fn best_threshold(
    rows: &[Vec<f64>],
    ys: &[f64],
    active: &[usize],
    j: usize,
    min_leaf: usize,
) -> Option<f64> {
    let n = active.len() as f64;
    let ybar: f64 = active.iter().map(|&i| ys[i]).sum::<f64>() / n;
    let ss_y: f64 = active
        .iter()
        .map(|&i| (ys[i] - ybar) * (ys[i] - ybar))
        .sum();
    let mut sorted: Vec<usize> = active.to_vec();
    sorted.sort_by(|&a, &b| rows[a][j].partial_cmp(&rows[b][j]).unwrap());

    let mut best: Option<(f64, f64)> = None;
    let mut w_left = 0.0;
    let mut t_left = 0.0;
    let mut idx = 0;
    while idx < sorted.len() {
        let value = rows[sorted[idx]][j];
        while idx < sorted.len() && rows[sorted[idx]][j] == value {
            w_left += 1.0;
            t_left += ys[sorted[idx]];
            idx += 1;
        }
        if idx == sorted.len() {
            break;
        }
        let w_right = n - w_left;
        if (w_left as usize) < min_leaf || (w_right as usize) < min_leaf {
            continue;
        }
        let variance = (w_left * w_right / n) * ss_y / (n - 1.0);
        let z = if variance <= 0.0 {
            0.0
        } else {
            ((t_left - w_left * ybar) / variance.sqrt()).abs()
        };
        if best.is_none_or(|(bz, _)| z > bz) {
            best = Some((z, 0.5 * (value + rows[sorted[idx]][j])));
        }
    }
    best.map(|(_, threshold)| threshold)
}

fn grow(
    rows: &[Vec<f64>],
    ys: &[f64],
    active: Vec<usize>,
    config: &RefTreeConfig,
    depth: u32,
) -> RefNode {
    let prediction = active.iter().map(|&i| ys[i]).sum::<f64>() / active.len() as f64;
    let leaf = RefNode::Leaf { prediction };
    if depth >= config.max_depth {
        return leaf;
    }
    let m = rows[0].len();
    let mut best_p = f64::INFINITY;
    let mut best_j = 0;
    for j in 0..m {
        let p = (m as f64 * association_p(rows, ys, &active, j)).min(1.0);
        if p < best_p {
            best_p = p;
            best_j = j;
        }
    }
    if best_p > config.significance {
        return leaf;
    }
    let Some(threshold) = best_threshold(rows, ys, &active, best_j, config.min_leaf) else {
        return leaf;
    };
    let (left, right): (Vec<usize>, Vec<usize>) = active
        .iter()
        .partition(|&&i| rows[i][best_j] <= threshold);
    RefNode::Split {
        covariate: best_j,
        threshold,
        left: Box::new(grow(rows, ys, left, config, depth + 1)),
        right: Box::new(grow(rows, ys, right, config, depth + 1)),
    }
}

fn predict(node: &RefNode, x: &[f64]) -> f64 {
    match node {
        RefNode::Leaf { prediction } => *prediction,
        RefNode::Split {
            covariate,
            threshold,
            left,
            right,
        } => {
            if x[*covariate] <= *threshold {
                predict(left, x)
            } else {
                predict(right, x)
            }
        }
    }
}

// ── Reference DOPLINUCB ─────────────────────────────────────────────────

#[derive(Debug, Clone, Copy)]
pub struct RefDoplinucbConfig {
    pub warmup_rounds: u64,
    pub window_size: usize,
    pub refit_period: u64,
    pub uniform_alpha_prob: f64,
    pub tree: RefTreeConfig,
}

pub fn run_reference_doplinucb(
    dim: usize,
    num_arms: usize,
    env_seed: u64,
    policy_rng: ChaCha8Rng,
    grid: &[f64],
    config: RefDoplinucbConfig,
    horizon: usize,
) -> Vec<RefRound> {
    let mut env = RefSyntheticEnv::new(dim, num_arms, env_seed);
    let mut rng = policy_rng;
    let mut histories: Vec<Vec<(Vec<f64>, f64)>> = vec![Vec::new(); num_arms];
    let mut window: std::collections::VecDeque<(Vec<f64>, f64)> =
        std::collections::VecDeque::new();
    let mut tree: Option<RefNode> = None;
    let mut rounds_seen = 0u64;
    let mut rounds = Vec::with_capacity(horizon);

    for _ in 0..horizon {
        let x = env.current.clone();
        let index = match &tree {
            None => rng.random_range(0..grid.len()),
            Some(node) => {
                if config.uniform_alpha_prob > 0.0
                    && rng.random::<f64>() < config.uniform_alpha_prob
                {
                    rng.random_range(0..grid.len())
                } else {
                    let mut covariates = x.clone();
                    covariates.push(0.0);
                    let mut predictions = Vec::with_capacity(grid.len());
                    for &alpha in grid {
                        covariates[dim] = alpha;
                        predictions.push(predict(node, &covariates));
                    }
                    argmax_lowest(&predictions)
                }
            }
        };
        let alpha = grid[index];
        let arm = select_arm(&histories, dim, &x, alpha);
        let (reward, optimal_reward) = env.step(arm);
        histories[arm].push((x.clone(), reward));

        let mut row = x;
        row.push(alpha);
        window.push_back((row, reward));
        while window.len() > config.window_size {
            window.pop_front();
        }
        rounds_seen += 1;
        if rounds_seen >= config.warmup_rounds
            && (rounds_seen - config.warmup_rounds) % config.refit_period == 0
            && window.len() >= config.tree.min_leaf
        {
            let rows: Vec<Vec<f64>> = window.iter().map(|(c, _)| c.clone()).collect();
            let ys: Vec<f64> = window.iter().map(|(_, r)| *r).collect();
            let active: Vec<usize> = (0..rows.len()).collect();
            tree = Some(grow(&rows, &ys, active, &config.tree, 0));
        }
        rounds.push(RefRound {
            arm,
            alpha,
            reward,
            optimal_reward,
        });
    }
    rounds
}
