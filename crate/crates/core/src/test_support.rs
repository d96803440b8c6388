//! Independent numeric oracles shared by the unit tests.
//!
//! Everything here recomputes results from first principles (dense
//! Gauss-Jordan inversion, batch closed forms) and shares no code with the
//! incremental implementation paths it checks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn oracle_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub(crate) fn oracle_mat_vec(m: &[f64], d: usize, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for i in 0..d {
        for j in 0..d {
            out[i] += m[i * d + j] * x[j];
        }
    }
    out
}

/// Dense inversion by Gauss-Jordan elimination with partial pivoting.
pub(crate) fn gauss_jordan_inverse(a: &[f64], d: usize) -> Vec<f64> {
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

/// Closed-form ridge estimate (I + Σ x xᵀ)⁻¹ (Σ r x) over a batch of
/// (context, reward) pairs.
pub(crate) fn batch_ridge_theta(updates: &[(Vec<f64>, f64)], d: usize) -> Vec<f64> {
    let mut gram = vec![0.0; d * d];
    for i in 0..d {
        gram[i * d + i] = 1.0;
    }
    let mut b = vec![0.0; d];
    for (x, r) in updates {
        for i in 0..d {
            for j in 0..d {
                gram[i * d + j] += x[i] * x[j];
            }
            b[i] += r * x[i];
        }
    }
    let inv = gauss_jordan_inverse(&gram, d);
    oracle_mat_vec(&inv, d, &b)
}

/// Batch LinUCB score: θᵀx + α·√(xᵀ(I + Σxxᵀ)⁻¹x) from raw update history.
pub(crate) fn batch_linucb_score(updates: &[(Vec<f64>, f64)], d: usize, x: &[f64], alpha: f64) -> f64 {
    let mut gram = vec![0.0; d * d];
    for i in 0..d {
        gram[i * d + i] = 1.0;
    }
    let mut b = vec![0.0; d];
    for (u, r) in updates {
        for i in 0..d {
            for j in 0..d {
                gram[i * d + j] += u[i] * u[j];
            }
            b[i] += r * u[i];
        }
    }
    let inv = gauss_jordan_inverse(&gram, d);
    let theta = oracle_mat_vec(&inv, d, &b);
    let quad = oracle_dot(x, &oracle_mat_vec(&inv, d, x));
    oracle_dot(&theta, x) + alpha * quad.max(0.0).sqrt()
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}
