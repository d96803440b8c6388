//! Small dense symmetric-positive-definite linear algebra backing the ridge
//! updates: rank-one updates, inverse quadratic forms, and solves.
//!
//! Matrices here start at the identity and grow only by PSD rank-one
//! additions, so they stay comfortably positive definite. The inverse is
//! maintained incrementally by the Sherman–Morrison identity (O(d²) per
//! update) and recomputed from scratch every [`DEFAULT_RECOMPUTE_PERIOD`]
//! updates to bound numeric drift.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Full inverse recomputations happen every this many rank-one updates.
pub const DEFAULT_RECOMPUTE_PERIOD: u32 = 1000;

/// Dense d×d symmetric positive-definite matrix with a maintained inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdMatrix {
    dim: usize,
    /// Row-major entries.
    entries: Vec<f64>,
    /// Row-major cached inverse.
    inverse: Vec<f64>,
    updates_since_recompute: u32,
    recompute_period: u32,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn mat_vec(m: &[f64], dim: usize, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(&m[i * dim..(i + 1) * dim], x);
    }
    out
}

impl SpdMatrix {
    /// d×d identity with the inverse cache set to the identity.
    pub fn identity(dim: usize) -> Result<Self> {
        Self::with_recompute_period(dim, DEFAULT_RECOMPUTE_PERIOD)
    }

    /// Identity with a custom recomputation period (mainly for tests that
    /// exercise the recompute boundary).
    pub fn with_recompute_period(dim: usize, recompute_period: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimension must be at least 1".into(),
            ));
        }
        if recompute_period == 0 {
            return Err(Error::InvalidArgument(
                "recompute period must be at least 1".into(),
            ));
        }
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Ok(Self {
            dim,
            inverse: entries.clone(),
            entries,
            updates_since_recompute: 0,
            recompute_period,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries of A.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Row-major entries of the cached A⁻¹.
    pub fn inverse(&self) -> &[f64] {
        &self.inverse
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// A ← A + x xᵀ, with the cached inverse updated by Sherman–Morrison.
    pub fn rank_one_update(&mut self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "rank-one update vector must be finite".into(),
            ));
        }
        let d = self.dim;
        for i in 0..d {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = &mut self.entries[i * d..(i + 1) * d];
            for (j, r) in row.iter_mut().enumerate() {
                *r += xi * x[j];
            }
        }

        // Sherman–Morrison: (A + xxᵀ)⁻¹ = A⁻¹ − (A⁻¹x)(A⁻¹x)ᵀ / (1 + xᵀA⁻¹x)
        let u = mat_vec(&self.inverse, d, x);
        let denom = 1.0 + dot(x, &u);
        if denom.is_finite() && denom > 0.0 {
            for i in 0..d {
                let ui = u[i];
                if ui == 0.0 {
                    continue;
                }
                let row = &mut self.inverse[i * d..(i + 1) * d];
                for (j, r) in row.iter_mut().enumerate() {
                    *r -= ui * u[j] / denom;
                }
            }
            self.symmetrize_inverse();
        } else {
            // Only reachable after severe drift; rebuild instead of updating.
            self.recompute_inverse()?;
        }

        self.updates_since_recompute += 1;
        if self.updates_since_recompute >= self.recompute_period {
            self.recompute_inverse()?;
        }
        Ok(())
    }

    /// xᵀ A⁻¹ x, the squared confidence width of the ridge estimate at x.
    pub fn quad_form_inverse(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let u = mat_vec(&self.inverse, self.dim, x);
        Ok(dot(x, &u).max(0.0))
    }

    /// y with A·y = b, computed from the cached inverse.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(b)?;
        Ok(mat_vec(&self.inverse, self.dim, b))
    }

    /// Lower-triangular L (row-major) with A = L·Lᵀ. Succeeding is the
    /// operational test that the matrix is still positive definite.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        cholesky_factor(&self.entries, self.dim)
    }

    /// Rebuild the inverse cache from the entries by direct solve.
    fn recompute_inverse(&mut self) -> Result<()> {
        let d = self.dim;
        let l = self.cholesky()?;
        let mut inv = vec![0.0; d * d];
        let mut e = vec![0.0; d];
        for col in 0..d {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[col] = 1.0;
            let y = cholesky_solve(&l, d, &e);
            for row in 0..d {
                inv[row * d + col] = y[row];
            }
        }
        self.inverse = inv;
        self.symmetrize_inverse();
        self.updates_since_recompute = 0;
        Ok(())
    }

    fn symmetrize_inverse(&mut self) {
        let d = self.dim;
        for i in 0..d {
            for j in (i + 1)..d {
                let m = 0.5 * (self.inverse[i * d + j] + self.inverse[j * d + i]);
                self.inverse[i * d + j] = m;
                self.inverse[j * d + i] = m;
            }
        }
    }
}

fn cholesky_factor(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::InvalidState(
                        "matrix is not positive definite".into(),
                    ));
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Ok(l)
}

/// Solve L·Lᵀ·y = b by forward then backward substitution.
fn cholesky_solve(l: &[f64], d: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * d + k] * y[k];
        }
        y[i] = s / l[i * d + i];
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let mut s = y[i];
        for k in (i + 1)..d {
            s -= l[k * d + i] * x[k];
        }
        x[i] = s / l[i * d + i];
    }
    x
}
