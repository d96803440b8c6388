//! Conditional-inference regression tree: recursive partitioning driven by
//! permutation-style independence tests with Bonferroni correction.
//!
//! Each node tests every covariate for association with the response using a
//! weighted linear statistic standardized by its permutation-null mean and
//! variance. Splitting stops when no Bonferroni-adjusted p-value clears the
//! nominal significance level, so the tree size is controlled by a test
//! rather than by pruning. Within the selected covariate, the split
//! maximizes a standardized two-sample statistic: an `n log n` threshold
//! scan for numeric covariates, exhaustive bipartition search for
//! categorical covariates with few levels, and a mean-response-ordered scan
//! otherwise.
//!
//! Only numeric responses are supported; missing covariate values must be
//! imputed upstream.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Declared scale of one covariate column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovariateKind {
    Numeric,
    /// Values are integer level codes in `[0, num_levels)`.
    Categorical { num_levels: u32 },
}

/// Training rows: covariates, numeric response, and non-negative integer
/// case weights. Tree nodes are expressed as re-weightings of these rows.
#[derive(Debug, Clone)]
pub struct LearningSample {
    /// Column-major covariates: one vector of length n per covariate.
    columns: Vec<Vec<f64>>,
    responses: Vec<f64>,
    weights: Vec<u64>,
    kinds: Vec<CovariateKind>,
}

impl LearningSample {
    /// All-numeric covariates with unit case weights.
    pub fn from_rows(rows: &[Vec<f64>], responses: &[f64]) -> Result<Self> {
        let m = rows.first().map(|r| r.len()).unwrap_or(0);
        Self::from_rows_with_kinds(rows, responses, &vec![CovariateKind::Numeric; m])
    }

    pub fn from_rows_with_kinds(
        rows: &[Vec<f64>],
        responses: &[f64],
        kinds: &[CovariateKind],
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument(
                "learning sample needs at least one row".into(),
            ));
        }
        if rows.len() != responses.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                actual: responses.len(),
            });
        }
        let m = kinds.len();
        if m == 0 {
            return Err(Error::InvalidArgument(
                "learning sample needs at least one covariate".into(),
            ));
        }
        let mut columns = vec![Vec::with_capacity(rows.len()); m];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "row {i}, covariate {j}: value must be finite"
                    )));
                }
                if let CovariateKind::Categorical { num_levels } = kinds[j] {
                    if v.fract() != 0.0 || v < 0.0 || v >= num_levels as f64 {
                        return Err(Error::InvalidArgument(format!(
                            "row {i}, covariate {j}: {v} is not a level code < {num_levels}"
                        )));
                    }
                }
                columns[j].push(v);
            }
        }
        for (i, &y) in responses.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "response {i} must be finite"
                )));
            }
        }
        Ok(Self {
            columns,
            responses: responses.to_vec(),
            weights: vec![1; rows.len()],
            kinds: kinds.to_vec(),
        })
    }

    /// Replace the base case weights (at least one must be positive).
    pub fn set_weights(&mut self, weights: Vec<u64>) -> Result<()> {
        if weights.len() != self.num_rows() {
            return Err(Error::DimensionMismatch {
                expected: self.num_rows(),
                actual: weights.len(),
            });
        }
        if weights.iter().all(|&w| w == 0) {
            return Err(Error::InvalidArgument(
                "at least one case weight must be positive".into(),
            ));
        }
        self.weights = weights;
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.responses.len()
    }

    pub fn num_covariates(&self) -> usize {
        self.columns.len()
    }

    pub fn covariate(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn kinds(&self) -> &[CovariateKind] {
        &self.kinds
    }
}

/// Stopping and split-search parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CTreeConfig {
    /// Nominal significance level of the per-node independence test.
    pub significance: f64,
    /// Minimum case weight on each side of any split.
    pub min_leaf_weight: u64,
    pub max_depth: u32,
    /// Categorical covariates with at most this many present levels get the
    /// exhaustive 2^(L−1)−1 bipartition search.
    pub categorical_exhaustive_limit: u32,
}

impl Default for CTreeConfig {
    fn default() -> Self {
        Self {
            significance: 0.05,
            min_leaf_weight: 20,
            max_depth: 10,
            categorical_exhaustive_limit: 10,
        }
    }
}

impl CTreeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::InvalidArgument(
                "significance must lie in (0, 1)".into(),
            ));
        }
        if self.min_leaf_weight == 0 {
            return Err(Error::InvalidArgument(
                "min_leaf_weight must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A binary split of one covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Split {
    /// Values ≤ threshold route left.
    Numeric { covariate: usize, threshold: f64 },
    /// Level codes in `left_levels` (sorted) route left; all others,
    /// including levels unseen in training, route right.
    Categorical {
        covariate: usize,
        left_levels: Vec<u32>,
    },
}

impl Split {
    pub fn covariate(&self) -> usize {
        match self {
            Split::Numeric { covariate, .. } | Split::Categorical { covariate, .. } => *covariate,
        }
    }

    fn routes_left(&self, value: f64) -> bool {
        match self {
            Split::Numeric { threshold, .. } => value <= *threshold,
            Split::Categorical { left_levels, .. } => {
                left_levels.binary_search(&(value as u32)).is_ok()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CTreeNode {
    Internal {
        split: Split,
        weight_total: u64,
        left: Box<CTreeNode>,
        right: Box<CTreeNode>,
    },
    Leaf {
        /// Weighted mean response of the rows at this leaf.
        prediction: f64,
        weight_total: u64,
    },
}

/// A fitted conditional-inference regression tree. Immutable once fitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CTree {
    root: CTreeNode,
    num_covariates: usize,
}

impl CTree {
    pub fn root(&self) -> &CTreeNode {
        &self.root
    }

    pub fn num_covariates(&self) -> usize {
        self.num_covariates
    }

    /// Route the covariates to a leaf and return its prediction.
    ///
    /// The slice length must equal the training arity.
    pub fn predict(&self, covariates: &[f64]) -> f64 {
        assert_eq!(
            covariates.len(),
            self.num_covariates,
            "covariate arity differs from the fitted tree"
        );
        let mut node = &self.root;
        loop {
            match node {
                CTreeNode::Leaf { prediction, .. } => return *prediction,
                CTreeNode::Internal {
                    split, left, right, ..
                } => {
                    node = if split.routes_left(covariates[split.covariate()]) {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> u32 {
        fn depth_of(node: &CTreeNode) -> u32 {
            match node {
                CTreeNode::Leaf { .. } => 0,
                CTreeNode::Internal { left, right, .. } => 1 + depth_of(left).max(depth_of(right)),
            }
        }
        depth_of(&self.root)
    }

    pub fn num_leaves(&self) -> usize {
        fn count(node: &CTreeNode) -> usize {
            match node {
                CTreeNode::Leaf { .. } => 1,
                CTreeNode::Internal { left, right, .. } => count(left) + count(right),
            }
        }
        count(&self.root)
    }

    /// Human-readable indented dump, one node per line.
    pub fn dump(&self) -> String {
        fn walk(node: &CTreeNode, indent: usize, out: &mut String) {
            let pad = "  ".repeat(indent);
            match node {
                CTreeNode::Leaf {
                    prediction,
                    weight_total,
                } => {
                    out.push_str(&format!(
                        "{pad}leaf prediction={prediction} weight={weight_total}\n"
                    ));
                }
                CTreeNode::Internal {
                    split,
                    weight_total,
                    left,
                    right,
                } => {
                    match split {
                        Split::Numeric {
                            covariate,
                            threshold,
                        } => out.push_str(&format!(
                            "{pad}split f{covariate} <= {threshold} weight={weight_total}\n"
                        )),
                        Split::Categorical {
                            covariate,
                            left_levels,
                        } => out.push_str(&format!(
                            "{pad}split f{covariate} in {left_levels:?} weight={weight_total}\n"
                        )),
                    }
                    walk(left, indent + 1, out);
                    walk(right, indent + 1, out);
                }
            }
        }
        let mut out = String::new();
        walk(&self.root, 0, &mut out);
        out
    }
}

/// Two-sided p-value of a standard normal statistic.
fn normal_two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Weighted totals used by both association and split statistics.
struct WeightedMoments {
    total_weight: f64,
    mean_response: f64,
    /// Σ w (y − ȳ)²
    response_ss: f64,
}

fn response_moments(sample: &LearningSample, weights: &[u64]) -> WeightedMoments {
    let mut total_weight = 0.0;
    let mut sum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        total_weight += w as f64;
        sum += w as f64 * sample.responses[i];
    }
    if total_weight == 0.0 {
        return WeightedMoments {
            total_weight,
            mean_response: 0.0,
            response_ss: 0.0,
        };
    }
    let mean = sum / total_weight;
    let mut ss = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let d = sample.responses[i] - mean;
        ss += w as f64 * d * d;
    }
    WeightedMoments {
        total_weight,
        mean_response: mean,
        response_ss: ss,
    }
}

/// Both `(min, max)` over positively weighted entries, or None if none.
fn weighted_range(values: &[f64], weights: &[u64]) -> Option<(f64, f64)> {
    let mut range: Option<(f64, f64)> = None;
    for (i, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let v = values[i];
        range = Some(match range {
            None => (v, v),
            Some((lo, hi)) => (lo.min(v), hi.max(v)),
        });
    }
    range
}

/// Association between covariate `j` and the response under the given case
/// weights: the standardized linear statistic `T = Σ w g y` with its
/// permutation-null conditional mean and variance, and the two-sided
/// normal-approximation p-value.
///
/// Degenerate inputs (fewer than two positively weighted rows, or zero
/// weighted variance in either the covariate or the response) return
/// `(0.0, 1.0)`: no association is decidable.
pub fn associate(sample: &LearningSample, weights: &[u64], j: usize) -> Result<(f64, f64)> {
    if j >= sample.num_covariates() {
        return Err(Error::InvalidArgument(format!(
            "covariate index {j} out of range"
        )));
    }
    if weights.len() != sample.num_rows() {
        return Err(Error::DimensionMismatch {
            expected: sample.num_rows(),
            actual: weights.len(),
        });
    }
    let g = sample.covariate(j);
    let y = sample.responses();

    let Some((gmin, gmax)) = weighted_range(g, weights) else {
        return Ok((0.0, 1.0));
    };
    let Some((ymin, ymax)) = weighted_range(y, weights) else {
        return Ok((0.0, 1.0));
    };
    if gmin == gmax || ymin == ymax {
        return Ok((0.0, 1.0));
    }

    let mut total_weight = 0.0;
    let mut sum_g = 0.0;
    let mut sum_y = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let wf = w as f64;
        total_weight += wf;
        sum_g += wf * g[i];
        sum_y += wf * y[i];
    }
    if total_weight < 2.0 {
        return Ok((0.0, 1.0));
    }
    let gbar = sum_g / total_weight;
    let ybar = sum_y / total_weight;

    let mut statistic = 0.0;
    let mut ss_g = 0.0;
    let mut ss_y = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let wf = w as f64;
        statistic += wf * g[i] * y[i];
        let dg = g[i] - gbar;
        let dy = y[i] - ybar;
        ss_g += wf * dg * dg;
        ss_y += wf * dy * dy;
    }
    let expected = total_weight * gbar * ybar;
    let variance = ss_g * ss_y / (total_weight - 1.0);
    if variance <= 0.0 {
        return Ok((0.0, 1.0));
    }
    let z = (statistic - expected) / variance.sqrt();
    Ok((z, normal_two_sided_p(z)))
}

/// Test all covariates, Bonferroni-adjust, and pick the strongest.
///
/// Returns `None` (stop) when the smallest adjusted p-value exceeds the
/// nominal significance level, otherwise the covariate index with the
/// smallest adjusted p-value (ties go to the lowest index).
pub fn select_covariate(
    sample: &LearningSample,
    weights: &[u64],
    config: &CTreeConfig,
) -> Result<Option<usize>> {
    config.validate()?;
    let m = sample.num_covariates();
    let mut best: Option<(f64, usize)> = None;
    for j in 0..m {
        let (_, p) = associate(sample, weights, j)?;
        let adjusted = (m as f64 * p).min(1.0);
        if best.is_none_or(|(bp, _)| adjusted < bp) {
            best = Some((adjusted, j));
        }
    }
    let (p_adjusted, j) = best.expect("at least one covariate");
    if p_adjusted > config.significance {
        Ok(None)
    } else {
        Ok(Some(j))
    }
}

/// Standardized two-sample statistic |z| for a candidate left side with
/// weight `w_left` and weighted response sum `t_left`.
fn split_statistic(w_left: f64, t_left: f64, moments: &WeightedMoments) -> f64 {
    let w = moments.total_weight;
    let w_right = w - w_left;
    let variance = (w_left * w_right / w) * moments.response_ss / (w - 1.0);
    if variance <= 0.0 {
        return 0.0;
    }
    let expected = w_left * moments.mean_response;
    ((t_left - expected) / variance.sqrt()).abs()
}

/// Best feasible split of covariate `j` under the case weights: the split
/// maximizing the standardized two-sample mean-difference statistic subject
/// to both sides carrying at least `min_leaf_weight`.
pub fn best_split(
    sample: &LearningSample,
    weights: &[u64],
    j: usize,
    config: &CTreeConfig,
) -> Result<Split> {
    if j >= sample.num_covariates() {
        return Err(Error::InvalidArgument(format!(
            "covariate index {j} out of range"
        )));
    }
    if weights.len() != sample.num_rows() {
        return Err(Error::DimensionMismatch {
            expected: sample.num_rows(),
            actual: weights.len(),
        });
    }
    config.validate()?;
    let moments = response_moments(sample, weights);
    match sample.kinds()[j] {
        CovariateKind::Numeric => best_numeric_split(sample, weights, j, config, &moments),
        CovariateKind::Categorical { .. } => {
            best_categorical_split(sample, weights, j, config, &moments)
        }
    }
}

fn best_numeric_split(
    sample: &LearningSample,
    weights: &[u64],
    j: usize,
    config: &CTreeConfig,
    moments: &WeightedMoments,
) -> Result<Split> {
    let g = sample.covariate(j);
    let y = sample.responses();
    let mut rows: Vec<usize> = (0..sample.num_rows()).filter(|&i| weights[i] > 0).collect();
    rows.sort_by(|&a, &b| g[a].partial_cmp(&g[b]).expect("finite covariates"));

    let min_leaf = config.min_leaf_weight as f64;
    let mut best: Option<(f64, f64)> = None; // (|z|, threshold)
    let mut w_left = 0.0;
    let mut t_left = 0.0;
    let mut idx = 0;
    while idx < rows.len() {
        // absorb the whole group of equal covariate values
        let value = g[rows[idx]];
        while idx < rows.len() && g[rows[idx]] == value {
            let i = rows[idx];
            w_left += weights[i] as f64;
            t_left += weights[i] as f64 * y[i];
            idx += 1;
        }
        if idx == rows.len() {
            break; // no rows remain on the right
        }
        let w_right = moments.total_weight - w_left;
        if w_left < min_leaf || w_right < min_leaf {
            continue;
        }
        let z = split_statistic(w_left, t_left, moments);
        if best.is_none_or(|(bz, _)| z > bz) {
            let threshold = 0.5 * (value + g[rows[idx]]);
            best = Some((z, threshold));
        }
    }
    match best {
        Some((_, threshold)) => Ok(Split::Numeric {
            covariate: j,
            threshold,
        }),
        None => Err(Error::InfeasibleSplit),
    }
}

fn best_categorical_split(
    sample: &LearningSample,
    weights: &[u64],
    j: usize,
    config: &CTreeConfig,
    moments: &WeightedMoments,
) -> Result<Split> {
    let CovariateKind::Categorical { num_levels } = sample.kinds()[j] else {
        unreachable!("caller dispatched on kind");
    };
    let g = sample.covariate(j);
    let y = sample.responses();

    let mut level_weight = vec![0.0f64; num_levels as usize];
    let mut level_response = vec![0.0f64; num_levels as usize];
    for (i, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let level = g[i] as usize;
        level_weight[level] += w as f64;
        level_response[level] += w as f64 * y[i];
    }
    let present: Vec<u32> = (0..num_levels)
        .filter(|&l| level_weight[l as usize] > 0.0)
        .collect();
    if present.len() < 2 {
        return Err(Error::InfeasibleSplit);
    }

    let min_leaf = config.min_leaf_weight as f64;
    let mut best: Option<(f64, Vec<u32>)> = None;
    let mut consider = |left: Vec<u32>| {
        let w_left: f64 = left.iter().map(|&l| level_weight[l as usize]).sum();
        let w_right = moments.total_weight - w_left;
        if w_left < min_leaf || w_right < min_leaf {
            return;
        }
        let t_left: f64 = left.iter().map(|&l| level_response[l as usize]).sum();
        let z = split_statistic(w_left, t_left, moments);
        if best.as_ref().is_none_or(|(bz, _)| z > *bz) {
            best = Some((z, left));
        }
    };

    if present.len() as u32 <= config.categorical_exhaustive_limit {
        // All 2^(P−1)−1 bipartitions, with the first present level pinned to
        // the left side to enumerate each partition once.
        let rest = &present[1..];
        let combos = 1u64 << rest.len();
        for mask in 0..combos - 1 {
            let mut left = vec![present[0]];
            for (bit, &level) in rest.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    left.push(level);
                }
            }
            left.sort_unstable();
            consider(left);
        }
    } else {
        // Order present levels by weighted mean response and threshold-scan
        // that ordering.
        let mut ordered = present.clone();
        ordered.sort_by(|&a, &b| {
            let ma = level_response[a as usize] / level_weight[a as usize];
            let mb = level_response[b as usize] / level_weight[b as usize];
            ma.partial_cmp(&mb)
                .expect("finite means")
                .then(a.cmp(&b))
        });
        for cut in 1..ordered.len() {
            let mut left: Vec<u32> = ordered[..cut].to_vec();
            left.sort_unstable();
            consider(left);
        }
    }

    match best {
        Some((_, left_levels)) => Ok(Split::Categorical {
            covariate: j,
            left_levels,
        }),
        None => Err(Error::InfeasibleSplit),
    }
}

fn weighted_mean_response(sample: &LearningSample, weights: &[u64]) -> f64 {
    let mut w_total = 0.0;
    let mut sum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        w_total += w as f64;
        sum += w as f64 * sample.responses[i];
    }
    if w_total == 0.0 {
        0.0
    } else {
        sum / w_total
    }
}

fn grow(sample: &LearningSample, weights: Vec<u64>, config: &CTreeConfig, depth: u32) -> Result<CTreeNode> {
    let weight_total: u64 = weights.iter().sum();
    let leaf = CTreeNode::Leaf {
        prediction: weighted_mean_response(sample, &weights),
        weight_total,
    };
    if depth >= config.max_depth {
        return Ok(leaf);
    }
    let Some(j) = select_covariate(sample, &weights, config)? else {
        return Ok(leaf);
    };
    let split = match best_split(sample, &weights, j, config) {
        Ok(split) => split,
        Err(Error::InfeasibleSplit) => return Ok(leaf),
        Err(e) => return Err(e),
    };
    let mut left_weights = vec![0u64; weights.len()];
    let mut right_weights = vec![0u64; weights.len()];
    let column = sample.covariate(split.covariate());
    for (i, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        if split.routes_left(column[i]) {
            left_weights[i] = w;
        } else {
            right_weights[i] = w;
        }
    }
    Ok(CTreeNode::Internal {
        split,
        weight_total,
        left: Box::new(grow(sample, left_weights, config, depth + 1)?),
        right: Box::new(grow(sample, right_weights, config, depth + 1)?),
    })
}

/// Fit a tree by recursive partitioning over the sample's case weights.
pub fn fit(sample: &LearningSample, config: &CTreeConfig) -> Result<CTree> {
    config.validate()?;
    if sample.weights().iter().all(|&w| w == 0) {
        return Err(Error::InvalidArgument(
            "learning sample has no positively weighted rows".into(),
        ));
    }
    let root = grow(sample, sample.weights().to_vec(), config, 0)?;
    Ok(CTree {
        root,
        num_covariates: sample.num_covariates(),
    })
}
