//! Detecting perfect adaptation from baseline and intervened equilibrium data.

use statrs::distribution::{ContinuousCDF, Normal};

use super::{check_alpha, ranks, IndepError};
use crate::adaptation::DetectionVerdict;
use crate::dataset::Dataset;
use crate::graphcore::{MarkovOrderingGraph, NodeKind};

/// Smallest sample size accepted per dataset by the shift test.
pub const MIN_SHIFT_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSumResult {
    /// Sum of the mid-ranks of the first sample.
    pub w: f64,
    pub z: f64,
    pub p: f64,
}

/// Two-sided Wilcoxon rank-sum test with the tie-corrected normal approximation.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> Result<RankSumResult, IndepError> {
    for (s, other) in [(a, b), (b, a)] {
        if s.len() < MIN_SHIFT_SAMPLES {
            return Err(IndepError::TooFewSamples { n: s.len(), min: MIN_SHIFT_SAMPLES });
        }
        if s.iter().chain(other).any(|v| !v.is_finite()) {
            return Err(IndepError::NonFiniteInput);
        }
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let r = ranks(&pooled);
    let w: f64 = r[..a.len()].iter().sum();
    let mut sorted = pooled;
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        ties += t * t * t - t;
    }
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(RankSumResult { w, z: 0.0, p: 1.0 });
    }
    let z = (w - n1 * (n + 1.0) / 2.0) / var.sqrt();
    let p = (2.0 * Normal::standard().sf(z.abs())).clamp(0.0, 1.0);
    Ok(RankSumResult { w, z, p })
}

/// Decides both detection conditions for a soft intervention on the equilibrium
/// equation of `target_var` (with or without the `v_` prefix).
///
/// A variable shifts when the rank-sum test rejects at level `alpha`. Condition 1
/// holds when the target does not shift while some other variable does, so a null
/// intervention stays inconclusive. Witnesses are shifted endogenous variables that
/// are not descendants of the target in `mog`. Variables without a column are not
/// tested.
pub fn detect_adaptation_from_data(
    baseline: &Dataset,
    intervened: &Dataset,
    target_var: &str,
    mog: &MarkovOrderingGraph,
    alpha: f64,
) -> Result<DetectionVerdict, IndepError> {
    check_alpha(alpha)?;
    if baseline.names() != intervened.names() {
        return Err(IndepError::ColumnMismatch);
    }
    let target = mog
        .find(target_var)
        .filter(|&t| matches!(mog.nodes[t].kind, NodeKind::Variable(_)))
        .ok_or_else(|| IndepError::UnknownVariable(target_var.to_string()))?;
    let plain = |node: usize| {
        let name = &mog.nodes[node].name;
        name.strip_prefix("v_").unwrap_or(name).to_string()
    };
    let target_plain = plain(target);
    if baseline.column(&target_plain).is_none() {
        return Err(IndepError::UnknownColumn(target_plain));
    }
    let desc = mog.descendants(target);
    let mut target_shift = false;
    let mut other_shift = false;
    let mut witnesses = Vec::new();
    for node in 0..mog.len() {
        if !matches!(mog.nodes[node].kind, NodeKind::Variable(_)) {
            continue;
        }
        let name = plain(node);
        let (Some(a), Some(b)) = (baseline.column(&name), intervened.column(&name)) else {
            continue;
        };
        let shifted = rank_sum_test(a, b)?.p <= alpha;
        if node == target {
            target_shift = shifted;
        } else if shifted {
            other_shift = true;
            if !desc.contains(&node) {
                witnesses.push(mog.nodes[node].name.clone());
            }
        }
    }
    Ok(DetectionVerdict::new(
        format!("f_{target_plain}"),
        mog.nodes[target].name.clone(),
        !target_shift && other_shift,
        witnesses,
    ))
}
