//! Per-point thresholds from attribute-distance quantiles, and weight
//! scaling from distance spreads.

use crate::attr::{attribute_distance, AttrDistanceConfig, Attribute};
use crate::error::{JagError, Result};
use crate::graph::ThresholdSpec;
use crate::metric::sq_l2;
use crate::unified::PointRef;

/// Nearest-rank quantile of an ascending slice: the element at rank
/// `ceil(q * m)`. `q = 0` is pinned to `0.0`, `q = +inf` to `+inf`.
pub fn quantile_nearest_rank(sorted: &[f64], q: f64) -> f64 {
    if q == f64::INFINITY {
        return f64::INFINITY;
    }
    if q <= 0.0 || sorted.is_empty() {
        return 0.0;
    }
    let m = sorted.len();
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[rank - 1]
}

/// Threshold for each level: the level's quantile of the attribute distances
/// from `p` to the sampled attributes. An empty sample yields zeros (the
/// first inserted point).
pub fn derive_thresholds<'a>(
    p: &Attribute,
    sample: impl IntoIterator<Item = &'a Attribute>,
    levels: &ThresholdSpec,
    cfg: &AttrDistanceConfig,
) -> Result<Vec<f64>> {
    let mut dists = sample
        .into_iter()
        .map(|a| attribute_distance(p, a, cfg))
        .collect::<Result<Vec<_>>>()?;
    if dists.is_empty() {
        return Ok(levels
            .levels()
            .iter()
            .map(|&l| if l == f64::INFINITY { l } else { 0.0 })
            .collect());
    }
    dists.sort_by(f64::total_cmp);
    Ok(levels
        .levels()
        .iter()
        .map(|&l| quantile_nearest_rank(&dists, l))
        .collect())
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt()
}

/// `{m * sigma / sigma_attr : m in multipliers}`.
pub fn weights_from_spread(sigma: f64, sigma_attr: f64, multipliers: &[f64]) -> Result<Vec<f64>> {
    if !(sigma_attr > 0.0) {
        return Err(JagError::DegenerateAttributeSample);
    }
    let h = sigma / sigma_attr;
    Ok(multipliers.iter().map(|m| m * h).collect())
}

/// Weights scaled by `h = sigma / sigma_A`, where both spreads are population
/// standard deviations of distances from the first sample point (the anchor)
/// to the rest. Vector distances are squared L2, matching the weighted
/// comparator. Output follows the multipliers sorted ascending.
pub fn derive_weights(sample: &[PointRef], multipliers: &[f64], cfg: &AttrDistanceConfig) -> Result<Vec<f64>> {
    if sample.len() < 2 {
        return Err(JagError::InvalidParam("weight derivation needs at least two sample points".into()));
    }
    let anchor = &sample[0];
    let mut attr = Vec::with_capacity(sample.len() - 1);
    let mut vec = Vec::with_capacity(sample.len() - 1);
    for p in &sample[1..] {
        if p.vector.len() != anchor.vector.len() {
            return Err(JagError::DimensionMismatch {
                expected: anchor.vector.len(),
                found: p.vector.len(),
            });
        }
        attr.push(attribute_distance(anchor.attr, p.attr, cfg)?);
        vec.push(sq_l2(anchor.vector, p.vector));
    }
    let mut sorted = multipliers.to_vec();
    sorted.sort_by(f64::total_cmp);
    weights_from_spread(population_std(&vec), population_std(&attr), &sorted)
}
