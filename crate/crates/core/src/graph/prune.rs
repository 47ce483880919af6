//! Joint robust pruning: one degree bucket per threshold (or weight), each
//! filled by alpha-pruning candidates sorted under that bucket's comparator.

use crate::attr::{attribute_distance, cap_distance, AttrDistanceConfig, Attribute};
use crate::error::{JagError, Result};
use crate::graph::{bucket_quota, BuildMode, JagGraph};
use crate::metric::sq_l2;
use crate::unified::{weighted, UnifiedDistance};

/// Borrowed view of point storage.
#[derive(Clone, Copy)]
pub(crate) struct PointStore<'a> {
    pub dim: usize,
    pub vectors: &'a [f32],
    pub attrs: &'a [Attribute],
    pub cfg: &'a AttrDistanceConfig,
}

impl<'a> PointStore<'a> {
    #[inline]
    pub fn vector(&self, id: u32) -> &'a [f32] {
        let s = id as usize * self.dim;
        &self.vectors[s..s + self.dim]
    }

    #[inline]
    pub fn attr(&self, id: u32) -> &'a Attribute {
        &self.attrs[id as usize]
    }

    /// Attribute distance between two stored points. Stored attributes are
    /// homogeneous, so this cannot fail.
    #[inline]
    pub fn attr_distance(&self, a: u32, b: u32) -> f64 {
        attribute_distance(self.attr(a), self.attr(b), self.cfg).unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Combine {
    /// `(max(dist_A - t, 0), dist)` per threshold `t`.
    Capped,
    /// `w * dist_A + dist` per weight `w`.
    Weighted,
}

impl Combine {
    pub fn of(mode: &BuildMode) -> Self {
        match mode {
            BuildMode::Threshold(_) => Combine::Capped,
            BuildMode::Weight(_) => Combine::Weighted,
        }
    }

    #[inline]
    pub fn key(self, attr: f64, vector: f64, value: f64) -> UnifiedDistance {
        match self {
            Combine::Capped => UnifiedDistance::new(cap_distance(attr, value), vector),
            Combine::Weighted => UnifiedDistance::scalar(weighted(attr, vector, value)),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PruneRule {
    pub combine: Combine,
    pub alpha: f64,
    pub max_degree: usize,
    pub quota: usize,
}

#[derive(Clone, Copy, Debug)]
struct Item {
    id: u32,
    attr: f64,
    vector: f64,
}

#[derive(Default)]
pub(crate) struct PruneScratch {
    items: Vec<Item>,
    order: Vec<(UnifiedDistance, u32, usize)>,
    bucket: Vec<usize>,
}

/// Selects at most `R` neighbors of `p` from `candidates`.
///
/// For each value in `values` (in order) the candidates are sorted by that
/// value's comparator relative to `p` and scanned: a candidate already chosen
/// by an earlier bucket joins this bucket without testing, otherwise it joins
/// only if every member `u` of the bucket satisfies
/// `alpha^2 * |u - v|^2 > |p - v|^2`. A bucket stops after `quota` fresh
/// admissions. If rounding lets the union exceed `R`, it is cut by the last
/// comparator.
pub(crate) fn prune(
    store: &PointStore,
    p: u32,
    candidates: &[u32],
    values: &[f64],
    rule: &PruneRule,
    work: &mut PruneScratch,
) -> Vec<u32> {
    let pv = store.vector(p);
    work.items.clear();
    for &c in candidates {
        if c == p {
            continue;
        }
        work.items.push(Item {
            id: c,
            attr: store.attr_distance(p, c),
            vector: sq_l2(pv, store.vector(c)),
        });
    }
    work.items.sort_unstable_by_key(|it| it.id);
    work.items.dedup_by_key(|it| it.id);

    let alpha_sq = rule.alpha * rule.alpha;
    let mut chosen: Vec<usize> = Vec::with_capacity(rule.max_degree);
    for &value in values {
        work.order.clear();
        work.order.extend(
            work.items
                .iter()
                .enumerate()
                .map(|(i, it)| (rule.combine.key(it.attr, it.vector, value), it.id, i)),
        );
        work.order.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));

        work.bucket.clear();
        let mut fresh = 0;
        for &(_, id, i) in &work.order {
            if fresh >= rule.quota {
                break;
            }
            if chosen.contains(&i) {
                work.bucket.push(i);
                continue;
            }
            let cv = store.vector(id);
            let dist_pv = work.items[i].vector;
            let keep = work
                .bucket
                .iter()
                .all(|&u| alpha_sq * sq_l2(store.vector(work.items[u].id), cv) > dist_pv);
            if keep {
                work.bucket.push(i);
                chosen.push(i);
                fresh += 1;
            }
        }
    }

    if chosen.len() > rule.max_degree {
        let last = *values.last().expect("at least one value");
        chosen.sort_unstable_by(|&a, &b| {
            let (x, y) = (&work.items[a], &work.items[b]);
            rule.combine
                .key(x.attr, x.vector, last)
                .cmp(&rule.combine.key(y.attr, y.vector, last))
                .then(x.id.cmp(&y.id))
        });
        chosen.truncate(rule.max_degree);
    }
    chosen.into_iter().map(|i| work.items[i].id).collect()
}

/// Joint robust prune of `candidates` around vertex `p` of `g`, using `values`
/// as the realized thresholds (threshold mode) or weights (weight mode) for
/// `p`, and the graph's `alpha` and degree bound.
pub fn joint_robust_prune(
    g: &JagGraph,
    p: u32,
    candidates: &[u32],
    values: &[f64],
    early_exit_fraction: f64,
) -> Result<Vec<u32>> {
    let n = g.len() as u32;
    if p >= n {
        return Err(JagError::InvalidParam(format!("vertex {p} out of range")));
    }
    if let Some(&bad) = candidates.iter().find(|&&c| c >= n) {
        return Err(JagError::InvalidParam(format!("candidate {bad} out of range")));
    }
    if values.is_empty() {
        return Err(JagError::InvalidParam("at least one threshold or weight is required".into()));
    }
    let store = PointStore {
        dim: g.dim(),
        vectors: g.vectors(),
        attrs: g.attributes(),
        cfg: g.attr_config(),
    };
    let rule = PruneRule {
        combine: Combine::of(g.mode()),
        alpha: f64::from(g.alpha()),
        max_degree: g.max_degree(),
        quota: bucket_quota(early_exit_fraction, g.max_degree(), values.len()),
    };
    Ok(prune(&store, p, candidates, values, &rule, &mut PruneScratch::default()))
}
