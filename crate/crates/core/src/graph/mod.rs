//! The degree-bounded proximity graph and its incremental construction.

mod build;
pub mod format;
mod prune;
pub mod thresholds;

pub use build::{build, point_thresholds};
pub use prune::joint_robust_prune;
pub use thresholds::{derive_thresholds, derive_weights, quantile_nearest_rank, weights_from_spread};

use crate::attr::{AttrDistanceConfig, Attribute, Family, LabelWeights};
use crate::error::{JagError, Result};
use crate::unified::PointRef;

/// Quantile levels offered by default for threshold selection.
pub const CANDIDATE_LEVELS: [f64; 5] = [1.0, 0.10, 0.01, 0.001, 0.0];

/// Weight multipliers offered by default for weight selection.
pub const CANDIDATE_MULTIPLIERS: [f64; 7] = [0.0, 1.0, 2.0, 5.0, 10.0, 100.0, 1000.0];

/// Build-time comparator family of a graph.
#[derive(Clone, Debug, PartialEq)]
pub enum BuildMode {
    /// Quantile levels in descending order. A level in `[0, 1]` resolves per
    /// point to that quantile of sampled attribute distances; `+inf` means
    /// the attribute component is always capped to zero.
    Threshold(Vec<f64>),
    /// Realized weights in ascending order.
    Weight(Vec<f64>),
}

impl BuildMode {
    pub fn tag(&self) -> u8 {
        match self {
            BuildMode::Threshold(_) => 0,
            BuildMode::Weight(_) => 1,
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            BuildMode::Threshold(v) | BuildMode::Weight(v) => v,
        }
    }
}

/// Validated quantile levels, stored in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSpec(Vec<f64>);

impl ThresholdSpec {
    /// Levels must be distinct, each in `[0, 1]` or `+inf`. They are sorted
    /// descending (least strict first).
    pub fn new(levels: &[f64]) -> Result<Self> {
        if levels.is_empty() {
            return Err(JagError::InvalidParam("at least one threshold level is required".into()));
        }
        for &l in levels {
            if !((0.0..=1.0).contains(&l) || l == f64::INFINITY) {
                return Err(JagError::InvalidParam(format!(
                    "threshold level {l} must lie in [0, 1] or be +inf"
                )));
            }
        }
        let mut sorted = levels.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(JagError::InvalidParam("threshold levels must be distinct".into()));
        }
        Ok(ThresholdSpec(sorted))
    }

    /// The `{100%, 1%, 0%}` combination.
    pub fn merged_default() -> Self {
        ThresholdSpec(vec![1.0, 0.01, 0.0])
    }

    /// A single `+inf` level: every capped attribute distance is zero and
    /// the build ignores attributes.
    pub fn attribute_blind() -> Self {
        ThresholdSpec(vec![f64::INFINITY])
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }
}

/// How the per-point comparators are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeSpec {
    Threshold(ThresholdSpec),
    /// Multipliers of the spread ratio `h = sigma / sigma_A`.
    Weight { multipliers: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildParams {
    /// Build beam size `l_b`.
    pub beam: usize,
    /// Degree bound `R`.
    pub max_degree: usize,
    pub alpha: f32,
    pub mode: ModeSpec,
    pub threshold_sample_size: usize,
    pub early_exit_fraction: f64,
    pub label_weights: Option<LabelWeights>,
    pub seed: u64,
    /// Insert concurrently on the current rayon pool. Output satisfies every
    /// structural invariant but is not bit-reproducible.
    pub parallel: bool,
}

impl BuildParams {
    pub fn new(max_degree: usize, beam: usize, mode: ModeSpec) -> Self {
        BuildParams {
            beam,
            max_degree,
            alpha: 1.2,
            mode,
            threshold_sample_size: 500,
            early_exit_fraction: 0.9,
            label_weights: None,
            seed: 0,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(JagError::InvalidParam(m));
        if self.max_degree == 0 {
            return bad("degree bound must be positive".into());
        }
        if self.beam == 0 {
            return bad("build beam must be positive".into());
        }
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return bad(format!("alpha {} must be greater than 1", self.alpha));
        }
        if self.threshold_sample_size == 0 {
            return bad("threshold sample size must be positive".into());
        }
        if !(self.early_exit_fraction > 0.0 && self.early_exit_fraction <= 1.0) {
            return bad(format!(
                "early exit fraction {} must lie in (0, 1]",
                self.early_exit_fraction
            ));
        }
        if let ModeSpec::Weight { multipliers } = &self.mode {
            if multipliers.is_empty() {
                return bad("at least one weight multiplier is required".into());
            }
            if multipliers.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                return bad("weight multipliers must be finite and non-negative".into());
            }
        }
        Ok(())
    }

    /// Fresh admissions allowed per bucket: `ceil(fraction * R / |T|)`.
    pub fn bucket_quota(&self, buckets: usize) -> usize {
        bucket_quota(self.early_exit_fraction, self.max_degree, buckets)
    }
}

pub(crate) fn bucket_quota(fraction: f64, max_degree: usize, buckets: usize) -> usize {
    let q = (fraction * max_degree as f64 / buckets.max(1) as f64).ceil() as usize;
    q.clamp(1, max_degree)
}

/// Directed proximity graph over `(vector, attribute)` points.
#[derive(Clone, Debug, PartialEq)]
pub struct JagGraph {
    dim: usize,
    attr_width: Option<usize>,
    vectors: Vec<f32>,
    attrs: Vec<Attribute>,
    links: Vec<Vec<u32>>,
    entry: Option<u32>,
    max_degree: usize,
    alpha: f32,
    mode: BuildMode,
    attr_cfg: AttrDistanceConfig,
}

impl JagGraph {
    /// An empty graph.
    pub fn new(dim: usize, attr_cfg: AttrDistanceConfig, max_degree: usize, alpha: f32, mode: BuildMode) -> Result<Self> {
        if dim == 0 {
            return Err(JagError::InvalidParam("dimension must be positive".into()));
        }
        if mode.values().is_empty() {
            return Err(JagError::InvalidParam("mode needs at least one value".into()));
        }
        Ok(JagGraph {
            dim,
            attr_width: None,
            vectors: Vec::new(),
            attrs: Vec::new(),
            links: Vec::new(),
            entry: None,
            max_degree,
            alpha,
            mode,
            attr_cfg,
        })
    }

    /// Assembles a graph from raw parts, checking the structural invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        dim: usize,
        vectors: Vec<f32>,
        attrs: Vec<Attribute>,
        links: Vec<Vec<u32>>,
        entry: Option<u32>,
        max_degree: usize,
        alpha: f32,
        mode: BuildMode,
        attr_cfg: AttrDistanceConfig,
    ) -> Result<Self> {
        let mut g = JagGraph::new(dim, attr_cfg, max_degree, alpha, mode)?;
        let n = attrs.len();
        if vectors.len() != n * dim {
            return Err(JagError::DimensionMismatch {
                expected: n * dim,
                found: vectors.len(),
            });
        }
        if links.len() != n {
            return Err(JagError::InvalidParam(format!(
                "{} adjacency lists for {n} points",
                links.len()
            )));
        }
        g.attr_width = check_attributes(&attrs, g.attr_cfg.family())?;
        match entry {
            Some(e) if (e as usize) >= n => {
                return Err(JagError::InvalidParam(format!("entry {e} out of range")))
            }
            None if n > 0 => return Err(JagError::InvalidParam("non-empty graph needs an entry".into())),
            _ => {}
        }
        g.vectors = vectors;
        g.attrs = attrs;
        g.links = links;
        g.entry = entry;
        g.check_structure()?;
        Ok(g)
    }

    /// Verifies degree bound, id range, and absence of self-loops and
    /// duplicate edges.
    pub fn check_structure(&self) -> Result<()> {
        let n = self.len() as u32;
        for (v, list) in self.links.iter().enumerate() {
            if list.len() > self.max_degree {
                return Err(JagError::InvalidParam(format!(
                    "vertex {v} has degree {} above {}",
                    list.len(),
                    self.max_degree
                )));
            }
            let mut seen = list.clone();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(JagError::InvalidParam(format!("vertex {v} has duplicate edges")));
            }
            if let Some(&bad) = list.iter().find(|&&u| u >= n || u as usize == v) {
                return Err(JagError::InvalidParam(format!("vertex {v} has invalid edge to {bad}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> Family {
        self.attr_cfg.family()
    }

    pub fn attr_width(&self) -> Option<usize> {
        self.attr_width
    }

    pub fn entry(&self) -> Option<u32> {
        self.entry
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn alpha(&self) -> f32 {
        self.alpha
    }

    pub fn mode(&self) -> &BuildMode {
        &self.mode
    }

    pub fn attr_config(&self) -> &AttrDistanceConfig {
        &self.attr_cfg
    }

    #[inline]
    pub fn vector(&self, id: u32) -> &[f32] {
        let start = id as usize * self.dim;
        &self.vectors[start..start + self.dim]
    }

    #[inline]
    pub fn attr(&self, id: u32) -> &Attribute {
        &self.attrs[id as usize]
    }

    pub fn point(&self, id: u32) -> PointRef<'_> {
        PointRef {
            id,
            vector: self.vector(id),
            attr: self.attr(id),
        }
    }

    pub fn neighbors(&self, id: u32) -> &[u32] {
        &self.links[id as usize]
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attrs
    }

    pub(crate) fn links(&self) -> &[Vec<u32>] {
        &self.links
    }

    pub fn edge_count(&self) -> usize {
        self.links.iter().map(Vec::len).sum()
    }

    /// Number of vertices reachable from the entry along out-edges.
    pub fn reachable_from_entry(&self) -> usize {
        let Some(entry) = self.entry else { return 0 };
        let mut seen = vec![false; self.len()];
        let mut stack = vec![entry];
        seen[entry as usize] = true;
        let mut count = 0;
        while let Some(v) = stack.pop() {
            count += 1;
            for &u in &self.links[v as usize] {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        count
    }

    /// Checks that a new point fits this graph.
    pub(crate) fn check_point(&self, vector: &[f32], attr: &Attribute) -> Result<()> {
        if vector.len() != self.dim {
            return Err(JagError::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if attr.family() != self.family() {
            return Err(JagError::FilterFamilyMismatch {
                attribute: attr.family(),
                filter: self.family(),
            });
        }
        if let (Some(expected), Some(found)) = (self.attr_width, attr.width()) {
            if expected != found {
                return Err(JagError::WidthMismatch { expected, found });
            }
        }
        Ok(())
    }
}

/// Checks that attributes are homogeneous in family and width.
pub(crate) fn check_attributes(attrs: &[Attribute], family: Family) -> Result<Option<usize>> {
    let width = attrs.first().and_then(Attribute::width);
    for a in attrs {
        if a.family() != family {
            return Err(JagError::FilterFamilyMismatch {
                attribute: a.family(),
                filter: family,
            });
        }
        if a.width() != width {
            return Err(JagError::WidthMismatch {
                expected: width.unwrap_or(0),
                found: a.width().unwrap_or(0),
            });
        }
    }
    Ok(width)
}
