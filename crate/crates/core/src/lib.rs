//! Filtered approximate nearest neighbor search with joint attribute graphs.
//!
//! A [`JagGraph`] is a degree-bounded proximity graph whose edges are chosen
//! under several comparators at once, each pairing a capped (or weighted)
//! attribute distance with the vector distance. Queries walk the graph under
//! a filter distance that is zero exactly on matching points, so the search
//! is steered toward the valid region and then toward the query vector.
//!
//! ```
//! use jag_core::{build, query, BuildParams, Dataset, Filter, ModeSpec, SearchParams, SearchScratch, ThresholdSpec};
//! use jag_core::attr::Attribute;
//!
//! let vectors: Vec<f32> = (0..100).map(|i| i as f32).collect();
//! let attrs = (0..100).map(|i| Attribute::Scalar((i % 10) as f64)).collect();
//! let data = Dataset::new(1, vectors, attrs).unwrap();
//! let params = BuildParams::new(8, 16, ModeSpec::Threshold(ThresholdSpec::merged_default()));
//! let g = build(data, &params).unwrap();
//! let r = query(&g, &[42.0], &Filter::range(3.0, 3.0).unwrap(), SearchParams::new(2, 20).unwrap(), &mut SearchScratch::new()).unwrap();
//! assert_eq!(r.ids, vec![43, 33]);
//! ```

pub mod attr;
pub mod baselines;
mod bytes;
pub mod datasets;
pub mod error;
pub mod eval;
pub mod graph;
pub mod metric;
pub mod rng;
pub mod search;
pub mod unified;

pub use attr::{
    attribute_distance, capped_attribute_distance, filter_distance, matches, AttrDistanceConfig, Attribute, Family,
    Filter, LabelWeights,
};
pub use baselines::{brute_force_ground_truth, post_filter_search, pre_filter_search, ScanResult};
pub use datasets::{Dataset, QuerySet, WorkloadSpec};
pub use error::{JagError, Result};
pub use eval::{recall_at_k, run_ablation_grid, run_experiment, EvalReport, ExperimentConfig, Method};
pub use graph::format::{load, save};
pub use graph::{build, joint_robust_prune, BuildMode, BuildParams, JagGraph, ModeSpec, ThresholdSpec};
pub use metric::sq_l2;
pub use search::{greedy_search, query, Comparator, SearchParams, SearchResult, SearchScratch};
pub use unified::{PointRef, QueryRef, UnifiedDistance};
