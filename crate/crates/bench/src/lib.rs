//! Shared fixtures for the benchmarks.

use jag_core::{build, BuildParams, Dataset, Family, JagGraph, ModeSpec, QuerySet, ThresholdSpec, WorkloadSpec};

/// A range workload of `n` points in `dim` dimensions with 64 queries.
pub fn range_workload(n: usize, dim: usize, seed: u64) -> (Dataset, QuerySet) {
    WorkloadSpec::new(n, dim, 64, Family::Scalar, seed)
        .generate()
        .expect("valid workload spec")
}

/// Threshold graph with the `{100%, 1%, 0%}` levels.
pub fn merged_index(data: &Dataset, max_degree: usize, beam: usize) -> JagGraph {
    let params = BuildParams::new(max_degree, beam, ModeSpec::Threshold(ThresholdSpec::merged_default()));
    build(data.clone(), &params).expect("build succeeds on generated data")
}
