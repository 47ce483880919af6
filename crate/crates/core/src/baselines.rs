//! Exact pre-filtering, post-filtering over an attribute-blind graph, and
//! brute-force ground truth.

use rayon::prelude::*;

use crate::attr::{Filter, PreparedFilter};
use crate::datasets::{Dataset, QuerySet};
use crate::error::{JagError, Result};
use crate::graph::JagGraph;
use crate::metric::sq_l2;
use crate::search::{greedy_search, Comparator, SearchParams, SearchResult, SearchScratch};

/// Ids of an exact scan and the number of vector distances it computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanResult {
    pub ids: Vec<u32>,
    pub dc_count: u64,
}

fn smallest_k(mut scored: Vec<(f64, u32)>, k: usize) -> Vec<u32> {
    let cmp = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if scored.len() > k && k > 0 {
        scored.select_nth_unstable_by(k - 1, cmp);
    }
    scored.truncate(k);
    scored.sort_unstable_by(cmp);
    scored.into_iter().map(|(_, id)| id).collect()
}

/// Scans every point, computes vector distances for the matching ones only,
/// and returns the `k` nearest, ties by id.
pub fn pre_filter_search(data: &Dataset, vector: &[f32], filter: &Filter, k: usize) -> Result<ScanResult> {
    if vector.len() != data.dim {
        return Err(JagError::DimensionMismatch {
            expected: data.dim,
            found: vector.len(),
        });
    }
    if let Some(family) = data.family() {
        filter.check_compatible(family, data.attrs[0].width())?;
    }
    let prepared = PreparedFilter::new(filter);
    let mut scored = Vec::new();
    for (i, a) in data.attrs.iter().enumerate() {
        if prepared.matches(a)? {
            scored.push((sq_l2(vector, data.vector(i)), i as u32));
        }
    }
    let dc_count = scored.len() as u64;
    Ok(ScanResult {
        ids: smallest_k(scored, k),
        dc_count,
    })
}

/// Unfiltered greedy search on `g` followed by discarding non-matching
/// points from the ranked visited list. Every returned id matches.
pub fn post_filter_search(
    g: &JagGraph,
    vector: &[f32],
    filter: &Filter,
    params: SearchParams,
    scratch: &mut SearchScratch,
) -> Result<SearchResult> {
    filter.check_compatible(g.family(), g.attr_width())?;
    let all = SearchParams {
        k: g.len().max(1),
        beam: params.beam,
    };
    let outcome = greedy_search(g, &Comparator::Vector { vector }, all, scratch)?;
    let prepared = PreparedFilter::new(filter);
    let mut ids = Vec::with_capacity(params.k);
    for c in &outcome.top {
        if ids.len() == params.k {
            break;
        }
        if prepared.matches(g.attr(c.id))? {
            ids.push(c.id);
        }
    }
    Ok(SearchResult {
        matches: vec![true; ids.len()],
        ids,
        visited_count: outcome.visited.len(),
        dc_count: outcome.dc_count,
    })
}

/// Exact filtered top-`k` for every query, ties by id.
pub fn brute_force_ground_truth(data: &Dataset, queries: &QuerySet, k: usize) -> Result<Vec<Vec<u32>>> {
    if queries.dim != data.dim {
        return Err(JagError::DimensionMismatch {
            expected: data.dim,
            found: queries.dim,
        });
    }
    (0..queries.len())
        .into_par_iter()
        .map(|q| pre_filter_search(data, queries.vector(q), &queries.filters[q], k).map(|r| r.ids))
        .collect()
}
