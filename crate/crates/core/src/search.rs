//! Greedy beam search over the graph under an arbitrary unified comparator,
//! and the filtered top-k query built on it.

use std::cmp::Ordering;

use crate::attr::{cap_distance, attribute_distance, AttrDistanceConfig, Attribute, Filter, PreparedFilter};
use crate::error::{JagError, Result};
use crate::graph::JagGraph;
use crate::metric::sq_l2;
use crate::unified::{weighted, UnifiedDistance};

/// Read access to out-neighbor lists.
pub(crate) trait Adjacency {
    fn read_neighbors(&self, id: u32, out: &mut Vec<u32>);
}

impl Adjacency for [Vec<u32>] {
    fn read_neighbors(&self, id: u32, out: &mut Vec<u32>) {
        out.clear();
        out.extend_from_slice(&self[id as usize]);
    }
}

/// A point id with its comparator distance. Orders by distance, then id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub distance: UnifiedDistance,
    pub id: u32,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .cmp(&other.distance)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug)]
struct BeamEntry {
    candidate: Candidate,
    expanded: bool,
}

/// Reusable per-worker buffers for [`beam_search`].
#[derive(Debug, Default)]
pub struct SearchScratch {
    marks: Vec<u32>,
    epoch: u32,
    beam: Vec<BeamEntry>,
    visited: Vec<Candidate>,
    neighbors: Vec<u32>,
}

impl SearchScratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        if self.marks.len() < n {
            self.marks.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.beam.clear();
        self.visited.clear();
    }

    /// Marks `id` as enqueued; returns false if it already was.
    #[inline]
    fn mark(&mut self, id: u32) -> bool {
        let slot = &mut self.marks[id as usize];
        if *slot == self.epoch {
            false
        } else {
            *slot = self.epoch;
            true
        }
    }

    /// Vertices expanded by the last search, in expansion order.
    pub(crate) fn visited(&self) -> &[Candidate] {
        &self.visited
    }
}

/// Best-first beam search from `entry`.
///
/// The candidate list holds at most `beam` entries ordered by `key`; the loop
/// expands the best unexpanded entry until every entry is expanded. A vertex
/// is evaluated at most once per search: once enqueued it is never enqueued
/// again, even if it was truncated out of the list. Returns the number of
/// key evaluations; expanded vertices are left in `scratch.visited`.
pub(crate) fn beam_search<A, K>(
    adjacency: &A,
    n: usize,
    entry: u32,
    beam: usize,
    mut key: K,
    scratch: &mut SearchScratch,
) -> u64
where
    A: Adjacency + ?Sized,
    K: FnMut(u32) -> UnifiedDistance,
{
    scratch.reset(n);
    let beam = beam.max(1);
    scratch.mark(entry);
    scratch.beam.push(BeamEntry {
        candidate: Candidate {
            distance: key(entry),
            id: entry,
        },
        expanded: false,
    });
    let mut evaluations = 1u64;
    let mut cursor = 0usize;
    let mut neighbors = std::mem::take(&mut scratch.neighbors);

    while cursor < scratch.beam.len() {
        let current = &mut scratch.beam[cursor];
        current.expanded = true;
        let expanded = current.candidate;
        scratch.visited.push(expanded);
        cursor += 1;

        adjacency.read_neighbors(expanded.id, &mut neighbors);
        for &u in &neighbors {
            if !scratch.mark(u) {
                continue;
            }
            evaluations += 1;
            let candidate = Candidate {
                distance: key(u),
                id: u,
            };
            let len = scratch.beam.len();
            if len >= beam && candidate >= scratch.beam[len - 1].candidate {
                continue;
            }
            let pos = scratch
                .beam
                .partition_point(|e| e.candidate < candidate);
            scratch.beam.insert(
                pos,
                BeamEntry {
                    candidate,
                    expanded: false,
                },
            );
            scratch.beam.truncate(beam);
            cursor = cursor.min(pos);
        }
        while cursor < scratch.beam.len() && scratch.beam[cursor].expanded {
            cursor += 1;
        }
    }
    scratch.neighbors = neighbors;
    evaluations
}

/// The ordering used by a greedy search.
#[derive(Clone, Copy, Debug)]
pub enum Comparator<'a> {
    /// Filter distance, then vector distance.
    Filter { vector: &'a [f32], filter: &'a Filter },
    /// Capped attribute distance at threshold `threshold`, then vector distance.
    Capped {
        vector: &'a [f32],
        attr: &'a Attribute,
        threshold: f64,
    },
    /// `weight * dist_A + dist` as a single component.
    Weighted {
        vector: &'a [f32],
        attr: &'a Attribute,
        weight: f64,
    },
    /// Vector distance only.
    Vector { vector: &'a [f32] },
}

impl Comparator<'_> {
    fn vector(&self) -> &[f32] {
        match self {
            Comparator::Filter { vector, .. }
            | Comparator::Capped { vector, .. }
            | Comparator::Weighted { vector, .. }
            | Comparator::Vector { vector } => vector,
        }
    }
}

/// Result of [`greedy_search`].
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyOutcome {
    /// Best `k` expanded vertices under the comparator.
    pub top: Vec<Candidate>,
    /// Every expanded vertex, in expansion order.
    pub visited: Vec<u32>,
    pub dc_count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchParams {
    pub k: usize,
    pub beam: usize,
}

impl SearchParams {
    pub fn new(k: usize, beam: usize) -> Result<Self> {
        if k == 0 {
            return Err(JagError::InvalidParam("k must be positive".into()));
        }
        if beam < k {
            return Err(JagError::InvalidParam(format!(
                "beam {beam} is smaller than k {k}"
            )));
        }
        Ok(SearchParams { k, beam })
    }
}

/// Filtered query result. `ids` are ordered by the query comparator, and
/// `matches[i]` tells whether `ids[i]` satisfies the filter.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub ids: Vec<u32>,
    pub matches: Vec<bool>,
    pub visited_count: usize,
    pub dc_count: u64,
}

impl SearchResult {
    /// Ids of the returned points that satisfy the filter.
    pub fn matching_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.ids
            .iter()
            .zip(&self.matches)
            .filter(|(_, m)| **m)
            .map(|(id, _)| *id)
    }
}

fn check_query_vector(g: &JagGraph, vector: &[f32]) -> Result<()> {
    if vector.len() != g.dim() {
        return Err(JagError::DimensionMismatch {
            expected: g.dim(),
            found: vector.len(),
        });
    }
    Ok(())
}

fn check_attr(g: &JagGraph, attr: &Attribute) -> Result<()> {
    if attr.family() != g.family() {
        return Err(JagError::FilterFamilyMismatch {
            attribute: g.family(),
            filter: attr.family(),
        });
    }
    if let (Some(expected), Some(found)) = (g.attr_width(), attr.width()) {
        if expected != found {
            return Err(JagError::WidthMismatch { expected, found });
        }
    }
    Ok(())
}

fn top_k(visited: &[Candidate], k: usize) -> Vec<Candidate> {
    let mut sorted = visited.to_vec();
    sorted.sort_unstable();
    sorted.truncate(k);
    sorted
}

/// Runs a greedy search on `g` with the given comparator, returning the best
/// `k` expanded vertices and the visited set.
pub fn greedy_search(
    g: &JagGraph,
    comparator: &Comparator,
    params: SearchParams,
    scratch: &mut SearchScratch,
) -> Result<GreedyOutcome> {
    let entry = g.entry().ok_or(JagError::EmptyIndex)?;
    check_query_vector(g, comparator.vector())?;
    let links = g.links();
    let n = g.len();
    let cfg = g.attr_config();
    let dc = match *comparator {
        Comparator::Filter { vector, filter } => {
            filter.check_compatible(g.family(), g.attr_width())?;
            let prepared = PreparedFilter::new(filter);
            beam_search(links, n, entry, params.beam, |u| filter_key(g, &prepared, vector, u), scratch)
        }
        Comparator::Capped {
            vector,
            attr,
            threshold,
        } => {
            check_attr(g, attr)?;
            beam_search(
                links,
                n,
                entry,
                params.beam,
                |u| {
                    let d = attr_distance_or_max(attr, g.attr(u), cfg);
                    UnifiedDistance::new(cap_distance(d, threshold), sq_l2(vector, g.vector(u)))
                },
                scratch,
            )
        }
        Comparator::Weighted {
            vector,
            attr,
            weight,
        } => {
            check_attr(g, attr)?;
            beam_search(
                links,
                n,
                entry,
                params.beam,
                |u| {
                    let d = attr_distance_or_max(attr, g.attr(u), cfg);
                    UnifiedDistance::scalar(weighted(d, sq_l2(vector, g.vector(u)), weight))
                },
                scratch,
            )
        }
        Comparator::Vector { vector } => beam_search(
            links,
            n,
            entry,
            params.beam,
            |u| UnifiedDistance::new(0.0, sq_l2(vector, g.vector(u))),
            scratch,
        ),
    };
    Ok(GreedyOutcome {
        top: top_k(scratch.visited(), params.k),
        visited: scratch.visited().iter().map(|c| c.id).collect(),
        dc_count: dc,
    })
}

#[inline]
fn filter_key(g: &JagGraph, filter: &PreparedFilter, vector: &[f32], u: u32) -> UnifiedDistance {
    // compatibility was checked once up front
    let primary = filter.distance(g.attr(u)).unwrap_or(f64::INFINITY);
    UnifiedDistance::new(primary, sq_l2(vector, g.vector(u)))
}

#[inline]
fn attr_distance_or_max(a: &Attribute, b: &Attribute, cfg: &AttrDistanceConfig) -> f64 {
    attribute_distance(a, b, cfg).unwrap_or(f64::INFINITY)
}

/// Filtered top-k query: greedy search under filter distance, then vector
/// distance.
pub fn query(
    g: &JagGraph,
    vector: &[f32],
    filter: &Filter,
    params: SearchParams,
    scratch: &mut SearchScratch,
) -> Result<SearchResult> {
    let outcome = greedy_search(g, &Comparator::Filter { vector, filter }, params, scratch)?;
    let matches = outcome
        .top
        .iter()
        .map(|c| c.distance.primary == 0.0)
        .collect();
    Ok(SearchResult {
        ids: outcome.top.iter().map(|c| c.id).collect(),
        matches,
        visited_count: outcome.visited.len(),
        dc_count: outcome.dc_count,
    })
}
