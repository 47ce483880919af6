//! Incremental insertion and whole-dataset construction.

use std::borrow::Cow;
use std::cell::Cell;

use parking_lot::Mutex;
use rand::seq::index;
use rayon::prelude::*;

use crate::attr::{AttrDistanceConfig, Attribute};
use crate::datasets::Dataset;
use crate::error::{JagError, Result};
use crate::graph::prune::{prune, Combine, PointStore, PruneRule, PruneScratch};
use crate::graph::thresholds::{derive_thresholds, derive_weights};
use crate::graph::{check_attributes, BuildMode, BuildParams, JagGraph, ModeSpec, ThresholdSpec};
use crate::metric::sq_l2;
use crate::rng;
use crate::search::{beam_search, Adjacency, SearchScratch};
use crate::unified::PointRef;

/// Mutable access to neighbor lists, one list at a time.
pub(crate) trait LinkStore: Adjacency {
    fn update<T>(&self, id: u32, f: impl FnOnce(&mut Vec<u32>) -> T) -> T;
}

impl Adjacency for [Mutex<Vec<u32>>] {
    fn read_neighbors(&self, id: u32, out: &mut Vec<u32>) {
        out.clear();
        out.extend_from_slice(&self[id as usize].lock());
    }
}

impl LinkStore for [Mutex<Vec<u32>>] {
    fn update<T>(&self, id: u32, f: impl FnOnce(&mut Vec<u32>) -> T) -> T {
        f(&mut self[id as usize].lock())
    }
}

impl Adjacency for [Cell<Vec<u32>>] {
    fn read_neighbors(&self, id: u32, out: &mut Vec<u32>) {
        let cell = &self[id as usize];
        let list = cell.take();
        out.clear();
        out.extend_from_slice(&list);
        cell.set(list);
    }
}

impl LinkStore for [Cell<Vec<u32>>] {
    fn update<T>(&self, id: u32, f: impl FnOnce(&mut Vec<u32>) -> T) -> T {
        let cell = &self[id as usize];
        let mut list = cell.take();
        let out = f(&mut list);
        cell.set(list);
        out
    }
}

/// Where a vertex's thresholds or weights come from.
enum PointValues<'a> {
    /// Precomputed, `stride` values per vertex.
    Table { stride: usize, values: Vec<f64> },
    /// The same values for every vertex.
    Shared(Cow<'a, [f64]>),
    /// Computed on demand from the vertex's prefix sample.
    Lazy {
        spec: ThresholdSpec,
        sample_size: usize,
        seed: u64,
    },
}

impl PointValues<'_> {
    fn get(&self, store: &PointStore, id: u32) -> Cow<'_, [f64]> {
        match self {
            PointValues::Table { stride, values } => {
                let s = id as usize * stride;
                Cow::Borrowed(&values[s..s + stride])
            }
            PointValues::Shared(v) => Cow::Borrowed(v),
            PointValues::Lazy {
                spec,
                sample_size,
                seed,
            } => Cow::Owned(prefix_thresholds(store, id, spec, *sample_size, *seed)),
        }
    }
}

/// Ids sampled without replacement from `[0, id)` for vertex `id`.
fn prefix_sample(id: u32, sample_size: usize, seed: u64) -> Vec<usize> {
    let pool = id as usize;
    if pool <= sample_size {
        return (0..pool).collect();
    }
    let mut r = rng::stream(seed, rng::THRESHOLD_SAMPLE, u64::from(id));
    index::sample(&mut r, pool, sample_size).into_vec()
}

fn prefix_thresholds(store: &PointStore, id: u32, spec: &ThresholdSpec, sample_size: usize, seed: u64) -> Vec<f64> {
    let sample = prefix_sample(id, sample_size, seed);
    derive_thresholds(store.attr(id), sample.iter().map(|&i| store.attr(i as u32)), spec, store.cfg)
        .expect("stored attributes are homogeneous")
}

/// Realized thresholds of vertex `id`: quantiles of attribute distances from
/// `id` to a seeded sample of up to `sample_size` earlier vertices.
pub fn point_thresholds(g: &JagGraph, id: u32, spec: &ThresholdSpec, sample_size: usize, seed: u64) -> Result<Vec<f64>> {
    if id as usize >= g.len() {
        return Err(JagError::InvalidParam(format!("vertex {id} out of range")));
    }
    let store = store_of(g);
    Ok(prefix_thresholds(&store, id, spec, sample_size.max(1), seed))
}

fn store_of(g: &JagGraph) -> PointStore<'_> {
    PointStore {
        dim: g.dim(),
        vectors: g.vectors(),
        attrs: g.attributes(),
        cfg: g.attr_config(),
    }
}

#[derive(Default)]
struct InsertScratch {
    search: SearchScratch,
    prune: PruneScratch,
    candidates: Vec<u32>,
}

struct Inserter<'a> {
    store: PointStore<'a>,
    values: PointValues<'a>,
    rule: PruneRule,
    beam: usize,
    entry: u32,
    n: usize,
}

impl Inserter<'_> {
    /// Links vertex `p` into the graph held by `links`.
    fn insert<L: LinkStore + ?Sized>(&self, links: &L, p: u32, work: &mut InsertScratch) {
        if p == self.entry {
            return;
        }
        let store = &self.store;
        let values = self.values.get(store, p);
        let pv = store.vector(p);
        work.candidates.clear();
        for &x in values.iter() {
            beam_search(
                links,
                self.n,
                self.entry,
                self.beam,
                |u| self.rule.combine.key(store.attr_distance(p, u), sq_l2(pv, store.vector(u)), x),
                &mut work.search,
            );
            work.candidates.extend(work.search.visited().iter().map(|c| c.id));
        }
        let out = prune(store, p, &work.candidates, &values, &self.rule, &mut work.prune);

        let rule = &self.rule;
        let prune_work = &mut work.prune;
        links.update(p, |list| {
            for &v in &out {
                if !list.contains(&v) {
                    list.push(v);
                }
            }
            if list.len() > rule.max_degree {
                *list = prune(store, p, list, &values, rule, prune_work);
            }
        });

        for &v in &out {
            links.update(v, |list| {
                if list.contains(&p) {
                    return;
                }
                list.push(p);
                if list.len() > rule.max_degree {
                    let vvals = self.values.get(store, v);
                    *list = prune(store, v, list, &vvals, rule, prune_work);
                }
            });
        }
    }
}

fn rule_for(params: &BuildParams, mode: &BuildMode) -> PruneRule {
    PruneRule {
        combine: Combine::of(mode),
        alpha: f64::from(params.alpha),
        max_degree: params.max_degree,
        quota: params.bucket_quota(mode.values().len()),
    }
}

fn attr_config(params: &BuildParams, attrs: &[Attribute]) -> AttrDistanceConfig {
    match &params.label_weights {
        Some(w) => AttrDistanceConfig::weighted(w.clone()),
        None => AttrDistanceConfig::new(attrs[0].family()),
    }
}

/// Weights from a seeded sample of the whole dataset. A sample whose
/// attribute distances have no spread falls back to the single weight `0`.
fn global_weights(store: &PointStore, n: usize, multipliers: &[f64], params: &BuildParams) -> Result<Vec<f64>> {
    let m = params.threshold_sample_size.min(n);
    let mut r = rng::stream(params.seed, rng::WEIGHT_SAMPLE, 0);
    let ids = index::sample(&mut r, n, m).into_vec();
    if ids.len() < 2 {
        return Ok(vec![0.0]);
    }
    let sample: Vec<PointRef> = ids
        .iter()
        .map(|&i| PointRef {
            id: i as u32,
            vector: store.vector(i as u32),
            attr: store.attr(i as u32),
        })
        .collect();
    match derive_weights(&sample, multipliers, store.cfg) {
        Ok(mut w) => {
            w.dedup();
            Ok(w)
        }
        Err(JagError::DegenerateAttributeSample) => Ok(vec![0.0]),
        Err(e) => Err(e),
    }
}

/// Builds a graph over `points`, inserting them in id order with vertex 0
/// as the entry.
pub fn build(points: Dataset, params: &BuildParams) -> Result<JagGraph> {
    params.validate()?;
    let Dataset { dim, vectors, attrs } = points;
    if attrs.is_empty() {
        return Err(JagError::InvalidParam("cannot build over an empty dataset".into()));
    }
    let cfg = attr_config(params, &attrs);
    check_attributes(&attrs, cfg.family())?;
    if vectors.len() != attrs.len() * dim {
        return Err(JagError::DimensionMismatch {
            expected: attrs.len() * dim,
            found: vectors.len(),
        });
    }
    let n = attrs.len();
    if n > u32::MAX as usize {
        return Err(JagError::InvalidParam("too many points".into()));
    }
    let store = PointStore {
        dim,
        vectors: &vectors,
        attrs: &attrs,
        cfg: &cfg,
    };

    let (mode, values) = match &params.mode {
        ModeSpec::Threshold(spec) => {
            let stride = spec.levels().len();
            let per_point = |p: usize| prefix_thresholds(&store, p as u32, spec, params.threshold_sample_size, params.seed);
            let rows: Vec<Vec<f64>> = if params.parallel {
                (0..n).into_par_iter().map(per_point).collect()
            } else {
                (0..n).map(per_point).collect()
            };
            (
                BuildMode::Threshold(spec.levels().to_vec()),
                PointValues::Table {
                    stride,
                    values: rows.concat(),
                },
            )
        }
        ModeSpec::Weight { multipliers } => {
            let w = global_weights(&store, n, multipliers, params)?;
            (BuildMode::Weight(w.clone()), PointValues::Shared(Cow::Owned(w)))
        }
    };

    let inserter = Inserter {
        store,
        values,
        rule: rule_for(params, &mode),
        beam: params.beam,
        entry: 0,
        n,
    };
    let links: Vec<Vec<u32>> = if params.parallel {
        let locked: Vec<Mutex<Vec<u32>>> = (0..n).map(|_| Mutex::new(Vec::new())).collect();
        (1..n as u32)
            .into_par_iter()
            .for_each_init(InsertScratch::default, |work, p| inserter.insert(locked.as_slice(), p, work));
        locked.into_iter().map(Mutex::into_inner).collect()
    } else {
        let mut plain: Vec<Vec<u32>> = vec![Vec::new(); n];
        let cells = Cell::from_mut(plain.as_mut_slice()).as_slice_of_cells();
        let mut work = InsertScratch::default();
        for p in 1..n as u32 {
            inserter.insert(cells, p, &mut work);
        }
        plain
    };
    drop(inserter);

    JagGraph::from_parts(dim, vectors, attrs, links, Some(0), params.max_degree, params.alpha, mode, cfg)
}

impl JagGraph {
    /// Inserts one point and returns its id. The graph's degree bound,
    /// alpha and thresholds or weights are used; `params` supplies the beam,
    /// sample size, bucket fraction and seed.
    pub fn insert(&mut self, vector: &[f32], attr: Attribute, params: &BuildParams) -> Result<u32> {
        params.validate()?;
        self.check_point(vector, &attr)?;
        let id = u32::try_from(self.len()).map_err(|_| JagError::InvalidParam("too many points".into()))?;
        if self.attr_width.is_none() {
            self.attr_width = attr.width();
        }
        self.vectors.extend_from_slice(vector);
        self.attrs.push(attr);
        self.links.push(Vec::new());
        let entry = *self.entry.get_or_insert(id);
        if entry == id {
            return Ok(id);
        }

        let store = PointStore {
            dim: self.dim,
            vectors: &self.vectors,
            attrs: &self.attrs,
            cfg: &self.attr_cfg,
        };
        let values = match &self.mode {
            BuildMode::Threshold(levels) => PointValues::Lazy {
                spec: ThresholdSpec::new(levels)?,
                sample_size: params.threshold_sample_size,
                seed: params.seed,
            },
            BuildMode::Weight(w) => PointValues::Shared(Cow::Borrowed(w)),
        };
        let rule = PruneRule {
            combine: Combine::of(&self.mode),
            alpha: f64::from(self.alpha),
            max_degree: self.max_degree,
            quota: super::bucket_quota(params.early_exit_fraction, self.max_degree, self.mode.values().len()),
        };
        let inserter = Inserter {
            store,
            values,
            rule,
            beam: params.beam,
            entry,
            n: self.attrs.len(),
        };
        let cells = Cell::from_mut(self.links.as_mut_slice()).as_slice_of_cells();
        inserter.insert(cells, id, &mut InsertScratch::default());
        Ok(id)
    }
}
