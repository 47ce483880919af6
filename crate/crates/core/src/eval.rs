//! Recall, cost and throughput measurement over beam sweeps, selectivity
//! bands and index grids.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{brute_force_ground_truth, post_filter_search, pre_filter_search};
use crate::datasets::{Dataset, QuerySet};
use crate::error::{JagError, Result};
use crate::graph::JagGraph;
use crate::search::{query, SearchParams, SearchScratch};

/// Version of the CSV layout written by [`EvalReport::write_csv`].
pub const SCHEMA_VERSION: u32 = 1;

/// Beams tried when looking for the best recall under a cost budget.
pub const BUDGET_BEAMS: [usize; 31] = [
    10, 11, 12, 14, 16, 18, 20, 23, 26, 30, 34, 38, 43, 49, 56, 64, 73, 83, 95, 108, 123, 140, 160, 182, 207, 236, 269, 306,
    349, 397, 452,
];

/// `|result ∩ gt| / |gt|` over the first `k` entries of each, ignoring
/// `u32::MAX` padding. An empty ground truth gives 1.
pub fn recall_at_k(result: &[u32], gt: &[u32], k: usize) -> f64 {
    let truth: Vec<u32> = gt.iter().copied().filter(|&id| id != u32::MAX).take(k).collect();
    if truth.is_empty() {
        return 1.0;
    }
    let hits = result.iter().take(k).filter(|id| truth.contains(id)).count();
    hits as f64 / truth.len() as f64
}

/// A way of answering filtered queries.
#[derive(Clone, Copy, Debug)]
pub enum Method<'a> {
    /// Filtered greedy search on a joint attribute graph.
    Jag(&'a JagGraph),
    /// Unfiltered search on an attribute-blind graph, then filtering.
    PostFilter(&'a JagGraph),
    /// Exact scan of the matching points; the beam is ignored.
    PreFilter(&'a Dataset),
}

impl Method<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Jag(_) => "jag",
            Method::PostFilter(_) => "post-filter",
            Method::PreFilter(_) => "pre-filter",
        }
    }

    /// Matching result ids and distance computations for one query.
    pub fn run(&self, queries: &QuerySet, q: usize, k: usize, beam: usize, scratch: &mut SearchScratch) -> Result<(Vec<u32>, u64)> {
        let vector = queries.vector(q);
        let filter = &queries.filters[q];
        match *self {
            Method::Jag(g) => {
                let r = query(g, vector, filter, SearchParams::new(k, beam.max(k))?, scratch)?;
                Ok((r.matching_ids().collect(), r.dc_count))
            }
            Method::PostFilter(g) => {
                let r = post_filter_search(g, vector, filter, SearchParams::new(k, beam.max(k))?, scratch)?;
                Ok((r.ids, r.dc_count))
            }
            Method::PreFilter(d) => {
                let r = pre_filter_search(d, vector, filter, k)?;
                Ok((r.ids, r.dc_count))
            }
        }
    }
}

/// Per-query measurements at one beam.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamRun {
    pub beam: usize,
    pub recall: Vec<f64>,
    pub dc: Vec<u64>,
    /// Seconds per query.
    pub latency: Vec<f64>,
    /// Wall-clock seconds for the whole batch.
    pub wall: f64,
}

impl BeamRun {
    pub fn mean_recall(&self, subset: Option<&[usize]>) -> f64 {
        mean(subset, &self.recall, |x| *x)
    }

    pub fn mean_dc(&self, subset: Option<&[usize]>) -> f64 {
        mean(subset, &self.dc, |x| *x as f64)
    }
}

fn mean<T>(subset: Option<&[usize]>, xs: &[T], f: impl Fn(&T) -> f64) -> f64 {
    let (sum, count) = match subset {
        Some(ids) => (ids.iter().map(|&i| f(&xs[i])).sum::<f64>(), ids.len()),
        None => (xs.iter().map(f).sum::<f64>(), xs.len()),
    };
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Runs every query once at `beam`, in parallel on the current rayon pool.
pub fn run_beam(method: Method, queries: &QuerySet, gt: &[Vec<u32>], k: usize, beam: usize) -> Result<BeamRun> {
    if gt.len() != queries.len() {
        return Err(JagError::InvalidParam(format!(
            "{} ground-truth rows for {} queries",
            gt.len(),
            queries.len()
        )));
    }
    let start = Instant::now();
    let per_query = (0..queries.len())
        .into_par_iter()
        .map_init(SearchScratch::new, |scratch, q| {
            let t = Instant::now();
            let (ids, dc) = method.run(queries, q, k, beam, scratch)?;
            Ok((recall_at_k(&ids, &gt[q], k), dc, t.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    let wall = start.elapsed().as_secs_f64();
    Ok(BeamRun {
        beam,
        recall: per_query.iter().map(|r| r.0).collect(),
        dc: per_query.iter().map(|r| r.1).collect(),
        latency: per_query.iter().map(|r| r.2).collect(),
        wall,
    })
}

/// A named group of query indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub label: String,
    pub queries: Vec<usize>,
}

/// Assigns each query to the target selectivity nearest to its true
/// selectivity on a log scale. Queries matching nothing join the smallest
/// target.
pub fn bin_by_selectivity(data: &Dataset, queries: &QuerySet, targets: &[f64]) -> Result<Vec<Band>> {
    if targets.iter().any(|t| !(*t > 0.0)) || targets.is_empty() {
        return Err(JagError::InvalidParam("selectivity targets must be positive".into()));
    }
    let sel = queries
        .filters
        .par_iter()
        .map(|f| data.selectivity(f))
        .collect::<Result<Vec<_>>>()?;
    let mut bands: Vec<Band> = targets
        .iter()
        .map(|t| Band {
            label: format!("{t:e}"),
            queries: Vec::new(),
        })
        .collect();
    for (q, s) in sel.into_iter().enumerate() {
        let best = if s <= 0.0 {
            targets
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
        } else {
            targets
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1.ln() - s.ln()).abs().total_cmp(&(b.1.ln() - s.ln()).abs()))
                .map(|(i, _)| i)
        };
        bands[best.expect("targets non-empty")].queries.push(q);
    }
    Ok(bands)
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalRow {
    pub schema_version: u32,
    pub config_id: String,
    pub algorithm: String,
    pub beam: usize,
    pub selectivity_band: Option<String>,
    pub queries: usize,
    pub recall_at_k: f64,
    pub qps: f64,
    pub mean_dc: f64,
    pub p50_latency_s: f64,
    pub p95_latency_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    /// Writes the rows with a header line.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            out.write_record([
                "schema_version",
                "config_id",
                "algorithm",
                "beam",
                "selectivity_band",
                "queries",
                "recall_at_k",
                "qps",
                "mean_dc",
                "p50_latency_s",
                "p95_latency_s",
            ])
            .map_err(csv_error)?;
        }
        for row in &self.rows {
            out.serialize(row).map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> JagError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => JagError::Io(io),
        other => JagError::InvalidParam(format!("csv: {other:?}")),
    }
}

/// Settings for [`run_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub config_id: String,
    pub k: usize,
    pub beams: Vec<usize>,
    /// Worker count; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    /// When set, one row per band instead of one over all queries.
    pub bands: Option<Vec<Band>>,
}

fn summarize(config_id: &str, algorithm: &str, run: &BeamRun, band: Option<&Band>) -> EvalRow {
    let subset = band.map(|b| b.queries.as_slice());
    let mut lat: Vec<f64> = match subset {
        Some(ids) => ids.iter().map(|&i| run.latency[i]).collect(),
        None => run.latency.clone(),
    };
    lat.sort_by(f64::total_cmp);
    let count = subset.map_or(run.recall.len(), <[usize]>::len);
    EvalRow {
        schema_version: SCHEMA_VERSION,
        config_id: config_id.to_string(),
        algorithm: algorithm.to_string(),
        beam: run.beam,
        selectivity_band: band.map(|b| b.label.clone()),
        queries: count,
        recall_at_k: run.mean_recall(subset),
        qps: if run.wall > 0.0 { run.recall.len() as f64 / run.wall } else { 0.0 },
        mean_dc: run.mean_dc(subset),
        p50_latency_s: percentile(&lat, 0.50),
        p95_latency_s: percentile(&lat, 0.95),
    }
}

/// Sweeps every method over every beam. Ground truth is computed when not
/// supplied. Each beam gets one untimed warm-up pass before the timed pass.
pub fn run_experiment(
    methods: &[Method],
    data: &Dataset,
    queries: &QuerySet,
    ground_truth: Option<&[Vec<u32>]>,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    if cfg.k == 0 {
        return Err(JagError::InvalidParam("k must be positive".into()));
    }
    if cfg.beams.iter().any(|&b| b < cfg.k) {
        return Err(JagError::InvalidParam(format!("every beam must be at least k = {}", cfg.k)));
    }
    let body = || -> Result<EvalReport> {
        let computed;
        let gt = match ground_truth {
            Some(gt) => gt,
            None => {
                computed = brute_force_ground_truth(data, queries, cfg.k)?;
                &computed
            }
        };
        let mut report = EvalReport::default();
        for method in methods {
            for &beam in &cfg.beams {
                run_beam(*method, queries, gt, cfg.k, beam)?;
                let run = run_beam(*method, queries, gt, cfg.k, beam)?;
                match &cfg.bands {
                    Some(bands) => {
                        for band in bands {
                            report.rows.push(summarize(&cfg.config_id, method.name(), &run, Some(band)));
                        }
                    }
                    None => report.rows.push(summarize(&cfg.config_id, method.name(), &run, None)),
                }
            }
        }
        Ok(report)
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| JagError::InvalidParam(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

/// Best mean recall on a band among beams whose mean cost fits the budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetPoint {
    pub recall: f64,
    /// `None` when no beam fit the budget.
    pub beam: Option<usize>,
    pub mean_dc: f64,
}

/// For each band, the best mean recall over `beams` (tried in ascending
/// order) whose mean distance computations on that band stay within
/// `budget`. The sweep stops once every band is over budget.
pub fn best_recall_within_budget(
    method: Method,
    queries: &QuerySet,
    gt: &[Vec<u32>],
    bands: &[Band],
    k: usize,
    beams: &[usize],
    budget: f64,
) -> Result<Vec<BudgetPoint>> {
    let mut best = vec![
        BudgetPoint {
            recall: 0.0,
            beam: None,
            mean_dc: 0.0,
        };
        bands.len()
    ];
    let mut sorted: Vec<usize> = beams.iter().copied().filter(|&b| b >= k).collect();
    sorted.sort_unstable();
    sorted.dedup();
    let mut live: Vec<usize> = (0..bands.len()).filter(|&b| !bands[b].queries.is_empty()).collect();
    for beam in sorted {
        if live.is_empty() {
            break;
        }
        let subset: Vec<usize> = live.iter().flat_map(|&b| bands[b].queries.iter().copied()).collect();
        let sub_queries = queries.select(&subset);
        let sub_gt: Vec<Vec<u32>> = subset.iter().map(|&q| gt[q].clone()).collect();
        let run = run_beam(method, &sub_queries, &sub_gt, k, beam)?;
        let mut offset = 0;
        let mut still = Vec::with_capacity(live.len());
        for &b in &live {
            let m = bands[b].queries.len();
            let local: Vec<usize> = (offset..offset + m).collect();
            offset += m;
            let dc = run.mean_dc(Some(&local));
            if dc <= budget {
                let recall = run.mean_recall(Some(&local));
                if best[b].beam.is_none() || recall > best[b].recall {
                    best[b] = BudgetPoint {
                        recall,
                        beam: Some(beam),
                        mean_dc: dc,
                    };
                }
                still.push(b);
            }
        }
        live = still;
    }
    Ok(best)
}

/// Banded recall for a set of indices at a fixed cost budget.
#[derive(Clone, Debug, PartialEq)]
pub struct AblationGrid {
    pub indices: Vec<String>,
    pub bands: Vec<String>,
    /// `cells[i][b]` for index `i` and band `b`.
    pub cells: Vec<Vec<BudgetPoint>>,
}

impl AblationGrid {
    pub fn recall(&self, index: &str, band: usize) -> Option<f64> {
        let i = self.indices.iter().position(|n| n == index)?;
        Some(self.cells[i].get(band)?.recall)
    }

    /// Highest recall on `band` across all indices.
    pub fn band_best(&self, band: usize) -> f64 {
        self.cells
            .iter()
            .map(|row| row[band].recall)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with one row per (index, band).
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            schema_version: u32,
            index: &'a str,
            selectivity_band: &'a str,
            recall_at_k: f64,
            beam: Option<usize>,
            mean_dc: f64,
        }
        let mut out = csv::Writer::from_writer(w);
        for (i, name) in self.indices.iter().enumerate() {
            for (b, band) in self.bands.iter().enumerate() {
                let c = self.cells[i][b];
                out.serialize(Row {
                    schema_version: SCHEMA_VERSION,
                    index: name,
                    selectivity_band: band,
                    recall_at_k: c.recall,
                    beam: c.beam,
                    mean_dc: c.mean_dc,
                })
                .map_err(csv_error)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for AblationGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<16}", "index")?;
        for b in &self.bands {
            write!(f, " {b:>9}")?;
        }
        writeln!(f)?;
        for (i, name) in self.indices.iter().enumerate() {
            write!(f, "{name:<16}")?;
            for c in &self.cells[i] {
                write!(f, " {:>9.4}", c.recall)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Runs [`best_recall_within_budget`] for every named method.
pub fn run_ablation_grid(
    methods: &[(String, Method)],
    queries: &QuerySet,
    gt: &[Vec<u32>],
    bands: &[Band],
    k: usize,
    beams: &[usize],
    budget: f64,
) -> Result<AblationGrid> {
    let cells = methods
        .iter()
        .map(|(_, m)| best_recall_within_budget(*m, queries, gt, bands, k, beams, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationGrid {
        indices: methods.iter().map(|(n, _)| n.clone()).collect(),
        bands: bands.iter().map(|b| b.label.clone()).collect(),
        cells,
    })
}
