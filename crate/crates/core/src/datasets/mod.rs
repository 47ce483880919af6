//! Point and query containers, synthetic workloads, and binary file I/O.

mod gen;
pub mod io;

pub use gen::{
    boolean_filter_in_band, gen_boolean_workload, gen_label_workload, gen_query_vectors, gen_range_filters,
    gen_range_workload, gen_subset_workload, gen_vectors, BOOLEAN_BANDS, BOOLEAN_VARS, RANGE_DIVISORS, RANGE_MAX,
    SUBSET_SIZES, SUBSET_WIDTH,
};

use crate::attr::{matches, Attribute, Family, Filter};
use crate::error::{JagError, Result};
use crate::graph::check_attributes;
use crate::unified::PointRef;

/// Row-major vectors with one attribute per point.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub dim: usize,
    pub vectors: Vec<f32>,
    pub attrs: Vec<Attribute>,
}

impl Dataset {
    /// Checks dimensions and attribute homogeneity.
    pub fn new(dim: usize, vectors: Vec<f32>, attrs: Vec<Attribute>) -> Result<Self> {
        if dim == 0 {
            return Err(JagError::InvalidParam("dimension must be positive".into()));
        }
        if vectors.len() != attrs.len() * dim {
            return Err(JagError::DimensionMismatch {
                expected: attrs.len() * dim,
                found: vectors.len(),
            });
        }
        if let Some(a) = attrs.first() {
            check_attributes(&attrs, a.family())?;
        }
        Ok(Dataset { dim, vectors, attrs })
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn family(&self) -> Option<Family> {
        self.attrs.first().map(Attribute::family)
    }

    #[inline]
    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point(&self, i: usize) -> PointRef<'_> {
        PointRef {
            id: i as u32,
            vector: self.vector(i),
            attr: &self.attrs[i],
        }
    }

    /// Fraction of points matching `filter`.
    pub fn selectivity(&self, filter: &Filter) -> Result<f64> {
        if self.is_empty() {
            return Ok(0.0);
        }
        let mut hits = 0usize;
        for a in &self.attrs {
            hits += usize::from(matches(a, filter)?);
        }
        Ok(hits as f64 / self.len() as f64)
    }
}

/// Query vectors paired with filters.
#[derive(Clone, Debug, PartialEq)]
pub struct QuerySet {
    pub dim: usize,
    pub vectors: Vec<f32>,
    pub filters: Vec<Filter>,
}

impl QuerySet {
    pub fn new(dim: usize, vectors: Vec<f32>, filters: Vec<Filter>) -> Result<Self> {
        if dim == 0 {
            return Err(JagError::InvalidParam("dimension must be positive".into()));
        }
        if vectors.len() != filters.len() * dim {
            return Err(JagError::DimensionMismatch {
                expected: filters.len() * dim,
                found: vectors.len(),
            });
        }
        Ok(QuerySet { dim, vectors, filters })
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    #[inline]
    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Keeps only the queries at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> QuerySet {
        QuerySet {
            dim: self.dim,
            vectors: indices.iter().flat_map(|&i| self.vector(i).iter().copied()).collect(),
            filters: indices.iter().map(|&i| self.filters[i].clone()).collect(),
        }
    }
}

/// Parameters of a synthetic workload.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadSpec {
    pub n: usize,
    pub dim: usize,
    pub n_queries: usize,
    pub family: Family,
    /// Label count for the label family.
    pub labels: u32,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn new(n: usize, dim: usize, n_queries: usize, family: Family, seed: u64) -> Self {
        WorkloadSpec {
            n,
            dim,
            n_queries,
            family,
            labels: 12,
            seed,
        }
    }

    pub fn generate(&self) -> Result<(Dataset, QuerySet)> {
        if self.n == 0 || self.dim == 0 || self.n_queries == 0 {
            return Err(JagError::InvalidParam("workload sizes must be positive".into()));
        }
        let (attrs, filters) = match self.family {
            Family::Label => gen_label_workload(self.n, self.n_queries, self.labels, self.seed)?,
            Family::Scalar => gen_range_workload(self.n, self.n_queries, self.seed)?,
            Family::Bitset => gen_subset_workload(self.n, self.n_queries, self.seed)?,
            Family::Boolean => gen_boolean_workload(self.n, self.n_queries, self.seed)?,
        };
        let data = Dataset::new(self.dim, gen_vectors(self.n, self.dim, self.seed)?, attrs)?;
        let queries = QuerySet::new(self.dim, gen_query_vectors(self.n_queries, self.dim, self.seed)?, filters)?;
        Ok((data, queries))
    }
}
