use rand::distributions::{Bernoulli, Distribution};
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::attr::{Assignment, Attribute, BitSet, Filter, Interval, TruthTable};
use crate::error::{JagError, Result};
use crate::rng;

/// Upper end of the scalar attribute domain `[0, RANGE_MAX]`.
pub const RANGE_MAX: f64 = 1e6;

/// Range queries span `RANGE_MAX / k` for `k` drawn from this set.
pub const RANGE_DIVISORS: [u64; 6] = [1, 10, 100, 1_000, 10_000, 100_000];

pub const SUBSET_WIDTH: usize = 30;

/// Number of required bits in a subset query.
pub const SUBSET_SIZES: [usize; 9] = [0, 2, 4, 6, 8, 10, 12, 14, 16];

pub const BOOLEAN_VARS: u8 = 15;

/// Pass-rate bands `(lo, hi]` for boolean predicates.
pub const BOOLEAN_BANDS: [(f64, f64); 4] = [
    (1.0 / 16.0, 1.0),
    (1.0 / 256.0, 1.0 / 16.0),
    (1.0 / 4096.0, 1.0 / 256.0),
    (0.0, 1.0 / 4096.0),
];

fn positive(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(JagError::InvalidParam(format!("{what} must be positive")));
    }
    Ok(())
}

fn normals(n: usize, d: usize, seed: u64, purpose: u64) -> Result<Vec<f32>> {
    positive(n, "point count")?;
    positive(d, "dimension")?;
    let mut r = rng::stream(seed, purpose, 0);
    Ok((0..n * d).map(|_| StandardNormal.sample(&mut r)).collect())
}

/// `n * d` i.i.d. standard normal coordinates, row-major.
pub fn gen_vectors(n: usize, d: usize, seed: u64) -> Result<Vec<f32>> {
    normals(n, d, seed, rng::VECTORS)
}

/// Query vectors from the same distribution as [`gen_vectors`] on an
/// independent stream.
pub fn gen_query_vectors(n: usize, d: usize, seed: u64) -> Result<Vec<f32>> {
    normals(n, d, seed, rng::QUERY_VECTORS)
}

/// Uniform labels in `[0, labels)` and equality filters on a uniform label.
pub fn gen_label_workload(n: usize, n_queries: usize, labels: u32, seed: u64) -> Result<(Vec<Attribute>, Vec<Filter>)> {
    positive(n, "point count")?;
    if labels == 0 {
        return Err(JagError::InvalidParam("label count must be positive".into()));
    }
    let mut ra = rng::stream(seed, rng::ATTRIBUTES, 0);
    let attrs = (0..n).map(|_| Attribute::Label(ra.gen_range(0..labels))).collect();
    let mut rf = rng::stream(seed, rng::FILTERS, 0);
    let filters = (0..n_queries).map(|_| Filter::Equality(rf.gen_range(0..labels))).collect();
    Ok((attrs, filters))
}

/// Integer scalars uniform in `[0, RANGE_MAX]` and mixed-width range filters.
pub fn gen_range_workload(n: usize, n_queries: usize, seed: u64) -> Result<(Vec<Attribute>, Vec<Filter>)> {
    positive(n, "point count")?;
    let mut ra = rng::stream(seed, rng::ATTRIBUTES, 0);
    let top = RANGE_MAX as u64;
    let attrs = (0..n).map(|_| Attribute::Scalar(ra.gen_range(0..=top) as f64)).collect();
    Ok((attrs, gen_range_filters(n_queries, &RANGE_DIVISORS, seed)?))
}

/// Range filters of length `RANGE_MAX / k`, `k` uniform over `divisors`, with
/// an integer lower end uniform over the positions that keep the interval
/// inside the domain.
pub fn gen_range_filters(n_queries: usize, divisors: &[u64], seed: u64) -> Result<Vec<Filter>> {
    if divisors.is_empty() || divisors.iter().any(|&k| k == 0 || k > RANGE_MAX as u64) {
        return Err(JagError::InvalidParam("range divisors must lie in [1, 1e6]".into()));
    }
    let mut r = rng::stream(seed, rng::FILTERS, 0);
    let top = RANGE_MAX as u64;
    (0..n_queries)
        .map(|_| {
            let k = divisors[r.gen_range(0..divisors.len())];
            let len = top / k;
            let lo = r.gen_range(0..=top - len);
            Ok(Filter::Range(Interval::new(lo as f64, (lo + len) as f64)?))
        })
        .collect()
}

/// 30-bit attributes with i.i.d. fair bits, and filters requiring `k`
/// distinct positions for `k` uniform over [`SUBSET_SIZES`].
pub fn gen_subset_workload(n: usize, n_queries: usize, seed: u64) -> Result<(Vec<Attribute>, Vec<Filter>)> {
    positive(n, "point count")?;
    let mut ra = rng::stream(seed, rng::ATTRIBUTES, 0);
    let mask = (1u64 << SUBSET_WIDTH) - 1;
    let attrs = (0..n)
        .map(|_| Attribute::Bitset(BitSet::from_u64(SUBSET_WIDTH, ra.gen::<u64>() & mask)))
        .collect();
    let mut rf = rng::stream(seed, rng::FILTERS, 0);
    let filters = (0..n_queries)
        .map(|_| {
            let k = SUBSET_SIZES[rf.gen_range(0..SUBSET_SIZES.len())];
            Filter::Subset(BitSet::from_indices(SUBSET_WIDTH, index::sample(&mut rf, SUBSET_WIDTH, k)))
        })
        .collect();
    Ok((attrs, filters))
}

/// A random predicate over [`BOOLEAN_VARS`] variables whose pass rate lies in
/// `band = (lo, hi]`. Each table entry is set with probability equal to the
/// band's midpoint; tables outside the band are redrawn.
pub fn boolean_filter_in_band(band: (f64, f64), vars: u8, r: &mut ChaCha8Rng) -> Result<Filter> {
    let (lo, hi) = band;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(JagError::InvalidParam(format!("invalid pass-rate band ({lo}, {hi}]")));
    }
    let size = 1usize << vars;
    if ((lo * size as f64).floor() as usize) >= ((hi * size as f64).floor() as usize) {
        return Err(JagError::InvalidParam(format!("no table over {vars} variables has a pass rate in ({lo}, {hi}]")));
    }
    let coin = Bernoulli::new((lo + hi) / 2.0).expect("midpoint is a probability");
    loop {
        let mut table = BitSet::new(size);
        let mut ones = 0usize;
        for i in 0..size {
            if coin.sample(r) {
                table.set(i, true);
                ones += 1;
            }
        }
        let rate = ones as f64 / size as f64;
        if ones > 0 && rate > lo && rate <= hi {
            return Ok(Filter::BoolPredicate(TruthTable::new(vars, table)?));
        }
    }
}

/// Uniform 15-variable assignments, and predicates whose pass-rate band is
/// chosen uniformly from [`BOOLEAN_BANDS`].
pub fn gen_boolean_workload(n: usize, n_queries: usize, seed: u64) -> Result<(Vec<Attribute>, Vec<Filter>)> {
    positive(n, "point count")?;
    let mut ra = rng::stream(seed, rng::ATTRIBUTES, 0);
    let attrs = (0..n)
        .map(|_| {
            let bits = ra.gen_range(0..1u32 << BOOLEAN_VARS);
            Assignment::new(bits, BOOLEAN_VARS).map(Attribute::BoolAssign)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rf = rng::stream(seed, rng::FILTERS, 0);
    let filters = (0..n_queries)
        .map(|_| {
            let band = BOOLEAN_BANDS[rf.gen_range(0..BOOLEAN_BANDS.len())];
            boolean_filter_in_band(band, BOOLEAN_VARS, &mut rf)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((attrs, filters))
}
