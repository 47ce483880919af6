//! Attribute and filter values, the binary match predicate, and the
//! continuous filter and attribute distances that steer graph construction
//! and filtered search.
//!
//! Four families are supported, each pairing one attribute type with one
//! filter type:
//!
//! | family    | attribute          | filter                    | filter distance            | attribute distance |
//! |-----------|--------------------|---------------------------|----------------------------|--------------------|
//! | `Label`   | `Label(id)`        | `Equality(id)`            | `1[a != f]`                | `1[a1 != a2]`      |
//! | `Scalar`  | `Scalar(x)`        | `Range([lo, hi])`         | gap to the interval        | `|a1 - a2|`        |
//! | `Bitset`  | `Bitset(bits)`     | `Subset(required)`        | `|required \ bits|`        | `|a1 xor a2|`      |
//! | `Boolean` | `BoolAssign(bits)` | `BoolPredicate(table)`    | min bit flips to satisfy   | Hamming            |
//!
//! Every filter distance is zero exactly when the filter matches, and every
//! unweighted attribute distance is zero exactly when the attributes are equal.

use std::fmt;

use crate::error::{JagError, Result};

/// Largest supported number of boolean variables.
pub const MAX_BOOL_VARS: u8 = 30;

/// Above this many variables a prepared boolean filter falls back to the
/// per-attribute radius search instead of a full distance map.
const PREPARED_MAP_MAX_VARS: u8 = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Label,
    Scalar,
    Bitset,
    Boolean,
}

impl Family {
    pub fn tag(self) -> u8 {
        match self {
            Family::Label => 0,
            Family::Scalar => 1,
            Family::Bitset => 2,
            Family::Boolean => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Family::Label),
            1 => Some(Family::Scalar),
            2 => Some(Family::Bitset),
            3 => Some(Family::Boolean),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Label => "label",
            Family::Scalar => "range",
            Family::Bitset => "subset",
            Family::Boolean => "boolean",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Family {
    type Err = JagError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label" | "equality" => Ok(Family::Label),
            "range" | "scalar" => Ok(Family::Scalar),
            "subset" | "bitset" => Ok(Family::Bitset),
            "boolean" | "bool" => Ok(Family::Boolean),
            other => Err(JagError::InvalidParam(format!("unknown family `{other}`"))),
        }
    }
}

/// Fixed-width bit vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = BitSet::new(len);
        for i in indices {
            bits.set(i, true);
        }
        bits
    }

    /// Builds a bit set from the low `len` bits of `value` (bit `i` of the
    /// value is position `i`).
    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut bits = BitSet::new(len);
        if len > 0 {
            let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
            bits.words[0] = value & mask;
        }
        bits
    }

    /// Parses a string of `0`/`1` characters; the first character is position 0.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = BitSet::new(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits.set(i, true),
                other => {
                    return Err(JagError::InvalidParam(format!(
                        "invalid bit character `{other}`"
                    )))
                }
            }
        }
        Ok(bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for width {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for width {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    /// Number of positions where the two sets differ.
    pub fn xor_count(&self, other: &BitSet) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    /// Number of positions set in `self` but not in `other`.
    pub fn difference_count(&self, other: &BitSet) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones())
            .sum()
    }

    /// Packs the bits into `len.div_ceil(8)` bytes, position 0 in the low
    /// bit of the first byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        for i in 0..nbytes {
            out.push((self.words[i / 8] >> ((i % 8) * 8)) as u8);
        }
        out
    }

    pub fn from_bytes(len: usize, bytes: &[u8]) -> Result<Self> {
        let nbytes = len.div_ceil(8);
        if bytes.len() != nbytes {
            return Err(JagError::Truncated(format!(
                "bit set of width {len} needs {nbytes} bytes, got {}",
                bytes.len()
            )));
        }
        let mut bits = BitSet::new(len);
        for (i, &b) in bytes.iter().enumerate() {
            bits.words[i / 8] |= u64::from(b) << ((i % 8) * 8);
        }
        // bits beyond `len` in the final byte are ignored
        if !len.is_multiple_of(64) {
            let last = bits.words.len() - 1;
            bits.words[last] &= (1u64 << (len % 64)) - 1;
        }
        Ok(bits)
    }
}

impl fmt::Display for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// An assignment to `width` boolean variables; variable `i` is bit `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: u32,
    width: u8,
}

impl Assignment {
    pub fn new(bits: u32, width: u8) -> Result<Self> {
        if width > MAX_BOOL_VARS {
            return Err(JagError::InvalidParam(format!(
                "boolean width {width} exceeds {MAX_BOOL_VARS}"
            )));
        }
        if u64::from(bits) >> width != 0 {
            return Err(JagError::InvalidParam(format!(
                "assignment {bits:#x} does not fit in {width} variables"
            )));
        }
        Ok(Assignment { bits, width })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn width(self) -> u8 {
        self.width
    }
}

/// Per-point metadata.
#[derive(Clone, Debug, PartialEq)]
pub enum Attribute {
    Label(u32),
    Scalar(f64),
    Bitset(BitSet),
    BoolAssign(Assignment),
}

impl Attribute {
    pub fn family(&self) -> Family {
        match self {
            Attribute::Label(_) => Family::Label,
            Attribute::Scalar(_) => Family::Scalar,
            Attribute::Bitset(_) => Family::Bitset,
            Attribute::BoolAssign(_) => Family::Boolean,
        }
    }

    /// Bit width for bit-valued families, `None` otherwise.
    pub fn width(&self) -> Option<usize> {
        match self {
            Attribute::Bitset(b) => Some(b.len()),
            Attribute::BoolAssign(a) => Some(a.width() as usize),
            _ => None,
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(JagError::InvalidParam(format!(
                "invalid range [{lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Distance from `x` to the nearest point of the interval.
    pub fn gap(self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

/// A boolean predicate over `vars` variables stored as a `2^vars` truth table.
/// Construction rejects predicates with no satisfying assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruthTable {
    vars: u8,
    table: BitSet,
    satisfying: u64,
}

impl TruthTable {
    pub fn new(vars: u8, table: BitSet) -> Result<Self> {
        if vars > MAX_BOOL_VARS {
            return Err(JagError::InvalidParam(format!(
                "boolean predicate over {vars} variables exceeds {MAX_BOOL_VARS}"
            )));
        }
        let size = 1usize << vars;
        if table.len() != size {
            return Err(JagError::WidthMismatch {
                expected: size,
                found: table.len(),
            });
        }
        let satisfying = u64::from(table.count_ones());
        if satisfying == 0 {
            return Err(JagError::UnsatisfiableFilter);
        }
        Ok(TruthTable {
            vars,
            table,
            satisfying,
        })
    }

    /// Tabulates `predicate` over every assignment.
    pub fn from_fn(vars: u8, predicate: impl Fn(u32) -> bool) -> Result<Self> {
        if vars > MAX_BOOL_VARS {
            return Err(JagError::InvalidParam(format!(
                "boolean predicate over {vars} variables exceeds {MAX_BOOL_VARS}"
            )));
        }
        let size = 1usize << vars;
        let mut table = BitSet::new(size);
        for x in 0..size {
            if predicate(x as u32) {
                table.set(x, true);
            }
        }
        TruthTable::new(vars, table)
    }

    pub fn vars(&self) -> u8 {
        self.vars
    }

    pub fn table(&self) -> &BitSet {
        &self.table
    }

    pub fn eval(&self, assignment: u32) -> bool {
        self.table.get(assignment as usize)
    }

    pub fn satisfying_count(&self) -> u64 {
        self.satisfying
    }

    /// Fraction of all assignments that satisfy the predicate.
    pub fn pass_rate(&self) -> f64 {
        self.satisfying as f64 / (1u64 << self.vars) as f64
    }

    /// Minimum Hamming distance from `assignment` to a satisfying assignment,
    /// found by scanning Hamming spheres of growing radius around it.
    pub fn min_flips(&self, assignment: u32) -> u32 {
        let n = u32::from(self.vars);
        for radius in 0..=n {
            if radius == 0 {
                if self.eval(assignment) {
                    return 0;
                }
                continue;
            }
            // Gosper's hack walks every n-bit mask with `radius` bits set.
            let limit = 1u64 << n;
            let mut mask = (1u64 << radius) - 1;
            while mask < limit {
                if self.eval(assignment ^ mask as u32) {
                    return radius;
                }
                let c = mask & mask.wrapping_neg();
                let r = mask + c;
                mask = (((r ^ mask) >> 2) / c) | r;
            }
        }
        unreachable!("truth table has at least one satisfying assignment")
    }

    /// Distance to the predicate for every assignment at once, by breadth
    /// first search outward from all satisfying assignments.
    pub fn distance_map(&self) -> Vec<u8> {
        let size = 1usize << self.vars;
        let mut dist = vec![u8::MAX; size];
        let mut frontier: Vec<u32> = self.table.iter_ones().map(|x| x as u32).collect();
        for &x in &frontier {
            dist[x as usize] = 0;
        }
        let mut level = 0u8;
        while !frontier.is_empty() {
            level += 1;
            let mut next = Vec::new();
            for &x in &frontier {
                for bit in 0..self.vars {
                    let y = x ^ (1 << bit);
                    if dist[y as usize] == u8::MAX {
                        dist[y as usize] = level;
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        dist
    }
}

/// A per-query constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum Filter {
    Equality(u32),
    Range(Interval),
    Subset(BitSet),
    BoolPredicate(TruthTable),
}

impl Filter {
    pub fn range(lo: f64, hi: f64) -> Result<Self> {
        Ok(Filter::Range(Interval::new(lo, hi)?))
    }

    pub fn family(&self) -> Family {
        match self {
            Filter::Equality(_) => Family::Label,
            Filter::Range(_) => Family::Scalar,
            Filter::Subset(_) => Family::Bitset,
            Filter::BoolPredicate(_) => Family::Boolean,
        }
    }

    pub fn width(&self) -> Option<usize> {
        match self {
            Filter::Subset(b) => Some(b.len()),
            Filter::BoolPredicate(t) => Some(t.vars() as usize),
            _ => None,
        }
    }

    /// Checks that this filter can be evaluated against attributes of the
    /// given family and width.
    pub fn check_compatible(&self, family: Family, width: Option<usize>) -> Result<()> {
        if self.family() != family {
            return Err(JagError::FilterFamilyMismatch {
                attribute: family,
                filter: self.family(),
            });
        }
        match (self.width(), width) {
            (Some(expected), Some(found)) if expected != found => {
                Err(JagError::WidthMismatch { expected, found })
            }
            _ => Ok(()),
        }
    }
}

fn family_mismatch(a: &Attribute, f: &Filter) -> JagError {
    JagError::FilterFamilyMismatch {
        attribute: a.family(),
        filter: f.family(),
    }
}

fn check_width(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(JagError::WidthMismatch { expected, found })
    }
}

/// The binary match predicate `g(a, f)`.
pub fn matches(a: &Attribute, f: &Filter) -> Result<bool> {
    match (a, f) {
        (Attribute::Label(x), Filter::Equality(y)) => Ok(x == y),
        (Attribute::Scalar(x), Filter::Range(r)) => Ok(r.contains(*x)),
        (Attribute::Bitset(bits), Filter::Subset(req)) => {
            check_width(req.len(), bits.len())?;
            Ok(req.difference_count(bits) == 0)
        }
        (Attribute::BoolAssign(x), Filter::BoolPredicate(t)) => {
            check_width(t.vars() as usize, x.width() as usize)?;
            Ok(t.eval(x.bits()))
        }
        _ => Err(family_mismatch(a, f)),
    }
}

/// How far `a` is from satisfying `f`; zero exactly when `matches(a, f)`.
pub fn filter_distance(a: &Attribute, f: &Filter) -> Result<f64> {
    match (a, f) {
        (Attribute::Label(x), Filter::Equality(y)) => Ok(if x == y { 0.0 } else { 1.0 }),
        (Attribute::Scalar(x), Filter::Range(r)) => Ok(r.gap(*x)),
        (Attribute::Bitset(bits), Filter::Subset(req)) => {
            check_width(req.len(), bits.len())?;
            Ok(f64::from(req.difference_count(bits)))
        }
        (Attribute::BoolAssign(x), Filter::BoolPredicate(t)) => {
            check_width(t.vars() as usize, x.width() as usize)?;
            Ok(f64::from(t.min_flips(x.bits())))
        }
        _ => Err(family_mismatch(a, f)),
    }
}

/// A filter with per-query precomputation for repeated distance evaluation.
///
/// Boolean predicates over at most 22 variables get a full distance map so
/// each evaluation is a table lookup; results equal [`filter_distance`].
#[derive(Clone, Debug)]
pub struct PreparedFilter<'a> {
    filter: &'a Filter,
    bool_distances: Option<Vec<u8>>,
}

impl<'a> PreparedFilter<'a> {
    pub fn new(filter: &'a Filter) -> Self {
        let bool_distances = match filter {
            Filter::BoolPredicate(t) if t.vars() <= PREPARED_MAP_MAX_VARS => {
                Some(t.distance_map())
            }
            _ => None,
        };
        PreparedFilter {
            filter,
            bool_distances,
        }
    }

    pub fn filter(&self) -> &Filter {
        self.filter
    }

    pub fn distance(&self, a: &Attribute) -> Result<f64> {
        match (a, &self.bool_distances) {
            (Attribute::BoolAssign(x), Some(map)) => {
                check_width(self.filter.width().unwrap_or(0), x.width() as usize)?;
                Ok(f64::from(map[x.bits() as usize]))
            }
            _ => filter_distance(a, self.filter),
        }
    }

    pub fn matches(&self, a: &Attribute) -> Result<bool> {
        matches(a, self.filter)
    }
}

/// Frequency weighting for bit-set attributes: shared rare bits make two
/// attributes close. The distance becomes `cap - sum(weights[i])` over the
/// bits both attributes carry.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelWeights {
    weights: Vec<f64>,
    cap: f64,
}

impl LabelWeights {
    /// `weights[i]` is the weight of bit `i`; `cap` must cover the largest
    /// possible overlap sum so distances stay non-negative.
    pub fn new(weights: Vec<f64>, cap: f64) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(JagError::InvalidParam(
                "label weights must be positive and finite".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(cap.is_finite() && cap >= total) {
            return Err(JagError::InvalidParam(format!(
                "weight cap {cap} is below the maximum overlap sum {total}"
            )));
        }
        Ok(LabelWeights { weights, cap })
    }

    /// Weights `ln(1 / p_i)` from per-bit frequencies `p_i` in `(0, 1)`.
    /// When `cap` is `None` the maximum overlap sum is used.
    pub fn from_frequencies(freqs: &[f64], cap: Option<f64>) -> Result<Self> {
        if freqs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(JagError::InvalidParam(
                "label frequencies must lie strictly between 0 and 1".into(),
            ));
        }
        let weights: Vec<f64> = freqs.iter().map(|p| (1.0 / p).ln()).collect();
        let cap = cap.unwrap_or_else(|| weights.iter().sum());
        LabelWeights::new(weights, cap)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    fn distance(&self, a: &BitSet, b: &BitSet) -> f64 {
        let mut shared = 0.0;
        for (wi, (x, y)) in a.words().iter().zip(b.words()).enumerate() {
            let mut both = x & y;
            while both != 0 {
                let bit = wi * 64 + both.trailing_zeros() as usize;
                shared += self.weights.get(bit).copied().unwrap_or(0.0);
                both &= both - 1;
            }
        }
        self.cap - shared
    }
}

/// Selects the attribute distance used while building.
#[derive(Clone, Debug, PartialEq)]
pub struct AttrDistanceConfig {
    family: Family,
    label_weights: Option<LabelWeights>,
}

impl AttrDistanceConfig {
    pub fn new(family: Family) -> Self {
        AttrDistanceConfig {
            family,
            label_weights: None,
        }
    }

    pub fn weighted(weights: LabelWeights) -> Self {
        AttrDistanceConfig {
            family: Family::Bitset,
            label_weights: Some(weights),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn label_weights(&self) -> Option<&LabelWeights> {
        self.label_weights.as_ref()
    }
}

/// Query-independent dissimilarity between two attributes.
pub fn attribute_distance(a1: &Attribute, a2: &Attribute, cfg: &AttrDistanceConfig) -> Result<f64> {
    for a in [a1, a2] {
        if a.family() != cfg.family {
            return Err(JagError::FilterFamilyMismatch {
                attribute: a.family(),
                filter: cfg.family,
            });
        }
    }
    match (a1, a2) {
        (Attribute::Label(x), Attribute::Label(y)) => Ok(if x == y { 0.0 } else { 1.0 }),
        (Attribute::Scalar(x), Attribute::Scalar(y)) => Ok((x - y).abs()),
        (Attribute::Bitset(x), Attribute::Bitset(y)) => {
            check_width(x.len(), y.len())?;
            Ok(match &cfg.label_weights {
                Some(w) => w.distance(x, y),
                None => f64::from(x.xor_count(y)),
            })
        }
        (Attribute::BoolAssign(x), Attribute::BoolAssign(y)) => {
            check_width(x.width() as usize, y.width() as usize)?;
            Ok(f64::from((x.bits() ^ y.bits()).count_ones()))
        }
        _ => unreachable!("families checked above"),
    }
}

/// `max(dist_A(a1, a2) - t, 0)`.
pub fn capped_attribute_distance(
    a1: &Attribute,
    a2: &Attribute,
    t: f64,
    cfg: &AttrDistanceConfig,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(JagError::InvalidParam(format!("threshold {t} is negative")));
    }
    Ok(cap_distance(attribute_distance(a1, a2, cfg)?, t))
}

#[inline]
pub(crate) fn cap_distance(d: f64, t: f64) -> f64 {
    (d - t).max(0.0)
}
