//! Lexicographic (attribute-or-filter, vector) distances and the point-level
//! comparison rules used during construction and search.

use std::cmp::Ordering;

use crate::attr::{attribute_distance, cap_distance, filter_distance, AttrDistanceConfig, Attribute, Filter};
use crate::error::{JagError, Result};
use crate::metric::sq_l2;

/// Ordered pair compared lexicographically: `primary` first, then `secondary`.
///
/// `primary` is the capped attribute distance while building and the filter
/// distance while querying; `secondary` is the squared vector distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnifiedDistance {
    pub primary: f64,
    pub secondary: f64,
}

impl UnifiedDistance {
    pub fn new(primary: f64, secondary: f64) -> Self {
        UnifiedDistance { primary, secondary }
    }

    /// A single-component distance (weighted build comparators).
    pub fn scalar(value: f64) -> Self {
        UnifiedDistance {
            primary: value,
            secondary: 0.0,
        }
    }
}

impl Eq for UnifiedDistance {}

impl PartialOrd for UnifiedDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for UnifiedDistance {
    fn cmp(&self, other: &Self) -> Ordering {
        self.primary
            .total_cmp(&other.primary)
            .then_with(|| self.secondary.total_cmp(&other.secondary))
    }
}

/// A stored point: id, vector and attribute.
#[derive(Clone, Copy, Debug)]
pub struct PointRef<'a> {
    pub id: u32,
    pub vector: &'a [f32],
    pub attr: &'a Attribute,
}

/// A filtered query: vector and filter.
#[derive(Clone, Copy, Debug)]
pub struct QueryRef<'a> {
    pub vector: &'a [f32],
    pub filter: &'a Filter,
}

fn check_dims(expected: &[f32], found: &[f32]) -> Result<()> {
    if expected.len() == found.len() {
        Ok(())
    } else {
        Err(JagError::DimensionMismatch {
            expected: expected.len(),
            found: found.len(),
        })
    }
}

/// `D_A^t(p, u)`: capped attribute distance, then vector distance.
pub fn build_distance(p: &PointRef, u: &PointRef, t: f64, cfg: &AttrDistanceConfig) -> Result<UnifiedDistance> {
    check_dims(p.vector, u.vector)?;
    let attr = cap_distance(attribute_distance(p.attr, u.attr, cfg)?, t);
    Ok(UnifiedDistance::new(attr, sq_l2(p.vector, u.vector)))
}

/// `D_F(q, u)`: filter distance, then vector distance.
pub fn query_distance(q: &QueryRef, u: &PointRef) -> Result<UnifiedDistance> {
    check_dims(q.vector, u.vector)?;
    Ok(UnifiedDistance::new(
        filter_distance(u.attr, q.filter)?,
        sq_l2(q.vector, u.vector),
    ))
}

/// Orders `u` against `v` relative to base point `p` under threshold `t`;
/// exact ties fall back to ascending id.
pub fn compare_build(p: &PointRef, u: &PointRef, v: &PointRef, t: f64, cfg: &AttrDistanceConfig) -> Result<Ordering> {
    if !(t >= 0.0) {
        return Err(JagError::InvalidParam(format!("threshold {t} is negative")));
    }
    let du = build_distance(p, u, t, cfg)?;
    let dv = build_distance(p, v, t, cfg)?;
    Ok(du.cmp(&dv).then(u.id.cmp(&v.id)))
}

/// Orders `u` against `v` for query `q`; exact ties fall back to ascending id.
pub fn compare_query(q: &QueryRef, u: &PointRef, v: &PointRef) -> Result<Ordering> {
    let du = query_distance(q, u)?;
    let dv = query_distance(q, v)?;
    Ok(du.cmp(&dv).then(u.id.cmp(&v.id)))
}

/// `w * dist_A(a_u, a_v) + dist(x_u, x_v)`.
pub fn weighted_build_distance(u: &PointRef, v: &PointRef, w: f64, cfg: &AttrDistanceConfig) -> Result<f64> {
    if !(w >= 0.0) {
        return Err(JagError::InvalidParam(format!("weight {w} is negative")));
    }
    check_dims(u.vector, v.vector)?;
    Ok(weighted(attribute_distance(u.attr, v.attr, cfg)?, sq_l2(u.vector, v.vector), w))
}

#[inline]
pub(crate) fn weighted(attr_distance: f64, vector_distance: f64, w: f64) -> f64 {
    w * attr_distance + vector_distance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attr::{BitSet, Family};

    fn pt<'a>(id: u32, vector: &'a [f32], attr: &'a Attribute) -> PointRef<'a> {
        PointRef { id, vector, attr }
    }

    #[test]
    fn lexicographic_order() {
        let a = UnifiedDistance::new(0.0, 1.0);
        let b = UnifiedDistance::new(0.0, 2.0);
        let c = UnifiedDistance::new(0.5, 0.1);
        assert!(a < b);
        assert!(b < c);
        assert!(UnifiedDistance::new(0.0, 9.9) < UnifiedDistance::new(0.5, 0.1));
    }

    #[test]
    fn compare_build_ties_on_attribute_use_vector() {
        let cfg = AttrDistanceConfig::new(Family::Scalar);
        let (ap, au, av) = (Attribute::Scalar(0.0), Attribute::Scalar(1.0), Attribute::Scalar(2.0));
        let p = pt(0, &[0.0], &ap);
        let u = pt(1, &[1.0], &au);
        let v = pt(2, &[1.5], &av);
        // with t = 5 both capped distances are zero, so the vector decides
        assert_eq!(compare_build(&p, &u, &v, 5.0, &cfg).unwrap(), Ordering::Less);
        let v_close = pt(2, &[0.1], &av);
        assert_eq!(compare_build(&p, &u, &v_close, 5.0, &cfg).unwrap(), Ordering::Greater);
        // with t = 0 the attribute decides even though v is nearer in vector space
        assert_eq!(compare_build(&p, &u, &v_close, 0.0, &cfg).unwrap(), Ordering::Less);
    }

    #[test]
    fn compare_build_id_tiebreak() {
        let cfg = AttrDistanceConfig::new(Family::Label);
        let a = Attribute::Label(0);
        let p = pt(0, &[0.0], &a);
        let u = pt(7, &[1.0], &a);
        let v = pt(3, &[-1.0], &a);
        assert_eq!(compare_build(&p, &u, &v, 0.0, &cfg).unwrap(), Ordering::Greater);
    }

    #[test]
    fn compare_build_dimension_mismatch() {
        let cfg = AttrDistanceConfig::new(Family::Label);
        let a = Attribute::Label(0);
        let p = pt(0, &[0.0], &a);
        let u = pt(1, &[1.0, 2.0], &a);
        let err = compare_build(&p, &u, &p, 0.0, &cfg).unwrap_err();
        assert!(matches!(err, JagError::DimensionMismatch { .. }));
    }

    #[test]
    fn compare_query_prefers_matching() {
        let f = Filter::Subset(BitSet::parse("11").unwrap());
        let q = QueryRef { vector: &[0.0], filter: &f };
        let (au, av) = (Attribute::Bitset(BitSet::parse("10").unwrap()), Attribute::Bitset(BitSet::parse("11").unwrap()));
        let u = pt(0, &[0.1], &au);
        let v = pt(1, &[5.0], &av);
        assert_eq!(compare_query(&q, &u, &v).unwrap(), Ordering::Greater);
        let v2 = pt(1, &[5.0], &au);
        assert_eq!(compare_query(&q, &u, &v2).unwrap(), Ordering::Less);
    }

    #[test]
    fn weighted_linear_combination() {
        let cfg = AttrDistanceConfig::new(Family::Scalar);
        let (au, av) = (Attribute::Scalar(0.0), Attribute::Scalar(2.0));
        let u = pt(0, &[0.0, 0.0], &au);
        // squared vector distance 3
        let xv = [1.0, 2f32.sqrt()];
        let v = pt(1, &xv, &av);
        let d = weighted_build_distance(&u, &v, 5.0, &cfg).unwrap();
        assert!((d - 13.0).abs() < 1e-6);
        let d0 = weighted_build_distance(&u, &v, 0.0, &cfg).unwrap();
        assert_eq!(d0, sq_l2(u.vector, v.vector));
        assert!(weighted_build_distance(&u, &v, -1.0, &cfg).is_err());
    }
}
