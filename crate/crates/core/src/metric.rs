//! Squared Euclidean distance and the distance-computation counter.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{JagError, Result};

/// Squared L2 distance with `f64` accumulation.
///
/// Only comparisons are ever made on vector distances, so the square root is
/// never taken. Callers must pass equal-length slices.
#[inline]
pub fn sq_l2(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let (rest_a, rest_b) = (chunks_a.remainder(), chunks_b.remainder());
    for (x, y) in chunks_a.zip(chunks_b) {
        for i in 0..4 {
            let d = f64::from(x[i]) - f64::from(y[i]);
            acc[i] += d * d;
        }
    }
    let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in rest_a.iter().zip(rest_b) {
        let d = f64::from(*x) - f64::from(*y);
        sum += d * d;
    }
    sum
}

/// Checked, counted squared L2 distance.
pub fn sq_l2_counted(a: &[f32], b: &[f32], counter: &DcCounter) -> Result<f64> {
    if a.len() != b.len() {
        return Err(JagError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    counter.add(1);
    Ok(sq_l2(a, b))
}

/// Shared count of vector distance evaluations.
#[derive(Debug, Default)]
pub struct DcCounter(AtomicU64);

impl DcCounter {
    pub fn new() -> Self {
        DcCounter(AtomicU64::new(0))
    }

    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) -> u64 {
        self.0.swap(0, Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(a: &[f32], b: &[f32]) -> f64 {
        let mut s = 0.0f64;
        for i in 0..a.len() {
            let d = a[i] as f64 - b[i] as f64;
            s += d * d;
        }
        s
    }

    #[test]
    fn three_four_five() {
        assert_eq!(sq_l2(&[0.0, 0.0], &[3.0, 4.0]), 25.0);
        let v = [1.5f32, -2.0, 0.25];
        assert_eq!(sq_l2(&v, &v), 0.0);
    }

    #[test]
    fn counted_increments_and_checks_dims() {
        let c = DcCounter::new();
        assert_eq!(sq_l2_counted(&[1.0], &[2.0], &c).unwrap(), 1.0);
        assert_eq!(sq_l2_counted(&[1.0], &[2.0], &c).unwrap(), 1.0);
        assert_eq!(c.get(), 2);
        assert!(matches!(
            sq_l2_counted(&[1.0], &[2.0, 3.0], &c),
            Err(JagError::DimensionMismatch { .. })
        ));
        assert_eq!(c.get(), 2);
        assert_eq!(c.reset(), 2);
        assert_eq!(c.get(), 0);
    }

    proptest! {
        #[test]
        fn matches_reference_loop(a in prop::collection::vec(-100f32..100.0, 16), b in prop::collection::vec(-100f32..100.0, 16)) {
            let fast = sq_l2(&a, &b);
            let slow = naive(&a, &b);
            prop_assert!((fast - slow).abs() <= 1e-6 * slow.max(1e-12));
            prop_assert_eq!(sq_l2(&a, &b), sq_l2(&b, &a));
            prop_assert!(fast >= 0.0);
        }
    }
}
