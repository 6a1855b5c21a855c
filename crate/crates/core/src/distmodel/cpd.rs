//! Complementary cumulative probability: P(v) = p(observation > v).
//!
//! Strict inequality on purpose: ties at a grid value are excluded. This is
//! the analysis kernel behind the heavy-tail views of per-card operation
//! counts and transaction amounts.

use crate::error::{Error, Result};
use crate::real::{real_from_count, Real};

/// An evaluated exceedance curve over an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CpdCurve<R: Real = f64> {
    grid: Vec<R>,
    probabilities: Vec<R>,
}

impl<R: Real> CpdCurve<R> {
    pub fn grid(&self) -> &[R] {
        &self.grid
    }

    pub fn probabilities(&self) -> &[R] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Probabilities never increase along the grid.
    pub fn is_monotone_non_increasing(&self) -> bool {
        self.probabilities.windows(2).all(|w| w[0] >= w[1])
    }
}

/// Evaluate the exceedance probability of `observations` at each grid value.
///
/// The grid must be sorted ascending; observations may come in any order.
pub fn cpd<R: Real>(observations: &[R], grid: &[R]) -> Result<CpdCurve<R>> {
    if observations.is_empty() {
        return Err(Error::EmptyData(
            "no observations for exceedance curve".into(),
        ));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("grid must be sorted ascending".into()));
    }
    let mut sorted = observations.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite observations"));
    let n = real_from_count::<R>(sorted.len() as u64);
    let probabilities = grid
        .iter()
        .map(|v| {
            let first_above = sorted.partition_point(|o| o <= v);
            real_from_count::<R>((sorted.len() - first_above) as u64) / n
        })
        .collect();
    Ok(CpdCurve {
        grid: grid.to_vec(),
        probabilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strict_inequality_counting() {
        let c = cpd::<f64>(&[1.0, 2.0, 3.0], &[2.0]).unwrap();
        assert!((c.probabilities()[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn grid_below_minimum_gives_one() {
        let c = cpd(&[1.0, 2.0, 3.0], &[0.0]).unwrap();
        assert_eq!(c.probabilities()[0], 1.0);
    }

    #[test]
    fn ties_are_excluded() {
        let c = cpd(&[5.0, 5.0, 5.0], &[5.0]).unwrap();
        assert_eq!(c.probabilities()[0], 0.0);
    }

    #[test]
    fn empty_observations_error() {
        assert!(matches!(cpd::<f64>(&[], &[1.0]), Err(Error::EmptyData(_))));
    }

    #[test]
    fn unsorted_grid_is_rejected() {
        assert!(cpd(&[1.0], &[2.0, 1.0]).is_err());
    }

    fn brute_force(observations: &[f64], v: f64) -> f64 {
        observations.iter().filter(|o| **o > v).count() as f64 / observations.len() as f64
    }

    proptest! {
        #[test]
        fn matches_brute_force_and_is_monotone(
            obs in proptest::collection::vec(-100.0f64..100.0, 1..100),
            mut grid in proptest::collection::vec(-120.0f64..120.0, 1..32),
        ) {
            grid.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let curve = cpd(&obs, &grid).unwrap();
            prop_assert!(curve.is_monotone_non_increasing());
            for (v, p) in grid.iter().zip(curve.probabilities()) {
                prop_assert!((p - brute_force(&obs, *v)).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(p));
            }
        }
    }
}
