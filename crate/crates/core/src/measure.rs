//! Index sets and nonnegative discrete measures over a point set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted set of point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new<I: IntoIterator<Item = usize>>(items: I) -> Self {
        let mut v: Vec<usize> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn range(r: std::ops::Range<usize>) -> Self {
        Self(r.collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet::new(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| other.contains(i)).collect())
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| !other.contains(i))
    }

    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> IndexSet {
        IndexSet(self.iter().filter(|&i| keep(i)).collect())
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        IndexSet::new(iter)
    }
}

/// Nonnegative weights indexed by point; index `i` carries mass `weights[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput(format!("weight {w} at index {i} is not a finite nonnegative number")));
        }
        Ok(Self { weights })
    }

    /// Clamps tiny negative round-off to zero; anything below `-tol` is an error.
    pub(crate) fn from_solver(weights: Vec<f64>, tol: f64) -> Result<Self> {
        let mut weights = weights;
        for w in &mut weights {
            if *w < 0.0 {
                if *w < -tol {
                    return Err(Error::InvalidInput(format!("solver produced negative weight {w}")));
                }
                *w = 0.0;
            }
        }
        Self::new(weights)
    }

    pub fn zeros(n: usize) -> Self {
        Self { weights: vec![0.0; n] }
    }

    pub fn dirac(n: usize, at: usize, mass: f64) -> Result<Self> {
        let mut m = Self::zeros(n);
        m.set(at, mass)?;
        Ok(m)
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, f64)]) -> Result<Self> {
        let mut m = Self::zeros(n);
        for &(i, w) in pairs {
            if i >= n {
                return Err(Error::InvalidInput(format!("index {i} out of range {n}")));
            }
            m.set(i, m.weights[i] + w)?;
        }
        Ok(m)
    }

    pub fn set(&mut self, i: usize, w: f64) -> Result<()> {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidInput(format!("weight {w} must be finite and nonnegative")));
        }
        self.weights[i] = w;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mass_on(&self, set: &IndexSet) -> f64 {
        set.iter().map(|i| self.weights[i]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    pub fn support(&self) -> IndexSet {
        IndexSet(self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, _)| i).collect())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.weights.iter().map(|w| w * factor).collect())
    }

    pub fn plus(&self, other: &DiscreteMeasure) -> Result<Self> {
        self.check_len(other)?;
        Self::new(self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect())
    }

    /// Signed difference `self - other` as a plain weight vector.
    pub fn minus(&self, other: &DiscreteMeasure) -> Result<Vec<f64>> {
        self.check_len(other)?;
        Ok(self.weights.iter().zip(&other.weights).map(|(a, b)| a - b).collect())
    }

    pub fn restrict(&self, indices: &IndexSet) -> Self {
        restrict(self, indices)
    }

    /// Largest absolute weight difference.
    pub fn max_abs_diff(&self, other: &DiscreteMeasure) -> f64 {
        self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn check_len(&self, other: &DiscreteMeasure) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(())
    }
}

/// The trace of `mu` on `indices`: weights outside are zeroed.
pub fn restrict(mu: &DiscreteMeasure, indices: &IndexSet) -> DiscreteMeasure {
    let weights = mu.weights.iter().enumerate().map(|(i, &w)| if indices.contains(i) { w } else { 0.0 }).collect();
    DiscreteMeasure { weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn restrict_examples() {
        let mu = DiscreteMeasure::from_pairs(3, &[(1, 0.3), (2, 0.1)]).unwrap();
        assert_eq!(restrict(&mu, &IndexSet::range(0..3)), mu);
        assert!(restrict(&mu, &IndexSet::empty()).is_zero());
        let r = restrict(&mu, &IndexSet::new([2]));
        assert_eq!(r.weights(), &[0.0, 0.0, 0.1]);
        assert_eq!(r.total_mass(), 0.1);
    }

    #[test]
    fn negative_weights_rejected() {
        assert!(DiscreteMeasure::new(vec![0.1, -0.2]).is_err());
        assert!(DiscreteMeasure::new(vec![f64::NAN]).is_err());
        assert!(DiscreteMeasure::from_solver(vec![-1e-18, 0.5], 1e-12).is_ok());
    }

    #[test]
    fn index_set_algebra() {
        let a = IndexSet::new([5, 1, 3, 1]);
        let b = IndexSet::new([3, 4]);
        assert_eq!(a.as_slice(), &[1, 3, 5]);
        assert_eq!(a.union(&b).as_slice(), &[1, 3, 4, 5]);
        assert_eq!(a.intersection(&b).as_slice(), &[3]);
        assert_eq!(a.difference(&b).as_slice(), &[1, 5]);
        assert!(IndexSet::new([3]).is_subset(&a));
    }

    proptest! {
        #[test]
        fn restrict_is_idempotent_and_splits_mass(
            w in proptest::collection::vec(0.0f64..10.0, 1..40),
            mask in proptest::collection::vec(any::<bool>(), 40),
        ) {
            let mu = DiscreteMeasure::new(w.clone()).unwrap();
            let a = IndexSet::new((0..w.len()).filter(|&i| mask[i]));
            let ac = IndexSet::new((0..w.len()).filter(|&i| !mask[i]));
            let once = restrict(&mu, &a);
            prop_assert_eq!(restrict(&once, &a), once.clone());
            // Disjoint traces partition the weights, so the sums agree exactly.
            let split: Vec<f64> = once.weights().iter().zip(restrict(&mu, &ac).weights()).map(|(x, y)| x + y).collect();
            prop_assert_eq!(split, w);
            // Mass sums differ only by summation-order rounding.
            let total = once.total_mass() + restrict(&mu, &ac).total_mass();
            prop_assert!((total - mu.total_mass()).abs() <= 1e-14 * mu.total_mass().max(1.0));
        }
    }
}
