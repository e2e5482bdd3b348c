//! Partition of a point cloud into the domain `D`, its complement sample `Y`,
//! the closed-in-`D` set `F`, and the field region `Ω = D \ F`.

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::measure::{DiscreteMeasure, IndexSet};

#[derive(Debug, Clone)]
pub struct DomainConfig {
    points: PointSet,
    d: IndexSet,
    y: IndexSet,
    f: IndexSet,
    omega: IndexSet,
    alpha: f64,
    sigma: f64,
}

/// Checks `0 < alpha < n` and `alpha <= 2`.
pub fn validate_alpha(alpha: f64, dim: usize) -> Result<()> {
    if alpha > 0.0 && alpha < dim as f64 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha { alpha, dim })
    }
}

impl DomainConfig {
    /// `d` and `y` must partition the point set; `f` must be a nonempty proper subset of `d`.
    pub fn new(points: PointSet, d: IndexSet, y: IndexSet, f: IndexSet, alpha: f64) -> Result<Self> {
        validate_alpha(alpha, points.dim())?;
        let n = points.len();
        if d.max().is_some_and(|m| m >= n) || y.max().is_some_and(|m| m >= n) {
            return Err(Error::InvalidPartition("index out of range".into()));
        }
        if !d.is_disjoint(&y) {
            return Err(Error::InvalidPartition("D and Y overlap".into()));
        }
        if d.len() + y.len() != n {
            return Err(Error::InvalidPartition(format!(
                "D and Y must cover all {n} points, got {} + {}",
                d.len(),
                y.len()
            )));
        }
        if f.is_empty() {
            return Err(Error::InvalidPartition("F is empty".into()));
        }
        if !f.is_subset(&d) {
            return Err(Error::InvalidPartition("F is not contained in D".into()));
        }
        let omega = d.difference(&f);
        if omega.is_empty() {
            return Err(Error::InvalidPartition("F = D leaves no field region".into()));
        }
        Ok(Self { points, d, y, f, omega, alpha, sigma: 1.0 })
    }

    /// Convenience: `Y = ∅`, `D` = every point.
    pub fn without_complement(points: PointSet, f: IndexSet, alpha: f64) -> Result<Self> {
        let d = IndexSet::range(0..points.len());
        Self::new(points, d, IndexSet::empty(), f, alpha)
    }

    /// Self-energy scale `sigma` in `(0, 1]` for the kernel diagonal.
    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::InvalidInput(format!("sigma = {sigma} must lie in (0, 1]")));
        }
        self.sigma = sigma;
        Ok(self)
    }

    /// Same points and domain with a different `F`.
    pub fn with_f(&self, f: IndexSet) -> Result<Self> {
        Self::new(self.points.clone(), self.d.clone(), self.y.clone(), f, self.alpha)?.with_sigma(self.sigma)
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `n - alpha`, the decay exponent of the Riesz kernel.
    pub fn codim(&self) -> f64 {
        self.dim() as f64 - self.alpha
    }

    pub fn d_indices(&self) -> &IndexSet {
        &self.d
    }

    pub fn y_indices(&self) -> &IndexSet {
        &self.y
    }

    pub fn f_indices(&self) -> &IndexSet {
        &self.f
    }

    pub fn omega_indices(&self) -> &IndexSet {
        &self.omega
    }
}

/// Distance `ρ` between the support of the charge and `F`.
///
/// Rejects the zero charge and charges touching `F` or leaving `Ω`.
pub fn validate_field_separation(theta: &DiscreteMeasure, cfg: &DomainConfig) -> Result<f64> {
    if theta.len() != cfg.points().len() {
        return Err(Error::DimensionMismatch { expected: cfg.points().len(), found: theta.len() });
    }
    let support = theta.support();
    if support.is_empty() {
        return Err(Error::FieldSeparation("the charge is zero".into()));
    }
    if !support.is_disjoint(cfg.f_indices()) {
        return Err(Error::FieldSeparation("the charge has mass on F".into()));
    }
    if !support.is_subset(cfg.omega_indices()) {
        return Err(Error::FieldSeparation("the charge has mass outside the field region".into()));
    }
    let ps = cfg.points();
    let rho = support
        .iter()
        .flat_map(|i| cfg.f_indices().iter().map(move |j| ps.distance(i, j)))
        .fold(f64::INFINITY, f64::min);
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_cfg() -> DomainConfig {
        let ps = PointSet::new(3, &[vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 2.0], vec![0.0, 0.0, 3.0]]).unwrap();
        DomainConfig::without_complement(ps, IndexSet::new([1, 2]), 2.0).unwrap()
    }

    #[test]
    fn separation_is_two_point_distance() {
        let cfg = line_cfg();
        let theta = DiscreteMeasure::dirac(3, 0, 1.0).unwrap();
        assert_eq!(validate_field_separation(&theta, &cfg).unwrap(), 2.0);
    }

    #[test]
    fn separation_rejects_charge_on_f_and_zero_charge() {
        let cfg = line_cfg();
        let on_f = DiscreteMeasure::dirac(3, 1, 1.0).unwrap();
        assert!(matches!(validate_field_separation(&on_f, &cfg), Err(Error::FieldSeparation(_))));
        let zero = DiscreteMeasure::zeros(3);
        assert!(matches!(validate_field_separation(&zero, &cfg), Err(Error::FieldSeparation(_))));
    }

    #[test]
    fn partition_checks() {
        let ps = PointSet::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let all = IndexSet::range(0..3);
        assert!(DomainConfig::new(ps.clone(), all.clone(), IndexSet::empty(), all.clone(), 1.0).is_err());
        assert!(DomainConfig::new(ps.clone(), all.clone(), IndexSet::empty(), IndexSet::empty(), 1.0).is_err());
        assert!(DomainConfig::new(ps.clone(), IndexSet::new([0, 1]), IndexSet::new([1, 2]), IndexSet::new([0]), 1.0).is_err());
        assert!(DomainConfig::new(ps.clone(), all.clone(), IndexSet::empty(), IndexSet::new([0]), 2.5).is_err());
        assert!(DomainConfig::new(ps, IndexSet::new([0, 1]), IndexSet::new([2]), IndexSet::new([0]), 1.5).is_ok());
    }

    #[test]
    fn alpha_range() {
        assert!(validate_alpha(2.0, 3).is_ok());
        assert!(validate_alpha(1.5, 2).is_ok());
        assert!(validate_alpha(2.0, 2).is_err());
        assert!(validate_alpha(0.0, 3).is_err());
        assert!(validate_alpha(2.1, 4).is_err());
    }
}
