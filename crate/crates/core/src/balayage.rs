//! Balayage (sweeping) onto a target set as projection onto the cone of
//! nonnegative measures carried by the set, in the energy norm of a kernel.
//!
//! The projection `ν` of `ξ` satisfies the discrete balayage conditions
//! `U^ν = U^ξ` on the support of `ν` and `U^ν ≥ U^ξ` on the rest of the target.

use nalgebra::{Cholesky, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::kernel::{self, KernelMatrix};
use crate::measure::{DiscreteMeasure, IndexSet};
use crate::qp::{self, QpPath, Start};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAlgorithm {
    /// Active-set projection starting from the zero measure. Always valid.
    ConeProjection,
    /// Linear solve assuming full support; falls back to the active set if a weight goes negative.
    DirectSolve,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct KktResiduals {
    /// `max |U^ν − U^ξ|` over the support of `ν`, relative.
    pub equality_on_support: f64,
    /// `max (U^ξ − U^ν)⁺` over the target, relative.
    pub inequality_on_target: f64,
    /// `max (U^ν − U^ξ)⁺` over kernel points off the target, relative. Not
    /// enforced by the projection; a discrete domination-principle monitor.
    pub domination_off_target: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BalayageResult {
    pub swept: DiscreteMeasure,
    pub mass_in: f64,
    pub mass_out: f64,
    pub kkt: KktResiduals,
    pub algorithm: SweepAlgorithm,
    pub path: QpPath,
    pub active_set_size: usize,
}

impl BalayageResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Sweeps `xi` onto `q` with the cone-projection algorithm.
pub fn sweep(k: &KernelMatrix, xi: &DiscreteMeasure, q: &IndexSet) -> Result<BalayageResult> {
    sweep_with(k, xi, q, SweepAlgorithm::ConeProjection)
}

pub fn sweep_with(k: &KernelMatrix, xi: &DiscreteMeasure, q: &IndexSet, algorithm: SweepAlgorithm) -> Result<BalayageResult> {
    if q.is_empty() {
        return Err(Error::InvalidInput("cannot sweep onto an empty set".into()));
    }
    let q_local = k.locals(q)?;
    let u_xi = kernel::potential(k, xi)?;
    let mass_in = xi.total_mass();

    // A measure already carried by the target is its own balayage.
    if xi.support().is_subset(q) {
        return finish(k, xi.clone(), &u_xi, q, mass_in, algorithm, QpPath::Direct);
    }

    let sub = DMatrix::from_fn(q_local.len(), q_local.len(), |i, j| k.matrix()[(q_local[i], q_local[j])]);
    let b: Vec<f64> = q.iter().map(|i| u_xi[i]).collect();
    let start = match algorithm {
        SweepAlgorithm::ConeProjection => Start::Empty,
        SweepAlgorithm::DirectSolve => Start::Full,
    };
    let out = qp::project_nonnegative(&sub, &b, start)?;
    let mut w = vec![0.0; k.ambient()];
    for (g, x) in q.iter().zip(&out.x) {
        w[g] = *x;
    }
    let swept = DiscreteMeasure::from_solver(w, 1e-12 * mass_in.max(1.0))?;
    finish(k, swept, &u_xi, q, mass_in, algorithm, out.path)
}

fn finish(
    k: &KernelMatrix,
    swept: DiscreteMeasure,
    u_xi: &[f64],
    q: &IndexSet,
    mass_in: f64,
    algorithm: SweepAlgorithm,
    path: QpPath,
) -> Result<BalayageResult> {
    let u_nu = kernel::potential(k, &swept)?;
    let kkt = residuals(k, &swept, &u_nu, u_xi, q);
    Ok(BalayageResult {
        mass_out: swept.total_mass(),
        active_set_size: swept.support().len(),
        swept,
        mass_in,
        kkt,
        algorithm,
        path,
    })
}

fn residuals(k: &KernelMatrix, nu: &DiscreteMeasure, u_nu: &[f64], u_xi: &[f64], q: &IndexSet) -> KktResiduals {
    let scale = q.iter().map(|i| u_xi[i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut r = KktResiduals::default();
    for i in q.iter() {
        let d = u_nu[i] - u_xi[i];
        if nu.weight(i) > 0.0 {
            r.equality_on_support = r.equality_on_support.max(d.abs() / scale);
        }
        r.inequality_on_target = r.inequality_on_target.max(-d / scale);
    }
    for g in k.labels().iter().filter(|&g| !q.contains(g)) {
        r.domination_off_target = r.domination_off_target.max((u_nu[g] - u_xi[g]) / scale);
    }
    r.inequality_on_target = r.inequality_on_target.max(0.0);
    r.domination_off_target = r.domination_off_target.max(0.0);
    r
}

/// Balayage of unit point masses: column `x` holds the weights of the swept Dirac at `x` over `q`.
#[derive(Debug, Clone)]
pub struct DiracSweepMatrix {
    pub target: IndexSet,
    pub sources: IndexSet,
    /// `|target| × |sources|`.
    pub weights: DMatrix<f64>,
    /// Columns that needed the active-set fallback.
    pub fallback_columns: usize,
}

impl DiracSweepMatrix {
    pub fn column_mass(&self, source: usize) -> Option<f64> {
        let c = self.sources.as_slice().binary_search(&source).ok()?;
        Some(self.weights.column(c).sum())
    }

    /// `Σ_x ξ(x) · column(x)`, returned as an ambient-indexed measure.
    pub fn superpose(&self, xi: &DiscreteMeasure) -> Result<DiscreteMeasure> {
        let mut w = vec![0.0; xi.len()];
        for (c, s) in self.sources.iter().enumerate() {
            let m = xi.weight(s);
            if m != 0.0 {
                for (r, t) in self.target.iter().enumerate() {
                    w[t] += m * self.weights[(r, c)];
                }
            }
        }
        let off = xi.support().difference(&self.sources);
        if !off.is_empty() {
            return Err(Error::InvalidInput(format!("measure charges {} points that are not sources", off.len())));
        }
        DiscreteMeasure::new(w)
    }
}

/// Sweeps every source Dirac onto `q` with one factorization of `K_qq`.
///
/// Columns whose full-support solve has a negative weight are recomputed by
/// the active-set projection.
pub fn dirac_sweep_matrix(k: &KernelMatrix, sources: &IndexSet, q: &IndexSet) -> Result<DiracSweepMatrix> {
    if q.is_empty() {
        return Err(Error::InvalidInput("cannot sweep onto an empty set".into()));
    }
    let q_local = k.locals(q)?;
    let s_local = k.locals(sources)?;
    let kqq = DMatrix::from_fn(q_local.len(), q_local.len(), |i, j| k.matrix()[(q_local[i], q_local[j])]);
    let rhs = DMatrix::from_fn(q_local.len(), s_local.len(), |i, j| k.matrix()[(q_local[i], s_local[j])]);
    let chol = Cholesky::new(kqq.clone()).ok_or(Error::NotPositiveDefinite { size: q_local.len() })?;
    let mut weights = chol.solve(&rhs);
    let mut fallback_columns = 0;
    for (c, s) in sources.iter().enumerate() {
        if let Ok(r) = q.as_slice().binary_search(&s) {
            weights.column_mut(c).fill(0.0);
            weights[(r, c)] = 1.0;
            continue;
        }
        if weights.column(c).iter().any(|&v| v < 0.0) {
            fallback_columns += 1;
            let b: Vec<f64> = rhs.column(c).iter().copied().collect();
            let out = qp::project_nonnegative(&kqq, &b, Start::Full)?;
            for (r, x) in out.x.iter().enumerate() {
                weights[(r, c)] = *x;
            }
        }
    }
    Ok(DiracSweepMatrix { target: q.clone(), sources: sources.clone(), weights, fallback_columns })
}

/// Mass deficiency `1 − (ε_x)^{Δᶜ}(ℝⁿ)` of the swept unit mass at `x`: the
/// harmonic measure of the point at infinity.
pub fn harmonic_measure_at_infinity(k: &KernelMatrix, x: usize, delta_complement: &IndexSet) -> Result<f64> {
    if delta_complement.contains(x) {
        return Err(Error::Precondition(format!("point {x} lies in the complement set")));
    }
    if delta_complement.is_empty() {
        return Ok(1.0);
    }
    let swept = sweep(k, &DiscreteMeasure::dirac(k.ambient(), x, 1.0)?, delta_complement)?;
    Ok(1.0 - swept.mass_out)
}

/// Harmonic measure of `e ⊂ Δᶜ` seen from `x`, optionally including the atom at infinity.
pub fn harmonic_measure(
    k: &KernelMatrix,
    x: usize,
    delta_complement: &IndexSet,
    e: &IndexSet,
    include_infinity: bool,
) -> Result<f64> {
    if delta_complement.contains(x) {
        return Err(Error::Precondition(format!("point {x} lies in the complement set")));
    }
    let (partial, total) = if delta_complement.is_empty() {
        (0.0, 0.0)
    } else {
        let swept = sweep(k, &DiscreteMeasure::dirac(k.ambient(), x, 1.0)?, delta_complement)?;
        (swept.swept.mass_on(e), swept.mass_out)
    };
    Ok(if include_infinity { partial + 1.0 - total } else { partial })
}

#[derive(Debug, Clone, Serialize)]
pub struct ShellTerm {
    pub j: u32,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub points: usize,
    pub capacity: f64,
    /// `c(Q_j) / q^(j(n−α))`.
    pub term: f64,
    pub partial_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThinnessTrend {
    /// Terms shrink relative to the running sum: consistent with thinness at infinity.
    Saturating,
    /// Terms do not decay over the sampled shells: consistent with non-thinness.
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThinnessReport {
    pub q_ratio: f64,
    pub shells: Vec<ShellTerm>,
    /// Shells lying beyond the sampled radius are dropped from the trend.
    pub sampled_radius: f64,
    pub trend: ThinnessTrend,
}

impl ThinnessReport {
    pub fn partial_sums(&self) -> Vec<f64> {
        self.shells.iter().map(|s| s.partial_sum).collect()
    }
}

/// Partial sums of `Σ_j c(Q_j) / q^(j(n−α))` over shells `Q_j = Q ∩ {q^j < |y| ≤ q^(j+1)}`, `j = 1..=j_max`.
///
/// `k` is the Riesz kernel of `ps`; shell capacities use its sub-blocks.
pub fn thinness_partial_sums(
    k: &KernelMatrix,
    ps: &PointSet,
    q: &IndexSet,
    q_ratio: f64,
    j_max: u32,
) -> Result<ThinnessReport> {
    if !(q_ratio > 1.0) {
        return Err(Error::InvalidInput(format!("shell ratio {q_ratio} must exceed 1")));
    }
    if j_max < 1 {
        return Err(Error::InvalidInput("need at least one shell".into()));
    }
    let codim = ps.dim() as f64 - k.alpha();
    let sampled_radius = q.iter().map(|i| ps.norm(i)).fold(0.0, f64::max);
    let mut shells = Vec::new();
    let mut sum = 0.0;
    for j in 1..=j_max {
        let inner = q_ratio.powi(j as i32);
        let outer = inner * q_ratio;
        let members = q.filter(|i| {
            let r = ps.norm(i);
            r > inner && r <= outer
        });
        let capacity = if members.is_empty() { 0.0 } else { kernel::capacity(k, &members)?.value };
        let term = capacity / inner.powf(codim);
        sum += term;
        shells.push(ShellTerm { j, inner_radius: inner, outer_radius: outer, points: members.len(), capacity, term, partial_sum: sum });
    }
    let trend = classify(&shells, sampled_radius);
    Ok(ThinnessReport { q_ratio, shells, sampled_radius, trend })
}

fn classify(shells: &[ShellTerm], sampled_radius: f64) -> ThinnessTrend {
    // Only shells lying entirely inside the sample say anything about the tail.
    let terms: Vec<f64> = shells
        .iter()
        .filter(|s| s.outer_radius <= sampled_radius * (1.0 + 1e-12) && s.term > 0.0)
        .map(|s| s.term)
        .collect();
    if terms.len() < 3 {
        return ThinnessTrend::Inconclusive;
    }
    let tail = &terms[terms.len() - 3..];
    if tail[2] >= 0.5 * tail[0] {
        ThinnessTrend::Growing
    } else {
        ThinnessTrend::Saturating
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generators;
    use crate::kernel::{assemble_riesz, KernelKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// K_qq = [[2,1],[1,2]] on targets {0,1}; the source at 2 has cross potentials (1, 0.4).
    fn hand_kernel() -> KernelMatrix {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 1.0, 1.0, 2.0, 0.4, 1.0, 0.4, 2.0]);
        KernelMatrix::from_matrix(3, IndexSet::range(0..3), m, KernelKind::Riesz, 2.0, 3).unwrap()
    }

    #[test]
    fn hand_sweep_with_active_bound() {
        let k = hand_kernel();
        let xi = DiscreteMeasure::dirac(3, 2, 1.0).unwrap();
        let q = IndexSet::new([0, 1]);
        for alg in [SweepAlgorithm::ConeProjection, SweepAlgorithm::DirectSolve] {
            let r = sweep_with(&k, &xi, &q, alg).unwrap();
            assert!((r.swept.weight(0) - 0.5).abs() < 1e-15, "{alg:?}");
            assert_eq!(r.swept.weight(1), 0.0);
            assert!((r.mass_out - 0.5).abs() < 1e-15);
            assert_eq!(r.active_set_size, 1);
        }
        assert!((harmonic_measure_at_infinity(&k, 2, &q).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(harmonic_measure_at_infinity(&k, 2, &IndexSet::empty()).unwrap(), 1.0);
        assert!(harmonic_measure_at_infinity(&k, 0, &q).is_err());
        let h = harmonic_measure(&k, 2, &q, &IndexSet::new([0]), true).unwrap();
        assert!((h - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dirac_on_target_is_fixed() {
        let k = hand_kernel();
        let xi = DiscreteMeasure::dirac(3, 1, 0.7).unwrap();
        let r = sweep(&k, &xi, &IndexSet::new([0, 1])).unwrap();
        assert_eq!(r.swept, xi);
        let b = dirac_sweep_matrix(&k, &IndexSet::new([1, 2]), &IndexSet::new([0, 1])).unwrap();
        assert_eq!(b.weights.column(0).as_slice(), &[0.0, 1.0]);
    }

    /// Brute-force minimization of ‖ξ − ν‖ over a grid of ν ≥ 0 on ≤ 3 target points.
    fn grid_projection(k: &KernelMatrix, xi: &DiscreteMeasure, q: &IndexSet, hi: f64, steps: usize) -> f64 {
        let mut best = f64::INFINITY;
        let qs = q.as_slice();
        let h = hi / steps as f64;
        for a in 0..=steps {
            for b in 0..=steps {
                for c in 0..=steps {
                    let mut w = xi.weights().to_vec();
                    for (t, m) in qs.iter().zip([a, b, c]) {
                        w[*t] -= m as f64 * h;
                    }
                    best = best.min(kernel::signed_energy_norm(k, &w).unwrap());
                }
            }
        }
        best
    }

    #[test]
    fn projection_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let pts: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let ps = PointSet::new(3, &pts).unwrap();
            let k = assemble_riesz(&ps, 2.0, 1.0).unwrap();
            let q = IndexSet::new([0, 1, 2]);
            let xi = DiscreteMeasure::from_pairs(30, &[(10, 0.4), (20, 0.6)]).unwrap();
            let r = sweep(&k, &xi, &q).unwrap();
            let got = kernel::signed_energy_norm(&k, &xi.minus(&r.swept).unwrap()).unwrap();
            let grid = grid_projection(&k, &xi, &q, 1.0, 60);
            assert!(got <= grid + 1e-12, "projection {got} worse than grid {grid}");
            assert!(grid - got < 2e-2, "grid {grid} vs projection {got}");
        }
    }

    #[test]
    fn sweep_matrix_reproduces_mass_and_potential() {
        let mut pts = generators::sphere_shell(&[0.0; 3], 1.0, 60).unwrap();
        pts.extend([vec![0.0, 0.0, 2.0], vec![1.5, 0.5, 0.0], vec![0.0, -3.0, 0.0]]);
        let ps = PointSet::new(3, &pts).unwrap();
        let k = assemble_riesz(&ps, 2.0, 1.0).unwrap();
        let q = IndexSet::range(0..60);
        let sources = IndexSet::range(60..63);
        let b = dirac_sweep_matrix(&k, &sources, &q).unwrap();
        let xi = DiscreteMeasure::from_pairs(63, &[(60, 0.5), (61, 0.3), (62, 0.2)]).unwrap();
        let joint = sweep(&k, &xi, &q).unwrap();
        let total: f64 = sources.iter().map(|s| xi.weight(s) * b.column_mass(s).unwrap()).sum();
        if b.fallback_columns == 0 && joint.active_set_size == 60 {
            assert!((total - joint.mass_out).abs() < 1e-10);
            let sup = b.superpose(&xi).unwrap();
            assert!(sup.max_abs_diff(&joint.swept) < 1e-10);
            let u1 = kernel::potential(&k, &sup).unwrap();
            let u2 = kernel::potential(&k, &joint.swept).unwrap();
            assert!(u1.iter().zip(&u2).all(|(a, b)| (a - b).abs() < 1e-10));
        }
        // Exterior charges lose mass when swept onto a bounded sphere.
        assert!(joint.mass_out < joint.mass_in);
    }

    #[test]
    fn thinness_of_bounded_and_empty_sets() {
        let pts = generators::ball(&[0.0; 3], 3.0, 1.0).unwrap();
        let ps = PointSet::new(3, &pts).unwrap();
        let k = assemble_riesz(&ps, 2.0, 1.0).unwrap();
        let r = thinness_partial_sums(&k, &ps, &IndexSet::range(0..ps.len()), 2.0, 5).unwrap();
        let sums = r.partial_sums();
        assert!(sums.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(sums[2], sums[4]);
        assert_eq!(r.trend, ThinnessTrend::Inconclusive);
        let empty = thinness_partial_sums(&k, &ps, &IndexSet::empty(), 2.0, 3).unwrap();
        assert!(empty.partial_sums().iter().all(|&s| s == 0.0));
        assert!(thinness_partial_sums(&k, &ps, &IndexSet::empty(), 1.0, 3).is_err());
    }
}
