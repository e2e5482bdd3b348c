//! The α-Green kernel of a domain `D`, obtained from the Riesz kernel by
//! subtracting the potential of each Dirac mass swept onto the complement
//! sample `Y`, together with Green potentials, Green balayage, Green
//! equilibrium measures and maximum-principle diagnostics.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::balayage::{self, BalayageResult, DiracSweepMatrix};
use crate::domain::DomainConfig;
use crate::error::{Error, Result};
use crate::kernel::{self, assemble_riesz, KernelKind, KernelMatrix, KKT_TOL};
use crate::measure::{DiscreteMeasure, IndexSet};
use crate::report::{fmt_f64, write_json};

/// Bound on `g ≥ 0` and `g ≤ κ` violations.
pub const ENTRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GreenSystem {
    cfg: DomainConfig,
    riesz_full: KernelMatrix,
    green: KernelMatrix,
    dirac_sweep_to_y: Option<DiracSweepMatrix>,
    asymmetry_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenMetadata {
    pub alpha: f64,
    pub dim: usize,
    pub sigma: f64,
    pub d_points: usize,
    pub y_points: usize,
    pub f_points: usize,
    pub asymmetry_residual: f64,
    pub entry_bound_violation: f64,
    pub y_sweep_fallback_columns: usize,
}

/// Builds the Green kernel of `cfg`'s domain.
///
/// With `Y = ∅` the Green kernel is the Riesz kernel restricted to `D`, exactly.
pub fn build_green(cfg: &DomainConfig) -> Result<GreenSystem> {
    let riesz_full = assemble_riesz(cfg.points(), cfg.alpha(), cfg.sigma())?;
    GreenSystem::from_riesz(cfg.clone(), riesz_full)
}

impl GreenSystem {
    /// Builds from an already assembled kernel on all points (e.g. an explicit hand-made matrix).
    pub fn from_riesz(cfg: DomainConfig, riesz_full: KernelMatrix) -> Result<Self> {
        let n = cfg.points().len();
        if riesz_full.ambient() != n || riesz_full.size() != n {
            return Err(Error::DimensionMismatch { expected: n, found: riesz_full.size() });
        }
        let d = cfg.d_indices().clone();
        let y = cfg.y_indices().clone();
        let mut g = riesz_full.block(&d, &d)?;
        let (sweep, asymmetry_residual) = if y.is_empty() {
            (None, 0.0)
        } else {
            let b = balayage::dirac_sweep_matrix(&riesz_full, &d, &y)?;
            let k_dy = riesz_full.block(&d, &y)?;
            g -= &k_dy * &b.weights;
            let asym = asymmetry(&g);
            let sym = (&g + g.transpose()) * 0.5;
            g = sym;
            (Some(b), asym)
        };
        let green = KernelMatrix::from_matrix(n, d, g, KernelKind::Green, cfg.alpha(), cfg.dim())?;
        Ok(Self { cfg, riesz_full, green, dirac_sweep_to_y: sweep, asymmetry_residual })
    }

    pub fn cfg(&self) -> &DomainConfig {
        &self.cfg
    }

    pub fn riesz_full(&self) -> &KernelMatrix {
        &self.riesz_full
    }

    pub fn green(&self) -> &KernelMatrix {
        &self.green
    }

    pub fn dirac_sweep_to_y(&self) -> Option<&DiracSweepMatrix> {
        self.dirac_sweep_to_y.as_ref()
    }

    /// `max |g − gᵀ| / max |g|` before symmetrization.
    pub fn asymmetry_residual(&self) -> f64 {
        self.asymmetry_residual
    }

    /// Largest violation of `0 ≤ g ≤ κ` over D×D (absolute).
    pub fn entry_bound_violation(&self) -> f64 {
        let g = self.green.matrix();
        let d = self.cfg.d_indices().as_slice();
        let mut worst: f64 = 0.0;
        for (a, &i) in d.iter().enumerate() {
            for (b, &j) in d.iter().enumerate() {
                let v = g[(a, b)];
                let k = self.riesz_full.matrix()[(i, j)];
                worst = worst.max(-v).max(v - k);
            }
        }
        worst
    }

    pub fn metadata(&self) -> GreenMetadata {
        GreenMetadata {
            alpha: self.cfg.alpha(),
            dim: self.cfg.dim(),
            sigma: self.cfg.sigma(),
            d_points: self.cfg.d_indices().len(),
            y_points: self.cfg.y_indices().len(),
            f_points: self.cfg.f_indices().len(),
            asymmetry_residual: self.asymmetry_residual,
            entry_bound_violation: self.entry_bound_violation(),
            y_sweep_fallback_columns: self.dirac_sweep_to_y.as_ref().map_or(0, |b| b.fallback_columns),
        }
    }

    /// Writes `green.csv`, `y_sweep.csv` (if `Y ≠ ∅`) and `green_meta.json` into `dir`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.green.write_csv(std::fs::File::create(dir.join("green.csv"))?)?;
        if let Some(b) = &self.dirac_sweep_to_y {
            write_sweep_csv(b, std::io::BufWriter::new(std::fs::File::create(dir.join("y_sweep.csv"))?))?;
        }
        write_json(&dir.join("green_meta.json"), &self.metadata())
    }
}

fn asymmetry(g: &DMatrix<f64>) -> f64 {
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..i {
            worst = worst.max((g[(i, j)] - g[(j, i)]).abs());
        }
    }
    worst / scale
}

fn write_sweep_csv<W: Write>(b: &DiracSweepMatrix, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["target".to_string()];
    header.extend(b.sources.iter().map(|s| s.to_string()));
    out.write_record(&header)?;
    for (r, t) in b.target.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend((0..b.sources.len()).map(|c| fmt_f64(b.weights[(r, c)])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn check_on_d(gs: &GreenSystem, mu: &DiscreteMeasure) -> Result<()> {
    if mu.len() != gs.cfg.points().len() {
        return Err(Error::DimensionMismatch { expected: gs.cfg.points().len(), found: mu.len() });
    }
    if !mu.support().is_subset(gs.cfg.d_indices()) {
        return Err(Error::Precondition("measure charges points outside D".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenPotential {
    /// Ambient-indexed; zero outside `D`.
    pub values: Vec<f64>,
    /// `max_D |(i) − (ii)| / max_D |(i)|`.
    pub cross_path_residual: f64,
}

/// Green potential of `mu`, by the Green matrix and, independently, as the
/// Riesz potential of `mu` minus that of its sweep onto `Y`.
pub fn green_potential(gs: &GreenSystem, mu: &DiscreteMeasure) -> Result<GreenPotential> {
    check_on_d(gs, mu)?;
    let values = kernel::potential(&gs.green, mu)?;
    let y = gs.cfg.y_indices();
    let alt = if y.is_empty() || mu.is_zero() {
        kernel::potential(&gs.riesz_full, mu)?
    } else {
        let swept = balayage::sweep(&gs.riesz_full, mu, y)?;
        let u = kernel::potential(&gs.riesz_full, mu)?;
        let v = kernel::potential(&gs.riesz_full, &swept.swept)?;
        u.iter().zip(&v).map(|(a, b)| a - b).collect()
    };
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in gs.cfg.d_indices().iter() {
        diff = diff.max((values[i] - alt[i]).abs());
        scale = scale.max(values[i].abs());
    }
    let cross_path_residual = if diff == 0.0 { 0.0 } else { diff / scale.max(f64::MIN_POSITIVE) };
    Ok(GreenPotential { values, cross_path_residual })
}

pub fn green_energy(gs: &GreenSystem, mu: &DiscreteMeasure) -> Result<f64> {
    check_on_d(gs, mu)?;
    kernel::energy(&gs.green, mu)
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenSweep {
    /// Cone projection in the Green energy norm onto measures on `f`.
    pub result: BalayageResult,
    /// Riesz sweep onto `f ∪ Y`, restricted to `f`.
    pub via_riesz: DiscreteMeasure,
    /// `max_i |(i) − (ii)| / μ(D)`.
    pub discrepancy: f64,
    /// Set when the discrepancy exceeds `10 · KKT_TOL`.
    pub warning: bool,
}

impl GreenSweep {
    pub fn swept(&self) -> &DiscreteMeasure {
        &self.result.swept
    }

    pub fn mass_out(&self) -> f64 {
        self.result.mass_out
    }
}

pub fn green_sweep(gs: &GreenSystem, mu: &DiscreteMeasure, f: &IndexSet) -> Result<GreenSweep> {
    check_on_d(gs, mu)?;
    if f.is_empty() || !f.is_subset(gs.cfg.d_indices()) {
        return Err(Error::Precondition("target must be a nonempty subset of D".into()));
    }
    let result = balayage::sweep(&gs.green, mu, f)?;
    let target = f.union(gs.cfg.y_indices());
    let via_riesz = balayage::sweep(&gs.riesz_full, mu, &target)?.swept.restrict(f);
    let discrepancy = via_riesz.max_abs_diff(&result.swept) / mu.total_mass().max(f64::MIN_POSITIVE);
    Ok(GreenSweep { warning: discrepancy > 10.0 * KKT_TOL, result, via_riesz, discrepancy })
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenEquilibrium {
    pub capacity: f64,
    pub gamma: DiscreteMeasure,
    pub mass: f64,
    /// Relative `(equality on support, inequality on f)` residuals at level 1.
    pub complementarity: (f64, f64),
    /// `max_D U^γ_g`.
    pub max_potential: f64,
}

pub fn green_equilibrium(gs: &GreenSystem, f: &IndexSet) -> Result<GreenEquilibrium> {
    if f.is_empty() || !f.is_subset(gs.cfg.d_indices()) {
        return Err(Error::Precondition("set must be a nonempty subset of D".into()));
    }
    let capacity = kernel::capacity(&gs.green, f)?.value;
    let gamma = kernel::equilibrium_measure(&gs.green, f)?;
    let complementarity = kernel::complementarity_residuals(&gs.green, &gamma, f, 1.0)?;
    let u = kernel::potential(&gs.green, &gamma)?;
    let max_potential = gs.cfg.d_indices().iter().map(|i| u[i]).fold(f64::NEG_INFINITY, f64::max);
    Ok(GreenEquilibrium { capacity, mass: gamma.total_mass(), gamma, complementarity, max_potential })
}

#[derive(Debug, Clone, Serialize)]
pub struct PrincipleCheck {
    pub hypothesis_met: bool,
    /// Largest violation of the hypothesis on the support (≤ 0 when met).
    pub hypothesis_margin: f64,
    /// Conclusion excess over D; only computed when the hypothesis holds.
    pub excess: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximumPrincipleReport {
    /// `max_{supp μ} U^μ_g ≤ 1 ⇒ max_D U^μ_g − 1`.
    pub frostman: PrincipleCheck,
    /// `U^μ_g ≤ U^ν_g on supp μ ⇒ max_D (U^μ_g − U^ν_g)`.
    pub domination: PrincipleCheck,
}

/// Empirical Frostman and domination checks for the Green kernel. Never fails on a violation.
pub fn check_maximum_principles(gs: &GreenSystem, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<MaximumPrincipleReport> {
    check_on_d(gs, mu)?;
    check_on_d(gs, nu)?;
    let um = kernel::potential(&gs.green, mu)?;
    let un = kernel::potential(&gs.green, nu)?;
    let supp = mu.support();
    let d = gs.cfg.d_indices();

    let margin = supp.iter().map(|i| um[i] - 1.0).fold(f64::NEG_INFINITY, f64::max);
    let met = margin <= 0.0;
    let frostman = PrincipleCheck {
        hypothesis_met: met,
        hypothesis_margin: margin,
        excess: met.then(|| d.iter().map(|i| um[i] - 1.0).fold(f64::NEG_INFINITY, f64::max)),
    };

    let margin = supp.iter().map(|i| um[i] - un[i]).fold(f64::NEG_INFINITY, f64::max);
    let met = margin <= 0.0;
    let domination = PrincipleCheck {
        hypothesis_met: met,
        hypothesis_margin: margin,
        excess: met.then(|| d.iter().map(|i| um[i] - un[i]).fold(f64::NEG_INFINITY, f64::max)),
    };
    Ok(MaximumPrincipleReport { frostman, domination })
}

#[derive(Debug, Clone, Serialize)]
pub struct MassEqualityReport {
    /// `μ(D) − (μ onto F)(D)`.
    pub delta_mass: f64,
    /// `(x, ω(x, {∞} ∪ Y; Ω))` for each support point of `μ|_Ω`.
    pub deficiencies: Vec<(usize, f64)>,
    pub max_deficiency: f64,
}

pub fn mass_equality_probe(gs: &GreenSystem, mu: &DiscreteMeasure) -> Result<MassEqualityReport> {
    check_on_d(gs, mu)?;
    let f = gs.cfg.f_indices();
    let on_omega = mu.support().intersection(gs.cfg.omega_indices());
    let delta_mass = if mu.support().is_subset(f) {
        0.0
    } else {
        mu.total_mass() - green_sweep(gs, mu, f)?.mass_out()
    };
    let complement = f.union(gs.cfg.y_indices());
    let mut deficiencies = Vec::with_capacity(on_omega.len());
    for x in on_omega.iter() {
        let w = balayage::harmonic_measure(&gs.riesz_full, x, &complement, gs.cfg.y_indices(), true)?;
        deficiencies.push((x, w));
    }
    let max_deficiency = deficiencies.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(MassEqualityReport { delta_mass, deficiencies, max_deficiency })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generators, PointSet};

    /// Half-space `z > 0` sampled above a plane grid at `z = 0`.
    fn half_space(spacing: f64, half_width: f64) -> (DomainConfig, std::ops::Range<usize>) {
        let d_pts = generators::grid_box(&[-1.0, -1.0, 1.0], &[1.0, 1.0, 2.0], 0.5).unwrap();
        let y_pts = generators::plane_grid(3, 0.0, half_width, spacing).unwrap();
        let (ps, ranges) = PointSet::concat(3, &[d_pts, y_pts]).unwrap();
        let d = IndexSet::new(ranges[0].clone());
        let y = IndexSet::new(ranges[1].clone());
        let f = d.filter(|i| ps.point(i)[2] >= 1.99);
        (DomainConfig::new(ps, d, y, f, 2.0).unwrap(), ranges[0].clone())
    }

    fn reflection(a: &[f64], b: &[f64]) -> f64 {
        let r = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        let s = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] + b[2]).powi(2)).sqrt();
        1.0 / r - 1.0 / s
    }

    fn max_rel_error(gs: &GreenSystem, d: &std::ops::Range<usize>) -> f64 {
        let ps = gs.cfg().points();
        let mut worst: f64 = 0.0;
        for i in d.clone() {
            for j in d.clone().filter(|&j| j != i) {
                let exact = reflection(ps.point(i), ps.point(j));
                worst = worst.max((gs.green().entry(i, j).unwrap() - exact).abs() / exact);
            }
        }
        worst
    }

    #[test]
    fn empty_complement_gives_riesz_exactly() {
        let ps = PointSet::new(3, &generators::sphere_shell(&[0.0; 3], 1.0, 20).unwrap()).unwrap();
        let cfg = DomainConfig::without_complement(ps, IndexSet::range(0..5), 2.0).unwrap();
        let gs = build_green(&cfg).unwrap();
        assert_eq!(gs.green().matrix(), gs.riesz_full().matrix());
        assert_eq!(gs.asymmetry_residual(), 0.0);
        let mu = DiscreteMeasure::from_pairs(20, &[(7, 0.5), (9, 0.25)]).unwrap();
        let p = green_potential(&gs, &mu).unwrap();
        assert_eq!(p.cross_path_residual, 0.0);
        assert_eq!(p.values, kernel::potential(gs.riesz_full(), &mu).unwrap());
        let eq = green_equilibrium(&gs, cfg.f_indices()).unwrap();
        let r = kernel::equilibrium_measure(gs.riesz_full(), cfg.f_indices()).unwrap();
        assert_eq!(eq.gamma, r);
    }

    #[test]
    fn hand_green_equilibrium() {
        let ps = PointSet::new(3, &[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![5.0, 0.0, 0.0]]).unwrap();
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.1, 1.0, 2.0, 0.1, 0.1, 0.1, 1.0]);
        let k = KernelMatrix::from_matrix(3, IndexSet::range(0..3), m, KernelKind::Riesz, 2.0, 3).unwrap();
        let cfg = DomainConfig::without_complement(ps, IndexSet::new([0, 1]), 2.0).unwrap();
        let gs = GreenSystem::from_riesz(cfg, k).unwrap();
        let eq = green_equilibrium(&gs, &IndexSet::new([0, 1])).unwrap();
        assert!((eq.gamma.weight(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((eq.gamma.weight(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((eq.capacity - 2.0 / 3.0).abs() < 1e-15);
        assert!((eq.mass - eq.capacity).abs() < 1e-8 * eq.capacity);
    }

    #[test]
    fn half_space_matches_reflection_and_improves() {
        let (coarse, d) = half_space(0.5, 6.0);
        let (fine, _) = half_space(0.35, 6.0);
        let gc = build_green(&coarse).unwrap();
        let gf = build_green(&fine).unwrap();
        let ec = max_rel_error(&gc, &d);
        let ef = max_rel_error(&gf, &d);
        assert!(ef < ec, "coarse {ec} fine {ef}");
        assert!(ef < 0.1, "fine error {ef}");
        assert!(gf.entry_bound_violation() <= ENTRY_TOL);
        assert!(gf.asymmetry_residual() < 1e-2);
    }

    #[test]
    fn potential_paths_and_sweep_paths_agree() {
        let (cfg, _) = half_space(0.5, 5.0);
        let gs = build_green(&cfg).unwrap();
        let n = cfg.points().len();
        let x = cfg.omega_indices().as_slice()[3];
        let mu = DiscreteMeasure::from_pairs(n, &[(x, 1.0), (cfg.omega_indices().as_slice()[10], 0.5)]).unwrap();
        let p = green_potential(&gs, &mu).unwrap();
        assert!(p.cross_path_residual < 1e-8, "{}", p.cross_path_residual);
        let dirac = DiscreteMeasure::dirac(n, x, 1.0).unwrap();
        let s = green_sweep(&gs, &dirac, cfg.f_indices()).unwrap();
        assert!(s.discrepancy < 1e-6, "{}", s.discrepancy);
        assert!(s.mass_out() <= 1.0 + 1e-10);
        let again = green_sweep(&gs, s.swept(), cfg.f_indices()).unwrap();
        assert_eq!(again.swept(), s.swept());
    }

    #[test]
    fn balayage_with_a_rest() {
        // Surface-like targets keep every projection on a full active set.
        let mut pts = generators::sphere_shell(&[0.0; 3], 2.0, 150).unwrap();
        pts.extend([vec![0.0, 0.0, 0.0], vec![0.3, -0.2, 0.5]]);
        let ps = PointSet::new(3, &pts).unwrap();
        let f2 = IndexSet::range(0..150);
        let f1 = f2.filter(|i| ps.point(i)[2] > 0.5);
        let cfg = DomainConfig::without_complement(ps.clone(), f2.clone(), 2.0).unwrap();
        let gs = build_green(&cfg).unwrap();
        let mu = DiscreteMeasure::from_pairs(ps.len(), &[(150, 1.0), (151, 0.5)]).unwrap();
        let direct = green_sweep(&gs, &mu, &f1).unwrap();
        let via = green_sweep(&gs, &mu, &f2).unwrap();
        let rest = green_sweep(&gs, via.swept(), &f1).unwrap();
        assert!(direct.swept().max_abs_diff(rest.swept()) < 1e-8, "{}", direct.swept().max_abs_diff(rest.swept()));
        assert!(direct.mass_out() <= via.mass_out() + 1e-10);
    }

    #[test]
    fn maximum_principle_reports() {
        let (cfg, _) = half_space(0.5, 4.0);
        let gs = build_green(&cfg).unwrap();
        let n = cfg.points().len();
        let mu = DiscreteMeasure::from_pairs(n, &[(0, 0.3), (5, 0.2)]).unwrap();
        let r = check_maximum_principles(&gs, &mu, &mu).unwrap();
        assert!(r.domination.hypothesis_met);
        assert_eq!(r.domination.excess, Some(0.0));
        let eq = green_equilibrium(&gs, cfg.f_indices()).unwrap();
        let r = check_maximum_principles(&gs, &eq.gamma, &eq.gamma).unwrap();
        if r.frostman.hypothesis_met {
            assert!(r.frostman.excess.unwrap() < 1e-6);
        }
        let big = mu.scaled(1e3).unwrap();
        assert!(!check_maximum_principles(&gs, &big, &mu).unwrap().frostman.hypothesis_met);
    }

    #[test]
    fn mass_probe_identity_and_coarse_loss() {
        let (cfg, _) = half_space(0.5, 4.0);
        let gs = build_green(&cfg).unwrap();
        let n = cfg.points().len();
        let on_f = DiscreteMeasure::dirac(n, cfg.f_indices().as_slice()[0], 1.0).unwrap();
        let r = mass_equality_probe(&gs, &on_f).unwrap();
        assert_eq!(r.delta_mass, 0.0);
        assert!(r.deficiencies.is_empty());
        let x = cfg.omega_indices().as_slice()[0];
        let r = mass_equality_probe(&gs, &DiscreteMeasure::dirac(n, x, 1.0).unwrap()).unwrap();
        assert!(r.delta_mass > 1e-3 && r.max_deficiency > 1e-3);
    }
}
