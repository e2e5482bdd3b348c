//! The weighted minimum Green-energy (Gauss) problem on a set `F`, with the
//! external field `f = −U^ϑ_g` created by a charge `ϑ` placed in `Ω = D \ F`.
//!
//! Besides the solver, this module checks the structural facts about the
//! minimizer `λ`: the two-inequality characterization, the representation
//! `λ = ϑ^F + c·γ`, duality with the swept field, monotonicity along nested
//! families, mass escape along exhaustions, and where `λ` puts its mass.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::green::{self, GreenSystem};
use crate::kernel::{self, KKT_TOL};
use crate::measure::{DiscreteMeasure, IndexSet};
use crate::qp::{self, QpPath};
use crate::report::{fmt_f64, Table};

/// Default adjacency-radius factor (times local spacing) for boundary extraction.
pub const ADJACENCY_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Serialize)]
pub struct ExternalField {
    pub theta: DiscreteMeasure,
    /// The set the field is posed on.
    pub f: IndexSet,
    pub rho: f64,
    /// `−U^ϑ_g` (ambient-indexed, zero off `D`).
    pub field_values: Vec<f64>,
    /// `−U^{ϑ^F}_g`.
    pub dual_field_values: Vec<f64>,
    /// `ϑ^F_g`, the Green sweep of the charge onto `F`.
    pub theta_swept: DiscreteMeasure,
    /// `‖ϑ^F_g‖²_g`.
    pub theta_swept_energy: f64,
    /// `ϑ(D) / ρ^(n−α)`.
    pub mass_bound: f64,
}

impl ExternalField {
    /// The charge must be nonzero, carried by `D`, and kept off `f`.
    pub fn new(gs: &GreenSystem, theta: DiscreteMeasure, f: &IndexSet) -> Result<Self> {
        let cfg = gs.cfg();
        let rho = if f == cfg.f_indices() {
            crate::domain::validate_field_separation(&theta, cfg)?
        } else {
            separation(cfg.points(), &theta, f, cfg.d_indices())?
        };
        let u = green::green_potential(gs, &theta)?.values;
        let theta_swept = green::green_sweep(gs, &theta, f)?.result.swept;
        let u_swept = kernel::potential(gs.green(), &theta_swept)?;
        let theta_swept_energy = kernel::energy(gs.green(), &theta_swept)?;
        let mass_bound = theta.total_mass() / rho.powf(cfg.codim());
        Ok(Self {
            field_values: u.iter().map(|v| -v).collect(),
            dual_field_values: u_swept.iter().map(|v| -v).collect(),
            theta,
            f: f.clone(),
            rho,
            theta_swept,
            theta_swept_energy,
            mass_bound,
        })
    }

    pub fn theta_swept_mass(&self) -> f64 {
        self.theta_swept.total_mass()
    }

    fn charge_potential(&self) -> Vec<f64> {
        self.field_values.iter().map(|v| -v).collect()
    }
}

fn separation(ps: &PointSet, theta: &DiscreteMeasure, f: &IndexSet, d: &IndexSet) -> Result<f64> {
    let s = theta.support();
    if s.is_empty() {
        return Err(Error::FieldSeparation("the charge is zero".into()));
    }
    if !s.is_disjoint(f) {
        return Err(Error::FieldSeparation("the charge has mass on F".into()));
    }
    if !s.is_subset(d) || !f.is_subset(d) {
        return Err(Error::FieldSeparation("charge and F must lie in D".into()));
    }
    Ok(s.iter().flat_map(|i| f.iter().map(move |j| ps.distance(i, j))).fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaussMethod {
    Qp,
    Explicit,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct CharacterizationResiduals {
    /// `∫ U^μ_{g,f} dμ / μ(F)`.
    pub c: f64,
    /// `max |U^μ_{g,f}|` over `F`.
    pub scale: f64,
    /// `max_F (c − U^μ_{g,f})⁺ / scale`.
    pub lower_violation: f64,
    /// `max_{supp μ} (U^μ_{g,f} − c)⁺ / scale`.
    pub upper_violation: f64,
}

impl CharacterizationResiduals {
    pub fn worst(&self) -> f64 {
        self.lower_violation.max(self.upper_violation)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussKkt {
    pub residuals: CharacterizationResiduals,
    /// Multiplier of the mass constraint, when solved as a QP.
    pub multiplier: Option<f64>,
    /// `|multiplier − c|`.
    pub multiplier_gap: Option<f64>,
    /// Weightwise gap to a re-solve with reversed point order.
    pub permutation_gap: Option<f64>,
    pub path: Option<QpPath>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussDiagnostics {
    pub theta_swept_mass: f64,
    pub green_capacity_of_f: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussSolution {
    pub method: GaussMethod,
    pub f: IndexSet,
    pub lambda: DiscreteMeasure,
    pub w_value: f64,
    pub c_constant: f64,
    pub kkt: GaussKkt,
    pub diagnostics: GaussDiagnostics,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GaussValue {
    pub value: f64,
    /// `|I(μ) − (‖μ − ϑ^F‖² − ‖ϑ^F‖²)|` relative to `max(1, |I(μ)|)`.
    pub completed_square_residual: f64,
}

/// `‖μ‖²_g − 2 Σ U^ϑ_g μ` for `μ` carried by the field's set.
pub fn gauss_functional(gs: &GreenSystem, fld: &ExternalField, mu: &DiscreteMeasure) -> Result<GaussValue> {
    if !mu.support().is_subset(&fld.f) {
        return Err(Error::Precondition("measure charges points outside F".into()));
    }
    let value = functional_with(gs, mu, &fld.charge_potential())?;
    let diff = mu.minus(&fld.theta_swept)?;
    let completed = kernel::signed_energy_norm(gs.green(), &diff)?.powi(2) - fld.theta_swept_energy;
    Ok(GaussValue { value, completed_square_residual: (value - completed).abs() / value.abs().max(1.0) })
}

fn functional_with(gs: &GreenSystem, mu: &DiscreteMeasure, charge_potential: &[f64]) -> Result<f64> {
    let e = kernel::energy(gs.green(), mu)?;
    let lin: f64 = mu.support().iter().map(|i| charge_potential[i] * mu.weight(i)).sum();
    Ok(e - 2.0 * lin)
}

/// Evaluates both characterization inequalities for an arbitrary candidate on `f`.
pub fn characterization_residuals(gs: &GreenSystem, fld: &ExternalField, mu: &DiscreteMeasure) -> Result<CharacterizationResiduals> {
    residuals_with(gs, &fld.f, mu, &fld.charge_potential())
}

fn residuals_with(gs: &GreenSystem, f: &IndexSet, mu: &DiscreteMeasure, charge_potential: &[f64]) -> Result<CharacterizationResiduals> {
    let u = kernel::potential(gs.green(), mu)?;
    let weighted: Vec<f64> = u.iter().zip(charge_potential).map(|(a, b)| a - b).collect();
    let mass = mu.total_mass();
    if mass <= 0.0 {
        return Err(Error::InvalidInput("candidate has zero mass".into()));
    }
    let c = mu.support().iter().map(|i| weighted[i] * mu.weight(i)).sum::<f64>() / mass;
    let scale = f.iter().map(|i| weighted[i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut r = CharacterizationResiduals { c, scale, ..Default::default() };
    for i in f.iter() {
        r.lower_violation = r.lower_violation.max((c - weighted[i]) / scale);
        if mu.weight(i) > 0.0 {
            r.upper_violation = r.upper_violation.max((weighted[i] - c) / scale);
        }
    }
    Ok(r)
}

struct QpSolve {
    lambda: DiscreteMeasure,
    level: f64,
    path: QpPath,
}

fn solve_simplex(gs: &GreenSystem, f: &IndexSet, charge_potential: &[f64], order: &[usize]) -> Result<QpSolve> {
    let locals: Vec<usize> = order.iter().map(|&g| gs.green().local_checked(g)).collect::<Result<_>>()?;
    let m = gs.green().matrix();
    let sub = DMatrix::from_fn(locals.len(), locals.len(), |i, j| m[(locals[i], locals[j])]);
    let b: Vec<f64> = order.iter().map(|&g| charge_potential[g]).collect();
    let out = qp::minimize_on_simplex(&sub, &b)?;
    let mut w = vec![0.0; gs.cfg().points().len()];
    for (&g, x) in order.iter().zip(&out.x) {
        w[g] = *x;
    }
    debug_assert!(order.iter().all(|&g| f.contains(g)));
    Ok(QpSolve { lambda: DiscreteMeasure::from_solver(w, 1e-13)?, level: out.level, path: out.path })
}

/// Unique minimizer of the Gauss functional over probability measures on the field's set.
pub fn solve_gauss(gs: &GreenSystem, fld: &ExternalField) -> Result<GaussSolution> {
    solve_with_potential(gs, fld, &fld.charge_potential(), true)
}

fn solve_with_potential(gs: &GreenSystem, fld: &ExternalField, charge_potential: &[f64], permute: bool) -> Result<GaussSolution> {
    let f = &fld.f;
    if f.is_empty() {
        return Err(Error::Precondition("F is empty".into()));
    }
    let forward: Vec<usize> = f.iter().collect();
    let s = solve_simplex(gs, f, charge_potential, &forward)?;
    let permutation_gap = if permute && f.len() > 1 {
        let reversed: Vec<usize> = forward.iter().rev().copied().collect();
        Some(solve_simplex(gs, f, charge_potential, &reversed)?.lambda.max_abs_diff(&s.lambda))
    } else {
        None
    };
    let residuals = residuals_with(gs, f, &s.lambda, charge_potential)?;
    let w_value = functional_with(gs, &s.lambda, charge_potential)?;
    Ok(GaussSolution {
        method: GaussMethod::Qp,
        f: f.clone(),
        w_value,
        c_constant: residuals.c,
        kkt: GaussKkt {
            residuals,
            multiplier: Some(s.level),
            multiplier_gap: Some((s.level - residuals.c).abs()),
            permutation_gap,
            path: Some(s.path),
        },
        diagnostics: GaussDiagnostics { theta_swept_mass: fld.theta_swept_mass(), green_capacity_of_f: None },
        lambda: s.lambda,
    })
}

/// `λ = ϑ^F + c·γ` with `c = (1 − ϑ^F(F)) / c_g(F)`; requires `ϑ^F(F) ≤ 1`.
pub fn explicit_solution(gs: &GreenSystem, fld: &ExternalField) -> Result<GaussSolution> {
    let m = fld.theta_swept_mass();
    if m > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("swept charge has mass {m} > 1")));
    }
    let eq = green::green_equilibrium(gs, &fld.f)?;
    let c = (1.0 - m).max(0.0) / eq.capacity;
    let lambda = fld.theta_swept.plus(&eq.gamma.scaled(c)?)?;
    let residuals = characterization_residuals(gs, fld, &lambda)?;
    Ok(GaussSolution {
        method: GaussMethod::Explicit,
        f: fld.f.clone(),
        w_value: gauss_functional(gs, fld, &lambda)?.value,
        c_constant: c,
        kkt: GaussKkt { residuals, multiplier: None, multiplier_gap: None, permutation_gap: None, path: None },
        diagnostics: GaussDiagnostics { theta_swept_mass: m, green_capacity_of_f: Some(eq.capacity) },
        lambda,
    })
}

/// Margins of the a-priori bounds on a solution: all nonnegative when they hold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundMargins {
    /// `w + ‖ϑ^F‖²`.
    pub swept_energy: f64,
    /// `w + 2M`.
    pub mass_bound: f64,
    /// `M − I_g(ϑ, λ)`.
    pub mutual_energy: f64,
    /// `|λ(F) − 1|`.
    pub mass_defect: f64,
}

pub fn bound_margins(gs: &GreenSystem, fld: &ExternalField, sol: &GaussSolution) -> Result<BoundMargins> {
    let mutual = kernel::mutual_energy(gs.green(), &fld.theta, &sol.lambda)?;
    Ok(BoundMargins {
        swept_energy: sol.w_value + fld.theta_swept_energy,
        mass_bound: sol.w_value + 2.0 * fld.mass_bound,
        mutual_energy: fld.mass_bound - mutual,
        mass_defect: (sol.lambda.total_mass() - 1.0).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DualReport {
    pub w_primal: f64,
    pub w_dual: f64,
    pub w_gap: f64,
    /// `‖λ_f − λ_f̃‖_g`.
    pub lambda_gap: f64,
    pub c_gap: f64,
}

/// Solves with the field and with the dual field `f̃ = −U^{ϑ^F}_g` and compares.
pub fn dual_check(gs: &GreenSystem, fld: &ExternalField) -> Result<DualReport> {
    let primal = solve_with_potential(gs, fld, &fld.charge_potential(), false)?;
    let swept_potential: Vec<f64> = fld.dual_field_values.iter().map(|v| -v).collect();
    let dual = solve_with_potential(gs, fld, &swept_potential, false)?;
    let diff = primal.lambda.minus(&dual.lambda)?;
    Ok(DualReport {
        w_primal: primal.w_value,
        w_dual: dual.w_value,
        w_gap: (primal.w_value - dual.w_value).abs(),
        lambda_gap: kernel::signed_energy_norm(gs.green(), &diff)?,
        c_gap: (primal.c_constant - dual.c_constant).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    /// Candidates (by position) that belong to the class `U^μ_{g,f} ≥ c − tol` on `F`.
    pub members: Vec<usize>,
    /// `min over members and D-points of (U^μ_{g,f} − U^λ_{g,f})`; ≥ −tol when λ is pointwise minimal.
    pub potential_margin: f64,
    /// `min over members of (‖μ‖_g − ‖λ‖_g)`.
    pub norm_margin: f64,
    pub lambda_minimal: bool,
}

pub fn lambda_class_characterizations(
    gs: &GreenSystem,
    fld: &ExternalField,
    sol: &GaussSolution,
    candidates: &[DiscreteMeasure],
) -> Result<ClassReport> {
    let charge = fld.charge_potential();
    let u_lambda = kernel::potential(gs.green(), &sol.lambda)?;
    let scale = sol.kkt.residuals.scale.max(1.0);
    let tol = 1e-8 * scale;
    let norm_lambda = kernel::energy_norm(gs.green(), &sol.lambda)?;
    let mut members = Vec::new();
    let mut potential_margin = f64::INFINITY;
    let mut norm_margin = f64::INFINITY;
    for (k, mu) in candidates.iter().enumerate() {
        if !mu.support().is_subset(&fld.f) {
            continue;
        }
        let u = kernel::potential(gs.green(), mu)?;
        let member = fld.f.iter().all(|i| u[i] - charge[i] >= sol.c_constant - tol);
        if !member {
            continue;
        }
        members.push(k);
        for i in gs.cfg().d_indices().iter() {
            potential_margin = potential_margin.min(u[i] - u_lambda[i]);
        }
        norm_margin = norm_margin.min(kernel::energy_norm(gs.green(), mu)? - norm_lambda);
    }
    let lambda_minimal = members.is_empty() || (potential_margin >= -tol && norm_margin >= -tol);
    Ok(ClassReport { members, potential_margin, norm_margin, lambda_minimal })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nesting {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRow {
    pub stage: usize,
    pub size: usize,
    pub w: f64,
    pub c: f64,
    pub lambda_mass: f64,
    pub theta_swept_mass: f64,
    /// `‖λ_j − λ_F‖_g` against the solution on the whole field set.
    pub distance_to_full: f64,
    /// `max |U^{λ_j}_g − U^{λ_F}_g|` over the probe set.
    pub potential_gap: f64,
    pub kkt_worst: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub nesting: Nesting,
    pub stages: Vec<StageRow>,
    /// Largest step against the expected direction of `w`.
    pub w_monotonicity_violation: f64,
    /// Largest increase of `c` along an increasing family; only meaningful when `ϑ^F(D) ≤ 1`.
    pub c_monotonicity_violation: f64,
    pub c_hypothesis_met: bool,
    /// `max over nested pairs of ‖λ_s − λ_t‖² − 2|w_s − w_t|`.
    pub parallelogram_excess: f64,
    /// `|w_last − w_F|`.
    pub final_gap: f64,
    #[serde(skip)]
    pub lambdas: Vec<DiscreteMeasure>,
}

impl SweepReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "stage",
            "size",
            "w",
            "c",
            "lambda_mass",
            "theta_swept_mass",
            "distance_to_full",
            "potential_gap",
            "kkt_worst",
        ]);
        for r in &self.stages {
            t.push(vec![
                r.stage.to_string(),
                r.size.to_string(),
                fmt_f64(r.w),
                fmt_f64(r.c),
                fmt_f64(r.lambda_mass),
                fmt_f64(r.theta_swept_mass),
                fmt_f64(r.distance_to_full),
                fmt_f64(r.potential_gap),
                fmt_f64(r.kkt_worst),
            ]);
        }
        t
    }
}

fn nesting_of(family: &[IndexSet]) -> Result<Nesting> {
    if family.is_empty() {
        return Err(Error::InvalidInput("family is empty".into()));
    }
    if family.iter().any(|s| s.is_empty()) {
        return Err(Error::InvalidInput("family has an empty member".into()));
    }
    if family.windows(2).all(|w| w[0].is_subset(&w[1])) {
        Ok(Nesting::Increasing)
    } else if family.windows(2).all(|w| w[1].is_subset(&w[0])) {
        Ok(Nesting::Decreasing)
    } else {
        Err(Error::InvalidInput("family is not nested".into()))
    }
}

/// Solves on each member of a nested family of subsets of the field's set.
pub fn truncation_sweep(gs: &GreenSystem, fld: &ExternalField, family: &[IndexSet]) -> Result<SweepReport> {
    let nesting = nesting_of(family)?;
    if family.iter().any(|s| !s.is_subset(&fld.f)) {
        return Err(Error::InvalidInput("family members must lie in F".into()));
    }
    let charge = fld.charge_potential();
    let full = solve_gauss(gs, fld)?;
    let u_full = kernel::potential(gs.green(), &full.lambda)?;
    let probes = gs.cfg().d_indices();
    let c_hypothesis_met = fld.theta_swept_mass() <= 1.0;

    let mut stages = Vec::with_capacity(family.len());
    let mut lambdas = Vec::with_capacity(family.len());
    for (j, set) in family.iter().enumerate() {
        let sub = ExternalField { f: set.clone(), ..fld.clone() };
        let sol = solve_with_potential(gs, &sub, &charge, false)?;
        let swept = green::green_sweep(gs, &fld.theta, set)?.mass_out();
        let u = kernel::potential(gs.green(), &sol.lambda)?;
        stages.push(StageRow {
            stage: j,
            size: set.len(),
            w: sol.w_value,
            c: sol.c_constant,
            lambda_mass: sol.lambda.total_mass(),
            theta_swept_mass: swept,
            distance_to_full: kernel::signed_energy_norm(gs.green(), &sol.lambda.minus(&full.lambda)?)?,
            potential_gap: probes.iter().map(|i| (u[i] - u_full[i]).abs()).fold(0.0, f64::max),
            kkt_worst: sol.kkt.residuals.worst(),
        });
        lambdas.push(sol.lambda);
    }

    let sign = if nesting == Nesting::Increasing { 1.0 } else { -1.0 };
    let mut w_viol: f64 = 0.0;
    let mut c_viol: f64 = 0.0;
    for p in stages.windows(2) {
        w_viol = w_viol.max(sign * (p[1].w - p[0].w));
        if nesting == Nesting::Increasing {
            c_viol = c_viol.max(p[1].c - p[0].c);
        } else {
            c_viol = c_viol.max(p[0].c - p[1].c);
        }
    }
    let mut parallelogram_excess = f64::NEG_INFINITY;
    for s in 0..lambdas.len() {
        for t in s + 1..lambdas.len() {
            let d = kernel::signed_energy_norm(gs.green(), &lambdas[s].minus(&lambdas[t])?)?;
            parallelogram_excess = parallelogram_excess.max(d * d - 2.0 * (stages[s].w - stages[t].w).abs());
        }
    }
    if lambdas.len() < 2 {
        parallelogram_excess = 0.0;
    }
    let final_gap = (stages.last().map_or(full.w_value, |r| r.w) - full.w_value).abs();
    Ok(SweepReport {
        nesting,
        stages,
        w_monotonicity_violation: w_viol,
        c_monotonicity_violation: c_viol,
        c_hypothesis_met,
        parallelogram_excess,
        final_gap,
        lambdas,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExhaustionRow {
    pub stage: usize,
    pub size: usize,
    /// Largest `|x|` over the truncation.
    pub radius: f64,
    pub w: f64,
    pub c: f64,
    pub theta_swept_mass: f64,
    /// `λ_j` mass inside the fixed window `|x| ≤ window_radius`.
    pub window_mass: f64,
    /// Largest `|x|` over the support of `λ_j`.
    pub support_radius: f64,
    /// `‖λ_j − ϑ^{F_j}_g‖_g`.
    pub distance_to_swept: f64,
    /// `∫ U^ξ_{g,f} dξ` for the part `ξ = λ_j|window` that stays in the window.
    pub c_xi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExhaustionReport {
    pub theta_mass: f64,
    pub window_radius: f64,
    pub rows: Vec<ExhaustionRow>,
}

impl ExhaustionReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "stage",
            "size",
            "radius",
            "w",
            "c",
            "theta_swept_mass",
            "window_mass",
            "support_radius",
            "distance_to_swept",
            "c_xi",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.stage.to_string(),
                r.size.to_string(),
                fmt_f64(r.radius),
                fmt_f64(r.w),
                fmt_f64(r.c),
                fmt_f64(r.theta_swept_mass),
                fmt_f64(r.window_mass),
                fmt_f64(r.support_radius),
                fmt_f64(r.distance_to_swept),
                fmt_f64(r.c_xi),
            ]);
        }
        t
    }
}

/// Solves along increasing truncations of an unbounded set and records the
/// trends that separate mass escape (`ϑ(D) < 1`) from stabilization (`ϑ(D) ≥ 1`).
pub fn exhaustion_mass_probe(
    gs: &GreenSystem,
    theta: &DiscreteMeasure,
    family: &[IndexSet],
    window_radius: f64,
) -> Result<ExhaustionReport> {
    if nesting_of(family)? != Nesting::Increasing {
        return Err(Error::InvalidInput("exhaustion needs an increasing family".into()));
    }
    let ps = gs.cfg().points();
    let mut rows = Vec::with_capacity(family.len());
    for (j, set) in family.iter().enumerate() {
        let fld = ExternalField::new(gs, theta.clone(), set)?;
        let sol = solve_with_potential(gs, &fld, &fld.charge_potential(), false)?;
        let window = set.filter(|i| ps.norm(i) <= window_radius);
        let xi = sol.lambda.restrict(&window);
        let c_xi = if xi.is_zero() {
            0.0
        } else {
            let u = kernel::potential(gs.green(), &xi)?;
            xi.support().iter().map(|i| (u[i] + fld.field_values[i]) * xi.weight(i)).sum()
        };
        rows.push(ExhaustionRow {
            stage: j,
            size: set.len(),
            radius: set.iter().map(|i| ps.norm(i)).fold(0.0, f64::max),
            w: sol.w_value,
            c: sol.c_constant,
            theta_swept_mass: fld.theta_swept_mass(),
            window_mass: sol.lambda.mass_on(&window),
            support_radius: sol.lambda.support().iter().map(|i| ps.norm(i)).fold(0.0, f64::max),
            distance_to_swept: kernel::signed_energy_norm(gs.green(), &sol.lambda.minus(&fld.theta_swept)?)?,
            c_xi,
        });
    }
    Ok(ExhaustionReport { theta_mass: theta.total_mass(), window_radius, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportReport {
    pub adjacency_factor: f64,
    pub boundary_points: usize,
    pub interior_points: usize,
    pub boundary_mass_fraction: f64,
    pub interior_mass_fraction: f64,
    /// Graph connectivity of the field region under the same adjacency rule.
    pub omega_connected: bool,
    #[serde(skip)]
    pub boundary: IndexSet,
}

/// Splits the mass of `λ` between the discrete boundary of `F` relative to `D`
/// (points of `F` with a field-region neighbour within `factor ×` local spacing)
/// and the rest of `F`.
pub fn support_descriptor(sol: &GaussSolution, gs: &GreenSystem, factor: f64) -> Result<SupportReport> {
    if !(factor > 0.0) {
        return Err(Error::InvalidInput("adjacency factor must be positive".into()));
    }
    let cfg = gs.cfg();
    let ps = cfg.points();
    let omega = cfg.omega_indices();
    let spacing = |i: usize| 2.0 * ps.cell_radius(i);
    let boundary = sol.f.filter(|i| omega.iter().any(|j| ps.distance(i, j) <= factor * spacing(i) * (1.0 + 1e-12)));
    let total = sol.lambda.total_mass();
    let on_boundary = sol.lambda.mass_on(&boundary);
    let b = on_boundary / total;
    let omega_connected = connected(ps, omega, |i, j| factor * spacing(i).max(spacing(j)) * (1.0 + 1e-12));
    Ok(SupportReport {
        adjacency_factor: factor,
        boundary_points: boundary.len(),
        interior_points: sol.f.len() - boundary.len(),
        boundary_mass_fraction: b,
        interior_mass_fraction: (total - on_boundary) / total,
        omega_connected,
        boundary,
    })
}

fn connected(ps: &PointSet, set: &IndexSet, radius: impl Fn(usize, usize) -> f64) -> bool {
    let pts = set.as_slice();
    if pts.len() <= 1 {
        return true;
    }
    let mut seen = vec![false; pts.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for b in 0..pts.len() {
            if !seen[b] && ps.distance(pts[a], pts[b]) <= radius(pts[a], pts[b]) {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.iter().all(|&s| s)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub point: usize,
    pub radius: f64,
    pub value: f64,
    /// `ϑ(D) · d_min^(α−n)`.
    pub upper_envelope: f64,
    /// `ϑ(D) · d_max^(α−n)`.
    pub lower_envelope: f64,
    pub within_envelope: bool,
}

/// Riesz potential of the charge at probes, against the nearest- and farthest-point envelopes.
pub fn field_decay_probe(gs: &GreenSystem, theta: &DiscreteMeasure, probes: &IndexSet) -> Result<Vec<DecayRow>> {
    let ps = gs.cfg().points();
    let support = theta.support();
    if support.is_empty() {
        return Err(Error::InvalidInput("the charge is zero".into()));
    }
    if !support.is_disjoint(probes) {
        return Err(Error::Precondition("probes must avoid the charge".into()));
    }
    let u = kernel::potential(gs.riesz_full(), theta)?;
    let exponent = -gs.cfg().codim();
    let mass = theta.total_mass();
    let mut rows: Vec<DecayRow> = probes
        .iter()
        .map(|p| {
            let (lo, hi) = support
                .iter()
                .map(|s| ps.distance(p, s))
                .fold((f64::INFINITY, 0.0_f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
            let upper = mass * lo.powf(exponent);
            let lower = mass * hi.powf(exponent);
            let slack = 1e-12 * upper;
            DecayRow {
                point: p,
                radius: ps.norm(p),
                value: u[p],
                upper_envelope: upper,
                lower_envelope: lower,
                within_envelope: u[p] <= upper + slack && u[p] >= lower - slack,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.radius.total_cmp(&b.radius).then(a.point.cmp(&b.point)));
    Ok(rows)
}

/// Tolerance used for the characterization inequalities, relative to their scale.
pub const CHARACTERIZATION_TOL: f64 = 10.0 * KKT_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainConfig;
    use crate::geometry::generators;
    use crate::kernel::{KernelKind, KernelMatrix};

    /// Green matrix [[2,1,.7],[1,2,.5],[.7,.5,1]] with F = {0,1} and a unit charge at 2.
    fn hand() -> (GreenSystem, ExternalField) {
        let ps = PointSet::new(3, &[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]]).unwrap();
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.7, 1.0, 2.0, 0.5, 0.7, 0.5, 1.0]);
        let k = KernelMatrix::from_matrix(3, IndexSet::range(0..3), m, KernelKind::Riesz, 2.0, 3).unwrap();
        let cfg = DomainConfig::without_complement(ps, IndexSet::new([0, 1]), 2.0).unwrap();
        let gs = GreenSystem::from_riesz(cfg.clone(), k).unwrap();
        let fld = ExternalField::new(&gs, DiscreteMeasure::dirac(3, 2, 1.0).unwrap(), cfg.f_indices()).unwrap();
        (gs, fld)
    }

    #[test]
    fn hand_instance_both_routes() {
        let (gs, fld) = hand();
        assert!((fld.theta_swept.weight(0) - 0.3).abs() < 1e-15);
        assert!((fld.theta_swept.weight(1) - 0.1).abs() < 1e-15);
        for sol in [solve_gauss(&gs, &fld).unwrap(), explicit_solution(&gs, &fld).unwrap()] {
            assert!((sol.lambda.weight(0) - 0.6).abs() < 1e-12, "{:?}", sol.method);
            assert!((sol.lambda.weight(1) - 0.4).abs() < 1e-12);
            assert!((sol.c_constant - 0.9).abs() < 1e-12);
            assert!(sol.kkt.residuals.worst() < 1e-12);
        }
        let qp = solve_gauss(&gs, &fld).unwrap();
        assert!((qp.kkt.multiplier.unwrap() - 0.9).abs() < 1e-12);
        assert!(qp.kkt.permutation_gap.unwrap() < 1e-12);
        let d = dual_check(&gs, &fld).unwrap();
        assert!(d.w_gap < 1e-12 && d.lambda_gap < 1e-7 && d.c_gap < 1e-12);
    }

    #[test]
    fn hand_functional_value() {
        let (gs, fld) = hand();
        let mu = DiscreteMeasure::from_pairs(3, &[(0, 0.6), (1, 0.4)]).unwrap();
        let v = gauss_functional(&gs, &fld, &mu).unwrap();
        assert!((v.value - 0.28).abs() < 1e-14);
        assert!(v.completed_square_residual < 1e-12);
        assert_eq!(gauss_functional(&gs, &fld, &DiscreteMeasure::zeros(3)).unwrap().value, 0.0);
        assert!(gauss_functional(&gs, &fld, &DiscreteMeasure::dirac(3, 2, 1.0).unwrap()).is_err());
    }

    #[test]
    fn perturbed_lambda_breaks_characterization() {
        let (gs, fld) = hand();
        let mu = DiscreteMeasure::from_pairs(3, &[(0, 0.606), (1, 0.394)]).unwrap();
        assert!(characterization_residuals(&gs, &fld, &mu).unwrap().worst() > 10.0 * CHARACTERIZATION_TOL);
    }

    #[test]
    fn class_report_on_bump() {
        let (gs, fld) = hand();
        let sol = solve_gauss(&gs, &fld).unwrap();
        let bump = sol.lambda.plus(&DiscreteMeasure::dirac(3, 0, 0.05).unwrap()).unwrap();
        let r = lambda_class_characterizations(&gs, &fld, &sol, &[sol.lambda.clone(), bump]).unwrap();
        assert_eq!(r.members, vec![0, 1]);
        assert!(r.lambda_minimal);
        assert!(r.potential_margin.abs() < 1e-12);
    }

    /// Charge swept onto F with mass exactly one (after rescaling) is its own minimizer.
    #[test]
    fn unit_swept_mass_gives_zero_constant() {
        let (gs, fld) = hand();
        let scale = 1.0 / fld.theta_swept_mass();
        let fld = ExternalField::new(&gs, fld.theta.scaled(scale).unwrap(), &fld.f).unwrap();
        let sol = solve_gauss(&gs, &fld).unwrap();
        assert!(sol.c_constant.abs() < 1e-12);
        assert!(sol.lambda.max_abs_diff(&fld.theta_swept) < 1e-12);
        assert!((sol.w_value + fld.theta_swept_energy).abs() < 1e-12);
        let e = explicit_solution(&gs, &fld).unwrap();
        assert!(e.c_constant.abs() < 1e-12);
    }

    fn sphere_instance() -> (GreenSystem, ExternalField) {
        let mut pts = generators::sphere_shell(&[0.0; 3], 1.0, 120).unwrap();
        pts.push(vec![0.0, 0.0, 2.5]);
        let ps = PointSet::new(3, &pts).unwrap();
        let cfg = DomainConfig::without_complement(ps, IndexSet::range(0..120), 2.0).unwrap();
        let gs = green::build_green(&cfg).unwrap();
        let fld = ExternalField::new(&gs, DiscreteMeasure::dirac(121, 120, 0.5).unwrap(), cfg.f_indices()).unwrap();
        (gs, fld)
    }

    #[test]
    fn sphere_representation_and_bounds() {
        let (gs, fld) = sphere_instance();
        let qp = solve_gauss(&gs, &fld).unwrap();
        let ex = explicit_solution(&gs, &fld).unwrap();
        let diff = qp.lambda.minus(&ex.lambda).unwrap();
        let norm = kernel::energy_norm(gs.green(), &qp.lambda).unwrap();
        assert!(kernel::signed_energy_norm(gs.green(), &diff).unwrap() <= 1e-6 * norm);
        assert!((qp.c_constant - ex.c_constant).abs() <= 1e-6);
        let b = bound_margins(&gs, &fld, &qp).unwrap();
        assert!(b.swept_energy >= -1e-8 && b.mass_bound >= 0.0 && b.mutual_energy >= 0.0 && b.mass_defect < 1e-12);
        let v = gauss_functional(&gs, &fld, &qp.lambda).unwrap();
        assert!(v.completed_square_residual < 1e-9);
    }

    #[test]
    fn nested_family_monotone() {
        let (gs, fld) = sphere_instance();
        let ps = gs.cfg().points();
        let family: Vec<IndexSet> =
            [0.6, 0.0, -0.6, -1.1].iter().map(|&z| fld.f.filter(|i| ps.point(i)[2] > z)).collect();
        let r = truncation_sweep(&gs, &fld, &family).unwrap();
        assert_eq!(r.nesting, Nesting::Increasing);
        assert!(r.w_monotonicity_violation <= 1e-10);
        assert!(r.c_hypothesis_met && r.c_monotonicity_violation <= 1e-10);
        assert!(r.parallelogram_excess <= 1e-9);
        assert!(r.final_gap < 1e-12);
        let rev: Vec<IndexSet> = family.iter().rev().cloned().collect();
        let r = truncation_sweep(&gs, &fld, &rev).unwrap();
        assert_eq!(r.nesting, Nesting::Decreasing);
        assert!(r.w_monotonicity_violation <= 1e-10);
        assert!(truncation_sweep(&gs, &fld, &[family[0].clone(), IndexSet::new([fld.f.as_slice()[0]]), family[3].clone()]).is_err());
        let one = truncation_sweep(&gs, &fld, std::slice::from_ref(&fld.f)).unwrap();
        assert_eq!(one.final_gap, 0.0);
    }

    #[test]
    fn decay_probe_envelopes() {
        let (gs, fld) = sphere_instance();
        let rows = field_decay_probe(&gs, &fld.theta, &fld.f).unwrap();
        assert!(rows.iter().all(|r| r.within_envelope));
        let r = &rows[0];
        assert!((r.value - r.upper_envelope).abs() < 1e-14 * r.value);
    }

    #[test]
    fn support_split_on_shell() {
        let (gs, fld) = sphere_instance();
        let sol = solve_gauss(&gs, &fld).unwrap();
        let r = support_descriptor(&sol, &gs, ADJACENCY_FACTOR).unwrap();
        assert!((r.boundary_mass_fraction + r.interior_mass_fraction - 1.0).abs() < 1e-12);
        assert!(r.omega_connected);
    }
}
