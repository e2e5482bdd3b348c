//! Active-set solver for the convex quadratic programs behind every projection
//! in the crate:
//!
//! ```text
//!     minimize  ½ xᵀ A x − bᵀ x   over x ≥ 0            (cone projection)
//!     minimize  ½ xᵀ A x − bᵀ x   over x ≥ 0, Σ x = 1   (simplex)
//! ```
//!
//! `A` must be symmetric positive definite. The solver first runs a
//! primal-dual active-set iteration, which usually settles in a handful of
//! steps. If it cycles it falls back to a primal active-set method that adds
//! one constraint at a time. Ties always go to the lowest index, so results are
//! reproducible.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-13;
const PRIMAL_DUAL_LIMIT: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    NonNegative,
    Simplex,
}

/// Where the iteration starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    /// Every variable free: the first step is a plain linear solve.
    Full,
    /// Every variable at its bound.
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QpPath {
    /// The unconstrained solve was already feasible.
    Direct,
    PrimalDual,
    PrimalActiveSet,
}

#[derive(Debug, Clone)]
pub struct QpOutcome {
    pub x: Vec<f64>,
    /// Multiplier of `Σ x = 1`; zero for the cone problem.
    pub level: f64,
    pub iterations: usize,
    pub path: QpPath,
}

impl QpOutcome {
    pub fn support_size(&self) -> usize {
        self.x.iter().filter(|&&v| v > 0.0).count()
    }
}

pub fn project_nonnegative(a: &DMatrix<f64>, b: &[f64], start: Start) -> Result<QpOutcome> {
    solve(a, b, Constraint::NonNegative, start)
}

pub fn minimize_on_simplex(a: &DMatrix<f64>, b: &[f64]) -> Result<QpOutcome> {
    solve(a, b, Constraint::Simplex, Start::Full)
}

pub fn solve(a: &DMatrix<f64>, b: &[f64], constraint: Constraint, start: Start) -> Result<QpOutcome> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.nrows() });
    }
    let simplex = constraint == Constraint::Simplex;
    if n == 0 {
        if simplex {
            return Err(Error::InvalidInput("simplex problem over an empty set".into()));
        }
        return Ok(QpOutcome { x: vec![], level: 0.0, iterations: 0, path: QpPath::Direct });
    }
    if n == 1 {
        // Closed form; no iteration needed.
        let (x, level) = if simplex { (1.0, a[(0, 0)] - b[0]) } else { ((b[0] / a[(0, 0)]).max(0.0), 0.0) };
        return Ok(QpOutcome { x: vec![x], level, iterations: 0, path: QpPath::Direct });
    }

    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(a.diagonal().amax() * 1e-3).max(f64::MIN_POSITIVE);
    let tol = REL_TOL * scale;

    let passive = match (start, simplex) {
        (Start::Empty, false) => b.iter().map(|&v| v > tol).collect(),
        _ => vec![true; n],
    };

    let pd = primal_dual(a, b, simplex, passive, tol)?;
    match pd {
        PdResult::Converged { x, level, iterations } => {
            let path = if iterations == 1 && x.iter().all(|&v| v > 0.0) && start == Start::Full {
                QpPath::Direct
            } else {
                QpPath::PrimalDual
            };
            Ok(QpOutcome { x, level, iterations, path })
        }
        PdResult::Stalled { last, iterations } => {
            let x0 = feasible_start(a, b, simplex, last);
            let (x, level, more) = primal(a, b, simplex, x0, tol)?;
            Ok(QpOutcome { x, level, iterations: iterations + more, path: QpPath::PrimalActiveSet })
        }
    }
}

enum PdResult {
    Converged { x: Vec<f64>, level: f64, iterations: usize },
    Stalled { last: Vec<f64>, iterations: usize },
}

fn primal_dual(a: &DMatrix<f64>, b: &[f64], simplex: bool, mut passive: Vec<bool>, tol: f64) -> Result<PdResult> {
    let n = b.len();
    let mut last = vec![0.0; n];
    for it in 0..PRIMAL_DUAL_LIMIT {
        let p: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
        if p.is_empty() && simplex {
            return Ok(PdResult::Stalled { last, iterations: it });
        }
        let (z, level) = match eqp(a, b, &p, simplex) {
            Ok(s) => s,
            Err(Error::NotPositiveDefinite { .. }) => return Ok(PdResult::Stalled { last, iterations: it }),
            Err(e) => return Err(e),
        };
        let mut x = vec![0.0; n];
        for (k, &i) in p.iter().enumerate() {
            x[i] = z[k];
        }
        let ax = mat_vec_sparse(a, &x);
        let next: Vec<bool> =
            (0..n).map(|i| if passive[i] { x[i] > 0.0 } else { ax[i] - b[i] - level < -tol }).collect();
        if next == passive {
            return Ok(PdResult::Converged { x, level, iterations: it + 1 });
        }
        last = x;
        passive = next;
    }
    Ok(PdResult::Stalled { last, iterations: PRIMAL_DUAL_LIMIT })
}

fn feasible_start(a: &DMatrix<f64>, b: &[f64], simplex: bool, last: Vec<f64>) -> Vec<f64> {
    let mut x: Vec<f64> = last.into_iter().map(|v| v.max(0.0)).collect();
    if simplex {
        let s: f64 = x.iter().sum();
        if s > 0.0 && s.is_finite() {
            x.iter_mut().for_each(|v| *v /= s);
        } else {
            // Best vertex of the simplex, lowest index on ties.
            let mut best = 0;
            for i in 1..b.len() {
                if 0.5 * a[(i, i)] - b[i] < 0.5 * a[(best, best)] - b[best] {
                    best = i;
                }
            }
            x = vec![0.0; b.len()];
            x[best] = 1.0;
        }
    }
    x
}

fn primal(a: &DMatrix<f64>, b: &[f64], simplex: bool, mut x: Vec<f64>, tol: f64) -> Result<(Vec<f64>, f64, usize)> {
    let n = b.len();
    let max_iterations = 20 * n + 200;
    let mut passive: Vec<usize> = (0..n).filter(|&i| x[i] > 0.0).collect();
    let mut tabu = vec![false; n];
    let mut iterations = 0;
    let mut just_added: Option<usize> = None;
    loop {
        let level = loop {
            iterations += 1;
            if iterations > max_iterations {
                return Err(Error::NoConvergence(max_iterations));
            }
            let (z, level) = eqp(a, b, &passive, simplex)?;
            if z.iter().all(|&v| v > 0.0) {
                for (k, &i) in passive.iter().enumerate() {
                    x[i] = z[k];
                }
                break level;
            }
            let mut step = f64::INFINITY;
            let mut blocking = passive[0];
            for (k, &i) in passive.iter().enumerate() {
                if z[k] <= 0.0 {
                    let t = x[i] / (x[i] - z[k]);
                    if t < step {
                        step = t;
                        blocking = i;
                    }
                }
            }
            let step = step.clamp(0.0, 1.0);
            for (k, &i) in passive.iter().enumerate() {
                x[i] += step * (z[k] - x[i]);
            }
            x[blocking] = 0.0;
            for &i in &passive {
                if x[i] <= 0.0 {
                    x[i] = 0.0;
                }
            }
            if step == 0.0 && just_added == Some(blocking) {
                tabu[blocking] = true;
            } else if step > 0.0 {
                tabu.iter_mut().for_each(|t| *t = false);
            }
            just_added = None;
            passive.retain(|&i| x[i] > 0.0);
            if passive.is_empty() && simplex {
                return Err(Error::NoConvergence(iterations));
            }
        };

        let ax = mat_vec_sparse(a, &x);
        let mut entering: Option<(usize, f64)> = None;
        for i in 0..n {
            if x[i] > 0.0 || tabu[i] {
                continue;
            }
            let g = ax[i] - b[i] - level;
            if g < -tol && entering.is_none_or(|(_, best)| g < best) {
                entering = Some((i, g));
            }
        }
        match entering {
            None => return Ok((x, level, iterations)),
            Some((j, _)) => {
                let pos = passive.partition_point(|&i| i < j);
                passive.insert(pos, j);
                just_added = Some(j);
            }
        }
    }
}

/// Equality-constrained subproblem on the free set `p`.
fn eqp(a: &DMatrix<f64>, b: &[f64], p: &[usize], simplex: bool) -> Result<(Vec<f64>, f64)> {
    let k = p.len();
    if k == 0 {
        return Ok((vec![], 0.0));
    }
    let sub = DMatrix::from_fn(k, k, |r, c| a[(p[r], p[c])]);
    let chol = Cholesky::new(sub).ok_or(Error::NotPositiveDefinite { size: k })?;
    let u = chol.solve(&DVector::from_iterator(k, p.iter().map(|&i| b[i])));
    if !simplex {
        return Ok((u.as_slice().to_vec(), 0.0));
    }
    let v = chol.solve(&DVector::from_element(k, 1.0));
    let level = (1.0 - u.sum()) / v.sum();
    Ok(((u + v * level).as_slice().to_vec(), level))
}

/// `A x`, skipping zero entries of `x`.
pub(crate) fn mat_vec_sparse(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            let col = a.column(j);
            for (o, &aij) in out.iter_mut().zip(col.iter()) {
                *o += aij * xj;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn objective(a: &DMatrix<f64>, b: &[f64], x: &[f64]) -> f64 {
        let ax = mat_vec_sparse(a, x);
        0.5 * x.iter().zip(&ax).map(|(u, v)| u * v).sum::<f64>() - x.iter().zip(b).map(|(u, v)| u * v).sum::<f64>()
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &m * m.transpose() + DMatrix::identity(n, n) * 0.1
    }

    #[test]
    fn hand_active_set_instance() {
        // Unconstrained solution of [[1,2],[2,8]] x = 1 has a negative weight.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 8.0]);
        let out = project_nonnegative(&a, &[1.0, 1.0], Start::Full).unwrap();
        assert_eq!(out.x, vec![1.0, 0.0]);
        assert_ne!(out.path, QpPath::Direct);
    }

    #[test]
    fn hand_simplex_instance() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let out = minimize_on_simplex(&a, &[0.7, 0.5]).unwrap();
        assert!((out.x[0] - 0.6).abs() < 1e-14 && (out.x[1] - 0.4).abs() < 1e-14);
        assert!((out.level - 0.9).abs() < 1e-14);
        assert_eq!(out.path, QpPath::Direct);
    }

    #[test]
    fn single_variable_closed_form() {
        let a = DMatrix::from_element(1, 1, 4.0);
        assert_eq!(project_nonnegative(&a, &[2.0], Start::Full).unwrap().x, vec![0.5]);
        assert_eq!(project_nonnegative(&a, &[-2.0], Start::Full).unwrap().x, vec![0.0]);
        let s = minimize_on_simplex(&a, &[1.0]).unwrap();
        assert_eq!((s.x[0], s.level), (1.0, 3.0));
    }

    /// Brute force over a grid of the 2-simplex.
    #[test]
    fn simplex_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 3);
            let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let out = minimize_on_simplex(&a, &b).unwrap();
            let steps = 400;
            let mut best = f64::INFINITY;
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let x = [i as f64 / steps as f64, j as f64 / steps as f64, (steps - i - j) as f64 / steps as f64];
                    best = best.min(objective(&a, &b, &x));
                }
            }
            let got = objective(&a, &b, &out.x);
            assert!(got <= best + 1e-12, "solver {got} worse than grid {best}");
            assert!(best - got < 1e-3, "grid {best} far below solver {got}");
        }
    }

    #[test]
    fn both_starts_agree_on_cone_problem() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [4, 9, 25] {
            let a = random_spd(&mut rng, n);
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let full = project_nonnegative(&a, &b, Start::Full).unwrap();
            let empty = project_nonnegative(&a, &b, Start::Empty).unwrap();
            let diff = full.x.iter().zip(&empty.x).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-10, "n={n} diff={diff}");
        }
    }

    #[test]
    fn primal_fallback_reaches_kkt() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_spd(&mut rng, 30);
        let b: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let scale = 1.0;
        let x0 = feasible_start(&a, &b, true, vec![0.0; 30]);
        let (x, level, _) = primal(&a, &b, true, x0, 1e-13 * scale).unwrap();
        let reference = minimize_on_simplex(&a, &b).unwrap();
        let diff = x.iter().zip(&reference.x).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
        assert!((level - reference.level).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn kkt_conditions_hold(seed in 0u64..10_000, n in 2usize..30, simplex in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_spd(&mut rng, n);
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = if simplex { Constraint::Simplex } else { Constraint::NonNegative };
            let out = solve(&a, &b, c, Start::Full).unwrap();
            let ax = mat_vec_sparse(&a, &out.x);
            let scale = ax.iter().chain(&b).map(|v| v.abs()).fold(1e-300, f64::max);
            for i in 0..n {
                let g = ax[i] - b[i] - out.level;
                prop_assert!(out.x[i] >= 0.0);
                prop_assert!(g >= -1e-9 * scale);
                if out.x[i] > 0.0 {
                    prop_assert!(g.abs() <= 1e-9 * scale);
                }
            }
            if simplex {
                prop_assert!((out.x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
