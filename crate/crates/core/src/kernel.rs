//! Riesz kernel matrices, potentials, energies, capacities and equilibrium measures.
//!
//! A [`KernelMatrix`] covers a subset of the points of an ambient point set
//! (all points for the Riesz kernel, the domain points for the Green kernel).
//! Measures and potentials are always indexed by ambient point index.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::domain::validate_alpha;
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::measure::{DiscreteMeasure, IndexSet};
use crate::qp::{self, Start};
use crate::report::fmt_f64;

/// Relative tolerance for KKT residuals reported by solvers.
pub const KKT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Riesz,
    Green,
}

#[derive(Clone)]
pub struct KernelMatrix {
    labels: IndexSet,
    slot: Vec<Option<usize>>,
    matrix: DMatrix<f64>,
    alpha: f64,
    dim: usize,
    kind: KernelKind,
    factor: Cholesky<f64, Dyn>,
}

impl std::fmt::Debug for KernelMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelMatrix")
            .field("kind", &self.kind)
            .field("size", &self.size())
            .field("alpha", &self.alpha)
            .field("dim", &self.dim)
            .finish()
    }
}

impl KernelMatrix {
    /// Wraps an explicit matrix whose rows correspond to `labels` (ambient indices).
    ///
    /// The matrix must be exactly symmetric and pass a Cholesky factorization.
    pub fn from_matrix(
        ambient: usize,
        labels: IndexSet,
        matrix: DMatrix<f64>,
        kind: KernelKind,
        alpha: f64,
        dim: usize,
    ) -> Result<Self> {
        let k = labels.len();
        if matrix.nrows() != k || matrix.ncols() != k {
            return Err(Error::DimensionMismatch { expected: k, found: matrix.nrows() });
        }
        if labels.max().is_some_and(|m| m >= ambient) {
            return Err(Error::InvalidInput("kernel label outside the ambient point set".into()));
        }
        for i in 0..k {
            for j in 0..i {
                if matrix[(i, j)] != matrix[(j, i)] {
                    return Err(Error::InvalidInput(format!("kernel matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("kernel matrix has non-finite entries".into()));
        }
        let factor = Cholesky::new(matrix.clone()).ok_or(Error::NotPositiveDefinite { size: k })?;
        let mut slot = vec![None; ambient];
        for (local, g) in labels.iter().enumerate() {
            slot[g] = Some(local);
        }
        Ok(Self { labels, slot, matrix, alpha, dim, kind, factor })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows.
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    /// Size of the ambient point set.
    pub fn ambient(&self) -> usize {
        self.slot.len()
    }

    pub fn labels(&self) -> &IndexSet {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Cholesky factor computed at construction.
    pub fn factor(&self) -> &Cholesky<f64, Dyn> {
        &self.factor
    }

    pub fn local(&self, global: usize) -> Option<usize> {
        self.slot.get(global).copied().flatten()
    }

    pub fn covers(&self, set: &IndexSet) -> bool {
        set.iter().all(|i| self.local(i).is_some())
    }

    /// Entry for two ambient indices.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.matrix[(self.local_checked(i)?, self.local_checked(j)?)])
    }

    pub(crate) fn local_checked(&self, global: usize) -> Result<usize> {
        self.local(global)
            .ok_or_else(|| Error::InvalidInput(format!("point {global} is outside the {:?} kernel's domain", self.kind)))
    }

    pub(crate) fn locals(&self, set: &IndexSet) -> Result<Vec<usize>> {
        set.iter().map(|g| self.local_checked(g)).collect()
    }

    /// Block of the matrix with rows `rows` and columns `cols` (ambient indices).
    pub fn block(&self, rows: &IndexSet, cols: &IndexSet) -> Result<DMatrix<f64>> {
        let r = self.locals(rows)?;
        let c = self.locals(cols)?;
        Ok(DMatrix::from_fn(r.len(), c.len(), |i, j| self.matrix[(r[i], c[j])]))
    }

    /// Weights of `mu` in local order; errors if `mu` charges points outside the kernel.
    pub(crate) fn local_weights(&self, mu: &DiscreteMeasure) -> Result<DVector<f64>> {
        if mu.len() != self.ambient() {
            return Err(Error::DimensionMismatch { expected: self.ambient(), found: mu.len() });
        }
        let mut w = DVector::zeros(self.size());
        for (i, &m) in mu.weights().iter().enumerate() {
            if m != 0.0 {
                w[self.local_checked(i)?] = m;
            }
        }
        Ok(w)
    }

    /// Writes the full matrix as CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = std::iter::once("index".to_string()).chain(self.labels.iter().map(|l| l.to_string())).collect();
        w.write_record(&header)?;
        for (r, label) in self.labels.iter().enumerate() {
            let row: Vec<String> =
                std::iter::once(label.to_string()).chain((0..self.size()).map(|c| fmt_f64(self.matrix[(r, c)]))).collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Riesz kernel `|x − y|^(α−n)` off the diagonal; `(σ·r_i)^(α−n)` on it.
pub fn assemble_riesz(ps: &PointSet, alpha: f64, sigma: f64) -> Result<KernelMatrix> {
    validate_alpha(alpha, ps.dim())?;
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidInput(format!("sigma = {sigma} must lie in (0, 1]")));
    }
    let n = ps.len();
    let exponent = alpha - ps.dim() as f64;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = (sigma * ps.cell_radius(i)).powf(exponent);
        for j in 0..i {
            let v = riesz(ps.distance(i, j), exponent);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    KernelMatrix::from_matrix(n, IndexSet::range(0..n), m, KernelKind::Riesz, alpha, ps.dim())
}

#[inline]
pub(crate) fn riesz(distance: f64, exponent: f64) -> f64 {
    if exponent == -1.0 {
        1.0 / distance
    } else {
        distance.powf(exponent)
    }
}

/// `U^μ(x_i) = Σ_j K_ij μ_j` at every kernel point; zero at ambient points outside the kernel.
pub fn potential(k: &KernelMatrix, mu: &DiscreteMeasure) -> Result<Vec<f64>> {
    let w = k.local_weights(mu)?;
    let u = qp::mat_vec_sparse(&k.matrix, w.as_slice());
    let mut out = vec![0.0; k.ambient()];
    for (local, g) in k.labels.iter().enumerate() {
        out[g] = u[local];
    }
    Ok(out)
}

/// `I(μ, ν) = Σ_ij μ_i K_ij ν_j`.
pub fn mutual_energy(k: &KernelMatrix, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let a = k.local_weights(mu)?;
    let b = k.local_weights(nu)?;
    Ok(bilinear(&k.matrix, a.as_slice(), b.as_slice()))
}

pub fn energy(k: &KernelMatrix, mu: &DiscreteMeasure) -> Result<f64> {
    mutual_energy(k, mu, mu)
}

pub fn energy_norm(k: &KernelMatrix, mu: &DiscreteMeasure) -> Result<f64> {
    Ok(energy(k, mu)?.max(0.0).sqrt())
}

/// Energy norm of a signed weight vector (ambient indexing), e.g. a difference of measures.
pub fn signed_energy_norm(k: &KernelMatrix, weights: &[f64]) -> Result<f64> {
    if weights.len() != k.ambient() {
        return Err(Error::DimensionMismatch { expected: k.ambient(), found: weights.len() });
    }
    let mut w = vec![0.0; k.size()];
    for (i, &v) in weights.iter().enumerate() {
        if v != 0.0 {
            w[k.local_checked(i)?] = v;
        }
    }
    Ok(bilinear(&k.matrix, &w, &w).max(0.0).sqrt())
}

pub(crate) fn bilinear(m: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let mb = qp::mat_vec_sparse(m, b);
    a.iter().zip(&mb).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct Capacity {
    pub value: f64,
    /// Minimal energy over probability measures on the set.
    pub min_energy: f64,
    pub minimizer: DiscreteMeasure,
}

/// `c(A) = 1 / min { I(μ) : μ ≥ 0 on A, μ(A) = 1 }` and the unique minimizer.
pub fn capacity(k: &KernelMatrix, a: &IndexSet) -> Result<Capacity> {
    let locals = nonempty_locals(k, a)?;
    let mut w = vec![0.0; k.ambient()];
    let min_energy = if locals.len() == 1 {
        w[a.as_slice()[0]] = 1.0;
        k.matrix[(locals[0], locals[0])]
    } else {
        let sub = DMatrix::from_fn(locals.len(), locals.len(), |i, j| k.matrix[(locals[i], locals[j])]);
        let out = qp::minimize_on_simplex(&sub, &vec![0.0; locals.len()])?;
        for (g, x) in a.iter().zip(&out.x) {
            w[g] = *x;
        }
        bilinear(&sub, &out.x, &out.x)
    };
    Ok(Capacity { value: 1.0 / min_energy, min_energy, minimizer: DiscreteMeasure::from_solver(w, 1e-12)? })
}

/// Equilibrium measure on `a`: `U^γ = 1` on its support and `U^γ ≥ 1` on `a`.
pub fn equilibrium_measure(k: &KernelMatrix, a: &IndexSet) -> Result<DiscreteMeasure> {
    let locals = nonempty_locals(k, a)?;
    let mut w = vec![0.0; k.ambient()];
    if locals.len() == 1 {
        w[a.as_slice()[0]] = 1.0 / k.matrix[(locals[0], locals[0])];
    } else {
        let sub = DMatrix::from_fn(locals.len(), locals.len(), |i, j| k.matrix[(locals[i], locals[j])]);
        let out = qp::project_nonnegative(&sub, &vec![1.0; locals.len()], Start::Full)?;
        for (g, x) in a.iter().zip(&out.x) {
            w[g] = *x;
        }
    }
    DiscreteMeasure::from_solver(w, 1e-12)
}

fn nonempty_locals(k: &KernelMatrix, a: &IndexSet) -> Result<Vec<usize>> {
    if a.is_empty() {
        return Err(Error::InvalidInput("set is empty".into()));
    }
    k.locals(a)
}

/// Complementarity residuals of a level-`level` equilibrium-type measure on `a`:
/// `(max over support |U − level|, max over a of (level − U)⁺)`, both relative to `level`.
pub fn complementarity_residuals(k: &KernelMatrix, gamma: &DiscreteMeasure, a: &IndexSet, level: f64) -> Result<(f64, f64)> {
    let u = potential(k, gamma)?;
    let mut eq: f64 = 0.0;
    let mut ineq: f64 = 0.0;
    for i in a.iter() {
        if gamma.weight(i) > 0.0 {
            eq = eq.max((u[i] - level).abs());
        }
        ineq = ineq.max(level - u[i]);
    }
    let s = level.abs().max(f64::MIN_POSITIVE);
    Ok((eq / s, ineq.max(0.0) / s))
}
