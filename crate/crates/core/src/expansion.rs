//! Point-based orthonormal expansions of the native space.
//!
//! The Newton basis at nodes x_1, …, x_N is the triangular orthonormal
//! system obtained from stepwise Cholesky decomposition of the kernel matrix:
//! w_n vanishes at all earlier nodes, w_n(x_n) = σ_n > 0, and the node-value
//! matrix [w_n(x_j)] is the (transposed) Cholesky factor of C_{X,X}. Each w_n
//! is a linear combination of kernel translates at the first n nodes, which
//! extends the basis to every point of the domain; truncating after N terms
//! leaves the residual kernel whose diagonal is the squared power function
//! (the Kriging variance given data at the first N nodes).

use serde::{Deserialize, Serialize};

use crate::domain::NodeSet;
use crate::kernels::KernelSpec;
use crate::{Error, Result};

/// How an orthonormal basis was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// Triangular point-based basis (stepwise Cholesky).
    Newton,
    /// Karhunen–Loève basis from a Nyström eigensystem.
    Kl,
}

/// An orthonormal system {w_n} of the native space, represented by
/// coefficients over kernel translates at a set of centers:
/// `w_n(x) = Σ_j coeffs[n][j] · C(center_j, x)`.
#[derive(Debug, Clone)]
pub struct ExpansionBasis {
    kind: BasisKind,
    spec: KernelSpec,
    centers: NodeSet,
    /// Quadrature weights of the centers (KL only).
    weights: Option<Vec<f64>>,
    /// Row-major `size × centers.len()` coefficient matrix.
    coeffs: Vec<f64>,
    size: usize,
    /// Diagonal values σ_n = w_n(x_n) (Newton only).
    diag: Option<Vec<f64>>,
}

impl ExpansionBasis {
    pub(crate) fn from_parts(
        kind: BasisKind,
        spec: KernelSpec,
        centers: NodeSet,
        weights: Option<Vec<f64>>,
        coeffs: Vec<f64>,
        size: usize,
        diag: Option<Vec<f64>>,
    ) -> Result<Self> {
        spec.validate()?;
        if centers.dim() != spec.dim {
            return Err(Error::InvalidSpec(format!(
                "centers have dimension {}, kernel has {}",
                centers.dim(),
                spec.dim
            )));
        }
        if coeffs.len() != size * centers.len() {
            return Err(Error::Format(format!(
                "coefficient matrix has {} entries, expected {} × {}",
                coeffs.len(),
                size,
                centers.len()
            )));
        }
        if let Some(w) = &weights {
            if w.len() != centers.len() {
                return Err(Error::Format("weight vector length mismatch".into()));
            }
        }
        if let Some(d) = &diag {
            if d.len() != size {
                return Err(Error::Format("diagonal vector length mismatch".into()));
            }
        }
        Ok(Self {
            kind,
            spec,
            centers,
            weights,
            coeffs,
            size,
            diag,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn centers(&self) -> &NodeSet {
        &self.centers
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Number of basis functions N.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Newton diagonal σ_n = w_n(x_n).
    pub fn diag(&self) -> Option<&[f64]> {
        self.diag.as_deref()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn coeff_row(&self, n: usize) -> &[f64] {
        let cols = self.centers.len();
        &self.coeffs[n * cols..(n + 1) * cols]
    }

    /// Kernel translate values [C(center_j, x)]_j.
    fn kernel_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.centers
            .iter()
            .map(|c| self.spec.eval_pair(c, x))
            .collect()
    }

    /// All basis values w_1(x), …, w_N(x).
    pub fn eval_all(&self, x: &[f64]) -> Result<Vec<f64>> {
        let k = self.kernel_vector(x)?;
        Ok((0..self.size)
            .map(|n| dot(self.coeff_row(n), &k))
            .collect())
    }

    /// Single basis value w_n(x); n is 1-based.
    pub fn eval_one(&self, n: usize, x: &[f64]) -> Result<f64> {
        if n == 0 || n > self.size {
            return Err(Error::IndexOutOfRange {
                index: n,
                size: self.size,
            });
        }
        let k = self.kernel_vector(x)?;
        Ok(dot(self.coeff_row(n - 1), &k))
    }

    /// Truncated kernel reconstruction Σ_{n≤N} w_n(x) w_n(y).
    pub fn reconstruction(&self, n_trunc: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        let (wx, wy) = (self.eval_all(x)?, self.eval_all(y)?);
        Ok(wx
            .iter()
            .zip(&wy)
            .take(n_trunc)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Residual (truncation) variance `C(x,x) − Σ_{n≤N} w_n(x)²`.
    ///
    /// This is the variance of the truncation error of an expansion path at
    /// x, and equals the squared power function / Kriging variance of the
    /// first N nodes. Values within −1e-10 of zero are clamped to zero.
    pub fn residual_variance(&self, n_trunc: usize, x: &[f64]) -> Result<f64> {
        if n_trunc > self.size {
            return Err(Error::IndexOutOfRange {
                index: n_trunc,
                size: self.size,
            });
        }
        let ws = self.eval_all(x)?;
        let explained: f64 = ws.iter().take(n_trunc).map(|w| w * w).sum();
        let res = self.spec.eval_pair(x, x)? - explained;
        if res < 0.0 && res >= -1e-10 {
            Ok(0.0)
        } else {
            Ok(res)
        }
    }

    /// Basis values at the own centers, row-major `size × centers.len()`.
    pub fn values_at_centers(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.size * self.centers.len());
        let mut columns = Vec::with_capacity(self.centers.len());
        for x in self.centers.iter() {
            columns.push(self.eval_all(x)?);
        }
        for n in 0..self.size {
            for col in &columns {
                out.push(col[n]);
            }
        }
        Ok(out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Relative pivot threshold: a step fails when the diagonal residual
/// σ_n² drops below `PIVOT_RTOL · C(x_n, x_n)`.
const PIVOT_RTOL: f64 = 1e-12;

/// Builds the Newton basis at the given nodes by stepwise Cholesky.
///
/// Fails with [`Error::PivotFailure`] when the kernel matrix is numerically
/// singular at some step; no jitter is applied, since regularizing would
/// silently change the kernel the basis is certified against.
pub fn newton_basis(spec: &KernelSpec, nodes: &NodeSet) -> Result<ExpansionBasis> {
    if nodes.is_empty() {
        return Err(Error::InvalidSpec("newton_basis needs at least one node".into()));
    }
    if nodes.dim() != spec.dim {
        return Err(Error::InvalidSpec(format!(
            "nodes have dimension {}, kernel has {}",
            nodes.dim(),
            spec.dim
        )));
    }
    let n = nodes.len();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = spec.eval_pair(nodes.point(i), nodes.point(j))?;
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }

    // values[m*n + j] = w_m(x_j); structural zeros for j < m
    let mut values = vec![0.0; n * n];
    let mut coeffs = vec![0.0; n * n];
    let mut diag = Vec::with_capacity(n);
    for m in 0..n {
        let mut sigma2 = gram[m * n + m];
        for t in 0..m {
            sigma2 -= values[t * n + m] * values[t * n + m];
        }
        let threshold = PIVOT_RTOL * gram[m * n + m];
        if sigma2 < threshold {
            return Err(Error::PivotFailure {
                index: m,
                residual: sigma2,
                threshold,
            });
        }
        let sigma = sigma2.sqrt();
        diag.push(sigma);
        values[m * n + m] = sigma;
        for j in (m + 1)..n {
            let mut v = gram[m * n + j];
            for t in 0..m {
                v -= values[t * n + m] * values[t * n + j];
            }
            values[m * n + j] = v / sigma;
        }
        // coefficient row: c_m = (e_m − Σ_{t<m} w_t(x_m) c_t) / σ_m
        coeffs[m * n + m] = 1.0;
        for t in 0..m {
            let wtm = values[t * n + m];
            for j in 0..=t {
                coeffs[m * n + j] -= wtm * coeffs[t * n + j];
            }
        }
        for j in 0..=m {
            coeffs[m * n + j] /= sigma;
        }
    }

    ExpansionBasis::from_parts(
        BasisKind::Newton,
        spec.clone(),
        nodes.clone(),
        None,
        coeffs,
        n,
        Some(diag),
    )
}

/// Stopping rule for P-greedy selection.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GreedyStop {
    /// Maximum number of nodes to select.
    pub max_n: usize,
    /// Stop once the sup of the residual variance drops to this level.
    pub tol: f64,
}

/// Result of a P-greedy run: the chosen nodes, their indices into the
/// candidate set, and the sup-residual after each selection step.
#[derive(Debug, Clone)]
pub struct GreedySelection {
    pub nodes: NodeSet,
    pub indices: Vec<usize>,
    pub sup_residuals: Vec<f64>,
}

/// Selects nodes from a candidate set by the P-greedy rule: each step picks
/// the candidate maximizing the current residual variance (ties broken by
/// lowest index), then updates the residual diagonal by subtracting the new
/// basis function squared.
pub fn p_greedy_select(
    spec: &KernelSpec,
    candidates: &NodeSet,
    stop: GreedyStop,
) -> Result<GreedySelection> {
    if candidates.is_empty() {
        return Err(Error::InvalidSpec("p_greedy_select needs candidates".into()));
    }
    if stop.max_n > candidates.len() {
        return Err(Error::InvalidSpec(format!(
            "max_n = {} exceeds candidate count {}",
            stop.max_n,
            candidates.len()
        )));
    }
    let m = candidates.len();
    let mut residual = Vec::with_capacity(m);
    for i in 0..m {
        residual.push(spec.eval_pair(candidates.point(i), candidates.point(i))?);
    }
    let mut rows: Vec<Vec<f64>> = Vec::new(); // w_t over all candidates
    let mut selected: Vec<usize> = Vec::new();
    let mut sup_trace: Vec<f64> = Vec::new();

    while selected.len() < stop.max_n {
        let (mut best, mut best_val) = (usize::MAX, f64::NEG_INFINITY);
        for j in 0..m {
            if residual[j] > best_val {
                best_val = residual[j];
                best = j;
            }
        }
        if best_val <= stop.tol {
            break;
        }
        let diag_value = spec.eval_pair(candidates.point(best), candidates.point(best))?;
        let threshold = PIVOT_RTOL * diag_value;
        if best_val < threshold {
            return Err(Error::PivotFailure {
                index: best,
                residual: best_val,
                threshold,
            });
        }
        let sigma = best_val.sqrt();
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            let mut v = spec.eval_pair(candidates.point(best), candidates.point(j))?;
            for r in &rows {
                v -= r[best] * r[j];
            }
            row.push(v / sigma);
        }
        for j in 0..m {
            residual[j] = (residual[j] - row[j] * row[j]).max(0.0);
        }
        rows.push(row);
        selected.push(best);
        sup_trace.push(residual.iter().cloned().fold(0.0, f64::max));
    }

    let nodes = candidates.select(&selected)?;
    Ok(GreedySelection {
        nodes,
        indices: selected,
        sup_residuals: sup_trace,
    })
}
