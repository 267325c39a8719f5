//! Nyström discretization of the kernel integral operator and
//! Karhunen–Loève bases.
//!
//! The integral eigenproblem `∫ C(x,y) v(x) dx = λ v(y)` is discretized on a
//! positive quadrature rule and symmetrized as `B = D^{1/2} C D^{1/2}` with
//! `D = diag(weights)`, so a dense symmetric eigensolve yields eigenpairs
//! with discrete L₂(Ω) orthonormality. Scaling the eigenfunctions by √λ_n
//! gives a system orthonormal in the native space, and the Nyström formula
//! extends it off the grid.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::domain::{DomainBox, NodeSet};
use crate::expansion::{BasisKind, ExpansionBasis};
use crate::kernels::{KernelSpec, PointKernel};
use crate::{Error, Result};

/// Quadrature rule choice for grid construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Composite midpoint on a uniform grid; weights trivially positive
    /// and uniform.
    Midpoint,
    /// Tensor Gauss–Legendre.
    GaussLegendre,
}

/// Quadrature points and positive weights over a box domain.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: NodeSet,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn build(rule: QuadratureRule, domain: &DomainBox, n_per_axis: usize) -> Result<Self> {
        match rule {
            QuadratureRule::Midpoint => Self::midpoint(domain, n_per_axis),
            QuadratureRule::GaussLegendre => Self::gauss_legendre(domain, n_per_axis),
        }
    }

    /// Tensor midpoint rule with `n_per_axis` cells per axis.
    pub fn midpoint(domain: &DomainBox, n_per_axis: usize) -> Result<Self> {
        if n_per_axis == 0 {
            return Err(Error::InvalidSpec("quadrature needs at least one point".into()));
        }
        let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..domain.dim())
            .map(|axis| {
                let (lo, hi) = (domain.lower[axis], domain.upper[axis]);
                let h = (hi - lo) / n_per_axis as f64;
                let pts = (0..n_per_axis)
                    .map(|i| lo + (i as f64 + 0.5) * h)
                    .collect();
                let wts = vec![h; n_per_axis];
                (pts, wts)
            })
            .collect();
        Self::from_axes(domain, &axes)
    }

    /// Tensor Gauss–Legendre rule with `n_per_axis` points per axis.
    pub fn gauss_legendre(domain: &DomainBox, n_per_axis: usize) -> Result<Self> {
        if n_per_axis == 0 {
            return Err(Error::InvalidSpec("quadrature needs at least one point".into()));
        }
        let (ref_pts, ref_wts) = gauss_legendre_rule(n_per_axis);
        let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..domain.dim())
            .map(|axis| {
                let (lo, hi) = (domain.lower[axis], domain.upper[axis]);
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                let pts = ref_pts.iter().map(|t| mid + half * t).collect();
                let wts = ref_wts.iter().map(|w| w * half).collect();
                (pts, wts)
            })
            .collect();
        Self::from_axes(domain, &axes)
    }

    fn from_axes(domain: &DomainBox, axes: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        let d = domain.dim();
        let per_axis = axes[0].0.len();
        let total = per_axis.pow(d as u32);
        let mut points = Vec::with_capacity(total * d);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut w = 1.0;
            for axis in axes.iter().take(d) {
                let idx = rem % per_axis;
                rem /= per_axis;
                points.push(axis.0[idx]);
                w *= axis.1[idx];
            }
            weights.push(w);
        }
        let nodes = NodeSet::new(d, points, domain.clone())?;
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P'_n(x) via the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Approximate Mercer eigensystem on a quadrature grid.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Decreasing positive eigenvalues λ_1 ≥ λ_2 ≥ … > 0.
    pub lambdas: Vec<f64>,
    /// Eigenfunction values on the grid, row-major `lambdas.len() × grid.len()`,
    /// orthonormal in the weighted discrete L₂ sense.
    pub vectors: Vec<f64>,
    pub grid: QuadratureGrid,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Grid values of eigenfunction n (0-based).
    pub fn vector(&self, n: usize) -> &[f64] {
        let g = self.grid.len();
        &self.vectors[n * g..(n + 1) * g]
    }
}

/// Eigenvalues below `RANK_RTOL · λ₁` are numerical noise and get truncated.
const RANK_RTOL: f64 = 1e-12;

/// Solves the weighted discrete eigenproblem for the Mercer equation and
/// returns the top `n_eigs` eigenpairs.
pub fn nystrom_eigs<K: PointKernel>(
    kernel: &K,
    grid: &QuadratureGrid,
    n_eigs: usize,
) -> Result<EigenSystem> {
    let g = grid.len();
    if g == 0 {
        return Err(Error::InvalidSpec("empty quadrature grid".into()));
    }
    if n_eigs == 0 || n_eigs > g {
        return Err(Error::InvalidSpec(format!(
            "requested {n_eigs} eigenpairs from a {g}-point grid"
        )));
    }
    if grid.weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidSpec("quadrature weights must be positive".into()));
    }
    let sqrt_w: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut b = DMatrix::<f64>::zeros(g, g);
    for i in 0..g {
        for j in i..g {
            let v = kernel.eval_pair(grid.nodes.point(i), grid.nodes.point(j))?
                * sqrt_w[i]
                * sqrt_w[j];
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }

    let eig = SymmetricEigen::try_new(b, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::EigenFailure("symmetric QL iteration did not converge".into()))?;

    let mut order: Vec<usize> = (0..g).collect();
    order.sort_by(|&a, &bb| {
        eig.eigenvalues[bb]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let lambda_max = eig.eigenvalues[order[0]];
    if !(lambda_max > 0.0) {
        return Err(Error::EigenFailure(format!(
            "leading eigenvalue {lambda_max} is not positive"
        )));
    }
    let mut lambdas = Vec::with_capacity(n_eigs);
    let mut vectors = Vec::with_capacity(n_eigs * g);
    for &idx in order.iter().take(n_eigs) {
        let lambda = eig.eigenvalues[idx];
        if lambda < RANK_RTOL * lambda_max {
            break; // numerical rank reached
        }
        lambdas.push(lambda);
        let col = eig.eigenvectors.column(idx);
        // v_n(t_i) = u_i / √w_i, with a canonical sign: largest-magnitude
        // component positive, so results do not depend on solver sign choices
        let mut flip = 1.0;
        let mut best = 0.0_f64;
        for i in 0..g {
            if col[i].abs() > best {
                best = col[i].abs();
                flip = if col[i] < 0.0 { -1.0 } else { 1.0 };
            }
        }
        for i in 0..g {
            vectors.push(flip * col[i] / sqrt_w[i]);
        }
    }

    Ok(EigenSystem {
        lambdas,
        vectors,
        grid: grid.clone(),
    })
}

/// Builds the Karhunen–Loève basis w_n = √λ_n v_n from an eigensystem.
///
/// Off-grid evaluation uses the Nyström extension
/// `w_n(x) = λ_n^{−1/2} Σ_i weight_i C(x, t_i) v_n(t_i)`, which is encoded
/// as coefficients over kernel translates at the grid points.
pub fn kl_basis(eigs: &EigenSystem, spec: &KernelSpec) -> Result<ExpansionBasis> {
    if eigs.is_empty() {
        return Err(Error::InvalidSpec("empty eigensystem".into()));
    }
    if spec.dim != eigs.grid.nodes.dim() {
        return Err(Error::InvalidSpec(format!(
            "kernel dimension {} does not match grid dimension {}",
            spec.dim,
            eigs.grid.nodes.dim()
        )));
    }
    let g = eigs.grid.len();
    let n = eigs.len();
    let mut coeffs = Vec::with_capacity(n * g);
    for k in 0..n {
        let scale = eigs.lambdas[k].sqrt().recip();
        let v = eigs.vector(k);
        for i in 0..g {
            coeffs.push(eigs.grid.weights[i] * v[i] * scale);
        }
    }
    ExpansionBasis::from_parts(
        BasisKind::Kl,
        spec.clone(),
        eigs.grid.nodes.clone(),
        Some(eigs.grid.weights.clone()),
        coeffs,
        n,
        None,
    )
}

/// Least-squares decay exponent of an eigenvalue sequence.
///
/// Fits `log λ_n ~ s·log n` over the 1-based index range and returns the
/// smoothness estimate `m̂ = −s·d/2`, matching the `λ_n ≍ n^{−2m/d}` law.
pub fn eig_decay_fit(lambdas: &[f64], dim: usize, fit_range: (usize, usize)) -> Result<f64> {
    let (lo, hi) = fit_range;
    if lo < 1 || hi > lambdas.len() || hi < lo {
        return Err(Error::InvalidSpec(format!(
            "fit range {lo}..={hi} outside sequence of length {}",
            lambdas.len()
        )));
    }
    if hi - lo + 1 < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 points, got {}",
            hi - lo + 1
        )));
    }
    let mut xs = Vec::with_capacity(hi - lo + 1);
    let mut ys = Vec::with_capacity(hi - lo + 1);
    for n in lo..=hi {
        let lam = lambdas[n - 1];
        if !(lam > 0.0) {
            return Err(Error::DegenerateFit(format!(
                "eigenvalue {n} is not positive: {lam}"
            )));
        }
        xs.push((n as f64).ln());
        ys.push(lam.ln());
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    Ok(-slope * dim as f64 / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::BrownianMin;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre_rule(5);
        // degree 9 is exact for a 5-point rule
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert_relative_eq!(integral, 2.0 / 9.0, epsilon = 1e-13);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn midpoint_grid_weights_sum_to_volume() {
        let domain = DomainBox::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        let grid = QuadratureGrid::midpoint(&domain, 7).unwrap();
        assert_eq!(grid.len(), 49);
        let total: f64 = grid.weights.iter().sum();
        assert_relative_eq!(total, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn brownian_min_kernel_matches_analytic_eigensystem() {
        // analytic oracle: λ_n = (2/((2n−1)π))², v_n = √2 sin((2n−1)πx/2)
        let domain = DomainBox::unit_interval();
        let grid = QuadratureGrid::midpoint(&domain, 400).unwrap();
        let eigs = nystrom_eigs(&BrownianMin, &grid, 6).unwrap();
        for n in 1..=5 {
            let analytic = BrownianMin::eigenvalue(n);
            assert_relative_eq!(eigs.lambdas[n - 1], analytic, max_relative = 5e-3);
        }
        // eigenfunction shape at a grid point
        let x = grid.nodes.point(200)[0];
        let analytic = 2.0_f64.sqrt() * (std::f64::consts::PI * x / 2.0).sin();
        assert_relative_eq!(eigs.vector(0)[200], analytic, max_relative = 1e-2);
    }

    #[test]
    fn constant_kernel_is_rank_one() {
        // C ≡ 1 on [0,1]: single eigenvalue 1 with eigenfunction 1
        struct ConstantKernel;
        impl PointKernel for ConstantKernel {
            fn dim(&self) -> usize {
                1
            }
            fn eval_pair(&self, _x: &[f64], _y: &[f64]) -> crate::Result<f64> {
                Ok(1.0)
            }
        }
        let domain = DomainBox::unit_interval();
        let grid = QuadratureGrid::midpoint(&domain, 101).unwrap();
        let eigs = nystrom_eigs(&ConstantKernel, &grid, 10).unwrap();
        assert_eq!(eigs.len(), 1, "rank-one kernel must truncate to one pair");
        assert_relative_eq!(eigs.lambdas[0], 1.0, epsilon = 1e-10);
        for i in 0..grid.len() {
            assert_relative_eq!(eigs.vector(0)[i], 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn discrete_orthonormality() {
        let spec = KernelSpec::matern(1.5, 0.4, 1).unwrap();
        let grid = QuadratureGrid::midpoint(&DomainBox::unit_interval(), 150).unwrap();
        let eigs = nystrom_eigs(&spec, &grid, 8).unwrap();
        for a in 0..eigs.len() {
            for b in 0..eigs.len() {
                let ip: f64 = (0..grid.len())
                    .map(|i| grid.weights[i] * eigs.vector(a)[i] * eigs.vector(b)[i])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert_relative_eq!(ip, want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn trace_identity() {
        // Σ λ_n ≈ ∫ C(x,x) dx = σ² |Ω|
        let spec = KernelSpec::matern(2.5, 0.3, 1)
            .unwrap()
            .with_variance(1.7)
            .unwrap();
        let grid = QuadratureGrid::midpoint(&DomainBox::unit_interval(), 120).unwrap();
        let eigs = nystrom_eigs(&spec, &grid, 120).unwrap();
        let trace: f64 = eigs.lambdas.iter().sum();
        assert_relative_eq!(trace, 1.7, max_relative = 1e-6);
    }

    #[test]
    fn nystrom_consistency_under_grid_refinement() {
        let spec = KernelSpec::matern(1.5, 1.0, 1).unwrap();
        let coarse = nystrom_eigs(
            &spec,
            &QuadratureGrid::midpoint(&DomainBox::unit_interval(), 200).unwrap(),
            10,
        )
        .unwrap();
        let fine = nystrom_eigs(
            &spec,
            &QuadratureGrid::midpoint(&DomainBox::unit_interval(), 400).unwrap(),
            10,
        )
        .unwrap();
        for n in 0..10 {
            let rel = (coarse.lambdas[n] - fine.lambdas[n]).abs() / fine.lambdas[n];
            assert!(rel < 0.01, "eigenvalue {n} moved by {rel} under refinement");
        }
    }

    #[test]
    fn kl_basis_pointwise_bound_and_reconstruction() {
        let spec = KernelSpec::matern(1.5, 0.5, 1).unwrap();
        let grid = QuadratureGrid::midpoint(&DomainBox::unit_interval(), 200).unwrap();
        let eigs = nystrom_eigs(&spec, &grid, 40).unwrap();
        let basis = kl_basis(&eigs, &spec).unwrap();
        for &x in &[0.13, 0.5, 0.86] {
            let res = basis.residual_variance(basis.size(), &[x]).unwrap();
            assert!(res >= -1e-10, "pointwise bound violated: {res}");
            assert!(res <= spec.variance);
        }
        // kernel reconstruction within the residual certificates
        let (x, y) = ([0.3], [0.7]);
        let recon = basis.reconstruction(basis.size(), &x, &y).unwrap();
        let truth = spec.eval_pair(&x, &y).unwrap();
        let bound = (basis.residual_variance(basis.size(), &x).unwrap()
            * basis.residual_variance(basis.size(), &y).unwrap())
        .sqrt()
            + 1e-8;
        assert!(
            (recon - truth).abs() <= bound,
            "reconstruction off by {} > {bound}",
            (recon - truth).abs()
        );
    }

    #[test]
    fn rank_one_kl_basis_is_constant_function() {
        struct ConstantKernel;
        impl PointKernel for ConstantKernel {
            fn dim(&self) -> usize {
                1
            }
            fn eval_pair(&self, _x: &[f64], _y: &[f64]) -> crate::Result<f64> {
                Ok(1.0)
            }
        }
        let grid = QuadratureGrid::midpoint(&DomainBox::unit_interval(), 64).unwrap();
        let eigs = nystrom_eigs(&ConstantKernel, &grid, 5).unwrap();
        // w₁ = √λ₁ v₁ ≡ 1; evaluate through the KL coefficients with a
        // constant kernel stand-in is not possible via KernelSpec, so check
        // the grid values directly
        assert_eq!(eigs.len(), 1);
        for i in 0..grid.len() {
            assert_relative_eq!(
                eigs.lambdas[0].sqrt() * eigs.vector(0)[i],
                1.0,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn decay_fit_exact_power_laws() {
        let lambdas: Vec<f64> = (1..=60).map(|n| (n as f64).powi(-3)).collect();
        let m = eig_decay_fit(&lambdas, 1, (1, 60)).unwrap();
        assert_relative_eq!(m, 1.5, epsilon = 1e-12);
        // scale invariance in d = 2
        let lambdas: Vec<f64> = (1..=60).map(|n| 7.3 * (n as f64).powi(-2)).collect();
        let m = eig_decay_fit(&lambdas, 2, (5, 40)).unwrap();
        assert_relative_eq!(m, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn decay_fit_guards() {
        let lambdas = vec![1.0, 0.5, 0.25];
        assert!(matches!(
            eig_decay_fit(&lambdas, 1, (1, 3)),
            Err(Error::DegenerateFit(_))
        ));
        assert!(eig_decay_fit(&lambdas, 1, (1, 9)).is_err());
    }
}
