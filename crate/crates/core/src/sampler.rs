//! Expansion-path sampling: `p(x) = Σ_{n≤N} s_n w_n(x)` with pluggable
//! standardized innovation distributions.
//!
//! Randomness comes from a counter-based stream cipher (ChaCha12) keyed by
//! `(seed, stream)`, so distinct streams are independent, draws are
//! bit-reproducible across platforms, and ensembles parallelize across paths
//! without shared state. Gaussian variates use the inverse CDF rather than
//! rejection sampling, which keeps the draw count per path fixed and the
//! streams aligned.

use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::NodeSet;
use crate::expansion::ExpansionBasis;
use crate::special::standard_normal_quantile;
use crate::{Error, Result};

/// Zero-mean, unit-variance innovation distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationDist {
    /// Standard normal N(0, 1).
    Gaussian,
    /// ±1 with probability 1/2 each.
    Rademacher,
    /// Uniform on [−√3, √3].
    UniformScaled,
}

impl InnovationDist {
    /// Variance of s², used by the norm-growth diagnostics:
    /// Gaussian 2, Rademacher 0, uniform-scaled 4/5.
    pub fn variance_of_square(self) -> f64 {
        match self {
            InnovationDist::Gaussian => 2.0,
            InnovationDist::Rademacher => 0.0,
            InnovationDist::UniformScaled => 0.8,
        }
    }
}

/// Reproducible innovation source: distribution plus (seed, stream) key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnovationSpec {
    pub dist: InnovationDist,
    pub seed: u64,
    /// Sub-stream index; ensembles use consecutive streams starting here.
    #[serde(default)]
    pub stream: u64,
}

impl InnovationSpec {
    pub fn gaussian(seed: u64) -> Self {
        Self {
            dist: InnovationDist::Gaussian,
            seed,
            stream: 0,
        }
    }

    /// The same source shifted to a different sub-stream.
    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform in the open interval (0, 1) from 53 random mantissa bits.
fn uniform_open(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

fn draw_one(dist: InnovationDist, rng: &mut ChaCha12Rng) -> f64 {
    match dist {
        InnovationDist::Gaussian => standard_normal_quantile(uniform_open(rng)),
        InnovationDist::Rademacher => {
            if rng.next_u64() >> 63 == 0 {
                1.0
            } else {
                -1.0
            }
        }
        InnovationDist::UniformScaled => {
            (2.0 * uniform_open(rng) - 1.0) * 3.0_f64.sqrt()
        }
    }
}

/// Draws `n` independent standardized innovations, fully determined by the
/// (seed, stream) key of the spec.
pub fn draw_innovations(spec: &InnovationSpec, n: usize) -> Vec<f64> {
    let mut rng = stream_rng(spec.seed, spec.stream);
    (0..n).map(|_| draw_one(spec.dist, &mut rng)).collect()
}

/// A sampled expansion path: an innovation sequence tied to a basis and a
/// truncation level. Evaluation is deterministic given the fields, and the
/// truncation-variance certificate at any point is the basis residual there.
#[derive(Debug, Clone)]
pub struct PathSample {
    basis: Arc<ExpansionBasis>,
    n_trunc: usize,
    innovations: Vec<f64>,
    innovation_spec: InnovationSpec,
}

impl PathSample {
    pub fn basis(&self) -> &Arc<ExpansionBasis> {
        &self.basis
    }

    pub fn truncation(&self) -> usize {
        self.n_trunc
    }

    pub fn innovations(&self) -> &[f64] {
        &self.innovations
    }

    pub fn innovation_spec(&self) -> &InnovationSpec {
        &self.innovation_spec
    }

    /// Builds a path from externally supplied innovations (test hook; also
    /// used by the zero-innovation CLI flag).
    pub fn with_innovations(
        basis: Arc<ExpansionBasis>,
        n_trunc: usize,
        innovations: Vec<f64>,
        innovation_spec: InnovationSpec,
    ) -> Result<Self> {
        if n_trunc > basis.size() {
            return Err(Error::IndexOutOfRange {
                index: n_trunc,
                size: basis.size(),
            });
        }
        if innovations.len() < n_trunc {
            return Err(Error::InvalidSpec(format!(
                "need at least {n_trunc} innovations, got {}",
                innovations.len()
            )));
        }
        Ok(Self {
            basis,
            n_trunc,
            innovations,
            innovation_spec,
        })
    }

    /// Path value `p(x) = Σ_{n≤N} s_n w_n(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let ws = self.basis.eval_all(x)?;
        Ok(self
            .innovations
            .iter()
            .zip(&ws)
            .take(self.n_trunc)
            .map(|(s, w)| s * w)
            .sum())
    }

    /// Batch evaluation; identical to per-point evaluation.
    pub fn eval_many(&self, xs: &NodeSet) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.eval(x)).collect()
    }

    /// The truncation-variance certificate at x (residual variance of the
    /// basis at the path's truncation level).
    pub fn truncation_variance(&self, x: &[f64]) -> Result<f64> {
        self.basis.residual_variance(self.n_trunc, x)
    }
}

/// Samples one expansion path with `n_trunc` terms.
pub fn sample_path(
    basis: &Arc<ExpansionBasis>,
    n_trunc: usize,
    spec: &InnovationSpec,
) -> Result<PathSample> {
    if n_trunc > basis.size() {
        return Err(Error::IndexOutOfRange {
            index: n_trunc,
            size: basis.size(),
        });
    }
    let innovations = draw_innovations(spec, n_trunc);
    PathSample::with_innovations(Arc::clone(basis), n_trunc, innovations, *spec)
}

/// A matrix of path values on a grid: row `i` holds path `i` evaluated at
/// every grid point.
#[derive(Debug, Clone)]
pub struct Ensemble {
    values: Vec<f64>,
    n_paths: usize,
    n_points: usize,
}

impl Ensemble {
    /// Wraps an existing row-major value matrix as an ensemble.
    pub fn from_values(values: Vec<f64>, n_paths: usize, n_points: usize) -> Result<Self> {
        if values.len() != n_paths * n_points {
            return Err(Error::InvalidSpec(format!(
                "ensemble values have length {}, expected {n_paths} × {n_points}",
                values.len()
            )));
        }
        Ok(Self {
            values,
            n_paths,
            n_points,
        })
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn row(&self, path: usize) -> &[f64] {
        &self.values[path * self.n_points..(path + 1) * self.n_points]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column view: all path values at grid point `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_paths)
            .map(|i| self.values[i * self.n_points + j])
            .collect()
    }

    /// Sample mean at grid point `j`.
    pub fn mean(&self, j: usize) -> f64 {
        self.column(j).iter().sum::<f64>() / self.n_paths as f64
    }

    /// Unbiased sample covariance between grid points `j` and `k`.
    pub fn covariance(&self, j: usize, k: usize) -> f64 {
        let (mj, mk) = (self.mean(j), self.mean(k));
        let mut acc = 0.0;
        for i in 0..self.n_paths {
            acc += (self.values[i * self.n_points + j] - mj)
                * (self.values[i * self.n_points + k] - mk);
        }
        acc / (self.n_paths - 1) as f64
    }
}

/// Generates `m` paths on the evaluation grid. Path `i` uses stream
/// `spec.stream + i`, so the ensemble is embarrassingly parallel and its
/// values do not depend on scheduling.
pub fn path_ensemble(
    basis: &Arc<ExpansionBasis>,
    n_trunc: usize,
    spec: &InnovationSpec,
    m: usize,
    grid: &NodeSet,
) -> Result<Ensemble> {
    if m == 0 {
        return Err(Error::InvalidSpec("ensemble needs at least one path".into()));
    }
    if n_trunc > basis.size() {
        return Err(Error::IndexOutOfRange {
            index: n_trunc,
            size: basis.size(),
        });
    }
    // basis values on the grid, column-major per point: w[j][t]
    let mut basis_columns = Vec::with_capacity(grid.len());
    for x in grid.iter() {
        let mut ws = basis.eval_all(x)?;
        ws.truncate(n_trunc);
        basis_columns.push(ws);
    }
    let g = grid.len();
    let values: Vec<f64> = (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            let path_spec = spec.with_stream(spec.stream.wrapping_add(i as u64));
            let s = draw_innovations(&path_spec, n_trunc);
            let cols = &basis_columns;
            (0..g).map(move |j| {
                cols[j]
                    .iter()
                    .zip(&s)
                    .map(|(w, sn)| w * sn)
                    .sum::<f64>()
            })
        })
        .collect();
    Ok(Ensemble {
        values,
        n_paths: m,
        n_points: g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainBox;
    use crate::expansion::newton_basis;
    use crate::kernels::KernelSpec;
    use approx::assert_relative_eq;

    fn test_basis() -> Arc<ExpansionBasis> {
        let spec = KernelSpec::matern(1.5, 1.0, 1).unwrap();
        let nodes = NodeSet::grid_1d(DomainBox::unit_interval(), 10).unwrap();
        Arc::new(newton_basis(&spec, &nodes).unwrap())
    }

    #[test]
    fn draws_are_reproducible_and_streams_differ() {
        let spec = InnovationSpec::gaussian(42);
        let a = draw_innovations(&spec, 100);
        let b = draw_innovations(&spec, 100);
        assert_eq!(a, b);
        let c = draw_innovations(&spec.with_stream(1), 100);
        assert_ne!(a, c);
        // longer draws extend, not reshuffle
        let d = draw_innovations(&spec, 150);
        assert_eq!(&a[..], &d[..100]);
    }

    #[test]
    fn rademacher_support() {
        let spec = InnovationSpec {
            dist: InnovationDist::Rademacher,
            seed: 7,
            stream: 0,
        };
        let s = draw_innovations(&spec, 1000);
        assert!(s.iter().all(|v| *v == 1.0 || *v == -1.0));
        // both signs occur
        assert!(s.iter().any(|v| *v > 0.0) && s.iter().any(|v| *v < 0.0));
    }

    #[test]
    fn uniform_scaled_moments() {
        let spec = InnovationSpec {
            dist: InnovationDist::UniformScaled,
            seed: 11,
            stream: 3,
        };
        let n = 1_000_000;
        let s = draw_innovations(&spec, n);
        let root3 = 3.0_f64.sqrt();
        assert!(s.iter().all(|v| v.abs() <= root3));
        let mean = s.iter().sum::<f64>() / n as f64;
        let var = s.iter().map(|v| v * v).sum::<f64>() / n as f64;
        // 5·√(Var/N) bounds: Var(s)=1, Var(s²)=4/5
        assert!(mean.abs() < 5.0 * (1.0 / n as f64).sqrt());
        assert!((var - 1.0).abs() < 5.0 * (0.8 / n as f64).sqrt());
    }

    #[test]
    fn gaussian_moments() {
        let spec = InnovationSpec::gaussian(3);
        let n = 1_000_000;
        let s = draw_innovations(&spec, n);
        let mean = s.iter().sum::<f64>() / n as f64;
        let var = s.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!(mean.abs() < 5.0 * (1.0 / n as f64).sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn zero_innovations_give_zero_function() {
        let basis = test_basis();
        let path = PathSample::with_innovations(
            Arc::clone(&basis),
            basis.size(),
            vec![0.0; basis.size()],
            InnovationSpec::gaussian(0),
        )
        .unwrap();
        for &x in &[0.0, 0.33, 0.5, 0.99] {
            assert_eq!(path.eval(&[x]).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_term_path_is_scaled_first_basis_function() {
        let basis = test_basis();
        let spec = InnovationSpec::gaussian(5);
        let path = sample_path(&basis, 1, &spec).unwrap();
        let s1 = path.innovations()[0];
        for &x in &[0.1, 0.6] {
            let want = s1 * basis.eval_one(1, &[x]).unwrap();
            assert_relative_eq!(path.eval(&[x]).unwrap(), want, epsilon = 1e-14);
        }
    }

    #[test]
    fn truncation_exceeding_basis_size_errors() {
        let basis = test_basis();
        assert!(matches!(
            sample_path(&basis, basis.size() + 1, &InnovationSpec::gaussian(0)),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn batch_evaluation_equals_pointwise() {
        let basis = test_basis();
        let path = sample_path(&basis, 6, &InnovationSpec::gaussian(9)).unwrap();
        let xs = NodeSet::grid_1d(DomainBox::unit_interval(), 17).unwrap();
        let batch = path.eval_many(&xs).unwrap();
        for (j, x) in xs.iter().enumerate() {
            assert_eq!(batch[j], path.eval(x).unwrap());
        }
        // empty evaluation set gives an empty list
        let empty = NodeSet::new(1, vec![], DomainBox::unit_interval()).unwrap();
        assert!(path.eval_many(&empty).unwrap().is_empty());
    }

    #[test]
    fn refinement_decreases_certificate_by_next_term() {
        let basis = test_basis();
        for &x in &[0.21, 0.47, 0.83] {
            for n in 0..basis.size() {
                let before = basis.residual_variance(n, &[x]).unwrap();
                let after = basis.residual_variance(n + 1, &[x]).unwrap();
                let w = basis.eval_one(n + 1, &[x]).unwrap();
                // clamping can absorb up to 1e-10 near zero
                assert!(
                    (before - after - w * w).abs() < 1e-10,
                    "certificate drop mismatch at x={x}, n={n}"
                );
            }
        }
    }

    #[test]
    fn ensemble_single_path_reduces_to_eval() {
        let basis = test_basis();
        let spec = InnovationSpec::gaussian(123);
        let grid = NodeSet::grid_1d(DomainBox::unit_interval(), 9).unwrap();
        let ens = path_ensemble(&basis, 7, &spec, 1, &grid).unwrap();
        let path = sample_path(&basis, 7, &spec).unwrap();
        let direct = path.eval_many(&grid).unwrap();
        for j in 0..grid.len() {
            assert_relative_eq!(ens.row(0)[j], direct[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn ensemble_mean_is_clt_consistent() {
        let basis = test_basis();
        let spec = InnovationSpec::gaussian(77);
        let grid = NodeSet::grid_1d(DomainBox::unit_interval(), 5).unwrap();
        let m = 20_000;
        let ens = path_ensemble(&basis, basis.size(), &spec, m, &grid).unwrap();
        for j in 0..grid.len() {
            let c = basis
                .spec()
                .eval_pair(grid.point(j), grid.point(j))
                .unwrap();
            let bound = 5.0 * (c / m as f64).sqrt();
            assert!(
                ens.mean(j).abs() < bound,
                "mean at point {j} exceeds CLT bound"
            );
        }
    }

    #[test]
    fn ensemble_values_are_finite_and_variance_bounded() {
        let basis = test_basis();
        let spec = InnovationSpec {
            dist: InnovationDist::UniformScaled,
            seed: 8,
            stream: 100,
        };
        let grid = NodeSet::grid_1d(DomainBox::unit_interval(), 7).unwrap();
        let m = 10_000;
        let ens = path_ensemble(&basis, basis.size(), &spec, m, &grid).unwrap();
        assert!(ens.values().iter().all(|v| v.is_finite()));
        for j in 0..grid.len() {
            let c = basis
                .spec()
                .eval_pair(grid.point(j), grid.point(j))
                .unwrap();
            let var = ens.covariance(j, j);
            // Var p_N(x) ≤ C(x,x); allow 5 standard errors of slack
            assert!(var <= c + 5.0 * c * (2.0 / m as f64).sqrt());
        }
    }
}
