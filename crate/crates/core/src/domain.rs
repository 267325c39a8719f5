//! Box domains and ordered point sets.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Axis-aligned box `[lower_1, upper_1] × … × [lower_d, upper_d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidSpec(
                "domain box corners must be nonempty and of equal dimension".into(),
            ));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "domain box requires finite lower < upper per axis, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit interval [0, 1], the default workbench domain.
    pub fn unit_interval() -> Self {
        Self {
            lower: vec![0.0],
            upper: vec![1.0],
        }
    }

    /// The unit cube in `dim` dimensions.
    pub fn unit_cube(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    /// Volume of the box.
    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }
}

/// An ordered list of distinct points inside a box domain.
///
/// Points are stored flat, row-major: point `i` occupies
/// `points[i*dim .. (i+1)*dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    dim: usize,
    points: Vec<f64>,
    domain: DomainBox,
}

impl NodeSet {
    /// Builds a node set, validating containment and pairwise distinctness.
    pub fn new(dim: usize, points: Vec<f64>, domain: DomainBox) -> Result<Self> {
        if dim == 0 || domain.dim() != dim {
            return Err(Error::InvalidSpec(format!(
                "node set dimension {dim} must be positive and match the domain ({})",
                domain.dim()
            )));
        }
        if points.len() % dim != 0 {
            return Err(Error::InvalidSpec(format!(
                "flat point buffer length {} is not a multiple of dim {dim}",
                points.len()
            )));
        }
        let set = Self {
            dim,
            points,
            domain,
        };
        for i in 0..set.len() {
            if !set.domain.contains(set.point(i)) {
                return Err(Error::InvalidSpec(format!(
                    "point {i} at {:?} lies outside the domain box",
                    set.point(i)
                )));
            }
        }
        // O(n²) distinctness check; node sets here are desk-scale.
        for i in 0..set.len() {
            for j in (i + 1)..set.len() {
                if squared_distance(set.point(i), set.point(j)) == 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "points {i} and {j} coincide; nodes must be pairwise distinct"
                    )));
                }
            }
        }
        Ok(set)
    }

    /// Uniform grid of `n` points on a 1-d interval, endpoints included.
    pub fn grid_1d(domain: DomainBox, n: usize) -> Result<Self> {
        if domain.dim() != 1 {
            return Err(Error::InvalidSpec(
                "grid_1d requires a one-dimensional domain".into(),
            ));
        }
        if n < 2 {
            return Err(Error::InvalidSpec("grid_1d needs at least 2 points".into()));
        }
        let (lo, hi) = (domain.lower[0], domain.upper[0]);
        let step = (hi - lo) / (n - 1) as f64;
        let points = (0..n).map(|i| lo + step * i as f64).collect();
        Self::new(1, points, domain)
    }

    /// Tensor-product grid with `n` points per axis, endpoints included.
    pub fn grid(domain: DomainBox, n_per_axis: usize) -> Result<Self> {
        let d = domain.dim();
        if n_per_axis < 2 {
            return Err(Error::InvalidSpec("grid needs at least 2 points per axis".into()));
        }
        let total = n_per_axis.pow(d as u32);
        let mut points = Vec::with_capacity(total * d);
        for flat in 0..total {
            let mut rem = flat;
            for axis in 0..d {
                let idx = rem % n_per_axis;
                rem /= n_per_axis;
                let (lo, hi) = (domain.lower[axis], domain.upper[axis]);
                points.push(lo + (hi - lo) * idx as f64 / (n_per_axis - 1) as f64);
            }
        }
        Self::new(d, points, domain)
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn flat(&self) -> &[f64] {
        &self.points
    }

    /// Subset of the nodes, in the given index order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    size: self.len(),
                });
            }
            points.extend_from_slice(self.point(i));
        }
        Self::new(self.dim, points, self.domain.clone())
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance between two points.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}
