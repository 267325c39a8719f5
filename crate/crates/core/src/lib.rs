//! Construction of random-field paths directly from a covariance kernel.
//!
//! The usual route to sample paths starts from a random field and derives the
//! covariance afterwards. This crate goes the other way: a positive-definite
//! kernel `C` determines a reproducing-kernel Hilbert space, an orthonormal
//! system `{w_n}` of that space determines the kernel through
//! `C(x,y) = Σ_n w_n(x) w_n(y)`, and coupling the system with i.i.d.
//! standardized innovations `s_n` yields explicit path functions
//! `p(x) = Σ_n s_n w_n(x)` whose pointwise values realize a field with
//! covariance `C`. Truncating the series is quantitative: the discarded
//! variance at `x` is the residual `C(x,x) − Σ_{n≤N} w_n(x)²`.
//!
//! The crate ships two ways of building the orthonormal system:
//!
//! * [`expansion`]: point-based Newton bases via stepwise Cholesky of kernel
//!   matrices, with P-greedy node selection;
//! * [`mercer`]: Karhunen–Loève bases from a Nyström discretization of the
//!   kernel integral operator.
//!
//! [`sampler`] turns a basis into reproducible path ensembles, and
//! [`diagnostics`] verifies the covariance identity, the pointwise Parseval
//! bound, the linear divergence of squared path norms, and the Sobolev
//! smoothness gap at desk scale.

pub mod diagnostics;
pub mod domain;
pub mod error;
pub mod expansion;
pub mod io;
pub mod kernels;
pub mod mercer;
pub mod quad;
pub mod sampler;
pub(crate) mod special;

pub use domain::{DomainBox, NodeSet};
pub use error::Error;
pub use expansion::{BasisKind, ExpansionBasis, GreedySelection, GreedyStop};
pub use kernels::{BrownianMin, KernelFamily, KernelSpec, PointKernel};
pub use mercer::{EigenSystem, QuadratureGrid, QuadratureRule};
pub use sampler::{Ensemble, InnovationDist, InnovationSpec, PathSample};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
