//! Compactly supported covariance functions: generalized Wendland and Askey.

use crate::quad::adaptive_gk;
use crate::special::beta;
use crate::{Error, Result};

/// Askey correlation (1 − r/β)^μ on [0, β), zero outside.
pub fn askey(mu: f64, beta_scale: f64, r: f64) -> f64 {
    let s = r / beta_scale;
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - s).powf(mu)
    }
}

/// Generalized Wendland correlation
/// `W(r) = B(2κ, μ+1)⁻¹ ∫_{r/β}^1 u (u² − (r/β)²)^{κ−1} (1−u)^μ du`
/// for r/β < 1, zero outside; κ = 0 is the Askey family.
///
/// The integral is evaluated adaptively after the substitution
/// `u² − s² = τ^{1/κ}`, which removes the algebraic endpoint singularity at
/// `u = s` for non-integer κ and leaves a smooth integrand:
/// `W(r) = B(2κ, μ+1)⁻¹ (2κ)⁻¹ ∫_0^{(1−s²)^κ} (1 − √(τ^{1/κ} + s²))^μ dτ`.
pub fn generalized_wendland(mu: f64, kappa: f64, beta_scale: f64, r: f64) -> Result<f64> {
    if kappa < 0.0 || beta_scale <= 0.0 || mu <= 0.0 {
        return Err(Error::Domain(format!(
            "generalized Wendland requires mu > 0, kappa >= 0, beta > 0; got mu={mu}, kappa={kappa}, beta={beta_scale}"
        )));
    }
    if r < 0.0 {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    if kappa == 0.0 {
        return Ok(askey(mu, beta_scale, r));
    }
    let s = r / beta_scale;
    if s >= 1.0 {
        return Ok(0.0);
    }
    let norm = beta(2.0 * kappa, mu + 1.0);
    let upper = (1.0 - s * s).powf(kappa);
    let integrand = |tau: f64| {
        let u = (tau.powf(1.0 / kappa) + s * s).sqrt();
        // clamp: u can exceed 1 by rounding at the upper limit
        (1.0 - u).max(0.0).powf(mu)
    };
    // tolerance on the raw integral; dividing by 2κ·B keeps the final
    // absolute error two orders below the 1e-10 contract, floored so we do
    // not request estimates below the rounding noise of the panel sums
    let scale = 2.0 * kappa * norm;
    let tol = (1e-12 * scale.min(1.0)).max(1e-15);
    match adaptive_gk(&integrand, 0.0, upper, tol) {
        Ok((value, _)) => Ok(value / scale),
        Err(Error::QuadratureNonConvergence { achieved, requested }) => {
            Err(Error::QuadratureNonConvergence {
                achieved: achieved / scale,
                requested: requested / scale,
            })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::composite_midpoint;
    use approx::assert_relative_eq;

    #[test]
    fn normalizes_to_one_at_origin() {
        for &(mu, kappa) in &[(4.0, 1.0), (3.0, 0.5), (5.5, 1.5), (2.5, 0.25)] {
            let v = generalized_wendland(mu, kappa, 1.0, 0.0).unwrap();
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn compact_support() {
        assert_eq!(generalized_wendland(4.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(generalized_wendland(4.0, 1.0, 1.0, 7.3).unwrap(), 0.0);
        assert_eq!(generalized_wendland(4.0, 1.0, 2.0, 2.0).unwrap(), 0.0);
        assert_eq!(askey(2.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn kappa_zero_dispatches_to_askey() {
        let v = generalized_wendland(2.0, 0.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(v, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn kappa_one_closed_form() {
        // for κ = 1 the integral reduces to (1−s)^{μ+1} (1 + (μ+1)s)
        for &(mu, s) in &[(4.0_f64, 0.5_f64), (3.0, 0.1), (6.0, 0.9)] {
            let closed = (1.0 - s).powf(mu + 1.0) * (1.0 + (mu + 1.0) * s);
            let v = generalized_wendland(mu, 1.0, 1.0, s).unwrap();
            assert_relative_eq!(v, closed, epsilon = 1e-11);
        }
        // frozen spot value for (μ, κ, β, r) = (4, 1, 1, 0.5): (1/2)^5 (1 + 5/2)
        let v = generalized_wendland(4.0, 1.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(v, 0.109_375, epsilon = 1e-11);
    }

    /// Independent oracle: high-resolution composite midpoint quadrature of
    /// the untransformed integrand of the defining integral.
    fn reference_quadrature(mu: f64, kappa: f64, s: f64, panels: usize) -> f64 {
        let raw = composite_midpoint(
            &|u: f64| u * (u * u - s * s).powf(kappa - 1.0) * (1.0 - u).powf(mu),
            s,
            1.0,
            panels,
        );
        raw / crate::special::beta(2.0 * kappa, mu + 1.0)
    }

    #[test]
    fn matches_reference_quadrature_for_smooth_exponent() {
        // κ = 1: untransformed integrand is polynomial, midpoint is reliable
        let oracle = reference_quadrature(4.0, 1.0, 0.5, 1_000_000);
        let v = generalized_wendland(4.0, 1.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(v, oracle, epsilon = 1e-10);
        // κ = 2 likewise
        let oracle = reference_quadrature(5.0, 2.0, 0.3, 1_000_000);
        let v = generalized_wendland(5.0, 2.0, 1.0, 0.3).unwrap();
        assert_relative_eq!(v, oracle, epsilon = 1e-10);
    }

    #[test]
    fn matches_thirty_digit_references() {
        // frozen from a 30-digit computation of the defining integral
        let v = generalized_wendland(4.0, 0.5, 1.0, 0.3).unwrap();
        assert_relative_eq!(v, 0.361_925_795_923_435_59, epsilon = 1e-11);
        let v = generalized_wendland(5.5, 1.5, 2.0, 1.0).unwrap();
        assert_relative_eq!(v, 0.051_022_069_429_065_823, epsilon = 1e-11);
        let v = generalized_wendland(3.0, 0.5, 1.0, 0.85).unwrap();
        assert_relative_eq!(v, 0.003_161_799_399_579_818, epsilon = 1e-11);
    }

    #[test]
    fn monotone_decay_on_grid() {
        let mut prev = f64::INFINITY;
        for i in 0..=50 {
            let r = i as f64 / 50.0;
            let v = generalized_wendland(4.5, 0.75, 1.0, r).unwrap();
            assert!(v <= prev + 1e-12, "not nonincreasing at r={r}");
            prev = v;
        }
    }
}
