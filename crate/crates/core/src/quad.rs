//! One-dimensional quadrature: adaptive Gauss–Kronrod and composite rules.

use crate::{Error, Result};

/// Abscissae of the 15-point Kronrod rule on [−1, 1] (nonnegative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
/// Embedded 7-point Gauss weights (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One Gauss–Kronrod 7/15 panel; returns (kronrod, |kronrod − gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (fl, fr) = if x == 0.0 {
            let v = f(mid);
            (v, 0.0)
        } else {
            (f(mid - half * x), f(mid + half * x))
        };
        let pair = fl + fr;
        kronrod += wk * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half.abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b] with absolute
/// tolerance `tol` on the global error estimate.
///
/// Globally adaptive in the QUADPACK sense: the panel with the largest
/// error estimate is bisected until the total estimate meets `tol`, which
/// concentrates work at (integrable) endpoint singularities instead of
/// refining everywhere. Fails with [`Error::QuadratureNonConvergence`] when
/// the panel budget runs out or panels shrink to machine width.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    const MAX_PANELS: usize = 4096;

    struct Panel {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }
    impl PartialEq for Panel {
        fn eq(&self, other: &Self) -> bool {
            self.err == other.err
        }
    }
    impl Eq for Panel {}
    impl PartialOrd for Panel {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Panel {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.err.total_cmp(&other.err)
        }
    }

    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut heap = std::collections::BinaryHeap::with_capacity(MAX_PANELS);
    let (value, err) = gk15(f, a, b);
    let mut total_value = value;
    let mut total_err = err;
    heap.push(Panel { a, b, value, err });

    while total_err > tol {
        if heap.len() >= MAX_PANELS {
            return Err(Error::QuadratureNonConvergence {
                achieved: total_err,
                requested: tol,
            });
        }
        let worst = heap.pop().expect("heap cannot be empty while err > 0");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at machine resolution; no further refinement possible
            heap.push(worst);
            return Err(Error::QuadratureNonConvergence {
                achieved: total_err,
                requested: tol,
            });
        }
        let (lv, le) = gk15(f, worst.a, mid);
        let (rv, re) = gk15(f, mid, worst.b);
        total_value += lv + rv - worst.value;
        total_err += le + re - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            err: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            err: re,
        });
    }
    Ok((total_value, total_err))
}

/// Composite midpoint rule with `n` equal panels.
pub fn composite_midpoint<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exactness() {
        let (v, _) = adaptive_gk(&|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-13);
        let (v, _) = adaptive_gk(&|x| x.powi(7) - 2.0 * x + 1.0, -1.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(v, 255.0 / 8.0 - 3.0 + 3.0, max_relative = 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let (v, _) = adaptive_gk(&|x: f64| (10.0 * x).sin(), 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(v, (1.0 - 10.0_f64.cos()) / 10.0, max_relative = 1e-11);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // ∫₀¹ x^{−1/2} dx = 2; nodes never touch the endpoint
        let (v, _) = adaptive_gk(&|x: f64| x.sqrt().recip(), 0.0, 1.0, 1e-9).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn midpoint_converges_quadratically() {
        let exact = 1.0 - (-1.0_f64).exp();
        let coarse = (composite_midpoint(&|x: f64| (-x).exp(), 0.0, 1.0, 100) - exact).abs();
        let fine = (composite_midpoint(&|x: f64| (-x).exp(), 0.0, 1.0, 200) - exact).abs();
        assert!(fine < coarse / 3.5);
    }

    #[test]
    fn empty_interval_is_zero() {
        let (v, e) = adaptive_gk(&|x| x, 2.0, 2.0, 1e-12).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(e, 0.0);
    }
}
