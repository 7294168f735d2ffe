//! Quadrature primitives: Gauss-Legendre nodes and adaptive panel
//! integration on finite and semi-infinite intervals.

use std::f64::consts::PI;

use crate::error::McsError;

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the Legendre polynomial from the Chebyshev initial
/// guess; accurate to machine precision for the orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed-order Gauss-Legendre on [a, b].
pub fn integrate_gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    nodes
        .iter()
        .zip(weights.iter())
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Adaptive bisection with embedded GL-20 / GL-40 error estimate.
///
/// The requested absolute tolerance is floored at the rounding noise of the
/// whole-interval estimate, so boundary layers cannot drive the recursion
/// into demanding sub-epsilon accuracy.
pub fn integrate_adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, McsError> {
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        floor: f64,
        depth: u32,
    ) -> Result<f64, McsError> {
        let coarse = integrate_gl(f, a, b, 20);
        let fine = integrate_gl(f, a, b, 40);
        let err = (fine - coarse).abs();
        let target = tol.max(floor).max(1e-14 * fine.abs());
        if err <= target || (b - a) < 1e-14 * (1.0 + a.abs() + b.abs()) {
            return Ok(fine);
        }
        if depth >= 32 {
            return Err(McsError::QuadratureFailure {
                tol,
                estimate: fine,
                error: err,
            });
        }
        let mid = 0.5 * (a + b);
        Ok(recurse(f, a, mid, 0.6 * tol, floor, depth + 1)?
            + recurse(f, mid, b, 0.6 * tol, floor, depth + 1)?)
    }
    let rough = integrate_gl(f, a, b, 40).abs();
    let floor = 1e-16 * rough + 1e-300;
    recurse(f, a, b, tol, floor, 0)
}

/// Adaptive integral over [0, inf) by geometrically growing panels.
///
/// Stops once a panel contributes less than `tol` times the accumulated
/// magnitude; errors out if 60 doublings never reach that point.
pub fn integrate_semi_infinite(
    f: &dyn Fn(f64) -> f64,
    tol: f64,
) -> Result<f64, McsError> {
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b = 1.0;
    let mut scale = 0.0f64;
    for _ in 0..60 {
        let panel = integrate_adaptive(f, a, b, tol * 0.5f64.max(scale) * 1e-3)?;
        total += panel;
        scale = scale.max(total.abs());
        if panel.abs() < tol * scale.max(1e-300) && b > 8.0 {
            return Ok(total);
        }
        a = b;
        b *= 2.0;
    }
    Err(McsError::DivergentIntegral(
        "semi-infinite integral did not settle after 60 panel doublings".into(),
    ))
}

/// Nodes for the uniform trapezoid rule on [0, period), exact for
/// trigonometric polynomials with frequencies below the node count.
pub fn phase_nodes(count: usize, period: f64) -> impl Iterator<Item = f64> {
    let step = period / count as f64;
    (0..count).map(move |i| i as f64 * step)
}
