//! Numerical verification of the resolution of unity
//! (1/pi^3) integral dz dzbar [d zeta_L / (1+|zeta_L|^2)^2]
//! [d zeta_M / (1+|zeta_M|^2)^2] f(|z|^2) |Z><Z| = 1.
//!
//! Matrix elements between basis labels factor exactly into three plane
//! integrals. The z-plane angular integration runs over the double cover
//! [0, 4 pi) so half-integer towers dephase correctly; the zeta radial
//! integrals map to [0, 1] by u = rho^2/(1 + rho^2) where they become beta
//! functions. Two paths are kept: the factorized one replaces the angular
//! integrals by Kronecker deltas and reduces each diagonal element to the
//! Mellin moment times two beta-function ratios, while the brute one
//! evaluates all trapezoid phase sums numerically as a guard against
//! factorization mistakes.

use num_complex::Complex64;

use crate::error::McsError;
use crate::families::{binomial, Measure, MeasureSupport, SequenceFamily};
use crate::hilbert::{enumerate_basis, BasisLabel, SpaceSpec};
use crate::quad::{gauss_legendre, phase_nodes};

/// Node counts for the brute quadrature path.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureSpec {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_nodes: 200,
            angular_nodes: 16,
        }
    }
}

/// Average of exp(i freq theta) over uniform trapezoid nodes covering the
/// double cover [0, 4 pi); freq is doubled (frequency in theta/2).
fn phase_average(doubled_freq: i32, nodes: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for theta in phase_nodes(nodes, 4.0 * std::f64::consts::PI) {
        acc += Complex64::from_polar(1.0, 0.5 * doubled_freq as f64 * theta);
    }
    acc / nodes as f64
}

/// (1/2) integral_0^inf f(x) x^p dx by fixed-order Gauss-Legendre, with the
/// infinite support compactified by x = t/(1-t).
fn radial_z_integral(measure: &Measure, p: f64, nodes: usize) -> f64 {
    let (gl_nodes, gl_weights) = gauss_legendre(nodes);
    let mut acc = 0.0;
    match measure.support {
        MeasureSupport::Compact { x_upper } => {
            for (&t, &w) in gl_nodes.iter().zip(&gl_weights) {
                let x = 0.5 * x_upper * (t + 1.0);
                acc += w * measure.density(x) * x.powf(p);
            }
            acc *= 0.5 * x_upper;
        }
        MeasureSupport::SemiInfinite => {
            for (&t, &w) in gl_nodes.iter().zip(&gl_weights) {
                let s = 0.5 * (t + 1.0);
                let x = s / (1.0 - s);
                acc += 0.5 * w * measure.density(x) * x.powf(p) / ((1.0 - s) * (1.0 - s));
            }
        }
    }
    0.5 * acc
}

/// integral_0^1 u^s (1-u)^{jj - s} du by Gauss-Legendre: the mapped radial
/// zeta integral, a beta function B(s+1, jj-s+1) for integer arguments.
fn radial_zeta_integral(s: f64, jj: f64, nodes: usize) -> f64 {
    let (gl_nodes, gl_weights) = gauss_legendre(nodes);
    let mut acc = 0.0;
    for (&t, &w) in gl_nodes.iter().zip(&gl_weights) {
        let u = 0.5 * (t + 1.0);
        acc += w * u.powf(s) * (1.0 - u).powf(jj - s);
    }
    0.5 * acc
}

/// Closed beta function B(p, q) = (p-1)!(q-1)!/(p+q-1)! for positive
/// integer arguments, as 1/(p C(p+q-1, p)).
fn beta_closed(p: u32, q: u32) -> f64 {
    1.0 / (p as f64 * binomial(p + q - 1, p))
}

/// sigma^j_m = sqrt((2j)!/((j-m)!(j+m)!)).
fn sigma(two_j: u32, two_m: i32) -> f64 {
    binomial(two_j, ((two_j as i32 + two_m) / 2) as u32).sqrt()
}

/// One matrix element <bra| [resolution integral] |ket> by the brute path:
/// trapezoid phase sums times radial quadratures in each of the three
/// complex planes.
pub fn unity_matrix_element(
    family: &SequenceFamily,
    measure: &Measure,
    bra: &BasisLabel,
    ket: &BasisLabel,
    quad: &QuadratureSpec,
) -> Result<Complex64, McsError> {
    if !bra.is_valid() || !ket.is_valid() {
        return Err(McsError::InvalidLabel {
            two_j: bra.two_j,
            two_k: bra.two_k,
            two_m: bra.two_m,
        });
    }
    let (tj_b, tj_k) = (bra.two_j, ket.two_j);

    // z-plane: c_j conj(c_j') z^j conj(z)^{j'} f(|z|^2).
    let z_phase = phase_average(tj_b as i32 - tj_k as i32, quad.angular_nodes);
    let z_radial = radial_z_integral(
        measure,
        (tj_b + tj_k) as f64 / 4.0,
        quad.radial_nodes,
    );
    let z_plane = 2.0 * z_phase * z_radial * family.coeff(tj_b) * family.coeff(tj_k).conj();

    // zeta_L plane: exponents a = j + m on the ket-conjugate side too.
    let a_bra = (tj_b as i32 + bra.two_m) as f64 / 2.0;
    let a_ket = (tj_k as i32 + ket.two_m) as f64 / 2.0;
    let l_phase = phase_average(
        (tj_b as i32 + bra.two_m) - (tj_k as i32 + ket.two_m),
        quad.angular_nodes,
    );
    let l_radial = radial_zeta_integral(
        0.5 * (a_bra + a_ket),
        (tj_b + tj_k) as f64 / 2.0,
        quad.radial_nodes,
    );
    let l_plane = 2.0
        * l_phase
        * (0.5 * l_radial)
        * sigma(tj_b, bra.two_m)
        * sigma(tj_k, ket.two_m);

    let c_bra = (tj_b as i32 + bra.two_k) as f64 / 2.0;
    let c_ket = (tj_k as i32 + ket.two_k) as f64 / 2.0;
    let m_phase = phase_average(
        (tj_b as i32 + bra.two_k) - (tj_k as i32 + ket.two_k),
        quad.angular_nodes,
    );
    let m_radial = radial_zeta_integral(
        0.5 * (c_bra + c_ket),
        (tj_b + tj_k) as f64 / 2.0,
        quad.radial_nodes,
    );
    let m_plane = 2.0
        * m_phase
        * (0.5 * m_radial)
        * sigma(tj_b, bra.two_k)
        * sigma(tj_k, ket.two_k);

    Ok(z_plane * l_plane * m_plane)
}

/// Factorized diagonal element: angular integrals as exact deltas leave the
/// Mellin moment times two beta-function factors.
pub fn unity_diagonal_factorized(
    family: &SequenceFamily,
    measure: &Measure,
    label: &BasisLabel,
    quad_tol: f64,
) -> Result<f64, McsError> {
    let two_j = label.two_j;
    let moment = measure.moment_integral(two_j, quad_tol)?;
    let a = ((two_j as i32 + label.two_m) / 2) as u32;
    let c = ((two_j as i32 + label.two_k) / 2) as u32;
    let beta_l = radial_zeta_integral(a as f64, two_j as f64, 200);
    let beta_m = radial_zeta_integral(c as f64, two_j as f64, 200);
    let s_l = sigma(two_j, label.two_m);
    let s_m = sigma(two_j, label.two_k);
    Ok(family.coeff_abs_sqr(two_j) * moment * (s_l * s_l * beta_l) * (s_m * s_m * beta_m))
}

/// Per-label defect report of the factorized path.
#[derive(Clone, Debug)]
pub struct UnityReport {
    pub diagonal: Vec<(BasisLabel, f64)>,
    pub max_diag_defect: f64,
    /// Max relative disagreement between the numeric zeta radial integrals
    /// and the closed beta-function values (quadrature self-consistency).
    pub beta_consistency: f64,
}

/// Check every diagonal element with 2j <= two_j_max via the factorized
/// path. The angular factorization makes each element the product of the
/// Mellin moment and two beta integrals, so the check reduces to the moment
/// condition.
pub fn unity_suite(
    family: &SequenceFamily,
    measure: &Measure,
    two_j_max: u32,
    quad_tol: f64,
) -> Result<UnityReport, McsError> {
    let space = SpaceSpec::new(two_j_max, family.tower());
    let mut diagonal = Vec::new();
    let mut max_diag_defect: f64 = 0.0;
    let mut beta_consistency: f64 = 0.0;
    for label in enumerate_basis(&space) {
        let value = unity_diagonal_factorized(family, measure, &label, quad_tol)?;
        max_diag_defect = max_diag_defect.max((value - 1.0).abs());

        let a = ((label.two_j as i32 + label.two_m) / 2) as u32;
        let numeric = radial_zeta_integral(a as f64, label.two_j as f64, 200);
        let closed = beta_closed(a + 1, label.two_j - a + 1);
        beta_consistency = beta_consistency.max((numeric - closed).abs() / closed);

        diagonal.push((label, value));
    }
    Ok(UnityReport {
        diagonal,
        max_diag_defect,
        beta_consistency,
    })
}
