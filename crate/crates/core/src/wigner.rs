//! Wigner rotation matrices d^j(beta) and R^j(alpha, beta, gamma), and the
//! canonical wavefunctions on the Euler angles.
//!
//! The d-matrix is evaluated in half-angle monomial form,
//! sin(beta/2)^a cos(beta/2)^b, which stays finite at beta = 0 and beta = pi
//! where the tan-power form of the defining sum is singular. Blocks are
//! indexed by m ascending from -j to +j.
//!
//! Full rotation blocks are produced from the Cayley-Klein pair
//! u = exp(-i(alpha+gamma)/2) cos(beta/2), v = exp(i(alpha-gamma)/2) sin(beta/2),
//! whose phase angles enter only through the integer combinations m + m' and
//! m' - m; the double cover of the rotation group is then represented
//! faithfully for half-integer j with no branch bookkeeping.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::McsError;
use crate::hilbert::BasisLabel;

/// Euler angles in the convention 0 <= alpha < 2pi, 0 <= beta <= pi,
/// -pi <= gamma < pi.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, McsError> {
        if !(0.0..2.0 * PI).contains(&alpha) {
            return Err(McsError::AngleOutOfRange(format!("alpha = {alpha}")));
        }
        if !(0.0..=PI).contains(&beta) {
            return Err(McsError::AngleOutOfRange(format!("beta = {beta}")));
        }
        if !(-PI..PI).contains(&gamma) {
            return Err(McsError::AngleOutOfRange(format!("gamma = {gamma}")));
        }
        Ok(EulerAngles { alpha, beta, gamma })
    }

    /// Cayley-Klein parameters (u, v) with |u|^2 + |v|^2 = 1.
    pub fn cayley_klein(&self) -> (Complex64, Complex64) {
        let half_sum = 0.5 * (self.alpha + self.gamma);
        let half_diff = 0.5 * (self.alpha - self.gamma);
        let c = (0.5 * self.beta).cos();
        let s = (0.5 * self.beta).sin();
        (
            Complex64::from_polar(c, -half_sum),
            Complex64::from_polar(s, half_diff),
        )
    }
}

/// Group product of two Cayley-Klein pairs: the pair of g1 * g2.
pub fn compose_uv(
    g1: (Complex64, Complex64),
    g2: (Complex64, Complex64),
) -> (Complex64, Complex64) {
    let (u1, v1) = g1;
    let (u2, v2) = g2;
    (u1 * u2 - v1.conj() * v2, u1.conj() * v2 + v1 * u2)
}

/// Euler angles of a Cayley-Klein pair, normalized into the convention
/// ranges. For half-integer j the pair (-u, -v) maps to the same angles, so
/// round trips through this function can flip the sign of odd-2j blocks.
pub fn euler_from_uv(u: Complex64, v: Complex64) -> EulerAngles {
    let beta = 2.0 * v.norm().atan2(u.norm());
    let phi_u = if u.norm() > 0.0 { u.arg() } else { 0.0 };
    let phi_v = if v.norm() > 0.0 { v.arg() } else { 0.0 };
    // alpha + gamma = -2 phi_u, alpha - gamma = 2 phi_v.
    let alpha = (phi_v - phi_u).rem_euclid(2.0 * PI);
    let mut gamma = -phi_u - phi_v;
    gamma = (gamma + PI).rem_euclid(2.0 * PI) - PI;
    EulerAngles { alpha, beta, gamma }
}

/// One (2j+1) x (2j+1) rotation block, rows and columns indexed by m
/// ascending from -j to +j.
#[derive(Clone, Debug)]
pub struct WignerBlock {
    pub two_j: u32,
    pub entries: DMatrix<Complex64>,
}

impl WignerBlock {
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    fn index(&self, two_m: i32) -> usize {
        debug_assert!(two_m.abs() <= self.two_j as i32);
        debug_assert_eq!((two_m + self.two_j as i32) % 2, 0);
        ((two_m + self.two_j as i32) / 2) as usize
    }

    /// Entry at (m, m'), doubled indices.
    pub fn entry(&self, two_m: i32, two_mp: i32) -> Complex64 {
        self.entries[(self.index(two_m), self.index(two_mp))]
    }

    /// max |(U U^dagger - 1)_{ab}|.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let product = &self.entries * self.entries.adjoint();
        let mut defect: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let expect = if a == b {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                defect = defect.max((product[(a, b)] - expect).norm());
            }
        }
        defect
    }
}

fn ln_factorial(n: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(401);
        t.push(0.0);
        let mut acc = 0.0;
        for k in 1..=400u32 {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    });
    table[n as usize]
}

/// d^j_{m m'}(beta) for a single pair of doubled indices.
///
/// The defining factorial sum with tan powers is rewritten as
/// sum_n K_n sin(beta/2)^{m-m'+2n} cos(beta/2)^{2j-(m-m')-2n}, with n running
/// over all values keeping every factorial argument nonnegative.
fn little_d_entry(two_j: u32, two_m: i32, two_mp: i32, sin_half: f64, cos_half: f64) -> f64 {
    let tj = two_j as i64;
    let ta = two_m as i64; // row index: first subscript of d_{m m'}
    let tb = two_mp as i64; // column index: second subscript

    // All of these differences are even; work with undoubled integers.
    let j_minus_a = (tj - ta) / 2;
    let j_plus_a = (tj + ta) / 2;
    let j_minus_b = (tj - tb) / 2;
    let j_plus_b = (tj + tb) / 2;
    let b_minus_a = (tb - ta) / 2;

    let ln_prefactor = 0.5
        * (ln_factorial(j_minus_a as u32)
            + ln_factorial(j_plus_a as u32)
            + ln_factorial(j_minus_b as u32)
            + ln_factorial(j_plus_b as u32));

    let n_min = 0.max(-b_minus_a);
    let n_max = j_minus_b.min(j_plus_a);
    let mut acc = 0.0;
    for n in n_min..=n_max {
        let ln_den = ln_factorial(n as u32)
            + ln_factorial((j_minus_b - n) as u32)
            + ln_factorial((j_plus_a - n) as u32)
            + ln_factorial((b_minus_a + n) as u32);
        let sin_pow = (b_minus_a + 2 * n) as i32;
        let cos_pow = (tj - b_minus_a - 2 * n) as i32;
        debug_assert!(sin_pow >= 0 && cos_pow >= 0);
        debug_assert_eq!(sin_pow + cos_pow, two_j as i32);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign
            * (ln_prefactor - ln_den).exp()
            * sin_half.powi(sin_pow)
            * cos_half.powi(cos_pow);
    }
    acc
}

/// The real matrix d^j(beta), rows/columns ascending in m.
pub fn little_d(two_j: u32, beta: f64) -> Result<WignerBlock, McsError> {
    if !(0.0..=PI).contains(&beta) {
        return Err(McsError::AngleOutOfRange(format!("beta = {beta}")));
    }
    let sin_half = (0.5 * beta).sin();
    let cos_half = (0.5 * beta).cos();
    let n = two_j as usize + 1;
    let mut entries = DMatrix::zeros(n, n);
    for (row, two_m) in (-(two_j as i32)..=two_j as i32).step_by(2).enumerate() {
        for (col, two_mp) in (-(two_j as i32)..=two_j as i32).step_by(2).enumerate() {
            entries[(row, col)] = Complex64::new(
                little_d_entry(two_j, two_m, two_mp, sin_half, cos_half),
                0.0,
            );
        }
    }
    Ok(WignerBlock { two_j, entries })
}

/// Rotation block for an SU(2) element given by its Cayley-Klein pair.
///
/// Entry (m, m') = exp(i (m+m') arg u) exp(i (m'-m) arg v) d^j_{m m'}(beta)
/// with beta = 2 atan2(|v|, |u|); both phase exponents are integers for every
/// j in either tower.
pub fn rotation_block_from_uv(two_j: u32, u: Complex64, v: Complex64) -> WignerBlock {
    let norm = (u.norm_sqr() + v.norm_sqr()).sqrt();
    let (u, v) = (u / norm, v / norm);
    let beta = 2.0 * v.norm().atan2(u.norm());
    let mut block = little_d(two_j, beta).expect("beta from atan2 is in range");
    let phi_u = if u.norm() > 0.0 { u.arg() } else { 0.0 };
    let phi_v = if v.norm() > 0.0 { v.arg() } else { 0.0 };
    let tj = two_j as i32;
    for (row, two_m) in (-tj..=tj).step_by(2).enumerate() {
        for (col, two_mp) in (-tj..=tj).step_by(2).enumerate() {
            // (m + m') and (m' - m) as plain integers.
            let sum = (two_m + two_mp) / 2;
            let diff = (two_mp - two_m) / 2;
            let phase = Complex64::from_polar(1.0, sum as f64 * phi_u + diff as f64 * phi_v);
            block.entries[(row, col)] *= phase;
        }
    }
    block
}

/// R^j(alpha, beta, gamma): entry (m, m') = e^{-i alpha m} e^{-i gamma m'} d^j_{m m'}(beta).
pub fn big_r(two_j: u32, angles: &EulerAngles) -> WignerBlock {
    let (u, v) = angles.cayley_klein();
    rotation_block_from_uv(two_j, u, v)
}

/// Canonical wavefunction <alpha,beta,gamma | j k m> =
/// sqrt(2j+1) e^{i m alpha} e^{i k gamma} d^j_{m k}(beta).
///
/// The returned flag is true when the function is double-valued under
/// 2 pi shifts of the angles (half-integer j).
pub fn wavefunction(label: &BasisLabel, angles: &EulerAngles) -> (Complex64, bool) {
    let sin_half = (0.5 * angles.beta).sin();
    let cos_half = (0.5 * angles.beta).cos();
    let d = little_d_entry(label.two_j, label.two_m, label.two_k, sin_half, cos_half);
    let phase = Complex64::from_polar(
        1.0,
        0.5 * (label.two_m as f64 * angles.alpha + label.two_k as f64 * angles.gamma),
    );
    let value = ((label.two_j as f64 + 1.0).sqrt() * d) * phase;
    (value, label.two_j % 2 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn d_half_matrix() {
        let beta = 0.7;
        let d = little_d(1, beta).unwrap();
        let c = (beta / 2.0).cos();
        let s = (beta / 2.0).sin();
        // Ascending rows m = -1/2, +1/2.
        assert_relative_eq!(d.entry(-1, -1).re, c, epsilon = 1e-15);
        assert_relative_eq!(d.entry(-1, 1).re, s, epsilon = 1e-15);
        assert_relative_eq!(d.entry(1, -1).re, -s, epsilon = 1e-15);
        assert_relative_eq!(d.entry(1, 1).re, c, epsilon = 1e-15);
    }

    #[test]
    fn d_at_zero_is_identity() {
        for two_j in [0u32, 1, 2, 3, 5, 8] {
            let d = little_d(two_j, 0.0).unwrap();
            let n = d.dim();
            for a in 0..n {
                for b in 0..n {
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert_relative_eq!(d.entries[(a, b)].re, expect, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn d_one_center_is_cos_beta() {
        for beta in [0.0, 0.3, PI / 2.0, 2.1, PI] {
            let d = little_d(2, beta).unwrap();
            assert_relative_eq!(d.entry(0, 0).re, beta.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn d_at_pi_antidiagonal() {
        // The tan singularity at beta = pi must cancel; for j = 1/2 the limit
        // is the antidiagonal matrix [[0, 1], [-1, 0]].
        let d = little_d(1, PI).unwrap();
        assert_relative_eq!(d.entry(-1, -1).re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(d.entry(-1, 1).re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(d.entry(1, -1).re, -1.0, epsilon = 1e-15);
        assert_relative_eq!(d.entry(1, 1).re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn beta_out_of_range_rejected() {
        assert!(little_d(2, -0.1).is_err());
        assert!(little_d(2, PI + 0.1).is_err());
    }

    #[test]
    fn big_r_reduces_to_little_d() {
        let angles = EulerAngles::new(0.0, 1.234, 0.0).unwrap();
        let r = big_r(3, &angles);
        let d = little_d(3, 1.234).unwrap();
        let defect = (&r.entries - &d.entries).norm();
        assert!(defect < 1e-13, "defect {defect}");
    }

    #[test]
    fn big_r_half_pure_alpha() {
        // j = 1/2, alpha = pi, beta = gamma = 0: diag(e^{-i pi m}).
        let angles = EulerAngles::new(PI, 0.0, 0.0).unwrap();
        let r = big_r(1, &angles);
        let expect_minus = Complex64::from_polar(1.0, PI / 2.0); // m = -1/2
        let expect_plus = Complex64::from_polar(1.0, -PI / 2.0); // m = +1/2
        assert!((r.entry(-1, -1) - expect_minus).norm() < 1e-14);
        assert!((r.entry(1, 1) - expect_plus).norm() < 1e-14);
        assert!(r.entry(-1, 1).norm() < 1e-14);
    }

    #[test]
    fn composition_homomorphism() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g1 = EulerAngles::new(
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.0..PI),
                rng.gen_range(-PI..PI),
            )
            .unwrap();
            let g2 = EulerAngles::new(
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.0..PI),
                rng.gen_range(-PI..PI),
            )
            .unwrap();
            let (u, v) = compose_uv(g1.cayley_klein(), g2.cayley_klein());
            for two_j in [2u32, 1, 4] {
                let product = &big_r(two_j, &g1).entries * &big_r(two_j, &g2).entries;
                let direct = rotation_block_from_uv(two_j, u, v);
                let defect = (&product - &direct.entries).norm();
                assert!(defect < 1e-10, "two_j={two_j} defect {defect}");
            }
        }
    }

    #[test]
    fn euler_uv_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g = EulerAngles::new(
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.001..PI - 0.001),
                rng.gen_range(-PI..PI),
            )
            .unwrap();
            let (u, v) = g.cayley_klein();
            let back = euler_from_uv(u, v);
            // Integer-j blocks are insensitive to the double-cover sign.
            let r1 = big_r(2, &g);
            let r2 = big_r(2, &back);
            assert!((&r1.entries - &r2.entries).norm() < 1e-10);
        }
    }

    #[test]
    fn wavefunction_values() {
        let angles = EulerAngles::new(1.0, 2.0, -0.5).unwrap();
        let (value, double) = wavefunction(&BasisLabel::new(0, 0, 0).unwrap(), &angles);
        assert!((value - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(!double);

        // sqrt(3) d^1_{00}(pi/2) = sqrt(3) cos(pi/2) = 0.
        let angles = EulerAngles::new(0.0, PI / 2.0, 0.0).unwrap();
        let (value, double) = wavefunction(&BasisLabel::new(2, 0, 0).unwrap(), &angles);
        assert!(value.norm() < 1e-15);
        assert!(!double);

        let (_, double) = wavefunction(&BasisLabel::new(1, 1, -1).unwrap(), &angles);
        assert!(double);
    }

    #[test]
    fn wavefunction_orthogonality_by_quadrature() {
        // Integral over dOmega / (8 pi^2) of conj(psi) psi' for all labels with
        // j <= 1 in the half-integer tower, alpha and gamma on the double cover
        // so half-integer phases integrate out.
        use crate::hilbert::{enumerate_basis, SpaceSpec, Tower};
        use crate::quad::{gauss_legendre, phase_nodes};

        let space = SpaceSpec::new(2, Tower::HalfInteger);
        let labels = enumerate_basis(&space);
        let n_phase = 16;
        let (beta_nodes, beta_weights) = gauss_legendre(48);
        let alpha_nodes: Vec<f64> = phase_nodes(n_phase, 4.0 * PI).collect();
        let gamma_nodes: Vec<f64> = phase_nodes(n_phase, 4.0 * PI).collect();

        let mut gram = vec![vec![Complex64::new(0.0, 0.0); labels.len()]; labels.len()];
        for (bi, &x) in beta_nodes.iter().enumerate() {
            let beta = 0.5 * PI * (x + 1.0);
            let wb = 0.5 * PI * beta_weights[bi] * beta.sin();
            let sin_half = (0.5 * beta).sin();
            let cos_half = (0.5 * beta).cos();
            let d: Vec<f64> = labels
                .iter()
                .map(|l| little_d_entry(l.two_j, l.two_m, l.two_k, sin_half, cos_half))
                .collect();
            for &alpha in &alpha_nodes {
                for &gamma in &gamma_nodes {
                    let psi: Vec<Complex64> = labels
                        .iter()
                        .zip(&d)
                        .map(|(l, &dv)| {
                            Complex64::from_polar(
                                (l.two_j as f64 + 1.0).sqrt() * dv,
                                0.5 * (l.two_m as f64 * alpha + l.two_k as f64 * gamma),
                            )
                        })
                        .collect();
                    for (a, pa) in psi.iter().enumerate() {
                        for (b, pb) in psi.iter().enumerate() {
                            gram[a][b] += wb * pa.conj() * pb;
                        }
                    }
                }
            }
        }
        // Each phase sum is an average over its 4pi range, and the beta
        // integral of sin(beta) carries total weight 2, so dividing by
        // 2 n_phase^2 realizes the dOmega / (8 pi^2) normalization extended
        // to the double cover.
        let norm = 0.5 / (n_phase * n_phase) as f64;
        for (a, la) in labels.iter().enumerate() {
            for (b, lb) in labels.iter().enumerate() {
                let value = gram[a][b] * norm;
                let expect = if la == lb { 1.0 } else { 0.0 };
                assert!(
                    (value - Complex64::new(expect, 0.0)).norm() < 1e-6,
                    "<{la}|{lb}> = {value}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn blocks_unitary(beta in 0.0..PI, two_j in 0u32..9) {
            let d = little_d(two_j, beta).unwrap();
            prop_assert!(d.unitarity_defect() < 1e-12);
        }

        #[test]
        fn r_blocks_unitary(
            alpha in 0.0..2.0 * PI,
            beta in 0.0..PI,
            gamma in -PI..PI,
            two_j in 0u32..9,
        ) {
            let angles = EulerAngles::new(alpha, beta, gamma).unwrap();
            let r = big_r(two_j, &angles);
            prop_assert!(r.unitarity_defect() < 1e-12);
        }
    }
}
