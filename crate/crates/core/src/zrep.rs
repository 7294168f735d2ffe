//! The Z-representation: states as functions of (zeta, zeta_L, zeta_M) and
//! the angular momentum as first-order differential operators.
//!
//! A state sum c_{jkm} |jkm> maps to
//! psi(Z) = sum c_{jkm} sigma^j_m sigma^j_k zeta_L^m zeta_M^k conj(c_j) zeta^j,
//! stored in the shifted monomial encoding (2j, j+m, j+k) so every exponent
//! is a nonnegative integer. The six operators
//!   J^L_- = (1/zeta_L)(zeta d_zeta + zeta_L d_zeta_L),
//!   J^L_+ = zeta_L (zeta d_zeta - zeta_L d_zeta_L),
//!   J^L_0 = zeta_L d_zeta_L,
//! and the molecular triple with zeta_M, become exact exponent arithmetic on
//! the monomials and never reference the coefficient family. The bi-spinor
//! has no differential form (its matrix elements involve sqrt(j)) and is
//! excluded by construction.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::McsError;
use crate::families::SequenceFamily;
use crate::hilbert::TruncatedState;

/// Exponents (2j, j+m, j+k) of one monomial zeta^j zeta_L^m zeta_M^k in the
/// shifted encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonomialKey {
    /// Power of zeta, doubled.
    pub two_j: u32,
    /// j + m, an integer in 0..=2j.
    pub lab_pow: u32,
    /// j + k, an integer in 0..=2j.
    pub mol_pow: u32,
}

/// A finite linear combination of shifted monomials.
#[derive(Clone, Debug, Default)]
pub struct MonomialFunction {
    coeffs: HashMap<MonomialKey, Complex64>,
}

/// The six differential operators of the Z-representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffOp {
    LabPlus,
    LabMinus,
    LabZero,
    MolPlus,
    MolMinus,
    MolZero,
}

impl MonomialFunction {
    pub fn zero() -> Self {
        MonomialFunction::default()
    }

    pub fn add_term(&mut self, key: MonomialKey, coeff: Complex64) -> Result<(), McsError> {
        if key.lab_pow > key.two_j || key.mol_pow > key.two_j {
            return Err(McsError::ExponentOutOfRange {
                zeta_pow: key.two_j,
                zl_pow: key.lab_pow as i64,
                zm_pow: key.mol_pow as i64,
            });
        }
        if coeff != Complex64::new(0.0, 0.0) {
            *self.coeffs.entry(key).or_insert(Complex64::new(0.0, 0.0)) += coeff;
        }
        Ok(())
    }

    pub fn coeff(&self, key: &MonomialKey) -> Complex64 {
        self.coeffs
            .get(key)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MonomialKey, &Complex64)> {
        self.coeffs.iter()
    }

    /// Largest coefficient magnitude, for relative comparisons.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// a - b as a new function.
    pub fn difference(&self, other: &MonomialFunction) -> MonomialFunction {
        let mut out = self.clone();
        for (key, coeff) in other.coeffs.iter() {
            *out.coeffs.entry(*key).or_insert(Complex64::new(0.0, 0.0)) -= coeff;
        }
        out.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        out
    }

    /// Evaluate at parameters (z, zeta_L, zeta_M): the zeta variable enters
    /// through w = zeta/(zeta_L zeta_M) = z/((1+|zeta_L|^2)(1+|zeta_M|^2)),
    /// which stays finite when either displacement vanishes.
    pub fn evaluate_at(
        &self,
        z: Complex64,
        zeta_l: Complex64,
        zeta_m: Complex64,
    ) -> Complex64 {
        let w = z / ((1.0 + zeta_l.norm_sqr()) * (1.0 + zeta_m.norm_sqr()));
        let w_sqrt = w.sqrt();
        let mut acc = Complex64::new(0.0, 0.0);
        for (key, coeff) in self.coeffs.iter() {
            acc += coeff
                * w_sqrt.powu(key.two_j)
                * zeta_l.powu(key.lab_pow)
                * zeta_m.powu(key.mol_pow);
        }
        acc
    }
}

/// sigma^j_k = sqrt((2j)!/((j-k)!(j+k)!)) through the shifted index j+k.
fn sigma_shifted(two_j: u32, shifted: u32) -> f64 {
    crate::families::binomial(two_j, shifted).sqrt()
}

/// Map a state to its Z-representation function. Every shell in the state's
/// support must carry a nonvanishing c_j.
pub fn to_zrep(
    state: &TruncatedState,
    family: &SequenceFamily,
) -> Result<MonomialFunction, McsError> {
    let mut out = MonomialFunction::zero();
    for (label, amp) in state.iter() {
        let c_j = family.coeff(label.two_j);
        if c_j == Complex64::new(0.0, 0.0) {
            return Err(McsError::VanishingCoefficient { two_j: label.two_j });
        }
        let tj = label.two_j as i32;
        let lab_pow = ((tj + label.two_m) / 2) as u32;
        let mol_pow = ((tj + label.two_k) / 2) as u32;
        let sigma_m = sigma_shifted(label.two_j, lab_pow);
        let sigma_k = sigma_shifted(label.two_j, mol_pow);
        out.add_term(
            MonomialKey {
                two_j: label.two_j,
                lab_pow,
                mol_pow,
            },
            amp * sigma_m * sigma_k * c_j.conj(),
        )?;
    }
    Ok(out)
}

/// Monomial-by-monomial action of a differential operator: on
/// zeta^j zeta_L^m zeta_M^k the six operators multiply by (j -+ m) or
/// (j -+ k) and step one zeta_L or zeta_M power.
pub fn apply_diff(op: DiffOp, g: &MonomialFunction) -> Result<MonomialFunction, McsError> {
    let mut out = MonomialFunction::zero();
    for (key, coeff) in g.iter() {
        let p = key.two_j as f64;
        let q = key.lab_pow as f64;
        let r = key.mol_pow as f64;
        let (factor, new_key): (f64, Option<MonomialKey>) = match op {
            // zeta_L (zeta d_zeta - zeta_L d_zeta_L): multiplies by j - m.
            DiffOp::LabPlus => (
                p - q,
                Some(MonomialKey {
                    lab_pow: key.lab_pow + 1,
                    ..*key
                }),
            ),
            // (1/zeta_L)(zeta d_zeta + zeta_L d_zeta_L): multiplies by j + m.
            DiffOp::LabMinus => (
                q,
                key.lab_pow.checked_sub(1).map(|lab_pow| MonomialKey {
                    lab_pow,
                    ..*key
                }),
            ),
            DiffOp::LabZero => (q - 0.5 * p, Some(*key)),
            DiffOp::MolPlus => (
                r,
                key.mol_pow.checked_sub(1).map(|mol_pow| MonomialKey {
                    mol_pow,
                    ..*key
                }),
            ),
            DiffOp::MolMinus => (
                p - r,
                Some(MonomialKey {
                    mol_pow: key.mol_pow + 1,
                    ..*key
                }),
            ),
            DiffOp::MolZero => (r - 0.5 * p, Some(*key)),
        };
        if factor == 0.0 {
            continue;
        }
        match new_key {
            Some(k) => out.add_term(k, coeff * factor)?,
            // A nonzero factor stepping below zero exponent signals input
            // outside the physical subspace.
            None => {
                return Err(McsError::ExponentOutOfRange {
                    zeta_pow: key.two_j,
                    zl_pow: key.lab_pow as i64 - 1,
                    zm_pow: key.mol_pow as i64 - 1,
                })
            }
        }
    }
    Ok(out)
}

/// The matrix operator corresponding to each differential one.
pub fn matrix_counterpart(op: DiffOp) -> crate::angular::OperatorKind {
    use crate::angular::OperatorKind;
    match op {
        DiffOp::LabPlus => OperatorKind::JLPlus,
        DiffOp::LabMinus => OperatorKind::JLMinus,
        DiffOp::LabZero => OperatorKind::JLZero,
        DiffOp::MolPlus => OperatorKind::JMPlus,
        DiffOp::MolMinus => OperatorKind::JMMinus,
        DiffOp::MolZero => OperatorKind::JMZero,
    }
}

pub const ALL_DIFF_OPS: [DiffOp; 6] = [
    DiffOp::LabPlus,
    DiffOp::LabMinus,
    DiffOp::LabZero,
    DiffOp::MolPlus,
    DiffOp::MolMinus,
    DiffOp::MolZero,
];
