//! Matrix actions of the angular momentum, the rotor Hamiltonian, and the
//! bi-spinor S and bi-vector V on truncated states.
//!
//! Laboratory ladder operators shift m, molecular ones shift k with the
//! reversed commutation relations [J^M_+, J^M_-] = -2 J^M_0 and
//! [J^M_0, J^M_+-] = -+ J^M_+-. The bi-spinor S = T^{1/2,1/2} couples blocks
//! j and j +- 1/2, the bi-vector V = T^{1,1} couples j and j, j +- 1.
//! First bi-tensor index q shifts k, second index q' shifts m.
//!
//! Every ladder coefficient is the square root of a nonnegative integer or
//! half-integer product; terms whose square-root numerator vanishes (in
//! particular everything that would leave the tower at j = 0) are defined as
//! zero, including the 0/0 diagonal term of V_00.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::McsError;
use crate::hilbert::{enumerate_basis, BasisLabel, SpaceSpec, Tower, TruncatedState};

/// Spinor index, q or q' in {-1/2, +1/2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpinIndex {
    Minus,
    Plus,
}

impl SpinIndex {
    pub fn sign(self) -> i32 {
        match self {
            SpinIndex::Minus => -1,
            SpinIndex::Plus => 1,
        }
    }

    /// 2q.
    pub fn doubled(self) -> i32 {
        self.sign()
    }

    pub fn opposite(self) -> Self {
        match self {
            SpinIndex::Minus => SpinIndex::Plus,
            SpinIndex::Plus => SpinIndex::Minus,
        }
    }

    pub const ALL: [SpinIndex; 2] = [SpinIndex::Minus, SpinIndex::Plus];
}

/// Vector index, q or q' in {-1, 0, +1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VectorIndex {
    Minus,
    Zero,
    Plus,
}

impl VectorIndex {
    pub fn sign(self) -> i32 {
        match self {
            VectorIndex::Minus => -1,
            VectorIndex::Zero => 0,
            VectorIndex::Plus => 1,
        }
    }

    /// 2q.
    pub fn doubled(self) -> i32 {
        2 * self.sign()
    }

    pub fn opposite(self) -> Self {
        match self {
            VectorIndex::Minus => VectorIndex::Plus,
            VectorIndex::Zero => VectorIndex::Zero,
            VectorIndex::Plus => VectorIndex::Minus,
        }
    }

    pub const ALL: [VectorIndex; 3] = [VectorIndex::Minus, VectorIndex::Zero, VectorIndex::Plus];
}

/// One operator acting on the canonical basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    JLPlus,
    JLMinus,
    JLZero,
    JMPlus,
    JMMinus,
    JMZero,
    /// Multiplication by j.
    Lambda,
    /// Multiplication by j(j+1).
    Casimir,
    /// S_{q q'}: q shifts k by +-1/2, q' shifts m by +-1/2, j by +-1/2.
    Spinor(SpinIndex, SpinIndex),
    /// V_{q q'}: q shifts k, q' shifts m, j by -1, 0, +1.
    Vector(VectorIndex, VectorIndex),
}

impl OperatorKind {
    /// Largest |2 delta j| the operator can produce.
    pub fn two_j_shift(&self) -> u32 {
        match self {
            OperatorKind::Spinor(_, _) => 1,
            OperatorKind::Vector(_, _) => 2,
            _ => 0,
        }
    }

    /// The adjoint as (partner operator, real sign):
    /// (T^dagger)_{q q'} = (-1)^{q - q'} T_{-q, -q'}.
    pub fn adjoint(&self) -> (OperatorKind, f64) {
        match *self {
            OperatorKind::JLPlus => (OperatorKind::JLMinus, 1.0),
            OperatorKind::JLMinus => (OperatorKind::JLPlus, 1.0),
            OperatorKind::JMPlus => (OperatorKind::JMMinus, 1.0),
            OperatorKind::JMMinus => (OperatorKind::JMPlus, 1.0),
            OperatorKind::JLZero
            | OperatorKind::JMZero
            | OperatorKind::Lambda
            | OperatorKind::Casimir => (*self, 1.0),
            OperatorKind::Spinor(q, qp) => {
                let exponent = (q.doubled() - qp.doubled()) / 2;
                let sign = if exponent.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                (OperatorKind::Spinor(q.opposite(), qp.opposite()), sign)
            }
            OperatorKind::Vector(q, qp) => {
                let exponent = q.sign() - qp.sign();
                let sign = if exponent.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                (OperatorKind::Vector(q.opposite(), qp.opposite()), sign)
            }
        }
    }
}

/// Rotational constants of H = A_0 (J^M_0)^2 + A_1 (J^M_1)^2 + A_2 (J^M_2)^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotorConstants {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl RotorConstants {
    pub fn new(a0: f64, a1: f64, a2: f64) -> Self {
        RotorConstants { a0, a1, a2 }
    }

    pub fn is_spherical(&self) -> bool {
        self.a0 == self.a1 && self.a1 == self.a2
    }
}

/// Result of applying an operator: the in-space image plus the squared
/// amplitude that was raised past j_max and dropped.
#[derive(Clone, Debug)]
pub struct Applied {
    pub state: TruncatedState,
    pub dropped_weight: f64,
}

/// sqrt((j -+ m)(j +- m + 1)) for J^L_+- in doubled units.
pub fn jl_ladder_coeff(plus: bool, two_j: u32, two_m: i32) -> f64 {
    let tj = two_j as f64;
    let tm = two_m as f64;
    let product = if plus {
        (tj - tm) * (tj + tm + 2.0)
    } else {
        (tj + tm) * (tj - tm + 2.0)
    };
    0.5 * product.max(0.0).sqrt()
}

/// sqrt((j +- k)(j -+ k + 1)) for J^M_+- (which shifts k by -+1).
pub fn jm_ladder_coeff(plus: bool, two_j: u32, two_k: i32) -> f64 {
    let tj = two_j as f64;
    let tk = two_k as f64;
    let product = if plus {
        (tj + tk) * (tj - tk + 2.0)
    } else {
        (tj - tk) * (tj + tk + 2.0)
    };
    0.5 * product.max(0.0).sqrt()
}

/// Terms produced by one operator on one basis label.
fn label_action(kind: OperatorKind, label: &BasisLabel) -> Vec<(BasisLabel, Complex64)> {
    let tj = label.two_j as i32;
    let j = label.j();
    let k = label.k();
    let m = label.m();
    let mut terms: Vec<(BasisLabel, Complex64)> = Vec::new();
    let mut push = |two_j: i32, two_k: i32, two_m: i32, coeff: f64| {
        if coeff != 0.0 && two_j >= 0 {
            let target = BasisLabel {
                two_j: two_j as u32,
                two_k,
                two_m,
            };
            debug_assert!(target.is_valid(), "nonzero coefficient onto invalid {target}");
            terms.push((target, Complex64::new(coeff, 0.0)));
        }
    };

    match kind {
        OperatorKind::JLPlus => push(
            tj,
            label.two_k,
            label.two_m + 2,
            jl_ladder_coeff(true, label.two_j, label.two_m),
        ),
        OperatorKind::JLMinus => push(
            tj,
            label.two_k,
            label.two_m - 2,
            jl_ladder_coeff(false, label.two_j, label.two_m),
        ),
        OperatorKind::JLZero => push(tj, label.two_k, label.two_m, m),
        OperatorKind::JMPlus => push(
            tj,
            label.two_k - 2,
            label.two_m,
            jm_ladder_coeff(true, label.two_j, label.two_k),
        ),
        OperatorKind::JMMinus => push(
            tj,
            label.two_k + 2,
            label.two_m,
            jm_ladder_coeff(false, label.two_j, label.two_k),
        ),
        OperatorKind::JMZero => push(tj, label.two_k, label.two_m, k),
        OperatorKind::Lambda => push(tj, label.two_k, label.two_m, j),
        OperatorKind::Casimir => push(tj, label.two_k, label.two_m, j * (j + 1.0)),
        OperatorKind::Spinor(q, qp) => {
            let s0 = q.sign() as f64;
            let s1 = qp.sign() as f64;
            let tk = label.two_k + q.doubled();
            let tm = label.two_m + qp.doubled();
            // j -> j + 1/2
            let raise =
                ((j + s1 * m + 1.0) * (j + s0 * k + 1.0)).max(0.0).sqrt()
                    / (2.0 * (j + 1.0) * (2.0 * j + 1.0)).sqrt();
            push(tj + 1, tk, tm, raise);
            // j -> j - 1/2
            let num = ((j - s1 * m) * (j - s0 * k)).max(0.0);
            if num > 0.0 {
                let lower = s0 * s1 * num.sqrt() / (2.0 * j * (2.0 * j + 1.0)).sqrt();
                push(tj - 1, tk, tm, lower);
            }
        }
        OperatorKind::Vector(q, qp) => {
            let tk = label.two_k + q.doubled();
            let tm = label.two_m + qp.doubled();
            // Per-index factors; a zero bi-tensor index contributes the
            // middle Clebsch-Gordan pattern, a +-1 index the stretched one.
            let factor_raise = |x: f64, s: i32| -> f64 {
                if s == 0 {
                    ((j - x + 1.0) * (j + x + 1.0)).max(0.0).sqrt()
                } else {
                    let sx = s as f64 * x;
                    (0.5 * (j + sx + 1.0) * (j + sx + 2.0)).max(0.0).sqrt()
                }
            };
            let factor_keep = |x: f64, s: i32| -> f64 {
                if s == 0 {
                    -x
                } else {
                    let sx = s as f64 * x;
                    s as f64 * (0.5 * (j - sx) * (j + sx + 1.0)).max(0.0).sqrt()
                }
            };
            let factor_lower = |x: f64, s: i32| -> f64 {
                if s == 0 {
                    -((j - x) * (j + x)).max(0.0).sqrt()
                } else {
                    let sx = s as f64 * x;
                    (0.5 * (j - sx - 1.0) * (j - sx)).max(0.0).sqrt()
                }
            };

            let raise = factor_raise(m, qp.sign()) * factor_raise(k, q.sign())
                / ((j + 1.0) * ((2.0 * j + 1.0) * (2.0 * j + 3.0)).sqrt());
            push(tj + 2, tk, tm, raise);

            if tj > 0 {
                let keep = factor_keep(m, qp.sign()) * factor_keep(k, q.sign())
                    / ((j + 1.0) * j);
                push(tj, tk, tm, keep);
            }
            if tj >= 2 {
                let lower = factor_lower(m, qp.sign()) * factor_lower(k, q.sign())
                    / (j * ((2.0 * j + 1.0) * (2.0 * j - 1.0)).sqrt());
                push(tj - 2, tk, tm, lower);
            }
        }
    }
    terms
}

/// Apply one operator. Amplitude raised past j_max is dropped and its total
/// squared weight reported.
pub fn apply(kind: OperatorKind, s: &TruncatedState) -> Result<Applied, McsError> {
    let space = s.space();
    if matches!(kind, OperatorKind::Spinor(_, _)) && space.tower == Tower::Integer {
        return Err(McsError::SpinorOnIntegerTower);
    }
    let mut state = TruncatedState::zero(space);
    let mut dropped = 0.0;
    for (label, amp) in s.iter() {
        for (target, coeff) in label_action(kind, label) {
            let value = amp * coeff;
            if target.two_j > space.two_j_max {
                dropped += value.norm_sqr();
            } else {
                state.add_unchecked(target, value);
            }
        }
    }
    Ok(Applied {
        state,
        dropped_weight: dropped,
    })
}

/// Apply a complex linear combination of operators.
pub fn apply_linear(
    terms: &[(Complex64, OperatorKind)],
    s: &TruncatedState,
) -> Result<Applied, McsError> {
    let mut state = TruncatedState::zero(s.space());
    let mut dropped = 0.0;
    for (coeff, kind) in terms {
        let part = apply(*kind, s)?;
        state = state.add_scaled(&part.state, *coeff)?;
        dropped += coeff.norm_sqr() * part.dropped_weight;
    }
    Ok(Applied {
        state,
        dropped_weight: dropped,
    })
}

/// J^L_1 = (J^L_+ + J^L_-)/2 and friends, as linear-combination tables.
pub fn cartesian_terms(lab: bool, axis: usize) -> Vec<(Complex64, OperatorKind)> {
    let (plus, minus, zero) = if lab {
        (OperatorKind::JLPlus, OperatorKind::JLMinus, OperatorKind::JLZero)
    } else {
        (OperatorKind::JMPlus, OperatorKind::JMMinus, OperatorKind::JMZero)
    };
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    match axis {
        1 => vec![(half, plus), (half, minus)],
        2 => vec![(-half_i, plus), (half_i, minus)],
        0 => vec![(Complex64::new(1.0, 0.0), zero)],
        _ => panic!("axis must be 0, 1 or 2"),
    }
}

/// Dense matrix of an operator over the enumerated basis of a space.
pub fn densify(kind: OperatorKind, space: &SpaceSpec) -> Result<DMatrix<Complex64>, McsError> {
    let labels = enumerate_basis(space);
    let index: std::collections::HashMap<BasisLabel, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (*l, i))
        .collect();
    let n = labels.len();
    let mut matrix = DMatrix::zeros(n, n);
    for (col, label) in labels.iter().enumerate() {
        let basis = TruncatedState::basis_vector(*space, *label)?;
        let image = apply(kind, &basis)?;
        for (target, amp) in image.state.iter() {
            matrix[(index[target], col)] = *amp;
        }
    }
    Ok(matrix)
}

/// Max |<a| T b> - <T^dagger a | b>| over basis pairs whose images stay
/// inside the truncation.
pub fn adjoint_check(kind: OperatorKind, space: &SpaceSpec) -> Result<f64, McsError> {
    let (partner, sign) = kind.adjoint();
    let matrix = densify(kind, space)?;
    let partner_matrix = densify(partner, space)?;
    let labels = enumerate_basis(space);
    let shift = kind.two_j_shift();
    let interior: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.two_j + shift <= space.two_j_max)
        .map(|(i, _)| i)
        .collect();
    let mut defect: f64 = 0.0;
    for &a in &interior {
        for &b in &interior {
            let lhs = matrix[(a, b)];
            let rhs = sign * partner_matrix[(b, a)].conj();
            defect = defect.max((lhs - rhs).norm());
        }
    }
    Ok(defect)
}

/// One commutator relation [A, B] = sum of expected terms.
struct CommutatorCase {
    name: String,
    a: OperatorKind,
    b: OperatorKind,
    expected: Vec<(Complex64, OperatorKind)>,
}

/// Defects of the su(2) x su(2) commutation relations and the bi-tensor
/// commutators with the angular momentum, evaluated on interior states.
#[derive(Clone, Debug)]
pub struct CommutatorReport {
    pub defects: Vec<(String, f64)>,
}

impl CommutatorReport {
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().map(|(_, d)| *d).fold(0.0, f64::max)
    }
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// sqrt((r -+ q)(r +- q + 1)) with rank r: the coefficient in the
/// bi-tensor commutation relations.
fn tensor_ladder_coeff(rank_two: u32, q_two: i32, plus: bool) -> f64 {
    let r = rank_two as f64 / 2.0;
    let q = q_two as f64 / 2.0;
    let product = if plus {
        (r - q) * (r + q + 1.0)
    } else {
        (r + q) * (r - q + 1.0)
    };
    product.max(0.0).sqrt()
}

fn spinor_cases() -> Vec<CommutatorCase> {
    let mut cases = Vec::new();
    for q in SpinIndex::ALL {
        for qp in SpinIndex::ALL {
            let t = OperatorKind::Spinor(q, qp);
            // [J^L_+, T_{q q'}] = sqrt((j' - q')(j' + q' + 1)) T_{q, q'+1}
            let coeff = tensor_ladder_coeff(1, qp.doubled(), true);
            let expected = if qp == SpinIndex::Minus {
                vec![(real(coeff), OperatorKind::Spinor(q, SpinIndex::Plus))]
            } else {
                vec![]
            };
            cases.push(CommutatorCase {
                name: format!("[JL+, S({:?},{:?})]", q, qp),
                a: OperatorKind::JLPlus,
                b: t,
                expected,
            });
            // [J^L_-, T_{q q'}] = sqrt((j' + q')(j' - q' + 1)) T_{q, q'-1}
            let coeff = tensor_ladder_coeff(1, qp.doubled(), false);
            let expected = if qp == SpinIndex::Plus {
                vec![(real(coeff), OperatorKind::Spinor(q, SpinIndex::Minus))]
            } else {
                vec![]
            };
            cases.push(CommutatorCase {
                name: format!("[JL-, S({:?},{:?})]", q, qp),
                a: OperatorKind::JLMinus,
                b: t,
                expected,
            });
            // [J^L_0, T_{q q'}] = q' T_{q q'}
            cases.push(CommutatorCase {
                name: format!("[JL0, S({:?},{:?})]", q, qp),
                a: OperatorKind::JLZero,
                b: t,
                expected: vec![(real(qp.sign() as f64 * 0.5), t)],
            });
            // [J^M_-, T_{q q'}] = sqrt((j - q)(j + q + 1)) T_{q+1, q'}
            let coeff = tensor_ladder_coeff(1, q.doubled(), true);
            let expected = if q == SpinIndex::Minus {
                vec![(real(coeff), OperatorKind::Spinor(SpinIndex::Plus, qp))]
            } else {
                vec![]
            };
            cases.push(CommutatorCase {
                name: format!("[JM-, S({:?},{:?})]", q, qp),
                a: OperatorKind::JMMinus,
                b: t,
                expected,
            });
            // [J^M_+, T_{q q'}] = sqrt((j + q)(j - q + 1)) T_{q-1, q'}
            let coeff = tensor_ladder_coeff(1, q.doubled(), false);
            let expected = if q == SpinIndex::Plus {
                vec![(real(coeff), OperatorKind::Spinor(SpinIndex::Minus, qp))]
            } else {
                vec![]
            };
            cases.push(CommutatorCase {
                name: format!("[JM+, S({:?},{:?})]", q, qp),
                a: OperatorKind::JMPlus,
                b: t,
                expected,
            });
            // [J^M_0, T_{q q'}] = q T_{q q'}
            cases.push(CommutatorCase {
                name: format!("[JM0, S({:?},{:?})]", q, qp),
                a: OperatorKind::JMZero,
                b: t,
                expected: vec![(real(q.sign() as f64 * 0.5), t)],
            });
        }
    }
    cases
}

fn vector_shift(q: VectorIndex, up: bool) -> Option<VectorIndex> {
    match (q, up) {
        (VectorIndex::Minus, true) => Some(VectorIndex::Zero),
        (VectorIndex::Zero, true) => Some(VectorIndex::Plus),
        (VectorIndex::Plus, true) => None,
        (VectorIndex::Plus, false) => Some(VectorIndex::Zero),
        (VectorIndex::Zero, false) => Some(VectorIndex::Minus),
        (VectorIndex::Minus, false) => None,
    }
}

fn vector_cases() -> Vec<CommutatorCase> {
    let mut cases = Vec::new();
    for q in VectorIndex::ALL {
        for qp in VectorIndex::ALL {
            let t = OperatorKind::Vector(q, qp);
            for plus in [true, false] {
                // Lab: [J^L_+-, T] raises/lowers q'.
                let coeff = tensor_ladder_coeff(2, qp.doubled(), plus);
                let expected = match vector_shift(qp, plus) {
                    Some(next) if coeff != 0.0 => {
                        vec![(real(coeff), OperatorKind::Vector(q, next))]
                    }
                    _ => vec![],
                };
                cases.push(CommutatorCase {
                    name: format!("[JL{}, V({:?},{:?})]", if plus { "+" } else { "-" }, q, qp),
                    a: if plus { OperatorKind::JLPlus } else { OperatorKind::JLMinus },
                    b: t,
                    expected,
                });
                // Molecular: [J^M_-+, T] raises/lowers q.
                let coeff = tensor_ladder_coeff(2, q.doubled(), plus);
                let expected = match vector_shift(q, plus) {
                    Some(next) if coeff != 0.0 => {
                        vec![(real(coeff), OperatorKind::Vector(next, qp))]
                    }
                    _ => vec![],
                };
                cases.push(CommutatorCase {
                    name: format!("[JM{}, V({:?},{:?})]", if plus { "-" } else { "+" }, q, qp),
                    a: if plus { OperatorKind::JMMinus } else { OperatorKind::JMPlus },
                    b: t,
                    expected,
                });
            }
            cases.push(CommutatorCase {
                name: format!("[JL0, V({:?},{:?})]", q, qp),
                a: OperatorKind::JLZero,
                b: t,
                expected: vec![(real(qp.sign() as f64), t)],
            });
            cases.push(CommutatorCase {
                name: format!("[JM0, V({:?},{:?})]", q, qp),
                a: OperatorKind::JMZero,
                b: t,
                expected: vec![(real(q.sign() as f64), t)],
            });
        }
    }
    cases
}

/// Check the algebra on every interior basis label of the space.
pub fn commutator_defect(space: &SpaceSpec) -> Result<CommutatorReport, McsError> {
    let mut cases: Vec<CommutatorCase> = Vec::new();

    let su2 = [
        ("[JL+, JL-] - 2 JL0", OperatorKind::JLPlus, OperatorKind::JLMinus,
         vec![(real(2.0), OperatorKind::JLZero)]),
        ("[JL0, JL+] - JL+", OperatorKind::JLZero, OperatorKind::JLPlus,
         vec![(real(1.0), OperatorKind::JLPlus)]),
        ("[JL0, JL-] + JL-", OperatorKind::JLZero, OperatorKind::JLMinus,
         vec![(real(-1.0), OperatorKind::JLMinus)]),
        ("[JM+, JM-] + 2 JM0", OperatorKind::JMPlus, OperatorKind::JMMinus,
         vec![(real(-2.0), OperatorKind::JMZero)]),
        ("[JM0, JM+] + JM+", OperatorKind::JMZero, OperatorKind::JMPlus,
         vec![(real(-1.0), OperatorKind::JMPlus)]),
        ("[JM0, JM-] - JM-", OperatorKind::JMZero, OperatorKind::JMMinus,
         vec![(real(1.0), OperatorKind::JMMinus)]),
    ];
    for (name, a, b, expected) in su2 {
        cases.push(CommutatorCase {
            name: name.into(),
            a,
            b,
            expected,
        });
    }
    // [J^L, J^M] = 0, all nine pairs.
    let lab = [OperatorKind::JLPlus, OperatorKind::JLMinus, OperatorKind::JLZero];
    let mol = [OperatorKind::JMPlus, OperatorKind::JMMinus, OperatorKind::JMZero];
    for a in lab {
        for b in mol {
            cases.push(CommutatorCase {
                name: format!("[{a:?}, {b:?}]"),
                a,
                b,
                expected: vec![],
            });
        }
    }
    if space.tower == Tower::HalfInteger {
        cases.extend(spinor_cases());
    }
    cases.extend(vector_cases());

    let labels = enumerate_basis(space);
    let mut defects = Vec::with_capacity(cases.len());
    for case in &cases {
        let budget = case.a.two_j_shift() + case.b.two_j_shift();
        let mut worst: f64 = 0.0;
        for label in labels.iter().filter(|l| l.two_j + budget <= space.two_j_max) {
            let e = TruncatedState::basis_vector(*space, *label)?;
            let ab = apply(case.a, &apply(case.b, &e)?.state)?.state;
            let ba = apply(case.b, &apply(case.a, &e)?.state)?.state;
            let expected = apply_linear(&case.expected, &e)?.state;
            let residual = ab
                .add_scaled(&ba, real(-1.0))?
                .add_scaled(&expected, real(-1.0))?;
            for (_, amp) in residual.iter() {
                worst = worst.max(amp.norm());
            }
        }
        defects.push((case.name.clone(), worst));
    }
    Ok(CommutatorReport { defects })
}

/// One dense block of the rotor Hamiltonian over the (k, m) grid of h_j,
/// indexed in ascending (2k, 2m) order.
#[derive(Clone, Debug)]
pub struct RotorBlock {
    pub two_j: u32,
    pub matrix: DMatrix<Complex64>,
}

/// Apply the rotor Hamiltonian Sum_i A_i (J^M_i)^2.
pub fn apply_rotor(c: &RotorConstants, s: &TruncatedState) -> Result<TruncatedState, McsError> {
    let mut out = TruncatedState::zero(s.space());
    for (axis, a) in [(0usize, c.a0), (1, c.a1), (2, c.a2)] {
        if a == 0.0 {
            continue;
        }
        let terms = cartesian_terms(false, axis);
        let once = apply_linear(&terms, s)?.state;
        let twice = apply_linear(&terms, &once)?.state;
        out = out.add_scaled(&twice, real(a))?;
    }
    Ok(out)
}

/// Dense per-j blocks of the rotor Hamiltonian. H is built from J^M only,
/// so it is block-diagonal in j and diagonal in m.
pub fn rotor_hamiltonian(c: &RotorConstants, space: &SpaceSpec) -> Result<Vec<RotorBlock>, McsError> {
    let mut blocks = Vec::new();
    for two_j in space.two_js() {
        let block_space = SpaceSpec::new(two_j, space.tower);
        let labels: Vec<BasisLabel> = enumerate_basis(&block_space)
            .into_iter()
            .filter(|l| l.two_j == two_j)
            .collect();
        let n = labels.len();
        let index: std::collections::HashMap<BasisLabel, usize> =
            labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let mut matrix = DMatrix::zeros(n, n);
        for (col, label) in labels.iter().enumerate() {
            let e = TruncatedState::basis_vector(block_space, *label)?;
            let image = apply_rotor(c, &e)?;
            for (target, amp) in image.iter() {
                matrix[(index[target], col)] = *amp;
            }
        }
        blocks.push(RotorBlock { two_j, matrix });
    }
    Ok(blocks)
}

/// CSV rendering of a dense complex matrix, entries as re+imi pairs.
pub fn block_to_csv(matrix: &DMatrix<Complex64>) -> String {
    let mut out = String::new();
    for row in 0..matrix.nrows() {
        let cells: Vec<String> = (0..matrix.ncols())
            .map(|col| {
                let v = matrix[(row, col)];
                format!("{:.12e}{}{}i", v.re, if v.im >= 0.0 { "+" } else { "-" }, format_args!("{:.12e}", v.im.abs()))
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
