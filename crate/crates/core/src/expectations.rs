//! Expectation values on fundamental and coherent states.
//!
//! On a fundamental state everything reduces to the norm function:
//! <J_0>_z = -x N'(x)/N(x) and <J^2>_z = x (x N''(x) + 2 N'(x))/N(x) with
//! x = |z|^2, the transverse second moments are -<J_0>_z / 2, and the
//! bi-spinor and bi-vector expectations form diagonal matrices whose entries
//! are explicit series in the c_j. Every closed form here is cross-checked
//! against direct operator evaluation on the truncated state; the direct
//! route is the ground truth.
//!
//! The diagonal V_00 series carries the + sign the canonical-basis
//! representation produces, mk/((j+1)j) at m = k = -j being +j/(j+1); the
//! published expectation formula prints the opposite sign and loses to the
//! operator oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::angular::{
    apply, apply_linear, cartesian_terms, OperatorKind, SpinIndex, VectorIndex,
};
use crate::coherent::{
    apply_displacement, displacement_block, lab_axis_direction, mcs, mfs, mol_axis_direction,
    CoherentParams, Frame,
};
use crate::error::McsError;
use crate::families::{norm_derivatives, sum_with_ratio_guard, SequenceFamily};
use crate::hilbert::{inner_product, SpaceSpec, Tower, TruncatedState};

/// Expectation values on one fundamental state.
#[derive(Clone, Debug)]
pub struct ExpectationReport {
    /// <J_0>_z (identical for laboratory and molecular components).
    pub j0: f64,
    /// <J^2>_z.
    pub jsq: f64,
    /// <J_+>_z; vanishes on every fundamental state.
    pub jplus: Complex64,
    /// (dJ1^2 dJ2^2, dJ1^2 dJ0^2, dJ2^2 dJ0^2) with dA^2 = <A^2> - <A>^2.
    pub uncertainty_products: [f64; 3],
    /// <S_{q q'}>_z over q, q' ascending in {-1/2, +1/2}.
    pub s_matrix: [[Complex64; 2]; 2],
    /// <V_{q q'}>_z over q, q' ascending in {-1, 0, +1}.
    pub v_matrix: [[Complex64; 3]; 3],
}

fn zero_matrix2() -> [[Complex64; 2]; 2] {
    [[Complex64::new(0.0, 0.0); 2]; 2]
}

fn zero_matrix3() -> [[Complex64; 3]; 3] {
    [[Complex64::new(0.0, 0.0); 3]; 3]
}

/// <S_{--}>_z = sum_j conj(c_{j+1/2}) c_j conj(z)^{j+1/2} z^j
/// sqrt((2j+1)/(2j+2)) / N, as a ratio-guarded series.
fn s_minus_minus_series(fam: &SequenceFamily, z: Complex64, norm: f64) -> Result<Complex64, McsError> {
    if fam.tower() == Tower::Integer {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let z_sqrt = z.sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for two_j in 0..4096u32 {
        let tj = two_j as f64;
        let coeff = fam.coeff(two_j + 1).conj()
            * fam.coeff(two_j)
            * z_sqrt.conj().powu(two_j + 1)
            * z_sqrt.powu(two_j)
            * ((tj + 1.0) / (tj + 2.0)).sqrt();
        acc += coeff;
        scale = scale.max(acc.norm()).max(1e-300);
        if two_j > 16 && coeff.norm() < 1e-15 * scale {
            break;
        }
    }
    Ok(acc / norm)
}

/// Diagonal bi-vector entries (<V_-->_z, <V_00>_z) by series.
fn v_diagonal_series(
    fam: &SequenceFamily,
    z: Complex64,
    norm: f64,
) -> Result<(Complex64, f64), McsError> {
    let x = z.norm_sqr();
    let abs_z = z.norm();
    let step = fam.tower().two_j_step();
    let mut v_mm = Complex64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for n in 0..4096u32 {
        let two_j = n * step;
        let tj = two_j as f64;
        // conj(z)^{j+1} z^j = conj(z) |z|^{2j}.
        let term = fam.coeff(two_j + 2).conj()
            * fam.coeff(two_j)
            * z.conj()
            * abs_z.powi(two_j as i32)
            * ((tj + 1.0) / (tj + 3.0)).sqrt();
        v_mm += term;
        scale = scale.max(v_mm.norm()).max(1e-300);
        if n > 16 && term.norm() < 1e-15 * scale {
            break;
        }
    }
    let v00 = sum_with_ratio_guard(
        |n| {
            let two_j = n as u32 * step;
            let j = two_j as f64 / 2.0;
            if two_j == 0 {
                0.0
            } else {
                j / (j + 1.0) * fam.coeff_abs_sqr(two_j) * x.powf(j)
            }
        },
        1e-14,
        4096,
    )?;
    Ok((v_mm / norm, v00.value / norm))
}

/// Closed-form expectation report on the fundamental state |z>, everything
/// driven by the norm-function derivatives and the diagonal series.
pub fn mfs_expectations(fam: &SequenceFamily, z: Complex64) -> Result<ExpectationReport, McsError> {
    let x = z.norm_sqr();
    if x == 0.0 {
        return Ok(ExpectationReport {
            j0: 0.0,
            jsq: 0.0,
            jplus: Complex64::new(0.0, 0.0),
            uncertainty_products: [0.0; 3],
            s_matrix: zero_matrix2(),
            v_matrix: zero_matrix3(),
        });
    }
    let (n, d1, d2) = norm_derivatives(fam, x, 1e-14)?;
    let j0 = -x * d1 / n;
    let jsq = x * (x * d2 + 2.0 * d1) / n;
    let j0_sq = x * (x * d2 + d1) / n;
    let var_transverse = -0.5 * j0; // <J_1^2> = <J_2^2> = -<J_0>/2, <J_1> = 0
    let var_j0 = j0_sq - j0 * j0;
    let uncertainty_products = [
        var_transverse * var_transverse,
        var_transverse * var_j0,
        var_transverse * var_j0,
    ];

    let s_mm = s_minus_minus_series(fam, z, n)?;
    let mut s_matrix = zero_matrix2();
    s_matrix[0][0] = s_mm;
    s_matrix[1][1] = s_mm.conj();

    let (v_mm, v00) = v_diagonal_series(fam, z, n)?;
    let mut v_matrix = zero_matrix3();
    v_matrix[0][0] = v_mm;
    v_matrix[1][1] = Complex64::new(v00, 0.0);
    v_matrix[2][2] = v_mm.conj();

    Ok(ExpectationReport {
        j0,
        jsq,
        jplus: Complex64::new(0.0, 0.0),
        uncertainty_products,
        s_matrix,
        v_matrix,
    })
}

/// <psi| Op |psi> / <psi|psi> for a linear combination of operators.
pub fn expectation_linear(
    terms: &[(Complex64, OperatorKind)],
    state: &TruncatedState,
) -> Result<Complex64, McsError> {
    let image = apply_linear(terms, state)?.state;
    Ok(inner_product(state, &image)? / state.norm_sqr())
}

/// <psi| A B |psi> / <psi|psi>.
fn second_moment(
    a: &[(Complex64, OperatorKind)],
    b: &[(Complex64, OperatorKind)],
    state: &TruncatedState,
) -> Result<Complex64, McsError> {
    let inner = apply_linear(b, state)?.state;
    let outer = apply_linear(a, &inner)?.state;
    Ok(inner_product(state, &outer)? / state.norm_sqr())
}

/// Direct operator-route expectation report on an explicit state: the
/// oracle every closed form is checked against.
pub fn direct_expectations(state: &TruncatedState) -> Result<ExpectationReport, McsError> {
    let j0 = expectation_linear(&cartesian_terms(true, 0), state)?.re;
    let jsq = expectation_linear(&[(Complex64::new(1.0, 0.0), OperatorKind::Casimir)], state)?.re;
    let jplus = expectation_linear(&[(Complex64::new(1.0, 0.0), OperatorKind::JLPlus)], state)?;

    let mut vars = [0.0f64; 3];
    for (slot, axis) in [(0usize, 1usize), (1, 2), (2, 0)] {
        let terms = cartesian_terms(true, axis);
        let mean = expectation_linear(&terms, state)?.re;
        let sq = second_moment(&terms, &terms, state)?.re;
        vars[slot] = sq - mean * mean;
    }
    let uncertainty_products = [vars[0] * vars[1], vars[0] * vars[2], vars[1] * vars[2]];

    let mut s_matrix = zero_matrix2();
    if state.space().tower == Tower::HalfInteger {
        for (row, q) in SpinIndex::ALL.iter().enumerate() {
            for (col, qp) in SpinIndex::ALL.iter().enumerate() {
                s_matrix[row][col] = expectation_linear(
                    &[(Complex64::new(1.0, 0.0), OperatorKind::Spinor(*q, *qp))],
                    state,
                )?;
            }
        }
    }
    let mut v_matrix = zero_matrix3();
    for (row, q) in VectorIndex::ALL.iter().enumerate() {
        for (col, qp) in VectorIndex::ALL.iter().enumerate() {
            v_matrix[row][col] = expectation_linear(
                &[(Complex64::new(1.0, 0.0), OperatorKind::Vector(*q, *qp))],
                state,
            )?;
        }
    }

    Ok(ExpectationReport {
        j0,
        jsq,
        jplus,
        uncertainty_products,
        s_matrix,
        v_matrix,
    })
}

/// The two-sided uncertainty data of a fundamental state, computed by the
/// direct operator route: products of variances against the commutator
/// bounds 1/4 <J_axis>^2.
#[derive(Clone, Copy, Debug)]
pub struct UncertaintyReport {
    /// dJ1^2 dJ2^2 and its bound (1/4) <J_0>^2: equal on every |z>.
    pub product_12: f64,
    pub bound_12: f64,
    /// dJ1^2 dJ0^2 against (1/4) <J_2>^2 = 0: strict inequality unless the
    /// family is a monomial.
    pub product_10: f64,
    pub bound_10: f64,
    pub product_20: f64,
    pub bound_20: f64,
}

pub fn uncertainty_check(
    fam: &SequenceFamily,
    z: Complex64,
    space: &SpaceSpec,
) -> Result<UncertaintyReport, McsError> {
    let state = mfs(fam, z, space)?.state;
    let mut means = [0.0f64; 3];
    let mut vars = [0.0f64; 3];
    for axis in [0usize, 1, 2] {
        let terms = cartesian_terms(true, axis);
        means[axis] = expectation_linear(&terms, &state)?.re;
        vars[axis] = second_moment(&terms, &terms, &state)?.re - means[axis] * means[axis];
    }
    Ok(UncertaintyReport {
        product_12: vars[1] * vars[2],
        bound_12: 0.25 * means[0] * means[0],
        product_10: vars[1] * vars[0],
        bound_10: 0.25 * means[2] * means[2],
        product_20: vars[2] * vars[0],
        bound_20: 0.25 * means[1] * means[1],
    })
}

/// Expectation geometry of a coherent state: <J^L> and <J^M> lie along the
/// displaced axes with common length |<J_0>_z|, and <J^2> is unchanged.
#[derive(Clone, Debug)]
pub struct McsExpectations {
    pub j0_z: f64,
    pub jsq: f64,
    /// [<J^L_1>, <J^L_2>, <J^L_0>]_Z.
    pub jl_vec: [f64; 3],
    pub jm_vec: [f64; 3],
    pub lab_direction: [f64; 3],
    pub mol_direction: [f64; 3],
}

pub fn mcs_expectations(params: &CoherentParams) -> Result<McsExpectations, McsError> {
    let report = mfs_expectations(&params.family, params.z)?;
    let lab_direction = lab_axis_direction(params.zeta_l);
    let mol_direction = mol_axis_direction(params.zeta_m);
    let scale = report.j0;
    Ok(McsExpectations {
        j0_z: report.j0,
        jsq: report.jsq,
        jl_vec: [
            scale * lab_direction[0],
            scale * lab_direction[1],
            scale * lab_direction[2],
        ],
        jm_vec: [
            scale * mol_direction[0],
            scale * mol_direction[1],
            scale * mol_direction[2],
        ],
        lab_direction,
        mol_direction,
    })
}

/// Direct <J^L_i>_Z and <J^M_i>_Z on an explicit state.
pub fn direct_j_vectors(state: &TruncatedState) -> Result<([f64; 3], [f64; 3]), McsError> {
    let mut jl = [0.0f64; 3];
    let mut jm = [0.0f64; 3];
    for (slot, axis) in [(0usize, 1usize), (1, 2), (2, 0)] {
        jl[slot] = expectation_linear(&cartesian_terms(true, axis), state)?.re;
        jm[slot] = expectation_linear(&cartesian_terms(false, axis), state)?.re;
    }
    Ok((jl, jm))
}

/// The bi-tensor matrices of a coherent state against their three-factor
/// reconstruction R~(-zeta_M) diag R(-zeta_L).
#[derive(Clone, Debug)]
pub struct TensorDecomposition {
    /// Unnormalized <Z|S|Z>, present on half-integer towers only.
    pub s_direct: Option<DMatrix<Complex64>>,
    pub s_reconstructed: Option<DMatrix<Complex64>>,
    pub s_defect: Option<f64>,
    pub v_direct: DMatrix<Complex64>,
    pub v_reconstructed: DMatrix<Complex64>,
    pub v_defect: f64,
}

fn tensor_matrix(
    state: &TruncatedState,
    two_rank: u32,
) -> Result<DMatrix<Complex64>, McsError> {
    let n = two_rank as usize + 1;
    let mut matrix = DMatrix::zeros(n, n);
    for row in 0..n {
        for col in 0..n {
            let kind = if two_rank == 1 {
                OperatorKind::Spinor(SpinIndex::ALL[row], SpinIndex::ALL[col])
            } else {
                OperatorKind::Vector(VectorIndex::ALL[row], VectorIndex::ALL[col])
            };
            let image = apply(kind, state)?.state;
            matrix[(row, col)] = inner_product(state, &image)?;
        }
    }
    Ok(matrix)
}

/// <Z| T_{q q'} |Z> = [R^rank(-zeta_M)^T  M_z  R^rank(-zeta_L)]_{q q'} with
/// M_z the diagonal fundamental-state matrix.
pub fn mcs_tensor_decomposition(
    params: &CoherentParams,
    space: &SpaceSpec,
) -> Result<TensorDecomposition, McsError> {
    let built = mcs(params, space)?;
    let norm_sqr = built.state.norm_sqr();
    let report = mfs_expectations(&params.family, params.z)?;

    let reconstruct = |two_rank: u32, diag: Vec<Complex64>| -> DMatrix<Complex64> {
        let n = two_rank as usize + 1;
        let r_l = displacement_block(two_rank, -params.zeta_l).entries;
        let r_m = displacement_block(two_rank, -params.zeta_m).entries;
        let mut d = DMatrix::zeros(n, n);
        for (i, value) in diag.iter().enumerate() {
            d[(i, i)] = *value * norm_sqr;
        }
        r_m.transpose() * d * r_l
    };

    let (s_direct, s_reconstructed, s_defect) = if space.tower == Tower::HalfInteger {
        let direct = tensor_matrix(&built.state, 1)?;
        let recon = reconstruct(1, vec![report.s_matrix[0][0], report.s_matrix[1][1]]);
        let defect = (&direct - &recon).norm() / norm_sqr;
        (Some(direct), Some(recon), Some(defect))
    } else {
        (None, None, None)
    };

    let v_direct = tensor_matrix(&built.state, 2)?;
    let v_reconstructed = reconstruct(
        2,
        vec![
            report.v_matrix[0][0],
            report.v_matrix[1][1],
            report.v_matrix[2][2],
        ],
    );
    let v_defect = (&v_direct - &v_reconstructed).norm() / norm_sqr;

    Ok(TensorDecomposition {
        s_direct,
        s_reconstructed,
        s_defect,
        v_direct,
        v_reconstructed,
        v_defect,
    })
}

/// Apply the displacement-transformed operator D(zeta) Op D(zeta)^{-1}.
fn transformed_expectation(
    which: Frame,
    zeta: Complex64,
    terms: &[(Complex64, OperatorKind)],
    state: &TruncatedState,
    square: bool,
) -> Result<f64, McsError> {
    let undisplaced = apply_displacement(state, which, -zeta);
    let once = apply_linear(terms, &undisplaced)?.state;
    let inner = if square {
        apply_linear(terms, &once)?.state
    } else {
        once
    };
    let back = apply_displacement(&inner, which, zeta);
    Ok((inner_product(state, &back)? / state.norm_sqr()).re)
}

/// Defects of the transformed minimum-uncertainty equalities
/// <dJ1(zeta)^2>_Z <dJ2(zeta)^2>_Z = (1/4) <J0(zeta)>_Z^2 for both frames,
/// relative to the bound.
pub fn mcs_transformed_uncertainty(
    params: &CoherentParams,
    space: &SpaceSpec,
) -> Result<(f64, f64), McsError> {
    let state = mcs(params, space)?.state;
    let mut defects = [0.0f64; 2];
    for (slot, (which, zeta)) in [
        (Frame::Lab, params.zeta_l),
        (Frame::Mol, params.zeta_m),
    ]
    .into_iter()
    .enumerate()
    {
        let lab = which == Frame::Lab;
        let mut vars = [0.0f64; 3];
        let mut means = [0.0f64; 3];
        for axis in [0usize, 1, 2] {
            let terms = cartesian_terms(lab, axis);
            means[axis] = transformed_expectation(which, zeta, &terms, &state, false)?;
            let sq = transformed_expectation(which, zeta, &terms, &state, true)?;
            vars[axis] = sq - means[axis] * means[axis];
        }
        let product = vars[1] * vars[2];
        let bound = 0.25 * means[0] * means[0];
        defects[slot] = (product - bound).abs() / bound.max(1e-300);
    }
    Ok((defects[0], defects[1]))
}

/// Total fluctuation <(dJ)^2> = <J^2> - sum_i <J_i>^2 of the transformed
/// components on |Z>; equals the fundamental-state value.
pub fn transformed_total_fluctuation(
    params: &CoherentParams,
    space: &SpaceSpec,
    which: Frame,
) -> Result<f64, McsError> {
    let state = mcs(params, space)?.state;
    let zeta = match which {
        Frame::Lab => params.zeta_l,
        Frame::Mol => params.zeta_m,
    };
    let jsq = expectation_linear(&[(Complex64::new(1.0, 0.0), OperatorKind::Casimir)], &state)?.re;
    let mut sum_means = 0.0;
    for axis in [0usize, 1, 2] {
        let terms = cartesian_terms(which == Frame::Lab, axis);
        let mean = transformed_expectation(which, zeta, &terms, &state, false)?;
        sum_means += mean * mean;
    }
    Ok(jsq - sum_means)
}
