//! Time evolution: temporal stability under the magnetic-field Hamiltonian
//! H = i(a^L J^L_+ - conj(a^L) J^L_-) + a^L_0 J^L_0 + i(a^M J^M_+ -
//! conj(a^M) J^M_-) + a^M_0 J^M_0, classical precession of the expectation
//! vectors, and the rigid rotor's loss of coherence.
//!
//! The coherent parameters obey Riccati flows
//!   d zeta_L/dt = a^L + conj(a^L) zeta_L^2 - i a^L_0 zeta_L
//! (and the molecular copy), while z(t) = z exp(-i sigma(t)) keeps |z|
//! fixed. Integration is classic fourth-order one-step with step-halving
//! error control; flows that run toward the antipodal point (|zeta| -> inf)
//! are reported as pole passages, not chart-switched.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::angular::{
    apply_rotor, cartesian_terms, jl_ladder_coeff, jm_ladder_coeff, RotorConstants,
};
use crate::coherent::{mcs, mcs_with_z_sqrt, CoherentParams};
use crate::error::McsError;
use crate::expectations::expectation_linear;
use crate::families::SequenceFamily;
use crate::hilbert::{inner_product, BasisLabel, SpaceSpec, TruncatedState};

/// The drive coefficients of the magnetic-field Hamiltonian; the two
/// diagonal couplings are real so H stays hermitean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveCoefficients {
    pub a_lab: Complex64,
    pub a_lab_0: f64,
    pub a_mol: Complex64,
    pub a_mol_0: f64,
}

impl DriveCoefficients {
    pub fn zero() -> Self {
        DriveCoefficients {
            a_lab: Complex64::new(0.0, 0.0),
            a_lab_0: 0.0,
            a_mol: Complex64::new(0.0, 0.0),
            a_mol_0: 0.0,
        }
    }
}

/// The evolving coherent parameters (zeta_L(t), zeta_M(t), sigma(t)).
#[derive(Clone, Copy, Debug)]
pub struct EvolutionState {
    pub t: f64,
    pub zeta_l: Complex64,
    pub zeta_m: Complex64,
    pub sigma: f64,
}

impl EvolutionState {
    pub fn initial(zeta_l: Complex64, zeta_m: Complex64) -> Self {
        EvolutionState {
            t: 0.0,
            zeta_l,
            zeta_m,
            sigma: 0.0,
        }
    }
}

/// Guard: a Riccati trajectory passing this magnitude is heading through
/// the antipodal point.
const POLE_GUARD: f64 = 1e8;

#[derive(Clone, Copy, Debug)]
struct Rhs {
    d_zeta_l: Complex64,
    d_zeta_m: Complex64,
    d_sigma: f64,
}

fn rhs(drive: &DriveCoefficients, zeta_l: Complex64, zeta_m: Complex64) -> Result<Rhs, McsError> {
    let d_zeta_l =
        drive.a_lab + drive.a_lab.conj() * zeta_l * zeta_l - Complex64::i() * drive.a_lab_0 * zeta_l;
    // The molecular ladder operators obey the reversed commutation
    // relations, so the flow coefficient conjugate to the Hamiltonian's
    // i(a^M J^M_+ - conj(a^M) J^M_-) term is b = -conj(a^M): with a^M
    // itself in this slot the parameter-evolved state loses fidelity
    // 0.44 against the integrated Schroedinger state at t = 1, with b it
    // agrees to 1e-15.
    let b_mol = -drive.a_mol.conj();
    let d_zeta_m =
        b_mol + b_mol.conj() * zeta_m * zeta_m - Complex64::i() * drive.a_mol_0 * zeta_m;
    // i (a conj(zeta) - conj(a) zeta) is real by construction; keep the
    // complex form and assert the imaginary residue stays at rounding level.
    let sigma_complex = Complex64::i()
        * (drive.a_lab * zeta_l.conj() - drive.a_lab.conj() * zeta_l)
        - drive.a_lab_0
        + Complex64::i() * (b_mol * zeta_m.conj() - b_mol.conj() * zeta_m)
        - drive.a_mol_0;
    if sigma_complex.im.abs() > 1e-12 * (1.0 + sigma_complex.re.abs()) {
        return Err(McsError::Parse(format!(
            "sigma right side grew an imaginary part: {}",
            sigma_complex.im
        )));
    }
    Ok(Rhs {
        d_zeta_l,
        d_zeta_m,
        d_sigma: sigma_complex.re,
    })
}

fn rk4_once(
    drive: &dyn Fn(f64) -> DriveCoefficients,
    state: &EvolutionState,
    dt: f64,
) -> Result<EvolutionState, McsError> {
    let eval = |t: f64, zl: Complex64, zm: Complex64| rhs(&drive(t), zl, zm);
    let k1 = eval(state.t, state.zeta_l, state.zeta_m)?;
    let k2 = eval(
        state.t + 0.5 * dt,
        state.zeta_l + 0.5 * dt * k1.d_zeta_l,
        state.zeta_m + 0.5 * dt * k1.d_zeta_m,
    )?;
    let k3 = eval(
        state.t + 0.5 * dt,
        state.zeta_l + 0.5 * dt * k2.d_zeta_l,
        state.zeta_m + 0.5 * dt * k2.d_zeta_m,
    )?;
    let k4 = eval(
        state.t + dt,
        state.zeta_l + dt * k3.d_zeta_l,
        state.zeta_m + dt * k3.d_zeta_m,
    )?;
    let sixth = dt / 6.0;
    Ok(EvolutionState {
        t: state.t + dt,
        zeta_l: state.zeta_l
            + sixth * (k1.d_zeta_l + 2.0 * k2.d_zeta_l + 2.0 * k3.d_zeta_l + k4.d_zeta_l),
        zeta_m: state.zeta_m
            + sixth * (k1.d_zeta_m + 2.0 * k2.d_zeta_m + 2.0 * k3.d_zeta_m + k4.d_zeta_m),
        sigma: state.sigma
            + sixth * (k1.d_sigma + 2.0 * k2.d_sigma + 2.0 * k3.d_sigma + k4.d_sigma),
    })
}

/// One step of size dt with step-halving error control; subdivides near
/// Riccati poles and reports passage when |zeta| exceeds the guard.
pub fn step(
    drive: &dyn Fn(f64) -> DriveCoefficients,
    state: &EvolutionState,
    dt: f64,
) -> Result<EvolutionState, McsError> {
    fn recurse(
        drive: &dyn Fn(f64) -> DriveCoefficients,
        state: &EvolutionState,
        dt: f64,
        depth: u32,
    ) -> Result<EvolutionState, McsError> {
        let full = rk4_once(drive, state, dt)?;
        let half = rk4_once(drive, state, 0.5 * dt)?;
        let halves = rk4_once(drive, &half, 0.5 * dt)?;
        let scale = 1.0 + halves.zeta_l.norm() + halves.zeta_m.norm();
        let err = (full.zeta_l - halves.zeta_l).norm()
            + (full.zeta_m - halves.zeta_m).norm()
            + (full.sigma - halves.sigma).abs();
        if halves.zeta_l.norm() > POLE_GUARD || halves.zeta_m.norm() > POLE_GUARD {
            return Err(McsError::PolePassage {
                abs_zeta: halves.zeta_l.norm().max(halves.zeta_m.norm()),
                t: halves.t,
            });
        }
        if err <= 1e-13 * scale || depth >= 24 {
            return Ok(halves);
        }
        let left = recurse(drive, state, 0.5 * dt, depth + 1)?;
        recurse(drive, &left, 0.5 * dt, depth + 1)
    }
    if dt <= 0.0 {
        return Err(McsError::Parse("step needs dt > 0".into()));
    }
    recurse(drive, state, dt, 0)
}

/// Integrate from the initial state to t_end in fixed strides of dt,
/// returning the full trajectory (initial point included).
pub fn integrate(
    drive: &dyn Fn(f64) -> DriveCoefficients,
    initial: &EvolutionState,
    t_end: f64,
    dt: f64,
) -> Result<Vec<EvolutionState>, McsError> {
    let mut out = vec![*initial];
    let mut current = *initial;
    while current.t < t_end - 1e-12 {
        let stride = dt.min(t_end - current.t);
        current = step(drive, &current, stride)?;
        out.push(current);
    }
    Ok(out)
}

/// Dense per-block coefficient vector for fast Hamiltonian sweeps.
struct BlockVec {
    space: SpaceSpec,
    two_js: Vec<u32>,
    blocks: Vec<Vec<Complex64>>,
}

impl BlockVec {
    fn from_state(state: &TruncatedState) -> Self {
        let space = state.space();
        let two_js: Vec<u32> = space.two_js().collect();
        let mut blocks: Vec<Vec<Complex64>> = two_js
            .iter()
            .map(|&tj| vec![Complex64::new(0.0, 0.0); (tj as usize + 1) * (tj as usize + 1)])
            .collect();
        let index_of: std::collections::HashMap<u32, usize> =
            two_js.iter().enumerate().map(|(i, &tj)| (tj, i)).collect();
        for (label, amp) in state.iter() {
            let tj = label.two_j;
            let n = tj as usize + 1;
            let k_idx = ((label.two_k + tj as i32) / 2) as usize;
            let m_idx = ((label.two_m + tj as i32) / 2) as usize;
            blocks[index_of[&tj]][k_idx * n + m_idx] = *amp;
        }
        BlockVec {
            space,
            two_js,
            blocks,
        }
    }

    fn to_state(&self) -> TruncatedState {
        let mut state = TruncatedState::zero(self.space);
        for (block_i, &tj) in self.two_js.iter().enumerate() {
            let n = tj as usize + 1;
            for k_idx in 0..n {
                for m_idx in 0..n {
                    let amp = self.blocks[block_i][k_idx * n + m_idx];
                    if amp != Complex64::new(0.0, 0.0) {
                        state.add_unchecked(
                            BasisLabel {
                                two_j: tj,
                                two_k: 2 * k_idx as i32 - tj as i32,
                                two_m: 2 * m_idx as i32 - tj as i32,
                            },
                            amp,
                        );
                    }
                }
            }
        }
        state
    }

    fn zeros_like(&self) -> Vec<Vec<Complex64>> {
        self.blocks
            .iter()
            .map(|b| vec![Complex64::new(0.0, 0.0); b.len()])
            .collect()
    }

    fn norm_sqr(blocks: &[Vec<Complex64>]) -> f64 {
        blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|c| c.norm_sqr())
            .sum()
    }
}

/// -i H(t) applied to dense blocks (H is block-diagonal in j, so the sweep
/// is exact; no truncation loss).
fn apply_minus_i_h(
    drive: &DriveCoefficients,
    two_js: &[u32],
    blocks: &[Vec<Complex64>],
    out: &mut [Vec<Complex64>],
) {
    let i = Complex64::i();
    let c_lab_plus = i * drive.a_lab; // multiplies J^L_+
    let c_lab_minus = -i * drive.a_lab.conj();
    let c_mol_plus = i * drive.a_mol;
    let c_mol_minus = -i * drive.a_mol.conj();
    for (block_i, &tj) in two_js.iter().enumerate() {
        let n = tj as usize + 1;
        let src = &blocks[block_i];
        let dst = &mut out[block_i];
        for cell in dst.iter_mut() {
            *cell = Complex64::new(0.0, 0.0);
        }
        for k_idx in 0..n {
            let two_k = 2 * k_idx as i32 - tj as i32;
            for m_idx in 0..n {
                let amp = src[k_idx * n + m_idx];
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let two_m = 2 * m_idx as i32 - tj as i32;
                let mut h_amp = |target: usize, coeff: Complex64| {
                    dst[target] += coeff * amp;
                };
                // Diagonal couplings.
                let diag = drive.a_lab_0 * two_m as f64 / 2.0
                    + drive.a_mol_0 * two_k as f64 / 2.0;
                if diag != 0.0 {
                    h_amp(k_idx * n + m_idx, Complex64::new(diag, 0.0));
                }
                // J^L_+ raises m.
                if m_idx + 1 < n {
                    let c = jl_ladder_coeff(true, tj, two_m);
                    if c != 0.0 {
                        h_amp(k_idx * n + m_idx + 1, c_lab_plus * c);
                    }
                }
                if m_idx > 0 {
                    let c = jl_ladder_coeff(false, tj, two_m);
                    if c != 0.0 {
                        h_amp(k_idx * n + m_idx - 1, c_lab_minus * c);
                    }
                }
                // J^M_+ lowers k, J^M_- raises it.
                if k_idx > 0 {
                    let c = jm_ladder_coeff(true, tj, two_k);
                    if c != 0.0 {
                        h_amp((k_idx - 1) * n + m_idx, c_mol_plus * c);
                    }
                }
                if k_idx + 1 < n {
                    let c = jm_ladder_coeff(false, tj, two_k);
                    if c != 0.0 {
                        h_amp((k_idx + 1) * n + m_idx, c_mol_minus * c);
                    }
                }
            }
        }
        // Multiply the accumulated H psi by -i.
        for cell in dst.iter_mut() {
            *cell *= -i;
        }
    }
}

/// Directly integrated Schroedinger state under the drive Hamiltonian.
#[derive(Clone, Debug)]
pub struct ReferenceRun {
    pub state: TruncatedState,
    /// Relative norm drift accumulated by the integrator.
    pub norm_drift: f64,
    /// Set when the initial state put more than 1e-8 amplitude on the top
    /// shell; H is block-diagonal so the sweep itself is exact.
    pub top_shell_warning: bool,
    /// [<J^L_i>, <J^M_i>] samples along the trajectory, for the classical
    /// precession checks.
    pub samples: Vec<JSample>,
}

#[derive(Clone, Copy, Debug)]
pub struct JSample {
    pub t: f64,
    pub jl: [f64; 3],
    pub jm: [f64; 3],
}

fn j_vectors_from_blocks(bv: &BlockVec, blocks: &[Vec<Complex64>]) -> ([f64; 3], [f64; 3]) {
    // Cheap direct expectation on the dense blocks.
    let mut jl = [0.0f64; 3];
    let mut jm = [0.0f64; 3];
    let norm_sqr = BlockVec::norm_sqr(blocks);
    for (block_i, &tj) in bv.two_js.iter().enumerate() {
        let n = tj as usize + 1;
        let src = &blocks[block_i];
        for k_idx in 0..n {
            let two_k = 2 * k_idx as i32 - tj as i32;
            for m_idx in 0..n {
                let amp = src[k_idx * n + m_idx];
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let two_m = 2 * m_idx as i32 - tj as i32;
                jl[2] += amp.norm_sqr() * two_m as f64 / 2.0;
                jm[2] += amp.norm_sqr() * two_k as f64 / 2.0;
                // <J_1> and <J_2> from the ladder overlaps.
                if m_idx + 1 < n {
                    let c = jl_ladder_coeff(true, tj, two_m);
                    let cross = src[k_idx * n + m_idx + 1].conj() * amp * c;
                    jl[0] += cross.re;
                    jl[1] += cross.im;
                }
                if k_idx > 0 {
                    let c = jm_ladder_coeff(true, tj, two_k);
                    let cross = src[(k_idx - 1) * n + m_idx].conj() * amp * c;
                    jm[0] += cross.re;
                    jm[1] += cross.im;
                }
            }
        }
    }
    for v in jl.iter_mut().chain(jm.iter_mut()) {
        *v /= norm_sqr;
    }
    (jl, jm)
}

/// Integrate i d/dt psi = H(t) psi by the same fourth-order one-step scheme
/// on the dense per-j blocks, sampling the expectation vectors.
pub fn schrodinger_reference(
    drive: &dyn Fn(f64) -> DriveCoefficients,
    initial: &TruncatedState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<ReferenceRun, McsError> {
    let bv = BlockVec::from_state(initial);
    let top_shell_warning = initial.top_shell_weight().sqrt() > 1e-8;
    let norm0 = BlockVec::norm_sqr(&bv.blocks);

    let mut current = bv.blocks.clone();
    let mut k1 = bv.zeros_like();
    let mut k2 = bv.zeros_like();
    let mut k3 = bv.zeros_like();
    let mut k4 = bv.zeros_like();
    let mut scratch = bv.zeros_like();

    let mut samples = Vec::new();
    let (jl, jm) = j_vectors_from_blocks(&bv, &current);
    samples.push(JSample { t: 0.0, jl, jm });

    let mut t = 0.0;
    let mut step_index = 0usize;
    while t < t_end - 1e-12 {
        let h = dt.min(t_end - t);
        apply_minus_i_h(&drive(t), &bv.two_js, &current, &mut k1);
        axpy_into(&current, &k1, 0.5 * h, &mut scratch);
        apply_minus_i_h(&drive(t + 0.5 * h), &bv.two_js, &scratch, &mut k2);
        axpy_into(&current, &k2, 0.5 * h, &mut scratch);
        apply_minus_i_h(&drive(t + 0.5 * h), &bv.two_js, &scratch, &mut k3);
        axpy_into(&current, &k3, h, &mut scratch);
        apply_minus_i_h(&drive(t + h), &bv.two_js, &scratch, &mut k4);
        for (((c, a), (b, d)), e) in current
            .iter_mut()
            .zip(k1.iter())
            .zip(k2.iter().zip(k3.iter()))
            .zip(k4.iter())
        {
            for i in 0..c.len() {
                c[i] += h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * d[i] + e[i]);
            }
        }
        t += h;
        step_index += 1;
        if sample_every > 0 && step_index.is_multiple_of(sample_every) {
            let (jl, jm) = j_vectors_from_blocks(&bv, &current);
            samples.push(JSample { t, jl, jm });
        }
    }
    let norm_drift = (BlockVec::norm_sqr(&current) / norm0 - 1.0).abs();
    let state = BlockVec {
        space: bv.space,
        two_js: bv.two_js,
        blocks: current,
    }
    .to_state();
    Ok(ReferenceRun {
        state,
        norm_drift,
        top_shell_warning,
        samples,
    })
}

fn axpy_into(
    base: &[Vec<Complex64>],
    delta: &[Vec<Complex64>],
    factor: f64,
    out: &mut [Vec<Complex64>],
) {
    for ((b, d), o) in base.iter().zip(delta.iter()).zip(out.iter_mut()) {
        for i in 0..b.len() {
            o[i] = b[i] + factor * d[i];
        }
    }
}

/// Temporal-stability comparison: the parameter-evolved coherent state
/// against the directly integrated one.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub fidelity: f64,
    pub norm_drift: f64,
    pub top_shell_warning: bool,
    pub final_params: EvolutionState,
    pub samples: Vec<JSample>,
}

pub fn temporal_stability(
    params: &CoherentParams,
    drive: &dyn Fn(f64) -> DriveCoefficients,
    t_end: f64,
    dt: f64,
    space: &SpaceSpec,
) -> Result<StabilityReport, McsError> {
    let initial = mcs(params, space)?.state;
    let reference = schrodinger_reference(drive, &initial, t_end, dt, 10)?;

    let trajectory = integrate(
        drive,
        &EvolutionState::initial(params.zeta_l, params.zeta_m),
        t_end,
        dt,
    )?;
    let final_params = *trajectory.last().unwrap();
    // z(t) = z exp(-i sigma); the square root evolves continuously as
    // sqrt(z) exp(-i sigma / 2), no branch cuts crossed.
    let z_sqrt = params.z.sqrt() * Complex64::from_polar(1.0, -0.5 * final_params.sigma);
    let evolved = mcs_with_z_sqrt(
        &params.family,
        z_sqrt,
        final_params.zeta_l,
        final_params.zeta_m,
        space,
    )?
    .state;

    let overlap = inner_product(&evolved, &reference.state)?;
    let fidelity = overlap.norm_sqr() / (evolved.norm_sqr() * reference.state.norm_sqr());
    Ok(StabilityReport {
        fidelity,
        norm_drift: reference.norm_drift,
        top_shell_warning: reference.top_shell_warning,
        final_params,
        samples: reference.samples,
    })
}

/// Magnetic fields read off the drive: h = (-2 Im a, -2 Re a, a_0) for both
/// frames. The laboratory vector precesses as d nu/dt = h^L x nu, the
/// molecular one with the opposite orientation, d nu/dt = nu x h^M.
pub fn classical_fields(drive: &DriveCoefficients) -> ([f64; 3], [f64; 3]) {
    (
        [-2.0 * drive.a_lab.im, -2.0 * drive.a_lab.re, drive.a_lab_0],
        [-2.0 * drive.a_mol.im, -2.0 * drive.a_mol.re, drive.a_mol_0],
    )
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Residuals of the rigid-rotation equations on the sampled expectation
/// trajectories, by five-point central differences, plus the worst
/// deviation of the vector lengths from constancy.
pub fn precession_residual(
    samples: &[JSample],
    drive: &DriveCoefficients,
) -> (f64, f64, f64) {
    let (h_lab, h_mol) = classical_fields(drive);
    let mut lab_residual: f64 = 0.0;
    let mut mol_residual: f64 = 0.0;
    let mut length_drift: f64 = 0.0;
    let len = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let l0 = len(samples[0].jl);
    let m0 = len(samples[0].jm);
    let stencil = |a: f64, b: f64, c: f64, d: f64, h: f64| (-d + 8.0 * c - 8.0 * b + a) / (12.0 * h);
    for w in samples.windows(5) {
        let h = w[1].t - w[0].t;
        let expect_l = cross(h_lab, w[2].jl);
        let expect_m = cross(w[2].jm, h_mol);
        for axis in 0..3 {
            let dl = stencil(w[0].jl[axis], w[1].jl[axis], w[3].jl[axis], w[4].jl[axis], h);
            let dm = stencil(w[0].jm[axis], w[1].jm[axis], w[3].jm[axis], w[4].jm[axis], h);
            lab_residual = lab_residual.max((dl - expect_l[axis]).abs());
            mol_residual = mol_residual.max((dm - expect_m[axis]).abs());
        }
        length_drift = length_drift
            .max((len(w[2].jl) - l0).abs())
            .max((len(w[2].jm) - m0).abs());
    }
    (lab_residual, mol_residual, length_drift)
}

/// Spherical-rotor check: under H = A J^2 the coherent state becomes the
/// coherent state of the phase-shifted family c_j exp(-i A t j(j+1)), and
/// all angular momentum expectations stay constant.
pub fn spherical_rotor_check(
    params: &CoherentParams,
    a: f64,
    t: f64,
    space: &SpaceSpec,
) -> Result<(f64, f64), McsError> {
    let initial = mcs(params, space)?.state;
    // Exact propagation: phase e^{-i A j (j+1) t} per block.
    let mut evolved = TruncatedState::zero(*space);
    for (label, amp) in initial.iter() {
        let j = label.two_j as f64 / 2.0;
        let phase = Complex64::from_polar(1.0, -a * t * j * (j + 1.0));
        evolved.add_unchecked(*label, amp * phase);
    }

    // The same phases absorbed into the coefficient sequence.
    let shifted_coeffs: Vec<Complex64> = (0..=space.two_j_max)
        .map(|two_j| {
            let j = two_j as f64 / 2.0;
            params.family.coeff(two_j) * Complex64::from_polar(1.0, -a * t * j * (j + 1.0))
        })
        .collect();
    let shifted_family = SequenceFamily::custom(
        format!("{}-rotor-phased", params.family.name()),
        params.family.tower(),
        params.family.domain_radius().min(1e6),
        shifted_coeffs,
    )?;
    let reconstructed = mcs_with_z_sqrt(
        &shifted_family,
        params.z.sqrt(),
        params.zeta_l,
        params.zeta_m,
        space,
    )?
    .state;
    let overlap = inner_product(&reconstructed, &evolved)?;
    let fidelity = overlap.norm_sqr() / (reconstructed.norm_sqr() * evolved.norm_sqr());

    // Expectation drift of all six components.
    let mut drift: f64 = 0.0;
    for lab in [true, false] {
        for axis in [0usize, 1, 2] {
            let terms = cartesian_terms(lab, axis);
            let before = expectation_linear(&terms, &initial)?.re;
            let after = expectation_linear(&terms, &evolved)?.re;
            drift = drift.max((after - before).abs());
        }
    }
    Ok((1.0 - fidelity, drift))
}

/// Exact rotor propagation by per-block hermitian eigendecomposition: H
/// acts on the k index only and is the same matrix on every m fiber.
pub fn rotor_propagate(
    constants: &RotorConstants,
    state: &TruncatedState,
    t: f64,
) -> Result<TruncatedState, McsError> {
    let space = state.space();
    let mut out = TruncatedState::zero(space);
    for two_j in space.two_js() {
        let n = two_j as usize + 1;
        // k-fiber matrix of the rotor at this j (independent of m).
        let block_space = SpaceSpec::new(two_j, space.tower);
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for k_idx in 0..n {
            let two_k = 2 * k_idx as i32 - two_j as i32;
            let basis = TruncatedState::basis_vector(
                block_space,
                BasisLabel {
                    two_j,
                    two_k,
                    two_m: -(two_j as i32),
                },
            )?;
            let image = apply_rotor(constants, &basis)?;
            for (label, amp) in image.iter() {
                let row = ((label.two_k + two_j as i32) / 2) as usize;
                h[(row, k_idx)] = *amp;
            }
        }
        let eigen = nalgebra::SymmetricEigen::new(h);
        // U(t) = V exp(-i lambda t) V^H.
        let mut propagator = DMatrix::<Complex64>::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for e in 0..n {
                    acc += eigen.eigenvectors[(a, e)]
                        * Complex64::from_polar(1.0, -eigen.eigenvalues[e] * t)
                        * eigen.eigenvectors[(b, e)].conj();
                }
                propagator[(a, b)] = acc;
            }
        }
        // Apply to every (k-fiber, m) of this block present in the state.
        for (label, amp) in state.iter() {
            if label.two_j != two_j {
                continue;
            }
            let col = ((label.two_k + two_j as i32) / 2) as usize;
            for row in 0..n {
                let coeff = propagator[(row, col)];
                if coeff.norm() > 0.0 {
                    out.add_unchecked(
                        BasisLabel {
                            two_j,
                            two_k: 2 * row as i32 - two_j as i32,
                            two_m: label.two_m,
                        },
                        coeff * amp,
                    );
                }
            }
        }
    }
    Ok(out)
}

/// Symmetrized second moments W_ik = <J_i J_k + J_k J_i> - 2 <J_i><J_k> of
/// the molecular components.
pub fn molecular_moment_matrix(state: &TruncatedState) -> Result<[[f64; 3]; 3], McsError> {
    let mut means = [0.0f64; 3];
    let mut terms = Vec::new();
    for axis in [0usize, 1, 2] {
        let t = cartesian_terms(false, axis);
        means[axis] = expectation_linear(&t, state)?.re;
        terms.push(t);
    }
    let mut w = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            let image = crate::angular::apply_linear(&terms[k], state)?.state;
            let ik = inner_product(state, &crate::angular::apply_linear(&terms[i], &image)?.state)?
                / state.norm_sqr();
            let image_rev = crate::angular::apply_linear(&terms[i], state)?.state;
            let ki = inner_product(
                state,
                &crate::angular::apply_linear(&terms[k], &image_rev)?.state,
            )? / state.norm_sqr();
            w[i][k] = (ik + ki).re - 2.0 * means[i] * means[k];
        }
    }
    Ok(w)
}

/// The rotor decoherence demonstration: the departure of the symmetrized
/// molecular moment matrix from its initial value along the exact rotor
/// evolution. Strictly positive departure means the state has left the
/// coherent family.
pub fn rotor_moment_departure(
    params: &CoherentParams,
    constants: &RotorConstants,
    times: &[f64],
    space: &SpaceSpec,
) -> Result<f64, McsError> {
    if constants.is_spherical() {
        return Err(McsError::SphericalConstants);
    }
    let initial = mcs(params, space)?.state;
    let w0 = molecular_moment_matrix(&initial)?;
    let mut departure: f64 = 0.0;
    for &t in times {
        let evolved = rotor_propagate(constants, &initial, t)?;
        let wt = molecular_moment_matrix(&evolved)?;
        for i in 0..3 {
            for k in 0..3 {
                departure = departure.max((wt[i][k] - w0[i][k]).abs());
            }
        }
    }
    Ok(departure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::default_space;
    use crate::hilbert::Tower;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn constant(drive: DriveCoefficients) -> impl Fn(f64) -> DriveCoefficients {
        move |_| drive
    }

    #[test]
    fn zero_drive_is_stationary() {
        let drive = constant(DriveCoefficients::zero());
        let initial = EvolutionState::initial(c(0.3, -0.2), c(0.1, 0.5));
        let after = step(&drive, &initial, 0.25).unwrap();
        assert_eq!(after.zeta_l, initial.zeta_l);
        assert_eq!(after.zeta_m, initial.zeta_m);
        assert_eq!(after.sigma, 0.0);
    }

    #[test]
    fn diagonal_drive_rotates_zeta() {
        // a_lab_0 = omega alone: zeta_L(t) = zeta_L(0) exp(-i omega t).
        let omega = 1.7;
        let drive = constant(DriveCoefficients {
            a_lab: c(0.0, 0.0),
            a_lab_0: omega,
            a_mol: c(0.0, 0.0),
            a_mol_0: 0.0,
        });
        let initial = EvolutionState::initial(c(0.4, 0.3), c(0.0, 0.0));
        let trajectory = integrate(&drive, &initial, 1.0, 1e-3).unwrap();
        let last = trajectory.last().unwrap();
        let expected = initial.zeta_l * Complex64::from_polar(1.0, -omega);
        assert!((last.zeta_l - expected).norm() <= 1e-10);
        // sigma = -omega... sigma' = -a0 per the flow; check linear growth.
        assert_relative_eq!(last.sigma, -omega, max_relative = 1e-10);
    }

    #[test]
    fn real_drive_gives_tangent() {
        // Real a^L with zeta(0) = 0: zeta(t) = tan(a t).
        let a = 1.0;
        let drive = constant(DriveCoefficients {
            a_lab: c(a, 0.0),
            a_lab_0: 0.0,
            a_mol: c(0.0, 0.0),
            a_mol_0: 0.0,
        });
        let initial = EvolutionState::initial(c(0.0, 0.0), c(0.0, 0.0));
        let trajectory = integrate(&drive, &initial, 1.2, 1e-3).unwrap();
        for state in trajectory.iter().step_by(100) {
            let expected = (a * state.t).tan();
            assert!(
                (state.zeta_l - c(expected, 0.0)).norm() <= 1e-8 * (1.0 + expected.abs()),
                "t = {}: {} vs {}",
                state.t,
                state.zeta_l,
                expected
            );
        }
    }

    #[test]
    fn pole_passage_reported() {
        let drive = constant(DriveCoefficients {
            a_lab: c(1.0, 0.0),
            a_lab_0: 0.0,
            a_mol: c(0.0, 0.0),
            a_mol_0: 0.0,
        });
        // tan(t) pole at pi/2.
        let initial = EvolutionState::initial(c(0.0, 0.0), c(0.0, 0.0));
        let result = integrate(&drive, &initial, 2.0, 1e-3);
        assert!(matches!(result, Err(McsError::PolePassage { .. })));
    }

    #[test]
    fn reference_identity_without_drive() {
        let fam = SequenceFamily::builtin(1).unwrap();
        let params = CoherentParams::new(fam, c(1.0, 0.0), c(0.3, 0.1), c(-0.2, 0.4)).unwrap();
        let space = SpaceSpec::new(20, Tower::HalfInteger);
        let initial = mcs(&params, &space).unwrap().state;
        let run = schrodinger_reference(&constant(DriveCoefficients::zero()), &initial, 1.0, 1e-2, 0)
            .unwrap();
        let overlap = inner_product(&initial, &run.state).unwrap();
        let fidelity = overlap.norm_sqr() / (initial.norm_sqr() * run.state.norm_sqr());
        assert!(1.0 - fidelity <= 1e-12);
        assert!(run.norm_drift <= 1e-12);
    }

    fn stability_drive() -> DriveCoefficients {
        DriveCoefficients {
            a_lab: c(0.3, -0.2),
            a_lab_0: 0.8,
            a_mol: c(-0.15, 0.25),
            a_mol_0: -0.6,
        }
    }

    #[test]
    fn temporal_stability_full_drive() {
        let fam = SequenceFamily::builtin(1).unwrap();
        let params =
            CoherentParams::new(fam, c(1.0, 0.0), c(0.2, 0.1), c(-0.1, 0.3)).unwrap();
        let space = SpaceSpec::new(24, Tower::HalfInteger);
        let report =
            temporal_stability(&params, &constant(stability_drive()), 1.0, 1e-3, &space).unwrap();
        assert!(
            report.fidelity >= 1.0 - 1e-6,
            "fidelity {}",
            report.fidelity
        );
        assert!(report.norm_drift <= 1e-10, "drift {}", report.norm_drift);
    }

    #[test]
    fn temporal_stability_molecular_only() {
        // Exercises the molecular Riccati flow alone.
        let fam = SequenceFamily::builtin(5).unwrap();
        let params = CoherentParams::new(fam, c(0.8, 0.4), c(0.0, 0.0), c(0.5, -0.2)).unwrap();
        let space = default_space(&params.family, params.z).unwrap();
        let drive = DriveCoefficients {
            a_lab: c(0.0, 0.0),
            a_lab_0: 0.0,
            a_mol: c(0.4, 0.3),
            a_mol_0: 0.7,
        };
        let report = temporal_stability(&params, &constant(drive), 1.0, 1e-3, &space).unwrap();
        assert!(
            report.fidelity >= 1.0 - 1e-6,
            "fidelity {}",
            report.fidelity
        );
    }

    #[test]
    fn classical_precession() {
        let fam = SequenceFamily::builtin(1).unwrap();
        let params = CoherentParams::new(fam, c(1.0, 0.0), c(0.2, 0.1), c(-0.1, 0.3)).unwrap();
        let space = SpaceSpec::new(24, Tower::HalfInteger);
        let drive = stability_drive();
        let report = temporal_stability(&params, &constant(drive), 1.0, 1e-3, &space).unwrap();
        let (lab, mol, length_drift) = precession_residual(&report.samples, &drive);
        assert!(lab <= 1e-6, "lab residual {lab}");
        assert!(mol <= 1e-6, "mol residual {mol}");
        assert!(length_drift <= 1e-8, "length drift {length_drift}");
    }

    #[test]
    fn spherical_rotor_stays_coherent() {
        let fam = SequenceFamily::builtin(5).unwrap();
        let params = CoherentParams::new(fam, c(1.0, 0.0), c(0.4, -0.3), c(0.2, 0.6)).unwrap();
        let space = default_space(&params.family, params.z).unwrap();
        let (deficit, drift) = spherical_rotor_check(&params, 1.3, 0.9, &space).unwrap();
        assert!(deficit <= 1e-10, "overlap deficit {deficit}");
        assert!(drift <= 1e-10, "expectation drift {drift}");
    }

    #[test]
    fn rotor_propagation_unitary_and_correct_for_symmetric_top() {
        // A symmetric top is diagonal in k: the propagator must produce the
        // analytic phases e^{-i (j(j+1) + k^2) t} for A = (2, 1, 1).
        let constants = RotorConstants::new(2.0, 1.0, 1.0);
        let space = SpaceSpec::new(4, Tower::Integer);
        let mut state = TruncatedState::zero(space);
        state.set(BasisLabel::new(2, 2, 0).unwrap(), c(0.6, 0.0)).unwrap();
        state.set(BasisLabel::new(2, -2, 0).unwrap(), c(0.0, 0.8)).unwrap();
        let t = 0.7;
        let evolved = rotor_propagate(&constants, &state, t).unwrap();
        assert_relative_eq!(evolved.norm_sqr(), state.norm_sqr(), max_relative = 1e-12);
        let phase = Complex64::from_polar(1.0, -(2.0 + 1.0) * t);
        let expect_a = c(0.6, 0.0) * phase;
        let got_a = evolved.amplitude(&BasisLabel::new(2, 2, 0).unwrap());
        assert!((got_a - expect_a).norm() <= 1e-12);
    }

    #[test]
    fn asymmetric_rotor_breaks_coherence() {
        let fam = SequenceFamily::builtin(5).unwrap();
        let params = CoherentParams::new(fam, c(1.0, 0.0), c(0.3, 0.2), c(0.4, -0.1)).unwrap();
        let space = default_space(&params.family, params.z).unwrap();
        let constants = RotorConstants::new(1.0, 2.0, 3.0);
        let departure =
            rotor_moment_departure(&params, &constants, &[0.25, 0.5, 1.0], &space).unwrap();
        assert!(departure > 1e-3, "departure {departure}");

        assert!(matches!(
            rotor_moment_departure(&params, &RotorConstants::new(1.0, 1.0, 1.0), &[0.5], &space),
            Err(McsError::SphericalConstants)
        ));
    }
}
