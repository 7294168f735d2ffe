//! Fundamental states |z> = sum_j c_j z^j |j,-j,-j>, their coherent images
//! |Z> = D_L(zeta_L) D_M(zeta_M) |z>, closed-form overlaps, and the rotation
//! group action on the coherent parameters.
//!
//! For half-integer towers z^j needs a branch of z^{1/2}; states are built
//! from an explicit square root (principal by default) and every power is an
//! integer power of it. Rotations multiply z by a unimodular factor whose
//! square root is resolved statewise, never by tracking a global phase.
//!
//! The displacement parameters map to directions on the sphere through
//! zeta = -tan(theta/2) e^{-i phi}, fixed by requiring
//! (Lambda + n.J)|Z> = 0; the laboratory direction picks up components
//! (-2 Re zeta, +2 Im zeta, 1 - |zeta|^2)/(1 + |zeta|^2) and the molecular
//! one flips the second component.

use num_complex::Complex64;

use crate::angular::{apply, apply_linear, cartesian_terms, OperatorKind};
use crate::error::McsError;
use crate::families::{
    adequate_two_j_max, norm_series_complex, shell_tail_weight, SequenceFamily,
};
use crate::hilbert::{BasisLabel, SpaceSpec, Tower, TruncatedState};
use crate::wigner::{rotation_block_from_uv, EulerAngles, WignerBlock};

/// Which rotation family acts: laboratory (on m) or molecular (on k).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Lab,
    Mol,
}

/// Full parameterization Z = (z, zeta_L, zeta_M) over a coefficient family.
#[derive(Clone, Debug)]
pub struct CoherentParams {
    pub family: SequenceFamily,
    pub z: Complex64,
    pub zeta_l: Complex64,
    pub zeta_m: Complex64,
}

impl CoherentParams {
    pub fn new(
        family: SequenceFamily,
        z: Complex64,
        zeta_l: Complex64,
        zeta_m: Complex64,
    ) -> Result<Self, McsError> {
        let radius = family.domain_radius();
        if !z.norm().is_finite() || z.norm() >= radius {
            return Err(McsError::DomainViolation {
                x: z.norm_sqr(),
                radius_sqr: radius * radius,
            });
        }
        Ok(CoherentParams {
            family,
            z,
            zeta_l,
            zeta_m,
        })
    }

    /// The fundamental state parameters (zeta_L = zeta_M = 0).
    pub fn fundamental(family: SequenceFamily, z: Complex64) -> Result<Self, McsError> {
        Self::new(family, z, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }
}

/// Cayley-Klein parameters of a rotation, |u|^2 + |v|^2 = 1.
#[derive(Clone, Copy, Debug)]
pub struct RotationParams {
    u: Complex64,
    v: Complex64,
}

impl RotationParams {
    pub fn from_uv(u: Complex64, v: Complex64) -> Result<Self, McsError> {
        let norm = u.norm_sqr() + v.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(McsError::Parse(format!(
                "|u|^2 + |v|^2 = {norm} is not 1"
            )));
        }
        Ok(RotationParams { u, v })
    }

    /// u = e^{-i(alpha+gamma)/2} cos(beta/2), v = e^{i(alpha-gamma)/2} sin(beta/2).
    pub fn from_euler(angles: &EulerAngles) -> Self {
        let (u, v) = angles.cayley_klein();
        RotationParams { u, v }
    }

    pub fn identity() -> Self {
        RotationParams {
            u: Complex64::new(1.0, 0.0),
            v: Complex64::new(0.0, 0.0),
        }
    }

    pub fn u(&self) -> Complex64 {
        self.u
    }

    pub fn v(&self) -> Complex64 {
        self.v
    }

    /// Group product self * other.
    pub fn compose(&self, other: &RotationParams) -> RotationParams {
        let (u, v) = crate::wigner::compose_uv((self.u, self.v), (other.u, other.v));
        RotationParams { u, v }
    }
}

/// A constructed state together with the squared shell weight lost to
/// truncation (the part of the series beyond j_max).
#[derive(Clone, Debug)]
pub struct BuiltState {
    pub state: TruncatedState,
    pub tail_weight: f64,
}

/// A space large enough that the fundamental-state tail stays below the
/// requested fraction of the norm (or the cap of the truncation policy).
pub fn default_space(family: &SequenceFamily, z: Complex64) -> Result<SpaceSpec, McsError> {
    let two_j_max = adequate_two_j_max(family, z.norm(), 1e-16)?;
    Ok(SpaceSpec::new(two_j_max, family.tower()))
}

fn check_family_space(family: &SequenceFamily, space: &SpaceSpec) -> Result<(), McsError> {
    // An integer-tower family embeds in a half-integer space (its odd shells
    // carry zero weight), but not the other way around.
    if family.tower() == Tower::HalfInteger && space.tower == Tower::Integer {
        return Err(McsError::TowerMismatch {
            family: family.tower().to_string(),
            space: space.tower.to_string(),
        });
    }
    Ok(())
}

/// The fundamental state sum_j c_j z^j |j,-j,-j> on a truncated space.
pub fn mfs(
    family: &SequenceFamily,
    z: Complex64,
    space: &SpaceSpec,
) -> Result<BuiltState, McsError> {
    mfs_with_z_sqrt(family, z.sqrt(), space)
}

/// Fundamental state built from an explicit square root of z.
pub fn mfs_with_z_sqrt(
    family: &SequenceFamily,
    z_sqrt: Complex64,
    space: &SpaceSpec,
) -> Result<BuiltState, McsError> {
    check_family_space(family, space)?;
    let radius = family.domain_radius();
    if !z_sqrt.norm_sqr().is_finite() || z_sqrt.norm_sqr() >= radius {
        return Err(McsError::DomainViolation {
            x: z_sqrt.norm_sqr().powi(2),
            radius_sqr: radius * radius,
        });
    }
    let mut state = TruncatedState::zero(*space);
    for two_j in space.two_js() {
        let amp = family.coeff(two_j) * z_sqrt.powu(two_j);
        if amp != Complex64::new(0.0, 0.0) {
            state.set(BasisLabel::stretched(two_j), amp)?;
        }
    }
    let tail_weight = shell_tail_weight(
        family,
        z_sqrt.norm_sqr(),
        space.two_j_max + space.tower.two_j_step(),
    )?;
    Ok(BuiltState { state, tail_weight })
}

/// sigma^j_k = sqrt((2j)! / ((j-k)! (j+k)!)), the square root of a binomial.
fn sigma(two_j: u32, two_k: i32) -> f64 {
    crate::families::binomial(two_j, ((two_j as i32 + two_k) / 2) as u32).sqrt()
}

/// The coherent state from the explicit decomposition
/// |Z> = sum sigma^j_k sigma^j_m zeta_L^{j+m} zeta_M^{j+k} z^j c_j
///       (1+|zeta_L|^2)^{-j} (1+|zeta_M|^2)^{-j} |j k m>.
pub fn mcs(params: &CoherentParams, space: &SpaceSpec) -> Result<BuiltState, McsError> {
    mcs_with_z_sqrt(
        &params.family,
        params.z.sqrt(),
        params.zeta_l,
        params.zeta_m,
        space,
    )
}

/// Coherent state built from an explicit square root of z; rotations and
/// time evolution use this to keep half-integer phases continuous.
pub fn mcs_with_z_sqrt(
    family: &SequenceFamily,
    z_sqrt: Complex64,
    zeta_l: Complex64,
    zeta_m: Complex64,
    space: &SpaceSpec,
) -> Result<BuiltState, McsError> {
    check_family_space(family, space)?;
    let radius = family.domain_radius();
    if !z_sqrt.norm_sqr().is_finite() || z_sqrt.norm_sqr() >= radius {
        return Err(McsError::DomainViolation {
            x: z_sqrt.norm_sqr().powi(2),
            radius_sqr: radius * radius,
        });
    }
    let norm_l = 1.0 + zeta_l.norm_sqr();
    let norm_m = 1.0 + zeta_m.norm_sqr();
    // c_j z^j (1+|zl|^2)^{-j} (1+|zm|^2)^{-j} as powers of a single square root.
    let base_sqrt = z_sqrt / (norm_l * norm_m).sqrt();
    let mut state = TruncatedState::zero(*space);
    for two_j in space.two_js() {
        let block_base = family.coeff(two_j) * base_sqrt.powu(two_j);
        if block_base == Complex64::new(0.0, 0.0) {
            continue;
        }
        let tj = two_j as i32;
        // Powers of zeta_L and zeta_M from 0 to 2j.
        let mut zl_pows = Vec::with_capacity(two_j as usize + 1);
        let mut zm_pows = Vec::with_capacity(two_j as usize + 1);
        let mut pl = Complex64::new(1.0, 0.0);
        let mut pm = Complex64::new(1.0, 0.0);
        for _ in 0..=two_j {
            zl_pows.push(pl);
            zm_pows.push(pm);
            pl *= zeta_l;
            pm *= zeta_m;
        }
        for two_k in (-tj..=tj).step_by(2) {
            let sk = sigma(two_j, two_k);
            let zm_pow = zm_pows[((tj + two_k) / 2) as usize];
            if zm_pow == Complex64::new(0.0, 0.0) {
                continue;
            }
            for two_m in (-tj..=tj).step_by(2) {
                let sm = sigma(two_j, two_m);
                let zl_pow = zl_pows[((tj + two_m) / 2) as usize];
                let amp = block_base * sk * sm * zl_pow * zm_pow;
                if amp != Complex64::new(0.0, 0.0) {
                    state.set(BasisLabel { two_j, two_k, two_m }, amp)?;
                }
            }
        }
    }
    let tail_weight = shell_tail_weight(
        family,
        z_sqrt.norm_sqr(),
        space.two_j_max + space.tower.two_j_step(),
    )?;
    Ok(BuiltState { state, tail_weight })
}

/// Closed-form overlap <bra | ket> = N(w) with
/// w = (1 + conj(zl') zl)^2 (1 + conj(zm') zm)^2 conj(z') z / (norm factors),
/// N continued to complex argument through the series in sqrt(w).
pub fn overlap_closed(
    bra: &CoherentParams,
    ket: &CoherentParams,
) -> Result<Complex64, McsError> {
    let fam = &ket.family;
    if bra.family.name() != fam.name() {
        return Err(McsError::Parse(
            "overlap_closed needs both states in the same family".into(),
        ));
    }
    let denom = (1.0 + bra.zeta_l.norm_sqr())
        * (1.0 + ket.zeta_l.norm_sqr())
        * (1.0 + bra.zeta_m.norm_sqr())
        * (1.0 + ket.zeta_m.norm_sqr());
    let w_sqrt = bra.z.sqrt().conj() * ket.z.sqrt()
        * (Complex64::new(1.0, 0.0) + bra.zeta_l.conj() * ket.zeta_l)
        * (Complex64::new(1.0, 0.0) + bra.zeta_m.conj() * ket.zeta_m)
        / denom.sqrt();
    norm_series_complex(fam, w_sqrt, 1e-14)
}

/// Moebius action of a rotation on the coherent parameters, with the
/// unimodular factor mu multiplying z:
/// R.zeta = (U zeta + V)/(conj U - conj V zeta), R.z = z mu,
/// mu = (conj U - conj V zeta)/(U - V conj zeta).
///
/// The pair (U, V) here is (u, -conj v): the published form of these
/// formulas uses the transposed rotation-matrix convention, and in the
/// operator-faithful convention of [`crate::wigner`] (blocks whose
/// generators match the ladder matrix elements) the statewise covariance
/// R|Z> = |R.Z> holds exactly for this translation and for no other.
pub fn rotate_params(
    p: &CoherentParams,
    which: Frame,
    r: &RotationParams,
) -> Result<(CoherentParams, Complex64), McsError> {
    let zeta = match which {
        Frame::Lab => p.zeta_l,
        Frame::Mol => p.zeta_m,
    };
    let cap_u = r.u;
    let cap_v = -r.v.conj();
    let denom = cap_u.conj() - cap_v.conj() * zeta;
    if denom.norm() < 1e-300 {
        return Err(McsError::MoebiusPole);
    }
    let new_zeta = (cap_u * zeta + cap_v) / denom;
    let mu = denom / denom.conj();
    let new_z = p.z * mu;
    let params = match which {
        Frame::Lab => CoherentParams {
            family: p.family.clone(),
            z: new_z,
            zeta_l: new_zeta,
            zeta_m: p.zeta_m,
        },
        Frame::Mol => CoherentParams {
            family: p.family.clone(),
            z: new_z,
            zeta_l: p.zeta_l,
            zeta_m: new_zeta,
        },
    };
    Ok((params, mu))
}

/// Apply a rotation blockwise to a state: laboratory rotations act on the m
/// index, molecular ones on the k index (where they take the same standard
/// matrix form in the raising-lowering relabeling K+- = J^M_-+).
pub fn apply_rotation_uv(
    state: &TruncatedState,
    which: Frame,
    u: Complex64,
    v: Complex64,
) -> TruncatedState {
    let space = state.space();
    let mut blocks: std::collections::HashMap<u32, WignerBlock> = std::collections::HashMap::new();
    let mut out = TruncatedState::zero(space);
    for (label, amp) in state.iter() {
        let block = blocks
            .entry(label.two_j)
            .or_insert_with(|| rotation_block_from_uv(label.two_j, u, v));
        let tj = label.two_j as i32;
        match which {
            Frame::Lab => {
                for two_m_row in (-tj..=tj).step_by(2) {
                    let coeff = block.entry(two_m_row, label.two_m);
                    if coeff.norm() > 0.0 {
                        out.add_unchecked(
                            BasisLabel {
                                two_j: label.two_j,
                                two_k: label.two_k,
                                two_m: two_m_row,
                            },
                            coeff * amp,
                        );
                    }
                }
            }
            Frame::Mol => {
                for two_k_row in (-tj..=tj).step_by(2) {
                    let coeff = block.entry(two_k_row, label.two_k);
                    if coeff.norm() > 0.0 {
                        out.add_unchecked(
                            BasisLabel {
                                two_j: label.two_j,
                                two_k: two_k_row,
                                two_m: label.two_m,
                            },
                            coeff * amp,
                        );
                    }
                }
            }
        }
    }
    out
}

/// The per-j block of the displacement D(zeta): the SU(2) element with
/// u = 1/sqrt(1+|zeta|^2), v = -conj(zeta)/sqrt(1+|zeta|^2). Acts on m for
/// the laboratory displacement and on k for the molecular one.
pub fn displacement_block(two_j: u32, zeta: Complex64) -> WignerBlock {
    let nu = (1.0 + zeta.norm_sqr()).sqrt();
    rotation_block_from_uv(two_j, Complex64::new(1.0 / nu, 0.0), -zeta.conj() / nu)
}

/// Apply D(zeta) (or its inverse via -zeta) blockwise.
pub fn apply_displacement(state: &TruncatedState, which: Frame, zeta: Complex64) -> TruncatedState {
    let nu = (1.0 + zeta.norm_sqr()).sqrt();
    apply_rotation_uv(
        state,
        which,
        Complex64::new(1.0 / nu, 0.0),
        -zeta.conj() / nu,
    )
}

/// Unit vector [n_1, n_2, n_0] the displaced laboratory 0-axis points along:
/// (-2 Re zeta, 2 Im zeta, 1 - |zeta|^2) / (1 + |zeta|^2).
pub fn lab_axis_direction(zeta: Complex64) -> [f64; 3] {
    let denom = 1.0 + zeta.norm_sqr();
    [
        -2.0 * zeta.re / denom,
        2.0 * zeta.im / denom,
        (1.0 - zeta.norm_sqr()) / denom,
    ]
}

/// Molecular counterpart: the second component flips sign.
pub fn mol_axis_direction(zeta: Complex64) -> [f64; 3] {
    let denom = 1.0 + zeta.norm_sqr();
    [
        -2.0 * zeta.re / denom,
        -2.0 * zeta.im / denom,
        (1.0 - zeta.norm_sqr()) / denom,
    ]
}

/// Residual norms (relative to the state norm) of the fundamental-state
/// identities J^L_-|z> = 0, J^M_+|z> = 0, (J_0 + Lambda)|z> = 0 and
/// (J^2 + J_0(1 - J_0))|z> = 0 for both component sets.
pub fn mfs_identity_residuals(state: &TruncatedState) -> Result<Vec<(String, f64)>, McsError> {
    let norm = state.norm().max(1e-300);
    let mut out = Vec::new();
    let r = |name: &str, s: &TruncatedState| (name.to_string(), s.norm() / norm);

    out.push(r("JL- |z>", &apply(OperatorKind::JLMinus, state)?.state));
    out.push(r("JM+ |z>", &apply(OperatorKind::JMPlus, state)?.state));
    for (name, j0) in [("JL0", OperatorKind::JLZero), ("JM0", OperatorKind::JMZero)] {
        let terms = [
            (Complex64::new(1.0, 0.0), j0),
            (Complex64::new(1.0, 0.0), OperatorKind::Lambda),
        ];
        out.push(r(
            &format!("({name} + Lambda) |z>"),
            &apply_linear(&terms, state)?.state,
        ));
        // J^2 + J_0 (1 - J_0): evaluate as Casimir + J_0 - J_0^2.
        let j0_state = apply(j0, state)?.state;
        let j0_sq = apply(j0, &j0_state)?.state;
        let casimir = apply(OperatorKind::Casimir, state)?.state;
        let residual = casimir
            .add_scaled(&j0_state, Complex64::new(1.0, 0.0))?
            .add_scaled(&j0_sq, Complex64::new(-1.0, 0.0))?;
        out.push(r(&format!("(J^2 + {name}(1-{name})) |z>"), &residual));
    }
    Ok(out)
}

/// Residual norms of the coherent-state annihilation identities
/// (zeta_L^2 J^L_+ - 2 zeta_L J^L_0 - J^L_-)|Z> = 0,
/// (zeta_M^2 J^M_- - 2 zeta_M J^M_0 - J^M_+)|Z> = 0,
/// and (Lambda + n.J)|Z> = 0 for both frames.
pub fn mcs_annihilation_residuals(
    params: &CoherentParams,
    state: &TruncatedState,
) -> Result<Vec<(String, f64)>, McsError> {
    let norm = state.norm().max(1e-300);
    let mut out = Vec::new();

    let zl = params.zeta_l;
    let lab_terms = [
        (zl * zl, OperatorKind::JLPlus),
        (-2.0 * zl, OperatorKind::JLZero),
        (Complex64::new(-1.0, 0.0), OperatorKind::JLMinus),
    ];
    out.push((
        "lowered-lab annihilator".to_string(),
        apply_linear(&lab_terms, state)?.state.norm() / norm,
    ));

    let zm = params.zeta_m;
    let mol_terms = [
        (zm * zm, OperatorKind::JMMinus),
        (-2.0 * zm, OperatorKind::JMZero),
        (Complex64::new(-1.0, 0.0), OperatorKind::JMPlus),
    ];
    out.push((
        "raised-mol annihilator".to_string(),
        apply_linear(&mol_terms, state)?.state.norm() / norm,
    ));

    for (name, which) in [("lab", Frame::Lab), ("mol", Frame::Mol)] {
        let direction = match which {
            Frame::Lab => lab_axis_direction(params.zeta_l),
            Frame::Mol => mol_axis_direction(params.zeta_m),
        };
        let mut terms: Vec<(Complex64, OperatorKind)> =
            vec![(Complex64::new(1.0, 0.0), OperatorKind::Lambda)];
        // direction is [n_1, n_2, n_0].
        for (axis, slot) in [(1usize, 0usize), (2, 1), (0, 2)] {
            for (c, kind) in cartesian_terms(which == Frame::Lab, axis) {
                terms.push((c * direction[slot], kind));
            }
        }
        out.push((
            format!("(Lambda + n^{name}.J) |Z>"),
            apply_linear(&terms, state)?.state.norm() / norm,
        ));
    }
    Ok(out)
}

/// Statewise rotation covariance: the blockwise-rotated coherent state must
/// equal the coherent state of the rotated parameters, up to the square-root
/// branch of R.z. Returns the relative defect (minimum over both branches).
pub fn rotation_covariance_defect(
    p: &CoherentParams,
    which: Frame,
    r: &RotationParams,
    space: &SpaceSpec,
) -> Result<f64, McsError> {
    let built = mcs(p, space)?;
    let rotated_state = apply_rotation_uv(&built.state, which, r.u(), r.v());
    let (new_params, mu) = rotate_params(p, which, r)?;
    let norm = built.state.norm().max(1e-300);
    let mu_sqrt = mu.sqrt();
    let mut best = f64::INFINITY;
    for branch in [mu_sqrt, -mu_sqrt] {
        let candidate = mcs_with_z_sqrt(
            &new_params.family,
            p.z.sqrt() * branch,
            new_params.zeta_l,
            new_params.zeta_m,
            space,
        )?;
        let defect = rotated_state
            .add_scaled(&candidate.state, Complex64::new(-1.0, 0.0))?
            .norm()
            / norm;
        best = best.min(defect);
    }
    Ok(best)
}
