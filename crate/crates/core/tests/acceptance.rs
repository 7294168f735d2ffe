//! Acceptance suite: one test per criterion, every tolerance pinned in the
//! body. Criteria with stated runtime budgets assert them in optimized
//! builds and report timing otherwise.
//!
//! Run with `cargo test --release -p molcs-core --test acceptance -- --nocapture`
//! to see the per-criterion pass lines.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use molcs_core::angular::{adjoint_check, commutator_defect, densify, OperatorKind, SpinIndex, VectorIndex};
use molcs_core::coherent::{
    default_space, mcs, mcs_annihilation_residuals, mfs, mfs_identity_residuals, overlap_closed,
    rotation_covariance_defect, CoherentParams, Frame, RotationParams,
};
use molcs_core::error::McsError;
use molcs_core::evolution::{
    precession_residual, rotor_moment_departure, spherical_rotor_check, temporal_stability,
    DriveCoefficients,
};
use molcs_core::expectations::{
    direct_expectations, mcs_transformed_uncertainty, mfs_expectations, uncertainty_check,
};
use molcs_core::families::{mellin_moment_check, norm_series, SequenceFamily};
use molcs_core::hilbert::{enumerate_basis, inner_product, BasisLabel, SpaceSpec, Tower};
use molcs_core::resolution::{
    unity_diagonal_factorized, unity_matrix_element, unity_suite, QuadratureSpec,
};
use molcs_core::wigner::EulerAngles;
use molcs_core::zrep::{apply_diff, matrix_counterpart, to_zrep, ALL_DIFF_OPS};
use molcs_core::angular::apply;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Report timing; enforce the budget only in optimized builds.
fn finish(criterion: &str, started: Instant, budget_s: Option<f64>) {
    let elapsed = started.elapsed().as_secs_f64();
    if let Some(budget) = budget_s {
        if !cfg!(debug_assertions) {
            assert!(
                elapsed < budget,
                "{criterion}: runtime {elapsed:.2} s exceeded budget {budget} s"
            );
        }
    }
    println!("{criterion}: PASS ({elapsed:.2} s)");
}

fn sample_zs(fam: &SequenceFamily, count: usize) -> Vec<f64> {
    let upper = 0.9 * fam.domain_radius().min(2.0);
    (1..=count).map(|i| upper * i as f64 / count as f64).collect()
}

#[test]
fn criterion_1_norm_tables() {
    let started = Instant::now();
    for fam in SequenceFamily::all_builtin() {
        for y in sample_zs(&fam, 20) {
            let x = y * y;
            let series = norm_series(&fam, x, 1e-13).unwrap().value;
            let closed = fam.closed_n(x).unwrap();
            let rel = (series - closed).abs() / closed.abs();
            assert!(
                rel <= 1e-10,
                "family {} at |z| = {y}: series {series} vs closed {closed}",
                fam.name()
            );
        }
    }
    // Documented discrepancy: the published family-3 entry does not match
    // its own coefficient sequence (family 7, same c_j, does).
    let f3 = SequenceFamily::builtin(3).unwrap();
    let y = 0.45f64;
    let published = (3.0 * y + 2.0) / (2.0 * (1.0 - y).powi(4));
    let series = norm_series(&f3, y * y, 1e-13).unwrap().value;
    assert!(
        (published - series).abs() / series > 1e-3,
        "family-3 published norm unexpectedly matches; fixture stale"
    );
    finish("criterion 1 (norm tables, 8 families x 20 points, 1e-10)", started, Some(1.0));
}

/// The closed <J_0>_z and <J^2>_z rows, x = |z|^2, y = |z|.
/// Family 3 carries the oracle-derived forms; the published variants follow
/// the norm-table typo and are asserted to disagree below.
fn table_j0(id: u8, y: f64) -> f64 {
    let x = y * y;
    match id {
        1 => -0.5 * y,
        2 => -0.5 * y * (y + 2.0) / (y + 1.0),
        3 => -3.0 * y * (1.0 + y) / ((1.0 - y) * (1.0 + 2.0 * y)),
        4 => -y * (y * y + 7.0 * y + 4.0) / ((1.0 - y) * (y * y + 4.0 * y + 1.0)),
        5 => -x,
        6 => -x * (4.0 * x * x + 16.0 * x + 9.0) / (4.0 * x * x + 8.0 * x + 1.0),
        7 => {
            -6.0 * x * (3.0 * x * x + 10.0 * x + 3.0)
                / ((1.0 - x) * (9.0 * x * x + 14.0 * x + 1.0))
        }
        8 => {
            -x * (x * x * x + 49.0 * x * x + 115.0 * x + 27.0)
                / ((1.0 - x * x) * (x * x + 22.0 * x + 1.0))
        }
        _ => unreachable!(),
    }
}

fn table_jsq(id: u8, y: f64) -> f64 {
    let x = y * y;
    match id {
        1 => 0.25 * y * (3.0 + y),
        2 => 0.25 * y * (y * y + 6.0 * y + 6.0) / (y + 1.0),
        3 => 1.5 * y * (y * y + 6.0 * y + 3.0) / ((1.0 - y).powi(2) * (1.0 + 2.0 * y)),
        4 => 6.0 * y * (y * y + 3.0 * y + 1.0) / ((1.0 - y).powi(2) * (y * y + 4.0 * y + 1.0)),
        5 => x * (x + 2.0),
        6 => x * (x + 2.0) * (4.0 * x * x + 24.0 * x + 9.0) / (4.0 * x * x + 8.0 * x + 1.0),
        7 => {
            6.0 * x * (3.0 * x * x * x + 32.0 * x * x + 39.0 * x + 6.0)
                / ((1.0 - x).powi(2) * (9.0 * x * x + 14.0 * x + 1.0))
        }
        8 => {
            6.0 * x * (9.0 * x * x + 62.0 * x + 9.0)
                / ((1.0 - x).powi(2) * (x * x + 22.0 * x + 1.0))
        }
        _ => unreachable!(),
    }
}

#[test]
fn criterion_2_expectation_tables() {
    let started = Instant::now();
    for id in 1..=8u8 {
        let fam = SequenceFamily::builtin(id).unwrap();
        for y in sample_zs(&fam, 10) {
            let z = c(y, 0.0);
            let report = mfs_expectations(&fam, z).unwrap();
            let j0_table = table_j0(id, y);
            let jsq_table = table_jsq(id, y);
            assert!(
                (report.j0 - j0_table).abs() / j0_table.abs() <= 1e-9,
                "family {id} <J0> at |z| = {y}: {} vs table {j0_table}",
                report.j0
            );
            assert!(
                (report.jsq - jsq_table).abs() / jsq_table.abs() <= 1e-9,
                "family {id} <J^2> at |z| = {y}: {} vs table {jsq_table}",
                report.jsq
            );

        }
        // Direct truncated-state oracle, sampled where a deep truncation
        // reaches the tolerance (the unit-disc families decay too slowly
        // near the boundary for any fixed j_max).
        let oracle_cap = 0.6 * fam.domain_radius().min(2.5);
        let oracle_space = SpaceSpec::new(
            if fam.domain_radius().is_finite() { 80 } else { 44 },
            fam.tower(),
        );
        for i in 1..=10 {
            let y = oracle_cap * i as f64 / 10.0;
            let z = c(y, 0.0);
            let report = mfs_expectations(&fam, z).unwrap();
            let state = mfs(&fam, z, &oracle_space).unwrap().state;
            let direct = direct_expectations(&state).unwrap();
            assert!(
                (report.j0 - direct.j0).abs() / direct.j0.abs() <= 1e-9,
                "family {id} oracle <J0> at |z| = {y}: {} vs {}",
                report.j0,
                direct.j0
            );
            assert!(
                (report.jsq - direct.jsq).abs() / direct.jsq.abs() <= 1e-9,
                "family {id} oracle <J^2> at |z| = {y}"
            );
        }
    }
    // Documented discrepancy (family 3, following the norm-table typo): the
    // published rows disagree with the oracle, which is ground truth.
    let y = 0.4f64;
    let published_j0 = -0.5 * y * (9.0 * y + 11.0) / ((1.0 - y) * (3.0 * y + 2.0));
    let oracle_j0 = table_j0(3, y);
    assert!(
        (published_j0 - oracle_j0).abs() / oracle_j0.abs() > 1e-3,
        "family-3 published <J0> unexpectedly matches; fixture stale"
    );
    finish(
        "criterion 2 (expectation tables, 8 families x 10 points, 1e-9, oracle-checked)",
        started,
        Some(5.0),
    );
}

#[test]
fn criterion_3_mellin_moments() {
    let started = Instant::now();
    for fam in SequenceFamily::all_builtin() {
        let measure = fam.measure().unwrap();
        let two_js: Vec<u32> = (0..=8).collect(); // every representable j <= 4
        let report = mellin_moment_check(&fam, &measure, &two_js, 1e-10).unwrap();
        assert!(
            report.max_rel_defect() <= 1e-8,
            "family {}: Mellin defect {}",
            fam.name(),
            report.max_rel_defect()
        );
    }
    finish("criterion 3 (Mellin moments, 8 measures, j <= 4, 1e-8)", started, Some(10.0));
}

#[test]
fn criterion_4_resolution_of_unity() {
    let started = Instant::now();
    // Factorized path at j_max = 2 for all eight families.
    for fam in SequenceFamily::all_builtin() {
        let measure = fam.measure().unwrap();
        let report = unity_suite(&fam, &measure, 4, 1e-9).unwrap();
        assert!(
            report.max_diag_defect <= 1e-4,
            "family {}: diagonal defect {}",
            fam.name(),
            report.max_diag_defect
        );
        assert!(report.beta_consistency <= 1e-10);
    }

    // Brute quadrature at j_max = 1 cross-validated against the factorized
    // values, plus exact off-diagonal dephasing.
    let spec = QuadratureSpec::default();
    for id in [1u8, 2, 5, 7] {
        let fam = SequenceFamily::builtin(id).unwrap();
        let measure = fam.measure().unwrap();
        let space = SpaceSpec::new(2, fam.tower());
        let labels = enumerate_basis(&space);
        for bra in &labels {
            for ket in &labels {
                let brute = unity_matrix_element(&fam, &measure, bra, ket, &spec).unwrap();
                if bra == ket {
                    let factorized =
                        unity_diagonal_factorized(&fam, &measure, bra, 1e-9).unwrap();
                    assert!(
                        (brute.re - factorized).abs() <= 1e-3,
                        "family {id} {bra}: brute {} vs factorized {factorized}",
                        brute.re
                    );
                } else {
                    assert!(
                        brute.norm() <= 1e-10,
                        "family {id} <{bra}|1|{ket}> = {brute}"
                    );
                }
            }
        }
    }

    // Radial convergence documentation for one element.
    let fam = SequenceFamily::builtin(2).unwrap();
    let measure = fam.measure().unwrap();
    let label = BasisLabel::new(2, 0, -2).unwrap();
    println!("radial convergence, family 2, element {label}:");
    for nodes in [25usize, 50, 100, 200] {
        let spec = QuadratureSpec {
            radial_nodes: nodes,
            angular_nodes: 16,
        };
        let value = unity_matrix_element(&fam, &measure, &label, &label, &spec).unwrap();
        println!("  {nodes:>4} Gauss nodes: diagonal = {:.10}", value.re);
    }
    finish(
        "criterion 4 (resolution of unity, factorized j_max = 2 at 1e-4, brute j_max = 1 at 1e-3)",
        started,
        Some(60.0),
    );
}

#[test]
fn criterion_5_algebra_suite() {
    let started = Instant::now();
    let space = SpaceSpec::new(6, Tower::HalfInteger);

    // Commutation relations, including every bi-tensor component.
    let report = commutator_defect(&space).unwrap();
    for (name, defect) in &report.defects {
        assert!(*defect <= 1e-12, "{name}: defect {defect}");
    }

    // Hermiticity through the adjoint pairing.
    let mut kinds: Vec<OperatorKind> = vec![
        OperatorKind::JLPlus,
        OperatorKind::JLMinus,
        OperatorKind::JLZero,
        OperatorKind::JMPlus,
        OperatorKind::JMMinus,
        OperatorKind::JMZero,
        OperatorKind::Lambda,
        OperatorKind::Casimir,
    ];
    for q in SpinIndex::ALL {
        for qp in SpinIndex::ALL {
            kinds.push(OperatorKind::Spinor(q, qp));
        }
    }
    for q in VectorIndex::ALL {
        for qp in VectorIndex::ALL {
            kinds.push(OperatorKind::Vector(q, qp));
        }
    }
    for kind in &kinds {
        let defect = adjoint_check(*kind, &space).unwrap();
        assert!(defect <= 1e-12, "{kind:?}: adjoint defect {defect}");
    }

    // Selection rules of the bi-spinor and bi-vector over all dense entries.
    let labels = enumerate_basis(&space);
    for q in SpinIndex::ALL {
        for qp in SpinIndex::ALL {
            let matrix = densify(OperatorKind::Spinor(q, qp), &space).unwrap();
            for (row, lr) in labels.iter().enumerate() {
                for (col, lc) in labels.iter().enumerate() {
                    if matrix[(row, col)].norm() > 0.0 {
                        assert_eq!(lr.two_k - lc.two_k, q.doubled());
                        assert_eq!(lr.two_m - lc.two_m, qp.doubled());
                        assert_eq!((lr.two_j as i32 - lc.two_j as i32).abs(), 1);
                    }
                }
            }
        }
    }
    for q in VectorIndex::ALL {
        for qp in VectorIndex::ALL {
            let matrix = densify(OperatorKind::Vector(q, qp), &space).unwrap();
            for (row, lr) in labels.iter().enumerate() {
                for (col, lc) in labels.iter().enumerate() {
                    if matrix[(row, col)].norm() > 0.0 {
                        assert_eq!(lr.two_k - lc.two_k, q.doubled());
                        assert_eq!(lr.two_m - lc.two_m, qp.doubled());
                        assert!((lr.two_j as i32 - lc.two_j as i32).abs() <= 2);
                    }
                }
            }
        }
    }
    finish("criterion 5 (algebra suite at j_max = 3, 1e-12)", started, Some(5.0));
}

fn draw_params(rng: &mut ChaCha8Rng, id: u8) -> CoherentParams {
    let family = SequenceFamily::builtin(id).unwrap();
    let r_cap = if family.domain_radius().is_finite() { 0.45 } else { 1.4 };
    let z = Complex64::from_polar(
        rng.gen_range(0.1..r_cap),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    let zeta = |rng: &mut ChaCha8Rng| {
        Complex64::from_polar(
            rng.gen_range(0.0..1.8),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
    };
    CoherentParams::new(family, z, zeta(rng), zeta(rng)).unwrap()
}

#[test]
fn criterion_6_coherent_identities() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);

    // 50 random draws: annihilation and projection identities. These are
    // exact per block, so a moderate truncation is enough.
    for draw in 0..50 {
        let id = (draw % 8) as u8 + 1;
        let params = draw_params(&mut rng, id);
        let space = SpaceSpec::new(24, params.family.tower());

        let fundamental = mfs(&params.family, params.z, &space).unwrap().state;
        for (name, residual) in mfs_identity_residuals(&fundamental).unwrap() {
            assert!(
                residual <= 1e-10,
                "draw {draw} family {id} {name}: residual {residual}"
            );
        }
        let coherent = mcs(&params, &space).unwrap().state;
        for (name, residual) in mcs_annihilation_residuals(&params, &coherent).unwrap() {
            assert!(
                residual <= 1e-10,
                "draw {draw} family {id} {name}: residual {residual}"
            );
        }
    }

    // Closed overlap against the direct inner product.
    for pair in 0..16 {
        let id = (pair % 8) as u8 + 1;
        let p1 = draw_params(&mut rng, id);
        let mut p2 = draw_params(&mut rng, id);
        p2.family = p1.family.clone();
        let two_j_max = default_space(&p1.family, p1.z)
            .unwrap()
            .two_j_max
            .max(default_space(&p2.family, p2.z).unwrap().two_j_max);
        let space = SpaceSpec::new(two_j_max, p1.family.tower());
        let s1 = mcs(&p1, &space).unwrap().state;
        let s2 = mcs(&p2, &space).unwrap().state;
        let direct = inner_product(&s2, &s1).unwrap();
        let closed = overlap_closed(&p2, &p1).unwrap();
        assert!(
            (direct - closed).norm() <= 1e-9 * s1.norm() * s2.norm(),
            "pair {pair}: closed {closed} vs direct {direct}"
        );
    }

    // Statewise rotation covariance, both frames.
    for draw in 0..16 {
        let id = (draw % 8) as u8 + 1;
        let params = draw_params(&mut rng, id);
        let space = SpaceSpec::new(24, params.family.tower());
        let angles = EulerAngles::new(
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::PI),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        )
        .unwrap();
        let rotation = RotationParams::from_euler(&angles);
        for which in [Frame::Lab, Frame::Mol] {
            let defect = rotation_covariance_defect(&params, which, &rotation, &space).unwrap();
            assert!(
                defect <= 1e-9,
                "draw {draw} family {id} {which:?}: covariance defect {defect}"
            );
        }
    }
    finish(
        "criterion 6 (coherent identities: 50 draws at 1e-10, overlaps and covariance at 1e-9)",
        started,
        None,
    );
}

#[test]
fn criterion_7_uncertainty() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED);

    // Transverse-pair equality on every family.
    for id in 1..=8u8 {
        let fam = SequenceFamily::builtin(id).unwrap();
        let r_cap = if fam.domain_radius().is_finite() { 0.45 } else { 1.2 };
        let z = c(rng.gen_range(0.2..r_cap), 0.0);
        let space = default_space(&fam, z).unwrap();
        let report = uncertainty_check(&fam, z, &space).unwrap();
        assert!(
            (report.product_12 - report.bound_12).abs() / report.bound_12 <= 1e-10,
            "family {id}: pair equality defect"
        );
        // Strict inequality of the other pairs for non-monomial families.
        assert!(report.product_10 > 0.0 && report.product_20 > 0.0);
    }

    // Monomial family minimizes all three pairs.
    for (two_l, tower) in [(2u32, Tower::Integer), (3, Tower::HalfInteger)] {
        let fam = SequenceFamily::monomial(two_l, tower);
        let space = SpaceSpec::new(two_l + 2, tower);
        let report = uncertainty_check(&fam, c(0.7, 0.0), &space).unwrap();
        assert!((report.product_12 - report.bound_12).abs() / report.bound_12 <= 1e-10);
        assert!(report.product_10.abs() <= 1e-12 && report.bound_10 == 0.0);
        assert!(report.product_20.abs() <= 1e-12 && report.bound_20 == 0.0);
    }

    // Transformed equalities on coherent states.
    for draw in 0..8 {
        let id = (draw % 8) as u8 + 1;
        let params = draw_params(&mut rng, id);
        let space = SpaceSpec::new(24, params.family.tower());
        let (lab, mol) = mcs_transformed_uncertainty(&params, &space).unwrap();
        assert!(lab <= 1e-10, "draw {draw}: lab transformed defect {lab}");
        assert!(mol <= 1e-10, "draw {draw}: mol transformed defect {mol}");
    }
    finish("criterion 7 (uncertainty equalities at 1e-10, monomial minimization)", started, None);
}

#[test]
fn criterion_8_z_representation() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for id in [1u8, 2, 5, 6] {
        let fam = SequenceFamily::builtin(id).unwrap();
        let space = SpaceSpec::new(4, fam.tower());
        let labels = enumerate_basis(&space);
        for _ in 0..8 {
            let mut psi = molcs_core::hilbert::TruncatedState::zero(space);
            for l in &labels {
                psi.set(*l, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .unwrap();
            }
            let f = to_zrep(&psi, &fam).unwrap();
            for op in ALL_DIFF_OPS {
                let via_matrix =
                    to_zrep(&apply(matrix_counterpart(op), &psi).unwrap().state, &fam).unwrap();
                let via_diff = apply_diff(op, &f).unwrap();
                let defect = via_matrix.difference(&via_diff).max_abs();
                let scale = via_matrix.max_abs().max(1.0);
                assert!(
                    defect <= 1e-10 * scale,
                    "family {id} {op:?}: equivalence defect {defect}"
                );
            }
        }
    }
    finish("criterion 8 (Z-representation equivalence at j_max = 2, 1e-10)", started, None);
}

#[test]
fn criterion_9_evolution() {
    let started = Instant::now();

    // Temporal stability under a constant mixed drive.
    let fam = SequenceFamily::builtin(1).unwrap();
    let params = CoherentParams::new(fam, c(1.0, 0.0), c(0.2, 0.1), c(-0.1, 0.3)).unwrap();
    let space = SpaceSpec::new(24, Tower::HalfInteger);
    let drive = DriveCoefficients {
        a_lab: c(0.3, -0.2),
        a_lab_0: 0.8,
        a_mol: c(-0.15, 0.25),
        a_mol_0: -0.6,
    };
    let report = temporal_stability(&params, &|_| drive, 1.0, 1e-3, &space).unwrap();
    assert!(
        report.fidelity >= 1.0 - 1e-6,
        "stability fidelity {}",
        report.fidelity
    );
    assert!(report.norm_drift <= 1e-10, "norm drift {}", report.norm_drift);

    // Classical precession of the expectation vectors.
    let (lab, mol, length_drift) = precession_residual(&report.samples, &drive);
    assert!(lab <= 1e-6, "lab precession residual {lab}");
    assert!(mol <= 1e-6, "mol precession residual {mol}");
    assert!(length_drift <= 1e-8, "length drift {length_drift}");

    // Spherical rotor: phase-mapped family overlap and constant <J_i>.
    let fam5 = SequenceFamily::builtin(5).unwrap();
    let spherical_params =
        CoherentParams::new(fam5.clone(), c(1.0, 0.0), c(0.4, -0.3), c(0.2, 0.6)).unwrap();
    let spherical_space = default_space(&fam5, c(1.0, 0.0)).unwrap();
    let (deficit, drift) =
        spherical_rotor_check(&spherical_params, 1.3, 0.9, &spherical_space).unwrap();
    assert!(deficit <= 1e-10, "spherical overlap deficit {deficit}");
    assert!(drift <= 1e-10, "spherical <J_i> drift {drift}");

    // Asymmetric rotor A = (1, 2, 3), family 5, z = 1: strictly positive
    // departure of the symmetrized moments.
    let rotor_params =
        CoherentParams::new(fam5, c(1.0, 0.0), c(0.3, 0.2), c(0.4, -0.1)).unwrap();
    let constants = molcs_core::angular::RotorConstants::new(1.0, 2.0, 3.0);
    let departure = rotor_moment_departure(
        &rotor_params,
        &constants,
        &[0.25, 0.5, 0.75, 1.0],
        &spherical_space,
    )
    .unwrap();
    assert!(departure > 1e-3, "rotor moment departure {departure}");
    finish(
        "criterion 9 (evolution: stability 1-1e-6, precession 1e-6, spherical 1-1e-10, rotor departure > 1e-3)",
        started,
        None,
    );
}

#[test]
fn state_file_round_trip_interface() {
    // The serialized text format named in the external interfaces.
    let fam = SequenceFamily::builtin(2).unwrap();
    let params = CoherentParams::new(fam, c(0.7, 0.2), c(0.3, -0.4), c(0.1, 0.5)).unwrap();
    let space = SpaceSpec::new(8, Tower::HalfInteger);
    let state = mcs(&params, &space).unwrap().state;
    let text = state.to_text();
    let back = molcs_core::hilbert::TruncatedState::from_text(&text).unwrap();
    let defect = back
        .add_scaled(&state, c(-1.0, 0.0))
        .unwrap()
        .norm();
    assert!(defect <= 1e-15 * state.norm());
}

#[test]
fn custom_family_config_interface() {
    let text = "integer 2.0\n0 1.0 0.0\n2 0.5 0.5\n4 0.25 0.0\n";
    let fam = SequenceFamily::from_config_str(text).unwrap();
    assert_eq!(fam.tower(), Tower::Integer);
    let series = norm_series(&fam, 1.0, 1e-12).unwrap().value;
    // |c_0|^2 + |c_1|^2 x + |c_2|^2 x^2 at x = 1.
    let expected = 1.0 + 0.5 + 0.0625;
    assert!((series - expected).abs() <= 1e-12);
    assert!(matches!(
        SequenceFamily::from_config_str("half 1.0\n0 0.0 0.0\n"),
        Err(McsError::Parse(_))
    ));
}
