//! Command-line front end: reproduce the published tables, run the
//! verification suites, build states, and evolve them under a drive.
//!
//! Every command is deterministic for fixed flags; the verification
//! subcommands expose their random draws through `--seed`. Exit code 0
//! means every requested tolerance held; tolerance failures exit nonzero
//! after printing machine-readable `FAIL name defect tolerance` lines.

use std::fmt::Write as FmtWrite;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use molcs_core::angular::{
    adjoint_check, commutator_defect, rotor_hamiltonian, block_to_csv, OperatorKind, RotorConstants,
    SpinIndex, VectorIndex,
};
use molcs_core::coherent::{
    default_space, mcs, mcs_annihilation_residuals, mfs, mfs_identity_residuals, CoherentParams,
};
use molcs_core::evolution::{integrate, DriveCoefficients, EvolutionState};
use molcs_core::expectations::{mcs_expectations, mfs_expectations};
use molcs_core::families::{mellin_moment_check, norm_series, MeasureSupport, SequenceFamily};
use molcs_core::hilbert::{SpaceSpec, Tower};
use molcs_core::resolution::unity_suite;
use molcs_core::McsError;

#[derive(Parser)]
#[command(name = "molcs", about = "Molecular coherent states of the quantum rigid rotor")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Family metadata and the three published tables.
    Families {
        #[command(subcommand)]
        action: FamiliesAction,
    },
    /// Build coherent states and write them in the state-file format.
    Mcs {
        #[command(subcommand)]
        action: McsAction,
    },
    /// Expectation values of a fundamental or coherent state.
    Expect(ExpectArgs),
    /// Emit the published tables as CSV at sampled |z|.
    Tables {
        #[command(subcommand)]
        action: TablesAction,
    },
    /// Run verification suites; nonzero exit on any tolerance failure.
    Verify {
        #[command(subcommand)]
        action: VerifyAction,
    },
    /// Integrate the coherent parameters under a drive.
    Evolve(EvolveArgs),
}

#[derive(Subcommand)]
enum FamiliesAction {
    /// Norms, expectations, and measures of the eight built-in families.
    Table {
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum McsAction {
    /// Build |Z> = D_L(zl) D_M(zm) |z> and emit the state file.
    Build(BuildArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    family: Option<u8>,
    /// Custom family config: header `tower radius`, rows `two_j re im`.
    #[arg(long, conflicts_with = "family")]
    family_file: Option<String>,
    #[arg(long, value_parser = parse_complex)]
    z: Complex64,
    #[arg(long, value_parser = parse_complex, default_value = "0")]
    zl: Complex64,
    #[arg(long, value_parser = parse_complex, default_value = "0")]
    zm: Complex64,
    /// Truncation override (doubled j).
    #[arg(long)]
    two_j_max: Option<u32>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct ExpectArgs {
    #[arg(long)]
    family: Option<u8>,
    #[arg(long, conflicts_with = "family")]
    family_file: Option<String>,
    #[arg(long, value_parser = parse_complex)]
    z: Complex64,
    #[arg(long, value_parser = parse_complex)]
    zl: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    zm: Option<Complex64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum TablesAction {
    /// Reproduce one of the published tables at sampled |z|.
    Reproduce {
        #[arg(long)]
        which: TableKind,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Dense rotor-Hamiltonian block as CSV.
    Rotor {
        #[arg(long, default_value_t = 1.0)]
        a0: f64,
        #[arg(long, default_value_t = 1.0)]
        a1: f64,
        #[arg(long, default_value_t = 1.0)]
        a2: f64,
        #[arg(long)]
        two_j: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TableKind {
    Norms,
    Expectations,
    Measures,
}

#[derive(Subcommand)]
enum VerifyAction {
    /// Operator algebra: commutators, adjoints.
    Algebra {
        #[arg(long, default_value_t = 3)]
        jmax: u32,
    },
    /// Resolution of unity diagonals (factorized path).
    Unity {
        #[arg(long)]
        family: u8,
        #[arg(long, default_value_t = 2)]
        jmax: u32,
    },
    /// Fundamental and coherent state identities on random draws.
    Identities {
        #[arg(long, default_value_t = 16)]
        draws: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Mellin moment condition for every built-in family.
    Mellin {
        #[arg(long, default_value_t = 8)]
        two_j_max: u32,
    },
    /// Everything above.
    All {
        #[arg(long, default_value_t = 2)]
        jmax: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    family: Option<u8>,
    #[arg(long, conflicts_with = "family")]
    family_file: Option<String>,
    #[arg(long, value_parser = parse_complex)]
    z: Complex64,
    #[arg(long, value_parser = parse_complex, default_value = "0")]
    zl: Complex64,
    #[arg(long, value_parser = parse_complex, default_value = "0")]
    zm: Complex64,
    /// Drive file: `key = value` lines for a_lab_re, a_lab_im, a_lab_0,
    /// a_mol_re, a_mol_im, a_mol_0.
    #[arg(long)]
    drive: String,
    #[arg(long, default_value_t = 2.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Emit one CSV row every this many steps.
    #[arg(long, default_value_t = 10)]
    sample_every: usize,
}

/// Parse "a", "ai", "a+bi" or "a-bi".
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let t = text.trim().replace(' ', "");
    if let Ok(re) = t.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    let body = t.strip_suffix(['i', 'j']).ok_or_else(|| format!("bad complex number {text:?}"))?;
    // Split at the last sign that is not an exponent sign and not leading.
    let bytes = body.as_bytes();
    for idx in (1..bytes.len()).rev() {
        let ch = bytes[idx] as char;
        if (ch == '+' || ch == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
            let re: f64 = body[..idx].parse().map_err(|e| format!("{e}"))?;
            let im_text = &body[idx..];
            let im: f64 = if im_text == "+" {
                1.0
            } else if im_text == "-" {
                -1.0
            } else {
                im_text.parse().map_err(|e| format!("{e}"))?
            };
            return Ok(Complex64::new(re, im));
        }
    }
    // Pure imaginary.
    let im: f64 = if body.is_empty() {
        1.0
    } else if body == "-" {
        -1.0
    } else {
        body.parse().map_err(|e| format!("{e}"))?
    };
    Ok(Complex64::new(0.0, im))
}

fn fmt_complex(value: Complex64) -> String {
    format!("{:+.12e}{:+.12e}i", value.re, value.im)
}

fn resolve_family(id: Option<u8>, path: Option<&str>) -> Result<SequenceFamily, McsError> {
    match (id, path) {
        (Some(id), None) => SequenceFamily::builtin(id),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| McsError::Parse(format!("cannot read {path}: {e}")))?;
            SequenceFamily::from_config_str(&text)
        }
        _ => Err(McsError::Parse(
            "exactly one of --family or --family-file is required".into(),
        )),
    }
}

fn read_drive(path: &str) -> Result<DriveCoefficients, McsError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| McsError::Parse(format!("cannot read {path}: {e}")))?;
    let mut drive = DriveCoefficients::zero();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| McsError::Parse(format!("bad drive line {line:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| McsError::Parse(format!("bad drive value in {line:?}: {e}")))?;
        match key.trim() {
            "a_lab_re" => drive.a_lab.re = value,
            "a_lab_im" => drive.a_lab.im = value,
            "a_lab_0" => drive.a_lab_0 = value,
            "a_mol_re" => drive.a_mol.re = value,
            "a_mol_im" => drive.a_mol.im = value,
            "a_mol_0" => drive.a_mol_0 = value,
            other => {
                return Err(McsError::Parse(format!("unknown drive key {other:?}")))
            }
        }
    }
    Ok(drive)
}

struct FailureLog {
    lines: Vec<String>,
}

impl FailureLog {
    fn new() -> Self {
        FailureLog { lines: Vec::new() }
    }

    fn check(&mut self, name: &str, defect: f64, tol: f64, out: &mut String) {
        if defect.abs() <= tol {
            let _ = writeln!(out, "PASS {name} defect={defect:.3e} tol={tol:.1e}");
        } else {
            let line = format!("FAIL {name} defect={defect:.3e} tol={tol:.1e}");
            let _ = writeln!(out, "{line}");
            self.lines.push(line);
        }
    }

    fn failed(&self) -> bool {
        !self.lines.is_empty()
    }
}

fn cmd_families_table(samples: usize, format: Format, out: &mut String) -> Result<(), McsError> {
    let sep = if format == Format::Csv { "," } else { "  " };
    let _ = writeln!(
        out,
        "family{sep}tower{sep}radius{sep}|z|{sep}N_closed{sep}N_series{sep}measure{sep}f(|z|^2)"
    );
    for fam in SequenceFamily::all_builtin() {
        let measure = fam.measure().unwrap();
        let upper = 0.8 * fam.domain_radius().min(2.0);
        for i in 1..=samples {
            let y = upper * i as f64 / samples as f64;
            let x = y * y;
            let closed = fam.closed_n(x).unwrap();
            let series = norm_series(&fam, x, 1e-12)?.value;
            let _ = writeln!(
                out,
                "{}{sep}{}{sep}{}{sep}{:.6}{sep}{:.12e}{sep}{:.12e}{sep}{}{sep}{:.12e}",
                fam.name(),
                fam.tower(),
                fam.domain_radius(),
                y,
                closed,
                series,
                measure.name,
                measure.density(x)
            );
        }
    }
    Ok(())
}

fn cmd_tables_reproduce(which: TableKind, samples: usize, out: &mut String) -> Result<(), McsError> {
    match which {
        TableKind::Norms => {
            let _ = writeln!(out, "family,|z|,N_series,N_closed");
            for fam in SequenceFamily::all_builtin() {
                let upper = 0.9 * fam.domain_radius().min(2.0);
                for i in 1..=samples {
                    let y = upper * i as f64 / samples as f64;
                    let x = y * y;
                    let _ = writeln!(
                        out,
                        "{},{:.6},{:.12e},{:.12e}",
                        fam.name(),
                        y,
                        norm_series(&fam, x, 1e-12)?.value,
                        fam.closed_n(x).unwrap()
                    );
                }
            }
        }
        TableKind::Expectations => {
            let _ = writeln!(out, "family,|z|,J0,Jsq");
            for fam in SequenceFamily::all_builtin() {
                let upper = 0.9 * fam.domain_radius().min(2.0);
                for i in 1..=samples {
                    let y = upper * i as f64 / samples as f64;
                    let report = mfs_expectations(&fam, Complex64::new(y, 0.0))?;
                    let _ = writeln!(
                        out,
                        "{},{:.6},{:.12e},{:.12e}",
                        fam.name(),
                        y,
                        report.j0,
                        report.jsq
                    );
                }
            }
        }
        TableKind::Measures => {
            let _ = writeln!(out, "family,measure,support,|z|,f(|z|^2)");
            for fam in SequenceFamily::all_builtin() {
                let measure = fam.measure().unwrap();
                let upper = match measure.support {
                    MeasureSupport::Compact { x_upper } => x_upper.sqrt(),
                    MeasureSupport::SemiInfinite => 3.0,
                };
                for i in 1..=samples {
                    let y = upper * i as f64 / samples as f64;
                    let _ = writeln!(
                        out,
                        "{},{},{:?},{:.6},{:.12e}",
                        fam.name(),
                        measure.name,
                        measure.support,
                        y,
                        measure.density(y * y)
                    );
                }
            }
        }
    }
    Ok(())
}

fn cmd_expect(args: &ExpectArgs, out: &mut String) -> Result<(), McsError> {
    let family = resolve_family(args.family, args.family_file.as_deref())?;
    let report = mfs_expectations(&family, args.z)?;
    let sep = if args.format == Format::Csv { "," } else { " = " };
    let _ = writeln!(out, "J0{sep}{:.12e}", report.j0);
    let _ = writeln!(out, "Jsq{sep}{:.12e}", report.jsq);
    let _ = writeln!(out, "Jplus{sep}{}", fmt_complex(report.jplus));
    let _ = writeln!(
        out,
        "uncertainty_products{sep}{:.12e},{:.12e},{:.12e}",
        report.uncertainty_products[0],
        report.uncertainty_products[1],
        report.uncertainty_products[2]
    );
    for (row, q) in ["-1/2", "+1/2"].iter().enumerate() {
        for (col, qp) in ["-1/2", "+1/2"].iter().enumerate() {
            let _ = writeln!(
                out,
                "S[{q},{qp}]{sep}{}",
                fmt_complex(report.s_matrix[row][col])
            );
        }
    }
    for (row, q) in ["-1", "0", "+1"].iter().enumerate() {
        for (col, qp) in ["-1", "0", "+1"].iter().enumerate() {
            let _ = writeln!(
                out,
                "V[{q},{qp}]{sep}{}",
                fmt_complex(report.v_matrix[row][col])
            );
        }
    }
    if args.zl.is_some() || args.zm.is_some() {
        let params = CoherentParams::new(
            family,
            args.z,
            args.zl.unwrap_or(Complex64::new(0.0, 0.0)),
            args.zm.unwrap_or(Complex64::new(0.0, 0.0)),
        )?;
        let coherent = mcs_expectations(&params)?;
        let _ = writeln!(
            out,
            "JL_vec{sep}{:.12e},{:.12e},{:.12e}",
            coherent.jl_vec[0], coherent.jl_vec[1], coherent.jl_vec[2]
        );
        let _ = writeln!(
            out,
            "JM_vec{sep}{:.12e},{:.12e},{:.12e}",
            coherent.jm_vec[0], coherent.jm_vec[1], coherent.jm_vec[2]
        );
        let _ = writeln!(
            out,
            "lab_direction{sep}{:.12e},{:.12e},{:.12e}",
            coherent.lab_direction[0], coherent.lab_direction[1], coherent.lab_direction[2]
        );
        let _ = writeln!(
            out,
            "mol_direction{sep}{:.12e},{:.12e},{:.12e}",
            coherent.mol_direction[0], coherent.mol_direction[1], coherent.mol_direction[2]
        );
    }
    Ok(())
}

fn cmd_mcs_build(args: &BuildArgs, out: &mut String) -> Result<(), McsError> {
    let family = resolve_family(args.family, args.family_file.as_deref())?;
    let space = match args.two_j_max {
        Some(two_j_max) => SpaceSpec::new(two_j_max, family.tower()),
        None => default_space(&family, args.z)?,
    };
    let params = CoherentParams::new(family, args.z, args.zl, args.zm)?;
    let built = mcs(&params, &space)?;
    let text = built.state.to_text();
    match &args.output {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| McsError::Parse(format!("cannot write {path}: {e}")))?;
            let _ = writeln!(
                out,
                "wrote {} amplitudes to {path} (norm^2 = {:.12e}, tail = {:.3e})",
                built.state.support_len(),
                built.state.norm_sqr(),
                built.tail_weight
            );
        }
        None => out.push_str(&text),
    }
    Ok(())
}

fn cmd_verify_algebra(jmax: u32, log: &mut FailureLog, out: &mut String) -> Result<(), McsError> {
    let space = SpaceSpec::new(2 * jmax, Tower::HalfInteger);
    let report = commutator_defect(&space)?;
    let worst = report.max_defect();
    log.check("commutators", worst, 1e-12, out);
    let mut kinds: Vec<OperatorKind> = vec![
        OperatorKind::JLPlus,
        OperatorKind::JMMinus,
        OperatorKind::Lambda,
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
    let mut worst_adjoint: f64 = 0.0;
    for kind in kinds {
        worst_adjoint = worst_adjoint.max(adjoint_check(kind, &space)?);
    }
    log.check("adjoints", worst_adjoint, 1e-12, out);
    Ok(())
}

fn cmd_verify_unity(family: u8, jmax: u32, log: &mut FailureLog, out: &mut String) -> Result<(), McsError> {
    let fam = SequenceFamily::builtin(family)?;
    let measure = fam.measure().ok_or(McsError::MissingMeasure)?;
    let report = unity_suite(&fam, &measure, 2 * jmax, 1e-9)?;
    for (label, value) in &report.diagonal {
        let _ = writeln!(out, "diag {label} = {value:.8}");
    }
    log.check(
        &format!("unity-diagonal-family-{family}"),
        report.max_diag_defect,
        1e-4,
        out,
    );
    log.check(
        &format!("unity-beta-consistency-family-{family}"),
        report.beta_consistency,
        1e-10,
        out,
    );
    Ok(())
}

fn cmd_verify_identities(
    draws: usize,
    seed: u64,
    log: &mut FailureLog,
    out: &mut String,
) -> Result<(), McsError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for draw in 0..draws {
        let id = (draw % 8) as u8 + 1;
        let family = SequenceFamily::builtin(id)?;
        let r_cap = if family.domain_radius().is_finite() { 0.45 } else { 1.2 };
        let z = Complex64::from_polar(
            rng.gen_range(0.1..r_cap),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let zeta_l = Complex64::from_polar(rng.gen_range(0.0..1.5), rng.gen_range(0.0..std::f64::consts::TAU));
        let zeta_m = Complex64::from_polar(rng.gen_range(0.0..1.5), rng.gen_range(0.0..std::f64::consts::TAU));
        let params = CoherentParams::new(family, z, zeta_l, zeta_m)?;
        let space = SpaceSpec::new(20, params.family.tower());
        let fundamental = mfs(&params.family, params.z, &space)?.state;
        for (_, residual) in mfs_identity_residuals(&fundamental)? {
            worst = worst.max(residual);
        }
        let coherent = mcs(&params, &space)?.state;
        for (_, residual) in mcs_annihilation_residuals(&params, &coherent)? {
            worst = worst.max(residual);
        }
    }
    log.check("state-identities", worst, 1e-10, out);
    Ok(())
}

fn cmd_verify_mellin(two_j_max: u32, log: &mut FailureLog, out: &mut String) -> Result<(), McsError> {
    let two_js: Vec<u32> = (0..=two_j_max).collect();
    let mut worst: f64 = 0.0;
    for fam in SequenceFamily::all_builtin() {
        let measure = fam.measure().ok_or(McsError::MissingMeasure)?;
        let report = mellin_moment_check(&fam, &measure, &two_js, 1e-10)?;
        worst = worst.max(report.max_rel_defect());
    }
    log.check("mellin-moments", worst, 1e-8, out);
    Ok(())
}

fn cmd_evolve(args: &EvolveArgs, out: &mut String) -> Result<(), McsError> {
    let family = resolve_family(args.family, args.family_file.as_deref())?;
    let params = CoherentParams::new(family, args.z, args.zl, args.zm)?;
    let drive = read_drive(&args.drive)?;
    let trajectory = integrate(
        &|_| drive,
        &EvolutionState::initial(params.zeta_l, params.zeta_m),
        args.t_end,
        args.dt,
    )?;
    let j0_z = mfs_expectations(&params.family, params.z)?.j0;
    let _ = writeln!(
        out,
        "t,zeta_l_re,zeta_l_im,zeta_m_re,zeta_m_im,sigma,JL1,JL2,JL0,JM1,JM2,JM0"
    );
    for (index, state) in trajectory.iter().enumerate() {
        if index % args.sample_every.max(1) != 0 && index != trajectory.len() - 1 {
            continue;
        }
        let lab = molcs_core::coherent::lab_axis_direction(state.zeta_l);
        let mol = molcs_core::coherent::mol_axis_direction(state.zeta_m);
        let _ = writeln!(
            out,
            "{:.6},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            state.t,
            state.zeta_l.re,
            state.zeta_l.im,
            state.zeta_m.re,
            state.zeta_m.im,
            state.sigma,
            j0_z * lab[0],
            j0_z * lab[1],
            j0_z * lab[2],
            j0_z * mol[0],
            j0_z * mol[1],
            j0_z * mol[2],
        );
    }
    Ok(())
}

/// Run the CLI against the given argument list; output is collected into
/// `sink`. Returns the process exit code.
pub fn run<W: Write>(args: &[String], sink: &mut W) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = write!(sink, "{err}");
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    let mut out = String::new();
    let mut log = FailureLog::new();
    let result: Result<(), McsError> = match &cli.command {
        Command::Families { action } => match action {
            FamiliesAction::Table { samples, format } => {
                cmd_families_table(*samples, *format, &mut out)
            }
        },
        Command::Mcs { action } => match action {
            McsAction::Build(args) => cmd_mcs_build(args, &mut out),
        },
        Command::Expect(args) => cmd_expect(args, &mut out),
        Command::Tables { action } => match action {
            TablesAction::Reproduce { which, samples } => {
                cmd_tables_reproduce(*which, *samples, &mut out)
            }
            TablesAction::Rotor { a0, a1, a2, two_j } => {
                let constants = RotorConstants::new(*a0, *a1, *a2);
                let space = SpaceSpec::new(*two_j, Tower::HalfInteger);
                rotor_hamiltonian(&constants, &space).map(|blocks| {
                    if let Some(block) = blocks.iter().find(|b| b.two_j == *two_j) {
                        out.push_str(&block_to_csv(&block.matrix));
                    }
                })
            }
        },
        Command::Verify { action } => match action {
            VerifyAction::Algebra { jmax } => cmd_verify_algebra(*jmax, &mut log, &mut out),
            VerifyAction::Unity { family, jmax } => {
                cmd_verify_unity(*family, *jmax, &mut log, &mut out)
            }
            VerifyAction::Identities { draws, seed } => {
                cmd_verify_identities(*draws, *seed, &mut log, &mut out)
            }
            VerifyAction::Mellin { two_j_max } => cmd_verify_mellin(*two_j_max, &mut log, &mut out),
            VerifyAction::All { jmax, seed } => cmd_verify_algebra((*jmax).max(1), &mut log, &mut out)
                .and_then(|_| {
                    for family in 1..=8u8 {
                        cmd_verify_unity(family, *jmax, &mut log, &mut out)?;
                    }
                    Ok(())
                })
                .and_then(|_| cmd_verify_identities(16, *seed, &mut log, &mut out))
                .and_then(|_| cmd_verify_mellin(8, &mut log, &mut out)),
        },
        Command::Evolve(args) => cmd_evolve(args, &mut out),
    };
    let _ = sink.write_all(out.as_bytes());
    match result {
        Ok(()) if log.failed() => 1,
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(sink, "error: {err}");
            2
        }
    }
}
