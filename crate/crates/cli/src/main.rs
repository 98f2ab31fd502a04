//! `qbaker`: construct, verify, and evolve the quantum baker's map.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use qbaker::classical::{orbit, TorusPoint};
use qbaker::fast::FastPropagator;
use qbaker::io::{self, CheckResult};
use qbaker::matrix::commutator_defect;
use qbaker::propagator::{eigenphases, PropagatorMatrix, PropagatorVariant};
use qbaker::sector::{self, DOUBLED_BASIS_ORDER};
use qbaker::semiclassics::{self, CoherentParams};
use qbaker::torus::{norm, parity_matrix, HilbertConfig, StateVector};
use qbaker::ComplexMatrix;

#[derive(Parser, Debug)]
#[command(name = "qbaker", version, about = "Parity-conserving quantum baker's map at h = 1/N")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the N×N propagator in qbaker-matrix v1 format.
    Matrix(MatrixArgs),
    /// Write sorted eigenphases as CSV `index,phase`.
    Spectrum(SpectrumArgs),
    /// Apply the propagator repeatedly and write the final state.
    Evolve(EvolveArgs),
    /// Run unitarity, parity, oracle and leakage checks; exit 1 on failure.
    Verify(VerifyArgs),
    /// Weak classical limit report `N,re_q,im_q,re_c,im_c,error`.
    ClassicalLimit(LimitArgs),
    /// Coherent-state overlaps `x0,p0,overlap` on a G×G grid.
    PhasePortrait(PortraitArgs),
    /// Classical orbit as CSV `step,x,p`.
    Orbit(OrbitArgs),
    /// Write the assembled 2N×2N factorization and print `leakage=<value>`.
    Sector(SectorArgs),
    /// Localization table `operator,region,measured_mass,expected_limit`.
    Localization(LocalizationArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Hilbert space dimension (even, at least 2).
    #[arg(long = "n", value_parser = parse_even)]
    n: usize,
    /// Propagator variant.
    #[arg(long, default_value = "parity", value_parser = parse_variant)]
    variant: PropagatorVariant,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[command(flatten)]
    common: Common,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    /// Dimension; required unless --input is given.
    #[arg(long = "n", value_parser = parse_even, required_unless_present = "input")]
    n: Option<usize>,
    /// Propagator variant.
    #[arg(long, default_value = "parity", value_parser = parse_variant)]
    variant: PropagatorVariant,
    /// Read the matrix from a qbaker-matrix v1 file instead of building it.
    #[arg(long, conflicts_with = "identity")]
    input: Option<PathBuf>,
    /// Use the N×N identity (debugging aid).
    #[arg(long)]
    identity: bool,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct InitialState {
    /// Start from position basis vector e_m.
    #[arg(long, conflicts_with_all = ["x0", "p0"])]
    basis_index: Option<usize>,
    /// Coherent-state centre x0.
    #[arg(long, requires = "p0", allow_negative_numbers = true)]
    x0: Option<f64>,
    /// Coherent-state centre p0.
    #[arg(long, requires = "x0", allow_negative_numbers = true)]
    p0: Option<f64>,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    init: InitialState,
    /// Number of applications of the propagator.
    #[arg(long, default_value_t = 1)]
    steps: usize,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Output report file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LimitArgs {
    /// Harmonic exponent of U.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    a: i64,
    /// Harmonic exponent of V.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    b: i64,
    /// Packet centre x0.
    #[arg(long, default_value_t = 0.3)]
    x0: f64,
    /// Packet centre p0.
    #[arg(long, default_value_t = 0.7)]
    p0: f64,
    /// Ascending even dimensions, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "32,128,512", value_parser = parse_even)]
    n_list: Vec<usize>,
    /// Propagator variant.
    #[arg(long, default_value = "parity", value_parser = parse_variant)]
    variant: PropagatorVariant,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PortraitArgs {
    #[command(flatten)]
    common: Common,
    /// Read the state from a qbaker-state v1 file.
    #[arg(long, conflicts_with_all = ["basis_index", "x0", "p0"])]
    input: Option<PathBuf>,
    #[command(flatten)]
    init: InitialState,
    /// Propagator applications before sampling.
    #[arg(long, default_value_t = 0)]
    steps: usize,
    /// Grid points per axis.
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    /// Initial x in [0, 1).
    #[arg(long)]
    x0: f64,
    /// Initial p in [0, 1).
    #[arg(long)]
    p0: f64,
    /// Number of map applications.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SectorArgs {
    /// Hilbert space dimension (even, at least 2).
    #[arg(long = "n", value_parser = parse_even)]
    n: usize,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LocalizationArgs {
    /// Hilbert space dimension (even, at least 2).
    #[arg(long = "n", default_value_t = 256, value_parser = parse_even)]
    n: usize,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

fn parse_even(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(format!("N must be even and at least 2, got {n}"));
    }
    Ok(n)
}

fn parse_variant(s: &str) -> Result<PropagatorVariant, String> {
    s.parse().map_err(|e: qbaker::Error| e.to_string())
}

/// Failure carrying its exit code.
#[derive(Debug)]
enum Failure {
    Verification(String),
    Usage(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<qbaker::Error> for Failure {
    fn from(e: qbaker::Error) -> Self {
        match e {
            qbaker::Error::Io(_) => Failure::Io(e.into()),
            other => Failure::Usage(other.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic<F>(path: &Path, body: F) -> Outcome
where
    F: FnOnce(&mut dyn Write) -> qbaker::Result<()>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io_err = |e: anyhow::Error| Failure::Io(e.context(format!("writing {}", path.display())));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| io_err(e.into()))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w).map_err(|e| io_err(e.into()))?;
        w.flush().map_err(|e| io_err(e.into()))?;
    }
    tmp.persist(path).map_err(|e| io_err(e.error.into()))?;
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(Failure::Io)
}

fn initial_state(cfg: &HilbertConfig, init: &InitialState) -> Result<StateVector, Failure> {
    match (init.basis_index, init.x0, init.p0) {
        (Some(m), _, _) => Ok(StateVector::basis_vector(cfg.n(), m)?),
        (None, Some(x0), Some(p0)) => {
            Ok(semiclassics::project_to_sector(&CoherentParams::for_sector(x0, p0, cfg)?, cfg)?)
        }
        _ => Err(Failure::Usage(anyhow::anyhow!(
            "give either --basis-index or both --x0 and --p0"
        ))),
    }
}

fn cmd_matrix(args: &MatrixArgs) -> Outcome {
    let cfg = HilbertConfig::new(args.common.n)?;
    let m = PropagatorMatrix::build(&cfg, args.common.variant);
    let tag = args.common.variant.tag();
    write_atomic(&args.out, |w| io::write_matrix(w, &m.matrix, &[("variant", tag)]))
}

fn cmd_spectrum(args: &SpectrumArgs) -> Outcome {
    let matrix = if let Some(path) = &args.input {
        io::read_matrix(open(path)?)?.matrix
    } else {
        let n = args.n.expect("clap enforces --n without --input");
        if args.identity {
            ComplexMatrix::identity(n)
        } else {
            PropagatorMatrix::build(&HilbertConfig::new(n)?, args.variant).matrix
        }
    };
    let phases = eigenphases(&matrix)?;
    write_atomic(&args.out, |w| io::write_eigenphases_csv(w, &phases))
}

fn evolve(cfg: &HilbertConfig, variant: PropagatorVariant, mut state: StateVector, steps: usize) -> Result<(StateVector, f64), Failure> {
    let fp = FastPropagator::new(cfg, variant);
    let start = state.norm();
    let mut drift: f64 = 0.0;
    for _ in 0..steps {
        fp.apply_in_place(&mut state.coeffs)?;
        drift = drift.max((norm(&state.coeffs) - start).abs());
    }
    Ok((state, drift))
}

fn cmd_evolve(args: &EvolveArgs) -> Outcome {
    let cfg = HilbertConfig::new(args.common.n)?;
    let init = initial_state(&cfg, &args.init)?;
    let (state, drift) = evolve(&cfg, args.common.variant, init, args.steps)?;
    write_atomic(&args.out, |w| io::write_state(w, &state))?;
    println!("norm_drift={}", io::fmt_real(drift));
    let allowed = args.steps as f64 * 1e-12;
    if drift > allowed {
        return Err(Failure::Verification(format!(
            "norm drift {drift:e} exceeds {allowed:e}"
        )));
    }
    Ok(())
}

fn verify_checks(cfg: &HilbertConfig, variant: PropagatorVariant) -> Vec<CheckResult> {
    let m = PropagatorMatrix::build(cfg, variant).matrix;
    let check = |name: &str, value: f64, threshold: f64| CheckResult {
        check: name.to_string(),
        value,
        threshold,
        pass: value < threshold,
    };
    let f = sector::assemble_f(cfg);
    let oracle = f.block(0, 0, cfg.n());
    vec![
        check("unitarity", m.unitary_defect(), 1e-10),
        check(
            "parity_commutator",
            commutator_defect(&parity_matrix(cfg), &m).expect("same dimension"),
            1e-12,
        ),
        check(
            "oracle_equivalence",
            oracle.max_abs_diff(&m).expect("same dimension"),
            sector::ORACLE_TOLERANCE,
        ),
        check("sector_leakage", sector::leakage(&f), sector::LEAKAGE_TOLERANCE),
    ]
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let cfg = HilbertConfig::new(args.common.n)?;
    let checks = verify_checks(&cfg, args.common.variant);
    write_atomic(&args.out, |w| io::write_verify_csv(w, &checks))?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.check.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}

fn cmd_classical_limit(args: &LimitArgs) -> Outcome {
    let report =
        semiclassics::weak_limit_experiment(args.a, args.b, args.x0, args.p0, &args.n_list, args.variant)?;
    write_atomic(&args.out, |w| io::write_limit_csv(w, &report))
}

fn cmd_phase_portrait(args: &PortraitArgs) -> Outcome {
    let cfg = HilbertConfig::new(args.common.n)?;
    let init = match &args.input {
        Some(path) => {
            let s = io::read_state(open(path)?)?;
            if s.dim() != cfg.n() {
                return Err(qbaker::Error::DimensionMismatch {
                    expected: cfg.n(),
                    found: s.dim(),
                }
                .into());
            }
            s
        }
        None => initial_state(&cfg, &args.init)?,
    };
    let (state, _) = evolve(&cfg, args.common.variant, init, args.steps)?;
    let points = semiclassics::phase_portrait(&state, args.grid)?;
    write_atomic(&args.out, |w| io::write_portrait_csv(w, &points))
}

fn cmd_orbit(args: &OrbitArgs) -> Outcome {
    let pts = orbit(TorusPoint::new(args.x0, args.p0)?, args.steps);
    write_atomic(&args.out, |w| io::write_orbit_csv(w, &pts))
}

fn cmd_sector(args: &SectorArgs) -> Outcome {
    let cfg = HilbertConfig::new(args.n)?;
    let f = sector::assemble_f(&cfg);
    let leak = sector::leakage(&f);
    write_atomic(&args.out, |w| {
        io::write_matrix(w, &f, &[("basis", DOUBLED_BASIS_ORDER)])
    })?;
    println!("leakage={}", io::fmt_real(leak));
    if leak < sector::LEAKAGE_TOLERANCE {
        Ok(())
    } else {
        Err(Failure::Verification(format!("leakage {leak:e}")))
    }
}

fn cmd_localization(args: &LocalizationArgs) -> Outcome {
    let rows = semiclassics::localization_table(&HilbertConfig::new(args.n)?)?;
    write_atomic(&args.out, |w| io::write_localization_csv(w, &rows))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Matrix(a) => cmd_matrix(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::ClassicalLimit(a) => cmd_classical_limit(a),
        Command::PhasePortrait(a) => cmd_phase_portrait(a),
        Command::Orbit(a) => cmd_orbit(a),
        Command::Sector(a) => cmd_sector(a),
        Command::Localization(a) => cmd_localization(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Verification(msg) => eprintln!("qbaker: verification failed: {msg}"),
                Failure::Usage(e) | Failure::Io(e) => eprintln!("qbaker: {e:#}"),
            }
            ExitCode::from(failure.code())
        }
    }
}
