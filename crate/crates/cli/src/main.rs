use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use trispin_core::chainlab::{
    chirality_operator, chirality_reference_states, diagonalize, duality_scan, subspace_overlap, SpectrumReport,
};
use trispin_core::closedform::{Boundary, Family};
use trispin_core::config::{ChiralConfig, Config};
use trispin_core::conformance::{formula_couplings, run_verification};
use trispin_core::scan::run_scan;
use trispin_core::HubbardParams;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] trispin_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0} hard check(s) failed")]
    HardFailure(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if is_usage(e) => 2,
            _ => 1,
        }
    }
}

fn is_usage(e: &trispin_core::Error) -> bool {
    use trispin_core::Error as E;
    matches!(
        e,
        E::Config(_) | E::InvalidInteraction(_) | E::NotPurelyImaginary | E::FormulaPrecondition(_) | E::UnknownLink(_)
    )
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "trispin", version, about = "Three-spin effective Hamiltonians from two-species Hubbard models")]
struct Cli {
    /// JSON config document; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write output here instead of stdout
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form couplings for one parameter point, as JSON
    Couplings(CouplingArgs),
    /// Couplings over a (J_up, J_dn) grid, as CSV
    Scan(ScanArgs),
    /// Cross-oracle conformance report, as JSON
    Verify(VerifyArgs),
    /// Gap scan of the three-spin chain, as CSV
    Chain(ChainArgs),
    /// Chirality spectrum and eigenvector overlaps, as JSON
    Chiral(ChiralArgs),
}

#[derive(Args)]
struct CouplingArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Up tunneling, one value or three per-link values
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    j_up: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    j_dn: Vec<f64>,
    /// Sets every interaction not given explicitly
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    uuu: Option<f64>,
    #[arg(long)]
    udd: Option<f64>,
    #[arg(long)]
    uud: Option<f64>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    points: Option<usize>,
    /// `min,max` of J_up
    #[arg(long, value_delimiter = ',')]
    j_up: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    j_dn: Option<Vec<f64>>,
    #[arg(long)]
    uuu: Option<f64>,
    #[arg(long)]
    udd: Option<f64>,
    #[arg(long)]
    uud: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    draws: Option<usize>,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    bx_min: Option<f64>,
    #[arg(long)]
    bx_max: Option<f64>,
    #[arg(long)]
    bx_step: Option<f64>,
    #[arg(long)]
    open: bool,
}

#[derive(Args)]
struct ChiralArgs {
    #[arg(long)]
    tau4: Option<f64>,
}

#[derive(Copy, Clone, clap::ValueEnum)]
enum FamilyArg {
    Bosonic,
    Fermionic,
    ComplexBosonic,
    ComplexFermionic,
    RotatedXy,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Bosonic => Family::Bosonic,
            FamilyArg::Fermionic => Family::Fermionic,
            FamilyArg::ComplexBosonic => Family::ComplexBosonic,
            FamilyArg::ComplexFermionic => Family::ComplexFermionic,
            FamilyArg::RotatedXy => Family::RotatedXy,
        }
    }
}

/// Shortest-roundtrip-safe float text: 17 significant digits.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn load_config(path: &Option<PathBuf>) -> CliResult<Config> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            Ok(Config::from_json(&text)?)
        }
        None => Ok(Config::default()),
    }
}

fn sink(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> CliResult<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn links(v: &[f64]) -> CliResult<[f64; 3]> {
    match *v {
        [x] => Ok([x; 3]),
        [a, b, c] => Ok([a, b, c]),
        _ => Err(CliError::Usage(format!("expected 1 or 3 tunneling values, got {}", v.len()))),
    }
}

fn range(v: &[f64]) -> CliResult<[f64; 2]> {
    match *v {
        [a, b] => Ok([a, b]),
        _ => Err(CliError::Usage(format!("expected min,max, got {} value(s)", v.len()))),
    }
}

fn couplings_params(a: &CouplingArgs) -> CliResult<HubbardParams> {
    let family = Family::from(a.family);
    let pick = |x: Option<f64>, name: &str| {
        x.or(a.u)
            .ok_or_else(|| CliError::Usage(format!("--{name} (or --u) is required")))
    };
    let up = links(&a.j_up)?;
    let dn = links(&a.j_dn)?;
    let base = match family {
        Family::Fermionic | Family::ComplexFermionic => HubbardParams::fermionic(pick(a.uud, "uud")?),
        Family::RotatedXy => HubbardParams::equal_u(pick(a.uud, "uud")?),
        _ => HubbardParams::new(pick(a.uuu, "uuu")?, pick(a.udd, "udd")?, pick(a.uud, "uud")?),
    };
    Ok(match family {
        Family::ComplexBosonic | Family::ComplexFermionic => {
            let mut p = base;
            for l in 0..3 {
                p = p
                    .with_j(l, trispin_core::Species::Up, Complex64::new(0.0, up[l]))
                    .with_j(l, trispin_core::Species::Down, Complex64::new(0.0, dn[l]));
            }
            p
        }
        _ => base.with_real_j(&up, &dn),
    })
}

fn cmd_couplings(cli: &Cli, a: &CouplingArgs) -> CliResult<()> {
    let params = couplings_params(a)?;
    let c = formula_couplings(a.family.into(), &params)?;
    write_json(&cli.out, &c)
}

fn cmd_scan(cli: &Cli, a: &ScanArgs) -> CliResult<()> {
    let mut cfg = load_config(&cli.config)?.scan;
    if let Some(f) = a.family {
        cfg.family = f.into();
    }
    if let Some(p) = a.points {
        cfg.points = p;
    }
    if let Some(r) = &a.j_up {
        cfg.j_up = range(r)?;
    }
    if let Some(r) = &a.j_dn {
        cfg.j_dn = range(r)?;
    }
    cfg.u_upup = a.uuu.unwrap_or(cfg.u_upup);
    cfg.u_dndn = a.udd.unwrap_or(cfg.u_dndn);
    cfg.u_updn = a.uud.unwrap_or(cfg.u_updn);
    let result = run_scan(&cfg)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let mut w = csv::Writer::from_writer(sink(&cli.out)?);
    w.write_record(&result.columns)?;
    for row in &result.rows {
        let mut rec = vec![fmt(row.j_up), fmt(row.j_dn)];
        rec.extend(row.values.iter().map(|&v| fmt(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> CliResult<()> {
    let mut cfg = load_config(&cli.config)?.verify;
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.draws = a.draws.unwrap_or(cfg.draws);
    let report = run_verification(&cfg)?;
    write_json(&cli.out, &report)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for f in &report.hard_failures {
        eprintln!("FAIL: {f}");
    }
    if report.hard_failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::HardFailure(report.hard_failures.len()))
    }
}

fn cmd_chain(cli: &Cli, a: &ChainArgs) -> CliResult<()> {
    let mut cfg = load_config(&cli.config)?.chain;
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.bx_min = a.bx_min.unwrap_or(cfg.bx_min);
    cfg.bx_max = a.bx_max.unwrap_or(cfg.bx_max);
    cfg.bx_step = a.bx_step.unwrap_or(cfg.bx_step);
    if a.open {
        cfg.boundary = Boundary::Open;
    }
    let scan = duality_scan(&cfg.grid()?, cfg.n, cfg.boundary)?;
    let mut w = csv::Writer::from_writer(sink(&cli.out)?);
    w.write_record(["parameter", "E0", "E1", "gap", "degeneracy0", "duality"])?;
    for p in &scan.points {
        w.write_record([
            fmt(p.bx),
            fmt(p.e0),
            fmt(p.e1),
            fmt(p.gap),
            p.degeneracy0.to_string(),
            p.duality.map(fmt).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    eprintln!("n = {}: gap minimum {:.6} at Bx = {:.4}", scan.n, scan.min_gap, scan.argmin);
    Ok(())
}

#[derive(Serialize)]
struct ChiralOutput {
    config: ChiralConfig,
    spectrum: SpectrumReport,
    /// Overlap of each printed lowest state with the lowest eigenspace.
    lowest_overlaps: Vec<f64>,
    /// Overlap of each conjugated state with the highest eigenspace.
    conjugate_overlaps: Vec<f64>,
}

fn cmd_chiral(cli: &Cli, a: &ChiralArgs) -> CliResult<()> {
    let mut cfg = load_config(&cli.config)?.chiral;
    cfg.tau4 = a.tau4.unwrap_or(cfg.tau4);
    let chi = chirality_operator(&cfg.triangles, cfg.n_sites)? * Complex64::new(cfg.tau4, 0.0);
    let dim = chi.nrows();
    let mut spectrum = diagonalize(&chi, Some(dim))?;
    let vectors = spectrum.eigenvectors.take().unwrap_or_default();
    let (mut lowest_overlaps, mut conjugate_overlaps) = (Vec::new(), Vec::new());
    if cfg.n_sites == 3 && cfg.triangles.len() == 1 {
        let low_dim = spectrum.ground_degeneracy();
        let high_dim = *spectrum.degeneracies.last().unwrap_or(&0);
        let low = &vectors[..low_dim];
        let high = &vectors[dim - high_dim..];
        for s in chirality_reference_states() {
            lowest_overlaps.push(subspace_overlap(&s, low));
            let conj: Vec<Complex64> = s.iter().map(|z| z.conj()).collect();
            conjugate_overlaps.push(subspace_overlap(&conj, high));
        }
    }
    write_json(
        &cli.out,
        &ChiralOutput {
            config: cfg,
            spectrum,
            lowest_overlaps,
            conjugate_overlaps,
        },
    )
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("TRISPIN_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("TRISPIN_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Couplings(a) => cmd_couplings(cli, a),
        Command::Scan(a) => cmd_scan(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Chain(a) => cmd_chain(cli, a),
        Command::Chiral(a) => cmd_chiral(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
