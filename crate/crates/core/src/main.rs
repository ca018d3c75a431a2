use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use abelian_height::census::{self, CensusConfig, CensusError, Format};
use abelian_height::curves::{Curve, CurveError, EllipticCurve, Genus2Curve, RecordJson};
use abelian_height::dieudonne::{h2_model, ModelJson};
use abelian_height::fields::{Poly, PrimeSpec};
use abelian_height::formalgroup::{
    additive_fgl, default_precision, elliptic_height, height_of, multiplicative_fgl, PSeriesJson,
};
use abelian_height::tables::{consistency_check, dimension_report, SurfaceType};
use abelian_height::witt::{selfcheck, SelfcheckConfig};
use abelian_height::Height;

#[derive(Parser)]
#[command(name = "abelian-height", version, about = "Heights, p-ranks and Witt-vector checks in characteristic p")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Odd prime p <= 13.
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Degree d of the base field F_{p^d}.
    #[arg(long = "field-deg", global = true, default_value_t = 1)]
    field_deg: usize,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Classify y^2 = f(x) (deg f in {5, 6}, or x^3 + a x + b).
    Classify {
        #[arg(long)]
        curve: String,
        /// Cross-check against the Newton slopes of the L-polynomial.
        #[arg(long)]
        verify: bool,
    },
    /// Classify every curve of the given shape over F_q.
    Census {
        #[arg(long, value_enum, default_value_t = DegreeArg::Both)]
        degree: DegreeArg,
        #[arg(long, default_value_t = 2)]
        genus: u32,
        #[arg(long)]
        verify: bool,
        /// Draw this many random curves instead of enumerating all.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Witt vector utilities.
    Witt {
        #[command(subcommand)]
        action: WittCommand,
    },
    /// Cohomology dimension tables.
    Tables {
        #[arg(long = "type")]
        surface: Option<SurfaceType>,
        #[arg(long, default_value_t = 1)]
        i: u32,
        /// Run the consistency identities over all types.
        #[arg(long)]
        check: bool,
    },
    /// Truncated Dieudonné model of a given height.
    Dieudonne {
        /// 1, 2, ... or inf.
        #[arg(long)]
        height: Height,
        #[arg(long)]
        len: usize,
    },
    /// [p]-series and height of a formal group law.
    FormalGroup {
        #[arg(long, allow_hyphen_values = true)]
        a: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<i64>,
        #[arg(long)]
        prec: Option<usize>,
        #[arg(long, value_enum)]
        builtin: Option<Builtin>,
    },
}

#[derive(Subcommand)]
enum WittCommand {
    /// Check the ring axioms and operator relations on random vectors.
    Selfcheck {
        #[arg(long, default_value_t = 3)]
        len: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DegreeArg {
    #[value(name = "5")]
    Five,
    #[value(name = "6")]
    Six,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Gm,
    Ga,
}

/// Exit code 1: bad input. Exit code 2: a check failed.
enum Failure {
    Usage(String),
    Violation(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

impl From<CensusError> for Failure {
    fn from(e: CensusError) -> Self {
        match e {
            CensusError::Oracle(_) | CensusError::Invariant(_) => Failure::Violation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<CurveError> for Failure {
    fn from(e: CurveError) -> Self {
        match e {
            CurveError::OracleDisagreement { .. } | CurveError::NonIntegerA2(_) => Failure::Violation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn require_p(g: &Global) -> Result<u32, Failure> {
    g.p.ok_or_else(|| usage("--p is required for this command"))
}

fn base_field(g: &Global) -> Result<&'static PrimeSpec, Failure> {
    PrimeSpec::extension(require_p(g)?, g.field_deg).map_err(usage)
}

fn emit_json<T: Serialize>(g: &Global, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(usage)?;
    match &g.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn parse_curve(spec: &'static PrimeSpec, s: &str) -> Result<Curve, Failure> {
    let f = Poly::parse(spec, s).map_err(usage)?;
    if f.degree() == Some(3) {
        let cubic_shape = f.coeff(3).is_one() && f.coeff(2).is_zero();
        if !cubic_shape {
            return Err(usage("cubic curves must have the form x^3 + a*x + b"));
        }
        return Ok(Curve::Elliptic(EllipticCurve::new(f.coeff(1), f.coeff(0))?));
    }
    Ok(Curve::Genus2(Genus2Curve::new(f)?))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Classify { curve, verify } => {
            let spec = base_field(g)?;
            let record = parse_curve(spec, &curve)?.classify(verify)?;
            record.check_invariants().map_err(Failure::Violation)?;
            emit_json(g, &RecordJson::from(&record))
        }
        Command::Census { degree, genus, verify, samples } => {
            let degrees = match degree {
                DegreeArg::Five => vec![5],
                DegreeArg::Six => vec![6],
                DegreeArg::Both => vec![5, 6],
            };
            let cfg = CensusConfig {
                p: require_p(g)?,
                field_deg: g.field_deg,
                genus,
                degrees,
                verify,
                jobs: g.jobs,
                samples,
                seed: g.seed,
            };
            let report = census::run_census(&cfg)?;
            let format = match g.format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
            match &g.out {
                Some(path) => {
                    census::emit_report(&report, format, path)?;
                    eprintln!("wrote {} records to {}", report.total, path.display());
                }
                None => {
                    let out = io::stdout().lock();
                    match format {
                        Format::Csv => census::write_csv(&report.rows, out).map_err(usage)?,
                        Format::Json => census::write_json(&report, out).map_err(usage)?,
                    }
                }
            }
            Ok(())
        }
        Command::Witt { action: WittCommand::Selfcheck { len, samples } } => {
            let cfg = SelfcheckConfig { p: require_p(g)?, deg: g.field_deg, len, samples, seed: g.seed };
            let results = selfcheck(&cfg).map_err(usage)?;
            emit_json(g, &results)?;
            match results.iter().find(|r| !r.passed()) {
                Some(r) => Err(Failure::Violation(format!("relation {:?} failed {} times", r.name, r.failures))),
                None => Ok(()),
            }
        }
        Command::Tables { surface, i, check } => {
            if check {
                let report = consistency_check();
                emit_json(g, &report)?;
                return match report.failures().first() {
                    Some(row) => Err(Failure::Violation(format!(
                        "{} fails for type {} at i = {}",
                        row.identity, row.surface, row.i
                    ))),
                    None => Ok(()),
                };
            }
            let types = match surface {
                Some(t) => vec![t],
                None => SurfaceType::ALL.to_vec(),
            };
            let rows = types.into_iter().map(|t| dimension_report(t, i)).collect::<Result<Vec<_>, _>>().map_err(usage)?;
            emit_json(g, &rows)
        }
        Command::Dieudonne { height, len } => {
            let base = match g.p {
                Some(p) => PrimeSpec::extension(p, g.field_deg).map_err(usage)?,
                None => PrimeSpec::prime_field(3).map_err(usage)?,
            };
            let model = h2_model(height, len, base).map_err(usage)?;
            emit_json(g, &ModelJson::from(&model))
        }
        Command::FormalGroup { a, b, prec, builtin } => {
            let spec = base_field(g)?;
            let prec = prec.unwrap_or_else(|| default_precision(spec.p()));
            let (series, height) = match (builtin, a, b) {
                (Some(kind), None, None) => {
                    let law = match kind {
                        Builtin::Gm => multiplicative_fgl(spec, prec),
                        Builtin::Ga => additive_fgl(spec, prec),
                    }
                    .map_err(usage)?;
                    let s = law.p_series();
                    let h = height_of(&s).map_err(usage)?;
                    (s, h)
                }
                (None, Some(a), Some(b)) => {
                    let e = EllipticCurve::from_ints(spec, a, b)?;
                    elliptic_height(&e, prec).map_err(|e| Failure::Violation(e.to_string()))?
                }
                _ => return Err(usage("give either --builtin or both --a and --b")),
            };
            emit_json(g, &PSeriesJson::new(&series, height))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}
