use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use flexline::catalog::{CurveId, CurveSpec};
use flexline::gf::FieldCtx;
use flexline::report::{cmd_analyze, cmd_jcheck, cmd_scan, cmd_theorem, AnalyzeOptions, Report, TheoremOptions, SCAN_BOUND};

#[derive(Parser)]
#[command(name = "flexline", version, about = "Inflection lines of plane quartics over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Fixed seed for the random coordinate changes.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Flexes, configuration, groups and signatures of one curve.
    Analyze {
        #[arg(long)]
        curve: String,
        #[arg(long = "char")]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        u: Option<i64>,
        /// Work over this field, e.g. `13^2` or `13^2/2,0,1`.
        #[arg(long)]
        field: Option<String>,
        /// Include the flexes and the configuration.
        #[arg(long)]
        details: bool,
        /// Also check the named maps.
        #[arg(long)]
        maps: bool,
    },
    /// Compare the configurations of all catalog curves at one prime.
    Theorem {
        #[arg(long = "char")]
        p: u64,
        /// Restrict the V_u sweep to these values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        u: Option<Vec<i64>>,
    },
    /// Run the theorem check for every prime from 5 to --max.
    Scan {
        #[arg(long, default_value_t = SCAN_BOUND)]
        max: u64,
    },
    /// j-invariant of the elliptic curve attached to K.
    Jcheck {
        #[arg(long = "char")]
        p: u64,
    },
}

fn spec_of(curve: &str, p: u64, u: Option<i64>) -> Result<CurveSpec, String> {
    let id: CurveId = curve.parse().map_err(|e| format!("{e}"))?;
    if p == 0 {
        return Err("characteristic must be positive".into());
    }
    Ok(match (id, u) {
        (CurveId::Vu, Some(u)) => CurveSpec::vu(p, u),
        _ => CurveSpec::new(id, p),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match cli.command {
        Command::Analyze { curve, p, u, field, details, maps } => {
            let field = match field.as_deref().map(FieldCtx::parse_spec).transpose() {
                Ok(f) => f,
                Err(e) => return usage(&format!("bad --field: {e}")),
            };
            match spec_of(&curve, p, u) {
                Ok(spec) => cmd_analyze(
                    &spec,
                    &AnalyzeOptions {
                        seed: cli.seed_override,
                        field,
                        details,
                        named_maps: maps,
                    },
                ),
                Err(e) => return usage(&e),
            }
        }
        Command::Theorem { p, u } => {
            let u_values = u.map(|v| v.iter().map(|x| x.rem_euclid(p.max(1) as i64) as u64).collect());
            cmd_theorem(p, &TheoremOptions { u_values, seed: cli.seed_override })
        }
        Command::Scan { max } => cmd_scan(max, &TheoremOptions { u_values: None, seed: cli.seed_override }),
        Command::Jcheck { p } => cmd_jcheck(p),
    };
    emit(&report, cli.format)
}

fn emit(r: &Report, format: Format) -> ExitCode {
    match format {
        Format::Json => print!("{}", r.to_json()),
        Format::Text => print!("{}", r.to_text()),
    }
    ExitCode::from(r.exit_code() as u8)
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("flexline: {msg}");
    ExitCode::from(2)
}
