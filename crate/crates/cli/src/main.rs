mod commands;
mod report;
mod tensor;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pofx_core::{QuantScheme, Requant, Variant};
use pofx_core::accel::AcceleratorDesign;
use pofx_core::quant::NegOnePolicy;

/// Exit codes: 0 success, 2 usage error, 3 domain error, 4 I/O error.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) | CliError::Io(m) => m,
        }
    }
}

impl From<pofx_core::Error> for CliError {
    fn from(e: pofx_core::Error) -> Self {
        use pofx_core::Error as E;
        match e {
            E::Parse { .. }
            | E::MalformedBits(_)
            | E::PatternTooWide { .. }
            | E::InvalidPositConfig { .. }
            | E::InvalidFxpConfig { .. }
            | E::NormalizedFractionMismatch { .. }
            | E::EnumerationTooLarge(_)
            | E::UnknownObjective(_) => CliError::Usage(e.to_string()),
            E::CostTable(_) => CliError::Io(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

const SCHEME_HELP: &str = "Quantization scheme: fxp:M:F, posit:N:ES, pofx:N:ES:M (normalized posit \
stored in N-1 bits, converted to FxP(M,M-1)) or fpf:M:N:ES (FxP(M,M-1) first, then as pofx). \
Repeat or separate with commas.";

const DESIGN_HELP: &str = "Accelerator design: fxp:M, posit:N:ES:M, pofx-move:N:ES:M \
(N-1 bits moved, converted at load) or pofx-store:N:ES:M (N-1 bits moved and stored, converted \
per use). Activations are FxP(M,M-1). The first design is the baseline. Repeat or separate with commas.";

#[derive(Parser)]
#[command(name = "pofx", version, about = "Posit, normalized posit and fixed-point conversion tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every pattern of Posit(N,ES) with its fields and normalized form.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
        n: u32,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=5))]
        es: u32,
    },
    /// Convert one posit to fixed point with the bit-level converter.
    Convert {
        /// Real value, rounded to the nearest posit (clamped to [-1, 1) for
        /// the normalized variant).
        #[arg(long, conflicts_with = "posit_bits", required_unless_present = "posit_bits", allow_negative_numbers = true)]
        value: Option<f64>,
        /// Pattern, MSB first: N digits (general) or N-1 digits (normalized).
        #[arg(long)]
        posit_bits: Option<String>,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        es: u32,
        #[arg(long, default_value_t = 8)]
        m: u32,
        /// Fraction bits of the output; the normalized variant needs M-1.
        #[arg(long)]
        f: Option<u32>,
        #[arg(long, default_value = "normalized", value_parser = parse_variant)]
        variant: Variant,
        /// Append the per-stage register dump.
        #[arg(long)]
        trace: bool,
    },
    /// Quantization error of a weight tensor under each scheme.
    Analyze {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, required = true, value_delimiter = ',', value_parser = parse_scheme, help = SCHEME_HELP)]
        schemes: Vec<QuantScheme>,
        /// Optional input activations, [batch, inputs], for output-error
        /// statistics of the layer `relu(x · W)`.
        #[arg(long)]
        activations: Option<PathBuf>,
        /// Converter paths: keep -1 (saturate) or move it up (exclude).
        #[arg(long, default_value = "saturate", value_parser = parse_neg_one)]
        neg_one: NegOnePolicy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pareto front and hypervolume over analyze reports and a cost table.
    Pareto {
        /// Directory of analyze reports (*.json); errors are averaged per scheme.
        #[arg(long)]
        reports: PathBuf,
        /// Cost table CSV (kind,n,es,m,pdp,luts,cpd,power); defaults to $EXPAND_COSTS.
        #[arg(long, env = "EXPAND_COSTS")]
        costs: Option<PathBuf>,
        /// Minimized objectives: pdp, luts, cpd, power, avg_abs, avg_abs_rel,
        /// max_abs, param_bits.
        #[arg(long, required = true, value_delimiter = ',')]
        objectives: Vec<String>,
        /// Hypervolume reference point; defaults to 1.01 × the maxima.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        reference: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weight-stationary simulation of one fully-connected layer.
    Simulate {
        /// Weights, shape [inputs, outputs].
        #[arg(long)]
        weights: PathBuf,
        /// Activations, shape [batch, inputs].
        #[arg(long)]
        activations: PathBuf,
        #[arg(long, required = true, value_delimiter = ',', value_parser = parse_design, help = DESIGN_HELP)]
        designs: Vec<AcceleratorDesign>,
        /// Also report storage in whole blocks of this many bits.
        #[arg(long)]
        block_bits: Option<u64>,
        #[arg(long, default_value = "round_nearest", value_parser = parse_requant)]
        requant: Requant,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_scheme(s: &str) -> Result<QuantScheme, String> {
    s.parse().map_err(|e: pofx_core::Error| e.to_string())
}

fn parse_design(s: &str) -> Result<AcceleratorDesign, String> {
    s.parse().map_err(|e: pofx_core::Error| e.to_string())
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: pofx_core::Error| e.to_string())
}

fn parse_neg_one(s: &str) -> Result<NegOnePolicy, String> {
    match s {
        "saturate" => Ok(NegOnePolicy::Saturate),
        "exclude" => Ok(NegOnePolicy::Exclude),
        _ => Err(format!("expected saturate or exclude, got {s:?}")),
    }
}

fn parse_requant(s: &str) -> Result<Requant, String> {
    match s {
        "truncate" => Ok(Requant::Truncate),
        "round_nearest" => Ok(Requant::RoundNearest),
        _ => Err(format!("expected truncate or round_nearest, got {s:?}")),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Table { n, es } => commands::table(n, es),
        Command::Convert {
            value,
            posit_bits,
            n,
            es,
            m,
            f,
            variant,
            trace,
        } => commands::convert(commands::ConvertArgs {
            value,
            posit_bits,
            n,
            es,
            m,
            f,
            variant,
            trace,
        }),
        Command::Analyze {
            weights,
            schemes,
            activations,
            neg_one,
            out,
        } => commands::analyze(&weights, &schemes, activations.as_deref(), neg_one, out.as_deref()),
        Command::Pareto {
            reports,
            costs,
            objectives,
            reference,
            out,
        } => commands::pareto(&reports, costs.as_deref(), &objectives, reference, out.as_deref()),
        Command::Simulate {
            weights,
            activations,
            mut designs,
            block_bits,
            requant,
            out,
        } => {
            for d in &mut designs {
                d.requant = requant;
            }
            commands::simulate(&weights, &activations, &designs, block_bits, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
