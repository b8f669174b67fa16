use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sumprod::explorer::{emit_report, run_suite, write_report, ExperimentConfig, Format};
use sumprod::field::{cap_from_env, parse_field};
use sumprod::setstats::read_subset;
use sumprod::spectral::{fourier_fast, fourier_forward, DensityFn};
use sumprod::verify::run_verify;

#[derive(Parser)]
#[command(name = "sumprod", version, about = "Sum-product bounds over finite fields, checked instance by instance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the fixed verification suite; exits nonzero if any check fails.
    Verify {
        /// Write the instance rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Run a sweep described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output path from the config.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Print the Fourier coefficients of the indicator of a subset.
    Transform {
        /// `p^l` or `p^l/modulus`.
        #[arg(long)]
        field: String,
        /// Subset file: `field p^l/modulus` header, then one index per line.
        #[arg(long)]
        set: PathBuf,
        /// Use the grid transform instead of the direct sum.
        #[arg(long)]
        fast: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> sumprod::Result<ExitCode> {
    match cli.command {
        Command::Verify { csv, format } => {
            let outcome = run_verify()?;
            for c in &outcome.criteria {
                println!("{}", c.line());
            }
            if let Some(path) = csv {
                emit_report(&outcome.rows, format.into(), &path)?;
            }
            Ok(if outcome.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Experiment {
            config,
            output,
            format,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if output.is_some() {
                cfg.output.path = output;
            }
            if let Some(f) = format {
                cfg.output.format = f.into();
            }
            let out = run_suite(&cfg)?;
            let summary = serde_json::to_string_pretty(&out.summary)?;
            match &cfg.output.path {
                Some(path) => {
                    emit_report(&out.rows, cfg.output.format, path)?;
                    let mut side = path.clone().into_os_string();
                    side.push(".summary.json");
                    std::fs::write(&side, format!("{summary}\n"))
                        .map_err(|e| sumprod::Error::Io { path: side.into(), source: e })?;
                }
                None => write_report(&out.rows, cfg.output.format, std::io::stdout().lock())?,
            }
            eprintln!("{summary}");
            Ok(if out.summary.failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Transform { field, set, fast } => {
            let cap = cap_from_env();
            let field = parse_field(&field, cap)?;
            let (file_field, subset) = read_subset(&set, cap)?;
            if file_field != field {
                return Err(sumprod::Error::Parse(format!(
                    "{} is over {file_field}, not {field}",
                    set.display()
                )));
            }
            let f = DensityFn::indicator(&subset);
            let spectrum = if fast {
                fourier_fast(&field, &f)?
            } else {
                fourier_forward(&field, &f)?
            };
            let mut out = std::io::stdout().lock();
            let io = |e| sumprod::Error::Io { path: "<stdout>".into(), source: e };
            writeln!(out, "# field {field} |S|={}", subset.len()).map_err(io)?;
            writeln!(out, "m\tre\tim\tabs").map_err(io)?;
            for (m, c) in spectrum.values().iter().enumerate() {
                writeln!(out, "{m}\t{:.12}\t{:.12}\t{:.12}", c.re, c.im, c.norm()).map_err(io)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
