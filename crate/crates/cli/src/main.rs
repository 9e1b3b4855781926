use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use disintegration::models::ModelId;
use disintegration::rng::parse_seed;
use disintegration_cli::figure::{read_figure_csv, render_svg};
use disintegration_cli::runner::run;
use disintegration_cli::{load_and_resolve, output_dir, CliError, Overrides, OUT_DIR_ENV};

#[derive(Parser)]
#[command(
    name = "disint",
    version,
    about = "Run product-disintegration experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file or a bundled config by name.
    Run {
        config: String,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Output directory; defaults to $DISINT_OUT_DIR, then disint-out/<name>.
        #[arg(long, env = OUT_DIR_ENV)]
        out_dir: Option<PathBuf>,
    },
    /// Render figure data as SVG.
    Figure { csv: PathBuf, out: PathBuf },
    /// List model ids.
    ListModels,
    /// Check a config and print its effective form.
    Validate {
        config: String,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
}

#[derive(Args)]
struct OverrideArgs {
    /// Seed in decimal or 0x-prefixed hex.
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Exit with status 4 if any check fails.
    #[arg(long)]
    strict: bool,
}

impl From<OverrideArgs> for Overrides {
    fn from(a: OverrideArgs) -> Self {
        Overrides {
            seed: a.seed,
            replications: a.reps,
            horizon: a.horizon,
            strict: a.strict,
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            overrides,
            out_dir,
        } => {
            let resolved = load_and_resolve(&config, &overrides.into())?;
            let dir = output_dir(out_dir, None, &resolved.config.name);
            let outcome = run(&resolved, &dir)?;
            let line = serde_json::json!({
                "out_dir": outcome.out_dir,
                "passed": outcome.summary.passed(),
                "failed_checks": outcome.summary.failed_checks,
            });
            println!("{line}");
        }
        Command::Figure { csv, out } => {
            let text = std::fs::read_to_string(&csv).map_err(|e| CliError::io(&csv, e))?;
            let svg = render_svg(&read_figure_csv(&text)?)?;
            std::fs::write(&out, svg).map_err(|e| CliError::io(&out, e))?;
        }
        Command::ListModels => {
            for id in ModelId::ALL {
                println!("{:<24} {}", id.as_str(), id.description());
            }
        }
        Command::Validate { config, overrides } => {
            let resolved = load_and_resolve(&config, &overrides.into())?;
            print!("{}", resolved.config.to_toml());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
