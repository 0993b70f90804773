use std::path::PathBuf;
use std::process::ExitCode;

use bytefix_cli::run::{load_classes, localize};
use bytefix_cli::{load_config_with, orchestrate_repair, FlMode, Overrides, EXIT_ERROR};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "repair", version, about = "Template-based repair of JVM class files")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fl {
    Perfect,
    Spectrum,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search for patches that make every test pass.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        fl: Option<Fl>,
        /// Total budget in seconds.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the decoded instructions and line table of a class file.
    Inspect { class_file: PathBuf },
    /// Print the ranked suspicious locations without running any tests.
    Fl {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        fl: Option<Fl>,
    },
}

fn overrides(fl: Option<Fl>, budget: Option<f64>, out: Option<PathBuf>) -> Overrides {
    let cwd = std::env::current_dir().unwrap_or_default();
    Overrides {
        fl_mode: fl.map(|f| match f {
            Fl::Perfect => FlMode::Perfect,
            Fl::Spectrum => FlMode::Spectrum,
        }),
        budget,
        output_dir: out.map(|o| cwd.join(o)),
    }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("repair: {msg}");
    ExitCode::from(EXIT_ERROR as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run { config, fl, budget, out } => {
            let cfg = match load_config_with(&config, &overrides(fl, budget, out)) {
                Ok(c) => c,
                Err(e) => return fail(format!("{}: {e}", config.display())),
            };
            match orchestrate_repair(&cfg) {
                Ok(o) => {
                    println!(
                        "{} plausible patch(es), {} sub-patch(es), {} candidates validated; report {}",
                        o.report.patches.len(),
                        o.report.subpatches.len(),
                        o.report.candidates_validated,
                        o.report_path.display()
                    );
                    ExitCode::from(o.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
        Cmd::Inspect { class_file } => {
            let bytes = match std::fs::read(&class_file) {
                Ok(b) => b,
                Err(e) => return fail(format!("{}: {e}", class_file.display())),
            };
            match bytefix_cli::inspect::render(&bytes) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(format!("{}: {e}", class_file.display())),
            }
        }
        Cmd::Fl { config, fl } => {
            let cfg = match load_config_with(&config, &overrides(fl, None, None)) {
                Ok(c) => c,
                Err(e) => return fail(format!("{}: {e}", config.display())),
            };
            let classes = match load_classes(&cfg) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match localize(&cfg, &classes) {
                Ok(locs) => {
                    for l in locs {
                        println!("{:.6}\t{}", l.score, l.location);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
