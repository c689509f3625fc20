//! Command-line front end for the protocol workbench.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use tmis_core::harness::{
    export_transcripts, leaks_path_for, replay_attacks, run_scenario, OutputFormat, ParamSet,
    Report, Scenario, ScenarioConfig,
};

#[derive(Parser)]
#[command(
    version,
    about = "Run, attack and replay the telemedicine authentication protocol"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and print its report.
    Run(RunArgs),
    /// Re-run the attacks offline from exported transcripts and leaks.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Honest,
    Kssti,
    Pfs,
    Tamper,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamsArg {
    Test,
    Desk,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "honest")]
    scenario: ScenarioArg,
    #[arg(long, value_enum, default_value = "test")]
    params: ParamsArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    sessions: u64,
    /// Freshness window in milliseconds.
    #[arg(long, default_value_t = 1_000)]
    delta_max: u64,
    /// Logical clock advance per read, in milliseconds.
    #[arg(long, default_value_t = 10)]
    clock_step: u64,
    /// Tamper trials per message field.
    #[arg(long, default_value_t = 50)]
    tampers: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Also write transcripts here (JSON Lines) and leaks to PATH.leaks.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Patient registry file, created if missing and updated after registration.
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ReplayArgs {
    #[arg(long)]
    transcripts: PathBuf,
    /// Defaults to TRANSCRIPTS.leaks.
    #[arg(long)]
    leaks: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

impl RunArgs {
    fn config(&self) -> ScenarioConfig {
        ScenarioConfig {
            scenario: match self.scenario {
                ScenarioArg::Honest => Scenario::Honest,
                ScenarioArg::Kssti => Scenario::Kssti,
                ScenarioArg::Pfs => Scenario::Pfs,
                ScenarioArg::Tamper => Scenario::Tamper,
                ScenarioArg::All => Scenario::All,
            },
            param_set: match self.params {
                ParamsArg::Test => ParamSet::Test,
                ParamsArg::Desk => ParamSet::Desk,
            },
            seed: self.seed,
            sessions: self.sessions,
            delta_max_millis: self.delta_max,
            clock_step_millis: self.clock_step,
            tampers_per_field: self.tampers,
            output_format: format(self.format),
            registry_path: self.registry.clone(),
        }
    }
}

fn format(f: FormatArg) -> OutputFormat {
    match f {
        FormatArg::Text => OutputFormat::Text,
        FormatArg::Json => OutputFormat::Json,
    }
}

fn render(report: &Report, f: OutputFormat) -> String {
    match f {
        OutputFormat::Text => report.to_text(),
        OutputFormat::Json => report.to_json() + "\n",
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (report, fmt) = match cli.command {
        Command::Run(args) => {
            let cfg = args.config();
            let out = match &args.export {
                Some(path) => export_transcripts(&cfg, path)
                    .with_context(|| format!("exporting to {}", path.display()))?,
                None => run_scenario(&cfg)?,
            };
            (out.report, cfg.output_format)
        }
        Command::Replay(args) => {
            let leaks = args
                .leaks
                .clone()
                .unwrap_or_else(|| leaks_path_for(&args.transcripts));
            (
                replay_attacks(&args.transcripts, &leaks)?,
                format(args.format),
            )
        }
    };
    print!("{}", render(&report, fmt));
    Ok(report.passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
