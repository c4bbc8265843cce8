mod cli;
mod error;
mod runlog;
mod stages;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::Parser;

use cli::{Cli, Command};
use error::CliError;
use runlog::{config_hash, Ledger, RunManifest, StageRecord};

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn dispatch(cmd: &Command, l: &mut Ledger, run: &RunManifest) -> Result<(), CliError> {
    match cmd {
        Command::Extract(a) => stages::extract(a, l),
        Command::Rectify(a) => stages::rectify(a, l, run),
        Command::Dedup(a) => stages::dedup(a, l, run),
        Command::Label(a) => stages::label(a, l),
        Command::Join(a) => stages::join(a, l, run),
        Command::Analyze(a) => stages::analyze(a, l, run),
        Command::Report(a) => stages::report(a, l, run),
        Command::Synth(a) => stages::synth(a, l),
        Command::Eval(a) => stages::eval(a, l),
    }
}

/// Runs one stage and records it in the run manifest whether or not it
/// succeeded.
fn run(cli: &Cli) -> Result<(), CliError> {
    let stage = cli.command.name();
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::stage(stage, adscan::Error::io(&cli.out, e)))?;
    let mut manifest = RunManifest::load(&cli.out)?;
    let started_at = now();
    let mut ledger = Ledger::new(stage, &cli.out);
    let result = match panic::catch_unwind(AssertUnwindSafe(|| dispatch(&cli.command, &mut ledger, &manifest))) {
        Ok(r) => r,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(CliError::internal(stage, msg))
        }
    };
    let config = cli.command.config();
    let upstream = ledger.upstream(&manifest);
    let record = StageRecord {
        status: if result.is_ok() { "ok" } else { "failed" }.into(),
        error: result.as_ref().err().map(|e| e.to_string()),
        config_hash: config_hash(stage, &config, &upstream),
        config,
        upstream,
        inputs: ledger.inputs,
        outputs: ledger.outputs,
        counts: ledger.counts,
        started_at,
        finished_at: now(),
    };
    manifest.stages.insert(stage.to_string(), record);
    manifest.save(&cli.out)?;
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    // Panics are reported through the run manifest and the exit code.
    panic::set_hook(Box::new(|_| {}));
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
