mod config;
mod run;

use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::{json, Value};

use config::{load_file, resolve, Command, GlobalArgs, GlobalConfig};
use run::{dispatch, CliError, CliResult};

/// Experiments on convolutions of polynomial maps into finite groups.
#[derive(Parser, Debug)]
#[command(name = "padic-conv", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

fn write_outputs(global: &GlobalConfig, name: &str, report: &str, files: &[(String, String)], meta: Value) -> CliResult<()> {
    let Some(dir) = &global.out_dir else { return Ok(()) };
    let io = |e: std::io::Error| CliError::Core(e.into());
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(format!("{name}.json")), report).map_err(io)?;
    for (file, contents) in files {
        std::fs::write(dir.join(file), contents).map_err(io)?;
    }
    let meta = serde_json::to_string_pretty(&meta).expect("meta serializes");
    std::fs::write(dir.join(format!("{name}.meta.json")), meta + "\n").map_err(io)?;
    Ok(())
}

fn execute(cli: &Cli, global: &mut Option<GlobalConfig>) -> CliResult<()> {
    let file = cli.global.config.as_deref().map(load_file).transpose()?;
    let g: GlobalConfig = resolve(file.as_ref(), &["global"], &cli.global)?;
    *global = Some(g.clone());
    if let Some(w) = g.workers {
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let started = Instant::now();
    let out = dispatch(&cli.command, file.as_ref(), &g)?;
    let name = cli.command.name();
    let report = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "config": { "global": g, name: out.config },
        "result": out.result,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    print!("{text}");
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = json!({
        "command": name,
        "timestamp_unix": timestamp,
        "elapsed_ms": started.elapsed().as_millis() as u64,
        "details": out.meta,
    });
    write_outputs(&g, name, &text, &out.files, meta)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut global = None;
    match execute(&cli, &mut global) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let text = serde_json::to_string_pretty(&e.to_json()).expect("error serializes") + "\n";
            print!("{text}");
            if let Some(g) = &global {
                if let Some(dir) = &g.out_dir {
                    let _ = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join("error.json"), &text));
                }
            }
            ExitCode::FAILURE
        }
    }
}
