mod args;
mod commands;
mod error;
mod run;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Status;
use error::CliError;
use run::{sha256_hex, strip_out_dir, write_outputs, Manifest, Run};

fn subcommand_name(argv: &[String]) -> String {
    let words: Vec<&str> = argv.iter().map(String::as_str).take_while(|a| !a.starts_with('-')).collect();
    match words.as_slice() {
        ["gale", sub, ..] => format!("gale {sub}"),
        [first, ..] => first.to_string(),
        [] => String::new(),
    }
}

/// Runs one command, writes its outputs, and returns the manifest.
fn execute(cmd: &Command, argv: Vec<String>, out_dir: Option<&Path>) -> Result<Manifest, CliError> {
    let mut run = Run::default();
    let status = commands::dispatch(cmd, &mut run)?;
    let exit_code = match &status {
        Status::Ok => 0,
        Status::Soft(_) => 1,
    };
    print!("{}", run.report);
    if let Status::Soft(m) = &status {
        eprintln!("property failure: {m}");
    }
    let flags = serde_json::to_value(cmd).expect("plain data");
    let mut outputs: BTreeMap<String, String> =
        run.outputs.iter().map(|(n, b)| (n.clone(), sha256_hex(b))).collect();
    outputs.insert("report.txt".into(), sha256_hex(run.report.as_bytes()));
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: subcommand_name(&argv),
        argv,
        flags,
        seeds: run.seeds.clone(),
        oracles: run.oracles.clone(),
        inputs: run.inputs.clone(),
        outputs,
        exit_code,
    };
    if let Some(dir) = out_dir {
        write_outputs(dir, &run, &manifest)?;
    }
    Ok(manifest)
}

fn rerun(path: &Path, out_dir: Option<&Path>) -> Result<i32, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let old: Manifest =
        serde_json::from_str(&text).map_err(|e| CliError::codec(format!("{}: {e}", path.display())))?;
    if old.version != env!("CARGO_PKG_VERSION") {
        eprintln!("note: manifest written by version {}", old.version);
    }
    for (input, digest) in &old.inputs {
        let bytes = fs::read(input).map_err(|e| CliError::usage(format!("{input}: {e}")))?;
        if &sha256_hex(&bytes) != digest {
            return Err(CliError::soft(format!("input {input} differs from the manifest digest")));
        }
    }
    let cli = Cli::try_parse_from(std::iter::once("phidim".to_string()).chain(old.argv.iter().cloned()))
        .map_err(|e| CliError::codec(format!("manifest arguments do not parse: {e}")))?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(CliError::codec("manifest records a rerun"));
    }
    let new = match execute(&cli.command, old.argv.clone(), out_dir) {
        Ok(m) => m,
        Err(e) => return Err(CliError::soft(format!("rerun failed: {e}"))),
    };
    let mut diffs = Vec::new();
    for (name, digest) in &old.outputs {
        match new.outputs.get(name) {
            Some(d) if d == digest => {}
            Some(_) => diffs.push(format!("{name} differs")),
            None => diffs.push(format!("{name} missing")),
        }
    }
    diffs.extend(new.outputs.keys().filter(|k| !old.outputs.contains_key(*k)).map(|k| format!("{k} is new")));
    if new.exit_code != old.exit_code {
        diffs.push(format!("exit code {} (was {})", new.exit_code, old.exit_code));
    }
    if diffs.is_empty() {
        println!("reproduced: {} outputs byte-identical", old.outputs.len());
        Ok(0)
    } else {
        Err(CliError::soft(format!("not reproduced: {}", diffs.join(", "))))
    }
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&raw) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Rerun(a) => rerun(&a.manifest, cli.out_dir.as_deref()),
        cmd => execute(cmd, strip_out_dir(&raw[1..]), cli.out_dir.as_deref()).map(|m| m.exit_code),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
