use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Everything a command reads and produces; the manifest is derived from it.
#[derive(Debug, Default)]
pub struct Run {
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<(String, Vec<u8>)>,
    pub report: String,
    pub seeds: Vec<u64>,
    pub oracles: Vec<String>,
}

impl Run {
    /// Reads a UTF-8 input file (`-` is standard input) and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let name = path.to_string_lossy().into_owned();
        let bytes = if name == "-" {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf).map_err(|e| CliError::usage(format!("stdin: {e}")))?;
            buf
        } else {
            fs::read(path).map_err(|e| CliError::usage(format!("{name}: {e}")))?
        };
        self.inputs.insert(name.clone(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|_| CliError::codec(format!("{name}: not UTF-8 text")))
    }

    pub fn output(&mut self, name: &str, content: impl Into<Vec<u8>>) {
        self.outputs.push((name.to_string(), content.into()));
    }

    pub fn say(&mut self, line: impl AsRef<str>) {
        self.report.push_str(line.as_ref());
        if !self.report.ends_with('\n') {
            self.report.push('\n');
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Arguments after the program name, without `--out-dir`.
    pub argv: Vec<String>,
    pub flags: serde_json::Value,
    pub seeds: Vec<u64>,
    pub oracles: Vec<String>,
    /// Input path as given -> SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name -> SHA-256, including `report.txt`.
    pub outputs: BTreeMap<String, String>,
    pub exit_code: i32,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data") + "\n"
    }
}

/// Drops `--out-dir X` / `--out-dir=X` from an argument list.
pub fn strip_out_dir(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out-dir" {
            skip = true;
        } else if !a.starts_with("--out-dir=") {
            out.push(a.clone());
        }
    }
    out
}

pub fn write_outputs(dir: &Path, run: &Run, manifest: &Manifest) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::usage(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for (name, bytes) in &run.outputs {
        fs::write(dir.join(name), bytes).map_err(io)?;
    }
    fs::write(dir.join("report.txt"), &run.report).map_err(io)?;
    fs::write(dir.join("manifest.json"), manifest.to_json()).map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_dir_is_stripped() {
        let v = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(strip_out_dir(&v(&["estimate", "--out-dir", "d", "--input", "x"])), v(&["estimate", "--input", "x"]));
        assert_eq!(strip_out_dir(&v(&["--out-dir=d", "sample"])), v(&["sample"]));
    }

    #[test]
    fn digest_is_hex() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
