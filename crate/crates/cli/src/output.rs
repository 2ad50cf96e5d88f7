use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::commands::Failure;
use crate::{Cli, Format};

/// Everything one command produced, in all formats it supports.
pub struct Output {
    /// File stem for the written copies.
    pub name: &'static str,
    pub json: Value,
    pub text: String,
    pub csv: Option<String>,
    /// Extra files written next to the outputs.
    pub files: Vec<(String, Vec<u8>)>,
    /// Directory used for the files when `--out-dir` is not given; `None` means stdout only.
    pub default_dir: Option<PathBuf>,
}

impl Output {
    pub fn new(name: &'static str, json: Value, text: String) -> Self {
        Output { name, json, text, csv: None, files: Vec::new(), default_dir: None }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

/// Prints the requested format and, with an output directory, writes every format,
/// the extra files and `manifest.json`.
pub fn emit(cli: &Cli, args: &[String], out: &Output) -> Result<(), Failure> {
    let body = match cli.format {
        Format::Json => pretty(&out.json),
        Format::Text => out.text.clone(),
        Format::Csv => out.csv.clone().ok_or_else(|| Failure::Usage(format!("{} has no CSV output", out.name)))?,
    };
    print!("{body}");

    let Some(dir) = cli.out_dir.clone().or_else(|| out.default_dir.clone()) else {
        return Ok(());
    };
    fs::create_dir_all(&dir).map_err(|e| Failure::Domain(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut put = |name: String, bytes: &[u8]| -> Result<(), Failure> {
        write(&dir, &name, bytes)?;
        written.push(name);
        Ok(())
    };
    put(format!("{}.json", out.name), pretty(&out.json).as_bytes())?;
    put(format!("{}.txt", out.name), out.text.as_bytes())?;
    if let Some(csv) = &out.csv {
        put(format!("{}.csv", out.name), csv.as_bytes())?;
    }
    for (name, bytes) in &out.files {
        put(name.clone(), bytes)?;
    }
    let manifest = json!({
        "command": args,
        "seed": cli.seed,
        "versions": {
            "caqc-lab": env!("CARGO_PKG_VERSION"),
            "caqc-core": caqc_core::VERSION,
        },
        "outputs": written,
    });
    write(&dir, "manifest.json", pretty(&manifest).as_bytes())
}
