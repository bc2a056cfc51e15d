use std::fmt;
use std::path::PathBuf;

use phaselab::classical::ClassicalError;
use phaselab::disk::DiskError;
use phaselab::fit::FitError;
use phaselab::potential::PotentialError;
use phaselab::radial::RadialError;
use phaselab::specfun::SpecFunError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable files, malformed specs: exit code 2.
    Config(String),
    /// A solver or fit failed on valid input: exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

macro_rules! numerical_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numerical(e.to_string())
            }
        }
    )*};
}

numerical_from!(ClassicalError, RadialError, DiskError, SpecFunError, FitError);

/// Data goes to --out or stdout.
pub fn write_data(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// One-line summary on the channel not carrying data.
pub fn summarize(out: &Option<PathBuf>, line: &str) {
    match out {
        Some(_) => println!("{line}"),
        None => eprintln!("{line}"),
    }
}

/// Gnuplot companion script at <out with .gp extension>; `body` receives the
/// data file name to reference.
pub fn write_plot_script(
    out: &Option<PathBuf>,
    body: impl FnOnce(&str) -> String,
) -> Result<PathBuf, CliError> {
    let out = out.as_ref().expect("--plots requires --out");
    let data = out
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| CliError::Config("--out has no usable file name".into()))?;
    let path = out.with_extension("gp");
    let script = format!("set datafile separator ','\nset grid\n{}", body(data));
    std::fs::write(&path, script)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Top-level JSON document. serde_json's map keeps keys sorted, so output is
/// byte-deterministic for a fixed configuration.
pub fn json_document(
    command: &str,
    metadata: serde_json::Value,
    payload_key: &str,
    payload: serde_json::Value,
) -> String {
    let mut m = serde_json::Map::new();
    m.insert("schema_version".into(), 1.into());
    m.insert("command".into(), command.into());
    m.insert("metadata".into(), metadata);
    m.insert(payload_key.into(), payload);
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(m))
        .expect("json document serializes");
    s.push('\n');
    s
}
