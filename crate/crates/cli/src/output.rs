//! CSV emission. Every file starts with one `#` line recording the command
//! and every parameter that affects the data.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// `key=value` pairs of the header line.
pub type Provenance = Vec<(&'static str, String)>;

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn list(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}

/// Destination chosen by `--out`. The file is created up front so a bad
/// path fails before any computation.
pub enum Sink {
    Stdout,
    File { path: PathBuf, file: File },
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Sink::Stdout),
            Some(path) => {
                let file = File::create(path).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                Ok(Sink::File {
                    path: path.to_path_buf(),
                    file,
                })
            }
        }
    }

    pub fn write_all(self, bytes: &[u8]) -> Result<(), CliError> {
        match self {
            Sink::Stdout => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    })
            }
            Sink::File { path, mut file } => {
                file.write_all(bytes)
                    .and_then(|_| file.flush())
                    .map_err(|source| CliError::Io {
                        path: path.display().to_string(),
                        source,
                    })
            }
        }
    }
}

/// The `#` header line.
pub fn metadata(command: &str, fields: &[(&str, String)]) -> String {
    let mut line = format!("# otto {} {command}", env!("CARGO_PKG_VERSION"));
    for (key, value) in fields {
        line.push_str(&format!(" {key}={value}"));
    }
    line.push('\n');
    line
}

/// A CSV table buffered in memory, written in one go once complete.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(command: &str, fields: &[(&str, String)], columns: &[&str]) -> Result<Self, CliError> {
        let mut buf = metadata(command, fields).into_bytes();
        buf.reserve(1 << 16);
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(columns)?;
        Ok(Table { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_bytes(self) -> Result<Vec<u8>, CliError> {
        self.writer.into_inner().map_err(|e| CliError::Io {
            path: "<buffer>".into(),
            source: io::Error::other(e.to_string()),
        })
    }
}
