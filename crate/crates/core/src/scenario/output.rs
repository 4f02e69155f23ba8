//! CSV tables and JSON sidecars.
//!
//! Numbers are written with 12 significant digits in scientific notation and '\n' line
//! endings. Nothing time- or host-dependent goes into an artifact, so identical inputs give
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

use super::config::ScenarioConfig;

pub const TIMESERIES_HEADER: [&str; 4] = ["t", "mean_n", "p_e", "p_g0"];

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.11e}")
    }
}

/// Output directory plus file-name prefix; remembers every file it wrote.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    prefix: String,
    files: Vec<String>,
}

impl ArtifactWriter {
    pub fn new(dir: impl AsRef<Path>, prefix: &str) -> Result<ArtifactWriter> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
        if prefix.is_empty() || prefix.contains(['/', '\\']) {
            return Err(Error::config(format!(
                "output prefix {prefix:?} must be a plain non-empty name"
            )));
        }
        Ok(ArtifactWriter {
            dir,
            prefix: prefix.to_string(),
            files: Vec::new(),
        })
    }

    pub fn for_config(cfg: &ScenarioConfig) -> Result<ArtifactWriter> {
        ArtifactWriter::new(&cfg.output.dir, &cfg.output.prefix)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File names (relative to the output directory) written so far.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(self.name(suffix))
    }

    fn name(&self, suffix: &str) -> String {
        format!("{}{}", self.prefix, suffix)
    }

    fn write(&mut self, suffix: &str, body: &str) -> Result<PathBuf> {
        let path = self.path(suffix);
        fs::write(&path, body).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = self.name(suffix);
        if !self.files.contains(&name) {
            self.files.push(name);
        }
        Ok(path)
    }

    /// Numeric table; every cell goes through [`fmt_num`].
    pub fn numeric_csv(&mut self, suffix: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
        let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|&x| fmt_num(x)).collect()).collect();
        self.csv(suffix, header, &rows)
    }

    pub fn csv(&mut self, suffix: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut body = header.join(",");
        body.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    body.push(',');
                }
                if cell.contains([',', '"', '\n']) {
                    let _ = write!(body, "\"{}\"", cell.replace('"', "\"\""));
                } else {
                    body.push_str(cell);
                }
            }
            body.push('\n');
        }
        self.write(suffix, &body)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, suffix: &str, value: &T) -> Result<PathBuf> {
        let mut body =
            serde_json::to_string_pretty(value).map_err(|e| Error::Solver(format!("serializing {suffix}: {e}")))?;
        body.push('\n');
        self.write(suffix, &body)
    }
}

/// JSON sidecar shared by every command.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a ScenarioConfig,
    pub result: &'a T,
    pub warnings: &'a [String],
    /// Data files produced alongside this sidecar.
    pub files: Vec<String>,
}

impl<'a, T: Serialize> Manifest<'a, T> {
    pub fn new(command: &'static str, config: &'a ScenarioConfig, result: &'a T, warnings: &'a [String]) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            result,
            warnings,
            files: Vec::new(),
        }
    }

    /// Writes the sidecar after the data files so that it can list them.
    pub fn write(mut self, writer: &mut ArtifactWriter, suffix: &str) -> Result<PathBuf> {
        self.files = writer.files().to_vec();
        writer.json(suffix, &self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn csv_quoting_and_line_endings() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path(), "x").unwrap();
        let p = w
            .csv("_t.csv", &["a", "b"], &[vec!["1".into(), "say \"hi\", ok".into()]])
            .unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert_eq!(text, "a,b\n1,\"say \"\"hi\"\", ok\"\n");
        assert_eq!(w.files(), ["x_t.csv"]);
        assert!(ArtifactWriter::new(dir.path(), "a/b").is_err());
    }
}
