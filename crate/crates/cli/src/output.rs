//! Writers for summaries and tables. Doubles use 17 significant digits.

use crate::{CliError, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};
use subgauss_core::numfmt::{fmt_f64, to_json_string};

/// One point of a plotted series with its interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotRow {
    pub x: f64,
    pub y: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

/// Writes `x,y,y_lo,y_hi` rows. An empty table is an error.
pub fn emit_plotdata(rows: &[PlotRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(CliError::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!("refusing to write empty plot data to {}", path.display()),
        )));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "y_lo", "y_hi"])?;
    for r in rows {
        w.write_record([fmt_f64(r.x), fmt_f64(r.y), fmt_f64(r.y_lo), fmt_f64(r.y_hi)])?;
    }
    w.flush()?;
    Ok(())
}

/// Collects the files of one run.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = to_json_string(value).map_err(|e| CliError::ConfigParse(e.to_string()))?;
        let p = self.path(name);
        std::fs::write(p, text)?;
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(p, body)?;
        Ok(())
    }

    /// CSV with a header row; fields are quoted where needed.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(p)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn plot(&mut self, name: &str, rows: &[PlotRow]) -> Result<()> {
        let p = self.path(name);
        emit_plotdata(rows, &p)
    }

    pub fn into_files(self) -> Vec<PathBuf> {
        self.written
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_rows_and_empty_guard() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plot.csv");
        let rows = [PlotRow { x: 1.0, y: 0.5, y_lo: 0.25, y_hi: 0.75 }];
        emit_plotdata(&rows, &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "x,y,y_lo,y_hi\n1,0.5,0.25,0.75\n");
        let err = emit_plotdata(&[], &dir.path().join("empty.csv")).unwrap_err();
        assert!(err.to_string().contains("empty"));
    }
}
