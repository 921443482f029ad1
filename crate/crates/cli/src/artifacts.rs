//! Output files are written as `<name>.partial` and renamed only once the run
//! succeeds, so a failed run leaves its partial output behind for inspection.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::CliError;

pub struct Artifacts {
    dir: PathBuf,
    pending: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            pending: Vec::new(),
        })
    }

    fn partial_path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.partial"))
    }

    pub fn file(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.partial_path(name);
        let f = File::create(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        self.pending.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    pub fn csv(&mut self, name: &str) -> Result<csv::Writer<BufWriter<File>>, CliError> {
        Ok(csv::Writer::from_writer(self.file(name)?))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut w = self.file(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Output(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn matrix(&mut self, name: &str, m: &DMatrix<f64>) -> Result<(), CliError> {
        let mut w = self.file(name)?;
        sdp_core::io::write_dense(&mut w, m)?;
        w.flush()?;
        Ok(())
    }

    /// Renames every `.partial` file to its final name.
    pub fn commit(self) -> Result<(), CliError> {
        for name in &self.pending {
            fs::rename(self.partial_path(name), self.dir.join(name))?;
        }
        Ok(())
    }
}
