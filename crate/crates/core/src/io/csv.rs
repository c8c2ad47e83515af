//! Append-safe CSV writing with a fixed header.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Writes rows under `header`, flushing after each batch so completed rows
/// survive a later failure.
pub struct CsvWriter {
    file: File,
    path: PathBuf,
}

impl CsvWriter {
    /// Truncates `path` and writes the header.
    pub fn create(path: &Path, header: &str) -> Result<Self> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(file, "{header}").map_err(|e| Error::io(path, e))?;
        Ok(Self {
            file,
            path: path.to_owned(),
        })
    }

    /// Opens `path` for appending; the existing header must match.
    pub fn append(path: &Path, header: &str) -> Result<Self> {
        if !path.exists() {
            return Self::create(path, header);
        }
        let existing = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut first = String::new();
        BufReader::new(existing)
            .read_line(&mut first)
            .map_err(|e| Error::io(path, e))?;
        if first.trim_end() != header {
            return Err(Error::Validation(format!(
                "{}: header {:?} does not match {header:?}",
                path.display(),
                first.trim_end()
            )));
        }
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(Self {
            file,
            path: path.to_owned(),
        })
    }

    pub fn write_rows<I, S>(&mut self, rows: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut buf = String::new();
        for r in rows {
            buf.push_str(r.as_ref());
            buf.push('\n');
        }
        self.file
            .write_all(buf.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

/// Data lines of a CSV file (header skipped).
pub fn read_rows(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(str::to_owned)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_keeps_rows_and_checks_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out/records.csv");
        let mut w = CsvWriter::create(&path, "a,b").unwrap();
        w.write_rows(["1,2"]).unwrap();
        drop(w);
        let mut w = CsvWriter::append(&path, "a,b").unwrap();
        w.write_rows(vec!["3,4".to_string()]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,2\n3,4\n");
        assert_eq!(read_rows(&path).unwrap(), vec!["1,2", "3,4"]);
        assert!(CsvWriter::append(&path, "x,y").is_err());
    }
}
