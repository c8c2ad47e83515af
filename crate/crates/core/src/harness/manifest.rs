//! `manifest.txt`: `key = value` lines in a fixed order.

use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub config_digest: String,
    pub code_version: String,
    pub cells: usize,
    pub threads: usize,
    pub parallel: bool,
    pub started_unix: u64,
    pub wall_time_s: f64,
}

const KEYS: [&str; 8] = [
    "command",
    "config_digest",
    "code_version",
    "cells",
    "threads",
    "parallel",
    "started_unix",
    "wall_time_s",
];

impl Manifest {
    pub fn new(command: &str, config_digest: String, cells: usize, threads: usize) -> Self {
        Self {
            command: command.to_owned(),
            config_digest,
            code_version: env!("CARGO_PKG_VERSION").to_owned(),
            cells,
            threads,
            parallel: cfg!(feature = "parallel"),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .unwrap_or(Duration::ZERO)
                .as_secs(),
            wall_time_s: 0.0,
        }
    }

    pub fn to_text(&self) -> String {
        let values = [
            self.command.clone(),
            self.config_digest.clone(),
            self.code_version.clone(),
            self.cells.to_string(),
            self.threads.to_string(),
            self.parallel.to_string(),
            self.started_unix.to_string(),
            format!("{:.3}", self.wall_time_s),
        ];
        KEYS.iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(&str, &str)> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let (k, v) = l.split_once('=').unwrap_or((l, ""));
                (k.trim(), v.trim())
            })
            .collect();
        let keys: Vec<&str> = lines.iter().map(|(k, _)| *k).collect();
        if keys != KEYS {
            return Err(Error::Parse {
                offset: 0,
                message: format!("manifest keys {keys:?} differ from {KEYS:?}"),
            });
        }
        let bad = |k: &str| Error::Parse {
            offset: 0,
            message: format!("manifest field {k} is malformed"),
        };
        let v = |i: usize| lines[i].1;
        Ok(Self {
            command: v(0).to_owned(),
            config_digest: v(1).to_owned(),
            code_version: v(2).to_owned(),
            cells: v(3).parse().map_err(|_| bad("cells"))?,
            threads: v(4).parse().map_err(|_| bad("threads"))?,
            parallel: v(5).parse().map_err(|_| bad("parallel"))?,
            started_unix: v(6).parse().map_err(|_| bad("started_unix"))?,
            wall_time_s: v(7).parse().map_err(|_| bad("wall_time_s"))?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::io::write_file(path, self.to_text().as_bytes())
    }
}
