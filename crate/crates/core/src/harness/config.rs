//! Flat `key = value` experiment configuration.
//!
//! Grammar: one `key = value` per line, UTF-8; `#` starts a comment; blank
//! lines are ignored; lists are comma separated. `preset = <name>` loads a
//! built-in preset which later keys override. Each key may appear once.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::channel::{self, SourceParams, TransducerSpec};
use crate::error::{Error, Result};
use crate::forward::PhotonBudget;
use crate::scene::{self, ChartSpec, ObjectField};

pub const PRESET_NAMES: [&str; 3] = ["fig3c", "fig3d", "fig4"];

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectSource {
    Chart(ChartSpec),
    Raster { path: PathBuf, kappa_max: f64 },
}

/// Where the detected photon number comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalLevel {
    /// `n_P′` at `reference_loss_db`; other losses scale it by
    /// `10^{−(loss − reference)/10}`.
    DetectedPhotons(f64),
    /// Source photons per mode; `n_P′ = η · κ̄_obj · 10^{−loss/10} · n_S`.
    SourcePhotons(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub object: ObjectSource,
    pub d_over_w0: Vec<f64>,
    pub gain_db: Vec<f64>,
    pub n_b_prime: f64,
    pub loss_db: Vec<f64>,
    pub reference_loss_db: f64,
    pub photon_budget: PhotonBudget,
    pub signal: SignalLevel,
    pub eta: f64,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// PSF waist, m. Object extent is `d/w0 · w0`.
    pub w0: f64,
    pub clip: bool,
    pub previews: bool,
    /// Worker threads, 0 = all cores.
    pub threads: usize,
    pub contour_levels: Vec<f64>,
    pub threshold_db: f64,
}

impl ExperimentConfig {
    fn base() -> Self {
        Self {
            object: ObjectSource::Chart(ChartSpec::default()),
            d_over_w0: vec![10.0, 20.0, 40.0, 70.0, 100.0, 200.0],
            gain_db: vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0],
            n_b_prime: 0.1,
            loss_db: vec![100.0],
            reference_loss_db: 100.0,
            photon_budget: PhotonBudget::PerPixel,
            signal: SignalLevel::DetectedPhotons(100.0),
            eta: 1e-9,
            seeds: (1..=5).collect(),
            output_dir: PathBuf::from("runs"),
            w0: 1.0,
            clip: true,
            previews: false,
            threads: 0,
            contour_levels: vec![12.0, 14.0],
            threshold_db: 13.0,
        }
    }

    /// Built-in presets: `fig3c` (quantum limited), `fig3d` (`N_B′ = 0.1`)
    /// and `fig4` (resolution versus penetration loss).
    pub fn preset(name: &str) -> Result<Self> {
        let name = name.strip_prefix("preset_").unwrap_or(name);
        let mut cfg = Self::base();
        match name {
            "fig3c" => {
                cfg.n_b_prime = 0.0;
                cfg.output_dir = PathBuf::from("runs/fig3c");
            }
            "fig3d" => {
                cfg.output_dir = PathBuf::from("runs/fig3d");
            }
            "fig4" => {
                cfg.gain_db = vec![0.0, 10.0, 100.0];
                cfg.loss_db = vec![100.0, 110.0, 120.0, 130.0, 140.0];
                cfg.d_over_w0 = log_axis(5.0, 400.0, 16);
                cfg.output_dir = PathBuf::from("runs/fig4");
            }
            other => {
                return Err(Error::Validation(format!(
                    "unknown preset {other:?} (known: {})",
                    PRESET_NAMES.join(", ")
                )))
            }
        }
        Ok(cfg)
    }

    /// Preset name (`fig3c`, `preset_fig3c`) or path to a config file.
    pub fn load(spec: &str) -> Result<Self> {
        let path = Path::new(spec);
        if path.is_file() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
            let base_dir = path.parent().unwrap_or(Path::new(""));
            return Self::parse(&text, base_dir);
        }
        let name = spec.strip_prefix("preset_").unwrap_or(spec);
        if PRESET_NAMES.contains(&name) {
            return Self::preset(name);
        }
        Err(Error::Validation(format!(
            "{spec}: no such config file or preset"
        )))
    }

    /// Parses config text; relative raster paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got {content:?}"),
            })?;
            let key = key.trim().to_owned();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key {key:?}"),
                });
            }
            if entries
                .insert(key.clone(), (line, value.trim().to_owned()))
                .is_some()
            {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key {key:?}"),
                });
            }
        }
        let kv = Entries(entries);
        let mut cfg = match kv.get("preset") {
            Some((_, name)) => Self::preset(&name)?,
            None => Self::base(),
        };
        cfg.apply(&kv, base_dir)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, kv: &Entries, base_dir: &Path) -> Result<()> {
        // object
        if let ObjectSource::Chart(mut chart) = self.object.clone() {
            if let Some(n) = kv.usize("chart_size")? {
                chart.rows = n;
                chart.cols = n;
            }
            if let Some(n) = kv.usize("chart_groups")? {
                chart.n_groups = n;
            }
            if let Some(n) = kv.usize("chart_bars")? {
                chart.bars_per_element = n;
            }
            if let Some(v) = kv.f64("dark_kappa")? {
                chart.dark_kappa = v;
            }
            if let Some(v) = kv.f64("bright_kappa")? {
                chart.bright_kappa = v;
            }
            self.object = ObjectSource::Chart(chart);
        }
        if let Some((line, path)) = kv.get("raster") {
            let path = base_dir.join(path);
            if !path.is_file() {
                return Err(Error::Config {
                    line,
                    message: format!("raster {} does not exist", path.display()),
                });
            }
            let kappa_max = kv.f64("raster_kappa_max")?.unwrap_or(1.0);
            self.object = ObjectSource::Raster { path, kappa_max };
        } else if kv.get("raster_kappa_max").is_some() {
            return Err(kv.error("raster_kappa_max", "requires `raster`"));
        }

        // axes
        if let Some(v) = kv.f64_list("d_over_w0")? {
            self.d_over_w0 = v;
        }
        if let Some(v) = kv.f64_list("gain_db")? {
            self.gain_db = v;
        }
        if let Some(v) = kv.f64_list("loss_db")? {
            self.loss_db = v;
        }
        if let Some(v) = kv.f64("reference_loss_db")? {
            self.reference_loss_db = v;
        }
        if let Some(v) = kv.list("seeds")? {
            self.seeds = v
                .iter()
                .map(|s| s.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| kv.error("seeds", &e.to_string()))?;
        }

        // transduction efficiency
        let transducer_keys = [
            "v_pi_volts",
            "p_in_watts",
            "impedance_ohms",
            "optical_hz",
        ];
        let any_transducer = transducer_keys.iter().any(|k| kv.get(k).is_some());
        match (kv.f64("eta")?, any_transducer) {
            (Some(_), true) => {
                return Err(kv.error("eta", "mutually exclusive with transducer keys"))
            }
            (Some(eta), false) => self.eta = eta,
            (None, true) => {
                let spec = TransducerSpec {
                    v_pi: kv.f64("v_pi_volts")?.unwrap_or(1.0),
                    p_in: kv.f64("p_in_watts")?.unwrap_or(0.1),
                    impedance: kv.f64("impedance_ohms")?.unwrap_or(50.0),
                    rf_hz: kv.f64("carrier_hz")?.unwrap_or(100e3),
                    optical_hz: kv.f64("optical_hz")?.unwrap_or(192e12),
                };
                self.eta = channel::transduction_efficiency(&spec)?;
            }
            (None, false) => {}
        }

        // thermal background
        match (kv.f64("n_b_prime")?, kv.f64("n_b")?) {
            (Some(_), Some(_)) => return Err(kv.error("n_b", "mutually exclusive with n_b_prime")),
            (Some(v), None) => self.n_b_prime = v,
            (None, Some(n_b)) => self.n_b_prime = self.eta * n_b,
            (None, None) => {}
        }

        // signal level
        let n_p = kv.f64("n_p_prime")?;
        let n_s = kv.f64("n_s")?;
        let p_s = kv.f64("p_s_watts")?;
        let given = [n_p.is_some(), n_s.is_some(), p_s.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if given > 1 {
            return Err(kv.error(
                "n_p_prime",
                "n_p_prime, n_s and p_s_watts are mutually exclusive",
            ));
        }
        if let Some(v) = n_p {
            self.signal = SignalLevel::DetectedPhotons(v);
        } else if let Some(v) = n_s {
            self.signal = SignalLevel::SourcePhotons(v);
        } else if let Some(p_s) = p_s {
            let carrier = kv.f64("carrier_hz")?.unwrap_or(100e3);
            let bandwidth = kv.f64("bandwidth_hz")?.unwrap_or(carrier / 2.0);
            let src = SourceParams {
                p_s,
                carrier_hz: carrier,
                bandwidth_hz: bandwidth,
                duration: 1.0 / bandwidth,
            };
            self.signal = SignalLevel::SourcePhotons(channel::source_photons(&src)?);
        } else if kv.get("bandwidth_hz").is_some() {
            return Err(kv.error("bandwidth_hz", "requires p_s_watts"));
        }

        if let Some((_, v)) = kv.get("photon_budget") {
            self.photon_budget = match v.as_str() {
                "per_pixel" => PhotonBudget::PerPixel,
                "whole_image" => PhotonBudget::WholeImage,
                other => {
                    return Err(kv.error(
                        "photon_budget",
                        &format!("expected per_pixel or whole_image, got {other:?}"),
                    ))
                }
            };
        }
        if let Some((_, v)) = kv.get("output_dir") {
            self.output_dir = PathBuf::from(v);
        }
        if let Some(v) = kv.f64("w0_m")? {
            self.w0 = v;
        }
        if let Some(v) = kv.bool("clip")? {
            self.clip = v;
        }
        if let Some(v) = kv.bool("previews")? {
            self.previews = v;
        }
        if let Some(v) = kv.usize("threads")? {
            self.threads = v;
        }
        if let Some(v) = kv.f64_list("contour_levels_db")? {
            self.contour_levels = v;
        }
        if let Some(v) = kv.f64("threshold_db")? {
            self.threshold_db = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        for (name, axis) in [
            ("d_over_w0", &self.d_over_w0),
            ("gain_db", &self.gain_db),
            ("loss_db", &self.loss_db),
        ] {
            if axis.is_empty() {
                return fail(format!("{name} axis is empty"));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return fail(format!("{name} axis has non-finite values"));
            }
        }
        if self.d_over_w0.iter().any(|&d| d <= 0.0) {
            return fail("d_over_w0 values must be > 0".into());
        }
        if self.gain_db.iter().any(|&g| g < 0.0) {
            return fail("gain_db values must be ≥ 0 (G ≥ 1)".into());
        }
        if self.loss_db.iter().any(|&l| l < 0.0) {
            return fail("loss_db values must be ≥ 0".into());
        }
        if self.seeds.is_empty() {
            return fail("seeds list is empty".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return fail("seeds must be unique".into());
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return fail(format!("eta {} outside (0, 1]", self.eta));
        }
        if !(self.n_b_prime >= 0.0) {
            return fail(format!("n_b_prime {} must be ≥ 0", self.n_b_prime));
        }
        match self.signal {
            SignalLevel::DetectedPhotons(v) | SignalLevel::SourcePhotons(v) if !(v > 0.0) => {
                return fail(format!("signal photon number {v} must be > 0"))
            }
            _ => {}
        }
        if !(self.w0 > 0.0) {
            return fail(format!("w0_m {} must be > 0", self.w0));
        }
        if let ObjectSource::Raster { path, kappa_max } = &self.object {
            if !path.is_file() {
                return fail(format!("raster {} does not exist", path.display()));
            }
            if !(*kappa_max > 0.0 && *kappa_max <= 1.0) {
                return fail(format!("raster_kappa_max {kappa_max} outside (0, 1]"));
            }
        }
        Ok(())
    }

    /// Ground-truth object with unit extent.
    pub fn build_object(&self) -> Result<ObjectField> {
        match &self.object {
            ObjectSource::Chart(spec) => scene::generate_bar_chart(spec),
            ObjectSource::Raster { path, kappa_max } => {
                let bytes = crate::io::read_file(path)?;
                scene::load_raster(&bytes, 1.0, *kappa_max)
            }
        }
    }

    /// Every field in a fixed order; the digest is taken over this text.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "object = {:?}", self.object);
        let _ = writeln!(s, "d_over_w0 = {:?}", self.d_over_w0);
        let _ = writeln!(s, "gain_db = {:?}", self.gain_db);
        let _ = writeln!(s, "n_b_prime = {:?}", self.n_b_prime);
        let _ = writeln!(s, "loss_db = {:?}", self.loss_db);
        let _ = writeln!(s, "reference_loss_db = {:?}", self.reference_loss_db);
        let _ = writeln!(s, "photon_budget = {:?}", self.photon_budget);
        let _ = writeln!(s, "signal = {:?}", self.signal);
        let _ = writeln!(s, "eta = {:?}", self.eta);
        let _ = writeln!(s, "seeds = {:?}", self.seeds);
        let _ = writeln!(s, "output_dir = {:?}", self.output_dir);
        let _ = writeln!(s, "w0 = {:?}", self.w0);
        let _ = writeln!(s, "clip = {:?}", self.clip);
        let _ = writeln!(s, "previews = {:?}", self.previews);
        let _ = writeln!(s, "threads = {:?}", self.threads);
        let _ = writeln!(s, "contour_levels = {:?}", self.contour_levels);
        let _ = writeln!(s, "threshold_db = {:?}", self.threshold_db);
        s
    }

    pub fn digest(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Log-spaced axis with `n` points from `lo` to `hi` inclusive, rounded to
/// four significant digits so config files can reproduce it.
pub fn log_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let v = lo * (hi / lo).powf(t);
            let mag = 10f64.powi(v.log10().floor() as i32 - 3);
            (v / mag).round() * mag
        })
        .collect()
}

const KNOWN_KEYS: &[&str] = &[
    "preset",
    "chart_size",
    "chart_groups",
    "chart_bars",
    "dark_kappa",
    "bright_kappa",
    "raster",
    "raster_kappa_max",
    "d_over_w0",
    "gain_db",
    "loss_db",
    "reference_loss_db",
    "seeds",
    "eta",
    "n_b",
    "n_b_prime",
    "n_s",
    "n_p_prime",
    "p_s_watts",
    "carrier_hz",
    "bandwidth_hz",
    "v_pi_volts",
    "p_in_watts",
    "impedance_ohms",
    "optical_hz",
    "photon_budget",
    "output_dir",
    "w0_m",
    "clip",
    "previews",
    "threads",
    "contour_levels_db",
    "threshold_db",
];

struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn get(&self, key: &str) -> Option<(usize, String)> {
        self.0.get(key).cloned()
    }

    fn error(&self, key: &str, message: &str) -> Error {
        Error::Config {
            line: self.0.get(key).map_or(0, |e| e.0),
            message: format!("{key}: {message}"),
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|(_, v)| v.parse::<T>().map_err(|e| self.error(key, &e.to_string())))
            .transpose()
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.parsed(key)
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.parsed(key)
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.parsed(key)
    }

    fn list(&self, key: &str) -> Result<Option<Vec<String>>> {
        Ok(self.get(key).map(|(_, v)| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect()
        }))
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.list(key)?
            .map(|items| {
                items
                    .iter()
                    .map(|s| s.parse::<f64>().map_err(|e| self.error(key, &e.to_string())))
                    .collect()
            })
            .transpose()
    }
}
