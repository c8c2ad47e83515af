//! Reconstruction quality: PSNR, resolvability threshold, minimum resolvable
//! object size and PSNR contours over sweep grids.

mod contour;

pub use contour::{psnr_contours, contours_to_csv, Contour, PsnrGrid};

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::restore::Reconstruction;
use crate::scene::ObjectField;

/// Resolvability threshold, dB.
pub const RESOLVABLE_DB: f64 = 13.0;
/// Below this PSNR a reconstruction is not recognisable.
pub const UNRECOGNISABLE_DB: f64 = 12.0;
/// Above this PSNR a reconstruction is well recognisable.
pub const RECOGNISABLE_DB: f64 = 14.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psnr {
    /// `+∞` when saturated.
    pub db: f64,
    /// Zero mean-square error.
    pub saturated: bool,
}

/// `10 log₁₀(max|f|² / MSE)` between two amplitude grids.
pub fn psnr_amplitude(estimate: &Array2<f64>, truth: &Array2<f64>) -> Result<Psnr> {
    if estimate.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            actual: estimate.dim(),
        });
    }
    let peak = truth.iter().map(|f| f * f).fold(0.0, f64::max);
    let sse: f64 = estimate
        .iter()
        .zip(truth.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let mse = sse / truth.len() as f64;
    if mse == 0.0 {
        return Ok(Psnr {
            db: f64::INFINITY,
            saturated: true,
        });
    }
    Ok(Psnr {
        db: 10.0 * (peak / mse).log10(),
        saturated: false,
    })
}

/// PSNR of `f̃ = √κ̃` against `f = √κ`; phase is ignored.
pub fn psnr(recon: &Reconstruction, truth: &ObjectField) -> Result<Psnr> {
    psnr_amplitude(&recon.f_tilde, &truth.amplitude())
}

/// `psnr_db ≥ threshold` (inclusive).
pub fn resolvable(psnr_db: f64, threshold: f64) -> bool {
    psnr_db >= threshold
}

/// One evaluated sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub d_over_w0: f64,
    pub gain_db: f64,
    pub n_b_prime: f64,
    pub loss_db: f64,
    pub seed: u64,
    pub psnr_db: f64,
}

impl SweepRecord {
    pub const CSV_HEADER: &'static str = "d_over_w0,gain_db,n_b_prime,loss_db,seed,psnr_db";

    pub fn saturated(&self) -> bool {
        self.psnr_db == f64::INFINITY
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.d_over_w0, self.gain_db, self.n_b_prime, self.loss_db, self.seed, self.psnr_db
        )
    }

    pub fn parse_csv_row(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim().split(',').collect();
        let bad = |message: String| Error::Parse { offset: 0, message };
        if fields.len() != 6 {
            return Err(bad(format!("expected 6 fields, got {}", fields.len())));
        }
        let num = |i: usize| {
            fields[i]
                .parse::<f64>()
                .map_err(|e| bad(format!("field {i} ({:?}): {e}", fields[i])))
        };
        Ok(Self {
            d_over_w0: num(0)?,
            gain_db: num(1)?,
            n_b_prime: num(2)?,
            loss_db: num(3)?,
            seed: fields[4]
                .parse()
                .map_err(|e| bad(format!("seed ({:?}): {e}", fields[4])))?,
            psnr_db: num(5)?,
        })
    }
}

/// Seed-averaged PSNR at one object size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub d_over_w0: f64,
    pub psnr_db: f64,
    pub seeds: usize,
}

/// Arithmetic mean of per-seed dB values at each object size, sorted by
/// size. Saturated records are skipped with a warning.
pub fn seed_average(records: &[SweepRecord]) -> Vec<CurvePoint> {
    let mut sorted: Vec<&SweepRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.d_over_w0
            .total_cmp(&b.d_over_w0)
            .then(a.seed.cmp(&b.seed))
    });
    let mut groups: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in sorted {
        if r.saturated() {
            log::warn!(
                "saturated PSNR at d/w0={} gain={} dB seed={} excluded",
                r.d_over_w0,
                r.gain_db,
                r.seed
            );
            continue;
        }
        // positive finite d: bit order equals numeric order
        let e = groups.entry(r.d_over_w0.to_bits()).or_insert((r.d_over_w0, 0.0, 0));
        e.1 += r.psnr_db;
        e.2 += 1;
    }
    groups
        .into_values()
        .map(|(d, sum, n)| CurvePoint {
            d_over_w0: d,
            psnr_db: sum / n as f64,
            seeds: n,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinResolvable {
    /// `d_min / w0`.
    At(f64),
    UnresolvableInRange,
    ResolvableEverywhere,
}

impl MinResolvable {
    pub fn value(&self) -> Option<f64> {
        match self {
            MinResolvable::At(v) => Some(*v),
            _ => None,
        }
    }

    pub fn csv_field(&self) -> String {
        match self {
            MinResolvable::At(v) => v.to_string(),
            MinResolvable::UnresolvableInRange => "unresolvable".into(),
            MinResolvable::ResolvableEverywhere => "below_range".into(),
        }
    }
}

/// First upward crossing of `threshold`, interpolated linearly in
/// `(log d, PSNR)`.
pub fn min_resolvable_size(points: &[CurvePoint], threshold: f64) -> Result<MinResolvable> {
    let mut pts: Vec<CurvePoint> = points
        .iter()
        .copied()
        .filter(|p| p.psnr_db.is_finite())
        .collect();
    if pts.is_empty() {
        return Err(Error::InvalidArgument("no finite PSNR points".into()));
    }
    if pts.iter().any(|p| !(p.d_over_w0 > 0.0)) {
        return Err(Error::InvalidArgument("object sizes must be > 0".into()));
    }
    pts.sort_by(|a, b| a.d_over_w0.total_cmp(&b.d_over_w0));
    if resolvable(pts[0].psnr_db, threshold) {
        return Ok(MinResolvable::ResolvableEverywhere);
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.psnr_db < threshold && resolvable(b.psnr_db, threshold) {
            if b.psnr_db == threshold {
                return Ok(MinResolvable::At(b.d_over_w0));
            }
            let t = (threshold - a.psnr_db) / (b.psnr_db - a.psnr_db);
            let (la, lb) = (a.d_over_w0.log10(), b.d_over_w0.log10());
            return Ok(MinResolvable::At(10f64.powf(la + t * (lb - la))));
        }
    }
    Ok(MinResolvable::UnresolvableInRange)
}
