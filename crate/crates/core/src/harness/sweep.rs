//! Cell evaluation and the `sweep` / `resolution` runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;

use super::config::{ExperimentConfig, SignalLevel};
use super::manifest::Manifest;
use crate::channel::{self, ChannelParams};
use crate::error::{Error, Result};
use crate::forward::{self, ForwardSettings};
use crate::io::csv::CsvWriter;
use crate::io::pgm;
use crate::metrics::{
    self, contours_to_csv, min_resolvable_size, psnr_contours, MinResolvable, PsnrGrid,
    SweepRecord,
};
use crate::optics::{self, PsfSpec};
use crate::par;
use crate::restore::{self, Reconstruction};
use crate::scene::{self, ObjectField};

pub const RESOLUTION_CSV_HEADER: &str = "loss_db,gain_db,d_min_over_w0";

/// Rows flushed to `records.csv` per batch.
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub d_over_w0: f64,
    pub gain_db: f64,
    pub loss_db: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionRow {
    pub loss_db: f64,
    pub gain_db: f64,
    pub d_min: MinResolvable,
}

impl ResolutionRow {
    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.loss_db, self.gain_db, self.d_min.csv_field())
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub records: Vec<SweepRecord>,
    pub manifest: Manifest,
    pub output_dir: PathBuf,
}

/// Cells in output order: loss, then gain, then size, then seed.
pub fn cells(cfg: &ExperimentConfig) -> Vec<CellSpec> {
    let mut out = Vec::with_capacity(
        cfg.loss_db.len() * cfg.gain_db.len() * cfg.d_over_w0.len() * cfg.seeds.len(),
    );
    for &loss_db in &cfg.loss_db {
        for &gain_db in &cfg.gain_db {
            for &d_over_w0 in &cfg.d_over_w0 {
                for &seed in &cfg.seeds {
                    out.push(CellSpec {
                        d_over_w0,
                        gain_db,
                        loss_db,
                        seed,
                    });
                }
            }
        }
    }
    out
}

/// Channel parameters at one `(gain, loss)` point for an object of mean
/// transmissivity `kappa_obj`.
pub fn cell_params(
    cfg: &ExperimentConfig,
    kappa_obj: f64,
    gain_db: f64,
    loss_db: f64,
) -> Result<ChannelParams> {
    let kappa_bar = kappa_obj * channel::kappa_from_loss_db(loss_db)?;
    let n_p_prime = match cfg.signal {
        SignalLevel::DetectedPhotons(n) => {
            n * channel::from_db(-(loss_db - cfg.reference_loss_db))
        }
        SignalLevel::SourcePhotons(n_s) => cfg.eta * kappa_bar * n_s,
    };
    ChannelParams::from_detected(
        cfg.eta,
        channel::from_db(gain_db),
        cfg.n_b_prime,
        n_p_prime,
        kappa_bar,
    )
}

fn run_cell(
    cfg: &ExperimentConfig,
    truth: &ObjectField,
    cell: &CellSpec,
) -> Result<(SweepRecord, Reconstruction)> {
    let obj = scene::rescale_extent(truth, cell.d_over_w0 * cfg.w0)?;
    let psf = PsfSpec::covering(cfg.w0, obj.pitch())?;
    let kernel = optics::gaussian_psf(&psf)?;
    let p = cell_params(cfg, obj.mean_kappa(), cell.gain_db, cell.loss_db)?;
    let settings = ForwardSettings {
        budget: cfg.photon_budget,
        ..ForwardSettings::default()
    };
    let mean = forward::mean_image(&obj, &kernel, &p, &settings)?;
    let img = forward::add_noise(&mean, &p, cell.seed);
    let (m, n) = obj.dim();
    let nsr = restore::default_nsr(&p, cfg.photon_budget, m * n)?;
    let recon = restore::wiener_deconvolve(&img, &kernel, nsr, cfg.clip)?;
    let score = metrics::psnr(&recon, &obj)?;
    let record = SweepRecord {
        d_over_w0: cell.d_over_w0,
        gain_db: cell.gain_db,
        n_b_prime: cfg.n_b_prime,
        loss_db: cell.loss_db,
        seed: cell.seed,
        psnr_db: score.db,
    };
    Ok((record, recon))
}

/// PSNR of one cell; `truth` is the unit-extent object.
pub fn evaluate_cell(
    cfg: &ExperimentConfig,
    truth: &ObjectField,
    cell: &CellSpec,
) -> Result<SweepRecord> {
    run_cell(cfg, truth, cell)
        .map(|(r, _)| r)
        .map_err(|e| wrap(cell, e))
}

fn wrap(cell: &CellSpec, e: Error) -> Error {
    Error::Cell {
        d_over_w0: cell.d_over_w0,
        gain_db: cell.gain_db,
        loss_db: cell.loss_db,
        seed: cell.seed,
        source: Box::new(e),
    }
}

fn preview_path(dir: &Path, cell: &CellSpec) -> PathBuf {
    dir.join("previews").join(format!(
        "loss{}_g{}_d{}_s{}.pgm",
        cell.loss_db, cell.gain_db, cell.d_over_w0, cell.seed
    ))
}

/// Evaluates cells in batches, handing each batch's records to `sink` in
/// cell order. On a failing cell the records before it are still delivered.
fn drive<F>(cfg: &ExperimentConfig, preview_dir: Option<&Path>, mut sink: F) -> Result<Vec<SweepRecord>>
where
    F: FnMut(&[SweepRecord]) -> Result<()> + Send,
{
    cfg.validate()?;
    let truth = cfg.build_object()?;
    let all = cells(cfg);
    let mut records = Vec::with_capacity(all.len());
    par::with_threads(cfg.threads, || {
        for batch in all.chunks(BATCH) {
            let results = par::map(batch, |cell| {
                let (record, recon) = run_cell(cfg, &truth, cell).map_err(|e| wrap(cell, e))?;
                if let Some(dir) = preview_dir {
                    let bytes = pgm::encode_range(&recon.f_tilde, 0.0, 1.0);
                    crate::io::write_file(&preview_path(dir, cell), &bytes)?;
                }
                Ok(record)
            });
            let mut done = Vec::with_capacity(batch.len());
            let mut failure = None;
            for r in results {
                match r {
                    Ok(rec) => done.push(rec),
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            sink(&done)?;
            records.extend_from_slice(&done);
            if let Some(e) = failure {
                return Err(e);
            }
        }
        Ok(())
    })?;
    Ok(records)
}

/// All records of the sweep, in memory only.
pub fn evaluate_records(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    drive(cfg, None, |_| Ok(()))
}

fn run_to_disk(cfg: &ExperimentConfig, command: &str) -> Result<RunSummary> {
    let started = Instant::now();
    let dir = cfg.output_dir.clone();
    let mut manifest = Manifest::new(command, cfg.digest(), cells(cfg).len(), cfg.threads);
    let mut writer = CsvWriter::create(&dir.join("records.csv"), SweepRecord::CSV_HEADER)?;
    let preview_dir = cfg.previews.then_some(dir.as_path());
    let records = drive(cfg, preview_dir, |batch| {
        writer.write_rows(batch.iter().map(SweepRecord::csv_row))
    })?;
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.write(&dir.join("manifest.txt"))?;
    log::info!(
        "{command}: {} cells in {:.2} s -> {}",
        records.len(),
        manifest.wall_time_s,
        dir.display()
    );
    Ok(RunSummary {
        records,
        manifest,
        output_dir: dir,
    })
}

/// Seed-averaged PSNR over `(gain, d/w0)` at one loss value.
pub fn grid_for_loss(
    cfg: &ExperimentConfig,
    records: &[SweepRecord],
    loss_db: f64,
) -> Result<PsnrGrid> {
    let mut values = Array2::from_elem((cfg.gain_db.len(), cfg.d_over_w0.len()), f64::NAN);
    for (gi, &g) in cfg.gain_db.iter().enumerate() {
        let subset: Vec<SweepRecord> = records
            .iter()
            .filter(|r| r.gain_db == g && r.loss_db == loss_db)
            .copied()
            .collect();
        for point in metrics::seed_average(&subset) {
            if let Some(di) = cfg.d_over_w0.iter().position(|&d| d == point.d_over_w0) {
                values[[gi, di]] = point.psnr_db;
            }
        }
    }
    PsnrGrid::new(cfg.d_over_w0.clone(), cfg.gain_db.clone(), values)
}

/// Writes `records.csv`, `manifest.txt` and the PSNR contours; one contour
/// file per loss value (`contours.csv` when there is only one).
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let summary = run_to_disk(cfg, "sweep")?;
    for &loss in &cfg.loss_db {
        let grid = grid_for_loss(cfg, &summary.records, loss)?;
        let contours = psnr_contours(&grid, &cfg.contour_levels);
        let name = if cfg.loss_db.len() == 1 {
            "contours.csv".to_owned()
        } else {
            format!("contours_loss{loss}.csv")
        };
        crate::io::write_file(
            &summary.output_dir.join(name),
            contours_to_csv(&contours).as_bytes(),
        )?;
    }
    Ok(summary)
}

/// `d_min/w0` for every `(loss, gain)` pair, in config order.
pub fn resolution_table(
    cfg: &ExperimentConfig,
    records: &[SweepRecord],
) -> Result<Vec<ResolutionRow>> {
    let mut rows = Vec::new();
    for &loss_db in &cfg.loss_db {
        for &gain_db in &cfg.gain_db {
            let subset: Vec<SweepRecord> = records
                .iter()
                .filter(|r| r.gain_db == gain_db && r.loss_db == loss_db)
                .copied()
                .collect();
            let curve = metrics::seed_average(&subset);
            rows.push(ResolutionRow {
                loss_db,
                gain_db,
                d_min: min_resolvable_size(&curve, cfg.threshold_db)?,
            });
        }
    }
    Ok(rows)
}

/// Runs the sweep and writes `resolution.csv` next to its records.
pub fn run_resolution_curve(cfg: &ExperimentConfig) -> Result<(RunSummary, Vec<ResolutionRow>)> {
    let summary = run_to_disk(cfg, "resolution")?;
    let rows = resolution_table(cfg, &summary.records)?;
    let mut w = CsvWriter::create(
        &summary.output_dir.join("resolution.csv"),
        RESOLUTION_CSV_HEADER,
    )?;
    w.write_rows(rows.iter().map(ResolutionRow::csv_row))?;
    Ok((summary, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::ChartSpec;
    use crate::harness::ObjectSource;

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::preset("fig3d").unwrap();
        cfg.object = ObjectSource::Chart(ChartSpec {
            rows: 32,
            cols: 32,
            n_groups: 1,
            ..ChartSpec::default()
        });
        cfg.d_over_w0 = vec![8.0, 32.0];
        cfg.gain_db = vec![0.0, 10.0];
        cfg.seeds = vec![1, 2];
        cfg
    }

    #[test]
    fn cell_order_is_loss_gain_size_seed() {
        let c = cells(&small());
        assert_eq!(c.len(), 8);
        assert_eq!((c[0].gain_db, c[0].d_over_w0, c[0].seed), (0.0, 8.0, 1));
        assert_eq!((c[1].gain_db, c[1].d_over_w0, c[1].seed), (0.0, 8.0, 2));
        assert_eq!((c[2].gain_db, c[2].d_over_w0, c[2].seed), (0.0, 32.0, 1));
        assert_eq!(c[4].gain_db, 10.0);
    }

    #[test]
    fn loss_scales_detected_photons() {
        let cfg = small();
        let p100 = cell_params(&cfg, 0.5, 0.0, 100.0).unwrap();
        let p110 = cell_params(&cfg, 0.5, 0.0, 110.0).unwrap();
        assert!((p100.n_p_prime() - 100.0).abs() < 1e-9);
        assert!((p110.n_p_prime() - 10.0).abs() < 1e-9);
        assert!((p110.n_b_prime() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn records_are_deterministic_and_thread_independent() {
        let mut cfg = small();
        cfg.threads = 1;
        let a = evaluate_records(&cfg).unwrap();
        cfg.threads = 3;
        let b = evaluate_records(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.psnr_db.is_finite()));
    }

    #[test]
    fn grid_and_table_cover_every_pair() {
        let cfg = small();
        let records = evaluate_records(&cfg).unwrap();
        let grid = grid_for_loss(&cfg, &records, 100.0).unwrap();
        assert_eq!(grid.values.dim(), (2, 2));
        let rows = resolution_table(&cfg, &records).unwrap();
        assert_eq!(rows.len(), 2);
    }
}
