//! 1-D model of chirp compression over a discrete antenna array.
//!
//! A point source at the origin of the object plane reaches antenna `u` with
//! the paraxial Fresnel phase `exp(iπu²/λz)`. Each antenna only sees targets
//! inside its beam footprint (`a = λz/D`), modelled as a gaussian amplitude
//! taper of width `σ = λz/(πD)`; with a long dense array this reproduces the
//! gaussian PSF of waist `D/2`. The matched filter for object position `x`
//! correlates the samples with `exp(iπ(u − x)²/λz)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::ArrayGeometry;
use crate::error::{Error, Result};
use crate::par;

/// Amplitude over an object-plane window, normalised to a unit maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub position: Vec<f64>,
    pub amplitude: Vec<f64>,
}

impl Profile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("position,amplitude\n");
        for (x, a) in self.position.iter().zip(&self.amplitude) {
            out.push_str(&format!("{x},{a}\n"));
        }
        out
    }

    fn step(&self) -> f64 {
        self.position[1] - self.position[0]
    }

    /// Local maxima above `min_height`, refined by parabolic interpolation.
    pub fn peaks(&self, min_height: f64) -> Vec<(f64, f64)> {
        let a = &self.amplitude;
        let dx = self.step();
        (1..a.len().saturating_sub(1))
            .filter(|&i| a[i] >= min_height && a[i] > a[i - 1] && a[i] >= a[i + 1])
            .map(|i| {
                let (l, c, r) = (a[i - 1], a[i], a[i + 1]);
                let denom = l - 2.0 * c + r;
                let shift = if denom.abs() > 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
                (self.position[i] + shift * dx, c - 0.25 * (l - r) * shift)
            })
            .collect()
    }

    fn center_index(&self) -> usize {
        self.position
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Distance from the centre peak to the nearest other peak at least half
    /// as tall, or `None` when the window holds no replica.
    pub fn aliasing_spacing(&self) -> Option<f64> {
        let peaks = self.peaks(0.5);
        let center = peaks
            .iter()
            .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))?
            .0;
        peaks
            .iter()
            .map(|p| (p.0 - center).abs())
            .filter(|d| *d > 2.0 * self.step())
            .min_by(f64::total_cmp)
    }

    /// Distance from the centre to the first minimum on the positive side.
    pub fn main_lobe_half_width(&self) -> Option<f64> {
        let a = &self.amplitude;
        let c = self.center_index();
        (c + 1..a.len() - 1)
            .find(|&i| a[i] <= a[i - 1] && a[i] < a[i + 1])
            .map(|i| self.position[i] - self.position[c])
    }

    /// Largest peak other than the one at the centre.
    pub fn max_secondary_peak(&self) -> f64 {
        let dx = self.step();
        self.peaks(0.0)
            .into_iter()
            .filter(|p| p.0.abs() > 2.0 * dx)
            .map(|p| p.1)
            .fold(0.0, f64::max)
    }
}

/// Matched-filter amplitude of a compressed point source over
/// `[-sim_window/2, sim_window/2]`.
///
/// Requires at least 8 samples per `λz/L`, the finest fringe the array can
/// produce; otherwise [`Error::UndersampledChirp`] reports the needed count.
pub fn fresnel_compressed_psf(
    geom: &ArrayGeometry,
    n_samples: usize,
    sim_window: f64,
) -> Result<Profile> {
    geom.validate()?;
    if !(sim_window > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "simulation window must be > 0, got {sim_window}"
        )));
    }
    let lz = geom.lambda * geom.z;
    let fringe = lz / geom.l_total;
    let required = (8.0 * sim_window / fringe).ceil() as usize + 1;
    if n_samples < required {
        return Err(Error::UndersampledChirp {
            given: n_samples,
            required,
        });
    }

    let n_ant = geom.antenna_count();
    let spacing = 1.0 / geom.rho;
    let sigma = lz / (PI * geom.d_aperture);
    let antennas: Vec<(f64, Complex64)> = (0..n_ant)
        .map(|k| {
            let u = (k as f64 - (n_ant as f64 - 1.0) / 2.0) * spacing;
            let taper = (-u * u / (2.0 * sigma * sigma)).exp();
            let received = Complex64::from_polar(taper, PI * u * u / lz);
            (u, received)
        })
        .collect();

    let dx = sim_window / (n_samples - 1) as f64;
    let position: Vec<f64> = (0..n_samples)
        .map(|i| -sim_window / 2.0 + i as f64 * dx)
        .collect();
    let mut amplitude = par::map(&position, |&x| {
        antennas
            .iter()
            .map(|&(u, s)| s * Complex64::from_polar(1.0, -PI * (u - x) * (u - x) / lz))
            .sum::<Complex64>()
            .norm()
    });
    let peak = amplitude.iter().copied().fold(0.0, f64::max);
    if peak > 0.0 {
        amplitude.iter_mut().for_each(|a| *a /= peak);
    }
    Ok(Profile {
        position,
        amplitude,
    })
}
