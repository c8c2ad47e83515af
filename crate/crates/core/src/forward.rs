//! Forward model: blur the object amplitude by the PSF, scale by the probe
//! amplitude and add squeezed-thermal homodyne noise.
//!
//! The detector records the full linear-convolution support, i.e. the object
//! grid plus a dark margin of one kernel half-width on every side. The
//! object's pixels sit in [`Roi`] inside that canvas.

use std::f64::consts::PI;

use ndarray::{s, Array2};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{readout_variance, ChannelParams};
use crate::error::{Error, Result};
use crate::optics::{self, fft, Kernel, PsfSpec};
use crate::par;
use crate::scene::ObjectField;

/// Local-oscillator phase compensation `θ_C(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MeasurementPolicy {
    /// `θ_C = −θ`: reads `√κ`.
    #[default]
    AmplitudeCompensated,
    /// `θ_C = −θ + π/2`: operating point for phase sensing.
    PhaseQuadrature,
    /// Constant `θ_C`.
    FixedPhase(f64),
}

impl MeasurementPolicy {
    fn readout(&self, kappa: f64, theta: f64) -> f64 {
        let theta_c = match *self {
            MeasurementPolicy::AmplitudeCompensated => -theta,
            MeasurementPolicy::PhaseQuadrature => -theta + PI / 2.0,
            MeasurementPolicy::FixedPhase(c) => c,
        };
        kappa.sqrt() * (theta + theta_c).cos()
    }
}

/// How `n_P′` is spread over the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhotonBudget {
    /// `n_P′` is the mean detected photon number of each pixel.
    #[default]
    PerPixel,
    /// `n_P′` is the total over all `m_o·n_o` pixels.
    WholeImage,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForwardSettings {
    pub policy: MeasurementPolicy,
    pub budget: PhotonBudget,
}

/// Placement of the object grid inside the detector canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roi {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Roi {
    pub fn crop<T: Clone>(&self, grid: &Array2<T>) -> Array2<T> {
        grid.slice(s![
            self.row0..self.row0 + self.rows,
            self.col0..self.col0 + self.cols
        ])
        .to_owned()
    }
}

/// Probe amplitude `A` such that a pixel of transmissivity `κ̄_obj` has mean
/// readout `√(n_P′)` (per-pixel budget) or `√(n_P′ / m_o n_o)` (whole image).
pub fn amplitude_scale(
    obj_mean_kappa: f64,
    pixels: usize,
    p: &ChannelParams,
    budget: PhotonBudget,
) -> Result<f64> {
    if !(obj_mean_kappa > 0.0) {
        return Err(Error::ZeroSignalPower);
    }
    let per_pixel = match budget {
        PhotonBudget::PerPixel => p.n_p_prime(),
        PhotonBudget::WholeImage => p.n_p_prime() / pixels as f64,
    };
    Ok((per_pixel / obj_mean_kappa).sqrt())
}

/// Noise-free detector image.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanImage {
    pub grid: Array2<f64>,
    pub roi: Roi,
    pub amplitude: f64,
    pub pitch: f64,
}

/// `A · (Re(f e^{iθ_C}) ⊛ h)` evaluated by DFT on the zero-padded canvas.
pub fn mean_image(
    obj: &ObjectField,
    kernel: &Kernel,
    p: &ChannelParams,
    settings: &ForwardSettings,
) -> Result<MeanImage> {
    let pitch = obj.pitch();
    if (kernel.pitch() - pitch).abs() > 1e-9 * pitch {
        return Err(Error::PitchMismatch {
            object: pitch,
            kernel: kernel.pitch(),
        });
    }
    let (m, n) = obj.dim();
    let amplitude = amplitude_scale(obj.mean_kappa(), m * n, p, settings.budget)?;
    let (cr, cc) = kernel.center();
    let roi = Roi {
        row0: cr,
        col0: cc,
        rows: m,
        cols: n,
    };
    let canvas_dim = (m + 2 * cr, n + 2 * cc);

    let mut canvas = Array2::<f64>::zeros(canvas_dim);
    let signal = ndarray::Zip::from(obj.kappa())
        .and(obj.theta())
        .map_collect(|&k, &t| amplitude * settings.policy.readout(k, t));
    canvas
        .slice_mut(s![cr..cr + m, cc..cc + n])
        .assign(&signal);

    let h = optics::transfer_function(kernel, canvas_dim.0, canvas_dim.1)?;
    let mut spec = fft::to_complex(&canvas);
    fft::fft2(&mut spec);
    spec.zip_mut_with(h.values(), |y, h| *y *= h);
    fft::ifft2(&mut spec);

    Ok(MeanImage {
        grid: spec.mapv(|v| v.re),
        roi,
        amplitude,
        pitch,
    })
}

/// Homodyne readout grid with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureImage {
    /// Canvas-sized X-quadrature samples.
    pub x_readout: Array2<f64>,
    pub roi: Roi,
    pub params: ChannelParams,
    pub seed: u64,
    /// Probe amplitude `A` used by the forward model.
    pub amplitude: f64,
    pub pitch: f64,
    /// Waist of the gaussian PSF, when one was used.
    pub w0: Option<f64>,
}

impl QuadratureImage {
    /// Object-region view of the readout.
    pub fn object_region(&self) -> Array2<f64> {
        self.roi.crop(&self.x_readout)
    }
}

fn unit_open(bits: u64) -> f64 {
    // (0, 1]
    ((bits >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal samples for one canvas row; pixel `(row, col)` depends on
/// `(seed, row, col)` only.
pub fn normal_row(seed: u64, row: usize, cols: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng.set_word_pos(0);
    (0..cols)
        .map(|_| {
            let u1 = unit_open(rng.next_u64());
            let u2 = unit_open(rng.next_u64());
            (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        })
        .collect()
}

/// Adds i.i.d. gaussian noise of variance `readout_variance(p)` to every
/// canvas pixel.
pub fn add_noise(mean: &MeanImage, p: &ChannelParams, seed: u64) -> QuadratureImage {
    let sigma = readout_variance(p).max(0.0).sqrt();
    let mut grid = mean.grid.clone();
    let cols = grid.ncols();
    let data = grid.as_slice_mut().expect("owned grid is contiguous");
    par::for_each_chunk_mut(data, cols, |row, values| {
        for (v, z) in values.iter_mut().zip(normal_row(seed, row, cols)) {
            *v += sigma * z;
        }
    });
    QuadratureImage {
        x_readout: grid,
        roi: mean.roi,
        params: *p,
        seed,
        amplitude: mean.amplitude,
        pitch: mean.pitch,
        w0: None,
    }
}

pub fn simulate(
    obj: &ObjectField,
    psf: &PsfSpec,
    p: &ChannelParams,
    settings: &ForwardSettings,
    seed: u64,
) -> Result<QuadratureImage> {
    let kernel = optics::gaussian_psf(psf)?;
    let mean = mean_image(obj, &kernel, p, settings)?;
    let mut img = add_noise(&mean, p, seed);
    img.w0 = Some(psf.w0);
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{generate_bar_chart, ChartSpec};

    fn quantum_params(gain: f64, n_b_prime: f64, n_p_prime: f64) -> ChannelParams {
        ChannelParams::from_detected(1e-9, gain, n_b_prime, n_p_prime, 1e-10).unwrap()
    }

    #[test]
    fn uniform_object_without_blur_reads_sqrt_n_p() {
        let obj = ObjectField::uniform(20, 30, 0.4, 20.0).unwrap();
        // waist far below the pitch: off-centre taps are ~e^-50
        let psf = PsfSpec::covering(0.1, obj.pitch()).unwrap();
        assert_eq!((psf.rows, psf.cols), (3, 3));
        let kernel = optics::gaussian_psf(&psf).unwrap();
        let p = quantum_params(1.0, 0.0, 100.0);
        let mean = mean_image(&obj, &kernel, &p, &ForwardSettings::default()).unwrap();
        assert_eq!(mean.grid.dim(), (22, 32));
        for v in mean.roi.crop(&mean.grid).iter() {
            assert!((v - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn blurred_uniform_interior_is_flat() {
        let obj = ObjectField::uniform(64, 64, 1.0, 64.0).unwrap();
        let psf = PsfSpec::covering(2.0, 1.0).unwrap();
        let kernel = optics::gaussian_psf(&psf).unwrap();
        let p = quantum_params(1.0, 0.0, 100.0);
        let mean = mean_image(&obj, &kernel, &p, &ForwardSettings::default()).unwrap();
        let inner = mean.roi.crop(&mean.grid);
        let expected = 10.0 * kernel.taps().sum();
        assert!((inner[[32, 32]] - expected).abs() < 1e-9);
        // the dark surround pulls the border down
        assert!(inner[[0, 32]] < 0.75 * expected);
    }

    #[test]
    fn phase_shifted_object_reads_zero_at_fixed_phase() {
        let theta = Array2::from_elem((16, 16), PI / 2.0);
        let obj = ObjectField::uniform(16, 16, 0.5, 16.0)
            .unwrap()
            .with_theta(theta)
            .unwrap();
        let kernel = optics::gaussian_psf(&PsfSpec::covering(1.0, 1.0).unwrap()).unwrap();
        let settings = ForwardSettings {
            policy: MeasurementPolicy::FixedPhase(0.0),
            ..Default::default()
        };
        let mean = mean_image(&obj, &kernel, &quantum_params(1.0, 0.0, 100.0), &settings).unwrap();
        assert!(mean.grid.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn point_object_images_the_psf() {
        let mut kappa = Array2::zeros((41, 41));
        kappa[[20, 20]] = 1.0;
        let obj = ObjectField::from_kappa(kappa, 41.0).unwrap();
        let kernel = optics::gaussian_psf(&PsfSpec::covering(1.5, 1.0).unwrap()).unwrap();
        let p = quantum_params(1.0, 0.0, 100.0);
        let mean = mean_image(&obj, &kernel, &p, &ForwardSettings::default()).unwrap();
        let (cr, cc) = kernel.center();
        let center = (mean.roi.row0 + 20, mean.roi.col0 + 20);
        let scale = mean.amplitude;
        for ((i, j), &t) in kernel.taps().indexed_iter() {
            let v = mean.grid[[center.0 + i - cr, center.1 + j - cc]];
            assert!((v / scale - t).abs() < 1e-10);
        }
    }

    #[test]
    fn pitch_mismatch_is_rejected() {
        let obj = ObjectField::uniform(16, 16, 1.0, 16.0).unwrap();
        let kernel = optics::gaussian_psf(&PsfSpec::covering(1.0, 0.5).unwrap()).unwrap();
        let err = mean_image(
            &obj,
            &kernel,
            &quantum_params(1.0, 0.0, 1.0),
            &ForwardSettings::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::PitchMismatch { .. }));
    }

    #[test]
    fn whole_image_budget_divides_by_pixel_count() {
        let p = quantum_params(1.0, 0.0, 100.0);
        let a = amplitude_scale(0.5, 400, &p, PhotonBudget::PerPixel).unwrap();
        let b = amplitude_scale(0.5, 400, &p, PhotonBudget::WholeImage).unwrap();
        assert!((a / b - 20.0).abs() < 1e-12);
        assert!(matches!(
            amplitude_scale(0.0, 400, &p, PhotonBudget::PerPixel),
            Err(Error::ZeroSignalPower)
        ));
    }

    #[test]
    fn zero_variance_leaves_mean_untouched() {
        let obj = generate_bar_chart(&ChartSpec {
            rows: 32,
            cols: 32,
            n_groups: 1,
            ..Default::default()
        })
        .unwrap();
        let kernel = optics::gaussian_psf(&PsfSpec::covering(0.05, obj.pitch()).unwrap()).unwrap();
        let p = ChannelParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let mean = mean_image(&obj, &kernel, &p, &ForwardSettings::default()).unwrap();
        let img = add_noise(&mean, &p, 9);
        assert_eq!(img.x_readout, mean.grid);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let obj = ObjectField::uniform(40, 40, 1.0, 40.0).unwrap();
        let psf = PsfSpec::covering(2.0, 1.0).unwrap();
        let p = quantum_params(3.0, 0.1, 100.0);
        let s = ForwardSettings::default();
        let a = simulate(&obj, &psf, &p, &s, 42).unwrap();
        let b = simulate(&obj, &psf, &p, &s, 42).unwrap();
        let c = simulate(&obj, &psf, &p, &s, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.x_readout, c.x_readout);
    }

    #[test]
    fn normal_rows_are_keyed_by_row() {
        assert_eq!(normal_row(5, 3, 16), normal_row(5, 3, 16));
        assert_ne!(normal_row(5, 3, 16), normal_row(5, 4, 16));
        // a pixel does not depend on the row width
        assert_eq!(normal_row(5, 3, 16)[..8], normal_row(5, 3, 8)[..]);
    }
}
