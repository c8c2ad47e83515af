//! Wiener deconvolution back to amplitude `√κ̃` units.

use ndarray::Array2;

use crate::channel::{readout_variance, ChannelParams};
use crate::error::{Error, Result};
use crate::forward::{PhotonBudget, QuadratureImage};
use crate::optics::{self, fft, Kernel};

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Estimated `√κ̃` on the object grid.
    pub f_tilde: Array2<f64>,
    pub nsr_used: f64,
    pub clip_applied: bool,
}

/// `F̃ = H* / (|H|² + nsr) · Y`, divided by the probe amplitude and cropped to
/// the object grid. With `clip`, values are limited to `[0, 1]`.
pub fn wiener_deconvolve(
    img: &QuadratureImage,
    kernel: &Kernel,
    nsr: f64,
    clip: bool,
) -> Result<Reconstruction> {
    if !(nsr >= 0.0) {
        return Err(Error::InvalidArgument(format!("nsr must be ≥ 0, got {nsr}")));
    }
    if (kernel.pitch() - img.pitch).abs() > 1e-9 * img.pitch {
        return Err(Error::PitchMismatch {
            object: img.pitch,
            kernel: kernel.pitch(),
        });
    }
    if !(img.amplitude > 0.0) {
        return Err(Error::ZeroSignalPower);
    }
    let (rows, cols) = img.x_readout.dim();
    let h = optics::transfer_function(kernel, rows, cols)?;
    if nsr == 0.0 {
        let min_abs = h.min_abs();
        if min_abs < 1e-12 {
            return Err(Error::SingularInverse { min_abs });
        }
    }

    let mut spec = fft::to_complex(&img.x_readout);
    fft::fft2(&mut spec);
    spec.zip_mut_with(h.values(), |y, h| {
        *y = *y * h.conj() / (h.norm_sqr() + nsr);
    });
    fft::ifft2(&mut spec);

    let scale = img.amplitude.recip();
    let mut f_tilde = img.roi.crop(&spec).mapv(|v| v.re * scale);
    if clip {
        f_tilde.mapv_inplace(|v| v.clamp(0.0, 1.0));
    }
    Ok(Reconstruction {
        f_tilde,
        nsr_used: nsr,
        clip_applied: clip,
    })
}

/// Oracle noise-to-signal ratio: readout variance over the mean per-pixel
/// signal power `A²κ̄` of the forward model.
pub fn default_nsr(p: &ChannelParams, budget: PhotonBudget, pixels: usize) -> Result<f64> {
    let signal = match budget {
        PhotonBudget::PerPixel => p.n_p_prime(),
        PhotonBudget::WholeImage => p.n_p_prime() / pixels as f64,
    };
    if !(signal > 0.0) {
        return Err(Error::ZeroSignalPower);
    }
    Ok(readout_variance(p) / signal)
}
