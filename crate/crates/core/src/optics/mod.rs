//! Gaussian point-spread function, its transfer function, and the closed-form
//! resolution geometry of a discrete synthetic-aperture array.

pub mod fft;
mod fresnel;

pub use fresnel::{fresnel_compressed_psf, Profile};

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Continuous PSF `h(x, y) = (π w0²)^{-1/2} · exp(−(x² + y²) / 2w0²)`,
/// which has unit L2 norm over the plane.
pub fn gaussian_profile(x: f64, y: f64, w0: f64) -> f64 {
    (PI * w0 * w0).sqrt().recip() * (-(x * x + y * y) / (2.0 * w0 * w0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsfSpec {
    /// Waist, m.
    pub w0: f64,
    pub rows: usize,
    pub cols: usize,
    /// m/pixel.
    pub pitch: f64,
}

impl PsfSpec {
    /// Smallest odd square grid reaching ±4·w0.
    pub fn covering(w0: f64, pitch: f64) -> Result<Self> {
        if !(w0 > 0.0 && pitch > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need w0 > 0 and pitch > 0 (got {w0}, {pitch})"
            )));
        }
        let half = (4.0 * w0 / pitch * (1.0 - 1e-12)).ceil() as usize;
        Ok(Self {
            w0,
            rows: 2 * half + 1,
            cols: 2 * half + 1,
            pitch,
        })
    }
}

/// Real convolution kernel sampled at pixel centres, centre tap at
/// `((rows-1)/2, (cols-1)/2)`.
///
/// Taps are dimensionless: `tap = h(x, y) · pitch`, so that a gaussian kernel
/// satisfies `Σ tap² = Σ |h|² pitch² = 1` and maps per-pixel field modes to
/// per-pixel field modes without changing total energy of a point source.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    taps: Array2<f64>,
    pitch: f64,
}

impl Kernel {
    pub fn from_taps(taps: Array2<f64>, pitch: f64) -> Result<Self> {
        let (r, c) = taps.dim();
        if r % 2 == 0 || c % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "kernel dims must be odd, got {r}×{c}"
            )));
        }
        if !(pitch > 0.0) {
            return Err(Error::InvalidArgument(format!("pitch must be > 0, got {pitch}")));
        }
        Ok(Self { taps, pitch })
    }

    /// Single unit tap.
    pub fn delta(pitch: f64) -> Result<Self> {
        Self::from_taps(Array2::ones((1, 1)), pitch)
    }

    pub fn taps(&self) -> &Array2<f64> {
        &self.taps
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn dim(&self) -> (usize, usize) {
        self.taps.dim()
    }

    /// Offset of the centre tap.
    pub fn center(&self) -> (usize, usize) {
        let (r, c) = self.dim();
        ((r - 1) / 2, (c - 1) / 2)
    }

    /// Sample of the continuous PSF in 1/m units.
    pub fn psf_value(&self, row: usize, col: usize) -> f64 {
        self.taps[[row, col]] / self.pitch
    }

    pub fn l2_norm(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum::<f64>().sqrt()
    }
}

/// Samples the gaussian PSF and renormalises to `Σ |h|² pitch² = 1`.
pub fn gaussian_psf(spec: &PsfSpec) -> Result<Kernel> {
    if !(spec.w0 > 0.0 && spec.pitch > 0.0) {
        return Err(Error::InvalidArgument(format!("invalid PSF spec {spec:?}")));
    }
    let required = 4.0 * spec.w0;
    let half_rows = (spec.rows.saturating_sub(1) / 2) as f64 * spec.pitch;
    let half_cols = (spec.cols.saturating_sub(1) / 2) as f64 * spec.pitch;
    let covered = half_rows.min(half_cols);
    if covered < required * (1.0 - 1e-12) {
        return Err(Error::KernelTruncated { covered, required });
    }
    let cr = (spec.rows as f64 - 1.0) / 2.0;
    let cc = (spec.cols as f64 - 1.0) / 2.0;
    let mut taps = Array2::from_shape_fn((spec.rows, spec.cols), |(i, j)| {
        let y = (i as f64 - cr) * spec.pitch;
        let x = (j as f64 - cc) * spec.pitch;
        gaussian_profile(x, y, spec.w0) * spec.pitch
    });
    let norm = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    taps.mapv_inplace(|t| t / norm);
    Kernel::from_taps(taps, spec.pitch)
}

/// DFT of a kernel zero-padded to `rows × cols` with its centre tap wrapped
/// to index (0, 0), so filtering with it introduces no shift.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Array2<Complex64>,
}

impl Spectrum {
    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn dim(&self) -> (usize, usize) {
        self.values.dim()
    }

    /// `H(0, 0) = Σ taps` (dimensionless).
    pub fn dc(&self) -> f64 {
        self.values[[0, 0]].re
    }

    pub fn min_abs(&self) -> f64 {
        self.values.iter().map(|h| h.norm()).fold(f64::INFINITY, f64::min)
    }
}

pub fn transfer_function(kernel: &Kernel, rows: usize, cols: usize) -> Result<Spectrum> {
    let (kr, kc) = kernel.dim();
    if rows < kr || cols < kc {
        return Err(Error::DimensionMismatch {
            expected: (kr, kc),
            actual: (rows, cols),
        });
    }
    let (cr, cc) = kernel.center();
    let mut padded = Array2::<Complex64>::zeros((rows, cols));
    for ((i, j), &t) in kernel.taps().indexed_iter() {
        let r = (i as isize - cr as isize).rem_euclid(rows as isize) as usize;
        let c = (j as isize - cc as isize).rem_euclid(cols as isize) as usize;
        padded[[r, c]] += Complex64::new(t, 0.0);
    }
    fft::fft2(&mut padded);
    Ok(Spectrum { values: padded })
}

/// PSF waist of a strip-map synthetic aperture, `w0 = D/2`.
pub fn strip_map_waist(d_aperture: f64) -> Result<f64> {
    if !(d_aperture > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "aperture must be > 0, got {d_aperture}"
        )));
    }
    Ok(d_aperture / 2.0)
}

/// Discrete transmitter-receiver array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    /// Antenna density, 1/m.
    pub rho: f64,
    /// Array length, m.
    pub l_total: f64,
    /// Physical antenna aperture, m.
    pub d_aperture: f64,
    /// Wavelength, m.
    pub lambda: f64,
    /// Range, m.
    pub z: f64,
}

impl ArrayGeometry {
    pub fn validate(&self) -> Result<()> {
        let all = [self.rho, self.l_total, self.d_aperture, self.lambda, self.z];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!("invalid geometry {self:?}")));
        }
        if self.rho * self.l_total < 2.0 {
            return Err(Error::InvalidArgument(format!(
                "ρ·L = {} < 2: fewer than two antennas",
                self.rho * self.l_total
            )));
        }
        Ok(())
    }

    pub fn antenna_count(&self) -> usize {
        (self.rho * self.l_total).round() as usize
    }
}

/// Beam footprint on the object plane, `a = λz/D`.
pub fn synthetic_aperture(geom: &ArrayGeometry) -> Result<f64> {
    geom.validate()?;
    Ok(geom.lambda * geom.z / geom.d_aperture)
}

/// Maximum view angle `ρλ` (radians). Values above 1 are outside the
/// paraxial regime and logged as a warning.
pub fn view_angle(geom: &ArrayGeometry) -> Result<f64> {
    geom.validate()?;
    let angle = geom.rho * geom.lambda;
    if angle > 1.0 {
        log::warn!("view angle ρλ = {angle} rad exceeds 1: outside the paraxial regime");
    }
    Ok(angle)
}

/// Distance between the central and first aliasing peak, `ρλz`.
pub fn aliasing_spacing(geom: &ArrayGeometry) -> Result<f64> {
    Ok(view_angle(geom)? * geom.z)
}

/// Minimum resolvable object length `max{D/2, λz/L}`.
pub fn resolution_limit(geom: &ArrayGeometry) -> Result<f64> {
    geom.validate()?;
    Ok((geom.d_aperture / 2.0).max(geom.lambda * geom.z / geom.l_total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn geom(rho: f64, l: f64, d: f64, lambda: f64, z: f64) -> ArrayGeometry {
        ArrayGeometry {
            rho,
            l_total: l,
            d_aperture: d,
            lambda,
            z,
        }
    }

    #[test]
    fn continuous_profile_values() {
        let w0 = 1.7;
        assert_relative_eq!(gaussian_profile(0.0, 0.0, w0), 1.0 / (PI * w0 * w0).sqrt());
        assert_relative_eq!(
            gaussian_profile(w0, 0.0, w0) / gaussian_profile(0.0, 0.0, w0),
            (-0.5f64).exp(),
            max_relative = 1e-14
        );
        assert!(((-0.5f64).exp() - 0.6065).abs() < 1e-4);
    }

    #[test]
    fn kernel_unit_energy_and_shape() {
        let spec = PsfSpec::covering(1.0, 0.25).unwrap();
        assert_eq!(spec.rows, 33);
        let k = gaussian_psf(&spec).unwrap();
        let energy: f64 = (0..spec.rows)
            .flat_map(|i| (0..spec.cols).map(move |j| (i, j)))
            .map(|(i, j)| k.psf_value(i, j).powi(2) * spec.pitch * spec.pitch)
            .sum();
        assert!((energy - 1.0).abs() < 1e-6);
        let (cr, cc) = k.center();
        // w0 = 4 pixels to the right of the centre
        let ratio = k.taps()[[cr, cc + 4]] / k.taps()[[cr, cc]];
        assert_relative_eq!(ratio, (-0.5f64).exp(), max_relative = 1e-12);
        // truncation at ±4w0 leaves the renormalised peak close to the continuum value
        let peak = k.psf_value(cr, cc);
        assert!((peak * (PI).sqrt() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn kernel_is_point_symmetric() {
        let k = gaussian_psf(&PsfSpec::covering(2.3, 0.7).unwrap()).unwrap();
        let (r, c) = k.dim();
        for i in 0..r {
            for j in 0..c {
                assert_eq!(k.taps()[[i, j]], k.taps()[[r - 1 - i, c - 1 - j]]);
            }
        }
    }

    #[test]
    fn truncated_grid_is_rejected() {
        let spec = PsfSpec {
            w0: 1.0,
            rows: 7,
            cols: 7,
            pitch: 0.5,
        };
        assert!(matches!(
            gaussian_psf(&spec),
            Err(Error::KernelTruncated { .. })
        ));
    }

    #[test]
    fn delta_kernel_has_flat_spectrum() {
        let h = transfer_function(&Kernel::delta(1.0).unwrap(), 8, 6).unwrap();
        for v in h.values() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn gaussian_spectrum_is_real_and_matches_dc() {
        let k = gaussian_psf(&PsfSpec::covering(2.0, 1.0).unwrap()).unwrap();
        let h = transfer_function(&k, 64, 48).unwrap();
        let max_imag = h.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert!(max_imag < 1e-10, "imaginary residue {max_imag}");
        assert_relative_eq!(h.dc(), k.taps().sum(), max_relative = 1e-12);
        // truncation at ±4w0 leaves only a ripple of order h(4w0)/h(0)·Σtaps
        let min_re = h.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
        assert!(min_re > -1e-3 * h.dc(), "min real part {min_re}");
    }

    fn half_power_index(h: &Spectrum) -> f64 {
        let vals = h.values();
        let dc2 = vals[[0, 0]].norm_sqr();
        let (_, cols) = h.dim();
        for j in 1..cols / 2 {
            let a = vals[[0, j - 1]].norm_sqr() / dc2;
            let b = vals[[0, j]].norm_sqr() / dc2;
            if b < 0.5 {
                return (j - 1) as f64 + (a - 0.5) / (a - b);
            }
        }
        f64::NAN
    }

    #[test]
    fn bandwidth_scales_inversely_with_waist() {
        let narrow = gaussian_psf(&PsfSpec::covering(4.0, 1.0).unwrap()).unwrap();
        let wide = gaussian_psf(&PsfSpec::covering(8.0, 1.0).unwrap()).unwrap();
        let a = half_power_index(&transfer_function(&narrow, 1024, 1024).unwrap());
        let b = half_power_index(&transfer_function(&wide, 1024, 1024).unwrap());
        assert!((a / b - 2.0).abs() < 0.05 * 2.0, "{a} vs {b}");
    }

    #[test]
    fn transfer_rejects_small_target() {
        let k = gaussian_psf(&PsfSpec::covering(2.0, 1.0).unwrap()).unwrap();
        assert!(transfer_function(&k, 8, 64).is_err());
    }

    #[test]
    fn strip_map_examples() {
        assert_eq!(strip_map_waist(10.0).unwrap(), 5.0);
        assert_eq!(strip_map_waist(1.0).unwrap(), 0.5);
        assert!(strip_map_waist(0.0).is_err());
    }

    #[test]
    fn synthetic_aperture_examples() {
        let g = geom(0.01, 1000.0, 10.0, 3000.0, 1000.0);
        assert_relative_eq!(synthetic_aperture(&g).unwrap(), 3e5, max_relative = 1e-14);
        let self_consistent = geom(1.0, 10.0, 6.0, 4.0, 9.0);
        assert_relative_eq!(synthetic_aperture(&self_consistent).unwrap(), 6.0);
        let far = ArrayGeometry { z: 2000.0, ..g };
        assert_relative_eq!(synthetic_aperture(&far).unwrap(), 6e5, max_relative = 1e-14);
    }

    #[test]
    fn view_angle_examples() {
        let g = geom(1.0 / 1500.0, 3000.0, 10.0, 3000.0, 1000.0);
        assert_relative_eq!(view_angle(&g).unwrap(), 2.0, max_relative = 1e-14);
        let g = geom(1e-4, 1e5, 10.0, 3000.0, 1000.0);
        assert_relative_eq!(view_angle(&g).unwrap(), 0.3, max_relative = 1e-14);
        let scaled = ArrayGeometry { rho: 3e-4, ..g };
        assert_relative_eq!(view_angle(&scaled).unwrap(), 0.9, max_relative = 1e-14);
    }

    #[test]
    fn resolution_examples() {
        assert_eq!(
            resolution_limit(&geom(0.01, 1000.0, 10.0, 3.0, 1000.0)).unwrap(),
            5.0
        );
        assert_relative_eq!(
            resolution_limit(&geom(0.01, 1000.0, 10.0, 3.0, 1e4)).unwrap(),
            30.0,
            max_relative = 1e-14
        );
        // L = 2λz/D puts both branches at D/2
        let g = geom(0.01, 2.0 * 3.0 * 1000.0 / 10.0, 10.0, 3.0, 1000.0);
        assert_relative_eq!(resolution_limit(&g).unwrap(), 5.0, max_relative = 1e-14);
        assert_relative_eq!(g.lambda * g.z / g.l_total, 5.0, max_relative = 1e-14);
    }

    #[test]
    fn geometry_needs_two_antennas() {
        assert!(geom(0.001, 1000.0, 1.0, 1.0, 1.0).validate().is_err());
        assert!(geom(0.002, 1000.0, 1.0, 1.0, 1.0).validate().is_ok());
    }

    proptest! {
        #[test]
        fn resolution_monotone(l in 10.0f64..1e5, k in 1.0f64..10.0, d in 0.1f64..100.0) {
            let g = geom(1.0, l, d, 3.0, 1000.0);
            let longer = ArrayGeometry { l_total: l * k, ..g };
            let wider = ArrayGeometry { d_aperture: d * k, ..g };
            let base = resolution_limit(&g).unwrap();
            prop_assert!(resolution_limit(&longer).unwrap() <= base);
            prop_assert!(resolution_limit(&wider).unwrap() >= base);
        }

        #[test]
        fn kernel_energy_is_unity(w0 in 0.05f64..5.0, pitch in 0.2f64..2.0) {
            let k = gaussian_psf(&PsfSpec::covering(w0, pitch).unwrap()).unwrap();
            prop_assert!((k.l2_norm() - 1.0).abs() < 1e-6);
        }
    }
}
