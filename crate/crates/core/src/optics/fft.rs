//! Row-column 2-D DFT on `ndarray` grids.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::par;

fn rows_in_place(data: &mut [Complex64], width: usize, direction: FftDirection) {
    let fft = FftPlanner::new().plan_fft(width, direction);
    par::for_each_chunk_mut(data, width, |_, row| fft.process(row));
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

fn transform(grid: &mut Array2<Complex64>, direction: FftDirection) {
    let (rows, cols) = grid.dim();
    if !grid.is_standard_layout() {
        *grid = grid.as_standard_layout().into_owned();
    }
    let data = grid.as_slice_mut().expect("standard layout");
    rows_in_place(data, cols, direction);
    let mut t = transpose(data, rows, cols);
    rows_in_place(&mut t, rows, direction);
    data.copy_from_slice(&transpose(&t, cols, rows));
}

/// Unnormalised forward transform.
pub fn fft2(grid: &mut Array2<Complex64>) {
    transform(grid, FftDirection::Forward);
}

/// Inverse transform, normalised by `1/(rows·cols)`.
pub fn ifft2(grid: &mut Array2<Complex64>) {
    transform(grid, FftDirection::Inverse);
    let scale = 1.0 / grid.len() as f64;
    grid.mapv_inplace(|v| v * scale);
}

pub fn to_complex(grid: &Array2<f64>) -> Array2<Complex64> {
    grid.mapv(|v| Complex64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(grid: &Array2<Complex64>) -> Array2<Complex64> {
        let (m, n) = grid.dim();
        Array2::from_shape_fn((m, n), |(u, v)| {
            let mut acc = Complex64::default();
            for ((i, j), x) in grid.indexed_iter() {
                let phase = -2.0
                    * std::f64::consts::PI
                    * ((u * i) as f64 / m as f64 + (v * j) as f64 / n as f64);
                acc += x * Complex64::from_polar(1.0, phase);
            }
            acc
        })
    }

    #[test]
    fn matches_naive_dft_on_rectangular_grid() {
        let g = Array2::from_shape_fn((5, 7), |(i, j)| {
            Complex64::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.05)
        });
        let mut fast = g.clone();
        fft2(&mut fast);
        let slow = naive_dft(&g);
        for (a, b) in fast.iter().zip(slow.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
        ifft2(&mut fast);
        for (a, b) in fast.iter().zip(g.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
