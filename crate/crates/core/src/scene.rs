//! Object transmittance fields and the procedural bar chart used as ground
//! truth.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::io::pgm;

/// Complex transmittance `f = √κ·e^{iθ}` sampled on an `m_o × n_o` grid of
/// square pixels spanning `extent_d` metres along the row axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectField {
    kappa: Array2<f64>,
    theta: Array2<f64>,
    extent_d: f64,
}

impl ObjectField {
    pub fn new(kappa: Array2<f64>, theta: Array2<f64>, extent_d: f64) -> Result<Self> {
        if kappa.dim() != theta.dim() {
            return Err(Error::DimensionMismatch {
                expected: kappa.dim(),
                actual: theta.dim(),
            });
        }
        let (m, n) = kappa.dim();
        if m == 0 || n == 0 {
            return Err(Error::GridTooSmall(format!("{m}×{n} object grid")));
        }
        if !(extent_d > 0.0 && extent_d.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "object extent must be positive, got {extent_d}"
            )));
        }
        if let Some(bad) = kappa.iter().find(|k| !(0.0..=1.0).contains(*k)) {
            return Err(Error::InvalidArgument(format!(
                "transmissivity {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            kappa,
            theta,
            extent_d,
        })
    }

    /// Zero-phase field.
    pub fn from_kappa(kappa: Array2<f64>, extent_d: f64) -> Result<Self> {
        let theta = Array2::zeros(kappa.dim());
        Self::new(kappa, theta, extent_d)
    }

    pub fn uniform(rows: usize, cols: usize, kappa: f64, extent_d: f64) -> Result<Self> {
        Self::from_kappa(Array2::from_elem((rows, cols), kappa), extent_d)
    }

    pub fn kappa(&self) -> &Array2<f64> {
        &self.kappa
    }

    pub fn theta(&self) -> &Array2<f64> {
        &self.theta
    }

    pub fn extent_d(&self) -> f64 {
        self.extent_d
    }

    /// Metres per pixel.
    pub fn pitch(&self) -> f64 {
        self.extent_d / self.kappa.nrows() as f64
    }

    pub fn dim(&self) -> (usize, usize) {
        self.kappa.dim()
    }

    /// Row-major sequential mean of κ.
    pub fn mean_kappa(&self) -> f64 {
        let sum: f64 = self.kappa.iter().sum();
        sum / self.kappa.len() as f64
    }

    pub fn max_kappa(&self) -> f64 {
        self.kappa.iter().copied().fold(0.0, f64::max)
    }

    /// Field amplitude `|f| = √κ`.
    pub fn amplitude(&self) -> Array2<f64> {
        self.kappa.mapv(f64::sqrt)
    }

    pub fn with_theta(mut self, theta: Array2<f64>) -> Result<Self> {
        if theta.dim() != self.kappa.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kappa.dim(),
                actual: theta.dim(),
            });
        }
        self.theta = theta;
        Ok(self)
    }
}

/// Parameters of the procedural bar chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartSpec {
    pub rows: usize,
    pub cols: usize,
    pub n_groups: usize,
    pub bars_per_element: usize,
    pub dark_kappa: f64,
    pub bright_kappa: f64,
}

impl Default for ChartSpec {
    fn default() -> Self {
        Self {
            rows: 200,
            cols: 200,
            n_groups: 4,
            bars_per_element: 3,
            dark_kappa: 0.0,
            bright_kappa: 1.0,
        }
    }
}

/// Axis-aligned pixel rectangle `[row0, row0 + height) × [col0, col0 + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub row0: usize,
    pub col0: usize,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    pub fn area(&self) -> usize {
        self.height * self.width
    }
}

/// Dark bars drawn by [`generate_bar_chart`].
///
/// The base bar width is `min(rows, cols) / 16` pixels and halves with each
/// group. A group is a horizontal element (bars stacked along rows) followed
/// by a vertical element one bar width to its right; bars are five widths
/// long and separated by one width. Groups descend along the diagonal.
pub fn chart_layout(spec: &ChartSpec) -> Result<Vec<Rect>> {
    let ChartSpec {
        rows,
        cols,
        n_groups,
        bars_per_element,
        ..
    } = *spec;
    if rows < 16 || cols < 16 {
        return Err(Error::GridTooSmall(format!(
            "chart needs at least 16×16 pixels, got {rows}×{cols}"
        )));
    }
    if bars_per_element == 0 {
        return Err(Error::InvalidArgument("bars_per_element must be ≥ 1".into()));
    }
    let base = rows.min(cols) / 16;
    let mut rects = Vec::new();
    let mut cursor = base;
    for g in 0..n_groups {
        let w = base >> g;
        if w == 0 {
            return Err(Error::GridTooSmall(format!(
                "group {g} would have zero bar width on a {rows}×{cols} grid"
            )));
        }
        let span = (2 * bars_per_element - 1) * w;
        let length = 5 * w;
        let vert_col0 = cursor + length + w;
        if cursor + span.max(length) > rows || vert_col0 + span > cols {
            return Err(Error::GridTooSmall(format!(
                "group {g} does not fit on a {rows}×{cols} grid"
            )));
        }
        for b in 0..bars_per_element {
            rects.push(Rect {
                row0: cursor + 2 * b * w,
                col0: cursor,
                height: w,
                width: length,
            });
        }
        for b in 0..bars_per_element {
            rects.push(Rect {
                row0: cursor,
                col0: vert_col0 + 2 * b * w,
                height: length,
                width: w,
            });
        }
        cursor += span.max(length) + w;
    }
    Ok(rects)
}

/// Binary three-bar resolution chart (θ ≡ 0) with unit extent.
pub fn generate_bar_chart(spec: &ChartSpec) -> Result<ObjectField> {
    if !(0.0 <= spec.dark_kappa && spec.dark_kappa < spec.bright_kappa && spec.bright_kappa <= 1.0)
    {
        return Err(Error::InvalidArgument(format!(
            "need 0 ≤ dark ({}) < bright ({}) ≤ 1",
            spec.dark_kappa, spec.bright_kappa
        )));
    }
    let rects = chart_layout(spec)?;
    let mut kappa = Array2::from_elem((spec.rows, spec.cols), spec.bright_kappa);
    for r in &rects {
        kappa
            .slice_mut(ndarray::s![
                r.row0..r.row0 + r.height,
                r.col0..r.col0 + r.width
            ])
            .fill(spec.dark_kappa);
    }
    ObjectField::from_kappa(kappa, 1.0)
}

/// Decodes an 8-bit grayscale PGM into a field with
/// `κ = kappa_max · (pixel/255)²`, so image amplitude is linear in brightness.
pub fn load_raster(bytes: &[u8], extent_d: f64, kappa_max: f64) -> Result<ObjectField> {
    if !(0.0..=1.0).contains(&kappa_max) {
        return Err(Error::InvalidArgument(format!(
            "kappa_max {kappa_max} outside [0, 1]"
        )));
    }
    let img = pgm::decode(bytes)?;
    let kappa = img.mapv(|p| {
        let a = f64::from(p) / 255.0;
        kappa_max * a * a
    });
    ObjectField::from_kappa(kappa, extent_d)
}

/// Inverse of [`load_raster`]: amplitude `√(κ/kappa_max)` quantised to 8 bits.
pub fn save_raster(field: &ObjectField, kappa_max: f64) -> Result<Vec<u8>> {
    if !(kappa_max > 0.0 && kappa_max <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "kappa_max {kappa_max} outside (0, 1]"
        )));
    }
    let pixels = field
        .kappa()
        .mapv(|k| ((k / kappa_max).clamp(0.0, 1.0).sqrt() * 255.0).round() as u8);
    Ok(pgm::encode(&pixels))
}

/// Same grids, new physical side length.
pub fn rescale_extent(field: &ObjectField, new_d: f64) -> Result<ObjectField> {
    if !(new_d > 0.0 && new_d.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "object extent must be positive, got {new_d}"
        )));
    }
    Ok(ObjectField {
        extent_d: new_d,
        ..field.clone()
    })
}
