//! Little-endian float64 image container shared by quadrature images and
//! reconstructions.
//!
//! ```text
//! offset  size  field
//!      0     8  magic "QSARIMG\0"
//!      8     4  version (u32) = 1
//!     12     4  kind (u32): 0 quadrature image, 1 reconstruction
//!     16    16  rows, cols (u64) of the stored grid
//!     32    32  roi row0, col0, rows, cols (u64)
//!     64     8  seed (u64)
//!     72     8  probe amplitude A (f64)
//!     80     8  pitch, m (f64)
//!     88     8  PSF waist w0, m (f64, NaN if unknown)
//!     96    40  eta, gain, n_b, n_s, kappa_bar (f64)
//!    136     8  nsr (f64, NaN for quadrature images)
//!    144    32  SHA-256 of bytes 96..136 (params digest)
//!    176     …  rows·cols f64, row-major
//! ```

use ndarray::Array2;
use sha2::{Digest, Sha256};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::forward::{QuadratureImage, Roi};
use crate::restore::Reconstruction;

const MAGIC: &[u8; 8] = b"QSARIMG\0";
const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 176;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageKind {
    Quadrature = 0,
    Reconstruction = 1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageHeader {
    pub kind: ImageKind,
    pub roi: Roi,
    pub seed: u64,
    pub amplitude: f64,
    pub pitch: f64,
    pub w0: f64,
    pub params: ChannelParams,
    pub nsr: f64,
}

fn params_bytes(p: &ChannelParams) -> Vec<u8> {
    [p.eta, p.gain, p.n_b, p.n_s, p.kappa_bar]
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .collect()
}

/// SHA-256 of the channel parameters as stored in the header.
pub fn params_digest(p: &ChannelParams) -> [u8; 32] {
    Sha256::digest(params_bytes(p)).into()
}

pub fn encode(header: &ImageHeader, grid: &Array2<f64>) -> Vec<u8> {
    let (rows, cols) = grid.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header.kind as u32).to_le_bytes());
    for v in [
        rows,
        cols,
        header.roi.row0,
        header.roi.col0,
        header.roi.rows,
        header.roi.cols,
    ] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.extend_from_slice(&header.seed.to_le_bytes());
    for v in [header.amplitude, header.pitch, header.w0] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&params_bytes(&header.params));
    out.extend_from_slice(&header.nsr.to_le_bytes());
    out.extend_from_slice(&params_digest(&header.params));
    debug_assert_eq!(out.len(), HEADER_LEN);
    for v in grid.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<(ImageHeader, Array2<f64>)> {
    let err = |offset: usize, message: &str| Error::Parse {
        offset,
        message: message.to_owned(),
    };
    if bytes.len() < HEADER_LEN {
        return Err(err(bytes.len(), "truncated header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(err(0, "bad magic"));
    }
    if u32_at(bytes, 8) != VERSION {
        return Err(err(8, "unsupported version"));
    }
    let kind = match u32_at(bytes, 12) {
        0 => ImageKind::Quadrature,
        1 => ImageKind::Reconstruction,
        _ => return Err(err(12, "unknown image kind")),
    };
    let rows = u64_at(bytes, 16) as usize;
    let cols = u64_at(bytes, 24) as usize;
    let roi = Roi {
        row0: u64_at(bytes, 32) as usize,
        col0: u64_at(bytes, 40) as usize,
        rows: u64_at(bytes, 48) as usize,
        cols: u64_at(bytes, 56) as usize,
    };
    if roi.row0 + roi.rows > rows || roi.col0 + roi.cols > cols {
        return Err(err(32, "roi outside grid"));
    }
    let params = ChannelParams {
        eta: f64_at(bytes, 96),
        gain: f64_at(bytes, 104),
        n_b: f64_at(bytes, 112),
        n_s: f64_at(bytes, 120),
        kappa_bar: f64_at(bytes, 128),
    };
    if bytes[144..176] != params_digest(&params) {
        return Err(err(144, "params digest mismatch"));
    }
    let header = ImageHeader {
        kind,
        roi,
        seed: u64_at(bytes, 64),
        amplitude: f64_at(bytes, 72),
        pitch: f64_at(bytes, 80),
        w0: f64_at(bytes, 88),
        params,
        nsr: f64_at(bytes, 136),
    };
    let need = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| err(16, "grid size overflow"))?;
    let data = &bytes[HEADER_LEN..];
    if data.len() < need {
        return Err(err(bytes.len(), "truncated payload"));
    }
    let values = data[..need]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let grid = Array2::from_shape_vec((rows, cols), values).expect("length checked");
    Ok((header, grid))
}

pub fn encode_quadrature(img: &QuadratureImage) -> Vec<u8> {
    let header = ImageHeader {
        kind: ImageKind::Quadrature,
        roi: img.roi,
        seed: img.seed,
        amplitude: img.amplitude,
        pitch: img.pitch,
        w0: img.w0.unwrap_or(f64::NAN),
        params: img.params,
        nsr: f64::NAN,
    };
    encode(&header, &img.x_readout)
}

pub fn decode_quadrature(bytes: &[u8]) -> Result<QuadratureImage> {
    let (h, grid) = decode(bytes)?;
    if h.kind != ImageKind::Quadrature {
        return Err(Error::Parse {
            offset: 12,
            message: "not a quadrature image".into(),
        });
    }
    Ok(QuadratureImage {
        x_readout: grid,
        roi: h.roi,
        params: h.params,
        seed: h.seed,
        amplitude: h.amplitude,
        pitch: h.pitch,
        w0: (!h.w0.is_nan()).then_some(h.w0),
    })
}

/// Stores a reconstruction alongside the header of the image it came from.
pub fn encode_reconstruction(recon: &Reconstruction, source: &QuadratureImage) -> Vec<u8> {
    let (rows, cols) = recon.f_tilde.dim();
    let header = ImageHeader {
        kind: ImageKind::Reconstruction,
        roi: Roi {
            row0: 0,
            col0: 0,
            rows,
            cols,
        },
        seed: source.seed,
        amplitude: source.amplitude,
        pitch: source.pitch,
        w0: source.w0.unwrap_or(f64::NAN),
        params: source.params,
        nsr: recon.nsr_used,
    };
    encode(&header, &recon.f_tilde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn image(values: Vec<f64>, rows: usize, cols: usize, seed: u64) -> QuadratureImage {
        QuadratureImage {
            x_readout: Array2::from_shape_vec((rows, cols), values).unwrap(),
            roi: Roi {
                row0: 1,
                col0: 0,
                rows: rows - 1,
                cols,
            },
            params: ChannelParams::from_detected(1e-9, 10.0, 0.1, 100.0, 1e-10).unwrap(),
            seed,
            amplitude: 12.5,
            pitch: 0.5,
            w0: Some(1.0),
        }
    }

    proptest! {
        #[test]
        fn quadrature_roundtrip(v in proptest::collection::vec(-1e6f64..1e6, 12), seed: u64) {
            let img = image(v, 3, 4, seed);
            prop_assert_eq!(decode_quadrature(&encode_quadrature(&img)).unwrap(), img);
        }
    }

    #[test]
    fn corrupted_files_are_rejected() {
        let img = image(vec![0.0; 12], 3, 4, 1);
        let bytes = encode_quadrature(&img);
        assert_eq!(bytes.len(), HEADER_LEN + 96);
        assert!(matches!(
            decode(&bytes[..100]),
            Err(Error::Parse { offset: 100, .. })
        ));
        assert!(matches!(
            decode(&bytes[..HEADER_LEN + 8]),
            Err(Error::Parse { .. })
        ));
        let mut tampered = bytes.clone();
        tampered[100] ^= 1;
        assert!(matches!(
            decode(&tampered),
            Err(Error::Parse { offset: 144, .. })
        ));
        let mut magic = bytes;
        magic[0] = b'X';
        assert!(matches!(decode(&magic), Err(Error::Parse { offset: 0, .. })));
    }
}
