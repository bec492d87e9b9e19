//! Histogram of oriented gradients.
//!
//! Centered `[-1, 0, 1]` gradients with edge replication, unsigned
//! orientations with linear interpolation between neighbouring bins (bin `k`
//! is centred on `k·180°/bins`), per-cell histograms and overlapping blocks
//! normalized with L2-Hys.

use serde::{Deserialize, Serialize};

use super::image::{resize_to_canonical, GrayImage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HogParams {
    /// Cell side in pixels.
    pub cell_size: usize,
    /// Block side in cells.
    pub block_size: usize,
    /// Block stride in cells.
    pub block_stride: usize,
    pub orientation_bins: usize,
    pub clip: f64,
    /// Side of the square image the descriptor is computed on.
    pub canonical_size: usize,
}

impl Default for HogParams {
    fn default() -> Self {
        HogParams {
            cell_size: 8,
            block_size: 2,
            block_stride: 1,
            orientation_bins: 9,
            clip: 0.2,
            canonical_size: 64,
        }
    }
}

impl HogParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("HOG: {m}")));
        if self.cell_size == 0 || self.block_size == 0 || self.block_stride == 0 {
            return bad("cell size, block size and stride must be positive".into());
        }
        if self.orientation_bins < 2 {
            return bad("need at least two orientation bins".into());
        }
        if !(self.clip > 0.0 && self.clip.is_finite()) {
            return bad(format!("clip must be positive, got {}", self.clip));
        }
        if self.canonical_size == 0 || !self.canonical_size.is_multiple_of(self.cell_size) {
            return bad(format!(
                "canonical size {} is not divisible by cell size {}",
                self.canonical_size, self.cell_size
            ));
        }
        let cells = self.cells_per_side();
        if self.block_size > cells || !(cells - self.block_size).is_multiple_of(self.block_stride) {
            return bad(format!(
                "blocks of {} cells with stride {} do not tile {cells} cells",
                self.block_size, self.block_stride
            ));
        }
        Ok(())
    }

    pub fn cells_per_side(&self) -> usize {
        self.canonical_size / self.cell_size
    }

    pub fn blocks_per_side(&self) -> usize {
        (self.cells_per_side() - self.block_size) / self.block_stride + 1
    }

    pub fn block_len(&self) -> usize {
        self.block_size * self.block_size * self.orientation_bins
    }

    pub fn descriptor_len(&self) -> usize {
        self.blocks_per_side().pow(2) * self.block_len()
    }
}

/// Orientation histograms for every cell of the canonical image, row-major
/// over cells.
pub fn cell_histograms(img: &GrayImage, params: &HogParams) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    let side = params.canonical_size;
    let img = resize_to_canonical(img, side, side)?;
    let cells = params.cells_per_side();
    let bins = params.orientation_bins;
    let bin_width = 180.0 / bins as f64;
    let mut hist = vec![vec![0.0; bins]; cells * cells];

    for y in 0..side {
        for x in 0..side {
            let (xi, yi) = (x as isize, y as isize);
            let gx = img.get_clamped(xi + 1, yi) as f64 - img.get_clamped(xi - 1, yi) as f64;
            let gy = img.get_clamped(xi, yi + 1) as f64 - img.get_clamped(xi, yi - 1) as f64;
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let mut angle = gy.atan2(gx).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            if angle >= 180.0 {
                angle -= 180.0;
            }
            let pos = angle / bin_width;
            let lo = pos.floor();
            let frac = pos - lo;
            let lo = lo as usize % bins;
            let hi = (lo + 1) % bins;
            let cell = &mut hist[(y / params.cell_size) * cells + x / params.cell_size];
            cell[lo] += mag * (1.0 - frac);
            cell[hi] += mag * frac;
        }
    }
    Ok(hist)
}

pub fn extract_hog(img: &GrayImage, params: &HogParams) -> Result<Vec<f64>> {
    let hist = cell_histograms(img, params)?;
    let cells = params.cells_per_side();
    let blocks = params.blocks_per_side();
    let mut out = Vec::with_capacity(params.descriptor_len());
    let mut block = Vec::with_capacity(params.block_len());
    for by in 0..blocks {
        for bx in 0..blocks {
            block.clear();
            for cy in 0..params.block_size {
                for cx in 0..params.block_size {
                    let row = by * params.block_stride + cy;
                    let col = bx * params.block_stride + cx;
                    block.extend_from_slice(&hist[row * cells + col]);
                }
            }
            l2_hys(&mut block, params.clip);
            out.extend_from_slice(&block);
        }
    }
    Ok(out)
}

/// L2-normalize, clip, renormalize. All-zero blocks stay zero.
fn l2_hys(v: &mut [f64], clip: f64) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    for x in v.iter_mut() {
        *x = (*x / norm).min(clip);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}
