//! Scalar images and multi-channel fields on a uniform 2D grid.
//!
//! Pixels are stored row-major: `data[y * width + x]`. Axis 1 runs along x
//! (within a row), axis 2 along y (down a column). The grid spacing `h` is
//! shared by both axes, and axis sweeps use the same zero-extension
//! convention as the 1D operators.

use crate::error::{invalid, shape, Result};
use crate::frac1d::{AffineTrace, Signal1D};

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    h: f64,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, h: f64, data: Vec<f64>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(invalid(format!(
                "image must be at least 2x2, got {width}x{height}"
            )));
        }
        if !h.is_finite() || h <= 0.0 {
            return Err(invalid(format!("pixel spacing must be positive, got {h}")));
        }
        if data.len() != width * height {
            return Err(shape(format!(
                "image data length {} != {width}*{height}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("image contains non-finite sample {bad}")));
        }
        Ok(Image { width, height, h, data })
    }

    pub fn zeros(width: usize, height: usize, h: f64) -> Result<Self> {
        Image::new(width, height, h, vec![0.0; width * height])
    }

    /// Square image on the unit square: n x n samples, h = 1/(n-1).
    pub fn on_unit_square(n: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(invalid("unit-square image needs n >= 2"));
        }
        Image::new(n, n, 1.0 / (n - 1) as f64, data)
    }

    pub fn from_fn(width: usize, height: usize, h: f64, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image::new(width, height, h, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.h == other.h
    }

    /// Discrete squared L2 distance h^2 * sum (u - v)^2.
    pub fn l2_sq_distance(&self, other: &Image) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(shape("l2 distance requires images of identical shape"));
        }
        let sum: f64 = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(self.h * self.h * sum)
    }

    /// True if every boundary pixel is within `tol` of zero.
    pub fn boundary_is_zero(&self, tol: f64) -> bool {
        let (w, hgt) = (self.width, self.height);
        for x in 0..w {
            if self.get(x, 0).abs() > tol || self.get(x, hgt - 1).abs() > tol {
                return false;
            }
        }
        for y in 0..hgt {
            if self.get(0, y).abs() > tol || self.get(w - 1, y).abs() > tol {
                return false;
            }
        }
        true
    }
}

/// A field of `channels()` planes over the same grid as an [`Image`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    width: usize,
    height: usize,
    h: f64,
    planes: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(width: usize, height: usize, h: f64, planes: Vec<Vec<f64>>) -> Result<Self> {
        if planes.is_empty() {
            return Err(invalid("vector field needs at least one channel"));
        }
        for (c, p) in planes.iter().enumerate() {
            if p.len() != width * height {
                return Err(shape(format!(
                    "channel {c} has length {} != {width}*{height}",
                    p.len()
                )));
            }
        }
        if width < 2 || height < 2 || !h.is_finite() || h <= 0.0 {
            return Err(invalid("vector field requires a valid >= 2x2 grid"));
        }
        Ok(VectorField { width, height, h, planes })
    }

    pub fn zeros(width: usize, height: usize, h: f64, channels: usize) -> Result<Self> {
        VectorField::new(width, height, h, vec![vec![0.0; width * height]; channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        &self.planes[c]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.planes[c]
    }

    pub fn planes(&self) -> &[Vec<f64>] {
        &self.planes
    }

    /// Extract one channel as an image.
    pub fn channel_image(&self, c: usize) -> Result<Image> {
        Image::new(self.width, self.height, self.h, self.planes[c].clone())
    }

    /// a*x + this, channelwise.
    pub fn axpy(&mut self, a: f64, x: &VectorField) -> Result<()> {
        if self.width != x.width || self.height != x.height || self.channels() != x.channels() {
            return Err(shape("axpy requires identically shaped fields"));
        }
        for (mine, theirs) in self.planes.iter_mut().zip(x.planes.iter()) {
            for (m, t) in mine.iter_mut().zip(theirs.iter()) {
                *m += a * t;
            }
        }
        Ok(())
    }
}

/// Traces recorded by [`boundary_reduce_2d`]: one affine trace per row from
/// the row pass, then one per column from the column pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace2D {
    pub rows: Vec<AffineTrace>,
    pub cols: Vec<AffineTrace>,
}

/// Separable 2D boundary reduction: reduce every row, then every column of
/// the result. All boundary pixels of the output are exactly zero.
pub fn boundary_reduce_2d(u: &Image) -> Result<(Image, Trace2D)> {
    let (w, hgt, h) = (u.width, u.height, u.h);
    let mut out = u.clone();
    let mut rows = Vec::with_capacity(hgt);
    for y in 0..hgt {
        let row: Vec<f64> = (0..w).map(|x| out.get(x, y)).collect();
        let (reduced, trace) = crate::frac1d::boundary_reduce(&Signal1D::new(row, h)?)?;
        for (x, v) in reduced.samples().iter().enumerate() {
            out.set(x, y, *v);
        }
        rows.push(trace);
    }
    let mut cols = Vec::with_capacity(w);
    for x in 0..w {
        let col: Vec<f64> = (0..hgt).map(|y| out.get(x, y)).collect();
        let (reduced, trace) = crate::frac1d::boundary_reduce(&Signal1D::new(col, h)?)?;
        for (y, v) in reduced.samples().iter().enumerate() {
            out.set(x, y, *v);
        }
        cols.push(trace);
    }
    Ok((out, Trace2D { rows, cols }))
}

/// Undo [`boundary_reduce_2d`]: restore columns, then rows.
pub fn boundary_restore_2d(u: &Image, trace: &Trace2D) -> Result<Image> {
    let (w, hgt, h) = (u.width, u.height, u.h);
    if trace.rows.len() != hgt || trace.cols.len() != w {
        return Err(shape(format!(
            "trace shape ({} rows, {} cols) does not match a {w}x{hgt} image",
            trace.rows.len(),
            trace.cols.len()
        )));
    }
    let mut out = u.clone();
    for x in 0..w {
        let col: Vec<f64> = (0..hgt).map(|y| out.get(x, y)).collect();
        let restored =
            crate::frac1d::boundary_restore(&Signal1D::new(col, h)?, &trace.cols[x])?;
        for (y, v) in restored.samples().iter().enumerate() {
            out.set(x, y, *v);
        }
    }
    for y in 0..hgt {
        let row: Vec<f64> = (0..w).map(|x| out.get(x, y)).collect();
        let restored =
            crate::frac1d::boundary_restore(&Signal1D::new(row, h)?, &trace.rows[y])?;
        for (x, v) in restored.samples().iter().enumerate() {
            out.set(x, y, *v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_2d_zeroes_full_boundary() {
        let u = Image::from_fn(6, 5, 0.2, |x, y| (x as f64 * 1.3).sin() + (y as f64 * 0.7).cos())
            .unwrap();
        let (reduced, _) = boundary_reduce_2d(&u).unwrap();
        assert!(reduced.boundary_is_zero(0.0), "boundary pixels must be exactly zero");
    }

    #[test]
    fn reduce_restore_round_trip() {
        let u = Image::from_fn(7, 7, 1.0 / 6.0, |x, y| {
            0.25 * x as f64 + 0.5 * y as f64 + if (x + y) % 2 == 0 { 0.125 } else { 0.75 }
        })
        .unwrap();
        let (reduced, trace) = boundary_reduce_2d(&u).unwrap();
        let restored = boundary_restore_2d(&reduced, &trace).unwrap();
        for (a, b) in restored.data().iter().zip(u.data()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
        // Corner samples restore exactly.
        assert_eq!(restored.get(0, 0), u.get(0, 0));
        assert_eq!(restored.get(6, 6), u.get(6, 6));
    }

    #[test]
    fn image_validation() {
        assert!(Image::new(1, 4, 1.0, vec![0.0; 4]).is_err());
        assert!(Image::new(2, 2, 0.0, vec![0.0; 4]).is_err());
        assert!(Image::new(2, 2, 1.0, vec![0.0; 3]).is_err());
        assert!(Image::new(2, 2, 1.0, vec![f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn l2_distance_is_h_weighted() {
        let a = Image::new(2, 2, 0.5, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let b = Image::zeros(2, 2, 0.5).unwrap();
        assert!((a.l2_sq_distance(&b).unwrap() - 0.25).abs() < 1e-15);
    }
}
