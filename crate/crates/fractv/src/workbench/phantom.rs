//! The built-in synthetic test image.
//!
//! A piecewise-constant disk and rectangle plus a smooth Gaussian bump: flat
//! regions and jumps exercise the mass term, the bump exercises the
//! higher-order behavior. Values stay in `[0, 1]` and the image is
//! boundary-reduced, so it can feed training directly.

use crate::error::Result;
use crate::image::{boundary_reduce_2d, Image};
use crate::workbench::noise::add_gaussian_noise;

/// Deterministic n x n phantom on the unit square, boundary-reduced.
pub fn make_phantom(n: usize) -> Result<Image> {
    let h = 1.0 / ((n - 1) as f64);
    let img = Image::from_fn(n, n, h, |ix, iy| {
        let x = ix as f64 * h;
        let y = iy as f64 * h;
        let mut v: f64 = 0.0;
        // disk of radius 0.22 centered at (0.34, 0.38)
        let (dx, dy) = (x - 0.34, y - 0.38);
        if dx * dx + dy * dy < 0.22 * 0.22 {
            v += 0.55;
        }
        // axis-aligned rectangle
        if (0.55..0.85).contains(&x) && (0.15..0.4).contains(&y) {
            v += 0.35;
        }
        // smooth bump near the lower-right
        let (bx, by) = (x - 0.68, y - 0.72);
        v += 0.4 * (-(bx * bx + by * by) / 0.012).exp();
        v.min(1.0)
    })?;
    let (reduced, _) = boundary_reduce_2d(&img)?;
    Ok(reduced)
}

/// Clean/noisy phantom pair: Gaussian noise of deviation `sigma` is added to
/// the clean phantom and the result boundary-reduced again, so both images
/// have zero trace. Returns `(clean, noisy)`.
pub fn noisy_phantom(n: usize, sigma: f64, seed: u64) -> Result<(Image, Image)> {
    let clean = make_phantom(n)?;
    let noisy = add_gaussian_noise(&clean, sigma, seed)?;
    let (noisy, _) = boundary_reduce_2d(&noisy)?;
    Ok((clean, noisy))
}
