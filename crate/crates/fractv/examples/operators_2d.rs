//! Two-dimensional fractional operators as linear maps: gradient and
//! divergence, the adjoint identity that links them, and how the operator
//! norm grows with the differentiation order.
//!
//! Run with `cargo run --example operators_2d`.

use fractv::ops2d::FracGradOp;
use fractv::{frac_div, frac_grad, operator_norm, FracOrder, Image, Result};

fn main() -> Result<()> {
    let n = 24;
    let h = 1.0 / (n as f64 - 1.0);
    let img = Image::from_fn(n, n, h, |ix, iy| {
        let x = ix as f64 * h;
        let y = iy as f64 * h;
        (2.0 * std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin() * 0.5
    })?;

    println!("fractional gradient magnitudes on a {n}x{n} sinusoid:");
    for r in [0.5, 1.0, 1.5, 2.0] {
        let g = frac_grad(&img, FracOrder::new(r)?)?;
        let mass: f64 = g.planes().iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        println!("  r = {r:>3}: |grad u|_2 = {mass:>10.4}");
    }

    // grad and the scaled divergence are signed adjoints:
    // <grad u, phi> == -<u, div phi> / c(s), with the ceiling-split scale
    // c(s) = (s + 1) / 2 and s = r - ceil(r) + 1
    let r = 1.3;
    let order = FracOrder::new(r)?;
    let c = fractv::ops2d::divergence_scale(r - r.ceil() + 1.0);
    let g = frac_grad(&img, order)?;
    let div = frac_div(&g, order)?;
    let lhs: f64 = g.planes().iter().flatten().map(|v| v * v).sum();
    let rhs: f64 = img.data().iter().zip(div.data()).map(|(u, d)| -u * d).sum::<f64>() / c;
    println!("\nsigned adjoint identity <grad u, grad u> = -<u, div grad u> / c(s):");
    println!("  lhs = {lhs:.12e}");
    println!("  rhs = {rhs:.12e}");
    println!("  relative defect = {:.3e}", (lhs - rhs).abs() / lhs.abs());

    // Estimated operator norms: the discrete symbol scales like h^{-r}.
    println!("\noperator norm estimates (power iteration):");
    for r in [0.5, 1.0, 1.5, 2.0] {
        let op = FracGradOp::new(n, n, h, FracOrder::new(r)?)?;
        let nrm = operator_norm(&op, 60, 7);
        println!("  r = {r:>3}: |K| ~ {nrm:>12.2}  (h^-r = {:>12.2})", h.powf(-r));
    }
    Ok(())
}
