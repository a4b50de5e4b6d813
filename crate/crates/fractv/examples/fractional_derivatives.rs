//! One-dimensional fractional derivatives from the ground up: weight
//! sequences, left/right derivatives, the semigroup property, and the
//! integral as a left inverse.
//!
//! Run with `cargo run --example fractional_derivatives`.

use fractv::{frac_deriv, frac_integral, gl_weights, FracOrder, Result, Side, Signal1D};

fn main() -> Result<()> {
    // Weight sequences: integer orders terminate exactly, fractional orders
    // decay with a heavy tail.
    println!("Grunwald-Letnikov weights w_j (first 8):");
    for r in [0.5, 1.0, 1.5, 2.0] {
        let w = gl_weights(r, 8)?;
        let cells: Vec<String> = w.iter().map(|v| format!("{v:+.4}")).collect();
        println!("  r = {r:>3}: {}", cells.join("  "));
    }

    // A smooth bump sampled on [0, 1].
    let n = 33;
    let h = 1.0 / (n as f64 - 1.0);
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 * h;
            (std::f64::consts::PI * x).sin().powi(2)
        })
        .collect();
    let sig = Signal1D::new(samples, h)?;

    println!("\nmax |D^r u| as the order sweeps from 0.25 to 2:");
    for r in [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0] {
        let left = frac_deriv(&sig, FracOrder::new(r)?, Side::Left)?;
        let right = frac_deriv(&sig, FracOrder::new(r)?, Side::Right)?;
        let amax = |s: &Signal1D| s.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("  r = {r:>4}: left {:>9.4}, right {:>9.4}", amax(&left), amax(&right));
    }

    // Semigroup: D^0.7 after D^0.8 equals D^1.5 on zero-extended signals.
    let d15 = frac_deriv(&sig, FracOrder::new(1.5)?, Side::Left)?;
    let chained = frac_deriv(&frac_deriv(&sig, FracOrder::new(0.8)?, Side::Left)?, FracOrder::new(0.7)?, Side::Left)?;
    let defect = d15
        .samples()
        .iter()
        .zip(chained.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("\nsemigroup defect |D^0.7 D^0.8 - D^1.5|_inf = {defect:.3e}");

    // The fractional integral undoes the derivative of the same order.
    let d05 = frac_deriv(&sig, FracOrder::new(0.5)?, Side::Left)?;
    let back = frac_integral(&d05, 0.5, Side::Left)?;
    let inv_defect = sig
        .samples()
        .iter()
        .zip(back.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("inversion defect |I^0.5 D^0.5 u - u|_inf = {inv_defect:.3e}");
    Ok(())
}
