//! Export an assessment landscape: a dense slice of the upper-level
//! objective over (alpha0, r1) with everything else frozen, written as CSV
//! for external contour plotting.
//!
//! Run with `cargo run --release --example landscape_export`.

use fractv::workbench::csvout::table_to_csv;
use fractv::{
    landscape, noisy_phantom, Axis, LpExponent, Result, SolverOptions, TrainingGround,
    TrainingPair,
};

fn main() -> Result<()> {
    let (clean, noisy) = noisy_phantom(16, 0.1, 13)?;
    let pair = TrainingPair::new(clean, noisy)?;
    let p1 = LpExponent::new(1.0)?;

    let ground = TrainingGround::new(
        Axis::new(1.0, 1.75, 8)?,
        Axis::point(1.0)?,
        vec![Axis::new(0.0, 0.013671875, 8)?, Axis::point(0.0)?],
        vec![vec![p1], vec![p1]],
        1e-7,
    )?;
    let opts = SolverOptions { max_iters: 60_000, tol: 1e-3, ..SolverOptions::default() };

    let scape = landscape(&pair, &ground, &opts)?;
    println!(
        "{} x {} landscape over ({}, {})",
        scape.rows,
        scape.cols,
        scape.row_label.as_deref().unwrap_or("-"),
        scape.col_label.as_deref().unwrap_or("-"),
    );

    // coarse ASCII rendering: darker = lower assessment = better
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for rec in &scape.records {
        lo = lo.min(rec.assessment);
        hi = hi.max(rec.assessment);
    }
    let glyphs = [b'@', b'#', b'+', b'-', b'.', b' '];
    for i in 0..scape.rows {
        let mut line = String::new();
        for j in 0..scape.cols {
            let t = (scape.value(i, j) - lo) / (hi - lo + f64::MIN_POSITIVE);
            let g = glyphs[(t * (glyphs.len() - 1) as f64).round() as usize];
            line.push(g as char);
            line.push(g as char);
        }
        println!("  {line}");
    }
    println!("  assessment range [{lo:.6e}, {hi:.6e}]");

    let outdir = std::path::Path::new("target/example-output");
    std::fs::create_dir_all(outdir)?;
    let path = outdir.join("landscape.csv");
    std::fs::write(&path, table_to_csv(&ground.param_labels(), &scape.records))?;
    println!("landscape written to {}", path.display());
    Ok(())
}
