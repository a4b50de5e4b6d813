//! Runtime invariant suite behind the `selftest` subcommand.
//!
//! Each check re-verifies a core contract on freshly generated data: operator
//! adjoints, weight recurrences, projection properties, regularizer
//! identities, solver sanity, and the I/O round trips. The suite is the
//! installation smoke test — it must pass on a pristine build and catches
//! miscompiles or platform drift, not logic regressions (the unit tests own
//! those).

use crate::bilevel::{grid_search, Axis, TrainingGround, TrainingPair};
use crate::error::{FractvError, Result};
use crate::frac1d::{frac_deriv, gl_weights, FracOrder, Side, Signal1D};
use crate::image::Image;
use crate::lp::{lp_norm, mixed_mass, project_ball, LpExponent};
use crate::ops2d::{frac_grad, FracGradOp, LinearOp};
use crate::reg::{rvl_at, tv_r_lp, RvlSpec};
use crate::rng::SplitMix64;
use crate::solver::{oracle_solve, solve_tv_denoise, SolverOptions};
use crate::workbench::noise::add_gaussian_noise;
use crate::workbench::pgm::{read_pgm_bytes, write_pgm_bytes};
use crate::workbench::phantom::noisy_phantom;

fn fail(msg: impl Into<String>) -> FractvError {
    FractvError::Internal(msg.into())
}

fn random_image(n: usize, rng: &mut SplitMix64) -> Image {
    let data: Vec<f64> = (0..n * n).map(|_| rng.next_f64()).collect();
    Image::on_unit_square(n, data).expect("valid image")
}

fn check_gl_weight_recurrence() -> Result<()> {
    let w = gl_weights(1.0, 6)?;
    if w != vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0] {
        return Err(fail(format!("first-difference weights wrong: {w:?}")));
    }
    let w2 = gl_weights(2.0, 6)?;
    if w2 != vec![1.0, -2.0, 1.0, 0.0, 0.0, 0.0] {
        return Err(fail(format!("second-difference weights wrong: {w2:?}")));
    }
    Ok(())
}

fn check_semigroup() -> Result<()> {
    let mut rng = SplitMix64::new(101);
    let n = 48;
    let sig = Signal1D::new((0..n).map(|_| rng.next_f64()).collect(), 1.0 / (n as f64 - 1.0))?;
    let once = frac_deriv(&frac_deriv(&sig, FracOrder::new(0.7)?, Side::Left)?, FracOrder::new(0.8)?, Side::Left)?;
    let direct = frac_deriv(&sig, FracOrder::new(1.5)?, Side::Left)?;
    for (a, b) in once.samples().iter().zip(direct.samples()) {
        let scale = 1.0 + a.abs().max(b.abs());
        if (a - b).abs() / scale > 1e-10 {
            return Err(fail(format!("semigroup defect {} vs {}", a, b)));
        }
    }
    Ok(())
}

fn check_adjoint() -> Result<()> {
    let mut rng = SplitMix64::new(202);
    for r in [0.5, 1.0, 1.5] {
        let op = FracGradOp::new(12, 12, 1.0 / 11.0, FracOrder::new(r)?)?;
        let x: Vec<f64> = (0..op.domain_len()).map(|_| rng.next_f64() - 0.5).collect();
        let y: Vec<f64> = (0..op.range_len()).map(|_| rng.next_f64() - 0.5).collect();
        let mut kx = vec![0.0; op.range_len()];
        let mut kty = vec![0.0; op.domain_len()];
        op.forward(&x, &mut kx);
        op.adjoint(&y, &mut kty);
        let lhs: f64 = kx.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&kty).map(|(a, b)| a * b).sum();
        let scale = 1.0 + lhs.abs().max(rhs.abs());
        if (lhs - rhs).abs() / scale > 1e-10 {
            return Err(fail(format!("adjoint defect at r = {r}: {lhs} vs {rhs}")));
        }
    }
    Ok(())
}

fn check_projection() -> Result<()> {
    let mut rng = SplitMix64::new(303);
    let exponents =
        [LpExponent::new(1.0)?, LpExponent::new(1.5)?, LpExponent::new(2.0)?, LpExponent::infinity()];
    for p in exponents {
        for _ in 0..8 {
            let x: Vec<f64> = (0..6).map(|_| 4.0 * (rng.next_f64() - 0.5)).collect();
            let y: Vec<f64> = (0..6).map(|_| 4.0 * (rng.next_f64() - 0.5)).collect();
            let px = project_ball(&x, p, 1.0)?;
            let ppx = project_ball(&px, p, 1.0)?;
            for (a, b) in px.iter().zip(&ppx) {
                if (a - b).abs() > 1e-10 {
                    return Err(fail("projection is not idempotent".to_string()));
                }
            }
            let py = project_ball(&y, p, 1.0)?;
            let d_in: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            let d_out: f64 = px.iter().zip(&py).map(|(a, b)| (a - b) * (a - b)).sum();
            if d_out > d_in + 1e-10 {
                return Err(fail("projection is expansive".to_string()));
            }
        }
    }
    Ok(())
}

fn check_regularizer_identities() -> Result<()> {
    let mut rng = SplitMix64::new(404);
    let u = random_image(10, &mut rng);
    let p2 = LpExponent::new(2.0)?;
    let p1 = LpExponent::new(1.0)?;
    let pinf = LpExponent::infinity();
    let r = FracOrder::new(1.3)?;
    // mass sandwich between the extreme exponents
    let g = frac_grad(&u, r)?;
    let (mi, m2, m1) = (mixed_mass(&g, pinf), mixed_mass(&g, p2), mixed_mass(&g, p1));
    if !(mi <= m2 + 1e-12 && m2 <= m1 + 1e-12) {
        return Err(fail(format!("mass sandwich violated: {mi} vs {m2} vs {m1}")));
    }
    // the unified functional collapses to the weighted mass on a zero chain
    let spec = RvlSpec::new(r, FracOrder::new(1.5)?, vec![0.21, 0.05], vec![p2, p2], 1e-3)?;
    let zero_chain = crate::image::VectorField::zeros(u.width(), u.height(), u.h(), 2)?;
    let collapsed = rvl_at(&u, &[zero_chain], &spec)?;
    let direct = 0.21 * tv_r_lp(&u, r, p2)?;
    if (collapsed - direct).abs() > 1e-12 * (1.0 + direct.abs()) {
        return Err(fail(format!("zero-chain identity violated: {collapsed} vs {direct}")));
    }
    if lp_norm(&[0.0; 4], p1) != 0.0 {
        return Err(fail("norm of zero is not zero".to_string()));
    }
    Ok(())
}

fn check_solver_sanity() -> Result<()> {
    let zero = Image::on_unit_square(8, vec![0.0; 64])?;
    let opts = SolverOptions { max_iters: 200, tol: 1e-8, ..SolverOptions::default() };
    let (u, _) = solve_tv_denoise(&zero, FracOrder::new(1.5)?, 0.1, LpExponent::new(2.0)?, 1e-3, &opts)?;
    if u.data().iter().any(|v| v.abs() > 1e-12) {
        return Err(fail("zero data must give the zero solution".to_string()));
    }
    // agreement with the small dense reference solver
    let (clean, noisy) = noisy_phantom(6, 0.15, 17)?;
    let _ = clean;
    let (r, alpha, p, kappa) = (FracOrder::new(1.0)?, 0.08, LpExponent::new(2.0)?, 1e-3);
    let opts = SolverOptions { max_iters: 20_000, tol: 1e-7, ..SolverOptions::default() };
    let (u_pd, _) = solve_tv_denoise(&noisy, r, alpha, p, kappa, &opts)?;
    let u_ref = oracle_solve(&noisy, r, alpha, p, kappa)?;
    let obj = |u: &Image| -> Result<f64> {
        Ok(u.l2_sq_distance(&noisy)?
            + alpha * tv_r_lp(u, r, p)?
            + kappa * crate::reg::huber(u, &crate::reg::HuberSpec::new(2, kappa)?)?)
    };
    let (a, b) = (obj(&u_pd)?, obj(&u_ref)?);
    let gap = (a - b).abs() / (1.0 + b.abs());
    if gap > 1e-3 {
        return Err(fail(format!("solver and reference objectives differ: {a} vs {b}")));
    }
    Ok(())
}

fn check_grid_determinism() -> Result<()> {
    let (clean, noisy) = noisy_phantom(8, 0.1, 23)?;
    let pair = TrainingPair::new(clean, noisy)?;
    let p2 = LpExponent::new(2.0)?;
    let ground = TrainingGround::new(
        Axis::point(1.25)?,
        Axis::point(1.0)?,
        vec![Axis::new(0.03125, 0.125, 2)?, Axis::point(0.0)?],
        vec![vec![p2], vec![p2]],
        1e-3,
    )?;
    let opts = SolverOptions { max_iters: 2000, tol: 1e-3, ..SolverOptions::default() };
    let (best_a, table_a) = grid_search(&pair, &ground, &opts)?;
    let (best_b, table_b) = grid_search(&pair, &ground, &opts)?;
    if best_a.assessment != best_b.assessment || table_a.len() != table_b.len() {
        return Err(fail("grid search is not deterministic".to_string()));
    }
    for (x, y) in table_a.iter().zip(&table_b) {
        if x.assessment != y.assessment {
            return Err(fail("grid table differs between identical runs".to_string()));
        }
    }
    Ok(())
}

fn check_io_round_trips() -> Result<()> {
    let (_, noisy) = noisy_phantom(12, 0.2, 29)?;
    for (maxval, binary) in [(255u16, false), (255, true), (65535, true)] {
        let bytes = write_pgm_bytes(&noisy, maxval, binary)?;
        let back = read_pgm_bytes(&bytes)?;
        let bound = 1.0 / (2.0 * f64::from(maxval)) + 1e-15;
        for (a, b) in noisy.data().iter().zip(back.data()) {
            if (a.clamp(0.0, 1.0) - b).abs() > bound {
                return Err(fail(format!("PGM round trip error {a} vs {b} at maxval {maxval}")));
            }
        }
    }
    let img = Image::on_unit_square(8, vec![0.5; 64])?;
    let n1 = add_gaussian_noise(&img, 0.1, 77)?;
    let n2 = add_gaussian_noise(&img, 0.1, 77)?;
    if n1.data() != n2.data() {
        return Err(fail("noise synthesis is not seed-deterministic".to_string()));
    }
    Ok(())
}

/// Run every check, printing one line per check. Returns process exit code
/// 0 on success and 3 (internal invariant failure) if anything failed.
pub fn run_selftest() -> i32 {
    let checks: [(&str, fn() -> Result<()>); 8] = [
        ("gl-weight-recurrence", check_gl_weight_recurrence),
        ("derivative-semigroup", check_semigroup),
        ("operator-adjoints", check_adjoint),
        ("ball-projection", check_projection),
        ("regularizer-identities", check_regularizer_identities),
        ("solver-sanity", check_solver_sanity),
        ("grid-determinism", check_grid_determinism),
        ("io-round-trips", check_io_round_trips),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("ok      {name}"),
            Err(e) => {
                failures += 1;
                println!("FAILED  {name}: {e}");
            }
        }
    }
    if failures == 0 {
        println!("selftest: all {} checks passed", checks.len());
        0
    } else {
        println!("selftest: {failures} of {} checks failed", checks.len());
        3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes_on_a_pristine_build() {
        assert_eq!(run_selftest(), 0);
    }
}
