//! First-order primal-dual solver for the lower-level denoising problems.
//!
//! Both [`solve_tv_denoise`] and [`solve_rvl_denoise`] minimize
//!
//!   |u - u_eta|^2_{L^2}  +  R(u)  +  kappa H^{floor(r1)+1}(u)
//!
//! over zero-trace images u (and, for the RVL variant, jointly over the
//! auxiliary chain v). The common h^2 weight of all integrals is factored
//! out, leaving an unweighted finite-dimensional saddle problem
//!
//!   min_x f(x) + sum_i g_i(K_i x + b_i)
//!
//! with one dual block per regularizer term:
//!
//! * mass terms  w |K x|_{l^p-mixed}  keep their weight w in the dual
//!   constraint: the resolvent is a pointwise projection onto the
//!   l^{p*}-ball of radius w, so K itself stays independent of the
//!   (grid-searched) alpha weights;
//! * quadratic terms  w |K x|^2  fold sqrt(w) into the operator instead,
//!   so the stacked operator norm — and with it the step sizes — reflects
//!   the actual objective scale of the smoothing term.
//!
//! f collects the data term and the zero-trace indicator; its resolvent is
//! a pointwise affine map followed by clamping the boundary ring to zero.
//! Steps are tau = sigma = step_safety / |K| with |K| estimated by seeded
//! power iteration, theta = 1, and the stopping test is the scaled
//! primal-dual fixed-point residual checked every ten iterations. Identical
//! inputs and seed give bit-identical iterates.

use crate::error::{invalid, Result};
use crate::frac1d::FracOrder;
use crate::image::{Image, VectorField};
use crate::lp::{project_ball_mut, LpExponent};
use crate::ops2d::{
    divergence_scale, operator_norm, FracGradOp, GradPowerOp, LinearOp, StackGradOp,
};
use crate::reg::{huber, rvl_at, tv_r_lp, HuberSpec, RvlSpec};

/// Knobs of the primal-dual iteration.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Iteration cap. Default 5000.
    pub max_iters: usize,
    /// Combined primal-dual residual target. Default 1e-6.
    pub tol: f64,
    /// Over-relaxation parameter in [0, 1]. Default 1.
    pub theta: f64,
    /// Seed of the power iteration estimating the operator norm.
    pub seed: u64,
    /// Step sizes are step_safety / |K|; must lie in (0, 1). Default 0.95.
    pub step_safety: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iters: 5000, tol: 1e-6, theta: 1.0, seed: 0, step_safety: 0.95 }
    }
}

impl SolverOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be >= 1"));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(invalid(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if !(self.step_safety > 0.0 && self.step_safety < 1.0) {
            return Err(invalid(format!(
                "step_safety must lie in (0, 1), got {}",
                self.step_safety
            )));
        }
        Ok(())
    }
}

/// Outcome of one solve. `objective` and `regularizer_value` are the
/// h^2-weighted values of the full objective and of the regularizer term
/// alone (alpha-weighted TV, or the RVL chain value at the returned
/// fields) at the returned iterate. `converged` implies
/// max(primal_residual, dual_residual) <= tol.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub regularizer_value: f64,
    pub converged: bool,
}

// ---------------------------------------------------------------------------
// Stacked problem machinery
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct Segment {
    offset: usize,
    len: usize,
    channels: usize,
}

enum DualKind {
    /// g(w) = sum over pointwise channel groups of radius * |w_group|_p;
    /// resolvent projects each group onto the l^{p_dual} ball.
    Ball { p_dual: LpExponent, radius: f64, group: usize },
    /// g(w) = |w|^2 (weights folded into the operator); resolvent scales.
    Quad,
}

struct Block {
    kind: DualKind,
    /// Linear part applied to one primal segment, scaled by `op_scale`.
    op: Option<(usize, Box<dyn LinearOp>)>,
    op_scale: f64,
    /// Identity coupling: + coeff * (another segment), same length as the
    /// block range.
    couple: Option<(usize, f64)>,
    /// Constant affine part b (frozen-u mode).
    offset: Option<Vec<f64>>,
    y_off: usize,
    y_len: usize,
}

struct Stacked {
    width: usize,
    height: usize,
    segs: Vec<Segment>,
    blocks: Vec<Block>,
    x_len: usize,
    y_len: usize,
    /// Data-term target for segment 0 (absent in frozen-u mode).
    data_target: Option<Vec<f64>>,
}

impl Stacked {
    fn new(width: usize, height: usize) -> Self {
        Stacked {
            width,
            height,
            segs: Vec::new(),
            blocks: Vec::new(),
            x_len: 0,
            y_len: 0,
            data_target: None,
        }
    }

    fn add_segment(&mut self, channels: usize) -> usize {
        let n = self.width * self.height;
        let seg = Segment { offset: self.x_len, len: channels * n, channels };
        self.x_len += seg.len;
        self.segs.push(seg);
        self.segs.len() - 1
    }

    fn add_block(
        &mut self,
        kind: DualKind,
        op: Option<(usize, Box<dyn LinearOp>)>,
        op_scale: f64,
        couple: Option<(usize, f64)>,
        offset: Option<Vec<f64>>,
    ) {
        let y_len = match (&op, &couple, &offset) {
            (Some((_, o)), _, _) => o.range_len(),
            (None, Some((seg, _)), _) => self.segs[*seg].len,
            (None, None, Some(b)) => b.len(),
            _ => unreachable!("a block needs an operator, a coupling, or an offset"),
        };
        self.blocks.push(Block { kind, op, op_scale, couple, offset, y_off: self.y_len, y_len });
        self.y_len += y_len;
    }

    fn seg_slice<'a>(&self, x: &'a [f64], seg: usize) -> &'a [f64] {
        let s = self.segs[seg];
        &x[s.offset..s.offset + s.len]
    }

    /// y = K x (+ offsets when `with_offset`).
    fn apply_k(&self, x: &[f64], y: &mut [f64], with_offset: bool) {
        for b in &self.blocks {
            let ys = &mut y[b.y_off..b.y_off + b.y_len];
            if let Some((seg, op)) = &b.op {
                op.forward(self.seg_slice(x, *seg), ys);
                if b.op_scale != 1.0 {
                    for v in ys.iter_mut() {
                        *v *= b.op_scale;
                    }
                }
            } else {
                ys.fill(0.0);
            }
            if let Some((seg, coeff)) = b.couple {
                for (yv, xv) in ys.iter_mut().zip(self.seg_slice(x, seg)) {
                    *yv += coeff * xv;
                }
            }
            if with_offset {
                if let Some(off) = &b.offset {
                    for (yv, ov) in ys.iter_mut().zip(off) {
                        *yv += ov;
                    }
                }
            }
        }
    }

    /// x = K^T y. `tmp` must hold the largest segment.
    fn apply_kt(&self, y: &[f64], x: &mut [f64], tmp: &mut [f64]) {
        x.fill(0.0);
        for b in &self.blocks {
            let ys = &y[b.y_off..b.y_off + b.y_len];
            if let Some((seg, op)) = &b.op {
                let s = self.segs[*seg];
                let t = &mut tmp[..s.len];
                op.adjoint(ys, t);
                let xs = &mut x[s.offset..s.offset + s.len];
                for (xv, tv) in xs.iter_mut().zip(t.iter()) {
                    *xv += b.op_scale * tv;
                }
            }
            if let Some((seg, coeff)) = b.couple {
                let s = self.segs[seg];
                let xs = &mut x[s.offset..s.offset + s.len];
                for (xv, yv) in xs.iter_mut().zip(ys) {
                    *xv += coeff * yv;
                }
            }
        }
    }

    /// Resolvent of tau f: pointwise data-term shrinkage on segment 0 (when
    /// present), then the zero-trace clamp on every channel plane.
    fn prox_primal(&self, x: &mut [f64], tau: f64) {
        if let Some(target) = &self.data_target {
            let s = self.segs[0];
            let denom = 1.0 / (1.0 + 2.0 * tau);
            let xs = &mut x[s.offset..s.offset + s.len];
            for (xv, tv) in xs.iter_mut().zip(target) {
                *xv = (*xv + 2.0 * tau * tv) * denom;
            }
        }
        let n = self.width * self.height;
        for s in &self.segs {
            for c in 0..s.channels {
                let plane = &mut x[s.offset + c * n..s.offset + (c + 1) * n];
                clamp_boundary(plane, self.width, self.height);
            }
        }
    }

    /// Resolvent of sigma g*: per-block ball projections or quadratic
    /// shrinkage. `grp` must hold the largest projection group.
    fn prox_dual(&self, y: &mut [f64], sigma: f64, grp: &mut [f64]) {
        let n = self.width * self.height;
        for b in &self.blocks {
            let ys = &mut y[b.y_off..b.y_off + b.y_len];
            match &b.kind {
                DualKind::Quad => {
                    let f = 1.0 / (1.0 + 0.5 * sigma);
                    for v in ys.iter_mut() {
                        *v *= f;
                    }
                }
                DualKind::Ball { p_dual, radius, group } => match p_dual {
                    // p = 1 primal: the dual ball is a box; clamp directly.
                    LpExponent::Infinity => {
                        for v in ys.iter_mut() {
                            *v = v.clamp(-*radius, *radius);
                        }
                    }
                    // p = 2, groups of two: inline scaling, the hot path.
                    LpExponent::Finite(p) if *p == 2.0 && *group == 2 => {
                        let chans = b.y_len / n;
                        for pair in 0..chans / 2 {
                            let (head, tail) = ys[2 * pair * n..].split_at_mut(n);
                            for i in 0..n {
                                let (a, c) = (head[i], tail[i]);
                                let nrm = (a * a + c * c).sqrt();
                                if nrm > *radius {
                                    let s = *radius / nrm;
                                    head[i] = a * s;
                                    tail[i] = c * s;
                                }
                            }
                        }
                    }
                    _ => {
                        let chans = b.y_len / n;
                        let g = *group;
                        for q in 0..chans / g {
                            for i in 0..n {
                                for t in 0..g {
                                    grp[t] = ys[(q * g + t) * n + i];
                                }
                                project_ball_mut(&mut grp[..g], *p_dual, *radius);
                                for t in 0..g {
                                    ys[(q * g + t) * n + i] = grp[t];
                                }
                            }
                        }
                    }
                },
            }
        }
    }

    fn max_seg_len(&self) -> usize {
        self.segs.iter().map(|s| s.len).max().unwrap_or(0)
    }

    fn max_group(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match &b.kind {
                DualKind::Ball { group, .. } => *group,
                DualKind::Quad => 0,
            })
            .max()
            .unwrap_or(0)
    }
}

fn clamp_boundary(plane: &mut [f64], width: usize, height: usize) {
    for x in 0..width {
        plane[x] = 0.0;
        plane[(height - 1) * width + x] = 0.0;
    }
    for y in 0..height {
        plane[y * width] = 0.0;
        plane[y * width + width - 1] = 0.0;
    }
}

/// Linear view of the stacked operator for the power iteration (offsets
/// excluded: they do not contribute to the norm).
struct KView<'a>(&'a Stacked);

impl LinearOp for KView<'_> {
    fn domain_len(&self) -> usize {
        self.0.x_len
    }

    fn range_len(&self) -> usize {
        self.0.y_len
    }

    fn forward(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply_k(x, y, false);
    }

    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        let mut tmp = vec![0.0; self.0.max_seg_len()];
        self.0.apply_kt(y, x, &mut tmp);
    }

    fn descriptor(&self) -> crate::ops2d::OpDescriptor {
        crate::ops2d::OpDescriptor {
            label: "stacked".into(),
            order: 0.0,
            side: crate::frac1d::Side::Left,
            depth: self.0.blocks.len(),
        }
    }
}

struct RunStats {
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
    converged: bool,
}

/// The primal-dual loop. Returns the final primal vector and statistics.
fn run(st: &Stacked, opts: &SolverOptions) -> (Vec<f64>, RunStats) {
    let norm = operator_norm(&KView(st), 60, opts.seed);
    let step = if norm > 0.0 { opts.step_safety / norm } else { opts.step_safety };
    let (tau, sigma) = (step, step);

    let mut x = vec![0.0; st.x_len];
    let mut x_new = vec![0.0; st.x_len];
    let mut x_bar = vec![0.0; st.x_len];
    let mut y = vec![0.0; st.y_len];
    let mut y_new = vec![0.0; st.y_len];
    let mut buf_y = vec![0.0; st.y_len];
    let mut buf_x = vec![0.0; st.x_len];
    let mut tmp_seg = vec![0.0; st.max_seg_len()];
    let mut grp = vec![0.0; st.max_group()];
    let mut ktd = vec![0.0; st.x_len];
    let mut kd = vec![0.0; st.y_len];

    let mut stats = RunStats {
        iterations: opts.max_iters,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        converged: false,
    };

    for it in 1..=opts.max_iters {
        // Dual ascent: y_new = prox_{sigma g*}(y + sigma (K x_bar + b)).
        st.apply_k(&x_bar, &mut buf_y, true);
        for ((yn, yo), k) in y_new.iter_mut().zip(&y).zip(&buf_y) {
            *yn = yo + sigma * k;
        }
        st.prox_dual(&mut y_new, sigma, &mut grp);

        // Primal descent: x_new = prox_{tau f}(x - tau K^T y_new).
        st.apply_kt(&y_new, &mut buf_x, &mut tmp_seg);
        for ((xn, xo), k) in x_new.iter_mut().zip(&x).zip(&buf_x) {
            *xn = xo - tau * k;
        }
        st.prox_primal(&mut x_new, tau);

        // Relaxation: x_bar = x_new + theta (x_new - x).
        for ((xb, xn), xo) in x_bar.iter_mut().zip(&x_new).zip(&x) {
            *xb = xn + opts.theta * (xn - xo);
        }

        if it % 10 == 0 || it == opts.max_iters {
            // Fixed-point residuals (differences kill the affine offsets):
            //   P = (x - x_new)/tau   - K^T(y - y_new)
            //   D = (y - y_new)/sigma - K  (x - x_new)
            for ((d, a), b) in buf_x.iter_mut().zip(&x).zip(&x_new) {
                *d = a - b;
            }
            for ((d, a), b) in buf_y.iter_mut().zip(&y).zip(&y_new) {
                *d = a - b;
            }
            st.apply_kt(&buf_y, &mut ktd, &mut tmp_seg);
            st.apply_k(&buf_x, &mut kd, false);
            let mut p_sq = 0.0;
            for (d, k) in buf_x.iter().zip(&ktd) {
                let r = d / tau - k;
                p_sq += r * r;
            }
            let mut d_sq = 0.0;
            for (d, k) in buf_y.iter().zip(&kd) {
                let r = d / sigma - k;
                d_sq += r * r;
            }
            let xn_norm: f64 = x_new.iter().map(|v| v * v).sum::<f64>().sqrt();
            let yn_norm: f64 = y_new.iter().map(|v| v * v).sum::<f64>().sqrt();
            stats.primal_residual = p_sq.sqrt() / (1.0 + xn_norm);
            stats.dual_residual = d_sq.sqrt() / (1.0 + yn_norm);
            if stats.primal_residual.max(stats.dual_residual) <= opts.tol {
                stats.iterations = it;
                stats.converged = true;
                std::mem::swap(&mut x, &mut x_new);
                std::mem::swap(&mut y, &mut y_new);
                break;
            }
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut y, &mut y_new);
    }
    (x, stats)
}

// ---------------------------------------------------------------------------
// Problem builders
// ---------------------------------------------------------------------------

/// Flatten a vector field into stacked channel planes.
fn field_to_flat(f: &VectorField) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.channels() * f.width() * f.height());
    for plane in f.planes() {
        out.extend_from_slice(plane);
    }
    out
}

fn segment_to_field(st: &Stacked, x: &[f64], seg: usize, h: f64) -> Result<VectorField> {
    let s = st.segs[seg];
    let n = st.width * st.height;
    let planes = (0..s.channels).map(|c| x[s.offset + c * n..s.offset + (c + 1) * n].to_vec());
    VectorField::new(st.width, st.height, h, planes.collect())
}

/// Append the auxiliary-chain blocks shared by the joint and frozen-u
/// problems: the middle couplings |grad v_{j-1} - v_j|, the tail TV^s and
/// the tail Huber on v_{k-1}. `vseg(j)` maps chain index to segment index.
fn push_chain_blocks(
    st: &mut Stacked,
    spec: &RvlSpec,
    h: f64,
    vseg: &dyn Fn(usize) -> usize,
) -> Result<()> {
    let k = spec.k();
    let s2 = spec.s2();
    let one = FracOrder::new(1.0)?;
    for j in 1..k {
        let chans = spec.chain_channels(j - 1);
        let op = StackGradOp::new(st.width, st.height, h, one, chans)?;
        if spec.alpha()[j] > 0.0 {
            st.add_block(
                DualKind::Ball {
                    p_dual: spec.p()[j].dual(),
                    radius: spec.alpha()[j],
                    group: 2 * chans,
                },
                Some((vseg(j - 1), Box::new(op))),
                1.0,
                Some((vseg(j), -1.0)),
                None,
            );
        }
    }
    // Tail weight: alpha_1 * s for the k = 1 case, alpha_k for k >= 2.
    let tail_w = spec.alpha()[k] * if k == 1 { s2 } else { 1.0 };
    if tail_w > 0.0 {
        let chans = spec.chain_channels(k - 1);
        let s_order = FracOrder::new(s2)?;
        let tv_op = StackGradOp::new(st.width, st.height, h, s_order, chans)?;
        st.add_block(
            DualKind::Ball {
                p_dual: spec.p()[k].dual(),
                radius: tail_w * divergence_scale(s2),
                group: 2,
            },
            Some((vseg(k - 1), Box::new(tv_op))),
            1.0,
            None,
            None,
        );
        let hub_op = StackGradOp::new(st.width, st.height, h, one, chans)?;
        st.add_block(
            DualKind::Quad,
            Some((vseg(k - 1), Box::new(hub_op))),
            (tail_w * spec.kappa()).sqrt(),
            None,
            None,
        );
    }
    Ok(())
}

/// Solve  min_u |u - u_eta|^2 + alpha TV^r_{l^p}(u) + kappa H^{floor(r)+1}(u)
/// over zero-trace images. `u_eta` is expected boundary-reduced; if it is
/// not, the solve still returns the minimizer over the zero-trace subspace.
/// Non-convergence is reported through the flag, not an error.
pub fn solve_tv_denoise(
    u_eta: &Image,
    r: FracOrder,
    alpha: f64,
    p: LpExponent,
    kappa: f64,
    opts: &SolverOptions,
) -> Result<(Image, SolveReport)> {
    opts.validate()?;
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(invalid(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    let m = r.integer_part() + 1;
    let hspec = HuberSpec::new(m, kappa)?;
    let (w, ht, h) = (u_eta.width(), u_eta.height(), u_eta.h());

    let mut st = Stacked::new(w, ht);
    let useg = st.add_segment(1);
    st.data_target = Some(u_eta.data().to_vec());
    if alpha > 0.0 {
        let (_, s) = r.ceil_split();
        let op = FracGradOp::new(w, ht, h, r)?;
        st.add_block(
            DualKind::Ball {
                p_dual: p.dual(),
                radius: alpha * divergence_scale(s),
                group: 2,
            },
            Some((useg, Box::new(op))),
            1.0,
            None,
            None,
        );
    }
    let hub = GradPowerOp::new(w, ht, h, m)?;
    st.add_block(DualKind::Quad, Some((useg, Box::new(hub))), kappa.sqrt(), None, None);

    let (x, stats) = run(&st, opts);
    let u = Image::new(w, ht, h, x[..w * ht].to_vec())?;
    let reg_value = alpha * tv_r_lp(&u, r, p)?;
    let objective = u.l2_sq_distance(u_eta)? + reg_value + kappa * huber(&u, &hspec)?;
    Ok((
        u,
        SolveReport {
            iterations: stats.iterations,
            primal_residual: stats.primal_residual,
            dual_residual: stats.dual_residual,
            objective,
            regularizer_value: reg_value,
            converged: stats.converged,
        },
    ))
}

/// Solve the joint lower-level problem
/// min_{u, v} |u - u_eta|^2 + RVL-chain(u, v) + kappa H^{floor(r1)+1}(u)
/// over zero-trace u and chain fields. Integer r2 collapses the chain (the
/// regularizer degenerates to alpha_0 TV^{r1}); the returned chain is then
/// zero.
pub fn solve_rvl_denoise(
    u_eta: &Image,
    spec: &RvlSpec,
    opts: &SolverOptions,
) -> Result<(Image, Vec<VectorField>, SolveReport)> {
    opts.validate()?;
    if spec.s2() == 0.0 {
        let (u, report) =
            solve_tv_denoise(u_eta, spec.r1(), spec.alpha()[0], spec.p()[0], spec.kappa(), opts)?;
        let v = spec.zero_chain(&u);
        return Ok((u, v, report));
    }

    let (w, ht, h) = (u_eta.width(), u_eta.height(), u_eta.h());
    let k = spec.k();
    let s2 = spec.s2();
    let m1 = spec.r1().integer_part() + 1;
    let hspec = HuberSpec::new(m1, spec.kappa())?;

    let mut st = Stacked::new(w, ht);
    let useg = st.add_segment(1);
    let vsegs: Vec<usize> = (0..k).map(|j| st.add_segment(spec.chain_channels(j))).collect();
    st.data_target = Some(u_eta.data().to_vec());

    // Coupling |grad^{r1} u - (s or 1) v_0|, with the same measure scaling
    // as tv_r_lp at order r1.
    if spec.alpha()[0] > 0.0 {
        let (_, s1) = spec.r1().ceil_split();
        let op = FracGradOp::new(w, ht, h, spec.r1())?;
        st.add_block(
            DualKind::Ball {
                p_dual: spec.p()[0].dual(),
                radius: spec.alpha()[0] * divergence_scale(s1),
                group: 2,
            },
            Some((useg, Box::new(op))),
            1.0,
            Some((vsegs[0], if k == 1 { -s2 } else { -1.0 })),
            None,
        );
    }
    push_chain_blocks(&mut st, spec, h, &|j| vsegs[j])?;
    let hub = GradPowerOp::new(w, ht, h, m1)?;
    st.add_block(DualKind::Quad, Some((useg, Box::new(hub))), spec.kappa().sqrt(), None, None);

    let (x, stats) = run(&st, opts);
    let u = Image::new(w, ht, h, x[..w * ht].to_vec())?;
    let v: Vec<VectorField> = (0..k)
        .map(|j| segment_to_field(&st, &x, vsegs[j], h))
        .collect::<Result<_>>()?;
    let reg_value = rvl_at(&u, &v, spec)?;
    let objective = u.l2_sq_distance(u_eta)? + reg_value + spec.kappa() * huber(&u, &hspec)?;
    Ok((
        u,
        v,
        SolveReport {
            iterations: stats.iterations,
            primal_residual: stats.primal_residual,
            dual_residual: stats.dual_residual,
            objective,
            regularizer_value: reg_value,
            converged: stats.converged,
        },
    ))
}

/// Minimize the RVL chain objective over the auxiliary fields with u held
/// fixed (the numerical realization of the infimal convolution). Called
/// through `reg::rvl_infimum`.
pub(crate) fn rvl_infimum_impl(
    u: &Image,
    spec: &RvlSpec,
    opts: &SolverOptions,
) -> Result<(f64, Vec<VectorField>, SolveReport)> {
    opts.validate()?;
    if spec.s2() == 0.0 {
        let value = spec.alpha()[0] * tv_r_lp(u, spec.r1(), spec.p()[0])?;
        let v = spec.zero_chain(u);
        return Ok((
            value,
            v,
            SolveReport {
                iterations: 0,
                primal_residual: 0.0,
                dual_residual: 0.0,
                objective: value,
                regularizer_value: value,
                converged: true,
            },
        ));
    }

    let (w, ht, h) = (u.width(), u.height(), u.h());
    let k = spec.k();
    let s2 = spec.s2();

    let mut st = Stacked::new(w, ht);
    let vsegs: Vec<usize> = (0..k).map(|j| st.add_segment(spec.chain_channels(j))).collect();

    // Frozen coupling: grad^{r1} u enters as a constant offset.
    if spec.alpha()[0] > 0.0 {
        let (_, s1) = spec.r1().ceil_split();
        let g1 = crate::ops2d::frac_grad(u, spec.r1())?;
        st.add_block(
            DualKind::Ball {
                p_dual: spec.p()[0].dual(),
                radius: spec.alpha()[0] * divergence_scale(s1),
                group: 2,
            },
            None,
            1.0,
            Some((vsegs[0], if k == 1 { -s2 } else { -1.0 })),
            Some(field_to_flat(&g1)),
        );
    }
    push_chain_blocks(&mut st, spec, h, &|j| vsegs[j])?;

    let (x, stats) = run(&st, opts);
    let v: Vec<VectorField> = (0..k)
        .map(|j| segment_to_field(&st, &x, vsegs[j], h))
        .collect::<Result<_>>()?;
    let value = rvl_at(u, &v, spec)?;
    Ok((
        value,
        v,
        SolveReport {
            iterations: stats.iterations,
            primal_residual: stats.primal_residual,
            dual_residual: stats.dual_residual,
            objective: value,
            regularizer_value: value,
            converged: stats.converged,
        },
    ))
}

// ---------------------------------------------------------------------------
// Small-instance verification oracle
// ---------------------------------------------------------------------------

/// The epsilon-smoothed surrogate objective of the TV-denoise problem and
/// its gradient on the zero-trace subspace (boundary components masked).
struct Surrogate<'a> {
    grad_op: &'a FracGradOp,
    hub_op: &'a GradPowerOp,
    a: f64,
    pv: f64,
    eps: f64,
    kappa: f64,
    target: &'a [f64],
    is_interior: &'a [bool],
    n: usize,
}

impl Surrogate<'_> {
    fn eval(&self, z: &[f64], grad: Option<&mut Vec<f64>>) -> f64 {
        let n = self.n;
        let (a, pv, eps) = (self.a, self.pv, self.eps);
        let mut g_buf = vec![0.0; self.grad_op.range_len()];
        let mut h_buf = vec![0.0; self.hub_op.range_len()];
        let mut rho_grad = vec![0.0; self.grad_op.range_len()];
        self.grad_op.forward(z, &mut g_buf);
        self.hub_op.forward(z, &mut h_buf);
        let mut f = 0.0;
        for (zi, ti) in z.iter().zip(self.target) {
            f += (zi - ti) * (zi - ti);
        }
        if a > 0.0 {
            for i in 0..n {
                let (gx, gy) = (g_buf[i], g_buf[n + i]);
                let s_val = (gx * gx + eps * eps).powf(0.5 * pv)
                    + (gy * gy + eps * eps).powf(0.5 * pv);
                f += a * s_val.powf(1.0 / pv);
                if grad.is_some() {
                    let outer = s_val.powf(1.0 / pv - 1.0);
                    rho_grad[i] = outer * (gx * gx + eps * eps).powf(0.5 * pv - 1.0) * gx;
                    rho_grad[n + i] = outer * (gy * gy + eps * eps).powf(0.5 * pv - 1.0) * gy;
                }
            }
        }
        let mut quad = 0.0;
        for v in &h_buf {
            quad += v * v;
        }
        f += self.kappa * quad;
        if let Some(g_out) = grad {
            let mut back = vec![0.0; n];
            g_out.fill(0.0);
            for ((gi, zi), ti) in g_out.iter_mut().zip(z).zip(self.target) {
                *gi = 2.0 * (zi - ti);
            }
            if a > 0.0 {
                self.grad_op.adjoint(&rho_grad, &mut back);
                for (gi, bi) in g_out.iter_mut().zip(&back) {
                    *gi += a * bi;
                }
            }
            self.hub_op.adjoint(&h_buf, &mut back);
            for (gi, bi) in g_out.iter_mut().zip(&back) {
                *gi += 2.0 * self.kappa * bi;
            }
            for (gi, keep) in g_out.iter_mut().zip(self.is_interior) {
                if !keep {
                    *gi = 0.0;
                }
            }
        }
        f
    }
}

/// LU solve with partial pivoting; `a` is dim x dim row-major. Returns
/// None when a pivot vanishes.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, dim: usize) -> Option<Vec<f64>> {
    for col in 0..dim {
        let piv = (col..dim)
            .max_by(|&i, &j| a[i * dim + col].abs().total_cmp(&a[j * dim + col].abs()))?;
        if a[piv * dim + col] == 0.0 {
            return None;
        }
        if piv != col {
            for c2 in 0..dim {
                a.swap(col * dim + c2, piv * dim + c2);
            }
            b.swap(col, piv);
        }
        for row in col + 1..dim {
            let f = a[row * dim + col] / a[col * dim + col];
            if f == 0.0 {
                continue;
            }
            for c2 in col..dim {
                a[row * dim + c2] -= f * a[col * dim + c2];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..dim).rev() {
        let mut s = b[col];
        for c2 in col + 1..dim {
            s -= a[col * dim + c2] * b[c2];
        }
        b[col] = s / a[col * dim + col];
    }
    Some(b)
}

/// Independent small-instance oracle for the TV-denoise problem: minimizes
/// an epsilon-smoothed surrogate of the same objective by a damped descent
/// method with backtracking line search on the zero-trace subspace,
/// tightening the smoothing in stages down to eps = 1e-9. The descent
/// direction is a Levenberg-damped Newton step built from dense restricted
/// operators — the smoothing gives the surrogate a curvature ratio near
/// 1/eps, which defeats purely first-order steps long before the gradient
/// target. Each stage iterates until its gradient target or budget is
/// reached and hands its best iterate to the next. Intended for
/// cross-validation in tests only: images at most 12 x 12, finite p.
pub fn oracle_solve(
    u_eta: &Image,
    r: FracOrder,
    alpha: f64,
    p: LpExponent,
    kappa: f64,
) -> Result<Image> {
    if u_eta.width() > 12 || u_eta.height() > 12 {
        return Err(invalid("oracle_solve is restricted to images at most 12 x 12"));
    }
    let pv = match p {
        LpExponent::Finite(v) => v,
        LpExponent::Infinity => {
            return Err(invalid("oracle_solve supports finite exponents only"))
        }
    };
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(invalid(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    let m = r.integer_part() + 1;
    HuberSpec::new(m, kappa)?;
    let (w, ht, h) = (u_eta.width(), u_eta.height(), u_eta.h());
    let n = w * ht;
    let grad_op = FracGradOp::new(w, ht, h, r)?;
    let hub_op = GradPowerOp::new(w, ht, h, m)?;
    let (_, s) = r.ceil_split();
    let a = alpha * divergence_scale(s);

    let is_interior: Vec<bool> = (0..n)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            x > 0 && x + 1 < w && y > 0 && y + 1 < ht
        })
        .collect();
    let interior: Vec<usize> =
        (0..n).filter(|&i| is_interior[i]).collect();
    let ni = interior.len();
    if ni == 0 {
        return Image::new(w, ht, h, vec![0.0; n]);
    }

    // Dense interior columns of both operators, and the constant Hessian
    // part 2I + 2 kappa H^T H of the data and smoothing terms.
    let mut unit = vec![0.0; n];
    let mut g_cols = vec![vec![0.0; grad_op.range_len()]; ni];
    let mut h_cols = vec![vec![0.0; hub_op.range_len()]; ni];
    for (j, &idx) in interior.iter().enumerate() {
        unit.fill(0.0);
        unit[idx] = 1.0;
        grad_op.forward(&unit, &mut g_cols[j]);
        hub_op.forward(&unit, &mut h_cols[j]);
    }
    let mut quad_hess = vec![0.0; ni * ni];
    for j in 0..ni {
        for k in j..ni {
            let dot: f64 = h_cols[j].iter().zip(&h_cols[k]).map(|(x, y)| x * y).sum();
            let v = 2.0 * kappa * dot + if j == k { 2.0 } else { 0.0 };
            quad_hess[j * ni + k] = v;
            quad_hess[k * ni + j] = v;
        }
    }
    // Pixel-major rows of the gradient operator over interior columns, for
    // assembling the curvature of the smoothed mass term.
    let mut gx_rows = vec![0.0; n * ni];
    let mut gy_rows = vec![0.0; n * ni];
    if a > 0.0 {
        for (j, col) in g_cols.iter().enumerate() {
            for i in 0..n {
                gx_rows[i * ni + j] = col[i];
                gy_rows[i * ni + j] = col[n + i];
            }
        }
    }

    let mut x = vec![0.0; n];
    let mut w_cur = vec![0.0; grad_op.range_len()];

    // Continuation in the smoothing parameter: the tight-eps surrogate has a
    // curvature ratio near 1/eps and defeats a cold-started Newton method for
    // exponents below 2, so earlier, smoother stages supply the warm start.
    for (stage, eps) in [1e-3_f64, 1e-6, 1e-9].into_iter().enumerate() {
        let last = stage == 2;
        let (budget, gtol) = if last { (500, 1e-10) } else { (150, 1e-8) };
        let sur = Surrogate {
            grad_op: &grad_op,
            hub_op: &hub_op,
            a,
            pv,
            eps,
            kappa,
            target: u_eta.data(),
            is_interior: &is_interior,
            n,
        };

        let mut grad = vec![0.0; n];
        let mut fx = sur.eval(&x, Some(&mut grad));
        let mut best_f = fx;
        let mut best_x = x.clone();
        let mut lambda = 1e-8_f64;
        let mut fails = 0;

        for _ in 0..budget {
            let gnorm: f64 = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm <= gtol {
                break;
            }
            let mut a_mat = quad_hess.clone();
            if a > 0.0 {
                grad_op.forward(&x, &mut w_cur);
                for i in 0..n {
                    let (wx, wy) = (w_cur[i], w_cur[n + i]);
                    let (ax2, ay2) = (wx * wx + eps * eps, wy * wy + eps * eps);
                    let (phix, phiy) = (ax2.powf(0.5 * pv), ay2.powf(0.5 * pv));
                    let (psix, psiy) = (ax2.powf(0.5 * pv - 1.0), ay2.powf(0.5 * pv - 1.0));
                    let s_val = phix + phiy;
                    let s1 = s_val.powf(1.0 / pv - 1.0);
                    let s2 = s_val.powf(1.0 / pv - 2.0);
                    let (bx, by) = (wx * psix, wy * psiy);
                    let d11 = (1.0 - pv) * s2 * bx * bx
                        + s1 * (psix + (pv - 2.0) * wx * wx * ax2.powf(0.5 * pv - 2.0));
                    let d22 = (1.0 - pv) * s2 * by * by
                        + s1 * (psiy + (pv - 2.0) * wy * wy * ay2.powf(0.5 * pv - 2.0));
                    let d12 = (1.0 - pv) * s2 * bx * by;
                    let rx = &gx_rows[i * ni..(i + 1) * ni];
                    let ry = &gy_rows[i * ni..(i + 1) * ni];
                    for jj in 0..ni {
                        let (xj, yj) = (rx[jj], ry[jj]);
                        if xj == 0.0 && yj == 0.0 {
                            continue;
                        }
                        let cx = a * (d11 * xj + d12 * yj);
                        let cy = a * (d12 * xj + d22 * yj);
                        let row = &mut a_mat[jj * ni..(jj + 1) * ni];
                        for (rv, (xk, yk)) in row.iter_mut().zip(rx.iter().zip(ry)) {
                            *rv += cx * xk + cy * yk;
                        }
                    }
                }
            }
            for j in 0..ni {
                a_mat[j * ni + j] *= 1.0 + lambda;
            }
            let rhs: Vec<f64> = interior.iter().map(|&i| -grad[i]).collect();
            let d = match solve_dense(a_mat, rhs, ni) {
                Some(d) => d,
                None => {
                    lambda = (lambda * 16.0).min(1e12);
                    fails += 1;
                    if fails > 8 {
                        break;
                    }
                    continue;
                }
            };
            let dd: f64 = interior.iter().zip(&d).map(|(&i, di)| grad[i] * di).sum();
            if dd >= 0.0 {
                lambda = (lambda * 16.0).min(1e12);
                fails += 1;
                if fails > 8 {
                    break;
                }
                continue;
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let mut cand = x.clone();
                for (&i, di) in interior.iter().zip(&d) {
                    cand[i] += t * di;
                }
                let fc = sur.eval(&cand, None);
                if fc <= fx + 1e-4 * t * dd {
                    x = cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                lambda = (lambda * 16.0).min(1e12);
                fails += 1;
                if fails > 8 {
                    break;
                }
                continue;
            }
            fails = 0;
            lambda = if t == 1.0 { (lambda * 0.25).max(1e-12) } else { (lambda * 4.0).min(1e10) };
            fx = sur.eval(&x, Some(&mut grad));
            if fx < best_f {
                best_f = fx;
                best_x = x.clone();
            }
        }
        x = best_x;
    }
    Image::new(w, ht, h, x)
}
