//! Matrix-free 2D fractional operators.
//!
//! All operators sweep the 1D kernels from [`crate::frac1d`] along grid
//! axes. The primal side uses left stencils; adjoints use the mirrored
//! right stencils, which are exact transposes under zero extension, so
//! every operator here satisfies `<K u, y> == <u, K^T y>` in the plain
//! (unweighted) Euclidean pairing up to rounding.

use crate::error::{invalid, shape, Result};
use crate::frac1d::{DerivKernel, FracOrder, Side};
use crate::image::{Image, VectorField};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sweep {
    Left,
    Right,
}

/// Reusable scratch buffers for axis sweeps; each holds max(width, height)
/// entries.
#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl Scratch {
    pub(crate) fn for_grid(width: usize, height: usize) -> Scratch {
        let n = width.max(height);
        Scratch { a: vec![0.0; n], b: vec![0.0; n], c: vec![0.0; n] }
    }
}

/// Apply a 1D kernel along one axis of a `width x height` plane.
pub(crate) fn axis_sweep(
    kernel: &DerivKernel,
    sweep: Sweep,
    axis: Axis,
    src: &[f64],
    dst: &mut [f64],
    width: usize,
    height: usize,
    scratch: &mut Scratch,
) {
    debug_assert_eq!(src.len(), width * height);
    debug_assert_eq!(dst.len(), width * height);
    match axis {
        Axis::X => {
            let tmp = &mut scratch.a[..width];
            for y in 0..height {
                let row = &src[y * width..(y + 1) * width];
                let out = &mut dst[y * width..(y + 1) * width];
                match sweep {
                    Sweep::Left => kernel.apply_left(row, out, tmp),
                    Sweep::Right => kernel.apply_right(row, out, tmp),
                }
            }
        }
        Axis::Y => {
            let col = &mut scratch.b[..height];
            let out = &mut scratch.c[..height];
            let tmp = &mut scratch.a[..height];
            for x in 0..width {
                for y in 0..height {
                    col[y] = src[y * width + x];
                }
                match sweep {
                    Sweep::Left => kernel.apply_left(col, out, tmp),
                    Sweep::Right => kernel.apply_right(col, out, tmp),
                }
                for y in 0..height {
                    dst[y * width + x] = out[y];
                }
            }
        }
    }
}

/// Same as [`axis_sweep`] with the result *added* into `dst` (used by
/// adjoint accumulation).
pub(crate) fn axis_sweep_add(
    kernel: &DerivKernel,
    sweep: Sweep,
    axis: Axis,
    src: &[f64],
    dst: &mut [f64],
    width: usize,
    height: usize,
    scratch: &mut Scratch,
    buf: &mut [f64],
) {
    axis_sweep(kernel, sweep, axis, src, buf, width, height, scratch);
    for (d, b) in dst.iter_mut().zip(buf.iter()) {
        *d += b;
    }
}

/// Scale factor c(s) = (1 - 1/N) s + 1/N of the scaled divergence, N = 2.
pub fn divergence_scale(s: f64) -> f64 {
    0.5 * (s + 1.0)
}

/// Fractional gradient: channel 0 is the order-r left derivative along x,
/// channel 1 the same along y. Order 0 replicates the image into both
/// channels; integer orders collapse bit-exactly to repeated first
/// differences.
pub fn frac_grad(u: &Image, order: FracOrder) -> Result<VectorField> {
    let (w, h) = (u.width(), u.height());
    let mut scratch = Scratch::for_grid(w, h);
    let kx = DerivKernel::new(order, u.h(), w);
    let ky = DerivKernel::new(order, u.h(), h);
    let mut px = vec![0.0; w * h];
    let mut py = vec![0.0; w * h];
    axis_sweep(&kx, Sweep::Left, Axis::X, u.data(), &mut px, w, h, &mut scratch);
    axis_sweep(&ky, Sweep::Left, Axis::Y, u.data(), &mut py, w, h, &mut scratch);
    VectorField::new(w, h, u.h(), vec![px, py])
}

/// Scaled fractional divergence of a 2-channel field:
///
///   div^r phi = c(s) * sum_a (-d^r_{R,a} phi_a),   r > 0,
///   div^0 phi = (phi_0 + phi_1) / 2,
///
/// where r decomposes with the exclusive ceiling split s = r - ceil(r) + 1
/// in (0, 1], so r = 1 gives the standard discrete divergence with c(1) = 1
/// and fractional r in (0,1) carries c(s) = (s+1)/2. The signed adjoint
/// identity `<frac_grad(u, r), phi> = -<u, frac_div(phi, r)> / c(s)` holds
/// discretely for r > 0.
pub fn frac_div(phi: &VectorField, order: FracOrder) -> Result<Image> {
    if phi.channels() != 2 {
        return Err(shape(format!(
            "frac_div expects a 2-channel field, got {} channels",
            phi.channels()
        )));
    }
    let (w, h) = (phi.width(), phi.height());
    let mut out = vec![0.0; w * h];
    if order.value() == 0.0 {
        for i in 0..w * h {
            out[i] = 0.5 * (phi.plane(0)[i] + phi.plane(1)[i]);
        }
        return Image::new(w, h, phi.h(), out);
    }
    let (_, s) = order.ceil_split();
    let c = divergence_scale(s);
    let mut scratch = Scratch::for_grid(w, h);
    let kx = DerivKernel::new(order, phi.h(), w);
    let ky = DerivKernel::new(order, phi.h(), h);
    let mut buf = vec![0.0; w * h];
    axis_sweep(&kx, Sweep::Right, Axis::X, phi.plane(0), &mut buf, w, h, &mut scratch);
    for (o, b) in out.iter_mut().zip(buf.iter()) {
        *o -= c * b;
    }
    axis_sweep(&ky, Sweep::Right, Axis::Y, phi.plane(1), &mut buf, w, h, &mut scratch);
    for (o, b) in out.iter_mut().zip(buf.iter()) {
        *o -= c * b;
    }
    Image::new(w, h, phi.h(), out)
}

/// m-fold composition of the order-1 gradient: 2^m channels of mixed
/// partials. Channel indices read as base-2 strings of axis choices in
/// application order, most significant digit first: for m = 2 the channels
/// are [xx, xy, yx, yy].
pub fn integer_grad_power(u: &Image, m: usize) -> Result<VectorField> {
    if m == 0 || m > 4 {
        return Err(invalid(format!("integer_grad_power supports 1 <= m <= 4, got {m}")));
    }
    let (w, h) = (u.width(), u.height());
    let mut scratch = Scratch::for_grid(w, h);
    let kx = DerivKernel::new(FracOrder::new(1.0)?, u.h(), w);
    let ky = DerivKernel::new(FracOrder::new(1.0)?, u.h(), h);
    let mut level: Vec<Vec<f64>> = vec![u.data().to_vec()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(level.len() * 2);
        for plane in &level {
            let mut px = vec![0.0; w * h];
            let mut py = vec![0.0; w * h];
            axis_sweep(&kx, Sweep::Left, Axis::X, plane, &mut px, w, h, &mut scratch);
            axis_sweep(&ky, Sweep::Left, Axis::Y, plane, &mut py, w, h, &mut scratch);
            next.push(px);
            next.push(py);
        }
        level = next;
    }
    VectorField::new(w, h, u.h(), level)
}

/// Descriptor carried by every exposed linear operator.
#[derive(Debug, Clone)]
pub struct OpDescriptor {
    pub label: String,
    pub order: f64,
    pub side: Side,
    /// Number of chained sweep layers (1 for a plain gradient, m for the
    /// m-th integer gradient power).
    pub depth: usize,
}

/// A matrix-free linear operator between flat coefficient vectors.
/// `adjoint` must implement the exact transpose of `forward` with respect
/// to the unweighted Euclidean inner product.
pub trait LinearOp {
    fn domain_len(&self) -> usize;
    fn range_len(&self) -> usize;
    fn forward(&self, x: &[f64], y: &mut [f64]);
    fn adjoint(&self, y: &[f64], x: &mut [f64]);
    fn descriptor(&self) -> OpDescriptor;
}

/// [`frac_grad`] as a [`LinearOp`]: domain = image pixels, range = two
/// stacked channel planes.
pub struct FracGradOp {
    width: usize,
    height: usize,
    order: FracOrder,
    kx: DerivKernel,
    ky: DerivKernel,
}

impl FracGradOp {
    pub fn new(width: usize, height: usize, h: f64, order: FracOrder) -> Result<Self> {
        if width < 2 || height < 2 || h <= 0.0 {
            return Err(invalid("FracGradOp requires a valid >= 2x2 grid"));
        }
        Ok(FracGradOp {
            width,
            height,
            order,
            kx: DerivKernel::new(order, h, width),
            ky: DerivKernel::new(order, h, height),
        })
    }
}

impl LinearOp for FracGradOp {
    fn domain_len(&self) -> usize {
        self.width * self.height
    }

    fn range_len(&self) -> usize {
        2 * self.width * self.height
    }

    fn forward(&self, x: &[f64], y: &mut [f64]) {
        let n = self.domain_len();
        let mut scratch = Scratch::for_grid(self.width, self.height);
        let (y0, y1) = y.split_at_mut(n);
        axis_sweep(&self.kx, Sweep::Left, Axis::X, x, y0, self.width, self.height, &mut scratch);
        axis_sweep(&self.ky, Sweep::Left, Axis::Y, x, y1, self.width, self.height, &mut scratch);
    }

    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        let n = self.domain_len();
        let mut scratch = Scratch::for_grid(self.width, self.height);
        let mut buf = vec![0.0; n];
        x.fill(0.0);
        axis_sweep_add(
            &self.kx, Sweep::Right, Axis::X, &y[..n], x, self.width, self.height, &mut scratch,
            &mut buf,
        );
        axis_sweep_add(
            &self.ky, Sweep::Right, Axis::Y, &y[n..], x, self.width, self.height, &mut scratch,
            &mut buf,
        );
    }

    fn descriptor(&self) -> OpDescriptor {
        OpDescriptor {
            label: format!("frac_grad(r={})", self.order.value()),
            order: self.order.value(),
            side: Side::Left,
            depth: 1,
        }
    }
}

/// [`integer_grad_power`] as a [`LinearOp`].
pub struct GradPowerOp {
    width: usize,
    height: usize,
    m: usize,
    kx: DerivKernel,
    ky: DerivKernel,
}

impl GradPowerOp {
    pub fn new(width: usize, height: usize, h: f64, m: usize) -> Result<Self> {
        if m == 0 || m > 4 {
            return Err(invalid(format!("GradPowerOp supports 1 <= m <= 4, got {m}")));
        }
        if width < 2 || height < 2 || h <= 0.0 {
            return Err(invalid("GradPowerOp requires a valid >= 2x2 grid"));
        }
        let one = FracOrder::new(1.0)?;
        Ok(GradPowerOp {
            width,
            height,
            m,
            kx: DerivKernel::new(one, h, width),
            ky: DerivKernel::new(one, h, height),
        })
    }
}

impl LinearOp for GradPowerOp {
    fn domain_len(&self) -> usize {
        self.width * self.height
    }

    fn range_len(&self) -> usize {
        (1 << self.m) * self.width * self.height
    }

    fn forward(&self, x: &[f64], y: &mut [f64]) {
        let n = self.domain_len();
        let mut scratch = Scratch::for_grid(self.width, self.height);
        let mut level: Vec<Vec<f64>> = vec![x.to_vec()];
        for _ in 0..self.m {
            let mut next = Vec::with_capacity(level.len() * 2);
            for plane in &level {
                let mut px = vec![0.0; n];
                let mut py = vec![0.0; n];
                axis_sweep(&self.kx, Sweep::Left, Axis::X, plane, &mut px, self.width, self.height, &mut scratch);
                axis_sweep(&self.ky, Sweep::Left, Axis::Y, plane, &mut py, self.width, self.height, &mut scratch);
                next.push(px);
                next.push(py);
            }
            level = next;
        }
        for (c, plane) in level.iter().enumerate() {
            y[c * n..(c + 1) * n].copy_from_slice(plane);
        }
    }

    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        let n = self.domain_len();
        let mut scratch = Scratch::for_grid(self.width, self.height);
        let mut buf = vec![0.0; n];
        let mut level: Vec<Vec<f64>> =
            (0..1 << self.m).map(|c| y[c * n..(c + 1) * n].to_vec()).collect();
        for _ in 0..self.m {
            let mut prev = Vec::with_capacity(level.len() / 2);
            for pair in level.chunks(2) {
                let mut acc = vec![0.0; n];
                axis_sweep_add(&self.kx, Sweep::Right, Axis::X, &pair[0], &mut acc, self.width, self.height, &mut scratch, &mut buf);
                axis_sweep_add(&self.ky, Sweep::Right, Axis::Y, &pair[1], &mut acc, self.width, self.height, &mut scratch, &mut buf);
                prev.push(acc);
            }
            level = prev;
        }
        x.copy_from_slice(&level[0]);
    }

    fn descriptor(&self) -> OpDescriptor {
        OpDescriptor {
            label: format!("grad_power(m={})", self.m),
            order: self.m as f64,
            side: Side::Left,
            depth: self.m,
        }
    }
}

/// Order-r derivative along a single axis as a [`LinearOp`] (image-sized
/// domain and range). Useful for debugging and for constructing 1D test
/// problems on degenerate grids.
pub struct AxisDerivOp {
    width: usize,
    height: usize,
    order: FracOrder,
    axis_is_x: bool,
    kernel: DerivKernel,
}

impl AxisDerivOp {
    pub fn new(width: usize, height: usize, h: f64, order: FracOrder, axis_is_x: bool) -> Result<Self> {
        if width < 2 || height < 2 || h <= 0.0 {
            return Err(invalid("AxisDerivOp requires a valid >= 2x2 grid"));
        }
        let len = if axis_is_x { width } else { height };
        Ok(AxisDerivOp { width, height, order, axis_is_x, kernel: DerivKernel::new(order, h, len) })
    }

    fn axis(&self) -> Axis {
        if self.axis_is_x {
            Axis::X
        } else {
            Axis::Y
        }
    }
}

impl LinearOp for AxisDerivOp {
    fn domain_len(&self) -> usize {
        self.width * self.height
    }

    fn range_len(&self) -> usize {
        self.width * self.height
    }

    fn forward(&self, x: &[f64], y: &mut [f64]) {
        let mut scratch = Scratch::for_grid(self.width, self.height);
        axis_sweep(&self.kernel, Sweep::Left, self.axis(), x, y, self.width, self.height, &mut scratch);
    }

    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        let mut scratch = Scratch::for_grid(self.width, self.height);
        axis_sweep(&self.kernel, Sweep::Right, self.axis(), y, x, self.width, self.height, &mut scratch);
    }

    fn descriptor(&self) -> OpDescriptor {
        OpDescriptor {
            label: format!(
                "axis_deriv(r={}, axis={})",
                self.order.value(),
                if self.axis_is_x { "x" } else { "y" }
            ),
            order: self.order.value(),
            side: Side::Left,
            depth: 1,
        }
    }
}

/// Channelwise fractional gradient of a multi-channel field: component c
/// maps to output channels (2c, 2c+1) = (d^r_x v^c, d^r_y v^c), the same
/// interleaving [`integer_grad_power`] uses per doubling level.
pub(crate) fn stack_grad(v: &VectorField, order: FracOrder) -> Result<VectorField> {
    let (w, h) = (v.width(), v.height());
    let mut scratch = Scratch::for_grid(w, h);
    let kx = DerivKernel::new(order, v.h(), w);
    let ky = DerivKernel::new(order, v.h(), h);
    let mut planes = Vec::with_capacity(2 * v.channels());
    for plane in v.planes() {
        let mut px = vec![0.0; w * h];
        let mut py = vec![0.0; w * h];
        axis_sweep(&kx, Sweep::Left, Axis::X, plane, &mut px, w, h, &mut scratch);
        axis_sweep(&ky, Sweep::Left, Axis::Y, plane, &mut py, w, h, &mut scratch);
        planes.push(px);
        planes.push(py);
    }
    VectorField::new(w, h, v.h(), planes)
}

/// [`stack_grad`] as a [`LinearOp`]: `channels_in` stacked planes in, twice
/// as many out.
pub(crate) struct StackGradOp {
    width: usize,
    height: usize,
    channels_in: usize,
    order: FracOrder,
    kx: DerivKernel,
    ky: DerivKernel,
}

impl StackGradOp {
    pub(crate) fn new(
        width: usize,
        height: usize,
        h: f64,
        order: FracOrder,
        channels_in: usize,
    ) -> Result<Self> {
        if width < 2 || height < 2 || h <= 0.0 || channels_in == 0 {
            return Err(invalid("StackGradOp requires a valid >= 2x2 grid and >= 1 channel"));
        }
        Ok(StackGradOp {
            width,
            height,
            channels_in,
            order,
            kx: DerivKernel::new(order, h, width),
            ky: DerivKernel::new(order, h, height),
        })
    }
}

impl LinearOp for StackGradOp {
    fn domain_len(&self) -> usize {
        self.channels_in * self.width * self.height
    }

    fn range_len(&self) -> usize {
        2 * self.channels_in * self.width * self.height
    }

    fn forward(&self, x: &[f64], y: &mut [f64]) {
        let n = self.width * self.height;
        let mut scratch = Scratch::for_grid(self.width, self.height);
        for c in 0..self.channels_in {
            let src = &x[c * n..(c + 1) * n];
            let (head, tail) = y[2 * c * n..].split_at_mut(n);
            axis_sweep(&self.kx, Sweep::Left, Axis::X, src, head, self.width, self.height, &mut scratch);
            axis_sweep(&self.ky, Sweep::Left, Axis::Y, src, &mut tail[..n], self.width, self.height, &mut scratch);
        }
    }

    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        let n = self.width * self.height;
        let mut scratch = Scratch::for_grid(self.width, self.height);
        let mut buf = vec![0.0; n];
        x.fill(0.0);
        for c in 0..self.channels_in {
            let dst = &mut x[c * n..(c + 1) * n];
            axis_sweep_add(
                &self.kx, Sweep::Right, Axis::X, &y[2 * c * n..(2 * c + 1) * n], dst,
                self.width, self.height, &mut scratch, &mut buf,
            );
            axis_sweep_add(
                &self.ky, Sweep::Right, Axis::Y, &y[(2 * c + 1) * n..(2 * c + 2) * n], dst,
                self.width, self.height, &mut scratch, &mut buf,
            );
        }
    }

    fn descriptor(&self) -> OpDescriptor {
        OpDescriptor {
            label: format!("stack_grad(r={}, c={})", self.order.value(), self.channels_in),
            order: self.order.value(),
            side: Side::Left,
            depth: 1,
        }
    }
}

/// Estimate of the spectral norm of `op` by `iters` rounds of power
/// iteration on K^T K from a seeded random start vector, multiplied by a
/// 1.05 safety factor. Returns exactly 0 for the zero operator.
pub fn operator_norm(op: &dyn LinearOp, iters: usize, seed: u64) -> f64 {
    let n = op.domain_len();
    let m = op.range_len();
    let mut rng = SplitMix64::new(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    let mut y = vec![0.0; m];
    let nrm0: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nrm0 == 0.0 {
        return 0.0;
    }
    for v in x.iter_mut() {
        *v /= nrm0;
    }
    let mut lambda = 0.0;
    for _ in 0..iters.max(1) {
        op.forward(&x, &mut y);
        op.adjoint(&y, &mut x);
        lambda = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if lambda == 0.0 {
            return 0.0;
        }
        for v in x.iter_mut() {
            *v /= lambda;
        }
    }
    1.05 * lambda.sqrt()
}
