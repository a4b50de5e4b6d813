//! Bilevel grid training: pick regularizer parameters by exhaustive search.
//!
//! The upper level scores a denoised image against a clean reference with
//! [`assessment`]; the lower level produces that image by running the
//! primal-dual solver once per parameter tuple. The search is a plain grid
//! scan rather than a descent method because the assessment landscape is
//! nonsmooth and multimodal in the regularization parameters, and because a
//! grid gives bit-deterministic, order-independent results that are easy to
//! audit.
//!
//! A [`TrainingGround`] describes the grid: closed sample ranges for the two
//! differentiation orders, one weight range per chain layer, and one exponent
//! sample list per chain layer. Exponent lists are sorted ascending with the
//! infinite exponent last, so the enumeration order of the grid — and hence
//! the row order of every emitted table — is lexicographic in
//! `(alpha_0, .., alpha_k, r1, r2, p_0, .., p_k)`.

use rayon::prelude::*;

use crate::error::{invalid, shape, FractvError, Result};
use crate::frac1d::FracOrder;
use crate::image::Image;
use crate::lp::LpExponent;
use crate::reg::RvlSpec;
use crate::solver::{solve_rvl_denoise, SolveReport, SolverOptions};

/// A clean/noisy image pair used as training data.
///
/// Both images must share shape and spacing and be boundary-reduced (zero
/// trace); the solver and the regularizers assume homogeneous boundaries.
#[derive(Debug, Clone)]
pub struct TrainingPair {
    u_c: Image,
    u_eta: Image,
}

impl TrainingPair {
    pub fn new(u_c: Image, u_eta: Image) -> Result<Self> {
        if u_c.width() != u_eta.width()
            || u_c.height() != u_eta.height()
            || u_c.h() != u_eta.h()
        {
            return Err(shape("training pair images must share shape and spacing"));
        }
        if !u_c.boundary_is_zero(1e-12) || !u_eta.boundary_is_zero(1e-12) {
            return Err(invalid(
                "training pair images must be boundary-reduced (zero trace)",
            ));
        }
        Ok(TrainingPair { u_c, u_eta })
    }

    pub fn clean(&self) -> &Image {
        &self.u_c
    }

    pub fn noisy(&self) -> &Image {
        &self.u_eta
    }
}

/// A closed interval `[lo, hi]` sampled at `count` evenly spaced points.
///
/// `count == 1` requires `lo == hi` and represents a frozen axis; `count >= 2`
/// requires `hi > lo`. The first and last samples are exactly `lo` and `hi`.
#[derive(Debug, Clone, Copy)]
pub struct Axis {
    lo: f64,
    hi: f64,
    count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(format!("axis endpoints must be finite, got [{lo}, {hi}]")));
        }
        if count == 0 {
            return Err(invalid("axis sample count must be at least 1"));
        }
        if count == 1 && lo != hi {
            return Err(invalid(format!(
                "a single-sample axis must have lo == hi, got [{lo}, {hi}]"
            )));
        }
        if count >= 2 && hi <= lo {
            return Err(invalid(format!(
                "an axis with {count} samples needs hi > lo, got [{lo}, {hi}]"
            )));
        }
        Ok(Axis { lo, hi, count })
    }

    /// Frozen axis holding the single value `v`.
    pub fn point(v: f64) -> Result<Self> {
        Axis::new(v, v, 1)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The sample values, in increasing order. Endpoints are reproduced
    /// exactly; interior points are `lo + i * (hi - lo) / (count - 1)`.
    pub fn samples(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / ((self.count - 1) as f64);
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

/// The parameter grid searched by [`grid_search`].
///
/// `alpha` holds one weight axis per chain layer (`k + 1` axes where
/// `k = floor(r2)`), and `p` one exponent sample list per layer. Every `r2`
/// sample must share the same integer part, since the chain depth — and with
/// it the number of weight and exponent slots — cannot change inside one
/// grid. Exponent lists are stored sorted (infinite exponent last) and
/// deduplicated. `kappa` is fixed per ground, never searched.
#[derive(Debug, Clone)]
pub struct TrainingGround {
    r1: Axis,
    r2: Axis,
    alpha: Vec<Axis>,
    p: Vec<Vec<LpExponent>>,
    kappa: f64,
}

impl TrainingGround {
    pub fn new(
        r1: Axis,
        r2: Axis,
        alpha: Vec<Axis>,
        p: Vec<Vec<LpExponent>>,
        kappa: f64,
    ) -> Result<Self> {
        for v in r1.samples().into_iter().chain(r2.samples()) {
            let order = FracOrder::new(v)?;
            if order.value() < 1.0 {
                return Err(invalid(format!(
                    "training orders must satisfy r >= 1, got {v}"
                )));
            }
        }
        let floors: Vec<usize> = r2
            .samples()
            .iter()
            .map(|v| FracOrder::new(*v).map(|o| o.integer_part()))
            .collect::<Result<_>>()?;
        let k = floors[0];
        if floors.iter().any(|f| *f != k) {
            return Err(invalid(
                "all r2 samples in one ground must share the same integer part, \
                 since the chain depth cannot change inside a grid",
            ));
        }
        if alpha.len() != k + 1 || p.len() != k + 1 {
            return Err(invalid(format!(
                "ground with floor(r2) = {k} needs {} weight axes and {} exponent lists, \
                 got {} and {}",
                k + 1,
                k + 1,
                alpha.len(),
                p.len()
            )));
        }
        if alpha.iter().any(|ax| ax.lo < 0.0) {
            return Err(invalid("weight axes must lie in [0, inf)"));
        }
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(invalid(format!("ground kappa must be positive, got {kappa}")));
        }
        let mut sorted_p = Vec::with_capacity(p.len());
        for list in p {
            if list.is_empty() {
                return Err(invalid("every exponent sample list must be nonempty"));
            }
            let mut list = list;
            list.sort_by(|a, b| a.cmp_inf_last(b));
            list.dedup();
            sorted_p.push(list);
        }
        Ok(TrainingGround { r1, r2, alpha, p: sorted_p, kappa })
    }

    pub fn r1(&self) -> Axis {
        self.r1
    }

    pub fn r2(&self) -> Axis {
        self.r2
    }

    pub fn alpha(&self) -> &[Axis] {
        &self.alpha
    }

    pub fn p(&self) -> &[Vec<LpExponent>] {
        &self.p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Chain depth `k = floor(r2)`; the grid carries `k + 1` layers.
    pub fn chain_depth(&self) -> usize {
        self.alpha.len() - 1
    }

    /// Column labels in enumeration order: `alpha0..alphaK, r1, r2, p0..pK`.
    pub fn param_labels(&self) -> Vec<String> {
        let k = self.chain_depth();
        let mut out = Vec::with_capacity(2 * (k + 1) + 2);
        for j in 0..=k {
            out.push(format!("alpha{j}"));
        }
        out.push("r1".to_string());
        out.push("r2".to_string());
        for j in 0..=k {
            out.push(format!("p{j}"));
        }
        out
    }

    /// Number of tuples in the grid.
    pub fn tuple_count(&self) -> usize {
        self.axis_counts().iter().product()
    }

    /// Sample counts in enumeration order (same order as `param_labels`).
    fn axis_counts(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.alpha.iter().map(|a| a.count).collect();
        dims.push(self.r1.count);
        dims.push(self.r2.count);
        dims.extend(self.p.iter().map(|l| l.len()));
        dims
    }

    /// Axes with more than one sample, as `(label, count)` pairs in
    /// enumeration order.
    pub fn free_axes(&self) -> Vec<(String, usize)> {
        self.param_labels()
            .into_iter()
            .zip(self.axis_counts())
            .filter(|(_, n)| *n > 1)
            .collect()
    }

    /// All parameter tuples in lexicographic enumeration order.
    pub(crate) fn enumerate(&self) -> Vec<ParamTuple> {
        let alpha_samples: Vec<Vec<f64>> = self.alpha.iter().map(Axis::samples).collect();
        let r1_samples = self.r1.samples();
        let r2_samples = self.r2.samples();
        let dims = self.axis_counts();
        let layers = alpha_samples.len();
        let total: usize = dims.iter().product();
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut idx = vec![0usize; dims.len()];
            for d in (0..dims.len()).rev() {
                idx[d] = rest % dims[d];
                rest /= dims[d];
            }
            out.push(ParamTuple {
                alpha: (0..layers).map(|j| alpha_samples[j][idx[j]]).collect(),
                r1: r1_samples[idx[layers]],
                r2: r2_samples[idx[layers + 1]],
                p: (0..layers).map(|j| self.p[j][idx[layers + 2 + j]]).collect(),
            });
        }
        out
    }
}

/// One point of a training grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTuple {
    pub alpha: Vec<f64>,
    pub r1: f64,
    pub r2: f64,
    pub p: Vec<LpExponent>,
}

/// Result of one lower-level solve: the tuple, its assessment value, and the
/// solver report for that run.
#[derive(Debug, Clone)]
pub struct AssessmentRecord {
    pub params: ParamTuple,
    pub assessment: f64,
    pub report: SolveReport,
}

/// Squared L2 distance between two images under the grid quadrature weight
/// `h^2`. Symmetric, zero iff the images agree pixelwise.
pub fn assessment(u: &Image, u_c: &Image) -> Result<f64> {
    u.l2_sq_distance(u_c)
}

fn assess_tuple(
    pair: &TrainingPair,
    tuple: &ParamTuple,
    kappa: f64,
    opts: &SolverOptions,
) -> Result<AssessmentRecord> {
    let spec = RvlSpec::new(
        FracOrder::new(tuple.r1)?,
        FracOrder::new(tuple.r2)?,
        tuple.alpha.clone(),
        tuple.p.clone(),
        kappa,
    )?;
    let (u, _chain, report) = solve_rvl_denoise(pair.noisy(), &spec, opts)?;
    let value = assessment(&u, pair.clean())?;
    if !value.is_finite() {
        return Err(FractvError::Internal(format!(
            "assessment produced a non-finite value at tuple {tuple:?}"
        )));
    }
    Ok(AssessmentRecord { params: tuple.clone(), assessment: value, report })
}

/// Parse the `RVL_THREADS` cap: unset, empty, or `0` means automatic.
fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("RVL_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(invalid(format!("RVL_THREADS is not valid UTF-8: {e}"))),
        Ok(s) => {
            let t = s.trim();
            if t.is_empty() {
                return Ok(None);
            }
            let n: usize = t.parse().map_err(|_| {
                invalid(format!("RVL_THREADS must be a nonnegative integer, got {s:?}"))
            })?;
            Ok(if n == 0 { None } else { Some(n) })
        }
    }
}

/// Run every solve in the grid, preserving enumeration order. Work may be
/// spread over threads, but the returned vector — and therefore every
/// downstream reduction — is identical for any thread count.
fn run_grid(
    pair: &TrainingPair,
    ground: &TrainingGround,
    opts: &SolverOptions,
    tuples: &[ParamTuple],
    threads: Option<usize>,
) -> Result<Vec<AssessmentRecord>> {
    let kappa = ground.kappa;
    match threads {
        Some(1) => tuples.iter().map(|t| assess_tuple(pair, t, kappa, opts)).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| {
                FractvError::Internal(format!("could not build a {n}-thread pool: {e}"))
            })?;
            pool.install(|| {
                tuples.par_iter().map(|t| assess_tuple(pair, t, kappa, opts)).collect()
            })
        }
        None => tuples.par_iter().map(|t| assess_tuple(pair, t, kappa, opts)).collect(),
    }
}

/// Exhaustive search for the minimum assessment value over `ground`.
///
/// Returns the best record and the full table in enumeration order. Ties on
/// the assessment value keep the lexicographically smallest tuple in the
/// order `(alpha_0, .., alpha_k, r1, r2, p_0, .., p_k)` with the infinite
/// exponent ordered last; since enumeration follows exactly that order, the
/// first strict minimum wins. Errors if the winning solve did not converge —
/// a non-converged optimum is not evidence of anything.
///
/// The thread cap comes from `RVL_THREADS` (unset or `0` = automatic); the
/// result is bit-identical for every cap.
pub fn grid_search(
    pair: &TrainingPair,
    ground: &TrainingGround,
    opts: &SolverOptions,
) -> Result<(AssessmentRecord, Vec<AssessmentRecord>)> {
    grid_search_with_threads(pair, ground, opts, threads_from_env()?)
}

pub(crate) fn grid_search_with_threads(
    pair: &TrainingPair,
    ground: &TrainingGround,
    opts: &SolverOptions,
    threads: Option<usize>,
) -> Result<(AssessmentRecord, Vec<AssessmentRecord>)> {
    let tuples = ground.enumerate();
    let records = run_grid(pair, ground, opts, &tuples, threads)?;
    let mut best = 0;
    for (i, rec) in records.iter().enumerate() {
        if rec.assessment < records[best].assessment {
            best = i;
        }
    }
    let winner = records[best].clone();
    if !winner.report.converged {
        return Err(FractvError::OptimumNotConverged(format!(
            "tuple {:?} reached assessment {:.6e} but stopped at residuals \
             ({:.3e}, {:.3e}) after {} iterations",
            winner.params,
            winner.assessment,
            winner.report.primal_residual,
            winner.report.dual_residual,
            winner.report.iterations,
        )));
    }
    Ok((winner, records))
}

/// A rectangular slice of the assessment landscape over the free axes of a
/// ground, in row-major order (first free axis indexes rows).
#[derive(Debug, Clone)]
pub struct Landscape {
    pub row_label: Option<String>,
    pub col_label: Option<String>,
    pub rows: usize,
    pub cols: usize,
    /// One record per cell, row-major; same order as the ground enumeration.
    pub records: Vec<AssessmentRecord>,
}

impl Landscape {
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.records[row * self.cols + col].assessment
    }

    pub fn min_assessment(&self) -> f64 {
        self.records.iter().map(|r| r.assessment).fold(f64::INFINITY, f64::min)
    }
}

/// Evaluate the assessment at every tuple of a ground with at most two free
/// axes, without selecting a winner.
///
/// With two free axes the table is `rows x cols` over them in enumeration
/// order; with one it degenerates to a single row or column; a fully frozen
/// ground yields a 1x1 table. More than two free axes is an error — the
/// output is meant for mesh or contour plotting.
pub fn landscape(
    pair: &TrainingPair,
    ground: &TrainingGround,
    opts: &SolverOptions,
) -> Result<Landscape> {
    landscape_with_threads(pair, ground, opts, threads_from_env()?)
}

pub(crate) fn landscape_with_threads(
    pair: &TrainingPair,
    ground: &TrainingGround,
    opts: &SolverOptions,
    threads: Option<usize>,
) -> Result<Landscape> {
    let free = ground.free_axes();
    if free.len() > 2 {
        let names: Vec<&str> = free.iter().map(|(n, _)| n.as_str()).collect();
        return Err(invalid(format!(
            "landscape needs at most two free axes, found {}: {}",
            free.len(),
            names.join(", ")
        )));
    }
    let tuples = ground.enumerate();
    let records = run_grid(pair, ground, opts, &tuples, threads)?;
    let rows = free.first().map_or(1, |(_, n)| *n);
    let cols = free.get(1).map_or(1, |(_, n)| *n);
    debug_assert_eq!(rows * cols, records.len());
    Ok(Landscape {
        row_label: free.first().map(|(n, _)| n.clone()),
        col_label: free.get(1).map(|(n, _)| n.clone()),
        rows,
        cols,
        records,
    })
}

/// Run [`grid_search`] over a sequence of grounds that the caller asserts is
/// nested (each ground a superset of the previous) and return the best record
/// of each.
///
/// A larger grid can only improve an exhaustive minimum, so the minimum
/// assessment values must be nonincreasing along the sequence; any increase
/// means a broken invariant somewhere in the pipeline and is reported as an
/// internal error, not as a result.
pub fn compare_grounds(
    pair: &TrainingPair,
    grounds: &[TrainingGround],
    opts: &SolverOptions,
) -> Result<Vec<AssessmentRecord>> {
    if grounds.is_empty() {
        return Err(invalid("compare_grounds needs at least one ground"));
    }
    let mut bests = Vec::with_capacity(grounds.len());
    for ground in grounds {
        let (best, _) = grid_search(pair, ground, opts)?;
        bests.push(best);
    }
    for pairw in bests.windows(2) {
        if pairw[1].assessment > pairw[0].assessment {
            return Err(FractvError::Internal(format!(
                "minimum assessment increased from {:.17e} to {:.17e} across nested grounds",
                pairw[0].assessment, pairw[1].assessment
            )));
        }
    }
    Ok(bests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::boundary_reduce_2d;
    use crate::rng::SplitMix64;

    fn p2() -> LpExponent {
        LpExponent::new(2.0).unwrap()
    }

    fn tiny_pair(n: usize, sigma: f64, seed: u64) -> TrainingPair {
        let h = 1.0 / ((n - 1) as f64);
        let clean = Image::from_fn(n, n, h, |ix, iy| {
            let dx = ix as f64 * h - 0.45;
            let dy = iy as f64 * h - 0.55;
            0.7 * (-((dx * dx + dy * dy) / 0.03)).exp()
        })
        .unwrap();
        let (clean, _) = boundary_reduce_2d(&clean).unwrap();
        let mut rng = SplitMix64::new(seed);
        let mut noisy = clean.clone();
        for v in noisy.data_mut() {
            *v += sigma * (2.0 * rng.next_open01() - 1.0);
        }
        let (noisy, _) = boundary_reduce_2d(&noisy).unwrap();
        TrainingPair::new(clean, noisy).unwrap()
    }

    fn loose_opts() -> SolverOptions {
        SolverOptions { max_iters: 4000, tol: 1e-3, ..SolverOptions::default() }
    }

    #[test]
    fn axis_validation_rejects_bad_ranges() {
        assert!(Axis::new(0.0, 1.0, 0).is_err());
        assert!(Axis::new(0.0, 1.0, 1).is_err());
        assert!(Axis::new(1.0, 0.5, 3).is_err());
        assert!(Axis::new(1.0, 1.0, 2).is_err());
        assert!(Axis::new(f64::NAN, 1.0, 2).is_err());
        let ax = Axis::new(0.0, 1.0, 5).unwrap();
        assert_eq!(ax.samples(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Axis::point(0.3).unwrap().samples(), vec![0.3]);
    }

    #[test]
    fn ground_validation_catches_structural_errors() {
        let a = |v: f64| Axis::point(v).unwrap();
        // mixed chain depth across r2 samples
        let err = TrainingGround::new(
            a(1.0),
            Axis::new(1.5, 2.0, 2).unwrap(),
            vec![a(0.1), a(0.1)],
            vec![vec![p2()], vec![p2()]],
            1e-3,
        );
        assert!(err.is_err());
        // wrong number of weight axes for floor(r2) = 1
        assert!(TrainingGround::new(
            a(1.0),
            a(1.5),
            vec![a(0.1)],
            vec![vec![p2()]],
            1e-3
        )
        .is_err());
        // empty exponent list
        assert!(TrainingGround::new(
            a(1.0),
            a(1.0),
            vec![a(0.1), a(0.0)],
            vec![vec![], vec![p2()]],
            1e-3
        )
        .is_err());
        // nonpositive kappa
        assert!(TrainingGround::new(
            a(1.0),
            a(1.0),
            vec![a(0.1), a(0.0)],
            vec![vec![p2()], vec![p2()]],
            0.0
        )
        .is_err());
        // order below 1
        assert!(Axis::new(0.5, 1.5, 3)
            .and_then(|ax| TrainingGround::new(
                ax,
                a(1.0),
                vec![a(0.1), a(0.0)],
                vec![vec![p2()], vec![p2()]],
                1e-3
            ))
            .is_err());
    }

    #[test]
    fn assessment_matches_continuum_normalization() {
        let n = 64;
        let h = 1.0 / ((n - 1) as f64);
        let zero = Image::new(n, n, h, vec![0.0; n * n]).unwrap();
        let one = Image::new(n, n, h, vec![1.0; n * n]).unwrap();
        let a = assessment(&one, &zero).unwrap();
        // h^2 * n^2 -> integral of 1 over the unit square as n grows
        assert!((a - 1.0).abs() < 0.05, "assessment {a} should approximate 1");
        assert_eq!(a, assessment(&zero, &one).unwrap());
        assert_eq!(assessment(&one, &one).unwrap(), 0.0);
    }

    #[test]
    fn single_point_ground_reduces_to_one_manual_solve() {
        let pair = tiny_pair(8, 0.08, 7);
        let ground = TrainingGround::new(
            Axis::point(1.25).unwrap(),
            Axis::point(1.0).unwrap(),
            vec![Axis::point(0.05).unwrap(), Axis::point(0.0).unwrap()],
            vec![vec![p2()], vec![p2()]],
            1e-3,
        )
        .unwrap();
        let opts = loose_opts();
        let (best, table) = grid_search(&pair, &ground, &opts).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(best.assessment, table[0].assessment);

        let spec = RvlSpec::new(
            FracOrder::new(1.25).unwrap(),
            FracOrder::new(1.0).unwrap(),
            vec![0.05, 0.0],
            vec![p2(), p2()],
            1e-3,
        )
        .unwrap();
        let (u, _, _) = solve_rvl_denoise(pair.noisy(), &spec, &opts).unwrap();
        assert_eq!(best.assessment, assessment(&u, pair.clean()).unwrap());
    }

    #[test]
    fn superset_ground_never_increases_the_minimum() {
        let pair = tiny_pair(8, 0.1, 11);
        let p_list = vec![vec![p2()], vec![p2()]];
        let small = TrainingGround::new(
            Axis::point(1.0).unwrap(),
            Axis::point(1.0).unwrap(),
            vec![Axis::new(0.0625, 0.125, 2).unwrap(), Axis::point(0.0).unwrap()],
            p_list.clone(),
            1e-3,
        )
        .unwrap();
        // dyadic endpoints and counts keep the two shared samples bit-identical
        let large = TrainingGround::new(
            Axis::point(1.0).unwrap(),
            Axis::point(1.0).unwrap(),
            vec![Axis::new(0.0625, 0.25, 4).unwrap(), Axis::point(0.0).unwrap()],
            p_list,
            1e-3,
        )
        .unwrap();
        assert_eq!(
            large.alpha()[0].samples()[..2],
            small.alpha()[0].samples()[..],
            "nested grids must share samples exactly"
        );
        let opts = loose_opts();
        let bests = compare_grounds(&pair, &[small, large], &opts).unwrap();
        assert!(bests[1].assessment <= bests[0].assessment);
    }

    #[test]
    fn grid_search_is_deterministic_and_thread_count_invariant() {
        let pair = tiny_pair(7, 0.09, 3);
        let ground = TrainingGround::new(
            Axis::new(1.0, 1.5, 2).unwrap(),
            Axis::point(1.0).unwrap(),
            vec![Axis::point(0.05).unwrap(), Axis::point(0.0).unwrap()],
            vec![vec![p2()], vec![p2()]],
            1e-3,
        )
        .unwrap();
        let opts = loose_opts();
        let (_, t1) = grid_search_with_threads(&pair, &ground, &opts, Some(1)).unwrap();
        let (_, t2) = grid_search_with_threads(&pair, &ground, &opts, Some(2)).unwrap();
        let (_, t3) = grid_search_with_threads(&pair, &ground, &opts, Some(1)).unwrap();
        for (a, b) in t1.iter().zip(t2.iter()) {
            assert_eq!(a.assessment, b.assessment);
            assert_eq!(a.report.iterations, b.report.iterations);
        }
        for (a, b) in t1.iter().zip(t3.iter()) {
            assert_eq!(a.assessment, b.assessment);
        }
    }

    #[test]
    fn recomputing_the_best_tuple_reproduces_its_assessment() {
        let pair = tiny_pair(8, 0.1, 19);
        let ground = TrainingGround::new(
            Axis::new(1.0, 1.5, 2).unwrap(),
            Axis::point(1.0).unwrap(),
            vec![Axis::new(0.03125, 0.125, 2).unwrap(), Axis::point(0.0).unwrap()],
            vec![vec![p2()], vec![p2()]],
            1e-3,
        )
        .unwrap();
        let opts = loose_opts();
        let (best, _) = grid_search(&pair, &ground, &opts).unwrap();
        let spec = RvlSpec::new(
            FracOrder::new(best.params.r1).unwrap(),
            FracOrder::new(best.params.r2).unwrap(),
            best.params.alpha.clone(),
            best.params.p.clone(),
            ground.kappa(),
        )
        .unwrap();
        let (u, _, _) = solve_rvl_denoise(pair.noisy(), &spec, &opts).unwrap();
        let again = assessment(&u, pair.clean()).unwrap();
        assert!(
            (again - best.assessment).abs() <= 1e-10,
            "recomputation drifted: {again} vs {}",
            best.assessment
        );
    }

    #[test]
    fn landscape_is_row_major_over_the_free_axes() {
        let pair = tiny_pair(7, 0.08, 5);
        let alpha0 = Axis::new(0.03125, 0.0625, 2).unwrap();
        let r1 = Axis::new(1.0, 1.5, 3).unwrap();
        let ground = TrainingGround::new(
            r1,
            Axis::point(1.0).unwrap(),
            vec![alpha0, Axis::point(0.0).unwrap()],
            vec![vec![p2()], vec![p2()]],
            1e-3,
        )
        .unwrap();
        let opts = loose_opts();
        let scape = landscape(&pair, &ground, &opts).unwrap();
        assert_eq!(scape.rows, 2);
        assert_eq!(scape.cols, 3);
        assert_eq!(scape.row_label.as_deref(), Some("alpha0"));
        assert_eq!(scape.col_label.as_deref(), Some("r1"));
        let a_samples = alpha0.samples();
        let r_samples = r1.samples();
        for (i, _) in a_samples.iter().enumerate() {
            for (j, _) in r_samples.iter().enumerate() {
                let rec = &scape.records[i * scape.cols + j];
                assert_eq!(rec.params.alpha[0], a_samples[i]);
                assert_eq!(rec.params.r1, r_samples[j]);
                assert_eq!(scape.value(i, j), rec.assessment);
            }
        }
        // the landscape minimum and the grid-search optimum are the same scan
        let (best, _) = grid_search(&pair, &ground, &opts).unwrap();
        assert_eq!(scape.min_assessment(), best.assessment);
    }

    #[test]
    fn landscape_handles_degenerate_and_oversized_grids() {
        let pair = tiny_pair(7, 0.08, 9);
        let frozen = TrainingGround::new(
            Axis::point(1.0).unwrap(),
            Axis::point(1.0).unwrap(),
            vec![Axis::point(0.05).unwrap(), Axis::point(0.0).unwrap()],
            vec![vec![p2()], vec![p2()]],
            1e-3,
        )
        .unwrap();
        let opts = loose_opts();
        let scape = landscape(&pair, &frozen, &opts).unwrap();
        assert_eq!((scape.rows, scape.cols), (1, 1));
        assert_eq!(scape.records.len(), 1);

        let three_free = TrainingGround::new(
            Axis::new(1.0, 1.5, 2).unwrap(),
            Axis::point(1.0).unwrap(),
            vec![Axis::new(0.03125, 0.0625, 2).unwrap(), Axis::point(0.0).unwrap()],
            vec![vec![p2(), LpExponent::infinity()], vec![p2()]],
            1e-3,
        )
        .unwrap();
        let err = landscape(&pair, &three_free, &opts).unwrap_err();
        assert!(matches!(err, FractvError::InvalidArgument(_)));
    }

    #[test]
    fn grid_search_rejects_an_unconverged_winner() {
        let pair = tiny_pair(7, 0.08, 13);
        let ground = TrainingGround::new(
            Axis::point(1.25).unwrap(),
            Axis::point(1.0).unwrap(),
            vec![Axis::point(0.1).unwrap(), Axis::point(0.0).unwrap()],
            vec![vec![p2()], vec![p2()]],
            1e-3,
        )
        .unwrap();
        let opts = SolverOptions { max_iters: 3, tol: 1e-14, ..SolverOptions::default() };
        let err = grid_search(&pair, &ground, &opts).unwrap_err();
        assert!(matches!(err, FractvError::OptimumNotConverged(_)));
    }

    #[test]
    fn ties_resolve_to_the_lexicographically_smallest_tuple() {
        // With alpha0 = 0 the mass term vanishes and the solve is identical
        // for every r1 with the same integer part and for every exponent, so
        // all grid points tie exactly.
        let pair = tiny_pair(7, 0.08, 21);
        let ground = TrainingGround::new(
            Axis::new(1.0, 1.5, 2).unwrap(),
            Axis::point(1.0).unwrap(),
            vec![Axis::point(0.0).unwrap(), Axis::point(0.0).unwrap()],
            // deliberately unsorted input list: must come back sorted, inf last
            vec![vec![LpExponent::infinity(), p2()], vec![p2()]],
            1e-3,
        )
        .unwrap();
        assert_eq!(ground.p()[0], vec![p2(), LpExponent::infinity()]);
        let opts = loose_opts();
        let (best, table) = grid_search(&pair, &ground, &opts).unwrap();
        assert_eq!(table.len(), 4);
        let first = table[0].assessment;
        assert!(table.iter().all(|r| r.assessment == first), "grid points must tie");
        assert_eq!(best.params.r1, 1.0);
        assert_eq!(best.params.p[0], p2());
    }

    #[test]
    fn training_pair_requires_reduced_matching_images() {
        let a = Image::new(4, 4, 1.0 / 3.0, vec![0.0; 16]).unwrap();
        let b = Image::new(5, 5, 0.25, vec![0.0; 25]).unwrap();
        assert!(TrainingPair::new(a.clone(), b).is_err());
        let mut dirty = a.clone();
        dirty.set(0, 0, 1.0);
        assert!(TrainingPair::new(a.clone(), dirty).is_err());
        assert!(TrainingPair::new(a.clone(), a).is_ok());
    }
}
