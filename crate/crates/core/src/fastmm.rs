//! Strassen and Winograd-variant recursive multiplication.
//!
//! Odd dimensions are handled per level and per dimension. By default an odd
//! size `d` with `d % 4 == 3` is padded with a zero row/column to `d + 1`,
//! while `d % 4 == 1` is peeled to `d - 1`: the even core goes through the
//! seven half-size products and the peeled row, column or inner slice is
//! fixed up with inner products. [`OddDimPolicy::PadOnly`] pads every odd
//! size instead. Recursion stops once `min(m, l, n) <= n_min`, where the
//! three-loop product takes over.

use std::fmt;
use std::str::FromStr;

use crate::densemat::{
    addsub_assign, addsub_views, block_mul_views, check_inner, simple_mul_views, AddSub,
    MPMatrix, MatrixView,
};
use crate::error::{Error, Result};
use crate::opmodel::OpCounter;
use crate::precision::PrecisionContext;
use rug::Assign;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FastAlgorithm {
    Strassen,
    Winograd,
}

impl fmt::Display for FastAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FastAlgorithm::Strassen => "strassen",
            FastAlgorithm::Winograd => "winograd",
        })
    }
}

/// How an odd dimension is made even before a split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum OddDimPolicy {
    /// Always append a zero row/column.
    PadOnly,
    /// Pad when `d % 4 == 3`, peel the last row/column when `d % 4 == 1`,
    /// so the even core has the larger power-of-two factor.
    #[default]
    PadOrPeel,
}

/// What happens to one dimension at a split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DimAction {
    Keep,
    Pad,
    Peel,
}

impl DimAction {
    /// Size of the even core.
    pub fn core(self, d: usize) -> usize {
        match self {
            DimAction::Keep => d,
            DimAction::Pad => d + 1,
            DimAction::Peel => d - 1,
        }
    }

    /// How much of the real dimension the core covers.
    pub fn covered(self, d: usize) -> usize {
        if self == DimAction::Peel { d - 1 } else { d }
    }
}

impl OddDimPolicy {
    pub fn action(self, d: usize) -> DimAction {
        match (d % 2, self) {
            (0, _) => DimAction::Keep,
            (_, OddDimPolicy::PadOrPeel) if d % 4 == 1 && d > 1 => DimAction::Peel,
            _ => DimAction::Pad,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FastMMConfig {
    pub algorithm: FastAlgorithm,
    /// Recursion stops once the smallest dimension is at or below this value.
    pub n_min: usize,
    pub odd_policy: OddDimPolicy,
}

impl FastMMConfig {
    pub fn new(algorithm: FastAlgorithm, n_min: usize) -> Result<Self> {
        if n_min == 0 {
            return Err(Error::InvalidArgument("n_min must be >= 1".into()));
        }
        Ok(FastMMConfig { algorithm, n_min, odd_policy: OddDimPolicy::default() })
    }

    pub fn with_policy(mut self, odd_policy: OddDimPolicy) -> Self {
        self.odd_policy = odd_policy;
        self
    }
}

/// Intermediate products of one Strassen level.
#[derive(Clone, Debug)]
pub struct StrassenWorkspace {
    /// `P1` through `P7`.
    pub p: Vec<MPMatrix>,
}

/// Intermediates of one Winograd level, recorded in evaluation order.
#[derive(Clone, Debug)]
pub struct WinogradWorkspace {
    /// `S1` through `S8`.
    pub s: Vec<MPMatrix>,
    /// `M1` through `M7`.
    pub m: Vec<MPMatrix>,
    pub t1: MPMatrix,
    pub t2: MPMatrix,
}

/// Intermediates captured from the top recursion level.
#[derive(Clone, Debug)]
pub enum LevelWorkspace {
    Strassen(StrassenWorkspace),
    Winograd(WinogradWorkspace),
}

/// Appends a zero row and/or column to make both dimensions even.
pub fn pad_even(a: &MPMatrix) -> MPMatrix {
    pad_view(a.as_view(), a.rows().next_multiple_of(2), a.cols().next_multiple_of(2))
}

fn pad_view(a: MatrixView<'_>, rows: usize, cols: usize) -> MPMatrix {
    let mut out = MPMatrix::zeros_unchecked(rows, cols, a.bits());
    out.set_block(0, 0, a);
    out
}

/// Recursive product `A * B` with the selected algorithm.
///
/// The returned counter tallies every scalar operation performed, including
/// those on padded zeros and peeling fix-ups, and equals
/// [`crate::opmodel::count_fast_with_policy`] for `cfg.odd_policy`.
pub fn fast_mul(
    a: &MPMatrix,
    b: &MPMatrix,
    cfg: FastMMConfig,
    ctx: PrecisionContext,
) -> Result<(MPMatrix, OpCounter)> {
    check_inner(a.as_view(), b.as_view())?;
    let mut counter = OpCounter::default();
    let c = recurse(a.as_view(), b.as_view(), cfg, ctx, &mut counter);
    Ok((c, counter))
}

/// Like [`fast_mul`], but always splits the top level (even when the
/// threshold would stop it) and returns that level's intermediates.
/// Sub-products still follow the normal recursion rule.
pub fn fast_mul_traced(
    a: &MPMatrix,
    b: &MPMatrix,
    cfg: FastMMConfig,
    ctx: PrecisionContext,
) -> Result<(MPMatrix, OpCounter, LevelWorkspace)> {
    check_inner(a.as_view(), b.as_view())?;
    if a.rows() < 2 || a.cols() < 2 || b.cols() < 2 {
        return Err(Error::Dimension("a traced split needs every dimension >= 2".into()));
    }
    let mut counter = OpCounter::default();
    let mut trace = None;
    let c = split(a.as_view(), b.as_view(), cfg, ctx, &mut counter, Some(&mut trace));
    Ok((c, counter, trace.expect("split records its workspace")))
}

fn recurse(
    a: MatrixView<'_>,
    b: MatrixView<'_>,
    cfg: FastMMConfig,
    ctx: PrecisionContext,
    counter: &mut OpCounter,
) -> MPMatrix {
    let (m, l, n) = (a.rows(), a.cols(), b.cols());
    if m.min(l).min(n) <= cfg.n_min {
        return simple_mul_views(a, b, ctx, counter);
    }
    split(a, b, cfg, ctx, counter, None)
}

struct Quadrants<'a> {
    q11: MatrixView<'a>,
    q12: MatrixView<'a>,
    q21: MatrixView<'a>,
    q22: MatrixView<'a>,
}

fn quadrants(v: MatrixView<'_>) -> Quadrants<'_> {
    let (h, w) = (v.rows() / 2, v.cols() / 2);
    Quadrants {
        q11: v.sub(0, 0, h, w),
        q12: v.sub(0, w, h, w),
        q21: v.sub(h, 0, h, w),
        q22: v.sub(h, w, h, w),
    }
}

fn split(
    a: MatrixView<'_>,
    b: MatrixView<'_>,
    cfg: FastMMConfig,
    ctx: PrecisionContext,
    counter: &mut OpCounter,
    trace: Option<&mut Option<LevelWorkspace>>,
) -> MPMatrix {
    let (m, l, n) = (a.rows(), a.cols(), b.cols());
    let [am, al, an] = [m, l, n].map(|d| cfg.odd_policy.action(d));
    let (mc, lc, nc) = (am.core(m), al.core(l), an.core(n));
    let (me, le, ne) = (am.covered(m), al.covered(l), an.covered(n));

    let a_core = a.sub(0, 0, me, le);
    let b_core = b.sub(0, 0, le, ne);
    let a_pad = (mc != me || lc != le).then(|| pad_view(a_core, mc, lc));
    let b_pad = (lc != le || nc != ne).then(|| pad_view(b_core, lc, nc));
    let qa = quadrants(a_pad.as_ref().map_or(a_core, MPMatrix::as_view));
    let qb = quadrants(b_pad.as_ref().map_or(b_core, MPMatrix::as_view));

    let [c11, c12, c21, c22] = match cfg.algorithm {
        FastAlgorithm::Strassen => strassen_level(&qa, &qb, cfg, ctx, counter, trace),
        FastAlgorithm::Winograd => winograd_level(&qa, &qb, cfg, ctx, counter, trace),
    };
    drop((a_pad, b_pad));

    // assemble the covered part and strip padding
    let (hm, hn) = (mc / 2, nc / 2);
    let mut c = MPMatrix::zeros_unchecked(m, n, ctx.bits());
    c.set_block(0, 0, c11.as_view());
    c.set_block(0, hn, c12.as_view().sub(0, 0, hm, ne - hn));
    c.set_block(hm, 0, c21.as_view().sub(0, 0, me - hm, hn));
    c.set_block(hm, hn, c22.as_view().sub(0, 0, me - hm, ne - hn));

    if al == DimAction::Peel {
        // rank-one update with the peeled inner column/row
        let col = a.sub(0, l - 1, me, 1);
        let row = b.sub(l - 1, 0, 1, ne);
        let mut term = rug::Float::new(ctx.bits());
        for i in 0..me {
            let x = col.get(i, 0).as_float();
            for j in 0..ne {
                term.assign(x * row.get(0, j).as_float());
                c[(i, j)].0 += &term;
            }
        }
        counter.mul += (me * ne) as u64;
        counter.addsub += (me * ne) as u64;
    }
    if an == DimAction::Peel {
        let col = simple_mul_views(a.sub(0, 0, me, l), b.sub(0, n - 1, l, 1), ctx, counter);
        c.set_block(0, n - 1, col.as_view());
    }
    if am == DimAction::Peel {
        let row = simple_mul_views(a.sub(m - 1, 0, 1, l), b, ctx, counter);
        c.set_block(m - 1, 0, row.as_view());
    }
    c
}

fn strassen_level(
    a: &Quadrants<'_>,
    b: &Quadrants<'_>,
    cfg: FastMMConfig,
    ctx: PrecisionContext,
    counter: &mut OpCounter,
    trace: Option<&mut Option<LevelWorkspace>>,
) -> [MPMatrix; 4] {
    use AddSub::{Add, Sub};
    let op = |x: AddSub, p: MatrixView<'_>, q: MatrixView<'_>, c: &mut OpCounter| {
        addsub_views(x, p, q, ctx, c)
    };

    let p1 = {
        let s = op(Add, a.q11, a.q22, counter);
        let t = op(Add, b.q11, b.q22, counter);
        recurse(s.as_view(), t.as_view(), cfg, ctx, counter)
    };
    let p2 = {
        let s = op(Add, a.q21, a.q22, counter);
        recurse(s.as_view(), b.q11, cfg, ctx, counter)
    };
    let p3 = {
        let t = op(Sub, b.q12, b.q22, counter);
        recurse(a.q11, t.as_view(), cfg, ctx, counter)
    };
    let p4 = {
        let t = op(Sub, b.q21, b.q11, counter);
        recurse(a.q22, t.as_view(), cfg, ctx, counter)
    };
    let p5 = {
        let s = op(Add, a.q11, a.q12, counter);
        recurse(s.as_view(), b.q22, cfg, ctx, counter)
    };
    let p6 = {
        let s = op(Sub, a.q21, a.q11, counter);
        let t = op(Add, b.q11, b.q12, counter);
        recurse(s.as_view(), t.as_view(), cfg, ctx, counter)
    };
    let p7 = {
        let s = op(Sub, a.q12, a.q22, counter);
        let t = op(Add, b.q21, b.q22, counter);
        recurse(s.as_view(), t.as_view(), cfg, ctx, counter)
    };

    if let Some(slot) = trace {
        *slot = Some(LevelWorkspace::Strassen(StrassenWorkspace {
            p: vec![p1.clone(), p2.clone(), p3.clone(), p4.clone(), p5.clone(), p6.clone(), p7.clone()],
        }));
    }

    // C11 = P1 + P4 - P5 + P7
    let mut c11 = op(Add, p1.as_view(), p4.as_view(), counter);
    addsub_assign(Sub, &mut c11, p5.as_view(), counter);
    addsub_assign(Add, &mut c11, p7.as_view(), counter);
    // C12 = P3 + P5
    let c12 = op(Add, p3.as_view(), p5.as_view(), counter);
    // C21 = P2 + P4
    let c21 = op(Add, p2.as_view(), p4.as_view(), counter);
    // C22 = P1 + P3 - P2 + P6
    let mut c22 = op(Add, p1.as_view(), p3.as_view(), counter);
    addsub_assign(Sub, &mut c22, p2.as_view(), counter);
    addsub_assign(Add, &mut c22, p6.as_view(), counter);
    [c11, c12, c21, c22]
}

fn winograd_level(
    a: &Quadrants<'_>,
    b: &Quadrants<'_>,
    cfg: FastMMConfig,
    ctx: PrecisionContext,
    counter: &mut OpCounter,
    trace: Option<&mut Option<LevelWorkspace>>,
) -> [MPMatrix; 4] {
    use AddSub::{Add, Sub};
    let op = |x: AddSub, p: MatrixView<'_>, q: MatrixView<'_>, c: &mut OpCounter| {
        addsub_views(x, p, q, ctx, c)
    };

    // step 1: pre-additions
    let s1 = op(Add, a.q21, a.q22, counter);
    let s2 = op(Sub, s1.as_view(), a.q11, counter);
    let s3 = op(Sub, a.q11, a.q21, counter);
    let s4 = op(Sub, a.q12, s2.as_view(), counter);
    let s5 = op(Sub, b.q12, b.q11, counter);
    let s6 = op(Sub, b.q22, s5.as_view(), counter);
    let s7 = op(Sub, b.q22, b.q12, counter);
    let s8 = op(Sub, s6.as_view(), b.q21, counter);
    let saved_s = trace
        .is_some()
        .then(|| vec![s1.clone(), s2.clone(), s3.clone(), s4.clone(), s5.clone(), s6.clone(), s7.clone(), s8.clone()]);

    // step 2: seven products
    let m1 = recurse(s2.as_view(), s6.as_view(), cfg, ctx, counter);
    drop((s2, s6));
    let m2 = recurse(a.q11, b.q11, cfg, ctx, counter);
    let m3 = recurse(a.q12, b.q21, cfg, ctx, counter);
    let m4 = recurse(s3.as_view(), s7.as_view(), cfg, ctx, counter);
    drop((s3, s7));
    let m5 = recurse(s1.as_view(), s5.as_view(), cfg, ctx, counter);
    drop((s1, s5));
    let m6 = recurse(s4.as_view(), b.q22, cfg, ctx, counter);
    drop(s4);
    let m7 = recurse(a.q22, s8.as_view(), cfg, ctx, counter);
    drop(s8);
    let saved_m = trace.is_some().then(|| {
        vec![m1.clone(), m2.clone(), m3.clone(), m4.clone(), m5.clone(), m6.clone(), m7.clone()]
    });

    // step 3: T1 = M1 + M2, T2 = T1 + M4
    let t1 = op(Add, m1.as_view(), m2.as_view(), counter);
    drop(m1);
    let t2 = op(Add, t1.as_view(), m4.as_view(), counter);
    drop(m4);

    if let Some(slot) = trace {
        *slot = Some(LevelWorkspace::Winograd(WinogradWorkspace {
            s: saved_s.expect("saved when tracing"),
            m: saved_m.expect("saved when tracing"),
            t1: t1.clone(),
            t2: t2.clone(),
        }));
    }

    // C11 = M2 + M3
    let c11 = op(Add, m2.as_view(), m3.as_view(), counter);
    // C12 = T1 + M5 + M6
    let mut c12 = t1;
    addsub_assign(Add, &mut c12, m5.as_view(), counter);
    addsub_assign(Add, &mut c12, m6.as_view(), counter);
    // C21 = T2 - M7
    let c21 = op(Sub, t2.as_view(), m7.as_view(), counter);
    // C22 = T2 + M5
    let mut c22 = t2;
    addsub_assign(Add, &mut c22, m5.as_view(), counter);
    [c11, c12, c21, c22]
}

/// One recursion level of the split/pad decision chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecursionStep {
    pub level: usize,
    /// `(m, l, n)` on entry to this level.
    pub dims: (usize, usize, usize),
    /// Even core dimensions after padding or peeling; equal to `dims` for a base case.
    pub core: (usize, usize, usize),
    /// Per-dimension decision for `m`, `l`, `n`.
    pub actions: [DimAction; 3],
    pub base_case: bool,
}

/// Split/pad/peel decisions for an `m x l` by `l x n` product. All seven
/// sub-products of a level share one shape, so the trace is a single chain
/// ending in the base case.
pub fn fast_mul_rect_check(m: usize, l: usize, n: usize, cfg: FastMMConfig) -> Vec<RecursionStep> {
    let mut steps = Vec::new();
    let mut dims = (m, l, n);
    for level in 0.. {
        let (m, l, n) = dims;
        if m.min(l).min(n) <= cfg.n_min {
            steps.push(RecursionStep { level, dims, core: dims, actions: [DimAction::Keep; 3], base_case: true });
            break;
        }
        let actions = [m, l, n].map(|d| cfg.odd_policy.action(d));
        let core = (actions[0].core(m), actions[1].core(l), actions[2].core(n));
        steps.push(RecursionStep { level, dims, core, actions, base_case: false });
        dims = (core.0 / 2, core.1 / 2, core.2 / 2);
    }
    steps
}

/// Multiplication kernel selector shared by the benchmark driver and the
/// blocked LU Schur update.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MulKernel {
    Simple,
    Block,
    Strassen,
    Winograd,
}

impl MulKernel {
    pub const ALL: [MulKernel; 4] =
        [MulKernel::Simple, MulKernel::Block, MulKernel::Strassen, MulKernel::Winograd];

    pub fn name(self) -> &'static str {
        match self {
            MulKernel::Simple => "simple",
            MulKernel::Block => "block",
            MulKernel::Strassen => "strassen",
            MulKernel::Winograd => "winograd",
        }
    }
}

impl fmt::Display for MulKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MulKernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(MulKernel::Simple),
            "block" => Ok(MulKernel::Block),
            "strassen" => Ok(MulKernel::Strassen),
            "winograd" => Ok(MulKernel::Winograd),
            other => Err(Error::InvalidArgument(format!("unknown kernel {other:?}"))),
        }
    }
}

/// `A * B` with any of the four kernels. `n_min` is the block edge for
/// [`MulKernel::Block`] and the recursion threshold for the fast kernels.
pub fn multiply(
    kernel: MulKernel,
    a: &MPMatrix,
    b: &MPMatrix,
    n_min: usize,
    ctx: PrecisionContext,
) -> Result<(MPMatrix, OpCounter)> {
    multiply_views(kernel, a.as_view(), b.as_view(), n_min, ctx)
}

pub(crate) fn multiply_views(
    kernel: MulKernel,
    a: MatrixView<'_>,
    b: MatrixView<'_>,
    n_min: usize,
    ctx: PrecisionContext,
) -> Result<(MPMatrix, OpCounter)> {
    check_inner(a, b)?;
    let mut counter = OpCounter::default();
    let c = match kernel {
        MulKernel::Simple => simple_mul_views(a, b, ctx, &mut counter),
        MulKernel::Block => block_mul_views(a, b, n_min, ctx, &mut counter)?,
        MulKernel::Strassen | MulKernel::Winograd => {
            let algorithm = if kernel == MulKernel::Strassen {
                FastAlgorithm::Strassen
            } else {
                FastAlgorithm::Winograd
            };
            let cfg = FastMMConfig::new(algorithm, n_min)?;
            recurse(a, b, cfg, ctx, &mut counter)
        }
    };
    Ok((c, counter))
}
