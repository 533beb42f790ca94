//! Dense multiple-precision matrices, views, and the two classical
//! multiplication algorithms (three-loop and block).
//!
//! Formulas and documentation use 1-based indices `(i, j)`; the Rust
//! accessors (`get`, `Index`) are 0-based like every other Rust container.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut};

use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::opmodel::OpCounter;
use crate::precision::{rel_error, MPScalar, PrecisionContext};

/// Dense row-major matrix whose elements all share one precision.
#[derive(Clone, Debug)]
pub struct MPMatrix {
    rows: usize,
    cols: usize,
    bits: u32,
    data: Vec<MPScalar>,
}

/// Element-wise operation selector for [`mat_addsub`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddSub {
    Add,
    Sub,
}

impl MPMatrix {
    /// Builds an `m x n` matrix from `f(i, j)` with 1-based `i, j`, rounding each value to `ctx`.
    pub fn from_fn<F>(m: usize, n: usize, ctx: PrecisionContext, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> MPScalar,
    {
        check_dims(m, n)?;
        let mut data = Vec::with_capacity(m * n);
        for i in 1..=m {
            for j in 1..=n {
                let v = f(i, j);
                data.push(ctx.round(&v));
            }
        }
        Ok(MPMatrix { rows: m, cols: n, bits: ctx.bits(), data })
    }

    pub fn zeros(m: usize, n: usize, ctx: PrecisionContext) -> Result<Self> {
        check_dims(m, n)?;
        Ok(Self::zeros_unchecked(m, n, ctx.bits()))
    }

    pub(crate) fn zeros_unchecked(m: usize, n: usize, bits: u32) -> Self {
        let data = (0..m * n).map(|_| MPScalar(Float::new(bits))).collect();
        MPMatrix { rows: m, cols: n, bits, data }
    }

    pub fn identity(n: usize, ctx: PrecisionContext) -> Result<Self> {
        Self::from_fn(n, n, ctx, |i, j| ctx.from_i64(i64::from(i == j)))
    }

    /// Matrix from integer rows; all rows must have equal length.
    pub fn from_i64_rows(rows: &[Vec<i64>], ctx: PrecisionContext) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("ragged integer rows".into()));
        }
        Self::from_fn(m, n, ctx, |i, j| ctx.from_i64(rows[i - 1][j - 1]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn context(&self) -> PrecisionContext {
        PrecisionContext::new(self.bits).expect("matrix precision is always valid")
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &MPScalar {
        &self.data[i * self.cols + j]
    }

    /// Stores `v` at `(i, j)` after rounding it to the matrix precision.
    pub fn set(&mut self, i: usize, j: usize, v: &MPScalar) {
        self.data[i * self.cols + j].0.assign(&v.0);
    }

    pub fn elements(&self) -> &[MPScalar] {
        &self.data
    }

    pub(crate) fn elements_mut(&mut self) -> &mut [MPScalar] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[MPScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_view(&self) -> MatrixView<'_> {
        MatrixView { parent: self, i0: 0, j0: 0, h: self.rows, w: self.cols }
    }

    /// Sub-block with 0-based origin `(i0, j0)` and size `h x w`.
    pub fn view(&self, i0: usize, j0: usize, h: usize, w: usize) -> Result<MatrixView<'_>> {
        if h == 0 || w == 0 || i0 + h > self.rows || j0 + w > self.cols {
            return Err(Error::Dimension(format!(
                "view {h}x{w} at ({i0},{j0}) exceeds {}x{} parent",
                self.rows, self.cols
            )));
        }
        Ok(MatrixView { parent: self, i0, j0, h, w })
    }

    /// Copies this matrix rounded to `ctx`.
    pub fn round_to(&self, ctx: PrecisionContext) -> MPMatrix {
        MPMatrix {
            rows: self.rows,
            cols: self.cols,
            bits: ctx.bits(),
            data: self.data.iter().map(|v| ctx.round(v)).collect(),
        }
    }

    /// Overwrites the block at `(i0, j0)` with `src` (rounded to this precision).
    pub fn set_block(&mut self, i0: usize, j0: usize, src: MatrixView<'_>) {
        debug_assert!(i0 + src.h <= self.rows && j0 + src.w <= self.cols);
        for i in 0..src.h {
            for j in 0..src.w {
                self.data[(i0 + i) * self.cols + j0 + j].0.assign(&src.get(i, j).0);
            }
        }
    }

    /// Same shape, same precision, and bit-identical elements.
    pub fn bit_eq(&self, other: &MPMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.bits == other.bits
            && self.data.iter().zip(&other.data).all(|(a, b)| a.bit_eq(b))
    }

    /// Serializes in the `mpmat` text format: a header line
    /// `mpmat <m> <n> <bits>` followed by `m` lines of `n` hex literals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "mpmat {} {} {}", self.rows, self.cols, self.bits).unwrap();
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(MPScalar::to_hex).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the `mpmat` text format. Error positions are byte offsets into `text`.
    pub fn from_text(text: &str) -> Result<MPMatrix> {
        let perr = |position: usize, message: String| Error::Parse { position, message };
        let mut offset = 0;
        let mut lines = text.split_inclusive('\n').map(|l| {
            let start = offset;
            offset += l.len();
            (start, l.trim_end_matches(['\n', '\r']))
        });

        let (_, header) = lines.next().ok_or_else(|| perr(0, "missing header".into()))?;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 4 || fields[0] != "mpmat" {
            return Err(perr(0, "expected header \"mpmat <m> <n> <bits>\"".into()));
        }
        let num = |k: usize| -> Result<u64> {
            fields[k]
                .parse::<u64>()
                .map_err(|_| perr(0, format!("invalid header field {:?}", fields[k])))
        };
        let (m, n, bits) = (num(1)? as usize, num(2)? as usize, num(3)?);
        check_dims(m, n)?;
        let bits = u32::try_from(bits).map_err(|_| Error::InvalidPrecision(u32::MAX))?;
        let ctx = PrecisionContext::new(bits)?;

        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            let (start, line) = lines
                .next()
                .ok_or_else(|| perr(text.len(), format!("missing row {}", i + 1)))?;
            let mut col = 0;
            let mut tok_start = 0;
            for tok in line.split(' ') {
                let at = start + tok_start;
                if col == n {
                    return Err(perr(at, format!("row {} has more than {n} entries", i + 1)));
                }
                let v = ctx.parse_hex(tok).map_err(|e| match e {
                    Error::Parse { position, message } => perr(at + position, message),
                    other => other,
                })?;
                data.push(v);
                col += 1;
                tok_start += tok.len() + 1;
            }
            if col != n {
                return Err(perr(start, format!("row {} has {col} entries, expected {n}", i + 1)));
            }
        }
        for (start, line) in lines {
            if !line.trim().is_empty() {
                return Err(perr(start, "trailing content after last row".into()));
            }
        }
        Ok(MPMatrix { rows: m, cols: n, bits, data })
    }
}

impl Index<(usize, usize)> for MPMatrix {
    type Output = MPScalar;
    fn index(&self, (i, j): (usize, usize)) -> &MPScalar {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for MPMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut MPScalar {
        &mut self.data[i * self.cols + j]
    }
}

/// Read-only rectangular window onto a parent matrix.
#[derive(Clone, Copy, Debug)]
pub struct MatrixView<'a> {
    parent: &'a MPMatrix,
    i0: usize,
    j0: usize,
    h: usize,
    w: usize,
}

impl<'a> MatrixView<'a> {
    pub fn rows(&self) -> usize {
        self.h
    }

    pub fn cols(&self) -> usize {
        self.w
    }

    pub fn bits(&self) -> u32 {
        self.parent.bits
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &'a MPScalar {
        debug_assert!(i < self.h && j < self.w);
        &self.parent.data[(self.i0 + i) * self.parent.cols + self.j0 + j]
    }

    /// Sub-view relative to this view's origin.
    pub fn view(&self, i0: usize, j0: usize, h: usize, w: usize) -> Result<MatrixView<'a>> {
        if h == 0 || w == 0 || i0 + h > self.h || j0 + w > self.w {
            return Err(Error::Dimension(format!(
                "view {h}x{w} at ({i0},{j0}) exceeds {}x{} view",
                self.h, self.w
            )));
        }
        Ok(MatrixView { parent: self.parent, i0: self.i0 + i0, j0: self.j0 + j0, h, w })
    }

    pub(crate) fn sub(&self, i0: usize, j0: usize, h: usize, w: usize) -> MatrixView<'a> {
        debug_assert!(i0 + h <= self.h && j0 + w <= self.w);
        MatrixView { parent: self.parent, i0: self.i0 + i0, j0: self.j0 + j0, h, w }
    }

    pub fn to_matrix(&self) -> MPMatrix {
        let mut data = Vec::with_capacity(self.h * self.w);
        for i in 0..self.h {
            for j in 0..self.w {
                data.push(self.get(i, j).clone());
            }
        }
        MPMatrix { rows: self.h, cols: self.w, bits: self.parent.bits, data }
    }
}

/// Block-grid geometry for [`block_mul`]: edge `n_min` and
/// `M = ceil(m / n_min)`, `L = ceil(l / n_min)`, `N = ceil(n / n_min)` blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockingScheme {
    pub n_min: usize,
    pub grid_m: usize,
    pub grid_l: usize,
    pub grid_n: usize,
}

impl BlockingScheme {
    pub fn new(m: usize, l: usize, n: usize, n_min: usize) -> Result<Self> {
        if n_min == 0 {
            return Err(Error::InvalidArgument("block edge n_min must be >= 1".into()));
        }
        if m == 0 || l == 0 || n == 0 {
            return Err(Error::Dimension("zero dimension".into()));
        }
        Ok(BlockingScheme {
            n_min,
            grid_m: m.div_ceil(n_min),
            grid_l: l.div_ceil(n_min),
            grid_n: n.div_ceil(n_min),
        })
    }

    /// `(start, len)` of 0-based block `k` along an axis of length `dim`.
    pub fn span(&self, k: usize, dim: usize) -> (usize, usize) {
        let start = k * self.n_min;
        (start, self.n_min.min(dim - start))
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Dimension(format!("matrix dimensions must be positive, got {m}x{n}")));
    }
    Ok(())
}

fn check_same_shape(a: MatrixView<'_>, b: MatrixView<'_>) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Dimension(format!(
            "shape mismatch {}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

pub(crate) fn check_inner(a: MatrixView<'_>, b: MatrixView<'_>) -> Result<()> {
    if a.cols() != b.rows() {
        return Err(Error::Dimension(format!(
            "inner dimensions differ: {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// Element-wise `A + B` or `A - B`, each element rounded at the shared precision.
pub fn mat_addsub(op: AddSub, a: &MPMatrix, b: &MPMatrix) -> Result<MPMatrix> {
    check_same_shape(a.as_view(), b.as_view())?;
    if a.bits != b.bits {
        return Err(Error::Dimension(format!(
            "precision mismatch: {} vs {} bits",
            a.bits, b.bits
        )));
    }
    let mut counter = OpCounter::default();
    Ok(addsub_views(op, a.as_view(), b.as_view(), a.context(), &mut counter))
}

pub(crate) fn addsub_views(
    op: AddSub,
    a: MatrixView<'_>,
    b: MatrixView<'_>,
    ctx: PrecisionContext,
    counter: &mut OpCounter,
) -> MPMatrix {
    debug_assert!(a.rows() == b.rows() && a.cols() == b.cols());
    let (h, w) = (a.rows(), a.cols());
    let mut data = Vec::with_capacity(h * w);
    for i in 0..h {
        for j in 0..w {
            let (x, y) = (&a.get(i, j).0, &b.get(i, j).0);
            let v = match op {
                AddSub::Add => Float::with_val(ctx.bits(), x + y),
                AddSub::Sub => Float::with_val(ctx.bits(), x - y),
            };
            data.push(MPScalar(v));
        }
    }
    counter.addsub += (h * w) as u64;
    MPMatrix { rows: h, cols: w, bits: ctx.bits(), data }
}

/// In-place `target (op)= other`, rounded at the target precision.
pub(crate) fn addsub_assign(
    op: AddSub,
    target: &mut MPMatrix,
    other: MatrixView<'_>,
    counter: &mut OpCounter,
) {
    debug_assert!(target.rows == other.rows() && target.cols == other.cols());
    for i in 0..target.rows {
        for j in 0..target.cols {
            let t = &mut target.data[i * target.cols + j].0;
            match op {
                AddSub::Add => *t += &other.get(i, j).0,
                AddSub::Sub => *t -= &other.get(i, j).0,
            }
        }
    }
    counter.addsub += (target.rows * target.cols) as u64;
}

/// Three-loop product `c_ij = sum_k a_ik * b_kj`.
///
/// Terms are accumulated left to right in `k`; every product and every
/// addition is rounded at `ctx`.
pub fn simple_mul(a: &MPMatrix, b: &MPMatrix, ctx: PrecisionContext) -> Result<MPMatrix> {
    check_inner(a.as_view(), b.as_view())?;
    let mut counter = OpCounter::default();
    Ok(simple_mul_views(a.as_view(), b.as_view(), ctx, &mut counter))
}

pub(crate) fn simple_mul_views(
    a: MatrixView<'_>,
    b: MatrixView<'_>,
    ctx: PrecisionContext,
    counter: &mut OpCounter,
) -> MPMatrix {
    debug_assert_eq!(a.cols(), b.rows());
    let (m, l, n) = (a.rows(), a.cols(), b.cols());
    let bits = ctx.bits();
    let mut c = MPMatrix::zeros_unchecked(m, n, bits);
    let mut term = Float::new(bits);
    for i in 0..m {
        for j in 0..n {
            let acc = &mut c.data[i * n + j].0;
            acc.assign(&a.get(i, 0).0 * &b.get(0, j).0);
            for k in 1..l {
                term.assign(&a.get(i, k).0 * &b.get(k, j).0);
                *acc += &term;
            }
        }
    }
    counter.mul += (m * l * n) as u64;
    counter.addsub += (m * n * (l - 1)) as u64;
    c
}

/// Block product `C_IJ = sum_K A_IK B_KJ` over an `n_min`-edge grid.
///
/// Edge blocks are ragged rather than padded. Each block product uses
/// [`simple_mul`] and the sum over `K` runs left to right.
pub fn block_mul(
    a: &MPMatrix,
    b: &MPMatrix,
    n_min: usize,
    ctx: PrecisionContext,
) -> Result<MPMatrix> {
    check_inner(a.as_view(), b.as_view())?;
    let mut counter = OpCounter::default();
    block_mul_views(a.as_view(), b.as_view(), n_min, ctx, &mut counter)
}

pub(crate) fn block_mul_views(
    a: MatrixView<'_>,
    b: MatrixView<'_>,
    n_min: usize,
    ctx: PrecisionContext,
    counter: &mut OpCounter,
) -> Result<MPMatrix> {
    let (m, l, n) = (a.rows(), a.cols(), b.cols());
    let grid = BlockingScheme::new(m, l, n, n_min)?;
    let mut c = MPMatrix::zeros_unchecked(m, n, ctx.bits());
    for bi in 0..grid.grid_m {
        let (r0, h) = grid.span(bi, m);
        for bj in 0..grid.grid_n {
            let (c0, w) = grid.span(bj, n);
            let (k0, kw) = grid.span(0, l);
            let mut acc = simple_mul_views(a.sub(r0, k0, h, kw), b.sub(k0, c0, kw, w), ctx, counter);
            for bk in 1..grid.grid_l {
                let (k0, kw) = grid.span(bk, l);
                let part =
                    simple_mul_views(a.sub(r0, k0, h, kw), b.sub(k0, c0, kw, w), ctx, counter);
                addsub_assign(AddSub::Add, &mut acc, part.as_view(), counter);
            }
            c.set_block(r0, c0, acc.as_view());
        }
    }
    Ok(c)
}

/// `max_j sum_i |a_ij|`, each sum accumulated top to bottom at the matrix precision.
pub fn one_norm(a: &MPMatrix) -> MPScalar {
    let bits = a.bits;
    let mut best = Float::new(bits);
    let mut col = Float::new(bits);
    for j in 0..a.cols {
        col.assign(0);
        for i in 0..a.rows {
            let x = &a.get(i, j).0;
            if x.is_sign_negative() {
                col -= x;
            } else {
                col += x;
            }
        }
        if col > best {
            best.assign(&col);
        }
    }
    MPScalar(best)
}

/// Extremes of the element-wise relative error.
#[derive(Clone, Debug)]
pub struct RelErrorSummary {
    pub max: MPScalar,
    pub min: MPScalar,
    /// Entries skipped because the reference value is exactly zero.
    pub skipped: usize,
}

/// Largest and smallest element-wise relative error of `approx` against `reference`.
///
/// Entries whose reference value is exactly zero are skipped and counted.
pub fn max_rel_error_mat(approx: &MPMatrix, reference: &MPMatrix) -> Result<RelErrorSummary> {
    check_same_shape(approx.as_view(), reference.as_view())?;
    let mut extremes: Option<(MPScalar, MPScalar)> = None;
    let mut skipped = 0;
    for (x, r) in approx.data.iter().zip(&reference.data) {
        if r.is_zero() {
            skipped += 1;
            continue;
        }
        let e = rel_error(x, r)?;
        extremes = Some(match extremes {
            None => (e.clone(), e),
            Some((mx, mn)) => {
                let mx = if e > mx { e.clone() } else { mx };
                let mn = if e < mn { e } else { mn };
                (mx, mn)
            }
        });
    }
    let (max, min) = extremes.ok_or_else(|| {
        Error::UndefinedMetric("every reference entry is zero".into())
    })?;
    Ok(RelErrorSummary { max, min, skipped })
}
