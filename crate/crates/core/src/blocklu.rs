//! Pivot-free LU decomposition, column-wise and blocked.
//!
//! Factors follow the Doolittle convention: `L` is unit lower triangular and
//! is stored below the diagonal of the packed matrix, `U` on and above it.
//! The blocked variant factors a `K x K` corner, solves for the `U12` row
//! panel and the `L21` column panel, and applies the Schur update
//! `A22 <- A22 - L21 U12` with any of the four multiplication kernels.

use rug::{Assign, Float};

use crate::densemat::{one_norm, MPMatrix, MatrixView};
use crate::error::{Error, Result};
use crate::fastmm::{multiply, MulKernel};
use crate::opmodel::OpCounter;
use crate::precision::{rel_error, MPScalar, PrecisionContext};

/// Packed `L\U` factors of a square matrix.
#[derive(Clone, Debug)]
pub struct LUFactors {
    packed: MPMatrix,
}

impl LUFactors {
    pub fn n(&self) -> usize {
        self.packed.rows()
    }

    pub fn bits(&self) -> u32 {
        self.packed.bits()
    }

    pub fn packed(&self) -> &MPMatrix {
        &self.packed
    }

    pub fn into_packed(self) -> MPMatrix {
        self.packed
    }

    /// Unit lower triangular factor.
    pub fn lower(&self) -> MPMatrix {
        let ctx = self.packed.context();
        MPMatrix::from_fn(self.n(), self.n(), ctx, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.packed[(i - 1, j - 1)].clone(),
            std::cmp::Ordering::Equal => ctx.from_i64(1),
            std::cmp::Ordering::Less => ctx.zero(),
        })
        .expect("square factor")
    }

    /// Upper triangular factor.
    pub fn upper(&self) -> MPMatrix {
        let ctx = self.packed.context();
        MPMatrix::from_fn(self.n(), self.n(), ctx, |i, j| {
            if i <= j {
                self.packed[(i - 1, j - 1)].clone()
            } else {
                ctx.zero()
            }
        })
        .expect("square factor")
    }

    /// Solves `L U x = b` by forward then back substitution at `ctx`.
    pub fn solve(&self, b: &[MPScalar], ctx: PrecisionContext) -> Result<Vec<MPScalar>> {
        let n = self.n();
        if b.len() != n {
            return Err(Error::Dimension(format!("right-hand side has {} entries, expected {n}", b.len())));
        }
        let lu = &self.packed;
        let mut term = Float::new(ctx.bits());
        let mut y: Vec<Float> = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = Float::with_val(ctx.bits(), &b[i].0);
            for (k, yk) in y.iter().enumerate() {
                term.assign(&lu[(i, k)].0 * yk);
                acc -= &term;
            }
            y.push(acc);
        }
        let mut x: Vec<Float> = vec![Float::new(ctx.bits()); n];
        for i in (0..n).rev() {
            let mut acc = y[i].clone();
            for k in i + 1..n {
                term.assign(&lu[(i, k)].0 * &x[k]);
                acc -= &term;
            }
            let pivot = &lu[(i, i)].0;
            if pivot.is_zero() {
                return Err(Error::SingularPivot { index: i + 1 });
            }
            acc /= pivot;
            x[i] = acc;
        }
        Ok(x.into_iter().map(MPScalar).collect())
    }
}

/// Block size and Schur-update kernel for [`lu_blocked`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLUConfig {
    /// Panel width `K`.
    pub k: usize,
    /// Multiplier `alpha` with `K = alpha * n_min`, when the config came from a sweep.
    pub alpha: Option<usize>,
    /// Block edge or recursion threshold handed to the multiply kernel.
    pub n_min: usize,
    pub kernel: MulKernel,
}

impl BlockLUConfig {
    pub fn new(k: usize, n_min: usize, kernel: MulKernel) -> Result<Self> {
        if k == 0 || n_min == 0 {
            return Err(Error::InvalidArgument("block size and n_min must be >= 1".into()));
        }
        Ok(BlockLUConfig { k, alpha: None, n_min, kernel })
    }

    /// `K = alpha * n_min`.
    pub fn from_alpha(alpha: usize, n_min: usize, kernel: MulKernel) -> Result<Self> {
        let mut cfg = Self::new(alpha * n_min, n_min, kernel)?;
        cfg.alpha = Some(alpha);
        Ok(cfg)
    }
}

/// Column-wise elimination or blocked factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LuStrategy {
    Columnwise,
    Blocked(BlockLUConfig),
}

fn check_square(a: &MPMatrix) -> Result<usize> {
    if a.rows() != a.cols() {
        return Err(Error::Dimension(format!("LU needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    Ok(a.rows())
}

/// Eliminates the `s x s` diagonal block starting at `(p, p)` in place.
fn factor_block_in_place(w: &mut MPMatrix, p: usize, s: usize) -> Result<()> {
    let n = w.cols();
    let bits = w.bits();
    let mut term = Float::new(bits);
    let mut mult = Float::new(bits);
    let data = w.elements_mut();
    for k in p..p + s {
        let pivot = data[k * n + k].0.clone();
        if pivot.is_zero() {
            return Err(Error::SingularPivot { index: k + 1 });
        }
        let (head, tail) = data.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..];
        for i in k + 1..p + s {
            let row = &mut tail[(i - k - 1) * n..(i - k) * n];
            row[k].0 /= &pivot;
            mult.assign(&row[k].0);
            for j in k + 1..p + s {
                term.assign(&mult * &pivot_row[j].0);
                row[j].0 -= &term;
            }
        }
    }
    Ok(())
}

/// Doolittle elimination with the `k` loop outermost and multipliers stored in place.
pub fn lu_columnwise(a: &MPMatrix) -> Result<LUFactors> {
    let n = check_square(a)?;
    let mut packed = a.clone();
    factor_block_in_place(&mut packed, 0, n)?;
    Ok(LUFactors { packed })
}

/// Forward substitution `L11 U12 = A12` with unit-lower `L11`, column by column.
pub fn trsm_unit_lower(l11: MatrixView<'_>, a12: &MPMatrix, ctx: PrecisionContext) -> Result<MPMatrix> {
    let k = l11.rows();
    if l11.cols() != k || a12.rows() != k {
        return Err(Error::Dimension(format!(
            "unit-lower solve: L is {}x{}, right-hand side has {} rows",
            l11.rows(),
            l11.cols(),
            a12.rows()
        )));
    }
    let mut u = a12.round_to(ctx);
    let mut term = Float::new(ctx.bits());
    let r = u.cols();
    for j in 0..r {
        for i in 1..k {
            for t in 0..i {
                term.assign(&l11.get(i, t).0 * &u[(t, j)].0);
                u[(i, j)].0 -= &term;
            }
        }
    }
    Ok(u)
}

/// Right-sided back substitution `L21 U11 = A21` with upper `U11`, row by row.
pub fn trsm_upper_right(a21: &MPMatrix, u11: MatrixView<'_>, ctx: PrecisionContext) -> Result<MPMatrix> {
    let k = u11.rows();
    if u11.cols() != k || a21.cols() != k {
        return Err(Error::Dimension(format!(
            "upper right solve: U is {}x{}, left-hand side has {} columns",
            u11.rows(),
            u11.cols(),
            a21.cols()
        )));
    }
    if let Some(j) = (0..k).find(|&j| u11.get(j, j).is_zero()) {
        return Err(Error::SingularPivot { index: j + 1 });
    }
    let mut l = a21.round_to(ctx);
    let mut term = Float::new(ctx.bits());
    for i in 0..l.rows() {
        for j in 0..k {
            for t in 0..j {
                term.assign(&l[(i, t)].0 * &u11.get(t, j).0);
                l[(i, j)].0 -= &term;
            }
            l[(i, j)].0 /= &u11.get(j, j).0;
        }
    }
    Ok(l)
}

/// Blocked pivot-free LU. Panels of width `K` are peeled off while more than
/// `K` rows remain; the final corner of at most `K` rows is eliminated column-wise.
pub fn lu_blocked(a: &MPMatrix, cfg: BlockLUConfig, ctx: PrecisionContext) -> Result<LUFactors> {
    lu_blocked_counted(a, cfg, ctx).map(|(f, _)| f)
}

/// [`lu_blocked`] that also returns the operation tally of the Schur-update products.
pub fn lu_blocked_counted(
    a: &MPMatrix,
    cfg: BlockLUConfig,
    ctx: PrecisionContext,
) -> Result<(LUFactors, OpCounter)> {
    let n = check_square(a)?;
    let k = cfg.k;
    if k == 0 {
        return Err(Error::InvalidArgument("block size must be >= 1".into()));
    }
    let mut w = a.round_to(ctx);
    let mut counter = OpCounter::default();
    let mut p = 0;
    while n - p > k {
        let rest = n - p - k;
        factor_block_in_place(&mut w, p, k)?;
        let (u12, l21) = {
            let corner = w.view(p, p, k, k)?;
            let a12 = w.view(p, p + k, k, rest)?.to_matrix();
            let a21 = w.view(p + k, p, rest, k)?.to_matrix();
            (trsm_unit_lower(corner, &a12, ctx)?, trsm_upper_right(&a21, corner, ctx)?)
        };
        w.set_block(p, p + k, u12.as_view());
        w.set_block(p + k, p, l21.as_view());

        let (update, ops) = multiply(cfg.kernel, &l21, &u12, cfg.n_min, ctx)?;
        counter += ops;
        for i in 0..rest {
            for j in 0..rest {
                w[(p + k + i, p + k + j)].0 -= &update[(i, j)].0;
            }
        }
        p += k;
    }
    factor_block_in_place(&mut w, p, n - p)?;
    Ok((LUFactors { packed: w }, counter))
}

pub fn factorize(a: &MPMatrix, strategy: LuStrategy, ctx: PrecisionContext) -> Result<LUFactors> {
    match strategy {
        LuStrategy::Columnwise => lu_columnwise(&a.round_to(ctx)),
        LuStrategy::Blocked(cfg) => lu_blocked(a, cfg, ctx),
    }
}

/// Solves `A x = b` without pivoting.
pub fn solve(a: &MPMatrix, b: &[MPScalar], strategy: LuStrategy, ctx: PrecisionContext) -> Result<Vec<MPScalar>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!("right-hand side has {} entries, expected {}", b.len(), a.rows())));
    }
    factorize(a, strategy, ctx)?.solve(b, ctx)
}

/// Explicit inverse by column-wise LU and `n` unit-vector solves at `ctx`.
pub fn inverse(a: &MPMatrix, ctx: PrecisionContext) -> Result<MPMatrix> {
    let n = check_square(a)?;
    let factors = lu_columnwise(&a.round_to(ctx))?;
    let mut inv = MPMatrix::zeros(n, n, ctx)?;
    let mut e: Vec<MPScalar> = (0..n).map(|_| ctx.zero()).collect();
    for j in 0..n {
        e[j] = ctx.from_i64(1);
        let col = factors.solve(&e, ctx)?;
        e[j] = ctx.zero();
        for (i, v) in col.iter().enumerate() {
            inv.set(i, j, v);
        }
    }
    Ok(inv)
}

/// Default precision for [`cond_one`]: `2 * bits + 64`.
pub fn default_cond_context(bits: u32) -> PrecisionContext {
    PrecisionContext::new(bits.saturating_mul(2).saturating_add(64).min(crate::precision::MAX_BITS))
        .expect("clamped into range")
}

/// `||A||_1 ||A^-1||_1` with the inverse formed at `ctx_hi`.
pub fn cond_one(a: &MPMatrix, ctx_hi: PrecisionContext) -> Result<MPScalar> {
    let a_hi = a.round_to(ctx_hi);
    let inv = inverse(&a_hi, ctx_hi)?;
    Ok(ctx_hi.mul(&one_norm(&a_hi), &one_norm(&inv)))
}

/// Error of a computed solution against the true one.
#[derive(Clone, Debug)]
pub struct SolutionError {
    /// Largest relative error over components with a nonzero true value.
    pub max_rel: MPScalar,
    /// Largest absolute error over components whose true value is zero, if any.
    pub zero_abs: Option<MPScalar>,
}

pub fn max_rel_error_solution(xhat: &[MPScalar], xtrue: &[MPScalar]) -> Result<SolutionError> {
    if xhat.len() != xtrue.len() {
        return Err(Error::Dimension(format!("solution lengths differ: {} vs {}", xhat.len(), xtrue.len())));
    }
    let mut max_rel: Option<MPScalar> = None;
    let mut zero_abs: Option<MPScalar> = None;
    for (x, t) in xhat.iter().zip(xtrue) {
        if t.is_zero() {
            let e = x.abs();
            if zero_abs.as_ref().is_none_or(|z| e > *z) {
                zero_abs = Some(e);
            }
        } else {
            let e = rel_error(x, t)?;
            // NaN from a broken solve is sticky
            let replace = match &max_rel {
                None => true,
                Some(m) if m.is_nan() => false,
                Some(m) => e.is_nan() || e > *m,
            };
            if replace {
                max_rel = Some(e);
            }
        }
    }
    let max_rel = max_rel.ok_or_else(|| Error::UndefinedMetric("true solution is identically zero".into()))?;
    Ok(SolutionError { max_rel, zero_abs })
}
