//! Deterministic test matrices: the square-root benchmark pair with its
//! closed-form product, uniform random matrices, Lotkin matrices, and linear
//! systems with the known solution `x = [0, 1, ..., n-1]`.

use rug::{Float, Integer};

use crate::densemat::MPMatrix;
use crate::error::{Error, Result};
use crate::precision::{MPScalar, PrecisionContext};

/// 64-bit xorshift-multiply generator with a fixed, platform-independent stream.
#[derive(Clone, Debug)]
pub struct Prng64 {
    state: u64,
}

impl Prng64 {
    /// Replacement for the forbidden all-zero state.
    pub const ZERO_SEED: u64 = 0x9E37_79B9_7F4A_7C15;
    const MULTIPLIER: u64 = 2_685_821_657_736_338_717;

    pub fn new(seed: u64) -> Self {
        Prng64 { state: if seed == 0 { Self::ZERO_SEED } else { seed } }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(Self::MULTIPLIER)
    }

    /// Uniform in `[0, 1)` from the top 53 bits of the next output.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[-1, 1)`; exact in binary64.
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_unit() - 1.0
    }
}

/// Benchmark operands `a_ij = sqrt(5) (i + j - 1)` (`m x l`) and
/// `b_ij = sqrt(3) (l - i + 1)` (`l x n`).
///
/// Each entry is the correctly rounded root times an exact integer, rounded
/// once more at `ctx`.
pub fn gen_bench_pair(m: usize, l: usize, n: usize, ctx: PrecisionContext) -> Result<(MPMatrix, MPMatrix)> {
    Ok((gen_bench_a(m, l, ctx)?, gen_bench_b(l, n, ctx)?))
}

pub fn gen_bench_a(m: usize, l: usize, ctx: PrecisionContext) -> Result<MPMatrix> {
    let root5 = ctx.sqrt(&ctx.from_i64(5))?;
    MPMatrix::from_fn(m, l, ctx, |i, j| ctx.mul(&root5, &ctx.from_u64((i + j - 1) as u64)))
}

/// `b_ij = sqrt(3) (r - i + 1)` where `r` is the row count of `B`.
pub fn gen_bench_b(l: usize, n: usize, ctx: PrecisionContext) -> Result<MPMatrix> {
    let root3 = ctx.sqrt(&ctx.from_i64(3))?;
    MPMatrix::from_fn(l, n, ctx, |i, _| ctx.mul(&root3, &ctx.from_u64((l - i + 1) as u64)))
}

/// Exact integer `sum_{k=1}^{l} (i + k - 1)(l - k + 1)`.
pub fn bench_oracle_sum(i: usize, l: usize) -> Integer {
    let mut sum = Integer::new();
    for k in 1..=l {
        sum += Integer::from(i + k - 1) * Integer::from(l - k + 1);
    }
    sum
}

/// Entry `c_ij` of the exact benchmark product `sqrt(15) * bench_oracle_sum(i, l)`
/// (independent of `j`), with a single rounding of the root and one of the product.
pub fn bench_oracle_entry(i: usize, l: usize, ctx_hi: PrecisionContext) -> Result<MPScalar> {
    if i == 0 || l == 0 {
        return Err(Error::Dimension("oracle indices are 1-based and positive".into()));
    }
    let root15 = ctx_hi.sqrt(&ctx_hi.from_i64(15))?;
    let sum = bench_oracle_sum(i, l);
    Ok(MPScalar::from_float(Float::with_val(ctx_hi.bits(), root15.as_float() * &sum)))
}

/// Full `m x n` reference product at `ctx_hi`.
pub fn bench_oracle_matrix(m: usize, l: usize, n: usize, ctx_hi: PrecisionContext) -> Result<MPMatrix> {
    let rows: Vec<MPScalar> = (1..=m).map(|i| bench_oracle_entry(i, l, ctx_hi)).collect::<Result<_>>()?;
    MPMatrix::from_fn(m, n, ctx_hi, |i, _| rows[i - 1].clone())
}

/// Entries uniform in `[-1, 1)` drawn row by row from [`Prng64`].
pub fn gen_random(nrows: usize, ncols: usize, seed: u64, ctx: PrecisionContext) -> Result<MPMatrix> {
    let mut rng = Prng64::new(seed);
    MPMatrix::from_fn(nrows, ncols, ctx, |_, _| ctx.from_f64(rng.next_symmetric()))
}

/// First row ones, `a_ij = 1 / (i + j - 1)` below it.
pub fn gen_lotkin(n: usize, ctx: PrecisionContext) -> Result<MPMatrix> {
    MPMatrix::from_fn(n, n, ctx, |i, j| {
        if i == 1 {
            ctx.from_i64(1)
        } else {
            ctx.from_ratio(1, (i + j - 1) as i64).expect("positive denominator")
        }
    })
}

/// True solution `x_i = i - 1` and `b = A x`, accumulated left to right at `ctx`.
pub fn gen_linear_system(a: &MPMatrix, ctx: PrecisionContext) -> Result<(Vec<MPScalar>, Vec<MPScalar>)> {
    if a.rows() != a.cols() {
        return Err(Error::Dimension(format!("system matrix must be square, got {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    let x: Vec<MPScalar> = (0..n).map(|i| ctx.from_u64(i as u64)).collect();
    let b = (0..n)
        .map(|i| {
            let mut acc = ctx.mul(a.get(i, 0), &x[0]);
            for (aik, xk) in a.row(i).iter().zip(&x).skip(1) {
                acc = ctx.add(&acc, &ctx.mul(aik, xk));
            }
            acc
        })
        .collect();
    Ok((x, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::rel_error;

    fn ctx(bits: u32) -> PrecisionContext {
        PrecisionContext::new(bits).unwrap()
    }

    #[test]
    fn prng_golden_stream() {
        // frozen on first implementation; cross-checked against an independent
        // big-integer evaluation of the same recurrence
        let mut rng = Prng64::new(1);
        let first: Vec<f64> = (0..3).map(|_| rng.next_unit()).collect();
        assert_eq!(first, [GOLDEN_SEED1[0], GOLDEN_SEED1[1], GOLDEN_SEED1[2]]);
    }

    const GOLDEN_SEED1: [f64; 3] = [0.28083505005035947, 0.6711372530266764, 0.7258461452833668];

    #[test]
    fn prng_zero_seed_remap() {
        let mut a = Prng64::new(0);
        let mut b = Prng64::new(Prng64::ZERO_SEED);
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn bench_pair_entries() {
        let c = ctx(128);
        let (a, b) = gen_bench_pair(2, 2, 3, c).unwrap();
        let r5 = c.sqrt(&c.from_i64(5)).unwrap();
        let r3 = c.sqrt(&c.from_i64(3)).unwrap();
        assert!(a[(0, 0)].bit_eq(&r5));
        assert!(a[(0, 1)].bit_eq(&c.mul(&r5, &c.from_i64(2))));
        assert!(a[(1, 0)].bit_eq(&a[(0, 1)]));
        assert!(a[(1, 1)].bit_eq(&c.mul(&r5, &c.from_i64(3))));
        // last row of B is sqrt(3) * 1
        assert!((0..3).all(|j| b[(1, j)].bit_eq(&r3)));
        assert!(b[(0, 2)].bit_eq(&c.mul(&r3, &c.from_i64(2))));
    }

    #[test]
    fn bench_a_constant_on_antidiagonals() {
        let a = gen_bench_a(5, 6, ctx(96)).unwrap();
        for i in 0..4 {
            for j in 1..6 {
                assert!(a[(i, j)].bit_eq(&a[(i + 1, j - 1)]));
            }
        }
    }

    #[test]
    fn oracle_hand_sums() {
        assert_eq!(bench_oracle_sum(1, 1), 1);
        assert_eq!(bench_oracle_sum(1, 2), 4);
        assert_eq!(bench_oracle_sum(2, 2), 7);
        let c = ctx(256);
        let r15 = c.sqrt(&c.from_i64(15)).unwrap();
        assert!(bench_oracle_entry(1, 1, c).unwrap().bit_eq(&r15));
        assert!(bench_oracle_entry(2, 2, c).unwrap().bit_eq(&c.mul(&r15, &c.from_i64(7))));
    }

    #[test]
    fn random_range_and_determinism() {
        let c = ctx(128);
        let a = gen_random(20, 30, 7, c).unwrap();
        let b = gen_random(20, 30, 7, c).unwrap();
        assert!(a.bit_eq(&b));
        let one = c.from_i64(1);
        let minus = c.from_i64(-1);
        assert!(a.elements().iter().all(|e| *e >= minus && *e <= one));
        assert!(!gen_random(20, 30, 8, c).unwrap().bit_eq(&a));
    }

    #[test]
    fn lotkin_small() {
        let c = ctx(128);
        assert!(gen_lotkin(1, c).unwrap().bit_eq(&MPMatrix::identity(1, c).unwrap()));
        let l = gen_lotkin(3, c).unwrap();
        let expect = [[(1, 1), (1, 1), (1, 1)], [(1, 2), (1, 3), (1, 4)], [(1, 3), (1, 4), (1, 5)]];
        for (i, row) in expect.iter().enumerate() {
            for (j, &(p, q)) in row.iter().enumerate() {
                assert!(l[(i, j)].bit_eq(&c.from_ratio(p, q).unwrap()));
            }
        }
    }

    #[test]
    fn linear_system_cases() {
        let c = ctx(128);
        let (x, b) = gen_linear_system(&MPMatrix::identity(1, c).unwrap(), c).unwrap();
        assert!(x[0].is_zero() && b[0].is_zero());
        let (_, b) = gen_linear_system(&MPMatrix::identity(3, c).unwrap(), c).unwrap();
        assert_eq!(b.iter().map(MPScalar::to_f64).collect::<Vec<_>>(), [0.0, 1.0, 2.0]);
        let a = MPMatrix::from_i64_rows(&[vec![1, 1], vec![1, 2]], c).unwrap();
        let (_, b) = gen_linear_system(&a, c).unwrap();
        assert_eq!(b.iter().map(MPScalar::to_f64).collect::<Vec<_>>(), [1.0, 2.0]);
        let rect = MPMatrix::zeros(2, 3, c).unwrap();
        assert!(gen_linear_system(&rect, c).is_err());
    }

    #[test]
    fn oracle_is_close_to_high_precision_product() {
        let c = ctx(512);
        let (a, b) = gen_bench_pair(3, 5, 2, c).unwrap();
        let p = crate::densemat::simple_mul(&a, &b, c).unwrap();
        for i in 0..3 {
            let o = bench_oracle_entry(i + 1, 5, c).unwrap();
            assert!(rel_error(&p[(i, 1)], &o).unwrap().log10_abs() < -150.0);
        }
    }
}
