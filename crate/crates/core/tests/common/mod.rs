//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use mpmm_core::matgen::Prng64;
use mpmm_core::{MPMatrix, PrecisionContext};
use rug::{Integer, Rational};

/// Integer matrix with entries in `[-bound, bound]`, deterministic in `rng`.
pub fn int_matrix(rng: &mut Prng64, rows: usize, cols: usize, bound: i64) -> Vec<Vec<i64>> {
    let span = (2 * bound + 1) as u64;
    (0..rows).map(|_| (0..cols).map(|_| (rng.next_u64() % span) as i64 - bound).collect()).collect()
}

pub fn to_mp(v: &[Vec<i64>], ctx: PrecisionContext) -> MPMatrix {
    MPMatrix::from_i64_rows(v, ctx).unwrap()
}

/// Exact integer product.
pub fn int_product(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<Integer>> {
    let (l, n) = (b.len(), b[0].len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| (0..l).fold(Integer::new(), |acc, k| acc + Integer::from(row[k]) * b[k][j]))
                .collect()
        })
        .collect()
}

/// Lotkin matrix over exact fractions.
pub fn lotkin_rational(n: usize) -> Vec<Vec<Rational>> {
    (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| if i == 1 { Rational::from(1) } else { Rational::from((1, (i + j - 1) as u64)) })
                .collect()
        })
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting on the first nonzero entry.
pub fn rational_inverse(a: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    let mut w: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| Rational::from(u8::from(i == j))));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| w[r][col] != 0).expect("nonsingular");
        w.swap(col, p);
        let inv = Rational::from(1) / &w[col][col];
        for v in &mut w[col] {
            *v *= &inv;
        }
        let pivot_row = w[col].clone();
        for (r, row) in w.iter_mut().enumerate() {
            if r == col || row[col] == 0 {
                continue;
            }
            let f = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= Rational::from(&f * p);
            }
        }
    }
    w.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn rational_one_norm(a: &[Vec<Rational>]) -> Rational {
    let n = a[0].len();
    (0..n)
        .map(|j| a.iter().fold(Rational::new(), |acc, row| acc + Rational::from(row[j].abs_ref())))
        .max()
        .unwrap()
}

/// Exact `||A||_1 ||A^-1||_1` of the Lotkin matrix.
pub fn lotkin_cond_exact(n: usize) -> Rational {
    let a = lotkin_rational(n);
    rational_one_norm(&a) * rational_one_norm(&rational_inverse(&a))
}
