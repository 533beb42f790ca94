//! Analytic operation counts for the four multiplication algorithms and the
//! relative-complexity table built from them.

use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use num_rational::Ratio;

use crate::fastmm::{DimAction, FastAlgorithm, OddDimPolicy};

/// Tally of scalar multiplications and additions/subtractions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct OpCounter {
    pub mul: u64,
    pub addsub: u64,
}

impl Add for OpCounter {
    type Output = OpCounter;
    fn add(self, rhs: OpCounter) -> OpCounter {
        OpCounter { mul: self.mul + rhs.mul, addsub: self.addsub + rhs.addsub }
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: OpCounter) {
        self.mul += rhs.mul;
        self.addsub += rhs.addsub;
    }
}

/// Operation count of the three-loop product: `m*l*n` multiplications and `m*n*(l-1)` additions.
pub fn count_simple(m: usize, l: usize, n: usize) -> OpCounter {
    let (m, l, n) = (m as u64, l as u64, n as u64);
    OpCounter { mul: m * l * n, addsub: m * n * l.saturating_sub(1) }
}

/// Half-size block additions per recursion level on the `A`, `B` and `C` sides.
pub fn addsub_weights(algo: FastAlgorithm) -> (u64, u64, u64) {
    match algo {
        FastAlgorithm::Strassen => (5, 5, 8),
        FastAlgorithm::Winograd => (4, 4, 7),
    }
}

/// Operation count of the recursive algorithms under the default odd-size
/// policy of [`crate::fastmm::fast_mul`].
///
/// Recursion stops once `min(m, l, n) <= n_min`; the base case is counted as
/// the simple product on the actual (possibly odd) dimensions.
pub fn count_fast(algo: FastAlgorithm, m: usize, l: usize, n: usize, n_min: usize) -> OpCounter {
    count_fast_with_policy(algo, OddDimPolicy::default(), m, l, n, n_min)
}

pub fn count_fast_with_policy(
    algo: FastAlgorithm,
    policy: OddDimPolicy,
    m: usize,
    l: usize,
    n: usize,
    n_min: usize,
) -> OpCounter {
    if m.min(l).min(n) <= n_min {
        return count_simple(m, l, n);
    }
    let [am, al, an] = [m, l, n].map(|d| policy.action(d));
    let (hm, hl, hn) = (am.core(m) / 2, al.core(l) / 2, an.core(n) / 2);
    let sub = count_fast_with_policy(algo, policy, hm, hl, hn, n_min);
    let (ka, kb, kc) = addsub_weights(algo);
    let (hm, hl, hn) = (hm as u64, hl as u64, hn as u64);
    let mut total = OpCounter {
        mul: 7 * sub.mul,
        addsub: 7 * sub.addsub + ka * hm * hl + kb * hl * hn + kc * hm * hn,
    };
    // peeling fix-ups
    let (me, ne) = (am.covered(m), an.covered(n));
    if al == DimAction::Peel {
        let k = (me * ne) as u64;
        total += OpCounter { mul: k, addsub: k };
    }
    if an == DimAction::Peel {
        total += count_simple(me, l, 1);
    }
    if am == DimAction::Peel {
        total += count_simple(1, l, n);
    }
    total
}

/// Exact rational ratio kept alongside its display value.
pub type ExactRatio = Ratio<u64>;

fn ratio(num: u64, den: u64) -> ExactRatio {
    if den == 0 {
        // 1 x l x 1 with l = 1 has no additions in either algorithm
        Ratio::from_integer(u64::from(num == 0))
    } else {
        Ratio::new(num, den)
    }
}

pub fn ratio_to_f64(r: &ExactRatio) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// One row of the relative-complexity table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityRow {
    pub m: usize,
    pub l: usize,
    pub n: usize,
    pub strassen_mul_ratio: ExactRatio,
    pub strassen_addsub_ratio: ExactRatio,
    pub winograd_mul_ratio: ExactRatio,
    pub winograd_addsub_ratio: ExactRatio,
}

impl ComplexityRow {
    pub fn new(m: usize, l: usize, n: usize, n_min: usize) -> Self {
        let base = count_simple(m, l, n);
        let s = count_fast(FastAlgorithm::Strassen, m, l, n, n_min);
        let w = count_fast(FastAlgorithm::Winograd, m, l, n, n_min);
        ComplexityRow {
            m,
            l,
            n,
            strassen_mul_ratio: ratio(s.mul, base.mul),
            strassen_addsub_ratio: ratio(s.addsub, base.addsub),
            winograd_mul_ratio: ratio(w.mul, base.mul),
            winograd_addsub_ratio: ratio(w.addsub, base.addsub),
        }
    }

    /// The four ratios rounded to three decimals, in table column order:
    /// Strassen add/sub, Strassen mul, Winograd add/sub, Winograd mul.
    pub fn display_ratios(&self) -> [String; 4] {
        [
            &self.strassen_addsub_ratio,
            &self.strassen_mul_ratio,
            &self.winograd_addsub_ratio,
            &self.winograd_mul_ratio,
        ]
        .map(|r| format!("{:.3}", ratio_to_f64(r)))
    }
}

/// Square and rectangular problem shape `(m, l, n)` for an `m x l` by `l x n` product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub m: usize,
    pub l: usize,
    pub n: usize,
}

impl Shape {
    pub fn square(n: usize) -> Self {
        Shape { m: n, l: n, n }
    }
}

/// Default sizes: `2^k - 1, 2^k, 2^k + 1` for `k = 8..=11`.
pub const TABLE_SIZES: [usize; 12] = [255, 256, 257, 511, 512, 513, 1023, 1024, 1025, 2047, 2048, 2049];

pub fn ratio_table(shapes: &[Shape], n_min: usize) -> Vec<ComplexityRow> {
    shapes.iter().map(|s| ComplexityRow::new(s.m, s.l, s.n, n_min)).collect()
}

/// CSV rendering with exact fractions and 3-decimal display values.
pub fn table_csv(rows: &[ComplexityRow], n_min: usize) -> String {
    let mut out = String::from(
        "m,l,n,n_min,strassen_addsub_ratio,strassen_mul_ratio,winograd_addsub_ratio,winograd_mul_ratio,\
         strassen_addsub_exact,strassen_mul_exact,winograd_addsub_exact,winograd_mul_exact\n",
    );
    for r in rows {
        let d = r.display_ratios();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.m,
            r.l,
            r.n,
            n_min,
            d[0],
            d[1],
            d[2],
            d[3],
            r.strassen_addsub_ratio,
            r.strassen_mul_ratio,
            r.winograd_addsub_ratio,
            r.winograd_mul_ratio
        )
        .unwrap();
    }
    out
}

/// Aligned text table: one row per size, Strassen and Winograd column
/// groups, each with "Add & Sub" and "Mul".
pub fn table_text(rows: &[ComplexityRow], n_min: usize) -> String {
    let labels: Vec<String> = rows
        .iter()
        .map(|r| {
            if r.l == r.m && r.n == r.m {
                format!("{} x {}", r.m, r.n)
            } else {
                format!("{} x {} x {}", r.m, r.l, r.n)
            }
        })
        .collect();
    let first = format!("n_min = {n_min}");
    let w0 = labels.iter().map(String::len).chain([first.len()]).max().unwrap_or(0);
    let rule = "-".repeat(w0 + 2 + 2 * 22 + 1);

    let mut out = String::new();
    writeln!(out, "{rule}").unwrap();
    writeln!(out, "{:>w0$} | {:^20} | {:^20}", "", "Strassen", "Winograd").unwrap();
    writeln!(out, "{rule}").unwrap();
    writeln!(out, "{first:>w0$} | {:>10} {:>9} | {:>10} {:>9}", "Add & Sub", "Mul", "Add & Sub", "Mul")
        .unwrap();
    writeln!(out, "{rule}").unwrap();
    for (label, r) in labels.iter().zip(rows) {
        let d = r.display_ratios();
        writeln!(out, "{label:>w0$} | {:>10} {:>9} | {:>10} {:>9}", d[0], d[1], d[2], d[3]).unwrap();
    }
    writeln!(out, "{rule}").unwrap();
    out
}
