//! Experiment drivers behind the `mpmm` command-line tool.
//!
//! Each command returns [`BenchRecord`]s; [`append_csv`] writes them with a
//! fixed column order and a header only when the target file is empty.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::blocklu::{factorize, lu_blocked_counted, max_rel_error_solution, BlockLUConfig, LuStrategy};
use crate::densemat::MPMatrix;
use crate::error::{Error, Result};
use crate::fastmm::{multiply, MulKernel};
use crate::matgen::{bench_oracle_entry, gen_bench_a, gen_bench_b, gen_bench_pair, gen_linear_system, gen_lotkin, gen_random};
use crate::opmodel::{ratio_table, table_csv, table_text, Shape};
use crate::precision::{rel_error, MPScalar, PrecisionContext};

pub const CSV_HEADER: [&str; 15] = [
    "command",
    "algorithm",
    "m",
    "l",
    "n",
    "bits",
    "n_min",
    "K",
    "alpha",
    "seed",
    "wall_seconds",
    "max_rel_error",
    "min_rel_error",
    "mul_count",
    "addsub_count",
];

/// Error-column marker for a run stopped by a zero pivot.
pub const SINGULAR: &str = "SINGULAR";

/// One CSV row. Absent values are written as empty fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchRecord {
    pub command: String,
    pub algorithm: String,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub n: Option<usize>,
    pub bits: Option<u32>,
    pub n_min: Option<usize>,
    pub k: Option<usize>,
    pub alpha: Option<usize>,
    pub seed: Option<u64>,
    pub wall_seconds: Option<f64>,
    pub max_rel_error: Option<String>,
    pub min_rel_error: Option<String>,
    pub mul_count: Option<u64>,
    pub addsub_count: Option<u64>,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl BenchRecord {
    pub fn fields(&self) -> [String; 15] {
        [
            self.command.clone(),
            self.algorithm.clone(),
            opt(&self.m),
            opt(&self.l),
            opt(&self.n),
            opt(&self.bits),
            opt(&self.n_min),
            opt(&self.k),
            opt(&self.alpha),
            opt(&self.seed),
            self.wall_seconds.map(|t| format!("{t:.3}")).unwrap_or_default(),
            opt(&self.max_rel_error),
            opt(&self.min_rel_error),
            opt(&self.mul_count),
            opt(&self.addsub_count),
        ]
    }
}

/// Writes records as CSV, with the header line first when `header` is set.
pub fn write_csv<W: Write>(out: W, records: &[BenchRecord], header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        w.write_record(CSV_HEADER)?;
    }
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Appends to `path`, writing the header only if the file is new or empty.
pub fn append_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let empty = file.metadata()?.len() == 0;
    write_csv(file, records, empty)
}

fn format_error(e: &MPScalar, verbose: bool) -> String {
    if verbose {
        let digits = (f64::from(e.precision()) * std::f64::consts::LOG10_2).ceil() as usize + 1;
        e.to_decimal(digits)
    } else {
        e.to_decimal(3)
    }
}

#[derive(Clone, Debug)]
pub struct MatmulOptions {
    pub kernels: Vec<MulKernel>,
    pub m: usize,
    pub l: usize,
    pub n: usize,
    pub bits: u32,
    pub n_min: usize,
    pub ref_bits_multiplier: u32,
    pub verbose: bool,
}

impl Default for MatmulOptions {
    fn default() -> Self {
        MatmulOptions {
            kernels: MulKernel::ALL.to_vec(),
            m: 64,
            l: 64,
            n: 64,
            bits: 128,
            n_min: 32,
            ref_bits_multiplier: 2,
            verbose: false,
        }
    }
}

/// Multiplies the square-root benchmark pair with each selected kernel and
/// measures the element-wise relative error against the closed-form product.
pub fn cmd_matmul(opts: &MatmulOptions) -> Result<Vec<BenchRecord>> {
    let (m, l, n) = (opts.m, opts.l, opts.n);
    if m == 0 || l == 0 || n == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    if opts.n_min == 0 {
        return Err(Error::InvalidArgument("n_min must be >= 1".into()));
    }
    if opts.ref_bits_multiplier < 1 {
        return Err(Error::InvalidArgument("reference multiplier must be >= 1".into()));
    }
    let ctx = PrecisionContext::new(opts.bits)?;
    let ref_bits = opts.bits.checked_mul(opts.ref_bits_multiplier).ok_or(Error::InvalidPrecision(u32::MAX))?;
    let ref_ctx = PrecisionContext::new(ref_bits)?;

    let (a, b) = gen_bench_pair(m, l, n, ctx)?;
    let oracle: Vec<MPScalar> = (1..=m).map(|i| bench_oracle_entry(i, l, ref_ctx)).collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(opts.kernels.len());
    for &kernel in &opts.kernels {
        let start = Instant::now();
        let (c, count) = multiply(kernel, &a, &b, opts.n_min, ctx)?;
        let wall = start.elapsed().as_secs_f64();

        let mut max: Option<MPScalar> = None;
        let mut min: Option<MPScalar> = None;
        for i in 0..m {
            for j in 0..n {
                let e = rel_error(&c[(i, j)], &oracle[i])?;
                if max.as_ref().is_none_or(|x| e > *x) {
                    max = Some(e.clone());
                }
                if min.as_ref().is_none_or(|x| e < *x) {
                    min = Some(e);
                }
            }
        }
        records.push(BenchRecord {
            command: "matmul".into(),
            algorithm: kernel.name().into(),
            m: Some(m),
            l: Some(l),
            n: Some(n),
            bits: Some(opts.bits),
            n_min: Some(opts.n_min),
            wall_seconds: Some(wall),
            max_rel_error: max.map(|e| format_error(&e, opts.verbose)),
            min_rel_error: min.map(|e| format_error(&e, opts.verbose)),
            mul_count: Some(count.mul),
            addsub_count: Some(count.addsub),
            ..Default::default()
        });
    }
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Random,
    Lotkin,
}

impl std::str::FromStr for MatrixKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(MatrixKind::Random),
            "lotkin" => Ok(MatrixKind::Lotkin),
            other => Err(Error::InvalidArgument(format!("unknown matrix kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LuOptions {
    pub matrix: MatrixKind,
    pub n: usize,
    pub bits: u32,
    pub kernel: MulKernel,
    pub alphas: Vec<usize>,
    pub n_min: usize,
    pub seed: u64,
    pub verbose: bool,
}

impl Default for LuOptions {
    fn default() -> Self {
        LuOptions {
            matrix: MatrixKind::Random,
            n: 128,
            bits: 256,
            kernel: MulKernel::Winograd,
            alphas: (1..=10).collect(),
            n_min: 32,
            seed: 1,
            verbose: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LuReport {
    pub records: Vec<BenchRecord>,
    /// False when any run hit a singular pivot.
    pub all_ok: bool,
}

/// Builds `A x = b` with `x = [0, 1, ..., n-1]`, runs the column-wise
/// baseline and one blocked factorization per `alpha` (`K = alpha * n_min`).
pub fn cmd_lu(opts: &LuOptions) -> Result<LuReport> {
    if opts.n == 0 || opts.n_min == 0 {
        return Err(Error::InvalidArgument("n and n_min must be positive".into()));
    }
    if opts.alphas.contains(&0) {
        return Err(Error::InvalidArgument("alpha must be >= 1".into()));
    }
    let ctx = PrecisionContext::new(opts.bits)?;
    let a = match opts.matrix {
        MatrixKind::Random => gen_random(opts.n, opts.n, opts.seed, ctx)?,
        MatrixKind::Lotkin => gen_lotkin(opts.n, ctx)?,
    };
    let (x_true, b) = gen_linear_system(&a, ctx)?;
    let seed = (opts.matrix == MatrixKind::Random).then_some(opts.seed);

    let mut runs: Vec<(String, LuStrategy)> = vec![("columnwise".into(), LuStrategy::Columnwise)];
    for &alpha in &opts.alphas {
        let cfg = BlockLUConfig::from_alpha(alpha, opts.n_min, opts.kernel)?;
        runs.push((opts.kernel.name().into(), LuStrategy::Blocked(cfg)));
    }

    let mut all_ok = true;
    let mut records = Vec::with_capacity(runs.len());
    for (name, strategy) in runs {
        let mut rec = BenchRecord {
            command: "lu".into(),
            algorithm: name,
            m: Some(opts.n),
            l: Some(opts.n),
            n: Some(opts.n),
            bits: Some(opts.bits),
            seed,
            ..Default::default()
        };
        let start = Instant::now();
        let factors = match strategy {
            LuStrategy::Columnwise => factorize(&a, strategy, ctx),
            LuStrategy::Blocked(cfg) => {
                rec.n_min = Some(cfg.n_min);
                rec.k = Some(cfg.k);
                rec.alpha = cfg.alpha;
                lu_blocked_counted(&a, cfg, ctx).map(|(f, ops)| {
                    rec.mul_count = Some(ops.mul);
                    rec.addsub_count = Some(ops.addsub);
                    f
                })
            }
        };
        let wall = start.elapsed().as_secs_f64();
        let solved = factors.and_then(|f| f.solve(&b, ctx));
        match solved {
            Ok(x) => {
                rec.wall_seconds = Some(wall);
                let err = max_rel_error_solution(&x, &x_true)?;
                rec.max_rel_error = Some(format_error(&err.max_rel, opts.verbose));
            }
            Err(Error::SingularPivot { .. }) => {
                all_ok = false;
                rec.max_rel_error = Some(SINGULAR.into());
                rec.mul_count = None;
                rec.addsub_count = None;
            }
            Err(e) => return Err(e),
        }
        records.push(rec);
    }
    Ok(LuReport { records, all_ok })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Table,
}

/// Relative-complexity table for square sizes.
pub fn cmd_opcount(sizes: &[usize], n_min: usize, format: TableFormat) -> Result<String> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidArgument("sizes must be a nonempty list of positive integers".into()));
    }
    if n_min == 0 {
        return Err(Error::InvalidArgument("n_min must be >= 1".into()));
    }
    let shapes: Vec<Shape> = sizes.iter().map(|&s| Shape::square(s)).collect();
    let rows = ratio_table(&shapes, n_min);
    Ok(match format {
        TableFormat::Csv => table_csv(&rows, n_min),
        TableFormat::Table => table_text(&rows, n_min),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    BenchA,
    BenchB,
    Random,
    Lotkin,
}

impl std::str::FromStr for GenKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bench-a" => Ok(GenKind::BenchA),
            "bench-b" => Ok(GenKind::BenchB),
            "random" => Ok(GenKind::Random),
            "lotkin" => Ok(GenKind::Lotkin),
            other => Err(Error::InvalidArgument(format!("unknown matrix kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GenOptions {
    pub kind: GenKind,
    pub m: usize,
    pub l: usize,
    pub n: usize,
    pub bits: u32,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Generates a matrix: `bench-a` is `m x l`, `bench-b` is `l x n`,
/// `random` is `m x n`, `lotkin` is `n x n`. Writes it to `out` when given.
pub fn cmd_gen(opts: &GenOptions) -> Result<MPMatrix> {
    let ctx = PrecisionContext::new(opts.bits)?;
    let mat = match opts.kind {
        GenKind::BenchA => gen_bench_a(opts.m, opts.l, ctx)?,
        GenKind::BenchB => gen_bench_b(opts.l, opts.n, ctx)?,
        GenKind::Random => gen_random(opts.m, opts.n, opts.seed, ctx)?,
        GenKind::Lotkin => gen_lotkin(opts.n, ctx)?,
    };
    if let Some(path) = &opts.out {
        std::fs::write(path, mat.to_text())?;
    }
    Ok(mat)
}

/// Parses a comma-separated size list. `a..b` expands to the sizes
/// `2^k - 1, 2^k, 2^k + 1` lying in `[a, b]` (so `255..2049` gives
/// [`crate::opmodel::TABLE_SIZES`]); `a..=b` expands to every integer in the range.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim) {
        if part.contains("..=") {
            let (lo, hi) = parse_range(part)?;
            out.extend(lo..=hi);
        } else if part.contains("..") {
            let (lo, hi) = parse_range(part)?;
            out.extend(power_of_two_neighbourhood(lo, hi));
        } else {
            out.push(parse_positive(part)?);
        }
    }
    Ok(out)
}

fn power_of_two_neighbourhood(lo: usize, hi: usize) -> Vec<usize> {
    (1..usize::BITS - 1)
        .map(|k| 1usize << k)
        .take_while(|&p| p - 1 <= hi)
        .flat_map(|p| [p - 1, p, p + 1])
        .filter(|&s| s >= lo && s <= hi)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Parses an inclusive range `"a..b"` with `1 <= a <= b`.
pub fn parse_range(text: &str) -> Result<(usize, usize)> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| Error::InvalidArgument(format!("expected a..b, got {text:?}")))?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let (lo, hi) = (parse_positive(lo)?, parse_positive(hi)?);
    if lo > hi {
        return Err(Error::InvalidArgument(format!("empty range {text:?}")));
    }
    Ok((lo, hi))
}

fn parse_positive(text: &str) -> Result<usize> {
    match text.trim().parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(Error::InvalidArgument(format!("expected a positive integer, got {text:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_fields_are_complete() {
        let r = BenchRecord { command: "lu".into(), algorithm: "columnwise".into(), n: Some(4), wall_seconds: Some(0.01234), ..Default::default() };
        let f = r.fields();
        assert_eq!(f.len(), CSV_HEADER.len());
        assert_eq!(f[4], "4");
        assert_eq!(f[10], "0.012");
        assert_eq!(f[2], "");
    }

    #[test]
    fn csv_header_once() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let r = BenchRecord { command: "matmul".into(), algorithm: "simple".into(), ..Default::default() };
        append_csv(&path, &[r.clone()]).unwrap();
        append_csv(&path, &[r.clone(), r]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines[1], "matmul,simple,,,,,,,,,,,,,");
    }

    #[test]
    fn matmul_two_by_two_strassen_counts() {
        let opts = MatmulOptions { kernels: vec![MulKernel::Strassen], m: 2, l: 2, n: 2, n_min: 1, ..Default::default() };
        let recs = cmd_matmul(&opts).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!((recs[0].mul_count, recs[0].addsub_count), (Some(7), Some(18)));
    }

    #[test]
    fn matmul_rejects_bad_flags() {
        let bad = MatmulOptions { m: 0, ..Default::default() };
        assert!(cmd_matmul(&bad).is_err());
        let bad = MatmulOptions { bits: 1, ..Default::default() };
        assert!(matches!(cmd_matmul(&bad), Err(Error::InvalidPrecision(1))));
    }

    #[test]
    fn lu_row_count_and_singular() {
        let opts = LuOptions { n: 12, bits: 128, alphas: vec![1, 2, 3], n_min: 4, ..Default::default() };
        let rep = cmd_lu(&opts).unwrap();
        assert!(rep.all_ok);
        assert_eq!(rep.records.len(), 4);
        assert_eq!(rep.records[0].algorithm, "columnwise");
        assert_eq!(rep.records[2].k, Some(8));
    }

    #[test]
    fn gen_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.txt");
        let p2 = dir.path().join("b.txt");
        let base = GenOptions { kind: GenKind::Random, m: 4, l: 1, n: 5, bits: 96, seed: 7, out: Some(p1.clone()) };
        cmd_gen(&base).unwrap();
        cmd_gen(&GenOptions { out: Some(p2.clone()), ..base.clone() }).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        let bad = GenOptions { out: Some(dir.path().join("missing/dir/x.txt")), ..base };
        assert!(matches!(cmd_gen(&bad), Err(Error::Io(_))));
    }

    #[test]
    fn gen_lotkin_first_row() {
        let opts = GenOptions { kind: GenKind::Lotkin, m: 1, l: 1, n: 3, bits: 64, seed: 0, out: None };
        let text = cmd_gen(&opts).unwrap().to_text();
        assert_eq!(text.lines().nth(1).unwrap(), "0x1p+0 0x1p+0 0x1p+0");
    }

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("255,256, 1024").unwrap(), [255, 256, 1024]);
        assert_eq!(parse_sizes("3..=5,9").unwrap(), [3, 4, 5, 9]);
        assert_eq!(parse_sizes("255..2049").unwrap(), crate::opmodel::TABLE_SIZES);
        assert_eq!(parse_sizes("2..9").unwrap(), [2, 3, 4, 5, 7, 8, 9]);
        assert_eq!(parse_range("1..10").unwrap(), (1, 10));
        assert_eq!(parse_range("2..=4").unwrap(), (2, 4));
        assert!(parse_range("5..1").is_err());
        assert!(parse_sizes("0").is_err());
        assert!(parse_sizes("a").is_err());
    }

    #[test]
    fn opcount_outputs() {
        let t = cmd_opcount(&[32], 32, TableFormat::Table).unwrap();
        assert!(t.contains("32 x 32"));
        assert_eq!(t.matches("1.000").count(), 4);
        let c = cmd_opcount(&[255], 32, TableFormat::Csv).unwrap();
        let row: Vec<&str> = c.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[5], "0.678");
        assert!(cmd_opcount(&[], 32, TableFormat::Csv).is_err());
    }
}
