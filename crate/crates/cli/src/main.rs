use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use mpmm_core::bench::{
    append_csv, cmd_gen, cmd_lu, cmd_matmul, cmd_opcount, parse_range, parse_sizes, write_csv,
    BenchRecord, GenKind, GenOptions, LuOptions, MatmulOptions, MatrixKind, TableFormat,
};
use mpmm_core::opmodel::TABLE_SIZES;
use mpmm_core::MulKernel;

#[derive(Parser)]
#[command(name = "mpmm", version, about = "Multiple-precision matrix multiplication benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multiply the sqrt(5)/sqrt(3) benchmark pair and report time and relative error.
    Matmul {
        #[arg(long, value_enum, default_value_t = Algo::All)]
        algo: Algo,
        #[arg(long, default_value_t = 64)]
        m: usize,
        #[arg(long, default_value_t = 64)]
        l: usize,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 128)]
        bits: u32,
        #[arg(long = "nmin", default_value_t = 32)]
        n_min: usize,
        /// Reference precision is bits times this factor.
        #[arg(long, default_value_t = 2)]
        ref_bits_multiplier: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Print error columns at full precision.
        #[arg(long)]
        verbose: bool,
    },
    /// Solve A x = b with column-wise and blocked LU over a sweep of K = alpha * n_min.
    Lu {
        #[arg(long, value_enum, default_value_t = Matrix::Random)]
        matrix: Matrix,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 256)]
        bits: u32,
        #[arg(long, value_enum, default_value_t = Kernel::Winograd)]
        kernel: Kernel,
        /// Inclusive alpha range, e.g. 1..10.
        #[arg(long, default_value = "1..10")]
        alpha_sweep: String,
        #[arg(long = "nmin", default_value_t = 32)]
        n_min: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        verbose: bool,
    },
    /// Print the relative operation-count table of the recursive algorithms.
    Opcount {
        /// Comma-separated sizes; `a..b` takes 2^k-1, 2^k, 2^k+1 within the range,
        /// `a..=b` every integer. Defaults to the twelve reference sizes.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long = "nmin", default_value_t = 32)]
        n_min: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Write a generated matrix in the mpmat text format.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 128)]
        bits: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Simple,
    Block,
    Strassen,
    Winograd,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kernel {
    Simple,
    Block,
    Strassen,
    Winograd,
}

impl From<Kernel> for MulKernel {
    fn from(k: Kernel) -> MulKernel {
        match k {
            Kernel::Simple => MulKernel::Simple,
            Kernel::Block => MulKernel::Block,
            Kernel::Strassen => MulKernel::Strassen,
            Kernel::Winograd => MulKernel::Winograd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Matrix {
    Random,
    Lotkin,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    BenchA,
    BenchB,
    Random,
    Lotkin,
}

fn emit(records: &[BenchRecord], csv: Option<&PathBuf>) -> anyhow::Result<()> {
    if let Some(path) = csv {
        append_csv(path, records).with_context(|| format!("writing {}", path.display()))?;
    }
    write_csv(io::stdout().lock(), records, true)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Matmul { algo, m, l, n, bits, n_min, ref_bits_multiplier, csv, verbose } => {
            let kernels = match algo {
                Algo::Simple => vec![MulKernel::Simple],
                Algo::Block => vec![MulKernel::Block],
                Algo::Strassen => vec![MulKernel::Strassen],
                Algo::Winograd => vec![MulKernel::Winograd],
                Algo::All => MulKernel::ALL.to_vec(),
            };
            let opts = MatmulOptions { kernels, m, l, n, bits, n_min, ref_bits_multiplier, verbose };
            let records = cmd_matmul(&opts)?;
            emit(&records, csv.as_ref())?;
            Ok(true)
        }
        Command::Lu { matrix, n, bits, kernel, alpha_sweep, n_min, seed, csv, verbose } => {
            let (lo, hi) = parse_range(&alpha_sweep)?;
            let matrix = match matrix {
                Matrix::Random => MatrixKind::Random,
                Matrix::Lotkin => MatrixKind::Lotkin,
            };
            let opts = LuOptions {
                matrix,
                n,
                bits,
                kernel: kernel.into(),
                alphas: (lo..=hi).collect(),
                n_min,
                seed,
                verbose,
            };
            let report = cmd_lu(&opts)?;
            emit(&report.records, csv.as_ref())?;
            Ok(report.all_ok)
        }
        Command::Opcount { sizes, n_min, format } => {
            let sizes = match sizes {
                Some(s) => parse_sizes(&s)?,
                None => TABLE_SIZES.to_vec(),
            };
            let format = match format {
                Format::Csv => TableFormat::Csv,
                Format::Table => TableFormat::Table,
            };
            print!("{}", cmd_opcount(&sizes, n_min, format)?);
            Ok(true)
        }
        Command::Gen { kind, m, l, n, bits, seed, out } => {
            let kind = match kind {
                Kind::BenchA => GenKind::BenchA,
                Kind::BenchB => GenKind::BenchB,
                Kind::Random => GenKind::Random,
                Kind::Lotkin => GenKind::Lotkin,
            };
            let to_stdout = out.is_none();
            let mat = cmd_gen(&GenOptions { kind, m, l, n, bits, seed, out })?;
            if to_stdout {
                print!("{}", mat.to_text());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
