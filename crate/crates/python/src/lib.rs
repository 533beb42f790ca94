//! Python bindings: `import mpmm`.
//!
//! Scalars cross the boundary as hex-float strings (bit-exact) or as Python
//! floats (lossy convenience). Matrices stay on the Rust side in `Matrix`.

#![allow(clippy::useless_conversion)] // false positives from pyo3 0.22 macro expansion

use mpmm_core::bench::{cmd_opcount, TableFormat};
use mpmm_core::blocklu::{self, LuStrategy};
use mpmm_core::densemat::max_rel_error_mat;
use mpmm_core::fastmm::FastAlgorithm;
use mpmm_core::{matgen, opmodel, BlockLUConfig, Error, MPMatrix, MPScalar, MulKernel, PrecisionContext};
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyIndexError, PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::SingularScalar => PyZeroDivisionError::new_err(e.to_string()),
        Error::SingularPivot { .. } | Error::Domain(_) | Error::UndefinedMetric(_) => {
            PyArithmeticError::new_err(e.to_string())
        }
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn ctx(bits: u32) -> PyResult<PrecisionContext> {
    PrecisionContext::new(bits).map_err(to_py)
}

fn kernel(name: &str) -> PyResult<MulKernel> {
    name.parse().map_err(to_py)
}

fn algorithm(name: &str) -> PyResult<FastAlgorithm> {
    match name.to_ascii_lowercase().as_str() {
        "strassen" => Ok(FastAlgorithm::Strassen),
        "winograd" => Ok(FastAlgorithm::Winograd),
        other => Err(PyValueError::new_err(format!("unknown fast algorithm {other:?}"))),
    }
}

/// Accepts int, float, or a hex-float string.
fn scalar_from_py(v: &Bound<'_, PyAny>, c: PrecisionContext) -> PyResult<MPScalar> {
    if let Ok(i) = v.extract::<i64>() {
        Ok(c.from_i64(i))
    } else if let Ok(f) = v.extract::<f64>() {
        Ok(c.from_f64(f))
    } else if let Ok(s) = v.extract::<String>() {
        c.parse_hex(&s).map_err(to_py)
    } else {
        Err(PyValueError::new_err("expected int, float or hex string"))
    }
}

/// Dense multiple-precision matrix.
#[pyclass(name = "Matrix", module = "mpmm")]
#[derive(Clone)]
struct PyMatrix {
    inner: MPMatrix,
}

impl PyMatrix {
    fn wrap(inner: MPMatrix) -> Self {
        PyMatrix { inner }
    }

    fn check(&self, i: usize, j: usize) -> PyResult<()> {
        let (m, n) = self.inner.shape();
        if i >= m || j >= n {
            return Err(PyIndexError::new_err(format!("index ({i}, {j}) out of range for {m}x{n}")));
        }
        Ok(())
    }
}

#[pymethods]
impl PyMatrix {
    #[staticmethod]
    fn zeros(m: usize, n: usize, bits: u32) -> PyResult<Self> {
        Ok(Self::wrap(MPMatrix::zeros(m, n, ctx(bits)?).map_err(to_py)?))
    }

    #[staticmethod]
    fn identity(n: usize, bits: u32) -> PyResult<Self> {
        Ok(Self::wrap(MPMatrix::identity(n, ctx(bits)?).map_err(to_py)?))
    }

    /// Build from a list of rows of ints, floats or hex strings.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<Bound<'_, PyAny>>>, bits: u32) -> PyResult<Self> {
        let c = ctx(bits)?;
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("ragged rows"));
        }
        let mut out = MPMatrix::zeros(m, n, c).map_err(to_py)?;
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out.set(i, j, &scalar_from_py(v, c)?);
            }
        }
        Ok(Self::wrap(out))
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self::wrap(MPMatrix::from_text(text).map_err(to_py)?))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    #[getter]
    fn bits(&self) -> u32 {
        self.inner.bits()
    }

    fn __getitem__(&self, idx: (usize, usize)) -> PyResult<f64> {
        self.check(idx.0, idx.1)?;
        Ok(self.inner.get(idx.0, idx.1).to_f64())
    }

    fn __setitem__(&mut self, idx: (usize, usize), v: Bound<'_, PyAny>) -> PyResult<()> {
        self.check(idx.0, idx.1)?;
        let s = scalar_from_py(&v, self.inner.context())?;
        self.inner.set(idx.0, idx.1, &s);
        Ok(())
    }

    /// Exact hex text of one entry.
    fn hex(&self, i: usize, j: usize) -> PyResult<String> {
        self.check(i, j)?;
        Ok(self.inner.get(i, j).to_hex())
    }

    /// Decimal text of one entry with `digits` significant digits.
    #[pyo3(signature = (i, j, digits = 20))]
    fn decimal(&self, i: usize, j: usize, digits: usize) -> PyResult<String> {
        self.check(i, j)?;
        Ok(self.inner.get(i, j).to_decimal(digits))
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        (0..self.inner.rows()).map(|i| self.inner.row(i).iter().map(MPScalar::to_f64).collect()).collect()
    }

    fn round_to(&self, bits: u32) -> PyResult<Self> {
        Ok(Self::wrap(self.inner.round_to(ctx(bits)?)))
    }

    fn bit_eq(&self, other: &PyMatrix) -> bool {
        self.inner.bit_eq(&other.inner)
    }

    fn one_norm(&self) -> String {
        mpmm_core::one_norm(&self.inner).to_hex()
    }

    fn __repr__(&self) -> String {
        let (m, n) = self.inner.shape();
        format!("Matrix({m}x{n}, bits={})", self.inner.bits())
    }
}

/// `(C, (mul_count, addsub_count))` for `A @ B` with the given kernel.
#[pyfunction]
#[pyo3(signature = (a, b, kernel = "winograd", n_min = 32, bits = None))]
fn multiply(a: &PyMatrix, b: &PyMatrix, kernel: &str, n_min: usize, bits: Option<u32>) -> PyResult<(PyMatrix, (u64, u64))> {
    let c = ctx(bits.unwrap_or(a.inner.bits()))?;
    let (p, ops) = mpmm_core::multiply(self::kernel(kernel)?, &a.inner, &b.inner, n_min, c).map_err(to_py)?;
    Ok((PyMatrix::wrap(p), (ops.mul, ops.addsub)))
}

#[pyfunction]
fn count_simple(m: usize, l: usize, n: usize) -> (u64, u64) {
    let c = opmodel::count_simple(m, l, n);
    (c.mul, c.addsub)
}

#[pyfunction]
#[pyo3(signature = (algorithm, m, l, n, n_min = 32))]
fn count_fast(algorithm: &str, m: usize, l: usize, n: usize, n_min: usize) -> PyResult<(u64, u64)> {
    let c = opmodel::count_fast(self::algorithm(algorithm)?, m, l, n, n_min);
    Ok((c.mul, c.addsub))
}

/// One dict per size with exact ratios as `(numerator, denominator)` and 3-decimal strings.
#[pyfunction]
#[pyo3(signature = (sizes, n_min = 32))]
fn ratio_table<'py>(py: Python<'py>, sizes: Vec<usize>, n_min: usize) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let shapes: Vec<_> = sizes.iter().map(|&s| opmodel::Shape::square(s)).collect();
    opmodel::ratio_table(&shapes, n_min)
        .into_iter()
        .map(|r| {
            let d = PyDict::new_bound(py);
            d.set_item("size", r.m)?;
            let exact = |x: &opmodel::ExactRatio| (*x.numer(), *x.denom());
            d.set_item("strassen_addsub", exact(&r.strassen_addsub_ratio))?;
            d.set_item("strassen_mul", exact(&r.strassen_mul_ratio))?;
            d.set_item("winograd_addsub", exact(&r.winograd_addsub_ratio))?;
            d.set_item("winograd_mul", exact(&r.winograd_mul_ratio))?;
            d.set_item("display", r.display_ratios().to_vec())?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (sizes, n_min = 32, format = "table"))]
fn opcount_table(sizes: Vec<usize>, n_min: usize, format: &str) -> PyResult<String> {
    let format = match format {
        "table" => TableFormat::Table,
        "csv" => TableFormat::Csv,
        other => return Err(PyValueError::new_err(format!("unknown format {other:?}"))),
    };
    cmd_opcount(&sizes, n_min, format).map_err(to_py)
}

fn strategy(k: Option<usize>, n_min: usize, kernel: &str) -> PyResult<LuStrategy> {
    Ok(match k {
        None => LuStrategy::Columnwise,
        Some(k) => LuStrategy::Blocked(BlockLUConfig::new(k, n_min, self::kernel(kernel)?).map_err(to_py)?),
    })
}

/// `(L, U)`; column-wise when `k` is None, blocked with panel width `k` otherwise.
#[pyfunction]
#[pyo3(signature = (a, k = None, n_min = 32, kernel = "winograd"))]
fn lu(a: &PyMatrix, k: Option<usize>, n_min: usize, kernel: &str) -> PyResult<(PyMatrix, PyMatrix)> {
    let f = blocklu::factorize(&a.inner, strategy(k, n_min, kernel)?, a.inner.context()).map_err(to_py)?;
    Ok((PyMatrix::wrap(f.lower()), PyMatrix::wrap(f.upper())))
}

/// Solves `A x = b` for an `n x 1` right-hand side; returns `x` as `n x 1`.
#[pyfunction]
#[pyo3(signature = (a, b, k = None, n_min = 32, kernel = "winograd"))]
fn solve(a: &PyMatrix, b: &PyMatrix, k: Option<usize>, n_min: usize, kernel: &str) -> PyResult<PyMatrix> {
    if b.inner.cols() != 1 {
        return Err(PyValueError::new_err("right-hand side must be a column"));
    }
    let c = a.inner.context();
    let x = blocklu::solve(&a.inner, b.inner.elements(), strategy(k, n_min, kernel)?, c).map_err(to_py)?;
    Ok(PyMatrix::wrap(MPMatrix::from_fn(x.len(), 1, c, |i, _| x[i - 1].clone()).map_err(to_py)?))
}

/// `||A||_1 ||A^-1||_1` as a decimal string; `bits_hi` defaults to `2 * bits + 64`.
#[pyfunction]
#[pyo3(signature = (a, bits_hi = None, digits = 6))]
fn cond_one(a: &PyMatrix, bits_hi: Option<u32>, digits: usize) -> PyResult<String> {
    let hi = match bits_hi {
        Some(b) => ctx(b)?,
        None => blocklu::default_cond_context(a.inner.bits()),
    };
    Ok(blocklu::cond_one(&a.inner, hi).map_err(to_py)?.to_decimal(digits))
}

/// Largest element-wise relative error as a decimal string.
#[pyfunction]
#[pyo3(signature = (approx, reference, digits = 3))]
fn max_rel_error(approx: &PyMatrix, reference: &PyMatrix, digits: usize) -> PyResult<String> {
    Ok(max_rel_error_mat(&approx.inner, &reference.inner).map_err(to_py)?.max.to_decimal(digits))
}

#[pyfunction]
fn gen_bench_pair(m: usize, l: usize, n: usize, bits: u32) -> PyResult<(PyMatrix, PyMatrix)> {
    let (a, b) = matgen::gen_bench_pair(m, l, n, ctx(bits)?).map_err(to_py)?;
    Ok((PyMatrix::wrap(a), PyMatrix::wrap(b)))
}

#[pyfunction]
fn bench_oracle(m: usize, l: usize, n: usize, bits: u32) -> PyResult<PyMatrix> {
    Ok(PyMatrix::wrap(matgen::bench_oracle_matrix(m, l, n, ctx(bits)?).map_err(to_py)?))
}

#[pyfunction]
#[pyo3(signature = (m, n, seed, bits))]
fn gen_random(m: usize, n: usize, seed: u64, bits: u32) -> PyResult<PyMatrix> {
    Ok(PyMatrix::wrap(matgen::gen_random(m, n, seed, ctx(bits)?).map_err(to_py)?))
}

#[pyfunction]
fn gen_lotkin(n: usize, bits: u32) -> PyResult<PyMatrix> {
    Ok(PyMatrix::wrap(matgen::gen_lotkin(n, ctx(bits)?).map_err(to_py)?))
}

/// `(x_true, b)` as `n x 1` matrices with `x_true = [0, 1, ..., n-1]`.
#[pyfunction]
fn gen_linear_system(a: &PyMatrix) -> PyResult<(PyMatrix, PyMatrix)> {
    let c = a.inner.context();
    let (x, b) = matgen::gen_linear_system(&a.inner, c).map_err(to_py)?;
    let col = |v: &[MPScalar]| MPMatrix::from_fn(v.len(), 1, c, |i, _| v[i - 1].clone()).map_err(to_py);
    Ok((PyMatrix::wrap(col(&x)?), PyMatrix::wrap(col(&b)?)))
}

#[pymodule]
fn mpmm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_function(wrap_pyfunction!(multiply, m)?)?;
    m.add_function(wrap_pyfunction!(count_simple, m)?)?;
    m.add_function(wrap_pyfunction!(count_fast, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_table, m)?)?;
    m.add_function(wrap_pyfunction!(opcount_table, m)?)?;
    m.add_function(wrap_pyfunction!(lu, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(cond_one, m)?)?;
    m.add_function(wrap_pyfunction!(max_rel_error, m)?)?;
    m.add_function(wrap_pyfunction!(gen_bench_pair, m)?)?;
    m.add_function(wrap_pyfunction!(bench_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random, m)?)?;
    m.add_function(wrap_pyfunction!(gen_lotkin, m)?)?;
    m.add_function(wrap_pyfunction!(gen_linear_system, m)?)?;
    Ok(())
}
