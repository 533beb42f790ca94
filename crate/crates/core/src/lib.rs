//! Multiple-precision dense matrix multiplication.
//!
//! Four product algorithms share one scalar layer backed by MPFR:
//! the three-loop product, a cache-blocked product, Strassen's recursion and
//! Winograd's variant. The recursive algorithms report exact operation
//! counts that agree with the closed-form model in [`opmodel`]. [`blocklu`]
//! applies the products to the Schur-complement update of a pivot-free
//! blocked LU decomposition, and [`bench`] drives the benchmark experiments.

pub mod bench;
pub mod blocklu;
pub mod densemat;
pub mod error;
pub mod fastmm;
pub mod matgen;
pub mod opmodel;
pub mod precision;

pub use blocklu::{
    cond_one, lu_blocked, lu_columnwise, max_rel_error_solution, solve, BlockLUConfig, LUFactors,
    LuStrategy,
};
pub use densemat::{block_mul, mat_addsub, one_norm, simple_mul, AddSub, MPMatrix, MatrixView};
pub use error::{Error, Result};
pub use fastmm::{fast_mul, multiply, FastAlgorithm, FastMMConfig, MulKernel, OddDimPolicy};
pub use opmodel::{count_fast, count_fast_with_policy, count_simple, OpCounter};
pub use precision::{rel_error, MPScalar, PrecisionContext};
