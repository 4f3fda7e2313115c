//! Exact Bergman kernels of monomial polyhedra.
//!
//! A monomial polyhedron is the bounded domain
//! `U_B = { z in C^n : |z|^{b^j} < 1 for every row b^j of B }`
//! cut out by an integer matrix `B`. Its Bergman kernel is a rational
//! function of `t = (p_1 conj(q_1), ..., p_n conj(q_n))`:
//!
//! ```text
//!                  1                 sum_nu C_B(nu) t^nu
//! K(p, q) = -------------------- * ------------------------------------
//!           pi^n (det B)^(n-1)     prod_j (t^{(b_-)^j} - t^{(b_+)^j})^2
//! ```
//!
//! The crate computes this form in exact arithmetic ([`kernel`]), checks it
//! against an independent series built from monomial `L^2` norms
//! ([`oracle`]), and against four classical closed formulas for special
//! families of domains ([`special`]).

pub mod dk;
pub mod error;
pub mod int_linalg;
pub mod kernel;
pub mod lattice;
pub mod laurent;
pub mod oracle;
pub mod special;

pub use error::{Error, Result};
pub use int_linalg::{
    IntegerMatrix, NormalizedDefiningMatrix, SignSplit, ValidDefiningMatrix, Validation,
};
pub use kernel::{assemble_kernel, BergmanKernelForm, CanonicityVerdict, NuBox};
pub use laurent::{ExponentVector, LaurentPolynomial};
pub use lattice::Window;
pub use oracle::{OracleReport, OracleSeries};
