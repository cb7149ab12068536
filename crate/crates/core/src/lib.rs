//! Filtered Krylov subspace eigensolvers for the rightmost eigenpair of large
//! sparse non-symmetric real matrices.
//!
//! The library builds Rayleigh–Ritz subspaces whose expansion vectors are run
//! through dynamically adapted complex Chebyshev polynomial filters, damping
//! the unwanted part of the spectrum relative to the rightmost eigenvalue.
//! Four solver variants share one engine:
//!
//! * [`solvers::rfks_solve`] — relaxed filtered Krylov: the filter ellipse is
//!   rebuilt from the current Ritz values every step, and the combination
//!   vector fed to the filter is selectable (refined, Ritz, weighted, last).
//! * [`solvers::fks_solve`] — filtered Krylov: last-vector combinations and a
//!   filter frozen per restart cycle from an Arnoldi warm-up.
//! * [`solvers::cd_solve`] — Chebyshev–Davidson: Ritz-vector combinations with
//!   per-step filters.
//! * [`solvers::ac_solve`] — Arnoldi–Chebyshev: restarted Arnoldi with a
//!   Chebyshev-filtered restart vector.
//!
//! Supporting modules supply the sparse/dense kernels ([`csr`], [`dense`],
//! [`mgs`]), a self-contained dense eigensolver ([`dense_eig`]), the complex
//! Chebyshev filter machinery ([`chebyshev`]), test problems ([`problems`]),
//! and randomized verification suites ([`verify`]).

pub mod chebyshev;
pub mod csr;
pub mod dense;
pub mod dense_eig;
mod error;
pub mod mgs;
pub mod problems;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
