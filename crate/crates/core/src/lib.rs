#![forbid(unsafe_code)]

//! Numerical toolkit for the L1 summability of complex double Fourier
//! series on the torus.
//!
//! The crate evaluates rectangular partial sums, Cesàro means, and de la
//! Vallée-Poussin means of a truncated coefficient array; machine-checks the
//! summation-by-parts representation identities connecting them (including
//! the six-component decomposition of `V - S`); profiles Tauberian
//! conditions on the coefficients; and runs L1-convergence experiments
//! against certified reference functions.
//!
//! Start with [`CoefficientGrid`] for the data model, [`summability`] for
//! the means, [`identities`] for the residual checks, and
//! [`analysis::convergence_run`] for the experiment harness. The `fourier-l1`
//! binary exposes the same operations as batch subcommands; the guide under
//! `book/` walks through the concepts chapter by chapter.

pub mod analysis;
pub mod cli;
pub mod conditions;
pub mod error;
pub mod families;
pub mod grid;
pub mod identities;
pub mod kernels;
pub mod summability;

mod book;

pub use error::{Error, Result};
pub use families::FamilySpec;
pub use grid::{CoefficientGrid, CoefficientSeq, DiffOrder, Sign, SignedIndex};
pub use kernels::{NormBoundReport, VPParams};
pub use summability::SampleGrid;

pub use num_complex::Complex64;
