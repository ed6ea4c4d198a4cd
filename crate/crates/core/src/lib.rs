//! Truncated operator models of the quantum groups SO_q(N) and their
//! rank-two quotient spaces, plus the numerical verification suites built
//! on top of them.
//!
//! The building blocks:
//! - [`scalars`]: q-integers, square-root series coefficients, ladder
//!   coefficients and the tolerance policy.
//! - [`weyl`]: signed-permutation Weyl groups of types B and D, reduced
//!   words and the specific words attached to quotient representations.
//! - [`opcalc`] / [`exprs`]: cut-off operators on tensor products of shift
//!   spaces, graded by Fourier degree on the torus, together with a formal
//!   expression layer on which symbol-type homomorphisms act.
//! - [`repbuilder`]: the R-matrix data, elementary representations,
//!   convolution products, quotient generators and the relation checker
//!   that gates every construction.
//! - [`quea`]: the quantized enveloping algebra action on the first/last
//!   row polynomial algebra and the highest-weight machinery.
//! - [`branching`]: two-step restriction multiplicities by exhaustive
//!   interleaving enumeration.
//! - [`ktheory`]: winding numbers and index defects witnessing K-classes.
//! - [`qlimit`]: generator-level identities between different deformation
//!   parameters and the continuity sweep.
//! - [`report`] / [`suites`]: check reports and the orchestrated suites
//!   behind the CLI.

pub mod branching;
pub mod exprs;
pub mod ktheory;
pub mod opcalc;
pub mod qlimit;
pub mod quea;
pub mod repbuilder;
pub mod report;
pub mod scalars;
pub mod sparse;
pub mod suites;
pub mod weyl;

pub use scalars::QParams;
