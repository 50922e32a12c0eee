//! Monotone extremal majorants of `sgn(x)`, Beurling's majorant, their
//! Fourier transforms, and numerical checks of the weighted Hilbert
//! inequality built on them.

// NaN-rejecting `!(a < b)` guards, tabulated constants and index loops are deliberate here.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod cli;
pub mod error;
pub mod extremal;
pub mod fourier;
pub mod hilbert;
pub mod quad;
pub mod specfun;
