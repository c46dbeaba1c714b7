//! Numerical value-distribution toolkit for holomorphic curves `C -> P^m`.
//!
//! The crate is `no_std` (it needs `alloc`). Real transcendental functions go
//! through [`libm`], so results are bit-identical across platforms. Enabling
//! the `parallel` feature pulls in `std` and `rayon` and parallelises grid
//! scans and per-annulus work; outputs stay deterministic because results
//! are collected in input order.
//!
//! Module map:
//!
//! * [`projective`]: linear forms, exact admissibility of divisor systems and
//!   the compactness constants of a subsystem.
//! * [`curve`]: holomorphic curve families with overflow-safe evaluation in
//!   `(direction, log_norm)` form.
//! * [`potential`]: measure oracles, Riesz masses by Green's identity, the
//!   characteristic function, harmonic majorants and rescaled potentials.
//! * [`selection`]: the doubling disc-selection procedure, its annulus
//!   variant and the 100-disc covering.
//! * [`zeros`]: argument-principle zero counting of `P ∘ F`.
//! * [`julia`]: circles de remplissage, Julia directions and sector omission.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod curve;
pub mod error;
pub mod julia;
pub mod lowdisc;
pub mod numeric;
pub mod potential;
pub mod projective;
pub mod selection;
pub mod zeros;

pub use num_complex::Complex64 as C64;

pub use crate::curve::{Curve, CurveSample, CurveSpec, InnerMap, LogValue};
pub use crate::error::{Error, Result};

pub use crate::potential::{Disc, Measure, MeasureOracle};
pub use crate::projective::{DivisorSystem, LinearForm};
pub use crate::selection::{DiscRecord, SelectionParams};
