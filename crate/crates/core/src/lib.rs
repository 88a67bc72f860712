//! Laser-driven particles in inversion-symmetric potentials.
//!
//! The crate decides from symmetry alone whether a periodic drive can give a
//! particle a nonzero time-averaged position or momentum, and checks those
//! predictions with classical and quantum simulations.
//!
//! ```
//! use rectify::classical::SymmetryClass;
//! use rectify::field::{detect_symmetries, DriveField};
//! use rectify::predictor::predict_transport;
//!
//! let field = DriveField::bichromatic(1, 3, 1.0, 0.5, 0.0, 0.2, 1.0)?;
//! let pred = predict_transport(&detect_symmetries(&field)?, SymmetryClass::Reflection);
//! assert!(pred.position_must_vanish && pred.momentum_must_vanish);
//! # Ok::<(), rectify::error::Error>(())
//! ```
//!
//! A guide with runnable examples lives in the `book/` directory.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod field;
pub mod harmonic;
pub mod harness;
mod output;
pub mod potential;
pub mod predictor;
pub mod quantum;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fields.md")]
pub mod book_fields {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/potentials.md")]
pub mod book_potentials {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/harmonic.md")]
pub mod book_harmonic {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/classical.md")]
pub mod book_classical {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/quantum.md")]
pub mod book_quantum {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/predictions.md")]
pub mod book_predictions {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod book_experiments {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub mod book_cli {}
