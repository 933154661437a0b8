//! Reasoning toolkit for a two-sorted multi-modal action logic with
//! explicit time.
//!
//! The crate is organized around five layers:
//!
//! * [`syntax`]: terms, formulas, signatures, a parser for the ASCII
//!   surface grammar, and a canonical renderer.
//! * [`temporal`]: exact rational time expressions, ordering
//!   constraints, and parametric action laws.
//! * [`semantics`]: finite Kripke structures with action transition
//!   maps, model validation, evaluation, and bounded-exhaustive model
//!   enumeration / search used as a test oracle.
//! * [`tableau`]: a labelled tableau decision procedure for the
//!   grounded finite-domain fragment (S4 for the historical necessity
//!   box, K for each ground action modality).
//! * [`scenario`]: temporal action scenarios with occurrence
//!   statements and nonmonotonic persistency assumptions.
//!
//! [`corpus`] generates seeded random formula corpora and runs the
//! prover-versus-oracle comparison; with the default `parallel`
//! feature the sweeps shard across threads via rayon and fall back to
//! sequential loops when the feature is disabled.

pub mod corpus;
pub mod scenario;
pub mod semantics;
pub mod syntax;
pub mod tableau;
pub mod temporal;

pub mod par;
