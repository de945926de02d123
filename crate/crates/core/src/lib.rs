//! Core engine for capacity-expansion planning under emissions-performance
//! regulations.
//!
//! The crate is organised around a single pipeline:
//!
//! 1. [`system`] — domain model (zones, fuels, generator clusters, storage,
//!    transmission, time structure) plus validation and raw-unit clustering.
//! 2. [`policy`] — regulations as data: applicability predicates, compliance
//!    pathways, effective periods, and compilation of a scenario into
//!    per-cluster constraint sets.
//! 3. [`builder`] — assembly of one planning stage as a bounded-variable
//!    linear program (investment, retirement, retrofit, multi-fuel dispatch,
//!    storage, transmission, electrolysis, policy rows, tax credits).
//! 4. [`simplex`] — deterministic bounded-variable revised simplex.
//! 5. [`driver`] — the myopic multi-period loop with capacity carryover and
//!    the economic-retirement pre-pass.
//! 6. [`report`] — emissions accounting, capacity factors, abatement costs,
//!    and delimited table rendering.
//!
//! The crate is `no_std` (with `alloc`); all file and process I/O lives in
//! the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod builder;
pub mod credits;
pub mod demo;
pub mod driver;
pub mod lp;
pub mod mps;
pub mod policy;
pub mod report;
pub mod simplex;
pub mod system;
