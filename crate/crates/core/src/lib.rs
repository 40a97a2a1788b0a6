//! Payload and rate allocation for a multi-antenna downlink link under a
//! strict block-error constraint.
//!
//! The per-antenna SIR law follows from a deterministic topology with
//! Rayleigh fading ([`sir_model`]). From it, [`rate_control`] derives the
//! largest payload that meets an error target in the infinite-blocklength
//! regime for selection combining and maximum ratio combining, and
//! [`finite_blocklength`] refines that payload with the normal
//! approximation at a given blocklength. [`simulator`] samples the physical
//! model directly and serves as an independent check on all of it.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod finite_blocklength;
pub mod numerics;
pub mod rate_control;
pub mod simulator;
pub mod sir_model;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
pub use finite_blocklength::{fb_error_average, fb_error_conditional, fb_kstar, FbEvaluation};
pub use rate_control::{LinkConfig, Method, QuantileMethod, RateSolution, Scheme};
pub use simulator::{run_sim, Semantics, SimReport, SimSpec};
pub use sir_model::{SirDistribution, Topology, TopologyFile};
pub use sweep::{allocate, Axis, Preset, SweepRow, SweepSpec, Table};
pub use validate::{Check, MonteCarloOptions, Scope};
