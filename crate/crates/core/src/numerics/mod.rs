//! Special functions, bracketing root finder and adaptive quadrature.
//!
//! Everything here is a pure function of its inputs. The special functions
//! are written so that probabilities deep in a left tail (1e-12 and below)
//! keep their relative precision.

mod quadrature;
mod root;
mod special;

pub use quadrature::{integrate, integrate_semi_infinite, integrate_with_breakpoints, QuadResult, QuadratureSpec};
pub use root::{find_root_monotone, grow_bracket, Bracket};
pub use special::{gamma_p, gamma_q, ln_gamma, q_function, upper_incomplete_gamma_regularized};
