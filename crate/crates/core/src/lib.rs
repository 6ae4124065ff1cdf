//! Resource allocation for dense underlay C-V2X cells.
//!
//! Non-cellular vehicular links (NCVLs) are matched onto the cellular links
//! (CLs) owned by cellular vehicular links (CVLs). Every candidate group is
//! screened with a closed-form M-matrix feasibility test and the surviving
//! groups receive transmit powers from a difference-of-convex
//! majorization-minimization loop.
//!
//! * [`scenario`] draws cell topologies and channel gains.
//! * [`matching`] holds the CVL priority rule, NCVL selection, the
//!   feasibility test and the scheduler registry.
//! * [`power`] evaluates rates and runs the power allocation.
//! * [`solver`] is the log-barrier maximizer used for each convex subproblem.
//! * [`harness`] runs Monte-Carlo experiments and the brute-force oracles.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod matching;
pub mod power;
pub mod scenario;
pub mod solver;
pub mod units;

pub use error::{Error, Result};
