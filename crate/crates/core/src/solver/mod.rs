//! Log-barrier interior-point maximizer for smooth concave objectives over
//! `{x : A x >= b, 0 <= x <= upper}`.

mod barrier;

pub use barrier::{
    maximize, relative_slack, BarrierOptions, ConcaveObjective, ConcaveProgram, SolveOutcome, SolveStatus,
    START_SLACK,
};
