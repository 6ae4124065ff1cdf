//! CVL priority, NCVL selection, the per-CL feasibility test and the
//! admission-based schedulers.

mod admission;
mod feasibility;
mod priority;
pub(crate) mod problem;
mod record;
mod schedulers;
mod selection;

pub use admission::{ClState, NcvlPool};
pub use feasibility::{check_feasibility, FeasibilityResult, SINGULAR_TOL};
pub use priority::{assign_cvl_priority, random_cvl_priority, PriorityOrder, PriorityRule};
pub use problem::{build_qos_matrix, PerClProblem};
pub use record::{matching_record, parse_record, GroupRecord};
pub use schedulers::{
    allocate_powers, msera_one, msera_two, random_cvl_baseline, random_ncvl_baseline, AdmissionOrder, Allocation,
    CandidateChoice, Matching, Msera, PrioritySource, Registry, ScheduleOptions, Scheduler,
};
pub use selection::{minmax_score, select_candidate_ncvl, MinMaxScores};
