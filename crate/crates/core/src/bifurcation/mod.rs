//! Bifurcation analysis along the pencil spectrum: necessary and sufficient
//! conditions, branch detection on the reduced problem, classification of the
//! reduced origin, Morse relations and translation orbits.

mod branches;
mod conditions;
mod morse;
mod orbit;
mod origin;

pub use branches::{
    detect_branches, reduced_newton, write_branch_csv, Alternative, BifurcationReport, Branch,
    BranchOptions, BranchPoint, CandidateReport, GridGap, PencilSummary,
};
pub use conditions::{
    classify_conditions, index_jump_report, jump_epsilon, necessary_test, ConditionClass,
    IndexJumpReport, NecessaryVerdict,
};
pub use morse::{
    critical_point_census, morse_inequality_audit, CensusOptions, CriticalPoint, MorseAudit,
    PartialSum,
};
pub use orbit::{orbit_distance, orbit_group, translate, OrbitReport};
pub use origin::{classify_reduced_origin, OriginClass, OriginClassification};
