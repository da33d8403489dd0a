//! Planning as satisfiability for SAS+ tasks.
//!
//! A task ([`SasTask`]) is read from translator output, its transitions are
//! extracted into a [`TransitionTable`], and a bounded horizon is compiled
//! into CNF either by the transition-based encoding ([`sase`]) or by the
//! fact-based baseline ([`pe`]). The embedded solver ([`solver`]) logs its
//! decisions so that [`stats`] can relate branching behaviour to clause
//! occurrence counts. [`plan`] drives the horizon loop and validates plans.

pub mod cnf;
pub mod fixtures;
pub mod pe;
pub mod plan;
pub mod sas;
pub mod sase;
pub mod solver;
pub mod stats;
pub mod transition;

pub use cnf::{Assignment, CliqueMode, CnfInstance, Lit, Role, VarKey};
pub use pe::{PeOptions, StripsView};
pub use plan::{EncodingChoice, ParallelPlan, PlanOutcome, PlanStatus, Validation};
pub use sas::{parse_sas, write_sas, SasError, SasTask, State};
pub use sase::{SaseOptions, SaseReport};
pub use solver::{SolveResult, SolveStatus, SolverConfig};
pub use stats::HProfile;
pub use transition::{extract_transitions, Transition, TransitionTable};
