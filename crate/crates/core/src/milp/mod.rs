//! Solver-neutral integer programs: three formulations of the scheduling
//! problem, LP and MPS writers, and an adapter for external solvers.

mod build;
mod external;
mod model;
mod read;
mod write;

pub use build::{
    build_flow, build_milp1, build_milp1_plus, build_model, flow_from_values, schedule_from_values, BuiltModel,
    Formulation,
};
pub use external::{parse_solution_file, solve_external, ExternalSolution, SolutionFile, KILL_GRACE};
pub use model::{lp_relaxation, sanitize_name, Constraint, MilpModel, ModelStats, Relation, Variable, MAX_NAME_LEN};
pub use read::{parse_mps, read_mps, MpsError};
pub use write::{render_lp, render_mps, write_lp, write_mps};
