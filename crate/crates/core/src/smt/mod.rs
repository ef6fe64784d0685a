//! Recurrence diameter through an external SMT-LIB 2 solver.

mod encode;
mod model;
mod search;
mod solver;

pub use encode::{
    action_symbol, encode_phi1, encode_phi1_graph, encode_phi2, state_symbol, step_symbol, var_symbol, SmtDocument,
};
pub use model::{decode_factored_model, parse_bool_model, FactoredModel};
pub use search::{rd_via_smt, Encoding, QueryRecord, RdResult, RdSearchConfig, Schedule};
pub use solver::{
    run_script, run_solver, SolverConfig, SolverStatus, SolverVerdict, DEFAULT_SOLVER, FILE_PLACEHOLDER, SOLVER_ENV,
};
