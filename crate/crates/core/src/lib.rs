//! Exact state-space topology and compositional plan-length bounds for
//! factored transition systems.
//!
//! * [`system`]: states, actions, execution and the explicit state graph.
//! * [`oracle`]: brute-force `Exp`, diameter, recurrence and traversal
//!   diameters.
//! * [`smt`]: the explicit and factored satisfiability encodings of
//!   `k ≤ rd` and the solver-driven search.
//! * [`compose`]: projections, dependency clusters, base-case functions and
//!   the compositional bound.
//! * [`gen`]: clique, star, lotus and seeded random systems.
//! * [`io`]: system files and CSV reports.

pub mod compose;
pub mod error;
pub mod gen;
pub mod io;
pub mod oracle;
pub mod scc;
pub mod smt;
pub mod system;

pub use error::{Error, Result};
pub use system::{Action, FullState, PartialState, System, TransitionGraph, VarId, Variable};
