#![allow(dead_code)]

use std::time::Duration;

use rdbound::gen::{gen_random, RandomSpec, SplitMix64};
use rdbound::smt::{run_script, SolverConfig, SolverStatus};
use rdbound::System;

/// The solver from `RDBOUND_SOLVER` (default `z3 -in`) with a per-query
/// limit.
pub fn solver(timeout: Duration) -> SolverConfig {
    SolverConfig::from_env(Some(timeout)).expect("solver template")
}

pub fn solver_works(cfg: &SolverConfig) -> bool {
    run_script("(check-sat)\n", cfg).status == SolverStatus::Sat
}

/// Seeded random systems for the suites. System `i` has
/// `vars = 1 + i % max_vars` variables and `1 + below(min(max_actions,
/// 2 * vars))` actions with up to `max_pre` precondition and two effect
/// literals, drawn from seed `base + i`.
pub fn random_suite(count: u64, max_vars: usize, max_actions: usize, max_pre: usize, base: u64) -> Vec<(RandomSpec, System)> {
    (0..count)
        .map(|i| {
            let seed = base + i;
            let vars = 1 + (i as usize % max_vars);
            let actions = 1 + SplitMix64::new(seed).below(max_actions.min(2 * vars) as u64) as usize;
            let spec = RandomSpec {
                max_pre,
                ..RandomSpec::new(vars, actions, seed)
            };
            let sys = gen_random(&spec).expect("suite system draws");
            (spec, sys)
        })
        .collect()
}
