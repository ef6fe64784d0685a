//! Computing the recurrence diameter with a sequence of satisfiability
//! queries.

use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::exp_bound;
use crate::system::{build_transition_graph, System, TransitionGraph, DEFAULT_EXPLICIT_CAP};

use super::encode::{encode_phi1_graph, encode_phi2, SmtDocument};
use super::model::{decode_factored_model, FactoredModel};
use super::solver::{run_script, SolverConfig, SolverStatus, SolverVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// Whole state graph over an uninterpreted sort.
    Explicit,
    /// Action and variable Booleans per step.
    Factored,
}

impl Encoding {
    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::Explicit => "explicit",
            Encoding::Factored => "factored",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// k = 1, 2, 3, ... until the first unsat.
    #[default]
    Linear,
    /// k = 1, 2, 4, ... until the first unsat, then bisection.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RdSearchConfig {
    pub encoding: Encoding,
    pub schedule: Schedule,
    pub solver: SolverConfig,
    pub explicit_cap: usize,
    /// Answer `k > Exp(δ)` as unsat without calling the solver. Those
    /// queries are pigeonhole instances and get very slow once `rd = Exp`.
    pub skip_beyond_exp: bool,
    /// Request and check a model for every sat factored query.
    pub extract_models: bool,
}

impl RdSearchConfig {
    pub fn new(encoding: Encoding, solver: SolverConfig) -> Self {
        Self {
            encoding,
            schedule: Schedule::Linear,
            solver,
            explicit_cap: DEFAULT_EXPLICIT_CAP,
            skip_beyond_exp: false,
            extract_models: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryRecord {
    pub k: u64,
    pub verdict: SolverVerdict,
    /// Set when the answer followed from `k > Exp(δ)` without a solver call.
    pub skipped: bool,
    #[serde(skip)]
    pub model: Option<FactoredModel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RdResult {
    pub rd: u64,
    /// False when a query timed out or came back unknown; `rd` is then only
    /// the largest `k` confirmed satisfiable.
    pub exact: bool,
    pub queries: Vec<QueryRecord>,
    pub encoding: Encoding,
}

impl RdResult {
    pub fn solver_time(&self) -> Duration {
        self.queries.iter().map(|q| q.verdict.elapsed).sum()
    }

    pub fn solver_calls(&self) -> usize {
        self.queries.iter().filter(|q| !q.skipped).count()
    }
}

enum Answer {
    Sat,
    Unsat,
    Stop,
}

struct Querier<'a> {
    sys: &'a System,
    cfg: &'a RdSearchConfig,
    graph: Option<TransitionGraph>,
    exp: u64,
    log: Vec<QueryRecord>,
}

impl Querier<'_> {
    fn document(&self, k: u64) -> Result<SmtDocument> {
        match &self.graph {
            Some(g) => encode_phi1_graph(g, k),
            None => encode_phi2(self.sys, k),
        }
    }

    fn ask(&mut self, k: u64) -> Result<Answer> {
        if self.cfg.skip_beyond_exp && k > self.exp {
            self.log.push(QueryRecord {
                k,
                verdict: SolverVerdict {
                    status: SolverStatus::Unsat,
                    elapsed: Duration::ZERO,
                    raw: "unsat".into(),
                    rest: String::new(),
                },
                skipped: true,
                model: None,
            });
            return Ok(Answer::Unsat);
        }
        let doc = self.document(k)?;
        let want_model = self.cfg.extract_models && self.cfg.encoding == Encoding::Factored;
        let script = if want_model {
            doc.with_model_request()
        } else {
            doc.text().to_string()
        };
        let verdict = run_script(&script, &self.cfg.solver);
        let model = if want_model && verdict.status == SolverStatus::Sat {
            Some(decode_factored_model(self.sys, k, &verdict.rest)?)
        } else {
            None
        };
        let status = verdict.status;
        self.log.push(QueryRecord {
            k,
            verdict,
            skipped: false,
            model,
        });
        match status {
            SolverStatus::Sat => Ok(Answer::Sat),
            SolverStatus::Unsat => Ok(Answer::Unsat),
            SolverStatus::Unknown | SolverStatus::Timeout => Ok(Answer::Stop),
            SolverStatus::SolverError => {
                let raw = self.log.last().map(|q| q.verdict.raw.clone()).unwrap_or_default();
                Err(Error::Solver {
                    message: format!("query k={k}: {raw}"),
                    log: std::mem::take(&mut self.log),
                })
            }
        }
    }
}

/// Finds the largest `k` for which the chosen encoding is satisfiable.
///
/// `k = 0` always holds (a single state is a simple path), so the search
/// starts at 1 and reports 0 when `k = 1` is unsat.
pub fn rd_via_smt(sys: &System, cfg: &RdSearchConfig) -> Result<RdResult> {
    let graph = match cfg.encoding {
        Encoding::Explicit => Some(build_transition_graph(sys, cfg.explicit_cap)?),
        Encoding::Factored => None,
    };
    let mut q = Querier {
        sys,
        cfg,
        graph,
        exp: exp_bound(sys),
        log: Vec::new(),
    };

    let mut lo = 0u64; // largest k known sat
    let finish = |q: Querier, rd: u64, exact: bool| RdResult {
        rd,
        exact,
        queries: q.log,
        encoding: cfg.encoding,
    };

    match cfg.schedule {
        Schedule::Linear => {
            let mut k = 1;
            loop {
                match q.ask(k)? {
                    Answer::Sat => lo = k,
                    Answer::Unsat => return Ok(finish(q, lo, true)),
                    Answer::Stop => return Ok(finish(q, lo, false)),
                }
                k += 1;
            }
        }
        Schedule::Binary => {
            let mut k = 1u64;
            let mut hi = loop {
                match q.ask(k)? {
                    Answer::Sat => lo = k,
                    Answer::Unsat => break k,
                    Answer::Stop => return Ok(finish(q, lo, false)),
                }
                k = k.saturating_mul(2);
            };
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                match q.ask(mid)? {
                    Answer::Sat => lo = mid,
                    Answer::Unsat => hi = mid,
                    Answer::Stop => return Ok(finish(q, lo, false)),
                }
            }
            Ok(finish(q, lo, true))
        }
    }
}
