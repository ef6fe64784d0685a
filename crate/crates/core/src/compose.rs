//! Projections, variable dependencies and compositional bounds.
//!
//! A system is split into the strongly connected components of its variable
//! dependency graph. Each cluster is bounded on its own projection with a
//! base-case function, and the per-cluster values are folded along the
//! topological order of the clusters.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{exp_bound, longest_simple_path_until, traversal_diameter, DEFAULT_RD_STATE_CAP, MAX_BOUND};
use crate::scc::strongly_connected_components;
use crate::smt::{rd_via_smt, Encoding, RdSearchConfig, Schedule, SolverConfig};
use crate::system::{build_transition_graph, Action, System, TransitionGraph, VarId, DEFAULT_EXPLICIT_CAP};

/// Restricts every action to `vs` and drops actions left without an effect.
///
/// The projected system declares exactly the variables of `vs`, renumbered
/// in ascending parent id order and keeping their names.
pub fn project(sys: &System, vs: &BTreeSet<VarId>) -> Result<System> {
    if let Some(&v) = vs.iter().find(|&&v| sys.domain_position(v).is_none()) {
        let name = sys.variables().get(v).map_or_else(|| format!("#{v}"), |x| x.name.clone());
        return Err(Error::DomainMismatch(format!("projection variable {name} is outside the system domain")));
    }
    let index: BTreeMap<VarId, VarId> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let keep = |v: VarId| index.contains_key(&v);
    let actions = sys
        .actions()
        .iter()
        .filter_map(|a| {
            let eff = a.eff.restrict(keep);
            if eff.is_empty() {
                return None;
            }
            let pre = a.pre.restrict(keep);
            Some(Action::new(pre.remap(|v| index[&v]), eff.remap(|v| index[&v])))
        })
        .collect();
    let names = vs.iter().map(|&v| sys.var_name(v).to_string()).collect();
    System::new(names, actions)
}

/// Edge `u → v` iff some action has `v` in its effect and `u` in its
/// precondition or effect, `u ≠ v`. Every variable of `D(δ)` is a key.
pub fn dependency_graph(sys: &System) -> BTreeMap<VarId, BTreeSet<VarId>> {
    let mut g: BTreeMap<VarId, BTreeSet<VarId>> = sys.domain().iter().map(|&v| (v, BTreeSet::new())).collect();
    for a in sys.actions() {
        let from = a.domain();
        for v in a.eff.domain() {
            for &u in &from {
                if u != v {
                    g.get_mut(&u).expect("action variable in domain").insert(v);
                }
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterDecomposition {
    /// Variable clusters, ancestors before dependents. Each is sorted.
    pub clusters: Vec<Vec<VarId>>,
    /// Cluster-level dependency edges, by index into `clusters`.
    pub edges: Vec<Vec<usize>>,
}

/// Strongly connected components of the dependency graph in topological
/// order; among ready clusters the one holding the smallest variable id goes
/// first.
pub fn decompose(sys: &System) -> ClusterDecomposition {
    let dom = sys.domain();
    let dep = dependency_graph(sys);
    let succ: Vec<Vec<u32>> = dom
        .iter()
        .map(|v| {
            dep[v]
                .iter()
                .map(|w| sys.domain_position(*w).expect("dependency in domain") as u32)
                .collect()
        })
        .collect();
    let cond = strongly_connected_components(dom.len(), |u| &succ[u]);
    let dag = cond.dag(|u| &succ[u]);

    let mut indeg = vec![0usize; cond.len()];
    for out in &dag {
        for &d in out {
            indeg[d] += 1;
        }
    }
    let key = |c: usize| dom[cond.members[c][0]];
    let mut ready: BinaryHeap<Reverse<(VarId, usize)>> =
        (0..cond.len()).filter(|&c| indeg[c] == 0).map(|c| Reverse((key(c), c))).collect();
    let mut order = Vec::with_capacity(cond.len());
    while let Some(Reverse((_, c))) = ready.pop() {
        order.push(c);
        for &d in &dag[c] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                ready.push(Reverse((key(d), d)));
            }
        }
    }
    let mut rank = vec![0; cond.len()];
    for (i, &c) in order.iter().enumerate() {
        rank[c] = i;
    }
    let clusters = order
        .iter()
        .map(|&c| cond.members[c].iter().map(|&p| dom[p]).collect())
        .collect();
    let edges = order
        .iter()
        .map(|&c| {
            let mut out: Vec<usize> = dag[c].iter().map(|&d| rank[d]).collect();
            out.sort_unstable();
            out
        })
        .collect();
    ClusterDecomposition { clusters, edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BaseCaseKind {
    Exp,
    Td,
    Rd,
    /// `rd` when `td` exceeds the trigger, else `td`.
    B1,
    /// `b1` when `Exp` is within the state cap, else `td`.
    B2,
}

impl BaseCaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BaseCaseKind::Exp => "exp",
            BaseCaseKind::Td => "td",
            BaseCaseKind::Rd => "rd",
            BaseCaseKind::B1 => "b1",
            BaseCaseKind::B2 => "b2",
        }
    }
}

pub const DEFAULT_RD_STATE_CAP_B2: u64 = 50;
pub const DEFAULT_TD_TRIGGER: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BaseCase {
    pub kind: BaseCaseKind,
    pub rd_state_cap: u64,
    pub td_trigger: u64,
}

impl BaseCase {
    pub fn new(kind: BaseCaseKind) -> Self {
        Self {
            kind,
            rd_state_cap: DEFAULT_RD_STATE_CAP_B2,
            td_trigger: DEFAULT_TD_TRIGGER,
        }
    }

    pub fn with_limits(kind: BaseCaseKind, rd_state_cap: u64, td_trigger: u64) -> Result<Self> {
        if rd_state_cap == 0 {
            return Err(Error::Config("rd state cap must be at least 1".into()));
        }
        Ok(Self {
            kind,
            rd_state_cap,
            td_trigger,
        })
    }
}

/// Which property a base-case value actually is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Exp,
    Td,
    Rd,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::Exp => "exp",
            Property::Td => "td",
            Property::Rd => "rd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RdMethod {
    /// Factored SMT queries, falling back to explicit search when they do
    /// not settle.
    #[default]
    Smt,
    /// Explicit longest-path search only.
    Bruteforce,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposeConfig {
    pub rd_method: RdMethod,
    pub solver: SolverConfig,
    pub schedule: Schedule,
    pub explicit_cap: usize,
    /// Largest state space handed to the explicit longest-path search.
    pub rd_bruteforce_cap: usize,
    /// Wall-clock budget for the explicit search of one cluster.
    pub rd_bruteforce_timeout: Option<Duration>,
    /// Bound clusters concurrently on the current rayon pool.
    pub parallel: bool,
}

impl ComposeConfig {
    pub fn new(solver: SolverConfig) -> Self {
        Self {
            rd_method: RdMethod::Smt,
            solver,
            schedule: Schedule::Linear,
            explicit_cap: DEFAULT_EXPLICIT_CAP,
            rd_bruteforce_cap: DEFAULT_RD_STATE_CAP,
            rd_bruteforce_timeout: None,
            parallel: false,
        }
    }

    /// Explicit rd only; never starts a solver.
    pub fn bruteforce() -> Self {
        Self {
            rd_method: RdMethod::Bruteforce,
            ..Self::new(SolverConfig::from_template(crate::smt::DEFAULT_SOLVER, None).expect("default template"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaseValue {
    pub value: u64,
    pub property: Property,
    /// Why a cheaper, larger property replaced the requested one.
    pub degraded: Option<String>,
    pub rd_queries: usize,
    pub rd_time: Duration,
    pub td_time: Duration,
}

struct Evaluator<'a> {
    sys: &'a System,
    cfg: &'a ComposeConfig,
    graph: Option<std::result::Result<TransitionGraph, String>>,
    td: Option<std::result::Result<u64, String>>,
    out: BaseValue,
}

impl<'a> Evaluator<'a> {
    fn new(sys: &'a System, cfg: &'a ComposeConfig) -> Self {
        Self {
            sys,
            cfg,
            graph: None,
            td: None,
            out: BaseValue {
                value: 0,
                property: Property::Exp,
                degraded: None,
                rd_queries: 0,
                rd_time: Duration::ZERO,
                td_time: Duration::ZERO,
            },
        }
    }

    fn graph(&mut self) -> std::result::Result<&TransitionGraph, String> {
        if self.graph.is_none() {
            let g = build_transition_graph(self.sys, self.cfg.explicit_cap).map_err(|e| e.to_string());
            self.graph = Some(g);
        }
        self.graph.as_ref().unwrap().as_ref().map_err(Clone::clone)
    }

    fn td(&mut self) -> std::result::Result<u64, String> {
        if self.td.is_none() {
            let t = Instant::now();
            let td = self.graph().map(traversal_diameter);
            self.out.td_time += t.elapsed();
            self.td = Some(td);
        }
        self.td.clone().unwrap()
    }

    fn degrade(&mut self, why: String) {
        self.out.degraded = Some(match self.out.degraded.take() {
            Some(prev) => format!("{prev}; {why}"),
            None => why,
        });
    }

    fn set(&mut self, value: u64, property: Property) {
        self.out.value = value;
        self.out.property = property;
    }

    fn exp(&mut self) {
        self.set(exp_bound(self.sys), Property::Exp);
    }

    fn use_td(&mut self) {
        match self.td() {
            Ok(td) => self.set(td, Property::Td),
            Err(e) => {
                self.degrade(format!("td unavailable ({e}), used exp"));
                self.exp();
            }
        }
    }

    fn rd_bruteforce(&mut self) -> std::result::Result<u64, String> {
        let deadline = self.cfg.rd_bruteforce_timeout.map(|d| Instant::now() + d);
        let cap = self.cfg.rd_bruteforce_cap;
        let t = Instant::now();
        let found = self.graph().and_then(|g| longest_simple_path_until(g, cap, deadline).map_err(|e| e.to_string()));
        self.out.rd_time += t.elapsed();
        match found? {
            Some(p) => Ok(p.length),
            None => Err("explicit rd search timed out".into()),
        }
    }

    fn rd_smt(&mut self) -> std::result::Result<u64, String> {
        let mut rc = RdSearchConfig::new(Encoding::Factored, self.cfg.solver.clone());
        rc.schedule = self.cfg.schedule;
        rc.skip_beyond_exp = true;
        let found = rd_via_smt(self.sys, &rc);
        match found {
            Ok(r) => {
                self.out.rd_queries += r.solver_calls();
                self.out.rd_time += r.solver_time();
                if r.exact {
                    Ok(r.rd)
                } else {
                    Err(format!("solver stopped after confirming rd >= {}", r.rd))
                }
            }
            Err(Error::Solver { message, log }) => {
                self.out.rd_queries += log.iter().filter(|q| !q.skipped).count();
                self.out.rd_time += log.iter().map(|q| q.verdict.elapsed).sum::<Duration>();
                Err(message)
            }
            Err(e) => Err(e.to_string()),
        }
    }

    fn use_rd(&mut self) {
        let found = match self.cfg.rd_method {
            RdMethod::Bruteforce => self.rd_bruteforce(),
            RdMethod::Smt => self.rd_smt().or_else(|e| {
                self.rd_bruteforce().map_err(|e2| format!("{e}; explicit fallback: {e2}"))
            }),
        };
        match found {
            Ok(rd) => self.set(rd, Property::Rd),
            Err(e) => {
                self.degrade(format!("rd unavailable ({e}), used td"));
                self.use_td();
            }
        }
    }

    fn use_b1(&mut self, trigger: u64) {
        match self.td() {
            Ok(td) if td > trigger => self.use_rd(),
            Ok(td) => self.set(td, Property::Td),
            Err(e) => {
                self.degrade(format!("td unavailable ({e}), used exp"));
                self.exp();
            }
        }
    }
}

/// Evaluates one base-case function. Failures of the expensive properties
/// fall back to a larger, cheaper one and are recorded in
/// [`BaseValue::degraded`].
pub fn base_case(sys: &System, base: &BaseCase, cfg: &ComposeConfig) -> BaseValue {
    let mut ev = Evaluator::new(sys, cfg);
    match base.kind {
        BaseCaseKind::Exp => ev.exp(),
        BaseCaseKind::Td => ev.use_td(),
        BaseCaseKind::Rd => ev.use_rd(),
        BaseCaseKind::B1 => ev.use_b1(base.td_trigger),
        BaseCaseKind::B2 => {
            if exp_bound(sys) <= base.rd_state_cap {
                ev.use_b1(base.td_trigger)
            } else {
                ev.use_td()
            }
        }
    }
    ev.out
}

/// `B_1 = b_1`, `B_i = B_{i-1} + (B_{i-1} + 1) · b_i`, saturating.
pub fn fold_bounds(values: &[u64]) -> u64 {
    let mut it = values.iter();
    let Some(&first) = it.next() else { return 0 };
    it.fold(first, |acc, &b| acc.saturating_add(acc.saturating_add(1).saturating_mul(b)))
        .min(MAX_BOUND)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterReport {
    pub vars: Vec<String>,
    #[serde(flatten)]
    pub base: BaseValue,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub total: u64,
    pub clusters: Vec<ClusterReport>,
    pub base: BaseCase,
}

impl BoundReport {
    pub fn degraded(&self) -> bool {
        self.clusters.iter().any(|c| c.base.degraded.is_some())
    }

    pub fn max_cluster_vars(&self) -> usize {
        self.clusters.iter().map(|c| c.vars.len()).max().unwrap_or(0)
    }

    pub fn rd_queries(&self) -> usize {
        self.clusters.iter().map(|c| c.base.rd_queries).sum()
    }

    pub fn rd_time(&self) -> Duration {
        self.clusters.iter().map(|c| c.base.rd_time).sum()
    }

    pub fn td_time(&self) -> Duration {
        self.clusters.iter().map(|c| c.base.td_time).sum()
    }
}

/// Bounds every cluster of [`decompose`] and folds the values in order.
pub fn compositional_bound(sys: &System, base: &BaseCase, cfg: &ComposeConfig) -> Result<BoundReport> {
    let dec = decompose(sys);
    let one = |vars: &Vec<VarId>| -> Result<ClusterReport> {
        let t = Instant::now();
        let set: BTreeSet<VarId> = vars.iter().copied().collect();
        let p = project(sys, &set)?;
        let value = base_case(&p, base, cfg);
        Ok(ClusterReport {
            vars: vars.iter().map(|&v| sys.var_name(v).to_string()).collect(),
            base: value,
            elapsed: t.elapsed(),
        })
    };
    let clusters: Vec<ClusterReport> = if cfg.parallel {
        dec.clusters.par_iter().map(one).collect::<Result<_>>()?
    } else {
        dec.clusters.iter().map(one).collect::<Result<_>>()?
    };
    let values: Vec<u64> = clusters.iter().map(|c| c.base.value).collect();
    Ok(BoundReport {
        total: fold_bounds(&values),
        clusters,
        base: *base,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::gen::{gen_clique, gen_lotus_product, gen_random, gen_star, RandomSpec};
    use crate::oracle::{diameter, longest_simple_path};
    use crate::system::tests::{example1, lit, ps};

    fn toggles(n: usize) -> System {
        let actions = (0..n)
            .flat_map(|v| [true, false].map(|b| Action::new(ps(&[]), ps(&[lit(v, b)]))))
            .collect();
        System::with_anonymous_vars(n, actions).unwrap()
    }

    fn chain() -> System {
        let actions = vec![
            Action::new(ps(&[lit(0, true)]), ps(&[lit(1, true)])),
            Action::new(ps(&[lit(1, true)]), ps(&[lit(2, true)])),
            Action::new(ps(&[]), ps(&[lit(0, true)])),
            Action::new(ps(&[]), ps(&[lit(0, false)])),
        ];
        System::with_anonymous_vars(3, actions).unwrap()
    }

    fn set(vs: &[VarId]) -> BTreeSet<VarId> {
        vs.iter().copied().collect()
    }

    fn bound(sys: &System, kind: BaseCaseKind) -> BoundReport {
        compositional_bound(sys, &BaseCase::new(kind), &ComposeConfig::bruteforce()).unwrap()
    }

    #[test]
    fn projection_examples() {
        let p = project(&example1(), &set(&[0])).unwrap();
        let expect = vec![
            Action::new(ps(&[]), ps(&[lit(0, false)])),
            Action::new(ps(&[]), ps(&[lit(0, true)])),
        ];
        assert_eq!(p.actions(), expect.as_slice());
        assert_eq!(p.variables().len(), 1);

        assert_eq!(project(&example1(), &set(&[0, 1])).unwrap(), example1());
        assert!(project(&example1(), &set(&[])).unwrap().actions().is_empty());
        assert!(matches!(project(&example1(), &set(&[5])), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn projection_keeps_names_and_renumbers() {
        let sys = System::new(
            vec!["a", "b", "c"],
            vec![Action::new(ps(&[lit(0, true)]), ps(&[lit(2, false)]))],
        )
        .unwrap();
        let p = project(&sys, &set(&[2])).unwrap();
        assert_eq!(p.var_name(0), "c");
        assert_eq!(p.actions(), &[Action::new(ps(&[]), ps(&[lit(0, false)]))]);
    }

    #[test]
    fn dependency_examples() {
        let g = dependency_graph(&example1());
        assert_eq!(g[&0], set(&[1]));
        assert_eq!(g[&1], set(&[0]));

        assert!(dependency_graph(&toggles(2)).values().all(BTreeSet::is_empty));

        let one = System::with_anonymous_vars(2, vec![Action::new(ps(&[lit(0, true)]), ps(&[lit(1, true)]))]).unwrap();
        let g = dependency_graph(&one);
        assert_eq!(g[&0], set(&[1]));
        assert!(g[&1].is_empty());
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(decompose(&example1()).clusters, vec![vec![0, 1]]);
        assert_eq!(decompose(&toggles(2)).clusters, vec![vec![0], vec![1]]);
        let d = decompose(&chain());
        assert_eq!(d.clusters, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(d.edges, vec![vec![1], vec![2], vec![]]);
    }

    #[test]
    fn decomposition_tie_break_prefers_small_ids() {
        // 2 → 0 with 1 independent: the ready set starts as {1, 2}.
        let sys = System::with_anonymous_vars(
            3,
            vec![
                Action::new(ps(&[lit(2, true)]), ps(&[lit(0, true)])),
                Action::new(ps(&[]), ps(&[lit(1, true)])),
            ],
        )
        .unwrap();
        assert_eq!(decompose(&sys).clusters, vec![vec![1], vec![2], vec![0]]);
    }

    #[test]
    fn base_case_examples() {
        let cfg = ComposeConfig::bruteforce();
        let star = gen_star(3).unwrap();
        let b1 = base_case(&star, &BaseCase::new(BaseCaseKind::B1), &cfg);
        assert_eq!((b1.value, b1.property, b1.rd_queries), (1, Property::Td, 0));
        assert_eq!(b1.rd_time, Duration::ZERO);

        let b1 = base_case(&example1(), &BaseCase::new(BaseCaseKind::B1), &cfg);
        assert_eq!((b1.value, b1.property), (3, Property::Rd));

        let b2 = base_case(&example1(), &BaseCase::new(BaseCaseKind::B2), &cfg);
        assert_eq!((b2.value, b2.property), (3, Property::Rd));
        let tight = BaseCase::with_limits(BaseCaseKind::B2, 2, 2).unwrap();
        let b2 = base_case(&example1(), &tight, &cfg);
        assert_eq!((b2.value, b2.property), (3, Property::Td));

        assert!(BaseCase::with_limits(BaseCaseKind::B2, 0, 2).is_err());
    }

    #[test]
    fn composition_examples() {
        let r = bound(&toggles(2), BaseCaseKind::Rd);
        assert_eq!(r.clusters.iter().map(|c| c.base.value).collect::<Vec<_>>(), vec![1, 1]);
        assert_eq!(r.total, 3);
        let g = build_transition_graph(&toggles(2), 20).unwrap();
        assert_eq!(longest_simple_path(&g, 4096).unwrap().length, 3);

        let r = bound(&toggles(2), BaseCaseKind::B1);
        assert_eq!(r.total, 3);
        assert!(r.clusters.iter().all(|c| c.base.property == Property::Td));
        assert_eq!(bound(&toggles(2), BaseCaseKind::Td).total, 3);

        assert_eq!(bound(&example1(), BaseCaseKind::Rd).total, 3);
        assert_eq!(bound(&chain(), BaseCaseKind::Rd).total, 7);
        assert_eq!(bound(&gen_clique(2, 20).unwrap(), BaseCaseKind::B1).total, 3);
        assert_eq!(bound(&gen_star(3).unwrap(), BaseCaseKind::B1).total, 1);
    }

    #[test]
    fn lotus_products_separate_b1_from_td() {
        for (k, b1, td) in [(1usize, 2u64, 7u64), (2, 8, 63), (3, 26, 511), (4, 80, 4095)] {
            let sys = gen_lotus_product(7, k).unwrap();
            assert_eq!(bound(&sys, BaseCaseKind::B1).total, b1);
            assert_eq!(bound(&sys, BaseCaseKind::Td).total, td);
        }
    }

    #[test]
    fn fold_examples() {
        assert_eq!(fold_bounds(&[]), 0);
        assert_eq!(fold_bounds(&[5]), 5);
        assert_eq!(fold_bounds(&[1, 1, 1]), 7);
        assert_eq!(fold_bounds(&[u64::MAX, 1]), MAX_BOUND);
        assert_eq!(fold_bounds(&[1 << 40, 1 << 40]), MAX_BOUND);
    }

    #[test]
    fn rd_timeout_degrades_to_td() {
        let mut cfg = ComposeConfig::new(SolverConfig::from_template("/nonexistent/solver", None).unwrap());
        cfg.rd_bruteforce_cap = 1;
        let v = base_case(&example1(), &BaseCase::new(BaseCaseKind::Rd), &cfg);
        assert_eq!((v.value, v.property), (3, Property::Td));
        assert!(v.degraded.is_some());
    }

    #[test]
    fn parallel_matches_sequential() {
        let sys = gen_random(&RandomSpec::new(8, 10, 3)).unwrap();
        let mut cfg = ComposeConfig::bruteforce();
        let a = compositional_bound(&sys, &BaseCase::new(BaseCaseKind::B1), &cfg).unwrap();
        cfg.parallel = true;
        let b = compositional_bound(&sys, &BaseCase::new(BaseCaseKind::B1), &cfg).unwrap();
        assert_eq!(a.total, b.total);
        assert_eq!(
            a.clusters.iter().map(|c| &c.vars).collect::<Vec<_>>(),
            b.clusters.iter().map(|c| &c.vars).collect::<Vec<_>>()
        );
    }

    fn small_system() -> impl Strategy<Value = System> {
        (1usize..=5, 1usize..=8, any::<u64>())
            .prop_filter_map("drawable", |(v, a, seed)| gen_random(&RandomSpec::new(v, a, seed)).ok())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn fold_is_monotone(values in prop::collection::vec(0u64..1000, 1..6), i in 0usize..6, extra in 0u64..1000) {
            let i = i % values.len();
            let mut bigger = values.clone();
            bigger[i] += extra;
            prop_assert!(fold_bounds(&bigger) >= fold_bounds(&values));
        }

        #[test]
        fn clusters_partition_the_domain(sys in small_system()) {
            let d = decompose(&sys);
            let mut all: Vec<VarId> = d.clusters.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all.as_slice(), sys.domain());
            for (i, out) in d.edges.iter().enumerate() {
                prop_assert!(out.iter().all(|&j| j > i));
            }
        }

        #[test]
        fn projections_restrict_parent_actions(sys in small_system(), mask in any::<u8>()) {
            let vs: BTreeSet<VarId> = sys.domain().iter().copied().filter(|&v| mask >> (v % 8) & 1 == 1).collect();
            let p = project(&sys, &vs).unwrap();
            let ids: Vec<VarId> = vs.iter().copied().collect();
            for a in p.actions() {
                prop_assert!(!a.eff.is_empty());
                let back = |s: &crate::system::PartialState| s.remap(|v| ids[v]);
                let found = sys.actions().iter().any(|b| {
                    b.pre.restrict(|v| vs.contains(&v)) == back(&a.pre) && b.eff.restrict(|v| vs.contains(&v)) == back(&a.eff)
                });
                prop_assert!(found);
            }
        }

        #[test]
        fn bounds_are_ordered_and_admissible(sys in small_system()) {
            let d = diameter(&build_transition_graph(&sys, 20).unwrap());
            let t = |k| bound(&sys, k).total;
            let (rd, b1, td, exp) = (t(BaseCaseKind::Rd), t(BaseCaseKind::B1), t(BaseCaseKind::Td), t(BaseCaseKind::Exp));
            prop_assert!(d <= rd && rd <= b1 && b1 <= td && td <= exp);
            prop_assert_eq!(rd, b1);
        }
    }
}
