//! Exact topological properties on explicit state spaces: `Exp`, the
//! diameter, the recurrence diameter and the traversal diameter.
//!
//! These are ground truth for the SMT route and only apply to systems small
//! enough to enumerate.

mod longest_path;

use std::collections::{HashSet, VecDeque};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::Result;
use crate::scc::strongly_connected_components;
use crate::system::{build_transition_graph, Action, FullState, System, TransitionGraph, DEFAULT_EXPLICIT_CAP};

pub use longest_path::{longest_simple_path, longest_simple_path_until, LongestPath, DEFAULT_RD_STATE_CAP};

/// Saturation value for bounds that do not fit in a `u64`.
pub const MAX_BOUND: u64 = u64::MAX;

/// `2^|D(δ)| − 1`, saturating at [`MAX_BOUND`].
pub fn exp_bound(sys: &System) -> u64 {
    match sys.state_count() {
        Some(n) => n - 1,
        None => MAX_BOUND,
    }
}

/// Longest shortest path over all ordered pairs where the target is
/// reachable. Unreachable pairs contribute nothing.
pub fn diameter(g: &TransitionGraph) -> u64 {
    let n = g.num_vertices();
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    let mut best = 0u32;
    for src in 0..n {
        dist.iter_mut().for_each(|d| *d = u32::MAX);
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            best = best.max(du);
            for &v in g.successors(u) {
                let v = v as usize;
                if dist[v] == u32::MAX {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    best as u64
}

/// Longest path in the condensation weighted by component size, minus one.
pub fn traversal_diameter(g: &TransitionGraph) -> u64 {
    let (best, _, _) = condensation_dp(g);
    best.iter().copied().max().unwrap_or(1) as u64 - 1
}

/// Per-component DP values, the condensation and its DAG.
fn condensation_dp(g: &TransitionGraph) -> (Vec<usize>, crate::scc::Condensation, Vec<Vec<usize>>) {
    let cond = strongly_connected_components(g.num_vertices(), |u| g.successors(u));
    let dag = cond.dag(|u| g.successors(u));
    // Successors always have smaller ids, so ascending order is reverse
    // topological.
    let mut best = vec![0usize; cond.len()];
    for c in 0..cond.len() {
        let tail = dag[c].iter().map(|&d| best[d]).max().unwrap_or(0);
        best[c] = cond.members[c].len() + tail;
    }
    (best, cond, dag)
}

/// A walk that visits exactly `td + 1` distinct states.
///
/// Follows the heaviest condensation path; inside each component it tours
/// every member via shortest in-component paths, then leaves through a
/// vertex with an edge into the next component.
pub fn traversal_witness(g: &TransitionGraph) -> Vec<usize> {
    let (best, cond, dag) = condensation_dp(g);
    let Some(mut c) = (0..cond.len()).max_by_key(|&c| (best[c], std::cmp::Reverse(c))) else {
        return Vec::new();
    };
    let mut walk = vec![cond.members[c][0]];
    loop {
        let next = dag[c]
            .iter()
            .copied()
            .filter(|&d| best[d] + cond.members[c].len() == best[c])
            .min();
        let in_comp = |v: usize| cond.comp[v] == c;
        let mut seen: HashSet<usize> = HashSet::from([*walk.last().unwrap()]);
        for &m in &cond.members[c] {
            if seen.contains(&m) {
                continue;
            }
            let from = *walk.last().unwrap();
            let hop = bfs_path(g, from, |v| v == m, in_comp).expect("component is strongly connected");
            seen.extend(hop.iter().copied());
            walk.extend_from_slice(&hop[1..]);
        }
        let Some(d) = next else { break };
        let from = *walk.last().unwrap();
        let hop = bfs_path(g, from, |v| g.successors(v).iter().any(|&w| cond.comp[w as usize] == d), in_comp)
            .expect("component has an edge into its successor");
        walk.extend_from_slice(&hop[1..]);
        let exit = *walk.last().unwrap();
        let entry = g
            .successors(exit)
            .iter()
            .map(|&w| w as usize)
            .find(|&w| cond.comp[w] == d)
            .unwrap();
        walk.push(entry);
        c = d;
    }
    walk
}

fn bfs_path(
    g: &TransitionGraph,
    src: usize,
    goal: impl Fn(usize) -> bool,
    allowed: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut parent = std::collections::HashMap::from([(src, src)]);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        if goal(u) {
            let mut path = vec![u];
            let mut cur = u;
            while cur != src {
                cur = parent[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &v in g.successors(u) {
            let v = v as usize;
            if allowed(v) && !parent.contains_key(&v) {
                parent.insert(v, u);
                queue.push_back(v);
            }
        }
    }
    None
}

/// Recurrence diameter by exhaustive search, with a witness path.
pub fn recurrence_diameter_bruteforce(g: &TransitionGraph, state_cap: usize) -> Result<LongestPath> {
    longest_simple_path(g, state_cap)
}

/// True iff executing `seq` from `x` never revisits a state.
pub fn distinct_trace(sys: &System, x: FullState, seq: &[Action]) -> Result<bool> {
    let (_, trace) = sys.execute_sequence(x, seq)?;
    let mut seen = HashSet::with_capacity(trace.len());
    Ok(trace.into_iter().all(|s| seen.insert(s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    pub explicit_vars: usize,
    pub rd_states: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self {
            explicit_vars: DEFAULT_EXPLICIT_CAP,
            rd_states: DEFAULT_RD_STATE_CAP,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TopoTimings {
    pub graph: Duration,
    pub d: Duration,
    pub rd: Duration,
    pub td: Duration,
}

/// Exact topological properties of one system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopoReport {
    pub exp: u64,
    pub d: u64,
    pub rd: u64,
    pub td: u64,
    pub rd_witness: Vec<usize>,
    pub td_witness: Vec<usize>,
    #[serde(skip)]
    pub timings: TopoTimings,
}

pub fn topo_report(sys: &System, caps: OracleCaps) -> Result<TopoReport> {
    let mut timings = TopoTimings::default();
    let t = Instant::now();
    let g = build_transition_graph(sys, caps.explicit_vars)?;
    timings.graph = t.elapsed();

    let t = Instant::now();
    let d = diameter(&g);
    timings.d = t.elapsed();

    let t = Instant::now();
    let td = traversal_diameter(&g);
    let td_witness = traversal_witness(&g);
    timings.td = t.elapsed();

    let t = Instant::now();
    let rd = longest_simple_path(&g, caps.rd_states)?;
    timings.rd = t.elapsed();

    Ok(TopoReport {
        exp: exp_bound(sys),
        d,
        rd: rd.length,
        td,
        rd_witness: rd.path,
        td_witness,
        timings,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConjectureVerdict {
    /// `td ≤ 2` and `td = rd`.
    Holds { td: u64 },
    /// `td > 2`; nothing to check.
    Vacuous { td: u64 },
    /// `td ≤ 2` but `rd ≠ td`; carries the longest simple path found.
    Counterexample { td: u64, rd: u64, path: Vec<FullState> },
}

/// Checks whether a traversal diameter of 0, 1 or 2 coincides with the
/// recurrence diameter.
pub fn check_conjecture(sys: &System, caps: OracleCaps) -> Result<ConjectureVerdict> {
    let g = build_transition_graph(sys, caps.explicit_vars)?;
    let td = traversal_diameter(&g);
    if td > 2 {
        return Ok(ConjectureVerdict::Vacuous { td });
    }
    let rd = longest_simple_path(&g, caps.rd_states)?;
    if rd.length == td {
        Ok(ConjectureVerdict::Holds { td })
    } else {
        Ok(ConjectureVerdict::Counterexample {
            td,
            rd: rd.length,
            path: rd.path.iter().map(|&v| g.state(v)).collect(),
        })
    }
}

#[cfg(test)]
mod tests;
