//! Factored transition systems: partial states, actions, execution and the
//! explicit state space.
//!
//! A [`System`] declares an ordered list of Boolean variables and a set of
//! actions over them. Its domain `D(δ)` is the set of variables mentioned by
//! at least one action; declared-but-unused variables are kept for I/O but
//! take no part in the state space.
//!
//! Full states over the domain are packed into a `u64`: bit `j` holds the
//! value of the `j`-th domain variable in ascending id order. When every
//! declared variable is used, bit `i` is simply variable `i`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Default limit on `|D(δ)|` for building an explicit state space.
pub const DEFAULT_EXPLICIT_CAP: usize = 20;

/// Hard ceiling for the explicit cap; vertex ids are `u32`.
pub const MAX_EXPLICIT_CAP: usize = 30;

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
}

/// A finite partial assignment of Boolean values to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialState(BTreeMap<VarId, bool>);

impl PartialState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a partial state from literals, rejecting a variable given both
    /// polarities. Repeating the same literal is harmless.
    pub fn from_literals<I>(lits: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VarId, bool)>,
    {
        let mut map = BTreeMap::new();
        for (v, val) in lits {
            if let Some(prev) = map.insert(v, val) {
                if prev != val {
                    return Err(Error::ContradictoryLiteral(format!("variable #{v}")));
                }
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, v: VarId) -> Option<bool> {
        self.0.get(&v).copied()
    }

    pub fn insert(&mut self, v: VarId, val: bool) -> Option<bool> {
        self.0.insert(v, val)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.0.contains_key(&v)
    }

    /// `self ⊎ other`: the union of both maps where `self` wins on shared
    /// variables.
    pub fn union_precedence(&self, other: &PartialState) -> PartialState {
        let mut out = other.0.clone();
        for (&v, &b) in &self.0 {
            out.insert(v, b);
        }
        PartialState(out)
    }

    /// True when every maplet of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &PartialState) -> bool {
        self.0.iter().all(|(v, b)| other.0.get(v) == Some(b))
    }

    /// Keeps only the maplets whose variable satisfies `keep`.
    pub fn restrict(&self, keep: impl Fn(VarId) -> bool) -> PartialState {
        PartialState(self.0.iter().filter(|(v, _)| keep(**v)).map(|(&v, &b)| (v, b)).collect())
    }

    pub(crate) fn remap(&self, map: impl Fn(VarId) -> VarId) -> PartialState {
        PartialState(self.0.iter().map(|(&v, &b)| (map(v), b)).collect())
    }
}

impl FromIterator<(VarId, bool)> for PartialState {
    /// Later literals overwrite earlier ones; use [`PartialState::from_literals`]
    /// when contradictions must be reported.
    fn from_iter<T: IntoIterator<Item = (VarId, bool)>>(iter: T) -> Self {
        PartialState(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub pre: PartialState,
    pub eff: PartialState,
}

impl Action {
    pub fn new(pre: PartialState, eff: PartialState) -> Self {
        Self { pre, eff }
    }

    /// `D(pre) ∪ D(eff)`.
    pub fn domain(&self) -> BTreeSet<VarId> {
        self.pre.domain().chain(self.eff.domain()).collect()
    }
}

/// A total assignment over `D(δ)`, packed little-endian by domain position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FullState(pub u64);

impl FullState {
    pub fn bit(self, pos: usize) -> bool {
        self.0 >> pos & 1 == 1
    }
}

/// An action compiled to bit masks over domain positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct CompiledAction {
    pub pre_mask: u64,
    pub pre_bits: u64,
    pub eff_mask: u64,
    pub eff_bits: u64,
}

impl CompiledAction {
    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        if x & self.pre_mask != self.pre_bits {
            x
        } else {
            (x & !self.eff_mask) | self.eff_bits
        }
    }
}

/// A factored transition system: declared variables plus a set of actions.
///
/// Actions are kept sorted and deduplicated, so two systems with the same
/// variables and the same action set compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct System {
    variables: Vec<Variable>,
    actions: Vec<Action>,
    domain: Vec<VarId>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, ',' | '!' | '#' | ':' | '>' | '"'))
}

impl System {
    /// Builds a system from variable names (ids follow list order) and
    /// actions over those ids.
    pub fn new<S: Into<String>>(names: Vec<S>, actions: Vec<Action>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut variables = Vec::with_capacity(names.len());
        for (id, name) in names.into_iter().enumerate() {
            let name: String = name.into();
            if !valid_name(&name) {
                return Err(Error::InvalidName(name));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateVariable(name));
            }
            variables.push(Variable { id, name });
        }
        let n = variables.len();
        for a in &actions {
            if let Some(v) = a.domain().into_iter().find(|&v| v >= n) {
                return Err(Error::DomainMismatch(format!(
                    "action mentions variable #{v} but only {n} are declared"
                )));
            }
        }
        let actions: Vec<Action> = actions.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let domain: BTreeSet<VarId> = actions.iter().flat_map(|a| a.domain()).collect();
        Ok(Self {
            variables,
            actions,
            domain: domain.into_iter().collect(),
        })
    }

    /// Convenience constructor naming variables `v0..v{n-1}`.
    pub fn with_anonymous_vars(n: usize, actions: Vec<Action>) -> Result<Self> {
        Self::new((0..n).map(|i| format!("v{i}")).collect(), actions)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// `D(δ)` in ascending id order.
    pub fn domain(&self) -> &[VarId] {
        &self.domain
    }

    pub fn var_name(&self, id: VarId) -> &str {
        &self.variables[id].name
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().find(|v| v.name == name).map(|v| v.id)
    }

    /// Position of `v` in the packed state layout.
    pub fn domain_position(&self, v: VarId) -> Option<usize> {
        self.domain.binary_search(&v).ok()
    }

    /// Packs a partial state that covers exactly `D(δ)`.
    pub fn pack(&self, state: &PartialState) -> Result<FullState> {
        if state.len() != self.domain.len() {
            return Err(Error::DomainMismatch(format!(
                "state assigns {} variables, domain has {}",
                state.len(),
                self.domain.len()
            )));
        }
        let mut bits = 0u64;
        for (v, b) in state.iter() {
            let pos = self
                .domain_position(v)
                .ok_or_else(|| Error::DomainMismatch(format!("variable {v} is not in D(δ)")))?;
            if b {
                bits |= 1 << pos;
            }
        }
        Ok(FullState(bits))
    }

    pub fn unpack(&self, x: FullState) -> PartialState {
        self.domain.iter().enumerate().map(|(pos, &v)| (v, x.bit(pos))).collect()
    }

    pub(crate) fn compile(&self, a: &Action) -> Result<CompiledAction> {
        if self.domain.len() > 64 {
            return Err(Error::ExplicitStateTooLarge {
                vars: self.domain.len(),
                cap: 64,
            });
        }
        let mut c = CompiledAction {
            pre_mask: 0,
            pre_bits: 0,
            eff_mask: 0,
            eff_bits: 0,
        };
        for (v, b) in a.pre.iter() {
            let pos = self
                .domain_position(v)
                .ok_or_else(|| Error::DomainMismatch(format!("variable {v} is not in D(δ)")))?;
            c.pre_mask |= 1 << pos;
            if b {
                c.pre_bits |= 1 << pos;
            }
        }
        for (v, b) in a.eff.iter() {
            let pos = self
                .domain_position(v)
                .ok_or_else(|| Error::DomainMismatch(format!("variable {v} is not in D(δ)")))?;
            c.eff_mask |= 1 << pos;
            if b {
                c.eff_bits |= 1 << pos;
            }
        }
        Ok(c)
    }

    /// Executes `a` at `x`: a no-op unless `pre(a) ⊆ x`, otherwise
    /// `eff(a) ⊎ x`.
    pub fn execute(&self, x: FullState, a: &Action) -> Result<FullState> {
        Ok(FullState(self.compile(a)?.apply(x.0)))
    }

    /// Executes a list of actions, returning the final state and the full
    /// trace (`seq.len() + 1` states, starting with `x`).
    pub fn execute_sequence(&self, x: FullState, seq: &[Action]) -> Result<(FullState, Vec<FullState>)> {
        let mut trace = Vec::with_capacity(seq.len() + 1);
        trace.push(x);
        let mut cur = x;
        for a in seq {
            cur = self.execute(cur, a)?;
            trace.push(cur);
        }
        Ok((cur, trace))
    }

    /// Number of valid states, `2^|D(δ)|`, or `None` when it does not fit.
    pub fn state_count(&self) -> Option<u64> {
        1u64.checked_shl(self.domain.len() as u32)
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "system({} vars, |D|={}, {} actions)",
            self.variables.len(),
            self.domain.len(),
            self.actions.len()
        )
    }
}

/// Explicit state space `G(δ)` without self-loops, in compressed sparse row
/// form. Vertex `i` is the full state whose packed bits equal `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionGraph {
    num_bits: usize,
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl TransitionGraph {
    /// Builds a graph directly from adjacency lists. Self-loops and duplicate
    /// edges are dropped.
    pub fn from_adjacency(adj: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for (u, mut succ) in adj.into_iter().enumerate() {
            succ.sort_unstable();
            succ.dedup();
            targets.extend(succ.into_iter().filter(|&v| v as usize != u));
            offsets.push(targets.len() as u32);
        }
        Self {
            num_bits: 0,
            offsets,
            targets,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    /// Number of domain variables the vertices encode (0 for graphs built
    /// from raw adjacency).
    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn state(&self, v: usize) -> FullState {
        FullState(v as u64)
    }

    #[inline]
    pub fn successors(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u] as usize..self.offsets[u + 1] as usize]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.successors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_vertices()).flat_map(move |u| self.successors(u).iter().map(move |&v| (u, v as usize)))
    }
}

/// Builds `G(δ)`: one vertex per valid state, an edge `x → execute(x, π)`
/// whenever that differs from `x`.
pub fn build_transition_graph(sys: &System, cap: usize) -> Result<TransitionGraph> {
    let cap = cap.min(MAX_EXPLICIT_CAP);
    let nbits = sys.domain().len();
    if nbits > cap {
        return Err(Error::ExplicitStateTooLarge { vars: nbits, cap });
    }
    let compiled = sys
        .actions()
        .iter()
        .map(|a| sys.compile(a))
        .collect::<Result<Vec<_>>>()?;
    let n = 1usize << nbits;
    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::new();
    let mut buf: Vec<u32> = Vec::with_capacity(compiled.len());
    offsets.push(0u32);
    for x in 0..n as u64 {
        buf.clear();
        buf.extend(compiled.iter().map(|c| c.apply(x)).filter(|&y| y != x).map(|y| y as u32));
        buf.sort_unstable();
        buf.dedup();
        targets.extend_from_slice(&buf);
        offsets.push(targets.len() as u32);
    }
    Ok(TransitionGraph {
        num_bits: nbits,
        offsets,
        targets,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn lit(v: VarId, b: bool) -> (VarId, bool) {
        (v, b)
    }

    pub fn ps(lits: &[(VarId, bool)]) -> PartialState {
        PartialState::from_literals(lits.iter().copied()).unwrap()
    }

    /// The four unconditional assignments over two variables.
    pub fn example1() -> System {
        let acts = [(true, true), (false, true), (true, false), (false, false)]
            .iter()
            .map(|&(a, b)| Action::new(ps(&[]), ps(&[lit(0, a), lit(1, b)])))
            .collect();
        System::with_anonymous_vars(2, acts).unwrap()
    }

    /// Hub `{¬v1,¬v2}` with one action to each other state.
    pub fn example2() -> System {
        let hub = ps(&[lit(0, false), lit(1, false)]);
        let acts = [(true, true), (false, true), (true, false)]
            .iter()
            .map(|&(a, b)| Action::new(hub.clone(), ps(&[lit(0, a), lit(1, b)])))
            .collect();
        System::with_anonymous_vars(2, acts).unwrap()
    }

    #[test]
    fn union_precedence_prefers_left() {
        let a = ps(&[lit(0, true)]);
        let b = ps(&[lit(0, false), lit(1, true)]);
        assert_eq!(a.union_precedence(&b), ps(&[lit(0, true), lit(1, true)]));
        assert_eq!(PartialState::new().union_precedence(&b), b);
        assert_eq!(b.union_precedence(&PartialState::new()), b);
    }

    #[test]
    fn contradictory_literals_rejected() {
        assert!(matches!(
            PartialState::from_literals([lit(0, true), lit(0, false)]),
            Err(Error::ContradictoryLiteral(_))
        ));
        assert!(PartialState::from_literals([lit(0, true), lit(0, true)]).is_ok());
    }

    #[test]
    fn execute_examples() {
        let sys = example1();
        let pi1 = Action::new(ps(&[]), ps(&[lit(0, true), lit(1, true)]));
        assert_eq!(sys.execute(FullState(0b00), &pi1).unwrap(), FullState(0b11));

        let guarded = Action::new(
            ps(&[lit(0, false), lit(1, false)]),
            ps(&[lit(0, true), lit(1, true)]),
        );
        // x = {v1, ¬v2}: precondition fails, state unchanged.
        assert_eq!(sys.execute(FullState(0b01), &guarded).unwrap(), FullState(0b01));

        let noop = Action::new(ps(&[]), ps(&[]));
        for x in 0..4 {
            assert_eq!(sys.execute(FullState(x), &noop).unwrap(), FullState(x));
        }
    }

    #[test]
    fn execute_rejects_foreign_variable() {
        let sys = example1();
        let a = Action::new(ps(&[]), ps(&[lit(5, true)]));
        assert!(matches!(sys.execute(FullState(0), &a), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn execute_sequence_examples() {
        let sys = example1();
        let mk = |a: bool, b: bool| Action::new(ps(&[]), ps(&[lit(0, a), lit(1, b)]));
        let (pi1, pi2, pi3) = (mk(true, true), mk(false, true), mk(true, false));
        let (end, trace) = sys
            .execute_sequence(FullState(0), &[pi1.clone(), pi2, pi3])
            .unwrap();
        assert_eq!(trace, vec![FullState(0b00), FullState(0b11), FullState(0b10), FullState(0b01)]);
        assert_eq!(end, FullState(0b01));

        let (end, trace) = sys.execute_sequence(FullState(2), &[]).unwrap();
        assert_eq!((end, trace), (FullState(2), vec![FullState(2)]));

        let (end, trace) = sys.execute_sequence(FullState(0), &[pi1.clone(), pi1]).unwrap();
        assert_eq!(end, FullState(0b11));
        assert_eq!(trace, vec![FullState(0b00), FullState(0b11), FullState(0b11)]);
    }

    #[test]
    fn graph_examples() {
        let g = build_transition_graph(&example1(), DEFAULT_EXPLICIT_CAP).unwrap();
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.num_edges(), 12);
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(g.has_edge(u, v), u != v);
            }
        }

        let g = build_transition_graph(&example2(), DEFAULT_EXPLICIT_CAP).unwrap();
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (0, 3)]);

        let sys = System::with_anonymous_vars(3, vec![]).unwrap();
        let g = build_transition_graph(&sys, DEFAULT_EXPLICIT_CAP).unwrap();
        // D(δ) = ∅: a single valid state.
        assert_eq!((g.num_vertices(), g.num_edges()), (1, 0));
    }

    #[test]
    fn graph_cap_enforced() {
        let acts = (0..5).map(|v| Action::new(ps(&[]), ps(&[lit(v, true)]))).collect();
        let sys = System::with_anonymous_vars(5, acts).unwrap();
        assert!(matches!(
            build_transition_graph(&sys, 4),
            Err(Error::ExplicitStateTooLarge { vars: 5, cap: 4 })
        ));
        assert!(build_transition_graph(&sys, 5).is_ok());
    }

    #[test]
    fn actions_deduplicated_and_empty_effects_kept() {
        let a = Action::new(ps(&[]), ps(&[lit(0, true)]));
        let e = Action::new(ps(&[lit(1, true)]), ps(&[]));
        let sys = System::with_anonymous_vars(2, vec![a.clone(), a.clone(), e.clone()]).unwrap();
        assert_eq!(sys.actions().len(), 2);
        assert_eq!(sys.domain(), &[0, 1]);
        let g = build_transition_graph(&sys, DEFAULT_EXPLICIT_CAP).unwrap();
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn unused_variables_excluded_from_domain() {
        let a = Action::new(ps(&[]), ps(&[lit(2, true)]));
        let sys = System::with_anonymous_vars(3, vec![a]).unwrap();
        assert_eq!(sys.domain(), &[2]);
        assert_eq!(sys.domain_position(2), Some(0));
        let x = sys.pack(&ps(&[lit(2, true)])).unwrap();
        assert_eq!(x, FullState(1));
        assert_eq!(sys.unpack(x), ps(&[lit(2, true)]));
    }

    #[test]
    fn names_validated() {
        assert!(matches!(
            System::new(vec!["a", "a"], vec![]),
            Err(Error::DuplicateVariable(_))
        ));
        assert!(matches!(System::new(vec!["a b"], vec![]), Err(Error::InvalidName(_))));
        assert!(matches!(System::new(vec!["!a"], vec![]), Err(Error::InvalidName(_))));
    }
}
