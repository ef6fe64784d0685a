//! Exact longest simple path by memoised depth-first branch and bound.
//!
//! Once a path ends at `v`, only the unvisited vertices still reachable from
//! `v` matter for its continuation. The search therefore works on pairs
//! `(v, R)` where `R` is that reachable residual set, and memoises the
//! longest extension of each pair (exact, or an upper bound when the pair
//! could not beat the incumbent).
//!
//! Successors are tried by ascending residual size, then vertex id. A pair is
//! cut off when `|R|`, a degree count over `R`, or the longest condensation
//! path through `R` shows it cannot beat the incumbent. The outer loop over
//! start vertices stops once the traversal diameter is reached.

use std::collections::HashMap;
use std::thread;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::system::TransitionGraph;

use super::traversal_diameter;

/// Default limit on the number of states for the brute-force search.
pub const DEFAULT_RD_STATE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LongestPath {
    /// Number of edges on the path.
    pub length: u64,
    /// The witness, `length + 1` pairwise distinct vertices.
    pub path: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Bits(Box<[u64]>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)].into_boxed_slice())
    }

    #[inline]
    fn has(&self, i: usize) -> bool {
        self.0[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    fn clear(&mut self, i: usize) {
        self.0[i >> 6] &= !(1 << (i & 63));
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Tarjan over `{root} ∪ R`, returning the maximum number of vertices on a
/// condensation path that starts at the root. Buffers are reused; `stamp`
/// avoids clearing them between calls.
struct CondensationBound {
    stamp: Vec<u32>,
    generation: u32,
    index: Vec<u32>,
    low: Vec<u32>,
    on_stack: Vec<bool>,
    comp: Vec<u32>,
    weight: Vec<u32>,
    stack: Vec<u32>,
    call: Vec<(u32, u32)>,
    members: Vec<u32>,
}

impl CondensationBound {
    fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            generation: 0,
            index: vec![0; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            comp: vec![0; n],
            weight: Vec::new(),
            stack: Vec::new(),
            call: Vec::new(),
            members: Vec::new(),
        }
    }

    fn enter(&mut self, v: usize, counter: &mut u32) {
        self.stamp[v] = self.generation;
        self.index[v] = *counter;
        self.low[v] = *counter;
        *counter += 1;
        self.on_stack[v] = true;
        self.stack.push(v as u32);
        self.call.push((v as u32, 0));
    }

    fn bound(&mut self, g: &TransitionGraph, allowed: &Bits, root: usize) -> u32 {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        let gen = self.generation;
        self.weight.clear();
        self.stack.clear();
        self.call.clear();
        let mut counter = 0u32;
        let inside = |w: usize| w == root || allowed.has(w);
        self.enter(root, &mut counter);

        while let Some(&(v, next)) = self.call.last() {
            let v = v as usize;
            let out = g.successors(v);
            if (next as usize) < out.len() {
                self.call.last_mut().unwrap().1 += 1;
                let w = out[next as usize] as usize;
                if !inside(w) {
                    continue;
                }
                if self.stamp[w] != gen {
                    self.enter(w, &mut counter);
                } else if self.on_stack[w] {
                    self.low[v] = self.low[v].min(self.index[w]);
                }
                continue;
            }
            self.call.pop();
            if let Some(&(parent, _)) = self.call.last() {
                let p = parent as usize;
                self.low[p] = self.low[p].min(self.low[v]);
            }
            if self.low[v] == self.index[v] {
                let id = self.weight.len() as u32;
                self.members.clear();
                loop {
                    let w = self.stack.pop().expect("stack underflow") as usize;
                    self.on_stack[w] = false;
                    self.comp[w] = id;
                    self.members.push(w as u32);
                    if w == v {
                        break;
                    }
                }
                // Successor components completed earlier, so their weights
                // are final.
                let mut best_succ = 0u32;
                for &m in &self.members {
                    for &w in g.successors(m as usize) {
                        let w = w as usize;
                        if inside(w) && self.stamp[w] == gen && self.comp[w] != id {
                            best_succ = best_succ.max(self.weight[self.comp[w] as usize]);
                        }
                    }
                }
                self.weight.push(self.members.len() as u32 + best_succ);
            }
        }
        self.weight[self.comp[root] as usize]
    }
}

struct Search<'g> {
    g: &'g TransitionGraph,
    n: usize,
    preds: Vec<Vec<u32>>,
    memo: HashMap<(u32, Bits), (u32, bool)>,
    cond: CondensationBound,
    queue: Vec<u32>,
    single_in: Vec<u32>,
    single_out: Vec<u32>,
    deadline: Option<Instant>,
    ticks: u32,
    expired: bool,
}

impl<'g> Search<'g> {
    /// Vertices of `allowed` reachable from `src` through `allowed`
    /// (excluding `src` itself).
    fn reach(&mut self, src: usize, allowed: &Bits) -> Bits {
        let mut out = Bits::empty(self.n);
        self.queue.clear();
        self.queue.push(src as u32);
        while let Some(u) = self.queue.pop() {
            for &w in self.g.successors(u as usize) {
                let wi = w as usize;
                if wi != src && allowed.has(wi) && !out.has(wi) {
                    out.set(wi);
                    self.queue.push(w);
                }
            }
        }
        out
    }

    /// Children of `(v, r)`: each successor `w ∈ r` with its residual set.
    fn child(&mut self, w: usize, r: &Bits) -> Bits {
        let mut without = r.clone();
        without.clear(w);
        self.reach(w, &without)
    }

    /// Upper bound on the extension of `(v, r)` from local structure. Of the
    /// vertices whose only in-neighbour is `u`, at most one lies on a path;
    /// of those whose only out-neighbour is `u`, at most one is not the last
    /// vertex, and at most one vertex of the path is last.
    fn degree_bound(&mut self, v: usize, r: &Bits) -> u32 {
        let g = self.g;
        self.single_in.clear();
        self.single_out.clear();
        let (mut free_in, mut free_out) = (0u32, 0u32);
        let mut dead_end = false;
        for x in (0..self.n).filter(|&x| r.has(x)) {
            let mut succ = None;
            let mut many = false;
            for &w in g.successors(x) {
                if r.has(w as usize) {
                    if succ.is_some() {
                        many = true;
                        break;
                    }
                    succ = Some(w);
                }
            }
            match succ {
                None => dead_end = true,
                Some(w) if !many => self.single_out.push(w),
                _ => free_out += 1,
            }
            if succ.is_none() {
                continue;
            }
            let mut pred = None;
            let mut many = false;
            for &u in &self.preds[x] {
                if u as usize == v || r.has(u as usize) {
                    if pred.is_some() {
                        many = true;
                        break;
                    }
                    pred = Some(u);
                }
            }
            match pred {
                Some(u) if !many => self.single_in.push(u),
                _ => free_in += 1,
            }
        }
        self.single_in.sort_unstable();
        self.single_in.dedup();
        self.single_out.sort_unstable();
        self.single_out.dedup();
        let by_in = free_in + self.single_in.len() as u32 + dead_end as u32;
        let by_out = free_out + self.single_out.len() as u32 + 1;
        by_in.min(by_out)
    }

    /// Longest extension (in edges) of a path ending at `v` whose reachable
    /// unvisited vertices are `r`. The value is exact when it exceeds
    /// `need`; otherwise it is an upper bound no larger than `need`.
    fn extend(&mut self, v: usize, r: Bits, need: u32) -> u32 {
        let size = r.count() as u32;
        if size == 0 || self.out_of_time() {
            return 0;
        }
        let key = (v as u32, r);
        if let Some(&(val, exact)) = self.memo.get(&key) {
            if exact || val <= need {
                return val;
            }
        }
        let r = key.1;
        let mut ceiling = self.degree_bound(v, &r);
        if ceiling > need {
            ceiling = ceiling.min(self.cond.bound(self.g, &r, v) - 1);
        }
        if ceiling <= need {
            self.memo.insert((v as u32, r), (ceiling, false));
            return ceiling;
        }
        let mut kids: Vec<(u32, usize, Bits)> = Vec::new();
        for &w in self.g.successors(v) {
            let w = w as usize;
            if r.has(w) {
                let rest = self.child(w, &r);
                kids.push((rest.count() as u32, w, rest));
            }
        }
        kids.sort_by_key(|k| (k.0, k.1));
        let mut best = 0u32;
        // Upper bound over the children cut off by size.
        let mut skipped = 0u32;
        for (size, w, rest) in kids {
            let floor = need.max(best);
            if 1 + size <= floor {
                skipped = skipped.max(1 + size);
                continue;
            }
            best = best.max(1 + self.extend(w, rest, floor.saturating_sub(1)));
            if best >= ceiling {
                break;
            }
        }
        let exact = best > need || best >= ceiling;
        let val = if exact { best } else { best.max(skipped).min(ceiling) };
        self.memo.insert((v as u32, r), (val, exact));
        val
    }

    fn out_of_time(&mut self) -> bool {
        if !self.expired {
            self.ticks = self.ticks.wrapping_add(1);
            if self.ticks % 1024 == 0 {
                self.expired = self.deadline.is_some_and(|d| Instant::now() >= d);
            }
        }
        self.expired
    }

    /// Rebuilds a path of exactly `target` extra edges from `(v, r)`.
    fn witness(&mut self, v: usize, r: Bits, target: u32, path: &mut Vec<usize>) {
        path.push(v);
        if target == 0 {
            return;
        }
        let g = self.g;
        for &w in g.successors(v) {
            let w = w as usize;
            if !r.has(w) {
                continue;
            }
            let rest = self.child(w, &r);
            if 1 + rest.count() as u32 >= target && 1 + self.extend(w, rest.clone(), target.saturating_sub(2)) == target {
                self.witness(w, rest, target - 1, path);
                return;
            }
        }
        unreachable!("memoised extension has no realising successor");
    }

    fn run(&mut self, ceiling: u64) -> Option<LongestPath> {
        let mut all = Bits::empty(self.n);
        for v in 0..self.n {
            all.set(v);
        }
        let mut best: Option<(u32, usize, Bits)> = None;
        for start in 0..self.n {
            let current = best.as_ref().map_or(0, |b| b.0);
            if best.is_some() && current as u64 >= ceiling {
                break;
            }
            let r = self.child(start, &all);
            if best.is_some() && r.count() as u32 <= current {
                continue;
            }
            let val = self.extend(start, r.clone(), current);
            if best.is_none() || val > current {
                best = Some((val, start, r));
            }
        }
        if self.expired {
            return None;
        }
        self.deadline = None;
        let (length, start, r) = best.expect("graph has at least one vertex");
        let mut path = Vec::with_capacity(length as usize + 1);
        self.witness(start, r, length, &mut path);
        Some(LongestPath {
            length: length as u64,
            path,
        })
    }
}

/// Computes the recurrence diameter of an explicit state space.
pub fn longest_simple_path(g: &TransitionGraph, state_cap: usize) -> Result<LongestPath> {
    Ok(longest_simple_path_until(g, state_cap, None)?.expect("no deadline was set"))
}

/// As [`longest_simple_path`], giving up with `None` at `deadline`.
pub fn longest_simple_path_until(
    g: &TransitionGraph,
    state_cap: usize,
    deadline: Option<Instant>,
) -> Result<Option<LongestPath>> {
    let n = g.num_vertices();
    if n > state_cap {
        return Err(Error::RdBruteforceTooLarge { states: n, cap: state_cap });
    }
    let ceiling = traversal_diameter(g);
    if ceiling == 0 {
        return Ok(Some(LongestPath {
            length: 0,
            path: vec![0],
        }));
    }
    // Recursion depth follows the path length; give it room.
    let stack = (64 << 20).max(n * 4096);
    let found = thread::scope(|s| {
        thread::Builder::new()
            .stack_size(stack)
            .spawn_scoped(s, || {
                let mut preds = vec![Vec::new(); n];
                for (u, v) in g.edges() {
                    preds[v].push(u as u32);
                }
                Search {
                    g,
                    n,
                    preds,
                    memo: HashMap::new(),
                    cond: CondensationBound::new(n),
                    queue: Vec::new(),
                    single_in: Vec::new(),
                    single_out: Vec::new(),
                    deadline,
                    ticks: 0,
                    expired: false,
                }
                .run(ceiling)
            })
            .expect("spawning search thread")
            .join()
            .expect("search thread panicked")
    });
    Ok(found)
}
