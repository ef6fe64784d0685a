use proptest::prelude::*;

use super::*;
use crate::gen::{gen_clique, gen_lotus, gen_random, gen_star, RandomSpec};
use crate::system::tests::{example1, example2, lit, ps};
use crate::system::{build_transition_graph, Action, DEFAULT_EXPLICIT_CAP};

fn graph(sys: &System) -> TransitionGraph {
    build_transition_graph(sys, DEFAULT_EXPLICIT_CAP).unwrap()
}

/// Unpruned enumeration of every simple path.
fn naive_rd(g: &TransitionGraph) -> u64 {
    fn go(g: &TransitionGraph, v: usize, seen: &mut Vec<bool>, len: u64, best: &mut u64) {
        *best = (*best).max(len);
        for &w in g.successors(v) {
            let w = w as usize;
            if !seen[w] {
                seen[w] = true;
                go(g, w, seen, len + 1, best);
                seen[w] = false;
            }
        }
    }
    let n = g.num_vertices();
    let mut best = 0;
    let mut seen = vec![false; n];
    for s in 0..n {
        seen[s] = true;
        go(g, s, &mut seen, 0, &mut best);
        seen[s] = false;
    }
    best
}

/// Plain DFS cut only by `length + reachable unvisited <= best`.
fn reach_pruned_rd(g: &TransitionGraph) -> u64 {
    fn reachable(g: &TransitionGraph, v: usize, seen: &[bool]) -> u64 {
        let mut mark = seen.to_vec();
        let mut stack = vec![v];
        let mut count = 0;
        while let Some(u) = stack.pop() {
            for &w in g.successors(u) {
                let w = w as usize;
                if !mark[w] {
                    mark[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count
    }
    fn go(g: &TransitionGraph, v: usize, seen: &mut Vec<bool>, len: u64, best: &mut u64) {
        *best = (*best).max(len);
        if len + reachable(g, v, seen) <= *best {
            return;
        }
        for &w in g.successors(v) {
            let w = w as usize;
            if !seen[w] {
                seen[w] = true;
                go(g, w, seen, len + 1, best);
                seen[w] = false;
            }
        }
    }
    let n = g.num_vertices();
    let mut best = 0;
    let mut seen = vec![false; n];
    for s in 0..n {
        seen[s] = true;
        go(g, s, &mut seen, 0, &mut best);
        seen[s] = false;
    }
    best
}

/// Exhaustive search over (current vertex, set of visited vertices): the
/// largest set any walk can cover, minus one.
fn naive_td(g: &TransitionGraph) -> u64 {
    let n = g.num_vertices();
    assert!(n <= 16);
    let mut seen = std::collections::HashSet::new();
    let mut stack: Vec<(usize, u32)> = (0..n).map(|v| (v, 1u32 << v)).collect();
    let mut best = 1;
    while let Some((v, mask)) = stack.pop() {
        if !seen.insert((v, mask)) {
            continue;
        }
        best = best.max(mask.count_ones());
        for &w in g.successors(v) {
            stack.push((w as usize, mask | 1 << w));
        }
    }
    best as u64 - 1
}

/// Floyd–Warshall all-pairs distances.
fn naive_d(g: &TransitionGraph) -> u64 {
    let n = g.num_vertices();
    let inf = u64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
    }
    for (u, v) in g.edges() {
        d[u][v] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d.iter().flatten().copied().filter(|&x| x < inf).max().unwrap_or(0)
}

fn is_simple_path(g: &TransitionGraph, p: &[usize]) -> bool {
    let distinct: std::collections::HashSet<_> = p.iter().collect();
    distinct.len() == p.len() && p.windows(2).all(|w| g.has_edge(w[0], w[1]))
}

fn empty_system() -> System {
    System::with_anonymous_vars(2, vec![]).unwrap()
}

#[test]
fn exp_examples() {
    assert_eq!(exp_bound(&example2()), 3);
    assert_eq!(exp_bound(&empty_system()), 0);
    assert_eq!(exp_bound(&gen_lotus(3).unwrap()), 3);
    let wide: Vec<Action> = (0..70).map(|v| Action::new(ps(&[]), ps(&[lit(v, true)]))).collect();
    let wide = System::with_anonymous_vars(70, wide).unwrap();
    assert_eq!(exp_bound(&wide), MAX_BOUND);
}

#[test]
fn worked_example_values() {
    let g1 = graph(&example1());
    assert_eq!(diameter(&g1), 1);
    assert_eq!(longest_simple_path(&g1, DEFAULT_RD_STATE_CAP).unwrap().length, 3);
    assert_eq!(traversal_diameter(&g1), 3);

    let g2 = graph(&example2());
    assert_eq!(traversal_diameter(&g2), 1);
    assert_eq!(longest_simple_path(&g2, DEFAULT_RD_STATE_CAP).unwrap().length, 1);

    let g3 = graph(&gen_lotus(3).unwrap());
    assert_eq!(diameter(&g3), 2);
    assert_eq!(longest_simple_path(&g3, DEFAULT_RD_STATE_CAP).unwrap().length, 2);
    assert_eq!(traversal_diameter(&g3), 3);
}

#[test]
fn no_actions_gives_zeros() {
    let g = graph(&empty_system());
    assert_eq!(diameter(&g), 0);
    assert_eq!(longest_simple_path(&g, DEFAULT_RD_STATE_CAP).unwrap().length, 0);
    assert_eq!(traversal_diameter(&g), 0);
    let r = topo_report(&empty_system(), OracleCaps::default()).unwrap();
    assert_eq!((r.exp, r.d, r.rd, r.td), (0, 0, 0, 0));
}

#[test]
fn generator_family_values() {
    // Oracle values computed by the unpruned enumerators above.
    for (m, rd) in [(1u64, 1u64), (2, 3), (3, 7)] {
        let g = graph(&gen_clique(m as usize, DEFAULT_EXPLICIT_CAP).unwrap());
        assert_eq!(naive_rd(&g), rd);
        assert_eq!(longest_simple_path(&g, DEFAULT_RD_STATE_CAP).unwrap().length, rd);
        assert_eq!(diameter(&g), 1);
    }
    let star7 = graph(&gen_star(7).unwrap());
    assert_eq!((naive_td(&star7), naive_rd(&star7), naive_d(&star7)), (1, 1, 1));
    assert_eq!(
        (traversal_diameter(&star7), longest_simple_path(&star7, 4096).unwrap().length, diameter(&star7)),
        (1, 1, 1)
    );
    let star1 = graph(&gen_star(1).unwrap());
    assert_eq!(longest_simple_path(&star1, 4096).unwrap().length, 1);
    assert_eq!(traversal_diameter(&star1), 1);
    let lotus1 = graph(&gen_lotus(1).unwrap());
    assert_eq!(naive_rd(&lotus1), 1);
    assert_eq!(longest_simple_path(&lotus1, 4096).unwrap().length, 1);
}

#[test]
fn lotus_separation() {
    for n in 2..=63u64 {
        let sys = gen_lotus(n).unwrap();
        let g = graph(&sys);
        assert_eq!(longest_simple_path(&g, DEFAULT_RD_STATE_CAP).unwrap().length, 2, "rd lotus_{n}");
        assert_eq!(traversal_diameter(&g), n, "td lotus_{n}");
    }
    for n in [3u64, 7, 15, 31] {
        let sys = gen_lotus(n).unwrap();
        let td = traversal_diameter(&graph(&sys));
        assert!(td >= 1 << (sys.domain().len() - 2));
    }
}

#[test]
fn rd_cap_enforced() {
    let g = graph(&gen_clique(3, DEFAULT_EXPLICIT_CAP).unwrap());
    assert!(matches!(
        longest_simple_path(&g, 4),
        Err(crate::Error::RdBruteforceTooLarge { states: 8, cap: 4 })
    ));
}

#[test]
fn distinct_trace_examples() {
    let sys = example1();
    let mk = |a: bool, b: bool| Action::new(ps(&[]), ps(&[lit(0, a), lit(1, b)]));
    assert!(distinct_trace(&sys, FullState(0), &[mk(true, true), mk(false, true), mk(true, false)]).unwrap());
    assert!(distinct_trace(&sys, FullState(3), &[]).unwrap());
    let blocked = Action::new(ps(&[lit(0, true)]), ps(&[lit(1, true)]));
    assert!(!distinct_trace(&sys, FullState(0), &[blocked]).unwrap());
}

#[test]
fn conjecture_examples() {
    let caps = OracleCaps::default();
    assert_eq!(check_conjecture(&example2(), caps).unwrap(), ConjectureVerdict::Holds { td: 1 });
    assert_eq!(check_conjecture(&gen_lotus(3).unwrap(), caps).unwrap(), ConjectureVerdict::Vacuous { td: 3 });
    assert_eq!(check_conjecture(&empty_system(), caps).unwrap(), ConjectureVerdict::Holds { td: 0 });
}

#[test]
fn witnesses_replay() {
    for seed in 0..40 {
        let sys = gen_random(&RandomSpec::new(4, 6, seed)).unwrap();
        let g = graph(&sys);
        let rd = longest_simple_path(&g, DEFAULT_RD_STATE_CAP).unwrap();
        assert_eq!(rd.path.len() as u64, rd.length + 1);
        assert!(is_simple_path(&g, &rd.path), "seed {seed}");

        let walk = traversal_witness(&g);
        assert!(walk.windows(2).all(|w| g.has_edge(w[0], w[1])), "seed {seed}");
        let distinct: std::collections::HashSet<_> = walk.iter().collect();
        assert_eq!(distinct.len() as u64, traversal_diameter(&g) + 1, "seed {seed}");
    }
}

#[test]
fn deterministic_reports() {
    let sys = gen_random(&RandomSpec::new(5, 8, 7)).unwrap();
    let a = topo_report(&sys, OracleCaps::default()).unwrap();
    let b = topo_report(&sys, OracleCaps::default()).unwrap();
    assert_eq!((a.d, a.rd, a.td, &a.rd_witness, &a.td_witness), (b.d, b.rd, b.td, &b.rd_witness, &b.td_witness));
}

#[test]
fn memo_bounds_cover_skipped_successors() {
    let g = graph(&gen_random(&RandomSpec::new(5, 10, 94)).unwrap());
    assert_eq!(longest_simple_path(&g, DEFAULT_RD_STATE_CAP).unwrap().length, 23);
    assert_eq!(reach_pruned_rd(&g), 23);
}

fn five_var_system() -> impl Strategy<Value = System> {
    (1usize..=10, 0usize..=2, any::<u64>())
        .prop_filter_map("drawable", |(a, p, seed)| {
            gen_random(&RandomSpec {
                vars: 5,
                actions: a,
                max_pre: p,
                max_eff: 2,
                allow_empty_effects: false,
                seed,
            })
            .ok()
        })
}

fn small_system() -> impl Strategy<Value = System> {
    (1usize..=4, 1usize..=8, 0usize..=3, 1usize..=3, any::<u64>()).prop_filter_map("drawable", |(v, a, p, e, seed)| {
        gen_random(&RandomSpec {
            vars: v,
            actions: a,
            max_pre: p,
            max_eff: e,
            allow_empty_effects: false,
            seed,
        })
        .ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn oracles_match_naive_enumeration(sys in small_system()) {
        let g = graph(&sys);
        prop_assert_eq!(longest_simple_path(&g, DEFAULT_RD_STATE_CAP).unwrap().length, naive_rd(&g));
        prop_assert_eq!(traversal_diameter(&g), naive_td(&g));
        prop_assert_eq!(diameter(&g), naive_d(&g));
    }

    #[test]
    fn five_variable_rd_matches_pruned_dfs(sys in five_var_system()) {
        let g = graph(&sys);
        let found = longest_simple_path(&g, DEFAULT_RD_STATE_CAP).unwrap();
        prop_assert_eq!(found.length, reach_pruned_rd(&g));
        prop_assert!(is_simple_path(&g, &found.path));
    }

    #[test]
    fn inequality_chain(sys in small_system()) {
        let r = topo_report(&sys, OracleCaps::default()).unwrap();
        prop_assert!(r.d <= r.rd && r.rd <= r.td && r.td <= r.exp);
    }

    #[test]
    fn frame_property(sys in small_system(), x in any::<u64>()) {
        let nbits = sys.domain().len();
        let x = FullState(x & ((1u64 << nbits) - 1));
        for a in sys.actions() {
            let y = sys.execute(x, a).unwrap();
            for (pos, &v) in sys.domain().iter().enumerate() {
                if !a.eff.contains_var(v) {
                    prop_assert_eq!(x.bit(pos), y.bit(pos));
                }
            }
        }
    }

    #[test]
    fn graph_is_sound_and_complete(sys in small_system()) {
        let g = graph(&sys);
        for u in 0..g.num_vertices() {
            let mut expect: Vec<usize> = sys
                .actions()
                .iter()
                .map(|a| sys.execute(g.state(u), a).unwrap().0 as usize)
                .filter(|&v| v != u)
                .collect();
            expect.sort_unstable();
            expect.dedup();
            let got: Vec<usize> = g.successors(u).iter().map(|&v| v as usize).collect();
            prop_assert_eq!(got, expect);
        }
    }

    #[test]
    fn pack_unpack_bijection(sys in small_system()) {
        for i in 0..(1u64 << sys.domain().len()) {
            let x = FullState(i);
            prop_assert_eq!(sys.pack(&sys.unpack(x)).unwrap(), x);
        }
    }
}
