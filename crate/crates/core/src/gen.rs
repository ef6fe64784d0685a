//! Deterministic system generators: cliques, stars, lotuses, seeded random
//! systems and disjoint products.
//!
//! Random systems draw from SplitMix64. A bounded draw `below(n)` takes the
//! high 64 bits of the 128-bit product `next_u64() * n`, so a seed produces
//! the same system on every platform.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{Action, PartialState, System, VarId};

/// The SplitMix64 generator (Steele, Lea and Flood).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish draw from `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }
}

/// Number of variables needed to binary-encode `0..count`.
fn bits_for(count: u64) -> usize {
    (64 - count.saturating_sub(1).leading_zeros()) as usize
}

/// The full state over `nbits` variables whose bits encode `i`; variable `j`
/// carries bit `j`.
pub fn encode_state(i: u64, nbits: usize) -> PartialState {
    (0..nbits).map(|j| (j, i >> j & 1 == 1)).collect()
}

/// Every unconditional full assignment over `m` variables; the state space
/// is a complete digraph.
pub fn gen_clique(m: usize, cap: usize) -> Result<System> {
    if m == 0 {
        return Err(Error::Generator("clique needs at least one variable".into()));
    }
    if m > cap {
        return Err(Error::ExplicitStateTooLarge { vars: m, cap });
    }
    let actions = (0..1u64 << m)
        .map(|x| Action::new(PartialState::new(), encode_state(x, m)))
        .collect();
    System::with_anonymous_vars(m, actions)
}

/// A hub state with one action to each of `n` leaves.
pub fn gen_star(n: u64) -> Result<System> {
    if n == 0 {
        return Err(Error::Generator("star needs at least one leaf".into()));
    }
    let nbits = bits_for(n + 1);
    let hub = encode_state(0, nbits);
    let actions = (1..=n)
        .map(|i| Action::new(hub.clone(), encode_state(i, nbits)))
        .collect();
    System::with_anonymous_vars(nbits, actions)
}

/// The lotus: a hub with `n` petals, each connected both ways.
pub fn gen_lotus(n: u64) -> Result<System> {
    if n == 0 {
        return Err(Error::Generator("lotus needs at least one petal".into()));
    }
    let nbits = bits_for(n + 1);
    let hub = encode_state(0, nbits);
    let mut actions = Vec::with_capacity(2 * n as usize);
    for i in 1..=n {
        let petal = encode_state(i, nbits);
        actions.push(Action::new(hub.clone(), petal.clone()));
        actions.push(Action::new(petal, hub.clone()));
    }
    System::with_anonymous_vars(nbits, actions)
}

/// Disjoint union of systems over fresh variables. Variable `name` of part
/// `p` becomes `p{p}_{name}`.
pub fn gen_product(parts: &[System]) -> Result<System> {
    let mut names = Vec::new();
    let mut actions = Vec::new();
    for (p, sys) in parts.iter().enumerate() {
        let offset = names.len();
        names.extend(sys.variables().iter().map(|v| format!("p{p}_{}", v.name)));
        actions.extend(sys.actions().iter().map(|a| {
            Action::new(a.pre.remap(|v| v + offset), a.eff.remap(|v| v + offset))
        }));
    }
    System::new(names, actions)
}

/// `copies` independent lotus_n systems side by side.
pub fn gen_lotus_product(n: u64, copies: usize) -> Result<System> {
    let lotus = gen_lotus(n)?;
    gen_product(&vec![lotus; copies])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub vars: usize,
    pub actions: usize,
    pub max_pre: usize,
    pub max_eff: usize,
    pub allow_empty_effects: bool,
    pub seed: u64,
}

impl RandomSpec {
    pub fn new(vars: usize, actions: usize, seed: u64) -> Self {
        Self {
            vars,
            actions,
            max_pre: 2,
            max_eff: 2,
            allow_empty_effects: false,
            seed,
        }
    }
}

const REDRAW_BUDGET: usize = 200;

fn draw_literals(rng: &mut SplitMix64, vars: usize, count: usize) -> PartialState {
    let mut pool: Vec<VarId> = (0..vars).collect();
    let mut out = PartialState::new();
    for i in 0..count {
        let j = i + rng.below((vars - i) as u64) as usize;
        pool.swap(i, j);
        out.insert(pool[i], rng.coin());
    }
    out
}

/// A seeded random system. Each action draws a precondition size in
/// `0..=max_pre` and an effect size in `1..=max_eff` (or `0..=max_eff` when
/// empty effects are allowed), then that many distinct variables with
/// random polarities. Duplicates are redrawn.
pub fn gen_random(spec: &RandomSpec) -> Result<System> {
    if spec.vars == 0 || spec.actions == 0 {
        return Err(Error::Generator("random systems need vars > 0 and actions > 0".into()));
    }
    let eff_lo = usize::from(!spec.allow_empty_effects);
    let eff_hi = spec.max_eff.min(spec.vars);
    if eff_hi < eff_lo {
        return Err(Error::Generator("max_eff must be positive".into()));
    }
    let pre_hi = spec.max_pre.min(spec.vars);
    let mut rng = SplitMix64::new(spec.seed);
    let mut seen = BTreeSet::new();
    let mut actions = Vec::with_capacity(spec.actions);
    for _ in 0..spec.actions {
        let mut tries = 0;
        loop {
            let pre_k = rng.below(pre_hi as u64 + 1) as usize;
            let eff_k = eff_lo + rng.below((eff_hi - eff_lo) as u64 + 1) as usize;
            let pre = draw_literals(&mut rng, spec.vars, pre_k);
            let eff = draw_literals(&mut rng, spec.vars, eff_k);
            let a = Action::new(pre, eff);
            if seen.insert(a.clone()) {
                actions.push(a);
                break;
            }
            tries += 1;
            if tries >= REDRAW_BUDGET {
                return Err(Error::Generator(format!(
                    "could not draw {} distinct actions over {} variables",
                    spec.actions, spec.vars
                )));
            }
        }
    }
    System::with_anonymous_vars(spec.vars, actions)
}

/// A generator family with its size parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GeneratorSpec {
    Clique { m: usize },
    Star { n: u64 },
    Lotus { n: u64 },
    LotusProduct { n: u64, copies: usize },
    Random(RandomSpec),
}

impl GeneratorSpec {
    pub fn generate(&self, cap: usize) -> Result<System> {
        match self {
            GeneratorSpec::Clique { m } => gen_clique(*m, cap),
            GeneratorSpec::Star { n } => gen_star(*n),
            GeneratorSpec::Lotus { n } => gen_lotus(*n),
            GeneratorSpec::LotusProduct { n, copies } => gen_lotus_product(*n, *copies),
            GeneratorSpec::Random(spec) => gen_random(spec),
        }
    }

    /// Short label used as the problem name in reports.
    pub fn label(&self) -> String {
        match self {
            GeneratorSpec::Clique { m } => format!("clique-m{m}"),
            GeneratorSpec::Star { n } => format!("star-n{n}"),
            GeneratorSpec::Lotus { n } => format!("lotus-n{n}"),
            GeneratorSpec::LotusProduct { n, copies } => format!("lotus-n{n}-x{copies}"),
            GeneratorSpec::Random(s) => format!(
                "random-v{}-a{}-p{}-e{}-s{}",
                s.vars, s.actions, s.max_pre, s.max_eff, s.seed
            ),
        }
    }
}
