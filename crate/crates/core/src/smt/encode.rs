//! SMT-LIB 2 encodings of "there is a simple path with `k` transitions".
//!
//! Both documents are satisfiable iff `k ≤ rd(δ)`. The explicit encoding
//! spells out the whole state graph over an uninterpreted sort; the factored
//! encoding works directly on the actions with one Boolean per action and
//! step and one per variable and step.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::system::{System, TransitionGraph};

/// A self-contained SMT-LIB 2 script ending in a single `(check-sat)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtDocument {
    logic: String,
    symbols: Vec<String>,
    assertions: Vec<String>,
    text: String,
}

impl SmtDocument {
    pub fn logic(&self) -> &str {
        &self.logic
    }

    /// Declared constant and function symbols, in declaration order.
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn assertions(&self) -> &[String] {
        &self.assertions
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// The script with model production switched on and a `(get-model)`
    /// after the `(check-sat)`.
    pub fn with_model_request(&self) -> String {
        let mut s = String::with_capacity(self.text.len() + 64);
        s.push_str("(set-option :produce-models true)\n");
        s.push_str(&self.text);
        s.push_str("(get-model)\n");
        s
    }
}

struct Builder {
    logic: String,
    symbols: Vec<String>,
    assertions: Vec<String>,
    text: String,
}

impl Builder {
    fn new(logic: &str) -> Self {
        let mut text = String::new();
        writeln!(text, "(set-logic {logic})").unwrap();
        Self {
            logic: logic.to_string(),
            symbols: Vec::new(),
            assertions: Vec::new(),
            text,
        }
    }

    fn raw(&mut self, line: &str) {
        self.text.push_str(line);
        self.text.push('\n');
    }

    fn declare(&mut self, name: String, signature: &str) {
        writeln!(self.text, "(declare-fun {name} {signature})").unwrap();
        self.symbols.push(name);
    }

    fn assert(&mut self, formula: String) {
        writeln!(self.text, "(assert {formula})").unwrap();
        self.assertions.push(formula);
    }

    fn finish(mut self) -> SmtDocument {
        self.text.push_str("(check-sat)\n");
        SmtDocument {
            logic: self.logic,
            symbols: self.symbols,
            assertions: self.assertions,
            text: self.text,
        }
    }
}

/// `(and ...)` with the degenerate cases rendered as `true` or the lone
/// operand.
fn and_of(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "true".to_string(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(and {})", parts.join(" ")),
    }
}

fn or_of(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "false".to_string(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(or {})", parts.join(" ")),
    }
}

pub fn state_symbol(v: usize) -> String {
    format!("s{v}")
}

pub fn step_symbol(i: u64) -> String {
    format!("y{i}")
}

pub fn action_symbol(action: usize, step: u64) -> String {
    format!("a{action}_s{step}")
}

pub fn var_symbol(var: usize, step: u64) -> String {
    format!("v{var}_s{step}")
}

/// The explicit encoding over the state graph `g`.
///
/// States become pairwise distinct constants of sort `S`, `G` is pinned
/// exactly to the edge relation, and `y1..y{k+1}` must form a chain of
/// distinct states.
pub fn encode_phi1_graph(g: &TransitionGraph, k: u64) -> Result<SmtDocument> {
    if k < 1 {
        return Err(Error::InvalidStepCount(k));
    }
    let n = g.num_vertices();
    let mut b = Builder::new("QF_UF");
    b.raw("(declare-sort S 0)");
    for v in 0..n {
        b.declare(state_symbol(v), "() S");
    }
    if n >= 2 {
        let all: Vec<String> = (0..n).map(state_symbol).collect();
        b.assert(format!("(distinct {})", all.join(" ")));
    }
    b.declare("G".to_string(), "(S S) Bool");
    for u in 0..n {
        for v in 0..n {
            let atom = format!("(G {} {})", state_symbol(u), state_symbol(v));
            if g.has_edge(u, v) {
                b.assert(atom);
            } else {
                b.assert(format!("(not {atom})"));
            }
        }
    }
    for i in 1..=k + 1 {
        b.declare(step_symbol(i), "() S");
    }
    for i in 1..=k {
        b.assert(format!("(G {} {})", step_symbol(i), step_symbol(i + 1)));
    }
    for i in 1..=k + 1 {
        for j in i + 1..=k + 1 {
            b.assert(format!("(not (= {} {}))", step_symbol(i), step_symbol(j)));
        }
    }
    for i in 1..=k + 1 {
        let choices = (0..n).map(|v| format!("(= {} {})", step_symbol(i), state_symbol(v))).collect();
        b.assert(or_of(choices));
    }
    Ok(b.finish())
}

/// The explicit encoding for `sys`; builds the state graph first.
pub fn encode_phi1(sys: &System, k: u64, explicit_cap: usize) -> Result<SmtDocument> {
    if k < 1 {
        return Err(Error::InvalidStepCount(k));
    }
    let g = crate::system::build_transition_graph(sys, explicit_cap)?;
    encode_phi1_graph(&g, k)
}

fn literal(var: usize, value: bool, step: u64) -> String {
    if value {
        var_symbol(var, step)
    } else {
        format!("(not {})", var_symbol(var, step))
    }
}

/// The factored encoding: action and variable Booleans per step, the
/// precondition/effect/frame implication per action and step, at least one
/// action per step, and pairwise distinct states.
pub fn encode_phi2(sys: &System, k: u64) -> Result<SmtDocument> {
    if k < 1 {
        return Err(Error::InvalidStepCount(k));
    }
    let domain = sys.domain();
    let mut b = Builder::new("QF_UF");
    for i in 1..=k {
        for a in 0..sys.actions().len() {
            b.declare(action_symbol(a, i), "() Bool");
        }
    }
    for i in 1..=k + 1 {
        for &v in domain {
            b.declare(var_symbol(v, i), "() Bool");
        }
    }

    for i in 1..=k {
        for (a, action) in sys.actions().iter().enumerate() {
            let mut body: Vec<String> = action.pre.iter().map(|(v, val)| literal(v, val, i)).collect();
            body.extend(action.eff.iter().map(|(v, val)| literal(v, val, i + 1)));
            body.extend(
                domain
                    .iter()
                    .filter(|&&v| !action.eff.contains_var(v))
                    .map(|&v| format!("(= {} {})", var_symbol(v, i), var_symbol(v, i + 1))),
            );
            b.assert(format!("(=> {} {})", action_symbol(a, i), and_of(body)));
        }
    }
    for i in 1..=k {
        let any = (0..sys.actions().len()).map(|a| action_symbol(a, i)).collect();
        b.assert(or_of(any));
    }
    for i in 1..=k + 1 {
        for j in i + 1..=k + 1 {
            let differ = domain
                .iter()
                .map(|&v| format!("(xor {} {})", var_symbol(v, i), var_symbol(v, j)))
                .collect();
            b.assert(or_of(differ));
        }
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::tests::{example1, lit, ps};
    use crate::system::{build_transition_graph, Action, DEFAULT_EXPLICIT_CAP};

    #[test]
    fn rejects_zero_steps() {
        let s = example1();
        assert!(matches!(encode_phi2(&s, 0), Err(Error::InvalidStepCount(0))));
        assert!(matches!(encode_phi1(&s, 0, DEFAULT_EXPLICIT_CAP), Err(Error::InvalidStepCount(0))));
    }

    #[test]
    fn phi1_structure() {
        let g = build_transition_graph(&example1(), DEFAULT_EXPLICIT_CAP).unwrap();
        let doc = encode_phi1_graph(&g, 3).unwrap();
        let text = doc.text();
        assert!(text.starts_with("(set-logic QF_UF)\n(declare-sort S 0)\n"));
        assert!(text.ends_with("(check-sat)\n"));
        assert_eq!(text.matches("(check-sat)").count(), 1);
        // 4 states, G, y1..y4
        assert_eq!(doc.symbols().len(), 4 + 1 + 4);
        assert!(text.contains("(assert (distinct s0 s1 s2 s3))"));
        assert!(text.contains("(assert (G s0 s1))"));
        assert!(text.contains("(assert (not (G s2 s2)))"));
        assert!(text.contains("(assert (G y3 y4))"));
        assert!(text.contains("(assert (not (= y1 y4)))"));
        assert!(text.contains("(assert (or (= y4 s0) (= y4 s1) (= y4 s2) (= y4 s3)))"));
        // distinct + 16 G literals + 3 chain + 6 disequalities + 4 memberships
        assert_eq!(doc.assertions().len(), 1 + 16 + 3 + 6 + 4);
    }

    #[test]
    fn phi2_structure() {
        let a = Action::new(ps(&[lit(0, false)]), ps(&[lit(1, true)]));
        let sys = System::with_anonymous_vars(2, vec![a]).unwrap();
        let doc = encode_phi2(&sys, 2).unwrap();
        let text = doc.text();
        assert!(text.contains("(declare-fun a0_s1 () Bool)"));
        assert!(text.contains("(declare-fun v1_s3 () Bool)"));
        assert!(text.contains("(assert (=> a0_s1 (and (not v0_s1) v1_s2 (= v0_s1 v0_s2))))"));
        assert!(text.contains("(assert a0_s2)"));
        assert!(text.contains("(assert (or (xor v0_s1 v0_s3) (xor v1_s1 v1_s3)))"));
        assert_eq!(doc.symbols().len(), 2 + 6);
    }

    #[test]
    fn phi2_without_actions_asserts_false() {
        let sys = System::with_anonymous_vars(1, vec![]).unwrap();
        let doc = encode_phi2(&sys, 1).unwrap();
        assert!(doc.text().contains("(assert false)"));
    }

    #[test]
    fn symbol_names_are_deterministic() {
        let s = example1();
        assert_eq!(encode_phi2(&s, 3).unwrap(), encode_phi2(&s, 3).unwrap());
        assert_eq!(
            encode_phi1(&s, 2, DEFAULT_EXPLICIT_CAP).unwrap(),
            encode_phi1(&s, 2, DEFAULT_EXPLICIT_CAP).unwrap()
        );
    }

    #[test]
    fn model_request_wraps_script() {
        let doc = encode_phi2(&example1(), 1).unwrap();
        let s = doc.with_model_request();
        assert!(s.starts_with("(set-option :produce-models true)\n(set-logic"));
        assert!(s.ends_with("(check-sat)\n(get-model)\n"));
    }
}
