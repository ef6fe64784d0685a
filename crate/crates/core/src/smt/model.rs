//! Reading back models of the factored encoding.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::system::{FullState, System};

use super::encode::{action_symbol, var_symbol};

/// A decoded factored model: the state at each step and the actions switched
/// on at each transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredModel {
    /// `k + 1` states, packed like every other [`FullState`] of the system.
    pub states: Vec<FullState>,
    /// For each of the `k` transitions, the indices of enabled actions.
    pub actions: Vec<Vec<usize>>,
}

fn tokenize(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' | b')' => {
                out.push(&s[i..i + 1]);
                i += 1;
            }
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                    i += 1;
                }
                out.push(&s[start..i]);
            }
        }
    }
    out
}

/// Collects `(define-fun name () Bool value)` entries from a model
/// printout.
pub fn parse_bool_model(text: &str) -> HashMap<String, bool> {
    let toks = tokenize(text);
    let mut out = HashMap::new();
    let mut i = 0;
    while i + 6 < toks.len() {
        if toks[i] == "define-fun" && toks[i + 2] == "(" && toks[i + 3] == ")" && toks[i + 4] == "Bool" {
            match toks[i + 5] {
                "true" => {
                    out.insert(toks[i + 1].to_string(), true);
                }
                "false" => {
                    out.insert(toks[i + 1].to_string(), false);
                }
                _ => {}
            }
            i += 6;
        } else {
            i += 1;
        }
    }
    out
}

/// Decodes the step states and enabled actions of a sat factored query.
/// Symbols the solver left out of the model default to false.
pub fn decode_factored_model(sys: &System, k: u64, model_text: &str) -> Result<FactoredModel> {
    let values = parse_bool_model(model_text);
    if values.is_empty() && !sys.domain().is_empty() {
        return Err(Error::Solver {
            message: "sat answer without a readable model".into(),
            log: Vec::new(),
        });
    }
    let get = |name: String| values.get(&name).copied().unwrap_or(false);
    let states = (1..=k + 1)
        .map(|i| {
            let bits = sys
                .domain()
                .iter()
                .enumerate()
                .filter(|&(_, &v)| get(var_symbol(v, i)))
                .fold(0u64, |acc, (pos, _)| acc | 1 << pos);
            FullState(bits)
        })
        .collect();
    let actions = (1..=k)
        .map(|i| (0..sys.actions().len()).filter(|&a| get(action_symbol(a, i))).collect())
        .collect();
    Ok(FactoredModel { states, actions })
}
