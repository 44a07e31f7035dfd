//! Random machines for property tests, the acceptance suite and benchmarks.
//!
//! Transitions are drawn uniformly over (next state × written symbol × move).
//! The last state is the only halt state and a draw is repeated until it is
//! reachable from the start state in the transition graph.

use rand::Rng;

use crate::machine::{Action, Move, State, Symbol, TuringMachine};

pub fn state_names(n_q: usize) -> Vec<String> {
    (0..n_q).map(|q| format!("q{q}")).collect()
}

/// `_` followed by `1`, `2`, ...
pub fn symbol_names(n_s: usize) -> Vec<String> {
    std::iter::once("_".to_string())
        .chain((1..n_s).map(|s| s.to_string()))
        .collect()
}

fn halt_reachable(n_q: usize, actions: &[(State, Symbol, Action)]) -> bool {
    let halt = n_q - 1;
    let mut seen = vec![false; n_q];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(q) = stack.pop() {
        if q == halt {
            return true;
        }
        for (from, _, a) in actions {
            if from.0 == q && !seen[a.next.0] {
                seen[a.next.0] = true;
                stack.push(a.next.0);
            }
        }
    }
    false
}

/// A machine with `n_q ≥ 1` states and `n_s ≥ 1` symbols; every non-blank
/// symbol is an input symbol.
pub fn random_machine<R: Rng + ?Sized>(rng: &mut R, n_q: usize, n_s: usize) -> TuringMachine {
    assert!(n_q >= 1 && n_s >= 1, "need at least one state and one symbol");
    let halt = State(n_q - 1);
    let actions = loop {
        let mut actions = Vec::with_capacity((n_q - 1) * n_s);
        for q in 0..n_q - 1 {
            for s in 0..n_s {
                let action = Action {
                    next: State(rng.gen_range(0..n_q)),
                    write: Symbol(rng.gen_range(0..n_s)),
                    movement: if rng.gen_bool(0.5) { Move::L } else { Move::R },
                };
                actions.push((State(q), Symbol(s), action));
            }
        }
        if halt_reachable(n_q, &actions) {
            break actions;
        }
    };
    TuringMachine::new(
        state_names(n_q),
        symbol_names(n_s),
        (1..n_s).map(Symbol).collect(),
        State(0),
        &[halt],
        actions,
    )
    .expect("generated machine is well formed")
}

/// Random word over the input alphabet, length in `0..=max_len`.
pub fn random_input<R: Rng + ?Sized>(rng: &mut R, m: &TuringMachine, max_len: usize) -> Vec<Symbol> {
    let alphabet = m.input_symbols();
    if alphabet.is_empty() {
        return Vec::new();
    }
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect()
}
