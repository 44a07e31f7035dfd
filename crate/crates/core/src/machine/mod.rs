//! Deterministic single-tape Turing machines and their execution on dotted
//! sequences.
//!
//! States and tape symbols are referred to by dense indices: [`State`] holds
//! γ_q and [`Symbol`] holds γ_s. The blank is always the first declared tape
//! symbol, so `Symbol::BLANK` has index 0.

mod config;
mod parse;

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{iterate, Trace};

pub use config::DottedSequence;
pub use parse::parse_tm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct State(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol(pub usize);

impl Symbol {
    pub const BLANK: Symbol = Symbol(0);

    pub fn is_blank(self) -> bool {
        self == Symbol::BLANK
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::L => "L",
            Move::R => "R",
        })
    }
}

/// Right-hand side of a transition: next state, written symbol, head move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub next: State,
    pub write: Symbol,
    pub movement: Move,
}

/// Sizes of the two enumerations, i.e. the radices used by the Gödel encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Radix {
    pub n_q: usize,
    pub n_s: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: undeclared state `{name}`")]
    UndeclaredState { line: usize, name: String },
    #[error("line {line}: undeclared tape symbol `{name}`")]
    UndeclaredSymbol { line: usize, name: String },
    #[error("line {line}: duplicate name `{name}`")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}: duplicate transition for ({state}, {symbol})")]
    DuplicateTransition {
        line: usize,
        state: String,
        symbol: String,
    },
    #[error("line {line}: halt state `{state}` must not have transitions")]
    TransitionFromHalt { line: usize, state: String },
    #[error("missing transition for non-halt pair ({state}, {symbol})")]
    MissingTransition { state: String, symbol: String },
    #[error("the blank symbol `{0}` cannot be an input symbol")]
    BlankInInput(String),
    #[error("missing `{0}:` declaration")]
    MissingSection(&'static str),
    #[error("machine must declare at least one {0}")]
    Empty(&'static str),
    #[error("index {index} out of range for {what} (size {size})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("configuration is in halt state `{0}`")]
    Halted(String),
    #[error("configuration is not well-typed for this machine: {0}")]
    IllTyped(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{symbol}` is not an input symbol")]
pub struct IllegalInput {
    pub symbol: String,
}

/// A validated machine `(Q, N, T, q0, blank, F, δ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuringMachine {
    states: Vec<String>,
    symbols: Vec<String>,
    input: Vec<Symbol>,
    start: State,
    halting: Vec<bool>,
    // row-major over (state, symbol)
    delta: Vec<Option<Action>>,
}

impl TuringMachine {
    /// Validates and assembles a machine from index-based parts.
    ///
    /// `transitions` must cover every (non-halt state, symbol) pair exactly
    /// once and nothing else.
    pub fn new(
        states: Vec<String>,
        symbols: Vec<String>,
        input: Vec<Symbol>,
        start: State,
        halt: &[State],
        transitions: impl IntoIterator<Item = (State, Symbol, Action)>,
    ) -> Result<Self, MachineError> {
        if states.is_empty() {
            return Err(MachineError::Empty("state"));
        }
        if symbols.is_empty() {
            return Err(MachineError::Empty("tape symbol"));
        }
        let (n_q, n_s) = (states.len(), symbols.len());
        let check_state = |q: State| {
            if q.0 < n_q {
                Ok(())
            } else {
                Err(MachineError::IndexOutOfRange {
                    what: "state",
                    index: q.0,
                    size: n_q,
                })
            }
        };
        let check_symbol = |s: Symbol| {
            if s.0 < n_s {
                Ok(())
            } else {
                Err(MachineError::IndexOutOfRange {
                    what: "symbol",
                    index: s.0,
                    size: n_s,
                })
            }
        };
        check_state(start)?;
        let mut halting = vec![false; n_q];
        for &q in halt {
            check_state(q)?;
            halting[q.0] = true;
        }
        for &s in &input {
            check_symbol(s)?;
            if s.is_blank() {
                return Err(MachineError::BlankInInput(symbols[0].clone()));
            }
        }
        let mut delta = vec![None; n_q * n_s];
        for (q, s, action) in transitions {
            check_state(q)?;
            check_symbol(s)?;
            check_state(action.next)?;
            check_symbol(action.write)?;
            if halting[q.0] {
                return Err(MachineError::TransitionFromHalt {
                    line: 0,
                    state: states[q.0].clone(),
                });
            }
            let slot = &mut delta[q.0 * n_s + s.0];
            if slot.is_some() {
                return Err(MachineError::DuplicateTransition {
                    line: 0,
                    state: states[q.0].clone(),
                    symbol: symbols[s.0].clone(),
                });
            }
            *slot = Some(action);
        }
        for q in 0..n_q {
            if halting[q] {
                continue;
            }
            for s in 0..n_s {
                if delta[q * n_s + s].is_none() {
                    return Err(MachineError::MissingTransition {
                        state: states[q].clone(),
                        symbol: symbols[s].clone(),
                    });
                }
            }
        }
        Ok(Self {
            states,
            symbols,
            input,
            start,
            halting,
            delta,
        })
    }

    pub fn radix(&self) -> Radix {
        Radix {
            n_q: self.states.len(),
            n_s: self.symbols.len(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn symbol_names(&self) -> &[String] {
        &self.symbols
    }

    pub fn state_name(&self, q: State) -> &str {
        &self.states[q.0]
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        &self.symbols[s.0]
    }

    pub fn state_by_name(&self, name: &str) -> Option<State> {
        self.states.iter().position(|n| n == name).map(State)
    }

    pub fn symbol_by_name(&self, name: &str) -> Option<Symbol> {
        self.symbols.iter().position(|n| n == name).map(Symbol)
    }

    pub fn input_symbols(&self) -> &[Symbol] {
        &self.input
    }

    pub fn start(&self) -> State {
        self.start
    }

    pub fn is_halting(&self, q: State) -> bool {
        self.halting[q.0]
    }

    pub fn halt_states(&self) -> impl Iterator<Item = State> + '_ {
        self.halting
            .iter()
            .enumerate()
            .filter(|(_, h)| **h)
            .map(|(q, _)| State(q))
    }

    pub fn states(&self) -> impl Iterator<Item = State> {
        (0..self.states.len()).map(State)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.symbols.len()).map(Symbol)
    }

    /// δ(q, s); `None` exactly when `q` is a halt state.
    pub fn delta(&self, q: State, s: Symbol) -> Option<Action> {
        self.delta[q.0 * self.symbols.len() + s.0]
    }

    /// All defined transitions in (state, symbol) order.
    pub fn transitions(&self) -> impl Iterator<Item = (State, Symbol, Action)> + '_ {
        let n_s = self.symbols.len();
        self.delta
            .iter()
            .enumerate()
            .filter_map(move |(k, a)| a.map(|a| (State(k / n_s), Symbol(k % n_s), a)))
    }

    /// Start configuration with the head on the first input symbol.
    pub fn initial_config(&self, input: &[Symbol]) -> Result<DottedSequence, IllegalInput> {
        if let Some(bad) = input.iter().find(|s| !self.input.contains(s)) {
            return Err(IllegalInput {
                symbol: self
                    .symbols
                    .get(bad.0)
                    .cloned()
                    .unwrap_or_else(|| format!("#{}", bad.0)),
            });
        }
        Ok(DottedSequence::new(self.start, Vec::new(), input.to_vec()))
    }

    /// Resolves a sequence of symbol names into input symbols.
    pub fn input_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<Symbol>, IllegalInput> {
        names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                self.symbol_by_name(n)
                    .filter(|s| self.input.contains(s))
                    .ok_or_else(|| IllegalInput {
                        symbol: n.to_string(),
                    })
            })
            .collect()
    }

    /// One application of δ̂ to a dotted sequence.
    pub fn step(&self, config: &DottedSequence) -> Result<DottedSequence, StepError> {
        config
            .check(self)
            .map_err(StepError::IllTyped)?;
        let q = config.state();
        let action = self
            .delta(q, config.head())
            .ok_or_else(|| StepError::Halted(self.state_name(q).to_string()))?;
        let left = config.left();
        let right = config.right();
        let tail = |v: &[Symbol]| v.get(1..).unwrap_or(&[]).to_vec();
        let next = match action.movement {
            Move::R => {
                let mut new_left = Vec::with_capacity(left.len() + 1);
                new_left.push(action.write);
                new_left.extend_from_slice(left);
                DottedSequence::new(action.next, new_left, tail(right))
            }
            Move::L => {
                let neighbour = left.first().copied().unwrap_or(Symbol::BLANK);
                let mut new_right = Vec::with_capacity(right.len() + 1);
                new_right.push(neighbour);
                new_right.push(action.write);
                new_right.extend_from_slice(right.get(1..).unwrap_or(&[]));
                DottedSequence::new(action.next, tail(left), new_right)
            }
        };
        Ok(next)
    }

    /// Iterates [`TuringMachine::step`] until a halt state is entered or
    /// `max_steps` steps have been taken.
    pub fn run(&self, initial: DottedSequence, max_steps: usize) -> Result<Trace<DottedSequence>, StepError> {
        iterate(
            initial,
            max_steps,
            |c| self.is_halting(c.state()),
            |c| self.step(c),
        )
    }

    /// Human-readable `tape` with the head marked, e.g. `1 [qH]0`.
    pub fn render(&self, config: &DottedSequence) -> String {
        let left: Vec<&str> = config.left().iter().rev().map(|&s| self.symbol_name(s)).collect();
        let right: Vec<&str> = config.right().iter().map(|&s| self.symbol_name(s)).collect();
        let mut out = left.join(" ");
        if !out.is_empty() {
            out.push(' ');
        }
        out.push('[');
        out.push_str(self.state_name(config.state()));
        out.push(']');
        out.push_str(&right.join(" "));
        out
    }

    /// The non-blank tape content read left to right, blanks trimmed at
    /// both ends. Symbol names are concatenated.
    pub fn tape_string(&self, config: &DottedSequence) -> String {
        let cells: Vec<Symbol> = config
            .left()
            .iter()
            .rev()
            .chain(config.right())
            .copied()
            .collect();
        let first = cells.iter().position(|s| !s.is_blank());
        let last = cells.iter().rposition(|s| !s.is_blank());
        match (first, last) {
            (Some(a), Some(b)) => cells[a..=b].iter().map(|&s| self.symbol_name(s)).collect(),
            _ => String::new(),
        }
    }

    /// The machine in the text format accepted by [`parse_tm`].
    pub fn to_source(&self) -> String {
        let names = |v: &mut dyn Iterator<Item = &str>| v.collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "states: {}", names(&mut self.state_names().iter().map(String::as_str)));
        let _ = writeln!(out, "symbols: {}", names(&mut self.symbol_names().iter().map(String::as_str)));
        let _ = writeln!(out, "input: {}", names(&mut self.input_symbols().iter().map(|&s| self.symbol_name(s))));
        let _ = writeln!(out, "start: {}", self.state_name(self.start()));
        let _ = writeln!(out, "halt: {}", names(&mut self.halt_states().map(|q| self.state_name(q))));
        for (q, s, a) in self.transitions() {
            let _ = writeln!(
                out,
                "delta: {} {} -> {} {} {}",
                self.state_name(q),
                self.symbol_name(s),
                self.state_name(a.next),
                self.symbol_name(a.write),
                a.movement
            );
        }
        out
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const FLIP: &str = "\
states: q0 qH
symbols: _ 0 1          # first symbol is the blank
input: 0 1
start: q0
halt: qH
delta: q0 0 -> q0 1 R
delta: q0 1 -> q0 0 R
delta: q0 _ -> qH _ L
";

    pub(crate) fn flip() -> TuringMachine {
        parse_tm(FLIP).unwrap()
    }

    const Q0: State = State(0);
    const QH: State = State(1);
    const B: Symbol = Symbol(0);
    const ZERO: Symbol = Symbol(1);
    const ONE: Symbol = Symbol(2);

    #[test]
    fn flip_counts() {
        let m = flip();
        assert_eq!(m.radix(), Radix { n_q: 2, n_s: 3 });
        assert_eq!(m.halt_states().collect::<Vec<_>>(), vec![QH]);
        assert_eq!(m.delta(QH, ONE), None);
    }

    #[test]
    fn source_round_trip() {
        let m = flip();
        assert_eq!(parse_tm(&m.to_source()).unwrap(), m);
    }

    #[test]
    fn step_right_move() {
        let m = flip();
        let c = DottedSequence::new(Q0, vec![], vec![ZERO, ONE]);
        let next = m.step(&c).unwrap();
        assert_eq!(next, DottedSequence::new(Q0, vec![ONE], vec![ONE]));
    }

    #[test]
    fn step_on_halt_state_is_an_error() {
        let m = flip();
        let c = DottedSequence::new(QH, vec![ONE], vec![]);
        assert!(matches!(m.step(&c), Err(StepError::Halted(_))));
    }

    #[test]
    fn left_move_draws_neighbour_from_blank_tail() {
        let m = flip();
        // (q0, ⊔) -> (qH, ⊔, L) with nothing explicit on the left.
        let c = DottedSequence::new(Q0, vec![], vec![]);
        let next = m.step(&c).unwrap();
        assert_eq!(next, DottedSequence::new(QH, vec![], vec![]));
        assert_eq!(next.right(), &[] as &[Symbol]);
    }

    #[test]
    fn flip_on_01_halts_after_three_steps() {
        let m = flip();
        let c0 = m.initial_config(&[ZERO, ONE]).unwrap();
        let trace = m.run(c0, 10).unwrap();
        assert!(trace.halted());
        assert_eq!(trace.steps(), 3);
        assert_eq!(m.tape_string(trace.last()), "10");
        assert_eq!(trace.last(), &DottedSequence::new(QH, vec![ONE], vec![ZERO]));
        for w in trace.states.windows(2) {
            assert_eq!(m.step(&w[0]).unwrap(), w[1]);
        }
    }

    #[test]
    fn zero_budget_is_a_timeout() {
        let m = flip();
        let c0 = m.initial_config(&[ZERO]).unwrap();
        let trace = m.run(c0.clone(), 0).unwrap();
        assert_eq!(trace.states, vec![c0]);
        assert!(!trace.halted());
    }

    #[test]
    fn start_in_halt_state_halts_immediately() {
        let m = TuringMachine::new(
            vec!["h".into()],
            vec!["_".into(), "a".into()],
            vec![Symbol(1)],
            State(0),
            &[State(0)],
            [],
        )
        .unwrap();
        let c0 = m.initial_config(&[Symbol(1)]).unwrap();
        let trace = m.run(c0.clone(), 0).unwrap();
        assert_eq!(trace.states, vec![c0]);
        assert!(trace.halted());
    }

    #[test]
    fn initial_config_checks_input_alphabet() {
        let m = flip();
        assert_eq!(
            m.initial_config(&[ZERO, ONE]).unwrap(),
            DottedSequence::new(Q0, vec![], vec![ZERO, ONE])
        );
        assert_eq!(
            m.initial_config(&[]).unwrap(),
            DottedSequence::new(Q0, vec![], vec![])
        );
        let err = m.initial_config(&[ZERO, B]).unwrap_err();
        assert_eq!(err.symbol, "_");
        assert!(m.input_from_names(&["0", "_"]).is_err());
    }

    #[test]
    fn ill_typed_configuration_is_rejected() {
        let m = flip();
        let c = DottedSequence::new(State(5), vec![], vec![]);
        assert!(matches!(m.step(&c), Err(StepError::IllTyped(_))));
    }
}
