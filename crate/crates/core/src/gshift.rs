//! Generalized shift emulating a Turing machine.
//!
//! The domain of dependence and the domain of effect are both the window
//! `d₋₂ d₋₁ . d₀`, i.e. (left neighbour, state, scanned symbol). Each
//! window is mapped to a replacement triple and a dot movement.

use std::fmt::Write as _;

use serde::Serialize;

use crate::machine::{DottedSequence, Move, State, Symbol, TuringMachine};

/// Movement of the dot after substitution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Shift {
    DotLeft,
    Stay,
    DotRight,
}

impl Shift {
    pub fn offset(self) -> i8 {
        match self {
            Shift::DotLeft => -1,
            Shift::Stay => 0,
            Shift::DotRight => 1,
        }
    }
}

/// One cell of a dotted sequence over the joint alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Letter {
    State(State),
    Symbol(Symbol),
}

/// Domain-of-dependence window `(X, q, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Window {
    pub left: Symbol,
    pub state: State,
    pub head: Symbol,
}

impl Window {
    pub fn of(config: &DottedSequence) -> Self {
        Self {
            left: config.neighbour(),
            state: config.state(),
            head: config.head(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Rule {
    pub shift: Shift,
    pub replacement: [Letter; 3],
}

/// The (F, G) tables of a generalized shift, total over all windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedShift {
    n_q: usize,
    n_s: usize,
    // indexed by (left, state, head) row-major
    rules: Vec<Rule>,
    state_names: Vec<String>,
    symbol_names: Vec<String>,
}

fn rule_for(m: &TuringMachine, w: Window) -> Rule {
    use Letter::{State as Q, Symbol as S};
    match m.delta(w.state, w.head) {
        None => Rule {
            shift: Shift::Stay,
            replacement: [S(w.left), Q(w.state), S(w.head)],
        },
        Some(a) => match a.movement {
            Move::R => Rule {
                shift: Shift::DotRight,
                replacement: [S(w.left), S(a.write), Q(a.next)],
            },
            Move::L => Rule {
                shift: Shift::DotLeft,
                replacement: [Q(a.next), S(w.left), S(a.write)],
            },
        },
    }
}

impl GeneralizedShift {
    pub fn build(m: &TuringMachine) -> Self {
        let (n_q, n_s) = (m.n_states(), m.n_symbols());
        let mut rules = Vec::with_capacity(n_s * n_q * n_s);
        for left in m.symbols() {
            for state in m.states() {
                for head in m.symbols() {
                    rules.push(rule_for(m, Window { left, state, head }));
                }
            }
        }
        Self {
            n_q,
            n_s,
            rules,
            state_names: m.state_names().to_vec(),
            symbol_names: m.symbol_names().to_vec(),
        }
    }

    pub fn rule(&self, w: Window) -> &Rule {
        &self.rules[(w.left.0 * self.n_q + w.state.0) * self.n_s + w.head.0]
    }

    pub fn windows(&self) -> impl Iterator<Item = Window> + '_ {
        (0..self.n_s).flat_map(move |x| {
            (0..self.n_q).flat_map(move |q| {
                (0..self.n_s).map(move |z| Window {
                    left: Symbol(x),
                    state: State(q),
                    head: Symbol(z),
                })
            })
        })
    }

    /// Ω(s) = σ^F(s ⊕ G(s)).
    pub fn step(&self, config: &DottedSequence) -> DottedSequence {
        let rule = self.rule(Window::of(config));

        // Joint-alphabet sequence: `before` is everything left of the dot,
        // nearest first; `after` starts at the dot.
        let mut before: Vec<Letter> = Vec::with_capacity(config.left().len() + 2);
        before.push(Letter::State(config.state()));
        before.extend(config.left().iter().map(|&s| Letter::Symbol(s)));
        let mut after: Vec<Letter> = config.right().iter().map(|&s| Letter::Symbol(s)).collect();
        let blank = Letter::Symbol(Symbol::BLANK);
        while before.len() < 2 {
            before.push(blank);
        }
        if after.is_empty() {
            after.push(blank);
        }

        // Substitute the domain of effect (positions -2, -1, 0).
        before[1] = rule.replacement[0];
        before[0] = rule.replacement[1];
        after[0] = rule.replacement[2];

        match rule.shift {
            Shift::Stay => {}
            Shift::DotRight => {
                let moved = after.remove(0);
                before.insert(0, moved);
            }
            Shift::DotLeft => {
                let moved = before.remove(0);
                after.insert(0, moved);
            }
        }

        let mut rest = before.into_iter();
        let state = match rest.next() {
            Some(Letter::State(q)) => q,
            other => unreachable!("replacement placed {other:?} left of the dot"),
        };
        let as_symbols = |it: &mut dyn Iterator<Item = Letter>| -> Vec<Symbol> {
            it.map(|l| match l {
                Letter::Symbol(s) => s,
                Letter::State(q) => unreachable!("stray state {q:?} on the tape"),
            })
            .collect()
        };
        let left = as_symbols(&mut rest);
        let right = as_symbols(&mut after.into_iter());
        DottedSequence::new(state, left, right)
    }

    pub fn is_fixed_point(&self, config: &DottedSequence) -> bool {
        &self.step(config) == config
    }

    /// Iterates Ω until a fixed point or `max_steps`.
    pub fn run(&self, initial: DottedSequence, max_steps: usize) -> crate::trace::Trace<DottedSequence> {
        let mut states = vec![initial];
        loop {
            let current = states.last().expect("non-empty");
            let next = self.step(current);
            if &next == current {
                return crate::trace::Trace {
                    states,
                    outcome: crate::trace::Outcome::Halted,
                };
            }
            if states.len() > max_steps {
                return crate::trace::Trace {
                    states,
                    outcome: crate::trace::Outcome::Timeout,
                };
            }
            states.push(next);
        }
    }

    fn letter_name(&self, l: Letter) -> &str {
        match l {
            Letter::State(q) => &self.state_names[q.0],
            Letter::Symbol(s) => &self.symbol_names[s.0],
        }
    }

    /// Tab-separated table dump with columns `X q Z F G1 G2 G3`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("X\tq\tZ\tF\tG1\tG2\tG3\n");
        for w in self.windows() {
            let r = self.rule(w);
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                self.symbol_names[w.left.0],
                self.state_names[w.state.0],
                self.symbol_names[w.head.0],
                r.shift.offset(),
                self.letter_name(r.replacement[0]),
                self.letter_name(r.replacement[1]),
                self.letter_name(r.replacement[2]),
            );
        }
        out
    }
}
