//! Line-oriented machine description format.
//!
//! ```text
//! states: q0 qH
//! symbols: _ 0 1          # first symbol is the blank
//! input: 0 1
//! start: q0
//! halt: qH
//! delta: q0 0 -> q0 1 R
//! ```
//!
//! `states`, `symbols` and `start` are mandatory; `input` and `halt` default
//! to empty. Sections may appear in any order, `delta` any number of times.

use std::collections::HashSet;

use super::{Action, MachineError, Move, State, Symbol, TuringMachine};

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

#[derive(Debug)]
struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

fn tokenize(body: &str, offset: usize) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &body[s..i],
                    column: offset + body[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &body[s..],
            column: offset + body[..s].chars().count() + 1,
        });
    }
    tokens
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> MachineError {
    MachineError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

#[derive(Default)]
struct Sections<'a> {
    states: Option<Line<'a>>,
    symbols: Option<Line<'a>>,
    input: Option<Line<'a>>,
    start: Option<Line<'a>>,
    halt: Option<Line<'a>>,
    delta: Vec<Line<'a>>,
}

fn names(line: &Line<'_>) -> Result<Vec<String>, MachineError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(line.tokens.len());
    for t in &line.tokens {
        if !seen.insert(t.text) {
            return Err(MachineError::DuplicateName {
                line: line.number,
                name: t.text.to_string(),
            });
        }
        out.push(t.text.to_string());
    }
    Ok(out)
}

/// Parses and validates a machine description.
pub fn parse_tm(text: &str) -> Result<TuringMachine, MachineError> {
    let mut sections = Sections::default();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some((key, body)) = content.split_once(':') else {
            let col = content.chars().take_while(|c| c.is_whitespace()).count() + 1;
            return Err(syntax(number, col, "expected `key: values`"));
        };
        let key_col = key.chars().take_while(|c| c.is_whitespace()).count() + 1;
        let offset = key.chars().count() + 1;
        let line = Line {
            number,
            tokens: tokenize(body, offset),
        };
        let slot = match key.trim() {
            "states" => &mut sections.states,
            "symbols" => &mut sections.symbols,
            "input" => &mut sections.input,
            "start" => &mut sections.start,
            "halt" => &mut sections.halt,
            "delta" => {
                sections.delta.push(line);
                continue;
            }
            other => {
                return Err(syntax(number, key_col, format!("unknown section `{other}`")));
            }
        };
        if slot.is_some() {
            return Err(syntax(
                number,
                key_col,
                format!("section `{}` declared twice", key.trim()),
            ));
        }
        *slot = Some(line);
    }

    let states_line = sections.states.ok_or(MachineError::MissingSection("states"))?;
    let symbols_line = sections.symbols.ok_or(MachineError::MissingSection("symbols"))?;
    let start_line = sections.start.ok_or(MachineError::MissingSection("start"))?;

    let states = names(&states_line)?;
    let symbols = names(&symbols_line)?;
    if states.is_empty() {
        return Err(syntax(states_line.number, 1, "at least one state is required"));
    }
    if symbols.is_empty() {
        return Err(syntax(symbols_line.number, 1, "at least one tape symbol is required"));
    }

    let state = |line: usize, t: &Token<'_>| {
        states
            .iter()
            .position(|n| n == t.text)
            .map(State)
            .ok_or_else(|| MachineError::UndeclaredState {
                line,
                name: t.text.to_string(),
            })
    };
    let symbol = |line: usize, t: &Token<'_>| {
        symbols
            .iter()
            .position(|n| n == t.text)
            .map(Symbol)
            .ok_or_else(|| MachineError::UndeclaredSymbol {
                line,
                name: t.text.to_string(),
            })
    };

    let start = match start_line.tokens.as_slice() {
        [t] => state(start_line.number, t)?,
        [] => return Err(syntax(start_line.number, 1, "missing start state")),
        [_, extra, ..] => {
            return Err(syntax(start_line.number, extra.column, "exactly one start state expected"))
        }
    };

    let mut input = Vec::new();
    if let Some(line) = &sections.input {
        for t in &line.tokens {
            let s = symbol(line.number, t)?;
            if s.is_blank() {
                return Err(MachineError::BlankInInput(t.text.to_string()));
            }
            if !input.contains(&s) {
                input.push(s);
            }
        }
    }

    let mut halt = Vec::new();
    if let Some(line) = &sections.halt {
        for t in &line.tokens {
            halt.push(state(line.number, t)?);
        }
    }

    let mut seen = HashSet::new();
    let mut transitions = Vec::with_capacity(sections.delta.len());
    for line in &sections.delta {
        let toks = &line.tokens;
        if toks.len() != 6 || toks[2].text != "->" {
            let col = toks.get(2).map_or(1, |t| t.column);
            return Err(syntax(
                line.number,
                col,
                "expected `state symbol -> state symbol L|R`",
            ));
        }
        let q = state(line.number, &toks[0])?;
        let s = symbol(line.number, &toks[1])?;
        let next = state(line.number, &toks[3])?;
        let write = symbol(line.number, &toks[4])?;
        let movement = match toks[5].text {
            "L" => Move::L,
            "R" => Move::R,
            other => {
                return Err(syntax(
                    line.number,
                    toks[5].column,
                    format!("move must be L or R, found `{other}`"),
                ))
            }
        };
        if halt.contains(&q) {
            return Err(MachineError::TransitionFromHalt {
                line: line.number,
                state: toks[0].text.to_string(),
            });
        }
        if !seen.insert((q, s)) {
            return Err(MachineError::DuplicateTransition {
                line: line.number,
                state: toks[0].text.to_string(),
                symbol: toks[1].text.to_string(),
            });
        }
        transitions.push((q, s, Action { next, write, movement }));
    }

    TuringMachine::new(states, symbols, input, start, &halt, transitions)
}
