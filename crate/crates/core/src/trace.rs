use serde::Serialize;

/// How an iterated run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Halted,
    Timeout,
}

/// The sequence of states visited by a run, starting with the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    pub states: Vec<T>,
    pub outcome: Outcome,
}

impl<T> Trace<T> {
    /// Number of steps executed (one less than the number of recorded states).
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn halted(&self) -> bool {
        self.outcome == Outcome::Halted
    }

    pub fn last(&self) -> &T {
        self.states.last().expect("a trace always holds its initial state")
    }
}

/// Iterates `step` from `initial` until `halted` holds for the current state
/// or `max_steps` steps were taken.
pub(crate) fn iterate<T, E>(
    initial: T,
    max_steps: usize,
    mut halted: impl FnMut(&T) -> bool,
    mut step: impl FnMut(&T) -> Result<T, E>,
) -> Result<Trace<T>, E> {
    let mut states = vec![initial];
    loop {
        let current = states.last().expect("non-empty");
        if halted(current) {
            return Ok(Trace {
                states,
                outcome: Outcome::Halted,
            });
        }
        if states.len() > max_steps {
            return Ok(Trace {
                states,
                outcome: Outcome::Timeout,
            });
        }
        let next = step(current)?;
        states.push(next);
    }
}
