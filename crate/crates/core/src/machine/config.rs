use serde::{Deserialize, Serialize};

use super::{State, Symbol, TuringMachine};

/// A machine configuration `α.β` split at the head.
///
/// `state` is the first symbol of the reversed left part α′, `left` holds
/// the remaining entries of α′ (nearest cell first) and `right` is β with
/// the scanned cell first. Both sides continue with implicit blanks;
/// trailing explicit blanks are always trimmed, so structural equality is
/// configuration equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DottedSequence {
    state: State,
    left: Vec<Symbol>,
    right: Vec<Symbol>,
}

fn trim_blanks(cells: &mut Vec<Symbol>) {
    while cells.last().is_some_and(|s| s.is_blank()) {
        cells.pop();
    }
}

impl DottedSequence {
    /// Builds a canonical configuration.
    pub fn new(state: State, left: Vec<Symbol>, right: Vec<Symbol>) -> Self {
        let mut c = Self { state, left, right };
        c.canonicalize();
        c
    }

    pub fn canonicalize(&mut self) {
        trim_blanks(&mut self.left);
        trim_blanks(&mut self.right);
    }

    pub fn canonicalized(mut self) -> Self {
        self.canonicalize();
        self
    }

    pub fn state(&self) -> State {
        self.state
    }

    /// α′ without its leading state symbol.
    pub fn left(&self) -> &[Symbol] {
        &self.left
    }

    /// β, scanned cell first.
    pub fn right(&self) -> &[Symbol] {
        &self.right
    }

    /// Symbol under the head (blank beyond the explicit list).
    pub fn head(&self) -> Symbol {
        self.right.first().copied().unwrap_or(Symbol::BLANK)
    }

    /// Left neighbour of the head.
    pub fn neighbour(&self) -> Symbol {
        self.left.first().copied().unwrap_or(Symbol::BLANK)
    }

    pub(crate) fn check(&self, m: &TuringMachine) -> Result<(), String> {
        if self.state.0 >= m.n_states() {
            return Err(format!("state index {} out of range", self.state.0));
        }
        if let Some(s) = self
            .left
            .iter()
            .chain(&self.right)
            .find(|s| s.0 >= m.n_symbols())
        {
            return Err(format!("symbol index {} out of range", s.0));
        }
        Ok(())
    }

    pub fn is_valid_for(&self, m: &TuringMachine) -> bool {
        self.check(m).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(state: usize, left: Vec<usize>, right: Vec<usize>) -> DottedSequence {
        DottedSequence {
            state: State(state),
            left: left.into_iter().map(Symbol).collect(),
            right: right.into_iter().map(Symbol).collect(),
        }
    }

    #[test]
    fn trailing_blanks_are_trimmed() {
        let c = raw(0, vec![1, 0, 0], vec![0, 2, 0]).canonicalized();
        assert_eq!(c.left(), &[Symbol(1)]);
        assert_eq!(c.right(), &[Symbol(0), Symbol(2)]);
        assert_eq!(c.head(), Symbol(0));
    }

    #[test]
    fn empty_sides_read_as_blank() {
        let c = DottedSequence::new(State(1), vec![], vec![]);
        assert_eq!(c.head(), Symbol::BLANK);
        assert_eq!(c.neighbour(), Symbol::BLANK);
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(
            q in 0usize..4,
            left in proptest::collection::vec(0usize..3, 0..8),
            right in proptest::collection::vec(0usize..3, 0..8),
        ) {
            let once = raw(q, left, right).canonicalized();
            let twice = once.clone().canonicalized();
            prop_assert_eq!(once, twice);
        }
    }
}
