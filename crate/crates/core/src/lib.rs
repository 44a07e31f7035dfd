//! Compile Turing machines into generalized shifts, nonlinear dynamical
//! automata on the unit square and recurrent networks of Heaviside and ramp
//! units, and run every level with exact rational arithmetic.
//!
//! ```
//! use tm2net::{machine::parse_tm, Pipeline};
//!
//! let m = parse_tm("states: q0 h\nsymbols: _ a\ninput: a\nstart: q0\nhalt: h\n\
//!                   delta: q0 a -> q0 a R\ndelta: q0 _ -> h _ L\n").unwrap();
//! let pipeline = Pipeline::new(m).unwrap();
//! assert_eq!(pipeline.network.len(), 2 + 2 + 4 + 16 + 1);
//! ```

pub mod compare;
pub mod encode;
pub mod gshift;
pub mod machine;
pub mod nda;
pub mod network;
pub mod random;
pub mod rational;
pub mod trace;

pub use compare::{compare_levels, Level, Mismatch, Pipeline};
pub use encode::{decode, encode, SymbologramPoint};
pub use gshift::GeneralizedShift;
pub use machine::{parse_tm, DottedSequence, Move, Radix, State, Symbol, TuringMachine};
pub use nda::{Branch, Cell, Nda, Partition};
pub use network::{NetState, Network};
pub use rational::Rational;
pub use trace::{Outcome, Trace};
