//! Gödel encoding of dotted sequences onto the unit square.
//!
//! The left part α′ is encoded with one base-n_q digit (the state) followed
//! by base-n_s tape digits, each scaled by 1/n_q; the right part β is a plain
//! base-n_s expansion. Because the blank has γ_s = 0, every finitely
//! inhabited configuration encodes to a terminating expansion.
//!
//! Substitutions and shifts on one-sided sequences act affinely on their
//! codes; [`AffineMap`] and the `*_map` constructors expose that algebra.

use std::env;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{DottedSequence, Radix, State, Symbol};
use crate::rational::{self, from_usize, inv_pow, Rational};

/// Environment variable overriding the default decode digit bound.
pub const DIGIT_BOUND_ENV: &str = "TM2NET_DIGIT_BOUND";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("expansion of {value} does not terminate within {bound} digits")]
    NonTerminating { value: String, bound: usize },
    #[error("digit {digit} out of range for base {base} while decoding {value}")]
    DigitOutOfRange {
        value: String,
        digit: String,
        base: usize,
    },
}

/// A point `(ψ_x(α′), ψ_y(β))` of the symbologram.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbologramPoint {
    #[serde(with = "rational::serde_ratio")]
    pub x: Rational,
    #[serde(with = "rational::serde_ratio")]
    pub y: Rational,
}

impl SymbologramPoint {
    pub fn new(x: Rational, y: Rational) -> Self {
        Self { x, y }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (rational::to_f64(&self.x), rational::to_f64(&self.y))
    }
}

/// Plain Gödelization `Σ digit_k · base^-k` of a finite digit string.
pub fn godel(digits: &[usize], base: usize) -> Rational {
    // Horner from the least significant digit keeps the arithmetic integral.
    let mut numer = BigInt::zero();
    for &d in digits {
        numer = numer * base + d;
    }
    let denom = BigInt::from(base).pow(digits.len() as u32);
    Rational::new(numer, denom)
}

fn symbol_digits(cells: &[Symbol]) -> Vec<usize> {
    cells.iter().map(|s| s.0).collect()
}

/// ψ_x of α′ = `state` followed by `left`.
pub fn psi_x(radix: Radix, state: State, left: &[Symbol]) -> Rational {
    let tape = godel(&symbol_digits(left), radix.n_s);
    (from_usize(state.0) + tape) / from_usize(radix.n_q)
}

/// ψ_y of β.
pub fn psi_y(radix: Radix, right: &[Symbol]) -> Rational {
    godel(&symbol_digits(right), radix.n_s)
}

pub fn encode(radix: Radix, config: &DottedSequence) -> SymbologramPoint {
    SymbologramPoint {
        x: psi_x(radix, config.state(), config.left()),
        y: psi_y(radix, config.right()),
    }
}

/// Default number of digits tried before declaring an expansion infinite:
/// 64 per bit of the denominator.
pub fn default_digit_bound(value: &Rational) -> usize {
    (64 * rational::denominator_bits(value)) as usize
}

/// Digit bound from [`DIGIT_BOUND_ENV`] if set and valid.
pub fn digit_bound_from_env() -> Option<usize> {
    env::var(DIGIT_BOUND_ENV).ok()?.trim().parse().ok()
}

/// Extracts `value`'s digits in `base` greedily until the residue is 0.
fn expand(value: Rational, base: usize, bound: usize, original: &Rational) -> Result<Vec<usize>, DecodeError> {
    let base_r = from_usize(base);
    let mut residue = value;
    let mut digits = Vec::new();
    while !residue.is_zero() {
        if digits.len() >= bound {
            return Err(DecodeError::NonTerminating {
                value: rational::to_ratio_string(original),
                bound,
            });
        }
        let scaled = residue * &base_r;
        let digit = scaled.floor();
        residue = scaled - &digit;
        digits.push(digit_index(&digit, base, original)?);
    }
    Ok(digits)
}

fn digit_index(digit: &Rational, base: usize, original: &Rational) -> Result<usize, DecodeError> {
    let out_of_range = || DecodeError::DigitOutOfRange {
        value: rational::to_ratio_string(original),
        digit: rational::to_ratio_string(digit),
        base,
    };
    if digit.is_negative() {
        return Err(out_of_range());
    }
    match digit.to_integer().to_usize() {
        Some(d) if d < base => Ok(d),
        _ => Err(out_of_range()),
    }
}

/// Inverse of [`psi_x`]; `bound` defaults to [`default_digit_bound`].
pub fn decode_x(radix: Radix, x: &Rational, bound: Option<usize>) -> Result<(State, Vec<Symbol>), DecodeError> {
    let bound = bound.unwrap_or_else(|| default_digit_bound(x));
    let scaled = x * from_usize(radix.n_q);
    let lead = scaled.floor();
    let state = digit_index(&lead, radix.n_q, x)?;
    let tape = expand(scaled - lead, radix.n_s, bound, x)?;
    Ok((State(state), tape.into_iter().map(Symbol).collect()))
}

/// Inverse of [`psi_y`]; `bound` defaults to [`default_digit_bound`].
pub fn decode_y(radix: Radix, y: &Rational, bound: Option<usize>) -> Result<Vec<Symbol>, DecodeError> {
    let bound = bound.unwrap_or_else(|| default_digit_bound(y));
    if y.is_negative() || y >= &Rational::one() {
        let digit = (y * from_usize(radix.n_s)).floor();
        return Err(DecodeError::DigitOutOfRange {
            value: rational::to_ratio_string(y),
            digit: rational::to_ratio_string(&digit),
            base: radix.n_s,
        });
    }
    Ok(expand(y.clone(), radix.n_s, bound, y)?
        .into_iter()
        .map(Symbol)
        .collect())
}

pub fn decode(radix: Radix, point: &SymbologramPoint, bound: Option<usize>) -> Result<DottedSequence, DecodeError> {
    let (state, left) = decode_x(radix, &point.x, bound)?;
    let right = decode_y(radix, &point.y, bound)?;
    Ok(DottedSequence::new(state, left, right))
}

/// `v ↦ scale·v + offset` on exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineMap {
    #[serde(with = "rational::serde_ratio")]
    pub scale: Rational,
    #[serde(with = "rational::serde_ratio")]
    pub offset: Rational,
}

impl AffineMap {
    pub fn identity() -> Self {
        Self {
            scale: Rational::one(),
            offset: Rational::zero(),
        }
    }

    pub fn apply(&self, v: &Rational) -> Rational {
        &self.scale * v + &self.offset
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            scale: &other.scale * &self.scale,
            offset: &other.scale * &self.offset + &other.offset,
        }
    }
}

/// Map replacing digit `old` by `new` at 1-based `position` in base `base`.
pub fn substitute_map(position: u32, old: usize, new: usize, base: usize) -> AffineMap {
    AffineMap {
        scale: Rational::one(),
        offset: (from_usize(new) - from_usize(old)) * inv_pow(base, position),
    }
}

/// Map dropping the leading digit `first`: `v ↦ g·v − first`.
pub fn shift_left_map(first: usize, base: usize) -> AffineMap {
    AffineMap {
        scale: from_usize(base),
        offset: -from_usize(first),
    }
}

/// Map prepending digit `digit`: `v ↦ v/g + digit/g`.
pub fn shift_right_map(digit: usize, base: usize) -> AffineMap {
    AffineMap {
        scale: inv_pow(base, 1),
        offset: Rational::new(BigInt::from(digit), BigInt::from(base)),
    }
}

pub fn affine_substitute(v: &Rational, position: u32, old: usize, new: usize, base: usize) -> Rational {
    substitute_map(position, old, new, base).apply(v)
}

pub fn affine_shift_left(v: &Rational, first: usize, base: usize) -> Rational {
    shift_left_map(first, base).apply(v)
}

pub fn affine_shift_right(v: &Rational, digit: usize, base: usize) -> Rational {
    shift_right_map(digit, base).apply(v)
}

/// Leading digit of a code in `[0, 1)`.
pub fn leading_digit(v: &Rational, base: usize) -> usize {
    (v * from_usize(base))
        .floor()
        .to_integer()
        .mod_floor(&BigInt::from(base))
        .to_usize()
        .expect("digit fits in usize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    const FLIP: Radix = Radix { n_q: 2, n_s: 3 };
    const Q0: State = State(0);
    const QH: State = State(1);
    const ZERO: Symbol = Symbol(1);
    const ONE: Symbol = Symbol(2);

    #[test]
    fn psi_x_examples() {
        assert_eq!(psi_x(FLIP, Q0, &[]), int(0));
        assert_eq!(psi_x(FLIP, QH, &[]), ratio(1, 2));
        assert_eq!(psi_x(FLIP, Q0, &[ONE]), ratio(1, 3));
    }

    #[test]
    fn psi_y_examples() {
        assert_eq!(psi_y(FLIP, &[]), int(0));
        assert_eq!(psi_y(FLIP, &[ZERO, ONE]), ratio(5, 9));
        assert_eq!(psi_y(FLIP, &[ONE]), ratio(2, 3));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_x(FLIP, &ratio(1, 3), None).unwrap(), (Q0, vec![ONE]));
        assert_eq!(decode_x(FLIP, &int(0), None).unwrap(), (Q0, vec![]));
        assert_eq!(decode_y(FLIP, &ratio(5, 9), None).unwrap(), vec![ZERO, ONE]);
        assert_eq!(decode_y(FLIP, &int(0), None).unwrap(), vec![]);
        assert_eq!(decode_y(FLIP, &ratio(2, 3), None).unwrap(), vec![ONE]);
    }

    #[test]
    fn non_terminating_expansion() {
        assert!(matches!(
            decode_x(FLIP, &ratio(1, 7), None),
            Err(DecodeError::NonTerminating { .. })
        ));
        assert!(matches!(
            decode_y(FLIP, &ratio(1, 7), Some(5)),
            Err(DecodeError::NonTerminating { bound: 5, .. })
        ));
    }

    #[test]
    fn out_of_range_codes() {
        assert!(matches!(
            decode_x(FLIP, &int(1), None),
            Err(DecodeError::DigitOutOfRange { .. })
        ));
        assert!(matches!(
            decode_y(FLIP, &ratio(-1, 3), None),
            Err(DecodeError::DigitOutOfRange { .. })
        ));
    }

    #[test]
    fn affine_examples() {
        assert_eq!(affine_substitute(&ratio(1, 2), 1, 1, 0, 2), int(0));
        assert_eq!(affine_substitute(&int(0), 2, 0, 2, 3), ratio(2, 9));
        assert_eq!(affine_substitute(&ratio(5, 9), 1, 1, 2, 3), ratio(8, 9));
        assert_eq!(ratio(8, 9), psi_y(FLIP, &[ONE, ONE]));
        assert_eq!(affine_shift_left(&ratio(1, 2), 1, 2), int(0));
        assert_eq!(affine_shift_right(&int(0), 2, 3), ratio(2, 3));
    }

    #[test]
    fn composition_order() {
        let f = shift_left_map(1, 3).then(&shift_right_map(1, 3));
        assert_eq!(f, AffineMap::identity());
        let g = substitute_map(1, 0, 2, 3).then(&shift_left_map(2, 3));
        // 0.1 (base 3) -> 0.21 -> 0.1
        assert_eq!(g.apply(&ratio(1, 9)), ratio(1, 3));
    }

    #[test]
    fn leading_digits() {
        assert_eq!(leading_digit(&ratio(5, 9), 3), 1);
        assert_eq!(leading_digit(&int(0), 3), 0);
    }

    fn config() -> impl Strategy<Value = (Radix, DottedSequence)> {
        (1usize..6, 1usize..6).prop_flat_map(|(n_q, n_s)| {
            let sym = (0..n_s).prop_map(Symbol);
            (
                Just(Radix { n_q, n_s }),
                0..n_q,
                proptest::collection::vec(sym.clone(), 0..12),
                proptest::collection::vec(sym, 0..12),
            )
                .prop_map(|(r, q, l, rt)| (r, DottedSequence::new(State(q), l, rt)))
        })
    }

    proptest! {
        #[test]
        fn round_trip((radix, c) in config()) {
            let p = encode(radix, &c);
            prop_assert!(rational::is_unit_interval_open(&p.x));
            prop_assert!(rational::is_unit_interval_open(&p.y));
            prop_assert_eq!(decode(radix, &p, None).unwrap(), c);
        }

        #[test]
        fn shift_right_then_left_is_identity(v in 0i64..81, d in 0usize..3) {
            let v = ratio(v, 81);
            let moved = affine_shift_right(&v, d, 3);
            prop_assert_eq!(affine_shift_left(&moved, d, 3), v);
        }
    }
}
