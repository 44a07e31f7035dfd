//! First-order recurrent network of Heaviside and ramp units simulating an
//! NDA one machine step per iteration.
//!
//! Layers: two machine-configuration units (MCL) hold the encoded point,
//! threshold units (BSL) implement the switching rule, and one pair of ramp
//! units per cell (LTL) applies that cell's affine branch. A constant bias
//! unit supplies thresholds and offsets.
//!
//! Unit ids follow a fixed layout: `MCL_x, MCL_y`, then `BSL_x(0..n_q·n_s)`,
//! `BSL_y(0..n_s)`, then `LTL_x(c), LTL_y(c)` for every cell `c` in partition
//! order, and finally the bias unit.
//!
//! One call to [`Network::step`] sweeps the layers in order (BSL from MCL,
//! LTL from MCL and BSL, MCL from LTL), so one iteration is one machine step.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encode::{self, DecodeError, SymbologramPoint};
use crate::machine::{DottedSequence, Radix};
use crate::nda::{Cell, Nda, Partition, CELL_ORDER};
use crate::rational::{self, Rational};
use crate::trace::{Outcome, Trace};

/// Absolute per-coordinate tolerance of the float-mode halting test.
pub const FLOAT_HALT_TOLERANCE: f64 = 1e-9;

pub const MCL_X: usize = 0;
pub const MCL_Y: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("degenerate machine: max(a + lambda) = {0} is not positive")]
    Degenerate(String),
    #[error("malformed network document: {0}")]
    Malformed(String),
    #[error("inconsistent network: {0}")]
    Inconsistent(String),
    #[error("weight {from} -> {to} is {found}, architecture requires {expected}")]
    OffPermittedSet {
        from: usize,
        to: usize,
        expected: String,
        found: String,
    },
}

/// Total unit count `2 + n_s + n_s·n_q + 2·n_s²·n_q + 1`.
pub fn unit_count(radix: Radix) -> usize {
    let Radix { n_q, n_s } = radix;
    2 + n_s + n_s * n_q + 2 * n_s * n_s * n_q + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UnitBreakdown {
    pub mcl: usize,
    pub bsl_x: usize,
    pub bsl_y: usize,
    pub ltl: usize,
    pub bias: usize,
    pub total: usize,
}

impl UnitBreakdown {
    pub fn of(radix: Radix) -> Self {
        let Radix { n_q, n_s } = radix;
        let b = Self {
            mcl: 2,
            bsl_x: n_q * n_s,
            bsl_y: n_s,
            ltl: 2 * n_q * n_s * n_s,
            bias: 1,
            total: unit_count(radix),
        };
        debug_assert_eq!(b.mcl + b.bsl_x + b.bsl_y + b.ltl + b.bias, b.total);
        b
    }

    pub fn bsl(&self) -> usize {
        self.bsl_x + self.bsl_y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationFn {
    Heaviside,
    Ramp,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnitKind {
    MclX,
    MclY,
    BslX { index: usize, threshold: Rational },
    BslY { index: usize, threshold: Rational },
    LtlX { cell: Cell, lambda: Rational, offset: Rational },
    LtlY { cell: Cell, lambda: Rational, offset: Rational },
    Bias,
}

impl UnitKind {
    pub fn activation(&self) -> ActivationFn {
        match self {
            UnitKind::BslX { .. } | UnitKind::BslY { .. } => ActivationFn::Heaviside,
            UnitKind::Bias => ActivationFn::Constant,
            _ => ActivationFn::Ramp,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            UnitKind::MclX => "MCL_x",
            UnitKind::MclY => "MCL_y",
            UnitKind::BslX { .. } => "BSL_x",
            UnitKind::BslY { .. } => "BSL_y",
            UnitKind::LtlX { .. } => "LTL_x",
            UnitKind::LtlY { .. } => "LTL_y",
            UnitKind::Bias => "BIAS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub id: usize,
    pub kind: UnitKind,
}

/// Compiled network. Immutable once built.
#[derive(Clone)]
pub struct Network {
    radix: Radix,
    state_names: Vec<String>,
    symbol_names: Vec<String>,
    h: Rational,
    units: Vec<Unit>,
    // dense, row = source unit, column = target unit
    weights: Vec<Rational>,
    incoming: Vec<Vec<(usize, Rational)>>,
    incoming_f64: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.radix == other.radix
            && self.state_names == other.state_names
            && self.symbol_names == other.symbol_names
            && self.h == other.h
            && self.units == other.units
            && self.weights == other.weights
    }
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Network")
            .field("radix", &self.radix)
            .field("h", &rational::to_ratio_string(&self.h))
            .field("units", &self.units.len())
            .field("edges", &self.edge_count())
            .finish()
    }
}

/// Canonical unit list for `radix`, with parameters taken from `ltl_params`
/// (one `(λ_x, a_x, λ_y, a_y)` per cell in partition order).
fn layout(partition: &Partition, ltl_params: &[[Rational; 4]]) -> Vec<Unit> {
    let mut kinds = vec![UnitKind::MclX, UnitKind::MclY];
    kinds.extend(partition.xi().iter().enumerate().map(|(index, t)| UnitKind::BslX {
        index,
        threshold: t.clone(),
    }));
    kinds.extend(partition.eta().iter().enumerate().map(|(index, t)| UnitKind::BslY {
        index,
        threshold: t.clone(),
    }));
    for (cell, [lx, ax, ly, ay]) in partition.cells().zip(ltl_params) {
        kinds.push(UnitKind::LtlX {
            cell,
            lambda: lx.clone(),
            offset: ax.clone(),
        });
        kinds.push(UnitKind::LtlY {
            cell,
            lambda: ly.clone(),
            offset: ay.clone(),
        });
    }
    kinds.push(UnitKind::Bias);
    kinds
        .into_iter()
        .enumerate()
        .map(|(id, kind)| Unit { id, kind })
        .collect()
}

impl Network {
    /// Compiles an NDA, choosing the smallest inhibition `h = 2·max(a + λ)`.
    pub fn build(nda: &Nda) -> Result<Self, NetworkError> {
        let max = nda.max_excitation();
        if !max.is_positive() {
            return Err(NetworkError::Degenerate(rational::to_ratio_string(&max)));
        }
        let h = max * rational::int(2);
        let params: Vec<[Rational; 4]> = nda
            .branches()
            .map(|(_, b)| {
                [
                    b.lambda_x.clone(),
                    b.a_x.clone(),
                    b.lambda_y.clone(),
                    b.a_y.clone(),
                ]
            })
            .collect();
        let units = layout(nda.partition(), &params);
        Ok(Self::assemble(
            nda.radix(),
            nda.state_names().to_vec(),
            nda.symbol_names().to_vec(),
            h,
            units,
        ))
    }

    fn assemble(
        radix: Radix,
        state_names: Vec<String>,
        symbol_names: Vec<String>,
        h: Rational,
        units: Vec<Unit>,
    ) -> Self {
        let n = units.len();
        let m = radix.n_q * radix.n_s;
        let n_y = radix.n_s;
        let bsl_x = |i: usize| 2 + i;
        let bsl_y = |j: usize| 2 + m + j;
        let bias = n - 1;
        let half = &h / rational::int(2);
        let mut weights = vec![Rational::zero(); n * n];
        let mut set = |from: usize, to: usize, w: Rational| weights[from * n + to] = w;

        for u in &units {
            match &u.kind {
                UnitKind::BslX { threshold, .. } => {
                    set(MCL_X, u.id, Rational::one());
                    set(bias, u.id, -threshold.clone());
                }
                UnitKind::BslY { threshold, .. } => {
                    set(MCL_Y, u.id, Rational::one());
                    set(bias, u.id, -threshold.clone());
                }
                UnitKind::LtlX { cell, lambda, offset } | UnitKind::LtlY { cell, lambda, offset } => {
                    let mcl = match u.kind {
                        UnitKind::LtlX { .. } => MCL_X,
                        _ => MCL_Y,
                    };
                    set(mcl, u.id, lambda.clone());
                    set(bias, u.id, offset - &h);
                    set(bsl_x(cell.i), u.id, half.clone());
                    if cell.i + 1 < m {
                        set(bsl_x(cell.i + 1), u.id, -half.clone());
                    }
                    set(bsl_y(cell.j), u.id, half.clone());
                    if cell.j + 1 < n_y {
                        set(bsl_y(cell.j + 1), u.id, -half.clone());
                    }
                    set(u.id, mcl, Rational::one());
                }
                UnitKind::MclX | UnitKind::MclY | UnitKind::Bias => {}
            }
        }

        let mut incoming = vec![Vec::new(); n];
        for from in 0..n {
            for to in 0..n {
                let w = &weights[from * n + to];
                if !w.is_zero() {
                    incoming[to].push((from, w.clone()));
                }
            }
        }
        let incoming_f64 = incoming
            .iter()
            .map(|row| row.iter().map(|(s, w)| (*s, rational::to_f64(w))).collect())
            .collect();

        Self {
            radix,
            state_names,
            symbol_names,
            h,
            units,
            weights,
            incoming,
            incoming_f64,
        }
    }

    pub fn radix(&self) -> Radix {
        self.radix
    }

    pub fn h(&self) -> &Rational {
        &self.h
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn symbol_names(&self) -> &[String] {
        &self.symbol_names
    }

    pub fn breakdown(&self) -> UnitBreakdown {
        UnitBreakdown::of(self.radix)
    }

    /// Weight on the edge `from -> to` (zero when absent).
    pub fn weight(&self, from: usize, to: usize) -> &Rational {
        &self.weights[from * self.len() + to]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        let n = self.len();
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(move |(k, w)| (k / n, k % n, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Distinct non-zero weight values.
    pub fn weight_values(&self) -> BTreeSet<Rational> {
        self.edges().map(|(_, _, w)| w.clone()).collect()
    }

    pub fn bias(&self) -> usize {
        self.len() - 1
    }

    fn m(&self) -> usize {
        self.radix.n_q * self.radix.n_s
    }

    pub fn bsl_x_range(&self) -> Range<usize> {
        2..2 + self.m()
    }

    pub fn bsl_y_range(&self) -> Range<usize> {
        let s = 2 + self.m();
        s..s + self.radix.n_s
    }

    pub fn ltl_range(&self) -> Range<usize> {
        let s = 2 + self.m() + self.radix.n_s;
        s..self.bias()
    }

    /// Ids of the `(LTL_x, LTL_y)` pair of `cell`.
    pub fn ltl_pair(&self, cell: Cell) -> (usize, usize) {
        let k = cell.i * self.radix.n_s + cell.j;
        let base = self.ltl_range().start + 2 * k;
        (base, base + 1)
    }

    pub fn partition(&self) -> Partition {
        Partition::new(self.radix)
    }

    fn net_input<T: Activation>(incoming: &[(usize, T)], act: &[T]) -> T {
        let mut sum = T::rest();
        for (src, w) in incoming {
            if !act[*src].is_silent() {
                T::mul_add(&mut sum, w, &act[*src]);
            }
        }
        sum
    }

    /// One iteration ζ: BSL, then LTL, then MCL.
    pub fn step<T: Activation>(&self, s: &NetState<T>) -> NetState<T> {
        let inc = T::incoming(self);
        let mut act = s.activations.clone();
        for id in self.bsl_x_range().chain(self.bsl_y_range()) {
            act[id] = T::heaviside(&Self::net_input(&inc[id], &act));
        }
        for id in self.ltl_range() {
            act[id] = T::ramp(Self::net_input(&inc[id], &act));
        }
        for id in [MCL_X, MCL_Y] {
            act[id] = T::ramp(Self::net_input(&inc[id], &act));
        }
        NetState { activations: act }
    }

    /// Fixed-point halting test: one iteration leaves the MCL pair unchanged.
    pub fn is_halted<T: Activation>(&self, s: &NetState<T>) -> bool {
        s.same_mcl(&self.step(s))
    }

    /// Iterates until the MCL pair is a fixed point or `max_steps` steps.
    pub fn run<T: Activation>(&self, initial: NetState<T>, max_steps: usize) -> Trace<NetState<T>> {
        let mut states = vec![initial];
        loop {
            let current = states.last().expect("non-empty");
            let next = self.step(current);
            if current.same_mcl(&next) {
                return Trace {
                    states,
                    outcome: Outcome::Halted,
                };
            }
            if states.len() > max_steps {
                return Trace {
                    states,
                    outcome: Outcome::Timeout,
                };
            }
            states.push(next);
        }
    }

    /// `B_x^i + B_y^j` received by the LTL pair of `cell` in state `s`.
    pub fn drive<T: Activation>(&self, s: &NetState<T>, cell: Cell) -> T {
        let (tx, _) = self.ltl_pair(cell);
        let bsl = self.bsl_x_range().start..self.bsl_y_range().end;
        let mut sum = T::rest();
        for (src, w) in &T::incoming(self)[tx] {
            if bsl.contains(src) {
                T::mul_add(&mut sum, w, &s.activations[*src]);
            }
        }
        sum
    }

    /// Cell selected by the BSL staircase of `s`; `None` before the first
    /// iteration (BSL all silent).
    pub fn selected_cell<T: Activation>(&self, s: &NetState<T>) -> Option<Cell> {
        let count = |r: Range<usize>| r.filter(|&id| !s.activations[id].is_silent()).count();
        let (cx, cy) = (count(self.bsl_x_range()), count(self.bsl_y_range()));
        (cx > 0 && cy > 0).then(|| Cell { i: cx - 1, j: cy - 1 })
    }

    /// Cells whose LTL pair has a strictly positive unit.
    pub fn active_cells<T: Activation>(&self, s: &NetState<T>) -> Vec<Cell> {
        self.partition()
            .cells()
            .filter(|&c| {
                let (tx, ty) = self.ltl_pair(c);
                s.activations[tx].is_active() || s.activations[ty].is_active()
            })
            .collect()
    }

    pub fn decode(&self, s: &NetState<Rational>, bound: Option<usize>) -> Result<DottedSequence, DecodeError> {
        encode::decode(self.radix, &s.point(), bound)
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            meta: Meta {
                n_q: self.radix.n_q,
                n_s: self.radix.n_s,
                h: rational::to_ratio_string(&self.h),
                states: self.state_names.clone(),
                symbols: self.symbol_names.clone(),
                cell_order: CELL_ORDER.to_string(),
            },
            units: self.units.iter().map(UnitDoc::from_unit).collect(),
            weights: self
                .edges()
                .map(|(from, to, w)| WeightDoc {
                    from,
                    to,
                    value: rational::to_ratio_string(w),
                })
                .collect(),
        }
    }

    pub fn export_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network document serializes")
    }

    pub fn import_json(text: &str) -> Result<Self, NetworkError> {
        let doc: NetworkDocument =
            serde_json::from_str(text).map_err(|e| NetworkError::Malformed(e.to_string()))?;
        Self::from_document(doc)
    }

    /// Validates a document against the architecture and rebuilds the network.
    pub fn from_document(doc: NetworkDocument) -> Result<Self, NetworkError> {
        let inconsistent = |msg: String| NetworkError::Inconsistent(msg);
        let parse = |s: &str| {
            rational::parse_ratio(s).map_err(|e| NetworkError::Malformed(e.to_string()))
        };
        let Meta {
            n_q,
            n_s,
            h,
            states,
            symbols,
            ..
        } = doc.meta;
        if n_q == 0 || n_s == 0 {
            return Err(inconsistent("n_q and n_s must be positive".into()));
        }
        if states.len() != n_q || symbols.len() != n_s {
            return Err(inconsistent(format!(
                "name tables have {} states / {} symbols, meta says {n_q} / {n_s}",
                states.len(),
                symbols.len()
            )));
        }
        let radix = Radix { n_q, n_s };
        let h = parse(&h)?;

        let expected = UnitBreakdown::of(radix);
        let count = |label: &str| doc.units.iter().filter(|u| u.kind == label).count();
        let counts = [
            ("MCL_x", count("MCL_x") + count("MCL_y"), expected.mcl),
            ("BSL_x", count("BSL_x"), expected.bsl_x),
            ("BSL_y", count("BSL_y"), expected.bsl_y),
            ("LTL", count("LTL_x") + count("LTL_y"), expected.ltl),
            ("BIAS", count("BIAS"), expected.bias),
        ];
        for (layer, found, want) in counts {
            if found != want {
                let layer = layer.split('_').next().unwrap_or(layer);
                return Err(inconsistent(format!(
                    "{found} {layer} units, architecture requires {want} for (n_q, n_s) = ({n_q}, {n_s})"
                )));
            }
        }
        if doc.units.len() != expected.total {
            return Err(inconsistent(format!(
                "{} units, architecture requires {}",
                doc.units.len(),
                expected.total
            )));
        }

        let partition = Partition::new(radix);
        let mut params = Vec::with_capacity(partition.cell_count());
        let ltl_start = 2 + partition.n_x() + partition.n_y();
        for (k, cell) in partition.cells().enumerate() {
            let ux = &doc.units[ltl_start + 2 * k];
            let uy = &doc.units[ltl_start + 2 * k + 1];
            let get = |u: &UnitDoc, f: &Option<String>, what: &str| -> Result<Rational, NetworkError> {
                f.as_deref()
                    .ok_or_else(|| inconsistent(format!("unit {} lacks `{what}`", u.id)))
                    .and_then(parse)
            };
            for u in [ux, uy] {
                if u.params.i != Some(cell.i) || u.params.j != Some(cell.j) {
                    return Err(inconsistent(format!(
                        "unit {} should be an LTL unit of cell ({}, {})",
                        u.id, cell.i, cell.j
                    )));
                }
            }
            params.push([
                get(ux, &ux.params.lambda, "lambda")?,
                get(ux, &ux.params.a, "a")?,
                get(uy, &uy.params.lambda, "lambda")?,
                get(uy, &uy.params.a, "a")?,
            ]);
        }
        let units = layout(&partition, &params);
        for (u, d) in units.iter().zip(&doc.units) {
            let want = UnitDoc::from_unit(u);
            if d.id != u.id || d.kind != want.kind || d.activation != want.activation {
                return Err(inconsistent(format!(
                    "unit at position {} is {} #{} ({:?}), layout requires {} #{}",
                    u.id, d.kind, d.id, d.activation, want.kind, u.id
                )));
            }
            if let UnitKind::BslX { index, threshold } | UnitKind::BslY { index, threshold } = &u.kind {
                let given = d.params.threshold.as_deref().map(parse).transpose()?;
                if d.params.index != Some(*index) || given.as_ref() != Some(threshold) {
                    return Err(inconsistent(format!(
                        "unit {} must be BSL index {index} with threshold {}",
                        u.id,
                        rational::to_ratio_string(threshold)
                    )));
                }
            }
        }

        let max = params
            .iter()
            .flat_map(|[lx, ax, ly, ay]| [lx + ax, ly + ay])
            .max()
            .expect("at least one cell");
        if &h / rational::int(2) < max {
            return Err(inconsistent(format!(
                "h = {} violates h/2 >= max(a + lambda) = {}",
                rational::to_ratio_string(&h),
                rational::to_ratio_string(&max)
            )));
        }

        let net = Self::assemble(radix, states, symbols, h, units);
        let n = net.len();
        let mut given = vec![Rational::zero(); n * n];
        for w in &doc.weights {
            if w.from >= n || w.to >= n {
                return Err(inconsistent(format!("edge {} -> {} out of range", w.from, w.to)));
            }
            given[w.from * n + w.to] = parse(&w.value)?;
        }
        for (k, (found, want)) in given.iter().zip(&net.weights).enumerate() {
            if found != want {
                return Err(NetworkError::OffPermittedSet {
                    from: k / n,
                    to: k % n,
                    expected: rational::to_ratio_string(want),
                    found: rational::to_ratio_string(found),
                });
            }
        }
        Ok(net)
    }
}

/// Scalar type of a simulation: exact rationals or `f64`.
pub trait Activation: Clone + PartialEq + fmt::Debug {
    /// Resting activation (0).
    fn rest() -> Self;
    /// Full activation (1).
    fn on() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn incoming(net: &Network) -> &[Vec<(usize, Self)>];
    fn mul_add(acc: &mut Self, w: &Self, x: &Self);
    fn heaviside(x: &Self) -> Self;
    fn ramp(x: Self) -> Self;
    fn is_silent(&self) -> bool;
    fn is_active(&self) -> bool;
    /// Equality used by the halting test.
    fn same(a: &Self, b: &Self) -> bool;
}

impl Activation for Rational {
    fn rest() -> Self {
        Zero::zero()
    }

    fn on() -> Self {
        One::one()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn incoming(net: &Network) -> &[Vec<(usize, Self)>] {
        &net.incoming
    }

    fn mul_add(acc: &mut Self, w: &Self, x: &Self) {
        if x.is_one() {
            *acc += w;
        } else {
            *acc += w * x;
        }
    }

    fn heaviside(x: &Self) -> Self {
        if x.is_negative() {
            Zero::zero()
        } else {
            One::one()
        }
    }

    fn ramp(x: Self) -> Self {
        if x.is_negative() {
            Zero::zero()
        } else {
            x
        }
    }

    fn is_silent(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_active(&self) -> bool {
        Signed::is_positive(self)
    }

    fn same(a: &Self, b: &Self) -> bool {
        a == b
    }
}

impl Activation for f64 {
    fn rest() -> Self {
        0.0
    }

    fn on() -> Self {
        1.0
    }

    fn from_rational(r: &Rational) -> Self {
        rational::to_f64(r)
    }

    fn incoming(net: &Network) -> &[Vec<(usize, Self)>] {
        &net.incoming_f64
    }

    fn mul_add(acc: &mut Self, w: &Self, x: &Self) {
        *acc += w * x;
    }

    fn heaviside(x: &Self) -> Self {
        if *x >= 0.0 {
            1.0
        } else {
            0.0
        }
    }

    fn ramp(x: Self) -> Self {
        if x >= 0.0 {
            x
        } else {
            0.0
        }
    }

    fn is_silent(&self) -> bool {
        *self == 0.0
    }

    fn is_active(&self) -> bool {
        *self > 0.0
    }

    fn same(a: &Self, b: &Self) -> bool {
        (a - b).abs() <= FLOAT_HALT_TOLERANCE
    }
}

/// Activations of every unit; the bias unit is pinned to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NetState<T> {
    activations: Vec<T>,
}

impl<T: Activation> NetState<T> {
    /// MCL set to `point`, BSL and LTL silent.
    pub fn from_point(net: &Network, point: &SymbologramPoint) -> Self {
        let mut activations = vec![T::rest(); net.len()];
        activations[MCL_X] = T::from_rational(&point.x);
        activations[MCL_Y] = T::from_rational(&point.y);
        activations[net.bias()] = T::on();
        Self { activations }
    }

    pub fn activations(&self) -> &[T] {
        &self.activations
    }

    pub fn mcl(&self) -> (&T, &T) {
        (&self.activations[MCL_X], &self.activations[MCL_Y])
    }

    pub fn same_mcl(&self, other: &Self) -> bool {
        T::same(&self.activations[MCL_X], &other.activations[MCL_X])
            && T::same(&self.activations[MCL_Y], &other.activations[MCL_Y])
    }

    /// Test hook: overwrite one activation.
    pub fn set(&mut self, id: usize, value: T) {
        self.activations[id] = value;
    }
}

impl NetState<Rational> {
    pub fn point(&self) -> SymbologramPoint {
        SymbologramPoint::new(self.activations[MCL_X].clone(), self.activations[MCL_Y].clone())
    }
}

/// First step at which a float run leaves the exact run: the float MCL pair
/// differs from the correctly rounded exact pair, or one run has ended.
pub fn first_divergence(exact: &Trace<NetState<Rational>>, float: &Trace<NetState<f64>>) -> Option<usize> {
    let n = exact.states.len().max(float.states.len());
    (0..n).find(|&t| match (exact.states.get(t), float.states.get(t)) {
        (Some(e), Some(f)) => {
            let (ex, ey) = e.point().to_f64();
            let (fx, fy) = f.mcl();
            ex.to_bits() != fx.to_bits() || ey.to_bits() != fy.to_bits()
        }
        _ => true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub meta: Meta,
    pub units: Vec<UnitDoc>,
    pub weights: Vec<WeightDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub n_q: usize,
    pub n_s: usize,
    pub h: String,
    pub states: Vec<String>,
    pub symbols: Vec<String>,
    #[serde(default)]
    pub cell_order: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitDoc {
    pub id: usize,
    pub kind: String,
    pub activation: ActivationFn,
    #[serde(default)]
    pub params: UnitParams,
}

/// Kind-specific parameters: BSL units carry `index` and `threshold`, LTL
/// units carry their cell and affine coefficients.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
}

impl UnitDoc {
    fn from_unit(u: &Unit) -> Self {
        let mut params = UnitParams::default();
        match &u.kind {
            UnitKind::BslX { index, threshold } | UnitKind::BslY { index, threshold } => {
                params.index = Some(*index);
                params.threshold = Some(rational::to_ratio_string(threshold));
            }
            UnitKind::LtlX { cell, lambda, offset } | UnitKind::LtlY { cell, lambda, offset } => {
                params.i = Some(cell.i);
                params.j = Some(cell.j);
                params.lambda = Some(rational::to_ratio_string(lambda));
                params.a = Some(rational::to_ratio_string(offset));
            }
            UnitKind::MclX | UnitKind::MclY | UnitKind::Bias => {}
        }
        UnitDoc {
            id: u.id,
            kind: u.kind.label().to_string(),
            activation: u.kind.activation(),
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDoc {
    pub from: usize,
    pub to: usize,
    pub value: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::encode;
    use crate::machine::tests::flip;
    use crate::machine::{DottedSequence, State, Symbol};
    use crate::rational::{int, ratio};

    fn flip_net() -> Network {
        Network::build(&Nda::build(&flip())).unwrap()
    }

    #[test]
    fn eq18_counts() {
        assert_eq!(unit_count(Radix { n_q: 7, n_s: 4 }), 259);
        assert_eq!(unit_count(Radix { n_q: 2, n_s: 3 }), 48);
        let net = flip_net();
        assert_eq!(net.len(), 48);
        let b = net.breakdown();
        assert_eq!((b.mcl, b.bsl(), b.ltl, b.bias), (2, 9, 36, 1));
    }

    #[test]
    fn bsl_thresholds_are_partition_endpoints() {
        let net = flip_net();
        let thresholds: Vec<Rational> = net.bsl_x_range().map(|id| -net.weight(net.bias(), id).clone()).collect();
        assert_eq!(thresholds, (0..6).map(|k| ratio(k, 6)).collect::<Vec<_>>());
        for id in net.bsl_x_range() {
            assert_eq!(net.weight(MCL_X, id), &int(1));
        }
    }

    #[test]
    fn h_is_minimal_inhibition() {
        let nda = Nda::build(&flip());
        let net = Network::build(&nda).unwrap();
        // largest a + λ: the left move out of (⊔, q0, ⊔), a_x = 1/2, λ_x = 3
        assert_eq!(net.h(), &(nda.max_excitation() * int(2)));
        assert_eq!(net.h(), &int(7));
    }

    #[test]
    fn weights_come_from_the_permitted_set() {
        let nda = Nda::build(&flip());
        let net = Network::build(&nda).unwrap();
        let h = net.h().clone();
        let mut permitted: BTreeSet<Rational> = [int(1), &h / int(2), -&h / int(2)].into_iter().collect();
        for (_, b) in nda.branches() {
            permitted.extend([b.lambda_x.clone(), b.lambda_y.clone(), &b.a_x - &h, &b.a_y - &h]);
        }
        let p = nda.partition();
        permitted.extend(p.xi().iter().chain(p.eta()).map(|v| -v.clone()));
        for w in net.weight_values() {
            assert!(permitted.contains(&w), "{w} not permitted");
        }
    }

    #[test]
    fn single_step_matches_nda() {
        let net = flip_net();
        let s0 = NetState::<Rational>::from_point(&net, &SymbologramPoint::new(int(0), ratio(5, 9)));
        let s1 = net.step(&s0);
        assert_eq!(s1.point(), SymbologramPoint::new(ratio(1, 3), ratio(2, 3)));
        assert_eq!(net.active_cells(&s1).len(), 1);
        assert_eq!(net.selected_cell(&s1), Some(Cell { i: 0, j: 1 }));
    }

    #[test]
    fn drive_trichotomy_on_first_step() {
        let net = flip_net();
        let s0 = NetState::<Rational>::from_point(&net, &SymbologramPoint::new(int(0), ratio(5, 9)));
        let s1 = net.step(&s0);
        let selected = Cell { i: 0, j: 1 };
        let h = net.h().clone();
        for cell in net.partition().cells() {
            let d = net.drive(&s1, cell);
            let expected = match (cell.i == selected.i, cell.j == selected.j) {
                (true, true) => h.clone(),
                (false, false) => int(0),
                _ => &h / int(2),
            };
            assert_eq!(d, expected, "cell {cell:?}");
        }
    }

    #[test]
    fn halted_point_is_fixed() {
        let m = flip();
        let net = flip_net();
        let halted = encode(m.radix(), &DottedSequence::new(State(1), vec![Symbol(2)], vec![Symbol(1)]));
        let s = NetState::<Rational>::from_point(&net, &halted);
        assert!(net.is_halted(&s));
        let s0 = NetState::<Rational>::from_point(&net, &SymbologramPoint::new(int(0), ratio(5, 9)));
        assert!(!net.is_halted(&s0));
    }

    #[test]
    fn flip_run_reaches_fixed_point_in_three_steps() {
        let m = flip();
        let net = flip_net();
        let c0 = m.initial_config(&[Symbol(1), Symbol(2)]).unwrap();
        let trace = net.run(NetState::<Rational>::from_point(&net, &encode(m.radix(), &c0)), 10);
        assert!(trace.halted());
        assert_eq!(trace.steps(), 3);
        let tm = m.run(c0, 10).unwrap();
        for (s, c) in trace.states.iter().zip(&tm.states) {
            assert_eq!(s.point(), encode(m.radix(), c));
            assert_eq!(&net.decode(s, None).unwrap(), c);
        }
        let empty = net.run(trace.states[0].clone(), 0);
        assert_eq!(empty.states.len(), 1);
    }

    #[test]
    fn float_mode_follows_the_same_cells_on_short_input() {
        let net = flip_net();
        let p = SymbologramPoint::new(int(0), ratio(5, 9));
        let exact = net.run(NetState::<Rational>::from_point(&net, &p), 10);
        let float = net.run(NetState::<f64>::from_point(&net, &p), 10);
        assert_eq!(exact.steps(), float.steps());
        assert!(float.halted());
    }

    #[test]
    fn document_round_trip() {
        let net = flip_net();
        let json = net.export_json();
        let doc: NetworkDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(doc.units.len(), 48);
        assert_eq!(doc.meta.h, "7/1");
        let back = Network::import_json(&json).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.h(), net.h());
    }

    #[test]
    fn import_rejects_extra_mcl_unit() {
        let net = flip_net();
        let mut doc = net.to_document();
        let mut extra = doc.units[0].clone();
        extra.id = doc.units.len();
        doc.units.push(extra);
        let err = Network::from_document(doc).unwrap_err();
        assert!(matches!(&err, NetworkError::Inconsistent(msg) if msg.contains("3 MCL")), "{err}");
    }

    #[test]
    fn import_rejects_tampered_weight() {
        let net = flip_net();
        let mut doc = net.to_document();
        doc.weights[0].value = "7/3".into();
        assert!(matches!(
            Network::from_document(doc),
            Err(NetworkError::OffPermittedSet { .. })
        ));
        let mut doc = net.to_document();
        doc.weights.push(WeightDoc { from: MCL_X, to: MCL_Y, value: "1/1".into() });
        assert!(matches!(
            Network::from_document(doc),
            Err(NetworkError::OffPermittedSet { from: 0, to: 1, .. })
        ));
    }

    #[test]
    fn import_rejects_weak_inhibition_and_garbage() {
        let net = flip_net();
        let mut doc = net.to_document();
        doc.meta.h = "1/1".into();
        assert!(matches!(Network::from_document(doc), Err(NetworkError::Inconsistent(_))));
        assert!(matches!(Network::import_json("{"), Err(NetworkError::Malformed(_))));
    }
}
