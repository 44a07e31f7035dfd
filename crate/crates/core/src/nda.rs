//! Nonlinear dynamical automaton: a piecewise affine map on a rectangular
//! partition of the unit square.
//!
//! Cell `(i, j)` collects the encoded configurations whose window is
//! `(X, q, Z)` with `i = γ_q(q)·n_s + γ_s(X)` and `j = γ_s(Z)`. Indices are
//! zero-based and ordered lexicographically by γ; exports say so in their
//! header. Intervals are left-closed, right-open.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::encode::SymbologramPoint;
use crate::gshift::Window;
use crate::machine::{Action, Move, Radix, State, Symbol, TuringMachine};
use crate::rational::{self, from_usize, Rational};
use crate::trace::{Outcome, Trace};

pub const CELL_ORDER: &str = "zero-based; i = gamma_q(q)*n_s + gamma_s(X), j = gamma_s(Z)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("point ({x}, {y}) lies outside [0,1)^2")]
pub struct OutOfRange {
    pub x: String,
    pub y: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
}

/// Rectangular partition with `n_q·n_s` x-intervals and `n_s` y-intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    radix: Radix,
    xi: Vec<Rational>,
    eta: Vec<Rational>,
}

impl Partition {
    pub fn new(radix: Radix) -> Self {
        let m = radix.n_q * radix.n_s;
        let xi = (0..m).map(|i| Rational::new(i.into(), m.into())).collect();
        let eta = (0..radix.n_s)
            .map(|j| Rational::new(j.into(), radix.n_s.into()))
            .collect();
        Self { radix, xi, eta }
    }

    pub fn radix(&self) -> Radix {
        self.radix
    }

    /// Left endpoints ξ_i of the x-intervals.
    pub fn xi(&self) -> &[Rational] {
        &self.xi
    }

    /// Left endpoints η_j of the y-intervals.
    pub fn eta(&self) -> &[Rational] {
        &self.eta
    }

    pub fn n_x(&self) -> usize {
        self.xi.len()
    }

    pub fn n_y(&self) -> usize {
        self.eta.len()
    }

    pub fn cell_count(&self) -> usize {
        self.n_x() * self.n_y()
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> {
        let (nx, ny) = (self.n_x(), self.n_y());
        (0..nx).flat_map(move |i| (0..ny).map(move |j| Cell { i, j }))
    }

    pub fn x_interval(&self, i: usize) -> (Rational, Rational) {
        (self.xi[i].clone(), self.upper(&self.xi, i))
    }

    pub fn y_interval(&self, j: usize) -> (Rational, Rational) {
        (self.eta[j].clone(), self.upper(&self.eta, j))
    }

    fn upper(&self, ends: &[Rational], k: usize) -> Rational {
        ends.get(k + 1).cloned().unwrap_or_else(Rational::one)
    }

    pub fn cell_of(&self, w: Window) -> Cell {
        Cell {
            i: w.state.0 * self.radix.n_s + w.left.0,
            j: w.head.0,
        }
    }

    pub fn window_of(&self, cell: Cell) -> Window {
        Window {
            left: Symbol(cell.i % self.radix.n_s),
            state: State(cell.i / self.radix.n_s),
            head: Symbol(cell.j),
        }
    }

    fn locate(ends: &[Rational], v: &Rational) -> usize {
        // last endpoint <= v
        ends.partition_point(|e| e <= v) - 1
    }

    /// Switching rule Θ.
    pub fn theta(&self, p: &SymbologramPoint) -> Result<Cell, OutOfRange> {
        if !rational::is_unit_interval_open(&p.x) || !rational::is_unit_interval_open(&p.y) {
            return Err(OutOfRange {
                x: rational::to_ratio_string(&p.x),
                y: rational::to_ratio_string(&p.y),
            });
        }
        Ok(Cell {
            i: Self::locate(&self.xi, &p.x),
            j: Self::locate(&self.eta, &p.y),
        })
    }
}

/// One affine branch `(x, y) ↦ (a_x + λ_x·x, a_y + λ_y·y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Branch {
    #[serde(with = "rational::serde_ratio")]
    pub a_x: Rational,
    #[serde(with = "rational::serde_ratio")]
    pub a_y: Rational,
    #[serde(with = "rational::serde_ratio")]
    pub lambda_x: Rational,
    #[serde(with = "rational::serde_ratio")]
    pub lambda_y: Rational,
    pub window: Window,
    /// The transition this branch encodes; `None` for halt cells.
    pub action: Option<Action>,
}

impl Branch {
    pub fn is_identity(&self) -> bool {
        self.a_x.is_zero() && self.a_y.is_zero() && self.lambda_x.is_one() && self.lambda_y.is_one()
    }

    pub fn apply(&self, p: &SymbologramPoint) -> SymbologramPoint {
        SymbologramPoint {
            x: &self.a_x + &self.lambda_x * &p.x,
            y: &self.a_y + &self.lambda_y * &p.y,
        }
    }

    pub fn to_f64(&self) -> [f64; 4] {
        [
            rational::to_f64(&self.a_x),
            rational::to_f64(&self.a_y),
            rational::to_f64(&self.lambda_x),
            rational::to_f64(&self.lambda_y),
        ]
    }
}

/// Closed-form branch parameters for the window `w` of machine `m`.
pub fn derive_branch(m: &TuringMachine, w: Window) -> Branch {
    let radix = m.radix();
    let nq = from_usize(radix.n_q);
    let ns = from_usize(radix.n_s);
    let g = |v: usize| from_usize(v);
    let (q, x, z) = (g(w.state.0), g(w.left.0), g(w.head.0));
    let action = m.delta(w.state, w.head);
    let (a_x, lambda_x, a_y, lambda_y) = match action {
        None => (Rational::zero(), Rational::one(), Rational::zero(), Rational::one()),
        Some(a) => {
            let (qn, b) = (g(a.next.0), g(a.write.0));
            match a.movement {
                Move::R => (
                    &qn / &nq + &b / (&nq * &ns) - &q / (&nq * &ns),
                    ns.recip(),
                    -z,
                    ns.clone(),
                ),
                Move::L => {
                    let ns2 = &ns * &ns;
                    (
                        &qn / &nq - &ns * &q / &nq - &x / &nq,
                        ns.clone(),
                        &x / &ns + &b / &ns2 - &z / &ns2,
                        ns.recip(),
                    )
                }
            }
        }
    };
    Branch {
        a_x,
        a_y,
        lambda_x,
        lambda_y,
        window: w,
        action,
    }
}

/// The automaton `(X, P, Φ)` compiled from a machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nda {
    partition: Partition,
    branches: Vec<Branch>,
    state_names: Vec<String>,
    symbol_names: Vec<String>,
}

impl Nda {
    pub fn build(m: &TuringMachine) -> Self {
        let partition = Partition::new(m.radix());
        let branches = partition
            .cells()
            .map(|c| derive_branch(m, partition.window_of(c)))
            .collect();
        Self {
            partition,
            branches,
            state_names: m.state_names().to_vec(),
            symbol_names: m.symbol_names().to_vec(),
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn radix(&self) -> Radix {
        self.partition.radix
    }

    pub fn branch(&self, cell: Cell) -> &Branch {
        &self.branches[cell.i * self.partition.n_y() + cell.j]
    }

    pub fn branches(&self) -> impl Iterator<Item = (Cell, &Branch)> {
        self.partition.cells().zip(self.branches.iter())
    }

    /// Replaces one branch. Used to inject faults when testing the
    /// cross-level comparison.
    pub fn with_branch(mut self, cell: Cell, branch: Branch) -> Self {
        let n_y = self.partition.n_y();
        self.branches[cell.i * n_y + cell.j] = branch;
        self
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn symbol_names(&self) -> &[String] {
        &self.symbol_names
    }

    /// Φ(p) = Φ^{Θ(p)}(p).
    pub fn step(&self, p: &SymbologramPoint) -> Result<SymbologramPoint, OutOfRange> {
        let cell = self.partition.theta(p)?;
        Ok(self.branch(cell).apply(p))
    }

    /// Iterates Φ until a fixed point or `max_steps`.
    pub fn run(&self, initial: SymbologramPoint, max_steps: usize) -> Result<Trace<SymbologramPoint>, OutOfRange> {
        let mut states = vec![initial];
        loop {
            let current = states.last().expect("non-empty");
            let next = self.step(current)?;
            if &next == current {
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
            states.push(next);
        }
    }

    /// Largest `a + λ` over every branch and both axes.
    pub fn max_excitation(&self) -> Rational {
        self.branches
            .iter()
            .flat_map(|b| [&b.a_x + &b.lambda_x, &b.a_y + &b.lambda_y])
            .max()
            .expect("a partition has at least one cell")
    }

    pub fn export(&self) -> NdaExport {
        let p = &self.partition;
        let name_q = |q: State| self.state_names[q.0].clone();
        let name_s = |s: Symbol| self.symbol_names[s.0].clone();
        NdaExport {
            cell_order: CELL_ORDER.to_string(),
            n_q: p.radix.n_q,
            n_s: p.radix.n_s,
            states: self.state_names.clone(),
            symbols: self.symbol_names.clone(),
            xi: p.xi.iter().map(rational::to_ratio_string).collect(),
            eta: p.eta.iter().map(rational::to_ratio_string).collect(),
            cells: self
                .branches()
                .map(|(cell, b)| CellExport {
                    i: cell.i,
                    j: cell.j,
                    triple: [
                        name_s(b.window.left),
                        name_q(b.window.state),
                        name_s(b.window.head),
                    ],
                    action: match b.action {
                        None => "halt".to_string(),
                        Some(a) => format!("{} {} {}", name_q(a.next), name_s(a.write), a.movement),
                    },
                    a_x: rational::to_ratio_string(&b.a_x),
                    a_y: rational::to_ratio_string(&b.a_y),
                    lambda_x: rational::to_ratio_string(&b.lambda_x),
                    lambda_y: rational::to_ratio_string(&b.lambda_y),
                })
                .collect(),
        }
    }

    /// Orbit CSV: `step,x,y,cell_i,cell_j` with rationals as `num/den`.
    pub fn orbit_csv(&self, orbit: &[SymbologramPoint]) -> String {
        let mut out = String::from("step,x,y,cell_i,cell_j\n");
        for (t, p) in orbit.iter().enumerate() {
            let (ci, cj) = match self.partition.theta(p) {
                Ok(c) => (c.i.to_string(), c.j.to_string()),
                Err(_) => (String::new(), String::new()),
            };
            out.push_str(&format!(
                "{t},{},{},{ci},{cj}\n",
                rational::to_ratio_string(&p.x),
                rational::to_ratio_string(&p.y)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NdaExport {
    pub cell_order: String,
    pub n_q: usize,
    pub n_s: usize,
    pub states: Vec<String>,
    pub symbols: Vec<String>,
    pub xi: Vec<String>,
    pub eta: Vec<String>,
    pub cells: Vec<CellExport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellExport {
    pub i: usize,
    pub j: usize,
    /// `[X, q, Z]`
    pub triple: [String; 3],
    pub action: String,
    pub a_x: String,
    pub a_y: String,
    pub lambda_x: String,
    pub lambda_y: String,
}
