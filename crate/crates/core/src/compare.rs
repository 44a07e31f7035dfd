//! Lockstep comparison of the four simulation levels.

use std::fmt;

use serde::Serialize;

use crate::encode::{encode, SymbologramPoint};
use crate::gshift::GeneralizedShift;
use crate::machine::{DottedSequence, StepError, TuringMachine};
use crate::nda::Nda;
use crate::network::{NetState, Network, NetworkError};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Tm,
    Gs,
    Nda,
    Net,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Tm => "tm",
            Level::Gs => "gs",
            Level::Nda => "nda",
            Level::Net => "net",
        })
    }
}

/// A machine compiled to every level.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub machine: TuringMachine,
    pub gshift: GeneralizedShift,
    pub nda: Nda,
    pub network: Network,
}

impl Pipeline {
    pub fn new(machine: TuringMachine) -> Result<Self, NetworkError> {
        let nda = Nda::build(&machine);
        Self::with_nda(machine, nda)
    }

    /// Builds the network from a caller-supplied NDA (e.g. one with an
    /// injected fault) instead of compiling the machine's own.
    pub fn with_nda(machine: TuringMachine, nda: Nda) -> Result<Self, NetworkError> {
        let gshift = GeneralizedShift::build(&machine);
        let network = Network::build(&nda)?;
        Ok(Self {
            machine,
            gshift,
            nda,
            network,
        })
    }
}

/// First disagreement between two levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub step: usize,
    pub levels: (Level, Level),
    pub left: String,
    pub right: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {}: {} = {} but {} = {}",
            self.step, self.levels.0, self.left, self.levels.1, self.right
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Agreement {
    /// Number of steps compared after the initial state.
    pub steps: usize,
    /// Whether the machine entered a halt state within the budget.
    pub halted: bool,
}

fn show_point(p: &SymbologramPoint) -> String {
    format!(
        "({}, {})",
        rational::to_ratio_string(&p.x),
        rational::to_ratio_string(&p.y)
    )
}

/// Runs all four levels from `initial` in lockstep for as many steps as the
/// machine takes (at most `max_steps`) and checks, at every step, that the
/// generalized shift reproduces the machine configuration and that the NDA
/// point and the network's MCL pair both equal its encoding.
pub fn compare_levels(p: &Pipeline, initial: &DottedSequence, max_steps: usize) -> Result<Agreement, Mismatch> {
    let radix = p.machine.radix();
    let tm = p
        .machine
        .run(initial.clone(), max_steps)
        .map_err(|e: StepError| Mismatch {
            step: 0,
            levels: (Level::Tm, Level::Tm),
            left: p.machine.render(initial),
            right: e.to_string(),
        })?;

    let mut gs = initial.clone();
    let mut point = Some(encode(radix, initial));
    let mut net = NetState::<Rational>::from_point(&p.network, &encode(radix, initial));

    for (t, c) in tm.states.iter().enumerate() {
        if t > 0 {
            gs = p.gshift.step(&gs);
            point = point.and_then(|q| p.nda.step(&q).ok());
            net = p.network.step(&net);
        }
        if &gs != c {
            return Err(Mismatch {
                step: t,
                levels: (Level::Tm, Level::Gs),
                left: p.machine.render(c),
                right: p.machine.render(&gs),
            });
        }
        let expected = encode(radix, c);
        let nda_point = match &point {
            Some(q) if q == &expected => q,
            other => {
                return Err(Mismatch {
                    step: t,
                    levels: (Level::Tm, Level::Nda),
                    left: show_point(&expected),
                    right: other
                        .as_ref()
                        .map_or_else(|| "point left the unit square".to_string(), show_point),
                })
            }
        };
        let net_point = net.point();
        if &net_point != nda_point {
            return Err(Mismatch {
                step: t,
                levels: (Level::Nda, Level::Net),
                left: show_point(nda_point),
                right: show_point(&net_point),
            });
        }
    }
    Ok(Agreement {
        steps: tm.steps(),
        halted: tm.halted(),
    })
}
