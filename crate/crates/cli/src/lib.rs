//! Command implementations behind the `tm2net` binary.
//!
//! Every command writes to a caller-supplied sink and returns a [`CliError`]
//! carrying the process exit code, so the commands can be driven from tests
//! without spawning a process.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use tm2net::compare::{compare_levels, Agreement, Mismatch, Pipeline};
use tm2net::encode::{self, encode, SymbologramPoint};
use tm2net::machine::{DottedSequence, Symbol, TuringMachine};
use tm2net::network::{first_divergence, NetState, Network};
use tm2net::rational::{self, Rational};
use tm2net::trace::Trace;
use tm2net::{parse_tm, GeneralizedShift, Nda};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    /// 1 input error, 2 I/O failure, 3 cross-level mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Io(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn sink_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "tm2net", version, about = "Compile Turing machines into recurrent networks and run every level")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Gs,
    Nda,
    Net,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelArg {
    Tm,
    Gs,
    Nda,
    Net,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the generalized shift table, NDA or network for a machine
    Compile {
        machine: PathBuf,
        #[arg(long, value_enum, default_value = "net")]
        target: Target,
        /// Output file (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one level from the machine's start configuration
    Run {
        machine: PathBuf,
        /// Input word: whitespace-separated symbol names, or one character per symbol
        #[arg(default_value = "")]
        input: String,
        #[arg(long, value_enum, default_value = "tm")]
        level: LevelArg,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        /// Write the per-step trace here
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run all four levels in lockstep and check they agree at every step
    Compare {
        machine: PathBuf,
        #[arg(default_value = "")]
        input: String,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
    },
    /// Print alphabet sizes, unit counts and the inhibition bias
    Info { machine: PathBuf },
}

pub fn load_machine(path: &Path) -> Result<TuringMachine, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_tm(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Splits an input word into symbols. Whitespace-separated tokens are symbol
/// names; a token that is not a symbol name is read one character at a time.
pub fn parse_input(m: &TuringMachine, word: &str) -> Result<Vec<Symbol>, CliError> {
    let mut names: Vec<String> = Vec::new();
    for token in word.split_whitespace() {
        if m.symbol_by_name(token).is_some() {
            names.push(token.to_string());
        } else {
            names.extend(token.chars().map(String::from));
        }
    }
    m.input_from_names(&names)
        .map_err(|e| CliError::Input(e.to_string()))
}

fn pipeline(m: TuringMachine) -> Result<Pipeline, CliError> {
    Pipeline::new(m).map_err(|e| CliError::Input(e.to_string()))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| io_err(p, e)),
        None => out.write_all(body.as_bytes()).map_err(sink_err),
    }
}

pub fn cmd_compile(out: &mut dyn Write, machine: &Path, target: Target, dest: Option<&Path>) -> Result<(), CliError> {
    let m = load_machine(machine)?;
    match target {
        Target::Gs => emit(out, dest, &GeneralizedShift::build(&m).to_tsv()),
        Target::Nda => {
            let doc = serde_json::to_string_pretty(&Nda::build(&m).export()).expect("serializable");
            emit(out, dest, &(doc + "\n"))
        }
        Target::Net => {
            let net = Network::build(&Nda::build(&m)).map_err(|e| CliError::Input(e.to_string()))?;
            emit(out, dest, &(net.export_json() + "\n"))?;
            let line = format!("{} units\n", net.len());
            if dest.is_some() {
                out.write_all(line.as_bytes()).map_err(sink_err)
            } else {
                eprint!("{line}");
                Ok(())
            }
        }
    }
}

/// Summary of one `run` invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub level: LevelArg,
    pub mode: Mode,
    pub steps: usize,
    pub halted: bool,
    /// Decoded final configuration (exact mode).
    pub final_config: Option<String>,
    pub final_tape: Option<String>,
    /// Final encoded point as `num/den` (exact) or decimal (float64) strings.
    pub final_point: (String, String),
    /// Float mode only: first step where the float run leaves the exact run.
    pub divergence_step: Option<usize>,
}

impl RunReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let level = match self.level {
            LevelArg::Tm => "tm",
            LevelArg::Gs => "gs",
            LevelArg::Nda => "nda",
            LevelArg::Net => "net",
        };
        let mode = match self.mode {
            Mode::Exact => "exact",
            Mode::Float64 => "float64",
        };
        let _ = writeln!(s, "level: {level} ({mode})");
        let _ = writeln!(
            s,
            "status: {} after {} steps",
            if self.halted { "halted" } else { "timeout" },
            self.steps
        );
        if let Some(c) = &self.final_config {
            let _ = writeln!(s, "configuration: {c}");
        }
        if let Some(t) = &self.final_tape {
            let _ = writeln!(s, "tape: {t}");
        }
        let _ = writeln!(s, "point: ({}, {})", self.final_point.0, self.final_point.1);
        if self.mode == Mode::Float64 {
            match self.divergence_step {
                Some(k) => {
                    let _ = writeln!(s, "float64 diverges from exact at step {k}");
                }
                None => {
                    let _ = writeln!(s, "float64 matches exact at every step");
                }
            }
        }
        s
    }
}

/// Decimal rendering with 17 significant digits.
pub fn decimal17(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).clamp(0, 40) as usize;
    format!("{v:.decimals$}")
}

fn ratio_pair(p: &SymbologramPoint) -> (String, String) {
    (rational::to_ratio_string(&p.x), rational::to_ratio_string(&p.y))
}

#[derive(Serialize)]
struct SymbolicRow {
    step: usize,
    state: String,
    configuration: String,
    x: String,
    y: String,
}

#[derive(Serialize)]
struct NetRow {
    step: usize,
    c_x: String,
    c_y: String,
    active_cell_i: Option<usize>,
    active_cell_j: Option<usize>,
    halted: bool,
}

fn rows_to_csv<T: Serialize>(header: &str, rows: &[T]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        let value = serde_json::to_value(r).expect("row serializes");
        let fields: Vec<String> = header
            .split(',')
            .map(|k| match &value[k] {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Null => String::new(),
                other => other.to_string(),
            })
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn symbolic_trace(m: &TuringMachine, trace: &Trace<DottedSequence>, format: Format) -> String {
    let rows: Vec<SymbolicRow> = trace
        .states
        .iter()
        .enumerate()
        .map(|(step, c)| {
            let (x, y) = ratio_pair(&encode(m.radix(), c));
            SymbolicRow {
                step,
                state: m.state_name(c.state()).to_string(),
                configuration: m.render(c),
                x,
                y,
            }
        })
        .collect();
    match format {
        Format::Csv => rows_to_csv("step,state,configuration,x,y", &rows),
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
    }
}

fn net_trace<T: tm2net::network::Activation>(
    net: &Network,
    trace: &Trace<NetState<T>>,
    show: impl Fn(&T) -> String,
    format: Format,
) -> String {
    let last = trace.states.len() - 1;
    let rows: Vec<NetRow> = trace
        .states
        .iter()
        .enumerate()
        .map(|(step, s)| {
            let cell = net.selected_cell(s);
            let (cx, cy) = s.mcl();
            NetRow {
                step,
                c_x: show(cx),
                c_y: show(cy),
                active_cell_i: cell.map(|c| c.i),
                active_cell_j: cell.map(|c| c.j),
                halted: step == last && trace.halted(),
            }
        })
        .collect();
    match format {
        Format::Csv => rows_to_csv("step,c_x,c_y,active_cell_i,active_cell_j,halted", &rows),
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
    }
}

fn nda_trace(nda: &Nda, trace: &Trace<SymbologramPoint>, format: Format) -> String {
    match format {
        Format::Csv => nda.orbit_csv(&trace.states),
        Format::Json => {
            let rows: Vec<serde_json::Value> = trace
                .states
                .iter()
                .enumerate()
                .map(|(step, p)| {
                    let cell = nda.partition().theta(p).ok();
                    serde_json::json!({
                        "step": step,
                        "x": rational::to_ratio_string(&p.x),
                        "y": rational::to_ratio_string(&p.y),
                        "cell_i": cell.map(|c| c.i),
                        "cell_j": cell.map(|c| c.j),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
        }
    }
}

pub struct RunArgs<'a> {
    pub machine: &'a Path,
    pub input: &'a str,
    pub level: LevelArg,
    pub max_steps: usize,
    pub mode: Mode,
    pub trace: Option<&'a Path>,
    pub format: Format,
}

pub fn cmd_run(out: &mut dyn Write, args: RunArgs<'_>) -> Result<RunReport, CliError> {
    let m = load_machine(args.machine)?;
    let word = parse_input(&m, args.input)?;
    let c0 = m
        .initial_config(&word)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let radix = m.radix();
    let bound = encode::digit_bound_from_env();
    let decoded = |p: &SymbologramPoint| -> Result<DottedSequence, CliError> {
        encode::decode(radix, p, bound).map_err(|e| CliError::Input(e.to_string()))
    };
    let write_trace = |body: String| -> Result<(), CliError> {
        match args.trace {
            Some(p) => fs::write(p, body).map_err(|e| io_err(p, e)),
            None => Ok(()),
        }
    };
    if args.mode == Mode::Float64 && args.level != LevelArg::Net {
        return Err(CliError::Input("float64 mode is only available at level net".into()));
    }

    let symbolic_report = |trace: &Trace<DottedSequence>| RunReport {
        level: args.level,
        mode: args.mode,
        steps: trace.steps(),
        halted: trace.halted(),
        final_config: Some(m.render(trace.last())),
        final_tape: Some(m.tape_string(trace.last())),
        final_point: ratio_pair(&encode(radix, trace.last())),
        divergence_step: None,
    };

    let report = match args.level {
        LevelArg::Tm => {
            let trace = m
                .run(c0, args.max_steps)
                .map_err(|e| CliError::Input(e.to_string()))?;
            write_trace(symbolic_trace(&m, &trace, args.format))?;
            symbolic_report(&trace)
        }
        LevelArg::Gs => {
            let trace = GeneralizedShift::build(&m).run(c0, args.max_steps);
            write_trace(symbolic_trace(&m, &trace, args.format))?;
            symbolic_report(&trace)
        }
        LevelArg::Nda => {
            let nda = Nda::build(&m);
            let trace = nda
                .run(encode(radix, &c0), args.max_steps)
                .map_err(|e| CliError::Input(e.to_string()))?;
            write_trace(nda_trace(&nda, &trace, args.format))?;
            let c = decoded(trace.last())?;
            RunReport {
                level: args.level,
                mode: args.mode,
                steps: trace.steps(),
                halted: trace.halted(),
                final_config: Some(m.render(&c)),
                final_tape: Some(m.tape_string(&c)),
                final_point: ratio_pair(trace.last()),
                divergence_step: None,
            }
        }
        LevelArg::Net => {
            let p = pipeline(m.clone())?;
            let net = &p.network;
            let start = encode(radix, &c0);
            let exact = net.run(NetState::<Rational>::from_point(net, &start), args.max_steps);
            match args.mode {
                Mode::Exact => {
                    write_trace(net_trace(net, &exact, rational::to_ratio_string, args.format))?;
                    let c = decoded(&exact.last().point())?;
                    RunReport {
                        level: args.level,
                        mode: args.mode,
                        steps: exact.steps(),
                        halted: exact.halted(),
                        final_config: Some(m.render(&c)),
                        final_tape: Some(m.tape_string(&c)),
                        final_point: ratio_pair(&exact.last().point()),
                        divergence_step: None,
                    }
                }
                Mode::Float64 => {
                    let float = net.run(NetState::<f64>::from_point(net, &start), args.max_steps);
                    write_trace(net_trace(net, &float, |v| decimal17(*v), args.format))?;
                    let (fx, fy) = float.last().mcl();
                    RunReport {
                        level: args.level,
                        mode: args.mode,
                        steps: float.steps(),
                        halted: float.halted(),
                        final_config: None,
                        final_tape: None,
                        final_point: (decimal17(*fx), decimal17(*fy)),
                        divergence_step: first_divergence(&exact, &float),
                    }
                }
            }
        }
    };
    out.write_all(report.render().as_bytes()).map_err(sink_err)?;
    Ok(report)
}

/// Lockstep comparison on an already compiled pipeline.
pub fn compare_pipeline(out: &mut dyn Write, p: &Pipeline, word: &[Symbol], max_steps: usize) -> Result<Agreement, CliError> {
    let c0 = p
        .machine
        .initial_config(word)
        .map_err(|e| CliError::Input(e.to_string()))?;
    match compare_levels(p, &c0, max_steps) {
        Ok(a) => {
            writeln!(
                out,
                "tm = gs = nda = net for {} steps ({})",
                a.steps,
                if a.halted { "halted" } else { "timeout" }
            )
            .map_err(sink_err)?;
            Ok(a)
        }
        Err(Mismatch { step, levels, left, right }) => Err(CliError::Mismatch(format!(
            "mismatch at step {step} between {} and {}: {} = {left}, {} = {right}",
            levels.0, levels.1, levels.0, levels.1
        ))),
    }
}

pub fn cmd_compare(out: &mut dyn Write, machine: &Path, input: &str, max_steps: usize) -> Result<Agreement, CliError> {
    let m = load_machine(machine)?;
    let word = parse_input(&m, input)?;
    let p = pipeline(m)?;
    compare_pipeline(out, &p, &word, max_steps)
}

pub fn cmd_info(out: &mut dyn Write, machine: &Path) -> Result<(), CliError> {
    let m = load_machine(machine)?;
    let nda = Nda::build(&m);
    let net = Network::build(&nda).map_err(|e| CliError::Input(e.to_string()))?;
    let b = net.breakdown();
    let r = m.radix();
    let h = net.h();
    let values = net.weight_values();
    let mut s = String::new();
    let _ = writeln!(s, "states: {} ({})", r.n_q, m.state_names().join(" "));
    let _ = writeln!(s, "symbols: {} ({})", r.n_s, m.symbol_names().join(" "));
    let _ = writeln!(s, "n_q: {}, n_s: {}", r.n_q, r.n_s);
    let _ = writeln!(
        s,
        "cells: {}, MCL: {}, BSL: {}, LTL: {}, bias: {}, total: {}",
        nda.partition().cell_count(),
        b.mcl,
        b.bsl(),
        b.ltl,
        b.bias,
        b.total
    );
    let _ = writeln!(s, "BSL_x: {}, BSL_y: {}", b.bsl_x, b.bsl_y);
    let _ = writeln!(s, "h: {}", rational::to_ratio_string(h));
    let _ = writeln!(
        s,
        "weights: {} edges, {} distinct values, min {}, max {}",
        net.edge_count(),
        values.len(),
        values.first().map_or("-".into(), rational::to_ratio_string),
        values.last().map_or("-".into(), rational::to_ratio_string),
    );
    out.write_all(s.as_bytes()).map_err(sink_err)
}

/// Dispatches a parsed command line.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Compile { machine, target, out: dest } => cmd_compile(out, &machine, target, dest.as_deref()),
        Command::Run {
            machine,
            input,
            level,
            max_steps,
            mode,
            trace,
            format,
        } => cmd_run(
            out,
            RunArgs {
                machine: &machine,
                input: &input,
                level,
                max_steps,
                mode,
                trace: trace.as_deref(),
                format,
            },
        )
        .map(|_| ()),
        Command::Compare {
            machine,
            input,
            max_steps,
        } => cmd_compare(out, &machine, &input, max_steps).map(|_| ()),
        Command::Info { machine } => cmd_info(out, &machine),
    }
}
