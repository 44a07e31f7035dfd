use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tm2net::nda::Cell;
use tm2net::rational::ratio;
use tm2net::{parse_tm, Nda, Pipeline};
use tm2net_cli::{cmd_run, compare_pipeline, parse_input, CliError, Format, LevelArg, Mode, RunArgs};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn tm2net(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tm2net"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn flip() -> String {
    fixture("flip.tm").display().to_string()
}

#[test]
fn compile_net_reports_unit_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flip.json");
    let o = tm2net(&["compile", &flip(), "--target", "net", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "48 units\n");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["units"].as_array().unwrap().len(), 48);
    assert_eq!(doc["meta"]["h"], "7/1");

    let stub = fixture("minsky74-shape.tm");
    let out = dir.path().join("stub.json");
    let o = tm2net(&["compile", stub.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "259 units\n");
}

#[test]
fn compile_to_stdout_keeps_the_count_on_stderr() {
    let o = tm2net(&["compile", &flip()]);
    assert!(o.status.success());
    assert!(stdout(&o).trim_start().starts_with('{'));
    assert_eq!(String::from_utf8_lossy(&o.stderr), "48 units\n");
}

#[test]
fn compile_gs_and_nda_tables() {
    let o = tm2net(&["compile", &flip(), "--target", "gs"]);
    assert!(o.status.success());
    let tsv = stdout(&o);
    assert_eq!(tsv.lines().count(), 19);
    assert!(tsv.contains("1\tq0\t_\t-1\tqH\t1\t_"));

    let o = tm2net(&["compile", &flip(), "--target", "nda"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["cells"].as_array().unwrap().len(), 18);
    assert_eq!(doc["eta"], serde_json::json!(["0/1", "1/3", "2/3"]));
}

#[test]
fn syntax_error_exits_1_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tm");
    std::fs::write(&bad, "states: q0\nsymbols: _ 1\nstart q0\n").unwrap();
    let o = tm2net(&["info", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{o:?}");
}

#[test]
fn io_and_usage_errors() {
    let o = tm2net(&["info", "/nonexistent/machine.tm"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tm2net(&["run", &flip(), "01", "--level", "bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tm2net(&["run", &flip(), "0x"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(tm2net(&["--help"]).status.code(), Some(0));
}

#[test]
fn run_tm_flips_the_word() {
    let o = tm2net(&["run", &flip(), "01"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("status: halted after 3 steps"), "{text}");
    assert!(text.contains("tape: 10"), "{text}");
}

#[test]
fn every_level_reaches_the_same_tape() {
    for level in ["tm", "gs", "nda", "net"] {
        let o = tm2net(&["run", &flip(), "0110", "--level", level]);
        assert!(o.status.success(), "{level}");
        let text = stdout(&o);
        assert!(text.contains("tape: 1001"), "{level}: {text}");
        assert!(text.contains("halted"), "{level}: {text}");
    }
}

#[test]
fn run_net_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let o = tm2net(&["run", &flip(), "01", "--level", "net", "--trace", trace.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,c_x,c_y,active_cell_i,active_cell_j,halted");
    assert_eq!(lines[1], "0,0/1,5/9,,,false");
    // after one iteration the BSL staircase selects cell (0, 1)
    assert_eq!(lines[2], "1,1/3,2/3,0,1,false");
    assert!(lines.last().unwrap().ends_with(",true"));
}

#[test]
fn run_net_float_reports_divergence() {
    let args = RunArgs {
        machine: &fixture("flip.tm"),
        input: "01101001",
        level: LevelArg::Net,
        max_steps: 100,
        mode: Mode::Float64,
        trace: None,
        format: Format::Csv,
    };
    let mut sink = Vec::new();
    let report = cmd_run(&mut sink, args).unwrap();
    assert!(report.divergence_step.is_some());
    let text = String::from_utf8(sink).unwrap();
    assert!(text.contains("float64 diverges from exact at step"), "{text}");
}

#[test]
fn float_mode_only_at_net_level() {
    let o = tm2net(&["run", &flip(), "01", "--level", "nda", "--mode", "float64"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_exit_codes() {
    assert_eq!(tm2net(&["compare", &flip(), "01"]).status.code(), Some(0));
    assert_eq!(tm2net(&["compare", &flip(), ""]).status.code(), Some(0));

    let m = parse_tm(&std::fs::read_to_string(fixture("flip.tm")).unwrap()).unwrap();
    let nda = Nda::build(&m);
    let cell = Cell { i: 2, j: 2 };
    let mut b = nda.branch(cell).clone();
    b.a_y += ratio(1, 27);
    let word = parse_input(&m, "01").unwrap();
    let p = Pipeline::with_nda(m, nda.with_branch(cell, b)).unwrap();
    let err = compare_pipeline(&mut Vec::new(), &p, &word, 50).unwrap_err();
    assert!(matches!(err, CliError::Mismatch(_)));
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("step 2"), "{err}");
}

#[test]
fn info_prints_breakdown() {
    let o = tm2net(&["info", &flip()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("cells: 18, MCL: 2, BSL: 9, LTL: 36, bias: 1, total: 48"));
    assert!(stdout(&o).contains("h: 7/1"));
    let o = tm2net(&["info", fixture("minsky74-shape.tm").to_str().unwrap()]);
    assert!(stdout(&o).contains("total: 259"));
}

#[test]
fn input_tokenization() {
    let m = parse_tm(&std::fs::read_to_string(fixture("flip.tm")).unwrap()).unwrap();
    assert_eq!(parse_input(&m, "0 1").unwrap(), parse_input(&m, "01").unwrap());
    assert!(parse_input(&m, "").unwrap().is_empty());
    assert!(parse_input(&m, "_").is_err());
}
