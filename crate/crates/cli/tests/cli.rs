//! End-to-end tests of the compiled binary: exit codes, determinism, and
//! the canonical file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_precsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_is_deterministic_byte_for_byte() {
    let args = [
        "gen", "--jobs", "5", "--density", "1/2", "--seed", "42", "--max-p", "10", "--max-w", "5",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("{\"machines\":1,\"jobs\":["));
}

#[test]
fn gen_density_zero_has_no_edges() {
    let out = run(&["gen", "--jobs", "6", "--density", "0", "--seed", "1"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"precedences\":[]"));
}

#[test]
fn gen_rejects_zero_jobs() {
    let out = run(&["gen", "--jobs", "0", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_single_four_job_chain() {
    let input = fixture("four_job_chain.json");
    let out = run(&["solve", "--input", input.to_str().unwrap(), "--mode", "single"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("{\"objective\":\"59\""));
    assert!(text.contains("\"completions\":[\"6\",\"13\",\"9\",\"18\"]"));
}

#[test]
fn solve_parallel_six_jobs_matches_reference() {
    let input = fixture("six_job_parallel.json");
    let dir = std::env::temp_dir().join(format!("precsched-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dot = dir.join("net.dot");
    let gantt = dir.join("sched.csv");
    let virt = dir.join("virtual.json");
    let out = run(&[
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--mode",
        "parallel",
        "--emit-dot",
        dot.to_str().unwrap(),
        "--emit-gantt",
        gantt.to_str().unwrap(),
        "--emit-virtual",
        virt.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"completions\":[\"9\",\"12\",\"18\",\"12\",\"21\",\"21\"]"));
    assert!(text.starts_with("{\"objective\":\"237\""));

    let dot_text = std::fs::read_to_string(&dot).unwrap();
    assert!(dot_text.starts_with("digraph flow_network {"));
    assert!(dot_text.contains("\"A\" -> \"B\" [label=\"3 | 3\"];"));
    // The canonical flow: hub flows are the processing rates.
    assert!(dot_text.contains("\"B\" -> \"1\" [label=\"2/3 | 1\"];"));
    assert!(dot_text.contains("\"B\" -> \"2\" [label=\"1/3 | 1\"];"));
    assert!(dot_text.contains("\"1\" -> \"5\" [label=\"1/9 | inf\"];"));
    assert!(dot_text.contains("\"3\" -> \"5\" [label=\"0 | inf\"];"));
    assert!(dot_text.contains("\"4\" -> \"Z\" [label=\"10/9 | 10/9\"];"));

    let gantt_text = std::fs::read_to_string(&gantt).unwrap();
    assert!(gantt_text.starts_with("machine,job,start,end\n"));
    assert!(gantt_text.lines().count() > 10);

    let virt_text = std::fs::read_to_string(&virt).unwrap();
    assert!(virt_text.contains("\"objective\":\"237\""));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn solve_single_job_single_segment() {
    let input = fixture("single_job.json");
    let out = run(&["solve", "--input", input.to_str().unwrap(), "--mode", "single"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains(
        "\"segments\":[{\"machine\":0,\"job\":0,\"start\":\"0\",\"end\":\"5\"}]"
    ));
}

#[test]
fn solve_single_refuses_multi_machine_instance() {
    let input = fixture("six_job_parallel.json");
    let out = run(&["solve", "--input", input.to_str().unwrap(), "--mode", "single"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_rejects_cycle_file() {
    let input = fixture("cycle.json");
    let out = run(&["solve", "--input", input.to_str().unwrap(), "--mode", "single"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cycle"));
}

#[test]
fn verify_four_job_chain_exits_zero() {
    let input = fixture("four_job_chain.json");
    let out = run(&["verify", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"violations\":0"));
    assert!(text.contains("\"oracle_optimum\":\"56\""));
}

#[test]
fn verify_parallel_six_jobs() {
    let input = fixture("six_job_parallel.json");
    let out = run(&["verify", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"violations\":0"));
}

#[test]
fn verify_sweep_exits_zero() {
    let out = run(&[
        "verify", "--count", "25", "--seed", "7", "--max-jobs", "7", "--machines", "2",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"checked\":25,\"violations\":0"));
}

#[test]
fn verify_refuses_instances_over_the_cap() {
    let out = run(&[
        "verify", "--count", "1", "--seed", "7", "--max-jobs", "9", "--oracle-cap", "2",
    ]);
    // A 9-job draw exceeds cap 2; the oracle refuses rather than guessing.
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_needs_input_or_count() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(2));

    let input = fixture("four_job_chain.json");
    let out = run(&["verify", "--input", input.to_str().unwrap(), "--count", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["solve", "--mode", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}
