//! End-to-end runs of the installed binary: output shapes, determinism,
//! exit codes, and the bundled regression targets.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relipoly"))
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code_of(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

/// Pull the first quoted coefficient array out of a JSON document without a
/// JSON parser dependency. Keys serialize sorted, so in every output this
/// reads the first array is the "nk" field's.
fn nk_coefficients(json: &str) -> Vec<String> {
    let block = json.split("\"coefficients\"").nth(1).expect("coefficients");
    let open = block.find('[').unwrap();
    let close = block.find(']').unwrap();
    block[open + 1..close]
        .split(',')
        .map(|s| s.trim().trim_matches('"').to_string())
        .collect()
}

#[test]
fn every_subcommand_offers_help() {
    assert_eq!(code_of(&["--help"]), 0);
    for sub in [
        "motifs",
        "nk",
        "rk",
        "mc",
        "curve",
        "importance",
        "tradeoff",
        "constraints",
        "closed-form",
        "repro",
    ] {
        assert_eq!(code_of(&[sub, "--help"]), 0, "{sub} --help");
    }
}

#[test]
fn toy_nk_matches_the_published_polynomial() {
    let toy = fixture("toy.edges");
    let flags = stdout_of(&[
        "nk", "--graph", &toy, "--rule", "two_terminal", "--source", "S", "--target", "T",
    ]);
    let want = ["0", "0", "0", "1", "2", "0", "-1", "-2", "0", "1"];
    assert_eq!(nk_coefficients(&flags), want);

    // The JSON rule spelling is interchangeable with the flag spelling.
    let json = stdout_of(&[
        "nk",
        "--graph",
        &toy,
        "--rule-json",
        r#"{"rule":"two_terminal","source":"S","target":"T"}"#,
    ]);
    assert_eq!(flags, json);
}

#[test]
fn reruns_are_byte_identical() {
    let toy = fixture("toy.edges");
    let nk_args = [
        "nk", "--graph", &toy, "--rule", "two_terminal", "--source", "S", "--target", "T",
    ];
    assert_eq!(stdout_of(&nk_args), stdout_of(&nk_args));

    let mc = |seed: &str| {
        let toy = fixture("toy.edges");
        stdout_of(&[
            "mc", "--graph", &toy, "--rule", "two_terminal", "--source", "S", "--target", "T",
            "--samples", "2000", "--seed", seed,
        ])
    };
    assert_eq!(mc("9"), mc("9"));
    assert_ne!(mc("9"), mc("10"));
}

#[test]
fn threads_do_not_change_any_bytes() {
    let grid = fixture("grid44.edges");
    let at = |threads: &str| {
        stdout_of(&[
            "--threads", threads, "nk", "--graph", &grid, "--rule", "two_terminal", "--source",
            "0", "--target", "15", "--k-max", "8",
        ])
    };
    assert_eq!(at("1"), at("3"));
}

#[test]
fn out_file_carries_exactly_the_stdout_bytes() {
    let toy = fixture("toy.edges");
    let piped = stdout_of(&[
        "nk", "--graph", &toy, "--rule", "two_terminal", "--source", "S", "--target", "T",
    ]);
    let path = tmp("nk-out.json");
    stdout_of(&[
        "nk", "--graph", &toy, "--rule", "two_terminal", "--source", "S", "--target", "T",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), piped);
}

#[test]
fn triangle_curve_passes_through_one_half() {
    let tri = fixture("tri.edges");
    let csv = stdout_of(&["curve", "--graph", &tri, "--rule", "all_terminal"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,R"));
    let row = lines
        .find(|l| l.starts_with("0.5,"))
        .expect("midpoint row");
    let r: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((r - 0.5).abs() < 1e-12, "R(1/2) = {r}");
}

#[test]
fn sampled_curve_is_exact_on_degenerate_strata() {
    // Every 2-subset of the triangle connects it, so sampling introduces
    // no noise at all and the estimated curve equals the exact one.
    let tri = fixture("tri.edges");
    let exact = stdout_of(&["curve", "--graph", &tri, "--rule", "all_terminal"]);
    let sampled = stdout_of(&[
        "curve", "--graph", &tri, "--rule", "all_terminal", "--samples", "500", "--seed", "1",
    ]);
    assert_eq!(exact, sampled);
}

#[test]
fn exit_codes_track_error_classes() {
    let dir = tmp("errors");
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, content: &str| {
        let p = dir.join(name);
        std::fs::write(&p, content).unwrap();
        p.to_str().unwrap().to_string()
    };
    let bad = write("bad.edges", "a b c\n");
    let looped = write("loop.edges", "a a\n");
    let mut k7 = String::new();
    for i in 0..7u32 {
        for j in i + 1..7 {
            k7.push_str(&format!("{i} {j}\n"));
        }
    }
    let k7 = write("k7.edges", &k7);
    let missing = dir.join("missing.edges").to_str().unwrap().to_string();

    // 2: bad parameters, including clap's own usage errors. The graph must
    // be well formed here or the parse error's exit 3 wins.
    let tri = fixture("tri.edges");
    assert_eq!(code_of(&["nk", "--graph", &tri]), 2, "missing rule");
    assert_eq!(
        code_of(&["nk", "--graph", &tri, "--rule", "bogus"]),
        2,
        "unknown rule kind"
    );
    assert_eq!(
        code_of(&["tradeoff", "--r1", "20", "--k1", "18", "--k2", "6"]),
        2,
        "edge budget not divisible"
    );
    assert_eq!(code_of(&["repro", "--target", "nope"]), 2, "unknown target");
    assert_eq!(code_of(&["nk"]), 2, "clap usage error");

    // 3: unreadable graph text.
    assert_eq!(
        code_of(&["nk", "--graph", &bad, "--rule", "all_terminal"]),
        3,
        "malformed line"
    );
    assert_eq!(
        code_of(&["nk", "--graph", &looped, "--rule", "all_terminal"]),
        3,
        "self-loop"
    );

    // 4: exact pipeline over capacity (K7 has 16807 spanning trees).
    assert_eq!(
        code_of(&["constraints", "--graph", &k7, "--rule", "all_terminal"]),
        4,
        "full table over capacity"
    );

    // 6: filesystem errors.
    assert_eq!(
        code_of(&["nk", "--graph", &missing, "--rule", "all_terminal"]),
        6,
        "missing file"
    );
}

#[test]
fn all_repro_targets_pass() {
    for target in [
        "table1",
        "table2",
        "fig3poly",
        "fig4curves",
        "fig5tradeoff",
        "crossing618",
    ] {
        let out = run(&["repro", "--target", target]);
        let text = String::from_utf8_lossy(&out.stdout).to_string();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{target} exit: {text}{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(
            text.contains(&format!("repro {target}: PASS")),
            "{target} summary line: {text}"
        );
        assert!(!text.contains("FAIL"), "{target}: {text}");
    }
}

#[test]
fn repro_artifacts_land_in_the_out_file() {
    let path = tmp("fig4curves.csv");
    let text = stdout_of(&["repro", "--target", "fig4curves", "--out", path.to_str().unwrap()]);
    assert!(text.contains("repro fig4curves: PASS"));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("x,before_opposite,before_short,after_opposite,after_short")
    );
    assert_eq!(lines.count(), 201);
}

#[test]
fn constraints_pass_cleanly_on_the_toy() {
    let toy = fixture("toy.edges");
    let json = stdout_of(&[
        "constraints", "--graph", &toy, "--rule", "two_terminal", "--source", "S", "--target",
        "T",
    ]);
    assert!(json.contains("\"all_pass\": true"), "{json}");
}

#[test]
fn closed_form_chain_matches_the_exact_pipeline_shape() {
    let json = stdout_of(&["closed-form", "--variant", "chain", "--m", "3", "--k0", "4"]);
    assert_eq!(
        nk_coefficients(&json),
        ["0", "0", "0", "0", "3", "-3", "1"]
    );
}
