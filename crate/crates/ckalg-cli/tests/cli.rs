//! End-to-end checks of the binary: output bytes, exit codes, and the
//! JSON error objects scripts are expected to dispatch on.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ckalg"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ckalg-cli-test-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_fixture(name: &str, contents: &str) -> PathBuf {
    let path = scratch(name);
    fs::write(&path, contents).unwrap();
    path
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn solve_verify_roundtrip_and_determinism() {
    let sys = write_fixture(
        "exp.sys",
        "derivations 1\nunknown u\neq d1 u = u\ninit u 0: 1\npoint 0\norder 5\n",
    );
    let first = bin().arg("solve").arg(&sys).output().unwrap();
    let text = stdout_of(&first);
    assert!(text.contains("\"format\": \"ckalg.series.v1\""));
    assert!(text.contains("\"1/24\""), "missing 1/4! coefficient:\n{text}");

    // Byte-identical on repeated runs.
    let second = bin().arg("solve").arg(&sys).output().unwrap();
    assert_eq!(first.stdout, second.stdout);

    // Written file equals stdout, and verify accepts it.
    let doc = scratch("exp.json");
    let status = bin()
        .arg("solve")
        .arg(&sys)
        .arg("--output")
        .arg(&doc)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(fs::read(&doc).unwrap(), first.stdout);

    let verify = bin().arg("verify").arg(&doc).output().unwrap();
    let report = stdout_of(&verify);
    assert!(report.contains("residual 0 to order 4: pass"), "{report}");
    assert!(report.ends_with("all 1 equation(s) pass\n"), "{report}");
}

#[test]
fn flags_override_file_directives() {
    let sys = write_fixture(
        "exp-noorder.sys",
        "derivations 1\nunknown u\neq d1 u = u\ninit u 0: 1\norder 3\n",
    );
    let out = bin()
        .arg("solve")
        .arg(&sys)
        .args(["--order", "6", "--point", "0"])
        .output()
        .unwrap();
    let text = stdout_of(&out);
    assert!(text.contains("\"order\": 6"), "{text}");
    assert!(text.contains("\"1/120\""), "{text}");
}

#[test]
fn extend_consumes_a_lower_document() {
    // Solve d1 x = x in one variable, then extend along a new first
    // direction with the same relation; the result is e^(z1 + z2).
    let lower_sys = write_fixture(
        "lower.sys",
        "derivations 1\nunknown x\neq d1 x = x\ninit x 0: 1\npoint 0\norder 8\n",
    );
    let lower_doc = scratch("lower.json");
    assert!(bin()
        .arg("solve")
        .arg(&lower_sys)
        .arg("--output")
        .arg(&lower_doc)
        .status()
        .unwrap()
        .success());

    let upper_sys = write_fixture(
        "upper.sys",
        "derivations 2\nunknown x\nrelation d1 x - x\npoint 0 0\norder 4\n",
    );
    let out = bin()
        .arg("extend")
        .arg(&upper_sys)
        .arg(&lower_doc)
        .output()
        .unwrap();
    let text = stdout_of(&out);
    // Coefficient of z1 z2 in e^(z1+z2) is 1; of z1^2 is 1/2.
    assert!(text.contains("\"variables\": 2"), "{text}");
    assert!(text.contains("\"1/2\""), "{text}");
}

#[test]
fn report_subcommands_emit_stable_text() {
    let rel = write_fixture(
        "rel.sys",
        "derivations 1\nunknown x\nrelation (d1 x)^2 - 4*x\nexpr d1^3 x\n",
    );
    let sep = stdout_of(&bin().arg("separant").arg(&rel).output().unwrap());
    assert!(sep.contains("leader: d1 x"), "{sep}");
    assert!(sep.contains("separant: 2*d1 x"), "{sep}");
    assert!(sep.contains("linear in leader: no"), "{sep}");

    let red = stdout_of(&bin().arg("reduce").arg(&rel).output().unwrap());
    assert!(red.contains("reduced: 0"), "{red}");
    assert!(red.contains("separant power: 2"), "{red}");

    let chg = write_fixture(
        "chg.sys",
        "derivations 2\nunknown x\nrelation d2 x - 1\nwitness x: z2\n",
    );
    let report = stdout_of(&bin().arg("change-derivations").arg(&chg).output().unwrap());
    assert!(report.contains("lambda: 1"), "{report}");

    let geo = write_fixture("geo.sys", "derivations 1\nexpr 1/(1 - z1)\norder 3\n");
    let series = stdout_of(&bin().arg("expand").arg(&geo).output().unwrap());
    assert!(series.contains("\"1/(1 - z1)\""), "{series}");
}

#[test]
fn failures_are_json_objects_with_stable_exit_codes() {
    // Missing input file.
    let out = bin().arg("solve").arg(scratch("nope.sys")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("{\"error\":{\"kind\":\"io\""), "{err}");

    // Normal-form violation.
    let heat = write_fixture(
        "heat.sys",
        "derivations 2\nunknown u\neq d1 u = d2^2 u\ninit u 0: z2^2\norder 3\n",
    );
    let out = bin().arg("solve").arg(&heat).output().unwrap();
    assert_eq!(out.status.code(), Some(20));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("\"kind\":\"normal-form\""), "{err}");
    assert!(err.contains("d2^2 u"), "{err}");

    // Syntax error carries line/column in the message.
    let bad = write_fixture("bad.sys", "derivations 1\nunknown u\neq d1 u = u +\n");
    let out = bin().arg("solve").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(25));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("\"kind\":\"parse\""), "{err}");
    assert!(err.contains("line 3"), "{err}");

    // Underdetermined: an equation with no initial data.
    let missing = write_fixture(
        "missing-init.sys",
        "derivations 1\nunknown u\neq d1 u = u\norder 3\n",
    );
    let out = bin().arg("solve").arg(&missing).output().unwrap();
    assert_eq!(out.status.code(), Some(22));
}
