//! End-to-end tests of the command-line front end: report shape, exit
//! codes, byte determinism, and tamper rejection.

use std::path::{Path, PathBuf};
use std::process::Output;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_padix")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    std::process::Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 report")
}

fn write_spec(dir: &Path) -> PathBuf {
    let path = dir.join("spec.txt");
    std::fs::write(
        &path,
        "padix sequence-spec v1\nprime 2\nprecision 32\nseed 7\nlevel 1 1\nlevel 2 1\nlevel 2 2\nlevel 4 2\ncontinuation eventually-constant 2\ngauge-sup 9\n",
    )
    .unwrap();
    path
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("cfg.txt");
    let mut doc = String::from("padix int-config v1\n");
    for (label, levels, e) in [
        ("e2", "level 1 1\nlevel 1 2\n", 2),
        ("e4", "level 1 1\nlevel 1 2\nlevel 1 4\n", 4),
    ] {
        doc.push_str("begin element\n");
        doc.push_str(&format!("label {label}\nprime 2\nprecision 24\nseed 3\n"));
        doc.push_str(levels);
        doc.push_str(&format!("continuation eventually-constant {e}\nend element\n"));
    }
    doc.push_str("declare-nonconjugate 2\n");
    std::fs::write(&path, doc).unwrap();
    path
}

fn write_point(dir: &Path) -> PathBuf {
    let path = dir.join("sqrt2.txt");
    std::fs::write(
        &path,
        "padix point v1\nprime 2\nprecision 8\nstep eisenstein 2 254 0 1\ncoords 0 1\n",
    )
    .unwrap();
    path
}

#[test]
fn build_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path());
    let out = run_in(dir.path(), &["build", "spec.txt"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("record checks-passed 19/19"));
    assert!(text.contains("record level n=3 d=8 e=2 f=4"));
    assert!(text.ends_with("status ok\n"));

    let verify = run_in(dir.path(), &["verify", "spec.txt.seq"]);
    assert!(verify.status.success());
    assert!(stdout(&verify).contains("record checks-passed 19/19"));
}

#[test]
fn reports_and_sequence_documents_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path());
    let a = run_in(
        dir.path(),
        &["build", "spec.txt", "--sequence-out", "a.seq", "--output", "ra"],
    );
    let b = run_in(
        dir.path(),
        &["build", "spec.txt", "--sequence-out", "b.seq", "--output", "rb"],
    );
    assert!(a.status.success() && b.status.success());
    let ra = std::fs::read(dir.path().join("ra")).unwrap();
    let rb = std::fs::read(dir.path().join("rb")).unwrap();
    assert_eq!(ra, rb);
    let sa = std::fs::read(dir.path().join("a.seq")).unwrap();
    let sb = std::fs::read(dir.path().join("b.seq")).unwrap();
    assert_eq!(sa, sb);
}

#[test]
fn valuate_constant_prime_gives_one() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path());
    assert!(run_in(dir.path(), &["build", "spec.txt"]).status.success());
    let out = run_in(dir.path(), &["valuate", "spec.txt.seq", "2 / 1"]);
    let text = stdout(&out);
    assert!(out.status.success());
    assert!(text.contains("record value 1\n"), "{text}");

    // override precision: the exact value must not move
    let deeper = run_in(
        dir.path(),
        &["valuate", "spec.txt.seq", "2 / 1", "--precision", "48"],
    );
    assert!(stdout(&deeper).contains("record value 1\n"));
}

#[test]
fn window_errors_are_structured_and_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path());
    assert!(run_in(dir.path(), &["build", "spec.txt"]).status.success());
    let out = run_in(dir.path(), &["valuate", "spec.txt.seq", "X^2+2"]);
    assert!(!out.status.success());
    let text = stdout(&out);
    assert!(text.contains("record error kind=window"));
    assert!(text.ends_with("status error window\n"));
}

#[test]
fn tampered_sequence_documents_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path());
    assert!(run_in(dir.path(), &["build", "spec.txt"]).status.success());
    let doc = std::fs::read_to_string(dir.path().join("spec.txt.seq")).unwrap();
    let tampered = doc.replace("gauge 0 1 3", "gauge 0 1 4");
    assert_ne!(tampered, doc);
    std::fs::write(dir.path().join("bad.seq"), tampered).unwrap();
    let out = run_in(dir.path(), &["verify", "bad.seq"]);
    assert!(!out.status.success());
    assert!(stdout(&out).contains("does not match its deterministic rebuild"));
}

#[test]
fn class_group_and_pid_commands() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path());
    let out = run_in(dir.path(), &["class-group", "cfg.txt"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("record summand p=2 torsion=2 rank=1"));
    assert!(text.contains("record class-group Z/2Z (+) Z"));

    let pid = run_in(dir.path(), &["pid", "cfg.txt"]);
    assert!(pid.status.success());
    assert!(stdout(&pid).contains("record pid false"));
}

#[test]
fn witness_command_produces_unit_pair() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = String::from("padix int-config v1\nbegin element\nlabel deep\nprime 2\nprecision 28\nseed 3\n");
    doc.push_str("level 1 1\nlevel 1 2\nlevel 1 4\nlevel 1 8\ncontinuation eventually-constant 8\nend element\n");
    std::fs::write(dir.path().join("deep.txt"), doc).unwrap();
    let out = run_in(dir.path(), &["witness", "deep.txt", "X"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("record witness n=2 d=2"));
}

#[test]
fn omega_and_certify_pair_on_point_documents() {
    let dir = tempfile::tempdir().unwrap();
    write_point(dir.path());
    let out = run_in(dir.path(), &["omega", "sqrt2.txt"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("record omega 3/2"));

    let cert = run_in(dir.path(), &["certify-pair", "sqrt2.txt", "2"]);
    assert!(stdout(&cert).contains("record certificate verdict=certified method=omega-bound"));
    let unknown = run_in(dir.path(), &["certify-pair", "sqrt2.txt", "1"]);
    assert!(stdout(&unknown).contains("record certificate verdict=unknown"));
}

#[test]
fn newton_command_reports_polygon() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["newton", "--prime", "2", "X^2-2"]);
    let text = stdout(&out);
    assert!(out.status.success());
    assert!(text.contains("record segment slope=-1/2 length=2"));
    assert!(text.contains("record root-valuations 1/2 1/2"));

    let quotient = run_in(dir.path(), &["newton", "--prime", "2", "X / X+1"]);
    assert!(!quotient.status.success());
    assert!(stdout(&quotient).contains("expected a polynomial"));
}

#[test]
fn enumerate_exts_lists_classes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["enumerate-exts", "--prime", "2", "--max-degree", "3"],
    );
    let text = stdout(&out);
    assert!(out.status.success());
    assert_eq!(text.matches("record extension").count(), 9);
    assert!(text.contains("label=unramified"));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "absent.seq"]);
    assert!(!out.status.success());
    assert!(stdout(&out).contains("record error kind=io"));
}

#[test]
fn unknown_flags_are_rejected_by_the_parser() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "x.seq", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(2));
}
