use std::path::PathBuf;
use std::process::Command;

fn scripts() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts")
}

fn qrefine() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qrefine"));
    c.env_remove("QREFINE_CONFIG");
    c
}

#[test]
fn run_succeeds_on_the_rz_development() {
    let out = qrefine()
        .arg("--config")
        .arg(scripts().join("rz.toml"))
        .arg("run")
        .arg(scripts().join("rz.qr"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("Goal Clear."), "{stdout}");
}

#[test]
fn config_path_can_come_from_the_environment() {
    let out = qrefine()
        .env("QREFINE_CONFIG", scripts().join("rz.toml"))
        .arg("run")
        .arg(scripts().join("rz.qr"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn failing_command_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("bad.qr");
    std::fs::write(&script, "Def A := X.\nDef A := Y.\nDef B := X.").unwrap();
    let out = qrefine().arg("run").arg(&script).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("bad.qr:2:1:"), "{stderr}");
    assert!(String::from_utf8(out.stdout).unwrap().contains("A is defined."));
}

#[test]
fn io_and_config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = qrefine().arg("run").arg(dir.path().join("none.qr")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[tolerances]\nnot_a_field = 1\n").unwrap();
    let bad = qrefine()
        .arg("--config")
        .arg(&cfg)
        .arg("run")
        .arg(scripts().join("rz.qr"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn repl_reads_multiline_commands() {
    use std::io::Write;
    let mut child = qrefine()
        .arg("repl")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all("Def P00 :=\n  [|00⟩].\nTest P00[p q] <= P00[p q].\n".as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("P00 is defined."), "{stdout}");
    assert!(stdout.contains(": true"), "{stdout}");
    assert_eq!(out.status.code(), Some(0));
}
