use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_termcheck"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> (i32, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = bin().args(args).output().unwrap();
    let mut text = String::from_utf8(stdout).unwrap();
    text.push_str(&String::from_utf8(stderr).unwrap());
    (status.code().unwrap(), text)
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn check_reports_terminating_with_certificate() {
    let trs = data("distributivity.trs");
    let prec = data("one_over_zero.prec");
    let (code, out) = run(&[
        "check",
        "--trs",
        trs.to_str().unwrap(),
        "--prec",
        prec.to_str().unwrap(),
        "--emit-cert",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("certificate of 5 steps"));
    assert!(out.contains("TERMINATING"));
    assert!(out.contains("\"certificate\""));
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let prec = write(&dir, "p", "f > a\n");
    let empty = write(&dir, "e", "# nothing\n");
    assert_eq!(run(&["check", "--trs", &empty, "--prec", &prec]).0, 0);
    let loops = write(&dir, "l", "a -> f(a)\n");
    let (code, out) = run(&["check", "--trs", &loops, "--prec", &prec]);
    assert_eq!(code, 2);
    assert!(out.contains("MAYBE"));
    let cyclic = write(&dir, "c", "a > b\nb > a\n");
    assert_eq!(run(&["check", "--trs", &loops, "--prec", &cyclic]).0, 1);
    let bad = write(&dir, "b", "f(?x) -> ?y\n");
    assert_eq!(run(&["check", "--trs", &bad, "--prec", &prec]).0, 1);
    assert_eq!(
        run(&["check", "--trs", "/nonexistent", "--prec", &prec]).0,
        1
    );
}

#[test]
fn reduce_finds_and_misses() {
    let prec = data("one_over_zero.prec");
    let (code, out) = run(&[
        "reduce",
        "1(0(?x))",
        "0(0(1(?x)))",
        "--prec",
        prec.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("FOUND: 5 steps"));
    let (code, out) = run(&["reduce", "f(a,b)", "a"]);
    assert_eq!(code, 0);
    assert!(out.contains("FOUND: 2 steps"));
    let (code, out) = run(&["reduce", "f(a)", "f(a)"]);
    assert_eq!(code, 2);
    assert!(out.contains("NOT FOUND"));
    assert_eq!(run(&["reduce", "f*(a)", "a"]).0, 1);
}

#[test]
fn embed_answers() {
    let (code, out) = run(&[
        "embed",
        "2(9,7(0,4))",
        "1(3(8(8(5,1)),9,5(9)),2)",
        "--compile",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("YES"));
    assert_eq!(out.lines().filter(|l| l.contains(" -> ")).count(), 5);
    assert!(out.contains("star reduction of"));
    let (code, out) = run(&["embed", "1(0,0)", "1(0(0,0))"]);
    assert_eq!(code, 2);
    assert!(out.starts_with("NO"));
    assert_eq!(run(&["embed", "f(a,b)", "f(a,b)"]).0, 0);
}

#[test]
fn barrier_scan() {
    let (code, out) = run(&["barrier", data("barrier.txt").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("term 2 = 2(1) embeds into term 4"));
}

#[test]
fn kp_battle_transcript_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("kp.jsonl");
    let (code, out) = run(&[
        "battle",
        "--type",
        "kp",
        "--initial",
        "dagger(0(0,0))",
        "--hercules",
        "leftmost",
        "--hydra",
        "fixed:2",
        "--certify",
        "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("SLAIN after 7 steps"));
    assert_eq!(out.matches("valid").count(), 7);
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 7);
    let (code, out) = run(&["replay", log.to_str().unwrap(), "--certify"]);
    assert_eq!(code, 0);
    assert!(out.contains("replayed 7 moves"));
    assert!(out.contains("SLAIN"));
}

#[test]
fn bh_battle_shows_the_regrowth() {
    let (code, out) = run(&[
        "battle",
        "--type",
        "bh",
        "--initial",
        "dagger(0(omega),0(2,7(5)))",
        "--hercules",
        "rightmost",
        "--max-steps",
        "1",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("regrown: 4(2,7(0))"));
}

#[test]
fn recorded_sh_step_replays() {
    let (code, out) = run(&[
        "replay",
        data("sh_step.jsonl").to_str().unwrap(),
        "--certify",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("final: 2(4(2,3(6,3(4),4),3(6,3(4),4)))"));
    assert!(out.contains("valid"));
}

#[test]
fn interactive_battle_reprompts() {
    let mut child = bin()
        .args([
            "battle",
            "--type",
            "kp",
            "--initial",
            "dagger(0,0)",
            "--interactive",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(b"9\n1\n1\n").unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("not a head: `9`"));
    assert!(text.contains("SLAIN after 2 steps"), "{text}");
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(run(&["serve", "--port", "99999"]).0, 1);
    assert_eq!(run(&["battle", "--type", "xx", "--initial", "dagger"]).0, 1);
    assert_eq!(run(&["battle", "--type", "kp", "--initial", "0(0)"]).0, 1);
    assert_eq!(run(&["nonsense"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[cfg(unix)]
#[test]
fn serve_answers_health_and_snapshots_on_sigterm() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("sessions.json");
    let port = 20_000 + (std::process::id() % 20_000) as u16;
    let mut child = bin()
        .args([
            "serve",
            "--port",
            &port.to_string(),
            "--snapshot",
            snap.to_str().unwrap(),
        ])
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(20);
    let reply = loop {
        if let Ok(mut s) = std::net::TcpStream::connect(("127.0.0.1", port)) {
            use std::io::Write;
            s.write_all(b"GET /health HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n")
                .unwrap();
            let mut buf = String::new();
            s.read_to_string(&mut buf).unwrap();
            break buf;
        }
        assert!(Instant::now() < deadline, "server did not come up");
        std::thread::sleep(Duration::from_millis(50));
    };
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    Command::new("kill")
        .args(["-TERM", &child.id().to_string()])
        .status()
        .unwrap();
    let status = child.wait().unwrap();
    assert!(status.success());
    assert!(snap.exists());
}
