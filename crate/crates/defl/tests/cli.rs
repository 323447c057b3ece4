//! End-to-end tests of the command-line interface, both in-process and
//! against the built binary.

use std::path::{Path, PathBuf};
use std::process::Command;

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .unwrap()
        .to_path_buf()
}

fn model(name: &str) -> String {
    repo_root().join("models").join(name).display().to_string()
}

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["defl"];
    argv.extend(args);
    defl::cli::run(argv)
}

#[test]
fn shipped_model_files_match_the_scenarios() {
    for name in defl::scenarios::SCENARIO_NAMES {
        let sc = defl::scenarios::load(name).unwrap();
        let expected = defl::io::model_to_string(&sc.model, Some(&sc.actual));
        let path = repo_root().join("models").join(format!("{name}.json"));
        let on_disk =
            std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(on_disk, expected, "models/{name}.json is out of date");
    }
}

#[test]
fn check_exit_codes() {
    // True fact.
    assert_eq!(
        run(&["check", &model("spy.json"), "u0", "b", "@b (d & ~K d)"]),
        0
    );
    // False fact.
    assert_eq!(run(&["check", &model("spy.json"), "u0", "b", "K d"]), 1);
    // Unknown world.
    assert_eq!(run(&["check", &model("spy.json"), "u9", "b", "d"]), 2);
    // Syntax error.
    assert_eq!(run(&["check", &model("spy.json"), "u0", "b", "K"]), 2);
    // Missing file.
    assert_eq!(run(&["check", "no-such.json", "u0", "b", "d"]), 2);
}

#[test]
fn valid_exit_codes() {
    assert_eq!(
        run(&[
            "valid",
            "[K := cutK(p)] A (K p | K ~p)",
            "--worlds",
            "2",
            "--agents",
            "a,b",
            "--props",
            "p",
        ]),
        0
    );
    assert_eq!(
        run(&["valid", "K p", "--worlds", "2", "--agents", "a", "--props", "p"]),
        1
    );
    assert_eq!(
        run(&["valid", "q", "--worlds", "2", "--agents", "a", "--props", "p"]),
        2
    );
}

#[test]
fn transform_writes_a_loadable_model() {
    let dir = std::env::temp_dir().join("defl-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("spy-after.json");
    let out_str = out.display().to_string();
    assert_eq!(
        run(&[
            "transform",
            &model("spy.json"),
            "K := cutK(d)",
            "-o",
            &out_str
        ]),
        0
    );
    // Bella now knows her danger; the designated point is carried over.
    assert_eq!(run(&["check", &out_str, "u0", "b", "@b K d"]), 0);
    let (after, actual) = defl::io::read_model(&out).unwrap();
    assert_eq!(actual, Some(after.point("u0", "b").unwrap()));
    // A transformation that breaks the model conditions is refused.
    assert_eq!(
        run(&[
            "transform",
            &model("fig2.json"),
            "K := a? ; K",
            "-o",
            &out_str
        ]),
        2
    );
    std::fs::remove_file(&out).ok();
}

#[test]
fn scenario_and_golden() {
    assert_eq!(run(&["scenario", "spy"]), 0);
    assert_eq!(run(&["scenario", "figure9"]), 2);
    assert_eq!(run(&["scenario", "spy", "--run-golden"]), 0);
}

#[test]
fn export_dot_is_deterministic() {
    let dir = std::env::temp_dir().join("defl-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let out1 = dir.join("fig1-a.dot");
    let out2 = dir.join("fig1-b.dot");
    assert_eq!(
        run(&[
            "export-dot",
            &model("fig1.json"),
            "-o",
            &out1.display().to_string()
        ]),
        0
    );
    assert_eq!(
        run(&[
            "export-dot",
            &model("fig1.json"),
            "-o",
            &out2.display().to_string()
        ]),
        0
    );
    let a = std::fs::read_to_string(&out1).unwrap();
    let b = std::fs::read_to_string(&out2).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("graph model {"));
    std::fs::remove_file(&out1).ok();
    std::fs::remove_file(&out2).ok();
}

#[test]
fn built_binary_smoke_test() {
    let exe = env!("CARGO_BIN_EXE_defl");
    let output = Command::new(exe)
        .args(["check", &model("gossip.json"), "u", "r", "c"])
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&output.stdout).trim(), "true");

    // Formula from stdin.
    use std::io::Write;
    let mut child = Command::new(exe)
        .args(["check", &model("gossip.json"), "u", "r", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"down n . @p K @n c")
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert_eq!(output.status.code(), Some(0));
}
