use std::process::{Command, Output};

fn byzstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_byzstab")).args(args).env_remove("BYZSTAB_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split_whitespace().find_map(|t| t.strip_prefix(key)?.strip_prefix('='))
}

#[test]
fn legacy_counterexample_is_disrupted_every_cycle() {
    let o = byzstab(&["run", "fig7", "--variant=legacy", "--cycles=25"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("area=s_b_star")).expect("s_b_star line");
    let d: u64 = field(line, "disruptions").unwrap().parse().unwrap();
    assert!(d >= 25, "{line}");
}

#[test]
fn ssmax_counterexample_stays_within_the_bound() {
    let o = byzstab(&["run", "fig7", "--cycles=25"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("schedule: valid"));
    assert!(out.lines().filter(|l| l.starts_with("area=")).all(|l| l.contains("violations=none")), "{out}");
}

#[test]
fn explore_small_systems() {
    for name in ["explore-chain3", "explore-byz4"] {
        let o = byzstab(&["explore", name]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(stdout(&o).contains("reach(LC)=ok"));
    }
}

#[test]
fn explore_mutant_reports_a_stuck_configuration() {
    let o = byzstab(&["explore", "explore-chain3", "--variant=mutant-r1-no-level"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("reach(LC)=fail"));
    assert!(stdout(&o).contains("stuck"));
}

#[test]
fn explore_refuses_oversized_spaces() {
    let o = byzstab(&["explore", "fig7"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("states="));
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = std::env::temp_dir().join(format!("byzstab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.scn");
    std::fs::write(&path, "[system]\nnodes = a b\n[nonsense]\n").unwrap();
    let o = byzstab(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = byzstab(&["run", "no-such-entry"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn library_lists_entries() {
    let o = byzstab(&["library"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for name in ["fig7", "theorem4-chain", "explore-chain3", "random"] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
    let o = byzstab(&["library", "fig7"]);
    assert!(stdout(&o).contains("[system]"));
}

#[test]
fn library_text_runs_as_a_file() {
    let text = stdout(&byzstab(&["library", "explore-chain3"]));
    let dir = std::env::temp_dir().join(format!("byzstab-cli-file-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("chain.scn");
    std::fs::write(&path, text).unwrap();
    let o = byzstab(&["explore", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn truncated_runs_exit_with_three() {
    let o = byzstab(&["run", "fig7", "--max-steps=1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn seed_sweep_reports_every_seed() {
    let o = byzstab(&["run", "fig7", "--seeds=4", "--jobs=2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for s in 0..4 {
        assert!(out.contains(&format!("seed={s} ")), "{out}");
    }
}

#[test]
fn metric_checks() {
    let o = byzstab(&["check-metric", "met", "--used=4", "--c=1"]);
    assert!(stdout(&o).contains("strongly maximizable"));
    assert_eq!(byzstab(&["check-metric", "nope"]).status.code(), Some(2));
}
