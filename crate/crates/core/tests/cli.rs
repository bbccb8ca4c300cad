use std::fs;
use std::process::Command;

fn condbench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condbench"))
}

#[test]
fn missing_config_fails_with_message() {
    let out = condbench()
        .args(["run", "--config", "missing.cfg"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("config not found"));
}

#[test]
fn unknown_flag_prints_usage() {
    let out = condbench().args(["run", "--bogus"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = condbench().arg("frobnicate").output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn malformed_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(
        &cfg,
        "problem.kind = \"trace_conditioning\"\nmethod.kind = \"presence\"\nmethod.stepsize = 1\n",
    )
    .unwrap();
    let out = condbench()
        .args(["run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("method.stepsize"));
}

#[test]
fn run_aggregate_profile_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        format!(
            "problem.kind = \"trace_conditioning\"\nmethod.kind = \"microstimulus\"\n\
             run.steps = 200000\nrun.runs = 30\nrun.output = {:?}\n",
            out_dir.to_string_lossy()
        ),
    )
    .unwrap();
    let run = condbench()
        .args(["--threads", "2", "--scale", "0.1", "run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let runs = fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 3);
    assert!(runs.lines().nth(1).unwrap().contains(",20000,"));

    let agg = condbench().args(["aggregate", "--dir"]).arg(&out_dir).output().unwrap();
    assert!(agg.status.success());
    let text = String::from_utf8_lossy(&agg.stdout);
    assert!(text.contains("microstimulus") && text.contains("n=3") && text.contains(" ± "));

    let prof = condbench()
        .args(["profile", "--run", "1", "--trials", "2", "--dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(prof.status.success(), "{}", String::from_utf8_lossy(&prof.stderr));
    let rows = String::from_utf8_lossy(&prof.stdout).into_owned();
    assert!(rows.starts_with("config_digest,seed,trial,offset,us,cs0,"));
    assert_eq!(rows.lines().count(), 1 + 2 * 71);
    // Seed of run 1 matches runs.csv.
    let seed = runs.lines().nth(2).unwrap().split(',').nth(3).unwrap();
    assert!(rows.lines().nth(1).unwrap().split(',').nth(1) == Some(seed));

    let bad = condbench()
        .args(["profile", "--run", "9", "--trials", "1", "--dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
