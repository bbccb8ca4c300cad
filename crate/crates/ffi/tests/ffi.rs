use std::ffi::{CStr, CString};
use std::ptr;

use condbench_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cb_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn env_round_trip_matches_core() {
    unsafe {
        let mut env = ptr::null_mut();
        assert_eq!(cb_env_new_trace_conditioning(7, 13, 5, &mut env), CbStatus::Ok);
        assert_eq!(cb_env_channels(env), 12);
        assert_eq!(cb_env_us_index(env), 1);
        assert!((cb_env_discount(env) - 0.9).abs() < 1e-12);

        let cfg = condbench::EnvConfig::TraceConditioning(
            condbench::envs::TraceConditioningConfig::with_isi(7, 13),
        );
        let mut core = condbench::Env::new(&cfg, 5).unwrap();
        let mut buf = [0u8; 12];
        let mut began = false;
        for _ in 0..2000 {
            assert_eq!(cb_env_step(env, buf.as_mut_ptr(), buf.len(), &mut began), CbStatus::Ok);
            let o = core.step();
            assert_eq!(buf.to_vec(), o.channels().collect::<Vec<_>>());
            assert_eq!(began, core.trial_began());
        }
        assert_eq!(cb_env_step(env, buf.as_mut_ptr(), 3, ptr::null_mut()), CbStatus::InvalidArgument);
        assert!(last_error().contains("need 12"));
        cb_env_free(env);
        cb_env_free(ptr::null_mut());
    }
}

#[test]
fn invalid_constructions_report_errors() {
    unsafe {
        let mut env = ptr::null_mut();
        assert_eq!(cb_env_new_trace_conditioning(10, 200, 1, &mut env), CbStatus::InvalidConfig);
        assert!(last_error().contains("iti_low"));
        assert!(env.is_null());
        assert_eq!(cb_env_new_noisy_patterning(7, 1, &mut env), CbStatus::InvalidArgument);
        assert_eq!(cb_env_new_noisy_patterning(1, 1, ptr::null_mut()), CbStatus::NullPointer);
        assert_eq!(cb_env_new_trace_patterning(14, 26, 1, &mut env), CbStatus::Ok);
        assert_eq!(cb_env_channels(env), 19);
        cb_env_free(env);
        assert_eq!(cb_env_channels(ptr::null()), 0);
    }
}

#[test]
fn returns_and_msre() {
    let mut us = vec![0u8, 0, 1, 1];
    us.resize(64, 0);
    let mut g = vec![0.0; us.len()];
    let mut scored = 0usize;
    unsafe {
        assert_eq!(
            cb_compute_returns(us.as_ptr(), us.len(), 0.75, 1e-6, g.as_mut_ptr(), &mut scored),
            CbStatus::Ok
        );
        assert!((g[0] - 1.3125).abs() < 1e-15);
        assert_eq!(scored, 64 - 49);
        let mut m = -1.0;
        assert_eq!(cb_msre(g.as_ptr(), us.as_ptr(), us.len(), 0.75, 1e-6, &mut m), CbStatus::Ok);
        assert_eq!(m, 0.0);
        assert_eq!(
            cb_compute_returns(us.as_ptr(), us.len(), 1.0, 1e-6, g.as_mut_ptr(), ptr::null_mut()),
            CbStatus::InvalidArgument
        );
    }
}

#[test]
fn experiment_lifecycle() {
    let text = CString::new(
        "problem.kind = \"trace_conditioning\"\nmethod.kind = \"presence\"\nrun.steps = 2000\nrun.runs = 2\n",
    )
    .unwrap();
    unsafe {
        let mut exp = ptr::null_mut();
        assert_eq!(cb_experiment_new(text.as_ptr(), &mut exp), CbStatus::Ok);
        assert_eq!(cb_experiment_result(exp, 0, ptr::null_mut(), ptr::null_mut()), CbStatus::NotRun);
        assert_eq!(cb_experiment_run(exp, 1), CbStatus::Ok);
        assert_eq!(cb_experiment_n_results(exp), 2);
        let (mut m, mut s) = (0.0, 0u64);
        assert_eq!(cb_experiment_result(exp, 1, &mut m, &mut s), CbStatus::Ok);
        assert!(m.is_finite() && m >= 0.0);
        assert_eq!(s, condbench::rng::run_seed(0, 1));
        assert_eq!(cb_experiment_result(exp, 2, &mut m, &mut s), CbStatus::InvalidArgument);

        let mut buf = [0 as std::ffi::c_char; 17];
        assert_eq!(cb_experiment_digest(exp, buf.as_mut_ptr(), buf.len()), CbStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 16);

        let dir = tempfile::tempdir().unwrap();
        let d = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(cb_experiment_write(exp, d.as_ptr()), CbStatus::Ok);
        assert!(dir.path().join("runs.csv").is_file());
        cb_experiment_free(exp);

        let bad = CString::new("problem.kind = \"maze\"\nmethod.kind = \"presence\"").unwrap();
        let mut exp = ptr::null_mut();
        assert_eq!(cb_experiment_new(bad.as_ptr(), &mut exp), CbStatus::InvalidConfig);
        assert!(last_error().contains("problem.kind"));
        assert_eq!(cb_experiment_new(ptr::null(), &mut exp), CbStatus::NullPointer);
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(cb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export_and_compiles() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/condbench.h")).unwrap();
    for name in [
        "cb_last_error",
        "cb_version",
        "cb_env_new_trace_conditioning",
        "cb_env_step",
        "cb_env_free",
        "cb_compute_returns",
        "cb_msre",
        "cb_experiment_new",
        "cb_experiment_run",
        "cb_experiment_free",
        "typedef struct CbEnv CbEnv",
        "CB_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name}");
    }
    // Syntax-check with the system C compiler when one is installed.
    let status = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include/condbench.h"))
        .status();
    if let Ok(s) = status {
        assert!(s.success());
    }
}

#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let target_dir = exe.parent().unwrap().parent().unwrap();
    let lib = target_dir.join("libcondbench_ffi.a");
    if !lib.is_file() || std::process::Command::new("cc").arg("--version").output().is_err() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let ok = std::process::Command::new("cc")
        .arg(format!("{manifest}/examples/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(ok.success());
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("channels=12 scored="), "{text}");
}
