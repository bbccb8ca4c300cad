//! C ABI over `condbench`.
//!
//! Objects are opaque handles created by a `*_new` function and released by
//! the matching `*_free`. Every fallible call returns a [`CbStatus`]; on
//! failure `cb_last_error` describes what went wrong on the calling thread.
//! Panics never cross the boundary and are reported as `CB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use condbench::envs::{
    Difficulty, Env, EnvConfig, PatterningConfig, TraceConditioningConfig,
};
use condbench::eval::{compute_returns, msre};
use condbench::harness::{run_experiment, write_outputs, ExperimentConfig, RunOutput};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Io = 4,
    NotRun = 5,
    Panic = 6,
}

/// An environment instance.
pub struct CbEnv {
    env: Env,
}

/// A parsed experiment and, after `cb_experiment_run`, its results.
pub struct CbExperiment {
    config: ExperimentConfig,
    results: Option<Vec<RunOutput>>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: CbStatus, msg: impl Into<String>) -> CbStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> CbStatus) -> CbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(CbStatus::Panic, msg)
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, CbStatus> {
    if p.is_null() {
        return Err(fail(CbStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CbStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn make_env(cfg: EnvConfig, seed: u64, out: *mut *mut CbEnv) -> CbStatus {
    if out.is_null() {
        return fail(CbStatus::NullPointer, "out is null");
    }
    match Env::new(&cfg, seed) {
        Ok(env) => {
            unsafe { *out = Box::into_raw(Box::new(CbEnv { env })) };
            CbStatus::Ok
        }
        Err(e) => fail(CbStatus::InvalidConfig, e.to_string()),
    }
}

/// Message for the last failed call on this thread. Valid until the next
/// call that fails on the same thread.
#[no_mangle]
pub extern "C" fn cb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Trace conditioning with ISI integer-uniform on `[isi_low, isi_high]` and
/// default timing otherwise.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cb_env_new_trace_conditioning(
    isi_low: u32,
    isi_high: u32,
    seed: u64,
    out: *mut *mut CbEnv,
) -> CbStatus {
    guard(|| {
        let cfg = TraceConditioningConfig::with_isi(isi_low, isi_high);
        make_env(EnvConfig::TraceConditioning(cfg), seed, out)
    })
}

/// Noisy patterning at a difficulty preset: 0 easy, 1 medium, 2 hard.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cb_env_new_noisy_patterning(
    difficulty: u32,
    seed: u64,
    out: *mut *mut CbEnv,
) -> CbStatus {
    guard(|| {
        let d = match difficulty {
            0 => Difficulty::Easy,
            1 => Difficulty::Medium,
            2 => Difficulty::Hard,
            _ => return fail(CbStatus::InvalidArgument, "difficulty must be 0, 1 or 2"),
        };
        make_env(EnvConfig::NoisyPatterning(PatterningConfig::noisy(d)), seed, out)
    })
}

/// Trace patterning (medium preset) with ISI on `[isi_low, isi_high]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cb_env_new_trace_patterning(
    isi_low: u32,
    isi_high: u32,
    seed: u64,
    out: *mut *mut CbEnv,
) -> CbStatus {
    guard(|| {
        let cfg = PatterningConfig {
            isi_low,
            isi_high,
            ..PatterningConfig::noisy(Difficulty::Medium)
        };
        make_env(EnvConfig::TracePatterning(cfg), seed, out)
    })
}

/// Number of channels per observation (CSs, US, distractors). 0 for null.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_env_channels(env: *const CbEnv) -> usize {
    env.as_ref().map_or(0, |e| e.env.n_channels())
}

/// Index of the US within an observation.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_env_us_index(env: *const CbEnv) -> usize {
    env.as_ref().map_or(0, |e| e.env.config().channel_counts().0)
}

/// Discount `1 - 1/E[ISI]`; NaN for null.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_env_discount(env: *const CbEnv) -> f64 {
    env.as_ref().map_or(f64::NAN, |e| e.env.discount())
}

/// Advances one step, writing `cb_env_channels` bytes (0 or 1) into `out`
/// in the order CSs, US, distractors. `trial_began` may be null.
///
/// # Safety
/// `env` must be a live handle, `out` valid for `len` bytes, and
/// `trial_began` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cb_env_step(
    env: *mut CbEnv,
    out: *mut u8,
    len: usize,
    trial_began: *mut bool,
) -> CbStatus {
    guard(|| {
        let Some(e) = env.as_mut() else {
            return fail(CbStatus::NullPointer, "env is null");
        };
        if out.is_null() {
            return fail(CbStatus::NullPointer, "out is null");
        }
        let n = e.env.n_channels();
        if len < n {
            return fail(CbStatus::InvalidArgument, format!("buffer holds {len}, need {n}"));
        }
        let dst = slice::from_raw_parts_mut(out, n);
        for (d, v) in dst.iter_mut().zip(e.env.step().channels()) {
            *d = v;
        }
        if !trial_began.is_null() {
            *trial_began = e.env.trial_began();
        }
        CbStatus::Ok
    })
}

/// Releases an environment. Null is ignored.
///
/// # Safety
/// `env` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_env_free(env: *mut CbEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Discounted returns of a US stream into `out_returns` (length `n`);
/// `out_scored` (may be null) receives how many leading entries are scored.
///
/// # Safety
/// `us` valid for `n` reads, `out_returns` for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn cb_compute_returns(
    us: *const u8,
    n: usize,
    gamma: f64,
    tail_epsilon: f64,
    out_returns: *mut f64,
    out_scored: *mut usize,
) -> CbStatus {
    guard(|| {
        if n > 0 && (us.is_null() || out_returns.is_null()) {
            return fail(CbStatus::NullPointer, "null buffer");
        }
        if !(0.0..1.0).contains(&gamma) || !(tail_epsilon > 0.0 && tail_epsilon < 1.0) {
            return fail(CbStatus::InvalidArgument, "need 0 <= gamma < 1 and 0 < eps < 1");
        }
        let us = if n == 0 { &[][..] } else { slice::from_raw_parts(us, n) };
        let r = compute_returns(us, gamma, tail_epsilon);
        if n > 0 {
            slice::from_raw_parts_mut(out_returns, n).copy_from_slice(&r.g);
        }
        if !out_scored.is_null() {
            *out_scored = r.scored;
        }
        CbStatus::Ok
    })
}

/// Mean squared return error of `predictions` against the return of `us`.
///
/// # Safety
/// `predictions` and `us` valid for `n` reads; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cb_msre(
    predictions: *const f64,
    us: *const u8,
    n: usize,
    gamma: f64,
    tail_epsilon: f64,
    out: *mut f64,
) -> CbStatus {
    guard(|| {
        if predictions.is_null() || us.is_null() || out.is_null() {
            return fail(CbStatus::NullPointer, "null buffer");
        }
        if !(0.0..1.0).contains(&gamma) || !(tail_epsilon > 0.0 && tail_epsilon < 1.0) {
            return fail(CbStatus::InvalidArgument, "need 0 <= gamma < 1 and 0 < eps < 1");
        }
        let r = compute_returns(slice::from_raw_parts(us, n), gamma, tail_epsilon);
        match msre(slice::from_raw_parts(predictions, n), &r) {
            Ok(m) => {
                *out = m;
                CbStatus::Ok
            }
            Err(e) => fail(CbStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Parses an experiment config (the same text the CLI reads).
///
/// # Safety
/// `config_text` must be a NUL-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_new(
    config_text: *const c_char,
    out: *mut *mut CbExperiment,
) -> CbStatus {
    guard(|| {
        if out.is_null() {
            return fail(CbStatus::NullPointer, "out is null");
        }
        let text = match str_arg(config_text, "config_text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ExperimentConfig::parse(text) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(CbExperiment {
                    config,
                    results: None,
                }));
                CbStatus::Ok
            }
            Err(e) => fail(CbStatus::InvalidConfig, e.to_string()),
        }
    })
}

/// Multiplies steps and run counts before running.
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_scale(exp: *mut CbExperiment, factor: f64) -> CbStatus {
    guard(|| {
        let Some(x) = exp.as_mut() else {
            return fail(CbStatus::NullPointer, "experiment is null");
        };
        if !(factor > 0.0 && factor.is_finite()) {
            return fail(CbStatus::InvalidArgument, "factor must be positive");
        }
        x.config = x.config.scaled(factor);
        x.results = None;
        CbStatus::Ok
    })
}

/// Runs every configured run on `threads` workers (0 means all cores).
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_run(exp: *mut CbExperiment, threads: usize) -> CbStatus {
    guard(|| {
        let Some(x) = exp.as_mut() else {
            return fail(CbStatus::NullPointer, "experiment is null");
        };
        let threads = (threads > 0).then_some(threads);
        match run_experiment(&x.config, threads) {
            Ok(r) => {
                x.results = Some(r);
                CbStatus::Ok
            }
            Err(e) => fail(CbStatus::InvalidConfig, format!("{e:#}")),
        }
    })
}

fn results<'a>(exp: *const CbExperiment) -> Result<&'a [RunOutput], CbStatus> {
    let x = unsafe { exp.as_ref() }.ok_or_else(|| fail(CbStatus::NullPointer, "experiment is null"))?;
    x.results
        .as_deref()
        .ok_or_else(|| fail(CbStatus::NotRun, "experiment has not been run"))
}

/// Number of finished runs (0 before `cb_experiment_run`).
///
/// # Safety
/// `exp` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_n_results(exp: *const CbExperiment) -> usize {
    exp.as_ref()
        .and_then(|x| x.results.as_ref())
        .map_or(0, Vec::len)
}

/// MSRE and derived seed of result `index`. Either output may be null.
///
/// # Safety
/// `exp` must be a live handle; outputs null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_result(
    exp: *const CbExperiment,
    index: usize,
    out_msre: *mut f64,
    out_seed: *mut u64,
) -> CbStatus {
    guard(|| {
        let r = match results(exp) {
            Ok(r) => r,
            Err(s) => return s,
        };
        let Some(o) = r.get(index) else {
            return fail(CbStatus::InvalidArgument, format!("index {index} out of range"));
        };
        if !out_msre.is_null() {
            *out_msre = o.result.msre;
        }
        if !out_seed.is_null() {
            *out_seed = o.result.seed;
        }
        CbStatus::Ok
    })
}

/// Copies the 16-character config digest plus NUL into `buf`.
///
/// # Safety
/// `exp` must be a live handle and `buf` valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_digest(
    exp: *const CbExperiment,
    buf: *mut c_char,
    len: usize,
) -> CbStatus {
    guard(|| {
        let Some(x) = exp.as_ref() else {
            return fail(CbStatus::NullPointer, "experiment is null");
        };
        if buf.is_null() {
            return fail(CbStatus::NullPointer, "buf is null");
        }
        let d = x.config.digest();
        if len < d.len() + 1 {
            return fail(CbStatus::InvalidArgument, format!("need {} bytes", d.len() + 1));
        }
        ptr::copy_nonoverlapping(d.as_ptr().cast(), buf, d.len());
        *buf.add(d.len()) = 0;
        CbStatus::Ok
    })
}

/// Writes `config.cfg`, `runs.csv` and `curves.csv` into `dir`.
///
/// # Safety
/// `exp` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_write(exp: *const CbExperiment, dir: *const c_char) -> CbStatus {
    guard(|| {
        let dir = match str_arg(dir, "dir") {
            Ok(d) => d,
            Err(s) => return s,
        };
        let r = match results(exp) {
            Ok(r) => r,
            Err(s) => return s,
        };
        let x = &*exp;
        match write_outputs(Path::new(dir), &x.config, r) {
            Ok(()) => CbStatus::Ok,
            Err(e) => fail(CbStatus::Io, format!("{e:#}")),
        }
    })
}

/// Releases an experiment. Null is ignored.
///
/// # Safety
/// `exp` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_experiment_free(exp: *mut CbExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}
