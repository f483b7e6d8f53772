//! C ABI over `shaping_bandits`.
//!
//! Every fallible function returns an [`SbStatus`]; on failure the message is
//! available from [`sb_last_error`] on the same thread. Objects are opaque
//! handles created by `*_new`/`*_fit` and released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use shaping_bandits::forecaster::{
    estimate_future_mean, fit_monotone, fit_unconstrained, hoeffding_radius, MonotoneModel, TrainingConfig,
    TrainingDataset,
};
use shaping_bandits::harness::{
    bundled_config, run_experiment, write_experiment, EpisodeChoice, ExperimentConfig, RunOptions, ShapingSession,
};
use shaping_bandits::policies::SelectionReason;
use shaping_bandits::{ArmId, Error, NormalizationBounds, PolicyKind, PolicyParams, ShapingPolicy};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    RunComplete = 3,
    EliminatedArm = 4,
    Config = 5,
    Io = 6,
    Numeric = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbReason {
    InitialPull = 0,
    ForcedElimination = 1,
    UniformCoin = 2,
    UcbArgmax = 3,
    EpsExplore = 4,
    EpsExploit = 5,
    XiBlend = 6,
    Fixed = 7,
}

/// Arm for the next episode. `arm` is 0 for Q and 1 for the expert. When
/// `blend` is set the learner should act on `Q + xi * Φ` and report the
/// return against `arm`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbDecision {
    pub arm: u32,
    pub reason: SbReason,
    pub blend: bool,
    pub xi: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SbSessionInfo {
    pub horizon: u32,
    pub episodes_done: u32,
    pub pulls_q: u32,
    pub pulls_phi: u32,
    pub phi_eliminated: bool,
}

/// One seed of a shaping-bandit run.
pub struct SbSession(ShapingSession);

/// A fitted forecaster network.
pub struct SbModel(MonotoneModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SbStatus {
    match e {
        Error::RunComplete { .. } => SbStatus::RunComplete,
        Error::EliminatedArm(_) => SbStatus::EliminatedArm,
        Error::Config(_) | Error::ConfigNotFound(_) => SbStatus::Config,
        Error::Io { .. } => SbStatus::Io,
        Error::TrainingDiverged => SbStatus::Numeric,
        _ => SbStatus::InvalidArgument,
    }
}

fn fail(status: SbStatus, msg: impl Into<String>) -> SbStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, mapping errors and panics to a status and the thread's last
/// error message.
fn guard(f: impl FnOnce() -> Result<(), SbStatus>) -> SbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SbStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lift(e: Error) -> SbStatus {
    fail(status_of(&e), e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, SbStatus> {
    if p.is_null() {
        return Err(fail(SbStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(SbStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn mut_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SbStatus> {
    p.as_mut().ok_or_else(|| fail(SbStatus::NullPointer, format!("{what} is null")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, SbStatus> {
    p.as_ref().ok_or_else(|| fail(SbStatus::NullPointer, format!("{what} is null")))
}

fn arm_arg(arm: u32) -> Result<ArmId, SbStatus> {
    ArmId::from_index(arm as usize).ok_or_else(|| fail(SbStatus::InvalidArgument, format!("arm must be 0 or 1, got {arm}")))
}

fn reason(r: SelectionReason) -> SbReason {
    match r {
        SelectionReason::InitialPull => SbReason::InitialPull,
        SelectionReason::ForcedElimination => SbReason::ForcedElimination,
        SelectionReason::UniformCoin => SbReason::UniformCoin,
        SelectionReason::UcbArgmax => SbReason::UcbArgmax,
        SelectionReason::EpsExplore => SbReason::EpsExplore,
        SelectionReason::EpsExploit => SbReason::EpsExploit,
        SelectionReason::XiBlend => SbReason::XiBlend,
        SelectionReason::Fixed => SbReason::Fixed,
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a session for `policy` (e.g. `"rpies"`, `"upies"`) with default
/// policy and forecaster parameters.
///
/// # Safety
/// `policy` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_session_new(
    policy: *const c_char,
    horizon: u32,
    r_min: f64,
    r_max: f64,
    seed: u64,
    out: *mut *mut SbSession,
) -> SbStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        *out = ptr::null_mut();
        let kind: PolicyKind = str_arg(policy, "policy")?.parse().map_err(lift)?;
        let policy = ShapingPolicy::new(kind, PolicyParams::default()).map_err(lift)?;
        let bounds = NormalizationBounds::new(r_min, r_max).map_err(lift)?;
        let session =
            ShapingSession::new(policy, horizon, bounds, TrainingConfig::default(), seed).map_err(lift)?;
        *out = Box::into_raw(Box::new(SbSession(session)));
        Ok(())
    })
}

/// # Safety
/// `session` must come from [`sb_session_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sb_session_free(session: *mut SbSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Chooses the arm for the next episode. Returns `RunComplete` once the
/// horizon is used up.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_session_select(session: *mut SbSession, out: *mut SbDecision) -> SbStatus {
    guard(|| {
        let s = mut_arg(session, "session")?;
        let out = mut_arg(out, "out")?;
        let (decision, choice) = s.0.select().map_err(lift)?;
        let (blend, xi) = match choice {
            EpisodeChoice::Blend { xi } => (true, xi),
            EpisodeChoice::Arm(_) => (false, 0.0),
        };
        *out = SbDecision { arm: decision.arm.index() as u32, reason: reason(decision.reason), blend, xi };
        Ok(())
    })
}

/// Reports the raw return of the episode played with `arm`. `eliminated`
/// may be null; otherwise it is set when this observation eliminated the
/// expert arm.
///
/// # Safety
/// `session` must be valid; `eliminated` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn sb_session_observe(
    session: *mut SbSession,
    arm: u32,
    raw_return: f64,
    eliminated: *mut bool,
) -> SbStatus {
    guard(|| {
        let s = mut_arg(session, "session")?;
        let arm = arm_arg(arm)?;
        if !raw_return.is_finite() {
            return Err(fail(SbStatus::InvalidArgument, "raw_return must be finite"));
        }
        let obs = s.0.observe(arm, raw_return).map_err(lift)?;
        if let Some(e) = eliminated.as_mut() {
            *e = obs.eliminated.is_some();
        }
        Ok(())
    })
}

/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_session_info(session: *const SbSession, out: *mut SbSessionInfo) -> SbStatus {
    guard(|| {
        let run = ref_arg(session, "session")?.0.run();
        *mut_arg(out, "out")? = SbSessionInfo {
            horizon: run.horizon(),
            episodes_done: run.current_episode(),
            pulls_q: run.pulls(ArmId::Q),
            pulls_phi: run.pulls(ArmId::Phi),
            phi_eliminated: run.phi_eliminated(),
        };
        Ok(())
    })
}

/// Fits a forecaster to `len` rewards in `[0, 1]` observed at pulls
/// `1..=len`. `horizon` fixes the input scale; `monotone` selects the
/// non-negative-weight network.
///
/// # Safety
/// `rewards` must point to `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_model_fit(
    rewards: *const f64,
    len: usize,
    horizon: u32,
    seed: u64,
    monotone: bool,
    out: *mut *mut SbModel,
) -> SbStatus {
    guard(|| {
        let out = mut_arg(out, "out")?;
        *out = ptr::null_mut();
        if rewards.is_null() {
            return Err(fail(SbStatus::NullPointer, "rewards is null"));
        }
        let data = TrainingDataset::from_rewards(std::slice::from_raw_parts(rewards, len)).map_err(lift)?;
        let cfg = TrainingConfig::default().with_seed(seed);
        let model = if monotone { fit_monotone(&data, &cfg, horizon) } else { fit_unconstrained(&data, &cfg, horizon) }
            .map_err(lift)?;
        *out = Box::into_raw(Box::new(SbModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`sb_model_fit`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sb_model_free(model: *mut SbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Predicted reward at a (possibly fractional) pull index.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_model_predict(model: *const SbModel, pull_index: f64, out: *mut f64) -> SbStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        *mut_arg(out, "out")? = m.0.predict(pull_index);
        Ok(())
    })
}

/// Mean prediction over pulls `n .. n + remaining - 1`, clamped to `[0, 1]`.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_model_future_mean(
    model: *const SbModel,
    n: u32,
    remaining: u32,
    out: *mut f64,
) -> SbStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        *mut_arg(out, "out")? = estimate_future_mean(|x| m.0.predict(x), n, remaining).map_err(lift)?;
        Ok(())
    })
}

/// Hoeffding confidence radius for `n` samples in `[0, 1]`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_hoeffding_radius(n: usize, delta: f64, out: *mut f64) -> SbStatus {
    guard(|| {
        *mut_arg(out, "out")? = hoeffding_radius(n, delta).map_err(lift)?;
        Ok(())
    })
}

/// Runs every seed of a config file (or bundled config name) and writes
/// `<out_dir>/<name>.csv`. A null `out_dir` uses the config's own output
/// directory. `rows` may be null.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out_dir` null or one;
/// `rows` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sb_run_experiment(
    config: *const c_char,
    out_dir: *const c_char,
    seed_offset: u64,
    rows: *mut usize,
) -> SbStatus {
    guard(|| {
        let path = Path::new(str_arg(config, "config")?);
        let cfg = match ExperimentConfig::load(path) {
            Err(Error::ConfigNotFound(p)) => match path.to_str().and_then(bundled_config) {
                Some(text) => ExperimentConfig::parse(text),
                None => Err(Error::ConfigNotFound(p)),
            },
            other => other,
        }
        .map_err(lift)?;
        let dir = if out_dir.is_null() {
            cfg.experiment.output_dir.clone()
        } else {
            PathBuf::from(str_arg(out_dir, "out_dir")?)
        };
        let result = run_experiment(&cfg, &RunOptions { seed_offset, parallel: false }).map_err(lift)?;
        write_experiment(&cfg, &dir, &result).map_err(lift)?;
        if let Some(r) = rows.as_mut() {
            *r = result.len();
        }
        Ok(())
    })
}
