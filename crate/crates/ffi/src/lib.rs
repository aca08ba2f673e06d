//! C ABI for the predgame engine.
//!
//! Conventions:
//! - Handles (`PgSample`, `PgGame`) are opaque; create them through the
//!   constructors and release them with the matching `_free` function.
//! - Every fallible call returns a [`PgStatus`]; on failure
//!   [`pg_last_error_message`] describes the problem for the calling thread.
//! - Structured data crosses the boundary as JSON text in the same formats
//!   the CLI uses. Returned strings are owned by the caller and must be
//!   released with [`pg_string_free`].
//! - All computation runs in floating (f64) mode.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::c_char;
use serde_json::json;

use predgame::dynamics::{
    enumerate_pure_nash, run_dynamics, verify_epsilon_pne, ScheduleKind, ScheduleSpec, Verdict,
};
use predgame::error::Error;
use predgame::io;
use predgame::linear::{best_linear_response, LinearConfig};
use predgame::model::{empirical_payoffs, monte_carlo_payoffs, EmpiricalGame, Sample};
use predgame::scenarios::{draw_sample, simulate_claim_a6};

/// Status of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgStatus {
    PgOk = 0,
    PgConfigError = 1,
    PgInputError = 2,
    PgUnsupported = 3,
    PgResourceError = 4,
    PgInternalError = 5,
    PgNullArgument = 6,
    PgInvalidUtf8 = 7,
}

/// Opaque handle to a loaded sample.
pub struct PgSample {
    inner: Sample<f64>,
}

/// Opaque handle to an empirical game.
pub struct PgGame {
    inner: EmpiricalGame<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(error: &Error) -> PgStatus {
    match error {
        Error::Config(_) => PgStatus::PgConfigError,
        Error::InvalidInput(_) | Error::Parse(_) => PgStatus::PgInputError,
        Error::Unsupported(_) => PgStatus::PgUnsupported,
        Error::Resource(_) => PgStatus::PgResourceError,
        Error::Oracle { .. } | Error::Io(_) | Error::Internal(_) => PgStatus::PgInternalError,
    }
}

fn fail(error: Error) -> PgStatus {
    set_error(&error.to_string());
    status_of(&error)
}

/// Run a fallible body, translating errors and panics into statuses.
fn guarded(body: impl FnOnce() -> Result<(), Error>) -> PgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PgStatus::PgOk,
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_error("internal panic");
            PgStatus::PgInternalError
        }
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string or null.
unsafe fn text_arg<'a>(ptr: *const c_char) -> Result<&'a str, PgStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(PgStatus::PgNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        PgStatus::PgInvalidUtf8
    })
}

fn give_string(out: *mut *mut c_char, text: String) -> Result<(), Error> {
    let c = CString::new(text.replace('\0', " ")).map_err(|e| Error::Internal(e.to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn pg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the calling thread's most recent failure; valid until
/// the next failing call on this thread. Do not free.
#[no_mangle]
pub extern "C" fn pg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string returned by this library.
///
/// # Safety
/// `ptr` must come from a `*_json` out-parameter of this library and must
/// not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn pg_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Read a sample from a CSV file with header `x1,...,xn,y,t`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn pg_sample_read_csv(
    path: *const c_char,
    out: *mut *mut PgSample,
) -> PgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return PgStatus::PgNullArgument;
    }
    let path = match text_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    guarded(|| {
        let sample = io::read_sample_csv_path::<f64>(std::path::Path::new(path))?;
        *out = Box::into_raw(Box::new(PgSample { inner: sample }));
        Ok(())
    })
}

/// Parse a sample from its JSON descriptor.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pg_sample_from_json(
    json: *const c_char,
    out: *mut *mut PgSample,
) -> PgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return PgStatus::PgNullArgument;
    }
    let text = match text_arg(json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let sample = io::sample_from_value::<f64>(&value)?;
        *out = Box::into_raw(Box::new(PgSample { inner: sample }));
        Ok(())
    })
}

/// Draw a seeded sample from a distribution descriptor (JSON).
///
/// # Safety
/// `dist_json` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pg_sample_draw(
    dist_json: *const c_char,
    m: usize,
    seed: u64,
    out: *mut *mut PgSample,
) -> PgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return PgStatus::PgNullArgument;
    }
    let text = match text_arg(dist_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let dist = io::distribution_from_value::<f64>(&value)?;
        let sample = draw_sample(&dist, m, seed)?;
        *out = Box::into_raw(Box::new(PgSample { inner: sample }));
        Ok(())
    })
}

/// Number of points in the sample; zero for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn pg_sample_len(sample: *const PgSample) -> usize {
    if sample.is_null() {
        return 0;
    }
    (*sample).inner.len()
}

/// # Safety
/// `sample` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pg_sample_free(sample: *mut PgSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Parse an empirical game from its JSON descriptor.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pg_game_from_json(json: *const c_char, out: *mut *mut PgGame) -> PgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return PgStatus::PgNullArgument;
    }
    let text = match text_arg(json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let game = io::game_from_value::<f64>(&value)?;
        *out = Box::into_raw(Box::new(PgGame { inner: game }));
        Ok(())
    })
}

/// Number of players; zero for a null handle.
///
/// # Safety
/// `game` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn pg_game_players(game: *const PgGame) -> usize {
    if game.is_null() {
        return 0;
    }
    (*game).inner.num_players()
}

/// # Safety
/// `game` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pg_game_free(game: *mut PgGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Minimal sample size for the accuracy/confidence pair.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pg_required_sample_size(
    epsilon: f64,
    delta: f64,
    d: u64,
    players: u64,
    out: *mut u64,
) -> PgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return PgStatus::PgNullArgument;
    }
    guarded(|| {
        let m = predgame::bounds::required_sample_size(&predgame::bounds::BoundInputs {
            epsilon,
            delta,
            d,
            players,
        })?;
        *out = m;
        Ok(())
    })
}

/// Uniform-convergence tail bound at sample size `m`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pg_uniform_convergence_bound(
    m: u64,
    epsilon: f64,
    d: u64,
    players: u64,
    out: *mut f64,
) -> PgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return PgStatus::PgNullArgument;
    }
    guarded(|| {
        *out = predgame::bounds::uniform_convergence_bound(m, epsilon, d, players)?;
        Ok(())
    })
}

/// Frequency of fair-coin runs of length `m` whose mean lies strictly
/// between one half and three quarters.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pg_simulate_claim_a6(
    trials: u64,
    m: u64,
    seed: u64,
    out: *mut f64,
) -> PgStatus {
    if out.is_null() {
        set_error("null out pointer");
        return PgStatus::PgNullArgument;
    }
    guarded(|| {
        *out = simulate_claim_a6(trials, m, seed)?;
        Ok(())
    })
}

/// Per-player empirical payoffs of a profile (JSON array of numbers).
///
/// # Safety
/// Pointer arguments must be valid; `profile_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pg_empirical_payoffs_json(
    game: *const PgGame,
    profile_json: *const c_char,
    out_json: *mut *mut c_char,
) -> PgStatus {
    if game.is_null() || out_json.is_null() {
        set_error("null argument");
        return PgStatus::PgNullArgument;
    }
    let text = match text_arg(profile_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let game = &(*game).inner;
    guarded(|| {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let profile = io::profile_from_value::<f64>(&value)?;
        let payoffs = empirical_payoffs(game, &profile)?;
        give_string(out_json, json!(payoffs.values()).to_string())
    })
}

/// Run better-response dynamics from the default (or given) starting
/// profile with a round-robin schedule. `initial_json` may be null;
/// `max_iterations` of zero means unlimited. The result JSON carries the
/// final profile, step count, termination flag, payoffs, and potential.
///
/// # Safety
/// Pointer arguments must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pg_run_dynamics_json(
    game: *const PgGame,
    initial_json: *const c_char,
    epsilon: f64,
    max_iterations: u64,
    out_json: *mut *mut c_char,
) -> PgStatus {
    if game.is_null() || out_json.is_null() {
        set_error("null argument");
        return PgStatus::PgNullArgument;
    }
    let initial_text = if initial_json.is_null() {
        None
    } else {
        match text_arg(initial_json) {
            Ok(t) => Some(t),
            Err(status) => return status,
        }
    };
    let game = &(*game).inner;
    guarded(|| {
        let initial = match initial_text {
            Some(text) => {
                let value: serde_json::Value = serde_json::from_str(text)?;
                io::profile_from_value::<f64>(&value)?
            }
            None => game.default_profile(),
        };
        let schedule = ScheduleSpec {
            kind: ScheduleKind::RoundRobin,
            max_iterations: (max_iterations > 0).then_some(max_iterations),
        };
        let oracles = predgame::cli::default_oracles(game);
        let (profile, trace) = run_dynamics(game, initial, &epsilon, &oracles, &schedule)?;
        let payoffs = empirical_payoffs(game, &profile)?;
        let potential = predgame::dynamics::potential(game, &profile)?;
        give_string(
            out_json,
            json!({
                "profile": io::profile_to_value(&profile),
                "iterations": trace.iterations,
                "terminated": trace.terminated,
                "final_payoffs": payoffs.values(),
                "potential": potential,
            })
            .to_string(),
        )
    })
}

/// Check a profile for approximate-equilibrium violations. The result JSON
/// carries the verdict and, on violation, the player, gain, and witness.
///
/// # Safety
/// Pointer arguments must be valid; `profile_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pg_verify_epsilon_pne_json(
    game: *const PgGame,
    profile_json: *const c_char,
    epsilon: f64,
    out_json: *mut *mut c_char,
) -> PgStatus {
    if game.is_null() || out_json.is_null() {
        set_error("null argument");
        return PgStatus::PgNullArgument;
    }
    let text = match text_arg(profile_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let game = &(*game).inner;
    guarded(|| {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let profile = io::profile_from_value::<f64>(&value)?;
        let oracles = predgame::cli::default_oracles(game);
        let outcome = verify_epsilon_pne(game, &profile, &epsilon, &oracles)?;
        let body = match outcome.verdict {
            Verdict::Holds => json!({"verdict": "holds", "advisory": outcome.advisory}),
            Verdict::Violated {
                player,
                witness,
                gain,
            } => json!({
                "verdict": "violated",
                "advisory": outcome.advisory,
                "player": player,
                "gain": gain,
                "witness": io::hypothesis_to_value(&witness),
            }),
        };
        give_string(out_json, body.to_string())
    })
}

/// Enumerate all exact pure equilibria of a finite game (budget on the
/// profile count). The result JSON carries the count and the profiles.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn pg_enumerate_pne_json(
    game: *const PgGame,
    budget: u64,
    out_json: *mut *mut c_char,
) -> PgStatus {
    if game.is_null() || out_json.is_null() {
        set_error("null argument");
        return PgStatus::PgNullArgument;
    }
    let game = &(*game).inner;
    guarded(|| {
        let profiles = enumerate_pure_nash(game, budget)?;
        give_string(
            out_json,
            json!({
                "count": profiles.len(),
                "profiles": profiles.iter().map(io::profile_to_value).collect::<Vec<_>>(),
            })
            .to_string(),
        )
    })
}

/// Best linear response to an opponent profile (JSON, may be null for an
/// empty market) on a sample. The result JSON carries the hypothesis, its
/// payoff, and the chosen region labels.
///
/// # Safety
/// Pointer arguments must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pg_best_linear_response_json(
    sample: *const PgSample,
    opponents_json: *const c_char,
    out_json: *mut *mut c_char,
) -> PgStatus {
    if sample.is_null() || out_json.is_null() {
        set_error("null argument");
        return PgStatus::PgNullArgument;
    }
    let opponents_text = if opponents_json.is_null() {
        None
    } else {
        match text_arg(opponents_json) {
            Ok(t) => Some(t),
            Err(status) => return status,
        }
    };
    let sample = &(*sample).inner;
    guarded(|| {
        let opponents = match opponents_text {
            Some(text) => {
                let value: serde_json::Value = serde_json::from_str(text)?;
                io::profile_from_value::<f64>(&value)?.strategies
            }
            None => Vec::new(),
        };
        let response = best_linear_response(sample, &opponents, &LinearConfig::default())?;
        give_string(
            out_json,
            json!({
                "hypothesis": io::hypothesis_to_value(&response.hypothesis),
                "payoff": response.payoff,
                "region": response.region.to_text(),
            })
            .to_string(),
        )
    })
}

/// Monte Carlo population payoffs of a profile under a distribution
/// descriptor. The result JSON carries payoff estimates and standard
/// errors.
///
/// # Safety
/// Pointer arguments must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pg_monte_carlo_payoffs_json(
    dist_json: *const c_char,
    profile_json: *const c_char,
    draws: u64,
    seed: u64,
    out_json: *mut *mut c_char,
) -> PgStatus {
    if out_json.is_null() {
        set_error("null argument");
        return PgStatus::PgNullArgument;
    }
    let dist_text = match text_arg(dist_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let profile_text = match text_arg(profile_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let dist_value: serde_json::Value = serde_json::from_str(dist_text)?;
        let dist = io::distribution_from_value::<f64>(&dist_value)?;
        let profile_value: serde_json::Value = serde_json::from_str(profile_text)?;
        let profile = io::profile_from_value::<f64>(&profile_value)?;
        let estimate = monte_carlo_payoffs(&dist, &profile, draws, seed)?;
        give_string(
            out_json,
            json!({
                "payoffs": estimate.payoffs.values(),
                "std_errors": estimate.std_errors,
                "draws": estimate.draws,
            })
            .to_string(),
        )
    })
}
