//! C ABI for the crosl optimizer.
//!
//! Every fallible function returns a [`CroslStatus`]; on failure a message is
//! available from [`crosl_last_error`] on the same thread. Optimizers are
//! opaque handles created by [`crosl_optimizer_new`] and released with
//! [`crosl_optimizer_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use crosl::benchmark::Benchmark;
use crosl::harness::{export_traces, run_experiment, ExperimentConfig};
use crosl::windfarm::{power_curve, Layout, Scenario, TurbineSpec};
use crosl::{Error, Optimizer};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CroslStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    State = 4,
    BudgetExhausted = 5,
    Io = 6,
    /// Output buffer too small; the required length was written.
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque optimizer handle.
pub struct CroslOptimizer {
    inner: Optimizer,
}

/// Statistics of one generation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CroslGenerationStats {
    pub generation: u64,
    pub best: f64,
    pub mean: f64,
    pub evaluations: u64,
    pub occupied: u64,
    pub budget_exhausted: bool,
}

/// Best, mean and population standard deviation of final fitness values.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CroslSummary {
    pub best: f64,
    pub mean: f64,
    pub std: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|&b| b != 0);
        CString::new(bytes).expect("nul bytes removed")
    });
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CroslStatus {
    match err {
        Error::Config(_) | Error::Json(_) => CroslStatus::Config,
        Error::Argument(_) | Error::OperatorInapplicable { .. } => CroslStatus::InvalidArgument,
        Error::State(_) => CroslStatus::State,
        Error::BudgetExhausted => CroslStatus::BudgetExhausted,
        Error::Io(_) | Error::Csv(_) => CroslStatus::Io,
    }
}

struct Failure(CroslStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> CroslStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CroslStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            CroslStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CroslStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CroslStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn read_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn write_buffer(src: &[f64], out: *mut f64, capacity: usize, len_out: *mut usize) -> Result<(), Failure> {
    if !len_out.is_null() {
        len_out.write(src.len());
    }
    if capacity < src.len() {
        return Err(Failure(
            CroslStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crosl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crosl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Evaluates benchmark `id` ("F1".."F15") at the `n` values of `x`.
///
/// # Safety
/// `id` must be a NUL-terminated string, `x` must point to `n` doubles and
/// `out` to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn crosl_benchmark_eval(id: *const c_char, x: *const f64, n: usize, out: *mut f64) -> CroslStatus {
    guard(|| {
        let b: Benchmark = read_str(id, "id")?.parse()?;
        let v = b.evaluate(read_slice(x, n, "x")?)?;
        write_out(out, v, "out")
    })
}

/// Output (MW) of the 3.35 MW reference turbine at wind speed `v` (m/s).
///
/// # Safety
/// `out` must point to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn crosl_power_curve(v: f64, out: *mut f64) -> CroslStatus {
    guard(|| write_out(out, power_curve(v, &TurbineSpec::default())?, "out"))
}

/// Annual energy production (MWh) of `n_turbines` turbines at interleaved
/// coordinates `xy` (x0, y0, x1, y1, ...) under the default 16-bin rose.
///
/// # Safety
/// `xy` must point to `2 * n_turbines` doubles and `out` to writable storage
/// for one double.
#[no_mangle]
pub unsafe extern "C" fn crosl_windfarm_aep(xy: *const f64, n_turbines: usize, out: *mut f64) -> CroslStatus {
    guard(|| {
        let layout = Layout::from_genome(read_slice(xy, 2 * n_turbines, "xy")?)?;
        write_out(out, Scenario::default().aep(&layout), "out")
    })
}

/// Builds an optimizer from an experiment config (JSON). The config's budget,
/// objective, substrates and variant are used; repetitions are ignored.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` must point to
/// writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn crosl_optimizer_new(
    config_json: *const c_char,
    seed: u64,
    out: *mut *mut CroslOptimizer,
) -> CroslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ExperimentConfig::from_json(read_str(config_json, "config_json")?)?;
        if cfg.substrates.is_empty() {
            return Err(Error::Config("substrate list is empty".into()).into());
        }
        let inner = Optimizer::new(cfg.objective.build()?, cfg.optimizer_config(), seed)?;
        out.write(Box::into_raw(Box::new(CroslOptimizer { inner })));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `handle` must come from [`crosl_optimizer_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn crosl_optimizer_free(handle: *mut CroslOptimizer) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn handle_mut<'a>(h: *mut CroslOptimizer) -> Result<&'a mut CroslOptimizer, Failure> {
    h.as_mut().ok_or_else(|| null("handle"))
}

/// Runs one generation. Returns `CROSL_STATUS_BUDGET_EXHAUSTED` once the
/// budget is spent. `stats` may be NULL.
///
/// # Safety
/// `handle` must be a live handle; `stats`, if not NULL, must be writable.
#[no_mangle]
pub unsafe extern "C" fn crosl_optimizer_step(handle: *mut CroslOptimizer, stats: *mut CroslGenerationStats) -> CroslStatus {
    guard(|| {
        let s = handle_mut(handle)?.inner.step()?;
        if !stats.is_null() {
            stats.write(CroslGenerationStats {
                generation: s.generation as u64,
                best: s.best,
                mean: s.mean,
                evaluations: s.evaluations,
                occupied: s.occupied as u64,
                budget_exhausted: s.budget_exhausted,
            });
        }
        Ok(())
    })
}

/// Copies the best genome into `genome` (capacity `capacity`) and its fitness
/// into `fitness`. The genome length is written to `len` when not NULL.
///
/// # Safety
/// `handle` must be live; `genome` must hold `capacity` doubles; `fitness`
/// and `len` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn crosl_optimizer_best(
    handle: *mut CroslOptimizer,
    genome: *mut f64,
    capacity: usize,
    fitness: *mut f64,
    len: *mut usize,
) -> CroslStatus {
    guard(|| {
        let best = handle_mut(handle)?.inner.best();
        if !fitness.is_null() {
            fitness.write(best.fitness);
        }
        write_buffer(&best.genome, genome, capacity, len)
    })
}

/// Copies the current substrate probabilities.
///
/// # Safety
/// Same contract as [`crosl_optimizer_best`].
#[no_mangle]
pub unsafe extern "C" fn crosl_optimizer_probabilities(
    handle: *mut CroslOptimizer,
    out: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> CroslStatus {
    guard(|| {
        let p = handle_mut(handle)?.inner.probabilities();
        write_buffer(&p, out, capacity, len)
    })
}

/// Total objective evaluations so far.
///
/// # Safety
/// `handle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crosl_optimizer_evaluations(handle: *mut CroslOptimizer, out: *mut u64) -> CroslStatus {
    guard(|| {
        let n = handle_mut(handle)?.inner.reef().evaluations_used();
        write_out(out, n, "out")
    })
}

/// Runs a full experiment; writes CSV output into `out_dir` when it is not
/// NULL and the summary into `summary` when it is not NULL.
///
/// # Safety
/// `config_json` and `out_dir` must be NUL-terminated strings (or NULL for
/// `out_dir`); `summary` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn crosl_run_experiment(
    config_json: *const c_char,
    out_dir: *const c_char,
    summary: *mut CroslSummary,
) -> CroslStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_json(read_str(config_json, "config_json")?)?;
        let res = run_experiment(&cfg)?;
        if !out_dir.is_null() {
            let dir = read_str(out_dir, "out_dir")?;
            export_traces(std::slice::from_ref(&res), Path::new(dir))?;
        }
        if !summary.is_null() {
            let s = res.summary;
            summary.write(CroslSummary { best: s.best, mean: s.mean, std: s.std });
        }
        Ok(())
    })
}
