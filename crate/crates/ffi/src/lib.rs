//! C interface to `parbo`.
//!
//! Every function returns a [`ParboStatus`]; results go through out-pointers.
//! On failure [`parbo_last_error_message`] describes the error of the most
//! recent call on the calling thread. Handles are opaque and must be released
//! with their `_free` function. Panics never cross the boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use parbo::acquisition::{p_nondominated, AcquisitionConfig, AcquisitionWeights};
use parbo::ehvi::{evi_exact, evi_truncated};
use parbo::optimizer::{optimize, DeConfig, OptimizerConfig, PolishConfig, StoppingCriterion};
use parbo::pareto::{hypervolume, pareto_indices};
use parbo::problems::{lookup, BenchmarkProblem, BlackBox};
use parbo::surrogate::{ClassifierKind, NormalPrediction, RegressorKind};
use parbo::{Bounds, Dataset, Error, Sample};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParboStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownProblem = 3,
    EvaluationFailed = 4,
    IndexOutOfRange = 5,
    Internal = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(ParboStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownProblem(_) => ParboStatus::UnknownProblem,
            Error::InvalidConfig(_) | Error::NotEnoughData(_) | Error::EmptyParetoSet => ParboStatus::InvalidArgument,
            Error::Evaluation(_) => ParboStatus::EvaluationFailed,
            _ => ParboStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: ParboStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ParboStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ParboStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            ParboStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        fail(ParboStatus::NullPointer, format!("`{name}` is null"))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must point to `len` readable values unless `len` is 0.
unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must point to `n_points * n_obj` readable values (row-major).
unsafe fn points(p: *const f64, n_points: usize, n_obj: usize) -> Result<Vec<Vec<f64>>, Failure> {
    if n_obj == 0 {
        return fail(ParboStatus::InvalidArgument, "at least one objective is required");
    }
    let flat = slice(p, n_points * n_obj, "points")?;
    Ok(flat.chunks(n_obj).map(<[f64]>::to_vec).collect())
}

/// # Safety
/// `out` must be valid for writes.
unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    non_null(out, name)?;
    out.write(value);
    Ok(())
}

unsafe fn prediction(mu: *const f64, sigma: *const f64, n_obj: usize) -> Result<NormalPrediction, Failure> {
    let mu = slice(mu, n_obj, "mu")?.to_vec();
    let sigma = slice(sigma, n_obj, "sigma")?.to_vec();
    if sigma.iter().any(|s| !(*s >= 0.0)) || mu.iter().any(|m| !m.is_finite()) {
        return fail(ParboStatus::InvalidArgument, "mu must be finite and sigma non-negative");
    }
    Ok(NormalPrediction::new(mu, sigma))
}

/// Message describing the last failed call on this thread; empty after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn parbo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn parbo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Dominated hypervolume of `n_points` row-major objective vectors.
///
/// # Safety
/// `points` holds `n_points * n_obj` values, `reference` holds `n_obj`.
#[no_mangle]
pub unsafe extern "C" fn parbo_hypervolume(
    points: *const f64,
    n_points: usize,
    n_obj: usize,
    reference: *const f64,
    out: *mut f64,
) -> ParboStatus {
    guard(|| {
        let pts = self::points(points, n_points, n_obj)?;
        let r = slice(reference, n_obj, "reference")?;
        write(out, hypervolume(&pts, r), "out")
    })
}

/// Closed-form expected hypervolume improvement of a normal prediction.
///
/// # Safety
/// `front` holds `n_points * n_obj` values; `reference`, `mu`, `sigma` hold `n_obj`.
#[no_mangle]
pub unsafe extern "C" fn parbo_evi(
    front: *const f64,
    n_points: usize,
    n_obj: usize,
    reference: *const f64,
    mu: *const f64,
    sigma: *const f64,
    out: *mut f64,
) -> ParboStatus {
    guard(|| {
        let f = points(front, n_points, n_obj)?;
        let r = slice(reference, n_obj, "reference")?;
        let p = prediction(mu, sigma, n_obj)?;
        write(out, evi_exact(&f, r, &p), "out")
    })
}

/// EVI restricted to sectors meeting the `sigma_ref` ellipsoid.
///
/// # Safety
/// As [`parbo_evi`].
#[no_mangle]
pub unsafe extern "C" fn parbo_evi_truncated(
    front: *const f64,
    n_points: usize,
    n_obj: usize,
    reference: *const f64,
    mu: *const f64,
    sigma: *const f64,
    sigma_ref: f64,
    out: *mut f64,
) -> ParboStatus {
    guard(|| {
        if !(sigma_ref > 0.0) {
            return fail(ParboStatus::InvalidArgument, "sigma_ref must be positive");
        }
        let f = points(front, n_points, n_obj)?;
        let r = slice(reference, n_obj, "reference")?;
        let p = prediction(mu, sigma, n_obj)?;
        write(out, evi_truncated(&f, r, &p, sigma_ref), "out")
    })
}

/// Probability that a prediction is not dominated by any point of `front`.
///
/// # Safety
/// `front` holds `n_points * n_obj` values; `mu`, `sigma` hold `n_obj`.
#[no_mangle]
pub unsafe extern "C" fn parbo_p_nondominated(
    front: *const f64,
    n_points: usize,
    n_obj: usize,
    mu: *const f64,
    sigma: *const f64,
    out: *mut f64,
) -> ParboStatus {
    guard(|| {
        let f = points(front, n_points, n_obj)?;
        let p = prediction(mu, sigma, n_obj)?;
        write(out, p_nondominated(&f, &p), "out")
    })
}

/// A benchmark problem from the registry.
pub struct ParboProblem {
    inner: BenchmarkProblem,
}

/// Looks up a problem by name (case-insensitive).
///
/// # Safety
/// `name` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn parbo_problem_new(name: *const c_char, out: *mut *mut ParboProblem) -> ParboStatus {
    guard(|| {
        non_null(name, "name")?;
        let name = CStr::from_ptr(name)
            .to_str()
            .or_else(|_| fail(ParboStatus::InvalidArgument, "name is not UTF-8"))?;
        let p = Box::new(ParboProblem { inner: lookup(name)? });
        write(out, Box::into_raw(p), "out")
    })
}

/// # Safety
/// `problem` comes from [`parbo_problem_new`] and is not used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn parbo_problem_free(problem: *mut ParboProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Design dimension and number of objectives.
///
/// # Safety
/// `problem` is a live handle; the out-pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn parbo_problem_dims(
    problem: *const ParboProblem,
    dim: *mut usize,
    n_obj: *mut usize,
) -> ParboStatus {
    guard(|| {
        non_null(problem, "problem")?;
        let p = &(*problem).inner;
        write(dim, p.dim(), "dim")?;
        write(n_obj, p.n_objectives, "n_obj")
    })
}

/// Lower and upper bounds of the design space.
///
/// # Safety
/// `lower` and `upper` each hold `dim` writable values.
#[no_mangle]
pub unsafe extern "C" fn parbo_problem_bounds(
    problem: *const ParboProblem,
    lower: *mut f64,
    upper: *mut f64,
) -> ParboStatus {
    guard(|| {
        non_null(problem, "problem")?;
        non_null(lower, "lower")?;
        non_null(upper, "upper")?;
        let b = &(*problem).inner.bounds;
        std::ptr::copy_nonoverlapping(b.lower().as_ptr(), lower, b.dim());
        std::ptr::copy_nonoverlapping(b.upper().as_ptr(), upper, b.dim());
        Ok(())
    })
}

/// Evaluates a design: writes the objectives to `y` and 1 (feasible) or 0 to
/// `feasible`. Objectives are written for infeasible designs too.
///
/// # Safety
/// `x` holds `dim` values, `y` has room for `n_obj`.
#[no_mangle]
pub unsafe extern "C" fn parbo_problem_evaluate(
    problem: *const ParboProblem,
    x: *const f64,
    y: *mut f64,
    feasible: *mut i32,
) -> ParboStatus {
    guard(|| {
        non_null(problem, "problem")?;
        let p = &(*problem).inner;
        let x = slice(x, p.dim(), "x")?;
        if !p.bounds.contains(x) {
            return fail(ParboStatus::InvalidArgument, "design outside the bounds");
        }
        non_null(y, "y")?;
        let obj = p.objectives(x);
        std::ptr::copy_nonoverlapping(obj.as_ptr(), y, obj.len());
        write(feasible, i32::from(p.is_feasible(x)), "feasible")
    })
}

/// Settings of [`parbo_optimize`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParboOptions {
    pub n_seq: usize,
    pub n_initial: usize,
    /// Total evaluations including the initial sample.
    pub max_evaluations: usize,
    pub seed: u64,
    pub w_opt: f64,
    pub w_con: f64,
    pub w_exp: f64,
    pub gamma: f64,
    pub sigma_ref: f64,
    pub epsilon: f64,
    /// 0: Gaussian process (Matérn 5/2), 1: Bayesian polynomial ridge.
    pub regressor: i32,
    /// 0: SVM with Platt scaling, 1: Laplace GP classifier.
    pub classifier: i32,
}

/// Generic defaults: all three acquisition terms weighted equally.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn parbo_options_default(out: *mut ParboOptions) -> ParboStatus {
    guard(|| {
        write(
            out,
            ParboOptions {
                n_seq: 1,
                n_initial: 10,
                max_evaluations: 50,
                seed: 0,
                w_opt: 1.0,
                w_con: 1.0,
                w_exp: 1.0,
                gamma: 1.0,
                sigma_ref: 1.0,
                epsilon: 1.0,
                regressor: 0,
                classifier: 0,
            },
            "out",
        )
    })
}

/// The tuned settings of a registry problem.
///
/// # Safety
/// `problem` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn parbo_options_for_problem(
    problem: *const ParboProblem,
    out: *mut ParboOptions,
) -> ParboStatus {
    guard(|| {
        non_null(problem, "problem")?;
        let p = &(*problem).inner;
        write(
            out,
            ParboOptions {
                n_seq: 1,
                n_initial: p.n_initial,
                max_evaluations: p.n_initial + 50,
                seed: 0,
                w_opt: p.weights.opt,
                w_con: p.weights.con,
                w_exp: p.weights.exp,
                gamma: p.gamma,
                sigma_ref: p.sigma_ref,
                epsilon: p.epsilon,
                regressor: match p.regressor {
                    RegressorKind::GpMatern => 0,
                    RegressorKind::BayesRidgePoly => 1,
                },
                classifier: 0,
            },
            "out",
        )
    })
}

/// Black-box callback. Writes `n_obj` objectives to `y` and returns 1 when
/// `x` is feasible, 0 when infeasible (then `y` is ignored) and a negative
/// value on failure, which aborts the run.
pub type ParboEvaluateFn =
    Option<unsafe extern "C" fn(user_data: *mut c_void, x: *const f64, dim: usize, y: *mut f64, n_obj: usize) -> i32>;

struct CallbackProblem {
    bounds: Bounds,
    n_obj: usize,
    callback: unsafe extern "C" fn(*mut c_void, *const f64, usize, *mut f64, usize) -> i32,
    user_data: *mut c_void,
}

impl BlackBox for CallbackProblem {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn n_objectives(&self) -> usize {
        self.n_obj
    }

    fn evaluate(&self, x: &[f64]) -> parbo::Result<Sample> {
        let mut y = vec![f64::NAN; self.n_obj];
        let code = unsafe { (self.callback)(self.user_data, x.as_ptr(), x.len(), y.as_mut_ptr(), self.n_obj) };
        match code {
            1 if y.iter().all(|v| v.is_finite()) => Ok(Sample::feasible(x.to_vec(), y)),
            1 => Err(Error::Evaluation("callback returned non-finite objectives".into())),
            0 => Ok(Sample::infeasible(x.to_vec())),
            c => Err(Error::Evaluation(format!("callback returned {c}"))),
        }
    }
}

/// Outcome of [`parbo_optimize`]: the evaluated data and its Pareto front.
pub struct ParboResult {
    dataset: Dataset,
    front: Vec<usize>,
    dim: usize,
    n_obj: usize,
}

/// Runs the adaptive optimizer on a callback black box. Initial samples are
/// drawn uniformly from the full bounds.
///
/// # Safety
/// `lower`, `upper` hold `dim` values; `reference` holds `n_obj`; `options`
/// is readable; `callback` is safe to call with `user_data`; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn parbo_optimize(
    lower: *const f64,
    upper: *const f64,
    dim: usize,
    n_obj: usize,
    reference: *const f64,
    options: *const ParboOptions,
    callback: ParboEvaluateFn,
    user_data: *mut c_void,
    out: *mut *mut ParboResult,
) -> ParboStatus {
    guard(|| {
        non_null(options, "options")?;
        non_null(out, "out")?;
        let Some(callback) = callback else {
            return fail(ParboStatus::NullPointer, "`callback` is null");
        };
        if dim == 0 || n_obj == 0 {
            return fail(ParboStatus::InvalidArgument, "dim and n_obj must be positive");
        }
        let lo = slice(lower, dim, "lower")?;
        let hi = slice(upper, dim, "upper")?;
        if lo.iter().zip(hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h)) {
            return fail(ParboStatus::InvalidArgument, "bounds must be finite with lower < upper");
        }
        let reference = slice(reference, n_obj, "reference")?.to_vec();
        let o = *options;
        if o.n_seq == 0 || o.n_initial == 0 {
            return fail(ParboStatus::InvalidArgument, "n_seq and n_initial must be positive");
        }
        let regressor = match o.regressor {
            0 => RegressorKind::GpMatern,
            1 => RegressorKind::BayesRidgePoly,
            r => return fail(ParboStatus::InvalidArgument, format!("unknown regressor {r}")),
        };
        let classifier = match o.classifier {
            0 => ClassifierKind::SvmPlatt,
            1 => ClassifierKind::GpLaplace,
            c => return fail(ParboStatus::InvalidArgument, format!("unknown classifier {c}")),
        };
        let intervals: Vec<(f64, f64)> = lo.iter().copied().zip(hi.iter().copied()).collect();
        let problem = CallbackProblem {
            bounds: Bounds::new(&intervals),
            n_obj,
            callback,
            user_data,
        };
        let cfg = OptimizerConfig {
            acquisition: AcquisitionConfig {
                weights: AcquisitionWeights {
                    opt: o.w_opt,
                    con: o.w_con,
                    exp: o.w_exp,
                },
                gamma: o.gamma,
                sigma_ref: o.sigma_ref,
                epsilon: o.epsilon,
                reference,
            },
            n_seq: o.n_seq,
            regressor,
            classifier,
            de: DeConfig::default(),
            polish: PolishConfig::default(),
        };
        let stop = StoppingCriterion::max_evaluations(o.max_evaluations.max(o.n_initial));
        let run = optimize(&problem, &problem.bounds, o.n_initial, &cfg, &stop, o.seed).map_err(|a| Failure::from(a.error))?;
        let dataset = run.state.dataset;
        let feasible: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.samples()[i].feasibility.is_feasible())
            .collect();
        let ys: Vec<&[f64]> = feasible
            .iter()
            .map(|&i| dataset.samples()[i].objectives().expect("feasible"))
            .collect();
        let front = pareto_indices(&ys).into_iter().map(|k| feasible[k]).collect();
        let result = Box::new(ParboResult {
            dataset,
            front,
            dim,
            n_obj,
        });
        write(out, Box::into_raw(result), "out")
    })
}

/// # Safety
/// `result` comes from [`parbo_optimize`] and is not used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn parbo_result_free(result: *mut ParboResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of evaluated designs and number of Pareto-optimal ones.
///
/// # Safety
/// `result` is a live handle; the out-pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn parbo_result_sizes(
    result: *const ParboResult,
    n_evaluations: *mut usize,
    front_len: *mut usize,
) -> ParboStatus {
    guard(|| {
        non_null(result, "result")?;
        let r = &*result;
        write(n_evaluations, r.dataset.len(), "n_evaluations")?;
        write(front_len, r.front.len(), "front_len")
    })
}

unsafe fn copy_sample(r: &ParboResult, index: usize, x: *mut f64, y: *mut f64, feasible: *mut i32) -> Result<(), Failure> {
    let s = r
        .dataset
        .samples()
        .get(index)
        .ok_or_else(|| Failure(ParboStatus::IndexOutOfRange, format!("index {index} out of range")))?;
    non_null(x, "x")?;
    std::ptr::copy_nonoverlapping(s.x.as_ptr(), x, r.dim);
    if let Some(obj) = s.objectives() {
        non_null(y, "y")?;
        std::ptr::copy_nonoverlapping(obj.as_ptr(), y, r.n_obj);
    }
    if !feasible.is_null() {
        feasible.write(i32::from(s.feasibility.is_feasible()));
    }
    Ok(())
}

/// The `index`-th Pareto-optimal design and its objectives.
///
/// # Safety
/// `x` has room for `dim` values, `y` for `n_obj`.
#[no_mangle]
pub unsafe extern "C" fn parbo_result_front_point(
    result: *const ParboResult,
    index: usize,
    x: *mut f64,
    y: *mut f64,
) -> ParboStatus {
    guard(|| {
        non_null(result, "result")?;
        let r = &*result;
        let &i = r
            .front
            .get(index)
            .ok_or_else(|| Failure(ParboStatus::IndexOutOfRange, format!("front index {index} out of range")))?;
        copy_sample(r, i, x, y, std::ptr::null_mut())
    })
}

/// The `index`-th evaluated design in evaluation order. `y` is left
/// untouched for infeasible designs; `feasible` may be null.
///
/// # Safety
/// `x` has room for `dim` values, `y` for `n_obj`.
#[no_mangle]
pub unsafe extern "C" fn parbo_result_sample(
    result: *const ParboResult,
    index: usize,
    x: *mut f64,
    y: *mut f64,
    feasible: *mut i32,
) -> ParboStatus {
    guard(|| {
        non_null(result, "result")?;
        copy_sample(&*result, index, x, y, feasible)
    })
}
