//! C interface to `hubo-factor`.
//!
//! Models and reports are opaque heap handles released with their `_free`
//! functions. Every fallible call returns an [`HfStatus`]; the message of the
//! last failure on the calling thread is available from
//! [`hf_last_error_message`]. Big integers cross the boundary as
//! NUL-terminated decimal strings. Outputs that are strings are copied into
//! caller buffers: a call reports the needed size (terminator included)
//! through `needed` and returns `HF_STATUS_BUFFER_TOO_SMALL` when the buffer
//! is shorter.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hubo_factor::io::{decimal, load_model, model_to_json, report_to_json, save_model};
use hubo_factor::quadratize::quadratize_model;
use hubo_factor::search::{factor, FactorOptions, Method, SolveReport};
use hubo_factor::{build_plain_hubo, build_range_hubo, Assignment, Error, FactorLayout, FactorModel, ReductionLedger};
use num_bigint::BigInt;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NotFound = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    InvalidNumber = 4,
    TooManyVariables = 5,
    Io = 6,
    Parse = 7,
    VersionMismatch = 8,
    BufferTooSmall = 9,
    Ambiguous = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfMethod {
    Exact = 0,
    Sa = 1,
    Range = 2,
    Decomp = 3,
    QuboExact = 4,
    QuboSa = 5,
}

impl From<HfMethod> for Method {
    fn from(m: HfMethod) -> Self {
        match m {
            HfMethod::Exact => Method::Exact,
            HfMethod::Sa => Method::Sa,
            HfMethod::Range => Method::Range,
            HfMethod::Decomp => Method::Decomp,
            HfMethod::QuboExact => Method::QuboExact,
            HfMethod::QuboSa => Method::QuboSa,
        }
    }
}

/// Solve settings. Fill with [`hf_options_default`] and override fields.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct HfOptions {
    pub method: HfMethod,
    /// Bits per factor; 0 picks the default for `N`.
    pub bits: u32,
    pub fix_lsb: bool,
    /// Worker threads for block search and annealing; at least 1.
    pub workers: u32,
    pub sweeps: u64,
    pub restarts: u64,
    pub seed: u64,
    /// Range-search stride as a decimal string, or NULL for `2^bits`.
    pub stride: *const c_char,
    /// Range-search block limit; 0 means unlimited.
    pub max_blocks: u64,
}

/// A factorization model, optionally with its quadratization ledger.
pub struct HfModel {
    model: FactorModel,
    ledger: Option<ReductionLedger>,
}

pub struct HfReport {
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> HfStatus {
    match e {
        Error::NumberTooSmall(_) | Error::NotOddCapable(_) => HfStatus::InvalidNumber,
        Error::TooManyVariables { .. } => HfStatus::TooManyVariables,
        Error::Io { .. } => HfStatus::Io,
        Error::Parse { .. } => HfStatus::Parse,
        Error::VersionMismatch { .. } => HfStatus::VersionMismatch,
        Error::StageMinimumAmbiguous { .. } => HfStatus::Ambiguous,
        _ => HfStatus::InvalidArgument,
    }
}

type FfiResult<T> = Result<T, HfStatus>;

fn fail<T>(status: HfStatus, msg: impl Into<String>) -> FfiResult<T> {
    set_error(msg);
    Err(status)
}

fn lib<T>(r: hubo_factor::Result<T>) -> FfiResult<T> {
    r.or_else(|e| fail(status_of(&e), e.to_string()))
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> FfiResult<HfStatus>) -> HfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            HfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(HfStatus::NullPointer, format!("{what} is NULL"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(_) => fail(HfStatus::InvalidArgument, format!("{what} is not UTF-8")),
    }
}

unsafe fn big_arg(p: *const c_char, what: &str) -> FfiResult<BigInt> {
    let s = str_arg(p, what)?;
    decimal::parse(s).or_else(|e| fail(HfStatus::InvalidNumber, format!("{what}: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    match p.as_ref() {
        Some(r) => Ok(r),
        None => fail(HfStatus::NullPointer, format!("{what} is NULL")),
    }
}

/// Copies `s` plus a terminator into `buf`.
unsafe fn write_str(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> FfiResult<HfStatus> {
    match copy_out(s, buf, len, needed) {
        HfStatus::Ok => Ok(HfStatus::Ok),
        st => fail(st, format!("need {} bytes", s.len() + 1)),
    }
}

/// As [`write_str`] without touching the stored error message.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> HfStatus {
    let n = s.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if buf.is_null() || len < n {
        return HfStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    HfStatus::Ok
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> FfiResult<HfStatus> {
    if out.is_null() {
        return fail(HfStatus::NullPointer, "output handle pointer is NULL");
    }
    *out = Box::into_raw(Box::new(value));
    Ok(HfStatus::Ok)
}

/// Copies the last error message of this thread into `buf`.
///
/// # Safety
/// `buf` must be valid for `len` bytes or NULL; `needed` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> HfStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    copy_out(&msg, buf, len, needed)
}

/// Static, NUL-terminated library version.
#[no_mangle]
pub extern "C" fn hf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_options_default(out: *mut HfOptions) -> HfStatus {
    guard(|| {
        let out = match out.as_mut() {
            Some(o) => o,
            None => return fail(HfStatus::NullPointer, "options pointer is NULL"),
        };
        let d = FactorOptions::default();
        *out = HfOptions {
            method: HfMethod::Exact,
            bits: 0,
            fix_lsb: false,
            workers: 1,
            sweeps: d.schedule.sweeps,
            restarts: d.schedule.restarts,
            seed: d.schedule.seed,
            stride: ptr::null(),
            max_blocks: 0,
        };
        Ok(HfStatus::Ok)
    })
}

/// Builds the plain model of `(pq - N)^2` with `bits` bits per factor.
///
/// # Safety
/// `n` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_model_build(
    n: *const c_char,
    bits: u32,
    fix_lsb: bool,
    out: *mut *mut HfModel,
) -> HfStatus {
    guard(|| {
        let n = big_arg(n, "n")?;
        let layout = if fix_lsb {
            FactorLayout::odd(bits)
        } else {
            FactorLayout::plain(bits)
        };
        let model = lib(build_plain_hubo(&n, &layout))?;
        put(out, HfModel { model, ledger: None })
    })
}

/// Builds the model restricted to `p in s_i + [0, 2^bits)`,
/// `q in s_j + [0, 2^bits)`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_model_build_range(
    n: *const c_char,
    bits: u32,
    fix_lsb: bool,
    s_i: *const c_char,
    s_j: *const c_char,
    out: *mut *mut HfModel,
) -> HfStatus {
    guard(|| {
        let n = big_arg(n, "n")?;
        let layout = FactorLayout {
            n: bits,
            fix_lsb,
            s_i: big_arg(s_i, "s_i")?,
            s_j: big_arg(s_j, "s_j")?,
        };
        let model = lib(build_range_hubo(&n, &layout))?;
        put(out, HfModel { model, ledger: None })
    })
}

/// Quadratizes a model into a new handle carrying the reduction ledger.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_model_quadratize(model: *const HfModel, out: *mut *mut HfModel) -> HfStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let (reduced, ledger) = lib(quadratize_model(&m.model))?;
        put(
            out,
            HfModel {
                model: reduced,
                ledger: Some(ledger),
            },
        )
    })
}

/// Variables of the model, ancillas included; 0 for NULL.
///
/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_model_num_vars(model: *const HfModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.num_vars)
}

/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_model_num_terms(model: *const HfModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.poly.num_terms())
}

/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_model_degree(model: *const HfModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.poly.degree())
}

/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_model_ancillas(model: *const HfModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.ancilla_count())
}

/// Full-convention energy (`(pq - N)^2` plus any gadget penalty) of a
/// 0/1 assignment, as a decimal string.
///
/// # Safety
/// `bits` must be valid for `len` bytes; `buf` for `buf_len` bytes or NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_model_energy(
    model: *const HfModel,
    bits: *const u8,
    len: usize,
    buf: *mut c_char,
    buf_len: usize,
    needed: *mut usize,
) -> HfStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        if bits.is_null() && len > 0 {
            return fail(HfStatus::NullPointer, "bits is NULL");
        }
        let slice = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(bits, len)
        };
        let a = Assignment::from_bits(slice.iter().map(|&b| b != 0));
        let e = lib(m.model.poly.evaluate(&a))?;
        write_str(&e.to_string(), buf, buf_len, needed)
    })
}

/// The model as JSON text.
///
/// # Safety
/// `buf` must be valid for `len` bytes or NULL; `needed` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_model_to_json(
    model: *const HfModel,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HfStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        write_str(&model_to_json(&m.model, m.ledger.as_ref()), buf, len, needed)
    })
}

/// # Safety
/// `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hf_model_save(model: *const HfModel, path: *const c_char) -> HfStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let path = str_arg(path, "path")?;
        lib(save_model(&m.model, m.ledger.as_ref(), path))?;
        Ok(HfStatus::Ok)
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_model_load(path: *const c_char, out: *mut *mut HfModel) -> HfStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let (model, ledger) = lib(load_model(path))?;
        put(out, HfModel { model, ledger })
    })
}

/// Releases a model; NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hf_model_free(model: *mut HfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Factors `N`. Returns `HF_STATUS_OK` with a report whether or not factors
/// were found; check [`hf_report_found`].
///
/// # Safety
/// `n` must be NUL-terminated; `options` may be NULL for defaults; `out`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hf_factor(n: *const c_char, options: *const HfOptions, out: *mut *mut HfReport) -> HfStatus {
    guard(|| {
        let n = big_arg(n, "n")?;
        let mut opts = FactorOptions::default();
        if let Some(o) = options.as_ref() {
            if o.workers == 0 {
                return fail(HfStatus::InvalidArgument, "workers must be at least 1");
            }
            opts.method = o.method.into();
            opts.bits = (o.bits != 0).then_some(o.bits);
            opts.fix_lsb = o.fix_lsb;
            opts.workers = o.workers as usize;
            opts.schedule.sweeps = o.sweeps;
            opts.schedule.restarts = o.restarts;
            opts.schedule.seed = o.seed;
            opts.max_blocks = (o.max_blocks != 0).then_some(o.max_blocks);
            if !o.stride.is_null() {
                opts.stride = Some(big_arg(o.stride, "stride")?);
            }
        }
        let outcome = lib(factor(&n, &opts))?;
        put(out, HfReport { report: outcome.report })
    })
}

/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_report_found(report: *const HfReport) -> bool {
    report.as_ref().is_some_and(|r| r.report.found)
}

/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_report_qubits(report: *const HfReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.qubits)
}

/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_report_ancillas(report: *const HfReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.ancillas)
}

/// Copies the factor `p` (`which == 0`) or `q` (`which == 1`), `p <= q`.
/// Returns `HF_STATUS_NOT_FOUND` when no factorization was found.
///
/// # Safety
/// `buf` must be valid for `len` bytes or NULL; `needed` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_report_factor(
    report: *const HfReport,
    which: u32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HfStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.report;
        let v = match which {
            0 => &r.p,
            1 => &r.q,
            _ => return fail(HfStatus::InvalidArgument, "which must be 0 or 1"),
        };
        match v {
            Some(v) if r.found => write_str(&v.to_string(), buf, len, needed),
            _ => fail(HfStatus::NotFound, "no factors in report"),
        }
    })
}

/// Lowest energy found with the constant term dropped.
///
/// # Safety
/// `buf` must be valid for `len` bytes or NULL; `needed` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_report_energy_paper(
    report: *const HfReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HfStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.report;
        match &r.energy_paper {
            Some(e) => write_str(&e.to_string(), buf, len, needed),
            None => fail(HfStatus::NotFound, "report has no energy"),
        }
    })
}

/// The whole report as JSON.
///
/// # Safety
/// `buf` must be valid for `len` bytes or NULL; `needed` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn hf_report_to_json(
    report: *const HfReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HfStatus {
    guard(|| {
        let r = ref_arg(report, "report")?;
        write_str(&report_to_json(&r.report), buf, len, needed)
    })
}

/// Releases a report; NULL is ignored.
///
/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hf_report_free(report: *mut HfReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
