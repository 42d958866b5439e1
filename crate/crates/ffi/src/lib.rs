//! C ABI over the `hormander` library.
//!
//! Objects cross the boundary as opaque handles created by
//! `hm_operator_preset`, `hm_operator_from_matrix` or `hm_equivalence_report`
//! and released by the matching `hm_*_free`. Every fallible call returns an
//! [`HmStatus`]; the message of the last failure on the calling thread is
//! available from [`hm_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use hormander::operator::{imaginary_powers, SectorialOperator};
use hormander::rbound::SpaceSpec;
use hormander::run::{run, RunConfig};
use hormander::suite::{equivalence_report, SuiteParams, SuiteReport, Verdict};
use hormander::{Error, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Pole = 4,
    Resolution = 5,
    Input = 6,
    Coverage = 7,
    NotSectorial = 8,
    Singular = 9,
    Contour = 10,
    Search = 11,
    Schema = 12,
    Config = 13,
    Io = 14,
    BufferTooSmall = 15,
    NotFound = 16,
    Panic = 99,
}

impl From<&Error> for HmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => HmStatus::Domain,
            Error::Pole(_) => HmStatus::Pole,
            Error::Resolution(_) => HmStatus::Resolution,
            Error::Input(_) => HmStatus::Input,
            Error::Coverage(_) => HmStatus::Coverage,
            Error::NotSectorial(_) => HmStatus::NotSectorial,
            Error::Singular(_) => HmStatus::Singular,
            Error::Contour(_) => HmStatus::Contour,
            Error::Search(_) => HmStatus::Search,
            Error::Schema(_) => HmStatus::Schema,
            Error::Config(_) | Error::Json(_) => HmStatus::Config,
            Error::Io(_) => HmStatus::Io,
        }
    }
}

/// Sectorial matrix operator.
pub struct HmOperator(SectorialOperator);

/// Result of the condition-equivalence suite.
pub struct HmReport(SuiteReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: HmStatus, msg: impl Into<String>) -> HmStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), HmStatus>) -> HmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HmStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(HmStatus::Panic, "panic inside the library"),
    }
}

trait OrStatus<T> {
    fn status(self) -> Result<T, HmStatus>;
}

impl<T> OrStatus<T> for hormander::Result<T> {
    fn status(self) -> Result<T, HmStatus> {
        self.map_err(|e| fail(HmStatus::from(&e), e.to_string()))
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, HmStatus> {
    if p.is_null() {
        return Err(fail(HmStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(HmStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, HmStatus> {
    p.as_mut().ok_or_else(|| fail(HmStatus::NullPointer, "null output argument"))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, HmStatus> {
    p.as_ref().ok_or_else(|| fail(HmStatus::NullPointer, "null handle"))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Complex Gamma function.
///
/// # Safety
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hm_gamma(re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> HmStatus {
    guard(|| {
        let (r, i) = (out_arg(out_re)?, out_arg(out_im)?);
        let g = hormander::special::gamma(C64::new(re, im)).status()?;
        *r = g.re;
        *i = g.im;
        Ok(())
    })
}

/// Builds an operator from a preset such as `diag:(1,2,4)`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hm_operator_preset(spec: *const c_char, out: *mut *mut HmOperator) -> HmStatus {
    guard(|| {
        let slot = out_arg(out)?;
        *slot = ptr::null_mut();
        let op = SectorialOperator::preset(str_arg(spec)?).status()?;
        *slot = Box::into_raw(Box::new(HmOperator(op)));
        Ok(())
    })
}

/// Builds an operator from a row-major complex matrix given as interleaved
/// `(re, im)` pairs, `2 n²` doubles.
///
/// # Safety
/// `data` must point to `2 n²` doubles and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hm_operator_from_matrix(n: usize, data: *const f64, out: *mut *mut HmOperator) -> HmStatus {
    guard(|| {
        let slot = out_arg(out)?;
        *slot = ptr::null_mut();
        if data.is_null() {
            return Err(fail(HmStatus::NullPointer, "null matrix data"));
        }
        if n == 0 {
            return Err(fail(HmStatus::Input, "empty matrix"));
        }
        let v = std::slice::from_raw_parts(data, 2 * n * n);
        let m = hormander::Mat::from_fn(n, n, |i, j| C64::new(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]));
        let op = SectorialOperator::from_matrix("matrix", m).status()?;
        *slot = Box::into_raw(Box::new(HmOperator(op)));
        Ok(())
    })
}

/// # Safety
/// `op` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hm_operator_free(op: *mut HmOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Dimension after range reduction; 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hm_operator_dim(op: *const HmOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.dim())
}

/// `A^{it}` written row-major as interleaved `(re, im)` pairs into `out`,
/// which must hold `cap ≥ 2 dim²` doubles.
///
/// # Safety
/// `op` must be a live handle and `out` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn hm_imaginary_power(op: *const HmOperator, t: f64, out: *mut f64, cap: usize) -> HmStatus {
    guard(|| {
        let op = &handle(op)?.0;
        let n = op.dim();
        if out.is_null() {
            return Err(fail(HmStatus::NullPointer, "null output buffer"));
        }
        if cap < 2 * n * n {
            return Err(fail(HmStatus::BufferTooSmall, format!("need {} doubles, got {cap}", 2 * n * n)));
        }
        let m = imaginary_powers(op, t).status()?;
        let buf = std::slice::from_raw_parts_mut(out, 2 * n * n);
        for i in 0..n {
            for j in 0..n {
                buf[2 * (i * n + j)] = m[(i, j)].re;
                buf[2 * (i * n + j) + 1] = m[(i, j)].im;
            }
        }
        Ok(())
    })
}

/// Evaluates conditions (1)-(8) on `ℓ^p` with default grids.
///
/// # Safety
/// `op` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hm_equivalence_report(
    op: *const HmOperator,
    p: f64,
    alpha: f64,
    beta: f64,
    out: *mut *mut HmReport,
) -> HmStatus {
    guard(|| {
        let slot = out_arg(out)?;
        *slot = ptr::null_mut();
        let op = &handle(op)?.0;
        let space = SpaceSpec::new(p, op.dim()).status()?;
        let params = SuiteParams { alpha, beta, ..Default::default() };
        let report = equivalence_report(op, &space, &params).status()?;
        *slot = Box::into_raw(Box::new(HmReport(report)));
        Ok(())
    })
}

/// Value of a condition (`"c1"` … `"c8"`) in a report.
///
/// # Safety
/// `report` must be a live handle, `condition` a NUL-terminated string and
/// `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hm_report_value(report: *const HmReport, condition: *const c_char, out: *mut f64) -> HmStatus {
    guard(|| {
        let r = &handle(report)?.0;
        let cond = str_arg(condition)?;
        let slot = out_arg(out)?;
        match r.value(cond) {
            Some(v) => {
                *slot = v;
                Ok(())
            }
            None => Err(fail(HmStatus::NotFound, format!("no value for {cond:?}"))),
        }
    })
}

/// Number of asserted checks of the report that failed.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hm_report_failures(report: *const HmReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.flags.iter().filter(|f| f.verdict == Verdict::Fail).count())
}

/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hm_report_free(report: *mut HmReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Runs a JSON config (the CLI's `run`); `out_dir` may be null to keep the
/// config's directory. `passed` receives 1 when no asserted check failed.
///
/// # Safety
/// String arguments must be NUL-terminated; `passed` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hm_run(config_json: *const c_char, out_dir: *const c_char, passed: *mut i32) -> HmStatus {
    guard(|| {
        let mut cfg = RunConfig::from_json(str_arg(config_json)?).status()?;
        if !out_dir.is_null() {
            cfg.output_dir = PathBuf::from(str_arg(out_dir)?);
        }
        let slot = out_arg(passed)?;
        let manifest = run(&cfg).status()?;
        *slot = i32::from(manifest.passed);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(hm_last_error()).to_string_lossy().into_owned() }
    }

    #[test]
    fn gamma_and_pole() {
        let (mut re, mut im) = (0.0, 0.0);
        unsafe {
            assert_eq!(hm_gamma(5.0, 0.0, &mut re, &mut im), HmStatus::Ok);
            assert!((re - 24.0).abs() < 1e-10 && im.abs() < 1e-12);
            assert_eq!(hm_gamma(-2.0, 0.0, &mut re, &mut im), HmStatus::Pole);
            assert_eq!(hm_gamma(1.0, 0.0, ptr::null_mut(), &mut im), HmStatus::NullPointer);
        }
        assert!(last_error().contains("null"));
    }

    #[test]
    fn operator_lifecycle() {
        let spec = CString::new("diag:(1,2,4)").unwrap();
        let mut op = ptr::null_mut();
        unsafe {
            assert_eq!(hm_operator_preset(spec.as_ptr(), &mut op), HmStatus::Ok);
            assert_eq!(hm_operator_dim(op), 3);
            let mut buf = [0.0; 18];
            assert_eq!(hm_imaginary_power(op, 1.0, buf.as_mut_ptr(), 4), HmStatus::BufferTooSmall);
            assert_eq!(hm_imaginary_power(op, 1.0, buf.as_mut_ptr(), 18), HmStatus::Ok);
            // 2^{i} in the middle diagonal slot
            let z = C64::new(buf[8], buf[9]);
            assert!((z - C64::new(0.0, 2f64.ln()).exp()).norm() < 1e-12);
            hm_operator_free(op);
            hm_operator_free(ptr::null_mut());
        }
        let bad = CString::new("nonsense:3").unwrap();
        let mut op = ptr::null_mut();
        unsafe {
            assert_ne!(hm_operator_preset(bad.as_ptr(), &mut op), HmStatus::Ok);
        }
        assert!(op.is_null() && !last_error().is_empty());
    }

    #[test]
    fn matrix_operator() {
        let data = [2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 3.0, 0.0];
        let mut op = ptr::null_mut();
        unsafe {
            assert_eq!(hm_operator_from_matrix(2, data.as_ptr(), &mut op), HmStatus::Ok);
            assert_eq!(hm_operator_dim(op), 2);
            hm_operator_free(op);
            let neg = [-1.0, 0.0];
            assert_eq!(hm_operator_from_matrix(1, neg.as_ptr(), &mut op), HmStatus::NotSectorial);
        }
    }

    #[test]
    fn report_values() {
        let spec = CString::new("diag:(1)").unwrap();
        let mut op = ptr::null_mut();
        let mut rep = ptr::null_mut();
        let mut v = 0.0;
        unsafe {
            assert_eq!(hm_operator_preset(spec.as_ptr(), &mut op), HmStatus::Ok);
            assert_eq!(hm_equivalence_report(op, 2.0, 1.0, 0.5, &mut rep), HmStatus::Ok);
            let c3 = CString::new("c3").unwrap();
            assert_eq!(hm_report_value(rep, c3.as_ptr(), &mut v), HmStatus::Ok);
            assert!((v - 1.0).abs() < 0.01, "{v}");
            let none = CString::new("c9").unwrap();
            assert_eq!(hm_report_value(rep, none.as_ptr(), &mut v), HmStatus::NotFound);
            assert_eq!(hm_report_failures(rep), 0);
            hm_report_free(rep);
            hm_operator_free(op);
        }
    }

    #[test]
    fn run_rejects_unknown_keys() {
        let cfg = CString::new(r#"{"operator": "diag:(1)", "bogus": 1}"#).unwrap();
        let mut passed = -1;
        unsafe {
            assert_eq!(hm_run(cfg.as_ptr(), ptr::null(), &mut passed), HmStatus::Config);
        }
        assert_eq!(passed, -1);
    }
}
