//! C ABI over `cdsnet`.
//!
//! Networks and compiled circuits are opaque heap handles. Every function
//! returns a [`CdsStatus`]; on failure a message is available from
//! [`cdsnet_last_error`] until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cdsnet::circuit::TriValue;
use cdsnet::reductions::{self, CompiledArtifact};
use cdsnet::solver::{self, ApproxBudget, SolveReport, Status};
use cdsnet::{Error, FinancialNetwork, RecoveryVector};

/// Opaque network handle.
pub struct CdsNetwork(FinancialNetwork);

/// Opaque handle to a network compiled from a circuit, with its wire map.
pub struct CdsCircuitNetwork(CompiledArtifact);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidNetwork = 4,
    InvalidArgument = 5,
    LengthMismatch = 6,
    /// The search ended without a vector; nothing is claimed about existence.
    NotFound = 7,
    /// No clearing vector exists.
    Infeasible = 8,
    Undecided = 9,
    NotApproxClearing = 10,
    Panic = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CdsStatus {
    match e {
        Error::Parse(_) | Error::MalformedCircuit(_) | Error::InvalidPolynomial(_) => CdsStatus::Parse,
        Error::LengthMismatch { .. } => CdsStatus::LengthMismatch,
        Error::NotApproxClearing { .. } => CdsStatus::NotApproxClearing,
        Error::UnknownBank(_)
        | Error::DuplicateBank(_)
        | Error::NegativeAmount { .. }
        | Error::SelfDebt(_)
        | Error::CdsRoleConflict { .. }
        | Error::DuplicateContract { .. }
        | Error::DegenerateNetwork(_)
        | Error::DefaultCostsPresent { .. } => CdsStatus::InvalidNetwork,
        _ => CdsStatus::InvalidArgument,
    }
}

struct Fail(CdsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<CdsStatus, Fail>) -> CdsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            CdsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(CdsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(CdsStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn vector(net: &FinancialNetwork, r: *const f64, len: usize) -> Result<RecoveryVector, Fail> {
    if len != net.len() {
        return Err(Error::LengthMismatch {
            expected: net.len(),
            got: len,
        }
        .into());
    }
    if r.is_null() && len > 0 {
        return Err(null("r"));
    }
    let values = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(r, len).to_vec() };
    Ok(RecoveryVector::new(values)?)
}

unsafe fn write_out(out: *mut f64, len: usize, values: &[f64]) -> Result<(), Fail> {
    if len != values.len() {
        return Err(Error::LengthMismatch {
            expected: values.len(),
            got: len,
        }
        .into());
    }
    if out.is_null() && len > 0 {
        return Err(null("out"));
    }
    if len > 0 {
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(values);
    }
    Ok(())
}

unsafe fn report_out(rep: SolveReport, out: *mut f64, len: usize, residual: *mut f64) -> Result<CdsStatus, Fail> {
    if !residual.is_null() {
        *residual = rep.residual;
    }
    Ok(match rep.status {
        Status::Found => {
            write_out(out, len, rep.r.expect("found reports carry a vector").as_slice())?;
            CdsStatus::Ok
        }
        Status::NotFound => CdsStatus::NotFound,
        Status::Infeasible => CdsStatus::Infeasible,
        Status::Undecided => CdsStatus::Undecided,
    })
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cdsnet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON network document into a new handle.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_network_from_json(json: *const c_char, out: *mut *mut CdsNetwork) -> CdsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let net = cdsnet::io::parse_network(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(CdsNetwork(net)));
        Ok(CdsStatus::Ok)
    })
}

/// # Safety
/// `net` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_network_free(net: *mut CdsNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_network_len(net: *const CdsNetwork, out: *mut usize) -> CdsStatus {
    guard(|| {
        let net = borrow(net, "net")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = net.0.len();
        Ok(CdsStatus::Ok)
    })
}

/// Serializes to JSON. Free the string with [`cdsnet_string_free`].
///
/// # Safety
/// `net` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_network_to_json(net: *const CdsNetwork, out: *mut *mut c_char) -> CdsStatus {
    guard(|| {
        let net = borrow(net, "net")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CString::new(cdsnet::io::serialize_network(&net.0)).expect("JSON has no nul bytes");
        *out = s.into_raw();
        Ok(CdsStatus::Ok)
    })
}

/// # Safety
/// `s` must come from this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// One application of the update map: `out = F(r)`.
///
/// # Safety
/// `r` and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_update_f(net: *const CdsNetwork, r: *const f64, len: usize, out: *mut f64) -> CdsStatus {
    guard(|| {
        let net = &borrow(net, "net")?.0;
        let f = net.update_f(&vector(net, r, len)?)?;
        write_out(out, len, f.as_slice())?;
        Ok(CdsStatus::Ok)
    })
}

/// `*out = ||F(r) - r||_inf <= tol`.
///
/// # Safety
/// `r` must hold `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_is_clearing(
    net: *const CdsNetwork,
    r: *const f64,
    len: usize,
    tol: f64,
    out: *mut bool,
) -> CdsStatus {
    guard(|| {
        let net = &borrow(net, "net")?.0;
        let r = vector(net, r, len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = net.is_clearing(&r, tol);
        Ok(CdsStatus::Ok)
    })
}

/// # Safety
/// `r` must hold `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_is_eps_approx_clearing(
    net: *const CdsNetwork,
    r: *const f64,
    len: usize,
    eps: f64,
    out: *mut bool,
) -> CdsStatus {
    guard(|| {
        let net = &borrow(net, "net")?.0;
        let r = vector(net, r, len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = net.is_eps_approx_clearing(&r, eps)?;
        Ok(CdsStatus::Ok)
    })
}

/// Damped iteration of the update map from `r0`. On `Ok`, `out` holds a
/// clearing vector. `residual` may be null.
///
/// # Safety
/// `r0` and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_iterate(
    net: *const CdsNetwork,
    r0: *const f64,
    len: usize,
    damping: f64,
    max_iter: usize,
    tol: f64,
    out: *mut f64,
    residual: *mut f64,
) -> CdsStatus {
    guard(|| {
        let net = &borrow(net, "net")?.0;
        let rep = solver::iterate_f(net, &vector(net, r0, len)?, damping, max_iter, tol)?;
        report_out(rep, out, len, residual)
    })
}

/// Solvency-pattern search. Returns `Ok` with a clearing vector in `out`,
/// `Infeasible` when no clearing vector exists, or `Undecided`.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_enumerate_patterns(
    net: *const CdsNetwork,
    tol: f64,
    out: *mut f64,
    len: usize,
) -> CdsStatus {
    guard(|| {
        let net = &borrow(net, "net")?.0;
        let rep = solver::enumerate_patterns(net, tol)?;
        report_out(rep, out, len, ptr::null_mut())
    })
}

/// Restart search for an `eps`-approximate clearing vector.
///
/// # Safety
/// `out` must hold `len` doubles. `residual` may be null.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_solve_eps_approx(
    net: *const CdsNetwork,
    eps: f64,
    restarts: usize,
    max_iter: usize,
    seed: u64,
    out: *mut f64,
    len: usize,
    residual: *mut f64,
) -> CdsStatus {
    guard(|| {
        let net = &borrow(net, "net")?.0;
        let budget = ApproxBudget {
            restarts,
            max_iter,
            seed,
        };
        let rep = solver::solve_eps_approx(net, eps, &budget)?;
        report_out(rep, out, len, residual)
    })
}

/// Compiles a JSON circuit document.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_compile_circuit_json(
    json: *const c_char,
    out: *mut *mut CdsCircuitNetwork,
) -> CdsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = cdsnet::io::parse_circuit(text(json, "json")?)?;
        let art = reductions::compile_circuit(&c)?;
        *out = Box::into_raw(Box::new(CdsCircuitNetwork(art)));
        Ok(CdsStatus::Ok)
    })
}

/// # Safety
/// `art` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_circuit_network_free(art: *mut CdsCircuitNetwork) {
    if !art.is_null() {
        drop(Box::from_raw(art));
    }
}

/// A new network handle holding a copy of the compiled network.
///
/// # Safety
/// `art` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_circuit_network_network(
    art: *const CdsCircuitNetwork,
    out: *mut *mut CdsNetwork,
) -> CdsStatus {
    guard(|| {
        let art = borrow(art, "art")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(CdsNetwork(art.0.network.clone())));
        Ok(CdsStatus::Ok)
    })
}

/// Number of wires in the source circuit.
///
/// # Safety
/// `art` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_circuit_network_wire_count(art: *const CdsCircuitNetwork, out: *mut usize) -> CdsStatus {
    guard(|| {
        let art = borrow(art, "art")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = art.0.circuit.as_ref().map_or(0, |c| c.wires().len());
        Ok(CdsStatus::Ok)
    })
}

/// Decodes every wire from an approximately clearing vector `r` into
/// `values` (0, 1, or 2 for the undetermined value), in wire order.
///
/// # Safety
/// `r` must hold the network's bank count, `values` the wire count.
#[no_mangle]
pub unsafe extern "C" fn cdsnet_circuit_network_decode(
    art: *const CdsCircuitNetwork,
    r: *const f64,
    len: usize,
    values: *mut u8,
    wire_count: usize,
) -> CdsStatus {
    guard(|| {
        let art = &borrow(art, "art")?.0;
        let r = vector(&art.network, r, len)?;
        let decoded = reductions::extract_solution(art, &r)?;
        if wire_count != decoded.len() {
            return Err(Error::LengthMismatch {
                expected: decoded.len(),
                got: wire_count,
            }
            .into());
        }
        if values.is_null() && wire_count > 0 {
            return Err(null("values"));
        }
        for (i, v) in decoded.iter().enumerate() {
            *values.add(i) = match v {
                TriValue::Zero => 0,
                TriValue::One => 1,
                TriValue::Bot => 2,
            };
        }
        Ok(CdsStatus::Ok)
    })
}
