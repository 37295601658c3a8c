//! C interface: opaque handles over sequences, points, and configurations,
//! status codes mirroring the library's error kinds, and exact values
//! carried as UTF-8 strings. Out-pointers hand ownership to the caller;
//! release handles and strings with the matching `padix_*_free` call.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use padix::dedekind::{class_group, factorizability_witness, is_pid, IntConfig, Witness};
use padix::krasner::{certify_minimal_pair, omega, Verdict};
use padix::newton::polygon_of_points;
use padix::poly::Poly;
use padix::report::error_kind;
use padix::scalar::{is_prime, render_rat, vp_rational, ExtVal, Rat};
use padix::stacked::{build_prescribed, verify_stacked, StackedSequence};
use padix::textio::{
    parse_int_config, parse_point, parse_rat_text, parse_sequence_spec, read_sequence,
    render_sequence,
};
use padix::tower::TowerElement;
use padix::valdom::{
    parse_rational_function, residue_of, valuate, CoefficientField, RationalFunction,
    ValuationHandle,
};
use padix::Error;

/// Result of a library call. Everything other than `Ok` leaves an
/// explanation in `padix_last_error`.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadixStatus {
    Ok = 0,
    Parse = 1,
    Precision = 2,
    Stabilization = 3,
    Window = 4,
    SearchExhausted = 5,
    Domain = 6,
    Refused = 7,
    UnverifiedNonconjugacy = 8,
    Unsupported = 9,
    Contract = 10,
    Io = 11,
    NullArgument = 12,
    InvalidUtf8 = 13,
    Panic = 14,
}

/// Verdict of a minimal-pair certification.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadixVerdict {
    Certified = 0,
    Refuted = 1,
    Unknown = 2,
}

/// A built sequence together with its valuation on Q(X).
pub struct PadixSequence {
    seq: StackedSequence,
    handle: ValuationHandle,
}

/// An algebraic point loaded from a point document.
pub struct PadixPoint {
    x: TowerElement,
}

/// An integer-valued polynomial ring configuration.
pub struct PadixConfig {
    cfg: IntConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn status_of(e: &Error) -> PadixStatus {
    match error_kind(e) {
        "parse" => PadixStatus::Parse,
        "precision" => PadixStatus::Precision,
        "stabilization" => PadixStatus::Stabilization,
        "window" => PadixStatus::Window,
        "search-exhausted" => PadixStatus::SearchExhausted,
        "domain" => PadixStatus::Domain,
        "refused" => PadixStatus::Refused,
        "unverified-nonconjugacy" => PadixStatus::UnverifiedNonconjugacy,
        "unsupported" => PadixStatus::Unsupported,
        "io" => PadixStatus::Io,
        _ => PadixStatus::Contract,
    }
}

struct Failure(PadixStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(status_of(&e), e.to_string())
    }
}

type FfiResult = Result<(), Failure>;

fn set_last_error(msg: &str) {
    let clean: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).expect("interior NULs removed");
    });
}

fn guard<F: FnOnce() -> FfiResult>(body: F) -> PadixStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            PadixStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            PadixStatus::Panic
        }
    }
}

fn read_cstr<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure(
            PadixStatus::NullArgument,
            format!("{what} is NULL"),
        ));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| Failure(PadixStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn out_slot<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    unsafe { ptr.as_mut() }
        .ok_or_else(|| Failure(PadixStatus::NullArgument, format!("{what} is NULL")))
}

fn handle_ref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    unsafe { ptr.as_ref() }
        .ok_or_else(|| Failure(PadixStatus::NullArgument, format!("{what} is NULL")))
}

fn out_string(slot: &mut *mut c_char, text: String) {
    let clean: String = text.chars().filter(|&c| c != '\0').collect();
    *slot = CString::new(clean)
        .expect("interior NULs removed")
        .into_raw();
}

fn expect_polynomial(rf: &RationalFunction) -> Result<Poly<Rat>, Failure> {
    if rf.den().degree() != Some(0) {
        return Err(Failure(
            PadixStatus::Contract,
            "expected a polynomial, not a quotient".into(),
        ));
    }
    Ok(rf.num().clone())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn padix_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Explanation of the most recent failure on this thread; borrowed, valid
/// until the next library call on the same thread. Do not free.
#[no_mangle]
pub extern "C" fn padix_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string returned through an out-parameter. Pass each string
/// at most once; it must have come from this library.
#[no_mangle]
#[allow(clippy::not_unsafe_ptr_arg_deref)]
pub extern "C" fn padix_string_free(s: *mut c_char) {
    if !s.is_null() {
        unsafe { drop(CString::from_raw(s)) };
    }
}

/// Builds a sequence from a sequence-spec document.
#[no_mangle]
pub extern "C" fn padix_sequence_build(
    spec_text: *const c_char,
    out: *mut *mut PadixSequence,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let text = read_cstr(spec_text, "spec_text")?;
        let spec = parse_sequence_spec(text)?;
        let seq = build_prescribed(&spec)?;
        let handle = ValuationHandle::over_sequence(seq.clone(), CoefficientField::Q);
        *slot = Box::into_raw(Box::new(PadixSequence { seq, handle }));
        Ok(())
    })
}

/// Loads a sequence document, replaying the build and rejecting any
/// document that does not match its deterministic rebuild.
#[no_mangle]
pub extern "C" fn padix_sequence_read(
    doc_text: *const c_char,
    out: *mut *mut PadixSequence,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let text = read_cstr(doc_text, "doc_text")?;
        let seq = read_sequence(text)?;
        let handle = ValuationHandle::over_sequence(seq.clone(), CoefficientField::Q);
        *slot = Box::into_raw(Box::new(PadixSequence { seq, handle }));
        Ok(())
    })
}

/// Renders the sequence document for a handle; free with padix_string_free.
#[no_mangle]
pub extern "C" fn padix_sequence_render(
    h: *const PadixSequence,
    out: *mut *mut c_char,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let s = handle_ref(h, "sequence handle")?;
        out_string(slot, render_sequence(&s.seq));
        Ok(())
    })
}

/// Re-runs the invariant checks; writes how many passed and how many ran.
#[no_mangle]
pub extern "C" fn padix_sequence_verify(
    h: *const PadixSequence,
    out_passed: *mut usize,
    out_total: *mut usize,
) -> PadixStatus {
    guard(|| {
        let passed = out_slot(out_passed, "out_passed")?;
        let total = out_slot(out_total, "out_total")?;
        let s = handle_ref(h, "sequence handle")?;
        let report = verify_stacked(&s.seq);
        *passed = report.checks.iter().filter(|c| c.pass).count();
        *total = report.checks.len();
        Ok(())
    })
}

/// Number of stored levels, the zero level included.
#[no_mangle]
pub extern "C" fn padix_sequence_level_count(
    h: *const PadixSequence,
    out: *mut usize,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let s = handle_ref(h, "sequence handle")?;
        *slot = s.seq.records.len();
        Ok(())
    })
}

/// Invariants (d, e, f) of one stored level.
#[no_mangle]
pub extern "C" fn padix_sequence_level(
    h: *const PadixSequence,
    level: usize,
    out_d: *mut u64,
    out_e: *mut u64,
    out_f: *mut u64,
) -> PadixStatus {
    guard(|| {
        let d = out_slot(out_d, "out_d")?;
        let e = out_slot(out_e, "out_e")?;
        let f = out_slot(out_f, "out_f")?;
        let s = handle_ref(h, "sequence handle")?;
        let rec = s.seq.records.get(level).ok_or_else(|| {
            Failure(
                PadixStatus::Contract,
                format!("level {level} is out of range"),
            )
        })?;
        *d = rec.d;
        *e = rec.e;
        *f = rec.f;
        Ok(())
    })
}

/// Stabilized valuation of a rational function, written as an exact
/// rational string; free with padix_string_free.
#[no_mangle]
pub extern "C" fn padix_sequence_valuate(
    h: *const PadixSequence,
    query: *const c_char,
    out_value: *mut *mut c_char,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out_value, "out_value")?;
        let s = handle_ref(h, "sequence handle")?;
        let text = read_cstr(query, "query")?;
        let phi = parse_rational_function(text)?;
        let w = valuate(&s.handle, &phi)?;
        out_string(slot, render_rat(&w));
        Ok(())
    })
}

/// Residue of a valuation-zero query, as "degree-over-fp=k coords=...";
/// free with padix_string_free.
#[no_mangle]
pub extern "C" fn padix_sequence_residue(
    h: *const PadixSequence,
    query: *const c_char,
    out_residue: *mut *mut c_char,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out_residue, "out_residue")?;
        let s = handle_ref(h, "sequence handle")?;
        let text = read_cstr(query, "query")?;
        let phi = parse_rational_function(text)?;
        let r = residue_of(&s.handle, &phi)?;
        let coords: Vec<String> = r.coords().iter().map(|c| c.to_string()).collect();
        out_string(
            slot,
            format!("degree-over-fp={} coords={}", r.degree_over_fp(), coords.join(",")),
        );
        Ok(())
    })
}

/// Releases a sequence handle; pass each handle at most once.
#[no_mangle]
#[allow(clippy::not_unsafe_ptr_arg_deref)]
pub extern "C" fn padix_sequence_free(h: *mut PadixSequence) {
    if !h.is_null() {
        unsafe { drop(Box::from_raw(h)) };
    }
}

/// Loads an algebraic point from a point document.
#[no_mangle]
pub extern "C" fn padix_point_read(
    doc_text: *const c_char,
    out: *mut *mut PadixPoint,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let text = read_cstr(doc_text, "doc_text")?;
        let x = parse_point(text)?;
        *slot = Box::into_raw(Box::new(PadixPoint { x }));
        Ok(())
    })
}

/// Supremum of conjugate distances, "-inf" for rational points; free with
/// padix_string_free.
#[no_mangle]
pub extern "C" fn padix_point_omega(
    h: *const PadixPoint,
    out_value: *mut *mut c_char,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out_value, "out_value")?;
        let p = handle_ref(h, "point handle")?;
        let bound = omega(&p.x)?;
        out_string(slot, bound.render());
        Ok(())
    })
}

/// Certifies (x, delta) as a minimal pair; delta is an exact rational
/// string. The detail string cites the condition used; free it with
/// padix_string_free.
#[no_mangle]
pub extern "C" fn padix_point_certify(
    h: *const PadixPoint,
    delta: *const c_char,
    out_verdict: *mut PadixVerdict,
    out_detail: *mut *mut c_char,
) -> PadixStatus {
    guard(|| {
        let verdict = out_slot(out_verdict, "out_verdict")?;
        let detail = out_slot(out_detail, "out_detail")?;
        let p = handle_ref(h, "point handle")?;
        let text = read_cstr(delta, "delta")?;
        let d = parse_rat_text(text)?;
        let cert = certify_minimal_pair(&p.x, &d, None)?;
        *verdict = match cert.verdict {
            Verdict::Certified => PadixVerdict::Certified,
            Verdict::Refuted => PadixVerdict::Refuted,
            Verdict::Unknown => PadixVerdict::Unknown,
        };
        let mut parts = Vec::new();
        if let Some(m) = cert.method {
            parts.push(m.to_string());
        }
        if let Some(w) = cert.witness {
            parts.push(w);
        }
        out_string(detail, parts.join(": "));
        Ok(())
    })
}

/// Releases a point handle; pass each handle at most once.
#[no_mangle]
#[allow(clippy::not_unsafe_ptr_arg_deref)]
pub extern "C" fn padix_point_free(h: *mut PadixPoint) {
    if !h.is_null() {
        unsafe { drop(Box::from_raw(h)) };
    }
}

/// Loads an integer-valued ring configuration document.
#[no_mangle]
pub extern "C" fn padix_config_read(
    doc_text: *const c_char,
    out: *mut *mut PadixConfig,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let text = read_cstr(doc_text, "doc_text")?;
        let cfg = parse_int_config(text)?;
        *slot = Box::into_raw(Box::new(PadixConfig { cfg }));
        Ok(())
    })
}

/// Renders the class group, for example "Z/2Z (+) Z" or "0"; free with
/// padix_string_free.
#[no_mangle]
pub extern "C" fn padix_config_class_group(
    h: *const PadixConfig,
    out_group: *mut *mut c_char,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out_group, "out_group")?;
        let c = handle_ref(h, "config handle")?;
        let cl = class_group(&c.cfg)?;
        out_string(slot, cl.render());
        Ok(())
    })
}

/// Writes whether the configured ring is a principal ideal domain.
#[no_mangle]
pub extern "C" fn padix_config_is_pid(
    h: *const PadixConfig,
    out_pid: *mut bool,
) -> PadixStatus {
    guard(|| {
        let slot = out_slot(out_pid, "out_pid")?;
        let c = handle_ref(h, "config handle")?;
        *slot = is_pid(&c.cfg)?;
        Ok(())
    })
}

/// Searches for a unit witness (n, d) with g(alpha)^n / d of valuation
/// zero at every supported prime. On success out_witnessed is true, out_n
/// holds n, and out_text holds d in decimal; otherwise out_witnessed is
/// false and out_text explains why no witness exists. Free out_text with
/// padix_string_free.
#[no_mangle]
pub extern "C" fn padix_config_witness(
    h: *const PadixConfig,
    poly_text: *const c_char,
    out_witnessed: *mut bool,
    out_n: *mut u64,
    out_text: *mut *mut c_char,
) -> PadixStatus {
    guard(|| {
        let witnessed = out_slot(out_witnessed, "out_witnessed")?;
        let n_slot = out_slot(out_n, "out_n")?;
        let text_slot = out_slot(out_text, "out_text")?;
        let c = handle_ref(h, "config handle")?;
        let text = read_cstr(poly_text, "poly_text")?;
        let rf = parse_rational_function(text)?;
        let g = expect_polynomial(&rf)?;
        match factorizability_witness(&c.cfg, &g)? {
            Witness::Witnessed { n, d } => {
                *witnessed = true;
                *n_slot = n;
                out_string(text_slot, d.to_string());
            }
            Witness::CannotWitness { reason } => {
                *witnessed = false;
                *n_slot = 0;
                out_string(text_slot, reason);
            }
        }
        Ok(())
    })
}

/// Releases a configuration handle; pass each handle at most once.
#[no_mangle]
#[allow(clippy::not_unsafe_ptr_arg_deref)]
pub extern "C" fn padix_config_free(h: *mut PadixConfig) {
    if !h.is_null() {
        unsafe { drop(Box::from_raw(h)) };
    }
}

/// Newton polygon of a polynomial over Q at a prime: writes the number of
/// roots at zero and the remaining root valuations in ascending order as a
/// space-separated string ("-" when empty). Free the string with
/// padix_string_free.
#[no_mangle]
pub extern "C" fn padix_newton_root_valuations(
    prime: u64,
    poly_text: *const c_char,
    out_zero_roots: *mut usize,
    out_valuations: *mut *mut c_char,
) -> PadixStatus {
    guard(|| {
        let zeros = out_slot(out_zero_roots, "out_zero_roots")?;
        let vals = out_slot(out_valuations, "out_valuations")?;
        if !is_prime(prime) {
            return Err(Error::NotPrime(prime).into());
        }
        let text = read_cstr(poly_text, "poly_text")?;
        let rf = parse_rational_function(text)?;
        let f = expect_polynomial(&rf)?;
        if f.is_zero() {
            return Err(Failure(
                PadixStatus::Contract,
                "the zero polynomial has no Newton polygon".into(),
            ));
        }
        let mut points = Vec::new();
        for (i, c) in f.coeffs().iter().enumerate() {
            if let ExtVal::Finite(v) = vp_rational(c, prime)? {
                points.push((i, v));
            }
        }
        let polygon = polygon_of_points(&points);
        *zeros = polygon.ord_zero();
        let roots: Vec<String> = polygon.root_valuations().iter().map(render_rat).collect();
        out_string(
            vals,
            if roots.is_empty() {
                "-".to_string()
            } else {
                roots.join(" ")
            },
        );
        Ok(())
    })
}
