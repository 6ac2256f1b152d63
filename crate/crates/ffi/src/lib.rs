//! C interface to the oracle: parse trees, drive configurations, query the
//! loss and run brute-force checks. Handles are opaque and owned by the
//! caller, who releases them with the matching `*_free` function. Every
//! fallible call returns an [`OlStatus`]; `ol_last_error` describes the
//! most recent failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use oracle_lab::oracle::{loss, optimal_transitions, GoldReference};
use oracle_lab::transition::{Configuration, Strategy, Transition};
use oracle_lab::tree::{gold_sequence, max_nt_run, parse_bracketed, ConstituentTree};
use oracle_lab::verify::{sweep, SearchBounds, WalkPolicy};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    IllegalTransition = 4,
    InvalidArgument = 5,
    Mismatch = 6,
    Panic = 7,
}

/// Transition system selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OlStrategy {
    TopDown = 0,
    InOrder = 1,
}

impl From<OlStrategy> for Strategy {
    fn from(s: OlStrategy) -> Self {
        match s {
            OlStrategy::TopDown => Strategy::TopDown,
            OlStrategy::InOrder => Strategy::InOrder,
        }
    }
}

/// Loss of a configuration and its four terms.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OlLoss {
    pub total: usize,
    pub unreachable: usize,
    pub false_constituents: usize,
    pub false_open_nts: usize,
    pub out_of_order: usize,
}

/// A parsed constituent tree.
pub struct OlTree(ConstituentTree);

/// A parser configuration.
pub struct OlConfig(Configuration);

/// Gold reference for one tree under one strategy.
pub struct OlGold {
    gold: GoldReference,
    labels: Vec<oracle_lab::tree::Label>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard(f: impl FnOnce() -> Result<(), (OlStatus, String)>) -> OlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OlStatus::Panic
        }
    }
}

fn null() -> (OlStatus, String) {
    (OlStatus::NullPointer, "null pointer argument".into())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, (OlStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| (OlStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn out_string(s: String, out: *mut *mut c_char) -> Result<(), (OlStatus, String)> {
    let c = CString::new(s).map_err(|_| (OlStatus::InvalidArgument, "interior NUL byte".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message for the most recent error on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ol_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map(|s| s.as_ptr()).unwrap_or(ptr::null()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ol_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses one bracketed tree into `*out`.
///
/// # Safety
/// `text_ptr` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ol_tree_parse(text_ptr: *const c_char, out: *mut *mut OlTree) -> OlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let t = parse_bracketed(text(text_ptr)?).map_err(|e| (OlStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(OlTree(t)));
        Ok(())
    })
}

/// Number of tokens of a tree, or 0 for NULL.
///
/// # Safety
/// `tree` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ol_tree_len(tree: *const OlTree) -> usize {
    tree.as_ref().map(|t| t.0.len()).unwrap_or(0)
}

/// Space-separated gold transition sequence, e.g. "NT_S SH RE".
///
/// # Safety
/// `tree` must be a live handle; `out` must be writable. Free the result
/// with [`ol_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ol_gold_sequence(tree: *const OlTree, strategy: OlStrategy, out: *mut *mut c_char) -> OlStatus {
    guard(|| {
        let t = tree.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let seq: Vec<String> = gold_sequence(&t.0, strategy.into()).iter().map(|t| t.to_string()).collect();
        out_string(seq.join(" "), out)
    })
}

/// # Safety
/// `tree` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ol_tree_free(tree: *mut OlTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Gold reference for `tree`; the tree may be freed afterwards.
///
/// # Safety
/// `tree` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ol_gold_new(tree: *const OlTree, strategy: OlStrategy, out: *mut *mut OlGold) -> OlStatus {
    guard(|| {
        let t = tree.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let gold = GoldReference::new(&t.0, strategy.into());
        *out = Box::into_raw(Box::new(OlGold { gold, labels: t.0.labels() }));
        Ok(())
    })
}

/// # Safety
/// `gold` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ol_gold_free(gold: *mut OlGold) {
    if !gold.is_null() {
        drop(Box::from_raw(gold));
    }
}

/// Initial configuration for `n` tokens with a cap of `nt_cap` consecutive
/// non-terminals.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ol_config_new(n: usize, strategy: OlStrategy, nt_cap: usize, out: *mut *mut OlConfig) -> OlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let c = Configuration::with_cap(n, strategy.into(), nt_cap)
            .map_err(|e| (OlStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(OlConfig(c)));
        Ok(())
    })
}

/// Applies a transition written as "SH", "RE", "FI" or "NT_X" in place.
/// An illegal transition leaves the configuration unchanged.
///
/// # Safety
/// `config` must be a live handle; `transition` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ol_config_apply(config: *mut OlConfig, transition: *const c_char) -> OlStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(null)?;
        let t: Transition = text(transition)?.parse().map_err(|e: String| (OlStatus::InvalidArgument, e))?;
        c.0 = c.0.apply(&t).map_err(|e| (OlStatus::IllegalTransition, e.to_string()))?;
        Ok(())
    })
}

/// 1 if the configuration is terminal, 0 otherwise (and for NULL).
///
/// # Safety
/// `config` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ol_config_is_terminal(config: *const OlConfig) -> i32 {
    config.as_ref().map(|c| c.0.is_terminal() as i32).unwrap_or(0)
}

/// Stack rendered as text.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable. Free the result
/// with [`ol_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ol_config_summary(config: *const OlConfig, out: *mut *mut c_char) -> OlStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        out_string(c.0.stack_summary(), out)
    })
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ol_config_free(config: *mut OlConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Minimum achievable loss from `config` against `gold`.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ol_loss(config: *const OlConfig, gold: *const OlGold, out: *mut OlLoss) -> OlStatus {
    guard(|| {
        let (c, g) = (config.as_ref().ok_or_else(null)?, gold.as_ref().ok_or_else(null)?);
        let out = out.as_mut().ok_or_else(null)?;
        let l = loss(&c.0, &g.gold).map_err(|e| (OlStatus::InvalidArgument, e.to_string()))?;
        *out = OlLoss {
            total: l.total,
            unreachable: l.unreachable,
            false_constituents: l.false_constituents,
            false_open_nts: l.false_open_nts,
            out_of_order: l.out_of_order,
        };
        Ok(())
    })
}

/// Space-separated optimal transitions over the gold tree's labels, in
/// tie-break order.
///
/// # Safety
/// Both handles must be live; `out` must be writable. Free the result with
/// [`ol_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ol_optimal_transitions(
    config: *const OlConfig,
    gold: *const OlGold,
    out: *mut *mut c_char,
) -> OlStatus {
    guard(|| {
        let (c, g) = (config.as_ref().ok_or_else(null)?, gold.as_ref().ok_or_else(null)?);
        if out.is_null() {
            return Err(null());
        }
        let opt = optimal_transitions(&c.0, &g.gold, &g.labels).map_err(|e| (OlStatus::InvalidArgument, e.to_string()))?;
        out_string(opt.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "), out)
    })
}

/// Checks the oracle against brute force on `walks` random walks over
/// `tree` (at most 6 tokens, cap 3). Writes the number of disagreeing
/// configurations to `mismatches` and returns `Mismatch` if it is nonzero.
///
/// # Safety
/// `tree` must be a live handle; `mismatches` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ol_check_tree(
    tree: *const OlTree,
    strategy: OlStrategy,
    walks: usize,
    seed: u64,
    mismatches: *mut usize,
) -> OlStatus {
    guard(|| {
        let t = tree.as_ref().ok_or_else(null)?;
        let count = mismatches.as_mut().ok_or_else(null)?;
        let bounds = SearchBounds::for_tree(&t.0);
        if t.0.len() > bounds.max_tokens || max_nt_run(&t.0, strategy.into()) > bounds.max_consecutive_nt {
            return Err((OlStatus::InvalidArgument, "tree exceeds the search bounds".into()));
        }
        let report = sweep(std::slice::from_ref(&t.0), strategy.into(), &bounds, WalkPolicy::RandomWalk { walks }, seed);
        *count = report.mismatches.len();
        if report.passed() {
            Ok(())
        } else {
            Err((OlStatus::Mismatch, format!("{} mismatches", report.mismatches.len())))
        }
    })
}
