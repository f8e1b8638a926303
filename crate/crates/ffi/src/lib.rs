//! C ABI for the intension library: opaque handles, integer status
//! codes, and a thread-local last-error message.
//!
//! Every constructor returns a status and writes the handle through an
//! out-pointer; every handle has a matching `_free` function. Strings
//! written through `char` buffers are NUL-terminated UTF-8, truncated
//! to the caller's buffer.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::sync::Arc;

use intension::harness::{render_csv, run_experiment, ExperimentConfig};
use intension::lang::{StateSpace, Vocabulary, VocabularyRecipe};
use intension::prior::Proxy;
use intension::search::SearchConfig;
use intension::task::Task;
use intension::taskgen::{arithmetic_parent, Operation};
use intension::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensionStatus {
    Ok = 0,
    /// A pointer argument was NULL.
    NullPointer = 1,
    /// An argument failed validation or parsing.
    InvalidArgument = 2,
    /// The task admits no valid model.
    NoModel = 3,
    /// A search or enumeration budget was exceeded.
    BudgetExceeded = 4,
    /// Any other library error; see `intension_last_error`.
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(err: Error) -> IntensionStatus {
    let status = match &err {
        Error::Parse(_) | Error::Config(_) | Error::BadBitCount(_)
        | Error::BitIndexOutOfRange { .. } | Error::UnknownLabel(_)
        | Error::UnknownProgram(_) | Error::BadChildSize { .. } | Error::BadTask(_) => {
            IntensionStatus::InvalidArgument
        }
        Error::NoModel => IntensionStatus::NoModel,
        Error::BudgetExceeded { .. } | Error::SearchBudget { .. }
        | Error::CapExceeded { .. } | Error::InclusionExclusionBudget { .. } => {
            IntensionStatus::BudgetExceeded
        }
        _ => IntensionStatus::Internal,
    };
    let msg = CString::new(err.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
    status
}

fn write_str(text: &str, buf: *mut c_char, len: usize) -> usize {
    let bytes = text.as_bytes();
    if !buf.is_null() && len > 0 {
        let n = bytes.len().min(len - 1);
        unsafe {
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
    }
    bytes.len() + 1
}

/// Copy the last error message on this thread into `buf` (capacity
/// `len`, NUL-terminated, truncated if needed). Returns the number of
/// bytes required including the NUL.
#[no_mangle]
pub extern "C" fn intension_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| write_str(&slot.borrow().to_string_lossy(), buf, len))
}

/// Opaque vocabulary handle.
pub struct IntensionVocabulary {
    inner: Arc<Vocabulary>,
}

/// Opaque task handle.
pub struct IntensionTask {
    vocab: Arc<Vocabulary>,
    inner: Task,
}

/// Opaque search-outcome handle.
pub struct IntensionOutcome {
    chosen: CString,
    models: Vec<CString>,
    score: CString,
    tier: CString,
}

macro_rules! nonnull {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(r) => r,
            None => return IntensionStatus::NullPointer,
        }
    };
}

/// Build a vocabulary from a preset name (`literals`, `literals+eq`,
/// `depth2`, `equations`, `rich`) over a `bit_count`-bit state space.
///
/// # Safety
/// `preset` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn intension_vocabulary_new(
    preset: *const c_char,
    bit_count: u32,
    out: *mut *mut IntensionVocabulary,
) -> IntensionStatus {
    if preset.is_null() || out.is_null() {
        return IntensionStatus::NullPointer;
    }
    let preset = match CStr::from_ptr(preset).to_str() {
        Ok(s) => s,
        Err(_) => return fail(Error::Parse("preset is not valid UTF-8".into())),
    };
    let recipe = match VocabularyRecipe::preset(preset) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let space = match StateSpace::new(bit_count) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match Vocabulary::build(&recipe, space) {
        Ok(v) => {
            *out = Box::into_raw(Box::new(IntensionVocabulary { inner: v }));
            IntensionStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Number of distinct programs in the vocabulary.
#[no_mangle]
pub extern "C" fn intension_vocabulary_len(vocab: *const IntensionVocabulary) -> usize {
    unsafe { vocab.as_ref() }.map_or(0, |v| v.inner.len())
}

/// # Safety
/// `vocab` must be a handle from `intension_vocabulary_new`, or NULL.
#[no_mangle]
pub unsafe extern "C" fn intension_vocabulary_free(vocab: *mut IntensionVocabulary) {
    if !vocab.is_null() {
        drop(Box::from_raw(vocab));
    }
}

/// Build the binary-arithmetic parent task: `operation` 0 is addition,
/// 1 is multiplication; `deleted_bit` in 0..8 is withheld from
/// situations. The vocabulary must be over an 8-bit space.
///
/// # Safety
/// `vocab` must be a live vocabulary handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn intension_arithmetic_parent(
    vocab: *const IntensionVocabulary,
    operation: u32,
    deleted_bit: u32,
    out: *mut *mut IntensionTask,
) -> IntensionStatus {
    let vocab = nonnull!(vocab);
    if out.is_null() {
        return IntensionStatus::NullPointer;
    }
    let op = match operation {
        0 => Operation::Add,
        1 => Operation::Multiply,
        other => {
            return fail(Error::Parse(format!(
                "operation must be 0 (add) or 1 (multiply), got {other}"
            )))
        }
    };
    match arithmetic_parent(&vocab.inner, op, deleted_bit) {
        Ok(task) => {
            *out = Box::into_raw(Box::new(IntensionTask {
                vocab: vocab.inner.clone(),
                inner: task,
            }));
            IntensionStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Number of correct decisions in the task.
#[no_mangle]
pub extern "C" fn intension_task_decision_count(task: *const IntensionTask) -> usize {
    unsafe { task.as_ref() }.map_or(0, |t| t.inner.decisions().len())
}

/// Sample a child task with `dk` decisions, deterministically from
/// `seed`.
///
/// # Safety
/// `task` must be a live task handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn intension_sample_child(
    task: *const IntensionTask,
    dk: usize,
    seed: u64,
    out: *mut *mut IntensionTask,
) -> IntensionStatus {
    let task = nonnull!(task);
    if out.is_null() {
        return IntensionStatus::NullPointer;
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    match task.inner.sample_child(dk, &mut rng) {
        Ok(sampled) => {
            *out = Box::into_raw(Box::new(IntensionTask {
                vocab: task.vocab.clone(),
                inner: sampled.child,
            }));
            IntensionStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `task` must be a handle from this library, or NULL.
#[no_mangle]
pub unsafe extern "C" fn intension_task_free(task: *mut IntensionTask) {
    if !task.is_null() {
        drop(Box::from_raw(task));
    }
}

/// Search the task for a model: `proxy` 0 maximises weakness, 1
/// minimises description length. Ties are drawn uniformly from `seed`.
///
/// # Safety
/// `task` must be a live task handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn intension_search(
    task: *const IntensionTask,
    proxy: u32,
    seed: u64,
    out: *mut *mut IntensionOutcome,
) -> IntensionStatus {
    let task = nonnull!(task);
    if out.is_null() {
        return IntensionStatus::NullPointer;
    }
    let proxy = match proxy {
        0 => Proxy::Weakness,
        1 => Proxy::Mdl,
        other => {
            return fail(Error::Parse(format!(
                "proxy must be 0 (weakness) or 1 (mdl), got {other}"
            )))
        }
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let outcome = match proxy.search(&task.inner, &SearchConfig::default(), &mut rng) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let text = |m: &intension::lang::Statement| {
        let mut labels: Vec<String> =
            m.ids().map(|id| task.inner.world().label_of(id)).collect();
        labels.sort();
        CString::new(labels.join(" ")).unwrap_or_default()
    };
    *out = Box::into_raw(Box::new(IntensionOutcome {
        chosen: text(&outcome.chosen),
        models: outcome.models.iter().map(text).collect(),
        score: CString::new(outcome.score_text()).unwrap_or_default(),
        tier: CString::new(outcome.tier.to_string()).unwrap_or_default(),
    }));
    IntensionStatus::Ok
}

/// Number of models tied at the best score.
#[no_mangle]
pub extern "C" fn intension_outcome_model_count(outcome: *const IntensionOutcome) -> usize {
    unsafe { outcome.as_ref() }.map_or(0, |o| o.models.len())
}

/// Copy the chosen model's space-separated program labels into `buf`.
/// Returns the bytes required including the NUL.
#[no_mangle]
pub extern "C" fn intension_outcome_chosen(
    outcome: *const IntensionOutcome,
    buf: *mut c_char,
    len: usize,
) -> usize {
    unsafe { outcome.as_ref() }
        .map_or(0, |o| write_str(&o.chosen.to_string_lossy(), buf, len))
}

/// Copy the labels of the `index`-th tied model into `buf`. Returns 0
/// when the index is out of range.
#[no_mangle]
pub extern "C" fn intension_outcome_model(
    outcome: *const IntensionOutcome,
    index: usize,
    buf: *mut c_char,
    len: usize,
) -> usize {
    unsafe { outcome.as_ref() }.map_or(0, |o| {
        o.models
            .get(index)
            .map_or(0, |m| write_str(&m.to_string_lossy(), buf, len))
    })
}

/// Copy the score (an integer, or a decimal bound) into `buf`.
#[no_mangle]
pub extern "C" fn intension_outcome_score(
    outcome: *const IntensionOutcome,
    buf: *mut c_char,
    len: usize,
) -> usize {
    unsafe { outcome.as_ref() }
        .map_or(0, |o| write_str(&o.score.to_string_lossy(), buf, len))
}

/// Copy the weakness tier used (`exact`, `closed`, `bound`, `state`)
/// into `buf`.
#[no_mangle]
pub extern "C" fn intension_outcome_tier(
    outcome: *const IntensionOutcome,
    buf: *mut c_char,
    len: usize,
) -> usize {
    unsafe { outcome.as_ref() }
        .map_or(0, |o| write_str(&o.tier.to_string_lossy(), buf, len))
}

/// # Safety
/// `outcome` must be a handle from `intension_search`, or NULL.
#[no_mangle]
pub unsafe extern "C" fn intension_outcome_free(outcome: *mut IntensionOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Run a full experiment sweep from a TOML config (empty string means
/// the defaults) and return the CSV report as a heap string; release
/// it with `intension_string_free`.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn intension_experiment_run(
    config_toml: *const c_char,
    out: *mut *mut c_char,
) -> IntensionStatus {
    if config_toml.is_null() || out.is_null() {
        return IntensionStatus::NullPointer;
    }
    let text = match CStr::from_ptr(config_toml).to_str() {
        Ok(s) => s,
        Err(_) => return fail(Error::Parse("config is not valid UTF-8".into())),
    };
    let config = if text.trim().is_empty() {
        Ok(ExperimentConfig::default())
    } else {
        ExperimentConfig::from_toml_str(text)
    };
    let report = match config.and_then(|c| run_experiment(&c)) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    match render_csv(&report.rows) {
        Ok(csv) => {
            let c = CString::new(csv).unwrap_or_default();
            *out = c.into_raw();
            IntensionStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `s` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn intension_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn read(f: impl Fn(*mut c_char, usize) -> usize) -> String {
        let mut buf = vec![0i8 as c_char; 4096];
        let n = f(buf.as_mut_ptr(), buf.len());
        assert!(n <= buf.len());
        unsafe { CStr::from_ptr(buf.as_ptr()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn full_round_trip_through_the_c_abi() {
        unsafe {
            let preset = CString::new("equations").unwrap();
            let mut vocab: *mut IntensionVocabulary = ptr::null_mut();
            assert_eq!(
                intension_vocabulary_new(preset.as_ptr(), 8, &mut vocab),
                IntensionStatus::Ok
            );
            assert!(intension_vocabulary_len(vocab) > 16);

            let mut parent: *mut IntensionTask = ptr::null_mut();
            assert_eq!(
                intension_arithmetic_parent(vocab, 0, 5, &mut parent),
                IntensionStatus::Ok
            );
            assert_eq!(intension_task_decision_count(parent), 16);

            let mut child: *mut IntensionTask = ptr::null_mut();
            assert_eq!(
                intension_sample_child(parent, 6, 42, &mut child),
                IntensionStatus::Ok
            );
            assert_eq!(intension_task_decision_count(child), 6);

            let mut outcome: *mut IntensionOutcome = ptr::null_mut();
            assert_eq!(intension_search(child, 0, 1, &mut outcome), IntensionStatus::Ok);
            assert!(intension_outcome_model_count(outcome) >= 1);
            let chosen = read(|b, l| intension_outcome_chosen(outcome, b, l));
            let first = read(|b, l| intension_outcome_model(outcome, 0, b, l));
            assert!(!chosen.is_empty() || !first.is_empty());
            let tier = read(|b, l| intension_outcome_tier(outcome, b, l));
            assert!(["exact", "closed", "bound", "state"].contains(&tier.as_str()));
            let score = read(|b, l| intension_outcome_score(outcome, b, l));
            assert!(!score.is_empty());

            intension_outcome_free(outcome);
            intension_task_free(child);
            intension_task_free(parent);
            intension_vocabulary_free(vocab);
        }
    }

    #[test]
    fn errors_set_status_and_message() {
        unsafe {
            let preset = CString::new("no-such-preset").unwrap();
            let mut vocab: *mut IntensionVocabulary = ptr::null_mut();
            assert_eq!(
                intension_vocabulary_new(preset.as_ptr(), 8, &mut vocab),
                IntensionStatus::InvalidArgument
            );
            let msg = read(|b, l| intension_last_error(b, l));
            assert!(msg.contains("no-such-preset"));
            assert_eq!(
                intension_vocabulary_new(ptr::null(), 8, &mut vocab),
                IntensionStatus::NullPointer
            );
        }
    }

    #[test]
    fn experiment_runs_through_the_c_abi() {
        unsafe {
            let cfg = CString::new(
                "operations = [\"add\"]\ndks = [4]\ntrials = 5\npreset = \"literals+eq\"\n",
            )
            .unwrap();
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(intension_experiment_run(cfg.as_ptr(), &mut out), IntensionStatus::Ok);
            let csv = CStr::from_ptr(out).to_string_lossy().into_owned();
            assert!(csv.starts_with("operation,dk,proxy"));
            assert_eq!(csv.lines().count(), 3);
            intension_string_free(out);
        }
    }

    #[test]
    fn truncation_is_nul_terminated() {
        unsafe {
            let preset = CString::new("bad").unwrap();
            let mut vocab: *mut IntensionVocabulary = ptr::null_mut();
            intension_vocabulary_new(preset.as_ptr(), 8, &mut vocab);
            let mut buf = [0 as c_char; 4];
            let needed = intension_last_error(buf.as_mut_ptr(), buf.len());
            assert!(needed > 4);
            assert_eq!(buf[3], 0);
        }
    }
}
