//! C ABI over the `infoband` library.
//!
//! Models are opaque `IbModel` handles. Every fallible function returns an
//! `IbStatus`; on failure `ib_last_error_message` describes the most recent
//! error on the calling thread. Strings returned to the caller must be
//! released with `ib_string_free`, handles with `ib_model_free`.
//!
//! A null `prompt` is the empty prompt.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use infoband::decoding::{decode, DecodeConfig, StrategyKind};
use infoband::information::{exact_entropy, information_content, mc_entropy};
use infoband::lm::{sequence_log_prob, train_ngram, LanguageModel, NgramModel, PrefixedModel, Sequence};
use infoband::stats::{classify, welch_t_test, Alternative, Membership};
use infoband::Error;

/// Opaque trained model.
pub struct IbModel {
    inner: NgramModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    DataError = 4,
    CapExceeded = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbMembership {
    Inside = 0,
    Above = 1,
    Below = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbStrategy {
    Greedy = 0,
    Beam = 1,
    DiverseBeam = 2,
    Ancestral = 3,
    TopK = 4,
    Nucleus = 5,
    Mbr = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbAlternative {
    TwoSided = 0,
    Greater = 1,
    Less = 2,
}

/// Decoding parameters; fields a strategy does not use are ignored.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbDecodeParams {
    pub strategy: IbStrategy,
    /// Beam width, diverse-beam total width, or top-k size.
    pub k: usize,
    pub groups: usize,
    pub lambda: f64,
    pub p: f64,
    /// MBR sample count.
    pub samples: usize,
    /// MBR n-gram order.
    pub max_n: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IbEntropyEstimate {
    pub mean: f64,
    pub std_dev: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IbTTest {
    pub t: f64,
    pub dof: f64,
    pub p_value: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

struct Failure(IbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::SupportTooLarge { .. } => IbStatus::CapExceeded,
            Error::InvalidParameter(_) => IbStatus::InvalidArgument,
            _ => IbStatus::DataError,
        };
        Failure(status, e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> IbStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure(IbStatus::Panic, format!("internal panic: {msg}")))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            IbStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
            status
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(IbStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(IbStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn prompt_arg<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        Ok("")
    } else {
        str_arg(s, "prompt")
    }
}

/// # Safety
/// `m` must be null or a live handle.
unsafe fn model_arg<'a>(m: *const IbModel) -> Result<&'a NgramModel, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

fn conditional<'a>(model: &'a NgramModel, prompt: &str) -> Result<PrefixedModel<&'a NgramModel>, Failure> {
    Ok(PrefixedModel::from_text(model, prompt)?)
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(IbStatus::DataError, "string contains NUL".into()))?;
    // SAFETY: checked non-null by every caller before computing `s`.
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Trains a character n-gram model on `n_lines` strings.
///
/// # Safety
/// `lines` must point to `n_lines` valid NUL-terminated strings; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn ib_model_train(
    lines: *const *const c_char,
    n_lines: usize,
    order: usize,
    alpha: f64,
    max_length: usize,
    out: *mut *mut IbModel,
) -> IbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if lines.is_null() && n_lines > 0 {
            return Err(null("lines"));
        }
        let mut corpus = Vec::with_capacity(n_lines);
        for i in 0..n_lines {
            corpus.push(str_arg(*lines.add(i), "corpus line")?);
        }
        let inner = train_ngram(&corpus, order, alpha, max_length)?;
        *out = Box::into_raw(Box::new(IbModel { inner }));
        Ok(())
    })
}

/// Loads a model from the JSON written by `ib_model_to_json`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ib_model_from_json(json: *const c_char, out: *mut *mut IbModel) -> IbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = NgramModel::from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(IbModel { inner }));
        Ok(())
    })
}

/// Serializes a model; free the result with `ib_string_free`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ib_model_to_json(model: *const IbModel, out: *mut *mut c_char) -> IbStatus {
    guard(|| {
        let m = model_arg(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        out_string(m.to_json()?, out)
    })
}

/// Number of symbols, not counting EOS.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ib_model_vocab_size(model: *const IbModel, out: *mut usize) -> IbStatus {
    guard(|| {
        let m = model_arg(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.vocab().len();
        Ok(())
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ib_model_free(model: *mut IbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// `log q(text | prompt)` in nats; `-inf` when the string has zero
/// probability.
///
/// # Safety
/// Pointers must be valid; `prompt` may be null.
#[no_mangle]
pub unsafe extern "C" fn ib_log_prob(
    model: *const IbModel,
    prompt: *const c_char,
    text: *const c_char,
    out: *mut f64,
) -> IbStatus {
    guard(|| {
        let m = conditional(model_arg(model)?, prompt_arg(prompt)?)?;
        let y = Sequence::parse(m.vocab(), str_arg(text, "text")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = sequence_log_prob(&m, &y)?;
        Ok(())
    })
}

/// Total and length-normalized information content of `text` (nats).
///
/// # Safety
/// Pointers must be valid; `prompt` may be null.
#[no_mangle]
pub unsafe extern "C" fn ib_information(
    model: *const IbModel,
    prompt: *const c_char,
    text: *const c_char,
    total: *mut f64,
    normalized: *mut f64,
) -> IbStatus {
    guard(|| {
        let m = conditional(model_arg(model)?, prompt_arg(prompt)?)?;
        let y = Sequence::parse(m.vocab(), str_arg(text, "text")?)?;
        if total.is_null() || normalized.is_null() {
            return Err(null("output"));
        }
        let p = information_content(&m, &y)?;
        *total = p.total;
        *normalized = p.normalized;
        Ok(())
    })
}

/// Exact entropy and information standard deviation by enumerating at most
/// `cap` strings.
///
/// # Safety
/// Pointers must be valid; `prompt` may be null.
#[no_mangle]
pub unsafe extern "C" fn ib_exact_entropy(
    model: *const IbModel,
    prompt: *const c_char,
    cap: usize,
    entropy: *mut f64,
    std_dev: *mut f64,
) -> IbStatus {
    guard(|| {
        let m = conditional(model_arg(model)?, prompt_arg(prompt)?)?;
        if entropy.is_null() || std_dev.is_null() {
            return Err(null("output"));
        }
        let e = exact_entropy(&m, cap)?;
        *entropy = e.entropy;
        *std_dev = e.std_dev;
        Ok(())
    })
}

/// Monte Carlo entropy estimate from `samples` seeded ancestral draws.
///
/// # Safety
/// Pointers must be valid; `prompt` may be null.
#[no_mangle]
pub unsafe extern "C" fn ib_mc_entropy(
    model: *const IbModel,
    prompt: *const c_char,
    samples: usize,
    seed: u64,
    out: *mut IbEntropyEstimate,
) -> IbStatus {
    guard(|| {
        let m = conditional(model_arg(model)?, prompt_arg(prompt)?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let e = mc_entropy(&m, samples, seed)?;
        *out = IbEntropyEstimate {
            mean: e.mean,
            std_dev: e.std_dev,
            std_error: e.std_error,
            samples: e.samples,
        };
        Ok(())
    })
}

/// Default parameters of a strategy.
#[no_mangle]
pub extern "C" fn ib_decode_params_default(strategy: IbStrategy, seed: u64) -> IbDecodeParams {
    let mut p = IbDecodeParams {
        strategy,
        k: 0,
        groups: 0,
        lambda: 0.0,
        p: 0.0,
        samples: 0,
        max_n: 0,
        seed,
    };
    match DecodeConfig::default_for(kind(strategy), seed) {
        DecodeConfig::Greedy | DecodeConfig::Ancestral { .. } => {}
        DecodeConfig::Beam { k } | DecodeConfig::TopK { k, .. } => p.k = k,
        DecodeConfig::DiverseBeam { k, groups, lambda } => {
            p.k = k;
            p.groups = groups;
            p.lambda = lambda;
        }
        DecodeConfig::Nucleus { p: mass, .. } => p.p = mass,
        DecodeConfig::Mbr { samples, max_n, .. } => {
            p.samples = samples;
            p.max_n = max_n;
        }
    }
    p
}

fn kind(s: IbStrategy) -> StrategyKind {
    match s {
        IbStrategy::Greedy => StrategyKind::Greedy,
        IbStrategy::Beam => StrategyKind::Beam,
        IbStrategy::DiverseBeam => StrategyKind::DiverseBeam,
        IbStrategy::Ancestral => StrategyKind::Ancestral,
        IbStrategy::TopK => StrategyKind::TopK,
        IbStrategy::Nucleus => StrategyKind::Nucleus,
        IbStrategy::Mbr => StrategyKind::Mbr,
    }
}

fn to_config(p: &IbDecodeParams) -> DecodeConfig {
    let seed = p.seed;
    match p.strategy {
        IbStrategy::Greedy => DecodeConfig::Greedy,
        IbStrategy::Beam => DecodeConfig::Beam { k: p.k },
        IbStrategy::DiverseBeam => DecodeConfig::DiverseBeam {
            k: p.k,
            groups: p.groups,
            lambda: p.lambda,
        },
        IbStrategy::Ancestral => DecodeConfig::Ancestral { seed },
        IbStrategy::TopK => DecodeConfig::TopK { k: p.k, seed },
        IbStrategy::Nucleus => DecodeConfig::Nucleus { p: p.p, seed },
        IbStrategy::Mbr => DecodeConfig::Mbr {
            samples: p.samples,
            max_n: p.max_n,
            seed,
        },
    }
}

/// Decodes one continuation; free `text` with `ib_string_free`.
///
/// # Safety
/// Pointers must be valid; `prompt` may be null.
#[no_mangle]
pub unsafe extern "C" fn ib_decode(
    model: *const IbModel,
    prompt: *const c_char,
    params: *const IbDecodeParams,
    text: *mut *mut c_char,
    log_prob: *mut f64,
) -> IbStatus {
    guard(|| {
        let m = conditional(model_arg(model)?, prompt_arg(prompt)?)?;
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        if text.is_null() || log_prob.is_null() {
            return Err(null("output"));
        }
        let c = decode(&m, &to_config(params), &[])?;
        *log_prob = c.log_prob;
        out_string(c.sequence.text(m.vocab()), text)
    })
}

/// Where `information` falls relative to `[mean − std_dev, mean + std_dev]`.
#[no_mangle]
pub extern "C" fn ib_band_membership(information: f64, mean: f64, std_dev: f64) -> IbMembership {
    match classify(information, mean, std_dev) {
        Membership::Inside => IbMembership::Inside,
        Membership::Above => IbMembership::Above,
        Membership::Below => IbMembership::Below,
    }
}

/// Welch (or paired) t-test.
///
/// # Safety
/// `a` and `b` must point to `na` and `nb` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ib_welch_t_test(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    paired: bool,
    alternative: IbAlternative,
    out: *mut IbTTest,
) -> IbStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let alt = match alternative {
            IbAlternative::TwoSided => Alternative::TwoSided,
            IbAlternative::Greater => Alternative::Greater,
            IbAlternative::Less => Alternative::Less,
        };
        let r = welch_t_test(
            std::slice::from_raw_parts(a, na),
            std::slice::from_raw_parts(b, nb),
            paired,
            alt,
        )?;
        *out = IbTTest {
            t: r.t,
            dof: r.dof,
            p_value: r.p_value,
        };
        Ok(())
    })
}

/// Copy of the last error message on this thread, or null if the last call
/// succeeded. Free with `ib_string_free`.
#[no_mangle]
pub extern "C" fn ib_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_deref() {
        Some(msg) => CString::new(msg.replace('\0', " "))
            .map(CString::into_raw)
            .unwrap_or(ptr::null_mut()),
        None => ptr::null_mut(),
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ib_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
