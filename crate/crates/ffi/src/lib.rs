//! C ABI for the embedding-alignment toolkit.
//!
//! Handles are opaque pointers created and destroyed by this library;
//! every fallible call returns an [`LxStatus`] and leaves a human-readable
//! message for the calling thread retrievable via
//! [`lx_last_error_message`]. Vectors cross the boundary as caller-owned
//! `double` buffers, token lists as arrays of NUL-terminated UTF-8 strings.
//!
//! The C header is generated into `include/lexalign.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lexalign::align::{self, AlignmentModel, Direction};
use lexalign::embedding::{self, Collection, EmbeddingSet};
use lexalign::lexical::{self, RboVariant};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LxStatus {
    Ok = 0,
    /// File could not be read or written.
    Io = 1,
    /// Input file or argument failed to parse or validate.
    Parse = 2,
    /// The two vocabularies share no tokens.
    NoOverlap = 3,
    /// Dimensions of the operands disagree.
    DimMismatch = 4,
    /// Degenerate fit input (e.g. all source rows identical).
    Degenerate = 5,
    /// Null pointer or out-of-range scalar argument.
    InvalidArgument = 6,
    /// Lookup key not present.
    NotFound = 7,
    /// Internal failure (a bug; the message carries details).
    Internal = 8,
}

/// Which collection an embedding set belongs to.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LxCollection {
    Tweet = 0,
    News = 1,
}

impl From<LxCollection> for Collection {
    fn from(value: LxCollection) -> Self {
        match value {
            LxCollection::Tweet => Collection::Tweet,
            LxCollection::News => Collection::News,
        }
    }
}

/// Transformation orientation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LxDirection {
    T2N = 0,
    N2T = 1,
}

impl From<LxDirection> for Direction {
    fn from(value: LxDirection) -> Self {
        match value {
            LxDirection::T2N => Direction::T2N,
            LxDirection::N2T => Direction::N2T,
        }
    }
}

/// RBO estimate variant.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LxRboVariant {
    Extrapolated = 0,
    Min = 1,
}

/// Opaque embedding-set handle.
pub struct LxEmbeddings {
    inner: EmbeddingSet,
}

/// Opaque alignment-model handle.
pub struct LxModel {
    inner: AlignmentModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl AsRef<str>) {
    let sanitized = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: LxStatus, message: impl AsRef<str>) -> LxStatus {
    set_error(message);
    status
}

/// Message describing the most recent failure on the calling thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn embedding_status(err: &embedding::Error) -> LxStatus {
    match err {
        embedding::Error::Io(_) => LxStatus::Io,
        _ => LxStatus::Parse,
    }
}

fn align_status(err: &align::Error) -> LxStatus {
    match err {
        align::Error::NoOverlap | align::Error::InsufficientOverlap { .. } => LxStatus::NoOverlap,
        align::Error::DimMismatch { .. } => LxStatus::DimMismatch,
        align::Error::DegenerateSource
        | align::Error::DegenerateTarget
        | align::Error::NonFinite => LxStatus::Degenerate,
        align::Error::LanguageMismatch { .. } => LxStatus::InvalidArgument,
        align::Error::ModelParse { .. } => LxStatus::Parse,
        align::Error::Io(_) => LxStatus::Io,
    }
}

unsafe fn cstr<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, LxStatus> {
    if ptr.is_null() {
        return Err(fail(LxStatus::InvalidArgument, format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(LxStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn guard<F: FnOnce() -> LxStatus>(body: F) -> LxStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(LxStatus::Internal, "internal panic"),
    }
}

/// Loads an embedding set from a plain-text file. On success `*out` owns
/// the new handle; release it with `lx_embeddings_free`.
///
/// # Safety
/// `path` and `language` must be valid NUL-terminated strings and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_embeddings_load(
    path: *const c_char,
    language: *const c_char,
    collection: LxCollection,
    out: *mut *mut LxEmbeddings,
) -> LxStatus {
    guard(|| {
        if out.is_null() {
            return fail(LxStatus::InvalidArgument, "out is null");
        }
        let path = match cstr(path, "path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let language = match cstr(language, "language") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match embedding::load_embeddings(path, language, collection.into()) {
            Ok(set) => {
                *out = Box::into_raw(Box::new(LxEmbeddings { inner: set }));
                LxStatus::Ok
            }
            Err(e) => fail(embedding_status(&e), e.to_string()),
        }
    })
}

/// Writes an embedding set to a plain-text file.
///
/// # Safety
/// `set` must be a live handle from this library; `path` a valid string.
#[no_mangle]
pub unsafe extern "C" fn lx_embeddings_save(
    set: *const LxEmbeddings,
    path: *const c_char,
) -> LxStatus {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return fail(LxStatus::InvalidArgument, "set is null");
        };
        let path = match cstr(path, "path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match embedding::save_embeddings(&set.inner, path) {
            Ok(()) => LxStatus::Ok,
            Err(e) => fail(embedding_status(&e), e.to_string()),
        }
    })
}

/// Releases an embedding-set handle; a null pointer is a no-op.
///
/// # Safety
/// `set` must be null or a live handle, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lx_embeddings_free(set: *mut LxEmbeddings) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of tokens, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lx_embeddings_len(set: *const LxEmbeddings) -> usize {
    set.as_ref().map_or(0, |s| s.inner.len())
}

/// Embedding dimension, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lx_embeddings_dim(set: *const LxEmbeddings) -> usize {
    set.as_ref().map_or(0, |s| s.inner.dim())
}

/// Copies the vector of `token` into `out_vec` (length `len`, which must
/// equal the set's dimension). Absence is reported as `NotFound`.
///
/// # Safety
/// `out_vec` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lx_embeddings_lookup(
    set: *const LxEmbeddings,
    token: *const c_char,
    out_vec: *mut f64,
    len: usize,
) -> LxStatus {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return fail(LxStatus::InvalidArgument, "set is null");
        };
        let token = match cstr(token, "token") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out_vec.is_null() {
            return fail(LxStatus::InvalidArgument, "out_vec is null");
        }
        if len != set.inner.dim() {
            return fail(
                LxStatus::DimMismatch,
                format!("buffer length {len} != dim {}", set.inner.dim()),
            );
        }
        match set.inner.lookup(token) {
            Some(row) => {
                for (i, v) in row.iter().enumerate() {
                    *out_vec.add(i) = *v;
                }
                LxStatus::Ok
            }
            None => fail(LxStatus::NotFound, format!("token {token:?} not found")),
        }
    })
}

/// Fits an alignment model over the common vocabulary of `source` (tweet
/// side) and `target` (news side). `top_f = 0` keeps the whole common
/// vocabulary. On success `*out` owns the model handle.
///
/// # Safety
/// All handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_align_fit(
    source: *const LxEmbeddings,
    target: *const LxEmbeddings,
    top_f: usize,
    direction: LxDirection,
    out: *mut *mut LxModel,
) -> LxStatus {
    guard(|| {
        let (Some(source), Some(target)) = (source.as_ref(), target.as_ref()) else {
            return fail(LxStatus::InvalidArgument, "source or target is null");
        };
        if out.is_null() {
            return fail(LxStatus::InvalidArgument, "out is null");
        }
        let top_f = if top_f == 0 { None } else { Some(top_f) };
        let fitted = align::common_vocab(&source.inner, &target.inner, top_f)
            .and_then(|pairs| align::procrustes_fit(&pairs, direction.into()));
        match fitted {
            Ok(model) => {
                *out = Box::into_raw(Box::new(LxModel { inner: model }));
                LxStatus::Ok
            }
            Err(e) => fail(align_status(&e), e.to_string()),
        }
    })
}

/// Applies a fitted model to every row of a set, producing a new handle.
///
/// # Safety
/// All handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_align_apply(
    model: *const LxModel,
    set: *const LxEmbeddings,
    out: *mut *mut LxEmbeddings,
) -> LxStatus {
    guard(|| {
        let (Some(model), Some(set)) = (model.as_ref(), set.as_ref()) else {
            return fail(LxStatus::InvalidArgument, "model or set is null");
        };
        if out.is_null() {
            return fail(LxStatus::InvalidArgument, "out is null");
        }
        match align::apply_alignment(&model.inner, &set.inner) {
            Ok(transformed) => {
                *out = Box::into_raw(Box::new(LxEmbeddings { inner: transformed }));
                LxStatus::Ok
            }
            Err(e) => fail(align_status(&e), e.to_string()),
        }
    })
}

/// Serializes a model to its structured text format.
///
/// # Safety
/// `model` must be a live handle; `path` a valid string.
#[no_mangle]
pub unsafe extern "C" fn lx_model_save(model: *const LxModel, path: *const c_char) -> LxStatus {
    guard(|| {
        let Some(model) = model.as_ref() else {
            return fail(LxStatus::InvalidArgument, "model is null");
        };
        let path = match cstr(path, "path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match align::save_model(&model.inner, path) {
            Ok(()) => LxStatus::Ok,
            Err(e) => fail(align_status(&e), e.to_string()),
        }
    })
}

/// Loads a model from its structured text format.
///
/// # Safety
/// `path` must be a valid string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_model_load(path: *const c_char, out: *mut *mut LxModel) -> LxStatus {
    guard(|| {
        if out.is_null() {
            return fail(LxStatus::InvalidArgument, "out is null");
        }
        let path = match cstr(path, "path") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match align::load_model(path) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(LxModel { inner: model }));
                LxStatus::Ok
            }
            Err(e) => fail(align_status(&e), e.to_string()),
        }
    })
}

/// Releases a model handle; a null pointer is a no-op.
///
/// # Safety
/// `model` must be null or a live handle, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lx_model_free(model: *mut LxModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Model dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lx_model_dim(model: *const LxModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// Fitted scale factor, or NaN for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lx_model_scale(model: *const LxModel) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.inner.scale())
}

/// Frobenius residual of the fit, or NaN for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lx_model_residual(model: *const LxModel) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.inner.residual())
}

/// Extrapolated (or minimum) rank-biased overlap of two token rankings.
/// The lists are arrays of NUL-terminated UTF-8 strings.
///
/// # Safety
/// `a` and `b` must point to `a_len` / `b_len` valid string pointers and
/// `out` to a writable double.
#[no_mangle]
pub unsafe extern "C" fn lx_rbo(
    a: *const *const c_char,
    a_len: usize,
    b: *const *const c_char,
    b_len: usize,
    p: f64,
    variant: LxRboVariant,
    out: *mut f64,
) -> LxStatus {
    guard(|| {
        if out.is_null() {
            return fail(LxStatus::InvalidArgument, "out is null");
        }
        if (a.is_null() && a_len > 0) || (b.is_null() && b_len > 0) {
            return fail(LxStatus::InvalidArgument, "list pointer is null");
        }
        let collect = |ptr: *const *const c_char, len: usize| -> Result<Vec<&str>, LxStatus> {
            (0..len).map(|i| cstr(*ptr.add(i), "list item")).collect()
        };
        let list_a = match collect(a, a_len) {
            Ok(v) => v,
            Err(status) => return status,
        };
        let list_b = match collect(b, b_len) {
            Ok(v) => v,
            Err(status) => return status,
        };
        let variant = match variant {
            LxRboVariant::Extrapolated => RboVariant::Extrapolated,
            LxRboVariant::Min => RboVariant::Min,
        };
        match lexical::rbo_items(&list_a, &list_b, p, variant) {
            Ok(value) => {
                *out = value;
                LxStatus::Ok
            }
            Err(e) => fail(LxStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Cosine similarity of two `len`-dimensional vectors, clamped to [-1, 1].
///
/// # Safety
/// `u` and `v` must point to `len` readable doubles and `out` to a
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn lx_cosine(
    u: *const f64,
    v: *const f64,
    len: usize,
    out: *mut f64,
) -> LxStatus {
    guard(|| {
        if u.is_null() || v.is_null() || out.is_null() {
            return fail(LxStatus::InvalidArgument, "null argument");
        }
        if len == 0 {
            return fail(LxStatus::InvalidArgument, "len is zero");
        }
        let us = std::slice::from_raw_parts(u, len);
        let vs = std::slice::from_raw_parts(v, len);
        let view_u = ndarray::ArrayView1::from(us);
        let view_v = ndarray::ArrayView1::from(vs);
        match lexalign::eval::cosine(view_u, view_v) {
            Ok(value) => {
                *out = value;
                LxStatus::Ok
            }
            Err(e) => fail(LxStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Number of tokens shared by the two sets' vocabularies.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn lx_common_vocab_size(
    source: *const LxEmbeddings,
    target: *const LxEmbeddings,
) -> usize {
    let (Some(source), Some(target)) = (source.as_ref(), target.as_ref()) else {
        return 0;
    };
    source
        .inner
        .tokens()
        .iter()
        .filter(|t| target.inner.lookup(t).is_some())
        .count()
}

/// Copies the token at `rank` into `buffer` (capacity `buffer_len`,
/// including the NUL). Reports `NotFound` past the end and `DimMismatch`
/// when the buffer is too small; `*written` receives the byte count
/// excluding the NUL.
///
/// # Safety
/// `buffer` must point to `buffer_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lx_embeddings_token(
    set: *const LxEmbeddings,
    rank: usize,
    buffer: *mut c_char,
    buffer_len: usize,
    written: *mut usize,
) -> LxStatus {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return fail(LxStatus::InvalidArgument, "set is null");
        };
        if buffer.is_null() || written.is_null() {
            return fail(LxStatus::InvalidArgument, "buffer or written is null");
        }
        let Some(token) = set.inner.tokens().get(rank) else {
            return fail(LxStatus::NotFound, format!("rank {rank} out of range"));
        };
        let bytes = token.as_bytes();
        if bytes.len() + 1 > buffer_len {
            return fail(
                LxStatus::DimMismatch,
                format!("buffer of {buffer_len} too small for {} bytes", bytes.len() + 1),
            );
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buffer as *mut u8, bytes.len());
        *buffer.add(bytes.len()) = 0;
        *written = bytes.len();
        LxStatus::Ok
    })
}
