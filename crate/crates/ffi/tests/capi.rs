//! Exercises the exported C ABI end to end: handle lifecycle, error codes,
//! and the numeric surface, calling the extern functions exactly as a C
//! client would.

use std::ffi::{CStr, CString};
use std::io::Write as _;
use std::ptr;

use approx::assert_abs_diff_eq;
use lexalign_ffi::*;

fn write_temp(content: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(content.as_bytes()).unwrap();
    f
}

fn c_path(path: &std::path::Path) -> CString {
    CString::new(path.to_str().unwrap()).unwrap()
}

unsafe fn load(path: &std::path::Path, collection: LxCollection) -> *mut LxEmbeddings {
    let mut handle: *mut LxEmbeddings = ptr::null_mut();
    let status = lx_embeddings_load(
        c_path(path).as_ptr(),
        CString::new("en").unwrap().as_ptr(),
        collection,
        &mut handle,
    );
    assert_eq!(status, LxStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(lx_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn load_inspect_lookup_roundtrip() {
    let f = write_temp("alpha 1.0 0.0\nbeta 0.5 0.5\ngamma 0.0 1.0\n");
    unsafe {
        let set = load(f.path(), LxCollection::Tweet);
        assert_eq!(lx_embeddings_len(set), 3);
        assert_eq!(lx_embeddings_dim(set), 2);

        let mut buf = [0.0f64; 2];
        let status = lx_embeddings_lookup(
            set,
            CString::new("beta").unwrap().as_ptr(),
            buf.as_mut_ptr(),
            2,
        );
        assert_eq!(status, LxStatus::Ok);
        assert_eq!(buf, [0.5, 0.5]);

        let status = lx_embeddings_lookup(
            set,
            CString::new("zz").unwrap().as_ptr(),
            buf.as_mut_ptr(),
            2,
        );
        assert_eq!(status, LxStatus::NotFound);
        assert!(last_error().contains("zz"), "{}", last_error());

        // Token fetch by rank.
        let mut name = [0i8; 16];
        let mut written = 0usize;
        let status = lx_embeddings_token(set, 2, name.as_mut_ptr(), name.len(), &mut written);
        assert_eq!(status, LxStatus::Ok);
        assert_eq!(written, 5);
        let token = CStr::from_ptr(name.as_ptr()).to_str().unwrap();
        assert_eq!(token, "gamma");

        // Save and reload through the ABI.
        let out = tempfile::NamedTempFile::new().unwrap();
        assert_eq!(lx_embeddings_save(set, c_path(out.path()).as_ptr()), LxStatus::Ok);
        let back = load(out.path(), LxCollection::Tweet);
        assert_eq!(lx_embeddings_len(back), 3);
        lx_embeddings_free(back);
        lx_embeddings_free(set);
    }
}

#[test]
fn load_errors_surface_as_codes() {
    unsafe {
        let mut handle: *mut LxEmbeddings = ptr::null_mut();
        let missing = CString::new("/nonexistent/file.vec").unwrap();
        let lang = CString::new("en").unwrap();
        let status =
            lx_embeddings_load(missing.as_ptr(), lang.as_ptr(), LxCollection::Tweet, &mut handle);
        assert_eq!(status, LxStatus::Io);
        assert!(handle.is_null());

        let bad = write_temp("a 1.0\nb 1.0 2.0\n");
        let status = lx_embeddings_load(
            c_path(bad.path()).as_ptr(),
            lang.as_ptr(),
            LxCollection::Tweet,
            &mut handle,
        );
        assert_eq!(status, LxStatus::Parse);
        assert!(last_error().contains("DimensionMismatch"), "{}", last_error());

        let status =
            lx_embeddings_load(ptr::null(), lang.as_ptr(), LxCollection::Tweet, &mut handle);
        assert_eq!(status, LxStatus::InvalidArgument);
    }
}

#[test]
fn fit_apply_save_load_model() {
    // Target is the source scaled by 2 and translated: an exact similarity
    // transform, so the fit residual is ~0 and apply reproduces the target.
    let src = write_temp("a 1.0 0.0\nb 0.0 1.0\nc -1.0 0.0\nd 0.0 -1.0\n");
    let tgt = write_temp("a 3.0 1.0\nb 1.0 3.0\nc -1.0 1.0\nd 1.0 -1.0\n");
    unsafe {
        let source = load(src.path(), LxCollection::Tweet);
        let target = load(tgt.path(), LxCollection::News);

        let mut model: *mut LxModel = ptr::null_mut();
        let status = lx_align_fit(source, target, 0, LxDirection::T2N, &mut model);
        assert_eq!(status, LxStatus::Ok);
        assert_eq!(lx_model_dim(model), 2);
        assert_abs_diff_eq!(lx_model_scale(model), 2.0, epsilon = 1e-9);
        assert!(lx_model_residual(model) <= 1e-9);

        let mut mapped: *mut LxEmbeddings = ptr::null_mut();
        assert_eq!(lx_align_apply(model, source, &mut mapped), LxStatus::Ok);
        let mut buf = [0.0f64; 2];
        let token = CString::new("a").unwrap();
        assert_eq!(
            lx_embeddings_lookup(mapped, token.as_ptr(), buf.as_mut_ptr(), 2),
            LxStatus::Ok
        );
        assert_abs_diff_eq!(buf[0], 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(buf[1], 1.0, epsilon = 1e-9);

        // Model persistence through the ABI.
        let file = tempfile::NamedTempFile::new().unwrap();
        assert_eq!(lx_model_save(model, c_path(file.path()).as_ptr()), LxStatus::Ok);
        let mut reloaded: *mut LxModel = ptr::null_mut();
        assert_eq!(lx_model_load(c_path(file.path()).as_ptr(), &mut reloaded), LxStatus::Ok);
        assert_eq!(
            lx_model_scale(reloaded).to_bits(),
            lx_model_scale(model).to_bits()
        );

        lx_model_free(reloaded);
        lx_model_free(model);
        lx_embeddings_free(mapped);
        lx_embeddings_free(target);
        lx_embeddings_free(source);
    }
}

#[test]
fn disjoint_vocabularies_report_no_overlap() {
    let src = write_temp("a 1.0 0.0\nb 0.0 1.0\n");
    let tgt = write_temp("x 1.0 0.0\ny 0.0 1.0\n");
    unsafe {
        let source = load(src.path(), LxCollection::Tweet);
        let target = load(tgt.path(), LxCollection::News);
        assert_eq!(lx_common_vocab_size(source, target), 0);
        let mut model: *mut LxModel = ptr::null_mut();
        let status = lx_align_fit(source, target, 0, LxDirection::T2N, &mut model);
        assert_eq!(status, LxStatus::NoOverlap);
        assert!(model.is_null());
        assert!(last_error().contains("NoOverlap"), "{}", last_error());
        lx_embeddings_free(target);
        lx_embeddings_free(source);
    }
}

#[test]
fn rbo_and_cosine_match_known_values() {
    let a: Vec<CString> = ["a", "b", "c"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let b: Vec<CString> = ["b", "a", "c"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let a_ptrs: Vec<*const std::ffi::c_char> = a.iter().map(|s| s.as_ptr()).collect();
    let b_ptrs: Vec<*const std::ffi::c_char> = b.iter().map(|s| s.as_ptr()).collect();
    unsafe {
        let mut value = 0.0f64;
        let status = lx_rbo(
            a_ptrs.as_ptr(),
            a_ptrs.len(),
            b_ptrs.as_ptr(),
            b_ptrs.len(),
            0.9,
            LxRboVariant::Extrapolated,
            &mut value,
        );
        assert_eq!(status, LxStatus::Ok);
        assert_abs_diff_eq!(value, 0.9, epsilon = 1e-12);

        // Identical lists are exactly 1.
        let status = lx_rbo(
            a_ptrs.as_ptr(),
            a_ptrs.len(),
            a_ptrs.as_ptr(),
            a_ptrs.len(),
            0.9,
            LxRboVariant::Extrapolated,
            &mut value,
        );
        assert_eq!(status, LxStatus::Ok);
        assert_eq!(value, 1.0);

        // Invalid persistence is rejected with a named message.
        let status = lx_rbo(
            a_ptrs.as_ptr(),
            a_ptrs.len(),
            b_ptrs.as_ptr(),
            b_ptrs.len(),
            1.0,
            LxRboVariant::Extrapolated,
            &mut value,
        );
        assert_eq!(status, LxStatus::InvalidArgument);
        assert!(last_error().contains("InvalidPersistence"), "{}", last_error());

        let u = [1.0, 1.0];
        let v = [1.0, 0.0];
        let status = lx_cosine(u.as_ptr(), v.as_ptr(), 2, &mut value);
        assert_eq!(status, LxStatus::Ok);
        assert_abs_diff_eq!(value, 0.7071067811865475, epsilon = 1e-15);

        let zero = [0.0, 0.0];
        let status = lx_cosine(zero.as_ptr(), v.as_ptr(), 2, &mut value);
        assert_eq!(status, LxStatus::InvalidArgument);
        assert!(last_error().contains("ZeroVector"), "{}", last_error());
    }
}

#[test]
fn version_and_null_handling() {
    unsafe {
        let version = CStr::from_ptr(lx_version()).to_str().unwrap();
        assert_eq!(version, env!("CARGO_PKG_VERSION"));
        assert_eq!(lx_embeddings_len(ptr::null()), 0);
        assert_eq!(lx_embeddings_dim(ptr::null()), 0);
        assert!(lx_model_scale(ptr::null()).is_nan());
        lx_embeddings_free(ptr::null_mut());
        lx_model_free(ptr::null_mut());
    }
}
