use std::ffi::{CStr, CString};
use std::ptr;

use triplex_ffi::*;

fn last_error() -> String {
    let p = triplex_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// Two tight groups of three points on a line.
fn groups() -> *mut TriplexMatrix {
    let data = [0.0, 0.0, 0.1, 0.0, 0.0, 0.1, 5.0, 5.0, 5.1, 5.0, 5.0, 5.1];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { triplex_matrix_from_rows(data.as_ptr(), 6, 2, &mut m) }, TriplexStatus::Ok);
    m
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(triplex_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn matrix_accessors() {
    let m = groups();
    unsafe {
        assert_eq!(triplex_matrix_rows(m), 6);
        assert_eq!(triplex_matrix_dim(m), 2);
        let mut row = [0.0; 2];
        assert_eq!(triplex_matrix_row(m, 4, row.as_mut_ptr()), TriplexStatus::Ok);
        assert_eq!(row, [5.1, 5.0]);
        assert_eq!(triplex_matrix_row(m, 6, row.as_mut_ptr()), TriplexStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));
        assert_eq!(triplex_matrix_rows(ptr::null()), 0);
        triplex_matrix_free(m);
        triplex_matrix_free(ptr::null_mut());
    }
}

#[test]
fn clustering_entry_points_agree_on_two_groups() {
    let m = groups();
    let mut km = [9i64; 6];
    let mut gm = [9i64; 6];
    let mut hd = [9i64; 6];
    let (mut inertia, mut ll) = (0.0, 0.0);
    let (mut n_clusters, mut noise) = (0usize, 1.0);
    unsafe {
        assert_eq!(triplex_kmeans(m, 2, 42, km.as_mut_ptr(), &mut inertia), TriplexStatus::Ok);
        assert_eq!(triplex_gmm(m, 2, 42, gm.as_mut_ptr(), &mut ll), TriplexStatus::Ok);
        assert_eq!(
            triplex_hdbscan(m, 3, 0, hd.as_mut_ptr(), &mut n_clusters, &mut noise),
            TriplexStatus::Ok
        );
        triplex_matrix_free(m);
    }
    assert!(inertia > 0.0 && inertia < 0.1, "{inertia}");
    assert!(ll.is_finite());
    assert_eq!(n_clusters, 2);
    assert_eq!(noise, 0.0);
    for labels in [km, gm, hd] {
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[1], labels[2]);
        assert_eq!(labels[3], labels[5]);
        assert_ne!(labels[0], labels[3]);
    }
}

#[test]
fn metrics() {
    let a = [0i64, 0, 1, 1];
    let b = [1i64, 1, 0, 0];
    let c = [0i64, 1, 0, 1];
    let (mut x, mut y) = (0.0, 0.0);
    unsafe {
        assert_eq!(triplex_ari(a.as_ptr(), b.as_ptr(), 4, &mut x), TriplexStatus::Ok);
        assert_eq!(triplex_nmi(a.as_ptr(), c.as_ptr(), 4, &mut y), TriplexStatus::Ok);
    }
    assert_eq!(x, 1.0);
    assert_eq!(y, 0.0);

    let pts = [0.0, 1.0, 2.0, 3.0];
    let mut m = ptr::null_mut();
    let mut s = 0.0;
    unsafe {
        assert_eq!(triplex_matrix_from_rows(pts.as_ptr(), 4, 1, &mut m), TriplexStatus::Ok);
        assert_eq!(triplex_silhouette(m, a.as_ptr(), &mut s), TriplexStatus::Ok);
        triplex_matrix_free(m);
    }
    assert!((s - 7.0 / 15.0).abs() < 1e-12);
}

#[test]
fn propagate_copies_nearest_labels() {
    let src = [1.0, 0.0, 0.0, 1.0];
    let tgt = [0.9, 0.1, 0.2, 0.8, 1.0, 1.0];
    let (mut s, mut t) = (ptr::null_mut(), ptr::null_mut());
    let labels = [7i64, -1];
    let mut out = [0i64; 3];
    let mut sim = [0.0; 3];
    unsafe {
        assert_eq!(triplex_matrix_from_rows(src.as_ptr(), 2, 2, &mut s), TriplexStatus::Ok);
        assert_eq!(triplex_matrix_from_rows(tgt.as_ptr(), 3, 2, &mut t), TriplexStatus::Ok);
        assert_eq!(
            triplex_propagate(s, labels.as_ptr(), t, out.as_mut_ptr(), sim.as_mut_ptr()),
            TriplexStatus::Ok
        );
        triplex_matrix_free(s);
        triplex_matrix_free(t);
    }
    // the last target is equidistant and goes to the lower source index
    assert_eq!(out, [7, -1, 7]);
    assert!((sim[2] - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.emb").to_str().unwrap()).unwrap();
    let data = [3.0, 4.0, 0.0, 2.0];
    let (mut m, mut back) = (ptr::null_mut(), ptr::null_mut());
    let mut row = [0.0; 2];
    unsafe {
        assert_eq!(triplex_matrix_from_rows(data.as_ptr(), 2, 2, &mut m), TriplexStatus::Ok);
        assert_eq!(triplex_matrix_save(m, path.as_ptr()), TriplexStatus::Ok);
        assert_eq!(triplex_matrix_load(path.as_ptr(), &mut back), TriplexStatus::Ok);
        assert_eq!(triplex_matrix_rows(back), 2);
        assert_eq!(triplex_matrix_row(back, 0, row.as_mut_ptr()), TriplexStatus::Ok);
        triplex_matrix_free(m);
        triplex_matrix_free(back);
    }
    assert!((row[0] - 0.6).abs() < 1e-7 && (row[1] - 0.8).abs() < 1e-7);
}

#[test]
fn errors_map_to_status_codes() {
    let missing = CString::new("/nonexistent/m.emb").unwrap();
    let mut m = ptr::null_mut();
    let mut x = 0.0;
    let a = [0i64];
    unsafe {
        assert_eq!(triplex_matrix_load(missing.as_ptr(), &mut m), TriplexStatus::Io);
        assert!(last_error().contains("/nonexistent/m.emb"));
        assert_eq!(triplex_matrix_from_rows(ptr::null(), 2, 2, &mut m), TriplexStatus::NullPointer);
        assert_eq!(last_error(), "data is null");
        assert_eq!(triplex_matrix_from_rows([f64::NAN].as_ptr(), 1, 1, &mut m), TriplexStatus::InvalidArgument);
        assert_eq!(triplex_ari(a.as_ptr(), a.as_ptr(), 1, &mut x), TriplexStatus::InvalidArgument);
        let g = groups();
        let mut labels = [0i64; 6];
        assert_eq!(triplex_kmeans(g, 0, 1, labels.as_mut_ptr(), ptr::null_mut()), TriplexStatus::InvalidArgument);
        assert_eq!(triplex_kmeans(g, 2, 1, ptr::null_mut(), ptr::null_mut()), TriplexStatus::NullPointer);
        triplex_matrix_free(g);
    }
}

#[test]
fn clean_text_allocates_an_owned_string() {
    let raw = CString::new("  Deep\n\tLEARNING  models ").unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(triplex_clean_text(raw.as_ptr(), &mut out), TriplexStatus::Ok);
        assert_eq!(CStr::from_ptr(out).to_str().unwrap(), "deep learning models");
        triplex_string_free(out);
        triplex_string_free(ptr::null_mut());
        assert_eq!(triplex_clean_text(ptr::null(), &mut out), TriplexStatus::NullPointer);
    }
}
