//! C ABI over the triplex clustering, metric and propagation routines.
//!
//! Every entry point returns a [`TriplexStatus`]. On failure the message is
//! available from [`triplex_last_error`] on the same thread until the next
//! failing call. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use triplex::cluster::{gmm_fit, hdbscan_fit, kmeans_fit, GmmOptions, KMeansOptions};
use triplex::embed::{load_matrix, save_matrix, EmbeddingMatrix, RowsView};
use triplex::metrics::{ari, nmi, silhouette};
use triplex::propagate::propagate_labels;
use triplex::repr::ReprMode;
use triplex::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriplexStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Compute = 5,
    Panic = 6,
}

/// Row-major matrix of points with one id per row.
pub struct TriplexMatrix {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f64>,
    provider: String,
    mode: ReprMode,
}

impl TriplexMatrix {
    fn view(&self) -> RowsView<'_> {
        RowsView::new(&self.data, self.dim)
    }

    fn rows(&self) -> usize {
        self.ids.len()
    }

    fn embedding(&self, provider: &str) -> triplex::Result<EmbeddingMatrix> {
        let rows = self.view().rows().map(<[f64]>::to_vec).collect();
        EmbeddingMatrix::from_raw(self.ids.clone(), self.dim, rows, provider, self.mode)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TriplexStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } | Error::MissingInput(_) => TriplexStatus::Io,
            Error::Format(_) | Error::Corrupt { .. } | Error::Conllu { .. } | Error::Json(_) | Error::Csv(_) => {
                TriplexStatus::Format
            }
            Error::InvalidArgument(_) | Error::Config(_) | Error::InvalidCategory(_) => {
                TriplexStatus::InvalidArgument
            }
            _ => TriplexStatus::Compute,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TriplexStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(TriplexStatus::InvalidArgument, msg.into())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TriplexStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TriplexStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            TriplexStatus::Panic
        }
    }
}

unsafe fn matrix<'a>(m: *const TriplexMatrix, what: &str) -> Result<&'a TriplexMatrix, Failure> {
    m.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

unsafe fn write<T>(p: *mut T, v: T) {
    if !p.is_null() {
        *p = v;
    }
}

/// Message of the last failure on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn triplex_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn triplex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `rows * dim` doubles into a new matrix. Free with [`triplex_matrix_free`].
///
/// # Safety
/// `data` must point to `rows * dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn triplex_matrix_from_rows(
    data: *const f64,
    rows: usize,
    dim: usize,
    out: *mut *mut TriplexMatrix,
) -> TriplexStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        let len = rows.checked_mul(dim).ok_or_else(|| invalid("rows * dim overflows"))?;
        let data = in_slice(data, len, "data")?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("matrix contains a non-finite value"));
        }
        let m = TriplexMatrix {
            ids: (0..rows).map(|i| i.to_string()).collect(),
            dim,
            data: data.to_vec(),
            provider: "ffi".into(),
            mode: ReprMode::Abstract,
        };
        *out = Box::into_raw(Box::new(m));
        Ok(())
    })
}

/// Reads an embedding matrix file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn triplex_matrix_load(path: *const c_char, out: *mut *mut TriplexMatrix) -> TriplexStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let e = load_matrix(&path_arg(path)?)?;
        let m = TriplexMatrix {
            ids: e.doc_ids().to_vec(),
            dim: e.dim(),
            data: e.as_slice().to_vec(),
            provider: e.provider_name().to_string(),
            mode: e.mode(),
        };
        *out = Box::into_raw(Box::new(m));
        Ok(())
    })
}

/// Writes the matrix as an embedding file; rows are l2-normalized on the way out.
///
/// # Safety
/// `m` must come from this library; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn triplex_matrix_save(m: *const TriplexMatrix, path: *const c_char) -> TriplexStatus {
    guard(|| {
        let m = matrix(m, "matrix")?;
        save_matrix(&m.embedding(&m.provider)?, &path_arg(path)?)?;
        Ok(())
    })
}

/// Row count, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn triplex_matrix_rows(m: *const TriplexMatrix) -> usize {
    m.as_ref().map_or(0, TriplexMatrix::rows)
}

/// Column count, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn triplex_matrix_dim(m: *const TriplexMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.dim)
}

/// Copies row `row` into `out` (`dim` doubles).
///
/// # Safety
/// `m` must come from this library; `out` must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn triplex_matrix_row(m: *const TriplexMatrix, row: usize, out: *mut f64) -> TriplexStatus {
    guard(|| {
        let m = matrix(m, "matrix")?;
        if row >= m.rows() {
            return Err(invalid(format!("row {row} out of range for {} rows", m.rows())));
        }
        out_slice(out, m.dim, "out")?.copy_from_slice(m.view().row(row));
        Ok(())
    })
}

/// Releases a matrix. NULL is ignored.
///
/// # Safety
/// `m` must be NULL or a matrix from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn triplex_matrix_free(m: *mut TriplexMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

fn signed(labels: &[usize], out: &mut [i64]) {
    for (o, &l) in out.iter_mut().zip(labels) {
        *o = l as i64;
    }
}

/// KMeans with k-means++ seeding and 10 restarts. Writes one label per row.
///
/// # Safety
/// `m` must come from this library; `labels_out` must hold one `int64_t` per
/// row; `objective_out` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn triplex_kmeans(
    m: *const TriplexMatrix,
    k: usize,
    seed: u64,
    labels_out: *mut i64,
    objective_out: *mut f64,
) -> TriplexStatus {
    guard(|| {
        let m = matrix(m, "matrix")?;
        let out = out_slice(labels_out, m.rows(), "labels_out")?;
        let fit = kmeans_fit(m.view(), k, seed, KMeansOptions::default())?;
        signed(&fit.labels, out);
        write(objective_out, fit.objective);
        Ok(())
    })
}

/// Diagonal-covariance GMM; the objective is the mean log-likelihood.
///
/// # Safety
/// As for [`triplex_kmeans`].
#[no_mangle]
pub unsafe extern "C" fn triplex_gmm(
    m: *const TriplexMatrix,
    k: usize,
    seed: u64,
    labels_out: *mut i64,
    objective_out: *mut f64,
) -> TriplexStatus {
    guard(|| {
        let m = matrix(m, "matrix")?;
        let out = out_slice(labels_out, m.rows(), "labels_out")?;
        let fit = gmm_fit(m.view(), k, seed, GmmOptions::default())?;
        signed(&fit.partition.labels, out);
        write(objective_out, fit.partition.objective);
        Ok(())
    })
}

/// HDBSCAN; noise rows get -1. `min_samples` 0 means `min_cluster_size`.
///
/// # Safety
/// `m` must come from this library; `labels_out` must hold one `int64_t` per
/// row; the scalar outputs may be NULL.
#[no_mangle]
pub unsafe extern "C" fn triplex_hdbscan(
    m: *const TriplexMatrix,
    min_cluster_size: usize,
    min_samples: usize,
    labels_out: *mut i64,
    n_clusters_out: *mut usize,
    noise_fraction_out: *mut f64,
) -> TriplexStatus {
    guard(|| {
        let m = matrix(m, "matrix")?;
        let out = out_slice(labels_out, m.rows(), "labels_out")?;
        let fit = hdbscan_fit(m.view(), min_cluster_size, (min_samples > 0).then_some(min_samples))?;
        out.copy_from_slice(&fit.labels);
        write(n_clusters_out, fit.n_clusters);
        write(noise_fraction_out, fit.noise_fraction);
        Ok(())
    })
}

/// Adjusted Rand index of two labelings of length `n`.
///
/// # Safety
/// `a` and `b` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn triplex_ari(a: *const i64, b: *const i64, n: usize, out: *mut f64) -> TriplexStatus {
    guard(|| {
        let (a, b) = (in_slice(a, n, "a")?, in_slice(b, n, "b")?);
        *out_slice(out, 1, "out")?.first_mut().expect("one slot") = ari(a, b)?;
        Ok(())
    })
}

/// Normalized mutual information (arithmetic normalization).
///
/// # Safety
/// As for [`triplex_ari`].
#[no_mangle]
pub unsafe extern "C" fn triplex_nmi(a: *const i64, b: *const i64, n: usize, out: *mut f64) -> TriplexStatus {
    guard(|| {
        let (a, b) = (in_slice(a, n, "a")?, in_slice(b, n, "b")?);
        *out_slice(out, 1, "out")?.first_mut().expect("one slot") = nmi(a, b)?;
        Ok(())
    })
}

/// Mean silhouette with Euclidean distances; -1 labels form their own group.
///
/// # Safety
/// `m` must come from this library; `labels` must hold one value per row.
#[no_mangle]
pub unsafe extern "C" fn triplex_silhouette(m: *const TriplexMatrix, labels: *const i64, out: *mut f64) -> TriplexStatus {
    guard(|| {
        let m = matrix(m, "matrix")?;
        let labels = in_slice(labels, m.rows(), "labels")?;
        *out_slice(out, 1, "out")?.first_mut().expect("one slot") = silhouette(m.view(), labels)?;
        Ok(())
    })
}

/// Gives every target row the label of its most cosine-similar source row.
///
/// # Safety
/// Both matrices must come from this library; `source_labels` must hold one
/// value per source row and `labels_out` one per target row;
/// `similarity_out` may be NULL or hold one double per target row.
#[no_mangle]
pub unsafe extern "C" fn triplex_propagate(
    source: *const TriplexMatrix,
    source_labels: *const i64,
    target: *const TriplexMatrix,
    labels_out: *mut i64,
    similarity_out: *mut f64,
) -> TriplexStatus {
    guard(|| {
        let (s, t) = (matrix(source, "source")?, matrix(target, "target")?);
        let labels = in_slice(source_labels, s.rows(), "source_labels")?;
        let out = out_slice(labels_out, t.rows(), "labels_out")?;
        // provenance is irrelevant here; only the geometry is compared
        let (se, te) = (s.embedding("ffi")?, t.embedding("ffi")?);
        let map = propagate_labels(&se, labels, &te, 1)?;
        for (o, a) in out.iter_mut().zip(&map.assignments) {
            *o = a.cluster;
        }
        if !similarity_out.is_null() {
            let sims = out_slice(similarity_out, t.rows(), "similarity_out")?;
            for (o, a) in sims.iter_mut().zip(&map.assignments) {
                *o = a.similarity;
            }
        }
        Ok(())
    })
}

/// Lowercases and collapses whitespace. Free the result with [`triplex_string_free`].
///
/// # Safety
/// `raw` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn triplex_clean_text(raw: *const c_char, out: *mut *mut c_char) -> TriplexStatus {
    guard(|| {
        if raw.is_null() {
            return Err(null("raw"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(raw).to_str().map_err(|_| invalid("text is not valid UTF-8"))?;
        let cleaned = CString::new(triplex::corpus::clean_text(s)).map_err(|_| invalid("text contains NUL"))?;
        *out = cleaned.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn triplex_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
