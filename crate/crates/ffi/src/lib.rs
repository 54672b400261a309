//! C interface to the sampler.
//!
//! Every function returns an [`MpggmStatus`]; on failure a thread-local
//! message is available from [`mpggm_last_error_message`]. Handles are
//! opaque and must be released with their `_free` function. Matrices cross
//! the boundary as row-major `double` buffers whose length the caller
//! passes explicitly.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mpggm::data::{DataMatrix, Dataset, Preprocess};
use mpggm::fit::{fit, FitOptions, FitResult};
use mpggm::io::{load_dataset, write_results, Labels, RunMetadata};
use mpggm::simulation::{build_scenario, SimulationScenario};
use mpggm::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpggmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Parse = 4,
    Schema = 5,
    DimensionMismatch = 6,
    DegenerateInput = 7,
    NotPositiveDefinite = 8,
    Sampler = 9,
    Io = 10,
    Panic = 11,
    Other = 12,
}

impl From<&Error> for MpggmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::IndexOutOfRange { .. } | Error::DimensionTooLarge(_) => {
                MpggmStatus::InvalidArgument
            }
            Error::Config(_) => MpggmStatus::Config,
            Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => MpggmStatus::Parse,
            Error::Schema(_) | Error::EmptyGroup { .. } => MpggmStatus::Schema,
            Error::DimensionMismatch(_) => MpggmStatus::DimensionMismatch,
            Error::DegenerateInput(_) => MpggmStatus::DegenerateInput,
            Error::NotPositiveDefinite { .. } => MpggmStatus::NotPositiveDefinite,
            Error::Sampler { .. } | Error::InconsistentState(_) => MpggmStatus::Sampler,
            Error::Io { .. } => MpggmStatus::Io,
            _ => MpggmStatus::Other,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(MpggmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(MpggmStatus::from(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(MpggmStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status and a stored
/// message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MpggmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MpggmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            MpggmStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(MpggmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(MpggmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(MpggmStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(Failure(MpggmStatus::NullPointer, format!("{what} is null")));
    }
    if len < need {
        return Err(invalid(format!("{what} holds {len} values, need {need}")));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

/// Message of the most recent failure on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn mpggm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mpggm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

enum Source {
    Cells(Vec<Vec<Option<DataMatrix>>>),
    Loaded(Dataset),
}

/// Opaque dataset under construction: `groups` sample groups observed on
/// each platform.
pub struct MpggmDataset {
    dims: Vec<usize>,
    groups: usize,
    source: Source,
}

impl MpggmDataset {
    fn build(&self) -> Result<Dataset, Failure> {
        match &self.source {
            Source::Loaded(d) => Ok(d.clone()),
            Source::Cells(cells) => {
                let mut matrices = Vec::new();
                for (s, row) in cells.iter().enumerate() {
                    let mut mats = Vec::new();
                    for (k, m) in row.iter().enumerate() {
                        match m {
                            Some(m) => mats.push(m.clone()),
                            None => {
                                return Err(Failure(
                                    MpggmStatus::Config,
                                    format!("data for platform {s}, group {k} was never set"),
                                ))
                            }
                        }
                    }
                    matrices.push(mats);
                }
                let labels = Labels::generic(&self.dims, self.groups);
                Ok(Dataset::from_matrices(
                    labels.platforms,
                    labels.groups,
                    labels.variables,
                    matrices,
                    Preprocess::default(),
                )?)
            }
        }
    }
}

/// Creates an empty dataset with `platforms` platforms of `dims[s]`
/// variables each and `groups` groups.
///
/// # Safety
/// `dims` must point to `platforms` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mpggm_dataset_new(
    platforms: usize,
    groups: usize,
    dims: *const usize,
    out: *mut *mut MpggmDataset,
) -> MpggmStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        if platforms == 0 || groups == 0 {
            return Err(invalid("need at least one platform and one group"));
        }
        if dims.is_null() {
            return Err(Failure(MpggmStatus::NullPointer, "dims is null".into()));
        }
        let dims = std::slice::from_raw_parts(dims, platforms).to_vec();
        if dims.iter().any(|&p| p == 0) {
            return Err(invalid("every platform needs at least one variable"));
        }
        let ds = MpggmDataset {
            source: Source::Cells(vec![vec![None; groups]; platforms]),
            dims,
            groups,
        };
        *out = Box::into_raw(Box::new(ds));
        Ok(())
    })
}

/// Sets the `rows × dims[platform]` row-major observations of one
/// (platform, group) cell. Columns are centered when the fit starts.
///
/// # Safety
/// `dataset` must come from this library; `values` must point to
/// `rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn mpggm_dataset_set_group(
    dataset: *mut MpggmDataset,
    platform: usize,
    group: usize,
    values: *const f64,
    rows: usize,
    cols: usize,
) -> MpggmStatus {
    guard(|| {
        let ds = deref_mut(dataset, "dataset")?;
        let cells = match &mut ds.source {
            Source::Cells(c) => c,
            Source::Loaded(_) => return Err(invalid("dataset was loaded from a manifest and is read-only")),
        };
        if platform >= ds.dims.len() || group >= ds.groups {
            return Err(invalid(format!("cell ({platform}, {group}) out of range")));
        }
        if cols != ds.dims[platform] {
            return Err(Failure(
                MpggmStatus::DimensionMismatch,
                format!("platform {platform} has {} variables, got {cols} columns", ds.dims[platform]),
            ));
        }
        if rows < 2 {
            return Err(Failure(MpggmStatus::Schema, format!("need at least 2 rows, got {rows}")));
        }
        if values.is_null() {
            return Err(Failure(MpggmStatus::NullPointer, "values is null".into()));
        }
        let data = std::slice::from_raw_parts(values, rows * cols).to_vec();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values must be finite"));
        }
        cells[platform][group] = Some(DataMatrix::new(rows, cols, data)?);
        Ok(())
    })
}

/// Loads a dataset from a manifest file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpggm_dataset_load_manifest(
    path: *const c_char,
    out: *mut *mut MpggmDataset,
) -> MpggmStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let data = load_dataset(Path::new(c_str(path, "path")?))?;
        *out = Box::into_raw(Box::new(loaded(data)));
        Ok(())
    })
}

/// Simulates a dataset from a scenario given as a JSON document.
///
/// # Safety
/// `scenario_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpggm_dataset_simulate(
    scenario_json: *const c_char,
    out: *mut *mut MpggmDataset,
) -> MpggmStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let scenario: SimulationScenario = serde_json::from_str(c_str(scenario_json, "scenario_json")?)
            .map_err(|e| Failure(MpggmStatus::Config, e.to_string()))?;
        scenario.validate()?;
        let data = build_scenario(&scenario)?.dataset()?;
        *out = Box::into_raw(Box::new(loaded(data)));
        Ok(())
    })
}

fn loaded(data: Dataset) -> MpggmDataset {
    MpggmDataset {
        dims: data.dims(),
        groups: data.num_groups(),
        source: Source::Loaded(data),
    }
}

/// # Safety
/// `dataset` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn mpggm_dataset_free(dataset: *mut MpggmDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Run settings. `iterations` counts sweeps kept after burn-in.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MpggmFitOptions {
    pub iterations: usize,
    pub burnin: usize,
    pub chains: usize,
    pub thinning: usize,
    pub seed: u64,
    /// Worker threads, 0 for the default.
    pub threads: usize,
    /// Nonzero runs every chain sequentially on the calling thread.
    pub strict: u8,
    pub mpp_threshold: f64,
}

#[no_mangle]
pub extern "C" fn mpggm_fit_options_default() -> MpggmFitOptions {
    let d = FitOptions::default();
    MpggmFitOptions {
        iterations: d.iterations,
        burnin: d.burnin,
        chains: d.chains,
        thinning: d.thinning,
        seed: d.seed,
        threads: d.threads,
        strict: d.strict as u8,
        mpp_threshold: d.mpp_threshold,
    }
}

impl From<&MpggmFitOptions> for FitOptions {
    fn from(o: &MpggmFitOptions) -> Self {
        FitOptions {
            iterations: o.iterations,
            burnin: o.burnin,
            chains: o.chains,
            thinning: o.thinning,
            seed: o.seed,
            threads: o.threads,
            strict: o.strict != 0,
            mpp_threshold: o.mpp_threshold,
            ..FitOptions::default()
        }
    }
}

/// Opaque fitted posterior summary.
pub struct MpggmResult {
    result: FitResult,
    options: FitOptions,
    labels: Labels,
}

/// Fits the model. `options` may be null for the defaults.
///
/// # Safety
/// `dataset` must come from this library, `options` must be null or valid
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpggm_fit(
    dataset: *const MpggmDataset,
    options: *const MpggmFitOptions,
    out: *mut *mut MpggmResult,
) -> MpggmStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let data = deref(dataset, "dataset")?.build()?;
        let options = match options.as_ref() {
            Some(o) => FitOptions::from(o),
            None => FitOptions::default(),
        };
        let result = fit(&data, &options)?;
        *out = Box::into_raw(Box::new(MpggmResult {
            result,
            options,
            labels: Labels::from_dataset(&data),
        }));
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn mpggm_result_free(result: *mut MpggmResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of platforms, groups and sampled records.
///
/// # Safety
/// `result` must come from this library; each out pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn mpggm_result_shape(
    result: *const MpggmResult,
    platforms: *mut usize,
    groups: *mut usize,
    records: *mut usize,
) -> MpggmStatus {
    guard(|| {
        let s = &deref(result, "result")?.result.summary;
        if let Some(p) = platforms.as_mut() {
            *p = s.platforms();
        }
        if let Some(g) = groups.as_mut() {
            *g = s.groups;
        }
        if let Some(r) = records.as_mut() {
            *r = s.records;
        }
        Ok(())
    })
}

/// Number of variables on `platform`.
///
/// # Safety
/// `result` must come from this library and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpggm_result_dim(result: *const MpggmResult, platform: usize, out: *mut usize) -> MpggmStatus {
    guard(|| {
        let s = &deref(result, "result")?.result.summary;
        let out = deref_mut(out, "out")?;
        *out = *s
            .p
            .get(platform)
            .ok_or_else(|| invalid(format!("platform {platform} out of range")))?;
        Ok(())
    })
}

fn cell_index(r: &MpggmResult, platform: usize, group: usize) -> Result<usize, Failure> {
    let s = &r.result.summary;
    if platform >= s.platforms() || group >= s.groups {
        return Err(invalid(format!("cell ({platform}, {group}) out of range")));
    }
    Ok(s.p[platform])
}

/// Writes the `p × p` edge MPP matrix of one cell into `out` (row-major).
///
/// # Safety
/// `result` must come from this library; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mpggm_result_edge_mpp(
    result: *const MpggmResult,
    platform: usize,
    group: usize,
    out: *mut f64,
    len: usize,
) -> MpggmStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let p = cell_index(r, platform, group)?;
        let out = out_slice(out, len, p * p, "out")?;
        out.copy_from_slice(r.result.summary.edge_mpp[platform][group].as_slice());
        Ok(())
    })
}

/// Writes the `p × p` 0/1 adjacency of the selected graph of one cell.
///
/// # Safety
/// `result` must come from this library; `out` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn mpggm_result_selected(
    result: *const MpggmResult,
    platform: usize,
    group: usize,
    out: *mut u8,
    len: usize,
) -> MpggmStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let p = cell_index(r, platform, group)?;
        let out = out_slice(out, len, p * p, "out")?;
        let g = &r.result.summary.selected[platform][group];
        for i in 0..p {
            for j in 0..p {
                out[i * p + j] = (i != j && g.has_edge(i, j)) as u8;
            }
        }
        Ok(())
    })
}

/// Writes the `K × K` MPP matrix of the group-similarity indicators of one
/// platform.
///
/// # Safety
/// `result` must come from this library; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mpggm_result_gamma_mpp(
    result: *const MpggmResult,
    platform: usize,
    out: *mut f64,
    len: usize,
) -> MpggmStatus {
    guard(|| {
        let r = deref(result, "result")?;
        cell_index(r, platform, 0)?;
        let k = r.result.summary.groups;
        let out = out_slice(out, len, k * k, "out")?;
        out.copy_from_slice(r.result.summary.gamma_mpp[platform].as_slice());
        Ok(())
    })
}

/// Writes the `S × S` MPP matrix of the cross-platform indicators.
///
/// # Safety
/// `result` must come from this library; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mpggm_result_zeta_mpp(result: *const MpggmResult, out: *mut f64, len: usize) -> MpggmStatus {
    guard(|| {
        let s = &deref(result, "result")?.result.summary;
        let n = s.platforms();
        let out = out_slice(out, len, n * n, "out")?;
        out.copy_from_slice(s.zeta_mpp.as_slice());
        Ok(())
    })
}

/// Between-chain MPP correlation. `*available` is set to 0 for single-chain
/// runs, in which case `*out` is left untouched.
///
/// # Safety
/// `result` must come from this library; both out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn mpggm_result_chain_agreement(
    result: *const MpggmResult,
    out: *mut f64,
    available: *mut u8,
) -> MpggmStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let available = deref_mut(available, "available")?;
        let out = deref_mut(out, "out")?;
        match r.result.agreement {
            Some(v) => {
                *out = v;
                *available = 1;
            }
            None => *available = 0,
        }
        Ok(())
    })
}

/// Total Cholesky checks and failures over all chains.
///
/// # Safety
/// `result` must come from this library; out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn mpggm_result_pd_checks(
    result: *const MpggmResult,
    checks: *mut u64,
    failures: *mut u64,
) -> MpggmStatus {
    guard(|| {
        let r = &deref(result, "result")?.result;
        if let Some(c) = checks.as_mut() {
            *c = r.traces.iter().map(|t| t.pd_checks).sum();
        }
        if let Some(f) = failures.as_mut() {
            *f = r.pd_failures();
        }
        Ok(())
    })
}

/// Writes the same summary files as the command-line `fit` into `dir`.
///
/// # Safety
/// `result` must come from this library and `dir` be a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn mpggm_result_write(result: *const MpggmResult, dir: *const c_char) -> MpggmStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let dir = c_str(dir, "dir")?;
        let run = RunMetadata::from_fit(&r.options, &r.result);
        write_results(&r.result.summary, &r.labels, &run, Path::new(dir))?;
        Ok(())
    })
}
