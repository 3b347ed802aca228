//! C ABI over `eflesh-core`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `_free` function. Every fallible call returns an
//! [`EfleshStatus`]; on failure the message is available from
//! [`eflesh_last_error`] on the same thread until the next failing call.
//!
//! Geometry arguments are millimetres, field points and values are SI.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use eflesh_core::fabrication::layer_index_at_or_above;
use eflesh_core::lattice::modulus_to_beam;
use eflesh_core::magnetics::total_field;
use eflesh_core::mesh::{emit_mesh, parse_mesh, validate_shell, MeshFormat, TriMesh};
use eflesh_core::pipeline::{run_pipeline, PipelineConfig, RunOptions};
use eflesh_core::sensor::{
    forward_signal, localize_contact, sensitivity, ContactState, LocalizeOptions, SensorModel, SignalFrame, SolveStatus,
};
use eflesh_core::{Error, ErrorClass, Vec3};

/// Values per magnetometer frame: five sensors, three axes each.
pub const EFLESH_CHANNELS: usize = 15;

/// Result of every fallible call. Codes 1 to 5 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfleshStatus {
    Ok = 0,
    Usage = 1,
    Io = 2,
    Geometry = 3,
    Fabrication = 4,
    Simulation = 5,
    /// A required pointer was null or a string was not UTF-8.
    InvalidArgument = 6,
    /// The library panicked; the handle involved should be freed and not reused.
    Internal = 7,
}

impl From<ErrorClass> for EfleshStatus {
    fn from(c: ErrorClass) -> Self {
        match c {
            ErrorClass::Usage => EfleshStatus::Usage,
            ErrorClass::Io => EfleshStatus::Io,
            ErrorClass::Geometry => EfleshStatus::Geometry,
            ErrorClass::Fabrication => EfleshStatus::Fabrication,
            ErrorClass::Simulation => EfleshStatus::Simulation,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfleshMeshFormat {
    /// Pick from the file extension.
    Auto = 0,
    StlBinary = 1,
    StlAscii = 2,
    Obj = 3,
}

impl From<EfleshMeshFormat> for MeshFormat {
    fn from(f: EfleshMeshFormat) -> Self {
        match f {
            EfleshMeshFormat::Auto => MeshFormat::Auto,
            EfleshMeshFormat::StlBinary => MeshFormat::StlBinary,
            EfleshMeshFormat::StlAscii => MeshFormat::StlAscii,
            EfleshMeshFormat::Obj => MeshFormat::Obj,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfleshSolveStatus {
    Converged = 0,
    NonConvergence = 1,
    OutOfFootprint = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EfleshShellReport {
    pub closed: bool,
    pub boundary_edge_count: usize,
    pub nonmanifold_edge_count: usize,
    pub signed_volume: f64,
    pub euler_characteristic: i64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EfleshLocalization {
    /// Contact position, mm; z is indentation depth.
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Signal residual norm, tesla.
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: EfleshSolveStatus,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EfleshSensitivity {
    /// Minimum detectable force, newtons.
    pub force: f64,
    /// Indentation at threshold, mm.
    pub depth: f64,
    /// Signal-norm threshold, tesla.
    pub threshold: f64,
}

/// Opaque triangle mesh.
pub struct EfleshMesh(TriMesh);

/// Opaque sensor model.
pub struct EfleshSensorModel(SensorModel);

struct Failure {
    status: EfleshStatus,
    message: String,
}

impl Failure {
    fn arg(message: impl Into<String>) -> Self {
        Failure {
            status: EfleshStatus::InvalidArgument,
            message: message.into(),
        }
    }
}

/// Message with its source chain, as the CLI prints it.
fn chain(e: &dyn std::error::Error) -> String {
    let mut msg = e.to_string();
    let mut src = e.source();
    while let Some(s) = src {
        let part = s.to_string();
        if !msg.contains(&part) {
            msg.push_str(": ");
            msg.push_str(&part);
        }
        src = s.source();
    }
    msg
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e: Error = e.into();
        Failure {
            status: e.class().into(),
            message: chain(&e),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EfleshStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EfleshStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(fail.message);
            fail.status
        }
        Err(panic) => {
            let what = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {what}"));
            EfleshStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::arg(format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::arg(format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::arg(format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::arg(format!("{name} is null")))
}

unsafe fn array_arg<'a, const N: usize>(p: *const f64, name: &str) -> Result<&'a [f64; N], Failure> {
    ref_arg(p.cast::<[f64; N]>(), name)
}

unsafe fn array_out<'a, const N: usize>(p: *mut f64, name: &str) -> Result<&'a mut [f64; N], Failure> {
    out_arg(p.cast::<[f64; N]>(), name)
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn eflesh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eflesh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads an STL or OBJ file; coordinates are multiplied by `unit_scale`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eflesh_mesh_load(
    path: *const c_char,
    format: EfleshMeshFormat,
    unit_scale: f64,
    out: *mut *mut EfleshMesh,
) -> EfleshStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = std::ptr::null_mut();
        let path = PathBuf::from(str_arg(path, "path")?);
        let loaded = parse_mesh(&path, format.into(), unit_scale)?;
        *out = Box::into_raw(Box::new(EfleshMesh(loaded.mesh)));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn eflesh_mesh_free(mesh: *mut EfleshMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn eflesh_mesh_vertex_count(mesh: *const EfleshMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.vertices.len())
}

/// # Safety
/// `mesh` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn eflesh_mesh_triangle_count(mesh: *const EfleshMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.triangles.len())
}

/// Axis-aligned bounds into two arrays of three doubles.
///
/// # Safety
/// `mesh` must be a live handle; `min` and `max` must each hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn eflesh_mesh_bbox(mesh: *const EfleshMesh, min: *mut f64, max: *mut f64) -> EfleshStatus {
    guard(|| {
        let m = ref_arg(mesh, "mesh")?;
        let (lo, hi) = (array_out::<3>(min, "min")?, array_out::<3>(max, "max")?);
        let b = m.0.bbox().ok_or_else(|| Failure {
            status: EfleshStatus::Geometry,
            message: "mesh is empty".into(),
        })?;
        *lo = b.min;
        *hi = b.max;
        Ok(())
    })
}

/// Closure and orientation report for the mesh treated as one shell.
///
/// # Safety
/// `mesh` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eflesh_mesh_validate(mesh: *const EfleshMesh, out: *mut EfleshShellReport) -> EfleshStatus {
    guard(|| {
        let m = ref_arg(mesh, "mesh")?;
        let out = out_arg(out, "out")?;
        let r = validate_shell(&m.0);
        *out = EfleshShellReport {
            closed: r.closed,
            boundary_edge_count: r.boundary_edge_count,
            nonmanifold_edge_count: r.nonmanifold_edge_count,
            signed_volume: r.signed_volume,
            euler_characteristic: r.euler_characteristic,
        };
        Ok(())
    })
}

/// # Safety
/// `mesh` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn eflesh_mesh_save(
    mesh: *const EfleshMesh,
    path: *const c_char,
    format: EfleshMeshFormat,
) -> EfleshStatus {
    guard(|| {
        let m = ref_arg(mesh, "mesh")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        emit_mesh(&m.0, &path, format.into())?;
        Ok(())
    })
}

/// The built-in four-magnet, five-sensor model. Never null.
#[no_mangle]
pub extern "C" fn eflesh_sensor_model_default() -> *mut EfleshSensorModel {
    Box::into_raw(Box::new(EfleshSensorModel(SensorModel::default())))
}

/// Parses a model from the JSON the CLI `sensor-model` command prints.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eflesh_sensor_model_from_json(
    json: *const c_char,
    out: *mut *mut EfleshSensorModel,
) -> EfleshStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = std::ptr::null_mut();
        let model = SensorModel::from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(EfleshSensorModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn eflesh_sensor_model_free(model: *mut EfleshSensorModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Predicted frame for a contact at (x, y) mm pressed `depth` mm.
///
/// # Safety
/// `model` must be a live handle and `out` must hold `EFLESH_CHANNELS` doubles.
#[no_mangle]
pub unsafe extern "C" fn eflesh_forward_signal(
    model: *const EfleshSensorModel,
    x: f64,
    y: f64,
    depth: f64,
    out: *mut f64,
) -> EfleshStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let out = array_out::<EFLESH_CHANNELS>(out, "out")?;
        *out = forward_signal(&ContactState::new(x, y, depth), &m.0)?.values;
        Ok(())
    })
}

/// Contact that best explains one frame. `guess` may be null.
///
/// # Safety
/// `model` must be a live handle, `signal` must hold `EFLESH_CHANNELS`
/// doubles, `guess` is null or holds 3 doubles, `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eflesh_localize(
    model: *const EfleshSensorModel,
    signal: *const f64,
    guess: *const f64,
    out: *mut EfleshLocalization,
) -> EfleshStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let values = *array_arg::<EFLESH_CHANNELS>(signal, "signal")?;
        let out = out_arg(out, "out")?;
        let guess = if guess.is_null() {
            None
        } else {
            let g = array_arg::<3>(guess, "guess")?;
            Some(ContactState::new(g[0], g[1], g[2]))
        };
        let loc = localize_contact(&SignalFrame::new(0.0, values), &m.0, guess, &LocalizeOptions::default())?;
        *out = EfleshLocalization {
            x: loc.contact.x,
            y: loc.contact.y,
            z: loc.contact.z,
            residual_norm: loc.residual_norm,
            iterations: loc.iterations,
            status: match loc.status {
                SolveStatus::Converged => EfleshSolveStatus::Converged,
                SolveStatus::NonConvergence => EfleshSolveStatus::NonConvergence,
                SolveStatus::OutOfFootprint => EfleshSolveStatus::OutOfFootprint,
            },
        };
        Ok(())
    })
}

/// Minimum detectable force at 6σ for per-channel noise `sigma` (T) and
/// contact stiffness `stiffness` (N/mm).
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eflesh_sensitivity(
    model: *const EfleshSensorModel,
    sigma: f64,
    stiffness: f64,
    out: *mut EfleshSensitivity,
) -> EfleshStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let out = out_arg(out, "out")?;
        let s = sensitivity(&m.0, sigma, stiffness)?;
        *out = EfleshSensitivity {
            force: s.force,
            depth: s.depth,
            threshold: s.threshold,
        };
        Ok(())
    })
}

/// Flux density (T) of the model's magnets at a point given in metres.
///
/// # Safety
/// `model` must be a live handle; `point` and `out` must each hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn eflesh_field_at(
    model: *const EfleshSensorModel,
    point: *const f64,
    out: *mut f64,
) -> EfleshStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let p = array_arg::<3>(point, "point")?;
        let out = array_out::<3>(out, "out")?;
        let b = total_field(&m.0.magnets, &Vec3::from(*p))?;
        *out = [b.x, b.y, b.z];
        Ok(())
    })
}

/// 1-based layer after which to pause for a cavity whose top is at
/// `cavity_top` mm.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eflesh_pause_layer(cavity_top: f64, layer_height: f64, out: *mut u32) -> EfleshStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if !(layer_height > 0.0 && layer_height.is_finite()) {
            return Err(Failure {
                status: EfleshStatus::Fabrication,
                message: format!("layer height {layer_height} must be positive"),
            });
        }
        if !(cavity_top > 0.0 && cavity_top.is_finite()) {
            return Err(Failure {
                status: EfleshStatus::Fabrication,
                message: format!("cavity top {cavity_top} must be positive"),
            });
        }
        *out = layer_index_at_or_above(cavity_top, layer_height);
        Ok(())
    })
}

/// Beam width (mm) for a modulus ratio in (0, 1), clamped up to `min_beam`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eflesh_modulus_to_beam(
    modulus_ratio: f64,
    cell_size: f64,
    min_beam: f64,
    out: *mut f64,
) -> EfleshStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = modulus_to_beam(modulus_ratio, cell_size, min_beam)?;
        Ok(())
    })
}

/// Runs the full build described by a config JSON file and writes the
/// bundle to its output folder, relative to the config's directory.
///
/// # Safety
/// `config_path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn eflesh_run_pipeline(config_path: *const c_char, keep_intermediates: bool) -> EfleshStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(config_path, "config_path")?);
        let config = PipelineConfig::from_file(&path)?;
        run_pipeline(
            &config,
            RunOptions {
                keep_intermediates,
                dry_run: false,
            },
        )
        .map_err(|e| Failure {
            status: e.class().into(),
            message: chain(&e),
        })?;
        Ok(())
    })
}
