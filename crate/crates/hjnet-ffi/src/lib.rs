//! C ABI for the network solver: opaque handles, integer status codes, and
//! JSON bridges, so other languages can parse a network file, solve the
//! discrete equation, query edge maps and cycle fixed points, and read the
//! limit-layer quantities. The header is generated by cbindgen into
//! include/hjnet.h.
//!
//! Conventions: functions return HjnStatus; outputs go through pointers.
//! Strings returned by the library are owned by the caller and must be
//! released through hjnet_string_free. The last error message is kept per
//! thread and fetched with hjnet_last_error_message.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hjnet::arc::ArcDiscretization;
use hjnet::dfe::{beta_cycle, rho_path, solve_dfe, DfeOptions};
use hjnet::edge_map::EdgeMapTable;
use hjnet::eikonal::eikonal_data;
use hjnet::io;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HjnStatus {
    HjnOk = 0,
    HjnInvalidArgument = 1,
    HjnSchemaError = 2,
    HjnGraphInvalid = 3,
    HjnNumericalError = 4,
    HjnInternalError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn classify_io(e: &io::IoError) -> HjnStatus {
    match e {
        io::IoError::SchemaError(_) => HjnStatus::HjnSchemaError,
        io::IoError::GraphInvalid(_) => HjnStatus::HjnGraphInvalid,
    }
}

/// Opaque parsed network handle.
pub struct HjnNetwork {
    net: io::Network,
}

/// Opaque vertex solution handle.
pub struct HjnSolution {
    values: BTreeMap<String, f64>,
    residual: f64,
    iterations: usize,
    lambda: f64,
}

impl HjnNetwork {
    fn disc(&self) -> ArcDiscretization {
        self.net.solver.discretization()
    }

    fn lambda_or(&self, lambda: f64) -> f64 {
        if lambda > 0.0 {
            lambda
        } else {
            self.net.solver.lambda
        }
    }
}

unsafe fn cstr<'a>(p: *const c_char) -> Option<&'a str> {
    if p.is_null() {
        return None;
    }
    CStr::from_ptr(p).to_str().ok()
}

fn guard<F: FnOnce() -> HjnStatus>(f: F) -> HjnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            HjnStatus::HjnInternalError
        }
    }
}

/// Parses a JSON network description. On success stores a handle in `out`;
/// release it with hjnet_network_free.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hjnet_network_parse(
    json: *const c_char,
    out: *mut *mut HjnNetwork,
) -> HjnStatus {
    guard(|| {
        let (Some(text), false) = (cstr(json), out.is_null()) else {
            set_error("null or non-UTF8 argument");
            return HjnStatus::HjnInvalidArgument;
        };
        match io::parse(text.as_bytes()).and_then(|f| f.build()) {
            Ok(net) => {
                *out = Box::into_raw(Box::new(HjnNetwork { net }));
                HjnStatus::HjnOk
            }
            Err(e) => {
                set_error(&e.to_string());
                classify_io(&e)
            }
        }
    })
}

/// # Safety
/// `net` must be a handle from hjnet_network_parse (or null).
#[no_mangle]
pub unsafe extern "C" fn hjnet_network_free(net: *mut HjnNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn hjnet_network_vertex_count(net: *const HjnNetwork) -> usize {
    if net.is_null() {
        return 0;
    }
    (*net).net.graph.vertex_count()
}

/// Number of oriented edges (twice the arc count).
///
/// # Safety
/// `net` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn hjnet_network_edge_count(net: *const HjnNetwork) -> usize {
    if net.is_null() {
        return 0;
    }
    (*net).net.graph.edge_count()
}

/// Solves the discrete functional equation. `lambda <= 0` uses the file's
/// solver configuration. Release the solution with hjnet_solution_free.
///
/// # Safety
/// `net` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hjnet_solve(
    net: *const HjnNetwork,
    lambda: f64,
    out: *mut *mut HjnSolution,
) -> HjnStatus {
    guard(|| {
        if net.is_null() || out.is_null() {
            set_error("null argument");
            return HjnStatus::HjnInvalidArgument;
        }
        let h = &*net;
        let lambda = h.lambda_or(lambda);
        let run = || -> Result<HjnSolution, hjnet::DiscreteError> {
            let table = EdgeMapTable::numeric(&h.net.graph, &h.net.specs, lambda, &h.disc())?;
            let opts = DfeOptions {
                tol: h.net.solver.tol,
                max_iterations: h.net.solver.caps.max_dfe_iterations,
                ..Default::default()
            };
            let sol = solve_dfe(&table, &h.net.graph, &opts)?;
            Ok(HjnSolution {
                values: h
                    .net
                    .graph
                    .vertices()
                    .map(|x| (h.net.graph.vertex_name(x).to_owned(), sol.value(x)))
                    .collect(),
                residual: sol.residual,
                iterations: sol.iterations,
                lambda,
            })
        };
        match run() {
            Ok(sol) => {
                *out = Box::into_raw(Box::new(sol));
                HjnStatus::HjnOk
            }
            Err(e) => {
                set_error(&e.to_string());
                HjnStatus::HjnNumericalError
            }
        }
    })
}

/// # Safety
/// `sol` must be a handle from hjnet_solve (or null).
#[no_mangle]
pub unsafe extern "C" fn hjnet_solution_free(sol: *mut HjnSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Vertex value by name.
///
/// # Safety
/// Pointers must be valid; `vertex` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hjnet_solution_value(
    sol: *const HjnSolution,
    vertex: *const c_char,
    out: *mut f64,
) -> HjnStatus {
    guard(|| {
        let (Some(name), false, false) = (cstr(vertex), sol.is_null(), out.is_null()) else {
            set_error("null or non-UTF8 argument");
            return HjnStatus::HjnInvalidArgument;
        };
        match (*sol).values.get(name) {
            Some(v) => {
                *out = *v;
                HjnStatus::HjnOk
            }
            None => {
                set_error(&format!("unknown vertex {name:?}"));
                HjnStatus::HjnInvalidArgument
            }
        }
    })
}

/// # Safety
/// `sol` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn hjnet_solution_residual(sol: *const HjnSolution) -> f64 {
    if sol.is_null() {
        return f64::NAN;
    }
    (*sol).residual
}

/// # Safety
/// `sol` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn hjnet_solution_iterations(sol: *const HjnSolution) -> usize {
    if sol.is_null() {
        return 0;
    }
    (*sol).iterations
}

/// JSON rendering of a solution; free with hjnet_string_free.
///
/// # Safety
/// `sol` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn hjnet_solution_to_json(sol: *const HjnSolution) -> *mut c_char {
    if sol.is_null() {
        return ptr::null_mut();
    }
    let s = &*sol;
    let json = serde_json::json!({
        "lambda": s.lambda,
        "vertices": s.values,
        "iterations": s.iterations,
        "residual": s.residual,
    });
    CString::new(json.to_string()).map_or(ptr::null_mut(), CString::into_raw)
}

/// Edge map value rho(alpha, e) for one oriented edge name.
///
/// # Safety
/// Pointers must be valid; `edge` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hjnet_rho_edge(
    net: *const HjnNetwork,
    lambda: f64,
    edge: *const c_char,
    alpha: f64,
    out: *mut f64,
) -> HjnStatus {
    guard(|| {
        let (Some(name), false, false) = (cstr(edge), net.is_null(), out.is_null()) else {
            set_error("null or non-UTF8 argument");
            return HjnStatus::HjnInvalidArgument;
        };
        let h = &*net;
        let Some(e) = h.net.graph.edge_by_name(name) else {
            set_error(&format!("unknown edge {name:?}"));
            return HjnStatus::HjnInvalidArgument;
        };
        let lambda = h.lambda_or(lambda);
        let run = || -> Result<f64, hjnet::DiscreteError> {
            let table = EdgeMapTable::numeric(&h.net.graph, &h.net.specs, lambda, &h.disc())?;
            table.rho(alpha, e)
        };
        match run() {
            Ok(v) => {
                *out = v;
                HjnStatus::HjnOk
            }
            Err(e) => {
                set_error(&e.to_string());
                HjnStatus::HjnNumericalError
            }
        }
    })
}

/// Fixed point of the cycle given as comma-separated oriented edge names.
///
/// # Safety
/// Pointers must be valid; `cycle` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hjnet_beta_cycle(
    net: *const HjnNetwork,
    lambda: f64,
    cycle: *const c_char,
    out: *mut f64,
) -> HjnStatus {
    guard(|| {
        let (Some(csv), false, false) = (cstr(cycle), net.is_null(), out.is_null()) else {
            set_error("null or non-UTF8 argument");
            return HjnStatus::HjnInvalidArgument;
        };
        let h = &*net;
        let names: Vec<&str> = csv.split(',').map(str::trim).collect();
        let path = match h.net.graph.path_by_names(&names) {
            Ok(p) => p,
            Err(e) => {
                set_error(&e.to_string());
                return HjnStatus::HjnInvalidArgument;
            }
        };
        let lambda = h.lambda_or(lambda);
        let run = || -> Result<f64, hjnet::DiscreteError> {
            let table = EdgeMapTable::numeric(&h.net.graph, &h.net.specs, lambda, &h.disc())?;
            beta_cycle(&table, &h.net.graph, &path, 1e-9)
        };
        match run() {
            Ok(v) => {
                *out = v;
                HjnStatus::HjnOk
            }
            Err(e) => {
                set_error(&e.to_string());
                match e {
                    hjnet::DiscreteError::InvalidBackend(_) => HjnStatus::HjnInvalidArgument,
                    _ => HjnStatus::HjnNumericalError,
                }
            }
        }
    })
}

/// rho along a path of comma-separated oriented edge names.
///
/// # Safety
/// Pointers must be valid; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hjnet_rho_path(
    net: *const HjnNetwork,
    lambda: f64,
    path: *const c_char,
    alpha: f64,
    out: *mut f64,
) -> HjnStatus {
    guard(|| {
        let (Some(csv), false, false) = (cstr(path), net.is_null(), out.is_null()) else {
            set_error("null or non-UTF8 argument");
            return HjnStatus::HjnInvalidArgument;
        };
        let h = &*net;
        let names: Vec<&str> = csv.split(',').map(str::trim).collect();
        let p = match h.net.graph.path_by_names(&names) {
            Ok(p) => p,
            Err(e) => {
                set_error(&e.to_string());
                return HjnStatus::HjnInvalidArgument;
            }
        };
        let lambda = h.lambda_or(lambda);
        let run = || -> Result<f64, hjnet::DiscreteError> {
            let table = EdgeMapTable::numeric(&h.net.graph, &h.net.specs, lambda, &h.disc())?;
            rho_path(&table, &p, alpha)
        };
        match run() {
            Ok(v) => {
                *out = v;
                HjnStatus::HjnOk
            }
            Err(e) => {
                set_error(&e.to_string());
                HjnStatus::HjnNumericalError
            }
        }
    })
}

/// Critical level of the limit equation on this network.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hjnet_critical_value(net: *const HjnNetwork, out: *mut f64) -> HjnStatus {
    guard(|| {
        if net.is_null() || out.is_null() {
            set_error("null argument");
            return HjnStatus::HjnInvalidArgument;
        }
        let h = &*net;
        match hjnet::eikonal::critical_value(
            &h.net.graph,
            &h.net.specs,
            h.net.solver.quad_nodes,
            1e-8,
        ) {
            Ok(v) => {
                *out = v;
                HjnStatus::HjnOk
            }
            Err(e) => {
                set_error(&e.to_string());
                HjnStatus::HjnNumericalError
            }
        }
    })
}

/// Full limit-layer report (critical value, per-edge weights, distinguished
/// set) as JSON; free with hjnet_string_free.
///
/// # Safety
/// `net` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn hjnet_eikonal_json(net: *const HjnNetwork) -> *mut c_char {
    if net.is_null() {
        return ptr::null_mut();
    }
    let h = &*net;
    match eikonal_data(
        &h.net.graph,
        &h.net.specs,
        h.net.solver.quad_nodes,
        1e-8,
        1e-7,
        h.net.solver.caps.max_paths,
    ) {
        Ok(data) => {
            let json = io::eikonal_to_json(&h.net.graph, &data);
            CString::new(json.to_string()).map_or(ptr::null_mut(), CString::into_raw)
        }
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Last error message on this thread; free with hjnet_string_free. Null when
/// no error has occurred.
#[no_mangle]
pub extern "C" fn hjnet_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |c| c.clone().into_raw())
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library (or be null).
#[no_mangle]
pub unsafe extern "C" fn hjnet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
