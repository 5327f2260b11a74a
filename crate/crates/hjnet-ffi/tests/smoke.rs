//! Drives the C ABI from Rust the way a foreign binding would: parse, solve,
//! query values and errors, free everything.

use std::ffi::{CStr, CString};
use std::ptr;

use hjnet_ffi::*;

const NET: &str = r#"{
    "vertices": [{"id": "x"}, {"id": "y"}],
    "edges": [
        {"id": "e", "from": "x", "to": "y",
         "hamiltonian": {"family": "eikonal_power", "exponent": 1.0,
                         "potential": {"constant": 1.0}}}
    ],
    "solver": {"lambda": 1.0, "grid_n": 800}
}"#;

#[test]
fn parse_solve_query_free() {
    unsafe {
        let json = CString::new(NET).unwrap();
        let mut net: *mut HjnNetwork = ptr::null_mut();
        assert_eq!(
            hjnet_network_parse(json.as_ptr(), &mut net),
            HjnStatus::HjnOk
        );
        assert_eq!(hjnet_network_vertex_count(net), 2);
        assert_eq!(hjnet_network_edge_count(net), 2);

        let mut sol: *mut HjnSolution = ptr::null_mut();
        assert_eq!(hjnet_solve(net, 1.0, &mut sol), HjnStatus::HjnOk);
        let mut v = f64::NAN;
        let name = CString::new("x").unwrap();
        assert_eq!(
            hjnet_solution_value(sol, name.as_ptr(), &mut v),
            HjnStatus::HjnOk
        );
        assert!((v - 1.0).abs() < 1e-2);
        assert!(hjnet_solution_residual(sol) < 1e-9);

        let js = hjnet_solution_to_json(sol);
        assert!(!js.is_null());
        let text = CStr::from_ptr(js).to_str().unwrap().to_owned();
        assert!(text.contains("\"vertices\""));
        hjnet_string_free(js);

        let edge = CString::new("e").unwrap();
        let mut rho = f64::NAN;
        assert_eq!(
            hjnet_rho_edge(net, 1.0, edge.as_ptr(), 0.0, &mut rho),
            HjnStatus::HjnOk
        );
        assert!((rho - (1.0 - (-1.0f64).exp())).abs() < 5e-3);

        let cyc = CString::new("e,-e").unwrap();
        let mut beta = f64::NAN;
        assert_eq!(
            hjnet_beta_cycle(net, 1.0, cyc.as_ptr(), &mut beta),
            HjnStatus::HjnOk
        );
        assert!((beta - 1.0).abs() < 1e-2);

        let mut crit = f64::NAN;
        assert_eq!(hjnet_critical_value(net, &mut crit), HjnStatus::HjnOk);
        assert!((crit + 1.0).abs() < 1e-6);

        hjnet_solution_free(sol);
        hjnet_network_free(net);
    }
}

#[test]
fn error_paths_and_messages() {
    unsafe {
        let mut net: *mut HjnNetwork = ptr::null_mut();
        let bad = CString::new("{").unwrap();
        assert_eq!(
            hjnet_network_parse(bad.as_ptr(), &mut net),
            HjnStatus::HjnSchemaError
        );
        let msg = hjnet_last_error_message();
        assert!(!msg.is_null());
        hjnet_string_free(msg);

        let orphan = CString::new(
            r#"{"vertices": [{"id": "x"}], "edges": [
                {"id": "e", "from": "x", "to": "gone",
                 "hamiltonian": {"family": "eikonal_power", "exponent": 1.0,
                                 "potential": {"constant": 1.0}}}]}"#,
        )
        .unwrap();
        assert_eq!(
            hjnet_network_parse(orphan.as_ptr(), &mut net),
            HjnStatus::HjnGraphInvalid
        );

        assert_eq!(
            hjnet_network_parse(ptr::null(), &mut net),
            HjnStatus::HjnInvalidArgument
        );

        // valid handle, unknown names
        let good = CString::new(NET).unwrap();
        assert_eq!(
            hjnet_network_parse(good.as_ptr(), &mut net),
            HjnStatus::HjnOk
        );
        let mut out = f64::NAN;
        let nope = CString::new("nope").unwrap();
        assert_eq!(
            hjnet_rho_edge(net, 1.0, nope.as_ptr(), 0.0, &mut out),
            HjnStatus::HjnInvalidArgument
        );
        // a path that does not close is rejected by beta
        let open = CString::new("e").unwrap();
        assert_eq!(
            hjnet_beta_cycle(net, 1.0, open.as_ptr(), &mut out),
            HjnStatus::HjnInvalidArgument
        );
        hjnet_network_free(net);
        hjnet_network_free(ptr::null_mut());
        hjnet_string_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_exists_and_declares_the_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("hjnet.h");
    let text = std::fs::read_to_string(header).expect("cbindgen header generated at build time");
    for sym in [
        "hjnet_network_parse",
        "hjnet_solve",
        "hjnet_solution_value",
        "hjnet_beta_cycle",
        "hjnet_critical_value",
        "hjnet_string_free",
        "HjnStatus",
    ] {
        assert!(text.contains(sym), "header missing {sym}");
    }
}
